//! Exact samplers for the cube, weighted simplices and orthant l_q balls.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::edges::{edge_count, EdgeVector};
use crate::error::{Error, Result};

/// Standard exponential by inversion.
#[inline]
pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.random::<f64>()).ln()
}

/// I.i.d. uniform `[0, 1)` coordinates: the Erdos-Renyi case.
pub fn sample_cube<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<EdgeVector> {
    check_n(n)?;
    let values = (0..edge_count(n)).map(|_| rng.random::<f64>()).collect();
    Ok(EdgeVector::from_raw(n, values))
}

/// Uniform on `{x >= 0 : sum_e c_e x_e <= 1}` via normalized exponential spacings.
pub fn sample_simplex<R: Rng + ?Sized>(
    n: usize,
    coefficients: &[f64],
    rng: &mut R,
) -> Result<EdgeVector> {
    check_n(n)?;
    check_len(n, coefficients.len())?;
    if let Some(c) = coefficients.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::Domain(format!("simplex coefficient must be positive, got {c}")));
    }
    let mut values: Vec<f64> = (0..coefficients.len())
        .map(|_| standard_exponential(rng))
        .collect();
    // the (d+1)-th spacing is the slack variable
    let total = values.iter().sum::<f64>() + standard_exponential(rng);
    for (v, c) in values.iter_mut().zip(coefficients) {
        *v /= total * c;
    }
    Ok(EdgeVector::from_raw(n, values))
}

/// Uniform on the orthant part of `{sum_e (x_e / a_e)^q <= 1}`.
///
/// With `|G_e|^q ~ Gamma(1/q)` and `W ~ Exp(1)`, the point
/// `x_e = a_e |G_e| / (sum |G_j|^q + W)^(1/q)` is uniform on the ball.
pub fn sample_lq_orthant<R: Rng + ?Sized>(
    n: usize,
    q: f64,
    scales: &[f64],
    rng: &mut R,
) -> Result<EdgeVector> {
    check_n(n)?;
    check_len(n, scales.len())?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("exponent q>=1 required, got {q}")));
    }
    if let Some(a) = scales.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Domain(format!("scale must be positive, got {a}")));
    }
    let mut powers: Vec<f64> = if q == 1.0 {
        (0..scales.len()).map(|_| standard_exponential(rng)).collect()
    } else {
        let gamma = Gamma::new(1.0 / q, 1.0).map_err(|e| Error::Sampler(e.to_string()))?;
        (0..scales.len()).map(|_| gamma.sample(rng)).collect()
    };
    let total = powers.iter().sum::<f64>() + standard_exponential(rng);
    let inv_q = 1.0 / q;
    for (v, a) in powers.iter_mut().zip(scales) {
        *v = a * (*v / total).powf(inv_q);
    }
    Ok(EdgeVector::from_raw(n, powers))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 vertices, got {n}")));
    }
    Ok(())
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if len != edge_count(n) {
        return Err(Error::DimensionMismatch {
            expected: edge_count(n),
            actual: len,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::GobSpec;
    use crate::rng::ReplicateStream;
    use crate::stats::ks_two_sample;

    #[test]
    fn cube_moments() {
        let mut rng = ReplicateStream::new(11, 0).rng();
        let reps = 100_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..reps {
            let x = sample_cube(2, &mut rng).unwrap();
            let v = x.values()[0];
            assert!((0.0..1.0).contains(&v));
            m1 += v;
            m2 += v * v;
        }
        assert!((m1 / reps as f64 - 0.5).abs() < 0.005);
        assert!((m2 / reps as f64 - 1.0 / 3.0).abs() < 0.005);
    }

    #[test]
    fn simplex_marginal_survival_and_support() {
        // Beta(1,3) marginal: P(X > 1/2) = 1/8, E X^2 = 1/10
        let spec = GobSpec::simplex(3, &[1.0; 3]).unwrap();
        let mut rng = ReplicateStream::new(12, 0).rng();
        let reps = 100_000;
        let (mut above, mut m2) = (0usize, 0.0);
        for _ in 0..reps {
            let x = sample_simplex(3, &[1.0; 3], &mut rng).unwrap();
            assert!(spec.membership(&x).unwrap().is_member());
            above += usize::from(x.values()[1] > 0.5);
            m2 += x.values()[1].powi(2);
        }
        assert!((above as f64 / reps as f64 - 0.125).abs() < 0.01);
        assert!((m2 / reps as f64 - 0.1).abs() < 0.003);
    }

    #[test]
    fn lq_second_moment_and_support() {
        let spec = GobSpec::lq(3, 2.0, &[1.0; 3]).unwrap();
        let mut rng = ReplicateStream::new(13, 0).rng();
        let reps = 100_000;
        let mut m2 = 0.0;
        for _ in 0..reps {
            let x = sample_lq_orthant(3, 2.0, &[1.0; 3], &mut rng).unwrap();
            assert!(spec.membership(&x).unwrap().is_member());
            m2 += x.values()[2].powi(2);
        }
        assert!((m2 / reps as f64 - 0.2).abs() < 0.006);
    }

    #[test]
    fn lq_with_q_one_matches_simplex() {
        let n = 4;
        let d = edge_count(n);
        let ones = vec![1.0; d];
        let reps = 100_000;
        let mut a = ReplicateStream::new(14, 0).rng();
        let mut b = ReplicateStream::new(14, 1).rng();
        let mut xs = vec![Vec::with_capacity(reps); d + 1];
        let mut ys = vec![Vec::with_capacity(reps); d + 1];
        for _ in 0..reps {
            let x = sample_simplex(n, &ones, &mut a).unwrap();
            let y = sample_lq_orthant(n, 1.0, &ones, &mut b).unwrap();
            for k in 0..d {
                xs[k].push(x.values()[k]);
                ys[k].push(y.values()[k]);
            }
            xs[d].push(x.values().iter().sum());
            ys[d].push(y.values().iter().sum());
        }
        let crit = crate::stats::ks_critical_two_sample(0.01, reps, reps);
        for k in 0..=d {
            let dist = ks_two_sample(&mut xs[k], &mut ys[k]);
            assert!(dist < crit, "coordinate {k}: {dist} >= {crit}");
        }
    }

    #[test]
    fn weighted_simplex_scales_coordinates() {
        let mut rng = ReplicateStream::new(15, 0).rng();
        let coef = [1.0, 1.0, 2.0];
        let spec = GobSpec::simplex(3, &coef).unwrap();
        for _ in 0..1000 {
            let x = sample_simplex(3, &coef, &mut rng).unwrap();
            assert!(spec.membership(&x).unwrap().is_member());
        }
    }

    #[test]
    fn error_paths() {
        let mut rng = ReplicateStream::new(1, 0).rng();
        assert!(sample_simplex(3, &[1.0, 0.0, 1.0], &mut rng).is_err());
        assert!(sample_simplex(3, &[1.0, 1.0], &mut rng).is_err());
        assert!(sample_lq_orthant(3, 0.5, &[1.0; 3], &mut rng).is_err());
        assert!(sample_cube(1, &mut rng).is_err());
    }
}
