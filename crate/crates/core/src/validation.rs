//! Kolmogorov–Smirnov battery comparing a sampler against an exact reference.

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::samplers::{fold_draws, Sampler};
use crate::stats::{ks_critical_two_sample, ks_two_sample};

#[derive(Debug, Clone, PartialEq)]
pub struct KsLine {
    /// Coordinate index, or `None` for the gauge `sum f_e(x_e)`.
    pub coordinate: Option<usize>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub draws: usize,
    pub alpha: f64,
    pub critical: f64,
    pub lines: Vec<KsLine>,
}

impl ValidationReport {
    /// Every coordinate and the gauge must stay below the critical value.
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.distance < self.critical)
    }

    pub fn worst(&self) -> &KsLine {
        self.lines
            .iter()
            .max_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("at least one line")
    }
}

fn columns(sampler: &Sampler, seed: u64, draws: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = sampler.spec().dim();
    let chunks = fold_draws(
        sampler,
        seed,
        draws,
        || (vec![Vec::new(); d], Vec::new()),
        |(cols, gauge): &mut (Vec<Vec<f64>>, Vec<f64>), x| {
            for (c, v) in cols.iter_mut().zip(x.values()) {
                c.push(*v);
            }
            gauge.push(sampler.spec().gauge_sum(x.values()));
        },
    )?;
    let mut cols = vec![Vec::with_capacity(draws); d];
    let mut gauge = Vec::with_capacity(draws);
    for (cs, g) in chunks {
        for (all, c) in cols.iter_mut().zip(cs) {
            all.extend(c);
        }
        gauge.extend(g);
    }
    Ok((cols, gauge))
}

/// Two-sample KS on every coordinate marginal and on the gauge, `draws`
/// retained draws from each side, each line tested at level `alpha`.
pub fn validate_sampler(sampler: &Sampler, draws: usize, seed: u64, alpha: f64) -> Result<ValidationReport> {
    if draws < 100 {
        return Err(Error::Domain(format!("validation needs at least 100 draws, got {draws}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let reference = sampler
        .exact_reference()
        .ok_or_else(|| Error::Validation("no exact reference sampler exists for this spec".into()))?;
    let (mut a_cols, mut a_gauge) = columns(sampler, derive_seed(seed, "validate-candidate"), draws)?;
    let (mut b_cols, mut b_gauge) = columns(&reference, derive_seed(seed, "validate-reference"), draws)?;
    let mut lines: Vec<KsLine> = a_cols
        .iter_mut()
        .zip(b_cols.iter_mut())
        .enumerate()
        .map(|(e, (a, b))| KsLine {
            coordinate: Some(e),
            distance: ks_two_sample(a, b),
        })
        .collect();
    lines.push(KsLine {
        coordinate: None,
        distance: ks_two_sample(&mut a_gauge, &mut b_gauge),
    });
    Ok(ValidationReport {
        draws,
        alpha,
        critical: ks_critical_two_sample(alpha, draws, draws),
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::{GobSpec, OrliczComponent, RadialDensity};
    use crate::samplers::{SamplerConfig, SamplerMethod};

    #[test]
    fn exact_against_itself_passes() {
        let s = Sampler::new(GobSpec::simplex(3, &[1.0; 3]).unwrap(), &SamplerConfig::new(SamplerMethod::ExactSimplex, 0)).unwrap();
        let r = validate_sampler(&s, 5000, 8, 0.01).unwrap();
        assert_eq!(r.lines.len(), 4);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn wrong_law_is_caught() {
        // no burn-in and no thinning: draws stay near the start point
        let spec = GobSpec::simplex(3, &[1.0; 3]).unwrap();
        let bad = Sampler::new(spec, &SamplerConfig::new(SamplerMethod::HitAndRun, 0).with_schedule(0, 1)).unwrap();
        let r = validate_sampler(&bad, 4000, 2, 0.01).unwrap();
        assert!(!r.passed(), "{r:?}");
    }

    #[test]
    fn needs_a_reference() {
        let spec = GobSpec::uniform(3, OrliczComponent::power(1.0, 2.0).unwrap())
            .unwrap()
            .with_radial(RadialDensity::Exponential { rate: 1.0 })
            .unwrap();
        let s = Sampler::new(spec, &SamplerConfig::new(SamplerMethod::HitAndRun, 0)).unwrap();
        assert!(matches!(validate_sampler(&s, 500, 1, 0.01), Err(Error::Validation(_))));
    }
}
