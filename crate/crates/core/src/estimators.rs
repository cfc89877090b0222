//! Monte Carlo estimates of per-edge second moments, tests of the
//! negative-correlation inequality, and checks of the marginal bound
//! `P(X_e <= p) <= p / sigma_min`.

use crate::edges::EdgeVector;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::samplers::{fold_draws, EdgeSampler};
use crate::stats::{binomial_se, pairwise_sum, Z95};

pub use crate::stats::wilson_interval;

/// Width of the verdict band, in combined standard errors.
pub const VERDICT_SIGMAS: f64 = 3.0;

pub const MIN_MOMENT_REPS: usize = 1_000;
pub const MIN_NC_REPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub reps: usize,
    /// `E X_e^2` with its jackknife standard error, in canonical edge order.
    pub per_edge_second_moment: Vec<Estimate>,
    /// `(value, edge index)`
    pub sigma_min_sq: (f64, usize),
    pub sigma_max_sq: (f64, usize),
}

impl MomentEstimate {
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min_sq.0.sqrt()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max_sq.0.sqrt()
    }

    /// Root of the mean second moment over all edges.
    pub fn sigma_rms(&self) -> f64 {
        let v: Vec<f64> = self.per_edge_second_moment.iter().map(|e| e.value).collect();
        (pairwise_sum(&v) / v.len() as f64).sqrt()
    }
}

struct MomentAcc {
    sum2: Vec<f64>,
    sum4: Vec<f64>,
    first: Option<Vec<f64>>,
    varied: bool,
}

/// Per-edge sample second moments over `reps` draws.
///
/// The standard error is the delete-one jackknife of the sample mean of
/// `X_e^2`, which reduces to `s / sqrt(reps)`.
pub fn estimate_moments<S: EdgeSampler + ?Sized>(
    sampler: &S,
    reps: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if reps < MIN_MOMENT_REPS {
        return Err(Error::Domain(format!(
            "moment estimation needs at least {MIN_MOMENT_REPS} draws, got {reps}"
        )));
    }
    let d = crate::edges::edge_count(sampler.n());
    let chunks = fold_draws(
        sampler,
        derive_seed(seed, "moments"),
        reps,
        || MomentAcc {
            sum2: vec![0.0; d],
            sum4: vec![0.0; d],
            first: None,
            varied: false,
        },
        |acc, x: &EdgeVector| {
            for (k, &v) in x.values().iter().enumerate() {
                let y = v * v;
                acc.sum2[k] += y;
                acc.sum4[k] += y * y;
            }
            match &acc.first {
                None => acc.first = Some(x.values().to_vec()),
                Some(f) if !acc.varied => acc.varied = f.as_slice() != x.values(),
                _ => {}
            }
        },
    )?;
    let varied = chunks.iter().any(|c| c.varied)
        || chunks
            .windows(2)
            .any(|w| w[0].first.as_deref() != w[1].first.as_deref());
    if !varied {
        return Err(Error::Degenerate("all draws are identical".into()));
    }

    let nf = reps as f64;
    let mut scratch2 = Vec::with_capacity(chunks.len());
    let mut scratch4 = Vec::with_capacity(chunks.len());
    let per_edge: Vec<Estimate> = (0..d)
        .map(|k| {
            scratch2.clear();
            scratch4.clear();
            scratch2.extend(chunks.iter().map(|c| c.sum2[k]));
            scratch4.extend(chunks.iter().map(|c| c.sum4[k]));
            let s2 = pairwise_sum(&scratch2);
            let s4 = pairwise_sum(&scratch4);
            let mean = s2 / nf;
            let var = ((s4 - s2 * s2 / nf) / (nf - 1.0)).max(0.0);
            Estimate {
                value: mean,
                se: (var / nf).sqrt(),
            }
        })
        .collect();

    let (mut lo, mut hi) = ((f64::INFINITY, 0), (f64::NEG_INFINITY, 0));
    for (k, e) in per_edge.iter().enumerate() {
        if e.value < lo.0 {
            lo = (e.value, k);
        }
        if e.value > hi.0 {
            hi = (e.value, k);
        }
    }
    Ok(MomentEstimate {
        reps,
        per_edge_second_moment: per_edge,
        sigma_min_sq: lo,
        sigma_max_sq: hi,
    })
}

/// Disjoint edge sets with thresholds: the events
/// `A = {X_i > s_i for all i in I}` and `B = {X_j > t_j for all j in J}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcQuery {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

impl NcQuery {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.i.is_empty() || self.j.is_empty() {
            return Err(Error::Domain("index sets must be nonempty".into()));
        }
        if self.i.len() != self.s.len() || self.j.len() != self.t.len() {
            return Err(Error::Domain("one threshold per index is required".into()));
        }
        if let Some(k) = self.i.iter().chain(&self.j).find(|&&k| k >= d) {
            return Err(Error::Domain(format!("edge index {k} out of range (d = {d})")));
        }
        if let Some(k) = self.i.iter().find(|k| self.j.contains(k)) {
            return Err(Error::Domain(format!("index sets overlap at edge {k}")));
        }
        if self.s.iter().chain(&self.t).any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("thresholds must be nonnegative".into()));
        }
        Ok(())
    }

    fn event_a(&self, x: &[f64]) -> bool {
        self.i.iter().zip(&self.s).all(|(&k, &s)| x[k] > s)
    }

    fn event_b(&self, x: &[f64]) -> bool {
        self.j.iter().zip(&self.t).all(|(&k, &t)| x[k] > t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcVerdict {
    Consistent,
    ViolationAt3Sigma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcTestReport {
    pub query: NcQuery,
    pub reps: usize,
    pub joint_estimate: f64,
    pub joint_ci: (f64, f64),
    pub product_estimate: f64,
    pub product_ci: (f64, f64),
    pub marginal_a: f64,
    pub marginal_b: f64,
    pub combined_se: f64,
    pub verdict: NcVerdict,
}

impl NcTestReport {
    /// `(joint - product) / combined_se`.
    pub fn z_score(&self) -> f64 {
        let diff = self.joint_estimate - self.product_estimate;
        if self.combined_se > 0.0 {
            diff / self.combined_se
        } else {
            0.0
        }
    }
}

/// Tests `P(A and B) <= P(A) P(B)`.
///
/// The joint probability and `P(A)` come from one batch of `reps` draws and
/// `P(B)` from an independent second batch, so the product estimate is
/// unbiased. A violation is declared when the joint estimate exceeds the
/// product by more than three combined standard errors.
pub fn nc_test<S: EdgeSampler + ?Sized>(
    sampler: &S,
    query: &NcQuery,
    reps: usize,
    seed: u64,
) -> Result<NcTestReport> {
    query.validate(crate::edges::edge_count(sampler.n()))?;
    if reps < MIN_NC_REPS {
        return Err(Error::Domain(format!(
            "negative-correlation test needs at least {MIN_NC_REPS} draws, got {reps}"
        )));
    }
    let first = fold_draws(
        sampler,
        derive_seed(seed, "nc-joint"),
        reps,
        || (0u64, 0u64),
        |acc, x| {
            let a = query.event_a(x.values());
            acc.0 += u64::from(a);
            acc.1 += u64::from(a && query.event_b(x.values()));
        },
    )?;
    let second = fold_draws(
        sampler,
        derive_seed(seed, "nc-product"),
        reps,
        || 0u64,
        |acc, x| *acc += u64::from(query.event_b(x.values())),
    )?;
    let count_a: u64 = first.iter().map(|c| c.0).sum();
    let count_ab: u64 = first.iter().map(|c| c.1).sum();
    let count_b: u64 = second.iter().sum();

    let r = reps as u64;
    let nf = reps as f64;
    let (pa, pb, pab) = (count_a as f64 / nf, count_b as f64 / nf, count_ab as f64 / nf);
    let product = pa * pb;
    let se_joint = binomial_se(pab, r);
    let (se_a, se_b) = (binomial_se(pa, r), binomial_se(pb, r));
    let se_product = (pb * pb * se_a * se_a + pa * pa * se_b * se_b + se_a * se_a * se_b * se_b).sqrt();
    let combined_se = (se_joint * se_joint + se_product * se_product).sqrt();

    let joint_ci = wilson_interval(count_ab, r, Z95)?;
    let (a_lo, a_hi) = wilson_interval(count_a, r, Z95)?;
    let (b_lo, b_hi) = wilson_interval(count_b, r, Z95)?;
    let verdict = if pab - product > VERDICT_SIGMAS * combined_se {
        NcVerdict::ViolationAt3Sigma
    } else {
        NcVerdict::Consistent
    };
    Ok(NcTestReport {
        query: query.clone(),
        reps,
        joint_estimate: pab,
        joint_ci,
        product_estimate: product,
        product_ci: (a_lo * b_lo, a_hi * b_hi),
        marginal_a: pa,
        marginal_b: pb,
        combined_se,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalBoundRow {
    pub edge: usize,
    pub p: f64,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub se: f64,
    /// `p / sigma_min`
    pub bound: f64,
    pub violated: bool,
}

impl MarginalBoundRow {
    pub fn ratio(&self) -> f64 {
        self.estimate / self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalBoundReport {
    pub sigma_min: f64,
    pub reps: usize,
    pub rows: Vec<MarginalBoundRow>,
}

impl MarginalBoundReport {
    pub fn violations(&self) -> impl Iterator<Item = &MarginalBoundRow> {
        self.rows.iter().filter(|r| r.violated)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(MarginalBoundRow::ratio).fold(0.0, f64::max)
    }
}

/// Checks `P(X_e <= p) <= p / sigma_min + 3 SE` for every edge and grid point.
pub fn marginal_bound_check<S: EdgeSampler + ?Sized>(
    sampler: &S,
    moments: &MomentEstimate,
    p_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<MarginalBoundReport> {
    if let Some(p) = p_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("grid point {p} outside (0, 1)")));
    }
    if reps == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    let d = crate::edges::edge_count(sampler.n());
    let g = p_grid.len();
    let chunks = fold_draws(
        sampler,
        derive_seed(seed, "marginal-bound"),
        reps,
        || vec![0u64; d * g],
        |acc, x| {
            for (e, &v) in x.values().iter().enumerate() {
                for (k, &p) in p_grid.iter().enumerate() {
                    acc[e * g + k] += u64::from(v <= p);
                }
            }
        },
    )?;
    let sigma_min = moments.sigma_min();
    let r = reps as u64;
    let mut rows = Vec::with_capacity(d * g);
    for e in 0..d {
        for (k, &p) in p_grid.iter().enumerate() {
            let count: u64 = chunks.iter().map(|c| c[e * g + k]).sum();
            let estimate = count as f64 / reps as f64;
            let se = binomial_se(estimate, r);
            let bound = p / sigma_min;
            rows.push(MarginalBoundRow {
                edge: e,
                p,
                estimate,
                ci: wilson_interval(count, r, Z95)?,
                se,
                bound,
                violated: estimate > bound + VERDICT_SIGMAS * se,
            });
        }
    }
    Ok(MarginalBoundReport {
        sigma_min,
        reps,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::GobSpec;
    use crate::rng::ReplicateStream;
    use crate::samplers::{Sampler, SamplerConfig, SamplerMethod};

    fn simplex_sampler(n: usize, coef: &[f64]) -> Sampler {
        Sampler::new(
            GobSpec::simplex(n, coef).unwrap(),
            &SamplerConfig::new(SamplerMethod::ExactSimplex, 0),
        )
        .unwrap()
    }

    /// Simpson's rule on `[a, b]` with `m` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for k in 1..m {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn cube_second_moment() {
        let s = Sampler::new(GobSpec::cube(4).unwrap(), &SamplerConfig::new(SamplerMethod::ExactCube, 0)).unwrap();
        let m = estimate_moments(&s, 20_000, 1).unwrap();
        for e in &m.per_edge_second_moment {
            assert!((e.value - 1.0 / 3.0).abs() <= 3.0 * e.se, "{e:?}");
        }
        assert!(m.sigma_min_sq.0 <= m.sigma_max_sq.0);
    }

    #[test]
    fn simplex_second_moments_match_quadrature() {
        // Beta(1,3) marginal density 3(1-t)^2
        let oracle = simpson(|t| t * t * 3.0 * (1.0 - t).powi(2), 0.0, 1.0, 1000);
        assert!((oracle - 0.1).abs() < 1e-12);
        let m = estimate_moments(&simplex_sampler(3, &[1.0; 3]), 50_000, 2).unwrap();
        for e in &m.per_edge_second_moment {
            assert!((e.value - oracle).abs() <= 3.0 * e.se, "{e:?}");
        }
        // coefficient 2 divides the coordinate by 2
        let m = estimate_moments(&simplex_sampler(3, &[1.0, 1.0, 2.0]), 50_000, 3).unwrap();
        let e = m.per_edge_second_moment[2];
        assert!((e.value - oracle / 4.0).abs() <= 3.0 * e.se, "{e:?}");
        assert_eq!(m.sigma_min_sq.1, 2);
    }

    #[test]
    fn jackknife_matches_explicit_leave_one_out() {
        let s = simplex_sampler(2, &[1.0]);
        let draws = s.draws(ReplicateStream::new(derive_seed(4, "moments"), 0), 1000).unwrap();
        let ys: Vec<f64> = draws.iter().map(|x| x.values()[0].powi(2)).collect();
        let n = ys.len() as f64;
        let total: f64 = ys.iter().sum();
        let loo: Vec<f64> = ys.iter().map(|y| (total - y) / (n - 1.0)).collect();
        let mean_loo = loo.iter().sum::<f64>() / n;
        let jack = ((n - 1.0) / n * loo.iter().map(|t| (t - mean_loo).powi(2)).sum::<f64>()).sqrt();
        let m = estimate_moments(&s, 1000, 4).unwrap();
        assert!((m.per_edge_second_moment[0].se - jack).abs() < 1e-9 * jack);
        assert!((m.per_edge_second_moment[0].value - total / n).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_small_inputs() {
        struct Constant;
        impl EdgeSampler for Constant {
            fn n(&self) -> usize {
                3
            }
            fn chunk_len(&self) -> usize {
                100
            }
            fn run_stream(&self, _: ReplicateStream, count: usize, sink: &mut dyn FnMut(&EdgeVector)) -> Result<()> {
                let x = EdgeVector::new(3, vec![0.2; 3]).unwrap();
                (0..count).for_each(|_| sink(&x));
                Ok(())
            }
        }
        assert!(matches!(estimate_moments(&Constant, 2000, 0), Err(Error::Degenerate(_))));
        assert!(estimate_moments(&simplex_sampler(3, &[1.0; 3]), 10, 0).is_err());
    }

    #[test]
    fn nc_query_validation() {
        let s = simplex_sampler(4, &[1.0; 6]);
        let overlap = NcQuery { i: vec![0, 1], j: vec![1], s: vec![0.1, 0.1], t: vec![0.1] };
        assert!(nc_test(&s, &overlap, 10_000, 0).is_err());
        let empty = NcQuery { i: vec![], j: vec![1], s: vec![], t: vec![0.1] };
        assert!(nc_test(&s, &empty, 10_000, 0).is_err());
        let ok = NcQuery { i: vec![0], j: vec![1], s: vec![0.1], t: vec![0.1] };
        assert!(nc_test(&s, &ok, 100, 0).is_err());
    }

    #[test]
    fn cube_is_consistent() {
        let s = Sampler::new(GobSpec::cube(4).unwrap(), &SamplerConfig::new(SamplerMethod::ExactCube, 0)).unwrap();
        let q = NcQuery { i: vec![0, 2], j: vec![5], s: vec![0.3, 0.5], t: vec![0.4] };
        let r = nc_test(&s, &q, 40_000, 5).unwrap();
        assert_eq!(r.verdict, NcVerdict::Consistent);
        assert!((r.joint_estimate / r.product_estimate - 1.0).abs() < 3.0 * r.combined_se / r.product_estimate);
    }

    #[test]
    fn simplex_pair_is_negatively_correlated() {
        // oracle: P(X1 > s, X2 > t) = (1 - s - t)^d and P(X1 > s) = (1 - s)^d for
        // the uniform simplex in dimension d, by integrating the Dirichlet marginal
        let d = 6;
        let joint = |s: f64, t: f64| {
            simpson(|x| simpson(|y| (d * (d - 1)) as f64 * (1.0 - x - y).max(0.0).powi(d - 2), t, 1.0 - x, 400), s, 1.0 - t, 400)
        };
        let j = joint(0.3, 0.3);
        assert!((j - 0.4f64.powi(6)).abs() < 1e-6);
        assert!(j <= 0.7f64.powi(6) * 0.7f64.powi(6));

        let s = simplex_sampler(4, &[1.0; 6]);
        let q = NcQuery { i: vec![0], j: vec![5], s: vec![0.3], t: vec![0.3] };
        let r = nc_test(&s, &q, 100_000, 6).unwrap();
        assert_eq!(r.verdict, NcVerdict::Consistent);
        assert!((r.joint_estimate - j).abs() < 4.0 * r.combined_se);
    }

    #[test]
    fn marginal_bound_on_cube_and_small_simplex() {
        let cube = Sampler::new(GobSpec::cube(3).unwrap(), &SamplerConfig::new(SamplerMethod::ExactCube, 0)).unwrap();
        let m = estimate_moments(&cube, 10_000, 7).unwrap();
        let r = marginal_bound_check(&cube, &m, &[0.1, 0.5, 0.9], 10_000, 8).unwrap();
        assert_eq!(r.violations().count(), 0);

        // exact CDF 1 - (1-p)^3 against p / sqrt(0.1)
        let s = simplex_sampler(3, &[1.0; 3]);
        let oracle = |p: f64| (1.0 - (1.0 - p).powi(3)) / (p / 0.1f64.sqrt());
        let grid = crate::stats::log_space(1e-4, 0.2, 8);
        assert!(grid.iter().all(|&p| oracle(p) <= 1.0));
        assert!((1.0 - 0.8f64.powi(3) - 0.488).abs() < 1e-12);
        let m = estimate_moments(&s, 50_000, 9).unwrap();
        let r = marginal_bound_check(&s, &m, &grid, 50_000, 10).unwrap();
        assert_eq!(r.violations().count(), 0, "{:?}", r.violations().collect::<Vec<_>>());
    }
}
