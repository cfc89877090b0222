use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::estimate_moments;
use crate::graph::{build_graph, components, small_component_mass};
use crate::model::ModelFamily;
use crate::rng::{derive_seed, ReplicateStream};
use crate::samplers::{EdgeSampler, Sampler, SamplerConfig};
use crate::stats::{pairwise_sum, wilson_interval, Z95};

use super::locator::{threshold_locator, Crossing, Metric};

pub const MIN_REPLICATES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// `p = gamma * scale * ln n / n`
    Connectivity,
    /// `p = gamma * scale / n`
    Giant,
}

impl ScanMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Connectivity => "connectivity",
            Self::Giant => "giant",
        }
    }
}

/// What multiplies `gamma` in a parametric grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    /// An estimated root second moment of the edge variables.
    Sigma,
}

/// Which root second moment stands in for `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaStat {
    Min,
    Max,
    #[default]
    Rms,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PGrid {
    Explicit(Vec<f64>),
    Gamma {
        values: Vec<f64>,
        normalization: Normalization,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub mode: ScanMode,
    pub n_list: Vec<usize>,
    pub grid: PGrid,
    pub replicates: usize,
    /// Component-order cutoff multiplier: "large" means order `>= beta ln n`.
    pub beta: f64,
    pub sigma_stat: SigmaStat,
    /// Draws used to estimate `sigma` for a normalized grid.
    pub pilot_replicates: usize,
    pub target: f64,
    pub model: ModelFamily,
    pub sampler: SamplerConfig,
}

impl ScanConfig {
    pub fn new(mode: ScanMode, model: ModelFamily, sampler: SamplerConfig) -> Self {
        Self {
            mode,
            n_list: vec![],
            grid: PGrid::Explicit(vec![]),
            replicates: 500,
            beta: 2.0,
            sigma_stat: SigmaStat::default(),
            pilot_replicates: 2_000,
            target: 0.5,
            model,
            sampler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Invariant("n_list must be nonempty".into()));
        }
        if let Some(n) = self.n_list.iter().find(|n| **n < 2) {
            return Err(Error::Invariant(format!("vertex counts must be at least 2, got {n}")));
        }
        let mut sorted = self.n_list.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.n_list.len() {
            return Err(Error::Invariant("n_list has duplicates".into()));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Invariant(format!(
                "replicates must be at least {MIN_REPLICATES}, got {}",
                self.replicates
            )));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::Invariant(format!("beta must exceed 1, got {}", self.beta)));
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(Error::Invariant(format!("target must lie in (0, 1), got {}", self.target)));
        }
        let values = match &self.grid {
            PGrid::Explicit(v) => {
                if let Some(p) = v.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                    return Err(Error::Invariant(format!("grid point {p} outside (0, 1)")));
                }
                v
            }
            PGrid::Gamma { values, normalization } => {
                if let Some(g) = values.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
                    return Err(Error::Invariant(format!("gamma values must be positive, got {g}")));
                }
                if *normalization == Normalization::Sigma && self.pilot_replicates < 1000 {
                    return Err(Error::Invariant(
                        "pilot_replicates must be at least 1000 for a sigma-normalized grid".into(),
                    ));
                }
                values
            }
        };
        if values.is_empty() {
            return Err(Error::Invariant("p grid must be nonempty".into()));
        }
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant("p grid has duplicates".into()));
        }
        self.sampler.validate()
    }
}

/// An event frequency with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub count: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    fn new(count: u64, trials: u64) -> Result<Self> {
        let (lo, hi) = wilson_interval(count, trials, Z95)?;
        Ok(Self {
            count,
            estimate: count as f64 / trials as f64,
            lo,
            hi,
        })
    }

    /// Binomial standard error at the estimate.
    pub fn se(&self, trials: usize) -> f64 {
        crate::stats::binomial_se(self.estimate, trials as u64)
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mean {
    pub value: f64,
    pub se: f64,
}

impl Mean {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let value = pairwise_sum(values) / n;
        let sq: Vec<f64> = values.iter().map(|v| (v - value).powi(2)).collect();
        let var = if values.len() > 1 { pairwise_sum(&sq) / (n - 1.0) } else { 0.0 };
        Self {
            value,
            se: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    pub p: f64,
    /// Grid parameter the threshold came from, when parametric.
    pub gamma: Option<f64>,
    pub replicates: usize,
    pub connected: Proportion,
    pub has_isolated: Proportion,
    /// Some component has order `>= beta ln n`.
    pub any_large: Proportion,
    /// Some component has order in `[beta ln n, n/2]`.
    pub mid_component: Proportion,
    /// The largest component has order `> n/2`.
    pub giant: Proportion,
    pub mean_isolated: Mean,
    /// Largest component order over `n`.
    pub mean_giant_frac: Mean,
    /// `sum_{k <= beta ln n} k Z_k / n`.
    pub small_mass_frac: Mean,
    /// Components of order `> n/4`; exploratory.
    pub mean_quarter_components: Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub mode: ScanMode,
    pub beta: f64,
    pub rows: Vec<ScanRow>,
    /// Scale that multiplied `gamma` for each `n` (1 when unnormalized).
    pub grid_scale: BTreeMap<usize, f64>,
    pub crossings: Vec<Crossing>,
}

impl ScanResult {
    pub fn rows_for(&self, n: usize) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    pub fn n_values(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    pub fn sort_rows(&mut self) {
        self.rows
            .sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)));
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Observation {
    connected: bool,
    has_isolated: bool,
    any_large: bool,
    mid: bool,
    giant: bool,
    isolated: usize,
    max_component: usize,
    small_mass: usize,
    quarter: usize,
}

/// Runs the connectivity campaign and locates the `target` crossing of
/// `P(connected)` for every `n`.
pub fn connectivity_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.mode != ScanMode::Connectivity {
        return Err(Error::Invariant("connectivity_scan needs mode = connectivity".into()));
    }
    run_scan(cfg)
}

pub fn giant_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.mode != ScanMode::Giant {
        return Err(Error::Invariant("giant_scan needs mode = giant".into()));
    }
    run_scan(cfg)
}

/// Every replicate draws one edge vector and thresholds it at every grid
/// point of its `n`, so estimates along a row are coupled and monotone.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let seed = cfg.sampler.seed;
    let mut rows = Vec::new();
    let mut grid_scale = BTreeMap::new();
    for &n in &cfg.n_list {
        let spec = cfg.model.build(n)?;
        let sampler = Sampler::new(spec, &cfg.sampler)?;
        let (gammas, ps, scale) = resolve_grid(cfg, &sampler, n, seed)?;
        grid_scale.insert(n, scale);

        let log_n = (n as f64).ln();
        let large = cfg.beta * log_n;
        let cutoff = (large.floor() as usize).max(1);
        let half = n as f64 / 2.0;
        let stream_seed = derive_seed(seed, &format!("scan-n{n}"));

        let per_replicate: Vec<Vec<Observation>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let x = sampler
                    .draws(ReplicateStream::new(stream_seed, r as u64), 1)?
                    .pop()
                    .expect("one draw");
                ps.iter()
                    .map(|&p| {
                        let stats = components(&build_graph(&x, p)?);
                        let giants = stats.count_above(half);
                        if giants > 1 {
                            return Err(Error::Sampler(format!(
                                "{giants} components exceed n/2 (n = {n})"
                            )));
                        }
                        Ok(Observation {
                            connected: stats.connected,
                            has_isolated: stats.isolated_count > 0,
                            any_large: stats.max_component as f64 >= large,
                            mid: stats.count_in(large, half) > 0,
                            giant: giants == 1,
                            isolated: stats.isolated_count,
                            max_component: stats.max_component,
                            small_mass: small_component_mass(&stats, cutoff)?,
                            quarter: stats.count_above(n as f64 / 4.0),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Cell {
                        n,
                        p: f64::NAN,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;

        let reps = cfg.replicates as u64;
        let nf = n as f64;
        for (k, &p) in ps.iter().enumerate() {
            let obs: Vec<Observation> = per_replicate.iter().map(|o| o[k]).collect();
            let count = |f: fn(&Observation) -> bool| obs.iter().filter(|o| f(o)).count() as u64;
            let mean = |f: &dyn Fn(&Observation) -> f64| {
                Mean::of(&obs.iter().map(f).collect::<Vec<_>>())
            };
            let cell = |e: Error| Error::Cell { n, p, source: Box::new(e) };
            rows.push(ScanRow {
                n,
                p,
                gamma: gammas.as_ref().map(|g| g[k]),
                replicates: cfg.replicates,
                connected: Proportion::new(count(|o| o.connected), reps).map_err(cell)?,
                has_isolated: Proportion::new(count(|o| o.has_isolated), reps).map_err(cell)?,
                any_large: Proportion::new(count(|o| o.any_large), reps).map_err(cell)?,
                mid_component: Proportion::new(count(|o| o.mid), reps).map_err(cell)?,
                giant: Proportion::new(count(|o| o.giant), reps).map_err(cell)?,
                mean_isolated: mean(&|o| o.isolated as f64),
                mean_giant_frac: mean(&|o| o.max_component as f64 / nf),
                small_mass_frac: mean(&|o| o.small_mass as f64 / nf),
                mean_quarter_components: mean(&|o| o.quarter as f64),
            });
        }
    }
    let mut result = ScanResult {
        mode: cfg.mode,
        beta: cfg.beta,
        rows,
        grid_scale,
        crossings: vec![],
    };
    result.sort_rows();
    if cfg.mode == ScanMode::Connectivity {
        result.crossings = threshold_locator(&result, Metric::Connected, cfg.target)?;
    }
    Ok(result)
}

type ResolvedGrid = (Option<Vec<f64>>, Vec<f64>, f64);

fn resolve_grid(cfg: &ScanConfig, sampler: &Sampler, n: usize, seed: u64) -> Result<ResolvedGrid> {
    let (values, normalization) = match &cfg.grid {
        PGrid::Explicit(ps) => {
            let mut ps = ps.clone();
            ps.sort_by(f64::total_cmp);
            return Ok((None, ps, 1.0));
        }
        PGrid::Gamma { values, normalization } => (values, *normalization),
    };
    let scale = match normalization {
        Normalization::None => 1.0,
        Normalization::Sigma => {
            let m = estimate_moments(sampler, cfg.pilot_replicates, derive_seed(seed, &format!("pilot-n{n}")))?;
            match cfg.sigma_stat {
                SigmaStat::Min => m.sigma_min(),
                SigmaStat::Max => m.sigma_max(),
                SigmaStat::Rms => m.sigma_rms(),
            }
        }
    };
    let nf = n as f64;
    let unit = match cfg.mode {
        ScanMode::Connectivity => scale * nf.ln() / nf,
        ScanMode::Giant => scale / nf,
    };
    let mut gammas = values.clone();
    gammas.sort_by(f64::total_cmp);
    let ps: Vec<f64> = gammas.iter().map(|g| g * unit).collect();
    if let Some((g, p)) = gammas.iter().zip(&ps).find(|(_, p)| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Cell {
            n,
            p: *p,
            source: Box::new(Error::Domain(format!("gamma = {g} maps outside (0, 1)"))),
        });
    }
    Ok((Some(gammas), ps, scale))
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Sampler(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
