//! Samplers producing [`EdgeVector`] draws.

mod exact;
mod hit_and_run;

pub use exact::{sample_cube, sample_lq_orthant, sample_simplex, standard_exponential};
pub use hit_and_run::{center_start, run_chain, start_point, HitAndRunChain, CHORD_GRID_POINTS};

use rayon::prelude::*;

use crate::edges::EdgeVector;
use crate::error::{Error, Result};
use crate::orlicz::{EdgeComponents, GobSpec, OrliczComponent};
use crate::rng::ReplicateStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerMethod {
    ExactCube,
    ExactSimplex,
    ExactLq { q: f64 },
    HitAndRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    #[default]
    OriginNudge,
    AnalyticCenter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub method: SamplerMethod,
    pub seed: u64,
    /// Defaults to `50 d` when `None`.
    pub burn_in: Option<u64>,
    /// Defaults to `d` when `None`.
    pub thinning: Option<u64>,
    pub start: StartRule,
}

impl SamplerConfig {
    pub fn new(method: SamplerMethod, seed: u64) -> Self {
        Self {
            method,
            seed,
            burn_in: None,
            thinning: None,
            start: StartRule::default(),
        }
    }

    pub fn with_schedule(mut self, burn_in: u64, thinning: u64) -> Self {
        self.burn_in = Some(burn_in);
        self.thinning = Some(thinning);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == Some(0) {
            return Err(Error::Invariant("thinning must be at least 1".into()));
        }
        if let SamplerMethod::ExactLq { q } = self.method {
            if !(q >= 1.0 && q.is_finite()) {
                return Err(Error::Invariant(format!("exponent q>=1 required, got {q}")));
            }
        }
        Ok(())
    }
}

/// Anything that can produce reproducible streams of edge vectors.
pub trait EdgeSampler: Sync {
    fn n(&self) -> usize;

    /// Draws per stream used by [`fold_draws`]; must depend only on the
    /// sampler so that results do not depend on the worker count.
    fn chunk_len(&self) -> usize;

    /// Feeds `count` draws from `stream` to `sink`.
    fn run_stream(
        &self,
        stream: ReplicateStream,
        count: usize,
        sink: &mut dyn FnMut(&EdgeVector),
    ) -> Result<()>;

    fn draws(&self, stream: ReplicateStream, count: usize) -> Result<Vec<EdgeVector>> {
        let mut out = Vec::with_capacity(count);
        self.run_stream(stream, count, &mut |x| out.push(x.clone()))?;
        Ok(out)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Cube { caps: Vec<f64> },
    Simplex { coefficients: Vec<f64> },
    Lq { q: f64, scales: Vec<f64> },
    HitAndRun { burn_in: u64, thinning: u64, start: StartRule },
}

/// A [`GobSpec`] paired with a sampling method.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: GobSpec,
    kind: Kind,
}

impl Sampler {
    /// Fails when an exact method does not match the shape of `spec`.
    pub fn new(spec: GobSpec, config: &SamplerConfig) -> Result<Self> {
        config.validate()?;
        let exact_ok = spec.radial().is_indicator();
        let mismatch = |what: &str| {
            Err(Error::Invariant(format!(
                "{what} sampling needs a uniform law on a matching ball"
            )))
        };
        let d = spec.dim() as u64;
        let kind = match config.method {
            SamplerMethod::ExactCube => match per_edge(&spec, |c| match c {
                OrliczComponent::Cap { cap } => Some(*cap),
                _ => None,
            }) {
                Some(caps) if exact_ok => Kind::Cube { caps },
                _ => return mismatch("exact cube"),
            },
            SamplerMethod::ExactSimplex => match per_edge(&spec, |c| match c {
                OrliczComponent::Linear { scale } => Some(1.0 / scale),
                _ => None,
            }) {
                Some(coefficients) if exact_ok => Kind::Simplex { coefficients },
                _ => return mismatch("exact simplex"),
            },
            SamplerMethod::ExactLq { q } => match per_edge(&spec, |c| match c {
                OrliczComponent::Power { scale, exponent } if *exponent == q => Some(*scale),
                OrliczComponent::Linear { scale } if q == 1.0 => Some(*scale),
                _ => None,
            }) {
                Some(scales) if exact_ok => Kind::Lq { q, scales },
                _ => return mismatch("exact l_q"),
            },
            SamplerMethod::HitAndRun => Kind::HitAndRun {
                burn_in: config.burn_in.unwrap_or(50 * d),
                thinning: config.thinning.unwrap_or(d),
                start: config.start,
            },
        };
        Ok(Self { spec, kind })
    }

    pub fn spec(&self) -> &GobSpec {
        &self.spec
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, Kind::HitAndRun { .. })
    }

    /// `(burn_in, thinning)` for hit-and-run samplers.
    pub fn schedule(&self) -> Option<(u64, u64)> {
        match self.kind {
            Kind::HitAndRun { burn_in, thinning, .. } => Some((burn_in, thinning)),
            _ => None,
        }
    }

    /// An exact sampler for the same law, when one exists.
    pub fn exact_reference(&self) -> Option<Sampler> {
        let seedless = |method| SamplerConfig::new(method, 0);
        [
            SamplerMethod::ExactCube,
            SamplerMethod::ExactSimplex,
            SamplerMethod::ExactLq { q: 1.0 },
        ]
        .into_iter()
        .chain(uniform_power_exponent(&self.spec).map(|q| SamplerMethod::ExactLq { q }))
        .find_map(|m| Sampler::new(self.spec.clone(), &seedless(m)).ok())
    }
}

fn per_edge(spec: &GobSpec, f: impl Fn(&OrliczComponent) -> Option<f64>) -> Option<Vec<f64>> {
    match spec.components() {
        EdgeComponents::Uniform(c) => f(c).map(|v| vec![v; spec.dim()]),
        EdgeComponents::PerEdge(cs) => cs.iter().map(f).collect(),
    }
}

fn uniform_power_exponent(spec: &GobSpec) -> Option<f64> {
    match spec.component(0) {
        OrliczComponent::Power { exponent, .. } => Some(*exponent),
        _ => None,
    }
}

impl EdgeSampler for Sampler {
    fn n(&self) -> usize {
        self.spec.n()
    }

    fn chunk_len(&self) -> usize {
        match self.kind {
            // keep a chunk around a million coordinates
            Kind::Cube { .. } | Kind::Simplex { .. } | Kind::Lq { .. } => {
                (1 << 20) / self.spec.dim().max(1)
            }
            .clamp(1, 1024),
            Kind::HitAndRun { .. } => 4096,
        }
    }

    fn run_stream(
        &self,
        stream: ReplicateStream,
        count: usize,
        sink: &mut dyn FnMut(&EdgeVector),
    ) -> Result<()> {
        let mut rng = stream.rng();
        let n = self.spec.n();
        match &self.kind {
            Kind::Cube { caps } => {
                for _ in 0..count {
                    let x = sample_cube(n, &mut rng)?;
                    if caps.iter().all(|c| *c == 1.0) {
                        sink(&x);
                    } else {
                        let v = x.values().iter().zip(caps).map(|(u, c)| u * c).collect();
                        sink(&EdgeVector::from_raw(n, v));
                    }
                }
            }
            Kind::Simplex { coefficients } => {
                for _ in 0..count {
                    sink(&sample_simplex(n, coefficients, &mut rng)?);
                }
            }
            Kind::Lq { q, scales } => {
                for _ in 0..count {
                    sink(&sample_lq_orthant(n, *q, scales, &mut rng)?);
                }
            }
            Kind::HitAndRun {
                burn_in,
                thinning,
                start,
            } => {
                let x0 = match start {
                    StartRule::OriginNudge => start_point(&self.spec),
                    StartRule::AnalyticCenter => center_start(&self.spec)?,
                };
                run_chain(&self.spec, x0, *burn_in, *thinning, count, &mut rng, sink)?;
            }
        }
        Ok(())
    }
}

/// Splits `reps` draws into fixed-size chunks, one stream per chunk
/// (`ReplicateStream(master_seed, chunk)`), folds each chunk in parallel, and
/// returns the chunk accumulators in chunk order.
pub fn fold_draws<S, A, I, F>(
    sampler: &S,
    master_seed: u64,
    reps: usize,
    init: I,
    step: F,
) -> Result<Vec<A>>
where
    S: EdgeSampler + ?Sized,
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &EdgeVector) + Sync,
{
    let chunk = sampler.chunk_len().max(1);
    let chunks = reps.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = chunk.min(reps - c * chunk);
            let mut acc = init();
            sampler.run_stream(ReplicateStream::new(master_seed, c as u64), count, &mut |x| {
                step(&mut acc, x)
            })?;
            Ok(acc)
        })
        .collect()
}
