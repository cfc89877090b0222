//! TOML run configuration.
//!
//! ```toml
//! [model]
//! family = "simplex"          # cube | simplex | lq | gob
//! n = 50
//! coefficients = 1.0          # one value for every edge, or a list of C(n,2)
//!
//! [sampler]
//! method = "exact"            # exact | hit-and-run
//! seed = 7
//!
//! [scan]
//! mode = "connectivity"       # connectivity | giant
//! n_list = [50, 100]
//! gamma = [0.5, 1.0, 1.5]     # or p_grid = [...]
//! normalize = "sigma"         # none | sigma
//! replicates = 500
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{Normalization, PGrid, ScanConfig, ScanMode, SigmaStat};
use crate::model::{EdgeParam, ModelFamily};
use crate::orlicz::{GobSpec, OrliczComponent, RadialDensity};
use crate::samplers::{SamplerConfig, SamplerMethod, StartRule};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub n: usize,
    pub model: ModelFamily,
    pub sampler: SamplerConfig,
    pub scan: Option<ScanConfig>,
}

impl RunSpec {
    pub fn spec(&self) -> Result<GobSpec> {
        self.model.build(self.n)
    }

    /// Replaces the master seed everywhere it is recorded.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sampler.seed = seed;
        if let Some(scan) = &mut self.scan {
            scan.sampler.seed = seed;
        }
        self
    }

    pub fn seed(&self) -> u64 {
        self.sampler.seed
    }

    /// Canonical TOML with every default spelled out.
    pub fn to_normalized(&self) -> String {
        toml::to_string(&RawConfig::from_run(self)).expect("config tables serialize")
    }

    /// SHA-256 of [`RunSpec::to_normalized`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_normalized().as_bytes()))
    }
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let section = e
            .span()
            .map(|s| section_at(text, s.start))
            .unwrap_or_else(|| "top level".into());
        Error::config(section, e.message().trim().to_string() + &line_note(text, e.span()))
    })?;
    raw.resolve()
}

pub fn read_config(path: &std::path::Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn line_note(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    span.map(|s| {
        let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
        format!(" (line {line})")
    })
    .unwrap_or_default()
}

/// Name of the table whose body contains byte `offset`.
fn section_at(text: &str, offset: usize) -> String {
    let mut section = "top level".to_string();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        if pos > offset {
            break;
        }
        let t = line.trim();
        if t.starts_with('[') {
            section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        pos += line.len();
    }
    section
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    fn param(&self) -> EdgeParam<f64> {
        match self {
            Self::One(v) => EdgeParam::Uniform(*v),
            Self::Many(v) => EdgeParam::PerEdge(v.clone()),
        }
    }

    fn from_param(p: &EdgeParam<f64>) -> Self {
        match p {
            EdgeParam::Uniform(v) => Self::One(*v),
            EdgeParam::PerEdge(v) => Self::Many(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawComponent {
    Power { scale: f64, exponent: f64 },
    Linear { scale: f64 },
    Cap { cap: f64 },
    PiecewiseLinear { points: Vec<[f64; 2]> },
}

impl RawComponent {
    fn resolve(&self) -> Result<OrliczComponent> {
        match self {
            Self::Power { scale, exponent } => OrliczComponent::power(*scale, *exponent),
            Self::Linear { scale } => OrliczComponent::linear(*scale),
            Self::Cap { cap } => OrliczComponent::cap(*cap),
            Self::PiecewiseLinear { points } => {
                OrliczComponent::piecewise_linear(points.iter().map(|p| (p[0], p[1])).collect())
            }
        }
    }

    fn from_component(c: &OrliczComponent) -> Self {
        match c {
            OrliczComponent::Power { scale, exponent } => Self::Power {
                scale: *scale,
                exponent: *exponent,
            },
            OrliczComponent::Linear { scale } => Self::Linear { scale: *scale },
            OrliczComponent::Cap { cap } => Self::Cap { cap: *cap },
            OrliczComponent::PiecewiseLinear(f) => Self::PiecewiseLinear {
                points: f.points().iter().map(|&(t, v)| [t, v]).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawRadial {
    Indicator,
    Exponential { rate: f64 },
    PowerDecay { exponent: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    family: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scales: Option<Values>,
    /// One component shared by every edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    component: Option<RawComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<RawComponent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radial_density: Option<RawRadial>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    #[serde(default = "default_method")]
    method: String,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    burn_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thinning: Option<u64>,
    #[serde(default = "default_start")]
    start: String,
}

fn default_method() -> String {
    "exact".into()
}

fn default_start() -> String {
    "origin-nudge".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalize: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_stat: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pilot_replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    #[serde(default = "default_sampler")]
    sampler: RawSampler,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scan: Option<RawScan>,
}

fn default_sampler() -> RawSampler {
    RawSampler {
        method: default_method(),
        seed: 0,
        burn_in: None,
        thinning: None,
        start: default_start(),
    }
}

fn in_section(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        e @ Error::Config { .. } => e,
        other => Error::config(section, strip_kind(&other)),
    }
}

/// Message of a domain error without its kind prefix.
fn strip_kind(e: &Error) -> String {
    match e {
        Error::Domain(m) | Error::Invariant(m) | Error::Precondition(m) | Error::Sampler(m) => m.clone(),
        other => other.to_string(),
    }
}

impl RawModel {
    fn forbid(&self, keys: &[(&str, bool)]) -> Result<()> {
        for (key, present) in keys {
            if *present {
                return Err(Error::config(
                    "model",
                    format!("key `{key}` does not apply to family `{}`", self.family),
                ));
            }
        }
        Ok(())
    }

    fn resolve(&self) -> Result<ModelFamily> {
        let c = self.coefficients.is_some();
        let q = self.q.is_some();
        let s = self.scales.is_some();
        let comp = self.component.is_some() || self.components.is_some();
        let radial = self.radial_density.is_some();
        let model = match self.family.as_str() {
            "cube" => {
                self.forbid(&[("coefficients", c), ("q", q), ("scales", s), ("components", comp), ("radial_density", radial)])?;
                ModelFamily::Cube
            }
            "simplex" => {
                self.forbid(&[("q", q), ("scales", s), ("components", comp), ("radial_density", radial)])?;
                ModelFamily::Simplex {
                    coefficients: self.coefficients.as_ref().map_or(EdgeParam::Uniform(1.0), Values::param),
                }
            }
            "lq" => {
                self.forbid(&[("coefficients", c), ("components", comp), ("radial_density", radial)])?;
                let q = self.q.ok_or_else(|| Error::config("model", "family `lq` needs `q`"))?;
                if !(q >= 1.0 && q.is_finite()) {
                    return Err(Error::config("model", format!("exponent q>=1 required, got {q}")));
                }
                ModelFamily::Lq {
                    q,
                    scales: self.scales.as_ref().map_or(EdgeParam::Uniform(1.0), Values::param),
                }
            }
            "gob" => {
                self.forbid(&[("coefficients", c), ("q", q), ("scales", s)])?;
                let components = match (&self.component, &self.components) {
                    (Some(one), None) => EdgeParam::Uniform(one.resolve()?),
                    (None, Some(list)) => {
                        EdgeParam::PerEdge(list.iter().map(RawComponent::resolve).collect::<Result<_>>()?)
                    }
                    _ => {
                        return Err(Error::config(
                            "model",
                            "family `gob` needs exactly one of `component` or `components`",
                        ))
                    }
                };
                let radial = match self.radial_density.as_ref().unwrap_or(&RawRadial::Indicator) {
                    RawRadial::Indicator => RadialDensity::Indicator,
                    RawRadial::Exponential { rate } => RadialDensity::Exponential { rate: *rate },
                    RawRadial::PowerDecay { exponent } => RadialDensity::PowerDecay { exponent: *exponent },
                };
                radial.validate()?;
                ModelFamily::Gob { components, radial }
            }
            other => {
                return Err(Error::config(
                    "model",
                    format!("unknown family `{other}` (expected cube, simplex, lq or gob)"),
                ))
            }
        };
        model.build(self.n)?;
        Ok(model)
    }

    fn from_family(n: usize, model: &ModelFamily) -> Self {
        let mut raw = RawModel {
            family: model.name().into(),
            n,
            coefficients: None,
            q: None,
            scales: None,
            component: None,
            components: None,
            radial_density: None,
        };
        match model {
            ModelFamily::Cube => {}
            ModelFamily::Simplex { coefficients } => raw.coefficients = Some(Values::from_param(coefficients)),
            ModelFamily::Lq { q, scales } => {
                raw.q = Some(*q);
                raw.scales = Some(Values::from_param(scales));
            }
            ModelFamily::Gob { components, radial } => {
                match components {
                    EdgeParam::Uniform(c) => raw.component = Some(RawComponent::from_component(c)),
                    EdgeParam::PerEdge(cs) => {
                        raw.components = Some(cs.iter().map(RawComponent::from_component).collect())
                    }
                }
                raw.radial_density = Some(match *radial {
                    RadialDensity::Indicator => RawRadial::Indicator,
                    RadialDensity::Exponential { rate } => RawRadial::Exponential { rate },
                    RadialDensity::PowerDecay { exponent } => RawRadial::PowerDecay { exponent },
                });
            }
        }
        raw
    }
}

impl RawSampler {
    fn resolve(&self, model: &ModelFamily) -> Result<SamplerConfig> {
        let method = match (self.method.as_str(), model) {
            ("hit-and-run", _) => SamplerMethod::HitAndRun,
            ("exact", ModelFamily::Cube) => SamplerMethod::ExactCube,
            ("exact", ModelFamily::Simplex { .. }) => SamplerMethod::ExactSimplex,
            ("exact", ModelFamily::Lq { q, .. }) => SamplerMethod::ExactLq { q: *q },
            ("exact", ModelFamily::Gob { .. }) => {
                return Err(Error::config("sampler", "family `gob` has no exact sampler; use `hit-and-run`"))
            }
            (other, _) => {
                return Err(Error::config(
                    "sampler",
                    format!("unknown method `{other}` (expected exact or hit-and-run)"),
                ))
            }
        };
        let start = match self.start.as_str() {
            "origin-nudge" => StartRule::OriginNudge,
            "analytic-center" => StartRule::AnalyticCenter,
            other => {
                return Err(Error::config(
                    "sampler",
                    format!("unknown start `{other}` (expected origin-nudge or analytic-center)"),
                ))
            }
        };
        let cfg = SamplerConfig {
            method,
            seed: self.seed,
            burn_in: self.burn_in,
            thinning: self.thinning,
            start,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_config(cfg: &SamplerConfig) -> Self {
        RawSampler {
            method: match cfg.method {
                SamplerMethod::HitAndRun => "hit-and-run",
                _ => "exact",
            }
            .into(),
            seed: cfg.seed,
            burn_in: cfg.burn_in,
            thinning: cfg.thinning,
            start: match cfg.start {
                StartRule::OriginNudge => "origin-nudge",
                StartRule::AnalyticCenter => "analytic-center",
            }
            .into(),
        }
    }
}

impl RawScan {
    fn resolve(&self, n: usize, model: &ModelFamily, sampler: &SamplerConfig) -> Result<ScanConfig> {
        let err = |m: String| Error::config("scan", m);
        let mode = match self.mode.as_str() {
            "connectivity" => ScanMode::Connectivity,
            "giant" => ScanMode::Giant,
            other => return Err(err(format!("unknown mode `{other}` (expected connectivity or giant)"))),
        };
        let mut cfg = ScanConfig::new(mode, model.clone(), sampler.clone());
        cfg.n_list = self.n_list.clone().unwrap_or_else(|| vec![n]);
        cfg.grid = match (&self.p_grid, &self.gamma) {
            (Some(ps), None) => {
                if self.normalize.is_some() {
                    return Err(err("`normalize` applies only to a `gamma` grid".into()));
                }
                PGrid::Explicit(ps.clone())
            }
            (None, Some(gs)) => PGrid::Gamma {
                values: gs.clone(),
                normalization: match self.normalize.as_deref().unwrap_or("none") {
                    "none" => Normalization::None,
                    "sigma" => Normalization::Sigma,
                    other => return Err(err(format!("unknown normalize `{other}` (expected none or sigma)"))),
                },
            },
            _ => return Err(err("exactly one of `p_grid` or `gamma` is required".into())),
        };
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(p) = self.pilot_replicates {
            cfg.pilot_replicates = p;
        }
        if let Some(t) = self.target {
            cfg.target = t;
        }
        if let Some(s) = &self.sigma_stat {
            cfg.sigma_stat = match s.as_str() {
                "min" => SigmaStat::Min,
                "max" => SigmaStat::Max,
                "rms" => SigmaStat::Rms,
                other => return Err(err(format!("unknown sigma_stat `{other}` (expected min, max or rms)"))),
            };
        }
        cfg.validate()?;
        for &m in &cfg.n_list {
            model.build(m).map_err(|e| err(format!("n = {m}: {}", strip_kind(&e))))?;
        }
        Ok(cfg)
    }

    fn from_config(cfg: &ScanConfig) -> Self {
        let (p_grid, gamma, normalize) = match &cfg.grid {
            PGrid::Explicit(ps) => (Some(ps.clone()), None, None),
            PGrid::Gamma { values, normalization } => (
                None,
                Some(values.clone()),
                Some(
                    match normalization {
                        Normalization::None => "none",
                        Normalization::Sigma => "sigma",
                    }
                    .into(),
                ),
            ),
        };
        RawScan {
            mode: cfg.mode.name().into(),
            n_list: Some(cfg.n_list.clone()),
            p_grid,
            gamma,
            normalize,
            replicates: Some(cfg.replicates),
            beta: Some(cfg.beta),
            sigma_stat: Some(
                match cfg.sigma_stat {
                    SigmaStat::Min => "min",
                    SigmaStat::Max => "max",
                    SigmaStat::Rms => "rms",
                }
                .into(),
            ),
            pilot_replicates: Some(cfg.pilot_replicates),
            target: Some(cfg.target),
        }
    }
}

impl RawConfig {
    fn resolve(&self) -> Result<RunSpec> {
        let model = self.model.resolve().map_err(in_section("model"))?;
        let sampler = self.sampler.resolve(&model).map_err(in_section("sampler"))?;
        let scan = self
            .scan
            .as_ref()
            .map(|s| s.resolve(self.model.n, &model, &sampler))
            .transpose()
            .map_err(in_section("scan"))?;
        Ok(RunSpec {
            n: self.model.n,
            model,
            sampler,
            scan,
        })
    }

    fn from_run(run: &RunSpec) -> Self {
        RawConfig {
            model: RawModel::from_family(run.n, &run.model),
            sampler: RawSampler::from_config(&run.sampler),
            scan: run.scan.as_ref().map(RawScan::from_config),
        }
    }
}
