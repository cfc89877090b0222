//! Generalized Orlicz balls restricted to the nonnegative orthant.
//!
//! A body is `{x >= 0 : sum_e f_e(x_e) <= 1}` where every `f_e` is convex,
//! nondecreasing, lower semicontinuous, `f_e(0) = 0`, with values in
//! `[0, +inf]`. `+inf` is represented by `f64::INFINITY`; sums saturate.

use crate::edges::{edge_count, EdgeVector};
use crate::error::{Error, Result};

/// Absolute tolerance on `sum f_e(x_e) - 1` used by [`GobSpec::membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Absolute tolerance on chord endpoints.
pub const CHORD_TOL: f64 = 1e-10;
/// Relative tolerance for bisection in [`OrliczComponent::inverse_at_one`].
pub const INVERSE_REL_TOL: f64 = 1e-12;

/// Piecewise-linear convex function through `(0, 0)`, extended past the last
/// breakpoint with the last slope.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConvex {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinearConvex {
    /// Breakpoints must start at `(0, 0)`, have strictly increasing `t`, and
    /// nondecreasing nonnegative slopes with a positive final slope.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invariant(
                "piecewise-linear component needs at least two breakpoints".into(),
            ));
        }
        if points[0] != (0.0, 0.0) {
            return Err(Error::Invariant(
                "piecewise-linear component must start at (0, 0)".into(),
            ));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Invariant("breakpoints must be finite".into()));
        }
        let mut prev_slope = 0.0;
        for w in points.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                return Err(Error::Invariant(format!(
                    "breakpoints must have strictly increasing t ({t0} then {t1})"
                )));
            }
            let slope = (v1 - v0) / (t1 - t0);
            if slope < prev_slope {
                return Err(Error::Invariant(format!(
                    "slopes must be nonnegative and nondecreasing (slope {slope} after {prev_slope})"
                )));
            }
            prev_slope = slope;
        }
        if prev_slope <= 0.0 {
            return Err(Error::Invariant(
                "piecewise-linear component is identically zero".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn value(&self, t: f64) -> f64 {
        let pts = &self.points;
        // index of the first breakpoint with abscissa > t
        let k = pts.partition_point(|(s, _)| *s <= t);
        let (a, b) = if k >= pts.len() {
            (pts[pts.len() - 2], pts[pts.len() - 1])
        } else {
            (pts[k - 1], pts[k])
        };
        let slope = (b.1 - a.1) / (b.0 - a.0);
        a.1 + slope * (t - a.0)
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(t, v)| (t * s, v)).collect(),
        }
    }
}

/// One convex function `f_e` defining a coordinate of the ball.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczComponent {
    /// `(t / scale)^exponent`, `exponent >= 1`.
    Power { scale: f64, exponent: f64 },
    /// `t / scale`.
    Linear { scale: f64 },
    /// `0` on `[0, cap]`, `+inf` beyond.
    Cap { cap: f64 },
    PiecewiseLinear(PiecewiseLinearConvex),
}

impl OrliczComponent {
    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        let c = Self::Power { scale, exponent };
        c.validate()?;
        Ok(c)
    }

    pub fn linear(scale: f64) -> Result<Self> {
        let c = Self::Linear { scale };
        c.validate()?;
        Ok(c)
    }

    pub fn cap(cap: f64) -> Result<Self> {
        let c = Self::Cap { cap };
        c.validate()?;
        Ok(c)
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::PiecewiseLinear(PiecewiseLinearConvex::new(points)?))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Invariant(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Self::Power { scale, exponent } => {
                positive("scale", *scale)?;
                if !(*exponent >= 1.0 && exponent.is_finite()) {
                    return Err(Error::Invariant(format!("exponent q>=1 required, got {exponent}")));
                }
                Ok(())
            }
            Self::Linear { scale } => positive("scale", *scale),
            Self::Cap { cap } => positive("cap", *cap),
            // validated at construction
            Self::PiecewiseLinear(_) => Ok(()),
        }
    }

    /// `f(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("component evaluated at negative t = {t}")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation; negative inputs are treated as 0.
    #[inline]
    pub(crate) fn value(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            Self::Power { scale, exponent } => {
                let r = t / scale;
                if *exponent == 1.0 {
                    r
                } else if *exponent == 2.0 {
                    r * r
                } else {
                    r.powf(*exponent)
                }
            }
            Self::Linear { scale } => t / scale,
            Self::Cap { cap } => {
                if t <= *cap {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::PiecewiseLinear(f) => f.value(t),
        }
    }

    /// `a = sup{t > 0 : f(t) <= 1}`.
    pub fn inverse_at_one(&self) -> f64 {
        match self {
            Self::Power { scale, .. } | Self::Linear { scale } => *scale,
            Self::Cap { cap } => *cap,
            Self::PiecewiseLinear(f) => {
                let mut lo = 0.0;
                let mut hi = f.points.last().map(|p| p.0).unwrap_or(1.0).max(1e-300);
                while f.value(hi) <= 1.0 {
                    lo = hi;
                    hi *= 2.0;
                }
                while hi - lo > INVERSE_REL_TOL * hi {
                    let mid = 0.5 * (lo + hi);
                    if f.value(mid) <= 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// The component `t -> f(t / s)`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Self::Power { scale, exponent } => Self::Power {
                scale: scale * s,
                exponent: *exponent,
            },
            Self::Linear { scale } => Self::Linear { scale: scale * s },
            Self::Cap { cap } => Self::Cap { cap: cap * s },
            Self::PiecewiseLinear(f) => Self::PiecewiseLinear(f.scaled(s)),
        }
    }
}

/// Nonincreasing log-concave weight `h` applied to `sum f_e(x_e)`.
///
/// The law is always restricted to the ball, so `h` only matters on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialDensity {
    Indicator,
    Exponential { rate: f64 },
    /// `(1 - u)_+^exponent`
    PowerDecay { exponent: f64 },
}

impl RadialDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Indicator => Ok(()),
            Self::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            Self::Exponential { rate } => {
                Err(Error::Invariant(format!("exponential rate must be positive, got {rate}")))
            }
            Self::PowerDecay { exponent } if exponent >= 0.0 && exponent.is_finite() => Ok(()),
            Self::PowerDecay { exponent } => Err(Error::Invariant(format!(
                "power-decay exponent must be nonnegative, got {exponent}"
            ))),
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, Self::Indicator)
    }

    /// `h(u)` restricted to the ball: zero for `u > 1`.
    pub fn weight(&self, u: f64) -> f64 {
        if !(u <= 1.0) {
            return 0.0;
        }
        match *self {
            Self::Indicator => 1.0,
            Self::Exponential { rate } => (-rate * u).exp(),
            Self::PowerDecay { exponent } => (1.0 - u).max(0.0).powf(exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeComponents {
    Uniform(OrliczComponent),
    PerEdge(Vec<OrliczComponent>),
}

/// Classification of a point against the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    BoundaryWithinTol,
    Outside,
}

impl Membership {
    /// Inside or on the boundary.
    pub fn is_member(self) -> bool {
        !matches!(self, Membership::Outside)
    }
}

/// The feasible parameter range of a line through an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub lo: f64,
    pub hi: f64,
}

impl Chord {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GobSpec {
    n: usize,
    components: EdgeComponents,
    radial: RadialDensity,
}

impl GobSpec {
    pub fn new(n: usize, components: EdgeComponents, radial: RadialDensity) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 vertices, got {n}")));
        }
        match &components {
            EdgeComponents::Uniform(c) => c.validate()?,
            EdgeComponents::PerEdge(cs) => {
                if cs.len() != edge_count(n) {
                    return Err(Error::DimensionMismatch {
                        expected: edge_count(n),
                        actual: cs.len(),
                    });
                }
                for c in cs {
                    c.validate()?;
                }
            }
        }
        radial.validate()?;
        Ok(Self {
            n,
            components,
            radial,
        })
    }

    pub fn uniform(n: usize, component: OrliczComponent) -> Result<Self> {
        Self::new(n, EdgeComponents::Uniform(component), RadialDensity::Indicator)
    }

    /// `[0,1]^d`: every component is `Cap(1)`.
    pub fn cube(n: usize) -> Result<Self> {
        Self::uniform(n, OrliczComponent::Cap { cap: 1.0 })
    }

    /// `{x >= 0 : sum_e c_e x_e <= 1}` for positive coefficients `c_e`.
    pub fn simplex(n: usize, coefficients: &[f64]) -> Result<Self> {
        let cs = coefficients
            .iter()
            .map(|&c| {
                if c > 0.0 && c.is_finite() {
                    Ok(OrliczComponent::Linear { scale: 1.0 / c })
                } else {
                    Err(Error::Domain(format!("simplex coefficient must be positive, got {c}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, EdgeComponents::PerEdge(cs), RadialDensity::Indicator)
    }

    /// Orthant part of `{sum_e (x_e / a_e)^q <= 1}`.
    pub fn lq(n: usize, q: f64, scales: &[f64]) -> Result<Self> {
        let cs = scales
            .iter()
            .map(|&a| OrliczComponent::power(a, q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, EdgeComponents::PerEdge(cs), RadialDensity::Indicator)
    }

    pub fn with_radial(mut self, radial: RadialDensity) -> Result<Self> {
        radial.validate()?;
        self.radial = radial;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        edge_count(self.n)
    }

    pub fn components(&self) -> &EdgeComponents {
        &self.components
    }

    pub fn radial(&self) -> RadialDensity {
        self.radial
    }

    #[inline]
    pub fn component(&self, e: usize) -> &OrliczComponent {
        match &self.components {
            EdgeComponents::Uniform(c) => c,
            EdgeComponents::PerEdge(cs) => &cs[e],
        }
    }

    /// `a_e` for every edge, in canonical order.
    pub fn inverse_scales(&self) -> Vec<f64> {
        match &self.components {
            EdgeComponents::Uniform(c) => vec![c.inverse_at_one(); self.dim()],
            EdgeComponents::PerEdge(cs) => cs.iter().map(OrliczComponent::inverse_at_one).collect(),
        }
    }

    /// `sum_e f_e(x_e)`, saturating at `+inf`.
    pub fn gauge_sum(&self, values: &[f64]) -> f64 {
        match &self.components {
            EdgeComponents::Uniform(c) => values.iter().map(|&v| c.value(v)).sum(),
            EdgeComponents::PerEdge(cs) => {
                values.iter().zip(cs).map(|(&v, c)| c.value(v)).sum()
            }
        }
    }

    /// `sum_e f_e(x_e + t u_e)`.
    pub(crate) fn gauge_along(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        match &self.components {
            EdgeComponents::Uniform(c) => {
                x.iter().zip(u).map(|(&xi, &ui)| c.value(xi + t * ui)).sum()
            }
            EdgeComponents::PerEdge(cs) => x
                .iter()
                .zip(u)
                .zip(cs)
                .map(|((&xi, &ui), c)| c.value(xi + t * ui))
                .sum(),
        }
    }

    pub fn membership(&self, x: &EdgeVector) -> Result<Membership> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(self.classify(x.values()))
    }

    /// Membership of a raw coordinate slice; negative coordinates are outside.
    pub fn classify(&self, values: &[f64]) -> Membership {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Membership::Outside;
        }
        let s = self.gauge_sum(values);
        if s < 1.0 - MEMBERSHIP_TOL {
            Membership::Inside
        } else if s <= 1.0 + MEMBERSHIP_TOL {
            Membership::BoundaryWithinTol
        } else {
            Membership::Outside
        }
    }

    /// Maximal `[lo, hi]` with `x + t u` in the ball and the orthant.
    ///
    /// `u` need not be normalized; `t` is measured in units of `u`.
    pub fn chord(&self, x: &EdgeVector, u: &[f64]) -> Result<Chord> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        self.chord_raw(x.values(), u)
    }

    pub(crate) fn chord_raw(&self, x: &[f64], u: &[f64]) -> Result<Chord> {
        if u.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: u.len(),
            });
        }
        if u.iter().all(|v| *v == 0.0) || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("chord direction must be nonzero and finite".into()));
        }
        if x.iter().any(|v| !(*v > 0.0)) || !(self.gauge_sum(x) < 1.0 - MEMBERSHIP_TOL) {
            return Err(Error::Precondition(
                "chord requires a point strictly inside the ball and the orthant".into(),
            ));
        }
        let hi = self.chord_end(x, u, 1.0)?;
        let lo = -self.chord_end(x, u, -1.0)?;
        Ok(Chord { lo, hi })
    }

    /// Largest feasible `t >= 0` along `sign * u`, to within [`CHORD_TOL`].
    fn chord_end(&self, x: &[f64], u: &[f64], sign: f64) -> Result<f64> {
        let mut limit = f64::INFINITY;
        for (&xi, &ui) in x.iter().zip(u) {
            let ui = sign * ui;
            if ui < 0.0 {
                limit = limit.min(xi / -ui);
            }
        }
        let feasible = |t: f64| self.gauge_along(x, u, sign * t) <= 1.0;

        let mut lo = 0.0;
        let mut hi;
        if limit.is_finite() {
            if feasible(limit) {
                return Ok(limit);
            }
            hi = limit;
        } else {
            hi = 1.0;
            let mut doublings = 0;
            while feasible(hi) {
                lo = hi;
                hi *= 2.0;
                doublings += 1;
                if doublings > 2000 {
                    return Err(Error::Sampler("unbounded chord".into()));
                }
            }
        }
        while hi - lo > CHORD_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// `max_e a_e^2`, an upper bound on the conditional second moment `M`.
    pub fn m_bound(&self) -> f64 {
        self.inverse_scales()
            .into_iter()
            .map(|a| a * a)
            .fold(0.0, f64::max)
    }

    /// `max_e a_e / min_e a_e`; recorded as metadata only.
    pub fn aspect_ratio(&self) -> f64 {
        let a = self.inverse_scales();
        let max = a.iter().cloned().fold(f64::MIN, f64::max);
        let min = a.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }
}
