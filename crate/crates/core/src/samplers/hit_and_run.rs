//! Hit-and-run over a generalized Orlicz ball with optional radial weight.
//!
//! From the current point a direction is drawn uniformly on the sphere, the
//! chord through the point is located, and the next point is drawn on the
//! chord from the target density restricted to it: uniform for the
//! indicator weight, otherwise `h(sum f_e)` by inversion on a 1024-point grid.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::edges::EdgeVector;
use crate::error::{Error, Result};
use crate::orlicz::{Chord, GobSpec, MEMBERSHIP_TOL};

/// Number of points in the inverse-CDF grid on a chord.
pub const CHORD_GRID_POINTS: usize = 1024;
const REFINED_POINTS: usize = 256;
const MAX_REDRAWS: usize = 64;

/// `x_e = a_e / (2d)`; strictly inside because `f(eps a) <= eps f(a) <= eps`.
pub fn start_point(spec: &GobSpec) -> EdgeVector {
    let d = spec.dim();
    let eps = 1.0 / (2.0 * d as f64);
    let values = spec.inverse_scales().into_iter().map(|a| eps * a).collect();
    EdgeVector::from_raw(spec.n(), values)
}

/// Midpoint of the ray `s -> s a` inside the ball.
pub fn center_start(spec: &GobSpec) -> Result<EdgeVector> {
    let a = spec.inverse_scales();
    let gauge = |s: f64| spec.gauge_sum(&a.iter().map(|v| s * v).collect::<Vec<_>>());
    let (mut lo, mut hi) = (0.0, 1.0);
    while gauge(hi) <= 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Sampler("ray from the origin never leaves the ball".into()));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if gauge(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * lo;
    Ok(EdgeVector::from_raw(spec.n(), a.iter().map(|v| s * v).collect()))
}

/// A hit-and-run chain. Cloning a chain clones its state, not its RNG.
#[derive(Debug, Clone)]
pub struct HitAndRunChain<'a> {
    spec: &'a GobSpec,
    x: Vec<f64>,
    u: Vec<f64>,
    grid: Vec<f64>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl<'a> HitAndRunChain<'a> {
    pub fn new(spec: &'a GobSpec, start: EdgeVector) -> Result<Self> {
        if start.n() != spec.n() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                actual: start.dim(),
            });
        }
        let x = start.into_values();
        if x.iter().any(|v| !(*v > 0.0)) || !(spec.gauge_sum(&x) < 1.0 - MEMBERSHIP_TOL) {
            return Err(Error::Sampler("no strictly interior start point".into()));
        }
        let d = x.len();
        Ok(Self {
            spec,
            x,
            u: vec![0.0; d],
            grid: Vec::with_capacity(CHORD_GRID_POINTS),
            weights: Vec::with_capacity(CHORD_GRID_POINTS),
            cdf: Vec::with_capacity(CHORD_GRID_POINTS),
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn current(&self) -> EdgeVector {
        EdgeVector::from_raw(self.spec.n(), self.x.clone())
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let norm = loop {
            let mut s = 0.0;
            for v in self.u.iter_mut() {
                *v = StandardNormal.sample(rng);
                s += *v * *v;
            }
            if s > 0.0 {
                break s.sqrt();
            }
        };
        self.u.iter_mut().for_each(|v| *v /= norm);

        let chord = self.spec.chord_raw(&self.x, &self.u)?;
        let radial = self.spec.radial();
        if !radial.is_indicator() {
            self.build_chord_cdf(chord)?;
        }
        for _ in 0..MAX_REDRAWS {
            let t = if radial.is_indicator() {
                let v: f64 = Open01.sample(rng);
                chord.lo + v * chord.len()
            } else {
                self.invert_chord_cdf(Open01.sample(rng))
            };
            if self.try_move(t) {
                return Ok(());
            }
        }
        Err(Error::Sampler("could not place a strictly interior point on the chord".into()))
    }

    /// Moves to `x + t u` if that point is strictly interior.
    fn try_move(&mut self, t: f64) -> bool {
        let ok = self
            .x
            .iter()
            .zip(&self.u)
            .all(|(&xi, &ui)| xi + t * ui > 0.0);
        if !ok {
            return false;
        }
        if !(self.gauge_at(t) < 1.0 - MEMBERSHIP_TOL) {
            return false;
        }
        for (xi, ui) in self.x.iter_mut().zip(&self.u) {
            *xi += t * ui;
        }
        true
    }

    fn gauge_at(&self, t: f64) -> f64 {
        self.spec.gauge_along(&self.x, &self.u, t)
    }

    /// Grid of 768 uniform points on the chord plus 256 points clustered
    /// around the mode, with the trapezoid CDF of the piecewise-linear density.
    fn build_chord_cdf(&mut self, chord: Chord) -> Result<()> {
        let radial = self.spec.radial();
        // h is nonincreasing, so the mode sits at the minimum of the convex gauge
        let (mut a, mut b) = (chord.lo, chord.hi);
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - inv_phi * (b - a);
            let d = a + inv_phi * (b - a);
            if self.gauge_at(c) <= self.gauge_at(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let mode = 0.5 * (a + b);
        let width = chord.len() / 32.0;
        let (wlo, whi) = ((mode - width).max(chord.lo), (mode + width).min(chord.hi));

        let coarse = CHORD_GRID_POINTS - REFINED_POINTS;
        self.grid.clear();
        self.grid.extend(
            (0..coarse).map(|k| chord.lo + chord.len() * k as f64 / (coarse - 1) as f64),
        );
        self.grid.extend(
            (0..REFINED_POINTS).map(|k| wlo + (whi - wlo) * (k as f64 + 0.5) / REFINED_POINTS as f64),
        );
        self.grid.sort_by(f64::total_cmp);
        self.grid.dedup();

        self.weights.clear();
        for k in 0..self.grid.len() {
            let w = radial.weight(self.gauge_at(self.grid[k]).min(1.0));
            self.weights.push(w);
        }
        let weights = &self.weights;
        self.cdf.clear();
        self.cdf.push(0.0);
        for k in 1..self.grid.len() {
            let area = 0.5 * (weights[k - 1] + weights[k]) * (self.grid[k] - self.grid[k - 1]);
            let last = *self.cdf.last().unwrap();
            self.cdf.push(last + area);
        }
        let total = *self.cdf.last().unwrap();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Sampler("radial weight vanishes on the chord".into()));
        }
        Ok(())
    }

    fn invert_chord_cdf(&self, v: f64) -> f64 {
        let m = self.grid.len();
        let (cdf, weights) = (&self.cdf, &self.weights);
        let target = v * cdf[m - 1];
        let k = cdf.partition_point(|c| *c < target).clamp(1, m - 1);
        let (t0, t1) = (self.grid[k - 1], self.grid[k]);
        let (g0, g1) = (weights[k - 1], weights[k]);
        let r = target - cdf[k - 1];
        let dt = t1 - t0;
        // solve g0 s + (g1 - g0) s^2 / (2 dt) = r for s in [0, dt]
        let slope = (g1 - g0) / dt;
        let s = if slope.abs() < 1e-300 {
            if g0 > 0.0 {
                r / g0
            } else {
                0.5 * dt
            }
        } else {
            let disc = (g0 * g0 + 2.0 * slope * r).max(0.0);
            // stable root of 0.5 slope s^2 + g0 s - r = 0
            2.0 * r / (g0 + disc.sqrt())
        };
        t0 + s.clamp(0.0, dt)
    }
}

/// Runs a chain from `start`: `burn_in` steps, then `count` states retained
/// every `thinning` steps, each passed to `sink`.
pub fn run_chain<R: Rng + ?Sized>(
    spec: &GobSpec,
    start: EdgeVector,
    burn_in: u64,
    thinning: u64,
    count: usize,
    rng: &mut R,
    sink: &mut dyn FnMut(&EdgeVector),
) -> Result<()> {
    if thinning == 0 {
        return Err(Error::Domain("thinning must be at least 1".into()));
    }
    let mut chain = HitAndRunChain::new(spec, start)?;
    for _ in 0..burn_in {
        chain.step(rng)?;
    }
    for _ in 0..count {
        for _ in 0..thinning {
            chain.step(rng)?;
        }
        sink(&chain.current());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::{OrliczComponent, RadialDensity};
    use crate::rng::ReplicateStream;
    use crate::stats::{ks_critical_one_sample, ks_one_sample};

    #[test]
    fn start_point_examples() {
        let s = GobSpec::uniform(3, OrliczComponent::Linear { scale: 1.0 }).unwrap();
        let x = start_point(&s);
        assert!(x.values().iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-15));
        assert!((s.gauge_sum(x.values()) - 0.5).abs() < 1e-15);
        let p = GobSpec::uniform(3, OrliczComponent::Power { scale: 2.0, exponent: 2.0 }).unwrap();
        let y = start_point(&p);
        assert!(y.values().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!((p.gauge_sum(y.values()) - 1.0 / 12.0).abs() < 1e-15);
        for spec in [s, p, GobSpec::cube(5).unwrap()] {
            assert_eq!(spec.membership(&start_point(&spec)).unwrap(), crate::orlicz::Membership::Inside);
            assert_eq!(
                spec.membership(&center_start(&spec).unwrap()).unwrap(),
                crate::orlicz::Membership::Inside
            );
        }
    }

    #[test]
    fn center_start_of_box_is_its_center() {
        let x = center_start(&GobSpec::cube(3).unwrap()).unwrap();
        assert!(x.values().iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn exponential_weight_on_a_segment() {
        // d = 1, body [0, 1], density proportional to exp(-lambda x)
        let lambda = 3.0;
        let spec = GobSpec::uniform(2, OrliczComponent::Linear { scale: 1.0 })
            .unwrap()
            .with_radial(RadialDensity::Exponential { rate: lambda })
            .unwrap();
        let mut rng = ReplicateStream::new(21, 0).rng();
        let mut draws = Vec::new();
        run_chain(&spec, start_point(&spec), 100, 1, 20_000, &mut rng, &mut |x| {
            draws.push(x.values()[0])
        })
        .unwrap();
        let norm = 1.0 - (-lambda).exp();
        let dist = ks_one_sample(&mut draws, |x| (1.0 - (-lambda * x).exp()) / norm);
        let crit = ks_critical_one_sample(0.01, 20_000);
        assert!(dist < crit, "{dist} >= {crit}");
    }

    #[test]
    fn power_decay_weight_on_a_segment() {
        // density proportional to (1 - x)^2 on [0, 1]: CDF 1 - (1 - x)^3
        let spec = GobSpec::uniform(2, OrliczComponent::Linear { scale: 1.0 })
            .unwrap()
            .with_radial(RadialDensity::PowerDecay { exponent: 2.0 })
            .unwrap();
        let mut rng = ReplicateStream::new(22, 0).rng();
        let mut draws = Vec::new();
        run_chain(&spec, start_point(&spec), 100, 1, 20_000, &mut rng, &mut |x| {
            draws.push(x.values()[0])
        })
        .unwrap();
        let dist = ks_one_sample(&mut draws, |x| 1.0 - (1.0 - x).powi(3));
        assert!(dist < ks_critical_one_sample(0.01, 20_000), "{dist}");
    }

    #[test]
    fn chain_is_deterministic_and_supported() {
        let spec = GobSpec::uniform(4, OrliczComponent::Power { scale: 1.0, exponent: 3.0 })
            .unwrap()
            .with_radial(RadialDensity::Exponential { rate: 1.5 })
            .unwrap();
        let collect = || {
            let mut rng = ReplicateStream::new(5, 9).rng();
            let mut out = Vec::new();
            run_chain(&spec, start_point(&spec), 50, 3, 200, &mut rng, &mut |x| out.push(x.clone())).unwrap();
            out
        };
        let (a, b) = (collect(), collect());
        assert_eq!(a, b);
        assert!(a.iter().all(|x| spec.membership(x).unwrap().is_member()));
    }

    #[test]
    fn box_mean() {
        let spec = GobSpec::cube(4).unwrap();
        let mut rng = ReplicateStream::new(23, 0).rng();
        let (mut s, mut k) = (0.0, 0usize);
        run_chain(&spec, start_point(&spec), 10_000, 50, 20_000, &mut rng, &mut |x| {
            s += x.values()[0];
            k += 1;
        })
        .unwrap();
        assert!((s / k as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_thinning_is_rejected() {
        let spec = GobSpec::cube(3).unwrap();
        let mut rng = ReplicateStream::new(1, 0).rng();
        assert!(run_chain(&spec, start_point(&spec), 0, 0, 1, &mut rng, &mut |_| {}).is_err());
    }
}
