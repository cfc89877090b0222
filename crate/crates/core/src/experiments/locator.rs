use crate::error::{Error, Result};

use super::scan::{ScanMode, ScanResult, ScanRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Connected,
    HasIsolated,
    AnyLarge,
    MidComponent,
    Giant,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Connected,
        Metric::HasIsolated,
        Metric::AnyLarge,
        Metric::MidComponent,
        Metric::Giant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Connected => "connected",
            Self::HasIsolated => "has_isolated",
            Self::AnyLarge => "any_large",
            Self::MidComponent => "mid_component",
            Self::Giant => "giant",
        }
    }

    pub fn of(self, row: &ScanRow) -> f64 {
        let prop = match self {
            Self::Connected => &row.connected,
            Self::HasIsolated => &row.has_isolated,
            Self::AnyLarge => &row.any_large,
            Self::MidComponent => &row.mid_component,
            Self::Giant => &row.giant,
        };
        prop.estimate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub n: usize,
    pub metric: Metric,
    pub target: f64,
    /// `None` when the estimates never straddle the target.
    pub p_star: Option<f64>,
    /// `p* n / ln n` in connectivity mode, `p* n` in giant mode.
    pub normalized: Option<f64>,
    /// `normalized` divided by the grid scale of this `n`.
    pub gamma_star: Option<f64>,
}

impl Crossing {
    pub fn censored(&self) -> bool {
        self.p_star.is_none()
    }
}

/// First crossing of `target` along each row, by linear interpolation
/// between the bracketing grid points. Works for rising and falling
/// metrics alike; no extrapolation past the grid.
pub fn threshold_locator(result: &ScanResult, metric: Metric, target: f64) -> Result<Vec<Crossing>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target must lie in (0, 1), got {target}")));
    }
    let mut out = Vec::new();
    for n in result.n_values() {
        let mut pts: Vec<(f64, f64)> = result.rows_for(n).map(|r| (r.p, metric.of(r))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let p_star = crossing(&pts, target);
        let nf = n as f64;
        let normalized = p_star.map(|p| match result.mode {
            ScanMode::Connectivity => p * nf / nf.ln(),
            ScanMode::Giant => p * nf,
        });
        let scale = result.grid_scale.get(&n).copied().unwrap_or(1.0);
        out.push(Crossing {
            n,
            metric,
            target,
            p_star,
            normalized,
            gamma_star: normalized.map(|v| v / scale),
        });
    }
    Ok(out)
}

fn crossing(pts: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(p, _)) = pts.iter().find(|(_, e)| *e == target) {
        let first_straddle = pts
            .windows(2)
            .position(|w| (w[0].1 - target) * (w[1].1 - target) < 0.0);
        let at = pts.iter().position(|(_, e)| *e == target);
        if first_straddle.is_none_or(|s| at.is_some_and(|a| a <= s)) {
            return Some(p);
        }
    }
    pts.windows(2).find_map(|w| {
        let ((p0, e0), (p1, e1)) = (w[0], w[1]);
        ((e0 - target) * (e1 - target) < 0.0).then(|| p0 + (target - e0) * (p1 - p0) / (e1 - e0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scan::{Mean, Proportion};
    use std::collections::BTreeMap;

    fn row(n: usize, p: f64, connected: f64) -> ScanRow {
        let prop = |e: f64| Proportion {
            count: (e * 100.0).round() as u64,
            estimate: e,
            lo: 0.0,
            hi: 1.0,
        };
        let m = Mean { value: 0.0, se: 0.0 };
        ScanRow {
            n,
            p,
            gamma: None,
            replicates: 100,
            connected: prop(connected),
            has_isolated: prop(1.0 - connected),
            any_large: prop(0.0),
            mid_component: prop(0.0),
            giant: prop(0.0),
            mean_isolated: m,
            mean_giant_frac: m,
            small_mass_frac: m,
            mean_quarter_components: m,
        }
    }

    fn result(rows: Vec<ScanRow>) -> ScanResult {
        ScanResult {
            mode: ScanMode::Connectivity,
            beta: 2.0,
            rows,
            grid_scale: BTreeMap::new(),
            crossings: vec![],
        }
    }

    #[test]
    fn interpolates_between_bracketing_points() {
        let r = result(vec![row(10, 0.01, 0.3), row(10, 0.02, 0.7)]);
        let c = &threshold_locator(&r, Metric::Connected, 0.5).unwrap()[0];
        assert!((c.p_star.unwrap() - 0.015).abs() < 1e-15);
        let expected = 0.015 * 10.0 / 10f64.ln();
        assert!((c.normalized.unwrap() - expected).abs() < 1e-15);
        // falling metric crosses at the same place
        let c = &threshold_locator(&r, Metric::HasIsolated, 0.5).unwrap()[0];
        assert!((c.p_star.unwrap() - 0.015).abs() < 1e-15);
    }

    #[test]
    fn monotone_grid_has_one_crossing_per_n() {
        let rows: Vec<_> = (1..=10)
            .flat_map(|k| [row(20, k as f64 * 0.01, k as f64 * 0.095), row(40, k as f64 * 0.01, k as f64 * 0.09)])
            .collect();
        let cs = threshold_locator(&result(rows), Metric::Connected, 0.5).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| !c.censored()));
        assert!((cs[0].p_star.unwrap() - 0.5 / 9.5).abs() < 1e-12);
    }

    #[test]
    fn exact_hit_on_grid_point() {
        let r = result(vec![row(5, 0.1, 0.2), row(5, 0.2, 0.5), row(5, 0.3, 0.9)]);
        assert_eq!(threshold_locator(&r, Metric::Connected, 0.5).unwrap()[0].p_star, Some(0.2));
    }

    #[test]
    fn no_straddle_is_censored() {
        let r = result(vec![row(10, 0.01, 0.1), row(10, 0.02, 0.3)]);
        let c = &threshold_locator(&r, Metric::Connected, 0.5).unwrap()[0];
        assert!(c.censored());
        assert!(c.normalized.is_none());
        assert!(threshold_locator(&r, Metric::Connected, 1.0).is_err());
    }
}
