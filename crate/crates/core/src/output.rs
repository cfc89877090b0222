//! CSV and plot-data files for scan results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{Metric, ScanMode, ScanResult, ScanRow};

pub const CSV_HEADER: &str = "n,p,replicates,p_connected,p_connected_lo,p_connected_hi,\
p_has_isolated,p_has_isolated_lo,p_has_isolated_hi,mean_isolated,mean_giant_frac,\
p_mid_component,p_mid_component_lo,p_mid_component_hi,small_mass_frac";

/// What every derived file records about its origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn comment_lines(&self) -> String {
        format!("# seed = {}\n# config_sha256 = {}\n", self.seed, self.config_hash)
    }
}

/// `%g` style with six significant digits.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sorted_rows(result: &ScanResult) -> Result<Vec<&ScanRow>> {
    if result.rows.is_empty() {
        return Err(Error::Domain("refusing to write an empty scan result".into()));
    }
    let mut rows: Vec<&ScanRow> = result.rows.iter().collect();
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)));
    Ok(rows)
}

pub fn csv_string(result: &ScanResult) -> Result<String> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in sorted_rows(result)? {
        let cols = [
            r.n.to_string(),
            fmt_g(r.p),
            r.replicates.to_string(),
            fmt_g(r.connected.estimate),
            fmt_g(r.connected.lo),
            fmt_g(r.connected.hi),
            fmt_g(r.has_isolated.estimate),
            fmt_g(r.has_isolated.lo),
            fmt_g(r.has_isolated.hi),
            fmt_g(r.mean_isolated.value),
            fmt_g(r.mean_giant_frac.value),
            fmt_g(r.mid_component.estimate),
            fmt_g(r.mid_component.lo),
            fmt_g(r.mid_component.hi),
            fmt_g(r.small_mass_frac.value),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(result: &ScanResult, path: &Path) -> Result<()> {
    let text = csv_string(result)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Metrics plotted by default for each scan mode.
pub fn default_metrics(mode: ScanMode) -> &'static [Metric] {
    match mode {
        ScanMode::Connectivity => &[Metric::Connected, Metric::HasIsolated],
        ScanMode::Giant => &[Metric::AnyLarge, Metric::MidComponent, Metric::Giant],
    }
}

/// One whitespace-separated file per `(n, metric)` with columns
/// `p estimate lo hi`. Returns the paths written, in order.
pub fn emit_plotdata(
    result: &ScanResult,
    dir: &Path,
    metrics: &[Metric],
    provenance: &Provenance,
) -> Result<Vec<PathBuf>> {
    let rows = sorted_rows(result)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for n in result.n_values() {
        for &metric in metrics {
            let mut text = provenance.comment_lines();
            let _ = writeln!(text, "# n = {n}, metric = {}, mode = {}", metric.name(), result.mode.name());
            text.push_str("# p estimate lo hi\n");
            for r in rows.iter().filter(|r| r.n == n) {
                let prop = match metric {
                    Metric::Connected => &r.connected,
                    Metric::HasIsolated => &r.has_isolated,
                    Metric::AnyLarge => &r.any_large,
                    Metric::MidComponent => &r.mid_component,
                    Metric::Giant => &r.giant,
                };
                let _ = writeln!(text, "{} {} {} {}", fmt_g(r.p), fmt_g(prop.estimate), fmt_g(prop.lo), fmt_g(prop.hi));
            }
            let path = dir.join(format!("{}_n{n}.dat", metric.name()));
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Seed, config hash, located crossings and the resolved config.
pub fn emit_manifest(
    result: &ScanResult,
    path: &Path,
    provenance: &Provenance,
    normalized_config: &str,
) -> Result<()> {
    let mut text = provenance.comment_lines();
    let _ = writeln!(text, "# mode = {}, beta = {}", result.mode.name(), fmt_g(result.beta));
    for (n, s) in &result.grid_scale {
        let _ = writeln!(text, "# grid_scale n = {n}: {}", fmt_g(*s));
    }
    for c in &result.crossings {
        let show = |v: Option<f64>| v.map_or_else(|| "censored".to_string(), fmt_g);
        let _ = writeln!(
            text,
            "# crossing n = {}, metric = {}, target = {}: p* = {}, normalized = {}, gamma* = {}",
            c.n,
            c.metric.name(),
            fmt_g(c.target),
            show(c.p_star),
            show(c.normalized),
            show(c.gamma_star)
        );
    }
    text.push_str(normalized_config);
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
