//! Monte Carlo campaigns over `(n, p)` grids and the exact small-`n` oracle.

mod locator;
mod oracle;
mod scan;

pub use locator::{threshold_locator, Crossing, Metric};
pub use oracle::{er_connectivity_exact, er_connectivity_oracle, ORACLE_MAX_N};
pub use scan::{
    connectivity_scan, giant_scan, run_scan, with_workers, Mean, Normalization, PGrid, Proportion,
    ScanConfig, ScanMode, ScanResult, ScanRow, SigmaStat, MIN_REPLICATES,
};
