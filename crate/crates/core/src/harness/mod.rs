//! Scenario runner: structured configs in, machine-readable reports out.

pub mod checks;
pub mod report;
mod runner;
pub mod scan;
pub mod scenario;

pub use report::{Argmax, CheckResult, Comparison, Environment, Report, ScanReport, ScanRow};
pub use runner::{custom_surface, cylinder_signed_q, resolve_checks, run, RunOptions, DEFAULT_COLLAR, VERSION};
pub use scan::{bisect_flag, bisect_root, scan};
pub use scenario::{KappaSpec, ScanSpec, Scenario, Subject, MAX_SCAN_SAMPLES};
