//! File formats: network parameter files, snapshot sets, reduced models and
//! plot-ready exports. All formats are plain text except the compact binary
//! snapshot form; floating-point values are written with 17 significant
//! digits so text round-trips are exact.

pub mod basis;
pub mod inspect;
pub mod model;
pub mod network;
pub mod snapshots;

/// Formats an `f64` so that parsing it back recovers the identical bits.
pub(crate) fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
