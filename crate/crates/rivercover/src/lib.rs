//! Coverage path planning for riverine environments.
//!
//! Rivers are tight, elongated workspaces where the water current varies
//! across the channel: it runs slow along the inner bank of a bend and fast
//! along the outer bank. This crate plans complete-coverage tours for an
//! autonomous surface vehicle that exploit that structure — traveling
//! upstream where the current is weak and downstream where it is strong —
//! and provides the machinery to measure how much time that saves.
//!
//! The pipeline, bottom to top:
//!
//! - [`river_map`] — load a binary occupancy grid (PGM raster or GeoJSON
//!   polygon), extract the two bank contours, the centerline and the width
//!   profile, and infer the coverage direction from the start point.
//! - [`meander`] — classify bank points as inner/outer bend via the
//!   intersection of consecutive tangent lines, and partition the river into
//!   meander segments.
//! - [`planner`] — build coverage plans: the meander-aware `m_cover` and
//!   `width_based_m_cover`, plus the `l_cover`, `t_cover` and `z_cover`
//!   baselines.
//! - [`current_sim`] — synthesize a meander-conditioned current field and
//!   simulate traversal time to compare planners.
//! - [`bathymetry`] — fit a Gaussian-process depth surface from sonar point
//!   samples.
//! - [`mission_io`] — serialize plans to QGC WPL 110, GPX and GeoJSON.
//! - [`render`] — deterministic SVG figures of maps and plans.
//! - [`synth`] — synthetic river generators used by the examples and tests.
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `cargo run --example plan_m_cover`.

pub mod bathymetry;
pub mod cli;
pub mod current_sim;
pub mod geometry;
pub mod meander;
pub mod mission_io;
pub mod pathfind;
pub mod planner;
pub mod render;
pub mod river_map;
pub mod synth;

pub use geometry::{Point, Polyline};
pub use meander::{BendLabel, MeanderSegment, TangentStep};
pub use planner::{Algorithm, CoveragePlan, Pass, PlanElement};
pub use river_map::{BankContours, FlowDirection, RiverMap, RiverModel, WidthProfile};

/// Crate error type.
///
/// `Validation` maps to exit code 2 in the CLI and covers bad inputs and
/// violated preconditions; `Infeasible` maps to exit code 3 and covers maps
/// on which the requested plan cannot exist (for example a spacing too wide
/// for the channel).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("planning infeasible: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
