//! Model curves, noise thresholds, region maps and Monte Carlo studies.

mod crossings;
mod curves;
mod grids;
mod sweep;

pub use crossings::{find_crossing, noise_threshold, transition_margin, Crossing, Transition};
pub use curves::{linspace, model_curve, model_estimate, model_point, CurvePoint, StateRow};
pub use grids::{region_map, region_row, GridAxes, GridSpec, RegionRow};
pub use sweep::{
    convergence_study, derive_seed, log_log_slope, noise_sweep, simulate_point, ConvergenceRow,
    McOrder, McPoint, SimulationSettings,
};
