//! Entanglement and steering quantifiers, their Δ₂ bounds and region maps.

mod bounds;
mod divergence;
mod ppt;
mod regions;
mod report;
mod steering;

pub use bounds::{correlation_bounds, correlation_bounds_detailed, evaluate, Bounds, Quantity};
pub use divergence::{kl_divergence_2, kl_divergence_3};
pub use ppt::{
    cotangle, log_negativity_2, log_negativity_2_oracle, log_negativity_3, ppt_eigenvalues,
    ppt_spectrum_oracle, PptSpectrum,
};
pub use regions::{
    classify_entanglement, classify_steering, entanglement_thresholds, on_boundary,
    steering_thresholds, tie_tolerance, EntanglementRegion, SteeringDirection, SteeringRegion,
};
pub(crate) use regions::above;
pub use report::{
    entanglement_report, steering_report, EntanglementBounds, EntanglementErrors,
    EntanglementReport, SteeringBounds, SteeringErrors, SteeringReport,
};
pub use steering::{
    gamma_aux, nu_bar_oracle, nu_bar_squared, purity_ratio_2to1, steering_1to1, steering_1to2,
    steering_1to2_oracle, steering_1to2_params, steering_2to1, steering_2to1_oracle,
    steering_2to1_params,
};
