//! State representations: invariants, standard form, covariance matrices.

mod covariance;
mod invariants;
mod uncertainty;

pub use covariance::{
    assemble_cm, schur_complement, symplectic_form, symplectic_spectrum, CovarianceMatrix,
    SymplecticSpectrum,
};
pub use invariants::{
    bound_branch_switch, check_physical, check_physical_with, check_purities, check_purities_with,
    delta2_from_mu3, delta2_roots_from_mu3, invariants_from_standard_form, purity3, purity3_extremes,
    renyi2_entropy, seralian_bounds,
    standard_form, InvariantErrors, PhysicalityReport, StandardFormParams, StateInvariants,
    BISECTION_TOLERANCE, DEFAULT_TOLERANCE, RADICAND_TOLERANCE,
};
pub(crate) use invariants::clamp_radicand;
pub use uncertainty::propagate;
