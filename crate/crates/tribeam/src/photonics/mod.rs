//! Multimode photon-counting model, detection, reconstruction and moment-based estimation.

mod em;
mod estimate;
mod histogram;
mod model;
mod moments;
mod pipeline;
mod response;
mod sampling;
mod structural;
mod wick;

pub use histogram::PhotocountHistogram;
pub use model::{
    beam_detectors, DetectorSpec, MultimodeModel, IDLER_DETECTOR, DEFAULT_MODES, DEFAULT_PAIR_MEAN,
    SIGNAL_DETECTOR,
};
pub use sampling::{apply_detector, sample_photons, simulate_counts};
pub use em::{default_cutoffs, em_reconstruct, EmOptions, EmResult, PhotonNumberDistribution};
pub use response::detector_response_matrix;
pub use moments::{
    correct_for_detection, factorial_moments, fano, index_key, intensity_moments, mu1_from_moments,
    noise_reduction, parse_index_key, photon_moments, stirling_first, MomentScope, MomentTable,
    MAX_ORDER,
};
pub use structural::{per_mode_log_gf, structural_moments, structural_noise_reduction};
pub use wick::{moments_from_cm, moments_from_covariance, normal_correlators};
pub use estimate::{
    estimate_state_from_moments, fit_standard_form, fit_structural, purity_from_moments,
    AnalysisOrder, Delta2Surrogate, Estimate, EstimateOptions, Order6Method, StructuralFit,
};
pub use pipeline::{
    analyze_histogram, histogram_cells, multinomial_weights, per_mode_moments, HistogramAnalysis,
    OrderAnalysis, PipelineOptions, DEFAULT_USABILITY_THRESHOLD,
};
