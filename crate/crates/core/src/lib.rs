//! Joint estimation and compensation of sampling frequency and sampling time
//! offsets with Farrow variable fractional delay filters.

pub mod design;
pub mod estimation;
pub mod farrow;
pub mod metrics;
pub mod params;
pub mod qam;
pub mod signal;

pub use design::{design_bank, measure_error, DesignError, DesignSpec, ErrorReport, GridDensity};
pub use estimation::{
    count_operations, estimate, estimate_from_outputs, EstimationError, EstimationTrace,
    EstimatorConfig, Method, OpCounts,
};
pub use farrow::{
    compensate_complex, compute_subfilter_outputs, farrow_output, CoefficientBank, Compensated,
    FarrowError, SubfilterOutputs,
};
pub use metrics::{campaign_stats, nmse, nmse_complex, CampaignStats, TrialResult};
pub use params::OffsetParams;
pub use signal::{sample_pair, HarmonicSignalModel, ImpairmentSpec, OfdmSpec, SampledPair};
