//! Statistics for fuzzing campaigns viewed as species discovery.
//!
//! Each generated input is a sample from an unknown assemblage of species
//! (paths, covered statements, crash sites). From the frequency counts of
//! discovered species this crate estimates how many species exist, how much
//! of them a campaign has found, the residual risk that the next input finds
//! something new, and how discovery would continue with more effort.
//!
//! ```
//! use fuzzstat_core::{multinomial, AbundanceFrequencies};
//!
//! // n inputs, S(n) discovered paths, singletons f1..quadrupletons f4
//! let snap = AbundanceFrequencies::from_leading(63_600_000, 4944, [447, 70, 0, 0])?;
//! let risk = multinomial::good_turing_u(&snap)?;
//! assert!((risk - 7.0e-6).abs() < 1e-7);
//! let total = multinomial::chao1(&snap)?;
//! assert!(total.s_hat > 4944.0);
//! # Ok::<(), fuzzstat_core::Error>(())
//! ```

pub mod bootstrap;
pub mod error;
pub mod estimate;
pub mod evaluation;
pub mod frequency;
pub mod incidence;
pub mod ingest;
pub mod multinomial;
pub mod simulator;

pub use bootstrap::{bootstrap_ci, BootstrapConfig, BootstrapInterval};
pub use error::{Error, ErrorKind, Result};
pub use estimate::{
    estimate_richness, ConfidenceInterval, EffortEstimate, ExtrapolationPoint, Extrapolator,
    RichnessChoice, RichnessEstimate, RichnessMethod, Statistic,
};
pub use evaluation::{
    evaluate_estimator, evaluate_extrapolator, CampaignRun, CheckpointAxis, EvaluationReport,
    Horizon, Reference,
};
pub use frequency::{
    AbundanceFrequencies, FrequencySnapshot, FrequencyTail, IncidenceFrequencies, SamplingModel,
    SpeciesAccumulator, SpeciesId,
};
pub use ingest::{parse_events, parse_snapshots, CampaignSnapshotRow, EventWriter};
pub use simulator::{
    AbundanceDistribution, AdaptiveBiasConfig, Campaign, SyntheticAssemblage, TrajectoryPoint,
};
