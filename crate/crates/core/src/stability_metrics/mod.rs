//! Time-interval offsets, Allan/modified Allan/time deviations and
//! power-law noise synthesis.

mod deviation;
mod io;
mod noise;
mod series;

pub use deviation::{
    adev, mdev, octave_taus, overlapping_adev, tdev, tdev_from_mdev, DeviationCurve, DeviationKind, OmittedTau,
};
pub use io::{read_offset_csv, write_deviation_csv, write_offset_csv};
pub use noise::{gen_power_law_noise, NoiseKind};
pub use series::{tic_offsets, PhaseSeries};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{0}")]
    InvalidSeries(String),
    #[error("series has {count} missing samples; enable gap-tolerant mode to use it")]
    GapsPresent { count: usize },
    #[error("CSV: {0}")]
    Csv(String),
}
