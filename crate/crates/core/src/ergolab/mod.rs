//! Concrete systems on tori and numerical multiple ergodic averages along
//! floor-Hardy iterates.

pub mod average;
pub mod iterate;
pub mod report;
pub mod seminorm;
pub mod sum;
pub mod system;

pub use average::{
    l2_ladder, multiple_average_l2, multiple_average_pointwise, pointwise_ladder, recurrence_average,
    recurrence_ladder, short_interval_double_average, vdc_check, weyl_ladder, weyl_sum, AverageReport, IntervalCheck,
    LadderPoint, Mode, TorusBox, WeylFreq,
};
pub use iterate::{iterate_sequence, IterateSequence};
pub use seminorm::{hk_character_oracle, hk_seminorm_approx, product_system, Schedule, SeminormEstimate};
pub use system::{CharacterObservable, Point, Seed, System, SystemSpec};

use crate::lefun::LeError;

#[derive(Debug, thiserror::Error)]
pub enum ErgoError {
    #[error("floor of the iterate at n = {n} cannot be certified at the working precision")]
    PrecisionExhausted { n: u64 },
    #[error("iterate at n = {n} does not fit in 64 bits")]
    Overflow { n: u64 },
    #[error("refused: estimated work {cost:e} exceeds {limit:e}")]
    ComplexityRefusal { cost: f64, limit: f64 },
    #[error("unsupported system: {0}")]
    UnsupportedSystem(String),
    #[error("the rotation is not ergodic")]
    NotErgodic,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Le(#[from] LeError),
}
