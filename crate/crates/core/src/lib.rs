//! Optimal stationary markings of point processes on finite periodic windows,
//! integer lines and tree balls.

pub mod config;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod experiment;
pub mod marks;
pub mod models;
pub mod optimize;
pub mod rng;
pub mod sample;
pub mod score;
pub mod window;

pub use config::{deserialize_configuration, serialize_configuration, Configuration};
pub use error::{Error, Result};
pub use marks::{BaseMark, Color, MarkedPoint, OptMark, Position, Sign3};
pub use models::{score_at, MarkSpace, ScoreModel, Scorer, SignRegime};
pub use rng::RngSeed;
pub use score::{ExtendedScore, ScoreDelta};
pub use window::{torus_distance, Window};
