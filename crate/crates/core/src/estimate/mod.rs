//! Monte Carlo estimation of score intensities, stabilization radii, hit
//! probabilities and mass-transport identities.

mod coverage;
mod intensity;
mod stabilization;

pub use coverage::{campbell_identity_check, coverage_hit_probability, union_length_1d, CampbellCheck, ProportionEstimate};
pub use intensity::{intensity_estimate, run_replicate, summarize, IntensityEstimate, Policy, ReplicateOutcome};
pub use stabilization::{
    aloha_stab_radii, ball_minus_cube_volume, hardcore_stab_radius, mecke_slivnyak_bound, StabilizationSample,
};
