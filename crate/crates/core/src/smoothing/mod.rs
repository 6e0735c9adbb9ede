//! Smoothing cascades: held-out interpolation over an aggregate base,
//! recursive discounting of mixed-order models, and Katz backoff.

mod cascade;
mod interp;
mod katz;
mod params;

pub use cascade::{fit_mixed_smoothing, split_mass, SmoothedMixed};
pub use interp::{fit_interpolation, fit_weight, InterpolatedBigram, SIGMA_INIT};
pub use katz::{good_turing_discounts, GoodTuring, KatzBigram, KatzTrigram, DEFAULT_GT_THRESHOLD};
pub use params::{FitOptions, InterpolationParams, MixedSmoothingParams, SigmaParams};
