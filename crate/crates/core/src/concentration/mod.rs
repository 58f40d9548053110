//! Concentration functions beyond exhaustive range, Gaussian decay fits,
//! Lévy-trend checks, medians and the median tail inequality, and the
//! spherical-cap reference values.

mod cap;
mod cube;
mod fit;
mod median;
mod search;

pub use cap::sphere_cap_alpha;
pub use cube::{cube_alpha_exact, cube_exact_curve, uniform_cube_dimension};
pub use fit::{gaussian_fit, levy_check, non_increasing_within, GaussianFit, LevyConfig, LevyReport};
pub use median::{median, tail_check, BoundKind, LipschitzFunction, TailCheck};
pub use search::{
    alpha_lower_bound, alpha_lower_bound_with_witness, lower_bound_curve, SearchConfig,
    SearchOutcome,
};
