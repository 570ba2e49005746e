//! Finite-time and random-time ruin in the dependent renewal risk model.

mod horizon;
mod model;
mod path;
mod scan;

pub use horizon::{
    horizon_condition_check, threshold_f, threshold_smallness_check, HorizonFunction, SmallnessReport,
    ThresholdFunction, MIN_CONDITION_GRID,
};
pub use model::{ClaimModel, RiskModel};
pub use path::{
    ruin_curve_random, ruin_prob_finite, ruin_prob_random, ruin_surface, simulate_path, simulate_surplus_path,
    PathBuffer, RuinSurface, MIN_PATHS,
};
pub use scan::{
    asymptotic_approx, expected_claims, scan_horizons, uniform_ratio_scan, Approximation, ScanCell, ScanSupremum,
    UniformScan,
};
