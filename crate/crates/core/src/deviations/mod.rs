//! Large deviations of dependent claim sums.

mod sfunc;
mod sums;

pub use sfunc::{
    construct_s_pair, tail_inequality_probe, v_plus, ProbeCell, ProbeReport, SFunctionPair,
};
pub use sums::{
    growth_exponent, ld_bounds_wuod, ld_ratio_enod, ld_upper_target, partial_sum_tail_conditional,
    partial_sum_tail_mc, weighted_sum_curve, weighted_sum_tail_ratio, DeviationCell, DeviationGrid,
    LdBoundsReport, WeightedSumRatio, LD_GRID_POINTS, MAX_WEIGHTED_TERMS,
};
