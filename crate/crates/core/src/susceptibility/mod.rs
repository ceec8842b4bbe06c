//! Fractional susceptibility functions: full, frozen, response, classical and
//! generalized-kernel series, resolvent identities and limit checks.

pub mod classical;
pub mod engine;
pub mod limits;
pub mod nodes;
pub mod series;
pub mod spatial;

pub use engine::{
    frozen_source_cells, frozen_via_resolvent, kernel_label, susceptibility_at,
    susceptibility_coefficient, susceptibility_series, EngineConfig, FrozenResolvent,
    Propagation, SeriesNodes,
};
pub use nodes::{NodeSet, TGrid};
pub use series::{
    fit_decay, radius_estimate, series_evaluate, DecayFit, SeriesValue, SusceptibilitySeries,
    Variant,
};
pub use spatial::{response_susceptibility_tent, spatial_source, SpatialConfig};
pub use classical::{classical_lrf, classical_susceptibility, retce_value, ClassicalValue, ReTce};
pub use limits::{
    extrapolate_to_zero, horizontal_limit_check, zeta_expansion_check, HorizontalLimitReport,
    ZetaReport,
};
