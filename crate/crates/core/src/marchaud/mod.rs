//! Marchaud fractional derivatives: power, truncated and ℓ-weighted kernels,
//! real or complex order, with closed forms for Heaviside families.

pub mod closed;
pub mod curve;
pub mod kernel;

pub use closed::{
    clamped_linear_closed, heaviside_closed, heaviside_truncated_closed,
    heaviside_truncated_kernel_closed, linear_truncated_closed,
};
pub use curve::{
    geometric_grid, marchaud_fn, weighted_integral, MarchaudOptions, MarchaudSide, MarchaudValue,
    SampledCurve, TailModel,
};
pub use kernel::{
    gamma_factor, gamma_factor_real, kernel_power_log, zeta_log_kernels, HhCertificate,
    KernelSpec, KernelVariant, MarchaudKernel,
};
