//! Airy function, Airy kernel, and edge-scaling trace statistics.

mod ai;
mod erf;
mod kernel;
mod quad;
mod variance;

pub use ai::{airy_ai, airy_ai_prime};
pub use erf::erf;
pub use kernel::{airy_kernel, laplace_kernel_transform};
pub use quad::gauss_legendre;
pub use variance::{
    laplace_kernel_transform_quadrature, projection_diagonal, projection_diagonal_quadrature,
    trace_mean, trace_mean_quadrature, trace_variance_closed_form, trace_variance_quadrature,
};
