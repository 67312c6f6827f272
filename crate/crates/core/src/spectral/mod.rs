//! Wavelength grids, spectra, the variable-width dispersion spread function,
//! and quadrature discretization of the forward broadening operator.

mod grid;
mod kernel;
mod operator;

pub use grid::{Spectrum, SpectrumKind, WavelengthGrid};
pub(crate) use grid::weighted_norm;
pub use kernel::{dispersion_kernel, integral_width, sf_width, SpreadFunctionModel};
pub use operator::{discretize_kernel, discretize_operator, forward_apply, DiscreteOperator, SingularSystem};
