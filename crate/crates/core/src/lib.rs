//! Composite product quadrature for weakly singular convolution integrals
//! `∫_0^{t_n} K(t_n - s) f(s) ds`, with Volterra and time-fractional
//! diffusion solvers built on the same weights.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fracdiff;
pub mod kernel;
pub mod math;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod stability;
pub mod stencil;
pub mod volterra;
pub mod weights;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelFlags, KernelForm, MomentRequest};
pub use mesh::Mesh;
pub use poly::Poly;
pub use stencil::{Abscissae, SchemeOrder, StencilSet};
pub use weights::{WeightOptions, WeightTable};
