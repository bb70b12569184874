//! Second-kind Volterra equations `u(t) = f(t) + ∫_0^t K(t - s) u(s) ds`.
//!
//! Each step solves the scalar implicit relation
//! `(1 - w̃_n) u_n = f(t_n) + Σ_{k<n} w̃_k u_k` with weights targeted at `t_n`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::math::{powf, CompensatedSum};
use crate::mesh::Mesh;
use crate::stencil::SchemeOrder;
use crate::weights::{WeightBuilder, WeightOptions};

/// Steps whose diagonal factor `|1 - w̃_n|` falls below this are refused.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

pub struct VolterraProblem<F> {
    pub forcing: F,
    pub kernel: Kernel,
    pub mesh: Mesh,
    pub order: SchemeOrder,
    pub options: WeightOptions,
}

impl<F: Fn(f64) -> f64> VolterraProblem<F> {
    pub fn new(forcing: F, kernel: Kernel, mesh: Mesh, order: SchemeOrder) -> Self {
        Self { forcing, kernel, mesh, order, options: WeightOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub nodes: Vec<f64>,
    /// `u(t_0) ... u(t_N)`, with `u(t_0) = 0`.
    pub u: Vec<f64>,
}

impl VolterraSolution {
    /// `max_n |u_n - exact(t_n)|`.
    pub fn max_error<G: Fn(f64) -> f64>(&self, exact: G) -> f64 {
        self.nodes
            .iter()
            .zip(&self.u)
            .map(|(&t, &u)| (u - exact(t)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn step_solve<F: Fn(f64) -> f64>(problem: &VolterraProblem<F>) -> Result<VolterraSolution> {
    if !problem.order.is_solver_order() {
        return Err(match problem.order {
            SchemeOrder::Integer(g) => Error::UnsupportedOrder(g),
            SchemeOrder::Fractional(a) => {
                Error::InvalidArgument(format!("fractional order {a} outside (0, 1)"))
            }
        });
    }
    let mesh = &problem.mesh;
    let builder = WeightBuilder::new(mesh, &problem.kernel, problem.order, problem.options)?;
    let mut u = Vec::with_capacity(mesh.len() + 1);
    u.push(0.0);
    for n in 1..=mesh.len() {
        let table = builder.table(n)?;
        let pivot = 1.0 - table.diagonal();
        if pivot.abs() < PIVOT_TOLERANCE {
            return Err(Error::NonInvertibleStep { n });
        }
        let mut rhs = CompensatedSum::new();
        rhs.add((problem.forcing)(mesh.node(n)));
        for (w, uk) in table.collapsed[..n].iter().zip(&u) {
            rhs.add(w * uk);
        }
        u.push(rhs.value() / pivot);
    }
    Ok(VolterraSolution { nodes: mesh.nodes().to_vec(), u })
}

/// Forcing `f = u - K∗u` for the exact solution `u = t^m` and a built-in kernel
/// `c·t^β`, using `K∗t^m = c·B(m+1, β+1)·t^{m+β+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialForcing {
    pub degree: f64,
    pub convolution_coefficient: f64,
    pub convolution_exponent: f64,
}

impl MonomialForcing {
    pub fn exact(&self, t: f64) -> f64 {
        powf(t, self.degree)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return if self.degree == 0.0 { 1.0 } else { 0.0 };
        }
        powf(t, self.degree) - self.convolution_coefficient * powf(t, self.convolution_exponent)
    }
}

pub fn manufacture_forcing(degree: f64, kernel: &Kernel) -> Result<MonomialForcing> {
    let (_, beta) = kernel.power_law().ok_or_else(|| {
        Error::Unsupported("manufactured forcing needs a built-in kernel".into())
    })?;
    let convolution_coefficient = kernel.monomial_convolution(degree, 1.0)?;
    Ok(MonomialForcing {
        degree,
        convolution_coefficient,
        convolution_exponent: degree + beta + 1.0,
    })
}
