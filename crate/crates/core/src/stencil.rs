//! Backward interpolation stencils `c_j(σ)`, `σ = (s - t_k)/τ_k`.
//!
//! On subinterval `[t_{k-1}, t_k]` an order-`γ` stencil reconstructs
//! `f(s) ≈ Σ_j c_j(σ) f(t_{k-j})` from the `γ` nodes `t_k, ..., t_{k-γ+1}`.
//! The coefficients solve the transposed Vandermonde system
//! `Σ_m x_m^p c_m = (s - t_k)^p`, `p = 0..γ-1`, whose inverse has an explicit
//! form in elementary symmetric functions of the abscissae `x_m`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::math::powi;
use crate::mesh::Mesh;
use crate::poly::Poly;

/// Highest integer order accepted for solving.
pub const MAX_SOLVER_ORDER: u32 = 5;

/// Order of accuracy of a composite scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeOrder {
    /// Classical Taylor stencil using `γ` backward nodes.
    Integer(u32),
    /// Fractional-Taylor scheme of order `α ∈ (0, 1)`: a single node, `c_0 ≡ 1`.
    Fractional(f64),
}

impl SchemeOrder {
    /// Integer order in `1..=5`.
    pub fn integer(order: u32) -> Result<Self> {
        if (1..=MAX_SOLVER_ORDER).contains(&order) {
            Ok(Self::Integer(order))
        } else {
            Err(Error::UnsupportedOrder(order))
        }
    }

    /// Integer order without the upper bound. Only meant for stability
    /// analysis of orders that are known to be unstable.
    pub fn for_analysis(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::UnsupportedOrder(0));
        }
        Ok(Self::Integer(order))
    }

    pub fn fractional(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self::Fractional(alpha))
        } else {
            Err(invalid(format!("fractional order must lie in (0, 1), got {alpha}")))
        }
    }

    /// The real order `γ`.
    pub fn value(&self) -> f64 {
        match *self {
            Self::Integer(n) => n as f64,
            Self::Fractional(a) => a,
        }
    }

    /// Number of backward nodes in the full stencil.
    pub fn span(&self) -> usize {
        match *self {
            Self::Integer(n) => n as usize,
            Self::Fractional(_) => 1,
        }
    }

    /// Nodes used on subinterval `k`: only `t_0..t_k` exist, so the first
    /// `γ-2` subintervals use reduced-order stencils.
    pub fn span_on_interval(&self, k: usize) -> usize {
        self.span().min(k + 1)
    }

    pub fn is_solver_order(&self) -> bool {
        match *self {
            Self::Integer(n) => (1..=MAX_SOLVER_ORDER).contains(&n),
            Self::Fractional(a) => a > 0.0 && a < 1.0,
        }
    }
}

impl fmt::Display for SchemeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer(n) => write!(f, "{n}"),
            Self::Fractional(a) => write!(f, "alpha({a})"),
        }
    }
}

impl FromStr for SchemeOrder {
    type Err = Error;

    /// Accepts `1`..`5`, or `alpha:<value>` / `alpha(<value>)` for the
    /// fractional scheme.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("alpha") {
            let value = rest
                .trim_start_matches([':', '=', '('])
                .trim_end_matches(')')
                .parse::<f64>()
                .map_err(|_| invalid(format!("cannot parse fractional order from {s:?}")))?;
            return Self::fractional(value);
        }
        let n = s
            .parse::<u32>()
            .map_err(|_| invalid(format!("cannot parse scheme order from {s:?}")))?;
        Self::integer(n)
    }
}

/// Which abscissae enter the Vandermonde system on a nonuniform mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Abscissae {
    /// `x_m = -m τ_k`: equally spaced with the local step.
    #[default]
    Equispaced,
    /// `x_m = t_{k-m} - t_k`: the actual backward nodes.
    MeshNodes,
}

/// Transposed Vandermonde system `Vᵀ c = y` with `(Vᵀ)_{p,m} = x_m^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSystem {
    abscissae: Vec<f64>,
}

impl VandermondeSystem {
    /// Abscissae `0, -τ, -2τ, ..., -(n-1)τ`.
    pub fn equispaced(n: usize, tau: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Vandermonde size must be at least 1"));
        }
        if !(tau > 0.0) {
            return Err(invalid(format!("step must be positive, got {tau}")));
        }
        Ok(Self { abscissae: (0..n).map(|m| -(m as f64) * tau).collect() })
    }

    pub fn from_abscissae(abscissae: Vec<f64>) -> Result<Self> {
        if abscissae.is_empty() {
            return Err(invalid("Vandermonde size must be at least 1"));
        }
        for i in 0..abscissae.len() {
            for j in 0..i {
                if abscissae[i] == abscissae[j] {
                    return Err(invalid("Vandermonde abscissae must be distinct"));
                }
            }
        }
        Ok(Self { abscissae })
    }

    pub fn size(&self) -> usize {
        self.abscissae.len()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    /// Dense `Vᵀ`, row `p` holding `x_m^p`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n)
            .map(|p| self.abscissae.iter().map(|&x| powi(x, p)).collect())
            .collect()
    }

    /// `det(Vᵀ) = Π_{i<j} (x_j - x_i)`.
    pub fn determinant(&self) -> f64 {
        let x = &self.abscissae;
        let mut det = 1.0;
        for j in 0..x.len() {
            for i in 0..j {
                det *= x[j] - x[i];
            }
        }
        det
    }

    /// Explicit inverse `[v_{mp}]` of `Vᵀ`:
    /// `v_{mp} = (-1)^{n-1-p} e_{n-1-p}(x without x_m) / Π_{i≠m}(x_m - x_i)`,
    /// with `e_r` the elementary symmetric polynomial of degree `r`.
    pub fn inverse(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let x = &self.abscissae;
        (0..n)
            .map(|m| {
                let others: Vec<f64> = (0..n).filter(|&i| i != m).map(|i| x[i]).collect();
                let e = elementary_symmetric(&others);
                let denom: f64 = others.iter().map(|&xi| x[m] - xi).product();
                (0..n)
                    .map(|p| {
                        let r = n - 1 - p;
                        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                        sign * e[r] / denom
                    })
                    .collect()
            })
            .collect()
    }

    /// Coefficient polynomials in `σ = y/scale`, where `y = s - t_k` is the
    /// right-hand-side variable. Each power `y^p` of the right-hand side is
    /// solved separately, giving one coefficient column per power.
    pub fn solve_polys(&self, scale: f64) -> Vec<Poly> {
        self.inverse()
            .into_iter()
            .map(|row| {
                Poly::new(row.iter().enumerate().map(|(p, v)| v * powi(scale, p)).collect())
            })
            .collect()
    }
}

/// `e_0..e_n` of the given values.
fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for r in (1..=i + 1).rev() {
            e[r] += v * e[r - 1];
        }
    }
    e
}

/// `Vᵀ⁻¹` for equispaced abscissae `x_m = -mτ`.
pub fn vandermonde_inverse_entries(n: usize, tau: f64) -> Result<Vec<Vec<f64>>> {
    Ok(VandermondeSystem::equispaced(n, tau)?.inverse())
}

/// Coefficient polynomials of one stencil on one subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSet {
    order: SchemeOrder,
    k: usize,
    polys: Vec<Poly>,
}

/// Stencil values at one point, with a flag for points outside `[t_{k-1}, t_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilValues {
    pub values: Vec<f64>,
    /// `false` when `σ ∉ [-1, 0]`; the sign pattern of the coefficients is
    /// only guaranteed inside.
    pub in_interval: bool,
}

impl StencilSet {
    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    /// Subinterval index the stencil was built for (0 for mesh-free stencils).
    pub fn interval(&self) -> usize {
        self.k
    }

    /// Number of backward nodes actually used.
    pub fn span(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn eval_local(&self, sigma: f64) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(sigma)).collect()
    }

    /// `(c_0(σ), ..., c_{span-1}(σ))` at `σ = (s - t_k)/τ_k`.
    pub fn evaluate(&self, s: f64, t_k: f64, tau_k: f64) -> StencilValues {
        let sigma = (s - t_k) / tau_k;
        StencilValues {
            values: self.eval_local(sigma),
            in_interval: (-1.0..=0.0).contains(&sigma),
        }
    }

    /// `Σ_j c_j(σ) f(t_{k-j})`, with `samples = [f(t_k), f(t_{k-1}), ...]`.
    pub fn interpolate(&self, samples: &[f64], s: f64, t_k: f64, tau_k: f64) -> Result<f64> {
        if samples.len() < self.span() {
            return Err(Error::InsufficientHistory {
                required: self.span(),
                available: samples.len(),
            });
        }
        let values = self.evaluate(s, t_k, tau_k).values;
        Ok(crate::math::compensated_dot(&values, &samples[..self.span()]))
    }
}

/// Uniform-mesh stencil of the given order. Orders 1..4 use the closed-form
/// products; order 5 and analysis orders go through the Vandermonde inverse.
pub fn build_stencil(order: SchemeOrder, tau: f64) -> Result<StencilSet> {
    if !(tau > 0.0) {
        return Err(invalid(format!("step must be positive, got {tau}")));
    }
    validate_order(order)?;
    Ok(StencilSet { order, k: 0, polys: polys_for_span(order, order.span(), tau)? })
}

/// General Vandermonde solve for `span` equispaced nodes, bypassing the
/// closed-form fast path.
pub fn solve_stencil(span: usize, tau: f64) -> Result<Vec<Poly>> {
    Ok(VandermondeSystem::equispaced(span, tau)?.solve_polys(tau))
}

/// Stencil on subinterval `k` (`1..=N`) of `mesh`, using the reduced span
/// `min(γ, k+1)` near the start.
pub fn stencil_on_mesh(
    mesh: &Mesh,
    k: usize,
    order: SchemeOrder,
    abscissae: Abscissae,
) -> Result<StencilSet> {
    if k == 0 || k > mesh.len() {
        return Err(invalid(format!("subinterval index {k} outside 1..={}", mesh.len())));
    }
    validate_order(order)?;
    let span = order.span_on_interval(k);
    let tau = mesh.step(k);
    let polys = match abscissae {
        Abscissae::MeshNodes if span > 2 => {
            let tk = mesh.node(k);
            let xs = (0..span).map(|m| mesh.node(k - m) - tk).collect();
            VandermondeSystem::from_abscissae(xs)?.solve_polys(tau)
        }
        _ => polys_for_span(order, span, tau)?,
    };
    Ok(StencilSet { order, k, polys })
}

fn validate_order(order: SchemeOrder) -> Result<()> {
    match order {
        SchemeOrder::Integer(0) => Err(Error::UnsupportedOrder(0)),
        SchemeOrder::Integer(_) => Ok(()),
        SchemeOrder::Fractional(a) if a > 0.0 && a < 1.0 => Ok(()),
        SchemeOrder::Fractional(a) => {
            Err(invalid(format!("fractional order must lie in (0, 1), got {a}")))
        }
    }
}

fn polys_for_span(order: SchemeOrder, span: usize, tau: f64) -> Result<Vec<Poly>> {
    if let SchemeOrder::Fractional(_) = order {
        return Ok(vec![Poly::constant(1.0)]);
    }
    match closed_form_stencil(span) {
        Some(polys) => Ok(polys),
        None => solve_stencil(span, tau),
    }
}

/// Closed-form coefficient polynomials in `σ` for spans 1..4:
///
/// * 1: `c_0 = 1`
/// * 2: `c_0 = 1 + σ`, `c_1 = -σ`
/// * 3: `c_0 = (1+σ)(2+σ)/2`, `c_1 = -σ(2+σ)`, `c_2 = σ(1+σ)/2`
/// * 4: `c_0 = (1+σ)(2+σ)(3+σ)/6`, `c_1 = -σ(2+σ)(3+σ)/2`,
///   `c_2 = σ(1+σ)(3+σ)/2`, `c_3 = -σ(1+σ)(2+σ)/6`
pub fn closed_form_stencil(span: usize) -> Option<Vec<Poly>> {
    let sigma = Poly::new(vec![0.0, 1.0]);
    let shift = |a: f64| Poly::new(vec![a, 1.0]);
    let prod = |factors: &[Poly], scale: f64| {
        factors.iter().fold(Poly::constant(scale), |acc, f| acc.mul(f))
    };
    let polys = match span {
        1 => vec![Poly::constant(1.0)],
        2 => vec![shift(1.0), sigma.scale(-1.0)],
        3 => vec![
            prod(&[shift(1.0), shift(2.0)], 0.5),
            prod(&[sigma.clone(), shift(2.0)], -1.0),
            prod(&[sigma.clone(), shift(1.0)], 0.5),
        ],
        4 => vec![
            prod(&[shift(1.0), shift(2.0), shift(3.0)], 1.0 / 6.0),
            prod(&[sigma.clone(), shift(2.0), shift(3.0)], -0.5),
            prod(&[sigma.clone(), shift(1.0), shift(3.0)], 0.5),
            prod(&[sigma.clone(), shift(1.0), shift(2.0)], -1.0 / 6.0),
        ],
        _ => return None,
    };
    Some(polys)
}
