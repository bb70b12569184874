//! Stability diagnostics: the even-index coefficient-sum minimum that decides
//! whether collapsed weights stay nonnegative, a direct audit of the weights,
//! and the Schur test for the linear test equation's stability polynomial.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;
use crate::mesh::Mesh;
use crate::poly::Poly;
use crate::stencil::{build_stencil, SchemeOrder};
use crate::weights::{WeightBuilder, WeightOptions};

/// Largest polynomial degree for which roots are computed.
pub const MAX_ROOT_DEGREE: usize = 64;

/// Weights below this count as negative.
pub const POSITIVITY_TOLERANCE: f64 = 1e-12;

/// Minimum of `c_2(σ) + c_4(σ) + ...` over `σ ∈ [-1, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMargin {
    pub order: u32,
    pub argmin: f64,
    pub minimum: f64,
    /// `minimum >= -1`.
    pub stable: bool,
}

pub fn negative_sum_min(order: u32) -> Result<StabilityMargin> {
    if !(3..=7).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let stencil = build_stencil(SchemeOrder::for_analysis(order)?, 1.0)?;
    let sum = stencil
        .polys()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j >= 2 && j % 2 == 0)
        .fold(Poly::zero(), |acc, (_, p)| acc.add(p));
    let mut candidates = vec![-1.0, 0.0];
    candidates.extend(sum.derivative().real_roots_in(-1.0, 0.0, 1e-13));
    let (argmin, minimum) = candidates
        .into_iter()
        .map(|s| (s, sum.eval(s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("endpoints are always candidates");
    Ok(StabilityMargin { order, argmin, minimum, stable: minimum >= -1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub target: usize,
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityAudit {
    pub order: SchemeOrder,
    pub violations: Vec<Violation>,
    /// Smallest collapsed weight seen and where: `(value, target, index)`.
    pub worst: (f64, usize, usize),
    /// The coefficient-sum criterion, for integer orders 3..=7.
    pub sufficient_condition: Option<StabilityMargin>,
}

impl PositivityAudit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Collapsed weights for every target `t_1..t_N`, checked for `w̃ < -1e-12`.
pub fn weight_positivity_audit(
    mesh: &Mesh,
    kernel: &Kernel,
    order: SchemeOrder,
    options: WeightOptions,
) -> Result<PositivityAudit> {
    let builder = WeightBuilder::new(mesh, kernel, order, options)?;
    let mut violations = Vec::new();
    let mut worst = (f64::INFINITY, 0, 0);
    for n in 1..=mesh.len() {
        let table = builder.table(n)?;
        for (i, &w) in table.collapsed.iter().enumerate() {
            // w̃_0 of a one-node stencil is identically zero.
            if i == 0 && w == 0.0 {
                continue;
            }
            if w < worst.0 {
                worst = (w, n, i);
            }
            if w < -POSITIVITY_TOLERANCE {
                violations.push(Violation { target: n, index: i, weight: w });
            }
        }
    }
    let sufficient_condition = match order {
        SchemeOrder::Integer(g) if (3..=7).contains(&g) => Some(negative_sum_min(g)?),
        _ => None,
    };
    Ok(PositivityAudit { order, violations, worst, sufficient_condition })
}

/// `Σ(μ) = (1 - λτ w_0 K(0)) μ^N - Σ_{k≥1} λτ w_k K(kτ) μ^{N-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityPolynomial {
    pub lambda: f64,
    pub tau: f64,
    /// `w_k K(kτ)` for `k = 0..=N`.
    pub weighted_kernel: Vec<f64>,
}

impl StabilityPolynomial {
    pub fn new(lambda: f64, tau: f64, weights: &[f64], kernel_values: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.len() != kernel_values.len() {
            return Err(invalid(format!(
                "need matching nonempty weight and kernel lists, got {} and {}",
                weights.len(),
                kernel_values.len()
            )));
        }
        if !(tau > 0.0) {
            return Err(invalid(format!("step must be positive, got {tau}")));
        }
        let weighted_kernel = weights.iter().zip(kernel_values).map(|(w, k)| w * k).collect();
        Ok(Self { lambda, tau, weighted_kernel })
    }

    /// Samples `K(kτ)`; a kernel singular at zero must carry `w_0 = 0`.
    pub fn from_kernel(lambda: f64, tau: f64, weights: &[f64], kernel: &Kernel) -> Result<Self> {
        let values = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                if k == 0 && w == 0.0 && kernel.is_singular_at_zero() {
                    Ok(0.0)
                } else {
                    kernel.eval(k as f64 * tau)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(lambda, tau, weights, &values)
    }

    pub fn degree(&self) -> usize {
        self.weighted_kernel.len() - 1
    }

    /// Coefficients from `μ^N` down to `μ^0`.
    pub fn coefficients(&self) -> Vec<f64> {
        let lt = self.lambda * self.tau;
        self.weighted_kernel
            .iter()
            .enumerate()
            .map(|(k, wk)| if k == 0 { 1.0 - lt * wk } else { -lt * wk })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurReport {
    /// `|λτ| Σ |w_k K(kτ)|`.
    pub sufficient_bound: f64,
    /// Bound below 1; a bound at or above 1 is inconclusive, not a proof of instability.
    pub schur_by_bound: bool,
    /// `None` when the degree exceeds [`MAX_ROOT_DEGREE`].
    pub max_root_modulus: Option<f64>,
}

pub fn schur_test(p: &StabilityPolynomial) -> SchurReport {
    let sufficient_bound =
        (p.lambda * p.tau).abs() * p.weighted_kernel.iter().map(|x| x.abs()).sum::<f64>();
    let max_root_modulus = if p.degree() <= MAX_ROOT_DEGREE {
        Some(max_root_modulus(&p.coefficients()))
    } else {
        None
    };
    SchurReport { sufficient_bound, schur_by_bound: sufficient_bound < 1.0, max_root_modulus }
}

/// Largest root modulus of `Σ a_i z^{d-i}`. A vanishing leading coefficient
/// sends a root to infinity.
fn max_root_modulus(descending: &[f64]) -> f64 {
    let mut coeffs = descending.to_vec();
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return 0.0;
    }
    if coeffs[0] == 0.0 {
        return f64::INFINITY;
    }
    aberth_roots(&coeffs).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Simultaneous Aberth-Ehrlich iteration for all roots.
fn aberth_roots(descending: &[f64]) -> Vec<Complex64> {
    let d = descending.len() - 1;
    let lead = descending[0];
    let a: Vec<f64> = descending.iter().map(|c| c / lead).collect();
    let radius = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| libm::pow(c.abs(), 1.0 / i as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * k as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let eval = |x: Complex64| {
        let mut p = Complex64::new(a[0], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &a[1..] {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sqrt;

    #[test]
    fn third_order_minimum() {
        let m = negative_sum_min(3).unwrap();
        assert!((m.minimum + 0.125).abs() < 1e-14);
        assert!((m.argmin + 0.5).abs() < 1e-10);
        assert!(m.stable);
    }

    #[test]
    fn fourth_order_closed_form() {
        let m = negative_sum_min(4).unwrap();
        let s7 = sqrt(7.0);
        assert!((m.minimum - (20.0 - 14.0 * s7) / 54.0).abs() < 1e-12);
        assert!((m.argmin - (s7 - 4.0) / 3.0).abs() < 1e-10);
        assert!(m.stable);
    }

    #[test]
    fn fifth_and_sixth_order() {
        let m5 = negative_sum_min(5).unwrap();
        assert!((m5.minimum + 0.603912).abs() < 1e-4);
        assert!((m5.argmin + 0.416).abs() < 1e-2);
        assert!(m5.stable);
        let m6 = negative_sum_min(6).unwrap();
        assert!((m6.minimum + 1.05315).abs() < 1e-4);
        assert!((m6.argmin + 0.38843).abs() < 1e-3);
        assert!(!m6.stable);
    }

    #[test]
    fn out_of_range_orders() {
        assert!(negative_sum_min(2).is_err());
        assert!(negative_sum_min(8).is_err());
    }

    #[test]
    fn schur_bound_examples() {
        let n = 10;
        let w = vec![1.0; n + 1];
        let p = StabilityPolynomial::from_kernel(1.0 / (2.0 * (n as f64 + 1.0)), 1.0, &w, &Kernel::constant())
            .unwrap();
        let r = schur_test(&p);
        assert!((r.sufficient_bound - 0.5).abs() < 1e-15);
        assert!(r.schur_by_bound);
        assert!(r.max_root_modulus.unwrap() < 1.0);

        let p = StabilityPolynomial::from_kernel(0.0, 0.1, &w, &Kernel::constant()).unwrap();
        let r = schur_test(&p);
        assert_eq!(r.sufficient_bound, 0.0);
        assert_eq!(r.max_root_modulus, Some(0.0));

        // |λT| = 2 with T = (N+1)τ.
        let tau = 0.1;
        let lambda = 2.0 / ((n as f64 + 1.0) * tau);
        let p = StabilityPolynomial::from_kernel(lambda, tau, &w, &Kernel::constant()).unwrap();
        let r = schur_test(&p);
        assert!(r.sufficient_bound >= 1.0);
        assert!(!r.schur_by_bound);
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (μ - 0.5)(μ + 0.25)(μ - 2) = μ³ - 2.25μ² + 0.375μ + 0.25
        let m = max_root_modulus(&[1.0, -2.25, 0.375, 0.25]);
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn audit_second_order_singular_kernel() {
        let mesh = Mesh::uniform(1.0, 32).unwrap();
        let k = Kernel::power_singular(0.3).unwrap();
        let audit =
            weight_positivity_audit(&mesh, &k, SchemeOrder::integer(2).unwrap(), WeightOptions::default())
                .unwrap();
        assert!(audit.is_clean());
        assert!(audit.worst.0 > 0.0);
        assert!(audit.sufficient_condition.is_none());
    }
}
