//! Convolution kernels `K` and their moments
//! `m_p = ∫_a^b (s - c)^p K(t_n - s) ds`.
//!
//! Moments, not point values, are what weight assembly consumes: for a
//! weakly singular `K` the integrand blows up at `s = t_n`, but every moment
//! is finite. Power-law kernels get exact moments; user kernels go through
//! adaptive Gauss-Kronrod with geometric refinement toward the singular end.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::math::{self, binomial, gauss_kronrod_15, gauss_legendre_24, powf, powi, CompensatedSum};

/// Largest moment power served by [`Kernel::moments`].
pub const MAX_MOMENT_POWER: usize = 5;

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-11;
const MAX_SUBDIVISIONS: usize = 60;

/// Qualitative properties of a kernel on `(0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelFlags {
    pub positive: bool,
    pub nonincreasing: bool,
    pub integrable: bool,
}

pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied kernel: an evaluator plus declared properties.
#[derive(Clone)]
pub struct CustomKernel {
    eval: KernelFn,
    flags: KernelFlags,
    singular_at_zero: bool,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("flags", &self.flags)
            .field("singular_at_zero", &self.singular_at_zero)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum KernelForm {
    /// `t^{α-1}`, weakly singular for `α < 1`.
    PowerSingular { alpha: f64 },
    /// `t^α`, bounded.
    Power { alpha: f64 },
    /// `1`.
    Constant,
    /// `t^{α-1}/Γ(α)`, the Riemann-Liouville / Caputo integral kernel.
    Caputo { alpha: f64 },
    Custom(CustomKernel),
}

/// `scale · form(t)`.
#[derive(Debug, Clone)]
pub struct Kernel {
    form: KernelForm,
    scale: f64,
}

/// Interval, target node, expansion center and highest power for a batch of moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRequest {
    pub a: f64,
    pub b: f64,
    pub target: f64,
    pub center: f64,
    pub max_power: usize,
}

impl MomentRequest {
    pub fn new(a: f64, b: f64, target: f64, center: f64, max_power: usize) -> Result<Self> {
        if !(a >= 0.0 && a < b && b <= target) {
            return Err(invalid(format!(
                "moment interval [{a}, {b}] must satisfy 0 <= a < b <= t_n = {target}"
            )));
        }
        if max_power > MAX_MOMENT_POWER {
            return Err(invalid(format!(
                "moment power {max_power} exceeds {MAX_MOMENT_POWER}"
            )));
        }
        Ok(Self { a, b, target, center, max_power })
    }
}

impl Kernel {
    pub fn power_singular(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "t^(alpha-1) is not integrable at 0 for alpha = {alpha}"
            )));
        }
        Ok(Self { form: KernelForm::PowerSingular { alpha }, scale: 1.0 })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "t^alpha kernel needs alpha >= 0, got {alpha}"
            )));
        }
        Ok(Self { form: KernelForm::Power { alpha }, scale: 1.0 })
    }

    pub fn constant() -> Self {
        Self { form: KernelForm::Constant, scale: 1.0 }
    }

    pub fn caputo(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "t^(alpha-1)/Gamma(alpha) is not integrable for alpha = {alpha}"
            )));
        }
        Ok(Self { form: KernelForm::Caputo { alpha }, scale: 1.0 })
    }

    pub fn custom<F>(eval: F, flags: KernelFlags, singular_at_zero: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            form: KernelForm::Custom(CustomKernel { eval: Arc::new(eval), flags, singular_at_zero }),
            scale: 1.0,
        }
    }

    /// The same kernel multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(c, β)` when the kernel is exactly `c·t^β`.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        match self.form {
            KernelForm::PowerSingular { alpha } => Some((self.scale, alpha - 1.0)),
            KernelForm::Power { alpha } => Some((self.scale, alpha)),
            KernelForm::Constant => Some((self.scale, 0.0)),
            KernelForm::Caputo { alpha } => Some((self.scale / math::gamma(alpha), alpha - 1.0)),
            KernelForm::Custom(_) => None,
        }
    }

    pub fn is_singular_at_zero(&self) -> bool {
        match &self.form {
            KernelForm::Custom(c) => c.singular_at_zero,
            _ => self.power_law().is_some_and(|(_, beta)| beta < 0.0),
        }
    }

    pub fn flags(&self) -> KernelFlags {
        let positive = self.scale > 0.0;
        match &self.form {
            KernelForm::Custom(c) => KernelFlags {
                positive: c.flags.positive && positive,
                ..c.flags
            },
            _ => {
                let (_, beta) = self.power_law().expect("built-in kernels are power laws");
                KernelFlags { positive, nonincreasing: beta <= 0.0, integrable: beta > -1.0 }
            }
        }
    }

    /// `K(t)`. Singular kernels refuse `t = 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(invalid(format!("kernel argument must be nonnegative, got {t}")));
        }
        if t == 0.0 && self.is_singular_at_zero() {
            return Err(Error::SingularEvaluation { t });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match &self.form {
            KernelForm::Custom(c) => self.scale * (c.eval)(t),
            _ => {
                let (coef, beta) = self.power_law().expect("built-in kernels are power laws");
                if beta == 0.0 { coef } else { coef * powf(t, beta) }
            }
        }
    }

    /// `[m_0, ..., m_P]` with `m_p = ∫_a^b (s - c)^p K(t_n - s) ds`.
    pub fn moments(&self, req: &MomentRequest) -> Result<Vec<f64>> {
        match self.power_law() {
            Some((coef, beta)) => Ok(power_law_moments(coef, beta, req)),
            None => self.moments_adaptive(req),
        }
    }

    /// Moments by adaptive quadrature regardless of kernel form.
    pub fn moments_adaptive(&self, req: &MomentRequest) -> Result<Vec<f64>> {
        if !self.flags().integrable {
            return Err(Error::InvalidKernel("kernel is declared non-integrable".into()));
        }
        // Integrate in the kernel variable u = t_n - s, which stays exact near
        // the singularity; (s - c) = (t_n - c) - u.
        let offset = req.target - req.center;
        let singular = self.is_singular_at_zero();
        let (lo, hi) = (req.target - req.b, req.target - req.a);
        (0..=req.max_power)
            .map(|p| {
                let integrand = |u: f64| {
                    if u <= 0.0 && singular {
                        return 0.0;
                    }
                    powi(offset - u, p) * self.eval_unchecked(u.max(0.0))
                };
                if singular && lo <= hi - lo {
                    integrate_from_singularity(&integrand, lo, hi)
                } else {
                    integrate_adaptive(&integrand, lo, hi, MAX_SUBDIVISIONS, 0.0)
                }
            })
            .collect()
    }

    /// `∫_0^{t_n} K(t_n - s) ds`.
    pub fn mass(&self, target: f64) -> Result<f64> {
        if !(target > 0.0) {
            return Err(invalid(format!("target time must be positive, got {target}")));
        }
        match self.power_law() {
            Some((coef, beta)) => Ok(coef * powf(target, beta + 1.0) / (beta + 1.0)),
            None => {
                let req = MomentRequest::new(0.0, target, target, target, 0)?;
                Ok(self.moments_adaptive(&req)?[0])
            }
        }
    }

    /// `∫_0^t K(t - s) s^m ds` in closed form (Beta function identity).
    pub fn monomial_convolution(&self, degree: f64, t: f64) -> Result<f64> {
        if !(degree > -1.0) {
            return Err(invalid(format!("monomial degree must exceed -1, got {degree}")));
        }
        let (coef, beta) = self.power_law().ok_or_else(|| {
            Error::Unsupported("closed-form convolution needs a built-in kernel".into())
        })?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(coef * math::beta(degree + 1.0, beta + 1.0) * powf(t, degree + beta + 1.0))
    }
}

/// Exact moments of `coef·(t_n - s)^β`.
///
/// Near the singular end (`t_n - b <= (b-a)/2`) the moments about `b` come from
/// `u = t_n - s` and the binomial expansion of `(s - b)^p = (D - u)^p`, each term
/// integrating `u^{β+i}` exactly; all terms are of comparable size so the
/// compensated sum stays accurate. Away from it the kernel is analytic on a
/// neighbourhood of `[a, b]` and a 24-point Gauss-Legendre rule is exact to
/// rounding. Both are then re-centered at `c`.
fn power_law_moments(coef: f64, beta: f64, req: &MomentRequest) -> Vec<f64> {
    let MomentRequest { a, b, target, center, max_power } = *req;
    let width = b - a;
    let gap = target - b;
    let about_b: Vec<f64> = if gap <= 0.5 * width {
        let lo = gap;
        let hi = target - a;
        let antiderivative_diff: Vec<f64> = (0..=max_power)
            .map(|i| {
                let e = beta + i as f64 + 1.0;
                let low = if lo > 0.0 { powf(lo, e) } else { 0.0 };
                (powf(hi, e) - low) / e
            })
            .collect();
        (0..=max_power)
            .map(|q| {
                let mut acc = CompensatedSum::new();
                for i in 0..=q {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    acc.add(sign * binomial(q, i) * powi(gap, q - i) * antiderivative_diff[i]);
                }
                coef * acc.value()
            })
            .collect()
    } else {
        let mut acc = vec![CompensatedSum::new(); max_power + 1];
        for (s, w) in gauss_legendre_24(a, b) {
            let kw = w * coef * powf(target - s, beta);
            let y = s - b;
            let mut yp = 1.0;
            for slot in acc.iter_mut() {
                slot.add(kw * yp);
                yp *= y;
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    };
    recenter(&about_b, b - center)
}

/// Moments about `c` from moments about `b`: `(s-c)^p = Σ_q C(p,q) (b-c)^{p-q} (s-b)^q`.
fn recenter(about_b: &[f64], shift: f64) -> Vec<f64> {
    if shift == 0.0 {
        return about_b.to_vec();
    }
    (0..about_b.len())
        .map(|p| {
            let mut acc = CompensatedSum::new();
            for (q, m) in about_b.iter().enumerate().take(p + 1) {
                acc.add(binomial(p, q) * powi(shift, p - q) * m);
            }
            acc.value()
        })
        .collect()
}

fn tolerance(value: f64) -> f64 {
    ABS_TOL.max(REL_TOL * value.abs())
}

/// Globally adaptive G7/K15 bisection. The relative tolerance applies to the
/// larger of the running estimate and `reference`.
fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    budget: usize,
    reference: f64,
) -> Result<f64> {
    let (v, e) = gauss_kronrod_15(f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    let mut subdivisions = 0;
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tolerance(total.abs().max(reference)) {
            return Ok(total);
        }
        if subdivisions >= budget {
            return Err(Error::AccuracyFailure { estimate: err, subdivisions });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one part");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(Error::AccuracyFailure { estimate: err, subdivisions });
        }
        let (v1, e1) = gauss_kronrod_15(f, lo, mid);
        let (v2, e2) = gauss_kronrod_15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        subdivisions += 1;
    }
}

/// Integral over `[lo, hi]` of a function with an algebraic-type singularity
/// at `0 <= lo`: dyadic pieces `[lo + h/2^{j+1}, lo + h/2^j]` are integrated one
/// by one. With a resolvable gap `lo > 0` the pieces stop once they are
/// narrower than the gap and the smooth remainder is integrated directly;
/// otherwise the partial sums are extrapolated with Wynn's epsilon algorithm,
/// which removes the geometric components `2^{-j(β+1)}`, `2^{-j}`, ... of the tail.
fn integrate_from_singularity<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<f64> {
    let width = hi - lo;
    if lo > width * libm::ldexp(1.0, -(MAX_SUBDIVISIONS as i32 - 4)) {
        return integrate_down_to_gap(f, lo, hi);
    }
    let mut total = CompensatedSum::new();
    let mut err_sum = 0.0;
    let mut partial: Vec<f64> = Vec::with_capacity(MAX_SUBDIVISIONS);
    let mut history: Vec<f64> = Vec::with_capacity(MAX_SUBDIVISIONS);
    let mut last_estimate = f64::INFINITY;
    let mut scale = 1.0;
    for j in 0..MAX_SUBDIVISIONS {
        let right = if j == 0 { hi } else { lo + width * scale };
        scale *= 0.5;
        let left = lo + width * scale;
        let (v, e) = gauss_kronrod_15(f, left, right);
        let reference = total.value().abs().max(v.abs());
        let (v, e) = if e > 0.5 * tolerance(reference) {
            (integrate_adaptive(f, left, right, MAX_SUBDIVISIONS, 0.5 * reference)?, 0.0)
        } else {
            (v, e)
        };
        total.add(v);
        err_sum += e;
        partial.push(total.value());
        if v == 0.0 && partial.len() >= 2 && partial[partial.len() - 2] == total.value() {
            return Ok(total.value());
        }
        let window = &partial[partial.len().saturating_sub(EPSILON_WINDOW)..];
        let value = wynn_epsilon(window);
        history.push(value);
        let n = history.len();
        if n < 4 {
            continue;
        }
        last_estimate = (value - history[n - 2]).abs() + (value - history[n - 3]).abs() + err_sum;
        if last_estimate <= tolerance(value) {
            return Ok(value);
        }
    }
    Err(Error::AccuracyFailure { estimate: last_estimate, subdivisions: MAX_SUBDIVISIONS })
}

const EPSILON_WINDOW: usize = 24;

fn integrate_down_to_gap<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<f64> {
    let width = hi - lo;
    let mut total = CompensatedSum::new();
    let mut right = hi;
    let mut scale = 0.5;
    loop {
        let last = width * scale <= lo;
        let left = if last { lo } else { lo + width * scale };
        let reference = total.value().abs();
        total.add(integrate_adaptive(f, left, right, MAX_SUBDIVISIONS, 0.5 * reference)?);
        if last {
            return Ok(total.value());
        }
        right = left;
        scale *= 0.5;
    }
}

/// Limit estimate from the highest even column of the epsilon table built
/// on `sums`; stops early once a column stops moving above rounding level.
fn wynn_epsilon(sums: &[f64]) -> f64 {
    let mut best = sums[sums.len() - 1];
    let mut prev = vec![0.0; sums.len() + 1];
    let mut cur = sums.to_vec();
    let mut column = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let size = cur[i + 1].abs().max(cur[i].abs());
            if !(diff.abs() > 4.0 * f64::EPSILON * size) {
                // An even column that stopped moving has converged.
                return if column % 2 == 0 { cur[cur.len() - 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        column += 1;
        if column % 2 == 0 {
            match next.last() {
                Some(&x) if x.is_finite() => best = x,
                _ => return best,
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_values() {
        assert!((Kernel::power_singular(0.5).unwrap().eval(4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((Kernel::power(0.5).unwrap().eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(Kernel::constant().eval(0.37).unwrap(), 1.0);
    }

    #[test]
    fn singular_evaluation_refused() {
        let k = Kernel::power_singular(0.5).unwrap();
        assert_eq!(k.eval(0.0), Err(Error::SingularEvaluation { t: 0.0 }));
        assert_eq!(Kernel::power(0.5).unwrap().eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn non_integrable_kernel_rejected() {
        assert!(matches!(Kernel::power_singular(0.0), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::power_singular(-0.5), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::caputo(0.0), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn singular_full_interval_moments() {
        let k = Kernel::power_singular(0.5).unwrap();
        let req = MomentRequest::new(0.0, 1.0, 1.0, 1.0, 1).unwrap();
        let m = k.moments(&req).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-14);
        assert!((m[1] + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_kernel_linear_moment() {
        let req = MomentRequest::new(0.2, 0.5, 1.0, 0.5, 1).unwrap();
        let m = Kernel::constant().moments(&req).unwrap();
        assert!((m[0] - 0.3).abs() < 1e-15);
        assert!((m[1] + 0.045).abs() < 1e-15);
    }

    #[test]
    fn masses() {
        assert!((Kernel::constant().mass(0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((Kernel::power_singular(0.5).unwrap().mass(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((Kernel::power(0.25).unwrap().mass(1.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_requests() {
        assert!(MomentRequest::new(0.5, 0.5, 1.0, 0.5, 0).is_err());
        assert!(MomentRequest::new(0.0, 1.2, 1.0, 1.0, 0).is_err());
        assert!(MomentRequest::new(0.0, 1.0, 1.0, 1.0, 6).is_err());
    }

    #[test]
    fn flags_follow_form() {
        let f = Kernel::power_singular(0.3).unwrap().flags();
        assert!(f.positive && f.nonincreasing && f.integrable);
        let g = Kernel::power(0.3).unwrap().flags();
        assert!(g.positive && !g.nonincreasing);
        assert!(Kernel::power_singular(0.3).unwrap().is_singular_at_zero());
        assert!(!Kernel::power(0.3).unwrap().is_singular_at_zero());
    }

    #[test]
    fn custom_kernel_matches_closed_form_at_singular_end() {
        let alpha = 0.3;
        let custom = Kernel::custom(
            move |t| libm::pow(t, alpha - 1.0),
            KernelFlags { positive: true, nonincreasing: true, integrable: true },
            true,
        );
        let exact = Kernel::power_singular(alpha).unwrap();
        let req = MomentRequest::new(0.9, 1.0, 1.0, 1.0, 3).unwrap();
        let a = custom.moments(&req).unwrap();
        let b = exact.moments(&req).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn near_and_far_paths_agree_at_the_switch() {
        // Same integral split at the near/far boundary must add up.
        let k = Kernel::power_singular(0.2).unwrap();
        let whole = k.moments(&MomentRequest::new(0.0, 0.9, 1.0, 0.9, 3).unwrap()).unwrap();
        let left = k.moments(&MomentRequest::new(0.0, 0.6, 1.0, 0.9, 3).unwrap()).unwrap();
        let right = k.moments(&MomentRequest::new(0.6, 0.9, 1.0, 0.9, 3).unwrap()).unwrap();
        for p in 0..=3 {
            assert!((whole[p] - left[p] - right[p]).abs() < 1e-14);
        }
    }

    #[test]
    fn monomial_convolution_beta_identity() {
        let k = Kernel::power_singular(0.5).unwrap();
        assert!((k.monomial_convolution(3.0, 1.0).unwrap() - 32.0 / 35.0).abs() < 1e-14);
        let c = Kernel::caputo(0.5).unwrap();
        let expected = math::gamma(4.0) / math::gamma(4.5);
        assert!((c.monomial_convolution(3.0, 1.0).unwrap() - expected).abs() < 1e-14);
    }
}
