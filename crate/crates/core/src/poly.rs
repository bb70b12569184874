//! Dense univariate polynomials with real coefficients and Sturm-sequence
//! root isolation on a closed interval.

use alloc::vec;
use alloc::vec::Vec;

/// Polynomial stored by ascending powers: `coeffs[p]` multiplies `x^p`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The monic linear factor `x - root`.
    pub fn linear(root: f64) -> Self {
        Self::new(vec![-root, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^p` (zero beyond the stored degree).
    pub fn coeff(&self, p: usize) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, &c)| p as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|p| self.coeff(p) + other.coeff(p)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Remainder of Euclidean division by `divisor` (which must be nonzero).
    fn rem(&self, divisor: &Self) -> Self {
        let mut r = self.coeffs.clone();
        let d = divisor.degree();
        let lead = divisor.coeffs[d];
        while r.len() > d && r.len() > 1 {
            let shift = r.len() - 1 - d;
            let q = r[r.len() - 1] / lead;
            for (p, c) in divisor.coeffs.iter().enumerate() {
                r[p + shift] -= q * c;
            }
            r.pop();
        }
        if d == 0 {
            return Self::zero();
        }
        Self::new(r)
    }

    /// Real roots in `[lo, hi]`, isolated with a Sturm sequence and refined
    /// by bisection until the bracket is narrower than `tol`.
    pub fn real_roots_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let sturm = SturmSequence::new(self);
        let mut roots = Vec::new();
        let mut stack = vec![(lo, hi)];
        while let Some((a, b)) = stack.pop() {
            let count = sturm.count_roots(a, b);
            if count == 0 {
                continue;
            }
            if b - a <= tol {
                roots.push(0.5 * (a + b));
                continue;
            }
            if count == 1 {
                if let Some(root) = self.bisect(a, b, tol) {
                    roots.push(root);
                    continue;
                }
            }
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= tol);
        roots
    }

    fn bisect(&self, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
        let mut fa = self.eval(a);
        let fb = self.eval(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() == fb.signum() {
            return None;
        }
        while b - a > tol {
            let m = 0.5 * (a + b);
            let fm = self.eval(m);
            if fm == 0.0 {
                return Some(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

struct SturmSequence {
    chain: Vec<Poly>,
}

impl SturmSequence {
    fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]);
            let scale = r.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let reference = chain[n - 2].coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if r.is_zero() || scale <= 1e-13 * reference {
                break;
            }
            chain.push(r.scale(-1.0));
        }
        Self { chain }
    }

    fn sign_changes(&self, x: f64) -> usize {
        let mut changes = 0;
        let mut last = 0.0f64;
        for p in &self.chain {
            let v = p.eval(x);
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    /// Number of distinct roots in `(a, b]`.
    fn count_roots(&self, a: f64, b: f64) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }
}
