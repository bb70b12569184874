//! Integrated time-fractional diffusion on `(0, 1)` with zero Dirichlet data:
//! `u(x,t) = φ(x) + ∫_0^t (f(x,s) + u_xx(x,s)) (t-s)^{α-1}/Γ(α) ds`.
//!
//! Space uses a fourth-order Laplacian, time the product-integration weights
//! with the `(t-s)^{α-1}/Γ(α)` kernel. Each step is a banded solve with
//! `I - w̃_n L`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;
use crate::math::{gamma, powf, sin, CompensatedSum};
use crate::mesh::Mesh;
use crate::stencil::SchemeOrder;
use crate::weights::{WeightBuilder, WeightOptions};

/// Smallest grid the five-point stencil and its closures fit on.
pub const MIN_POINTS: usize = 5;

/// `M` interior points of `(0, 1)`, spacing `h = 1/(M+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    m: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(m: usize) -> Result<Self> {
        if m < MIN_POINTS {
            return Err(invalid(format!("need at least {MIN_POINTS} interior points, got {m}")));
        }
        Ok(Self { m, h: 1.0 / (m + 1) as f64 })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Interior points `x_i = (i+1) h`.
    pub fn points(&self) -> Vec<f64> {
        (1..=self.m).map(|i| i as f64 * self.h).collect()
    }
}

const INTERIOR: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
// Second derivative at x_1 from x_0 (boundary) .. x_5, fourth order, times 12.
const CLOSURE: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

/// Square matrix stored by diagonals, with room for the fill-in of LU with
/// partial pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    // row i holds columns i - lower ..= i + lower + upper
    rows: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self { n, lower, upper, rows: vec![vec![0.0; 2 * lower + upper + 1]; n] }
    }

    pub fn identity(n: usize, lower: usize, upper: usize) -> Self {
        let mut a = Self::zeros(n, lower, upper);
        for i in 0..n {
            a.set(i, i, 1.0);
        }
        a
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let offset = j as isize - i as isize + self.lower as isize;
        if offset < 0 || offset as usize >= self.rows[i].len() {
            None
        } else {
            Some(offset as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.rows[i][s])
    }

    /// Panics if `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let inside = j + self.lower >= i && j <= i + self.upper;
        assert!(inside, "entry ({i}, {j}) outside the band");
        let s = self.slot(i, j).expect("inside band");
        self.rows[i][s] = value;
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * v[j]).sum()
            })
            .collect()
    }

    /// `self + factor·other`, bands taken as the wider of the two.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.lower.max(other.lower), self.upper.max(other.upper));
        for i in 0..self.n {
            let lo = i.saturating_sub(out.lower);
            let hi = (i + out.upper).min(self.n - 1);
            for j in lo..=hi {
                out.set(i, j, self.get(i, j) + factor * other.get(i, j));
            }
        }
        out
    }

    /// Solve `A x = b` by Gaussian elimination with partial pivoting.
    /// A pivot below `1e-14·max|A|` reports the matrix as singular.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(invalid(format!("right-hand side has {} entries, expected {}", b.len(), self.n)));
        }
        let n = self.n;
        let width = self.lower + self.upper;
        let scale = self.rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut a = self.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let last = (col + self.lower).min(n - 1);
            let pivot_row = (col..=last)
                .max_by(|&p, &q| a.get(p, col).abs().total_cmp(&a.get(q, col).abs()))
                .expect("nonempty range");
            let pivot = a.get(pivot_row, col);
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(invalid("banded matrix is singular"));
            }
            let right = (col + width).min(n - 1);
            if pivot_row != col {
                for j in col..=right {
                    let (u, v) = (a.get(col, j), a.get(pivot_row, j));
                    a.set_wide(col, j, v);
                    a.set_wide(pivot_row, j, u);
                }
                x.swap(col, pivot_row);
            }
            for r in col + 1..=last {
                let factor = a.get(r, col) / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in col..=right {
                    let v = a.get(r, j) - factor * a.get(col, j);
                    a.set_wide(r, j, v);
                }
                x[r] -= factor * x[col];
            }
        }
        for i in (0..n).rev() {
            let right = (i + width).min(n - 1);
            let mut acc = CompensatedSum::new();
            acc.add(x[i]);
            for j in i + 1..=right {
                acc.add(-a.get(i, j) * x[j]);
            }
            x[i] = acc.value() / a.get(i, i);
        }
        Ok(x)
    }

    // Writes into the fill-in region as well as the declared band.
    fn set_wide(&mut self, i: usize, j: usize, value: f64) {
        match self.slot(i, j) {
            Some(s) => self.rows[i][s] = value,
            None => assert!(value == 0.0, "fill-in outside storage at ({i}, {j})"),
        }
    }
}

/// Fourth-order `d²/dx²` on `grid` with zero boundary values: the central
/// five-point stencil inside and six-point one-sided closures on the first
/// and last rows.
pub fn laplacian_matrix(grid: &Grid1D) -> BandedMatrix {
    let m = grid.len();
    let c = 1.0 / (12.0 * grid.h * grid.h);
    let mut a = BandedMatrix::zeros(m, 4, 4);
    for i in 1..m - 1 {
        for (d, w) in INTERIOR.iter().enumerate() {
            let j = i as isize + d as isize - 2;
            if (0..m as isize).contains(&j) {
                a.set(i, j as usize, c * w);
            }
        }
    }
    // CLOSURE[0] multiplies the zero boundary value.
    for (d, w) in CLOSURE.iter().enumerate().skip(1) {
        a.set(0, d - 1, c * w);
        a.set(m - 1, m - d, c * w);
    }
    a
}

/// Applies the fourth-order Laplacian to interior values on a uniform grid
/// with spacing `h` and zero boundary values.
pub fn laplacian4(field: &[f64], h: f64) -> Result<Vec<f64>> {
    if field.len() < MIN_POINTS {
        return Err(invalid(format!(
            "need at least {MIN_POINTS} interior points, got {}",
            field.len()
        )));
    }
    if !(h > 0.0) {
        return Err(invalid(format!("spacing must be positive, got {h}")));
    }
    let grid = Grid1D { m: field.len(), h };
    Ok(laplacian_matrix(&grid).matvec(field))
}

/// A space-time source `f(x, t)`, optionally with its exact time convolution
/// against `t^{α-1}/Γ(α)`.
pub trait Source {
    fn eval(&self, x: f64, t: f64) -> f64;

    fn convolution(&self, _x: f64, _t: f64) -> Option<f64> {
        None
    }
}

/// No source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ZeroSource;

impl Source for ZeroSource {
    fn eval(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }

    fn convolution(&self, _x: f64, _t: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Source making `u = sin(πx) t^ρ` exact:
/// `f = sin(πx) (Γ(ρ+1)/Γ(ρ+1-α) t^{ρ-α} + π² t^ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSource {
    pub rho: f64,
    pub alpha: f64,
    ratio: f64,
    conv_ratio: f64,
}

impl ManufacturedSource {
    pub fn new(rho: f64, alpha: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(invalid(format!("solution exponent must be positive, got {rho}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if rho - alpha <= -1.0 {
            return Err(invalid("source exponent rho - alpha is not integrable"));
        }
        Ok(Self {
            rho,
            alpha,
            ratio: gamma(rho + 1.0) / gamma(rho + 1.0 - alpha),
            conv_ratio: gamma(rho + 1.0) / gamma(rho + alpha + 1.0),
        })
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        sin(PI * x) * powf(t, self.rho)
    }
}

impl Source for ManufacturedSource {
    fn eval(&self, x: f64, t: f64) -> f64 {
        let memory = if t == 0.0 && self.rho < self.alpha {
            f64::INFINITY
        } else {
            self.ratio * powf(t, self.rho - self.alpha)
        };
        sin(PI * x) * (memory + PI * PI * powf(t, self.rho))
    }

    fn convolution(&self, x: f64, t: f64) -> Option<f64> {
        Some(sin(PI * x) * (powf(t, self.rho) + PI * PI * self.conv_ratio * powf(t, self.rho + self.alpha)))
    }
}

/// How the source enters each time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceTreatment {
    /// `Σ_k w̃_k f(t_k)`, the same quadrature as the Laplacian term.
    Quadrature,
    /// The exact convolution of the source; only `u_xx` is discretized in time.
    #[default]
    ExactConvolution,
}

pub struct FracDiffProblem<S> {
    pub grid: Grid1D,
    pub alpha: f64,
    pub mesh: Mesh,
    pub order: SchemeOrder,
    /// `φ` at the interior points.
    pub initial: Vec<f64>,
    pub source: S,
    pub treatment: SourceTreatment,
}

impl<S: Source> FracDiffProblem<S> {
    /// α-order time scheme, zero initial field.
    pub fn new(grid: Grid1D, alpha: f64, mesh: Mesh, source: S) -> Result<Self> {
        let order = SchemeOrder::fractional(alpha)?;
        Ok(Self {
            grid,
            alpha,
            mesh,
            order,
            initial: vec![0.0; grid.len()],
            source,
            treatment: SourceTreatment::default(),
        })
    }

    pub fn with_treatment(mut self, treatment: SourceTreatment) -> Self {
        self.treatment = treatment;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FracDiffSolution {
    pub x: Vec<f64>,
    pub nodes: Vec<f64>,
    /// `u[n][i] = u(x_i, t_n)`.
    pub u: Vec<Vec<f64>>,
}

impl FracDiffSolution {
    /// Maximum over all space-time nodes.
    pub fn max_error<G: Fn(f64, f64) -> f64>(&self, exact: G) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, row) in self.nodes.iter().zip(&self.u) {
            for (x, v) in self.x.iter().zip(row) {
                worst = worst.max((v - exact(*x, *t)).abs());
            }
        }
        worst
    }
}

/// Forward sweep; step `n` solves
/// `(I - w̃_n L) u^n = φ + S_n + Σ_{k<n} w̃_k L u^k` where `S_n` is either the
/// quadrature `Σ_k w̃_k f(t_k)` or the exact source convolution.
pub fn solve_fracdiff<S: Source>(p: &FracDiffProblem<S>) -> Result<FracDiffSolution> {
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {}", p.alpha)));
    }
    let m = p.grid.len();
    if p.initial.len() != m {
        return Err(invalid(format!("initial field has {} entries, expected {m}", p.initial.len())));
    }
    let x = p.grid.points();
    let kernel = Kernel::caputo(p.alpha)?;
    let builder = WeightBuilder::new(&p.mesh, &kernel, p.order, WeightOptions::default())?;
    let lap = laplacian_matrix(&p.grid);
    let identity = BandedMatrix::identity(m, 4, 4);
    let nodes = p.mesh.nodes().to_vec();

    let source_at = |t: f64| -> Vec<f64> { x.iter().map(|&xi| p.source.eval(xi, t)).collect() };
    let mut sources: Vec<Vec<f64>> = Vec::new();
    if p.treatment == SourceTreatment::Quadrature {
        sources = nodes.iter().map(|&t| source_at(t)).collect();
    }

    let mut u = vec![p.initial.clone()];
    let mut lap_history = vec![lap.matvec(&p.initial)];
    for n in 1..=p.mesh.len() {
        let table = builder.table(n)?;
        let w = &table.collapsed;
        let mut rhs: Vec<CompensatedSum> = p
            .initial
            .iter()
            .map(|&v| {
                let mut acc = CompensatedSum::new();
                acc.add(v);
                acc
            })
            .collect();
        match p.treatment {
            SourceTreatment::Quadrature => {
                for (k, wk) in w.iter().enumerate() {
                    // w̃_0 vanishes for the one-node scheme, where f(0) may be infinite.
                    if *wk == 0.0 {
                        continue;
                    }
                    for (acc, f) in rhs.iter_mut().zip(&sources[k]) {
                        acc.add(wk * f);
                    }
                }
            }
            SourceTreatment::ExactConvolution => {
                let t = nodes[n];
                for (acc, &xi) in rhs.iter_mut().zip(&x) {
                    let c = p.source.convolution(xi, t).ok_or_else(|| {
                        Error::Unsupported("source has no closed-form convolution".into())
                    })?;
                    acc.add(c);
                }
            }
        }
        for (wk, lu) in w[..n].iter().zip(&lap_history) {
            if *wk == 0.0 {
                continue;
            }
            for (acc, v) in rhs.iter_mut().zip(lu) {
                acc.add(wk * v);
            }
        }
        let rhs: Vec<f64> = rhs.iter().map(CompensatedSum::value).collect();
        let system = identity.add_scaled(-w[n], &lap);
        let next = system.solve(&rhs).map_err(|_| Error::NonInvertibleStep { n })?;
        lap_history.push(lap.matvec(&next));
        u.push(next);
    }
    Ok(FracDiffSolution { x, nodes, u })
}
