//! Product-integration weights.
//!
//! Raw weights `w_j^k = ∫_{t_{k-1}}^{t_k} c_j^k(s) K(t_n - s) ds` are expanded
//! through the stencil polynomials into kernel moments. Collapsing regroups
//! them per node: `w̃_i = Σ_j w_j^{i+j}`, dropping terms with `i + j > n`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::kernel::{Kernel, MomentRequest};
use crate::math::{compensated_sum, powi, CompensatedSum};
use crate::mesh::Mesh;
use crate::stencil::{stencil_on_mesh, Abscissae, SchemeOrder, StencilSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WeightOptions {
    pub abscissae: Abscissae,
}

/// Weights for one target node `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub n: usize,
    pub target: f64,
    pub order: SchemeOrder,
    /// `raw[k-1][j] = w_j^k` for `k = 1..=n`.
    pub raw: Vec<Vec<f64>>,
    /// `collapsed[i] = w̃_i` for `i = 0..=n`.
    pub collapsed: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub sum: f64,
    pub mass: f64,
    pub defect: f64,
    pub consistent: bool,
}

impl WeightTable {
    pub fn consistency(&self) -> ConsistencyReport {
        consistency_report(self)
    }

    /// `w̃_n`, the weight on the unknown in an implicit step.
    pub fn diagonal(&self) -> f64 {
        self.collapsed[self.n]
    }
}

pub fn consistency_report(table: &WeightTable) -> ConsistencyReport {
    let sum = compensated_sum(table.collapsed.iter().copied());
    let defect = (sum - table.mass).abs();
    ConsistencyReport {
        sum,
        mass: table.mass,
        defect,
        consistent: defect <= 1e-10 * (1.0 + table.mass.abs()),
    }
}

/// Stencils for every subinterval of a mesh, built once and reused for all
/// target nodes.
#[derive(Debug, Clone)]
pub struct WeightBuilder<'a> {
    mesh: &'a Mesh,
    kernel: &'a Kernel,
    order: SchemeOrder,
    stencils: Vec<StencilSet>,
}

impl<'a> WeightBuilder<'a> {
    pub fn new(
        mesh: &'a Mesh,
        kernel: &'a Kernel,
        order: SchemeOrder,
        options: WeightOptions,
    ) -> Result<Self> {
        let stencils = (1..=mesh.len())
            .map(|k| stencil_on_mesh(mesh, k, order, options.abscissae))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, kernel, order, stencils })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn kernel(&self) -> &Kernel {
        self.kernel
    }

    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    pub fn raw(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        self.check_target(n)?;
        let target = self.mesh.node(n);
        (1..=n)
            .map(|k| {
                let stencil = &self.stencils[k - 1];
                let tau = self.mesh.step(k);
                let tk = self.mesh.node(k);
                let req = MomentRequest::new(
                    self.mesh.node(k - 1),
                    tk,
                    target,
                    tk,
                    stencil.span() - 1,
                )?;
                let moments = self.kernel.moments(&req)?;
                Ok(stencil
                    .polys()
                    .iter()
                    .map(|c| {
                        let mut acc = CompensatedSum::new();
                        for (p, m) in moments.iter().enumerate() {
                            acc.add(c.coeff(p) * m / powi(tau, p));
                        }
                        acc.value()
                    })
                    .collect())
            })
            .collect()
    }

    pub fn table(&self, n: usize) -> Result<WeightTable> {
        let raw = self.raw(n)?;
        let collapsed = collapse(&raw, n)?;
        let target = self.mesh.node(n);
        Ok(WeightTable {
            n,
            target,
            order: self.order,
            raw,
            collapsed,
            mass: self.kernel.mass(target)?,
        })
    }

    fn check_target(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.mesh.len() {
            return Err(invalid(format!("target index {n} outside 1..={}", self.mesh.len())));
        }
        Ok(())
    }
}

/// Raw weights `w_j^k` for target `t_n`; row `k-1` holds subinterval `k`.
pub fn raw_weights(
    mesh: &Mesh,
    kernel: &Kernel,
    order: SchemeOrder,
    n: usize,
    options: WeightOptions,
) -> Result<Vec<Vec<f64>>> {
    WeightBuilder::new(mesh, kernel, order, options)?.raw(n)
}

/// `w̃_i = Σ_j w_j^{i+j}` over `1 <= i + j <= n`, for `i = 0..=n`.
pub fn collapse(raw: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if raw.len() != n {
        return Err(invalid(format!("expected {n} rows of raw weights, got {}", raw.len())));
    }
    let mut acc = vec![CompensatedSum::new(); n + 1];
    for (row, k) in raw.iter().zip(1..) {
        for (j, w) in row.iter().enumerate() {
            if j <= k {
                acc[k - j].add(*w);
            }
        }
    }
    Ok(acc.iter().map(CompensatedSum::value).collect())
}

pub fn build_table(
    mesh: &Mesh,
    kernel: &Kernel,
    order: SchemeOrder,
    n: usize,
    options: WeightOptions,
) -> Result<WeightTable> {
    WeightBuilder::new(mesh, kernel, order, options)?.table(n)
}
