//! Time partitions `0 = t_0 < t_1 < ... < t_N = T`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// A strictly increasing partition of `[0, T]` with explicit nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    /// `N` equal steps of size `T/N`; node `k` is computed as `k*T/N`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive and finite, got {horizon}")));
        }
        if steps == 0 {
            return Err(invalid("mesh needs at least one step"));
        }
        let mut nodes: Vec<f64> = (0..=steps)
            .map(|k| k as f64 * horizon / steps as f64)
            .collect();
        nodes[steps] = horizon;
        Ok(Self { nodes })
    }

    /// Wrap an explicit node list, which must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("mesh needs at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(invalid(format!("first node must be 0, got {}", nodes[0])));
        }
        if let Some(k) = nodes.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid(format!(
                "nodes must be strictly increasing and finite (violated at index {})",
                k + 1
            )));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node `t_k`.
    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Step `τ_k = t_k - t_{k-1}` for `k` in `1..=N`.
    pub fn step(&self, k: usize) -> f64 {
        self.nodes[k] - self.nodes[k - 1]
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_step(&self) -> f64 {
        self.steps().fold(0.0, f64::max)
    }

    /// True when all steps agree to within a few ulps of the largest one.
    pub fn is_uniform(&self) -> bool {
        let max = self.max_step();
        let min = self.steps().fold(f64::INFINITY, f64::min);
        max - min <= 8.0 * f64::EPSILON * self.horizon()
    }
}
