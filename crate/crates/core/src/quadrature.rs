//! Applying weight tables: `∫_0^{t_n} K(t_n - s) f(s) ds ≈ Σ_k w̃_k f(t_k)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::kernel::Kernel;
use crate::math::compensated_dot;
use crate::mesh::Mesh;
use crate::stencil::SchemeOrder;
use crate::weights::{WeightBuilder, WeightOptions, WeightTable};

/// `Σ_k w̃_k f(t_k)` with `samples = [f(t_0), ..., f(t_n)]`.
pub fn convolve(samples: &[f64], table: &WeightTable) -> Result<f64> {
    if samples.len() != table.collapsed.len() {
        return Err(invalid(format!(
            "expected {} samples for target index {}, got {}",
            table.collapsed.len(),
            table.n,
            samples.len()
        )));
    }
    Ok(compensated_dot(&table.collapsed, samples))
}

/// Running convolution at every node `t_1..t_N`; entry `n-1` uses the table
/// targeted at `t_n`.
pub fn convolve_series<F>(
    f: F,
    mesh: &Mesh,
    kernel: &Kernel,
    order: SchemeOrder,
    options: WeightOptions,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let samples: Vec<f64> = mesh.nodes().iter().map(|&t| f(t)).collect();
    let builder = WeightBuilder::new(mesh, kernel, order, options)?;
    (1..=mesh.len())
        .map(|n| {
            let table = builder.table(n)?;
            convolve(&samples[..=n], &table)
        })
        .collect()
}

/// Convolution at the final node only.
pub fn convolve_at_horizon<F>(
    f: F,
    mesh: &Mesh,
    kernel: &Kernel,
    order: SchemeOrder,
    options: WeightOptions,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let samples: Vec<f64> = mesh.nodes().iter().map(|&t| f(t)).collect();
    let table = WeightBuilder::new(mesh, kernel, order, options)?.table(mesh.len())?;
    convolve(&samples, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{beta, gamma};

    fn int(o: u32) -> SchemeOrder {
        SchemeOrder::integer(o).unwrap()
    }

    #[test]
    fn unit_integrand_gives_mass() {
        let mesh = Mesh::uniform(1.0, 20).unwrap();
        let k = Kernel::power_singular(0.4).unwrap();
        let v = convolve_at_horizon(|_| 1.0, &mesh, &k, int(3), WeightOptions::default()).unwrap();
        assert!((v - k.mass(1.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cubic_against_beta_identity() {
        let mesh = Mesh::uniform(1.0, 160).unwrap();
        let opts = WeightOptions::default();
        let k = Kernel::power_singular(0.5).unwrap();
        let v = convolve_at_horizon(|t| t * t * t, &mesh, &k, int(4), opts).unwrap();
        assert!((v - 32.0 / 35.0).abs() < 5e-9);
        let c = Kernel::caputo(0.5).unwrap();
        let v = convolve_at_horizon(|t| t * t * t, &mesh, &c, int(4), opts).unwrap();
        assert!((v - gamma(4.0) / gamma(4.5)).abs() < 5e-9);
    }

    #[test]
    fn running_series() {
        let mesh = Mesh::uniform(1.0, 10).unwrap();
        let opts = WeightOptions::default();
        let v = convolve_series(|_| 1.0, &mesh, &Kernel::constant(), int(2), opts).unwrap();
        for (n, x) in v.iter().enumerate() {
            assert!((x - mesh.node(n + 1)).abs() < 1e-14);
        }
        let k = Kernel::power(1.0).unwrap();
        for order in 2..=5 {
            let v = convolve_series(|t| t, &mesh, &k, int(order), opts).unwrap();
            for (n, x) in v.iter().enumerate() {
                let t = mesh.node(n + 1);
                assert!((x - t * t * t / 6.0).abs() < 1e-12, "order {order}");
            }
        }
    }

    #[test]
    fn sixth_power_series() {
        let mesh = Mesh::uniform(1.0, 160).unwrap();
        let alpha = 0.5;
        let k = Kernel::power_singular(alpha).unwrap();
        let v = convolve_series(|t| libm::pow(t, 6.0), &mesh, &k, int(3), WeightOptions::default())
            .unwrap();
        for (n, x) in v.iter().enumerate() {
            let t = mesh.node(n + 1);
            let e = beta(7.0, alpha) * libm::pow(t, 6.5);
            assert!((x - e).abs() < 1.2e-6, "n = {n}: {x} vs {e}");
        }
    }

    #[test]
    fn sample_length_mismatch() {
        let mesh = Mesh::uniform(1.0, 4).unwrap();
        let k = Kernel::constant();
        let b = WeightBuilder::new(&mesh, &k, int(2), WeightOptions::default()).unwrap();
        let t = b.table(4).unwrap();
        assert!(convolve(&[1.0; 4], &t).is_err());
    }
}
