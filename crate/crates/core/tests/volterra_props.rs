use cquad_core::kernel::Kernel;
use cquad_core::mesh::Mesh;
use cquad_core::stencil::SchemeOrder;
use cquad_core::volterra::{manufacture_forcing, step_solve, VolterraProblem};
use cquad_core::weights::{build_table, WeightOptions};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = Kernel> {
    (0usize..3, 0.05f64..0.95, -1.0f64..1.0).prop_map(|(form, alpha, c)| {
        let k = match form {
            0 => Kernel::power_singular(alpha).unwrap(),
            1 => Kernel::power(alpha).unwrap(),
            _ => Kernel::caputo(alpha).unwrap(),
        };
        k.scaled(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_residual_vanishes(
        k in kernel(),
        gamma in 1u32..=5,
        n in 1usize..30,
        w in 0.5f64..8.0,
    ) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let order = SchemeOrder::integer(gamma).unwrap();
        let f = move |t: f64| (w * t).cos() + t;
        let sol = step_solve(&VolterraProblem::new(f, k.clone(), mesh.clone(), order)).unwrap();
        prop_assert_eq!(sol.u[0], 0.0);
        for m in 1..=n {
            let table = build_table(&mesh, &k, order, m, WeightOptions::default()).unwrap();
            let terms: Vec<f64> = table.collapsed.iter().zip(&sol.u).map(|(a, b)| a * b).collect();
            let history: f64 = terms.iter().sum();
            let scale = 1.0 + sol.u[m].abs() + terms.iter().map(|x| x.abs()).sum::<f64>();
            let residual = sol.u[m] - history - f(mesh.node(m));
            prop_assert!(residual.abs() <= 1e-12 * scale, "node {}: {}", m, residual);
        }
    }

    #[test]
    fn zero_forcing_gives_zero(k in kernel(), gamma in 1u32..=5, n in 1usize..40) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let sol = step_solve(&VolterraProblem::new(|_| 0.0, k, mesh, SchemeOrder::integer(gamma).unwrap())).unwrap();
        prop_assert!(sol.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn solution_is_linear_in_the_forcing(
        k in kernel(),
        gamma in 1u32..=5,
        n in 1usize..30,
        a in -3.0f64..3.0,
    ) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let order = SchemeOrder::integer(gamma).unwrap();
        let base = step_solve(&VolterraProblem::new(|t: f64| t.exp(), k.clone(), mesh.clone(), order)).unwrap();
        let scaled = step_solve(&VolterraProblem::new(move |t: f64| a * t.exp(), k, mesh, order)).unwrap();
        for (x, y) in base.u.iter().zip(&scaled.u) {
            prop_assert!((a * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}

#[test]
fn manufactured_cubic_converges_at_third_order() {
    let k = Kernel::power_singular(0.5).unwrap();
    let forcing = manufacture_forcing(3.0, &k).unwrap();
    let errors: Vec<f64> = [40, 80]
        .iter()
        .map(|&n| {
            let mesh = Mesh::uniform(1.0, n).unwrap();
            let p = VolterraProblem::new(|t| forcing.eval(t), k.clone(), mesh, SchemeOrder::integer(3).unwrap());
            step_solve(&p).unwrap().max_error(|t| forcing.exact(t))
        })
        .collect();
    let rate = (errors[0] / errors[1]).log2();
    assert!((rate - 3.0).abs() < 0.15, "{rate}");
}
