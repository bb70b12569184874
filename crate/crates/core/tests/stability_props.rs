use cquad_core::kernel::{Kernel, KernelFlags};
use cquad_core::mesh::Mesh;
use cquad_core::stability::{
    negative_sum_min, schur_test, weight_positivity_audit, StabilityPolynomial, MAX_ROOT_DEGREE,
};
use cquad_core::stencil::SchemeOrder;
use cquad_core::weights::{build_table, WeightOptions};
use proptest::prelude::*;

const FLAGS: KernelFlags = KernelFlags { positive: true, nonincreasing: true, integrable: true };

#[test]
fn sufficient_condition_constants() {
    let g4 = negative_sum_min(4).unwrap();
    assert!((g4.minimum - (20.0 - 14.0 * 7f64.sqrt()) / 54.0).abs() <= 1e-12);
    assert!((g4.argmin - (7f64.sqrt() - 4.0) / 3.0).abs() <= 1e-10);
    let g5 = negative_sum_min(5).unwrap();
    assert!((g5.minimum + 0.603912).abs() <= 1e-4 && (g5.argmin + 0.416).abs() <= 1e-2);
    assert!(g5.stable);
    let g6 = negative_sum_min(6).unwrap();
    assert!((g6.minimum + 1.05315).abs() <= 1e-4 && (g6.argmin + 0.38843).abs() <= 1e-3);
    assert!(!g6.stable);
}

#[test]
fn sixth_order_audit_reports_both_verdicts() {
    let mesh = Mesh::uniform(1.0, 40).unwrap();
    let order = SchemeOrder::for_analysis(6).unwrap();
    for k in [Kernel::constant(), Kernel::power_singular(0.5).unwrap(), Kernel::power_singular(0.1).unwrap()] {
        let audit = weight_positivity_audit(&mesh, &k, order, WeightOptions::default()).unwrap();
        let margin = audit.sufficient_condition.unwrap();
        assert!(!margin.stable);
        // Each violation is a real negative weight, and the worst entry is one of them when any exist.
        for v in &audit.violations {
            let t = build_table(&mesh, &k, order, v.target, WeightOptions::default()).unwrap();
            assert_eq!(t.collapsed[v.index], v.weight);
        }
        if let Some(first) = audit.violations.first() {
            assert!(audit.worst.0 <= first.weight);
        }
    }
}

fn mixture() -> impl Strategy<Value = Kernel> {
    (0.3f64..0.95, 0.0f64..1.0, 0.0f64..5.0, 0.1f64..10.0).prop_map(|(alpha, mix, rate, c)| {
        Kernel::custom(
            move |t: f64| c * (mix * t.powf(alpha - 1.0) + (1.0 - mix) * (-rate * t).exp()),
            FLAGS,
            mix > 0.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bound_below_one_keeps_roots_inside(
        lambda in -50.0f64..50.0,
        tau in 1e-3f64..0.5,
        weights in proptest::collection::vec(0.0f64..1.0, 1..=MAX_ROOT_DEGREE + 1),
        kernel in proptest::collection::vec(0.0f64..2.0, MAX_ROOT_DEGREE + 1),
    ) {
        let p = StabilityPolynomial::new(lambda, tau, &weights, &kernel[..weights.len()]).unwrap();
        let report = schur_test(&p);
        if report.schur_by_bound {
            let m = report.max_root_modulus.unwrap();
            prop_assert!(m < 1.0, "bound {} but root modulus {}", report.sufficient_bound, m);
        }
    }

    #[test]
    fn random_nonincreasing_kernels_audit_clean(k in mixture(), n in 1usize..24, gamma in 1u32..=5) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let audit = weight_positivity_audit(&mesh, &k, SchemeOrder::integer(gamma).unwrap(), WeightOptions::default()).unwrap();
        prop_assert!(audit.is_clean(), "{:?}", audit.violations.first());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tables_from_real_weights_obey_the_bound(
        alpha in 0.05f64..0.95,
        gamma in 1u32..=5,
        n in 2usize..40,
        lambda in -5.0f64..5.0,
    ) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let k = Kernel::power(alpha).unwrap();
        let table = build_table(&mesh, &k, SchemeOrder::integer(gamma).unwrap(), n, WeightOptions::default()).unwrap();
        let p = StabilityPolynomial::from_kernel(lambda, mesh.step(1), &table.collapsed, &k).unwrap();
        prop_assert_eq!(p.degree(), n);
        prop_assert_eq!(p.coefficients()[0], 1.0 - lambda * mesh.step(1) * table.collapsed[0] * k.eval(0.0).unwrap());
        let report = schur_test(&p);
        if report.schur_by_bound {
            prop_assert!(report.max_root_modulus.unwrap() < 1.0);
        }
    }
}
