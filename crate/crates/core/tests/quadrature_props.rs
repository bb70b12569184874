use cquad_core::kernel::Kernel;
use cquad_core::mesh::Mesh;
use cquad_core::quadrature::{convolve, convolve_at_horizon, convolve_series};
use cquad_core::stencil::SchemeOrder;
use cquad_core::weights::{build_table, WeightOptions};
use proptest::prelude::*;

fn opts() -> WeightOptions {
    WeightOptions::default()
}

fn max_error(n: usize, order: SchemeOrder, alpha: f64, m: f64) -> f64 {
    let k = Kernel::power_singular(alpha).unwrap();
    let mesh = Mesh::uniform(1.0, n).unwrap();
    let v = convolve_series(|t: f64| t.powf(m), &mesh, &k, order, opts()).unwrap();
    // ∫_0^t (t-s)^{α-1} s^m ds = B(m+1, α) t^{m+α}.
    let c = beta_fn(m + 1.0, alpha);
    v.iter()
        .enumerate()
        .map(|(i, x)| (x - c * mesh.node(i + 1).powf(m + alpha)).abs())
        .fold(0.0, f64::max)
}

// B(a, b): the finite product (a-1)!/(b(b+1)...(b+a-1)) for integer a, otherwise
// Simpson after substitutions that flatten both endpoint singularities.
fn beta_fn(a: f64, b: f64) -> f64 {
    if a.fract() == 0.0 {
        return (0..a as u32).fold(1.0, |acc, i| acc * (i.max(1) as f64) / (b + i as f64));
    }
    let simpson = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        let m = 20000;
        let h = (hi - lo) / m as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        s * h / 3.0
    };
    // ∫_0^{1/2} x^{a-1}(1-x)^{b-1} dx with x = v^{1/a}.
    let left = simpson(&|v: f64| (1.0 - v.powf(1.0 / a)).powf(b - 1.0) / a, 0.0, 0.5f64.powf(a));
    let right = simpson(&|v: f64| (1.0 - v.powf(1.0 / b)).powf(a - 1.0) / b, 0.0, 0.5f64.powf(b));
    left + right
}

fn rate(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

#[test]
fn beta_oracle_self_check() {
    assert!((beta_fn(1.0, 0.5) - 2.0).abs() < 1e-12);
    assert!((beta_fn(4.0, 0.5) - 32.0 / 35.0).abs() < 1e-12);
    // B(3/2, 1/2) = π/2.
    assert!((beta_fn(1.5, 0.5) - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn sixth_power_rates_match_order() {
    for alpha in [0.5, 0.9] {
        for gamma in 1..=4 {
            let o = SchemeOrder::integer(gamma).unwrap();
            let r = rate(max_error(80, o, alpha, 6.0), max_error(160, o, alpha, 6.0));
            assert!((r - gamma as f64).abs() <= 0.1, "α {alpha} γ {gamma}: {r}");
        }
    }
}

// With α = 0.1 the τ^{γ+α} term decays barely faster than τ^γ, so the rate
// approaches γ slowly from below.
#[test]
fn sixth_power_rates_for_strong_singularity_approach_order() {
    for gamma in 1..=4 {
        let o = SchemeOrder::integer(gamma).unwrap();
        let errors: Vec<f64> = [80, 160, 320, 640, 1280].iter().map(|&n| max_error(n, o, 0.1, 6.0)).collect();
        let rates: Vec<f64> = errors.windows(2).map(|w| rate(w[0], w[1])).collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]), "γ {gamma}: {rates:?}");
        assert!(rates.iter().all(|&r| r < gamma as f64 + 0.05));
        assert!((rates.last().unwrap() - gamma as f64).abs() <= 0.15, "γ {gamma}: {rates:?}");
    }
}

#[test]
fn fractional_scheme_rate() {
    for alpha in [0.05, 0.2, 0.3, 0.5, 0.7, 0.9] {
        let o = SchemeOrder::fractional(alpha).unwrap();
        let r = rate(max_error(80, o, alpha, alpha), max_error(160, o, alpha, alpha));
        let expected = (2.0 * alpha).min(1.0);
        assert!(r >= expected - 0.1 && r <= expected + 0.15, "α {alpha}: {r}");
    }
}

// ∫_a^{t_n} (t_n - s)^β s^p ds expanded through s^p = Σ C(p,i) t_n^{p-i} (-u)^i.
fn tail_integral(beta: f64, p: u32, a: f64, tn: f64) -> f64 {
    let reach = tn - a;
    let mut binom = 1.0;
    let mut total = 0.0;
    for i in 0..=p {
        let e = beta + i as f64 + 1.0;
        total += binom * tn.powi((p - i) as i32) * (-1f64).powi(i as i32) * reach.powf(e) / e;
        binom = binom * (p - i) as f64 / (i + 1) as f64;
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_the_integrand(
        alpha in 0.05f64..0.95,
        gamma in 1u32..=5,
        n in 1usize..40,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        w in 0.5f64..6.0,
    ) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let k = Kernel::power_singular(alpha).unwrap();
        let o = SchemeOrder::integer(gamma).unwrap();
        let f = move |t: f64| (w * t).sin();
        let g = |t: f64| (-t).exp();
        let qf = convolve_at_horizon(f, &mesh, &k, o, opts()).unwrap();
        let qg = convolve_at_horizon(g, &mesh, &k, o, opts()).unwrap();
        let qm = convolve_at_horizon(|t| a * f(t) + b * g(t), &mesh, &k, o, opts()).unwrap();
        prop_assert!((qm - a * qf - b * qg).abs() <= 1e-12 * (1.0 + qm.abs()));
    }

    #[test]
    fn homogeneous_in_the_kernel(
        alpha in 0.05f64..0.95,
        gamma in 1u32..=5,
        n in 1usize..40,
        c in 0.01f64..100.0,
    ) {
        let mesh = Mesh::uniform(2.0, n).unwrap();
        let k = Kernel::caputo(alpha).unwrap();
        let o = SchemeOrder::integer(gamma).unwrap();
        let f = |t: f64| 1.0 + t * t;
        let q = convolve_at_horizon(f, &mesh, &k, o, opts()).unwrap();
        let qc = convolve_at_horizon(f, &mesh, &k.clone().scaled(c), o, opts()).unwrap();
        prop_assert!((qc - c * q).abs() <= 1e-12 * c * q.abs());
    }

    #[test]
    fn exact_for_low_degree_beyond_the_ramp(
        singular in any::<bool>(),
        alpha in 0.05f64..0.95,
        gamma in 1u32..=5,
        extra in 1usize..30,
        horizon in 0.2f64..3.0,
        p_frac in 0.0f64..1.0,
    ) {
        // Intervals k >= γ-1 carry full-span stencils, exact for degree <= γ-1.
        let start = (gamma as usize).saturating_sub(1).max(1);
        let n = start + extra;
        let mesh = Mesh::uniform(horizon, n).unwrap();
        let p = ((gamma as f64) * p_frac) as u32;
        let (k, beta) = if singular {
            (Kernel::power_singular(alpha).unwrap(), alpha - 1.0)
        } else {
            (Kernel::power(alpha).unwrap(), alpha)
        };
        let table = build_table(&mesh, &k, SchemeOrder::integer(gamma).unwrap(), n, opts()).unwrap();
        let mut got = 0.0;
        for kk in start..=n {
            for (j, w) in table.raw[kk - 1].iter().enumerate() {
                got += w * mesh.node(kk - j).powi(p as i32);
            }
        }
        let want = tail_integral(beta, p, mesh.node(start - 1), mesh.horizon());
        prop_assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "p {}: {} vs {}", p, got, want);
    }

    #[test]
    fn linear_functions_are_exact_everywhere(
        alpha in 0.05f64..0.95,
        gamma in 2u32..=5,
        n in 1usize..50,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let mesh = Mesh::uniform(1.0, n).unwrap();
        let k = Kernel::power_singular(alpha).unwrap();
        let table = build_table(&mesh, &k, SchemeOrder::integer(gamma).unwrap(), n, opts()).unwrap();
        let samples: Vec<f64> = mesh.nodes().iter().map(|t| a + b * t).collect();
        let got = convolve(&samples, &table).unwrap();
        let want = a * tail_integral(alpha - 1.0, 0, 0.0, 1.0) + b * tail_integral(alpha - 1.0, 1, 0.0, 1.0);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }
}
