mod common;

use common::{rel, townes};
use proptest::prelude::*;
use shmod::helmholtz::*;
use shmod::soliton::{SolitonConfig, SolitonProfile};
use shmod::Error;

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn zero_source() {
    let p = SolitonProfile::trivial(&SolitonConfig::default()).unwrap();
    let s = solve_radial_helmholtz(&p, 0.05).unwrap();
    assert!(s.w.iter().all(|&w| w == 0.0));
    assert_eq!(f1_kernel_crosscheck(&p, 1.0, 0.01, 8).unwrap(), 0.0);
}

#[test]
fn eps_must_be_positive() {
    let p = &townes().profile;
    for eps in [0.0, -0.1, f64::NAN] {
        assert!(matches!(solve_radial_helmholtz(p, eps), Err(Error::EpsOutOfRange(_))), "{eps}");
    }
}

#[test]
fn small_eps_is_first_order() {
    let p = &townes().profile;
    let lap_sup = sup((0..p.len()).map(|i| p.laplacian_of_r2(i).unwrap()));
    let mut previous = f64::INFINITY;
    for eps in [0.04, 0.02, 0.01] {
        let s = solve_radial_helmholtz(p, eps).unwrap();
        assert!(s.solver_residual < 1e-8);
        assert!(s.w.iter().all(|&w| w > 0.0));
        let dev = sup(s.w.iter().zip(&p.values).map(|(w, v)| w - v * v));
        let ratio = dev / lap_sup / (eps * eps);
        assert!((0.8..1.2).contains(&ratio), "eps {eps}: {ratio}");
        assert!(dev < previous);
        previous = dev;
    }
}

#[test]
fn leading_order_dominates() {
    let fx = townes();
    let e = f1_exact(&fx.profile, &fx.constants, 1.0, 0.01).unwrap();
    assert!((0.99..=1.01).contains(&(e.f1_exact / e.f1_order1)));
    assert!(e.f1_exact < 0.0);
    assert!(!e.outside_expansion);
    let e = f1_exact(&fx.profile, &fx.constants, 10.0, 0.01).unwrap();
    assert!((e.f1_exact - e.f1_order3).abs() / (e.f1_order3 - e.f1_order2).abs() < 0.1);
    assert!(f1_exact(&fx.profile, &fx.constants, 0.5, 0.1).unwrap().outside_expansion);
}

#[test]
fn richardson_slopes() {
    let fx = townes();
    let c = fx.constants;
    let (l, alpha) = (10.0, 0.01);
    let e = f1_exact(&fx.profile, &c, l, alpha).unwrap();
    let s2 = (e.f1_exact - e.f1_order1) * l.powi(4) / alpha.powi(2);
    let s3 = (e.f1_exact - e.f1_order2) * l.powi(6) / alpha.powi(4);
    assert!(rel(s2, c.c2.value()) < 0.02, "{s2}");
    assert!(rel(-s3, c.c3.value()) < 0.05, "{s3}");
}

#[test]
fn truncations_improve() {
    let fx = townes();
    for eps in [1e-3, 5e-3, 1e-2, 5e-2] {
        let e = f1_exact(&fx.profile, &fx.constants, 1.0, eps).unwrap();
        let [e1, e2, e3] = e.rel_errors();
        assert!(e3 < e2 && e2 < e1, "eps {eps}: {e1} {e2} {e3}");
    }
}

#[test]
fn kernel_form_agrees() {
    let fx = townes();
    let exact = f1_exact(&fx.profile, &fx.constants, 1.0, 0.01).unwrap().f1_exact;
    let k = f1_kernel_crosscheck(&fx.profile, 1.0, 0.01, KERNEL_NQUAD_DEFAULT).unwrap();
    assert!(rel(k, exact) < 0.01, "{k} vs {exact}");
    let errs: Vec<f64> = [12, 16, 24, 32, 48]
        .iter()
        .map(|&n| rel(f1_kernel_crosscheck(&fx.profile, 1.0, 0.01, n).unwrap(), exact))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn kernel_budget() {
    let p = &townes().profile;
    for n in [0, 3, 100_000] {
        assert!(matches!(f1_kernel_crosscheck(p, 1.0, 0.01, n), Err(Error::QuadratureBudgetExceeded(_))), "{n}");
    }
}

#[test]
fn f2_vanishes_identically() {
    let p = &townes().profile;
    for (l, alpha, phase) in [(1.0, 0.01, 0.0), (0.3, 0.02, -0.7), (2.0, 0.05, 3.1)] {
        let sol = solve_radial_helmholtz(p, alpha / l).unwrap();
        let integrand = f2_integrand(p, &sol, l, alpha, phase).unwrap();
        assert_eq!(integrand.len(), p.len());
        assert!(integrand.iter().all(|z| z.im == 0.0));
        assert!(integrand.iter().any(|z| z.re != 0.0));
        assert_eq!(f2_value(&integrand, p.grid_step), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f1_scaling(l in 0.2f64..20.0, lambda in 0.1f64..10.0) {
        let fx = townes();
        let alpha = 0.01;
        let a = f1_exact(&fx.profile, &fx.constants, l, alpha).unwrap();
        let b = f1_exact(&fx.profile, &fx.constants, lambda * l, lambda * alpha).unwrap();
        prop_assert!(rel(b.f1_exact * lambda * lambda, a.f1_exact) < 1e-12);
    }

    #[test]
    fn green_positivity_and_linearity(
        c1 in 0.0f64..6.0, w1 in 0.2f64..2.0,
        c2 in 0.0f64..6.0, w2 in 0.2f64..2.0,
        a in 0.0f64..3.0, eps in 0.05f64..1.0,
    ) {
        let h = 0.01;
        let r: Vec<f64> = (0..1001).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = r.iter().map(|x| (-((x - c1) / w1).powi(2)).exp()).collect();
        let g: Vec<f64> = r.iter().map(|x| (-((x - c2) / w2).powi(2)).exp()).collect();
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
        let sf = solve_screened(&f, h, eps).unwrap();
        let sg = solve_screened(&g, h, eps).unwrap();
        let sm = solve_screened(&mix, h, eps).unwrap();
        prop_assert!(sm.w.iter().all(|&w| w > 0.0));
        let scale = sup(sm.w.iter().copied());
        for i in 0..r.len() {
            prop_assert!((sm.w[i] - (a * sf.w[i] + sg.w[i])).abs() <= 1e-12 * scale);
        }
    }
}
