mod common;

use common::{rel, townes};
use proptest::prelude::*;
use shmod::functionals::*;
use shmod::soliton::{solve_townes, SolitonConfig, SolitonProfile};
use shmod::Error;

/// Trapezoid rule over every other grid node.
fn trapezoid_half(p: &SolitonProfile, f: impl Fn(usize) -> f64) -> f64 {
    let idx: Vec<usize> = (0..p.len()).step_by(2).collect();
    let h = 2.0 * p.grid_step;
    let inner: f64 = idx[1..idx.len() - 1].iter().map(|&i| f(i)).sum();
    h * (inner + 0.5 * (f(idx[0]) + f(*idx.last().unwrap())))
}

fn constants_at(grid_step: f64) -> ModulationConstants {
    let p = solve_townes(&SolitonConfig { grid_step, ..Default::default() }).unwrap();
    compute_all(&p, &IdentityBounds::default()).unwrap()
}

#[test]
fn half_resolution_trapezoid_oracle() {
    let fx = townes();
    let p = &fx.profile;
    let c = &fx.constants;
    let u = |i: usize| p.values[i];
    let nc = trapezoid_half(p, |i| u(i).powi(2) * p.r[i]);
    let m = trapezoid_half(p, |i| 0.25 * u(i).powi(2) * p.r[i].powi(3));
    let p4 = trapezoid_half(p, |i| u(i).powi(4) * p.r[i]);
    let grad = trapezoid_half(p, |i| p.slopes[i].powi(2) * p.r[i]);
    let c1 = trapezoid_half(p, |i| 2.0 * (2.0 * u(i) * p.slopes[i]).powi(2) * p.r[i]);
    for (name, ours, oracle) in
        [("Nc", c.nc, nc), ("M", c.m, m), ("P4", c.p4, p4), ("grad", c.grad_norm, grad), ("C1", c.c1.value(), c1)]
    {
        assert!(rel(ours, oracle) < 1e-4, "{name}: {ours} vs {oracle}");
    }
    assert!((1.86..1.865).contains(&c.nc));
}

#[test]
fn nc_is_the_planar_integral() {
    // (1/2pi) of the 2D integral of R^2 on a Cartesian grid
    let p = &townes().profile;
    let d = 0.02;
    let n = (12.0 / d) as i64;
    let mut total = 0.0;
    for a in -n..=n {
        for b in -n..=n {
            let r = ((a * a + b * b) as f64).sqrt() * d;
            let (v, _) = p.interpolate(r);
            total += v * v;
        }
    }
    let planar = total * d * d / (2.0 * std::f64::consts::PI);
    assert!(rel(planar, compute_nc(p)) < 1e-6, "{planar}");
}

#[test]
fn m_near_055() {
    let c = &townes().constants;
    assert!((0.54..=0.56).contains(&c.m), "M = {}", c.m);
}

#[test]
fn constants_converge_under_refinement() {
    let coarse = townes().constants;
    let fine = constants_at(5e-4);
    assert!((fine.m - coarse.m).abs() < 1e-8);
    let pairs = [
        ("Nc", coarse.nc, fine.nc),
        ("M", coarse.m, fine.m),
        ("P4", coarse.p4, fine.p4),
        ("grad", coarse.grad_norm, fine.grad_norm),
        ("C1", coarse.c1.value(), fine.c1.value()),
        ("C2", coarse.c2.value(), fine.c2.value()),
        ("C3", coarse.c3.value(), fine.c3.value()),
    ];
    for (name, a, b) in pairs {
        assert!(rel(a, b) < 1e-7, "{name}: {a} vs {b}");
    }
}

#[test]
fn dual_forms_agree_and_converge() {
    let bounds = IdentityBounds::default();
    let c = townes().constants;
    assert!(c.c1.rel_discrepancy < bounds.c1);
    assert!(c.c2.rel_discrepancy < bounds.c2);
    assert!(c.c3.rel_discrepancy < bounds.c3);
    let coarse = constants_at(2e-3);
    for (name, a, b) in [("C1", coarse.c1, c.c1), ("C2", coarse.c2, c.c2), ("C3", coarse.c3, c.c3)] {
        let order = (a.rel_discrepancy / b.rel_discrepancy).log2();
        assert!(order >= 2.0, "{name}: observed order {order}");
    }
}

#[test]
fn signs() {
    let c = townes().constants;
    for v in [
        c.nc,
        c.m,
        c.p4,
        c.c1.value_direct,
        c.c1.value_ibp,
        c.c2.value_direct,
        c.c2.value_ibp,
        c.c3.value_direct,
        c.c3.value_ibp,
    ] {
        assert!(v > 0.0);
    }
}

#[test]
fn pohozaev() {
    let c = townes().constants;
    let res = c.pohozaev_residuals();
    assert!(res.p4 < 1e-6 && res.grad < 1e-6, "{res:?}");
    assert!(rel(c.p4, 2.0 * c.nc) < 1e-6);
    assert!(rel(c.grad_norm, c.nc) < 1e-6);
}

#[test]
fn zero_profile() {
    let p = SolitonProfile::trivial(&SolitonConfig::default()).unwrap();
    assert_eq!(compute_nc(&p), 0.0);
    assert_eq!(compute_m(&p), 0.0);
    let c = compute_all(&p, &IdentityBounds::default()).unwrap();
    for d in [c.c1, c.c2, c.c3] {
        assert_eq!((d.value_direct, d.value_ibp, d.rel_discrepancy), (0.0, 0.0, 0.0));
    }
    assert_eq!((c.nc, c.m, c.p4, c.grad_norm), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn violation_is_reported() {
    let p = &townes().profile;
    let tight = IdentityBounds { c2: 1e-30, ..Default::default() };
    match compute_c2(p, &tight) {
        Err(Error::IdentityViolation { name, .. }) => assert_eq!(name, "C2"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(compute_all(p, &tight), Err(Error::IdentityViolation { name: "C2", .. })));
}

#[test]
fn report_keys() {
    let v = serde_json::to_value(townes().constants).unwrap();
    for key in ["Nc", "M", "P4", "C1", "C2", "C3", "grad_norm"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["direct", "ibp", "disc"] {
        assert!(v["C3"].get(key).is_some(), "{key}");
    }
}

proptest! {
    #[test]
    fn discrepancy_definition(a in 1e-3f64..1e4, b in 1e-3f64..1e4) {
        let d = DualConstant::new(a, b);
        prop_assert_eq!(d.rel_discrepancy, (a - b).abs() / b.abs().max(1e-300));
        prop_assert_eq!(d.value(), a);
        prop_assert_eq!(DualConstant::new(a, a).rel_discrepancy, 0.0);
    }

    #[test]
    fn functionals_scale_with_amplitude(s in 0.1f64..3.0) {
        // scaling R (not a soliton any more) scales the quadratic functionals by s^2
        let base = &townes().profile;
        let mut p = base.clone();
        p.values.iter_mut().for_each(|v| *v *= s);
        p.slopes.iter_mut().for_each(|v| *v *= s);
        prop_assert!(rel(compute_m(&p), s * s * compute_m(base)) < 1e-12);
        prop_assert!(rel(compute_nc(&p), s * s * compute_nc(base)) < 1e-12);
        prop_assert!(rel(compute_p4(&p), s.powi(4) * compute_p4(base)) < 1e-12);
    }
}
