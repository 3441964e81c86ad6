mod common;

use common::townes;
use shmod::dynamics::{integrate, Event};
use shmod::figures::{FigureRecipe, FIGURE_NAMES};
use shmod::regime::{observed, Prediction};
use shmod::Error;

#[test]
fn every_recipe_reaches_its_caption() {
    let c = townes().constants;
    for r in FigureRecipe::all(&c).unwrap() {
        let out = integrate(&r.initial_state(), &r.spec(), &r.step_control()).unwrap();
        assert_eq!(observed(&out), r.expected, "{}: {:?}", r.name, out.event);
        if let Event::Collapse { t_c, .. } = out.event {
            assert!(t_c.is_finite() && t_c < r.t_max);
        }
        if !out.event.is_collapse() {
            assert!(out.first_integral_drift.unwrap() < 1e-8, "{}", r.name);
        }
    }
}

#[test]
fn recipe_metadata() {
    let c = townes().constants;
    let all = FigureRecipe::all(&c).unwrap();
    assert_eq!(all.len(), FIGURE_NAMES.len());
    for r in &all {
        assert_eq!(r.constants, c);
        assert_eq!(r.valid_regime, r.name != "fig2", "{}", r.name);
    }
    let fig2 = &all[3];
    assert_eq!(fig2.expected, Prediction::Collapse);
    assert!(fig2.beta0 > c.beta_critical_o2());
    assert!(matches!(FigureRecipe::resolve("fig9", &c), Err(Error::Domain(_))));
}
