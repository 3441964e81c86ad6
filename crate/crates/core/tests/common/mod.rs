#![allow(dead_code)]

use std::sync::OnceLock;

use shmod::functionals::{compute_all, IdentityBounds, ModulationConstants};
use shmod::soliton::{solve_townes, SolitonConfig, SolitonProfile};

pub struct Fixture {
    pub profile: SolitonProfile,
    pub constants: ModulationConstants,
}

/// Default-resolution profile and constants, solved once per test binary.
pub fn townes() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let profile = solve_townes(&SolitonConfig::default()).expect("townes solve");
        let constants = compute_all(&profile, &IdentityBounds::default()).expect("constants");
        Fixture { profile, constants }
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
