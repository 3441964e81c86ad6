//! Reduced modulation equations for the focusing factor `L(t)`.
//!
//! Every model has the form `L_tt = -beta(L) / L^3`. For the expansion orders
//! `beta` is an explicit polynomial in `x = (alpha/L)^2`; in exact mode it
//! comes from the nonlocal functional `f1`; for the unperturbed system it is a
//! state variable drained by the radiation loss `e^{-pi/sqrt(beta)}/L^2`.

mod integrate;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::ModulationConstants;
use crate::helmholtz::F1Evaluator;

pub use integrate::{
    integrate, integrate_partial, Event, Extremum, ExtremumKind, OutcomeSummary, Sample, SimulationOutcome, StepControl,
};

/// Loss term is switched off below this `beta`.
pub const BETA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Unperturbed,
    O1,
    O2,
    O3,
    Exact,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Unperturbed => "unperturbed",
            Order::O1 => "o1",
            Order::O2 => "o2",
            Order::O3 => "o3",
            Order::Exact => "exact",
        })
    }
}

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "unperturbed" | "o0" | "0" => Ok(Order::Unperturbed),
            "o1" | "1" => Ok(Order::O1),
            "o2" | "2" => Ok(Order::O2),
            "o3" | "3" => Ok(Order::O3),
            "exact" => Ok(Order::Exact),
            other => Err(format!("unknown order '{other}' (expected unperturbed, o1, o2, o3 or exact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "dL")]
    pub dl: f64,
    pub beta: f64,
    pub tau: f64,
}

impl ReducedState {
    pub fn new(l: f64, dl: f64, beta: f64) -> Self {
        Self { t: 0.0, l, dl, beta, tau: 0.0 }
    }
}

/// Time derivative of a [`ReducedState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub dl: f64,
    pub ddl: f64,
    pub dbeta: f64,
    pub dtau: f64,
}

#[derive(Clone)]
pub struct ModelSpec {
    pub order: Order,
    pub alpha: f64,
    pub beta0: f64,
    pub constants: ModulationConstants,
    pub loss_term: bool,
    /// Needed for [`Order::Exact`].
    pub f1: Option<Arc<F1Evaluator>>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("order", &self.order)
            .field("alpha", &self.alpha)
            .field("beta0", &self.beta0)
            .field("loss_term", &self.loss_term)
            .field("f1", &self.f1.is_some())
            .finish()
    }
}

impl ModelSpec {
    pub fn new(order: Order, alpha: f64, beta0: f64, constants: ModulationConstants) -> Self {
        Self { order, alpha, beta0, constants, loss_term: false, f1: None }
    }

    pub fn with_f1(mut self, f1: Arc<F1Evaluator>) -> Self {
        self.f1 = Some(f1);
        self
    }

    pub fn with_loss(mut self, on: bool) -> Self {
        self.loss_term = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !self.beta0.is_finite() {
            return Err(Error::Domain(format!("beta0 must be finite, got {}", self.beta0)));
        }
        if self.order == Order::Exact && self.f1.is_none() {
            return Err(Error::Domain("exact order needs an f1 evaluator".into()));
        }
        Ok(())
    }

    fn coeffs(&self) -> (f64, f64, f64) {
        let m2 = 2.0 * self.constants.m;
        (self.constants.c1.value() / m2, self.constants.c2.value() / m2, self.constants.c3.value() / m2)
    }
}

/// Right-hand side `beta(L)` of `-L^3 L_tt = beta`.
pub fn beta_of(state: &ReducedState, spec: &ModelSpec) -> Result<f64> {
    let l = state.l;
    if !(l > 0.0) {
        return Err(Error::Domain(format!("L must be positive, got {l}")));
    }
    let x = (spec.alpha / l).powi(2);
    let (a1, a2, a3) = spec.coeffs();
    Ok(match spec.order {
        Order::Unperturbed => state.beta,
        Order::O1 => spec.beta0 - a1 * x,
        Order::O2 => spec.beta0 - a1 * x + a2 * x * x,
        Order::O3 => spec.beta0 - a1 * x + a2 * x * x - a3 * x * x * x,
        Order::Exact => {
            if spec.alpha == 0.0 {
                spec.beta0
            } else {
                let f1 = spec.f1.as_ref().ok_or_else(|| Error::Domain("exact order needs an f1 evaluator".into()))?;
                spec.beta0 + spec.alpha * spec.alpha / (2.0 * spec.constants.m) * f1.f1(l, spec.alpha)?
            }
        }
    })
}

pub fn rhs(state: &ReducedState, spec: &ModelSpec) -> Result<StateRate> {
    let beta = beta_of(state, spec)?;
    let l = state.l;
    let l2 = l * l;
    let dbeta = if spec.order == Order::Unperturbed && spec.loss_term && state.beta > BETA_FLOOR {
        -(-std::f64::consts::PI / state.beta.sqrt()).exp() / l2
    } else {
        0.0
    };
    Ok(StateRate { dl: state.dl, ddl: -beta / (l2 * l), dbeta, dtau: 1.0 / l2 })
}

/// `beta0 = beta(0) + (alpha^2 C1 / 2M) / L(0)^2` for the first-order model.
pub fn beta0_from_initial_beta(beta_at_zero: f64, alpha: f64, l0: f64, c: &ModulationConstants) -> f64 {
    beta_at_zero + alpha * alpha * c.c1.value() / (2.0 * c.m) / (l0 * l0)
}

/// Constant of the closed `y = L^2` equation, fixed by the initial data:
/// `4 D0` for o1, `E0` for o2, `F0` for o3.
pub fn energy_constant(init: &ReducedState, spec: &ModelSpec) -> Result<f64> {
    let y = init.l * init.l;
    let yt = 2.0 * init.l * init.dl;
    Ok((yt * yt - potential(y, spec)?) / y)
}

/// Part of `(y_t)^2` that does not multiply the energy constant.
fn potential(y: f64, spec: &ModelSpec) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y = L^2 must be positive, got {y}")));
    }
    let m = spec.constants.m;
    let a2 = spec.alpha * spec.alpha;
    let c1 = spec.constants.c1.value();
    let c2 = spec.constants.c2.value();
    let c3 = spec.constants.c3.value();
    let base = 4.0 * spec.beta0 - a2 * c1 / (m * y);
    match spec.order {
        Order::O1 => Ok(base),
        Order::O2 => Ok(base + 2.0 / 3.0 * a2 * a2 * c2 / (m * y * y)),
        Order::O3 => Ok(base + 2.0 / 3.0 * a2 * a2 * c2 / (m * y * y) - a2 * a2 * a2 * c3 / (2.0 * m * y * y * y)),
        other => Err(Error::UnsupportedOrder(other.to_string())),
    }
}

/// Right side of the closed `y` equation, `(y_t)^2` as a function of `y`,
/// for energy constant `k`.
pub fn y_rate_squared(y: f64, spec: &ModelSpec, k: f64) -> Result<f64> {
    Ok(potential(y, spec)? + k * y)
}

/// `(y_t)^2` minus the right side of the closed `y` equation.
pub fn first_integral(state: &ReducedState, spec: &ModelSpec, init: &ReducedState) -> Result<f64> {
    // k y = e0 (y / y0) keeps the value at `init` exactly zero
    let y0 = init.l * init.l;
    let yt0 = 2.0 * init.l * init.dl;
    let e0 = yt0 * yt0 - potential(y0, spec)?;
    let y = state.l * state.l;
    let yt = 2.0 * state.l * state.dl;
    Ok(yt * yt - potential(y, spec)? - e0 * (y / y0))
}

pub(crate) fn first_integral_with(state: &ReducedState, spec: &ModelSpec, k: f64) -> Result<f64> {
    let y = state.l * state.l;
    let yt = 2.0 * state.l * state.dl;
    Ok(yt * yt - potential(y, spec)? - k * y)
}

/// Residual scaled by `max(1, y_t^2)`.
pub fn relative_first_integral(state: &ReducedState, spec: &ModelSpec, k: f64) -> Result<f64> {
    let yt = 2.0 * state.l * state.dl;
    Ok(first_integral_with(state, spec, k)?.abs() / (yt * yt).max(1.0))
}
