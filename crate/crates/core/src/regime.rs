//! Classification of reduced trajectories from the initial data.
//!
//! Each expansion order has a closed equation `y_t^2 = Q(y)` for `y = L^2`.
//! Turning points are the positive roots of `Q`, so the fate of a trajectory
//! can be read off from where those roots sit relative to `y(0)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    energy_constant, integrate, rhs, y_rate_squared, Event, ExtremumKind, ModelSpec, Order, ReducedState,
    SimulationOutcome, StepControl,
};
use crate::error::{Error, Result};

/// Proxy for `|beta0| << 1`.
pub const BETA_SMALL: f64 = 0.1;
/// Proxy for `alpha / L(0) << 1`.
pub const EPS_SMALL: f64 = 0.1;
/// Final bracket width of [`threshold_bisect`].
pub const THRESHOLD_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prediction {
    MonotoneDefocus,
    ArrestThenDefocus,
    Oscillation,
    Collapse,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityFlags {
    pub beta_small: bool,
    pub eps_small: bool,
}

/// Position of `alpha / L(0)` relative to the second-order roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    BelowLow,
    Between,
    AboveHigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub order: Order,
    #[serde(rename = "H0")]
    pub h0: f64,
    /// `D0`, `E0` or `F0` depending on the order.
    pub integration_constant: f64,
    pub y_m: Option<f64>,
    #[serde(rename = "y_M")]
    pub y_max: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub r_low: Option<f64>,
    pub r_high: Option<f64>,
    pub band: Option<Band>,
    pub predicted: Prediction,
    pub validity: ValidityFlags,
    pub note: Option<String>,
}

pub fn check_validity(init: &ReducedState, spec: &ModelSpec) -> ValidityFlags {
    ValidityFlags { beta_small: spec.beta0.abs() < BETA_SMALL, eps_small: spec.alpha / init.l < EPS_SMALL }
}

fn require(spec: &ModelSpec, order: Order) -> Result<()> {
    spec.validate()?;
    if spec.order != order {
        return Err(Error::UnsupportedOrder(format!("expected {order}, got {}", spec.order)));
    }
    Ok(())
}

/// Collapse verdict for `L_tt = -beta0 / L^3`, where `y` is exactly quadratic
/// in time.
fn classify_unperturbed(init: &ReducedState, beta0: f64) -> Prediction {
    let y0 = init.l * init.l;
    let yt = 2.0 * init.l * init.dl;
    let d0 = (yt * yt - 4.0 * beta0) / (4.0 * y0);
    if d0 < 0.0 {
        Prediction::Collapse
    } else if yt < 0.0 {
        if beta0 >= 0.0 {
            Prediction::Collapse
        } else {
            Prediction::ArrestThenDefocus
        }
    } else if yt == 0.0 && beta0 > 0.0 {
        Prediction::Collapse
    } else {
        Prediction::MonotoneDefocus
    }
}

pub fn classify_o1(init: &ReducedState, spec: &ModelSpec) -> Result<RegimeReport> {
    require(spec, Order::O1)?;
    let c = &spec.constants;
    let k4 = energy_constant(init, spec)?;
    let d0 = k4 / 4.0;
    let h0 = c.m * d0;
    let mut report = RegimeReport {
        order: Order::O1,
        h0,
        integration_constant: d0,
        y_m: None,
        y_max: None,
        k: None,
        r_low: None,
        r_high: None,
        band: None,
        predicted: Prediction::Indeterminate,
        validity: check_validity(init, spec),
        note: None,
    };
    if spec.alpha == 0.0 {
        report.predicted = classify_unperturbed(init, spec.beta0);
        return Ok(report);
    }
    if h0.abs() < 1e-14 {
        return Err(Error::DegenerateData(format!("H0 = {h0:e} is zero to working precision")));
    }
    let b = spec.beta0;
    let a2c1 = spec.alpha * spec.alpha * c.c1.value();
    let disc = (b * b + a2c1 * h0 / (c.m * c.m)).max(0.0).sqrt();
    // the smaller root in the rationalised form avoids cancellation
    report.y_m = Some(a2c1 / (2.0 * c.m) / (disc + b));
    if h0 > 0.0 {
        report.predicted = if init.dl > 0.0 { Prediction::MonotoneDefocus } else { Prediction::ArrestThenDefocus };
    } else {
        report.y_max = Some((disc + b) / (-2.0 * h0 / c.m));
        report.predicted = Prediction::Oscillation;
    }
    Ok(report)
}

/// `C1^2/(8 M C2) - beta0` and, when positive, the roots `r_low < r_high` of
/// the second-order `beta` as a function of `alpha / L`.
pub fn second_order_roots(spec: &ModelSpec) -> (f64, Option<(f64, f64)>) {
    let c = &spec.constants;
    let (c1, c2, m) = (c.c1.value(), c.c2.value(), c.m);
    let k = c1 * c1 / (8.0 * m * c2) - spec.beta0;
    if k <= 0.0 {
        return (k, None);
    }
    let s = (8.0 * m * c2 * k).sqrt();
    // r_low^2 via the product of roots, free of cancellation
    let hi2 = (c1 + s) / (2.0 * c2);
    let lo2 = 2.0 * m * spec.beta0 / (c2 * hi2);
    (k, Some((lo2.sqrt(), hi2.sqrt())))
}

pub fn classify_o2(init: &ReducedState, spec: &ModelSpec) -> Result<RegimeReport> {
    require(spec, Order::O2)?;
    let e0 = energy_constant(init, spec)?;
    let (k, roots) = second_order_roots(spec);
    let eps = spec.alpha / init.l;
    let mut report = RegimeReport {
        order: Order::O2,
        h0: spec.constants.m * e0 / 4.0,
        integration_constant: e0,
        y_m: None,
        y_max: None,
        k: Some(k),
        r_low: roots.map(|r| r.0),
        r_high: roots.map(|r| r.1),
        band: None,
        predicted: Prediction::Indeterminate,
        validity: check_validity(init, spec),
        note: None,
    };
    match roots {
        None => {
            // beta > 0 for every L: no repulsion anywhere
            report.predicted =
                if init.dl < 0.0 || e0 < 0.0 { Prediction::Collapse } else { Prediction::MonotoneDefocus };
        }
        Some((lo, hi)) => {
            let band = if eps < lo {
                Band::BelowLow
            } else if eps <= hi {
                Band::Between
            } else {
                Band::AboveHigh
            };
            report.band = Some(band);
            if band == Band::AboveHigh && init.dl < 0.0 {
                report.predicted = Prediction::Collapse;
                report.note = Some("alpha/L(0) above r_high: outside the expansion regime".into());
            } else {
                report.note = Some("outcome depends on dL(0); locate the threshold with threshold_bisect".into());
            }
        }
    }
    Ok(report)
}

/// Nearest roots of `Q(y)` below and above `y0` found by a geometric scan.
fn turning_points(spec: &ModelSpec, k: f64, y0: f64) -> Result<(Option<f64>, Option<f64>)> {
    let q = |y: f64| y_rate_squared(y, spec, k);
    let refine = |mut a: f64, mut b: f64| -> Result<f64> {
        let qa = q(a)?;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a.min(b) || mid >= a.max(b) {
                break;
            }
            if (q(mid)? > 0.0) == (qa > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    let ratio = 1.0 + 1e-3;
    let mut below = None;
    let mut y = y0;
    while y > 1e-14 * y0 {
        let next = y / ratio;
        if q(next)? < 0.0 {
            below = Some(refine(y, next)?);
            break;
        }
        y = next;
    }
    let mut above = None;
    let mut y = y0;
    while y < 1e14 * y0 {
        let next = y * ratio;
        if q(next)? < 0.0 {
            above = Some(refine(y, next)?);
            break;
        }
        y = next;
    }
    Ok((below, above))
}

pub fn classify_o3(init: &ReducedState, spec: &ModelSpec) -> Result<RegimeReport> {
    require(spec, Order::O3)?;
    let f0 = energy_constant(init, spec)?;
    let h0 = spec.constants.m * f0 / 4.0;
    let mut report = RegimeReport {
        order: Order::O3,
        h0,
        integration_constant: f0,
        y_m: None,
        y_max: None,
        k: None,
        r_low: None,
        r_high: None,
        band: None,
        predicted: Prediction::Indeterminate,
        validity: check_validity(init, spec),
        note: None,
    };
    if spec.alpha == 0.0 {
        report.predicted = classify_unperturbed(init, spec.beta0);
        return Ok(report);
    }
    let y0 = init.l * init.l;
    let ddl = rhs(init, spec)?.ddl;
    let (below, above) = turning_points(spec, f0, y0)?;
    let at_min = init.dl == 0.0 && ddl > 0.0;
    let at_max = init.dl == 0.0 && ddl < 0.0;
    report.y_m = if at_min { Some(y0) } else { below };
    report.y_max = if at_max { Some(y0) } else { above };
    report.predicted = match (report.y_m, report.y_max) {
        (Some(_), Some(_)) => Prediction::Oscillation,
        (Some(_), None) if init.dl > 0.0 => Prediction::MonotoneDefocus,
        (Some(_), None) => Prediction::ArrestThenDefocus,
        _ => Prediction::Indeterminate,
    };
    Ok(report)
}

/// Dispatches on the model order.
pub fn classify(init: &ReducedState, spec: &ModelSpec) -> Result<RegimeReport> {
    match spec.order {
        Order::O1 => classify_o1(init, spec),
        Order::O2 => classify_o2(init, spec),
        Order::O3 => classify_o3(init, spec),
        other => Err(Error::UnsupportedOrder(other.to_string())),
    }
}

/// Label implied by a simulated outcome. A run that reaches the horizon
/// moving outward counts as defocusing, with or without an earlier minimum.
pub fn observed(outcome: &SimulationOutcome) -> Prediction {
    match outcome.event {
        Event::Collapse { .. } => Prediction::Collapse,
        Event::Arrest { .. } => Prediction::ArrestThenDefocus,
        Event::Defocus { .. } => Prediction::MonotoneDefocus,
        Event::Oscillation { .. } => Prediction::Oscillation,
        Event::HorizonReached { .. } => {
            let maxima = outcome.extrema.iter().filter(|e| e.kind == ExtremumKind::Max).count();
            let minima = outcome.extrema.len() - maxima;
            if outcome.final_state().dl <= 0.0 || maxima > 0 {
                Prediction::Indeterminate
            } else if minima == 0 {
                Prediction::MonotoneDefocus
            } else {
                Prediction::ArrestThenDefocus
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    #[serde(rename = "L_t_c")]
    pub l_t_c: f64,
    /// Final bracket: collapse at the first entry, none at the second.
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub t_max_used: f64,
}

fn collapses(init: &ReducedState, spec: &ModelSpec, ctrl: &StepControl) -> Result<bool> {
    Ok(integrate(init, spec, ctrl)?.event.is_collapse())
}

/// Bisects `dL(0)` between a collapsing and a non-collapsing initial slope.
pub fn threshold_bisect(template: &ReducedState, spec: &ModelSpec, bracket: (f64, f64)) -> Result<ThresholdResult> {
    let ctrl = StepControl { stop_on_oscillation: true, record: false, ..StepControl::for_initial(template.l) };
    threshold_bisect_with(template, spec, bracket, &ctrl)
}

pub fn threshold_bisect_with(
    template: &ReducedState,
    spec: &ModelSpec,
    bracket: (f64, f64),
    ctrl: &StepControl,
) -> Result<ThresholdResult> {
    let with_slope = |dl: f64| ReducedState { dl, ..*template };
    let (a, b) = bracket;
    let ca = collapses(&with_slope(a), spec, ctrl)?;
    let cb = collapses(&with_slope(b), spec, ctrl)?;
    if ca == cb {
        return Err(Error::Bracket { lo: a, hi: b });
    }
    let (mut lo, mut hi) = if ca { (a, b) } else { (b, a) };
    let mut iterations = 0;
    while (hi - lo).abs() > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        if collapses(&with_slope(mid), spec, ctrl)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult { l_t_c: 0.5 * (lo + hi), bracket: (lo, hi), iterations, t_max_used: ctrl.t_max })
}
