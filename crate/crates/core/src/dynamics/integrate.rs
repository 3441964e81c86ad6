//! Dormand-Prince 5(4) with PI step control and event location.

use serde::{Deserialize, Serialize};

use super::{beta_of, energy_constant, relative_first_integral, rhs, ModelSpec, Order, ReducedState};
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Bisection iterations used to place events inside an accepted step.
const REFINE_ITERS: usize = 30;
/// Relative agreement required between successive extrema of one kind.
const EXTREMA_TOL: f64 = 1e-3;

type Vec4 = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to `1e-4 L(0)`.
    pub l_collapse: Option<f64>,
    /// Defaults to `1e3 L(0)`.
    pub l_escape: Option<f64>,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    /// `h_min = h_min_factor * t_max`.
    pub h_min_factor: f64,
    pub max_steps: usize,
    /// Stop as soon as a consistent oscillation has been seen.
    pub stop_on_oscillation: bool,
    /// Keep every accepted step in the series; otherwise only the endpoints.
    pub record: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            t_max: 1e3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            l_collapse: None,
            l_escape: None,
            h_init: None,
            h_max: None,
            h_min_factor: 1e-14,
            max_steps: 20_000_000,
            stop_on_oscillation: false,
            record: true,
        }
    }
}

impl StepControl {
    /// Horizon `1e3 L(0)^2` with default thresholds.
    pub fn for_initial(l0: f64) -> Self {
        Self { t_max: 1e3 * l0 * l0, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(flatten)]
    pub state: ReducedState,
    pub first_integral_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// `certified` marks a collapse declared when the step size ran out
    /// while `L` was still accelerating towards zero.
    Collapse {
        t_c: f64,
        l_final: f64,
        certified: bool,
    },
    Arrest {
        l_min: f64,
        t_min: f64,
        t_escape: f64,
    },
    Defocus {
        t_escape: f64,
    },
    Oscillation {
        l_min: f64,
        l_max: f64,
        period: f64,
    },
    HorizonReached {
        t: f64,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Collapse { .. } => "collapse",
            Event::Arrest { .. } => "arrest",
            Event::Defocus { .. } => "defocus",
            Event::Oscillation { .. } => "oscillation",
            Event::HorizonReached { .. } => "horizon_reached",
        }
    }

    pub fn is_collapse(&self) -> bool {
        matches!(self, Event::Collapse { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub series: Vec<Sample>,
    pub event: Event,
    pub extrema: Vec<Extremum>,
    /// Largest scaled first-integral residual outside the collapse layer;
    /// absent for models without a closed first integral.
    pub first_integral_drift: Option<f64>,
    pub l_min: f64,
    pub l_max: f64,
    pub steps_taken: usize,
    pub steps_rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub event: String,
    pub t_event: Option<f64>,
    #[serde(rename = "L_min")]
    pub l_min: f64,
    #[serde(rename = "L_max")]
    pub l_max: f64,
    pub period: Option<f64>,
    pub drift: Option<f64>,
}

impl SimulationOutcome {
    pub fn final_state(&self) -> &ReducedState {
        &self.series.last().expect("series holds at least the initial state").state
    }

    pub fn summary(&self) -> OutcomeSummary {
        let (t_event, period) = match self.event {
            Event::Collapse { t_c, .. } => (Some(t_c), None),
            Event::Arrest { t_escape, .. } | Event::Defocus { t_escape } => (Some(t_escape), None),
            Event::Oscillation { period, .. } => (None, Some(period)),
            Event::HorizonReached { t } => (Some(t), None),
        };
        OutcomeSummary {
            event: self.event.name().to_string(),
            t_event,
            l_min: self.l_min,
            l_max: self.l_max,
            period,
            drift: self.first_integral_drift,
        }
    }
}

fn to_state(t: f64, y: &Vec4) -> ReducedState {
    ReducedState { t, l: y[0], dl: y[1], beta: y[2], tau: y[3] }
}

struct Model<'a> {
    spec: &'a ModelSpec,
    evals: usize,
}

impl Model<'_> {
    /// `None` when `L <= 0`, which the caller treats as a rejected trial.
    fn eval(&mut self, t: f64, y: &Vec4) -> Result<Option<Vec4>> {
        if !(y[0] > 0.0) || !y.iter().all(|v| v.is_finite()) {
            return Ok(None);
        }
        self.evals += 1;
        let r = rhs(&to_state(t, y), self.spec)?;
        Ok(Some([r.dl, r.ddl, r.dbeta, r.dtau]))
    }

    fn step(&mut self, t: f64, y: &Vec4, k1: &Vec4, h: f64) -> Result<Option<(Vec4, Vec4, Vec4)>> {
        let mut k = [[0.0; 4]; 7];
        k[0] = *k1;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..4 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match self.eval(t + C[s] * h, &ys)? {
                Some(v) => k[s] = v,
                None => return Ok(None),
            }
            if s == 6 {
                // stage 7 is evaluated at the new solution
                let mut err = [0.0; 4];
                for i in 0..4 {
                    err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                }
                return Ok(Some((ys, err, k[6])));
            }
        }
        unreachable!()
    }

    /// Solution after a partial step `theta * h`, or `None` if a stage left
    /// the domain.
    fn partial(&mut self, t: f64, y: &Vec4, k1: &Vec4, h: f64) -> Result<Option<Vec4>> {
        Ok(self.step(t, y, k1, h)?.map(|(yn, _, _)| yn))
    }
}

struct Tracker<'a> {
    spec: &'a ModelSpec,
    energy: Option<f64>,
    keep_all: bool,
    /// Drift is not accumulated below this `L`.
    layer: f64,
    drift: Option<f64>,
    l_min: f64,
    l_max: f64,
}

impl Tracker<'_> {
    fn record(&mut self, t: f64, y: &Vec4, series: &mut Vec<Sample>, force: bool) -> Result<()> {
        let mut state = to_state(t, y);
        if self.spec.order != Order::Unperturbed {
            state.beta = beta_of(&state, self.spec)?;
        }
        let residual = match self.energy {
            Some(k) => Some(relative_first_integral(&state, self.spec, k)?),
            None => None,
        };
        if let (Some(d), Some(r)) = (self.drift.as_mut(), residual) {
            if state.l >= self.layer {
                *d = d.max(r);
            }
        }
        self.l_min = self.l_min.min(state.l);
        self.l_max = self.l_max.max(state.l);
        if self.keep_all || force {
            series.push(Sample { state, first_integral_residual: residual });
        }
        Ok(())
    }
}

fn error_norm(y: &Vec4, yn: &Vec4, err: &Vec4, ctrl: &StepControl) -> f64 {
    (0..4).map(|i| err[i].abs() / (ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(yn[i].abs()))).fold(0.0, f64::max)
}

/// Smallest fraction `theta` of the step for which `hit` holds, by bisection;
/// `hit` is assumed false at 0 and true at 1. A partial step that leaves the
/// domain counts as a hit.
fn locate(
    model: &mut Model<'_>,
    t: f64,
    y: &Vec4,
    k1: &Vec4,
    h: f64,
    y_end: &Vec4,
    hit: impl Fn(&Vec4) -> bool,
) -> Result<(f64, Vec4)> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut y_hi = *y_end;
    for _ in 0..REFINE_ITERS {
        let mid = 0.5 * (lo + hi);
        match model.partial(t, y, k1, mid * h)? {
            Some(ym) if !hit(&ym) => lo = mid,
            Some(ym) => {
                hi = mid;
                y_hi = ym;
            }
            None => hi = mid,
        }
    }
    Ok((hi * h, y_hi))
}

fn initial_step(model: &mut Model<'_>, y: &Vec4, f0: &Vec4, ctrl: &StepControl) -> Result<f64> {
    if let Some(h) = ctrl.h_init {
        return Ok(h.min(ctrl.t_max));
    }
    let sc = |i: usize, v: &Vec4| ctrl.abs_tol + ctrl.rel_tol * v[i].abs();
    let norm = |v: &Vec4, s: &Vec4| (0..3).map(|i| (v[i] / sc(i, s)).abs()).fold(0.0, f64::max);
    let d0 = norm(y, y);
    let d1 = norm(f0, y);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(ctrl.t_max);
    let mut y1 = *y;
    for i in 0..4 {
        y1[i] += h0 * f0[i];
    }
    let h1 = match model.eval(h0, &y1)? {
        Some(f1) => {
            let diff: Vec4 = std::array::from_fn(|i| f1[i] - f0[i]);
            let d2 = norm(&diff, y) / h0;
            let dm = d1.max(d2);
            if dm <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / dm).powf(0.2)
            }
        }
        None => h0 * 1e-3,
    };
    Ok((100.0 * h0).min(h1).min(ctrl.t_max))
}

fn oscillation_of(extrema: &[Extremum]) -> Option<(f64, f64, f64)> {
    if extrema.len() < 3 {
        return None;
    }
    let mut mins = Vec::new();
    let mut maxs = Vec::new();
    for e in extrema {
        match e.kind {
            ExtremumKind::Min => mins.push(*e),
            ExtremumKind::Max => maxs.push(*e),
        }
    }
    if mins.is_empty() || maxs.is_empty() {
        return None;
    }
    let consistent =
        |v: &[Extremum]| v.windows(2).all(|w| (w[1].l - w[0].l).abs() <= EXTREMA_TOL * w[0].l.abs().max(w[1].l.abs()));
    if !consistent(&mins) || !consistent(&maxs) {
        return None;
    }
    let spacings: Vec<f64> = [&mins, &maxs].iter().flat_map(|v| v.windows(2).map(|w| w[1].t - w[0].t)).collect();
    if spacings.is_empty() {
        return None;
    }
    let mean = |v: &[Extremum]| v.iter().map(|e| e.l).sum::<f64>() / v.len() as f64;
    let period = spacings.iter().sum::<f64>() / spacings.len() as f64;
    Some((mean(&mins), mean(&maxs), period))
}

/// Integrates the reduced system from `init` until the first terminal event.
pub fn integrate(init: &ReducedState, spec: &ModelSpec, ctrl: &StepControl) -> Result<SimulationOutcome> {
    match integrate_partial(init, spec, ctrl)? {
        (outcome, None) => Ok(outcome),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`integrate`], but a run that stops on step underflow or the step
/// budget still returns what was integrated so far. The event of such a
/// partial outcome is `HorizonReached` at the last accepted time.
pub fn integrate_partial(
    init: &ReducedState,
    spec: &ModelSpec,
    ctrl: &StepControl,
) -> Result<(SimulationOutcome, Option<Error>)> {
    spec.validate()?;
    if !(init.l > 0.0) || !init.l.is_finite() || !init.dl.is_finite() {
        return Err(Error::Domain(format!("initial L must be positive and finite, got {}", init.l)));
    }
    if !(ctrl.t_max > 0.0) || !(ctrl.rel_tol > 0.0) || !(ctrl.abs_tol > 0.0) {
        return Err(Error::Domain("t_max, rel_tol and abs_tol must be positive".into()));
    }
    let l_collapse = ctrl.l_collapse.unwrap_or(1e-4 * init.l);
    let l_escape = ctrl.l_escape.unwrap_or(1e3 * init.l);
    let h_min = ctrl.h_min_factor * ctrl.t_max;
    let h_max = ctrl.h_max.unwrap_or(f64::INFINITY);
    let energy = match spec.order {
        Order::O1 | Order::O2 | Order::O3 => Some(energy_constant(init, spec)?),
        _ => None,
    };

    let mut model = Model { spec, evals: 0 };
    let mut series = Vec::new();
    let mut extrema: Vec<Extremum> = Vec::new();
    let mut track = Tracker {
        spec,
        energy,
        keep_all: ctrl.record,
        layer: 10.0 * l_collapse,
        drift: energy.map(|_| 0.0),
        l_min: init.l,
        l_max: init.l,
    };

    let mut t = 0.0;
    let mut y: Vec4 = [init.l, init.dl, init.beta, init.tau];
    track.record(t, &y, &mut series, true)?;
    let mut k1 = model.eval(t, &y)?.ok_or_else(|| Error::Domain("initial state outside the domain".into()))?;
    if init.dl == 0.0 && k1[1] != 0.0 {
        let kind = if k1[1] > 0.0 { ExtremumKind::Min } else { ExtremumKind::Max };
        extrema.push(Extremum { t, l: init.l, kind });
    }

    let mut h = initial_step(&mut model, &y, &k1, ctrl)?.min(h_max);
    let mut err_prev: f64 = 1.0;
    let mut taken = 0usize;
    let mut rejected = 0usize;

    let stop: std::result::Result<Event, Error> = loop {
        if t >= ctrl.t_max {
            break Ok(match oscillation_of(&extrema) {
                Some((lo, hi, period)) => Event::Oscillation { l_min: lo, l_max: hi, period },
                None => Event::HorizonReached { t },
            });
        }
        if taken + rejected >= ctrl.max_steps {
            break Err(Error::NoConvergence { iterations: taken + rejected });
        }
        let remaining = ctrl.t_max - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < h_min && !last {
            // Accelerating inward, the time left before L = 0 is below L/|dL|.
            if y[1] < 0.0 && k1[1] < 0.0 && y[0] / y[1].abs() < 1e-6 * ctrl.t_max {
                track.record(t, &y, &mut series, true)?;
                break Ok(Event::Collapse { t_c: t, l_final: y[0], certified: true });
            }
            break Err(Error::StepUnderflow { t, h, l: y[0] });
        }

        let Some((yn, err, k7)) = model.step(t, &y, &k1, h)? else {
            rejected += 1;
            h *= 0.25;
            continue;
        };
        let e = error_norm(&y, &yn, &err, ctrl);
        if !(e <= 1.0) {
            rejected += 1;
            let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
            continue;
        }
        taken += 1;

        if yn[0] <= l_collapse {
            let (dt, yc) = locate(&mut model, t, &y, &k1, h, &yn, |v| v[0] <= l_collapse)?;
            let tc = t + dt;
            track.record(tc, &yc, &mut series, true)?;
            break Ok(Event::Collapse { t_c: tc, l_final: yc[0], certified: false });
        }

        let crossed_min = y[1] < 0.0 && yn[1] >= 0.0;
        let crossed_max = y[1] > 0.0 && yn[1] <= 0.0;
        if crossed_min || crossed_max {
            let up = crossed_min;
            let (dt, ye) = locate(&mut model, t, &y, &k1, h, &yn, |v| if up { v[1] >= 0.0 } else { v[1] <= 0.0 })?;
            extrema.push(Extremum {
                t: t + dt,
                l: ye[0],
                kind: if up { ExtremumKind::Min } else { ExtremumKind::Max },
            });
            track.l_min = track.l_min.min(ye[0]);
            track.l_max = track.l_max.max(ye[0]);
        }

        let t_new = if last { ctrl.t_max } else { t + h };

        if yn[0] >= l_escape && yn[1] > 0.0 {
            let (dt, ye) = locate(&mut model, t, &y, &k1, h, &yn, |v| v[0] >= l_escape)?;
            let te = t + dt;
            track.record(te, &ye, &mut series, true)?;
            let first_min = extrema.iter().find(|e| e.kind == ExtremumKind::Min);
            break Ok(match first_min {
                Some(m) => Event::Arrest { l_min: m.l, t_min: m.t, t_escape: te },
                None => Event::Defocus { t_escape: te },
            });
        }

        track.record(t_new, &yn, &mut series, last)?;
        t = t_new;
        y = yn;
        k1 = k7;

        if ctrl.stop_on_oscillation {
            if let Some((lo, hi, period)) = oscillation_of(&extrema) {
                if extrema.len() >= 5 {
                    break Ok(Event::Oscillation { l_min: lo, l_max: hi, period });
                }
            }
        }

        let fac = 0.9 * e.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
        err_prev = e.max(1e-4);
        h = (h * fac.clamp(0.2, 5.0)).min(h_max);
    };

    let (event, failure) = match stop {
        Ok(event) => (event, None),
        Err(e) => {
            if series.last().is_none_or(|s| s.state.t < t) {
                track.record(t, &y, &mut series, true)?;
            }
            (Event::HorizonReached { t }, Some(e))
        }
    };
    let outcome = SimulationOutcome {
        series,
        event,
        extrema,
        first_integral_drift: track.drift,
        l_min: track.l_min,
        l_max: track.l_max,
        steps_taken: taken,
        steps_rejected: rejected,
    };
    Ok((outcome, failure))
}
