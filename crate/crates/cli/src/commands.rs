use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};
use shmod::dynamics::{
    integrate, integrate_partial, Event, ModelSpec, Order, OutcomeSummary, ReducedState, StepControl,
};
use shmod::figures::{FigureRecipe, FIGURE_NAMES};
use shmod::functionals::ModulationConstants;
use shmod::helmholtz::{F1Evaluator, EXPANSION_LIMIT};
use shmod::regime::{
    classify, observed, second_order_roots, threshold_bisect_with, Prediction, RegimeReport, ThresholdResult,
};
use shmod::soliton::{solve_townes, SolitonConfig};

use crate::error::CliError;
use crate::output::{ensure_dir, sci, trajectory_csv, write_atomic, write_json};
use crate::params::*;
use crate::snapshot::obtain;

pub struct Context {
    pub out: PathBuf,
    pub config: Map<String, Value>,
    pub constants_path: PathBuf,
    pub recompute: bool,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare<T: Serialize>(&self, effective: &T) -> Result<(), CliError> {
        ensure_dir(&self.out)?;
        write_json(&self.path("effective_config.json"), effective)
    }

    fn constants(&self, cfg: &SolitonConfig) -> Result<ModulationConstants, CliError> {
        Ok(obtain(cfg, &self.constants_path, self.recompute)?.constants)
    }

    fn evaluator(&self, cfg: &SolitonConfig, c: &ModulationConstants) -> Result<Arc<F1Evaluator>, CliError> {
        Ok(F1Evaluator::shared(&solve_townes(cfg)?, c))
    }
}

pub fn townes(ctx: &Context, p: SolitonParams) -> Result<(), CliError> {
    p.validate()?;
    ctx.prepare(&p)?;
    let profile = solve_townes(&p.config())?;
    let mut csv = Vec::new();
    profile.write_csv(&mut csv).expect("writing to memory");
    write_atomic(&ctx.path("townes_profile.csv"), &csv)?;
    write_json(&ctx.path("townes_meta.json"), &profile.metadata())?;
    println!(
        "R0 = {:.15}  tail_coeff = {:.9}  residual_max = {:.3e}",
        profile.r0, profile.tail_coeff, profile.residual_max
    );
    Ok(())
}

pub fn constants(ctx: &Context, p: SolitonParams) -> Result<(), CliError> {
    p.validate()?;
    ctx.prepare(&p)?;
    let report = obtain(&p.config(), &ctx.constants_path, true)?;
    let c = report.constants;
    println!("Nc = {:.12}  M = {:.12}  P4 = {:.12}", c.nc, c.m, c.p4);
    for (name, d) in [("C1", c.c1), ("C2", c.c2), ("C3", c.c3)] {
        println!("{name} = {:.10}  (dual-form discrepancy {:.2e})", d.value(), d.rel_discrepancy);
    }
    println!("written to {}", ctx.constants_path.display());
    Ok(())
}

struct Run {
    name: String,
    init: ReducedState,
    spec: ModelSpec,
    ctrl: StepControl,
    expected: Option<Prediction>,
}

#[derive(Serialize)]
struct RunParameters {
    order: Order,
    alpha: f64,
    beta0: f64,
    #[serde(rename = "L0")]
    l0: f64,
    #[serde(rename = "dLt0")]
    dlt0: f64,
    t_max: f64,
}

impl Run {
    fn parameters(&self) -> RunParameters {
        RunParameters {
            order: self.spec.order,
            alpha: self.spec.alpha,
            beta0: self.spec.beta0,
            l0: self.init.l,
            dlt0: self.init.dl,
            t_max: self.ctrl.t_max,
        }
    }
}

#[derive(Serialize)]
struct OutcomeRecord {
    name: String,
    #[serde(flatten)]
    summary: OutcomeSummary,
    observed: Prediction,
    expected: Option<Prediction>,
    detail: Event,
    steps_taken: usize,
    steps_rejected: usize,
    parameters: RunParameters,
    error: Option<String>,
}

fn recipe_run(r: &FigureRecipe, step: &StepParams) -> Run {
    let ctrl = step.control(r.t_max);
    Run { name: r.name.clone(), init: r.initial_state(), spec: r.spec(), ctrl, expected: Some(r.expected) }
}

fn model_runs(ctx: &Context, p: &ModelParams) -> Result<Vec<Run>, CliError> {
    let cfg = p.soliton.config();
    let c = ctx.constants(&cfg)?;
    if let Some(fig) = &p.figure {
        let names: Vec<&str> = if fig == "all" { FIGURE_NAMES.to_vec() } else { vec![fig.as_str()] };
        if !names.iter().all(|n| FIGURE_NAMES.contains(n)) {
            return Err(CliError::Usage(format!("unknown figure '{fig}' (known: {}, all)", FIGURE_NAMES.join(", "))));
        }
        return names.iter().map(|n| Ok(recipe_run(&FigureRecipe::resolve(n, &c)?, &p.step))).collect();
    }
    let m = p.resolved()?;
    let mut spec = ModelSpec::new(m.order, m.alpha, m.beta0, c).with_loss(m.loss);
    if m.order == Order::Exact {
        spec = spec.with_f1(ctx.evaluator(&cfg, &c)?);
    }
    let beta = if m.order == Order::Unperturbed { m.beta_init } else { m.beta0 };
    let init = ReducedState::new(m.l0, m.dlt0, beta);
    let ctrl = p.step.control(1e3 * m.l0 * m.l0);
    Ok(vec![Run { name: "simulate".into(), init, spec, ctrl, expected: None }])
}

fn execute(ctx: &Context, run: &Run) -> Result<String, CliError> {
    let (outcome, failure) = integrate_partial(&run.init, &run.spec, &run.ctrl)?;
    write_atomic(&ctx.path(&format!("{}_trajectory.csv", run.name)), trajectory_csv(&outcome).as_bytes())?;
    let record = OutcomeRecord {
        name: run.name.clone(),
        summary: outcome.summary(),
        observed: observed(&outcome),
        expected: run.expected,
        detail: outcome.event,
        steps_taken: outcome.steps_taken,
        steps_rejected: outcome.steps_rejected,
        parameters: run.parameters(),
        error: failure.as_ref().map(|e| e.to_string()),
    };
    write_json(&ctx.path(&format!("{}_outcome.json", run.name)), &record)?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let verdict = match run.expected {
        Some(want) if want == record.observed => " (as expected)".to_string(),
        Some(want) => format!(" (expected {want:?})"),
        None => String::new(),
    };
    Ok(format!("{}: {} {:?}{verdict}", run.name, outcome.event.name(), record.observed))
}

pub fn simulate(ctx: &Context, p: ModelParams) -> Result<(), CliError> {
    let p = p.settle()?;
    ctx.prepare(&p)?;
    let runs = model_runs(ctx, &p)?;
    let results: Vec<Result<String, CliError>> = runs.par_iter().map(|r| execute(ctx, r)).collect();
    let mut first_err = None;
    for (run, res) in runs.iter().zip(results) {
        match res {
            Ok(line) => println!("{line}"),
            Err(e) => {
                if runs.len() > 1 {
                    eprintln!("{}: {e}", run.name);
                }
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct ClassifyRecord {
    name: String,
    parameters: RunParameters,
    #[serde(flatten)]
    report: RegimeReport,
}

pub fn classify_cmd(ctx: &Context, p: ModelParams) -> Result<(), CliError> {
    let p = p.settle()?;
    if p.figure.as_deref() == Some("all") {
        return Err(CliError::Usage("classify takes a single figure".into()));
    }
    ctx.prepare(&p)?;
    let runs = model_runs(ctx, &p)?;
    let run = &runs[0];
    let report = classify(&run.init, &run.spec)?;
    println!("{}: predicted {:?}", run.name, report.predicted);
    if let Some(note) = &report.note {
        println!("note: {note}");
    }
    let record = ClassifyRecord { name: run.name.clone(), parameters: run.parameters(), report };
    write_json(&ctx.path("classify.json"), &record)
}

#[derive(Serialize)]
struct ThresholdRecord {
    #[serde(flatten)]
    result: ThresholdResult,
    alpha: f64,
    beta0: f64,
    #[serde(rename = "L0")]
    l0: f64,
    eps0: f64,
    r_low: f64,
    r_high: f64,
}

pub fn threshold(ctx: &Context, p: ThresholdParams) -> Result<(), CliError> {
    let p = p.settle()?;
    ctx.prepare(&p)?;
    let c = ctx.constants(&p.soliton.config())?;
    let spec = ModelSpec::new(Order::O2, p.alpha, p.beta0, c);
    let Some((r_low, r_high)) = second_order_roots(&spec).1 else {
        return Err(shmod::Error::DegenerateData("beta0 is above the second-order collapse threshold".into()).into());
    };
    let eps0 = match (p.l0, p.eps0, p.at.as_deref()) {
        (Some(l0), _, _) => p.alpha / l0,
        (_, Some(e), _) => e,
        (_, _, Some("r-low-half")) => 0.5 * r_low,
        _ => 0.5 * (r_low + r_high),
    };
    let l0 = p.alpha / eps0;
    let ctrl = StepControl { stop_on_oscillation: true, record: false, ..p.step.control(1e3 * l0 * l0) };
    let result = threshold_bisect_with(&ReducedState::new(l0, 0.0, 0.0), &spec, (p.dlt0_lo, p.dlt0_hi), &ctrl)?;
    println!("L_t^c = {:.6} (alpha/L0 = {eps0:.6}, r_low = {r_low:.6}, r_high = {r_high:.6})", result.l_t_c);
    let record = ThresholdRecord { result, alpha: p.alpha, beta0: p.beta0, l0, eps0, r_low, r_high };
    write_json(&ctx.path("threshold.json"), &record)
}

pub fn f1_table(ctx: &Context, p: F1TableParams) -> Result<(), CliError> {
    let p = p.settle()?;
    ctx.prepare(&p)?;
    let cfg = p.soliton.config();
    let c = ctx.constants(&cfg)?;
    let eval = ctx.evaluator(&cfg, &c)?;
    let rows: Vec<Result<String, CliError>> = p
        .eps
        .par_iter()
        .map(|&eps| {
            let e = eval.evaluate(p.l, eps * p.l)?;
            let [r1, r2, r3] = e.rel_errors();
            let vals = [eps, e.f1_exact, e.f1_order1, e.f1_order2, e.f1_order3, r1, r2, r3];
            Ok(vals.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(","))
        })
        .collect();
    let mut csv = String::from("eps,f1_exact,f1_o1,f1_o2,f1_o3,rel_err_o1,rel_err_o2,rel_err_o3\n");
    for row in rows {
        csv.push_str(&row?);
        csv.push('\n');
    }
    write_atomic(&ctx.path("f1_table.csv"), csv.as_bytes())?;
    if p.eps.iter().any(|&e| e > EXPANSION_LIMIT) {
        println!("note: rows with alpha/L > {EXPANSION_LIMIT} lie outside the expansion regime");
    }
    println!("{} rows written", p.eps.len());
    Ok(())
}

#[derive(Serialize)]
struct SweepLine {
    index: usize,
    parameters: RunParameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<OutcomeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed: Option<Prediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn sweep(ctx: &Context, p: SweepParams) -> Result<(), CliError> {
    let p = p.settle()?;
    ctx.prepare(&p)?;
    let cfg = p.soliton.config();
    let c = ctx.constants(&cfg)?;
    let orders: Vec<Order> = p.order.iter().map(|o| parse_order(o)).collect::<Result<_, _>>()?;
    let evaluator = if orders.contains(&Order::Exact) { Some(ctx.evaluator(&cfg, &c)?) } else { None };
    let mut runs = Vec::new();
    for &order in &orders {
        for &alpha in &p.alpha {
            for &beta0 in &p.beta0 {
                for &l0 in &p.l0 {
                    for &dlt0 in &p.dlt0 {
                        let mut spec = ModelSpec::new(order, alpha, beta0, c);
                        if let (Order::Exact, Some(ev)) = (order, &evaluator) {
                            spec = spec.with_f1(ev.clone());
                        }
                        let mut ctrl = p.step.control(1e3 * l0 * l0);
                        ctrl.record = false;
                        runs.push(Run {
                            name: String::new(),
                            init: ReducedState::new(l0, dlt0, 0.0),
                            spec,
                            ctrl,
                            expected: None,
                        });
                    }
                }
            }
        }
    }
    let lines: Vec<String> = runs
        .par_iter()
        .enumerate()
        .map(|(index, run)| {
            let line = match integrate(&run.init, &run.spec, &run.ctrl) {
                Ok(out) => SweepLine {
                    index,
                    parameters: run.parameters(),
                    outcome: Some(out.summary()),
                    observed: Some(observed(&out)),
                    error: None,
                },
                Err(e) => SweepLine {
                    index,
                    parameters: run.parameters(),
                    outcome: None,
                    observed: None,
                    error: Some(e.to_string()),
                },
            };
            serde_json::to_string(&line).expect("serializable line")
        })
        .collect();
    let failed = lines.iter().filter(|l| l.contains("\"error\"")).count();
    let mut text = lines.join("\n");
    text.push('\n');
    write_atomic(&ctx.path("sweep.jsonl"), text.as_bytes())?;
    println!("{} points, {failed} failed", lines.len());
    Ok(())
}

pub fn snapshot_path(out: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| out.join("constants.json"))
}
