//! Effective parameter sets. Each is built from its defaults, overlaid with
//! the `--config` file and then with explicit flags, and written back out as
//! `effective_config.json` in the same flat format.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use shmod::dynamics::{Order, StepControl};
use shmod::soliton::SolitonConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    #[serde(rename = "r-max")]
    pub r_max: f64,
    #[serde(rename = "grid-step")]
    pub grid_step: f64,
    #[serde(rename = "shoot-tol")]
    pub shoot_tol: f64,
    #[serde(rename = "bracket-lo")]
    pub bracket_lo: f64,
    #[serde(rename = "bracket-hi")]
    pub bracket_hi: f64,
    #[serde(rename = "max-iter")]
    pub max_iter: usize,
}

impl Default for SolitonParams {
    fn default() -> Self {
        let c = SolitonConfig::default();
        SolitonParams {
            r_max: c.r_max,
            grid_step: c.grid_step,
            shoot_tol: c.shoot_tol,
            bracket_lo: c.bracket_lo,
            bracket_hi: c.bracket_hi,
            max_iter: c.max_iter,
        }
    }
}

impl SolitonParams {
    pub fn config(&self) -> SolitonConfig {
        SolitonConfig {
            r_max: self.r_max,
            grid_step: self.grid_step,
            shoot_tol: self.shoot_tol,
            bracket_lo: self.bracket_lo,
            bracket_hi: self.bracket_hi,
            max_iter: self.max_iter,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = self.config();
        c.intervals().map_err(|e| CliError::Usage(e.to_string()))?;
        if !(c.bracket_lo < c.bracket_hi) {
            return Err(CliError::Usage(format!(
                "bracket-lo ({}) must be below bracket-hi ({})",
                c.bracket_lo, c.bracket_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// `None` means the model's own horizon.
    #[serde(rename = "t-max")]
    pub t_max: Option<f64>,
    #[serde(rename = "rel-tol")]
    pub rel_tol: f64,
    #[serde(rename = "abs-tol")]
    pub abs_tol: f64,
    #[serde(rename = "h-min-factor")]
    pub h_min_factor: f64,
}

impl Default for StepParams {
    fn default() -> Self {
        let c = StepControl::default();
        StepParams { t_max: None, rel_tol: c.rel_tol, abs_tol: c.abs_tol, h_min_factor: c.h_min_factor }
    }
}

impl StepParams {
    pub fn control(&self, default_t_max: f64) -> StepControl {
        StepControl {
            t_max: self.t_max.unwrap_or(default_t_max),
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            h_min_factor: self.h_min_factor,
            ..StepControl::default()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("t-max", self.t_max)?;
        positive("rel-tol", Some(self.rel_tol))?;
        positive("abs-tol", Some(self.abs_tol))?;
        positive("h-min-factor", Some(self.h_min_factor))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub figure: Option<String>,
    pub order: Option<String>,
    pub alpha: Option<f64>,
    pub beta0: Option<f64>,
    #[serde(rename = "L0")]
    pub l0: Option<f64>,
    #[serde(rename = "dLt0")]
    pub dlt0: Option<f64>,
    #[serde(rename = "beta-init")]
    pub beta_init: Option<f64>,
    pub loss: Option<bool>,
    #[serde(flatten)]
    pub step: StepParams,
    #[serde(flatten)]
    pub soliton: SolitonParams,
}

/// Model fields with the defaults filled in.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedModel {
    pub order: Order,
    pub alpha: f64,
    pub beta0: f64,
    pub l0: f64,
    pub dlt0: f64,
    pub beta_init: f64,
    pub loss: bool,
}

impl ModelParams {
    /// Fills unset model fields with defaults unless a figure recipe supplies
    /// them, and rejects a mix of both.
    pub fn settle(mut self) -> Result<Self, CliError> {
        if self.figure.is_some() {
            let explicit = [
                ("order", self.order.is_some()),
                ("alpha", self.alpha.is_some()),
                ("beta0", self.beta0.is_some()),
                ("L0", self.l0.is_some()),
                ("dLt0", self.dlt0.is_some()),
                ("beta-init", self.beta_init.is_some()),
                ("loss", self.loss.is_some()),
            ];
            if let Some((key, _)) = explicit.iter().find(|(_, set)| *set) {
                return Err(CliError::Usage(format!("--figure fixes the model; '{key}' cannot be given with it")));
            }
        } else {
            self.order.get_or_insert_with(|| "o1".into());
            self.alpha.get_or_insert(0.01);
            self.beta0.get_or_insert(0.01);
            self.l0.get_or_insert(10.0);
            self.dlt0.get_or_insert(1.0);
            self.beta_init.get_or_insert(0.0);
            self.loss.get_or_insert(false);
        }
        self.step.validate()?;
        self.soliton.validate()?;
        Ok(self)
    }

    pub fn resolved(&self) -> Result<ResolvedModel, CliError> {
        let need = |name: &str, v: Option<f64>| v.ok_or_else(|| CliError::Usage(format!("missing '{name}'")));
        let m = ResolvedModel {
            order: parse_order(self.order.as_deref().unwrap_or("o1"))?,
            alpha: need("alpha", self.alpha)?,
            beta0: need("beta0", self.beta0)?,
            l0: need("L0", self.l0)?,
            dlt0: need("dLt0", self.dlt0)?,
            beta_init: self.beta_init.unwrap_or(0.0),
            loss: self.loss.unwrap_or(false),
        };
        finite("alpha", m.alpha)?;
        finite("beta0", m.beta0)?;
        finite("dLt0", m.dlt0)?;
        finite("beta-init", m.beta_init)?;
        positive("L0", Some(m.l0))?;
        if m.alpha < 0.0 {
            return Err(CliError::Usage(format!("alpha must be nonnegative, got {}", m.alpha)));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub alpha: f64,
    pub beta0: f64,
    #[serde(rename = "L0")]
    pub l0: Option<f64>,
    pub eps0: Option<f64>,
    pub at: Option<String>,
    #[serde(rename = "dLt0-lo")]
    pub dlt0_lo: f64,
    #[serde(rename = "dLt0-hi")]
    pub dlt0_hi: f64,
    #[serde(flatten)]
    pub step: StepParams,
    #[serde(flatten)]
    pub soliton: SolitonParams,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        ThresholdParams {
            alpha: 0.01,
            beta0: 0.01,
            l0: None,
            eps0: None,
            at: None,
            dlt0_lo: -200.0,
            dlt0_hi: 0.0,
            step: StepParams::default(),
            soliton: SolitonParams::default(),
        }
    }
}

impl ThresholdParams {
    pub fn settle(mut self) -> Result<Self, CliError> {
        let given = [self.l0.is_some(), self.eps0.is_some(), self.at.is_some()];
        match given.iter().filter(|g| **g).count() {
            0 => self.at = Some("mid-band".into()),
            1 => {}
            _ => return Err(CliError::Usage("give only one of L0, eps0 and at".into())),
        }
        if let Some(at) = &self.at {
            if at != "mid-band" && at != "r-low-half" {
                return Err(CliError::Usage(format!("'at' must be mid-band or r-low-half, got '{at}'")));
            }
        }
        positive("L0", self.l0)?;
        positive("eps0", self.eps0)?;
        positive("alpha", Some(self.alpha))?;
        finite("beta0", self.beta0)?;
        finite("dLt0-lo", self.dlt0_lo)?;
        finite("dLt0-hi", self.dlt0_hi)?;
        self.step.validate()?;
        self.soliton.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1TableParams {
    pub eps: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(flatten)]
    pub soliton: SolitonParams,
}

impl Default for F1TableParams {
    fn default() -> Self {
        F1TableParams {
            eps: vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2],
            l: 1.0,
            soliton: SolitonParams::default(),
        }
    }
}

impl F1TableParams {
    pub fn settle(self) -> Result<Self, CliError> {
        if self.eps.is_empty() {
            return Err(CliError::Usage("eps list is empty".into()));
        }
        for &e in &self.eps {
            positive("eps", Some(e))?;
        }
        positive("L", Some(self.l))?;
        self.soliton.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub order: Vec<String>,
    pub alpha: Vec<f64>,
    pub beta0: Vec<f64>,
    #[serde(rename = "L0")]
    pub l0: Vec<f64>,
    #[serde(rename = "dLt0")]
    pub dlt0: Vec<f64>,
    #[serde(flatten)]
    pub step: StepParams,
    #[serde(flatten)]
    pub soliton: SolitonParams,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            order: vec!["o1".into()],
            alpha: vec![0.01],
            beta0: vec![0.01],
            l0: vec![10.0],
            dlt0: vec![1.0],
            step: StepParams::default(),
            soliton: SolitonParams::default(),
        }
    }
}

impl SweepParams {
    pub fn settle(self) -> Result<Self, CliError> {
        for o in &self.order {
            parse_order(o)?;
        }
        for (name, list) in [("alpha", &self.alpha), ("beta0", &self.beta0), ("L0", &self.l0), ("dLt0", &self.dlt0)] {
            if list.is_empty() {
                return Err(CliError::Usage(format!("'{name}' list is empty")));
            }
            for &v in list {
                finite(name, v)?;
            }
        }
        if self.order.is_empty() {
            return Err(CliError::Usage("'order' list is empty".into()));
        }
        self.step.validate()?;
        self.soliton.validate()?;
        Ok(self)
    }
}

pub fn parse_order(s: &str) -> Result<Order, CliError> {
    s.parse().map_err(CliError::Usage)
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("'{name}' must be finite, got {v}")))
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(CliError::Usage(format!("'{name}' must be positive and finite, got {x}")))
        }
        _ => Ok(()),
    }
}

pub fn read_config(path: Option<&Path>) -> Result<Map<String, Value>, CliError> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!("config {} is not a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

/// Defaults, then the config file, then explicit flags.
pub fn merge<T, F>(config: &Map<String, Value>, flags: &F) -> Result<T, CliError>
where
    T: Default + Serialize + DeserializeOwned,
    F: Serialize,
{
    let Value::Object(mut map) = serde_json::to_value(T::default()).expect("parameters serialize") else {
        unreachable!("parameter sets are structs")
    };
    for (key, value) in config {
        if !map.contains_key(key) {
            let mut known: Vec<&String> = map.keys().collect();
            known.sort();
            return Err(CliError::Usage(format!("unknown config key '{key}' (known: {known:?})")));
        }
        map.insert(key.clone(), value.clone());
    }
    let Value::Object(explicit) = serde_json::to_value(flags).expect("flags serialize") else {
        unreachable!("flag sets are structs")
    };
    map.extend(explicit);
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("bad parameter: {e}")))
}
