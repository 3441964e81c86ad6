//! Parameter sets for the reference trajectories.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelSpec, Order, ReducedState, StepControl};
use crate::error::{Error, Result};
use crate::functionals::ModulationConstants;
use crate::regime::{second_order_roots, Prediction};

pub const FIGURE_NAMES: [&str; 10] =
    ["fig1a", "fig1b", "fig1c", "fig2", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c"];

const ALPHA: f64 = 0.01;
const BETA0: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRecipe {
    pub name: String,
    pub order: Order,
    pub alpha: f64,
    pub beta0: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "dLt0")]
    pub dl0: f64,
    pub t_max: f64,
    pub expected: Prediction,
    /// False when the parameters sit outside the small-beta regime.
    pub valid_regime: bool,
    pub note: Option<String>,
    /// Constants the recipe was resolved against.
    pub constants: ModulationConstants,
}

impl FigureRecipe {
    pub fn resolve(name: &str, c: &ModulationConstants) -> Result<Self> {
        use Prediction::*;
        let base = |order, l0: f64, dl0, expected| FigureRecipe {
            name: name.to_string(),
            order,
            alpha: ALPHA,
            beta0: BETA0,
            l0,
            dl0,
            t_max: 1e3 * l0 * l0,
            expected,
            valid_regime: true,
            note: None,
            constants: *c,
        };
        let oscillation_note =
            "alpha/L(0) = 1/80: an oscillating first-order orbit needs alpha/L(0) < sqrt(4 M beta0 / C1)";
        let r_low = || {
            let spec = ModelSpec::new(Order::O2, ALPHA, BETA0, *c);
            second_order_roots(&spec)
                .1
                .map(|(lo, _)| lo)
                .ok_or_else(|| Error::DegenerateData("beta0 above the second-order collapse threshold".into()))
        };
        let recipe = match name {
            "fig1a" | "fig4a" => base(order_of(name), ALPHA / 1e-3, 1.0, MonotoneDefocus),
            "fig1b" | "fig4b" => base(order_of(name), ALPHA / 1e-3, -1.0, ArrestThenDefocus),
            "fig1c" | "fig4c" => FigureRecipe {
                note: Some(oscillation_note.into()),
                ..base(order_of(name), ALPHA * 80.0, 0.0, Oscillation)
            },
            "fig2" => FigureRecipe {
                beta0: 2.0 * c.beta_critical_o2(),
                valid_regime: false,
                note: Some("beta0 = 2 C1^2/(8 M C2): above the collapse threshold, outside small-beta validity".into()),
                ..base(Order::O2, 0.1, -2.0, Collapse)
            },
            "fig3a" => {
                let l0 = ALPHA / (0.5 * r_low()?);
                FigureRecipe {
                    t_max: 1e4 * l0 * l0,
                    note: Some("horizon 1e4 L(0)^2 so the escape radius is reached".into()),
                    ..base(Order::O2, l0, 1.0, MonotoneDefocus)
                }
            }
            "fig3b" => base(Order::O2, ALPHA / (0.5 * r_low()?), 0.0, Oscillation),
            "fig3c" => base(Order::O2, ALPHA / (0.5 * r_low()?), -60.0, Collapse),
            other => return Err(Error::Domain(format!("unknown figure '{other}'"))),
        };
        Ok(recipe)
    }

    pub fn all(c: &ModulationConstants) -> Result<Vec<Self>> {
        FIGURE_NAMES.iter().map(|n| Self::resolve(n, c)).collect()
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.order, self.alpha, self.beta0, self.constants)
    }

    pub fn initial_state(&self) -> ReducedState {
        ReducedState::new(self.l0, self.dl0, self.beta0)
    }

    pub fn step_control(&self) -> StepControl {
        StepControl { t_max: self.t_max, ..StepControl::default() }
    }
}

fn order_of(name: &str) -> Order {
    if name.starts_with("fig4") {
        Order::O3
    } else {
        Order::O1
    }
}
