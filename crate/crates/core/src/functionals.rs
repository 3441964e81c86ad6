//! Scalar functionals of the ground state.
//!
//! `C1`, `C2`, `C3` are each evaluated twice: once in the integrated-by-parts
//! form (squares of low derivatives) and once in the direct form, which pairs
//! an iterated Laplacian of `R^2` with `R (R + r R')`. Agreement of the two
//! is a check on both the quadrature and the derivative table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson_by;
use crate::radial::RadialTable;
use crate::soliton::SolitonProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualConstant {
    #[serde(rename = "direct")]
    pub value_direct: f64,
    #[serde(rename = "ibp")]
    pub value_ibp: f64,
    #[serde(rename = "disc")]
    pub rel_discrepancy: f64,
}

impl DualConstant {
    pub fn new(value_direct: f64, value_ibp: f64) -> Self {
        Self {
            value_direct,
            value_ibp,
            rel_discrepancy: (value_direct - value_ibp).abs() / value_ibp.abs().max(1e-300),
        }
    }

    /// Value used downstream. The direct form is preferred because it shares
    /// its quadrature with the exact `f1` evaluation.
    pub fn value(&self) -> f64 {
        self.value_direct
    }

    fn checked(self, name: &'static str, bound: f64) -> Result<Self> {
        if self.rel_discrepancy > bound {
            return Err(Error::IdentityViolation { name, discrepancy: self.rel_discrepancy, bound });
        }
        Ok(self)
    }
}

/// Relative discrepancy bounds for the dual forms and the Pohozaev checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentityBounds {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub pohozaev: f64,
}

impl Default for IdentityBounds {
    fn default() -> Self {
        Self { c1: 1e-6, c2: 1e-5, c3: 1e-4, pohozaev: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationConstants {
    #[serde(rename = "Nc")]
    pub nc: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "P4")]
    pub p4: f64,
    #[serde(rename = "C1")]
    pub c1: DualConstant,
    #[serde(rename = "C2")]
    pub c2: DualConstant,
    #[serde(rename = "C3")]
    pub c3: DualConstant,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevResiduals {
    /// |P4 - 2 Nc| / Nc
    pub p4: f64,
    /// |grad_norm - Nc| / Nc
    pub grad: f64,
}

impl ModulationConstants {
    pub fn pohozaev_residuals(&self) -> PohozaevResiduals {
        let nc = self.nc.abs().max(1e-300);
        PohozaevResiduals { p4: (self.p4 - 2.0 * self.nc).abs() / nc, grad: (self.grad_norm - self.nc).abs() / nc }
    }

    /// `C1^2 / (8 M C2)`, the second-order collapse threshold for `beta0`.
    pub fn beta_critical_o2(&self) -> f64 {
        let c1 = self.c1.value();
        c1 * c1 / (8.0 * self.m * self.c2.value())
    }
}

/// `e^{-2 r_max}` scaled tail contribution shared by the quadratic integrals.
fn tail_weight(p: &SolitonProfile) -> f64 {
    p.tail_coeff * p.tail_coeff * (-2.0 * p.r_max).exp()
}

pub fn compute_nc(p: &SolitonProfile) -> f64 {
    let body = simpson_by(p.len(), p.grid_step, |i| p.values[i] * p.values[i] * p.r[i]);
    body + 0.5 * tail_weight(p)
}

pub fn compute_m(p: &SolitonProfile) -> f64 {
    let body = simpson_by(p.len(), p.grid_step, |i| {
        let r = p.r[i];
        p.values[i] * p.values[i] * r * r * r
    });
    let rm = p.r_max;
    0.25 * body + 0.25 * tail_weight(p) * (0.5 * rm * rm + 0.5 * rm + 0.25)
}

pub fn compute_p4(p: &SolitonProfile) -> f64 {
    let body = simpson_by(p.len(), p.grid_step, |i| p.values[i].powi(4) * p.r[i]);
    let c2 = tail_weight(p);
    body + if p.r_max > 0.0 { c2 * c2 / (4.0 * p.r_max) } else { 0.0 }
}

pub fn compute_grad_norm(p: &SolitonProfile) -> f64 {
    let body = simpson_by(p.len(), p.grid_step, |i| p.slopes[i] * p.slopes[i] * p.r[i]);
    body + 0.5 * tail_weight(p)
}

fn c1_from(t: &RadialTable, h: f64) -> DualConstant {
    let n = t.len();
    let ibp = 2.0 * simpson_by(n, h, |i| t.df[i] * t.df[i] * t.r[i]);
    let direct = -2.0 * simpson_by(n, h, |i| t.lap[i] * t.weight[i] * t.r[i]);
    DualConstant::new(direct, ibp)
}

fn c2_from(t: &RadialTable, h: f64) -> DualConstant {
    let n = t.len();
    let ibp = 3.0 * simpson_by(n, h, |i| t.lap[i] * t.lap[i] * t.r[i]);
    let direct = 2.0 * simpson_by(n, h, |i| t.lap2[i] * t.weight[i] * t.r[i]);
    DualConstant::new(direct, ibp)
}

fn c3_from(t: &RadialTable, h: f64) -> DualConstant {
    let n = t.len();
    let ibp = 4.0 * simpson_by(n, h, |i| t.dlap[i] * t.dlap[i] * t.r[i]);
    let direct = -2.0 * simpson_by(n, h, |i| t.lap3[i] * t.weight[i] * t.r[i]);
    DualConstant::new(direct, ibp)
}

pub fn compute_c1(p: &SolitonProfile, bounds: &IdentityBounds) -> Result<DualConstant> {
    c1_from(&RadialTable::new(p), p.grid_step).checked("C1", bounds.c1)
}

pub fn compute_c2(p: &SolitonProfile, bounds: &IdentityBounds) -> Result<DualConstant> {
    c2_from(&RadialTable::new(p), p.grid_step).checked("C2", bounds.c2)
}

pub fn compute_c3(p: &SolitonProfile, bounds: &IdentityBounds) -> Result<DualConstant> {
    c3_from(&RadialTable::new(p), p.grid_step).checked("C3", bounds.c3)
}

/// All constants from one derivative table, with every identity enforced.
pub fn compute_all(p: &SolitonProfile, bounds: &IdentityBounds) -> Result<ModulationConstants> {
    let t = RadialTable::new(p);
    let h = p.grid_step;
    let out = ModulationConstants {
        nc: compute_nc(p),
        m: compute_m(p),
        p4: compute_p4(p),
        c1: c1_from(&t, h).checked("C1", bounds.c1)?,
        c2: c2_from(&t, h).checked("C2", bounds.c2)?,
        c3: c3_from(&t, h).checked("C3", bounds.c3)?,
        grad_norm: compute_grad_norm(p),
    };
    let res = out.pohozaev_residuals();
    for (name, value) in [("Pohozaev P4 = 2 Nc", res.p4), ("Pohozaev grad = Nc", res.grad)] {
        if value > bounds.pohozaev {
            return Err(Error::IdentityViolation { name, discrepancy: value, bound: bounds.pohozaev });
        }
    }
    Ok(out)
}
