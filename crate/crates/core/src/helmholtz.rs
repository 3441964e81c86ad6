//! Screened intensity `w - eps^2 Delta w = R^2` and the nonlocal functional
//! `f1(L; alpha)` built from it.
//!
//! With `eps = alpha / L`,
//!
//! ```text
//! f1 = 2 / (eps^2 L^2) * int (w - R^2) R (R + r R') r dr.
//! ```
//!
//! The difference `w - R^2` is `O(eps^2)`, so forming it from a solve for `w`
//! would lose most significant digits at small `eps`. Instead the first terms
//! of the Neumann series are peeled off analytically,
//! `w = R^2 + eps^2 DR^2 + eps^4 D^2R^2 + eps^6 z`, with
//! `z - eps^2 Delta z = D^3 R^2`, and only the remainder `z` is solved for.
//! The identity is exact, so nothing is truncated.

use std::sync::Arc;

use gauss_quad::{GaussLaguerre, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::ModulationConstants;
use crate::quadrature::{simpson, simpson_by};
use crate::radial::RadialTable;
use crate::soliton::SolitonProfile;
use crate::special::bessel_i0_scaled;

/// Above this `eps` the series comparisons are flagged as outside the
/// expansion regime.
pub const EXPANSION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzSolution {
    pub eps: f64,
    pub w: Vec<f64>,
    /// Largest interior residual of the discrete equations.
    pub solver_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Evaluation {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    pub eps: f64,
    pub f1_exact: f64,
    pub f1_order1: f64,
    pub f1_order2: f64,
    pub f1_order3: f64,
    pub outside_expansion: bool,
}

impl F1Evaluation {
    pub fn rel_errors(&self) -> [f64; 3] {
        let e = self.f1_exact;
        [self.f1_order1, self.f1_order2, self.f1_order3].map(|v| (v - e).abs() / e.abs().max(1e-300))
    }
}

/// Tridiagonal system for `w - eps^2 (w'' + w'/r) = source` on a uniform
/// grid from the origin, with `w'(0) = 0` and the Robin condition
/// `w' = -(1/eps + 1/(2 r_max)) w` at the outer node.
struct ScreenedSystem {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl ScreenedSystem {
    fn new(n: usize, h: f64, eps: f64) -> Self {
        let mu = eps * eps / (h * h);
        let r_max = (n - 1) as f64 * h;
        let kappa = 1.0 / eps + 0.5 / r_max;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        diag[0] = 1.0 + 4.0 * mu;
        upper[0] = -4.0 * mu;
        for i in 1..n - 1 {
            let half = 0.5 / i as f64;
            lower[i] = -mu * (1.0 - half);
            diag[i] = 1.0 + 2.0 * mu;
            upper[i] = -mu * (1.0 + half);
        }
        let last = n - 1;
        lower[last] = -2.0 * mu;
        diag[last] = 1.0 + mu * (2.0 + 2.0 * h * kappa + h * h * kappa / r_max);
        Self { lower, diag, upper }
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem(0));
        }
        c[0] = self.upper[0] / denom;
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::SingularSystem(i));
            }
            c[i] = self.upper[i] / denom;
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / denom;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let n = x.len();
        (1..n - 1)
            .map(|i| (self.lower[i] * x[i - 1] + self.diag[i] * x[i] + self.upper[i] * x[i + 1] - rhs[i]).abs())
            .fold(0.0, f64::max)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// Solves `w - eps^2 Delta w = source` for samples on the grid `r_i = i h`.
pub fn solve_screened(source: &[f64], h: f64, eps: f64) -> Result<HelmholtzSolution> {
    check_eps(eps)?;
    if source.len() < 3 || !(h > 0.0) {
        return Err(Error::Grid(format!("need at least 3 nodes and h > 0, got {} and {h}", source.len())));
    }
    let sys = ScreenedSystem::new(source.len(), h, eps);
    let w = sys.solve(source)?;
    let solver_residual = sys.residual(&w, source);
    Ok(HelmholtzSolution { eps, w, solver_residual })
}

/// Screened intensity of the ground state at scaled screening length `eps`.
pub fn solve_radial_helmholtz(p: &SolitonProfile, eps: f64) -> Result<HelmholtzSolution> {
    let source: Vec<f64> = p.values.iter().map(|v| v * v).collect();
    solve_screened(&source, p.grid_step, eps)
}

/// Precomputed profile data for repeated `f1` evaluations.
#[derive(Debug, Clone)]
pub struct F1Evaluator {
    table: RadialTable,
    h: f64,
    /// int D^k R^2 g r dr for k = 1, 2, 3 with g = R (R + r R')
    moments: [f64; 3],
    c1: f64,
    c2: f64,
    c3: f64,
}

impl F1Evaluator {
    pub fn new(p: &SolitonProfile, c: &ModulationConstants) -> Self {
        let table = RadialTable::new(p);
        let h = p.grid_step;
        let n = table.len();
        let moment = |v: &[f64]| simpson_by(n, h, |i| v[i] * table.weight[i] * table.r[i]);
        let moments = [moment(&table.lap), moment(&table.lap2), moment(&table.lap3)];
        Self { h, moments, c1: c.c1.value(), c2: c.c2.value(), c3: c.c3.value(), table }
    }

    pub fn shared(p: &SolitonProfile, c: &ModulationConstants) -> Arc<Self> {
        Arc::new(Self::new(p, c))
    }

    fn paired(&self, v: &[f64]) -> f64 {
        let t = &self.table;
        simpson_by(t.len(), self.h, |i| v[i] * t.weight[i] * t.r[i])
    }

    /// `L^2 f1` as a function of `eps` alone.
    pub fn scaled_f1(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        let [s1, s2, _] = self.moments;
        if eps <= EXPANSION_LIMIT {
            let z = solve_screened(&self.table.lap3, self.h, eps)?;
            let e2 = eps * eps;
            Ok(2.0 * s1 + 2.0 * e2 * s2 + 2.0 * e2 * e2 * self.paired(&z.w))
        } else {
            let z = solve_screened(&self.table.lap, self.h, eps)?;
            Ok(2.0 * self.paired(&z.w))
        }
    }

    pub fn f1(&self, l: f64, alpha: f64) -> Result<f64> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Domain(format!("L must be positive, got {l}")));
        }
        Ok(self.scaled_f1(alpha / l)? / (l * l))
    }

    pub fn evaluate(&self, l: f64, alpha: f64) -> Result<F1Evaluation> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::EpsOutOfRange(alpha / l));
        }
        let f1_exact = self.f1(l, alpha)?;
        let eps = alpha / l;
        let l2 = l * l;
        let x = eps * eps;
        let o1 = -self.c1 / l2;
        let o2 = o1 + self.c2 * x / l2;
        let o3 = o2 - self.c3 * x * x / l2;
        Ok(F1Evaluation {
            l,
            alpha,
            eps,
            f1_exact,
            f1_order1: o1,
            f1_order2: o2,
            f1_order3: o3,
            outside_expansion: eps > EXPANSION_LIMIT,
        })
    }
}

pub fn f1_exact(p: &SolitonProfile, c: &ModulationConstants, l: f64, alpha: f64) -> Result<F1Evaluation> {
    F1Evaluator::new(p, c).evaluate(l, alpha)
}

/// Default node count for [`f1_kernel_crosscheck`].
pub const KERNEL_NQUAD_DEFAULT: usize = 32;
const KERNEL_NQUAD_MIN: usize = 4;
const KERNEL_NQUAD_MAX: usize = 256;
/// Outer radius of the kernel quadrature; the integrand is below 1e-12 there.
const KERNEL_RHO_MAX: f64 = 16.0;
const KERNEL_PANELS: usize = 32;

/// `f1` from the heat-kernel representation of the screened Green function,
///
/// ```text
/// w - R^2 = 1/(2 eps^2) int ds e^{-s}/s int sigma [R^2(sigma) - R^2(rho)]
///           exp(-(rho - sigma)^2 / (4 s eps^2)) I0e(rho sigma / (2 s eps^2)) dsigma,
/// ```
///
/// evaluated by Gauss-Laguerre in `s` and Gauss-Legendre in `sigma` and `rho`.
/// Independent of the finite-difference path and much slower.
pub fn f1_kernel_crosscheck(p: &SolitonProfile, l: f64, alpha: f64, n_quad: usize) -> Result<f64> {
    if !(KERNEL_NQUAD_MIN..=KERNEL_NQUAD_MAX).contains(&n_quad) {
        return Err(Error::QuadratureBudgetExceeded(format!(
            "n_quad = {n_quad} outside [{KERNEL_NQUAD_MIN}, {KERNEL_NQUAD_MAX}]"
        )));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!("L must be positive, got {l}")));
    }
    let eps = alpha / l;
    check_eps(eps)?;

    let budget_err = |e: &dyn std::fmt::Display| Error::QuadratureBudgetExceeded(e.to_string());
    let laguerre = GaussLaguerre::new(n_quad, 0.0).map_err(|e| budget_err(&e))?;
    let legendre = GaussLegendre::new(n_quad).map_err(|e| budget_err(&e))?;

    let intensity = |r: f64| {
        let (v, _) = p.interpolate(r);
        v * v
    };
    let e2 = eps * eps;

    let excess = |rho: f64| {
        let f_rho = intensity(rho);
        let inner = |s: f64| {
            let width = 2.0 * eps * s.sqrt();
            let lo = (rho - 8.0 * width).max(0.0);
            let hi = rho + 8.0 * width;
            let kernel = |sigma: f64| {
                let d = rho - sigma;
                sigma
                    * (intensity(sigma) - f_rho)
                    * (-d * d / (4.0 * s * e2)).exp()
                    * bessel_i0_scaled(rho * sigma / (2.0 * s * e2))
            };
            legendre.integrate(lo, hi, kernel) / s
        };
        laguerre.integrate(inner) / (2.0 * e2)
    };

    let rho_max = KERNEL_RHO_MAX.min(p.r_max);
    let panel = rho_max / KERNEL_PANELS as f64;
    let mut total = 0.0;
    for k in 0..KERNEL_PANELS {
        let (a, b) = (k as f64 * panel, (k + 1) as f64 * panel);
        total += legendre.integrate(a, b, |rho| {
            let (v, dv) = p.interpolate(rho);
            excess(rho) * v * (v + rho * dv) * rho
        });
    }
    Ok(2.0 * total / (alpha * alpha))
}

/// Pointwise `conj(psi) psi Delta u` on the grid for `psi = R e^{i b r^2}`
/// and `Delta u = (w - R^2) / (alpha^2 L^2)`; its integral's imaginary part
/// is `f2`.
pub fn f2_integrand(
    p: &SolitonProfile,
    sol: &HelmholtzSolution,
    l: f64,
    alpha: f64,
    phase_rate: f64,
) -> Result<Vec<Complex64>> {
    if sol.w.len() != p.len() {
        return Err(Error::Grid(format!("solution has {} nodes, profile {}", sol.w.len(), p.len())));
    }
    let scale = 1.0 / (alpha * alpha * l * l);
    Ok((0..p.len())
        .map(|i| {
            let r = p.r[i];
            let psi = Complex64::from_polar(p.values[i], phase_rate * r * r);
            let lap_u = (sol.w[i] - p.values[i] * p.values[i]) * scale;
            (psi.conj() * psi) * lap_u * r
        })
        .collect())
}

/// `f2 = Im int conj(psi) psi Delta u r dr`.
pub fn f2_value(integrand: &[Complex64], h: f64) -> f64 {
    let im: Vec<f64> = integrand.iter().map(|z| z.im).collect();
    simpson(&im, h)
}
