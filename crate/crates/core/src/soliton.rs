//! Ground state of `R'' + R'/r - R + R^3 = 0`, `R'(0) = 0`, `R -> 0`.
//!
//! The profile is found by shooting on `R(0)`. A shot that starts too low
//! turns back up (R' > 0) before reaching zero; a shot that starts too high
//! crosses zero. Bisection on that classification runs until the bracket
//! collapses to adjacent floating point values. The two bracketing shots
//! agree up to the radius where the growing mode takes over; beyond that
//! radius the profile is continued by the decaying solution of the
//! linearised equation, integrated inward from `r_max` where it is seeded
//! with `e^{-r}/sqrt(r)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of even Taylor coefficients kept in the origin expansion.
const SERIES_TERMS: usize = 48;

/// Radius below which derivatives are taken from the origin expansion.
pub const SERIES_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolitonConfig {
    pub r_max: f64,
    pub grid_step: f64,
    /// Absolute separation of the two bracketing shots beyond which the
    /// shot is no longer trusted and the decaying tail takes over.
    pub shoot_tol: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub max_iter: usize,
}

impl Default for SolitonConfig {
    fn default() -> Self {
        Self { r_max: 25.0, grid_step: 1e-3, shoot_tol: 1e-12, bracket_lo: 2.0, bracket_hi: 2.5, max_iter: 200 }
    }
}

impl SolitonConfig {
    /// Number of grid intervals; the grid holds `intervals() + 1` nodes.
    pub fn intervals(&self) -> Result<usize> {
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(Error::Grid(format!("r_max must be positive, got {}", self.r_max)));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(Error::Grid(format!("grid_step must be positive, got {}", self.grid_step)));
        }
        if !(self.shoot_tol.is_finite() && self.shoot_tol > 0.0) {
            return Err(Error::Grid(format!("shoot_tol must be positive, got {}", self.shoot_tol)));
        }
        let n = (self.r_max / self.grid_step).round();
        if n < 4.0 || (n * self.grid_step - self.r_max).abs() > 1e-9 * self.r_max {
            return Err(Error::Grid(format!(
                "r_max = {} is not a multiple (>= 4) of grid_step = {}",
                self.r_max, self.grid_step
            )));
        }
        Ok(n as usize)
    }
}

/// Radial samples of the ground state on `r_i = i * grid_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile {
    pub r: Vec<f64>,
    /// R(r_i)
    pub values: Vec<f64>,
    /// R'(r_i)
    pub slopes: Vec<f64>,
    pub r0: f64,
    /// `c` in `R(r) ~ c e^{-r} / sqrt(r)`, fitted over the outer five units.
    pub tail_coeff: f64,
    /// Largest `|R'' + R'/r - R + R^3|` with `R''` from a fourth-order
    /// difference of the stored slopes.
    pub residual_max: f64,
    pub grid_step: f64,
    pub r_max: f64,
    /// Radius where the shot hands over to the decaying tail.
    pub match_radius: f64,
    series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetadata {
    #[serde(rename = "R0")]
    pub r0: f64,
    pub r_max: f64,
    pub grid_step: f64,
    pub tail_coeff: f64,
    pub residual_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    CrossesZero,
    TurnsUp,
    Undecided,
}

struct Shot {
    values: Vec<f64>,
    slopes: Vec<f64>,
    fate: Fate,
}

/// Even Taylor coefficients `c_k` of `R(r) = sum c_k r^{2k}` for `R(0) = r0`.
pub(crate) fn origin_series(r0: f64, terms: usize) -> Vec<f64> {
    let mut c = vec![0.0; terms];
    let mut sq = vec![0.0; terms];
    c[0] = r0;
    sq[0] = r0 * r0;
    for k in 0..terms - 1 {
        // coefficient k of R - R^3, using c[0..=k]
        let cube: f64 = (0..=k).map(|i| sq[i] * c[k - i]).sum();
        let next = (c[k] - cube) / (4.0 * ((k + 1) * (k + 1)) as f64);
        c[k + 1] = next;
        sq[k + 1] = (0..=k + 1).map(|i| c[i] * c[k + 1 - i]).sum();
    }
    c
}

/// Value and first derivative of an even power series at `r`.
pub(crate) fn eval_even(coeffs: &[f64], r: f64) -> (f64, f64) {
    let x = r * r;
    let mut value = 0.0;
    let mut dx = 0.0;
    for (k, c) in coeffs.iter().enumerate().rev() {
        value = value * x + c;
        if k > 0 {
            dx = dx * x + k as f64 * c;
        }
    }
    // d/dr sum c_k x^k = 2r sum k c_k x^{k-1}
    (value, 2.0 * r * dx)
}

fn radial_rhs(r: f64, u: f64, du: f64) -> (f64, f64) {
    (du, -du / r + u - u * u * u)
}

fn rk4_step(r: f64, h: f64, u: f64, du: f64, rhs: impl Fn(f64, f64, f64) -> (f64, f64)) -> (f64, f64) {
    let (k1u, k1d) = rhs(r, u, du);
    let (k2u, k2d) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
    let (k3u, k3d) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
    let (k4u, k4d) = rhs(r + h, u + h * k3u, du + h * k3d);
    (u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u), du + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d))
}

fn shoot(r0: f64, h: f64, n: usize) -> Shot {
    let series = origin_series(r0, SERIES_TERMS);
    let (u1, du1) = eval_even(&series, h);
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    values.extend([r0, u1]);
    slopes.extend([0.0, du1]);
    let (mut u, mut du) = (u1, du1);
    for i in 1..n {
        let r = i as f64 * h;
        (u, du) = rk4_step(r, h, u, du, radial_rhs);
        values.push(u);
        slopes.push(du);
        if u < 0.0 {
            return Shot { values, slopes, fate: Fate::CrossesZero };
        }
        if du > 0.0 {
            return Shot { values, slopes, fate: Fate::TurnsUp };
        }
    }
    Shot { values, slopes, fate: Fate::Undecided }
}

/// Decaying solution of `g'' + g'/r - g = 0` on the grid indices
/// `from..=n`, seeded at `r_max` with `e^{-r}/sqrt(r)`.
fn decaying_tail(h: f64, n: usize, from: usize) -> (Vec<f64>, Vec<f64>) {
    let r_max = n as f64 * h;
    let mut g = vec![0.0; n + 1 - from];
    let mut dg = vec![0.0; n + 1 - from];
    let last = n - from;
    g[last] = (-r_max).exp() / r_max.sqrt();
    dg[last] = -(1.0 + 0.5 / r_max) * g[last];
    let linear = |r: f64, u: f64, du: f64| (du, -du / r + u);
    for j in (0..last).rev() {
        let r = (from + j + 1) as f64 * h;
        let (u, du) = rk4_step(r, -h, g[j + 1], dg[j + 1], linear);
        g[j] = u;
        dg[j] = du;
    }
    (g, dg)
}

/// Shoots for the positive, monotone ground state.
pub fn solve_townes(cfg: &SolitonConfig) -> Result<SolitonProfile> {
    let n = cfg.intervals()?;
    let h = cfg.grid_step;
    let (mut lo, mut hi) = (cfg.bracket_lo, cfg.bracket_hi);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Bracket { lo, hi });
    }
    let mut shot_lo = shoot(lo, h, n);
    let mut shot_hi = shoot(hi, h, n);
    if shot_lo.fate != Fate::TurnsUp || shot_hi.fate != Fate::CrossesZero {
        return Err(Error::Bracket { lo, hi });
    }

    let mut settled: Option<(f64, Shot)> = None;
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if iterations == cfg.max_iter {
            return Err(Error::NoConvergence { iterations });
        }
        iterations += 1;
        let s = shoot(mid, h, n);
        match s.fate {
            Fate::TurnsUp => {
                lo = mid;
                shot_lo = s;
            }
            Fate::CrossesZero => {
                hi = mid;
                shot_hi = s;
            }
            Fate::Undecided => {
                settled = Some((mid, s));
                break;
            }
        }
    }

    let (r0, mut values, mut slopes, split) = match settled {
        Some((mid, s)) => (mid, s.values, s.slopes, n),
        None => {
            let usable = shot_lo.values.len().min(shot_hi.values.len());
            let split = (0..usable)
                .find(|&i| (shot_hi.values[i] - shot_lo.values[i]).abs() > cfg.shoot_tol)
                .unwrap_or(usable)
                .saturating_sub(1)
                .max(1);
            let values: Vec<f64> = (0..=split).map(|i| 0.5 * (shot_lo.values[i] + shot_hi.values[i])).collect();
            let slopes: Vec<f64> = (0..=split).map(|i| 0.5 * (shot_lo.slopes[i] + shot_hi.slopes[i])).collect();
            (0.5 * (lo + hi), values, slopes, split)
        }
    };

    values.truncate(split + 1);
    slopes.truncate(split + 1);
    if split < n {
        let (g, dg) = decaying_tail(h, n, split);
        let scale = values[split] / g[0];
        values.extend(g[1..].iter().map(|v| scale * v));
        slopes.extend(dg[1..].iter().map(|v| scale * v));
    }

    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut profile = SolitonProfile {
        r,
        values,
        slopes,
        r0,
        tail_coeff: 0.0,
        residual_max: 0.0,
        grid_step: h,
        r_max: n as f64 * h,
        match_radius: split as f64 * h,
        series: origin_series(r0, SERIES_TERMS),
    };
    profile.tail_coeff = profile.fit_tail();
    profile.residual_max = profile.ode_residual_max();
    Ok(profile)
}

impl SolitonProfile {
    /// The trivial solution `R = 0` on the configured grid.
    pub fn trivial(cfg: &SolitonConfig) -> Result<Self> {
        let n = cfg.intervals()?;
        let h = cfg.grid_step;
        Ok(Self {
            r: (0..=n).map(|i| i as f64 * h).collect(),
            values: vec![0.0; n + 1],
            slopes: vec![0.0; n + 1],
            r0: 0.0,
            tail_coeff: 0.0,
            residual_max: 0.0,
            grid_step: h,
            r_max: n as f64 * h,
            match_radius: n as f64 * h,
            series: vec![0.0; SERIES_TERMS],
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Index { index: i, len: self.len() })
        }
    }

    /// `R''` at node `i` from the equation itself.
    pub fn second_derivative(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        let u = self.values[i];
        if i == 0 {
            Ok(0.5 * (u - u * u * u))
        } else {
            Ok(u - u * u * u - self.slopes[i] / self.r[i])
        }
    }

    /// Radial Laplacian of `R^2` at node `i`.
    pub fn laplacian_of_r2(&self, i: usize) -> Result<f64> {
        let d2 = self.second_derivative(i)?;
        let u = self.values[i];
        let du = self.slopes[i];
        if i == 0 {
            // (R^2)'' doubled at the origin
            Ok(4.0 * (du * du + u * d2))
        } else {
            Ok(2.0 * du * du + 2.0 * u * d2 + 2.0 * u * du / self.r[i])
        }
    }

    /// Even Taylor coefficients of the profile about the origin.
    pub fn origin_coefficients(&self) -> &[f64] {
        &self.series
    }

    /// `(R, R')` at an arbitrary radius by cubic Hermite interpolation, with
    /// `R''` from the equation supplying the slope data for `R'`. Beyond
    /// `r_max` the fitted tail is used.
    pub fn interpolate(&self, r: f64) -> (f64, f64) {
        if r >= self.r_max {
            let v = self.tail_value(r);
            return (v, -(1.0 + 0.5 / r) * v);
        }
        let r = r.max(0.0);
        if r < SERIES_RADIUS {
            return eval_even(&self.series, r);
        }
        let h = self.grid_step;
        let i = ((r / h) as usize).min(self.len() - 2);
        let t = (r - self.r[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let d2 = |j: usize| {
            let u = self.values[j];
            u - u * u * u - self.slopes[j] / self.r[j]
        };
        let v =
            h00 * self.values[i] + h * h10 * self.slopes[i] + h01 * self.values[i + 1] + h * h11 * self.slopes[i + 1];
        let dv = h00 * self.slopes[i] + h * h10 * d2(i) + h01 * self.slopes[i + 1] + h * h11 * d2(i + 1);
        (v, dv)
    }

    /// `c e^{-r}/sqrt(r)` with the fitted tail coefficient.
    pub fn tail_value(&self, r: f64) -> f64 {
        self.tail_coeff * (-r).exp() / r.sqrt()
    }

    fn fit_tail(&self) -> f64 {
        let start = (self.r_max - 5.0).max(self.grid_step);
        let (mut num, mut den) = (0.0, 0.0);
        for (r, v) in self.r.iter().zip(&self.values) {
            if *r >= start && *v > 0.0 {
                let q = (-r).exp() / r.sqrt() / v;
                num += q;
                den += q * q;
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    fn ode_residual_max(&self) -> f64 {
        let n = self.len();
        let h = self.grid_step;
        let s = &self.slopes;
        (2..n.saturating_sub(2))
            .map(|i| {
                let d2 = (-s[i + 2] + 8.0 * s[i + 1] - 8.0 * s[i - 1] + s[i - 2]) / (12.0 * h);
                let u = self.values[i];
                (d2 + s[i] / self.r[i] - u + u * u * u).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn metadata(&self) -> ProfileMetadata {
        ProfileMetadata {
            r0: self.r0,
            r_max: self.r_max,
            grid_step: self.grid_step,
            tail_coeff: self.tail_coeff,
            residual_max: self.residual_max,
        }
    }

    /// Writes `r,R,dR` rows at full grid resolution.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,R,dR")?;
        for i in 0..self.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.r[i], self.values[i], self.slopes[i])?;
        }
        Ok(())
    }
}
