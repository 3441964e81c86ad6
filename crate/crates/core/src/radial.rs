//! Iterated radial Laplacians of `R^2` without finite differences.
//!
//! At each node away from the origin the profile is expanded in a local
//! Taylor jet `R(r + s) = sum a_k s^k` whose coefficients follow from the
//! ODE once `R` and `R'` are known. Squaring the jet and applying the radial
//! Laplacian coefficient-wise gives `Delta^k R^2` to any order the jet length
//! allows. Near the origin, where `1/r` makes the local recurrence
//! ill-conditioned, the even power series about `r = 0` is used instead.

use crate::soliton::{eval_even, SolitonProfile, SERIES_RADIUS};

/// Jet length needed for `Delta^3 R^2`.
const JET: usize = 7;

/// Pointwise radial data for `R^2`, one entry per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    pub r: Vec<f64>,
    /// R^2
    pub f: Vec<f64>,
    /// (R^2)'
    pub df: Vec<f64>,
    /// Delta R^2
    pub lap: Vec<f64>,
    /// (Delta R^2)'
    pub dlap: Vec<f64>,
    /// Delta^2 R^2
    pub lap2: Vec<f64>,
    /// Delta^3 R^2
    pub lap3: Vec<f64>,
    /// R (R + r R'), the weight shared by every direct-form integral
    pub weight: Vec<f64>,
}

/// Taylor coefficients of the profile about `r > 0`.
pub(crate) fn profile_jet(r: f64, value: f64, slope: f64) -> [f64; JET] {
    let mut a = [0.0; JET];
    let mut sq = [0.0; JET];
    let mut nl = [0.0; JET];
    a[0] = value;
    a[1] = slope;
    for k in 0..JET - 2 {
        // R^2 and R - R^3 through order k use a[0..=k]
        sq[k] = (0..=k).map(|i| a[i] * a[k - i]).sum();
        let cube: f64 = (0..=k).map(|i| sq[i] * a[k - i]).sum();
        nl[k] = a[k] - cube;
        let prev = if k > 0 { nl[k - 1] } else { 0.0 };
        let kp = (k + 1) as f64;
        a[k + 2] = (r * nl[k] + prev - kp * kp * a[k + 1]) / (r * kp * (kp + 1.0));
    }
    a
}

fn square<const N: usize>(a: &[f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = (0..=k).map(|i| a[i] * a[k - i]).sum();
    }
    out
}

/// Radial Laplacian of a local jet about `r > 0`; the result is two
/// coefficients shorter than the input.
pub(crate) fn jet_laplacian(r: f64, g: &[f64]) -> Vec<f64> {
    let n = g.len().saturating_sub(2);
    let mut out = Vec::with_capacity(n);
    let mut q_prev = 0.0;
    for k in 0..n {
        let gp = (k + 1) as f64 * g[k + 1];
        let q = (gp - q_prev) / r;
        q_prev = q;
        out.push(((k + 2) * (k + 1)) as f64 * g[k + 2] + q);
    }
    out
}

/// Radial Laplacian of an even series `sum g_k r^{2k}`.
pub(crate) fn even_laplacian(g: &[f64]) -> Vec<f64> {
    (0..g.len().saturating_sub(1)).map(|k| 4.0 * ((k + 1) * (k + 1)) as f64 * g[k + 1]).collect()
}

fn even_square(c: &[f64]) -> Vec<f64> {
    (0..c.len()).map(|k| (0..=k).map(|i| c[i] * c[k - i]).sum()).collect()
}

impl RadialTable {
    pub fn new(p: &SolitonProfile) -> Self {
        let n = p.len();
        let mut t = RadialTable {
            r: p.r.clone(),
            f: vec![0.0; n],
            df: vec![0.0; n],
            lap: vec![0.0; n],
            dlap: vec![0.0; n],
            lap2: vec![0.0; n],
            lap3: vec![0.0; n],
            weight: vec![0.0; n],
        };

        let sq = even_square(p.origin_coefficients());
        let l1 = even_laplacian(&sq);
        let l2 = even_laplacian(&l1);
        let l3 = even_laplacian(&l2);

        for i in 0..n {
            let r = p.r[i];
            let (u, du) = (p.values[i], p.slopes[i]);
            t.weight[i] = u * (u + r * du);
            if r < SERIES_RADIUS {
                let (f, df) = eval_even(&sq, r);
                let (lap, dlap) = eval_even(&l1, r);
                t.f[i] = f;
                t.df[i] = df;
                t.lap[i] = lap;
                t.dlap[i] = dlap;
                t.lap2[i] = eval_even(&l2, r).0;
                t.lap3[i] = eval_even(&l3, r).0;
            } else {
                let f = square(&profile_jet(r, u, du));
                let lap = jet_laplacian(r, &f);
                let lap2 = jet_laplacian(r, &lap);
                let lap3 = jet_laplacian(r, &lap2);
                t.f[i] = f[0];
                t.df[i] = f[1];
                t.lap[i] = lap[0];
                t.dlap[i] = lap[1];
                t.lap2[i] = lap2[0];
                t.lap3[i] = lap3[0];
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}
