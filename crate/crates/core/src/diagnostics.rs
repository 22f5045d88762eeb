//! Kernel-weighted moment tracking and the consistency checks built on it.
//!
//! The central object is `W(t) = ∫ G(x; T_ref − t) u(x, t) dx` with G the
//! Gaussian heat kernel: along solutions W obeys `W' ≥ W^p` by Jensen's
//! inequality, so it must clear the ODE barrier
//! `(W(0)^{1-p} − (p−1) t)^{-1/(p-1)}` and can certify blowup from sampled
//! simulation data. The checks here turn a recorded series into slope
//! violations and barrier deficits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{surface_area, ModelParams};
use crate::solver::{GridConfig, SimState};

/// Heat kernel evaluated at backward time `s = t_ref - t`:
/// `(4πs)^{-d/2} exp(-r² / (4s))`. Needs t < t_ref.
pub fn backward_kernel(x_radius: f64, t: f64, t_ref: f64, d: u32) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("backward_kernel requires d >= 1"));
    }
    if !(x_radius >= 0.0) {
        return Err(Error::domain(format!(
            "backward_kernel requires r >= 0, got {x_radius}"
        )));
    }
    if !(t < t_ref) || !t_ref.is_finite() {
        return Err(Error::domain(format!(
            "backward kernel needs t < T_ref, got t = {t}, T_ref = {t_ref}"
        )));
    }
    let s = t_ref - t;
    let d = d as f64;
    Ok((-0.5 * d * (4.0 * std::f64::consts::PI * s).ln() - x_radius * x_radius / (4.0 * s)).exp())
}

/// Trapezoid rule for `W(t)` on grid samples, plus two small closures of the
/// domain: the origin disk `[0, r_0]` treated as constant at the first sample,
/// and a one-term Laplace estimate of the tail beyond `r_max` assuming
/// `u ~ u_N (r/r_max)^{-tail}` there (skipped when the tail exponent is not
/// finite or the edge sample vanishes).
pub fn moment_w_on_nodes(
    nodes: &[f64],
    values: &[f64],
    t: f64,
    t_ref: f64,
    d: u32,
    tail: f64,
) -> Result<f64> {
    if nodes.len() != values.len() || nodes.len() < 2 {
        return Err(Error::domain(
            "moment needs matching node/value slices with >= 2 entries",
        ));
    }
    let sigma = surface_area(d)?;
    let s = t_ref - t;
    let kernel = |r: f64| backward_kernel(r, t, t_ref, d);
    let dd = d as f64;

    let mut total = 0.0;
    let mut prev = sigma * kernel(nodes[0])? * values[0] * nodes[0].powf(dd - 1.0);
    for i in 1..nodes.len() {
        let cur = sigma * kernel(nodes[i])? * values[i] * nodes[i].powf(dd - 1.0);
        total += 0.5 * (prev + cur) * (nodes[i] - nodes[i - 1]);
        prev = cur;
    }

    let r0 = nodes[0];
    total += values[0] * kernel(r0)? * sigma * r0.powf(dd) / dd;

    let n = nodes.len() - 1;
    let r_max = nodes[n];
    let u_n = values[n];
    if tail.is_finite() && u_n > 0.0 {
        let decay = r_max / (2.0 * s) - (dd - 1.0 - tail) / r_max;
        if decay > 0.0 {
            total += sigma * kernel(r_max)? * u_n * r_max.powf(dd - 1.0) / decay;
        }
    }
    Ok(total)
}

/// `W(t)` for a simulation state; no tail assumption beyond the grid is made
/// here (the kernel decays fast at a sensible `r_max`), so this is the
/// grid-plus-origin-disk value.
pub fn moment_w(
    state: &SimState,
    params: &ModelParams,
    grid: &GridConfig,
    t_ref: f64,
) -> Result<f64> {
    moment_w_on_nodes(
        &grid.nodes(),
        &state.values,
        state.t,
        t_ref,
        params.d,
        f64::INFINITY,
    )
}

/// Trapezoid rule for `‖u‖_{L¹} = σ_d ∫ u r^{d-1} dr` on the grid, with the
/// origin disk closed as in [`moment_w_on_nodes`] and a power-law tail
/// `u_N σ_d r_max^d / (tail − d)` appended when `tail > d` (the integral of
/// the assumed tail profile; omitted otherwise since it would not converge
/// or is unknown).
pub fn mass_l1_on_nodes(nodes: &[f64], values: &[f64], d: u32, tail: f64) -> f64 {
    let sigma = match surface_area(d) {
        Ok(s) => s,
        Err(_) => return f64::NAN,
    };
    let dd = d as f64;
    let mut total = 0.0;
    let mut prev = sigma * values[0] * nodes[0].powf(dd - 1.0);
    for i in 1..nodes.len() {
        let cur = sigma * values[i] * nodes[i].powf(dd - 1.0);
        total += 0.5 * (prev + cur) * (nodes[i] - nodes[i - 1]);
        prev = cur;
    }
    total += values[0] * sigma * nodes[0].powf(dd) / dd;
    let n = nodes.len() - 1;
    if tail.is_finite() && tail > dd && values[n] > 0.0 {
        total += values[n] * sigma * nodes[n].powf(dd) / (tail - dd);
    }
    total
}

pub fn mass_l1(state: &SimState, params: &ModelParams, grid: &GridConfig) -> f64 {
    mass_l1_on_nodes(&grid.nodes(), &state.values, params.d, f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub t: f64,
    /// Kernel moment; absent at or beyond the kernel horizon.
    #[serde(rename = "W")]
    pub w: Option<f64>,
    #[serde(rename = "mass_L1")]
    pub mass_l1: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    #[serde(rename = "T_ref")]
    pub t_ref: Option<f64>,
    pub entries: Vec<MomentSample>,
}

impl MomentSeries {
    /// Columns t,W,mass_L1,sup_norm; the W field is left empty where absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,W,mass_L1,sup_norm\n");
        for e in &self.entries {
            let w = e.w.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", e.t, w, e.mass_l1, e.sup_norm));
        }
        out
    }
}

/// A consecutive pair of series entries whose forward slope undercuts the
/// ODE floor `W' ≥ W^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOdeViolation {
    pub t_left: f64,
    pub t_right: f64,
    pub slope: f64,
    pub required: f64,
}

/// Check `ΔW/Δt ≥ (1 − rel_tol) · min(W_k, W_{k+1})^p` over consecutive
/// entries that both carry a W value. The min makes the floor conservative
/// on coarse sampling; rel_tol absorbs quadrature and time-stepping error
/// (1e-2 is a reasonable default).
pub fn check_moment_ode(series: &MomentSeries, p: f64, rel_tol: f64) -> Vec<MomentOdeViolation> {
    let mut violations = Vec::new();
    let with_w: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter_map(|e| e.w.map(|w| (e.t, w)))
        .collect();
    for pair in with_w.windows(2) {
        let (t0, w0) = pair[0];
        let (t1, w1) = pair[1];
        if !(t1 > t0) {
            continue;
        }
        let slope = (w1 - w0) / (t1 - t0);
        let required = w0.min(w1).max(0.0).powf(p);
        if slope < (1.0 - rel_tol) * required {
            violations.push(MomentOdeViolation {
                t_left: t0,
                t_right: t1,
                slope,
                required,
            });
        }
    }
    violations
}

/// Largest relative shortfall of the recorded W below the ODE barrier
/// `(W(0)^{1-p} − (p−1) t)^{-1/(p-1)}`, taken over entries before the
/// barrier's own blowup time. Zero or negative means the series clears the
/// barrier everywhere.
pub fn check_lower_bound(series: &MomentSeries, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!(
            "check_lower_bound requires p > 1, got {p}"
        )));
    }
    let mut iter = series.entries.iter().filter_map(|e| e.w.map(|w| (e.t, w)));
    let (t0, w0) = iter
        .next()
        .ok_or_else(|| Error::domain("check_lower_bound needs a series with a W value"))?;
    if !(w0 > 0.0) {
        return Err(Error::domain(format!(
            "check_lower_bound requires W(0) > 0, got {w0}"
        )));
    }
    let mut worst = 0.0f64;
    for (t, w) in series.entries.iter().filter_map(|e| e.w.map(|w| (e.t, w))) {
        let depleted = w0.powf(1.0 - p) - (p - 1.0) * (t - t0);
        if depleted <= 0.0 {
            continue;
        }
        let bound = depleted.powf(-1.0 / (p - 1.0));
        worst = worst.max((bound - w) / bound);
    }
    Ok(worst)
}
