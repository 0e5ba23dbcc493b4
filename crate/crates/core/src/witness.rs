//! The two full-network-nonlocality witnesses and theory curves.
//!
//! `R_C-NS` bounds models where the Alice–Bob source is classical and the
//! Bob–Charlie source is an arbitrary no-signaling resource; `R_NS-C` is the
//! mirror image. Both are at most 3 for their model class, so only a
//! simultaneous strict violation certifies that neither source is classical.
//!
//! # Closed forms
//!
//! Writing `cᵢ = cos 2αᵢ`, `sᵢ = sin 2αᵢ` for the amplitude angles, the Born
//! engine at the default settings gives
//!
//! ```text
//! R_C-NS = 3v₁v₂/√2 − ½v₂²c₂² + v₁v₂²c₂²/√2 − v₁v₂c₁c₂ + ½v₁v₂²c₁c₂ + √2 v₁v₂v_h s₁s₂
//! R_NS-C = 3v₁v₂/√2 − v₁²c₁² + v₁²v₂c₁²/√2 − v₁v₂c₁c₂ + v₁²v₂c₁c₂ + √2 v₁v₂v_h s₁s₂
//! ```
//!
//! Note the fifth term of `R_C-NS` carries `cos 2α₁ cos 2α₂`, a product of
//! angle cosines; it is not a function of the visibilities.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::born::{compute_distribution, correlators, CorrelatorSet};
use crate::error::Result;
use crate::scenario::default_paper_scenario;

/// Bound of both witnesses for their hybrid model classes.
pub const CLASSICAL_BOUND: f64 = 3.0;

const CORRELATOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub r_cns: f64,
    pub r_nsc: f64,
    pub violated_cns: bool,
    pub violated_nsc: bool,
    pub fnn_certified: bool,
}

/// `R_C-NS` from the linear terms plus `(⟨A₁B₀⟩ + ⟨B₀C₀⟩ − ⟨C₀⟩)⟨C₁⟩`.
pub fn eval_r_cns(c: &CorrelatorSet) -> Result<f64> {
    c.validate(CORRELATOR_TOL)?;
    Ok(r_cns_unchecked(c))
}

/// `R_NS-C` from the linear terms plus `⟨A₁⟩(⟨A₁B₀⟩ + ⟨B₀C₁⟩ + ⟨C₀⟩ − ⟨C₁⟩ − ⟨A₁⟩)`.
pub fn eval_r_nsc(c: &CorrelatorSet) -> Result<f64> {
    c.validate(CORRELATOR_TOL)?;
    Ok(r_nsc_unchecked(c))
}

fn shared_terms(c: &CorrelatorSet) -> f64 {
    2.0 * (c.abc[0][1][0] - c.abc[0][1][1]) - c.b0
}

pub(crate) fn r_cns_unchecked(c: &CorrelatorSet) -> f64 {
    shared_terms(c)
        + 2.0 * c.abc[1][0][0]
        + c.abc[1][0][1]
        + (c.ab[1][0] + c.bc[0][0] - c.c[0]) * c.c[1]
}

pub(crate) fn r_nsc_unchecked(c: &CorrelatorSet) -> f64 {
    shared_terms(c)
        + c.abc[1][0][0]
        + 2.0 * c.abc[1][0][1]
        + c.a[1] * (c.ab[1][0] + c.bc[0][1] + c.c[0] - c.c[1] - c.a[1])
}

/// Which hybrid model class a witness bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    /// Classical Alice–Bob source, no-signaling Bob–Charlie source.
    Cns,
    /// No-signaling Alice–Bob source, classical Bob–Charlie source.
    Nsc,
}

impl Witness {
    pub fn label(self) -> &'static str {
        match self {
            Witness::Cns => "R_C-NS",
            Witness::Nsc => "R_NS-C",
        }
    }

    pub fn evaluate(self, c: &CorrelatorSet) -> f64 {
        self.linear_part(c) + self.quadratic_factor(c) * self.quadratic_scalar(c)
    }

    /// Terms linear in the distribution.
    pub fn linear_part(self, c: &CorrelatorSet) -> f64 {
        match self {
            Witness::Cns => shared_terms(c) + 2.0 * c.abc[1][0][0] + c.abc[1][0][1],
            Witness::Nsc => shared_terms(c) + c.abc[1][0][0] + 2.0 * c.abc[1][0][1],
        }
    }

    /// Linear factor multiplying [`Witness::quadratic_scalar`].
    pub fn quadratic_factor(self, c: &CorrelatorSet) -> f64 {
        match self {
            Witness::Cns => c.ab[1][0] + c.bc[0][0] - c.c[0],
            Witness::Nsc => c.ab[1][0] + c.bc[0][1] + c.c[0] - c.c[1] - c.a[1],
        }
    }

    /// `⟨C₁⟩` for C-NS, `⟨A₁⟩` for NS-C: fixed by the classical side's shared marginal.
    pub fn quadratic_scalar(self, c: &CorrelatorSet) -> f64 {
        match self {
            Witness::Cns => c.c[1],
            Witness::Nsc => c.a[1],
        }
    }
}

/// Strict comparison against 3; no tolerance slack.
pub fn fnn_verdict(r_cns: f64, r_nsc: f64) -> WitnessReport {
    let violated_cns = r_cns > CLASSICAL_BOUND;
    let violated_nsc = r_nsc > CLASSICAL_BOUND;
    WitnessReport {
        r_cns,
        r_nsc,
        violated_cns,
        violated_nsc,
        fnn_certified: violated_cns && violated_nsc,
    }
}

pub fn evaluate(c: &CorrelatorSet) -> Result<WitnessReport> {
    Ok(fnn_verdict(eval_r_cns(c)?, eval_r_nsc(c)?))
}

/// Closed-form `(R_C-NS, R_NS-C)` at the default measurement settings.
pub fn closed_form(v1: f64, v2: f64, vh: f64, alpha1: f64, alpha2: f64) -> (f64, f64) {
    let (s1, c1) = (2.0 * alpha1).sin_cos();
    let (s2, c2) = (2.0 * alpha2).sin_cos();
    let common = 3.0 * v1 * v2 / SQRT_2 - v1 * v2 * c1 * c2 + SQRT_2 * v1 * v2 * vh * s1 * s2;
    let cns = common - 0.5 * v2 * v2 * c2 * c2
        + v1 * v2 * v2 * c2 * c2 / SQRT_2
        + 0.5 * v1 * v2 * v2 * c1 * c2;
    let nsc = common - v1 * v1 * c1 * c1 + v1 * v1 * v2 * c1 * c1 / SQRT_2 + v1 * v1 * v2 * c1 * c2;
    (cns, nsc)
}

/// One grid point of a theory curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r_cns: f64,
    pub r_nsc: f64,
    pub violated_cns: bool,
    pub violated_nsc: bool,
    /// `closed_form − engine` for each witness.
    pub closed_form_residual: (f64, f64),
}

/// Engine values over the Cartesian product of the two angle grids (row-major in `alpha1`).
pub fn theory_curve(v1: f64, v2: f64, vh: f64, alpha1_grid: &[f64], alpha2_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    let points: Vec<(f64, f64)> = alpha1_grid
        .iter()
        .flat_map(|&a1| alpha2_grid.iter().map(move |&a2| (a1, a2)))
        .collect();
    points
        .par_iter()
        .map(|&(alpha1, alpha2)| {
            let s = default_paper_scenario(v1, v2, vh, alpha1, alpha2)?;
            let report = evaluate(&correlators(&compute_distribution(&s)?))?;
            let (cf_cns, cf_nsc) = closed_form(v1, v2, vh, alpha1, alpha2);
            Ok(CurvePoint {
                alpha1,
                alpha2,
                r_cns: report.r_cns,
                r_nsc: report.r_nsc,
                violated_cns: report.violated_cns,
                violated_nsc: report.violated_nsc,
                closed_form_residual: (cf_cns - report.r_cns, cf_nsc - report.r_nsc),
            })
        })
        .collect()
}

/// `n` evenly spaced points on `[lo, hi]` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
