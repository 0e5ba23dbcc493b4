//! Hybrid local models: one source classical, the other an arbitrary
//! no-signaling box. Used to probe the witness bounds from the inside.
//!
//! A model carries a hidden variable `λ` with weights `ρ(λ)`. The classical
//! party (Alice for C-NS, Charlie for NS-C) answers deterministically with
//! `D_λ(input)`. Bob and the remaining "partner" party share a box
//! `q_λ[b][o][w]` (Bob's output `b`, partner output `o`, partner input `w`)
//! that does not signal in either direction. The partner's marginal `m[o][w]`
//! is the same for every `λ`, because the partner only ever holds a share of
//! the no-signaling source, which is independent of `λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::born::{correlators, sign, JointDistribution, B_SIGNS};
use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::stats::derive_seed;
use crate::witness::Witness;

/// Tolerance applied by [`model_to_distribution`] before building `p`.
pub const MODEL_TOL: f64 = 1e-9;

const CONVERGENCE_TOL: f64 = 1e-10;

/// Bob–partner no-signaling box indexed `[b][o][w]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NsBox {
    pub q: [[[f64; 2]; 2]; 3],
}

impl NsBox {
    /// Bob's marginal `Σ_o q[b][o][w]`.
    pub fn bob_marginal(&self, b: usize, w: usize) -> f64 {
        self.q[b][0][w] + self.q[b][1][w]
    }

    /// Partner marginal `Σ_b q[b][o][w]`.
    pub fn partner_marginal(&self, o: usize, w: usize) -> f64 {
        (0..3).map(|b| self.q[b][o][w]).sum()
    }

    fn mix(parts: &[(f64, NsBox)]) -> NsBox {
        let mut out = NsBox::default();
        for b in 0..3 {
            for o in 0..2 {
                for w in 0..2 {
                    out.q[b][o][w] = parts.iter().map(|(t, bx)| t * bx.q[b][o][w]).sum();
                }
            }
        }
        out
    }
}

/// C-NS or NS-C hybrid model, depending on `kind`.
///
/// For [`Witness::Cns`] the classical party is Alice (input `x`) and the
/// partner is Charlie (input `z`); for [`Witness::Nsc`] the roles swap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub kind: Witness,
    pub weights: Vec<f64>,
    /// `D_λ(input)` for inputs 0 and 1.
    pub responses: Vec<[usize; 2]>,
    pub boxes: Vec<NsBox>,
    /// Partner marginal `m[o][w]`, shared by every box.
    pub partner_marginal: [[f64; 2]; 2],
}

/// Per-constraint worst violations of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelValidation {
    pub weight_sum_deviation: f64,
    pub min_entry: f64,
    pub max_box_normalization: f64,
    pub max_bob_signaling: f64,
    pub max_partner_mismatch: f64,
    pub max_marginal_normalization: f64,
    /// Names of constraints violated beyond the tolerance.
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Maps `(x, z, a, c)` to `(classical input, classical output, partner input, partner output)`.
fn roles(kind: Witness, x: usize, z: usize, a: usize, c: usize) -> (usize, usize, usize, usize) {
    match kind {
        Witness::Cns => (x, a, z, c),
        Witness::Nsc => (z, c, x, a),
    }
}

/// Inverse of [`roles`]: `(u, k, w, o)` to `(x, z, a, c)`.
fn unroles(kind: Witness, u: usize, k: usize, w: usize, o: usize) -> (usize, usize, usize, usize) {
    match kind {
        Witness::Cns => (u, w, k, o),
        Witness::Nsc => (w, u, o, k),
    }
}

impl HybridModel {
    pub fn n_lambda(&self) -> usize {
        self.weights.len()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no hidden-variable values".into()));
        }
        if self.responses.len() != n || self.boxes.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} weights, {} responses, {} boxes",
                n,
                self.responses.len(),
                self.boxes.len()
            )));
        }
        Ok(())
    }

    /// Distribution produced by hidden-variable value `l` alone.
    pub fn branch_distribution(&self, l: usize) -> JointDistribution {
        let d = self.responses[l];
        let bx = &self.boxes[l];
        JointDistribution::from_fn(|x, z, a, b, c| {
            let (u, k, w, o) = roles(self.kind, x, z, a, c);
            if d[u] == k {
                bx.q[b][o][w]
            } else {
                0.0
            }
        })
    }

    /// Value of the matching witness.
    pub fn witness_value(&self) -> Result<f64> {
        Ok(self.kind.evaluate(&correlators(&model_to_distribution(self)?)))
    }
}

/// Checks normalization, positivity, no-signaling and marginal consistency.
pub fn validate_model(m: &HybridModel, tol: f64) -> Result<ModelValidation> {
    m.check_shape()?;
    let mut violations: Vec<String> = Vec::new();
    let flag = |violations: &mut Vec<String>, name: &str, v: f64| {
        if v > tol {
            violations.push(name.to_string());
        }
    };

    let weight_sum_deviation = (m.weights.iter().sum::<f64>() - 1.0).abs();
    flag(&mut violations, "weights.normalization", weight_sum_deviation);
    let mut min_entry = m.weights.iter().copied().fold(f64::INFINITY, f64::min);
    flag(&mut violations, "weights.nonnegative", -min_entry);

    let bad_response = m.responses.iter().flatten().any(|&r| r > 1);
    if bad_response {
        violations.push("responses.range".into());
    }

    let mut max_box_normalization: f64 = 0.0;
    let mut max_bob_signaling: f64 = 0.0;
    let mut max_partner_mismatch: f64 = 0.0;
    let mut min_box: f64 = f64::INFINITY;
    for bx in &m.boxes {
        for w in 0..2 {
            let total: f64 = bx.q.iter().flatten().map(|ow| ow[w]).sum();
            max_box_normalization = max_box_normalization.max((total - 1.0).abs());
            for o in 0..2 {
                let diff = bx.partner_marginal(o, w) - m.partner_marginal[o][w];
                max_partner_mismatch = max_partner_mismatch.max(diff.abs());
            }
        }
        for b in 0..3 {
            max_bob_signaling = max_bob_signaling.max((bx.bob_marginal(b, 0) - bx.bob_marginal(b, 1)).abs());
        }
        min_box = min_box.min(bx.q.iter().flatten().flatten().copied().fold(f64::INFINITY, f64::min));
    }
    flag(&mut violations, "box.nonnegative", -min_box);
    flag(&mut violations, "box.normalization", max_box_normalization);
    flag(&mut violations, "box.bob_no_signaling", max_bob_signaling);
    flag(&mut violations, "box.partner_marginal", max_partner_mismatch);

    let min_marginal = m.partner_marginal.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    flag(&mut violations, "partner_marginal.nonnegative", -min_marginal);
    let max_marginal_normalization = (0..2)
        .map(|w| (m.partner_marginal[0][w] + m.partner_marginal[1][w] - 1.0).abs())
        .fold(0.0, f64::max);
    flag(&mut violations, "partner_marginal.normalization", max_marginal_normalization);

    min_entry = min_entry.min(min_box).min(min_marginal);
    let any_nonfinite = m
        .weights
        .iter()
        .chain(m.boxes.iter().flat_map(|b| b.q.iter().flatten().flatten()))
        .chain(m.partner_marginal.iter().flatten())
        .any(|v| !v.is_finite());
    if any_nonfinite {
        violations.push("finite".into());
    }

    let passed = violations.is_empty();
    Ok(ModelValidation {
        weight_sum_deviation,
        min_entry,
        max_box_normalization,
        max_bob_signaling,
        max_partner_mismatch,
        max_marginal_normalization,
        violations,
        passed,
    })
}

/// `p(a,b,c|x,z) = Σ_λ ρ(λ) p_λ(a,b,c|x,z)` after validating at [`MODEL_TOL`].
pub fn model_to_distribution(m: &HybridModel) -> Result<JointDistribution> {
    let v = validate_model(m, MODEL_TOL)?;
    if !v.passed {
        return Err(Error::InvalidModel(format!("violated constraints: {}", v.violations.join(", "))));
    }
    let branches: Vec<JointDistribution> = (0..m.n_lambda()).map(|l| m.branch_distribution(l)).collect();
    let parts: Vec<(f64, &JointDistribution)> = m.weights.iter().copied().zip(branches.iter()).collect();
    Ok(JointDistribution::mixture(&parts))
}

fn dirichlet(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

fn qvar(l: usize, b: usize, o: usize, w: usize) -> usize {
    12 * l + 4 * b + 2 * o + w
}

/// Box constraints for `n` boxes; the marginal is either fixed or a variable block after the boxes.
fn box_constraints(lp: &mut LinearProgram, n: usize, marginal: Option<&[[f64; 2]; 2]>) {
    let mvar = |o: usize, w: usize| 12 * n + 2 * o + w;
    for l in 0..n {
        for o in 0..2 {
            for w in 0..2 {
                let mut terms: Vec<(usize, f64)> = (0..3).map(|b| (qvar(l, b, o, w), 1.0)).collect();
                match marginal {
                    Some(m) => lp.add_eq(&terms, m[o][w]),
                    None => {
                        terms.push((mvar(o, w), -1.0));
                        lp.add_eq(&terms, 0.0);
                    }
                }
            }
        }
        // Bob's marginal is independent of the partner input; the last
        // outcome follows from normalization.
        for b in 0..2 {
            let mut terms = Vec::new();
            for o in 0..2 {
                terms.push((qvar(l, b, o, 0), 1.0));
                terms.push((qvar(l, b, o, 1), -1.0));
            }
            lp.add_eq(&terms, 0.0);
        }
    }
    if marginal.is_none() {
        for w in 0..2 {
            lp.add_eq(&[(mvar(0, w), 1.0), (mvar(1, w), 1.0)], 1.0);
        }
    }
}

fn read_boxes(x: &[f64], n: usize) -> Vec<NsBox> {
    (0..n)
        .map(|l| {
            let mut bx = NsBox::default();
            for b in 0..3 {
                for o in 0..2 {
                    for w in 0..2 {
                        bx.q[b][o][w] = x[qvar(l, b, o, w)];
                    }
                }
            }
            bx
        })
        .collect()
}

/// Random valid model: Dirichlet weights and marginal, random responses, and
/// boxes that mix extreme points of the no-signaling slice.
pub fn random_model(kind: Witness, n_lambda: usize, seed: u64) -> Result<HybridModel> {
    if n_lambda == 0 {
        return Err(Error::InvalidModel("n_lambda must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let weights = dirichlet(&mut rng, n_lambda);
    let mut partner_marginal = [[0.0; 2]; 2];
    for w in 0..2 {
        let d = dirichlet(&mut rng, 2);
        partner_marginal[0][w] = d[0];
        partner_marginal[1][w] = d[1];
    }
    let responses: Vec<[usize; 2]> = (0..n_lambda)
        .map(|_| [rng.random_range(0..2), rng.random_range(0..2)])
        .collect();
    let mut boxes = Vec::with_capacity(n_lambda);
    for _ in 0..n_lambda {
        let k = 3;
        let mix = dirichlet(&mut rng, k);
        let mut parts = Vec::with_capacity(k);
        for &t in &mix {
            let mut lp = LinearProgram::new(12);
            box_constraints(&mut lp, 1, Some(&partner_marginal));
            lp.set_objective((0..12).map(|_| StandardNormal.sample(&mut rng)).collect());
            let sol = lp.solve()?;
            parts.push((t, read_boxes(&sol.x, 1)[0]));
        }
        boxes.push(NsBox::mix(&parts));
    }
    Ok(HybridModel {
        kind,
        weights,
        responses,
        boxes,
        partner_marginal,
    })
}

/// Coefficients of `linear_part + t·quadratic_factor` over the 48 cells of `p`.
fn cell_coefficients(kind: Witness, t: f64) -> [[[[[f64; 2]; 3]; 2]; 2]; 2] {
    let mut out = [[[[[0.0; 2]; 3]; 2]; 2]; 2];
    for x in 0..2 {
        for z in 0..2 {
            for a in 0..2 {
                for b in 0..3 {
                    for c in 0..2 {
                        let mut unit = JointDistribution::from_fn(|_, _, _, _, _| 0.0);
                        unit.p[x][z][a][b][c] = 1.0;
                        let cs = correlators(&unit);
                        out[x][z][a][b][c] = kind.linear_part(&cs) + t * kind.quadratic_factor(&cs);
                    }
                }
            }
        }
    }
    out
}

/// `⟨C₁⟩` for C-NS or `⟨A₁⟩` for NS-C: the partner's input-1 marginal.
fn partner_scalar(m: &[[f64; 2]; 2]) -> f64 {
    m[0][1] - m[1][1]
}

/// Best boxes and partner marginal with weights, responses and `t` held fixed.
fn box_step(kind: Witness, weights: &[f64], responses: &[[usize; 2]], t: f64) -> Result<(Vec<NsBox>, [[f64; 2]; 2])> {
    let n = weights.len();
    let coef = cell_coefficients(kind, t);
    let mut lp = LinearProgram::new(12 * n + 4);
    box_constraints(&mut lp, n, None);
    let mut obj = vec![0.0; 12 * n + 4];
    for l in 0..n {
        for b in 0..3 {
            for o in 0..2 {
                for w in 0..2 {
                    let mut s = 0.0;
                    for u in 0..2 {
                        let (x, z, a, c) = unroles(kind, u, responses[l][u], w, o);
                        s += coef[x][z][a][b][c];
                    }
                    obj[qvar(l, b, o, w)] = weights[l] * s;
                }
            }
        }
    }
    lp.set_objective(obj);
    let sol = lp.solve()?;
    let mut m = [[0.0; 2]; 2];
    for o in 0..2 {
        for w in 0..2 {
            m[o][w] = sol.x[12 * n + 2 * o + w];
        }
    }
    Ok((read_boxes(&sol.x, n), m))
}

/// Outcome of one seesaw restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub kind: Witness,
    pub best_value: f64,
    pub best_model: HybridModel,
    pub restarts: Vec<RestartSummary>,
}

impl OptimizationResult {
    /// `true` when every restart stopped on the improvement criterion.
    pub fn all_converged(&self) -> bool {
        self.restarts.iter().all(|r| r.converged)
    }
}

fn seesaw(kind: Witness, n_lambda: usize, iters: usize, seed: u64) -> Result<(HybridModel, RestartSummary)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let responses: Vec<[usize; 2]> = if n_lambda == 4 {
        (0..4).map(|k| [k & 1, k >> 1]).collect()
    } else {
        (0..n_lambda)
            .map(|_| [rng.random_range(0..2), rng.random_range(0..2)])
            .collect()
    };
    let mut weights = dirichlet(&mut rng, n_lambda);
    let mut t: f64 = rng.random_range(-1.0..=1.0);

    let mut best: Option<(f64, HybridModel)> = None;
    let mut prev = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=iters.max(1) {
        iterations = it;
        let (boxes, m) = box_step(kind, &weights, &responses, t)?;
        let mut model = HybridModel {
            kind,
            weights: weights.clone(),
            responses: responses.clone(),
            boxes,
            partner_marginal: m,
        };
        // With boxes and marginal fixed the witness is linear in ρ, so the
        // best weights sit on a vertex of the simplex.
        let h = partner_scalar(&m);
        let branch_values: Vec<f64> = (0..n_lambda)
            .map(|l| {
                let cs = correlators(&model.branch_distribution(l));
                kind.linear_part(&cs) + kind.quadratic_factor(&cs) * h
            })
            .collect();
        let mut arg = 0;
        for (l, v) in branch_values.iter().enumerate() {
            if *v > branch_values[arg] + 1e-15 {
                arg = l;
            }
        }
        weights = vec![0.0; n_lambda];
        weights[arg] = 1.0;
        model.weights = weights.clone();
        t = h;

        let value = model.witness_value()?;
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, model));
        }
        if (value - prev).abs() < CONVERGENCE_TOL {
            converged = true;
            break;
        }
        prev = value;
    }
    let (value, model) = best.expect("at least one iteration");
    Ok((
        model,
        RestartSummary {
            seed,
            value,
            iterations,
            converged,
        },
    ))
}

/// Seesaw maximisation of the matching witness over hybrid models.
///
/// Restarts run in parallel with seeds derived from `seed`; ties keep the
/// lowest restart index, so the result does not depend on scheduling.
pub fn maximize_witness(kind: Witness, n_lambda: usize, restarts: usize, iters: usize, seed: u64) -> Result<OptimizationResult> {
    if n_lambda == 0 || restarts == 0 {
        return Err(Error::InvalidModel("n_lambda and restarts must be positive".into()));
    }
    let runs: Vec<(HybridModel, RestartSummary)> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| seesaw(kind, n_lambda, iters, derive_seed(seed, r)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (_, s)) in runs.iter().enumerate() {
        if s.value > runs[best].1.value {
            best = i;
        }
    }
    let restarts = runs.iter().map(|(_, s)| *s).collect();
    let (best_model, summary) = runs.into_iter().nth(best).expect("non-empty");
    Ok(OptimizationResult {
        kind,
        best_value: summary.value,
        best_model,
        restarts,
    })
}

/// Joint distribution of the model with the partner box duplicated:
/// `Q(k, b, o, b', o' | u, w, w') = Σ_λ ρ(λ) [k = D_λ(u)] q_λ(b,o|w) q_λ(b',o'|w')`.
#[derive(Debug, Clone, PartialEq)]
pub struct InflatedDistribution {
    kind: Witness,
    q: Vec<f64>,
}

impl InflatedDistribution {
    #[allow(clippy::too_many_arguments)]
    fn index(u: usize, w: usize, w2: usize, k: usize, b: usize, o: usize, b2: usize, o2: usize) -> usize {
        ((((((u * 2 + w) * 2 + w2) * 2 + k) * 3 + b) * 2 + o) * 3 + b2) * 2 + o2
    }

    pub fn build(m: &HybridModel) -> Result<Self> {
        let v = validate_model(m, MODEL_TOL)?;
        if !v.passed {
            return Err(Error::InvalidModel(format!("violated constraints: {}", v.violations.join(", "))));
        }
        let mut q = vec![0.0; 576];
        for l in 0..m.n_lambda() {
            let (rho, d, bx) = (m.weights[l], m.responses[l], &m.boxes[l]);
            for u in 0..2 {
                let k = d[u];
                for w in 0..2 {
                    for w2 in 0..2 {
                        for b in 0..3 {
                            for o in 0..2 {
                                for b2 in 0..3 {
                                    for o2 in 0..2 {
                                        q[Self::index(u, w, w2, k, b, o, b2, o2)] +=
                                            rho * bx.q[b][o][w] * bx.q[b2][o2][w2];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { kind: m.kind, q })
    }

    pub fn kind(&self) -> Witness {
        self.kind
    }

    #[allow(clippy::too_many_arguments)]
    pub fn get(&self, u: usize, w: usize, w2: usize, k: usize, b: usize, o: usize, b2: usize, o2: usize) -> f64 {
        self.q[Self::index(u, w, w2, k, b, o, b2, o2)]
    }

    /// `Σ f(k, b, o, o') Q(·|u, w, w')`, summed over the copy's Bob output.
    pub fn expect(&self, u: usize, w: usize, w2: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..2 {
            for b in 0..3 {
                for o in 0..2 {
                    for b2 in 0..3 {
                        for o2 in 0..2 {
                            acc += f(k, b, o, o2) * self.get(u, w, w2, k, b, o, b2, o2);
                        }
                    }
                }
            }
        }
        acc
    }
}

/// Per-Bob-outcome term of the witness decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTerm {
    pub probability: f64,
    /// `p_b · T_b`
    pub weighted_value: f64,
    /// Conditional value `T_b`, if `p_b > 0`.
    pub value: Option<f64>,
    /// `3 + ⟨K(O′ − O)⟩_b`, the bound `T_b` must respect.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub kind: Witness,
    /// Largest `|⟨K_u O′_w⟩_Q − ⟨K_u O_w⟩_Q|`.
    pub max_identity_residual: f64,
    /// Largest `|⟨K_u B_y O′_w⟩_Q − ⟨K_u B_y⟩⟨O_w⟩|`.
    pub factorization_residual: f64,
    pub outcomes: [OutcomeTerm; 3],
    /// Largest `T_b − bound_b` over outcomes with `p_b > 0`.
    pub max_bound_excess: f64,
    /// `|Σ_b p_b T_b − R|`
    pub decomposition_residual: f64,
    pub witness_value: f64,
}

const OUTCOME_EPS: f64 = 1e-12;

/// Builds the inflated distribution of `m` and checks the identities behind the bound.
pub fn inflation_identities(m: &HybridModel) -> Result<InflationReport> {
    let witness_value = m.witness_value()?;
    let infl = InflatedDistribution::build(m)?;
    let s = |v: usize| sign(v);

    let mut max_identity_residual: f64 = 0.0;
    for u in 0..2 {
        for w in 0..2 {
            for other in 0..2 {
                let copy = infl.expect(u, other, w, |k, _, _, o2| s(k) * s(o2));
                let orig = infl.expect(u, w, other, |k, _, o, _| s(k) * s(o));
                max_identity_residual = max_identity_residual.max((copy - orig).abs());
            }
        }
    }

    let mut factorization_residual: f64 = 0.0;
    for u in 0..2 {
        for w in 0..2 {
            for w2 in 0..2 {
                let partner = infl.expect(u, w2, 0, |_, _, o, _| s(o));
                for signs in &B_SIGNS {
                    let joint = infl.expect(u, w, w2, |k, b, _, o2| s(k) * signs[b] * s(o2));
                    let kb = infl.expect(u, w, w2, |k, b, _, _| s(k) * signs[b]);
                    factorization_residual = factorization_residual.max((joint - kb * partner).abs());
                }
            }
        }
    }

    let mut outcomes = [OutcomeTerm {
        probability: 0.0,
        weighted_value: 0.0,
        value: None,
        bound: None,
    }; 3];
    let mut max_bound_excess = f64::NEG_INFINITY;
    for (bo, term) in outcomes.iter_mut().enumerate() {
        let on = |b: usize| if b == bo { 1.0 } else { 0.0 };
        let p_b = infl.expect(0, 0, 0, |_, b, _, _| on(b));
        // ⟨A_x C_z⟩ restricted to Bob outcome `bo`.
        let ac = |x: usize, z: usize| {
            let (u, w) = match m.kind {
                Witness::Cns => (x, z),
                Witness::Nsc => (z, x),
            };
            infl.expect(u, w, 0, |k, b, o, _| on(b) * s(k) * s(o))
        };
        let (weighted, shift) = match m.kind {
            Witness::Cns => {
                let a1c1p = infl.expect(1, 0, 1, |k, b, _, o2| on(b) * s(k) * s(o2));
                let shift = a1c1p - ac(1, 1);
                let weighted = if bo < 2 {
                    2.0 * s(bo) * (ac(0, 0) - ac(0, 1)) + 2.0 * ac(1, 0) + ac(1, 1) + a1c1p - p_b
                } else {
                    let c0c1p = infl.expect(1, 0, 1, |_, b, o, o2| on(b) * s(o) * s(o2));
                    p_b - (2.0 * ac(1, 0) + ac(1, 1) + a1c1p + 2.0 * c0c1p)
                };
                (weighted, shift)
            }
            Witness::Nsc => {
                // Classical input is z, partner inputs are x and x'.
                let a1pc0 = infl.expect(0, 0, 1, |k, b, _, o2| on(b) * s(k) * s(o2));
                let shift = a1pc0 - ac(1, 0);
                let weighted = if bo < 2 {
                    2.0 * s(bo) * (ac(0, 0) - ac(0, 1)) + ac(1, 0) + 2.0 * ac(1, 1) + a1pc0 - p_b
                } else {
                    let a1pa1 = infl.expect(0, 1, 1, |_, b, o, o2| on(b) * s(o) * s(o2));
                    let a1pc1 = infl.expect(1, 0, 1, |k, b, _, o2| on(b) * s(k) * s(o2));
                    p_b - (ac(1, 0) + 2.0 * ac(1, 1) + 2.0 * a1pa1 + 2.0 * a1pc1 - a1pc0)
                };
                (weighted, shift)
            }
        };
        *term = OutcomeTerm {
            probability: p_b,
            weighted_value: weighted,
            value: None,
            bound: None,
        };
        if p_b > OUTCOME_EPS {
            let value = weighted / p_b;
            let bound = 3.0 + shift / p_b;
            term.value = Some(value);
            term.bound = Some(bound);
            max_bound_excess = max_bound_excess.max(value - bound);
        }
    }
    let total: f64 = outcomes.iter().map(|t| t.weighted_value).sum();
    Ok(InflationReport {
        kind: m.kind,
        max_identity_residual,
        factorization_residual,
        outcomes,
        max_bound_excess,
        decomposition_residual: (total - witness_value).abs(),
        witness_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deterministic_zero(kind: Witness) -> HybridModel {
        let mut bx = NsBox::default();
        bx.q[0][0] = [1.0, 1.0];
        HybridModel {
            kind,
            weights: vec![1.0],
            responses: vec![[0, 0]],
            boxes: vec![bx],
            partner_marginal: [[1.0, 1.0], [0.0, 0.0]],
        }
    }

    #[test]
    fn deterministic_model_reaches_three() {
        for kind in [Witness::Cns, Witness::Nsc] {
            let m = deterministic_zero(kind);
            assert_eq!(m.witness_value().unwrap(), 3.0);
        }
    }

    #[test]
    fn validation_names_constraints() {
        let mut m = deterministic_zero(Witness::Cns);
        m.boxes[0].q[0][0] = [1.0, 0.0];
        m.boxes[0].q[1][0] = [0.0, 1.0];
        let v = validate_model(&m, 1e-9).unwrap();
        assert!(!v.passed);
        assert!(v.violations.contains(&"box.bob_no_signaling".to_string()));
        assert!(model_to_distribution(&m).is_err());

        let mut m = deterministic_zero(Witness::Cns);
        m.weights = vec![0.5];
        let v = validate_model(&m, 1e-9).unwrap();
        assert_eq!(v.violations, vec!["weights.normalization".to_string()]);

        let mut m = deterministic_zero(Witness::Nsc);
        m.boxes.push(NsBox::default());
        assert!(matches!(validate_model(&m, 1e-9), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn random_models_are_valid_and_bounded() {
        for kind in [Witness::Cns, Witness::Nsc] {
            for seed in 0..20 {
                let m = random_model(kind, 4, seed).unwrap();
                assert!(validate_model(&m, 1e-9).unwrap().passed);
                assert!(m.witness_value().unwrap() <= 3.0 + 1e-7);
            }
        }
    }

    #[test]
    fn random_model_is_reproducible() {
        let a = random_model(Witness::Nsc, 3, 9).unwrap();
        let b = random_model(Witness::Nsc, 3, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seesaw_reaches_bound_without_exceeding_it() {
        for kind in [Witness::Cns, Witness::Nsc] {
            let r = maximize_witness(kind, 4, 8, 50, 1).unwrap();
            assert!(r.best_value <= 3.0 + 1e-7, "{kind:?} {}", r.best_value);
            assert!(r.best_value >= 3.0 - 1e-6, "{kind:?} {}", r.best_value);
            assert!(validate_model(&r.best_model, 1e-9).unwrap().passed);
        }
    }

    #[test]
    fn inflation_identities_hold() {
        for kind in [Witness::Cns, Witness::Nsc] {
            for seed in 0..10 {
                let m = random_model(kind, 3, seed).unwrap();
                let r = inflation_identities(&m).unwrap();
                assert!(r.max_identity_residual < 1e-12);
                assert!(r.factorization_residual < 1e-12);
                assert!(r.decomposition_residual < 1e-10, "{kind:?} {}", r.decomposition_residual);
                assert!(r.max_bound_excess <= 1e-10);
            }
        }
    }

    #[test]
    fn inflated_marginal_matches_model() {
        let m = random_model(Witness::Cns, 2, 4).unwrap();
        let d = model_to_distribution(&m).unwrap();
        let infl = InflatedDistribution::build(&m).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                for a in 0..2 {
                    for b in 0..3 {
                        for c in 0..2 {
                            let q: f64 = (0..3)
                                .flat_map(|b2| (0..2).map(move |c2| (b2, c2)))
                                .map(|(b2, c2)| infl.get(x, z, 1, a, b, c, b2, c2))
                                .sum();
                            assert!((q - d.p[x][z][a][b][c]).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }
}
