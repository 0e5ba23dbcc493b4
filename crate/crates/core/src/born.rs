//! Born-rule distribution `p(a,b,c|x,z)` and the correlators built from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scenario::{build_bsm_povm, build_observable, build_source_state, Scenario};

/// Sign weights of `B₀ = Π₀ + Π₁ − Π₂`.
pub const B0_SIGNS: [f64; 3] = [1.0, 1.0, -1.0];
/// Sign weights of `B₁ = Π₀ − Π₁`.
pub const B1_SIGNS: [f64; 3] = [1.0, -1.0, 0.0];
/// Weights indexed by Bob's observable `y`.
pub const B_SIGNS: [[f64; 3]; 2] = [B0_SIGNS, B1_SIGNS];

const NEGATIVE_TOL: f64 = 1e-12;

/// Probability table indexed `[x][z][a][b][c]`, `b ∈ {0,1,2}`.
pub type Table = [[[[[f64; 2]; 3]; 2]; 2]; 2];

/// Number of `(a, b, c)` outcome cells per input pair.
pub const OUTCOMES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p: Table,
}

/// `(−1)^k`
pub(crate) fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(a, b, c)` for flat outcome index `k < 12`, ordered `a`-major.
pub fn outcome_of(k: usize) -> (usize, usize, usize) {
    (k / 6, (k / 2) % 3, k % 2)
}

impl JointDistribution {
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize, usize) -> f64) -> Self {
        let mut p = Table::default();
        for (x, px) in p.iter_mut().enumerate() {
            for (z, pxz) in px.iter_mut().enumerate() {
                for (a, pa) in pxz.iter_mut().enumerate() {
                    for (b, pb) in pa.iter_mut().enumerate() {
                        for (c, cell) in pb.iter_mut().enumerate() {
                            *cell = f(x, z, a, b, c);
                        }
                    }
                }
            }
        }
        Self { p }
    }

    /// Builds from 48 values in `[x][z][a][b][c]` row-major order.
    pub fn from_flat(values: &[f64]) -> Result<Self> {
        if values.len() != 4 * OUTCOMES {
            return Err(Error::MalformedDistribution(format!(
                "expected 48 entries, got {}",
                values.len()
            )));
        }
        let mut it = values.iter();
        Ok(Self::from_fn(|_, _, _, _, _| *it.next().unwrap()))
    }

    pub fn uniform() -> Self {
        Self::from_fn(|_, _, _, _, _| 1.0 / OUTCOMES as f64)
    }

    /// Deterministic outcome `(a, b, c)` for every input pair.
    pub fn point_mass(a0: usize, b0: usize, c0: usize) -> Self {
        Self::from_fn(|_, _, a, b, c| if (a, b, c) == (a0, b0, c0) { 1.0 } else { 0.0 })
    }

    pub fn get(&self, x: usize, z: usize, a: usize, b: usize, c: usize) -> f64 {
        self.p[x][z][a][b][c]
    }

    /// Outcome probabilities of one input context, in [`outcome_of`] order.
    pub fn context(&self, x: usize, z: usize) -> [f64; OUTCOMES] {
        let mut out = [0.0; OUTCOMES];
        for (k, o) in out.iter_mut().enumerate() {
            let (a, b, c) = outcome_of(k);
            *o = self.p[x][z][a][b][c];
        }
        out
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(48);
        for x in 0..2 {
            for z in 0..2 {
                v.extend_from_slice(&self.context(x, z));
            }
        }
        v
    }

    /// `Σ w(a,b,c) p(a,b,c|x,z)`.
    pub fn expect(&self, x: usize, z: usize, w: impl Fn(usize, usize, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    acc += w(a, b, c) * self.p[x][z][a][b][c];
                }
            }
        }
        acc
    }

    /// `ρ`-weighted mixture of distributions.
    pub fn mixture(parts: &[(f64, &JointDistribution)]) -> Self {
        Self::from_fn(|x, z, a, b, c| parts.iter().map(|(w, d)| w * d.p[x][z][a][b][c]).sum())
    }
}

/// `p(a,b,c|x,z) = tr[(P_a^x ⊗ Π_b ⊗ P_c^z)(ρ₁ ⊗ ρ₂)]`.
///
/// Tensor order is Alice ⊗ (Bob left, Bob right) ⊗ Charlie, with source 1
/// on Alice + Bob-left and source 2 on Bob-right + Charlie.
pub fn compute_distribution(s: &Scenario) -> Result<JointDistribution> {
    s.validate()?;
    let rho = build_source_state(&s.source1)?.kron(&build_source_state(&s.source2)?);
    let povm = build_bsm_povm(&s.bsm)?;
    let i2 = ComplexMatrix::identity(2);
    let local_projectors = |spec| -> Result<[ComplexMatrix; 2]> {
        let o = build_observable(spec)?;
        Ok([i2.add(&o)?.scale(0.5), i2.sub(&o)?.scale(0.5)])
    };
    let alice = [
        local_projectors(&s.alice_settings[0])?,
        local_projectors(&s.alice_settings[1])?,
    ];
    let charlie = [
        local_projectors(&s.charlie_settings[0])?,
        local_projectors(&s.charlie_settings[1])?,
    ];

    let mut p = Table::default();
    for x in 0..2 {
        for a in 0..2 {
            for (b, pi) in povm.iter().enumerate() {
                let ab = alice[x][a].kron(pi);
                for z in 0..2 {
                    for c in 0..2 {
                        let op = ab.kron(&charlie[z][c]);
                        let v = op.trace_product(&rho)?.re;
                        if v < -NEGATIVE_TOL {
                            return Err(Error::MalformedDistribution(format!(
                                "negative probability {v} at x={x} z={z} a={a} b={b} c={c}"
                            )));
                        }
                        p[x][z][a][b][c] = v.max(0.0);
                    }
                }
            }
        }
    }
    Ok(JointDistribution { p })
}

/// Largest marginal deviations found by [`validate_no_signaling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    /// Worst `|Σ p − 1|` over input pairs.
    pub normalization: f64,
    /// `p(a|x,z)` vs `z`.
    pub alice: f64,
    /// `p(b|x,z)` vs `(x, z)`.
    pub bob: f64,
    /// `p(c|x,z)` vs `x`.
    pub charlie: f64,
    /// `p(a,b|x,z)` vs `z`.
    pub alice_bob: f64,
    /// `p(b,c|x,z)` vs `x`.
    pub bob_charlie: f64,
    pub tol: f64,
    pub passed: bool,
}

impl NoSignalingReport {
    pub fn max_deviation(&self) -> f64 {
        [self.alice, self.bob, self.charlie, self.alice_bob, self.bob_charlie]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

pub fn validate_no_signaling(d: &JointDistribution, tol: f64) -> NoSignalingReport {
    let mut normalization: f64 = 0.0;
    for x in 0..2 {
        for z in 0..2 {
            normalization = normalization.max((d.expect(x, z, |_, _, _| 1.0) - 1.0).abs());
        }
    }
    let marg_a = |x, z, a0| d.expect(x, z, |a, _, _| (a == a0) as u8 as f64);
    let marg_b = |x, z, b0| d.expect(x, z, |_, b, _| (b == b0) as u8 as f64);
    let marg_c = |x, z, c0| d.expect(x, z, |_, _, c| (c == c0) as u8 as f64);

    let mut alice: f64 = 0.0;
    let mut charlie: f64 = 0.0;
    let mut alice_bob: f64 = 0.0;
    let mut bob_charlie: f64 = 0.0;
    for i in 0..2 {
        for o in 0..2 {
            alice = alice.max(spread((0..2).map(|z| marg_a(i, z, o))));
            charlie = charlie.max(spread((0..2).map(|x| marg_c(x, i, o))));
        }
        for b in 0..3 {
            for o in 0..2 {
                alice_bob = alice_bob.max(spread((0..2).map(|z| d.p[i][z][o][b].iter().sum::<f64>())));
                bob_charlie = bob_charlie.max(spread((0..2).map(|x| d.p[x][i][0][b][o] + d.p[x][i][1][b][o])));
            }
        }
    }
    let mut bob: f64 = 0.0;
    for b in 0..3 {
        bob = bob.max(spread((0..4).map(|k| marg_b(k / 2, k % 2, b))));
    }
    let mut report = NoSignalingReport {
        normalization,
        alice,
        bob,
        charlie,
        alice_bob,
        bob_charlie,
        tol,
        passed: false,
    };
    report.passed = normalization <= tol && report.max_deviation() <= tol;
    report
}

/// One-, two- and three-party correlators with `y` indexing `B₀`/`B₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub a: [f64; 2],
    pub c: [f64; 2],
    pub b0: f64,
    pub b1: f64,
    /// `⟨A_x B_y⟩`
    pub ab: [[f64; 2]; 2],
    /// `⟨B_y C_z⟩`
    pub bc: [[f64; 2]; 2],
    /// `⟨A_x C_z⟩`
    pub ac: [[f64; 2]; 2],
    /// `⟨A_x B_y C_z⟩`
    pub abc: [[[f64; 2]; 2]; 2],
    /// Largest spread of a marginal correlator across the input contexts it was averaged over.
    pub max_context_spread: f64,
}

impl CorrelatorSet {
    pub fn b(&self, y: usize) -> f64 {
        [self.b0, self.b1][y]
    }

    /// Checks every entry lies in `[−1 − tol, 1 + tol]`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let mut all = vec![self.b0, self.b1];
        all.extend(self.a);
        all.extend(self.c);
        all.extend(self.ab.iter().flatten());
        all.extend(self.bc.iter().flatten());
        all.extend(self.ac.iter().flatten());
        all.extend(self.abc.iter().flatten().flatten());
        match all.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + tol) {
            Some(v) => Err(Error::OutOfRange {
                field: "correlator".into(),
                reason: format!("value {v} outside [-1, 1]"),
            }),
            None => Ok(()),
        }
    }
}

fn mean_and_spread(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean, spread(values.iter().copied()))
}

/// Correlators of `d`; marginal terms are averaged over the free inputs.
pub fn correlators(d: &JointDistribution) -> CorrelatorSet {
    let mut spread_max: f64 = 0.0;
    let mut avg = |vals: Vec<f64>| {
        let (m, s) = mean_and_spread(&vals);
        spread_max = spread_max.max(s);
        m
    };

    let a = [0, 1].map(|x| avg((0..2).map(|z| d.expect(x, z, |a, _, _| sign(a))).collect()));
    let c = [0, 1].map(|z| avg((0..2).map(|x| d.expect(x, z, |_, _, c| sign(c))).collect()));
    let contexts: Vec<(usize, usize)> = (0..4).map(|k| (k / 2, k % 2)).collect();
    let b = [0, 1].map(|y| {
        avg(contexts
            .iter()
            .map(|&(x, z)| d.expect(x, z, |_, b, _| B_SIGNS[y][b]))
            .collect())
    });
    let ab = [0, 1].map(|x| {
        [0, 1].map(|y| avg((0..2).map(|z| d.expect(x, z, |a, b, _| sign(a) * B_SIGNS[y][b])).collect()))
    });
    let bc = [0, 1].map(|y| {
        [0, 1].map(|z| avg((0..2).map(|x| d.expect(x, z, |_, b, c| B_SIGNS[y][b] * sign(c))).collect()))
    });
    let ac = [0, 1].map(|x| [0, 1].map(|z| d.expect(x, z, |a, _, c| sign(a) * sign(c))));
    let abc = [0, 1].map(|x| {
        [0, 1].map(|y| [0, 1].map(|z| d.expect(x, z, |a, b, c| sign(a) * B_SIGNS[y][b] * sign(c))))
    });
    CorrelatorSet {
        a,
        c,
        b0: b[0],
        b1: b[1],
        ab,
        bc,
        ac,
        abc,
        max_context_spread: spread_max,
    }
}
