//! Finite-sample experiments: coincidence counts, witness estimates and
//! bootstrap standard errors.
//!
//! # Random numbers
//!
//! All randomness comes from `ChaCha20Rng` (crate `rand_chacha`) seeded with
//! `seed_from_u64`. ChaCha has 2^64 independent streams per key, used as:
//!
//! * counts for one experiment: stream 0 of `seed`;
//! * bootstrap resample `r`: stream `r + 1` of `seed`;
//! * sweep point `i`: all of the above with seed [`derive_seed`]`(seed, i)`.
//!
//! Multinomial draws are sequences of conditional binomials
//! (`rand_distr::Binomial`) over the cells in `[x][z][a][b][c]` order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::born::{compute_distribution, correlators, outcome_of, JointDistribution, OUTCOMES};
use crate::error::{out_of_range, Error, Result};
use crate::scenario::Scenario;
use crate::witness::{r_cns_unchecked, r_nsc_unchecked, CLASSICAL_BOUND};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const MIN_RESAMPLES: usize = 100;

/// Event counts indexed `[x][z][a][b][c]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub n: [[[[[u64; 2]; 3]; 2]; 2]; 2],
    pub total: u64,
}

/// A single recorded trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub x: usize,
    pub z: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub r_cns_hat: f64,
    pub r_nsc_hat: f64,
    pub se_cns: f64,
    pub se_nsc: f64,
    /// `(r̂ − 3)/se`; absent when `se = 0`.
    pub sigma_cns: Option<f64>,
    pub sigma_nsc: Option<f64>,
}

impl CountTable {
    pub fn from_events(events: &[Event]) -> Result<Self> {
        let mut t = Self {
            n: Default::default(),
            total: 0,
        };
        for e in events {
            if e.x > 1 || e.z > 1 || e.a > 1 || e.b > 2 || e.c > 1 {
                return Err(out_of_range("event", format!("{e:?} outside the outcome grid")));
            }
            t.n[e.x][e.z][e.a][e.b][e.c] += 1;
            t.total += 1;
        }
        Ok(t)
    }

    pub fn context_total(&self, x: usize, z: usize) -> u64 {
        self.n[x][z].iter().flatten().flatten().sum()
    }

    pub fn context(&self, x: usize, z: usize) -> [u64; OUTCOMES] {
        let mut out = [0; OUTCOMES];
        for (k, o) in out.iter_mut().enumerate() {
            let (a, b, c) = outcome_of(k);
            *o = self.n[x][z][a][b][c];
        }
        out
    }

    /// Per-context relative frequencies; errors on an empty input context.
    pub fn empirical(&self) -> Result<JointDistribution> {
        for x in 0..2 {
            for z in 0..2 {
                if self.context_total(x, z) == 0 {
                    return Err(Error::EmptyContext { x, z });
                }
            }
        }
        Ok(JointDistribution::from_fn(|x, z, a, b, c| {
            self.n[x][z][a][b][c] as f64 / self.context_total(x, z) as f64
        }))
    }

    /// Contexts with no events.
    pub fn empty_contexts(&self) -> Vec<(usize, usize)> {
        (0..4)
            .map(|k| (k / 2, k % 2))
            .filter(|&(x, z)| self.context_total(x, z) == 0)
            .collect()
    }

    /// CSV rows `x,z,a,b,c,count` in table order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,z,a,b,c,count\n");
        for x in 0..2 {
            for z in 0..2 {
                for k in 0..OUTCOMES {
                    let (a, b, c) = outcome_of(k);
                    s.push_str(&format!("{x},{z},{a},{b},{c},{}\n", self.n[x][z][a][b][c]));
                }
            }
        }
        s
    }
}

/// SplitMix64 finaliser applied to `seed + (index + 1)·φ`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn multinomial(rng: &mut ChaCha20Rng, n: u64, probs: &[f64], out: &mut [u64]) {
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            out[k] = 0;
            continue;
        }
        if k + 1 == probs.len() {
            out[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("probability in (0, 1)").sample(rng)
        };
        out[k] = draw;
        remaining -= draw;
        mass -= p;
    }
}

fn check_distribution(d: &JointDistribution) -> Result<()> {
    for x in 0..2 {
        for z in 0..2 {
            let ctx = d.context(x, z);
            if ctx.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::MalformedDistribution(format!("negative or non-finite cell in context ({x}, {z})")));
            }
            let s: f64 = ctx.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::MalformedDistribution(format!("context ({x}, {z}) sums to {s}")));
            }
        }
    }
    Ok(())
}

/// Multinomial draw of `total` trials with uniformly random inputs.
pub fn sample_counts(d: &JointDistribution, total: u64, seed: u64) -> Result<CountTable> {
    if total == 0 {
        return Err(out_of_range("total", "must be at least 1"));
    }
    check_distribution(d)?;
    let probs: Vec<f64> = d.flat().iter().map(|p| p / 4.0).collect();
    let mut cells = vec![0u64; probs.len()];
    multinomial(&mut rng_for(seed, 0), total, &probs, &mut cells);
    let mut t = CountTable {
        n: Default::default(),
        total,
    };
    for (i, &n) in cells.iter().enumerate() {
        let (a, b, c) = outcome_of(i % OUTCOMES);
        t.n[i / (2 * OUTCOMES)][(i / OUTCOMES) % 2][a][b][c] = n;
    }
    Ok(t)
}

fn witnesses_of(d: &JointDistribution) -> (f64, f64) {
    let c = correlators(d);
    (r_cns_unchecked(&c), r_nsc_unchecked(&c))
}

/// `(r − 3)/se` when `se > 0`.
pub fn sigma_distance(r: f64, se: f64) -> Option<f64> {
    (se > 0.0).then(|| (r - CLASSICAL_BOUND) / se)
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// Point estimates from conditional frequencies and bootstrap standard errors.
///
/// Each resample redraws every input context independently with its observed
/// size and frequencies, so no resample can leave a context empty.
pub fn estimate_witnesses(t: &CountTable, bootstrap_resamples: usize, seed: u64) -> Result<EstimateReport> {
    if bootstrap_resamples < MIN_RESAMPLES {
        return Err(out_of_range(
            "bootstrap_resamples",
            format!("{bootstrap_resamples} is below the minimum of {MIN_RESAMPLES}"),
        ));
    }
    let observed = t.empirical()?;
    let (r_cns_hat, r_nsc_hat) = witnesses_of(&observed);

    let contexts: Vec<(u64, [f64; OUTCOMES])> = (0..4)
        .map(|k| (t.context_total(k / 2, k % 2), observed.context(k / 2, k % 2)))
        .collect();
    let draws: Vec<(f64, f64)> = (0..bootstrap_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r as u64 + 1);
            let mut cells = [0u64; OUTCOMES];
            let mut flat = Vec::with_capacity(4 * OUTCOMES);
            for (n, probs) in &contexts {
                multinomial(&mut rng, *n, probs, &mut cells);
                flat.extend(cells.iter().map(|&k| k as f64 / *n as f64));
            }
            witnesses_of(&JointDistribution::from_flat(&flat).expect("48 cells"))
        })
        .collect();
    let cns: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let nsc: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let se_cns = std_dev(&cns);
    let se_nsc = std_dev(&nsc);
    Ok(EstimateReport {
        r_cns_hat,
        r_nsc_hat,
        se_cns,
        se_nsc,
        sigma_cns: sigma_distance(r_cns_hat, se_cns),
        sigma_nsc: sigma_distance(r_nsc_hat, se_nsc),
    })
}

/// Simulated experiment at each scenario; point `i` uses [`derive_seed`]`(seed, i)`.
pub fn sweep_experiment(
    scenarios: &[Scenario],
    total: u64,
    seed: u64,
    bootstrap_resamples: usize,
) -> Result<Vec<EstimateReport>> {
    if scenarios.is_empty() {
        return Err(out_of_range("grid", "sweep needs at least one point"));
    }
    if total == 0 {
        return Err(out_of_range("total", "must be at least 1"));
    }
    scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let point_seed = derive_seed(seed, i as u64);
            let counts = sample_counts(&compute_distribution(s)?, total, point_seed)?;
            estimate_witnesses(&counts, bootstrap_resamples, point_seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ideal_scenario;

    #[test]
    fn sampling_is_deterministic() {
        let d = compute_distribution(&ideal_scenario()).unwrap();
        let a = sample_counts(&d, 4700, 11).unwrap();
        let b = sample_counts(&d, 4700, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_counts(&d, 4700, 12).unwrap());
        assert_eq!(a.n.iter().flatten().flatten().flatten().flatten().sum::<u64>(), 4700);
    }

    #[test]
    fn point_mass_counts_land_in_one_cell() {
        let d = JointDistribution::point_mass(1, 2, 0);
        let t = sample_counts(&d, 1000, 3).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(t.n[x][z][1][2][0], t.context_total(x, z));
            }
        }
        let est = estimate_witnesses(&t, 200, 3).unwrap();
        assert_eq!(est.se_cns, 0.0);
        assert_eq!(est.se_nsc, 0.0);
        assert_eq!(est.sigma_cns, None);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = JointDistribution::uniform();
        assert!(sample_counts(&d, 0, 1).is_err());
        let bad = JointDistribution::from_fn(|_, _, _, _, _| 0.1);
        assert!(matches!(sample_counts(&bad, 10, 1), Err(Error::MalformedDistribution(_))));
        let t = sample_counts(&d, 1000, 1).unwrap();
        assert!(estimate_witnesses(&t, 99, 1).is_err());
    }

    #[test]
    fn empty_context_is_an_error() {
        let events = [Event { x: 0, z: 0, a: 0, b: 0, c: 0 }];
        let t = CountTable::from_events(&events).unwrap();
        assert_eq!(t.empty_contexts().len(), 3);
        assert!(matches!(estimate_witnesses(&t, 100, 0), Err(Error::EmptyContext { x: 0, z: 1 })));
    }

    #[test]
    fn sigma_of_reference_numbers() {
        let s = sigma_distance(3.3212, 0.0638).unwrap();
        assert!((s - 5.03).abs() < 5e-3 && s > 5.0);
        assert_eq!(sigma_distance(3.1, 0.0), None);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn csv_has_header_and_48_rows() {
        let t = sample_counts(&JointDistribution::uniform(), 100, 5).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 49);
        assert!(csv.starts_with("x,z,a,b,c,count\n"));
    }

    #[test]
    fn sweep_errors() {
        assert!(sweep_experiment(&[], 10, 1, 100).is_err());
        assert!(sweep_experiment(&[ideal_scenario()], 0, 1, 100).is_err());
    }
}
