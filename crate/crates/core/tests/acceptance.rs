//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails at the end if any criterion failed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::time::{Duration, Instant};

use fnn_workbench::born::{compute_distribution, correlators};
use fnn_workbench::models::{inflation_identities, maximize_witness, random_model};
use fnn_workbench::scenario::{default_paper_scenario, ideal_scenario, measured_noise_scenario, MEASURED_V1, MEASURED_V2, MEASURED_VH};
use fnn_workbench::spacetime::{audit_all, compute_event_windows, SpacetimeLayout};
use fnn_workbench::stats::{derive_seed, estimate_witnesses, sample_counts, sigma_distance};
use fnn_workbench::witness::{closed_form, evaluate, linear_grid, theory_curve, Witness};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= limit;
    let ok = out.passed && in_time;
    println!(
        "criterion {n} [{}] {name}: {} ({:.3}s / {:.0}s limit)",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    ok
}

fn ideal_value() -> Outcome {
    let r = evaluate(&correlators(&compute_distribution(&ideal_scenario()).unwrap())).unwrap();
    let target = 5.0 / SQRT_2;
    let err = (r.r_cns - target).abs().max((r.r_nsc - target).abs());
    Outcome {
        passed: err <= 1e-9,
        detail: format!("R_C-NS = {:.12}, R_NS-C = {:.12}, max error {err:.1e}", r.r_cns, r.r_nsc),
    }
}

fn noisy_point() -> Outcome {
    let r = evaluate(&correlators(&compute_distribution(&measured_noise_scenario()).unwrap())).unwrap();
    let near_oracle = (r.r_cns - 3.3078).abs() <= 1e-3 && (r.r_nsc - 3.3078).abs() <= 1e-3;
    let near_measured = (r.r_cns - 3.3212).abs() <= 0.0638 && (r.r_nsc - 3.3563).abs() <= 0.0632;
    Outcome {
        passed: near_oracle && near_measured,
        detail: format!("R_C-NS = {:.6}, R_NS-C = {:.6}", r.r_cns, r.r_nsc),
    }
}

fn violation_pattern() -> Outcome {
    let grid = linear_grid(0.0, FRAC_PI_2, 9);
    let curve = theory_curve(MEASURED_V1, MEASURED_V2, MEASURED_VH, &grid, &[FRAC_PI_4]).unwrap();
    let flagged: Vec<usize> = curve
        .iter()
        .enumerate()
        .filter(|(_, p)| p.violated_cns && p.violated_nsc)
        .map(|(k, _)| k)
        .collect();
    Outcome {
        passed: flagged == [3, 4, 5],
        detail: format!("violations at grid indices {flagged:?} (multiples of pi/16)"),
    }
}

fn closed_forms() -> Outcome {
    let grid = linear_grid(0.0, FRAC_PI_2, 9);
    let mut worst: f64 = 0.0;
    for (v1, v2, vh) in [(1.0, 1.0, 1.0), (MEASURED_V1, MEASURED_V2, MEASURED_VH), (0.7, 0.55, 0.3)] {
        for p in theory_curve(v1, v2, vh, &grid, &grid).unwrap() {
            let (cf_cns, cf_nsc) = closed_form(v1, v2, vh, p.alpha1, p.alpha2);
            worst = worst.max((cf_cns - p.r_cns).abs()).max((cf_nsc - p.r_nsc).abs());
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("243 points, max |closed form - engine| = {worst:.1e}"),
    }
}

fn bound_soundness() -> Outcome {
    let mut detail = Vec::new();
    let mut passed = true;
    for kind in [Witness::Cns, Witness::Nsc] {
        let random_max = (0..1000u64)
            .map(|i| {
                let n = 1 + (i % 8) as usize;
                random_model(kind, n, derive_seed(2024, i)).unwrap().witness_value().unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let best = maximize_witness(kind, 4, 32, 100, 2024).unwrap().best_value;
        let found = random_max.max(best);
        passed &= found <= 3.0 + 1e-7 && best >= 3.0 - 1e-6;
        detail.push(format!("{}: random max {random_max:.6}, seesaw max {best:.12}", kind.label()));
    }
    Outcome {
        passed,
        detail: detail.join("; "),
    }
}

fn inflation() -> Outcome {
    let (mut ident, mut fact, mut decomp, mut excess) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for kind in [Witness::Cns, Witness::Nsc] {
        for i in 0..100u64 {
            let m = random_model(kind, 1 + (i % 6) as usize, derive_seed(77, i)).unwrap();
            let r = inflation_identities(&m).unwrap();
            ident = ident.max(r.max_identity_residual);
            fact = fact.max(r.factorization_residual);
            decomp = decomp.max(r.decomposition_residual);
            excess = excess.max(r.max_bound_excess);
        }
    }
    Outcome {
        passed: ident <= 1e-12 && fact <= 1e-12 && decomp <= 1e-10 && excess <= 1e-10,
        detail: format!("identity {ident:.1e}, factorization {fact:.1e}, decomposition {decomp:.1e}, bound excess {excess:.1e}"),
    }
}

fn finite_statistics() -> Outcome {
    let d = compute_distribution(&measured_noise_scenario()).unwrap();
    let e = estimate_witnesses(&sample_counts(&d, 4700, 1).unwrap(), 1000, 1).unwrap();
    let se_ok = (0.04..=0.10).contains(&e.se_cns) && (0.04..=0.10).contains(&e.se_nsc);
    let sigma = sigma_distance(3.3212, 0.0638).unwrap();
    let sigma_ok = (sigma - 5.03).abs() < 0.005 && sigma > 5.0;
    Outcome {
        passed: se_ok && sigma_ok,
        detail: format!("se = ({:.4}, {:.4}), reference sigma distance {sigma:.2}", e.se_cns, e.se_nsc),
    }
}

const TABLE: [(&str, &str, f64, f64); 12] = [
    ("S1", "S2", 33038.0, 392.0),
    ("QRNG_A", "S1", 2013.0, 226.0),
    ("QRNG_A", "S2", 78071.0, 617.0),
    ("QRNG_A", "M_B", 20496.0, 439.0),
    ("QRNG_A", "M_C", 132743.0, 787.0),
    ("QRNG_A", "QRNG_C", 145308.0, 771.0),
    ("M_A", "S2", 20618.0, 638.0),
    ("QRNG_C", "S1", 71833.0, 556.0),
    ("QRNG_C", "S2", 1924.0, 214.0),
    ("QRNG_C", "M_A", 110666.0, 814.0),
    ("QRNG_C", "M_B", 8412.0, 446.0),
    ("M_C", "S1", 34360.0, 571.0),
];

fn spacetime() -> Outcome {
    let layout = SpacetimeLayout::default_layout();
    let report = audit_all(&layout, 0.0).unwrap();
    let mut rows_ok = report.results.len() == TABLE.len() && report.all_spacelike;
    for (r, (a, b, v, s)) in report.results.iter().zip(TABLE) {
        rows_ok &= r.first == a && r.second == b;
        rows_ok &= (r.interval.value - v).abs() <= 2.0 && (r.interval.sigma / s - 1.0).abs() <= 0.05;
    }
    let w = compute_event_windows(&layout).unwrap();
    let get = |l: &str| w.iter().find(|e| e.label == l).unwrap();
    let round = |x: f64, places: i32| (x * 10f64.powi(places)).round() / 10f64.powi(places);
    let ma = get("M_A");
    let qa = get("QRNG_A");
    let worked = [
        (round(ma.start.value, 2), round(ma.start.sigma, 0), 862.95, 1.0),
        (round(qa.start.value, 2), round(qa.start.sigma, 1), 363.15, 2.3),
        (round(ma.end.value, 2), round(ma.end.sigma, 1), 901.35, 1.1),
    ];
    let worked_ok = worked.iter().all(|&(v, s, ev, es)| v == ev && s == es);
    Outcome {
        passed: rows_ok && worked_ok,
        detail: format!(
            "12 rows matched: {rows_ok}; T_MA = {:.2} ± {:.2}, QRNG_A start = {:.2} ± {:.2}, M_A end = {:.2} ± {:.2}",
            ma.start.value, ma.start.sigma, qa.start.value, qa.start.sigma, ma.end.value, ma.end.sigma
        ),
    }
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        check(1, "ideal strategy value", secs(1), ideal_value),
        check(2, "noisy theory point", secs(1), noisy_point),
        check(3, "nine-point violation pattern", secs(5), violation_pattern),
        check(4, "closed-form reconciliation", secs(10), closed_forms),
        check(5, "bound soundness", secs(60), bound_soundness),
        check(6, "inflation identities", secs(30), inflation),
        check(7, "finite statistics", secs(30), finite_statistics),
        check(8, "space-time audit", secs(1), spacetime),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn ideal_scenario_matches_explicit_construction() {
    let a = default_paper_scenario(1.0, 1.0, 1.0, FRAC_PI_4, FRAC_PI_4).unwrap();
    assert_eq!(a, ideal_scenario());
}
