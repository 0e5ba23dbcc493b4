//! Simulated experiments with bootstrap error bars.
//!
//! `cargo run --release --example finite_statistics`

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use fnn_workbench::born::compute_distribution;
use fnn_workbench::scenario::{default_paper_scenario, measured_noise_scenario, MEASURED_V1, MEASURED_V2, MEASURED_VH};
use fnn_workbench::stats::{estimate_witnesses, sample_counts, sigma_distance, sweep_experiment, DEFAULT_RESAMPLES};
use fnn_workbench::witness::linear_grid;

fn main() -> fnn_workbench::Result<()> {
    let d = compute_distribution(&measured_noise_scenario())?;
    let counts = sample_counts(&d, 4700, 1)?;
    let e = estimate_witnesses(&counts, DEFAULT_RESAMPLES, 1)?;
    println!("4700 events: R_C-NS = {:.4} ± {:.4}, R_NS-C = {:.4} ± {:.4}", e.r_cns_hat, e.se_cns, e.r_nsc_hat, e.se_nsc);
    println!("reference value 3.3212 ± 0.0638 is {:.2} sigma above 3", sigma_distance(3.3212, 0.0638).unwrap_or(f64::NAN));

    let scenarios = linear_grid(0.0, FRAC_PI_2, 9)
        .into_iter()
        .map(|a| default_paper_scenario(MEASURED_V1, MEASURED_V2, MEASURED_VH, a, FRAC_PI_4))
        .collect::<fnn_workbench::Result<Vec<_>>>()?;
    for (k, e) in sweep_experiment(&scenarios, 4700, 7, DEFAULT_RESAMPLES)?.iter().enumerate() {
        println!(
            "alpha1 = {k}pi/16: {:.3} ± {:.3}  {:.3} ± {:.3}",
            e.r_cns_hat, e.se_cns, e.r_nsc_hat, e.se_nsc
        );
    }
    Ok(())
}
