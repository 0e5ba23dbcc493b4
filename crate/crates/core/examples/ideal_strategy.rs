//! Witness values for the ideal strategy and at the measured noise levels.
//!
//! `cargo run --example ideal_strategy`

use fnn_workbench::born::{compute_distribution, correlators};
use fnn_workbench::scenario::{ideal_scenario, measured_noise_scenario};
use fnn_workbench::witness::evaluate;

fn main() -> fnn_workbench::Result<()> {
    for (name, s) in [("ideal", ideal_scenario()), ("measured noise", measured_noise_scenario())] {
        let c = correlators(&compute_distribution(&s)?);
        let r = evaluate(&c)?;
        println!("{name}:");
        println!("  <A1 B0 C0> = {:+.6}  <B0> = {:+.6}  <C1> = {:+.6}", c.abc[1][0][0], c.b0, c.c[1]);
        println!("  R_C-NS = {:.6}  R_NS-C = {:.6}  certified = {}", r.r_cns, r.r_nsc, r.fnn_certified);
    }
    println!("5/sqrt(2) = {:.6}", 5.0 / 2f64.sqrt());
    Ok(())
}
