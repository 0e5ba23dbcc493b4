//! Witness curves along the first source angle at the measured noise levels.
//!
//! `cargo run --example noise_sweep`

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use fnn_workbench::scenario::{MEASURED_V1, MEASURED_V2, MEASURED_VH};
use fnn_workbench::witness::{linear_grid, theory_curve};

fn main() -> fnn_workbench::Result<()> {
    let grid = linear_grid(0.0, FRAC_PI_2, 9);
    println!("{:>10} {:>10} {:>10}  both violated", "alpha1/pi", "R_C-NS", "R_NS-C");
    for p in theory_curve(MEASURED_V1, MEASURED_V2, MEASURED_VH, &grid, &[FRAC_PI_4])? {
        println!(
            "{:>10.4} {:>10.6} {:>10.6}  {}",
            p.alpha1 / std::f64::consts::PI,
            p.r_cns,
            p.r_nsc,
            p.violated_cns && p.violated_nsc
        );
    }
    Ok(())
}
