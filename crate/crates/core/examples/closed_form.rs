//! Compares the closed-form witness expressions with the Born-rule engine.
//!
//! `cargo run --example closed_form`

use std::f64::consts::FRAC_PI_2;

use fnn_workbench::witness::{linear_grid, theory_curve};

fn main() -> fnn_workbench::Result<()> {
    let grid = linear_grid(0.0, FRAC_PI_2, 9);
    for (v1, v2, vh) in [(1.0, 1.0, 1.0), (0.971, 0.986, 0.943), (0.6, 0.8, 0.2)] {
        let worst = theory_curve(v1, v2, vh, &grid, &grid)?
            .iter()
            .map(|p| p.closed_form_residual.0.abs().max(p.closed_form_residual.1.abs()))
            .fold(0.0, f64::max);
        println!("v1={v1} v2={v2} vh={vh}: max residual over 81 points = {worst:.2e}");
    }
    Ok(())
}
