//! Searches hybrid classical/no-signaling models for values above 3.
//!
//! `cargo run --release --example bound_certification`

use fnn_workbench::models::{maximize_witness, random_model};
use fnn_workbench::stats::derive_seed;
use fnn_workbench::witness::Witness;

fn main() -> fnn_workbench::Result<()> {
    for kind in [Witness::Cns, Witness::Nsc] {
        let mut random_max = f64::NEG_INFINITY;
        for i in 0..1000 {
            let m = random_model(kind, 1 + (i % 8) as usize, derive_seed(1, i))?;
            random_max = random_max.max(m.witness_value()?);
        }
        let opt = maximize_witness(kind, 4, 32, 100, 1)?;
        let m = &opt.best_model;
        let top = (0..m.n_lambda()).max_by(|&a, &b| m.weights[a].total_cmp(&m.weights[b])).unwrap_or(0);
        println!("{}: random max {random_max:.6}, seesaw max {:.12}", kind.label(), opt.best_value);
        println!("  dominant response {:?} with weight {:.3}", m.responses[top], m.weights[top]);
    }
    Ok(())
}
