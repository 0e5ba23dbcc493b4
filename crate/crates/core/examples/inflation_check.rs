//! Builds the inflated distribution of a hybrid model and checks the
//! identities that bound the witnesses.
//!
//! `cargo run --example inflation_check`

use fnn_workbench::models::{inflation_identities, random_model};
use fnn_workbench::witness::Witness;

fn main() -> fnn_workbench::Result<()> {
    for kind in [Witness::Cns, Witness::Nsc] {
        let r = inflation_identities(&random_model(kind, 3, 42)?)?;
        println!("{} = {:.6}", kind.label(), r.witness_value);
        println!("  identity residual {:.1e}, factorization residual {:.1e}", r.max_identity_residual, r.factorization_residual);
        for (b, t) in r.outcomes.iter().enumerate() {
            match (t.value, t.bound) {
                (Some(v), Some(bound)) => println!("  b={b}: p = {:.4}, T = {v:+.4} <= {bound:.4}", t.probability),
                _ => println!("  b={b}: never observed"),
            }
        }
        println!("  sum of p_b T_b differs from the witness by {:.1e}", r.decomposition_residual);
    }
    Ok(())
}
