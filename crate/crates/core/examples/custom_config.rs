//! Runs workbench commands from an in-memory JSON configuration.
//!
//! `cargo run --example custom_config`

use fnn_workbench::cli::{cmd_sweep, cmd_theory, RunOptions};
use fnn_workbench::config::WorkbenchConfig;

fn main() -> fnn_workbench::Result<()> {
    let cfg = WorkbenchConfig::from_json(
        r#"{
            "scenario": {"visibility1": 0.99, "visibility2": 0.99, "hom_visibility": 0.9, "alpha1": "0.25pi"},
            "sweep": {"alpha1_min": "0.125pi", "alpha1_max": "0.375pi", "points": 5}
        }"#,
    )?;
    println!("config hash {}", cfg.hash());
    let mut out = std::io::stdout();
    cmd_theory(&cfg, &RunOptions::default(), &mut out)?;
    cmd_sweep(&cfg, &RunOptions::default(), &mut out)?;
    Ok(())
}
