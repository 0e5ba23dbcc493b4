//! Space-like separation audit of the default layout and of a layout with a
//! slower setting generator at Alice.
//!
//! `cargo run --example spacetime_audit`

use fnn_workbench::spacetime::{audit_all, SpacetimeLayout};

fn main() -> fnn_workbench::Result<()> {
    let layout = SpacetimeLayout::default_layout();
    let report = audit_all(&layout, 0.0)?;
    for w in &report.windows {
        println!("{:<7} {:>8.2} .. {:>8.2} ns", w.label, w.start.value, w.end.value);
    }
    for r in &report.results {
        println!("{:>7}-{:<7} ds2 = {:>9.0} ± {:>4.0} m^2", r.first, r.second, r.interval.value, r.interval.sigma);
    }
    println!("all spacelike: {}", report.all_spacelike);

    let mut slow = layout.clone();
    if let Some(d) = slow.delay_mut("QRNG_A") {
        d.value += 400.0;
    }
    let report = audit_all(&slow, 0.0)?;
    for r in report.results.iter().filter(|r| !r.spacelike) {
        println!("with +400 ns at QRNG_A, {}-{} becomes timelike ({:.0} m^2)", r.first, r.second, r.interval.value);
    }
    Ok(())
}
