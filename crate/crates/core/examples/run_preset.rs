//! Runs a built-in experiment preset through the batch runner and prints a
//! few merged records. Same as `closeness sweep --preset <name>`.
//!
//!     cargo run --release --example run_preset -- henon-henon out/henon

use std::path::PathBuf;

use closeness::runner::{read_records, run_sweep, ExperimentConfig};

fn main() -> closeness::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "henon-henon".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{name}")));
    let cfg = ExperimentConfig::preset(&name)?;
    let summary = run_sweep(&cfg, &out, 2)?;
    println!(
        "wrote {:?}, {} failed cells",
        summary.outputs, summary.failed_cells
    );
    for r in read_records(&out.join("results.csv"))?
        .iter()
        .filter(|r| r.map == "m" && r.stat == "delta_m")
    {
        println!("C = {:<5} delta M = {:.4}", r.c, r.value);
    }
    Ok(())
}
