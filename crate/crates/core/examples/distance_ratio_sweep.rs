//! Percentiles of squared-distance ratios of the attractor and embedding maps
//! as the Hénon coupling increases.
//!
//!     cargo run --release --example distance_ratio_sweep

use closeness::dynamics::SystemKind;
use closeness::isometry::{distance_ratio_sweep, MapKind};
use closeness::pipeline::{EmbeddingSpec, SimulationSpec};

fn main() -> closeness::Result<()> {
    let sim = SimulationSpec::for_kind(SystemKind::HenonHenon, 10_000);
    let emb = EmbeddingSpec::for_kind(SystemKind::HenonHenon);
    let grid = [0.0, 0.2, 0.4, 0.6, 0.7];
    let maps = [
        MapKind::PhiGammaX,
        MapKind::PhiPhiY,
        MapKind::PiX,
        MapKind::PsiYtoX,
    ];
    let records = distance_ratio_sweep(&sim, &emb, &grid, &maps, 5000, 1)?;
    println!(
        "{:<5} {:<10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "C", "map", "lower", "p5", "p50", "p95", "upper"
    );
    for r in &records {
        let e = &r.estimate;
        println!(
            "{:<5} {:<10} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            r.c,
            r.map.label(),
            e.lower,
            e.p5,
            e.p50,
            e.p95,
            e.upper
        );
    }
    Ok(())
}
