//! Delay-embed one coordinate of the Rössler driver, then look up nearest
//! neighbors with and without a Theiler window. Without the window the
//! neighbors of a densely sampled flow are just its own recent past.
//!
//!     cargo run --release --example delay_embedding

use closeness::dynamics::SystemKind;
use closeness::embedding::{delay_embed, knn, measure, Domain, Measurement, NeighborQuery};
use closeness::pipeline::SimulationSpec;

fn main() -> closeness::Result<()> {
    let mut sim = SimulationSpec::for_kind(SystemKind::RosslerLorenz, 3000);
    sim.dt = Some(0.002);
    let traj = sim.simulate(1.0)?;
    let series = measure(&traj, &Measurement::projection(Domain::XOnly, 0))?;
    let emb = delay_embed(&series, 3, 40)?;
    println!(
        "T = {}, T' = {}, base_offset = {}",
        series.len(),
        emb.len(),
        emb.base_offset
    );
    // Rows run newest first: row i is (s[t], s[t - tau], ...), t = i + base_offset.
    for i in 0..3 {
        println!("row {i} (t = {}): {:?}", emb.time_of(i), emb.row(i));
    }
    for w in [0, 200] {
        let nn = knn(&emb, 100, &NeighborQuery::new(5, w))?;
        println!("W = {w:>3}: neighbors of row 100 -> {nn:?}");
    }
    println!(
        "{}",
        emb.to_csv().lines().take(3).collect::<Vec<_>>().join("\n")
    );
    Ok(())
}
