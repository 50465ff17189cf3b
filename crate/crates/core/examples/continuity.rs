//! Continuity evidence for the cross map in each direction as Hénon coupling
//! grows. The response-to-driver direction should rise first.
//!
//!     cargo run --release --example continuity

use closeness::dynamics::SystemKind;
use closeness::heuristics::{continuity_curves, PecoraSettings};
use closeness::pipeline::{observe, EmbeddingSpec, SimulationSpec};

fn main() -> closeness::Result<()> {
    let sim = SimulationSpec::for_kind(SystemKind::HenonHenon, 5000);
    let emb = EmbeddingSpec::for_kind(SystemKind::HenonHenon);
    let settings = PecoraSettings::new(vec![0.02, 0.05, 0.1, 0.2], 400, emb.theiler_window);
    println!(
        "{:<5} {:>28} {:>28}",
        "C", "theta(N_y -> N_x)", "theta(N_x -> N_y)"
    );
    for c in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
        let (_, v) = observe(&sim, &emb, c, 1)?;
        let cc = continuity_curves(&v.phi_y.points, &v.gamma_x.points, &settings, 1)?;
        let show = |t: &[f64]| {
            t.iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!(
            "{c:<5} {:>28} {:>28}",
            show(&cc.forward.theta),
            show(&cc.inverse.theta)
        );
    }
    Ok(())
}
