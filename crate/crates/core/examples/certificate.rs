//! Expansivity certificate on the forced linear system: thresholds from a
//! short record, exhaustive search on a longer one. Without coupling the
//! response embedding folds the driver and a witness turns up; with coupling
//! none does. Then the full verdict with empirical thresholds on Hénon maps.
//!
//!     cargo run --release --example certificate

use closeness::causal_tests::{calibrated_certificate, test_direction, Direction, TestSettings};
use closeness::dynamics::{example1_with_coupling, simulate_linear, SystemKind};
use closeness::isometry::{AttractorViews, ObservationSpec};
use closeness::pipeline::{observe, EmbeddingSpec, SimulationSpec};

fn linear_views(c: f64, t_prime: usize, m: usize) -> closeness::Result<AttractorViews> {
    let (sys, _) = example1_with_coupling(c, 7)?;
    let (_, set) = example1_with_coupling(1.0, 7)?;
    let traj = simulate_linear(&sys, &sys.unit_modal_state()?, 1.0, t_prime + m - 1)?;
    AttractorViews::build(&traj, &ObservationSpec::linear(&set, m), m, 1)
}

fn main() -> closeness::Result<()> {
    let m = 250;
    for c in [0.0, 1.0] {
        let (thr, witness) = calibrated_certificate(
            &linear_views(c, 150, m)?,
            &linear_views(c, 2000, m)?,
            50_000,
            7,
        )?;
        println!(
            "linear C = {c}: threshold {:.4e}, witness {witness:?}",
            thr.threshold
        );
    }

    let sim = SimulationSpec::for_kind(SystemKind::HenonHenon, 4000);
    let emb = EmbeddingSpec::for_kind(SystemKind::HenonHenon);
    for c in [0.0, 0.4] {
        let (_, views) = observe(&sim, &emb, c, 3)?;
        let settings = TestSettings {
            n_pairs: 5000,
            seed: 3,
            assumption2_declared: true,
            check_assumption1: true,
        };
        for dir in [Direction::XtoY, Direction::YtoX] {
            let v = test_direction(&views, dir, &settings)?;
            println!(
                "henon C = {c} {}: {:?} (threshold {:?})",
                dir.label(),
                v.outcome,
                v.threshold.map(|t| t.threshold)
            );
        }
    }
    Ok(())
}
