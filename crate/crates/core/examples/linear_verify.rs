//! Analytic vs empirical isometry constants for the forced linear example,
//! plus the certificate test with analytic thresholds.
//!
//!     cargo run --release --example linear_verify

use closeness::causal_tests::{expansivity_certificate, CertificateThreshold};
use closeness::dynamics::{example1_system, simulate_linear};
use closeness::isometry::{
    analytic_linear_bounds, empirical_isometry, phi_matrix, AttractorViews, MapKind,
    ObservationSpec,
};

fn main() -> closeness::Result<()> {
    let (m, n_pairs, seed) = (250, 50_000, 7);
    let (sys, meas) = example1_system(seed)?;
    let traj = simulate_linear(&sys, &sys.unit_modal_state()?, 1.0, 10_000)?;
    let views = AttractorViews::build(&traj, &ObservationSpec::linear(&meas, m), m, 1)?;

    let sub = sys.x_subsystem()?;
    let gx = analytic_linear_bounds(&sub, &meas.h_gamma_x(m), m, 1.0)?;
    let py = analytic_linear_bounds(&sys, &meas.h_phi_y(m), m, 1.0)?;
    let pxy = analytic_linear_bounds(&sys, &meas.h_phi_xy(m), m, 1.0)?;

    println!(
        "{:<10} {:>10} {:>10} {:>10} {:>10}",
        "map", "an_lower", "an_upper", "emp_lower", "emp_upper"
    );
    for kind in [
        MapKind::PhiGammaX,
        MapKind::PhiPhiY,
        MapKind::PhiPhiXY,
        MapKind::PhiGammaY,
        MapKind::PhiPhiX,
        MapKind::PsiYtoX,
        MapKind::PsiXtoY,
    ] {
        let est = empirical_isometry(&views.map(kind)?, n_pairs, seed)?;
        let analytic = match kind {
            MapKind::PhiGammaX => Some(&gx),
            MapKind::PhiPhiY => Some(&py),
            MapKind::PhiPhiXY => Some(&pxy),
            _ => None,
        };
        let (lo, hi) = analytic.map_or((f64::NAN, f64::NAN), |b| (b.lower(), b.upper()));
        println!(
            "{:<10} {lo:>10.4} {hi:>10.4} {:>10.4} {:>10.4}",
            kind.label(),
            est.lower,
            est.upper
        );
    }

    let thr = CertificateThreshold::analytic(&gx, &py)?;
    let psi = views.map(MapKind::PsiYtoX)?;
    let witness = expansivity_certificate(&psi, views.start_time, &thr, n_pairs, seed)?;
    println!(
        "threshold u_gx/l_py = {:.4}, witness: {witness:?}",
        thr.threshold
    );

    let rank = phi_matrix(&sys, &meas.h_phi_y(m), m, 1.0)?.rank;
    println!("rank of response delay map: {rank} of {}", sys.n());
    Ok(())
}
