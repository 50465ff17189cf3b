//! Simulation of the benchmark coupled systems.

pub mod dopri;
pub mod example1;
pub mod linear;
pub mod systems;
pub mod trajectory;

pub use dopri::OdeOptions;
pub use example1::{example1_system, example1_with_coupling, MeasurementSet};
pub use linear::{simulate_linear, LinearSystemAd, ModalBlock};
pub use systems::{SystemKind, SystemModel, SystemParams};
pub use trajectory::{Trajectory, TrajectoryMeta};

use crate::error::{Error, Result};

/// Any state component beyond this magnitude is treated as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e10;

fn check_initial(model: &SystemModel, x0: &[f64]) -> Result<()> {
    if x0.len() != model.dim() {
        return Err(Error::validation(format!(
            "initial state has length {}, {} needs {}",
            x0.len(),
            model.kind.label(),
            model.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("initial state is not finite"));
    }
    Ok(())
}

/// Iterates a discrete map from `x0`, drops the first `n_transient` states
/// (including `x0`) and keeps the next `n_samples`.
pub fn iterate_map(
    model: &SystemModel,
    x0: &[f64],
    n_samples: usize,
    n_transient: usize,
) -> Result<Trajectory> {
    if !model.kind.is_discrete() {
        return Err(Error::validation(format!(
            "{} is not a discrete map",
            model.kind.label()
        )));
    }
    check_initial(model, x0)?;
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be positive"));
    }
    let n = model.dim();
    let mut state = x0.to_vec();
    let mut next = vec![0.0; n];
    let mut samples = Vec::with_capacity(n * n_samples);
    for step in 0..n_transient + n_samples {
        if step >= n_transient {
            samples.extend_from_slice(&state);
        }
        if step + 1 == n_transient + n_samples {
            break;
        }
        model.map_step(&state, &mut next);
        if next
            .iter()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_GUARD)
        {
            return Err(Error::Divergence {
                step: step + 1,
                guard: DIVERGENCE_GUARD,
            });
        }
        std::mem::swap(&mut state, &mut next);
    }
    Trajectory::new(
        samples,
        (model.state_dim_x, model.state_dim_y),
        1.0,
        n_transient,
    )
}

/// Integrates a flow and samples it on the grid `t = k·dt`, discarding the
/// first `n_transient` grid samples.
pub fn integrate_ode(
    model: &SystemModel,
    x0: &[f64],
    dt: f64,
    n_samples: usize,
    n_transient: usize,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    if !model.kind.is_continuous() {
        return Err(Error::validation(format!(
            "{} is not a flow",
            model.kind.label()
        )));
    }
    check_initial(model, x0)?;
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be positive"));
    }
    let rhs = |_t: f64, s: &[f64], ds: &mut [f64]| model.vector_field(s, ds);
    let all = dopri::sample_uniform(rhs, x0, dt, n_transient + n_samples, opts)?;
    let n = model.dim();
    Trajectory::new(
        all[n * n_transient..].to_vec(),
        (model.state_dim_x, model.state_dim_y),
        dt,
        n_transient,
    )
}

/// Simulates any benchmark model with its own default sampling conventions.
/// `x0 = None` uses the kind's default initial condition. For the linear
/// system `dt` is the sampling interval and the start state is `V·1`.
pub fn simulate_model(
    model: &SystemModel,
    x0: Option<&[f64]>,
    dt: f64,
    n_samples: usize,
    n_transient: usize,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let default_x0 = model.kind.default_initial_condition();
    match model.kind {
        SystemKind::HenonHenon => {
            iterate_map(model, x0.unwrap_or(&default_x0), n_samples, n_transient)
        }
        SystemKind::RosslerLorenz | SystemKind::RosslerRossler => integrate_ode(
            model,
            x0.unwrap_or(&default_x0),
            dt,
            n_samples,
            n_transient,
            opts,
        ),
        SystemKind::LinearForced => {
            let sys = linear_from_model(model)?;
            let z0 = match x0 {
                Some(z) => z.to_vec(),
                None => sys.unit_modal_state()?,
            };
            let full = simulate_linear(&sys, &z0, dt, n_transient + n_samples)?;
            let n = sys.n();
            Trajectory::new(
                full.samples()[n * n_transient..].to_vec(),
                sys.block_dims(),
                dt,
                n_transient,
            )
        }
    }
}

/// Class member for a `LinearForced` model; coupling scales the response
/// part of the driver eigenvectors.
pub fn linear_from_model(model: &SystemModel) -> Result<LinearSystemAd> {
    match model.params {
        SystemParams::LinearForced { theta_x, theta_y } => LinearSystemAd::build(
            &example1::example1_v(model.coupling_strength),
            &[theta_x, theta_y],
            &[],
            (2, 2),
        ),
        _ => Err(Error::validation(format!(
            "{} is not a linear system",
            model.kind.label()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn henon_one_step_by_hand() {
        let model = SystemModel::henon_henon(0.0).unwrap();
        let traj = iterate_map(&model, &[0.7, 0.0, 0.91, 0.7], 2, 0).unwrap();
        let expect = [0.91, 0.7, 0.7819, 0.91];
        for (a, b) in traj.row(1).iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(traj.row(0), &[0.7, 0.0, 0.91, 0.7]);
    }

    #[test]
    fn henon_synchronization_manifold_is_invariant() {
        for c in [0.0, 0.3, 0.77, 1.0] {
            let model = SystemModel::henon_henon(c).unwrap();
            let traj = iterate_map(&model, &[0.1, 0.2, 0.1, 0.2], 2000, 0).unwrap();
            for t in 0..traj.len() {
                assert_eq!(traj.x(t), traj.y(t));
            }
        }
    }

    #[test]
    fn transient_is_dropped() {
        let model = SystemModel::henon_henon(0.2).unwrap();
        let x0 = [0.7, 0.0, 0.91, 0.7];
        let long = iterate_map(&model, &x0, 1100, 0).unwrap();
        let short = iterate_map(&model, &x0, 100, 1000).unwrap();
        assert_eq!(short.transient_discarded, 1000);
        assert_eq!(short.len(), 100);
        assert_eq!(short.row(0), long.row(1000));
        assert_eq!(short.row(99), long.row(1099));
    }

    #[test]
    fn divergence_names_the_step() {
        let model = SystemModel::henon_henon(0.0).unwrap();
        match iterate_map(&model, &[10.0, 0.0, 0.0, 0.0], 100, 0) {
            Err(Error::Divergence { step, .. }) => assert!(step > 0 && step < 10),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn flow_rejected_by_map_iteration() {
        let model = SystemModel::rossler_lorenz(1.0).unwrap();
        assert!(iterate_map(&model, &model.kind.default_initial_condition(), 10, 0).is_err());
    }

    #[test]
    fn rossler_lorenz_stays_bounded() {
        let model = SystemModel::rossler_lorenz(1.0).unwrap();
        let x0 = model.kind.default_initial_condition();
        let traj = integrate_ode(&model, &x0, 0.025, 400, 200, &OdeOptions::default()).unwrap();
        assert_eq!(traj.len(), 400);
        assert_eq!(traj.dt, 0.025);
        assert!(traj.samples().iter().all(|v| v.abs() < 100.0));
    }

    #[test]
    fn ode_transient_matches_longer_run() {
        let model = SystemModel::rossler_rossler(0.1).unwrap();
        let x0 = model.kind.default_initial_condition();
        let opts = OdeOptions::default();
        let a = integrate_ode(&model, &x0, 0.1, 50, 20, &opts).unwrap();
        let b = integrate_ode(&model, &x0, 0.1, 70, 0, &opts).unwrap();
        assert_eq!(a.row(0), b.row(20));
    }

    #[test]
    fn linear_model_defaults_to_unit_modal_state() {
        let model = SystemModel::linear_forced(1.0, 2.3129, 0.1765).unwrap();
        let traj = simulate_model(&model, None, 1.0, 10, 0, &OdeOptions::default()).unwrap();
        let sys = linear_from_model(&model).unwrap();
        let z0 = sys.unit_modal_state().unwrap();
        for (a, b) in traj.row(0).iter().zip(&z0) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
