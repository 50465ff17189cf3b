//! Simulate → observe plumbing shared by the sweeps, the runner and the
//! examples.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    self, example1_with_coupling, OdeOptions, SystemKind, SystemModel, SystemParams, Trajectory,
};
use crate::error::{Error, Result};
use crate::isometry::{AttractorViews, ObservationSpec};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub kind: SystemKind,
    /// Coupling used when no grid is swept.
    #[serde(default)]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_condition: Option<Vec<f64>>,
    pub n_samples: usize,
    pub n_transient: usize,
    /// Sampling period; defaults per system kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_y: Option<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
}

fn default_rel_tol() -> f64 {
    OdeOptions::default().rel_tol
}

fn default_abs_tol() -> f64 {
    OdeOptions::default().abs_tol
}

pub fn default_dt(kind: SystemKind) -> f64 {
    match kind {
        SystemKind::HenonHenon | SystemKind::LinearForced => 1.0,
        SystemKind::RosslerLorenz => 0.025,
        SystemKind::RosslerRossler => 0.1,
    }
}

impl SimulationSpec {
    /// Spec with the default sampling and transient for a system kind.
    pub fn for_kind(kind: SystemKind, n_samples: usize) -> Self {
        SimulationSpec {
            kind,
            coupling: 0.0,
            initial_condition: None,
            n_samples,
            n_transient: if kind == SystemKind::LinearForced {
                0
            } else {
                1000
            },
            dt: None,
            omega1: None,
            omega2: None,
            theta_x: None,
            theta_y: None,
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(self.kind))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::validation("n_samples must be positive"));
        }
        if !(self.dt() > 0.0) {
            return Err(Error::validation("dt must be positive"));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::validation("tolerances must be positive"));
        }
        if let Some(x0) = &self.initial_condition {
            let (a, b) = self.kind.dims();
            if x0.len() != a + b {
                return Err(Error::validation(format!(
                    "initial_condition has {} entries, {} needs {}",
                    x0.len(),
                    self.kind.label(),
                    a + b
                )));
            }
        }
        self.model(self.coupling).map(|_| ())
    }

    pub fn model(&self, c: f64) -> Result<SystemModel> {
        let params = match self.kind {
            SystemKind::HenonHenon | SystemKind::RosslerLorenz => SystemParams::None,
            SystemKind::RosslerRossler => SystemParams::RosslerRossler {
                omega1: self.omega1.unwrap_or(1.015),
                omega2: self.omega2.unwrap_or(0.985),
            },
            SystemKind::LinearForced => SystemParams::LinearForced {
                theta_x: self.theta_x.unwrap_or(dynamics::example1::THETA_X),
                theta_y: self.theta_y.unwrap_or(dynamics::example1::THETA_Y),
            },
        };
        SystemModel::new(self.kind, c, params)
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..OdeOptions::default()
        }
    }

    pub fn simulate(&self, c: f64) -> Result<Trajectory> {
        let model = self.model(c)?;
        dynamics::simulate_model(
            &model,
            self.initial_condition.as_deref(),
            self.dt(),
            self.n_samples,
            self.n_transient,
            &self.ode_options(),
        )
    }

    /// Measurement functions for this system. Linear systems draw their
    /// measurement perturbations from `seed`, independent of `c`.
    pub fn observations(&self, m: usize, seed: u64) -> Result<ObservationSpec> {
        match self.kind {
            SystemKind::LinearForced => {
                let (_, set) = example1_with_coupling(1.0, measurement_seed(seed))?;
                Ok(ObservationSpec::linear(&set, m))
            }
            kind => Ok(ObservationSpec::first_coordinates(kind.dims().0)),
        }
    }
}

/// Seed for the linear measurement perturbations under a master seed.
pub fn measurement_seed(master: u64) -> u64 {
    rng::derive_seed(master, &[rng::label_key("measurement")])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub m: usize,
    pub tau: usize,
    #[serde(default)]
    pub theiler_window: usize,
}

impl EmbeddingSpec {
    /// Defaults: `m = 4, τ = 1, W = 0` for maps, `m = 6, τ = 8, W = 10` for
    /// flows, and `m = 250, τ = 1` for the linear system.
    pub fn for_kind(kind: SystemKind) -> Self {
        match kind {
            SystemKind::HenonHenon => EmbeddingSpec {
                m: 4,
                tau: 1,
                theiler_window: 0,
            },
            SystemKind::RosslerLorenz | SystemKind::RosslerRossler => EmbeddingSpec {
                m: 6,
                tau: 8,
                theiler_window: 10,
            },
            SystemKind::LinearForced => EmbeddingSpec {
                m: 250,
                tau: 1,
                theiler_window: 0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.tau == 0 {
            return Err(Error::validation("embedding m and tau must be positive"));
        }
        Ok(())
    }
}

/// Simulates at coupling `c` and builds all attractor views.
pub fn observe(
    sim: &SimulationSpec,
    emb: &EmbeddingSpec,
    c: f64,
    seed: u64,
) -> Result<(Trajectory, AttractorViews)> {
    let traj = sim.simulate(c)?;
    let obs = sim.observations(emb.m, seed)?;
    let views = AttractorViews::build(&traj, &obs, emb.m, emb.tau)?;
    Ok((traj, views))
}
