//! Benchmark coupled systems. In each, `x` drives `y` with strength `C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which benchmark family a [`SystemModel`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// Identical unidirectionally coupled Hénon maps.
    HenonHenon,
    /// Rössler driver coupled into a Lorenz response.
    RosslerLorenz,
    /// Nonidentical unidirectionally coupled Rössler systems.
    RosslerRossler,
    /// Forced linear oscillator system with eigen-structure of the worked
    /// two-frequency example.
    LinearForced,
}

impl SystemKind {
    pub fn label(self) -> &'static str {
        match self {
            SystemKind::HenonHenon => "henon-henon",
            SystemKind::RosslerLorenz => "rossler-lorenz",
            SystemKind::RosslerRossler => "rossler-rossler",
            SystemKind::LinearForced => "linear-forced",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, SystemKind::HenonHenon)
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, SystemKind::RosslerLorenz | SystemKind::RosslerRossler)
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            SystemKind::HenonHenon | SystemKind::LinearForced => (2, 2),
            SystemKind::RosslerLorenz | SystemKind::RosslerRossler => (3, 3),
        }
    }

    pub fn default_initial_condition(self) -> Vec<f64> {
        match self {
            SystemKind::HenonHenon => vec![0.7, 0.0, 0.91, 0.7],
            SystemKind::RosslerLorenz => vec![0.0, 0.0, 0.4, 0.3, 0.3, 0.3],
            SystemKind::RosslerRossler => vec![0.0, 0.0, 0.4, 0.0, 0.0, 0.4],
            // The linear system starts from V·1, built by the linear module.
            SystemKind::LinearForced => Vec::new(),
        }
    }
}

/// Kind-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SystemParams {
    None,
    RosslerRossler { omega1: f64, omega2: f64 },
    LinearForced { theta_x: f64, theta_y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    pub kind: SystemKind,
    /// Coupling strength `C >= 0` from driver to response.
    pub coupling_strength: f64,
    pub params: SystemParams,
    pub state_dim_x: usize,
    pub state_dim_y: usize,
}

impl SystemModel {
    pub fn new(kind: SystemKind, coupling_strength: f64, params: SystemParams) -> Result<Self> {
        if !(coupling_strength >= 0.0) || !coupling_strength.is_finite() {
            return Err(Error::validation(format!(
                "coupling strength must be finite and >= 0, got {coupling_strength}"
            )));
        }
        let params_ok = matches!(
            (kind, params),
            (
                SystemKind::HenonHenon | SystemKind::RosslerLorenz,
                SystemParams::None
            ) | (
                SystemKind::RosslerRossler,
                SystemParams::RosslerRossler { .. }
            ) | (SystemKind::LinearForced, SystemParams::LinearForced { .. })
        );
        if !params_ok {
            return Err(Error::validation(format!(
                "parameters {params:?} do not belong to system kind {}",
                kind.label()
            )));
        }
        let (state_dim_x, state_dim_y) = kind.dims();
        Ok(SystemModel {
            kind,
            coupling_strength,
            params,
            state_dim_x,
            state_dim_y,
        })
    }

    pub fn henon_henon(c: f64) -> Result<Self> {
        Self::new(SystemKind::HenonHenon, c, SystemParams::None)
    }

    pub fn rossler_lorenz(c: f64) -> Result<Self> {
        Self::new(SystemKind::RosslerLorenz, c, SystemParams::None)
    }

    pub fn rossler_rossler(c: f64) -> Result<Self> {
        Self::new(
            SystemKind::RosslerRossler,
            c,
            SystemParams::RosslerRossler {
                omega1: 1.015,
                omega2: 0.985,
            },
        )
    }

    pub fn linear_forced(c: f64, theta_x: f64, theta_y: f64) -> Result<Self> {
        Self::new(
            SystemKind::LinearForced,
            c,
            SystemParams::LinearForced { theta_x, theta_y },
        )
    }

    pub fn dim(&self) -> usize {
        self.state_dim_x + self.state_dim_y
    }

    /// One application of a discrete map.
    pub(crate) fn map_step(&self, s: &[f64], out: &mut [f64]) {
        debug_assert_eq!(self.kind, SystemKind::HenonHenon);
        let c = self.coupling_strength;
        let (x1, x2, y1, y2) = (s[0], s[1], s[2], s[3]);
        out[0] = 1.4 - x1 * x1 + 0.3 * x2;
        out[1] = x1;
        // C·x1·y1 + (1 - C)·y1² written so that x1 = y1 reproduces the driver
        // update bit for bit.
        out[2] = 1.4 - (y1 * y1 + c * y1 * (x1 - y1)) + 0.3 * y2;
        out[3] = y1;
    }

    /// Vector field of a continuous-time system.
    pub(crate) fn vector_field(&self, s: &[f64], ds: &mut [f64]) {
        let c = self.coupling_strength;
        match (self.kind, self.params) {
            (SystemKind::RosslerLorenz, _) => {
                let (x1, x2, x3, y1, y2, y3) = (s[0], s[1], s[2], s[3], s[4], s[5]);
                ds[0] = -6.0 * (x2 + x3);
                ds[1] = 6.0 * (x1 + 0.2 * x2);
                ds[2] = 6.0 * (0.2 + x3 * (x1 - 5.7));
                ds[3] = 10.0 * (-y1 + y2);
                ds[4] = 28.0 * y1 - y2 - y1 * y3 + c * x2 * x2;
                ds[5] = y1 * y2 - 8.0 / 3.0 * y3;
            }
            (SystemKind::RosslerRossler, SystemParams::RosslerRossler { omega1, omega2 }) => {
                let (x1, x2, x3, y1, y2, y3) = (s[0], s[1], s[2], s[3], s[4], s[5]);
                ds[0] = -omega1 * x2 - x3;
                ds[1] = omega1 * x1 + 0.15 * x2;
                ds[2] = 0.2 + x3 * (x1 - 10.0);
                ds[3] = -omega2 * y2 - y3 + c * (x1 - y1);
                ds[4] = omega2 * y1 + 0.15 * y2;
                ds[5] = 0.2 + y3 * (y1 - 10.0);
            }
            _ => unreachable!("vector_field called on a non-flow system"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_coupling_rejected() {
        assert!(SystemModel::henon_henon(-0.1).is_err());
    }

    #[test]
    fn mismatched_params_rejected() {
        let err = SystemModel::new(
            SystemKind::HenonHenon,
            0.1,
            SystemParams::LinearForced {
                theta_x: 1.0,
                theta_y: 2.0,
            },
        );
        assert!(err.is_err());
    }

    #[test]
    fn dims_match_kind() {
        assert_eq!(SystemModel::henon_henon(0.0).unwrap().dim(), 4);
        assert_eq!(SystemModel::rossler_lorenz(0.0).unwrap().dim(), 6);
        let rr = SystemModel::rossler_rossler(0.0).unwrap();
        assert_eq!((rr.state_dim_x, rr.state_dim_y), (3, 3));
    }

    #[test]
    fn uncoupled_lorenz_has_no_driver_term() {
        let m = SystemModel::rossler_lorenz(0.0).unwrap();
        let mut a = [0.0; 6];
        let mut b = [0.0; 6];
        m.vector_field(&[1.0, 2.0, 3.0, 0.5, 0.5, 0.5], &mut a);
        m.vector_field(&[-4.0, 7.0, 1.0, 0.5, 0.5, 0.5], &mut b);
        assert_eq!(a[3..], b[3..]);
    }
}
