//! Distance preservation of the maps between attractors and their delay
//! embeddings: empirical ratio profiles and closed-form linear bounds.

mod analytic;
mod empirical;
mod maps;
mod sweep;

pub use analytic::{analytic_linear_bounds, nu, phi_matrix, PhiMatrix, TheoremBound, RANK_TOL};
pub use empirical::{
    all_pairs, empirical_isometry, exact_isometry, pair_ratios, percentile, sample_pairs,
    IsometryEstimate, MIN_DOMAIN_DISTANCE,
};
pub use maps::{AttractorViews, MapKind, MapUnderTest, ObservationSpec};
pub use sweep::{cell_seed, distance_ratio_sweep, sweep_cell, SweepRecord};

use serde::Serialize;

use crate::error::Result;

/// Extremes of the factors of `Ψ_{y→x} = Φ_{γ_x} ∘ π_x ∘ Φ_{φ_y}⁻¹`, all
/// evaluated on one shared set of pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub psi_max: f64,
    pub gamma_x_max: f64,
    pub pi_x_max: f64,
    pub phi_y_min: f64,
    pub n_pairs: usize,
}

impl ChainCheck {
    pub fn bound(&self) -> f64 {
        self.gamma_x_max * self.pi_x_max / self.phi_y_min
    }

    /// The factorization bound, allowing `rel_slack` for rounding in the
    /// separately computed ratios.
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.psi_max <= self.bound() * (1.0 + rel_slack)
    }
}

pub fn chain_check(views: &AttractorViews, n_pairs: usize, seed: u64) -> Result<ChainCheck> {
    let psi = views.map(MapKind::PsiYtoX)?;
    let gx = views.map(MapKind::PhiGammaX)?;
    let px = views.map(MapKind::PiX)?;
    let py = views.map(MapKind::PhiPhiY)?;
    let pairs = sample_pairs(&[psi.domain, gx.domain, px.domain], n_pairs, seed)?;
    let max = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    Ok(ChainCheck {
        psi_max: max(pair_ratios(&psi, &pairs)),
        gamma_x_max: max(pair_ratios(&gx, &pairs)),
        pi_x_max: max(pair_ratios(&px, &pairs)),
        phi_y_min: min(pair_ratios(&py, &pairs)),
        n_pairs: pairs.len(),
    })
}
