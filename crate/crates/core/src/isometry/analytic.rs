//! Closed-form isometry bounds for oscillatory linear systems observed through
//! a linear functional, and the matrix form of the delay map.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::dynamics::LinearSystemAd;
use crate::error::{Error, Result};

/// `|sin| ≤` this counts as a resonance.
const RESONANCE_TOL: f64 = 1e-12;
/// Relative threshold on singular values for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremBound {
    pub scale: f64,
    pub delta0: f64,
    pub delta1_of_m: f64,
    pub nu: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub a1: f64,
    pub a2: f64,
    pub m: usize,
    pub t_s: f64,
    /// Whether `m` is large enough for the bound to be guaranteed.
    pub hypothesis_m: bool,
    /// Smallest `m` satisfying the size hypothesis.
    pub m_required: f64,
    pub warnings: Vec<String>,
}

impl TheoremBound {
    pub fn delta(&self) -> f64 {
        self.delta0 + self.delta1_of_m
    }

    pub fn lower(&self) -> f64 {
        self.scale * (1.0 - self.delta())
    }

    pub fn upper(&self) -> f64 {
        self.scale * (1.0 + self.delta())
    }
}

/// The largest of `1/|sin θ_i T_s|` and, over pairs `i ≠ j`,
/// `1/|sin((θ_i ∓ θ_j) T_s / 2)|`. With one frequency only the first term
/// exists.
pub fn nu(thetas: &[f64], t_s: f64) -> Result<f64> {
    let inv = |arg: f64| -> Result<f64> {
        let s = arg.sin().abs();
        if s <= RESONANCE_TOL {
            return Err(Error::Resonance(format!(
                "sin({arg}) vanishes; choose a sampling interval off the resonance"
            )));
        }
        Ok(1.0 / s)
    };
    let mut best: f64 = 0.0;
    for (i, &a) in thetas.iter().enumerate() {
        best = best.max(inv(a * t_s)?);
        for &b in &thetas[i + 1..] {
            best = best.max(inv((a - b) * t_s / 2.0)?);
            best = best.max(inv((a + b) * t_s / 2.0)?);
        }
    }
    Ok(best)
}

pub fn analytic_linear_bounds(
    sys: &LinearSystemAd,
    h: &[f64],
    m: usize,
    t_s: f64,
) -> Result<TheoremBound> {
    if h.len() != sys.n() {
        return Err(Error::validation(format!(
            "measurement vector has length {}, system dimension is {}",
            h.len(),
            sys.n()
        )));
    }
    if m == 0 || !(t_s > 0.0) {
        return Err(Error::validation("m and T_s must be positive"));
    }
    let d = sys.d();
    let mut warnings = Vec::new();
    let target = 2.0 * d as f64 / m as f64;
    let norm2: f64 = h.iter().map(|v| v * v).sum();
    if !(norm2 > 0.0) {
        return Err(Error::validation("measurement vector is zero"));
    }
    let h: Vec<f64> = if ((norm2 - target) / target).abs() > 1e-9 {
        warnings.push(format!(
            "measurement rescaled from |h|^2 = {norm2:e} to 2d/m = {target:e}"
        ));
        let k = (target / norm2).sqrt();
        h.iter().map(|v| v * k).collect()
    } else {
        h.to_vec()
    };
    let h_norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();

    let v = sys.v();
    let gram = v.adjoint() * &v;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let a1 = eig.min();
    let a2 = eig.max();

    let hc = DVector::from_iterator(h.len(), h.iter().map(|&x| Complex::new(x, 0.0)));
    let mut kappas = Vec::with_capacity(d);
    for i in 0..d {
        let vi = sys.mode(i);
        let align = vi.dotc(&hc).norm();
        if align <= 1e-12 * vi.norm() * h_norm {
            return Err(Error::HypothesisViolation(format!(
                "measurement is orthogonal to mode {} (theta = {})",
                i + 1,
                sys.thetas()[i]
            )));
        }
        kappas.push(align / h_norm);
    }
    let kappa1 = kappas.iter().copied().fold(f64::INFINITY, f64::min);
    let kappa2 = kappas.iter().copied().fold(0.0, f64::max);
    let nu = nu(sys.thetas(), t_s)?;

    let df = d as f64;
    let hi = a2 * kappa2 * kappa2;
    let lo = a1 * kappa1 * kappa1;
    let m_required = (2.0 * df - 1.0) * hi / lo * nu;
    Ok(TheoremBound {
        scale: df * (kappa1 * kappa1 / a2 + kappa2 * kappa2 / a1),
        delta0: (hi - lo) / (hi + lo),
        delta1_of_m: (2.0 * df - 1.0) * nu / m as f64 * (2.0 * hi / (hi + lo)),
        nu,
        kappa1,
        kappa2,
        a1,
        a2,
        m,
        t_s,
        hypothesis_m: m as f64 > m_required,
        m_required,
        warnings,
    })
}

/// Matrix of the delay map on the joint state, with its singular values and
/// numerical rank.
#[derive(Debug, Clone)]
pub struct PhiMatrix {
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Rows `hᵀ e^{-kAτ}` for `k = 0..m`: row `k` reads the measurement `k` lags
/// back from the current state.
pub fn phi_matrix(sys: &LinearSystemAd, h_full: &[f64], m: usize, tau: f64) -> Result<PhiMatrix> {
    let n = sys.n();
    if h_full.len() != n {
        return Err(Error::validation(format!(
            "measurement vector has length {}, system dimension is {n}",
            h_full.len()
        )));
    }
    if m == 0 {
        return Err(Error::validation("m must be positive"));
    }
    let h = DMatrix::from_row_slice(1, n, h_full);
    let mut matrix = DMatrix::<f64>::zeros(m, n);
    for k in 0..m {
        let row = &h * sys.propagator(-(k as f64) * tau)?;
        matrix.set_row(k, &row.row(0));
    }
    let mut singular_values: Vec<f64> = matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .filter(|&&s| s > smax * RANK_TOL && s > 0.0)
        .count();
    Ok(PhiMatrix {
        matrix,
        singular_values,
        rank,
    })
}
