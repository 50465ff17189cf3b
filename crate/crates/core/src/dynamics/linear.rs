//! Linear oscillatory systems whose persistent dynamics are `d` undamped
//! eigen-pairs `±jθ_i`, all other modes strictly stable.
//!
//! The system is stored through its full eigendecomposition, so propagation
//! over any time span is exact up to linear-algebra rounding.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

use super::Trajectory;

pub type C64 = Complex<f64>;

/// Relative tolerance used when checking conjugate pairing and realness.
const PAIR_TOL: f64 = 1e-10;
/// Largest accepted condition number of the full eigenvector matrix.
const MAX_CONDITION: f64 = 1e12;
/// Largest imaginary residue accepted when truncating propagated states to real.
const IMAG_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LinearSystemAd {
    a: DMatrix<f64>,
    v_full: DMatrix<C64>,
    v_full_inv: DMatrix<C64>,
    eigenvalues: DVector<C64>,
    thetas: Vec<f64>,
    n_x: usize,
    n_y: usize,
    /// Columns of `v_full` that carry the driver modes when the system has
    /// block lower-triangular (forced) structure.
    x_modes: Option<Vec<usize>>,
}

/// Eigen-data for one decoupled block: `d` oscillator pairs with eigenvectors
/// `[v_1, v_1*, ..., v_d, v_d*]`.
#[derive(Debug, Clone)]
pub struct ModalBlock {
    pub thetas: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl ModalBlock {
    /// Block with one oscillator pair and eigenvector `(1, j)/sqrt(2)`.
    pub fn planar_rotation(theta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, -s),
            ],
        );
        ModalBlock {
            thetas: vec![theta],
            vectors: v,
        }
    }

    fn eigenvalues(&self) -> Vec<C64> {
        self.thetas
            .iter()
            .flat_map(|&t| [C64::new(0.0, t), C64::new(0.0, -t)])
            .collect()
    }

    fn matrix(&self) -> Result<DMatrix<C64>> {
        let inv =
            self.vectors.clone().try_inverse().ok_or_else(|| {
                Error::Conditioning("modal block eigenvectors are singular".into())
            })?;
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues()));
        Ok(&self.vectors * lambda * inv)
    }
}

impl LinearSystemAd {
    /// Assembles `A = V_full Λ_full V_full⁻¹` from the oscillator eigenvectors
    /// `v` (columns `[v_1, v_1*, ..., v_d, v_d*]`), their frequencies, and any
    /// extra strictly stable eigenpairs.
    pub fn build(
        v: &DMatrix<C64>,
        thetas: &[f64],
        extra: &[(C64, DVector<C64>)],
        block_dims: (usize, usize),
    ) -> Result<Self> {
        let n = block_dims.0 + block_dims.1;
        let d = thetas.len();
        if d == 0 {
            return Err(Error::validation(
                "at least one oscillator pair is required",
            ));
        }
        if v.nrows() != n || v.ncols() != 2 * d {
            return Err(Error::validation(format!(
                "eigenvector matrix is {}x{}, expected {n}x{}",
                v.nrows(),
                v.ncols(),
                2 * d
            )));
        }
        if 2 * d > n {
            return Err(Error::validation(format!(
                "d = {d} exceeds n/2 = {}",
                n / 2
            )));
        }
        for (i, &t) in thetas.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::validation(format!(
                    "theta_{} = {t} is not positive",
                    i + 1
                )));
            }
            for &u in &thetas[..i] {
                if (t - u).abs() <= 1e-12 * t.max(u) {
                    return Err(Error::validation(format!(
                        "oscillator frequencies must be distinct, {t} repeats"
                    )));
                }
            }
        }
        for i in 0..d {
            let a = v.column(2 * i);
            let b = v.column(2 * i + 1);
            let scale = a.norm().max(1e-300);
            let mismatch = a
                .iter()
                .zip(b.iter())
                .map(|(p, q)| (p.conj() - q).norm())
                .fold(0.0, f64::max);
            if mismatch > PAIR_TOL * scale {
                return Err(Error::validation(format!(
                    "columns {} and {} are not a conjugate pair",
                    2 * i,
                    2 * i + 1
                )));
            }
        }
        if 2 * d + extra.len() != n {
            return Err(Error::validation(format!(
                "{} oscillator modes plus {} extra modes do not span dimension {n}",
                2 * d,
                extra.len()
            )));
        }
        for (k, (lam, vec)) in extra.iter().enumerate() {
            if !(lam.re < 0.0) {
                return Err(Error::validation(format!(
                    "extra eigenvalue {lam} does not have strictly negative real part"
                )));
            }
            if vec.len() != n {
                return Err(Error::validation(format!(
                    "extra eigenvector {k} has wrong length"
                )));
            }
            for (other, _) in &extra[..k] {
                if (lam - other).norm() <= 1e-12 * lam.norm() {
                    return Err(Error::validation(format!("eigenvalue {lam} repeats")));
                }
            }
        }

        let mut v_full = DMatrix::<C64>::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        for (i, &th) in thetas.iter().enumerate().take(d) {
            v_full.set_column(2 * i, &v.column(2 * i));
            v_full.set_column(2 * i + 1, &v.column(2 * i + 1));
            eigenvalues.push(C64::new(0.0, th));
            eigenvalues.push(C64::new(0.0, -th));
        }
        for (k, (lam, vec)) in extra.iter().enumerate() {
            v_full.set_column(2 * d + k, vec);
            eigenvalues.push(*lam);
        }
        let eigenvalues = DVector::from_vec(eigenvalues);

        let sv = v_full.clone().svd(false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(Error::Conditioning(format!(
                "eigenvector matrix condition number {:e} exceeds {MAX_CONDITION:e}",
                smax / smin
            )));
        }

        let x_modes = forced_modes(&v_full, block_dims.0);
        let v_full_inv = match &x_modes {
            Some(xm) => block_inverse(&v_full, xm, block_dims.0)?,
            None => v_full
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Conditioning("eigenvector matrix is singular".into()))?,
        };

        let lambda = DMatrix::from_diagonal(&eigenvalues);
        let a_c = &v_full * lambda * &v_full_inv;
        let scale = a_c.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let imag = a_c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > PAIR_TOL * scale {
            return Err(Error::validation(format!(
                "assembled system matrix is not real (imaginary part {imag:e})"
            )));
        }
        let a = a_c.map(|z| z.re);

        Ok(LinearSystemAd {
            a,
            v_full,
            v_full_inv,
            eigenvalues,
            thetas: thetas.to_vec(),
            n_x: block_dims.0,
            n_y: block_dims.1,
            x_modes,
        })
    }

    /// Forced system `[[A_xx, 0], [A_yx, A_yy]]` assembled from the driver and
    /// response spectra and a real coupling block `A_yx` (`n_y × n_x`).
    pub fn forced(x: &ModalBlock, y: &ModalBlock, a_yx: &DMatrix<f64>) -> Result<Self> {
        let (n_x, n_y) = (x.vectors.nrows(), y.vectors.nrows());
        if a_yx.shape() != (n_y, n_x) {
            return Err(Error::validation(format!(
                "coupling block is {:?}, expected ({n_y}, {n_x})",
                a_yx.shape()
            )));
        }
        let a_yy = y.matrix()?;
        let a_yx_c = a_yx.map(|v| C64::new(v, 0.0));
        let n = n_x + n_y;
        let (dx, dy) = (x.thetas.len(), y.thetas.len());
        let mut v = DMatrix::<C64>::zeros(n, 2 * (dx + dy));
        for (k, lam) in x.eigenvalues().into_iter().enumerate() {
            let vxx = x.vectors.column(k).into_owned();
            // Response part of a driver mode: (λI - A_yy) v_yx = A_yx v_xx.
            let lhs = DMatrix::<C64>::identity(n_y, n_y) * lam - &a_yy;
            let vyx = lhs.lu().solve(&(&a_yx_c * &vxx)).ok_or_else(|| {
                Error::validation("driver frequency coincides with a response mode")
            })?;
            v.view_mut((0, k), (n_x, 1)).copy_from(&vxx);
            v.view_mut((n_x, k), (n_y, 1)).copy_from(&vyx);
        }
        for k in 0..2 * dy {
            v.view_mut((n_x, 2 * dx + k), (n_y, 1))
                .copy_from(&y.vectors.column(k));
        }
        let thetas: Vec<f64> = x.thetas.iter().chain(&y.thetas).copied().collect();
        Self::build(&v, &thetas, &[], (n_x, n_y))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn d(&self) -> usize {
        self.thetas.len()
    }

    pub fn n(&self) -> usize {
        self.n_x + self.n_y
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    /// Oscillator eigenvectors `[v_1, v_1*, ..., v_d, v_d*]` (`n × 2d`).
    pub fn v(&self) -> DMatrix<C64> {
        self.v_full.columns(0, 2 * self.d()).into_owned()
    }

    /// Eigenvector `v_i` for `+jθ_i`.
    pub fn mode(&self, i: usize) -> DVector<C64> {
        self.v_full.column(2 * i).into_owned()
    }

    pub fn v_full(&self) -> &DMatrix<C64> {
        &self.v_full
    }

    pub fn eigenvalues(&self) -> &DVector<C64> {
        &self.eigenvalues
    }

    /// Whether the eigenvectors have forced (block lower-triangular) structure.
    pub fn is_forced(&self) -> bool {
        self.x_modes.is_some()
    }

    /// `A_yx` block of the system matrix.
    pub fn a_yx(&self) -> DMatrix<f64> {
        self.a
            .view((self.n_x, 0), (self.n_y, self.n_x))
            .into_owned()
    }

    /// Residual `max |A V - V Λ|` over the full eigendecomposition.
    pub fn eigen_residual(&self) -> f64 {
        let a_c = self.a.map(|v| C64::new(v, 0.0));
        let lhs = a_c * &self.v_full;
        let rhs = &self.v_full * DMatrix::from_diagonal(&self.eigenvalues);
        (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Exact state-transition matrix `e^{A t}`.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        let exp = DMatrix::from_diagonal(&self.eigenvalues.map(|l| (l * t).exp()));
        let m = &self.v_full * exp * &self.v_full_inv;
        truncate_real(&m)
    }

    /// Modal coordinates `V_full⁻¹ z`.
    pub fn modal_coordinates(&self, z: &[f64]) -> DVector<C64> {
        let zc = DVector::from_iterator(z.len(), z.iter().map(|&v| C64::new(v, 0.0)));
        &self.v_full_inv * zc
    }

    /// `V · 1`: the transient-free initial condition with unit modal amplitudes
    /// on every oscillator mode.
    pub fn unit_modal_state(&self) -> Result<Vec<f64>> {
        let ones = DVector::from_element(self.n(), C64::new(1.0, 0.0));
        let mut coeffs = ones;
        for k in 2 * self.d()..self.n() {
            coeffs[k] = C64::new(0.0, 0.0);
        }
        let z = &self.v_full * coeffs;
        Ok(
            truncate_real(&DMatrix::from_column_slice(self.n(), 1, z.as_slice()))?
                .iter()
                .copied()
                .collect(),
        )
    }

    /// Driver subsystem `A_xx` as its own class member (forced systems only).
    pub fn x_subsystem(&self) -> Result<LinearSystemAd> {
        let xm = self
            .x_modes
            .as_ref()
            .ok_or_else(|| Error::validation("system has no forced block structure"))?;
        let mut pairs = Vec::new();
        let mut extra = Vec::new();
        let mut k = 0;
        while k < xm.len() {
            let col = xm[k];
            let lam = self.eigenvalues[col];
            let vec = self.v_full.view((0, col), (self.n_x, 1)).into_owned();
            if lam.re == 0.0 && lam.im > 0.0 && k + 1 < xm.len() {
                let conj = self.v_full.view((0, xm[k + 1]), (self.n_x, 1)).into_owned();
                pairs.push((lam.im, vec, conj));
                k += 2;
            } else {
                extra.push((lam, DVector::from_column_slice(vec.as_slice())));
                k += 1;
            }
        }
        let mut v = DMatrix::<C64>::zeros(self.n_x, 2 * pairs.len());
        let mut thetas = Vec::new();
        for (i, (theta, a, b)) in pairs.into_iter().enumerate() {
            v.set_column(2 * i, &a.column(0));
            v.set_column(2 * i + 1, &b.column(0));
            thetas.push(theta);
        }
        Self::build(&v, &thetas, &extra, (self.n_x, 0))
    }
}

/// Identifies driver-mode columns when every response-only column has an
/// exactly zero driver part and the split is square.
fn forced_modes(v_full: &DMatrix<C64>, n_x: usize) -> Option<Vec<usize>> {
    let n = v_full.nrows();
    if n_x == 0 || n_x == n {
        return None;
    }
    let (x_modes, y_modes): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&c| (0..n_x).any(|r| v_full[(r, c)] != C64::new(0.0, 0.0)));
    (x_modes.len() == n_x && y_modes.len() == n - n_x).then_some(x_modes)
}

/// Inverse of an eigenvector matrix whose columns, reordered as driver modes
/// then response modes, form `[[X, 0], [Y, Z]]`. Structural zeros in the
/// inverse stay exactly zero.
fn block_inverse(v_full: &DMatrix<C64>, x_modes: &[usize], n_x: usize) -> Result<DMatrix<C64>> {
    let n = v_full.nrows();
    let n_y = n - n_x;
    let y_modes: Vec<usize> = (0..n).filter(|c| !x_modes.contains(c)).collect();
    let order: Vec<usize> = x_modes.iter().chain(&y_modes).copied().collect();
    let perm = v_full.select_columns(&order);
    let x = perm.view((0, 0), (n_x, n_x)).into_owned();
    let y = perm.view((n_x, 0), (n_y, n_x)).into_owned();
    let z = perm.view((n_x, n_x), (n_y, n_y)).into_owned();
    let singular = || Error::Conditioning("eigenvector block is singular".into());
    let x_inv = x.try_inverse().ok_or_else(singular)?;
    let z_inv = z.try_inverse().ok_or_else(singular)?;
    let lower = -(&z_inv * y * &x_inv);
    let mut inv_perm = DMatrix::<C64>::zeros(n, n);
    inv_perm.view_mut((0, 0), (n_x, n_x)).copy_from(&x_inv);
    inv_perm.view_mut((n_x, 0), (n_y, n_x)).copy_from(&lower);
    inv_perm.view_mut((n_x, n_x), (n_y, n_y)).copy_from(&z_inv);
    let mut inv = DMatrix::<C64>::zeros(n, n);
    for (r, &col) in order.iter().enumerate() {
        inv.set_row(col, &inv_perm.row(r));
    }
    Ok(inv)
}

fn truncate_real(m: &DMatrix<C64>) -> Result<DMatrix<f64>> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > IMAG_RESIDUE_TOL * scale {
        return Err(Error::Conditioning(format!(
            "propagated state has imaginary residue {imag:e}"
        )));
    }
    Ok(m.map(|z| z.re))
}

/// Samples `z_t = V e^{Λ t T_s} V⁻¹ z_0` for `t = 0..n_samples`.
pub fn simulate_linear(
    sys: &LinearSystemAd,
    z0: &[f64],
    t_s: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    if !(t_s > 0.0) {
        return Err(Error::validation("sampling interval T_s must be positive"));
    }
    if z0.len() != sys.n() {
        return Err(Error::validation(format!(
            "initial state has length {}, system dimension is {}",
            z0.len(),
            sys.n()
        )));
    }
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be positive"));
    }
    let coeffs = sys.modal_coordinates(z0);
    let n = sys.n();
    let mut samples = Vec::with_capacity(n * n_samples);
    let mut modal = DVector::<C64>::zeros(n);
    for t in 0..n_samples {
        let time = t as f64 * t_s;
        for k in 0..n {
            modal[k] = coeffs[k] * (sys.eigenvalues[k] * time).exp();
        }
        let z = &sys.v_full * &modal;
        let scale = z.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if z.iter().any(|c| c.im.abs() > IMAG_RESIDUE_TOL * scale) {
            return Err(Error::Conditioning(format!(
                "state at sample {t} has a non-negligible imaginary part"
            )));
        }
        samples.extend(z.iter().map(|c| c.re));
    }
    Trajectory::new(samples, sys.block_dims(), t_s, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::example1::example1_v;

    fn example() -> LinearSystemAd {
        LinearSystemAd::build(&example1_v(1.0), &[2.3129, 0.1765], &[], (2, 2)).unwrap()
    }

    #[test]
    fn example_system_is_accepted_and_forced() {
        let sys = example();
        assert_eq!((sys.d(), sys.n()), (2, 4));
        assert!(sys.is_forced());
        assert!(sys.eigen_residual() < 1e-12);
        let a = sys.a();
        for r in 0..2 {
            for c in 2..4 {
                assert_eq!(a[(r, c)], 0.0, "A_xy must be structurally zero");
            }
        }
        assert!(sys.a_yx().norm() > 1e-3);
    }

    #[test]
    fn repeated_frequency_rejected() {
        let err = LinearSystemAd::build(&example1_v(1.0), &[1.0, 1.0], &[], (2, 2)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn unstable_extra_eigenvalue_rejected() {
        let block = ModalBlock::planar_rotation(1.0);
        let mut v = DMatrix::<C64>::zeros(3, 2);
        v.view_mut((0, 0), (2, 2)).copy_from(&block.vectors);
        let e3 = DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        let err = LinearSystemAd::build(&v, &[1.0], &[(C64::new(0.1, 0.0), e3.clone())], (2, 1))
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(LinearSystemAd::build(&v, &[1.0], &[(C64::new(-0.5, 0.0), e3)], (2, 1)).is_ok());
    }

    #[test]
    fn singular_eigenvectors_rejected() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let col = [C64::new(s, 0.0), C64::new(0.0, s)];
        let v = DMatrix::from_fn(4, 4, |r, c| {
            let base = if r < 2 { col[r] } else { col[r - 2] };
            if c % 2 == 0 {
                base
            } else {
                base.conj()
            }
        });
        let err = LinearSystemAd::build(&v, &[1.0, 2.0], &[], (2, 2)).unwrap_err();
        assert!(matches!(err, Error::Conditioning(_)));
    }

    #[test]
    fn non_conjugate_columns_rejected() {
        let mut v = example1_v(1.0);
        v[(0, 1)] = C64::new(0.3, 0.0);
        assert!(LinearSystemAd::build(&v, &[2.3129, 0.1765], &[], (2, 2)).is_err());
    }

    #[test]
    fn rotation_by_theta_ts() {
        let theta = std::f64::consts::FRAC_PI_2;
        let block = ModalBlock::planar_rotation(theta);
        let sys = LinearSystemAd::build(&block.vectors, &[theta], &[], (2, 0)).unwrap();
        let traj = simulate_linear(&sys, &[1.0, 0.0], 0.5, 2).unwrap();
        let angle = theta * 0.5;
        let r = traj.row(1);
        assert!((r[0].hypot(r[1]) - 1.0).abs() < 1e-12);
        assert!((r[0] - angle.cos()).abs() < 1e-12);
        assert!((r[1].abs() - angle.sin()).abs() < 1e-12);
    }

    #[test]
    fn modal_amplitudes_are_conserved() {
        let sys = example();
        let z0 = sys.unit_modal_state().unwrap();
        let traj = simulate_linear(&sys, &z0, 1.0, 500).unwrap();
        for t in (0..500).step_by(37) {
            let c = sys.modal_coordinates(traj.row(t));
            for k in 0..4 {
                assert!((c[k].norm() - 1.0).abs() < 1e-9, "t = {t}, mode {k}");
            }
        }
    }

    #[test]
    fn propagator_matches_pade_exponential() {
        let sys = example();
        for &t in &[0.3, -1.0, 2.5] {
            let exact = sys.propagator(t).unwrap();
            let pade = (sys.a() * t).exp();
            assert!((exact - pade).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn driver_block_ignores_coupling() {
        let a = LinearSystemAd::build(&example1_v(1.0), &[2.3129, 0.1765], &[], (2, 2)).unwrap();
        let b = LinearSystemAd::build(&example1_v(3.0), &[2.3129, 0.1765], &[], (2, 2)).unwrap();
        assert!((a.a_yx() - b.a_yx()).norm() > 1e-3);
        let z0 = a.unit_modal_state().unwrap();
        let ta = simulate_linear(&a, &z0, 1.0, 300).unwrap();
        let tb = simulate_linear(&b, &z0, 1.0, 300).unwrap();
        for t in 0..300 {
            for (p, q) in ta.x(t).iter().zip(tb.x(t)) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn forced_constructor_reproduces_coupling_block() {
        let x = ModalBlock::planar_rotation(2.3129);
        let y = ModalBlock::planar_rotation(0.1765);
        let a_yx = DMatrix::from_row_slice(2, 2, &[0.4, -1.2, 0.7, 0.05]);
        let sys = LinearSystemAd::forced(&x, &y, &a_yx).unwrap();
        assert!(sys.is_forced());
        assert!((sys.a_yx() - &a_yx).norm() < 1e-10);
        assert!(sys.eigen_residual() < 1e-10);
    }

    #[test]
    fn driver_subsystem_has_single_pair() {
        let sub = example().x_subsystem().unwrap();
        assert_eq!((sub.d(), sub.n()), (1, 2));
        assert_eq!(sub.thetas(), &[2.3129]);
    }
}
