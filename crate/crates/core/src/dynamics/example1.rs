//! The well-behaved forced linear system `x → y` with two oscillator pairs,
//! plus its five linear measurement vectors.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::rng;

use super::linear::{LinearSystemAd, C64};

pub const THETA_X: f64 = 2.3129;
pub const THETA_Y: f64 = 0.1765;
/// Standard deviation of the perturbations `r_i` applied to the eigenvector
/// directions when building measurement vectors.
pub const R_STD: f64 = 0.1;

/// Eigenvector matrix with the response part of the driver modes scaled by
/// `coupling` (1 gives the reference system, 0 a fully decoupled pair).
pub fn example1_v(coupling: f64) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [C64::new(s, 0.0), C64::new(0.0, s)];
    let zero = C64::new(0.0, 0.0);
    DMatrix::from_fn(4, 4, |r, c| {
        let part = r % 2;
        match (r < 2, c) {
            (true, 0) => v[part] * s,
            (true, 1) => v[part].conj() * s,
            (true, _) => zero,
            (false, 0) => v[part] * s * coupling,
            (false, 1) => v[part].conj() * s * coupling,
            (false, 2) => v[part],
            (false, _) => v[part].conj(),
        }
    })
}

/// Raw (unnormalized) measurement direction `c_φxy`; all other measurement
/// vectors are derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub c_phi_xy: Vec<f64>,
    pub n_x: usize,
}

fn scaled(c: &[f64], m: usize, dims: f64) -> Vec<f64> {
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let k = (dims / m as f64).sqrt() / norm;
    c.iter().map(|v| v * k).collect()
}

impl MeasurementSet {
    pub fn from_eigenvectors(v: &DMatrix<C64>, r: [f64; 4]) -> Self {
        let c = (0..v.nrows())
            .map(|i| {
                (1.0 + r[0]) * v[(i, 0)].re
                    + (1.0 + r[1]) * v[(i, 0)].im
                    + (1.0 + r[2]) * v[(i, 2)].re
                    + (1.0 + r[3]) * v[(i, 2)].im
            })
            .collect();
        MeasurementSet {
            c_phi_xy: c,
            n_x: 2,
        }
    }

    fn n(&self) -> usize {
        self.c_phi_xy.len()
    }

    fn masked(&self, keep_x: bool) -> Vec<f64> {
        self.c_phi_xy
            .iter()
            .enumerate()
            .map(|(i, &v)| if (i < self.n_x) == keep_x { v } else { 0.0 })
            .collect()
    }

    pub fn h_phi_xy(&self, m: usize) -> Vec<f64> {
        scaled(&self.c_phi_xy, m, self.n() as f64)
    }

    pub fn h_phi_x(&self, m: usize) -> Vec<f64> {
        scaled(&self.masked(true), m, self.n() as f64)
    }

    pub fn h_phi_y(&self, m: usize) -> Vec<f64> {
        scaled(&self.masked(false), m, self.n() as f64)
    }

    pub fn h_gamma_x(&self, m: usize) -> Vec<f64> {
        scaled(&self.c_phi_xy[..self.n_x], m, self.n_x as f64)
    }

    pub fn h_gamma_y(&self, m: usize) -> Vec<f64> {
        scaled(&self.c_phi_xy[self.n_x..], m, (self.n() - self.n_x) as f64)
    }
}

/// Reference system with seeded measurement perturbations.
pub fn example1_system(seed: u64) -> Result<(LinearSystemAd, MeasurementSet)> {
    example1_with_coupling(1.0, seed)
}

/// Same construction with the coupling of the driver modes into the
/// response scaled by `coupling`.
pub fn example1_with_coupling(
    coupling: f64,
    seed: u64,
) -> Result<(LinearSystemAd, MeasurementSet)> {
    let v = example1_v(coupling);
    let sys = LinearSystemAd::build(&v, &[THETA_X, THETA_Y], &[], (2, 2))?;
    let mut rng = rng::seeded(seed);
    let normal = Normal::new(0.0, R_STD).expect("valid normal");
    let r = [(); 4].map(|_| normal.sample(&mut rng));
    // Measurements follow the reference eigenvectors, so they are identical
    // across coupling strengths for a given seed.
    let meas = MeasurementSet::from_eigenvectors(&example1_v(1.0), r);
    Ok((sys, meas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum()
    }

    #[test]
    fn gamma_x_normalization() {
        for seed in [0, 7, 12345] {
            let (_, meas) = example1_system(seed).unwrap();
            for m in [1, 4, 250] {
                assert!((sq(&meas.h_gamma_x(m)) - 2.0 / m as f64).abs() < 1e-14);
                assert!((sq(&meas.h_phi_xy(m)) - 4.0 / m as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn phi_y_has_no_driver_part() {
        let (_, meas) = example1_system(3).unwrap();
        let h = meas.h_phi_y(250);
        assert_eq!(&h[..2], &[0.0, 0.0]);
        let h = meas.h_phi_x(250);
        assert_eq!(&h[2..], &[0.0, 0.0]);
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = example1_system(99).unwrap().1;
        let b = example1_system(99).unwrap().1;
        let c = example1_system(100).unwrap().1;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unperturbed_direction() {
        // With r = 0 the direction is Re(V_1) + Im(V_1) + Re(V_3) + Im(V_3).
        let meas = MeasurementSet::from_eigenvectors(&example1_v(1.0), [0.0; 4]);
        let h = 0.5 + std::f64::consts::FRAC_1_SQRT_2;
        let expect = [0.5, 0.5, h, h];
        for (a, b) in meas.c_phi_xy.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_y_matches_phi_y_on_joint_state() {
        let (_, meas) = example1_system(5).unwrap();
        let z = [0.3, -1.1, 0.7, 2.0];
        let m = 10;
        let gy: f64 = meas
            .h_gamma_y(m)
            .iter()
            .zip(&z[2..])
            .map(|(a, b)| a * b)
            .sum();
        let py: f64 = meas.h_phi_y(m).iter().zip(&z).map(|(a, b)| a * b).sum();
        // Both are normalized per their own dimension count.
        assert!((gy * (4.0f64 / 2.0).sqrt() - py).abs() < 1e-12);
    }
}
