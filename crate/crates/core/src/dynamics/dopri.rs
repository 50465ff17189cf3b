//! Dormand–Prince 5(4) integrator with the 4th-order continuous extension.
//!
//! Output is produced on a uniform grid by dense interpolation inside each
//! accepted step, so the step size never has to land on the sampling grid.

use crate::error::{Error, Result};

use super::DIVERGENCE_GUARD;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Error-control settings for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on attempted steps before giving up.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 50_000_000,
        }
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(dim: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }
}

/// Takes one Dormand–Prince step from `(t, y)` with `k[0] = f(t, y)` already
/// filled in. Leaves the 5th-order solution in `y_new` and `f(t+h, y_new)` in
/// `k[6]`.
fn step<F>(rhs: &F, t: f64, y: &[f64], h: f64, st: &mut Stages, y_new: &mut [f64])
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let Stages { k, tmp } = st;
    let [k1, k2, k3, k4, k5, k6, k7] = k;

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    rhs(t + C2 * h, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs(t + C3 * h, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(t + C4 * h, tmp, k4);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(t + C5 * h, tmp, k5);
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(t + h, tmp, k6);
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(t + h, y_new, k7);
}

fn error_norm(st: &Stages, y: &[f64], y_new: &[f64], h: f64, opts: &OdeOptions) -> f64 {
    let k = &st.k;
    let n = y.len();
    let sum: f64 = (0..n)
        .map(|i| {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sk = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            (e / sk).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

fn initial_step<F>(rhs: &F, y0: &[f64], f0: &[f64], opts: &OdeOptions) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len() as f64;
    let scale = |i: usize| opts.abs_tol + opts.rel_tol * y0[i].abs();
    let d0 = (y0
        .iter()
        .enumerate()
        .map(|(i, v)| (v / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let d1 = (f0
        .iter()
        .enumerate()
        .map(|(i, v)| (v / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

fn check_guard(values: &[f64], step: usize) -> Result<()> {
    if values
        .iter()
        .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_GUARD)
    {
        return Err(Error::Divergence {
            step,
            guard: DIVERGENCE_GUARD,
        });
    }
    Ok(())
}

/// Integrates `y' = rhs(t, y)` from `t = 0` and returns `n_out` states sampled
/// at `t = k * dt`, concatenated row-major. The first row is `y0`.
pub fn sample_uniform<F>(
    rhs: F,
    y0: &[f64],
    dt: f64,
    n_out: usize,
    opts: &OdeOptions,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(dt > 0.0) {
        return Err(Error::validation("sampling period dt must be positive"));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::validation("integration tolerances must be positive"));
    }
    let n = y0.len();
    let mut out = Vec::with_capacity(n_out * n);
    if n_out == 0 {
        return Ok(out);
    }
    check_guard(y0, 0)?;
    out.extend_from_slice(y0);

    let mut st = Stages::new(n);
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    rhs(t, &y, &mut st.k[0]);
    let mut h = initial_step(&rhs, &y, &st.k[0], opts).min(dt * 10.0);
    let mut next = 1usize;
    let mut rejected_last = false;
    let mut dense: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);

    for _ in 0..opts.max_steps {
        if next >= n_out {
            return Ok(out);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Stiffness { t, h });
        }
        step(&rhs, t, &y, h, &mut st, &mut y_new);
        let err = error_norm(&st, &y, &y_new, h, opts);
        if !err.is_finite() {
            h *= 0.2;
            rejected_last = true;
            continue;
        }
        if err <= 1.0 {
            // Continuous extension coefficients for this step.
            let k = &st.k;
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = h * k[0][i] - dy;
                dense[0][i] = y[i];
                dense[1][i] = dy;
                dense[2][i] = bspl;
                dense[3][i] = dy - h * k[6][i] - bspl;
                dense[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let t_end = t + h;
            while next < n_out && (next as f64) * dt <= t_end {
                let theta = ((next as f64) * dt - t) / h;
                let theta1 = 1.0 - theta;
                let row_start = out.len();
                let [d0, d1, d2, d3, d4] = &dense;
                for i in 0..n {
                    out.push(
                        d0[i]
                            + theta * (d1[i] + theta1 * (d2[i] + theta * (d3[i] + theta1 * d4[i]))),
                    );
                }
                check_guard(&out[row_start..], next)?;
                next += 1;
            }
            check_guard(&y_new, next)?;
            t = t_end;
            std::mem::swap(&mut y, &mut y_new);
            let (first, rest) = st.k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            h *= if rejected_last { fac.min(1.0) } else { fac };
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            rejected_last = true;
        }
    }
    Err(Error::Stiffness { t, h })
}

/// Fixed-step Dormand–Prince: `n_steps` steps of size `h` from `t = 0`.
/// Returns the final state. Used for convergence-order checks.
pub fn fixed_step<F>(rhs: F, y0: &[f64], h: f64, n_steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut t = 0.0;
    for _ in 0..n_steps {
        rhs(t, &y, &mut st.k[0]);
        step(&rhs, t, &y, h, &mut st, &mut y_new);
        std::mem::swap(&mut y, &mut y_new);
        t += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn exponential_decay_one_sample() {
        let out = sample_uniform(decay, &[1.0], 0.1, 2, &OdeOptions::default()).unwrap();
        assert_eq!(out[0], 1.0);
        assert!((out[1] - (-0.1f64).exp()).abs() <= 1e-8 * 0.904837);
        assert!((out[1] - 0.904837).abs() < 1e-6);
    }

    #[test]
    fn dense_output_tracks_harmonic_oscillator() {
        let dt = 0.025;
        let out =
            sample_uniform(oscillator, &[1.0, 0.0], dt, 4001, &OdeOptions::default()).unwrap();
        for k in (0..4001).step_by(97) {
            let t = k as f64 * dt;
            assert!((out[2 * k] - t.cos()).abs() < 1e-6, "k = {k}");
            assert!((out[2 * k + 1] + t.sin()).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn fixed_step_converges_at_order_four_or_better() {
        // y' = -y² with y(0) = 1 has y(t) = 1 / (1 + t).
        let riccati = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0] * y[0];
        let err = |h: f64| {
            let n = (2.0 / h).round() as usize;
            (fixed_step(riccati, &[1.0], h, n)[0] - 1.0 / 3.0).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 16.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn blow_up_is_reported_as_divergence() {
        let blow_up = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let err = sample_uniform(blow_up, &[1.0], 0.1, 20, &OdeOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Divergence { .. } | Error::Stiffness { .. }
        ));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(sample_uniform(decay, &[1.0], 0.0, 2, &OdeOptions::default()).is_err());
        let opts = OdeOptions {
            rel_tol: 0.0,
            ..OdeOptions::default()
        };
        assert!(sample_uniform(decay, &[1.0], 0.1, 2, &opts).is_err());
    }
}
