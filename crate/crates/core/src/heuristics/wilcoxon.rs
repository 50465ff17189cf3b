use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest sample size evaluated with the exact null distribution.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    pub n: usize,
    /// `P(W⁺ >= observed)` under the symmetric null.
    pub p_one_sided: f64,
    pub exact: bool,
}

/// Average ranks of `|d|` (1-based), ties sharing the mean of their positions.
fn abs_ranks(d: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0.0; d.len()];
    let mut s = 0;
    while s < order.len() {
        let mut e = s + 1;
        while e < order.len() && d[order[e]].abs() == d[order[s]].abs() {
            e += 1;
        }
        let avg = (s + e + 1) as f64 / 2.0;
        for &k in &order[s..e] {
            ranks[k] = avg;
        }
        s = e;
    }
    ranks
}

/// Exact upper tail by dynamic programming over the (doubled, hence
/// integral) ranks: every sign assignment is equally likely.
pub fn exact_upper_tail(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let observed = (2.0 * w_plus).round() as usize;
    let tail: f64 = counts[observed.min(total + 1)..].iter().sum();
    tail / 2f64.powi(ranks.len() as i32)
}

/// Normal approximation with continuity and tie corrections.
pub fn normal_upper_tail(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut s = 0;
    while s < sorted.len() {
        let e = s + sorted[s..].iter().take_while(|&&r| r == sorted[s]).count();
        let t = (e - s) as f64;
        tie_term += t * t * t - t;
        s = e;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return if w_plus >= mean { 1.0 } else { 0.0 };
    }
    let z = (w_plus - mean - 0.5) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    1.0 - normal.cdf(z)
}

/// One-sided signed-rank test of "differences tend to be positive".
pub fn wilcoxon_signed_rank(differences: &[f64]) -> Result<WilcoxonResult> {
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(Error::validation("differences must be finite"));
    }
    let nz: Vec<f64> = differences.iter().copied().filter(|&d| d != 0.0).collect();
    if nz.is_empty() {
        return Err(Error::degenerate("all differences are zero"));
    }
    if nz.len() < 5 {
        return Err(Error::validation(format!(
            "signed-rank test needs at least 5 nonzero differences, got {}",
            nz.len()
        )));
    }
    let ranks = abs_ranks(&nz);
    let w_plus: f64 = nz
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let exact = nz.len() <= EXACT_MAX_N;
    let p = if exact {
        exact_upper_tail(&ranks, w_plus)
    } else {
        normal_upper_tail(&ranks, w_plus)
    };
    Ok(WilcoxonResult {
        w_plus,
        n: nz.len(),
        p_one_sided: p.clamp(0.0, 1.0),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tail by listing all 2^n sign vectors.
    fn enumerate(ranks: &[f64], w_plus: f64) -> (f64, f64) {
        let n = ranks.len();
        let mut hits = 0u64;
        let mut mass = 0.0;
        for mask in 0u64..(1 << n) {
            mass += 1.0 / (1u64 << n) as f64;
            let w: f64 = (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| ranks[b])
                .sum();
            if w >= w_plus - 1e-9 {
                hits += 1;
            }
        }
        (hits as f64 / (1u64 << n) as f64, mass)
    }

    #[test]
    fn five_positive_differences() {
        let r = wilcoxon_signed_rank(&[0.5, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.p_one_sided, 1.0 / 32.0);
        assert!(r.exact);
    }

    #[test]
    fn symmetric_pairs_are_central() {
        let d: Vec<f64> = (1..=10).flat_map(|k| [k as f64, -(k as f64)]).collect();
        let r = wilcoxon_signed_rank(&d).unwrap();
        assert_eq!(r.w_plus, 105.0);
        assert!((r.p_one_sided - 0.5).abs() < 0.06, "p = {}", r.p_one_sided);
    }

    #[test]
    fn exact_path_matches_enumeration() {
        let mut state = 12345u64;
        for n in 5..=12 {
            for trial in 0..5 {
                // Ties included: magnitudes drawn from a few levels.
                let d: Vec<f64> = (0..n)
                    .map(|_| {
                        state = state
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        let level = (state >> 33) % 4 + 1;
                        let sign = if (state >> 20) & 1 == 0 { 1.0 } else { -1.0 };
                        sign * level as f64
                    })
                    .collect();
                let r = wilcoxon_signed_rank(&d).unwrap();
                let ranks = abs_ranks(&d);
                let (p, mass) = enumerate(&ranks, r.w_plus);
                assert!((mass - 1.0).abs() < 1e-12);
                assert!((r.p_one_sided - p).abs() < 1e-12, "n = {n}, trial {trial}");
            }
        }
    }

    #[test]
    fn normal_approximation_close_at_crossover() {
        let ranks: Vec<f64> = (1..=20).map(f64::from).collect();
        for w in [105.0, 130.0, 150.0, 170.0, 190.0] {
            let exact = exact_upper_tail(&ranks, w);
            let approx = normal_upper_tail(&ranks, w);
            assert!(
                (exact - approx).abs() < 0.01,
                "W = {w}: {exact} vs {approx}"
            );
        }
    }

    #[test]
    fn zeros_dropped_and_all_zero_rejected() {
        assert!(matches!(
            wilcoxon_signed_rank(&[0.0; 8]),
            Err(Error::DegenerateInput(_))
        ));
        let r = wilcoxon_signed_rank(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.n, 5);
    }
}
