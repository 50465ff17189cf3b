//! Continuity statistic: how often domain neighborhoods land inside small
//! image balls more often than chance allows.

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{NeighborIndex, PointCloud};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PecoraSettings {
    /// Image ball radii, relative to the image's pooled standard deviation.
    pub epsilon_grid: Vec<f64>,
    pub n_probe: usize,
    /// Largest domain neighborhood examined per probe.
    pub k_max: usize,
    pub theiler_window: usize,
}

impl PecoraSettings {
    pub fn new(epsilon_grid: Vec<f64>, n_probe: usize, theiler_window: usize) -> Self {
        PecoraSettings {
            epsilon_grid,
            n_probe,
            k_max: 50,
            theiler_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityStat {
    pub epsilon: Vec<f64>,
    pub theta: Vec<f64>,
    /// Fraction of probes with a non-empty neighborhood at each radius.
    pub coverage: Vec<f64>,
    pub n_probe: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityCurves {
    pub epsilon: Vec<f64>,
    pub forward: ContinuityStat,
    pub inverse: ContinuityStat,
    /// Pointwise product of the forward and inverse curves.
    pub product: Vec<f64>,
}

fn probes(n: usize, n_probe: usize, seed: u64) -> Vec<usize> {
    if n_probe >= n {
        return (0..n).collect();
    }
    let mut idx = rand::seq::index::sample(&mut seeded(seed), n, n_probe).into_vec();
    idx.sort_unstable();
    idx
}

/// Evidence that `domain -> image` (row `i` to row `i`) is continuous.
///
/// For each probe and radius `eps`, `n` counts the nearest domain neighbors
/// whose images all fall within `eps` of the probe's image, and `p` is the
/// fraction of the image inside that ball. The probe contributes `1 - p^n`;
/// probes with `n = 0` contribute nothing and lower the coverage.
pub fn pecora_continuity(
    domain: &PointCloud,
    image: &PointCloud,
    settings: &PecoraSettings,
    seed: u64,
) -> Result<ContinuityStat> {
    let n = domain.len();
    let w = settings.theiler_window;
    if image.len() != n {
        return Err(Error::validation("domain and image are not aligned"));
    }
    if settings.epsilon_grid.is_empty() || settings.epsilon_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::validation(
            "epsilon grid must be non-empty and positive",
        ));
    }
    if settings.n_probe == 0 || settings.k_max == 0 || n <= 2 * w + 2 {
        return Err(Error::validation("too few points or probes"));
    }
    let scale = image.pooled_std();
    if scale == 0.0 {
        return Err(Error::degenerate("image has zero spread"));
    }
    let dom_index = NeighborIndex::new(domain);
    let img_index = NeighborIndex::new(image);
    let ps = probes(n, settings.n_probe, seed);
    let per_probe: Vec<Vec<Option<f64>>> = ps
        .par_iter()
        .map(|&i| {
            let nb = dom_index.knn_index(i, settings.k_max, w);
            let img_d2: Vec<f64> = nb.iter().map(|v| image.dist2(i, v.index)).collect();
            let admissible = (0..n).filter(|j| j.abs_diff(i) > w).count() as f64;
            settings
                .epsilon_grid
                .iter()
                .map(|&eps| {
                    let r2 = (eps * scale).powi(2);
                    let inside = img_d2.iter().take_while(|&&d| d <= r2).count();
                    (inside > 0).then(|| {
                        let mass =
                            img_index.count_within(image.row(i), r2, |j| j.abs_diff(i) > w) as f64;
                        1.0 - (mass / admissible).powi(inside as i32)
                    })
                })
                .collect()
        })
        .collect();
    let np = ps.len() as f64;
    let column = |e: usize| per_probe.iter().map(move |row| row[e]);
    let theta = (0..settings.epsilon_grid.len())
        .map(|e| column(e).map(|v| v.unwrap_or(0.0)).sum::<f64>() / np)
        .collect();
    let coverage = (0..settings.epsilon_grid.len())
        .map(|e| column(e).filter(Option::is_some).count() as f64 / np)
        .collect();
    Ok(ContinuityStat {
        epsilon: settings.epsilon_grid.clone(),
        theta,
        coverage,
        n_probe: ps.len(),
        seed,
    })
}

/// Forward (`a -> b`), inverse and product continuity curves.
pub fn continuity_curves(
    a: &PointCloud,
    b: &PointCloud,
    settings: &PecoraSettings,
    seed: u64,
) -> Result<ContinuityCurves> {
    let forward = pecora_continuity(a, b, settings, seed)?;
    let inverse = pecora_continuity(b, a, settings, seed)?;
    let product = forward
        .theta
        .iter()
        .zip(&inverse.theta)
        .map(|(f, i)| f * i)
        .collect();
    Ok(ContinuityCurves {
        epsilon: settings.epsilon_grid.clone(),
        forward,
        inverse,
        product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cloud(seed: u64, n: usize, dim: usize) -> PointCloud {
        let mut r = seeded(seed);
        PointCloud::new((0..n * dim).map(|_| r.random::<f64>()).collect(), dim).unwrap()
    }

    #[test]
    fn identity_is_continuous_wherever_covered() {
        let a = cloud(1, 2000, 2);
        let s = PecoraSettings::new(vec![0.02, 0.05, 0.1, 0.3], 300, 0);
        let c = pecora_continuity(&a, &a, &s, 9).unwrap();
        for (t, cov) in c.theta.iter().zip(&c.coverage) {
            assert!((t - cov).abs() < 0.05, "{t} vs {cov}");
        }
        assert!(c.theta[2] > 0.95 && c.theta[3] > 0.95);
    }

    #[test]
    fn independent_clouds_stay_low_at_small_eps() {
        let a = cloud(2, 2000, 2);
        let b = cloud(3, 2000, 2);
        let s = PecoraSettings::new(vec![0.02, 0.05], 300, 0);
        let c = pecora_continuity(&a, &b, &s, 9).unwrap();
        assert!(c.theta.iter().all(|t| *t < 0.1), "{:?}", c.theta);
    }

    #[test]
    fn curves_bounded_and_product_below_factors() {
        let a = cloud(4, 500, 2);
        let b = PointCloud::new(a.data().iter().map(|v| v * v).collect(), 2).unwrap();
        let s = PecoraSettings::new(vec![0.01, 0.1, 0.5, 2.0], 100, 0);
        let c = continuity_curves(&a, &b, &s, 1).unwrap();
        for k in 0..4 {
            let (f, i, p) = (c.forward.theta[k], c.inverse.theta[k], c.product[k]);
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&i));
            assert!(p <= f.min(i) + 1e-15);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = cloud(5, 400, 3);
        let b = cloud(6, 400, 3);
        let s = PecoraSettings::new(vec![0.2, 0.5], 50, 2);
        assert_eq!(
            pecora_continuity(&a, &b, &s, 4).unwrap(),
            pecora_continuity(&a, &b, &s, 4).unwrap()
        );
    }

    #[test]
    fn rejects_bad_grid() {
        let a = cloud(7, 50, 2);
        assert!(pecora_continuity(&a, &a, &PecoraSettings::new(vec![0.0], 10, 0), 0).is_err());
    }
}
