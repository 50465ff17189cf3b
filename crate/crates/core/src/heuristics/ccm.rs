//! Convergent cross-mapping by simplex projection.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{NeighborIndex, PointCloud};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

/// Floor applied to the nearest-neighbor distance in the weight exponent.
pub const NEAREST_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillMetric {
    Pearson,
    /// Negated RMSE, so larger is better like correlation.
    NegRmse,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcmSettings {
    pub library_sizes: Vec<usize>,
    pub theiler_window: usize,
    pub replicates: usize,
    pub metric: SkillMetric,
}

impl CcmSettings {
    pub fn new(library_sizes: Vec<usize>, theiler_window: usize) -> Self {
        CcmSettings {
            library_sizes,
            theiler_window,
            replicates: 4,
            metric: SkillMetric::Pearson,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcmResult {
    pub library_sizes: Vec<usize>,
    /// Mean skill over replicates, one per library size.
    pub skill: Vec<f64>,
    /// Spearman correlation between library size and skill.
    pub trend: f64,
    pub n_neighbors: usize,
    pub metric: SkillMetric,
    pub seed: u64,
}

impl CcmResult {
    pub fn final_skill(&self) -> f64 {
        *self.skill.last().unwrap_or(&f64::NAN)
    }
}

/// Exponential simplex weights for squared neighbor distances, nearest first.
pub fn simplex_weights(dist2: &[f64]) -> Vec<f64> {
    let d1 = dist2
        .first()
        .map_or(NEAREST_FLOOR, |d| d.sqrt().max(NEAREST_FLOOR));
    let raw: Vec<f64> = dist2.iter().map(|d| (-d.sqrt() / d1).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|u| u / total).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[s]] {
            e += 1;
        }
        let r = (s + e) as f64 / 2.0 + 1.0;
        idx[s..=e].iter().for_each(|&i| ranks[i] = r);
        s = e + 1;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Cross-map estimate of every row of `target` from a library block of
/// `source` rows starting at `offset`.
fn cross_map(
    source: &PointCloud,
    target: &PointCloud,
    offset: usize,
    len: usize,
    e: usize,
    w: usize,
) -> Vec<Vec<f64>> {
    let lib = source.rows(offset, len);
    let index = NeighborIndex::new(&lib);
    (0..source.len())
        .into_par_iter()
        .map(|t| {
            let nb = index.knn_point(source.row(t), e, |j| (j + offset).abs_diff(t) > w);
            let d2: Vec<f64> = nb.iter().map(|n| n.dist2).collect();
            let wts = simplex_weights(&d2);
            let mut est = vec![0.0; target.dim()];
            for (n, wt) in nb.iter().zip(&wts) {
                for (o, v) in est.iter_mut().zip(target.row(n.index + offset)) {
                    *o += wt * v;
                }
            }
            est
        })
        .collect()
}

fn skill(est: &[Vec<f64>], target: &PointCloud, metric: SkillMetric) -> f64 {
    let dim = target.dim();
    let score = |c: usize| {
        let a: Vec<f64> = est.iter().map(|r| r[c]).collect();
        let b: Vec<f64> = (0..target.len()).map(|t| target.row(t)[c]).collect();
        match metric {
            SkillMetric::Pearson => pearson(&a, &b),
            SkillMetric::NegRmse => -(a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
                / a.len() as f64)
                .sqrt(),
        }
    };
    (0..dim).map(score).sum::<f64>() / dim as f64
}

/// Predicts `target` (states contemporaneous with `source`) from the shadow
/// manifold `source` over growing libraries.
pub fn ccm(
    source: &PointCloud,
    target: &PointCloud,
    settings: &CcmSettings,
    seed: u64,
) -> Result<CcmResult> {
    let n = source.len();
    if target.len() != n {
        return Err(Error::validation(
            "source and target are not contemporaneous",
        ));
    }
    if settings.library_sizes.is_empty() || settings.replicates == 0 {
        return Err(Error::validation(
            "need at least one library size and replicate",
        ));
    }
    let e = source.dim() + 1;
    let w = settings.theiler_window;
    for &l in &settings.library_sizes {
        if l > n {
            return Err(Error::validation(format!(
                "library size {l} exceeds {n} points"
            )));
        }
        if l < e + 2 * w + 1 {
            return Err(Error::validation(format!(
                "library size {l} leaves fewer than {e} admissible neighbors"
            )));
        }
    }
    for c in 0..target.dim() {
        let first = target.row(0)[c];
        if (0..n).all(|t| target.row(t)[c] == first) {
            return Err(Error::degenerate("target coordinate is constant"));
        }
    }
    let skill = settings
        .library_sizes
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let mut rng = seeded(derive_seed(seed, &[li as u64]));
            let total: f64 = (0..settings.replicates)
                .map(|_| {
                    let offset = rng.random_range(0..=n - l);
                    skill(
                        &cross_map(source, target, offset, l, e, w),
                        target,
                        settings.metric,
                    )
                })
                .sum();
            total / settings.replicates as f64
        })
        .collect::<Vec<_>>();
    let sizes: Vec<f64> = settings.library_sizes.iter().map(|&l| l as f64).collect();
    Ok(CcmResult {
        library_sizes: settings.library_sizes.clone(),
        trend: spearman(&sizes, &skill),
        skill,
        n_neighbors: e,
        metric: settings.metric,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_distances_give_uniform_weights() {
        let w = simplex_weights(&[4.0; 5]);
        for v in w {
            assert!((v - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_nearest_distance_is_floored() {
        let w = simplex_weights(&[0.0, 1e-30, 1.0]);
        assert!(w.iter().all(|v| v.is_finite()));
        assert!(w[2] < 1e-100);
    }

    proptest! {
        #[test]
        fn weights_normalized_and_nearest_largest(mut d in prop::collection::vec(0.0f64..10.0, 1..8)) {
            d.sort_by(f64::total_cmp);
            let w = simplex_weights(&d);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for v in &w {
                prop_assert!(*v > 0.0 && *v <= w[0]);
            }
        }
    }

    #[test]
    fn spearman_ties_and_monotone() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.5, 0.6, 9.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn self_prediction_is_nearly_perfect() {
        // A circle predicts itself from its own neighbors.
        let rows: Vec<Vec<f64>> = (0..800)
            .map(|i| {
                let t = i as f64 * 0.05;
                vec![t.sin(), t.cos()]
            })
            .collect();
        let pc = PointCloud::from_rows(&rows).unwrap();
        let r = ccm(&pc, &pc, &CcmSettings::new(vec![100, 400, 800], 1), 3).unwrap();
        assert!(r.final_skill() > 0.99, "{:?}", r.skill);
    }

    #[test]
    fn rejects_oversized_library() {
        let pc = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert!(ccm(&pc, &pc, &CcmSettings::new(vec![4], 0), 0).is_err());
    }
}
