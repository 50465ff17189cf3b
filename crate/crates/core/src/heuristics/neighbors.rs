//! Mutual-neighbor metrics: distance-based `M(X|Y)` and rank-based `L(X|Y)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{align, dist2, DelayEmbedding, NeighborIndex, NeighborQuery, PointCloud};
use crate::error::{Error, Result};

use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

/// Per-point mean-square distances on one embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborStats {
    /// Mean over all other points.
    pub d_mean: Vec<f64>,
    /// Mean over the `k` nearest neighbors.
    pub d_knn: Vec<f64>,
    /// Mean over the `k` mutual neighbors (nearest on the other embedding).
    pub d_mutual: Vec<f64>,
    pub k: usize,
    pub t_prime: usize,
}

/// Per-point mean ranks of mutual neighbors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankStats {
    pub g_mutual: Vec<f64>,
    pub g_mean: f64,
    pub g_knn: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MResult {
    pub m_xy: f64,
    pub m_yx: f64,
    pub delta_m: f64,
    pub m_s: f64,
    /// Points skipped because their denominator vanished.
    pub skipped: usize,
    pub stats_x: NeighborStats,
    pub stats_y: NeighborStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LResult {
    pub l_xy: f64,
    pub l_yx: f64,
    pub delta_l: f64,
    /// One-sided test that per-point `L(X|Y)` exceeds `L(Y|X)`; `None` when
    /// too few per-point differences are nonzero.
    pub wilcoxon: Option<WilcoxonResult>,
    pub ranks_x: RankStats,
    pub ranks_y: RankStats,
}

/// Two contemporaneous point sets with their neighbor lists.
pub struct MutualNeighbors {
    pub x: PointCloud,
    pub y: PointCloud,
    pub nn_x: Vec<Vec<usize>>,
    pub nn_y: Vec<Vec<usize>>,
    pub query: NeighborQuery,
}

fn neighbor_lists(points: &PointCloud, q: &NeighborQuery) -> Result<Vec<Vec<usize>>> {
    let index = NeighborIndex::new(points);
    let lists: Vec<Vec<usize>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            index
                .knn_index(i, q.k, q.theiler_window)
                .into_iter()
                .map(|n| n.index)
                .collect()
        })
        .collect();
    if lists.iter().any(|l: &Vec<usize>| l.len() < q.k) {
        return Err(Error::validation("too few admissible neighbors"));
    }
    Ok(lists)
}

impl MutualNeighbors {
    pub fn new(nx: &DelayEmbedding, ny: &DelayEmbedding, q: NeighborQuery) -> Result<Self> {
        let al = align(nx, ny)?;
        q.validate(al.len)?;
        let x = nx.points.rows(al.offset_a, al.len);
        let y = ny.points.rows(al.offset_b, al.len);
        Self::from_points(x, y, q)
    }

    pub fn from_points(x: PointCloud, y: PointCloud, q: NeighborQuery) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::validation("point sets are not contemporaneous"));
        }
        q.validate(x.len())?;
        let nn_x = neighbor_lists(&x, &q)?;
        let nn_y = neighbor_lists(&y, &q)?;
        Ok(MutualNeighbors {
            x,
            y,
            nn_x,
            nn_y,
            query: q,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Distance statistics on `pts` with its own lists and the other set's.
    fn stats(
        pts: &PointCloud,
        own: &[Vec<usize>],
        other: &[Vec<usize>],
        k: usize,
    ) -> NeighborStats {
        let n = pts.len();
        let dim = pts.dim();
        // Sum over j of |p_i - p_j|² = n|c_i|² + Σ_j |c_j|² for centered c.
        let mut mean = vec![0.0; dim];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(pts.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let sq: Vec<f64> = (0..n).map(|i| dist2(pts.row(i), &mean)).collect();
        let total: f64 = sq.iter().sum();
        let d_mean = sq
            .iter()
            .map(|s| (n as f64 * s + total) / (n - 1) as f64)
            .collect();
        let avg = |i: usize, list: &[usize]| {
            list.iter().map(|&j| pts.dist2(i, j)).sum::<f64>() / k as f64
        };
        NeighborStats {
            d_mean,
            d_knn: (0..n).map(|i| avg(i, &own[i])).collect(),
            d_mutual: (0..n).map(|i| avg(i, &other[i])).collect(),
            k,
            t_prime: n,
        }
    }

    /// Rank of each mutual neighbor among admissible points by distance from
    /// `i`, ties averaged; returns the mean rank.
    fn rank_stats(pts: &PointCloud, other: &[Vec<usize>], q: &NeighborQuery) -> RankStats {
        let n = pts.len();
        let g_mutual = (0..n)
            .into_par_iter()
            .map(|i| {
                let targets: Vec<f64> = other[i].iter().map(|&j| pts.dist2(i, j)).collect();
                let mut less = vec![0usize; targets.len()];
                let mut equal = vec![0usize; targets.len()];
                let row = pts.row(i);
                for l in 0..n {
                    if l.abs_diff(i) <= q.theiler_window {
                        continue;
                    }
                    let d = dist2(row, pts.row(l));
                    for (t, &td) in targets.iter().enumerate() {
                        if d < td {
                            less[t] += 1;
                        } else if d == td {
                            equal[t] += 1;
                        }
                    }
                }
                let ranks: f64 = less
                    .iter()
                    .zip(&equal)
                    .map(|(&l, &e)| l as f64 + (e as f64 + 1.0) / 2.0)
                    .sum();
                ranks / targets.len() as f64
            })
            .collect();
        RankStats {
            g_mutual,
            g_mean: n as f64 / 2.0,
            g_knn: (q.k as f64 + 1.0) / 2.0,
            k: q.k,
        }
    }

    pub fn m_result(&self) -> Result<MResult> {
        let k = self.query.k;
        let stats_x = Self::stats(&self.x, &self.nn_x, &self.nn_y, k);
        let stats_y = Self::stats(&self.y, &self.nn_y, &self.nn_x, k);
        let (m_xy, skip_x) = m_score(&stats_x)?;
        let (m_yx, skip_y) = m_score(&stats_y)?;
        Ok(MResult {
            m_xy,
            m_yx,
            delta_m: m_xy - m_yx,
            m_s: 0.5 * (m_xy + m_yx),
            skipped: skip_x + skip_y,
            stats_x,
            stats_y,
        })
    }

    pub fn l_result(&self) -> Result<LResult> {
        let ranks_x = Self::rank_stats(&self.x, &self.nn_y, &self.query);
        let ranks_y = Self::rank_stats(&self.y, &self.nn_x, &self.query);
        let per_x = l_terms(&ranks_x);
        let per_y = l_terms(&ranks_y);
        let l_xy = per_x.iter().sum::<f64>() / per_x.len() as f64;
        let l_yx = per_y.iter().sum::<f64>() / per_y.len() as f64;
        let diffs: Vec<f64> = per_x.iter().zip(&per_y).map(|(a, b)| a - b).collect();
        Ok(LResult {
            l_xy,
            l_yx,
            delta_l: l_xy - l_yx,
            wilcoxon: match wilcoxon_signed_rank(&diffs) {
                Ok(w) => Some(w),
                Err(Error::DegenerateInput(_) | Error::Validation(_)) => None,
                Err(e) => return Err(e),
            },
            ranks_x,
            ranks_y,
        })
    }
}

/// Mean of the per-point ratios, clamped at zero. Points whose denominator
/// vanishes are skipped; returns the score and the number skipped.
pub fn m_score(s: &NeighborStats) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut used = 0;
    for i in 0..s.t_prime {
        let den = s.d_mean[i] - s.d_knn[i];
        if den > 0.0 {
            sum += (s.d_mean[i] - s.d_mutual[i]) / den;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::degenerate(
            "every point is equidistant from all others",
        ));
    }
    Ok(((sum / used as f64).max(0.0), s.t_prime - used))
}

fn l_terms(r: &RankStats) -> Vec<f64> {
    let den = r.g_mean - r.g_knn;
    r.g_mutual.iter().map(|g| (r.g_mean - g) / den).collect()
}

pub fn andrzejak_m(nx: &DelayEmbedding, ny: &DelayEmbedding, q: NeighborQuery) -> Result<MResult> {
    MutualNeighbors::new(nx, ny, q)?.m_result()
}

pub fn chicharro_l(nx: &DelayEmbedding, ny: &DelayEmbedding, q: NeighborQuery) -> Result<LResult> {
    MutualNeighbors::new(nx, ny, q)?.l_result()
}
