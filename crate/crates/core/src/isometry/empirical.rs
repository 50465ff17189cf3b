use rand::Rng as _;
use serde::Serialize;

use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::rng;

use super::maps::MapUnderTest;

/// Pairs whose domain points are closer than this are redrawn.
pub const MIN_DOMAIN_DISTANCE: f64 = 1e-12;

/// Extreme and percentile squared-distance ratios of a map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryEstimate {
    pub lower: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
    pub upper: f64,
    pub n_pairs: usize,
    pub rng_seed: u64,
    /// Pair attaining `lower`.
    pub argmin: (usize, usize),
    /// Pair attaining `upper`.
    pub argmax: (usize, usize),
}

impl IsometryEstimate {
    pub fn from_ratios(pairs: &[(usize, usize)], ratios: &[f64], rng_seed: u64) -> Result<Self> {
        if ratios.is_empty() || ratios.len() != pairs.len() {
            return Err(Error::degenerate("no distance ratios to summarize"));
        }
        let mut imin = 0;
        let mut imax = 0;
        for (k, r) in ratios.iter().enumerate() {
            if r < &ratios[imin] {
                imin = k;
            }
            if r > &ratios[imax] {
                imax = k;
            }
        }
        let mut sorted = ratios.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(IsometryEstimate {
            lower: sorted[0],
            p5: percentile(&sorted, 5.0),
            p50: percentile(&sorted, 50.0),
            p95: percentile(&sorted, 95.0),
            upper: sorted[sorted.len() - 1],
            n_pairs: ratios.len(),
            rng_seed,
            argmin: pairs[imin],
            argmax: pairs[imax],
        })
    }

    /// `(statistic, value)` rows in a fixed order.
    pub fn stats(&self) -> [(&'static str, f64); 5] {
        [
            ("lower", self.lower),
            ("p5", self.p5),
            ("p50", self.p50),
            ("p95", self.p95),
            ("upper", self.upper),
        ]
    }
}

/// Percentile of sorted data with linear interpolation between order
/// statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn coincident(domains: &[&PointCloud], i: usize, j: usize) -> bool {
    let tol2 = MIN_DOMAIN_DISTANCE * MIN_DOMAIN_DISTANCE;
    domains.iter().any(|d| d.dist2(i, j) < tol2)
}

/// Draws `n_pairs` index pairs uniformly with replacement, redrawing `i = j`
/// and any pair that nearly coincides in one of `domains`.
pub fn sample_pairs(
    domains: &[&PointCloud],
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let n = domains.first().map_or(0, |d| d.len());
    if n < 2 {
        return Err(Error::degenerate("need at least two points to form a pair"));
    }
    if n_pairs == 0 {
        return Err(Error::validation("n_pairs must be at least 1"));
    }
    for d in domains {
        if (1..n).all(|j| coincident(&[d], 0, j)) {
            return Err(Error::degenerate("all domain points coincide"));
        }
    }
    let mut rng = rng::seeded(seed);
    let mut pairs = Vec::with_capacity(n_pairs);
    let max_draws = 1000 * n_pairs + 100_000;
    let mut draws = 0;
    while pairs.len() < n_pairs {
        draws += 1;
        if draws > max_draws {
            return Err(Error::degenerate(
                "almost all sampled domain pairs coincide",
            ));
        }
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j && !coincident(domains, i, j) {
            pairs.push((i, j));
        }
    }
    Ok(pairs)
}

/// Every distinct pair, in lexicographic order, skipping coincident ones.
pub fn all_pairs(domains: &[&PointCloud]) -> Vec<(usize, usize)> {
    let n = domains.first().map_or(0, |d| d.len());
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !coincident(domains, i, j))
        .collect()
}

pub fn pair_ratios(map: &MapUnderTest, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(i, j)| map.ratio(i, j)).collect()
}

/// Samples `n_pairs` pairs and summarizes the squared-distance ratios.
pub fn empirical_isometry(
    map: &MapUnderTest,
    n_pairs: usize,
    seed: u64,
) -> Result<IsometryEstimate> {
    let pairs = sample_pairs(&[map.domain], n_pairs, seed)?;
    IsometryEstimate::from_ratios(&pairs, &pair_ratios(map, &pairs), seed)
}

/// Ratio profile over every distinct pair. Quadratic in the number of points.
pub fn exact_isometry(map: &MapUnderTest) -> Result<IsometryEstimate> {
    let pairs = all_pairs(&[map.domain]);
    if pairs.is_empty() {
        return Err(Error::degenerate("all domain points coincide"));
    }
    IsometryEstimate::from_ratios(&pairs, &pair_ratios(map, &pairs), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::MapKind;

    fn cloud(seed: u64, n: usize, dim: usize) -> PointCloud {
        let mut rng = rng::seeded(seed);
        PointCloud::new((0..n * dim).map(|_| rng.random::<f64>()).collect(), dim).unwrap()
    }

    #[test]
    fn identity_map_has_unit_ratios() {
        let p = cloud(1, 100, 3);
        let map = MapUnderTest::new(MapKind::PiX, &p, &p).unwrap();
        let est = empirical_isometry(&map, 1000, 4).unwrap();
        assert_eq!((est.lower, est.upper), (1.0, 1.0));
    }

    #[test]
    fn doubling_scales_squared_ratio_by_four() {
        let p = cloud(2, 100, 2);
        let q = PointCloud::new(p.data().iter().map(|v| 2.0 * v).collect(), 2).unwrap();
        let map = MapUnderTest::new(MapKind::PiX, &p, &q).unwrap();
        let est = empirical_isometry(&map, 500, 1).unwrap();
        assert!((est.lower - 4.0).abs() < 1e-12 && (est.upper - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_invariant() {
        let p = cloud(3, 200, 2);
        let q = cloud(4, 200, 2);
        let map = MapUnderTest::new(MapKind::PsiYtoX, &p, &q).unwrap();
        let est = empirical_isometry(&map, 5000, 9).unwrap();
        assert!(0.0 <= est.lower && est.lower <= est.p5 && est.p5 <= est.p50);
        assert!(est.p50 <= est.p95 && est.p95 <= est.upper);
        assert_eq!(map.ratio(est.argmax.0, est.argmax.1), est.upper);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = PointCloud::new(vec![1.0; 20], 2).unwrap();
        let map = MapUnderTest::new(MapKind::PiX, &p, &p).unwrap();
        assert!(matches!(
            empirical_isometry(&map, 10, 0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn near_duplicates_are_redrawn() {
        let p = PointCloud::new(vec![0.0, 0.0, 1.0, 5.0], 1).unwrap();
        let pairs = sample_pairs(&[&p], 200, 3).unwrap();
        assert!(pairs.iter().all(|&(i, j)| p.dist2(i, j) > 0.0));
    }

    #[test]
    fn interpolated_percentiles() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&s, 50.0), 2.0);
        assert!((percentile(&s, 5.0) - 0.2).abs() < 1e-15);
        assert!((percentile(&s, 95.0) - 3.8).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_pairs() {
        let p = cloud(5, 50, 2);
        assert_eq!(
            sample_pairs(&[&p], 100, 8).unwrap(),
            sample_pairs(&[&p], 100, 8).unwrap()
        );
    }
}
