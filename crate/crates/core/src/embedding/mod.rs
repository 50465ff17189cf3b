//! Measurement series, delay embeddings and neighbor search.
//!
//! Delay vectors are stored current value first: row `t` of an embedding is
//! `[s(t), s(t - τ), ..., s(t - (m-1)τ)]`, which is the reverse of what many
//! libraries produce.

mod kdtree;
mod points;

use std::fmt::Write as _;
use std::path::Path;

pub use kdtree::{Neighbor, NeighborIndex};
pub use points::{dist2, PointCloud, Slice};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Which part of the joint state a measurement reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    XOnly,
    YOnly,
    Joint,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementKind {
    CoordinateProjection(usize),
    LinearFunctional(Vec<f64>),
}

/// Scalar observation function on one state block.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub kind: MeasurementKind,
    pub domain: Domain,
}

impl Measurement {
    pub fn projection(domain: Domain, index: usize) -> Self {
        Measurement {
            kind: MeasurementKind::CoordinateProjection(index),
            domain,
        }
    }

    pub fn linear(domain: Domain, h: Vec<f64>) -> Self {
        Measurement {
            kind: MeasurementKind::LinearFunctional(h),
            domain,
        }
    }

    pub fn label(&self) -> String {
        let d = match self.domain {
            Domain::XOnly => "x",
            Domain::YOnly => "y",
            Domain::Joint => "xy",
        };
        match &self.kind {
            MeasurementKind::CoordinateProjection(i) => format!("{d}[{i}]"),
            MeasurementKind::LinearFunctional(_) => format!("<h,{d}>"),
        }
    }
}

/// Applies a measurement to every state of a trajectory.
pub fn measure(traj: &Trajectory, meas: &Measurement) -> Result<Vec<f64>> {
    let (n_x, n_y) = traj.component_split;
    let (lo, dim) = match meas.domain {
        Domain::XOnly => (0, n_x),
        Domain::YOnly => (n_x, n_y),
        Domain::Joint => (0, n_x + n_y),
    };
    match &meas.kind {
        MeasurementKind::CoordinateProjection(i) => {
            if *i >= dim {
                return Err(Error::validation(format!(
                    "coordinate {i} is outside a domain of dimension {dim}"
                )));
            }
            Ok((0..traj.len()).map(|t| traj.row(t)[lo + i]).collect())
        }
        MeasurementKind::LinearFunctional(h) => {
            if h.len() != dim {
                return Err(Error::validation(format!(
                    "functional has length {}, domain dimension is {dim}",
                    h.len()
                )));
            }
            Ok((0..traj.len())
                .map(|t| {
                    h.iter()
                        .zip(&traj.row(t)[lo..lo + dim])
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayEmbedding {
    pub points: PointCloud,
    pub m: usize,
    pub tau: usize,
    /// Source time index of row 0, `(m-1)·τ`.
    pub base_offset: usize,
    pub source: Option<Measurement>,
}

impl DelayEmbedding {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    /// Source time index of row `i`.
    pub fn time_of(&self, i: usize) -> usize {
        self.base_offset + i
    }

    pub fn with_source(mut self, meas: Measurement) -> Self {
        self.source = Some(meas);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# m={} tau={} base_offset={}\n",
            self.m, self.tau, self.base_offset
        );
        let header: Vec<String> = (0..self.m)
            .map(|k| format!("lag{}", k * self.tau))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Builds the delay embedding of a scalar series.
pub fn delay_embed(series: &[f64], m: usize, tau: usize) -> Result<DelayEmbedding> {
    if m == 0 || tau == 0 {
        return Err(Error::validation(
            "embedding dimension and lag must be positive",
        ));
    }
    let span = (m - 1) * tau;
    if series.len() <= span {
        return Err(Error::validation(format!(
            "series of length {} is too short for m = {m}, tau = {tau}",
            series.len()
        )));
    }
    let rows = series.len() - span;
    let mut data = Vec::with_capacity(rows * m);
    for t in span..series.len() {
        data.extend((0..m).map(|k| series[t - k * tau]));
    }
    Ok(DelayEmbedding {
        points: PointCloud::new(data, m)?,
        m,
        tau,
        base_offset: span,
        source: None,
    })
}

/// Contemporaneous pairing of two embeddings of the same time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    /// First shared source time index.
    pub start_time: usize,
    pub len: usize,
    pub offset_a: usize,
    pub offset_b: usize,
}

impl Alignment {
    pub fn row_a(&self, i: usize) -> usize {
        self.offset_a + i
    }

    pub fn row_b(&self, i: usize) -> usize {
        self.offset_b + i
    }

    pub fn swap(self) -> Alignment {
        Alignment {
            offset_a: self.offset_b,
            offset_b: self.offset_a,
            ..self
        }
    }
}

pub fn align(a: &DelayEmbedding, b: &DelayEmbedding) -> Result<Alignment> {
    let start = a.base_offset.max(b.base_offset);
    let end = (a.base_offset + a.len()).min(b.base_offset + b.len());
    if end <= start {
        return Err(Error::validation("embeddings share no time indices"));
    }
    Ok(Alignment {
        start_time: start,
        len: end - start,
        offset_a: start - a.base_offset,
        offset_b: start - b.base_offset,
    })
}

/// Neighbor count and Theiler window for a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborQuery {
    pub k: usize,
    pub theiler_window: usize,
}

impl NeighborQuery {
    pub fn new(k: usize, theiler_window: usize) -> Self {
        NeighborQuery { k, theiler_window }
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if self.k + 2 * self.theiler_window >= n_points {
            return Err(Error::validation(format!(
                "k = {} with Theiler window {} needs more than {n_points} points",
                self.k, self.theiler_window
            )));
        }
        Ok(())
    }
}

/// Neighbors of row `query_index` ordered by distance, excluding rows within
/// the Theiler window. Builds a fresh index; reuse [`NeighborIndex`] for
/// repeated queries.
pub fn knn(emb: &DelayEmbedding, query_index: usize, q: &NeighborQuery) -> Result<Vec<usize>> {
    q.validate(emb.len())?;
    let index = NeighborIndex::new(&emb.points);
    knn_in(&index, query_index, q)
}

pub fn knn_in(index: &NeighborIndex, query_index: usize, q: &NeighborQuery) -> Result<Vec<usize>> {
    if query_index >= index.points().len() {
        return Err(Error::validation(format!(
            "query index {query_index} is out of range"
        )));
    }
    let found = index.knn_index(query_index, q.k, q.theiler_window);
    if found.len() < q.k {
        return Err(Error::validation(format!(
            "only {} admissible neighbors for query {query_index}, need {}",
            found.len(),
            q.k
        )));
    }
    Ok(found.into_iter().map(|n| n.index).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> Trajectory {
        let samples: Vec<f64> = (0..40).map(|v| v as f64 * 0.5 - 3.0).collect();
        Trajectory::new(samples, (2, 2), 1.0, 0).unwrap()
    }

    #[test]
    fn hand_embedding() {
        let e = delay_embed(&[1.0, 2.0, 3.0, 4.0], 2, 1).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.row(0), &[2.0, 1.0]);
        assert_eq!(e.row(1), &[3.0, 2.0]);
        assert_eq!(e.row(2), &[4.0, 3.0]);
        assert_eq!(e.base_offset, 1);
    }

    #[test]
    fn m_one_is_the_series() {
        let s = [0.3, -1.0, 2.5];
        let e = delay_embed(&s, 1, 3).unwrap();
        assert_eq!(e.points.data(), &s);
    }

    #[test]
    fn full_size_row_count() {
        let s = vec![0.0; 10_000];
        assert_eq!(delay_embed(&s, 250, 1).unwrap().len(), 9751);
        assert_eq!(delay_embed(&s, 6, 8).unwrap().len(), 10_000 - 40);
    }

    #[test]
    fn too_short_series_rejected() {
        assert!(delay_embed(&[1.0, 2.0, 3.0], 3, 1).is_ok());
        assert!(matches!(
            delay_embed(&[1.0, 2.0, 3.0], 4, 1),
            Err(Error::Validation(_))
        ));
        assert!(delay_embed(&[1.0; 5], 3, 2).is_ok());
        assert!(delay_embed(&[1.0; 4], 3, 2).is_err());
    }

    #[test]
    fn series_is_reconstructible() {
        let s: Vec<f64> = (0..30).map(|v| (v as f64).sin()).collect();
        let e = delay_embed(&s, 4, 3).unwrap();
        // The oldest lag of the first rows covers the prefix, column 0 the rest.
        let mut rebuilt: Vec<f64> = (0..e.base_offset).map(|t| e.row(t)[e.m - 1]).collect();
        rebuilt.extend((0..e.len()).map(|i| e.row(i)[0]));
        assert_eq!(rebuilt, s);
    }

    #[test]
    fn projection_and_basis_functional_agree() {
        let t = traj();
        let p = measure(&t, &Measurement::projection(Domain::XOnly, 0)).unwrap();
        let l = measure(&t, &Measurement::linear(Domain::XOnly, vec![1.0, 0.0])).unwrap();
        assert_eq!(p, l);
        assert_eq!(p, t.column(0));
        let y1 = measure(&t, &Measurement::projection(Domain::YOnly, 1)).unwrap();
        assert_eq!(y1, t.column(3));
    }

    #[test]
    fn measurement_dimension_checked() {
        let t = traj();
        assert!(measure(&t, &Measurement::projection(Domain::XOnly, 2)).is_err());
        assert!(measure(&t, &Measurement::linear(Domain::Joint, vec![1.0; 3])).is_err());
    }

    #[test]
    fn alignment_by_index_arithmetic() {
        let s: Vec<f64> = (0..50).map(f64::from).collect();
        let a = delay_embed(&s, 3, 1).unwrap();
        let b = delay_embed(&s, 5, 1).unwrap();
        let al = align(&a, &b).unwrap();
        assert_eq!(al.start_time, 4);
        assert_eq!(al.len, 46);
        // Timestamp matching by brute force.
        let pairs: Vec<(usize, usize)> = (0..a.len())
            .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| a.row(i)[0] == b.row(j)[0])
            .collect();
        assert_eq!(pairs.len(), al.len);
        for (n, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!((al.row_a(n), al.row_b(n)), (i, j));
        }
        let back = align(&b, &a).unwrap();
        assert_eq!(back, al.swap());
    }

    #[test]
    fn colinear_nearest_neighbor() {
        let s: Vec<f64> = (0..10).map(f64::from).collect();
        let e = delay_embed(&s, 1, 1).unwrap();
        assert_eq!(knn(&e, 0, &NeighborQuery::new(1, 0)).unwrap(), vec![1]);
        assert_eq!(knn(&e, 5, &NeighborQuery::new(2, 2)).unwrap(), vec![2, 8]);
        assert!(knn(&e, 0, &NeighborQuery::new(6, 2)).is_err());
    }

    #[test]
    fn csv_has_parameter_comment() {
        let e = delay_embed(&[1.0, 2.0, 3.0], 2, 1).unwrap();
        assert_eq!(
            e.to_csv(),
            "# m=2 tau=1 base_offset=1\nlag0,lag1\n2,1\n3,2\n"
        );
    }
}
