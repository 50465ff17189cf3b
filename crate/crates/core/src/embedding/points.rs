use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Row-major set of points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
}

/// Which state block of a trajectory to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    X,
    Y,
    Joint,
}

impl PointCloud {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::validation(format!(
                "{} values cannot be split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(PointCloud { data, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("rows have unequal lengths"));
        }
        Self::new(rows.concat(), dim)
    }

    /// State slice of a trajectory over time indices `start..start + len`.
    pub fn from_trajectory(
        traj: &Trajectory,
        slice: Slice,
        start: usize,
        len: usize,
    ) -> Result<Self> {
        if start + len > traj.len() {
            return Err(Error::validation(format!(
                "rows {start}..{} exceed trajectory length {}",
                start + len,
                traj.len()
            )));
        }
        let (n_x, n_y) = traj.component_split;
        let (lo, dim) = match slice {
            Slice::X => (0, n_x),
            Slice::Y => (n_x, n_y),
            Slice::Joint => (0, n_x + n_y),
        };
        let mut data = Vec::with_capacity(len * dim);
        for t in start..start + len {
            data.extend_from_slice(&traj.row(t)[lo..lo + dim]);
        }
        Self::new(data, dim)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Contiguous subset of rows.
    pub fn rows(&self, start: usize, len: usize) -> PointCloud {
        PointCloud {
            data: self.data[start * self.dim..(start + len) * self.dim].to_vec(),
            dim: self.dim,
        }
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        dist2(self.row(i), self.row(j))
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist2(i, j).sqrt()
    }

    /// Population standard deviation pooled over all coordinates, i.e. the
    /// RMS distance of points from their centroid divided by `sqrt(dim)`.
    pub fn pooled_std(&self) -> f64 {
        let n = self.len() as f64;
        let mut var = 0.0;
        for c in 0..self.dim {
            let mean = (0..self.len()).map(|i| self.row(i)[c]).sum::<f64>() / n;
            var += (0..self.len())
                .map(|i| (self.row(i)[c] - mean).powi(2))
                .sum::<f64>()
                / n;
        }
        (var / self.dim as f64).sqrt()
    }
}

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}
