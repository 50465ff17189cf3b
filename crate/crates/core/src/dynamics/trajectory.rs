use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled state sequence on (or approaching) an attractor.
///
/// Samples are stored row-major: row `t` is the joint state `(x_t, y_t)`,
/// with the first `n_x` columns belonging to the driver and the remaining
/// `n_y` to the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<f64>,
    n_rows: usize,
    /// Sampling period in time units (1 for maps).
    pub dt: f64,
    /// Number of leading samples that were generated and then dropped.
    pub transient_discarded: usize,
    /// `(n_x, n_y)` split of the state columns.
    pub component_split: (usize, usize),
}

/// JSON sidecar written next to the binary trajectory cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub n_rows: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub transient_discarded: usize,
    pub encoding: String,
}

impl Trajectory {
    pub fn new(
        samples: Vec<f64>,
        component_split: (usize, usize),
        dt: f64,
        transient_discarded: usize,
    ) -> Result<Self> {
        let dim = component_split.0 + component_split.1;
        if dim == 0 {
            return Err(Error::validation(
                "trajectory state dimension must be positive",
            ));
        }
        if samples.is_empty() || !samples.len().is_multiple_of(dim) {
            return Err(Error::validation(format!(
                "trajectory buffer of length {} is not a positive multiple of dimension {dim}",
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value in trajectory row {}",
                pos / dim
            )));
        }
        Ok(Trajectory {
            n_rows: samples.len() / dim,
            samples,
            dt,
            transient_discarded,
            component_split,
        })
    }

    pub fn len(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn dim(&self) -> usize {
        self.component_split.0 + self.component_split.1
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let d = self.dim();
        &self.samples[t * d..(t + 1) * d]
    }

    /// Driver part `x_t` of row `t`.
    pub fn x(&self, t: usize) -> &[f64] {
        &self.row(t)[..self.component_split.0]
    }

    /// Response part `y_t` of row `t`.
    pub fn y(&self, t: usize) -> &[f64] {
        &self.row(t)[self.component_split.0..]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|t| self.row(t)[c]).collect()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Absolute time of row `t`, counting the discarded transient.
    pub fn time(&self, t: usize) -> f64 {
        (self.transient_discarded + t) as f64 * self.dt
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            write!(w, "t")?;
            for c in 0..self.dim() {
                write!(w, ",x{}", c + 1)?;
            }
            writeln!(w)?;
            for t in 0..self.n_rows {
                write!(w, "{}", self.time(t))?;
                for v in self.row(t) {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }

    pub fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            dt: self.dt,
            n_rows: self.n_rows,
            n_x: self.component_split.0,
            n_y: self.component_split.1,
            transient_discarded: self.transient_discarded,
            encoding: "f64-le-row-major".to_string(),
        }
    }

    /// Writes the raw little-endian samples to `path` and the metadata to
    /// `path` with a `.json` extension.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.samples.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
        let sidecar = path.with_extension("json");
        let json = serde_json::to_string_pretty(&self.meta())?;
        fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let sidecar = path.with_extension("json");
        let json = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        let meta: TrajectoryMeta = serde_json::from_str(&json)?;
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() != meta.n_rows * (meta.n_x + meta.n_y) * 8 {
            return Err(Error::validation(format!(
                "binary cache {} does not match its sidecar dimensions",
                path.display()
            )));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Trajectory::new(
            samples,
            (meta.n_x, meta.n_y),
            meta.dt,
            meta.transient_discarded,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_rows() {
        let err = Trajectory::new(vec![0.0, 1.0, f64::NAN, 2.0], (1, 1), 1.0, 0).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn slices_follow_component_split() {
        let traj = Trajectory::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], (2, 1), 0.5, 3).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.x(1), &[4.0, 5.0]);
        assert_eq!(traj.y(1), &[6.0]);
        assert_eq!(traj.time(0), 1.5);
    }

    #[test]
    fn binary_cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.bin");
        let traj = Trajectory::new(vec![0.1, -2.5, 3.25, 1e-300], (1, 1), 0.025, 1000).unwrap();
        traj.write_binary(&path).unwrap();
        assert_eq!(Trajectory::read_binary(&path).unwrap(), traj);
    }

    #[test]
    fn csv_header_names_every_state_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let traj = Trajectory::new(vec![1.0, 2.0, 3.0], (2, 1), 1.0, 0).unwrap();
        traj.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,x1,x2,x3\n0,1,2,3\n");
    }
}
