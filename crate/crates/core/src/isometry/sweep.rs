use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::pipeline::{observe, EmbeddingSpec, SimulationSpec};
use crate::rng;

use super::empirical::{empirical_isometry, IsometryEstimate};
use super::maps::MapKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub c: f64,
    pub map: MapKind,
    pub estimate: IsometryEstimate,
}

/// Pair-sampling seed for one (grid point, map) cell.
pub fn cell_seed(master: u64, c_index: usize, map: MapKind) -> u64 {
    rng::derive_seed(master, &[c_index as u64, rng::label_key(map.label())])
}

/// One grid point: simulate at `c`, embed, profile every requested map.
pub fn sweep_cell(
    sim: &SimulationSpec,
    emb: &EmbeddingSpec,
    c_index: usize,
    c: f64,
    maps: &[MapKind],
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    let (_, views) = observe(sim, emb, c, seed)?;
    maps.iter()
        .map(|&kind| {
            let map = views.map(kind)?;
            let estimate = empirical_isometry(&map, n_pairs, cell_seed(seed, c_index, kind))?;
            Ok(SweepRecord {
                c,
                map: kind,
                estimate,
            })
        })
        .collect()
}

/// Distance-ratio statistics of each map as the coupling strength varies.
pub fn distance_ratio_sweep(
    sim: &SimulationSpec,
    emb: &EmbeddingSpec,
    grid: &[f64],
    maps: &[MapKind],
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    let cells: Vec<Result<Vec<SweepRecord>>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &c)| sweep_cell(sim, emb, i, c, maps, n_pairs, seed))
        .collect();
    let mut out = Vec::new();
    for cell in cells {
        out.extend(cell?);
    }
    Ok(out)
}
