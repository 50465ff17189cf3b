use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::causal_tests::{
    expansivity_certificate, test_direction, CertificateThreshold, Direction, Outcome, TestSettings,
};
use crate::dynamics::{example1_with_coupling, simulate_linear, SystemKind};
use crate::embedding::{DelayEmbedding, NeighborQuery};
use crate::error::{Error, Result};
use crate::heuristics::{ccm, continuity_curves, CcmSettings, MutualNeighbors, PecoraSettings};
use crate::isometry::{
    analytic_linear_bounds, chain_check, empirical_isometry, phi_matrix, AttractorViews,
    IsometryEstimate, MapKind, ObservationSpec, TheoremBound,
};
use crate::pipeline::{measurement_seed, observe};
use crate::rng;

use super::config::{ExperimentConfig, Format, Heuristic};
use super::output::{
    ensure_dir, write_json, write_records, CellEntry, Manifest, Record, SCHEMA_VERSION,
};

/// What a command wrote, and how many grid cells failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    pub failed_cells: usize,
}

/// Seed of one (grid point, label) task.
pub fn task_seed(master: u64, c_index: usize, label: &str) -> u64 {
    rng::derive_seed(master, &[c_index as u64, rng::label_key(label)])
}

fn run_id(cfg: &ExperimentConfig) -> String {
    format!("{}-{}", cfg.system.kind.label(), cfg.seed)
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    c_index: usize,
    c: f64,
    records: Vec<Record>,
    seeds: Vec<(String, u64)>,
}

impl<'a> Cell<'a> {
    fn new(cfg: &'a ExperimentConfig, c_index: usize, c: f64) -> Self {
        Cell {
            cfg,
            c_index,
            c,
            records: Vec::new(),
            seeds: Vec::new(),
        }
    }

    fn seed(&mut self, label: &str) -> u64 {
        let s = task_seed(self.cfg.seed, self.c_index, label);
        self.seeds.push((label.to_string(), s));
        s
    }

    fn push(&mut self, map: &str, stat: impl Into<String>, value: f64) {
        self.records.push(Record {
            run_id: run_id(self.cfg),
            system: self.cfg.system.kind.label().to_string(),
            c: self.c,
            map: map.to_string(),
            stat: stat.into(),
            value,
        });
    }

    fn push_estimate(&mut self, map: &str, est: &IsometryEstimate) {
        for (stat, v) in est.stats() {
            self.push(map, stat, v);
        }
        self.push(map, "n_pairs", est.n_pairs as f64);
    }

    fn isometry(&mut self, views: &AttractorViews, maps: &[MapKind]) -> Result<()> {
        let n_pairs = self.cfg.analysis.n_pairs;
        for &kind in maps {
            let seed = self.seed(kind.label());
            let est = empirical_isometry(&views.map(kind)?, n_pairs, seed)?;
            self.push_estimate(kind.label(), &est);
        }
        if maps.contains(&MapKind::PsiYtoX) {
            let seed = self.seed("chain");
            let chain = chain_check(views, n_pairs, seed)?;
            self.push("chain", "psi_max", chain.psi_max);
            self.push("chain", "bound", chain.bound());
            self.push("chain", "holds", f64::from(u8::from(chain.holds(0.0))));
        }
        Ok(())
    }

    fn heuristics(&mut self, views: &AttractorViews) -> Result<()> {
        let a = &self.cfg.analysis;
        let w = self.cfg.embedding().theiler_window;
        let (nx, ny): (&DelayEmbedding, &DelayEmbedding) = (&views.gamma_x, &views.phi_y);
        let wants = |h: Heuristic| a.heuristics.contains(&h);
        if wants(Heuristic::M) || wants(Heuristic::L) {
            let mn = MutualNeighbors::new(nx, ny, NeighborQuery::new(a.k, w))?;
            if wants(Heuristic::M) {
                let m = mn.m_result()?;
                for (s, v) in [
                    ("m_xy", m.m_xy),
                    ("m_yx", m.m_yx),
                    ("delta_m", m.delta_m),
                    ("m_s", m.m_s),
                ] {
                    self.push("m", s, v);
                }
                self.push("m", "skipped", m.skipped as f64);
            }
            if wants(Heuristic::L) {
                let l = mn.l_result()?;
                for (s, v) in [("l_xy", l.l_xy), ("l_yx", l.l_yx), ("delta_l", l.delta_l)] {
                    self.push("l", s, v);
                }
                let (wp, p) = l
                    .wilcoxon
                    .map_or((f64::NAN, f64::NAN), |t| (t.w_plus, t.p_one_sided));
                self.push("l", "wilcoxon_w_plus", wp);
                self.push("l", "wilcoxon_p", p);
            }
        }
        if wants(Heuristic::Ccm) {
            let mut settings = CcmSettings::new(a.library_sizes.clone(), w);
            settings.replicates = a.ccm_replicates;
            for (label, source, target) in [
                ("ccm_y_to_x", ny, &views.m_x),
                ("ccm_x_to_y", nx, &views.m_y),
            ] {
                let seed = self.seed(label);
                let r = ccm(&source.points, target, &settings, seed)?;
                for (l, s) in r.library_sizes.iter().zip(&r.skill) {
                    self.push(label, format!("skill_L={l}"), *s);
                }
                self.push(label, "trend", r.trend);
            }
        }
        if wants(Heuristic::Pecora) {
            let mut settings = PecoraSettings::new(a.epsilon_grid.clone(), a.n_probe, w);
            settings.k_max = a.k_max;
            let seed = self.seed("pecora");
            let cc = continuity_curves(&ny.points, &nx.points, &settings, seed)?;
            for (k, eps) in cc.epsilon.iter().enumerate() {
                self.push(
                    "pecora_forward",
                    format!("theta_eps={eps}"),
                    cc.forward.theta[k],
                );
                self.push(
                    "pecora_inverse",
                    format!("theta_eps={eps}"),
                    cc.inverse.theta[k],
                );
                self.push("pecora_product", format!("theta_eps={eps}"), cc.product[k]);
                self.push(
                    "pecora_forward",
                    format!("coverage_eps={eps}"),
                    cc.forward.coverage[k],
                );
                self.push(
                    "pecora_inverse",
                    format!("coverage_eps={eps}"),
                    cc.inverse.coverage[k],
                );
            }
        }
        if wants(Heuristic::Certificate) {
            for dir in [Direction::XtoY, Direction::YtoX] {
                let label = format!("certificate_{}", dir.label());
                let settings = TestSettings {
                    n_pairs: a.n_pairs,
                    seed: self.seed(&label),
                    assumption2_declared: false,
                    check_assumption1: false,
                };
                let v = test_direction(views, dir, &settings)?;
                self.push(
                    &label,
                    "ruled_out",
                    f64::from(u8::from(v.outcome == Outcome::RuledOut)),
                );
                self.push(
                    &label,
                    "inconclusive",
                    f64::from(u8::from(v.outcome == Outcome::Inconclusive)),
                );
                self.push(
                    &label,
                    "threshold",
                    v.threshold.map_or(f64::NAN, |t| t.threshold),
                );
                self.push(
                    &label,
                    "witness_ratio",
                    v.witness.map_or(f64::NAN, |w| w.ratio),
                );
            }
        }
        Ok(())
    }
}

fn run_cell<'a>(
    cfg: &'a ExperimentConfig,
    c_index: usize,
    c: f64,
    maps: &[MapKind],
    heuristics: bool,
) -> (Cell<'a>, Result<()>) {
    let mut cell = Cell::new(cfg, c_index, c);
    let res = (|| {
        let (_, views) = observe(&cfg.system, &cfg.embedding(), c, cfg.seed)?;
        cell.isometry(&views, maps)?;
        if heuristics {
            cell.heuristics(&views)?;
        }
        Ok(())
    })();
    (cell, res)
}

fn manifest(
    cfg: &ExperimentConfig,
    command: &str,
    outputs: &[PathBuf],
    cells: Vec<CellEntry>,
) -> Result<Manifest> {
    Ok(Manifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg)?,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
            })
            .collect(),
        cells,
    })
}

fn finish(
    cfg: &ExperimentConfig,
    out: &Path,
    command: &str,
    mut outputs: Vec<PathBuf>,
    cells: Vec<CellEntry>,
) -> Result<RunSummary> {
    let failed_cells = cells.iter().filter(|c| c.status != "ok").count();
    let path = out.join("manifest.json");
    write_json(&path, &manifest(cfg, command, &outputs, cells)?)?;
    outputs.push(path);
    Ok(RunSummary {
        outputs,
        failed_cells,
    })
}

pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    ensure_dir(out)?;
    let traj = cfg.system.simulate(cfg.system.coupling)?;
    let path = match cfg.output.format {
        Format::Csv => {
            let p = out.join("trajectory.csv");
            traj.write_csv(&p)?;
            p
        }
        Format::Json => {
            let p = out.join("trajectory.json");
            let rows: Vec<&[f64]> = (0..traj.len()).map(|t| traj.row(t)).collect();
            write_json(
                &p,
                &serde_json::json!({ "schema_version": SCHEMA_VERSION, "meta": traj.meta(), "rows": rows }),
            )?;
            p
        }
    };
    finish(cfg, out, "simulate", vec![path], Vec::new())
}

pub fn run_embed(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    ensure_dir(out)?;
    let (_, views) = observe(&cfg.system, &cfg.embedding(), cfg.system.coupling, cfg.seed)?;
    let mut named = vec![
        ("gamma_x", &views.gamma_x),
        ("gamma_y", &views.gamma_y),
        ("phi_x", &views.phi_x),
        ("phi_y", &views.phi_y),
    ];
    if let Some(e) = &views.phi_xy {
        named.push(("phi_xy", e));
    }
    let mut outputs = Vec::new();
    for (name, emb) in named {
        let path = match cfg.output.format {
            Format::Csv => {
                let p = out.join(format!("embedding_{name}.csv"));
                emb.write_csv(&p)?;
                p
            }
            Format::Json => {
                let p = out.join(format!("embedding_{name}.json"));
                let rows: Vec<&[f64]> = (0..emb.len()).map(|i| emb.row(i)).collect();
                write_json(
                    &p,
                    &serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "m": emb.m, "tau": emb.tau, "base_offset": emb.base_offset,
                        "rows": rows,
                    }),
                )?;
                p
            }
        };
        outputs.push(path);
    }
    finish(cfg, out, "embed", outputs, Vec::new())
}

fn single_cell(
    cfg: &ExperimentConfig,
    out: &Path,
    command: &str,
    maps: &[MapKind],
    heuristics: bool,
) -> Result<RunSummary> {
    ensure_dir(out)?;
    let (cell, res) = run_cell(cfg, 0, cfg.system.coupling, maps, heuristics);
    res?;
    let path = write_records(out, "results", &cell.records, cfg.output.format)?;
    let entry = CellEntry {
        c_index: 0,
        c: cfg.system.coupling,
        seeds: cell.seeds,
        status: "ok".into(),
        error: None,
        file: None,
    };
    finish(cfg, out, command, vec![path], vec![entry])
}

pub fn run_isometry(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let maps = cfg.maps()?;
    if maps.is_empty() {
        return Err(Error::config(
            "analysis.maps",
            "isometry needs at least one map",
        ));
    }
    single_cell(cfg, out, "isometry", &maps, false)
}

pub fn run_heuristics(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    if cfg.analysis.heuristics.is_empty() {
        return Err(Error::config(
            "analysis.heuristics",
            "heuristics needs at least one method",
        ));
    }
    single_cell(cfg, out, "heuristics", &[], true)
}

/// Every grid point runs as an independent cell on a pool of `jobs` workers.
/// Cell results go to `cells/`, then merge in grid order. Failed cells are
/// recorded in the manifest and the rest still run.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<RunSummary> {
    let grid = &cfg.analysis.coupling_grid;
    if grid.is_empty() {
        return Err(Error::config(
            "analysis.coupling_grid",
            "sweep needs a non-empty grid",
        ));
    }
    let maps = cfg.maps()?;
    if maps.is_empty() && cfg.analysis.heuristics.is_empty() {
        return Err(Error::config("analysis", "sweep needs maps or heuristics"));
    }
    let cell_dir = out.join("cells");
    ensure_dir(&cell_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::validation(format!("worker pool: {e}")))?;
    let heuristics = !cfg.analysis.heuristics.is_empty();
    let cells: Vec<(CellEntry, Vec<Record>)> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, &c)| {
                let (cell, res) = run_cell(cfg, i, c, &maps, heuristics);
                let mut entry = CellEntry {
                    c_index: i,
                    c,
                    seeds: cell.seeds,
                    status: "ok".into(),
                    error: None,
                    file: None,
                };
                let written = res.and_then(|()| {
                    write_records(
                        &cell_dir,
                        &format!("cell_{i:03}"),
                        &cell.records,
                        cfg.output.format,
                    )
                });
                match written {
                    Ok(p) => {
                        entry.file = p
                            .strip_prefix(out)
                            .ok()
                            .map(|r| r.to_string_lossy().into_owned());
                        (entry, cell.records)
                    }
                    Err(e) => {
                        entry.status = "failed".into();
                        entry.error = Some(e.to_string());
                        (entry, Vec::new())
                    }
                }
            })
            .collect()
    });
    let merged: Vec<Record> = cells.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let path = write_records(out, "results", &merged, cfg.output.format)?;
    finish(
        cfg,
        out,
        "sweep",
        vec![path],
        cells.into_iter().map(|(e, _)| e).collect(),
    )
}

/// One row of the linear verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub map: MapKind,
    pub analytic: Option<TheoremBound>,
    pub empirical: IsometryEstimate,
}

impl LinearRow {
    /// True unless an analytic band exists and an empirical extreme escapes it.
    pub fn within_bounds(&self) -> bool {
        self.analytic
            .as_ref()
            .is_none_or(|b| self.empirical.lower >= b.lower() && self.empirical.upper <= b.upper())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearReport {
    pub rows: Vec<LinearRow>,
    pub threshold: f64,
    pub witness_ratio: Option<f64>,
    pub rank_coupled: usize,
    pub rank_decoupled: usize,
    pub decoupled_phi_y_lower: f64,
}

/// Analytic against empirical constants for the forced linear system, rank of
/// the response observation matrix with and without coupling, and the
/// certificate search with analytic thresholds.
pub fn linear_report(cfg: &ExperimentConfig) -> Result<LinearReport> {
    if cfg.system.kind != SystemKind::LinearForced {
        return Err(Error::config(
            "system.kind",
            "linear-verify needs linear-forced",
        ));
    }
    let emb = cfg.embedding();
    let (m, t_s, n_pairs) = (emb.m, cfg.system.dt(), cfg.analysis.n_pairs);
    let meas_seed = measurement_seed(cfg.seed);
    let build = |c: f64| -> Result<_> {
        let (sys, _) = example1_with_coupling(c, meas_seed)?;
        let (_, set) = example1_with_coupling(1.0, meas_seed)?;
        let traj = simulate_linear(&sys, &sys.unit_modal_state()?, t_s, cfg.system.n_samples)?;
        let views = AttractorViews::build(&traj, &ObservationSpec::linear(&set, m), m, emb.tau)?;
        Ok((sys, set, views))
    };
    let (sys, set, views) = build(cfg.system.coupling)?;
    let gx = analytic_linear_bounds(&sys.x_subsystem()?, &set.h_gamma_x(m), m, t_s)?;
    let optional = |h: Vec<f64>| match analytic_linear_bounds(&sys, &h, m, t_s) {
        Ok(b) => Ok(Some(b)),
        Err(Error::HypothesisViolation(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let py = optional(set.h_phi_y(m))?;
    let pxy = optional(set.h_phi_xy(m))?;
    let px = optional(set.h_phi_x(m))?;
    let maps = if cfg.analysis.maps.is_empty() {
        MapKind::ALL.to_vec()
    } else {
        cfg.maps()?
    };
    let rows = maps
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let analytic = match kind {
                MapKind::PhiGammaX => Some(gx.clone()),
                MapKind::PhiPhiY => py.clone(),
                MapKind::PhiPhiXY => pxy.clone(),
                MapKind::PhiPhiX => px.clone(),
                _ => None,
            };
            let empirical = empirical_isometry(
                &views.map(kind)?,
                n_pairs,
                task_seed(cfg.seed, i, kind.label()),
            )?;
            Ok(LinearRow {
                map: kind,
                analytic,
                empirical,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let py = py.ok_or_else(|| {
        Error::HypothesisViolation("no analytic bound for the response embedding".into())
    })?;
    let thr = CertificateThreshold::analytic(&gx, &py)?;
    let psi = views.map(MapKind::PsiYtoX)?;
    let witness = expansivity_certificate(
        &psi,
        views.start_time,
        &thr,
        n_pairs,
        task_seed(cfg.seed, 0, "certificate"),
    )?;

    let h_full = |s: &crate::dynamics::MeasurementSet| s.h_phi_y(m);
    let rank_coupled = phi_matrix(&sys, &h_full(&set), m, t_s)?.rank;
    let (dsys, _, dviews) = build(0.0)?;
    let rank_decoupled = phi_matrix(&dsys, &h_full(&set), m, t_s)?.rank;
    let decoupled = empirical_isometry(
        &dviews.map(MapKind::PhiPhiY)?,
        n_pairs,
        task_seed(cfg.seed, 1, "decoupled"),
    )?;
    Ok(LinearReport {
        rows,
        threshold: thr.threshold,
        witness_ratio: witness.map(|w| w.ratio),
        rank_coupled,
        rank_decoupled,
        decoupled_phi_y_lower: decoupled.lower,
    })
}

pub fn run_linear_verify(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    ensure_dir(out)?;
    let report = linear_report(cfg)?;
    let mut cell = Cell::new(cfg, 0, cfg.system.coupling);
    for row in &report.rows {
        let label = row.map.label();
        let (lo, hi) = row
            .analytic
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |b| (b.lower(), b.upper()));
        cell.push(label, "analytic_lower", lo);
        cell.push(label, "analytic_upper", hi);
        cell.push(label, "empirical_lower", row.empirical.lower);
        cell.push(label, "empirical_upper", row.empirical.upper);
        cell.push(
            label,
            "within_bounds",
            f64::from(u8::from(row.within_bounds())),
        );
    }
    cell.push("certificate", "threshold", report.threshold);
    cell.push(
        "certificate",
        "witness_ratio",
        report.witness_ratio.unwrap_or(f64::NAN),
    );
    cell.push("rank", "phi_y_coupled", report.rank_coupled as f64);
    cell.push("rank", "phi_y_decoupled", report.rank_decoupled as f64);
    cell.push(
        "PhiPhiY_decoupled",
        "empirical_lower",
        report.decoupled_phi_y_lower,
    );
    let path = write_records(out, "linear_verify", &cell.records, cfg.output.format)?;
    let failures = report.rows.iter().filter(|r| !r.within_bounds()).count();
    let summary = finish(cfg, out, "linear-verify", vec![path], Vec::new())?;
    if failures > 0 {
        return Err(Error::validation(format!(
            "{failures} map(s) left their analytic band"
        )));
    }
    Ok(summary)
}
