use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemKind;
use crate::error::{Error, Result};
use crate::isometry::MapKind;
use crate::pipeline::{EmbeddingSpec, SimulationSpec};

pub const PRESETS: [(&str, &str); 4] = [
    (
        "henon-henon",
        include_str!("../../presets/henon-henon.toml"),
    ),
    (
        "rossler-lorenz",
        include_str!("../../presets/rossler-lorenz.toml"),
    ),
    (
        "rossler-rossler",
        include_str!("../../presets/rossler-rossler.toml"),
    ),
    (
        "linear-example1",
        include_str!("../../presets/linear-example1.toml"),
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    /// Distance-based mutual-neighbor score.
    M,
    /// Rank-based mutual-neighbor score with the signed-rank test.
    L,
    Ccm,
    Pecora,
    /// Expansivity certificate in both directions.
    Certificate,
}

impl Heuristic {
    pub fn label(self) -> &'static str {
        match self {
            Heuristic::M => "m",
            Heuristic::L => "l",
            Heuristic::Ccm => "ccm",
            Heuristic::Pecora => "pecora",
            Heuristic::Certificate => "certificate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default)]
    pub coupling_grid: Vec<f64>,
    #[serde(default)]
    pub maps: Vec<String>,
    #[serde(default)]
    pub heuristics: Vec<Heuristic>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    #[serde(default)]
    pub library_sizes: Vec<usize>,
    #[serde(default = "default_ccm_replicates")]
    pub ccm_replicates: usize,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_n_probe")]
    pub n_probe: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k() -> usize {
    5
}
fn default_n_pairs() -> usize {
    5000
}
fn default_ccm_replicates() -> usize {
    4
}
fn default_n_probe() -> usize {
    500
}
fn default_k_max() -> usize {
    50
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            coupling_grid: Vec::new(),
            maps: Vec::new(),
            heuristics: Vec::new(),
            k: default_k(),
            n_pairs: default_n_pairs(),
            library_sizes: Vec::new(),
            ccm_replicates: default_ccm_replicates(),
            epsilon_grid: Vec::new(),
            n_probe: default_n_probe(),
            k_max: default_k_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub system: SimulationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("", e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`")))?;
        Self::from_toml(text)
    }

    pub fn embedding(&self) -> EmbeddingSpec {
        self.embedding
            .unwrap_or_else(|| EmbeddingSpec::for_kind(self.system.kind))
    }

    pub fn maps(&self) -> Result<Vec<MapKind>> {
        self.analysis
            .maps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                MapKind::parse(s).ok_or_else(|| {
                    Error::config(format!("analysis.maps[{i}]"), format!("unknown map `{s}`"))
                })
            })
            .collect()
    }

    /// Checks every sub-spec before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let wrap = |path: &str, r: Result<()>| {
            r.map_err(|e| match e {
                Error::Validation(msg) => Error::config(path, msg),
                e => Error::config(path, e.to_string()),
            })
        };
        wrap("system", self.system.validate())?;
        let emb = self.embedding();
        wrap("embedding", emb.validate())?;
        let a = &self.analysis;
        for (i, c) in a.coupling_grid.iter().enumerate() {
            wrap(
                &format!("analysis.coupling_grid[{i}]"),
                self.system.model(*c).map(|_| ()),
            )?;
        }
        self.maps()?;
        if self.system.kind != SystemKind::LinearForced && self.maps()?.contains(&MapKind::PhiPhiXY)
        {
            return Err(Error::config(
                "analysis.maps",
                "PhiPhiXY needs a joint linear measurement",
            ));
        }
        let needs = |h: Heuristic| a.heuristics.contains(&h);
        if a.k == 0 {
            return Err(Error::config("analysis.k", "must be positive"));
        }
        if a.n_pairs == 0 {
            return Err(Error::config("analysis.n_pairs", "must be positive"));
        }
        if needs(Heuristic::Ccm) {
            if a.library_sizes.is_empty() {
                return Err(Error::config(
                    "analysis.library_sizes",
                    "ccm needs at least one library size",
                ));
            }
            if a.ccm_replicates == 0 {
                return Err(Error::config("analysis.ccm_replicates", "must be positive"));
            }
        }
        if needs(Heuristic::Pecora) {
            if a.epsilon_grid.is_empty() || a.epsilon_grid.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::config(
                    "analysis.epsilon_grid",
                    "pecora needs positive radii",
                ));
            }
            if a.n_probe == 0 || a.k_max == 0 {
                return Err(Error::config(
                    "analysis.n_probe",
                    "n_probe and k_max must be positive",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            ExperimentConfig::preset(name).unwrap();
        }
    }

    #[test]
    fn bad_kind_reports_field_path() {
        let err = ExperimentConfig::from_toml(
            "[system]\nkind = \"lorenz96\"\nn_samples = 10\nn_transient = 0\n",
        )
        .unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "system.kind"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let err = ExperimentConfig::from_toml(
            "[system]\nkind = \"henon-henon\"\nn_samples = 10\nn_transient = 0\nbogus = 1\n",
        );
        assert!(matches!(err, Err(Error::Config { .. })));
    }

    #[test]
    fn negative_grid_entry_rejected() {
        let text = "[system]\nkind = \"henon-henon\"\nn_samples = 10\nn_transient = 0\n[analysis]\ncoupling_grid = [0.0, -1.0]\n";
        match ExperimentConfig::from_toml(text).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "analysis.coupling_grid[1]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_map_rejected() {
        let text = "[system]\nkind = \"henon-henon\"\nn_samples = 10\nn_transient = 0\n[analysis]\nmaps = [\"pi-z\"]\n";
        assert!(matches!(
            ExperimentConfig::from_toml(text),
            Err(Error::Config { .. })
        ));
    }
}
