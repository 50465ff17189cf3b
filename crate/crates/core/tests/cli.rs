use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use closeness::isometry::empirical_isometry;
use closeness::isometry::MapKind;
use closeness::pipeline::observe;
use closeness::runner::{read_records, task_seed, ExperimentConfig, Manifest};

fn closeness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_closeness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_HENON: &str = r#"
seed = 3
[system]
kind = "henon-henon"
coupling = 0.7
n_samples = 2000
n_transient = 1000
[analysis]
coupling_grid = [0.0, 0.2, 0.4, 0.6]
maps = ["PhiGammaX", "PsiYtoX"]
heuristics = ["m", "l", "ccm", "pecora", "certificate"]
n_pairs = 500
library_sizes = [100, 500, 1997]
epsilon_grid = [0.05, 0.2]
n_probe = 100
"#;

#[test]
fn invalid_kind_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nkind = \"duffing\"\nn_samples = 10\nn_transient = 0\n",
    );
    let out = closeness(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.kind"));
}

#[test]
fn missing_config_file_is_config_error() {
    let out = closeness(&["simulate", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nkind = \"henon-henon\"\nn_samples = 500\nn_transient = 100\n[analysis]\nmaps = [\"PiX\"]\n",
    );
    let out = closeness(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_at_synchronization_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_HENON);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = closeness(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let ta = fs::read(a.join("trajectory.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("trajectory.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 2001);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_HENON);
    let out = dir.path().join("o");
    let o = closeness(&[
        "embed",
        "--config",
        &cfg,
        "--seed",
        "41",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m: Manifest =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.seed, 41);
    let header = fs::read_to_string(out.join("embedding_gamma_x.csv")).unwrap();
    assert!(header.starts_with("# m=4 tau=1 base_offset=3"));
}

#[test]
fn sweep_runs_every_heuristic_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_HENON);
    let out = dir.path().join("o");
    let o = closeness(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let records = read_records(&out.join("results.csv")).unwrap();
    for c in [0.0, 0.2, 0.4, 0.6] {
        for method in [
            "m",
            "l",
            "ccm_y_to_x",
            "ccm_x_to_y",
            "pecora_forward",
            "certificate_x->y",
            "PhiGammaX",
            "chain",
        ] {
            assert!(
                records.iter().any(|r| r.c == c && r.map == method),
                "C={c} {method}"
            );
        }
    }
    let m: Manifest =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.cells.len(), 4);
    assert!(m
        .cells
        .iter()
        .all(|c| c.status == "ok" && !c.seeds.is_empty()));
}

#[test]
fn sweep_cell_matches_direct_isometry_call() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_HENON
        .replace(
            "coupling_grid = [0.0, 0.2, 0.4, 0.6]",
            "coupling_grid = [0.3]",
        )
        .replace(
            "maps = [\"PhiGammaX\", \"PsiYtoX\"]",
            "maps = [\"PhiGammaX\"]",
        )
        .replace(
            "heuristics = [\"m\", \"l\", \"ccm\", \"pecora\", \"certificate\"]",
            "heuristics = []",
        );
    let cfg_path = write_config(dir.path(), &text);
    let out = dir.path().join("o");
    let o = closeness(&[
        "sweep",
        "--config",
        &cfg_path,
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let records = read_records(&out.join("results.json")).unwrap();

    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let (_, views) = observe(&cfg.system, &cfg.embedding(), 0.3, cfg.seed).unwrap();
    let est = empirical_isometry(
        &views.map(MapKind::PhiGammaX).unwrap(),
        cfg.analysis.n_pairs,
        task_seed(cfg.seed, 0, "PhiGammaX"),
    )
    .unwrap();
    for (stat, v) in est.stats() {
        let r = records.iter().find(|r| r.stat == stat).unwrap();
        assert_eq!(r.value, v, "{stat}");
    }
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn diverging_cell_fails_alone() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_HENON
        .replace(
            "coupling_grid = [0.0, 0.2, 0.4, 0.6]",
            "coupling_grid = [0.2, 4.0]",
        )
        .replace(
            "heuristics = [\"m\", \"l\", \"ccm\", \"pecora\", \"certificate\"]",
            "heuristics = []",
        );
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("o");
    let o = closeness(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let m: Manifest =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.cells[0].status, "ok");
    assert_eq!(m.cells[1].status, "failed");
    assert!(m.cells[1].error.as_deref().unwrap().contains("diverged"));
    let records = read_records(&out.join("results.csv")).unwrap();
    assert!(!records.is_empty() && records.iter().all(|r| r.c == 0.2));
}

#[test]
fn linear_verify_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = closeness(&[
        "linear-verify",
        "--preset",
        "linear-example1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let records = read_records(&out.join("linear_verify.csv")).unwrap();
    let get = |map: &str, stat: &str| {
        records
            .iter()
            .find(|r| r.map == map && r.stat == stat)
            .unwrap()
            .value
    };
    assert_eq!(get("PhiGammaX", "within_bounds"), 1.0);
    assert_eq!(get("rank", "phi_y_coupled"), 4.0);
    assert!(get("rank", "phi_y_decoupled") <= 2.0);
    assert!(get("PhiPhiY_decoupled", "empirical_lower") < 1e-4);
    assert!(get("certificate", "witness_ratio").is_nan());
    // Driver-side view of the response blows up distances; the reverse
    // direction stays bounded below.
    assert!(get("PsiYtoX", "empirical_upper") < get("certificate", "threshold"));
    assert!(get("PsiXtoY", "empirical_lower") > 1.0);
}

#[test]
fn heuristics_on_wrong_config_section_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_HENON.replace("library_sizes = [100, 500, 1997]\n", "");
    let cfg = write_config(dir.path(), &text);
    let o = closeness(&[
        "heuristics",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("analysis.library_sizes"));
}
