use std::path::Path;
use std::process::Command;
use ttrace::krylov::LanczosMode;
use ttrace::TensorTrainOperator;
use ttrace_cli::bench::cmd_bench;
use ttrace_cli::config::apply_override;
use ttrace_cli::diagnose::cmd_diagnose;
use ttrace_cli::oracle::cmd_oracle;
use ttrace_cli::run::{cmd_run, CSV_COLUMNS};
use ttrace_cli::ExperimentConfig;

const L2_VALUE: f64 = 12.549508211892;

fn config(dir: &Path, overrides: &[&str]) -> ExperimentConfig {
    let mut all = vec![format!("output.dir=\"{}\"", dir.display())];
    all.extend(overrides.iter().map(|s| s.to_string()));
    ExperimentConfig::load(None, &all).unwrap()
}

fn ttrace(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ttrace")).args(args).output().unwrap()
}

const EXACT: [&str; 3] = ["run.max_bond=0", "run.svd_cutoff=1e-14", "run.max_sweeps=0"];

#[test]
fn config_round_trip_is_idempotent() {
    let custom = r#"
version = 1

[model]
length = 5
boundary = "periodic"
disorder = 0.25

[[model.terms]]
axis = "x"
block = 3
coupling = 0.5

[[model.terms]]
axis = "z"
block = 1
couplings = [1.0, 2.0, 3.0, 4.0, 5.0]

[function]
name = "tabulated"
points = [[-1.0, 0.0], [1.0, 2.0]]

[run]
mode = "chiral-safe"
seed = 17

[diagnostics]
symmetry_kinds = ["hermitian", "centrosymmetric"]
"#;
    for text in [ExperimentConfig::default().to_toml(), custom.to_string()] {
        let first = ExperimentConfig::parse(&text).unwrap();
        let once = first.to_toml();
        let second = ExperimentConfig::parse(&once).unwrap();
        assert_eq!(first, second);
        assert_eq!(once, second.to_toml());
    }
}

#[test]
fn overrides_apply_in_order() {
    let mut t = toml::Table::new();
    apply_override(&mut t, "run.mode=vanilla").unwrap();
    apply_override(&mut t, "run.mode=\"chiral-safe\"").unwrap();
    apply_override(&mut t, "model.length=3").unwrap();
    let cfg: ExperimentConfig = t.try_into().unwrap();
    assert_eq!(cfg.run.mode, ttrace_cli::config::ModeConfig::ChiralSafe);
    assert_eq!(cfg.model.length, 3);
    assert!(apply_override(&mut toml::Table::new(), "run.mode").is_err());
}

#[test]
fn array_entries_can_be_overridden() {
    let mut t: toml::Table = "[model]\nlength = 4\n[[model.terms]]\naxis = \"x\"\nblock = 2\ncoupling = 1.0\n"
        .parse()
        .unwrap();
    apply_override(&mut t, "model.terms.0.block=3").unwrap();
    let cfg: ExperimentConfig = t.try_into().unwrap();
    assert_eq!(cfg.model.terms[0].block, 3);
}

#[test]
fn tfim_auto_resolves_to_chiral_fast() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_run(&config(dir.path(), &["model.length=2"])).unwrap();
    assert_eq!(out.mode, LanczosMode::ChiralFast);
    assert_eq!(out.witness.as_deref(), Some("XY"));
    assert!((out.estimate - L2_VALUE).abs() < 1e-4);
    assert_eq!(out.storage, "real");
    assert!(out.summary.contains("chiral-fast"));

    let vanilla = cmd_run(&config(dir.path(), &["model.length=2", "run.mode=vanilla"])).unwrap();
    assert_eq!(vanilla.mode, LanczosMode::Vanilla);
    assert!((vanilla.estimate - out.estimate).abs() <= 1e-8 * out.estimate);
}

#[test]
fn csv_has_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_run(&config(dir.path(), &["model.length=4"])).unwrap();
    let mut reader = csv::Reader::from_path(&out.csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    assert_eq!(reader.records().count(), out.iterations);
}

fn csv_without_wall_time(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let wall = reader.headers().unwrap().iter().position(|h| h == "wall_ms").unwrap();
    reader
        .records()
        .map(|r| {
            r.unwrap()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != wall)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let extra = ["model.length=6", "model.disorder=0.3", "run.seed=5", "run.max_bond=6"];
    let ra = cmd_run(&config(a.path(), &extra)).unwrap();
    let rb = cmd_run(&config(b.path(), &extra)).unwrap();
    assert_eq!(csv_without_wall_time(&ra.csv_path), csv_without_wall_time(&rb.csv_path));

    let c = tempfile::tempdir().unwrap();
    let reseeded = ["model.length=6", "model.disorder=0.3", "run.seed=6", "run.max_bond=6"];
    let rc = cmd_run(&config(c.path(), &reseeded)).unwrap();
    assert_ne!(ra.estimate, rc.estimate);
}

#[test]
fn exact_run_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = vec!["model.length=4", "run.mode=vanilla"];
    o.extend(EXACT);
    let cfg = config(dir.path(), &o);
    let run = cmd_run(&cfg).unwrap();
    let exact = cmd_oracle(&cfg).unwrap();
    assert!((run.estimate - exact.value).abs() <= 1e-8 * exact.value);
    assert_eq!(exact.dim, 16);
    assert!(exact.symmetry_defect <= 1e-10);
}

#[test]
fn oracle_respects_the_dense_cap() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_oracle(&config(dir.path(), &["model.length=6", "oracle.max_dim=32"])).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn diagnose_fresh_exact_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = vec!["model.length=4", "run.mode=vanilla", "output.checkpoint_every=1"];
    o.extend(EXACT);
    let cfg = config(dir.path(), &o);
    let run = cmd_run(&cfg).unwrap();
    let report = cmd_diagnose(&cfg, &dir.path().join("checkpoints")).unwrap();
    assert_eq!(report.checkpoints.len(), run.iterations);
    assert!(report.worst() <= 1e-8, "{}", report.table());
}

#[test]
fn diagnose_identity_reports_full_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &["model.length=3"]);
    let id = TensorTrainOperator::<f64>::identity(3, 2).unwrap();
    id.save(dir.path().join("u_00001.ttop")).unwrap();
    let report = cmd_diagnose(&cfg, dir.path()).unwrap();
    assert!((report.checkpoints[0].trace_raw - 8.0).abs() < 1e-12);
}

#[test]
fn bench_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &[
            "bench.lengths=[4, 6]",
            "bench.max_bonds=[4, 8]",
            "bench.iterations=4",
            "bench.repetitions=2",
            "bench.modes=[\"vanilla\", \"auto\"]",
        ],
    );
    let out = cmd_bench(&cfg).unwrap();
    assert_eq!(out.rows.len(), 2 * 2 * 2 * 2);
    assert_eq!(out.summary.len(), 2 * 2 * 2);
    assert!(out.rows.iter().skip(8).all(|r| r.mode == "chiral-fast"));
    assert!(out.summary.iter().all(|s| s.min_ms <= s.mean_ms));
    let mut reader = csv::Reader::from_path(&out.csv_path).unwrap();
    assert_eq!(reader.records().count(), 16);
}

#[test]
fn binary_run_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = format!("output.dir=\"{}\"", dir.path().display());
    let out = ttrace(&["run", "--set", "model.length=2", "--set", &d]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("witness         XY"));
    assert!(stdout.contains("1.254950821189e1"));
}

#[test]
fn block_longer_than_chain_exits_1() {
    let cfg = "[model]\nlength = 3\n[[model.terms]]\naxis = \"x\"\nblock = 4\ncoupling = 1.0\n";
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, cfg).unwrap();
    let out = ttrace(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("block length 4"));
}

#[test]
fn unknown_key_exits_1() {
    let out = ttrace(&["oracle", "--set", "run.max_bnod=4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_bnod"));
}

#[test]
fn corrupt_checkpoint_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp");
    std::fs::create_dir(&cp).unwrap();
    let id = TensorTrainOperator::<f64>::identity(2, 2).unwrap();
    let file = cp.join("u_00001.ttop");
    id.save(&file).unwrap();
    let mut bytes = std::fs::read(&file).unwrap();
    bytes[..4].copy_from_slice(b"NOPE");
    std::fs::write(&file, bytes).unwrap();
    let out = ttrace(&[
        "diagnose",
        "--set",
        "model.length=2",
        "--checkpoint",
        cp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    let missing = ttrace(&["diagnose", "--checkpoint", dir.path().join("absent").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = format!("output.dir=\"{}\"", dir.path().display());
    let out = ttrace(&[
        "run",
        "--set",
        "model.length=2",
        "--set",
        "function.beta=-1000.0",
        "--set",
        &d,
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn function_parameters_must_match_the_name() {
    assert!(ExperimentConfig::parse("[function]\nname = \"power\"\nexponent = 2\n").is_ok());
    assert!(ExperimentConfig::parse("[function]\nexponent = 2\n").is_err());
    assert!(ExperimentConfig::parse("[function]\nname = \"power\"\n").is_err());
    assert!(ExperimentConfig::parse("[function]\nbeta = 0.5\n").is_ok());
}
