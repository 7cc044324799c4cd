use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ballwalk(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballwalk"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const GAUSSIAN: &str = r#"
seed = 1
[density]
kind = "gaussian"
dim = 1
alpha = 0.5
[grid]
half_width = 8.0
spacing_per_h = 20.0
scheme = "banded_quadrature"
"#;

const TEMPERED: &str = r#"
[density]
kind = "tempered_exp_type"
dim = 1
alpha = 1.0
R = 1.0
[grid]
half_width = 30.0
spacing_per_h = 3.0
scheme = "banded_quadrature"
"#;

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bundled_spectrum_passes_and_emits_residual_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ballwalk(&["spectrum"], &configs().join("gaussian_d1.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 4 * 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert!(json["version"].as_str().unwrap().starts_with("ballwalk "));
    assert_eq!(json["config"]["density"]["alpha"], 0.5);
    let header = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(header.contains("# gate: PASS order_k1"));
    assert!(header.contains("#   spacing_per_h = 40.0"));
}

#[test]
fn under_resolved_kernel_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSSIAN.replace("spacing_per_h = 20.0", "spacing_per_h = 2.0")
        + "[spectrum]\nh_list = [0.5, 0.35, 0.25]\nk_max = 1\n";
    let cfg = write_config(dir.path(), "bad.cfg", &text);
    let out = ballwalk(&["spectrum"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel under-resolved"));
}

#[test]
fn k_max_zero_reports_only_the_top_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSSIAN.to_string() + "[spectrum]\nh_list = [0.5, 0.35, 0.25]\nk_max = 0\n";
    let cfg = write_config(dir.path(), "k0.cfg", &text);
    let out = ballwalk(&["spectrum"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert!((r[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn weyl_rejects_tempered_densities() {
    let dir = tempfile::tempdir().unwrap();
    let text = TEMPERED.to_string() + "[weyl]\nh_list = [0.3, 0.2]\n";
    let cfg = write_config(dir.path(), "t.cfg", &text);
    let out = ballwalk(&["weyl"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gaussian"));
}

#[test]
fn band_on_a_gaussian_is_compact() {
    let dir = tempfile::tempdir().unwrap();
    let out = ballwalk(&["band"], &configs().join("gaussian_d1.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("band.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["compact"], true);
    assert_eq!(json["report"]["band"].as_array().unwrap().len(), 0);
}

#[test]
fn far_start_emits_witness_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = ballwalk(&["tv"], &configs().join("gaussian_d1_witness.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(dir.path().join("tv.csv")).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "n,tv_exact,tv_mc,tv_mc_se,upper_bound,lower_bound_witness");
    let rows = csv_rows(&dir.path().join("tv.csv"));
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let w: f64 = r[5].parse().unwrap();
        assert!(w > 0.99);
        assert!(w <= r[1].parse::<f64>().unwrap() + 1e-9);
    }
}

#[test]
fn outputs_are_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSSIAN.to_string()
        + "[simulate]\nh = 0.5\nx0 = [0.3]\npaths = 2000\nhorizon = 5\ncells_per_bin = 4\nreplicates = 50\n";
    let cfg = write_config(dir.path(), "sim.cfg", &text);
    let read = |d: &Path| {
        (
            std::fs::read(d.join("simulate.csv")).unwrap(),
            std::fs::read(d.join("simulate.json")).unwrap(),
        )
    };
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    ballwalk(&["simulate", "--jobs", "1"], &cfg, &a);
    ballwalk(&["simulate", "--jobs", "3"], &cfg, &b);
    ballwalk(&["simulate", "--seed", "99"], &cfg, &c);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a).0, read(&c).0);
    let json: serde_json::Value = serde_json::from_slice(&read(&c).1).unwrap();
    assert_eq!(json["config"]["seed"], 99);
}

#[test]
fn unknown_keys_and_missing_sections_exit_with_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "x.cfg", &(GAUSSIAN.to_string() + "colour = \"blue\"\n"));
    assert_eq!(ballwalk(&["spectrum"], &cfg, dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "y.cfg", GAUSSIAN);
    let out = ballwalk(&["weyl"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[weyl]"));
}

#[test]
fn failed_gates_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSSIAN.to_string() + "[tv]\nh = 0.25\nx0 = [0.9]\ntau = 1.0\nn_max = 20\nslope_window = [0, 20]\n";
    let cfg = write_config(dir.path(), "tv.cfg", &text);
    let out = ballwalk(&["tv"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL slope_rel_deviation"));
}
