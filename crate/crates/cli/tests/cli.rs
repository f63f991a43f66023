use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oam-sieve"))
}

fn repo_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_cfg(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut c = bin();
    c.arg(cmd).arg("--config").arg(config).arg("--out").arg(out).args(extra);
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_code(o: &Output) -> Option<String> {
    stderr(o).lines().find_map(|l| l.strip_prefix("error_code=").map(str::to_owned))
}

/// Writes a variant of a shipped config with textual substitutions applied.
fn variant(dir: &TempDir, base: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = fs::read_to_string(repo_config(base)).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from} not in {base}");
        text = text.replace(from, to);
    }
    let path = dir.path().join(format!("{base}_variant.json"));
    fs::write(&path, text).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn five_pinhole_mask_has_five_rows() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg("mask", &repo_config("five_pinhole"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("mask.csv")).len(), 5);
    for f in ["mask.cvf", "mask.pgm"] {
        assert!(dir.path().join(f).metadata().unwrap().len() > 0);
    }
}

#[test]
fn fermat_mask_is_five_fold_symmetric() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg("mask", &repo_config("fermat_m5"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("mask.csv"));
    assert_eq!(rows.len(), 5 * 20);
    let (s, c) = (TAU / 5.0).sin_cos();
    for r in &rows {
        let (x, y) = (c * r[0] - s * r[1], s * r[0] + c * r[1]);
        assert!(rows.iter().any(|q| (q[0] - x).abs() < 1e-12 && (q[1] - y).abs() < 1e-12));
    }
}

#[test]
fn overlapping_recipe_exits_3_and_names_the_pair() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(
        &dir,
        "five_pinhole",
        &[("[[1.5e-5, 0.0]]", "[[1e-6, 0.0]]"), ("\"replications\": [5]", "\"replications\": [12]")],
    );
    let o = run_cfg("mask", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_code(&o).as_deref(), Some("overlap"));
    assert!(stderr(&o).contains("(0, 1)"), "{}", stderr(&o));
}

#[test]
fn schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let typo = variant(&dir, "five_pinhole", &[("\"lambda_m\"", "\"lambda\"")]);
    let o = run_cfg("simulate", &typo, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o).as_deref(), Some("config"));

    let o = run(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_code(&o).is_some());

    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o).as_deref(), Some("usage"));
}

#[test]
fn physics_preconditions_exit_4() {
    let dir = TempDir::new().unwrap();
    // A 5 μm pinhole at ~6.7 m has Fresnel number ~1.5.
    let wide = variant(&dir, "five_pinhole", &[("\"pinhole_radius_m\": 3e-7", "\"pinhole_radius_m\": 5e-6")]);
    let o = run_cfg("simulate", &wide, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_code(&o).as_deref(), Some("fresnel_number"));
    assert!(stderr(&o).contains("Fresnel number"));

    let coarse = variant(&dir, "five_pinhole", &[("\"nx\": 257, \"ny\": 257", "\"nx\": 65, \"ny\": 65")]);
    let o = run_cfg("spectrum", &coarse, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_code(&o).as_deref(), Some("resolution"));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_cfg("mask", &repo_config("five_pinhole"), &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_code(&o).as_deref(), Some("io"));
}

#[test]
fn selection_check_reports_every_row() {
    let o = run(&["verify-selection"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().contains("status=ok"));
    assert_eq!(text.lines().filter(|l| l.starts_with("11,")).count(), 61);

    let o = run(&["verify-selection", "--m", "1", "--ell-max", "6"]);
    assert!(o.status.success());
    let ones = stdout(&o).lines().filter(|l| l.starts_with("1,") && l.split(',').nth(2) == Some("1")).count();
    assert_eq!(ones, 13);

    let o = run(&["verify-selection", "--m", "11", "--ell-max", "55"]);
    assert!(stdout(&o).lines().any(|l| l.starts_with("11,55,11,")));

    let o = run(&["verify-selection", "--m", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_slice_stack_has_one_manifest_row() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(
        &dir,
        "compound_zstack",
        &[("\"start_m\": -8.46e-5, \"stop_m\": -6.46e-5, \"slices\": 140", "\"start_m\": -7.46e-5, \"stop_m\": -7.46e-5, \"slices\": 1"), ("\"nx\": 81, \"ny\": 81", "\"nx\": 21, \"ny\": 21")],
    );
    let o = run_cfg("zstack", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("zstack.csv")).len(), 1);
    assert!(dir.path().join("slice_0000.cvf").exists());
    assert!(stdout(&o).contains("slices=1 waist_index=0"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = repo_config("fermat_m5");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        for cmd in ["simulate", "spectrum"] {
            let o = run_cfg(cmd, &cfg, dir.path(), &["--threads", threads]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    for f in ["field.cvf", "spectrum.csv", "coefficients.csv", "field_intensity.pgm", "field_phase.pgm"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn five_pinhole_spectrum_stays_on_multiples_of_five() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg("spectrum", &repo_config("five_pinhole"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let off: f64 = csv_rows(&dir.path().join("spectrum.csv"))
        .iter()
        .filter(|r| (r[0] as i64).rem_euclid(5) != 0)
        .map(|r| r[1])
        .sum();
    assert!(off < 1e-3, "{off}");
}

#[test]
fn compound_ring_report() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg("spectrum", &repo_config("compound"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let windings: Vec<i64> = csv_rows(&dir.path().join("rings.csv")).iter().map(|r| r[1] as i64).collect();
    assert_eq!(windings, [-11, 44, -55]);
    let peaks: Vec<i64> = csv_rows(&dir.path().join("rings.csv")).iter().map(|r| r[3] as i64).collect();
    assert_eq!(peaks[1..], [44, 55]);
}

#[test]
fn astig_reports_eleven_stripes() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg("astig", &repo_config("compound_astig"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("stripes=11 "), "{}", stdout(&o));
    assert!(dir.path().join("astig_intensity.pgm").exists());
}
