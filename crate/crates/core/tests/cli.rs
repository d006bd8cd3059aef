use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poincare_linf::cli::{sha256_hex, write_json, RunReport};
use poincare_linf::flat::{sample, FlatnessReport, GridForm, ResidualHistory};
use poincare_linf::form::{basis, MultiIndex, PolyFormJson};
use poincare_linf::poincare::NormCertificateJson;
use poincare_linf::rational::{int, rat};
use poincare_linf::{Cube, PolyForm, Polynomial};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_poincare-linf"));
    c.env_remove(poincare_linf::cli::THREADS_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_form(dir: &TempDir, name: &str, w: &PolyForm) -> PathBuf {
    let p = path(dir, name);
    write_json(Some(&p), &PolyFormJson::from(w)).unwrap();
    p
}

fn write_grid(dir: &TempDir, name: &str, g: &GridForm) -> PathBuf {
    let p = path(dir, name);
    write_json(Some(&p), &g.to_json()).unwrap();
    p
}

fn read_form(p: &Path) -> PolyForm {
    let json: PolyFormJson = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    PolyForm::try_from(&json).unwrap()
}

fn read<T: for<'de> serde::Deserialize<'de>>(p: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn x_dy() -> PolyForm {
    basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0))
}

fn sign_grid(axis: usize, dim: usize, res: usize) -> GridForm {
    GridForm::from_fn(1, vec![0.0; dim], vec![1.0; dim], res, &[MultiIndex::single(axis)], |_, x| {
        if x[0] < 0.5 {
            -1.0
        } else {
            1.0
        }
    })
    .unwrap()
}

#[test]
fn d_of_x_dy_is_area_form() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &x_dy());
    let output = path(&dir, "dw.json");
    let out = run(&["d", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read_form(&output), basis(2, &[0, 1], int(1)));
}

#[test]
fn d_of_closed_form_is_zero_file() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &basis(2, &[0, 1], int(3)));
    let output = path(&dir, "dw.json");
    assert_eq!(code(&run(&["d", s(&input), "-o", s(&output)])), 0);
    let json: PolyFormJson = read(&output);
    assert_eq!(json.degree, 3);
    assert!(json.terms.is_empty());
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "bad.json");
    fs::write(&input, "{\"ambient_dim\": 2,\n \"degree\": }").unwrap();
    let out = run(&["d", s(&input)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2 column"), "{}", stderr(&out));
}

#[test]
fn primitive_of_area_form() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &basis(2, &[0, 1], int(1)));
    let (output, cert, trace) = (path(&dir, "theta.json"), path(&dir, "cert.json"), path(&dir, "trace.json"));
    let out = run(&["primitive", s(&input), "-o", s(&output), "--cert", s(&cert), "--trace", s(&trace)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let y = Polynomial::var(2, 1);
    let expected = basis(2, &[0], int(1)).mul_function(&(&Polynomial::constant(2, rat(1, 2)) - &y));
    assert_eq!(read_form(&output), expected);
    let c: NormCertificateJson = read(&cert);
    assert!(c.verified);
    assert_eq!((c.norm_output.upper.num.as_str(), c.norm_output.upper.den.as_str()), ("1", "2"));
    let levels: Vec<serde_json::Value> = read(&trace);
    assert!(!levels.is_empty());
}

#[test]
fn primitive_rejects_non_closed_input_naming_the_term() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &x_dy());
    let out = run(&["primitive", s(&input)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("dx^dy"), "{}", stderr(&out));
}

#[test]
fn primitive_of_zero_has_trivial_certificate() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &PolyForm::zero(3, 2));
    let (output, cert) = (path(&dir, "theta.json"), path(&dir, "cert.json"));
    assert_eq!(code(&run(&["primitive", s(&input), "-o", s(&output), "--cert", s(&cert)])), 0);
    assert!(read_form(&output).is_zero());
    let c: NormCertificateJson = read(&cert);
    assert!(c.verified);
    assert_eq!(c.norm_output.upper.num, "0");
}

#[test]
fn closed_approx_of_x_dy() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &x_dy());
    let output = path(&dir, "wp.json");
    assert_eq!(code(&run(&["closed-approx", s(&input), "-o", s(&output)])), 0);
    let y = Polynomial::var(2, 1);
    let expected = x_dy().add(&basis(2, &[0], int(1)).mul_function(&(&y - &Polynomial::constant(2, rat(1, 2))))).unwrap();
    assert_eq!(read_form(&output), expected);
}

#[test]
fn closed_approx_of_closed_input_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let w = PolyForm::function(&(&Polynomial::var(3, 0) * &Polynomial::var(3, 2)) + &Polynomial::var(3, 1)).d();
    let input = write_form(&dir, "w.json", &w);
    let output = path(&dir, "wp.json");
    assert_eq!(code(&run(&["closed-approx", s(&input), "-o", s(&output)])), 0);
    assert_eq!(fs::read(&input).unwrap(), fs::read(&output).unwrap());
}

#[test]
fn tau_scan_defect_never_exceeds_midpoint() {
    let dir = TempDir::new().unwrap();
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let w = basis(2, &[1], int(1)).mul_function(&(&(&x * &x) * &y)).add(&basis(2, &[0], int(1)).mul_function(&(&y * &y))).unwrap();
    let input = write_form(&dir, "w.json", &w);
    let (mid, scan) = (path(&dir, "mid.json"), path(&dir, "scan.json"));
    assert_eq!(code(&run(&["closed-approx", s(&input), "-o", "/dev/null", "--cert", s(&mid)])), 0);
    assert_eq!(code(&run(&["closed-approx", s(&input), "-o", "/dev/null", "--cert", s(&scan), "--tau-scan", "6"])), 0);
    let defect = |p: &Path| {
        let c: NormCertificateJson = read(p);
        let d = c.defect_norm.unwrap().upper;
        rat(d.num.parse().unwrap(), d.den.parse().unwrap())
    };
    assert!(defect(&scan) <= defect(&mid));
}

#[test]
fn supnorm_on_a_shifted_cube() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &x_dy());
    let output = path(&dir, "norm.json");
    let out = run(&["supnorm", s(&input), "--lo", "-2,0", "--hi", "1/2,1", "-o", s(&output)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let b: serde_json::Value = read(&output);
    assert_eq!(b["upper"]["num"], "2");
    assert_eq!(b["lower"]["num"], "2");
}

#[test]
fn flat_check_smooth_form_within_bound() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sample(&x_dy(), &Cube::unit(2), 64).unwrap());
    let output = path(&dir, "report.json");
    let out = run(&["flat-check", s(&input), "--simplices", "300", "--seed", "3", "--nprime", "1.1", "-o", s(&output)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: FlatnessReport = read(&output);
    assert_eq!(report.records.len() + report.skipped, 300);
    assert!(report.max_ratio <= 1.1);
}

#[test]
fn flat_check_sign_dy_fails_with_blowup_table() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(1, 2, 128));
    let out = run(&["flat-check", s(&input), "--simplices", "600", "--nprime", "20", "-o", s(&path(&dir, "r.json"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("scale_lo"), "{}", stderr(&out));
}

#[test]
fn flat_check_without_simplices_is_empty() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(1, 2, 16));
    let output = path(&dir, "r.json");
    assert_eq!(code(&run(&["flat-check", s(&input), "--simplices", "0", "--nprime", "1", "-o", s(&output)])), 0);
    let report: FlatnessReport = read(&output);
    assert!(report.records.is_empty());
    assert_eq!(report.max_ratio, 0.0);
}

#[test]
fn mollify_solve_sign_dx() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(0, 1, 512));
    let (theta, history) = (path(&dir, "theta.json"), path(&dir, "history.json"));
    let out = run(&[
        "mollify-solve",
        s(&input),
        "--stages",
        "4",
        "--radii",
        "geometric:0.1:0.5",
        "--theta",
        s(&theta),
        "--history",
        s(&history),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let h: ResidualHistory = read(&history);
    let r = h.residuals();
    assert!(r.windows(2).all(|p| p[1] < p[0]), "{r:?}");
    let g = GridForm::try_from(&read::<poincare_linf::flat::GridFormJson>(&theta)).unwrap();
    let v = g.coefficient(&MultiIndex::empty()).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (c, t) in v.iter().enumerate() {
        let x = g.cell_center(c)[0];
        if (x - 0.5).abs() > 0.05 {
            lo = lo.min(t - (x - 0.5).abs());
            hi = hi.max(t - (x - 0.5).abs());
        }
    }
    assert!((hi - lo) / 2.0 < 0.03, "{}", (hi - lo) / 2.0);
}

#[test]
fn mollify_solve_smooth_dx_converges_at_stage_one() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sample(&PolyForm::dx(1, 0), &Cube::unit(1), 128).unwrap());
    let history = path(&dir, "h.json");
    assert_eq!(code(&run(&["mollify-solve", s(&input), "--history", s(&history)])), 0);
    let h: ResidualHistory = read(&history);
    assert!(h.converged);
    assert_eq!(h.stages.len(), 1);
}

#[test]
fn mollify_solve_rejects_non_closed_input() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(1, 2, 32));
    let out = run(&["mollify-solve", s(&input)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("residual"), "{}", stderr(&out));
}

#[test]
fn mollify_solve_stagnation_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(0, 1, 256));
    let out = run(&["mollify-solve", s(&input), "--stages", "5", "--radii", "0.05,0.05,0.05,0.05,0.05", "--degrees", "1,1,1,1,1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("stagnated"));
}

#[test]
fn verify_certificates_and_detect_tampering() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &basis(2, &[0, 1], int(1)));
    let (theta, cert) = (path(&dir, "theta.json"), path(&dir, "cert.json"));
    assert_eq!(code(&run(&["primitive", s(&input), "-o", s(&theta), "--cert", s(&cert)])), 0);
    assert_eq!(code(&run(&["verify", s(&cert)])), 0);
    assert_eq!(code(&run(&["verify", s(&cert), "--input", s(&input), "--result", s(&theta)])), 0);

    let mut c: serde_json::Value = read(&cert);
    c["norm_output"]["upper"]["num"] = "5".into();
    let tampered = path(&dir, "tampered.json");
    fs::write(&tampered, serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(code(&run(&["verify", s(&tampered)])), 2);

    let wrong = write_form(&dir, "wrong.json", &PolyForm::zero(2, 1));
    assert_eq!(code(&run(&["verify", s(&cert), "--input", s(&input), "--result", s(&wrong)])), 2);
}

#[test]
fn verify_reruns_flatness_reports() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sample(&x_dy(), &Cube::unit(2), 32).unwrap());
    let report = path(&dir, "r.json");
    assert_eq!(code(&run(&["flat-check", s(&input), "--simplices", "100", "--seed", "9", "-o", s(&report)])), 0);
    let out = run(&["verify", s(&report), "--input", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let mut r: serde_json::Value = read(&report);
    r["max_ratio"] = 0.5.into();
    fs::write(&report, serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(code(&run(&["verify", s(&report)])), 2);
}

#[test]
fn verify_reruns_residual_histories() {
    let dir = TempDir::new().unwrap();
    let input = write_grid(&dir, "g.json", &sign_grid(0, 1, 256));
    let history = path(&dir, "h.json");
    assert_eq!(code(&run(&["mollify-solve", s(&input), "--stages", "3", "--history", s(&history)])), 0);
    let out = run(&["verify", s(&history), "--input", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn run_reports_record_digests_and_detect_changes() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &basis(2, &[0, 1], int(1)));
    let (theta, report) = (path(&dir, "theta.json"), path(&dir, "run.json"));
    let out = run(&["primitive", s(&input), "-o", s(&theta), "--report", s(&report)]);
    assert_eq!(code(&out), 0);
    let r: RunReport = read(&report);
    assert_eq!(r.command, "primitive");
    assert_eq!(r.inputs[0].sha256, sha256_hex(&fs::read(&input).unwrap()));
    assert_eq!(r.outputs[0].sha256, sha256_hex(&fs::read(&theta).unwrap()));
    assert_eq!(r.certificates.len(), 1);
    assert_eq!(r.parameters["grid"], 3);
    assert_eq!(code(&run(&["verify", s(&report)])), 0);

    fs::write(&theta, "{}").unwrap();
    assert_eq!(code(&run(&["verify", s(&report)])), 2);
}

#[test]
fn emitted_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let x = Polynomial::var(3, 0);
    let w = basis(3, &[1, 2], rat(-7, 3)).mul_function(&(&x * &x));
    let input = write_form(&dir, "w.json", &w);
    let output = path(&dir, "wp.json");
    assert_eq!(code(&run(&["closed-approx", s(&input), "-o", s(&output)])), 0);
    let again = write_form(&dir, "again.json", &read_form(&output));
    assert_eq!(fs::read(&output).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn thread_variable_is_validated() {
    let dir = TempDir::new().unwrap();
    let input = write_form(&dir, "w.json", &x_dy());
    let bad = bin().env(poincare_linf::cli::THREADS_ENV, "zero").args(["d", s(&input)]).output().unwrap();
    assert_eq!(code(&bad), 1);
    let report = path(&dir, "run.json");
    let good = bin().env(poincare_linf::cli::THREADS_ENV, "4").args(["d", s(&input), "--report", s(&report)]).output().unwrap();
    assert_eq!(code(&good), 0);
    assert_eq!(read::<RunReport>(&report).threads, 4);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["primitive"])), 1);
    assert_eq!(code(&run(&["flat-check", "x.json", "--scales", "0.3,0.1"])), 1);
}
