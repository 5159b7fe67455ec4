use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use dgn_core::mc::simulate;
use dgn_core::model::RemappedPortfolio;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run_with(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dgn-risk"));
    cmd.args(args)
        .env_remove("RISK_QUAD_TOL")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_with(args, None, &[])
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

/// Data rows as string cells, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn f(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn remap_reports_bounded_support() {
    let out = ok(&["remap", &fixture("positive_min.json")]);
    assert!(out.contains("\"v_inf\": -4.75"), "{out}");
    assert!(out.contains("\"regime\": \"positive_min\""));
}

#[test]
fn remap_of_linear_book() {
    let doc: serde_json::Value =
        serde_json::from_str(&ok(&["remap", &fixture("identity.json")])).unwrap();
    let lambda = doc["remapped"]["lambda"].as_array().unwrap();
    assert!(lambda.iter().all(|l| l.as_f64() == Some(0.0)));
    assert_eq!(doc["tail"]["regime"], "zero_min");
    assert_eq!(doc["moments"]["skewness"].as_f64(), Some(0.0));
    assert_eq!(doc["moments"]["variance"].as_f64(), Some(9.0));
}

#[test]
fn validation_failures_exit_3() {
    let r = run(&["remap", &fixture("bad_sigma.json")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("sigma is not symmetric"), "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let r = run(&["risk", &fixture("gaussian.json"), "--levels", "1.5"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("1.5"));

    let r = run(&[
        "risk",
        &fixture("negative_min.json"),
        "--levels",
        "0.01",
        "--nu",
        "0.9",
    ]);
    assert_eq!(r.code, 3, "contour beyond the strip: {}", r.stderr);

    let both = r#"{"raw": {"theta": 0, "delta": [1], "gamma": [[0]], "sigma": [[1]]},
                   "remapped": {"theta": 0, "delta": [1], "lambda": [0]}}"#;
    assert_eq!(run_with(&["remap", "-"], Some(both), &[]).code, 3);
}

#[test]
fn parse_failures_exit_2() {
    let r = run_with(&["remap", "-"], Some("{\"raw\": [1, 2"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("parse error"));
    assert_eq!(run(&["remap", "/nonexistent/portfolio.json"]).code, 2);
    assert_eq!(
        run(&["risk", &fixture("gaussian.json"), "--levels", "x"]).code,
        2
    );
}

#[test]
fn numerical_failure_exit_4_names_the_level() {
    // two opposite chi-square legs: the density at the median diverges
    let doc = r#"{"remapped": {"theta": 0, "delta": [0.5, 0.5], "lambda": [-1, 1]}}"#;
    let r = run_with(&["risk", "-", "--levels", "0.5"], Some(doc), &[]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(r.stderr.contains("level 0.5"), "{}", r.stderr);
}

#[test]
fn gaussian_var_is_the_normal_quantile() {
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("gaussian.json")).unwrap()).unwrap();
    let delta: Vec<f64> = serde_json::from_value(file["raw"]["delta"].clone()).unwrap();
    let sigma: Vec<Vec<f64>> = serde_json::from_value(file["raw"]["sigma"].clone()).unwrap();
    let mut q = 0.0;
    for i in 0..delta.len() {
        for j in 0..delta.len() {
            q += delta[i] * sigma[i][j] * delta[j];
        }
    }
    let out = ok(&["risk", &fixture("gaussian.json"), "--levels", "0.05"]);
    assert_eq!(out.lines().next(), Some("level,var,es,quad_error"));
    let var = f(&rows(&out)[0][1]);
    assert!((var - 1.6448536 * q.sqrt()).abs() < 1e-6, "{var}");
}

#[test]
fn risk_curve_is_coherent() {
    let out = ok(&[
        "risk",
        &fixture("negative_min.json"),
        "--levels",
        "0.05,0.025,0.01,0.005,0.0025,0.001",
    ]);
    let mut last_var = f64::NEG_INFINITY;
    let mut last_gap = f64::INFINITY;
    for r in rows(&out) {
        let (var, es) = (f(&r[1]), f(&r[2]));
        assert!(es > var);
        assert!(var > last_var);
        assert!(es - var < last_gap);
        last_var = var;
        last_gap = es - var;
    }
}

#[test]
fn symmetric_book_median() {
    let out = ok(&[
        "risk",
        &fixture("symmetric_quadratic.json"),
        "--levels",
        "0.5",
    ]);
    let var = f(&rows(&out)[0][1]);
    assert!(var.abs() < 1e-8, "{var}");
    // sample median of the same book
    let p = RemappedPortfolio::new(0.0, vec![0.5, 1.0, 0.5], vec![-1.0, 0.0, 1.0]).unwrap();
    let s = simulate(&p, 1_000_000, 11).unwrap();
    let median = 0.5 * (s.values()[499_999] + s.values()[500_000]);
    assert!((var + median).abs() < 5e-3, "{var} vs {median}");
}

#[test]
fn sensitivities_report_theta_and_euler() {
    let out = ok(&["sens", &fixture("negative_min.json"), "--level", "0.01"]);
    let r = rows(&out);
    assert_eq!(r.len(), 31);
    assert_eq!(r[0][0], "theta");
    assert!((f(&r[0][1]) + 1.0).abs() < 1e-8 && (f(&r[0][3]) + 1.0).abs() < 1e-8);
    assert_eq!(r[1][0], "delta_1");
    assert_eq!(r[16][0], "lambda_1");

    // linear book: VaR and ES are homogeneous of degree one in (theta, delta)
    let doc: serde_json::Value =
        serde_json::from_str(&ok(&["remap", &fixture("gaussian.json")])).unwrap();
    let delta: Vec<f64> = serde_json::from_value(doc["remapped"]["delta"].clone()).unwrap();
    let risk = rows(&ok(&[
        "risk",
        &fixture("gaussian.json"),
        "--levels",
        "0.05",
    ]));
    let sens = rows(&ok(&["sens", &fixture("gaussian.json"), "--level", "0.05"]));
    let (mut ev, mut ee) = (0.0, 0.0);
    for (i, d) in delta.iter().enumerate() {
        ev += d * f(&sens[1 + i][1]);
        ee += d * f(&sens[1 + i][3]);
    }
    assert!((ev - f(&risk[0][1])).abs() < 1e-8);
    assert!((ee - f(&risk[0][2])).abs() < 1e-8);
}

#[test]
fn pdf_support_and_overlays() {
    // bounded case: nothing left of the support edge
    let out = ok(&[
        "pdf",
        &fixture("positive_min.json"),
        "--range=-8:4",
        "--points",
        "49",
    ]);
    for r in rows(&out) {
        if f(&r[0]) < -4.75 {
            assert_eq!(f(&r[1]), 0.0, "{r:?}");
        }
    }

    // exponential damping at rate 1/|lambda_min| = 0.5
    let out = ok(&[
        "pdf",
        &fixture("negative_min.json"),
        "--range=-120:0",
        "--points",
        "121",
        "--overlay-tail",
    ]);
    let r = rows(&out);
    assert_eq!(out.lines().next(), Some("v,density,asymptote"));
    let slope = (f(&r[10][2]).ln() - f(&r[0][2]).ln()) / 10.0;
    assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
    // the fit window tracks the reconstruction
    for row in &r[..12] {
        let (d, a) = (f(&row[1]), f(&row[2]));
        assert!((d / a - 1.0).abs() < 0.1, "{row:?}");
    }

    // Gaussian decay: the log overlay is concave with curvature about -1/5
    let out = ok(&[
        "pdf",
        &fixture("zero_min.json"),
        "--range=-40:0",
        "--points",
        "41",
        "--overlay-tail",
    ]);
    let r = rows(&out);
    let l = |k: usize| f(&r[k][2]).ln();
    let curv = (l(0) - 2.0 * l(5) + l(10)) / 25.0;
    assert!(curv < -0.15 && curv > -0.25, "curvature {curv}");
}

#[test]
fn reference_mc_comparison_passes() {
    let r = run(&[
        "mc",
        &fixture("negative_min.json"),
        "--levels",
        "0.001,0.0025,0.005,0.01,0.02,0.025,0.05",
        "--cl",
        "0.98",
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert_eq!(
        r.stdout.lines().next(),
        Some("kind,level,parameter,fourier,mc_point,mc_lower_offset,mc_upper_offset,inside_ci")
    );
    let r = rows(&r.stdout);
    assert_eq!(r.len(), 14);
    assert!(r.iter().all(|c| c[7] == "true"));
}

#[test]
fn mc_theta_row_is_exact() {
    let out = ok(&[
        "mc",
        &fixture("zero_min.json"),
        "--samples",
        "20000",
        "--levels",
        "0.05",
        "--sens",
        "theta",
    ]);
    for r in rows(&out).iter().filter(|r| r[2] == "theta") {
        assert_eq!(f(&r[4]), -1.0);
        assert_eq!((f(&r[5]), f(&r[6])), (0.0, 0.0));
        assert_eq!(r[7], "true");
    }
}

#[test]
fn interval_miss_exits_5_unless_relaxed() {
    let args = [
        "mc",
        &fixture("negative_min.json"),
        "--samples",
        "2000",
        "--seed",
        "1",
        "--cl",
        "0.5",
        "--levels",
        "0.01",
    ];
    let strict = run(&args);
    assert_eq!(strict.code, 5);
    assert!(strict.stdout.contains("false"), "report still printed");
    let mut relaxed = args.to_vec();
    relaxed.push("--no-strict");
    let loose = run(&relaxed);
    assert_eq!(loose.code, 0);
    assert_eq!(loose.stdout, strict.stdout);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "mc",
        &fixture("zero_min.json"),
        "--samples",
        "50000",
        "--seed",
        "7",
        "--levels",
        "0.05,0.01",
        "--sens",
        "delta_1,lambda_6",
        "--no-strict",
    ];
    assert_eq!(ok(&args), ok(&args));
    let args = [
        "pdf",
        &fixture("negative_min.json"),
        "--range=-30:30",
        "--points",
        "61",
    ];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn remap_round_trip_preserves_risk() {
    let raw = fixture("correlated.json");
    let doc = ok(&["remap", &raw]);
    let levels = "0.001,0.01,0.05,0.2";
    let a = rows(&ok(&["risk", &raw, "--levels", levels]));
    let r = run_with(&["risk", "-", "--levels", levels], Some(&doc), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let b = rows(&r.stdout);
    for (x, y) in a.iter().zip(&b) {
        for k in 1..3 {
            let (u, v) = (f(&x[k]), f(&y[k]));
            assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0), "{u} vs {v}");
        }
    }
    // remapping is idempotent
    assert_eq!(run_with(&["remap", "-"], Some(&doc), &[]).stdout, doc);
}

#[test]
fn tolerance_from_environment() {
    let args = ["risk", &fixture("zero_min.json"), "--levels", "0.01"];
    let r = run_with(&args, None, &[("RISK_QUAD_TOL", "banana")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("RISK_QUAD_TOL"));
    let loose = run_with(&args, None, &[("RISK_QUAD_TOL", "1e-6")]);
    assert_eq!(loose.code, 0);
    let tight = ok(&args);
    let (x, y) = (f(&rows(&loose.stdout)[0][1]), f(&rows(&tight)[0][1]));
    assert!((x - y).abs() < 1e-4);
    // the flag wins over the environment
    let mut flagged = args.to_vec();
    flagged.extend(["--tol", "1e-12"]);
    let r = run_with(&flagged, None, &[("RISK_QUAD_TOL", "1e-6")]);
    assert_eq!(r.stdout, tight);
}
