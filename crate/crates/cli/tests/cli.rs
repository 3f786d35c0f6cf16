use std::path::PathBuf;
use std::process::{Command, Output};

fn ex(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn monge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monge")).args(args).output().expect("binary runs")
}

fn path(name: &str) -> String {
    ex(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn classify_reports_and_text_format() {
    let out = monge(&["classify", "--system", &path("sys_a.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class"], "FSystem");

    let out = monge(&["classify", "--system", &path("sys_c.json"), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("S = (-12) (NonZero)\n"), "{text}");
    assert!(text.contains("class: General\n"));
}

#[test]
fn malformed_expression_exits_1() {
    let out = monge(&["classify", "--system", &path("bad_expr.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn order_convention_violation_exits_2() {
    let out = monge(&["gen-pde", "--system", &path("sys_b.json"), "-k", "4", "-l", "3", "--branch", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_param_both_modes() {
    for mode in ["symbolic", "numeric"] {
        let mut args = vec!["verify-param", "--system", "", "--param", "", "--mode", mode];
        let (s, p, g) = (path("sys_a.json"), path("param12_a.json"), path("param12_a_germs.json"));
        args[2] = &s;
        args[4] = &p;
        if mode == "numeric" {
            args.extend(["--germs", &g]);
        }
        let out = monge(&args);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn construct_param12_outcomes() {
    let sys = path("sys_a_nf.json");
    let ok = monge(&[
        "construct-param12",
        "--system",
        &sys,
        "--first-integral",
        "-z + y*x1",
        "--at",
        &path("pt.json"),
        "--flat",
        "-z + y*x1,x",
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["flat_output"]["passed"], true);

    let singular = monge(&[
        "construct-param12",
        "--system",
        &sys,
        "--first-integral",
        "-z + y*x1",
        "--at",
        &path("pt_singular.json"),
    ]);
    assert_eq!(singular.status.code(), Some(2));

    let not_integral =
        monge(&["construct-param12", "--system", &sys, "--first-integral", "y", "--at", &path("pt.json")]);
    assert_eq!(not_integral.status.code(), Some(3));
}

#[test]
fn quartic_check_and_build() {
    let common = ["--system", &path("sys_quartic.json"), "-k", "1", "-l", "1"].map(String::from);
    let mut args: Vec<String> = vec!["check-solution".into()];
    args.extend(common.iter().cloned());
    args.extend(["--candidate".into(), path("quartic_p.json")]);
    let out = monge(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["regularity"]["kind"], "NotRegular");

    let mut args: Vec<String> = vec!["build-param".into()];
    args.extend(common.iter().cloned());
    args.extend(["--candidate".into(), path("quartic_p.json"), "--point".into(), path("quartic_point.json")]);
    let out = monge(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["numeric"]["passed"], true);
}

#[test]
fn simulate_csv() {
    let out =
        monge(&["simulate", "--system", &path("sys_a.json"), "--x", "t", "--y", "t^2", "--z0", "1", "--dt", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = csv.lines().last().unwrap();
    let z: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((z - (1.0 + (-1.0f64).exp())).abs() < 1e-8, "{z}");
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn verify_flat_fixture() {
    let out = monge(&[
        "verify-flat",
        "--system",
        &path("sys_a.json"),
        "--param",
        &path("param12_a.json"),
        "--flat",
        &path("param12_a_flat.json"),
        "--config",
        &path("param12_a_flat_config.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
