use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_growthgap"));
    c.env_remove("GROWTHGAP_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn growthgap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn bounds_prints_header_and_rows() {
    let o = run(&["bounds", "--theorem", "thm3", "--modulus", "holder:0.5", "--constants", "C=1", "--n-list", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,bound_value\n100,10.0\n");
}

#[test]
fn identity_growth_is_zero() {
    let o = run(&["growth", "--diffeo", "identity", "--nmax", "5", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,log_gamma,log_sup,log_inf,arg_sup,arg_inf"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], (i + 1).to_string());
        assert_eq!(f[1], "0.0");
    }
}

#[test]
fn growth_output_is_byte_identical_across_runs_and_workers() {
    let args = [
        "growth", "--diffeo", "sharpness", "--modulus", "holder:0.5", "--epsilon", "0.25", "--nmax", "200", "--grid", "512",
    ];
    let a = run(&args);
    let b = bin().args(args).env("GROWTHGAP_WORKERS", "1").output().unwrap();
    let c = bin().args(args).arg("--workers").arg("3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn describe_and_modulus_headers() {
    let o = run(&["describe", "--diffeo", "moebius_test", "--samples", "3"]);
    assert_eq!(stdout(&o), "x,f,fprime\n0.0,0.0,2.0\n0.5,0.6666666666666666,0.8888888888888888\n1.0,1.0,0.5\n");
    let o = run(&["modulus", "--modulus", "lipschitz", "--grid", "3"]);
    assert!(stdout(&o).starts_with("delta,omega,majorant\n"));
    let o = run(&["modulus", "--modulus", "holder:0.5", "--regularity"]);
    assert!(stdout(&o).starts_with("property,value,cutoff\n"));
}

#[test]
fn construct_reports_membership() {
    let o = run(&["construct", "--diffeo", "from_modulus", "--modulus", "lipschitz", "--epsilon", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("key,value\n"));
    assert!(out.contains("tangential,true"));
    assert!(out.lines().any(|l| l.starts_with("membership_constant,")));
}

#[test]
fn verify_passing_scenario_exits_zero_and_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records.csv");
    let o = run(&["verify", scenario("moebius.cfg").to_str().unwrap(), "--records", rec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("config_sha256: "));
    assert!(text.contains("overall: pass"));
    let csv = std::fs::read_to_string(rec).unwrap();
    assert!(csv.starts_with("check,verdict,value,target,tolerance,window\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn verify_failing_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    std::fs::write(
        &cfg,
        "name = strict\nmodulus.kind = lipschitz\ndiffeo.kind = from_modulus\ndiffeo.epsilon = 0.25\n\
         growth.n_max = 256\ngrowth.grid = 512\nchecks.list = gamma_characterization\n\
         tolerance.gamma_final = 1.0001\n",
    )
    .unwrap();
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overall: fail"));
}

#[test]
fn sweep_writes_one_row_per_scenario_and_check() {
    let o = run(&["sweep", scenario("sweep_epsilon.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("scenario,check,verdict,value,target,tolerance,window"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn output_format_csv_goes_to_the_configured_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    let out = dir.path().join("m.csv");
    std::fs::write(
        &cfg,
        format!(
            "name = m\ndiffeo.kind = moebius_test\ngrowth.n_max = 16\nchecks.list = moebius_oracle\n\
             output.format = csv\noutput.path = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("check,verdict,"));
    assert!(csv.contains("moebius_oracle,pass,"));
}

#[test]
fn help_lists_flags_with_defaults() {
    for (sub, flag) in [
        ("growth", "[default: 1024]"),
        ("modulus", "[default: 4096]"),
        ("describe", "[default: 1025]"),
        ("construct", "[default: contracting]"),
        ("bounds", "[default: lipschitz]"),
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let h = stdout(&o);
        assert!(h.contains(flag), "{sub} --help lacks {flag}:\n{h}");
        assert!(h.contains("--workers"), "{sub} --help lacks --workers");
    }
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(run(&["growth", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--diffeo", "sharpness"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "name = bad\nmodulus.colour = blue\n").unwrap();
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(run(&["verify", "/nonexistent.cfg"]).status.code(), Some(2));
}
