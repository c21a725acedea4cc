use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fulfillnet"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawn");
    assert!(
        output.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).expect("read artifact")
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        run_ok(&[
            "generate",
            "synthetic",
            "--seed",
            "7",
            "--alpha",
            "0.6",
            "--demands",
            "40",
            "--fcs",
            "6",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(read(&a.join("instance.json")), read(&b.join("instance.json")));
    // Rerunning the identical command reproduces the manifest bit for bit.
    let manifest_before = read(&a.join("manifest.json"));
    run_ok(&[
        "generate",
        "synthetic",
        "--seed",
        "7",
        "--alpha",
        "0.6",
        "--demands",
        "40",
        "--fcs",
        "6",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(read(&a.join("manifest.json")), manifest_before);
}

#[test]
fn solve_reports_exact_line_lb_delays() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    run_ok(&[
        "generate", "line-lb", "--k", "3", "--dprime", "10", "--L", "100", "--out",
        gen.to_str().unwrap(),
    ]);
    let sol = dir.path().join("sol");
    let out = run_ok(&[
        "solve",
        gen.join("instance.json").to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert!(stdout_of(&out).contains("total_delay=1233"));
    let reg = dir.path().join("reg");
    let out = run_ok(&[
        "solve",
        gen.join("instance.json").to_str().unwrap(),
        "--regions",
        gen.join("k-regionalization.json").to_str().unwrap(),
        "--out",
        reg.to_str().unwrap(),
    ]);
    assert!(stdout_of(&out).contains("total_delay=112"));
    // The emitted solution verifies.
    let out = run_ok(&[
        "verify",
        gen.join("instance.json").to_str().unwrap(),
        sol.join("solution.json").to_str().unwrap(),
    ]);
    assert!(stdout_of(&out).contains("verification: pass"));
}

#[test]
fn verify_rejects_tampered_solution() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    run_ok(&[
        "generate", "line-lb", "--k", "2", "--dprime", "1", "--L", "5", "--out",
        gen.to_str().unwrap(),
    ]);
    let sol = dir.path().join("sol");
    run_ok(&[
        "solve",
        gen.join("instance.json").to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    let path = sol.join("solution.json");
    let text = String::from_utf8(read(&path)).unwrap();
    let tampered = text.replacen("\"backlog\": 0", "\"backlog\": 1000000", 1);
    assert_ne!(text, tampered, "expected a zero backlog to tamper with");
    std::fs::write(&path, tampered).unwrap();
    let output = bin()
        .args([
            "verify",
            gen.join("instance.json").to_str().unwrap(),
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stdout).contains("violation:"));
}

#[test]
fn sweep_alpha_pins_voronoi_endpoint_to_min_cost() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    run_ok(&[
        "sweep-alpha",
        "--seed",
        "11",
        "--alphas",
        "0,0.5,1",
        "--demands",
        "40",
        "--fcs",
        "6",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = String::from_utf8(read(&out_dir.join("sweep.csv"))).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4, "header plus three alphas:\n{csv}");
    let last: Vec<&str> = rows[3].split(',').collect();
    assert_eq!(last[0], "1");
    assert_eq!(last[1], last[2], "alpha=1 delay must equal min cost");
    let svg = String::from_utf8(read(&out_dir.join("sweep.svg"))).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    // The exact CSV numbers appear in the chart markup.
    assert!(svg.contains(last[1]));
}

#[test]
fn compare_reports_regional_improvement() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    run_ok(&["generate", "continuous-line", "--n", "100", "--out", gen.to_str().unwrap()]);
    let kreg = dir.path().join("kreg");
    run_ok(&[
        "regionalize",
        gen.join("instance.json").to_str().unwrap(),
        "--mode",
        "k",
        "--out",
        kreg.to_str().unwrap(),
    ]);
    let cmp = dir.path().join("cmp");
    let out = run_ok(&[
        "compare",
        gen.join("instance.json").to_str().unwrap(),
        kreg.join("regionalization.json").to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
    ]);
    let text = stdout_of(&out);
    assert!(text.contains("global_delay=50"));
    assert!(text.contains("regional_delay=30"));
    assert!(text.contains("improvement_percent=40"));
}

#[test]
fn exit_codes_distinguish_usage_and_input() {
    let output = bin().args(["solve"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2), "missing args is usage");
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "solve",
            "/nonexistent/instance.json",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "missing input file");
}

#[test]
fn fe_scale_override_preserves_decimal_values() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    run_ok(&[
        "generate", "line-lb", "--k", "3", "--dprime", "10", "--L", "100", "--out",
        gen.to_str().unwrap(),
    ]);
    let sol = dir.path().join("sol");
    let output = bin()
        .env("FE_SCALE", "1000")
        .args([
            "solve",
            gen.join("instance.json").to_str().unwrap(),
            "--out",
            sol.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    // Integer-unit instances quantize identically at any power-of-ten scale.
    assert!(String::from_utf8_lossy(&output.stdout).contains("total_delay=1233"));
    let output = bin()
        .env("FE_SCALE", "123")
        .args([
            "solve",
            gen.join("instance.json").to_str().unwrap(),
            "--out",
            sol.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "non-power-of-ten scale");
}
