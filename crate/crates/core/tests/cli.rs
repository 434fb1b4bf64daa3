use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lambda-forge"));
    cmd.env_remove("LAMBDA_FORGE_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const DEFAULT: &str = include_str!("../configs/default.toml");

#[test]
fn classify_is_byte_identical_across_runs_and_thread_counts() {
    let a = run(&["classify", "--from", "2", "--to", "1000"]);
    let b = run(&["classify", "--from", "2", "--to", "1000"]);
    let c = bin()
        .env("LAMBDA_FORGE_THREADS", "1")
        .args(["classify", "--from", "2", "--to", "1000"])
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let csv = run(&["classify", "--to", "60", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ell,trace_mod_p,verdict"));
    assert!(text.contains("\n7,,Skipped\n"));
    assert!(text.contains("\n37,3,PiMember\n"));
}

#[test]
fn reports_carry_schema_and_assertions() {
    for args in [
        vec!["classify", "--to", "50"],
        vec!["plan", "--target-lambda", "1"],
        vec!["verify-density", "--bound", "100"],
        vec!["carayol", "--level", "407"],
        vec!["sigma", "--to", "50"],
        vec!["screen-p", "--p", "7"],
        vec!["a-ell", "--ell", "13"],
    ] {
        let v = json(&run(&args));
        assert_eq!(v["schema_version"], 1, "{args:?}");
        let assertions = v["assertions"].as_array().unwrap();
        assert!(
            assertions.iter().any(|a| a == "surjective_mod_p = true"),
            "{args:?}"
        );
        assert!(assertions.iter().any(|a| a == "lambda_g = 0"), "{args:?}");
        assert!(v.get("generated_at_unix").is_none());
    }
    let v = json(&run(&["--timestamps", "a-ell", "--ell", "13"]));
    assert!(v["generated_at_unix"].is_u64());
}

#[test]
fn missing_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &DEFAULT.replace("p = 7\n", ""));
    let out = run(&["--config", &cfg, "classify", "--to", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));
}

#[test]
fn table_gap_exits_3_naming_the_prime() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a.csv"),
        "ell,a_ell\n2,-2\n3,-1\n7,-2\n13,4\n",
    )
    .unwrap();
    let text = "p = 7\nlambda_g = 0\nmu_zero = true\nsurjective_mod_p = true\n\
                optimal_level_asserted = true\nbackend = \"table\"\nlevel = 11\ntable = \"a.csv\"\n";
    let cfg = write_config(dir.path(), text);
    let out = run(&["--config", &cfg, "classify", "--to", "13"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime 5"));
}

#[test]
fn a_ell_dump_round_trips_as_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("a.csv");
    let out = run(&[
        "--format",
        "csv",
        "--out",
        dump.to_str().unwrap(),
        "a-ell",
        "--to",
        "500",
    ]);
    assert!(out.status.success());
    let table = lambda_forge::forms::load_coefficients(&dump, 11).unwrap();
    assert_eq!(table.get(13).unwrap(), 4);
    assert_eq!(table.get(7).unwrap(), -2);

    let text = DEFAULT
        .replace(
            "backend = \"curve\"",
            "backend = \"table\"\nlevel = 11\ntable = \"a.csv\"",
        )
        .replace("curve = [0, -1, 1, -10, -20]\n", "")
        .replace("conductor = 11\n", "");
    let cfg = write_config(dir.path(), &text);
    let from_table = run(&[
        "--config", &cfg, "--format", "csv", "classify", "--to", "500",
    ]);
    let from_curve = run(&["--format", "csv", "classify", "--to", "500"]);
    assert!(
        from_table.status.success(),
        "{}",
        String::from_utf8_lossy(&from_table.stderr)
    );
    assert_eq!(from_table.stdout, from_curve.stdout);
}

#[test]
fn plan_examples() {
    let v = json(&run(&["plan", "--target-lambda", "3"]));
    assert_eq!(v["pi_primes"].as_array().unwrap().len(), 3);
    assert_eq!(v["predicted_lambda"], 3);
    assert_eq!(v["predicted_mu"], 0);
    assert_eq!(v["bk_rank"]["candidates"], serde_json::json!([1, 3]));

    let out = run(&["plan", "--target-lambda", "0", "--omega-count", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let v = json(&run(&[
        "plan",
        "--target-lambda",
        "2",
        "--omega-count",
        "2",
    ]));
    assert_eq!((v["n"].as_u64(), v["r"].as_u64()), (Some(2), Some(2)));
    assert_eq!(v["predicted_lambda"], 2);
    for case in v["carayol_cases"].as_array().unwrap() {
        assert_eq!(case["status"], "Admissible");
    }

    let v = json(&run(&[
        "plan",
        "--target-lambda",
        "1",
        "--omega-count",
        "1",
        "--alternatives",
        "4",
    ]));
    assert_eq!(v["alternatives"].as_array().unwrap().len(), 4);

    let out = run(&["plan", "--target-lambda", "4", "--scan-bound", "40"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2/21"));
}

#[test]
fn verify_density_modes() {
    let v = json(&run(&["verify-density", "--enumerate-gl2", "7"]));
    assert_eq!(v["class_counts"]["ratio_Y"], "1/9");
    assert_eq!(v["class_counts"]["count_Y_prime"], 224);
    assert_eq!(v["identity_holds"], true);

    let v = json(&run(&["verify-density", "--bound", "100"]));
    assert_eq!(v["pi"]["verdict"], "Underpowered");
    assert_eq!(v["omega"]["exact_density"], "1/9");

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dump.csv");
    let out = run(&[
        "verify-density",
        "--bound",
        "3000",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(csv)
        .unwrap()
        .starts_with("ell,trace_mod_p,verdict\n2,5,Neither\n"));

    let out = run(&["verify-density", "--enumerate-gl2", "17"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &DEFAULT.replace("surjective_mod_p = true", "surjective_mod_p = false"),
    );
    let out = run(&["--config", &cfg, "verify-density", "--bound", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn carayol_reports() {
    // 37 is in Pi_g for p = 7, so 11 * 37 is admissible by case (1)
    let v = json(&run(&["carayol", "--level", "407"]));
    assert_eq!(v["status"], "Admissible");
    assert_eq!(v["primes"][0]["satisfied_cases"], serde_json::json!(["1"]));

    // 2: a_2 = -2 ≡ 5, and 2 * 25 ≢ 9 * 2 mod 7
    let v = json(&run(&["carayol", "--level", "22"]));
    assert_eq!(v["status"], "Inadmissible");

    // 29 ≡ 1 mod 7 with alpha = 2 falls under case (3)(a)
    let v = json(&run(&["carayol", "--level", &(11 * 29 * 29).to_string()]));
    assert_eq!(v["primes"][0]["satisfied_cases"], serde_json::json!(["3a"]));

    let out = run(&["carayol", "--level", "13"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sigma_screen_and_errors() {
    let out = run(&[
        "--format",
        "csv",
        "sigma",
        "--to",
        "50",
        "--admissible-only",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "ell,s,d,sigma\n5,1,0,0\n37,1,1,1\n47,1,0,0\n");

    let v = json(&run(&["screen-p", "--p", "11"]));
    assert_eq!(v["mechanically_eligible"], false);

    let out = run(&["--format", "csv", "plan", "--target-lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .env("LAMBDA_FORGE_THREADS", "zero")
        .args(["a-ell", "--ell", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--config", "/nonexistent/run.toml", "a-ell", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
