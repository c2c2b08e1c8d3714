use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use superloops_cli::suite::{run_file, run_suite, Format, Golden};
use superloops_cli::{run_source, CliError, Options, Report};

fn run(src: &str) -> Report {
    run_source(src, &Options::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn scripts() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts")
}

const EPS_LOOP: &str =
    "even x1 x2;\neven eps cap 3;\nloop g = x1: x1 + eps * t^-1, x2: x2 + eps * t;\n";

#[test]
fn odd_square_evaluates_to_zero() {
    let r = run("odd xi; form f = xi * xi;");
    assert_eq!(r.inputs["forms"]["f"]["value"], "0");
    assert!(r.passed() && r.checks.is_empty());
}

#[test]
fn sl12_table_is_fully_verified() {
    let r = run("check sl12;");
    assert_eq!(r.results["brackets_verified"], "36/36");
    assert_eq!(r.results["brackets"].as_array().unwrap().len(), 36);
    assert_eq!(r.results["dimension"], "4|4");
    assert!(r.passed(), "{}", r.to_text());
}

#[test]
fn radon_of_the_eps_loop() {
    // ε² a x1^(a-1) x2^b at a = 2, b = 1
    let r = run(&format!(
        "{EPS_LOOP}form w = d(x1^2 * x2 * d x2);\nradon w g;"
    ));
    assert_eq!(r.results["value"], "2*x1*x2*eps^2");
    assert!(r.passed());
    // and a = 3, b = 2
    let r = run(&format!(
        "{EPS_LOOP}form w = d(x1^3 * x2^2 * d x2);\nradon w g;"
    ));
    assert_eq!(r.results["value"], "3*x1^2*x2^2*eps^2");
}

#[test]
fn radon_rejects_open_forms_as_a_failed_check() {
    let r = run(
        "even x1 x2 x3;\neven eps cap 3;\nloop g = x1: x1 + eps * t^-1, x2: x2, x3: x3 + eps * t;\nform w = x3 * d x1 * d x2;\nradon w g;",
    );
    assert!(!r.passed());
    assert!(r.results["value"].is_null());
}

#[test]
fn additivity_two_poles() {
    let r = run(
        "even x1 x2;\npoles P = a/(t) + b/(lambda - t);\nform w = x1 * d x2;\nadditivity w P 3;",
    );
    assert!(r.passed(), "{}", r.to_text());
    let exps = r.results["lambda_expansion"].as_array().unwrap();
    for k in -3..0 {
        let row = exps.iter().find(|e| e["exponent"] == k).unwrap();
        assert_eq!(row["coefficient"], "0");
    }
    let fam = &r.results["family"]["poles"];
    assert_eq!(fam[1]["location"], "lambda");
    assert_eq!(fam[1]["orientation"], -1);
}

#[test]
fn additivity_default_order_comes_from_options() {
    let src =
        "even x1 x2;\npoles P = a/(t) + b/(lambda - t);\nform w = x1^2 * d x2;\nadditivity w P;";
    let opts = Options {
        caps: 4,
        ..Options::default()
    };
    let r = run_source(src, &opts).unwrap();
    assert_eq!(r.results["nilpotency_order"], 4);
    assert!(r.passed());
}

#[test]
fn coincident_poles_are_an_error() {
    let e = run_source(
        "even x;\npoles P = a/(t) + b/(-t);\nform w = x * d x;\nadditivity w P 3;",
        &Options::default(),
    )
    .unwrap_err();
    assert_eq!(e.kind(), "evaluation");
    assert!(e.to_string().contains("additivity w P 3"), "{e}");
}

#[test]
fn parameters_cannot_enter_forms() {
    let e = run_source(
        &format!("{EPS_LOOP}form w = eps * d x1;\ntransgress w g;"),
        &Options::default(),
    )
    .unwrap_err();
    assert!(e.to_string().contains("`eps`"), "{e}");
}

#[test]
fn hessian_of_area_form() {
    let r = run("even x1 x2;\nform w = d x1 * d x2;\nhessian w 1;");
    assert_eq!(
        r.results["matrix"],
        serde_json::json!([["0", "1"], ["-1", "0"]])
    );
    assert!(r.passed());
}

#[test]
fn berezinian_of_diagonal_matrix() {
    // Ber(diag(a | d1, d2)) = a / (d1 d2)
    let r = run("even e cap 3;\nberezinian 1 2 [2, 0, 0; 0, 1 + e, 0; 0, 0, 1];");
    assert_eq!(r.results["value"], "2 - 2*e + 2*e^2");
    assert!(r.passed());
}

#[test]
fn chain_map_depends_on_the_seed_only() {
    let src = "even x;\nodd xi;\ncheck chain-map 2 4;";
    let a = run_source(
        src,
        &Options {
            seed: 9,
            ..Options::default()
        },
    )
    .unwrap();
    let b = run_source(
        src,
        &Options {
            seed: 9,
            ..Options::default()
        },
    )
    .unwrap();
    let c = run_source(
        src,
        &Options {
            seed: 10,
            ..Options::default()
        },
    )
    .unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_ne!(a.to_json(), c.to_json());
    assert!(a.passed() && c.passed());
}

#[test]
fn reports_are_deterministic() {
    for path in [
        scripts().join("additivity3.sl"),
        scripts().join("taylor.sl"),
    ] {
        let a = run_file(&path, &Options::default()).unwrap();
        let b = run_file(&path, &Options::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
    }
}

#[test]
fn suite_matches_stored_goldens() {
    let golden = Golden {
        dir: scripts().join("golden"),
        bless: false,
    };
    let entries = run_suite(&scripts(), &Options::default(), Format::Json, Some(&golden)).unwrap();
    assert!(entries.len() >= 10);
    for e in &entries {
        assert!(e.passed(), "{}: {:?}", e.script.display(), e.golden);
    }
}

#[test]
fn golden_mismatch_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("scripts");
    fs::create_dir(&dir).unwrap();
    fs::write(
        dir.join("closed.sl"),
        "even x1 x2;\nform w = d(x1^2 * d x2);\ncheck closed w;\n",
    )
    .unwrap();
    let golden = Golden {
        dir: tmp.path().join("golden"),
        bless: true,
    };
    let entries = run_suite(&dir, &Options::default(), Format::Text, Some(&golden)).unwrap();
    assert!(entries[0].passed());
    let file = golden.dir.join("closed.txt");
    let text = fs::read_to_string(&file)
        .unwrap()
        .replace("verdict: pass", "verdict: fail");
    fs::write(&file, text).unwrap();
    let check = Golden {
        bless: false,
        ..golden
    };
    let entries = run_suite(&dir, &Options::default(), Format::Text, Some(&check)).unwrap();
    assert!(matches!(
        entries[0].golden,
        Some(Err(CliError::Golden { .. }))
    ));
    assert!(!entries[0].passed());
}

fn binary(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_superloops"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn exit_status_follows_the_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, src: &str| {
        let p = tmp.path().join(name);
        fs::write(&p, src).unwrap();
        p.to_string_lossy().into_owned()
    };
    let good = write(
        "good.sl",
        "even x1 x2;\nform w = d(x1^2 * d x2);\ncheck closed w;\n",
    );
    let bad = write(
        "bad.sl",
        "even x1 x2;\nform w = x1 * d x2;\ncheck closed w;\n",
    );
    let broken = write("broken.sl", "even x1 x2;\nform w = ;\n");

    let (code, out) = binary(&["run", &good]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: pass (1/1 checks)"));
    let (code, out) = binary(&["run", "--json", &bad]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["checks"][0]["passed"], false);
    assert_eq!(binary(&["run", &broken]).0, 2);

    let (code, out) = binary(&["suite", tmp.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("suite: 1/3 scripts passed"), "{out}");

    let (code, out) = binary(&["fmt", &good]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "even x1 x2;\nform w = d(x1^2 * d x2);\ncheck closed w;\n"
    );
}

#[test]
fn timing_is_opt_in() {
    let opts = Options {
        timing: true,
        ..Options::default()
    };
    let r = run_source("check sl12;", &opts).unwrap();
    assert!(r.timing_ms.is_some());
    assert!(r.to_json().contains("timing_ms"));
    assert!(!run("check sl12;").to_json().contains("timing_ms"));
}
