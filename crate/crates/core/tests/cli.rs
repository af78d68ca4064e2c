use std::process::{Command, Output};

use diffiety::expr::Context;
use diffiety::idf::IdfSpace;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffiety"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_accepts_corpus_and_files() {
    let o = run(&["check", "kdv.eq"]);
    assert_eq!(o.status.code(), Some(0));
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/wave2.eq");
    assert_eq!(run(&["check", path]).status.code(), Some(0));
}

#[test]
fn check_rejects_non_evolution_system() {
    let dir = std::env::temp_dir().join("diffiety-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.eq");
    std::fs::write(
        &path,
        "[system]\nname = bad\nindependent = x, t\ndependent = u\n[equations]\nu_x = u_t\n",
    )
    .unwrap();
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not in evolution form"));
}

#[test]
fn adjoint_of_kdv() {
    let o = run(&["adjoint", "kdv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("-Dt + 6*u*Dx + Dx^3"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["e1", "kdv", "--k", "9"]).status.code(), Some(2));
    assert_eq!(run(&["e1", "kdv", "--p", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "no-such-system"]).status.code(), Some(2));
    assert_eq!(
        run(&["e1", "kdv", "--format", "yaml"]).status.code(),
        Some(2)
    );
}

#[test]
fn e1_json_has_expected_kernel_and_reparses() {
    let o = run(&[
        "e1", "kdv", "--k", "1", "--p", "1", "--order", "2", "--degree", "2", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cells = v["cells"].as_array().unwrap();
    let kernel = cells.iter().find(|c| c["kind"] == "kernel").unwrap();
    assert_eq!(kernel["q"], 1);
    assert_eq!(
        kernel["basis"],
        serde_json::json!(["1", "u", "3*u^2 + u_xx"])
    );
    let vanishing = cells.iter().find(|c| c["kind"] == "vanishing").unwrap();
    assert_eq!(vanishing["dims"]["dim"], 0);
    assert!(vanishing["dims"]["rows"].as_u64().unwrap() > 0);
    let space = IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), 1).unwrap();
    for c in cells {
        for b in c["basis"].as_array().unwrap() {
            let text = b.as_str().unwrap();
            assert_eq!(space.display(&space.parse(text).unwrap()), text);
        }
    }
}

#[test]
fn e1_q_filter_and_out_file() {
    let path = std::env::temp_dir().join("diffiety-e1-q.json");
    let p = path.to_str().unwrap();
    let o = run(&["e1", "burgers", "--q", "0", "--format", "json", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 1);
    assert_eq!(v["cells"][0]["kind"], "vanishing");
}

#[test]
fn solver_subcommands() {
    let o = run(&[
        "symmetries",
        "heat",
        "--order",
        "1",
        "--degree",
        "1",
        "--xt",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ansatz"]["N"], 1);
    assert!(v["kernel"]
        .as_array()
        .unwrap()
        .iter()
        .any(|k| k == "x*u + 2*t*u_x"));
    assert!(v.get("timing_ms").is_none());
    let o = run(&["cosymmetries", "burgers", "--format", "json", "--timing"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 1);
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn lift_and_green_check() {
    let o = run(&["lift", "kdv", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("block {1} x {}: -6*dv[1]u*Dx - 6*dv[1]u_x"));
    for name in ["heat", "burgers", "kdv", "transport", "wave2"] {
        assert_eq!(run(&["green-check", name]).status.code(), Some(0), "{name}");
    }
}

#[test]
fn selftest_is_seeded() {
    let a = run(&[
        "selftest", "--cases", "5", "--seed", "3", "--format", "json",
    ]);
    let b = run(&[
        "selftest", "--cases", "5", "--seed", "3", "--format", "json",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["e1", "kdv", "--format", "json"][..],
        &[
            "e1", "wave2", "--k", "2", "--order", "1", "--degree", "1", "--format", "json",
        ][..],
        &["linearize", "wave2", "--format", "json"][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}
