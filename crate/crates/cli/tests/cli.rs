use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str =
    r#"{"seeds":[0],"bo_iterations":3,"n_eval_trials":2,"n_demos":4,"gmm_clusters":5}"#;

fn skillopt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skillopt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn skillopt")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = skillopt(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), SMALL).unwrap();
    dir
}

#[test]
fn full_pipeline() {
    let dir = small_dir();
    let d = dir.path();
    let base = ["--config", "cfg.json", "--out", "o"];
    let with = |extra: &[&'static str]| -> Vec<&str> {
        base.iter().copied().chain(extra.iter().copied()).collect()
    };

    let s = ok(d, &[&["demo"][..], &with(&["--task", "round"])].concat());
    assert!(s.contains("round seed 0: 4 demonstrations"));
    assert_eq!(
        std::fs::read_dir(d.join("o/demos/seed0/round"))
            .unwrap()
            .count(),
        4
    );

    ok(
        d,
        &[
            &["learn"][..],
            &with(&["--task", "round,triangle,ellipse,rectangle"]),
        ]
        .concat(),
    );
    ok(
        d,
        &[
            &["learn"][..],
            &with(&["--task", "round", "--method", "time"]),
        ]
        .concat(),
    );
    assert!(d.join("o/library/seed0/index.json").is_file());
    for m in ["full", "nosim"] {
        let s = ok(
            d,
            &[
                &["transfer"][..],
                &with(&["--task", "round", "--method", m]),
            ]
            .concat(),
        );
        assert!(s.contains("round"), "{s}");
    }
    let s = ok(
        d,
        &[
            &["evaluate"][..],
            &with(&["--task", "round", "--method", "full", "--trials", "3"]),
        ]
        .concat(),
    );
    assert!(s.contains("/3 successes"), "{s}");

    let s = ok(d, &["report", "--config", "cfg.json", "--out", "o"]);
    assert!(
        s.contains("Full iters/succ") && s.contains("NoSim iters/succ"),
        "{s}"
    );
    let csv = std::fs::read_to_string(d.join("o/results.csv")).unwrap();
    // header + 4 LfD + Time + Full + NoSim
    assert_eq!(csv.lines().count(), 8, "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("round,NoSim,0,")));
}

#[test]
fn rerun_is_identical() {
    let dir = small_dir();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(
            d,
            &[
                "learn", "--config", "cfg.json", "--out", out, "--task", "triangle", "--method",
                "time",
            ],
        );
    }
    let a = std::fs::read(d.join("a/rows/triangle_Time_seed0.csv")).unwrap();
    let b = std::fs::read(d.join("b/rows/triangle_Time_seed0.csv")).unwrap();
    assert_eq!(a, b);
    let a = std::fs::read(d.join("a/records/triangle_Time_seed0.json")).unwrap();
    let b = std::fs::read(d.join("b/records/triangle_Time_seed0.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reports_errors() {
    let dir = small_dir();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"bo_iterations": 0}"#).unwrap();
    std::fs::write(d.join("unknown.json"), r#"{"iterations": 3}"#).unwrap();
    let cases: [&[&str]; 7] = [
        &["learn", "--method", "full", "--task", "round"],
        &["transfer", "--method", "lfd", "--task", "round"],
        &["demo", "--task", "nope"],
        &["demo", "--config", "bad.json"],
        &["demo", "--config", "unknown.json"],
        &[
            "transfer", "--config", "cfg.json", "--out", "empty", "--task", "round",
        ],
        &["report", "--out", "empty"],
    ];
    for args in cases {
        let out = skillopt(d, args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("error"),
            "{args:?}"
        );
    }
}
