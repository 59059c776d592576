use std::process::{Command, Output};

use tempfile::TempDir;

const SB: &str = "init: x=0 y=0\nthread T0\nwr x 1\nrd y 0\nthread T1\nwr y 1\nrd x 0\n";

fn mmcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn check_empty_trace_is_consistent() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.mmh", "");
    for model in ["sc", "tso", "pso", "rmo"] {
        assert_eq!(code(&mmcheck(&["check", &empty, "--model", model])), 0);
    }
}

#[test]
fn check_store_buffering() {
    let dir = TempDir::new().unwrap();
    let sb = write(&dir, "sb.mmh", SB);
    let out = mmcheck(&["check", &sb, "--model", "sc", "--stats", "--witness"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(
        text.starts_with("verdict: inconsistent\nmodel: sc\nk: 4\nn: 6\n"),
        "{text}"
    );
    assert!(text.contains("diagnostics: "));
    assert!(!text.contains("tw: "));

    let out = mmcheck(&["check", &sb, "--model", "TSO", "--witness", "--stats"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let tw = text.lines().find_map(|l| l.strip_prefix("tw: ")).unwrap();
    assert_eq!(tw.split(" < ").count(), 4);
    let subsets: u64 = text
        .lines()
        .find_map(|l| l.strip_prefix("subsets: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(subsets <= 1 << 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: "));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let sb = write(&dir, "sb.mmh", SB);
    let out = mmcheck(&["check", &sb, "--model", "xyz"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("xyz"));

    let bad = write(&dir, "bad.mmh", "thread T0\nwr x one\n");
    let out = mmcheck(&["check", &bad, "--model", "sc"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(
        code(&mmcheck(&["check", "/nonexistent.mmh", "--model", "sc"])),
        2
    );
    assert_eq!(code(&mmcheck(&["frobnicate"])), 2);
}

#[test]
fn resource_limits_exit_3() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("thread T0\n");
    for v in 0..9 {
        text.push_str(&format!("wr x {v}\n"));
    }
    let big = write(&dir, "big.mmh", &text);
    assert_eq!(
        code(&mmcheck(&["check", &big, "--model", "sc", "--max-k", "8"])),
        3
    );
    assert_eq!(code(&mmcheck(&["check", &big, "--model", "sc"])), 0);
    let out = mmcheck(&["oracle", &big, "--model", "sc", "--oracle-mode", "total"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn oracle_agrees_with_check() {
    let dir = TempDir::new().unwrap();
    let sb = write(&dir, "sb.mmh", SB);
    for (model, expected) in [("sc", 1), ("tso", 0), ("pso", 0), ("rmo", 0)] {
        assert_eq!(code(&mmcheck(&["check", &sb, "--model", model])), expected);
        for mode in ["total", "store"] {
            let out = mmcheck(&[
                "oracle",
                &sb,
                "--model",
                model,
                "--oracle-mode",
                mode,
                "--witness",
            ]);
            assert_eq!(code(&out), expected, "{model} {mode}");
        }
    }
    let out = mmcheck(&[
        "oracle",
        &sb,
        "--model",
        "tso",
        "--oracle-mode",
        "store",
        "--witness",
    ]);
    assert!(
        stdout(&out).contains("ww: x: init:0 < T0:0; y: init:1 < T1:0"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn gen_sat_round_trips() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "one.cnf", "p cnf 3 1\n1 -2 3 0\n");
    for variant in ["sc", "relaxed"] {
        let out = mmcheck(&["gen", "sat", "--variant", variant, &cnf]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        let h = mmcheck::parse_history(&text).unwrap();
        assert_eq!(h.to_trace(), text);
        assert_eq!(h.k(), 2 * 3 + 2 * 3);

        let path = dir.path().join(format!("{variant}.mmh"));
        let out = mmcheck(&[
            "gen",
            "sat",
            "--variant",
            variant,
            &cnf,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    }
    let bad = write(&dir, "two.cnf", "p cnf 2 1\n1 2 0\n");
    assert_eq!(code(&mmcheck(&["gen", "sat", "--variant", "sc", &bad])), 2);
}

#[test]
fn gen_random_is_deterministic_and_consistent() {
    let dir = TempDir::new().unwrap();
    let args = [
        "gen",
        "random",
        "--model",
        "pso",
        "--threads",
        "3",
        "--events",
        "4",
        "--vars",
        "2",
        "--seed",
        "7",
    ];
    let a = mmcheck(&args);
    let b = mmcheck(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let trace = write(&dir, "gen.mmh", &stdout(&a));
    assert_eq!(code(&mmcheck(&["check", &trace, "--model", "pso"])), 0);

    let rmo = [
        "gen",
        "random",
        "--model",
        "rmo",
        "--threads",
        "1",
        "--events",
        "1",
        "--vars",
        "1",
        "--seed",
        "0",
    ];
    assert_eq!(code(&mmcheck(&rmo)), 2);
}

#[test]
fn mutate_writes_a_parseable_trace() {
    let dir = TempDir::new().unwrap();
    let sb = write(&dir, "sb.mmh", SB);
    let out_path = dir.path().join("m.mmh");
    let out = mmcheck(&[
        "mutate",
        "--seed",
        "3",
        &sb,
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let h = mmcheck::parse_history(&text).unwrap();
    assert!(h.explicit_rf());
    assert_ne!(text, SB);

    let lonely = write(&dir, "lonely.mmh", "thread T0\nwr x 1\n");
    assert_eq!(code(&mmcheck(&["mutate", "--seed", "0", &lonely])), 2);
}
