use std::process::{Command, Output};

fn solvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn suites_are_byte_identical_across_runs() {
    for suite in ["metric-axioms", "relations", "iterate", "psi", "modelcount", "dense"] {
        for format in ["json", "csv"] {
            let args = ["run", "--suite", suite, "--samples", "30", "--seed", "9", "--format", format];
            let (a, b) = (solvlab(&args), solvlab(&args));
            assert_eq!(a.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&a.stderr));
            assert!(!a.stdout.is_empty());
            assert_eq!(a.stdout, b.stdout, "{suite} {format}");
        }
    }
}

#[test]
fn seeds_change_the_sample() {
    let run = |seed: &str| {
        solvlab(&["run", "--suite", "metric-axioms", "--m", "3", "--samples", "20", "--seed", seed, "--format", "csv"])
    };
    assert_ne!(run("1").stdout, run("2").stdout);
}

#[test]
fn failed_checks_exit_one_with_records() {
    let o = solvlab(&["run", "--suite", "dense", "--radius", "0", "--samples", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("index,target,word,residual,eps,pass\n"));
    let err = String::from_utf8(o.stderr).unwrap();
    let first: serde_json::Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    assert_eq!(first["module"], "groups");
    assert_eq!(first["operation"], "dense_translation_sampler");
    assert!(first["witness"].as_str().unwrap().contains("budget exceeded"));
}

#[test]
fn errors_exit_two() {
    let o = solvlab(&["spectral", "analyze", "--matrix", "[[1,1],[0,1]]"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["module"], "spectral");
    assert_eq!(err["operation"], "error");
    assert_eq!(solvlab(&["run", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn single_commands() {
    let o = solvlab(&["models", "common-base", "4", "8"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["r"].as_u64(), v["i"].as_u64(), v["j"].as_u64()), (Some(2), Some(2), Some(3)));

    let o = solvlab(&["group", "wordlen", "--group", "bs:1,2", "--word", "a a b a^-1 a^-1", "--radius", "8"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["word_length"], 4);

    let o = solvlab(&["boundary", "dist", "--kind", "madic", "--m", "2", "--x", "011@-3", "--y", "1@0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["distance"], 4.0);

    let o = solvlab(&["qi", "iterate", "--c1", "1", "--c2", "-0.9", "--R", "5", "--format", "csv"]);
    assert_eq!(stdout(&o), "verdict,step\nviolated,101\n");
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("solvlab-cli-{}.csv", std::process::id()));
    let o = solvlab(&["run", "--suite", "iterate", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.starts_with("c1,c2,R,verdict,expected,pass\n"));
}
