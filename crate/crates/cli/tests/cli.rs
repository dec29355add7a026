use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pesao_sim::engine::library::parse_library;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pesao-sim"))
        .args(args)
        .env_remove("PESAO_SIM_OUT")
        .output()
        .expect("binary runs")
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_twice_gives_identical_trees() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = tmp.path().join("p.txt");
    fs::write(&plan, "sessions = 2\nnoise = on\n").unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = bin(&["run", "--plan", plan.to_str().unwrap(), "--seed", "7", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = tree(&a);
    assert_eq!(ta.len(), 36 + 2);
    assert_eq!(ta, tree(&b));
}

#[test]
fn mined_graphs_reload_as_libraries() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = tmp.path().join("p.txt");
    fs::write(&plan, "sessions = 3\nnoise = off\nmaster_seed = 2\n").unwrap();
    let run = tmp.path().join("run");
    assert!(bin(&["run", "--plan", plan.to_str().unwrap(), "--out", run.to_str().unwrap()]).status.success());
    let mined = tmp.path().join("mined");
    let o = bin(&["mine", "--traces", run.to_str().unwrap(), "--min-support", "0.1", "--out", mined.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let methods = parse_library(&fs::read_to_string(mined.join("methods.lib")).unwrap()).unwrap();
    assert!(!methods.methods.is_empty());
    let trials = parse_library(&fs::read_to_string(mined.join("trial_graphs.lib")).unwrap()).unwrap();
    assert_eq!(trials.methods.len(), 54);
    assert_eq!(fs::read_dir(mined.join("trial_graphs")).unwrap().count(), 54);

    let rep = tmp.path().join("rep");
    let o = bin(&["report", "--results", run.to_str().unwrap(), "--out", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(rep.join("fixations_by_complexity_sameness.svg")).unwrap();
    let total: usize = svg
        .split("n=")
        .skip(1)
        .map(|t| t[..t.find('<').unwrap()].parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 54);
}

#[test]
fn objects_file_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["gen-objects", "--seed", "3", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("objects.txt")).unwrap();
    assert_eq!(pesao_sim::objectgen::parse_library(&text).unwrap().len(), 12);
    assert!(String::from_utf8_lossy(&o.stdout).contains("378 configurations"));
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["report", "--results", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("results.csv"));

    let missing = tmp.path().join("nope.txt");
    let o = bin(&["run", "--plan", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));

    let o = bin(&["run", "--bogus"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pesao-sim"))
        .args(["gen-objects"])
        .env("PESAO_SIM_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("objects.txt").is_file());
}
