use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loccert::treedepth::{is_valid_model, load_model};
use loccert::{load_graph, Graph};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loccert")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).expect("utf-8")
}

fn save(dir: &TempDir, name: &str, g: &Graph) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, g.to_edge_list()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn td_prints_optimal_model_for_p7() {
    let dir = TempDir::new().unwrap();
    let p7 = save(&dir, "p7.g", &Graph::path(7));
    let out = stdout(&["td", "--graph", s(&p7)]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("treedepth 2"));
    let m = load_model(&lines.collect::<Vec<_>>().join("\n")).unwrap();
    assert!(is_valid_model(&Graph::path(7), &m, 2).unwrap());

    let mpath = dir.path().join("p7.m");
    std::fs::write(&mpath, m.to_text()).unwrap();
    assert_eq!(code(&["td", "--graph", s(&p7), "--model", s(&mpath), "--t", "2"]), 0);
    assert_eq!(code(&["td", "--graph", s(&p7), "--model", s(&mpath), "--t", "1"]), 1);
}

#[test]
fn equivalence_exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = save(&dir, "star5.g", &Graph::star(5));
    let b = save(&dir, "star2.g", &Graph::star(2));
    assert_eq!(code(&["equiv", "--g", s(&a), "--h", s(&b), "--k", "2"]), 0);
    assert_eq!(code(&["equiv", "--g", s(&a), "--h", s(&b), "--k", "3"]), 1);
    assert_eq!(code(&["equiv", "--g", s(&a), "--h", s(&b), "--k", "3", "--budget", "1"]), 3);
}

#[test]
fn certify_then_verify_round_trips_for_every_scheme() {
    let dir = TempDir::new().unwrap();
    let g = Graph::complete(4);
    let path = save(&dir, "k4.g", &g);
    let runs: [&[&str]; 7] = [
        &["--scheme", "st"],
        &["--scheme", "count", "--expected", "4"],
        &["--scheme", "efo", "--formula", "exists x exists y exists z (x ~ y & y ~ z & x ~ z)"],
        &["--scheme", "fo2", "--formula", "forall x forall y (x = y | x ~ y)"],
        &["--scheme", "td", "--t", "3"],
        &["--scheme", "kernel", "--t", "3", "--k", "2"],
        &["--scheme", "fo-td", "--t", "3", "--formula", "forall x exists y x ~ y"],
    ];
    for (i, flags) in runs.iter().enumerate() {
        let certs = dir.path().join(format!("{i}.json"));
        let mut args = vec!["certify", "--graph", s(&path), "--out", s(&certs)];
        args.extend_from_slice(flags);
        assert_eq!(code(&args), 0, "{flags:?}");
        let mut args = vec!["verify", "--graph", s(&path), "--certs", s(&certs)];
        args.extend_from_slice(flags);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{flags:?}");
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "accept");
    }
}

#[test]
fn verify_rejects_certificates_for_a_different_claim() {
    let dir = TempDir::new().unwrap();
    let p7 = save(&dir, "p7.g", &Graph::path(7));
    let certs = dir.path().join("p7.certs");
    assert_eq!(code(&["certify", "--scheme", "td", "--t", "2", "--graph", s(&p7), "--out", s(&certs)]), 0);
    assert_eq!(code(&["verify", "--scheme", "td", "--t", "2", "--graph", s(&p7), "--certs", s(&certs)]), 0);
    let out = stdout(&["verify", "--scheme", "td", "--t", "1", "--graph", s(&p7), "--certs", s(&certs)]);
    assert!(out.starts_with("reject"), "{out}");
}

#[test]
fn usage_and_no_instance_codes() {
    let dir = TempDir::new().unwrap();
    let c5 = save(&dir, "c5.g", &Graph::cycle(5));
    assert_eq!(code(&["certify", "--scheme", "td", "--graph", s(&c5)]), 2);
    assert_eq!(code(&["certify", "--scheme", "td", "--t", "1", "--graph", s(&c5)]), 3);
    assert_eq!(code(&["eval", "--graph", s(&c5), "--formula", "exists x"]), 2);
    assert_eq!(code(&["eval", "--graph", "/nonexistent", "--formula", "true"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["eval", "--graph", s(&c5), "--formula", "forall x exists y x ~ y"]), 0);
    assert_eq!(code(&["eval", "--graph", s(&c5), "--formula", "exists x exists y exists z (x ~ y & y ~ z & x ~ z)"]), 1);
}

#[test]
fn fuzz_finds_no_escapes_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let c5 = save(&dir, "c5.g", &Graph::cycle(5));
    let args = ["fuzz", "--scheme", "td", "--t", "1", "--graph", s(&c5), "--mutations", "3000", "--seed", "4"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("escapes 0"));
    assert_eq!(out.stdout, run(&args).stdout);
    // fuzzing a yes-instance is refused
    assert_eq!(code(&["fuzz", "--scheme", "td", "--t", "3", "--graph", s(&c5)]), 2);
}

#[test]
fn gen_and_stats_are_deterministic() {
    let a = stdout(&["gen", "--kind", "td", "--t", "3", "--n", "20", "--seed", "9"]);
    assert_eq!(a, stdout(&["gen", "--kind", "td", "--t", "3", "--n", "20", "--seed", "9"]));
    assert_eq!(load_graph(&a).unwrap().len(), 20);

    let args = ["stats", "--scheme", "kernel", "--n", "7,15", "--t", "1,2", "--k", "1,2", "--seeds", "2", "--seed", "3"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, stdout(&args));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,n,t,k,maxBits,totalBits,verdict,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.starts_with("kernel,") && r.contains(",accept,")));
}

#[test]
fn kernelize_dump_and_kernel_file() {
    let dir = TempDir::new().unwrap();
    let star = save(&dir, "star.g", &Graph::star(5));
    let kernel = dir.path().join("kernel.g");
    let out = stdout(&["kernelize", "--graph", s(&star), "--k", "2", "--kernel-out", s(&kernel)]);
    assert!(out.starts_with("# id depth pruned deleted end-type"));
    assert_eq!(out.lines().filter(|l| l.ends_with(" 1 1 0")).count(), 3);
    let k = load_graph(&std::fs::read_to_string(&kernel).unwrap()).unwrap();
    assert_eq!(k.len(), 3);
}
