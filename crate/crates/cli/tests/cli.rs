use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn reprel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reprel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn abstract_prints_pickup_templates() {
    let o = reprel(&["abstract", p(&data("taxi.dfoci")), "pickup"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for t in ["at(P,L)", "in-taxi(P)", "taxi-at(L)", "wall(L,D)"] {
        assert!(out.lines().any(|l| l.trim() == t), "missing {t} in\n{out}");
    }
    assert!(!out.contains("dest("));
}

#[test]
fn abstract_depth_zero_has_no_templates() {
    let full = stdout(&reprel(&["abstract", p(&data("taxi.dfoci")), "pickup"]));
    let o = reprel(&["abstract", p(&data("taxi.dfoci")), "pickup", "--depth", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for t in ["at(P,L)", "in-taxi(P)", "taxi-at(L)", "wall(L,D)"] {
        assert!(!out.lines().any(|l| l.trim() == t), "{out}");
    }
    assert!(out.lines().count() < full.lines().count());
}

#[test]
fn unknown_subtask_exits_2() {
    let o = reprel(&["abstract", p(&data("taxi.dfoci")), "refuel"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refuel"));
}

#[test]
fn unparsable_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dfoci");
    std::fs::write(&bad, "predicate at/2\n{at(P) A} -> R\n").unwrap();
    assert_eq!(reprel(&["abstract", p(&bad), "pickup"]).status.code(), Some(1));
    assert_eq!(reprel(&["abstract", "/nonexistent.dfoci", "pickup"]).status.code(), Some(1));
    assert_eq!(reprel(&["verify", "/nonexistent.manifest"]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    let ok = reprel(&["verify", p(&data("verify.manifest"))]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).ends_with("result pass\n"));

    let loose = reprel(&["verify", p(&data("verify.manifest")), "--tol", "1e-2"]);
    assert_eq!(loose.status.code(), Some(0));

    let bad = reprel(&["verify", p(&data("verify-corrupt.manifest"))]);
    assert_eq!(bad.status.code(), Some(3));
    let out = stdout(&bad);
    assert!(out.contains("witness"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("equivalence phase=drop(p1)") && l.ends_with("FAIL")));
    assert!(out.ends_with("result FAIL\n"));
}

#[test]
fn plan_lists_steps() {
    let o = reprel(&["plan", p(&data("taxi.ops")), p(&data("task2.inst")), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let steps: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert!(steps.len() <= 4 && steps.len().is_multiple_of(2), "{steps:?}");
    for s in &steps {
        assert!(s.starts_with("pickup(") || s.starts_with("drop("), "{s}");
    }
}

fn small_manifest(dir: &Path) -> PathBuf {
    let m = dir.join("small.manifest");
    let text = format!(
        "dfoci = {}\noperators = {}\ninstance = {}\nvariants = reprel, hrl\nseeds = 0..2\n\
         alpha = 0.5\nepsilon_decay_steps = 1000\ntotal_env_steps = 2000\neval_every = 500\n\
         eval_episodes = 3\nout = out\n",
        p(&data("taxi.dfoci")),
        p(&data("taxi.ops")),
        p(&data("verify3x3.inst"))
    );
    std::fs::write(&m, text).unwrap();
    m
}

fn grid(csv: &str) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.split(',').next().unwrap().to_owned()).collect()
}

#[test]
fn train_then_transfer() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path());
    let o = reprel(&["train", p(&m)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let a = std::fs::read_to_string(out.join("reprel_verify3x3.csv")).unwrap();
    let b = std::fs::read_to_string(out.join("hrl_verify3x3.csv")).unwrap();
    assert!(a.starts_with("env_steps,mean_reward,std_reward,seeds\n"));
    assert_eq!(grid(&a), grid(&b));
    assert_eq!(grid(&a), ["0", "500", "1000", "1500", "2000"]);
    let summary = std::fs::read_to_string(out.join("summary_verify3x3.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
    assert!(out.join("tables/reprel/seed1/pickup.q").is_file());

    let again = dir.path().join("again");
    let o = reprel(&["train", p(&m), "--sequential", "--out", p(&again)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(again.join("reprel_verify3x3.csv")).unwrap(), a);

    let t = dir.path().join("t");
    let o = reprel(&["transfer", p(&m), "--load", p(&out.join("tables")), "--out", p(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(t.join("reprel+T_verify3x3.csv").is_file());
    assert!(t.join("hrl+T_verify3x3.csv").is_file());
    assert!(stdout(&o).contains("reprel+T"));
}

#[test]
fn transfer_requires_tables() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path());
    assert_eq!(reprel(&["transfer", p(&m)]).status.code(), Some(1));
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = reprel(&["transfer", p(&m), "--load", p(&empty)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists(), "partial outputs left behind");
}

#[test]
fn single_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path());
    let o = reprel(&["train", p(&m), "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("out/summary_verify3x3.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.split(',').nth(2) == Some("4")), "{summary}");
}
