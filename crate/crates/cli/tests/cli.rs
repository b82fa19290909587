use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multicross::cra::{fixtures, type_graph};
use multicross::graph::{check_multiplicities, isomorphic_over_problem, parse_instance};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn scratch(test: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multicross-cli-{}-{test}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn multicross(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multicross")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_feasible_fixture() {
    let o =
        multicross(&["validate", "--typegraph", &fixture("cra.typegraph"), "--instance", &fixture("fig2_g.instance")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0 violations");
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = scratch("violations");
    let bad = dir.join("bad.instance");
    std::fs::write(&bad, "instance v1 typegraph=cra.typegraph\nnode 1 0\nnode 9 1\n").unwrap();
    let o = multicross(&["validate", "--typegraph", &fixture("cra.typegraph"), "--instance", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).ends_with("2 violations\n"), "{}", stdout(&o));
}

#[test]
fn malformed_input_exits_2() {
    let dir = scratch("malformed");
    let bad = dir.join("bad.instance");
    std::fs::write(&bad, "instance v1 typegraph=cra.typegraph\nnode x 0\n").unwrap();
    let o = multicross(&["validate", "--typegraph", &fixture("cra.typegraph"), "--instance", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&multicross(&["validate", "--typegraph", &fixture("cra.typegraph")])), 2);
    assert_eq!(code(&multicross(&["bench", "--frobnicate"])), 2);
    assert_eq!(code(&multicross(&["bench", "--arms", "nonsense"])), 2);
}

#[test]
fn secure_crossover_reproduces_worked_example() {
    let dir = scratch("secure");
    let out = dir.join("o.instance");
    let o = multicross(&[
        "crossover",
        "--operator",
        "secure",
        "--g",
        &fixture("fig2_g.instance"),
        "--h",
        &fixture("fig2_h.instance"),
        "--trace",
        &fixture("example4.trace"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = parse_instance(&std::fs::read_to_string(&out).unwrap()).unwrap().graph;
    let fx = fixtures();
    assert!(isomorphic_over_problem(&g, &fx.g1h2, &fx.tg));
    assert!(stdout(&o).contains("0 violations"));
    let v = multicross(&["validate", "--typegraph", &fixture("cra.typegraph"), "--instance", out.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
}

#[test]
fn generic_offspring_revalidate_as_reported() {
    let dir = scratch("generic");
    let (o1, o2) = (dir.join("o1.instance"), dir.join("o2.instance"));
    let o = multicross(&[
        "crossover",
        "--operator",
        "generic",
        "--g",
        &fixture("fig2_g.instance"),
        "--h",
        &fixture("fig2_h.instance"),
        "--trace",
        &fixture("example2.trace"),
        "--out",
        o1.to_str().unwrap(),
        "--out2",
        o2.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for (path, line) in [(&o1, "offspring:"), (&o2, "offspring2:")] {
        let g = parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap().graph;
        let n = check_multiplicities(&g, &type_graph()).unwrap().len();
        let reported = text.lines().find(|l| l.starts_with(line)).unwrap();
        assert!(reported.ends_with(&format!("{n} violations")), "{reported}");
        let v =
            multicross(&["validate", "--typegraph", &fixture("cra.typegraph"), "--instance", path.to_str().unwrap()]);
        assert_eq!(code(&v), if n == 0 { 0 } else { 1 });
    }
    assert!(text.contains("offspring2: 6 nodes, 5 edges, 2 violations"));
}

#[test]
fn recorded_trace_replays() {
    let dir = scratch("replay");
    let (out, trace, again) = (dir.join("o.instance"), dir.join("o.trace"), dir.join("r.instance"));
    let g = fixture("fig2_g.instance");
    let h = fixture("fig2_h.instance");
    let o = multicross(&[
        "crossover",
        "--g",
        &g,
        "--h",
        &h,
        "--seed",
        "41",
        "--out",
        out.to_str().unwrap(),
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = multicross(&[
        "replay",
        "--g",
        &g,
        "--h",
        &h,
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn diverging_replay_exits_3() {
    let dir = scratch("diverge");
    let trace = dir.join("bad.trace");
    std::fs::write(&trace, "decision cp.node:99 1\n").unwrap();
    let o = multicross(&[
        "replay",
        "--g",
        &fixture("fig2_g.instance"),
        "--h",
        &fixture("fig2_h.instance"),
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        dir.join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn different_problem_graphs_exit_3() {
    let dir = scratch("mismatch");
    let other = dir.join("other.instance");
    std::fs::write(&other, "instance v1 typegraph=cra.typegraph\nnode 1 0\n").unwrap();
    let o = multicross(&[
        "crossover",
        "--g",
        &fixture("fig2_g.instance"),
        "--h",
        other.to_str().unwrap(),
        "--typegraph",
        &fixture("cra.typegraph"),
        "--out",
        dir.join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn ea_writes_history_csv() {
    let dir = scratch("ea");
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        "[problem]\nfeatures = 10\nseed = 1\n\n[ea]\npopulation_size = 6\ngenerations = 3\noperator = \"generic-discard\"\n",
    )
    .unwrap();
    let o = multicross(&["ea", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("generation,best,mean,feasible_fraction,xover_feasible_rate,discards"));
    assert_eq!(lines.count(), 4);

    std::fs::write(&config, "[ea]\npopulaton_size = 6\n").unwrap();
    assert_eq!(code(&multicross(&["ea", "--config", config.to_str().unwrap()])), 2);
    std::fs::write(&config, "[ea]\npopulation_size = 1\n").unwrap();
    assert_eq!(code(&multicross(&["ea", "--config", config.to_str().unwrap()])), 2);
}

#[test]
fn ea_reads_seed_instance_relative_to_config() {
    let dir = scratch("ea-instance");
    std::fs::copy(fixture("fig2_g.instance"), dir.join("g.instance")).unwrap();
    let config = dir.join("run.toml");
    std::fs::write(&config, "[problem]\ninstance = \"g.instance\"\n\n[ea]\npopulation_size = 4\ngenerations = 2\n")
        .unwrap();
    let out = dir.join("history.csv");
    let o = multicross(&["ea", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
    assert!(stdout(&o).starts_with("best fitness"));
}

#[test]
fn bench_prints_comparison_table() {
    let o = multicross(&["bench", "--arms", "secure,generic", "--trials", "30"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("feasible_rate"));
    assert!(rows[1].starts_with("secure") && rows[1].contains("1.0000"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("us_per_crossover"));
}
