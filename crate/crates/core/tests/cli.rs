use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bouquets"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn diamond_file(dir: &Path) -> PathBuf {
    // A=10, B=20, C=30, D=40 with SNAP-style comments.
    write(dir, "diamond.txt", "# toy graph\n10 20\n10\t30\n20 30\n20 40\n30 40\n")
}

#[test]
fn exact_triangle() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "triangle.txt", "0 1\n1 2\n2 0\n");
    let out = run(&["exact", "--graph", g.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "0\t1\t0.666667\n0\t2\t0.666667\n1\t2\t0.666667\n");
}

#[test]
fn exact_uses_input_ids_in_ascending_order() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.txt", "9 3\n3 7\n7 9\n7 100\n");
    let out = run(&["exact", "--graph", g.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let pairs: Vec<(u64, u64)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(f.len(), 3);
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(pairs, vec![(3, 7), (3, 9), (7, 9), (7, 100)]);
    assert!(text.ends_with("7\t100\t1\n"));
}

fn aesc_outputs(dir: &Path, graph: &Path, extra: &[&str], threads: &[&str]) -> Vec<Vec<u8>> {
    threads
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.join(format!("out{i}.tsv"));
            let mut args = vec!["aesc", "--graph", graph.to_str().unwrap(), "--threads", t, "--out", path.to_str().unwrap()];
            args.extend_from_slice(extra);
            let out = run(&args);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            fs::read(&path).unwrap()
        })
        .collect()
}

#[test]
fn aesc_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let outputs = aesc_outputs(dir.path(), &g, &["--epsilon", "0.01", "--seed", "42"], &["1", "1"]);
    assert_eq!(outputs[0].iter().filter(|&&b| b == b'\n').count(), 5);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn aesc_with_walks_is_byte_identical_across_threads() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let extra = ["--epsilon", "0.2", "--seed", "42", "--max-depth", "2"];
    let outputs = aesc_outputs(dir.path(), &g, &extra, &["1", "2", "4", "8", "8"]);
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn aesc_writes_metadata_to_stderr_only() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let out = run(&["aesc", "--graph", g.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.split('\t').count() == 3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("config:"));
    assert!(stderr.contains("4 vertices, 5 edges"));
}

#[test]
fn rng_dump_byte_count() {
    let out = run(&["rng-dump", "--selector", "scaled", "--walks", "100", "--length", "5", "--seed", "7"]);
    assert!(out.status.success());
    assert_eq!(out.stdout.len(), 100 * 4 * 4);
    let again = run(&["rng-dump", "--selector", "scaled", "--walks", "100", "--length", "5", "--seed", "7"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn rng_dump_on_a_graph_covers_every_vertex() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let out = run(&["rng-dump", "--graph", g.to_str().unwrap(), "--walks", "3", "--length", "4", "--selector", "xor"]);
    assert!(out.status.success());
    assert_eq!(out.stdout.len(), 4 * 3 * 3 * 4);
    let one = run(&["rng-dump", "--graph", g.to_str().unwrap(), "--walks", "3", "--length", "4", "--start", "40"]);
    assert_eq!(one.stdout.len(), 3 * 3 * 4);
}

#[test]
fn rng_dump_survives_a_closed_pipe() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = bin()
        .args(["rng-dump", "--walks", "2000000", "--length", "16"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut buf = [0u8; 4096];
    child.stdout.as_mut().unwrap().read_exact(&mut buf).unwrap();
    drop(child.stdout.take());
    let status = child.wait().unwrap();
    assert!(status.success(), "{status:?}");
}

#[test]
fn help_documents_every_flag() {
    let expect: &[(&str, &[&str])] = &[
        (
            "aesc",
            &["--graph", "--epsilon", "--delta", "--omega", "--gamma", "--mode", "--threads", "--seed", "--out", "--lanes"],
        ),
        ("exact", &["--graph", "--out"]),
        (
            "bench",
            &[
                "--graph", "--walks", "--length", "--mode", "--threads", "--lanes", "--seed", "--experiment", "--reps", "--report",
            ],
        ),
        ("rng-dump", &["--selector", "--walks", "--length", "--seed", "--graph"]),
        ("stats", &["--graph"]),
    ];
    for (cmd, flags) in expect {
        let out = run(&[cmd, "--help"]);
        assert!(out.status.success(), "{cmd}");
        let text = String::from_utf8(out.stdout).unwrap();
        for f in *flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["aesc", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["aesc", "--graph", "x", "--mode", "simd"]).status.code(), Some(1));
    assert_eq!(run(&["aesc", "--graph", "x", "--epsilon", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["exact", "--graph", "/nonexistent/graph.txt"]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let disconnected = write(dir.path(), "d.txt", "0 1\n2 3\n");
    let out = run(&["exact", "--graph", disconnected.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disconnected"));
    let garbage = write(dir.path(), "bad.txt", "0 1\n1 two\n");
    let out = run(&["aesc", "--graph", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn bench_emits_result_lines_and_report() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let report = dir.path().join("report.txt");
    let out = run(&[
        "bench",
        "--graph",
        g.to_str().unwrap(),
        "--walks",
        "64",
        "--length",
        "5",
        "--mode",
        "naive,saba",
        "--threads",
        "1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().filter(|l| l.starts_with("RESULT ")).collect();
    assert_eq!(rows.len(), 2);
    for key in [
        "graph=diamond", "mode=", "K=64", "L=5", "eps=", "threads=1", "seconds_median=", "steps_per_sec=",
        "speedup_vs_naive=", "branch_p1=", "branch_p10=", "branch_p25=", "branch_mean=", "distinct_proxy=",
    ] {
        assert!(rows.iter().all(|r| r.contains(key)), "missing {key}");
    }
    assert!(rows[0].contains("speedup_vs_naive=1.0000"));
    let file = fs::read_to_string(report).unwrap();
    assert_eq!(file.lines().count(), 2);
}

#[test]
fn bench_aesc_experiment() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let out = run(&[
        "bench", "--graph", g.to_str().unwrap(), "--experiment", "aesc", "--epsilon", "0.05,0.01", "--mode", "hash,saba",
        "--threads", "1,2",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("RESULT ")).count(), 8);
}

#[test]
fn stats_reports_graph_and_branching() {
    let dir = TempDir::new().unwrap();
    let g = diamond_file(dir.path());
    let out = run(&["stats", "--graph", g.to_str().unwrap(), "--walks", "64"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["vertices\t4", "edges\t5", "components\t1", "bipartite\tfalse", "degree_max\t3", "lambda_hat", "tau", "branch_mean"] {
        assert!(text.contains(key), "missing {key} in {text}");
    }
}

#[test]
fn library_entry_point_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = bouquets::cli::run(["bouquets", "rng-dump", "--walks", "10", "--length", "3"], &mut out, &mut err);
    assert_eq!(code, 0);
    let bin_out = run(&["rng-dump", "--walks", "10", "--length", "3"]);
    assert_eq!(out, bin_out.stdout);
    let code = bouquets::cli::run(["bouquets", "exact"], &mut Vec::new(), &mut err);
    assert_eq!(code, 1);
}
