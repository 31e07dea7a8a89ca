//! End-to-end runs of the `oriented-embed` binary: exit codes, round trips
//! and byte-identical output for equal seeds.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oriented_embed::oracle::verify_embedding;
use oriented_embed::{Digraph, Embedding, OrientedTree, Phase};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oriented-embed"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn host(dir: &Path, n: usize, alpha: &str, seed: &str, name: &str) -> PathBuf {
    ok(
        dir,
        &[
            "gen",
            "digraph",
            "--n",
            &n.to_string(),
            "--alpha",
            alpha,
            "--density",
            "0.8",
            "--seed",
            seed,
            "-o",
            name,
        ],
    );
    dir.join(name)
}

#[test]
fn generated_host_meets_its_semidegree() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "gen", "digraph", "--n", "500", "--alpha", "0.25", "--seed", "1", "-o", "d.txt",
        ],
    );
    let d = Digraph::from_text(&read(dir.path(), "d.txt")).unwrap();
    assert_eq!(d.n(), 500);
    assert!(d.min_semidegree() >= 375);
}

#[test]
fn path_family_is_a_hamilton_path() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["gen", "tree", "--n", "500", "--family", "path", "-o", "t.txt"],
    );
    let tree = OrientedTree::from_text(&read(dir.path(), "t.txt")).unwrap();
    assert_eq!(tree.n(), 500);
    assert!((0..500).all(|u| tree.neighbors(u).len() <= 2));
}

#[test]
fn spanning_embedding_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    host(p, 120, "0.2", "7", "d.txt");
    ok(p, &["gen", "tree", "--n", "120", "--seed", "8", "-o", "t.txt"]);
    ok(p, &["embed", "d.txt", "t.txt", "--seed", "9", "-o", "e.json"]);
    let d = Digraph::from_text(&read(p, "d.txt")).unwrap();
    let tree = OrientedTree::from_text(&read(p, "t.txt")).unwrap();
    let emb = Embedding::from_json(&read(p, "e.json")).unwrap();
    assert!(verify_embedding(&d, &tree, &emb));
    let out = ok(p, &["verify", "d.txt", "t.txt", "e.json"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "verified");
}

#[test]
fn reversed_path_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("d.txt"), "digraph 3\n0 1\n1 2\n").unwrap();
    std::fs::write(p.join("t.txt"), "tree 3\n0 1\n1 2\n").unwrap();
    let mut emb = Embedding::new(3, 3);
    for (u, x) in [(0, 2), (1, 1), (2, 0)] {
        emb.assign(u, x, Phase::Spanning);
    }
    std::fs::write(p.join("bad.json"), emb.to_json()).unwrap();
    let out = run(p, &["verify", "d.txt", "t.txt", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "invalid");
}

#[test]
fn usage_and_format_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    host(p, 30, "0.2", "1", "d.txt");
    ok(p, &["gen", "tree", "--n", "40", "-o", "big.txt"]);
    let big = run(p, &["embed", "d.txt", "big.txt", "--seed", "1"]);
    assert_eq!(big.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&big.stderr).contains("40"));
    std::fs::write(p.join("junk.txt"), "digraph 3\n0 zero\n").unwrap();
    assert_eq!(
        run(p, &["verify", "junk.txt", "big.txt", "none.json"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(p, &["embed", "d.txt", "big.txt"]).status.code(),
        Some(1),
        "missing --seed"
    );
    assert_eq!(
        run(p, &["embed", "d.txt", "big.txt", "--seed", "1", "--param", "bogus=1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn phases_run_in_isolation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    host(p, 200, "0.3", "5", "d.txt");
    ok(p, &["gen", "tree", "--n", "150", "--seed", "6", "-o", "t.txt"]);
    let dec = ok(p, &["embed", "d.txt", "t.txt", "--seed", "1", "--phase", "decompose"]);
    let json: serde_json::Value = serde_json::from_slice(&dec.stdout).unwrap();
    assert!(json.get("t0").is_some());
    for phase in ["stars", "absorber", "almost"] {
        let out = run(
            p,
            &[
                "embed", "d.txt", "t.txt", "--seed", "2", "--phase", phase, "--eps", "0.2",
            ],
        );
        assert!(matches!(out.status.code(), Some(0 | 2)), "{phase}");
        if out.status.success() {
            Embedding::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
        }
    }
}

#[test]
fn equal_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("grid.conf"),
        "trials = 3\n[a]\ntarget = almost\nn = 60\nalpha = 0.2\nparam.eps = 0.2\n",
    )
    .unwrap();
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            let d = ok(
                p,
                &[
                    "gen",
                    "digraph",
                    "--n",
                    "80",
                    "--alpha",
                    "0.15",
                    "--density",
                    "0.7",
                    "--seed",
                    "3",
                ],
            )
            .stdout;
            let t = ok(
                p,
                &["gen", "tree", "--n", "80", "--family", "caterpillar", "--seed", "3"],
            )
            .stdout;
            std::fs::write(p.join("d.txt"), &d).unwrap();
            std::fs::write(p.join("t.txt"), &t).unwrap();
            let e = run(p, &["embed", "d.txt", "t.txt", "--seed", "4"]).stdout;
            let x = ok(p, &["experiment", "grid.conf", "--seed", "5", "--jobs", "3"]).stdout;
            vec![d, t, e, x]
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn empty_grid_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.conf"), "# nothing\n").unwrap();
    let out = ok(dir.path(), &["experiment", "empty.conf", "--seed", "1"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn unknown_target_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.conf"), "[x]\ntarget = nonsense\n").unwrap();
    assert_eq!(
        run(dir.path(), &["experiment", "bad.conf", "--seed", "1"])
            .status
            .code(),
        Some(1)
    );
}
