use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ocm_core::io::write_edge_list;
use ocm_core::oracle::{dp_min_cycle_mean, enumerate_max_cycle_mean};
use ocm_core::{Graph, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ocm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocm"))
        .args(args)
        .output()
        .expect("run ocm")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "ocm failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph<Rational> {
    let n = rng.gen_range(2..=8);
    let mut edges: Vec<_> = (0..n)
        .map(|v| {
            (
                v,
                (v + 1) % n,
                Rational::from_integer(rng.gen_range(-9..=9)),
            )
        })
        .collect();
    for _ in 0..n {
        edges.push((
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            Rational::from_integer(rng.gen_range(-9..=9)),
        ));
    }
    Graph::from_edges(n, &edges).unwrap()
}

#[test]
fn two_cycle_and_dag() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.gr", "p ocm 2 2\na 1 2 2\na 2 1 4\n");
    let text = stdout(&ocm(&[
        "solve",
        two.to_str().unwrap(),
        "--algo",
        "howard",
        "--cycle",
    ]));
    assert_eq!(field(&text, "mu_star"), Some("3"));
    assert_eq!(field(&text, "cycle"), Some("0 1"));

    let dag = write(dir.path(), "dag.txt", "0 1 1\n1 2 -4\n");
    let out = ocm(&["solve", dag.to_str().unwrap()]);
    assert!(stdout(&out).starts_with("no cycle\n"));
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.gr", "p ocm 2 1\n\na 1 3 5\n");
    let out = ocm(&["solve", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let two = write(dir.path(), "two.txt", "0 1 2\n1 0 4\n");
    let out = ocm(&[
        "solve",
        two.to_str().unwrap(),
        "--algo",
        "lawler",
        "--epsilon",
        "-1",
    ]);
    assert!(!out.status.success());
    let out = ocm(&["solve", dir.path().join("missing").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn objective_max_on_negated_file_is_negated_min() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..20 {
        let g = random_graph(&mut rng);
        let plain = write(dir.path(), &format!("g{i}.txt"), &write_edge_list(&g, &[]));
        let neg = write(
            dir.path(),
            &format!("n{i}.txt"),
            &write_edge_list(&g.negate_weights(), &[]),
        );
        let min = stdout(&ocm(&["solve", plain.to_str().unwrap()]));
        let max = stdout(&ocm(&[
            "solve",
            neg.to_str().unwrap(),
            "--objective",
            "max",
            "--algo",
            "howard-par",
        ]));
        let min: Rational = field(&min, "mu_star").unwrap().parse().unwrap();
        let max: Rational = field(&max, "mu_star").unwrap().parse().unwrap();
        assert_eq!(max, -min);
        assert_eq!(Some(min), dp_min_cycle_mean(&g).unwrap());
    }
}

#[test]
fn json_and_text_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = random_graph(&mut rng);
    let f = write(dir.path(), "g.txt", &write_edge_list(&g, &[]));
    for algo in [
        "howard",
        "howard-par",
        "lawler",
        "tree",
        "oracle-enum",
        "oracle-dp",
    ] {
        let text = stdout(&ocm(&["solve", f.to_str().unwrap(), "--algo", algo]));
        let json: serde_json::Value = serde_json::from_str(&stdout(&ocm(&[
            "solve",
            f.to_str().unwrap(),
            "--algo",
            algo,
            "--json",
        ])))
        .unwrap();
        assert_eq!(json["mu_star"].as_str(), field(&text, "mu_star"), "{algo}");
        assert_eq!(json["scalar"], "exact");
        assert!(json.get("wall_ms").is_none());
    }
}

#[test]
fn decimal_weights_use_floats() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "0 1 0.5\n1 0 1.25\n");
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&ocm(&["solve", f.to_str().unwrap(), "--json"]))).unwrap();
    assert_eq!(json["scalar"], "f64");
    assert_eq!(json["mu_star"], "0.875");
    let text = stdout(&ocm(&["solve", f.to_str().unwrap(), "--scalar", "f32"]));
    assert_eq!(field(&text, "mu_star"), Some("0.875"));
}

#[test]
fn gen_is_reproducible_and_solvable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        stdout(&ocm(&[
            "gen",
            "--template",
            "server",
            "--clients",
            "1,1",
            "--out",
            p.to_str().unwrap(),
        ]));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# template server"));

    // The header marks the model for maximization.
    let g: Graph<Rational> = ocm_core::io::parse_graph(&text)
        .unwrap()
        .to_graph()
        .unwrap();
    let out = stdout(&ocm(&["solve", a.to_str().unwrap()]));
    let got: Rational = field(&out, "mu_star").unwrap().parse().unwrap();
    assert_eq!(Some(got), enumerate_max_cycle_mean(&g).unwrap());
}

#[test]
fn gen_scales_to_a_minimum_size() {
    let out = stdout(&ocm(&[
        "gen",
        "--template",
        "server-free",
        "--min-vertices",
        "100",
    ]));
    let header = out.lines().find(|l| l.starts_with("# vertices")).unwrap();
    let n: usize = header.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(n >= 100);
    assert!(out.contains("clients 4,0"));
}

#[test]
fn bench_sweep_rows() {
    let args = [
        "bench",
        "--sweep",
        "1,1",
        "--sweep",
        "2,0",
        "--sweep",
        "2,1",
        "--algo",
        "howard,howard-par,tree",
        "--repeat",
        "3",
    ];
    let csv = stdout(&ocm(&args));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(ocm_cli::bench::CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    for graph in rows.chunks(3) {
        assert!(graph
            .iter()
            .all(|r| r.len() == 10 && r[0] == graph[0][0] && r[5] == graph[0][5]));
        let (n, m, nm): (u128, u128, u128) = (
            graph[0][1].parse().unwrap(),
            graph[0][2].parse().unwrap(),
            graph[0][3].parse().unwrap(),
        );
        assert_eq!(n * m, nm);
    }
}
