use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn tvpolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvpolar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn project_hexagon_corner() {
    let hex = data("hexagon.txt");
    let out = tvpolar(&["project", path(&hex), "2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "value 2; face: (1,1) (2,0); unique: false\n");
}

#[test]
fn project_accepts_negative_and_comma_separated_coordinates() {
    let hex = data("hexagon.txt");
    let a = tvpolar(&["project", path(&hex), "-2", "-2"]);
    assert_eq!(stdout(&a), "value 2; face: (-2,0) (-1,-1); unique: false\n");
    let b = tvpolar(&["project", path(&hex), "0.3,-0.1"]);
    assert_eq!(stdout(&b), "value 0; face: (0.3,-0.1); unique: true\n");
}

#[test]
fn check_uniqueness_exit_codes() {
    let hex = tvpolar(&["check-uniqueness", path(&data("hexagon.txt"))]);
    assert_eq!(hex.status.code(), Some(2));
    let triples = stdout(&hex);
    assert_eq!(triples.lines().count(), 8);
    assert!(triples.contains("((0.5,0.5), [(0.5,0.5), (0,1)])"));

    let l1 = tvpolar(&["check-uniqueness", path(&data("l1ball.txt"))]);
    assert_eq!(l1.status.code(), Some(0));
    assert!(stdout(&l1).contains("empty"));
}

#[test]
fn witness_on_hexagon() {
    let out = tvpolar(&["witness", path(&data("hexagon.txt"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("x0 (2,2)\nw1 (1,1)\nw2 (2,0)\n"), "{text}");
    assert!(text.contains("r 2\n"));

    let none = tvpolar(&["witness", path(&data("l1ball.txt"))]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn malformed_input_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "# comment\n2 3\n0 1\n0.5 x\n0.5 -0.5\n").unwrap();
    let out = tvpolar(&["project", path(&bad), "1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("bad.txt: line 4"), "{msg}");

    let img = dir.path().join("short.txt");
    std::fs::write(&img, "3\n1 2 3\n4 5\n").unwrap();
    let out = tvpolar(&["decompose", path(&img)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("short.txt: line 3"), "{}", stderr(&out));

    let missing = tvpolar(&["check-uniqueness", path(&dir.path().join("missing.txt"))]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("missing.txt"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(tvpolar(&["bogus"]).status.code(), Some(1));
    assert_eq!(tvpolar(&["project"]).status.code(), Some(1));
    assert_eq!(tvpolar(&["--help"]).status.code(), Some(0));
}

#[test]
fn decompose_writes_u_plus_v_equal_to_f() {
    let dir = tempfile::tempdir().unwrap();
    let (u, v) = (dir.path().join("u.txt"), dir.path().join("v.txt"));
    let out = tvpolar(&[
        "decompose",
        path(&data("image3.txt")),
        "--iters",
        "2000",
        "--seed",
        "3",
        "--out-u",
        path(&u),
        "--out-v",
        path(&v),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let u = tvpolar::io::read_image(&u).unwrap();
    let v = tvpolar::io::read_image(&v).unwrap();
    let f = tvpolar::io::read_image(data("image3.txt")).unwrap();
    assert!(u.add(&v).distance(&f) < 1e-12);
    // v is a divergence, hence mean-zero
    assert!(v.sum().abs() < 1e-12);
}

#[test]
fn experiment_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let file = dir.path().join(name);
        let out = tvpolar(&[
            "experiment",
            "--n",
            "4",
            "--starts",
            "3",
            "--iters",
            "300",
            "--experiments",
            "2",
            "--seed",
            "11",
            "--omit-timing",
            "--out",
            path(&file),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read(&file).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,diameter,best_value,wall_ms");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,") && lines[1].ends_with(",0"));
}

#[test]
fn experiment_rejects_bad_config() {
    let out = tvpolar(&["experiment", "--starts", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = tvpolar(&["experiment", "--margin", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_subcommands_agree_with_exact_solvers() {
    let out = tvpolar(&["oracle", "clamp", "2", "-0.5", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("exact point (1,-0.5,0.3)"));
    let out = tvpolar(&["oracle", "project", path(&data("hexagon.txt")), "2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("exact value 2e0"));
}
