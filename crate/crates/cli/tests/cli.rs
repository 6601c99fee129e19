use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polymul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polymul"))
        .args(args)
        .env_remove("POLYMUL_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Value of a `key=value` report line.
fn value(out: &Output, key: &str) -> Option<String> {
    stderr(out)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn mul_of_two_expressions() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.poly");
    let o = polymul(&[
        "mul", "--expr-a", "(1+x)", "--expr-b", "(1-x)", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&o, "result_terms").as_deref(), Some("2"));
    assert!(value(&o, "time_ms").is_some());
    assert_eq!(fs::read_to_string(&out).unwrap(), "vars x\n1 0\n-1 2\n");
}

#[test]
fn mul_writes_to_stdout_by_default() {
    let o = polymul(&["mul", "--expr-a", "x+y", "--expr-b", "x-y"]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "vars x y\n-1 0 2\n1 2 0\n"
    );
}

#[test]
fn mul_dense_example() {
    let o = polymul(&[
        "mul",
        "--expr-a",
        "(1+x+y+z+t)^8",
        "--expr-b",
        "(1+x+y+z+t)^8+1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&o, "a_terms").as_deref(), Some("495"));
    assert_eq!(value(&o, "result_terms").as_deref(), Some("4845"));
}

#[test]
fn mul_files_and_mismatched_variables() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        path(dir.path(), "a"),
        path(dir.path(), "b"),
        path(dir.path(), "c"),
    );
    fs::write(&a, "vars x y\n1 1 0\n2 0 1\n").unwrap();
    fs::write(&b, "vars x y\n3 0 0\n-1 1 1\n").unwrap();
    fs::write(&c, "vars x z\n1 1 0\n").unwrap();

    let o = polymul(&["mul", "--a", &a, "--b", &b]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "vars x y\n6 0 1\n3 1 0\n-2 1 2\n-1 2 1\n"
    );

    let o = polymul(&["mul", "--a", &a, "--b", &c]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("different variables"), "{}", stderr(&o));

    // a file operand and an expression in its variables
    let o = polymul(&["mul", "--a", &a, "--expr-b", "x-y"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn error_exit_codes() {
    let o = polymul(&["mul", "--expr-a", "(1+x", "--expr-b", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));

    let o = polymul(&["mul", "--a", "/nonexistent/p.poly", "--expr-b", "x"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad");
    fs::write(&bad, "vars x\n1 2 3\n").unwrap();
    let o = polymul(&["mul", "--a", &bad, "--expr-b", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = polymul(&[
        "mul",
        "--expr-a",
        "x^3000000000",
        "--expr-b",
        "x^3000000000",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let big = path(dir.path(), "big");
    fs::write(&big, "vars x\n1 4000000000\n").unwrap();
    let o = polymul(&["mul", "--a", &big, "--b", &big]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("overflow"));
}

#[test]
fn threads_from_environment_and_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_polymul"));
        cmd.args(["mul", "--expr-a", "1+x", "--expr-b", "1+x"]);
        cmd.env_remove("POLYMUL_THREADS");
        if let Some(v) = env {
            cmd.env("POLYMUL_THREADS", v);
        }
        if let Some(v) = flag {
            cmd.args(["--threads", v]);
        }
        value(&cmd.output().unwrap(), "threads").unwrap()
    };
    assert_eq!(run(Some("3"), None), "3");
    assert_eq!(run(Some("3"), Some("2")), "2");
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a"), path(dir.path(), "b"));
    for out in [&a, &b] {
        let o = polymul(&[
            "gen", "--vars", "4", "--terms", "100", "--seed", "7", "--out", out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("vars x1 x2 x3 x4\n"));
    assert!(text.lines().count() > 50);
}

#[test]
fn cluster_with_one_node_matches_mul() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a"), path(dir.path(), "b"));
    polymul(&[
        "gen", "--vars", "3", "--terms", "200", "--seed", "1", "--out", &a,
    ]);
    polymul(&[
        "gen", "--vars", "3", "--terms", "150", "--seed", "2", "--out", &b,
    ]);
    let (m, c) = (path(dir.path(), "m"), path(dir.path(), "c"));
    let o = polymul(&["mul", "--a", &a, "--b", &b, "--out", &m]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = polymul(&["cluster", "--nodes", "1", "--a", &a, "--b", &b, "--out", &c]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&o, "msgs").as_deref(), Some("1"));
    assert_eq!(fs::read(&m).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn cluster_on_example_one() {
    let dir = tempfile::tempdir().unwrap();
    let c = path(dir.path(), "c");
    let o = polymul(&[
        "cluster",
        "--nodes",
        "4",
        "--example",
        "1",
        "--scale",
        "8",
        "--out",
        &c,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&o, "result_terms").as_deref(), Some("4845"));
    assert_eq!(value(&o, "load_bound_ok").as_deref(), Some("true"));
    assert_eq!(value(&o, "msgs").as_deref(), Some("10"));
    let loads: u64 = (0..4)
        .map(|r| {
            value(&o, &format!("node_{r}_ops"))
                .unwrap()
                .parse::<u64>()
                .unwrap()
        })
        .sum();
    assert_eq!(loads, 495 * 495);
}

#[test]
fn bench_small_scale() {
    let o = polymul(&[
        "bench",
        "--example",
        "1",
        "--scale",
        "4",
        "--merger",
        "both",
        "--threads-list",
        "1,2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert_eq!(err.matches("result_terms=495 ").count(), 4, "{err}");
    assert_eq!(value(&o, "verified").as_deref(), Some("naive"));

    let o = polymul(&[
        "bench",
        "--example",
        "2",
        "--scale",
        "3",
        "--count-only",
        "--coeff",
        "f64",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn tune_prints_histogram() {
    let o = polymul(&[
        "tune",
        "--products",
        "3",
        "--min-terms",
        "50",
        "--max-terms",
        "120",
        "--l-values",
        "2,4,8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("l=")).count(),
        3,
        "{stdout}"
    );
    let l: usize = value(&o, "recommended_l").unwrap().parse().unwrap();
    assert!([2, 4, 8].contains(&l));
}
