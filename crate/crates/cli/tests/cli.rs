use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const HENON: &str = r#"
[map]
n = 2
vars = ["x", "y"]
components = ["y", "y^2 - x"]

[inverse]
n = 2
vars = ["x", "y"]
components = ["x^2 - y", "x"]
"#;

const SAME_TWICE: &str = r#"
[f]
n = 2
vars = ["x", "y"]
components = ["y", "y^2 - x"]

[g]
n = 2
vars = ["x", "y"]
components = ["y", "y^2 - x"]
"#;

const A6: &str = r#"
[map]
n = 2
vars = ["x", "y"]
components = ["y", "y^2 - 6*x"]

[inverse]
n = 2
vars = ["x", "y"]
components = ["1/6*x^2 - 1/6*y", "x"]
"#;

fn srpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srpair"))
        .args(args)
        .env_remove("SRPAIR_PREC")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a TSV document as (header → cell) lookups.
fn rows(tsv: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = tsv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split('\t').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split('\t').map(String::from)).collect())
        .collect()
}

fn get<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no column {key}")).1
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = srpair(&["check", s(&file(&dir, "h.toml", HENON))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict = \"strongly-regular\""));
    assert!(stdout(&o).starts_with("seed = 0\n"));

    let o = srpair(&["check", s(&file(&dir, "ff.toml", SAME_TWICE))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failed(joint regularity"));

    let bad = file(&dir, "bad.toml", "[f]\nn = 2\ncomponents = [\"y\", \"y^2 -\"]\n");
    assert_eq!(srpair(&["check", s(&bad)]).status.code(), Some(2));
    let junk = file(&dir, "junk.toml", HENON.replace("y^2 - x", "y^^2").as_str());
    assert_eq!(srpair(&["check", s(&junk)]).status.code(), Some(2));
    assert_eq!(srpair(&["check", "/nonexistent/pair.toml"]).status.code(), Some(2));
    assert_eq!(srpair(&["--tol", "0", "check", s(&dir.path().join("h.toml"))]).status.code(), Some(2));
}

#[test]
fn certificates_and_bad_primes() {
    let dir = TempDir::new().unwrap();
    let o = srpair(&["certificate", s(&file(&dir, "h.toml", HENON))]);
    assert_eq!(o.status.code(), Some(0));
    let doc = stdout(&o);
    assert!(doc.contains("\nm = 2\n"), "{doc}");
    assert!(doc.contains("bad_primes = []"));

    let o = srpair(&["certificate", s(&file(&dir, "a6.toml", A6))]);
    assert_eq!(o.status.code(), Some(0));
    let doc = stdout(&o);
    assert!(doc.contains("prime = 2") && doc.contains("prime = 3"), "{doc}");

    let ff = file(&dir, "ff.toml", SAME_TWICE);
    assert_eq!(srpair(&["certificate", s(&ff)]).status.code(), Some(1));
    assert_eq!(srpair(&["certificate", "--force", s(&ff)]).status.code(), Some(1));
}

#[test]
fn green_at_five_is_log_five() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "h.toml", HENON);
    let o = srpair(&["green", s(&h), "--point", "1/5,2", "--place", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(get(&r[0], "value"), "1.6094379124341003");
    assert_eq!(get(&r[0], "error"), "0");
    assert_eq!(get(&r[0], "bound"), "rigorous");
    assert_eq!(get(&r[0], "exact"), "log 5");
}

#[test]
fn heights_vanish_on_exact_fixed_points() {
    let dir = TempDir::new().unwrap();
    let o = srpair(&["periodic", "--quadratic", "0", "-n", "1", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let fixed: Vec<String> = rows(&stdout(&o))
        .iter()
        .map(|r| get(r, "exact").trim_matches(|c| c == '(' || c == ')').to_string())
        .collect();
    assert_eq!(fixed.len(), 2);
    let pts = file(&dir, "fixed.txt", &fixed.join("\n"));
    let o = srpair(&["height", s(&file(&dir, "h.toml", HENON)), "--points", s(&pts)]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    for row in &r {
        let v: f64 = get(row, "value").parse().unwrap();
        assert!(v.abs() <= 1e-9, "{row:?}");
        assert_eq!(get(row, "status"), "ok");
    }
}

#[test]
fn equidist_counts_on_horseshoe() {
    let o = srpair(&["equidist", "--quadratic", "-6", "--n-list", "3..6", "--suite", "re_x,abs_y2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# seed\t0"));
    let r = rows(&text);
    assert_eq!(r.len(), 8);
    for row in &r {
        let n: u32 = get(row, "n").parse().unwrap();
        assert_eq!(get(row, "found"), (1u64 << n).to_string());
        assert_eq!(get(row, "expected"), (1u64 << n).to_string());
        assert_eq!(get(row, "complete"), "true");
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "h.toml", HENON);
    let pts = file(&dir, "p.txt", "3,5\n1/5,2\n-7/3,1/2\n0,0\n");
    let runs: Vec<Vec<String>> = vec![
        vec!["green".into(), s(&h).into(), "--points".into(), s(&pts).into()],
        vec!["height".into(), s(&h).into(), "--points".into(), s(&pts).into()],
        vec!["certificate".into(), s(&h).into()],
        vec!["periodic".into(), "--quadratic".into(), "-6".into(), "-n".into(), "4".into(), "--seed".into(), "9".into()],
    ];
    for (k, args) in runs.iter().enumerate() {
        let outs: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let out = dir.path().join(format!("out{k}_{i}"));
                let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
                a.extend(["--out", s(&out)]);
                let o = srpair(&a);
                assert_eq!(o.status.code(), Some(0), "{args:?}");
                assert!(o.stdout.is_empty());
                std::fs::read(out).unwrap()
            })
            .collect();
        assert_eq!(outs[0], outs[1], "{args:?}");
    }
    assert!(String::from_utf8_lossy(&std::fs::read(dir.path().join("out3_0")).unwrap()).contains("# seed\t9"));
}

#[test]
fn precision_from_environment() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "h.toml", HENON);
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_srpair"));
        c.args(["green", s(&h), "--point", "3,5", "--place", "arch"]).args(extra);
        match env {
            Some(v) => c.env("SRPAIR_PREC", v),
            None => c.env_remove("SRPAIR_PREC"),
        };
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        rows(&stdout(&o)).remove(0)
    };
    assert_eq!(get(&run(None, &[]), "high"), "-");
    let hp = run(Some("hp"), &[]);
    assert!(get(&hp, "high").starts_with("1.54291316255718"), "{hp:?}");
    assert_eq!(get(&run(Some("hp"), &["--prec", "f64"]), "high"), "-");
    let mut c = Command::new(env!("CARGO_BIN_EXE_srpair"));
    let o = c.args(["check", s(&h)]).env("SRPAIR_PREC", "quad").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failures_stay_in_their_rows() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "h.toml", HENON);
    let o = srpair(&["green", s(&h), "--point", "1,2,3", "--point", "3,5", "--place", "arch"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert!(get(&r[0], "status").starts_with("error:"));
    assert_eq!(get(&r[0], "value"), "-");
    assert_eq!(get(&r[1], "status"), "ok");
    let o = srpair(&["height", s(&h), "--point", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(srpair(&["green", s(&h), "--point", "1/0,2"]).status.code(), Some(2));
}

#[test]
fn exact_period_cap_is_a_resource_error() {
    let o = srpair(&["periodic", "--quadratic", "-6", "-n", "4", "--exact"]);
    assert_eq!(o.status.code(), Some(3));
    let o = srpair(&["--n-cap", "4", "periodic", "--quadratic", "0", "-n", "2", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
}
