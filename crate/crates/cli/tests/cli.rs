use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn obddproof(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obddproof"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, n: usize) -> String {
    let name = format!("php{n}.cnf");
    let o = obddproof(dir, &["gen", "--n", &n.to_string(), "--out", &name]);
    assert!(o.status.success());
    name
}

fn summary_field(line: &str, key: &str) -> usize {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn gen_writes_dimacs_and_sidecar() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 2);
    let cnf = fs::read_to_string(dir.path().join("php2.cnf")).unwrap();
    assert!(cnf.contains("p cnf 6 9"));
    let map: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("php2.map.json")).unwrap())
            .unwrap();
    assert_eq!(map["n"], 2);
    assert_eq!(map["vars"].as_array().unwrap().len(), 6);

    let star = obddproof(dir.path(), &["gen", "--n", "3", "--pc-star"]);
    assert!(stdout(&star).contains("p cnf 12 3"));
    assert_eq!(
        obddproof(dir.path(), &["gen", "--n", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn refute_exit_codes() {
    let dir = TempDir::new().unwrap();
    let php2 = gen(dir.path(), 2);
    let ok = obddproof(dir.path(), &["refute", &php2, "--schedule", "linear"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("refuted=true max="));

    let missing_seed = obddproof(dir.path(), &["refute", &php2, "--schedule", "random"]);
    assert_eq!(missing_seed.status.code(), Some(2));
    let seeded = obddproof(
        dir.path(),
        &["refute", &php2, "--schedule", "random", "--seed", "3"],
    );
    assert_eq!(seeded.status.code(), Some(0));

    let php4 = gen(dir.path(), 4);
    let budget = obddproof(dir.path(), &["refute", &php4, "--max-nodes", "100"]);
    assert_eq!(budget.status.code(), Some(3));

    fs::write(dir.path().join("sat.cnf"), "p cnf 2 1\n1 2 0\n").unwrap();
    assert_eq!(
        obddproof(dir.path(), &["refute", "sat.cnf", "--schedule", "linear"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        obddproof(dir.path(), &["refute", "nope.cnf"]).status.code(),
        Some(2)
    );
}

#[test]
fn projection_shrinks_the_largest_intermediate() {
    let dir = TempDir::new().unwrap();
    let php4 = gen(dir.path(), 4);
    let gz = stdout(&obddproof(
        dir.path(),
        &["refute", &php4, "--schedule", "gz2003"],
    ));
    let bucket = stdout(&obddproof(
        dir.path(),
        &[
            "refute",
            &php4,
            "--schedule",
            "bucket_projection",
            "--projection",
        ],
    ));
    assert!(summary_field(&bucket, "max") < summary_field(&gz, "max"));
    let no_flag = obddproof(
        dir.path(),
        &["refute", &php4, "--schedule", "bucket_projection"],
    );
    assert_eq!(no_flag.status.code(), Some(2));
}

#[test]
fn refute_orders_and_traces() {
    let dir = TempDir::new().unwrap();
    let php3 = gen(dir.path(), 3);
    let perm: Vec<String> = (1..=12).rev().map(|v| v.to_string()).collect();
    fs::write(dir.path().join("order.txt"), perm.join(" ")).unwrap();
    for order in ["row-major", "column-major", "random:7", "file:order.txt"] {
        let o = obddproof(
            dir.path(),
            &[
                "refute", &php3, "--order", order, "--trace", "t.jsonl", "--csv", "t.csv",
            ],
        );
        assert!(
            o.status.success(),
            "{order}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let steps = summary_field(&stdout(&o), "steps");
        assert_eq!(
            fs::read_to_string(dir.path().join("t.jsonl"))
                .unwrap()
                .lines()
                .count(),
            steps
        );
        assert_eq!(
            fs::read_to_string(dir.path().join("t.csv"))
                .unwrap()
                .lines()
                .count(),
            steps + 1
        );
    }
    assert_eq!(
        obddproof(dir.path(), &["refute", &php3, "--order", "sideways"])
            .status
            .code(),
        Some(2)
    );
    fs::write(dir.path().join("short.txt"), "1 2 3").unwrap();
    assert_eq!(
        obddproof(dir.path(), &["refute", &php3, "--order", "file:short.txt"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn refute_runs_schedule_files() {
    let dir = TempDir::new().unwrap();
    let php1 = gen(dir.path(), 1);
    let schedule = r#"[{"op":"axiom","clause":0},{"op":"axiom","clause":1},{"op":"axiom","clause":2},{"op":"join","left":0,"right":1},{"op":"join","left":3,"right":2}]"#;
    fs::write(dir.path().join("s.json"), schedule).unwrap();
    let o = obddproof(dir.path(), &["refute", &php1, "--schedule", "s.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "refuted=true max=2 total=6 steps=5");
    fs::write(
        dir.path().join("bad.json"),
        r#"[{"op":"join","left":0,"right":0}]"#,
    )
    .unwrap();
    assert_eq!(
        obddproof(dir.path(), &["refute", &php1, "--schedule", "bad.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_csv_is_exact_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = [
        "sweep",
        "--php-range",
        "2..5",
        "--schedules",
        "linear,gz2003",
    ];
    let first = obddproof(dir.path(), &args);
    assert!(first.status.success());
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,order,schedule,seed,refuted,max_intermediate,total_size,steps"
    );
    assert_eq!(lines.len(), 9);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(4) == Some("true")));
    let again = obddproof(
        dir.path(),
        &[&args[..], &["--jobs", "3", "--csv", "out.csv"]].concat(),
    );
    assert!(again.status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("out.csv")).unwrap(),
        text
    );
}

#[test]
fn sweep_over_a_file_with_orders_and_seeds() {
    let dir = TempDir::new().unwrap();
    let php3 = gen(dir.path(), 3);
    let o = obddproof(
        dir.path(),
        &[
            "sweep",
            &php3,
            "--orders",
            "row-major,column-major",
            "--schedules",
            "random,bucket_projection",
            "--seed",
            "5",
        ],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("3,row-major,random,5,true"));
    assert!(text.contains("3,column-major,bucket_projection,,true"));
    assert_eq!(
        obddproof(dir.path(), &["sweep", &php3, "--schedules", "random"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bound_check_verdicts() {
    let dir = TempDir::new().unwrap();
    // x0·x2 ∨ x1·x3 and parity of four variables.
    let select: String = (0..16u32)
        .map(|b| {
            if (b & 1 == 1 && b >> 2 & 1 == 1) || (b >> 1 & 1 == 1 && b >> 3 & 1 == 1) {
                '1'
            } else {
                '0'
            }
        })
        .collect();
    let parity: String = (0..16u32)
        .map(|b| if b.count_ones() % 2 == 1 { '1' } else { '0' })
        .collect();
    fs::write(dir.path().join("select.tt"), select).unwrap();
    fs::write(dir.path().join("parity.tt"), parity).unwrap();
    fs::write(
        dir.path().join("cert.json"),
        r#"{"k":2,"A":[1,2],"z":[0,0]}"#,
    )
    .unwrap();

    let o = obddproof(
        dir.path(),
        &["bound-check", "--table", "select.tt", "--cert", "cert.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["verdict"].as_str(), v["bound"].as_u64()),
        (Some("certified"), Some(4))
    );

    let o = obddproof(
        dir.path(),
        &["bound-check", "--table", "parity.tt", "--cert", "cert.json"],
    );
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "refuted");
    assert_eq!(v["counterexample"], serde_json::json!([[0, 0], [1, 1]]));

    fs::write(dir.path().join("bad.json"), r#"{"k":2,"#).unwrap();
    let o = obddproof(
        dir.path(),
        &["bound-check", "--table", "parity.tt", "--cert", "bad.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed certificate"));

    let php2 = gen(dir.path(), 2);
    let o = obddproof(
        dir.path(),
        &["bound-check", "--cnf", &php2, "--cert", "cert.json"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lemma_outputs() {
    let dir = TempDir::new().unwrap();
    let o = obddproof(dir.path(), &["lemma", "--n", "8", "--order", "row-major"]);
    assert!(o.status.success());
    let w: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(w["kind"], "columns");
    assert_eq!(w["pairs"].as_array().unwrap().len(), 1);

    let o = obddproof(dir.path(), &["lemma", "--n", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "infeasible: floor(c n)=0");

    fs::write(dir.path().join("unbalanced.txt"), "WW\nWW\n").unwrap();
    assert_eq!(
        obddproof(dir.path(), &["lemma", "--coloring", "unbalanced.txt"])
            .status
            .code(),
        Some(2)
    );
    let rows: Vec<String> = (0..7)
        .map(|r| {
            (0..7)
                .map(|c| if (r + c) % 2 == 0 { 'W' } else { 'B' })
                .collect()
        })
        .collect();
    fs::write(dir.path().join("checker.txt"), rows.join("\n")).unwrap();
    let o = obddproof(dir.path(), &["lemma", "--coloring", "checker.txt"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(r#""kind":"rows""#));
}

#[test]
fn hidden_oracle_agrees_with_the_engine() {
    let dir = TempDir::new().unwrap();
    let php2 = gen(dir.path(), 2);
    let o = obddproof(dir.path(), &["oracle", "--cnf", &php2]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["identical"], true);
    assert_eq!(v["satisfying"], 0);
}
