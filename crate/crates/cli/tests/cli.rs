use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spansphere(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spansphere")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace().find_map(|kv| kv.strip_prefix(&format!("{key}="))).unwrap_or_else(|| panic!("{key} in {line}"))
}

#[test]
fn construct_prints_cost_and_facets() {
    let dir = tempfile::tempdir().unwrap();
    let line = stdout(&spansphere(&["construct", "--n", "40", "--seed", "5", "--out", "s.txt"], dir.path()));
    assert_eq!(field(&line, "facets"), "76");
    let cost: f64 = field(&line, "cost").parse().unwrap();
    assert!(cost > 0.0);
    let check = stdout(&spansphere(&["verify", "s.txt"], dir.path()));
    assert!(check.contains("outcome=Sphere2") && check.contains("spanning=true"), "{check}");
}

#[test]
fn oracle_counts_and_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let line = stdout(&spansphere(&["oracle", "enumerate", "--n", "5"], dir.path()));
    assert_eq!(field(&line, "count"), "10");
    let min: f64 = field(&stdout(&spansphere(&["oracle", "min", "--n", "6", "--seed", "1"], dir.path())), "min").parse().unwrap();
    let built: f64 =
        field(&stdout(&spansphere(&["construct", "--n", "6", "--seed", "1", "--method", "greedy"], dir.path())), "cost").parse().unwrap();
    assert!(min <= built + 1e-12);
}

#[test]
fn oracle_patch_of_a_sphere_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&spansphere(&["oracle", "min", "--n", "6", "--out", "m.txt"], dir.path()));
    let line = stdout(&spansphere(&["oracle", "patch", "--n", "6", "--complex", "m.txt"], dir.path()));
    assert_eq!(field(&line, "rho"), "0");
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# trial setup\nn = 30\nseed = 9\n").unwrap();
    let from_file = stdout(&spansphere(&["construct", "--config", "run.cfg"], dir.path()));
    let explicit = stdout(&spansphere(&["construct", "--n", "30", "--seed", "9"], dir.path()));
    assert_eq!(from_file, explicit);
    let overridden = stdout(&spansphere(&["construct", "--config", "run.cfg", "--seed", "10"], dir.path()));
    let other = stdout(&spansphere(&["construct", "--n", "30", "--seed", "10"], dir.path()));
    assert_eq!(overridden, other);
    assert_ne!(overridden, from_file);

    fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    let o = spansphere(&["construct", "--config", "bad.cfg", "--n", "10"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&spansphere(&["--format", "json", "construct", "--n", "12"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["facets"], 20);
    stdout(&spansphere(&["exp", "conc", "--grid", "6,20", "--trials", "2", "--format", "json", "--out", "c.json"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["exact"], true);
}

#[test]
fn concentration_with_one_trial_leaves_stdev_blank() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&spansphere(&["exp", "conc", "--grid", "30", "--trials", "1"], dir.path()));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,trials,median,stdev,stdev_over_median,exact"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "");
}

#[test]
fn boltzmann_trace_and_descent_label() {
    let dir = tempfile::tempdir().unwrap();
    let line = stdout(&spansphere(&["boltzmann", "--n", "12", "--beta", "inf", "--steps", "500", "--trace", "t.csv"], dir.path()));
    assert_eq!(field(&line, "mode"), "descent");
    let trace = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("step,cost,accepted\n"));
    let costs: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(costs.windows(2).all(|w| w[1] <= w[0]));
    let line = stdout(&spansphere(&["boltzmann", "--n", "12", "--beta", "0.5", "--steps", "100"], dir.path()));
    assert_eq!(field(&line, "mode"), "sampler");
    assert!(!spansphere(&["boltzmann", "--n", "12", "--beta", "-1", "--steps", "10"], dir.path()).status.success());
}

#[test]
fn patch_reports_result_and_writes_sphere() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&spansphere(&["construct", "--n", "200", "--method", "greedy", "--out", "w.txt"], dir.path()));
    let witness = fs::read_to_string(dir.path().join("w.txt")).unwrap();
    // Dropping every 25th facet leaves a partial complex.
    let kept: Vec<&str> = witness.lines().enumerate().filter(|(i, _)| i % 25 != 0 || *i == 0).map(|(_, l)| l).collect();
    let k = witness.lines().count() - kept.len();
    fs::write(dir.path().join("h.txt"), kept.join("\n") + "\n").unwrap();
    let o = spansphere(&["patch", "--complex", "h.txt", "--witness", "w.txt", "--s", "40", "--out", "p.txt"], dir.path());
    let line = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(field(&line, "k"), k.to_string());
    if field(&line, "ok") == "true" {
        let check = stdout(&spansphere(&["verify", "p.txt"], dir.path()));
        assert!(check.contains("outcome=Sphere2") && check.contains("spanning=true"));
    } else {
        assert_eq!(o.status.code(), Some(1));
    }
}

#[test]
fn bounds_prints_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&spansphere(&["bounds", "--d", "3", "--n", "100", "--beta", "8/21"], dir.path()));
    assert!(out.lines().any(|l| l == "m0=290"), "{out}");
    assert!(out.lines().any(|l| l == "gamma=256/27"));
    assert!(out.lines().any(|l| l == "exponent_lower=13/21"));
}

#[test]
fn experiments_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let mut args = vec!["exp", "scaling", "--grid", "32..64", "--trials", "20", "--seed", "17", "--out", name];
        args.extend_from_slice(extra);
        stdout(&spansphere(&args, dir.path()));
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        // The runtime column is informational and varies between runs.
        text.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>()
    };
    let a = run("a.csv", &[]);
    let b = run("b.csv", &["--threads", "1"]);
    assert_eq!(a[0], "d,model,n,trial,seed,method,cost,facet_count");
    assert_eq!(a.len(), 41);
    assert_eq!(a, b);
}
