use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn svqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svqmc"))
        .args(args)
        .output()
        .expect("run svqmc")
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn out_path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn price(config: &str, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["price", "--config", config, "--out", out];
    args.extend_from_slice(extra);
    svqmc(&args)
}

const EUROPEAN: &str = r#"
model = "heston"
payoff = "european"
schemes = ["cond-qmc", "qmc"]
n = [256, 1024]
q = 12
seed = 99

[params]
s0 = 100.0
v0 = 0.010201
kappa = 6.21
theta = 0.019
sigma = 0.61
rho = -0.70
r = 0.0319

[option]
strike = 100.0
"#;

#[test]
fn smoke_config_writes_a_table() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "smoke.csv");
    let run = price(&config_path("smoke.toml"), &out, &[]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,n,q,estimate,std_error,wall_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("cond-qmc,1,2,"));
}

#[test]
fn fixed_seed_without_timing_is_bit_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "euro.toml", EUROPEAN);
    let (a, b) = (out_path(&dir, "a.csv"), out_path(&dir, "b.csv"));
    assert_eq!(price(&config, &a, &["--no-timing"]).status.code(), Some(0));
    assert_eq!(price(&config, &b, &["--no-timing"]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    // a table is its own golden file
    let check = svqmc(&["verify", "--results", &a, "--expect", &b]);
    assert_eq!(
        check.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&check.stdout)
    );
    // a different seed changes the numbers and fails the golden comparison
    let c = out_path(&dir, "c.csv");
    assert_eq!(
        price(&config, &c, &["--no-timing", "--seed", "100"]).status.code(),
        Some(0)
    );
    assert_eq!(
        svqmc(&["verify", "--results", &c, "--expect", &a]).status.code(),
        Some(3)
    );
}

#[test]
fn reported_std_errors_follow_from_replicates() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "euro.toml", EUROPEAN);
    let out = out_path(&dir, "euro.csv");
    assert_eq!(price(&config, &out, &["--emit-replicates"]).status.code(), Some(0));
    let sidecar: PathBuf = dir.path().join("euro.replicates.csv");
    let mut reader = csv::Reader::from_path(&sidecar).unwrap();
    let mut groups: std::collections::BTreeMap<(String, u64), Vec<f64>> = Default::default();
    for rec in reader.records() {
        let rec = rec.unwrap();
        groups
            .entry((rec[0].to_string(), rec[1].parse().unwrap()))
            .or_default()
            .push(rec[3].parse().unwrap());
    }
    let mut table = csv::Reader::from_path(&out).unwrap();
    let mut seen = 0;
    for rec in table.records() {
        let rec = rec.unwrap();
        let means = &groups[&(rec[0].to_string(), rec[1].parse().unwrap())];
        let q = means.len() as f64;
        assert_eq!(q, rec[2].parse::<f64>().unwrap());
        let mean = means.iter().sum::<f64>() / q;
        let se = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (q * (q - 1.0))).sqrt();
        let (estimate, std_error): (f64, f64) = (rec[3].parse().unwrap(), rec[4].parse().unwrap());
        assert!((estimate - mean).abs() <= 1e-12 * mean.abs());
        assert!((std_error - se).abs() <= 1e-10 * se);
        seen += 1;
    }
    assert_eq!(seen, 4);
}

#[test]
fn expectations_pass_and_fail_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "euro.toml", EUROPEAN);
    let out = out_path(&dir, "euro.csv");
    assert_eq!(price(&config, &out, &[]).status.code(), Some(0));

    let empty = write(&dir, "empty.toml", "");
    assert_eq!(
        svqmc(&["verify", "--results", &out, "--expect", &empty]).status.code(),
        Some(0)
    );

    let good = write(
        &dir,
        "good.toml",
        r#"
[[expect]]
kind = "value"
scheme = "cond-qmc"
n = 1024
reference = 6.80611
k = 4

[[expect]]
kind = "ratio"
numerator = "cond-qmc"
denominator = "qmc"
n = 1024
max = 1.0
"#,
    );
    let run = svqmc(&["verify", "--results", &out, "--expect", &good]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stdout));

    let bad = write(
        &dir,
        "bad.toml",
        r#"
[[expect]]
kind = "value"
scheme = "cond-qmc"
n = 1024
reference = 7.5
"#,
    );
    let run = svqmc(&["verify", "--results", &out, "--expect", &bad]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stdout).contains("FAIL"));
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "x.csv");
    assert_eq!(svqmc(&["price"]).status.code(), Some(1));
    assert_eq!(price(&out_path(&dir, "missing.toml"), &out, &[]).status.code(), Some(1));

    let unknown_scheme = write(&dir, "s.toml", &EUROPEAN.replace("\"qmc\"]", "\"sobol\"]"));
    assert_eq!(price(&unknown_scheme, &out, &[]).status.code(), Some(1));

    let not_power = write(&dir, "n.toml", &EUROPEAN.replace("n = [256, 1024]", "n = [300]"));
    assert_eq!(price(&not_power, &out, &[]).status.code(), Some(1));

    // the conditional estimator only exists for the European payoff
    let asian = EUROPEAN
        .replace("payoff = \"european\"", "payoff = \"asian\"")
        .replace("strike = 100.0", "strike = 100.0\ndates = 4");
    let cond_asian = write(&dir, "a.toml", &asian);
    let run = price(&cond_asian, &out, &[]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("cond-qmc"));

    let bad_rho = write(&dir, "r.toml", &EUROPEAN.replace("rho = -0.70", "rho = -1.5"));
    assert_eq!(price(&bad_rho, &out, &[]).status.code(), Some(1));
}

#[test]
fn bridge_scheme_prices_an_asian_option() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "asian.toml",
        &EUROPEAN
            .replace("payoff = \"european\"", "payoff = \"asian\"")
            .replace("[\"cond-qmc\", \"qmc\"]", "[\"mc\", \"bridge\"]")
            .replace("n = [256, 1024]", "n = [512]")
            .replace("strike = 100.0", "strike = 100.0\ndates = 4"),
    );
    let out = out_path(&dir, "asian.csv");
    let run = price(&config, &out, &[]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let mut table = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<(String, f64, f64)> = table
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[3].parse().unwrap(), r[4].parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0].0, "bridge");
    let (bridge, mc) = (&rows[0], &rows[1]);
    assert!(bridge.2 < mc.2);
    assert!((bridge.1 - mc.1).abs() < 3.0 * bridge.2.hypot(mc.2));
}
