use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rcm_lab::manifest::RunManifest;

const GILBERT: &str = r#"
[model]
dimension = 2
intensity = 0.2
half_width = 6.0

[model.adjacency]
form = "gilbert"
radius = 1.0
"#;

fn rcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcm")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    rcm(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> RunManifest {
    RunManifest::read(&dir.join("manifest.json")).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

/// Every file in the directory is the manifest or listed by it.
fn assert_no_orphans(dir: &Path) {
    let m = manifest(dir);
    let mut expected = m.outputs.clone();
    expected.push("manifest.json".into());
    expected.sort();
    assert_eq!(listing(dir), expected);
}

#[test]
fn success_writes_declared_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{GILBERT}[experiment]\nseed = 4\nsamples = 200\nk_max = 6\n"));
    let out = dir.path().join("out");
    let o = run("tail", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m.status, "ok");
    assert_eq!(m.outputs, ["tail_raw.csv", "tail.csv"]);
    assert_eq!(m.config_sha256, rcm_lab::manifest::sha256_hex(&std::fs::read(&cfg).unwrap()));
    assert_no_orphans(&out);
    let tail = std::fs::read_to_string(out.join("tail.csv")).unwrap();
    assert!(tail.starts_with("k,theta,stderr,samples\n1,1.0,0.0,200\n"), "{tail}");
    let raw = std::fs::read_to_string(out.join("tail_raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 201);
}

#[test]
fn missing_keys_listed_in_one_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[model]\ndimension = 2\n[experiment]\nkind = \"supercritical\"\n");
    let out = dir.path().join("out");
    let o = run("fit", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for key in [
        "model.intensity",
        "model.half_width",
        "[model.adjacency]",
        "experiment.seed",
        "experiment.samples",
        "experiment.lambda_hat",
        "experiment.half_widths",
    ] {
        assert!(e.contains(key), "{key} not reported:\n{e}");
    }
    assert!(!out.exists());
}

#[test]
fn unknown_and_foreign_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "a.toml", &format!("{GILBERT}[experiment]\nseed = 1\nsamples = 5\nk_max = 3\ncolour = 1\n"));
    let o = run("tail", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
    let cfg = write_config(dir.path(), "b.toml", &format!("{GILBERT}[experiment]\nseed = 1\nsamples = 5\nk_max = 3\nghosts = [0.1]\n"));
    let o = run("tail", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`experiment.ghosts` is not used by `tail`"), "{}", stderr(&o));
}

#[test]
fn bad_flag_is_usage_error() {
    let o = rcm(&["tail", "--config", "x.toml", "--format", "xml"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rcm(&["scan"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(rcm(&["--help"]).status.success());
    let o = rcm(&["tail", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two_with_failure_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{GILBERT}[experiment]\nkind = \"exponential\"\nseed = 1\nsamples = 50\nk_lo = 5\nk_hi = 30\n"),
    );
    let out = dir.path().join("out");
    let o = run("fit", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let f: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("failure.json")).unwrap()).unwrap();
    assert_eq!(f["command"], "fit");
    assert_eq!(f["check"], "insufficient-data");
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, f);
    let m = manifest(&out);
    assert_eq!(m.status, "failed");
    assert!(m.outputs.contains(&"failure.json".to_string()));
    assert_no_orphans(&out);
}

#[test]
fn reruns_and_replays_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{GILBERT}[experiment]\nseed = \"340282366920938463463374607431768211455\"\nsamples = 300\nlambdas = [0.1, 0.2]\n"),
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run("chi", &cfg, &a, &[]).status.success());
    assert!(run("chi", &cfg, &b, &[]).status.success());
    let o = rcm(&["replay", a.join("manifest.json").to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["chi.csv", "chi_raw.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, std::fs::read(c.join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(&c).seed, u128::MAX.to_string());
    std::fs::write(&cfg, format!("{GILBERT}[experiment]\nseed = 2\nsamples = 300\n")).unwrap();
    let o = rcm(&["replay", a.join("manifest.json").to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("changed since the run"), "{}", stderr(&o));
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{GILBERT}[experiment]\nseed = 1\nsamples = 100\n[output]\nformat = \"csv\"\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("chi", &cfg, &a, &[]).status.success());
    assert!(run("chi", &cfg, &b, &["--seed", "2", "--samples", "40", "--format", "json", "--threads", "3"]).status.success());
    let m = manifest(&b);
    assert_eq!((m.seed.as_str(), m.samples, m.threads, m.format.as_str()), ("2", Some(40), Some(3), "json"));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&std::fs::read(b.join("chi_raw.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 40);
    assert_eq!(listing(&a), ["chi.csv", "chi_raw.csv", "manifest.json"]);
}

#[test]
fn render_radius_conventions() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let radii = |out: &Path| -> Vec<f64> {
        std::fs::read_to_string(out.join("render.svg"))
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.split("r=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap())
            .collect()
    };
    let soft = dir.path().join("soft");
    assert!(run("render", &root.join("render-soft.toml"), &soft, &[]).status.success());
    let r = radii(&soft);
    assert!(!r.is_empty() && r.iter().all(|&x| x == r[0]));
    assert!(std::fs::read_to_string(soft.join("render.svg")).unwrap().contains("<line"));
    let pareto = dir.path().join("pareto");
    assert!(run("render", &root.join("render-pareto.toml"), &pareto, &[]).status.success());
    let r = radii(&pareto);
    let points = std::fs::read_to_string(pareto.join("points.csv")).unwrap();
    let weights: Vec<f64> = points.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(r.len(), weights.len());
    let unit = r[0] / weights[0];
    for (x, w) in r.iter().zip(&weights) {
        assert!((x - unit * w).abs() < 0.02, "{x} vs {w}");
    }
    assert_no_orphans(&pareto);
}

#[test]
fn render_requires_the_plane() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &GILBERT.replace("dimension = 2", "dimension = 3").replace("[model]", "[experiment]\nseed = 1\n[model]"));
    let o = run("render", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("planar"), "{}", stderr(&o));
}

#[test]
fn shipped_fixtures_verify_clean() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run("osss-verify", &root.join("fixtures-verify.toml"), &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("osss_fixtures.csv")).unwrap();
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut rows = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[col("ok")], "true", "{l}");
        assert!(f[col("osss_slack")].parse::<f64>().unwrap() >= 0.0);
        assert!(f[col("prop27_slack")].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(f[col("drift")].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert!(rows >= 20);
}
