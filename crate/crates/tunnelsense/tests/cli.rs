use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tunnelsense_core::DiodeModel;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(self.stdout.trim()).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }

    fn error(&self) -> Value {
        let lines: Vec<&str> = self.stderr.lines().collect();
        assert_eq!(lines.len(), 1, "{}", self.stderr);
        serde_json::from_str(lines[0]).unwrap()
    }
}

fn tunnelsense(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_tunnelsense"))
        .args(["--out", dir.to_str().unwrap()])
        .args(args)
        .env("TUNNELSENSE_LOG", "error")
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let r = tunnelsense(dir, args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.json()
}

#[test]
fn iv_sweep_and_footer() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["iv"]);
    let text = fs::read_to_string(tmp.path().join("run.iv.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v_v,i_a,didv_s"));
    let rows: Vec<Vec<f64>> = lines
        .clone()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 801);

    let model = DiodeModel::default();
    for r in &rows {
        assert_eq!(r[1], model.iv_current(r[0]).unwrap());
        assert_eq!(r[2], model.differential_conductance(r[0]).unwrap());
    }
    assert!((rows[800][0] - 0.4).abs() < 1e-12);

    let footer = text.lines().find_map(|l| l.strip_prefix("# ")).unwrap();
    let footer: Value = serde_json::from_str(footer).unwrap();
    let lo = footer["ndr_low_v"].as_f64().unwrap();
    let hi = footer["ndr_high_v"].as_f64().unwrap();
    assert!((lo - 0.070).abs() <= 5e-3 && (hi - 0.150).abs() <= 5e-3, "{footer}");
}

#[test]
fn iv_rejects_bad_model() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"diode": {"v_peak_v": 0.2, "v_valley_v": 0.1}}"#).unwrap();
    let r = tunnelsense(tmp.path(), &["--config", cfg.to_str().unwrap(), "iv"]);
    assert_eq!(r.code, 6);
    assert_eq!(r.error()["error"], "diode_model");
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["--seed", "9", "simulate", "--duration-s", "2", "--environment", "dynamic-indoor"];
    ok(&a, &args);
    ok(&b, &args);
    let names = ["run.iq", "run.iq.json", "run.trace.csv", "run.chest.csv", "run.belt.csv", "run.truth.json"];
    for name in names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    // 2 s at 1 MHz, two little-endian f32 per sample
    assert_eq!(fs::metadata(a.join("run.iq")).unwrap().len(), 2 * 1_000_000 * 8);
    let meta: Value = serde_json::from_slice(&fs::read(a.join("run.iq.json")).unwrap()).unwrap();
    assert_eq!(meta["center_frequency"], 868e6);
    assert_eq!(meta["sample_rate"], 1e6);

    ok(&b, &["--seed", "10", "simulate", "--duration-s", "2", "--environment", "dynamic-indoor"]);
    assert_ne!(fs::read(a.join("run.iq")).unwrap(), fs::read(b.join("run.iq")).unwrap());
}

#[test]
fn simulate_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let r = tunnelsense(tmp.path(), &["simulate", "--duration-s", "2"]);
    assert_eq!(r.code, 3, "missing seed: {}", r.stderr);
    assert_eq!(r.error()["error"], "config");

    let r = tunnelsense(tmp.path(), &["--seed", "1", "simulate", "--duration-s", "2", "--iq-sample-rate-hz", "10000"]);
    assert_eq!(r.code, 6);
    assert_eq!(r.error()["error"], "nyquist");

    let r = tunnelsense(tmp.path(), &["--seed", "1", "simulate", "--material", "unobtainium"]);
    assert_eq!(r.code, 6);
    assert!(r.error()["message"].as_str().unwrap().contains("unobtainium"));
}

#[test]
fn rate_from_iq_and_from_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--seed", "3", "simulate", "--duration-s", "40", "--iq-sample-rate-hz", "250000"]);
    let iq = d.join("run.iq");

    let from_iq = ok(d, &["rate", "--iq", iq.to_str().unwrap()]);
    assert!((from_iq["bpm"].as_f64().unwrap() - 15.0).abs() <= 1.0, "{from_iq}");
    assert_eq!(from_iq["input"], "iq");
    assert_eq!(from_iq["stages"], serde_json::json!(["track", "detrend", "hampel", "smooth"]));

    let trace = d.join("run.trace.csv");
    let from_trace = ok(d, &["--dump-stages", "rate", "--trace", trace.to_str().unwrap(), "--band", "0.1,0.5"]);
    assert_eq!(from_trace["stages"], serde_json::json!(["detrend", "hampel", "smooth"]));
    assert_eq!(from_trace["band_hz"], serde_json::json!([0.1, 0.5]));
    assert!((from_trace["bpm"].as_f64().unwrap() - 15.0).abs() <= 1.0, "{from_trace}");
    for stage in ["detrend", "hampel", "smooth"] {
        assert!(d.join(format!("run.stage.{stage}.csv")).is_file());
    }
}

#[test]
fn rate_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let r = tunnelsense(d, &["rate"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.error()["error"], "usage");

    let missing = d.join("nope.iq");
    let r = tunnelsense(d, &["rate", "--iq", missing.to_str().unwrap()]);
    assert_eq!(r.code, 4);
    assert_eq!(r.error()["error"], "io");

    let orphan = d.join("orphan.iq");
    fs::write(&orphan, [0u8; 64]).unwrap();
    let r = tunnelsense(d, &["rate", "--iq", orphan.to_str().unwrap()]);
    assert_eq!(r.code, 5);
    assert_eq!(r.error()["error"], "missing_sidecar");

    let csv = d.join("bad.csv");
    fs::write(&csv, "time_s,frequency_hz\n0,1\n1,2\n0.5,3\n").unwrap();
    let r = tunnelsense(d, &["rate", "--trace", csv.to_str().unwrap()]);
    assert_eq!(r.code, 5);

    let r = tunnelsense(d, &["rate", "--trace", csv.to_str().unwrap(), "--band", "0.1"]);
    assert_eq!(r.code, 2);

    let r = tunnelsense(d, &["rate", "--bogus"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.error()["error"], "usage");
}

/// Rewrites a trace CSV as a belt CSV, optionally delayed and negated.
fn belt_from_trace(trace: &Path, out: &Path, delay: f64, sign: f64) {
    let text = fs::read_to_string(trace).unwrap();
    let mut belt = String::from("time_s,force_n\n");
    for line in text.lines().skip(1) {
        let (t, v) = line.split_once(',').unwrap();
        let t: f64 = t.parse().unwrap();
        let v: f64 = v.parse().unwrap();
        belt.push_str(&format!("{},{}\n", t + delay, sign * v));
    }
    fs::write(out, belt).unwrap();
}

#[test]
fn compare_against_shifted_references() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    // Sign-agnostic alignment of a periodic trace aliases any delay beyond a
    // quarter breath onto the nearer anti-phase lag; at 6 BPM that is 2.5 s.
    ok(d, &["--seed", "4", "simulate", "--duration-s", "60", "--rate-bpm", "6", "--iq-sample-rate-hz", "250000"]);
    let trace = d.join("run.trace.csv");
    let compare = |reference: &Path| ok(d, &["compare", "--system", trace.to_str().unwrap(), "--reference", reference.to_str().unwrap()]);

    let same = d.join("same.csv");
    belt_from_trace(&trace, &same, 0.0, 1.0);
    let r = compare(&same);
    assert_eq!(r["lag_s"], 0.0);
    assert!((r["correlation"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r["bpm_error"], 0.0);

    let delayed = d.join("delayed.csv");
    belt_from_trace(&trace, &delayed, 2.0, 1.0);
    let r = compare(&delayed);
    assert!((r["lag_s"].as_f64().unwrap() - 2.0).abs() <= 0.05 + 1e-9, "{r}");
    assert!(r["bpm_error"].as_f64().unwrap().abs() < 0.3, "{r}");
    assert!(r["correlation"].as_f64().unwrap() > 0.95);

    let flipped = d.join("flipped.csv");
    belt_from_trace(&trace, &flipped, 0.0, -1.0);
    let r = compare(&flipped);
    assert_eq!(r["lag_s"], 0.0);
    assert!((r["correlation"].as_f64().unwrap() + 1.0).abs() < 1e-9);

    // the simulated belt tightens as the chest approaches, so it is anti-phase with the carrier
    let belt = d.join("run.belt.csv");
    let r = compare(&belt);
    assert!(r["correlation"].as_f64().unwrap() < -0.9, "{r}");
    assert!(r["bpm_error"].as_f64().unwrap().abs() < 0.5, "{r}");
}

#[test]
fn compare_needs_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let sys = d.join("sys.csv");
    let belt = d.join("belt.csv");
    let rows = |col: &str, start: f64| {
        let mut s = format!("time_s,{col}\n");
        for k in 0..800 {
            s.push_str(&format!("{},{}\n", start + k as f64 * 0.05, (k as f64 * 0.0785).sin()));
        }
        s
    };
    fs::write(&sys, rows("frequency_hz", 0.0)).unwrap();
    fs::write(&belt, rows("force_n", 35.0)).unwrap();
    let r = tunnelsense(d, &["compare", "--system", sys.to_str().unwrap(), "--reference", belt.to_str().unwrap()]);
    assert_eq!(r.code, 7);
    assert_eq!(r.error()["error"], "insufficient_overlap");
}

#[test]
fn harvest_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["harvest"]);
    let first = fs::read(d.join("run.harvest.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let row = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|r| r[0] == "0.001431" && r[1] == "1000")
        .expect("1431 uF at 1000 lux");
    let active: f64 = row[4].parse().unwrap();
    assert!((active - 0.051).abs() <= 0.02 * 0.051, "{active}");

    ok(d, &["harvest"]);
    assert_eq!(fs::read(d.join("run.harvest.csv")).unwrap(), first);

    let summary = ok(d, &["--scenario", "dark", "harvest", "--lux", ""]);
    assert_eq!(summary["rows"], 0);
    let empty = fs::read_to_string(d.join("dark.harvest.csv")).unwrap();
    assert_eq!(empty.lines().count(), 1);

    let r = tunnelsense(d, &["harvest", "--load-ma", "1", "--diode-load"]);
    assert_eq!(r.code, 2);
}
