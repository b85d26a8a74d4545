//! The five subcommands. Each writes its files under the output directory
//! and returns a JSON summary for stdout.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tunnelsense_core::dsp::{align, PipelineOutput};
use tunnelsense_core::harvest::{harvest_report, HarvestRow};
use tunnelsense_core::oscillator::oscillation_sustained;
use tunnelsense_core::scene::simulate_drift_trace;
use tunnelsense_core::{FrequencyTrace, UniformSeries};

use crate::config::RunConfig;
use crate::csvio::{self, FORCE_COLUMN, TRACE_COLUMN};
use crate::error::{Error, Result};
use crate::iqfile;

/// Voltage grid of the I-V sweep: 0 to 400 mV in 0.5 mV steps.
pub const IV_STEP_V: f64 = 0.5e-3;
pub const IV_POINTS: usize = 801;

/// Offsets the IQ noise stream from the scene stream drawn with the same seed.
const IQ_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Respiration-belt stand-in written by `simulate`: strap pre-tension plus a
/// linear spring on chest expansion.
const BELT_PRELOAD_N: f64 = 2.0;
const BELT_STIFFNESS_N_PER_M: f64 = 400.0;

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found")))
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_iv(cfg: &RunConfig) -> Result<Value> {
    let model = cfg.diode.model()?;
    let (ndr_low, ndr_high) = model.ndr_region()?;
    let dir = prepare_out(cfg)?;
    let path = dir.join(format!("{}.iv.csv", cfg.scenario));

    let mut text = String::from("v_v,i_a,didv_s\n");
    for k in 0..IV_POINTS {
        let v = k as f64 * IV_STEP_V;
        let i = model.iv_current(v)?;
        let g = model.differential_conductance(v)?;
        text.push_str(&format!("{v},{i},{g}\n"));
    }
    let footer = json!({ "ndr_low_v": ndr_low, "ndr_high_v": ndr_high });
    text.push_str(&format!("# {footer}\n"));
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    Ok(json!({
        "command": "iv",
        "rows": IV_POINTS,
        "ndr_low_v": ndr_low,
        "ndr_high_v": ndr_high,
        "oscillates_at_nominal_bias": oscillation_sustained(&model, &cfg.oscillator.config()?),
        "path": path,
    }))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Value> {
    let seed = cfg.seed()?;
    let scene = cfg.scene()?;
    let s = &cfg.scene;
    let dir = prepare_out(cfg)?;

    let mut trace = simulate_drift_trace(&scene, s.duration_s, s.trace_rate_hz, seed)?;
    trace.start_time = s.start_time_unix;
    let synth = cfg.synthesis(&scene);
    let iq = synth.synthesize(&trace, seed.wrapping_add(IQ_SEED_SALT))?;
    if iq.clipped > 0 {
        log::warn!("{} of {} IQ samples clipped at full scale", iq.clipped, iq.len());
    }
    let mut chest = scene.chest_distance_series(s.duration_s, s.trace_rate_hz);
    chest.start_time = s.start_time_unix;

    let name = &cfg.scenario;
    let iq_path = dir.join(format!("{name}.iq"));
    let trace_path = dir.join(format!("{name}.trace.csv"));
    let chest_path = dir.join(format!("{name}.chest.csv"));
    let belt_path = dir.join(format!("{name}.belt.csv"));
    let truth_path = dir.join(format!("{name}.truth.json"));

    let description = format!(
        "{name}: {} BPM at {} m, {:?}, seed {seed}",
        s.rate_bpm, s.distance_m, s.environment
    );
    iqfile::write_iq(&iq, &description, &iq_path)?;
    csvio::write_series(&trace_path, TRACE_COLUMN, &trace)?;
    csvio::write_series(&chest_path, "distance_m", &chest)?;
    let baseline = scene.breathing.baseline_distance;
    let belt = (0..chest.len()).map(|i| {
        (
            chest.time_at(i),
            BELT_PRELOAD_N + BELT_STIFFNESS_N_PER_M * (baseline - chest.values[i]),
        )
    });
    csvio::write_pairs(&belt_path, &["time_s", FORCE_COLUMN], belt)?;

    let truth = json!({
        "scenario": name,
        "seed": seed,
        "rate_bpm": s.rate_bpm,
        "breathing_hz": scene.breathing.frequency(),
        "distance_m": baseline,
        "amplitude_m": scene.breathing.amplitude,
        "material": scene.material,
        "environment": s.environment,
        "duration_s": s.duration_s,
        "trace_rate_hz": s.trace_rate_hz,
        "iq_sample_rate_hz": iq.sample_rate,
        "center_frequency_hz": iq.center_frequency,
        "snr_db": synth.snr_db,
        "unpulled_frequency_hz": scene.unpulled_frequency(),
        "carrier_at_rest_hz": scene.pulled_frequency_at(baseline)?,
        "iq_samples": iq.len(),
        "clipped_samples": iq.clipped,
    });
    write_json(&truth_path, &truth)?;

    Ok(json!({
        "command": "simulate",
        "truth": truth,
        "files": {
            "iq": iq_path,
            "iq_metadata": iqfile::sidecar_path(&iq_path),
            "trace": trace_path,
            "chest": chest_path,
            "belt": belt_path,
            "truth": truth_path,
        },
    }))
}

/// Runs the receiver chain on whichever input the config names.
fn run_pipeline(cfg: &RunConfig, iq: Option<&Path>, trace: Option<&Path>) -> Result<(PipelineOutput, &'static str)> {
    let pipeline = cfg.pipeline.config();
    match (iq, trace) {
        (Some(p), None) => {
            require_file(p)?;
            let (rec, _) = iqfile::read_iq(p)?;
            Ok((pipeline.run_iq(&rec, &cfg.tracker.config(rec.sample_rate))?, "iq"))
        }
        (None, Some(p)) => {
            require_file(p)?;
            let tr = csvio::read_trace_csv(p)?;
            Ok((pipeline.run_trace(&tr)?, "trace"))
        }
        (Some(_), Some(_)) => Err(Error::Usage("give either an IQ recording or a trace CSV, not both".into())),
        (None, None) => Err(Error::Usage("no input: pass --iq PATH or --trace PATH".into())),
    }
}

pub fn cmd_rate(cfg: &RunConfig, dump_stages: bool) -> Result<Value> {
    let (out, input) = run_pipeline(cfg, cfg.inputs.iq.as_deref(), cfg.inputs.trace.as_deref())?;
    let mut stage_files = Vec::new();
    if dump_stages {
        let dir = prepare_out(cfg)?;
        for stage in &out.stages {
            let path = dir.join(format!("{}.stage.{}.csv", cfg.scenario, stage.name));
            csvio::write_series(&path, TRACE_COLUMN, &stage.trace)?;
            stage_files.push(path);
        }
    }
    let e = out.estimate;
    let mut v = json!({
        "bpm": e.bpm,
        "confidence": e.confidence,
        "band_hz": [e.band.0, e.band.1],
        "input": input,
        "stages": out.stages.iter().map(|s| s.name).collect::<Vec<_>>(),
    });
    if dump_stages {
        v["stage_files"] = json!(stage_files);
    }
    Ok(v)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Value> {
    let reference_path = cfg
        .inputs
        .reference
        .as_deref()
        .ok_or_else(|| Error::Usage("no reference: pass --reference PATH".into()))?;
    require_file(reference_path)?;
    let system_path = cfg
        .inputs
        .system
        .as_deref()
        .ok_or_else(|| Error::Usage("no system input: pass --system PATH".into()))?;
    let is_iq = system_path.extension().is_some_and(|e| e == "iq");
    let (system, _) = if is_iq {
        run_pipeline(cfg, Some(system_path), None)?
    } else {
        run_pipeline(cfg, None, Some(system_path))?
    };

    let belt = csvio::read_resp_csv(reference_path)?;
    let belt = FrequencyTrace::new(belt.start_time, belt.sample_interval, belt.force_values);
    let reference = cfg.pipeline.config().run_trace(&belt)?;

    let a = align(system.processed(), reference.processed())?;
    let (bs, br) = (system.estimate.bpm, reference.estimate.bpm);
    Ok(json!({
        "lag_s": a.lag,
        "correlation": a.correlation,
        "bpm_system": bs,
        "bpm_reference": br,
        "bpm_error": bs - br,
        "confidence_system": system.estimate.confidence,
        "confidence_reference": reference.estimate.confidence,
    }))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn harvest_csv(rows: &[HarvestRow]) -> String {
    let mut text = String::from("capacitance_f,lux,peak_voltage_v,time_to_window_s,active_time_s\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.capacitance,
            r.lux,
            r.peak_voltage,
            opt(r.time_to_window),
            opt(r.active_time)
        ));
    }
    text
}

pub fn cmd_harvest(cfg: &RunConfig) -> Result<Value> {
    let h = &cfg.harvest;
    let window = h.window(&cfg.diode)?;
    let caps = h.caps();
    let rows = harvest_report(&h.source(), &caps, &h.lux, &window, h.charge_duration_s, h.dt_s)?;
    let dir = prepare_out(cfg)?;
    let path = dir.join(format!("{}.harvest.csv", cfg.scenario));
    let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    file.write_all(harvest_csv(&rows).as_bytes()).map_err(|e| Error::io(&path, e))?;

    let closed_form: Vec<Value> = caps
        .iter()
        .map(|c| json!({ "capacitance_f": c.capacitance, "active_time_s": window.closed_form_active_time(c) }))
        .collect();
    Ok(json!({
        "command": "harvest",
        "rows": rows.len(),
        "window_v": [window.v_low, window.v_high],
        "closed_form": closed_form,
        "path": path,
    }))
}
