use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands;
use crate::config::{EnvironmentName, LoadSection, RunConfig};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "tunnelsense", version, about = "Tunnel-diode oscillator sensing experiments")]
pub struct Cli {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Write every intermediate pipeline trace as CSV.
    #[arg(long, global = true)]
    pub dump_stages: bool,
    /// Prefix for output file names.
    #[arg(long, global = true, value_name = "NAME")]
    pub scenario: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diode I-V sweep with the NDR bounds in a JSON footer.
    Iv,
    /// Simulate a breathing scene: IQ recording, traces and ground truth.
    Simulate(SimulateArgs),
    /// Estimate the breathing rate from an IQ recording or a trace CSV.
    Rate(RateArgs),
    /// Align a system trace with a respiration-belt reference.
    Compare(CompareArgs),
    /// Capacitor charging sweep and active-time report.
    Harvest(HarvestArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub rate_bpm: Option<f64>,
    #[arg(long)]
    pub distance_m: Option<f64>,
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// static-indoor, dynamic-indoor or outdoor.
    #[arg(long)]
    pub environment: Option<String>,
    #[arg(long)]
    pub material: Option<String>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub iq_sample_rate_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, value_name = "PATH")]
    pub iq: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Breathing band in hertz, `lo,hi`.
    #[arg(long, value_name = "LO,HI")]
    pub band: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// IQ recording (`.iq`) or trace CSV from the tag.
    #[arg(long, value_name = "PATH")]
    pub system: Option<PathBuf>,
    /// Respiration-belt CSV with time and force columns.
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
    #[arg(long, value_name = "LO,HI")]
    pub band: Option<String>,
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    /// Comma-separated illuminance levels; an empty string gives an empty report.
    #[arg(long, value_name = "LIST")]
    pub lux: Option<String>,
    /// Comma-separated capacitances in microfarads.
    #[arg(long, value_name = "LIST")]
    pub capacitance_uf: Option<String>,
    #[arg(long)]
    pub charge_s: Option<f64>,
    /// Constant discharge load in milliamperes.
    #[arg(long, conflicts_with = "diode_load")]
    pub load_ma: Option<f64>,
    /// Discharge through the diode's I-V curve instead of a constant load.
    #[arg(long)]
    pub diode_load: bool,
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Usage(format!("--{flag}: not a number: {s:?}")))
        })
        .collect()
}

fn parse_band(text: &str) -> Result<[f64; 2]> {
    match parse_list("band", text)?.as_slice() {
        [lo, hi] => Ok([*lo, *hi]),
        _ => Err(Error::Usage(format!("--band expects LO,HI, got {text:?}"))),
    }
}

impl Cli {
    /// Config file (or defaults) with this invocation's flags applied.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(n) = &self.scenario {
            cfg.scenario = n.clone();
        }
        match &self.command {
            Command::Iv => {}
            Command::Simulate(a) => {
                let s = &mut cfg.scene;
                if let Some(v) = a.rate_bpm {
                    s.rate_bpm = v;
                }
                if let Some(v) = a.distance_m {
                    s.distance_m = v;
                }
                if let Some(v) = a.duration_s {
                    s.duration_s = v;
                }
                if let Some(e) = &a.environment {
                    s.environment = EnvironmentName::parse(e)
                        .ok_or_else(|| Error::Usage(format!("--environment: unknown environment {e:?}")))?;
                }
                if let Some(m) = &a.material {
                    s.material = m.clone();
                }
                if let Some(v) = a.snr_db {
                    s.snr_db = Some(v);
                }
                if let Some(v) = a.iq_sample_rate_hz {
                    s.iq_sample_rate_hz = v;
                }
            }
            Command::Rate(a) => {
                if a.iq.is_some() || a.trace.is_some() {
                    cfg.inputs.iq = a.iq.clone();
                    cfg.inputs.trace = a.trace.clone();
                }
                if let Some(b) = &a.band {
                    cfg.pipeline.band_hz = parse_band(b)?;
                }
            }
            Command::Compare(a) => {
                if let Some(p) = &a.system {
                    cfg.inputs.system = Some(p.clone());
                }
                if let Some(p) = &a.reference {
                    cfg.inputs.reference = Some(p.clone());
                }
                if let Some(b) = &a.band {
                    cfg.pipeline.band_hz = parse_band(b)?;
                }
            }
            Command::Harvest(a) => {
                let h = &mut cfg.harvest;
                if let Some(l) = &a.lux {
                    h.lux = parse_list("lux", l)?;
                }
                if let Some(c) = &a.capacitance_uf {
                    h.capacitances_f = parse_list("capacitance-uf", c)?.iter().map(|uf| uf / 1e6).collect();
                }
                if let Some(t) = a.charge_s {
                    h.charge_duration_s = t;
                }
                if let Some(ma) = a.load_ma {
                    h.load = LoadSection::ConstantA(ma / 1e3);
                }
                if a.diode_load {
                    h.load = LoadSection::DiodeCurve;
                }
            }
        }
        Ok(cfg)
    }

    pub fn run(&self) -> Result<Value> {
        let cfg = self.resolve_config()?;
        log::debug!("resolved config: {cfg:?}");
        match &self.command {
            Command::Iv => commands::cmd_iv(&cfg),
            Command::Simulate(_) => commands::cmd_simulate(&cfg),
            Command::Rate(_) => commands::cmd_rate(&cfg, self.dump_stages),
            Command::Compare(_) => commands::cmd_compare(&cfg),
            Command::Harvest(_) => commands::cmd_harvest(&cfg),
        }
    }
}
