use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{Command, ConfigArg};
use crate::analysis::{art_anova, ArtAnovaResult, ObservationTable};
use crate::biosignal::{calibrate_from_trace, Calibration};
use crate::engine::{replay, synth, Replay, RunReport};
use crate::error::{Error, Result};
use crate::model::canonical::to_canonical_json_pretty;
use crate::model::{load_trace, save_trace, EngineConfig, FactorCondition};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// 90 s resting trace for calibration.
    Baseline,
    /// Operator performing the stacking task.
    Task,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunSource {
    Trace(PathBuf),
    Seed(u64),
}

/// Everything one `run` needs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: EngineConfig,
    pub condition: FactorCondition,
    pub source: RunSource,
    pub calibration: Option<Calibration>,
    pub out_dir: PathBuf,
}

fn load_config(arg: &ConfigArg) -> Result<EngineConfig> {
    match &arg.config {
        Some(p) => EngineConfig::load(p),
        None => Ok(EngineConfig::default()),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_canonical_json_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub(super) fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Calibrate {
            config,
            trace,
            seed,
            out,
        } => {
            let cfg = load_config(&config)?;
            let frames = match (trace, seed) {
                (Some(p), _) => load_trace(&p)?,
                (None, Some(s)) => synth::synthesize_baseline(&cfg, s, 90.0),
                (None, None) => unreachable!("clap enforces one source"),
            };
            let calib = cmd_calibrate(&frames, &cfg)?;
            write_file(&out, format!("{}\n", calib.to_json()).as_bytes())
        }
        Command::Run {
            config,
            condition,
            trace,
            seed,
            calibration,
            out,
        } => {
            let manifest = RunManifest {
                config: load_config(&config)?,
                condition,
                source: match (trace, seed) {
                    (Some(p), _) => RunSource::Trace(p),
                    (None, Some(s)) => RunSource::Seed(s),
                    (None, None) => unreachable!("clap enforces one source"),
                },
                calibration: calibration.as_deref().map(Calibration::load).transpose()?,
                out_dir: out,
            };
            let report = cmd_run(&manifest)?;
            println!(
                "{}: complete={} time={}",
                report.condition_label,
                report.complete,
                report
                    .completion_time
                    .map_or("-".to_string(), |t| format!("{t:.2}s"))
            );
            Ok(())
        }
        Command::Batch { config, seed, out } => {
            let outcome = cmd_batch(&load_config(&config)?, seed, &out)?;
            for r in &outcome.reports {
                println!("{}: complete={}", r.condition_label, r.complete);
            }
            Ok(())
        }
        Command::Analyze { csv, out } => {
            let table = ObservationTable::load_csv(&csv)?;
            let result = cmd_analyze(&table)?;
            let text = format!("{}\n", to_canonical_json_pretty(&AnalysisReport::new(&result))?);
            match out {
                Some(p) => write_file(&p, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Synth {
            config,
            kind,
            condition,
            seed,
            calibration,
            out,
        } => {
            let cfg = load_config(&config)?;
            let calib = calibration.as_deref().map(Calibration::load).transpose()?;
            let frames = cmd_synth(&cfg, kind, condition, seed, calib.as_ref())?;
            save_trace(&out, &frames)
        }
        #[cfg(feature = "serve")]
        Command::Serve {
            config,
            port,
            static_dir,
            record_dir,
        } => {
            let cfg = load_config(&config)?;
            crate::bridge::serve(crate::bridge::ServeOptions {
                config: cfg,
                port,
                static_dir,
                record_dir,
            })
        }
    }
}

pub fn cmd_calibrate(frames: &[crate::model::SensorFrame], cfg: &EngineConfig) -> Result<Calibration> {
    calibrate_from_trace(frames, cfg)
}

pub fn cmd_synth(
    cfg: &EngineConfig,
    kind: SynthKind,
    condition: FactorCondition,
    seed: u64,
    calibration: Option<&Calibration>,
) -> Result<Vec<crate::model::SensorFrame>> {
    match kind {
        SynthKind::Baseline => Ok(synth::synthesize_baseline(cfg, seed, 90.0)),
        SynthKind::Task => synth::synthesize_operator(condition, cfg, seed, calibration),
    }
}

fn write_run(out_dir: &Path, stem: &str, run: &Replay) -> Result<()> {
    write_file(&out_dir.join(format!("snapshots{stem}.jsonl")), &run.snapshot_bytes())?;
    write_json(&out_dir.join(format!("report{stem}.json")), &run.report)
}

/// Replays the manifest's trace (or synthesizes one) and writes
/// `snapshots.jsonl` and `report.json` into the output directory.
pub fn cmd_run(m: &RunManifest) -> Result<RunReport> {
    if (m.condition.concentration || m.condition.strain) && m.calibration.is_none() {
        return Err(Error::Calibration(format!(
            "condition {} needs --calibration",
            m.condition
        )));
    }
    let frames = match &m.source {
        RunSource::Trace(p) => load_trace(p)?,
        RunSource::Seed(seed) => {
            let frames =
                synth::synthesize_operator(m.condition, &m.config, *seed, m.calibration.as_ref())?;
            fs::create_dir_all(&m.out_dir).map_err(|e| Error::io(&m.out_dir, e))?;
            save_trace(&m.out_dir.join("trace.jsonl"), &frames)?;
            frames
        }
    };
    let run = replay(&frames, &m.config, m.condition, m.calibration)?;
    write_run(&m.out_dir, "", &run)?;
    Ok(run.report)
}

#[derive(Debug, Clone, Serialize)]
struct BatchOrder {
    master_seed: u64,
    order: Vec<String>,
    seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// Conditions in the order they were run.
    pub order: Vec<FactorCondition>,
    /// Reports, in run order.
    pub reports: Vec<RunReport>,
}

/// The seeded run order of the eight conditions.
pub fn batch_order(master_seed: u64) -> Vec<FactorCondition> {
    let mut order = FactorCondition::all().to_vec();
    order.shuffle(&mut rng::seeded(master_seed, rng::stream::BATCH_ORDER));
    order
}

/// Runs every condition in a seeded random order. A resting baseline is
/// synthesized from the master seed and calibrated once for all runs.
pub fn cmd_batch(cfg: &EngineConfig, master_seed: u64, out_dir: &Path) -> Result<BatchOutcome> {
    let calib = synth::default_calibration(cfg, master_seed)?;
    write_file(&out_dir.join("calibration.json"), format!("{}\n", calib.to_json()).as_bytes())?;
    let order = batch_order(master_seed);
    let seeds: Vec<u64> = (0..order.len() as u64)
        .map(|i| rng::derive_seed(master_seed, i))
        .collect();
    write_json(
        &out_dir.join("order.json"),
        &BatchOrder {
            master_seed,
            order: order.iter().map(|c| c.to_string()).collect(),
            seeds: seeds.clone(),
        },
    )?;
    let mut reports = Vec::with_capacity(order.len());
    for (cond, seed) in order.iter().zip(&seeds) {
        let frames = synth::synthesize_operator(*cond, cfg, *seed, Some(&calib))?;
        let run = replay(&frames, cfg, *cond, Some(calib))?;
        write_run(out_dir, &format!("_{}", cond.slug()), &run)?;
        reports.push(run.report);
    }
    Ok(BatchOutcome { order, reports })
}

pub fn cmd_analyze(table: &ObservationTable) -> Result<ArtAnovaResult> {
    art_anova(table)
}

#[derive(Debug, Serialize)]
struct AnalysisReport<'a> {
    version: u32,
    method: &'static str,
    n: usize,
    error_df_note: &'static str,
    effects: &'a [crate::analysis::EffectRow],
}

impl<'a> AnalysisReport<'a> {
    fn new(r: &'a ArtAnovaResult) -> Self {
        AnalysisReport {
            version: 1,
            method: "aligned rank transform + fixed-effects 2x2x2 ANOVA",
            n: r.n,
            error_df_note: "df2 = N - 8 (cell-level fixed effects; participant not modeled)",
            effects: &r.effects,
        }
    }
}
