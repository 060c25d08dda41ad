//! The `simulate`, `run`, `campaign` and `report` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use super::config::CampaignConfig;
use super::dataset::{read_dataset, read_table, write_dataset, write_table, DatasetLog};
use crate::error::{Error, Result};
use crate::harness::{
    aggregate, run_campaign, run_filter, summarize, CampaignResult, FilterRun, HarnessConfig,
    Scenario, SummaryRow, TrialResult,
};
use crate::models::{ImuErrors, OdoCalib, Tag};
use crate::sim::TrialSeed;

pub const TRIAL_COLUMNS: [&str; 9] = [
    "t", "att_roll", "att_pitch", "att_yaw", "vel_x", "vel_y", "vel_z", "hpos", "nis",
];
pub const SERIES_COLUMNS: [&str; 8] = [
    "t", "e_roll", "e_pitch", "e_yaw", "e_vx", "e_vy", "e_vz", "e_hpos_rms",
];
pub const NAV_COLUMNS: [&str; 11] = [
    "t", "roll", "pitch", "yaw", "v_x", "v_y", "v_z", "r_x", "r_y", "r_z", "nis",
];
const TRIAL_UNITS: &str = "s,rad,rad,rad,m/s,m/s,m/s,m,-";
const SERIES_UNITS: &str = "s,rad,rad,rad,m/s,m/s,m/s,m";

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// The sensor log of trial `trial` with truth at the start and at every
/// odometer epoch.
pub fn simulated_dataset(config: &HarnessConfig, seed: TrialSeed) -> Result<DatasetLog> {
    let scenario = Scenario::new(config)?;
    let (log, _) = scenario.simulate(config, seed);
    let truth = std::iter::once(scenario.truth.samples[0].nav)
        .chain(log.odo.iter().filter_map(|o| scenario.truth_at(o.t).copied()))
        .collect();
    Ok(DatasetLog {
        log,
        imu_rate: config.rates.imu_hz,
        odo_rate: config.rates.update_hz,
        truth: Some(truth),
    })
}

/// `simulate`: writes one seeded trial as a dataset directory.
pub fn simulate(cfg: &CampaignConfig, trial: u64, out: &Path) -> Result<DatasetLog> {
    let data = simulated_dataset(&cfg.resolve(), TrialSeed::new(cfg.seed, trial))?;
    write_dataset(out, &data)?;
    Ok(data)
}

/// Filter output on a dataset, scored when truth is available.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub run: FilterRun,
    pub errors: Option<TrialResult>,
}

/// Runs one algorithm on an in-memory dataset. The IMU and update rates are
/// taken from the dataset.
pub fn run_dataset(cfg: &HarnessConfig, data: &DatasetLog, tag: Tag, seed: TrialSeed) -> Result<RunOutput> {
    let mut config = cfg.clone();
    config.rates.imu_hz = data.imu_rate;
    config.rates.update_hz = data.odo_rate;
    config.rates.predict_hz = config.rates.predict_hz.min(data.imu_rate);
    config.rates.validate()?;
    let run = run_filter(tag, &config, &data.log)?;
    let errors = match data.truth {
        Some(_) => Some(TrialResult::score(&run, seed, |t| data.truth_at(t))?),
        None => None,
    };
    Ok(RunOutput { run, errors })
}

fn trial_rows(tr: &TrialResult) -> Vec<[f64; 9]> {
    (0..tr.t.len())
        .map(|k| {
            let (a, v) = (tr.att[k], tr.vel[k]);
            [tr.t[k], a.x, a.y, a.z, v.x, v.y, v.z, tr.hpos[k], tr.nis[k]]
        })
        .collect()
}

fn write_trial(path: &Path, tr: &TrialResult) -> Result<()> {
    let rows = trial_rows(tr);
    write_table(
        path,
        "trial",
        &[
            ("tag", tr.tag.id().into()),
            ("seed", tr.seed.base.to_string()),
            ("trial", tr.seed.trial.to_string()),
            ("units", TRIAL_UNITS.into()),
        ],
        &TRIAL_COLUMNS,
        rows.iter().map(|r| r.as_slice()),
    )
}

fn read_trial(path: &Path, tag: Tag) -> Result<TrialResult> {
    let t = read_table(path, "trial", &TRIAL_COLUMNS)?;
    let file = path.display().to_string();
    if t.meta.get("tag").map(String::as_str) != Some(tag.id()) {
        return Err(Error::dataset(file, 1, format!("expected tag {tag}")));
    }
    let base = t.meta_f64(&file, "seed")? as u64;
    let trial = t.meta_f64(&file, "trial")? as u64;
    let col = |j: usize| t.rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let v3 = |j: usize| t.rows.iter().map(|r| Vector3::new(r[j], r[j + 1], r[j + 2])).collect::<Vec<_>>();
    Ok(TrialResult {
        tag,
        seed: TrialSeed::new(base, trial),
        t: col(0),
        att: v3(1),
        vel: v3(4),
        hpos: col(7),
        nis: col(8),
        calib: OdoCalib::default(),
        imu_errors: ImuErrors::default(),
    })
}

/// `run`: reads a dataset, runs `tag` and writes `nav.csv` (with NIS) and,
/// when the dataset has truth, `errors.csv`.
pub fn run(cfg: &CampaignConfig, data_dir: &Path, tag: Tag, out: &Path) -> Result<RunOutput> {
    let data = read_dataset(data_dir)?;
    let output = run_dataset(&cfg.resolve(), &data, tag, TrialSeed::new(cfg.seed, 0))?;
    mkdir(out)?;
    let nav: Vec<[f64; 11]> = output
        .run
        .epochs
        .iter()
        .map(|e| {
            let a = e.nav.euler();
            let (v, r) = (e.nav.v_wb_w, e.nav.r_wb_w);
            [e.t, a.roll, a.pitch, a.yaw, v.x, v.y, v.z, r.x, r.y, r.z, e.nis]
        })
        .collect();
    write_table(
        &out.join("nav.csv"),
        "nav",
        &[("tag", tag.id().into()), ("units", "s,rad,rad,rad,m/s,m/s,m/s,m,m,m,-".into())],
        &NAV_COLUMNS,
        nav.iter().map(|r| r.as_slice()),
    )?;
    let errors_path = out.join("errors.csv");
    match &output.errors {
        Some(tr) => write_trial(&errors_path, tr)?,
        None => {
            if errors_path.exists() {
                fs::remove_file(&errors_path).map_err(|e| Error::io(&errors_path, e))?;
            }
        }
    }
    Ok(output)
}

pub fn trial_path(dir: &Path, tag: Tag, trial: u64) -> PathBuf {
    dir.join("trials").join(format!("{}_{trial:04}.csv", tag.id()))
}

pub fn series_path(dir: &Path, tag: Tag) -> PathBuf {
    dir.join("series").join(format!("{}.csv", tag.id()))
}

fn summary_text(rows: &[SummaryRow]) -> String {
    let mut s = format!("# se23nav-summary {} units=-,-,-,m,m\n", super::dataset::VERSION);
    s.push_str(&SummaryRow::COLUMNS.join(","));
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.tag.id(), r.tag.display_name(), r.trials, r.rmse, r.final_hpos);
    }
    s
}

/// Writes the summary table, per-tag ensemble series, per-trial series and a
/// config snapshot under `dir`.
pub fn write_campaign(dir: &Path, result: &CampaignResult, cfg: &CampaignConfig) -> Result<()> {
    mkdir(&dir.join("trials"))?;
    mkdir(&dir.join("series"))?;
    let summary = dir.join("summary.csv");
    fs::write(&summary, summary_text(&summarize(result))).map_err(|e| Error::io(&summary, e))?;
    let snapshot = dir.join("config.toml");
    let mut snap = cfg.clone();
    snap.trials = result.m;
    snap.seed = result.base_seed;
    snap.algorithms = result.series.iter().map(|s| s.tag).collect();
    snap.output_dir = dir.to_path_buf();
    fs::write(&snapshot, snap.to_toml()).map_err(|e| Error::io(&snapshot, e))?;

    for s in &result.series {
        let rows: Vec<[f64; 8]> = (0..result.epochs.len())
            .map(|k| {
                let (a, v) = (s.e_att[k], s.e_vel[k]);
                [result.epochs[k], a.x, a.y, a.z, v.x, v.y, v.z, s.e_hpos[k]]
            })
            .collect();
        write_table(
            &series_path(dir, s.tag),
            "series",
            &[
                ("tag", s.tag.id().into()),
                ("trials", result.m.to_string()),
                ("units", SERIES_UNITS.into()),
            ],
            &SERIES_COLUMNS,
            rows.iter().map(|r| r.as_slice()),
        )?;
    }
    for per_trial in &result.trials {
        for tr in per_trial {
            write_trial(&trial_path(dir, tr.tag, tr.seed.trial), tr)?;
        }
    }
    Ok(())
}

/// `campaign`: runs the configured campaign and writes its files to `out`
/// (or the configured output directory).
pub fn campaign(cfg: &CampaignConfig, out: Option<&Path>) -> Result<CampaignResult> {
    let result = run_campaign(&cfg.algorithms, cfg.trials, cfg.seed, &cfg.resolve())?;
    write_campaign(out.unwrap_or(&cfg.output_dir), &result, cfg)?;
    Ok(result)
}

/// `report`: recomputes the summary of a campaign directory from its trial
/// files and writes it to `report.csv`.
pub fn report(dir: &Path) -> Result<Vec<SummaryRow>> {
    let cfg = CampaignConfig::load(&dir.join("config.toml"))?;
    let mut rows = Vec::with_capacity(cfg.algorithms.len());
    for &tag in &cfg.algorithms {
        let trials = (0..cfg.trials as u64)
            .map(|i| read_trial(&trial_path(dir, tag, i), tag))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&TrialResult> = trials.iter().collect();
        let s = aggregate(tag, &refs, cfg.rmse_from_s);
        rows.push(SummaryRow {
            tag,
            trials: trials.len(),
            rmse: s.rmse,
            final_hpos: s.e_hpos.last().copied().unwrap_or(f64::NAN),
        });
    }
    let path = dir.join("report.csv");
    fs::write(&path, summary_text(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// Reads the `e_hpos_rms` column of a series file and recomputes the RMSE
/// over epochs at or after `from`.
pub fn rmse_from_series(path: &Path, from: f64) -> Result<f64> {
    let t = read_table(path, "series", &SERIES_COLUMNS)?;
    let sel: Vec<f64> = t.rows.iter().filter(|r| r[0] >= from - 1e-9).map(|r| r[7] * r[7]).collect();
    Ok((sel.iter().sum::<f64>() / sel.len() as f64).sqrt())
}

/// Formats summary rows as an aligned text table.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!("{:<8} {:<12} {:>6} {:>12} {:>14}\n", "tag", "name", "trials", "rmse_m", "final_rms_m");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:<12} {:>6} {:>12.3} {:>14.3}",
            r.tag.id(),
            r.tag.display_name(),
            r.trials,
            r.rmse,
            r.final_hpos
        );
    }
    s
}
