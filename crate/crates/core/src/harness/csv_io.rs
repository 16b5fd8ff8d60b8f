use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::aggregate::{Aggregate, LearningCurve, SummaryRow};
use super::config::AgentKind;
use super::run::{MetricsRow, RunResult, RunSummary};
use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 15] = [
    "run_id",
    "seed",
    "slot",
    "episode",
    "reward",
    "outage",
    "energy_j",
    "backlog_bits",
    "t_h",
    "t_a",
    "t_p",
    "l_loc",
    "bits_active",
    "bits_passive",
    "bits_local",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "config_id",
    "agent",
    "param_name",
    "param_value",
    "mean_reward",
    "std_reward",
    "outage_rate",
    "frac_active",
    "frac_passive",
    "frac_local",
];

pub const CURVE_HEADER: [&str; 3] = ["config_id", "slot", "smoothed_reward"];

/// `%g`-style formatting with six significant digits.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    Ok(())
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    create_parent(path)?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    Ok(csv::Writer::from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    Ok(csv::Reader::from_reader(file))
}

fn check_header(rdr: &mut csv::Reader<std::fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Shape(format!("{}: unexpected CSV header", path.display())));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Shape(format!("{}: cannot parse `{raw}` in column {}", path.display(), i + 1)))
}

pub fn metrics_record(r: &MetricsRow) -> [String; 15] {
    [
        r.run_id.clone(),
        r.seed.to_string(),
        r.slot.to_string(),
        r.episode.to_string(),
        format_g(r.reward),
        u8::from(r.outage).to_string(),
        format_g(r.energy_j),
        format_g(r.backlog_bits),
        format_g(r.t_h),
        format_g(r.t_a),
        format_g(r.t_p),
        format_g(r.l_loc),
        format_g(r.bits_active),
        format_g(r.bits_passive),
        format_g(r.bits_local),
    ]
}

pub fn write_metrics<'a>(rows: impl IntoIterator<Item = &'a MetricsRow>, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record(metrics_record(r))?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &METRICS_HEADER, path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(MetricsRow {
            run_id: rec.get(0).unwrap_or("").to_string(),
            seed: field(&rec, 1, path)?,
            slot: field(&rec, 2, path)?,
            episode: field(&rec, 3, path)?,
            reward: field(&rec, 4, path)?,
            outage: field::<u8>(&rec, 5, path)? != 0,
            energy_j: field(&rec, 6, path)?,
            backlog_bits: field(&rec, 7, path)?,
            t_h: field(&rec, 8, path)?,
            t_a: field(&rec, 9, path)?,
            t_p: field(&rec, 10, path)?,
            l_loc: field(&rec, 11, path)?,
            bits_active: field(&rec, 12, path)?,
            bits_passive: field(&rec, 13, path)?,
            bits_local: field(&rec, 14, path)?,
        });
    }
    Ok(out)
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.config_id.clone(),
            r.agent.clone(),
            r.param_name.clone(),
            r.param_value.clone(),
            format_g(r.mean_reward),
            format_g(r.std_reward),
            format_g(r.outage_rate),
            format_g(r.frac_active),
            format_g(r.frac_passive),
            format_g(r.frac_local),
        ])?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &SUMMARY_HEADER, path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let text = |i: usize| rec.get(i).unwrap_or("").to_string();
        out.push(SummaryRow {
            config_id: text(0),
            agent: text(1),
            param_name: text(2),
            param_value: text(3),
            mean_reward: field(&rec, 4, path)?,
            std_reward: field(&rec, 5, path)?,
            outage_rate: field(&rec, 6, path)?,
            frac_active: field(&rec, 7, path)?,
            frac_passive: field(&rec, 8, path)?,
            frac_local: field(&rec, 9, path)?,
        });
    }
    Ok(out)
}

pub fn write_curves(curves: &[LearningCurve], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CURVE_HEADER)?;
    for c in curves {
        for (slot, v) in c.smoothed_reward.iter().enumerate() {
            w.write_record([c.config_id.clone(), slot.to_string(), format_g(*v)])?;
        }
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn meta_text(r: &RunResult) -> String {
    [
        ("run_id", r.run_id.clone()),
        ("config_id", r.config_id.clone()),
        ("agent", r.agent.name().to_string()),
        ("seed", r.seed.to_string()),
        ("param_name", r.param_name.clone()),
        ("param_value", r.param_value.clone()),
        ("training_slots", r.training_slots.to_string()),
        ("eval_slots", r.evaluation.len().to_string()),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={v}\n"))
    .collect()
}

/// Writes `runs/<run_id>.csv` with its `.meta` sidecar under `dir`.
pub fn write_run(r: &RunResult, dir: &Path) -> Result<PathBuf> {
    let runs = dir.join("runs");
    let csv_path = runs.join(format!("{}.csv", r.run_id));
    write_metrics(r.rows(), &csv_path)?;
    let meta = runs.join(format!("{}.meta", r.run_id));
    std::fs::write(&meta, meta_text(r)).map_err(|e| Error::io(format!("writing {}", meta.display()), e))?;
    Ok(csv_path)
}

/// Per-run files plus `summary.csv` and `curves.csv`.
pub fn write_results(results: &[RunResult], agg: &Aggregate, dir: &Path) -> Result<()> {
    for r in results {
        write_run(r, dir)?;
    }
    write_summary(&agg.summary, &dir.join("summary.csv"))?;
    write_curves(&agg.curves, &dir.join("curves.csv"))
}

fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// Reloads every run written by [`write_run`] under `dir`, sorted by run id.
pub fn load_runs(dir: &Path) -> Result<Vec<RunResult>> {
    let runs = dir.join("runs");
    let entries = std::fs::read_dir(&runs).map_err(|e| Error::io(format!("listing {}", runs.display()), e))?;
    let mut metas: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "meta"))
        .collect();
    metas.sort();
    let mut out = Vec::with_capacity(metas.len());
    for meta_path in metas {
        let meta = read_meta(&meta_path)?;
        let get = |k: &str| {
            meta.get(k)
                .cloned()
                .ok_or_else(|| Error::Shape(format!("{}: missing `{k}`", meta_path.display())))
        };
        let agent_name = get("agent")?;
        let agent = AgentKind::from_name(&agent_name)
            .ok_or_else(|| Error::Shape(format!("{}: unknown agent `{agent_name}`", meta_path.display())))?;
        let training_slots: u64 = get("training_slots")?
            .parse()
            .map_err(|_| Error::Shape(format!("{}: bad training_slots", meta_path.display())))?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|_| Error::Shape(format!("{}: bad seed", meta_path.display())))?;
        let rows = read_metrics(&meta_path.with_extension("csv"))?;
        let (training, evaluation): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.slot < training_slots);
        out.push(RunResult {
            run_id: get("run_id")?,
            config_id: get("config_id")?,
            agent,
            seed,
            param_name: get("param_name")?,
            param_value: get("param_value")?,
            training_slots,
            summary: RunSummary::from_rows(&evaluation),
            training,
            evaluation,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}
