use std::collections::BTreeMap;

use super::run::RunResult;
use crate::error::{Error, Result};

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trailing moving average; the first `window - 1` points average over
/// what is available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for (i, x) in xs.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_id: String,
    pub agent: String,
    pub param_name: String,
    pub param_value: String,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub outage_rate: f64,
    pub frac_active: f64,
    pub frac_passive: f64,
    pub frac_local: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub config_id: String,
    /// Seed-averaged moving average of per-slot training reward.
    pub smoothed_reward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub summary: Vec<SummaryRow>,
    pub curves: Vec<LearningCurve>,
}

/// Groups runs by configuration (first-appearance order) and reduces them
/// across seeds.
pub fn aggregate(results: &[RunResult], window: usize) -> Result<Aggregate> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        let entry = groups.entry(&r.config_id).or_default();
        if entry.is_empty() {
            order.push(&r.config_id);
        }
        entry.push(r);
    }
    let mut summary = Vec::with_capacity(order.len());
    let mut curves = Vec::with_capacity(order.len());
    for id in order {
        let runs = &groups[id];
        let first = runs[0];
        let col = |f: fn(&RunResult) -> f64| -> Vec<f64> { runs.iter().map(|r| f(r)).collect() };
        let (mean_reward, std_reward) = mean_std(&col(|r| r.summary.mean_reward));
        summary.push(SummaryRow {
            config_id: id.to_string(),
            agent: first.agent.name().to_string(),
            param_name: first.param_name.clone(),
            param_value: first.param_value.clone(),
            mean_reward,
            std_reward,
            outage_rate: mean_std(&col(|r| r.summary.outage_rate)).0,
            frac_active: mean_std(&col(|r| r.summary.frac_active)).0,
            frac_passive: mean_std(&col(|r| r.summary.frac_passive)).0,
            frac_local: mean_std(&col(|r| r.summary.frac_local)).0,
        });

        let len = runs.iter().map(|r| r.training.len()).min().unwrap_or(0);
        let mut mean_curve = vec![0.0; len];
        for r in runs {
            let rewards: Vec<f64> = r.training[..len].iter().map(|m| m.reward).collect();
            for (acc, v) in mean_curve.iter_mut().zip(moving_average(&rewards, window)) {
                *acc += v / runs.len() as f64;
            }
        }
        curves.push(LearningCurve {
            config_id: id.to_string(),
            smoothed_reward: mean_curve,
        });
    }
    Ok(Aggregate { summary, curves })
}
