//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Takes several minutes in release mode:
//!
//!     cargo test --release -p hybrid-mec --test acceptance

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hybrid_mec::agents::DqnVariant;
use hybrid_mec::harness::{mean_std, run_experiment, sweep, AgentKind, ExperimentConfig, RunSummary, SweepParam};

const SEEDS: u64 = 10;
const AMBIENT_SWEEP: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        let line = format!("[{}] criterion {id:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, pass, line));
    }
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        seeds: (0..SEEDS).collect(),
        ..ExperimentConfig::default()
    }
}

fn run_agent(cfg: &ExperimentConfig, agent: AgentKind) -> Vec<RunSummary> {
    let mut c = cfg.clone();
    c.agent = agent;
    c.validate().expect("acceptance config is valid");
    c.seeds
        .iter()
        .map(|&s| run_experiment(&c, s).expect("run succeeds").summary)
        .collect()
}

fn rewards(runs: &[RunSummary]) -> Vec<f64> {
    runs.iter().map(|r| r.mean_reward).collect()
}

fn wins(a: &[f64], b: &[f64]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x > y).count()
}

/// Standard error of the difference of two seed means with pooled variance.
fn pooled_se(a: &[f64], b: &[f64]) -> f64 {
    let (_, sa) = mean_std(a);
    let (_, sb) = mean_std(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0);
    (pooled * (1.0 / na + 1.0 / nb)).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    mean_std(xs).0
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn experiment_criteria(report: &mut Report) {
    let cfg = base_config();
    let start = Instant::now();
    let dqn = run_agent(&cfg, AgentKind::HybridDqn);
    let active = run_agent(&cfg, AgentKind::ActiveOffload);
    let greedy = run_agent(&cfg, AgentKind::Greedy);
    let random = run_agent(&cfg, AgentKind::Random);
    let elapsed = start.elapsed();
    let (rd, ra, rg, rr) = (rewards(&dqn), rewards(&active), rewards(&greedy), rewards(&random));
    let (w_da, w_dg, w_gr) = (wins(&rd, &ra), wins(&rd, &rg), wins(&rg, &rr));
    report.record(
        1,
        w_da >= 8 && w_dg >= 8 && w_gr >= 8 && elapsed < Duration::from_secs(15 * 60),
        format!(
            "dqn>active {w_da}/10, dqn>greedy {w_dg}/10, greedy>random {w_gr}/10, {:.0}s \
             (means dqn {:.3} active {:.3} greedy {:.3} random {:.3})",
            elapsed.as_secs_f64(),
            mean(&rd),
            mean(&ra),
            mean(&rg),
            mean(&rr)
        ),
    );

    let w_ga = wins(&rg, &ra);
    report.record(2, w_ga >= 7, format!("greedy>active {w_ga}/10"));

    let no_worse = dqn
        .iter()
        .zip(&active)
        .filter(|(d, a)| d.outage_rate <= a.outage_rate)
        .count();
    let outage = |rs: &[RunSummary]| mean(&rs.iter().map(|r| r.outage_rate).collect::<Vec<_>>());
    report.record(
        3,
        no_worse >= 8,
        format!(
            "dqn outage <= active outage {no_worse}/10 (means {:.3} vs {:.3})",
            outage(&dqn),
            outage(&active)
        ),
    );

    let by_k: Vec<Vec<f64>> = [1usize, 2]
        .iter()
        .map(|&k| {
            let mut c = cfg.clone();
            c.k = k;
            rewards(&run_agent(&c, AgentKind::HybridDqn))
        })
        .chain(std::iter::once(rd.clone()))
        .collect();
    let monotone = by_k
        .windows(2)
        .all(|w| mean(&w[1]) >= mean(&w[0]) - pooled_se(&w[0], &w[1]));
    let w_41 = wins(&by_k[2], &by_k[0]);
    report.record(
        4,
        monotone && w_41 >= 8,
        format!(
            "mean reward K=1,2,4: {}; nondecreasing within SE {monotone}; K4>K1 {w_41}/10",
            fmt_list(&by_k.iter().map(|r| mean(r)).collect::<Vec<_>>())
        ),
    );

    let ddpg = rewards(&run_agent(&cfg, AgentKind::HybridDdpg));
    let w_pd = ddpg.iter().zip(&rd).filter(|(p, d)| p >= d).count();
    report.record(
        5,
        w_pd >= 7,
        format!("ddpg>=dqn {w_pd}/10 (means {:.3} vs {:.3})", mean(&ddpg), mean(&rd)),
    );

    let results = sweep(&cfg, SweepParam::AmbientMeanDensity, &AMBIENT_SWEEP).expect("sweep succeeds");
    let per_value: Vec<&[_]> = results.chunks(cfg.seeds.len()).collect();
    let active_frac: Vec<Vec<f64>> = per_value
        .iter()
        .map(|rs| rs.iter().map(|r| r.summary.frac_active).collect())
        .collect();
    let passive_frac: Vec<Vec<f64>> = per_value
        .iter()
        .map(|rs| rs.iter().map(|r| r.summary.frac_passive).collect())
        .collect();
    let last = AMBIENT_SWEEP.len() - 1;
    let low = mean(&passive_frac[0]) > mean(&active_frac[0]);
    let high = mean(&active_frac[last]) > mean(&passive_frac[last]);
    let trend = active_frac
        .windows(2)
        .all(|w| mean(&w[1]) >= mean(&w[0]) - pooled_se(&w[0], &w[1]));
    report.record(
        6,
        low && high && trend,
        format!(
            "ambient {:?}: active share {}; passive share {}; passive>active at low {low}, \
             active>passive at high {high}, nondecreasing within SE {trend}",
            AMBIENT_SWEEP,
            fmt_list(&active_frac.iter().map(|f| mean(f)).collect::<Vec<_>>()),
            fmt_list(&passive_frac.iter().map(|f| mean(f)).collect::<Vec<_>>())
        ),
    );
}

fn correctness_criteria(report: &mut Report) {
    let start = Instant::now();
    let err = common::gradient_check(200, 7);
    let elapsed = start.elapsed();
    report.record(
        7,
        err < 1e-4 && elapsed < Duration::from_secs(10),
        format!(
            "max relative gradient error {err:.2e} over 200 nets in {:.1} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    );

    let stats = common::per_statistics(100_000, 1_000, 11);
    report.record(
        8,
        stats.max_z < 3.0 && stats.max_root_drift < 1e-9 && stats.out_of_range == 0,
        format!(
            "max |z| {:.2} over 1e5 draws, root drift {:.1e} after 1e3 updates, {} out-of-range samples",
            stats.max_z, stats.max_root_drift, stats.out_of_range
        ),
    );

    let start = Instant::now();
    let mut parts = Vec::new();
    let mut all = true;
    for variant in [DqnVariant::Plain, DqnVariant::Double, DqnVariant::DuelingDouble] {
        let ok = (0..10)
            .filter(|&seed| common::train_tiny_mdp(variant, 20_000, seed).passed())
            .count();
        all &= ok >= 9;
        parts.push(format!("{variant:?} {ok}/10"));
    }
    let elapsed = start.elapsed();
    report.record(
        9,
        all && elapsed < Duration::from_secs(120),
        format!("tiny MDP {} in {:.1}s", parts.join(", "), elapsed.as_secs_f64()),
    );

    let (steps, violations) = common::env_fuzz(1_000_000, 3);
    for v in violations.iter().take(5) {
        println!("    violation: {v}");
    }
    report.record(
        10,
        steps >= 1_000_000 && violations.is_empty(),
        format!("{steps} fuzzed steps, {} invariant violations", violations.len()),
    );

    let mismatches = common::greedy_mismatches(10_000, 5);
    report.record(
        11,
        mismatches == 0,
        format!("greedy vs brute force: {mismatches} mismatches in 1e4 states"),
    );
}

fn main() -> ExitCode {
    let mut report = Report { lines: Vec::new() };
    correctness_criteria(&mut report);
    experiment_criteria(&mut report);
    report.lines.sort_by_key(|(id, _, _)| *id);
    println!("\nsummary");
    for (_, _, line) in &report.lines {
        println!("{line}");
    }
    let passed = report.lines.iter().filter(|(_, p, _)| *p).count();
    println!("{passed}/{} criteria passed", report.lines.len());
    if passed == report.lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
