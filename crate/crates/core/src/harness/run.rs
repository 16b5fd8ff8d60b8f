use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{AgentKind, ExperimentConfig};
use crate::agents::{allocation_from, DdpgAgent, DqnAgent};
use crate::env::{Mode, StepOutcome, SubSlotEnv};
use crate::error::{Error, Result};
use crate::policies::{greedy_policy, random_mode, ActionMask};
use crate::replay::{ActionRepr, Transition};

/// Offset separating the evaluation environment stream from training.
const EVAL_SEED_OFFSET: u64 = 0x5EED_0000_0000;
const AGENT_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// One slot of logged behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub slot: u64,
    pub episode: u64,
    pub reward: f64,
    pub outage: bool,
    pub energy_j: f64,
    pub backlog_bits: f64,
    pub t_h: f64,
    pub t_a: f64,
    pub t_p: f64,
    pub l_loc: f64,
    pub bits_active: f64,
    pub bits_passive: f64,
    pub bits_local: f64,
}

/// Evaluation-phase averages.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSummary {
    pub slots: u64,
    pub mean_reward: f64,
    pub outage_rate: f64,
    /// Shares of processed bits by each path; all zero when nothing was
    /// processed.
    pub frac_active: f64,
    pub frac_passive: f64,
    pub frac_local: f64,
}

impl RunSummary {
    pub fn from_rows(rows: &[MetricsRow]) -> Self {
        if rows.is_empty() {
            return Self::default();
        }
        let n = rows.len() as f64;
        let (mut a, mut p, mut l) = (0.0, 0.0, 0.0);
        for r in rows {
            a += r.bits_active;
            p += r.bits_passive;
            l += r.bits_local;
        }
        let total = a + p + l;
        let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
        Self {
            slots: rows.len() as u64,
            mean_reward: rows.iter().map(|r| r.reward).sum::<f64>() / n,
            outage_rate: rows.iter().filter(|r| r.outage).count() as f64 / n,
            frac_active: frac(a),
            frac_passive: frac(p),
            frac_local: frac(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_id: String,
    pub config_id: String,
    pub agent: AgentKind,
    pub seed: u64,
    pub param_name: String,
    pub param_value: String,
    pub training_slots: u64,
    pub training: Vec<MetricsRow>,
    pub evaluation: Vec<MetricsRow>,
    pub summary: RunSummary,
}

impl RunResult {
    pub fn rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.training.iter().chain(&self.evaluation)
    }
}

enum Controller {
    Dqn(Box<DqnAgent>),
    Ddpg(Box<DdpgAgent>),
    Greedy(ActionMask),
    Random(ActionMask, Box<ChaCha8Rng>),
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    run_id: String,
    seed: u64,
    controller: Controller,
}

impl Runner<'_> {
    fn row(&self, slot: u64, outcome: &StepOutcome) -> MetricsRow {
        let a = outcome.allocation_executed;
        MetricsRow {
            run_id: self.run_id.clone(),
            seed: self.seed,
            slot,
            episode: slot / self.cfg.episode_slots,
            reward: outcome.reward,
            outage: outcome.outage,
            energy_j: outcome.next_state.energy,
            backlog_bits: outcome.next_state.backlog_bits(),
            t_h: a.t_h,
            t_a: a.t_a,
            t_p: a.t_p,
            l_loc: a.l_loc,
            bits_active: outcome.bits_active,
            bits_passive: outcome.bits_passive,
            bits_local: outcome.bits_local,
        }
    }

    /// Advances one full slot, learning along the way when `learn` is set.
    fn slot(&mut self, env: &mut SubSlotEnv, learn: bool) -> Result<StepOutcome> {
        match &mut self.controller {
            Controller::Ddpg(agent) => {
                let features = env.features();
                let action = agent.act(&features, learn)?;
                let outcome = env.step_allocation(&allocation_from(&action))?;
                if learn {
                    agent.train_step(Transition {
                        state: features,
                        action: ActionRepr::Continuous(action.to_vec()),
                        reward: outcome.reward,
                        next_state: env.features(),
                        done: false,
                    })?;
                }
                Ok(outcome)
            }
            Controller::Dqn(agent) => {
                let mut features = env.features();
                loop {
                    let a = if learn {
                        agent.select_action(&features)?
                    } else {
                        agent.greedy_action(&features)?
                    };
                    let step = env.step_mode(Mode::from_index(a)?)?;
                    let next = env.features();
                    if learn {
                        agent.train_step(Transition {
                            state: std::mem::take(&mut features),
                            action: ActionRepr::Discrete(a),
                            reward: step.reward,
                            next_state: next.clone(),
                            done: false,
                        })?;
                    }
                    features = next;
                    if let Some(outcome) = step.slot {
                        return Ok(outcome);
                    }
                }
            }
            Controller::Greedy(mask) => loop {
                let k = env.sub_slots();
                let mode = greedy_policy(env.state(), env.pending(), env.position(), env.models(), mask, k)?;
                if let Some(outcome) = env.step_mode(mode)?.slot {
                    return Ok(outcome);
                }
            },
            Controller::Random(mask, rng) => loop {
                let mode = random_mode(mask, rng);
                if let Some(outcome) = env.step_mode(mode)?.slot {
                    return Ok(outcome);
                }
            },
        }
    }
}

fn agent_seed(seed: u64) -> u64 {
    seed.wrapping_mul(AGENT_SEED_SALT).wrapping_add(1)
}

pub fn run_id(agent: AgentKind, param: Option<(&str, &str)>, seed: u64) -> String {
    format!("{}-s{seed}", config_id(agent, param))
}

pub fn config_id(agent: AgentKind, param: Option<(&str, &str)>) -> String {
    match param {
        Some((name, value)) => format!("{agent}-{name}={value}"),
        None => agent.name().to_string(),
    }
}

/// Trains for `training_slots` (learners only update here), then runs the
/// greedy policy for `eval_slots` on a fresh environment whose random stream
/// depends only on the seed, so every agent faces the same evaluation
/// channel, ambient and arrival sequence.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    run_labelled(cfg, seed, None)
}

pub(crate) fn run_labelled(cfg: &ExperimentConfig, seed: u64, param: Option<(&str, &str)>) -> Result<RunResult> {
    cfg.validate()?;
    let models = cfg.env_models()?;
    let mut env = SubSlotEnv::new(models.clone(), cfg.k, seed)?;
    let controller = match cfg.agent {
        AgentKind::HybridDdpg => Controller::Ddpg(Box::new(DdpgAgent::new(
            cfg.ddpg_config(),
            env.feature_len(),
            agent_seed(seed),
        )?)),
        AgentKind::Greedy => Controller::Greedy(cfg.agent.mask()),
        AgentKind::Random => Controller::Random(cfg.agent.mask(), Box::new(ChaCha8Rng::seed_from_u64(agent_seed(seed)))),
        kind => {
            let variant = kind
                .dqn_variant()
                .ok_or_else(|| Error::config("agent", format!("{kind} is not a discrete learner")))?;
            let agent = DqnAgent::new(
                cfg.dqn_config(variant),
                env.feature_len(),
                Mode::COUNT,
                agent_seed(seed),
            )?
            .with_mask(&kind.mask().bits())?;
            Controller::Dqn(Box::new(agent))
        }
    };
    let mut runner = Runner {
        cfg,
        run_id: run_id(cfg.agent, param, seed),
        seed,
        controller,
    };

    let mut training = Vec::with_capacity(cfg.training_slots as usize);
    for slot in 0..cfg.training_slots {
        let outcome = runner.slot(&mut env, true)?;
        training.push(runner.row(slot, &outcome));
    }

    let mut eval_env = SubSlotEnv::new(models, cfg.k, seed.wrapping_add(EVAL_SEED_OFFSET))?;
    let mut evaluation = Vec::with_capacity(cfg.eval_slots as usize);
    for i in 0..cfg.eval_slots {
        let outcome = runner.slot(&mut eval_env, false)?;
        evaluation.push(runner.row(cfg.training_slots + i, &outcome));
    }

    Ok(RunResult {
        run_id: runner.run_id,
        config_id: config_id(cfg.agent, param),
        agent: cfg.agent,
        seed,
        param_name: param.map(|p| p.0.to_string()).unwrap_or_default(),
        param_value: param.map(|p| p.1.to_string()).unwrap_or_default(),
        training_slots: cfg.training_slots,
        summary: RunSummary::from_rows(&evaluation),
        training,
        evaluation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    AmbientMeanDensity,
    SubSlots,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AmbientMeanDensity => "ambient_mean_density",
            SweepParam::SubSlots => "K",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "ambient_mean_density" => Ok(SweepParam::AmbientMeanDensity),
            "K" => Ok(SweepParam::SubSlots),
            other => Err(Error::config("param", format!("cannot sweep `{other}`"))),
        }
    }
}

/// One run per value per seed (values outer, seeds inner), all other
/// settings shared.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<RunResult>> {
    let mut out = Vec::with_capacity(values.len() * cfg.seeds.len());
    for &v in values {
        let mut c = cfg.clone();
        c.set(param.name(), &v.to_string())?;
        c.validate()?;
        let label = v.to_string();
        for &seed in &cfg.seeds {
            out.push(run_labelled(&c, seed, Some((param.name(), &label)))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(agent: AgentKind) -> ExperimentConfig {
        ExperimentConfig {
            agent,
            training_slots: 60,
            eval_slots: 40,
            seeds: vec![0, 1],
            warmup: 16,
            batch_size: 8,
            hidden_units: vec![8],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn identical_seed_identical_rows() {
        for agent in AgentKind::ALL {
            let cfg = small(agent);
            let a = run_experiment(&cfg, 3).unwrap();
            let b = run_experiment(&cfg, 3).unwrap();
            assert_eq!(a, b, "{agent}");
            assert_eq!(a.training.len(), 60);
            assert_eq!(a.evaluation.len(), 40);
            assert!(a
                .rows()
                .all(|r| r.t_h + r.t_a + r.t_p <= 1.0 + 1e-9 && r.l_loc <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_eval_slots_keeps_training_rows() {
        let mut cfg = small(AgentKind::Random);
        cfg.eval_slots = 0;
        let r = run_experiment(&cfg, 0).unwrap();
        assert_eq!(r.training.len(), 60);
        assert!(r.evaluation.is_empty());
        assert_eq!(r.summary, RunSummary::default());
    }

    #[test]
    fn sweep_cardinality_and_k1_identity() {
        let cfg = small(AgentKind::Greedy);
        assert!(sweep(&cfg, SweepParam::SubSlots, &[]).unwrap().is_empty());
        let rs = sweep(&cfg, SweepParam::AmbientMeanDensity, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(rs.len(), 3 * cfg.seeds.len());

        let one = sweep(&cfg, SweepParam::SubSlots, &[1.0]).unwrap();
        let mut c1 = cfg.clone();
        c1.k = 1;
        for (r, &seed) in one.iter().zip(&cfg.seeds) {
            let direct = run_experiment(&c1, seed).unwrap();
            assert_eq!(r.summary, direct.summary);
            assert_eq!(
                r.rows().map(|x| x.reward).collect::<Vec<_>>(),
                direct.rows().map(|x| x.reward).collect::<Vec<_>>()
            );
        }
        assert!(SweepParam::from_name("gamma").is_err());
    }

    #[test]
    fn summary_fractions() {
        let row = |a: f64, p: f64, l: f64, outage: bool| MetricsRow {
            run_id: "x".into(),
            seed: 0,
            slot: 0,
            episode: 0,
            reward: 1.0,
            outage,
            energy_j: 0.0,
            backlog_bits: 0.0,
            t_h: 0.0,
            t_a: 0.0,
            t_p: 0.0,
            l_loc: 0.0,
            bits_active: a,
            bits_passive: p,
            bits_local: l,
        };
        let s = RunSummary::from_rows(&[row(300.0, 100.0, 0.0, false), row(0.0, 100.0, 500.0, true)]);
        assert!((s.frac_active - 0.3).abs() < 1e-12);
        assert!((s.frac_passive - 0.2).abs() < 1e-12);
        assert!((s.frac_local - 0.5).abs() < 1e-12);
        assert_eq!(s.outage_rate, 0.5);
        assert_eq!(s.mean_reward, 1.0);
    }
}
