//! Measurement routines shared by the focused integration tests and the
//! acceptance report. Each returns the raw statistic; callers decide what
//! passes.

#![allow(dead_code)]

use hybrid_mec::agents::{DqnAgent, DqnConfig, DqnVariant, LinearSchedule};
use hybrid_mec::env::{
    step, ActionAllocation, AmbientDistribution, AmbientPowerModel, ArrivalDistribution, EnvModels, EnvState, Mode,
    Task, WorkloadModel,
};
use hybrid_mec::nn::{Activation, InitScheme, LayerSpec, MlpParams};
use hybrid_mec::policies::{greedy_policy, ActionMask};
use hybrid_mec::replay::{ActionRepr, PrioritizedBuffer, SumTree, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- gradients

const FD_STEP: f64 = 1e-5;
/// Pre-activations this close to a ReLU kink make central differences
/// meaningless, so such inputs are redrawn.
const KINK_MARGIN: f64 = 1e-3;

fn random_net(rng: &mut ChaCha8Rng) -> MlpParams {
    let acts = [
        Activation::Tanh,
        Activation::Sigmoid,
        Activation::Relu,
        Activation::Linear,
    ];
    let depth = rng.random_range(1..=3);
    let mut dims = vec![rng.random_range(1..=5)];
    for _ in 0..depth {
        dims.push(rng.random_range(1..=6));
    }
    let specs: Vec<LayerSpec> = dims
        .windows(2)
        .map(|w| LayerSpec::new(w[0], w[1], acts[rng.random_range(0..acts.len())]))
        .collect();
    let mut net = MlpParams::init(&specs, InitScheme::Xavier, rng).unwrap();
    for p in net.params_mut() {
        *p += rng.random_range(-0.3..0.3);
    }
    net
}

fn near_relu_kink(net: &MlpParams, x: &[f64]) -> bool {
    let mut cur = x.to_vec();
    for layer in net.layers() {
        let n_in = layer.spec.in_dim;
        let mut next = Vec::with_capacity(layer.spec.out_dim);
        for (b, row) in layer.biases.iter().zip(layer.weights.chunks_exact(n_in)) {
            let z = b + row.iter().zip(&cur).map(|(w, xi)| w * xi).sum::<f64>();
            if layer.spec.activation == Activation::Relu && z.abs() < KINK_MARGIN {
                return true;
            }
            next.push(match layer.spec.activation {
                Activation::Relu => z.max(0.0),
                Activation::Tanh => z.tanh(),
                Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
                Activation::Linear => z,
            });
        }
        cur = next;
    }
    false
}

fn scalar_loss(net: &MlpParams, x: &[f64], probe: &[f64]) -> f64 {
    net.predict(x).unwrap().iter().zip(probe).map(|(y, c)| y * c).sum()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Worst relative error between backprop and central differences over
/// `nets` random networks, covering parameter and input gradients.
pub fn gradient_check(nets: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..nets {
        let mut net = random_net(&mut rng);
        let x = loop {
            let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
            if !near_relu_kink(&net, &x) {
                break x;
            }
        };
        let probe: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, cache) = net.forward(&x).unwrap();
        let (grads, dx) = net.backward(&cache, &probe).unwrap();
        let analytic: Vec<f64> = grads.values().copied().collect();

        for (k, a) in analytic.iter().enumerate() {
            let orig = *net.params().nth(k).unwrap();
            *net.params_mut().nth(k).unwrap() = orig + FD_STEP;
            let up = scalar_loss(&net, &x, &probe);
            *net.params_mut().nth(k).unwrap() = orig - FD_STEP;
            let down = scalar_loss(&net, &x, &probe);
            *net.params_mut().nth(k).unwrap() = orig;
            worst = worst.max(rel_err((up - down) / (2.0 * FD_STEP), *a));
        }
        for (i, a) in dx.iter().enumerate() {
            let mut xp = x.clone();
            xp[i] += FD_STEP;
            let mut xm = x.clone();
            xm[i] -= FD_STEP;
            let numeric = (scalar_loss(&net, &xp, &probe) - scalar_loss(&net, &xm, &probe)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(numeric, *a));
        }
    }
    worst
}

// ---------------------------------------------------------------------- PER

fn dummy(i: usize) -> Transition {
    Transition {
        state: vec![i as f64],
        action: ActionRepr::Discrete(0),
        reward: 0.0,
        next_state: vec![0.0],
        done: false,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PerStats {
    /// Largest |observed - expected| count over its binomial sigma.
    pub max_z: f64,
    /// Largest |root - leaf sum| seen during the fuzz.
    pub max_root_drift: f64,
    /// Samples that pointed at an unoccupied slot.
    pub out_of_range: usize,
    /// Largest z-score when alpha = 0 against the uniform law.
    pub uniform_max_z: f64,
}

fn z_scores(counts: &[usize], probs: &[f64], draws: usize) -> f64 {
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let mean = draws as f64 * p;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            if sd > 0.0 {
                (c as f64 - mean).abs() / sd
            } else if c as f64 == mean {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

pub fn per_statistics(draws: usize, fuzz_updates: usize, seed: u64) -> PerStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = 0.6;

    // Multinomial agreement on a partly filled buffer.
    let (capacity, filled) = (16, 11);
    let mut buf = PrioritizedBuffer::new(capacity, alpha, 0.4, 1e-3).unwrap();
    for i in 0..filled {
        buf.push(dummy(i));
    }
    let tds: Vec<f64> = (0..filled).map(|_| rng.random_range(0.0..3.0)).collect();
    buf.update(&(0..filled).collect::<Vec<_>>(), &tds).unwrap();
    let weights: Vec<f64> = tds.iter().map(|td| (td + 1e-3_f64).powf(alpha)).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut counts = vec![0usize; filled];
    let mut out_of_range = 0;
    for _ in 0..draws {
        let idx = buf.sample(1, &mut rng).unwrap().indices[0];
        if idx >= filled {
            out_of_range += 1;
        } else {
            counts[idx] += 1;
        }
    }
    let max_z = z_scores(&counts, &probs, draws);

    // Fuzzed tree updates against a brute-force sum.
    let mut tree = SumTree::new(100);
    let mut leaves = vec![0.0; tree.capacity()];
    let mut max_root_drift: f64 = 0.0;
    for _ in 0..fuzz_updates {
        let i = rng.random_range(0..tree.capacity());
        let v = if rng.random_bool(0.1) {
            0.0
        } else {
            rng.random_range(0.0..10.0)
        };
        tree.set(i, v);
        leaves[i] = v;
        max_root_drift = max_root_drift.max((tree.total() - leaves.iter().sum::<f64>()).abs());
        for _ in 0..4 {
            let idx = tree.find(rng.random::<f64>() * tree.total());
            if tree.total() > 0.0 && tree.leaf(idx) <= 0.0 {
                out_of_range += 1;
            }
        }
    }

    // Ring buffer wrap-around: samples only hit occupied slots.
    let mut ring = PrioritizedBuffer::new(8, alpha, 0.4, 1e-3).unwrap();
    for i in 0..20 {
        ring.push(dummy(i));
        for _ in 0..200 {
            let s = ring.sample(4, &mut rng).unwrap();
            out_of_range += s.indices.iter().filter(|&&j| j >= ring.len()).count();
        }
    }

    // alpha = 0 ignores priorities entirely.
    let n = 10;
    let mut flat = PrioritizedBuffer::new(n, 0.0, 0.4, 1e-3).unwrap();
    for i in 0..n {
        flat.push(dummy(i));
    }
    let tds: Vec<f64> = (0..n).map(|i| i as f64 * 5.0).collect();
    flat.update(&(0..n).collect::<Vec<_>>(), &tds).unwrap();
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        counts[flat.sample(1, &mut rng).unwrap().indices[0]] += 1;
    }
    let uniform_max_z = z_scores(&counts, &vec![1.0 / n as f64; n], draws);

    PerStats {
        max_z,
        max_root_drift,
        out_of_range,
        uniform_max_z,
    }
}

// ------------------------------------------------------------------ tiny MDP

pub const TINY_STATES: usize = 3;
pub const TINY_ACTIONS: usize = 2;
pub const TINY_GAMMA: f64 = 0.9;

/// Deterministic test MDP: `(next_state, reward)` for each (state, action).
/// The best play walks 0 -> 1 -> 2 -> 0 to collect the large reward in 2;
/// action 1 in state 0 is a tempting self-loop.
pub const TINY_MDP: [[(usize, f64); TINY_ACTIONS]; TINY_STATES] =
    [[(1, 0.0), (0, 1.0)], [(2, 0.0), (0, 0.5)], [(0, 5.0), (2, 0.5)]];

pub fn value_iteration() -> [[f64; TINY_ACTIONS]; TINY_STATES] {
    let mut q = [[0.0_f64; TINY_ACTIONS]; TINY_STATES];
    for _ in 0..2000 {
        let v: Vec<f64> = q.iter().map(|row| row[0].max(row[1])).collect();
        for (s, row) in TINY_MDP.iter().enumerate() {
            for (a, &(next, r)) in row.iter().enumerate() {
                q[s][a] = r + TINY_GAMMA * v[next];
            }
        }
    }
    q
}

fn one_hot(s: usize) -> Vec<f64> {
    let mut v = vec![0.0; TINY_STATES];
    v[s] = 1.0;
    v
}

#[derive(Debug, Clone)]
pub struct TinyMdpOutcome {
    pub policy_match: bool,
    /// Largest relative Q error over visited state-action pairs.
    pub max_q_rel_err: f64,
}

impl TinyMdpOutcome {
    pub fn passed(&self) -> bool {
        self.policy_match && self.max_q_rel_err <= 0.10
    }
}

pub fn tiny_mdp_config(variant: DqnVariant) -> DqnConfig {
    DqnConfig {
        variant,
        gamma: TINY_GAMMA,
        epsilon: LinearSchedule::new(1.0, 0.2, 10_000),
        target_sync_period: 200,
        batch_size: 32,
        learning_rate: 1e-3,
        use_per: false,
        replay_capacity: 10_000,
        hidden: vec![32, 32],
        warmup: 200,
        train_every: 1,
        ..DqnConfig::default()
    }
}

pub fn train_tiny_mdp(variant: DqnVariant, steps: usize, seed: u64) -> TinyMdpOutcome {
    let oracle = value_iteration();
    let mut agent = DqnAgent::new(tiny_mdp_config(variant), TINY_STATES, TINY_ACTIONS, seed).unwrap();
    let mut visited = [[false; TINY_ACTIONS]; TINY_STATES];
    let mut s = 0;
    for _ in 0..steps {
        let a = agent.select_action(&one_hot(s)).unwrap();
        let (next, r) = TINY_MDP[s][a];
        visited[s][a] = true;
        agent
            .train_step(Transition {
                state: one_hot(s),
                action: ActionRepr::Discrete(a),
                reward: r,
                next_state: one_hot(next),
                done: false,
            })
            .unwrap();
        s = next;
    }
    let mut policy_match = true;
    let mut max_q_rel_err: f64 = 0.0;
    for (st, row) in oracle.iter().enumerate() {
        let q = agent.q_values(&one_hot(st)).unwrap();
        let best = if row[1] > row[0] { 1 } else { 0 };
        policy_match &= agent.greedy_action(&one_hot(st)).unwrap() == best;
        for a in 0..TINY_ACTIONS {
            if visited[st][a] {
                max_q_rel_err = max_q_rel_err.max((q[a] - row[a]).abs() / row[a].abs().max(1e-9));
            }
        }
    }
    TinyMdpOutcome {
        policy_match,
        max_q_rel_err,
    }
}

// ------------------------------------------------------------- environment

/// Model variants exercised by the fuzz: the defaults plus corners with
/// random arrivals, constant or absent ambient power and a one-slot
/// deadline.
pub fn fuzz_models() -> Vec<EnvModels> {
    let base = EnvModels::default();
    let mut uniform = base.clone();
    uniform.workload = WorkloadModel {
        arrival: ArrivalDistribution::Uniform { low: 0.0, high: 3000.0 },
        deadline_slots: 3,
    };
    uniform.ambient = AmbientPowerModel {
        mean_density: 0.5,
        distribution: AmbientDistribution::Uniform { spread: 1.0 },
    };
    let mut tight = base.clone();
    tight.workload.deadline_slots = 1;
    tight.ambient = AmbientPowerModel {
        mean_density: 0.0,
        distribution: AmbientDistribution::Constant,
    };
    tight.initial_energy = 0.0;
    let mut rich = base.clone();
    rich.ambient.mean_density = 5.0;
    rich.battery_capacity = 0.05;
    rich.initial_energy = 0.05;
    vec![base, uniform, tight, rich]
}

pub fn random_allocation(rng: &mut ChaCha8Rng) -> ActionAllocation {
    // Uniform on the simplex corner, with exact zeros now and then.
    let mut cuts = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
    cuts.sort_by(f64::total_cmp);
    let scale = if rng.random_bool(0.2) { 1.0 } else { rng.random::<f64>() };
    let mut a = ActionAllocation {
        t_h: cuts[0] * scale,
        t_a: (cuts[1] - cuts[0]) * scale,
        t_p: (cuts[2] - cuts[1]) * scale,
        l_loc: rng.random::<f64>(),
    };
    for share in [&mut a.t_h, &mut a.t_a, &mut a.t_p, &mut a.l_loc] {
        if rng.random_bool(0.15) {
            *share = 0.0;
        }
    }
    a
}

/// Checks one transition; returns a description of the first violation.
pub fn check_transition(
    models: &EnvModels,
    before: &EnvState,
    action: &ActionAllocation,
    out: &hybrid_mec::env::StepOutcome,
) -> Result<(), String> {
    let tol = 1e-9;
    let after = &out.next_state;
    let cap = models.battery_capacity;
    if !(after.energy >= 0.0 && after.energy <= cap + tol) {
        return Err(format!("energy {} outside [0, {cap}]", after.energy));
    }
    if out.energy_spent < -tol || out.energy_spent > before.energy + out.energy_harvested + tol {
        return Err(format!("spent {} exceeds budget", out.energy_spent));
    }
    let expected_energy = (before.energy + out.energy_harvested - out.energy_spent).clamp(0.0, cap);
    if (after.energy - expected_energy).abs() > tol {
        return Err(format!(
            "energy {} but bookkeeping gives {expected_energy}",
            after.energy
        ));
    }
    let ex = &out.allocation_executed;
    if ex.t_h != action.t_h
        || ex.t_a > action.t_a + tol
        || ex.t_p > action.t_p + tol
        || ex.l_loc > action.l_loc + tol
        || !ex.is_valid()
    {
        return Err(format!("executed {ex:?} not within requested {action:?}"));
    }
    let phy = &models.phy;
    if out.bits_active > phy.active_rate * ex.t_a + tol
        || out.bits_passive > phy.passive_rate * ex.t_p + tol
        || out.bits_local > phy.local_cpu_rate * ex.l_loc + 1e-6
    {
        return Err("bits exceed executed capacity".into());
    }
    let processed = out.bits_active + out.bits_passive + out.bits_local;
    if (processed - out.processed_bits).abs() > 1e-6 || processed > before.backlog_bits() + 1e-6 {
        return Err(format!(
            "processed {processed} inconsistent with backlog {}",
            before.backlog_bits()
        ));
    }
    let d = models.workload.deadline_slots;
    if after.backlog.len() > d as usize {
        return Err(format!("{} queued tasks with deadline {d}", after.backlog.len()));
    }
    for w in after.backlog.windows(2) {
        if w[0].slots_left > w[1].slots_left {
            return Err("backlog not ordered by deadline".into());
        }
    }
    if after
        .backlog
        .iter()
        .any(|t| !(t.bits > 0.0) || t.slots_left == 0 || t.slots_left > d)
    {
        return Err(format!("bad task in {:?}", after.backlog));
    }
    // Work is conserved: served + dropped + carried = queued + arrived.
    let arrived = after
        .backlog
        .last()
        .filter(|t| t.slots_left == d)
        .map_or(0.0, |t| t.bits);
    let carried = after.backlog_bits() - arrived;
    let dropped = before.backlog_bits() - processed - carried;
    if dropped < -1e-6 {
        return Err(format!("negative dropped work {dropped}"));
    }
    if (dropped > 1e-6) != out.outage {
        return Err(format!("dropped {dropped} bits but outage = {}", out.outage));
    }
    let zero = out.outage || processed <= 0.0;
    if zero != (out.reward == 0.0) {
        return Err(format!(
            "reward {} with outage {} and {processed} bits",
            out.reward, out.outage
        ));
    }
    if !zero {
        let expected = processed / (out.energy_spent + models.reward.energy_floor) * models.reward.scale;
        if (out.reward - expected).abs() > 1e-9 * expected.abs().max(1.0) {
            return Err(format!("reward {} != {expected}", out.reward));
        }
    }
    if after.channel_state >= models.channel.num_states() || after.slot_index != before.slot_index + 1 {
        return Err("channel or slot index out of range".into());
    }
    Ok(())
}

/// Steps every fuzz model with random feasible actions, replaying each
/// step from a cloned generator to confirm determinism. Returns the number
/// of steps taken and the violations found (at most a handful reported).
pub fn env_fuzz(total_steps: usize, seed: u64) -> (usize, Vec<String>) {
    let models = fuzz_models();
    let per_model = total_steps.div_ceil(models.len());
    let mut violations = Vec::new();
    let mut taken = 0;
    for (m, model) in models.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64) << 32);
        let mut action_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(m as u64 + 1));
        let mut state = hybrid_mec::env::reset_with(model, &mut rng).unwrap();
        for i in 0..per_model {
            let action = random_allocation(&mut action_rng);
            let mut replay = rng.clone();
            let out = step(&state, &action, model, &mut rng).unwrap();
            taken += 1;
            if i % 7 == 0 {
                let again = step(&state, &action, model, &mut replay).unwrap();
                if again != out {
                    violations.push(format!("model {m} step {i}: replay differs"));
                }
            }
            if let Err(e) = check_transition(model, &state, &action, &out) {
                violations.push(format!("model {m} step {i}: {e}"));
            }
            if violations.len() >= 10 {
                return (taken, violations);
            }
            state = if i % 200 == 199 {
                hybrid_mec::env::reset_with(model, &mut rng).unwrap()
            } else {
                out.next_state
            };
        }
    }
    (taken, violations)
}

// ------------------------------------------------------------ greedy oracle

/// Independent slot evaluation used by the brute-force greedy oracle.
fn brute_slot_reward(state: &EnvState, alloc: &ActionAllocation, models: &EnvModels) -> f64 {
    let phy = &models.phy;
    let g = models.channel.gain(state.channel_state);
    let t = phy.slot_seconds;
    let ambient = models.ambient.mean_density;
    let harvested = phy.harvest_efficiency * (phy.hbs_tx_power * g + ambient) * alloc.t_h * t;
    let budget = state.energy + harvested;
    let queued: f64 = state.backlog.iter().map(|x| x.bits).sum();

    let p_active = phy.noise_power * (2f64.powf(phy.active_rate / t / phy.bandwidth) - 1.0) / g;
    let mut t_a = if p_active > phy.max_active_tx_power {
        0.0
    } else {
        alloc.t_a
    };
    let mut t_p = alloc.t_p;
    let mut e_a = p_active * t_a * t;
    let mut e_p = phy.passive_circuit_power * t_p * t;
    let mut local = (phy.local_cpu_rate * alloc.l_loc).min(queued);
    let mut e_l = phy.local_energy_per_bit * local;
    let mut over = e_a + e_p + e_l - budget;
    if over > 0.0 && e_a > 0.0 {
        let c = over.min(e_a);
        t_a *= (e_a - c) / e_a;
        e_a -= c;
        over -= c;
    }
    if over > 0.0 && e_p > 0.0 {
        let c = over.min(e_p);
        t_p *= (e_p - c) / e_p;
        e_p -= c;
        over -= c;
    }
    if over > 0.0 && e_l > 0.0 {
        let c = over.min(e_l);
        e_l -= c;
        local = e_l / phy.local_energy_per_bit;
    }
    let spent = (e_a + e_p + e_l).min(budget);

    let mut left = queued;
    let mut served = 0.0;
    for cap in [phy.active_rate * t_a, phy.passive_rate * t_p, local] {
        let b = cap.min(left).max(0.0);
        left -= b;
        served += b;
    }
    let mut drain = served;
    let mut outage = false;
    for task in &state.backlog {
        let done = drain.min(task.bits);
        drain -= done;
        if task.bits - done > 1e-9 && task.slots_left <= 1 {
            outage = true;
        }
    }
    if outage || served <= 0.0 {
        0.0
    } else {
        served / (spent + models.reward.energy_floor) * models.reward.scale
    }
}

fn brute_clamp(a: ActionAllocation) -> ActionAllocation {
    let mut a = ActionAllocation {
        t_h: a.t_h.clamp(0.0, 1.0),
        t_a: a.t_a.clamp(0.0, 1.0),
        t_p: a.t_p.clamp(0.0, 1.0),
        l_loc: a.l_loc.clamp(0.0, 1.0),
    };
    let radio = a.t_h + a.t_a + a.t_p;
    if radio > 1.0 {
        a.t_h /= radio;
        a.t_a /= radio;
        a.t_p /= radio;
    }
    a
}

/// Tries every allowed mode for the rest of the slot; earliest mode wins ties.
pub fn brute_force_greedy(
    state: &EnvState,
    pending: &ActionAllocation,
    position: usize,
    models: &EnvModels,
    mask: &ActionMask,
    k: usize,
) -> Mode {
    let rest = (k - position) as f64 / k as f64;
    let mut best = None;
    let mut best_r = f64::NEG_INFINITY;
    for mode in Mode::ALL {
        if !mask.allows(mode) {
            continue;
        }
        let mut a = *pending;
        match mode {
            Mode::Harvest => a.t_h += rest,
            Mode::Active => a.t_a += rest,
            Mode::Passive => a.t_p += rest,
            Mode::Local => a.l_loc += rest,
        }
        let r = brute_slot_reward(state, &brute_clamp(a), models);
        if r > best_r {
            best_r = r;
            best = Some(mode);
        }
    }
    best.expect("mask allows at least one mode")
}

pub fn random_greedy_case(
    rng: &mut ChaCha8Rng,
    models: &EnvModels,
) -> (EnvState, ActionAllocation, usize, ActionMask, usize) {
    let k = [1, 2, 3, 4, 8][rng.random_range(0..5)];
    let position = rng.random_range(0..k);
    let mut pending = ActionAllocation::IDLE;
    for _ in 0..position {
        let share = 1.0 / k as f64;
        match Mode::ALL[rng.random_range(0..4)] {
            Mode::Harvest => pending.t_h += share,
            Mode::Active => pending.t_a += share,
            Mode::Passive => pending.t_p += share,
            Mode::Local => pending.l_loc += share,
        }
    }
    let d = models.workload.deadline_slots;
    let mut backlog = Vec::new();
    for slots_left in 1..=d {
        if rng.random_bool(0.7) {
            backlog.push(Task {
                bits: rng.random_range(1.0..3000.0),
                slots_left,
            });
        }
    }
    let state = EnvState {
        channel_state: rng.random_range(0..models.channel.num_states()),
        energy: if rng.random_bool(0.1) {
            0.0
        } else {
            rng.random_range(0.0..models.battery_capacity)
        },
        backlog,
        slot_index: rng.random_range(0..10_000),
    };
    let modes: Vec<Mode> = loop {
        let m: Vec<Mode> = Mode::ALL.into_iter().filter(|_| rng.random_bool(0.7)).collect();
        if !m.is_empty() {
            break m;
        }
    };
    (state, pending, position, ActionMask::new(&modes).unwrap(), k)
}

/// Number of disagreements between `greedy_policy` and the brute-force
/// oracle over `cases` random states drawn across a few model variants.
pub fn greedy_mismatches(cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut variants = fuzz_models();
    let mut scarce = EnvModels::default();
    scarce.ambient.mean_density = 0.01;
    scarce.battery_capacity = 0.02;
    scarce.initial_energy = 0.01;
    variants.push(scarce);
    let mut mismatches = 0;
    for i in 0..cases {
        let models = &variants[i % variants.len()];
        let (state, pending, position, mask, k) = random_greedy_case(&mut rng, models);
        let got = greedy_policy(&state, &pending, position, models, &mask, k).unwrap();
        if got != brute_force_greedy(&state, &pending, position, models, &mask, k) {
            mismatches += 1;
        }
    }
    mismatches
}
