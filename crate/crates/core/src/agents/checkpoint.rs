//! Agent checkpoints: one text file per network plus a `meta.txt` of
//! `key=value` lines.

use std::collections::BTreeMap;
use std::path::Path;

use super::ddpg::DdpgAgent;
use super::dqn::DqnAgent;
use super::qnet::QNetwork;
use crate::error::{Error, Result};
use crate::nn::io;
use crate::nn::MlpParams;

fn write_meta(dir: &Path, entries: &[(&str, String)]) -> Result<()> {
    let text: String = entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let path = dir.join("meta.txt");
    std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_meta(dir: &Path) -> Result<BTreeMap<String, String>> {
    let path = dir.join("meta.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut map = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Shape(format!("checkpoint meta line `{line}` lacks `=`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_value<'a>(meta: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    meta.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Shape(format!("checkpoint meta lacks `{key}`")))
}

fn meta_u64(meta: &BTreeMap<String, String>, key: &str) -> Result<u64> {
    let v = meta_value(meta, key)?;
    v.parse()
        .map_err(|_| Error::Shape(format!("checkpoint meta `{key}={v}` is not an integer")))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn save_q(net: &QNetwork, dir: &Path, prefix: &str) -> Result<()> {
    for (i, p) in net.parts().into_iter().enumerate() {
        io::save(p, &dir.join(format!("{prefix}_{i}.txt")))?;
    }
    Ok(())
}

fn load_q(dir: &Path, prefix: &str, parts: usize) -> Result<QNetwork> {
    let nets: Vec<MlpParams> = (0..parts)
        .map(|i| io::load(&dir.join(format!("{prefix}_{i}.txt"))))
        .collect::<Result<_>>()?;
    QNetwork::from_parts(nets)
}

pub fn save_dqn(agent: &DqnAgent, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    save_q(agent.online(), dir, "online")?;
    save_q(agent.target(), dir, "target")?;
    write_meta(
        dir,
        &[
            ("kind", "dqn".into()),
            ("variant", agent.config().variant.name().into()),
            ("parts", agent.online().parts().len().to_string()),
            ("steps", agent.steps().to_string()),
        ],
    )
}

/// Restores networks and the step counter into an agent built with the same
/// configuration. Optimizer moments and replay contents are not saved.
pub fn load_dqn(agent: &mut DqnAgent, dir: &Path) -> Result<()> {
    let meta = read_meta(dir)?;
    if meta_value(&meta, "kind")? != "dqn" {
        return Err(Error::Shape("checkpoint is not a DQN checkpoint".into()));
    }
    if meta_value(&meta, "variant")? != agent.config().variant.name() {
        return Err(Error::Shape("checkpoint variant differs from the agent".into()));
    }
    let parts = meta_u64(&meta, "parts")? as usize;
    let online = load_q(dir, "online", parts)?;
    let target = load_q(dir, "target", parts)?;
    agent.set_networks(online, target)?;
    agent.set_steps(meta_u64(&meta, "steps")?);
    Ok(())
}

pub fn save_ddpg(agent: &DdpgAgent, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    io::save(agent.actor(), &dir.join("actor.txt"))?;
    io::save(agent.critic(), &dir.join("critic.txt"))?;
    io::save(agent.actor_target(), &dir.join("actor_target.txt"))?;
    io::save(agent.critic_target(), &dir.join("critic_target.txt"))?;
    write_meta(dir, &[("kind", "ddpg".into()), ("steps", agent.steps().to_string())])
}

pub fn load_ddpg(agent: &mut DdpgAgent, dir: &Path) -> Result<()> {
    let meta = read_meta(dir)?;
    if meta_value(&meta, "kind")? != "ddpg" {
        return Err(Error::Shape("checkpoint is not a DDPG checkpoint".into()));
    }
    agent.set_networks(
        io::load(&dir.join("actor.txt"))?,
        io::load(&dir.join("critic.txt"))?,
        io::load(&dir.join("actor_target.txt"))?,
        io::load(&dir.join("critic_target.txt"))?,
    )?;
    agent.set_steps(meta_u64(&meta, "steps")?);
    Ok(())
}
