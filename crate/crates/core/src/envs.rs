//! Seeded environment generators.

use std::collections::HashMap;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::mdp::{EnvBuilder, Environment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("unknown generator `{0}`")]
    Unknown(String),
    #[error("bad parameter `{0}`")]
    BadParameter(String),
    #[error("parameter {name} must be in {range}")]
    OutOfRange { name: &'static str, range: &'static str },
}

/// Complete tree with two actions and two successors per action.
pub fn random_binary_tree(depth: u32, d: usize, seed: u64) -> Result<Environment, GeneratorError> {
    if depth > 12 {
        return Err(GeneratorError::OutOfRange { name: "depth", range: "0..=12" });
    }
    if d == 0 {
        return Err(GeneratorError::OutOfRange { name: "d", range: "1.." });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = ((1u64 << (2 * (depth + 1))) - 1) / 3;
    let inner = ((1u64 << (2 * depth)) - 1) / 3;
    let mut b = EnvBuilder::new(d, 2).with_capacity(total as usize, 4 * inner as usize);
    for s in 0..total {
        b.add_state(s >= inner);
    }
    let mut next = 1usize;
    let mut delta = vec![0.0; d];
    for s in 0..inner as usize {
        for a in 0..2 {
            let u: [f64; 2] = [rng.random(), rng.random()];
            let sum = u[0] + u[1];
            for &uk in &u {
                delta.iter_mut().for_each(|x| *x = rng.random());
                b.add_outcome(s, a, next, uk / sum, &delta).expect("dimension matches");
                next += 1;
            }
        }
    }
    Ok(b.build().expect("generated tree is well formed"))
}

pub const GRID_ACTIONS: [&str; 5] = ["up", "down", "left", "right", "pass"];

/// Square grid starting in the center; each step's Delta is a fixed random
/// 2-vector of the cell entered.
pub fn gridworld(size: usize, horizon: u32, seed: u64) -> Result<Environment, GeneratorError> {
    if size == 0 {
        return Err(GeneratorError::OutOfRange { name: "size", range: "1.." });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<[f64; 2]> = (0..size * size).map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)]).collect();
    let mut b = EnvBuilder::new(2, 5);
    b.action_names(GRID_ACTIONS.iter().map(|s| s.to_string()).collect());
    let mut ids: HashMap<(usize, usize, u32), usize> = HashMap::new();
    let c = size / 2;
    let s0 = b.add_named_state(format!("r{c}c{c}t0"), horizon == 0);
    ids.insert((c, c, 0), s0);
    let mut frontier = vec![(c, c)];
    for t in 0..horizon {
        let mut next = Vec::new();
        for &(r, col) in &frontier {
            let s = ids[&(r, col, t)];
            for (a, (dr, dc)) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1), (0, 0)].into_iter().enumerate() {
                let nr = (r as i64 + dr).clamp(0, size as i64 - 1) as usize;
                let nc = (col as i64 + dc).clamp(0, size as i64 - 1) as usize;
                let key = (nr, nc, t + 1);
                let id = match ids.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = b.add_named_state(format!("r{nr}c{nc}t{}", t + 1), t + 1 == horizon);
                        ids.insert(key, id);
                        next.push((nr, nc));
                        id
                    }
                };
                b.add_outcome(s, a, id, 1.0, &g[nr * size + nc]).expect("dimension matches");
            }
        }
        frontier = next;
    }
    Ok(b.build().expect("generated grid is well formed"))
}

/// Layered random DAG; successors may skip ahead to any later layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomDagSpec {
    pub steps: usize,
    pub width: usize,
    pub actions: usize,
    pub max_successors: usize,
    pub d: usize,
    /// Probability that a successor is drawn from a later layer than the next.
    pub skip: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
}

impl Default for RandomDagSpec {
    fn default() -> Self {
        Self { steps: 3, width: 3, actions: 2, max_successors: 2, d: 2, skip: 0.2, delta_lo: 0.0, delta_hi: 1.0 }
    }
}

pub fn random_dag(spec: &RandomDagSpec, seed: u64) -> Result<Environment, GeneratorError> {
    if spec.steps == 0 || spec.width == 0 || spec.actions == 0 || spec.max_successors == 0 || spec.d == 0 {
        return Err(GeneratorError::OutOfRange { name: "spec", range: "positive sizes" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = EnvBuilder::new(spec.d, spec.actions);
    let mut layers: Vec<Vec<usize>> = vec![vec![b.add_state(false)]];
    for t in 1..=spec.steps {
        layers.push((0..spec.width).map(|_| b.add_state(t == spec.steps)).collect());
    }
    let mut delta = vec![0.0; spec.d];
    for t in 0..spec.steps {
        for &s in &layers[t] {
            for a in 0..spec.actions {
                let layer = if t + 1 < spec.steps && rng.random::<f64>() < spec.skip {
                    rng.random_range(t + 2..=spec.steps)
                } else {
                    t + 1
                };
                let k = rng.random_range(1..=spec.max_successors.min(spec.width));
                let picks = sample(&mut rng, spec.width, k).into_vec();
                let w: Vec<f64> = picks.iter().map(|_| rng.random_range(0.05..1.0)).collect();
                let sum: f64 = w.iter().sum();
                for (&j, wj) in picks.iter().zip(&w) {
                    delta.iter_mut().for_each(|x| *x = rng.random_range(spec.delta_lo..spec.delta_hi));
                    b.add_outcome(s, a, layers[layer][j], wj / sum, &delta).expect("dimension matches");
                }
            }
        }
    }
    Ok(b.build().expect("generated DAG is well formed"))
}

/// Random tree: every outcome leads to a fresh state, so state sequences
/// identify action sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomTreeSpec {
    pub max_steps: usize,
    pub actions: usize,
    pub max_successors: usize,
    pub d: usize,
    /// Chance that a non-root state below the maximal depth is terminal.
    pub stop: f64,
}

impl Default for RandomTreeSpec {
    fn default() -> Self {
        Self { max_steps: 3, actions: 2, max_successors: 2, d: 1, stop: 0.2 }
    }
}

pub fn random_tree(spec: &RandomTreeSpec, seed: u64) -> Result<Environment, GeneratorError> {
    if spec.actions == 0 || spec.max_successors == 0 || spec.d == 0 {
        return Err(GeneratorError::OutOfRange { name: "spec", range: "positive sizes" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = EnvBuilder::new(spec.d, spec.actions);
    let root = b.add_state(spec.max_steps == 0);
    let mut frontier = if spec.max_steps == 0 { vec![] } else { vec![root] };
    let mut delta = vec![0.0; spec.d];
    for t in 0..spec.max_steps {
        let mut next = Vec::new();
        for &s in &frontier {
            for a in 0..spec.actions {
                let k = rng.random_range(1..=spec.max_successors);
                let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let sum: f64 = w.iter().sum();
                for wj in &w {
                    let terminal = t + 1 == spec.max_steps || rng.random::<f64>() < spec.stop;
                    let c = b.add_state(terminal);
                    if !terminal {
                        next.push(c);
                    }
                    delta.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
                    b.add_outcome(s, a, c, wj / sum, &delta).expect("dimension matches");
                }
            }
        }
        frontier = next;
    }
    Ok(b.build().expect("generated tree is well formed"))
}

/// Parsed `name:key=value,...` generator description.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    BinaryTree { depth: u32, d: usize, seed: u64 },
    Gridworld { size: usize, horizon: u32, seed: u64 },
    RandomDag { spec: RandomDagSpec, seed: u64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Environment, GeneratorError> {
        match *self {
            GeneratorSpec::BinaryTree { depth, d, seed } => random_binary_tree(depth, d, seed),
            GeneratorSpec::Gridworld { size, horizon, seed } => gridworld(size, horizon, seed),
            GeneratorSpec::RandomDag { ref spec, seed } => random_dag(spec, seed),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv: HashMap<&str, &str> = HashMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| GeneratorError::BadParameter(part.to_string()))?;
            kv.insert(k.trim(), v.trim());
        }
        fn get<T: FromStr>(kv: &mut HashMap<&str, &str>, key: &str, default: T) -> Result<T, GeneratorError> {
            match kv.remove(key) {
                Some(v) => v.parse().map_err(|_| GeneratorError::BadParameter(format!("{key}={v}"))),
                None => Ok(default),
            }
        }
        let out = match name {
            "binary-tree" => GeneratorSpec::BinaryTree {
                depth: get(&mut kv, "depth", 10)?,
                d: get(&mut kv, "d", 2)?,
                seed: get(&mut kv, "seed", 0)?,
            },
            "gridworld" => GeneratorSpec::Gridworld {
                size: get(&mut kv, "size", 5)?,
                horizon: get(&mut kv, "horizon", 10)?,
                seed: get(&mut kv, "seed", 0)?,
            },
            "random-dag" => {
                let def = RandomDagSpec::default();
                GeneratorSpec::RandomDag {
                    spec: RandomDagSpec {
                        steps: get(&mut kv, "steps", def.steps)?,
                        width: get(&mut kv, "width", def.width)?,
                        actions: get(&mut kv, "actions", def.actions)?,
                        max_successors: get(&mut kv, "successors", def.max_successors)?,
                        d: get(&mut kv, "d", def.d)?,
                        skip: get(&mut kv, "skip", def.skip)?,
                        delta_lo: get(&mut kv, "lo", def.delta_lo)?,
                        delta_hi: get(&mut kv, "hi", def.delta_hi)?,
                    },
                    seed: get(&mut kv, "seed", 0)?,
                }
            }
            other => return Err(GeneratorError::Unknown(other.to_string())),
        };
        if let Some(k) = kv.keys().next() {
            return Err(GeneratorError::BadParameter(k.to_string()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{validate_environment, DepthInfo};

    #[test]
    fn small_binary_tree_shape() {
        let env = random_binary_tree(3, 2, 1).unwrap();
        assert_eq!(env.n_states(), 1 + 4 + 16 + 64);
        assert!(validate_environment(&env).is_valid());
        let di = DepthInfo::new(&env).unwrap();
        assert_eq!(di.ell[0], 3);
        for s in 0..21 {
            for a in 0..2 {
                let o = env.outcomes(s, a);
                assert_eq!(o.len(), 2);
                assert!((o.prob(0) + o.prob(1) - 1.0).abs() < 1e-15);
                assert!(o.iter().all(|(_, _, f)| f.iter().all(|x| (0.0..1.0).contains(x))));
            }
        }
    }

    #[test]
    fn binary_tree_is_seeded() {
        assert_eq!(random_binary_tree(2, 1, 5).unwrap(), random_binary_tree(2, 1, 5).unwrap());
        assert_ne!(random_binary_tree(2, 1, 5).unwrap(), random_binary_tree(2, 1, 6).unwrap());
    }

    #[test]
    fn gridworld_walls_and_horizon() {
        let env = gridworld(5, 3, 0).unwrap();
        assert!(validate_environment(&env).is_valid());
        assert_eq!(env.state_name(env.initial()), "r2c2t0");
        let di = DepthInfo::new(&env).unwrap();
        assert_eq!(di.ell[env.initial()], 3);
        // from the top-left corner, "up" and "left" stay put
        let corner = gridworld(2, 2, 0).unwrap();
        let s = corner.state_index("r1c1t0").unwrap();
        let up = corner.outcomes(s, 0).successor(0);
        assert_eq!(corner.state_name(up), "r0c1t1");
        let right = corner.outcomes(s, 3).successor(0);
        assert_eq!(corner.state_name(right), "r1c1t1");
        assert_eq!(corner.outcomes(s, 3).delta(0), corner.outcomes(s, 4).delta(0));
    }

    #[test]
    fn random_dag_is_valid() {
        for seed in 0..20 {
            let env = random_dag(&RandomDagSpec { steps: 4, ..Default::default() }, seed).unwrap();
            assert!(validate_environment(&env).is_valid(), "{seed}");
        }
    }

    #[test]
    fn random_tree_has_unique_parents() {
        let env = random_tree(&RandomTreeSpec { max_steps: 4, ..Default::default() }, 3).unwrap();
        assert!(validate_environment(&env).is_valid());
        let mut seen = vec![0; env.n_states()];
        for s in 0..env.n_states() {
            for a in 0..env.n_actions() {
                for (t, _, _) in env.outcomes(s, a).iter() {
                    seen[t] += 1;
                }
            }
        }
        assert!(seen.iter().skip(1).all(|&c| c == 1));
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!(
            "binary-tree:depth=4,d=3,seed=9".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::BinaryTree { depth: 4, d: 3, seed: 9 }
        );
        assert_eq!(
            "gridworld".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::Gridworld { size: 5, horizon: 10, seed: 0 }
        );
        assert!("gridworld:colour=red".parse::<GeneratorSpec>().is_err());
        assert!("maze".parse::<GeneratorSpec>().is_err());
    }
}
