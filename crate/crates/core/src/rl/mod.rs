//! Tabular Q-learning: option agents over abstract states, the hierarchical
//! baseline over full ground states, and a flat baseline without a planner.

mod agent;
mod qtable;
mod train;

pub use agent::{
    evaluate, run_episode, run_flat_episode, run_reprel_episode, Agents, Domain, EpisodeOutcome, Learner, OptionAgent,
};
pub use qtable::QTable;
pub use train::{
    train, train_exhaustive, train_seed, CurvePoint, LearningCurve, SeedRun, TrainOutcome, EVAL_SEED_BASE,
};

use std::fmt;

use rand::Rng;

use crate::abstraction::AbstractState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Options keyed by derived abstract states.
    Reprel,
    /// Same options, keyed by full ground states.
    Hrl,
    /// One table over ground states and primitive actions, no planner.
    Flat,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Reprel, Variant::Hrl, Variant::Flat];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Reprel => "reprel",
            Variant::Hrl => "hrl",
            Variant::Flat => "flat",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Environment steps over which epsilon falls linearly to its end value.
    pub epsilon_decay_steps: usize,
    pub gamma: f64,
    pub seeds: Vec<u64>,
    pub total_env_steps: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Steps an option may run before the episode replans.
    pub option_budget: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.1,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 20_000,
            gamma: 0.99,
            seeds: (0..5).collect(),
            total_env_steps: 50_000,
            eval_every: 1000,
            eval_episodes: 10,
            option_budget: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} outside (0, 1]", self.alpha));
        }
        for (name, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("{name} {e} outside [0, 1]"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} outside (0, 1]", self.gamma));
        }
        if self.seeds.is_empty() {
            return bad("no seeds".into());
        }
        for (name, v) in [
            ("epsilon_decay_steps", self.epsilon_decay_steps),
            ("total_env_steps", self.total_env_steps),
            ("eval_every", self.eval_every),
            ("eval_episodes", self.eval_episodes),
            ("option_budget", self.option_budget),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn epsilon_at(&self, env_steps: usize) -> f64 {
        let frac = (env_steps as f64 / self.epsilon_decay_steps as f64).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// Uniform random action with probability `epsilon`, otherwise greedy with
/// ties broken by action name. Draws nothing from `rng` when `epsilon` is 0.
pub fn select_action(q: &QTable, state: &AbstractState, epsilon: f64, rng: &mut impl Rng) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.actions().len())
    } else {
        q.greedy(state)
    }
}

/// One-step Q-learning backup.
#[allow(clippy::too_many_arguments)]
pub fn q_update(
    q: &mut QTable,
    state: &AbstractState,
    action: usize,
    reward: f64,
    next: &AbstractState,
    done: bool,
    alpha: f64,
    gamma: f64,
) {
    if alpha == 0.0 {
        return;
    }
    let target = reward + if done { 0.0 } else { gamma * q.max_value(next) };
    let old = q.get(state, action);
    q.set(state, action, old + alpha * (target - old));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ACTION_NAMES;
    use crate::symbol::Sym;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table() -> QTable {
        QTable::new(&ACTION_NAMES.iter().map(|a| Sym::new(a)).collect::<Vec<_>>())
    }

    fn key(s: &str) -> AbstractState {
        AbstractState::parse_key(s).unwrap()
    }

    #[test]
    fn uniform_when_epsilon_is_one() {
        let q = table();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            counts[select_action(&q, &key("-"), 1.0, &mut rng)] += 1;
        }
        let expected = n as f64 / 6.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // upper 1% point of chi-square with 5 degrees of freedom
        assert!(chi2 < 15.086, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn greedy_picks_unique_max_or_first_name() {
        let mut q = table();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = key("taxi-at(l00)");
        assert_eq!(ACTION_NAMES[select_action(&q, &s, 0.0, &mut rng)], "dropoff");
        q.set(&s, 0, 0.5);
        assert_eq!(ACTION_NAMES[select_action(&q, &s, 0.0, &mut rng)], "move-north");
        q.set(&s, 3, 0.5);
        // move-north and move-west tie: name order decides
        assert_eq!(ACTION_NAMES[select_action(&q, &s, 0.0, &mut rng)], "move-north");
    }

    #[test]
    fn update_arithmetic() {
        let mut q = table();
        let (s, t) = (key("taxi-at(l00)"), key("taxi-at(l01)"));
        q_update(&mut q, &s, 4, -1.0, &t, true, 0.5, 0.99);
        assert_eq!(q.get(&s, 4), -0.5);
        q.set(&t, 2, 10.0);
        q_update(&mut q, &s, 0, -1.0, &t, false, 0.5, 0.5);
        assert_eq!(q.get(&s, 0), 2.0);
        let before = q.clone();
        q_update(&mut q, &key("taxi-at(l22)"), 0, 5.0, &t, false, 0.0, 0.99);
        assert_eq!(q, before);
    }

    #[test]
    fn epsilon_schedule_is_linear_then_flat() {
        let c = TrainConfig {
            epsilon_start: 1.0,
            epsilon_end: 0.2,
            epsilon_decay_steps: 100,
            ..TrainConfig::default()
        };
        assert_eq!(c.epsilon_at(0), 1.0);
        assert!((c.epsilon_at(50) - 0.6).abs() < 1e-12);
        assert!((c.epsilon_at(100) - 0.2).abs() < 1e-12);
        assert!((c.epsilon_at(10_000) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { alpha: 0.0, ..TrainConfig::default() },
            TrainConfig { alpha: 1.5, ..TrainConfig::default() },
            TrainConfig { epsilon_end: -0.1, ..TrainConfig::default() },
            TrainConfig { seeds: vec![], ..TrainConfig::default() },
            TrainConfig { eval_every: 0, ..TrainConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
        assert_eq!(Variant::parse("hrl").unwrap(), Variant::Hrl);
        assert!(Variant::parse("trl").is_err());
    }
}
