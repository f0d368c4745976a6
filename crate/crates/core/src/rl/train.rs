use std::fmt::Write as _;

use super::{q_update, run_episode, Agents, Domain, Learner, QTable, TrainConfig, Variant};
use crate::abstraction::StateAbstraction;
use crate::env::TaxiEnv;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::verifier::GroundMdp;

/// Evaluation episode `i` starts from `reset(EVAL_SEED_BASE + i)`.
pub const EVAL_SEED_BASE: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub env_steps: usize,
    /// Mean over seeds of the per-seed mean greedy episode reward.
    pub mean_reward: f64,
    /// Population standard deviation of the per-seed means.
    pub std_reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    pub seeds: usize,
}

impl LearningCurve {
    pub fn from_runs(runs: &[SeedRun]) -> Result<LearningCurve> {
        let first = runs.first().ok_or_else(|| Error::Config("no runs".into()))?;
        let grid: Vec<usize> = first.evals.iter().map(|e| e.0).collect();
        if runs.iter().any(|r| r.evals.iter().map(|e| e.0).ne(grid.iter().copied())) {
            return Err(Error::Config("runs evaluated on different step grids".into()));
        }
        let n = runs.len() as f64;
        let points = grid
            .iter()
            .enumerate()
            .map(|(i, &env_steps)| {
                let mean = runs.iter().map(|r| r.evals[i].1).sum::<f64>() / n;
                let var = runs.iter().map(|r| (r.evals[i].1 - mean).powi(2)).sum::<f64>() / n;
                CurvePoint {
                    env_steps,
                    mean_reward: mean,
                    std_reward: var.sqrt(),
                }
            })
            .collect();
        Ok(LearningCurve {
            points,
            seeds: runs.len(),
        })
    }

    /// `env_steps,mean_reward,std_reward,seeds` with a header row and six
    /// fixed decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("env_steps,mean_reward,std_reward,seeds\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.6},{:.6},{}", p.env_steps, p.mean_reward, p.std_reward, self.seeds);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub agents: Agents,
    pub evals: Vec<(usize, f64)>,
    /// First evaluation point whose mean reward reaches the optimum.
    pub steps_to_optimal: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub variant: Variant,
    pub runs: Vec<SeedRun>,
    pub curve: LearningCurve,
    /// Mean optimal return over the evaluation start states.
    pub optimal_mean: f64,
}

/// Mean over the evaluation start states of the best achievable return.
pub fn optimal_eval_mean(env: &TaxiEnv, episodes: usize) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..episodes as u64 {
        let s = env.reset(EVAL_SEED_BASE + i);
        total += env
            .optimal_return(&s)
            .ok_or_else(|| Error::NoPlan(format!("goal unreachable from {s}")))?;
    }
    Ok(total / episodes as f64)
}

/// One seeded run: greedy evaluation at step 0 and every `eval_every`
/// steps until `total_env_steps`.
pub fn train_seed(
    variant: Variant,
    domain: &Domain,
    env: &TaxiEnv,
    cfg: &TrainConfig,
    seed: u64,
    init: Option<Agents>,
    optimal_mean: f64,
) -> Result<SeedRun> {
    cfg.validate()?;
    let mut agents = init.unwrap_or_else(|| Agents::new(variant, domain, env.available_actions(), cfg.option_budget));
    if agents.variant != variant {
        return Err(Error::Config(format!("initial tables are {} not {variant}", agents.variant)));
    }
    agents.option_budget = cfg.option_budget;
    let mut learner = Learner::new(cfg, seed);
    learner.evaluate_now(&agents, env, domain)?;
    while !learner.finished() {
        let start = env.reset(learner.next_reset_seed());
        run_episode(&mut agents, domain, env, start, Some(&mut learner))?;
    }
    let steps_to_optimal = learner
        .evals
        .iter()
        .find(|(_, m)| *m >= optimal_mean - 1e-9)
        .map(|(s, _)| *s);
    Ok(SeedRun {
        seed,
        agents,
        evals: learner.evals,
        steps_to_optimal,
    })
}

/// Trains every seed in `cfg.seeds`; `init`, when non-empty, supplies
/// starting tables per seed (transfer).
pub fn train(
    variant: Variant,
    domain: &Domain,
    env: &TaxiEnv,
    cfg: &TrainConfig,
    init: Vec<Option<Agents>>,
    exec: Execution,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if !init.is_empty() && init.len() != cfg.seeds.len() {
        return Err(Error::Config(format!("{} initial tables for {} seeds", init.len(), cfg.seeds.len())));
    }
    let optimal_mean = optimal_eval_mean(env, cfg.eval_episodes)?;
    let mut init = init;
    init.resize_with(cfg.seeds.len(), || None);
    let jobs: Vec<(u64, Option<Agents>)> = cfg.seeds.iter().copied().zip(init).collect();
    let runs = exec
        .map(jobs, |(seed, init)| train_seed(variant, domain, env, cfg, seed, init, optimal_mean))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let curve = LearningCurve::from_runs(&runs)?;
    Ok(TrainOutcome {
        variant,
        runs,
        curve,
        optimal_mean,
    })
}

/// Repeated Q-learning backups over every (non-absorbing state, action)
/// pair of an enumerated MDP, keyed through `abstraction`, until no value
/// moves by more than `tol`. Returns the number of sweeps.
pub fn train_exhaustive(
    mdp: &GroundMdp,
    abstraction: &dyn StateAbstraction,
    q: &mut QTable,
    alpha: f64,
    tol: f64,
    max_sweeps: usize,
) -> usize {
    let keys: Vec<_> = mdp.states.iter().map(|s| abstraction.abstract_state(s)).collect();
    let live: Vec<usize> = (0..mdp.num_states()).filter(|&i| !mdp.is_absorbing(i)).collect();
    for sweep in 1..=max_sweeps {
        let mut delta: f64 = 0.0;
        for &i in &live {
            for a in 0..mdp.num_actions() {
                let (j, r, done) = mdp.transition(i, a);
                let before = q.get(&keys[i], a);
                q_update(q, &keys[i], a, r, &keys[j], done, alpha, mdp.gamma);
                delta = delta.max((q.get(&keys[i], a) - before).abs());
            }
        }
        if delta < tol {
            return sweep;
        }
    }
    max_sweeps
}
