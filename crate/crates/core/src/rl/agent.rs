use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{q_update, select_action, QTable, TrainConfig, Variant};
use crate::abstraction::{relevant_closure, AbstractState, AbstractionSchema, GroundedSchema, Identity, StateAbstraction};
use crate::dfoci::DomainDecl;
use crate::env::{Episode, TaxiEnv, OPTION_BONUS};
use crate::error::{Error, Result};
use crate::logic::{goal_satisfied, match_atom, Atom, State, Substitution};
use crate::planner::{self, applicable, OperatorSet, SubtaskOperator};
use crate::symbol::Sym;

/// Influence statements, sub-task operators and the abstraction derived for
/// every operator.
#[derive(Clone, Debug)]
pub struct Domain {
    pub decl: DomainDecl,
    pub operators: OperatorSet,
    pub schemas: BTreeMap<Sym, AbstractionSchema>,
}

impl Domain {
    pub fn new(decl: DomainDecl, operators: OperatorSet, depth: Option<usize>) -> Result<Domain> {
        let mut schemas = BTreeMap::new();
        for op in &operators.operators {
            let schema = relevant_closure(&decl, op.name.as_str(), depth)?;
            if schema.params().len() != op.params.len() {
                return Err(Error::Config(format!(
                    "operator {} takes {} parameters but subtask {} has {}",
                    op.name,
                    op.params.len(),
                    schema.subtask,
                    schema.params().len()
                )));
            }
            schemas.insert(op.name, schema);
        }
        Ok(Domain {
            decl,
            operators,
            schemas,
        })
    }

    pub fn load(dfoci: &Path, operators: &Path, depth: Option<usize>) -> Result<Domain> {
        Domain::new(
            crate::dfoci::load_file(dfoci)?,
            OperatorSet::load(operators)?,
            depth,
        )
    }

    fn operator(&self, name: Sym) -> Result<&SubtaskOperator> {
        self.operators
            .get(name.as_str())
            .ok_or_else(|| Error::UnknownSubtask(name.to_string()))
    }
}

/// Learned policy for one sub-task name, shared by all its groundings.
#[derive(Clone, Debug)]
pub struct OptionAgent {
    pub subtask: Sym,
    pub qtable: QTable,
    /// `None` keys the table on full ground states.
    pub schema: Option<AbstractionSchema>,
    pub operator: SubtaskOperator,
}

/// State projection used while one ground sub-task is active.
#[derive(Clone, Debug)]
pub enum Abstractor {
    Schema(GroundedSchema),
    Identity,
}

impl StateAbstraction for Abstractor {
    fn abstract_state(&self, state: &State) -> AbstractState {
        match self {
            Abstractor::Schema(g) => g.abstract_state(state),
            Abstractor::Identity => Identity.abstract_state(state),
        }
    }
}

impl OptionAgent {
    /// Projection for a ground step such as `pickup(p2)`.
    pub fn abstraction(&self, step: &Atom) -> Result<Abstractor> {
        match &self.schema {
            None => Ok(Abstractor::Identity),
            Some(schema) => {
                let theta = match_atom(&schema.subtask, step, Substitution::new())
                    .ok_or_else(|| Error::Grounding(format!("{step} does not instantiate {}", schema.subtask)))?;
                Ok(Abstractor::Schema(GroundedSchema::new(schema, &theta)?))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Agents {
    pub variant: Variant,
    pub options: BTreeMap<Sym, OptionAgent>,
    /// Used by the flat variant only.
    pub flat: QTable,
    pub option_budget: usize,
}

impl Agents {
    pub fn new(variant: Variant, domain: &Domain, actions: &[Sym], option_budget: usize) -> Agents {
        let options = match variant {
            Variant::Flat => BTreeMap::new(),
            _ => domain
                .operators
                .operators
                .iter()
                .map(|op| {
                    let agent = OptionAgent {
                        subtask: op.name,
                        qtable: QTable::new(actions),
                        schema: (variant == Variant::Reprel).then(|| domain.schemas[&op.name].clone()),
                        operator: op.clone(),
                    };
                    (op.name, agent)
                })
                .collect(),
        };
        Agents {
            variant,
            options,
            flat: QTable::new(actions),
            option_budget,
        }
    }

    /// Tables with their file stems, in name order.
    pub fn tables(&self) -> Vec<(&'static str, &QTable)> {
        match self.variant {
            Variant::Flat => vec![("flat", &self.flat)],
            _ => self.options.iter().map(|(k, a)| (k.as_str(), &a.qtable)).collect(),
        }
    }

    /// Writes `<stem>.q` per table into `dir`, which must exist.
    pub fn save(&self, dir: &Path) -> Result<()> {
        for (stem, table) in self.tables() {
            table.save(&dir.join(format!("{stem}.q")))?;
        }
        Ok(())
    }

    /// Replaces tables with the ones found in `dir`; at least one must exist.
    pub fn load(&mut self, dir: &Path) -> Result<()> {
        let mut found = 0;
        let actions = self.flat.actions().to_vec();
        let mut load_into = |stem: &str, table: &mut QTable| -> Result<()> {
            let path = dir.join(format!("{stem}.q"));
            if path.exists() {
                *table = QTable::load(&path, &actions)?;
                found += 1;
            }
            Ok(())
        };
        match self.variant {
            Variant::Flat => load_into("flat", &mut self.flat)?,
            _ => {
                for (k, a) in self.options.iter_mut() {
                    load_into(k.as_str(), &mut a.qtable)?;
                }
            }
        }
        if found == 0 {
            return Err(Error::Config(format!("no tables for {} in {}", self.variant, dir.display())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub reward: f64,
    pub steps: usize,
    pub goal_reached: bool,
}

/// Mutable state of one training run: exploration, step count and the
/// periodic greedy evaluations.
#[derive(Debug)]
pub struct Learner<'a> {
    pub cfg: &'a TrainConfig,
    pub rng: ChaCha8Rng,
    pub env_steps: usize,
    /// `(env_steps, mean greedy episode reward)`.
    pub evals: Vec<(usize, f64)>,
}

impl<'a> Learner<'a> {
    pub fn new(cfg: &'a TrainConfig, seed: u64) -> Self {
        Learner {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            env_steps: 0,
            evals: Vec::new(),
        }
    }

    pub fn finished(&self) -> bool {
        self.env_steps >= self.cfg.total_env_steps
    }

    fn epsilon(&self) -> f64 {
        self.cfg.epsilon_at(self.env_steps)
    }

    pub fn evaluate_now(&mut self, agents: &Agents, env: &TaxiEnv, domain: &Domain) -> Result<()> {
        let runs = evaluate(agents, env, domain, self.cfg.eval_episodes)?;
        let mean = runs.iter().map(|r| r.reward).sum::<f64>() / runs.len() as f64;
        self.evals.push((self.env_steps, mean));
        Ok(())
    }

    fn tick(&mut self, agents: &Agents, env: &TaxiEnv, domain: &Domain) -> Result<()> {
        self.env_steps += 1;
        if self.env_steps.is_multiple_of(self.cfg.eval_every) {
            self.evaluate_now(agents, env, domain)?;
        }
        Ok(())
    }

    pub fn next_reset_seed(&mut self) -> u64 {
        self.rng.gen()
    }
}

fn choose(q: &QTable, s: &AbstractState, learner: &mut Option<&mut Learner>) -> usize {
    match learner {
        Some(l) => {
            let eps = l.epsilon();
            select_action(q, s, eps, &mut l.rng)
        }
        None => q.greedy(s),
    }
}

fn replan(env: &TaxiEnv, domain: &Domain, state: &State) -> Result<VecDeque<Atom>> {
    let p = planner::plan(
        &env.planning_state(state),
        &env.planning_goal(),
        &domain.operators.operators,
        &env.objects(),
    )?;
    Ok(p.steps.into())
}

enum OptionExit {
    Terminated,
    Budget,
    Stop,
}

/// Plans, then runs one option per plan step until the episode ends.
/// With a learner, option tables are updated on the environment reward plus
/// the option bonus at termination; without one, options act greedily.
/// An option that exhausts its step budget, or a step whose preconditions no
/// longer hold, triggers replanning from the current state.
pub fn run_reprel_episode(
    agents: &mut Agents,
    domain: &Domain,
    env: &TaxiEnv,
    start: State,
    mut learner: Option<&mut Learner>,
) -> Result<EpisodeOutcome> {
    let mut ep = Episode::from_state(env, start);
    let mut plan = replan(env, domain, &ep.state)?;
    while !ep.done && !learner.as_ref().is_some_and(|l| l.finished()) {
        let Some(step) = plan.front().cloned() else {
            plan = replan(env, domain, &ep.state)?;
            if plan.is_empty() {
                break;
            }
            continue;
        };
        let op = domain.operator(step.predicate)?;
        let ground = op.ground(&op.grounding_for(&step)?)?;
        if !applicable(&ground, &env.planning_state(&ep.state)) {
            plan = replan(env, domain, &ep.state)?;
            continue;
        }
        let term = ground.effects_goal();
        let name = op.name;
        let phi = agents
            .options
            .get(&name)
            .ok_or_else(|| Error::UnknownSubtask(name.to_string()))?
            .abstraction(&step)?;
        let mut s = phi.abstract_state(&ep.state);
        let mut k = 0;
        let exit = loop {
            let a = choose(&agents.options[&name].qtable, &s, &mut learner);
            let r = ep.step(a)?;
            let ended = goal_satisfied(&env.planning_state(&ep.state), &term);
            let next = phi.abstract_state(&ep.state);
            if let Some(l) = learner.as_deref_mut() {
                let ro = r.reward + if ended { OPTION_BONUS } else { 0.0 };
                let terminal = ended || (r.done && !r.truncated);
                let table = &mut agents.options.get_mut(&name).expect("checked above").qtable;
                q_update(table, &s, a, ro, &next, terminal, l.cfg.alpha, l.cfg.gamma);
                l.tick(agents, env, domain)?;
            }
            k += 1;
            if ended {
                break OptionExit::Terminated;
            }
            if ep.done || learner.as_ref().is_some_and(|l| l.finished()) {
                break OptionExit::Stop;
            }
            if k >= agents.option_budget {
                break OptionExit::Budget;
            }
            s = next;
        };
        match exit {
            OptionExit::Terminated => {
                plan.pop_front();
            }
            OptionExit::Budget => plan = replan(env, domain, &ep.state)?,
            OptionExit::Stop => break,
        }
    }
    Ok(EpisodeOutcome {
        reward: ep.total_reward,
        steps: ep.steps,
        goal_reached: ep.goal_reached(),
    })
}

/// Primitive actions on full ground states, environment reward only.
pub fn run_flat_episode(
    agents: &mut Agents,
    domain: &Domain,
    env: &TaxiEnv,
    start: State,
    mut learner: Option<&mut Learner>,
) -> Result<EpisodeOutcome> {
    let mut ep = Episode::from_state(env, start);
    let mut s = Identity.abstract_state(&ep.state);
    while !ep.done && !learner.as_ref().is_some_and(|l| l.finished()) {
        let a = choose(&agents.flat, &s, &mut learner);
        let r = ep.step(a)?;
        let next = Identity.abstract_state(&ep.state);
        if let Some(l) = learner.as_deref_mut() {
            let terminal = r.done && !r.truncated;
            q_update(&mut agents.flat, &s, a, r.reward, &next, terminal, l.cfg.alpha, l.cfg.gamma);
            l.tick(agents, env, domain)?;
        }
        s = next;
    }
    Ok(EpisodeOutcome {
        reward: ep.total_reward,
        steps: ep.steps,
        goal_reached: ep.goal_reached(),
    })
}

pub fn run_episode(
    agents: &mut Agents,
    domain: &Domain,
    env: &TaxiEnv,
    start: State,
    learner: Option<&mut Learner>,
) -> Result<EpisodeOutcome> {
    match agents.variant {
        Variant::Flat => run_flat_episode(agents, domain, env, start, learner),
        _ => run_reprel_episode(agents, domain, env, start, learner),
    }
}

/// Greedy episodes from the fixed evaluation start states.
pub fn evaluate(agents: &Agents, env: &TaxiEnv, domain: &Domain, episodes: usize) -> Result<Vec<EpisodeOutcome>> {
    let mut scratch = agents.clone();
    (0..episodes as u64)
        .map(|i| {
            let start = env.reset(super::EVAL_SEED_BASE + i);
            run_episode(&mut scratch, domain, env, start, None)
        })
        .collect()
}
