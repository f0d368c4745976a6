//! Goal-directed relational MDPs: the episodic interface and the Taxi domain.

mod instance;
mod taxi;

pub use instance::{cell_name, Cell, Dir, PassengerSpec, Placement, ProblemInstance};
pub use taxi::{TaxiConfig, TaxiEnv, ACTION_NAMES, BONUS_DELIVERY, PENALTY_ILLEGAL, STEP_REWARD};

use crate::error::Result;
use crate::logic::{goal_satisfied, Goal, State};
use crate::symbol::Sym;

/// Pseudo-reward added to the environment reward when an option's
/// termination condition becomes true.
pub const OPTION_BONUS: f64 = 20.0;

/// Static description ⟨A, γ, G⟩ of a goal-directed relational MDP; states,
/// transitions and rewards live in the environment itself.
#[derive(Clone, Debug, PartialEq)]
pub struct GrmdpSpec {
    pub actions: Vec<Sym>,
    pub gamma: f64,
    pub goal_family: String,
    pub max_episode_steps: usize,
}

impl GrmdpSpec {
    pub fn action_names(&self) -> Vec<&'static str> {
        self.actions.iter().map(|a| a.as_str()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepInfo {
    /// Pickup or dropoff attempted when not possible.
    pub illegal: bool,
    /// Passenger dropped at their destination by this step.
    pub delivered: Option<Sym>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub next_state: State,
    pub reward: f64,
    /// Goal reached or step budget exhausted.
    pub done: bool,
    /// `done` was caused by the step budget alone.
    pub truncated: bool,
    pub info: StepInfo,
}

/// One running episode: tracks the goal, the step budget and the return.
#[derive(Clone, Debug)]
pub struct Episode<'e> {
    env: &'e TaxiEnv,
    pub state: State,
    pub goal: Goal,
    pub steps: usize,
    pub total_reward: f64,
    pub done: bool,
}

impl<'e> Episode<'e> {
    pub fn new(env: &'e TaxiEnv, seed: u64) -> Self {
        Episode::from_state(env, env.reset(seed))
    }

    pub fn from_state(env: &'e TaxiEnv, state: State) -> Self {
        let goal = env.goal(&state);
        let done = goal_satisfied(&state, &goal);
        Episode {
            env,
            state,
            goal,
            steps: 0,
            total_reward: 0.0,
            done,
        }
    }

    pub fn env(&self) -> &'e TaxiEnv {
        self.env
    }

    pub fn goal_reached(&self) -> bool {
        goal_satisfied(&self.state, &self.goal)
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let mut r = self.env.step(&self.state, action)?;
        self.steps += 1;
        self.total_reward += r.reward;
        if !r.done && self.steps >= self.env.spec().max_episode_steps {
            r.done = true;
            r.truncated = true;
        }
        self.done = r.done;
        self.state = r.next_state.clone();
        Ok(r)
    }
}
