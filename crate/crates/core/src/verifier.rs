//! Exhaustive checks on enumerated deterministic MDPs: value iteration,
//! factorization of a state split into kept (X) and dropped (Y) atoms,
//! optimal-value equivalence with the quotient MDP, and soundness of
//! next-step influence statements.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::hash::Hash;

use crate::abstraction::{AbstractionSchema, GroundedSchema, StateAbstraction};
use crate::dfoci::{DomainDecl, InfluenceItem};
use crate::env::{TaxiEnv, OPTION_BONUS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::logic::{goal_satisfied, match_atom, Atom, State, Substitution};
use crate::planner::{applicable, GroundOperator};
use crate::symbol::Sym;

pub const VI_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-8;
pub const MAX_SWEEPS: usize = 1_000_000;

/// Deterministic finite MDP. `transitions[i * actions.len() + a]` is
/// `(successor, reward, done)`; a done transition does not bootstrap.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundMdp {
    pub states: Vec<State>,
    pub actions: Vec<Sym>,
    pub transitions: Vec<(usize, f64, bool)>,
    pub gamma: f64,
    /// Indices of the start states.
    pub initial: Vec<usize>,
}

impl GroundMdp {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn transition(&self, state: usize, action: usize) -> (usize, f64, bool) {
        self.transitions[state * self.actions.len() + action]
    }

    /// Every action loops back with reward 0 and ends the episode.
    pub fn is_absorbing(&self, state: usize) -> bool {
        (0..self.num_actions()).all(|a| self.transition(state, a) == (state, 0.0, true))
    }

    /// All ground atoms occurring in some state.
    pub fn atom_universe(&self) -> BTreeSet<Atom> {
        self.states.iter().flat_map(|s| s.iter().cloned()).collect()
    }

    pub fn index_of(&self, state: &State) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.states.len();
        if self.actions.is_empty() || self.transitions.len() != n * self.actions.len() {
            return Err(Error::Config(format!(
                "transition table has {} entries for {n} states x {} actions",
                self.transitions.len(),
                self.actions.len()
            )));
        }
        if let Some((j, r, _)) = self.transitions.iter().find(|(j, r, _)| *j >= n || !r.is_finite()) {
            return Err(Error::Config(format!("bad transition to {j} with reward {r}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
    /// Sup-norm Bellman residual after each sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl ValueTable {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }

    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

fn backup(mdp: &GroundMdp, v: &[f64], s: usize) -> f64 {
    (0..mdp.num_actions())
        .map(|a| {
            let (j, r, done) = mdp.transition(s, a);
            if done {
                r
            } else {
                r + mdp.gamma * v[j]
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Synchronous sweeps from `V = 0` until the residual drops below `tol`.
pub fn value_iteration(mdp: &GroundMdp, tol: f64) -> ValueTable {
    value_iteration_with(mdp, tol, Execution::Sequential)
}

pub fn value_iteration_with(mdp: &GroundMdp, tol: f64, exec: Execution) -> ValueTable {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = mdp.num_states();
    let mut v = vec![0.0; n];
    let mut residuals = Vec::new();
    while residuals.len() < MAX_SWEEPS {
        let next = exec.map_range(n, |s| backup(mdp, &v, s));
        let res = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        residuals.push(res);
        if res < tol {
            return ValueTable {
                values: v,
                residuals,
                converged: true,
            };
        }
    }
    ValueTable {
        values: v,
        residuals,
        converged: false,
    }
}

/// Greedy action for `s` under `values`, lowest index on ties.
pub fn greedy_action(mdp: &GroundMdp, values: &[f64], s: usize) -> usize {
    let q = |a: usize| {
        let (j, r, done) = mdp.transition(s, a);
        if done {
            r
        } else {
            r + mdp.gamma * values[j]
        }
    };
    let mut best = 0;
    for a in 1..mdp.num_actions() {
        if q(a) > q(best) {
            best = a;
        }
    }
    best
}

/// The sub-MDP in which the option for `op` is active: it starts in every
/// enumerated state satisfying the operator's preconditions (on the planning
/// projection) and not yet its effects; states where the effects hold are
/// absorbing and entering one pays the option bonus.
pub fn phase_mdp(env: &TaxiEnv, full: &GroundMdp, op: &GroundOperator, max_states: usize) -> Result<GroundMdp> {
    let term = op.effects_goal();
    let terminated = |s: &State| goal_satisfied(&env.planning_state(s), &term);
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut initial = Vec::new();
    for (i, s) in full.states.iter().enumerate() {
        if full.is_absorbing(i) || terminated(s) || !applicable(op, &env.planning_state(s)) {
            continue;
        }
        index.insert(s.clone(), states.len());
        initial.push(states.len());
        states.push(s.clone());
    }
    let na = env.available_actions().len();
    let mut transitions = Vec::new();
    let mut queue: VecDeque<usize> = (0..states.len()).collect();
    while let Some(i) = queue.pop_front() {
        debug_assert_eq!(transitions.len(), i * na);
        let s = states[i].clone();
        if terminated(&s) || goal_satisfied(&s, &env.goal(&s)) {
            transitions.extend(std::iter::repeat_n((i, 0.0, true), na));
            continue;
        }
        for a in 0..na {
            let r = env.step(&s, a)?;
            let ends = terminated(&r.next_state);
            let reward = r.reward + if ends { OPTION_BONUS } else { 0.0 };
            let j = match index.get(&r.next_state) {
                Some(&j) => j,
                None => {
                    if states.len() >= max_states {
                        return Err(Error::StateBudget(max_states));
                    }
                    index.insert(r.next_state.clone(), states.len());
                    queue.push_back(states.len());
                    states.push(r.next_state);
                    states.len() - 1
                }
            };
            transitions.push((j, reward, ends || r.done));
        }
    }
    Ok(GroundMdp {
        states,
        actions: full.actions.clone(),
        transitions,
        gamma: full.gamma,
        initial,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: usize,
    pub action: usize,
    /// A state with the same projection whose successor projection, reward
    /// or termination differs.
    pub witness: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationReport {
    pub states: usize,
    pub groups: usize,
    pub violations: Vec<Violation>,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// One line per violation, at most `limit` of them.
    pub fn witness_lines(&self, mdp: &GroundMdp, limit: usize) -> Vec<String> {
        self.violations
            .iter()
            .take(limit)
            .map(|v| {
                let (j, r, d) = mdp.transition(v.state, v.action);
                let (wj, wr, wd) = mdp.transition(v.witness, v.action);
                format!(
                    "witness action={} state={} -> {} reward={r} done={d} | other={} -> {} reward={wr} done={wd}",
                    mdp.actions[v.action], mdp.states[v.state], mdp.states[j], mdp.states[v.witness], mdp.states[wj]
                )
            })
            .collect()
    }
}

/// Groups states by `key`; within a group every member must agree with the
/// first one on successor key, reward and termination for every action.
/// Returns the report and each state's class index (classes numbered by
/// first occurrence).
fn factorize_by<K: Hash + Eq + Clone>(mdp: &GroundMdp, key: impl Fn(&State) -> K) -> (FactorizationReport, Vec<usize>, Vec<usize>) {
    let keys: Vec<K> = mdp.states.iter().map(&key).collect();
    let mut class_of_key: HashMap<K, usize> = HashMap::new();
    let mut reps = Vec::new();
    let mut class = Vec::with_capacity(keys.len());
    for (i, k) in keys.iter().enumerate() {
        let c = *class_of_key.entry(k.clone()).or_insert_with(|| {
            reps.push(i);
            reps.len() - 1
        });
        class.push(c);
    }
    let mut violations = Vec::new();
    for i in 0..mdp.num_states() {
        let rep = reps[class[i]];
        if rep == i {
            continue;
        }
        for a in 0..mdp.num_actions() {
            let (j, r, d) = mdp.transition(i, a);
            let (rj, rr, rd) = mdp.transition(rep, a);
            if class[j] != class[rj] || r != rr || d != rd {
                violations.push(Violation {
                    state: i,
                    action: a,
                    witness: rep,
                });
            }
        }
    }
    let report = FactorizationReport {
        states: mdp.num_states(),
        groups: reps.len(),
        violations,
    };
    (report, class, reps)
}

/// Checks that the X-projection of the successor, the reward and the
/// termination flag depend only on the X-projection of the state.
pub fn check_factorization(mdp: &GroundMdp, x: &BTreeSet<Atom>, y: &BTreeSet<Atom>) -> Result<FactorizationReport> {
    if let Some(a) = x.intersection(y).next() {
        return Err(Error::NotAPartition(format!("{a} is in both X and Y")));
    }
    if let Some(a) = mdp.atom_universe().into_iter().find(|a| !x.contains(a) && !y.contains(a)) {
        return Err(Error::NotAPartition(format!("{a} is in neither X nor Y")));
    }
    let (report, _, _) = factorize_by(mdp, |s| s.iter().filter(|a| x.contains(a)).cloned().collect::<Vec<_>>());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub classes: usize,
    pub factorization: FactorizationReport,
    pub max_deviation: f64,
    pub worst_state: Option<usize>,
    pub tol: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.factorization.passed() && self.max_deviation <= self.tol
    }
}

/// The MDP over equivalence classes, with transitions taken from each
/// class's first member.
pub fn quotient(mdp: &GroundMdp, class: &[usize], reps: &[usize]) -> GroundMdp {
    let mut transitions = Vec::with_capacity(reps.len() * mdp.num_actions());
    for &r in reps {
        for a in 0..mdp.num_actions() {
            let (j, rew, d) = mdp.transition(r, a);
            transitions.push((class[j], rew, d));
        }
    }
    let mut initial: Vec<usize> = mdp.initial.iter().map(|&i| class[i]).collect();
    initial.sort_unstable();
    initial.dedup();
    GroundMdp {
        states: reps.iter().map(|&r| mdp.states[r].clone()).collect(),
        actions: mdp.actions.clone(),
        transitions,
        gamma: mdp.gamma,
        initial,
    }
}

/// Compares optimal values of `mdp` and of its quotient under `abstraction`.
/// A failed factorization is reported alongside the deviation of the
/// first-member quotient.
pub fn check_value_equivalence_with(mdp: &GroundMdp, abstraction: &dyn StateAbstraction, tol: f64) -> EquivalenceReport {
    let (factorization, class, reps) = factorize_by(mdp, |s| abstraction.abstract_state(s));
    let q = quotient(mdp, &class, &reps);
    let vi_tol = VI_TOL.min(tol);
    let vg = value_iteration(mdp, vi_tol);
    let va = value_iteration(&q, vi_tol);
    let mut max_deviation = 0.0;
    let mut worst_state = None;
    for (s, v) in vg.values.iter().enumerate() {
        let d = (v - va.values[class[s]]).abs();
        if d > max_deviation {
            max_deviation = d;
            worst_state = Some(s);
        }
    }
    EquivalenceReport {
        classes: reps.len(),
        factorization,
        max_deviation,
        worst_state,
        tol,
    }
}

pub fn check_value_equivalence(
    mdp: &GroundMdp,
    schema: &AbstractionSchema,
    grounding: &Substitution,
    tol: f64,
) -> Result<EquivalenceReport> {
    let g = GroundedSchema::new(schema, grounding)?;
    Ok(check_value_equivalence_with(mdp, &g, tol))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessViolation {
    /// Index into the statement list of the domain.
    pub statement: usize,
    pub atom: Atom,
    pub action: usize,
    pub state: usize,
    pub witness: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessReport {
    /// Number of (statement, ground consequent) pairs examined.
    pub checked: usize,
    pub violations: Vec<SoundnessViolation>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks next-step statements against the dynamics in `mdp`: over all
/// non-absorbing states, the next value of each ground consequent must be a
/// function of its influencers (and the action, when listed). Sub-task
/// parameters are bound by `step`; other variables range over all objects.
/// With `step = None` only statements without a sub-task head are checked.
pub fn check_soundness(mdp: &GroundMdp, decl: &DomainDecl, step: Option<&Atom>) -> Result<SoundnessReport> {
    let universe: Vec<Atom> = mdp.atom_universe().into_iter().collect();
    let live: Vec<usize> = (0..mdp.num_states()).filter(|&i| !mdp.is_absorbing(i)).collect();
    let mut report = SoundnessReport::default();
    for (k, stmt) in decl.statements.iter().enumerate() {
        let theta = match (&stmt.subtask, step) {
            (None, None) => Substitution::new(),
            (Some(head), Some(step)) if head.predicate == step.predicate => {
                match_atom(head, step, Substitution::new())
                    .ok_or_else(|| Error::Grounding(format!("{step} does not instantiate {head}")))?
            }
            _ => continue,
        };
        let consequent = match &stmt.consequent {
            InfluenceItem::Literal(l) if stmt.next_step => theta.apply_atom(&l.atom),
            _ => continue,
        };
        let with_action = stmt.antecedent.contains(&InfluenceItem::Action);
        let patterns: Vec<Atom> = stmt
            .antecedent
            .iter()
            .filter_map(|i| i.as_literal())
            .map(|l| theta.apply_atom(&l.atom))
            .collect();
        let influencers: Vec<&Atom> = universe
            .iter()
            .filter(|u| patterns.iter().any(|p| match_atom(p, u, Substitution::new()).is_some()))
            .collect();
        for target in universe.iter().filter(|u| match_atom(&consequent, u, Substitution::new()).is_some()) {
            report.checked += 1;
            let mut seen: HashMap<(Vec<bool>, Option<usize>), (bool, usize)> = HashMap::new();
            for &i in &live {
                let s = &mdp.states[i];
                let inputs: Vec<bool> = influencers.iter().map(|a| s.contains(a)).collect();
                for a in 0..mdp.num_actions() {
                    let next = mdp.states[mdp.transition(i, a).0].contains(target);
                    let key = (inputs.clone(), with_action.then_some(a));
                    match seen.get(&key) {
                        Some(&(v, w)) if v != next => {
                            report.violations.push(SoundnessViolation {
                                statement: k,
                                atom: target.clone(),
                                action: a,
                                state: i,
                                witness: w,
                            });
                        }
                        Some(_) => {}
                        None => {
                            seen.insert(key, (next, i));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Line-oriented rendering of a value table: `index<TAB>value<TAB>state`.
pub fn render_values(mdp: &GroundMdp, table: &ValueTable) -> String {
    let mut out = String::new();
    for (i, v) in table.values.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{v}\t{}", mdp.states[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{relevant_closure, Identity};
    use crate::dfoci::{parse_file, parse_literal};
    use crate::env::ProblemInstance;
    use crate::planner::parse_operators;

    const TAXI: &str = include_str!("../../../data/taxi.dfoci");
    const OPS: &str = include_str!("../../../data/taxi.ops");
    const SMALL: &str = include_str!("../../../data/verify3x3.inst");

    fn toy(n: usize, transitions: Vec<(usize, f64, bool)>, gamma: f64) -> GroundMdp {
        GroundMdp {
            states: (0..n)
                .map(|i| State::from_atoms([Atom::new(&format!("s{i}"), &[])]).unwrap())
                .collect(),
            actions: vec![Sym::new("a")],
            transitions,
            gamma,
            initial: vec![0],
        }
    }

    fn small() -> TaxiEnv {
        TaxiEnv::new(ProblemInstance::parse(SMALL).unwrap(), 0.99).unwrap()
    }

    fn ground_op(name: &str) -> GroundOperator {
        let ops = parse_operators(OPS).unwrap();
        ops.get(name)
            .unwrap()
            .ground(&Substitution::from_pairs([("P", "p1")]))
            .unwrap()
    }

    fn phase(name: &str) -> (TaxiEnv, GroundMdp) {
        let env = small();
        let full = env.enumerate(1_000_000).unwrap();
        let mdp = phase_mdp(&env, &full, &ground_op(name), 1_000_000).unwrap();
        (env, mdp)
    }

    fn schema(name: &str) -> AbstractionSchema {
        relevant_closure(&parse_file(TAXI).unwrap(), name, None).unwrap()
    }

    fn p1() -> Substitution {
        Substitution::from_pairs([("P", "p1")])
    }

    #[test]
    fn absorbing_state_has_zero_value() {
        let v = value_iteration(&toy(1, vec![(0, 0.0, true)], 0.99), VI_TOL);
        assert_eq!(v.values, vec![0.0]);
        assert!(v.converged);
    }

    #[test]
    fn two_state_chain() {
        let mdp = toy(2, vec![(1, -1.0, true), (1, 0.0, true)], 0.99);
        let v = value_iteration(&mdp, VI_TOL);
        assert_eq!(v.values, vec![-1.0, 0.0]);
    }

    #[test]
    fn geometric_loop_matches_closed_form() {
        // s0 loops on itself with reward -1 forever: V = -1 / (1 - gamma)
        let mdp = toy(1, vec![(0, -1.0, false)], 0.9);
        let v = value_iteration(&mdp, 1e-12);
        assert!((v.values[0] + 10.0).abs() < 1e-10);
    }

    #[test]
    fn residual_contracts_by_gamma() {
        let env = small();
        let mdp = env.enumerate(1_000_000).unwrap();
        let v = value_iteration(&mdp, VI_TOL);
        assert!(v.converged && v.residual() < VI_TOL);
        for w in v.residuals.windows(2) {
            assert!(w[1] <= mdp.gamma * w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
        let par = value_iteration_with(&mdp, VI_TOL, Execution::Parallel);
        assert_eq!(par, v);
    }

    /// Discounted return of the greedy policy, by rollout.
    fn rollout(mdp: &GroundMdp, values: &[f64], mut s: usize) -> f64 {
        let (mut g, mut disc) = (0.0, 1.0);
        for _ in 0..10_000 {
            let (j, r, done) = mdp.transition(s, greedy_action(mdp, values, s));
            g += disc * r;
            if done {
                return g;
            }
            disc *= mdp.gamma;
            s = j;
        }
        g
    }

    #[test]
    fn small_instance_values_agree_with_rollouts() {
        let env = small();
        let mdp = env.enumerate(1_000_000).unwrap();
        let v = value_iteration(&mdp, VI_TOL);
        for &s in &mdp.initial {
            assert!((rollout(&mdp, &v.values, s) - v.values[s]).abs() < 1e-8);
        }
        // 9 dests x 9 taxi cells x (9 cells + in taxi), minus delivered
        // states with the taxi away from the destination
        assert_eq!(mdp.num_states(), 738);
        assert_eq!(mdp.initial.len(), 648);
        let s = env.encode(&crate::env::TaxiConfig {
            taxi: (0, 0),
            passengers: vec![Some((0, 2))],
            dests: vec![(2, 2)],
        });
        let i = mdp.index_of(&s).unwrap();
        // 6 steps: -1 x 5 discounted, then +19
        let expected: f64 = (0..5).map(|k| -(0.99f64.powi(k))).sum::<f64>() + 19.0 * 0.99f64.powi(5);
        assert!((v.values[i] - expected).abs() < 1e-9);
    }

    #[test]
    fn pickup_phase_factorizes() {
        let (_, mdp) = phase("pickup");
        let (x, y) = crate::abstraction::partition(&schema("pickup"), &mdp.atom_universe(), &p1()).unwrap();
        assert!(y.iter().all(|a| a.predicate.as_str() == "dest"));
        assert!(!y.is_empty());
        let r = check_factorization(&mdp, &x, &y).unwrap();
        assert!(r.passed(), "{:?}", r.violations.first());
        assert!(r.groups < r.states);
    }

    #[test]
    fn empty_y_trivially_passes() {
        let (_, mdp) = phase("drop");
        let r = check_factorization(&mdp, &mdp.atom_universe(), &BTreeSet::new()).unwrap();
        assert!(r.passed());
        assert_eq!(r.groups, r.states);
    }

    #[test]
    fn taxi_position_in_y_is_caught() {
        let (_, mdp) = phase("pickup");
        let (x, mut y) = crate::abstraction::partition(&schema("pickup"), &mdp.atom_universe(), &p1()).unwrap();
        let (taxi, x): (BTreeSet<Atom>, BTreeSet<Atom>) = x.into_iter().partition(|a| a.predicate.as_str() == "taxi-at");
        y.extend(taxi);
        let r = check_factorization(&mdp, &x, &y).unwrap();
        assert!(!r.passed());
        let w = r.violations[0];
        let moved = mdp.transition(w.state, w.action);
        let other = mdp.transition(w.witness, w.action);
        assert_ne!(moved, other);
        assert!(!r.witness_lines(&mdp, 1)[0].is_empty());
    }

    #[test]
    fn partition_must_be_disjoint_and_cover() {
        let (_, mdp) = phase("pickup");
        let all = mdp.atom_universe();
        assert!(matches!(check_factorization(&mdp, &all, &all), Err(Error::NotAPartition(_))));
        let mut partial = all.clone();
        partial.pop_first();
        assert!(matches!(
            check_factorization(&mdp, &partial, &BTreeSet::new()),
            Err(Error::NotAPartition(_))
        ));
    }

    #[test]
    fn derived_abstractions_preserve_optimal_values() {
        for name in ["pickup", "drop"] {
            let (_, mdp) = phase(name);
            let r = check_value_equivalence(&mdp, &schema(name), &p1(), EQUIVALENCE_TOL).unwrap();
            assert!(r.passed(), "{name}: {r:?}");
            assert!(r.max_deviation <= EQUIVALENCE_TOL);
        }
    }

    #[test]
    fn identity_is_exact() {
        let (_, mdp) = phase("pickup");
        let r = check_value_equivalence_with(&mdp, &Identity, EQUIVALENCE_TOL);
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.classes, mdp.num_states());
    }

    #[test]
    fn dropping_taxi_position_breaks_equivalence() {
        let (_, mdp) = phase("drop");
        let mut s = schema("drop");
        s.relevant_templates.retain(|t| t.atom.predicate.as_str() != "taxi-at");
        let r = check_value_equivalence(&mdp, &s, &p1(), EQUIVALENCE_TOL).unwrap();
        assert!(!r.passed());
        assert!(!r.factorization.passed());
        assert!(r.max_deviation > EQUIVALENCE_TOL);
    }

    #[test]
    fn shipped_statements_are_sound() {
        let decl = parse_file(TAXI).unwrap();
        let env = small();
        let full = env.enumerate(1_000_000).unwrap();
        let global = check_soundness(&full, &decl, None).unwrap();
        assert!(global.passed());
        assert_eq!(global.checked, 9);
        for name in ["pickup", "drop"] {
            let mdp = phase_mdp(&env, &full, &ground_op(name), 1_000_000).unwrap();
            let step = parse_literal(&format!("{name}(p1)")).unwrap().atom;
            let r = check_soundness(&mdp, &decl, Some(&step)).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.violations.first());
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn missing_influencer_is_unsound() {
        let text = TAXI.replace("{taxi-at(L), wall(L,D), A} -+1-> taxi-at(L)", "{wall(L,D), A} -+1-> taxi-at(L)");
        let decl = parse_file(&text).unwrap();
        let full = small().enumerate(1_000_000).unwrap();
        assert!(!check_soundness(&full, &decl, None).unwrap().passed());
    }
}
