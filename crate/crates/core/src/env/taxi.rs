use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{cell_name, Cell, Dir, Placement, ProblemInstance};
use super::{GrmdpSpec, StepInfo, StepResult};
use crate::error::{Error, Result};
use crate::logic::{goal_satisfied, Atom, Goal, Literal, State, Term};
use crate::planner::Objects;
use crate::symbol::Sym;
use crate::verifier::GroundMdp;

pub const ACTION_NAMES: [&str; 6] = ["move-north", "move-south", "move-east", "move-west", "pickup", "dropoff"];
const MOVES: [Dir; 4] = [Dir::North, Dir::South, Dir::East, Dir::West];
const PICKUP: usize = 4;
const DROPOFF: usize = 5;

pub const STEP_REWARD: f64 = -1.0;
pub const PENALTY_ILLEGAL: f64 = -10.0;
pub const BONUS_DELIVERY: f64 = 20.0;

#[derive(Clone, Debug)]
struct Vocab {
    taxi_at: Sym,
    at: Sym,
    in_taxi: Sym,
    dest: Sym,
    wall: Sym,
    occupied: Sym,
    delivered: Sym,
}

/// Decoded view of a Taxi state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxiConfig {
    pub taxi: Cell,
    /// `None` while the passenger rides in the taxi; parallel to [`TaxiEnv::passengers`].
    pub passengers: Vec<Option<Cell>>,
    pub dests: Vec<Cell>,
}

/// Relational Taxi: one taxi on a walled grid, passengers with destinations.
#[derive(Clone, Debug)]
pub struct TaxiEnv {
    instance: ProblemInstance,
    spec: GrmdpSpec,
    vocab: Vocab,
    /// Cell symbols indexed by `x * height + y`.
    cells: Vec<Sym>,
    cell_of: HashMap<Sym, Cell>,
    /// Passenger symbols in name order, with their index in the instance file.
    passengers: Vec<(Sym, usize)>,
    goal_passengers: Vec<Sym>,
    blocked: HashSet<(Cell, Dir)>,
    wall_atoms: Vec<Atom>,
}

impl TaxiEnv {
    pub fn new(instance: ProblemInstance, gamma: f64) -> Result<TaxiEnv> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {gamma} outside (0, 1]")));
        }
        let vocab = Vocab {
            taxi_at: Sym::new("taxi-at"),
            at: Sym::new("at"),
            in_taxi: Sym::new("in-taxi"),
            dest: Sym::new("dest"),
            wall: Sym::new("wall"),
            occupied: Sym::new("occupied"),
            delivered: Sym::new("delivered"),
        };
        let mut cells = Vec::new();
        let mut cell_of = HashMap::new();
        for c in instance.cells() {
            let s = Sym::new(&cell_name(c));
            cells.push(s);
            cell_of.insert(s, c);
        }
        let mut passengers: Vec<(Sym, usize)> = instance
            .passengers
            .iter()
            .enumerate()
            .map(|(i, p)| (Sym::new(&p.name), i))
            .collect();
        passengers.sort_by_key(|(s, _)| s.as_str());
        let mut goal_passengers: Vec<Sym> = instance.goal.iter().map(|g| Sym::new(g)).collect();
        goal_passengers.sort_by_key(|s| s.as_str());
        let blocked: HashSet<(Cell, Dir)> = instance.walls.iter().copied().collect();
        let mut env = TaxiEnv {
            spec: GrmdpSpec {
                actions: ACTION_NAMES.iter().map(|a| Sym::new(a)).collect(),
                gamma,
                goal_family: format!("deliver {}", instance.goal.join(" ")),
                max_episode_steps: instance.max_episode_steps,
            },
            instance,
            vocab,
            cells,
            cell_of,
            passengers,
            goal_passengers,
            blocked,
            wall_atoms: Vec::new(),
        };
        env.wall_atoms = env
            .instance
            .walls
            .iter()
            .map(|(c, d)| Atom::from_parts(env.vocab.wall, [env.cell_term(*c), Term::constant(d.name())]))
            .collect();
        Ok(env)
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn spec(&self) -> &GrmdpSpec {
        &self.spec
    }

    /// move-north, move-south, move-east, move-west, pickup, dropoff.
    pub fn available_actions(&self) -> &[Sym] {
        &self.spec.actions
    }

    pub fn action_index(&self, name: &str) -> Result<usize> {
        ACTION_NAMES
            .iter()
            .position(|a| *a == name)
            .ok_or_else(|| Error::UnknownAction(name.to_owned()))
    }

    /// Passenger symbols in name order.
    pub fn passengers(&self) -> Vec<Sym> {
        self.passengers.iter().map(|(s, _)| *s).collect()
    }

    pub fn objects(&self) -> Objects {
        let mut o = Objects::default();
        o.insert("passenger", self.passengers());
        o.insert("location", self.cells.clone());
        o
    }

    fn cell_sym(&self, (x, y): Cell) -> Sym {
        self.cells[x as usize * self.instance.height as usize + y as usize]
    }

    fn cell_term(&self, c: Cell) -> Term {
        Term::Const(self.cell_sym(c))
    }

    fn unary(&self, pred: Sym, arg: Sym) -> Atom {
        Atom::from_parts(pred, [Term::Const(arg)])
    }

    fn binary(&self, pred: Sym, a: Sym, b: Sym) -> Atom {
        Atom::from_parts(pred, [Term::Const(a), Term::Const(b)])
    }

    pub fn encode(&self, config: &TaxiConfig) -> State {
        let mut atoms = self.wall_atoms.clone();
        atoms.push(self.unary(self.vocab.taxi_at, self.cell_sym(config.taxi)));
        for (k, (p, _)) in self.passengers.iter().enumerate() {
            atoms.push(match config.passengers[k] {
                Some(c) => self.binary(self.vocab.at, *p, self.cell_sym(c)),
                None => self.unary(self.vocab.in_taxi, *p),
            });
            atoms.push(self.binary(self.vocab.dest, *p, self.cell_sym(config.dests[k])));
        }
        State::from_atoms(atoms).expect("encoded atoms are ground")
    }

    pub fn decode(&self, state: &State) -> Result<TaxiConfig> {
        let bad = |msg: String| Error::Instance(format!("invalid state {state}: {msg}"));
        let n = self.passengers.len();
        let mut taxi = None;
        let mut passengers: Vec<Option<Option<Cell>>> = vec![None; n];
        let mut dests: Vec<Option<Cell>> = vec![None; n];
        let index = |p: Sym| self.passengers.iter().position(|(s, _)| *s == p);
        let cell = |t: &Term| self.cell_of.get(&t.sym()).copied();
        for a in state.iter() {
            let v = &self.vocab;
            if a.predicate == v.taxi_at {
                let c = a.args.first().and_then(cell).ok_or_else(|| bad(format!("bad {a}")))?;
                if taxi.replace(c).is_some() {
                    return Err(bad("taxi in two cells".into()));
                }
            } else if a.predicate == v.at || a.predicate == v.in_taxi || a.predicate == v.dest {
                let k = a.args.first().and_then(|t| index(t.sym())).ok_or_else(|| bad(format!("bad {a}")))?;
                if a.predicate == v.dest {
                    let c = a.args.get(1).and_then(cell).ok_or_else(|| bad(format!("bad {a}")))?;
                    if dests[k].replace(c).is_some() {
                        return Err(bad(format!("two destinations for {}", self.passengers[k].0)));
                    }
                } else {
                    let pos = if a.predicate == v.at {
                        Some(a.args.get(1).and_then(cell).ok_or_else(|| bad(format!("bad {a}")))?)
                    } else {
                        None
                    };
                    if passengers[k].replace(pos).is_some() {
                        return Err(bad(format!("{} placed twice", self.passengers[k].0)));
                    }
                }
            }
        }
        let taxi = taxi.ok_or_else(|| bad("no taxi".into()))?;
        let passengers: Vec<Option<Cell>> = passengers
            .into_iter()
            .enumerate()
            .map(|(k, p)| p.ok_or_else(|| bad(format!("{} not placed", self.passengers[k].0))))
            .collect::<Result<_>>()?;
        if passengers.iter().filter(|p| p.is_none()).count() > 1 {
            return Err(bad("more than one passenger in the taxi".into()));
        }
        let dests = dests
            .into_iter()
            .enumerate()
            .map(|(k, d)| d.ok_or_else(|| bad(format!("{} has no destination", self.passengers[k].0))))
            .collect::<Result<_>>()?;
        Ok(TaxiConfig { taxi, passengers, dests })
    }

    pub fn validate_state(&self, state: &State) -> Result<()> {
        let config = self.decode(state)?;
        if self.encode(&config) != *state {
            return Err(Error::Instance(format!("state {state} has facts outside the domain")));
        }
        Ok(())
    }

    /// Initial state; randomized placements are drawn from `seed`.
    pub fn reset(&self, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = &self.instance;
        let mut pick = |options: Vec<Cell>| options[rng.gen_range(0..options.len())];
        let taxi = pick(inst.candidates(&inst.taxi));
        let mut starts: Vec<Cell> = Vec::new();
        let mut dests_by_file = Vec::new();
        for p in &inst.passengers {
            let start = match &p.start {
                Placement::Fixed(c) => *c,
                other => pick(
                    inst.candidates(other)
                        .into_iter()
                        .filter(|c| !starts.contains(c))
                        .collect(),
                ),
            };
            let dest = match &p.dest {
                Placement::Fixed(c) => *c,
                other => pick(inst.candidates(other).into_iter().filter(|c| *c != start).collect()),
            };
            starts.push(start);
            dests_by_file.push(dest);
        }
        self.encode(&self.config_from_file_order(taxi, &starts, &dests_by_file))
    }

    fn config_from_file_order(&self, taxi: Cell, starts: &[Cell], dests: &[Cell]) -> TaxiConfig {
        TaxiConfig {
            taxi,
            passengers: self.passengers.iter().map(|(_, i)| Some(starts[*i])).collect(),
            dests: self.passengers.iter().map(|(_, i)| dests[*i]).collect(),
        }
    }

    /// Every state `reset` can return.
    pub fn initial_states(&self) -> Vec<State> {
        let inst = &self.instance;
        let mut partial: Vec<(Vec<Cell>, Vec<Cell>)> = vec![(vec![], vec![])];
        for p in &inst.passengers {
            let mut next = Vec::new();
            for (starts, dests) in &partial {
                let start_opts: Vec<Cell> = match &p.start {
                    Placement::Fixed(c) => vec![*c],
                    other => inst.candidates(other).into_iter().filter(|c| !starts.contains(c)).collect(),
                };
                for s in start_opts {
                    let dest_opts: Vec<Cell> = match &p.dest {
                        Placement::Fixed(c) => vec![*c],
                        other => inst.candidates(other).into_iter().filter(|c| *c != s).collect(),
                    };
                    for d in dest_opts {
                        let mut st = starts.clone();
                        st.push(s);
                        let mut ds = dests.clone();
                        ds.push(d);
                        next.push((st, ds));
                    }
                }
            }
            partial = next;
        }
        let mut out = Vec::new();
        for taxi in inst.candidates(&inst.taxi) {
            for (starts, dests) in &partial {
                out.push(self.encode(&self.config_from_file_order(taxi, starts, dests)));
            }
        }
        out
    }

    /// Ground goal for a state: every goal passenger at its destination.
    pub fn goal(&self, state: &State) -> Goal {
        let lits = self.goal_passengers.iter().filter_map(|p| {
            state
                .with_predicate(self.vocab.dest)
                .find(|a| a.args[0].sym() == *p)
                .map(|d| Literal::pos(self.binary(self.vocab.at, *p, d.args[1].sym())))
        });
        Goal::new(lits).expect("goal literals are ground")
    }

    fn taxi_cell(&self, state: &State) -> Option<Cell> {
        state
            .with_predicate(self.vocab.taxi_at)
            .next()
            .and_then(|a| self.cell_of.get(&a.args[0].sym()).copied())
    }

    /// Raw dynamics `(s, a) -> (s', r)`, without goal or budget handling.
    pub fn transition(&self, state: &State, action: usize) -> Result<(State, f64, StepInfo)> {
        if action >= ACTION_NAMES.len() {
            return Err(Error::UnknownAction(format!("#{action}")));
        }
        let taxi = self
            .taxi_cell(state)
            .ok_or_else(|| Error::Instance(format!("no taxi in {state}")))?;
        let v = &self.vocab;
        let mut next = state.clone();
        let mut reward = STEP_REWARD;
        let mut info = StepInfo::default();
        let here = self.cell_sym(taxi);
        let riding = self
            .passengers
            .iter()
            .map(|(p, _)| *p)
            .find(|p| state.contains(&self.unary(v.in_taxi, *p)));
        match action {
            PICKUP => {
                // first waiting passenger here, in name order; delivered ones stay put
                let candidate = self.passengers.iter().map(|(p, _)| *p).find(|p| {
                    state.contains(&self.binary(v.at, *p, here)) && !state.contains(&self.binary(v.dest, *p, here))
                });
                match (riding, candidate) {
                    (None, Some(p)) => {
                        next.remove(&self.binary(v.at, p, here));
                        next.insert(self.unary(v.in_taxi, p))?;
                    }
                    _ => {
                        reward += PENALTY_ILLEGAL;
                        info.illegal = true;
                    }
                }
            }
            DROPOFF => match riding {
                Some(p) => {
                    next.remove(&self.unary(v.in_taxi, p));
                    next.insert(self.binary(v.at, p, here))?;
                    if state.contains(&self.binary(v.dest, p, here)) {
                        reward += BONUS_DELIVERY;
                        info.delivered = Some(p);
                    }
                }
                None => {
                    reward += PENALTY_ILLEGAL;
                    info.illegal = true;
                }
            },
            m => {
                let dir = MOVES[m];
                let (dx, dy) = dir.delta();
                let (nx, ny) = (taxi.0 as i32 + dx, taxi.1 as i32 + dy);
                let inside = nx >= 0 && ny >= 0 && nx < self.instance.width as i32 && ny < self.instance.height as i32;
                if inside && !self.blocked.contains(&(taxi, dir)) {
                    next.remove(&self.unary(v.taxi_at, here));
                    next.insert(self.unary(v.taxi_at, self.cell_sym((nx as u8, ny as u8))))?;
                }
            }
        }
        Ok((next, reward, info))
    }

    /// One environment step; `done` reports goal satisfaction only (budgets
    /// are tracked by [`super::Episode`]).
    pub fn step(&self, state: &State, action: usize) -> Result<StepResult> {
        let (next_state, reward, info) = self.transition(state, action)?;
        let done = goal_satisfied(&next_state, &self.goal(&next_state));
        Ok(StepResult {
            next_state,
            reward,
            done,
            truncated: false,
            info,
        })
    }

    /// Coarse task-level view used by the planner: `in-taxi`, `occupied`,
    /// `delivered` and the static `dest` facts.
    pub fn planning_state(&self, state: &State) -> State {
        let v = &self.vocab;
        let mut atoms = Vec::new();
        for (p, _) in &self.passengers {
            let in_taxi = self.unary(v.in_taxi, *p);
            if state.contains(&in_taxi) {
                atoms.push(in_taxi);
                atoms.push(Atom::from_parts(v.occupied, []));
            }
            for d in state.with_predicate(v.dest).filter(|a| a.args[0].sym() == *p) {
                atoms.push(d.clone());
                if state.contains(&self.binary(v.at, *p, d.args[1].sym())) {
                    atoms.push(self.unary(v.delivered, *p));
                }
            }
        }
        State::from_atoms(atoms).expect("ground")
    }

    /// The goal compiled to the planning vocabulary.
    pub fn planning_goal(&self) -> Goal {
        Goal::new(
            self.goal_passengers
                .iter()
                .map(|p| Literal::pos(self.unary(self.vocab.delivered, *p))),
        )
        .expect("ground")
    }

    /// Largest undiscounted return reachable from `state`, by breadth-first
    /// search over the dynamics. Deliveries are irreversible and every goal
    /// passenger is delivered exactly once on any goal path, so the best
    /// return is the bonus total minus the shortest path length.
    pub fn optimal_return(&self, state: &State) -> Option<f64> {
        let goal = self.goal(state);
        let pending = self
            .goal_passengers
            .iter()
            .filter(|p| {
                !state
                    .with_predicate(self.vocab.dest)
                    .any(|d| d.args[0].sym() == **p && state.contains(&self.binary(self.vocab.at, **p, d.args[1].sym())))
            })
            .count();
        debug_assert_eq!(self.goal_passengers.len(), self.passengers.len());
        let mut seen = HashSet::from([state.clone()]);
        let mut frontier = VecDeque::from([(state.clone(), 0usize)]);
        while let Some((s, d)) = frontier.pop_front() {
            if goal_satisfied(&s, &goal) {
                return Some(pending as f64 * BONUS_DELIVERY + d as f64 * STEP_REWARD);
            }
            for a in 0..ACTION_NAMES.len() {
                let (n, _, _) = self.transition(&s, a).ok()?;
                if seen.insert(n.clone()) {
                    frontier.push_back((n, d + 1));
                }
            }
        }
        None
    }

    /// Exhaustive reachable state graph from every admissible initial state.
    /// Goal states are absorbing (self-loop, reward 0, done).
    pub fn enumerate(&self, max_states: usize) -> Result<GroundMdp> {
        let mut index: HashMap<State, usize> = HashMap::new();
        let mut states: Vec<State> = Vec::new();
        let mut initial = Vec::new();
        for s in self.initial_states() {
            if !index.contains_key(&s) {
                index.insert(s.clone(), states.len());
                initial.push(states.len());
                states.push(s);
            }
        }
        let na = ACTION_NAMES.len();
        let mut transitions = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            if goal_satisfied(&s, &self.goal(&s)) {
                transitions.extend(std::iter::repeat_n((i, 0.0, true), na));
            } else {
                for a in 0..na {
                    let r = self.step(&s, a)?;
                    let j = match index.get(&r.next_state) {
                        Some(&j) => j,
                        None => {
                            if states.len() >= max_states {
                                return Err(Error::StateBudget(max_states));
                            }
                            index.insert(r.next_state.clone(), states.len());
                            states.push(r.next_state);
                            states.len() - 1
                        }
                    };
                    transitions.push((j, r.reward, r.done));
                }
            }
            i += 1;
        }
        Ok(GroundMdp {
            states,
            actions: self.spec.actions.clone(),
            transitions,
            gamma: self.spec.gamma,
            initial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfoci::parse_literal;
    use crate::env::Episode;

    fn atom(s: &str) -> Atom {
        parse_literal(s).unwrap().atom
    }

    fn env(text: &str) -> TaxiEnv {
        TaxiEnv::new(ProblemInstance::parse(text).unwrap(), 0.99).unwrap()
    }

    fn task1() -> TaxiEnv {
        env(include_str!("../../../../data/task1.inst"))
    }

    fn fixed5() -> TaxiEnv {
        env(&include_str!("../../../../data/task1.inst")
            .replace("taxi ?", "taxi l00")
            .replace("passenger p1 at * dest *", "passenger p1 at R dest l40"))
    }

    #[test]
    fn six_actions_stable_and_distinct() {
        let e = task1();
        let names = e.spec().action_names();
        assert_eq!(names, ACTION_NAMES);
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 6);
        assert_eq!(e.available_actions(), e.available_actions());
        assert!(matches!(e.action_index("fly"), Err(Error::UnknownAction(_))));
        assert!(e.step(&e.reset(0), 6).is_err());
    }

    #[test]
    fn reset_fixed_and_seeded() {
        let e = fixed5();
        assert_eq!(e.reset(1), e.reset(99));
        assert!(e.reset(1).contains(&atom("at(p1,l04)")));
        assert!(e.reset(1).contains(&atom("taxi-at(l00)")));

        let r = task1();
        assert_eq!(r.reset(7), r.reset(7));
        let mut distinct = HashSet::new();
        for seed in 0..50 {
            let s = r.reset(seed);
            r.validate_state(&s).unwrap();
            let c = r.decode(&s).unwrap();
            assert_ne!(c.passengers[0], Some(c.dests[0]));
            assert!(r.instance().depot_cells().contains(&c.dests[0]));
            distinct.insert(s);
        }
        assert!(distinct.len() > 10);
    }

    #[test]
    fn move_north_from_origin() {
        let e = fixed5();
        let r = e.step(&e.reset(0), e.action_index("move-north").unwrap()).unwrap();
        assert!(r.next_state.contains(&atom("taxi-at(l01)")));
        assert_eq!(r.reward, -1.0);
        assert!(!r.done);
    }

    #[test]
    fn walls_and_borders_block() {
        let e = fixed5();
        let s = e.reset(0); // taxi at l00, wall on its east side
        let east = e.step(&s, e.action_index("move-east").unwrap()).unwrap();
        assert_eq!(east.next_state, s);
        assert_eq!(east.reward, -1.0);
        let south = e.step(&s, e.action_index("move-south").unwrap()).unwrap();
        assert_eq!(south.next_state, s);
    }

    #[test]
    fn illegal_pickup_costs_eleven() {
        let e = fixed5();
        let s = e.reset(0);
        let r = e.step(&s, PICKUP).unwrap();
        assert_eq!(r.next_state, s);
        assert_eq!(r.reward, -11.0);
        assert!(r.info.illegal);
        let d = e.step(&s, DROPOFF).unwrap();
        assert_eq!(d.reward, -11.0);
    }

    #[test]
    fn delivery_pays_nineteen_and_ends_task() {
        let e = fixed5();
        let s = e.encode(&TaxiConfig {
            taxi: (4, 0),
            passengers: vec![None],
            dests: vec![(4, 0)],
        });
        assert!(s.contains(&atom("in-taxi(p1)")));
        let r = e.step(&s, DROPOFF).unwrap();
        assert!(r.next_state.contains(&atom("at(p1,l40)")));
        assert!(!r.next_state.contains(&atom("in-taxi(p1)")));
        assert_eq!(r.reward, 19.0);
        assert!(r.done);
        assert_eq!(r.info.delivered, Some(Sym::new("p1")));
    }

    #[test]
    fn pickup_then_wrong_dropoff() {
        let e = fixed5();
        let s = e.encode(&TaxiConfig {
            taxi: (0, 4),
            passengers: vec![Some((0, 4))],
            dests: vec![(4, 0)],
        });
        let r = e.step(&s, PICKUP).unwrap();
        assert!(r.next_state.contains(&atom("in-taxi(p1)")));
        assert_eq!(r.reward, -1.0);
        let again = e.step(&r.next_state, PICKUP).unwrap();
        assert!(again.info.illegal, "capacity is one");
        let d = e.step(&r.next_state, DROPOFF).unwrap();
        assert_eq!(d.reward, -1.0);
        assert!(!d.done);
        assert_eq!(d.next_state, s);
    }

    #[test]
    fn delivered_passenger_is_not_picked_up_again() {
        let e = env(&include_str!("../../../../data/task2.inst").replace("taxi ?", "taxi l00"));
        let s = e.encode(&TaxiConfig {
            taxi: (0, 0),
            passengers: vec![Some((0, 0)), Some((0, 4))],
            dests: vec![(0, 0), (4, 4)],
        });
        let r = e.step(&s, PICKUP).unwrap();
        assert!(r.info.illegal);
    }

    #[test]
    fn episode_budget_truncates() {
        let e = env("grid 3 3\ntaxi l00\npassenger p1 at l22 dest l02\nmax-steps 3\n");
        let mut ep = Episode::new(&e, 0);
        for _ in 0..2 {
            assert!(!ep.step(PICKUP).unwrap().done);
        }
        let last = ep.step(PICKUP).unwrap();
        assert!(last.done && last.truncated);
        assert_eq!(ep.total_reward, -33.0);
    }

    #[test]
    fn invariants_hold_along_random_walks() {
        let e = env(include_str!("../../../../data/task2.inst"));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let mut s = e.reset(seed);
            let statics: Vec<Atom> = s
                .iter()
                .filter(|a| a.predicate == Sym::new("dest") || a.predicate == Sym::new("wall"))
                .cloned()
                .collect();
            for _ in 0..200 {
                let a = rng.gen_range(0..6);
                let r = e.step(&s, a).unwrap();
                assert_eq!(e.step(&s, a).unwrap(), r, "deterministic");
                e.validate_state(&r.next_state).unwrap();
                for f in &statics {
                    assert!(r.next_state.contains(f));
                }
                s = r.next_state;
            }
        }
    }

    #[test]
    fn enumerate_three_by_three_fixed_dest() {
        let e = env("grid 3 3\ntaxi l11\npassenger p1 at l00 dest l22\nmax-steps 100\n");
        let mdp = e.enumerate(1_000_000).unwrap();
        // 9 taxi cells x (9 passenger cells + in taxi), minus the eight goal
        // states with the taxi away from the drop cell.
        assert_eq!(mdp.states.len(), 82);
        assert_eq!(mdp.transitions.len(), 82 * 6);
        for (i, s) in mdp.states.iter().enumerate() {
            let absorbing = goal_satisfied(s, &e.goal(s));
            for a in 0..6 {
                let (j, r, done) = mdp.transitions[i * 6 + a];
                if absorbing {
                    assert_eq!((j, r, done), (i, 0.0, true));
                }
            }
        }
        assert!(matches!(e.enumerate(10), Err(Error::StateBudget(10))));
    }

    #[test]
    fn optimal_return_by_hand() {
        let e = env("grid 3 3\ntaxi l00\npassenger p1 at l02 dest l22\nmax-steps 100\n");
        // two moves north, pickup, two moves east, dropoff: 6 steps, +20
        assert_eq!(e.optimal_return(&e.reset(0)), Some(14.0));
    }

    #[test]
    fn planning_projection() {
        let e = fixed5();
        let s = e.encode(&TaxiConfig {
            taxi: (0, 0),
            passengers: vec![None],
            dests: vec![(4, 0)],
        });
        let p = e.planning_state(&s);
        assert_eq!(p.to_string(), "{dest(p1,l40), in-taxi(p1), occupied}");
        assert_eq!(e.planning_goal().to_string(), "{delivered(p1)}");
    }
}
