//! Breadth-first forward search over STRIPS-style sub-task operators.
//!
//! Operator files reuse the literal syntax of `.dfoci` files:
//!
//! ```text
//! predicate in-taxi/1
//! predicate occupied/0
//! operator pickup(P: passenger)
//!   pre: ~in-taxi(P), ~occupied
//!   add: in-taxi(P), occupied
//! ```

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::logic::{goal_satisfied, Atom, Goal, Literal, State, Substitution, Term};
use crate::symbol::Sym;

pub const NODE_BUDGET: usize = 1_000_000;

/// Typed object lists, e.g. `passenger -> [p1, p2]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Objects(BTreeMap<String, Vec<Sym>>);

impl Objects {
    pub fn insert(&mut self, ty: &str, mut objects: Vec<Sym>) {
        objects.sort_by_key(|s| s.as_str());
        self.0.insert(ty.to_owned(), objects);
    }

    pub fn of_type(&self, ty: &str) -> &[Sym] {
        self.0.get(ty).map_or(&[], |v| v.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtaskOperator {
    pub name: Sym,
    pub params: Vec<(Sym, String)>,
    pub preconditions: Vec<Literal>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
}

impl SubtaskOperator {
    pub fn head(&self) -> Atom {
        Atom::from_parts(self.name, self.params.iter().map(|(v, _)| Term::Var(*v)))
    }

    pub fn ground(&self, theta: &Substitution) -> Result<GroundOperator> {
        let name = theta.apply_atom(&self.head());
        if !name.is_ground() {
            return Err(Error::Grounding(format!("{name} is not fully bound")));
        }
        Ok(GroundOperator {
            name,
            preconditions: self
                .preconditions
                .iter()
                .map(|l| crate::logic::substitute(l, theta))
                .collect(),
            add: self.add.iter().map(|a| theta.apply_atom(a)).collect(),
            delete: self.delete.iter().map(|a| theta.apply_atom(a)).collect(),
        })
    }

    /// Binding of the parameters from a ground step such as `pickup(p1)`.
    pub fn grounding_for(&self, step: &Atom) -> Result<Substitution> {
        if step.predicate != self.name || step.arity() != self.params.len() || !step.is_ground() {
            return Err(Error::Grounding(format!("{step} does not instantiate {}", self.head())));
        }
        let mut theta = Substitution::new();
        for ((v, _), t) in self.params.iter().zip(&step.args) {
            theta.bind(*v, *t);
        }
        Ok(theta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundOperator {
    pub name: Atom,
    pub preconditions: Vec<Literal>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
}

impl GroundOperator {
    /// The effects as a condition: add list true, delete list false.
    pub fn effects_goal(&self) -> Goal {
        let del = self
            .delete
            .iter()
            .filter(|d| !self.add.contains(d))
            .map(|d| Literal::neg(d.clone()));
        Goal::new(self.add.iter().cloned().map(Literal::pos).chain(del)).expect("ground operator")
    }
}

pub fn applicable(op: &GroundOperator, state: &State) -> bool {
    op.preconditions
        .iter()
        .all(|l| state.contains(&l.atom) == l.positive)
}

/// `(state \ delete) ∪ add`.
pub fn apply(op: &GroundOperator, state: &State) -> Result<State> {
    if !applicable(op, state) {
        return Err(Error::NoPlan(format!("{} is not applicable in {state}", op.name)));
    }
    let mut next = state.clone();
    for d in &op.delete {
        next.remove(d);
    }
    for a in &op.add {
        next.insert(a.clone())?;
    }
    Ok(next)
}

/// All ground instances, sorted by the printed step name.
pub fn ground_all(operators: &[SubtaskOperator], objects: &Objects) -> Result<Vec<GroundOperator>> {
    let mut out = Vec::new();
    for op in operators {
        let mut bindings = vec![Substitution::new()];
        for (var, ty) in &op.params {
            let mut next = Vec::new();
            for theta in &bindings {
                for o in objects.of_type(ty) {
                    let mut t = theta.clone();
                    t.bind(*var, Term::Const(*o));
                    next.push(t);
                }
            }
            bindings = next;
        }
        for theta in bindings {
            out.push(op.ground(&theta)?);
        }
    }
    out.sort_by_key(|g| g.name.to_string());
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<Atom>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Shortest plan by breadth-first search. Successors are expanded in step
/// name order, so among shortest plans the lexicographically smallest one
/// is returned.
pub fn plan(initial: &State, goal: &Goal, operators: &[SubtaskOperator], objects: &Objects) -> Result<Plan> {
    let ground = ground_all(operators, objects)?;
    if goal_satisfied(initial, goal) {
        return Ok(Plan::default());
    }
    // nodes: (state, parent index, step index)
    let mut nodes: Vec<(State, usize, usize)> = vec![(initial.clone(), usize::MAX, usize::MAX)];
    let mut seen: HashSet<State> = HashSet::from([initial.clone()]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        for (k, op) in ground.iter().enumerate() {
            if !applicable(op, &nodes[n].0) {
                continue;
            }
            let next = apply(op, &nodes[n].0)?;
            if !seen.insert(next.clone()) {
                continue;
            }
            if nodes.len() >= NODE_BUDGET {
                return Err(Error::NoPlan(format!("node budget of {NODE_BUDGET} exhausted")));
            }
            let done = goal_satisfied(&next, goal);
            nodes.push((next, n, k));
            let id = nodes.len() - 1;
            if done {
                let mut steps = Vec::new();
                let mut cur = id;
                while cur != 0 {
                    steps.push(ground[nodes[cur].2].name.clone());
                    cur = nodes[cur].1;
                }
                steps.reverse();
                return Ok(Plan { steps });
            }
            queue.push_back(id);
        }
    }
    Err(Error::NoPlan(format!("goal {goal} unreachable")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorSet {
    pub predicates: BTreeMap<Sym, usize>,
    pub operators: Vec<SubtaskOperator>,
}

impl OperatorSet {
    pub fn get(&self, name: &str) -> Option<&SubtaskOperator> {
        self.operators.iter().find(|o| o.name.as_str() == name)
    }

    pub fn load(path: &std::path::Path) -> Result<OperatorSet> {
        parse_operators(&crate::error::read_text(path)?)
    }
}

pub fn parse_operators(text: &str) -> Result<OperatorSet> {
    let mut cur = Cursor::new(text)?;
    let mut set = OperatorSet::default();
    while !cur.at_end() {
        let at = cur.position();
        if cur.keyword("predicate") {
            let name = cur.ident()?;
            cur.expect(&Tok::Slash)?;
            let arity = cur.natural()?;
            set.predicates.insert(Sym::new(&name), arity);
            continue;
        }
        if !cur.keyword("operator") {
            return Err(cur.error("expected `predicate` or `operator`"));
        }
        let name = Sym::new(&cur.ident()?);
        cur.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !cur.eat(&Tok::RParen) {
            loop {
                let v = Sym::new(&cur.variable()?);
                cur.expect(&Tok::Colon)?;
                params.push((v, cur.ident()?));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RParen)?;
        }
        let mut op = SubtaskOperator {
            name,
            params,
            preconditions: vec![],
            add: vec![],
            delete: vec![],
        };
        loop {
            let section = match cur.peek_ident() {
                Some(s @ ("pre" | "add" | "del")) if cur.peek_at(1) == Some(&Tok::Colon) => s.to_owned(),
                _ => break,
            };
            cur.next();
            cur.next();
            let lits = cur.literal_list()?;
            match section.as_str() {
                "pre" => op.preconditions.extend(lits),
                _ => {
                    if let Some(l) = lits.iter().find(|l| !l.positive) {
                        return Err(cur.error(format!("negated effect `{l}`")));
                    }
                    let atoms = lits.into_iter().map(|l| l.atom);
                    if section == "add" {
                        op.add.extend(atoms)
                    } else {
                        op.delete.extend(atoms)
                    }
                }
            }
        }
        check_operator(&op, &set.predicates).map_err(|msg| Error::Syntax {
            line: at.0,
            col: at.1,
            msg,
        })?;
        set.operators.push(op);
    }
    Ok(set)
}

fn check_operator(op: &SubtaskOperator, predicates: &BTreeMap<Sym, usize>) -> Result<(), String> {
    let params: Vec<Sym> = op.params.iter().map(|(v, _)| *v).collect();
    let atoms = op
        .preconditions
        .iter()
        .map(|l| &l.atom)
        .chain(&op.add)
        .chain(&op.delete);
    for a in atoms {
        match predicates.get(&a.predicate) {
            None => return Err(format!("operator {}: undeclared predicate `{}`", op.name, a.predicate)),
            Some(&n) if n != a.arity() => {
                return Err(format!("operator {}: `{a}` does not match arity {n}", op.name))
            }
            _ => {}
        }
        if let Some(v) = a.variables().find(|v| !params.contains(v)) {
            return Err(format!("operator {}: variable `{v}` is not a parameter", op.name));
        }
    }
    Ok(())
}
