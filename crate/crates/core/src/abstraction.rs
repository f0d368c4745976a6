//! Sub-task state abstractions derived by backward influence closure, and
//! the projection of ground states onto them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use smallvec::SmallVec;

use crate::dfoci::{validate, DFociStatement, DomainDecl, InfluenceItem};
use crate::error::{Error, Result};
use crate::lexer::Cursor;
use crate::logic::{Atom, Literal, State, Substitution, Term};
use crate::symbol::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureDepth {
    Fixpoint,
    Sweeps(usize),
}

impl fmt::Display for ClosureDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureDepth::Fixpoint => f.write_str("fixpoint"),
            ClosureDepth::Sweeps(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractionSchema {
    /// First-order head whose variables are the sub-task parameters.
    pub subtask: Atom,
    /// Positive templates in canonical (name) order.
    pub relevant_templates: Vec<Literal>,
    pub include_action: bool,
    pub depth_used: ClosureDepth,
}

impl AbstractionSchema {
    pub fn params(&self) -> Vec<Sym> {
        self.subtask.variables().collect()
    }

    pub fn name(&self) -> &'static str {
        self.subtask.predicate.as_str()
    }

    /// Canonical text block: `#` header lines, then one template per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# subtask {}\n# depth {}\n# action {}\n",
            self.subtask,
            self.depth_used,
            if self.include_action { "yes" } else { "no" }
        );
        for t in &self.relevant_templates {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

/// Argument role of a template position, used to compare templates up to
/// renaming of free variables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Role {
    Param(usize),
    Free(usize),
    Const(&'static str),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct TemplateKey {
    predicate: &'static str,
    roles: Vec<Role>,
}

fn template_key(atom: &Atom, params: &[Sym]) -> TemplateKey {
    let mut free: Vec<Sym> = Vec::new();
    let roles = atom
        .args
        .iter()
        .map(|t| match *t {
            Term::Const(c) => Role::Const(c.as_str()),
            Term::Var(v) => match params.iter().position(|p| *p == v) {
                Some(i) => Role::Param(i),
                None => {
                    let i = free.iter().position(|f| *f == v).unwrap_or_else(|| {
                        free.push(v);
                        free.len() - 1
                    });
                    Role::Free(i)
                }
            },
        })
        .collect();
    TemplateKey {
        predicate: atom.predicate.as_str(),
        roles,
    }
}

/// Template-level unification: parameters are distinct symbols, free
/// variables match anything, a parameter may stand for any constant.
fn templates_unify(a: &TemplateKey, b: &TemplateKey) -> bool {
    a.predicate == b.predicate
        && a.roles.len() == b.roles.len()
        && a.roles.iter().zip(&b.roles).all(|(x, y)| match (x, y) {
            (Role::Free(_), _) | (_, Role::Free(_)) => true,
            (Role::Param(i), Role::Param(j)) => i == j,
            (Role::Const(c), Role::Const(d)) => c == d,
            (Role::Param(_), Role::Const(_)) | (Role::Const(_), Role::Param(_)) => true,
        })
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum RelKey {
    Template(TemplateKey),
    Action,
    TaskReward,
    OptionReward,
}

struct NormalizedStatement {
    antecedent: Vec<(RelKey, Option<Literal>)>,
    consequent: RelKey,
}

fn rel_key(item: &InfluenceItem, params: &[Sym]) -> (RelKey, Option<Literal>) {
    match item {
        InfluenceItem::Literal(l) => {
            let lit = Literal::pos(l.atom.clone());
            (RelKey::Template(template_key(&lit.atom, params)), Some(lit))
        }
        InfluenceItem::Action => (RelKey::Action, None),
        InfluenceItem::TaskReward => (RelKey::TaskReward, None),
        InfluenceItem::OptionReward => (RelKey::OptionReward, None),
    }
}

fn consequent_hits(consequent: &RelKey, rel: &BTreeMap<RelKey, Option<Literal>>) -> bool {
    match consequent {
        RelKey::Template(t) => rel.keys().any(|k| match k {
            RelKey::Template(u) => templates_unify(t, u),
            _ => false,
        }),
        other => rel.contains_key(other),
    }
}

/// Renames a statement's head variables to the canonical parameters and
/// moves any clashing free variable out of the way.
fn normalize(stmt: &DFociStatement, params: &[Sym]) -> NormalizedStatement {
    let mut theta = Substitution::new();
    if let Some(head) = &stmt.subtask {
        for (v, p) in head.variables().zip(params) {
            theta.bind(v, Term::Var(*p));
        }
    }
    let head_vars: BTreeSet<Sym> = stmt.subtask.iter().flat_map(|h| h.variables()).collect();
    let mut used: BTreeSet<&str> = params.iter().map(|p| p.as_str()).collect();
    let all_items = stmt.antecedent.iter().chain(std::iter::once(&stmt.consequent));
    let mut free: Vec<Sym> = all_items
        .filter_map(InfluenceItem::as_literal)
        .flat_map(|l| l.atom.variables().collect::<Vec<_>>())
        .filter(|v| !head_vars.contains(v))
        .collect();
    free.sort_by_key(|v| v.as_str());
    free.dedup();
    used.extend(free.iter().map(|v| v.as_str()));
    for v in free {
        if params.contains(&v) {
            let mut n = 1;
            let fresh = loop {
                let candidate = format!("{}_{n}", v.as_str());
                if !used.contains(candidate.as_str()) {
                    break Sym::new(&candidate);
                }
                n += 1;
            };
            used.insert(fresh.as_str());
            theta.bind(v, Term::Var(fresh));
        }
    }
    let rename = |item: &InfluenceItem| match item {
        InfluenceItem::Literal(l) => InfluenceItem::Literal(crate::logic::substitute(l, &theta)),
        other => other.clone(),
    };
    NormalizedStatement {
        antecedent: stmt.antecedent.iter().map(|i| rel_key(&rename(i), params)).collect(),
        consequent: rel_key(&rename(&stmt.consequent), params).0,
    }
}

/// Backward influence closure for one sub-task, seeded with `R` and `Ro`.
///
/// `depth = None` runs to the fixpoint; `Some(d)` stops after `d` sweeps.
/// Sweeps are synchronous (every statement sees the set from the start of
/// the sweep), so the result does not depend on statement order.
pub fn relevant_closure(decl: &DomainDecl, subtask: &str, depth: Option<usize>) -> Result<AbstractionSchema> {
    let diags = validate(decl);
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    let name = Sym::new(subtask);
    let arity = decl
        .subtasks
        .get(&name)
        .copied()
        .ok_or_else(|| Error::UnknownSubtask(subtask.to_owned()))?;

    let head = decl
        .statements
        .iter()
        .filter_map(|s| s.subtask.as_ref())
        .filter(|h| h.predicate == name)
        .min_by_key(|h| h.to_string())
        .cloned()
        .unwrap_or_else(|| {
            Atom::from_parts(name, (0..arity).map(|i| Term::Var(Sym::new(&format!("P{i}")))))
        });
    let params: Vec<Sym> = head.variables().collect();

    let applicable: Vec<NormalizedStatement> = decl
        .statements
        .iter()
        .filter(|s| s.subtask.as_ref().is_none_or(|h| h.predicate == name))
        .map(|s| normalize(s, &params))
        .collect();

    let mut rel: BTreeMap<RelKey, Option<Literal>> = BTreeMap::new();
    rel.insert(RelKey::TaskReward, None);
    rel.insert(RelKey::OptionReward, None);

    let mut sweeps = 0usize;
    let depth_used = loop {
        let mut additions: BTreeMap<RelKey, Option<Literal>> = BTreeMap::new();
        for stmt in &applicable {
            if consequent_hits(&stmt.consequent, &rel) {
                for (k, lit) in &stmt.antecedent {
                    merge(&mut additions, k.clone(), lit.clone());
                }
            }
        }
        let grows = additions
            .iter()
            .any(|(k, l)| !rel.contains_key(k) || prefer(l, &rel[k]));
        if !grows {
            break ClosureDepth::Fixpoint;
        }
        if depth == Some(sweeps) {
            break ClosureDepth::Sweeps(sweeps);
        }
        for (k, l) in additions {
            merge(&mut rel, k, l);
        }
        sweeps += 1;
    };

    let mut relevant_templates: Vec<Literal> = rel.values().filter_map(|l| l.clone()).collect();
    relevant_templates.sort_by(|a, b| a.name_cmp(b));
    Ok(AbstractionSchema {
        subtask: head,
        relevant_templates,
        include_action: rel.contains_key(&RelKey::Action),
        depth_used,
    })
}

/// Among templates equal up to free-variable renaming, keep the one with the
/// smallest rendering so the result is independent of discovery order.
fn prefer(candidate: &Option<Literal>, current: &Option<Literal>) -> bool {
    match (candidate, current) {
        (Some(c), Some(cur)) => c.to_string() < cur.to_string(),
        _ => false,
    }
}

fn merge(map: &mut BTreeMap<RelKey, Option<Literal>>, k: RelKey, lit: Option<Literal>) {
    match map.get(&k) {
        Some(cur) if !prefer(&lit, cur) => {}
        _ => {
            map.insert(k, lit);
        }
    }
}

/// Ground facts kept by an abstraction, with sub-task objects renamed to
/// `arg0`, `arg1`, ... Sorted, so equal states compare and hash equal.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AbstractState(Vec<Atom>);

impl AbstractState {
    pub fn from_atoms(mut atoms: Vec<Atom>) -> Self {
        atoms.sort();
        atoms.dedup();
        AbstractState(atoms)
    }

    pub fn facts(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Serialized form: atoms in name order separated by single spaces;
    /// `-` for the empty state.
    pub fn key(&self) -> String {
        if self.0.is_empty() {
            return "-".to_owned();
        }
        let mut atoms: Vec<&Atom> = self.0.iter().collect();
        atoms.sort_by(|a, b| a.name_cmp(b));
        atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let key = key.trim();
        if key == "-" {
            return Ok(AbstractState::default());
        }
        let mut cur = Cursor::new(key)?;
        let mut atoms = Vec::new();
        while !cur.at_end() {
            let lit = cur.literal()?;
            if !lit.positive || !lit.is_ground() {
                return Err(cur.error(format!("`{lit}` is not a ground atom")));
            }
            atoms.push(lit.atom);
        }
        Ok(AbstractState::from_atoms(atoms))
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Anything that maps ground states to table keys.
pub trait StateAbstraction {
    fn abstract_state(&self, state: &State) -> AbstractState;
}

/// Keeps the full ground state.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl StateAbstraction for Identity {
    fn abstract_state(&self, state: &State) -> AbstractState {
        AbstractState(state.iter().cloned().collect())
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Const(Sym),
    Free(u8),
}

#[derive(Clone, Debug)]
struct Matcher {
    predicate: Sym,
    slots: SmallVec<[Slot; 3]>,
}

impl Matcher {
    fn matches(&self, atom: &Atom) -> bool {
        if atom.predicate != self.predicate || atom.args.len() != self.slots.len() {
            return false;
        }
        let mut bound: SmallVec<[Option<Sym>; 4]> = SmallVec::new();
        for (slot, arg) in self.slots.iter().zip(&atom.args) {
            let value = arg.sym();
            match *slot {
                Slot::Const(c) => {
                    if c != value {
                        return false;
                    }
                }
                Slot::Free(k) => {
                    let k = k as usize;
                    if bound.len() <= k {
                        bound.resize(k + 1, None);
                    }
                    match bound[k] {
                        Some(b) if b != value => return false,
                        Some(_) => {}
                        None => bound[k] = Some(value),
                    }
                }
            }
        }
        true
    }
}

/// A schema with its parameters bound to concrete objects.
#[derive(Clone, Debug)]
pub struct GroundedSchema {
    matchers: Vec<Matcher>,
    renaming: Vec<(Sym, Sym)>,
}

impl GroundedSchema {
    pub fn new(schema: &AbstractionSchema, grounding: &Substitution) -> Result<Self> {
        let params = schema.params();
        for (var, value) in grounding.iter() {
            if !params.contains(&var) {
                return Err(Error::Grounding(format!(
                    "`{var}` is not a parameter of {}",
                    schema.subtask
                )));
            }
            if value.is_var() {
                return Err(Error::Grounding(format!("`{var}` bound to variable `{value}`")));
            }
        }
        let mut renaming = Vec::new();
        for (i, p) in params.iter().enumerate() {
            let value = grounding.get(*p).ok_or_else(|| {
                Error::Grounding(format!("parameter `{p}` of {} is unbound", schema.subtask))
            })?;
            if !renaming.iter().any(|(c, _)| *c == value.sym()) {
                renaming.push((value.sym(), Sym::new(&format!("arg{i}"))));
            }
        }
        let matchers = schema
            .relevant_templates
            .iter()
            .map(|t| {
                let atom = grounding.apply_atom(&t.atom);
                let mut free: Vec<Sym> = Vec::new();
                let slots = atom
                    .args
                    .iter()
                    .map(|a| match *a {
                        Term::Const(c) => Slot::Const(c),
                        Term::Var(v) => {
                            let k = free.iter().position(|f| *f == v).unwrap_or_else(|| {
                                free.push(v);
                                free.len() - 1
                            });
                            Slot::Free(k as u8)
                        }
                    })
                    .collect();
                Matcher {
                    predicate: atom.predicate,
                    slots,
                }
            })
            .collect();
        Ok(GroundedSchema { matchers, renaming })
    }

    /// Whether a ground atom is kept by this abstraction.
    pub fn is_relevant(&self, atom: &Atom) -> bool {
        self.matchers.iter().any(|m| m.matches(atom))
    }

    fn rename(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate,
            args: atom
                .args
                .iter()
                .map(|t| match self.renaming.iter().find(|(c, _)| *c == t.sym()) {
                    Some((_, r)) => Term::Const(*r),
                    None => *t,
                })
                .collect(),
        }
    }
}

impl StateAbstraction for GroundedSchema {
    fn abstract_state(&self, state: &State) -> AbstractState {
        let mut atoms: Vec<Atom> = state
            .iter()
            .filter(|a| self.is_relevant(a))
            .map(|a| self.rename(a))
            .collect();
        atoms.sort();
        AbstractState(atoms)
    }
}

pub fn abstract_state(schema: &AbstractionSchema, state: &State, grounding: &Substitution) -> Result<AbstractState> {
    Ok(GroundedSchema::new(schema, grounding)?.abstract_state(state))
}

/// Splits a finite atom universe into the atoms the abstraction keeps (X)
/// and the ones it drops (Y).
pub fn partition(
    schema: &AbstractionSchema,
    atoms: &BTreeSet<Atom>,
    grounding: &Substitution,
) -> Result<(BTreeSet<Atom>, BTreeSet<Atom>)> {
    let g = GroundedSchema::new(schema, grounding)?;
    Ok(atoms.iter().cloned().partition(|a| g.is_relevant(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfoci::{parse_file, parse_literal};

    const TAXI: &str = include_str!("../../../data/taxi.dfoci");

    fn texts(schema: &AbstractionSchema) -> Vec<String> {
        schema.relevant_templates.iter().map(|t| t.to_string()).collect()
    }

    fn atom(s: &str) -> Atom {
        parse_literal(s).unwrap().atom
    }

    fn state(atoms: &[&str]) -> State {
        State::from_atoms(atoms.iter().map(|a| atom(a))).unwrap()
    }

    #[test]
    fn taxi_pickup_and_drop_closures() {
        let decl = parse_file(TAXI).unwrap();
        let pickup = relevant_closure(&decl, "pickup", None).unwrap();
        assert_eq!(texts(&pickup), ["at(P,L)", "in-taxi(P)", "taxi-at(L)", "wall(L,D)"]);
        assert!(pickup.include_action);
        assert_eq!(pickup.depth_used, ClosureDepth::Fixpoint);
        let drop = relevant_closure(&decl, "drop", None).unwrap();
        assert_eq!(
            texts(&drop),
            ["at(P,L)", "dest(P,L)", "in-taxi(P)", "taxi-at(L)", "wall(L,D)"]
        );
    }

    #[test]
    fn empty_statement_set_gives_empty_schema() {
        let decl = parse_file("subtask pickup/1\n").unwrap();
        let s = relevant_closure(&decl, "pickup", None).unwrap();
        assert!(s.relevant_templates.is_empty());
        assert!(!s.include_action);
    }

    #[test]
    fn closure_errors() {
        let decl = parse_file(TAXI).unwrap();
        assert!(matches!(relevant_closure(&decl, "refuel", None), Err(Error::UnknownSubtask(_))));
        let mut bad = decl.clone();
        bad.predicates.remove(&Sym::new("wall"));
        assert!(matches!(relevant_closure(&bad, "pickup", None), Err(Error::Invalid(_))));
    }

    #[test]
    fn bounded_depth_is_prefix_of_fixpoint() {
        let decl = parse_file(TAXI).unwrap();
        let d0 = relevant_closure(&decl, "pickup", Some(0)).unwrap();
        assert!(d0.relevant_templates.is_empty());
        assert!(!d0.include_action);
        assert_eq!(d0.depth_used, ClosureDepth::Sweeps(0));
        let d1 = relevant_closure(&decl, "pickup", Some(1)).unwrap();
        assert_eq!(texts(&d1), ["in-taxi(P)"]);
        assert!(d1.include_action);
        let d2 = relevant_closure(&decl, "pickup", Some(2)).unwrap();
        assert_eq!(texts(&d2), ["at(P,L)", "in-taxi(P)", "taxi-at(L)"]);
        let d9 = relevant_closure(&decl, "pickup", Some(9)).unwrap();
        assert_eq!(d9.depth_used, ClosureDepth::Fixpoint);
    }

    #[test]
    fn head_variable_names_do_not_matter() {
        let text = "predicate at/2\npredicate in-taxi/1\npredicate taxi-at/1\nsubtask pickup/1\n\
                    pickup(X): {in-taxi(X), A} -> Ro\n\
                    pickup(P): {at(P,X), taxi-at(X)} -+1-> in-taxi(P)\n";
        let s = relevant_closure(&parse_file(text).unwrap(), "pickup", None).unwrap();
        assert_eq!(s.subtask.to_string(), "pickup(P)");
        assert_eq!(texts(&s), ["at(P,X)", "in-taxi(P)", "taxi-at(X)"]);
    }

    #[test]
    fn free_variable_clashing_with_parameter_is_renamed() {
        // In the second statement `P` is a free variable, not the parameter.
        let text = "predicate at/2\npredicate in-taxi/1\nsubtask pickup/1\n\
                    pickup(P): {in-taxi(P)} -> Ro\n\
                    pickup(X): {at(X,P), at(P,X)} -+1-> in-taxi(X)\n";
        let s = relevant_closure(&parse_file(text).unwrap(), "pickup", None).unwrap();
        assert_eq!(texts(&s), ["at(P,P_1)", "at(P_1,P)", "in-taxi(P)"]);
    }

    fn pickup_schema() -> AbstractionSchema {
        relevant_closure(&parse_file(TAXI).unwrap(), "pickup", None).unwrap()
    }

    #[test]
    fn abstract_state_examples() {
        let schema = pickup_schema();
        let s = state(&["taxi-at(l21)", "at(p1,l03)", "at(p2,l44)", "dest(p1,l40)", "dest(p2,l00)"]);
        let a = abstract_state(&schema, &s, &Substitution::from_pairs([("P", "p2")])).unwrap();
        assert_eq!(a.key(), "at(arg0,l44) taxi-at(l21)");
        let b = abstract_state(&schema, &s, &Substitution::from_pairs([("P", "p1")])).unwrap();
        assert_eq!(b.key(), "at(arg0,l03) taxi-at(l21)");
        let empty = AbstractionSchema {
            relevant_templates: vec![],
            ..schema.clone()
        };
        let e = abstract_state(&empty, &s, &Substitution::from_pairs([("P", "p1")])).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.key(), "-");
    }

    #[test]
    fn grounding_must_bind_exactly_the_parameters() {
        let schema = pickup_schema();
        let s = State::new();
        assert!(abstract_state(&schema, &s, &Substitution::new()).is_err());
        let extra = Substitution::from_pairs([("P", "p1"), ("L", "l00")]);
        assert!(abstract_state(&schema, &s, &extra).is_err());
        let var = Substitution::from_pairs([("P", "Q")]);
        assert!(abstract_state(&schema, &s, &var).is_err());
    }

    #[test]
    fn key_round_trips() {
        let a = AbstractState::from_atoms(vec![atom("taxi-at(l21)"), atom("at(arg0,l44)"), atom("occupied")]);
        assert_eq!(AbstractState::parse_key(&a.key()).unwrap(), a);
        assert_eq!(AbstractState::parse_key("-").unwrap(), AbstractState::default());
        assert!(AbstractState::parse_key("at(P,l00)").is_err());
    }

    #[test]
    fn partition_extremes() {
        let atoms: BTreeSet<Atom> = ["taxi-at(l00)", "at(p1,l01)", "dest(p1,l02)"].iter().map(|a| atom(a)).collect();
        let g = Substitution::from_pairs([("P", "p1")]);
        let empty = AbstractionSchema {
            relevant_templates: vec![],
            ..pickup_schema()
        };
        let (x, y) = partition(&empty, &atoms, &g).unwrap();
        assert!(x.is_empty());
        assert_eq!(y, atoms);
        let all = AbstractionSchema {
            relevant_templates: ["taxi-at(L)", "at(P,L)", "dest(P,L)"]
                .iter()
                .map(|t| parse_literal(t).unwrap())
                .collect(),
            ..pickup_schema()
        };
        let (x, y) = partition(&all, &atoms, &g).unwrap();
        assert_eq!(x, atoms);
        assert!(y.is_empty());
    }
}
