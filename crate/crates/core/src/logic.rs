//! First-order vocabulary: terms, atoms, literals, substitutions and
//! closed-world states.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use smallvec::SmallVec;

use crate::error::Error;
use crate::symbol::Sym;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Sym),
    Const(Sym),
}

impl Term {
    /// Builds a term using the case convention: uppercase means variable.
    pub fn from_name(name: &str) -> Term {
        if Sym::is_variable_name(name) {
            Term::Var(Sym::new(name))
        } else {
            Term::Const(Sym::new(name))
        }
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Sym::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Sym::new(name))
    }

    pub fn sym(self) -> Sym {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }

    pub fn is_var(self) -> bool {
        matches!(self, Term::Var(_))
    }

    fn name_cmp(self, other: Term) -> Ordering {
        self.sym().as_str().cmp(other.sym().as_str())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.sym().as_str())
    }
}

pub type Args = SmallVec<[Term; 3]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub predicate: Sym,
    pub args: Args,
}

impl Atom {
    pub fn new(predicate: &str, args: &[&str]) -> Atom {
        Atom {
            predicate: Sym::new(predicate),
            args: args.iter().map(|a| Term::from_name(a)).collect(),
        }
    }

    pub fn from_parts(predicate: Sym, args: impl IntoIterator<Item = Term>) -> Atom {
        Atom {
            predicate,
            args: args.into_iter().collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn variables(&self) -> impl Iterator<Item = Sym> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        })
    }

    /// Ordering by predicate name, then argument text. Used for every
    /// printed or serialized form so output does not depend on interning order.
    pub fn name_cmp(&self, other: &Atom) -> Ordering {
        self.predicate
            .as_str()
            .cmp(other.predicate.as_str())
            .then_with(|| {
                for (a, b) in self.args.iter().zip(&other.args) {
                    match a.name_cmp(*b) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                self.args.len().cmp(&other.args.len())
            })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.predicate.as_str())?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, positive: false }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn negated(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn name_cmp(&self, other: &Literal) -> Ordering {
        self.atom
            .name_cmp(&other.atom)
            .then_with(|| other.positive.cmp(&self.positive))
    }
}

impl From<Atom> for Literal {
    fn from(atom: Atom) -> Self {
        Literal::pos(atom)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Variable bindings. Terms are variables or constants only, so a binding
/// never needs occurs-checking.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    bindings: BTreeMap<Sym, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut theta = Substitution::new();
        for (var, value) in pairs {
            theta.bind(Sym::new(var), Term::from_name(value));
        }
        theta
    }

    pub fn bind(&mut self, var: Sym, value: Term) -> Option<Term> {
        self.bindings.insert(var, value)
    }

    pub fn get(&self, var: Sym) -> Option<Term> {
        self.bindings.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Sym, Term)> + '_ {
        self.bindings.iter().map(|(k, v)| (*k, *v))
    }

    pub fn apply_term(&self, t: Term) -> Term {
        match t {
            Term::Var(v) => self.get(v).unwrap_or(t),
            Term::Const(_) => t,
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate,
            args: atom.args.iter().map(|t| self.apply_term(*t)).collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pairs: Vec<_> = self.iter().collect();
        pairs.sort_by(|a, b| a.0.as_str().cmp(b.0.as_str()));
        f.write_str("{")?;
        for (i, (k, v)) in pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

/// Replaces every bound variable; unbound variables pass through.
pub fn substitute(lit: &Literal, theta: &Substitution) -> Literal {
    Literal {
        atom: theta.apply_atom(&lit.atom),
        positive: lit.positive,
    }
}

/// One-sided matching of `pattern` against a ground literal.
pub fn unify(pattern: &Literal, ground: &Literal) -> Option<Substitution> {
    if pattern.positive != ground.positive {
        return None;
    }
    match_atom(&pattern.atom, &ground.atom, Substitution::new())
}

/// Extends `theta` so that `pattern` instantiates to `ground`.
pub fn match_atom(pattern: &Atom, ground: &Atom, mut theta: Substitution) -> Option<Substitution> {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return None;
    }
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        match *p {
            Term::Const(_) => {
                if p != g {
                    return None;
                }
            }
            Term::Var(v) => match theta.get(v) {
                Some(bound) if bound != *g => return None,
                Some(_) => {}
                None => {
                    theta.bind(v, *g);
                }
            },
        }
    }
    Some(theta)
}

/// Set of ground atoms; anything absent is false.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct State {
    facts: BTreeSet<Atom>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Result<Self, Error> {
        let mut s = State::new();
        for a in atoms {
            s.insert(a)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, atom: Atom) -> Result<bool, Error> {
        if !atom.is_ground() {
            return Err(Error::NonGround(atom.to_string()));
        }
        Ok(self.facts.insert(atom))
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.facts.remove(atom)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.facts.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    pub fn with_predicate(&self, predicate: Sym) -> impl Iterator<Item = &Atom> {
        self.facts.iter().filter(move |a| a.predicate == predicate)
    }

    /// Facts in canonical (name) order.
    pub fn sorted_facts(&self) -> Vec<&Atom> {
        let mut v: Vec<_> = self.facts.iter().collect();
        v.sort_by(|a, b| a.name_cmp(b));
        v
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.sorted_facts().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Closed-world truth of a ground literal.
pub fn holds(state: &State, lit: &Literal) -> Result<bool, Error> {
    if !lit.is_ground() {
        return Err(Error::NonGround(lit.to_string()));
    }
    Ok(state.contains(&lit.atom) == lit.positive)
}

/// Conjunction of ground literals.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Goal {
    literals: BTreeSet<Literal>,
}

impl Goal {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, Error> {
        let literals: BTreeSet<Literal> = literals.into_iter().collect();
        if let Some(l) = literals.iter().find(|l| !l.is_ground()) {
            return Err(Error::NonGround(l.to_string()));
        }
        Ok(Goal { literals })
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn union(&self, other: &Goal) -> Goal {
        Goal {
            literals: self.literals.union(&other.literals).cloned().collect(),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lits: Vec<_> = self.literals.iter().collect();
        lits.sort_by(|a, b| a.name_cmp(b));
        f.write_str("{")?;
        for (i, l) in lits.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

pub fn goal_satisfied(state: &State, goal: &Goal) -> bool {
    // Goal construction guarantees groundness.
    goal.literals
        .iter()
        .all(|l| state.contains(&l.atom) == l.positive)
}
