//! Dynamic first-order conditional influence statements: the `.dfoci`
//! language, its printer and its validator.
//!
//! ```text
//! predicate taxi-at/1
//! subtask pickup/1
//! pickup(P): {taxi-at(L), at(P,L), A} -+1-> in-taxi(P)
//! {A} -> R
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::logic::{Atom, Literal, Term};
use crate::symbol::Sym;

pub const ACTION: &str = "A";
pub const TASK_REWARD: &str = "R";
pub const OPTION_REWARD: &str = "Ro";

pub fn is_reserved(name: &str) -> bool {
    matches!(name, ACTION | TASK_REWARD | OPTION_REWARD)
}

/// A node of the two-slice influence graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum InfluenceItem {
    Literal(Literal),
    Action,
    TaskReward,
    OptionReward,
}

impl InfluenceItem {
    pub fn is_reward(&self) -> bool {
        matches!(self, InfluenceItem::TaskReward | InfluenceItem::OptionReward)
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            InfluenceItem::Literal(l) => Some(l),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            InfluenceItem::Literal(_) => 0,
            InfluenceItem::Action => 1,
            InfluenceItem::TaskReward => 2,
            InfluenceItem::OptionReward => 3,
        }
    }

    /// Canonical print order: literals by predicate name then argument
    /// text, followed by `A`, `R`, `Ro`.
    pub fn name_cmp(&self, other: &InfluenceItem) -> Ordering {
        match (self, other) {
            (InfluenceItem::Literal(a), InfluenceItem::Literal(b)) => a.name_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for InfluenceItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceItem::Literal(l) => write!(f, "{l}"),
            InfluenceItem::Action => f.write_str(ACTION),
            InfluenceItem::TaskReward => f.write_str(TASK_REWARD),
            InfluenceItem::OptionReward => f.write_str(OPTION_REWARD),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DFociStatement {
    pub subtask: Option<Atom>,
    pub antecedent: BTreeSet<InfluenceItem>,
    pub consequent: InfluenceItem,
    pub next_step: bool,
}

impl DFociStatement {
    pub fn sorted_antecedent(&self) -> Vec<&InfluenceItem> {
        let mut items: Vec<_> = self.antecedent.iter().collect();
        items.sort_by(|a, b| a.name_cmp(b));
        items
    }

    fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.antecedent
            .iter()
            .chain(std::iter::once(&self.consequent))
            .filter_map(InfluenceItem::as_literal)
    }
}

/// Canonical single-line rendering.
pub fn print_statement(stmt: &DFociStatement) -> String {
    stmt.to_string()
}

impl fmt::Display for DFociStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(head) = &self.subtask {
            write!(f, "{head}: ")?;
        }
        f.write_str("{")?;
        for (i, item) in self.sorted_antecedent().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        let arrow = if self.next_step { "-+1->" } else { "->" };
        write!(f, "}} {arrow} {}", self.consequent)
    }
}

#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct DomainDecl {
    pub predicates: BTreeMap<Sym, usize>,
    pub subtasks: BTreeMap<Sym, usize>,
    pub statements: Vec<DFociStatement>,
    /// Source line of each statement, parallel to `statements` (0 when built in code).
    pub lines: Vec<usize>,
    /// Conflicting duplicate declarations seen while parsing.
    redeclared: Vec<(usize, String)>,
}

impl DomainDecl {
    pub fn subtask_arity(&self, name: &str) -> Option<usize> {
        self.subtasks.get(&Sym::new(name)).copied()
    }

    pub fn subtask_names(&self) -> Vec<&'static str> {
        let mut names: Vec<_> = self.subtasks.keys().map(|s| s.as_str()).collect();
        names.sort();
        names
    }

    pub fn push(&mut self, stmt: DFociStatement) {
        self.statements.push(stmt);
        self.lines.push(0);
    }

    /// Whole-file rendering: declarations in name order, then statements
    /// in file order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sorted = |m: &BTreeMap<Sym, usize>| {
            let mut v: Vec<_> = m.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            v.sort();
            v
        };
        for (name, arity) in sorted(&self.predicates) {
            out.push_str(&format!("predicate {name}/{arity}\n"));
        }
        for (name, arity) in sorted(&self.subtasks) {
            out.push_str(&format!("subtask {name}/{arity}\n"));
        }
        for s in &self.statements {
            out.push_str(&print_statement(s));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    ArityMismatch,
    Undeclared,
    ReservedName,
    ReservedConsequent,
    SameStepStateConsequent,
    DuplicateHeadVariable,
    Redeclared,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Index into `DomainDecl::statements`; `None` for declaration problems.
    pub statement: Option<usize>,
    pub line: usize,
    pub kind: DiagnosticKind,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.statement {
            Some(i) => write!(f, "statement {i} (line {}): {}", self.line, self.reason),
            None => write!(f, "line {}: {}", self.line, self.reason),
        }
    }
}

/// Parses and validates a `.dfoci` document.
pub fn parse_file(text: &str) -> Result<DomainDecl> {
    let decl = parse_unvalidated(text)?;
    let diags = validate(&decl);
    if diags.is_empty() {
        Ok(decl)
    } else {
        Err(Error::Invalid(diags))
    }
}

pub fn load_file(path: &std::path::Path) -> Result<DomainDecl> {
    parse_file(&crate::error::read_text(path)?)
}

/// Grammar-only parse; arity and reserved-name checks are left to [`validate`].
pub fn parse_unvalidated(text: &str) -> Result<DomainDecl> {
    let mut cur = Cursor::new(text)?;
    let mut decl = DomainDecl::default();
    while !cur.at_end() {
        let line = cur.line();
        let is_decl = matches!(cur.peek_ident(), Some("predicate" | "subtask"))
            && matches!(cur.peek_at(1), Some(Tok::Ident(_)))
            && cur.peek_at(2) == Some(&Tok::Slash);
        if is_decl {
            let kind = cur.ident()?;
            let name = cur.ident()?;
            cur.expect(&Tok::Slash)?;
            let arity = cur.natural()?;
            let table = if kind == "predicate" {
                &mut decl.predicates
            } else {
                &mut decl.subtasks
            };
            // the first declaration stays in force
            match table.get(&Sym::new(&name)) {
                Some(&prev) if prev != arity => decl
                    .redeclared
                    .push((line, format!("{kind} `{name}` declared as /{prev} and /{arity}"))),
                Some(_) => {}
                None => {
                    table.insert(Sym::new(&name), arity);
                }
            }
        } else {
            let stmt = statement(&mut cur)?;
            decl.statements.push(stmt);
            decl.lines.push(line);
        }
    }
    Ok(decl)
}

/// Parses exactly one statement (no declarations).
pub fn parse_statement(text: &str) -> Result<DFociStatement> {
    let mut cur = Cursor::new(text)?;
    let s = statement(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after statement"));
    }
    Ok(s)
}

/// Parses a single literal such as `~at(P,l03)`.
pub fn parse_literal(text: &str) -> Result<Literal> {
    let mut cur = Cursor::new(text)?;
    let l = cur.literal()?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after literal"));
    }
    Ok(l)
}

fn statement(cur: &mut Cursor) -> Result<DFociStatement> {
    let subtask = if cur.peek() == Some(&Tok::LBrace) {
        None
    } else {
        let name = cur.ident()?;
        cur.expect(&Tok::LParen)?;
        let mut vars = vec![Term::Var(Sym::new(&cur.variable()?))];
        while cur.eat(&Tok::Comma) {
            vars.push(Term::Var(Sym::new(&cur.variable()?)));
        }
        cur.expect(&Tok::RParen)?;
        cur.expect(&Tok::Colon)?;
        Some(Atom::from_parts(Sym::new(&name), vars))
    };
    cur.expect(&Tok::LBrace)?;
    let mut antecedent = BTreeSet::new();
    antecedent.insert(item(cur)?);
    while cur.eat(&Tok::Comma) {
        antecedent.insert(item(cur)?);
    }
    cur.expect(&Tok::RBrace)?;
    let next_step = match cur.peek() {
        Some(Tok::Arrow) => false,
        Some(Tok::NextArrow) => true,
        _ => return Err(cur.error("expected `->` or `-+1->`")),
    };
    cur.next();
    let consequent = item(cur)?;
    Ok(DFociStatement {
        subtask,
        antecedent,
        consequent,
        next_step,
    })
}

fn item(cur: &mut Cursor) -> Result<InfluenceItem> {
    let bare_reserved = cur.peek_at(1) != Some(&Tok::LParen);
    if bare_reserved {
        let special = match cur.peek_ident() {
            Some(ACTION) => Some(InfluenceItem::Action),
            Some(TASK_REWARD) => Some(InfluenceItem::TaskReward),
            Some(OPTION_REWARD) => Some(InfluenceItem::OptionReward),
            _ => None,
        };
        if let Some(it) = special {
            cur.next();
            return Ok(it);
        }
    }
    Ok(InfluenceItem::Literal(cur.literal()?))
}

/// Checks declarations and statement invariants. Diagnostics come out in
/// statement order; within a statement, in item print order.
pub fn validate(decl: &DomainDecl) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (line, reason) in &decl.redeclared {
        out.push(Diagnostic {
            statement: None,
            line: *line,
            kind: DiagnosticKind::Redeclared,
            reason: reason.clone(),
        });
    }
    let mut reserved_decls: Vec<_> = decl
        .predicates
        .keys()
        .chain(decl.subtasks.keys())
        .map(|s| s.as_str())
        .filter(|n| is_reserved(n))
        .collect();
    reserved_decls.sort();
    for name in reserved_decls {
        out.push(Diagnostic {
            statement: None,
            line: 0,
            kind: DiagnosticKind::ReservedName,
            reason: format!("`{name}` is reserved and cannot be declared"),
        });
    }

    for (idx, stmt) in decl.statements.iter().enumerate() {
        let line = decl.lines.get(idx).copied().unwrap_or(0);
        let mut push = |kind, reason: String| {
            out.push(Diagnostic {
                statement: Some(idx),
                line,
                kind,
                reason,
            })
        };
        if let Some(head) = &stmt.subtask {
            match decl.subtasks.get(&head.predicate) {
                None => push(
                    DiagnosticKind::Undeclared,
                    format!("subtask `{}` is not declared", head.predicate),
                ),
                Some(&n) if n != head.arity() => push(
                    DiagnosticKind::ArityMismatch,
                    format!("subtask `{}` has arity {n}, used with {}", head.predicate, head.arity()),
                ),
                _ => {}
            }
            let mut seen = BTreeSet::new();
            for v in head.variables() {
                if !seen.insert(v) {
                    push(
                        DiagnosticKind::DuplicateHeadVariable,
                        format!("variable `{v}` repeated in subtask head"),
                    );
                }
            }
        }
        let mut lits: Vec<&Literal> = stmt.literals().collect();
        lits.sort_by(|a, b| a.name_cmp(b));
        for lit in lits {
            let name = lit.atom.predicate.as_str();
            if is_reserved(name) {
                push(
                    DiagnosticKind::ReservedName,
                    format!("`{name}` is reserved and cannot be used as a predicate"),
                );
                continue;
            }
            match decl.predicates.get(&lit.atom.predicate) {
                None => push(
                    DiagnosticKind::Undeclared,
                    format!("predicate `{name}` is not declared"),
                ),
                Some(&n) if n != lit.atom.arity() => push(
                    DiagnosticKind::ArityMismatch,
                    format!("predicate `{name}` has arity {n}, used with {} in `{lit}`", lit.atom.arity()),
                ),
                _ => {}
            }
        }
        match &stmt.consequent {
            InfluenceItem::Action => push(
                DiagnosticKind::ReservedConsequent,
                "the action variable `A` cannot be influenced".to_owned(),
            ),
            InfluenceItem::Literal(l) if !stmt.next_step => push(
                DiagnosticKind::SameStepStateConsequent,
                format!("same-step arrow into state literal `{l}`; only `R`/`Ro` allowed"),
            ),
            _ => {}
        }
    }
    out
}
