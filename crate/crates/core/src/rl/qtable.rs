use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::abstraction::AbstractState;
use crate::error::{Error, Result};
use crate::symbol::Sym;

/// Action values keyed by abstract state; absent entries read as 0.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    actions: Vec<Sym>,
    /// Action indices in name order, for tie-breaking and serialization.
    by_name: Vec<usize>,
    rows: HashMap<AbstractState, Vec<f64>>,
}

impl QTable {
    pub fn new(actions: &[Sym]) -> Self {
        let mut by_name: Vec<usize> = (0..actions.len()).collect();
        by_name.sort_by_key(|&i| actions[i].as_str());
        QTable {
            actions: actions.to_vec(),
            by_name,
            rows: HashMap::new(),
        }
    }

    pub fn actions(&self) -> &[Sym] {
        &self.actions
    }

    /// Action indices sorted by action name.
    pub fn name_order(&self) -> &[usize] {
        &self.by_name
    }

    /// Number of states with a stored row.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, state: &AbstractState, action: usize) -> f64 {
        self.rows.get(state).map_or(0.0, |r| r[action])
    }

    pub fn row(&self, state: &AbstractState) -> Option<&[f64]> {
        self.rows.get(state).map(|r| r.as_slice())
    }

    pub fn set(&mut self, state: &AbstractState, action: usize, value: f64) {
        let n = self.actions.len();
        match self.rows.get_mut(state) {
            Some(row) => row[action] = value,
            None => {
                let mut row = vec![0.0; n];
                row[action] = value;
                self.rows.insert(state.clone(), row);
            }
        }
    }

    pub fn max_value(&self, state: &AbstractState) -> f64 {
        self.rows
            .get(state)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Highest-valued action, earliest name first among ties.
    pub fn greedy(&self, state: &AbstractState) -> usize {
        let Some(row) = self.rows.get(state) else {
            return self.by_name[0];
        };
        let mut best = self.by_name[0];
        for &a in &self.by_name[1..] {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .values()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `key<TAB>action<TAB>value` lines sorted by key, then action name.
    /// Values use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut keyed: Vec<(String, &Vec<f64>)> = self.rows.iter().map(|(k, r)| (k.key(), r)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (key, row) in keyed {
            for &a in &self.by_name {
                let _ = writeln!(out, "{key}\t{}\t{}", self.actions[a], row[a]);
            }
        }
        out
    }

    pub fn parse(text: &str, actions: &[Sym]) -> Result<Self> {
        let mut q = QTable::new(actions);
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Syntax {
                line: n + 1,
                col: 1,
                msg: msg.to_owned(),
            };
            let mut parts = line.split('\t');
            let (Some(key), Some(action), Some(value), None) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected `key<TAB>action<TAB>value`"));
            };
            let state = AbstractState::parse_key(key)?;
            let a = actions
                .iter()
                .position(|s| s.as_str() == action)
                .ok_or_else(|| Error::UnknownAction(action.to_owned()))?;
            let v: f64 = value.parse().map_err(|_| bad("value is not a number"))?;
            if !v.is_finite() {
                return Err(bad("value is not finite"));
            }
            q.set(&state, a, v);
        }
        Ok(q)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, actions: &[Sym]) -> Result<Self> {
        QTable::parse(&crate::error::read_text(path)?, actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn actions() -> Vec<Sym> {
        crate::env::ACTION_NAMES.iter().map(|a| Sym::new(a)).collect()
    }

    fn key(s: &str) -> AbstractState {
        AbstractState::parse_key(s).unwrap()
    }

    #[test]
    fn absent_reads_zero_and_ties_go_to_first_name() {
        let q = QTable::new(&actions());
        assert_eq!(q.get(&key("taxi-at(l00)"), 0), 0.0);
        assert_eq!(q.actions()[q.greedy(&key("taxi-at(l00)"))].as_str(), "dropoff");
    }

    #[test]
    fn text_is_sorted_and_round_trips() {
        let mut q = QTable::new(&actions());
        q.set(&key("taxi-at(l10) at(arg0,l00)"), 0, -0.1 - 0.2);
        q.set(&key("-"), 4, 1.0 / 3.0);
        let text = q.to_text();
        let first: Vec<&str> = text.lines().take(2).collect();
        assert_eq!(first, ["-\tdropoff\t0", "-\tmove-east\t0"]);
        assert!(text.contains("at(arg0,l00) taxi-at(l10)\tmove-north\t-0.30000000000000004\n"));
        let back = QTable::parse(&text, &actions()).unwrap();
        assert_eq!(back, q);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(QTable::parse("-\tfly\t0\n", &actions()).is_err());
        assert!(QTable::parse("-\tpickup\n", &actions()).is_err());
        assert!(QTable::parse("-\tpickup\tNaN\n", &actions()).is_err());
        assert!(QTable::parse("-\tpickup\tx\n", &actions()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(values in proptest::collection::vec((0u8..4, 0usize..6, any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..40)) {
            let mut q = QTable::new(&actions());
            for (k, a, v) in values {
                q.set(&key(&format!("taxi-at(l{k}0)")), a, v);
            }
            let back = QTable::parse(&q.to_text(), &actions()).unwrap();
            for (k, row) in &q.rows {
                for (a, v) in row.iter().enumerate() {
                    prop_assert_eq!(back.get(k, a).to_bits(), v.to_bits());
                }
            }
        }
    }
}
