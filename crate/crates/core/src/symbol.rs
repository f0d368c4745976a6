//! Process-wide string interner.
//!
//! Symbols are `Copy` handles so that states and abstract keys can be hashed
//! and cloned without touching shared reference counts from worker threads.
//! Ordering of `Sym` follows interning order and is only stable inside one
//! process; anything that is printed or serialized sorts by name instead.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

#[derive(Default)]
struct Interner {
    ids: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

impl Sym {
    pub fn new(name: &str) -> Sym {
        if let Some(&id) = interner().read().unwrap().ids.get(name) {
            return Sym(id);
        }
        let mut table = interner().write().unwrap();
        if let Some(&id) = table.ids.get(name) {
            return Sym(id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = table.names.len() as u32;
        table.names.push(leaked);
        table.ids.insert(leaked, id);
        Sym(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().unwrap().names[self.0 as usize]
    }

    /// Variables start with an uppercase letter (or `_`).
    pub fn is_variable_name(name: &str) -> bool {
        name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Sym::new("taxi-at");
        let b = Sym::new("taxi-at");
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "taxi-at");
        assert_ne!(a, Sym::new("at"));
    }

    #[test]
    fn variable_convention() {
        assert!(Sym::is_variable_name("P"));
        assert!(Sym::is_variable_name("Loc"));
        assert!(!Sym::is_variable_name("p1"));
        assert!(!Sym::is_variable_name("0"));
    }
}
