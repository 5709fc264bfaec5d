//! Process-wide interning of constant and predicate names.
//!
//! A [`Symbol`] is a thin pointer to a leaked name that is unique per name, so
//! equality and hashing are pointer operations while ordering is by name.
//! Interned names are never freed; the workbench only ever sees the finite
//! vocabulary of its inputs.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

fn table() -> &'static Mutex<HashMap<&'static str, Symbol>> {
    static TABLE: OnceLock<Mutex<HashMap<&'static str, Symbol>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// An interned identifier. Two symbols are equal iff their names are equal.
/// The box keeps the pointer thin: one word per symbol in every tuple.
#[derive(Clone, Copy)]
#[allow(clippy::borrowed_box)]
pub struct Symbol(&'static Box<str>);

impl Symbol {
    #[allow(clippy::borrowed_box)]
    pub fn intern(name: &str) -> Symbol {
        let mut table = table().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = table.get(name) {
            return *existing;
        }
        let leaked: &'static Box<str> = Box::leak(Box::new(name.into()));
        table.insert(leaked, Symbol(leaked));
        Symbol(leaked)
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0 as *const Box<str> as usize).hash(state);
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            std::cmp::Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::intern(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_bijective() {
        let a = Symbol::intern("alpha");
        let b = Symbol::intern(&String::from("alpha"));
        let c = Symbol::intern("beta");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_str(), "alpha");
    }

    #[test]
    fn ordering_is_by_name() {
        let z = Symbol::intern("zz_order");
        let a = Symbol::intern("aa_order");
        assert!(a < z);
        let mut v = vec![z, a];
        v.sort();
        assert_eq!(v, vec![a, z]);
    }
}
