//! Extensional fact storage with per-binding-pattern indexes and lookup counters.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use crate::ir::{parse_facts, Pred, Term};
use crate::symbol::Symbol;

pub type Tuple = Box<[Symbol]>;

/// Per-argument bound/free adornment, written as a string of `b`/`f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingPattern(Vec<bool>);

impl BindingPattern {
    pub fn new(bound: Vec<bool>) -> Self {
        BindingPattern(bound)
    }

    pub fn all_free(arity: usize) -> Self {
        BindingPattern(vec![false; arity])
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                'b' => Some(true),
                'f' => Some(false),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(BindingPattern)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bound(&self, pos: usize) -> bool {
        self.0[pos]
    }

    pub fn bound_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn bound_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// Values of `tuple` at the bound positions.
    pub fn project(&self, tuple: &[Symbol]) -> Tuple {
        self.bound_positions().map(|i| tuple[i]).collect()
    }
}

impl fmt::Display for BindingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "b" } else { "f" })?;
        }
        Ok(())
    }
}

/// A ground extensional fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: Pred,
    pub args: Tuple,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atom = crate::ir::Atom::new(
            self.pred.name,
            self.args.iter().map(|c| Term::Const(*c)).collect(),
        );
        write!(f, "{atom}")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("unknown EDB predicate {0}")]
    UnknownPredicate(Pred),
    #[error("lookup on {pred} with pattern {pattern} and {values} bound values")]
    PatternMismatch {
        pred: Pred,
        pattern: BindingPattern,
        values: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: unknown EDB predicate {name}", path.display())]
    UnknownPredicate {
        path: PathBuf,
        line: usize,
        name: String,
    },
    #[error("{}:{line}: arity mismatch for {pred}: row has {found} fields", path.display())]
    ArityMismatch {
        path: PathBuf,
        line: usize,
        pred: Pred,
        found: usize,
    },
    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

type Index = HashMap<Tuple, Arc<[u32]>>;

struct Relation {
    /// Sorted, deduplicated.
    tuples: Vec<Tuple>,
    indexes: RwLock<HashMap<BindingPattern, Arc<Index>>>,
    lookups: AtomicU64,
}

impl Relation {
    fn index(&self, pattern: &BindingPattern) -> Arc<Index> {
        if let Some(ix) = self
            .indexes
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(pattern)
        {
            return Arc::clone(ix);
        }
        let mut groups: HashMap<Tuple, Vec<u32>> = HashMap::new();
        for (i, t) in self.tuples.iter().enumerate() {
            groups.entry(pattern.project(t)).or_default().push(i as u32);
        }
        let built: Arc<Index> = Arc::new(groups.into_iter().map(|(k, v)| (k, v.into())).collect());
        let mut w = self.indexes.write().unwrap_or_else(|e| e.into_inner());
        Arc::clone(w.entry(pattern.clone()).or_insert(built))
    }
}

/// Immutable set of extensional facts, indexed lazily per binding pattern.
pub struct FactStore {
    relations: HashMap<Pred, Relation>,
    decls: Vec<Pred>,
}

impl fmt::Debug for FactStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FactStore")
            .field("decls", &self.decls)
            .field("facts", &self.len())
            .finish()
    }
}

#[derive(Debug, Default)]
pub struct FactStoreBuilder {
    relations: BTreeMap<Pred, BTreeSet<Tuple>>,
}

impl FactStoreBuilder {
    pub fn declare(&mut self, pred: Pred) -> &mut Self {
        self.relations.entry(pred).or_default();
        self
    }

    /// Insert a fact; duplicates are ignored.
    pub fn insert(&mut self, pred: Pred, args: &[Symbol]) -> Result<&mut Self, StoreError> {
        if args.len() != pred.arity {
            return Err(StoreError::UnknownPredicate(Pred::new(pred.name, args.len())));
        }
        self.relations
            .get_mut(&pred)
            .ok_or(StoreError::UnknownPredicate(pred))?
            .insert(args.into());
        Ok(self)
    }

    /// Convenience for tests and generators: names are interned.
    pub fn insert_names(&mut self, pred: Pred, args: &[&str]) -> Result<&mut Self, StoreError> {
        let args: Vec<Symbol> = args.iter().map(|s| Symbol::intern(s)).collect();
        self.insert(pred, &args)
    }

    pub fn build(&mut self) -> FactStore {
        let relations = std::mem::take(&mut self.relations);
        let decls = relations.keys().copied().collect();
        let relations = relations
            .into_iter()
            .map(|(p, set)| {
                (
                    p,
                    Relation {
                        tuples: set.into_iter().collect(),
                        indexes: RwLock::new(HashMap::new()),
                        lookups: AtomicU64::new(0),
                    },
                )
            })
            .collect();
        FactStore { relations, decls }
    }
}

/// Facts matching a lookup, in sorted tuple order.
pub enum Lookup<'a> {
    All(std::slice::Iter<'a, Tuple>),
    Indexed {
        tuples: &'a [Tuple],
        ids: Arc<[u32]>,
        at: usize,
    },
    Empty,
}

impl<'a> Iterator for Lookup<'a> {
    type Item = &'a [Symbol];

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Lookup::All(it) => it.next().map(|t| &**t),
            Lookup::Indexed { tuples, ids, at } => {
                let id = *ids.get(*at)?;
                *at += 1;
                Some(&tuples[id as usize])
            }
            Lookup::Empty => None,
        }
    }
}

impl FactStore {
    pub fn builder(decls: &[Pred]) -> FactStoreBuilder {
        let mut b = FactStoreBuilder::default();
        for d in decls {
            b.declare(*d);
        }
        b
    }

    /// An empty store with the given declarations.
    pub fn empty(decls: &[Pred]) -> FactStore {
        FactStore::builder(decls).build()
    }

    pub fn declarations(&self) -> &[Pred] {
        &self.decls
    }

    pub fn is_declared(&self, pred: Pred) -> bool {
        self.relations.contains_key(&pred)
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(|r| r.tuples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All tuples of `pred`, sorted. Does not count as a lookup.
    pub fn tuples(&self, pred: Pred) -> Result<&[Tuple], StoreError> {
        self.relations
            .get(&pred)
            .map(|r| r.tuples.as_slice())
            .ok_or(StoreError::UnknownPredicate(pred))
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.decls.iter().flat_map(move |p| {
            self.relations[p].tuples.iter().map(move |t| Fact {
                pred: *p,
                args: t.clone(),
            })
        })
    }

    /// Facts of `pred` agreeing with `bound` at the pattern's bound positions.
    pub fn lookup(
        &self,
        pred: Pred,
        pattern: &BindingPattern,
        bound: &[Symbol],
    ) -> Result<Lookup<'_>, StoreError> {
        let rel = self
            .relations
            .get(&pred)
            .ok_or(StoreError::UnknownPredicate(pred))?;
        if pattern.len() != pred.arity || pattern.bound_count() != bound.len() {
            return Err(StoreError::PatternMismatch {
                pred,
                pattern: pattern.clone(),
                values: bound.len(),
            });
        }
        rel.lookups.fetch_add(1, Ordering::Relaxed);
        if bound.is_empty() {
            return Ok(Lookup::All(rel.tuples.iter()));
        }
        let index = rel.index(pattern);
        Ok(match index.get(bound) {
            Some(ids) => Lookup::Indexed {
                tuples: &rel.tuples,
                ids: Arc::clone(ids),
                at: 0,
            },
            None => Lookup::Empty,
        })
    }

    pub fn lookup_count(&self, pred: Pred) -> u64 {
        self.relations
            .get(&pred)
            .map_or(0, |r| r.lookups.load(Ordering::Relaxed))
    }

    pub fn total_lookups(&self) -> u64 {
        self.relations
            .values()
            .map(|r| r.lookups.load(Ordering::Relaxed))
            .sum()
    }

    pub fn reset_counters(&self) {
        for r in self.relations.values() {
            r.lookups.store(0, Ordering::Relaxed);
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LoadError + '_ {
    move |source| LoadError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Load `.csv` files (one per predicate, named after it) and `.dl` fact files.
pub fn load_facts<P: AsRef<Path>>(sources: &[P], decls: &[Pred]) -> Result<FactStore, LoadError> {
    let mut builder = FactStore::builder(decls);
    for src in sources {
        let path = src.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            load_csv(&mut builder, path, &text, decls)?;
        } else {
            load_dl(&mut builder, path, &text, decls)?;
        }
    }
    Ok(builder.build())
}

fn load_csv(
    builder: &mut FactStoreBuilder,
    path: &Path,
    text: &str,
    decls: &[Pred],
) -> Result<(), LoadError> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_owned();
    let candidates: Vec<Pred> = decls
        .iter()
        .filter(|d| d.name.as_str() == name)
        .copied()
        .collect();
    if candidates.is_empty() {
        return Err(LoadError::UnknownPredicate {
            path: path.to_owned(),
            line: 1,
            name,
        });
    }
    for (i, row) in text.lines().enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<Symbol> = row.split(',').map(|f| Symbol::intern(f.trim())).collect();
        let pred = candidates
            .iter()
            .find(|p| p.arity == fields.len())
            .copied()
            .ok_or_else(|| LoadError::ArityMismatch {
                path: path.to_owned(),
                line: i + 1,
                pred: candidates[0],
                found: fields.len(),
            })?;
        builder.insert(pred, &fields).expect("declared predicate");
    }
    Ok(())
}

fn load_dl(builder: &mut FactStoreBuilder, path: &Path, text: &str, decls: &[Pred]) -> Result<(), LoadError> {
    let facts = parse_facts(text).map_err(|e| LoadError::Malformed {
        path: path.to_owned(),
        line: e.line,
        message: e.to_string(),
    })?;
    for (atom, line) in facts {
        let pred = atom.pred();
        if !decls.contains(&pred) {
            let same_name = decls.iter().find(|d| d.name == pred.name);
            return Err(match same_name {
                Some(d) => LoadError::ArityMismatch {
                    path: path.to_owned(),
                    line,
                    pred: *d,
                    found: pred.arity,
                },
                None => LoadError::UnknownPredicate {
                    path: path.to_owned(),
                    line,
                    name: pred.name.to_string(),
                },
            });
        }
        let args: Vec<Symbol> = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => *c,
                Term::Var(_) => unreachable!("parse_facts returns ground atoms"),
            })
            .collect();
        builder.insert(pred, &args).expect("declared predicate");
    }
    Ok(())
}
