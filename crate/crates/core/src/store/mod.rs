//! Relations stored as bags of interned tuples, with lazily built trie
//! indexes providing the degree / access / exist / sample operations the
//! estimators are written against.

mod load;
mod trie;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, RwLock};

pub use load::parse_relation;
pub use trie::{Prefix, TrieIndex, View};

use crate::error::{Error, Result};

/// Interned attribute value.
pub type Value = u32;

/// Maps raw input strings to dense ids, in first-seen order.
#[derive(Debug, Default, Clone)]
pub struct Dictionary {
    ids: HashMap<String, Value>,
    names: Vec<String>,
}

impl Dictionary {
    pub fn intern(&mut self, raw: &str) -> Value {
        if let Some(&id) = self.ids.get(raw) {
            return id;
        }
        let id = self.names.len() as Value;
        self.names.push(raw.to_owned());
        self.ids.insert(raw.to_owned(), id);
        id
    }

    pub fn get(&self, raw: &str) -> Option<Value> {
        self.ids.get(raw).copied()
    }

    pub fn name(&self, id: Value) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A named bag of tuples. Duplicate rows are kept and counted.
#[derive(Debug)]
pub struct Relation {
    name: String,
    schema: Vec<String>,
    data: Vec<Value>,
    indexes: RwLock<HashMap<Vec<usize>, Arc<TrieIndex>>>,
}

impl Relation {
    /// Builds a relation from already-interned rows.
    pub fn from_ids<I, R>(name: &str, schema: &[&str], rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[Value]>,
    {
        let arity = schema.len();
        let mut data = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.as_ref();
            if row.len() != arity {
                return Err(Error::Arity {
                    relation: name.to_owned(),
                    row: i,
                    expected: arity,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Relation {
            name: name.to_owned(),
            schema: schema.iter().map(|s| s.to_string()).collect(),
            data,
            indexes: RwLock::default(),
        })
    }

    /// Interns raw values through `dict` and builds the relation.
    pub fn load<I, R, S>(name: &str, schema: &[&str], rows: I, dict: &mut Dictionary) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rows: Vec<Vec<Value>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| dict.intern(v.as_ref())).collect())
            .collect();
        Self::from_ids(name, schema, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    /// Number of rows, counting duplicates.
    pub fn len(&self) -> usize {
        if self.arity() == 0 {
            0
        } else {
            self.data.len() / self.arity()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> + '_ {
        self.data.chunks_exact(self.arity().max(1))
    }

    pub fn multiplicity(&self, row: &[Value]) -> usize {
        self.rows().filter(|r| *r == row).count()
    }

    /// True when every row `(a, b)` has a partner row `(b, a)`.
    pub fn is_symmetric(&self) -> bool {
        self.arity() == 2 && {
            let set: std::collections::HashSet<(Value, Value)> =
                self.rows().map(|r| (r[0], r[1])).collect();
            set.iter().all(|&(a, b)| set.contains(&(b, a)))
        }
    }

    /// Index with column `order[l]` at level `l`, built on first use.
    pub fn index(&self, order: &[usize]) -> Result<Arc<TrieIndex>> {
        if let Some(ix) = self.indexes.read().expect("index cache").get(order) {
            return Ok(ix.clone());
        }
        let mut seen = vec![false; self.arity()];
        let valid = order.len() == self.arity()
            && order.iter().all(|&c| c < seen.len() && !std::mem::replace(&mut seen[c], true));
        if !valid {
            return Err(Error::BadOrder {
                relation: self.name.clone(),
                order: order
                    .iter()
                    .map(|&c| self.schema.get(c).cloned().unwrap_or_else(|| format!("#{c}")))
                    .collect(),
            });
        }
        let ix = Arc::new(TrieIndex::build(&self.data, self.arity(), order.to_vec()));
        let mut cache = self.indexes.write().expect("index cache");
        Ok(cache.entry(order.to_vec()).or_insert(ix).clone())
    }

    /// Index ordered by attribute names.
    pub fn index_by_name(&self, order: &[&str]) -> Result<Arc<TrieIndex>> {
        let cols: Option<Vec<usize>> = order
            .iter()
            .map(|a| self.schema.iter().position(|s| s == a))
            .collect();
        match cols {
            Some(cols) => self.index(&cols),
            None => Err(Error::BadOrder {
                relation: self.name.clone(),
                order: order.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }
}

/// A set of named relations sharing one value dictionary.
#[derive(Debug, Default)]
pub struct Database {
    pub dict: Dictionary,
    relations: BTreeMap<String, Arc<Relation>>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, relation: Relation) -> Arc<Relation> {
        let rel = Arc::new(relation);
        self.relations.insert(rel.name().to_owned(), rel.clone());
        rel
    }

    /// Convenience for fixtures: a relation over raw integer ids.
    pub fn add(&mut self, name: &str, schema: &[&str], rows: &[&[Value]]) -> Result<Arc<Relation>> {
        Ok(self.insert(Relation::from_ids(name, schema, rows)?))
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Relation>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Arc<Relation>> {
        self.relations.values()
    }

    /// Parses relation text (see [`parse_relation`]) and adds it.
    pub fn load_str(&mut self, text: &str) -> Result<Arc<Relation>, String> {
        let rel = parse_relation(text, &mut self.dict)?;
        Ok(self.insert(rel))
    }

    /// Loads one relation file.
    pub fn load_file(&mut self, path: &Path) -> Result<Arc<Relation>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        self.load_str(&text).map_err(|message| Error::Load {
            path: path.to_owned(),
            message,
        })
    }

    /// Loads `<dir>/<name>.rel` for each requested relation name.
    pub fn load_dir<'a>(dir: &Path, names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut db = Database::new();
        for name in names {
            if db.get(name).is_some() {
                continue;
            }
            let path = dir.join(format!("{name}.rel"));
            let rel = db.load_file(&path)?;
            if rel.name() != name {
                return Err(Error::Load {
                    path,
                    message: format!("header names relation `{}`, expected `{name}`", rel.name()),
                });
            }
        }
        Ok(db)
    }
}
