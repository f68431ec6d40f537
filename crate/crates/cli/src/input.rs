//! Loading a query file and the relations it names.

use std::path::{Path, PathBuf};

use joinest::ghd::Ghd;
use joinest::query::QuerySpec;
use joinest::{Database, Error, Query, Value, VarSet};
use sha2::{Digest, Sha256};

/// How a command failed, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    Load(String),
    Validate(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Load(_) => 3,
            Failure::Validate(_) => 4,
            Failure::Runtime(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Load(m) | Failure::Validate(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Load { .. } | Error::Arity { .. } => Failure::Load(m),
            Error::UnboundRelation(_)
            | Error::EdgeArity { .. }
            | Error::Uncovered(_)
            | Error::Query(_)
            | Error::InvalidGhd(_) => Failure::Validate(m),
            _ => Failure::Runtime(m),
        }
    }
}

/// A resolved query with everything a report needs to identify its inputs.
pub struct Input {
    pub spec: QuerySpec,
    pub db: Database,
    pub query: Query,
    /// SHA-256 over the query file and each relation file, by name.
    pub hash: String,
}

impl Input {
    pub fn load(db_dir: &Path, query_file: &Path) -> Result<Self, Failure> {
        let text = std::fs::read(query_file)
            .map_err(|e| Failure::Load(format!("{}: {e}", query_file.display())))?;
        let spec = QuerySpec::from_json(&String::from_utf8_lossy(&text))
            .map_err(|e| Failure::Load(format!("{}: {e}", query_file.display())))?;
        let mut names = spec.relation_names();
        let db = Database::load_dir(db_dir, names.iter().copied())?;
        let query = Query::from_spec(&spec, &db)?;
        names.sort_unstable();
        let mut h = Sha256::new();
        h.update(&text);
        for name in names {
            let path: PathBuf = db_dir.join(format!("{name}.rel"));
            let bytes = std::fs::read(&path).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
            h.update(name.as_bytes());
            h.update(&bytes);
        }
        let hash = hex::encode(h.finalize());
        Ok(Input { spec, db, query, hash })
    }

    /// The `projection` attributes, if the file declares any.
    pub fn projection(&self) -> Result<Option<VarSet>, Failure> {
        match &self.spec.projection {
            None => Ok(None),
            Some(names) => {
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                Ok(Some(self.query.vars(&names)?))
            }
        }
    }

    /// The GHD given in the file, validated.
    pub fn ghd(&self) -> Result<Option<Ghd>, Failure> {
        match &self.spec.ghd {
            None => Ok(None),
            Some(g) => Ok(Some(Ghd::from_spec(g, &self.query)?)),
        }
    }

    /// Raw input strings of interned values.
    pub fn decode(&self, tuple: &[Value]) -> Vec<String> {
        tuple
            .iter()
            .map(|&x| self.db.dict.name(x).map_or_else(|| x.to_string(), str::to_owned))
            .collect()
    }
}
