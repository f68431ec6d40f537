use serde::{Deserialize, Serialize};

/// On-disk query description (JSON).
///
/// ```json
/// {
///   "attributes": ["A", "B", "C"],
///   "edges": [
///     {"relation": "R", "vars": ["A", "B"]},
///     {"relation": "S", "vars": ["B", "C"]}
///   ],
///   "projection": ["A", "C"],
///   "ghd": {"nodes": [{"id": 0, "bag": ["A", "B", "C"]}], "edges": []}
/// }
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub attributes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghd: Option<GhdSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub relation: String,
    pub vars: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhdSpec {
    pub nodes: Vec<GhdNodeSpec>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhdNodeSpec {
    pub id: usize,
    pub bag: Vec<String>,
}

impl QuerySpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Distinct relation names in edge order.
    pub fn relation_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.edges {
            if !out.contains(&e.relation.as_str()) {
                out.push(&e.relation);
            }
        }
        out
    }
}
