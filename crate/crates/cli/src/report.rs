//! Reports: `key: value` lines and aligned tables, or one JSON object.

use serde_json::{json, Map, Value};

#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
    tables: Vec<Table>,
}

#[derive(Debug)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

impl Report {
    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_owned(), value.into()));
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj: Map<String, Value> = self.fields.iter().cloned().collect();
        for t in &self.tables {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Object(t.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                .collect();
            obj.insert(t.name.clone(), json!(rows));
        }
        Value::Object(obj)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            out.push_str(&format!("{k}: {}\n", plain(v)));
        }
        for t in &self.tables {
            out.push_str(&format!("\n[{}]\n", t.name));
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(plain).collect()).collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|c| cells.iter().map(|r| r[c].len()).chain([t.columns[c].len()]).max().unwrap_or(0))
                .collect();
            let line = |row: &[String]| {
                let padded: Vec<String> = row.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
                padded.join("  ").trim_end().to_owned() + "\n"
            };
            out.push_str(&line(&t.columns));
            for r in &cells {
                out.push_str(&line(r));
            }
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => format!("({})", items.iter().map(plain).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_aligns_columns() {
        let mut r = Report::default();
        r.field("out", 3);
        let mut t = Table::new("rows", &["a", "long name"]);
        t.push(vec![json!("xyz"), json!(1)]);
        r.table(t);
        assert_eq!(r.to_text(), "out: 3\n\n[rows]\na    long name\nxyz  1\n");
        assert_eq!(r.to_json()["rows"][0]["long name"], 1);
    }
}
