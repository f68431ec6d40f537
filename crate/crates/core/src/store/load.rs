use super::{Dictionary, Relation};

/// Parses the text relation format: a header line `name:ATTR1,ATTR2,...`
/// followed by one comma-separated row per line. Blank lines are skipped,
/// duplicate rows are kept, and surrounding whitespace is trimmed.
///
/// ```
/// use joinest::store::{parse_relation, Dictionary};
///
/// let mut dict = Dictionary::default();
/// let r = parse_relation("R:A,B\n1,2\n\n1,2\n2,3\n", &mut dict).unwrap();
/// assert_eq!((r.name(), r.arity(), r.len()), ("R", 2, 3));
/// ```
pub fn parse_relation(text: &str, dict: &mut Dictionary) -> Result<Relation, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or("missing `name:ATTR,...` header")?;
    let (name, attrs) = header
        .split_once(':')
        .ok_or_else(|| format!("header `{header}` is not of the form `name:ATTR,...`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err("relation name is empty".into());
    }
    let schema: Vec<&str> = attrs.split(',').map(str::trim).collect();
    if schema.iter().any(|a| a.is_empty()) {
        return Err(format!("header `{header}` has an empty attribute name"));
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let row: Vec<&str> = line.split(',').map(str::trim).collect();
        if row.len() != schema.len() {
            return Err(format!(
                "line {line_no}: {} values, schema has {}",
                row.len(),
                schema.len()
            ));
        }
        rows.push(row);
    }
    Relation::load(name, &schema, rows, dict).map_err(|e| e.to_string())
}
