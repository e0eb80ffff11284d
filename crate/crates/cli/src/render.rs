//! Plain-text rendering of report documents.

use serde_json::Value;

const MAX_CELL: usize = 96;

fn scalar(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    };
    if s.chars().count() > MAX_CELL {
        let head: String = s.chars().take(MAX_CELL - 3).collect();
        format!("{head}... ({} chars)", s.chars().count())
    } else {
        s
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined = items.iter().map(scalar).collect::<Vec<_>>().join(", ");
            rows.push((prefix.to_string(), scalar(&Value::String(format!("[{joined}]")))));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        other => rows.push((prefix.to_string(), scalar(other))),
    }
}

/// Two-column key/value table, nested keys joined with dots.
pub fn table(doc: &Value) -> String {
    let mut rows = vec![];
    flatten("", doc, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_documents_flatten() {
        let doc = json!({ "a": 1, "b": { "c": [1, 2], "d": [{ "e": "x" }] }, "f": null });
        let want = "a         1\nb.c       [1, 2]\nb.d[0].e  x\nf         -\n";
        assert_eq!(table(&doc), want);
    }

    #[test]
    fn long_cells_are_truncated() {
        let s = "9".repeat(500);
        assert!(table(&json!({ "n": s })).contains("(500 chars)"));
    }
}
