use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u64 = 1;

/// A command's result: a JSON document, optionally a table for CSV output, and whether the
/// solver reached its tolerance.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, fields: Map<String, Value>) -> Self {
        let mut json = Map::new();
        json.insert("schema_version".into(), SCHEMA_VERSION.into());
        json.insert("command".into(), command.into());
        json.extend(fields);
        Self {
            json: Value::Object(json),
            table: None,
            converged: true,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.converged {
            0
        } else {
            2
        }
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                let mut v = self.json.clone();
                round_floats(&mut v);
                serde_json::to_string_pretty(&v)
                    .map(|s| s + "\n")
                    .map_err(|e| CliError::Output(e.to_string()))
            }
            Format::Csv => {
                let table = match &self.table {
                    Some(t) => t.clone(),
                    None => scalar_table(&self.json),
                };
                write_csv(&table)
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> CliResult<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Output(e.to_string())),
        }
    }
}

/// `x` rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round15(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(fields) => fields.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{}", round15(x)),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Top-level scalar fields as a one-row table; arrays and objects are JSON-only.
fn scalar_table(json: &Value) -> Table {
    let mut header = Vec::new();
    let mut row = Vec::new();
    if let Value::Object(fields) = json {
        for (k, v) in fields {
            if !(v.is_array() || v.is_object()) {
                header.push(k.clone());
                row.push(cell(v));
            }
        }
    }
    Table {
        header,
        rows: vec![row],
    }
}

fn write_csv(table: &Table) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(round15(0.811887233926236_4), 0.811887233926236);
        assert_eq!(round15(1.0 / 3.0), 0.333333333333333);
        assert_eq!(round15(-2.5e-300), -2.5e-300);
    }

    #[test]
    fn json_carries_schema_and_rounded_values() {
        let mut f = Map::new();
        f.insert("x".into(), json!(2.0f64 / 3.0));
        f.insert("n".into(), json!(3));
        let r = Report::new("inr", f);
        let v: Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "inr");
        assert_eq!(v["x"].as_f64().unwrap(), 0.666666666666667);
        assert_eq!(v["n"], 3);
    }

    #[test]
    fn csv_falls_back_to_scalars() {
        let mut f = Map::new();
        f.insert("zeta".into(), json!(1.0));
        f.insert("trace".into(), json!([1, 2]));
        let text = Report::new("inr", f).render(Format::Csv).unwrap();
        assert_eq!(text, "command,schema_version,zeta\ninr,1,1\n");
    }
}
