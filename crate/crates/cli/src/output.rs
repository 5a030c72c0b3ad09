use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::args::Format;
use crate::CliError;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Text form of `x` with at most 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = sig12(x);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs();
    if (1e-5..1e15).contains(&mag) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Recursively rounds every number in a JSON value.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: Value,
    pub table: Table,
    /// Human-readable lines for stdout; when empty the report itself goes to stdout.
    pub text: Vec<String>,
    pub passed: bool,
}

pub fn render(outcome: &Outcome, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&round_json(outcome.json.clone()))
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&outcome.table.headers).map_err(|e| CliError::Runtime(e.to_string()))?;
            for row in &outcome.table.rows {
                w.write_record(row).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

/// Writes the report to `out`, or to stdout. Text lines stand in for the
/// report on stdout unless a format was asked for explicitly.
pub fn emit(
    outcome: &Outcome,
    format: Option<Format>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let report = render(outcome, format.unwrap_or(Format::Json))?;
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    if let Some(path) = out {
        std::fs::write(path, &report).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    } else if outcome.text.is_empty() || format.is_some() {
        return stdout.write_all(&report).map_err(io);
    }
    for line in &outcome.text {
        writeln!(stdout, "{line}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 6.0), "0.166666666667");
        assert_eq!(fmt_num(2.220446049250313e-16), "2.22044604925e-16");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123456789.123457), "123456789.123");
    }

    #[test]
    fn json_numbers_are_rounded() {
        let v = round_json(serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}}));
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":{"c":0.3}}"#);
    }
}
