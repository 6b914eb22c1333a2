use ramsey_mts::adversary::Constants;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            detail: detail.into(),
            pass,
        }
    }
}

/// Config echo, per-run rows, aggregates and verdicts of one experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub versions: Map<String, Value>,
    pub config: Value,
    pub constants: Constants,
    pub runs: Vec<Value>,
    pub aggregate: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

/// Header plus rows of strings; rendered tab-separated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Table {
    /// Columns are the keys of the first object, in order.
    pub fn from_objects(rows: &[Value]) -> Table {
        let header: Vec<String> = match rows.first() {
            Some(Value::Object(m)) => m.keys().cloned().collect(),
            _ => vec!["value".into()],
        };
        let rows = rows
            .iter()
            .map(|r| match r {
                Value::Object(m) => header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()).collect(),
                other => vec![cell(other)],
            })
            .collect();
        Table { header, rows }
    }

    pub fn checks(checks: &[Check]) -> Table {
        Table {
            header: vec!["check".into(), "pass".into(), "detail".into()],
            rows: checks
                .iter()
                .map(|c| vec![c.name.clone(), c.pass.to_string(), c.detail.clone()])
                .collect(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let clean = |s: &String| s.replace(['\t', '\n'], " ");
        let mut out = self.header.iter().map(clean).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(clean).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

/// What a command hands back: a JSON document, a verdict and a TSV rendering.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub json: Value,
    pub pass: bool,
    pub table: Table,
    /// Emitted verbatim instead of JSON or TSV.
    pub raw: Option<String>,
}

impl Outcome {
    pub fn new(json: Value, pass: bool, table: Table) -> Outcome {
        Outcome { json, pass, table, raw: None }
    }

    pub fn raw(text: String) -> Outcome {
        Outcome {
            json: Value::Null,
            pass: true,
            table: Table::default(),
            raw: Some(text),
        }
    }

    /// A single object: one row, one column per key.
    pub fn object(json: Value, pass: bool) -> Outcome {
        let flat = match &json {
            Value::Object(m) => Value::Object(
                m.iter()
                    .map(|(k, v)| (k.clone(), if v.is_object() || v.is_array() { Value::String(v.to_string()) } else { v.clone() }))
                    .collect(),
            ),
            other => other.clone(),
        };
        let table = Table::from_objects(&[flat]);
        Outcome { json, pass, table, raw: None }
    }
}

impl From<ExperimentReport> for Outcome {
    fn from(r: ExperimentReport) -> Outcome {
        let pass = r.pass;
        let mut table = Table::from_objects(&r.runs);
        if table.rows.is_empty() {
            table = Table::checks(&r.checks);
        }
        Outcome {
            json: serde_json::to_value(&r).expect("report serializes"),
            pass,
            table,
            raw: None,
        }
    }
}
