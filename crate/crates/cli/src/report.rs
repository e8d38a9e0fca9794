//! Rendering of command results as JSON, CSV or plain text.

use serde::Serialize;

use crate::config::OutputFormat;

/// One CSV row: case id, inputs, expected, actual, status.
#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub case_id: String,
    pub inputs: String,
    pub expected: String,
    pub actual: String,
    pub status: String,
}

impl Case {
    pub fn new(case_id: impl Into<String>, inputs: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, ok: bool) -> Self {
        Case {
            case_id: case_id.into(),
            inputs: inputs.into(),
            expected: expected.into(),
            actual: actual.into(),
            status: if ok { "ok" } else { "fail" }.into(),
        }
    }
}

/// A command's output in all three forms.
pub struct Output {
    pub json: serde_json::Value,
    pub rows: Vec<Case>,
    pub text: String,
}

pub fn render(out: &Output, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &out.rows {
                w.serialize(row).expect("in-memory CSV write");
            }
            String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
        }
        OutputFormat::Text => {
            let mut s = out.text.clone();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}
