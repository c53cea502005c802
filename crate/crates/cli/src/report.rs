use std::fmt::Write as _;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    Int(u128),
    Bool(bool),
    Text(String),
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u128)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as u128)
    }
}

impl From<u128> for Field {
    fn from(v: u128) -> Self {
        Field::Int(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl Field {
    fn text(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Int(v) => match u64::try_from(*v) {
                Ok(v) => Value::from(v),
                // beyond JSON-safe integers: keep every digit
                Err(_) => Value::from(v.to_string()),
            },
            Field::Bool(v) => Value::from(*v),
            Field::Text(v) => Value::from(v.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

/// Flat key/value outcome of one command.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub fields: Vec<(String, Field)>,
    /// A serialized digraph or listing printed after the fields.
    pub payload: Option<String>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(verdict: Verdict) -> Self {
        Report {
            command: String::new(),
            verdict,
            fields: Vec::new(),
            payload: None,
            elapsed_ms: 0,
        }
    }

    pub fn pass_if(ok: bool) -> Self {
        Report::new(if ok { Verdict::Pass } else { Verdict::Fail })
    }

    pub fn field(mut self, key: impl Into<String>, value: impl Into<Field>) -> Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Field>) {
        self.fields.push((key.into(), value.into()));
    }

    pub fn payload(mut self, text: String) -> Self {
        self.payload = Some(text);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                let _ = writeln!(out, "command = {}", self.command);
                let _ = writeln!(out, "verdict = {}", self.verdict.as_str());
                for (k, v) in &self.fields {
                    let _ = writeln!(out, "{k} = {}", v.text());
                }
                let _ = writeln!(out, "elapsed_ms = {}", self.elapsed_ms);
                if let Some(p) = &self.payload {
                    out.push('\n');
                    out.push_str(p);
                }
                out
            }
            Format::Structured => {
                let mut map = Map::new();
                map.insert("command".into(), Value::from(self.command.as_str()));
                map.insert("verdict".into(), Value::from(self.verdict.as_str()));
                for (k, v) in &self.fields {
                    map.insert(k.clone(), v.json());
                }
                map.insert(
                    "elapsed_ms".into(),
                    Field::Int(self.elapsed_ms).json(),
                );
                if let Some(p) = &self.payload {
                    map.insert("payload".into(), Value::from(p.as_str()));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(map))
                    .expect("flat maps always serialize");
                s.push('\n');
                s
            }
        }
    }
}
