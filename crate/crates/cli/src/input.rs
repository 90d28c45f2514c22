//! Loading input files, dispatched on their top-level `"kind"`.

use std::fmt;
use std::path::Path;

use serde_json::Value;

use wfcoalg::coalgebra::{CoalgebraError, FiniteCoalgebra, LazyCoalgebra};
use wfcoalg::container::{HStructure, StateId, Structure};
use wfcoalg::convex::ConvexSpec;
use wfcoalg::initial_algebra::{Signature, Term};
use wfcoalg::nominal::NltsSpec;

use crate::gallery;

/// A parse or validation failure, anchored at a line of the input (line 0
/// when the file could not be read at all).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub source: String,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (0, _) => write!(f, "{}: {}", self.source, self.message),
            (l, Some(c)) => write!(f, "{}:{}:{}: {}", self.source, l, c, self.message),
            (l, None) => write!(f, "{}:{}: {}", self.source, l, self.message),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Clone)]
pub enum Input {
    Set(FiniteCoalgebra),
    Lazy(LazyCoalgebra),
    Nlts(NltsSpec),
    Convex(ConvexSpec),
    Signature(Signature),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Set(_) => "set-coalgebra",
            Input::Lazy(_) => "lazy-coalgebra",
            Input::Nlts(_) => "nlts",
            Input::Convex(_) => "convex",
            Input::Signature(_) => "signature",
        }
    }
}

/// Source text kept around to anchor semantic errors.
struct Source<'a> {
    name: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, line: usize, column: Option<usize>, message: impl Into<String>) -> InputError {
        InputError {
            source: self.name.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    /// Anchors at the first line mentioning `needle` as a JSON string, or
    /// at line 1.
    fn error_near(&self, needle: Option<&str>, message: impl Into<String>) -> InputError {
        let line = needle
            .and_then(|n| {
                let quoted = serde_json::to_string(n).ok()?;
                self.text.lines().position(|l| l.contains(&quoted))
            })
            .map_or(1, |i| i + 1);
        self.error_at(line, None, message)
    }

    fn json_error(&self, e: serde_json::Error) -> InputError {
        self.error_at(e.line().max(1), Some(e.column()), e.to_string_without_position())
    }

    fn parse(&self) -> Result<Value, InputError> {
        serde_json::from_str(self.text).map_err(|e| self.json_error(e))
    }

    fn typed<T: serde::de::DeserializeOwned>(&self) -> Result<T, InputError> {
        serde_json::from_str(self.text).map_err(|e| self.json_error(e))
    }
}

trait WithoutPosition {
    fn to_string_without_position(&self) -> String;
}

impl WithoutPosition for serde_json::Error {
    fn to_string_without_position(&self) -> String {
        let s = self.to_string();
        match s.rfind(" at line ") {
            Some(i) => s[..i].to_string(),
            None => s,
        }
    }
}

fn state_in(e: &CoalgebraError) -> Option<&StateId> {
    match e {
        CoalgebraError::DuplicateState(s)
        | CoalgebraError::MissingStructure(s)
        | CoalgebraError::ExtraStructure(s)
        | CoalgebraError::IllTyped(s)
        | CoalgebraError::NotInCarrier(s)
        | CoalgebraError::UndefinedOn(s)
        | CoalgebraError::NameClash(s) => Some(s),
        CoalgebraError::DanglingRef { to, .. } | CoalgebraError::NotClosed { to, .. } => Some(to),
        _ => None,
    }
}

fn check_version(src: &Source, v: &Value) -> Result<(), InputError> {
    match v.get("version") {
        None => Ok(()),
        Some(x) if x == 1 => Ok(()),
        Some(x) => Err(src.error_near(Some("version"), format!("unsupported version {x}"))),
    }
}

fn parse_text(name: &str, text: &str) -> Result<Input, InputError> {
    let src = Source { name, text };
    let v = src.parse()?;
    let Some(kind) = v.get("kind").and_then(Value::as_str) else {
        return Err(src.error_at(1, None, "missing top-level \"kind\" field"));
    };
    check_version(&src, &v)?;
    match kind {
        "set-coalgebra" => FiniteCoalgebra::from_json(&v)
            .map(Input::Set)
            .map_err(|e| src.error_near(state_in(&e).map(StateId::as_str), e.to_string())),
        "nlts" => src.typed::<NltsSpec>().map(Input::Nlts),
        "convex" => ConvexSpec::from_json(&v)
            .map(Input::Convex)
            .map_err(|e| src.error_near(Some("successors"), e.to_string())),
        "signature" => src.typed::<Signature>().map(Input::Signature),
        other => Err(src.error_near(Some(other), format!("unknown kind `{other}`"))),
    }
}

fn read(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| InputError {
        source: path.to_string(),
        line: 0,
        column: None,
        message: e.to_string(),
    })
}

/// A file path or `gallery:NAME`.
pub fn load(spec: &str) -> Result<Input, InputError> {
    if let Some(name) = spec.strip_prefix("gallery:") {
        return gallery::entry(name).map(|e| e.input()).ok_or_else(|| InputError {
            source: spec.to_string(),
            line: 0,
            column: None,
            message: format!("no gallery entry `{name}`"),
        });
    }
    parse_text(spec, &read(spec)?)
}

/// A structure file: `{"kind": "structure", "version": 1, "structure": …}`
/// where slots are `{"term": "node(leaf,leaf)"}`.
pub fn load_structure(path: &str) -> Result<Structure<Term>, InputError> {
    let text = read(path)?;
    let src = Source { name: path, text: &text };
    let v = src.parse()?;
    if v.get("kind").and_then(Value::as_str) != Some("structure") {
        return Err(src.error_at(1, None, "expected \"kind\": \"structure\""));
    }
    check_version(&src, &v)?;
    let body = v
        .get("structure")
        .ok_or_else(|| src.error_at(1, None, "missing \"structure\" field"))?;
    let h = HStructure::from_json(&rename_terms(body))
        .map_err(|e| src.error_near(Some("structure"), e.to_string()))?;
    h.try_map(&mut |s: &StateId| s.as_str().parse::<Term>())
        .map_err(|e| src.error_near(Some("term"), e.to_string()))
}

fn rename_terms(v: &Value) -> Value {
    match v {
        Value::Object(m) if m.len() == 1 && m.contains_key("term") => {
            serde_json::json!({"state": m["term"].clone()})
        }
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), rename_terms(x))).collect()),
        Value::Array(xs) => Value::Array(xs.iter().map(rename_terms).collect()),
        other => other.clone(),
    }
}

pub fn load_signature(spec: &str) -> Result<Signature, InputError> {
    match load(spec)? {
        Input::Signature(s) => Ok(s),
        other => Err(InputError {
            source: spec.to_string(),
            line: 1,
            column: None,
            message: format!("expected a signature, found kind `{}`", other.kind()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_text("f.json", "{\n  \"kind\": \"set-coalgebra\",\n  oops\n}").err().unwrap();
        assert_eq!(e.line, 3);
        assert!(e.to_string().starts_with("f.json:3:"));
    }

    #[test]
    fn semantic_errors_point_at_the_state() {
        let text = r#"{
  "kind": "set-coalgebra",
  "version": 1,
  "functor": {"finpow": {"id": null}},
  "states": ["a"],
  "structure": {
    "a": {"set": [{"state": "ghost"}]}
  }
}"#;
        let e = parse_text("g.json", text).err().unwrap();
        assert_eq!(e.line, 7, "{e}");
    }

    #[test]
    fn unknown_kind() {
        let e = parse_text("k.json", "{\"kind\": \"zebra\"}").err().unwrap();
        assert!(e.message.contains("zebra"));
    }
}
