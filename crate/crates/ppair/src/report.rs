//! Report plumbing: schema-stable, key-sorted JSON with wall-clock timings
//! isolated under their own key, so identical invocations are byte-identical
//! everywhere else.

use std::time::Instant;

use num_bigint::BigUint;
use serde::Serializer;
use serde_json::{Map, Value};

/// Large integers are serialized as decimal strings; JSON numbers would
/// silently lose precision past 2^53.
pub fn serialize_biguint<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// Stopwatch that accumulates named wall-clock phases.
#[derive(Debug)]
pub struct Timings {
    start: Instant,
    phases: Vec<(String, f64)>,
}

impl Default for Timings {
    fn default() -> Self {
        Self::new()
    }
}

impl Timings {
    pub fn new() -> Self {
        Timings {
            start: Instant::now(),
            phases: Vec::new(),
        }
    }

    pub fn mark(&mut self, phase: impl Into<String>) {
        let now = Instant::now();
        self.phases
            .push((phase.into(), now.duration_since(self.start).as_secs_f64()));
        self.start = now;
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        let mut total = 0.0;
        for (name, secs) in &self.phases {
            map.insert(format!("{name}_seconds"), json_f64(*secs));
            total += secs;
        }
        map.insert("total_seconds".to_string(), json_f64(total));
        Value::Object(map)
    }
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// Top-level run report: command echo, version, effective inputs (defaults
/// included), results, discrepancies, and the timings block.
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub discrepancies: Vec<String>,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            inputs: Value::Object(Map::new()),
            results: Value::Object(Map::new()),
            discrepancies: Vec::new(),
            timings: Timings::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        // serde_json maps are BTree-backed, so keys come out sorted and the
        // encoding is deterministic byte for byte.
        let mut map = Map::new();
        map.insert("command".to_string(), Value::String(self.command.clone()));
        map.insert(
            "version".to_string(),
            Value::String(env!("CARGO_PKG_VERSION").to_string()),
        );
        map.insert("inputs".to_string(), self.inputs.clone());
        map.insert("results".to_string(), self.results.clone());
        map.insert(
            "discrepancies".to_string(),
            Value::Array(
                self.discrepancies
                    .iter()
                    .map(|d| Value::String(d.clone()))
                    .collect(),
            ),
        );
        map.insert("timings".to_string(), self.timings.to_value());
        Value::Object(map)
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_key_sorted_and_deterministic() {
        let mut r = RunReport::new("demo");
        r.inputs = serde_json::json!({"zeta": 1, "alpha": 2});
        let a = r.render_json();
        let b = r.render_json();
        assert_eq!(a, b);
        let alpha = a.find("\"alpha\"").unwrap();
        let zeta = a.find("\"zeta\"").unwrap();
        assert!(alpha < zeta);
    }
}
