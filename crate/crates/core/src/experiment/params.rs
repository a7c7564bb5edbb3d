use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use toml::Value;

use super::ConfigError;

/// The free-form `[params]` table of a config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(BTreeMap<String, Value>);

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub(crate) fn allow_only(&self, keys: &[&str]) -> Result<(), ConfigError> {
        match self.0.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::param(
                k,
                format!("unknown parameter; expected one of {}", keys.join(", ")),
            )),
            None => Ok(()),
        }
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => as_f64(v)
                .filter(|x| x.is_finite())
                .ok_or_else(|| ConfigError::param(key, "expected a finite number")),
        }
    }

    pub(crate) fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.0.get(key).map(|_| self.f64_or(key, 0.0)).transpose()
    }

    pub(crate) fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let x = self.f64_or(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(ConfigError::param(key, format!("must be positive, got {x}")))
        }
    }

    pub(crate) fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(ConfigError::param(key, "expected a non-negative integer")),
        }
    }

    pub(crate) fn string_or(&self, key: &str, default: &str) -> Result<String, ConfigError> {
        match self.0.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(ConfigError::param(key, "expected a string")),
        }
    }

    pub(crate) fn opt_string(&self, key: &str) -> Result<Option<String>, ConfigError> {
        self.0.get(key).map(|_| self.string_or(key, "")).transpose()
    }

    pub(crate) fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| as_f64(v).filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| ConfigError::param(key, "expected a list of finite numbers")),
            Some(_) => Err(ConfigError::param(key, "expected a list of numbers")),
        }
    }

    pub(crate) fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Some(*i as usize),
                    _ => None,
                })
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| ConfigError::param(key, "expected a list of non-negative integers")),
            Some(_) => Err(ConfigError::param(key, "expected a list of integers")),
        }
    }

    /// `[lo, hi]` with `lo < hi`.
    pub(crate) fn range_or(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64), ConfigError> {
        let v = self.f64_list_or(key, &[default.0, default.1])?;
        match v.as_slice() {
            [lo, hi] if lo < hi => Ok((*lo, *hi)),
            _ => Err(ConfigError::param(key, "expected [lo, hi] with lo < hi")),
        }
    }

    /// A list of `[a, b]` pairs.
    pub(crate) fn pairs(&self, key: &str) -> Result<Option<Vec<(f64, f64)>>, ConfigError> {
        let Some(v) = self.0.get(key) else {
            return Ok(None);
        };
        let bad = || ConfigError::param(key, "expected a list of [a, b] pairs");
        let Value::Array(items) = v else {
            return Err(bad());
        };
        items
            .iter()
            .map(|item| match item {
                Value::Array(p) if p.len() == 2 => match (as_f64(&p[0]), as_f64(&p[1])) {
                    (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Ok((a, b)),
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}
