//! JSON formats for groups, functions, kernels, partitions and phases.
//!
//! Floating-point numbers are written with 17 significant digits so every
//! `f64` survives a round trip.

use std::path::Path;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::group::FiniteAbelianGroup;
use crate::kernels::Kernel;
use crate::partition::Partition;
use crate::phases::PolynomialPhase;

/// An ordered JSON tree whose floats serialize with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// `d.dddddddddddddddde[-]x`; non-finite values become `null`.
pub fn format_f64(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

impl Serialize for Json {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Json::Null => s.serialize_unit(),
            Json::Bool(b) => s.serialize_bool(*b),
            Json::Int(i) => s.serialize_i128(*i),
            Json::Num(x) => match format_f64(*x) {
                Some(text) => RawValue::from_string(text)
                    .map_err(serde::ser::Error::custom)?
                    .serialize(s),
                None => s.serialize_unit(),
            },
            Json::Str(v) => s.serialize_str(v),
            Json::Arr(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Json::Obj(fields) => {
                let mut map = s.serialize_map(Some(fields.len()))?;
                for (k, v) in fields {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

impl Json {
    pub fn obj<K: Into<String>>(fields: impl IntoIterator<Item = (K, Json)>) -> Self {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Self {
        Json::Str(s.into())
    }

    pub fn complex(c: Complex64) -> Self {
        Json::Arr(vec![Json::Num(c.re), Json::Num(c.im)])
    }

    pub fn uints(xs: impl IntoIterator<Item = usize>) -> Self {
        Json::Arr(xs.into_iter().map(|x| Json::Int(x as i128)).collect())
    }

    /// Converts any serde value; floats keep full precision.
    pub fn from_serialize<T: Serialize>(value: &T) -> Result<Self> {
        let v = serde_json::to_value(value).map_err(|e| HofaError::Internal(e.to_string()))?;
        Ok(Self::from_value(&v))
    }

    pub fn from_value(v: &Value) -> Self {
        match v {
            Value::Null => Json::Null,
            Value::Bool(b) => Json::Bool(*b),
            Value::Number(n) => match (n.as_i64(), n.as_u64()) {
                (Some(i), _) => Json::Int(i as i128),
                (_, Some(u)) => Json::Int(u as i128),
                _ => Json::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Json::Str(s.clone()),
            Value::Array(items) => Json::Arr(items.iter().map(Self::from_value).collect()),
            Value::Object(map) => Json::Obj(
                map.iter()
                    .map(|(k, v)| (k.clone(), Self::from_value(v)))
                    .collect(),
            ),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Json> {
        match self {
            Json::Obj(fields) => fields.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Drops the top-level field `key` if present.
    pub fn without(mut self, key: &str) -> Self {
        if let Json::Obj(fields) = &mut self {
            fields.retain(|(k, _)| k != key);
        }
        self
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("json tree always serializes")
    }
}

fn bad(what: &str) -> HofaError {
    invalid(format!("malformed JSON: {what}"))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))
}

/// Parses a factor list such as `"5"` or `"3,3,2"`.
pub fn parse_group_literal(text: &str) -> Result<FiniteAbelianGroup> {
    let factors = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| invalid(format!("bad group literal {text:?}")))
        })
        .collect::<Result<Vec<i64>>>()?;
    FiniteAbelianGroup::new(&factors)
}

pub fn group_to_json(g: &FiniteAbelianGroup) -> Json {
    Json::obj([("factors", Json::uints(g.factors().iter().copied()))])
}

pub fn group_from_json(v: &Value) -> Result<FiniteAbelianGroup> {
    let factors = v
        .get("factors")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("group needs a \"factors\" array"))?
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| bad("factors must be integers")))
        .collect::<Result<Vec<i64>>>()?;
    FiniteAbelianGroup::new(&factors)
}

fn complex_from_json(v: &Value) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(Complex64::new(
            re.as_f64()
                .ok_or_else(|| bad("complex parts must be numbers"))?,
            im.as_f64()
                .ok_or_else(|| bad("complex parts must be numbers"))?,
        )),
        _ => Err(bad("values must be numbers or [re, im] pairs")),
    }
}

fn values_from_json(v: &Value) -> Result<Vec<Complex64>> {
    v.get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"values\" array"))?
        .iter()
        .map(complex_from_json)
        .collect()
}

fn values_to_json(values: &[Complex64]) -> Json {
    Json::Arr(values.iter().map(|&c| Json::complex(c)).collect())
}

fn group_field(v: &Value) -> Result<FiniteAbelianGroup> {
    group_from_json(v.get("group").ok_or_else(|| bad("missing \"group\""))?)
}

pub fn function_to_json(f: &GroupFunction) -> Json {
    Json::obj([
        ("group", group_to_json(f.group())),
        ("values", values_to_json(f.values())),
    ])
}

pub fn function_from_json(v: &Value) -> Result<GroupFunction> {
    GroupFunction::from_values(group_field(v)?, values_from_json(v)?)
}

pub fn kernel_to_json(k: &Kernel) -> Json {
    Json::obj([
        ("group", group_to_json(k.group())),
        ("values", values_to_json(k.values())),
    ])
}

pub fn kernel_from_json(v: &Value) -> Result<Kernel> {
    Kernel::from_values(group_field(v)?, values_from_json(v)?)
}

pub fn partition_to_json(p: &Partition) -> Json {
    Json::obj([
        ("group", group_to_json(p.group())),
        ("labels", Json::uints(p.labels().iter().copied())),
    ])
}

pub fn partition_from_json(v: &Value) -> Result<Partition> {
    let labels = v
        .get("labels")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"labels\" array"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .ok_or_else(|| bad("labels must be non-negative integers"))
        })
        .collect::<Result<Vec<u64>>>()?;
    Partition::from_labels(&group_field(v)?, &labels)
}

/// Monomial keys are comma-separated exponents, e.g. `"2"` or `"1,0"`.
pub fn phase_to_json(phase: &PolynomialPhase) -> Json {
    let mut coeffs: Vec<_> = phase.coeffs().iter().collect();
    coeffs.sort_by_key(|(m, _)| (m.iter().sum::<u32>(), (*m).clone()));
    Json::obj([
        ("p", Json::Int(phase.p() as i128)),
        ("n", Json::Int(phase.n() as i128)),
        (
            "coeffs",
            Json::Obj(
                coeffs
                    .into_iter()
                    .map(|(m, &c)| {
                        let key = m.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                        (key, Json::Int(c as i128))
                    })
                    .collect(),
            ),
        ),
    ])
}

pub fn phase_from_json(v: &Value) -> Result<PolynomialPhase> {
    let int = |key: &str| {
        v.get(key)
            .and_then(Value::as_u64)
            .ok_or_else(|| bad(&format!("phase needs integer \"{key}\"")))
    };
    let (p, n) = (int("p")?, int("n")?);
    let coeffs = v
        .get("coeffs")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("phase needs a \"coeffs\" object"))?;
    let terms = coeffs
        .iter()
        .map(|(key, c)| {
            let exps = key
                .split(',')
                .map(|e| {
                    e.trim()
                        .parse::<u32>()
                        .map_err(|_| bad(&format!("bad monomial key {key:?}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            Ok((
                exps,
                c.as_i64()
                    .ok_or_else(|| bad("coefficients must be integers"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialPhase::new(p as u32, n as usize, terms)
}
