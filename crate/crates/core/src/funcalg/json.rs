//! JSON expression trees: `{"op": "...", "args": [...]}`.
//!
//! | op | args |
//! |----|------|
//! | `const` | `[c]` |
//! | `m`, `phi` | `[k]` (0-based coordinate index) |
//! | `pullback` | `[base_expr]` |
//! | `lambda` | `[comp_0, comp_1, ...]` section components |
//! | `sum`, `product` | `[expr, ...]` |
//! | `sin`, `cos`, `exp` | `[expr]` |
//! | `poly` | `[[c0, c1, ...], expr]` |
//!
//! A section on its own is a JSON array of component expressions.

use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::expr::{Primitive, Section, SmoothFn};
use crate::error::{Error, Result};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl SmoothFn {
    pub fn to_json(&self) -> Value {
        match self {
            SmoothFn::Const(c) => json!({"op": "const", "args": [c]}),
            SmoothFn::Base(k) => json!({"op": "m", "args": [k]}),
            SmoothFn::Fiber(k) => json!({"op": "phi", "args": [k]}),
            SmoothFn::Pullback(f) => json!({"op": "pullback", "args": [f.to_json()]}),
            SmoothFn::Lambda(x) => json!({"op": "lambda", "args": x.to_json()}),
            SmoothFn::Sum(xs) => {
                json!({"op": "sum", "args": xs.iter().map(SmoothFn::to_json).collect::<Vec<_>>()})
            }
            SmoothFn::Product(xs) => {
                json!({"op": "product", "args": xs.iter().map(SmoothFn::to_json).collect::<Vec<_>>()})
            }
            SmoothFn::Apply(p, x) => match p {
                Primitive::Sin => json!({"op": "sin", "args": [x.to_json()]}),
                Primitive::Cos => json!({"op": "cos", "args": [x.to_json()]}),
                Primitive::Exp => json!({"op": "exp", "args": [x.to_json()]}),
                Primitive::Poly(c) => json!({"op": "poly", "args": [c, x.to_json()]}),
            },
        }
    }

    pub fn from_json(v: &Value) -> Result<SmoothFn> {
        let op = v
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("expression node without \"op\": {v}")))?;
        let args = v
            .get("args")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err(format!("\"{op}\" node without \"args\" array")))?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(parse_err(format!(
                    "\"{op}\" takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let index = |a: &Value| -> Result<usize> {
            a.as_u64()
                .map(|k| k as usize)
                .ok_or_else(|| parse_err(format!("\"{op}\" index must be a nonnegative integer")))
        };
        let many = || {
            args.iter()
                .map(SmoothFn::from_json)
                .collect::<Result<Vec<_>>>()
        };
        Ok(match op {
            "const" => {
                arity(1)?;
                SmoothFn::Const(
                    args[0]
                        .as_f64()
                        .ok_or_else(|| parse_err("\"const\" needs a number"))?,
                )
            }
            "m" => {
                arity(1)?;
                SmoothFn::Base(index(&args[0])?)
            }
            "phi" => {
                arity(1)?;
                SmoothFn::Fiber(index(&args[0])?)
            }
            "pullback" => {
                arity(1)?;
                SmoothFn::pullback(SmoothFn::from_json(&args[0])?)?
            }
            "lambda" => SmoothFn::Lambda(Arc::new(Section::new(many()?)?)),
            "sum" => SmoothFn::Sum(many()?),
            "product" => SmoothFn::Product(many()?),
            "sin" | "cos" | "exp" => {
                arity(1)?;
                let p = match op {
                    "sin" => Primitive::Sin,
                    "cos" => Primitive::Cos,
                    _ => Primitive::Exp,
                };
                SmoothFn::Apply(p, Box::new(SmoothFn::from_json(&args[0])?))
            }
            "poly" => {
                arity(2)?;
                let coeffs = args[0]
                    .as_array()
                    .and_then(|c| c.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| {
                        parse_err("\"poly\" coefficients must be an array of numbers")
                    })?;
                SmoothFn::Apply(
                    Primitive::Poly(coeffs),
                    Box::new(SmoothFn::from_json(&args[1])?),
                )
            }
            other => return Err(parse_err(format!("unknown op \"{other}\""))),
        })
    }
}

impl Section {
    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(SmoothFn::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Section> {
        let comps = v
            .as_array()
            .ok_or_else(|| parse_err("section must be an array of expressions"))?
            .iter()
            .map(SmoothFn::from_json)
            .collect::<Result<Vec<_>>>()?;
        Section::new(comps)
    }
}

impl Serialize for SmoothFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SmoothFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        SmoothFn::from_json(&v).map_err(D::Error::custom)
    }
}

impl Serialize for Section {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Section {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Section::from_json(&v).map_err(D::Error::custom)
    }
}
