//! JSON output with fixed 17-significant-digit reals, and the chain file
//! format `{"d": int, "P": [[...]], "pi": [...]?}`.
//!
//! Non-finite reals (an unbounded interval end, say) are written as `null`.
//! Object keys come out sorted, so equal values always produce equal bytes.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_real(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short arrays of scalars stay on one line.
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(x, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Scientific notation with 17 significant digits; round-trips every f64.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainFile {
    pub d: usize,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

impl ChainFile {
    pub fn from_chain(chain: &ChainSpec) -> Self {
        Self {
            d: chain.d(),
            p: chain.rows(),
            pi: chain.pi_known().map(|v| v.iter().copied().collect()),
        }
    }

    pub fn into_chain(self) -> Result<ChainSpec> {
        if self.p.len() != self.d || self.p.iter().any(|r| r.len() != self.d) {
            return Err(Error::Parse(format!(
                "chain file declares d = {} but P is not {0}x{0}",
                self.d
            )));
        }
        let d = self.d;
        let p = DMatrix::from_fn(d, d, |i, j| self.p[i][j]);
        ChainSpec::new(p, self.pi)
    }
}

pub fn chain_to_json(chain: &ChainSpec) -> Result<String> {
    to_json_string(&ChainFile::from_chain(chain))
}

pub fn chain_from_json(text: &str) -> Result<ChainSpec> {
    serde_json::from_str::<ChainFile>(text)?.into_chain()
}

pub fn read_chain(file: &Path) -> Result<ChainSpec> {
    chain_from_json(&std::fs::read_to_string(file)?)
}

pub fn write_chain(file: &Path, chain: &ChainSpec) -> Result<()> {
    std::fs::write(file, chain_to_json(chain)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::ChainFamily;
    use proptest::prelude::*;

    #[test]
    fn reals_have_17_digits() {
        assert_eq!(format_real(0.6), "5.9999999999999998e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(f64::INFINITY), "null");
    }

    #[test]
    fn nonfinite_becomes_null() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: u64,
        }
        let s = to_json_string(&S {
            a: f64::INFINITY,
            b: 3,
        })
        .unwrap();
        assert_eq!(s, "{\n  \"a\": null,\n  \"b\": 3\n}\n");
    }

    #[test]
    fn chain_round_trip() {
        let chain = ChainFamily::PerturbedUniformI {
            d: 5,
            gammabar: 0.3,
            index: 2,
        }
        .build()
        .unwrap();
        let back = chain_from_json(&chain_to_json(&chain).unwrap()).unwrap();
        assert_eq!(back, chain);
    }

    #[test]
    fn chain_file_shape_errors() {
        assert!(chain_from_json(r#"{"d": 3, "P": [[0.5, 0.5], [0.5, 0.5]]}"#).is_err());
        assert!(chain_from_json(r#"{"d": 2, "P": [[0.9, 0.2], [0.5, 0.5]]}"#).is_err());
        let c = chain_from_json(r#"{"d": 2, "P": [[0.9, 0.1], [0.5, 0.5]]}"#).unwrap();
        assert!(c.pi_known().is_none());
    }

    proptest! {
        #[test]
        fn reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = serde_json::from_str(&format_real(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
