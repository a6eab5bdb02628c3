//! JSON operator format.
//!
//! ```json
//! {"local": [["2*u", 0], ["1", 2]], "nonlocal": [["u'", "1"]], "grading": {"u": "even"}}
//! ```
//!
//! `local` lists `[coefficient, power of D]`, `nonlocal` lists `[p, q]` for
//! `p*D^-1*q`. Coefficients use the text grammar of [`crate::parse`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::Grading;
use crate::diffop::DiffOp;
use crate::jet::Indet;
use crate::nonlocal::NonlocalOp;
use crate::parse::{parse_function, ParseError};
use crate::ratfun::RatFun;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("in {field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown indeterminate {0:?} in grading")]
    UnknownIndet(String),
    #[error("{0} may only involve u")]
    NotInU(String),
    #[error("{0} has no exact JSON form")]
    NotRepresentable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseParity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(default)]
    pub local: Vec<(String, usize)>,
    #[serde(default)]
    pub nonlocal: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grading: BTreeMap<String, BaseParity>,
}

fn coefficient(field: String, text: &str) -> Result<RatFun, SchemaError> {
    let p = parse_function(text).map_err(|source| SchemaError::Parse { field: field.clone(), source })?;
    if !p.only_indet(Indet::U) {
        return Err(SchemaError::NotInU(field));
    }
    Ok(RatFun::from_poly(p))
}

impl OperatorSpec {
    pub fn from_json(text: &str) -> Result<OperatorSpec, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_operator(&self) -> Result<NonlocalOp, SchemaError> {
        let mut local = DiffOp::zero();
        for (i, (c, k)) in self.local.iter().enumerate() {
            local = &local + &DiffOp::monomial(coefficient(format!("local[{i}]"), c)?, *k);
        }
        let mut pairs = Vec::new();
        for (i, (p, q)) in self.nonlocal.iter().enumerate() {
            pairs.push((coefficient(format!("nonlocal[{i}].p"), p)?, coefficient(format!("nonlocal[{i}].q"), q)?));
        }
        Ok(NonlocalOp::new(local, pairs))
    }

    /// The grading, with `u` even unless stated otherwise.
    pub fn grading(&self) -> Result<Grading, SchemaError> {
        let mut g = Grading::with_u(false);
        for (name, parity) in &self.grading {
            let w = Indet::from_name(name).ok_or_else(|| SchemaError::UnknownIndet(name.clone()))?;
            g.assign(w, *parity == BaseParity::Odd);
        }
        Ok(g)
    }

    /// Exact JSON form of a canonical weakly non-local operator.
    pub fn from_operator(l: &NonlocalOp) -> Result<OperatorSpec, SchemaError> {
        let text = |f: &RatFun| {
            f.to_laurent().map(|p| p.to_string()).ok_or_else(|| SchemaError::NotRepresentable(f.to_string()))
        };
        if !l.is_weakly_nonlocal() {
            return Err(SchemaError::NotRepresentable(l.to_string()));
        }
        let mut spec = OperatorSpec::default();
        for (k, c) in l.local().coeffs().iter().enumerate() {
            if !c.is_zero() {
                spec.local.push((text(c)?, k));
            }
        }
        for (p, q) in l.depth1() {
            spec.nonlocal.push((text(p)?, text(q)?));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KDV: &str = r#"{"local": [["1", 2], ["2*u", 0]], "nonlocal": [["u'", "1"]], "grading": {"u": "even"}}"#;

    #[test]
    fn test_parse_kdv() {
        let spec = OperatorSpec::from_json(KDV).unwrap();
        let l = spec.to_operator().unwrap();
        assert_eq!(l.to_string(), "D^2 + 2*u + u'*D^-1*1");
        assert_eq!(spec.grading().unwrap().u_is_odd(), Some(false));
    }

    #[test]
    fn test_round_trip() {
        let l = OperatorSpec::from_json(KDV).unwrap().to_operator().unwrap();
        let spec = OperatorSpec::from_operator(&l).unwrap();
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(OperatorSpec::from_json(&back).unwrap().to_operator().unwrap(), l);
    }

    #[test]
    fn test_errors() {
        let bad = r#"{"local": [["u**", 0]]}"#;
        let e = OperatorSpec::from_json(bad).unwrap().to_operator().unwrap_err();
        assert!(e.to_string().starts_with("in local[0]: syntax error"));
        let e = OperatorSpec::from_json(r#"{"grading": {"v": "odd"}}"#).unwrap().grading().unwrap_err();
        assert!(matches!(e, SchemaError::UnknownIndet(_)));
        assert!(OperatorSpec::from_json(r#"{"local": [["F", 0]]}"#).unwrap().to_operator().is_err());
    }
}
