//! Built-in operators with their expected verdicts.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::lenard::{bracket_report, extend, Hierarchy, LenardError};
use crate::parse::{parse_function, ParseError};
use crate::registry::{checks, schemes, CheckError, CheckInput};
use crate::schema::{OperatorSpec, SchemaError};

pub const BUILTIN: [(&str, &str); 5] = [
    ("kdv", include_str!("../../../corpus/kdv.json")),
    ("burgers", include_str!("../../../corpus/burgers.json")),
    ("potential-burgers", include_str!("../../../corpus/potential-burgers.json")),
    ("example-216b", include_str!("../../../corpus/example-216b.json")),
    ("counterexample", include_str!("../../../corpus/counterexample.json")),
];

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdicts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hereditary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrable_pair: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commuting: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub operator: OperatorSpec,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub expected: Verdicts,
}

fn default_scheme() -> String {
    "symmetry".into()
}

fn default_steps() -> usize {
    3
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("in start: {0}")]
    Start(#[from] ParseError),
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("no start function for the chain")]
    NoStart,
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Lenard(#[from] LenardError),
}

/// Either a bare operator or a full corpus entry.
pub fn load(text: &str) -> Result<(OperatorSpec, Option<CorpusEntry>), SchemaError> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("operator").is_some() {
        let e: CorpusEntry = serde_json::from_value(v)?;
        Ok((e.operator.clone(), Some(e)))
    } else {
        Ok((serde_json::from_value(v)?, None))
    }
}

pub fn builtin() -> Vec<CorpusEntry> {
    BUILTIN
        .iter()
        .map(|(name, text)| serde_json::from_str(text).unwrap_or_else(|e| panic!("corpus entry {name}: {e}")))
        .collect()
}

impl CorpusEntry {
    /// The entry's chain, extended by `steps`.
    pub fn hierarchy(&self) -> Result<Hierarchy, CorpusError> {
        let op = self.operator.to_operator()?;
        let registry = schemes();
        let factory = registry.get(&self.scheme).ok_or_else(|| CorpusError::UnknownScheme(self.scheme.clone()))?;
        let scheme = factory.build(&op)?;
        let start = match &self.start {
            Some(s) => parse_function(s)?,
            None => scheme.default_starts().into_iter().next().ok_or(CorpusError::NoStart)?,
        };
        Ok(extend(&Hierarchy::new(scheme, &start)?, self.steps)?)
    }

    /// Recomputes every verdict named in `expected`.
    pub fn evaluate(&self) -> Result<Verdicts, CorpusError> {
        let op = self.operator.to_operator()?;
        let registry = checks();
        let input = CheckInput { op: &op, function: None };
        let run = |want: Option<bool>, name: &str| -> Result<Option<bool>, CorpusError> {
            match want {
                Some(_) => Ok(Some(registry.get(name).expect("built-in check").run(&input)?.result)),
                None => Ok(None),
            }
        };
        let commuting = match self.expected.commuting {
            Some(_) => Some(bracket_report(&self.hierarchy()?.chain).pairwise_zero),
            None => None,
        };
        Ok(Verdicts {
            hereditary: run(self.expected.hereditary, "hereditary")?,
            integrable: run(self.expected.integrable, "integrable")?,
            integrable_pair: run(self.expected.integrable_pair, "integrable-pair")?,
            commuting,
        })
    }
}
