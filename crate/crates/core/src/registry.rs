//! Named, runtime-selectable operator checks and Lenard schemes.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::integrability::{
    is_hereditary, is_integrable_pair, is_integrable_wnl, Certificate, IntegrabilityError, Verdict,
};
use crate::lenard::{LenardError, LenardScheme, PairScheme, SymmetryScheme};
use crate::nonlocal::{lie_derivative, to_fraction, NonlocalError, NonlocalOp};
use crate::poly::DiffPoly;
use crate::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("the {0} check needs a function (--seed)")]
    MissingArgument(&'static str),
    #[error(transparent)]
    Integrability(#[from] IntegrabilityError),
    #[error(transparent)]
    Nonlocal(#[from] NonlocalError),
}

pub struct CheckInput<'a> {
    pub op: &'a NonlocalOp,
    pub function: Option<&'a DiffPoly>,
}

pub trait OperatorCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, input: &CheckInput) -> Result<Verdict, CheckError>;
}

pub trait SchemeFactory: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, op: &NonlocalOp) -> Result<Arc<dyn LenardScheme>, LenardError>;
}

/// Entries keyed by their name.
pub struct Registry<T: ?Sized> {
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Registry { entries: BTreeMap::new() }
    }
}

impl<T: ?Sized> Registry<T> {
    pub fn insert(&mut self, name: &'static str, entry: Box<T>) {
        self.entries.insert(name, entry);
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Registry<dyn OperatorCheck> {
    pub fn register(&mut self, check: Box<dyn OperatorCheck>) {
        self.insert(check.name(), check);
    }
}

impl Registry<dyn SchemeFactory> {
    pub fn register(&mut self, factory: Box<dyn SchemeFactory>) {
        self.insert(factory.name(), factory);
    }
}

struct Hereditary;
struct Integrable;
struct Recursion;
struct IntegrablePair;

impl OperatorCheck for Hereditary {
    fn name(&self) -> &'static str {
        "hereditary"
    }

    fn run(&self, input: &CheckInput) -> Result<Verdict, CheckError> {
        Ok(is_hereditary(input.op)?)
    }
}

impl OperatorCheck for Integrable {
    fn name(&self) -> &'static str {
        "integrable"
    }

    fn run(&self, input: &CheckInput) -> Result<Verdict, CheckError> {
        Ok(is_integrable_wnl(input.op)?)
    }
}

impl OperatorCheck for Recursion {
    fn name(&self) -> &'static str {
        "recursion"
    }

    fn run(&self, input: &CheckInput) -> Result<Verdict, CheckError> {
        let f = input.function.ok_or(CheckError::MissingArgument("recursion"))?;
        let r = lie_derivative(input.op, &RatFun::from_poly(f.clone()))?;
        let cert = Certificate::LieDerivative(r.to_string());
        Ok(if r.is_zero() { Verdict::yes(cert) } else { Verdict::no(cert) })
    }
}

/// Integrability of the pair `(A, B)` of `L = AB⁻¹`.
impl OperatorCheck for IntegrablePair {
    fn name(&self) -> &'static str {
        "integrable-pair"
    }

    fn run(&self, input: &CheckInput) -> Result<Verdict, CheckError> {
        let fr = to_fraction(input.op)?;
        Ok(is_integrable_pair(&fr.num, &fr.den)?)
    }
}

struct Symmetry;
struct Pair;

impl SchemeFactory for Symmetry {
    fn name(&self) -> &'static str {
        "symmetry"
    }

    fn build(&self, op: &NonlocalOp) -> Result<Arc<dyn LenardScheme>, LenardError> {
        Ok(Arc::new(SymmetryScheme { l: op.clone() }))
    }
}

impl SchemeFactory for Pair {
    fn name(&self) -> &'static str {
        "pair"
    }

    fn build(&self, op: &NonlocalOp) -> Result<Arc<dyn LenardScheme>, LenardError> {
        Ok(Arc::new(PairScheme::from_operator(op)?))
    }
}

pub fn checks() -> Registry<dyn OperatorCheck> {
    let mut r: Registry<dyn OperatorCheck> = Registry::default();
    r.register(Box::new(Hereditary));
    r.register(Box::new(Integrable));
    r.register(Box::new(Recursion));
    r.register(Box::new(IntegrablePair));
    r
}

pub fn schemes() -> Registry<dyn SchemeFactory> {
    let mut r: Registry<dyn SchemeFactory> = Registry::default();
    r.register(Box::new(Symmetry));
    r.register(Box::new(Pair));
    r
}
