//! Lenard-Magri iteration: hierarchies of commuting symmetries, their
//! order growth, powers of a recursion operator and conserved densities.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{integrate, is_total_derivative, potential, JetError};
use crate::diffop::{DiffOp, Side};
use crate::nonlocal::{nl_apply_poly, nl_mul, to_fraction, NonlocalError, NonlocalOp};
use crate::poly::{evo_apply, lie_bracket, DiffPoly};
use crate::ratfun::RatFun;

/// Reported alongside every chain started from `A(Ker B)` rather than `Ker B`.
pub const SEED_OFFSET_NOTE: &str = "chain starts at A(Ker B) = span of the p_i, one step after Ker B";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LenardError {
    /// A guarantee of the integrability theorems failed on this input.
    #[error("hypothesis violation at step {step}: {detail}")]
    HypothesisViolation { step: usize, detail: String },
    #[error("q_{index} = {q} of L^{k} is not a variational derivative")]
    NotVariational { k: usize, index: usize, q: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Nonlocal(#[from] NonlocalError),
}

impl LenardError {
    /// Whether the error refutes a hypothesis rather than signalling bad input.
    pub fn is_violation(&self) -> bool {
        matches!(self, LenardError::HypothesisViolation { .. } | LenardError::NotVariational { .. })
    }
}

fn violation(step: usize, e: NonlocalError) -> LenardError {
    match e {
        NonlocalError::NotInImage { index, product } => LenardError::HypothesisViolation {
            step,
            detail: format!("q_{index}*S_{step} = {product} is not a total derivative"),
        },
        NonlocalError::DepthOverflow => {
            LenardError::HypothesisViolation { step, detail: "product needs depth 3".into() }
        }
        other => LenardError::Nonlocal(other),
    }
}

fn laurent(f: &RatFun, what: &str) -> Result<DiffPoly, LenardError> {
    f.to_laurent().ok_or_else(|| LenardError::Unsupported(format!("{what} {f} is not polynomial")))
}

/// One way of producing `S_{n+1}` from the tip of a chain.
pub trait LenardScheme: Send + Sync {
    fn name(&self) -> &'static str;

    /// `(S₀, F₀)` for a user-supplied start.
    fn start(&self, start: &DiffPoly) -> Result<(DiffPoly, Option<DiffPoly>), LenardError>;

    /// Starts used when none is supplied.
    fn default_starts(&self) -> Vec<DiffPoly>;

    /// `(S_{n+1}, F_{n+1})` from `(S_n, F_n)`; `step` is `n` for reports.
    fn next(
        &self,
        s: &DiffPoly,
        f: Option<&DiffPoly>,
        step: usize,
    ) -> Result<(DiffPoly, Option<DiffPoly>), LenardError>;

    /// Order increment of one step.
    fn degree(&self) -> Option<i64>;

    /// Largest differential order among the coefficients of the scheme.
    fn threshold(&self) -> Option<u32>;
}

/// `S_{n+1} = L(S_n)`.
pub struct SymmetryScheme {
    pub l: NonlocalOp,
}

impl LenardScheme for SymmetryScheme {
    fn name(&self) -> &'static str {
        "symmetry"
    }

    fn start(&self, start: &DiffPoly) -> Result<(DiffPoly, Option<DiffPoly>), LenardError> {
        Ok((start.clone(), None))
    }

    fn default_starts(&self) -> Vec<DiffPoly> {
        seeds(&self.l)
    }

    fn next(
        &self,
        s: &DiffPoly,
        _: Option<&DiffPoly>,
        step: usize,
    ) -> Result<(DiffPoly, Option<DiffPoly>), LenardError> {
        let t = nl_apply_poly(&self.l, s).map_err(|e| violation(step, e))?;
        Ok((t, None))
    }

    fn degree(&self) -> Option<i64> {
        self.l.degree()
    }

    fn threshold(&self) -> Option<u32> {
        self.l.coefficient_order()
    }
}

/// `B(F_{n+1}) = A(F_n)` for `B = c∂`, solved by `F_{n+1} = ∫ A(F_n)/c`.
pub struct PairScheme {
    pub a: DiffOp,
    pub b: DiffOp,
}

impl PairScheme {
    pub fn new(a: DiffOp, b: DiffOp) -> Result<PairScheme, LenardError> {
        if b.degree() != Some(1) || !b.coeff(0).is_zero() {
            return Err(LenardError::Unsupported(format!("pair scheme needs B = c*D, got {b}")));
        }
        Ok(PairScheme { a, b })
    }

    /// The pair `(A, B)` of the minimal right fraction `L = AB⁻¹`.
    pub fn from_operator(l: &NonlocalOp) -> Result<PairScheme, LenardError> {
        let fr = to_fraction(l)?;
        debug_assert_eq!(fr.side, Side::Right);
        PairScheme::new(fr.num, fr.den)
    }

    fn symmetry(&self, f: &DiffPoly) -> Result<DiffPoly, LenardError> {
        laurent(&self.b.apply(&RatFun::from_poly(f.clone())), "B(F)")
    }
}

impl LenardScheme for PairScheme {
    fn name(&self) -> &'static str {
        "pair"
    }

    fn start(&self, start: &DiffPoly) -> Result<(DiffPoly, Option<DiffPoly>), LenardError> {
        Ok((self.symmetry(start)?, Some(start.clone())))
    }

    /// `Ker c∂` is the constants.
    fn default_starts(&self) -> Vec<DiffPoly> {
        vec![DiffPoly::one()]
    }

    fn next(
        &self,
        _: &DiffPoly,
        f: Option<&DiffPoly>,
        step: usize,
    ) -> Result<(DiffPoly, Option<DiffPoly>), LenardError> {
        let f = f.ok_or_else(|| LenardError::Unsupported("pair scheme without potential".into()))?;
        let rhs = &self.a.apply(&RatFun::from_poly(f.clone())) * &self.b.coeff(1).recip();
        let rhs = laurent(&rhs, "A(F)/c")?;
        let g = integrate(&rhs).map_err(|e| match e {
            JetError::NotExact(_) | JetError::NotSupported(_) => LenardError::HypothesisViolation {
                step,
                detail: format!("A(F_{step})/c = {rhs} is not a total derivative"),
            },
            other => LenardError::Unsupported(other.to_string()),
        })?;
        Ok((self.symmetry(&g)?, Some(g)))
    }

    fn degree(&self) -> Option<i64> {
        Some(self.a.degree()? as i64 - 1)
    }

    fn threshold(&self) -> Option<u32> {
        [self.a.coefficient_order(), self.b.coefficient_order()].into_iter().flatten().max()
    }
}

/// The `pᵢ` of `L = E + Σ pᵢ∂⁻¹qᵢ`, i.e. `A(Ker B)`; rational ones are skipped.
pub fn seeds(l: &NonlocalOp) -> Vec<DiffPoly> {
    l.ps().iter().filter_map(RatFun::to_laurent).collect()
}

/// A chain `S₀, S₁, …` with potentials when the scheme provides them.
#[derive(Clone)]
pub struct Hierarchy {
    scheme: Arc<dyn LenardScheme>,
    pub chain: Vec<DiffPoly>,
    pub potentials: Vec<DiffPoly>,
    pub orders: Vec<Option<u32>>,
    pub commuting: Option<bool>,
}

impl Hierarchy {
    pub fn new(scheme: Arc<dyn LenardScheme>, start: &DiffPoly) -> Result<Hierarchy, LenardError> {
        let (s, f) = scheme.start(start)?;
        Ok(Hierarchy {
            scheme,
            orders: vec![s.diff_order()],
            chain: vec![s],
            potentials: f.into_iter().collect(),
            commuting: None,
        })
    }

    pub fn scheme(&self) -> &dyn LenardScheme {
        self.scheme.as_ref()
    }

    pub fn tip(&self) -> &DiffPoly {
        self.chain.last().expect("a hierarchy is never empty")
    }

    pub fn to_json(&self, report: Option<&CommutingReport>) -> Value {
        json!({
            "scheme": self.scheme.name(),
            "chain": self.chain.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "potentials": self.potentials.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "orders": self.orders,
            "pairwise_zero": report.map(|r| r.pairwise_zero),
            "violations": report.map(|r| r.violations.clone()).unwrap_or_default(),
        })
    }
}

impl fmt::Debug for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hierarchy")
            .field("scheme", &self.scheme.name())
            .field("chain", &self.chain)
            .field("potentials", &self.potentials)
            .field("orders", &self.orders)
            .finish()
    }
}

/// Appends `steps` members. The chain is left unchanged on error.
pub fn extend(h: &Hierarchy, steps: usize) -> Result<Hierarchy, LenardError> {
    let mut out = h.clone();
    out.commuting = None;
    for _ in 0..steps {
        let n = out.chain.len() - 1;
        let (s, f) = out.scheme.next(out.tip(), out.potentials.last(), n)?;
        out.orders.push(s.diff_order());
        out.chain.push(s);
        out.potentials.extend(f);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketViolation {
    pub i: usize,
    pub j: usize,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutingReport {
    pub pairs_checked: usize,
    pub pairwise_zero: bool,
    pub violations: Vec<BracketViolation>,
}

/// All brackets `{Sᵢ, Sⱼ}`, `i < j`, computed in parallel.
pub fn bracket_report(chain: &[DiffPoly]) -> CommutingReport {
    let pairs: Vec<(usize, usize)> = (0..chain.len()).flat_map(|i| (i + 1..chain.len()).map(move |j| (i, j))).collect();
    let mut violations: Vec<BracketViolation> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let r = lie_bracket(&chain[i], &chain[j]);
            (!r.is_zero()).then(|| BracketViolation { i, j, residual: r.to_string() })
        })
        .collect();
    violations.sort_by_key(|v| (v.i, v.j));
    CommutingReport { pairs_checked: pairs.len(), pairwise_zero: violations.is_empty(), violations }
}

/// Checks the chain and records the outcome on it.
pub fn verify_commuting(h: &mut Hierarchy) -> CommutingReport {
    let r = bracket_report(&h.chain);
    h.commuting = Some(r.pairwise_zero);
    r
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub threshold: Option<u32>,
    pub degree: Option<i64>,
    pub orders: Vec<Option<u32>>,
    /// First index whose order exceeds the threshold.
    pub crossing: Option<usize>,
    /// Whether `d(S_{k+1}) = d(S_k) + deg L` for every `k` past the crossing.
    pub certified: bool,
    pub failures: Vec<usize>,
}

pub fn order_growth(h: &Hierarchy) -> OrderReport {
    let threshold = h.scheme.threshold();
    let degree = h.scheme.degree();
    let above = |o: &Option<u32>| match (o, threshold) {
        (Some(o), Some(m)) => *o > m,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let crossing = h.orders.iter().position(above);
    let mut failures = Vec::new();
    if let (Some(c), Some(d)) = (crossing, degree) {
        for k in c..h.orders.len().saturating_sub(1) {
            let expected = h.orders[k].map(|o| o as i64 + d);
            if h.orders[k + 1].map(|o| o as i64) != expected {
                failures.push(k);
            }
        }
    }
    let certified = crossing.is_some() && degree.is_some_and(|d| d > 0) && failures.is_empty();
    OrderReport { threshold, degree, orders: h.orders.clone(), crossing, certified, failures }
}

/// `L^k` by repeated multiplication; every intermediate power must stay
/// weakly non-local.
pub fn nl_power(l: &NonlocalOp, k: usize) -> Result<NonlocalOp, LenardError> {
    if k == 0 {
        return Ok(NonlocalOp::from_local(DiffOp::one()));
    }
    let mut acc = l.clone();
    for step in 2..=k {
        acc = nl_mul(&acc, l).map_err(|e| violation(step, e))?;
        if !acc.is_weakly_nonlocal() {
            return Err(LenardError::HypothesisViolation {
                step,
                detail: format!("L^{step} has depth-2 terms: {acc}"),
            });
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityRecord {
    pub k: usize,
    pub index: usize,
    pub q: String,
    pub rho: String,
    /// Chain indices `n` with `X_{S_n}(ρ)` a total derivative.
    pub verified_against: Vec<usize>,
    pub failed_against: Vec<usize>,
}

/// `ρ` with `δρ/δu = q` for every `q` of `L^k`, checked along `chain`.
pub fn conserved_densities(l: &NonlocalOp, k: usize, chain: &[DiffPoly]) -> Result<Vec<DensityRecord>, LenardError> {
    let lk = nl_power(l, k)?;
    let mut out = Vec::new();
    for (index, q) in lk.qs().iter().enumerate() {
        let qp = laurent(q, "q")?;
        let rho = potential(&qp).map_err(|e| match e {
            JetError::NotVariational(_) => LenardError::NotVariational { k, index, q: qp.to_string() },
            other => LenardError::Unsupported(other.to_string()),
        })?;
        let (verified_against, failed_against): (Vec<usize>, Vec<usize>) =
            (0..chain.len()).partition(|&n| is_total_derivative(&evo_apply(&chain[n], &rho)));
        out.push(DensityRecord { k, index, q: qp.to_string(), rho: rho.to_string(), verified_against, failed_against });
    }
    Ok(out)
}
