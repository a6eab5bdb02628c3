//! Exact integration, potentials of variational derivatives and the parity grading.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::frechet;
use crate::jet::{Indet, JetVar, Monomial};
use crate::poly::{q, variational_derivative, DiffPoly};
use crate::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("not a total derivative (residual {0})")]
    NotExact(DiffPoly),
    #[error("unsupported input: {0}")]
    NotSupported(String),
    #[error("{0} is not a variational derivative")]
    NotVariational(DiffPoly),
    #[error("internal verification failed: {0}")]
    VerificationFailed(String),
    #[error("no parity assigned to {0}")]
    Unassigned(Indet),
}

/// Finds `h` with `∂h = f` and zero constant term.
///
/// Works over every indeterminate present, peeling off the top-order jets one
/// at a time. Laurent inputs are accepted as long as no logarithm is needed.
pub fn integrate(f: &DiffPoly) -> Result<DiffPoly, JetError> {
    let mut rest = f.clone();
    let mut h = DiffPoly::zero();
    let mut level = (u32::MAX, 0usize);
    loop {
        if rest.is_zero() {
            return Ok(h);
        }
        let n = match rest.max_order() {
            Some(n) if n > 0 => n,
            _ => return Err(JetError::NotExact(rest)),
        };
        if level.0 == n {
            level.1 += 1;
            if level.1 > 2 * Indet::ALL.len() {
                return Err(JetError::NotExact(rest));
            }
        } else {
            level = (n, 1);
        }
        // the top-order part of a total derivative is linear in the top jets
        let mut top: Option<JetVar> = None;
        for (m, _) in rest.terms() {
            let mut seen = 0;
            for &(v, e) in m.factors() {
                if v.order == n {
                    if e != 1 {
                        return Err(JetError::NotExact(rest.clone()));
                    }
                    seen += 1;
                    top = Some(top.map_or(v, |t| t.min(v)));
                }
            }
            if seen > 1 {
                return Err(JetError::NotExact(rest.clone()));
            }
        }
        let w = top.expect("max order attained");
        let v = w.prev().expect("order is positive");
        let mut hp = DiffPoly::zero();
        for (m, c) in rest.terms() {
            if m.exponent(w) != 1 {
                continue;
            }
            let m = m.mul_var(w, -1);
            let e = m.exponent(v);
            if e == -1 {
                return Err(JetError::NotSupported(format!("integrating {} needs a logarithm", rest)));
            }
            hp.add_term(m.mul_var(v, 1), c / q(e as i64 + 1));
        }
        rest -= &hp.derivative();
        h += &hp;
    }
}

/// Whether `f` is a total derivative of a polynomial.
pub fn is_total_derivative(f: &DiffPoly) -> bool {
    integrate(f).is_ok()
}

/// A density `ρ` with `δρ/δu = q`, by the homotopy formula.
pub fn potential(qf: &DiffPoly) -> Result<DiffPoly, JetError> {
    if qf.has_negative_exponents() || !qf.only_indet(Indet::U) {
        return Err(JetError::NotSupported(format!("potential of {qf}")));
    }
    let d = frechet(&RatFun::from_poly(qf.clone()));
    if d != d.adjoint() {
        return Err(JetError::NotVariational(qf.clone()));
    }
    let u = Monomial::var(JetVar::u(0));
    let mut rho = DiffPoly::zero();
    for (m, c) in qf.terms() {
        rho.add_term(m.mul(&u), c / q(m.degree() + 1));
    }
    let c0 = rho.constant_term();
    if !c0.is_zero() {
        rho -= &DiffPoly::constant(c0);
    }
    if variational_derivative(&rho) != *qf {
        return Err(JetError::VerificationFailed(format!("homotopy potential of {qf}")));
    }
    Ok(rho)
}

/// Homogeneity under a ℤ/2 grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    fn from_bit(b: i64) -> Parity {
        if b.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn bit(self) -> Option<i64> {
        match self {
            Parity::Even => Some(0),
            Parity::Odd => Some(1),
            Parity::Mixed => None,
        }
    }

    /// Parity of a product.
    pub fn plus(self, other: Parity) -> Parity {
        match (self.bit(), other.bit()) {
            (Some(a), Some(b)) => Parity::from_bit(a + b),
            _ => Parity::Mixed,
        }
    }

    /// Parity after `k` applications of ∂.
    pub fn shift(self, k: usize) -> Parity {
        self.plus(Parity::from_bit(k as i64))
    }
}

/// Parity assignment for the base of each indeterminate; ∂ flips parity.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Grading {
    base: BTreeMap<Indet, bool>,
}

impl Grading {
    /// Grading with `u` even (`odd = false`) or odd.
    pub fn with_u(odd: bool) -> Grading {
        let mut g = Grading::default();
        g.assign(Indet::U, odd);
        g
    }

    pub fn assign(&mut self, w: Indet, odd: bool) {
        self.base.insert(w, odd);
    }

    pub fn u_is_odd(&self) -> Option<bool> {
        self.base.get(&Indet::U).copied()
    }

    fn var_bit(&self, v: JetVar) -> Result<i64, JetError> {
        let base = *self.base.get(&v.indet).ok_or(JetError::Unassigned(v.indet))?;
        Ok(base as i64 + v.order as i64)
    }

    pub fn parity_of(&self, f: &DiffPoly) -> Result<Parity, JetError> {
        let mut out: Option<Parity> = None;
        for (m, _) in f.terms() {
            let mut bit = 0i64;
            for &(v, e) in m.factors() {
                bit += e as i64 * self.var_bit(v)?;
            }
            let p = Parity::from_bit(bit);
            out = match out {
                None => Some(p),
                Some(prev) if prev == p => Some(p),
                Some(_) => Some(Parity::Mixed),
            };
        }
        Ok(out.unwrap_or(Parity::Even))
    }

    pub fn parity_of_ratfun(&self, f: &RatFun) -> Result<Parity, JetError> {
        if f.is_zero() {
            return Ok(Parity::Even);
        }
        Ok(self.parity_of(f.num())?.plus(self.parity_of(f.den())?))
    }
}
