//! Weakly non-local operators `E + Σ pᵢ∂⁻¹qᵢ` and the depth-2 extension
//! `… + Σ a∂⁻¹b∂⁻¹c` in which the hereditary identities live.

mod raw;
mod series;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{integrate, Grading, JetError, Parity};
use crate::diffop::{frechet, DiffOp, FractionPair};
use crate::poly::{DiffPoly, Q};
use crate::ratfun::RatFun;

pub(crate) use raw::Raw;
pub use series::{series_expand, Series};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NonlocalError {
    #[error("product needs depth 3")]
    DepthOverflow,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("q_{index}*f = {product} is not a total derivative")]
    NotInImage { index: usize, product: String },
    #[error("fraction check failed: {0}")]
    FractionMismatch(String),
}

/// Canonical form: the `q`'s (and the `c`'s of each depth-2 group) form a
/// reduced echelon basis of their span, the `p`'s are then determined and
/// independent; depth-2 middles are independent modulo total derivatives.
#[derive(Clone, Default)]
pub struct NonlocalOp {
    local: DiffOp,
    depth1: Vec<(RatFun, RatFun)>,
    depth2: Vec<(RatFun, RatFun, RatFun)>,
}

impl NonlocalOp {
    pub fn zero() -> NonlocalOp {
        NonlocalOp::default()
    }

    pub fn from_local(op: DiffOp) -> NonlocalOp {
        NonlocalOp { local: op, ..Default::default() }
    }

    /// Canonicalizes `E + Σ pᵢ∂⁻¹qᵢ`.
    pub fn new(local: DiffOp, depth1: Vec<(RatFun, RatFun)>) -> NonlocalOp {
        let words = depth1.into_iter().map(|(p, q)| vec![p, q]).collect();
        raw::canonicalize(Raw { local, words }).expect("depth-1 input always canonicalizes")
    }

    /// Canonicalizes a sum including depth-2 terms.
    pub fn with_depth2(
        local: DiffOp,
        depth1: Vec<(RatFun, RatFun)>,
        depth2: Vec<(RatFun, RatFun, RatFun)>,
    ) -> Result<NonlocalOp, NonlocalError> {
        let mut words: Vec<Vec<RatFun>> = depth1.into_iter().map(|(p, q)| vec![p, q]).collect();
        words.extend(depth2.into_iter().map(|(a, b, c)| vec![a, b, c]));
        raw::canonicalize(Raw { local, words })
    }

    pub fn local(&self) -> &DiffOp {
        &self.local
    }

    pub fn depth1(&self) -> &[(RatFun, RatFun)] {
        &self.depth1
    }

    pub fn depth2(&self) -> &[(RatFun, RatFun, RatFun)] {
        &self.depth2
    }

    pub fn is_weakly_nonlocal(&self) -> bool {
        self.depth2.is_empty()
    }

    pub fn is_local(&self) -> bool {
        self.depth1.is_empty() && self.depth2.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.local.is_zero() && self.is_local()
    }

    pub fn ps(&self) -> Vec<RatFun> {
        self.depth1.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn qs(&self) -> Vec<RatFun> {
        self.depth1.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn add(&self, other: &NonlocalOp) -> Result<NonlocalOp, NonlocalError> {
        let mut r = Raw::from_op(self);
        r.add(Raw::from_op(other));
        raw::canonicalize(r)
    }

    pub fn sub(&self, other: &NonlocalOp) -> Result<NonlocalOp, NonlocalError> {
        let mut r = Raw::from_op(self);
        r.add(Raw::from_op(other).neg());
        raw::canonicalize(r)
    }

    pub fn scale(&self, c: &Q) -> NonlocalOp {
        NonlocalOp {
            local: self.local.scale(c),
            depth1: self.depth1.iter().map(|(p, q)| (p.scale(c), q.clone())).filter(|(p, _)| !p.is_zero()).collect(),
            depth2: self
                .depth2
                .iter()
                .map(|(a, b, c2)| (a.scale(c), b.clone(), c2.clone()))
                .filter(|(a, _, _)| !a.is_zero())
                .collect(),
        }
    }

    /// `X_F` applied to every coefficient; `X_F` commutes with `∂` and `∂⁻¹`.
    pub fn evo(&self, f: &RatFun) -> NonlocalOp {
        raw::canonicalize(Raw::from_op(self).map_derivation(|c| c.evo(f))).expect("same shape as a canonical input")
    }

    /// Degree: `deg E`, else `−1` with a nonlocal part (`−2` for depth 2 only);
    /// `None` for the zero operator.
    pub fn degree(&self) -> Option<i64> {
        if let Some(d) = self.local.degree() {
            return Some(d as i64);
        }
        if !self.depth1.is_empty() {
            Some(-1)
        } else if !self.depth2.is_empty() {
            Some(-2)
        } else {
            None
        }
    }

    /// Largest differential order among the coefficients of `E` and the `pᵢ`, `qᵢ`.
    pub fn coefficient_order(&self) -> Option<u32> {
        let mut m = self.local.coefficient_order();
        for (p, q) in &self.depth1 {
            m = m.max(p.diff_order()).max(q.diff_order());
        }
        m
    }
}

/// Exact product; fails only if a depth-3 term survives.
pub fn nl_mul(a: &NonlocalOp, b: &NonlocalOp) -> Result<NonlocalOp, NonlocalError> {
    raw::canonicalize(Raw::from_op(a).mul(&Raw::from_op(b)))
}

pub(crate) fn canonicalize_raw(r: Raw) -> Result<NonlocalOp, NonlocalError> {
    raw::canonicalize(r)
}

pub fn nl_degree(l: &NonlocalOp) -> Option<i64> {
    l.degree()
}

/// `L(f) = E(f) + Σ pᵢ ∫ qᵢ f`, defined when every `qᵢ f` is a total derivative.
pub fn nl_apply(l: &NonlocalOp, f: &RatFun) -> Result<RatFun, NonlocalError> {
    if !l.is_weakly_nonlocal() {
        return Err(NonlocalError::Unsupported("application of a depth-2 operator".into()));
    }
    let mut out = l.local.apply(f);
    for (i, (p, q)) in l.depth1.iter().enumerate() {
        let prod = q * f;
        let lp = prod
            .to_laurent()
            .ok_or_else(|| NonlocalError::Unsupported(format!("integrating the rational function {prod}")))?;
        let h = integrate(&lp).map_err(|e| match e {
            JetError::NotExact(_) | JetError::NotSupported(_) => {
                NonlocalError::NotInImage { index: i, product: lp.to_string() }
            }
            other => NonlocalError::Unsupported(other.to_string()),
        })?;
        out += &(p * &RatFun::from_poly(h));
    }
    Ok(out)
}

/// Polynomial convenience wrapper around [`nl_apply`].
pub fn nl_apply_poly(l: &NonlocalOp, f: &DiffPoly) -> Result<DiffPoly, NonlocalError> {
    let r = nl_apply(l, &RatFun::from_poly(f.clone()))?;
    r.to_laurent().ok_or_else(|| NonlocalError::Unsupported(format!("result {r} is not polynomial")))
}

/// `ℒ_F(L) = X_F(L) − [D_F, L]`.
pub fn lie_derivative(l: &NonlocalOp, f: &RatFun) -> Result<NonlocalOp, NonlocalError> {
    let df = Raw { local: frechet(f), words: Vec::new() };
    let lr = Raw::from_op(l);
    let mut r = lr.map_derivation(|c| c.evo(f));
    r.add(df.mul(&lr).neg());
    r.add(lr.mul(&df));
    raw::canonicalize(r)
}

pub fn is_recursion_for(l: &NonlocalOp, f: &RatFun) -> bool {
    lie_derivative(l, f).expect("depth-1 operators stay at depth 1").is_zero()
}

/// `L = A B⁻¹` with `B` a right lcm of the `(1/qᵢ)∂` and `A = EB + Σ pᵢMᵢ`.
/// The result is checked exactly: `L·B = A`.
pub fn to_fraction(l: &NonlocalOp) -> Result<FractionPair, NonlocalError> {
    if !l.is_weakly_nonlocal() {
        return Err(NonlocalError::Unsupported("fraction of a depth-2 operator".into()));
    }
    let mut b = DiffOp::one();
    let mut ms: Vec<DiffOp> = Vec::new();
    for (_, q) in &l.depth1 {
        let k = DiffOp::monomial(q.recip(), 1);
        if ms.is_empty() {
            b = k;
            ms.push(DiffOp::one());
            continue;
        }
        let (lcm, c, d) = b.right_lcm(&k).map_err(|e| NonlocalError::Unsupported(e.to_string()))?;
        for m in ms.iter_mut() {
            *m = m.mul_op(&c);
        }
        ms.push(d);
        b = lcm;
    }
    let mut a = l.local.mul_op(&b);
    for ((p, _), m) in l.depth1.iter().zip(&ms) {
        a = &a + &DiffOp::scalar(p.clone()).mul_op(m);
    }
    let check = nl_mul(l, &NonlocalOp::from_local(b.clone()))?;
    if !check.is_local() || check.local != a {
        return Err(NonlocalError::FractionMismatch(format!("L*B = {check}, A = {a}")));
    }
    Ok(FractionPair::right(a, b))
}

/// Membership in `(V[∂])₀̄ + V₁̄∂⁻¹V₀̄` and in the variant with the parities
/// of the `p`'s and `q`'s switched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityClass {
    pub member: bool,
    pub switched_member: bool,
    pub local: Parity,
    pub p: Vec<Parity>,
    pub q: Vec<Parity>,
}

pub fn op_parity(op: &DiffOp, g: &Grading) -> Result<Parity, JetError> {
    let mut out: Option<Parity> = None;
    for (k, c) in op.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let p = g.parity_of_ratfun(c)?.shift(k);
        out = Some(match out {
            None => p,
            Some(prev) if prev == p => p,
            Some(_) => Parity::Mixed,
        });
    }
    Ok(out.unwrap_or(Parity::Even))
}

pub fn parity_class(l: &NonlocalOp, g: &Grading) -> Result<ParityClass, JetError> {
    let local = op_parity(&l.local, g)?;
    let p = l.depth1.iter().map(|(p, _)| g.parity_of_ratfun(p)).collect::<Result<Vec<_>, _>>()?;
    let q = l.depth1.iter().map(|(_, q)| g.parity_of_ratfun(q)).collect::<Result<Vec<_>, _>>()?;
    let base = local == Parity::Even && l.is_weakly_nonlocal();
    let all = |v: &[Parity], want: Parity| v.iter().all(|&x| x == want);
    Ok(ParityClass {
        member: base && all(&p, Parity::Odd) && all(&q, Parity::Even),
        switched_member: base && all(&p, Parity::Even) && all(&q, Parity::Odd),
        local,
        p,
        q,
    })
}

impl PartialEq for NonlocalOp {
    fn eq(&self, other: &NonlocalOp) -> bool {
        if self.local == other.local && self.depth1 == other.depth1 && self.depth2 == other.depth2 {
            return true;
        }
        self.sub(other).is_ok_and(|d| d.is_zero())
    }
}

fn slot(f: &RatFun) -> String {
    let s = f.to_string();
    let simple = f.to_laurent().is_some_and(|l| l.len() == 1) && !s.starts_with('-');
    if simple {
        s
    } else {
        format!("({s})")
    }
}

impl fmt::Display for NonlocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.local.is_zero() {
            parts.push(self.local.to_string());
        }
        for (p, q) in &self.depth1 {
            parts.push(format!("{}*D^-1*{}", slot(p), slot(q)));
        }
        for (a, b, c) in &self.depth2 {
            parts.push(format!("{}*D^-1*{}*D^-1*{}", slot(a), slot(b), slot(c)));
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for NonlocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NonlocalOp({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, q_frac};

    fn u(n: u32) -> RatFun {
        RatFun::u(n)
    }

    pub(crate) fn kdv() -> NonlocalOp {
        let local = DiffOp::from_coeffs(vec![u(0).scale(&q(2)), RatFun::zero(), RatFun::one()]);
        NonlocalOp::new(local, vec![(u(1), RatFun::one())])
    }

    fn counterexample() -> NonlocalOp {
        // ∂⁻¹u″∂ built as a product
        let inv = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(2))]);
        nl_mul(&inv, &NonlocalOp::from_local(DiffOp::d())).unwrap()
    }

    fn s1() -> RatFun {
        &u(3) + &(&u(0) * &u(1)).scale(&q(3))
    }

    #[test]
    fn test_canonical_examples() {
        let l = NonlocalOp::new(DiffOp::zero(), vec![(u(1), RatFun::one()), (u(1), RatFun::one())]);
        assert_eq!(l.depth1(), &[(u(1).scale(&q(2)), RatFun::one())]);
        let c = counterexample();
        assert_eq!(c.local(), &DiffOp::scalar(u(2)));
        assert_eq!(c.depth1(), &[(RatFun::int(-1), u(3))]);
    }

    #[test]
    fn test_depth2_rewrite() {
        // a∂⁻¹u′∂⁻¹c = a·u·∂⁻¹c − a∂⁻¹(u·c)
        let a = u(2);
        let c = &u(0) + &RatFun::one();
        let l = NonlocalOp::with_depth2(DiffOp::zero(), vec![], vec![(a.clone(), u(1), c.clone())]).unwrap();
        assert!(l.is_weakly_nonlocal());
        let expected = NonlocalOp::new(DiffOp::zero(), vec![(&a * &u(0), c.clone()), (-&a, &u(0) * &c)]);
        assert_eq!(l, expected);
        let kept = NonlocalOp::with_depth2(DiffOp::zero(), vec![], vec![(a, u(0), c)]).unwrap();
        assert_eq!(kept.depth2().len(), 1);
    }

    #[test]
    fn test_products() {
        let d = NonlocalOp::from_local(DiffOp::d());
        let inv_q = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(0))]);
        assert_eq!(nl_mul(&d, &inv_q).unwrap(), NonlocalOp::from_local(DiffOp::scalar(u(0))));
        let l2 = nl_mul(&kdv(), &kdv()).unwrap();
        assert!(l2.is_weakly_nonlocal());
        assert_eq!(l2.qs(), vec![RatFun::one(), u(0)]);
        // ∂⁻¹u‴ · ∂⁻¹u‴ clears its exact middle
        let x = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(3))]);
        assert!(nl_mul(&x, &x).unwrap().is_weakly_nonlocal());
    }

    #[test]
    fn test_apply_examples() {
        let l = kdv();
        assert_eq!(nl_apply(&l, &u(1)).unwrap(), s1());
        let s2 = &(&(&u(5) + &(&u(0) * &u(3)).scale(&q(5))) + &(&u(1) * &u(2)).scale(&q(10)))
            + &(&(&u(0) * &u(0)) * &u(1)).scale(&q_frac(15, 2));
        assert_eq!(nl_apply(&l, &s1()).unwrap(), s2);
        let lu = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(0))]);
        assert!(matches!(nl_apply(&lu, &u(0)), Err(NonlocalError::NotInImage { index: 0, .. })));
    }

    #[test]
    fn test_recursion_examples() {
        assert!(is_recursion_for(&kdv(), &s1()));
        let c = counterexample();
        assert!(is_recursion_for(&c, &u(1)));
        assert!(is_recursion_for(&c, &RatFun::one()));
        assert!(!is_recursion_for(&c, &u(2)));
        assert!(is_recursion_for(&c, &RatFun::zero()));
    }

    #[test]
    fn test_fraction_examples() {
        let fr = to_fraction(&kdv()).unwrap();
        assert_eq!(fr.den, DiffOp::d());
        assert_eq!(fr.num, DiffOp::from_coeffs(vec![u(1), u(0).scale(&q(2)), RatFun::zero(), RatFun::one()]));
        let fr = to_fraction(&counterexample()).unwrap();
        assert_eq!(fr.den, DiffOp::monomial(u(3).recip(), 1));
        assert_eq!(fr.num, DiffOp::from_coeffs(vec![RatFun::int(-1), &u(2) / &u(3)]));
        let e = DiffOp::from_coeffs(vec![u(0), RatFun::one()]);
        let fr = to_fraction(&NonlocalOp::from_local(e.clone())).unwrap();
        assert_eq!((fr.num, fr.den), (e, DiffOp::one()));
        let l2 = nl_mul(&kdv(), &kdv()).unwrap();
        let fr = to_fraction(&l2).unwrap();
        assert_eq!(fr.den.degree(), Some(2));
    }

    #[test]
    fn test_parity_examples() {
        let even = Grading::with_u(false);
        let odd = Grading::with_u(true);
        assert!(parity_class(&kdv(), &even).unwrap().member);
        assert!(!parity_class(&kdv(), &odd).unwrap().member);
        let pb = NonlocalOp::from_local(DiffOp::from_coeffs(vec![u(1), RatFun::one()]));
        assert!(!parity_class(&pb, &even).unwrap().member);
        assert!(!parity_class(&pb, &odd).unwrap().member);
    }

    #[test]
    fn test_degree_examples() {
        assert_eq!(nl_degree(&kdv()), Some(2));
        assert_eq!(nl_degree(&NonlocalOp::new(DiffOp::zero(), vec![(u(1), RatFun::one())])), Some(-1));
        assert_eq!(nl_degree(&NonlocalOp::zero()), None);
    }

    #[test]
    fn test_display() {
        assert_eq!(kdv().to_string(), "D^2 + 2*u + u'*D^-1*1");
    }
}
