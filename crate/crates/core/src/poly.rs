//! Differential polynomials: Laurent polynomials over ℚ in jet variables.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::jet::{Indet, JetVar, Monomial};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// A differential polynomial in canonical form: no zero coefficients,
/// monomials keyed in graded-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Q>,
}

impl DiffPoly {
    pub fn zero() -> DiffPoly {
        DiffPoly::default()
    }

    pub fn one() -> DiffPoly {
        DiffPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> DiffPoly {
        DiffPoly::monomial(Monomial::one(), c)
    }

    pub fn int(n: i64) -> DiffPoly {
        DiffPoly::constant(q(n))
    }

    pub fn monomial(m: Monomial, c: Q) -> DiffPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn var(v: JetVar) -> DiffPoly {
        DiffPoly::monomial(Monomial::var(v), Q::one())
    }

    /// The jet `u^(n)`.
    pub fn u(n: u32) -> DiffPoly {
        DiffPoly::var(JetVar::u(n))
    }

    /// The jet `w^(n)` of an arbitrary indeterminate.
    pub fn jet(w: Indet, n: u32) -> DiffPoly {
        DiffPoly::var(w.jet(n))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> DiffPoly {
        let mut p = DiffPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    /// Largest term in the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn as_monomial(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> DiffPoly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    pub fn vars(&self) -> BTreeSet<JetVar> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn contains_indet(&self, w: Indet) -> bool {
        self.terms.keys().any(|m| m.vars().any(|v| v.indet == w))
    }

    pub fn only_indet(&self, w: Indet) -> bool {
        self.terms.keys().all(|m| m.vars().all(|v| v.indet == w))
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|m| m.has_negative())
    }

    /// Highest jet order of `w` present, if any.
    pub fn max_order_of(&self, w: Indet) -> Option<u32> {
        self.terms.keys().flat_map(|m| m.vars()).filter(|v| v.indet == w).map(|v| v.order).max()
    }

    /// Highest jet order over all indeterminates.
    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order()).max()
    }

    /// Differential order in `u`; `None` for quasiconstants.
    pub fn diff_order(&self) -> Option<u32> {
        self.max_order_of(Indet::U)
    }

    /// Componentwise minimum of exponents over all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Monomial::one() };
        it.fold(first.clone(), |acc, m| acc.min_with(m))
    }

    /// The total derivative ∂.
    pub fn derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for &(v, e) in m.factors() {
                let dm = m.mul_var(v, -1).mul_var(v.next(), 1);
                out.add_term(dm, c * q(e as i64));
            }
        }
        out
    }

    pub fn nth_derivative(&self, k: usize) -> DiffPoly {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.derivative();
        }
        out
    }

    /// `[self, ∂self, …, ∂^k self]`.
    pub fn derivatives(&self, k: usize) -> Vec<DiffPoly> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.clone());
        for i in 0..k {
            let next = out[i].derivative();
            out.push(next);
        }
        out
    }

    /// The partial derivative ∂/∂v (Laurent power rule).
    pub fn partial(&self, v: JetVar) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e != 0 {
                out.add_term(m.mul_var(v, -1), c * q(e as i64));
            }
        }
        out
    }

    /// Splits into powers of `v`: exponent → coefficient free of `v`.
    pub fn coefficients_in(&self, v: JetVar) -> BTreeMap<i32, DiffPoly> {
        let mut out: BTreeMap<i32, DiffPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_var(v);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    pub fn degree_in(&self, v: JetVar) -> i32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Terms sorted for printing: ascending degree, larger top jets first.
    fn print_order(&self) -> Vec<(&Monomial, &Q)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by_key(|(m, _)| (m.degree(), Reverse(*m)));
        ts
    }
}

/// The evolutionary vector field `X_F(g) = Σ ∂ⁿ(F) ∂g/∂u^(n)`.
pub fn evo_apply(f: &DiffPoly, g: &DiffPoly) -> DiffPoly {
    let Some(top) = g.max_order_of(Indet::U) else { return DiffPoly::zero() };
    let ders = f.derivatives(top as usize);
    let mut out = DiffPoly::zero();
    for (n, d) in ders.iter().enumerate() {
        let p = g.partial(JetVar::u(n as u32));
        if !p.is_zero() {
            out += &(d * &p);
        }
    }
    out
}

/// `{F, G} = X_F(G) − X_G(F)`.
pub fn lie_bracket(f: &DiffPoly, g: &DiffPoly) -> DiffPoly {
    &evo_apply(f, g) - &evo_apply(g, f)
}

/// Euler operator `Σ (−∂)ⁿ ∂f/∂w^(n)` for the indeterminate `w`.
pub fn euler(f: &DiffPoly, w: Indet) -> DiffPoly {
    let Some(top) = f.max_order_of(w) else { return DiffPoly::zero() };
    let mut out = DiffPoly::zero();
    for n in (0..=top).rev() {
        // Horner form: out = ∂f/∂w^(n) − ∂(out)
        out = &f.partial(w.jet(n)) - &out.derivative();
    }
    out
}

/// `δ/δu`.
pub fn variational_derivative(f: &DiffPoly) -> DiffPoly {
    euler(f, Indet::U)
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<DiffPoly> for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&DiffPoly> for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: &DiffPoly) -> DiffPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<DiffPoly> for &DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly {
                self.$m(&rhs)
            }
        }
    };
}

impl Add<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, a) in &self.terms {
            for (n, b) in &rhs.terms {
                out.add_term(m.mul(n), a * b);
            }
        }
        out
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl From<Q> for DiffPoly {
    fn from(c: Q) -> DiffPoly {
        DiffPoly::constant(c)
    }
}

impl From<i64> for DiffPoly {
    fn from(n: i64) -> DiffPoly {
        DiffPoly::int(n)
    }
}

pub(crate) fn fmt_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.print_order().into_iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                f.write_str(&fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u32) -> DiffPoly {
        DiffPoly::u(n)
    }

    #[test]
    fn test_total_derivative_examples() {
        assert_eq!(u(0).derivative(), u(1));
        assert_eq!((&u(0) * &u(0)).derivative(), DiffPoly::int(2) * &u(0) * &u(1));
        assert_eq!((&u(0) * &u(1)).derivative(), &u(1) * &u(1) + &u(0) * &u(2));
        assert!(DiffPoly::int(7).derivative().is_zero());
    }

    #[test]
    fn test_laurent_partial() {
        let inv = DiffPoly::monomial(Monomial::var_pow(JetVar::u(3), -1), Q::one());
        let expected = DiffPoly::monomial(Monomial::var_pow(JetVar::u(3), -2), q(-1));
        assert_eq!(inv.partial(JetVar::u(3)), expected);
    }

    #[test]
    fn test_bracket_examples() {
        // {u', u^2} = 2uu' - 2uu' = 0 ; {u, u^2} = u^2
        let u2 = &u(0) * &u(0);
        assert!(lie_bracket(&u(1), &u2).is_zero());
        assert_eq!(lie_bracket(&u(0), &u2), u2);
    }

    #[test]
    fn test_variational_examples() {
        let f = &u(0) * &u(1);
        assert!(variational_derivative(&f).is_zero());
        let g = (&u(0) * &u(0)).scale(&q_frac(1, 2));
        assert_eq!(variational_derivative(&g), u(0));
        // δ(u'^2/2) = -u''
        let h = (&u(1) * &u(1)).scale(&q_frac(1, 2));
        assert_eq!(variational_derivative(&h), -u(2));
    }

    #[test]
    fn test_display_order() {
        let s1 = u(3) + (&u(0) * &u(1)).scale(&q(3));
        assert_eq!(s1.to_string(), "u''' + 3*u*u'");
        let s2 = u(5)
            + (&u(0) * &u(3)).scale(&q(5))
            + (&u(1) * &u(2)).scale(&q(10))
            + (&u(0) * &u(0) * &u(1)).scale(&q_frac(15, 2));
        assert_eq!(s2.to_string(), "u(5) + 5*u*u''' + 10*u'*u'' + 15/2*u^2*u'");
        assert_eq!((-u(0)).to_string(), "-u");
        assert_eq!(DiffPoly::zero().to_string(), "0");
    }
}
