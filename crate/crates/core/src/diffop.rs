//! Differential operators `Σ a_k ∂^k` over rational functions, with `∂a = a∂ + a′`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::bidiff::BiDiffOp;
use crate::jet::{Indet, JetVar};
use crate::linalg::independent;
use crate::poly::Q;
use crate::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffOpError {
    #[error("kernel functions are linearly dependent over the constants")]
    DependentInput,
    #[error("operation needs a nonzero operator")]
    ZeroOperator,
}

/// Binomial coefficient `C(n, k)` for `n ≥ 0`.
pub(crate) fn binom(n: usize, k: usize) -> Q {
    gbinom(n as i64, k)
}

/// Generalised binomial `n(n−1)…(n−k+1)/k!` for any integer `n`.
pub(crate) fn gbinom(n: i64, k: usize) -> Q {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k as i64 {
        num *= n - i;
        den *= i + 1;
    }
    Q::new(num, den)
}

/// A differential operator; `coeffs[k]` multiplies `∂^k`. No trailing zeros.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DiffOp {
    coeffs: Vec<RatFun>,
}

impl DiffOp {
    pub fn zero() -> DiffOp {
        DiffOp::default()
    }

    pub fn one() -> DiffOp {
        DiffOp::scalar(RatFun::one())
    }

    /// The operator ∂.
    pub fn d() -> DiffOp {
        DiffOp::monomial(RatFun::one(), 1)
    }

    pub fn scalar(a: RatFun) -> DiffOp {
        DiffOp::monomial(a, 0)
    }

    /// `a ∂^k`.
    pub fn monomial(a: RatFun, k: usize) -> DiffOp {
        let mut coeffs = vec![RatFun::zero(); k + 1];
        coeffs[k] = a;
        DiffOp::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<RatFun>) -> DiffOp {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DiffOp { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in ∂; `None` for the zero operator.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> RatFun {
        self.coeffs.get(k).cloned().unwrap_or_else(RatFun::zero)
    }

    pub fn leading(&self) -> Option<&RatFun> {
        self.coeffs.last()
    }

    pub fn as_scalar(&self) -> Option<RatFun> {
        match self.coeffs.len() {
            0 => Some(RatFun::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn contains_indet(&self, w: Indet) -> bool {
        self.coeffs.iter().any(|c| c.contains_indet(w))
    }

    /// Largest differential order (in `u`) among the coefficients.
    pub fn coefficient_order(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|c| c.diff_order()).max()
    }

    /// `a · self` for a function `a` acting by left multiplication.
    pub fn left_scale(&self, a: &RatFun) -> DiffOp {
        DiffOp::from_coeffs(self.coeffs.iter().map(|c| a * c).collect())
    }

    pub fn scale(&self, c: &Q) -> DiffOp {
        DiffOp::from_coeffs(self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    /// `self · a`: right multiplication by a function.
    pub fn right_scale(&self, a: &RatFun) -> DiffOp {
        self * &DiffOp::scalar(a.clone())
    }

    fn add_at(coeffs: &mut Vec<RatFun>, k: usize, a: &RatFun) {
        if coeffs.len() <= k {
            coeffs.resize(k + 1, RatFun::zero());
        }
        coeffs[k] += a;
    }

    pub fn mul_op(&self, rhs: &DiffOp) -> DiffOp {
        if self.is_zero() || rhs.is_zero() {
            return DiffOp::zero();
        }
        let top = self.coeffs.len() - 1;
        if top == 0 {
            return rhs.left_scale(&self.coeffs[0]);
        }
        let ders: Vec<Vec<RatFun>> = rhs.coeffs.iter().map(|b| b.derivatives(top)).collect();
        let mut out = vec![RatFun::zero(); top + rhs.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for n in 0..=i {
                let c = binom(i, n);
                for (j, db) in ders.iter().enumerate() {
                    let b = &db[n];
                    if b.is_zero() {
                        continue;
                    }
                    DiffOp::add_at(&mut out, i + j - n, &(a * b).scale(&c));
                }
            }
        }
        DiffOp::from_coeffs(out)
    }

    /// `A(f) = Σ a_k ∂^k f`.
    pub fn apply(&self, f: &RatFun) -> RatFun {
        let Some(top) = self.degree() else { return RatFun::zero() };
        let ders = f.derivatives(top);
        let mut acc = RatFun::zero();
        for (a, d) in self.coeffs.iter().zip(&ders) {
            if !a.is_zero() && !d.is_zero() {
                acc += &(a * d);
            }
        }
        acc
    }

    /// The formal adjoint: `(Σ a_k ∂^k)* = Σ (−∂)^k ∘ a_k`.
    pub fn adjoint(&self) -> DiffOp {
        let mut out: Vec<RatFun> = Vec::new();
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ders = a.derivatives(k);
            let sign = if k % 2 == 0 { Q::one() } else { -Q::one() };
            for (n, d) in ders.iter().enumerate() {
                let c = &binom(k, n) * &sign;
                DiffOp::add_at(&mut out, k - n, &d.scale(&c));
            }
        }
        DiffOp::from_coeffs(out)
    }

    /// `X_F(A)`, acting on the coefficients.
    pub fn evo(&self, f: &RatFun) -> DiffOp {
        DiffOp::from_coeffs(self.coeffs.iter().map(|a| a.evo(f)).collect())
    }

    /// Scales so the leading coefficient is 1 (left multiplication).
    pub fn monic(&self) -> DiffOp {
        match self.leading() {
            Some(l) if !l.is_one() => self.left_scale(&l.recip()),
            _ => self.clone(),
        }
    }

    /// Scales so the leading coefficient is 1 (right multiplication).
    pub fn monic_right(&self) -> DiffOp {
        match self.leading() {
            Some(l) if !l.is_one() => self.right_scale(&l.recip()),
            _ => self.clone(),
        }
    }

    /// `A = Q·B + R` with `deg R < deg B`.
    pub fn right_divide(&self, b: &DiffOp) -> (DiffOp, DiffOp) {
        self.divide(b, true)
    }

    /// `A = B·Q + R` with `deg R < deg B`.
    pub fn left_divide(&self, b: &DiffOp) -> (DiffOp, DiffOp) {
        self.divide(b, false)
    }

    fn divide(&self, b: &DiffOp, right: bool) -> (DiffOp, DiffOp) {
        let db = b.degree().expect("division by the zero operator");
        let lb = b.leading().unwrap().recip();
        let mut r = self.clone();
        let mut q: Vec<RatFun> = Vec::new();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let c = &r.coeffs[dr] * &lb;
            let t = DiffOp::monomial(c.clone(), dr - db);
            let sub = if right { t.mul_op(b) } else { b.mul_op(&t) };
            let mut next = (&r - &sub).coeffs;
            next.truncate(dr);
            r = DiffOp::from_coeffs(next);
            DiffOp::add_at(&mut q, dr - db, &c);
        }
        (DiffOp::from_coeffs(q), r)
    }

    /// Monic greatest common right divisor.
    pub fn right_gcd(&self, b: &DiffOp) -> DiffOp {
        let (mut x, mut y) = (self.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.right_divide(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    /// Monic greatest common left divisor.
    pub fn left_gcd(&self, b: &DiffOp) -> DiffOp {
        let (mut x, mut y) = (self.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.left_divide(&y);
            x = y;
            y = r;
        }
        x.monic_right()
    }

    /// Least common left multiple `L = C·A = D·B`, with `C` monic.
    pub fn left_lcm(&self, b: &DiffOp) -> Result<(DiffOp, DiffOp, DiffOp), DiffOpError> {
        if self.is_zero() || b.is_zero() {
            return Err(DiffOpError::ZeroOperator);
        }
        let (mut r0, mut r1) = (self.clone(), b.clone());
        let (mut s0, mut s1) = (DiffOp::one(), DiffOp::zero());
        let (mut t0, mut t1) = (DiffOp::zero(), DiffOp::one());
        loop {
            let (q, r2) = r0.right_divide(&r1);
            let s2 = &s0 - &q.mul_op(&s1);
            let t2 = &t0 - &q.mul_op(&t1);
            if r2.is_zero() {
                let norm = s2.leading().unwrap().recip();
                let c = s2.left_scale(&norm);
                let d = (-&t2).left_scale(&norm);
                let l = c.mul_op(self);
                return Ok((l, c, d));
            }
            (r0, r1) = (r1, r2);
            (s0, s1) = (s1, s2);
            (t0, t1) = (t1, t2);
        }
    }

    /// Least common right multiple `L = A·C = B·D`, with `C` monic.
    pub fn right_lcm(&self, b: &DiffOp) -> Result<(DiffOp, DiffOp, DiffOp), DiffOpError> {
        if self.is_zero() || b.is_zero() {
            return Err(DiffOpError::ZeroOperator);
        }
        let (mut r0, mut r1) = (self.clone(), b.clone());
        let (mut s0, mut s1) = (DiffOp::one(), DiffOp::zero());
        let (mut t0, mut t1) = (DiffOp::zero(), DiffOp::one());
        loop {
            let (q, r2) = r0.left_divide(&r1);
            let s2 = &s0 - &s1.mul_op(&q);
            let t2 = &t0 - &t1.mul_op(&q);
            if r2.is_zero() {
                let norm = DiffOp::scalar(s2.leading().unwrap().recip());
                let c = s2.mul_op(&norm);
                let d = (-&t2).mul_op(&norm);
                let l = self.mul_op(&c);
                return Ok((l, c, d));
            }
            (r0, r1) = (r1, r2);
            (s0, s1) = (s1, s2);
            (t0, t1) = (t1, t2);
        }
    }
}

/// A rational operator given as a fraction of differential operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionPair {
    pub num: DiffOp,
    pub den: DiffOp,
    pub side: Side,
}

/// `Right` means `num · den⁻¹`, `Left` means `den⁻¹ · num`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

impl FractionPair {
    pub fn right(num: DiffOp, den: DiffOp) -> FractionPair {
        FractionPair { num, den, side: Side::Right }
    }
}

/// Cancels the common right divisor of `A` and `B` in `A B⁻¹`.
pub fn minimal_right_fraction(a: &DiffOp, b: &DiffOp) -> FractionPair {
    let g = a.right_gcd(b);
    let (a1, ra) = a.right_divide(&g);
    let (b1, rb) = b.right_divide(&g);
    debug_assert!(ra.is_zero() && rb.is_zero());
    FractionPair::right(a1, b1)
}

/// The Frechet derivative `D_f = Σ ∂f/∂u^(m) ∂^m`.
pub fn frechet(f: &RatFun) -> DiffOp {
    let Some(top) = f.diff_order() else { return DiffOp::zero() };
    DiffOp::from_coeffs((0..=top).map(|m| f.partial(JetVar::u(m))).collect())
}

/// `(D_A)` as a bidifferential operator: `M_{kl} = ∂a_k/∂u^(l)`.
pub fn frechet_of_op(a: &DiffOp) -> BiDiffOp {
    let mut m = BiDiffOp::zero();
    for (k, ak) in a.coeffs().iter().enumerate() {
        if let Some(top) = ak.diff_order() {
            for l in 0..=top {
                m.add_entry(k, l as usize, &ak.partial(JetVar::u(l)));
            }
        }
    }
    m
}

/// The monic-in-construction operator of degree `n` whose kernel is `span(fs)`.
pub fn op_with_kernel(fs: &[RatFun]) -> Result<DiffOp, DiffOpError> {
    if !independent(fs) {
        return Err(DiffOpError::DependentInput);
    }
    let killer = |g: &RatFun| DiffOp::from_coeffs(vec![-g.derivative(), g.clone()]);
    let mut p = DiffOp::one();
    for f in fs {
        let g = p.apply(f);
        if g.is_zero() {
            return Err(DiffOpError::DependentInput);
        }
        p = killer(&g).mul_op(&p);
    }
    Ok(p)
}

impl Add<&DiffOp> for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::from_coeffs((0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl Sub<&DiffOp> for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::from_coeffs((0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl Mul<&DiffOp> for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        self.mul_op(rhs)
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<DiffOp> for DiffOp {
            type Output = DiffOp;
            fn $m(self, rhs: DiffOp) -> DiffOp {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&DiffOp> for DiffOp {
            type Output = DiffOp;
            fn $m(self, rhs: &DiffOp) -> DiffOp {
                (&self).$m(rhs)
            }
        }
        impl $tr<DiffOp> for &DiffOp {
            type Output = DiffOp;
            fn $m(self, rhs: DiffOp) -> DiffOp {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

pub(crate) fn fmt_coeff_term(c: &RatFun, tail: &str, first: bool) -> String {
    let s = c.to_string();
    let simple =
        c.den().is_one() && c.num().len() == 1 || (!c.den().is_one() && c.to_laurent().is_some_and(|l| l.len() == 1));
    let (neg, body) = if simple && s.starts_with('-') { (true, s[1..].to_string()) } else { (false, s) };
    let body = if tail.is_empty() {
        if simple || first {
            body
        } else {
            format!("({body})")
        }
    } else if body == "1" {
        tail.to_string()
    } else if simple {
        format!("{body}*{tail}")
    } else {
        format!("({body})*{tail}")
    };
    match (first, neg) {
        (true, true) => format!("-{body}"),
        (true, false) => body,
        (false, true) => format!(" - {body}"),
        (false, false) => format!(" + {body}"),
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let tail = match k {
                0 => String::new(),
                1 => "D".to_string(),
                _ => format!("D^{k}"),
            };
            f.write_str(&fmt_coeff_term(c, &tail, first))?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp({self})")
    }
}
