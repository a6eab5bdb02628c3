//! Multivariate polynomial gcd over ℚ by recursive content / primitive part.
//!
//! Inputs must have non-negative exponents.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::jet::{JetVar, Monomial};
use crate::poly::DiffPoly;

/// `a / b` if `b` divides `a` exactly, using leading terms in the monomial order.
pub fn exact_div(a: &DiffPoly, b: &DiffPoly) -> Option<DiffPoly> {
    assert!(!b.is_zero(), "division by zero polynomial");
    if a.is_zero() {
        return Some(DiffPoly::zero());
    }
    if let Some((m, c)) = b.as_monomial() {
        let inv = c.recip();
        let mut out = DiffPoly::zero();
        for (n, d) in a.terms() {
            out.add_term(n.checked_div(m)?, d * &inv);
        }
        return Some(out);
    }
    let (lm_b, lc_b) = b.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
    let mut r = a.clone();
    let mut quot = DiffPoly::zero();
    while let Some((lm_r, lc_r)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
        let m = lm_r.checked_div(&lm_b)?;
        let c = lc_r / &lc_b;
        r -= &b.mul_monomial(&m, &c);
        quot.add_term(m, c);
    }
    Some(quot)
}

/// Monic gcd of `a` and `b`; `gcd(0, 0) = 0`.
pub fn gcd(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return DiffPoly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.min_with(&mb);
    let a1 = strip_monomial(a, &ma);
    let b1 = strip_monomial(b, &mb);
    let g = gcd_core(&a1, &b1);
    g.mul_monomial(&mg, &num_traits::One::one()).monic()
}

fn strip_monomial(p: &DiffPoly, m: &Monomial) -> DiffPoly {
    if m.is_one() {
        p.clone()
    } else {
        p.mul_monomial(&m.inverse(), &num_traits::One::one())
    }
}

/// gcd of polynomials without monomial content.
fn gcd_core(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    if a.len() <= 1 || b.len() <= 1 {
        return DiffPoly::one();
    }
    if a == b {
        return a.monic();
    }
    if exact_div(a, b).is_some() {
        return b.monic();
    }
    if exact_div(b, a).is_some() {
        return a.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    if let Some(&x) = va.difference(&vb).next() {
        return gcd(&content_in(a, x), b);
    }
    if let Some(&x) = vb.difference(&va).next() {
        return gcd(a, &content_in(b, x));
    }
    let common: BTreeSet<JetVar> = va.intersection(&vb).copied().collect();
    let x = *common.iter().next_back().expect("non-constant inputs share a variable");
    let ca = content_in(a, x);
    let cb = content_in(b, x);
    let pa = exact_div(a, &ca).expect("content divides");
    let pb = exact_div(b, &cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = primitive_prs(pa, pb, x);
    (&c * &g).monic()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content_in(p: &DiffPoly, x: JetVar) -> DiffPoly {
    let mut acc = DiffPoly::zero();
    for c in p.coefficients_in(x).values() {
        acc = gcd(&acc, c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn primitive_part_in(p: &DiffPoly, x: JetVar) -> DiffPoly {
    let c = content_in(p, x);
    exact_div(p, &c).expect("content divides")
}

fn lead_in(p: &DiffPoly, x: JetVar) -> (i32, DiffPoly) {
    let coeffs = p.coefficients_in(x);
    let (&d, c) = coeffs.iter().next_back().expect("nonzero polynomial");
    (d, c.clone())
}

/// Pseudo-remainder of `a` by `b` in the variable `x`.
fn prem(a: &DiffPoly, b: &DiffPoly, x: JetVar) -> DiffPoly {
    let (db, lb) = lead_in(b, x);
    let mut r = a.clone();
    while !r.is_zero() {
        let (dr, lr) = lead_in(&r, x);
        if dr < db {
            break;
        }
        let shift = Monomial::var_pow(x, dr - db);
        let t = (&lr * b).mul_monomial(&shift, &num_traits::One::one());
        r = &(&lb * &r) - &t;
    }
    r
}

fn primitive_prs(a: DiffPoly, b: DiffPoly, x: JetVar) -> DiffPoly {
    let (mut a, mut b) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    loop {
        let r = prem(&a, &b, x);
        if r.is_zero() {
            return b.monic();
        }
        if r.degree_in(x) == 0 {
            return DiffPoly::one();
        }
        a = b;
        b = primitive_part_in(&r, x);
        // drop rational content for tidiness
        if let Some((_, c)) = b.leading() {
            if !c.is_zero() {
                let inv = c.recip();
                b = b.scale(&inv);
            }
        }
    }
}

/// Least common multiple, monic.
pub fn lcm(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    if a.is_zero() || b.is_zero() {
        return DiffPoly::zero();
    }
    let g = gcd(a, b);
    let ab = exact_div(a, &g).expect("gcd divides");
    (&ab * b).monic()
}
