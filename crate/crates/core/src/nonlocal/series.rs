//! Truncated pseudodifferential series `Σ_{k ≥ floor} a_k ∂^k`.
//!
//! Only an independent oracle for the closed-form arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::diffop::{gbinom, DiffOp};
use crate::ratfun::RatFun;

use super::NonlocalOp;

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    terms: BTreeMap<i64, RatFun>,
    floor: i64,
}

impl Series {
    pub fn zero(floor: i64) -> Series {
        Series { terms: BTreeMap::new(), floor }
    }

    pub fn monomial(a: RatFun, k: i64, floor: i64) -> Series {
        let mut s = Series::zero(floor);
        s.add_at(k, &a);
        s
    }

    pub fn from_op(op: &DiffOp, floor: i64) -> Series {
        let mut s = Series::zero(floor);
        for (k, c) in op.coeffs().iter().enumerate() {
            s.add_at(k as i64, c);
        }
        s
    }

    fn add_at(&mut self, k: i64, a: &RatFun) {
        if k < self.floor || a.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_default();
        *e += a;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> RatFun {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = Series::zero(self.floor.max(other.floor));
        for (k, a) in self.terms.iter().chain(&other.terms) {
            out.add_at(*k, a);
        }
        out
    }

    /// Drops every power below `floor`.
    pub fn truncate(&self, floor: i64) -> Series {
        let mut out = Series::zero(floor);
        for (k, a) in &self.terms {
            out.add_at(*k, a);
        }
        out
    }

    /// `(a∂^i)(b∂^j) = Σ_n C(i, n) a b^(n) ∂^(i+j−n)`, kept down to `floor`.
    pub fn mul(&self, other: &Series, floor: i64) -> Series {
        let mut out = Series::zero(floor);
        for (&i, a) in &self.terms {
            for (&j, b) in &other.terms {
                if i + j < floor {
                    continue;
                }
                let nmax = (i + j - floor) as usize;
                let nmax = if i >= 0 { nmax.min(i as usize) } else { nmax };
                let ders = b.derivatives(nmax);
                for (n, bn) in ders.iter().enumerate() {
                    let c = gbinom(i, n);
                    if !c.is_zero() {
                        out.add_at(i + j - n as i64, &(a * bn).scale(&c));
                    }
                }
            }
        }
        out
    }
}

/// Expansion of `L` down to `∂^(−depth)`, via `∂⁻¹a = Σ (−1)^n a^(n) ∂^(−n−1)`.
pub fn series_expand(l: &NonlocalOp, depth: usize) -> Series {
    let floor = -(depth as i64);
    let inv = Series::monomial(RatFun::one(), -1, floor);
    let word = |slots: &[&RatFun]| -> Series {
        let mut s = Series::monomial(slots[0].clone(), 0, floor);
        for f in &slots[1..] {
            s = s.mul(&inv, floor).mul(&Series::monomial((*f).clone(), 0, floor), floor);
        }
        s
    };
    let mut out = Series::from_op(&l.local, floor);
    for (p, q) in &l.depth1 {
        out = out.add(&word(&[p, q]));
    }
    for (a, b, c) in &l.depth2 {
        out = out.add(&word(&[a, b, c]));
    }
    out
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().rev().map(|(k, a)| format!("({a})*D^{k}")).collect();
        write!(f, "Series[{}; >= D^{}]", parts.join(" + "), self.floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::nl_mul;

    fn u(n: u32) -> RatFun {
        RatFun::u(n)
    }

    #[test]
    fn test_expand_inverse() {
        let l = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(0))]);
        let s = series_expand(&l, 3);
        let mut expected = Series::zero(-3);
        expected.add_at(-1, &u(0));
        expected.add_at(-2, &-u(1));
        expected.add_at(-3, &u(2));
        assert_eq!(s, expected);
    }

    #[test]
    fn test_local_unchanged() {
        let e = DiffOp::from_coeffs(vec![u(0), RatFun::zero(), RatFun::one()]);
        let s = series_expand(&NonlocalOp::from_local(e.clone()), 4);
        assert_eq!(s, Series::from_op(&e, -4));
    }

    #[test]
    fn test_product_matches_series() {
        let l1 = NonlocalOp::new(DiffOp::from_coeffs(vec![u(0), RatFun::one()]), vec![(u(1), u(0))]);
        let l2 = NonlocalOp::new(DiffOp::d(), vec![(RatFun::one(), u(2))]);
        let prod = nl_mul(&l1, &l2).unwrap();
        let lhs = series_expand(&prod, 6);
        let rhs = series_expand(&l1, 8).mul(&series_expand(&l2, 8), -6);
        assert_eq!(lhs, rhs);
    }
}
