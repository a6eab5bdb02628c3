//! Bidifferential operators `M(F, G) = Σ M_{kl} F^(k) G^(l)`.
//!
//! Identities "for all F" are handled by substituting a formal indeterminate
//! for `F`: the slot view `M_F = Σ M_{kl} F^(k) ∂^l` is then an ordinary
//! [`DiffOp`] whose coefficients are linear in the jets of that symbol.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

use crate::diffop::DiffOp;
use crate::jet::Indet;
use crate::ratfun::RatFun;

/// Symbol used internally to carry the first slot.
const SLOT: Indet = Indet::H;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BiDiffError {
    #[error("coefficient {0} is not linear in the slot jets")]
    NotLinear(String),
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiDiffOp {
    entries: BTreeMap<(usize, usize), RatFun>,
}

impl BiDiffOp {
    pub fn zero() -> BiDiffOp {
        BiDiffOp::default()
    }

    /// Single entry `M_{kl} = c`.
    pub fn entry_op(k: usize, l: usize, c: RatFun) -> BiDiffOp {
        let mut m = BiDiffOp::zero();
        m.add_entry(k, l, &c);
        m
    }

    pub fn add_entry(&mut self, k: usize, l: usize, c: &RatFun) {
        if c.is_zero() {
            return;
        }
        let e = self.entries.entry((k, l)).or_default();
        *e += c;
        if e.is_zero() {
            self.entries.remove(&(k, l));
        }
    }

    pub fn entry(&self, k: usize, l: usize) -> RatFun {
        self.entries.get(&(k, l)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &RatFun)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `d₁(M) = sup_F deg M_F`: the largest second index `l`.
    pub fn d1(&self) -> Option<usize> {
        self.entries.keys().map(|&(_, l)| l).max()
    }

    /// `d₂(M) = sup_G deg M^G`: the largest first index `k`.
    pub fn d2(&self) -> Option<usize> {
        self.entries.keys().map(|&(k, _)| k).max()
    }

    pub fn bi_apply(&self, f: &RatFun, g: &RatFun) -> RatFun {
        let (Some(kmax), Some(lmax)) = (self.d2(), self.d1()) else { return RatFun::zero() };
        let fd = f.derivatives(kmax);
        let gd = g.derivatives(lmax);
        let mut acc = RatFun::zero();
        for (&(k, l), c) in &self.entries {
            acc += &(&(c * &fd[k]) * &gd[l]);
        }
        acc
    }

    /// `M_F = Σ M_{kl} F^(k) ∂^l`.
    pub fn slot_first(&self, f: &RatFun) -> DiffOp {
        let Some(kmax) = self.d2() else { return DiffOp::zero() };
        let fd = f.derivatives(kmax);
        let mut coeffs = vec![RatFun::zero(); self.d1().unwrap() + 1];
        for (&(k, l), c) in &self.entries {
            coeffs[l] += &(c * &fd[k]);
        }
        DiffOp::from_coeffs(coeffs)
    }

    /// `M^G = Σ M_{kl} G^(l) ∂^k`.
    pub fn slot_second(&self, g: &RatFun) -> DiffOp {
        let Some(lmax) = self.d1() else { return DiffOp::zero() };
        let gd = g.derivatives(lmax);
        let mut coeffs = vec![RatFun::zero(); self.d2().unwrap() + 1];
        for (&(k, l), c) in &self.entries {
            coeffs[k] += &(c * &gd[l]);
        }
        DiffOp::from_coeffs(coeffs)
    }

    /// `M_F` with `F` replaced by the formal symbol `w`.
    pub fn formal_slot(&self, w: Indet) -> DiffOp {
        self.slot_first(&RatFun::jet(w, 0))
    }

    /// Inverse of [`formal_slot`](Self::formal_slot): reads the entries off
    /// an operator whose coefficients are linear in the jets of `w`.
    pub fn from_formal_slot(op: &DiffOp, w: Indet) -> Result<BiDiffOp, BiDiffError> {
        let mut m = BiDiffOp::zero();
        for (l, c) in op.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.den().contains_indet(w) {
                return Err(BiDiffError::NotLinear(c.to_string()));
            }
            let top = c.max_order_of(w).ok_or_else(|| BiDiffError::NotLinear(c.to_string()))?;
            let mut rebuilt = RatFun::zero();
            for k in 0..=top {
                let mk = c.partial(w.jet(k));
                if mk.contains_indet(w) {
                    return Err(BiDiffError::NotLinear(c.to_string()));
                }
                rebuilt += &(&mk * &RatFun::jet(w, k));
                m.add_entry(k as usize, l, &mk);
            }
            if &rebuilt != c {
                return Err(BiDiffError::NotLinear(c.to_string()));
            }
        }
        Ok(m)
    }

    /// Entries read off an `F`-linear slot operator built with the symbol `F`.
    pub fn from_slot_operator(op: &DiffOp) -> Result<BiDiffOp, BiDiffError> {
        BiDiffOp::from_formal_slot(op, Indet::F)
    }

    pub fn scale(&self, c: &crate::poly::Q) -> BiDiffOp {
        let mut m = BiDiffOp::zero();
        for (&(k, l), e) in &self.entries {
            m.add_entry(k, l, &e.scale(c));
        }
        m
    }
}

/// `(B M)(F, G) = B(M(F, G))`.
pub fn compose_left(b: &DiffOp, m: &BiDiffOp) -> BiDiffOp {
    BiDiffOp::from_formal_slot(&b.mul_op(&m.formal_slot(SLOT)), SLOT).expect("composition stays linear")
}

/// `(M B)(F, G) = M(F, B(G))`.
pub fn compose_right(m: &BiDiffOp, b: &DiffOp) -> BiDiffOp {
    BiDiffOp::from_formal_slot(&m.formal_slot(SLOT).mul_op(b), SLOT).expect("composition stays linear")
}

/// `M = B P + N` with `d₁(N) < deg B`.
pub fn left_divide_bidiff(m: &BiDiffOp, b: &DiffOp) -> (BiDiffOp, BiDiffOp) {
    let (q, r) = m.formal_slot(SLOT).left_divide(b);
    let p = BiDiffOp::from_formal_slot(&q, SLOT).expect("quotient stays linear");
    let n = BiDiffOp::from_formal_slot(&r, SLOT).expect("remainder stays linear");
    (p, n)
}

/// `M(F, G) + M(G, F) = 0` identically.
pub fn is_skewsymmetric(m: &BiDiffOp) -> bool {
    let f = RatFun::jet(Indet::F, 0);
    let g = RatFun::jet(Indet::G, 0);
    (&m.bi_apply(&f, &g) + &m.bi_apply(&g, &f)).is_zero()
}

impl Add<&BiDiffOp> for &BiDiffOp {
    type Output = BiDiffOp;
    fn add(self, rhs: &BiDiffOp) -> BiDiffOp {
        let mut out = self.clone();
        for (&(k, l), c) in &rhs.entries {
            out.add_entry(k, l, c);
        }
        out
    }
}

impl Sub<&BiDiffOp> for &BiDiffOp {
    type Output = BiDiffOp;
    fn sub(self, rhs: &BiDiffOp) -> BiDiffOp {
        let mut out = self.clone();
        for (&(k, l), c) in &rhs.entries {
            out.add_entry(k, l, &-c);
        }
        out
    }
}

impl fmt::Display for BiDiffOp {
    /// Printed as the slot operator `M_F`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formal_slot(Indet::F))
    }
}

impl fmt::Debug for BiDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiDiffOp(M_F = {self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn fj(n: u32) -> RatFun {
        RatFun::jet(Indet::F, n)
    }

    fn gj(n: u32) -> RatFun {
        RatFun::jet(Indet::G, n)
    }

    /// M(F, G) = F′G − FG′.
    fn witness() -> BiDiffOp {
        let mut m = BiDiffOp::zero();
        m.add_entry(1, 0, &RatFun::one());
        m.add_entry(0, 1, &RatFun::int(-1));
        m
    }

    #[test]
    fn test_apply_examples() {
        let m = BiDiffOp::entry_op(0, 1, RatFun::one());
        assert_eq!(m.bi_apply(&fj(0), &gj(0)), &fj(0) * &gj(1));
        assert!(BiDiffOp::zero().bi_apply(&fj(0), &gj(0)).is_zero());
        assert_eq!(witness().bi_apply(&fj(0), &gj(0)), &(&fj(1) * &gj(0)) - &(&fj(0) * &gj(1)));
    }

    #[test]
    fn test_slot_views() {
        assert_eq!(BiDiffOp::entry_op(1, 0, RatFun::one()).slot_first(&fj(0)), DiffOp::scalar(fj(1)));
        let mf = witness().slot_first(&fj(0));
        assert_eq!(mf, DiffOp::from_coeffs(vec![fj(1), -fj(0)]));
        assert_eq!(mf.to_string(), "-F*D + F'");
        let g = RatFun::u(2);
        assert_eq!(witness().slot_second(&g).apply(&fj(0)), witness().bi_apply(&fj(0), &g));
    }

    #[test]
    fn test_compose_examples() {
        let m00 = BiDiffOp::entry_op(0, 0, RatFun::one());
        assert_eq!(compose_left(&DiffOp::one(), &witness()), witness());
        let mut expected = BiDiffOp::zero();
        expected.add_entry(1, 0, &RatFun::one());
        expected.add_entry(0, 1, &RatFun::one());
        assert_eq!(compose_left(&DiffOp::d(), &m00), expected);
        assert_eq!(compose_right(&m00, &DiffOp::d()), BiDiffOp::entry_op(0, 1, RatFun::one()));
    }

    #[test]
    fn test_left_division() {
        let b = DiffOp::from_coeffs(vec![RatFun::u(1), RatFun::u(0), RatFun::one()]);
        let m = compose_left(&b, &witness());
        let (p, n) = left_divide_bidiff(&m, &b);
        assert!(n.is_zero());
        assert_eq!(p, witness());
        let (p, n) = left_divide_bidiff(&witness(), &b);
        assert!(p.is_zero());
        assert_eq!(n, witness());
    }

    #[test]
    fn test_skewsymmetry() {
        assert!(is_skewsymmetric(&witness()));
        assert!(!is_skewsymmetric(&BiDiffOp::entry_op(0, 0, RatFun::one())));
        assert!(is_skewsymmetric(&BiDiffOp::zero()));
        assert!(!is_skewsymmetric(&witness().scale(&q(2)).add(&BiDiffOp::entry_op(1, 1, RatFun::u(0)))));
    }
}
