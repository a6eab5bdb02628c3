//! Recursion, hereditary and integrability tests with explicit witnesses.
//!
//! Every "for all F" is an identity in a formal indeterminate `F`.

use serde_json::{json, Value};
use thiserror::Error;

use crate::bidiff::{compose_left, is_skewsymmetric, left_divide_bidiff, BiDiffOp};
use crate::diffop::{frechet, frechet_of_op, DiffOp, DiffOpError, FractionPair, Side};
use crate::jet::Indet;
use crate::nonlocal::{to_fraction, NonlocalError, NonlocalOp, Raw};
use crate::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrabilityError {
    #[error(transparent)]
    Nonlocal(#[from] NonlocalError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error("witness is not skewsymmetric: {0}")]
    NotSkew(String),
    #[error("the zero operator has no integrability verdict")]
    ZeroOperator,
}

/// Quotients `M` (for `A`) and `N` (for `B`) of the defining identities.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub m: BiDiffOp,
    pub n: Option<BiDiffOp>,
    pub skew_checked: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Witness(Witness),
    /// The hereditary identity reduced to zero.
    Identity,
    /// Nonzero remainder of the left division of a Lie defect.
    Remainder {
        operator: &'static str,
        remainder: BiDiffOp,
    },
    /// Nonzero mixed identity of a pair, as an operator in the `F`-slot.
    MixedResidual(DiffOp),
    /// Nonzero difference of the two sides of the hereditary identity.
    Residual(String),
    NotVariational {
        index: usize,
        q: RatFun,
    },
    /// `ℒ_F(L)` for a recursion test.
    LieDerivative(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub result: bool,
    pub certificate: Certificate,
}

impl Verdict {
    pub fn yes(certificate: Certificate) -> Verdict {
        Verdict { result: true, certificate }
    }

    pub fn no(certificate: Certificate) -> Verdict {
        Verdict { result: false, certificate }
    }

    /// One-line human reason.
    pub fn reason(&self) -> String {
        match &self.certificate {
            Certificate::Witness(w) => match &w.n {
                Some(n) => format!("M_F = {}, N_F = {}", w.m, n),
                None => format!("M_F = {}", w.m),
            },
            Certificate::Identity => "hereditary identity holds".into(),
            Certificate::Remainder { operator, remainder } => {
                format!("Lie defect of {operator} leaves remainder {remainder}")
            }
            Certificate::MixedResidual(r) => format!("mixed identity residual {r}"),
            Certificate::Residual(r) => format!("hereditary residual {r}"),
            Certificate::NotVariational { q, .. } => format!("q={q} not a variational derivative"),
            Certificate::LieDerivative(r) => format!("L_F(L) = {r}"),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "result": self.result, "reason": self.reason() });
        match &self.certificate {
            Certificate::Witness(w) => {
                v["witness"] = json!({
                    "M_F": w.m.to_string(),
                    "N_F": w.n.as_ref().map(|n| n.to_string()),
                    "skew_checked": w.skew_checked,
                });
            }
            Certificate::NotVariational { index, q } => {
                v["failed_q"] = json!({ "index": index, "q": q.to_string() });
            }
            _ => {}
        }
        v
    }
}

fn formal_f() -> RatFun {
    RatFun::jet(Indet::F, 0)
}

/// `(D_A)_F` as an operator in the second slot.
fn frechet_slot(a: &DiffOp, f: &RatFun) -> DiffOp {
    frechet_of_op(a).slot_first(f)
}

/// `X_{G}(X) − (D_Y)_F X` in slot form, with `G = Y(F)`.
fn defect_op(x: &DiffOp, y: &DiffOp, f: &RatFun) -> DiffOp {
    let g = y.apply(f);
    &x.evo(&g) - &frechet_slot(y, f).mul_op(x)
}

/// `X_{A(F)}(A) − (D_A)_F A` as a bidifferential operator in `(F, ·)`.
pub fn lie_defect(a: &DiffOp) -> BiDiffOp {
    let f = formal_f();
    BiDiffOp::from_slot_operator(&defect_op(a, a, &f)).expect("defect is linear in F")
}

/// Left-divides the Lie defect by `A`; integrable iff the remainder vanishes
/// and the quotient is skewsymmetric.
pub fn is_integrable_diffop(a: &DiffOp) -> Result<Verdict, IntegrabilityError> {
    if a.is_zero() {
        return Err(IntegrabilityError::ZeroOperator);
    }
    let defect = lie_defect(a);
    let (m, rem) = left_divide_bidiff(&defect, a);
    if !rem.is_zero() {
        return Ok(Verdict::no(Certificate::Remainder { operator: "A", remainder: rem }));
    }
    debug_assert_eq!(compose_left(a, &m), defect);
    if !is_skewsymmetric(&m) {
        return Err(IntegrabilityError::NotSkew(m.to_string()));
    }
    Ok(Verdict::yes(Certificate::Witness(Witness { m, n: None, skew_checked: true })))
}

/// The three identities for `(A, B)`: `A` and `B` integrable with witnesses
/// `M`, `N`, and `A N_F + B M_F = X_{A(F)}(B) + X_{B(F)}(A) − (D_A)_F B − (D_B)_F A`.
pub fn is_integrable_pair(a: &DiffOp, b: &DiffOp) -> Result<Verdict, IntegrabilityError> {
    let va = is_integrable_diffop(a)?;
    let Certificate::Witness(wa) = va.certificate else { return Ok(va) };
    let vb = is_integrable_diffop(b)?;
    let wb = match vb.certificate {
        Certificate::Witness(w) => w,
        Certificate::Remainder { remainder, .. } => {
            return Ok(Verdict::no(Certificate::Remainder { operator: "B", remainder }))
        }
        other => return Ok(Verdict::no(other)),
    };
    let f = formal_f();
    let lhs = &a.mul_op(&wb.m.slot_first(&f)) + &b.mul_op(&wa.m.slot_first(&f));
    let rhs = &(&b.evo(&a.apply(&f)) + &a.evo(&b.apply(&f)))
        - &(&frechet_slot(a, &f).mul_op(b) + &frechet_slot(b, &f).mul_op(a));
    let residual = &lhs - &rhs;
    if !residual.is_zero() {
        return Ok(Verdict::no(Certificate::MixedResidual(residual)));
    }
    Ok(Verdict::yes(Certificate::Witness(Witness { m: wa.m, n: Some(wb.m), skew_checked: true })))
}

/// `X_G(L) − [D, L]` in raw depth-2 form.
fn twisted_lie(l: &Raw, g: &RatFun, d: &DiffOp) -> Raw {
    let dr = Raw { local: d.clone(), words: Vec::new() };
    let mut r = l.map_derivation(|c| c.evo(g));
    r.add(dr.mul(l).neg());
    r.add(l.mul(&dr));
    r
}

/// `X_{A(F)}(L) − [(D_A)_F, L] = L (X_{B(F)}(L) − [(D_B)_F, L])` with
/// `L = A B⁻¹` from [`to_fraction`], decided in the depth-2 algebra.
pub fn is_hereditary(l: &NonlocalOp) -> Result<Verdict, IntegrabilityError> {
    let fr = to_fraction(l)?;
    let f = formal_f();
    let lr = Raw::from_op(l);
    let lhs = twisted_lie(&lr, &fr.num.apply(&f), &frechet_slot(&fr.num, &f));
    let rhs = lr.mul(&twisted_lie(&lr, &fr.den.apply(&f), &frechet_slot(&fr.den, &f)));
    let mut diff = lhs;
    diff.add(rhs.neg());
    let d = crate::nonlocal::canonicalize_raw(diff)?;
    if d.is_zero() {
        Ok(Verdict::yes(Certificate::Identity))
    } else {
        Ok(Verdict::no(Certificate::Residual(d.to_string())))
    }
}

/// Hereditary test for a fraction, cleared of denominators:
/// with `L = A B⁻¹ = C⁻¹D` and `C′D = D′C`, the identity becomes
/// `C′C P_F − C′D Q_F + D′D R_F = 0`.
pub fn is_hereditary_fraction(fr: &FractionPair) -> Result<Verdict, IntegrabilityError> {
    let (a, b) = match fr.side {
        Side::Right => (fr.num.clone(), fr.den.clone()),
        Side::Left => {
            // D⁻¹N = C E⁻¹ where D C = N E is a right lcm
            let (_, c, e) = fr.den.right_lcm(&fr.num)?;
            (c, e)
        }
    };
    if a.is_zero() {
        return Ok(Verdict::yes(Certificate::Identity));
    }
    let f = formal_f();
    let p = defect_op(&a, &a, &f);
    let q = &defect_op(&b, &a, &f) + &defect_op(&a, &b, &f);
    let r = defect_op(&b, &b, &f);
    let (_, c, d) = a.left_lcm(&b)?;
    let (_, c2, d2) = d.left_lcm(&c)?;
    let lhs = c2.mul_op(&c).mul_op(&p);
    let mid = c2.mul_op(&d).mul_op(&q);
    let last = d2.mul_op(&d).mul_op(&r);
    let residual = &(&lhs - &mid) + &last;
    if residual.is_zero() {
        Ok(Verdict::yes(Certificate::Identity))
    } else {
        Ok(Verdict::no(Certificate::MixedResidual(residual)))
    }
}

/// Integrable iff every `qᵢ` is a variational derivative and `L` is hereditary.
pub fn is_integrable_wnl(l: &NonlocalOp) -> Result<Verdict, IntegrabilityError> {
    for (i, q) in l.qs().iter().enumerate() {
        let d = frechet(q);
        if d != d.adjoint() {
            return Ok(Verdict::no(Certificate::NotVariational { index: i, q: q.clone() }));
        }
    }
    is_hereditary(l)
}

/// Necessary condition for a hereditary local operator: every coefficient
/// has differential order at most `deg A + 1`.
pub fn hereditary_coefficient_bound(a: &DiffOp) -> bool {
    let Some(n) = a.degree() else { return true };
    a.coeffs().iter().all(|c| c.diff_order().is_none_or(|d| d as usize <= n + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::nl_mul;
    use crate::poly::q;

    fn u(n: u32) -> RatFun {
        RatFun::u(n)
    }

    fn fj(n: u32) -> RatFun {
        RatFun::jet(Indet::F, n)
    }

    fn burgers_a() -> DiffOp {
        DiffOp::d().mul_op(&DiffOp::from_coeffs(vec![u(0), RatFun::one()]))
    }

    fn kdv() -> NonlocalOp {
        NonlocalOp::new(
            DiffOp::from_coeffs(vec![u(0).scale(&q(2)), RatFun::zero(), RatFun::one()]),
            vec![(u(1), RatFun::one())],
        )
    }

    fn example_b() -> NonlocalOp {
        NonlocalOp::new(DiffOp::from_coeffs(vec![u(0), RatFun::one()]), vec![(u(1), RatFun::one())])
    }

    fn counterexample() -> NonlocalOp {
        let inv = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(2))]);
        nl_mul(&inv, &NonlocalOp::from_local(DiffOp::d())).unwrap()
    }

    #[test]
    fn test_lie_defect_examples() {
        assert!(lie_defect(&DiffOp::d()).is_zero());
        assert!(lie_defect(&DiffOp::scalar(u(0))).is_zero());
        let a = burgers_a();
        let m = BiDiffOp::from_slot_operator(&DiffOp::from_coeffs(vec![fj(1), -fj(0)])).unwrap();
        assert_eq!(lie_defect(&a), compose_left(&a, &m));
    }

    #[test]
    fn test_integrable_diffop_examples() {
        let v = is_integrable_diffop(&burgers_a()).unwrap();
        assert!(v.result);
        let Certificate::Witness(w) = &v.certificate else { panic!("expected witness") };
        assert_eq!(w.m.to_string(), "-F*D + F'");
        assert!(!is_integrable_diffop(&DiffOp::monomial(u(3).recip(), 1)).unwrap().result);
        let v = is_integrable_diffop(&DiffOp::d()).unwrap();
        assert!(v.result);
    }

    #[test]
    fn test_hereditary_examples() {
        assert!(is_hereditary(&example_b()).unwrap().result);
        assert!(is_hereditary(&kdv()).unwrap().result);
        assert!(is_hereditary(&counterexample()).unwrap().result);
    }

    #[test]
    fn test_hereditary_refutation() {
        // ∂ + u⁗ violates the coefficient bound, so it cannot be hereditary
        let l = DiffOp::from_coeffs(vec![u(4), RatFun::one()]);
        assert!(!hereditary_coefficient_bound(&l));
        assert!(!is_hereditary(&NonlocalOp::from_local(l)).unwrap().result);
    }

    #[test]
    fn test_fraction_route_agrees() {
        for l in [example_b(), kdv(), counterexample()] {
            let fr = to_fraction(&l).unwrap();
            assert!(is_hereditary_fraction(&fr).unwrap().result);
        }
        let bad = FractionPair::right(DiffOp::from_coeffs(vec![u(4), RatFun::one()]), DiffOp::one());
        assert!(!is_hereditary_fraction(&bad).unwrap().result);
    }

    #[test]
    fn test_integrable_pair_examples() {
        assert!(is_integrable_pair(&burgers_a(), &DiffOp::d()).unwrap().result);
        let fr = to_fraction(&kdv()).unwrap();
        assert!(is_integrable_pair(&fr.num, &fr.den).unwrap().result);
        let fr = to_fraction(&counterexample()).unwrap();
        assert!(!is_integrable_pair(&fr.num, &fr.den).unwrap().result);
    }

    #[test]
    fn test_integrable_wnl_examples() {
        assert!(is_integrable_wnl(&kdv()).unwrap().result);
        let v = is_integrable_wnl(&counterexample()).unwrap();
        assert!(!v.result);
        assert_eq!(v.reason(), "q=u''' not a variational derivative");
        let pb = NonlocalOp::from_local(DiffOp::from_coeffs(vec![u(1), RatFun::one()]));
        assert!(is_integrable_wnl(&pb).unwrap().result);
    }

    #[test]
    fn test_coefficient_bound() {
        assert!(hereditary_coefficient_bound(&DiffOp::from_coeffs(vec![u(1), RatFun::one()])));
        assert!(hereditary_coefficient_bound(&DiffOp::from_coeffs(vec![
            u(0).scale(&q(2)),
            RatFun::zero(),
            RatFun::one()
        ])));
    }
}
