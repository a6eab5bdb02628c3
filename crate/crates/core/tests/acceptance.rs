//! Acceptance run: one PASS/FAIL line per criterion, exact arithmetic only.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use jetalg::bidiff::{compose_left, is_skewsymmetric, left_divide_bidiff, BiDiffOp};
use jetalg::calculus::potential;
use jetalg::corpus::builtin;
use jetalg::diffop::{frechet, frechet_of_op};
use jetalg::integrability::{lie_defect, Certificate};
use jetalg::lenard::{
    bracket_report, conserved_densities, extend, nl_power, order_growth, Hierarchy, LenardScheme, PairScheme,
    SymmetryScheme,
};
use jetalg::nonlocal::{is_recursion_for, nl_mul, series_expand};
use jetalg::{
    integrate, is_hereditary, is_integrable_diffop, is_integrable_wnl, lie_bracket, parse_function,
    variational_derivative, DiffOp, DiffPoly, JetVar, Monomial, NonlocalOp, RatFun, Q,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn p(s: &str) -> DiffPoly {
    parse_function(s).expect("fixture parses")
}

fn u(n: u32) -> RatFun {
    RatFun::u(n)
}

fn kdv() -> NonlocalOp {
    NonlocalOp::new(
        DiffOp::from_coeffs(vec![u(0).scale(&Q::from_integer(2.into())), RatFun::zero(), RatFun::one()]),
        vec![(u(1), RatFun::one())],
    )
}

fn burgers() -> NonlocalOp {
    NonlocalOp::new(DiffOp::from_coeffs(vec![u(0), RatFun::one()]), vec![(u(1), RatFun::one())])
}

/// `∂⁻¹u″∂`, built from the product so the canonical form is computed.
fn counterexample() -> NonlocalOp {
    let inv = NonlocalOp::new(DiffOp::zero(), vec![(RatFun::one(), u(2))]);
    nl_mul(&inv, &NonlocalOp::from_local(DiffOp::d())).expect("depth-1 product")
}

fn kdv_hierarchy() -> Hierarchy {
    let scheme: Arc<dyn LenardScheme> = Arc::new(SymmetryScheme { l: kdv() });
    extend(&Hierarchy::new(scheme, &p("u'")).unwrap(), 3).unwrap()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let h = kdv_hierarchy();
    let s1 = h.chain[1].to_string();
    ensure!(s1 == "u''' + 3*u*u'", "S1 = {s1}");
    ensure!(h.orders[2] == Some(5) && h.orders[3] == Some(7), "orders {:?}", h.orders);
    let r = bracket_report(&h.chain);
    ensure!(r.pairs_checked == 6 && r.pairwise_zero, "brackets {:?}", r.violations);
    ensure!(order_growth(&h).certified, "order growth not certified");
    let secs = t.elapsed().as_secs_f64();
    ensure!(t.elapsed().as_secs() < 60, "took {secs:.1}s");
    Ok(format!("S1 = {s1}, orders {:?}, 6 brackets zero, {secs:.2}s", h.orders.iter().flatten().collect::<Vec<_>>()))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let scheme = PairScheme::from_operator(&burgers()).map_err(|e| e.to_string())?;
    let (a, b) = (scheme.a.clone(), scheme.b.clone());
    let expected_a = DiffOp::d().mul_op(&DiffOp::from_coeffs(vec![u(0), RatFun::one()]));
    ensure!(a == expected_a && b == DiffOp::d(), "pair A = {a}, B = {b}");
    let h = extend(&Hierarchy::new(Arc::new(scheme), &DiffPoly::one()).unwrap(), 5).map_err(|e| e.to_string())?;
    let step = DiffOp::from_coeffs(vec![u(0), RatFun::one()]);
    let mut hn = RatFun::one();
    for n in 0..=5 {
        ensure!(RatFun::from_poly(h.potentials[n].clone()) == hn, "H_{n} = {} != (D+u)^{n}(1)", h.potentials[n]);
        if n < 5 {
            let lhs = b.apply(&RatFun::from_poly(h.potentials[n + 1].clone()));
            ensure!(lhs == a.apply(&hn), "B(H_{}) != A(H_{n})", n + 1);
        }
        hn = step.apply(&hn);
    }
    let derivs: Vec<DiffPoly> = h.potentials.iter().map(DiffPoly::derivative).collect();
    let r = bracket_report(&derivs);
    ensure!(r.pairwise_zero, "brackets {:?}", r.violations);
    ensure!(t.elapsed().as_secs() < 60, "too slow");
    Ok(format!("H_0..H_5 satisfy B(H_n+1) = A(H_n), {} brackets of H_n' zero", r.pairs_checked))
}

fn criterion_3() -> Outcome {
    for (name, l) in [("D + u + u'*D^-1", burgers()), ("D^2 + 2*u + u'*D^-1", kdv()), ("D^-1*u''*D", counterexample())]
    {
        let v = is_hereditary(&l).map_err(|e| e.to_string())?;
        ensure!(v.result, "{name} not hereditary: {}", v.reason());
    }
    Ok("three operators hereditary".into())
}

fn criterion_4() -> Outcome {
    let l = counterexample();
    ensure!(is_hereditary(&l).map_err(|e| e.to_string())?.result, "not hereditary");
    let v = is_integrable_wnl(&l).map_err(|e| e.to_string())?;
    ensure!(!v.result, "reported integrable");
    ensure!(v.reason() == "q=u''' not a variational derivative", "reason {}", v.reason());
    ensure!(matches!(v.certificate, Certificate::NotVariational { .. }), "certificate {:?}", v.certificate);
    ensure!(is_recursion_for(&l, &RatFun::one()), "not recursion for 1");
    ensure!(is_recursion_for(&l, &u(1)), "not recursion for u'");
    ensure!(!is_recursion_for(&l, &u(2)), "recursion for u''");
    Ok(format!("hereditary, not integrable ({}), recursion for 1 and u' only", v.reason()))
}

fn criterion_5() -> Outcome {
    let a = DiffOp::d().mul_op(&DiffOp::from_coeffs(vec![u(0), RatFun::one()]));
    let v = is_integrable_diffop(&a).map_err(|e| e.to_string())?;
    let Certificate::Witness(w) = &v.certificate else { return Err(format!("no witness: {}", v.reason())) };
    ensure!(v.result, "not integrable");
    ensure!(w.m.to_string() == "-F*D + F'", "M_F = {}", w.m);
    let residual = &lie_defect(&a) - &compose_left(&a, &w.m);
    ensure!(residual.is_zero(), "residual {residual}");
    ensure!(w.skew_checked && is_skewsymmetric(&w.m), "not skewsymmetric");
    Ok(format!("M_F = {}, residual 0, skewsymmetric", w.m))
}

fn criterion_6() -> Outcome {
    let l2 = nl_power(&kdv(), 2).map_err(|e| e.to_string())?;
    ensure!(l2.depth2().is_empty(), "depth2 nonempty");
    for q in l2.qs() {
        let q = q.to_laurent().ok_or("rational q")?;
        potential(&q).map_err(|e| format!("q = {q}: {e}"))?;
    }
    let chain = kdv_hierarchy().chain;
    let mut count = 0;
    for k in 1..=2 {
        for d in conserved_densities(&kdv(), k, &chain).map_err(|e| e.to_string())? {
            ensure!(d.verified_against == vec![0, 1, 2, 3], "rho = {} fails on {:?}", d.rho, d.failed_against);
            count += 1;
        }
    }
    Ok(format!(
        "L^2 weakly non-local, q's {:?} variational, {count} densities conserved along S_0..S_3",
        l2.qs().iter().map(|q| q.to_string()).collect::<Vec<_>>()
    ))
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    let n = loop {
        let n: i64 = rng.gen_range(-6..=6);
        if n != 0 {
            break n;
        }
    };
    Q::new(BigInt::from(n), BigInt::from(rng.gen_range(1i64..=3)))
}

/// Jets up to `u''''`, degree at most 3.
fn rand_poly(rng: &mut ChaCha8Rng, terms: usize) -> DiffPoly {
    let n = rng.gen_range(0..=terms);
    DiffPoly::from_terms((0..n).map(|_| {
        let deg = rng.gen_range(0..=3);
        let m = Monomial::from_pairs((0..deg).map(|_| (JetVar::u(rng.gen_range(0..=4)), 1)));
        (m, rand_q(rng))
    }))
}

fn rand_coeff(rng: &mut ChaCha8Rng) -> RatFun {
    RatFun::from_poly(rand_poly(rng, 2))
}

fn rand_op(rng: &mut ChaCha8Rng) -> DiffOp {
    let n = rng.gen_range(0..=3);
    DiffOp::from_coeffs((0..n).map(|_| rand_coeff(rng)).collect())
}

fn rand_nonzero_op(rng: &mut ChaCha8Rng) -> DiffOp {
    loop {
        let a = rand_op(rng);
        if !a.is_zero() {
            return a;
        }
    }
}

fn rand_bidiff(rng: &mut ChaCha8Rng) -> BiDiffOp {
    let mut m = BiDiffOp::zero();
    for _ in 0..rng.gen_range(0..=4) {
        m.add_entry(rng.gen_range(0..=2), rng.gen_range(0..=3), &rand_coeff(rng));
    }
    m
}

fn rand_wnl(rng: &mut ChaCha8Rng) -> NonlocalOp {
    let local = DiffOp::from_coeffs((0..rng.gen_range(0..=2)).map(|_| rand_coeff(rng)).collect());
    let pairs = (0..rng.gen_range(1..=2)).map(|_| (rand_coeff(rng), rand_coeff(rng))).collect();
    NonlocalOp::new(local, pairs)
}

const CASES: usize = 200;

fn suite(name: &str, seed: u64, mut case: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..CASES {
        case(&mut rng).map_err(|e| format!("{name} case {i}: {e}"))?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let r = |f: DiffPoly| RatFun::from_poly(f);
    suite("adjoint", 1, |g| {
        let (a, b) = (rand_op(g), rand_op(g));
        ensure!(a.adjoint().adjoint() == a, "A** != A for {a}");
        ensure!(a.mul_op(&b).adjoint() == b.adjoint().mul_op(&a.adjoint()), "(AB)* for {a}, {b}");
        Ok(())
    })?;
    suite("division", 2, |g| {
        let (a, b) = (rand_op(g), rand_nonzero_op(g));
        let db = b.degree().unwrap();
        let (q, rem) = a.right_divide(&b);
        ensure!(&q.mul_op(&b) + &rem == a && rem.degree().is_none_or(|d| d < db), "right {a} / {b}");
        let (q, rem) = a.left_divide(&b);
        ensure!(&b.mul_op(&q) + &rem == a && rem.degree().is_none_or(|d| d < db), "left {a} / {b}");
        Ok(())
    })?;
    suite("frechet", 3, |g| {
        let (a, b) = (rand_op(g), rand_op(g));
        let (f, gg) = (r(rand_poly(g, 3)), r(rand_poly(g, 3)));
        let da = frechet_of_op(&a);
        ensure!(frechet(&a.apply(&f)) == &a.mul_op(&frechet(&f)) + &da.slot_first(&f), "image rule for {a}, {f}");
        let lhs = frechet_of_op(&a.mul_op(&b)).slot_first(&f);
        ensure!(lhs == &da.slot_first(&b.apply(&f)) + &a.mul_op(&frechet_of_op(&b).slot_first(&f)), "product rule");
        ensure!(da.slot_first(&f).apply(&gg) == a.evo(&gg).apply(&f), "slot rule");
        Ok(())
    })?;
    suite("frechet-bracket", 4, |g| {
        let (f, h) = (rand_poly(g, 3), rand_poly(g, 3));
        let (df, dh) = (frechet(&r(f.clone())), frechet(&r(h.clone())));
        let rhs = &(&(&df.mul_op(&dh) - &dh.mul_op(&df)) + &df.evo(&r(h.clone()))) + &frechet(&r(lie_bracket(&f, &h)));
        ensure!(dh.evo(&r(f.clone())) == rhs, "X_F(D_G) for {f}, {h}");
        Ok(())
    })?;
    suite("jacobi", 5, |g| {
        let (f, h, k) = (rand_poly(g, 3), rand_poly(g, 3), rand_poly(g, 3));
        let b = lie_bracket;
        let s = &(&b(&f, &b(&h, &k)) + &b(&h, &b(&k, &f))) + &b(&k, &b(&f, &h));
        ensure!(s.is_zero(), "Jacobi residual {s}");
        Ok(())
    })?;
    suite("euler", 6, |g| {
        let f = rand_poly(g, 4);
        ensure!(variational_derivative(&f.derivative()).is_zero(), "delta of ({f})'");
        Ok(())
    })?;
    suite("integrate", 7, |g| {
        let f = rand_poly(g, 4);
        let h = integrate(&f.derivative()).map_err(|e| e.to_string())?;
        ensure!(h == &f - &DiffPoly::constant(f.constant_term()), "integral of ({f})' = {h}");
        Ok(())
    })?;
    suite("bidiff-division", 8, |g| {
        let (m, b) = (rand_bidiff(g), rand_nonzero_op(g));
        let (pq, n) = left_divide_bidiff(&m, &b);
        ensure!(&compose_left(&b, &pq) + &n == m, "reconstruction for {b}");
        ensure!(n.d1().is_none_or(|d| d < b.degree().unwrap()), "remainder too large");
        Ok(())
    })?;
    Ok(format!("8 suites x {CASES} cases exact"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let pairs = 100;
    for i in 0..pairs {
        let (a, b) = (rand_wnl(&mut rng), rand_wnl(&mut rng));
        let prod = nl_mul(&a, &b).map_err(|e| format!("pair {i}: {e}"))?;
        let lhs = series_expand(&prod, 6);
        let rhs = series_expand(&a, 8).mul(&series_expand(&b, 8), -6);
        ensure!(lhs == rhs, "pair {i}: ({a}) * ({b})");
    }
    Ok(format!("{pairs} random pairs agree to D^-6"))
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    let mut positives = 0;
    let mut negatives = 0;
    for e in builtin() {
        let got = e.evaluate().map_err(|err| format!("{}: {err}", e.name))?;
        let (Some(pair), Some(commuting)) = (got.integrable_pair, got.commuting) else { continue };
        ensure!(pair == commuting, "{}: integrable pair {pair} but commuting {commuting}", e.name);
        ensure!(got == e.expected, "{}: {:?} != expected {:?}", e.name, got, e.expected);
        if pair {
            positives += 1;
        } else {
            negatives += 1;
        }
        lines.push(format!("{}={pair}", e.name));
    }
    ensure!(positives >= 2 && negatives >= 1, "both directions not exercised");
    Ok(lines.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("KdV hierarchy", criterion_1),
        ("Burgers pair chain", criterion_2),
        ("hereditary suite", criterion_3),
        ("hereditary but not integrable", criterion_4),
        ("integrable-operator witness", criterion_5),
        ("powers and densities", criterion_6),
        ("algebraic property suites", criterion_7),
        ("product vs series oracle", criterion_8),
        ("pair verdict iff commuting chain", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
