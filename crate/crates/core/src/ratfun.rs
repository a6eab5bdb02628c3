//! Rational differential functions `num / Π fᵢ^eᵢ`.
//!
//! Denominators are kept as lists of monic factors. Common factors are
//! cancelled by exact division, which avoids multivariate gcds on the hot
//! path; the representation is therefore not unique and equality is decided
//! by cross-multiplication.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::gcd::{content_in, exact_div, gcd};
use crate::jet::{Indet, JetVar, Monomial};
use crate::poly::{DiffPoly, Q};

type Factors = Vec<(DiffPoly, u32)>;

#[derive(Clone)]
pub struct RatFun {
    num: DiffPoly,
    factors: Factors,
    den: DiffPoly,
}

impl Default for RatFun {
    fn default() -> Self {
        RatFun::zero()
    }
}

fn product(factors: &Factors) -> DiffPoly {
    let mut acc = DiffPoly::one();
    for (f, e) in factors {
        acc = &acc * &f.pow(*e);
    }
    acc
}

/// Product of `fᵢ^kᵢ` for the listed exponents.
fn partial_product(factors: &Factors, exps: impl Fn(usize) -> u32) -> DiffPoly {
    let mut acc = DiffPoly::one();
    for (i, (f, _)) in factors.iter().enumerate() {
        let k = exps(i);
        if k > 0 {
            acc = &acc * &f.pow(k);
        }
    }
    acc
}

/// Adds `g^e` to the factor list. Returns `λ` with `g^e = λ · (what was stored)`.
fn insert_factor(factors: &mut Factors, g: DiffPoly, e: u32) -> Q {
    if e == 0 {
        return Q::one();
    }
    if let Some(c) = g.as_constant() {
        return num_traits::pow(c, e as usize);
    }
    let content = g.monomial_content();
    for &(v, k) in content.factors() {
        let var = DiffPoly::var(v);
        let k = e * k as u32;
        match factors.iter_mut().find(|(h, _)| *h == var) {
            Some((_, ek)) => *ek += k,
            None => factors.push((var, k)),
        }
    }
    let g = if content.is_one() { g } else { g.mul_monomial(&content.inverse(), &Q::one()) };
    let mut scale = Q::one();
    if let Some(c) = g.as_constant() {
        return num_traits::pow(c, e as usize);
    }
    if let Some((a, b)) = split_factor(&g) {
        scale *= insert_factor(factors, a, e);
        return scale * insert_factor(factors, b, e);
    }
    let lc = g.leading().map(|(_, c)| c.clone()).unwrap();
    scale *= num_traits::pow(lc.clone(), e as usize);
    let g = g.scale(&lc.recip());
    let gdeg = g.leading().unwrap().0.degree();
    for i in 0..factors.len() {
        let f = &factors[i].0;
        if *f == g {
            factors[i].1 += e;
            return scale;
        }
        let fdeg = f.leading().unwrap().0.degree();
        if fdeg < gdeg && f.len() > 1 {
            if let Some(h) = exact_div(&g, f) {
                factors[i].1 += e;
                return scale * insert_factor(factors, h, e);
            }
        } else if gdeg < fdeg && g.len() > 1 {
            if let Some(h) = exact_div(f, &g) {
                let (_, ef) = factors.remove(i);
                scale *= insert_factor(factors, g, ef + e);
                return scale / insert_factor(factors, h, ef);
            }
        }
    }
    factors.push((g, e));
    scale
}

/// A cheap nontrivial splitting `g = a·b`: the content in the variable of
/// lowest degree, or the repeated part `gcd(g, ∂g/∂x)`.
fn split_factor(g: &DiffPoly) -> Option<(DiffPoly, DiffPoly)> {
    let (x, d) = g.vars().into_iter().map(|v| (v, g.degree_in(v))).min_by_key(|&(_, d)| d)?;
    let c = content_in(g, x);
    let a = if !c.is_constant() {
        c
    } else if d > 1 {
        gcd(g, &g.partial(x))
    } else {
        return None;
    };
    if a.is_constant() {
        return None;
    }
    let b = exact_div(g, &a).expect("divisor of g");
    Some((a, b))
}

/// Divides `num` by factors while it is exactly divisible.
fn cancel(num: &mut DiffPoly, factors: &mut Factors) {
    if num.is_zero() {
        factors.clear();
        return;
    }
    let vars = num.vars();
    for (f, e) in factors.iter_mut() {
        if !f.vars().is_subset(&vars) {
            continue;
        }
        while *e > 0 {
            match exact_div(num, f) {
                Some(q) => {
                    *num = q;
                    *e -= 1;
                }
                None => break,
            }
        }
    }
    factors.retain(|(_, e)| *e > 0);
}

fn same_factors(a: &Factors, b: &Factors) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

impl RatFun {
    pub fn zero() -> RatFun {
        RatFun { num: DiffPoly::zero(), factors: Vec::new(), den: DiffPoly::one() }
    }

    pub fn one() -> RatFun {
        RatFun::from_poly(DiffPoly::one())
    }

    pub fn constant(c: Q) -> RatFun {
        RatFun::from_poly(DiffPoly::constant(c))
    }

    pub fn int(n: i64) -> RatFun {
        RatFun::from_poly(DiffPoly::int(n))
    }

    pub fn u(n: u32) -> RatFun {
        RatFun::from_poly(DiffPoly::u(n))
    }

    pub fn jet(w: Indet, n: u32) -> RatFun {
        RatFun::from_poly(DiffPoly::jet(w, n))
    }

    fn build(mut num: DiffPoly, mut factors: Factors) -> RatFun {
        cancel(&mut num, &mut factors);
        let den = product(&factors);
        RatFun { num, factors, den }
    }

    fn build_uncancelled(num: DiffPoly, factors: Factors) -> RatFun {
        if num.is_zero() {
            return RatFun::zero();
        }
        let den = product(&factors);
        RatFun { num, factors, den }
    }

    /// Converts a (possibly Laurent) polynomial.
    pub fn from_poly(p: DiffPoly) -> RatFun {
        if !p.has_negative_exponents() {
            return RatFun::build_uncancelled(p, Vec::new());
        }
        RatFun::new(p, DiffPoly::one())
    }

    /// Builds `num / den` from (possibly Laurent) polynomials.
    pub fn new(num: DiffPoly, den: DiffPoly) -> RatFun {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFun::zero();
        }
        let (num, den) = clear_laurent(num, den);
        let mut factors = Vec::new();
        let lambda = insert_factor(&mut factors, den, 1);
        RatFun::build(num.scale(&lambda.recip()), factors)
    }

    pub fn num(&self) -> &DiffPoly {
        &self.num
    }

    /// The expanded denominator, monic.
    pub fn den(&self) -> &DiffPoly {
        &self.den
    }

    /// Denominator factors with multiplicities.
    pub fn den_factors(&self) -> &[(DiffPoly, u32)] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && self.num.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn as_poly(&self) -> Option<&DiffPoly> {
        self.factors.is_empty().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.factors.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// The Laurent polynomial equal to `self` when the denominator is a monomial.
    pub fn to_laurent(&self) -> Option<DiffPoly> {
        if self.factors.is_empty() {
            return Some(self.num.clone());
        }
        let (m, c) = self.den.as_monomial()?;
        Some(self.num.mul_monomial(&m.inverse(), &c.recip()))
    }

    pub fn scale(&self, c: &Q) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun { num: self.num.scale(c), factors: self.factors.clone(), den: self.den.clone() }
    }

    pub fn recip(&self) -> RatFun {
        assert!(!self.is_zero(), "reciprocal of zero");
        let mut factors = Vec::new();
        let lambda = insert_factor(&mut factors, self.num.clone(), 1);
        RatFun::build_uncancelled(self.den.scale(&lambda.recip()), factors)
    }

    pub fn pow(&self, k: u32) -> RatFun {
        if k == 0 {
            return RatFun::one();
        }
        let factors = self.factors.iter().map(|(f, e)| (f.clone(), e * k)).collect();
        RatFun::build_uncancelled(self.num.pow(k), factors)
    }

    pub fn contains_indet(&self, w: Indet) -> bool {
        self.num.contains_indet(w) || self.den.contains_indet(w)
    }

    pub fn max_order_of(&self, w: Indet) -> Option<u32> {
        self.num.max_order_of(w).max(self.den.max_order_of(w))
    }

    /// Differential order in `u`; `None` for quasiconstants.
    pub fn diff_order(&self) -> Option<u32> {
        self.max_order_of(Indet::U)
    }

    /// Applies a derivation given by its action on polynomials.
    fn derive(&self, dn: impl Fn(&DiffPoly) -> DiffPoly) -> RatFun {
        if self.factors.is_empty() {
            return RatFun::build_uncancelled(dn(&self.num), Vec::new());
        }
        let dfs: Vec<DiffPoly> = self.factors.iter().map(|(f, _)| dn(f)).collect();
        let active: Vec<bool> = dfs.iter().map(|d| !d.is_zero()).collect();
        let mut num = &dn(&self.num) * &partial_product(&self.factors, |i| active[i] as u32);
        for (i, (_, e)) in self.factors.iter().enumerate() {
            if !active[i] {
                continue;
            }
            let others = partial_product(&self.factors, |j| (active[j] && j != i) as u32);
            num -= &(&(&self.num * &dfs[i]) * &others).scale(&Q::from_integer((*e).into()));
        }
        let factors = self.factors.iter().enumerate().map(|(i, (f, e))| (f.clone(), e + active[i] as u32)).collect();
        RatFun::build(num, factors)
    }

    pub fn derivative(&self) -> RatFun {
        self.derive(DiffPoly::derivative)
    }

    pub fn derivatives(&self, k: usize) -> Vec<RatFun> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.clone());
        for i in 0..k {
            let next = out[i].derivative();
            out.push(next);
        }
        out
    }

    pub fn nth_derivative(&self, k: usize) -> RatFun {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.derivative();
        }
        out
    }

    pub fn partial(&self, v: JetVar) -> RatFun {
        self.derive(|p| p.partial(v))
    }

    /// `X_F(self) = Σ F^(k) ∂self/∂u^(k)` for a rational characteristic `F`.
    pub fn evo(&self, f: &RatFun) -> RatFun {
        let Some(top) = self.diff_order() else { return RatFun::zero() };
        let ders = f.derivatives(top as usize);
        let mut acc = RatFun::zero();
        for (k, fk) in ders.iter().enumerate() {
            let part = self.partial(JetVar::u(k as u32));
            if !part.is_zero() {
                acc += &(fk * &part);
            }
        }
        acc
    }

    /// Sum of `c_i * f_i` for rational constants.
    pub fn linear_combination<'a>(items: impl IntoIterator<Item = (&'a Q, &'a RatFun)>) -> RatFun {
        let mut acc = RatFun::zero();
        for (c, f) in items {
            if !c.is_zero() {
                acc += &f.scale(c);
            }
        }
        acc
    }

    /// Writes every input over one denominator `D`: returns `1/D` and the numerators.
    pub fn common_denominator(fs: &[RatFun]) -> (RatFun, Vec<DiffPoly>) {
        let mut union: Factors = Vec::new();
        for f in fs {
            for (g, e) in &f.factors {
                match union.iter_mut().find(|(h, _)| h == g) {
                    Some((_, k)) => *k = (*k).max(*e),
                    None => union.push((g.clone(), *e)),
                }
            }
        }
        let nums = fs
            .iter()
            .map(|f| {
                let missing = partial_product(&union, |i| {
                    let own = f.factors.iter().find(|(h, _)| *h == union[i].0).map_or(0, |(_, e)| *e);
                    union[i].1 - own
                });
                &f.num * &missing
            })
            .collect();
        (RatFun::build_uncancelled(DiffPoly::one(), union), nums)
    }
}

/// Multiplies both parts by a monomial so that neither has negative exponents.
fn clear_laurent(num: DiffPoly, den: DiffPoly) -> (DiffPoly, DiffPoly) {
    if !num.has_negative_exponents() && !den.has_negative_exponents() {
        return (num, den);
    }
    let m = num.monomial_content().min_with(&den.monomial_content());
    let fix = Monomial::from_pairs(m.factors().iter().filter(|&&(_, e)| e < 0).map(|&(v, e)| (v, -e)));
    (num.mul_monomial(&fix, &Q::one()), den.mul_monomial(&fix, &Q::one()))
}

impl PartialEq for RatFun {
    fn eq(&self, other: &RatFun) -> bool {
        if same_factors(&self.factors, &other.factors) {
            return self.num == other.num;
        }
        (self - other).is_zero()
    }
}

impl Eq for RatFun {}

impl From<DiffPoly> for RatFun {
    fn from(p: DiffPoly) -> RatFun {
        RatFun::from_poly(p)
    }
}

impl From<i64> for RatFun {
    fn from(n: i64) -> RatFun {
        RatFun::int(n)
    }
}

impl Add<&RatFun> for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.factors.is_empty() && rhs.factors.is_empty() {
            return RatFun::build_uncancelled(&self.num + &rhs.num, Vec::new());
        }
        if same_factors(&self.factors, &rhs.factors) {
            return RatFun::build(&self.num + &rhs.num, self.factors.clone());
        }
        let (inv, nums) = RatFun::common_denominator(&[self.clone(), rhs.clone()]);
        RatFun::build(&nums[0] + &nums[1], inv.factors)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: -&self.num, factors: self.factors.clone(), den: self.den.clone() }
    }
}

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl Sub<&RatFun> for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul<&RatFun> for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        if self.factors.is_empty() && rhs.factors.is_empty() {
            return RatFun::build_uncancelled(&self.num * &rhs.num, Vec::new());
        }
        // cross-cancel before multiplying out
        let mut n1 = self.num.clone();
        let mut f2 = rhs.factors.clone();
        cancel(&mut n1, &mut f2);
        let mut n2 = rhs.num.clone();
        let mut f1 = self.factors.clone();
        cancel(&mut n2, &mut f1);
        let mut scale = Q::one();
        for (g, e) in f2 {
            scale *= insert_factor(&mut f1, g, e);
        }
        RatFun::build_uncancelled((&n1 * &n2).scale(&scale.recip()), f1)
    }
}

impl Div<&RatFun> for &RatFun {
    type Output = RatFun;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &RatFun) -> RatFun {
        self * &rhs.recip()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: &RatFun) -> RatFun {
                (&self).$m(rhs)
            }
        }
        impl $tr<RatFun> for &RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&RatFun> for RatFun {
    fn add_assign(&mut self, rhs: &RatFun) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&RatFun> for RatFun {
    fn sub_assign(&mut self, rhs: &RatFun) {
        *self = &*self - rhs;
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.to_laurent() {
            return write!(f, "{l}");
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({self})")
    }
}
