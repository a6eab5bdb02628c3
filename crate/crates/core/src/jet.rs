//! Jet variables and monomials over them.

use std::cmp::Ordering;
use std::fmt;

/// A differential indeterminate. `u` is the field variable; `F`, `G`, `H`
/// are formal symbols used to state identities "for all F".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Indet(u8);

const NAMES: [&str; 4] = ["u", "F", "G", "H"];

impl Indet {
    pub const U: Indet = Indet(0);
    pub const F: Indet = Indet(1);
    pub const G: Indet = Indet(2);
    pub const H: Indet = Indet(3);

    pub const ALL: [Indet; 4] = [Indet::U, Indet::F, Indet::G, Indet::H];

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }

    pub fn from_name(s: &str) -> Option<Indet> {
        NAMES.iter().position(|n| *n == s).map(|i| Indet(i as u8))
    }

    pub fn jet(self, order: u32) -> JetVar {
        JetVar { indet: self, order }
    }
}

impl fmt::Display for Indet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The symbol `w^(n)` for an indeterminate `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub indet: Indet,
    pub order: u32,
}

impl JetVar {
    pub fn u(order: u32) -> JetVar {
        JetVar { indet: Indet::U, order }
    }

    pub fn next(self) -> JetVar {
        JetVar { indet: self.indet, order: self.order + 1 }
    }

    pub fn prev(self) -> Option<JetVar> {
        self.order.checked_sub(1).map(|order| JetVar { indet: self.indet, order })
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order <= 3 {
            write!(f, "{}{}", self.indet, "'".repeat(self.order as usize))
        } else {
            write!(f, "{}({})", self.indet, self.order)
        }
    }
}

/// A Laurent monomial: sorted `(var, exponent)` pairs with nonzero exponents.
///
/// Ordered graded-lexicographically: total degree first, then exponents
/// compared from the largest variable down.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(JetVar, i32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: JetVar) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn var_pow(v: JetVar, e: i32) -> Monomial {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    /// Builds a monomial from arbitrary pairs, merging repeats and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (JetVar, i32)>) -> Monomial {
        let mut m = Monomial::one();
        for (v, e) in pairs {
            m = m.mul_var(v, e);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(JetVar, i32)] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e as i64).sum()
    }

    pub fn degree_in(&self, indet: Indet) -> i64 {
        self.0.iter().filter(|(v, _)| v.indet == indet).map(|&(_, e)| e as i64).sum()
    }

    pub fn exponent(&self, v: JetVar) -> i32 {
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn has_negative(&self) -> bool {
        self.0.iter().any(|&(_, e)| e < 0)
    }

    /// Multiplies by `v^e`.
    pub fn mul_var(&self, v: JetVar, e: i32) -> Monomial {
        if e == 0 {
            return self.clone();
        }
        let mut out = self.0.clone();
        match out.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => {
                out[i].1 += e;
                if out[i].1 == 0 {
                    out.remove(i);
                }
            }
            Err(i) => out.insert(i, (v, e)),
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|&(v, e)| (v, -e)).collect())
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    /// `self / other` when every exponent stays non-negative.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let q = self.mul(&other.inverse());
        if q.has_negative() {
            None
        } else {
            Some(q)
        }
    }

    /// Componentwise minimum of exponents (missing variables count as 0).
    pub fn min_with(&self, other: &Monomial) -> Monomial {
        let mut vars: Vec<JetVar> = self.0.iter().chain(other.0.iter()).map(|&(v, _)| v).collect();
        vars.sort();
        vars.dedup();
        Monomial(
            vars.into_iter()
                .filter_map(|v| {
                    let e = self.exponent(v).min(other.exponent(v));
                    (e != 0).then_some((v, e))
                })
                .collect(),
        )
    }

    pub fn vars(&self) -> impl Iterator<Item = JetVar> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    /// Removes `v` entirely, returning the remaining monomial and the exponent of `v`.
    pub fn split_var(&self, v: JetVar) -> (Monomial, i32) {
        let e = self.exponent(v);
        (self.mul_var(v, -e), e)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.0.iter().map(|(v, _)| v.order).max()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (a.len(), b.len());
            while i > 0 || j > 0 {
                let ord = match (i.checked_sub(1).map(|k| a[k]), j.checked_sub(1).map(|k| b[k])) {
                    (Some((va, ea)), Some((vb, eb))) => match va.cmp(&vb) {
                        Ordering::Equal => {
                            i -= 1;
                            j -= 1;
                            ea.cmp(&eb)
                        }
                        Ordering::Greater => {
                            i -= 1;
                            ea.cmp(&0)
                        }
                        Ordering::Less => {
                            j -= 1;
                            0.cmp(&eb)
                        }
                    },
                    (Some((_, ea)), None) => {
                        i -= 1;
                        ea.cmp(&0)
                    }
                    (None, Some((_, eb))) => {
                        j -= 1;
                        0.cmp(&eb)
                    }
                    (None, None) => unreachable!(),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        // positive powers first, then the Laurent factors
        let ordered = self.0.iter().filter(|f| f.1 > 0).chain(self.0.iter().filter(|f| f.1 < 0));
        for (i, &(v, e)) in ordered.enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}
