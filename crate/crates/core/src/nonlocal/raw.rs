//! Uncanonicalized sums `E + Σ f₀∂⁻¹f₁∂⁻¹…∂⁻¹f_k` and their reduction.

use num_traits::Zero;

use crate::calculus::integrate;
use crate::diffop::DiffOp;
use crate::linalg::{basis_mod_total_derivatives, constant_linear_basis};
use crate::poly::DiffPoly;
use crate::ratfun::RatFun;

use super::{NonlocalError, NonlocalOp};

/// `f₀∂⁻¹f₁…∂⁻¹f_k`; the depth is `len − 1`.
pub(crate) type Word = Vec<RatFun>;

#[derive(Clone, Debug, Default)]
pub(crate) struct Raw {
    pub local: DiffOp,
    pub words: Vec<Word>,
}

impl Raw {
    pub fn from_op(l: &NonlocalOp) -> Raw {
        let mut words: Vec<Word> = l.depth1.iter().map(|(p, q)| vec![p.clone(), q.clone()]).collect();
        words.extend(l.depth2.iter().map(|(a, b, c)| vec![a.clone(), b.clone(), c.clone()]));
        Raw { local: l.local.clone(), words }
    }

    pub fn add(&mut self, other: Raw) {
        self.local = &self.local + &other.local;
        self.words.extend(other.words);
    }

    pub fn neg(mut self) -> Raw {
        self.local = -&self.local;
        for w in &mut self.words {
            w[0] = -&w[0];
        }
        self
    }

    pub fn mul(&self, rhs: &Raw) -> Raw {
        let mut out = Raw { local: self.local.mul_op(&rhs.local), words: Vec::new() };
        for w in &rhs.words {
            out.add(op_times_word(&self.local, w));
        }
        for w in &self.words {
            out.add(word_times_op(w, &rhs.local));
            for v in &rhs.words {
                out.words.push(concat(w, v));
            }
        }
        out
    }

    /// Applies a derivation to every coefficient and slot.
    pub fn map_derivation(&self, d: impl Fn(&RatFun) -> RatFun) -> Raw {
        let local = DiffOp::from_coeffs(self.local.coeffs().iter().map(&d).collect());
        let mut words = Vec::new();
        for w in &self.words {
            for i in 0..w.len() {
                let mut v = w.clone();
                v[i] = d(&w[i]);
                words.push(v);
            }
        }
        Raw { local, words }
    }
}

fn concat(w: &Word, v: &Word) -> Word {
    let mut out = w[..w.len() - 1].to_vec();
    out.push(&w[w.len() - 1] * &v[0]);
    out.extend_from_slice(&v[1..]);
    out
}

/// `X · f₀∂⁻¹(rest)`, using `X f₀ = C∂ + r`.
fn op_times_word(x: &DiffOp, w: &Word) -> Raw {
    if x.is_zero() {
        return Raw::default();
    }
    let (c, r) = x.mul_op(&DiffOp::scalar(w[0].clone())).right_divide(&DiffOp::d());
    let mut out = Raw::default();
    let r = r.coeff(0);
    if !r.is_zero() {
        let mut v = w.clone();
        v[0] = r;
        out.words.push(v);
    }
    if !c.is_zero() {
        if w.len() == 2 {
            out.local = c.mul_op(&DiffOp::scalar(w[1].clone()));
        } else {
            out.add(op_times_word(&c, &w[1..].to_vec()));
        }
    }
    out
}

/// `(rest)∂⁻¹f_k · X`, using `f_k X = ∂D + r`.
fn word_times_op(w: &Word, x: &DiffOp) -> Raw {
    if x.is_zero() {
        return Raw::default();
    }
    let k = w.len() - 1;
    let (d, r) = DiffOp::scalar(w[k].clone()).mul_op(x).left_divide(&DiffOp::d());
    let mut out = Raw::default();
    let r = r.coeff(0);
    if !r.is_zero() {
        let mut v = w.clone();
        v[k] = r;
        out.words.push(v);
    }
    if !d.is_zero() {
        if k == 1 {
            out.local = DiffOp::scalar(w[0].clone()).mul_op(&d);
        } else {
            out.add(word_times_op(&w[..k].to_vec(), &d));
        }
    }
    out
}

fn laurent(f: &RatFun) -> Result<DiffPoly, NonlocalError> {
    f.to_laurent().ok_or_else(|| NonlocalError::Unsupported(format!("middle slot {f} is not a Laurent polynomial")))
}

/// Rewrites `…f_{i−1}∂⁻¹h′∂⁻¹f_{i+1}…` via `∂⁻¹h′∂⁻¹ = h∂⁻¹ − ∂⁻¹h`.
fn split_at(w: &Word, i: usize, h: &RatFun) -> [Word; 2] {
    let mut left = w[..i].to_vec();
    let last = left.len() - 1;
    left[last] = &left[last] * h;
    left.extend_from_slice(&w[i + 1..]);
    let mut right = w[..i].to_vec();
    right.push(h * &w[i + 1]);
    right.extend_from_slice(&w[i + 2..]);
    right[0] = -&right[0];
    [left, right]
}

/// Minimal-rank form of `Σ pₜ ⊗ qₜ`: right slots in reduced echelon form,
/// left slots determined by them.
fn rank_decompose(pairs: &[(RatFun, RatFun)]) -> Vec<(RatFun, RatFun)> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let qs: Vec<RatFun> = pairs.iter().map(|(_, q)| q.clone()).collect();
    let lb = constant_linear_basis(&qs);
    let ps: Vec<RatFun> = (0..lb.basis.len())
        .map(|j| RatFun::linear_combination(pairs.iter().zip(&lb.coords).map(|((p, _), c)| (&c[j], p))))
        .collect();
    let la = constant_linear_basis(&ps);
    let q2: Vec<RatFun> = (0..la.basis.len())
        .map(|k| RatFun::linear_combination(lb.basis.iter().zip(&la.coords).map(|(b, d)| (&d[k], b))))
        .collect();
    let lq = constant_linear_basis(&q2);
    (0..lq.basis.len())
        .map(|m| {
            let p = RatFun::linear_combination(la.basis.iter().zip(&lq.coords).map(|(a, e)| (&e[m], a)));
            (p, lq.basis[m].clone())
        })
        .filter(|(p, _)| !p.is_zero())
        .collect()
}

pub(crate) fn canonicalize(raw: Raw) -> Result<NonlocalOp, NonlocalError> {
    let local = raw.local;
    let mut pending: Vec<Word> = raw.words;
    let mut d1: Vec<(RatFun, RatFun)> = Vec::new();
    let mut d2: Vec<Word> = Vec::new();
    while let Some(w) = pending.pop() {
        if w.iter().any(RatFun::is_zero) {
            continue;
        }
        match w.len() {
            2 => d1.push((w[0].clone(), w[1].clone())),
            3 => d2.push(w),
            _ => {
                let mut done = false;
                for i in 1..w.len() - 1 {
                    if let Some(Ok(h)) = w[i].to_laurent().map(|f| integrate(&f)) {
                        pending.extend(split_at(&w, i, &RatFun::from_poly(h)));
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(NonlocalError::DepthOverflow);
                }
            }
        }
    }

    let middles: Vec<DiffPoly> = d2.iter().map(|w| laurent(&w[1])).collect::<Result<_, _>>()?;
    let mb = basis_mod_total_derivatives(&middles).map_err(|e| NonlocalError::Unsupported(e.to_string()))?;
    let mut groups: Vec<Vec<(RatFun, RatFun)>> = vec![Vec::new(); mb.basis.len()];
    for (i, w) in d2.iter().enumerate() {
        for (j, c) in mb.coords[i].iter().enumerate() {
            if !c.is_zero() {
                groups[j].push((w[0].scale(c), w[2].clone()));
            }
        }
        if !mb.exact[i].is_zero() {
            let h = RatFun::from_poly(mb.exact[i].clone());
            let [a, b] = split_at(w, 1, &h);
            d1.push((a[0].clone(), a[1].clone()));
            d1.push((b[0].clone(), b[1].clone()));
        }
    }
    let mut depth2 = Vec::new();
    for (j, g) in groups.iter().enumerate() {
        let beta = RatFun::from_poly(mb.basis[j].clone());
        for (a, c) in rank_decompose(g) {
            depth2.push((a, beta.clone(), c));
        }
    }
    let depth1 = rank_decompose(&d1);
    Ok(NonlocalOp { local, depth1, depth2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u32) -> RatFun {
        RatFun::u(n)
    }

    #[test]
    fn test_op_times_word_examples() {
        // ∂ · ∂⁻¹q = q
        let r = op_times_word(&DiffOp::d(), &vec![RatFun::one(), u(0)]);
        assert!(r.words.is_empty());
        assert_eq!(r.local, DiffOp::scalar(u(0)));
        // ∂ · p∂⁻¹q = p q + p′∂⁻¹q
        let r = op_times_word(&DiffOp::d(), &vec![u(1), RatFun::one()]);
        assert_eq!(r.local, DiffOp::scalar(u(1)));
        assert_eq!(r.words, vec![vec![u(2), RatFun::one()]]);
    }

    #[test]
    fn test_word_times_op_examples() {
        // ∂⁻¹u″ · ∂ = u″ − ∂⁻¹u‴
        let r = word_times_op(&vec![RatFun::one(), u(2)], &DiffOp::d());
        assert_eq!(r.local, DiffOp::scalar(u(2)));
        assert_eq!(r.words, vec![vec![RatFun::one(), -u(3)]]);
    }

    #[test]
    fn test_rank_decompose_merges() {
        let pairs = vec![(u(1), RatFun::one()), (u(1), RatFun::one())];
        assert_eq!(rank_decompose(&pairs), vec![(u(1).scale(&crate::poly::q(2)), RatFun::one())]);
        let pairs = vec![(u(1), u(0)), (-u(1), u(0))];
        assert!(rank_decompose(&pairs).is_empty());
    }
}
