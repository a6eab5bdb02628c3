//! ℚ-linear algebra on lists of functions: bases over constants and modulo ∂V.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::calculus::{integrate, JetError};
use crate::jet::{Indet, Monomial};
use crate::poly::{euler, DiffPoly, Q};
use crate::ratfun::RatFun;

type SparseVec<K> = BTreeMap<K, Q>;

fn axpy<K: Ord + Clone>(y: &mut SparseVec<K>, a: &Q, x: &SparseVec<K>) {
    for (k, v) in x {
        let e = y.entry(k.clone()).or_insert_with(Q::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(k);
        }
    }
}

/// Incremental echelon form that remembers how each row was built from
/// the accepted inputs.
struct Echelon<K> {
    rows: Vec<(K, SparseVec<K>, Vec<Q>)>,
    accepted: usize,
}

impl<K: Ord + Clone> Echelon<K> {
    fn new() -> Self {
        Echelon { rows: Vec::new(), accepted: 0 }
    }

    /// Inserts `v`. Returns `Ok(index)` if it was independent, otherwise
    /// `Err(coords)` expressing it in the accepted vectors.
    fn insert(&mut self, v: &SparseVec<K>) -> Result<usize, Vec<Q>> {
        let mut v = v.clone();
        let mut combo = vec![Q::zero(); self.accepted];
        for (p, row, rc) in &self.rows {
            if let Some(c) = v.get(p).cloned() {
                axpy(&mut v, &-c.clone(), row);
                for (slot, r) in combo.iter_mut().zip(rc) {
                    *slot += &c * r;
                }
            }
        }
        if v.is_empty() {
            return Err(combo);
        }
        // v_reduced = v_in - Σ combo·rows  ⇒  row = (e_new - combo) / lead
        let (pivot, lead) = v.iter().next_back().map(|(k, c)| (k.clone(), c.clone())).unwrap();
        let inv = lead.recip();
        let row: SparseVec<K> = v.into_iter().map(|(k, c)| (k, c * &inv)).collect();
        let mut rc: Vec<Q> = combo.iter().map(|c| -c * &inv).collect();
        rc.push(inv);
        for (_, _, other) in self.rows.iter_mut() {
            other.push(Q::zero());
        }
        self.rows.push((pivot, row, rc));
        self.accepted += 1;
        Ok(self.accepted - 1)
    }
}

/// Fully reduced row echelon basis of the span, rows sorted by pivot
/// ascending, plus the coordinates of every input in that basis.
fn rref<K: Ord + Clone>(vs: &[SparseVec<K>]) -> (Vec<SparseVec<K>>, Vec<Vec<Q>>) {
    let mut rows: Vec<(K, SparseVec<K>)> = Vec::new();
    for v in vs {
        let mut v = v.clone();
        for (p, row) in &rows {
            if let Some(c) = v.get(p).cloned() {
                axpy(&mut v, &-c, row);
            }
        }
        let Some((pivot, lead)) = v.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) else { continue };
        let inv = lead.recip();
        let v: SparseVec<K> = v.into_iter().map(|(k, c)| (k, c * &inv)).collect();
        for (_, row) in rows.iter_mut() {
            if let Some(c) = row.get(&pivot).cloned() {
                axpy(row, &-c, &v);
            }
        }
        rows.push((pivot, v));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let coords =
        vs.iter().map(|v| rows.iter().map(|(p, _)| v.get(p).cloned().unwrap_or_else(Q::zero)).collect()).collect();
    (rows.into_iter().map(|(_, r)| r).collect(), coords)
}

/// A basis of the ℚ-span of some functions with the coordinates of each input.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearBasis {
    pub basis: Vec<RatFun>,
    pub coords: Vec<Vec<Q>>,
}

/// Brings a list of rational functions over a common denominator.
fn common_numerators(fs: &[RatFun]) -> (RatFun, Vec<SparseVec<Monomial>>) {
    let (inv_den, nums) = RatFun::common_denominator(fs);
    let vecs = nums.iter().map(|p| p.terms().map(|(m, c)| (m.clone(), c.clone())).collect()).collect();
    (inv_den, vecs)
}

/// Reduced echelon basis of `span_ℚ(fs)`; canonical for a given span.
pub fn constant_linear_basis(fs: &[RatFun]) -> LinearBasis {
    let (inv_den, vecs) = common_numerators(fs);
    let (rows, coords) = rref(&vecs);
    let basis = rows.into_iter().map(|r| &RatFun::from_poly(DiffPoly::from_terms(r)) * &inv_den).collect();
    LinearBasis { basis, coords }
}

/// Coordinates of `fs` in the ℚ-span of `basis` if every element lies in it.
pub fn express_in(basis: &[RatFun], fs: &[RatFun]) -> Option<Vec<Vec<Q>>> {
    let mut all = basis.to_vec();
    all.extend_from_slice(fs);
    let (_, vecs) = common_numerators(&all);
    let mut ech = Echelon::new();
    for v in &vecs[..basis.len()] {
        ech.insert(v).ok()?;
    }
    vecs[basis.len()..].iter().map(|v| ech.insert(v).err()).collect()
}

/// Whether the functions are linearly independent over ℚ.
pub fn independent(fs: &[RatFun]) -> bool {
    constant_linear_basis(fs).basis.len() == fs.len()
}

/// Basis of `span(fs)` modulo total derivatives:
/// `fs[i] = Σ_j coords[i][j]·basis[j] + ∂(exact[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModDerivBasis {
    pub basis: Vec<DiffPoly>,
    pub coords: Vec<Vec<Q>>,
    pub exact: Vec<DiffPoly>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum DerivKey {
    Euler(Indet, Monomial),
    Constant,
}

/// Greedy basis modulo ∂V: an input is kept iff it is independent of the
/// earlier kept inputs modulo total derivatives.
pub fn basis_mod_total_derivatives(fs: &[DiffPoly]) -> Result<ModDerivBasis, JetError> {
    let laurent = fs.iter().any(|f| f.has_negative_exponents());
    let vecs: Vec<SparseVec<DerivKey>> = fs
        .iter()
        .map(|f| {
            let mut v = SparseVec::new();
            for w in Indet::ALL {
                if f.contains_indet(w) {
                    for (m, c) in euler(f, w).terms() {
                        v.insert(DerivKey::Euler(w, m.clone()), c.clone());
                    }
                }
            }
            // without x, constants are not total derivatives of polynomials
            let c0 = f.constant_term();
            if !laurent && !c0.is_zero() {
                v.insert(DerivKey::Constant, c0);
            }
            v
        })
        .collect();
    let mut ech = Echelon::new();
    let mut basis: Vec<DiffPoly> = Vec::new();
    let mut raw_coords: Vec<Result<usize, Vec<Q>>> = Vec::new();
    for (f, v) in fs.iter().zip(&vecs) {
        let r = ech.insert(v);
        if r.is_ok() {
            basis.push(f.clone());
        }
        raw_coords.push(r);
    }
    let n = basis.len();
    let mut coords = Vec::with_capacity(fs.len());
    let mut exact = Vec::with_capacity(fs.len());
    for (f, r) in fs.iter().zip(raw_coords) {
        match r {
            Ok(j) => {
                let mut c = vec![Q::zero(); n];
                c[j] = Q::one();
                coords.push(c);
                exact.push(DiffPoly::zero());
            }
            Err(mut c) => {
                c.resize(n, Q::zero());
                let mut residual = f.clone();
                for (cj, g) in c.iter().zip(&basis) {
                    if !cj.is_zero() {
                        residual -= &g.scale(cj);
                    }
                }
                let h = integrate(&residual).map_err(|e| match e {
                    JetError::NotExact(r) => {
                        JetError::NotSupported(format!("{r} has zero variational derivative but is not exact"))
                    }
                    other => other,
                })?;
                coords.push(c);
                exact.push(h);
            }
        }
    }
    Ok(ModDerivBasis { basis, coords, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, q_frac};

    fn u(n: u32) -> DiffPoly {
        DiffPoly::u(n)
    }

    fn r(p: DiffPoly) -> RatFun {
        RatFun::from_poly(p)
    }

    #[test]
    fn test_constant_basis_examples() {
        let b = constant_linear_basis(&[r(u(0)), r(u(0).scale(&q(2)))]);
        assert_eq!(b.basis, vec![r(u(0))]);
        assert_eq!(b.coords, vec![vec![q(1)], vec![q(2)]]);

        let b = constant_linear_basis(&[r(u(0) + u(1)), r(u(0) - u(1)), r(u(0))]);
        assert_eq!(b.basis, vec![r(u(0)), r(u(1))]);

        assert!(constant_linear_basis(&[]).basis.is_empty());
    }

    #[test]
    fn test_constant_basis_with_denominators() {
        let a = &RatFun::one() / &RatFun::u(3);
        let b = &RatFun::u(2) / &RatFun::u(3);
        let c = &a.scale(&q(2)) - &b;
        let lb = constant_linear_basis(&[a.clone(), b.clone(), c]);
        assert_eq!(lb.basis.len(), 2);
        assert!(!independent(&[a.clone(), b.clone(), &a + &b]));
        assert_eq!(express_in(&[a.clone(), b.clone()], &[&a - &b]), Some(vec![vec![q(1), q(-1)]]));
    }

    #[test]
    fn test_mod_derivatives_examples() {
        let m = basis_mod_total_derivatives(&[u(1)]).unwrap();
        assert!(m.basis.is_empty());
        assert_eq!(m.exact, vec![u(0)]);

        let m = basis_mod_total_derivatives(&[u(0)]).unwrap();
        assert_eq!(m.basis, vec![u(0)]);

        let uu1 = &u(0) * &u(1);
        let uu = &u(0) * &u(0);
        let m = basis_mod_total_derivatives(&[uu1, uu.clone()]).unwrap();
        assert_eq!(m.basis, vec![uu.clone()]);
        assert_eq!(m.exact[0], uu.scale(&q_frac(1, 2)));
    }

    #[test]
    fn test_constants_are_not_exact() {
        let m = basis_mod_total_derivatives(&[DiffPoly::one(), u(1)]).unwrap();
        assert_eq!(m.basis, vec![DiffPoly::one()]);
    }
}
