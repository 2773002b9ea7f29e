//! Defining matrix representations of the classical realizations, used
//! by the trace-power invariants and the Pfaffian.
//!
//! A_l acts on l+1 columns; B_l, C_l, D_l act on the split orthogonal or
//! symplectic space with basis (u_1..u_l, [u_0,] u_{-l}..u_{-1}) and the
//! antidiagonal pairing. G_2 inherits the 8-dimensional action through
//! its embedding into the triality-folded D_4; the invariant vector
//! contributes nothing to traces, so the 8-column traces realize the
//! 7-column fundamental ones. Every representation is verified to be a
//! Lie-algebra homomorphism on all basis pairs.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::chevalley::{
    automorphism_matrix, extraspecial_pair, fixed_subalgebra, realize, ChevError, LieRealization,
};
use crate::folding::{make_folding, FoldingPair};
use crate::linalg::Matrix;
use crate::rootsys::Family;
use crate::scalar::Ring;
use crate::Rat;

/// A verified matrix representation of a realization.
#[derive(Clone, Debug)]
pub struct VectorRep {
    pub n: usize,
    /// One n×n matrix per basis element of the realization.
    pub mats: Vec<Matrix<Rat>>,
    /// For D-types: the antidiagonal pairing Q with Q·M(v) skew.
    pub skew_form: Option<Matrix<Rat>>,
}

fn unit(n: usize, i: usize, j: usize, c: i64) -> Matrix<Rat> {
    let mut m = Matrix::zero(n, n);
    m[(i, j)] = Rat::from(BigInt::from(c));
    m
}

fn commutator(a: &Matrix<Rat>, b: &Matrix<Rat>) -> Matrix<Rat> {
    a.mul(b).sub(&b.mul(a))
}

/// Generator matrices (e_i, f_i) for the classical families.
fn classical_generators(family: Family, l: usize) -> Option<(usize, Vec<Matrix<Rat>>, Vec<Matrix<Rat>>)> {
    match family {
        Family::A => {
            let n = l + 1;
            let e = (0..l).map(|i| unit(n, i, i + 1, 1)).collect();
            let f = (0..l).map(|i| unit(n, i + 1, i, 1)).collect();
            Some((n, e, f))
        }
        Family::B => {
            let n = 2 * l + 1;
            // basis (u_1..u_l, u_0, u_{-l}..u_{-1})
            let pos = |k: usize| k - 1;
            let zero_idx = l;
            let neg = |k: usize| n - k;
            let mut e = Vec::new();
            let mut f = Vec::new();
            for i in 1..l {
                e.push(
                    unit(n, pos(i), pos(i + 1), 1).sub(&unit(n, neg(i + 1), neg(i), 1)),
                );
                f.push(
                    unit(n, pos(i + 1), pos(i), 1).sub(&unit(n, neg(i), neg(i + 1), 1)),
                );
            }
            e.push(unit(n, pos(l), zero_idx, 1).sub(&unit(n, zero_idx, neg(l), 1)));
            f.push(unit(n, zero_idx, pos(l), 2).sub(&unit(n, neg(l), zero_idx, 2)));
            Some((n, e, f))
        }
        Family::C => {
            let n = 2 * l;
            let pos = |k: usize| k - 1;
            let neg = |k: usize| n - k;
            let mut e = Vec::new();
            let mut f = Vec::new();
            for i in 1..l {
                e.push(
                    unit(n, pos(i), pos(i + 1), 1).sub(&unit(n, neg(i + 1), neg(i), 1)),
                );
                f.push(
                    unit(n, pos(i + 1), pos(i), 1).sub(&unit(n, neg(i), neg(i + 1), 1)),
                );
            }
            e.push(unit(n, pos(l), neg(l), 1));
            f.push(unit(n, neg(l), pos(l), 1));
            Some((n, e, f))
        }
        Family::D => {
            let n = 2 * l;
            let pos = |k: usize| k - 1;
            let neg = |k: usize| n - k;
            let mut e = Vec::new();
            let mut f = Vec::new();
            for i in 1..l {
                e.push(
                    unit(n, pos(i), pos(i + 1), 1).sub(&unit(n, neg(i + 1), neg(i), 1)),
                );
                f.push(
                    unit(n, pos(i + 1), pos(i), 1).sub(&unit(n, neg(i), neg(i + 1), 1)),
                );
            }
            e.push(unit(n, pos(l - 1), neg(l), 1).sub(&unit(n, pos(l), neg(l - 1), 1)));
            f.push(unit(n, neg(l), pos(l - 1), 1).sub(&unit(n, neg(l - 1), pos(l), 1)));
            Some((n, e, f))
        }
        _ => None,
    }
}

impl VectorRep {
    /// Defining representation for A/B/C/D realizations, the inherited
    /// 8-column action for G_2. Errors for F_4 and E_6.
    pub fn for_realization(r: &LieRealization) -> Result<VectorRep, ChevError> {
        match r.datum.family {
            Family::A | Family::B | Family::C | Family::D => Self::classical(r),
            Family::G => Self::g2_via_triality(r),
            _ => Err(ChevError::Invariant(format!(
                "no defining matrix model for {}",
                r.datum.name()
            ))),
        }
    }

    fn classical(r: &LieRealization) -> Result<VectorRep, ChevError> {
        let l = r.rank();
        let (n, gen_e, gen_f) =
            classical_generators(r.datum.family, l).expect("classical family");
        let npos = r.datum.positive_roots.len();
        let simple_root_index: Vec<usize> = (0..l)
            .map(|i| {
                let mut root = vec![0i64; l];
                root[i] = 1;
                r.datum.root_index(&root).unwrap()
            })
            .collect();
        let mut e_img: Vec<Option<Matrix<Rat>>> = vec![None; npos];
        let mut f_img: Vec<Option<Matrix<Rat>>> = vec![None; npos];
        for i in 0..l {
            e_img[simple_root_index[i]] = Some(gen_e[i].clone());
            f_img[simple_root_index[i]] = Some(gen_f[i].clone());
        }
        let mut order: Vec<usize> = (0..npos).collect();
        order.sort_by_key(|&g| r.datum.positive_roots[g].iter().sum::<i64>());
        for &g in &order {
            if e_img[g].is_some() {
                continue;
            }
            let (ai, bi, _) = extraspecial_pair(&r.datum, g);
            let ne = coeff_of(r, r.e_index(ai), r.e_index(bi), r.e_index(g));
            let nf = coeff_of(r, r.f_index(ai), r.f_index(bi), r.f_index(g));
            if ne == 0 || nf == 0 {
                return Err(ChevError::Invariant(format!(
                    "missing extraspecial constant for root {g}"
                )));
            }
            let se = Rat::from(BigInt::from(ne)).recip();
            let sf = Rat::from(BigInt::from(nf)).recip();
            e_img[g] = Some(
                commutator(e_img[ai].as_ref().unwrap(), e_img[bi].as_ref().unwrap()).scale(&se),
            );
            f_img[g] = Some(
                commutator(f_img[ai].as_ref().unwrap(), f_img[bi].as_ref().unwrap()).scale(&sf),
            );
        }
        let mut mats = Vec::with_capacity(r.dim);
        for i in 0..l {
            let hi = commutator(
                e_img[simple_root_index[i]].as_ref().unwrap(),
                f_img[simple_root_index[i]].as_ref().unwrap(),
            );
            mats.push(hi);
        }
        for g in 0..npos {
            mats.push(e_img[g].clone().unwrap());
            mats.push(f_img[g].clone().unwrap());
        }
        let skew_form = if r.datum.family == Family::D {
            let mut q = Matrix::zero(n, n);
            for i in 0..n {
                q[(i, n - 1 - i)] = Rat::one();
            }
            Some(q)
        } else {
            None
        };
        let rep = VectorRep { n, mats, skew_form };
        rep.verify(r)?;
        Ok(rep)
    }

    fn g2_via_triality(r: &LieRealization) -> Result<VectorRep, ChevError> {
        let d4 = realize(Family::D, 4)?;
        let spec = make_folding(FoldingPair::D4G2, 4)?;
        let sigma = automorphism_matrix(&d4, &spec)?;
        let emb = fixed_subalgebra(&d4, &sigma, &spec)?;
        if emb.own.dim != r.dim || emb.own.datum != r.datum {
            return Err(ChevError::Invariant(
                "triality embedding does not match the G2 realization".into(),
            ));
        }
        let d4_rep = VectorRep::classical(&d4)?;
        let mats = (0..r.dim)
            .map(|idx| d4_rep.matrix_of(&emb.member_basis[idx]))
            .collect();
        let rep = VectorRep { n: d4_rep.n, mats, skew_form: None };
        rep.verify(r)?;
        Ok(rep)
    }

    /// Matrix image of a rational vector.
    pub fn matrix_of(&self, v: &[Rat]) -> Matrix<Rat> {
        let mut acc = Matrix::zero(self.n, self.n);
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&self.mats[i].scale(c));
        }
        acc
    }

    /// The skew matrix Q·M(v) whose Pfaffian is the degree-l invariant
    /// of a D-type realization.
    pub fn skew_of(&self, v: &[Rat]) -> Option<Matrix<Rat>> {
        let q = self.skew_form.as_ref()?;
        let m = q.mul(&self.matrix_of(v));
        debug_assert_eq!(m, m.transpose().scale(&-Rat::one()));
        Some(m)
    }

    fn verify(&self, r: &LieRealization) -> Result<(), ChevError> {
        for a in 0..r.dim {
            for b in a + 1..r.dim {
                let lhs = commutator(&self.mats[a], &self.mats[b]);
                let mut rhs = Matrix::zero(self.n, self.n);
                for &(i, c) in r.bracket_basis(a, b) {
                    rhs = rhs.add(&self.mats[i].scale(&Rat::from(BigInt::from(c))));
                }
                if lhs != rhs {
                    return Err(ChevError::Invariant(format!(
                        "matrix model is not a homomorphism on pair ({a},{b})"
                    )));
                }
            }
        }
        if let Some(q) = &self.skew_form {
            for m in &self.mats {
                let s = q.mul(m);
                if s != s.transpose().scale(&-Rat::one()) {
                    return Err(ChevError::Invariant(
                        "D-type image is not skew for the split pairing".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn coeff_of(r: &LieRealization, a: usize, b: usize, target: usize) -> i64 {
    r.bracket_basis(a, b)
        .iter()
        .find(|&&(i, _)| i == target)
        .map(|&(_, c)| c)
        .unwrap_or(0)
}

/// Pfaffian of a skew-symmetric matrix by expansion along the first row.
pub fn pfaffian<T: Ring>(m: &Matrix<T>) -> T {
    let n = m.rows;
    assert_eq!(n, m.cols);
    if n % 2 != 0 {
        return T::zero();
    }
    let idx: Vec<usize> = (0..n).collect();
    pfaffian_rec(m, &idx)
}

fn pfaffian_rec<T: Ring>(m: &Matrix<T>, idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::one();
    }
    let first = idx[0];
    let mut acc = T::zero();
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let a = m[(first, j)].clone();
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != 0 && p != pos)
            .map(|(_, &v)| v)
            .collect();
        let term = a * pfaffian_rec(m, &rest);
        // sign (-1)^pos with pos the 0-based position of j after the pivot
        if pos % 2 == 1 {
            acc = acc + term;
        } else {
            acc = acc - term;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: i64) -> Rat {
        Rat::from(BigInt::from(v))
    }

    #[test]
    fn sl2_defining_rep() {
        let a1 = realize(Family::A, 1).unwrap();
        let rep = VectorRep::for_realization(&a1).unwrap();
        assert_eq!(rep.n, 2);
        // h acts as diag(1, -1)
        let h = &rep.mats[0];
        assert_eq!(h[(0, 0)], rat(1));
        assert_eq!(h[(1, 1)], rat(-1));
    }

    #[test]
    fn classical_models_verify() {
        for (f, l, n) in [
            (Family::A, 3usize, 4usize),
            (Family::B, 2, 5),
            (Family::B, 3, 7),
            (Family::C, 2, 4),
            (Family::C, 3, 6),
            (Family::D, 4, 8),
        ] {
            let r = realize(f, l).unwrap();
            let rep = VectorRep::for_realization(&r).unwrap();
            assert_eq!(rep.n, n, "{f}{l}");
        }
    }

    #[test]
    fn g2_eight_column_action() {
        let g2 = realize(Family::G, 2).unwrap();
        let rep = VectorRep::for_realization(&g2).unwrap();
        assert_eq!(rep.n, 8);
        // each matrix is traceless and the action fixes a vector up to
        // nothing visible here; the hom check ran inside for_realization
        for m in &rep.mats {
            assert!(m.trace().is_zero());
        }
    }

    #[test]
    fn pfaffian_small_cases() {
        let m = Matrix::from_i64_rows(&[vec![0, 3], vec![-3, 0]]);
        assert_eq!(pfaffian(&m), rat(3));
        let m4 = Matrix::from_i64_rows(&[
            vec![0, 1, 2, 3],
            vec![-1, 0, 4, 5],
            vec![-2, -4, 0, 6],
            vec![-3, -5, -6, 0],
        ]);
        // a12 a34 - a13 a24 + a14 a23
        assert_eq!(pfaffian(&m4), rat(1 * 6 - 2 * 5 + 3 * 4));
        // Pf(A)^2 = det(A)
        assert_eq!(pfaffian(&m4).clone() * pfaffian(&m4), m4.det());
    }

    #[test]
    fn d4_skew_model() {
        let d4 = realize(Family::D, 4).unwrap();
        let rep = VectorRep::for_realization(&d4).unwrap();
        assert!(rep.skew_form.is_some());
        let v: Vec<Rat> = (0..d4.dim).map(|i| rat((i % 5) as i64 - 2)).collect();
        let s = rep.skew_of(&v).unwrap();
        assert_eq!(s, s.transpose().scale(&rat(-1)));
    }
}
