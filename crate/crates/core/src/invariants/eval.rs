//! Evaluation kernels for alternating invariant forms.
//!
//! Both form constructions reduce to sums over restricted permutation
//! classes. The transgressed form of a degree-k invariant polynomial is
//!
//!   Σ_π sign(π) P(v_{π(1)}, [v_{π(2)}, v_{π(3)}], ..., [v_{π(d-1)}, v_{π(d)}])
//!
//! with P the symmetric polarization, which collapses to a sum over a
//! distinguished index and a perfect matching of the rest — d·(d-2)!!
//! polarization calls instead of d! — because P is symmetric and the
//! commutator slots are antisymmetric. The antisymmetrized trace form
//! fixes the first argument by cyclic invariance (even sign for odd d)
//! and splits the remaining product over subset pairs with signed
//! symmetrized partial products shared through a subset DP.
//!
//! Everything here is generic over the scalar, so the same code path
//! produces exact rational values and modular residues.

use rayon::prelude::*;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Sign of a permutation given as an array of distinct indices.
pub fn permutation_sign(perm: &[usize]) -> i64 {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All perfect matchings of an even-sized index slice, as ordered pair
/// lists with each pair sorted ascending.
pub fn perfect_matchings(elems: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if elems.is_empty() {
        return vec![Vec::new()];
    }
    let first = elems[0];
    let mut out = Vec::new();
    for i in 1..elems.len() {
        let partner = elems[i];
        let rest: Vec<usize> = elems[1..]
            .iter()
            .copied()
            .filter(|&x| x != partner)
            .collect();
        for mut sub in perfect_matchings(&rest) {
            let mut m = vec![(first, partner)];
            m.append(&mut sub);
            out.push(m);
        }
    }
    out
}

/// Σ over all orderings of the given matrices of the trace of their
/// product, via the subset DP M_S = Σ_{t∈S} A_t · M_{S\t}.
pub fn sym_trace<T: Scalar>(mats: &[&Matrix<T>]) -> T {
    let k = mats.len();
    if k == 1 {
        return mats[0].trace();
    }
    let full: usize = (1 << k) - 1;
    let mut dp: Vec<Option<Matrix<T>>> = vec![None; 1 << k];
    for t in 0..k {
        dp[1 << t] = Some(mats[t].clone());
    }
    for size in 2..k {
        for subset in 0..=full {
            if (subset as u32).count_ones() as usize != size {
                continue;
            }
            let mut acc: Option<Matrix<T>> = None;
            let mut bits = subset;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let sub = dp[subset & !(1 << t)].as_ref().unwrap();
                let prod = mats[t].mul(sub);
                acc = Some(match acc {
                    None => prod,
                    Some(a) => a.add(&prod),
                });
            }
            dp[subset] = acc;
        }
    }
    let mut total = T::zero();
    for t in 0..k {
        let rest = full & !(1 << t);
        let m = if k == 2 {
            dp[rest].as_ref().unwrap().clone()
        } else {
            dp[rest].clone().unwrap()
        };
        total = total + mats[t].trace_mul(&m);
    }
    total
}

/// dp over subsets of `mats` (sizes <= max_size) of the signed
/// symmetrized products Σ_{orderings τ} sign(τ) Π A_τ, where sign is
/// taken relative to ascending index order.
fn signed_products<T: Scalar>(mats: &[Matrix<T>], max_size: usize) -> Vec<Option<Matrix<T>>> {
    let k = mats.len();
    let full: usize = (1 << k) - 1;
    let mut dp: Vec<Option<Matrix<T>>> = vec![None; 1 << k];
    for t in 0..k {
        dp[1 << t] = Some(mats[t].clone());
    }
    for size in 2..=max_size {
        for subset in 0..=full {
            if (subset as u32).count_ones() as usize != size {
                continue;
            }
            let mut acc: Option<Matrix<T>> = None;
            let mut pos = 0usize;
            for t in 0..k {
                if subset & (1 << t) == 0 {
                    continue;
                }
                let sub = dp[subset & !(1 << t)].as_ref().unwrap();
                let prod = mats[t].mul(sub);
                acc = Some(match acc {
                    None => {
                        if pos % 2 == 0 {
                            prod
                        } else {
                            Matrix::zero(prod.rows, prod.cols).sub(&prod)
                        }
                    }
                    Some(a) => {
                        if pos % 2 == 0 {
                            a.add(&prod)
                        } else {
                            a.sub(&prod)
                        }
                    }
                });
                pos += 1;
            }
            dp[subset] = acc;
        }
    }
    dp
}

/// Evaluates the transgressed form of a trace-power polynomial on the
/// argument matrices `arg_mats` (images of the d vectors) and
/// `comm_mats[a][b]` (images of the commutators [v_a, v_b], a < b).
/// Normalization: Σ over (distinguished index, matching) classes of
/// sign · SymTrace; the full permutation sum is 2^{k-1}(k-1)! times this.
pub fn transgression_trace<T: Scalar + Send + Sync>(
    d: usize,
    arg_mats: &[Matrix<T>],
    comm_mats: &[Vec<Option<Matrix<T>>>],
) -> T {
    let mut terms: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for s in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&i| i != s).collect();
        for m in perfect_matchings(&rest) {
            terms.push((s, m));
        }
    }
    terms
        .par_iter()
        .map(|(s, matching)| {
            let mut perm = vec![*s];
            for &(a, b) in matching {
                perm.push(a);
                perm.push(b);
            }
            let sign = permutation_sign(&perm);
            let mut mats: Vec<&Matrix<T>> = vec![&arg_mats[*s]];
            for &(a, b) in matching {
                mats.push(comm_mats[a][b].as_ref().unwrap());
            }
            let v = sym_trace(&mats);
            if sign > 0 {
                v
            } else {
                T::zero() - v
            }
        })
        .reduce(T::zero, |a, b| a + b)
}

/// Evaluates the transgressed Pfaffian form: same matching sum, with the
/// polarized Pfaffian Σ_{∅≠S} (-1)^{k-|S|} Pf(Σ_{i∈S} skew_i) in place
/// of the symmetrized trace.
pub fn transgression_pfaffian<T: Scalar + Send + Sync>(
    d: usize,
    arg_skews: &[Matrix<T>],
    comm_skews: &[Vec<Option<Matrix<T>>>],
) -> T {
    let k = (d + 1) / 2;
    let mut terms: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for s in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&i| i != s).collect();
        for m in perfect_matchings(&rest) {
            terms.push((s, m));
        }
    }
    terms
        .par_iter()
        .map(|(s, matching)| {
            let mut perm = vec![*s];
            let mut skews: Vec<&Matrix<T>> = vec![&arg_skews[*s]];
            for &(a, b) in matching {
                perm.push(a);
                perm.push(b);
                skews.push(comm_skews[a][b].as_ref().unwrap());
            }
            let sign = permutation_sign(&perm);
            let v = polarized_pfaffian(&skews, k);
            if sign > 0 {
                v
            } else {
                T::zero() - v
            }
        })
        .reduce(T::zero, |a, b| a + b)
}

/// Polarization of the Pfaffian at k skew matrices by inclusion-exclusion.
fn polarized_pfaffian<T: Scalar>(skews: &[&Matrix<T>], k: usize) -> T {
    assert_eq!(skews.len(), k);
    let n = skews[0].rows;
    let mut acc = T::zero();
    for subset in 1usize..(1 << k) {
        let mut sum = Matrix::zero(n, n);
        let mut bits = subset;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum = sum.add(skews[t]);
        }
        let v = crate::chevalley::vecrep::pfaffian(&sum);
        let parity = (k as u32 - (subset as u32).count_ones()) % 2;
        if parity == 0 {
            acc = acc + v;
        } else {
            acc = acc - v;
        }
    }
    acc
}

/// Antisymmetrized trace form Σ_π sign(π) tr(A_{π(1)} ... A_{π(d)}),
/// computed by fixing the first argument (cyclic classes have even sign
/// for odd d) and splitting the rest over subset pairs.
pub fn alternating_trace<T: Scalar + Send + Sync>(d: usize, arg_mats: &[Matrix<T>], d_unit: T) -> T {
    assert_eq!(d % 2, 1, "odd degree");
    assert_eq!(arg_mats.len(), d);
    let rest: Vec<Matrix<T>> = arg_mats[1..].to_vec();
    let half = (d - 1) / 2;
    let dp = signed_products(&rest, half);
    let full: usize = (1 << (d - 1)) - 1;
    let subsets: Vec<usize> = (0..=full)
        .filter(|s| (*s as u32).count_ones() as usize == half)
        .collect();
    let total: T = subsets
        .par_iter()
        .map(|&s| {
            let sc = full & !s;
            // shuffle sign: inversions between the complement block and s
            let mut inv = 0usize;
            for x in 0..d - 1 {
                if sc & (1 << x) == 0 {
                    continue;
                }
                for y in x + 1..d - 1 {
                    if s & (1 << y) != 0 {
                        inv += 1;
                    }
                }
            }
            let left = dp[s].as_ref().unwrap();
            let right = dp[sc].as_ref().unwrap();
            let prod = left.mul(right);
            let v = arg_mats[0].trace_mul(&prod);
            if inv % 2 == 0 {
                v
            } else {
                T::zero() - v
            }
        })
        .reduce(T::zero, |a, b| a + b);
    total * d_unit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_bigint::BigInt;

    fn rmat(rows: &[Vec<i64>]) -> Matrix<Rat> {
        Matrix::from_i64_rows(rows)
    }

    fn rat(v: i64) -> Rat {
        Rat::from(BigInt::from(v))
    }

    #[test]
    fn matchings_count() {
        assert_eq!(perfect_matchings(&[0, 1]).len(), 1);
        assert_eq!(perfect_matchings(&[0, 1, 2, 3]).len(), 3);
        assert_eq!(perfect_matchings(&[0, 1, 2, 3, 4, 5]).len(), 15);
    }

    #[test]
    fn signs() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[2, 0, 1]), 1);
    }

    #[test]
    fn sym_trace_matches_brute_force() {
        let a = rmat(&[vec![1, 2], vec![3, 4]]);
        let b = rmat(&[vec![0, 1], vec![1, 1]]);
        let c = rmat(&[vec![2, 0], vec![-1, 3]]);
        let fast = sym_trace(&[&a, &b, &c]);
        // brute force over the 6 orderings
        let mut brute = Rat::from(BigInt::from(0));
        let mats = [&a, &b, &c];
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            brute += mats[p[0]].mul(mats[p[1]]).trace_mul(mats[p[2]]);
        }
        assert_eq!(fast, brute);
    }

    #[test]
    fn alternating_trace_matches_brute_force_d3() {
        let mats = vec![
            rmat(&[vec![1, 2], vec![0, -1]]),
            rmat(&[vec![0, 1], vec![1, 0]]),
            rmat(&[vec![3, 0], vec![1, -3]]),
        ];
        let fast = alternating_trace(3, &mats, rat(3));
        let refs = [&mats[0], &mats[1], &mats[2]];
        let mut brute = rat(0);
        for p in [[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let sign = permutation_sign(&p);
            let v = refs[p[0]].mul(refs[p[1]]).trace_mul(refs[p[2]]);
            brute += Rat::from(BigInt::from(sign)) * v;
        }
        assert_eq!(fast, brute);
    }
}
