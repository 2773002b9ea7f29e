//! Principal sl2 triples, including the folded construction that is
//! simultaneously principal in the fixed subalgebra and in the ambient
//! algebra, and the isotypic decomposition of the adjoint module into
//! strings whose dimensions are 2m_i + 1 for the exponents m_i.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::chevalley::LieRealization;
use crate::folding::FoldingSpec;
use crate::linalg::{primitive_integer_vector, Matrix};
use crate::Rat;

#[derive(thiserror::Error, Debug)]
pub enum TdsError {
    #[error("element is not nilpotent")]
    NotNilpotent,
    #[error("element is not principal: centralizer has dimension {0}")]
    NotPrincipal(usize),
    #[error("an orbit sum vanished while folding the principal nilpotent")]
    VanishingOrbitSum,
    #[error("sl2 completion failed: {0}")]
    Completion(String),
    #[error("string decomposition defect: {0}")]
    Defect(String),
}

/// A principal sl2 triple. The distinguished nilpotent y is the sum of
/// simple root vectors and plays the raising role: [h,y] = 2y,
/// [h,x] = -2x, [y,x] = h.
#[derive(Clone, Debug)]
pub struct Sl2Triple {
    pub x: Vec<Rat>,
    pub h: Vec<Rat>,
    pub y: Vec<Rat>,
    /// Dimension of the solution space of the completion system
    /// (0 means x was unique given h and y).
    pub completion_kernel_dim: usize,
}

/// One irreducible string of the adjoint sl2 action: basis from the
/// highest vector downward by repeated ad(y).
#[derive(Clone, Debug)]
pub struct StringComponent {
    pub m: usize,
    pub basis: Vec<Vec<Rat>>,
}

/// The full decomposition of the adjoint module.
#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    pub components: Vec<StringComponent>,
    pub dims: Vec<usize>,
    /// Dimensions of the highest-weight spaces per ad-h eigenvalue; the
    /// D_l (l even) pair shows up here as an entry of dimension 2.
    pub highest_weight_space_dims: Vec<(i64, usize)>,
}

#[derive(Serialize, Debug, Clone)]
pub struct PrincipalityReport {
    pub nilpotent: bool,
    pub nilpotency_order: usize,
    pub centralizer_dim: usize,
    pub principal: bool,
}

fn simple_root_indices(r: &LieRealization) -> Vec<usize> {
    let l = r.rank();
    (0..l)
        .map(|i| {
            let mut root = vec![0i64; l];
            root[i] = 1;
            r.datum.root_index(&root).unwrap()
        })
        .collect()
}

/// The standard principal nilpotent: the sum of all simple root vectors.
pub fn principal_nilpotent(r: &LieRealization) -> Vec<Rat> {
    let mut y = vec![Rat::zero(); r.dim];
    for ri in simple_root_indices(r) {
        y[r.e_index(ri)] = Rat::one();
    }
    y
}

/// The folded principal nilpotent: per orbit, the sum of the simple root
/// vectors in the orbit (a positive multiple of the orbit sum of any
/// nonzero root vector on the orbit). The result is sigma-fixed and is a
/// positive combination of every simple root vector of the ambient
/// algebra, hence principal there as well.
pub fn folded_principal_nilpotent(
    spec: &FoldingSpec,
    ambient: &LieRealization,
    sigma: &Matrix<Rat>,
) -> Result<Vec<Rat>, TdsError> {
    let simple = simple_root_indices(ambient);
    let mut y = vec![Rat::zero(); ambient.dim];
    for orbit in &spec.orbits {
        let mut part = vec![Rat::zero(); ambient.dim];
        for &k in orbit {
            part[ambient.e_index(simple[k])] += Rat::one();
        }
        if part.iter().all(Zero::is_zero) {
            return Err(TdsError::VanishingOrbitSum);
        }
        for i in 0..ambient.dim {
            let v = part[i].clone();
            y[i] += v;
        }
    }
    if sigma.mul_vec(&y) != y {
        return Err(TdsError::Completion("folded nilpotent is not sigma-fixed".into()));
    }
    Ok(y)
}

/// Nilpotency via the decreasing image chain of ad(y); returns the
/// nilpotency order (smallest k with (ad y)^k = 0) when nilpotent.
pub fn nilpotency_order(r: &LieRealization, y: &[Rat]) -> Option<usize> {
    let ad = r.adjoint(y);
    let mut image: Vec<Vec<Rat>> = (0..r.dim).map(|i| r.basis_vector(i)).collect();
    let mut order = 0;
    loop {
        let next: Vec<Vec<Rat>> = image.iter().map(|v| ad.mul_vec(v)).collect();
        let mut m = Matrix::from_fn(next.len(), r.dim, |i, j| next[i][j].clone());
        let (rank, _) = m.rref();
        order += 1;
        if rank == 0 {
            return Some(order);
        }
        if rank == image.len() {
            return None; // stabilized above zero
        }
        image = (0..rank)
            .map(|i| (0..r.dim).map(|j| m[(i, j)].clone()).collect())
            .collect();
    }
}

/// Certifies principality by the centralizer dimension: a nilpotent y is
/// principal iff dim ker(ad y) equals the rank.
pub fn is_principal(r: &LieRealization, y: &[Rat]) -> Result<PrincipalityReport, TdsError> {
    let Some(order) = nilpotency_order(r, y) else {
        return Err(TdsError::NotNilpotent);
    };
    let ad = r.adjoint(y);
    let centralizer_dim = ad.kernel_basis().len();
    Ok(PrincipalityReport {
        nilpotent: true,
        nilpotency_order: order,
        centralizer_dim,
        principal: centralizer_dim == r.rank(),
    })
}

/// The semisimple element completing a principal nilpotent of standard
/// form: h with α_i(h) = 2 for every simple root, i.e. the sum of all
/// positive coroots.
pub fn standard_h(r: &LieRealization) -> Vec<Rat> {
    let l = r.rank();
    let ct = Matrix::from_i64_rows(&r.datum.cartan).transpose();
    let rhs = vec![Rat::from(BigInt::from(2)); l];
    let c = ct.solve(&rhs).expect("Cartan matrix invertible");
    let mut h = vec![Rat::zero(); r.dim];
    for i in 0..l {
        assert!(c[i].is_integer(), "coroot coefficients are integral");
        h[i] = c[i].clone();
    }
    h
}

/// Completes a principal nilpotent y (a positive combination of simple
/// root vectors) to a verified sl2 triple by exact linear solve.
pub fn complete_sl2(r: &LieRealization, y: &[Rat]) -> Result<Sl2Triple, TdsError> {
    let report = is_principal(r, y)?;
    if !report.principal {
        return Err(TdsError::NotPrincipal(report.centralizer_dim));
    }
    let simple = simple_root_indices(r);
    for &ri in &simple {
        if y[r.e_index(ri)] <= Rat::zero() {
            return Err(TdsError::Completion(
                "expected positive coefficients on every simple root vector".into(),
            ));
        }
    }
    let h = standard_h(r);
    let hy = r.bracket(&h, y);
    let two_y: Vec<Rat> = y.iter().map(|c| c * Rat::from(BigInt::from(2))).collect();
    if hy != two_y {
        return Err(TdsError::Completion("[h, y] != 2y".into()));
    }
    // solve (ad y) x = h together with (ad h + 2) x = 0
    let ad_y = r.adjoint(y);
    let ad_h = r.adjoint(&h);
    let dim = r.dim;
    let stacked = Matrix::from_fn(2 * dim, dim, |i, j| {
        if i < dim {
            ad_y[(i, j)].clone()
        } else {
            let mut v = ad_h[(i - dim, j)].clone();
            if i - dim == j {
                v += Rat::from(BigInt::from(2));
            }
            v
        }
    });
    let rhs: Vec<Rat> = (0..2 * dim)
        .map(|i| if i < dim { h[i].clone() } else { Rat::zero() })
        .collect();
    let x = stacked
        .solve(&rhs)
        .ok_or_else(|| TdsError::Completion("inconsistent completion system".into()))?;
    let kernel_dim = stacked.kernel_basis().len();
    let triple = Sl2Triple { x, h, y: y.to_vec(), completion_kernel_dim: kernel_dim };
    verify_triple(r, &triple)?;
    Ok(triple)
}

/// Checks the three sl2 relations exactly.
pub fn verify_triple(r: &LieRealization, t: &Sl2Triple) -> Result<(), TdsError> {
    let two = Rat::from(BigInt::from(2));
    let hy = r.bracket(&t.h, &t.y);
    if hy != t.y.iter().map(|c| c * &two).collect::<Vec<_>>() {
        return Err(TdsError::Completion("[h, y] != 2y".into()));
    }
    let hx = r.bracket(&t.h, &t.x);
    if hx != t.x.iter().map(|c| -(c * &two)).collect::<Vec<_>>() {
        return Err(TdsError::Completion("[h, x] != -2x".into()));
    }
    if r.bracket(&t.y, &t.x) != t.h {
        return Err(TdsError::Completion("[y, x] != h".into()));
    }
    Ok(())
}

/// Decomposes the adjoint module under a verified principal triple.
///
/// Highest-weight vectors are the kernel of the raising operator ad(y)
/// split by exact ad-h eigenvalue; strings descend by the lowering
/// operator ad(x). For an eigenvalue with a
/// two-dimensional highest-weight space (D_l, l even), the recorded
/// basis is the primitive RREF basis with the second vector
/// orthogonalized against the first in the pairing
/// κ(v, (ad x)^{2m} w), which is nondegenerate there.
pub fn decompose_adjoint(
    r: &LieRealization,
    t: &Sl2Triple,
) -> Result<IsotypicDecomposition, TdsError> {
    verify_triple(r, t)?;
    let raise = r.adjoint(&t.y);
    let ad_h = r.adjoint(&t.h);
    let lower = r.adjoint(&t.x);
    let dim = r.dim;

    let mut mults: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &m in &r.datum.exponents {
        *mults.entry(m).or_insert(0) += 1;
    }

    let mut components: Vec<StringComponent> = Vec::new();
    let mut hw_dims = Vec::new();
    for (&m, &mult) in &mults {
        let eig = 2 * m as i64;
        // kernel of the raising operator, at ad-h eigenvalue eig
        let stacked = Matrix::from_fn(2 * dim, dim, |i, j| {
            if i < dim {
                raise[(i, j)].clone()
            } else {
                let mut v = ad_h[(i - dim, j)].clone();
                if i - dim == j {
                    v -= Rat::from(BigInt::from(eig));
                }
                v
            }
        });
        let kernel = stacked.kernel_basis();
        if kernel.len() != mult {
            return Err(TdsError::Defect(format!(
                "highest-weight space at ad-h weight {eig} has dimension {}, expected {mult}",
                kernel.len()
            )));
        }
        hw_dims.push((eig, kernel.len()));
        let mut basis: Vec<Vec<Rat>> = kernel
            .iter()
            .map(|v| {
                primitive_integer_vector(v)
                    .into_iter()
                    .map(Rat::from)
                    .collect()
            })
            .collect();
        if basis.len() == 2 {
            let descend = |v: &Vec<Rat>| -> Vec<Rat> {
                let mut w = v.clone();
                for _ in 0..2 * m {
                    w = lower.mul_vec(&w);
                }
                w
            };
            let s = |a: &Vec<Rat>, b: &Vec<Rat>| r.killing_value(a, &descend(b));
            let s00 = s(&basis[0], &basis[0]);
            if s00.is_zero() {
                return Err(TdsError::Defect(
                    "degenerate pairing on the paired highest-weight space".into(),
                ));
            }
            let coeff = s(&basis[0], &basis[1]) / &s00;
            let adjusted: Vec<Rat> = basis[1]
                .iter()
                .zip(&basis[0])
                .map(|(b, a)| b - &coeff * a)
                .collect();
            basis[1] = primitive_integer_vector(&adjusted)
                .into_iter()
                .map(Rat::from)
                .collect();
        }
        for top in basis {
            let mut string = vec![top.clone()];
            let mut cur = top;
            for _ in 0..2 * m {
                cur = lower.mul_vec(&cur);
                if cur.iter().all(Zero::is_zero) {
                    return Err(TdsError::Defect(format!(
                        "string of weight {eig} terminated early"
                    )));
                }
                string.push(cur.clone());
            }
            let tail = lower.mul_vec(&cur);
            if tail.iter().any(|c| !c.is_zero()) {
                return Err(TdsError::Defect(format!(
                    "string of weight {eig} is longer than {}",
                    2 * m + 1
                )));
            }
            components.push(StringComponent { m, basis: string });
        }
    }
    components.sort_by_key(|c| c.m);
    let dims: Vec<usize> = components.iter().map(|c| 2 * c.m + 1).collect();
    let expected: Vec<usize> = r.datum.exponents.iter().map(|m| 2 * m + 1).collect();
    if dims != expected {
        return Err(TdsError::Defect(format!(
            "string dimensions {dims:?} do not match the exponents"
        )));
    }
    let total: usize = dims.iter().sum();
    if total != dim {
        return Err(TdsError::Defect("string dimensions do not fill the algebra".into()));
    }
    let all: Vec<&Vec<Rat>> = components.iter().flat_map(|c| c.basis.iter()).collect();
    let m = Matrix::from_fn(all.len(), dim, |i, j| all[i][j].clone());
    if m.rank() != dim {
        return Err(TdsError::Defect("string vectors are linearly dependent".into()));
    }
    Ok(IsotypicDecomposition { components, dims, highest_weight_space_dims: hw_dims })
}

/// The multiset of ad-h eigenvalues predicted by the exponents.
pub fn expected_adh_spectrum(r: &LieRealization) -> std::collections::BTreeMap<i64, usize> {
    let mut spectrum = std::collections::BTreeMap::new();
    for &m in &r.datum.exponents {
        let m = m as i64;
        let mut w = -2 * m;
        while w <= 2 * m {
            *spectrum.entry(w).or_insert(0) += 1;
            w += 2;
        }
    }
    spectrum
}

/// The actual ad-h eigenvalue multiset of the standard h on the
/// Chevalley basis (diagonal there).
pub fn adh_spectrum(r: &LieRealization) -> std::collections::BTreeMap<i64, usize> {
    let h = standard_h(r);
    let mut spectrum = std::collections::BTreeMap::new();
    for idx in 0..r.dim {
        let w = r.basis_weight(idx);
        let eig: Rat = (0..r.rank())
            .map(|i| &h[i] * Rat::from(BigInt::from(w.0[i])))
            .sum();
        assert!(eig.is_integer());
        *spectrum.entry(eig.to_integer().to_i64().unwrap()).or_insert(0) += 1;
    }
    spectrum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{automorphism_matrix, fixed_subalgebra, realize};
    use crate::folding::{identity_folding, make_folding, FoldingPair};
    use crate::rootsys::Family;

    #[test]
    fn a1_triple_is_e_h_f() {
        let a1 = realize(Family::A, 1).unwrap();
        let y = principal_nilpotent(&a1);
        let t = complete_sl2(&a1, &y).unwrap();
        assert_eq!(t.completion_kernel_dim, 0);
        let d = decompose_adjoint(&a1, &t).unwrap();
        assert_eq!(d.dims, vec![3]);
    }

    #[test]
    fn a2_ad_y_nilpotency_order() {
        let a2 = realize(Family::A, 2).unwrap();
        let y = principal_nilpotent(&a2);
        assert_eq!(nilpotency_order(&a2, &y), Some(5));
        let rep = is_principal(&a2, &y).unwrap();
        assert!(rep.principal);
        assert_eq!(rep.centralizer_dim, 2);
    }

    #[test]
    fn g2_nilpotency_order_eleven() {
        let g2 = realize(Family::G, 2).unwrap();
        let y = principal_nilpotent(&g2);
        assert_eq!(nilpotency_order(&g2, &y), Some(11));
    }

    #[test]
    fn a2_h_coefficients() {
        let a2 = realize(Family::A, 2).unwrap();
        let h = standard_h(&a2);
        assert_eq!(h[0], Rat::from(BigInt::from(2)));
        assert_eq!(h[1], Rat::from(BigInt::from(2)));
    }

    #[test]
    fn non_principal_detection() {
        let a3 = realize(Family::A, 3).unwrap();
        let y = principal_nilpotent(&a3);
        let rep = is_principal(&a3, &y).unwrap();
        assert!(rep.principal && rep.centralizer_dim == 3);
        let mut e1 = vec![Rat::zero(); a3.dim];
        let idx = {
            let mut root = vec![0i64; 3];
            root[0] = 1;
            a3.datum.root_index(&root).unwrap()
        };
        e1[a3.e_index(idx)] = Rat::one();
        let rep = is_principal(&a3, &e1).unwrap();
        assert!(!rep.principal);
        assert!(rep.centralizer_dim > 3);
        let zero = vec![Rat::zero(); a3.dim];
        let rep = is_principal(&a3, &zero).unwrap();
        assert_eq!(rep.centralizer_dim, a3.dim);
        assert!(!rep.principal);
    }

    #[test]
    fn a2_string_dims() {
        let a2 = realize(Family::A, 2).unwrap();
        let t = complete_sl2(&a2, &principal_nilpotent(&a2)).unwrap();
        let d = decompose_adjoint(&a2, &t).unwrap();
        assert_eq!(d.dims, vec![3, 5]);
        assert_eq!(adh_spectrum(&a2), expected_adh_spectrum(&a2));
    }

    #[test]
    fn d4_isotypic_pair() {
        let d4 = realize(Family::D, 4).unwrap();
        let t = complete_sl2(&d4, &principal_nilpotent(&d4)).unwrap();
        let d = decompose_adjoint(&d4, &t).unwrap();
        assert_eq!(d.dims, vec![3, 7, 7, 11]);
        // two-dimensional highest-weight space at ad-h eigenvalue 6
        assert!(d.highest_weight_space_dims.contains(&(6, 2)));
    }

    #[test]
    fn folded_nilpotent_d4_g2() {
        let d4 = realize(Family::D, 4).unwrap();
        let spec = make_folding(FoldingPair::D4G2, 4).unwrap();
        let sigma = automorphism_matrix(&d4, &spec).unwrap();
        let y = folded_principal_nilpotent(&spec, &d4, &sigma).unwrap();
        assert_eq!(y, principal_nilpotent(&d4));
        let rep = is_principal(&d4, &y).unwrap();
        assert!(rep.principal);
        let t = complete_sl2(&d4, &y).unwrap();
        for v in [&t.x, &t.h, &t.y] {
            assert_eq!(&sigma.mul_vec(v), v);
        }
        let emb = fixed_subalgebra(&d4, &sigma, &spec).unwrap();
        let yk = emb.from_ambient(&y).unwrap();
        let repk = is_principal(&emb.own, &yk).unwrap();
        assert!(repk.principal);
        assert_eq!(repk.centralizer_dim, 2);
    }

    #[test]
    fn folded_nilpotent_identity_reduces() {
        let a2 = realize(Family::A, 2).unwrap();
        let spec = identity_folding(Family::A, 2).unwrap();
        let sigma = automorphism_matrix(&a2, &spec).unwrap();
        let y = folded_principal_nilpotent(&spec, &a2, &sigma).unwrap();
        assert_eq!(y, principal_nilpotent(&a2));
    }

    #[test]
    fn a3_folded_sigma_fixed() {
        let a3 = realize(Family::A, 3).unwrap();
        let spec = make_folding(FoldingPair::A2n1C, 1).unwrap();
        let sigma = automorphism_matrix(&a3, &spec).unwrap();
        let y = folded_principal_nilpotent(&spec, &a3, &sigma).unwrap();
        assert_eq!(y, principal_nilpotent(&a3));
        assert_eq!(sigma.mul_vec(&y), y);
    }
}
