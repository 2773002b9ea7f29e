//! Explicit Lie-algebra realizations with exact integer structure
//! constants, diagram automorphisms acting on them, and fixed
//! subalgebras identified against the folded root datum.
//!
//! Simply-laced algebras are realized from a sign cocycle on the root
//! lattice and then renormalized so that every extraspecial pair carries
//! the structure constant +(p+1) under the height-then-lex root order.
//! The non-simply-laced algebras are realized as the fixed subalgebras
//! of the corresponding simply-laced fold, with a Chevalley basis built
//! inside the ambient algebra by the same extraspecial recursion; all
//! structural identities (antisymmetry, Jacobi, Cartan relations,
//! Killing invariance) are verified exactly at construction time.

pub mod vecrep;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::OnceCell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::folding::{make_folding, FoldingError, FoldingPair, FoldingSpec};
use crate::linalg::Matrix;
use crate::rootsys::{build_root_datum, Family, RootDatum, RootError, Weight};
use crate::Rat;

/// Default cap on the dimension of an algebra realized explicitly.
pub const DEFAULT_DIM_CAP: usize = 100;

#[derive(thiserror::Error, Debug)]
pub enum ChevError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Folding(#[from] FoldingError),
    #[error("dimension {dim} exceeds realization cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("realization invariant failed: {0}")]
    Invariant(String),
    #[error("automorphism construction failed: {0}")]
    Automorphism(String),
    #[error("subalgebra construction failed: {0}")]
    Subalgebra(String),
}

/// Label of a basis element.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum BasisLabel {
    /// Simple coroot h_i.
    Cartan(usize),
    /// Root vector e_α for positive root index i.
    Pos(usize),
    /// Root vector f_α for positive root index i.
    Neg(usize),
}

type SparseVec = Vec<(usize, i64)>;

/// Chevalley-basis model of a simple Lie algebra.
///
/// Basis order: h_1..h_l, then (e_α, f_α) per positive root in the
/// datum's height-then-lex order.
#[derive(Clone, Debug)]
pub struct LieRealization {
    pub datum: RootDatum,
    pub dim: usize,
    pub labels: Vec<BasisLabel>,
    /// Sparse bracket table: `table[a][b]` is `[x_a, x_b]`.
    table: Vec<Vec<SparseVec>>,
    killing: OnceCell<Vec<Vec<i64>>>,
}

impl LieRealization {
    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    pub fn e_index(&self, root: usize) -> usize {
        self.datum.rank + 2 * root
    }

    pub fn f_index(&self, root: usize) -> usize {
        self.datum.rank + 2 * root + 1
    }

    pub fn h_index(&self, i: usize) -> usize {
        i
    }

    pub fn bracket_basis(&self, a: usize, b: usize) -> &[(usize, i64)] {
        &self.table[a][b]
    }

    /// Bracket of two rational vectors.
    pub fn bracket(&self, u: &[Rat], v: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim];
        for (a, cu) in u.iter().enumerate() {
            if cu.is_zero() {
                continue;
            }
            for (b, cv) in v.iter().enumerate() {
                if cv.is_zero() {
                    continue;
                }
                for &(r, c) in &self.table[a][b] {
                    out[r] += cu * cv * Rat::from(BigInt::from(c));
                }
            }
        }
        out
    }

    /// Basis vector as a rational coordinate vector.
    pub fn basis_vector(&self, idx: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim];
        v[idx] = Rat::one();
        v
    }

    /// Adjoint matrix of a basis element.
    pub fn adjoint_basis(&self, a: usize) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.dim]; self.dim];
        for b in 0..self.dim {
            for &(r, c) in &self.table[a][b] {
                m[r][b] += c;
            }
        }
        m
    }

    /// Adjoint matrix of a rational vector.
    pub fn adjoint(&self, v: &[Rat]) -> Matrix<Rat> {
        let mut m = Matrix::zero(self.dim, self.dim);
        for (a, cv) in v.iter().enumerate() {
            if cv.is_zero() {
                continue;
            }
            for b in 0..self.dim {
                for &(r, c) in &self.table[a][b] {
                    m[(r, b)] += cv * Rat::from(BigInt::from(c));
                }
            }
        }
        m
    }

    /// Exact Killing form matrix.
    pub fn killing_matrix(&self) -> &Vec<Vec<i64>> {
        self.killing.get_or_init(|| {
            let dim = self.dim;
            let mut k = vec![vec![0i64; dim]; dim];
            for a in 0..dim {
                for b in a..dim {
                    let mut acc = 0i64;
                    // tr(ad_a ad_b) = Σ_c coefficient of x_c in [x_a,[x_b,x_c]]
                    for c in 0..dim {
                        for &(m, cm) in &self.table[b][c] {
                            for &(r, cr) in &self.table[a][m] {
                                if r == c {
                                    acc += cm * cr;
                                }
                            }
                        }
                    }
                    k[a][b] = acc;
                    k[b][a] = acc;
                }
            }
            k
        })
    }

    pub fn killing_value(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let k = self.killing_matrix();
        let mut acc = Rat::zero();
        for (a, cu) in u.iter().enumerate() {
            if cu.is_zero() {
                continue;
            }
            for (b, cv) in v.iter().enumerate() {
                if cv.is_zero() {
                    continue;
                }
                acc += cu * cv * Rat::from(BigInt::from(k[a][b]));
            }
        }
        acc
    }

    /// Weight of a basis element under the Cartan subalgebra, in
    /// fundamental coordinates (zero for Cartan elements).
    pub fn basis_weight(&self, idx: usize) -> Weight {
        match self.labels[idx] {
            BasisLabel::Cartan(_) => Weight::zero(self.datum.rank),
            BasisLabel::Pos(r) => self.datum.root_to_fund(&self.datum.positive_roots[r]),
            BasisLabel::Neg(r) => {
                let w = self.datum.root_to_fund(&self.datum.positive_roots[r]);
                w.scale(-1)
            }
        }
    }

    /// Returns a copy with one structure constant tampered, for the
    /// mutation smoke test.
    pub fn with_mutated_constant(&self, a: usize, b: usize, delta: i64) -> LieRealization {
        let mut out = self.clone();
        out.killing = OnceCell::new();
        let row = &mut out.table[a][b];
        if let Some(first) = row.first_mut() {
            first.1 += delta;
        } else {
            row.push((0, delta));
        }
        out
    }

    /// Sparse structure constants export (a < b, nonzero rows only).
    pub fn export_doc(&self) -> RealizationDoc {
        let mut constants = Vec::new();
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                if !self.table[a][b].is_empty() {
                    constants.push((a, b, self.table[a][b].clone()));
                }
            }
        }
        RealizationDoc {
            schema: 1,
            algebra: self.datum.name(),
            dim: self.dim,
            labels: self.labels.iter().map(|l| self.label_string(*l)).collect(),
            constants,
        }
    }

    fn label_string(&self, l: BasisLabel) -> String {
        match l {
            BasisLabel::Cartan(i) => format!("h{}", i + 1),
            BasisLabel::Pos(r) => format!("e{:?}", self.datum.positive_roots[r]),
            BasisLabel::Neg(r) => format!("f{:?}", self.datum.positive_roots[r]),
        }
    }
}

/// JSON export of a realization for cross-checking against external
/// computer-algebra output.
#[derive(Serialize)]
pub struct RealizationDoc {
    pub schema: u32,
    pub algebra: String,
    pub dim: usize,
    pub labels: Vec<String>,
    pub constants: Vec<(usize, usize, Vec<(usize, i64)>)>,
}

/// Signed root: coordinates in the simple-root basis, positive or negative.
fn signed_root_coords(datum: &RootDatum, label: BasisLabel) -> Option<Vec<i64>> {
    match label {
        BasisLabel::Cartan(_) => None,
        BasisLabel::Pos(r) => Some(datum.positive_roots[r].clone()),
        BasisLabel::Neg(r) => Some(datum.positive_roots[r].iter().map(|c| -c).collect()),
    }
}

struct RootTables {
    /// signed root coords -> (positive index, is_negative)
    index: HashMap<Vec<i64>, (usize, bool)>,
}

impl RootTables {
    fn new(datum: &RootDatum) -> Self {
        let mut index = HashMap::new();
        for (i, r) in datum.positive_roots.iter().enumerate() {
            index.insert(r.clone(), (i, false));
            index.insert(r.iter().map(|c| -c).collect(), (i, true));
        }
        RootTables { index }
    }

    fn lookup(&self, coords: &[i64]) -> Option<(usize, bool)> {
        self.index.get(coords).copied()
    }

    fn is_root(&self, coords: &[i64]) -> bool {
        self.index.contains_key(coords)
    }
}

/// Extraspecial pair of a non-simple positive root: the first positive
/// root α in the height-then-lex order with γ − α again positive, paired
/// with β = γ − α. Also returns the chain-down length p of the α-string
/// through β.
pub(crate) fn extraspecial_pair(datum: &RootDatum, gamma: usize) -> (usize, usize, i64) {
    let tables = RootTables::new(datum);
    let g = &datum.positive_roots[gamma];
    for (ai, alpha) in datum.positive_roots.iter().enumerate() {
        let beta: Vec<i64> = g.iter().zip(alpha).map(|(a, b)| a - b).collect();
        if beta.iter().all(|&c| c == 0) {
            continue;
        }
        if let Some((bi, false)) = tables.lookup(&beta) {
            // chain p: longest k with β - kα a root
            let mut p = 0i64;
            let mut probe = beta.clone();
            loop {
                for (x, a) in probe.iter_mut().zip(alpha) {
                    *x -= a;
                }
                if !tables.is_root(&probe) {
                    break;
                }
                p += 1;
            }
            return (ai, bi, p);
        }
    }
    unreachable!("every non-simple positive root decomposes")
}

// ---------------------------------------------------------------------
// Simply-laced construction from a sign cocycle on the root lattice.
// ---------------------------------------------------------------------

struct Cocycle {
    bform: Vec<Vec<i64>>,
}

impl Cocycle {
    fn new(datum: &RootDatum) -> Self {
        let l = datum.rank;
        let mut bform = vec![vec![0i64; l]; l];
        for i in 0..l {
            for j in 0..l {
                bform[i][j] = if i == j {
                    1
                } else if i < j {
                    datum.cartan[i][j].rem_euclid(2)
                } else {
                    0
                };
            }
        }
        Cocycle { bform }
    }

    /// ε(x, y) = ±1, bimultiplicative on the root lattice.
    fn sign(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut acc = 0i64;
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                acc += xi * self.bform[i][j] * yj;
            }
        }
        if acc.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

fn realize_simply_laced(datum: RootDatum) -> LieRealization {
    let l = datum.rank;
    let npos = datum.positive_roots.len();
    let dim = l + 2 * npos;
    let tables = RootTables::new(&datum);
    let eps = Cocycle::new(&datum);

    // renormalization signs from the extraspecial recursion
    let mut sigma = vec![1i64; npos];
    for g in 0..npos {
        let height: i64 = datum.positive_roots[g].iter().sum();
        if height == 1 {
            continue;
        }
        let (ai, bi, _p) = extraspecial_pair(&datum, g);
        sigma[g] = sigma[ai]
            * sigma[bi]
            * eps.sign(&datum.positive_roots[ai], &datum.positive_roots[bi]);
    }

    let mut labels = Vec::with_capacity(dim);
    for i in 0..l {
        labels.push(BasisLabel::Cartan(i));
    }
    for r in 0..npos {
        labels.push(BasisLabel::Pos(r));
        labels.push(BasisLabel::Neg(r));
    }

    // x_pos(γ) = σ_γ e_γ, x_neg(γ) = −σ_γ e_{−γ} over the cocycle algebra:
    // [e_μ, e_ν] = ε(μ,ν) e_{μ+ν} when μ+ν is a root, −h_{μ∨} when ν = −μ.
    let base_sign = |label: BasisLabel| -> i64 {
        match label {
            BasisLabel::Cartan(_) => 1,
            BasisLabel::Pos(r) => sigma[r],
            BasisLabel::Neg(r) => -sigma[r],
        }
    };

    let mut table = vec![vec![Vec::new(); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            let entry: SparseVec = match (labels[a], labels[b]) {
                (BasisLabel::Cartan(_), BasisLabel::Cartan(_)) => Vec::new(),
                (BasisLabel::Cartan(i), _) => {
                    let mu = signed_root_coords(&datum, labels[b]).unwrap();
                    let k: i64 = (0..l).map(|j| datum.cartan[i][j] * mu[j]).sum();
                    if k == 0 {
                        Vec::new()
                    } else {
                        vec![(b, k)]
                    }
                }
                (_, BasisLabel::Cartan(i)) => {
                    let mu = signed_root_coords(&datum, labels[a]).unwrap();
                    let k: i64 = (0..l).map(|j| datum.cartan[i][j] * mu[j]).sum();
                    if k == 0 {
                        Vec::new()
                    } else {
                        vec![(a, -k)]
                    }
                }
                (la, lb) => {
                    let mu = signed_root_coords(&datum, la).unwrap();
                    let nu = signed_root_coords(&datum, lb).unwrap();
                    let sum: Vec<i64> = mu.iter().zip(&nu).map(|(x, y)| x + y).collect();
                    if sum.iter().all(|&c| c == 0) {
                        // [x(μ), x(−μ)] = s(μ)s(−μ)·(−h_{μ∨}) = h_{μ∨} for μ>0
                        let coroot = datum.coroot_coords(
                            &mu.iter().map(|c| c.abs()).collect::<Vec<_>>(),
                        );
                        let positive = mu.iter().sum::<i64>() > 0;
                        let s = base_sign(la) * base_sign(lb) * -1;
                        let orient = if positive { 1 } else { -1 };
                        (0..l)
                            .filter(|&i| coroot[i] != 0)
                            .map(|i| (i, s * orient * coroot[i]))
                            .collect()
                    } else if let Some((ri, neg)) = tables.lookup(&sum) {
                        let target = if neg {
                            labels
                                .iter()
                                .position(|&x| x == BasisLabel::Neg(ri))
                                .unwrap()
                        } else {
                            labels
                                .iter()
                                .position(|&x| x == BasisLabel::Pos(ri))
                                .unwrap()
                        };
                        let coeff = base_sign(la)
                            * base_sign(lb)
                            * base_sign(labels[target])
                            * eps.sign(&mu, &nu);
                        vec![(target, coeff)]
                    } else {
                        Vec::new()
                    }
                }
            };
            table[a][b] = entry;
        }
    }

    LieRealization { datum, dim, labels, table, killing: OnceCell::new() }
}

// ---------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------

/// Verifies the structural invariants of a realization: antisymmetry,
/// Cartan relations, Jacobi identity (exhaustive for dim <= 30, else
/// 10^4 seeded triples), Killing ad-invariance, and nondegeneracy.
pub fn verify_realization(r: &LieRealization) -> Result<(), ChevError> {
    let dim = r.dim;
    let fail = |msg: String| Err(ChevError::Invariant(msg));

    // antisymmetry
    for a in 0..dim {
        for b in 0..dim {
            let mut lhs: Vec<i64> = vec![0; dim];
            for &(i, c) in &r.table[a][b] {
                lhs[i] += c;
            }
            for &(i, c) in &r.table[b][a] {
                lhs[i] += c;
            }
            if lhs.iter().any(|&c| c != 0) {
                return fail(format!("antisymmetry fails on basis pair ({a},{b})"));
            }
        }
    }

    // Cartan relations on simple generators
    let l = r.datum.rank;
    let simple_root_index: Vec<usize> = (0..l)
        .map(|i| {
            let mut root = vec![0i64; l];
            root[i] = 1;
            r.datum.root_index(&root).expect("simple root present")
        })
        .collect();
    for i in 0..l {
        for j in 0..l {
            if !r.table[i][j].is_empty() {
                return fail(format!("[h{i},h{j}] must vanish"));
            }
            let ej = r.e_index(simple_root_index[j]);
            let expect = r.datum.cartan[i][j];
            let row = &r.table[i][ej];
            let ok = if expect == 0 {
                row.is_empty()
            } else {
                row.len() == 1 && row[0] == (ej, expect)
            };
            if !ok {
                return fail(format!("[h{i}, e{j}] has the wrong eigenvalue"));
            }
            let fi = r.f_index(simple_root_index[i]);
            let row = &r.table[ej][fi];
            if i == j {
                let mut v = vec![0i64; dim];
                for &(idx, c) in row {
                    v[idx] += c;
                }
                let mut expect_v = vec![0i64; dim];
                expect_v[i] = 1;
                if v != expect_v {
                    return fail(format!("[e{i}, f{i}] must equal h{i}"));
                }
            } else if !row.is_empty() {
                return fail(format!("[e{j}, f{i}] must vanish"));
            }
        }
    }

    // Jacobi identity
    let jacobi = |a: usize, b: usize, c: usize| -> bool {
        let mut acc = vec![0i64; dim];
        let mut add_term = |x: usize, y: usize, z: usize| {
            for &(m, cm) in &r.table[y][z] {
                for &(i, ci) in &r.table[x][m] {
                    acc[i] += cm * ci;
                }
            }
        };
        add_term(a, b, c);
        add_term(b, c, a);
        add_term(c, a, b);
        acc.iter().all(|&v| v == 0)
    };
    if dim <= 30 {
        for a in 0..dim {
            for b in a + 1..dim {
                for c in b + 1..dim {
                    if !jacobi(a, b, c) {
                        return fail(format!("Jacobi fails on ({a},{b},{c})"));
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a41_434f);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..dim);
            let b = rng.gen_range(0..dim);
            let c = rng.gen_range(0..dim);
            if !jacobi(a, b, c) {
                return fail(format!("Jacobi fails on ({a},{b},{c})"));
            }
        }
    }

    // Killing ad-invariance: κ([a,b],c) + κ(b,[a,c]) = 0
    let k = r.killing_matrix();
    let kv = |row: &SparseVec, c: usize| -> i64 { row.iter().map(|&(i, ci)| ci * k[i][c]).sum() };
    let check_triple = |a: usize, b: usize, c: usize| -> bool {
        let t1 = kv(&r.table[a][b], c);
        let t2 = kv(&r.table[a][c], b);
        t1 + t2 == 0
    };
    if dim <= 36 {
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    if !check_triple(a, b, c) {
                        return fail(format!("Killing invariance fails on ({a},{b},{c})"));
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4b49_4c4c);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..dim);
            let b = rng.gen_range(0..dim);
            let c = rng.gen_range(0..dim);
            if !check_triple(a, b, c) {
                return fail(format!("Killing invariance fails on ({a},{b},{c})"));
            }
        }
    }

    // Killing nondegeneracy
    let km = Matrix::from_i64_rows(k);
    if km.det().is_zero() {
        return fail("Killing form is degenerate".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------
// realize()
// ---------------------------------------------------------------------

/// Builds a verified Chevalley realization of the given simple type.
pub fn realize(family: Family, rank: usize) -> Result<LieRealization, ChevError> {
    realize_with_cap(family, rank, DEFAULT_DIM_CAP)
}

pub fn realize_with_cap(
    family: Family,
    rank: usize,
    cap: usize,
) -> Result<LieRealization, ChevError> {
    let datum = build_root_datum(family, rank)?;
    if datum.dim() > cap {
        return Err(ChevError::CapExceeded { dim: datum.dim(), cap });
    }
    let r = match family {
        Family::A | Family::D | Family::E => realize_simply_laced(datum),
        Family::B => fold_to_own(FoldingPair::DnB, rank + 1)?,
        Family::C => fold_to_own(FoldingPair::A2n1C, rank - 1)?,
        Family::G => fold_to_own(FoldingPair::D4G2, 4)?,
        Family::F => fold_to_own(FoldingPair::E6F4, 6)?,
    };
    verify_realization(&r)?;
    Ok(r)
}

fn fold_to_own(pair: FoldingPair, n: usize) -> Result<LieRealization, ChevError> {
    let spec = make_folding(pair, n)?;
    let ambient = realize(spec.source.family, spec.source.rank)?;
    let sigma = automorphism_matrix(&ambient, &spec)?;
    let emb = fixed_subalgebra(&ambient, &sigma, &spec)?;
    Ok(emb.own)
}

// ---------------------------------------------------------------------
// Diagram automorphism on a realization
// ---------------------------------------------------------------------

/// Extends the simple-generator permutation `e_i -> e_{σ(i)}`,
/// `f_i -> f_{σ(i)}`, `h_i -> h_{σ(i)}` to the whole algebra along the
/// extraspecial bracket recursion, then verifies the result is an
/// automorphism of the stated order.
pub fn automorphism_matrix(
    r: &LieRealization,
    spec: &FoldingSpec,
) -> Result<Matrix<Rat>, ChevError> {
    if r.datum != spec.source {
        return Err(ChevError::Automorphism(
            "realization datum differs from the folding source".into(),
        ));
    }
    let dim = r.dim;
    let l = r.datum.rank;
    let npos = r.datum.positive_roots.len();
    let mut images: Vec<Option<Vec<Rat>>> = vec![None; dim];
    for i in 0..l {
        images[i] = Some(r.basis_vector(spec.sigma[i]));
    }
    let simple_root_index: Vec<usize> = (0..l)
        .map(|i| {
            let mut root = vec![0i64; l];
            root[i] = 1;
            r.datum.root_index(&root).unwrap()
        })
        .collect();
    for i in 0..l {
        images[r.e_index(simple_root_index[i])] =
            Some(r.basis_vector(r.e_index(simple_root_index[spec.sigma[i]])));
        images[r.f_index(simple_root_index[i])] =
            Some(r.basis_vector(r.f_index(simple_root_index[spec.sigma[i]])));
    }
    // extend by brackets in increasing height
    let mut order: Vec<usize> = (0..npos).collect();
    order.sort_by_key(|&g| r.datum.positive_roots[g].iter().sum::<i64>());
    for &g in &order {
        if images[r.e_index(g)].is_some() {
            continue;
        }
        let (ai, bi, _) = extraspecial_pair(&r.datum, g);
        let ne = table_coeff(r, r.e_index(ai), r.e_index(bi), r.e_index(g));
        let nf = table_coeff(r, r.f_index(ai), r.f_index(bi), r.f_index(g));
        if ne == 0 || nf == 0 {
            return Err(ChevError::Automorphism(format!(
                "missing extraspecial constant for root {g}"
            )));
        }
        let ea = images[r.e_index(ai)].clone().unwrap();
        let eb = images[r.e_index(bi)].clone().unwrap();
        let fa = images[r.f_index(ai)].clone().unwrap();
        let fb = images[r.f_index(bi)].clone().unwrap();
        let scale_e = Rat::from(BigInt::from(ne)).recip();
        let scale_f = Rat::from(BigInt::from(nf)).recip();
        images[r.e_index(g)] = Some(scale_vec(&r.bracket(&ea, &eb), &scale_e));
        images[r.f_index(g)] = Some(scale_vec(&r.bracket(&fa, &fb), &scale_f));
    }
    let mat = Matrix::from_fn(dim, dim, |i, j| images[j].as_ref().unwrap()[i].clone());

    // verify: brackets preserved on all basis pairs
    for a in 0..dim {
        let col_a: Vec<Rat> = (0..dim).map(|i| mat[(i, a)].clone()).collect();
        for b in a + 1..dim {
            let col_b: Vec<Rat> = (0..dim).map(|i| mat[(i, b)].clone()).collect();
            let rhs = r.bracket(&col_a, &col_b);
            let mut lhs = vec![Rat::zero(); dim];
            for &(idx, c) in &r.table[a][b] {
                let cc = Rat::from(BigInt::from(c));
                for i in 0..dim {
                    lhs[i] += &cc * &mat[(i, idx)];
                }
            }
            if lhs != rhs {
                return Err(ChevError::Automorphism(format!(
                    "bracket not preserved on basis pair ({a},{b})"
                )));
            }
        }
    }
    // verify σ^order = identity
    let mut power = mat.clone();
    for _ in 1..spec.order {
        power = power.mul(&mat);
    }
    if power != Matrix::identity(dim) {
        return Err(ChevError::Automorphism(format!(
            "automorphism does not have order {}",
            spec.order
        )));
    }
    Ok(mat)
}

fn table_coeff(r: &LieRealization, a: usize, b: usize, target: usize) -> i64 {
    r.table[a][b]
        .iter()
        .find(|&&(i, _)| i == target)
        .map(|&(_, c)| c)
        .unwrap_or(0)
}

fn scale_vec(v: &[Rat], c: &Rat) -> Vec<Rat> {
    v.iter().map(|x| x * c).collect()
}

// ---------------------------------------------------------------------
// Fixed subalgebra
// ---------------------------------------------------------------------

/// The fixed subalgebra of a diagram automorphism, with a Chevalley
/// basis expressed in ambient coordinates and its own verified
/// realization matching the folded root datum.
#[derive(Clone, Debug)]
pub struct SubalgebraEmbedding {
    pub own: LieRealization,
    /// Ambient coordinates of each 𝔨-basis element, aligned with
    /// `own.labels`.
    pub member_basis: Vec<Vec<Rat>>,
    pub ambient_dim: usize,
    /// Left inverse of the member-basis matrix: maps ambient vectors in
    /// the span of 𝔨 to 𝔨-coordinates.
    coord_solver: Matrix<Rat>,
}

impl SubalgebraEmbedding {
    /// Ambient coordinates of a 𝔨-vector.
    pub fn to_ambient(&self, v: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.ambient_dim];
        for (k, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..self.ambient_dim {
                out[i] += c * &self.member_basis[k][i];
            }
        }
        out
    }

    /// 𝔨-coordinates of an ambient vector, if it lies in the span.
    pub fn from_ambient(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        let coords = self.coord_solver.mul_vec(v);
        let back = self.to_ambient(&coords);
        if back == v {
            Some(coords)
        } else {
            None
        }
    }

    /// Ambient images of the 𝔨 Chevalley generators (e_j, f_j, h_j).
    pub fn generator_images(&self) -> Vec<(String, Vec<Rat>)> {
        let mut out = Vec::new();
        let lk = self.own.rank();
        for j in 0..lk {
            out.push((format!("h{}", j + 1), self.member_basis[j].clone()));
        }
        for j in 0..lk {
            let mut root = vec![0i64; lk];
            root[j] = 1;
            let ri = self.own.datum.root_index(&root).unwrap();
            out.push((format!("e{}", j + 1), self.member_basis[self.own.e_index(ri)].clone()));
            out.push((format!("f{}", j + 1), self.member_basis[self.own.f_index(ri)].clone()));
        }
        out
    }
}

/// Builds the fixed subalgebra of `sigma` and identifies it against the
/// folded root datum of `spec`.
pub fn fixed_subalgebra(
    ambient: &LieRealization,
    sigma: &Matrix<Rat>,
    spec: &FoldingSpec,
) -> Result<SubalgebraEmbedding, ChevError> {
    let dim = ambient.dim;
    let target = build_root_datum(spec.target.family, spec.target.rank)?;
    let k_dim = target.dim();

    // kernel dimension of (σ - I) must match the folded dimension
    let diff = sigma.sub(&Matrix::identity(dim));
    let fixed_dim = dim - diff.rank();
    if fixed_dim != k_dim {
        return Err(ChevError::Subalgebra(format!(
            "fixed subspace has dimension {fixed_dim}, expected {k_dim}"
        )));
    }

    let l = ambient.rank();
    let simple_root_index: Vec<usize> = (0..l)
        .map(|i| {
            let mut root = vec![0i64; l];
            root[i] = 1;
            ambient.datum.root_index(&root).unwrap()
        })
        .collect();

    // Chevalley generators of 𝔨 from the orbit data: E_j = Σ e_k over the
    // orbit, F_j and H_j weighted by the coroot-fold coefficients.
    let lk = target.rank;
    let mut gen_e = Vec::with_capacity(lk);
    let mut gen_f = Vec::with_capacity(lk);
    let mut gen_h = Vec::with_capacity(lk);
    for j in 0..lk {
        let mut e = vec![Rat::zero(); dim];
        let mut f = vec![Rat::zero(); dim];
        let mut h = vec![Rat::zero(); dim];
        for &k in &spec.orbits[j] {
            e[ambient.e_index(simple_root_index[k])] += Rat::one();
        }
        for &(k, c) in &spec.coroot_fold[j] {
            let c = Rat::from(BigInt::from(c));
            f[ambient.f_index(simple_root_index[k])] += &c;
            h[ambient.h_index(k)] += &c;
        }
        if e.iter().all(Zero::is_zero) {
            return Err(ChevError::Subalgebra(format!(
                "orbit sum for folded root {j} vanished"
            )));
        }
        gen_e.push(e);
        gen_f.push(f);
        gen_h.push(h);
    }

    // extraspecial recursion in the folded root system
    let npos_k = target.positive_roots.len();
    let simple_k_index: Vec<usize> = (0..lk)
        .map(|i| {
            let mut root = vec![0i64; lk];
            root[i] = 1;
            target.root_index(&root).unwrap()
        })
        .collect();
    let mut e_img: Vec<Option<Vec<Rat>>> = vec![None; npos_k];
    let mut f_img: Vec<Option<Vec<Rat>>> = vec![None; npos_k];
    for j in 0..lk {
        e_img[simple_k_index[j]] = Some(gen_e[j].clone());
        f_img[simple_k_index[j]] = Some(gen_f[j].clone());
    }
    let mut order: Vec<usize> = (0..npos_k).collect();
    order.sort_by_key(|&g| target.positive_roots[g].iter().sum::<i64>());
    for &g in &order {
        if e_img[g].is_some() {
            continue;
        }
        let (ai, bi, p) = extraspecial_pair(&target, g);
        let scale = Rat::from(BigInt::from(p + 1)).recip();
        let e = ambient.bracket(e_img[ai].as_ref().unwrap(), e_img[bi].as_ref().unwrap());
        let f = ambient.bracket(f_img[ai].as_ref().unwrap(), f_img[bi].as_ref().unwrap());
        if e.iter().all(Zero::is_zero) || f.iter().all(Zero::is_zero) {
            return Err(ChevError::Subalgebra(format!(
                "folded root vector {g} vanished in the ambient algebra"
            )));
        }
        e_img[g] = Some(scale_vec(&e, &scale));
        f_img[g] = Some(scale_vec(&f, &scale));
    }

    // normalize f_γ so that [e_γ, f_γ] equals the folded coroot of γ
    for g in 0..npos_k {
        let coroot = target.coroot_coords(&target.positive_roots[g]);
        let mut target_h = vec![Rat::zero(); dim];
        for (j, &c) in coroot.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = Rat::from(BigInt::from(c));
            for i in 0..dim {
                target_h[i] += &c * &gen_h[j][i];
            }
        }
        let got = ambient.bracket(e_img[g].as_ref().unwrap(), f_img[g].as_ref().unwrap());
        // got must be a scalar multiple of target_h
        let pivot = target_h
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| ChevError::Subalgebra("degenerate folded coroot".into()))?;
        if got[pivot].is_zero() {
            return Err(ChevError::Subalgebra(format!(
                "[e,f] misaligned with the folded coroot for root {g}"
            )));
        }
        let t = &got[pivot] / &target_h[pivot];
        let scaled: Vec<Rat> = target_h.iter().map(|c| c * &t).collect();
        if scaled != got {
            return Err(ChevError::Subalgebra(format!(
                "[e,f] not proportional to the folded coroot for root {g}"
            )));
        }
        if !t.is_one() {
            let inv = t.recip();
            f_img[g] = Some(scale_vec(f_img[g].as_ref().unwrap(), &inv));
        }
    }

    // assemble member basis in the own-basis order
    let mut member_basis = Vec::with_capacity(k_dim);
    for h in &gen_h {
        member_basis.push(h.clone());
    }
    for g in 0..npos_k {
        member_basis.push(e_img[g].clone().unwrap());
        member_basis.push(f_img[g].clone().unwrap());
    }

    // all members must be fixed by sigma
    for (i, v) in member_basis.iter().enumerate() {
        if &sigma.mul_vec(v) != v {
            return Err(ChevError::Subalgebra(format!(
                "basis member {i} is not sigma-fixed"
            )));
        }
    }

    // left inverse of the member matrix for coordinate extraction
    let bmat = Matrix::from_fn(dim, k_dim, |i, j| member_basis[j][i].clone());
    let btb = bmat.transpose().mul(&bmat);
    let btb_inv = btb
        .inverse()
        .ok_or_else(|| ChevError::Subalgebra("member basis is linearly dependent".into()))?;
    let coord_solver = btb_inv.mul(&bmat.transpose());

    // own structure table: brackets expressed in the member basis
    let mut labels = Vec::with_capacity(k_dim);
    for i in 0..lk {
        labels.push(BasisLabel::Cartan(i));
    }
    for g in 0..npos_k {
        labels.push(BasisLabel::Pos(g));
        labels.push(BasisLabel::Neg(g));
    }
    let mut table = vec![vec![Vec::new(); k_dim]; k_dim];
    for a in 0..k_dim {
        for b in 0..k_dim {
            let w = ambient.bracket(&member_basis[a], &member_basis[b]);
            let coords = coord_solver.mul_vec(&w);
            // closure check
            let mut back = vec![Rat::zero(); dim];
            for (k, c) in coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for i in 0..dim {
                    back[i] += c * &member_basis[k][i];
                }
            }
            if back != w {
                return Err(ChevError::Subalgebra(format!(
                    "bracket of members ({a},{b}) leaves the subalgebra"
                )));
            }
            let mut row: SparseVec = Vec::new();
            for (k, c) in coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !c.is_integer() {
                    return Err(ChevError::Subalgebra(format!(
                        "non-integer structure constant at ({a},{b})"
                    )));
                }
                let ci = c.to_integer().to_i64().ok_or_else(|| {
                    ChevError::Subalgebra("structure constant overflow".into())
                })?;
                row.push((k, ci));
            }
            table[a][b] = row;
        }
    }

    let own = LieRealization {
        datum: target,
        dim: k_dim,
        labels,
        table,
        killing: OnceCell::new(),
    };
    verify_realization(&own)?;

    // restriction of the ambient Killing form to 𝔨 stays nondegenerate
    let amb_k = Matrix::from_i64_rows(ambient.killing_matrix());
    let restricted = Matrix::from_fn(k_dim, k_dim, |a, b| {
        let va = &member_basis[a];
        let vb = &member_basis[b];
        let mut acc = Rat::zero();
        for i in 0..dim {
            if va[i].is_zero() {
                continue;
            }
            for j in 0..dim {
                if vb[j].is_zero() {
                    continue;
                }
                acc += &va[i] * &vb[j] * &amb_k[(i, j)];
            }
        }
        acc
    });
    if restricted.det().is_zero() {
        return Err(ChevError::Subalgebra(
            "ambient Killing form restricted to the subalgebra is degenerate".into(),
        ));
    }

    Ok(SubalgebraEmbedding { own, member_basis, ambient_dim: dim, coord_solver })
}

/// Serre-style check on the folded generators: the adjoint action of the
/// induced Cartan elements reproduces the folded Cartan integers.
pub fn verify_folded_serre(emb: &SubalgebraEmbedding) -> Result<(), ChevError> {
    let own = &emb.own;
    let lk = own.rank();
    for i in 0..lk {
        for j in 0..lk {
            let mut root = vec![0i64; lk];
            root[j] = 1;
            let rj = own.datum.root_index(&root).unwrap();
            let expect = own.datum.cartan[i][j];
            let got = table_coeff(own, own.h_index(i), own.e_index(rj), own.e_index(rj));
            if got != expect {
                return Err(ChevError::Invariant(format!(
                    "folded Cartan integer mismatch at ({i},{j}): {got} vs {expect}"
                )));
            }
            if i != j {
                // ad(e_i)^{1-a_ij}(e_j) = 0
                let ri = {
                    let mut r0 = vec![0i64; lk];
                    r0[i] = 1;
                    own.datum.root_index(&r0).unwrap()
                };
                let mut v = own.basis_vector(own.e_index(rj));
                let e_i = own.basis_vector(own.e_index(ri));
                for _ in 0..(1 - expect) {
                    v = own.bracket(&e_i, &v);
                }
                if v.iter().any(|c| !c.is_zero()) {
                    return Err(ChevError::Invariant(format!(
                        "Serre relation fails at ({i},{j})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folding::identity_folding;

    #[test]
    fn a1_realization_relations() {
        let r = realize(Family::A, 1).unwrap();
        assert_eq!(r.dim, 3);
        // [e, f] = h, [h, e] = 2e
        assert_eq!(r.bracket_basis(r.e_index(0), r.f_index(0)), &[(0, 1)]);
        assert_eq!(r.bracket_basis(r.h_index(0), r.e_index(0)), &[(r.e_index(0), 2)]);
    }

    #[test]
    fn a2_and_d4_verified() {
        let a2 = realize(Family::A, 2).unwrap();
        assert_eq!(a2.dim, 8);
        let d4 = realize(Family::D, 4).unwrap();
        assert_eq!(d4.dim, 28);
        assert_eq!(d4.datum.positive_roots.len(), 12);
    }

    #[test]
    fn g2_realization_via_triality() {
        let g2 = realize(Family::G, 2).unwrap();
        assert_eq!(g2.dim, 14);
        // Killing nondegeneracy is part of verify_realization; recheck det directly
        let km = Matrix::from_i64_rows(g2.killing_matrix());
        assert!(!km.det().is_zero());
    }

    #[test]
    fn c2_b3_f4_realizations() {
        assert_eq!(realize(Family::C, 2).unwrap().dim, 10);
        assert_eq!(realize(Family::B, 3).unwrap().dim, 21);
        let f4 = realize(Family::F, 4).unwrap();
        assert_eq!(f4.dim, 52);
    }

    #[test]
    fn cap_rejection() {
        assert!(matches!(
            realize_with_cap(Family::E, 6, 50),
            Err(ChevError::CapExceeded { dim: 78, cap: 50 })
        ));
    }

    #[test]
    fn triality_order_three_fixed_dim() {
        let d4 = realize(Family::D, 4).unwrap();
        let spec = make_folding(FoldingPair::D4G2, 4).unwrap();
        let sigma = automorphism_matrix(&d4, &spec).unwrap();
        let mut p = sigma.clone();
        p = p.mul(&sigma);
        p = p.mul(&sigma);
        assert_eq!(p, Matrix::identity(28));
        let diff = sigma.sub(&Matrix::identity(28));
        assert_eq!(28 - diff.rank(), 14);
    }

    #[test]
    fn a3_fixed_subspace_dimension() {
        let a3 = realize(Family::A, 3).unwrap();
        let spec = make_folding(FoldingPair::A2n1C, 1).unwrap();
        let sigma = automorphism_matrix(&a3, &spec).unwrap();
        let diff = sigma.sub(&Matrix::identity(15));
        assert_eq!(15 - diff.rank(), 10, "fixed subspace of A3 is C2");
        let emb = fixed_subalgebra(&a3, &sigma, &spec).unwrap();
        assert_eq!(emb.own.dim, 10);
        verify_folded_serre(&emb).unwrap();
    }

    #[test]
    fn identity_automorphism() {
        let a2 = realize(Family::A, 2).unwrap();
        let spec = identity_folding(Family::A, 2).unwrap();
        let sigma = automorphism_matrix(&a2, &spec).unwrap();
        assert_eq!(sigma, Matrix::identity(8));
        let emb = fixed_subalgebra(&a2, &sigma, &spec).unwrap();
        assert_eq!(emb.own.dim, 8);
    }

    #[test]
    fn sigma_is_killing_isometry() {
        let d4 = realize(Family::D, 4).unwrap();
        let spec = make_folding(FoldingPair::D4G2, 4).unwrap();
        let sigma = automorphism_matrix(&d4, &spec).unwrap();
        let k = Matrix::from_i64_rows(d4.killing_matrix());
        let congruent = sigma.transpose().mul(&k).mul(&sigma);
        assert_eq!(congruent, k);
    }

    #[test]
    fn a2n_pinned_automorphism_squares() {
        // the A_{2n} fold has no sigma-stable orientation; the pinned
        // extension must still square to the identity
        let a4 = realize(Family::A, 4).unwrap();
        let spec = make_folding(FoldingPair::A2nB, 2).unwrap();
        let sigma = automorphism_matrix(&a4, &spec).unwrap();
        assert_eq!(sigma.mul(&sigma), Matrix::identity(24));
        let emb = fixed_subalgebra(&a4, &sigma, &spec).unwrap();
        assert_eq!(emb.own.dim, 10, "fixed subalgebra of A4 is B2");
        verify_folded_serre(&emb).unwrap();
    }

    #[test]
    fn e6_f4_embedding() {
        let e6 = realize(Family::E, 6).unwrap();
        let spec = make_folding(FoldingPair::E6F4, 6).unwrap();
        let sigma = automorphism_matrix(&e6, &spec).unwrap();
        let emb = fixed_subalgebra(&e6, &sigma, &spec).unwrap();
        assert_eq!(emb.own.dim, 52);
        verify_folded_serre(&emb).unwrap();
    }

    #[test]
    fn mutated_constant_fails_verification() {
        let a2 = realize(Family::A, 2).unwrap();
        let bad = a2.with_mutated_constant(a2.e_index(0), a2.e_index(1), 1);
        assert!(verify_realization(&bad).is_err());
    }

    #[test]
    fn export_roundtrip_json() {
        let a1 = realize(Family::A, 1).unwrap();
        let doc = a1.export_doc();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"schema\":1"));
        assert!(json.contains("h1"));
    }
}
