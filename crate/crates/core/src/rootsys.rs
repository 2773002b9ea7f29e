//! Root-system combinatorics: Cartan data, positive roots, weights,
//! Weyl-formula dimensions, Freudenthal multiplicities, and tensor
//! decomposition — all over exact integer arithmetic.
//!
//! Conventions. Simple roots follow the Bourbaki numbering for every
//! family. `cartan[i][j] = ⟨α_j, α_i^∨⟩`, so column `j` of the Cartan
//! matrix is the simple root `α_j` written in the fundamental-weight
//! basis. Weights are integer vectors in the fundamental-weight basis;
//! roots are integer vectors in the simple-root basis.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::OnceCell;
use serde::Serialize;

use crate::linalg::Matrix;
use crate::Rat;

/// Simple Lie type families.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
        };
        write!(f, "{s}")
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum RootError {
    #[error("invalid simple type {family}{rank}")]
    InvalidType { family: Family, rank: usize },
    #[error("weight is not dominant: {0:?}")]
    NonDominant(Vec<i64>),
    #[error("dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: u128, cap: u128 },
    #[error("character decomposition failed: {0}")]
    Decomposition(String),
}

/// Dimension caps shared by character-level computations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Caps {
    /// Cap on any dimension whose full weight multiset is materialized.
    pub character: u128,
    /// Cap on dimension-only computations.
    pub dimension: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { character: 10_000, dimension: 10_000_000 }
    }
}

/// A weight in the fundamental-weight basis of its root datum.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Weight(v)
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// Full weight multiset of an irreducible module.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMultiplicityMap {
    pub entries: BTreeMap<Weight, i64>,
}

impl WeightMultiplicityMap {
    pub fn total(&self) -> i64 {
        self.entries.values().sum()
    }

    pub fn get(&self, w: &Weight) -> i64 {
        self.entries.get(w).copied().unwrap_or(0)
    }
}

/// Element of the representation ring: a finite integer combination of
/// classes of irreducibles, indexed by dominant highest weights.
/// Negative multiplicities (virtual classes) are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepRingElement {
    pub terms: BTreeMap<Weight, i64>,
}

impl RepRingElement {
    pub fn zero() -> Self {
        RepRingElement { terms: BTreeMap::new() }
    }

    pub fn one(rank: usize) -> Self {
        Self::from_weight(Weight::zero(rank), 1)
    }

    pub fn from_weight(w: Weight, mult: i64) -> Self {
        let mut terms = BTreeMap::new();
        if mult != 0 {
            terms.insert(w, mult);
        }
        RepRingElement { terms }
    }

    pub fn insert(&mut self, w: Weight, mult: i64) {
        if mult == 0 {
            return;
        }
        let e = self.terms.entry(w).or_insert(0);
        *e += mult;
        if *e == 0 {
            let key = self
                .terms
                .iter()
                .find(|(_, &v)| v == 0)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, m) in &other.terms {
            out.insert(w.clone(), *m);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, m) in &other.terms {
            out.insert(w.clone(), -*m);
        }
        out
    }

    pub fn scale(&self, c: i64) -> Self {
        let mut out = Self::zero();
        for (w, m) in &self.terms {
            out.insert(w.clone(), m * c);
        }
        out
    }

    pub fn coeff(&self, w: &Weight) -> i64 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A finite root system with Bourbaki conventions.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub family: Family,
    pub rank: usize,
    /// `cartan[i][j] = ⟨α_j, α_i^∨⟩`.
    pub cartan: Vec<Vec<i64>>,
    /// Positive diagonal making `d_i · cartan[i][j]` symmetric.
    pub symmetrizer: Vec<i64>,
    /// Positive roots in simple-root coordinates, by height then lex.
    pub positive_roots: Vec<Vec<i64>>,
    /// Exponents m_1 <= ... <= m_rank.
    pub exponents: Vec<usize>,
    cartan_inverse: OnceCell<Matrix<Rat>>,
    root_index: OnceCell<HashMap<Vec<i64>, usize>>,
}

impl PartialEq for RootDatum {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.rank == other.rank && self.cartan == other.cartan
    }
}

/// Versioned JSON document for golden-file tests.
#[derive(Serialize)]
pub struct RootDatumDoc<'a> {
    pub schema: u32,
    pub family: String,
    pub rank: usize,
    pub cartan: &'a Vec<Vec<i64>>,
    pub exponents: &'a Vec<usize>,
}

fn cartan_matrix(family: Family, rank: usize) -> Result<(Vec<Vec<i64>>, Vec<i64>), RootError> {
    let l = rank;
    let invalid = || RootError::InvalidType { family, rank };
    let chain = |edges: &[(usize, usize)]| {
        let mut m = vec![vec![0i64; l]; l];
        for i in 0..l {
            m[i][i] = 2;
        }
        for &(a, b) in edges {
            m[a][b] = -1;
            m[b][a] = -1;
        }
        m
    };
    match family {
        Family::A => {
            if l < 1 {
                return Err(invalid());
            }
            let edges: Vec<_> = (0..l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            Ok((chain(&edges), vec![1; l]))
        }
        Family::B => {
            if l < 2 {
                return Err(invalid());
            }
            let edges: Vec<_> = (0..l - 1).map(|i| (i, i + 1)).collect();
            let mut m = chain(&edges);
            m[l - 1][l - 2] = -2; // ⟨α_{l-1}, α_l^∨⟩ = -2, short last root
            let mut d = vec![2; l];
            d[l - 1] = 1;
            Ok((m, d))
        }
        Family::C => {
            if l < 2 {
                return Err(invalid());
            }
            let edges: Vec<_> = (0..l - 1).map(|i| (i, i + 1)).collect();
            let mut m = chain(&edges);
            m[l - 2][l - 1] = -2; // ⟨α_l, α_{l-1}^∨⟩ = -2, long last root
            let mut d = vec![1; l];
            d[l - 1] = 2;
            Ok((m, d))
        }
        Family::D => {
            if l < 3 {
                return Err(invalid());
            }
            let mut edges: Vec<_> = (0..l.saturating_sub(3)).map(|i| (i, i + 1)).collect();
            edges.push((l - 3, l - 2));
            edges.push((l - 3, l - 1));
            Ok((chain(&edges), vec![1; l]))
        }
        Family::E => {
            if l != 6 {
                return Err(invalid());
            }
            // Bourbaki E6: chain 1-3-4-5-6 with 2 attached to 4.
            let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (1, 3)];
            Ok((chain(&edges), vec![1; 6]))
        }
        Family::F => {
            if l != 4 {
                return Err(invalid());
            }
            let mut m = chain(&[(0, 1), (1, 2), (2, 3)]);
            m[2][1] = -2; // ⟨α_2, α_3^∨⟩ = -2: α_1,α_2 long, α_3,α_4 short
            Ok((m, vec![2, 2, 1, 1]))
        }
        Family::G => {
            if l != 2 {
                return Err(invalid());
            }
            // α_1 short, α_2 long
            Ok((vec![vec![2, -3], vec![-1, 2]], vec![1, 3]))
        }
    }
}

/// Enumerates positive roots by closure under simple-root addition.
fn enumerate_positive_roots(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let l = cartan.len();
    let mut roots: Vec<Vec<i64>> = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    for i in 0..l {
        let mut v = vec![0i64; l];
        v[i] = 1;
        seen.insert(v.clone());
        roots.push(v);
    }
    let mut idx = 0;
    while idx < roots.len() {
        let a = roots[idx].clone();
        for i in 0..l {
            // ⟨a, α_i^∨⟩
            let k: i64 = (0..l).map(|j| cartan[i][j] * a[j]).sum();
            // chain-down length p
            let mut p = 0i64;
            let mut down = a.clone();
            loop {
                down[i] -= 1;
                if down[i] < 0 || !seen.contains(&down) {
                    break;
                }
                p += 1;
            }
            if p - k > 0 {
                let mut up = a.clone();
                up[i] += 1;
                if seen.insert(up.clone()) {
                    roots.push(up);
                }
            }
        }
        idx += 1;
    }
    roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
    roots
}

fn exponents_from_heights(positive_roots: &[Vec<i64>], rank: usize) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in positive_roots {
        let h: i64 = r.iter().sum();
        *counts.entry(h as usize).or_insert(0) += 1;
    }
    let max_h = counts.keys().max().copied().unwrap_or(0);
    // dual partition of the height distribution
    let mut exps = Vec::new();
    for layer in 1.. {
        let count = (1..=max_h)
            .filter(|h| counts.get(h).copied().unwrap_or(0) >= layer)
            .count();
        if count == 0 {
            break;
        }
        exps.push(count);
    }
    let mut exps: Vec<usize> = exps;
    exps.sort_unstable();
    debug_assert_eq!(exps.len(), rank);
    exps
}

/// Builds the root datum for a valid simple type.
pub fn build_root_datum(family: Family, rank: usize) -> Result<RootDatum, RootError> {
    let (cartan, symmetrizer) = cartan_matrix(family, rank)?;
    let positive_roots = enumerate_positive_roots(&cartan);
    let exponents = exponents_from_heights(&positive_roots, rank);
    let datum = RootDatum {
        family,
        rank,
        cartan,
        symmetrizer,
        positive_roots,
        exponents,
        cartan_inverse: OnceCell::new(),
        root_index: OnceCell::new(),
    };
    // Σ (2m_i + 1) = rank + 2|Φ+|, both sides independent
    let lhs: usize = datum.exponents.iter().map(|m| 2 * m + 1).sum();
    assert_eq!(lhs, datum.rank + 2 * datum.positive_roots.len());
    Ok(datum)
}

impl RootDatum {
    pub fn dim(&self) -> usize {
        self.rank + 2 * self.positive_roots.len()
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.family, self.rank)
    }

    pub fn to_doc(&self) -> RootDatumDoc<'_> {
        RootDatumDoc {
            schema: 1,
            family: self.family.to_string(),
            rank: self.rank,
            cartan: &self.cartan,
            exponents: &self.exponents,
        }
    }

    /// Exponents recomputed from the dual partition of root heights.
    pub fn exponents_via_heights(&self) -> Vec<usize> {
        exponents_from_heights(&self.positive_roots, self.rank)
    }

    fn cartan_inv(&self) -> &Matrix<Rat> {
        self.cartan_inverse.get_or_init(|| {
            Matrix::from_i64_rows(&self.cartan)
                .inverse()
                .expect("Cartan matrix invertible")
        })
    }

    pub fn root_index(&self, root: &[i64]) -> Option<usize> {
        let map = self.root_index.get_or_init(|| {
            self.positive_roots
                .iter()
                .enumerate()
                .map(|(i, r)| (r.clone(), i))
                .collect()
        });
        map.get(root).copied()
    }

    /// Fundamental coordinates of a vector given in simple-root coordinates.
    pub fn root_to_fund(&self, root: &[i64]) -> Weight {
        Weight(
            (0..self.rank)
                .map(|i| (0..self.rank).map(|j| self.cartan[i][j] * root[j]).sum())
                .collect(),
        )
    }

    /// Simple-root coordinates of a weight, if it lies in the root lattice.
    pub fn fund_to_root(&self, w: &Weight) -> Option<Vec<i64>> {
        let inv = self.cartan_inv();
        let v: Vec<Rat> = w.0.iter().map(|&c| Rat::from(BigInt::from(c))).collect();
        let r = inv.mul_vec(&v);
        let mut out = Vec::with_capacity(self.rank);
        for x in r {
            if !x.is_integer() {
                return None;
            }
            out.push(x.to_integer().to_i64()?);
        }
        Some(out)
    }

    /// Height of a weight: sum of its simple-root coordinates (rational
    /// for weights outside the root lattice).
    pub fn weight_height(&self, w: &Weight) -> Rat {
        let inv = self.cartan_inv();
        let v: Vec<Rat> = w.0.iter().map(|&c| Rat::from(BigInt::from(c))).collect();
        inv.mul_vec(&v).into_iter().sum()
    }

    /// Scaled invariant form (λ, μ) with λ in fundamental and μ in
    /// simple-root coordinates; normalization (α_i, α_i) = 2 d_i.
    fn form_fund_root(&self, w: &Weight, root: &[i64]) -> i64 {
        (0..self.rank)
            .map(|j| root[j] * self.symmetrizer[j] * w.0[j])
            .sum()
    }

    /// (α, α) in the scaled normalization, for α in root coordinates.
    fn root_norm(&self, root: &[i64]) -> i64 {
        let fund = self.root_to_fund(root);
        self.form_fund_root(&fund, root)
    }

    /// ⟨λ, α^∨⟩ for a positive root α; exact integer.
    pub fn pairing_with_coroot(&self, w: &Weight, root: &[i64]) -> i64 {
        let num = 2 * self.form_fund_root(w, root);
        let den = self.root_norm(root);
        debug_assert_eq!(num % den, 0);
        num / den
    }

    /// Coroot α^∨ as an integer combination of simple coroots.
    pub fn coroot_coords(&self, root: &[i64]) -> Vec<i64> {
        let norm = self.root_norm(root);
        (0..self.rank)
            .map(|j| {
                let num = root[j] * 2 * self.symmetrizer[j];
                debug_assert_eq!(num % norm, 0);
                num / norm
            })
            .collect()
    }

    /// Simple reflection s_i acting on a weight.
    pub fn reflect(&self, w: &Weight, i: usize) -> Weight {
        let c = w.0[i];
        Weight(
            (0..self.rank)
                .map(|j| w.0[j] - c * self.cartan[j][i])
                .collect(),
        )
    }

    /// Dominant representative of the Weyl orbit of `w`.
    pub fn dominate(&self, w: &Weight) -> Weight {
        let mut v = w.clone();
        let mut guard = 0usize;
        loop {
            match v.0.iter().position(|&c| c < 0) {
                None => return v,
                Some(i) => v = self.reflect(&v, i),
            }
            guard += 1;
            assert!(guard < 1_000_000, "dominate failed to terminate");
        }
    }

    /// Full Weyl orbit of a weight, in sorted order.
    pub fn weyl_orbit(&self, w: &Weight) -> Vec<Weight> {
        let mut seen: HashSet<Weight> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(w.clone());
        queue.push_back(w.clone());
        while let Some(v) = queue.pop_front() {
            for i in 0..self.rank {
                let r = self.reflect(&v, i);
                if seen.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
        let mut out: Vec<Weight> = seen.into_iter().collect();
        out.sort();
        out
    }

    pub fn weyl_vector(&self) -> Weight {
        Weight(vec![1; self.rank])
    }

    /// Weyl dimension formula; exact integer.
    pub fn weyl_dimension(&self, w: &Weight) -> Result<u128, RootError> {
        if !w.is_dominant() {
            return Err(RootError::NonDominant(w.0.clone()));
        }
        let rho = self.weyl_vector();
        let lam_rho = w.add(&rho);
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for alpha in &self.positive_roots {
            num *= BigInt::from(self.form_fund_root(&lam_rho, alpha));
            den *= BigInt::from(self.form_fund_root(&rho, alpha));
        }
        let q = &num / &den;
        debug_assert!((num - &q * den).is_zero());
        q.to_u128()
            .ok_or(RootError::CapExceeded { dim: u128::MAX, cap: u128::MAX })
    }

    fn check_char_cap(&self, w: &Weight, caps: &Caps) -> Result<u128, RootError> {
        let dim = self.weyl_dimension(w)?;
        if dim > caps.character {
            return Err(RootError::CapExceeded { dim, cap: caps.character });
        }
        Ok(dim)
    }

    /// All weights of V(λ) as a set (without multiplicities).
    fn weight_support(&self, lambda: &Weight) -> HashSet<Weight> {
        let mut support = HashSet::new();
        let mut queue = VecDeque::new();
        support.insert(lambda.clone());
        queue.push_back(lambda.clone());
        let simple_funds: Vec<Weight> = (0..self.rank)
            .map(|i| {
                let mut root = vec![0i64; self.rank];
                root[i] = 1;
                self.root_to_fund(&root)
            })
            .collect();
        while let Some(v) = queue.pop_front() {
            for i in 0..self.rank {
                let cand = v.sub(&simple_funds[i]);
                if support.contains(&cand) {
                    continue;
                }
                let dom = self.dominate(&cand);
                // cand is a weight iff its dominant representative is <= λ
                if let Some(diff) = self.fund_to_root(&lambda.sub(&dom)) {
                    if diff.iter().all(|&c| c >= 0) {
                        support.insert(cand.clone());
                        queue.push_back(cand);
                    }
                }
            }
        }
        support
    }

    /// Full weight multiset of V(λ) by the Freudenthal recursion.
    pub fn freudenthal_multiplicities(
        &self,
        lambda: &Weight,
        caps: &Caps,
    ) -> Result<WeightMultiplicityMap, RootError> {
        let dim = self.check_char_cap(lambda, caps)?;
        let support = self.weight_support(lambda);
        // dominant weights sorted by decreasing height
        let mut dominants: Vec<Weight> = support.iter().filter(|w| w.is_dominant()).cloned().collect();
        dominants.sort_by(|a, b| {
            self.weight_height(b)
                .cmp(&self.weight_height(a))
                .then_with(|| a.cmp(b))
        });
        let rho = self.weyl_vector();
        let mut dom_mult: HashMap<Weight, i64> = HashMap::new();
        for mu in &dominants {
            if mu == lambda {
                dom_mult.insert(mu.clone(), 1);
                continue;
            }
            // denominator (λ+μ+2ρ, λ-μ) in the scaled form
            let diff_root = self
                .fund_to_root(&lambda.sub(mu))
                .expect("λ-μ in root lattice");
            let sum_w = lambda.add(mu).add(&rho.scale(2));
            let denom = self.form_fund_root(&sum_w, &diff_root);
            assert!(denom > 0, "Freudenthal denominator must be positive");
            let mut acc: i64 = 0;
            for alpha in &self.positive_roots {
                let alpha_fund = self.root_to_fund(alpha);
                let mut t = 1i64;
                loop {
                    let nu = mu.add(&alpha_fund.scale(t));
                    if !support.contains(&nu) {
                        break;
                    }
                    let m = dom_mult
                        .get(&self.dominate(&nu))
                        .copied()
                        .expect("higher weight already computed");
                    acc += m * self.form_fund_root(&nu, alpha);
                    t += 1;
                }
            }
            let num = 2 * acc;
            assert_eq!(num % denom, 0, "Freudenthal multiplicity must be integral");
            dom_mult.insert(mu.clone(), num / denom);
        }
        // expand over Weyl orbits
        let mut entries = BTreeMap::new();
        for (mu, m) in &dom_mult {
            if *m == 0 {
                continue;
            }
            for w in self.weyl_orbit(mu) {
                entries.insert(w, *m);
            }
        }
        let map = WeightMultiplicityMap { entries };
        assert_eq!(map.total() as u128, dim, "multiplicities must sum to the Weyl dimension");
        assert_eq!(map.get(lambda), 1, "highest weight has multiplicity one");
        Ok(map)
    }

    /// Decomposes a character multiset into irreducibles by iterated
    /// highest-weight subtraction. Fails loudly on negative multiplicity.
    pub fn decompose_character(
        &self,
        mut multiset: BTreeMap<Weight, i64>,
        caps: &Caps,
    ) -> Result<RepRingElement, RootError> {
        let mut char_cache: HashMap<Weight, WeightMultiplicityMap> = HashMap::new();
        let mut out = RepRingElement::zero();
        loop {
            multiset.retain(|_, m| *m != 0);
            let Some(top) = multiset
                .iter()
                .max_by(|(a, _), (b, _)| {
                    self.weight_height(a)
                        .cmp(&self.weight_height(b))
                        .then_with(|| a.cmp(b))
                })
                .map(|(w, _)| w.clone())
            else {
                return Ok(out);
            };
            let mult = multiset[&top];
            if !top.is_dominant() || mult < 0 {
                return Err(RootError::Decomposition(format!(
                    "leading term {:?} with multiplicity {} is not a dominant character",
                    top.0, mult
                )));
            }
            let ch = match char_cache.get(&top) {
                Some(c) => c.clone(),
                None => {
                    let c = self.freudenthal_multiplicities(&top, caps)?;
                    char_cache.insert(top.clone(), c.clone());
                    c
                }
            };
            for (w, m) in &ch.entries {
                *multiset.entry(w.clone()).or_insert(0) -= mult * m;
            }
            out.insert(top, mult);
        }
    }

    /// Tensor product decomposition via character product plus iterated
    /// dominant-weight subtraction.
    pub fn tensor_decompose(
        &self,
        lambda: &Weight,
        mu: &Weight,
        caps: &Caps,
    ) -> Result<RepRingElement, RootError> {
        let d1 = self.weyl_dimension(lambda)?;
        let d2 = self.weyl_dimension(mu)?;
        let prod = d1.checked_mul(d2).ok_or(RootError::CapExceeded {
            dim: u128::MAX,
            cap: caps.character,
        })?;
        if prod > caps.character {
            return Err(RootError::CapExceeded { dim: prod, cap: caps.character });
        }
        let c1 = self.freudenthal_multiplicities(lambda, caps)?;
        let c2 = self.freudenthal_multiplicities(mu, caps)?;
        let mut product: BTreeMap<Weight, i64> = BTreeMap::new();
        for (w1, m1) in &c1.entries {
            for (w2, m2) in &c2.entries {
                *product.entry(w1.add(w2)).or_insert(0) += m1 * m2;
            }
        }
        let result = self.decompose_character(product, caps)?;
        // dimension conservation
        let total: u128 = result
            .terms
            .iter()
            .map(|(w, m)| self.weyl_dimension(w).unwrap() * (*m as u128))
            .sum();
        assert_eq!(total, prod, "tensor decomposition must conserve dimension");
        Ok(result)
    }

    /// Tensor decomposition by the Brauer-Klimyk (Racah-Speiser) rule;
    /// an independent route used to cross-check `tensor_decompose`.
    pub fn tensor_decompose_klimyk(
        &self,
        lambda: &Weight,
        mu: &Weight,
        caps: &Caps,
    ) -> Result<RepRingElement, RootError> {
        self.weyl_dimension(lambda)?;
        let ch = self.freudenthal_multiplicities(mu, caps)?;
        let rho = self.weyl_vector();
        let mut out = RepRingElement::zero();
        for (nu, m) in &ch.entries {
            // reflect λ+ν+ρ to the dominant chamber tracking the sign
            let mut v = lambda.add(nu).add(&rho);
            let mut sign = 1i64;
            let mut boundary = false;
            let mut guard = 0;
            loop {
                if v.0.iter().any(|&c| c == 0) {
                    boundary = true;
                    break;
                }
                match v.0.iter().position(|&c| c < 0) {
                    None => break,
                    Some(i) => {
                        v = self.reflect(&v, i);
                        sign = -sign;
                    }
                }
                guard += 1;
                assert!(guard < 1_000_000);
            }
            if boundary {
                continue;
            }
            out.insert(v.sub(&rho), sign * m);
        }
        Ok(out)
    }

    /// Σ mult · dim over the classes of a representation-ring element.
    pub fn rep_dimension(&self, elt: &RepRingElement) -> Result<i128, RootError> {
        let mut acc: i128 = 0;
        for (w, m) in &elt.terms {
            acc += self.weyl_dimension(w)? as i128 * *m as i128;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(f: Family, r: usize) -> RootDatum {
        build_root_datum(f, r).unwrap()
    }

    #[test]
    fn rejects_invalid_types() {
        assert!(build_root_datum(Family::B, 1).is_err());
        assert!(build_root_datum(Family::E, 7).is_err());
        assert!(build_root_datum(Family::G, 3).is_err());
        assert!(build_root_datum(Family::D, 2).is_err());
    }

    #[test]
    fn bourbaki_exponents_golden() {
        // golden data for rank <= 6
        let cases: Vec<(Family, usize, Vec<usize>)> = vec![
            (Family::A, 1, vec![1]),
            (Family::A, 2, vec![1, 2]),
            (Family::A, 3, vec![1, 2, 3]),
            (Family::A, 4, vec![1, 2, 3, 4]),
            (Family::A, 5, vec![1, 2, 3, 4, 5]),
            (Family::B, 2, vec![1, 3]),
            (Family::B, 3, vec![1, 3, 5]),
            (Family::B, 4, vec![1, 3, 5, 7]),
            (Family::C, 2, vec![1, 3]),
            (Family::C, 3, vec![1, 3, 5]),
            (Family::C, 4, vec![1, 3, 5, 7]),
            (Family::D, 3, vec![1, 2, 3]),
            (Family::D, 4, vec![1, 3, 3, 5]),
            (Family::D, 5, vec![1, 3, 4, 5, 7]),
            (Family::D, 6, vec![1, 3, 5, 5, 7, 9]),
            (Family::G, 2, vec![1, 5]),
            (Family::F, 4, vec![1, 5, 7, 11]),
            (Family::E, 6, vec![1, 4, 5, 7, 8, 11]),
        ];
        for (f, r, exps) in cases {
            let d = datum(f, r);
            assert_eq!(d.exponents, exps, "{f}{r}");
            assert_eq!(d.exponents_via_heights(), exps, "{f}{r} via heights");
        }
    }

    #[test]
    fn d4_exponents_and_a1_g2_examples() {
        assert_eq!(datum(Family::D, 4).exponents, vec![1, 3, 3, 5]);
        let a1 = datum(Family::A, 1);
        assert_eq!(a1.exponents, vec![1]);
        assert_eq!(a1.positive_roots.len(), 1);
        let g2 = datum(Family::G, 2);
        assert_eq!(g2.positive_roots.len(), 6);
        assert_eq!(g2.exponents, vec![1, 5]);
        assert_eq!(g2.dim(), 14);
    }

    #[test]
    fn g2_roots_match_reflection_orbit_oracle() {
        // independent enumeration: close the simple roots under the Weyl group
        let g2 = datum(Family::G, 2);
        let mut all: HashSet<Weight> = HashSet::new();
        for i in 0..2 {
            let mut root = vec![0i64; 2];
            root[i] = 1;
            for w in g2.weyl_orbit(&g2.root_to_fund(&root)) {
                all.insert(w);
            }
        }
        assert_eq!(all.len(), 12);
        let pos: HashSet<Weight> = g2
            .positive_roots
            .iter()
            .map(|r| g2.root_to_fund(r))
            .collect();
        assert_eq!(pos.len(), 6);
        for p in &pos {
            assert!(all.contains(p));
        }
    }

    #[test]
    fn exponent_height_oracle_small() {
        // C2: heights of the 4 positive roots are 1,1,2,3
        let c2 = datum(Family::C, 2);
        let mut hts: Vec<i64> = c2.positive_roots.iter().map(|r| r.iter().sum()).collect();
        hts.sort_unstable();
        assert_eq!(hts, vec![1, 1, 2, 3]);
        assert_eq!(c2.exponents_via_heights(), vec![1, 3]);
        assert_eq!(datum(Family::A, 3).exponents_via_heights(), vec![1, 2, 3]);
        assert_eq!(datum(Family::A, 1).exponents_via_heights(), vec![1]);
    }

    #[test]
    fn weyl_dimension_examples() {
        let f4 = datum(Family::F, 4);
        assert_eq!(f4.weyl_dimension(&Weight::fundamental(4, 0)).unwrap(), 52);
        assert_eq!(f4.weyl_dimension(&Weight::fundamental(4, 3)).unwrap(), 26);
        let e6 = datum(Family::E, 6);
        assert_eq!(e6.weyl_dimension(&Weight::fundamental(6, 3)).unwrap(), 2925);
        assert_eq!(e6.weyl_dimension(&Weight::zero(6)).unwrap(), 1);
        assert!(f4.weyl_dimension(&Weight(vec![-1, 0, 0, 0])).is_err());
    }

    #[test]
    fn freudenthal_a2_adjoint() {
        let a2 = datum(Family::A, 2);
        let adjoint = Weight(vec![1, 1]);
        let caps = Caps::default();
        let m = a2.freudenthal_multiplicities(&adjoint, &caps).unwrap();
        assert_eq!(m.total(), 8);
        assert_eq!(m.get(&Weight::zero(2)), 2);
        // the six roots have multiplicity 1
        for r in &a2.positive_roots {
            assert_eq!(m.get(&a2.root_to_fund(r)), 1);
        }
    }

    #[test]
    fn freudenthal_f4_26dim() {
        let f4 = datum(Family::F, 4);
        let caps = Caps::default();
        let m = f4
            .freudenthal_multiplicities(&Weight::fundamental(4, 3), &caps)
            .unwrap();
        assert_eq!(m.total(), 26);
        assert_eq!(m.get(&Weight::zero(4)), 2);
    }

    #[test]
    fn freudenthal_trivial_and_cap() {
        let a2 = datum(Family::A, 2);
        let caps = Caps::default();
        let m = a2
            .freudenthal_multiplicities(&Weight::zero(2), &caps)
            .unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.get(&Weight::zero(2)), 1);
        let tight = Caps { character: 5, dimension: 100 };
        let err = a2
            .freudenthal_multiplicities(&Weight(vec![1, 1]), &tight)
            .unwrap_err();
        match err {
            RootError::CapExceeded { dim, cap } => {
                assert_eq!(dim, 8);
                assert_eq!(cap, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn tensor_trivial_factor() {
        let a2 = datum(Family::A, 2);
        let caps = Caps::default();
        let lam = Weight(vec![2, 1]);
        let t = a2.tensor_decompose(&lam, &Weight::zero(2), &caps).unwrap();
        assert_eq!(t, RepRingElement::from_weight(lam, 1));
    }

    #[test]
    fn tensor_sl2_clebsch_gordan() {
        let a1 = datum(Family::A, 1);
        let caps = Caps::default();
        let t = a1
            .tensor_decompose(&Weight(vec![3]), &Weight(vec![2]), &caps)
            .unwrap();
        let mut expected = RepRingElement::zero();
        for hw in [1i64, 3, 5] {
            expected.insert(Weight(vec![hw]), 1);
        }
        assert_eq!(t, expected);
    }

    #[test]
    fn tensor_methods_agree_and_commute() {
        let caps = Caps::default();
        for (f, r, l1, l2) in [
            (Family::A, 2usize, vec![1i64, 1], vec![1i64, 0]),
            (Family::C, 2, vec![1, 0], vec![0, 1]),
            (Family::G, 2, vec![1, 0], vec![1, 0]),
        ] {
            let d = datum(f, r);
            let a = Weight(l1);
            let b = Weight(l2);
            let t1 = d.tensor_decompose(&a, &b, &caps).unwrap();
            let t2 = d.tensor_decompose(&b, &a, &caps).unwrap();
            let t3 = d.tensor_decompose_klimyk(&a, &b, &caps).unwrap();
            assert_eq!(t1, t2);
            assert_eq!(t1, t3);
            let da = d.weyl_dimension(&a).unwrap() as i128;
            let db = d.weyl_dimension(&b).unwrap() as i128;
            assert_eq!(d.rep_dimension(&t1).unwrap(), da * db);
        }
    }

    #[test]
    fn weyl_invariance_of_multiplicities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a2 = datum(Family::A, 2);
        let caps = Caps::default();
        let m = a2
            .freudenthal_multiplicities(&Weight(vec![2, 2]), &caps)
            .unwrap();
        let weights: Vec<Weight> = m.entries.keys().cloned().collect();
        for _ in 0..100 {
            let w = weights[rng.gen_range(0..weights.len())].clone();
            let mut img = w.clone();
            for _ in 0..rng.gen_range(1..6) {
                let i = rng.gen_range(0..2);
                img = a2.reflect(&img, i);
            }
            assert_eq!(m.get(&w), m.get(&img));
        }
    }

    #[test]
    fn rep_ring_no_zero_terms() {
        let mut e = RepRingElement::zero();
        e.insert(Weight(vec![1, 0]), 2);
        e.insert(Weight(vec![1, 0]), -2);
        assert!(e.is_zero());
    }
}
