//! Diagram automorphisms of the simply-laced root systems, the folded
//! root datum, and the induced restriction map on weights.
//!
//! The five folded pairs are (A_{2n+1}, C_{n+1}), (A_{2n}, B_n),
//! (D_n, B_{n-1}), (D_4, G_2) and (E_6, F_4). Orbits are indexed by the
//! simple roots of the folded system; the restriction matrix is derived
//! from the coroot folds rather than copied from a table, so the known
//! weight-restriction tables can serve as independent checks.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::linalg::{smith_normal_form, Matrix};
use crate::rootsys::{build_root_datum, Family, RootDatum, RootError, Weight};

/// The five diagram-folding pairs.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Hash)]
pub enum FoldingPair {
    /// (A_{2n+1}, C_{n+1})
    A2n1C,
    /// (A_{2n}, B_n)
    A2nB,
    /// (D_n, B_{n-1})
    DnB,
    /// (D_4, G_2), the order-3 triality fold
    D4G2,
    /// (E_6, F_4)
    E6F4,
}

impl FoldingPair {
    pub const ALL: [FoldingPair; 5] = [
        FoldingPair::A2n1C,
        FoldingPair::A2nB,
        FoldingPair::DnB,
        FoldingPair::D4G2,
        FoldingPair::E6F4,
    ];

    pub fn parse(s: &str) -> Option<FoldingPair> {
        match s {
            "A2n1_C" | "a2n1_c" => Some(FoldingPair::A2n1C),
            "A2n_B" | "a2n_b" => Some(FoldingPair::A2nB),
            "Dn_B" | "dn_b" => Some(FoldingPair::DnB),
            "D4_G2" | "d4_g2" => Some(FoldingPair::D4G2),
            "E6_F4" | "e6_f4" => Some(FoldingPair::E6F4),
        _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FoldingPair::A2n1C => "A2n1_C",
            FoldingPair::A2nB => "A2n_B",
            FoldingPair::DnB => "Dn_B",
            FoldingPair::D4G2 => "D4_G2",
            FoldingPair::E6F4 => "E6_F4",
        }
    }

    /// Default parameter for the fixed pairs; smallest parameter for families.
    pub fn default_n(&self) -> usize {
        match self {
            FoldingPair::A2n1C => 1,
            FoldingPair::A2nB => 2,
            FoldingPair::DnB => 4,
            FoldingPair::D4G2 => 4,
            FoldingPair::E6F4 => 6,
        }
    }
}

#[derive(thiserror::Error, Debug)]
pub enum FoldingError {
    #[error("parameter n={n} out of range for pair {pair:?}")]
    BadParameter { pair: FoldingPair, n: usize },
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("folded Cartan matrix does not match {target}: computed {computed:?}")]
    CartanMismatch { target: String, computed: Vec<Vec<i64>> },
    #[error("sigma is not a Cartan-matrix automorphism")]
    NotAnAutomorphism,
}

/// A diagram automorphism together with the folded root datum and the
/// restriction map on weights.
#[derive(Debug)]
pub struct FoldingSpec {
    /// `None` for the degenerate identity folding used in tests.
    pub pair: Option<FoldingPair>,
    pub n: usize,
    pub source: RootDatum,
    /// Permutation of simple-root indices (0-based).
    pub sigma: Vec<usize>,
    pub order: usize,
    /// Orbits of sigma, indexed by the folded simple root they restrict to.
    pub orbits: Vec<Vec<usize>>,
    /// Chosen representative per orbit: the smallest index.
    pub orbit_reps: Vec<usize>,
    /// Coroot folds: per folded index j, the combination Σ c_k α_k^∨.
    pub coroot_fold: Vec<Vec<(usize, i64)>>,
    pub target: RootDatum,
    /// Restriction matrix R (rank_target × rank_source) on fundamental
    /// coordinates: ρ(λ) = R λ.
    pub restriction: Vec<Vec<i64>>,
}

fn orbits_of(sigma: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; sigma.len()];
    let mut orbits = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            orbit.push(i);
            i = sigma[i];
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

fn permutation_order(sigma: &[usize]) -> usize {
    let mut ord = 1;
    for orbit in orbits_of(sigma) {
        ord = num_integer::lcm(ord, orbit.len());
    }
    ord
}

/// Constructs the folding data for a pair at parameter `n`.
///
/// For the family pairs, `n` is the parameter in the pair name:
/// (A_{2n+1}, C_{n+1}) needs n >= 1, (A_{2n}, B_n) needs n >= 2,
/// (D_n, B_{n-1}) needs n >= 3. D4_G2 and E6_F4 ignore `n` beyond
/// validation (pass 4 and 6 respectively, or their defaults).
pub fn make_folding(pair: FoldingPair, n: usize) -> Result<FoldingSpec, FoldingError> {
    let bad = || FoldingError::BadParameter { pair, n };
    let (source, sigma, target_family, target_rank, orbit_order): (
        RootDatum,
        Vec<usize>,
        Family,
        usize,
        Vec<Vec<usize>>,
    ) = match pair {
        FoldingPair::A2n1C => {
            if n < 1 {
                return Err(bad());
            }
            let l = 2 * n + 1;
            let source = build_root_datum(Family::A, l)?;
            let sigma: Vec<usize> = (0..l).map(|i| l - 1 - i).collect();
            // folded index j <- orbit {j, 2n-j} for j < n, fixed {n} last
            let mut orbits: Vec<Vec<usize>> = (0..n).map(|j| vec![j, l - 1 - j]).collect();
            orbits.push(vec![n]);
            (source, sigma, Family::C, n + 1, orbits)
        }
        FoldingPair::A2nB => {
            if n < 2 {
                return Err(bad());
            }
            let l = 2 * n;
            let source = build_root_datum(Family::A, l)?;
            let sigma: Vec<usize> = (0..l).map(|i| l - 1 - i).collect();
            let orbits: Vec<Vec<usize>> = (0..n).map(|j| vec![j, l - 1 - j]).collect();
            (source, sigma, Family::B, n, orbits)
        }
        FoldingPair::DnB => {
            if n < 3 {
                return Err(bad());
            }
            let source = build_root_datum(Family::D, n)?;
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.swap(n - 2, n - 1);
            let mut orbits: Vec<Vec<usize>> = (0..n - 2).map(|j| vec![j]).collect();
            orbits.push(vec![n - 2, n - 1]);
            (source, sigma, Family::B, n - 1, orbits)
        }
        FoldingPair::D4G2 => {
            if n != 4 {
                return Err(bad());
            }
            let source = build_root_datum(Family::D, 4)?;
            // triality 1 -> 3 -> 4 -> 1 (0-based: 0 -> 2 -> 3 -> 0), node 2 fixed
            let sigma = vec![2, 1, 3, 0];
            let orbits = vec![vec![0, 2, 3], vec![1]];
            (source, sigma, Family::G, 2, orbits)
        }
        FoldingPair::E6F4 => {
            if n != 6 {
                return Err(bad());
            }
            let source = build_root_datum(Family::E, 6)?;
            // 1 <-> 6, 3 <-> 5 (0-based: 0 <-> 5, 2 <-> 4)
            let sigma = vec![5, 1, 4, 3, 2, 0];
            // folded indices: β1 <- {2}, β2 <- {4}, β3 <- {3,5}, β4 <- {1,6}
            let orbits = vec![vec![1], vec![3], vec![2, 4], vec![0, 5]];
            (source, sigma, Family::F, 4, orbits)
        }
    };
    finish_folding(Some(pair), n, source, sigma, target_family, target_rank, orbit_order)
}

/// Degenerate identity folding on an arbitrary datum, for test scaffolding.
pub fn identity_folding(family: Family, rank: usize) -> Result<FoldingSpec, FoldingError> {
    let source = build_root_datum(family, rank)?;
    let sigma: Vec<usize> = (0..rank).collect();
    let orbits: Vec<Vec<usize>> = (0..rank).map(|i| vec![i]).collect();
    finish_folding(None, rank, source, sigma, family, rank, orbits)
}

fn finish_folding(
    pair: Option<FoldingPair>,
    n: usize,
    source: RootDatum,
    sigma: Vec<usize>,
    target_family: Family,
    target_rank: usize,
    orbits: Vec<Vec<usize>>,
) -> Result<FoldingSpec, FoldingError> {
    let l = source.rank;
    // sigma must preserve the Cartan matrix
    for i in 0..l {
        for j in 0..l {
            if source.cartan[sigma[i]][sigma[j]] != source.cartan[i][j] {
                return Err(FoldingError::NotAnAutomorphism);
            }
        }
    }
    let order = permutation_order(&sigma);
    {
        let computed = orbits_of(&sigma);
        let mut sorted_given: Vec<Vec<usize>> = orbits.clone();
        sorted_given.sort();
        let mut sorted_computed = computed;
        sorted_computed.sort();
        assert_eq!(sorted_given, sorted_computed, "orbit list must partition the diagram");
    }
    let orbit_reps: Vec<usize> = orbits.iter().map(|o| o[0]).collect();

    // Coroot folds: orbit sums, except the short orbit of A_{2n} where the
    // two adjacent coroots each enter twice.
    let coroot_fold: Vec<Vec<(usize, i64)>> = orbits
        .iter()
        .map(|orbit| {
            let adjacent = orbit.len() == 2 && source.cartan[orbit[0]][orbit[1]] != 0;
            let coeff = if adjacent { 2 } else { 1 };
            orbit.iter().map(|&k| (k, coeff)).collect()
        })
        .collect();

    // Restriction matrix from the coroot folds: ρ(λ)_j = ⟨λ, β_j^∨⟩.
    let restriction: Vec<Vec<i64>> = coroot_fold
        .iter()
        .map(|fold| {
            (0..l)
                .map(|k| {
                    fold.iter()
                        .map(|&(idx, c)| if idx == k { c } else { 0 })
                        .sum()
                })
                .collect()
        })
        .collect();

    // Folded Cartan matrix from the pairings ⟨ρ(β̃_j), β_i^∨⟩.
    let folded_cartan: Vec<Vec<i64>> = (0..target_rank)
        .map(|i| {
            (0..target_rank)
                .map(|j| {
                    let rep = orbit_reps[j];
                    coroot_fold[i]
                        .iter()
                        .map(|&(k, c)| c * source.cartan[k][rep])
                        .sum()
                })
                .collect()
        })
        .collect();
    let target = build_root_datum(target_family, target_rank)?;
    if folded_cartan != target.cartan {
        return Err(FoldingError::CartanMismatch {
            target: target.name(),
            computed: folded_cartan,
        });
    }

    let spec = FoldingSpec {
        pair,
        n,
        source,
        sigma,
        order,
        orbits,
        orbit_reps,
        coroot_fold,
        target,
        restriction,
    };
    // images of dominant weights stay dominant
    for i in 0..spec.source.rank {
        let img = spec.restrict_weight(&Weight::fundamental(spec.source.rank, i));
        assert!(img.is_dominant(), "restricted fundamental weight must be dominant");
    }
    Ok(spec)
}

/// One pairing row of the restriction-table report.
#[derive(Serialize, Debug, Clone)]
pub struct PairingEntry {
    /// source fundamental-weight index (1-based in reports)
    pub i: usize,
    /// folded simple-coroot index (1-based in reports)
    pub j: usize,
    pub value: i64,
    pub expected: i64,
    pub pass: bool,
}

#[derive(Serialize, Debug)]
pub struct PairingReport {
    pub pair: String,
    pub n: usize,
    pub entries: Vec<PairingEntry>,
    pub pass: bool,
}

impl FoldingSpec {
    pub fn name(&self) -> String {
        match self.pair {
            Some(p) => format!("{}(n={})", p.as_str(), self.n),
            None => format!("identity({})", self.source.name()),
        }
    }

    /// Linear restriction of a source weight to the folded system.
    pub fn restrict_weight(&self, w: &Weight) -> Weight {
        Weight(
            self.restriction
                .iter()
                .map(|row| row.iter().zip(&w.0).map(|(r, c)| r * c).sum())
                .collect(),
        )
    }

    /// The full table of restricted fundamental weights, as predicted by
    /// the folding combinatorics alone (used as golden data in checks).
    pub fn expected_fundamental_images(&self) -> Vec<Weight> {
        let l = self.source.rank;
        let lk = self.target.rank;
        let mut out = Vec::with_capacity(l);
        for i in 0..l {
            let mut img = vec![0i64; lk];
            match self.pair {
                Some(FoldingPair::A2nB) => {
                    let n = self.n;
                    // ϖ_i and ϖ_{2n+1-i} -> ν_i for i <= n-1; middle two -> 2ν_n
                    let folded = if i < n { i } else { 2 * n - 1 - i };
                    if folded == n - 1 && (i == n - 1 || i == n) {
                        img[n - 1] = 2;
                    } else {
                        img[folded] = 1;
                    }
                }
                Some(FoldingPair::E6F4) => {
                    // ϖ1,ϖ6 -> ν4; ϖ2 -> ν1; ϖ3,ϖ5 -> ν3; ϖ4 -> ν2 (1-based)
                    let folded = match i {
                        0 | 5 => 3,
                        1 => 0,
                        2 | 4 => 2,
                        3 => 1,
                        _ => unreachable!(),
                    };
                    img[folded] = 1;
                }
                _ => {
                    // identity on the orbit containing i
                    let j = self
                        .orbits
                        .iter()
                        .position(|o| o.contains(&i))
                        .expect("index lies in an orbit");
                    img[j] = 1;
                }
            }
            out.push(Weight(img));
        }
        out
    }

    /// Recomputes every pairing ⟨ρ(ϖ_i), β_j^∨⟩ from the coroot folds and
    /// compares with the restriction table above.
    pub fn verify_restriction_pairings(&self) -> PairingReport {
        let expected_images = self.expected_fundamental_images();
        let mut entries = Vec::new();
        let mut pass = true;
        for i in 0..self.source.rank {
            let w = Weight::fundamental(self.source.rank, i);
            for j in 0..self.target.rank {
                // pairing straight from the coroot fold
                let value: i64 = self.coroot_fold[j]
                    .iter()
                    .map(|&(k, c)| c * w.0[k])
                    .sum();
                let expected = expected_images[i].0[j];
                let ok = value == expected;
                pass &= ok;
                entries.push(PairingEntry { i: i + 1, j: j + 1, value, expected, pass: ok });
            }
        }
        // consistency: R really implements the same pairings
        for i in 0..self.source.rank {
            let w = Weight::fundamental(self.source.rank, i);
            let img = self.restrict_weight(&w);
            pass &= img == expected_images[i];
        }
        PairingReport { pair: self.name(), n: self.n, entries, pass }
    }

    /// Semigroup generators of the image of the dominant cone.
    pub fn dominant_image_generators(&self) -> Vec<Weight> {
        let mut gens: Vec<Weight> = Vec::new();
        for i in 0..self.source.rank {
            let img = self.restrict_weight(&Weight::fundamental(self.source.rank, i));
            if !gens.contains(&img) {
                gens.push(img);
            }
        }
        gens.sort();
        gens
    }

    /// Elementary divisors of the restriction matrix; detects the index-2
    /// image lattice of the A_{2n} fold.
    pub fn restriction_elementary_divisors(&self) -> Vec<BigInt> {
        let m = Matrix::from_fn(self.target.rank, self.source.rank, |i, j| {
            BigInt::from(self.restriction[i][j])
        });
        smith_normal_form(&m)
    }

    /// True when ρ maps the source weight lattice onto the target lattice.
    pub fn restriction_surjective(&self) -> bool {
        let div = self.restriction_elementary_divisors();
        div.len() == self.target.rank && div.iter().all(|d| d.is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d4_g2_fold() {
        let spec = make_folding(FoldingPair::D4G2, 4).unwrap();
        assert_eq!(spec.order, 3);
        assert_eq!(spec.orbits, vec![vec![0, 2, 3], vec![1]]);
        assert_eq!(spec.target.name(), "G2");
        // β2 is the long root of G2 under Bourbaki conventions
        assert_eq!(spec.target.symmetrizer, vec![1, 3]);
        let report = spec.verify_restriction_pairings();
        assert!(report.pass);
    }

    #[test]
    fn e6_f4_fold() {
        let spec = make_folding(FoldingPair::E6F4, 6).unwrap();
        assert_eq!(spec.order, 2);
        assert_eq!(spec.orbits, vec![vec![1], vec![3], vec![2, 4], vec![0, 5]]);
        // ρ(ϖ4) = ν2 (1-based indices)
        let img = spec.restrict_weight(&Weight::fundamental(6, 3));
        assert_eq!(img, Weight(vec![0, 1, 0, 0]));
        // β3^∨ = α3^∨ + α5^∨
        assert_eq!(spec.coroot_fold[2], vec![(2, 1), (4, 1)]);
        assert!(spec.verify_restriction_pairings().pass);
    }

    #[test]
    fn a2n_b_doubled_middle() {
        let spec = make_folding(FoldingPair::A2nB, 2).unwrap();
        // ϖ2 -> 2ν2 for (A4, B2)
        let img = spec.restrict_weight(&Weight::fundamental(4, 1));
        assert_eq!(img, Weight(vec![0, 2]));
        // short-orbit coroot fold is 2α_2^∨ + 2α_3^∨ (0-based 1, 2)
        assert_eq!(spec.coroot_fold[1], vec![(1, 2), (2, 2)]);
        // pairing ⟨ρ(ϖ2), β2^∨⟩ = 2
        let report = spec.verify_restriction_pairings();
        assert!(report.pass);
        let entry = report
            .entries
            .iter()
            .find(|e| e.i == 2 && e.j == 2)
            .unwrap();
        assert_eq!(entry.value, 2);
    }

    #[test]
    fn a2n1_c_pairings_are_deltas() {
        let spec = make_folding(FoldingPair::A2n1C, 2).unwrap();
        let report = spec.verify_restriction_pairings();
        assert!(report.pass);
        for e in &report.entries {
            if e.i <= 3 {
                assert_eq!(e.value, i64::from(e.i == e.j));
            }
        }
    }

    #[test]
    fn identity_fold_trivial() {
        let spec = identity_folding(Family::A, 2).unwrap();
        assert_eq!(spec.order, 1);
        assert_eq!(spec.target.name(), "A2");
        let w = Weight(vec![3, -1]);
        assert_eq!(spec.restrict_weight(&w), w);
        assert_eq!(
            spec.dominant_image_generators().len(),
            2,
            "identity folding keeps all fundamental weights"
        );
    }

    #[test]
    fn dominant_image_generators_a2n() {
        let spec = make_folding(FoldingPair::A2nB, 3).unwrap();
        let gens = spec.dominant_image_generators();
        // {ν1, ν2, 2ν3}
        assert_eq!(
            gens,
            vec![
                Weight(vec![0, 0, 2]),
                Weight(vec![0, 1, 0]),
                Weight(vec![1, 0, 0]),
            ]
        );
        // index-2 sublattice: one elementary divisor equals 2
        let div = spec.restriction_elementary_divisors();
        assert_eq!(div.last().unwrap(), &BigInt::from(2));
        assert!(!spec.restriction_surjective());
    }

    #[test]
    fn dn_b_and_surjectivity() {
        for n in [3usize, 4, 5] {
            let spec = make_folding(FoldingPair::DnB, n).unwrap();
            assert!(spec.verify_restriction_pairings().pass, "Dn_B n={n}");
            assert!(spec.restriction_surjective());
        }
        for (pair, n) in [
            (FoldingPair::A2n1C, 2usize),
            (FoldingPair::A2n1C, 3),
            (FoldingPair::D4G2, 4),
            (FoldingPair::E6F4, 6),
        ] {
            let spec = make_folding(pair, n).unwrap();
            assert!(spec.restriction_surjective(), "{}", spec.name());
        }
    }

    #[test]
    fn restriction_constant_on_orbits() {
        for (pair, n) in [
            (FoldingPair::A2n1C, 2usize),
            (FoldingPair::A2nB, 2),
            (FoldingPair::DnB, 4),
            (FoldingPair::D4G2, 4),
            (FoldingPair::E6F4, 6),
        ] {
            let spec = make_folding(pair, n).unwrap();
            for j in 0..spec.source.rank {
                let mut root = vec![0i64; spec.source.rank];
                root[j] = 1;
                let fund = spec.source.root_to_fund(&root);
                let mut sroot = vec![0i64; spec.source.rank];
                sroot[spec.sigma[j]] = 1;
                let sfund = spec.source.root_to_fund(&sroot);
                assert_eq!(
                    spec.restrict_weight(&fund),
                    spec.restrict_weight(&sfund),
                    "{} root {}",
                    spec.name(),
                    j
                );
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(make_folding(FoldingPair::A2n1C, 0).is_err());
        assert!(make_folding(FoldingPair::A2nB, 1).is_err());
        assert!(make_folding(FoldingPair::DnB, 2).is_err());
        assert!(make_folding(FoldingPair::D4G2, 5).is_err());
    }
}
