//! Invariant polynomials, the transgression to primitive alternating
//! forms, restriction along subalgebra embeddings, and the nonvanishing
//! checks on the irreducible strings of a principal sl2 — certified
//! exactly or by residues at word-sized primes.

pub mod eval;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chevalley::vecrep::{pfaffian, VectorRep};
use crate::chevalley::{ChevError, LieRealization, SubalgebraEmbedding};
use crate::folding::FoldingSpec;
use crate::linalg::Matrix;
use crate::rootsys::{Caps, Family, RootError, Weight};
use crate::scalar::{fp_from_ratio, next_prime, rat_parts, Fp, Scalar};
use crate::tds::IsotypicDecomposition;
use crate::Rat;

/// Largest form degree accepted for evaluation.
pub const MAX_FORM_DEGREE: usize = 13;

#[derive(thiserror::Error, Debug)]
pub enum InvError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Chev(#[from] ChevError),
    #[error("degree {k} is not a generator degree (exponent + 1) of {algebra}")]
    NotAGeneratorDegree { k: usize, algebra: String },
    #[error("the degree-{k} {kind} polynomial vanishes identically; use {suggestion} instead")]
    IdenticallyZero { k: usize, kind: String, suggestion: String },
    #[error("form degree {d} exceeds the evaluation cap {cap}")]
    DegreeTooLarge { d: usize, cap: usize },
    #[error("no irreducible component of dimension {d} in the decomposition")]
    DegreeAbsent { d: usize },
    #[error("invariance check failed: {0}")]
    NotInvariant(String),
    #[error("construction mismatch: {0}")]
    Mismatch(String),
}

/// Construction of an invariant polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum PolyKind {
    /// tr((ad v)^k) in the adjoint representation.
    TraceAdjoint,
    /// tr(M(v)^k) in the defining matrix representation.
    TraceVector,
    /// Pfaffian of the split skew model (D types, degree = rank).
    Pfaffian,
}

impl PolyKind {
    fn name(&self) -> &'static str {
        match self {
            PolyKind::TraceAdjoint => "adjoint trace power",
            PolyKind::TraceVector => "vector trace power",
            PolyKind::Pfaffian => "pfaffian",
        }
    }
}

#[derive(Clone)]
enum PolyData {
    Trace { mats: Arc<Vec<Matrix<Rat>>>, n: usize },
    Pfaffian { rep: Arc<VectorRep> },
}

/// An Ad-invariant polynomial with an exact evaluator.
#[derive(Clone)]
pub struct InvariantPolynomial {
    pub realization: Arc<LieRealization>,
    pub degree: usize,
    pub kind: PolyKind,
    data: PolyData,
}

impl std::fmt::Debug for InvariantPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "InvariantPolynomial({}, degree {}, {})",
            self.realization.datum.name(),
            self.degree,
            self.kind.name()
        )
    }
}

fn matrix_power_trace(m: &Matrix<Rat>, k: usize) -> Rat {
    let mut acc = m.clone();
    for _ in 2..k {
        acc = acc.mul(m);
    }
    if k == 1 {
        m.trace()
    } else {
        acc.trace_mul(m)
    }
}

impl InvariantPolynomial {
    /// Exact value p(v).
    pub fn eval(&self, v: &[Rat]) -> Rat {
        match &self.data {
            PolyData::Trace { mats, n } => {
                let m = combine(mats, v, *n);
                matrix_power_trace(&m, self.degree)
            }
            PolyData::Pfaffian { rep } => pfaffian(&rep.skew_of(v).unwrap()),
        }
    }

    /// Exact directional derivative d/dt p(v + t w) at t = 0.
    pub fn dir_deriv(&self, v: &[Rat], w: &[Rat]) -> Rat {
        match &self.data {
            PolyData::Trace { mats, n } => {
                let mv = combine(mats, v, *n);
                let mw = combine(mats, w, *n);
                let k = self.degree;
                let mut acc = mv.clone();
                for _ in 2..k {
                    acc = acc.mul(&mv);
                }
                let base = if k == 1 { mw.trace() } else { acc.trace_mul(&mw) };
                base * Rat::from(BigInt::from(k as i64))
            }
            PolyData::Pfaffian { .. } => {
                // interpolate p(v + t w) at t = 0..k and read the t^1 term
                let k = self.degree;
                let points: Vec<Rat> = (0..=k as i64)
                    .map(|t| {
                        let arg: Vec<Rat> = v
                            .iter()
                            .zip(w)
                            .map(|(a, b)| a + b * Rat::from(BigInt::from(t)))
                            .collect();
                        self.eval(&arg)
                    })
                    .collect();
                // finite differences: coefficient of t in the Newton form
                // assembled by Lagrange interpolation at 0..k
                lagrange_linear_coefficient(&points)
            }
        }
    }
}

/// Coefficient of t^1 of the degree-k polynomial through
/// (0, f(0)), ..., (k, f(k)).
fn lagrange_linear_coefficient(values: &[Rat]) -> Rat {
    let k = values.len() - 1;
    let mut acc = Rat::zero();
    for (i, fi) in values.iter().enumerate() {
        // derivative at 0 of the i-th Lagrange basis polynomial
        let mut denom = Rat::one();
        for j in 0..=k {
            if j != i {
                denom *= Rat::from(BigInt::from(i as i64 - j as i64));
            }
        }
        // l_i(t) = Π_{j≠i} (t - j) / denom; l_i'(0) = Σ_{m≠i} Π_{j≠i,m} (-j) / denom
        let mut deriv = Rat::zero();
        for m in 0..=k {
            if m == i {
                continue;
            }
            let mut prod = Rat::one();
            for j in 0..=k {
                if j != i && j != m {
                    prod *= Rat::from(BigInt::from(-(j as i64)));
                }
            }
            deriv += prod;
        }
        acc += fi * deriv / denom;
    }
    acc
}

fn combine(mats: &[Matrix<Rat>], v: &[Rat], n: usize) -> Matrix<Rat> {
    let mut acc = Matrix::zero(n, n);
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&mats[i].scale(c));
    }
    acc
}

/// Deterministic small random rational vector.
fn random_rat_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rat> {
    (0..dim)
        .map(|_| {
            let num = rng.gen_range(-4i64..=4);
            let den = rng.gen_range(1i64..=3);
            Rat::new(BigInt::from(num), BigInt::from(den))
        })
        .collect()
}

/// Builds an invariant polynomial of degree k, verifying that k is a
/// generator degree, that the polynomial is not identically zero, and
/// that it is Ad-invariant on 20 sampled directions.
pub fn invariant_polynomial(
    r: &Arc<LieRealization>,
    k: usize,
    kind: PolyKind,
) -> Result<InvariantPolynomial, InvError> {
    let algebra = r.datum.name();
    if !r.datum.exponents.iter().any(|m| m + 1 == k) {
        return Err(InvError::NotAGeneratorDegree { k, algebra });
    }
    let data = match kind {
        PolyKind::TraceAdjoint => {
            let mats: Vec<Matrix<Rat>> = (0..r.dim)
                .map(|i| Matrix::from_i64_rows(&r.adjoint_basis(i)))
                .collect();
            PolyData::Trace { mats: Arc::new(mats), n: r.dim }
        }
        PolyKind::TraceVector => {
            let rep = VectorRep::for_realization(r)?;
            let n = rep.n;
            PolyData::Trace { mats: Arc::new(rep.mats), n }
        }
        PolyKind::Pfaffian => {
            if r.datum.family != Family::D || k != r.datum.rank {
                return Err(InvError::Mismatch(format!(
                    "pfaffian is the degree-rank invariant of D types, not degree {k} of {algebra}"
                )));
            }
            let rep = VectorRep::for_realization(r)?;
            PolyData::Pfaffian { rep: Arc::new(rep) }
        }
    };
    let poly = InvariantPolynomial { realization: r.clone(), degree: k, kind, data };
    // nonzero witness
    let mut rng = ChaCha8Rng::seed_from_u64(0x504f_4c59);
    let mut witness = false;
    for _ in 0..20 {
        let v = random_rat_vector(&mut rng, r.dim);
        if !poly.eval(&v).is_zero() {
            witness = true;
            break;
        }
    }
    if !witness {
        let suggestion = match kind {
            PolyKind::TraceAdjoint => {
                if r.datum.family == Family::D && k == r.datum.rank {
                    "the pfaffian kind"
                } else {
                    "the vector trace kind"
                }
            }
            _ => "another construction",
        };
        return Err(InvError::IdenticallyZero {
            k,
            kind: kind.name().into(),
            suggestion: suggestion.into(),
        });
    }
    // Ad-invariance: the derivative of p at v along [z, v] vanishes
    for _ in 0..20 {
        let v = random_rat_vector(&mut rng, r.dim);
        let z = random_rat_vector(&mut rng, r.dim);
        let dir = r.bracket(&z, &v);
        if !poly.dir_deriv(&v, &dir).is_zero() {
            return Err(InvError::NotInvariant(format!(
                "degree-{k} {} is not Ad-invariant",
                kind.name()
            )));
        }
    }
    Ok(poly)
}

/// The generator construction used by default for each family: defining
/// traces where a matrix model exists (classical families and the
/// triality-folded G2), adjoint traces for F4 and E6.
pub fn preferred_kind(family: Family) -> PolyKind {
    match family {
        Family::A | Family::B | Family::C | Family::D | Family::G => PolyKind::TraceVector,
        Family::E | Family::F => PolyKind::TraceAdjoint,
    }
}

pub fn preferred_generator(
    r: &Arc<LieRealization>,
    k: usize,
) -> Result<InvariantPolynomial, InvError> {
    invariant_polynomial(r, k, preferred_kind(r.datum.family))
}

/// Construction of an invariant alternating form.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum FormConstruction {
    Transgression,
    AltTrace,
}

/// An alternating Ad-invariant d-form with exact and modular evaluators.
#[derive(Clone)]
pub struct InvariantForm {
    pub realization: Arc<LieRealization>,
    pub degree: usize,
    pub construction: FormConstruction,
    pub poly_kind: PolyKind,
    data: PolyData,
    /// When present, arguments live in a subalgebra and are mapped to
    /// ambient coordinates through this matrix before evaluation.
    precompose: Option<Arc<Matrix<Rat>>>,
}

impl std::fmt::Debug for InvariantForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "InvariantForm(degree {}, {:?} of {}, on {})",
            self.degree,
            self.construction,
            self.poly_kind.name(),
            self.realization.datum.name()
        )
    }
}

/// Cartan transgression of an invariant polynomial of degree k >= 2:
/// an alternating invariant form of degree 2k - 1.
pub fn transgress(p: &InvariantPolynomial) -> Result<InvariantForm, InvError> {
    let d = 2 * p.degree - 1;
    if d > MAX_FORM_DEGREE {
        return Err(InvError::DegreeTooLarge { d, cap: MAX_FORM_DEGREE });
    }
    Ok(InvariantForm {
        realization: p.realization.clone(),
        degree: d,
        construction: FormConstruction::Transgression,
        poly_kind: p.kind,
        data: p.data.clone(),
        precompose: None,
    })
}

/// The antisymmetrized trace form of odd degree d in the chosen
/// representation; the independent cross-check construction.
pub fn alt_trace_form(
    r: &Arc<LieRealization>,
    d: usize,
    kind: PolyKind,
) -> Result<InvariantForm, InvError> {
    if d % 2 == 0 {
        return Err(InvError::Mismatch("alternating trace forms have odd degree".into()));
    }
    if d > MAX_FORM_DEGREE {
        return Err(InvError::DegreeTooLarge { d, cap: MAX_FORM_DEGREE });
    }
    let data = match kind {
        PolyKind::TraceAdjoint => {
            let mats: Vec<Matrix<Rat>> = (0..r.dim)
                .map(|i| Matrix::from_i64_rows(&r.adjoint_basis(i)))
                .collect();
            PolyData::Trace { mats: Arc::new(mats), n: r.dim }
        }
        PolyKind::TraceVector => {
            let rep = VectorRep::for_realization(r)?;
            let n = rep.n;
            PolyData::Trace { mats: Arc::new(rep.mats), n }
        }
        PolyKind::Pfaffian => {
            return Err(InvError::Mismatch(
                "the alternating trace construction needs a trace kind".into(),
            ))
        }
    };
    Ok(InvariantForm {
        realization: r.clone(),
        degree: d,
        construction: FormConstruction::AltTrace,
        poly_kind: kind,
        data,
        precompose: None,
    })
}

fn convert_matrix<T: Scalar>(
    m: &Matrix<Rat>,
    conv: &impl Fn(&Rat) -> Option<T>,
) -> Option<Matrix<T>> {
    let mut out = Matrix::zero(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(i, j)] = conv(&m[(i, j)])?;
        }
    }
    Some(out)
}

impl InvariantForm {
    /// Dimension of the space the arguments live in.
    pub fn input_dim(&self) -> usize {
        match &self.precompose {
            Some(b) => b.cols,
            None => self.realization.dim,
        }
    }

    /// Precomposes the evaluator with a subalgebra embedding.
    pub fn restrict(&self, emb: &SubalgebraEmbedding) -> InvariantForm {
        let b = Matrix::from_fn(emb.ambient_dim, emb.own.dim, |i, j| {
            emb.member_basis[j][i].clone()
        });
        let precompose = match &self.precompose {
            None => b,
            Some(old) => old.mul(&b),
        };
        InvariantForm { precompose: Some(Arc::new(precompose)), ..self.clone() }
    }

    fn eval_generic<T: Scalar + Send + Sync>(
        &self,
        args: &[Vec<Rat>],
        conv: &impl Fn(&Rat) -> Option<T>,
    ) -> Option<T> {
        let d = self.degree;
        assert_eq!(args.len(), d, "form of degree {d} takes {d} arguments");
        let ambient_args: Vec<Vec<Rat>> = match &self.precompose {
            None => args.to_vec(),
            Some(b) => args.iter().map(|v| b.mul_vec(v)).collect(),
        };
        match self.construction {
            FormConstruction::AltTrace => {
                let arg_mats = self.images(&ambient_args, conv)?;
                let d_unit = conv(&Rat::from(BigInt::from(d as i64)))?;
                Some(eval::alternating_trace(d, &arg_mats, d_unit))
            }
            FormConstruction::Transgression => {
                let r = &self.realization;
                let arg_mats = self.images(&ambient_args, conv)?;
                let mut comm: Vec<Vec<Option<Matrix<T>>>> = vec![vec![None; d]; d];
                let mut comm_rat: Vec<Vec<Option<Vec<Rat>>>> = vec![vec![None; d]; d];
                for a in 0..d {
                    for b in a + 1..d {
                        comm_rat[a][b] =
                            Some(r.bracket(&ambient_args[a], &ambient_args[b]));
                    }
                }
                for a in 0..d {
                    for b in a + 1..d {
                        let w = comm_rat[a][b].as_ref().unwrap();
                        comm[a][b] = Some(self.image_of(w, conv)?);
                    }
                }
                match &self.data {
                    PolyData::Trace { .. } => {
                        Some(eval::transgression_trace(d, &arg_mats, &comm))
                    }
                    PolyData::Pfaffian { .. } => {
                        Some(eval::transgression_pfaffian(d, &arg_mats, &comm))
                    }
                }
            }
        }
    }

    fn images<T: Scalar>(
        &self,
        ambient_args: &[Vec<Rat>],
        conv: &impl Fn(&Rat) -> Option<T>,
    ) -> Option<Vec<Matrix<T>>> {
        ambient_args
            .iter()
            .map(|v| self.image_of(v, conv))
            .collect()
    }

    fn image_of<T: Scalar>(
        &self,
        v: &[Rat],
        conv: &impl Fn(&Rat) -> Option<T>,
    ) -> Option<Matrix<T>> {
        let m = match &self.data {
            PolyData::Trace { mats, n } => combine(mats, v, *n),
            PolyData::Pfaffian { rep } => rep.skew_of(v).unwrap(),
        };
        convert_matrix(&m, conv)
    }

    /// Exact rational evaluation.
    pub fn eval_exact(&self, args: &[Vec<Rat>]) -> Rat {
        self.eval_generic(args, &|r: &Rat| Some(r.clone()))
            .expect("rational conversion is total")
    }

    /// Evaluation modulo p; `None` when p divides a denominator.
    pub fn eval_mod(&self, args: &[Vec<Rat>], p: u64) -> Option<Fp> {
        self.eval_generic(args, &|r: &Rat| {
            let (num, den) = rat_parts(r);
            fp_from_ratio(&num, &den, p)
        })
    }
}

/// Alternating sanity check: evaluation with a repeated argument is 0.
pub fn check_alternating(
    form: &InvariantForm,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Result<(), InvError> {
    let dim = form.input_dim();
    for _ in 0..samples {
        let mut args: Vec<Vec<Rat>> = (0..form.degree)
            .map(|_| random_rat_vector(rng, dim))
            .collect();
        let dup = rng.gen_range(0..form.degree - 1);
        args[dup + 1] = args[dup].clone();
        if !form.eval_exact(&args).is_zero() {
            return Err(InvError::NotInvariant(
                "form is not alternating on a repeated argument".into(),
            ));
        }
    }
    Ok(())
}

/// Invariance check: Σ_i ω(v_1, ..., [z, v_i], ..., v_d) = 0, with the
/// bracket taken in the algebra the arguments live in.
pub fn check_invariance(
    form: &InvariantForm,
    bracket_algebra: &LieRealization,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Result<(), InvError> {
    let dim = form.input_dim();
    assert_eq!(dim, bracket_algebra.dim);
    for _ in 0..samples {
        let args: Vec<Vec<Rat>> = (0..form.degree)
            .map(|_| random_rat_vector(rng, dim))
            .collect();
        let z = random_rat_vector(rng, dim);
        let mut acc = Rat::zero();
        for i in 0..form.degree {
            let mut modified = args.clone();
            modified[i] = bracket_algebra.bracket(&z, &args[i]);
            acc += form.eval_exact(&modified);
        }
        if !acc.is_zero() {
            return Err(InvError::NotInvariant(format!(
                "form of degree {} is not infinitesimally invariant",
                form.degree
            )));
        }
    }
    Ok(())
}

/// Proportionality of two forms of the same degree on sampled tuples:
/// all 2x2 minors of the value matrix vanish and the forms are not both
/// zero on the sample.
pub fn check_proportional(
    f1: &InvariantForm,
    f2: &InvariantForm,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Result<(), InvError> {
    assert_eq!(f1.degree, f2.degree);
    assert_eq!(f1.input_dim(), f2.input_dim());
    let dim = f1.input_dim();
    let mut values = Vec::new();
    for _ in 0..samples {
        let args: Vec<Vec<Rat>> = (0..f1.degree)
            .map(|_| random_rat_vector(rng, dim))
            .collect();
        values.push((f1.eval_exact(&args), f2.eval_exact(&args)));
    }
    let nonzero = values.iter().any(|(a, b)| !a.is_zero() || !b.is_zero());
    if !nonzero {
        return Err(InvError::NotInvariant(
            "both constructions vanish on the whole sample".into(),
        ));
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let det = &values[i].0 * &values[j].1 - &values[j].0 * &values[i].1;
            if !det.is_zero() {
                return Err(InvError::NotInvariant(
                    "the two constructions are not proportional".into(),
                ));
            }
        }
    }
    Ok(())
}

/// A basis of the primitive forms in one odd degree.
pub struct PrimitiveSpace {
    pub degree: usize,
    pub expected_dim: usize,
    pub basis: Vec<InvariantForm>,
}

/// Builds the primitive-space basis in degree d from transgressions of
/// the generator polynomials of degree (d+1)/2. For the doubled slot of
/// an even-rank D type the basis is the pair (vector-trace, pfaffian)
/// transgression; independence is certified by the determinant test in
/// the string evaluation.
pub fn primitive_space(r: &Arc<LieRealization>, d: usize) -> Result<PrimitiveSpace, InvError> {
    if d % 2 == 0 {
        return Err(InvError::Mismatch("primitive degrees are odd".into()));
    }
    let expected_dim = r.datum.exponents.iter().filter(|&&m| 2 * m + 1 == d).count();
    if expected_dim == 0 {
        return Ok(PrimitiveSpace { degree: d, expected_dim, basis: Vec::new() });
    }
    let k = (d + 1) / 2;
    let basis = if expected_dim == 1 {
        vec![transgress(&preferred_generator(r, k)?)?]
    } else {
        // the doubled exponent of D_l (l even) at degree k = rank
        vec![
            transgress(&invariant_polynomial(r, k, PolyKind::TraceVector)?)?,
            transgress(&invariant_polynomial(r, k, PolyKind::Pfaffian)?)?,
        ]
    };
    Ok(PrimitiveSpace { degree: d, expected_dim, basis })
}

// ---------------------------------------------------------------------
// Nonvanishing certification
// ---------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum ArithMode {
    Exact,
    Modular,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum PrimePolicy {
    Auto,
    Explicit(u64),
}

/// Deterministic stream of candidate primes above 2^31 derived from the
/// seed; primes dividing a denominator of the inputs are skipped by the
/// evaluator and replaced by the next candidate.
pub fn prime_stream(seed: u64, policy: PrimePolicy) -> impl Iterator<Item = u64> {
    let start: u64 = (1u64 << 31) + 1 + 2 * (seed % 4096);
    let mut cur = match policy {
        PrimePolicy::Explicit(p) => p,
        PrimePolicy::Auto => next_prime(start),
    };
    std::iter::from_fn(move || {
        let out = cur;
        cur = next_prime(cur + 1);
        Some(out)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalRecord {
    pub prime: Option<u64>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonvanishingCertificate {
    pub degree: usize,
    pub construction: String,
    pub mode: String,
    pub evaluations: Vec<EvalRecord>,
    pub nonzero: bool,
}

/// Certifies that a form is nonzero on the given argument tuple.
///
/// Modular mode collects residues at three independent primes; a zero
/// residue escalates to an exact evaluation, so zero is only ever
/// declared exactly.
pub fn certify_nonzero(
    form: &InvariantForm,
    args: &[Vec<Rat>],
    mode: ArithMode,
    seed: u64,
    policy: PrimePolicy,
) -> NonvanishingCertificate {
    let construction = format!("{:?} of {}", form.construction, form.poly_kind.name());
    match mode {
        ArithMode::Exact => {
            let v = form.eval_exact(args);
            NonvanishingCertificate {
                degree: form.degree,
                construction,
                mode: "exact".into(),
                nonzero: !v.is_zero(),
                evaluations: vec![EvalRecord { prime: None, value: v.to_string() }],
            }
        }
        ArithMode::Modular => {
            let mut evaluations = Vec::new();
            let mut nonzero = true;
            let mut saw_zero = false;
            let mut primes = prime_stream(seed, policy);
            let mut collected = 0;
            let mut guard = 0;
            while collected < 3 {
                guard += 1;
                assert!(guard < 1000, "prime reselection did not terminate");
                let p = primes.next().unwrap();
                match form.eval_mod(args, p) {
                    None => continue, // p divides an input denominator
                    Some(v) => {
                        evaluations.push(EvalRecord {
                            prime: Some(p),
                            value: v.value().to_string(),
                        });
                        if v.is_zero() {
                            saw_zero = true;
                        }
                        collected += 1;
                    }
                }
            }
            if saw_zero {
                // a zero residue is decided exactly
                let v = form.eval_exact(args);
                nonzero = !v.is_zero();
                evaluations.push(EvalRecord { prime: None, value: v.to_string() });
            }
            NonvanishingCertificate {
                degree: form.degree,
                construction,
                mode: "modular".into(),
                nonzero,
                evaluations,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HitchinSlot {
    pub component_dims: Vec<usize>,
    pub certificates: Vec<NonvanishingCertificate>,
    pub determinant: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HitchinReport {
    pub algebra: String,
    pub degree: usize,
    pub slot: HitchinSlot,
    pub pass: bool,
}

/// The nonvanishing check for one degree d: evaluate the primitive
/// basis on the basis tuple of the d-dimensional irreducible component.
///
/// In the multiplicity-one situation a PASS is a certified nonzero value
/// of the single basis form on the unique component. For the doubled
/// slot, the check computes the exact 2x2 matrix of evaluations against
/// both components and passes iff its determinant is nonzero, which is
/// the basis-independent statement that every nonzero primitive form is
/// nonzero on some component.
pub fn hitchin_check(
    r: &Arc<LieRealization>,
    decomp: &IsotypicDecomposition,
    d: usize,
    space: &PrimitiveSpace,
    mode: ArithMode,
    seed: u64,
    policy: PrimePolicy,
) -> Result<HitchinReport, InvError> {
    let comps: Vec<&crate::tds::StringComponent> = decomp
        .components
        .iter()
        .filter(|c| 2 * c.m + 1 == d)
        .collect();
    if comps.is_empty() {
        return Err(InvError::DegreeAbsent { d });
    }
    if comps.len() != space.basis.len() || comps.len() != space.expected_dim {
        return Err(InvError::Mismatch(format!(
            "{} components of dimension {d} but {} basis forms",
            comps.len(),
            space.basis.len()
        )));
    }
    let slot = if comps.len() == 1 {
        let cert = certify_nonzero(&space.basis[0], &comps[0].basis, mode, seed, policy);
        HitchinSlot {
            component_dims: vec![d],
            pass: cert.nonzero,
            certificates: vec![cert],
            determinant: None,
        }
    } else {
        // exact 2x2 evaluation matrix, forms against components
        let mut m = Matrix::zero(2, 2);
        let mut certificates = Vec::new();
        for (i, form) in space.basis.iter().enumerate() {
            for (j, comp) in comps.iter().enumerate() {
                let v = form.eval_exact(&comp.basis);
                certificates.push(NonvanishingCertificate {
                    degree: d,
                    construction: format!("{:?} of {}", form.construction, form.poly_kind.name()),
                    mode: "exact".into(),
                    nonzero: !v.is_zero(),
                    evaluations: vec![EvalRecord { prime: None, value: v.to_string() }],
                });
                m[(i, j)] = v;
            }
        }
        let det = m.det();
        HitchinSlot {
            component_dims: vec![d; comps.len()],
            certificates,
            determinant: Some(det.to_string()),
            pass: !det.is_zero(),
        }
    };
    Ok(HitchinReport {
        algebra: r.datum.name(),
        degree: d,
        pass: slot.pass,
        slot,
    })
}

// ---------------------------------------------------------------------
// Transgression commutes with restriction
// ---------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TransgressionReport {
    pub pair: String,
    pub samples: usize,
    pub pass: bool,
}

/// Checks that restricting the transgressed Killing form of the ambient
/// algebra agrees with transgressing the restricted Killing polynomial
/// inside the subalgebra, on seeded random tuples.
///
/// The two sides follow genuinely different code paths: the left side
/// evaluates the ambient 3-form machinery at embedded vectors, the right
/// side antisymmetrizes the restricted polarization over brackets taken
/// in the subalgebra's own structure table.
pub fn verify_transgression_commutes(
    ambient: &Arc<LieRealization>,
    emb: &SubalgebraEmbedding,
    pair_name: &str,
    seed: u64,
    samples: usize,
) -> Result<TransgressionReport, InvError> {
    let killing = invariant_polynomial(ambient, 2, PolyKind::TraceAdjoint)?;
    let lhs_form = transgress(&killing)?.restrict(emb);
    let own = &emb.own;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7472_616e);
    // symmetric polarization of the restricted polynomial
    let polar = |u: &[Rat], w: &[Rat]| -> Rat {
        let iu = emb.to_ambient(u);
        let iw = emb.to_ambient(w);
        let m1 = ambient.adjoint(&iu);
        let m2 = ambient.adjoint(&iw);
        m1.trace_mul(&m2)
    };
    let mut pass = true;
    for _ in 0..samples {
        let args: Vec<Vec<Rat>> = (0..3).map(|_| random_rat_vector(&mut rng, own.dim)).collect();
        let lhs = lhs_form.eval_exact(&args);
        // right side: Σ_π sign(π) P(v_{π0}, [v_{π1}, v_{π2}]_k); the full
        // permutation sum carries the within-pair factor 2 that the
        // symmetrized trace supplies on the left
        let mut rhs = Rat::zero();
        for p in [[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let sign = eval::permutation_sign(&p);
            let comm = own.bracket(&args[p[1]], &args[p[2]]);
            let v = polar(&args[p[0]], &comm);
            rhs += Rat::from(BigInt::from(sign)) * v;
        }
        if lhs != rhs {
            pass = false;
            break;
        }
    }
    Ok(TransgressionReport { pair: pair_name.into(), samples, pass })
}

// ---------------------------------------------------------------------
// Restriction of invariants to the folded Cartan subalgebra
// ---------------------------------------------------------------------

/// Invariant polynomial restricted to the Cartan subalgebra, evaluated
/// through the weight multiset of a small faithful module: on Cartan
/// elements, tr(π(t)^k) = Σ_μ mult(μ) μ(t)^k.
pub struct CartanInvariant {
    pub degree: usize,
    weights: Vec<(Vec<i64>, i64)>,
}

impl CartanInvariant {
    fn mu_of(weight: &[i64], t: &[Rat]) -> Rat {
        t.iter()
            .zip(weight)
            .map(|(c, &w)| c * Rat::from(BigInt::from(w)))
            .sum()
    }

    /// Value at a Cartan element with the given coroot coordinates.
    pub fn eval(&self, t: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (w, mult) in &self.weights {
            let mu = Self::mu_of(w, t);
            let mut pw = Rat::one();
            for _ in 0..self.degree {
                pw *= &mu;
            }
            acc += Rat::from(BigInt::from(*mult)) * pw;
        }
        acc
    }

    /// Directional derivative at t along the Cartan direction b.
    pub fn dir_deriv(&self, t: &[Rat], b: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (w, mult) in &self.weights {
            let mu = Self::mu_of(w, t);
            let mut pw = Rat::one();
            for _ in 0..self.degree - 1 {
                pw *= &mu;
            }
            acc += Rat::from(BigInt::from(*mult)) * pw * Self::mu_of(w, b);
        }
        acc * Rat::from(BigInt::from(self.degree as i64))
    }
}

/// Highest weight of a small faithful module used for restricted
/// trace-power invariants.
pub fn small_faithful_weight(family: Family, rank: usize) -> Weight {
    match family {
        Family::F => Weight::fundamental(rank, 3),
        _ => Weight::fundamental(rank, 0),
    }
}

/// Builds the restricted trace-power invariant of one degree.
pub fn cartan_invariant(
    datum: &crate::rootsys::RootDatum,
    degree: usize,
    caps: &Caps,
) -> Result<CartanInvariant, InvError> {
    let lambda = small_faithful_weight(datum.family, datum.rank);
    let ch = datum.freudenthal_multiplicities(&lambda, caps)?;
    let weights = ch
        .entries
        .iter()
        .map(|(w, m)| (w.0.clone(), *m))
        .collect();
    Ok(CartanInvariant { degree, weights })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChevRestrictReport {
    pub pair: String,
    pub degrees: Vec<usize>,
    pub exponents_submultiset: bool,
    pub jacobian_rank: usize,
    pub expected_rank: usize,
    pub attempts: usize,
    pub pass: bool,
}

/// Certifies the surjectivity of invariant-polynomial restriction: the
/// ambient generators at the folded generator degrees restrict to the
/// folded Cartan subalgebra with a full-rank Jacobian at a regular
/// rational point (algebraic independence, hence generation since the
/// degrees match).
pub fn chevalley_restriction_check(
    spec: &FoldingSpec,
    emb: &SubalgebraEmbedding,
    caps: &Caps,
    seed: u64,
) -> Result<ChevRestrictReport, InvError> {
    let lk = spec.target.rank;
    // folded exponents are a submultiset of the ambient exponents
    let mut ambient_exps = spec.source.exponents.clone();
    let mut submultiset = true;
    for m in &spec.target.exponents {
        if let Some(pos) = ambient_exps.iter().position(|x| x == m) {
            ambient_exps.remove(pos);
        } else {
            submultiset = false;
        }
    }
    let degrees: Vec<usize> = spec.target.exponents.iter().map(|m| m + 1).collect();
    let polys: Vec<CartanInvariant> = degrees
        .iter()
        .map(|&k| cartan_invariant(&spec.source, k, caps))
        .collect::<Result<_, _>>()?;
    // Cartan coordinates of the folded Cartan basis inside the ambient one
    let ambient_rank = spec.source.rank;
    let h_basis: Vec<Vec<Rat>> = (0..lk)
        .map(|j| {
            let v = &emb.member_basis[j];
            assert!(
                v.iter().skip(ambient_rank).all(Zero::is_zero),
                "folded Cartan basis must lie in the ambient Cartan"
            );
            v[..ambient_rank].to_vec()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_6576);
    let mut attempts = 0;
    let mut best_rank = 0;
    while attempts < 5 {
        attempts += 1;
        // random rational point of the folded Cartan, regular for the
        // folded root system
        let coeffs: Vec<i64> = (0..lk).map(|_| rng.gen_range(-9i64..=9)).collect();
        let regular = spec.target.positive_roots.iter().all(|root| {
            let beta = spec.target.root_to_fund(root);
            let v: i64 = beta.0.iter().zip(&coeffs).map(|(b, c)| b * c).sum();
            v != 0
        });
        if !regular {
            continue;
        }
        let t: Vec<Rat> = (0..ambient_rank)
            .map(|a| {
                (0..lk)
                    .map(|j| &h_basis[j][a] * Rat::from(BigInt::from(coeffs[j])))
                    .sum()
            })
            .collect();
        let jac = Matrix::from_fn(degrees.len(), lk, |i, j| polys[i].dir_deriv(&t, &h_basis[j]));
        let rank = jac.rank();
        best_rank = best_rank.max(rank);
        if rank == lk {
            return Ok(ChevRestrictReport {
                pair: spec.name(),
                degrees,
                exponents_submultiset: submultiset,
                jacobian_rank: rank,
                expected_rank: lk,
                attempts,
                pass: submultiset,
            });
        }
    }
    Ok(ChevRestrictReport {
        pair: spec.name(),
        degrees,
        exponents_submultiset: submultiset,
        jacobian_rank: best_rank,
        expected_rank: lk,
        attempts,
        pass: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{automorphism_matrix, fixed_subalgebra, realize};
    use crate::folding::{identity_folding, make_folding, FoldingPair};
    use crate::tds::{complete_sl2, decompose_adjoint, principal_nilpotent};

    fn arc_realize(f: Family, r: usize) -> Arc<LieRealization> {
        Arc::new(realize(f, r).unwrap())
    }

    #[test]
    fn killing_polynomial_a2() {
        let a2 = arc_realize(Family::A, 2);
        let p = invariant_polynomial(&a2, 2, PolyKind::TraceAdjoint).unwrap();
        // p(h1) = tr((ad h1)^2) = 12 for the first simple coroot
        let h1 = a2.basis_vector(0);
        assert_eq!(p.eval(&h1), Rat::from(BigInt::from(12)));
    }

    #[test]
    fn odd_adjoint_trace_identically_zero() {
        // the degree-3 adjoint trace vanishes identically in type A2
        let a2 = arc_realize(Family::A, 2);
        let err = invariant_polynomial(&a2, 3, PolyKind::TraceAdjoint).unwrap_err();
        assert!(matches!(err, InvError::IdenticallyZero { k: 3, .. }), "{err}");
        // the defining-representation trace does not
        assert!(invariant_polynomial(&a2, 3, PolyKind::TraceVector).is_ok());
    }

    #[test]
    fn d4_adjoint_quartic_degenerates() {
        // tr((ad v)^4) on D4 is a multiple of the squared Killing form,
        // so the Jacobian of {p2, p4-adjoint} restricted to the Cartan is
        // singular while {p2, pfaffian} is not; the construction-level
        // symptom is captured by the pfaffian being required here
        let d4 = arc_realize(Family::D, 4);
        let p4 = invariant_polynomial(&d4, 4, PolyKind::TraceAdjoint).unwrap();
        let p2 = invariant_polynomial(&d4, 2, PolyKind::TraceAdjoint).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ratio: Option<Rat> = None;
        for _ in 0..5 {
            let v = super::random_rat_vector(&mut rng, d4.dim);
            let quartic = p4.eval(&v);
            let k = p2.eval(&v);
            let ksq = &k * &k;
            if ksq.is_zero() {
                continue;
            }
            let r = quartic / ksq;
            match &ratio {
                None => ratio = Some(r),
                Some(r0) => assert_eq!(&r, r0, "tr(ad^4) is a fixed multiple of κ² on D4"),
            }
        }
        assert!(ratio.is_some());
        assert!(invariant_polynomial(&d4, 4, PolyKind::Pfaffian).is_ok());
    }

    #[test]
    fn wrong_degree_rejected() {
        let a2 = arc_realize(Family::A, 2);
        assert!(matches!(
            invariant_polynomial(&a2, 5, PolyKind::TraceVector),
            Err(InvError::NotAGeneratorDegree { k: 5, .. })
        ));
    }

    #[test]
    fn a1_cartan_three_form() {
        let a1 = arc_realize(Family::A, 1);
        let p = invariant_polynomial(&a1, 2, PolyKind::TraceAdjoint).unwrap();
        let omega = transgress(&p).unwrap();
        // evaluate on (e, h, f): nonzero, proportional to κ([e,h],f)
        let e = a1.basis_vector(1);
        let h = a1.basis_vector(0);
        let f = a1.basis_vector(2);
        let v = omega.eval_exact(&[e.clone(), h.clone(), f.clone()]);
        assert!(!v.is_zero());
        // linearly dependent arguments give zero
        let sum: Vec<Rat> = e.iter().zip(&h).map(|(a, b)| a + b).collect();
        let z = omega.eval_exact(&[e, h, sum]);
        assert!(z.is_zero());
    }

    #[test]
    fn transgression_matches_brute_force_d3() {
        // brute force: Σ_π sign(π) SymTr(v_{π0}, [v_{π1}, v_{π2}]), equal
        // to 2^{k-1}(k-1)! = 2 times the matching-form evaluator
        let a2 = arc_realize(Family::A, 2);
        let p = invariant_polynomial(&a2, 2, PolyKind::TraceAdjoint).unwrap();
        let omega = transgress(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let args: Vec<Vec<Rat>> = (0..3).map(|_| super::random_rat_vector(&mut rng, 8)).collect();
            let fast = omega.eval_exact(&args);
            let mut brute = Rat::zero();
            for perm in [[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let sign = eval::permutation_sign(&perm);
                let comm = a2.bracket(&args[perm[1]], &args[perm[2]]);
                let m1 = a2.adjoint(&args[perm[0]]);
                let m2 = a2.adjoint(&comm);
                // SymTr of two matrices
                let v = m1.trace_mul(&m2) * Rat::from(BigInt::from(2));
                brute += Rat::from(BigInt::from(sign)) * v;
            }
            assert_eq!(brute, fast * Rat::from(BigInt::from(2)));
        }
    }

    #[test]
    fn transgression_kills_decomposables() {
        // τ(κ²) = 0: build the degree-4 "polynomial" as the square of the
        // Killing form through a rank-1 trick is not possible with the
        // trace data, so check the consequence instead: on A3 the
        // degree-4 vector trace and the adjoint trace differ by a
        // multiple of κ², yet their transgressions are proportional.
        let a3 = arc_realize(Family::A, 3);
        let f1 = transgress(&invariant_polynomial(&a3, 4, PolyKind::TraceVector).unwrap()).unwrap();
        let f2 = transgress(&invariant_polynomial(&a3, 4, PolyKind::TraceAdjoint).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        check_proportional(&f1, &f2, &mut rng, 3).unwrap();
    }

    #[test]
    fn forms_are_alternating_and_invariant() {
        let a2 = arc_realize(Family::A, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = invariant_polynomial(&a2, 3, PolyKind::TraceVector).unwrap();
        let omega5 = transgress(&p).unwrap();
        check_alternating(&omega5, &mut rng, 3).unwrap();
        check_invariance(&omega5, &a2, &mut rng, 3).unwrap();
        let alt5 = alt_trace_form(&a2, 5, PolyKind::TraceVector).unwrap();
        check_alternating(&alt5, &mut rng, 3).unwrap();
        check_invariance(&alt5, &a2, &mut rng, 3).unwrap();
        check_proportional(&omega5, &alt5, &mut rng, 4).unwrap();
    }

    #[test]
    fn modular_matches_exact() {
        let a2 = arc_realize(Family::A, 2);
        let p = invariant_polynomial(&a2, 2, PolyKind::TraceAdjoint).unwrap();
        let omega = transgress(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let args: Vec<Vec<Rat>> = (0..3).map(|_| super::random_rat_vector(&mut rng, 8)).collect();
        let exact = omega.eval_exact(&args);
        let p0 = 2147483659u64;
        let modular = omega.eval_mod(&args, p0).unwrap();
        let (num, den) = rat_parts(&exact);
        let expect = fp_from_ratio(&num, &den, p0).unwrap();
        assert_eq!(modular, expect);
    }

    #[test]
    fn hitchin_a2_degrees_3_and_5() {
        let a2 = arc_realize(Family::A, 2);
        let t = complete_sl2(&a2, &principal_nilpotent(&a2)).unwrap();
        let decomp = decompose_adjoint(&a2, &t).unwrap();
        for d in [3usize, 5] {
            let space = primitive_space(&a2, d).unwrap();
            assert_eq!(space.expected_dim, 1);
            let report =
                hitchin_check(&a2, &decomp, d, &space, ArithMode::Exact, 42, PrimePolicy::Auto)
                    .unwrap();
            assert!(report.pass, "degree {d}");
        }
        // degree absent
        let space7 = primitive_space(&a2, 7).unwrap();
        assert_eq!(space7.expected_dim, 0);
        assert!(matches!(
            hitchin_check(&a2, &decomp, 7, &space7, ArithMode::Exact, 42, PrimePolicy::Auto),
            Err(InvError::DegreeAbsent { d: 7 })
        ));
    }

    #[test]
    fn restriction_of_three_form_nonzero_on_subalgebra() {
        let a3 = arc_realize(Family::A, 3);
        let spec = make_folding(FoldingPair::A2n1C, 1).unwrap();
        let sigma = automorphism_matrix(&a3, &spec).unwrap();
        let emb = fixed_subalgebra(&a3, &sigma, &spec).unwrap();
        let p = invariant_polynomial(&a3, 2, PolyKind::TraceAdjoint).unwrap();
        let omega = transgress(&p).unwrap().restrict(&emb);
        // evaluate on the subalgebra's own principal triple
        let y = principal_nilpotent(&emb.own);
        let t = complete_sl2(&emb.own, &y).unwrap();
        let v = omega.eval_exact(&[t.y.clone(), t.h.clone(), t.x.clone()]);
        assert!(!v.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        check_invariance(&omega, &emb.own, &mut rng, 3).unwrap();
    }

    #[test]
    fn transgression_commutes_a3_c2() {
        let a3 = arc_realize(Family::A, 3);
        let spec = make_folding(FoldingPair::A2n1C, 1).unwrap();
        let sigma = automorphism_matrix(&a3, &spec).unwrap();
        let emb = fixed_subalgebra(&a3, &sigma, &spec).unwrap();
        let report = verify_transgression_commutes(&a3, &emb, "A3_C2", 42, 10).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn chev_restrict_a3_c2_and_identity() {
        let caps = Caps::default();
        let spec = make_folding(FoldingPair::A2n1C, 1).unwrap();
        let a3 = arc_realize(Family::A, 3);
        let sigma = automorphism_matrix(&a3, &spec).unwrap();
        let emb = fixed_subalgebra(&a3, &sigma, &spec).unwrap();
        let report = chevalley_restriction_check(&spec, &emb, &caps, 42).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.degrees, vec![2, 4]);

        let ispec = identity_folding(Family::A, 2).unwrap();
        let a2 = arc_realize(Family::A, 2);
        let isigma = automorphism_matrix(&a2, &ispec).unwrap();
        let iemb = fixed_subalgebra(&a2, &isigma, &ispec).unwrap();
        let ireport = chevalley_restriction_check(&ispec, &iemb, &caps, 42).unwrap();
        assert!(ireport.pass);
    }

    #[test]
    fn prime_policy_deterministic() {
        let a: Vec<u64> = prime_stream(42, PrimePolicy::Auto).take(3).collect();
        let b: Vec<u64> = prime_stream(42, PrimePolicy::Auto).take(3).collect();
        assert_eq!(a, b);
        assert!(a[0] > 1 << 31);
        let c: Vec<u64> = prime_stream(43, PrimePolicy::Auto).take(1).collect();
        assert!(c[0] >= 1 << 31);
    }
}
