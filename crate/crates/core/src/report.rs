//! Top-level verification pipeline and its machine-readable report.
//!
//! A run is fully determined by its configuration (pair, parameter,
//! degrees, arithmetic mode, prime policy, seed, caps): reports with the
//! same configuration are byte-identical. Wall-clock timings are only
//! emitted when explicitly requested, so the default artifact stays
//! deterministic.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::branching;
use crate::chevalley::{self, LieRealization};
use crate::folding::{make_folding, FoldingPair, FoldingSpec};
use crate::invariants::{self, ArithMode, PrimePolicy};
use crate::rootsys::Caps;
use crate::tds;

/// Configuration of a verification run; the seed fully determines every
/// randomized sample and the auto prime selection.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub pair: FoldingPair,
    pub n: usize,
    pub degrees: Vec<usize>,
    pub mode: ArithMode,
    pub prime: PrimePolicy,
    pub seed: u64,
    pub caps: Caps,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(pair: FoldingPair, n: usize) -> Self {
        RunConfig {
            pair,
            n,
            degrees: Vec::new(),
            mode: ArithMode::Exact,
            prime: PrimePolicy::Auto,
            seed: 42,
            caps: Caps::default(),
            timings: false,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

/// One verification record: a stable name, the claim being checked, the
/// inputs, the verdict, and optional witness data.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub claim: String,
    pub inputs: serde_json::Value,
    pub verdict: Verdict,
    pub witness: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering, derived from the same data as the JSON.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verification run: pair={} n={} seed={}\n",
            self.config.pair.as_str(),
            self.config.n,
            self.config.seed
        ));
        for c in &self.checks {
            let v = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Skipped => "SKIPPED",
            };
            out.push_str(&format!("  [{v}] {} — {}\n", c.name, c.claim));
        }
        out.push_str(&format!(
            "summary: {} passed, {} failed, {} skipped\n",
            self.summary.pass, self.summary.fail, self.summary.skipped
        ));
        out
    }
}

struct Recorder {
    checks: Vec<CheckRecord>,
    timings: bool,
}

impl Recorder {
    fn new(timings: bool) -> Self {
        Recorder { checks: Vec::new(), timings }
    }

    fn record<F>(&mut self, name: &str, claim: &str, inputs: serde_json::Value, f: F)
    where
        F: FnOnce() -> Result<(bool, serde_json::Value), String>,
    {
        let start = Instant::now();
        let (verdict, witness) = match f() {
            Ok((true, w)) => (Verdict::Pass, w),
            Ok((false, w)) => (Verdict::Fail, w),
            Err(e) => (Verdict::Fail, serde_json::json!({ "error": e })),
        };
        let wall_ms = self.timings.then(|| start.elapsed().as_millis());
        self.checks.push(CheckRecord {
            name: name.into(),
            claim: claim.into(),
            inputs,
            verdict,
            witness,
            wall_ms,
        });
    }

    fn skip(&mut self, name: &str, claim: &str, reason: &str) {
        self.checks.push(CheckRecord {
            name: name.into(),
            claim: claim.into(),
            inputs: serde_json::Value::Null,
            verdict: Verdict::Skipped,
            witness: serde_json::json!({ "reason": reason }),
            wall_ms: None,
        });
    }

    fn all_passed_so_far(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

/// Runs the full verification pipeline for one configuration, in
/// dependency order: folding, realization, principal triple, branching
/// cases, invariant-form nonvanishing, transgression commutativity and
/// restricted-invariant independence. Failures mark downstream sections
/// SKIPPED, never silently passed.
pub fn run_all(config: &RunConfig) -> VerificationReport {
    let mut rec = Recorder::new(config.timings);
    let caps = config.caps;

    // stage 1: folding
    let spec: Option<FoldingSpec> = match make_folding(config.pair, config.n) {
        Ok(s) => Some(s),
        Err(e) => {
            rec.record("fold", "folding data construction", json(&config.pair.as_str()), || {
                Err(e.to_string())
            });
            None
        }
    };
    if let Some(spec) = &spec {
        rec.record(
            "fold",
            "orbits, coroot folds, and the folded Cartan matrix match the named target",
            serde_json::json!({ "pair": spec.name() }),
            || {
                Ok((
                    true,
                    serde_json::json!({
                        "orbits": spec.orbits,
                        "order": spec.order,
                        "target": spec.target.name(),
                    }),
                ))
            },
        );
        rec.record(
            "restriction-table",
            "every pairing of a restricted fundamental weight with a folded coroot matches the predicted table",
            serde_json::json!({ "pair": spec.name() }),
            || {
                let report = spec.verify_restriction_pairings();
                let pass = report.pass;
                Ok((pass, json(&report)))
            },
        );
        rec.record(
            "dominant-image",
            "the image of the dominant cone is generated as predicted, with the lattice index from the Smith normal form",
            serde_json::json!({ "pair": spec.name() }),
            || {
                let gens = spec.dominant_image_generators();
                let divisors = spec.restriction_elementary_divisors();
                let surjective = spec.restriction_surjective();
                let expect_surjective = config.pair != FoldingPair::A2nB;
                let pass = surjective == expect_surjective;
                Ok((
                    pass,
                    serde_json::json!({
                        "generators": gens,
                        "elementary_divisors": divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                        "lattice_surjective": surjective,
                    }),
                ))
            },
        );
    }

    // stage 2: realization and fixed subalgebra
    let mut ambient: Option<Arc<LieRealization>> = None;
    let mut sigma = None;
    let mut embedding = None;
    if let Some(spec) = &spec {
        if rec.all_passed_so_far() {
            rec.record(
                "realize",
                "ambient realization with verified integer structure constants",
                serde_json::json!({ "algebra": spec.source.name() }),
                || {
                    let r = chevalley::realize(spec.source.family, spec.source.rank)
                        .map_err(|e| e.to_string())?;
                    let dim = r.dim;
                    ambient = Some(Arc::new(r));
                    Ok((true, serde_json::json!({ "dim": dim })))
                },
            );
        } else {
            rec.skip("realize", "ambient realization", "folding stage failed");
        }
        if let Some(amb) = ambient.clone() {
            rec.record(
                "automorphism",
                "the diagram automorphism extends to the realization with the stated order and preserves brackets and the Killing form",
                serde_json::json!({ "pair": spec.name() }),
                || {
                    let s = chevalley::automorphism_matrix(&amb, spec).map_err(|e| e.to_string())?;
                    // Killing isometry
                    let k = crate::linalg::Matrix::from_i64_rows(amb.killing_matrix());
                    let congruent = s.transpose().mul(&k).mul(&s);
                    let iso = congruent == k;
                    sigma = Some(s);
                    Ok((iso, serde_json::json!({ "order": spec.order, "killing_isometry": iso })))
                },
            );
        }
        if let (Some(amb), Some(s)) = (ambient.clone(), sigma.as_ref()) {
            rec.record(
                "fixed-subalgebra",
                "the fixed subalgebra has the folded dimension, integer structure constants, and satisfies the folded Serre relations",
                serde_json::json!({ "pair": spec.name() }),
                || {
                    let emb = chevalley::fixed_subalgebra(&amb, s, spec).map_err(|e| e.to_string())?;
                    chevalley::verify_folded_serre(&emb).map_err(|e| e.to_string())?;
                    let dim = emb.own.dim;
                    embedding = Some(emb);
                    Ok((true, serde_json::json!({ "dim": dim })))
                },
            );
        } else {
            rec.skip("fixed-subalgebra", "fixed subalgebra", "automorphism stage failed");
        }
    }

    // stage 3: principal triple surviving the fold
    let mut ambient_decomp = None;
    let mut sub_decomp = None;
    if let (Some(spec), Some(amb), Some(s), Some(emb)) =
        (spec.as_ref(), ambient.clone(), sigma.as_ref(), embedding.as_ref())
    {
        rec.record(
            "folded-principal",
            "the folded nilpotent is sigma-fixed and principal in both the subalgebra and the ambient algebra; string dimensions are 2m+1 for the exponents on both sides",
            serde_json::json!({ "pair": spec.name() }),
            || {
                let y = tds::folded_principal_nilpotent(spec, &amb, s).map_err(|e| e.to_string())?;
                let amb_rep = tds::is_principal(&amb, &y).map_err(|e| e.to_string())?;
                let yk = emb
                    .from_ambient(&y)
                    .ok_or("folded nilpotent does not lie in the subalgebra")?;
                let sub_rep = tds::is_principal(&emb.own, &yk).map_err(|e| e.to_string())?;
                let t_amb = tds::complete_sl2(&amb, &y).map_err(|e| e.to_string())?;
                let sigma_fixed = [&t_amb.x, &t_amb.h, &t_amb.y]
                    .iter()
                    .all(|v| &s.mul_vec(v) == *v);
                let t_sub = tds::complete_sl2(&emb.own, &yk).map_err(|e| e.to_string())?;
                let d_amb = tds::decompose_adjoint(&amb, &t_amb).map_err(|e| e.to_string())?;
                let d_sub = tds::decompose_adjoint(&emb.own, &t_sub).map_err(|e| e.to_string())?;
                let pass = amb_rep.principal && sub_rep.principal && sigma_fixed;
                let witness = serde_json::json!({
                    "ambient_centralizer": amb_rep.centralizer_dim,
                    "sub_centralizer": sub_rep.centralizer_dim,
                    "sigma_fixed": sigma_fixed,
                    "ambient_dims": d_amb.dims,
                    "sub_dims": d_sub.dims,
                });
                ambient_decomp = Some(d_amb);
                sub_decomp = Some(d_sub);
                Ok((pass, witness))
            },
        );
        if let (Some(da), Some(ds)) = (ambient_decomp.as_ref(), sub_decomp.as_ref()) {
            rec.record(
                "strings-in-subalgebra",
                "the subalgebra strings coincide with ambient strings of matching dimension (membership checked exactly)",
                serde_json::json!({ "pair": spec.name() }),
                || {
                    let mut pass = true;
                    for comp in &ds.components {
                        let dim = 2 * comp.m + 1;
                        let ambient_comp: Vec<&tds::StringComponent> = da
                            .components
                            .iter()
                            .filter(|c| 2 * c.m + 1 == dim)
                            .collect();
                        // span membership: each embedded vector solves in
                        // the matching ambient component(s)
                        let mut span: Vec<Vec<crate::Rat>> = Vec::new();
                        for c in &ambient_comp {
                            span.extend(c.basis.iter().cloned());
                        }
                        let span_mat = crate::linalg::Matrix::from_fn(
                            amb.dim,
                            span.len(),
                            |i, j| span[j][i].clone(),
                        );
                        for v in &comp.basis {
                            let ambient_v = emb.to_ambient(v);
                            if span_mat.solve(&ambient_v).is_none() {
                                pass = false;
                            }
                        }
                    }
                    Ok((pass, serde_json::Value::Null))
                },
            );
        }
    } else if spec.is_some() {
        rec.skip("folded-principal", "principal triple", "realization stage failed");
    }

    // stage 4: branching cases
    if let Some(spec) = &spec {
        if rec.all_passed_so_far() {
            rec.record(
                "branching-case",
                "the case identities of the folded pair hold by explicit character computation",
                serde_json::json!({ "pair": spec.name() }),
                || {
                    let report = branching::verify_case(spec, &caps).map_err(|e| e.to_string())?;
                    let pass = report.pass;
                    Ok((pass, json(&report)))
                },
            );
            rec.record(
                "surjectivity",
                "every semigroup generator of the folded dominant cone is an explicit integer polynomial in restricted classes",
                serde_json::json!({ "pair": spec.name() }),
                || {
                    let report =
                        branching::surjectivity_report(spec, &caps).map_err(|e| e.to_string())?;
                    let pass = report.pass;
                    Ok((pass, json(&report)))
                },
            );
            if config.pair == FoldingPair::E6F4 {
                rec.record(
                    "weight-exclusion",
                    "the doubled first folded fundamental weight is not a folded weight of the 2925-dim module (lattice argument and brute force)",
                    serde_json::json!({ "pair": spec.name() }),
                    || {
                        let report =
                            branching::not_a_weight_check(spec, &caps).map_err(|e| e.to_string())?;
                        let pass = report.pass;
                        Ok((pass, json(&report)))
                    },
                );
            }
        } else {
            rec.skip("branching-case", "branching case identities", "earlier stage failed");
            rec.skip("surjectivity", "restricted-class generation", "earlier stage failed");
        }
    }

    // stage 5: invariant forms on the folded algebra
    if let (Some(_spec), Some(emb), Some(ds)) =
        (spec.as_ref(), embedding.as_ref(), sub_decomp.as_ref())
    {
        if config.degrees.is_empty() {
            rec.skip(
                "nonvanishing",
                "invariant-form nonvanishing on the strings",
                "no degrees requested",
            );
        } else {
            let own = Arc::new(emb.own.clone());
            for &d in &config.degrees {
                rec.record(
                    "nonvanishing",
                    "the primitive form of this degree is nonzero on the matching irreducible string",
                    serde_json::json!({ "algebra": own.datum.name(), "degree": d }),
                    || {
                        let space =
                            invariants::primitive_space(&own, d).map_err(|e| e.to_string())?;
                        if space.expected_dim == 0 {
                            return Err(format!("degree {d} carries no primitive form"));
                        }
                        let report = invariants::hitchin_check(
                            &own,
                            ds,
                            d,
                            &space,
                            config.mode,
                            config.seed,
                            config.prime,
                        )
                        .map_err(|e| e.to_string())?;
                        let pass = report.pass;
                        Ok((pass, json(&report)))
                    },
                );
            }
        }
    } else if spec.is_some() {
        rec.skip("nonvanishing", "invariant-form nonvanishing", "earlier stage failed");
    }

    // stage 6: transgression commutes with restriction
    if let (Some(spec), Some(amb), Some(emb)) =
        (spec.as_ref(), ambient.clone(), embedding.as_ref())
    {
        rec.record(
            "transgression",
            "restricting the transgressed degree-2 invariant agrees with transgressing the restricted invariant on sampled tuples",
            serde_json::json!({ "pair": spec.name() }),
            || {
                let report = invariants::verify_transgression_commutes(
                    &amb,
                    emb,
                    &spec.name(),
                    config.seed,
                    10,
                )
                .map_err(|e| e.to_string())?;
                let pass = report.pass;
                Ok((pass, json(&report)))
            },
        );
        rec.record(
            "restricted-invariants",
            "ambient invariants at the folded generator degrees restrict to the folded Cartan with full Jacobian rank",
            serde_json::json!({ "pair": spec.name() }),
            || {
                let report =
                    invariants::chevalley_restriction_check(spec, emb, &caps, config.seed)
                        .map_err(|e| e.to_string())?;
                let pass = report.pass;
                Ok((pass, json(&report)))
            },
        );
    } else if spec.is_some() {
        rec.skip("transgression", "transgression commutativity", "earlier stage failed");
        rec.skip("restricted-invariants", "restricted-invariant independence", "earlier stage failed");
    }

    let summary = Summary {
        pass: rec.checks.iter().filter(|c| c.verdict == Verdict::Pass).count(),
        fail: rec.checks.iter().filter(|c| c.verdict == Verdict::Fail).count(),
        skipped: rec.checks.iter().filter(|c| c.verdict == Verdict::Skipped).count(),
    };
    VerificationReport { schema: 1, config: config.clone(), checks: rec.checks, summary }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_all_d4_g2_passes_and_is_deterministic() {
        let mut config = RunConfig::new(FoldingPair::D4G2, 4);
        config.degrees = vec![3];
        let r1 = run_all(&config);
        assert!(r1.passed(), "{}", r1.render_text());
        let r2 = run_all(&config);
        assert_eq!(r1.to_json(), r2.to_json(), "reports must be byte-identical");
        assert!(!r1.to_json().contains("wall_ms"));
    }

    #[test]
    fn empty_degree_list_skips_nonvanishing() {
        let config = RunConfig::new(FoldingPair::A2n1C, 1);
        let r = run_all(&config);
        assert!(r.passed());
        let skipped: Vec<&CheckRecord> = r
            .checks
            .iter()
            .filter(|c| c.name == "nonvanishing")
            .collect();
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].verdict, Verdict::Skipped);
    }

    #[test]
    fn case_i_identity_present() {
        let config = RunConfig::new(FoldingPair::A2n1C, 1);
        let r = run_all(&config);
        let case = r.checks.iter().find(|c| c.name == "branching-case").unwrap();
        assert_eq!(case.verdict, Verdict::Pass);
        let text = case.witness.to_string();
        assert!(text.contains("contraction identity at degree 2"));
    }
}
