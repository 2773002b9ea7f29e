//! Command-line front end: folding tables, restriction checks,
//! branching, principal triples, invariant-form nonvanishing, and the
//! full verification pipeline.
//!
//! Every flag can also be supplied through an environment variable with
//! the LIEFOLD_ prefix (flags win): LIEFOLD_PAIR, LIEFOLD_N,
//! LIEFOLD_SEED, LIEFOLD_MODE, LIEFOLD_PRIME, LIEFOLD_JSON,
//! LIEFOLD_CAP_DIM, LIEFOLD_TIMINGS.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};

use liefold::branching;
use liefold::chevalley;
use liefold::folding::{make_folding, FoldingPair, FoldingSpec};
use liefold::invariants::{self, ArithMode, PrimePolicy};
use liefold::report::{run_all, RunConfig};
use liefold::rootsys::{Caps, Family, Weight};
use liefold::tds;

#[derive(Parser)]
#[command(
    name = "liefold",
    about = "Exact verification of diagram folding, principal sl2 triples, branching, and invariant-form nonvanishing for simple Lie algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Folded pair: A2n1_C, A2n_B, Dn_B, D4_G2, E6_F4
    #[arg(long, global = true)]
    pair: Option<String>,

    /// Family parameter n of the pair
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Seed determining all sampled checks and the auto prime policy
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Arithmetic mode: exact | modular
    #[arg(long, global = true)]
    mode: Option<String>,

    /// Prime policy: auto | an explicit prime
    #[arg(long, global = true)]
    prime: Option<String>,

    /// Write the JSON report to this path instead of stdout
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,

    /// Cap on dimensions whose characters are materialized
    #[arg(long, global = true, value_name = "N")]
    cap_dim: Option<u128>,

    /// Include wall-clock timings in reports (breaks byte-determinism)
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the folding data: orbits, restriction matrix, coroot folds,
    /// root lengths, as JSON and a readable table
    Fold,
    /// Verify the restriction-pairing table of the folded pair
    Lemma11,
    /// Branch a source module through the folding
    Branch {
        /// Source highest weight, comma-separated fundamental coordinates
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Construct the folded principal triple and decompose the adjoint
    Tds,
    /// Nonvanishing certificates for the primitive forms of one algebra
    Hitchin {
        /// Simple type, e.g. G2, A3, D4
        #[arg(long = "type", value_name = "TYPE")]
        algebra: Option<String>,
        /// Comma-separated list of odd degrees
        #[arg(long)]
        degrees: Option<String>,
    },
    /// Check that transgression commutes with restriction for the pair
    Transgression,
    /// Check restricted-invariant independence on the folded Cartan
    Chevrestrict,
    /// Run the whole verification pipeline for the pair
    All {
        /// Comma-separated list of odd degrees for the nonvanishing stage
        #[arg(long)]
        degrees: Option<String>,
    },
}

fn env_override<T: std::str::FromStr>(cli: Option<T>, var: &str) -> Option<T> {
    cli.or_else(|| std::env::var(var).ok().and_then(|s| s.parse().ok()))
}

struct Resolved {
    pair: FoldingPair,
    n: usize,
    seed: u64,
    mode: ArithMode,
    prime: PrimePolicy,
    caps: Caps,
    json: Option<PathBuf>,
    timings: bool,
}

fn resolve(cli: &Cli) -> Result<Resolved, String> {
    let pair_str = env_override(cli.pair.clone(), "LIEFOLD_PAIR").unwrap_or_else(|| "D4_G2".into());
    let pair = FoldingPair::parse(&pair_str).ok_or(format!("unknown pair '{pair_str}'"))?;
    let n = env_override(cli.n, "LIEFOLD_N").unwrap_or_else(|| pair.default_n());
    let seed = env_override(cli.seed, "LIEFOLD_SEED").unwrap_or(42);
    let mode_str = env_override(cli.mode.clone(), "LIEFOLD_MODE").unwrap_or_else(|| "exact".into());
    let mode = match mode_str.as_str() {
        "exact" => ArithMode::Exact,
        "modular" => ArithMode::Modular,
        other => return Err(format!("unknown mode '{other}'")),
    };
    let prime_str =
        env_override(cli.prime.clone(), "LIEFOLD_PRIME").unwrap_or_else(|| "auto".into());
    let prime = if prime_str == "auto" {
        PrimePolicy::Auto
    } else {
        let p: u64 = prime_str
            .parse()
            .map_err(|_| format!("prime must be 'auto' or an integer, got '{prime_str}'"))?;
        if !liefold::scalar::is_prime_u64(p) {
            return Err(format!("{p} is not prime"));
        }
        PrimePolicy::Explicit(p)
    };
    let mut caps = Caps::default();
    if let Some(c) = env_override(cli.cap_dim, "LIEFOLD_CAP_DIM") {
        caps.character = c;
    }
    let json = cli
        .json
        .clone()
        .or_else(|| std::env::var("LIEFOLD_JSON").ok().map(PathBuf::from));
    let timings = cli.timings || std::env::var("LIEFOLD_TIMINGS").is_ok();
    Ok(Resolved { pair, n, seed, mode, prime, caps, json, timings })
}

fn parse_type(s: &str) -> Result<(Family, usize), String> {
    if s.is_empty() {
        return Err("empty type".into());
    }
    let (f, rest) = s.split_at(1);
    let family = match f {
        "A" | "a" => Family::A,
        "B" | "b" => Family::B,
        "C" | "c" => Family::C,
        "D" | "d" => Family::D,
        "E" | "e" => Family::E,
        "F" | "f" => Family::F,
        "G" | "g" => Family::G,
        _ => return Err(format!("unknown family in '{s}'")),
    };
    let rank: usize = rest.parse().map_err(|_| format!("bad rank in '{s}'"))?;
    Ok((family, rank))
}

fn parse_degrees(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|x| !x.is_empty())
        .map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad degree '{x}'")))
        .collect()
}

fn parse_lambda(s: &str, rank: usize) -> Result<Weight, String> {
    let coords: Result<Vec<i64>, _> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| format!("bad coordinate '{x}'")))
        .collect();
    let coords = coords?;
    if coords.len() != rank {
        return Err(format!("expected {rank} coordinates, got {}", coords.len()));
    }
    Ok(Weight(coords))
}

fn emit(json: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match json {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn fold_table(spec: &FoldingSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "folding {} -> {} (order {})\n",
        spec.source.name(),
        spec.target.name(),
        spec.order
    ));
    let max_d = *spec.target.symmetrizer.iter().max().unwrap();
    for (j, orbit) in spec.orbits.iter().enumerate() {
        let length = if spec.target.symmetrizer[j] == max_d { "long" } else { "short" };
        let orbit_str: Vec<String> = orbit.iter().map(|k| format!("{}", k + 1)).collect();
        let fold_str: Vec<String> = spec.coroot_fold[j]
            .iter()
            .map(|(k, c)| {
                if *c == 1 {
                    format!("a{}*", k + 1)
                } else {
                    format!("{c} a{}*", k + 1)
                }
            })
            .collect();
        out.push_str(&format!(
            "  b{} <- orbit {{{}}}  coroot {}  ({})\n",
            j + 1,
            orbit_str.join(","),
            fold_str.join(" + "),
            length
        ));
    }
    out
}

fn run(cli: &Cli) -> Result<bool, String> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Fold => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let max_d = *spec.target.symmetrizer.iter().max().unwrap();
            let lengths: Vec<&str> = (0..spec.target.rank)
                .map(|j| if spec.target.symmetrizer[j] == max_d { "long" } else { "short" })
                .collect();
            let value = serde_json::json!({
                "schema": 1,
                "pair": spec.name(),
                "source": spec.source.to_doc(),
                "target": spec.target.to_doc(),
                "sigma": spec.sigma.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "order": spec.order,
                "orbits": spec.orbits.iter().map(|o| o.iter().map(|k| k + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "orbit_representatives": spec.orbit_reps.iter().map(|k| k + 1).collect::<Vec<_>>(),
                "coroot_folds": spec.coroot_fold,
                "restriction_matrix": spec.restriction,
                "root_lengths": lengths,
            });
            eprintln!("{}", fold_table(&spec));
            emit(&cfg.json, &value)?;
            Ok(true)
        }
        Command::Lemma11 => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let report = spec.verify_restriction_pairings();
            let pass = report.pass;
            emit(&cfg.json, &serde_json::to_value(&report).unwrap())?;
            Ok(pass)
        }
        Command::Branch { lambda } => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let lam = match lambda
                .clone()
                .or_else(|| std::env::var("LIEFOLD_LAMBDA").ok())
            {
                Some(s) => parse_lambda(&s, spec.source.rank)?,
                None => Weight::fundamental(spec.source.rank, 0),
            };
            let result = branching::branch(&spec, &lam, &cfg.caps).map_err(|e| e.to_string())?;
            emit(&cfg.json, &serde_json::to_value(&result).unwrap())?;
            Ok(true)
        }
        Command::Tds => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let ambient = chevalley::realize(spec.source.family, spec.source.rank)
                .map_err(|e| e.to_string())?;
            let sigma =
                chevalley::automorphism_matrix(&ambient, &spec).map_err(|e| e.to_string())?;
            let y = tds::folded_principal_nilpotent(&spec, &ambient, &sigma)
                .map_err(|e| e.to_string())?;
            let amb_rep = tds::is_principal(&ambient, &y).map_err(|e| e.to_string())?;
            let triple = tds::complete_sl2(&ambient, &y).map_err(|e| e.to_string())?;
            let decomp = tds::decompose_adjoint(&ambient, &triple).map_err(|e| e.to_string())?;
            let emb = chevalley::fixed_subalgebra(&ambient, &sigma, &spec)
                .map_err(|e| e.to_string())?;
            let yk = emb
                .from_ambient(&y)
                .ok_or("folded nilpotent is outside the subalgebra")?;
            let sub_rep = tds::is_principal(&emb.own, &yk).map_err(|e| e.to_string())?;
            let fmt =
                |v: &Vec<liefold::Rat>| -> Vec<String> { v.iter().map(|c| c.to_string()).collect() };
            let value = serde_json::json!({
                "schema": 1,
                "pair": spec.name(),
                "x": fmt(&triple.x),
                "h": fmt(&triple.h),
                "y": fmt(&triple.y),
                "ambient_centralizer_dim": amb_rep.centralizer_dim,
                "sub_centralizer_dim": sub_rep.centralizer_dim,
                "dims": decomp.dims,
                "highest_weight_space_dims": decomp.highest_weight_space_dims,
            });
            emit(&cfg.json, &value)?;
            Ok(amb_rep.principal && sub_rep.principal)
        }
        Command::Hitchin { algebra, degrees } => {
            let type_str = algebra
                .clone()
                .or_else(|| std::env::var("LIEFOLD_TYPE").ok())
                .unwrap_or_else(|| "G2".into());
            let (family, rank) = parse_type(&type_str)?;
            let degree_list = match degrees
                .clone()
                .or_else(|| std::env::var("LIEFOLD_DEGREES").ok())
            {
                Some(s) => parse_degrees(&s)?,
                None => Vec::new(),
            };
            if degree_list.is_empty() {
                return Err("no degrees requested; pass --degrees, e.g. --degrees 3,11".into());
            }
            let r = Arc::new(chevalley::realize(family, rank).map_err(|e| e.to_string())?);
            let y = tds::principal_nilpotent(&r);
            let triple = tds::complete_sl2(&r, &y).map_err(|e| e.to_string())?;
            let decomp = tds::decompose_adjoint(&r, &triple).map_err(|e| e.to_string())?;
            let mut reports = Vec::new();
            let mut all_pass = true;
            for d in degree_list {
                let start = Instant::now();
                let space = invariants::primitive_space(&r, d).map_err(|e| e.to_string())?;
                if space.expected_dim == 0 {
                    return Err(format!("{type_str} has no primitive form of degree {d}"));
                }
                let report = invariants::hitchin_check(
                    &r, &decomp, d, &space, cfg.mode, cfg.seed, cfg.prime,
                )
                .map_err(|e| e.to_string())?;
                all_pass &= report.pass;
                let mut value = serde_json::to_value(&report).unwrap();
                if cfg.timings {
                    value["wall_ms"] = serde_json::Value::from(start.elapsed().as_millis() as u64);
                }
                reports.push(value);
            }
            let value = serde_json::json!({
                "schema": 1,
                "algebra": type_str,
                "mode": format!("{:?}", cfg.mode),
                "seed": cfg.seed,
                "reports": reports,
                "pass": all_pass,
            });
            emit(&cfg.json, &value)?;
            Ok(all_pass)
        }
        Command::Transgression => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let ambient = Arc::new(
                chevalley::realize(spec.source.family, spec.source.rank)
                    .map_err(|e| e.to_string())?,
            );
            let sigma =
                chevalley::automorphism_matrix(&ambient, &spec).map_err(|e| e.to_string())?;
            let emb = chevalley::fixed_subalgebra(&ambient, &sigma, &spec)
                .map_err(|e| e.to_string())?;
            let report = invariants::verify_transgression_commutes(
                &ambient,
                &emb,
                &spec.name(),
                cfg.seed,
                10,
            )
            .map_err(|e| e.to_string())?;
            let pass = report.pass;
            emit(&cfg.json, &serde_json::to_value(&report).unwrap())?;
            Ok(pass)
        }
        Command::Chevrestrict => {
            let spec = make_folding(cfg.pair, cfg.n).map_err(|e| e.to_string())?;
            let ambient = Arc::new(
                chevalley::realize(spec.source.family, spec.source.rank)
                    .map_err(|e| e.to_string())?,
            );
            let sigma =
                chevalley::automorphism_matrix(&ambient, &spec).map_err(|e| e.to_string())?;
            let emb = chevalley::fixed_subalgebra(&ambient, &sigma, &spec)
                .map_err(|e| e.to_string())?;
            let report = invariants::chevalley_restriction_check(&spec, &emb, &cfg.caps, cfg.seed)
                .map_err(|e| e.to_string())?;
            let pass = report.pass;
            emit(&cfg.json, &serde_json::to_value(&report).unwrap())?;
            Ok(pass)
        }
        Command::All { degrees } => {
            let degree_list = match degrees
                .clone()
                .or_else(|| std::env::var("LIEFOLD_DEGREES").ok())
            {
                Some(s) => parse_degrees(&s)?,
                None => Vec::new(),
            };
            let mut config = RunConfig::new(cfg.pair, cfg.n);
            config.degrees = degree_list;
            config.mode = cfg.mode;
            config.prime = cfg.prime;
            config.seed = cfg.seed;
            config.caps = cfg.caps;
            config.timings = cfg.timings;
            let report = run_all(&config);
            eprint!("{}", report.render_text());
            let value = serde_json::from_str(&report.to_json()).unwrap();
            emit(&cfg.json, &value)?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
