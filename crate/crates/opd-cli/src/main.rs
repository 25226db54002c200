//! `opd`: normalize terms, enumerate branchings, check confluence, complete
//! presentations, compute PBW bases, overlapping resolutions, chain
//! complexes and Koszulness certificates for shuffle operads.
//!
//! All reports are self-contained JSON with a schema version field; output
//! is byte-identical for identical configurations.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use opd_core::branching::{
    check_confluence, complete, critical_branchings, essential_branchings, pbw_basis,
    Branching, ConfluenceScope,
};
use opd_core::error::Error;
use opd_core::linalg::{Rational, Term};
use opd_core::polygraph::{parse_polygraph, parse_term, Polygraph};
use opd_core::resolution::{koszul_certificate, Resolver};
use opd_core::rewrite::{
    normal_form, Evidence, EvidenceSpec, PathLexOrder, ReductionStrategy,
};
use opd_core::treemono::tree_to_string;

const SCHEMA: &str = "opd/1";

#[derive(Parser)]
#[command(name = "opd", version, about = "rewriting engine for shuffle operads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel joins (also OPD_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// Polygraph file.
    file: PathBuf,
    /// Path-lexicographic order, e.g. `pathlex:w,x,y,z`.
    #[arg(long)]
    order: Option<String>,
    /// Override the declared termination evidence with a step bound.
    #[arg(long)]
    fuel: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a term to normal form.
    Normalize {
        #[command(flatten)]
        common: Common,
        /// Term to reduce, in the text grammar.
        #[arg(long)]
        term: String,
    },
    /// Enumerate critical (or essential) branchings.
    Branchings {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        essential: bool,
        /// Emit the branching graph in DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check confluence of all critical branchings.
    Confluence {
        #[command(flatten)]
        common: Common,
        /// Weight bound for the graded decomposition cross-check.
        #[arg(long, default_value_t = 0)]
        max_weight: usize,
    },
    /// Complete the presentation by resolving essential branchings.
    Complete {
        #[command(flatten)]
        common: Common,
    },
    /// Reduced-monomial (PBW) basis of a quadratic convergent polygraph.
    Pbw {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Overlapping resolution generators per dimension.
    Resolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        max_weight: usize,
        /// Write the crown graph in DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Free bimodule chain complex with the d² check.
    Complex {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        max_weight: usize,
        #[arg(long)]
        check_d2: bool,
    },
    /// Koszulness certificate.
    Koszul {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        max_weight: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .or_else(|| std::env::var("OPD_JOBS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = json!({ "schema": SCHEMA, "error": error_json(&e) });
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::InvalidComposition(_) => "invalid-composition",
        Error::ArityMismatch(_) => "arity-mismatch",
        Error::Parse { .. } => "parse",
        Error::NonComposable(_) => "non-composable",
        Error::Precondition(_) => "precondition",
        Error::Budget(_) => "budget",
        Error::FuelExhausted { .. } => "fuel-exhausted",
        Error::CertificateRefuted { .. } => "certificate-refuted",
    };
    json!({ "kind": kind, "message": e.to_string() })
}

struct Loaded {
    polygraph: Polygraph,
    evidence: Evidence,
    order: Option<PathLexOrder>,
}

fn load(common: &Common) -> Result<Loaded, Error> {
    let text = fs::read_to_string(&common.file)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", common.file.display())))?;
    let polygraph = parse_polygraph(&text)?;
    let order = match &common.order {
        None => None,
        Some(spec) => Some(parse_order(&polygraph, spec)?),
    };
    let evidence = if let Some(fuel) = common.fuel {
        Evidence::from_spec(&polygraph, &EvidenceSpec::Fuel(fuel))?
    } else if let Some(o) = &order {
        // an explicit compatible order doubles as termination evidence
        match Evidence::from_order(&polygraph, o) {
            Ok(ev) => ev,
            Err(_) => Evidence::for_polygraph(&polygraph)?,
        }
    } else {
        Evidence::for_polygraph(&polygraph)?
    };
    Ok(Loaded { polygraph, evidence, order })
}

fn parse_order(p: &Polygraph, spec: &str) -> Result<PathLexOrder, Error> {
    let body = spec
        .strip_prefix("pathlex:")
        .ok_or_else(|| Error::InvalidInput(format!("unknown order spec {spec}")))?;
    let names: Vec<String> = body.split(',').map(|s| s.trim().to_string()).collect();
    PathLexOrder::from_names(&p.gens, &names)
}

fn rational_str(r: &Rational) -> String {
    use num_traits::One as _;
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn term_json(p: &Polygraph, t: &Term) -> Value {
    json!({
        "text": t.to_text(&p.gens),
        "monomials": t
            .iter()
            .map(|(m, c)| json!({
                "monomial": tree_to_string(m, &p.gens),
                "coefficient": rational_str(c),
            }))
            .collect::<Vec<_>>(),
    })
}

fn branching_json(p: &Polygraph, b: &Branching) -> Value {
    json!({
        "source": tree_to_string(&b.source, &p.gens),
        "left": { "rule": p.rules[b.left.rule].name },
        "right": { "rule": p.rules[b.right.rule].name },
        "essential": matches!(
            b.kind,
            opd_core::branching::BranchKind::Intersecting { essential: true, .. }
        ),
    })
}

fn run(cmd: Command) -> Result<Value, Error> {
    match cmd {
        Command::Normalize { common, term } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let t = parse_term(&p.gens, &term)?.ok_or_else(|| {
                Error::InvalidInput("the zero term has no interesting normal form".into())
            })?;
            let nf = normal_form(p, &t, &l.evidence, ReductionStrategy::LeastFirst)?;
            let trace: Vec<Value> = nf
                .trace
                .top(1)
                .map(|top| {
                    top.iter()
                        .map(|(cm, c)| {
                            json!({
                                "rule": p.rules[cm.gen.idx].name,
                                "coefficient": rational_str(c),
                            })
                        })
                        .collect()
                })
                .unwrap_or_default();
            Ok(json!({
                "schema": SCHEMA,
                "command": "normalize",
                "input": term,
                "normalForm": term_json(p, &nf.normal_form),
                "steps": nf.steps,
                "trace": trace,
                "evidence": l.evidence.describe(),
            }))
        }
        Command::Branchings { common, essential, dot } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let order = l.order.clone().unwrap_or_else(|| PathLexOrder::declaration(&p.gens));
            let list = if essential {
                essential_branchings(p, &order)?
            } else {
                // mark which criticals are also essential
                let ess = essential_branchings(p, &order)?;
                let keys: std::collections::BTreeSet<_> = ess
                    .iter()
                    .map(|b| (b.source.clone(), b.left.clone(), b.right.clone()))
                    .collect();
                critical_branchings(p)?
                    .into_iter()
                    .map(|mut b| {
                        if keys.contains(&(b.source.clone(), b.left.clone(), b.right.clone())) {
                            b.kind = opd_core::branching::BranchKind::Intersecting {
                                critical: true,
                                essential: true,
                            };
                        }
                        b
                    })
                    .collect()
            };
            if let Some(path) = dot {
                fs::write(&path, branchings_dot(p, &list, &l.evidence))
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            }
            Ok(json!({
                "schema": SCHEMA,
                "command": "branchings",
                "essentialOnly": essential,
                "count": list.len(),
                "branchings": list.iter().map(|b| branching_json(p, b)).collect::<Vec<_>>(),
            }))
        }
        Command::Confluence { common, max_weight } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let w = if max_weight == 0 {
                (2 * p.max_rule_weight()).max(4)
            } else {
                max_weight
            };
            let rep = check_confluence(p, &l.evidence, ConfluenceScope::Critical, w)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "confluence",
                "confluent": rep.confluent,
                "evidence": l.evidence.describe(),
                "terminationProved": l.evidence.is_proof(),
                "maxWeight": w,
                "branchings": rep
                    .verdicts
                    .iter()
                    .map(|v| json!({
                        "source": tree_to_string(&v.branching.source, &p.gens),
                        "leftRule": p.rules[v.branching.left.rule].name,
                        "rightRule": p.rules[v.branching.right.rule].name,
                        "joinable": v.joinable,
                        "leftNormalForm": v.left_nf.to_text(&p.gens),
                        "rightNormalForm": v.right_nf.to_text(&p.gens),
                    }))
                    .collect::<Vec<_>>(),
                "decomposition": rep.decomposition.as_ref().map(|checks| checks
                    .iter()
                    .map(|c| json!({
                        "arity": c.arity,
                        "weight": c.weight,
                        "dimFree": c.dim_free,
                        "dimReduced": c.dim_reduced,
                        "rankIdeal": c.rank_ideal,
                        "directSum": c.direct_sum,
                    }))
                    .collect::<Vec<_>>()),
                "decompositionOk": rep.decomposition_ok,
            }))
        }
        Command::Complete { common } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let order = match (&l.order, &p.evidence) {
                (Some(o), _) => o.clone(),
                (None, Some(EvidenceSpec::Order(names))) => {
                    PathLexOrder::from_names(&p.gens, names)?
                }
                _ => {
                    return Err(Error::Precondition(
                        "completion needs --order pathlex:... or declared order evidence".into(),
                    ))
                }
            };
            let fuel = common.fuel.unwrap_or(64);
            let res = complete(p, &order, fuel)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "complete",
                "convergent": res.convergent,
                "rounds": res.rounds,
                "addedRules": res
                    .added
                    .iter()
                    .map(|r| json!({
                        "name": r.name,
                        "source": tree_to_string(&r.source, &p.gens),
                        "target": r.target.to_text(&p.gens),
                    }))
                    .collect::<Vec<_>>(),
                "polygraph": res.polygraph.to_text(),
            }))
        }
        Command::Pbw { common, max_arity, max_weight } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let order = match (&l.order, &p.evidence) {
                (Some(o), _) => o.clone(),
                (None, Some(EvidenceSpec::Order(names))) => {
                    PathLexOrder::from_names(&p.gens, names)?
                }
                _ => PathLexOrder::declaration(&p.gens),
            };
            let mw = max_weight.unwrap_or(2 * max_arity);
            let basis = pbw_basis(p, &order, max_arity, mw)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "pbw",
                "maxArity": max_arity,
                "maxWeight": mw,
                "closureVerified": basis.closure_verified,
                "basis": basis
                    .by_arity
                    .iter()
                    .map(|(a, ms)| json!({
                        "arity": a,
                        "count": ms.len(),
                        "monomials": ms.iter().map(|m| tree_to_string(m, &p.gens)).collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
            }))
        }
        Command::Resolve { common, dim, max_weight, dot } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let r = Resolver::new(p, &l.evidence, max_weight)?;
            let dims = r.overlappings_up_to(dim)?;
            if let Some(path) = dot {
                let g = r.crown_graph(dim)?;
                fs::write(&path, g.to_dot())
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            }
            let mut layers = Vec::new();
            layers.push(json!({
                "dim": 0,
                "count": p.gens.len(),
                "generators": p.gens.ids().map(|g| p.gens.get(g).name.clone()).collect::<Vec<_>>(),
            }));
            for d in 1..dims.len() {
                layers.push(json!({
                    "dim": d,
                    "count": dims[d].len(),
                    "generators": dims[d]
                        .iter()
                        .map(|&i| {
                            let ov = r.overlapping(i);
                            json!({
                                "source": tree_to_string(&ov.source, &p.gens),
                                "weight": ov.graded_weight(p),
                                "arity": ov.arity(),
                                "branches": ov
                                    .branches
                                    .iter()
                                    .map(|(_, rule)| p.rules[*rule].name.clone())
                                    .collect::<Vec<_>>(),
                            })
                        })
                        .collect::<Vec<_>>(),
                }));
            }
            Ok(json!({
                "schema": SCHEMA,
                "command": "resolve",
                "maxDim": dim,
                "maxWeight": max_weight,
                "generatorsPerDim": layers,
            }))
        }
        Command::Complex { common, dim, max_weight, check_d2 } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let r = Resolver::new(p, &l.evidence, max_weight)?;
            let complex = r.chain_complex(dim)?;
            let d2 = if check_d2 { Some(complex.check_d_squared()?) } else { None };
            let all_zero = d2.as_ref().map(|v| v.iter().all(|(_, ok)| *ok));
            Ok(json!({
                "schema": SCHEMA,
                "command": "complex",
                "maxDim": dim,
                "maxWeight": max_weight,
                "generators": complex
                    .dims
                    .iter()
                    .enumerate()
                    .map(|(d, layer)| json!({
                        "dim": d,
                        "generators": layer
                            .iter()
                            .map(|g| json!({
                                "name": g.name,
                                "arity": g.arity,
                                "weight": g.weight,
                                "differentialSize": g.differential.len(),
                            }))
                            .collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
                "dSquared": d2.map(|v| v
                    .iter()
                    .map(|(name, ok)| json!({ "generator": name, "zero": ok }))
                    .collect::<Vec<_>>()),
                "dSquaredZero": all_zero,
            }))
        }
        Command::Koszul { common, dim, max_weight } => {
            let l = load(&common)?;
            let p = &l.polygraph;
            let cert = koszul_certificate(p, &l.evidence, dim, max_weight)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "koszul",
                "koszul": cert.koszul,
                "quadratic": cert.quadratic,
                "reduced": cert.reduced,
                "convergence": {
                    "verdict": cert.convergent,
                    "termination": cert.termination,
                    "terminationProved": cert.termination_is_proof,
                },
                "concentration": cert
                    .concentration
                    .iter()
                    .map(|(d, ws)| json!({ "dim": d, "weights": ws }))
                    .collect::<Vec<_>>(),
                "superdiagonal": cert.superdiagonal,
                "minimal": cert.minimal,
                "bounds": { "maxDim": cert.max_dim, "maxWeight": cert.max_weight },
            }))
        }
    }
}

/// Branching graph: each branching contributes its two legs from the
/// shared source to the legs' normal forms.
fn branchings_dot(p: &Polygraph, list: &[Branching], evidence: &Evidence) -> String {
    let mut out = String::from("digraph branchings {\n");
    for b in list {
        let src = tree_to_string(&b.source, &p.gens);
        for (step, side) in [(&b.left, "L"), (&b.right, "R")] {
            let target = b
                .leg_target(p, step)
                .and_then(|t| normal_form(p, &t, evidence, ReductionStrategy::LeastFirst))
                .map(|nf| nf.normal_form.to_text(&p.gens))
                .unwrap_or_else(|_| "?".into());
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{} {}\"];\n",
                src, target, side, p.rules[step.rule].name
            ));
        }
    }
    out.push_str("}\n");
    out
}
