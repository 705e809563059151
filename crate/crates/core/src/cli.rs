//! Command line front end. [`run`] is the testable entry point; it returns the
//! exit code together with what would go to stdout and stderr.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{AlgebraKind, DeformedAlgebra, Level};
use crate::complex::{reduce_complex, GradedMap, PreComplex};
use crate::crude::{classify_homotopy_lifts, classify_homotopy_map_lifts, crude_lift, CrudeState};
use crate::defun::{
    extend_order, extend_orders, functor_eval, schlessinger_check, ArtinLocalRing, ArtinMap, DefContext, FunctorTag,
    RingTriple,
};
use crate::doc::{canonical, complex_to_json, map_to_json, Context, Document, ProblemPayload};
use crate::error::{Error, Result};
use crate::finring::TowerKind;
use crate::obstruction::{DiffProblem, HomotopyProblem, LiftProblem, MapProblem};
use crate::oracle::{gen_instance, oracle_enumerate, InstanceSpec, DEFAULT_CAP};
use crate::report::{class_json, guard_json, lift_json, lift_verdict, Report, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Obstruction class of a differential lift.
    ObstructDiff,
    /// Obstruction and a lifted differential when one exists.
    LiftDiff,
    /// All lifted differentials up to isomorphism.
    Classify,
    /// Lift a cochain map between lifted complexes.
    LiftMap,
    /// Lift a homotopy between lifted maps.
    LiftHomotopy,
    /// Lift a homotopy equivalence together with its source differential.
    CrudeLift,
    /// Lifts up to homotopy equivalence, or map lifts up to homotopy.
    ClassifyHomotopy,
    /// Tangent dimension of the deformation functor.
    Tangent,
    /// Evaluate a deformation functor on an Artin ring.
    FunctorEval,
    /// Fiber-product and smoothness checks on a standard suite of rings.
    Schlessinger,
    /// Extend a differential over a truncated polynomial ring by one order.
    ExtendOrder,
    /// Brute-force enumeration cross-checked against the classification.
    Oracle,
    /// Emit a seeded random lifting problem.
    Gen,
}

#[derive(Debug, Parser)]
#[command(name = "deflift", version, about = "Lift complexes of modules along square-zero extensions")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Input document.
    pub input: Option<PathBuf>,
    /// Tower document for algebras that omit their tower.
    #[arg(long)]
    pub tower: Option<PathBuf>,
    /// Algebra document for complexes and problems that omit theirs.
    #[arg(long)]
    pub algebra: Option<PathBuf>,
    /// Complex document (alternative to INPUT).
    #[arg(long)]
    pub complex: Option<PathBuf>,
    /// Map document (alternative to INPUT).
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumeration cap for exhaustive searches.
    #[arg(long, default_value_t = DEFAULT_CAP as u64)]
    pub cap: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include intermediate data in the report.
    #[arg(long)]
    pub trace: bool,
    /// Characteristic for `gen`.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Artin ring for `functor-eval`: k, k[e], t^N or e^R.
    #[arg(long, default_value = "k[e]")]
    pub ring: String,
    /// Functor for `functor-eval`: F0, F or F1.
    #[arg(long, default_value = "F")]
    pub functor: String,
    /// Compare against the homotopy search in `functor-eval`.
    #[arg(long)]
    pub cross_check: bool,
    /// Target order for `extend-order`.
    #[arg(long)]
    pub to: Option<u32>,
}

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    let result = execute(&cli);
    let mut stderr = String::new();
    let (code, text) = match result {
        Ok(Output::Report(r)) => (r.verdict.exit_code(), canonical(&r.to_json())),
        Ok(Output::Document(text)) => (0, text),
        Err(e) => {
            stderr.push_str(&format!("error: {e}\n"));
            let mut r = Report::new(command_name(cli.command), Verdict::Failed);
            r.set("error", json!(e.to_string()));
            (1, canonical(&r.to_json()))
        }
    };
    stderr.push_str(&format!("elapsed: {:.3} ms\n", start.elapsed().as_secs_f64() * 1e3));
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr },
            Err(e) => Outcome { code: 1, stdout: String::new(), stderr: format!("{stderr}error: {e}\n") },
        },
        None => Outcome { code, stdout: text, stderr },
    }
}

/// Runs with the process arguments and returns the exit code.
pub fn main() -> i32 {
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

enum Output {
    Report(Report),
    Document(String),
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::ObstructDiff => "obstruct-diff",
        Command::LiftDiff => "lift-diff",
        Command::Classify => "classify",
        Command::LiftMap => "lift-map",
        Command::LiftHomotopy => "lift-homotopy",
        Command::CrudeLift => "crude-lift",
        Command::ClassifyHomotopy => "classify-homotopy",
        Command::Tangent => "tangent",
        Command::FunctorEval => "functor-eval",
        Command::Schlessinger => "schlessinger",
        Command::ExtendOrder => "extend-order",
        Command::Oracle => "oracle",
        Command::Gen => "gen",
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn context(cli: &Cli) -> Result<Context> {
    let mut ctx = Context::default();
    if let Some(path) = &cli.tower {
        match Document::parse(&read(path)?, &ctx)? {
            Document::Tower(t) => ctx.tower = Some(t),
            other => return Err(Error::SchemaMismatch { expected: "tower".into(), found: other.schema().into() }),
        }
    }
    if let Some(path) = &cli.algebra {
        match Document::parse(&read(path)?, &ctx)? {
            Document::Algebra(a) => ctx.algebra = Some(a),
            other => return Err(Error::SchemaMismatch { expected: "algebra".into(), found: other.schema().into() }),
        }
    }
    Ok(ctx)
}

fn input(cli: &Cli) -> Result<Document> {
    let path = cli
        .input
        .as_ref()
        .or(cli.complex.as_ref())
        .or(cli.map.as_ref())
        .ok_or_else(|| Error::Validation("no input document given".into()))?;
    Document::parse(&read(path)?, &context(cli)?)
}

fn expect_level(c: &PreComplex, level: Level) -> Result<()> {
    if c.level() != level {
        return Err(Error::LevelMismatch { expected: level.to_string(), found: c.level().to_string() });
    }
    Ok(())
}

fn differential(doc: &Document) -> Result<DiffProblem> {
    let (alg, c) = match doc {
        Document::Complex { alg, complex } => (alg, complex),
        Document::Problem { alg, problem: ProblemPayload::Differential { complex } } => (alg, complex),
        other => return Err(Error::SchemaMismatch { expected: "complex".into(), found: other.schema().into() }),
    };
    expect_level(c, Level::Mid)?;
    DiffProblem::new(alg.clone(), c)
}

fn map_parts(doc: &Document) -> Option<(&Arc<DeformedAlgebra>, &PreComplex, &PreComplex, &GradedMap)> {
    match doc {
        Document::Map { alg, source, target, map } => Some((alg, source, target, map)),
        Document::Problem { alg, problem: ProblemPayload::Map { source, target, map } } => Some((alg, source, target, map)),
        _ => None,
    }
}

fn map_problem(doc: &Document) -> Result<MapProblem> {
    let (alg, s, t, f) =
        map_parts(doc).ok_or_else(|| Error::SchemaMismatch { expected: "map".into(), found: doc.schema().into() })?;
    MapProblem::new(alg.clone(), s, t, f)
}

fn homotopy_problem(doc: &Document) -> Result<HomotopyProblem> {
    match doc {
        Document::Problem { alg, problem: ProblemPayload::Homotopy { source, target, homotopy, f, g } } => {
            HomotopyProblem::new(alg.clone(), source, target, homotopy, f, g)
        }
        other => Err(Error::SchemaMismatch { expected: "problem (homotopy)".into(), found: other.schema().into() }),
    }
}

fn lift_problem(doc: &Document) -> Result<LiftProblem> {
    match doc {
        Document::Problem { problem: ProblemPayload::Homotopy { .. }, .. } => Ok(LiftProblem::Homotopy(homotopy_problem(doc)?)),
        _ if map_parts(doc).is_some() => Ok(LiftProblem::Map(map_problem(doc)?)),
        _ => Ok(LiftProblem::Differential(differential(doc)?)),
    }
}

/// Classification, or just the obstruction when there is no lift.
fn classify_or_lift(p: &LiftProblem) -> Result<crate::obstruction::LiftReport> {
    match p.classify() {
        Err(Error::Obstructed) => p.lift(),
        other => other,
    }
}

fn def_context(doc: &Document) -> Result<DefContext> {
    let (alg, c) = match doc {
        Document::Complex { alg, complex } => (alg, complex),
        Document::Problem { alg, problem: ProblemPayload::Differential { complex } } => (alg, complex),
        other => return Err(Error::SchemaMismatch { expected: "complex".into(), found: other.schema().into() }),
    };
    if alg.kind != AlgebraKind::Trivial {
        return Err(Error::Validation("deformation functors need an algebra defined over F_p".into()));
    }
    let base = if c.level() == Level::Base { c.clone() } else { reduce_complex(alg, c, Level::Base)? };
    DefContext::new(alg.p(), alg.names.clone(), alg.base_consts(), base)
}

fn parse_ring(p: u32, spec: &str) -> Result<ArtinLocalRing> {
    let num = |s: &str| s.parse::<u32>().map_err(|_| Error::Parse(format!("bad ring `{spec}`")));
    match spec {
        "k" => ArtinLocalRing::field(p),
        "k[e]" | "dual" => ArtinLocalRing::truncated(p, 2),
        _ if spec.starts_with("t^") => ArtinLocalRing::truncated(p, num(&spec[2..])?),
        _ if spec.starts_with("e^") => ArtinLocalRing::square_zero(p, num(&spec[2..])?),
        _ => Err(Error::Parse(format!("unknown ring `{spec}`; use k, k[e], t^N or e^R"))),
    }
}

/// `k[ε] ×_k k[δ]`, `k ×_k k`, and `k[t]/t³ → k[t]/t² ← k[t]/t²`.
pub fn default_triples(p: u32) -> Result<Vec<RingTriple>> {
    let k = ArtinLocalRing::field(p)?;
    let e = ArtinLocalRing::truncated(p, 2)?;
    let t3 = ArtinLocalRing::truncated(p, 3)?;
    let id2 = ArtinMap::new(&e, &e, vec![vec![1, 0], vec![0, 1]])?;
    let cut = ArtinMap::new(&t3, &e, vec![vec![1, 0], vec![0, 1], vec![0, 0]])?;
    Ok(vec![
        RingTriple::new("k[e] x_k k[e]", ArtinMap::to_residue(&e)?, ArtinMap::to_residue(&e)?)?,
        RingTriple::new("k x_k k", ArtinMap::to_residue(&k)?, ArtinMap::to_residue(&k)?)?,
        RingTriple::new("t^3 x_(t^2) t^2", cut, id2)?,
    ])
}

fn state_json(s: &CrudeState) -> Value {
    json!({
        "d_c": map_to_json(&s.d_c),
        "f": map_to_json(&s.f),
        "g": map_to_json(&s.g),
        "h": map_to_json(&s.h),
        "k": map_to_json(&s.k),
    })
}

fn execute(cli: &Cli) -> Result<Output> {
    let name = command_name(cli.command);
    if cli.command == Command::Gen {
        let inst = gen_instance(&InstanceSpec::new(cli.seed, cli.p))?;
        let doc = Document::Problem { alg: inst.alg, problem: ProblemPayload::Differential { complex: inst.complex } };
        return Ok(Output::Document(doc.to_text()));
    }
    if cli.command == Command::Schlessinger && cli.input.is_none() && cli.complex.is_none() {
        return Err(Error::Validation("schlessinger needs a base complex".into()));
    }
    let doc = input(cli)?;
    let mut r = Report::new(name, Verdict::Classified);
    r.set("input_digest", json!(doc.digest()));
    match cli.command {
        Command::ObstructDiff => {
            let p = differential(&doc)?;
            let o = p.obstruction()?;
            r.verdict = if o.is_zero() { Verdict::Lifts } else { Verdict::Obstructed };
            r.set("obstruction", class_json(&o)).set("obstruction_h_dim", json!(p.kernel.h_dim(2)));
        }
        Command::LiftDiff => {
            let p = differential(&doc)?;
            let rep = p.lift()?;
            r.verdict = lift_verdict(&rep);
            r.set("result", lift_json(&rep));
        }
        Command::Classify => {
            let rep = classify_or_lift(&LiftProblem::Differential(differential(&doc)?))?;
            r.verdict = if rep.lifts() { Verdict::Classified } else { Verdict::Obstructed };
            r.set("result", lift_json(&rep));
        }
        Command::LiftMap => {
            let rep = classify_or_lift(&LiftProblem::Map(map_problem(&doc)?))?;
            r.verdict = lift_verdict(&rep);
            r.set("result", lift_json(&rep));
        }
        Command::LiftHomotopy => {
            let rep = classify_or_lift(&LiftProblem::Homotopy(homotopy_problem(&doc)?))?;
            r.verdict = lift_verdict(&rep);
            r.set("result", lift_json(&rep));
        }
        Command::CrudeLift => {
            let (alg, data, d_bar) = match &doc {
                Document::Problem { alg, problem: ProblemPayload::Equivalence { data, d_bar } } => (alg, data, d_bar),
                other => return Err(Error::SchemaMismatch { expected: "problem (equivalence)".into(), found: other.schema().into() }),
            };
            let out = crude_lift(alg, data, d_bar)?;
            r.verdict = Verdict::Lifts;
            r.set("result", state_json(&out.state)).set("k_repaired", map_to_json(&out.k_repaired));
            if cli.trace {
                let trace: Vec<Value> = out
                    .trace
                    .iter()
                    .map(|s| {
                        json!({
                            "stage": s.stage,
                            "state": state_json(&s.state),
                            "mu_h": map_to_json(&s.mu_h),
                            "mu_k": map_to_json(&s.mu_k),
                        })
                    })
                    .collect();
                r.set("trace", json!(trace));
            }
        }
        Command::ClassifyHomotopy => {
            if let Some((alg, s, t, f)) = map_parts(&doc) {
                let out = classify_homotopy_map_lifts(alg, s, t, f, cli.cap as u128)?;
                r.verdict = if out.report.lifts() { Verdict::Classified } else { Verdict::Obstructed };
                r.set("result", lift_json(&out.report)).set("guard", guard_json(&out.guard));
            } else {
                let p = differential(&doc)?;
                let rep = classify_homotopy_lifts(&p.alg, &p.mid)?;
                r.verdict = if rep.lifts() { Verdict::Classified } else { Verdict::Obstructed };
                r.set("result", lift_json(&rep));
            }
        }
        Command::Tangent => {
            let ctx = def_context(&doc)?;
            r.verdict = Verdict::Verified;
            r.set("tangent_dim", json!(ctx.tangent_dim()?)).set("p", json!(ctx.p));
        }
        Command::FunctorEval => {
            let ctx = def_context(&doc)?;
            let ring = parse_ring(ctx.p, &cli.ring)?;
            let tag = FunctorTag::parse(&cli.functor)?;
            let v = functor_eval(&ctx, tag, &ring, cli.cross_check)?;
            r.verdict = if v.cross_checked == Some(false) { Verdict::Failed } else { Verdict::Verified };
            r.set("functor", json!(v.tag.as_str()))
                .set("ring", json!(v.ring))
                .set("count", json!(v.elements.len()))
                .set("class_sizes", json!(v.class_sizes))
                .set("cross_checked", json!(v.cross_checked));
            if cli.trace {
                r.set("elements", json!(v.elements.iter().map(map_to_json).collect::<Vec<_>>()));
            }
        }
        Command::Schlessinger => {
            let ctx = def_context(&doc)?;
            match schlessinger_check(&ctx, &default_triples(ctx.p)?) {
                Ok(rep) => {
                    r.verdict = Verdict::Verified;
                    let triples: Vec<Value> = rep
                        .triples
                        .iter()
                        .map(|t| {
                            json!({
                                "name": t.name,
                                "small": t.small,
                                "strict_counts": t.strict_counts,
                                "class_counts": t.class_counts,
                                "strict_bijective": t.strict_bijective,
                                "classes_surjective": t.classes_surjective,
                                "tangent_bijective": t.tangent_bijective,
                                "smooth_premises": t.smooth_premises,
                                "smooth_ok": t.smooth_ok,
                            })
                        })
                        .collect();
                    r.set("tangent_dim", json!(rep.tangent_dim)).set("triples", json!(triples));
                }
                Err(Error::CheckFailed(why)) => {
                    r.verdict = Verdict::Failed;
                    r.set("reason", json!(why));
                }
                Err(e) => return Err(e),
            }
        }
        Command::ExtendOrder => {
            let (alg, c) = match &doc {
                Document::Complex { alg, complex } => (alg, complex),
                Document::Problem { alg, problem: ProblemPayload::Differential { complex } } => (alg, complex),
                other => return Err(Error::SchemaMismatch { expected: "complex".into(), found: other.schema().into() }),
            };
            let n = match alg.tower.kind {
                TowerKind::TruncPoly { a, b } if a == b + 1 => b,
                _ => return Err(Error::Validation("extend-order needs a tower F_p[t]/t^(n+1) -> F_p[t]/t^n".into())),
            };
            expect_level(c, Level::Mid)?;
            let ctx = def_context(&doc)?;
            match cli.to {
                None => {
                    let rep = extend_order(&ctx, c, n)?;
                    r.verdict = lift_verdict(&rep);
                    r.set("order", json!(n + 1)).set("result", lift_json(&rep));
                }
                Some(to) => {
                    if to <= n {
                        return Err(Error::Validation(format!("target order {to} is not above {n}")));
                    }
                    let steps = extend_orders(&ctx, c, n, to)?;
                    let reached = n + steps.iter().filter(|s| s.report.lifts()).count() as u32;
                    r.verdict = if reached == to { Verdict::Lifts } else { Verdict::Obstructed };
                    let last = steps.last().expect("at least one step");
                    r.set("order", json!(reached))
                        .set("steps", json!(steps.iter().map(|s| lift_json(&s.report)).collect::<Vec<_>>()));
                    if let Some(w) = &last.report.witness {
                        r.set("differential", map_to_json(w));
                    }
                }
            }
        }
        Command::Oracle => {
            let p = lift_problem(&doc)?;
            let res = oracle_enumerate(&p, cli.cap as u128)?;
            let rep = classify_or_lift(&p)?;
            let expected = rep.torsor.as_ref().map(|t| t.count).unwrap_or(0);
            let agrees = rep.lifts() == !res.witnesses.is_empty() && res.partition.len() as u128 == expected;
            r.verdict = if agrees { Verdict::Verified } else { Verdict::Failed };
            r.set("kind", json!(res.kind))
                .set("space", json!(res.space.to_string()))
                .set("lifts", json!(res.witnesses.len()))
                .set("classes", json!(res.partition.len()))
                .set("expected_classes", json!(expected.to_string()))
                .set("agrees", json!(agrees));
            if cli.trace {
                r.set("witness_indices", json!(res.witness_indices)).set("partition", json!(res.partition));
            }
        }
        Command::Gen => unreachable!("handled above"),
    }
    if cli.trace {
        if let Some(alg) = doc.algebra() {
            r.set("algebra_rank", json!(alg.rank()));
        }
        if let Document::Complex { complex, .. } = &doc {
            r.set("complex", complex_to_json(complex));
        }
    }
    Ok(Output::Report(r))
}
