//! Command-line front end for the `permprime` library.
//!
//! Every command prints one flat report to standard output. The exit code is
//! 0 for `pass`, 1 for `fail`, 2 for usage, parse and input errors and 3 when
//! a computation would exceed a resource cap.

mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use permprime::algebra::{
    find_maltsev_term, free_algebra_on_two, is_compatible, is_congruence_permutable,
    maltsev_digraph, Compatibility,
};
use permprime::chain::{construct_g1, construct_g2, find_obstruction, verify_chain};
use permprime::digraph::{
    classify, complement, components, exponential_with, product_with, universal_vertices,
};
use permprime::iso::{are_isomorphic, is_isomorphism};
use permprime::power::{verify_claim1, verify_power_swap, PowerContext};
use permprime::text::{parse_algebra, parse_digraph, serialize_digraph};
use permprime::{Config, Digraph, Error, Exec, FiniteAlgebra};

pub use report::{Field, Format, Report, Verdict};

/// Environment variable overriding the materialization cap.
pub const CAP_ENV: &str = "PERMPRIME_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "permprime",
    version,
    about = "Digraph powers, Maltsev terms and congruence permutability checks"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Digraph operations.
    #[command(subcommand)]
    Dg(DgCommand),
    /// Finite algebra operations.
    #[command(subcommand)]
    Alg(AlgCommand),
    /// Power-analysis verification.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// The G0 -> G1 -> G2 -> G3 construction chain.
    #[command(subcommand)]
    Chain(ChainCommand),
}

#[derive(Debug, Subcommand)]
pub enum DgCommand {
    /// Reflexivity, symmetry, transitivity and completeness.
    Classify { digraph: PathBuf },
    /// Complement digraph.
    Complement { digraph: PathBuf },
    /// Categorical product of one or more digraphs.
    Product {
        #[arg(required = true)]
        digraphs: Vec<PathBuf>,
    },
    /// Exponential digraph G^H.
    Exp { base: PathBuf, exponent: PathBuf },
    /// Weakly connected components.
    Components { digraph: PathBuf },
    /// Universal vertices.
    Universal { digraph: PathBuf },
    /// Isomorphism test with a witness bijection.
    Iso { first: PathBuf, second: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum AlgCommand {
    /// Whether every operation preserves the digraph's edge relation.
    Compat { algebra: PathBuf, digraph: PathBuf },
    /// The free algebra on two generators.
    Free2 { algebra: PathBuf },
    /// Search the ternary term operations for a Maltsev term.
    Maltsev { algebra: PathBuf },
    /// Congruence permutability by both decision procedures.
    Cp { algebra: PathBuf },
    /// The digraph on the free algebra generated by (x,x), (x,y), (y,y).
    Digraph { algebra: PathBuf },
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[arg(long)]
    pub g1: PathBuf,
    #[arg(long)]
    pub g2: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Universal vertex of G1 (lowest universal vertex when omitted).
    #[arg(long)]
    pub u1: Option<usize>,
    /// Universal vertex of G2 (lowest universal vertex when omitted).
    #[arg(long)]
    pub u2: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Compare power edges with the trace-set non-edge rule.
    Claim1(ContextArgs),
    /// Check that transposition is an isomorphism of the trace quotients.
    Swap(ContextArgs),
}

#[derive(Debug, Subcommand)]
pub enum ChainCommand {
    /// Build G1 from a reflexive G0.
    G1 { g0: PathBuf },
    /// Build G2 over a non-complete component of G1.
    G2 {
        g0: PathBuf,
        /// Component index of G1 (first non-complete component by default).
        #[arg(long)]
        component: Option<usize>,
    },
    /// Run and verify the whole chain.
    Verify {
        g0: PathBuf,
        #[arg(long)]
        x: PathBuf,
        /// Size of the complete and equality factors in the product check.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Lexicographically first obstruction triple of a digraph.
    Obstruction { digraph: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(..) => 2,
            Failure::Lib(Error::Resource { .. }) => 3,
            Failure::Lib(Error::Consistency(_)) => 1,
            Failure::Lib(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Io(..) => "io",
            Failure::Lib(Error::Input(_)) => "input",
            Failure::Lib(Error::Precondition(_)) => "precondition",
            Failure::Lib(Error::Resource { .. }) => "resource",
            Failure::Lib(Error::Parse { .. }) => "parse",
            Failure::Lib(Error::Consistency(_)) => "consistency",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<Report, Failure>;

/// Exit code for a finished report.
pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Error => 2,
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match config_from_env(cli.threads) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("permprime: {msg}");
            return 2;
        }
    };
    let echo: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();

    let start = Instant::now();
    let outcome = with_threads(cli.threads, || execute(&cli.command, &cfg));
    let (mut report, code) = match outcome {
        Ok(r) => {
            let code = exit_code(r.verdict);
            (r, code)
        }
        Err(f) => {
            eprintln!("permprime: {}", f.message());
            let r = Report::new(Verdict::Error)
                .field("error_kind", f.kind())
                .field("error", f.message());
            (r, f.exit_code())
        }
    };
    report.command = echo.join(" ");
    report.elapsed_ms = start.elapsed().as_millis();
    print!("{}", report.render(cli.format));
    code
}

fn config_from_env(threads: Option<usize>) -> std::result::Result<Config, String> {
    let mut cfg = Config::default();
    if let Ok(v) = std::env::var(CAP_ENV) {
        cfg.materialization_cap = match v.trim().parse::<usize>() {
            Ok(c) if c > 0 => c,
            _ => return Err(format!("{CAP_ENV} must be a positive integer, got `{v}`")),
        };
    }
    match threads {
        Some(0) => return Err("--threads must be positive".into()),
        Some(1) => cfg.exec = Exec::Sequential,
        _ => {}
    }
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                eprintln!("permprime: could not start {n} threads ({e}); using the global pool");
                f()
            }
        },
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    if threads.is_some_and(|n| n > 1) {
        eprintln!("permprime: built without parallel support; running sequentially");
    }
    f()
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_digraph(path: &Path) -> std::result::Result<Digraph, Failure> {
    Ok(parse_digraph(&read(path)?)?)
}

fn load_algebra(path: &Path) -> std::result::Result<FiniteAlgebra, Failure> {
    Ok(parse_algebra(&read(path)?)?)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn mapping_text(m: &[usize]) -> String {
    join(m.iter().enumerate().map(|(i, j)| format!("{i}->{j}")), " ")
}

fn digraph_report(d: &Digraph) -> Report {
    Report::new(Verdict::Pass)
        .field("vertices", d.len())
        .field("edges", d.edge_count())
        .payload(serialize_digraph(d))
}

fn execute(command: &Command, cfg: &Config) -> Outcome {
    match command {
        Command::Dg(c) => dg(c, cfg),
        Command::Alg(c) => alg(c, cfg),
        Command::Verify(c) => verify(c, cfg),
        Command::Chain(c) => chain(c, cfg),
    }
}

fn dg(command: &DgCommand, cfg: &Config) -> Outcome {
    Ok(match command {
        DgCommand::Classify { digraph } => {
            let d = load_digraph(digraph)?;
            let f = classify(&d);
            Report::new(Verdict::Pass)
                .field("vertices", d.len())
                .field("edges", d.edge_count())
                .field("reflexive", f.reflexive)
                .field("symmetric", f.symmetric)
                .field("transitive", f.transitive)
                .field("complete", f.complete)
                .field("universal_vertices", universal_vertices(&d).len())
                .field("components", components(&d).len())
        }
        DgCommand::Complement { digraph } => digraph_report(&complement(&load_digraph(digraph)?)),
        DgCommand::Product { digraphs } => {
            let ds = digraphs
                .iter()
                .map(|p| load_digraph(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let refs: Vec<&Digraph> = ds.iter().collect();
            digraph_report(&product_with(&refs, cfg)?).field("factors", ds.len())
        }
        DgCommand::Exp { base, exponent } => {
            let (g, h) = (load_digraph(base)?, load_digraph(exponent)?);
            digraph_report(&exponential_with(&g, &h, cfg)?)
        }
        DgCommand::Components { digraph } => {
            let d = load_digraph(digraph)?;
            let parts = components(&d);
            Report::new(Verdict::Pass)
                .field("vertices", d.len())
                .field("components", parts.len())
                .field(
                    "blocks",
                    join(parts.blocks.iter().map(|b| format!("[{}]", join(b, ","))), " "),
                )
        }
        DgCommand::Universal { digraph } => {
            let d = load_digraph(digraph)?;
            let us = universal_vertices(&d);
            Report::new(Verdict::Pass)
                .field("vertices", d.len())
                .field("universal_count", us.len())
                .field("universal", join(&us, " "))
        }
        DgCommand::Iso { first, second } => {
            let (a, b) = (load_digraph(first)?, load_digraph(second)?);
            let w = are_isomorphic(&a, &b);
            let mut r = Report::pass_if(w.is_some())
                .field("vertices", a.len())
                .field("isomorphic", w.is_some());
            if let Some(w) = w {
                r.push("mapping_verified", is_isomorphism(&a, &b, &w.mapping));
                r.push("mapping", mapping_text(&w.mapping));
            }
            r
        }
    })
}

fn alg(command: &AlgCommand, cfg: &Config) -> Outcome {
    Ok(match command {
        AlgCommand::Compat { algebra, digraph } => {
            let (a, d) = (load_algebra(algebra)?, load_digraph(digraph)?);
            match is_compatible(&a, &d, cfg)? {
                Compatibility::Compatible => Report::new(Verdict::Pass).field("compatible", true),
                Compatibility::Violated(v) => Report::new(Verdict::Fail)
                    .field("compatible", false)
                    .field("violation_op", v.op.as_str())
                    .field(
                        "violation_edges",
                        join(v.edges.iter().map(|(x, y)| format!("({x},{y})")), " "),
                    )
                    .field("violation_image", format!("({},{})", v.image.0, v.image.1)),
            }
        }
        AlgCommand::Free2 { algebra } => {
            let a = load_algebra(algebra)?;
            let free = free_algebra_on_two(&a, cfg)?;
            let listing: String = (0..free.len())
                .map(|i| {
                    let e = &free.elements[i];
                    format!("{i} [{}] {}\n", join(&e.coords, ","), free.term(&a, i))
                })
                .collect();
            Report::new(Verdict::Pass)
                .field("algebra_size", a.size())
                .field("free_size", free.len())
                .field("x", free.x)
                .field("y", free.y)
                .payload(listing)
        }
        AlgCommand::Maltsev { algebra } => {
            let a = load_algebra(algebra)?;
            match find_maltsev_term(&a, cfg)? {
                Some(t) => Report::new(Verdict::Pass)
                    .field("maltsev_term", t.to_string())
                    .field("term_depth", t.depth()),
                None => Report::new(Verdict::Fail).field("maltsev_term", "none"),
            }
        }
        AlgCommand::Cp { algebra } => {
            let a = load_algebra(algebra)?;
            let v = is_congruence_permutable(&a, cfg)?;
            let mut r = Report::pass_if(v.permutable)
                .field("permutable", v.permutable)
                .field("free_size", v.free_size)
                .field("digraph_edges", v.digraph_edges);
            if let Some(t) = &v.maltsev_term {
                r.push("maltsev_term", t.to_string());
            }
            if let Some(d) = &v.obstruction_digraph {
                if let Some((p, q)) = d.edges().find(|&(p, q)| !d.has_edge(q, p)) {
                    r.push("asymmetric_edge", format!("{} -> {}", d.label(p), d.label(q)));
                }
            }
            r
        }
        AlgCommand::Digraph { algebra } => {
            let a = load_algebra(algebra)?;
            let m = maltsev_digraph(&a, cfg)?;
            let labels = join(
                (0..m.digraph.len()).map(|i| format!("{i}={}", m.digraph.label(i))),
                " ",
            );
            digraph_report(&m.digraph)
                .field("symmetric", classify(&m.digraph).symmetric)
                .field("labels", labels)
        }
    })
}

fn context(args: &ContextArgs) -> std::result::Result<PowerContext, Failure> {
    let (g1, g2) = (load_digraph(&args.g1)?, load_digraph(&args.g2)?);
    Ok(match (args.u1, args.u2) {
        (Some(u1), Some(u2)) => PowerContext::new(g1, u1, g2, u2, args.k)?,
        (u1, u2) => {
            let pick = |g: &Digraph, u: Option<usize>| {
                u.or_else(|| universal_vertices(g).first().copied())
            };
            match (pick(&g1, u1), pick(&g2, u2)) {
                (Some(u1), Some(u2)) => PowerContext::new(g1, u1, g2, u2, args.k)?,
                _ => PowerContext::with_auto_universal(g1, g2, args.k)?,
            }
        }
    })
}

fn verify(command: &VerifyCommand, cfg: &Config) -> Outcome {
    Ok(match command {
        VerifyCommand::Claim1(args) => {
            let ctx = context(args)?;
            let r = verify_claim1(&ctx, cfg)?;
            let mut rep = Report::pass_if(r.passed())
                .field("u1", ctx.u1())
                .field("u2", ctx.u2())
                .field("k", ctx.k())
                .field("power_vertices", r.power_vertices)
                .field("pairs_checked", r.pairs_checked)
                .field("disagreements", r.disagreements);
            if let Some((i, j)) = r.first_disagreement {
                rep.push("first_disagreement", format!("({i},{j})"));
            }
            rep
        }
        VerifyCommand::Swap(args) => {
            let ctx = context(args)?;
            let r = verify_power_swap(ctx.g1(), ctx.u1(), ctx.g2(), ctx.u2(), ctx.k(), cfg)?;
            Report::pass_if(r.passed())
                .field("u1", ctx.u1())
                .field("u2", ctx.u2())
                .field("k", ctx.k())
                .field("quotient_vertices", r.vertices1)
                .field("swapped_quotient_vertices", r.vertices2)
                .field("pairs_checked", r.pairs_checked)
                .field("isomorphic", r.isomorphic)
                .field("transpose_threshold", r.transpose_threshold)
                .field("expected_threshold", r.expected_threshold)
                .field(
                    "block_quotients_agree",
                    match r.block_quotients_agree {
                        Some(b) => Field::Bool(b),
                        None => Field::from("skipped"),
                    },
                )
                .field("mapping", mapping_text(&r.mapping))
        }
    })
}

fn chain(command: &ChainCommand, cfg: &Config) -> Outcome {
    Ok(match command {
        ChainCommand::G1 { g0 } => {
            let g1 = construct_g1(&load_digraph(g0)?)?;
            digraph_report(&g1.digraph)
                .field("components", components(&g1.digraph).len())
                .field("tuples", join(&g1.tuples, " "))
        }
        ChainCommand::G2 { g0, component } => {
            let g1 = construct_g1(&load_digraph(g0)?)?;
            let d1 = &g1.digraph;
            let parts = components(d1);
            let r = match component {
                Some(r) => *r,
                None => parts
                    .blocks
                    .iter()
                    .position(|b| {
                        permprime::digraph::induced(d1, b)
                            .map(|c| !classify(&c).complete)
                            .unwrap_or(false)
                    })
                    .ok_or_else(|| {
                        Failure::Lib(Error::Precondition(
                            "every component of G1 is complete".into(),
                        ))
                    })?,
            };
            let g2 = construct_g2(d1, r, cfg)?;
            digraph_report(&g2.digraph)
                .field("r_component", r)
                .field("r_size", g2.r.len())
                .field("components", components(&g2.digraph).len())
        }
        ChainCommand::Verify { g0, x, n } => {
            let (g0, x) = (load_digraph(g0)?, load_digraph(x)?);
            let r = verify_chain(&g0, &x, *n, cfg)?;
            let mut rep = Report::pass_if(r.passed())
                .field("g0_vertices", r.g0_vertices)
                .field("g1_vertices", r.g1_vertices)
                .field("g1_components", r.g1_components)
                .field("g1_noncomplete_components", r.g1_noncomplete_components)
                .field("r_component", r.r_component)
                .field("r_size", r.r_size)
                .field("g2_vertices", r.g2_vertices)
                .field("g2_components", r.g2_components)
                .field("g2_classes", r.g2_classes)
                .field("g2_class_types", r.g2_class_types)
                .field("g2_materialized", r.g2_materialized)
                .field("g3_route", r.g3_route)
                .field("g3_vertices", r.g3_vertices)
                .field("g3_components", r.g3_components)
                .field("product_n", r.product_n)
                .field("product_components", r.product_components);
            if let Some((v, u, w)) = &r.obstruction {
                rep.push("obstruction", format!("v={v} u={u} w={w}"));
            }
            for c in &r.checks {
                rep.push(format!("check.{}", c.name), if c.passed { "pass" } else { "fail" });
            }
            if let Some(c) = r.first_failure() {
                rep.push("first_failure", format!("{}: {}", c.name, c.detail));
            }
            rep
        }
        ChainCommand::Obstruction { digraph } => {
            let d = load_digraph(digraph)?;
            match find_obstruction(&d) {
                Some(w) => Report::new(Verdict::Pass)
                    .field("found", true)
                    .field("v", w.v)
                    .field("u", w.u)
                    .field("w", w.w),
                None => Report::new(Verdict::Fail).field("found", false),
            }
        }
    })
}
