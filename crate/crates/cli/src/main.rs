//! `polymul`: multiply, benchmark, tune and simulate cluster runs from the
//! command line.
//!
//! Reports go to stderr as `key=value` lines; polynomials go to `--out` or
//! stdout in the plain-text file format. Exit status is 1 for parse, I/O and
//! input mismatches and 2 when exponents do not fit in a 64-bit word.

mod examples;

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use polymul::cluster::{cluster_mul_local, ClusterError};
use polymul::io::{self, DegreeBounds, Expr, RawPoly};
use polymul::parmul::{count_terms, random_space, random_sparse, tune_l, TuneReport, TuneSpec};
use polymul::{
    naive_mul, Coeff, Error, MergerKind, MonomialOrder, MulConfig, PolySpace, Polynomial, VarTable,
};

#[derive(Parser)]
#[command(
    name = "polymul",
    version,
    about = "Sparse multivariate polynomial multiplication"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multiply two polynomials.
    Mul(MulArgs),
    /// Time the benchmark products.
    Bench(BenchArgs),
    /// Pick the grid density from random products.
    Tune(TuneArgs),
    /// Write a random sparse polynomial.
    Gen(GenArgs),
    /// Multiply on simulated message-passing nodes.
    Cluster(ClusterArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CoeffKind {
    Int,
    F64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MergerArg {
    Heap,
    Tree,
    /// Bench only: run both.
    Both,
}

impl MergerArg {
    fn kinds(self) -> Vec<MergerKind> {
        match self {
            MergerArg::Heap => vec![MergerKind::Heap],
            MergerArg::Tree => vec![MergerKind::Tree],
            MergerArg::Both => vec![MergerKind::Heap, MergerKind::Tree],
        }
    }
}

#[derive(Args, Clone)]
struct Engine {
    #[arg(long, value_enum, default_value = "heap")]
    merger: MergerArg,
    /// Grid density.
    #[arg(long, default_value_t = 64)]
    l: usize,
    /// Worker threads (default: all cores).
    #[arg(long, env = "POLYMUL_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "int")]
    coeff: CoeffKind,
}

impl Engine {
    fn threads(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }

    fn config(&self, merger: MergerKind) -> Result<MulConfig, Failure> {
        Ok(MulConfig::default()
            .with_threads(self.threads())
            .with_l(self.l)?
            .with_merger(merger))
    }

    fn single_merger(&self) -> Result<MergerKind, Failure> {
        match self.merger {
            MergerArg::Both => Err(Failure::usage("--merger both is only accepted by bench")),
            m => Ok(m.kinds()[0]),
        }
    }
}

#[derive(Args, Clone)]
struct Operands {
    /// First operand as a polynomial file.
    #[arg(long, conflicts_with_all = ["expr_a", "example"])]
    a: Option<PathBuf>,
    /// Second operand as a polynomial file.
    #[arg(long, conflicts_with_all = ["expr_b", "example"])]
    b: Option<PathBuf>,
    /// First operand as an expression.
    #[arg(long, conflicts_with = "example")]
    expr_a: Option<String>,
    /// Second operand as an expression.
    #[arg(long, conflicts_with = "example")]
    expr_b: Option<String>,
    /// Use a benchmark example (1, 2 or 3) as operands.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: Option<u8>,
    /// Power used by --example.
    #[arg(long)]
    scale: Option<u32>,
    /// Use the full-size power for --example.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct MulArgs {
    #[command(flatten)]
    operands: Operands,
    #[command(flatten)]
    engine: Engine,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    operands: Operands,
    #[command(flatten)]
    engine: Engine,
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Example to run; all three when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: Option<u8>,
    /// Power of the example operands.
    #[arg(long, default_value_t = examples::DEFAULT_POWER)]
    scale: u32,
    /// Full-size powers (memory-heavy).
    #[arg(long)]
    full: bool,
    /// Comma-separated thread counts to time.
    #[arg(long = "threads-list", value_delimiter = ',')]
    threads_list: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Count result terms without keeping the product.
    #[arg(long)]
    count_only: bool,
    /// Check against the schoolbook product when `na * nb` is at most this.
    #[arg(long, default_value_t = 1_000_000)]
    verify_limit: u64,
    #[command(flatten)]
    engine: Engine,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long, default_value_t = 20)]
    products: usize,
    #[arg(long, default_value_t = 1000)]
    min_terms: usize,
    #[arg(long, default_value_t = 5000)]
    max_terms: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    l_values: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    engine: Engine,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    vars: usize,
    #[arg(long)]
    terms: usize,
    /// Largest exponent of any variable.
    #[arg(long, default_value_t = 20)]
    max_deg: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "int")]
    coeff: CoeffKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error message plus exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Display) -> Failure {
        Failure {
            code: 1,
            msg: msg.to_string(),
        }
    }

    fn overflow(msg: impl Display) -> Failure {
        Failure {
            code: 2,
            msg: msg.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if e.is_overflow() { 2 } else { 1 };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<ClusterError> for Failure {
    fn from(e: ClusterError) -> Failure {
        match e {
            ClusterError::Core(e) => e.into(),
            other => Failure::usage(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::usage(e)
    }
}

macro_rules! by_coeff {
    ($kind:expr, $f:ident, $args:expr) => {
        match $kind {
            CoeffKind::Int => $f::<BigInt>($args),
            CoeffKind::F64 => $f::<f64>($args),
        }
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Mul(a) => by_coeff!(a.engine.coeff, cmd_mul, &a),
        Cmd::Cluster(a) => by_coeff!(a.engine.coeff, cmd_cluster, &a),
        Cmd::Bench(a) => by_coeff!(a.engine.coeff, cmd_bench, &a),
        Cmd::Tune(a) => by_coeff!(a.engine.coeff, cmd_tune, &a),
        Cmd::Gen(a) => by_coeff!(a.coeff, cmd_gen, &a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn report(key: &str, value: impl Display) {
    eprintln!("{key}={value}");
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

/// One operand before the shared space is known.
enum Source<C> {
    File(RawPoly<C>),
    Expr(String),
}

impl<C: Coeff> Source<C> {
    fn load(
        path: &Option<PathBuf>,
        expr: &Option<String>,
        which: &str,
    ) -> Result<Source<C>, Failure> {
        match (path, expr) {
            (Some(p), None) => {
                Ok(Source::File(io::read_raw(p).map_err(|e| {
                    Failure::usage(format!("{}: {e}", p.display()))
                })?))
            }
            (None, Some(e)) => Ok(Source::Expr(e.clone())),
            _ => Err(Failure::usage(format!(
                "operand {which}: give exactly one of --{which} or --expr-{which}"
            ))),
        }
    }
}

/// Operands in a common space sized for their product.
fn load_operands<C: Coeff>(
    ops: &Operands,
    cfg: &MulConfig,
) -> Result<(Polynomial<C>, Polynomial<C>), Failure> {
    if let Some(id) = ops.example {
        let ex = examples::Example::get(id);
        let p = examples::power(id, ops.scale, ops.full);
        return build_from_exprs(&ex.vars(), &ex.f(p), &ex.g(p), cfg);
    }
    let a = Source::<C>::load(&ops.a, &ops.expr_a, "a")?;
    let b = Source::<C>::load(&ops.b, &ops.expr_b, "b")?;

    let file_vars: Vec<&VarTable> = [&a, &b]
        .into_iter()
        .filter_map(|s| match s {
            Source::File(raw) => Some(&raw.vars),
            Source::Expr(_) => None,
        })
        .collect();
    let vars = match file_vars.as_slice() {
        [x, y] if x != y => {
            return Err(Failure::usage(format!(
                "operands use different variables: [{}] vs [{}]",
                x.names().join(", "),
                y.names().join(", ")
            )))
        }
        [x, ..] => (*x).clone(),
        [] => {
            let mut names = Vec::new();
            for s in [&a, &b] {
                if let Source::Expr(text) = s {
                    for n in io::variables_in(text)? {
                        if !names.contains(&n) {
                            names.push(n);
                        }
                    }
                }
            }
            if names.is_empty() {
                names.push("x".to_string());
            }
            VarTable::new(names)?
        }
    };

    let mut parsed = Vec::new();
    let mut bounds = Vec::new();
    for s in [a, b] {
        match s {
            Source::File(raw) => {
                bounds.push(raw.degree_bounds());
                parsed.push(Source::File(raw));
            }
            Source::Expr(text) => {
                let e = io::parse_expr(&text, &vars)?;
                bounds.push(e.degree_bounds(vars.len()));
                parsed.push(Source::Expr(text));
            }
        }
    }
    let space = product_space(vars, &bounds[0].plus(&bounds[1]))?;
    let mut out = parsed
        .into_iter()
        .map(|s| -> Result<Polynomial<C>, Failure> {
            match s {
                Source::File(raw) => Ok(raw.into_polynomial(&space)?),
                Source::Expr(text) => Ok(io::eval_with(
                    &io::parse_expr(&text, space.vars())?,
                    &space,
                    cfg,
                )?),
            }
        });
    let a = out.next().unwrap()?;
    let b = out.next().unwrap()?;
    Ok((a, b))
}

fn product_space(vars: VarTable, bounds: &DegreeBounds) -> Result<Arc<PolySpace>, Failure> {
    let layout = bounds
        .layout(MonomialOrder::Grlex)
        .map_err(|e| Failure::overflow(format!("product exponents do not fit in 64 bits: {e}")))?;
    Ok(PolySpace::new(vars, layout)?)
}

fn build_from_exprs<C: Coeff>(
    names: &[&str],
    f: &str,
    g: &str,
    cfg: &MulConfig,
) -> Result<(Polynomial<C>, Polynomial<C>), Failure> {
    let vars = VarTable::new(names.iter().copied())?;
    let ef: Expr = io::parse_expr(f, &vars)?;
    let eg: Expr = io::parse_expr(g, &vars)?;
    let bounds = ef
        .degree_bounds(vars.len())
        .plus(&eg.degree_bounds(vars.len()));
    let space = product_space(vars, &bounds)?;
    Ok((
        io::eval_with(&ef, &space, cfg)?,
        io::eval_with(&eg, &space, cfg)?,
    ))
}

fn emit<C: Coeff>(p: &Polynomial<C>, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, p),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(io::format_poly(p).as_bytes())?;
            Ok(())
        }
    }
}

fn write_file<C: Coeff>(path: &Path, p: &Polynomial<C>) -> Result<(), Failure> {
    io::write_poly(path, p).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_mul<C: Coeff>(args: &MulArgs) -> Result<(), Failure> {
    let cfg = args.engine.config(args.engine.single_merger()?)?;
    let (a, b) = load_operands::<C>(&args.operands, &cfg)?;
    let t0 = Instant::now();
    let p = polymul::mul(&a, &b, &cfg)?;
    let elapsed = t0.elapsed();
    report("a_terms", a.len());
    report("b_terms", b.len());
    report("result_terms", p.len());
    report("threads", cfg.threads);
    report("time_ms", ms(elapsed));
    emit(&p, &args.out)
}

fn cmd_cluster<C: Coeff>(args: &ClusterArgs) -> Result<(), Failure> {
    if args.nodes == 0 {
        return Err(Failure::usage("--nodes must be at least 1"));
    }
    let cfg = args.engine.config(args.engine.single_merger()?)?;
    let (a, b) = load_operands::<C>(&args.operands, &cfg)?;
    let t0 = Instant::now();
    let run = cluster_mul_local(&a, &b, &cfg, args.nodes)?;
    let elapsed = t0.elapsed();
    report("a_terms", a.len());
    report("b_terms", b.len());
    report("result_terms", run.product.len());
    report("time_ms", ms(elapsed));
    report("nodes", args.nodes);
    report("intervals", run.plan.op_counts.len());
    let loads = run.plan.loads();
    for (r, (load, range)) in loads.iter().zip(&run.plan.ranges).enumerate() {
        report(&format!("node_{r}_ops"), load);
        report(
            &format!("node_{r}_range"),
            format!("{}..{}", range.start, range.end),
        );
    }
    let (total, max_op, n) = (run.plan.total_ops(), run.plan.max_op(), args.nodes as u64);
    report("total_ops", total);
    report("max_op", max_op);
    report(
        "load_bound_ok",
        loads.iter().all(|&l| l * n <= total + max_op * n),
    );
    report("msgs", run.stats.messages);
    report("bytes", run.stats.bytes);
    emit(&run.product, &args.out)
}

fn cmd_bench<C: Coeff>(args: &BenchArgs) -> Result<(), Failure> {
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let ids: Vec<u8> = args.example.map_or(vec![1, 2, 3], |id| vec![id]);
    let threads = if args.threads_list.is_empty() {
        vec![args.engine.threads()]
    } else {
        args.threads_list.clone()
    };
    let build_cfg = args.engine.config(MergerKind::Heap)?;
    for id in ids {
        let ex = examples::Example::get(id);
        let p = examples::power(id, Some(args.scale), args.full);
        let t0 = Instant::now();
        let (a, b) = build_from_exprs::<C>(&ex.vars(), &ex.f(p), &ex.g(p), &build_cfg)?;
        eprintln!("# example {id}: f = {}, g = {}", ex.f(p), ex.g(p));
        eprintln!(
            "example={id} p={p} a_terms={} b_terms={} build_ms={}",
            a.len(),
            b.len(),
            ms(t0.elapsed())
        );
        if args.count_only {
            bench_counts(args, id, p, &a, &b, &threads)?;
        } else {
            bench_products(args, id, p, &a, &b, &threads)?;
        }
    }
    Ok(())
}

fn bench_line(id: u8, p: u32, merger: MergerKind, c: usize, l: usize, terms: u64, best: Duration) {
    eprintln!(
        "example={id} p={p} merger={} threads={c} l={l} result_terms={terms} time_ms={}",
        merger.name(),
        ms(best)
    );
}

fn bench_products<C: Coeff>(
    args: &BenchArgs,
    id: u8,
    p: u32,
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    threads: &[usize],
) -> Result<(), Failure> {
    let mut reference: Option<Polynomial<C>> = None;
    for merger in args.engine.merger.kinds() {
        for &c in threads {
            let cfg = args.engine.config(merger)?.with_threads(c);
            let mut best = Duration::MAX;
            let mut product = None;
            for _ in 0..args.reps {
                let t0 = Instant::now();
                let r = polymul::mul(a, b, &cfg)?;
                best = best.min(t0.elapsed());
                product = Some(r);
            }
            let product = product.unwrap();
            bench_line(id, p, merger, c, args.engine.l, product.len() as u64, best);
            match &reference {
                Some(r) if *r != product => {
                    return Err(Failure::usage(format!(
                        "example {id}: merger {} with {c} threads disagrees with the first run",
                        merger.name()
                    )))
                }
                Some(_) => {}
                None => reference = Some(product),
            }
        }
    }
    let products = a.len() as u64 * b.len() as u64;
    if products <= args.verify_limit {
        let ok = naive_mul(a, b)? == reference.unwrap();
        report("verified", if ok { "naive" } else { "MISMATCH" });
        if !ok {
            return Err(Failure::usage(format!(
                "example {id}: product differs from the schoolbook product"
            )));
        }
    } else {
        report("verified", "skipped");
    }
    Ok(())
}

/// Like [`bench_products`] but only counts result terms, interval by
/// interval, so the product never has to fit in memory.
fn bench_counts<C: Coeff>(
    args: &BenchArgs,
    id: u8,
    p: u32,
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    threads: &[usize],
) -> Result<(), Failure> {
    let mut reference = None;
    for merger in args.engine.merger.kinds() {
        for &c in threads {
            let cfg = args.engine.config(merger)?.with_threads(c);
            let mut best = Duration::MAX;
            let mut terms = 0;
            for _ in 0..args.reps {
                let t0 = Instant::now();
                terms = count_terms(a, b, &cfg)?;
                best = best.min(t0.elapsed());
            }
            bench_line(id, p, merger, c, args.engine.l, terms, best);
            if *reference.get_or_insert(terms) != terms {
                return Err(Failure::usage(format!(
                    "example {id}: merger {} with {c} threads disagrees with the first run",
                    merger.name()
                )));
            }
        }
    }
    report("verified", "skipped");
    Ok(())
}

fn cmd_tune<C: Coeff>(args: &TuneArgs) -> Result<(), Failure> {
    if args.min_terms == 0 || args.min_terms > args.max_terms {
        return Err(Failure::usage("need 1 <= --min-terms <= --max-terms"));
    }
    let spec = TuneSpec {
        seed: args.seed,
        products: args.products,
        terms: args.min_terms..=args.max_terms,
        l_values: args.l_values.clone(),
        base: args.engine.config(args.engine.single_merger()?)?,
        ..TuneSpec::default()
    };
    let tuned = tune_l::<C>(&spec)?;
    eprintln!(
        "# products within {:.0}% of their best time, per l",
        TuneReport::TOLERANCE * 100.0
    );
    for (l, count) in &tuned.histogram {
        let bar = "#".repeat(*count);
        println!("l={l} count={count} {bar}");
    }
    report("products", tuned.products);
    report("recommended_l", tuned.recommended);
    Ok(())
}

fn cmd_gen<C: Coeff>(args: &GenArgs) -> Result<(), Failure> {
    let space = random_space(args.vars, args.max_deg, MonomialOrder::Grlex)?;
    let p: Polynomial<C> = random_sparse(args.seed, &space, args.terms, args.max_deg)?;
    report("terms", p.len());
    emit(&p, &args.out)
}
