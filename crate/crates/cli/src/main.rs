use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::json;

use sigma5::characters::dimension_table;
use sigma5::f6::{bezout_report, construct_f6, lift_and_evaluate, random_projections, verify_f6_with, Grouping};
use sigma5::invariant::{parse_invariant_json, PointFunction};
use sigma5::polynomial::SparsePolynomial;
use sigma5::rng::{stream, task_rng};
use sigma5::scalar::{format_rational, PrimeField};
use sigma5::search::{
    build_basis, kernel_on_variety, monomial_interpolation, quotient_by_products, ModulusPolicy, QuotientStatus,
    SearchConfig, Symmetry, POINT_MARGIN,
};
use sigma5::tensor::{sample_generic, sample_rank1, sample_secant, DenseTensor, GENERIC_HEIGHT, SECANT_HEIGHT};

const THREADS_ENV: &str = "SIGMA5_THREADS";
const MAX_DIMS_DEGREE: usize = 32;
/// Degrees from here on are long runs that must be requested explicitly.
const EXTENDED_DEGREE: usize = 14;

#[derive(Parser)]
#[command(name = "sigma5", version, about = "Equations of the fifth secant variety of the Segre product of five projective lines")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; the SIGMA5_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for per-entry checkpoints and result files.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of the invariant spaces and their Σ5 isotypic parts.
    Dims {
        #[arg(long, default_value_t = 16)]
        max_degree: usize,
        /// Include odd degrees.
        #[arg(long)]
        odd: bool,
    },
    /// Sample a tensor as JSON.
    Sample(SampleArgs),
    /// Evaluate an invariant or polynomial file at a tensor file.
    Eval {
        #[arg(long)]
        invariant: PathBuf,
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Interpolate equations of the secant variety in one degree.
    Search(SearchArgs),
    /// Check the explicit degree-6 equation.
    VerifyF6 {
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Write the polynomial as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Evaluate the degree-6 equation lifted to more factors.
    Lift(LiftArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Secant rank; omit for a generic tensor.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 5)]
    factors: usize,
    #[arg(long)]
    height: Option<i64>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    degree: usize,
    #[arg(long, default_value = "sym")]
    symmetry: String,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    /// Secant points; defaults to the basis size plus a margin.
    #[arg(long)]
    points: Option<usize>,
    /// auto, exact, or a comma-separated prime list.
    #[arg(long, default_value = "auto")]
    modulus: String,
    #[arg(long, value_enum, default_value_t = Method::Tableau)]
    method: Method,
    /// Torus weight for the monomial method.
    #[arg(long, default_value = "0,0,0,0,0")]
    weight: String,
    /// Allow degrees of 14 and above.
    #[arg(long)]
    extended: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Tableau,
    Monomial,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long, default_value_t = 6)]
    factors: usize,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Blocks such as "0,1|2|3|4|5"; defaults to the first factors grouped together.
    #[arg(long)]
    grouping: Option<String>,
    /// Bound on projection entries.
    #[arg(long, default_value_t = SECANT_HEIGHT)]
    height: i64,
}

/// Echo of everything that determines an output.
#[derive(Default, Serialize)]
struct RunConfig {
    command: &'static str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checkpoint: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<serde_json::Value>,
}

enum Failure {
    Input(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn check<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Check(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Dims { max_degree, odd } => dims(&cli, *max_degree, *odd),
        Command::Sample(args) => sample(&cli, args),
        Command::Eval {
            invariant,
            tensor,
            modulus,
        } => eval(&cli, invariant, tensor, *modulus),
        Command::Search(args) => search(&cli, args),
        Command::VerifyF6 { points, emit } => verify(&cli, *points, emit.as_deref()),
        Command::Lift(args) => lift(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run_config(cli: &Cli, command: &'static str) -> RunConfig {
    RunConfig {
        command,
        seed: cli.seed,
        checkpoint: cli.checkpoint.clone(),
        ..Default::default()
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn write_artifact(cli: &Cli, name: &str, value: &serde_json::Value) -> Outcome {
    if let Some(dir) = &cli.checkpoint {
        fs::create_dir_all(dir).map_err(input)?;
        let path = dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(value).expect("serializable") + "\n").map_err(input)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn dims(cli: &Cli, max_degree: usize, odd: bool) -> Outcome {
    if max_degree > MAX_DIMS_DEGREE {
        return Err(Failure::Input(format!("--max-degree is limited to {MAX_DIMS_DEGREE}")));
    }
    let rows = dimension_table(max_degree, odd || max_degree % 2 == 1);
    match cli.format {
        Format::Json => {
            let mut config = run_config(cli, "dims");
            config.degree = Some(max_degree);
            print_json(&json!({ "provenance": config, "table": rows }));
        }
        Format::Text => {
            let w = |f: fn(&sigma5::characters::DimensionRow) -> String, head: &str| {
                rows.iter().map(|r| f(r).len()).chain([head.len()]).max().unwrap_or(0)
            };
            let wd = w(|r| r.d.to_string(), "d");
            let wu = w(|r| r.u.to_string(), "U");
            let ws = w(|r| r.sym.to_string(), "sym");
            let wg = w(|r| r.sgn.to_string(), "sgn");
            println!("{:>wd$}  {:>wu$}  {:>ws$}  {:>wg$}", "d", "U", "sym", "sgn");
            for r in &rows {
                println!("{:>wd$}  {:>wu$}  {:>ws$}  {:>wg$}", r.d, r.u, r.sym, r.sgn);
            }
        }
    }
    Ok(())
}

fn sample(cli: &Cli, args: &SampleArgs) -> Outcome {
    if args.factors == 0 || args.factors > 16 {
        return Err(Failure::Input("--factors must be between 1 and 16".into()));
    }
    let mut rng = task_rng(cli.seed, stream::SAMPLE);
    let (tensor, height, kind) = match args.rank {
        None => {
            let h = args.height.unwrap_or(GENERIC_HEIGHT);
            (sample_generic(args.factors, h, &mut rng), h, "generic".to_string())
        }
        Some(0) => return Err(Failure::Input("--rank must be positive".into())),
        Some(1) => {
            let h = args.height.unwrap_or(SECANT_HEIGHT);
            (sample_rank1(args.factors, h, &mut rng), h, "rank 1".to_string())
        }
        Some(r) => {
            let h = args.height.unwrap_or(SECANT_HEIGHT);
            (sample_secant(r, args.factors, h, &mut rng), h, format!("secant rank {r}"))
        }
    };
    if height <= 0 {
        return Err(Failure::Input("--height must be positive".into()));
    }
    let mut config = run_config(cli, "sample");
    config.rank = args.rank;
    config.height = Some(height);
    config.extra = Some(json!({ "factors": args.factors, "kind": kind }));
    let mut value = serde_json::to_value(&tensor).expect("serializable");
    value["provenance"] = serde_json::to_value(&config).expect("serializable");
    print_json(&value);
    Ok(())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

enum Evaluable {
    Invariant(sigma5::invariant::InvariantSpec),
    Polynomial(SparsePolynomial),
}

fn parse_evaluable(path: &Path) -> Result<Evaluable, Failure> {
    let text = read_file(path)?;
    let located = |e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| located(&e))?;
    if value.get("terms").is_some_and(serde_json::Value::is_object) {
        serde_json::from_value(value).map(Evaluable::Polynomial).map_err(|e| located(&e))
    } else {
        parse_invariant_json(&text).map(Evaluable::Invariant).map_err(|e| located(&e))
    }
}

fn eval(cli: &Cli, invariant: &Path, tensor: &Path, modulus: Option<u64>) -> Outcome {
    let f = parse_evaluable(invariant)?;
    let text = read_file(tensor)?;
    let a: DenseTensor =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", tensor.display())))?;
    if let Some(p) = modulus {
        PrimeField::new(p).map_err(input)?;
    }
    let f: &dyn PointFunction = match &f {
        Evaluable::Invariant(spec) => spec,
        Evaluable::Polynomial(poly) => poly,
    };
    let value = match modulus {
        None => format_rational(&f.eval_exact(&a).map_err(input)?),
        Some(p) => f.eval_mod(&a, p).map_err(input)?.to_string(),
    };
    match cli.format {
        Format::Text => println!("{value}"),
        Format::Json => {
            let mut config = run_config(cli, "eval");
            config.modulus = modulus.map(|p| p.to_string());
            config.extra = Some(json!({ "invariant": invariant, "tensor": tensor }));
            print_json(&json!({ "provenance": config, "degree": f.degree(), "value": value }));
        }
    }
    Ok(())
}

fn parse_weight(s: &str) -> Result<[i32; 5], Failure> {
    let parts: Vec<i32> = s
        .split(',')
        .map(|t| t.trim().parse::<i32>().map_err(input))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| Failure::Input(format!("--weight needs five integers, got {s:?}")))
}

fn search(cli: &Cli, args: &SearchArgs) -> Outcome {
    let symmetry: Symmetry = args.symmetry.parse().map_err(input)?;
    let modulus: ModulusPolicy = args.modulus.parse().map_err(input)?;
    if args.degree >= EXTENDED_DEGREE && !args.extended {
        return Err(Failure::Input(format!(
            "degree {} is an extended run (hours); pass --extended to start it",
            args.degree
        )));
    }
    if args.rank == 0 {
        return Err(Failure::Input("--rank must be positive".into()));
    }
    let mut config = SearchConfig::new(cli.seed).with_modulus(modulus);
    if let Some(dir) = &cli.checkpoint {
        config = config.with_checkpoint(dir);
    }
    let mut run = run_config(cli, "search");
    run.degree = Some(args.degree);
    run.rank = Some(args.rank);
    run.points = args.points;
    run.modulus = Some(args.modulus.clone());
    run.extra = Some(json!({ "method": args.method, "extended": args.extended }));

    if args.method == Method::Monomial {
        let weight = parse_weight(&args.weight)?;
        run.height = Some(SECANT_HEIGHT);
        run.extra = Some(json!({ "method": args.method, "weight": weight }));
        let cert = monomial_interpolation(args.degree, weight, args.rank, &config).map_err(|e| match e {
            sigma5::Error::DegreeGuard { .. } => input(e),
            e => check(e),
        })?;
        let out = json!({ "provenance": run, "kernel": cert });
        write_artifact(cli, &format!("interpolation-d{}.json", args.degree), &out)?;
        match cli.format {
            Format::Json => print_json(&out),
            Format::Text => println!(
                "monomials: {}\nkernel: dim {} at {} rank-{} points",
                cert.basis_ids.len(),
                cert.kernel_dim,
                cert.num_points,
                args.rank
            ),
        }
        return Ok(());
    }

    if args.degree == 0 || args.degree % 2 == 1 {
        return Err(Failure::Input(format!("degree must be even and positive, got {}", args.degree)));
    }
    run.symmetry = Some(symmetry.to_string());
    run.height = Some(GENERIC_HEIGHT);
    let basis = build_basis(args.degree, symmetry, &config).map_err(check)?;
    write_artifact(cli, &format!("basis-d{}-{symmetry}.json", args.degree), &json!({ "provenance": run, "basis": basis }))?;
    let points = args.points.unwrap_or(basis.basis.len() + POINT_MARGIN);
    if points < basis.basis.len() {
        return Err(Failure::Input(format!("--points must be at least the basis size {}", basis.basis.len())));
    }
    let kernel = if basis.basis.is_empty() {
        None
    } else {
        Some(kernel_on_variety(&basis.basis, Some(symmetry), args.rank, points, &config).map_err(check)?)
    };
    let f6 = construct_f6();
    let quotient = match &kernel {
        Some(k) if args.degree > f6.degree() && args.rank == 5 => {
            Some(quotient_by_products(k, f6, Symmetry::Sgn, args.degree - f6.degree(), &config).map_err(check)?)
        }
        _ => None,
    };
    let out = json!({ "provenance": run, "basis": basis, "kernel": kernel, "quotient": quotient });
    write_artifact(cli, &format!("search-d{}-{symmetry}.json", args.degree), &out)?;
    match cli.format {
        Format::Json => print_json(&out),
        Format::Text => {
            println!(
                "basis: {} invariants ({} candidates, {} discarded)",
                basis.basis.len(),
                basis.candidates_tried,
                basis.discarded
            );
            match &kernel {
                Some(k) => {
                    let dims: Vec<String> = k.modular_dims.iter().map(|m| m.kernel_dim.to_string()).collect();
                    println!(
                        "kernel: dim {} at {} rank-{} points (modular: {})",
                        k.kernel_dim,
                        k.num_points,
                        args.rank,
                        dims.join(" ")
                    );
                }
                None => println!("kernel: dim 0 (empty basis)"),
            }
            if let Some(q) = &quotient {
                println!(
                    "quotient: {} new generators ({} kernel, {} in f6 products, {:?})",
                    q.new_generators, q.kernel_dim, q.intersection_dim, q.status
                );
            }
        }
    }
    if quotient.is_some_and(|q| q.status == QuotientStatus::Indeterminate) {
        return Err(Failure::Check("quotient rank is unstable across point sets".into()));
    }
    Ok(())
}

fn verify(cli: &Cli, points: usize, emit: Option<&Path>) -> Outcome {
    let report = verify_f6_with(cli.seed, points);
    let bezout = bezout_report();
    if let Some(path) = emit {
        let text = serde_json::to_string(construct_f6()).expect("serializable");
        fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let mut run = run_config(cli, "verify-f6");
    run.points = Some(points);
    run.rank = Some(5);
    match cli.format {
        Format::Json => print_json(&json!({ "provenance": run, "report": report, "bezout": bezout })),
        Format::Text => {
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.check, c.detail);
            }
            println!(
                "bezout degree {:?}: {} ({})",
                bezout.degrees, bezout.bezout_degree, bezout.lower_bound_check
            );
        }
    }
    match report.checks.iter().find(|c| !c.pass) {
        Some(c) => Err(Failure::Check(format!(
            "{}: {}",
            c.check,
            c.witness.as_ref().map(|w| w.to_string()).unwrap_or_default()
        ))),
        None => Ok(()),
    }
}

fn parse_grouping(s: &str) -> Result<Grouping, Failure> {
    s.split('|')
        .map(|block| block.split(',').map(|t| t.trim().parse::<usize>().map_err(input)).collect())
        .collect::<Result<Vec<Vec<usize>>, _>>()
        .map(Grouping)
}

fn lift(cli: &Cli, args: &LiftArgs) -> Outcome {
    let n = args.factors;
    if !(5..=10).contains(&n) {
        return Err(Failure::Input("--factors must be between 5 and 10".into()));
    }
    if args.rank == 0 || args.height <= 0 {
        return Err(Failure::Input("--rank and --height must be positive".into()));
    }
    let grouping = match &args.grouping {
        Some(s) => parse_grouping(s)?,
        None => Grouping::leading_block(n),
    };
    grouping.validate(n).map_err(input)?;
    let f6 = construct_f6();
    let mut rng = task_rng(cli.seed, stream::LIFT);
    let mut values = Vec::new();
    for _ in 0..args.trials {
        let a = sample_secant(args.rank, n, SECANT_HEIGHT, &mut rng);
        let p = random_projections(&grouping, args.height, &mut rng);
        values.push(lift_and_evaluate(&a, &grouping, &p, f6).map_err(check)?);
    }
    let zeros = values.iter().filter(|v| num_traits::Zero::is_zero(*v)).count();
    let generic = sample_generic(n, GENERIC_HEIGHT, &mut rng);
    let mut generic_value = None;
    for _ in 0..10 {
        let p = random_projections(&grouping, args.height, &mut rng);
        let v = lift_and_evaluate(&generic, &grouping, &p, f6).map_err(check)?;
        if !num_traits::Zero::is_zero(&v) {
            generic_value = Some(v);
            break;
        }
    }
    let mut run = run_config(cli, "lift");
    run.rank = Some(args.rank);
    run.height = Some(args.height);
    run.extra = Some(json!({ "factors": n, "trials": args.trials, "grouping": grouping }));
    let generic_text = generic_value.as_ref().map(format_rational);
    match cli.format {
        Format::Json => print_json(&json!({
            "provenance": run,
            "zeros": zeros,
            "trials": args.trials,
            "values": values.iter().map(format_rational).collect::<Vec<_>>(),
            "generic_value": generic_text,
        })),
        Format::Text => {
            println!("rank-{} points: {zeros}/{} zero", args.rank, args.trials);
            println!("generic tensor: {}", generic_text.as_deref().unwrap_or("0 for every projection tried"));
        }
    }
    if args.rank <= 5 && zeros != args.trials {
        return Err(Failure::Check(format!("{} of {} lifted values are nonzero", args.trials - zeros, args.trials)));
    }
    if generic_value.is_none() {
        return Err(Failure::Check("lift vanished at the generic tensor".into()));
    }
    Ok(())
}
