//! Command-line front end for the `mdep` library: parse factor
//! specifications, run the analysis operations, and emit machine-readable
//! reports.
//!
//! Exit codes make the mathematical verdict scriptable. 0 means success, and
//! degenerate where a verdict applies; 10 means certified nondegenerate;
//! 2 means a usage or input error; 3 means a resource limit was hit, either
//! an enumeration budget or a rejection-sampling cap.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use mdep::stats::mean_and_se;
use mdep::trees::{
    bst_devroye_tree, bst_witness_configuration, gw_alpha_beta, gw_conditioned_degrees,
    gw_degeneracy_argument, gw_sigma_squared, split_for_witness, BinaryTree, GwSigmaMode,
    LinearSubtreeStatistic, OffspringDistribution, OrderedTree, TreePattern,
};
use mdep::{
    coboundary_decompose_with, exact_moments_with, parse_spec, parse_spec_path, rc2_witness_check,
    rn_example_moments, sigma_squared_mc, simulate_clt, var_sn_exact_with, DecomposeOptions,
    Error, ExactOptions, ParsedSpec, Result, DEFAULT_SEED, DEFAULT_TOLERANCE,
};

use report::{render, Format, Meta};

/// Exit code for a factor certified nondegenerate by the invoked check.
const EXIT_NONDEGENERATE: u8 = 10;
/// Exit code for usage and input errors.
const EXIT_USAGE: u8 = 2;
/// Exit code for enumeration budgets and rejection-sampling caps.
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mdep",
    version,
    about = "Asymptotic variance, degeneracy verdicts, and tree-statistic \
             reports for sliding block factors of i.i.d. sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads for replica sampling (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Moment report: exact on finite alphabets, Monte Carlo otherwise
    Analyze(AnalyzeArgs),
    /// Degeneracy verdict with a potential table or a cycle witness
    Decompose(DecomposeArgs),
    /// Normal-limit diagnostics of standardized block sums
    Clt(CltArgs),
    /// Sample binary search trees and estimate fringe-statistic densities
    Bst(BstArgs),
    /// Conditioned branching-tree reports: centering, variance, densities
    Gw(GwArgs),
    /// Two-configuration certificate for a tree-statistic specification
    Witness(WitnessArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Factor specification file
    #[arg(long)]
    input: PathBuf,
    /// Path length to report Var(S_n) for; may repeat
    #[arg(long)]
    n: Vec<usize>,
    /// Comma-separated path lengths, merged with --n
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Replicas for the Monte Carlo fallback
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// Root seed for the Monte Carlo fallback
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Near-zero clamp for the exact variance
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Factor specification file
    #[arg(long)]
    input: PathBuf,
    /// Tolerance for the edge consistency test
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct CltArgs {
    /// Factor specification file
    #[arg(long, required_unless_present = "factor", conflicts_with = "factor")]
    input: Option<PathBuf>,
    /// Built-in factor shortcut; only "rn-example" is known
    #[arg(long)]
    factor: Option<String>,
    /// Path length; may repeat
    #[arg(long)]
    n: Vec<usize>,
    /// Comma-separated path lengths, merged with --n (default 10,100,1000)
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Replicas per path length
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// Root seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct BstArgs {
    /// Factor specification file with a search-tree statistic
    #[arg(long, conflicts_with = "tree")]
    input: Option<PathBuf>,
    /// Pattern as a {1,0} preorder string; may repeat
    #[arg(long)]
    tree: Vec<String>,
    /// Coefficient per --tree pattern (default 1)
    #[arg(long, requires = "tree")]
    coeff: Vec<f64>,
    /// Keys per sampled tree
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of sampled trees
    #[arg(long, default_value_t = 5000)]
    reps: u64,
    /// Root seed; replica i samples from seed + i
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct GwArgs {
    /// Factor specification file with an ordered-tree statistic
    #[arg(long, conflicts_with_all = ["tree", "offspring", "truncate"])]
    input: Option<PathBuf>,
    /// Offspring law: a preset name (poisson1, geom-half) or comma-separated
    /// probabilities
    #[arg(long)]
    offspring: Option<String>,
    /// Truncation point for offspring presets in exact computations
    #[arg(long, requires = "offspring")]
    truncate: Option<u32>,
    /// Pattern as a comma-separated degree sequence; may repeat
    #[arg(long)]
    tree: Vec<String>,
    /// Coefficient per --tree pattern (default 1)
    #[arg(long, requires = "tree")]
    coeff: Vec<f64>,
    /// Nodes per sampled tree
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of sampled trees; 0 skips sampling
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    /// Root seed; replica i samples from seed + i
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Include the degeneracy certificate and exit by its verdict
    #[arg(long)]
    certificate: bool,
}

#[derive(Args)]
struct WitnessArgs {
    /// Factor specification file with a tree statistic
    #[arg(long)]
    input: PathBuf,
    /// Configuration length for search-tree witnesses
    #[arg(long, default_value_t = 20)]
    n: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli.command, cli.format) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn run(command: Command, format: Format) -> Result<u8> {
    match command {
        Command::Analyze(args) => cmd_analyze(args, format),
        Command::Decompose(args) => cmd_decompose(args, format),
        Command::Clt(args) => cmd_clt(args, format),
        Command::Bst(args) => cmd_bst(args, format),
        Command::Gw(args) => cmd_gw(args, format),
        Command::Witness(args) => cmd_witness(args, format),
    }
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Budget { .. } | Error::Rejection { .. } => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn emit(format: Format, meta: &Meta, body: &serde_json::Value) {
    print!("{}", render(format, meta, body));
}

/// Merges --n and --n-list into one sorted, deduplicated length list.
fn merge_ns(n: &[usize], n_list: &[usize]) -> Vec<usize> {
    let mut ns: Vec<usize> = n.iter().chain(n_list).copied().collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Evaluates a linear fringe statistic on one sampled host tree.
fn stat_count<T: TreePattern>(
    stat: &LinearSubtreeStatistic<T>,
    count: impl Fn(&T) -> usize,
) -> f64 {
    stat.trees().iter().zip(stat.coeffs()).map(|(t, c)| c * count(t) as f64).sum()
}

fn cmd_analyze(args: AnalyzeArgs, format: Format) -> Result<u8> {
    let spec = parse_spec_path(&args.input)?;
    let ns = merge_ns(&args.n, &args.n_list);
    let exact = spec.source.atoms().is_some();
    let mut body = json!({
        "factor": spec.factor.label(),
        "source": spec.source.kind_label(),
        "ell": spec.factor.ell(),
        "mode": if exact { "exact" } else { "monte-carlo" },
    });
    if exact {
        let opts = ExactOptions { tolerance: args.tolerance, ..ExactOptions::default() };
        let moments = exact_moments_with(&spec.factor, &spec.source, &opts)?;
        body["moments"] = serde_json::to_value(&moments).expect("plain struct");
        let rows: Vec<serde_json::Value> = ns
            .iter()
            .map(|&n| {
                let v = var_sn_exact_with(&spec.factor, &spec.source, n, &opts)?;
                Ok(json!({ "n": n, "var_sn": v }))
            })
            .collect::<Result<_>>()?;
        body["var_sn"] = json!(rows);
    } else {
        // Continuous sources admit no exact enumeration; estimate sigma^2 as
        // Var(S_n) / n at the largest requested length, default 1000.
        let n = ns.last().copied().unwrap_or(1000).max(spec.factor.ell());
        let est = sigma_squared_mc(&spec.factor, &spec.source, n, args.reps, args.seed)?;
        body["sigma2_estimate"] = serde_json::to_value(&est).expect("plain struct");
        let rows: Vec<serde_json::Value> = ns
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                // One fresh seed per row so no row reuses the headline draws.
                let row_seed = args.seed.wrapping_add(1 + j as u64);
                let est = sigma_squared_mc(&spec.factor, &spec.source, n, args.reps, row_seed)?;
                Ok(json!({
                    "n": n,
                    "var_sn": est.estimate * n as f64,
                    "std_error": est.std_error * n as f64,
                }))
            })
            .collect::<Result<_>>()?;
        body["var_sn"] = json!(rows);
    }
    emit(format, &Meta::new("analyze", Some(args.seed)), &body);
    Ok(0)
}

fn cmd_decompose(args: DecomposeArgs, format: Format) -> Result<u8> {
    let spec = parse_spec_path(&args.input)?;
    let opts = DecomposeOptions { tolerance: args.tolerance, ..DecomposeOptions::default() };
    let result = coboundary_decompose_with(&spec.factor, &spec.source, &opts)?;
    let degenerate = result.is_degenerate();
    let body = json!({
        "factor": spec.factor.label(),
        "source": spec.source.kind_label(),
        "ell": spec.factor.ell(),
        "result": result,
    });
    emit(format, &Meta::new("decompose", None), &body);
    Ok(if degenerate { 0 } else { EXIT_NONDEGENERATE })
}

fn load_clt_spec(input: Option<&Path>, factor: Option<&str>) -> Result<ParsedSpec> {
    match (input, factor) {
        (Some(path), _) => parse_spec_path(path),
        (None, Some("rn-example")) => parse_spec(r#"{"factor": "rn-example"}"#),
        (None, Some(other)) => Err(Error::Parse(format!(
            "the --factor shortcut only knows \"rn-example\", got {other:?}; use --input"
        ))),
        (None, None) => Err(Error::Parse("need --input or --factor".into())),
    }
}

fn cmd_clt(args: CltArgs, format: Format) -> Result<u8> {
    let spec = load_clt_spec(args.input.as_deref(), args.factor.as_deref())?;
    let mut ns = merge_ns(&args.n, &args.n_list);
    if ns.is_empty() {
        ns = vec![10, 100, 1000];
    }
    let sim = simulate_clt(&spec.factor, &spec.source, &ns, args.reps, args.seed)?;
    let mut body = json!({
        "factor": spec.factor.label(),
        "source": spec.source.kind_label(),
        "ell": spec.factor.ell(),
        "simulation": sim,
    });
    if spec.factor.label() == "rn-example" {
        // The built-in example ships closed-form second and fourth moments,
        // so its report carries the direct estimates alongside.
        let moments = rn_example_moments(args.reps, args.seed)?;
        body["pair_moments"] = serde_json::to_value(&moments).expect("plain struct");
    }
    emit(format, &Meta::new("clt", Some(args.seed)), &body);
    Ok(0)
}

fn bst_stat_from(args: &BstArgs) -> Result<LinearSubtreeStatistic<BinaryTree>> {
    if let Some(path) = &args.input {
        let spec = parse_spec_path(path)?;
        return spec.bst_stat.ok_or_else(|| {
            Error::Parse(
                "this specification has no search-tree statistic; expected \
                 {\"factor\": \"bst\", ...}"
                    .into(),
            )
        });
    }
    if args.tree.is_empty() {
        return Err(Error::Parse("need --input or at least one --tree pattern".into()));
    }
    let coeffs = align_coeffs(&args.coeff, args.tree.len())?;
    let terms: Vec<(BinaryTree, f64)> = args
        .tree
        .iter()
        .zip(coeffs)
        .map(|(text, c)| Ok((BinaryTree::decode(text)?, c)))
        .collect::<Result<_>>()?;
    LinearSubtreeStatistic::new(terms)
}

fn align_coeffs(coeff: &[f64], patterns: usize) -> Result<Vec<f64>> {
    if coeff.is_empty() {
        Ok(vec![1.0; patterns])
    } else if coeff.len() == patterns {
        Ok(coeff.to_vec())
    } else {
        Err(Error::Parse(format!(
            "{} --coeff values for {} --tree patterns",
            coeff.len(),
            patterns
        )))
    }
}

fn check_sampling_args(n: usize, reps: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Parse("--n must be at least 1".into()));
    }
    if reps < 2 {
        return Err(Error::Parse("need at least 2 replicas for a standard error".into()));
    }
    Ok(())
}

fn cmd_bst(args: BstArgs, format: Format) -> Result<u8> {
    let stat = bst_stat_from(&args)?;
    check_sampling_args(args.n, args.reps)?;
    let counts: Vec<f64> = (0..args.reps)
        .into_par_iter()
        .map(|i| {
            let host = bst_devroye_tree(args.n, args.seed.wrapping_add(i));
            stat_count(&stat, |pattern| host.count_fringe(pattern))
        })
        .collect();
    let mut body = json!({ "trees": stat.labels(), "coeffs": stat.coeffs() });
    for (key, value) in sampling_summary(args.n, args.reps, &counts) {
        body[key] = value;
    }
    emit(format, &Meta::new("bst", Some(args.seed)), &body);
    Ok(0)
}

fn sampling_summary(n: usize, reps: u64, counts: &[f64]) -> Vec<(&'static str, serde_json::Value)> {
    let densities: Vec<f64> = counts.iter().map(|c| c / n as f64).collect();
    let (count_mean, count_se) = mean_and_se(counts);
    let (density_mean, density_se) = mean_and_se(&densities);
    vec![
        ("n", json!(n)),
        ("reps", json!(reps)),
        ("count_mean", json!(count_mean)),
        ("count_std_error", json!(count_se)),
        ("density_mean", json!(density_mean)),
        ("density_std_error", json!(density_se)),
    ]
}

fn gw_inputs(args: &GwArgs) -> Result<(LinearSubtreeStatistic<OrderedTree>, OffspringDistribution)> {
    if let Some(path) = &args.input {
        let spec = parse_spec_path(path)?;
        let stat = spec.gw_stat.ok_or_else(|| {
            Error::Parse(
                "this specification has no ordered-tree statistic; expected \
                 {\"factor\": \"gw\", ...}"
                    .into(),
            )
        })?;
        let off = spec.offspring.expect("gw specifications carry an offspring law");
        return Ok((stat, off));
    }
    let Some(law) = &args.offspring else {
        return Err(Error::Parse("need --input or --offspring with --tree".into()));
    };
    if args.tree.is_empty() {
        return Err(Error::Parse("need at least one --tree pattern".into()));
    }
    let off = parse_offspring(law, args.truncate)?;
    let coeffs = align_coeffs(&args.coeff, args.tree.len())?;
    let terms: Vec<(OrderedTree, f64)> = args
        .tree
        .iter()
        .zip(coeffs)
        .map(|(text, c)| Ok((OrderedTree::parse(text)?, c)))
        .collect::<Result<_>>()?;
    Ok((LinearSubtreeStatistic::new(terms)?, off))
}

/// A law that reads as comma-separated floats is a probability table;
/// anything else is handed to the preset catalog.
fn parse_offspring(text: &str, truncate: Option<u32>) -> Result<OffspringDistribution> {
    let probs: Option<Vec<f64>> =
        text.split(',').map(|piece| piece.trim().parse::<f64>().ok()).collect();
    match probs {
        Some(p) => {
            if truncate.is_some() {
                return Err(Error::Parse("--truncate only applies to offspring presets".into()));
            }
            OffspringDistribution::finite(p)
        }
        None => match truncate {
            Some(t) => OffspringDistribution::preset_with_truncation(text, t),
            None => OffspringDistribution::preset(text),
        },
    }
}

fn cmd_gw(args: GwArgs, format: Format) -> Result<u8> {
    let (stat, off) = gw_inputs(&args)?;
    let (alpha, beta) = gw_alpha_beta(&stat, &off)?;
    // Exact mode enumerates the working table; the sampling arguments are
    // unused there.
    let sigma2 = gw_sigma_squared(&stat, &off, GwSigmaMode::Exact, 0, 0, 0)?;
    let mut body = json!({
        "trees": stat.labels(),
        "coeffs": stat.coeffs(),
        "offspring": {
            "label": off.label(),
            "probs": off.probs(),
            "truncated_mass": off.truncated_mass(),
        },
        "alpha": alpha,
        "beta": beta,
        "sigma2": sigma2,
    });
    if args.reps > 0 {
        check_sampling_args(args.n, args.reps)?;
        let counts: Vec<f64> = (0..args.reps)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let host = gw_conditioned_degrees(&off, args.n, args.seed.wrapping_add(i))?;
                Ok(stat_count(&stat, |pattern| host.count_fringe(pattern)))
            })
            .collect::<Result<_>>()?;
        body["sampling"] =
            serde_json::Map::from_iter(
                sampling_summary(args.n, args.reps, &counts)
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v)),
            )
            .into();
    }
    let mut code = 0;
    if args.certificate {
        let cert = gw_degeneracy_argument(&stat, &off)?;
        code = if cert.sigma_positive { EXIT_NONDEGENERATE } else { 0 };
        body["certificate"] = serde_json::to_value(&cert).expect("plain struct");
    }
    emit(format, &Meta::new("gw", Some(args.seed)), &body);
    Ok(code)
}

fn cmd_witness(args: WitnessArgs, format: Format) -> Result<u8> {
    let spec = parse_spec_path(&args.input)?;
    if let Some(stat) = &spec.bst_stat {
        let (base, twisted) = bst_witness_configuration(stat, args.n)?;
        let ell = stat.max_size() + 2;
        let (left, right, middle_a, middle_b) = split_for_witness(&base, &twisted, ell)?;
        let check = rc2_witness_check(&spec.factor, &left, &right, &middle_a, &middle_b)?;
        let differs = check.differs;
        let body = json!({
            "kind": "bst",
            "trees": stat.labels(),
            "ell": ell,
            "base": base,
            "twisted": twisted,
            "check": check,
        });
        emit(format, &Meta::new("witness", None), &body);
        return Ok(if differs { EXIT_NONDEGENERATE } else { 0 });
    }
    if let Some(stat) = &spec.gw_stat {
        let off = spec.offspring.as_ref().expect("gw specifications carry an offspring law");
        let cert = gw_degeneracy_argument(stat, off)?;
        let positive = cert.sigma_positive;
        let body = json!({
            "kind": "gw",
            "trees": stat.labels(),
            "certificate": cert,
        });
        emit(format, &Meta::new("witness", None), &body);
        return Ok(if positive { EXIT_NONDEGENERATE } else { 0 });
    }
    Err(Error::Unsupported(
        "witness needs a tree-statistic specification; for table factors use decompose".into(),
    ))
}
