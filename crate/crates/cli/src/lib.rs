//! Single-binary front end wiring generation, discovery, oracle
//! construction, tracing and evaluation into reproducible pipelines.
//!
//! All randomness flows from one `--seed`; replicate `r` draws from the
//! ChaCha stream `r` of that seed, so sweeps are reproducible file-by-file
//! regardless of `--jobs`.
//!
//! Exit codes: 0 success, 1 degenerate-but-handled or runtime failure,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use cci_core::cci::{self, CciOptions, DiscoveryState, TraceAction};
use cci_core::ci::{alpha_for_sample_size, CiProvider, FisherZCi};
use cci_core::datagen::{self, GenConfig};
use cci_core::dsep::OracleCi;
use cci_core::error::Error;
use cci_core::eval;
use cci_core::format;
use cci_core::graph::EndpointMark;

#[derive(Parser)]
#[command(
    name = "cci",
    version,
    about = "Constraint-based causal discovery with cycles, latent variables and selection bias"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random linear Gaussian system and equilibrium samples.
    Generate(GenerateArgs),
    /// Run discovery against an exact oracle or a dataset.
    Discover(DiscoverArgs),
    /// Score an output graph against the true system.
    Evaluate(EvaluateArgs),
    /// Print a step-by-step oracle discovery log.
    Trace(TraceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Vertex count.
    #[arg(long)]
    p: usize,
    /// Expected neighborhood size E(N).
    #[arg(long)]
    en: f64,
    /// Generate a cyclic system (at least one directed cycle).
    #[arg(long)]
    cyclic: bool,
    /// Samples to draw before selection filtering.
    #[arg(long)]
    n: usize,
    /// RNG seed; every output is a pure function of it.
    #[arg(long)]
    seed: u64,
    /// Upper bound on latent common causes.
    #[arg(long, default_value_t = 3)]
    latents_max: usize,
    /// Upper bound on selection vertices.
    #[arg(long, default_value_t = 3)]
    select_max: usize,
    /// Independent replicates to generate.
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Worker threads for replicate sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Directed system file; with --oracle, discovery queries exact
    /// d-separation in it.
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    graph: Option<PathBuf>,
    /// Use the exact oracle backed by --graph.
    #[arg(long, requires = "graph")]
    oracle: bool,
    /// Dataset file; discovery uses Fisher's z on it.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Significance level; defaults to the sample-size schedule.
    #[arg(long)]
    alpha: Option<f64>,
    /// Cap on conditioning-set size (data mode only).
    #[arg(long)]
    max_cond_size: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Mixed graph emitted by discovery.
    #[arg(long)]
    output: PathBuf,
    /// True directed system.
    #[arg(long)]
    truth: PathBuf,
    /// Label recorded in the report row.
    #[arg(long, default_value = "cci")]
    algorithm: String,
    /// Metadata echoed into the report row.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    cyclic: bool,
    /// CI query count of the discovery run.
    #[arg(long, default_value_t = 0)]
    queries: u64,
    /// Discovery wall time in milliseconds.
    #[arg(long, default_value_t = 0)]
    wall_ms: u64,
}

#[derive(Args)]
struct TraceArgs {
    /// Directed system file (trace runs with the exact oracle).
    #[arg(long)]
    graph: PathBuf,
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Generate(args) => cmd_generate(&args),
        Cmd::Discover(args) => cmd_discover(&args),
        Cmd::Evaluate(args) => cmd_evaluate(&args),
        Cmd::Trace(args) => cmd_trace(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::DegenerateSelection) => 1,
        Some(Error::Parse { .. })
        | Some(Error::InvalidInput(_))
        | Some(Error::VertexOutOfRange(..)) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = GenConfig::new(args.p, args.en, args.cyclic, args.seed)?;
    cfg.n_latent_max = args.latents_max;
    cfg.n_select_max = args.select_max;
    if args.replicates == 0 {
        return Err(Error::InvalidInput("need at least one replicate".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()?;
    let results: Vec<anyhow::Result<()>> = pool.install(|| {
        (0..args.replicates)
            .into_par_iter()
            .map(|idx| generate_one(args, &cfg, idx))
            .collect()
    });
    for r in results {
        r?;
    }
    Ok(())
}

fn replicate_path(dir: &Path, stem: &str, ext: &str, idx: usize, replicates: usize) -> PathBuf {
    if replicates == 1 {
        dir.join(format!("{stem}.{ext}"))
    } else {
        dir.join(format!("{stem}_{idx}.{ext}"))
    }
}

fn generate_one(args: &GenerateArgs, cfg: &GenConfig, idx: usize) -> anyhow::Result<()> {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(idx as u64);
    let base = if cfg.cyclic {
        datagen::random_dcg(cfg, &mut rng)?
    } else {
        datagen::random_dag(cfg, &mut rng)?
    };
    let system = datagen::inject_latent_selection(&base, cfg, &mut rng)?;
    let raw = datagen::sample_equilibrium(&system, args.n, &mut rng)?;
    let data = datagen::apply_selection(&raw, &system)?;
    let graph_path = replicate_path(&args.out_dir, "graph", "txt", idx, args.replicates);
    let data_path = replicate_path(&args.out_dir, "data", "csv", idx, args.replicates);
    let manifest_path = replicate_path(&args.out_dir, "manifest", "txt", idx, args.replicates);
    write_file(&graph_path, &format::write_directed_system(&system))?;
    write_file(&data_path, &format::write_dataset(&data))?;
    let manifest = vec![
        ("command".into(), "generate".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("p".into(), args.p.to_string()),
        ("en".into(), args.en.to_string()),
        ("cyclic".into(), args.cyclic.to_string()),
        ("n".into(), args.n.to_string()),
        ("seed".into(), args.seed.to_string()),
        ("replicate".into(), idx.to_string()),
        ("latents_max".into(), args.latents_max.to_string()),
        ("select_max".into(), args.select_max.to_string()),
        ("n_raw".into(), data.n_raw.to_string()),
        ("n_retained".into(), data.n_rows.to_string()),
        ("graph_path".into(), graph_path.display().to_string()),
        ("data_path".into(), data_path.display().to_string()),
        (
            "wall_ms".into(),
            started.elapsed().as_millis().to_string(),
        ),
    ];
    write_file(&manifest_path, &format::write_manifest(&manifest))?;
    Ok(())
}

fn cmd_discover(args: &DiscoverArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let opts = CciOptions {
        max_cond_size: args.max_cond_size,
    };
    let (state, p_obs, queries, mode, input, alpha) = match (&args.graph, &args.data) {
        (Some(path), None) => {
            if !args.oracle {
                return Err(
                    Error::InvalidInput("graph input requires --oracle (use --data for datasets)".into())
                        .into(),
                );
            }
            let system = format::parse_directed_system(&read(path)?)?;
            let oracle = OracleCi::new(&system);
            let p_obs = oracle.observed().len();
            let state = cci::cci_run(&oracle, p_obs, &opts)?;
            let queries = oracle.query_count();
            (state, p_obs, queries, "oracle", path.clone(), None)
        }
        (None, Some(path)) => {
            let data = format::parse_dataset(&read(path)?)?;
            if data.n_rows == 0 {
                return Err(Error::InvalidInput("dataset has no rows".into()).into());
            }
            let alpha = args.alpha.unwrap_or_else(|| alpha_for_sample_size(data.n_rows));
            let ci = FisherZCi::from_dataset(&data, Some(alpha))?;
            let p_obs = ci.n_vars();
            let state = cci::cci_run(&ci, p_obs, &opts)?;
            let queries = ci.query_count();
            (state, p_obs, queries, "data", path.clone(), Some(alpha))
        }
        _ => return Err(Error::InvalidInput("need exactly one of --graph/--data".into()).into()),
    };
    let graph_path = args.out_dir.join("output.txt");
    let trace_path = args.out_dir.join("trace.log");
    let manifest_path = args.out_dir.join("manifest.txt");
    write_file(&graph_path, &format::write_mixed_graph(&state.graph))?;
    write_file(&trace_path, &cci::write_trace(&state.log))?;
    let mut manifest = vec![
        ("command".into(), "discover".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("mode".into(), mode.into()),
        ("input".into(), input.display().to_string()),
        ("p_obs".into(), p_obs.to_string()),
        ("n_ci_queries".into(), queries.to_string()),
        ("output_path".into(), graph_path.display().to_string()),
        ("trace_path".into(), trace_path.display().to_string()),
    ];
    if let Some(alpha) = alpha {
        manifest.push(("alpha".into(), format!("{alpha}")));
    }
    if let Some(cap) = args.max_cond_size {
        manifest.push(("max_cond_size".into(), cap.to_string()));
    }
    manifest.push((
        "wall_ms".into(),
        started.elapsed().as_millis().to_string(),
    ));
    write_file(&manifest_path, &format::write_manifest(&manifest))?;
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let output = format::parse_mixed_graph(&read(&args.output)?)?;
    let truth = format::parse_directed_system(&read(&args.truth)?)?;
    let observed = truth.observed();
    if observed.len() != output.p() {
        return Err(Error::InvalidInput(format!(
            "output has {} vertices but truth has {} observed",
            output.p(),
            observed.len()
        ))
        .into());
    }
    let report = eval::corrected_oracle_graph(&output, &truth, &observed)?;
    let distance = eval::shd(&output, &report.corrected)?;
    let fraction = eval::endpoint_orientation_fraction(&output, &report.corrected)?;
    println!(
        "# fixes={} arrow_fixed={} tail_fixed={} fraction={:.4}",
        report.fixes.len(),
        report.n_arrow_fixed(),
        report.n_tail_fixed(),
        fraction
    );
    println!(
        "{},{},{},{},{},{},{},{},{},{}",
        args.seed,
        output.p(),
        args.n,
        args.cyclic,
        args.algorithm,
        distance.total(),
        distance.adjacency_diffs,
        distance.mark_diffs,
        args.queries,
        args.wall_ms
    );
    Ok(())
}

/// Runs the oracle pipeline step by step, printing the per-step actions.
fn cmd_trace(args: &TraceArgs) -> anyhow::Result<()> {
    let system = format::parse_directed_system(&read(&args.graph)?)?;
    let oracle = OracleCi::new(&system);
    let p_obs = oracle.observed().len();
    let opts = CciOptions::default();

    let mut state = cci::pc_skeleton(&oracle, p_obs, &opts)?;
    cci::orient_v_structures(&mut state, 1)?;
    cci::fci_final_skeleton(&mut state, &oracle, &opts)?;
    let mut cursor = state.log.len();
    println!(
        "Step 1: skeleton has {} edges over {} observed vertices ({})",
        state.graph.edge_count(),
        p_obs,
        summarize_removals(&state)
    );

    let print_step = |state: &DiscoveryState, step: u8, cursor: &mut usize| {
        let new = &state.log[*cursor..];
        if new.is_empty() {
            println!("Step {step}: no actions");
        }
        for e in new {
            match (&e.action, e.edge) {
                (TraceAction::Orient { at, mark }, Some((a, b))) => {
                    let glyph = match mark {
                        EndpointMark::Arrow => "arrowhead",
                        EndpointMark::Tail => "tail",
                        EndpointMark::Circle => "circle",
                    };
                    let rule = if step == 7 {
                        format!(" [{}]", e.rule)
                    } else {
                        String::new()
                    };
                    println!(
                        "Step {step}: {glyph} at O{at} on (O{a},O{b}){rule} ({})",
                        e.because
                    );
                }
                (TraceAction::RecordSet, _) => {
                    println!("Step {step}: recorded {}", e.because);
                }
                (TraceAction::DropEdge, Some((a, b))) => {
                    println!("Step {step}: removed (O{a},O{b}) ({})", e.because);
                }
                _ => {}
            }
        }
        *cursor = state.log.len();
    };

    cci::orient_v_structures(&mut state, 2)?;
    print_step(&state, 2, &mut cursor);
    cci::orient_long_range_nonancestral(&mut state, &oracle)?;
    print_step(&state, 3, &mut cursor);
    cci::discover_sup_seps(&mut state, &oracle, &opts)?;
    print_step(&state, 4, &mut cursor);
    cci::orient_with_sup_seps(&mut state)?;
    print_step(&state, 5, &mut cursor);
    cci::orient_long_range_ancestral(&mut state, &oracle)?;
    print_step(&state, 6, &mut cursor);
    cci::apply_orientation_rules(&mut state)?;
    print_step(&state, 7, &mut cursor);

    print!("{}", format::write_mixed_graph(&state.graph));
    Ok(())
}

fn summarize_removals(state: &DiscoveryState) -> String {
    let removed: Vec<String> = state
        .log
        .iter()
        .filter(|e| e.action == TraceAction::DropEdge)
        .filter_map(|e| e.edge.map(|(a, b)| format!("(O{a},O{b})")))
        .collect();
    if removed.is_empty() {
        "removed nothing".to_string()
    } else {
        format!("removed {}", removed.join(", "))
    }
}

/// Reference systems for documentation and smoke tests, exposed so
/// integration tests can write them to disk through one place.
pub fn reference_system_text() -> String {
    format::write_directed_system(&cci_core::samples::five_var_latent_feedback())
}
