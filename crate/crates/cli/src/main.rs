use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fibergraph_cli::formats::{self, table_json};
use fibergraph_cli::verify::{self, Check, VerifyOptions};
use fibergraph_cli::{exit, CliError, Result};
use fibergraph_core::analysis::{articulation_points, hemmecke_graph, CutWitness};
use fibergraph_core::decomposition::decompose_constrained;
use fibergraph_core::enumerate::{
    count_fiber, enumerate_fiber_capped, enumerate_general_fiber, hemmecke_matrix, hemmecke_rhs, DEFAULT_CAP,
};
use fibergraph_core::graph::{build_graph, orient, WeightVector};
use fibergraph_core::mcmc::{exact_test, run_walk, Target, WalkConfig};
use serde_json::json;

const HEMMECKE_MAX_K: usize = 12;

/// Fiber graphs of n x n contingency tables with all margins equal to r.
#[derive(Debug, Parser)]
#[command(name = "fibergraph", version)]
struct Cli {
    /// Worker threads for parallel checks (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Refuse to enumerate more than this many tables.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; which ones apply depends on the command.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Jsonl,
    Csv,
    EdgeList,
    Dot,
}

impl Format {
    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
    }
}

#[derive(Debug, Args)]
struct Shape {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate F(n, r), or the non-negative solutions of A v = b.
    Enumerate {
        #[arg(long, required_unless_present = "matrix")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "matrix")]
        r: Option<u32>,
        /// JSON file {"rows": [[...], ...]} holding A.
        #[arg(long, requires = "rhs", conflicts_with_all = ["n", "r"])]
        matrix: Option<PathBuf>,
        /// Right-hand side b as comma-separated integers.
        #[arg(long)]
        rhs: Option<String>,
    },
    /// Build G(n, r) and export it.
    Graph {
        #[command(flatten)]
        shape: Shape,
        /// Direct every edge toward lower (i + j)^2 weight.
        #[arg(long)]
        orient: bool,
        /// Vertex table file for edge lists (default: <out>.vertices.json).
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Check degrees, connectivity, diameter, orientation and decompositions.
    Verify {
        #[command(flatten)]
        shape: Shape,
        /// Comma-separated subset of checks (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<Check>>,
        /// Allow all-pairs checks on fibers above the quick size limit.
        #[arg(long)]
        long: bool,
    },
    /// Split a table into permutation matrices.
    Decompose {
        #[arg(long)]
        table: PathBuf,
        /// 1-based positions [[i, j], ...], inline or as a file.
        #[arg(long)]
        constraints: Option<String>,
    },
    /// Metropolis-Hastings walk from a table.
    Sample {
        #[command(flatten)]
        walk: WalkArgs,
        /// Samples as JSON lines (default: stdout).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Monte Carlo exact test of a table.
    Test {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, value_enum, default_value_t = Statistic::Chisq)]
        statistic: Statistic,
    },
    /// Two k-cubes joined by an edge: minimum degree k, connectivity 1.
    Hemmecke {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Args)]
struct WalkArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    #[arg(long = "burn-in", default_value_t = 1_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 1)]
    thin: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default: uniform for `sample`, hypergeometric for `test`.
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
}

impl WalkArgs {
    fn config(&self, default_target: Target) -> WalkConfig {
        WalkConfig {
            steps: self.steps,
            burn_in: self.burn_in,
            thinning: self.thin,
            seed: self.seed,
            target: self.target.map_or(default_target, Target::from),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Uniform,
    Hypergeometric,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Uniform => Target::Uniform,
            TargetArg::Hypergeometric => Target::Hypergeometric,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Statistic {
    Chisq,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::PASS });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Enumerate { n, r, matrix, rhs } => match matrix {
            Some(path) => enumerate_general(&path, rhs.as_deref().unwrap_or_default(), cli.cap, out, cli.format),
            None => enumerate(n.expect("required"), r.expect("required"), cli.cap, out, cli.format),
        },
        Command::Graph { shape, orient, sidecar } => graph(shape, orient, sidecar, cli.cap, out, cli.format),
        Command::Verify { shape, checks, long } => {
            json_only(cli.format, "verify")?;
            let opts = VerifyOptions { checks: checks.unwrap_or_else(|| Check::ALL.to_vec()), long, cap: cli.cap };
            let suite = verify::run(shape.n, shape.r, &opts)?;
            write_json(out, &serde_json::to_value(&suite).expect("serializable"))?;
            Ok(if suite.pass { exit::PASS } else { exit::CHECK_FAILED })
        }
        Command::Decompose { table, constraints } => {
            json_only(cli.format, "decompose")?;
            let t = formats::read_table(&table)?;
            let positions = match constraints {
                Some(arg) => formats::parse_positions(&arg, t.n())?,
                None => Vec::new(),
            };
            let d = decompose_constrained(&t, &positions)?;
            let satisfied = d.satisfies_constraints();
            let parts: Vec<_> = d.parts.iter().map(table_json).collect();
            let pos: Vec<_> = positions.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
            write_json(out, &json!({ "parts": parts, "constraints": pos, "constraints_satisfied": satisfied }))?;
            Ok(if satisfied { exit::PASS } else { exit::CHECK_FAILED })
        }
        Command::Sample { walk, emit } => sample(&walk, emit.as_deref(), out, cli.format),
        Command::Test { walk, statistic: Statistic::Chisq } => {
            json_only(cli.format, "test")?;
            let t = formats::read_table(&walk.table)?;
            let res = exact_test(&t, &walk.config(Target::Hypergeometric))?;
            write_json(
                out,
                &json!({
                    "observed_statistic": res.observed_statistic,
                    "p_value_estimate": res.p_value_estimate,
                    "standard_error": res.standard_error,
                    "samples_used": res.samples_used,
                }),
            )?;
            Ok(exit::PASS)
        }
        Command::Hemmecke { k } => hemmecke(k, cli.cap, out, cli.format),
    }
}

fn json_only(format: Option<Format>, command: &'static str) -> Result<()> {
    match format {
        None | Some(Format::Json) => Ok(()),
        Some(f) => Err(CliError::UnsupportedFormat { format: f.name(), command }),
    }
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let label = out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    f(&mut *w)?;
    w.flush().map_err(|e| CliError::io(label, e))
}

fn write_json(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let label = out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    with_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)
            .map_err(io::Error::from)
            .and_then(|()| writeln!(w))
            .map_err(|e| CliError::io(&label, e))
    })
}

fn io_at(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::io(path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf), e)
}

fn enumerate(n: usize, r: u32, cap: usize, out: Option<&Path>, format: Option<Format>) -> Result<u8> {
    let format = match format {
        None | Some(Format::Jsonl) => Format::Jsonl,
        Some(Format::Csv) => Format::Csv,
        Some(f) => return Err(CliError::UnsupportedFormat { format: f.name(), command: "enumerate" }),
    };
    let expected = count_fiber(n, r);
    if expected > cap.into() {
        return Err(CliError::ResourceGuard(format!("F({n},{r}) has {expected} tables, above --cap {cap}")));
    }
    let fiber = enumerate_fiber_capped(n, r, cap)?;
    if let Some(path) = out {
        with_output(Some(path), |w| {
            match format {
                Format::Csv => formats::write_fiber_csv(&fiber, w),
                _ => formats::write_fiber_jsonl(&fiber, w),
            }
            .map_err(io_at(Some(path)))
        })?;
    }
    let agrees = expected == fiber.len().into();
    if agrees {
        println!("{} tables", fiber.len());
        Ok(exit::PASS)
    } else {
        eprintln!("enumerated {} tables but the counting recursion gives {expected}", fiber.len());
        Ok(exit::CHECK_FAILED)
    }
}

fn enumerate_general(matrix: &Path, rhs: &str, cap: usize, out: Option<&Path>, format: Option<Format>) -> Result<u8> {
    if !matches!(format, None | Some(Format::Jsonl)) {
        return Err(CliError::UnsupportedFormat { format: format.map(Format::name).unwrap_or_default(), command: "enumerate --matrix" });
    }
    let text = std::fs::read_to_string(matrix).map_err(|e| CliError::io(matrix, e))?;
    let a = formats::parse_matrix_json(&text, &matrix.display().to_string())?;
    let b = formats::parse_int_list(rhs)?;
    if b.len() != a.len() {
        return Err(CliError::Usage(format!("--rhs has {} entries but A has {} rows", b.len(), a.len())));
    }
    let fiber = enumerate_general_fiber(&a, &b, cap)?;
    if let Some(path) = out {
        with_output(Some(path), |w| formats::write_general_fiber_jsonl(&fiber, w).map_err(io_at(Some(path))))?;
    }
    println!("{} points", fiber.points.len());
    Ok(exit::PASS)
}

fn graph(shape: Shape, oriented: bool, sidecar: Option<PathBuf>, cap: usize, out: Option<&Path>, format: Option<Format>) -> Result<u8> {
    let format = format.unwrap_or(Format::EdgeList);
    if !matches!(format, Format::EdgeList | Format::Dot) {
        return Err(CliError::UnsupportedFormat { format: format.name(), command: "graph" });
    }
    if format == Format::Dot && sidecar.is_some() {
        return Err(CliError::Usage("--sidecar only applies to edge lists".into()));
    }
    let fg = build_graph(enumerate_fiber_capped(shape.n, shape.r, cap)?);
    if format == Format::Dot && fg.vertex_count() > formats::DOT_VERTEX_LIMIT {
        return Err(CliError::ResourceGuard(format!(
            "DOT export is limited to {} vertices, G({},{}) has {}",
            formats::DOT_VERTEX_LIMIT,
            shape.n,
            shape.r,
            fg.vertex_count()
        )));
    }
    let sidecar = sidecar.or_else(|| out.map(|p| PathBuf::from(format!("{}.vertices.json", p.display()))));
    if format == Format::EdgeList {
        if let Some(path) = &sidecar {
            write_json(Some(path), &formats::vertex_sidecar(&fg))?;
        }
    }
    let edges = fg.graph().edge_count();
    let vertices = fg.vertex_count();
    if oriented {
        let og = orient(fg, &WeightVector::squared_index_sum(shape.n))?;
        with_output(out, |w| match format {
            Format::Dot => formats::write_oriented_dot(&og, w),
            _ => formats::write_arc_list(&og, w).map_err(io_at(out)),
        })?;
    } else {
        with_output(out, |w| match format {
            Format::Dot => formats::write_dot(&fg, w),
            _ => formats::write_edge_list(&fg, w).map_err(io_at(out)),
        })?;
    }
    if out.is_some() {
        println!("{vertices} vertices, {edges} edges");
    }
    Ok(exit::PASS)
}

fn sample(walk: &WalkArgs, emit: Option<&Path>, out: Option<&Path>, format: Option<Format>) -> Result<u8> {
    if !matches!(format, None | Some(Format::Jsonl)) {
        return Err(CliError::UnsupportedFormat { format: format.map(Format::name).unwrap_or_default(), command: "sample" });
    }
    let start = formats::read_table(&walk.table)?;
    let config = walk.config(Target::Uniform);
    config.validate()?;
    let mut state = None;
    with_output(emit, |w| {
        let mut failure = None;
        let s = run_walk(start, &config, |t| {
            if failure.is_none() {
                if let Err(e) = serde_json::to_writer(&mut *w, &t.to_rows()).map_err(io::Error::from).and_then(|()| writeln!(w)) {
                    failure = Some(e);
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(io_at(emit)(e));
        }
        state = Some(s);
        Ok(())
    })?;
    let state = state.expect("walk ran");
    let distinct = state.visits.distinct();
    let summary = json!({
        "steps": state.step_index,
        "accepted": state.accepted_count,
        "samples": config.sample_count(),
        "distinct_visited": distinct.value(),
        "distinct_approximate": distinct.is_approximate(),
        "final": state.current.to_rows(),
    });
    match out {
        Some(path) => write_json(Some(path), &summary)?,
        None => eprintln!("{summary}"),
    }
    Ok(exit::PASS)
}

fn hemmecke(k: usize, cap: usize, out: Option<&Path>, format: Option<Format>) -> Result<u8> {
    json_only(format, "hemmecke")?;
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if k > HEMMECKE_MAX_K {
        return Err(CliError::ResourceGuard(format!("--k is limited to {HEMMECKE_MAX_K}")));
    }
    let (g, report) = hemmecke_graph(k);
    let fiber = enumerate_general_fiber(&hemmecke_matrix(k), &hemmecke_rhs(k), cap)?;
    let witness = match &report.witness {
        CutWitness::Complete => json!("complete"),
        CutWitness::Cut(cut) => json!(cut),
    };
    let pass = g.min_degree() == k && report.kappa == 1 && fiber.points.len() == g.vertex_count();
    write_json(
        out,
        &json!({
            "k": k,
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "min_degree": g.min_degree(),
            "kappa": report.kappa,
            "conjecture_holds": report.conjecture_holds,
            "witness_cut": witness,
            "articulation_points": articulation_points(&g),
            "fiber_points": fiber.points.len(),
            "pass": pass,
        }),
    )?;
    Ok(if pass { exit::PASS } else { exit::CHECK_FAILED })
}
