use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use copdep::estimation::{
    choose_resolution, fit_checkerboard_with, pseudo_observations, ResolutionMode,
};
use copdep::generators::{generate, SynthModel, TargetFunction};
use copdep::io::{copula_to_json, read_copula, read_table_file, write_copula, write_table, Table};
use copdep::star::{compatibility_check, star};
use copdep::verify::{run_suite, Suite};
use copdep::{
    measure, CheckerboardCopula, Error, GroupSplit, MeasureKind, MeasureOptions, ResolutionPolicy,
};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_SUITE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "copdep",
    version,
    about = "Nonsymmetric dependence measures from checkerboard copulas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a checkerboard copula to CSV data.
    Estimate(EstimateArgs),
    /// Compute a dependence measure from a copula file or CSV data.
    Measure(MeasureArgs),
    /// Compose two copulas through a shared block.
    Star(StarArgs),
    /// Generate synthetic CSV data.
    Synth(SynthArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ColumnArgs {
    /// Conditioning columns (names or 0-based indices, comma separated).
    #[arg(long, value_delimiter = ',')]
    u_cols: Vec<String>,
    /// Target columns (names or 0-based indices, comma separated).
    #[arg(long, value_delimiter = ',')]
    v_cols: Vec<String>,
}

#[derive(Args)]
struct ResolutionArgs {
    /// Cells per axis.
    #[arg(long, conflicts_with = "auto_resolution")]
    resolution: Option<usize>,
    /// Choose the resolution from the sample size (default).
    #[arg(long)]
    auto_resolution: bool,
}

impl ResolutionArgs {
    fn policy(&self) -> ResolutionPolicy {
        match self.resolution {
            Some(m) => ResolutionPolicy::fixed(m),
            None => ResolutionPolicy::default(),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Copula file to write; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    columns: ColumnArgs,
    #[command(flatten)]
    resolution: ResolutionArgs,
}

#[derive(Args)]
struct MeasureArgs {
    /// Copula file (.json) or CSV data.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    columns: ColumnArgs,
    #[command(flatten)]
    resolution: ResolutionArgs,
    #[arg(long, default_value = "tau_quadratic")]
    kind: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// Divide a group measure by its Kendall bound.
    #[arg(long)]
    normalize: bool,
    /// Gauss–Legendre points per target cell.
    #[arg(long, default_value_t = 16)]
    quad_order: usize,
}

#[derive(Args)]
struct StarArgs {
    /// The two operands, `(u, s)` first and `(s, v)` second.
    #[arg(long, num_args = 1, required = true)]
    input: Vec<PathBuf>,
    /// Number of shared axes; defaults to half the first operand's axes.
    #[arg(long)]
    s_dims: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModelTag {
    Independent,
    Comonotone,
    Mixture,
    Functional,
    Gaussian,
    SquareLaw,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    model: ModelTag,
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Column count for independent and comonotone data.
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Mixture weight on the comonotone part.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Target function: sin_plus_square, sum:K or product:K.
    #[arg(long, default_value = "sin_plus_square")]
    function: String,
    /// Noise level for functional data.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Correlation matrix, rows separated by ';', entries by ','.
    #[arg(long)]
    correlation: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 16)]
    quad_order: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Numeric(String),
    Suite,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn emit(output: Option<&Path>, text: &str) -> io::Result<()> {
    match output {
        Some(path) => {
            let mut f = File::create(path)?;
            writeln!(f, "{text}")
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("COPDEP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        input_err(format!(
            "COPDEP_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(e.to_string()))
}

/// Column order `u ++ v` and the split on it. Without selectors every
/// column is used with the last as target; with only one block given the
/// other block is the remaining columns.
fn select_columns(table: &Table, cols: &ColumnArgs) -> Result<(Vec<usize>, GroupSplit), Failure> {
    let resolve = |sel: &[String]| -> Result<Vec<usize>, Failure> {
        sel.iter()
            .map(|s| table.resolve(s).map_err(Failure::from))
            .collect()
    };
    let all: Vec<usize> = (0..table.n_cols()).collect();
    let rest = |taken: &[usize]| {
        all.iter()
            .copied()
            .filter(|c| !taken.contains(c))
            .collect::<Vec<_>>()
    };
    let (u, v) = match (cols.u_cols.is_empty(), cols.v_cols.is_empty()) {
        (true, true) => {
            if table.n_cols() < 2 {
                return Err(input_err("need at least two columns"));
            }
            (all[..all.len() - 1].to_vec(), vec![all[all.len() - 1]])
        }
        (true, false) => {
            let v = resolve(&cols.v_cols)?;
            (rest(&v), v)
        }
        (false, true) => {
            let u = resolve(&cols.u_cols)?;
            (u.clone(), rest(&u))
        }
        (false, false) => (resolve(&cols.u_cols)?, resolve(&cols.v_cols)?),
    };
    let order: Vec<usize> = u.iter().chain(&v).copied().collect();
    let split = GroupSplit::new(
        (0..u.len()).collect(),
        (u.len()..order.len()).collect(),
        order.len(),
    )?;
    Ok((order, split))
}

fn column_name(table: &Table, order: &[usize], c: usize) -> String {
    let original = order.get(c).copied().unwrap_or(c);
    match &table.headers {
        Some(h) => format!("{original} ('{}')", h[original]),
        None => original.to_string(),
    }
}

struct Fitted {
    copula: CheckerboardCopula,
    split: GroupSplit,
    n_rows: usize,
    ties: usize,
}

fn fit_table(path: &Path, cols: &ColumnArgs, res: &ResolutionArgs) -> Result<Fitted, Failure> {
    let table = read_table_file(path)?;
    if table.n_rows() == 0 {
        return Err(Failure::from(Error::InsufficientData(format!(
            "{} has no data rows",
            path.display()
        ))));
    }
    let (order, split) = select_columns(&table, cols)?;
    let selected = table.select(&order);
    let pseudo = pseudo_observations(&selected.columns).map_err(|e| match e {
        Error::InvalidData { column, message } => input_err(format!(
            "invalid data in column {}: {message}",
            column_name(&table, &order, column)
        )),
        other => other.into(),
    })?;
    let policy = res.policy();
    let resolutions = choose_resolution(pseudo.n_rows(), pseudo.n_cols(), &policy)?;
    let copula = fit_checkerboard_with(&pseudo, &resolutions, &policy)?;
    Ok(Fitted {
        copula,
        split,
        n_rows: pseudo.n_rows(),
        ties: pseudo.tie_count(),
    })
}

fn cmd_estimate(args: &EstimateArgs) -> CmdResult {
    let fitted = fit_table(&args.input, &args.columns, &args.resolution)?;
    let diagnostics = fitted.copula.validate();
    let mode = match args.resolution.policy().mode {
        ResolutionMode::Fixed(_) => "fixed",
        ResolutionMode::Automatic => "automatic",
    };
    eprintln!(
        "fitted {} rows at resolution {:?} ({mode}), {} ties broken; {}",
        fitted.n_rows,
        fitted.copula.resolutions(),
        fitted.ties,
        diagnostics
    );
    match &args.output {
        Some(path) => {
            write_copula(path, &fitted.copula)?;
            let summary = json!({
                "output": path.display().to_string(),
                "resolutions": fitted.copula.resolutions(),
                "sample_size": fitted.n_rows,
                "ties": fitted.ties,
                "diagnostics": diagnostics,
            });
            emit(None, &summary.to_string())?;
        }
        None => emit(None, &copula_to_json(&fitted.copula)?)?,
    }
    if diagnostics.pass {
        Ok(())
    } else {
        Err(Failure::Numeric("fitted copula failed validation".into()))
    }
}

fn is_copula_file(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn copula_split(copula: &CheckerboardCopula, cols: &ColumnArgs) -> Result<GroupSplit, Failure> {
    let parse = |sel: &[String]| -> Result<Vec<usize>, Failure> {
        sel.iter()
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| input_err(format!("copula axes are selected by index, got '{s}'")))
            })
            .collect()
    };
    let d = copula.dims();
    let rest = |taken: &[usize]| (0..d).filter(|c| !taken.contains(c)).collect::<Vec<_>>();
    let (u, v) = match (cols.u_cols.is_empty(), cols.v_cols.is_empty()) {
        (true, true) => return Ok(GroupSplit::last_as_target(d)?),
        (true, false) => {
            let v = parse(&cols.v_cols)?;
            (rest(&v), v)
        }
        (false, true) => {
            let u = parse(&cols.u_cols)?;
            (u.clone(), rest(&u))
        }
        (false, false) => (parse(&cols.u_cols)?, parse(&cols.v_cols)?),
    };
    Ok(GroupSplit::new(u, v, d)?)
}

fn cmd_measure(args: &MeasureArgs) -> CmdResult {
    let mut kind = MeasureKind::from_tag(&args.kind, args.alpha)?;
    if args.normalize {
        kind = match kind {
            MeasureKind::GroupTau | MeasureKind::GroupTauNormalized => {
                MeasureKind::GroupTauNormalized
            }
            other => {
                return Err(input_err(format!(
                    "--normalize applies to group_tau, not {}",
                    other.tag()
                )))
            }
        };
    }
    let (copula, split, sample_size) = if is_copula_file(&args.input) {
        let c = read_copula(&args.input)?;
        let s = copula_split(&c, &args.columns)?;
        (c, s, None)
    } else {
        let f = fit_table(&args.input, &args.columns, &args.resolution)?;
        (f.copula, f.split, Some(f.n_rows))
    };
    let opts = MeasureOptions {
        quad_order: args.quad_order,
    };
    let mut report = measure(&copula, &split, kind, &opts)?;
    report.sample_size = sample_size;
    eprintln!(
        "{} of {:?} on {:?}: {}",
        report.kind,
        split.v_axes(),
        split.u_axes(),
        report.value
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.output.as_deref(), &report.to_json())?;
    Ok(())
}

fn cmd_star(args: &StarArgs) -> CmdResult {
    let [a_path, b_path] = args.input.as_slice() else {
        return Err(input_err("star needs exactly two --input operands"));
    };
    let a = read_copula(a_path)?;
    let b = read_copula(b_path)?;
    let n = args.s_dims.unwrap_or(a.dims() / 2);
    let compat = compatibility_check(&a, &b, n)?;
    eprintln!(
        "shared-block discrepancy {:.3e} ({})",
        compat.max_discrepancy,
        if compat.pass {
            "compatible"
        } else {
            "incompatible"
        }
    );
    let product = star(&a, &b, n)?;
    match &args.output {
        Some(path) => {
            write_copula(path, &product)?;
            let summary = json!({
                "output": path.display().to_string(),
                "resolutions": product.resolutions(),
                "compatibility": compat,
                "diagnostics": product.validate(),
            });
            emit(None, &summary.to_string())?;
        }
        None => emit(None, &copula_to_json(&product)?)?,
    }
    Ok(())
}

fn parse_correlation(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| input_err(format!("bad correlation entry '{x}'")))
                })
                .collect()
        })
        .collect()
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let model = match args.model {
        ModelTag::Independent => SynthModel::Independent { dims: args.dims },
        ModelTag::Comonotone => SynthModel::Comonotone { dims: args.dims },
        ModelTag::Mixture => SynthModel::Mixture { theta: args.theta },
        ModelTag::Functional => SynthModel::Functional {
            function: TargetFunction::parse(&args.function)?,
            sigma: args.sigma,
        },
        ModelTag::Gaussian => {
            let text = args
                .correlation
                .as_deref()
                .ok_or_else(|| input_err("gaussian data needs --correlation"))?;
            SynthModel::Gaussian {
                correlation: parse_correlation(text)?,
            }
        }
        ModelTag::SquareLaw => SynthModel::SquareLaw,
    };
    let table = generate(&model, args.rows, args.seed)?;
    let headers = table.headers.clone().unwrap_or_default();
    match &args.output {
        Some(path) => write_table(BufWriter::new(File::create(path)?), &headers, &table.rows())?,
        None => write_table(io::stdout().lock(), &headers, &table.rows())?,
    }
    eprintln!(
        "generated {} rows x {} columns (seed {})",
        args.rows,
        table.n_cols(),
        args.seed
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let suite: Suite = args.suite.parse()?;
    let opts = MeasureOptions {
        quad_order: args.quad_order,
    };
    let report = run_suite(suite, args.seed, args.trials, &opts)?;
    for p in &report.properties {
        eprintln!(
            "{} {}: {}",
            if p.pass { "PASS" } else { "FAIL" },
            p.name,
            p.detail
        );
    }
    let text = serde_json::to_string(&report).map_err(|e| Failure::Numeric(e.to_string()))?;
    emit(args.output.as_deref(), &text)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Suite)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Star(a) => cmd_star(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Suite) => {
            eprintln!("error: property suite failed");
            ExitCode::from(EXIT_SUITE)
        }
    }
}
