//! The `tripwalk` command line.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 a bound violated or a
//! simulation inconsistent with the exact value, 3 a solver failure.
//! Every error is a single stderr line `error:<kind>:<detail>`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tripwalk::bounds::DEFAULT_REPORT_CAP;
use tripwalk::exact::{excursion_stats, expected_hitting_time, greens_matrix};
use tripwalk::generators::{self, Boundary, GridSpec};
use tripwalk::monte_carlo::{
    self, compare, SimConfig, DEFAULT_CAP, DEFAULT_CONFIDENCE, DEFAULT_PATHS,
};
use tripwalk::{document, validate_absorption, BoundsContext, Chain, Class, Partition, Verdict};

pub mod render;

pub use render::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Header of the `bounds` CSV output.
pub const BOUNDS_HEADER: [&str; 11] = [
    "quantity",
    "class_pair",
    "x",
    "y",
    "lower",
    "exact",
    "upper",
    "slack_lower",
    "slack_upper",
    "tight",
    "vacuous",
];

#[derive(Debug, Parser)]
#[command(
    name = "tripwalk",
    version,
    about = "Exact and simulated excursion analysis of A/B/C-partitioned random walks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a chain document and that C is reachable from A and B.
    Validate(InputArgs),
    /// Excursion statistics and expected hitting times per state.
    Analyze(ReportArgs),
    /// Evaluate every bound against its exact value.
    Bounds(BoundsArgs),
    /// Monte Carlo estimates per state of A and B.
    Simulate(SimArgs),
    /// Monte Carlo estimates checked against the exact values.
    Compare(CompareArgs),
    /// Write a generated chain document.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Chain document (JSON).
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Largest |A ∪ B| for a full report.
    #[arg(long, default_value_t = DEFAULT_REPORT_CAP)]
    pub report_cap: usize,
    /// Report a seeded sample of this many pairs instead of all of them.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed for `--sample`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    pub n_paths: usize,
    /// Step cap per path.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    /// Restrict to these starting states (repeatable). Defaults to A ∪ B.
    #[arg(long = "state")]
    pub states: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Standard errors allowed between estimate and exact value.
    #[arg(long, default_value_t = 3.0)]
    pub z: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub family: Family,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Reflecting,
    Sticky,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long)]
    pub inner_radius: usize,
    #[arg(long)]
    pub outer_radius: usize,
    /// Probability of staying put.
    #[arg(long, default_value_t = 0.0)]
    pub laziness: f64,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            laziness: self.laziness,
            ..GridSpec::new(
                self.width,
                self.height,
                self.inner_radius,
                self.outer_radius,
            )
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// The three-state fixture.
    Triad,
    /// Nearest-neighbour walk on 0..n.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p_right: f64,
        #[arg(long, value_delimiter = ',')]
        a: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        c: Vec<usize>,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Reflecting)]
        boundary: BoundaryArg,
    },
    /// Grid walk with a separating ring.
    Grid(GridArgs),
    /// Grid walk whose ring has `gap` cells moved to B.
    Punctured {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        gap: usize,
    },
    /// Seeded random chain.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that an entry of an A or B row is zero.
        #[arg(long, default_value_t = 0.5)]
        sparsity: f64,
        /// Class fractions A,B,C.
        #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.3, 0.3])]
        fractions: Vec<f64>,
    },
}

/// A failure carrying its exit code and machine-readable kind.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: String,
    detail: String,
}

impl From<tripwalk::Error> for Failure {
    fn from(e: tripwalk::Error) -> Self {
        let code = if e.is_solver_failure() {
            EXIT_SOLVER
        } else {
            EXIT_INPUT
        };
        Failure {
            code,
            kind: e.kind().to_string(),
            detail: e.to_string(),
        }
    }
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            kind: "io".into(),
            detail: format!("{}: {e}", path.display()),
        }
    }
}

/// What a command produced: text for stdout (or `--output`) and an exit
/// code with an optional error line.
struct Outcome {
    text: String,
    failure: Option<Failure>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome {
            text,
            failure: None,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let detail = message.join(" ");
            let _ = writeln!(
                stderr,
                "error:usage:{}",
                detail.trim_start_matches("error: ")
            );
            return EXIT_INPUT;
        }
    };
    let (result, output) = match &cli.command {
        Command::Validate(a) => (validate(a), None),
        Command::Analyze(a) => (analyze(a), a.out.output.as_deref()),
        Command::Bounds(a) => (bounds(a), a.out.output.as_deref()),
        Command::Simulate(a) => (simulate(a), a.out.output.as_deref()),
        Command::Compare(a) => (compare_cmd(a), a.sim.out.output.as_deref()),
        Command::Generate(a) => (generate(a), a.output.as_deref()),
    };
    let outcome = result.unwrap_or_else(|f| Outcome {
        text: String::new(),
        failure: Some(f),
    });
    if !outcome.text.is_empty() {
        let written = match output {
            Some(path) => std::fs::write(path, &outcome.text).map_err(|e| Failure::io(path, e)),
            None => stdout
                .write_all(outcome.text.as_bytes())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
        };
        if let Err(f) = written {
            let _ = writeln!(stderr, "error:{}:{}", f.kind, f.detail);
            return f.code;
        }
    }
    match outcome.failure {
        Some(f) => {
            let _ = writeln!(stderr, "error:{}:{}", f.kind, f.detail);
            f.code
        }
        None => EXIT_OK,
    }
}

fn load(input: &InputArgs) -> Result<(Chain, Partition), Failure> {
    let text = std::fs::read_to_string(&input.input).map_err(|e| Failure::io(&input.input, e))?;
    Ok(document::load(&text)?)
}

fn load_validated(input: &InputArgs) -> Result<(Chain, Partition), Failure> {
    let (chain, partition) = load(input)?;
    tripwalk::chain::require_absorption(&chain, &partition)?;
    Ok((chain, partition))
}

fn validate(args: &InputArgs) -> Result<Outcome, Failure> {
    let (chain, partition) = load(args)?;
    let report = validate_absorption(&chain, &partition);
    if !report.ok {
        let labels: Vec<String> = report
            .offending_states
            .iter()
            .map(|&s| chain.label(s).to_string())
            .collect();
        return Err(tripwalk::Error::Unreachable(labels).into());
    }
    Ok(Outcome::ok(format!(
        "ok: {} states, |A| = {}, |B| = {}, |C| = {}, {} transitions\n",
        chain.len(),
        partition.a().len(),
        partition.b().len(),
        partition.c().len(),
        chain.nnz()
    )))
}

fn analyze(args: &ReportArgs) -> Result<Outcome, Failure> {
    let (chain, partition) = load_validated(&args.input)?;
    let stats = excursion_stats(&chain, &partition)?;
    let to_c = expected_hitting_time(&chain, partition.c())?;
    let green = greens_matrix(&chain, &partition.transient())?;
    let mut table = Table::new(&[
        "state",
        "class",
        "reach",
        "round_trip",
        "exit_time",
        "time_to_c",
        "green_diag",
    ]);
    for x in partition.transient().iter() {
        let (reach, round) = match partition.class_of(x) {
            Class::A => (stats.psi[&x], stats.rho[&x]),
            _ => (stats.sigma[&x], stats.phi[&x]),
        };
        table.push(vec![
            chain.label(x).into(),
            partition.class_of(x).to_string().into(),
            reach.into(),
            round.into(),
            stats.exit_time[&x].into(),
            to_c.get(x).into(),
            green.get(x, x).into(),
        ]);
    }
    let mut text = table.render(args.out.format);
    if args.out.format == Format::Table {
        text += &format!(
            "\npsi = {:.10}  sigma = {:.10}  f_A = {:.10}  f_B = {:.10}\n",
            stats.psi_sup, stats.sigma_sup, stats.f_a, stats.f_b
        );
    }
    Ok(Outcome::ok(text))
}

/// Renders bound reports in the fixed column layout.
pub fn bounds_table(chain: &Chain, rows: &[tripwalk::BoundReport]) -> Table {
    let mut table = Table::new(&BOUNDS_HEADER);
    for r in rows {
        table.push(vec![
            r.quantity.as_str().into(),
            r.class_pair.as_str().into(),
            chain.label(r.x).into(),
            r.y.map(|y| chain.label(y).to_string())
                .unwrap_or_default()
                .into(),
            r.lower.into(),
            r.exact.into(),
            r.upper.into(),
            r.slack_lower.into(),
            r.slack_upper.into(),
            r.tight.into(),
            r.vacuous.into(),
        ]);
    }
    table
}

fn bounds(args: &BoundsArgs) -> Result<Outcome, Failure> {
    let (chain, partition) = load_validated(&args.input)?;
    let ctx = BoundsContext::new(&chain, &partition)?;
    let report = match args.sample {
        Some(count) => ctx.sampled_report(count, args.seed)?,
        None => ctx.full_report(args.report_cap)?,
    };
    let rows = report.rows();
    let text = bounds_table(&chain, &rows).render(args.out.format);
    let violations = report.violations();
    let failure = (violations > 0).then(|| Failure {
        code: EXIT_VIOLATION,
        kind: "violation".into(),
        detail: format!(
            "{violations} of {} reports fall outside their bounds",
            rows.len()
        ),
    });
    Ok(Outcome { text, failure })
}

/// One simulated quantity from one starting state.
struct Estimate {
    quantity: &'static str,
    x: usize,
    exact: Option<f64>,
    estimate: tripwalk::SimulationEstimate,
}

fn config(args: &SimArgs) -> Result<SimConfig, Failure> {
    let cfg = SimConfig {
        n_paths: args.n_paths,
        seed: args.seed,
        cap: args.cap,
        confidence_level: args.confidence,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn starts(args: &SimArgs, chain: &Chain, partition: &Partition) -> Result<Vec<usize>, Failure> {
    if args.states.is_empty() {
        return Ok(partition.transient().as_slice().to_vec());
    }
    args.states
        .iter()
        .map(|label| {
            let x = chain.index_of(label)?;
            if partition.class_of(x) == Class::C {
                return Err(tripwalk::Error::PartitionClass {
                    state: label.clone(),
                    found: 'C',
                    expected: "A or B",
                }
                .into());
            }
            Ok(x)
        })
        .collect()
}

/// For each start: visits to itself before C, `T_C`, and the two excursion
/// events. Every estimate uses the same seed; the path index selects the
/// stream.
fn estimates(args: &SimArgs, with_exact: bool) -> Result<(Chain, Vec<Estimate>), Failure> {
    let (chain, partition) = load_validated(&args.input)?;
    let cfg = config(args)?;
    let xs = starts(args, &chain, &partition)?;
    let transient = partition.transient();
    let exact = if with_exact {
        Some((
            excursion_stats(&chain, &partition)?,
            expected_hitting_time(&chain, partition.c())?,
            greens_matrix(&chain, &transient)?,
        ))
    } else {
        None
    };
    let mut out = Vec::with_capacity(4 * xs.len());
    for x in xs {
        let in_a = partition.class_of(x) == Class::A;
        let green = monte_carlo::estimate_green(&chain, &transient, x, x, &cfg)?;
        let time = monte_carlo::estimate_hitting_time(&chain, partition.c(), x, &cfg)?;
        let events = monte_carlo::estimate_excursion_events(&chain, &partition, x, &cfg)?;
        let values = exact.as_ref().map(|(s, t, g)| {
            let (reach, round) = if in_a {
                (s.psi[&x], s.rho[&x])
            } else {
                (s.sigma[&x], s.phi[&x])
            };
            [g.get(x, x), t.get(x), reach, round]
        });
        let names = if in_a {
            ["green", "hitting_time", "psi", "rho"]
        } else {
            ["green", "hitting_time", "sigma", "phi"]
        };
        for (k, estimate) in [green, time, events.reach, events.round_trip]
            .into_iter()
            .enumerate()
        {
            out.push(Estimate {
                quantity: names[k],
                x,
                exact: values.map(|v| v[k]),
                estimate,
            });
        }
    }
    Ok((chain, out))
}

const SIM_HEADER: [&str; 10] = [
    "quantity",
    "x",
    "mean",
    "ci_low",
    "ci_high",
    "n_paths",
    "n_truncated",
    "seed",
    "confidence",
    "warning",
];

fn sim_cells(chain: &Chain, e: &Estimate) -> Vec<Cell> {
    let s = &e.estimate;
    vec![
        e.quantity.into(),
        chain.label(e.x).into(),
        s.mean.into(),
        s.lower().into(),
        s.upper().into(),
        s.n_paths.into(),
        s.n_truncated.into(),
        Cell::Text(s.seed.to_string()),
        s.confidence_level.into(),
        s.warning
            .map(|w| format!("truncated {:.4}%", 100.0 * w.fraction))
            .unwrap_or_default()
            .into(),
    ]
}

fn simulate(args: &SimArgs) -> Result<Outcome, Failure> {
    let (chain, rows) = estimates(args, false)?;
    let mut table = Table::new(&SIM_HEADER);
    for e in &rows {
        table.push(sim_cells(&chain, e));
    }
    Ok(Outcome::ok(table.render(args.out.format)))
}

fn compare_cmd(args: &CompareArgs) -> Result<Outcome, Failure> {
    if !(args.z > 0.0 && args.z.is_finite()) {
        return Err(
            tripwalk::Error::InvalidArgument(format!("z = {} must be positive", args.z)).into(),
        );
    }
    let (chain, rows) = estimates(&args.sim, true)?;
    let mut header = SIM_HEADER.to_vec();
    header.extend(["exact", "verdict"]);
    let mut table = Table::new(&header);
    let mut inconsistent = 0;
    for e in &rows {
        let exact = e.exact.expect("exact values requested");
        let verdict = compare(exact, &e.estimate, args.z);
        inconsistent += (verdict == Verdict::Inconsistent) as usize;
        let mut cells = sim_cells(&chain, e);
        cells.extend([exact.into(), verdict.as_str().into()]);
        table.push(cells);
    }
    let failure = (inconsistent > 0).then(|| Failure {
        code: EXIT_VIOLATION,
        kind: "inconsistent".into(),
        detail: format!(
            "{inconsistent} of {} estimates disagree with the exact value at z = {}",
            rows.len(),
            args.z
        ),
    });
    Ok(Outcome {
        text: table.render(args.sim.out.format),
        failure,
    })
}

fn generate(args: &GenerateArgs) -> Result<Outcome, Failure> {
    let (chain, partition) = match &args.family {
        Family::Triad => generators::triad(),
        Family::Path {
            n,
            p_right,
            a,
            b,
            c,
            boundary,
        } => {
            let boundary = match boundary {
                BoundaryArg::Reflecting => Boundary::Reflecting,
                BoundaryArg::Sticky => Boundary::Sticky,
            };
            generators::path_chain(*n, *p_right, a, b, c, boundary)?
        }
        Family::Grid(grid) => generators::grid_annulus(&grid.spec())?,
        Family::Punctured { grid, gap } => generators::punctured_annulus(&grid.spec(), *gap)?,
        Family::Random {
            n,
            seed,
            sparsity,
            fractions,
        } => {
            let &[fa, fb, fc] = fractions.as_slice() else {
                return Err(tripwalk::Error::InvalidArgument(format!(
                    "--fractions takes three values, got {}",
                    fractions.len()
                ))
                .into());
            };
            let f = (fa, fb, fc);
            generators::random_chain(*n, *seed, *sparsity, f)?
        }
    };
    Ok(Outcome::ok(document::save(&chain, &partition) + "\n"))
}
