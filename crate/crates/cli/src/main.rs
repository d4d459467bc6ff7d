//! `polynet`: dimensions, bounds and minimal filling searches for polynomial
//! networks.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 resource guard,
//! 4 search budget exhausted (partial payload printed), 5 table mismatch.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polynet::bounds::{bound_report_with_oracle, SegmentBounds};
use polynet::report::{ConfigEcho, DimReport, FillingReport, Payload, ReportEnvelope, SearchReport};
use polynet::search::{check_set_unimodality, find_minimal_filling, SearchSpec};
use polynet::tables::{reproduce_dim_table, reproduce_filling_table, DimTableReport, FillingTableReport};
use polynet::{bound_report, dimension, Architecture, BoundReport, DimensionConfig, Error, Method, PrimeField};

const EXIT_INVALID: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "polynet", version, about = "Dimensions of functional varieties of polynomial networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Jacobian engine.
    #[arg(long, global = true, default_value = "ff-stacked")]
    method: Method,

    /// Independent randomized trials.
    #[arg(long, global = true, default_value_t = polynet::dimension::DEFAULT_TRIALS)]
    trials: usize,

    #[arg(long, global = true, env = "POLYNET_SEED", default_value_t = 0)]
    seed: u64,

    /// `auto` for fresh random primes per trial, or a fixed prime.
    #[arg(long, global = true, default_value = "auto")]
    prime: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Include the deeper, slower table rows; raises the default search budget.
    #[arg(long, global = true)]
    extended: bool,

    /// Maximum number of oracle calls for searches.
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ArchArgs {
    /// Comma-separated widths `d_0,...,d_h`.
    #[arg(long)]
    arch: String,
    /// Activation degree r.
    #[arg(long)]
    degree: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dimension of the functional variety with every bound.
    Dim(ArchArgs),
    /// Filling verdict.
    Filling(ArchArgs),
    /// Closed-form bounds only (no oracle).
    Bounds(ArchArgs),
    /// Minimal filling width vectors for fixed depth and end widths.
    Search {
        /// Number of layers h
        #[arg(long)]
        depth: usize,
        /// Input width
        #[arg(long)]
        d0: usize,
        /// Output width
        #[arg(long)]
        dh: usize,
        /// Activation degree r
        #[arg(long)]
        degree: u32,
    },
    /// Regenerate a reference table and diff it against the expected values.
    Reproduce {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        table: u8,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) | Error::InvalidPrime { .. } | Error::BadPrime { .. } | Error::ShapeMismatch(_) => EXIT_INVALID,
            Error::DegreeOverflow(_) => EXIT_GUARD,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

struct Outcome {
    payload: Payload,
    status: &'static str,
    code: u8,
    text: String,
    csv: Option<String>,
}

impl Cli {
    fn prime(&self) -> Result<Option<u64>, Failure> {
        if self.prime == "auto" {
            return Ok(None);
        }
        let p: u64 = self.prime.parse().map_err(|_| invalid(format!("--prime must be `auto` or an integer, got {:?}", self.prime)))?;
        PrimeField::new(p)?;
        Ok(Some(p))
    }

    fn dim_config(&self) -> Result<DimensionConfig, Failure> {
        Ok(DimensionConfig { method: self.method, trials: self.trials, seed: self.seed, prime: self.prime()?, ..DimensionConfig::default() })
    }

    fn echo(&self) -> Result<ConfigEcho, Failure> {
        let mut echo = ConfigEcho {
            method: self.method.to_string(),
            trials: self.trials,
            seed: self.seed,
            prime: self.prime()?,
            format: format!("{:?}", self.format).to_lowercase(),
            extended: self.extended,
            budget: self.budget,
            ..ConfigEcho::default()
        };
        match &self.command {
            Command::Dim(a) | Command::Filling(a) | Command::Bounds(a) => {
                echo.command = match self.command {
                    Command::Dim(_) => "dim",
                    Command::Filling(_) => "filling",
                    _ => "bounds",
                }
                .into();
                echo.arch = polynet::network::parse_widths(&a.arch).ok();
                echo.degree = Some(a.degree);
            }
            Command::Search { depth, d0, dh, degree } => {
                echo.command = "search".into();
                echo.depth = Some(*depth);
                echo.d0 = Some(*d0);
                echo.dh = Some(*dh);
                echo.degree = Some(*degree);
            }
            Command::Reproduce { table } => {
                echo.command = "reproduce".into();
                echo.table = Some(*table);
            }
        }
        Ok(echo)
    }
}

fn arch_of(a: &ArchArgs, prime: Option<u64>) -> Result<Architecture, Failure> {
    let arch = Architecture::parse(&a.arch, a.degree)?;
    if let Some(p) = prime {
        PrimeField::new(p)?.check_degree(a.degree)?;
    }
    Ok(arch)
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Reproduce { .. }) {
        return Err(invalid("csv output is only available for tables (reproduce)"));
    }
    let config = cli.dim_config()?;
    match &cli.command {
        Command::Dim(a) => {
            let arch = arch_of(a, config.prime)?;
            let estimate = dimension(&arch, &config)?;
            let mut guarded = Vec::new();
            let mut bounds = bound_report_with_oracle(&arch, |sub| match dimension(sub, &config) {
                Ok(e) => Ok(e.dim),
                Err(Error::DegreeOverflow(_)) => {
                    guarded.push(sub.to_string());
                    Ok(SegmentBounds::new(sub).total())
                }
                Err(e) => Err(e),
            })?;
            if !guarded.is_empty() {
                bounds.notes.push(format!("segments beyond the basis guard use closed-form bounds: {}", guarded.join("; ")));
            }
            let text = dim_text(&arch, &estimate, &bounds);
            Ok(Outcome { payload: Payload::Dim(DimReport { estimate, bounds }), status: "ok", code: 0, text, csv: None })
        }
        Command::Filling(a) => {
            let arch = arch_of(a, config.prime)?;
            let estimate = dimension(&arch, &config)?;
            let bounds = bound_report(&arch)?;
            let report = FillingReport {
                widths: arch.widths().to_vec(),
                degree: arch.degree(),
                verdict: estimate.is_filling,
                dim: estimate.dim,
                ambient: estimate.ambient,
                thm2_filling_guaranteed: bounds.thm2_filling_guaranteed,
                bottleneck_hits: bounds.bottleneck_hits,
                estimate,
            };
            let text = format!(
                "architecture {arch}\nfilling {:?} (dim {} of ambient {})\nsufficient-width criterion: {}\n",
                report.verdict, report.dim, report.ambient, report.thm2_filling_guaranteed
            );
            Ok(Outcome { payload: Payload::Filling(report), status: "ok", code: 0, text, csv: None })
        }
        Command::Bounds(a) => {
            let arch = arch_of(a, config.prime)?;
            let report = bound_report(&arch)?;
            let text = format!("architecture {arch}\n{}", bounds_text(&report));
            Ok(Outcome {
                payload: Payload::Bounds { widths: arch.widths().to_vec(), degree: arch.degree(), report },
                status: "ok",
                code: 0,
                text,
                csv: None,
            })
        }
        Command::Search { depth, d0, dh, degree } => {
            let default_budget = if cli.extended { 200_000 } else { 20_000 };
            let spec = SearchSpec {
                budget: cli.budget.unwrap_or(default_budget),
                trials: cli.trials,
                seed: cli.seed,
                method: cli.method,
                ..SearchSpec::new(*depth, *d0, *dh, *degree)
            };
            let set = find_minimal_filling(&spec)?;
            let violations = check_set_unimodality(&set);
            let mut text = format!(
                "minimal filling widths (depth {depth}, d_0 {d0}, d_h {dh}, r {degree}; ambient {}; caps {:?})\n",
                set.ambient, set.caps
            );
            for m in &set.architectures {
                let _ = writeln!(text, "  {:?}  dim {}  {:?}", m.widths, m.dim, m.certification);
            }
            for v in &violations {
                let _ = writeln!(text, "  not unimodal: {:?} (valley at index {})", v.widths, v.index);
            }
            let _ = writeln!(text, "oracle calls {}, bound-pruned {}", set.oracle_calls, set.bound_pruned);
            let (status, code) = if set.partial {
                text.push_str("budget exhausted: result is partial\n");
                ("budget_exceeded", EXIT_BUDGET)
            } else {
                ("ok", 0)
            };
            Ok(Outcome { payload: Payload::Search(SearchReport { set, violations }), status, code, text, csv: None })
        }
        Command::Reproduce { table: 2 } => {
            let report = reproduce_dim_table(cli.method, cli.seed)?;
            let (status, code) = if report.all_match() { ("ok", 0) } else { ("mismatch", EXIT_MISMATCH) };
            let text = dim_table_text(&report);
            let csv = Some(report.table.to_csv());
            Ok(Outcome { payload: Payload::DimTable(report), status, code, text, csv })
        }
        Command::Reproduce { .. } => {
            let report = reproduce_filling_table(cli.extended, cli.method, cli.seed, cli.budget)?;
            let (status, code) = if report.partial() {
                ("budget_exceeded", EXIT_BUDGET)
            } else if report.all_match() {
                ("ok", 0)
            } else {
                ("mismatch", EXIT_MISMATCH)
            };
            let text = filling_table_text(&report);
            let csv = Some(filling_table_csv(&report));
            Ok(Outcome { payload: Payload::FillingTable(report), status, code, text, csv })
        }
    }
}

fn dim_text(arch: &Architecture, e: &polynet::DimensionEstimate, b: &BoundReport) -> String {
    let mut s = format!("architecture {arch}\n");
    let _ = writeln!(s, "dim {}", e.dim);
    let _ = writeln!(s, "filling {:?}", e.is_filling);
    s.push_str(&bounds_text(b));
    let ranks: Vec<String> = e.trials.iter().map(|t| t.rank.to_string()).collect();
    let _ = writeln!(s, "method {} trial ranks [{}]", e.method, ranks.join(", "));
    s
}

fn bounds_text(b: &BoundReport) -> String {
    let mut s = format!("ambient {}\nnaive {}\n", b.ambient, b.naive);
    if let Some(r) = &b.recursive {
        let _ = writeln!(s, "recursive {} ({:?})", r.best, r.mode);
    }
    if let Some(ah) = &b.ah {
        match ah.corrected {
            Some(c) => {
                let _ = writeln!(s, "sums of powers: expected {}, exceptional, actual {c}", ah.expected);
            }
            None => {
                let _ = writeln!(s, "sums of powers: expected {}", ah.expected);
            }
        }
    }
    let _ = writeln!(s, "sufficient widths for filling: {}", b.thm2_filling_guaranteed);
    for n in &b.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn dim_table_text(r: &DimTableReport) -> String {
    let mut s = String::from("widths            r=2  r=3  r=4  r=5  r=6\n");
    for row in &r.table.rows {
        let cells: Vec<String> = row.dims.iter().map(|d| format!("{d:>4}")).collect();
        let _ = writeln!(s, "{:<16} {}", format!("{:?}", row.widths), cells.join(" "));
    }
    for m in &r.mismatches {
        let _ = writeln!(s, "mismatch {:?} r={}: expected {}, computed {}", m.widths, m.degree, m.expected, m.computed);
    }
    let _ = writeln!(s, "{}/{} cells match", r.matched, r.total);
    s
}

fn filling_table_text(r: &FillingTableReport) -> String {
    let mut s = String::new();
    for row in &r.rows {
        let verdict = if row.matches { "match" } else { "MISMATCH" };
        let _ = writeln!(s, "depth {}: {verdict} ({:?}, {} minimal found)", row.depth, row.rule, row.search.architectures.len());
        for w in &row.expected {
            let _ = writeln!(s, "  listed {w:?}{}", if row.missing.contains(w) { " (not found)" } else { "" });
        }
        for w in &row.extra {
            let _ = writeln!(s, "  also minimal {w:?}");
        }
        for v in &row.violations {
            let _ = writeln!(s, "  not unimodal {:?} (valley at index {})", v.widths, v.index);
        }
    }
    s
}

fn filling_table_csv(r: &FillingTableReport) -> String {
    let mut s = String::from("depth,widths,listed,unimodal\n");
    for row in &r.rows {
        for m in &row.search.architectures {
            let w: Vec<String> = m.widths.iter().map(usize::to_string).collect();
            let listed = row.expected.contains(&m.widths);
            let unimodal = !row.violations.iter().any(|v| v.widths == m.widths);
            let _ = writeln!(s, "{},\"({})\",{listed},{unimodal}", row.depth, w.join(","));
        }
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let echo = match cli.echo() {
        Ok(e) => e,
        Err(f) => return fail(f),
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(f) => return fail(f),
    };
    let wall = u64::try_from(start.elapsed().as_micros()).unwrap_or(u64::MAX);
    let envelope = ReportEnvelope::new(echo, outcome.payload, outcome.status, chrono::Utc::now().to_rfc3339(), wall);
    match cli.format {
        Format::Json => println!("{}", envelope.to_json()),
        Format::Csv => print!("{}", outcome.csv.unwrap_or_default()),
        Format::Text => {
            print!("{}", outcome.text);
            println!("seed {}", cli.seed);
            println!("canonical hash {}", envelope.canonical_hash);
        }
    }
    if outcome.code != 0 {
        eprintln!("polynet: {}", outcome.status);
    }
    ExitCode::from(outcome.code)
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("polynet: {}", f.message);
    ExitCode::from(f.code)
}
