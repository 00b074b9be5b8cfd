//! Command-line front end. [`run`] takes the argument list and two output
//! streams and returns the process exit code: 0 for sat/yes/success, 1 for
//! unsat/no, 2 for errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use sacpat::catalog;
use sacpat::instances::{self, GenParams};
use sacpat::matching::occurs;
use sacpat::model::{parse_instance, parse_pattern, serialize_instance, Instance, Pattern};
use sacpat::propagate::{enforce_ac, enforce_sac_parallel, enforce_sac_stats};
use sacpat::solve::{auto_solve, classify, solve_class, SolveReport, SolverClass};
use sacpat::transform::{btp_merge_fixpoint, ns_eliminate};
use sacpat::verify::verify_paper;

#[derive(Debug, Parser)]
#[command(name = "sacpat", version, about = "Forbidden patterns and singleton arc consistency for binary CSPs")]
struct Cli {
    /// Require distinct images for points of the same pattern variable.
    #[arg(long, global = true)]
    strict_points: bool,
    /// Worker threads for SAC probes and batch checks.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide an instance and optionally print a solution.
    Solve(SolveArgs),
    /// Test whether a pattern occurs in an instance.
    Occurs(OccursArgs),
    /// Report which catalog patterns occur and which solvers apply.
    Classify { file: PathBuf },
    /// Apply a reduction and print the resulting instance.
    Preprocess(PreprocessArgs),
    /// Write a generated instance.
    Gen(GenArgs),
    /// Recompute the counterexample and catalog facts.
    VerifyPaper,
    /// List the pattern catalog.
    Patterns,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Solver to run; `auto` picks the first class the instance belongs to.
    #[arg(long, default_value = "auto")]
    class: String,
    /// Print the solution as `x<i>=<v>` lines.
    #[arg(long)]
    construct: bool,
    /// Build the R5 certificate by deleting and repairing constraints.
    #[arg(long)]
    repair: bool,
    /// Print the arc consistency trace of the input.
    #[arg(long)]
    trace: bool,
    file: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("pattern_source").required(true).args(["pattern", "pattern_file"])))]
struct OccursArgs {
    /// Catalog pattern name.
    #[arg(long)]
    pattern: Option<String>,
    /// Pattern document.
    #[arg(long)]
    pattern_file: Option<PathBuf>,
    file: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduction {
    Ac,
    Sac,
    Ns,
    Btp,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("reduction").required(true).args(["ac", "sac", "ns", "btp"])))]
struct PreprocessArgs {
    #[arg(long)]
    ac: bool,
    #[arg(long)]
    sac: bool,
    /// Remove neighbourhood-substitutable values.
    #[arg(long)]
    ns: bool,
    /// BTP-merge values until none can be merged.
    #[arg(long)]
    btp: bool,
    /// Append the removal trace or transformation log as comment lines.
    #[arg(long)]
    log: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
    file: PathBuf,
}

impl PreprocessArgs {
    fn reduction(&self) -> Reduction {
        match (self.ac, self.sac, self.ns) {
            (true, _, _) => Reduction::Ac,
            (_, true, _) => Reduction::Sac,
            (_, _, true) => Reduction::Ns,
            _ => Reduction::Btp,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// q-colouring of the complete graph on n vertices.
    Kcol { n: usize, q: usize },
    /// K4 3-colouring with colour-indexed auxiliary variables.
    I34,
    /// 4-colouring of the complete graph on 5 vertices, alternative encoding.
    I5,
    /// Uniform random instance.
    Random(RandomArgs),
    /// Pattern-free random instance by rejection sampling.
    PatternFree {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value_t = 1000)]
        max_tries: usize,
        #[command(flatten)]
        params: RandomArgs,
    },
    /// Boolean implication gadget encoding K4 3-colouring.
    Gadget {
        #[arg(long)]
        biconditional: bool,
    },
    /// Replace every constraint by a path of k equalities.
    Pad {
        #[arg(long)]
        k: usize,
        file: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0.5)]
    tightness: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RandomArgs {
    fn params(&self) -> GenParams {
        GenParams {
            n_vars: self.n,
            domain_size: self.d,
            constraint_density: self.density,
            tightness: self.tightness,
            seed: self.seed,
        }
    }
}

/// Failure reported on the error stream with exit code 2.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solve(#[from] sacpat::solve::SolveError),
    #[error(transparent)]
    Gen(#[from] instances::GenError),
    #[error(transparent)]
    Catalog(#[from] catalog::UnknownPattern),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn load_pattern(path: &Path) -> Result<Pattern, CliError> {
    parse_pattern(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let strict = cli.strict_points;
    let jobs = usize::from(cli.jobs);
    match &cli.command {
        Command::Solve(a) => solve(a, strict, out, err),
        Command::Occurs(a) => {
            let inst = load_instance(&a.file)?;
            let pat = match (&a.pattern, &a.pattern_file) {
                (Some(name), _) => catalog::get_pattern(name)?.pattern.clone(),
                (None, Some(p)) => load_pattern(p)?,
                (None, None) => unreachable!("clap requires one pattern source"),
            };
            match occurs(&pat, &inst, strict) {
                Some(w) => {
                    writeln!(out, "yes")?;
                    for (i, var) in pat.vars().iter().enumerate() {
                        for (j, p) in var.points.iter().enumerate() {
                            writeln!(out, "{}.{} -> x{}={}", var.name, p, w.var_map[i], w.point_map[i][j])?;
                        }
                    }
                    Ok(0)
                }
                None => {
                    writeln!(out, "no")?;
                    Ok(1)
                }
            }
        }
        Command::Classify { file } => {
            let inst = load_instance(file)?;
            write!(out, "{}", classify(&inst, strict))?;
            Ok(0)
        }
        Command::Preprocess(a) => preprocess(a, jobs, out),
        Command::Gen(a) => {
            let inst = match &a.kind {
                GenKind::Kcol { n, q } => instances::gen_kcoloring(*n, *q),
                GenKind::I34 => instances::gen_i34(),
                GenKind::I5 => instances::gen_i5(),
                GenKind::Random(r) => instances::gen_random(&r.params())?,
                GenKind::PatternFree { pattern, max_tries, params } => {
                    let pat = &catalog::get_pattern(pattern)?.pattern;
                    let (found, tries) =
                        instances::gen_pattern_free_counted(pat, &params.params(), *max_tries, strict)?;
                    found.ok_or_else(|| CliError::Usage(format!("no {pattern}-free instance in {tries} draws")))?
                }
                GenKind::Gadget { biconditional } => instances::gen_implication_gadget(*biconditional),
                GenKind::Pad { k, file } => instances::gen_pad_all(&load_instance(file)?, *k)?,
            };
            emit(&serialize_instance(&inst), a.output.as_deref(), out)?;
            Ok(0)
        }
        Command::VerifyPaper => {
            let report = verify_paper(strict);
            write!(out, "{report}")?;
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Patterns => {
            for e in catalog::list_patterns() {
                writeln!(
                    out,
                    "{:<8} {:<18} monotone={:<3} sac={}",
                    e.name,
                    e.family.to_string(),
                    if e.monotone { "yes" } else { "no" },
                    e.sac_solvable
                )?;
            }
            Ok(0)
        }
    }
}

fn solve(a: &SolveArgs, strict: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let class = if a.class.eq_ignore_ascii_case("auto") {
        None
    } else {
        Some(a.class.parse::<SolverClass>().map_err(CliError::Usage)?)
    };
    if a.repair && class != Some(SolverClass::R5) {
        return Err(CliError::Usage("--repair requires --class r5".into()));
    }
    let inst = load_instance(&a.file)?;
    if strict && class.is_none() {
        writeln!(err, "note: class detection always uses non-strict occurrences")?;
    }
    let report: SolveReport = match class {
        None => auto_solve(&inst),
        Some(c) => solve_class(&inst, c, a.repair)?,
    };
    writeln!(out, "{}", report.status)?;
    if a.construct {
        if let Some(s) = &report.certificate {
            write!(out, "{s}")?;
        }
    }
    if a.trace {
        let (_, trace) = enforce_ac(&inst);
        writeln!(out, "trace")?;
        write!(out, "{trace}")?;
    }
    writeln!(err, "method: {}", report.method)?;
    for n in &report.notes {
        writeln!(err, "note: {n}")?;
    }
    Ok(if report.is_sat() { 0 } else { 1 })
}

fn comment_lines(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}

fn preprocess(a: &PreprocessArgs, jobs: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let inst = load_instance(&a.file)?;
    let (result, log) = match a.reduction() {
        Reduction::Ac => {
            let (r, trace) = enforce_ac(&inst);
            (r, trace.to_string())
        }
        Reduction::Sac => {
            let (r, stats) = if jobs > 1 { enforce_sac_parallel(&inst, jobs) } else { enforce_sac_stats(&inst) };
            (r, format!("probes {}\nremovals {}\n", stats.probes, stats.removals))
        }
        Reduction::Ns => {
            let (r, log) = ns_eliminate(&inst);
            (r, log.to_string())
        }
        Reduction::Btp => {
            let (r, log) = btp_merge_fixpoint(&inst);
            (r, log.to_string())
        }
    };
    let mut text = serialize_instance(&result);
    if a.log {
        text.push_str(&comment_lines(&log));
    }
    emit(&text, a.output.as_deref(), out)?;
    Ok(0)
}
