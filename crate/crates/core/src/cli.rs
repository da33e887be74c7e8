//! The `cairo-air` command line. Exit codes: 0 success, 1 domain failure
//! (execution error, violations, failed extraction), 2 malformed input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::constraints::VerifyOptions;
use crate::corpus;
use crate::extract::{soundness_check_with, SoundnessOutcome};
use crate::field::Field;
use crate::fuzz::{fuzz, FuzzConfig, MutationKind};
use crate::interaction::{ChallengeOracle, Challenges, Sha256Oracle};
use crate::io::{self, ChallengeRecord, ColumnsFile, IoError, ProgramFile, StatementFile, WitnessFile};
use crate::isa::exec::{run_until_halt, run_with_deduction};
use crate::program::{Program, DEFAULT_MAX_STEPS};
use crate::prove::{claimed, prove_program, rederive, verify_proof_with};
use crate::trace::{ColumnSet, PublicStatement};

#[derive(Debug, Parser)]
#[command(name = "cairo-air", version, about = "Cairo machine semantics and its AIR over a runtime prime field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a program and write its register trace.
    Run(RunArgs),
    /// Execute, pad, and write the statement and column set.
    Prove(ProveArgs),
    /// Check a statement and column set against every constraint.
    Verify(VerifyArgs),
    /// Reconstruct memory and the register trace from satisfying columns.
    Extract(CheckArgs),
    /// Mutate single cells and classify the outcome of each mutation.
    Fuzz(FuzzArgs),
    /// Write one of the built-in sample programs.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Program file: initial registers, memory and optional public memory.
    pub program: PathBuf,
    /// `goldilocks`, `cairo`, or a decimal prime.
    #[arg(long, default_value = "goldilocks")]
    pub modulus: String,
    /// Number of steps; without it the program runs to its final `jmp rel 0`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fill memory cells the program writes instead of requiring them.
    #[arg(long)]
    pub deduce: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProveArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    /// Directory receiving `statement.json` and `columns.json`.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub statement: PathBuf,
    pub columns: PathBuf,
    #[arg(long)]
    pub fail_fast: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    pub statement: PathBuf,
    pub columns: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub iters: u64,
    #[arg(long, value_enum, default_value_t = MutationKind::Committed)]
    pub kind: MutationKind,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// One of straight_line, countdown, fibonacci, ap_advance, halt, mul.
    pub name: String,
    #[arg(long, default_value = "goldilocks")]
    pub modulus: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failed command: message and exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn domain(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn format(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        format(e)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| format(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(format)?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| domain(format!("{}: {e}", p.display()))),
        None => {
            // a closed pipe is not an error for a reader like `head`
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn load_program(a: &ProgramArgs) -> Result<(Field, Program), Failure> {
    let field = io::parse_modulus(&a.modulus)?;
    let file: ProgramFile = read_json(&a.program)?;
    Ok((field, file.into_program(field)?))
}

fn load_proof(statement: &Path, columns: &Path) -> Result<(PublicStatement, ColumnSet), Failure> {
    let s: StatementFile = read_json(statement)?;
    let c: ColumnsFile = read_json(columns)?;
    Ok((s.into_statement()?, c.into_columns()?))
}

fn cmd_run(a: &RunArgs) -> Result<(), Failure> {
    let (_, mut p) = load_program(&a.program)?;
    let init = p.init();
    let trace = match (a.program.deduce, a.program.steps) {
        (false, steps) => p.run(steps),
        (true, Some(t)) => run_with_deduction(&mut p.memory, init, t),
        (true, None) => run_until_halt(&mut p.memory, init, DEFAULT_MAX_STEPS),
    }
    .map_err(domain)?;
    write_json(&io::trace_to_json(&trace), a.output.as_deref())
}

fn cmd_prove(a: &ProveArgs) -> Result<(), Failure> {
    let (_, mut p) = load_program(&a.program)?;
    if a.program.deduce {
        p.complete_memory(a.program.steps.unwrap_or(DEFAULT_MAX_STEPS)).map_err(domain)?;
    }
    let (_, proof) = prove_program(&p, a.program.steps, &Sha256Oracle).map_err(domain)?;
    fs::create_dir_all(&a.output).map_err(|e| domain(format!("{}: {e}", a.output.display())))?;
    let sp = a.output.join("statement.json");
    let cp = a.output.join("columns.json");
    write_json(&StatementFile::from_statement(&proof.statement, Some(&proof.transcript)), Some(&sp))?;
    write_json(&ColumnsFile::from_columns(&proof.columns), Some(&cp))?;
    println!("{}\n{}", sp.display(), cp.display());
    Ok(())
}

fn opts(fail_fast: bool) -> VerifyOptions {
    VerifyOptions { fail_fast, ..VerifyOptions::default() }
}

fn mismatch(claimed: &Challenges, derived: &Challenges) -> Failure {
    let c = serde_json::to_string(&ChallengeRecord::from(claimed)).unwrap_or_default();
    let d = serde_json::to_string(&ChallengeRecord::from(derived)).unwrap_or_default();
    domain(format!("challenge mismatch: statement claims {c}, committed data gives {d}"))
}

fn check_challenges(stmt: &PublicStatement, cols: &ColumnSet, oracle: &dyn ChallengeOracle) -> Result<(), Failure> {
    let derived = rederive(stmt, cols, oracle);
    if derived != claimed(stmt) {
        return Err(mismatch(&claimed(stmt), &derived));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let c = &a.check;
    let (stmt, cols) = load_proof(&c.statement, &c.columns)?;
    let verdict = verify_proof_with(&stmt, &cols, &Sha256Oracle, &opts(c.fail_fast)).map_err(format)?;
    write_json(&verdict.report, c.output.as_deref())?;
    let mut parts = Vec::new();
    if let Some((claimed, derived)) = &verdict.challenge_mismatch {
        parts.push(mismatch(claimed, derived).message);
    }
    if let Some(v) = verdict.report.violations.first() {
        parts.push(format!(
            "{} violation(s); first: {}.{} at row {}",
            verdict.report.len(),
            v.group.name(),
            v.name,
            v.row
        ));
    }
    if !parts.is_empty() {
        return Err(domain(parts.join("; ")));
    }
    Ok(())
}

fn cmd_extract(a: &CheckArgs) -> Result<(), Failure> {
    let (stmt, cols) = load_proof(&a.statement, &a.columns)?;
    crate::constraints::check_format(&stmt, &cols).map_err(format)?;
    check_challenges(&stmt, &cols, &Sha256Oracle)?;
    match soundness_check_with(&stmt, &cols, &opts(a.fail_fast)).map_err(format)? {
        SoundnessOutcome::Witness(w) => write_json(&WitnessFile::from_witness(&w), a.output.as_deref()),
        SoundnessOutcome::Violations(r) => {
            write_json(&r, a.output.as_deref())?;
            Err(domain(format!("{} constraint violation(s); no witness extracted", r.len())))
        }
        SoundnessOutcome::SemanticFailure(e) => Err(domain(format!("constraints hold but {} check failed: {e}", e.kind()))),
    }
}

fn cmd_fuzz(a: &FuzzArgs) -> Result<(), Failure> {
    let (stmt, cols) = load_proof(&a.statement, &a.columns)?;
    let cfg = FuzzConfig { seed: a.seed, iterations: a.iters, kind: a.kind };
    let stats = fuzz(&stmt, &cols, &Sha256Oracle, &cfg).map_err(format)?;
    write_json(&stats, a.output.as_deref())?;
    if stats.semantic_failure > 0 {
        return Err(domain(format!("{} mutation(s) passed every constraint but failed re-validation", stats.semantic_failure)));
    }
    Ok(())
}

fn cmd_corpus(a: &CorpusArgs) -> Result<(), Failure> {
    let field = io::parse_modulus(&a.modulus)?;
    let p = corpus::build(&a.name, field)
        .ok_or_else(|| format(format!("unknown program {:?}; known: {}", a.name, corpus::NAMES.join(", "))))?
        .map_err(domain)?;
    write_json(&ProgramFile::from_program(&p), a.output.as_deref())
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Prove(a) => cmd_prove(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Corpus(a) => cmd_corpus(a),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
