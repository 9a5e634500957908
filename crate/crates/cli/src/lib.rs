//! The `scanverif` command line: `verify`, `inspect` and `gen`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use scanverif_core::corpus;
use scanverif_core::encoder::{InputBit, InputKind};
use scanverif_core::engines::{
    bmc_cnf, emit_smv, replay_counterexample, verify_all, EngineKind, EngineOptions, Outcome, ReplayReport,
    VerificationCase, DEFAULT_BIT_BUDGET,
};
use scanverif_core::ir::{log2_input_space, typecheck_program, PouKind, Program, Stmt, StmtKind, TypedProgram};
use scanverif_core::manifest::{read_program_file, Prepared};
use scanverif_core::report::{CaseReport, VerificationReport, EXIT_INPUT_ERROR, EXIT_SATISFIED};
use scanverif_core::sat::Limits;

pub const TIMEOUT_ENV: &str = "SCANVERIF_TIMEOUT";
const DEFAULT_TIMEOUT_SECS: f64 = 300.0;

#[derive(Debug, Parser)]
#[command(name = "scanverif", version, about = "Bounded model checking of PLC safety programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every requirement of a manifest.
    Verify(VerifyArgs),
    /// Summarise a program file.
    Inspect(InspectArgs),
    /// Write the demonstration corpus into a directory.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Manifest (TOML). Program sources are resolved relative to it.
    pub manifest: PathBuf,
    /// `bmc` (default) or `explicit`.
    #[arg(long)]
    pub engine: Option<EngineKind>,
    /// Number of scan cycles to unroll.
    #[arg(long)]
    pub bound: Option<usize>,
    /// Directory to write one DIMACS file per case into.
    #[arg(long, value_name = "PATH")]
    pub dump_cnf: Option<PathBuf>,
    /// Directory to write one SMV model per case into.
    #[arg(long, value_name = "PATH")]
    pub emit_smv: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Per-case time limit in seconds. Falls back to the manifest, then to
    /// SCANVERIF_TIMEOUT.
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,
    /// Cases to check in parallel.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

impl VerifyArgs {
    pub fn new(manifest: impl Into<PathBuf>) -> Self {
        VerifyArgs {
            manifest: manifest.into(),
            engine: None,
            bound: None,
            dump_cnf: None,
            emit_smv: None,
            json: None,
            timeout: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Program file (.il/.st or FBD .xml).
    pub program: PathBuf,
    #[arg(long)]
    pub entry: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Output directory.
    pub dir: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Verify(a) => cmd_verify(&a, out, err).map_or(EXIT_INPUT_ERROR, |r| r.exit_code),
        Command::Inspect(a) => cmd_inspect(&a, out, err),
        Command::Gen(a) => cmd_gen(&a, out, err),
    }
}

fn input_error(err: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_INPUT_ERROR
}

fn bit_name(program: &TypedProgram, b: &InputBit) -> String {
    let slot = &program.slots[b.slot].name;
    match b.kind {
        InputKind::Config => format!("{slot}#{}", b.bit),
        _ => format!("{slot}#{}@{}", b.bit, b.cycle),
    }
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

fn write_artifacts(
    dir: &Path,
    ext: &str,
    cases: &[VerificationCase],
    render: &dyn Fn(&VerificationCase) -> Result<String, String>,
) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for c in cases {
        let text = render(c)?;
        let path = dir.join(format!("{}.{ext}", file_stem(&c.id)));
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn resolve_timeout(args: &VerifyArgs, manifest: Option<f64>) -> Result<f64, String> {
    if let Some(t) = args.timeout.or(manifest) {
        return Ok(t);
    }
    match std::env::var(TIMEOUT_ENV) {
        Ok(v) => v.trim().parse::<f64>().map_err(|_| format!("{TIMEOUT_ENV}={v} is not a number of seconds")),
        Err(_) => Ok(DEFAULT_TIMEOUT_SECS),
    }
}

/// Runs a manifest. Input errors are reported on `err` and give `None`;
/// otherwise the report's exit code says how verification went.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Option<VerificationReport> {
    verify_manifest(args, out, err).ok()
}

fn verify_manifest(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<VerificationReport, ()> {
    let fail = |err: &mut dyn Write, m: &dyn std::fmt::Display| {
        input_error(err, m);
    };
    let prepared = Prepared::load(&args.manifest).map_err(|e| fail(err, &e))?;
    let v = &prepared.manifest.verification;
    let engine = match (args.engine, &v.engine) {
        (Some(e), _) => e,
        (None, Some(s)) => s.parse::<EngineKind>().map_err(|e| fail(err, &e))?,
        (None, None) => EngineKind::Bmc,
    };
    if args.bound.or(v.bound) == Some(0) {
        fail(err, &"bound must be at least 1");
        return Err(());
    }
    let timeout = resolve_timeout(args, v.timeout).map_err(|e| fail(err, &e))?;
    if !(timeout.is_finite() && timeout > 0.0) {
        fail(err, &"timeout must be a positive number of seconds");
        return Err(());
    }
    let mut limits = Limits { time: Duration::from_secs_f64(timeout), ..Limits::default() };
    if let Some(c) = v.conflicts {
        limits.conflicts = c;
    }
    let jobs = args.jobs.or(v.jobs).unwrap_or(1);
    let cases = prepared.cases(args.bound);

    if let Some(dir) = &args.dump_cnf {
        let program = &prepared.program;
        write_artifacts(dir, "cnf", &cases, &|c| {
            let (_, cnf) = bmc_cnf(c)?;
            Ok(cnf.to_dimacs(&|b| bit_name(program, b)))
        })
        .map_err(|e| fail(err, &e))?;
    }
    if let Some(dir) = &args.emit_smv {
        write_artifacts(dir, "smv", &cases, &|c| Ok(emit_smv(c))).map_err(|e| fail(err, &e))?;
    }

    let opts = EngineOptions { engine, limits, bit_budget: DEFAULT_BIT_BUDGET };
    let verdicts = verify_all(&cases, &opts, jobs);
    let mut reports = Vec::with_capacity(cases.len());
    for (case, mut verdict) in cases.iter().zip(verdicts) {
        let replay = match &verdict.outcome {
            Outcome::Violated { counterexample } => Some(replay_counterexample(&case.program, counterexample)),
            _ => None,
        };
        if let Some(ReplayReport::Diverged { reason, .. }) = &replay {
            verdict.outcome = Outcome::EngineError { message: format!("counterexample does not replay: {reason}") };
        }
        reports.push(CaseReport::new(&prepared.program, &case.id, case.bound, verdict, replay));
    }
    let report = VerificationReport::new(
        &args.manifest.display().to_string(),
        &prepared.program.entry,
        engine,
        reports,
    );
    let _ = out.write_all(report.to_text().as_bytes());
    if let Some(path) = &args.json {
        std::fs::write(path, report.to_json() + "\n")
            .map_err(|e| fail(err, &format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(report)
}

fn count_stmts(body: &[Stmt]) -> usize {
    body.iter()
        .map(|s| match &s.kind {
            StmtKind::If { branches, else_body } => {
                1 + branches.iter().map(|(_, b)| count_stmts(b)).sum::<usize>() + count_stmts(else_body)
            }
            StmtKind::For { body, .. } => 1 + count_stmts(body),
            StmtKind::Assert(_) => 0,
            _ => 1,
        })
        .sum()
}

/// Inventory of a program; exit 3 when it does not parse or typecheck.
pub fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let program: Program = match read_program_file(&args.program) {
        Ok(mut p) => {
            if args.entry.is_some() {
                p.entry = args.entry.clone();
            }
            p
        }
        Err(e) => return input_error(err, e),
    };
    let typed = match typecheck_program(&program) {
        Ok(t) => t,
        Err(d) => return input_error(err, format!("{}:{d}", args.program.display())),
    };
    let mut text = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(text, "program: {}", args.program.display());
    let _ = writeln!(text, "POUs:");
    for pou in &program.pous {
        let kind = match pou.kind {
            PouKind::Fc => "FUNCTION",
            PouKind::Fb => "FUNCTION_BLOCK",
        };
        let mark = if pou.name == typed.entry { " (entry)" } else { "" };
        let _ = writeln!(text, "  {kind} {}{mark}: {} statements", pou.name, count_stmts(&pou.body));
        let mut by_section: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
        for d in &pou.decls {
            *by_section.entry(d.section.keyword()).or_default().entry(d.dtype.to_string()).or_default() += 1;
        }
        for (section, types) in by_section {
            let total: usize = types.values().sum();
            let detail: Vec<String> = types.iter().map(|(t, n)| format!("{n} {t}")).collect();
            let _ = writeln!(text, "    {section:<12} {total:>4}  ({})", detail.join(", "));
        }
    }
    let _ = writeln!(text, "log2 input space: {}", log2_input_space(&typed));
    let _ = writeln!(text, "assertions: {}", typed.requirements.len());
    for r in &typed.requirements {
        let _ = writeln!(text, "  {}: {}", r.id, r.text);
    }
    let _ = out.write_all(text.as_bytes());
    EXIT_SATISFIED
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match corpus::write_corpus(&args.dir) {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(out, "wrote {}", p.display());
            }
            EXIT_SATISFIED
        }
        Err(e) => input_error(err, format!("cannot write corpus to {}: {e}", args.dir.display())),
    }
}
