//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines are always printed; exits non-zero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use scanverif_cli::{cmd_inspect, cmd_verify, InspectArgs, VerifyArgs};
use scanverif_core::corpus::fbd::{corpus_documents, AND_GATE_XML};
use scanverif_core::corpus::random::random_program;
use scanverif_core::engines::{
    replay_counterexample, unrolled_bits, verify_bmc, verify_explicit, Counterexample, EngineKind, Outcome,
    VerificationCase, DEFAULT_BIT_BUDGET,
};
use scanverif_core::fbd::{infer_interface, lower_to_ir, parse_fbd_xml};
use scanverif_core::il::print_expr;
use scanverif_core::ir::{StmtKind, TypedProgram};
use scanverif_core::manifest::Prepared;
use scanverif_core::report::VerificationReport;
use scanverif_core::sat::Limits;

const SIF_X1_EXPONENT: u64 = 1846;
const SIF_2_EXPONENT: u64 = 305;
const INSPECT_LIMIT: Duration = Duration::from_secs(1);
const SIF_X1_LIMIT: Duration = Duration::from_secs(120);
const PER_CASE_LIMIT: Duration = Duration::from_secs(120);
const RANDOM_PROGRAMS: u64 = 64;
const RANDOM_MAX_BITS: u64 = 20;
const RANDOM_MAX_BOUND: usize = 2;
const CIRCUIT_EVALUATIONS: usize = 10_000;
const TEMPLATE_MAX_CASES: usize = 3;

type Check = Result<String, String>;

/// Violated verdicts seen by any criterion, with the program they refer to.
#[derive(Default)]
struct Collected {
    violations: Vec<(String, TypedProgram, Counterexample)>,
}

impl Collected {
    fn record(&mut self, label: &str, prepared: &Prepared, report: &VerificationReport) {
        let programs: BTreeMap<String, TypedProgram> =
            prepared.cases(None).into_iter().map(|c| (c.id.clone(), c.program)).collect();
        for c in &report.cases {
            if let Outcome::Violated { counterexample } = &c.verdict.outcome {
                self.violations.push((format!("{label}/{}", c.id), programs[&c.id].clone(), counterexample.clone()));
            }
        }
    }
}

fn verify(manifest: &Path, engine: Option<EngineKind>, bound: Option<usize>) -> Result<VerificationReport, String> {
    let mut args = VerifyArgs::new(manifest);
    args.engine = engine;
    args.bound = bound;
    let mut err = Vec::new();
    cmd_verify(&args, &mut std::io::sink(), &mut err).ok_or_else(|| String::from_utf8_lossy(&err).into_owned())
}

fn case_time(c: &scanverif_core::report::CaseReport) -> Duration {
    Duration::from_secs_f64((c.verdict.stats.encode_ms + c.verdict.stats.solve_ms) / 1e3)
}

fn input_space(dir: &Path) -> Check {
    let mut parts = Vec::new();
    for (file, expected) in [("sif_x1.il", SIF_X1_EXPONENT), ("sif2.il", SIF_2_EXPONENT)] {
        let args = InspectArgs { program: dir.join(file), entry: None };
        let mut out = Vec::new();
        let started = Instant::now();
        let code = cmd_inspect(&args, &mut out, &mut std::io::sink());
        let took = started.elapsed();
        let text = String::from_utf8(out).unwrap();
        let got: Option<u64> =
            text.lines().find_map(|l| l.strip_prefix("log2 input space: ")).and_then(|v| v.parse().ok());
        if code != 0 || got != Some(expected) {
            return Err(format!("{file}: exit {code}, exponent {got:?}, expected {expected}"));
        }
        if took >= INSPECT_LIMIT {
            return Err(format!("{file}: took {took:?}"));
        }
        parts.push(format!("{file} 2^{expected} in {:.1} ms", took.as_secs_f64() * 1e3));
    }
    Ok(parts.join(", "))
}

fn sif_x1(dir: &Path, seen: &mut Collected) -> Check {
    let manifest = dir.join("sif_x1.toml");
    let started = Instant::now();
    let report = verify(&manifest, Some(EngineKind::Bmc), Some(1))?;
    let took = started.elapsed();
    seen.record("sif_x1", &Prepared::load(&manifest).unwrap(), &report);
    let satisfied = report.cases.iter().filter(|c| matches!(c.verdict.outcome, Outcome::Satisfied { bound: 1, .. })).count();
    let cex = report.cases.iter().filter(|c| c.table.is_some() || c.replay.is_some()).count();
    if report.cases.len() != 16 || satisfied != 16 || cex != 0 {
        return Err(format!("{} cases, {satisfied} satisfied at K=1, {cex} counterexamples", report.cases.len()));
    }
    if took >= SIF_X1_LIMIT {
        return Err(format!("16 cases satisfied but took {took:?}"));
    }
    Ok(format!("16/16 satisfied at K=1 in {:.2} s", took.as_secs_f64()))
}

fn sif2_defects(dir: &Path, seen: &mut Collected) -> Check {
    let mut parts = Vec::new();
    // (variant, expected class per case in manifest order)
    for (name, expected) in [
        ("sif2", ["satisfied", "satisfied"]),
        ("sif2_missing_spec_var", ["violated", "satisfied"]),
        ("sif2_missing_program_var", ["satisfied", "violated"]),
    ] {
        let manifest = dir.join(format!("{name}.toml"));
        let report = verify(&manifest, Some(EngineKind::Bmc), None)?;
        seen.record(name, &Prepared::load(&manifest).unwrap(), &report);
        let classes: Vec<&str> = report.cases.iter().map(|c| c.verdict.outcome.class()).collect();
        if classes != expected {
            return Err(format!("{name}: {classes:?}, expected {expected:?}"));
        }
        for c in &report.cases {
            if case_time(c) >= PER_CASE_LIMIT {
                return Err(format!("{name}/{}: took {:?}", c.id, case_time(c)));
            }
            if c.verdict.outcome.class() == "violated" {
                match &c.replay {
                    Some(r) if r.is_confirmed() => {}
                    other => return Err(format!("{name}/{}: replay {other:?}", c.id)),
                }
                parts.push(format!("{name}/{} violated, replay confirmed", c.id));
            }
        }
    }
    parts.push("fixed variant satisfied".into());
    Ok(parts.join("; "))
}

fn oracle_equivalence(seen: &mut Collected) -> Check {
    let mut by_class: BTreeMap<&str, usize> = BTreeMap::new();
    for seed in 0..RANDOM_PROGRAMS {
        let r = random_program(seed);
        let p = support::typed_il(&r.source);
        let bits = unrolled_bits(&p, r.bound);
        if bits > RANDOM_MAX_BITS || r.bound > RANDOM_MAX_BOUND {
            return Err(format!("seed {seed}: {bits} bits at K={}", r.bound));
        }
        let case = VerificationCase::new(&p, &p.requirements[0].id, Some(r.bound)).unwrap();
        let e = verify_explicit(&case, DEFAULT_BIT_BUDGET);
        let b = verify_bmc(&case, Limits::default());
        if e.outcome.class() != b.outcome.class() {
            return Err(format!("seed {seed}: explicit {}, bmc {}", e.outcome.class(), b.outcome.class()));
        }
        *by_class.entry(e.outcome.class()).or_default() += 1;
        for (engine, v) in [("explicit", e), ("bmc", b)] {
            if let Outcome::Violated { counterexample } = v.outcome {
                seen.violations.push((format!("random{seed}/{engine}"), case.program.clone(), counterexample));
            }
        }
    }
    let detail: Vec<String> = by_class.iter().map(|(c, n)| format!("{n} {c}")).collect();
    Ok(format!("{RANDOM_PROGRAMS}/{RANDOM_PROGRAMS} agree ({})", detail.join(", ")))
}

fn circuit_fidelity(corpus: &[(String, Prepared)]) -> Check {
    let mut total = 0;
    for (name, p) in corpus {
        total += support::circuit_fidelity(&p.program, CIRCUIT_EVALUATIONS, 0x5eed).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{CIRCUIT_EVALUATIONS} evaluations on each of {} programs ({total} total), bit-exact", corpus.len()))
}

fn fbd_lowering() -> Check {
    let doc = parse_fbd_xml(AND_GATE_XML.as_bytes()).map_err(|d| d.to_string())?;
    let lowered = lower_to_ir(&doc.networks[0], &infer_interface(&doc)).map_err(|d| d.to_string())?;
    let shape: Vec<String> = lowered
        .stmts
        .iter()
        .map(|s| match &s.kind {
            StmtKind::Assign { target, value } => format!("{} := {}", print_expr(target), print_expr(value)),
            other => format!("{other:?}"),
        })
        .collect();
    if shape != ["tmp1 := (var1 AND var2)"] {
        return Err(format!("the AND-gate export lowers to {shape:?}"));
    }
    let mut rows = 0;
    for (name, xml) in corpus_documents() {
        rows += support::fbd_fidelity(&xml).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("AND-gate export is `{}`; {} corpus documents agree on {rows} exhaustive rows", shape[0], corpus_documents().len()))
}

fn template_soundness() -> Check {
    let options: Vec<(usize, bool)> =
        (0..support::GUARDS.len()).flat_map(|g| [(g, false), (g, true)]).collect();
    let mut shapes: Vec<Vec<(usize, bool)>> = vec![vec![]];
    let mut templates = 0;
    let mut rows = 0;
    for _ in 0..TEMPLATE_MAX_CASES {
        shapes = shapes.iter().flat_map(|s| options.iter().map(move |o| [s.clone(), vec![*o]].concat())).collect();
        for cases in &shapes {
            for hold in [false, true] {
                rows += support::template_soundness(cases, hold).map_err(|e| format!("{cases:?} hold={hold}: {e}"))?;
                templates += 1;
            }
        }
    }
    Ok(format!("{templates} templates with 1 to {TEMPLATE_MAX_CASES} cases, {rows} rows, all match"))
}

fn determinism(corpus: &[(String, Prepared)], seen: &mut Collected) -> Check {
    let mut bytes = 0;
    for (name, p) in corpus {
        let first = verify(&p.manifest_path, None, None)?;
        let second = verify(&p.manifest_path, None, None)?;
        seen.record(name, p, &first);
        let (a, b) = (first.without_timings().to_json(), second.without_timings().to_json());
        if a != b {
            return Err(format!("{name}: reports differ"));
        }
        bytes += a.len();
    }
    Ok(format!("{} manifests, {bytes} bytes of JSON identical across two runs", corpus.len()))
}

fn replay_contract(seen: &Collected) -> Check {
    for (label, program, cex) in &seen.violations {
        let r = replay_counterexample(program, cex);
        if !r.is_confirmed() {
            return Err(format!("{label}: {r:?}"));
        }
    }
    if seen.violations.is_empty() {
        return Err("no violated verdicts were produced".into());
    }
    Ok(format!("{0}/{0} violated verdicts replay at the stated cycle", seen.violations.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let corpus = support::load_corpus(dir.path());
    let mut seen = Collected::default();

    // determinism runs before the replay check so its verdicts are included
    let early: Vec<(&str, Check)> = vec![
        ("input-space arithmetic", input_space(dir.path())),
        ("SIF-X1 verification", sif_x1(dir.path(), &mut seen)),
        ("seeded-defect detection", sif2_defects(dir.path(), &mut seen)),
        ("oracle equivalence", oracle_equivalence(&mut seen)),
        ("circuit fidelity", circuit_fidelity(&corpus)),
        ("FBD lowering fidelity", fbd_lowering()),
        ("template soundness", template_soundness()),
    ];
    let det = determinism(&corpus, &mut seen);
    let mut results = early;
    results.push(("counterexample contract", replay_contract(&seen)));
    results.push(("determinism", det));

    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
