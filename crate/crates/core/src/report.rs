//! Verification reports. The JSON form is the source of truth; the text
//! form is rendered from it.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engines::{Counterexample, EngineKind, Outcome, ReplayReport, Verdict};
use crate::ir::{RequirementOrigin, TypedProgram};

/// JSON schema of [`VerificationReport`].
pub const SCHEMA: &str = include_str!("../schema/verification-report.schema.json");

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub manifest: String,
    pub entry: String,
    pub engine: EngineKind,
    pub determinism: String,
    pub summary: Summary,
    pub exit_code: i32,
    pub cases: Vec<CaseReport>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub satisfied: usize,
    pub violated: usize,
    pub unknown: usize,
    pub engine_error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub requirement: String,
    pub origin: RequirementOrigin,
    pub bound: usize,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<CexTable>,
}

/// Signal-by-cycle grid of a counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CexTable {
    pub cycles: Vec<usize>,
    pub rows: Vec<CexRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CexRow {
    pub signal: String,
    /// config, input, state, output or requirement.
    pub kind: String,
    pub values: Vec<String>,
}

impl CexTable {
    pub fn from_counterexample(cex: &Counterexample) -> CexTable {
        let cycles: Vec<usize> = cex.cycles.iter().map(|c| c.cycle).collect();
        let n = cycles.len();
        let mut rows = Vec::new();
        for (name, v) in &cex.config {
            rows.push(CexRow { signal: name.clone(), kind: "config".into(), values: vec![v.to_string(); n] });
        }
        let outputs: Vec<&String> = cex.cycles.first().map(|c| c.outputs.keys().collect()).unwrap_or_default();
        let mut per_cycle = |kind: &str, pick: &dyn Fn(&crate::ir::CycleRecord) -> &crate::ir::Valuation| {
            let Some(first) = cex.cycles.first() else { return };
            for name in pick(first).keys() {
                // block outputs are also state; list them once, as outputs
                if kind == "state" && outputs.contains(&name) {
                    continue;
                }
                let values = cex
                    .cycles
                    .iter()
                    .map(|c| pick(c).get(name).map_or_else(|| "-".to_string(), |v| v.to_string()))
                    .collect();
                rows.push(CexRow { signal: name.clone(), kind: kind.into(), values });
            }
        };
        per_cycle("input", &|c| &c.inputs);
        per_cycle("state", &|c| &c.statics);
        per_cycle("output", &|c| &c.outputs);
        let values = cex
            .cycles
            .iter()
            .map(|c| {
                let evals: Vec<bool> =
                    c.assertions.iter().filter(|(id, _)| *id == cex.requirement_id).map(|(_, ok)| *ok).collect();
                match evals.as_slice() {
                    [] => "-".to_string(),
                    e if e.iter().all(|b| *b) => "TRUE".to_string(),
                    _ => "FALSE".to_string(),
                }
            })
            .collect();
        rows.push(CexRow { signal: cex.requirement_id.clone(), kind: "requirement".into(), values });
        CexTable { cycles, rows }
    }
}

impl CaseReport {
    pub fn new(program: &TypedProgram, id: &str, bound: usize, verdict: Verdict, replay: Option<ReplayReport>) -> Self {
        let req = program.requirement(id).expect("requirement exists");
        let table = match &verdict.outcome {
            Outcome::Violated { counterexample } => Some(CexTable::from_counterexample(counterexample)),
            _ => None,
        };
        CaseReport {
            id: id.to_string(),
            requirement: req.text.clone(),
            origin: req.origin,
            bound,
            verdict,
            replay,
            table,
        }
    }
}

impl Summary {
    pub fn of(cases: &[CaseReport]) -> Summary {
        let mut s = Summary { total: cases.len(), ..Summary::default() };
        for c in cases {
            match c.verdict.outcome {
                Outcome::Satisfied { .. } => s.satisfied += 1,
                Outcome::Violated { .. } => s.violated += 1,
                Outcome::Unknown { .. } => s.unknown += 1,
                Outcome::EngineError { .. } => s.engine_error += 1,
            }
        }
        s
    }

    /// 2 when any case is undecided, else 1 when any is violated, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.unknown + self.engine_error > 0 {
            EXIT_UNDECIDED
        } else if self.violated > 0 {
            EXIT_VIOLATED
        } else {
            EXIT_SATISFIED
        }
    }
}

impl VerificationReport {
    pub fn new(manifest: &str, entry: &str, engine: EngineKind, cases: Vec<CaseReport>) -> Self {
        let summary = Summary::of(&cases);
        VerificationReport {
            tool: "scanverif".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            manifest: manifest.into(),
            entry: entry.into(),
            engine,
            determinism: "no randomness: fixed decision order and enumeration order; only timings vary between runs"
                .into(),
            exit_code: summary.exit_code(),
            summary,
            cases,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<VerificationReport> {
        serde_json::from_str(text)
    }

    /// The report with wall-clock timings zeroed, for run-to-run comparison.
    pub fn without_timings(&self) -> VerificationReport {
        let mut r = self.clone();
        for c in &mut r.cases {
            c.verdict.stats.encode_ms = 0.0;
            c.verdict.stats.solve_ms = 0.0;
        }
        r
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {}: {} (entry {}, engine {})",
            self.tool, self.version, self.manifest, self.entry, self.engine
        );
        let width = self.cases.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.cases {
            let st = &c.verdict.stats;
            let verdict = match &c.verdict.outcome {
                Outcome::Satisfied { bound, exhaustive: true } => format!("satisfied (exhaustive, bound {bound})"),
                Outcome::Satisfied { bound, exhaustive: false } => format!("satisfied up to {bound} cycles"),
                Outcome::Violated { counterexample } => {
                    format!("VIOLATED in cycle {}", counterexample.violating_cycle)
                }
                Outcome::Unknown { reason } => format!("unknown: {reason}"),
                Outcome::EngineError { message } => format!("engine error: {message}"),
            };
            let _ = writeln!(out, "  {:<width$}  {verdict}", c.id);
            let _ = match c.verdict.engine {
                EngineKind::Bmc => writeln!(
                    out,
                    "  {:<width$}  {} vars, {} clauses, {} decisions, {} conflicts, {:.1} ms encode, {:.1} ms solve",
                    "", st.variables, st.clauses, st.decisions, st.conflicts, st.encode_ms, st.solve_ms
                ),
                EngineKind::Explicit => {
                    writeln!(out, "  {:<width$}  {} cycle evaluations, {:.1} ms", "", st.evaluations, st.solve_ms)
                }
            };
            if let Some(t) = &c.table {
                render_table(&mut out, t);
            }
            match &c.replay {
                Some(ReplayReport::Confirmed { cycle }) => {
                    let _ = writeln!(out, "    replay: confirmed, fails in cycle {cycle}");
                }
                Some(ReplayReport::Diverged { reason, .. }) => {
                    let _ = writeln!(out, "    replay: DIVERGED, {reason}");
                }
                None => {}
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} cases: {} satisfied, {} violated, {} unknown, {} engine errors",
            s.total, s.satisfied, s.violated, s.unknown, s.engine_error
        );
        out
    }
}

fn render_table(out: &mut String, t: &CexTable) {
    let sig_w = t.rows.iter().map(|r| r.signal.len()).max().unwrap_or(6).max(6);
    let kind_w = t.rows.iter().map(|r| r.kind.len()).max().unwrap_or(4).max(4);
    let col_w: Vec<usize> = (0..t.cycles.len())
        .map(|i| {
            let head = format!("cycle {}", t.cycles[i]).len();
            t.rows.iter().map(|r| r.values[i].len()).max().unwrap_or(0).max(head)
        })
        .collect();
    let _ = write!(out, "    {:<sig_w$}  {:<kind_w$}", "signal", "kind");
    for (i, c) in t.cycles.iter().enumerate() {
        let _ = write!(out, "  {:<w$}", format!("cycle {c}"), w = col_w[i]);
    }
    out.push('\n');
    for r in &t.rows {
        let _ = write!(out, "    {:<sig_w$}  {:<kind_w$}", r.signal, r.kind);
        for (i, v) in r.values.iter().enumerate() {
            let _ = write!(out, "  {:<w$}", v, w = col_w[i]);
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{replay_counterexample, verify, EngineOptions, EngineStats, VerificationCase};
    use crate::il::{parse_program, SourceFile};
    use crate::ir::typecheck_program;
    use crate::sat::Limits;

    const SRC: &str = "FUNCTION_BLOCK Mix
VAR_INPUT a, b : BOOL; w : WORD; END_VAR
VAR_OUTPUT q : BOOL; END_VAR
VAR s : BOOL; END_VAR
q := a OR b;
s := s OR w.%X2;
//#ASSERT (a OR b) = q;
//#ASSERT (a AND b) = q;
//#ASSERT NOT s;
END_FUNCTION_BLOCK";

    fn report(engine: EngineKind) -> VerificationReport {
        let program = typecheck_program(&parse_program(&SourceFile::new("mix.il", SRC)).unwrap()).unwrap();
        let opts = EngineOptions { engine, limits: Limits::default(), bit_budget: 24 };
        let mut cases: Vec<CaseReport> = ["Mix.A1", "Mix.A2", "Mix.A3"]
            .iter()
            .map(|id| {
                let case = VerificationCase::new(&program, id, Some(2)).unwrap();
                let verdict = verify(&case, &opts);
                let replay = match &verdict.outcome {
                    Outcome::Violated { counterexample } => Some(replay_counterexample(&case.program, counterexample)),
                    _ => None,
                };
                CaseReport::new(&program, id, 2, verdict, replay)
            })
            .collect();
        cases.push(CaseReport {
            id: "slow".into(),
            requirement: "q".into(),
            origin: RequirementOrigin::Manifest,
            bound: 2,
            verdict: Verdict {
                engine,
                outcome: Outcome::Unknown { reason: "time limit".into() },
                stats: EngineStats::default(),
            },
            replay: None,
            table: None,
        });
        VerificationReport::new("mix.toml", "Mix", engine, cases)
    }

    fn validator() -> jsonschema::JSONSchema {
        jsonschema::JSONSchema::compile(&serde_json::from_str(SCHEMA).unwrap()).unwrap()
    }

    #[test]
    fn reports_conform_to_the_schema() {
        let schema = validator();
        for engine in [EngineKind::Bmc, EngineKind::Explicit] {
            let value: serde_json::Value = serde_json::from_str(&report(engine).to_json()).unwrap();
            if let Err(errors) = schema.validate(&value) {
                let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
                panic!("{}", msgs.join("\n"));
            };
        }
    }

    #[test]
    fn schema_rejects_unknown_status() {
        let mut value: serde_json::Value = serde_json::from_str(&report(EngineKind::Bmc).to_json()).unwrap();
        value["cases"][0]["verdict"]["outcome"]["status"] = "maybe".into();
        assert!(!validator().is_valid(&value));
    }

    #[test]
    fn json_round_trip() {
        let r = report(EngineKind::Bmc);
        assert_eq!(VerificationReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn summary_and_exit_code() {
        let r = report(EngineKind::Bmc);
        assert_eq!(r.summary, Summary { total: 4, satisfied: 1, violated: 2, unknown: 1, engine_error: 0 });
        assert_eq!(r.exit_code, EXIT_UNDECIDED);
        let mut only_decided = r.clone();
        only_decided.cases.pop();
        assert_eq!(Summary::of(&only_decided.cases).exit_code(), EXIT_VIOLATED);
        only_decided.cases.retain(|c| c.id == "Mix.A1");
        assert_eq!(Summary::of(&only_decided.cases).exit_code(), EXIT_SATISFIED);
    }

    #[test]
    fn timings_are_the_only_nondeterminism() {
        let a = report(EngineKind::Bmc).without_timings().to_json();
        let b = report(EngineKind::Bmc).without_timings().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn text_rendering() {
        let text = report(EngineKind::Bmc).to_text();
        assert!(text.contains("Mix.A1  satisfied up to 2 cycles"), "{text}");
        assert!(text.contains("Mix.A2  VIOLATED in cycle "), "{text}");
        assert!(text.contains("Mix.A3  VIOLATED in cycle "), "{text}");
        assert!(text.contains("slow    unknown: time limit"), "{text}");
        assert!(text.contains("replay: confirmed, fails in cycle "), "{text}");
        assert!(text.contains("4 cases: 1 satisfied, 2 violated, 1 unknown, 0 engine errors"), "{text}");
        let bad = report(EngineKind::Bmc).cases[1].table.clone().unwrap();
        let req = bad.rows.iter().find(|r| r.kind == "requirement").unwrap();
        assert_eq!(req.values.last().unwrap(), "FALSE");
        assert_eq!(bad.rows.iter().filter(|r| r.signal == "q").count(), 1);
    }
}
