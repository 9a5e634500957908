use proptest::prelude::*;

use super::*;
use crate::il::{parse_program, SourceFile};
use crate::ir::{run_scenario, typecheck_program, Value};

fn typed(src: &str) -> TypedProgram {
    typecheck_program(&parse_program(&SourceFile::new("t.il", src)).unwrap()).unwrap()
}

fn case(src: &str, bound: Option<usize>) -> VerificationCase {
    let p = typed(src);
    let id = p.requirements[0].id.clone();
    VerificationCase::new(&p, &id, bound).unwrap()
}

fn both(c: &VerificationCase) -> (Verdict, Verdict) {
    (verify_explicit(c, DEFAULT_BIT_BUDGET), verify_bmc(c, Limits::default()))
}

const AND_GATE: &str = "FUNCTION AndGate : VOID
VAR_INPUT var1, var2 : BOOL; END_VAR
VAR_OUTPUT result : BOOL; END_VAR
result := var1 AND var2;
//#ASSERT (var1 AND var2) = result;
END_FUNCTION";

const OR_MUTANT: &str = "FUNCTION AndGate : VOID
VAR_INPUT var1, var2 : BOOL; END_VAR
VAR_OUTPUT result : BOOL; END_VAR
result := var1 OR var2;
//#ASSERT (var1 AND var2) = result;
END_FUNCTION";

const COUNTER: &str = "FUNCTION_BLOCK Count
VAR_INPUT tick : BOOL; END_VAR
VAR b0, b1 : BOOL; END_VAR
IF tick THEN b1 := b1 XOR b0; b0 := NOT b0; END_IF;
//#ASSERT NOT (b0 AND b1);
END_FUNCTION_BLOCK";

#[test]
fn and_gate_is_satisfied_after_four_evaluations() {
    let c = case(AND_GATE, None);
    assert_eq!(c.bound, 1);
    let (e, b) = both(&c);
    assert_eq!(e.outcome, Outcome::Satisfied { bound: 1, exhaustive: true });
    assert_eq!(e.stats.evaluations, 4);
    assert_eq!(b.outcome, Outcome::Satisfied { bound: 1, exhaustive: true });
}

#[test]
fn or_mutant_first_counterexample() {
    let c = case(OR_MUTANT, None);
    let (e, b) = both(&c);
    for v in [&e, &b] {
        let Outcome::Violated { counterexample } = &v.outcome else { panic!("{:?}", v.outcome) };
        assert_eq!(counterexample.violating_cycle, 1);
        let inputs = &counterexample.cycles[0].inputs;
        assert_eq!(inputs["var1"], Value::Bool(false));
        assert_eq!(inputs["var2"], Value::Bool(true));
        assert!(replay_counterexample(&c.program, counterexample).is_confirmed());
    }
}

#[test]
fn false_assertion_fails_in_first_cycle() {
    let c = case("FUNCTION F : VOID\nVAR_INPUT x : BOOL; END_VAR\n//#ASSERT FALSE;\nEND_FUNCTION", None);
    let (e, b) = both(&c);
    for v in [e, b] {
        let Outcome::Violated { counterexample } = v.outcome else { panic!() };
        assert_eq!(counterexample.violating_cycle, 1);
        assert_eq!(counterexample.cycles.len(), 1);
    }
}

#[test]
fn counter_reaches_three_in_four_cycles() {
    for (k, expect_violation) in [(2, false), (3, true), (5, true)] {
        let c = case(COUNTER, Some(k));
        let (e, b) = both(&c);
        assert_eq!(e.outcome.class(), b.outcome.class(), "bound {k}");
        match e.outcome {
            Outcome::Violated { counterexample } => {
                assert!(expect_violation);
                assert!((3..=k).contains(&counterexample.violating_cycle));
                assert!(replay_counterexample(&c.program, &counterexample).is_confirmed());
            }
            Outcome::Satisfied { exhaustive, .. } => {
                assert!(!expect_violation);
                assert!(!exhaustive);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn explicit_budget_exceeded_is_unknown() {
    let c = case("FUNCTION F : VOID\nVAR_INPUT a, b : WORD; END_VAR\n//#ASSERT a = a;\nEND_FUNCTION", None);
    let v = verify_explicit(&c, DEFAULT_BIT_BUDGET);
    let Outcome::Unknown { reason } = v.outcome else { panic!() };
    assert!(reason.contains("32"));
    assert_eq!(verify_bmc(&c, Limits::default()).outcome.class(), "satisfied");
}

#[test]
fn replay_reports_tampered_output() {
    let c = case(OR_MUTANT, None);
    let Outcome::Violated { mut counterexample } = verify_bmc(&c, Limits::default()).outcome else { panic!() };
    counterexample.cycles[0].outputs.insert("result".into(), Value::Bool(false));
    match replay_counterexample(&c.program, &counterexample) {
        ReplayReport::Diverged { first_difference: Some(d), .. } => {
            assert_eq!(d.signal, "result");
            assert_eq!(d.cycle, 1);
            assert_eq!(d.actual, Some(Value::Bool(true)));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn replay_of_passing_inputs_diverges() {
    let c = case(OR_MUTANT, None);
    let Outcome::Violated { mut counterexample } = verify_bmc(&c, Limits::default()).outcome else { panic!() };
    let inputs = vec![[("var1".to_string(), Value::Bool(true)), ("var2".to_string(), Value::Bool(true))].into()];
    let trace = run_scenario(&c.program, &counterexample.config, &inputs).unwrap();
    counterexample.cycles = trace.cycles;
    let r = replay_counterexample(&c.program, &counterexample);
    assert!(matches!(r, ReplayReport::Diverged { first_difference: None, .. }), "{r:?}");
}

#[test]
fn verify_all_keeps_order() {
    let cases = vec![case(AND_GATE, None), case(OR_MUTANT, None), case(AND_GATE, None)];
    let v = verify_all(&cases, &EngineOptions::default(), 3);
    let classes: Vec<_> = v.iter().map(|v| v.outcome.class()).collect();
    assert_eq!(classes, ["satisfied", "violated", "satisfied"]);
}

#[test]
fn smv_export_is_deterministic_and_complete() {
    let c = case(COUNTER, Some(4));
    let a = emit_smv(&c);
    assert_eq!(a, emit_smv(&c));
    assert!(a.contains("MODULE main"));
    assert!(a.contains("  tick : boolean;"));
    assert!(a.contains("init(b0) := FALSE;"));
    assert!(a.contains("INVARSPEC requirement_holds;"));
    let w = case(
        "FUNCTION_BLOCK W\nVAR_CONFIG m : WORD; END_VAR\nVAR_INPUT x : BOOL; END_VAR\nVAR s : WORD; END_VAR\ns.%X3 := x AND m.%X0;\n//#ASSERT s <> 16#FFFF;\nEND_FUNCTION_BLOCK",
        None,
    );
    let text = emit_smv(&w);
    assert!(text.contains("FROZENVAR\n  m : unsigned word[16];"));
    assert!(text.contains(":: word1("));
    assert!(text.contains("0ud16_65535"));
}

const SMALL: &str = "FUNCTION_BLOCK Small
VAR_CONFIG k : BOOL; END_VAR
VAR_INPUT a, b : BOOL; END_VAR
VAR s, t : BOOL; END_VAR
IF a AND k THEN s := b XOR t; ELSE t := s OR b; END_IF;
//#ASSERT NOT (s AND t AND OLD(s));
END_FUNCTION_BLOCK";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Both engines agree and a violation found at bound k persists at k + 1.
    #[test]
    fn engines_agree_and_are_monotone(k in 1usize..5) {
        let c = case(SMALL, Some(k));
        let (e, b) = both(&c);
        prop_assert_eq!(e.outcome.class(), b.outcome.class());
        let next = case(SMALL, Some(k + 1));
        if e.outcome.class() == "violated" {
            prop_assert_eq!(verify_bmc(&next, Limits::default()).outcome.class(), "violated");
        }
    }
}
