//! Independent oracles shared by the integration tests and the acceptance
//! suite. Each check returns how many evaluations it compared, or the first
//! disagreement.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use scanverif_core::corpus;
use scanverif_core::encoder::{encode_cycle, InputKind};
use scanverif_core::fbd::{evaluate_network, import_program, parse_fbd_xml};
use scanverif_core::il::{parse_expression, parse_program, SourceFile};
use scanverif_core::ir::{
    run_cycle, typecheck_program, CycleState, DataType, RequirementOrigin, Section, SlotRole, TypedProgram, Valuation,
    Value,
};
use scanverif_core::manifest::Prepared;
use scanverif_core::requirements::{attach, compile_spec_template, Requirement, SpecTemplate};
use scanverif_core::diag::Loc;

pub fn typed_il(src: &str) -> TypedProgram {
    typecheck_program(&parse_program(&SourceFile::new("t.il", src)).expect("parses")).expect("typechecks")
}

pub fn random_value(rng: &mut StdRng, ty: &DataType) -> Value {
    match ty {
        DataType::Bool => Value::Bool(rng.gen()),
        DataType::Word => Value::Word(rng.gen()),
        DataType::Array { elem, lo, hi } => Value::Array((*lo..=*hi).map(|_| random_value(rng, elem)).collect()),
    }
}

pub fn random_valuation(rng: &mut StdRng, p: &TypedProgram, role: SlotRole) -> Valuation {
    p.slots_with_role(role).map(|(_, s)| (s.name.clone(), random_value(rng, &s.dtype))).collect()
}

/// The corpus written to `dir` and loaded back, by name.
pub fn load_corpus(dir: &Path) -> Vec<(String, Prepared)> {
    corpus::write_corpus(dir).expect("corpus writes");
    corpus::corpus_entries()
        .into_iter()
        .map(|g| {
            let p = Prepared::load(&dir.join(format!("{}.toml", g.name))).unwrap_or_else(|e| panic!("{}: {e}", g.name));
            (g.name, p)
        })
        .collect()
}

/// Compares the one-cycle circuit against the interpreter on `n` random
/// (config, input, state) triples: next state, outputs and every assertion,
/// bit for bit.
pub fn circuit_fidelity(p: &TypedProgram, n: usize, seed: u64) -> Result<usize, String> {
    let ts = encode_cycle(p);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut done = 0;
    while done < n {
        let lanes = (n - done).min(64);
        let mut triples = Vec::with_capacity(lanes);
        let mut words = vec![0u64; ts.circuit.inputs().len()];
        for lane in 0..lanes {
            let config = random_valuation(&mut rng, p, SlotRole::Config);
            let inputs = random_valuation(&mut rng, p, SlotRole::Input);
            let statics = random_valuation(&mut rng, p, SlotRole::State);
            for (k, ib) in ts.circuit.inputs().iter().enumerate() {
                let src = match ib.kind {
                    InputKind::Config => &config,
                    InputKind::Input => &inputs,
                    InputKind::State => &statics,
                };
                if src[&p.slots[ib.slot].name].to_bits()[ib.bit as usize] {
                    words[k] |= 1 << lane;
                }
            }
            triples.push((config, inputs, statics));
        }
        let vals = ts.circuit.eval64(&words);
        for (lane, (config, inputs, statics)) in triples.into_iter().enumerate() {
            let bit = |node: u32| vals[node as usize] >> lane & 1 == 1;
            let state = CycleState { config, statics, cycle_index: 0 };
            let r = run_cycle(p, &state, &inputs).map_err(|e| e.to_string())?;
            for (sb, expected) in ts.next_state.iter().map(|s| (s, &r.state.statics)).chain(ts.outputs.iter().map(|s| (s, &r.outputs))) {
                let name = &p.slots[sb.slot].name;
                let want = expected[name].to_bits();
                let got: Vec<bool> = sb.bits.iter().map(|&b| bit(b)).collect();
                if got != want {
                    return Err(format!("{name}: circuit {got:?}, interpreter {want:?} (inputs {inputs:?})"));
                }
            }
            for (idx, node) in &ts.assertions {
                let id = &p.requirements[*idx].id;
                let want = r.assertions.iter().filter(|(a, _)| a == id).all(|(_, ok)| *ok);
                if bit(*node) != want {
                    return Err(format!("assertion {id}: circuit {}, interpreter {want}", bit(*node)));
                }
            }
            done += 1;
        }
    }
    Ok(done)
}

/// Lowered FBD code against direct gate-graph evaluation. Implicit sinks
/// become outputs so the interpreter reports them. Gates are bitwise, so
/// WORD inputs carry one Boolean assignment per bit lane and 16 lanes cover
/// every assignment of up to 4 inputs; BOOL inputs are enumerated outright.
pub fn fbd_fidelity(xml: &str) -> Result<usize, String> {
    let doc = parse_fbd_xml(xml.as_bytes()).map_err(|d| d.to_string())?;
    let mut program = import_program(&doc).map_err(|d| d.to_string())?;
    for d in &mut program.pous[0].decls {
        if d.section == Section::Temp {
            d.section = Section::Output;
        }
    }
    let p = typecheck_program(&program).map_err(|d| d.to_string())?;
    let inputs: Vec<(String, DataType)> =
        p.slots_with_role(SlotRole::Input).map(|(_, s)| (s.name.clone(), s.dtype.clone())).collect();
    let bool_inputs = inputs.iter().filter(|(_, t)| *t == DataType::Bool).count();
    let word_inputs = inputs.len() - bool_inputs;
    if bool_inputs > 16 || word_inputs > 4 {
        return Err(format!("{bool_inputs} BOOL and {word_inputs} WORD inputs is too many to enumerate"));
    }
    let mut count = 0;
    for n in 0u32..(1 << bool_inputs) {
        let mut env = Valuation::new();
        let (mut bi, mut wi) = (0, 0);
        for (name, ty) in &inputs {
            let v = if *ty == DataType::Bool {
                bi += 1;
                Value::Bool(n >> (bool_inputs - bi) & 1 == 1)
            } else {
                // lane l holds bit wi of l
                let w = (0..16u16).filter(|l| l >> wi & 1 == 1).fold(0u16, |acc, l| acc | 1 << l);
                wi += 1;
                Value::Word(w)
            };
            env.insert(name.clone(), v);
        }
        let r = run_cycle(&p, &CycleState::initial(&p, Valuation::new()), &env).map_err(|e| e.to_string())?;
        let mut gate_env = env.clone();
        let mut expected: BTreeMap<String, Value> = BTreeMap::new();
        let mut namer = scanverif_core::fbd::TempNamer::default();
        let mut decls = doc.interface.clone();
        if decls.is_empty() {
            decls = scanverif_core::fbd::infer_interface(&doc);
        }
        for net in &doc.networks {
            let lowered = scanverif_core::fbd::lower_network(net, &decls, &mut namer).map_err(|d| d.to_string())?;
            decls.extend(lowered.temps.iter().cloned());
            for (k, v) in evaluate_network(net, &gate_env)? {
                let key = match k.strip_prefix('#') {
                    Some(uid) => lowered.implicit_sinks[&uid.parse::<u32>().unwrap()].clone(),
                    None => k,
                };
                gate_env.insert(key.clone(), v.clone());
                expected.insert(key, v);
            }
        }
        for (name, v) in &expected {
            if r.outputs.get(name) != Some(v) {
                return Err(format!("{name}: lowered {:?}, gates {v:?} (inputs {env:?})", r.outputs.get(name)));
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Guard expressions over `a`, `b`, `c` for template tests.
pub const GUARDS: [&str; 10] =
    ["a", "b", "c", "NOT a", "a AND b", "b OR c", "a XOR c", "NOT (b AND c)", "TRUE", "FALSE"];

/// A compiled template against the if/elsif statement it describes. For
/// every row of (a, b, c, old result) the requirement, read as a relation
/// between old and new result, must accept exactly the value the statement
/// computes; with `hold` unset and no guard firing it must accept both.
pub fn template_soundness(cases: &[(usize, bool)], hold: bool) -> Result<usize, String> {
    let header = "FUNCTION_BLOCK T\nVAR_INPUT a, b, c, nv : BOOL; END_VAR\nVAR_OUTPUT result : BOOL; END_VAR\n";
    let mut stmt = String::new();
    for (i, (g, v)) in cases.iter().enumerate() {
        let kw = if i == 0 { "IF" } else { "ELSIF" };
        stmt.push_str(&format!("{kw} {} THEN result := {}; ", GUARDS[*g], if *v { "TRUE" } else { "FALSE" }));
    }
    stmt.push_str("END_IF;\n");
    let operational = typed_il(&format!("{header}{stmt}END_FUNCTION_BLOCK\n"));
    // the probe sets result to an arbitrary new value so the requirement
    // can be read at every (old, new) pair
    let probe = typed_il(&format!("{header}result := nv;\nEND_FUNCTION_BLOCK\n"));
    let template = SpecTemplate {
        target: scanverif_core::ir::Expr::var("result"),
        cases: cases
            .iter()
            .map(|(g, v)| (parse_expression(GUARDS[*g], Loc::new(1, 1, 0)).expect("guard parses"), *v))
            .collect(),
        hold_else: hold,
    };
    let expr = compile_spec_template(&template, &probe).map_err(|d| d.to_string())?;
    let probe = attach(&probe, &[Requirement::new("TPL", expr, RequirementOrigin::Template)]).map_err(|d| d.to_string())?;
    let mut rows = 0;
    for n in 0u32..16 {
        let bit = |k: u32| Value::Bool(n >> k & 1 == 1);
        let old = bit(3);
        let mut inputs: Valuation =
            [("a", bit(2)), ("b", bit(1)), ("c", bit(0)), ("nv", Value::Bool(false))].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let state = || CycleState {
            config: Valuation::new(),
            statics: [("result".to_string(), old.clone())].into_iter().collect(),
            cycle_index: 0,
        };
        let r = run_cycle(&operational, &state(), &inputs).map_err(|e| e.to_string())?;
        let computed = r.outputs["result"].as_bool();
        let fired = cases.iter().any(|(g, _)| {
            let v = |name: &str| inputs[name].as_bool();
            eval_guard(GUARDS[*g], v("a"), v("b"), v("c"))
        });
        for new in [false, true] {
            inputs.insert("nv".into(), Value::Bool(new));
            let r = run_cycle(&probe, &state(), &inputs).map_err(|e| e.to_string())?;
            let accepted = r.assertions.iter().all(|(_, ok)| *ok);
            let should = if !fired && !hold { true } else { new == computed };
            if accepted != should {
                return Err(format!(
                    "row a,b,c,old={:04b}: requirement {} new={new}, statement computes {computed}",
                    n,
                    if accepted { "accepts" } else { "rejects" }
                ));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

/// Guard truth written out by hand, independent of the expression parser.
pub fn eval_guard(g: &str, a: bool, b: bool, c: bool) -> bool {
    match g {
        "a" => a,
        "b" => b,
        "c" => c,
        "NOT a" => !a,
        "a AND b" => a && b,
        "b OR c" => b || c,
        "a XOR c" => a ^ c,
        "NOT (b AND c)" => !(b && c),
        "TRUE" => true,
        "FALSE" => false,
        other => panic!("unknown guard {other}"),
    }
}
