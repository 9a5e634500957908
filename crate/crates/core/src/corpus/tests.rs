use super::*;
use crate::engines::{verify_bmc, verify_explicit, Outcome, DEFAULT_BIT_BUDGET};
use crate::il::{parse_program, SourceFile};
use crate::ir::{log2_input_space, run_cycle, typecheck_program, CycleState, TypedProgram};
use crate::manifest::Prepared;
use crate::sat::Limits;

fn typed(g: &Generated) -> TypedProgram {
    let (name, text) = &g.sources[0];
    typecheck_program(&parse_program(&SourceFile::new(name, text)).unwrap()).unwrap()
}

fn prepared(g: &Generated) -> Prepared {
    let dir = tempfile::tempdir().unwrap();
    for (f, t) in &g.sources {
        std::fs::write(dir.path().join(f), t).unwrap();
    }
    let path = dir.path().join(format!("{}.toml", g.name));
    std::fs::write(&path, g.manifest.to_toml()).unwrap();
    Prepared::load(&path).unwrap()
}

#[test]
fn interface_arithmetic() {
    assert_eq!(log2_input_space(&typed(&gen_sif_x1(&SifX1Params::default()))), 1846);
    assert_eq!(log2_input_space(&typed(&gen_sif_2(Sif2Defect::None))), 305);
    assert_eq!(log2_input_space(&typed(&gen_sif_x1(&SifX1Params::reduced()))), 20);
}

#[test]
fn sif_x1_has_sixteen_chain_cases() {
    let p = prepared(&gen_sif_x1(&SifX1Params::default()));
    assert_eq!(p.requirement_ids.len(), 16);
    assert_eq!(p.requirement_ids[0], "SIFX1_SC0");
    assert!(p.program.requirement("SIFX1_SC0").unwrap().text.contains("SC_S_0 AND I_EISa_Pos"));
}

/// Per-chain reading of the safety condition, computed bit by bit.
fn chain_safe(config: &Valuation, inputs: &Valuation, j: usize) -> bool {
    let w = |v: &Valuation, n: &str| v[n].as_word();
    let bit = |x: u16, i: usize| x >> i & 1 == 1;
    let sc = w(config, &format!("SC_S_{j}"));
    (0..16).all(|i| {
        let in_chain = bit(sc, i);
        let door = !(in_chain && bit(w(config, "I_EISa_Pos"), i))
            || bit(w(inputs, "I_EISa_Pos_Stat"), i)
            || bit(w(inputs, "I_EISa_Bypass"), i);
        let handle = !(in_chain && bit(w(config, "I_EISa_PU"), i))
            || bit(w(inputs, "I_EISa_PU_Stat"), i)
            || bit(w(inputs, "I_EISa_Bypass"), i);
        door && handle
    }) && bit(w(inputs, "S0_AP_Pos"), j)
        && bit(w(inputs, "S0_AP_PU"), j)
        && bit(w(inputs, "S0_AP_Key_Distrib"), j)
}

#[test]
fn commissioning_scenario_output() {
    let p = typed(&gen_sif_x1(&SifX1Params::default()));
    let (config, inputs) = commissioning_scenario();
    let r = run_cycle(&p, &CycleState::initial(&p, config.clone()), &inputs).unwrap();
    let out = r.outputs["N_EISa_Safe"].as_word();
    let expected: u16 = (0..16).filter(|&j| chain_safe(&config, &inputs, j)).map(|j| 1 << j).sum();
    assert_eq!(out, expected);
    // chain 0 and chain 3 (through S0_AP_Pos = 16#0009); chain 1's access point bit is 0
    assert_eq!(out, 0x0009);
}

#[test]
fn reduced_variant_satisfied_by_both_engines() {
    let p = prepared(&gen_sif_x1(&SifX1Params::reduced()));
    for case in p.cases(None) {
        assert_eq!(verify_explicit(&case, DEFAULT_BIT_BUDGET).outcome, Outcome::Satisfied { bound: 1, exhaustive: true });
        assert_eq!(verify_bmc(&case, Limits::default()).outcome.class(), "satisfied");
    }
}

#[test]
fn reduced_variant_without_bypass_is_caught_by_both() {
    let g = gen_sif_x1(&SifX1Params { drop_bypass: true, ..SifX1Params::reduced() });
    let p = prepared(&g);
    for case in p.cases(None) {
        assert_eq!(verify_explicit(&case, DEFAULT_BIT_BUDGET).outcome.class(), "violated");
        assert_eq!(verify_bmc(&case, Limits::default()).outcome.class(), "violated");
    }
}

#[test]
fn sif2_defects() {
    for (defect, beam, key) in [
        (Sif2Defect::None, "satisfied", "satisfied"),
        (Sif2Defect::MissingSpecVar, "violated", "satisfied"),
        (Sif2Defect::MissingProgramVar, "satisfied", "violated"),
    ] {
        let p = prepared(&gen_sif_2(defect));
        let cases = p.cases(None);
        assert_eq!(cases[0].id, SIF_2_BEAM_ID);
        assert_eq!(verify_bmc(&cases[0], Limits::default()).outcome.class(), beam, "{defect:?}");
        assert_eq!(verify_bmc(&cases[1], Limits::default()).outcome.class(), key, "{defect:?}");
    }
}

#[test]
fn random_programs_fit_the_explicit_budget() {
    for seed in 0..40 {
        let r = random::random_program(seed);
        let p = typecheck_program(&parse_program(&SourceFile::new("r.il", &r.source)).unwrap())
            .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", r.source));
        assert_eq!(p.requirements.len(), 1);
        assert!(crate::engines::unrolled_bits(&p, r.bound) <= 20);
    }
}

#[test]
fn corpus_files_are_stable() {
    assert_eq!(corpus_files(), corpus_files());
    let names: Vec<String> = corpus_entries().into_iter().map(|g| g.name).collect();
    for n in &names {
        assert!(expected_exit_code(n).is_some(), "{n}");
    }
}
