//! Demonstration programs: the access-safety function of a personnel
//! protection system (SIF-X1 analogue), the beam/access mode function with
//! seeded defects (SIF-2 analogue), a few small teaching programs and
//! seeded random generators for cross-checking the engines.
//!
//! Variable inventories are padded with spare variables so that the input
//! space exponents are 1846 and 305.

pub mod fbd;
pub mod random;

use std::fmt::Write;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::manifest::{
    ChainTemplateEntry, Manifest, ProgramSection, RequirementEntry, TemplateCase, TemplateEntry, VerificationSection,
};
use crate::ir::{Valuation, Value};

/// Generation parameters of the SIF-X1 analogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SifX1Params {
    pub chains: usize,
    /// Safety elements per zone. With `packed` they occupy one WORD per
    /// signal and this must be 16.
    pub eisa: usize,
    /// WORD signals; otherwise BOOL arrays sized to `eisa` and `chains`.
    pub packed: bool,
    /// Seeded defect: the door term ignores `I_EISa_Bypass`.
    pub drop_bypass: bool,
    /// Add spare variables to reach the full-size interface (1846 bits).
    pub pad: bool,
}

impl Default for SifX1Params {
    fn default() -> Self {
        SifX1Params { chains: 16, eisa: 16, packed: true, drop_bypass: false, pad: true }
    }
}

impl SifX1Params {
    /// Two chains of two elements, 20 nondeterministic bits.
    pub fn reduced() -> Self {
        SifX1Params { chains: 2, eisa: 2, packed: false, drop_bypass: false, pad: false }
    }
}

pub const SIF_X1_CONFIG_WORDS: usize = 94;
pub const SIF_X1_CONFIG_BOOLS: usize = 4;
pub const SIF_X1_INPUT_WORDS: usize = 21;
pub const SIF_X1_INPUT_BOOLS: usize = 2;
pub const SIF_2_INPUT_WORDS: usize = 19;
pub const SIF_2_INPUT_BOOLS: usize = 1;

/// A generated program with its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub name: String,
    /// File name and contents of each source.
    pub sources: Vec<(String, String)>,
    pub manifest: Manifest,
}

fn manifest(sources: &[&str], entry: &str) -> Manifest {
    Manifest {
        program: ProgramSection {
            sources: sources.iter().map(|s| s.to_string()).collect(),
            entry: Some(entry.to_string()),
            inline_assertions: true,
        },
        verification: VerificationSection::default(),
        requirements: Vec::new(),
        chain_templates: Vec::new(),
        templates: Vec::new(),
    }
}

fn decl_block(out: &mut String, section: &str, decls: &[(String, String)]) {
    if decls.is_empty() {
        return;
    }
    let _ = writeln!(out, "{section}");
    for (n, t) in decls {
        let _ = writeln!(out, "    {n} : {t};");
    }
    out.push_str("END_VAR\n");
}

fn spares(prefix: &str, n: usize, ty: &str) -> Vec<(String, String)> {
    (1..=n).map(|i| (format!("{prefix}{i:02}"), ty.to_string())).collect()
}

/// The SIF-X1 program and its 16-case chain manifest.
pub fn gen_sif_x1(p: &SifX1Params) -> Generated {
    assert!(!p.packed || p.eisa == 16, "packed signals hold exactly 16 elements");
    assert!(!p.packed || p.chains <= 16, "packed chain signals hold at most 16 chains");
    let name = if p.drop_bypass { "SIF_X1_NoBypass" } else { "SIF_X1" };
    let elem_ty = if p.packed { "WORD".to_string() } else { format!("ARRAY[1..{}] OF BOOL", p.eisa) };
    let chain_ty = if p.packed { "WORD".to_string() } else { format!("ARRAY[0..{}] OF BOOL", p.chains - 1) };

    let mut config: Vec<(String, String)> =
        vec![("I_EISa_Pos".into(), elem_ty.clone()), ("I_EISa_PU".into(), elem_ty.clone())];
    config.extend((0..p.chains).map(|j| (format!("SC_S_{j}"), elem_ty.clone())));
    let mut inputs: Vec<(String, String)> = ["I_EISa_Pos_Stat", "I_EISa_PU_Stat", "I_EISa_Bypass"]
        .iter()
        .map(|n| (n.to_string(), elem_ty.clone()))
        .collect();
    inputs.extend(["S0_AP_Pos", "S0_AP_PU", "S0_AP_Key_Distrib"].iter().map(|n| (n.to_string(), chain_ty.clone())));
    if p.pad {
        let cw = SIF_X1_CONFIG_WORDS.saturating_sub(config.len());
        config.extend(spares("CFG_SPARE_", cw, "WORD"));
        config.extend(spares("CFG_FLAG_", SIF_X1_CONFIG_BOOLS, "BOOL"));
        let iw = SIF_X1_INPUT_WORDS.saturating_sub(inputs.len());
        inputs.extend(spares("IN_SPARE_", iw, "WORD"));
        inputs.extend(spares("IN_FLAG_", SIF_X1_INPUT_BOOLS, "BOOL"));
    }

    let mut src = String::new();
    let _ = writeln!(src, "FUNCTION {name} : VOID");
    decl_block(&mut src, "VAR_CONFIG", &config);
    decl_block(&mut src, "VAR_INPUT", &inputs);
    decl_block(&mut src, "VAR_OUTPUT", &[("N_EISa_Safe".into(), chain_ty)]);
    let temp_ty = if p.packed { "WORD" } else { "BOOL" };
    decl_block(&mut src, "VAR_TEMP", &[("pos_ok".into(), temp_ty.into()), ("pu_ok".into(), temp_ty.into())]);
    let door = |stat: &str, idx: &str| {
        if p.drop_bypass {
            format!("{stat}{idx}")
        } else {
            format!("({stat}{idx} OR I_EISa_Bypass{idx})")
        }
    };
    for j in 0..p.chains {
        let _ = writeln!(src, "(* chain {j} *)");
        if p.packed {
            let _ = writeln!(src, "pos_ok := {} OR NOT (SC_S_{j} AND I_EISa_Pos);", door("I_EISa_Pos_Stat", ""));
            let _ = writeln!(src, "pu_ok := (I_EISa_PU_Stat OR I_EISa_Bypass) OR NOT (SC_S_{j} AND I_EISa_PU);");
            let _ = writeln!(
                src,
                "N_EISa_Safe.%X{j} := (pos_ok = 16#FFFF) AND (pu_ok = 16#FFFF) AND S0_AP_Pos.%X{j} AND S0_AP_PU.%X{j} AND S0_AP_Key_Distrib.%X{j};"
            );
        } else {
            src.push_str("pos_ok := TRUE;\npu_ok := TRUE;\n");
            let _ = writeln!(src, "FOR i := 1 TO {} DO", p.eisa);
            let _ = writeln!(
                src,
                "    pos_ok := pos_ok AND ({} OR NOT (SC_S_{j}[i] AND I_EISa_Pos[i]));",
                door("I_EISa_Pos_Stat", "[i]")
            );
            let _ = writeln!(
                src,
                "    pu_ok := pu_ok AND ((I_EISa_PU_Stat[i] OR I_EISa_Bypass[i]) OR NOT (SC_S_{j}[i] AND I_EISa_PU[i]));"
            );
            src.push_str("END_FOR;\n");
            let _ = writeln!(
                src,
                "N_EISa_Safe[{j}] := pos_ok AND pu_ok AND S0_AP_Pos[{j}] AND S0_AP_PU[{j}] AND S0_AP_Key_Distrib[{j}];"
            );
        }
    }
    src.push_str("END_FUNCTION\n");

    let file = if p.drop_bypass { "sif_x1_no_bypass.il" } else if p.packed { "sif_x1.il" } else { "sif_x1_reduced.il" };
    let mut m = manifest(&[file], name);
    m.verification.bound = Some(1);
    m.chain_templates.push(ChainTemplateEntry {
        id: "SIFX1".into(),
        expr: sif_x1_chain_template(p),
        chains: Some(p.chains),
    });
    let gen_name = file.trim_end_matches(".il").to_string();
    Generated { name: gen_name, sources: vec![(file.to_string(), src)], manifest: m }
}

/// Per-chain requirement with `{j}` for the chain index: every installed,
/// in-chain element is safe or bypassed and the access point permits,
/// exactly when the chain is reported safe.
pub fn sif_x1_chain_template(p: &SifX1Params) -> String {
    if p.packed {
        "((((I_EISa_Pos_Stat OR I_EISa_Bypass) AND (SC_S_{j} AND I_EISa_Pos)) = (SC_S_{j} AND I_EISa_Pos)) \
AND (((I_EISa_PU_Stat OR I_EISa_Bypass) AND (SC_S_{j} AND I_EISa_PU)) = (SC_S_{j} AND I_EISa_PU)) \
AND S0_AP_Key_Distrib.%X{j} AND S0_AP_PU.%X{j} AND S0_AP_Pos.%X{j}) = N_EISa_Safe.%X{j}"
            .to_string()
    } else {
        let mut terms = Vec::new();
        for i in 1..=p.eisa {
            terms.push(format!("((I_EISa_Pos_Stat[{i}] OR I_EISa_Bypass[{i}]) OR NOT (SC_S_{{j}}[{i}] AND I_EISa_Pos[{i}]))"));
            terms.push(format!("((I_EISa_PU_Stat[{i}] OR I_EISa_Bypass[{i}]) OR NOT (SC_S_{{j}}[{i}] AND I_EISa_PU[{i}]))"));
        }
        format!(
            "({} AND S0_AP_Key_Distrib[{{j}}] AND S0_AP_PU[{{j}}] AND S0_AP_Pos[{{j}}]) = N_EISa_Safe[{{j}}]",
            terms.join(" AND ")
        )
    }
}

/// A commissioning example for SIF-X1: two doors (elements
/// 1 and 4), one emergency handle (element 1), element 1 in chain 0 and
/// element 4 in chain 1. Words not given in the table are all-safe:
/// access-point handle and key words all ones, no bypass, other chains
/// empty, spares zero.
pub fn commissioning_scenario() -> (Valuation, Valuation) {
    let p = SifX1Params::default();
    let mut config = Valuation::new();
    config.insert("I_EISa_Pos".into(), Value::Word(0x0009));
    config.insert("I_EISa_PU".into(), Value::Word(0x0001));
    for j in 0..p.chains {
        let w = match j {
            0 => 0x0001,
            1 => 0x0008,
            _ => 0,
        };
        config.insert(format!("SC_S_{j}"), Value::Word(w));
    }
    for (n, _) in spares("CFG_SPARE_", SIF_X1_CONFIG_WORDS - 2 - p.chains, "WORD") {
        config.insert(n, Value::Word(0));
    }
    for (n, _) in spares("CFG_FLAG_", SIF_X1_CONFIG_BOOLS, "BOOL") {
        config.insert(n, Value::Bool(false));
    }
    let mut inputs = Valuation::new();
    inputs.insert("I_EISa_Pos_Stat".into(), Value::Word(0x0009));
    inputs.insert("I_EISa_PU_Stat".into(), Value::Word(0x0001));
    inputs.insert("I_EISa_Bypass".into(), Value::Word(0));
    inputs.insert("S0_AP_Pos".into(), Value::Word(0x0009));
    inputs.insert("S0_AP_PU".into(), Value::Word(0xFFFF));
    inputs.insert("S0_AP_Key_Distrib".into(), Value::Word(0xFFFF));
    for (n, _) in spares("IN_SPARE_", SIF_X1_INPUT_WORDS - 6, "WORD") {
        inputs.insert(n, Value::Word(0));
    }
    for (n, _) in spares("IN_FLAG_", SIF_X1_INPUT_BOOLS, "BOOL") {
        inputs.insert(n, Value::Bool(false));
    }
    (config, inputs)
}

/// Seeded defects of the SIF-2 analogue. Generating with `None` gives the
/// repaired variant of either defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sif2Defect {
    None,
    /// The beam-mode requirement forgets the safety-error conjunct.
    MissingSpecVar,
    /// The key-release logic forgets the patrol condition.
    MissingProgramVar,
}

impl std::str::FromStr for Sif2Defect {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" | "fixed" => Ok(Sif2Defect::None),
            "missing_spec_var" => Ok(Sif2Defect::MissingSpecVar),
            "missing_program_var" => Ok(Sif2Defect::MissingProgramVar),
            other => Err(format!("unknown defect `{other}`")),
        }
    }
}

pub const SIF_2_BEAM_ID: &str = "BEAM_MODE";
pub const SIF_2_KEY_ID: &str = "KEY_RELEASE_SC0";

/// The SIF-2 function block (mode transitions and key release) and its two
/// requirements.
pub fn gen_sif_2(defect: Sif2Defect) -> Generated {
    let mut inputs: Vec<(String, String)> = [
        "N_EXT_ACCE_OK",
        "N_NO_SAFETY_ERR",
        "I_PB_TEST_ON",
        "I_Key_TEST",
        "I_PB_Acce_ON",
        "I_Key_Acce",
        "N_SECU_NO_REQ_Down",
        "I_PB_Beam_ON",
        "I_Key_Beam",
        "N_Chain_Safe",
        "N_Patrol_OK",
    ]
    .iter()
    .map(|n| (n.to_string(), "WORD".to_string()))
    .collect();
    let spare = SIF_2_INPUT_WORDS - inputs.len();
    inputs.extend(spares("I_SPARE_", spare, "WORD"));
    inputs.push(("I_Lamp_Test".into(), "BOOL".into()));

    let mut src = String::from("FUNCTION_BLOCK SIF_2\n");
    decl_block(&mut src, "VAR_INPUT", &inputs);
    decl_block(
        &mut src,
        "VAR_OUTPUT",
        &[
            ("N_MODE_BEAM".into(), "WORD".into()),
            ("O_RLS_ACCESS".into(), "WORD".into()),
            ("O_LAMPS".into(), "WORD".into()),
        ],
    );
    decl_block(&mut src, "VAR_TEMP", &[("req_access".into(), "WORD".into()), ("req_beam".into(), "WORD".into())]);
    src.push_str(
        "(* mode transitions, one bit per safety chain *)
req_access := (N_EXT_ACCE_OK AND N_NO_SAFETY_ERR) AND ((I_PB_TEST_ON AND I_Key_TEST) OR (I_PB_Acce_ON AND I_Key_Acce));
req_beam := I_PB_Beam_ON AND I_Key_Beam AND N_Chain_Safe AND N_NO_SAFETY_ERR;
N_MODE_BEAM := (N_MODE_BEAM OR req_beam) AND NOT req_access;
(* access key release *)
",
    );
    if defect == Sif2Defect::MissingProgramVar {
        src.push_str("O_RLS_ACCESS := NOT N_MODE_BEAM AND N_SECU_NO_REQ_Down;\n");
    } else {
        src.push_str("O_RLS_ACCESS := NOT N_MODE_BEAM AND N_SECU_NO_REQ_Down AND N_Patrol_OK;\n");
    }
    src.push_str(
        "IF I_Lamp_Test THEN
    O_LAMPS := 16#FFFF;
ELSE
    O_LAMPS := N_MODE_BEAM OR O_RLS_ACCESS;
END_IF;
END_FUNCTION_BLOCK
",
    );

    let beam = if defect == Sif2Defect::MissingSpecVar {
        "((NOT (N_EXT_ACCE_OK AND ((I_PB_TEST_ON AND I_Key_TEST) OR (I_PB_Acce_ON AND I_Key_Acce)))) OR (NOT N_MODE_BEAM)) = 16#FFFF"
    } else {
        "((NOT ((N_EXT_ACCE_OK AND N_NO_SAFETY_ERR) AND ((I_PB_TEST_ON AND I_Key_TEST) OR (I_PB_Acce_ON AND I_Key_Acce)))) OR (NOT N_MODE_BEAM)) = 16#FFFF"
    };
    let key = "((NOT N_MODE_BEAM.%X0) AND N_SECU_NO_REQ_Down.%X0 AND N_Patrol_OK.%X0) = O_RLS_ACCESS.%X0";
    let (name, file) = match defect {
        Sif2Defect::None => ("sif2", "sif2.il"),
        Sif2Defect::MissingSpecVar => ("sif2_missing_spec_var", "sif2_missing_spec_var.il"),
        Sif2Defect::MissingProgramVar => ("sif2_missing_program_var", "sif2_missing_program_var.il"),
    };
    let mut m = manifest(&[file], "SIF_2");
    m.verification.bound = Some(SIF_2_BOUND);
    m.requirements.push(RequirementEntry { id: SIF_2_BEAM_ID.into(), expr: beam.into() });
    m.requirements.push(RequirementEntry { id: SIF_2_KEY_ID.into(), expr: key.into() });
    Generated { name: name.into(), sources: vec![(file.into(), src)], manifest: m }
}

/// Cycles checked for the stateful SIF-2 block.
pub const SIF_2_BOUND: usize = 4;

pub const AND_GATE_IL: &str = "FUNCTION AndGate : VOID
VAR_INPUT
    var1, var2 : BOOL;
END_VAR
VAR_OUTPUT
    result : BOOL;
END_VAR
result := var1 AND var2;
//#ASSERT (var1 AND var2) = result;
END_FUNCTION
";

pub const LATCH_IL: &str = "FUNCTION_BLOCK Latch
VAR_INPUT
    c1, c2 : BOOL;
END_VAR
VAR_OUTPUT
    result : BOOL;
END_VAR
IF c1 THEN
    result := FALSE;
ELSIF c2 THEN
    result := TRUE;
END_IF;
END_FUNCTION_BLOCK
";

/// Every corpus program, in a fixed order.
pub fn corpus_entries() -> Vec<Generated> {
    let mut out = vec![
        gen_sif_x1(&SifX1Params::default()),
        gen_sif_x1(&SifX1Params { drop_bypass: true, ..SifX1Params::default() }),
    ];
    let mut reduced = gen_sif_x1(&SifX1Params::reduced());
    reduced.manifest.verification.engine = Some("explicit".into());
    out.push(reduced);
    out.push(gen_sif_2(Sif2Defect::None));
    out.push(gen_sif_2(Sif2Defect::MissingSpecVar));
    out.push(gen_sif_2(Sif2Defect::MissingProgramVar));

    let mut and_gate = manifest(&["and_gate.il"], "AndGate");
    and_gate.verification.bound = Some(1);
    out.push(Generated { name: "and_gate".into(), sources: vec![("and_gate.il".into(), AND_GATE_IL.into())], manifest: and_gate });

    let mut and_fbd = manifest(&["and_gate_fbd.xml"], "FbdBlock");
    and_fbd.requirements.push(RequirementEntry { id: "AND".into(), expr: "(var1 AND var2) = tmp1".into() });
    out.push(Generated {
        name: "and_gate_fbd".into(),
        sources: vec![("and_gate_fbd.xml".into(), fbd::AND_GATE_XML.into())],
        manifest: and_fbd,
    });

    let mut latch = manifest(&["latch.il"], "Latch");
    latch.verification.bound = Some(3);
    latch.templates.push(TemplateEntry {
        id: "LATCH".into(),
        target: "result".into(),
        cases: vec![
            TemplateCase { guard: "c1".into(), value: false },
            TemplateCase { guard: "c2".into(), value: true },
        ],
        hold: true,
    });
    out.push(Generated { name: "latch".into(), sources: vec![("latch.il".into(), LATCH_IL.into())], manifest: latch });
    out
}

/// Exit code `scanverif verify` gives for each corpus manifest.
pub fn expected_exit_code(name: &str) -> Option<i32> {
    Some(match name {
        "sif_x1" | "sif_x1_reduced" | "sif2" | "and_gate" | "and_gate_fbd" | "latch" => 0,
        "sif_x1_no_bypass" | "sif2_missing_spec_var" | "sif2_missing_program_var" => 1,
        _ => return None,
    })
}

/// Parameters recorded next to the generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lockfile {
    pub generator: String,
    pub version: String,
    pub sif_x1: SifX1Params,
    pub sif_x1_reduced: SifX1Params,
    pub sif2_defects: Vec<Sif2Defect>,
    pub sif2_bound: usize,
    pub entries: Vec<String>,
}

pub fn lockfile() -> Lockfile {
    Lockfile {
        generator: "scanverif gen".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        sif_x1: SifX1Params::default(),
        sif_x1_reduced: SifX1Params::reduced(),
        sif2_defects: vec![Sif2Defect::None, Sif2Defect::MissingSpecVar, Sif2Defect::MissingProgramVar],
        sif2_bound: SIF_2_BOUND,
        entries: corpus_entries().into_iter().map(|g| g.name).collect(),
    }
}

pub const LOCKFILE_NAME: &str = "corpus.lock";

/// All files of the corpus directory as (relative path, contents).
pub fn corpus_files() -> Vec<(String, String)> {
    let mut files = Vec::new();
    for g in corpus_entries() {
        for (f, text) in &g.sources {
            files.push((f.clone(), text.clone()));
        }
        files.push((format!("{}.toml", g.name), g.manifest.to_toml()));
    }
    files.push((LOCKFILE_NAME.into(), toml::to_string(&lockfile()).expect("lockfile serializes")));
    files
}

/// Writes the corpus into `dir`; returns the written paths.
pub fn write_corpus(dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, text) in corpus_files() {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests;
