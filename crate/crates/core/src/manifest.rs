//! Verification manifests: which program to load, which requirements to
//! check and with what engine settings.
//!
//! ```toml
//! [program]
//! sources = ["sif2.il"]
//! entry = "SIF_2"
//!
//! [verification]
//! engine = "bmc"
//! bound = 4
//!
//! [[requirement]]
//! id = "BEAM"
//! expr = "((NOT N_EXT_ACCE_OK) OR (NOT N_MODE_BEAM)) = 16#FFFF"
//!
//! [[chain_template]]
//! id = "SAFE"
//! expr = "S0_AP_Pos.%X{j} = N_EISa_Safe.%X{j}"
//! chains = 16
//!
//! [[template]]
//! id = "LATCH"
//! target = "result"
//! hold = true
//! cases = [{ guard = "c1", value = false }, { guard = "c2", value = true }]
//! ```
//!
//! Source paths are relative to the manifest file.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diag::{DiagKind, Diagnostic, Diagnostics, Loc};
use crate::engines::VerificationCase;
use crate::fbd::{import_program, parse_fbd_xml};
use crate::il::{parse_expression, parse_program, SourceFile};
use crate::ir::{typecheck_program, Program, RequirementOrigin, TypedProgram};
use crate::requirements::{
    attach, compile_spec_template, instantiate_chain_cases, ChainTemplate, Requirement, SpecTemplate,
    DEFAULT_CHAINS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub program: ProgramSection,
    #[serde(default)]
    pub verification: VerificationSection,
    #[serde(default, rename = "requirement", skip_serializing_if = "Vec::is_empty")]
    pub requirements: Vec<RequirementEntry>,
    #[serde(default, rename = "chain_template", skip_serializing_if = "Vec::is_empty")]
    pub chain_templates: Vec<ChainTemplateEntry>,
    #[serde(default, rename = "template", skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<TemplateEntry>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSection {
    pub sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    /// Check `//#ASSERT` comments found in the sources.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub inline_assertions: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflicts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementEntry {
    pub id: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainTemplateEntry {
    pub id: String,
    pub expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateEntry {
    pub id: String,
    pub target: String,
    pub cases: Vec<TemplateCase>,
    #[serde(default)]
    pub hold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateCase {
    pub guard: String,
    pub value: bool,
}

/// Diagnostics together with the file they refer to.
#[derive(Debug, Clone)]
pub struct LoadError {
    pub file: Option<PathBuf>,
    pub diagnostics: Diagnostics,
}

impl LoadError {
    fn new(file: Option<&Path>, diagnostics: impl Into<Diagnostics>) -> Self {
        LoadError { file: file.map(Path::to_path_buf), diagnostics: diagnostics.into() }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match (&self.file, d.loc) {
                (Some(p), Some(_)) => write!(f, "{}:{d}", p.display())?,
                (Some(p), None) => write!(f, "{}: {d}", p.display())?,
                (None, _) => write!(f, "{d}")?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for LoadError {}

fn manifest_diag(msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagKind::Manifest, msg, None)
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Manifest, Diagnostics> {
        toml::from_str(text).map_err(|e| {
            let loc = e.span().map(|s| {
                let before = &text[..s.start];
                let line = before.matches('\n').count() + 1;
                let column = s.start - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                Loc::new(line, column, s.start)
            });
            Diagnostics::from(Diagnostic::new(DiagKind::Manifest, e.message().to_string(), loc))
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn load(path: &Path) -> Result<Manifest, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoadError::new(Some(path), manifest_diag(format!("cannot read manifest: {e}"))))?;
        Manifest::from_toml(&text).map_err(|d| LoadError::new(Some(path), d))
    }
}

/// Reads one `.il`/`.st` or `.xml` (FBD) program file.
pub fn read_program_file(path: &Path) -> Result<Program, LoadError> {
    let bytes = std::fs::read(path)
        .map_err(|e| LoadError::new(Some(path), manifest_diag(format!("cannot read program: {e}"))))?;
    let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    if is_xml {
        let doc = parse_fbd_xml(&bytes).map_err(|d| LoadError::new(Some(path), d))?;
        import_program(&doc).map_err(|d| LoadError::new(Some(path), d))
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| LoadError::new(Some(path), manifest_diag("program file is not UTF-8")))?;
        parse_program(&SourceFile::new(path.display().to_string(), text)).map_err(|d| LoadError::new(Some(path), d))
    }
}

/// Concatenates the POUs of several files into one program.
pub fn read_sources(paths: &[PathBuf], entry: Option<&str>) -> Result<Program, LoadError> {
    let mut program = Program { pous: Vec::new(), assertions: Vec::new(), entry: entry.map(str::to_string) };
    for p in paths {
        let part = read_program_file(p)?;
        for pou in &part.pous {
            if program.pou(&pou.name).is_some() {
                return Err(LoadError::new(
                    Some(p),
                    Diagnostic::new(DiagKind::Declaration, format!("POU `{}` is defined twice", pou.name), Some(pou.loc)),
                ));
            }
        }
        program.pous.extend(part.pous);
        program.assertions.extend(part.assertions);
    }
    Ok(program)
}

/// A manifest resolved against its program.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub sources: Vec<PathBuf>,
    /// The program with every requirement attached.
    pub program: TypedProgram,
    /// Requirement ids to check, in manifest order after inline ones.
    pub requirement_ids: Vec<String>,
}

impl Prepared {
    pub fn load(manifest_path: &Path) -> Result<Prepared, LoadError> {
        let manifest = Manifest::load(manifest_path)?;
        Prepared::from_manifest(manifest, manifest_path)
    }

    pub fn from_manifest(manifest: Manifest, manifest_path: &Path) -> Result<Prepared, LoadError> {
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let here = Some(manifest_path);
        if manifest.program.sources.is_empty() {
            return Err(LoadError::new(here, manifest_diag("[program] sources is empty")));
        }
        let sources: Vec<PathBuf> = manifest.program.sources.iter().map(|s| base.join(s)).collect();
        for s in &sources {
            if !s.is_file() {
                return Err(LoadError::new(here, manifest_diag(format!("source file {} does not exist", s.display()))));
            }
        }
        let untyped = read_sources(&sources, manifest.program.entry.as_deref())?;
        let first = sources.first().map(PathBuf::as_path);
        let typed = typecheck_program(&untyped).map_err(|d| LoadError::new(first, d))?;

        let mut ids: Vec<String> = Vec::new();
        if manifest.program.inline_assertions {
            ids.extend(typed.requirements.iter().map(|r| r.id.clone()));
        }
        let mut extra: Vec<Requirement> = Vec::new();
        let req_diag = |what: &str, id: &str, d: Diagnostics| {
            let d = Diagnostics(
                d.0.into_iter()
                    .map(|x| Diagnostic { message: format!("{what} `{id}`: {}", x.message), loc: None, ..x })
                    .collect(),
            );
            LoadError::new(here, d)
        };
        for r in &manifest.requirements {
            let expr = parse_expression(&r.expr, Loc::new(1, 1, 0)).map_err(|d| req_diag("requirement", &r.id, d))?;
            let mut req = Requirement::new(&r.id, expr, RequirementOrigin::Manifest);
            req.text = r.expr.trim().to_string();
            extra.push(req);
        }
        for t in &manifest.chain_templates {
            let ct = ChainTemplate { id: t.id.clone(), text: t.expr.clone(), chains: t.chains.unwrap_or(DEFAULT_CHAINS) };
            let reqs = instantiate_chain_cases(&ct, &typed).map_err(|d| req_diag("chain template", &t.id, d))?;
            extra.extend(reqs);
        }
        for t in &manifest.templates {
            let parse = |s: &str| parse_expression(s, Loc::new(1, 1, 0)).map_err(|d| req_diag("template", &t.id, d));
            let mut cases = Vec::new();
            for c in &t.cases {
                cases.push((parse(&c.guard)?, c.value));
            }
            let st = SpecTemplate { target: parse(&t.target)?, cases, hold_else: t.hold };
            let expr = compile_spec_template(&st, &typed).map_err(|d| req_diag("template", &t.id, d))?;
            extra.push(Requirement::new(&t.id, expr, RequirementOrigin::Template));
        }
        let mut seen: BTreeSet<&str> = typed.requirements.iter().map(|r| r.id.as_str()).collect();
        for r in &extra {
            if !seen.insert(&r.id) {
                return Err(LoadError::new(here, manifest_diag(format!("requirement id `{}` is used twice", r.id))));
            }
        }
        let program = attach(&typed, &extra).map_err(|d| {
            LoadError::new(here, Diagnostics(d.0.into_iter().map(|x| Diagnostic { loc: None, ..x }).collect()))
        })?;
        ids.extend(extra.iter().map(|r| r.id.clone()));
        Ok(Prepared { manifest, manifest_path: manifest_path.to_path_buf(), sources, program, requirement_ids: ids })
    }

    /// One case per requirement; `bound` overrides the manifest's.
    pub fn cases(&self, bound: Option<usize>) -> Vec<VerificationCase> {
        let bound = bound.or(self.manifest.verification.bound);
        self.requirement_ids
            .iter()
            .map(|id| VerificationCase::new(&self.program, id, bound).expect("requirement is attached"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_toml() {
        let m = Manifest {
            program: ProgramSection { sources: vec!["a.il".into()], entry: Some("A".into()), inline_assertions: true },
            verification: VerificationSection { engine: Some("bmc".into()), bound: Some(2), ..Default::default() },
            requirements: vec![RequirementEntry { id: "R".into(), expr: "x = y".into() }],
            chain_templates: vec![ChainTemplateEntry { id: "C".into(), expr: "w.%X{j}".into(), chains: Some(2) }],
            templates: vec![TemplateEntry {
                id: "T".into(),
                target: "q".into(),
                cases: vec![TemplateCase { guard: "c".into(), value: true }],
                hold: true,
            }],
        };
        assert_eq!(Manifest::from_toml(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn unknown_key_has_location() {
        let e = Manifest::from_toml("[program]\nsources = []\nbogus = 1\n").unwrap_err();
        assert_eq!(e.first().loc.map(|l| l.line), Some(3));
        assert!(e.first().message.contains("bogus"));
    }
}
