//! Importer for the FBD XML dialect: accesses, gate parts and wires.
//!
//! Documents may be bare fragments (as exported per network) or wrapped in a
//! `<Block Name=".." Type="FC|FB">` element with an `<Interface>` and one
//! `<FlgNet>` per network.

mod eval;
mod lower;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::diag::{DiagKind, Diagnostic, Diagnostics, Loc};
use crate::ir::{DataType, Expr, Literal, Pou, PouKind, Program, Section, VarDecl};

pub use eval::evaluate_network;
pub use lower::{lower_network, lower_to_ir, Lowered, TempNamer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PartKind {
    And,
    Or,
    Xor,
    Not,
}

impl PartKind {
    fn from_name(name: &str) -> Option<PartKind> {
        match name {
            "And" => Some(PartKind::And),
            "Or" => Some(PartKind::Or),
            "Xor" => Some(PartKind::Xor),
            "Not" => Some(PartKind::Not),
            _ => None,
        }
    }
}

impl fmt::Display for PartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Lane width of a gate: one BOOL lane or sixteen WORD lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SrcType {
    Bool,
    Word,
}

impl SrcType {
    pub fn data_type(self) -> DataType {
        match self {
            SrcType::Bool => DataType::Bool,
            SrcType::Word => DataType::Word,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Access {
    pub uid: u32,
    pub scope: String,
    /// Symbol components (`a.b.c` has three).
    pub symbol: Vec<String>,
    /// Set for `Scope="LiteralConstant"` accesses.
    pub constant: Option<Literal>,
    pub loc: Loc,
}

impl Access {
    pub fn name(&self) -> String {
        self.symbol.join(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub uid: u32,
    pub kind: PartKind,
    pub cardinality: usize,
    pub src_type: SrcType,
    pub loc: Loc,
}

impl Part {
    /// Port names `in1..inN` accepted on this part (`in` is an alias of `in1`
    /// on Not).
    pub fn input_index(&self, port: &str) -> Option<usize> {
        if self.kind == PartKind::Not && port == "in" {
            return Some(0);
        }
        let n: usize = port.strip_prefix("in")?.parse().ok()?;
        (1..=self.cardinality).contains(&n).then(|| n - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Ident(u32),
    Name { part: u32, port: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub uid: u32,
    pub endpoints: Vec<Endpoint>,
    pub loc: Loc,
}

impl Wire {
    /// The driving endpoint: a part output if present, else the first endpoint.
    pub fn source(&self) -> &Endpoint {
        self.endpoints
            .iter()
            .find(|e| matches!(e, Endpoint::Name { port, .. } if port == "out"))
            .unwrap_or(&self.endpoints[0])
    }

    pub fn sinks(&self) -> impl Iterator<Item = &Endpoint> {
        let src = self.source();
        self.endpoints.iter().filter(move |e| !std::ptr::eq(*e, src))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FbdNetwork {
    pub accesses: Vec<Access>,
    pub parts: Vec<Part>,
    pub wires: Vec<Wire>,
}

impl FbdNetwork {
    pub fn access(&self, uid: u32) -> Option<&Access> {
        self.accesses.iter().find(|a| a.uid == uid)
    }

    pub fn part(&self, uid: u32) -> Option<&Part> {
        self.parts.iter().find(|p| p.uid == uid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbdDocument {
    pub name: Option<String>,
    pub kind: PouKind,
    /// Declarations from `<Interface>`; empty when the document has none.
    pub interface: Vec<VarDecl>,
    pub networks: Vec<FbdNetwork>,
}

const WRAPPER: &str = "<FbdFragment>";

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn loc(&self, wrapped_offset: usize) -> Loc {
        let offset = wrapped_offset.saturating_sub(WRAPPER.len()).min(self.text.len());
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Loc::new(line, col, offset)
    }
}

fn fbd_err(msg: impl Into<String>, loc: Loc) -> Diagnostics {
    Diagnostic::at(DiagKind::Fbd, msg, loc).into()
}

/// Parses an FBD XML document (or bare fragment).
pub fn parse_fbd_xml(bytes: &[u8]) -> Result<FbdDocument, Diagnostics> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Diagnostics::from(Diagnostic::new(DiagKind::Fbd, format!("input is not UTF-8: {e}"), None)))?;
    // blank out the XML declaration so the fragment can be wrapped without
    // shifting offsets
    let mut body = text.to_string();
    if let Some(start) = body.find("<?xml") {
        if let Some(len) = body[start..].find("?>") {
            body.replace_range(start..start + len + 2, &" ".repeat(len + 2));
        }
    }
    let wrapped = format!("{WRAPPER}{body}</FbdFragment>");
    let locator = Locator { text };
    let doc = roxmltree::Document::parse(&wrapped).map_err(|e| {
        let p = e.pos();
        let col = if p.row == 1 { (p.col as usize).saturating_sub(WRAPPER.len()) } else { p.col as usize };
        let msg = e.to_string();
        fbd_err(format!("malformed XML: {msg}"), Loc::new(p.row as usize, col.max(1), 0))
    })?;
    let root = doc.root_element();
    let loc_of = |n: roxmltree::Node| locator.loc(n.range().start);

    let block = root.descendants().find(|n| n.has_tag_name("Block"));
    let name = block.and_then(|b| b.attribute("Name")).map(str::to_string);
    let kind = match block.and_then(|b| b.attribute("Type")) {
        None | Some("FC") => PouKind::Fc,
        Some("FB") => PouKind::Fb,
        Some(other) => return Err(fbd_err(format!("unknown block type `{other}`"), loc_of(block.unwrap()))),
    };

    let mut interface = Vec::new();
    if let Some(iface) = root.descendants().find(|n| n.has_tag_name("Interface")) {
        for section in iface.descendants().filter(|n| n.has_tag_name("Section")) {
            let sec = match section.attribute("Name") {
                Some("Input") => Section::Input,
                Some("Output") => Section::Output,
                Some("InOut") => Section::InOut,
                Some("Static") => Section::Static,
                Some("Temp") => Section::Temp,
                Some("Config") => Section::Config,
                other => {
                    return Err(fbd_err(format!("unknown interface section {other:?}"), loc_of(section)));
                }
            };
            for m in section.children().filter(|n| n.has_tag_name("Member")) {
                let mname = m
                    .attribute("Name")
                    .ok_or_else(|| fbd_err("interface member without Name", loc_of(m)))?;
                let dtype = match m.attribute("Datatype").map(str::to_ascii_lowercase).as_deref() {
                    Some("bool") => DataType::Bool,
                    Some("word") => DataType::Word,
                    other => {
                        return Err(fbd_err(format!("unsupported member datatype {other:?}"), loc_of(m)));
                    }
                };
                let mut d = VarDecl::new(mname, dtype, sec);
                d.loc = loc_of(m);
                interface.push(d);
            }
        }
    }

    let nets: Vec<roxmltree::Node> = root.descendants().filter(|n| n.has_tag_name("FlgNet")).collect();
    let scopes = if nets.is_empty() { vec![root] } else { nets };
    let mut networks = Vec::new();
    for scope in scopes {
        networks.push(parse_network(scope, &loc_of)?);
    }
    Ok(FbdDocument { name, kind, interface, networks })
}

fn uid_attr(n: roxmltree::Node, loc: Loc) -> Result<u32, Diagnostics> {
    let raw = n
        .attribute("UId")
        .ok_or_else(|| fbd_err(format!("<{}> without UId", n.tag_name().name()), loc))?;
    raw.trim()
        .parse()
        .map_err(|_| fbd_err(format!("UId `{raw}` is not an integer"), loc))
}

fn parse_constant(text: &str) -> Option<Literal> {
    let t = text.trim();
    match t.to_ascii_uppercase().as_str() {
        "TRUE" => return Some(Literal::Bool(true)),
        "FALSE" => return Some(Literal::Bool(false)),
        _ => {}
    }
    if let Some(hex) = t.strip_prefix("16#").or_else(|| t.strip_prefix("W#16#")) {
        return u16::from_str_radix(&hex.replace('_', ""), 16).ok().map(Literal::Word);
    }
    t.parse::<u64>().ok().map(Literal::Int)
}

fn parse_network<'a>(
    scope: roxmltree::Node<'a, 'a>,
    loc_of: &dyn Fn(roxmltree::Node) -> Loc,
) -> Result<FbdNetwork, Diagnostics> {
    let mut net = FbdNetwork::default();
    let in_scope = |n: &roxmltree::Node| {
        // nested FlgNet elements belong to their own network
        n.ancestors().skip(1).find(|a| a.has_tag_name("FlgNet") || *a == scope) == Some(scope)
    };
    for n in scope.descendants().filter(|n| n.is_element() && in_scope(n)) {
        let loc = loc_of(n);
        match n.tag_name().name() {
            "Access" => {
                let uid = uid_attr(n, loc)?;
                let scope_attr = n.attribute("Scope").unwrap_or("LocalVariable").to_string();
                let symbol: Vec<String> = n
                    .descendants()
                    .filter(|c| c.has_tag_name("Component"))
                    .filter_map(|c| c.attribute("Name").map(str::to_string))
                    .collect();
                let constant = match n.descendants().find(|c| c.has_tag_name("ConstantValue")) {
                    Some(c) => {
                        let raw = c.text().unwrap_or("");
                        Some(parse_constant(raw).ok_or_else(|| fbd_err(format!("bad constant `{raw}`"), loc))?)
                    }
                    None => None,
                };
                if symbol.is_empty() && constant.is_none() {
                    return Err(fbd_err(format!("access {uid} names no symbol"), loc));
                }
                net.accesses.push(Access { uid, scope: scope_attr, symbol, constant, loc });
            }
            "Part" => {
                let uid = uid_attr(n, loc)?;
                let pname = n.attribute("Name").unwrap_or("");
                let kind = PartKind::from_name(pname)
                    .ok_or_else(|| fbd_err(format!("unsupported part `{pname}` (UId {uid})"), loc))?;
                let mut cardinality = if kind == PartKind::Not { 1 } else { 2 };
                let mut src_type = SrcType::Bool;
                for tv in n.children().filter(|c| c.has_tag_name("TemplateValue")) {
                    let raw = tv.text().unwrap_or("").trim();
                    match tv.attribute("Type") {
                        Some("Cardinality") => {
                            cardinality = raw.parse().map_err(|_| {
                                fbd_err(format!("cardinality `{raw}` of part {uid} is not an integer"), loc_of(tv))
                            })?;
                        }
                        Some("Type") => {
                            src_type = match raw {
                                "Bool" => SrcType::Bool,
                                "Word" => SrcType::Word,
                                _ => return Err(fbd_err(format!("unsupported SrcType `{raw}`"), loc_of(tv))),
                            };
                        }
                        _ => {}
                    }
                }
                if kind == PartKind::Not && cardinality != 1 {
                    return Err(fbd_err(format!("Not part {uid} is unary but has cardinality {cardinality}"), loc));
                }
                if kind != PartKind::Not && cardinality < 2 {
                    return Err(fbd_err(format!("{kind} part {uid} needs at least 2 inputs"), loc));
                }
                net.parts.push(Part { uid, kind, cardinality, src_type, loc });
            }
            "Wire" => {
                let uid = uid_attr(n, loc)?;
                let mut endpoints = Vec::new();
                for c in n.children().filter(|c| c.is_element()) {
                    let cl = loc_of(c);
                    match c.tag_name().name() {
                        "IdentCon" => endpoints.push(Endpoint::Ident(uid_attr(c, cl)?)),
                        "NameCon" => endpoints.push(Endpoint::Name {
                            part: uid_attr(c, cl)?,
                            port: c.attribute("Name").unwrap_or("").to_string(),
                        }),
                        "OpenCon" => {}
                        other => return Err(fbd_err(format!("unexpected <{other}> in wire {uid}"), cl)),
                    }
                }
                if endpoints.len() < 2 {
                    return Err(fbd_err(format!("wire {uid} connects fewer than two endpoints"), loc));
                }
                net.wires.push(Wire { uid, endpoints, loc });
            }
            _ => {}
        }
    }
    validate(&net)?;
    Ok(net)
}

fn validate(net: &FbdNetwork) -> Result<(), Diagnostics> {
    let mut seen = HashMap::new();
    for (uid, loc) in net
        .accesses
        .iter()
        .map(|a| (a.uid, a.loc))
        .chain(net.parts.iter().map(|p| (p.uid, p.loc)))
        .chain(net.wires.iter().map(|w| (w.uid, w.loc)))
    {
        if seen.insert(uid, loc).is_some() {
            return Err(fbd_err(format!("duplicate UId {uid}"), loc));
        }
    }
    for w in &net.wires {
        let drivers = w
            .endpoints
            .iter()
            .filter(|e| matches!(e, Endpoint::Name { port, .. } if port == "out"))
            .count();
        if drivers > 1 {
            return Err(fbd_err(format!("wire {} is driven by {drivers} part outputs", w.uid), w.loc));
        }
        let src = w.source();
        for e in &w.endpoints {
            match e {
                Endpoint::Ident(uid) => {
                    // an undeclared sink names an implicit result variable;
                    // an undeclared source has nothing to read
                    if net.access(*uid).is_none() && std::ptr::eq(e, src) {
                        return Err(fbd_err(format!("wire {} references unknown UId {uid}", w.uid), w.loc));
                    }
                    if let Some(a) = net.access(*uid) {
                        if a.constant.is_some() && !std::ptr::eq(e, src) {
                            return Err(fbd_err(format!("wire {} writes to constant {uid}", w.uid), w.loc));
                        }
                    }
                }
                Endpoint::Name { part, port } => {
                    let p = net
                        .part(*part)
                        .ok_or_else(|| fbd_err(format!("wire {} references unknown UId {part}", w.uid), w.loc))?;
                    if port != "out" && p.input_index(port).is_none() {
                        return Err(fbd_err(
                            format!("part {part} ({}) has no port `{port}`", p.kind),
                            w.loc,
                        ));
                    }
                    if port == "out" && !std::ptr::eq(e, src) {
                        return Err(fbd_err(format!("wire {} has two sources", w.uid), w.loc));
                    }
                }
            }
        }
        if matches!(src, Endpoint::Name { port, .. } if port != "out") {
            return Err(fbd_err(format!("wire {} has no source", w.uid), w.loc));
        }
    }
    Ok(())
}

/// Declarations for a document without an `<Interface>`: accesses that are
/// only read become inputs, accesses that are written become outputs. Types
/// come from the SrcType of the connected gates.
pub fn infer_interface(doc: &FbdDocument) -> Vec<VarDecl> {
    let mut read: BTreeMap<String, (DataType, Loc)> = BTreeMap::new();
    let mut written: BTreeMap<String, (DataType, Loc)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for net in &doc.networks {
        for w in &net.wires {
            let src = w.source();
            let lane = |e: &Endpoint| match e {
                Endpoint::Name { part, .. } => net.part(*part).map(|p| p.src_type.data_type()),
                Endpoint::Ident(_) => None,
            };
            let ty = lane(src).or_else(|| w.sinks().find_map(lane)).unwrap_or(DataType::Bool);
            for e in &w.endpoints {
                if let Endpoint::Ident(uid) = e {
                    let Some(a) = net.access(*uid) else { continue };
                    if a.constant.is_some() {
                        continue;
                    }
                    let name = a.name();
                    if !order.contains(&name) {
                        order.push(name.clone());
                    }
                    let map = if std::ptr::eq(e, src) { &mut read } else { &mut written };
                    map.entry(name).or_insert((ty.clone(), a.loc));
                }
            }
        }
    }
    order
        .into_iter()
        .map(|name| {
            let (section, (ty, loc)) = match written.get(&name) {
                Some(w) => (Section::Output, w.clone()),
                None => (Section::Input, read[&name].clone()),
            };
            let mut d = VarDecl::new(name, ty, section);
            d.loc = loc;
            d
        })
        .collect()
}

/// Builds a single-POU program from an imported document.
pub fn import_program(doc: &FbdDocument) -> Result<Program, Diagnostics> {
    let mut decls = if doc.interface.is_empty() { infer_interface(doc) } else { doc.interface.clone() };
    let mut namer = TempNamer::default();
    let mut body = Vec::new();
    for net in &doc.networks {
        let lowered = lower_network(net, &decls, &mut namer)?;
        body.extend(lowered.stmts);
        decls.extend(lowered.temps);
    }
    let name = doc.name.clone().unwrap_or_else(|| "FbdBlock".to_string());
    Ok(Program {
        pous: vec![Pou { name, kind: doc.kind, decls, body, loc: Loc::new(1, 1, 0) }],
        assertions: Vec::new(),
        entry: None,
    })
}

/// Convenience for tests and tools: the expression a constant access denotes.
pub(crate) fn constant_expr(lit: Literal, loc: Loc) -> Expr {
    Expr::new(crate::ir::ExprKind::Const(lit), loc)
}

#[cfg(test)]
mod tests;
