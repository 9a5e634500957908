//! FBD documents of the corpus and a generator of random gate networks.

use std::fmt::Write;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A two-input AND gate as exported by the engineering tool. The output
/// sink (UId 23) has no Access element.
pub const AND_GATE_XML: &str = r#"<!-- Input variables -->
<Access Scope="LocalVariable" UId="21">
<Symbol>
<Component Name="var1"/>
</Symbol>
</Access>
<Access Scope="LocalVariable" UId="22">
<Symbol>
<Component Name="var2"/>
</Symbol>
</Access>

<!-- AND block -->
<Part Name="And" UId="97">
<TemplateValue Name="Card" Type="Cardinality">2</TemplateValue>
<TemplateValue Name="SrcType" Type="Type">Word</TemplateValue>
</Part>

<!-- Connecting the inputs with the block -->
<Wire UId="134">
<IdentCon UId="21" />
<NameCon UId="97" Name="in1" />
</Wire>
<Wire UId="135">
<IdentCon UId="22" />
<NameCon UId="97" Name="in2" />
</Wire>

<!-- Output variable -->
<Wire UId="136">
<NameCon UId="97" Name="out" />
<IdentCon UId="23" />
</Wire>
"#;

struct Doc {
    body: String,
}

impl Doc {
    fn access(&mut self, uid: u32, name: &str) {
        let _ = writeln!(
            self.body,
            r#"<Access Scope="LocalVariable" UId="{uid}"><Symbol><Component Name="{name}"/></Symbol></Access>"#
        );
    }

    fn part(&mut self, uid: u32, kind: &str, card: usize, ty: &str) {
        let _ = writeln!(
            self.body,
            r#"<Part Name="{kind}" UId="{uid}"><TemplateValue Name="Card" Type="Cardinality">{card}</TemplateValue><TemplateValue Name="SrcType" Type="Type">{ty}</TemplateValue></Part>"#
        );
    }

    fn wire(&mut self, uid: u32, from: String, to: &[String]) {
        let _ = writeln!(self.body, r#"<Wire UId="{uid}">{from}{}</Wire>"#, to.concat());
    }
}

fn ident(uid: u32) -> String {
    format!(r#"<IdentCon UId="{uid}"/>"#)
}

fn name(uid: u32, port: &str) -> String {
    format!(r#"<NameCon UId="{uid}" Name="{port}"/>"#)
}

/// `result := NOT tmp1 OR varn`, a NOT feeding an OR.
pub fn not_or_chain() -> String {
    let mut d = Doc { body: String::new() };
    d.access(1, "tmp1");
    d.access(2, "varn");
    d.access(3, "result");
    d.part(10, "Not", 1, "Bool");
    d.part(11, "Or", 2, "Bool");
    d.wire(20, ident(1), &[name(10, "in")]);
    d.wire(21, name(10, "out"), &[name(11, "in1")]);
    d.wire(22, ident(2), &[name(11, "in2")]);
    d.wire(23, name(11, "out"), &[ident(3)]);
    d.body
}

/// A block with an interface and two networks over WORD signals: a masked
/// status check and an XOR parity of three inputs.
pub fn masked_status_block() -> String {
    let mut n1 = Doc { body: String::new() };
    n1.access(1, "stat");
    n1.access(2, "bypass");
    n1.access(3, "mask");
    n1.access(4, "ok");
    n1.part(10, "Or", 2, "Word");
    n1.part(11, "Not", 1, "Word");
    n1.part(12, "Or", 2, "Word");
    n1.wire(20, ident(1), &[name(10, "in1")]);
    n1.wire(21, ident(2), &[name(10, "in2")]);
    n1.wire(22, ident(3), &[name(11, "in")]);
    n1.wire(23, name(10, "out"), &[name(12, "in1")]);
    n1.wire(24, name(11, "out"), &[name(12, "in2")]);
    n1.wire(25, name(12, "out"), &[ident(4)]);
    let mut n2 = Doc { body: String::new() };
    n2.access(1, "stat");
    n2.access(2, "bypass");
    n2.access(3, "mask");
    n2.access(4, "parity");
    n2.access(5, "parity_copy");
    n2.part(10, "Xor", 3, "Word");
    n2.wire(20, ident(1), &[name(10, "in1")]);
    n2.wire(21, ident(2), &[name(10, "in2")]);
    n2.wire(22, ident(3), &[name(10, "in3")]);
    n2.wire(23, name(10, "out"), &[ident(4), ident(5)]);
    format!(
        r#"<?xml version="1.0" encoding="utf-8"?>
<Block Name="MaskedStatus" Type="FC">
<Interface><Sections>
<Section Name="Input"><Member Name="stat" Datatype="Word"/><Member Name="bypass" Datatype="Word"/><Member Name="mask" Datatype="Word"/></Section>
<Section Name="Output"><Member Name="ok" Datatype="Word"/><Member Name="parity" Datatype="Word"/><Member Name="parity_copy" Datatype="Word"/></Section>
</Sections></Interface>
<FlgNet>
{}</FlgNet>
<FlgNet>
{}</FlgNet>
</Block>
"#,
        n1.body, n2.body
    )
}

/// A random acyclic BOOL gate network over `inputs` variables `x1..`, with
/// every part output wired to some sink. Outputs are `q1..`.
pub fn random_network(seed: u64, inputs: usize, parts: usize) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut d = Doc { body: String::new() };
    for i in 0..inputs {
        d.access(1 + i as u32, &format!("x{}", i + 1));
    }
    let mut uid = 1000u32;
    let mut next = || {
        uid += 1;
        uid
    };
    // sources available to later parts: access uids or part uids
    let mut sources: Vec<(bool, u32)> = (0..inputs).map(|i| (false, 1 + i as u32)).collect();
    let mut consumed = vec![false; parts];
    let mut part_ids = Vec::new();
    for p in 0..parts {
        let kind = ["And", "Or", "Xor", "Not"][rng.gen_range(0..4)];
        let card = if kind == "Not" { 1 } else { rng.gen_range(2..=3) };
        let id = 500 + p as u32;
        d.part(id, kind, card, "Bool");
        for k in 1..=card {
            let pick = rng.gen_range(0..sources.len());
            let (is_part, src) = sources[pick];
            let from = if is_part { name(src, "out") } else { ident(src) };
            if is_part {
                consumed[(src - 500) as usize] = true;
            }
            let port = if kind == "Not" { "in".to_string() } else { format!("in{k}") };
            let w = next();
            d.wire(w, from, &[name(id, &port)]);
        }
        sources.push((true, id));
        part_ids.push(id);
    }
    let mut out_uid = 100u32;
    for (p, id) in part_ids.iter().enumerate() {
        if !consumed[p] || rng.gen_bool(0.3) {
            out_uid += 1;
            d.access(out_uid, &format!("q{}", out_uid - 100));
            let w = next();
            d.wire(w, name(*id, "out"), &[ident(out_uid)]);
        }
    }
    d.body
}

/// Named FBD documents checked into the corpus.
pub fn corpus_documents() -> Vec<(&'static str, String)> {
    vec![
        ("and_gate", AND_GATE_XML.to_string()),
        ("not_or_chain", not_or_chain()),
        ("masked_status", masked_status_block()),
    ]
}
