use super::*;
use crate::il::print_expr;
use crate::ir::StmtKind;

const AND_GATE_XML: &str = r#"<!-- Input variables -->
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

fn assigns(l: &Lowered) -> Vec<String> {
    l.stmts
        .iter()
        .map(|s| match &s.kind {
            StmtKind::Assign { target, value } => format!("{} := {}", print_expr(target), print_expr(value)),
            other => panic!("{other:?}"),
        })
        .collect()
}

#[test]
fn and_gate_export_is_captured() {
    let doc = parse_fbd_xml(AND_GATE_XML.as_bytes()).unwrap();
    let net = &doc.networks[0];
    assert_eq!(net.accesses.len(), 2);
    assert_eq!(net.parts.len(), 1);
    assert_eq!(net.parts[0].kind, PartKind::And);
    assert_eq!(net.parts[0].cardinality, 2);
    assert_eq!(net.parts[0].src_type, SrcType::Word);
    assert_eq!(net.wires.len(), 3);
}

#[test]
fn and_gate_export_lowers_to_one_and() {
    let doc = parse_fbd_xml(AND_GATE_XML.as_bytes()).unwrap();
    let decls = infer_interface(&doc);
    let l = lower_to_ir(&doc.networks[0], &decls).unwrap();
    assert_eq!(assigns(&l), vec!["tmp1 := (var1 AND var2)"]);
    assert_eq!(l.implicit_sinks[&23], "tmp1");
}

#[test]
fn dangling_reference() {
    let xml = AND_GATE_XML.replace(r#"<IdentCon UId="22" />"#, r#"<IdentCon UId="999" />"#);
    let e = parse_fbd_xml(xml.as_bytes()).unwrap_err();
    assert!(e.first().message.contains("unknown UId 999"), "{e}");
}

#[test]
fn not_is_unary() {
    let xml = r#"<Part Name="Not" UId="1"><TemplateValue Name="Card" Type="Cardinality">2</TemplateValue></Part>"#;
    let e = parse_fbd_xml(xml.as_bytes()).unwrap_err();
    assert!(e.first().message.contains("unary"), "{e}");
}

#[test]
fn unknown_part_and_bad_cardinality() {
    let e = parse_fbd_xml(br#"<Part Name="Add" UId="1"/>"#).unwrap_err();
    assert!(e.first().message.contains("unsupported part `Add`"));
    let e = parse_fbd_xml(br#"<Part Name="Or" UId="1"><TemplateValue Type="Cardinality">two</TemplateValue></Part>"#)
        .unwrap_err();
    assert!(e.first().message.contains("not an integer"));
}

#[test]
fn diagnostics_point_at_element() {
    let xml = "<Access UId=\"1\"><Symbol><Component Name=\"a\"/></Symbol></Access>\n  <Part Name=\"Nand\" UId=\"2\"/>";
    let e = parse_fbd_xml(xml.as_bytes()).unwrap_err();
    let loc = e.first().loc.unwrap();
    assert_eq!((loc.line, loc.column), (2, 3));
}

fn access(uid: u32, name: &str) -> String {
    format!(r#"<Access Scope="LocalVariable" UId="{uid}"><Symbol><Component Name="{name}"/></Symbol></Access>"#)
}

fn part(uid: u32, name: &str, card: usize) -> String {
    format!(r#"<Part Name="{name}" UId="{uid}"><TemplateValue Name="Card" Type="Cardinality">{card}</TemplateValue><TemplateValue Name="SrcType" Type="Type">Bool</TemplateValue></Part>"#)
}

fn wire(uid: u32, from: &str, to: &str) -> String {
    format!(r#"<Wire UId="{uid}">{from}{to}</Wire>"#)
}

fn ident(uid: u32) -> String {
    format!(r#"<IdentCon UId="{uid}"/>"#)
}

fn name(uid: u32, port: &str) -> String {
    format!(r#"<NameCon UId="{uid}" Name="{port}"/>"#)
}

#[test]
fn gate_chain_into_result() {
    // tmp1 -> NOT -> OR(., varn) -> result
    let xml = [
        access(1, "tmp1"),
        access(2, "varn"),
        access(3, "result"),
        part(10, "Not", 1),
        part(11, "Or", 2),
        wire(20, &ident(1), &name(10, "in")),
        wire(21, &name(10, "out"), &name(11, "in1")),
        wire(22, &ident(2), &name(11, "in2")),
        wire(23, &name(11, "out"), &ident(3)),
    ]
    .concat();
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    let decls = vec![
        VarDecl::new("tmp1", DataType::Bool, Section::Input),
        VarDecl::new("varn", DataType::Bool, Section::Input),
        VarDecl::new("result", DataType::Bool, Section::Output),
    ];
    let l = lower_to_ir(&doc.networks[0], &decls).unwrap();
    assert_eq!(assigns(&l), vec!["tmp2 := NOT tmp1", "result := (tmp2 OR varn)"]);
}

#[test]
fn identity_network_is_a_copy() {
    let xml = [access(1, "a"), access(2, "b"), wire(3, &ident(1), &ident(2))].concat();
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    let decls = infer_interface(&doc);
    assert_eq!(decls[1].section, Section::Output);
    let l = lower_to_ir(&doc.networks[0], &decls).unwrap();
    assert_eq!(assigns(&l), vec!["b := a"]);
}

#[test]
fn cycle_is_reported_with_uids() {
    let xml = [
        access(1, "a"),
        access(2, "q"),
        part(10, "And", 2),
        part(11, "Or", 2),
        wire(20, &ident(1), &name(10, "in1")),
        wire(21, &name(11, "out"), &name(10, "in2")),
        wire(22, &name(10, "out"), &name(11, "in1")),
        wire(23, &ident(1), &name(11, "in2")),
        wire(24, &name(11, "out"), &ident(2)),
    ]
    .concat();
    // wire 24 gives part 11 a second outgoing wire, which is fine
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    let decls = infer_interface(&doc);
    let e = lower_to_ir(&doc.networks[0], &decls).unwrap_err();
    let msg = &e.first().message;
    assert!(msg.contains("cycle") && msg.contains("10") && msg.contains("11"), "{msg}");
}

#[test]
fn unwired_input() {
    let xml = [
        access(1, "a"),
        access(2, "q"),
        part(10, "And", 2),
        wire(20, &ident(1), &name(10, "in1")),
        wire(21, &name(10, "out"), &ident(2)),
    ]
    .concat();
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    let e = lower_to_ir(&doc.networks[0], &infer_interface(&doc)).unwrap_err();
    assert!(e.first().message.contains("in2 of part 10 is unwired"));
}

#[test]
fn ties_break_by_ascending_uid() {
    let xml = [
        access(1, "a"),
        access(2, "b"),
        access(3, "x"),
        access(4, "y"),
        part(30, "Not", 1),
        part(20, "Not", 1),
        wire(40, &ident(1), &name(30, "in1")),
        wire(41, &ident(2), &name(20, "in1")),
        wire(42, &name(30, "out"), &ident(3)),
        wire(43, &name(20, "out"), &ident(4)),
    ]
    .concat();
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    let l = lower_to_ir(&doc.networks[0], &infer_interface(&doc)).unwrap();
    assert_eq!(assigns(&l), vec!["y := NOT b", "x := NOT a"]);
}

#[test]
fn block_with_interface_and_networks() {
    let xml = format!(
        r#"<?xml version="1.0" encoding="utf-8"?>
<Block Name="Gate" Type="FC">
<Interface><Sections>
<Section Name="Input"><Member Name="a" Datatype="Bool"/><Member Name="b" Datatype="Bool"/></Section>
<Section Name="Output"><Member Name="q" Datatype="Bool"/></Section>
</Sections></Interface>
<FlgNet>{}</FlgNet>
<FlgNet>{}</FlgNet>
</Block>"#,
        [access(1, "a"), access(2, "b"), access(3, "q"), part(4, "Xor", 2),
         wire(5, &ident(1), &name(4, "in1")), wire(6, &ident(2), &name(4, "in2")), wire(7, &name(4, "out"), &ident(3))]
        .concat(),
        [access(1, "q"), access(3, "q"), part(4, "Not", 1), wire(5, &ident(1), &name(4, "in1")), wire(7, &name(4, "out"), &ident(3))]
            .concat(),
    );
    let doc = parse_fbd_xml(xml.as_bytes()).unwrap();
    assert_eq!(doc.networks.len(), 2);
    let p = import_program(&doc).unwrap();
    assert_eq!(p.pous[0].name, "Gate");
    assert_eq!(p.pous[0].body.len(), 2);
}
