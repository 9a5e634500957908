use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{constant_expr, fbd_err, Endpoint, FbdNetwork, Part, PartKind};
use crate::diag::{Diagnostics, Loc};
use crate::ir::{BinOp, DataType, Expr, ExprKind, Section, Stmt, StmtKind, VarDecl};

/// Result of lowering one network: statements plus the temporaries they
/// introduced (declared VAR_TEMP).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lowered {
    pub stmts: Vec<Stmt>,
    pub temps: Vec<VarDecl>,
    /// Names chosen for IdentCon sinks that match no access, by UId.
    pub implicit_sinks: BTreeMap<u32, String>,
}

/// Hands out `tmp1`, `tmp2`, ... skipping names that are already declared.
#[derive(Debug, Clone, Default)]
pub struct TempNamer {
    next: usize,
}

impl TempNamer {
    fn fresh(&mut self, taken: &dyn Fn(&str) -> bool) -> String {
        loop {
            self.next += 1;
            let name = format!("tmp{}", self.next);
            if !taken(&name) {
                return name;
            }
        }
    }
}

/// Lowers a single network with a fresh temporary namer.
pub fn lower_to_ir(net: &FbdNetwork, decls: &[VarDecl]) -> Result<Lowered, Diagnostics> {
    lower_network(net, decls, &mut TempNamer::default())
}

/// Lowers a network to assignments, one per part, in dependency order. Ties
/// are broken by ascending part UId.
pub fn lower_network(net: &FbdNetwork, decls: &[VarDecl], namer: &mut TempNamer) -> Result<Lowered, Diagnostics> {
    let mut out = Lowered::default();
    let declared = |name: &str, temps: &[VarDecl]| {
        decls.iter().chain(temps).find(|d| d.name == name).map(|d| d.dtype.clone())
    };

    // undeclared IdentCon sinks name implicit result variables
    let mut implicit: BTreeMap<u32, String> = BTreeMap::new();
    for w in &net.wires {
        for e in w.sinks() {
            if let Endpoint::Ident(uid) = e {
                if net.access(*uid).is_none() && !implicit.contains_key(uid) {
                    let ty = match w.source() {
                        Endpoint::Name { part, .. } => net.part(*part).unwrap().src_type.data_type(),
                        Endpoint::Ident(src) => access_type(net, *src, decls)?,
                    };
                    let name = namer.fresh(&|n| declared(n, &out.temps).is_some());
                    out.temps.push(temp_decl(&name, ty, w.loc));
                    implicit.insert(*uid, name);
                }
            }
        }
    }

    let var_name = |uid: u32| -> Result<String, Diagnostics> {
        if let Some(n) = implicit.get(&uid) {
            return Ok(n.clone());
        }
        let a = net.access(uid).expect("validated");
        let name = a.name();
        if !decls.iter().any(|d| d.name == name) {
            return Err(fbd_err(format!("access `{name}` (UId {uid}) is not declared"), a.loc));
        }
        Ok(name)
    };

    // drivers of every part input port, and variable sinks of every part output
    let mut inputs: HashMap<u32, Vec<Vec<&Endpoint>>> =
        net.parts.iter().map(|p| (p.uid, vec![Vec::new(); p.cardinality])).collect();
    let mut out_sinks: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut out_wired: BTreeSet<u32> = BTreeSet::new();
    let mut copies: Vec<(u32, u32, Loc)> = Vec::new();
    for w in &net.wires {
        let src = w.source();
        if let Endpoint::Name { part, .. } = src {
            out_wired.insert(*part);
        }
        for e in w.sinks() {
            match (src, e) {
                (_, Endpoint::Name { part, port }) => {
                    let p = net.part(*part).unwrap();
                    let k = p.input_index(port).unwrap();
                    inputs.get_mut(part).unwrap()[k].push(src);
                }
                (Endpoint::Name { part, .. }, Endpoint::Ident(v)) => {
                    out_sinks.entry(*part).or_default().push(*v);
                }
                (Endpoint::Ident(s), Endpoint::Ident(v)) => copies.push((*s, *v, w.loc)),
            }
        }
    }

    for p in &net.parts {
        for (k, drivers) in inputs[&p.uid].iter().enumerate() {
            match drivers.len() {
                1 => {}
                0 => return Err(fbd_err(format!("input port in{} of part {} is unwired", k + 1, p.uid), p.loc)),
                n => {
                    return Err(fbd_err(format!("input port in{} of part {} has {n} drivers", k + 1, p.uid), p.loc))
                }
            }
        }
        if !out_wired.contains(&p.uid) {
            return Err(fbd_err(format!("output of part {} is not connected", p.uid), p.loc));
        }
    }

    let order = topo_order(net, &inputs)?;

    for (s, v, loc) in copies {
        let value = operand(net, &Endpoint::Ident(s), &var_name, &HashMap::new())?;
        out.stmts.push(Stmt::new(StmtKind::Assign { target: var_expr(&var_name(v)?, loc), value }, loc));
    }

    let mut result_of: HashMap<u32, String> = HashMap::new();
    for uid in order {
        let p = net.part(uid).unwrap();
        let sinks = out_sinks.get(&uid).cloned().unwrap_or_default();
        let target = match sinks.first() {
            Some(v) => var_name(*v)?,
            None => {
                let name = namer.fresh(&|n| declared(n, &out.temps).is_some());
                out.temps.push(temp_decl(&name, p.src_type.data_type(), p.loc));
                name
            }
        };
        let args = inputs[&uid]
            .iter()
            .map(|d| operand(net, d[0], &var_name, &result_of))
            .collect::<Result<Vec<_>, _>>()?;
        let value = gate_expr(p, args);
        out.stmts.push(Stmt::new(StmtKind::Assign { target: var_expr(&target, p.loc), value }, p.loc));
        for extra in sinks.iter().skip(1) {
            let name = var_name(*extra)?;
            out.stmts.push(Stmt::new(
                StmtKind::Assign { target: var_expr(&name, p.loc), value: var_expr(&target, p.loc) },
                p.loc,
            ));
        }
        result_of.insert(uid, target);
    }
    out.implicit_sinks = implicit;
    Ok(out)
}

fn temp_decl(name: &str, ty: DataType, loc: Loc) -> VarDecl {
    let mut d = VarDecl::new(name, ty, Section::Temp);
    d.loc = loc;
    d
}

fn access_type(net: &FbdNetwork, uid: u32, decls: &[VarDecl]) -> Result<DataType, Diagnostics> {
    let a = net.access(uid).expect("validated");
    if a.constant.is_some() {
        return Ok(DataType::Bool);
    }
    let name = a.name();
    decls
        .iter()
        .find(|d| d.name == name)
        .map(|d| d.dtype.clone())
        .ok_or_else(|| fbd_err(format!("access `{name}` (UId {uid}) is not declared"), a.loc))
}

fn var_expr(name: &str, loc: Loc) -> Expr {
    Expr::new(ExprKind::Var(name.to_string()), loc)
}

fn operand(
    net: &FbdNetwork,
    driver: &Endpoint,
    var_name: &dyn Fn(u32) -> Result<String, Diagnostics>,
    result_of: &HashMap<u32, String>,
) -> Result<Expr, Diagnostics> {
    match driver {
        Endpoint::Ident(uid) => {
            let a = net.access(*uid).expect("validated");
            match a.constant {
                Some(lit) => Ok(constant_expr(lit, a.loc)),
                None => Ok(var_expr(&var_name(*uid)?, a.loc)),
            }
        }
        Endpoint::Name { part, .. } => Ok(var_expr(&result_of[part], net.part(*part).unwrap().loc)),
    }
}

fn gate_expr(p: &Part, mut args: Vec<Expr>) -> Expr {
    let op = match p.kind {
        PartKind::Not => return Expr::new(ExprKind::Not(Box::new(args.remove(0))), p.loc),
        PartKind::And => BinOp::And,
        PartKind::Or => BinOp::Or,
        PartKind::Xor => BinOp::Xor,
    };
    let mut it = args.into_iter();
    let first = it.next().unwrap();
    it.fold(first, |acc, e| Expr::new(ExprKind::Binary(op, Box::new(acc), Box::new(e)), p.loc))
}

/// Kahn's algorithm over part-to-part edges with the smallest ready UId first.
fn topo_order(net: &FbdNetwork, inputs: &HashMap<u32, Vec<Vec<&Endpoint>>>) -> Result<Vec<u32>, Diagnostics> {
    let deps: BTreeMap<u32, BTreeSet<u32>> = net
        .parts
        .iter()
        .map(|p| {
            let d = inputs[&p.uid]
                .iter()
                .flatten()
                .filter_map(|e| match e {
                    Endpoint::Name { part, .. } => Some(*part),
                    Endpoint::Ident(_) => None,
                })
                .collect();
            (p.uid, d)
        })
        .collect();
    let mut remaining = deps.clone();
    let mut done = BTreeSet::new();
    let mut order = Vec::new();
    loop {
        let ready = remaining.iter().find(|(_, d)| d.iter().all(|x| done.contains(x))).map(|(u, _)| *u);
        match ready {
            Some(u) => {
                remaining.remove(&u);
                done.insert(u);
                order.push(u);
            }
            None if remaining.is_empty() => return Ok(order),
            None => {
                // walk unresolved dependencies until a part repeats
                let mut path = vec![*remaining.keys().next().unwrap()];
                loop {
                    let cur = *path.last().unwrap();
                    let next = *remaining[&cur].iter().find(|d| remaining.contains_key(d)).unwrap();
                    if let Some(pos) = path.iter().position(|&x| x == next) {
                        let mut cycle: Vec<u32> = path[pos..].to_vec();
                        cycle.reverse();
                        let list: Vec<String> = cycle.iter().map(u32::to_string).collect();
                        let loc = net.part(cycle[0]).unwrap().loc;
                        return Err(fbd_err(format!("wiring cycle through parts {}", list.join(" -> ")), loc));
                    }
                    path.push(next);
                }
            }
        }
    }
}
