use std::collections::{BTreeMap, HashMap};

use super::{Endpoint, FbdNetwork, PartKind, SrcType};
use crate::ir::{Literal, Valuation, Value};

/// Evaluates a network directly on its gate graph, without lowering. Reads
/// come from `env`; the result maps every written sink to its value. Sinks
/// that name no access are keyed `#<uid>`.
pub fn evaluate_network(net: &FbdNetwork, env: &Valuation) -> Result<BTreeMap<String, Value>, String> {
    let mut memo: HashMap<u32, Value> = HashMap::new();
    let mut out = BTreeMap::new();
    for w in &net.wires {
        let src = w.source();
        for sink in w.sinks() {
            if let Endpoint::Ident(uid) = sink {
                let v = endpoint_value(net, src, env, &mut memo, &mut Vec::new(), None)?;
                let key = match net.access(*uid) {
                    Some(a) => a.name(),
                    None => format!("#{uid}"),
                };
                out.insert(key, v);
            }
        }
    }
    Ok(out)
}

fn endpoint_value(
    net: &FbdNetwork,
    e: &Endpoint,
    env: &Valuation,
    memo: &mut HashMap<u32, Value>,
    stack: &mut Vec<u32>,
    lane: Option<SrcType>,
) -> Result<Value, String> {
    match e {
        Endpoint::Ident(uid) => {
            let a = net.access(*uid).ok_or_else(|| format!("unknown access {uid}"))?;
            match a.constant {
                Some(Literal::Bool(b)) => Ok(Value::Bool(b)),
                Some(Literal::Word(w)) => Ok(Value::Word(w)),
                Some(Literal::Int(n)) => Ok(match lane {
                    Some(SrcType::Word) => Value::Word(n as u16),
                    _ => Value::Bool(n != 0),
                }),
                None => env.get(&a.name()).cloned().ok_or_else(|| format!("no value for `{}`", a.name())),
            }
        }
        Endpoint::Name { part, .. } => part_value(net, *part, env, memo, stack),
    }
}

fn part_value(
    net: &FbdNetwork,
    uid: u32,
    env: &Valuation,
    memo: &mut HashMap<u32, Value>,
    stack: &mut Vec<u32>,
) -> Result<Value, String> {
    if let Some(v) = memo.get(&uid) {
        return Ok(v.clone());
    }
    if stack.contains(&uid) {
        return Err(format!("cycle through part {uid}"));
    }
    stack.push(uid);
    let p = net.part(uid).ok_or_else(|| format!("unknown part {uid}"))?;
    let mut args = Vec::with_capacity(p.cardinality);
    for k in 0..p.cardinality {
        let driver = net
            .wires
            .iter()
            .find_map(|w| {
                w.sinks()
                    .any(|s| matches!(s, Endpoint::Name { part, port } if *part == uid && p.input_index(port) == Some(k)))
                    .then(|| w.source().clone())
            })
            .ok_or_else(|| format!("input {} of part {uid} is unwired", k + 1))?;
        args.push(endpoint_value(net, &driver, env, memo, stack, Some(p.src_type))?);
    }
    let v = match p.kind {
        PartKind::Not => match &args[0] {
            Value::Bool(b) => Value::Bool(!b),
            Value::Word(w) => Value::Word(!w),
            Value::Array(_) => return Err("array operand".into()),
        },
        kind => {
            let mut acc = args[0].clone();
            for a in &args[1..] {
                acc = match (acc, a) {
                    (Value::Bool(x), Value::Bool(y)) => Value::Bool(match kind {
                        PartKind::And => x & y,
                        PartKind::Or => x | y,
                        _ => x ^ y,
                    }),
                    (Value::Word(x), Value::Word(y)) => Value::Word(match kind {
                        PartKind::And => x & y,
                        PartKind::Or => x | y,
                        _ => x ^ y,
                    }),
                    _ => return Err(format!("mixed operand types at part {uid}")),
                };
            }
            acc
        }
    };
    stack.pop();
    memo.insert(uid, v.clone());
    Ok(v)
}
