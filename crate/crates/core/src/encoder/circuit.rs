use std::collections::HashMap;
use std::fmt::Write;

use serde::Serialize;

use crate::ir::SlotId;

pub type NodeId = u32;

/// Where a nondeterministic bit comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Config,
    Input,
    /// Current-state bit of a single-cycle transition circuit.
    State,
}

/// A named nondeterministic bit. `bit` indexes the flattened value of the
/// slot (LSB first for words, element order for arrays); `cycle` is 1-based
/// for inputs and 0 for configuration and state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InputBit {
    pub kind: InputKind,
    pub slot: SlotId,
    pub bit: u32,
    pub cycle: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Const(bool),
    /// Index into [`Circuit::inputs`].
    Input(u32),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Xor(NodeId, NodeId),
    Not(NodeId),
}

/// Bit-level gate network. Nodes only refer to earlier nodes, so index order
/// is a topological order.
#[derive(Debug, Clone)]
pub struct Circuit {
    nodes: Vec<Node>,
    inputs: Vec<InputBit>,
    input_nodes: Vec<NodeId>,
    table: HashMap<Node, NodeId>,
    hashing: bool,
    pub(crate) fals: NodeId,
    pub(crate) tru: NodeId,
}

impl Default for Circuit {
    fn default() -> Self {
        Circuit::new(true)
    }
}

impl Circuit {
    /// With `hashing` off, every gate request creates a new node and no
    /// simplification is applied. Used to check that hashing is sound.
    pub fn new(hashing: bool) -> Circuit {
        let mut c = Circuit {
            nodes: Vec::new(),
            inputs: Vec::new(),
            input_nodes: Vec::new(),
            table: HashMap::new(),
            hashing,
            fals: 0,
            tru: 0,
        };
        c.fals = c.push(Node::Const(false));
        c.tru = c.push(Node::Const(true));
        c
    }

    fn push(&mut self, n: Node) -> NodeId {
        if self.hashing {
            if let Some(&id) = self.table.get(&n) {
                return id;
            }
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(n);
        if self.hashing {
            self.table.insert(n, id);
        }
        id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inputs(&self) -> &[InputBit] {
        &self.inputs
    }

    /// Node of the `i`-th input.
    pub fn input_node(&self, i: usize) -> NodeId {
        self.input_nodes[i]
    }

    pub fn constant(&self, b: bool) -> NodeId {
        if b {
            self.tru
        } else {
            self.fals
        }
    }

    pub fn const_value(&self, id: NodeId) -> Option<bool> {
        match self.nodes[id as usize] {
            Node::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn input(&mut self, bit: InputBit) -> NodeId {
        let idx = self.inputs.len() as u32;
        self.inputs.push(bit);
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node::Input(idx));
        self.input_nodes.push(id);
        id
    }

    /// `Some(x)` when `id` is `NOT x`.
    fn negated(&self, id: NodeId) -> Option<NodeId> {
        match self.nodes[id as usize] {
            Node::Not(x) => Some(x),
            _ => None,
        }
    }

    fn complementary(&self, a: NodeId, b: NodeId) -> bool {
        self.negated(a) == Some(b) || self.negated(b) == Some(a)
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        if self.hashing {
            if let Some(b) = self.const_value(a) {
                return self.constant(!b);
            }
            if let Some(x) = self.negated(a) {
                return x;
            }
        }
        self.push(Node::Not(a))
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.hashing {
            match (self.const_value(a), self.const_value(b)) {
                (Some(false), _) | (_, Some(false)) => return self.fals,
                (Some(true), _) => return b,
                (_, Some(true)) => return a,
                _ => {}
            }
            if a == b {
                return a;
            }
            if self.complementary(a, b) {
                return self.fals;
            }
        }
        let (a, b) = if self.hashing && a > b { (b, a) } else { (a, b) };
        self.push(Node::And(a, b))
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.hashing {
            match (self.const_value(a), self.const_value(b)) {
                (Some(true), _) | (_, Some(true)) => return self.tru,
                (Some(false), _) => return b,
                (_, Some(false)) => return a,
                _ => {}
            }
            if a == b {
                return a;
            }
            if self.complementary(a, b) {
                return self.tru;
            }
        }
        let (a, b) = if self.hashing && a > b { (b, a) } else { (a, b) };
        self.push(Node::Or(a, b))
    }

    pub fn xor(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.hashing {
            match (self.const_value(a), self.const_value(b)) {
                (Some(x), Some(y)) => return self.constant(x ^ y),
                (Some(false), _) => return b,
                (_, Some(false)) => return a,
                (Some(true), _) => return self.not(b),
                (_, Some(true)) => return self.not(a),
                _ => {}
            }
            if a == b {
                return self.fals;
            }
            if self.complementary(a, b) {
                return self.tru;
            }
        }
        let (a, b) = if self.hashing && a > b { (b, a) } else { (a, b) };
        self.push(Node::Xor(a, b))
    }

    /// `c ? t : e`
    pub fn mux(&mut self, c: NodeId, t: NodeId, e: NodeId) -> NodeId {
        if self.hashing && t == e {
            return t;
        }
        let nc = self.not(c);
        let l = self.and(c, t);
        let r = self.and(nc, e);
        self.or(l, r)
    }

    pub fn and_all(&mut self, bits: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut acc = self.tru;
        for b in bits {
            acc = self.and(acc, b);
        }
        acc
    }

    pub fn or_all(&mut self, bits: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut acc = self.fals;
        for b in bits {
            acc = self.or(acc, b);
        }
        acc
    }

    /// Evaluates every node for one input assignment.
    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let mut v = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let x = match *n {
                Node::Const(b) => b,
                Node::Input(i) => inputs[i as usize],
                Node::And(a, b) => v[a as usize] && v[b as usize],
                Node::Or(a, b) => v[a as usize] || v[b as usize],
                Node::Xor(a, b) => v[a as usize] ^ v[b as usize],
                Node::Not(a) => !v[a as usize],
            };
            v.push(x);
        }
        v
    }

    /// Evaluates 64 input assignments at once; bit `k` of each word belongs
    /// to assignment `k`.
    pub fn eval64(&self, inputs: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let x = match *n {
                Node::Const(b) => {
                    if b {
                        !0
                    } else {
                        0
                    }
                }
                Node::Input(i) => inputs[i as usize],
                Node::And(a, b) => v[a as usize] & v[b as usize],
                Node::Or(a, b) => v[a as usize] | v[b as usize],
                Node::Xor(a, b) => v[a as usize] ^ v[b as usize],
                Node::Not(a) => !v[a as usize],
            };
            v.push(x);
        }
        v
    }

    /// Number of gate nodes (everything except constants and inputs).
    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| !matches!(n, Node::Const(_) | Node::Input(_))).count()
    }

    /// Plain-text netlist, one node per line.
    pub fn netlist(&self, names: &dyn Fn(&InputBit) -> String) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = match *n {
                Node::Const(b) => writeln!(out, "n{i} = {}", if b { 1 } else { 0 }),
                Node::Input(k) => writeln!(out, "n{i} = input {}", names(&self.inputs[k as usize])),
                Node::And(a, b) => writeln!(out, "n{i} = and n{a} n{b}"),
                Node::Or(a, b) => writeln!(out, "n{i} = or n{a} n{b}"),
                Node::Xor(a, b) => writeln!(out, "n{i} = xor n{a} n{b}"),
                Node::Not(a) => writeln!(out, "n{i} = not n{a}"),
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit(i: u32) -> InputBit {
        InputBit { kind: InputKind::Input, slot: 0, bit: i, cycle: 1 }
    }

    #[test]
    fn double_negation_collapses() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let n = c.not(x);
        assert_eq!(c.not(n), x);
    }

    #[test]
    fn identical_gates_are_shared() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let y = c.input(bit(1));
        let a = c.and(x, y);
        assert_eq!(c.and(y, x), a);
        assert_eq!(c.gate_count(), 1);
    }

    #[test]
    fn constants_propagate() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let nx = c.not(x);
        assert_eq!(c.and(x, nx), c.fals);
        assert_eq!(c.or(x, nx), c.tru);
        assert_eq!(c.xor(x, x), c.fals);
        let t = c.tru;
        assert_eq!(c.xor(x, t), nx);
    }

    #[test]
    fn eval64_matches_scalar_eval() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let y = c.input(bit(1));
        let z = c.input(bit(2));
        let m = c.mux(x, y, z);
        let out = c.xor(m, y);
        let words = [0xF0F0_u64, 0xCCCC, 0xAAAA];
        let w = c.eval64(&words);
        for k in 0..16 {
            let ins: Vec<bool> = words.iter().map(|v| (v >> k) & 1 == 1).collect();
            assert_eq!(c.eval(&ins)[out as usize], (w[out as usize] >> k) & 1 == 1);
        }
    }
}
