use std::fmt::Write;

use super::circuit::{Circuit, InputBit, Node, NodeId};

/// DIMACS-style literal: positive or negated 1-based variable.
pub type Lit = i32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Circuit inputs paired with their variables, in input order.
    pub inputs: Vec<(InputBit, u32)>,
}

impl CnfFormula {
    pub fn to_dimacs(&self, names: &dyn Fn(&InputBit) -> String) -> String {
        let mut out = String::new();
        for (bit, var) in &self.inputs {
            let _ = writeln!(out, "c map {} {}", names(bit), var);
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for cl in &self.clauses {
            for l in cl {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }

    /// Reads the value of every circuit input from a model indexed by
    /// variable (index 0 unused).
    pub fn input_assignment(&self, model: &[bool]) -> Vec<bool> {
        self.inputs.iter().map(|(_, v)| model[*v as usize]).collect()
    }
}

/// Structural (Tseitin) encoding of `circuit` asserting `output` is TRUE.
/// Only the cone of `output` gets clauses, but every input gets a variable
/// so models map back to named bits.
pub fn to_cnf(circuit: &Circuit, output: NodeId) -> CnfFormula {
    let nodes = circuit.nodes();
    let n_inputs = circuit.inputs().len() as u32;
    let inputs = circuit.inputs().iter().enumerate().map(|(i, b)| (*b, i as u32 + 1)).collect();

    if let Some(b) = circuit.const_value(output) {
        let clauses = if b { Vec::new() } else { vec![Vec::new()] };
        return CnfFormula { num_vars: n_inputs, clauses, inputs };
    }
    let mut in_cone = vec![false; nodes.len()];
    in_cone[output as usize] = true;
    for i in (0..nodes.len()).rev() {
        if !in_cone[i] {
            continue;
        }
        match nodes[i] {
            Node::And(a, b) | Node::Or(a, b) | Node::Xor(a, b) => {
                in_cone[a as usize] = true;
                in_cone[b as usize] = true;
            }
            Node::Not(a) => in_cone[a as usize] = true,
            Node::Const(_) | Node::Input(_) => {}
        }
    }

    let mut next_var = n_inputs;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut lit = vec![0 as Lit; nodes.len()];
    let mut const_true: Option<Lit> = None;
    for (i, n) in nodes.iter().enumerate() {
        if !in_cone[i] {
            continue;
        }
        lit[i] = match *n {
            Node::Input(k) => k as Lit + 1,
            Node::Const(b) => {
                let t = *const_true.get_or_insert_with(|| {
                    next_var += 1;
                    clauses.push(vec![next_var as Lit]);
                    next_var as Lit
                });
                if b {
                    t
                } else {
                    -t
                }
            }
            Node::Not(a) => -lit[a as usize],
            Node::And(a, b) | Node::Or(a, b) | Node::Xor(a, b) => {
                next_var += 1;
                let g = next_var as Lit;
                let (x, y) = (lit[a as usize], lit[b as usize]);
                match *n {
                    Node::And(..) => {
                        clauses.push(vec![-g, x]);
                        clauses.push(vec![-g, y]);
                        clauses.push(vec![g, -x, -y]);
                    }
                    Node::Or(..) => {
                        clauses.push(vec![g, -x]);
                        clauses.push(vec![g, -y]);
                        clauses.push(vec![-g, x, y]);
                    }
                    _ => {
                        clauses.push(vec![-g, x, y]);
                        clauses.push(vec![-g, -x, -y]);
                        clauses.push(vec![g, -x, y]);
                        clauses.push(vec![g, x, -y]);
                    }
                }
                g
            }
        };
    }
    clauses.push(vec![lit[output as usize]]);
    CnfFormula { num_vars: next_var, clauses, inputs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{InputBit, InputKind};

    fn bit(i: u32) -> InputBit {
        InputBit { kind: InputKind::Input, slot: 0, bit: i, cycle: 1 }
    }

    #[test]
    fn single_and_is_three_clauses_plus_unit() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let y = c.input(bit(1));
        let g = c.and(x, y);
        let f = to_cnf(&c, g);
        assert_eq!(f.num_vars, 3);
        assert_eq!(f.clauses.len(), 4);
        assert_eq!(f.clauses.last().unwrap(), &vec![3]);
    }

    #[test]
    fn constant_false_output_gives_empty_clause() {
        let mut c = Circuit::new(true);
        c.input(bit(0));
        let f = to_cnf(&c, c.constant(false));
        assert!(f.clauses.iter().any(|cl| cl.is_empty()));
        assert_eq!(f.num_vars, 1);
    }

    #[test]
    fn dimacs_header_and_map() {
        let mut c = Circuit::new(true);
        let x = c.input(bit(0));
        let y = c.input(bit(1));
        let g = c.or(x, y);
        let text = to_cnf(&c, g).to_dimacs(&|b| format!("x.{}", b.bit));
        assert!(text.contains("c map x.1 2\n"));
        assert!(text.contains("p cnf 3 4\n"));
    }
}
