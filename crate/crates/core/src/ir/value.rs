use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DataType;

/// Named variable values, ordered by name for stable rendering.
pub type Valuation = BTreeMap<String, Value>;

/// Runtime value of a BOOL, WORD or ARRAY variable.
#[derive(Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Word(u16),
    Array(Vec<Value>),
}

impl Clone for Value {
    fn clone(&self) -> Self {
        match self {
            Value::Bool(b) => Value::Bool(*b),
            Value::Word(w) => Value::Word(*w),
            Value::Array(items) => Value::Array(items.clone()),
        }
    }

    // keeps array storage when shapes match; the explicit engine relies on it
    fn clone_from(&mut self, source: &Self) {
        match (self, source) {
            (Value::Array(a), Value::Array(b)) => a.clone_from(b),
            (this, src) => *this = src.clone(),
        }
    }
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected BOOL value, found {other}"),
        }
    }

    pub fn as_word(&self) -> u16 {
        match self {
            Value::Word(w) => *w,
            other => panic!("expected WORD value, found {other}"),
        }
    }

    pub fn conforms_to(&self, ty: &DataType) -> bool {
        match (self, ty) {
            (Value::Bool(_), DataType::Bool) | (Value::Word(_), DataType::Word) => true,
            (Value::Array(items), DataType::Array { elem, lo, hi }) => {
                items.len() as i64 == hi - lo + 1 && items.iter().all(|v| v.conforms_to(elem))
            }
            _ => false,
        }
    }

    /// Appends the value's bits (LSB first for words, elements in index order).
    pub fn push_bits(&self, out: &mut Vec<bool>) {
        match self {
            Value::Bool(b) => out.push(*b),
            Value::Word(w) => out.extend((0..16).map(|i| (w >> i) & 1 == 1)),
            Value::Array(items) => items.iter().for_each(|v| v.push_bits(out)),
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::new();
        self.push_bits(&mut out);
        out
    }

    /// Rebuilds a value of `ty` from bits produced by [`Value::push_bits`].
    pub fn from_bits(ty: &DataType, bits: &[bool]) -> Value {
        fn take(ty: &DataType, bits: &[bool], pos: &mut usize) -> Value {
            match ty {
                DataType::Bool => {
                    *pos += 1;
                    Value::Bool(bits[*pos - 1])
                }
                DataType::Word => {
                    let mut w = 0u16;
                    for i in 0..16 {
                        if bits[*pos + i] {
                            w |= 1 << i;
                        }
                    }
                    *pos += 16;
                    Value::Word(w)
                }
                DataType::Array { elem, lo, hi } => {
                    Value::Array((*lo..=*hi).map(|_| take(elem, bits, pos)).collect())
                }
            }
        }
        let mut pos = 0;
        take(ty, bits, &mut pos)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Word(w) => write!(f, "16#{w:04X}"),
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn word_display_is_hex_literal() {
        assert_eq!(Value::Word(0x0009).to_string(), "16#0009");
        assert_eq!(Value::Word(0xFFFF).to_string(), "16#FFFF");
    }

    #[test]
    fn word_bits_are_lsb_first() {
        let bits = Value::Word(0b1001).to_bits();
        assert!(bits[0] && bits[3]);
        assert!(!bits[1] && !bits[2] && !bits[15]);
    }

    proptest! {
        #[test]
        fn bits_round_trip(ws in proptest::collection::vec(any::<u16>(), 3)) {
            let ty = DataType::array(DataType::Word, 1, 3);
            let v = Value::Array(ws.into_iter().map(Value::Word).collect());
            prop_assert_eq!(Value::from_bits(&ty, &v.to_bits()), v);
        }
    }
}
