use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Logic function a CGP node can implement.
///
/// Every node carries two fan-in genes; functions with a smaller arity
/// simply ignore the trailing ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateFunction {
    Buf,
    Inv,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Const0,
    Const1,
}

impl GateFunction {
    pub const ALL: [GateFunction; 10] = [
        GateFunction::Buf,
        GateFunction::Inv,
        GateFunction::And,
        GateFunction::Or,
        GateFunction::Xor,
        GateFunction::Nand,
        GateFunction::Nor,
        GateFunction::Xnor,
        GateFunction::Const0,
        GateFunction::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateFunction::Const0 | GateFunction::Const1 => 0,
            GateFunction::Buf | GateFunction::Inv => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateFunction::Buf => "BUF",
            GateFunction::Inv => "INV",
            GateFunction::And => "AND",
            GateFunction::Or => "OR",
            GateFunction::Xor => "XOR",
            GateFunction::Nand => "NAND",
            GateFunction::Nor => "NOR",
            GateFunction::Xnor => "XNOR",
            GateFunction::Const0 => "CONST0",
            GateFunction::Const1 => "CONST1",
        }
    }

    /// Dense index in [`GateFunction::ALL`], handy for lookup tables.
    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// Evaluates the function on 64 input vectors at once.
    #[inline]
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateFunction::Buf => a,
            GateFunction::Inv => !a,
            GateFunction::And => a & b,
            GateFunction::Or => a | b,
            GateFunction::Xor => a ^ b,
            GateFunction::Nand => !(a & b),
            GateFunction::Nor => !(a | b),
            GateFunction::Xnor => !(a ^ b),
            GateFunction::Const0 => 0,
            GateFunction::Const1 => u64::MAX,
        }
    }

    pub fn eval_bool(self, a: bool, b: bool) -> bool {
        self.eval_word(a as u64, b as u64) & 1 == 1
    }
}

impl fmt::Display for GateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gate function `{0}`")]
pub struct UnknownGateFunction(pub String);

impl FromStr for GateFunction {
    type Err = UnknownGateFunction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateFunction::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownGateFunction(s.to_string()))
    }
}

/// Default function set: the eight one- and two-input gates plus both constants.
pub fn default_gate_set() -> Vec<GateFunction> {
    GateFunction::ALL.to_vec()
}

/// The four-function set `{INV, AND, OR, XOR}` with codes 0..3, as used in the
/// classic full-adder encoding example.
pub fn minimal_gate_set() -> Vec<GateFunction> {
    vec![
        GateFunction::Inv,
        GateFunction::And,
        GateFunction::Or,
        GateFunction::Xor,
    ]
}
