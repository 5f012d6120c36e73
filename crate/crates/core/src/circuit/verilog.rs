use std::fmt::Write;

use super::{CircuitError, GateFunction, Netlist};

/// Writes the netlist as a structural Verilog-2001 module with ports
/// `input wire [n_i-1:0] x` and `output wire [n_o-1:0] y`. Every gate becomes
/// a one-bit wire driven by a continuous assignment.
pub fn export_verilog(netlist: &Netlist, module_name: &str) -> Result<String, CircuitError> {
    if netlist.outputs().is_empty() {
        return Err(CircuitError::NoOutputs);
    }
    if !is_identifier(module_name) {
        return Err(CircuitError::InvalidModuleName(module_name.to_string()));
    }
    let n_i = netlist.inputs();
    let signal = |s: usize| {
        if s < n_i {
            format!("x[{s}]")
        } else {
            format!("n{}", s - n_i)
        }
    };

    let mut v = String::new();
    writeln!(v, "module {module_name} (").unwrap();
    writeln!(v, "  input  wire [{}:0] x,", n_i - 1).unwrap();
    writeln!(v, "  output wire [{}:0] y", netlist.outputs().len() - 1).unwrap();
    writeln!(v, ");").unwrap();
    for g in 0..netlist.gates().len() {
        writeln!(v, "  wire n{g};").unwrap();
    }
    for (g, gate) in netlist.gates().iter().enumerate() {
        let ins: Vec<String> = gate.fan_ins().iter().map(|&s| signal(s)).collect();
        let expr = match gate.function() {
            GateFunction::Buf => ins[0].clone(),
            GateFunction::Inv => format!("~{}", ins[0]),
            GateFunction::And => format!("{} & {}", ins[0], ins[1]),
            GateFunction::Or => format!("{} | {}", ins[0], ins[1]),
            GateFunction::Xor => format!("{} ^ {}", ins[0], ins[1]),
            GateFunction::Nand => format!("~({} & {})", ins[0], ins[1]),
            GateFunction::Nor => format!("~({} | {})", ins[0], ins[1]),
            GateFunction::Xnor => format!("~({} ^ {})", ins[0], ins[1]),
            GateFunction::Const0 => "1'b0".to_string(),
            GateFunction::Const1 => "1'b1".to_string(),
        };
        writeln!(v, "  assign n{g} = {expr};").unwrap();
    }
    for (j, &o) in netlist.outputs().iter().enumerate() {
        writeln!(v, "  assign y[{j}] = {};", signal(o)).unwrap();
    }
    writeln!(v, "endmodule").unwrap();
    Ok(v)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}
