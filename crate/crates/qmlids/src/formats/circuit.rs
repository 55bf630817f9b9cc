//! Line-oriented circuit text:
//!
//! ```text
//! qubits 2
//! H 0
//! RZ 1 (* 2 x0)
//! CX 0,1
//! Delay 1 @4
//! X 1 dd
//! ```
//!
//! Angle expressions use the parenthesized prefix notation of `ParamExpr`.
//! `@N` overrides the duration and `dd` marks a decoupling pulse. `#` starts
//! a comment.

use std::path::Path;

use qmlids_core::circuit::{Circuit, GateKind, Instruction, ParamExpr};

use crate::error::{Error, Result};

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.num_qubits());
    for inst in c.instructions() {
        let qs: Vec<String> = inst.qubits.iter().map(usize::to_string).collect();
        out.push_str(&format!("{} {}", inst.kind, qs.join(",")));
        if let Some(a) = &inst.angle {
            out.push_str(&format!(" {a}"));
        }
        if let Some(d) = inst.duration {
            out.push_str(&format!(" @{d}"));
        }
        if inst.decoupled {
            out.push_str(" dd");
        }
        out.push('\n');
    }
    out
}

fn line_error(n: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("circuit line {n}: {msg}"))
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n0, header) = lines.next().ok_or_else(|| Error::Data("empty circuit file".into()))?;
    let width: usize = header
        .strip_prefix("qubits")
        .and_then(|w| w.trim().parse().ok())
        .ok_or_else(|| line_error(n0, "expected `qubits <n>`"))?;
    let mut c = Circuit::new(width)?;
    for (n, line) in lines {
        let mut tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(line_error(n, "expected `GATE qubits [angle]`"));
        }
        let kind: GateKind = tokens[0].parse().map_err(|e| line_error(n, e))?;
        let qubits = tokens[1]
            .split(',')
            .map(|q| q.parse::<usize>().map_err(|_| line_error(n, format!("bad qubit `{q}`"))))
            .collect::<Result<Vec<_>>>()?;
        let mut inst = Instruction::gate(kind, &qubits);
        let mut rest = tokens.split_off(2);
        if rest.last() == Some(&"dd") {
            inst.decoupled = true;
            rest.pop();
        }
        if let Some(d) = rest.last().and_then(|t| t.strip_prefix('@')) {
            inst.duration = Some(d.parse().map_err(|_| line_error(n, format!("bad duration `{d}`")))?);
            rest.pop();
        }
        if !rest.is_empty() {
            let expr: ParamExpr = rest.join(" ").parse().map_err(|e| line_error(n, e))?;
            inst.angle = Some(expr);
        }
        c.append(inst).map_err(|e| line_error(n, e))?;
    }
    Ok(c)
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    parse_circuit(&super::read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "qubits 3\nH 0\nRZ 1 (* 2.0 (+ 3.141592653589793 (* -1.0 x0)))\nCX 0,2\nDelay 1 @4\nX 1 dd\nRZZ 0,1 0.25\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(write_circuit(&c), text);
        assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn comments_and_errors() {
        assert_eq!(parse_circuit("# bell\nqubits 2\nH 0 # first\nCX 0,1\n").unwrap().len(), 2);
        assert!(parse_circuit("").is_err());
        assert!(parse_circuit("qubits 1\nCX 0,1\n").is_err());
        assert!(parse_circuit("qubits 1\nFOO 0\n").is_err());
        assert!(parse_circuit("qubits 1\nRX 0\n").is_err());
    }
}
