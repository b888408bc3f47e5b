//! Textual circuit export and parsing.
//!
//! Two dialects:
//!
//! * `Qasm` — a portable OPENQASM-2-style listing of the decomposed circuit
//!   (gates ry/rz/h/x/z/cx/cz, barrier, measure). Circuits with classically
//!   conditioned gates cannot be expressed here and are rejected.
//! * `Annotated` — a line-oriented native format that keeps multi-qubit
//!   controls, conditionals, and qubit role annotations.
//!
//! Both exporters emit canonical text: parsing an exported string and
//! re-exporting it reproduces the bytes exactly (angles are printed with
//! Rust's shortest round-trip `f64` formatting).

use std::fmt::Write as _;

use crate::circuit::{Circuit, CircuitOp, QubitRole};
use crate::error::CircuitError;
use crate::gate::{GateKind, GateOp};
use crate::real::{as_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Qasm,
    Annotated,
}

impl Dialect {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qasm" => Some(Dialect::Qasm),
            "annotated" => Some(Dialect::Annotated),
            _ => None,
        }
    }
}

/// Renders a circuit in the requested dialect.
pub fn export_circuit_text<T: Real>(
    circuit: &Circuit<T>,
    dialect: Dialect,
) -> Result<String, CircuitError> {
    match dialect {
        Dialect::Qasm => export_qasm(circuit),
        Dialect::Annotated => export_annotated(circuit),
    }
}

fn export_qasm<T: Real>(circuit: &Circuit<T>) -> Result<String, CircuitError> {
    if circuit.has_conditionals() {
        return Err(CircuitError::FeedforwardNotExportable);
    }
    let lowered = circuit.decompose()?;
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", lowered.n_qubits());
    if lowered.n_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", lowered.n_clbits());
    }
    for op in lowered.ops() {
        match op {
            CircuitOp::Barrier => out.push_str("barrier q;\n"),
            CircuitOp::Measure { qubit, clbit } => {
                let _ = writeln!(out, "measure q[{qubit}] -> c[{clbit}];");
            }
            CircuitOp::Gate(g) => {
                let line = match (&g.kind, g.controls.len()) {
                    (GateKind::Ry(t), 0) => format!("ry({}) q[{}];", as_f64(*t), g.target),
                    (GateKind::Rz(t), 0) => format!("rz({}) q[{}];", as_f64(*t), g.target),
                    (GateKind::H, 0) => format!("h q[{}];", g.target),
                    (GateKind::X, 0) => format!("x q[{}];", g.target),
                    (GateKind::Z, 0) => format!("z q[{}];", g.target),
                    (GateKind::X, 1) => {
                        format!("cx q[{}],q[{}];", g.controls[0].qubit, g.target)
                    }
                    (GateKind::Z, 1) => {
                        format!("cz q[{}],q[{}];", g.controls[0].qubit, g.target)
                    }
                    (kind, _) => {
                        return Err(CircuitError::Unexportable(kind.name().to_string()))
                    }
                };
                out.push_str(&line);
                out.push('\n');
            }
            CircuitOp::Conditional { .. } => {
                return Err(CircuitError::FeedforwardNotExportable)
            }
        }
    }
    Ok(out)
}

fn gate_spec<T: Real>(g: &GateOp<T>) -> Result<String, CircuitError> {
    let body = match &g.kind {
        GateKind::Ry(t) => format!("ry({}) {}", as_f64(*t), g.target),
        GateKind::Rz(t) => format!("rz({}) {}", as_f64(*t), g.target),
        GateKind::H => format!("h {}", g.target),
        GateKind::X => format!("x {}", g.target),
        GateKind::Z => format!("z {}", g.target),
        GateKind::Unitary(_) => {
            return Err(CircuitError::Unexportable("u2x2".into()));
        }
    };
    if g.controls.is_empty() {
        return Ok(body);
    }
    let ctrls: Vec<String> = g
        .controls
        .iter()
        .map(|c| format!("{}{}", if c.on_one { '+' } else { '-' }, c.qubit))
        .collect();
    Ok(format!("ctrl {} {}", ctrls.join(" "), body))
}

fn export_annotated<T: Real>(circuit: &Circuit<T>) -> Result<String, CircuitError> {
    let mut out = String::new();
    out.push_str("# annotated telecloning circuit\n");
    let _ = writeln!(out, "qubits {}", circuit.n_qubits());
    let _ = writeln!(out, "clbits {}", circuit.n_clbits());
    for (q, role) in circuit.roles().iter().enumerate() {
        if let Some(r) = role {
            let _ = writeln!(out, "role {q} {}", r.name());
        }
    }
    for op in circuit.ops() {
        match op {
            CircuitOp::Barrier => out.push_str("barrier\n"),
            CircuitOp::Measure { qubit, clbit } => {
                let _ = writeln!(out, "measure {qubit} -> {clbit}");
            }
            CircuitOp::Gate(g) => {
                let _ = writeln!(out, "{}", gate_spec(g)?);
            }
            CircuitOp::Conditional { clbit, gate } => {
                let _ = writeln!(out, "cond {clbit} {}", gate_spec(gate)?);
            }
        }
    }
    Ok(out)
}

/// Parses text produced by [`export_circuit_text`] (either dialect is
/// recognized from the content).
pub fn parse_circuit_text(text: &str) -> Result<Circuit<f64>, CircuitError> {
    if text.starts_with("OPENQASM") {
        parse_qasm(text)
    } else {
        parse_annotated(text)
    }
}

fn err(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, message: message.into() }
}

fn parse_f64(s: &str, line: usize) -> Result<f64, CircuitError> {
    s.parse::<f64>().map_err(|_| err(line, format!("bad angle {s:?}")))
}

fn parse_usize(s: &str, line: usize) -> Result<usize, CircuitError> {
    s.parse::<usize>().map_err(|_| err(line, format!("bad index {s:?}")))
}

fn parse_qasm(text: &str) -> Result<Circuit<f64>, CircuitError> {
    let mut circuit: Option<Circuit<f64>> = None;
    let mut n_qubits = 0usize;
    let mut n_clbits = 0usize;
    let parse_qubit = |tok: &str, line: usize| -> Result<usize, CircuitError> {
        tok.strip_prefix("q[")
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err(line, format!("expected q[i], got {tok:?}")))
            .and_then(|t| parse_usize(t, line))
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        }
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| err(line_no, "missing trailing semicolon"))?;
        if let Some(rest) = stmt.strip_prefix("qreg q[") {
            n_qubits = parse_usize(
                rest.strip_suffix(']').ok_or_else(|| err(line_no, "bad qreg"))?,
                line_no,
            )?;
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("creg c[") {
            n_clbits = parse_usize(
                rest.strip_suffix(']').ok_or_else(|| err(line_no, "bad creg"))?,
                line_no,
            )?;
            continue;
        }
        let c = circuit.get_or_insert_with(|| Circuit::new(n_qubits, n_clbits));
        if stmt == "barrier q" {
            c.barrier();
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("measure ") {
            let (qs, cs) = rest
                .split_once(" -> ")
                .ok_or_else(|| err(line_no, "bad measure statement"))?;
            let q = parse_qubit(qs, line_no)?;
            let clbit = cs
                .strip_prefix("c[")
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| err(line_no, "expected c[i]"))
                .and_then(|t| parse_usize(t, line_no))?;
            c.measure(q, clbit)?;
            continue;
        }
        let (head, args) = stmt
            .split_once(' ')
            .ok_or_else(|| err(line_no, format!("unrecognized statement {stmt:?}")))?;
        let gate = if let Some(angle) = head.strip_prefix("ry(").and_then(|h| h.strip_suffix(')')) {
            GateOp::ry(parse_qubit(args, line_no)?, parse_f64(angle, line_no)?)
        } else if let Some(angle) = head.strip_prefix("rz(").and_then(|h| h.strip_suffix(')')) {
            GateOp::rz(parse_qubit(args, line_no)?, parse_f64(angle, line_no)?)
        } else {
            match head {
                "h" => GateOp::h(parse_qubit(args, line_no)?),
                "x" => GateOp::x(parse_qubit(args, line_no)?),
                "z" => GateOp::z(parse_qubit(args, line_no)?),
                "cx" | "cz" => {
                    let (a, b) = args
                        .split_once(',')
                        .ok_or_else(|| err(line_no, "two-qubit gate needs two operands"))?;
                    let ctrl = parse_qubit(a, line_no)?;
                    let tgt = parse_qubit(b, line_no)?;
                    if head == "cx" {
                        GateOp::cnot(ctrl, tgt)
                    } else {
                        GateOp::cz(ctrl, tgt)
                    }
                }
                other => return Err(err(line_no, format!("unknown gate {other:?}"))),
            }
        };
        c.gate(gate)?;
    }
    circuit.map_or_else(|| Ok(Circuit::new(n_qubits, n_clbits)), Ok)
}

fn parse_gate_tokens(tokens: &[&str], line: usize) -> Result<GateOp<f64>, CircuitError> {
    // Optional `ctrl ±i ±j ...` prefix, then a primitive gate spec.
    let mut controls: Vec<(usize, bool)> = Vec::new();
    let mut rest = tokens;
    if rest.first() == Some(&"ctrl") {
        rest = &rest[1..];
        while let Some(tok) = rest.first() {
            let (sign, idx) = match tok.as_bytes().first() {
                Some(b'+') => (true, &tok[1..]),
                Some(b'-') => (false, &tok[1..]),
                _ => break,
            };
            controls.push((parse_usize(idx, line)?, sign));
            rest = &rest[1..];
        }
        if controls.is_empty() {
            return Err(err(line, "ctrl prefix without control bits"));
        }
    }
    let head = *rest.first().ok_or_else(|| err(line, "missing gate"))?;
    let mut gate = if let Some(angle) = head.strip_prefix("ry(").and_then(|h| h.strip_suffix(')')) {
        let target = parse_usize(rest.get(1).ok_or_else(|| err(line, "missing target"))?, line)?;
        GateOp::ry(target, parse_f64(angle, line)?)
    } else if let Some(angle) = head.strip_prefix("rz(").and_then(|h| h.strip_suffix(')')) {
        let target = parse_usize(rest.get(1).ok_or_else(|| err(line, "missing target"))?, line)?;
        GateOp::rz(target, parse_f64(angle, line)?)
    } else {
        let target = parse_usize(rest.get(1).ok_or_else(|| err(line, "missing target"))?, line)?;
        match head {
            "h" => GateOp::h(target),
            "x" => GateOp::x(target),
            "z" => GateOp::z(target),
            other => return Err(err(line, format!("unknown gate {other:?}"))),
        }
    };
    for (qubit, on_one) in controls {
        gate = if on_one { gate.controlled(qubit) } else { gate.open_controlled(qubit) };
    }
    Ok(gate)
}

fn parse_annotated(text: &str) -> Result<Circuit<f64>, CircuitError> {
    let mut n_qubits: Option<usize> = None;
    let mut n_clbits: Option<usize> = None;
    let mut circuit: Option<Circuit<f64>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "qubits" => {
                n_qubits = Some(parse_usize(
                    tokens.get(1).ok_or_else(|| err(line_no, "missing count"))?,
                    line_no,
                )?)
            }
            "clbits" => {
                n_clbits = Some(parse_usize(
                    tokens.get(1).ok_or_else(|| err(line_no, "missing count"))?,
                    line_no,
                )?)
            }
            _ => {
                let c = match circuit.as_mut() {
                    Some(c) => c,
                    None => {
                        let nq =
                            n_qubits.ok_or_else(|| err(line_no, "qubits header missing"))?;
                        circuit = Some(Circuit::new(nq, n_clbits.unwrap_or(0)));
                        circuit.as_mut().expect("just inserted")
                    }
                };
                match tokens[0] {
                    "role" => {
                        let q = parse_usize(
                            tokens.get(1).ok_or_else(|| err(line_no, "missing qubit"))?,
                            line_no,
                        )?;
                        let role = tokens
                            .get(2)
                            .and_then(|r| QubitRole::parse(r))
                            .ok_or_else(|| err(line_no, "unknown role"))?;
                        if q >= c.n_qubits() {
                            return Err(err(line_no, format!("role qubit {q} out of range")));
                        }
                        c.set_role(q, role);
                    }
                    "barrier" => c.barrier(),
                    "measure" => {
                        if tokens.len() != 4 || tokens[2] != "->" {
                            return Err(err(line_no, "expected `measure q -> c`"));
                        }
                        let q = parse_usize(tokens[1], line_no)?;
                        let cb = parse_usize(tokens[3], line_no)?;
                        c.measure(q, cb)?;
                    }
                    "cond" => {
                        let cb = parse_usize(
                            tokens.get(1).ok_or_else(|| err(line_no, "missing clbit"))?,
                            line_no,
                        )?;
                        let gate = parse_gate_tokens(&tokens[2..], line_no)?;
                        c.conditional(cb, gate)?;
                    }
                    _ => {
                        let gate = parse_gate_tokens(&tokens, line_no)?;
                        c.gate(gate)?;
                    }
                }
            }
        }
    }
    match circuit {
        Some(c) => Ok(c),
        None => Ok(Circuit::new(n_qubits.unwrap_or(0), n_clbits.unwrap_or(0))),
    }
}
