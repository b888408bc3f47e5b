//! Circuits: ordered gate/measure/barrier/conditional operations over a
//! quantum register with role annotations, plus a decomposition pass down to
//! {1-qubit gates, CX, CZ} and CNOT accounting on the decomposed form.

use crate::error::CircuitError;
use crate::gate::{GateKind, GateOp};
use crate::real::{real, Real};

/// Role of a qubit in a telecloning circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitRole {
    Message,
    Ancilla,
    Port,
    Clone,
}

impl QubitRole {
    pub fn name(self) -> &'static str {
        match self {
            QubitRole::Message => "message",
            QubitRole::Ancilla => "ancilla",
            QubitRole::Port => "port",
            QubitRole::Clone => "clone",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "message" => Some(QubitRole::Message),
            "ancilla" => Some(QubitRole::Ancilla),
            "port" => Some(QubitRole::Port),
            "clone" => Some(QubitRole::Clone),
            _ => None,
        }
    }
}

/// One circuit operation.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp<T: Real> {
    Gate(GateOp<T>),
    Barrier,
    Measure { qubit: usize, clbit: usize },
    /// Applies `gate` when the classical bit holds 1. The bit must have been
    /// written by an earlier measurement.
    Conditional { clbit: usize, gate: GateOp<T> },
}

/// A circuit over `n_qubits` qubits and `n_clbits` classical bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T: Real> {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<CircuitOp<T>>,
    roles: Vec<Option<QubitRole>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Circuit { n_qubits, n_clbits, ops: Vec::new(), roles: vec![None; n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn ops(&self) -> &[CircuitOp<T>] {
        &self.ops
    }

    pub fn roles(&self) -> &[Option<QubitRole>] {
        &self.roles
    }

    pub fn set_role(&mut self, qubit: usize, role: QubitRole) {
        self.roles[qubit] = Some(role);
    }

    /// Qubits carrying the given role, in index order.
    pub fn qubits_with_role(&self, role: QubitRole) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.roles[q] == Some(role)).collect()
    }

    pub fn gate(&mut self, gate: GateOp<T>) -> Result<(), CircuitError> {
        gate.validate(self.n_qubits)?;
        self.ops.push(CircuitOp::Gate(gate));
        Ok(())
    }

    pub fn barrier(&mut self) {
        self.ops.push(CircuitOp::Barrier);
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<(), CircuitError> {
        GateOp::<T>::x(qubit).validate(self.n_qubits)?;
        self.check_clbit(clbit)?;
        self.ops.push(CircuitOp::Measure { qubit, clbit });
        Ok(())
    }

    /// Appends a gate conditioned on `clbit == 1`. Only uncontrolled
    /// single-qubit gates may be conditioned, and the bit must already have
    /// been measured into.
    pub fn conditional(&mut self, clbit: usize, gate: GateOp<T>) -> Result<(), CircuitError> {
        gate.validate(self.n_qubits)?;
        self.check_clbit(clbit)?;
        if !gate.controls.is_empty() {
            return Err(CircuitError::BadConditionalGate);
        }
        if !self.ops.iter().any(|op| matches!(op, CircuitOp::Measure { clbit: c, .. } if *c == clbit))
        {
            return Err(CircuitError::ConditionalBeforeMeasure(clbit));
        }
        self.ops.push(CircuitOp::Conditional { clbit, gate });
        Ok(())
    }

    /// Pushes an already-validated operation (crate-internal rebuilds).
    pub(crate) fn push_op(&mut self, op: CircuitOp<T>) {
        self.ops.push(op);
    }

    fn check_clbit(&self, clbit: usize) -> Result<(), CircuitError> {
        if clbit >= self.n_clbits {
            return Err(CircuitError::ClbitOutOfRange { index: clbit, n_clbits: self.n_clbits });
        }
        Ok(())
    }

    pub fn barrier_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, CircuitOp::Barrier)).count()
    }

    pub fn has_conditionals(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, CircuitOp::Conditional { .. }))
    }

    /// Appends all operations of `other`, shifting qubit indices by
    /// `qubit_offset` and classical indices by `clbit_offset`.
    pub fn append(
        &mut self,
        other: &Circuit<T>,
        qubit_offset: usize,
        clbit_offset: usize,
    ) -> Result<(), CircuitError> {
        for op in &other.ops {
            match op {
                CircuitOp::Gate(g) => self.gate(shift_gate(g, qubit_offset))?,
                CircuitOp::Barrier => self.barrier(),
                CircuitOp::Measure { qubit, clbit } => {
                    self.measure(qubit + qubit_offset, clbit + clbit_offset)?
                }
                CircuitOp::Conditional { clbit, gate } => {
                    self.conditional(clbit + clbit_offset, shift_gate(gate, qubit_offset))?
                }
            }
        }
        Ok(())
    }

    /// Rewrites every gate in terms of uncontrolled single-qubit gates, CX,
    /// and CZ. Measurements, barriers, and conditionals pass through.
    pub fn decompose(&self) -> Result<Circuit<T>, CircuitError> {
        let mut out = Circuit::new(self.n_qubits, self.n_clbits);
        out.roles = self.roles.clone();
        for op in &self.ops {
            match op {
                CircuitOp::Gate(g) => {
                    for piece in decompose_gate(g)? {
                        out.gate(piece)?;
                    }
                }
                other => out.ops.push(other.clone()),
            }
        }
        Ok(out)
    }

    /// Number of two-qubit gates after decomposition. Conditioned gates are
    /// classically controlled single-qubit operations and do not count.
    pub fn count_cnots_emitted(&self) -> Result<usize, CircuitError> {
        let lowered = self.decompose()?;
        Ok(lowered
            .ops
            .iter()
            .filter(|op| matches!(op, CircuitOp::Gate(g) if !g.controls.is_empty()))
            .count())
    }
}

fn shift_gate<T: Real>(g: &GateOp<T>, offset: usize) -> GateOp<T> {
    let mut out = g.clone();
    out.target += offset;
    for c in &mut out.controls {
        c.qubit += offset;
    }
    out
}

/// Lowers one gate to the {1q, CX, CZ} basis.
///
/// Open controls are removed by conjugating with X on the control. A singly
/// controlled rotation uses the standard two-CNOT identity; a doubly
/// controlled RY uses an exact four-CNOT multiplexed-rotation form.
fn decompose_gate<T: Real>(g: &GateOp<T>) -> Result<Vec<GateOp<T>>, CircuitError> {
    // Strip open controls first.
    if g.controls.iter().any(|c| !c.on_one) {
        let flips: Vec<usize> =
            g.controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
        let mut closed = g.clone();
        for c in &mut closed.controls {
            c.on_one = true;
        }
        let mut seq: Vec<GateOp<T>> = flips.iter().map(|&q| GateOp::x(q)).collect();
        seq.extend(decompose_gate(&closed)?);
        seq.extend(flips.iter().map(|&q| GateOp::x(q)));
        return Ok(seq);
    }
    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    match g.controls.len() {
        0 => Ok(vec![g.clone()]),
        1 => {
            let c = g.controls[0].qubit;
            let t = g.target;
            match &g.kind {
                GateKind::X | GateKind::Z => Ok(vec![g.clone()]),
                GateKind::Ry(theta) => Ok(vec![
                    GateOp::ry(t, *theta / two),
                    GateOp::cnot(c, t),
                    GateOp::ry(t, -*theta / two),
                    GateOp::cnot(c, t),
                ]),
                GateKind::Rz(theta) => Ok(vec![
                    GateOp::rz(t, *theta / two),
                    GateOp::cnot(c, t),
                    GateOp::rz(t, -*theta / two),
                    GateOp::cnot(c, t),
                ]),
                other => Err(CircuitError::Undecomposable(format!(
                    "controlled {} is not supported",
                    other.name()
                ))),
            }
        }
        2 => match &g.kind {
            GateKind::Ry(theta) => {
                let (c1, c2) = (g.controls[0].qubit, g.controls[1].qubit);
                let t = g.target;
                let q = *theta / four;
                Ok(vec![
                    GateOp::ry(t, q),
                    GateOp::cnot(c1, t),
                    GateOp::ry(t, -q),
                    GateOp::cnot(c2, t),
                    GateOp::ry(t, q),
                    GateOp::cnot(c1, t),
                    GateOp::ry(t, -q),
                    GateOp::cnot(c2, t),
                ])
            }
            other => Err(CircuitError::Undecomposable(format!(
                "doubly controlled {} is not supported",
                other.name()
            ))),
        },
        n => Err(CircuitError::Undecomposable(format!("{n} controls"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{PureState, QuantumState};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_state(n: usize, seed: u64) -> PureState<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = PureState::<f64>::zero(n);
        for q in 0..n {
            s.apply(&GateOp::ry(q, rng.gen::<f64>() * PI)).unwrap();
            s.apply(&GateOp::rz(q, rng.gen::<f64>() * 2.0 * PI)).unwrap();
        }
        for q in 1..n {
            s.apply(&GateOp::cnot(q - 1, q)).unwrap();
        }
        s
    }

    fn assert_same_action(gate: &GateOp<f64>, n: usize) {
        for seed in 0..6 {
            let base = random_state(n, seed);
            let mut direct = base.clone();
            direct.apply(gate).unwrap();
            let mut lowered = base;
            for piece in decompose_gate(gate).unwrap() {
                lowered.apply(&piece).unwrap();
            }
            let dev = 1.0 - direct.overlap(&lowered);
            assert!(dev.abs() < 1e-12, "decomposition deviates by {dev}");
        }
    }

    #[test]
    fn cry_decomposition_is_exact() {
        assert_same_action(&GateOp::cry(0, 2, 0.813), 3);
        assert_same_action(&GateOp::cry(2, 0, -1.42), 3);
    }

    #[test]
    fn crz_decomposition_is_exact() {
        assert_same_action(&GateOp::rz(1, 0.6).controlled(2), 3);
    }

    #[test]
    fn ccry_decomposition_is_exact() {
        assert_same_action(&GateOp::ccry(0, 2, 1, 1.234), 3);
        assert_same_action(&GateOp::ccry(3, 1, 0, -0.52), 4);
    }

    #[test]
    fn open_control_decomposition_is_exact() {
        assert_same_action(&GateOp::ry(1, 0.77).open_controlled(0), 2);
        assert_same_action(&GateOp::cry(0, 2, 0.9).open_controlled(3), 4);
    }

    #[test]
    fn cnot_counting() {
        let mut c = Circuit::<f64>::new(3, 0);
        assert_eq!(c.count_cnots_emitted().unwrap(), 0);
        c.gate(GateOp::h(0)).unwrap();
        c.gate(GateOp::cnot(0, 1)).unwrap();
        assert_eq!(c.count_cnots_emitted().unwrap(), 1);
        c.gate(GateOp::cry(0, 2, 0.4)).unwrap();
        assert_eq!(c.count_cnots_emitted().unwrap(), 3);
        c.gate(GateOp::ccry(0, 1, 2, 0.4)).unwrap();
        assert_eq!(c.count_cnots_emitted().unwrap(), 7);
        c.gate(GateOp::cz(1, 2)).unwrap();
        assert_eq!(c.count_cnots_emitted().unwrap(), 8);
    }

    #[test]
    fn conditional_requires_prior_measurement() {
        let mut c = Circuit::<f64>::new(2, 1);
        assert!(matches!(
            c.conditional(0, GateOp::x(1)),
            Err(CircuitError::ConditionalBeforeMeasure(0))
        ));
        c.measure(0, 0).unwrap();
        assert!(c.conditional(0, GateOp::x(1)).is_ok());
        assert!(c.conditional(0, GateOp::cnot(0, 1)).is_err());
    }

    #[test]
    fn append_shifts_indices() {
        let mut seg = Circuit::<f64>::new(2, 0);
        seg.gate(GateOp::cnot(0, 1)).unwrap();
        let mut c = Circuit::<f64>::new(4, 2);
        c.append(&seg, 2, 0).unwrap();
        match &c.ops()[0] {
            CircuitOp::Gate(g) => {
                assert_eq!(g.target, 3);
                assert_eq!(g.controls[0].qubit, 2);
            }
            other => panic!("unexpected op {other:?}"),
        }
    }
}
