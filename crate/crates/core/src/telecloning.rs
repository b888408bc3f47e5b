//! Telecloning circuit construction and CNOT cost accounting.
//!
//! A 1 → M telecloning circuit prepares a shared resource state between a
//! port qubit (plus optional ancillas) and M clone qubits, Bell-measures the
//! message against the port, and corrects the clones. The resource state is
//!
//!   with ancilla:  (1/√(M+1)) Σᵢ |D(M,i)⟩_{A,P} |D(M,i)⟩_C
//!
//! where |D(M,i)⟩ is the Dicke state of weight i, yielding clone fidelity
//! (2M+1)/(3M) for any input. The ancilla-free 2- and 3-clone variants reach
//! the same fidelity with fewer qubits but carry a port-dependent asymmetry
//! that matters only for post-selection statistics.
//!
//! Qubit layout (little-endian indices): message = 0, then the ancilla block,
//! then the port, then the clones — a line that embeds directly into
//! linear-nearest-neighbor hardware. Classical bits: 0 = message, 1 = port,
//! 2.. = clones.

use std::fmt;
use std::str::FromStr;

use crate::circuit::{Circuit, QubitRole};
use crate::error::CircuitError;
use crate::gate::GateOp;
use crate::real::{real, Real};
use crate::state::PureState;
use num_complex::Complex;

pub const MESSAGE_QUBIT: usize = 0;
pub const MESSAGE_CLBIT: usize = 0;
pub const PORT_CLBIT: usize = 1;

/// Hardware connectivity assumed by the CNOT cost formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Linear nearest neighbor.
    Lnn,
    /// All-to-all.
    Full,
}

impl Connectivity {
    pub fn id(self) -> &'static str {
        match self {
            Connectivity::Lnn => "lnn",
            Connectivity::Full => "full",
        }
    }
}

impl FromStr for Connectivity {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lnn" | "linear" => Ok(Connectivity::Lnn),
            "full" | "all-to-all" => Ok(Connectivity::Full),
            other => Err(CircuitError::UnknownConnectivity(other.to_string())),
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A Bell measurement outcome: the recorded message and port bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellOutcome {
    pub message: bool,
    pub port: bool,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome { message: false, port: false },
        BellOutcome { message: true, port: false },
        BellOutcome { message: false, port: true },
        BellOutcome { message: true, port: true },
    ];

    /// Two-character label, message bit first (the little-endian rendering of
    /// the classical register).
    pub fn label(self) -> String {
        format!("{}{}", self.message as u8, self.port as u8)
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(|b| matches!(b, b'0' | b'1')) {
            return None;
        }
        Some(BellOutcome { message: bytes[0] == b'1', port: bytes[1] == b'1' })
    }
}

/// How the teleportation step is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Mid-circuit measurement with classically conditioned corrections.
    Feedforward,
    /// Corrections become controlled gates; every measurement is terminal.
    Deferred,
    /// Fixed corrections for one assumed outcome; shots with any other
    /// recorded outcome are discarded.
    Postselect(BellOutcome),
}

impl ExecMode {
    pub fn id(self) -> &'static str {
        match self {
            ExecMode::Feedforward => "feedforward",
            ExecMode::Deferred => "deferred",
            ExecMode::Postselect(_) => "postselect",
        }
    }
}

/// A circuit family: number of clones and whether the ancilla-assisted
/// resource state is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitFamily {
    pub m_clones: usize,
    pub with_ancilla: bool,
}

impl CircuitFamily {
    pub fn new(m_clones: usize, with_ancilla: bool) -> Result<Self, CircuitError> {
        if m_clones < 2 {
            return Err(CircuitError::TooFewClones(m_clones));
        }
        if !with_ancilla && m_clones > 3 {
            return Err(CircuitError::UnsupportedCloneCount(m_clones));
        }
        Ok(CircuitFamily { m_clones, with_ancilla })
    }

    /// Stable id: `pcc`, `apcc`, `pccc`, `aapccc`, or `ancilla:M`.
    pub fn id(&self) -> String {
        match (self.m_clones, self.with_ancilla) {
            (2, false) => "pcc".into(),
            (2, true) => "apcc".into(),
            (3, false) => "pccc".into(),
            (3, true) => "aapccc".into(),
            (m, true) => format!("ancilla:{m}"),
            _ => unreachable!("constructor rejects other ancilla-free sizes"),
        }
    }

    /// The four named families, in cost order.
    pub fn named() -> [CircuitFamily; 4] {
        [
            CircuitFamily { m_clones: 2, with_ancilla: false },
            CircuitFamily { m_clones: 2, with_ancilla: true },
            CircuitFamily { m_clones: 3, with_ancilla: false },
            CircuitFamily { m_clones: 3, with_ancilla: true },
        ]
    }

    /// Total register size including the message qubit.
    pub fn n_qubits(&self) -> usize {
        if self.with_ancilla {
            2 * self.m_clones + 1
        } else {
            self.m_clones + 2
        }
    }

    pub fn port_qubit(&self) -> usize {
        if self.with_ancilla {
            self.m_clones
        } else {
            1
        }
    }

    pub fn ancilla_qubits(&self) -> Vec<usize> {
        if self.with_ancilla {
            (1..self.m_clones).collect()
        } else {
            Vec::new()
        }
    }

    pub fn clone_qubits(&self) -> Vec<usize> {
        let start = self.port_qubit() + 1;
        (start..start + self.m_clones).collect()
    }
}

impl FromStr for CircuitFamily {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcc" => CircuitFamily::new(2, false),
            "apcc" => CircuitFamily::new(2, true),
            "pccc" => CircuitFamily::new(3, false),
            "aapccc" => CircuitFamily::new(3, true),
            other => {
                let m = other
                    .strip_prefix("ancilla:")
                    .and_then(|m| m.parse::<usize>().ok())
                    .ok_or_else(|| CircuitError::UnknownFamily(other.to_string()))?;
                CircuitFamily::new(m, true)
            }
        }
    }
}

impl fmt::Display for CircuitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// A fully specified telecloning circuit: family, execution mode, and the
/// connectivity assumed for cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TelecloningSpec {
    pub family: CircuitFamily,
    pub mode: ExecMode,
    pub connectivity: Connectivity,
}

impl TelecloningSpec {
    pub fn new(family: CircuitFamily, mode: ExecMode, connectivity: Connectivity) -> Self {
        TelecloningSpec { family, mode, connectivity }
    }
}

/// The message state RZ(θ_z)·RY(θ_y)|0⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageSpec<T: Real> {
    pub theta_y: T,
    pub theta_z: T,
}

impl<T: Real> MessageSpec<T> {
    pub fn new(theta_y: T, theta_z: T) -> Self {
        MessageSpec { theta_y, theta_z }
    }

    /// The message as a single-qubit pure state (global phase fixed so the
    /// |0⟩ amplitude is real).
    pub fn state(&self) -> PureState<T> {
        let half = self.theta_y / real::<T>(2.0);
        let phase = Complex::new(self.theta_z.cos(), self.theta_z.sin());
        PureState::from_amplitudes(
            1,
            vec![Complex::new(half.cos(), T::zero()), phase * Complex::new(half.sin(), T::zero())],
        )
        .expect("message amplitudes are normalized by construction")
    }
}

/// Rotation angle 2·acos(√(x/y)), so RY of this angle maps |0⟩ to
/// √(x/y)|0⟩ + √((y−x)/y)|1⟩.
pub fn ry_angle<T: Real>(x: u64, y: u64) -> Result<T, CircuitError> {
    if y == 0 || x > y {
        return Err(CircuitError::InvalidAngleFraction { x, y });
    }
    let frac = real::<T>(x as f64 / y as f64);
    Ok(real::<T>(2.0) * frac.sqrt().acos())
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// The Dicke state |D(m, weight)⟩: the equal superposition of all
/// `m`-qubit basis states of Hamming weight `weight`.
pub fn dicke_state<T: Real>(m: usize, weight: usize) -> Result<PureState<T>, CircuitError> {
    if weight > m {
        return Err(CircuitError::DickeWeightOutOfRange { weight, m });
    }
    let dim = 1usize << m;
    let amp = real::<T>(1.0 / (binomial(m, weight) as f64).sqrt());
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
    for (i, a) in amps.iter_mut().enumerate() {
        if i.count_ones() as usize == weight {
            *a = Complex::new(amp, T::zero());
        }
    }
    Ok(PureState::from_amplitudes(m, amps)?)
}

/// Appends the Dicke preparation unitary on `reg`: it maps the unary state
/// with ones on `reg[..i]` (and zeros elsewhere) to |D(m, i)⟩ for every i.
///
/// Built from split-and-cyclic-shift blocks; each two-qubit block is a pair
/// of CNOTs around a controlled RY and each three-qubit block a pair of
/// CNOTs around a doubly controlled RY. The emitted gate sequence is the
/// same for either connectivity.
fn append_dicke_unitary<T: Real>(
    circuit: &mut Circuit<T>,
    reg: &[usize],
) -> Result<(), CircuitError> {
    let m = reg.len();
    // Position p ∈ 1..=m of the textbook construction sits on reg[m - p], so
    // the unary inputs live on the low end of `reg`.
    let q = |p: usize| reg[m - p];
    for n in (2..=m).rev() {
        let a = q(n - 1);
        let b = q(n);
        circuit.gate(GateOp::cnot(b, a))?;
        circuit.gate(GateOp::cry(a, b, -ry_angle::<T>(1, n as u64)?))?;
        circuit.gate(GateOp::cnot(b, a))?;
        for l in 2..n {
            let t = q(n - l);
            let c1 = q(n - l + 1);
            let cn = q(n);
            circuit.gate(GateOp::cnot(t, cn))?;
            circuit.gate(GateOp::ccry(c1, cn, t, ry_angle::<T>(l as u64, n as u64)?))?;
            circuit.gate(GateOp::cnot(t, cn))?;
        }
    }
    Ok(())
}

/// Standalone Dicke preparation unitary on `m` qubits. `connectivity` is
/// accepted for symmetry with the cost formulas; the emitted sequence does
/// not depend on it.
pub fn build_dicke_unitary<T: Real>(
    m: usize,
    _connectivity: Connectivity,
) -> Result<Circuit<T>, CircuitError> {
    let mut c = Circuit::new(m, 0);
    append_dicke_unitary(&mut c, &(0..m).collect::<Vec<_>>())?;
    Ok(c)
}

/// Appends the resource-state preparation on the non-message qubits,
/// shifted by `offset`. Register layout within the segment: with ancilla,
/// qubits 0..m are the ancilla/port block (port last) and m..2m the clones;
/// without ancilla, qubit 0 is the port and 1..=m the clones.
fn append_resource_state<T: Real>(
    circuit: &mut Circuit<T>,
    family: &CircuitFamily,
    offset: usize,
) -> Result<(), CircuitError> {
    let m = family.m_clones;
    if family.with_ancilla {
        // Cascade filling the block register with the unary-weight
        // superposition Σᵢ |1^i 0^{m−i}⟩/√(m+1), then copy it to the clone
        // register and apply the Dicke unitary to both halves.
        circuit.gate(GateOp::ry(offset, ry_angle::<T>(1, m as u64 + 1)?))?;
        for j in 2..=m {
            let k = (m + 2 - j) as u64;
            let theta = ry_angle::<T>(k - 1, k)?;
            let t = offset + j - 1;
            let half = theta / real::<T>(2.0);
            circuit.gate(GateOp::ry(t, half))?;
            circuit.gate(GateOp::cnot(t - 1, t))?;
            circuit.gate(GateOp::ry(t, -half))?;
        }
        for i in 0..m {
            circuit.gate(GateOp::cnot(offset + i, offset + m + i))?;
        }
        let block: Vec<usize> = (0..m).map(|i| offset + i).collect();
        let clones: Vec<usize> = (0..m).map(|i| offset + m + i).collect();
        append_dicke_unitary(circuit, &block)?;
        append_dicke_unitary(circuit, &clones)?;
        return Ok(());
    }
    let port = offset;
    let clones: Vec<usize> = (1..=m).map(|i| offset + i).collect();
    circuit.gate(GateOp::ry(port, ry_angle::<T>(2, 3)?))?;
    match m {
        2 => {
            circuit.gate(GateOp::cnot(port, clones[0]))?;
        }
        3 => {
            // Port-multiplexed rotation on the first clone: RY(γ(3,4)) when
            // the port is |0⟩ and exactly X when it is |1⟩.
            let g34 = ry_angle::<T>(3, 4)?;
            let half = g34 / real::<T>(2.0);
            circuit.gate(GateOp::ry(clones[0], half))?;
            circuit.gate(GateOp::cnot(port, clones[0]))?;
            circuit.gate(GateOp::ry(clones[0], half))?;
            // Port-controlled RY(γ(1,2)) on the second clone (one CNOT, valid
            // because the target is still |0⟩).
            let g12 = ry_angle::<T>(1, 2)?;
            let half = g12 / real::<T>(2.0);
            circuit.gate(GateOp::ry(clones[1], half))?;
            circuit.gate(GateOp::cnot(port, clones[1]))?;
            circuit.gate(GateOp::ry(clones[1], -half))?;
        }
        other => return Err(CircuitError::UnsupportedCloneCount(other)),
    }
    append_dicke_unitary(circuit, &clones)?;
    Ok(())
}

/// Standalone resource-state preparation (no message qubit): applying it to
/// |0…0⟩ yields the telecloning resource state.
pub fn build_telecloning_state<T: Real>(
    m_clones: usize,
    with_ancilla: bool,
    _connectivity: Connectivity,
) -> Result<Circuit<T>, CircuitError> {
    let family = CircuitFamily::new(m_clones, with_ancilla)?;
    let mut c = Circuit::new(family.n_qubits() - 1, 0);
    append_resource_state(&mut c, &family, 0)?;
    Ok(c)
}

fn assign_roles<T: Real>(circuit: &mut Circuit<T>, family: &CircuitFamily) {
    circuit.set_role(MESSAGE_QUBIT, QubitRole::Message);
    for q in family.ancilla_qubits() {
        circuit.set_role(q, QubitRole::Ancilla);
    }
    circuit.set_role(family.port_qubit(), QubitRole::Port);
    for q in family.clone_qubits() {
        circuit.set_role(q, QubitRole::Clone);
    }
}

/// Builds the protocol circuit: message preparation, resource state, Bell
/// measurement, and corrections, but no tomography stage.
///
/// Feedforward circuits measure message and port mid-circuit into clbits 0
/// and 1 and condition the corrections on them (X on the port bit, then Z on
/// the message bit). Deferred circuits replace the corrections with
/// controlled-X from the port and controlled-Z from the message and measure
/// nothing. Postselect circuits apply the fixed corrections for the assumed
/// outcome and measure message and port terminally.
pub fn build_protocol_circuit<T: Real>(
    spec: &TelecloningSpec,
    msg: &MessageSpec<T>,
) -> Result<Circuit<T>, CircuitError> {
    let family = spec.family;
    let mut c = Circuit::new(family.n_qubits(), 2);
    assign_roles(&mut c, &family);
    c.gate(GateOp::ry(MESSAGE_QUBIT, msg.theta_y))?;
    c.gate(GateOp::rz(MESSAGE_QUBIT, msg.theta_z))?;
    append_resource_state(&mut c, &family, 1)?;
    c.barrier();
    let port = family.port_qubit();
    let clones = family.clone_qubits();
    c.gate(GateOp::cnot(MESSAGE_QUBIT, port))?;
    c.gate(GateOp::h(MESSAGE_QUBIT))?;
    match spec.mode {
        ExecMode::Feedforward => {
            c.measure(MESSAGE_QUBIT, MESSAGE_CLBIT)?;
            c.measure(port, PORT_CLBIT)?;
            for &q in &clones {
                c.conditional(PORT_CLBIT, GateOp::x(q))?;
            }
            for &q in &clones {
                c.conditional(MESSAGE_CLBIT, GateOp::z(q))?;
            }
        }
        ExecMode::Deferred => {
            for &q in &clones {
                c.gate(GateOp::cnot(port, q))?;
            }
            for &q in &clones {
                c.gate(GateOp::cz(MESSAGE_QUBIT, q))?;
            }
        }
        ExecMode::Postselect(outcome) => {
            if outcome.port {
                for &q in &clones {
                    c.gate(GateOp::x(q))?;
                }
            }
            if outcome.message {
                for &q in &clones {
                    c.gate(GateOp::z(q))?;
                }
            }
            c.measure(MESSAGE_QUBIT, MESSAGE_CLBIT)?;
            c.measure(port, PORT_CLBIT)?;
        }
    }
    c.barrier();
    Ok(c)
}

/// Measurement basis of the tomography stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomoBasis {
    X,
    Y,
    Z,
}

impl TomoBasis {
    pub const ALL: [TomoBasis; 3] = [TomoBasis::X, TomoBasis::Y, TomoBasis::Z];

    pub fn id(self) -> char {
        match self {
            TomoBasis::X => 'x',
            TomoBasis::Y => 'y',
            TomoBasis::Z => 'z',
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(TomoBasis::X),
            "y" => Some(TomoBasis::Y),
            "z" => Some(TomoBasis::Z),
            _ => None,
        }
    }
}

/// Builds the full measurable circuit: protocol plus a tomography stage that
/// rotates every clone into `basis` and measures it. For deferred and
/// postselect modes the message and port measurements are emitted here so
/// that every measurement is terminal.
pub fn build_full_circuit<T: Real>(
    spec: &TelecloningSpec,
    msg: &MessageSpec<T>,
    basis: TomoBasis,
) -> Result<Circuit<T>, CircuitError> {
    let family = spec.family;
    let mut c = Circuit::new(family.n_qubits(), 2 + family.m_clones);
    assign_roles(&mut c, &family);
    let mut protocol = build_protocol_circuit(spec, msg)?;
    if !matches!(spec.mode, ExecMode::Feedforward) {
        // Strip any message/port measurements; they are re-emitted terminally.
        protocol = strip_measurements(&protocol);
    }
    c.append(&protocol, 0, 0)?;
    let clones = family.clone_qubits();
    for &q in &clones {
        match basis {
            TomoBasis::X => c.gate(GateOp::h(q))?,
            TomoBasis::Y => {
                c.gate(GateOp::rz(q, -T::frac_pi_2()))?;
                c.gate(GateOp::h(q))?;
            }
            TomoBasis::Z => {}
        }
    }
    c.barrier();
    if !matches!(spec.mode, ExecMode::Feedforward) {
        c.measure(MESSAGE_QUBIT, MESSAGE_CLBIT)?;
        c.measure(family.port_qubit(), PORT_CLBIT)?;
    }
    for (i, &q) in clones.iter().enumerate() {
        c.measure(q, 2 + i)?;
    }
    Ok(c)
}

fn strip_measurements<T: Real>(circuit: &Circuit<T>) -> Circuit<T> {
    let mut out = Circuit::new(circuit.n_qubits(), circuit.n_clbits());
    for (q, role) in circuit.roles().iter().enumerate() {
        if let Some(r) = role {
            out.set_role(q, *r);
        }
    }
    for op in circuit.ops() {
        if !matches!(op, crate::circuit::CircuitOp::Measure { .. }) {
            out.push_op(op.clone());
        }
    }
    out
}

/// CNOT costs of one telecloning circuit, from the closed-form counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    /// Resource-state preparation up to (not including) the Dicke unitaries.
    pub prep_cnots: u64,
    /// All Dicke preparation unitaries (two with ancilla, one without).
    pub dicke_cnots: u64,
    /// The Bell measurement (always one CNOT).
    pub bell_cnots: u64,
    /// Deferred corrections; zero for the other modes.
    pub deferred_cnots: u64,
    pub total: u64,
}

/// Closed-form CNOT cost of `spec`.
///
/// Per Dicke unitary the optimized count (5M² − 11M + 6)/2 is used; the
/// as-emitted circuits use a simpler block lowering that costs
/// (M − 1)(3M − 2) instead, which `cost_table` reports alongside.
pub fn cnot_cost(spec: &TelecloningSpec) -> CostReport {
    let m = spec.family.m_clones as u64;
    let prep_cnots = if spec.family.with_ancilla {
        match spec.connectivity {
            Connectivity::Lnn => 2 * m * m - m,
            Connectivity::Full => 2 * m - 1,
        }
    } else {
        match (m, spec.connectivity) {
            (2, _) => 1,
            (3, Connectivity::Lnn) => 3,
            (3, Connectivity::Full) => 2,
            _ => unreachable!("family constructor rejects other ancilla-free sizes"),
        }
    };
    let per_dicke = (5 * m * m + 6 - 11 * m) / 2;
    let dicke_cnots = per_dicke * if spec.family.with_ancilla { 2 } else { 1 };
    let bell_cnots = 1;
    let deferred_cnots = if matches!(spec.mode, ExecMode::Deferred) {
        match spec.connectivity {
            Connectivity::Lnn => 4 * m - 1,
            Connectivity::Full => 2 * m,
        }
    } else {
        0
    };
    CostReport {
        prep_cnots,
        dicke_cnots,
        bell_cnots,
        deferred_cnots,
        total: prep_cnots + dicke_cnots + bell_cnots + deferred_cnots,
    }
}

/// Two-qubit gate count of the as-emitted (decomposed) protocol circuit.
/// Corrections in postselect/feedforward mode are single-qubit, so the count
/// does not depend on the assumed outcome.
pub fn emitted_cnots(spec: &TelecloningSpec) -> Result<usize, CircuitError> {
    let msg = MessageSpec::new(0.0f64, 0.0);
    build_protocol_circuit::<f64>(spec, &msg)?.count_cnots_emitted()
}
