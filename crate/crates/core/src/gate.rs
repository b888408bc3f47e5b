//! Gate primitives.
//!
//! A [`GateOp`] is a single-qubit kernel plus an optional list of control
//! bits. Controls carry a polarity, so open (control-on-|0⟩) controls are
//! first-class. Two-qubit gates such as CNOT and CZ are controlled X and Z.
//!
//! Conventions: qubit 0 is the least significant bit of every basis-state
//! index.
//! `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`,
//! `RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.

use nalgebra::Matrix2;
use num_complex::Complex;

use crate::error::SimError;
use crate::real::{as_f64, real, Real};

/// One control bit of a controlled gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlBit {
    pub qubit: usize,
    /// `true` for an ordinary control (fires on |1⟩), `false` for an open
    /// control (fires on |0⟩).
    pub on_one: bool,
}

/// The single-qubit kernel of a gate.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind<T: Real> {
    Ry(T),
    Rz(T),
    H,
    X,
    Z,
    /// Arbitrary single-qubit unitary; validated at construction.
    Unitary(Matrix2<Complex<T>>),
}

impl<T: Real> GateKind<T> {
    /// The 2×2 matrix of the kernel.
    pub fn matrix(&self) -> Matrix2<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        match self {
            GateKind::Ry(theta) => {
                let (c, s) = half_angle(*theta);
                Matrix2::new(
                    Complex::new(c, T::zero()),
                    Complex::new(-s, T::zero()),
                    Complex::new(s, T::zero()),
                    Complex::new(c, T::zero()),
                )
            }
            GateKind::Rz(theta) => {
                let (c, s) = half_angle(*theta);
                Matrix2::new(Complex::new(c, -s), zero, zero, Complex::new(c, s))
            }
            GateKind::H => {
                let h = Complex::new(real::<T>(std::f64::consts::FRAC_1_SQRT_2), T::zero());
                Matrix2::new(h, h, h, -h)
            }
            GateKind::X => Matrix2::new(zero, one, one, zero),
            GateKind::Z => Matrix2::new(one, zero, zero, -one),
            GateKind::Unitary(m) => *m,
        }
    }

    /// Short lowercase mnemonic (used by the exporters).
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::Unitary(_) => "u2x2",
        }
    }
}

fn half_angle<T: Real>(theta: T) -> (T, T) {
    let half = theta / real::<T>(2.0);
    (half.cos(), half.sin())
}

/// A gate application: kernel, target qubit, and control bits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp<T: Real> {
    pub kind: GateKind<T>,
    pub target: usize,
    pub controls: Vec<ControlBit>,
}

impl<T: Real> GateOp<T> {
    pub fn new(kind: GateKind<T>, target: usize) -> Self {
        GateOp { kind, target, controls: Vec::new() }
    }

    pub fn ry(target: usize, theta: T) -> Self {
        Self::new(GateKind::Ry(theta), target)
    }

    pub fn rz(target: usize, theta: T) -> Self {
        Self::new(GateKind::Rz(theta), target)
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target)
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::Z, target)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled(control)
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self::z(target).controlled(control)
    }

    pub fn cry(control: usize, target: usize, theta: T) -> Self {
        Self::ry(target, theta).controlled(control)
    }

    /// Doubly controlled RY (both controls fire on |1⟩).
    pub fn ccry(control_a: usize, control_b: usize, target: usize, theta: T) -> Self {
        Self::ry(target, theta).controlled(control_a).controlled(control_b)
    }

    /// Arbitrary single-qubit unitary; rejects matrices that deviate from
    /// unitarity by more than ~1e-12 (scaled up for coarser scalars).
    pub fn unitary(matrix: Matrix2<Complex<T>>, target: usize) -> Result<Self, SimError> {
        let id = Matrix2::identity();
        let dev = (matrix.adjoint() * matrix - id).norm();
        let tol = unitarity_tolerance::<T>();
        if dev > tol {
            return Err(SimError::NonUnitary { deviation: as_f64(dev) });
        }
        Ok(Self::new(GateKind::Unitary(matrix), target))
    }

    /// Adds an ordinary control.
    pub fn controlled(mut self, control: usize) -> Self {
        self.controls.push(ControlBit { qubit: control, on_one: true });
        self
    }

    /// Adds an open control (fires when the control qubit is |0⟩).
    pub fn open_controlled(mut self, control: usize) -> Self {
        self.controls.push(ControlBit { qubit: control, on_one: false });
        self
    }

    /// All qubits touched by the gate (controls then target).
    pub fn qubits(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self.controls.iter().map(|c| c.qubit).collect();
        qs.push(self.target);
        qs
    }

    /// Checks index ranges and that controls and target are pairwise distinct.
    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        let mut seen = 0usize;
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(SimError::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1usize << q;
            if seen & bit != 0 {
                return Err(SimError::DuplicateQubit(q));
            }
            seen |= bit;
        }
        Ok(())
    }

    /// Bit masks over the control qubits: `(must_be_one, must_be_zero)`.
    pub fn control_masks(&self) -> (usize, usize) {
        let mut on = 0usize;
        let mut off = 0usize;
        for c in &self.controls {
            if c.on_one {
                on |= 1 << c.qubit;
            } else {
                off |= 1 << c.qubit;
            }
        }
        (on, off)
    }
}

fn unitarity_tolerance<T: Real>() -> T {
    let floor = real::<T>(1e-12);
    let eps = T::default_epsilon() * real::<T>(256.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}
