//! Noise model: depolarizing strengths plus per-qubit readout confusion.
//!
//! The JSON schema is
//! `{"p1": 0.001, "p2": 0.01, "readout": [[[0.99, 0.02], [0.01, 0.98]], ...]}`.
//! `readout[q][r][t]` is the probability of reading bit `r` when qubit `q`
//! was truly in state `t`, so each column of a confusion matrix sums to 1.
//! Qubits beyond the end of the `readout` list read out perfectly.

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// A 2×2 readout confusion matrix, `m[read][true]`.
pub type ReadoutMatrix = [[f64; 2]; 2];

pub const IDENTITY_READOUT: ReadoutMatrix = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after every single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after every two-qubit gate.
    pub p2: f64,
    /// Per-qubit readout confusion matrices, indexed by qubit.
    #[serde(default)]
    pub readout: Vec<ReadoutMatrix>,
}

impl NoiseModel {
    /// Noiseless model.
    pub fn ideal() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0, readout: Vec::new() }
    }

    /// Depolarizing-only model.
    pub fn depolarizing(p1: f64, p2: f64) -> Self {
        NoiseModel { p1, p2, readout: Vec::new() }
    }

    /// Symmetric readout flips with probability `eps` on `n_qubits` qubits,
    /// no gate noise.
    pub fn symmetric_readout(eps: f64, n_qubits: usize) -> Self {
        let m = [[1.0 - eps, eps], [eps, 1.0 - eps]];
        NoiseModel { p1: 0.0, p2: 0.0, readout: vec![m; n_qubits] }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(SimError::InvalidNoise(format!("{name} = {p} outside [0, 1]")));
            }
        }
        for (q, m) in self.readout.iter().enumerate() {
            for t in 0..2 {
                let (a, b) = (m[0][t], m[1][t]);
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return Err(SimError::InvalidNoise(format!(
                        "readout[{q}] has an entry outside [0, 1]"
                    )));
                }
                if ((a + b) - 1.0).abs() > 1e-9 {
                    return Err(SimError::InvalidNoise(format!(
                        "readout[{q}] column {t} sums to {}",
                        a + b
                    )));
                }
            }
        }
        Ok(())
    }

    /// Confusion matrix for `qubit` (identity if unspecified).
    pub fn readout_for(&self, qubit: usize) -> ReadoutMatrix {
        self.readout.get(qubit).copied().unwrap_or(IDENTITY_READOUT)
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout.iter().any(|m| *m != IDENTITY_READOUT)
    }

    pub fn has_gate_noise(&self) -> bool {
        self.p1 > 0.0 || self.p2 > 0.0
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let model: NoiseModel = serde_json::from_str(text)
            .map_err(|e| SimError::InvalidNoise(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}
