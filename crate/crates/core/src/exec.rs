//! Circuit execution.
//!
//! The executor evolves a list of weighted density-operator branches. A
//! mid-circuit measurement splits the current branches over outcomes (and,
//! when readout noise is present, over recorded values that may differ from
//! the true outcome; conditionals fire on the recorded bit while the state
//! follows the true outcome). A maximal trailing run of measurements can
//! instead be folded into an outcome distribution, which keeps sampled
//! tomography cheap.
//!
//! Depolarizing noise is applied after every gate — `p1` on the target of an
//! uncontrolled gate, `p2` on the qubits of a controlled one — so circuits
//! should be lowered with [`Circuit::decompose`] before noisy execution to
//! make the per-gate accounting match the emitted gate set.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{Circuit, CircuitOp};
use crate::error::SimError;
use crate::noise::{NoiseModel, ReadoutMatrix, IDENTITY_READOUT};
use crate::real::{as_f64, real, Real};
use crate::state::{bitstring, MixedState, QuantumState};

/// How to treat the trailing run of measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurePolicy {
    /// Branch on every measurement; `terminal` stays empty.
    BranchAll,
    /// Keep the maximal measurement suffix symbolic for
    /// [`Execution::outcome_distribution`].
    DistributeTerminal,
}

/// One execution branch after the mid-circuit portion of a run.
#[derive(Debug, Clone)]
pub struct ExecutionBranch<T: Real> {
    pub probability: T,
    /// Recorded classical bits (`None` if never written).
    pub clbits: Vec<Option<bool>>,
    pub state: MixedState<T>,
}

/// Result of running a circuit exactly.
#[derive(Debug, Clone)]
pub struct Execution<T: Real> {
    pub n_clbits: usize,
    pub branches: Vec<ExecutionBranch<T>>,
    /// Deferred terminal measurements as `(qubit, clbit)` pairs.
    pub terminal: Vec<(usize, usize)>,
}

/// Runs a circuit, branching exactly over measurement outcomes.
pub fn run_exact<T: Real>(
    circuit: &Circuit<T>,
    noise: Option<&NoiseModel>,
    policy: MeasurePolicy,
) -> Result<Execution<T>, SimError> {
    if let Some(n) = noise {
        n.validate()?;
    }
    let ops = circuit.ops();
    let split = match policy {
        MeasurePolicy::BranchAll => ops.len(),
        MeasurePolicy::DistributeTerminal => {
            let mut s = ops.len();
            while s > 0 && matches!(ops[s - 1], CircuitOp::Measure { .. }) {
                s -= 1;
            }
            s
        }
    };
    let mut branches = vec![ExecutionBranch {
        probability: T::one(),
        clbits: vec![None; circuit.n_clbits()],
        state: MixedState::zero(circuit.n_qubits()),
    }];
    for op in &ops[..split] {
        match op {
            CircuitOp::Barrier => {}
            CircuitOp::Gate(g) => {
                for b in &mut branches {
                    b.state.apply(g)?;
                    apply_gate_noise(&mut b.state, g.qubits(), noise)?;
                }
            }
            CircuitOp::Conditional { clbit, gate } => {
                for b in &mut branches {
                    if b.clbits[*clbit] == Some(true) {
                        b.state.apply(gate)?;
                        apply_gate_noise(&mut b.state, gate.qubits(), noise)?;
                    }
                }
            }
            CircuitOp::Measure { qubit, clbit } => {
                let confusion =
                    noise.map(|n| n.readout_for(*qubit)).unwrap_or(IDENTITY_READOUT);
                let mut next = Vec::with_capacity(branches.len() * 2);
                for b in branches {
                    for m in b.state.measure_branches(&[*qubit])? {
                        let truth = m.outcome[0];
                        for recorded in [false, true] {
                            let conf = confusion[recorded as usize][truth as usize];
                            if conf <= 0.0 {
                                continue;
                            }
                            let mut clbits = b.clbits.clone();
                            clbits[*clbit] = Some(recorded);
                            next.push(ExecutionBranch {
                                probability: b.probability * m.probability * real::<T>(conf),
                                clbits,
                                state: m.state.clone(),
                            });
                        }
                    }
                }
                branches = next;
            }
        }
    }
    let terminal = ops[split..]
        .iter()
        .map(|op| match op {
            CircuitOp::Measure { qubit, clbit } => (*qubit, *clbit),
            _ => unreachable!("suffix contains only measurements"),
        })
        .collect();
    Ok(Execution { n_clbits: circuit.n_clbits(), branches, terminal })
}

fn apply_gate_noise<T: Real>(
    state: &mut MixedState<T>,
    qubits: Vec<usize>,
    noise: Option<&NoiseModel>,
) -> Result<(), SimError> {
    let Some(n) = noise else { return Ok(()) };
    let p = if qubits.len() == 1 { n.p1 } else { n.p2 };
    if p > 0.0 {
        state.depolarize(&qubits, real::<T>(p))?;
    }
    Ok(())
}

impl<T: Real> Execution<T> {
    /// Probability distribution over the full classical register
    /// (`2^n_clbits` entries, clbit 0 in bit 0). Unwritten bits read as 0.
    /// Readout noise from `noise` is applied to the terminal measurements.
    pub fn outcome_distribution(&self, noise: Option<&NoiseModel>) -> Result<Vec<T>, SimError> {
        let mut dist = vec![T::zero(); 1usize << self.n_clbits];
        let term_qubits: Vec<usize> = self.terminal.iter().map(|&(q, _)| q).collect();
        for b in &self.branches {
            let mut base = 0usize;
            for (i, bit) in b.clbits.iter().enumerate() {
                if *bit == Some(true) {
                    base |= 1 << i;
                }
            }
            if term_qubits.is_empty() {
                dist[base] += b.probability;
                continue;
            }
            let mut sub = b.state.measured_distribution(&term_qubits)?;
            if let Some(n) = noise {
                for (k, &q) in term_qubits.iter().enumerate() {
                    apply_readout_to_distribution(&mut sub, k, n.readout_for(q));
                }
            }
            for (o, &p) in sub.iter().enumerate() {
                let mut idx = base;
                for (k, &(_, clbit)) in self.terminal.iter().enumerate() {
                    if (o >> k) & 1 == 1 {
                        idx |= 1 << clbit;
                    }
                }
                dist[idx] += b.probability * p;
            }
        }
        Ok(dist)
    }

    /// Branch-averaged reduced state on `keep`.
    pub fn aggregate_density(&self, keep: &[usize]) -> Result<MixedState<T>, SimError> {
        self.filtered_density(&[], keep).map(|(_, rho)| rho)
    }

    /// Total probability and normalized reduced state on `keep`, restricted
    /// to branches whose recorded bits match `filter`.
    pub fn filtered_density(
        &self,
        filter: &[(usize, bool)],
        keep: &[usize],
    ) -> Result<(T, MixedState<T>), SimError> {
        let dim = 1usize << keep.len();
        let mut total = T::zero();
        let mut acc = nalgebra::DMatrix::from_element(
            dim,
            dim,
            num_complex::Complex::new(T::zero(), T::zero()),
        );
        let mut matched = false;
        for b in &self.branches {
            if !filter.iter().all(|&(c, v)| b.clbits[c] == Some(v)) {
                continue;
            }
            matched = true;
            total += b.probability;
            let rho = b.state.partial_trace(keep)?;
            acc += rho.matrix() * num_complex::Complex::new(b.probability, T::zero());
        }
        if !matched || total <= T::zero() {
            return Err(SimError::InvalidDensity(
                "no branch matches the postselection filter".into(),
            ));
        }
        acc *= num_complex::Complex::new(T::one() / total, T::zero());
        Ok((total, MixedState::from_matrix(keep.len(), acc)?))
    }
}

/// Applies a readout confusion matrix to bit `bit_index` of a distribution.
pub fn apply_readout_to_distribution<T: Real>(
    dist: &mut [T],
    bit_index: usize,
    confusion: ReadoutMatrix,
) {
    if confusion == IDENTITY_READOUT {
        return;
    }
    let bit = 1usize << bit_index;
    let a00 = real::<T>(confusion[0][0]);
    let a01 = real::<T>(confusion[0][1]);
    let a10 = real::<T>(confusion[1][0]);
    let a11 = real::<T>(confusion[1][1]);
    for i in 0..dist.len() {
        if i & bit == 0 {
            let j = i | bit;
            let d0 = dist[i];
            let d1 = dist[j];
            dist[i] = a00 * d0 + a01 * d1;
            dist[j] = a10 * d0 + a11 * d1;
        }
    }
}

/// A histogram of measurement outcomes over `n_bits` classical bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub n_bits: usize,
    /// Counts indexed by outcome (bit 0 = first measured bit).
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn empty(n_bits: usize) -> Self {
        Histogram { n_bits, counts: vec![0; 1usize << n_bits] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bitstring(&self, index: usize) -> String {
        bitstring(index, self.n_bits)
    }

    /// Count of shots where bit `bit_index` read 1.
    pub fn marginal_ones(&self, bit_index: usize) -> u64 {
        let bit = 1usize << bit_index;
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, &c)| c)
            .sum()
    }
}

/// Draws a multinomial sample from `probs` using the conditional-binomial
/// chain, which is deterministic given the RNG stream.
pub fn sample_histogram<T: Real, R: Rng>(
    probs: &[T],
    shots: u64,
    rng: &mut R,
) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let n_bits = probs.len().trailing_zeros() as usize;
    if probs.len() != 1usize << n_bits {
        return Err(SimError::BadAmplitudeLength(probs.len()));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut rest: f64 = probs.iter().map(|&p| as_f64(p)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = as_f64(p).max(0.0);
        if i + 1 == probs.len() || rest <= p {
            counts[i] = remaining;
            break;
        }
        let frac = (p / rest).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, frac)
            .map_err(|_| SimError::ProbabilityOutOfRange(frac))?
            .sample(rng);
        counts[i] = draw;
        remaining -= draw;
        rest -= p;
    }
    Ok(Histogram { n_bits, counts })
}

/// Samples `shots` measurements of `qubits`, pushing the marginal
/// distribution through per-qubit readout confusion first.
pub fn sample_counts<T: Real, S: QuantumState<T>, R: Rng>(
    state: &S,
    qubits: &[usize],
    shots: u64,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<Histogram, SimError> {
    let mut dist = state.measured_distribution(qubits)?;
    if let Some(n) = noise {
        n.validate()?;
        for (k, &q) in qubits.iter().enumerate() {
            apply_readout_to_distribution(&mut dist, k, n.readout_for(q));
        }
    }
    sample_histogram(&dist, shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateOp;
    use crate::state::PureState;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn bell() -> Circuit<f64> {
        let mut c = Circuit::new(2, 2);
        c.gate(GateOp::h(0)).unwrap();
        c.gate(GateOp::cnot(0, 1)).unwrap();
        c.measure(0, 0).unwrap();
        c.measure(1, 1).unwrap();
        c
    }

    #[test]
    fn terminal_suffix_is_detected() {
        let exec = run_exact(&bell(), None, MeasurePolicy::DistributeTerminal).unwrap();
        assert_eq!(exec.branches.len(), 1);
        assert_eq!(exec.terminal, vec![(0, 0), (1, 1)]);
        let dist = exec.outcome_distribution(None).unwrap();
        assert_relative_eq!(dist[0b00], 0.5, epsilon = 1e-14);
        assert_relative_eq!(dist[0b11], 0.5, epsilon = 1e-14);
        assert_relative_eq!(dist[0b01], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn branch_all_splits_measurements() {
        let exec = run_exact(&bell(), None, MeasurePolicy::BranchAll).unwrap();
        assert_eq!(exec.branches.len(), 2);
        let total: f64 = exec.branches.iter().map(|b| b.probability).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        for b in &exec.branches {
            assert_eq!(b.clbits[0], b.clbits[1]);
        }
    }

    #[test]
    fn conditional_fires_on_recorded_bit() {
        // Teleport-style: measure |1⟩ and conditionally flip another qubit.
        let mut c = Circuit::<f64>::new(2, 1);
        c.gate(GateOp::x(0)).unwrap();
        c.measure(0, 0).unwrap();
        c.conditional(0, GateOp::x(1)).unwrap();
        let exec = run_exact(&c, None, MeasurePolicy::BranchAll).unwrap();
        assert_eq!(exec.branches.len(), 1);
        let rho = exec.aggregate_density(&[1]).unwrap();
        assert_relative_eq!(rho.matrix()[(1, 1)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn readout_noise_splits_recorded_bits() {
        let mut c = Circuit::<f64>::new(1, 1);
        c.gate(GateOp::x(0)).unwrap();
        c.measure(0, 0).unwrap();
        let noise = NoiseModel::symmetric_readout(0.1, 1);
        let exec = run_exact(&c, Some(&noise), MeasurePolicy::BranchAll).unwrap();
        assert_eq!(exec.branches.len(), 2);
        let p_wrong: f64 = exec
            .branches
            .iter()
            .filter(|b| b.clbits[0] == Some(false))
            .map(|b| b.probability)
            .sum();
        assert_relative_eq!(p_wrong, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn depolarizing_full_strength_flattens_distribution() {
        let mut c = Circuit::<f64>::new(2, 2);
        c.gate(GateOp::h(0)).unwrap();
        c.gate(GateOp::cnot(0, 1)).unwrap();
        c.measure(0, 0).unwrap();
        c.measure(1, 1).unwrap();
        let noise = NoiseModel::depolarizing(0.0, 1.0);
        let exec = run_exact(&c, Some(&noise), MeasurePolicy::DistributeTerminal).unwrap();
        let dist = exec.outcome_distribution(Some(&noise)).unwrap();
        for &p in &dist {
            assert_relative_eq!(p, 0.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn sample_histogram_is_exact_partition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let probs = vec![0.1, 0.2, 0.3, 0.4];
        let h = sample_histogram(&probs, 10_000, &mut rng).unwrap();
        assert_eq!(h.total(), 10_000);
        for (i, &p) in probs.iter().enumerate() {
            let f = h.counts[i] as f64 / 10_000.0;
            assert!((f - p).abs() < 0.02, "bin {i}: {f} vs {p}");
        }
    }

    #[test]
    fn sample_counts_readout_flip_rate() {
        // |1⟩ read through a symmetric 10% confusion: the zero-fraction is a
        // Binomial(shots, 0.1) proportion; 0.005 is ≈5σ at 1e5 shots.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut s = PureState::<f64>::zero(1);
        s.apply(&GateOp::x(0)).unwrap();
        let noise = NoiseModel::symmetric_readout(0.1, 1);
        let h = sample_counts(&s, &[0], 100_000, Some(&noise), &mut rng).unwrap();
        let f = h.counts[0] as f64 / 100_000.0;
        assert!((f - 0.1).abs() < 0.005, "flip fraction {f}");
    }

    #[test]
    fn sample_counts_noiseless_is_deterministic_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut s = PureState::<f64>::zero(1);
        s.apply(&GateOp::x(0)).unwrap();
        let h = sample_counts(&s, &[0], 1000, None, &mut rng).unwrap();
        assert_eq!(h.counts, vec![0, 1000]);
    }

    #[test]
    fn histogram_helpers() {
        let h = Histogram { n_bits: 2, counts: vec![1, 2, 3, 4] };
        assert_eq!(h.total(), 10);
        assert_eq!(h.marginal_ones(0), 6);
        assert_eq!(h.marginal_ones(1), 7);
        assert_eq!(h.bitstring(1), "10");
    }
}
