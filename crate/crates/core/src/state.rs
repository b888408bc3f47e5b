//! Pure and mixed quantum states with gate application, measurement, and
//! channel primitives.
//!
//! Indexing is little-endian throughout: qubit `q` is bit `q` of the basis
//! index, and a rendered bitstring puts qubit 0 in the leftmost character.
//! Measurement outcomes over a qubit list `[q0, q1, ...]` pack the outcome of
//! `q0` into bit 0 of the outcome index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::error::SimError;
use crate::gate::GateOp;
use crate::real::{as_f64, real, Real};

/// One measurement branch: the outcome, its probability, and the state
/// conditioned on it.
#[derive(Debug, Clone)]
pub struct Branch<T: Real, S> {
    pub probability: T,
    /// Outcome bits in the order of the measured-qubit list.
    pub outcome: Vec<bool>,
    pub state: S,
}

/// Probability below which a measurement branch is dropped as numerically
/// zero.
fn branch_cutoff<T: Real>() -> T {
    let floor = real::<T>(1e-14);
    let eps = T::default_epsilon() * real::<T>(64.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// Applies a (controlled) single-qubit matrix to a state vector slice.
fn apply_one_qubit<T: Real>(
    v: &mut [Complex<T>],
    u: &nalgebra::Matrix2<Complex<T>>,
    target: usize,
    on: usize,
    off: usize,
) {
    let bit = 1usize << target;
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    for i in 0..v.len() {
        if i & bit == 0 && i & on == on && i & off == 0 {
            let j = i | bit;
            let a = v[i];
            let b = v[j];
            v[i] = u00 * a + u01 * b;
            v[j] = u10 * a + u11 * b;
        }
    }
}

fn check_qubits<T: Real>(qubits: &[usize], n_qubits: usize) -> Result<(), SimError> {
    let mut seen = 0usize;
    for &q in qubits {
        if q >= n_qubits {
            return Err(SimError::QubitOutOfRange { index: q, n_qubits });
        }
        if seen & (1 << q) != 0 {
            return Err(SimError::DuplicateQubit(q));
        }
        seen |= 1 << q;
    }
    Ok(())
}

/// Extracts the bits of `index` at positions `qubits`, packed in list order.
#[inline]
fn extract_bits(index: usize, qubits: &[usize]) -> usize {
    let mut out = 0usize;
    for (k, &q) in qubits.iter().enumerate() {
        out |= ((index >> q) & 1) << k;
    }
    out
}

fn outcome_bits(outcome: usize, k: usize) -> Vec<bool> {
    (0..k).map(|b| (outcome >> b) & 1 == 1).collect()
}

/// Common read-only interface shared by pure and mixed states.
pub trait QuantumState<T: Real> {
    fn n_qubits(&self) -> usize;
    /// Applies a gate in place.
    fn apply(&mut self, op: &GateOp<T>) -> Result<(), SimError>;
    /// Marginal outcome distribution over the listed qubits
    /// (`2^k` entries, qubit `qubits[0]` in bit 0).
    fn measured_distribution(&self, qubits: &[usize]) -> Result<Vec<T>, SimError>;
}

/// A normalized state vector on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    n_qubits: usize,
    amps: DVector<Complex<T>>,
}

impl<T: Real> PureState<T> {
    /// |0…0⟩ on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut amps = DVector::from_element(dim, Complex::new(T::zero(), T::zero()));
        amps[0] = Complex::new(T::one(), T::zero());
        PureState { n_qubits, amps }
    }

    /// Builds a state from explicit amplitudes; must be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        if amps.len() != 1usize << n_qubits {
            return Err(SimError::BadAmplitudeLength(amps.len()));
        }
        let state = PureState { n_qubits, amps: DVector::from_vec(amps) };
        let n2 = state.norm_sq();
        if (n2 - T::one()).abs() > norm_tolerance::<T>() {
            return Err(SimError::NotNormalized(as_f64(n2)));
        }
        Ok(state)
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x)
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &PureState<T>) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.amps.iter().zip(other.amps.iter()) {
            acc += a.conj() * b;
        }
        acc.norm_sqr()
    }

    /// The rank-one density operator |ψ⟩⟨ψ|.
    pub fn density(&self) -> MixedState<T> {
        let dim = self.dim();
        let mut mat = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        MixedState { n_qubits: self.n_qubits, mat }
    }

    /// Relabels qubits: output qubit `perm[q]` carries input qubit `q`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<PureState<T>, SimError> {
        if perm.len() != self.n_qubits {
            return Err(SimError::BadAmplitudeLength(perm.len()));
        }
        check_qubits::<T>(perm, self.n_qubits)?;
        let dim = self.dim();
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        for i in 0..dim {
            let mut j = 0usize;
            for q in 0..self.n_qubits {
                j |= ((i >> q) & 1) << perm[q];
            }
            amps[j] = self.amps[i];
        }
        Ok(PureState { n_qubits: self.n_qubits, amps: DVector::from_vec(amps) })
    }

    /// Enumerates every nonzero-probability outcome of measuring `qubits`.
    pub fn measure_branches(
        &self,
        qubits: &[usize],
    ) -> Result<Vec<Branch<T, PureState<T>>>, SimError> {
        check_qubits::<T>(qubits, self.n_qubits)?;
        let k = qubits.len();
        let probs = self.measured_distribution(qubits)?;
        let cutoff = branch_cutoff::<T>();
        let mut branches = Vec::new();
        for (o, &p) in probs.iter().enumerate() {
            if p <= cutoff {
                continue;
            }
            let scale = Complex::new(T::one() / p.sqrt(), T::zero());
            let mut amps = self.amps.clone();
            for i in 0..amps.len() {
                if extract_bits(i, qubits) == o {
                    amps[i] *= scale;
                } else {
                    amps[i] = Complex::new(T::zero(), T::zero());
                }
            }
            branches.push(Branch {
                probability: p,
                outcome: outcome_bits(o, k),
                state: PureState { n_qubits: self.n_qubits, amps },
            });
        }
        Ok(branches)
    }

    /// Samples one measurement outcome, returning the bits and the collapsed
    /// state.
    pub fn sample_measure<R: Rng>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<(Vec<bool>, PureState<T>), SimError> {
        let branches = self.measure_branches(qubits)?;
        let mut draw = rng.gen::<f64>();
        let mut chosen = branches.len() - 1;
        for (i, b) in branches.iter().enumerate() {
            let p = as_f64(b.probability);
            if draw < p {
                chosen = i;
                break;
            }
            draw -= p;
        }
        let b = branches.into_iter().nth(chosen).expect("nonempty branch set");
        Ok((b.outcome, b.state))
    }
}

impl<T: Real> QuantumState<T> for PureState<T> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, op: &GateOp<T>) -> Result<(), SimError> {
        op.validate(self.n_qubits)?;
        let u = op.kind.matrix();
        let (on, off) = op.control_masks();
        apply_one_qubit(self.amps.as_mut_slice(), &u, op.target, on, off);
        Ok(())
    }

    fn measured_distribution(&self, qubits: &[usize]) -> Result<Vec<T>, SimError> {
        check_qubits::<T>(qubits, self.n_qubits)?;
        let mut probs = vec![T::zero(); 1usize << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[extract_bits(i, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }
}

fn norm_tolerance<T: Real>() -> T {
    let floor = real::<T>(1e-12);
    let eps = T::default_epsilon() * real::<T>(256.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// A density operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState<T: Real> {
    n_qubits: usize,
    mat: DMatrix<Complex<T>>,
}

impl<T: Real> MixedState<T> {
    /// |0…0⟩⟨0…0| on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        PureState::zero(n_qubits).density()
    }

    /// The maximally mixed state I / 2ⁿ.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let w = Complex::new(T::one() / real::<T>(dim as f64), T::zero());
        MixedState { n_qubits, mat: DMatrix::identity(dim, dim) * w }
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        psi.density()
    }

    /// Wraps an explicit matrix; checks Hermiticity and unit trace (but not
    /// positivity, which callers needing it verify via eigenvalues).
    pub fn from_matrix(n_qubits: usize, mat: DMatrix<Complex<T>>) -> Result<Self, SimError> {
        let dim = 1usize << n_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(SimError::InvalidDensity(format!(
                "expected a {dim}×{dim} matrix, got {}×{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev > norm_tolerance::<T>() {
            return Err(SimError::InvalidDensity(format!(
                "not Hermitian (deviation {})",
                as_f64(herm_dev)
            )));
        }
        let state = MixedState { n_qubits, mat };
        let tr = state.trace();
        if (tr - T::one()).abs() > norm_tolerance::<T>() {
            return Err(SimError::InvalidDensity(format!("trace is {}", as_f64(tr))));
        }
        Ok(state)
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).fold(T::zero(), |s, x| s + x)
    }

    /// Tr ρ².
    pub fn purity(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    /// Reduced state on `keep` (in the given order: output qubit `k` is input
    /// qubit `keep[k]`).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<MixedState<T>, SimError> {
        check_qubits::<T>(keep, self.n_qubits)?;
        if keep.is_empty() || keep.len() > self.n_qubits {
            return Err(SimError::BadKeepSet);
        }
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let compose = |kept: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (b, &q) in keep.iter().enumerate() {
                idx |= ((kept >> b) & 1) << q;
            }
            for (b, &q) in traced.iter().enumerate() {
                idx |= ((env >> b) & 1) << q;
            }
            idx
        };
        let mut out = DMatrix::from_element(dk, dk, Complex::new(T::zero(), T::zero()));
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = Complex::new(T::zero(), T::zero());
                for e in 0..dt {
                    acc += self.mat[(compose(a, e), compose(b, e))];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(MixedState { n_qubits: keep.len(), mat: out })
    }

    /// Depolarizing channel on `qubits` with probability `p`:
    /// ρ ↦ (1−p)·ρ + p·(I/2^k ⊗ Tr_qubits ρ).
    pub fn depolarize(&mut self, qubits: &[usize], p: T) -> Result<(), SimError> {
        check_qubits::<T>(qubits, self.n_qubits)?;
        if p < T::zero() || p > T::one() {
            return Err(SimError::ProbabilityOutOfRange(as_f64(p)));
        }
        if p == T::zero() || qubits.is_empty() {
            return Ok(());
        }
        let rest: Vec<usize> = (0..self.n_qubits).filter(|q| !qubits.contains(q)).collect();
        let k = qubits.len();
        let weight = p / real::<T>((1usize << k) as f64);
        let sigma = if rest.is_empty() { None } else { Some(self.partial_trace(&rest)?) };
        let dim = self.dim();
        let keep_frac = Complex::new(T::one() - p, T::zero());
        let mut out = &self.mat * keep_frac;
        for i in 0..dim {
            for j in 0..dim {
                if extract_bits(i, qubits) != extract_bits(j, qubits) {
                    continue;
                }
                let term = match &sigma {
                    Some(s) => s.mat[(extract_bits(i, &rest), extract_bits(j, &rest))],
                    None => {
                        if i == j {
                            Complex::new(T::one(), T::zero())
                        } else {
                            Complex::new(T::zero(), T::zero())
                        }
                    }
                };
                out[(i, j)] += term * Complex::new(weight, T::zero());
            }
        }
        self.mat = out;
        Ok(())
    }

    /// Enumerates every nonzero-probability outcome of measuring `qubits`.
    pub fn measure_branches(
        &self,
        qubits: &[usize],
    ) -> Result<Vec<Branch<T, MixedState<T>>>, SimError> {
        check_qubits::<T>(qubits, self.n_qubits)?;
        let k = qubits.len();
        let probs = self.measured_distribution(qubits)?;
        let cutoff = branch_cutoff::<T>();
        let dim = self.dim();
        let mut branches = Vec::new();
        for (o, &p) in probs.iter().enumerate() {
            if p <= cutoff {
                continue;
            }
            let inv = Complex::new(T::one() / p, T::zero());
            let mut mat = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
            for i in 0..dim {
                if extract_bits(i, qubits) != o {
                    continue;
                }
                for j in 0..dim {
                    if extract_bits(j, qubits) == o {
                        mat[(i, j)] = self.mat[(i, j)] * inv;
                    }
                }
            }
            branches.push(Branch {
                probability: p,
                outcome: outcome_bits(o, k),
                state: MixedState { n_qubits: self.n_qubits, mat },
            });
        }
        Ok(branches)
    }
}

impl<T: Real> QuantumState<T> for MixedState<T> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, op: &GateOp<T>) -> Result<(), SimError> {
        op.validate(self.n_qubits)?;
        let u = op.kind.matrix();
        let (on, off) = op.control_masks();
        let dim = self.dim();
        let data = self.mat.as_mut_slice(); // column-major
        // U ρ: transform each column as a state vector.
        for c in 0..dim {
            apply_one_qubit(&mut data[c * dim..(c + 1) * dim], &u, op.target, on, off);
        }
        // ρ U†: combine column pairs.
        let bit = 1usize << op.target;
        let (u00, u01, u10, u11) =
            (u[(0, 0)].conj(), u[(0, 1)].conj(), u[(1, 0)].conj(), u[(1, 1)].conj());
        for i in 0..dim {
            if i & bit != 0 || i & on != on || i & off != 0 {
                continue;
            }
            let j = i | bit;
            for r in 0..dim {
                let a = data[i * dim + r];
                let b = data[j * dim + r];
                data[i * dim + r] = a * u00 + b * u01;
                data[j * dim + r] = a * u10 + b * u11;
            }
        }
        Ok(())
    }

    fn measured_distribution(&self, qubits: &[usize]) -> Result<Vec<T>, SimError> {
        check_qubits::<T>(qubits, self.n_qubits)?;
        let mut probs = vec![T::zero(); 1usize << qubits.len()];
        for i in 0..self.dim() {
            probs[extract_bits(i, qubits)] += self.mat[(i, i)].re;
        }
        Ok(probs)
    }
}

/// Renders an outcome index over `n_bits` as a little-endian bitstring
/// (bit 0 leftmost).
pub fn bitstring(index: usize, n_bits: usize) -> String {
    (0..n_bits).map(|b| if (index >> b) & 1 == 1 { '1' } else { '0' }).collect()
}
