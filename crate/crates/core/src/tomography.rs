//! Single-qubit state tomography: Pauli expectation estimation, maximum-
//! likelihood reconstruction, and fidelity measures.
//!
//! The MLE step is linear inversion followed by projection to the nearest
//! density operator in Frobenius norm, computed by truncating eigenvalues
//! with the accumulation algorithm (equivalent to Euclidean projection of
//! the spectrum onto the probability simplex).

use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Ratio;

use crate::error::TomographyError;
use crate::real::{real, Real};
use crate::state::{MixedState, PureState};
use crate::telecloning::MessageSpec;

/// Theoretical optimum for universal symmetric N → M cloning:
/// F = (MN + M + N) / (M(N + 2)), returned exactly.
pub fn optimal_fidelity(n: u64, m: u64) -> Result<Ratio<u64>, TomographyError> {
    if n == 0 || m < n {
        return Err(TomographyError::InvalidCloneNumbers { n, m });
    }
    Ok(Ratio::new(m * n + m + n, m * (n + 2)))
}

/// Counts of 0/1 outcomes in one measurement basis. Real-valued so that
/// mitigated (quasi-count) histograms fit through the same pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Counts {
    pub zeros: f64,
    pub ones: f64,
}

impl Counts {
    pub fn new(zeros: f64, ones: f64) -> Self {
        Counts { zeros, ones }
    }

    pub fn total(&self) -> f64 {
        self.zeros + self.ones
    }
}

/// Per-basis counts for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisCounts {
    pub x: Counts,
    pub y: Counts,
    pub z: Counts,
}

/// Empirical Bloch vector (⟨X⟩, ⟨Y⟩, ⟨Z⟩) from basis counts.
pub fn pauli_expectations<T: Real>(counts: &BasisCounts) -> Result<(T, T, T), TomographyError> {
    let one = |c: Counts, name: char| -> Result<T, TomographyError> {
        let total = c.total();
        if total <= 0.0 {
            return Err(TomographyError::ZeroCounts(name));
        }
        Ok(real::<T>((c.zeros - c.ones) / total))
    };
    Ok((one(counts.x, 'x')?, one(counts.y, 'y')?, one(counts.z, 'z')?))
}

/// Projects a Hermitian matrix to the nearest (Frobenius) density operator
/// by clipping its spectrum onto the probability simplex.
///
/// Eigenvalues are truncated by accumulation: walking from the smallest,
/// negative mass is redistributed uniformly over the remaining levels.
pub fn nearest_density<T: Real>(
    hermitian: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>, TomographyError> {
    let dim = hermitian.nrows();
    if hermitian.ncols() != dim {
        return Err(TomographyError::DimensionMismatch { left: dim, right: hermitian.ncols() });
    }
    let eig = hermitian.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues")
    });
    // Normalize the spectrum to unit sum first, then clip by accumulation.
    let sum: T = eig.eigenvalues.iter().fold(T::zero(), |s, &x| s + x);
    let shift = (T::one() - sum) / real::<T>(dim as f64);
    let mut lambda: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i] + shift).collect();
    let mut accumulator = T::zero();
    for i in 0..dim {
        let remaining = real::<T>((dim - i) as f64);
        let proposed = lambda[i] + accumulator / remaining;
        if proposed < T::zero() {
            accumulator += lambda[i];
            lambda[i] = T::zero();
        } else {
            // Spread the accumulated deficit over this and all larger levels.
            let bump = accumulator / remaining;
            for l in lambda.iter_mut().skip(i) {
                *l += bump;
            }
            break;
        }
    }
    let mut out = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
    for (k, &i) in order.iter().enumerate() {
        if lambda[k] <= T::zero() {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        let w = Complex::new(lambda[k], T::zero());
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] += v[r] * v[c].conj() * w;
            }
        }
    }
    Ok(out)
}

/// Maximum-likelihood single-qubit reconstruction from Bloch components:
/// linear inversion ρ = (I + xX + yY + zZ)/2, projected to the nearest
/// physical state if the Bloch vector spills outside the unit ball.
pub fn mle_fit<T: Real>(x: T, y: T, z: T) -> Result<MixedState<T>, TomographyError> {
    let half = real::<T>(0.5);
    let zero = T::zero();
    let lin = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new((T::one() + z) * half, zero),
            Complex::new(x * half, -y * half),
            Complex::new(x * half, y * half),
            Complex::new((T::one() - z) * half, zero),
        ],
    );
    let projected = nearest_density(&lin)?;
    Ok(MixedState::from_matrix(1, projected).expect("projection yields a valid density"))
}

/// Density operator of the message state RZ(θ_z)·RY(θ_y)|0⟩.
pub fn message_density<T: Real>(msg: &MessageSpec<T>) -> MixedState<T> {
    msg.state().density()
}

/// ⟨ψ|ρ|ψ⟩ for a pure reference state.
pub fn fidelity_pure<T: Real>(psi: &PureState<T>, rho: &MixedState<T>) -> Result<T, TomographyError> {
    if psi.dim() != rho.dim() {
        return Err(TomographyError::DimensionMismatch { left: psi.dim(), right: rho.dim() });
    }
    let a = psi.amplitudes();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..psi.dim() {
        for j in 0..psi.dim() {
            acc += a[i].conj() * rho.matrix()[(i, j)] * a[j];
        }
    }
    Ok(acc.re)
}

/// Uhlmann fidelity F(ρ₁, ρ₂) = (Tr √(√ρ₁ ρ₂ √ρ₁))².
pub fn fidelity_general<T: Real>(
    rho1: &MixedState<T>,
    rho2: &MixedState<T>,
) -> Result<T, TomographyError> {
    if rho1.dim() != rho2.dim() {
        return Err(TomographyError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let s1 = hermitian_sqrt(rho1.matrix());
    let inner = &s1 * rho2.matrix() * &s1;
    let eig = inner.symmetric_eigen();
    let mut tr = T::zero();
    for &l in eig.eigenvalues.iter() {
        if l > T::zero() {
            tr += l.sqrt();
        }
    }
    Ok(tr * tr)
}

fn hermitian_sqrt<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let dim = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut out = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
    for i in 0..dim {
        let l = eig.eigenvalues[i];
        if l <= T::zero() {
            continue;
        }
        let w = Complex::new(l.sqrt(), T::zero());
        let v = eig.eigenvectors.column(i);
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] += v[r] * v[c].conj() * w;
            }
        }
    }
    out
}
