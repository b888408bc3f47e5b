//! Measurement-error mitigation.
//!
//! A calibration matrix A over m measured bits is assembled column-by-column
//! from the outcome histograms of the 2^m basis-state preparation circuits.
//! Mitigation solves min ‖Aq − p‖₂ subject to q ≥ 0 and Σq = Σp with an
//! accelerated projected-gradient method; registers here are small (m ≤ 5),
//! so the dense solve is cheap.

use nalgebra::{DMatrix, DVector};

use crate::error::TomographyError;
use crate::exec::Histogram;
use crate::noise::ReadoutMatrix;
use crate::real::{real, Real};

/// Column-stochastic calibration matrix: `a[(read, prepared)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix<T: Real> {
    m_bits: usize,
    a: DMatrix<T>,
}

impl<T: Real> CalibrationMatrix<T> {
    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    /// Builds the ideal calibration from per-bit confusion matrices
    /// (the tensor product, in little-endian bit order).
    pub fn from_confusions(confusions: &[ReadoutMatrix]) -> Self {
        let m_bits = confusions.len();
        let dim = 1usize << m_bits;
        let mut a = DMatrix::from_element(dim, dim, T::zero());
        for read in 0..dim {
            for prepared in 0..dim {
                let mut p = 1.0f64;
                for (k, c) in confusions.iter().enumerate() {
                    p *= c[(read >> k) & 1][(prepared >> k) & 1];
                }
                a[(read, prepared)] = real::<T>(p);
            }
        }
        CalibrationMatrix { m_bits, a }
    }
}

/// Assembles a calibration matrix from one histogram per prepared basis
/// state (`histograms[b]` sampled after preparing bitstring `b`). All
/// preparations must use the same number of shots.
pub fn build_calibration<T: Real>(
    histograms: &[Histogram],
) -> Result<CalibrationMatrix<T>, TomographyError> {
    let n = histograms.len();
    if n == 0 || n & (n - 1) != 0 {
        return Err(TomographyError::WrongPreparationCount { expected: n.next_power_of_two(), got: n });
    }
    let m_bits = n.trailing_zeros() as usize;
    let mut shots: Option<u64> = None;
    let mut a = DMatrix::from_element(n, n, T::zero());
    for (prepared, h) in histograms.iter().enumerate() {
        if h.counts.len() != n {
            return Err(TomographyError::DimensionMismatch { left: h.counts.len(), right: n });
        }
        let total = h.total();
        if total == 0 {
            return Err(TomographyError::EmptyPreparation(prepared));
        }
        match shots {
            None => shots = Some(total),
            Some(s) if s != total => {
                return Err(TomographyError::UnequalShots { a: s, b: total })
            }
            _ => {}
        }
        let inv = real::<T>(1.0 / total as f64);
        for read in 0..n {
            a[(read, prepared)] = real::<T>(h.counts[read] as f64) * inv;
        }
    }
    Ok(CalibrationMatrix { m_bits, a })
}

/// Corrects a raw histogram: returns quasi-counts q ≥ 0 with Σq equal to the
/// raw shot total, minimizing ‖Aq − p‖₂.
pub fn mitigate<T: Real>(
    raw: &Histogram,
    calibration: &CalibrationMatrix<T>,
) -> Result<Vec<T>, TomographyError> {
    let dim = calibration.a.nrows();
    if raw.counts.len() != dim {
        return Err(TomographyError::DimensionMismatch { left: raw.counts.len(), right: dim });
    }
    let p = DVector::from_iterator(dim, raw.counts.iter().map(|&c| real::<T>(c as f64)));
    let total: T = p.iter().fold(T::zero(), |s, &x| s + x);
    if total <= T::zero() {
        return Ok(vec![T::zero(); dim]);
    }
    let a = &calibration.a;
    let ata = a.transpose() * a;
    let atp = a.transpose() * &p;
    // Lipschitz bound for the gradient: the Frobenius norm dominates the
    // spectral norm of AᵀA.
    let lip = {
        let f = ata.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if f > T::zero() {
            f
        } else {
            T::one()
        }
    };
    let step = T::one() / lip;
    // FISTA on f(q) = ½‖Aq − p‖² over the scaled simplex.
    let mut q = p.clone();
    project_to_scaled_simplex(q.as_mut_slice(), total);
    let mut y = q.clone();
    let mut t = T::one();
    let tol = real::<T>(1e-13) * total;
    for _ in 0..200_000 {
        let grad = &ata * &y - &atp;
        let mut next = &y - grad * step;
        project_to_scaled_simplex(next.as_mut_slice(), total);
        let t_next = (T::one() + (T::one() + real::<T>(4.0) * t * t).sqrt()) / real::<T>(2.0);
        let momentum = (t - T::one()) / t_next;
        y = &next + (&next - &q) * momentum;
        let delta = (&next - &q).iter().fold(T::zero(), |s, &x| s + x.abs());
        q = next;
        t = t_next;
        if delta < tol {
            break;
        }
    }
    Ok(q.iter().copied().collect())
}

/// Euclidean projection of `v` onto {x ≥ 0, Σx = total} (in place).
pub fn project_to_scaled_simplex<T: Real>(v: &mut [T], total: T) {
    let mut sorted: Vec<T> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = T::zero();
    let mut tau = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let k = real::<T>((i + 1) as f64);
        let candidate = (cumsum - total) / k;
        if u - candidate > T::zero() {
            tau = candidate;
        }
    }
    for x in v.iter_mut() {
        let shifted = *x - tau;
        *x = if shifted > T::zero() { shifted } else { T::zero() };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronecker_calibration_ordering() {
        // Bit 0 flips 0→1 with 10%, bit 1 with 20%: check a mixed entry.
        let c0 = [[0.9, 0.0], [0.1, 1.0]];
        let c1 = [[0.8, 0.0], [0.2, 1.0]];
        let cal = CalibrationMatrix::<f64>::from_confusions(&[c0, c1]);
        // Prepared 00, read 01 (bit 0 set): 0.1 · 0.8.
        assert_relative_eq!(cal.matrix()[(0b01, 0b00)], 0.08, epsilon = 1e-15);
        assert_relative_eq!(cal.matrix()[(0b10, 0b00)], 0.18, epsilon = 1e-15);
        for prepared in 0..4 {
            let col: f64 = (0..4).map(|r| cal.matrix()[(r, prepared)]).sum();
            assert_relative_eq!(col, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_calibration_checks_inputs() {
        let h = |counts: Vec<u64>| Histogram { n_bits: 1, counts };
        let cal =
            build_calibration::<f64>(&[h(vec![90, 10]), h(vec![5, 95])]).unwrap();
        assert_relative_eq!(cal.matrix()[(1, 0)], 0.1, epsilon = 1e-12);
        assert_relative_eq!(cal.matrix()[(0, 1)], 0.05, epsilon = 1e-12);
        // Unequal shots rejected.
        assert!(matches!(
            build_calibration::<f64>(&[h(vec![90, 10]), h(vec![5, 96])]),
            Err(TomographyError::UnequalShots { .. })
        ));
        // Non-power-of-two preparation count rejected.
        assert!(build_calibration::<f64>(&[h(vec![1, 0]), h(vec![0, 1]), h(vec![1, 0])]).is_err());
    }

    #[test]
    fn identity_calibration_is_a_fixed_point() {
        let cal = CalibrationMatrix::<f64>::from_confusions(&[
            [[1.0, 0.0], [0.0, 1.0]],
            [[1.0, 0.0], [0.0, 1.0]],
        ]);
        let raw = Histogram { n_bits: 2, counts: vec![10, 20, 30, 40] };
        let q = mitigate(&raw, &cal).unwrap();
        for (qi, &ci) in q.iter().zip(raw.counts.iter()) {
            assert_relative_eq!(*qi, ci as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn mitigation_inverts_known_confusion() {
        // Forward-simulate a known distribution through confusion, then
        // correct with the exact calibration: should recover the truth.
        let confusions = [[[0.9, 0.1], [0.1, 0.9]], [[0.95, 0.05], [0.05, 0.95]]];
        let cal = CalibrationMatrix::<f64>::from_confusions(&confusions);
        let truth = [0.5, 0.0, 0.0, 0.5];
        let shots = 1_000_000.0f64;
        let mut corrupted = vec![0.0f64; 4];
        for read in 0..4 {
            for t in 0..4 {
                corrupted[read] += cal.matrix()[(read, t)] * truth[t] * shots;
            }
        }
        let raw = Histogram {
            n_bits: 2,
            counts: corrupted.iter().map(|&x| x.round() as u64).collect(),
        };
        let q = mitigate(&raw, &cal).unwrap();
        let total: f64 = q.iter().sum();
        assert_relative_eq!(total, raw.total() as f64, epsilon = 1e-6);
        for (i, &t) in truth.iter().enumerate() {
            assert!((q[i] / shots - t).abs() < 1e-5, "bin {i}: {} vs {t}", q[i] / shots);
        }
    }

    #[test]
    fn mitigation_output_is_nonnegative_and_conserves_shots() {
        let cal = CalibrationMatrix::<f64>::from_confusions(&[[[0.8, 0.2], [0.2, 0.8]]]);
        let raw = Histogram { n_bits: 1, counts: vec![990, 10] };
        let q = mitigate(&raw, &cal).unwrap();
        assert!(q.iter().all(|&x| x >= 0.0));
        assert_relative_eq!(q.iter().sum::<f64>(), 1000.0, epsilon = 1e-6);
    }

    #[test]
    fn simplex_projection_examples() {
        let mut v = vec![0.5, 0.5];
        project_to_scaled_simplex(&mut v, 1.0);
        assert_relative_eq!(v[0], 0.5, epsilon = 1e-15);
        let mut v = vec![2.0, -1.0];
        project_to_scaled_simplex(&mut v, 1.0);
        assert_relative_eq!(v[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-15);
        let mut v = vec![1.0, 1.0, 1.0];
        project_to_scaled_simplex(&mut v, 6.0);
        for x in v {
            assert_relative_eq!(x, 2.0, epsilon = 1e-13);
        }
    }
}
