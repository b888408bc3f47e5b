//! Property-based invariants of the simulator and estimators.

use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;

use telecloning_core::circuit::Circuit;
use telecloning_core::exec::{run_exact, Histogram, MeasurePolicy};
use telecloning_core::gate::GateOp;
use telecloning_core::mitigation::{mitigate, CalibrationMatrix};
use telecloning_core::state::{MixedState, PureState, QuantumState};
use telecloning_core::tomography::mle_fit;

fn random_gates(angles: &[f64], n: usize) -> Vec<GateOp<f64>> {
    // A deterministic little program from the sampled angles: rotations on
    // every qubit interleaved with entanglers.
    let mut gates = Vec::new();
    for (i, &a) in angles.iter().enumerate() {
        let q = i % n;
        match i % 3 {
            0 => gates.push(GateOp::ry(q, a)),
            1 => gates.push(GateOp::rz(q, a)),
            _ => {
                gates.push(GateOp::h(q));
                if n > 1 {
                    gates.push(GateOp::cnot(q, (q + 1) % n));
                }
            }
        }
    }
    gates
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm_and_trace(
        angles in prop::collection::vec(-6.3f64..6.3, 1..12),
        n in 1usize..4,
    ) {
        let gates = random_gates(&angles, n);
        let mut psi = PureState::<f64>::zero(n);
        let mut rho = MixedState::<f64>::maximally_mixed(n);
        for g in &gates {
            psi.apply(g).unwrap();
            rho.apply(g).unwrap();
        }
        prop_assert!((psi.norm_sq() - 1.0).abs() < 1e-10);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_and_mixed_evolution_agree(
        angles in prop::collection::vec(-6.3f64..6.3, 1..10),
        n in 1usize..4,
    ) {
        let gates = random_gates(&angles, n);
        let mut psi = PureState::<f64>::zero(n);
        let mut rho = MixedState::<f64>::from_pure(&psi);
        for g in &gates {
            psi.apply(g).unwrap();
            rho.apply(g).unwrap();
        }
        let from_pure = psi.density();
        let diff: DMatrix<Complex<f64>> = from_pure.matrix() - rho.matrix();
        let dev = diff.iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10, "max deviation {dev}");
    }

    #[test]
    fn measurement_then_conditional_equals_controlled_gate(
        theta in 0.1f64..3.0,
        phi in -3.0f64..3.0,
        use_z in any::<bool>(),
    ) {
        // Deferred-measurement principle on two qubits: measuring the control
        // and conditioning classically leaves the target in the same state as
        // the coherent controlled gate followed by discarding the control.
        let prep = [GateOp::ry(0, theta), GateOp::rz(0, phi), GateOp::ry(1, 0.7)];

        let mut measured = Circuit::<f64>::new(2, 1);
        for g in &prep { measured.gate(g.clone()).unwrap(); }
        measured.measure(0, 0).unwrap();
        let corr = if use_z { GateOp::z(1) } else { GateOp::x(1) };
        measured.conditional(0, corr).unwrap();
        let exec = run_exact(&measured, None, MeasurePolicy::BranchAll).unwrap();
        let rho_measured = exec.aggregate_density(&[1]).unwrap();

        let mut coherent = Circuit::<f64>::new(2, 0);
        for g in &prep { coherent.gate(g.clone()).unwrap(); }
        let gate = if use_z { GateOp::cz(0, 1) } else { GateOp::cnot(0, 1) };
        coherent.gate(gate).unwrap();
        let exec = run_exact(&coherent, None, MeasurePolicy::BranchAll).unwrap();
        let rho_coherent = exec.aggregate_density(&[1]).unwrap();

        let diff: DMatrix<Complex<f64>> = rho_measured.matrix() - rho_coherent.matrix();
        let dev = diff.iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12, "max deviation {dev}");
    }

    #[test]
    fn mle_projects_long_bloch_vectors_onto_the_surface(
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
        z in -2.0f64..2.0,
    ) {
        let rho = mle_fit(x, y, z).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        let r = (x * x + y * y + z * z).sqrt();
        // Analytic oracle for a single qubit: inside the Bloch ball the fit
        // is linear inversion; outside, the spectrum projects to (1, 0),
        // i.e. the pure state along the same axis.
        let scale = if r <= 1.0 { 1.0 } else { 1.0 / r };
        let m = rho.matrix();
        prop_assert!((m[(0, 0)].re - 0.5 * (1.0 + z * scale)).abs() < 1e-9);
        prop_assert!((m[(0, 1)].re - 0.5 * x * scale).abs() < 1e-9);
        prop_assert!((m[(0, 1)].im - (-0.5 * y * scale)).abs() < 1e-9);
        if r > 1.0 {
            prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mitigation_is_nonnegative_and_conserves_shots(
        eps0 in 0.0f64..0.3,
        eps1 in 0.0f64..0.3,
        counts in prop::collection::vec(0u64..10_000, 4),
    ) {
        let total: u64 = counts.iter().sum();
        prop_assume!(total > 0);
        let c = [[1.0 - eps0, eps1], [eps0, 1.0 - eps1]];
        let cal = CalibrationMatrix::<f64>::from_confusions(&[c, c]);
        let raw = Histogram { n_bits: 2, counts };
        let q = mitigate(&raw, &cal).unwrap();
        prop_assert!(q.iter().all(|&v| v >= 0.0));
        let sum: f64 = q.iter().sum();
        prop_assert!((sum - total as f64).abs() < 1e-6 * total.max(1) as f64);
    }
}
