//! Experiment harness: Bloch-grid fidelity sweeps, post-selection analysis,
//! cost tables, and deterministic result emission.
//!
//! Sampled runs draw from the exact outcome distribution of each circuit
//! with a counter-based RNG stream per grid point, so results are
//! bit-identical for a given seed regardless of thread scheduling. Exact
//! runs (`shots = 0`) skip sampling and tomography entirely and evaluate the
//! clone reduced density operators directly.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::error::HarnessError;
use crate::exec::{
    apply_readout_to_distribution, run_exact, sample_histogram, Execution, Histogram,
    MeasurePolicy,
};
use crate::mitigation::{build_calibration, mitigate, CalibrationMatrix};
use crate::noise::NoiseModel;
use crate::rng::{task_rng, CALIBRATION_STREAM};
use crate::state::MixedState;
use crate::telecloning::{
    build_full_circuit, build_protocol_circuit, cnot_cost, emitted_cnots, BellOutcome,
    CircuitFamily, Connectivity, ExecMode, MessageSpec, TelecloningSpec, TomoBasis,
    MESSAGE_CLBIT, PORT_CLBIT,
};
use crate::tomography::{fidelity_pure, mle_fit, pauli_expectations, BasisCounts, Counts};

/// Execution strategy selected for a sweep. `Postselect` covers all four
/// Bell-outcome variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Feedforward,
    Deferred,
    Postselect,
}

impl ModeChoice {
    pub fn id(self) -> &'static str {
        match self {
            ModeChoice::Feedforward => "feedforward",
            ModeChoice::Deferred => "deferred",
            ModeChoice::Postselect => "postselect",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "feedforward" => Some(ModeChoice::Feedforward),
            "deferred" => Some(ModeChoice::Deferred),
            "postselect" => Some(ModeChoice::Postselect),
            _ => None,
        }
    }
}

/// Inclusive linearly spaced grid over the Bloch angles:
/// θ_y over [0, π] and θ_z over [0, 2π] (unless pinned).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub n_theta_y: usize,
    pub n_theta_z: usize,
}

fn linspace(hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

/// Full description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: CircuitFamily,
    pub mode: ModeChoice,
    pub connectivity: Connectivity,
    pub grid: GridSpec,
    /// Pins θ_z to a single value (the grid then spans θ_y only).
    pub fixed_theta_z: Option<f64>,
    /// 0 means exact evaluation (no sampling, no tomography).
    pub shots: u64,
    pub noise: Option<NoiseModel>,
    pub mitigate: bool,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.grid.n_theta_y == 0 || self.grid.n_theta_z == 0 {
            return Err(HarnessError::Config("grid must have at least one point per axis".into()));
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Grid points in row-major order: θ_y outer, θ_z inner.
    pub fn grid_points(&self) -> Vec<(f64, f64)> {
        let tys = linspace(PI, self.grid.n_theta_y);
        let tzs = match self.fixed_theta_z {
            Some(v) => vec![v],
            None => linspace(2.0 * PI, self.grid.n_theta_z),
        };
        let mut points = Vec::with_capacity(tys.len() * tzs.len());
        for &ty in &tys {
            for &tz in &tzs {
                points.push((ty, tz));
            }
        }
        points
    }

    /// Whether the mitigation flag can take effect (sampling required).
    pub fn mitigation_active(&self) -> bool {
        self.mitigate && self.shots > 0
    }
}

/// One fidelity observation: a single clone at a single grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub circuit: String,
    pub mode: String,
    pub connectivity: String,
    pub theta_y: f64,
    pub theta_z: f64,
    pub clone: usize,
    pub shots: u64,
    pub mitigated: bool,
    pub fidelity: f64,
}

/// Flat emission schema; the seed comes last.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepRow<'a> {
    circuit: &'a str,
    mode: &'a str,
    connectivity: &'a str,
    theta_y: f64,
    theta_z: f64,
    clone: usize,
    shots: u64,
    mitigated: bool,
    fidelity: f64,
    seed: u64,
}

impl<'a> SweepRow<'a> {
    fn new(record: &'a SweepRecord, seed: u64) -> Self {
        SweepRow {
            circuit: &record.circuit,
            mode: &record.mode,
            connectivity: &record.connectivity,
            theta_y: record.theta_y,
            theta_z: record.theta_z,
            clone: record.clone,
            shots: record.shots,
            mitigated: record.mitigated,
            fidelity: record.fidelity,
            seed,
        }
    }
}

/// Clone reduced density operators of the protocol run exactly, one per
/// clone, averaged over measurement outcomes (and over the four variants for
/// post-selection, weighted by their kept probabilities).
pub fn exact_clone_densities(
    family: CircuitFamily,
    mode: ModeChoice,
    msg: &MessageSpec<f64>,
    noise: Option<&NoiseModel>,
) -> Result<Vec<MixedState<f64>>, HarnessError> {
    let clones = family.clone_qubits();
    match mode {
        ModeChoice::Feedforward | ModeChoice::Deferred => {
            let exec_mode = if mode == ModeChoice::Feedforward {
                ExecMode::Feedforward
            } else {
                ExecMode::Deferred
            };
            let exec = run_protocol(family, exec_mode, msg, noise)?;
            Ok(clones
                .iter()
                .map(|&q| exec.aggregate_density(&[q]))
                .collect::<Result<Vec<_>, _>>()?)
        }
        ModeChoice::Postselect => {
            let branches = exact_postselect_branches(family, msg, noise)?;
            let dim = 2usize;
            let mut acc = vec![
                nalgebra::DMatrix::from_element(
                    dim,
                    dim,
                    num_complex::Complex::new(0.0f64, 0.0)
                );
                clones.len()
            ];
            let mut total = 0.0;
            for (_, p, rhos) in &branches {
                total += p;
                for (k, rho) in rhos.iter().enumerate() {
                    acc[k] += rho.matrix() * num_complex::Complex::new(*p, 0.0);
                }
            }
            acc.into_iter()
                .map(|m| {
                    MixedState::from_matrix(1, m * num_complex::Complex::new(1.0 / total, 0.0))
                        .map_err(HarnessError::from)
                })
                .collect()
        }
    }
}

/// Per-variant exact post-selection data: `(outcome, probability, clone
/// densities)` for each of the four Bell outcomes.
pub fn exact_postselect_branches(
    family: CircuitFamily,
    msg: &MessageSpec<f64>,
    noise: Option<&NoiseModel>,
) -> Result<Vec<(BellOutcome, f64, Vec<MixedState<f64>>)>, HarnessError> {
    let clones = family.clone_qubits();
    let mut out = Vec::with_capacity(4);
    for outcome in BellOutcome::ALL {
        let exec = run_protocol(family, ExecMode::Postselect(outcome), msg, noise)?;
        let filter = [(MESSAGE_CLBIT, outcome.message), (PORT_CLBIT, outcome.port)];
        let mut prob = 0.0;
        let mut rhos = Vec::with_capacity(clones.len());
        for &q in &clones {
            let (p, rho) = exec.filtered_density(&filter, &[q])?;
            prob = p;
            rhos.push(rho);
        }
        out.push((outcome, prob, rhos));
    }
    Ok(out)
}

fn run_protocol(
    family: CircuitFamily,
    mode: ExecMode,
    msg: &MessageSpec<f64>,
    noise: Option<&NoiseModel>,
) -> Result<Execution<f64>, HarnessError> {
    // Connectivity does not alter the emitted gates, only cost accounting.
    let spec = TelecloningSpec::new(family, mode, Connectivity::Full);
    let circuit = build_protocol_circuit(&spec, msg)?.decompose()?;
    Ok(run_exact(&circuit, noise, MeasurePolicy::BranchAll)?)
}

/// Qubits behind each classical bit, in clbit order (message, port, clones).
fn measured_qubits(family: CircuitFamily) -> Vec<usize> {
    let mut qs = vec![crate::telecloning::MESSAGE_QUBIT, family.port_qubit()];
    qs.extend(family.clone_qubits());
    qs
}

/// Builds the calibration matrix by simulating the 2^m basis-state
/// preparation circuits through the model's readout confusion and sampling
/// each with `shots` shots.
pub fn build_sampled_calibration(
    family: CircuitFamily,
    noise: Option<&NoiseModel>,
    shots: u64,
    seed: u64,
) -> Result<CalibrationMatrix<f64>, HarnessError> {
    let qubits = measured_qubits(family);
    let m = qubits.len();
    let mut rng = task_rng(seed, CALIBRATION_STREAM);
    let mut histograms = Vec::with_capacity(1 << m);
    for prepared in 0..(1usize << m) {
        let mut dist = vec![0.0f64; 1 << m];
        dist[prepared] = 1.0;
        if let Some(n) = noise {
            for (k, &q) in qubits.iter().enumerate() {
                apply_readout_to_distribution(&mut dist, k, n.readout_for(q));
            }
        }
        histograms.push(sample_histogram(&dist, shots, &mut rng)?);
    }
    Ok(build_calibration(&histograms)?)
}

/// Counts of bit `bit` over entries matching `filter`, from quasi-counts.
fn marginal_counts(values: &[f64], bit: usize, filter: &[(usize, bool)]) -> Counts {
    let mut c = Counts::default();
    for (i, &v) in values.iter().enumerate() {
        if !filter.iter().all(|&(b, want)| ((i >> b) & 1 == 1) == want) {
            continue;
        }
        if (i >> bit) & 1 == 1 {
            c.ones += v;
        } else {
            c.zeros += v;
        }
    }
    c
}

fn quasi_counts(
    hist: &Histogram,
    calibration: Option<&CalibrationMatrix<f64>>,
) -> Result<Vec<f64>, HarnessError> {
    match calibration {
        Some(cal) => Ok(mitigate(hist, cal)?),
        None => Ok(hist.counts.iter().map(|&c| c as f64).collect()),
    }
}

/// Per-variant tomography data for one sampled post-selection grid point.
struct PostselectSample {
    /// Kept shots per variant, summed over the three bases.
    kept: [f64; 4],
    /// Total shots per basis (after mitigation these stay equal to `shots`).
    total_per_basis: f64,
    /// Per variant, per clone basis counts restricted to kept shots.
    counts: [Vec<BasisCounts>; 4],
}

/// Samples the four post-selection variant circuits with a shared
/// message/port multinomial, so each shot is kept by exactly one variant and
/// the kept proportions partition the shot total exactly.
fn sample_postselect(
    family: CircuitFamily,
    msg: &MessageSpec<f64>,
    shots: u64,
    noise: Option<&NoiseModel>,
    calibration: Option<&CalibrationMatrix<f64>>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<PostselectSample, HarnessError> {
    let m = family.m_clones;
    let n_bits = 2 + m;
    let dim = 1usize << n_bits;
    let mut kept = [0.0f64; 4];
    let mut counts: [Vec<BasisCounts>; 4] = std::array::from_fn(|_| vec![BasisCounts::default(); m]);
    for basis in TomoBasis::ALL {
        // Exact joint distribution of every variant circuit.
        let mut dists = Vec::with_capacity(4);
        for outcome in BellOutcome::ALL {
            let spec = TelecloningSpec::new(
                family,
                ExecMode::Postselect(outcome),
                Connectivity::Full,
            );
            let circuit = build_full_circuit(&spec, msg, basis)?.decompose()?;
            let exec = run_exact(&circuit, noise, MeasurePolicy::DistributeTerminal)?;
            dists.push(exec.outcome_distribution(noise)?);
        }
        // The (message, port) marginal is correction-independent; share one
        // multinomial draw of it across the variants.
        let mut p_mp = [0.0f64; 4];
        for (i, &p) in dists[0].iter().enumerate() {
            p_mp[i & 0b11] += p;
        }
        let class_counts = sample_histogram(&p_mp, shots, rng)?;
        for (v, dist) in dists.iter().enumerate() {
            let mut hist = Histogram::empty(n_bits);
            for (w, &n_w) in class_counts.counts.iter().enumerate() {
                if n_w == 0 {
                    continue;
                }
                // Clone-bit distribution conditioned on (message, port) = w.
                let mut cond = vec![0.0f64; 1 << m];
                for i in 0..dim {
                    if i & 0b11 == w {
                        cond[i >> 2] += dist[i];
                    }
                }
                let norm: f64 = cond.iter().sum();
                if norm <= 0.0 {
                    continue;
                }
                for c in cond.iter_mut() {
                    *c /= norm;
                }
                let sub = sample_histogram(&cond, n_w, rng)?;
                for (c_idx, &n) in sub.counts.iter().enumerate() {
                    hist.counts[(c_idx << 2) | w] += n;
                }
            }
            let values = quasi_counts(&hist, calibration)?;
            let variant = BellOutcome::ALL[v];
            let filter =
                [(MESSAGE_CLBIT, variant.message), (PORT_CLBIT, variant.port)];
            for clone_idx in 0..m {
                let c = marginal_counts(&values, 2 + clone_idx, &filter);
                match basis {
                    TomoBasis::X => counts[v][clone_idx].x = c,
                    TomoBasis::Y => counts[v][clone_idx].y = c,
                    TomoBasis::Z => counts[v][clone_idx].z = c,
                }
            }
            // Kept mass for this basis (identical filter for every clone).
            let kept_mass = marginal_counts(&values, 2, &filter).total();
            kept[v] += kept_mass;
        }
    }
    Ok(PostselectSample { kept, total_per_basis: shots as f64, counts })
}

/// Sampled tomography fidelities for one grid point (all clones).
fn sampled_fidelities(
    family: CircuitFamily,
    mode: ModeChoice,
    msg: &MessageSpec<f64>,
    shots: u64,
    noise: Option<&NoiseModel>,
    calibration: Option<&CalibrationMatrix<f64>>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<f64>, HarnessError> {
    let m = family.m_clones;
    let psi = msg.state();
    let mut per_clone = vec![BasisCounts::default(); m];
    match mode {
        ModeChoice::Postselect => {
            let sample = sample_postselect(family, msg, shots, noise, calibration, rng)?;
            // Sum kept counts across the four variants before fitting.
            for v in 0..4 {
                for clone_idx in 0..m {
                    let c = &sample.counts[v][clone_idx];
                    per_clone[clone_idx].x.zeros += c.x.zeros;
                    per_clone[clone_idx].x.ones += c.x.ones;
                    per_clone[clone_idx].y.zeros += c.y.zeros;
                    per_clone[clone_idx].y.ones += c.y.ones;
                    per_clone[clone_idx].z.zeros += c.z.zeros;
                    per_clone[clone_idx].z.ones += c.z.ones;
                }
            }
        }
        ModeChoice::Feedforward | ModeChoice::Deferred => {
            let exec_mode = if mode == ModeChoice::Feedforward {
                ExecMode::Feedforward
            } else {
                ExecMode::Deferred
            };
            let spec = TelecloningSpec::new(family, exec_mode, Connectivity::Full);
            for basis in TomoBasis::ALL {
                let circuit = build_full_circuit(&spec, msg, basis)?.decompose()?;
                let exec = run_exact(&circuit, noise, MeasurePolicy::DistributeTerminal)?;
                let dist = exec.outcome_distribution(noise)?;
                let hist = sample_histogram(&dist, shots, rng)?;
                let values = quasi_counts(&hist, calibration)?;
                for clone_idx in 0..m {
                    let c = marginal_counts(&values, 2 + clone_idx, &[]);
                    match basis {
                        TomoBasis::X => per_clone[clone_idx].x = c,
                        TomoBasis::Y => per_clone[clone_idx].y = c,
                        TomoBasis::Z => per_clone[clone_idx].z = c,
                    }
                }
            }
        }
    }
    per_clone
        .iter()
        .map(|counts| {
            let (x, y, z) = pauli_expectations::<f64>(counts)?;
            let rho = mle_fit(x, y, z)?;
            Ok(fidelity_pure(&psi, &rho)?)
        })
        .collect()
}

/// Runs the configured sweep. Record order is deterministic: grid-major
/// (θ_y outer, θ_z inner), clone-minor.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    config.validate()?;
    let points = config.grid_points();
    let calibration = if config.mitigation_active() {
        Some(build_sampled_calibration(
            config.family,
            config.noise.as_ref(),
            config.shots,
            config.seed,
        )?)
    } else {
        None
    };
    let per_point: Vec<Vec<SweepRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, &(theta_y, theta_z))| -> Result<Vec<SweepRecord>, HarnessError> {
            let msg = MessageSpec::new(theta_y, theta_z);
            let fidelities = if config.shots == 0 {
                let densities = exact_clone_densities(
                    config.family,
                    config.mode,
                    &msg,
                    config.noise.as_ref(),
                )?;
                let psi = msg.state();
                densities
                    .iter()
                    .map(|rho| Ok(fidelity_pure(&psi, rho)?))
                    .collect::<Result<Vec<f64>, HarnessError>>()?
            } else {
                let mut rng = task_rng(config.seed, idx as u64);
                sampled_fidelities(
                    config.family,
                    config.mode,
                    &msg,
                    config.shots,
                    config.noise.as_ref(),
                    calibration.as_ref(),
                    &mut rng,
                )?
            };
            Ok(fidelities
                .into_iter()
                .enumerate()
                .map(|(clone, fidelity)| SweepRecord {
                    circuit: config.family.id(),
                    mode: config.mode.id().to_string(),
                    connectivity: config.connectivity.id().to_string(),
                    theta_y,
                    theta_z,
                    clone,
                    shots: config.shots,
                    mitigated: config.mitigation_active(),
                    fidelity,
                })
                .collect())
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// One row of the post-selection analysis: a variant at one θ_y, one clone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostselectRecord {
    pub theta_y: f64,
    /// Two-character variant label, message bit first.
    pub variant: String,
    pub kept_proportion: f64,
    pub clone: usize,
    pub fidelity: f64,
}

/// Post-selection statistics over the θ_y grid (θ_z pinned, default π/2).
/// Defined for the 2-clone families.
pub fn postselect_analysis(
    config: &ExperimentConfig,
) -> Result<Vec<PostselectRecord>, HarnessError> {
    config.validate()?;
    if config.family.m_clones != 2 {
        return Err(HarnessError::Config(
            "post-selection analysis is defined for the 2-clone families".into(),
        ));
    }
    let theta_z = config.fixed_theta_z.unwrap_or(FRAC_PI_2);
    let tys = linspace(PI, config.grid.n_theta_y);
    let calibration = if config.mitigation_active() {
        Some(build_sampled_calibration(
            config.family,
            config.noise.as_ref(),
            config.shots,
            config.seed,
        )?)
    } else {
        None
    };
    let per_point: Vec<Vec<PostselectRecord>> = tys
        .par_iter()
        .enumerate()
        .map(|(idx, &theta_y)| -> Result<Vec<PostselectRecord>, HarnessError> {
            let msg = MessageSpec::new(theta_y, theta_z);
            let psi = msg.state();
            let mut rows = Vec::new();
            if config.shots == 0 {
                let branches =
                    exact_postselect_branches(config.family, &msg, config.noise.as_ref())?;
                for (outcome, prob, rhos) in branches {
                    for (clone, rho) in rhos.iter().enumerate() {
                        rows.push(PostselectRecord {
                            theta_y,
                            variant: outcome.label(),
                            kept_proportion: prob,
                            clone,
                            fidelity: fidelity_pure(&psi, rho)?,
                        });
                    }
                }
            } else {
                let mut rng = task_rng(config.seed, idx as u64);
                let sample = sample_postselect(
                    config.family,
                    &msg,
                    config.shots,
                    config.noise.as_ref(),
                    calibration.as_ref(),
                    &mut rng,
                )?;
                for (v, outcome) in BellOutcome::ALL.iter().enumerate() {
                    let kept_proportion = sample.kept[v] / (3.0 * sample.total_per_basis);
                    for clone in 0..config.family.m_clones {
                        let counts = &sample.counts[v][clone];
                        let (x, y, z) = pauli_expectations::<f64>(counts)?;
                        let rho = mle_fit(x, y, z)?;
                        rows.push(PostselectRecord {
                            theta_y,
                            variant: outcome.label(),
                            kept_proportion,
                            clone,
                            fidelity: fidelity_pure(&psi, &rho)?,
                        });
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Ideal per-variant kept probabilities for the ancilla-free 2-clone circuit
/// keyed by the port bit: `(p_port0, p_port1)`. Each of the two variants
/// sharing a port bit occurs with the returned probability.
pub fn pcc_postselect_proportions(theta_y: f64) -> (f64, f64) {
    let c2 = (theta_y / 2.0).cos().powi(2);
    let s2 = 1.0 - c2;
    ((2.0 * c2 + s2) / 6.0, (c2 + 2.0 * s2) / 6.0)
}

/// Ideal post-selected clone fidelities for the ancilla-free 2-clone circuit
/// keyed by the port bit: `(f_port0, f_port1)`.
pub fn pcc_postselect_fidelities(theta_y: f64) -> (f64, f64) {
    let c2 = (theta_y / 2.0).cos().powi(2);
    let s2 = 1.0 - c2;
    let (p0, p1) = pcc_postselect_proportions(theta_y);
    ((4.0 * c2 + s2) / (12.0 * p0), (c2 + 4.0 * s2) / (12.0 * p1))
}

/// Mean/spread summary over a set of sweep records, pooled across clones and
/// grid points, grouped by (circuit, mode, mitigated).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub circuit: String,
    pub mode: String,
    pub mitigated: bool,
    pub n: usize,
    pub mean_fidelity: f64,
    /// Population standard deviation.
    pub sd_fidelity: f64,
}

pub fn summarize(records: &[SweepRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<((String, String, bool), Vec<f64>)> = Vec::new();
    for r in records {
        let key = (r.circuit.clone(), r.mode.clone(), r.mitigated);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.fidelity),
            None => groups.push((key, vec![r.fidelity])),
        }
    }
    groups
        .into_iter()
        .map(|((circuit, mode, mitigated), vals)| {
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            SummaryRow { circuit, mode, mitigated, n, mean_fidelity: mean, sd_fidelity: var.sqrt() }
        })
        .collect()
}

/// Output format for emitted results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Config echo serialized next to results.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub circuit: String,
    pub mode: String,
    pub connectivity: String,
    pub grid: GridSpec,
    pub fixed_theta_z: Option<f64>,
    pub shots: u64,
    pub noise: Option<NoiseModel>,
    pub mitigate: bool,
    pub seed: u64,
    /// Present when a flag was accepted but had no effect.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConfigEcho {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        let note = if config.mitigate && config.shots == 0 {
            Some("mitigation has no effect in exact mode (shots = 0)".to_string())
        } else {
            None
        };
        ConfigEcho {
            circuit: config.family.id(),
            mode: config.mode.id().to_string(),
            connectivity: config.connectivity.id().to_string(),
            grid: config.grid,
            fixed_theta_z: config.fixed_theta_z,
            shots: config.shots,
            noise: config.noise.clone(),
            mitigate: config.mitigate,
            seed: config.seed,
            note,
        }
    }
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    config: ConfigEcho,
    bit_convention: &'static str,
    records: &'a [SweepRecord],
    summary: Vec<SummaryRow>,
}

const BIT_CONVENTION: &str =
    "little-endian: qubit 0 is bit 0; bitstrings render qubit 0 leftmost";

/// Writes sweep records (plus a summary) into `dir`; returns written paths.
pub fn emit_results(
    records: &[SweepRecord],
    config: &ExperimentConfig,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let sweep_path = dir.join("sweep.csv");
            let mut w = csv::Writer::from_path(&sweep_path)?;
            for r in records {
                w.serialize(SweepRow::new(r, config.seed))?;
            }
            w.flush()?;
            let summary_path = dir.join("summary.csv");
            let mut w = csv::Writer::from_path(&summary_path)?;
            for row in summarize(records) {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(vec![sweep_path, summary_path])
        }
        OutputFormat::Json => {
            let path = dir.join("sweep.json");
            let doc = SweepDocument {
                config: ConfigEcho::from_config(config),
                bit_convention: BIT_CONVENTION,
                records,
                summary: summarize(records),
            };
            std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
            Ok(vec![path])
        }
    }
}

/// Writes post-selection records into `dir`; returns written paths.
pub fn emit_postselect(
    records: &[PostselectRecord],
    config: &ExperimentConfig,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let path = dir.join("postselect.csv");
            let mut w = csv::Writer::from_path(&path)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(vec![path])
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: ConfigEcho,
                bit_convention: &'static str,
                records: &'a [PostselectRecord],
            }
            let path = dir.join("postselect.json");
            let doc = Doc {
                config: ConfigEcho::from_config(config),
                bit_convention: BIT_CONVENTION,
                records,
            };
            std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
            Ok(vec![path])
        }
    }
}

/// One row of the CNOT cost table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub circuit: String,
    pub mode: String,
    pub connectivity: String,
    pub prep_cnots: u64,
    pub dicke_cnots: u64,
    pub bell_cnots: u64,
    pub deferred_cnots: u64,
    pub total: u64,
    /// Two-qubit gates in the as-emitted (all-to-all) decomposition; exceeds
    /// `total` because the emitted Dicke lowering is not the optimized one.
    pub emitted_cnots: u64,
}

/// Cost table over the four named families and three execution modes.
pub fn cost_table(connectivity: Connectivity) -> Result<Vec<CostRow>, HarnessError> {
    let modes = [
        ExecMode::Feedforward,
        ExecMode::Deferred,
        ExecMode::Postselect(BellOutcome { message: false, port: false }),
    ];
    let mut rows = Vec::new();
    for family in CircuitFamily::named() {
        for mode in modes {
            let spec = TelecloningSpec::new(family, mode, connectivity);
            let cost = cnot_cost(&spec);
            rows.push(CostRow {
                circuit: family.id(),
                mode: mode.id().to_string(),
                connectivity: connectivity.id().to_string(),
                prep_cnots: cost.prep_cnots,
                dicke_cnots: cost.dicke_cnots,
                bell_cnots: cost.bell_cnots,
                deferred_cnots: cost.deferred_cnots,
                total: cost.total,
                emitted_cnots: emitted_cnots(&spec)? as u64,
            });
        }
    }
    Ok(rows)
}

/// Writes the cost table; returns the written path.
pub fn emit_cost_table(
    rows: &[CostRow],
    dir: &Path,
    format: OutputFormat,
) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let path = dir.join("cost.csv");
            let mut w = csv::Writer::from_path(&path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join("cost.json");
            std::fs::write(&path, serde_json::to_string_pretty(rows)?)?;
            Ok(path)
        }
    }
}

// Silence an unused import when Circuit is only named in docs.
#[allow(unused)]
fn _circuit_doc_anchor(_c: &Circuit<f64>) {}
