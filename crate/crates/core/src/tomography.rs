//! Projective Pauli tomography of the two-rail photon pair.
//!
//! The nonlocal state on `(OamA, PolB)` is estimated from coincidence
//! counting in the 36 eigenprojector settings `(±σ_a) ⊗ (±σ_b)` with
//! `a, b ∈ {X, Y, Z}`. Expected rates are `N (Tr[ρ Π] + b)` where `b`
//! models a uniform accidental background per setting; because every
//! projector has unit trace, a background simply blends the estimate
//! towards the maximally mixed state, `(ρ + b·I) / (1 + 4b)`.
//!
//! Estimation proceeds in three stages, each usable on its own:
//!
//! 1. linear inversion — least squares on the 16 Pauli coefficients,
//!    trace-normalized, flagged if the estimate has negative eigenvalues;
//! 2. projection onto physical states — eigenvalue projection onto the
//!    probability simplex;
//! 3. iterative maximum likelihood — the `R ρ R` fixed-point iteration
//!    with step dilution so the Poisson log-likelihood never decreases.
//!
//! Statistical uncertainties come from a parametric bootstrap: counts are
//! resampled Poissonian around the observed values, the full pipeline is
//! rerun per replica with independent deterministic seeds, and the spread
//! of any scalar functional of the state is reported.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::cmat::{cx, CMatrix};
use crate::error::{Error, Result};
use crate::tensor::{pauli_matrix, DensityOperator, FactorLabel, PauliAxis};

/// Factor pair every routine in this module works on.
const TOMO_FACTORS: [FactorLabel; 2] = [FactorLabel::OamA, FactorLabel::PolB];

/// Floor for modelled setting probabilities inside likelihood ratios.
const PROBABILITY_FLOOR: f64 = 1e-15;

// ---------------------------------------------------------------------------
// settings

/// One projective setting: a Pauli eigenprojector on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomographySetting {
    basis_a: PauliAxis,
    eig_a: i8,
    basis_b: PauliAxis,
    eig_b: i8,
}

impl TomographySetting {
    pub fn new(basis_a: PauliAxis, eig_a: i8, basis_b: PauliAxis, eig_b: i8) -> Result<Self> {
        for eig in [eig_a, eig_b] {
            if eig != 1 && eig != -1 {
                return Err(Error::OutOfRange {
                    name: "pauli eigenvalue",
                    value: eig as f64,
                    expected: "+1 or -1",
                });
            }
        }
        Ok(Self {
            basis_a,
            eig_a,
            basis_b,
            eig_b,
        })
    }

    pub fn basis_a(&self) -> PauliAxis {
        self.basis_a
    }

    pub fn eig_a(&self) -> i8 {
        self.eig_a
    }

    pub fn basis_b(&self) -> PauliAxis {
        self.basis_b
    }

    pub fn eig_b(&self) -> i8 {
        self.eig_b
    }

    /// Rank-one projector `(I + e_a σ_a)/2 ⊗ (I + e_b σ_b)/2` in the joint
    /// basis (first factor is the slow index).
    pub fn projector(&self) -> CMatrix {
        qubit_projector(self.basis_a, self.eig_a).kron(&qubit_projector(self.basis_b, self.eig_b))
    }
}

fn qubit_projector(axis: PauliAxis, eig: i8) -> CMatrix {
    CMatrix::identity(2)
        .add(&pauli_matrix(axis).scale(cx(eig as f64, 0.0)))
        .expect("2x2 shapes agree")
        .scale(cx(0.5, 0.0))
}

/// The full informationally complete set: bases X, Y, Z on each side, both
/// eigenvalues, in a fixed documented order (side A slowest, eigenvalue of
/// side B fastest). The 36 projectors resolve the identity three times per
/// side: their sum is `9 I`.
pub fn settings_two_qubit() -> Vec<TomographySetting> {
    let mut out = Vec::with_capacity(36);
    for basis_a in PauliAxis::ALL {
        for eig_a in [1, -1] {
            for basis_b in PauliAxis::ALL {
                for eig_b in [1, -1] {
                    out.push(TomographySetting {
                        basis_a,
                        eig_a,
                        basis_b,
                        eig_b,
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// counting

/// Observed coincidences for one setting together with its exposure (the
/// per-setting photon-pair budget the rate was scaled by).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub setting: TomographySetting,
    pub counts: u64,
    pub exposure: f64,
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn check_tomo_state(rho: &DensityOperator) -> Result<()> {
    if rho.factors() != TOMO_FACTORS {
        return Err(Error::FactorMismatch(format!(
            "tomography works on {TOMO_FACTORS:?}, got {:?}",
            rho.factors()
        )));
    }
    Ok(())
}

/// Draw Poissonian counts for every setting: `counts ~ Poisson(N (p + b))`
/// with `p = Tr[ρ Π]`. Deterministic in the seed.
pub fn simulate_counts(
    rho: &DensityOperator,
    n_tot: f64,
    background: f64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    check_tomo_state(rho)?;
    if !(n_tot.is_finite() && n_tot > 0.0) {
        return Err(Error::OutOfRange {
            name: "n_tot",
            value: n_tot,
            expected: "a positive finite exposure",
        });
    }
    if !(background.is_finite() && background >= 0.0) {
        return Err(Error::OutOfRange {
            name: "background",
            value: background,
            expected: "a nonnegative finite rate",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    settings_two_qubit()
        .into_iter()
        .map(|setting| {
            let p = trace_product(rho.mat(), &setting.projector()).re.max(0.0);
            let mu = n_tot * (p + background);
            let counts = if mu > 0.0 {
                let draw: f64 = Poisson::new(mu)
                    .map_err(|_| Error::OutOfRange {
                        name: "poisson mean",
                        value: mu,
                        expected: "a positive finite mean",
                    })?
                    .sample(&mut rng);
                draw.round() as u64
            } else {
                0
            };
            Ok(CountRecord {
                setting,
                counts,
                exposure: n_tot,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// linear inversion

/// Result of least-squares inversion: a unit-trace Hermitian estimate that
/// may have (slightly) negative eigenvalues, and a flag saying whether it
/// is already a physical state.
#[derive(Debug, Clone)]
pub struct LinearReconstruction {
    pub matrix: CMatrix,
    pub physical: bool,
}

fn check_records(records: &[CountRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::DimensionMismatch(
            "no count records to reconstruct from".into(),
        ));
    }
    for r in records {
        if !(r.exposure.is_finite() && r.exposure > 0.0) {
            return Err(Error::OutOfRange {
                name: "exposure",
                value: r.exposure,
                expected: "a positive finite exposure",
            });
        }
    }
    Ok(())
}

fn pauli_products() -> Vec<CMatrix> {
    let single = [
        CMatrix::identity(2),
        pauli_matrix(PauliAxis::X),
        pauli_matrix(PauliAxis::Y),
        pauli_matrix(PauliAxis::Z),
    ];
    let mut out = Vec::with_capacity(16);
    for a in &single {
        for b in &single {
            out.push(a.kron(b));
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; rejects rank-deficient
/// systems instead of returning an arbitrary solution.
fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < 1e-10 {
            return Err(Error::Singular(
                "measurement settings do not span the operator space".into(),
            ));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            // rows `row` and `col` alias under iterators; plain indexing it is
            #[allow(clippy::needless_range_loop)]
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Least-squares estimate of the state from observed frequencies
/// `f = counts / exposure ≈ Tr[ρ Π] + b`. The Pauli expansion is solved in
/// the normal equations and the result trace-normalized, which folds any
/// uniform background into an isotropic admixture.
pub fn reconstruct_linear(records: &[CountRecord]) -> Result<LinearReconstruction> {
    check_records(records)?;
    let basis = pauli_products();
    let mut normal = vec![vec![0.0; 16]; 16];
    let mut rhs = vec![0.0; 16];
    for r in records {
        let proj = r.setting.projector();
        let row: Vec<f64> = basis
            .iter()
            .map(|p| trace_product(p, &proj).re / 4.0)
            .collect();
        let f = r.counts as f64 / r.exposure;
        for i in 0..16 {
            for j in 0..16 {
                normal[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * f;
        }
    }
    let t = solve_real(normal, rhs)?;
    // Tr M = t_0 because only the identity component carries trace
    if t[0].abs() < 1e-9 {
        return Err(Error::Singular(
            "reconstructed estimate has vanishing trace".into(),
        ));
    }
    let mut m = CMatrix::zeros(4);
    for (k, p) in basis.iter().enumerate() {
        m = m.add(&p.scale(cx(t[k] / (4.0 * t[0]), 0.0))).expect("4x4");
    }
    let (eigs, _) = m.eig_hermitian()?;
    let physical = eigs.iter().all(|&w| w >= -1e-10);
    Ok(LinearReconstruction {
        matrix: m,
        physical,
    })
}

/// Nearest physical state: eigenvalues of the Hermitian part are projected
/// onto the probability simplex and the state rebuilt in the same
/// eigenbasis.
pub fn project_physical(estimate: &CMatrix) -> Result<DensityOperator> {
    if estimate.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 4x4 estimate, got {0}x{0}",
            estimate.dim()
        )));
    }
    let herm = estimate
        .add(&estimate.adjoint())
        .expect("4x4")
        .scale(cx(0.5, 0.0));
    let (w, v) = herm.eig_hermitian()?;
    // Euclidean projection onto the simplex; w is sorted descending
    let mut theta = 0.0;
    let mut cumulative = 0.0;
    for (k, &wk) in w.iter().enumerate() {
        cumulative += wk;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if wk - candidate > 0.0 {
            theta = candidate;
        }
    }
    let lambda: Vec<f64> = w.iter().map(|&wk| (wk - theta).max(0.0)).collect();
    let mat = CMatrix::from_fn(4, |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &lk) in lambda.iter().enumerate() {
            acc += cx(lk, 0.0) * v[(r, k)] * v[(c, k)].conj();
        }
        acc
    });
    DensityOperator::new(&TOMO_FACTORS, mat)
}

// ---------------------------------------------------------------------------
// maximum likelihood

/// Final state of the likelihood climb plus bookkeeping.
#[derive(Debug, Clone)]
pub struct MleOutcome {
    pub state: DensityOperator,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

fn log_likelihood(records: &[CountRecord], probabilities: &[f64]) -> f64 {
    records
        .iter()
        .zip(probabilities)
        .map(|(r, &p)| r.counts as f64 * p.max(PROBABILITY_FLOOR).ln())
        .sum()
}

fn setting_probabilities(mat: &CMatrix, projectors: &[CMatrix]) -> Vec<f64> {
    projectors
        .iter()
        .map(|p| trace_product(mat, p).re)
        .collect()
}

/// Iterative `R ρ R` maximum-likelihood refinement with step dilution: a
/// full step is taken when it does not lower the Poisson log-likelihood,
/// otherwise the step operator is blended towards the identity until it
/// does. Stops when the trace-norm update falls below `tol`. With
/// `max_iter = 0` the initial state is passed through unrefined and
/// flagged unconverged.
pub fn mle_refine(
    records: &[CountRecord],
    initial: &DensityOperator,
    max_iter: usize,
    tol: f64,
) -> Result<MleOutcome> {
    check_records(records)?;
    check_tomo_state(initial)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tolerance",
            value: tol,
            expected: "a positive finite tolerance",
        });
    }
    let projectors: Vec<CMatrix> = records.iter().map(|r| r.setting.projector()).collect();
    let frequencies: Vec<f64> = records
        .iter()
        .map(|r| r.counts as f64 / r.exposure)
        .collect();

    let mut rho = initial.mat().clone();
    let mut probs = setting_probabilities(&rho, &projectors);
    let mut loglik = log_likelihood(records, &probs);
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iter {
        let mut r_op = CMatrix::zeros(4);
        for (k, proj) in projectors.iter().enumerate() {
            let weight = frequencies[k] / probs[k].max(PROBABILITY_FLOOR);
            r_op = r_op.add(&proj.scale(cx(weight, 0.0))).expect("4x4");
        }
        // normalized so a unit step is R/9 (the settings resolve 9I)
        let step = r_op.scale(cx(1.0 / 9.0, 0.0));

        let mut accepted = None;
        let mut lambda = 1.0;
        for _ in 0..30 {
            let op = CMatrix::identity(4)
                .scale(cx(1.0 - lambda, 0.0))
                .add(&step.scale(cx(lambda, 0.0)))
                .expect("4x4");
            let raw = op.mul(&rho).expect("4x4").mul(&op).expect("4x4");
            let herm = raw.add(&raw.adjoint()).expect("4x4").scale(cx(0.5, 0.0));
            let trace = herm.trace().re;
            if trace <= 0.0 {
                lambda *= 0.5;
                continue;
            }
            let candidate = herm.scale(cx(1.0 / trace, 0.0));
            let cand_probs = setting_probabilities(&candidate, &projectors);
            let cand_loglik = log_likelihood(records, &cand_probs);
            if cand_loglik >= loglik - 1e-12 {
                accepted = Some((candidate, cand_probs, cand_loglik));
                break;
            }
            lambda *= 0.5;
        }
        let Some((next, next_probs, next_loglik)) = accepted else {
            // no step improves the likelihood: already at the maximum
            converged = true;
            iterations = it;
            break;
        };
        let delta = next
            .sub(&rho)
            .expect("4x4")
            .trace_norm_hermitian()?;
        rho = next;
        probs = next_probs;
        loglik = next_loglik;
        iterations = it + 1;
        if delta < tol {
            converged = true;
            break;
        }
    }

    let state = DensityOperator::new(&TOMO_FACTORS, rho)?;
    Ok(MleOutcome {
        state,
        iterations,
        converged,
        log_likelihood: loglik,
    })
}

// ---------------------------------------------------------------------------
// bootstrap uncertainties

/// Spread of a scalar functional of the reconstructed state over Poisson
/// bootstrap replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub mean: f64,
    pub std_dev: f64,
    pub dropped: usize,
}

/// SplitMix64 finalizer: decorrelated per-replica seeds from one master.
fn replica_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parametric bootstrap: resample every record Poissonian about its
/// observed count, rerun linear inversion, physical projection and a short
/// likelihood refinement, and evaluate `estimator` on each replica state.
/// Replicas whose pipeline fails are dropped; more than a tenth failing is
/// an error. Deterministic in the seed regardless of thread scheduling.
pub fn monte_carlo_uncertainty<F>(
    records: &[CountRecord],
    replicas: usize,
    seed: u64,
    estimator: F,
) -> Result<MonteCarloReport>
where
    F: Fn(&DensityOperator) -> Result<f64> + Sync,
{
    check_records(records)?;
    if replicas < 2 {
        return Err(Error::OutOfRange {
            name: "replicas",
            value: replicas as f64,
            expected: "at least two bootstrap replicas",
        });
    }
    let estimates: Vec<Result<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(seed, r as u64));
            let resampled: Vec<CountRecord> = records
                .iter()
                .map(|rec| {
                    let counts = if rec.counts == 0 {
                        0
                    } else {
                        let draw: f64 = Poisson::new(rec.counts as f64)
                            .expect("positive mean")
                            .sample(&mut rng);
                        draw.round() as u64
                    };
                    CountRecord { counts, ..*rec }
                })
                .collect();
            let linear = reconstruct_linear(&resampled)?;
            let projected = project_physical(&linear.matrix)?;
            let refined = mle_refine(&resampled, &projected, 100, 1e-8)?;
            estimator(&refined.state)
        })
        .collect();

    let kept: Vec<f64> = estimates.iter().filter_map(|e| e.as_ref().ok()).copied().collect();
    let dropped = replicas - kept.len();
    if dropped * 10 > replicas || kept.len() < 2 {
        return Err(Error::NoConvergence(format!(
            "{dropped} of {replicas} bootstrap replicas failed"
        )));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let var = kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (kept.len() - 1) as f64;
    Ok(MonteCarloReport {
        mean,
        std_dev: var.sqrt(),
        dropped,
    })
}

// ---------------------------------------------------------------------------
// CSV interchange

const COUNTS_HEADER: &str = "basisA,eigA,basisB,eigB,counts,exposure";
const DENSITY_HEADER: &str = "row,col,re,im";

fn axis_letter(axis: PauliAxis) -> &'static str {
    match axis {
        PauliAxis::X => "X",
        PauliAxis::Y => "Y",
        PauliAxis::Z => "Z",
    }
}

fn parse_axis(s: &str) -> Result<PauliAxis> {
    match s {
        "X" => Ok(PauliAxis::X),
        "Y" => Ok(PauliAxis::Y),
        "Z" => Ok(PauliAxis::Z),
        other => Err(Error::Parse(format!("unknown basis letter `{other}`"))),
    }
}

pub fn counts_to_csv(records: &[CountRecord]) -> String {
    let mut out = String::from(COUNTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            axis_letter(r.setting.basis_a),
            r.setting.eig_a,
            axis_letter(r.setting.basis_b),
            r.setting.eig_b,
            r.counts,
            r.exposure
        ));
    }
    out
}

pub fn counts_from_csv(text: &str) -> Result<Vec<CountRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == COUNTS_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `{COUNTS_HEADER}`, got {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!(
                "expected 6 fields per count row, got {} in `{line}`",
                fields.len()
            )));
        }
        let eig_a: i8 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad eigenvalue `{}`", fields[1])))?;
        let eig_b: i8 = fields[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad eigenvalue `{}`", fields[3])))?;
        let setting = TomographySetting::new(parse_axis(fields[0])?, eig_a, parse_axis(fields[2])?, eig_b)
            .map_err(|e| Error::Parse(format!("bad setting in `{line}`: {e}")))?;
        let counts: u64 = fields[4]
            .parse()
            .map_err(|_| Error::Parse(format!("bad counts `{}`", fields[4])))?;
        let exposure: f64 = fields[5]
            .parse()
            .map_err(|_| Error::Parse(format!("bad exposure `{}`", fields[5])))?;
        if !(exposure.is_finite() && exposure > 0.0) {
            return Err(Error::Parse(format!("nonpositive exposure `{exposure}`")));
        }
        records.push(CountRecord {
            setting,
            counts,
            exposure,
        });
    }
    Ok(records)
}

/// Twelve significant digits per entry: enough to round-trip any state this
/// crate produces far below every tolerance used downstream.
pub fn density_to_csv(mat: &CMatrix) -> String {
    let n = mat.dim();
    let mut out = String::from(DENSITY_HEADER);
    out.push('\n');
    for r in 0..n {
        for c in 0..n {
            out.push_str(&format!("{},{},{:.11e},{:.11e}\n", r, c, mat[(r, c)].re, mat[(r, c)].im));
        }
    }
    out
}

pub fn density_from_csv(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == DENSITY_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `{DENSITY_HEADER}`, got {other:?}"
            )))
        }
    }
    let mut entries = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 fields per density row, got {} in `{line}`",
                fields.len()
            )));
        }
        let row: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad row index `{}`", fields[0])))?;
        let col: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad column index `{}`", fields[1])))?;
        let re: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad real part `{}`", fields[2])))?;
        let im: f64 = fields[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad imaginary part `{}`", fields[3])))?;
        entries.push((row, col, cx(re, im)));
    }
    let count = entries.len();
    let n = (count as f64).sqrt().round() as usize;
    if n * n != count || n == 0 {
        return Err(Error::Parse(format!(
            "{count} entries do not fill a square matrix"
        )));
    }
    let mut mat = CMatrix::zeros(n);
    let mut seen = vec![false; n * n];
    for (r, c, v) in entries {
        if r >= n || c >= n {
            return Err(Error::Parse(format!("index ({r}, {c}) outside {n}x{n}")));
        }
        if seen[r * n + c] {
            return Err(Error::Parse(format!("duplicate entry for ({r}, {c})")));
        }
        seen[r * n + c] = true;
        mat[(r, c)] = v;
    }
    // n^2 distinct in-range entries necessarily fill the matrix
    Ok(mat)
}

// ---------------------------------------------------------------------------
