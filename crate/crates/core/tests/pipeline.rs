//! End-to-end consistency across modules: the transfer pipeline, the noise
//! channels, the correlation measures, the rendered texture and the
//! tomographic reconstruction must all tell one coherent story about the
//! same states.

use skyrmion_core::channels::{isotropic_mix, pauli_channel, NoiseParams};
use skyrmion_core::correlations::{
    concurrence, discord_bell_diagonal, discord_numeric, fidelity_from_purity_werner,
    fidelity_pure, purity,
};
use skyrmion_core::states::{nonlocal_skyrmion, SkyrmionSpec};
use skyrmion_core::tensor::PauliAxis;
use skyrmion_core::texture::{
    analyze_texture, stokes_nonlocal, ModeFamily, ModeSpec, TransverseGrid, DEGENERACY_EPSILON,
};
use skyrmion_core::tomography::{
    mle_refine, project_physical, reconstruct_linear, simulate_counts,
};
use skyrmion_core::transfer::transfer_pipeline;

const GRID_N: usize = 128;
const WAIST: f64 = 1.0;
const EXTENT: f64 = 6.0;

fn render_modes(l: i32) -> [ModeSpec; 2] {
    [
        ModeSpec::new(ModeFamily::LaguerreGauss, 0, WAIST).unwrap(),
        ModeSpec::new(ModeFamily::LaguerreGauss, l, WAIST).unwrap(),
    ]
}

fn charge_of(rho: &skyrmion_core::tensor::DensityOperator, l: i32) -> (f64, bool) {
    let grid = TransverseGrid::new(GRID_N, EXTENT).unwrap();
    let field = stokes_nonlocal(rho, grid, &render_modes(l)).unwrap();
    let analysis = analyze_texture(&field, DEGENERACY_EPSILON).unwrap();
    (analysis.nsk, analysis.degenerate)
}

/// The measurement-and-correct loop hands every branch the target topology;
/// without correction the three rotated branches lose fidelity but keep the
/// charge, because a Pauli on the remote polarization only rotates the
/// Stokes sphere and the wrapping degree is rotation invariant.
#[test]
fn every_transfer_branch_carries_the_charge() {
    let spec = SkyrmionSpec::new(2).unwrap();
    let target = nonlocal_skyrmion(&spec);

    let corrected = transfer_pipeline(&spec, &NoiseParams::noiseless(), true).unwrap();
    assert_eq!(corrected.len(), 4);
    for branch in &corrected {
        assert!((branch.probability - 0.25).abs() < 1e-12);
        let state = branch.state.as_ref().unwrap();
        assert!((fidelity_pure(&target, state).unwrap() - 1.0).abs() < 1e-12);
        let (nsk, degenerate) = charge_of(state, spec.l());
        assert!(!degenerate);
        assert!((nsk - 2.0).abs() < 1e-3, "branch {:?}: nsk {nsk}", branch.label);
    }

    let raw = transfer_pipeline(&spec, &NoiseParams::noiseless(), false).unwrap();
    let mut faithful = 0;
    for branch in &raw {
        let state = branch.state.as_ref().unwrap();
        let f = fidelity_pure(&target, state).unwrap();
        if (f - 1.0).abs() < 1e-12 {
            faithful += 1;
        }
        let (nsk, degenerate) = charge_of(state, spec.l());
        assert!(!degenerate);
        assert!((nsk - 2.0).abs() < 1e-3, "raw branch {:?}: nsk {nsk}", branch.label);
    }
    assert_eq!(faithful, 1, "only the identity branch needs no correction");
}

/// One isotropic-noise point, followed through every diagnostic at once:
/// simulated fidelity matches both the closed form and the purity route,
/// the correlation measures agree across their independent evaluations,
/// and the degraded state still wraps the sphere twice.
#[test]
fn isotropic_point_is_consistent_across_all_diagnostics() {
    let spec = SkyrmionSpec::new(2).unwrap();
    let xi0 = 0.4;
    let target = nonlocal_skyrmion(&spec);
    let noise = NoiseParams::noiseless().with_xi0(xi0).unwrap();

    let branches = transfer_pipeline(&spec, &noise, true).unwrap();
    let state = branches[0].state.as_ref().unwrap();

    let f_sim = fidelity_pure(&target, state).unwrap();
    let f_analytic = (1.0 - 0.75 * xi0).sqrt();
    assert!((f_sim - f_analytic).abs() < 1e-9);
    assert!((fidelity_from_purity_werner(purity(state)).unwrap() - f_sim).abs() < 1e-9);

    assert!((concurrence(state).unwrap() - (1.0 - 1.5 * xi0)).abs() < 1e-9);
    let closed = discord_bell_diagonal(state).unwrap();
    let numeric = discord_numeric(state, 12, 1e-10).unwrap();
    assert!((closed - numeric).abs() < 1e-4);

    let (nsk, degenerate) = charge_of(state, spec.l());
    assert!(!degenerate);
    assert!((nsk - 2.0).abs() < 1e-3);
}

/// Past the separability threshold the texture is held by discord alone,
/// and the fully depolarizing flip kills charge, entanglement and discord
/// in the same stroke.
#[test]
fn discord_outlives_entanglement_and_dies_with_the_texture() {
    let spec = SkyrmionSpec::new(2).unwrap();
    let rho = nonlocal_skyrmion(&spec).to_density();

    let separable = isotropic_mix(&rho, 0.8).unwrap();
    assert!(concurrence(&separable).unwrap() < 1e-9);
    assert!(discord_bell_diagonal(&separable).unwrap() > 1e-4);
    let (nsk, degenerate) = charge_of(&separable, spec.l());
    assert!(!degenerate);
    assert!((nsk - 2.0).abs() < 1e-3);

    let dead = pauli_channel(&rho, PauliAxis::Z, 0.5).unwrap();
    assert!(concurrence(&dead).unwrap() < 1e-12);
    assert!(discord_bell_diagonal(&dead).unwrap() < 1e-9);
    let (_, degenerate) = charge_of(&dead, spec.l());
    assert!(degenerate);
}

/// Counting statistics close the loop: states reconstructed from finite
/// Poissonian counts are close in fidelity and carry the same charge.
#[test]
fn tomographic_reconstruction_preserves_the_charge() {
    let spec = SkyrmionSpec::new(2).unwrap();
    let truth = isotropic_mix(&nonlocal_skyrmion(&spec).to_density(), 0.3).unwrap();

    let records = simulate_counts(&truth, 1e5, 0.0, 17).unwrap();
    let linear = reconstruct_linear(&records).unwrap();
    let projected = project_physical(&linear.matrix).unwrap();
    let refined = mle_refine(&records, &projected, 200, 1e-9).unwrap();
    assert!(refined.converged);

    let overlap = refined
        .state
        .mat()
        .sub(truth.mat())
        .unwrap()
        .max_abs();
    assert!(overlap < 0.01, "reconstruction drifted by {overlap}");

    let (nsk, degenerate) = charge_of(&refined.state, spec.l());
    assert!(!degenerate);
    assert!((nsk - 2.0).abs() < 1e-2);
}
