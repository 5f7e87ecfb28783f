//! Noise channels that degrade the protocol: isotropic white noise on the
//! entanglement link, imperfect preparation of the local skyrmion, and the
//! Pauli flip family on photon B's polarization, plus the Poincaré-ellipsoid
//! contraction diagnostic for the flips.
//!
//! All three state-level channels are Pauli-diagonal (they commute with each
//! other and compose inside the family), which is what ultimately lets the
//! texture keep its wrapping number while entanglement dies: the flips only
//! rescale Stokes components, never shear them.

use crate::cmat::cx;
use crate::error::{Error, Result};
use crate::tensor::{DensityOperator, FactorLabel, LinearOperator, PauliAxis};

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            expected: "[0, 1]",
        });
    }
    Ok(())
}

fn require_two_qubit(rho: &DensityOperator) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Knobs for every noise mechanism the pipeline models.
///
/// * `xi0` — isotropic mixing weight applied to the entanglement link.
/// * `p` / `axis` — flip probability and axis of the Pauli channel on
///   photon B's polarization.
/// * `lambda1` — imperfection of the locally prepared skyrmion, modeled as
///   isotropic mixing of the local state before the swap.
/// * `background` — accidental-coincidence rate per detection setting,
///   consumed by the tomography layer rather than any state-level channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    xi0: f64,
    p: f64,
    axis: PauliAxis,
    lambda1: f64,
    background: f64,
}

impl NoiseParams {
    pub fn new(
        xi0: f64,
        p: f64,
        axis: PauliAxis,
        lambda1: f64,
        background: f64,
    ) -> Result<Self> {
        check_unit("xi0", xi0)?;
        check_unit("p", p)?;
        check_unit("lambda1", lambda1)?;
        if !background.is_finite() || background < 0.0 {
            return Err(Error::OutOfRange {
                name: "background",
                value: background,
                expected: "[0, inf)",
            });
        }
        Ok(NoiseParams {
            xi0,
            p,
            axis,
            lambda1,
            background,
        })
    }

    /// All knobs at zero (flip axis defaults to z, irrelevant at p = 0).
    pub fn noiseless() -> Self {
        NoiseParams {
            xi0: 0.0,
            p: 0.0,
            axis: PauliAxis::Z,
            lambda1: 0.0,
            background: 0.0,
        }
    }

    pub fn with_xi0(self, xi0: f64) -> Result<Self> {
        NoiseParams::new(xi0, self.p, self.axis, self.lambda1, self.background)
    }

    pub fn with_flip(self, axis: PauliAxis, p: f64) -> Result<Self> {
        NoiseParams::new(self.xi0, p, axis, self.lambda1, self.background)
    }

    pub fn with_lambda1(self, lambda1: f64) -> Result<Self> {
        NoiseParams::new(self.xi0, self.p, self.axis, lambda1, self.background)
    }

    pub fn with_background(self, background: f64) -> Result<Self> {
        NoiseParams::new(self.xi0, self.p, self.axis, self.lambda1, background)
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn axis(&self) -> PauliAxis {
        self.axis
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn background(&self) -> f64 {
        self.background
    }
}

/// (1 − ξ₀)ρ + ξ₀·I/4: white noise pulling a two-qubit state toward the
/// maximally mixed state. On a pure Bell input this produces the Werner
/// family.
pub fn isotropic_mix(rho: &DensityOperator, xi0: f64) -> Result<DensityOperator> {
    check_unit("xi0", xi0)?;
    require_two_qubit(rho)?;
    let mixed = DensityOperator::maximally_mixed(rho.factors())?;
    let mat = rho
        .mat()
        .scale(cx(1.0 - xi0, 0.0))
        .add(&mixed.mat().scale(cx(xi0, 0.0)))?;
    DensityOperator::new(rho.factors(), mat)
}

/// (1 − p)ρ + p·σρσ with σ the chosen Pauli on photon B's polarization and
/// identity elsewhere: the phase-flip (z), bit-flip (x) and bit-phase-flip
/// (y) channels. `p` may exceed 1/2 — sweeps drive straight through the
/// texture collapse at p = 1/2.
pub fn pauli_channel(rho: &DensityOperator, axis: PauliAxis, p: f64) -> Result<DensityOperator> {
    check_unit("p", p)?;
    let sigma = LinearOperator::pauli_on(FactorLabel::PolB, axis).embed(rho.factors())?;
    let flipped = sigma.mat().mul(rho.mat())?.mul(sigma.mat())?;
    let mat = rho
        .mat()
        .scale(cx(1.0 - p, 0.0))
        .add(&flipped.scale(cx(p, 0.0)))?;
    DensityOperator::new(rho.factors(), mat)
}

/// (1 − λ₁)ρ + λ₁·I/4: imperfect preparation of the local two-qubit state.
/// Modeling the imperfection as isotropic mixing is forced: it is the only
/// single-parameter Pauli-symmetric choice whose fidelity after a flip
/// channel is √(1 − ¾λ₁ − (1 − λ₁)p), the relation the flip sweeps verify
/// (see the tests here and `fidelity_flip` in the correlations module).
pub fn local_imperfection(rho: &DensityOperator, lambda1: f64) -> Result<DensityOperator> {
    check_unit("lambda1", lambda1)?;
    isotropic_mix(rho, lambda1)
}

/// Semi-axes along (S_x, S_y, S_z) of the ellipsoid the unit Poincaré sphere
/// of photon B maps onto under the flip channel: the two components
/// orthogonal to the flip axis contract by |1 − 2p|, the on-axis component
/// survives — so the major axis names the flip axis.
pub fn poincare_ellipsoid(axis: PauliAxis, p: f64) -> Result<[f64; 3]> {
    check_unit("p", p)?;
    let k = (1.0 - 2.0 * p).abs();
    Ok(match axis {
        PauliAxis::X => [1.0, k, k],
        PauliAxis::Y => [k, 1.0, k],
        PauliAxis::Z => [k, k, 1.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::CMatrix;
    use crate::states::{link_state, nonlocal_skyrmion, SkyrmionSpec};
    use crate::tensor::{expectation, FactorLabel::*};
    use proptest::prelude::*;

    fn target() -> DensityOperator {
        nonlocal_skyrmion(&SkyrmionSpec::new(2).unwrap()).to_density()
    }

    fn correlator(rho: &DensityOperator, a: PauliAxis, b: PauliAxis) -> f64 {
        let op = LinearOperator::pauli_on(OamA, a)
            .tensor(&LinearOperator::pauli_on(PolB, b))
            .unwrap();
        expectation(rho, &op).unwrap().re
    }

    #[test]
    fn params_validation() {
        assert!(NoiseParams::new(0.0, 0.0, PauliAxis::Z, 0.0, 0.0).is_ok());
        assert!(NoiseParams::new(1.0, 1.0, PauliAxis::Y, 1.0, 7.5).is_ok());
        assert!(NoiseParams::new(-0.1, 0.0, PauliAxis::Z, 0.0, 0.0).is_err());
        assert!(NoiseParams::new(0.0, 1.2, PauliAxis::Z, 0.0, 0.0).is_err());
        assert!(NoiseParams::new(0.0, 0.0, PauliAxis::Z, f64::NAN, 0.0).is_err());
        assert!(NoiseParams::new(0.0, 0.0, PauliAxis::Z, 0.0, -1e-9).is_err());
    }

    #[test]
    fn isotropic_endpoints_and_werner_spectrum() {
        let rho = link_state().to_density();
        let same = isotropic_mix(&rho, 0.0).unwrap();
        assert!(same.distance(&rho).unwrap() < 1e-15);

        let mixed = isotropic_mix(&rho, 1.0).unwrap();
        let purity = mixed.mat().mul(mixed.mat()).unwrap().trace().re;
        assert!((purity - 0.25).abs() < 1e-12);

        let werner = isotropic_mix(&rho, 0.4).unwrap();
        let (eigs, _) = werner.mat().eig_hermitian().unwrap();
        let expected = [0.7, 0.1, 0.1, 0.1];
        for (e, x) in eigs.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "eigenvalues {eigs:?}");
        }
    }

    #[test]
    fn flip_channel_identity_at_zero() {
        let rho = target();
        let out = pauli_channel(&rho, PauliAxis::Y, 0.0).unwrap();
        assert!(out.distance(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn phase_flip_at_half_decoheres_to_classical_mixture() {
        let out = pauli_channel(&target(), PauliAxis::Z, 0.5).unwrap();
        let mut expected = CMatrix::zeros(4);
        expected[(0, 0)] = cx(0.5, 0.0);
        expected[(3, 3)] = cx(0.5, 0.0);
        assert!(out.mat().sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn flip_rescales_transverse_correlators_only() {
        // The target state has correlator triple (c₁, c₂, c₃) = (1, −1, 1);
        // a z-flip with probability p contracts the two transverse ones by
        // (1 − 2p) and leaves the longitudinal one alone.
        let rho = target();
        assert!((correlator(&rho, PauliAxis::X, PauliAxis::X) - 1.0).abs() < 1e-12);
        assert!((correlator(&rho, PauliAxis::Y, PauliAxis::Y) + 1.0).abs() < 1e-12);
        assert!((correlator(&rho, PauliAxis::Z, PauliAxis::Z) - 1.0).abs() < 1e-12);

        let out = pauli_channel(&rho, PauliAxis::Z, 0.3).unwrap();
        assert!((correlator(&out, PauliAxis::X, PauliAxis::X) - 0.4).abs() < 1e-12);
        assert!((correlator(&out, PauliAxis::Y, PauliAxis::Y) + 0.4).abs() < 1e-12);
        assert!((correlator(&out, PauliAxis::Z, PauliAxis::Z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_imperfection_endpoints() {
        let rho = target();
        assert!(
            local_imperfection(&rho, 0.0)
                .unwrap()
                .distance(&rho)
                .unwrap()
                < 1e-15
        );
        let fully = local_imperfection(&rho, 1.0).unwrap();
        let mixed = DensityOperator::maximally_mixed(rho.factors()).unwrap();
        assert!(fully.distance(&mixed).unwrap() < 1e-15);
    }

    #[test]
    fn imperfection_then_flip_fidelity_formula() {
        // ⟨ψ|ρ′|ψ⟩ = 1 − ¾λ₁ − (1 − λ₁)p for any flip axis, because the
        // target has zero expectation of every single Pauli on photon B.
        let psi = nonlocal_skyrmion(&SkyrmionSpec::new(2).unwrap());
        let proj = psi.projector();
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            for lambda1 in [0.0, 0.1, 0.35] {
                for p in [0.0, 0.25, 0.5] {
                    let rho = local_imperfection(&psi.to_density(), lambda1).unwrap();
                    let rho = pauli_channel(&rho, axis, p).unwrap();
                    let overlap = rho.expectation(&proj).unwrap().re;
                    let formula = 1.0 - 0.75 * lambda1 - (1.0 - lambda1) * p;
                    assert!(
                        (overlap - formula).abs() < 1e-12,
                        "axis {axis:?}, λ₁ = {lambda1}, p = {p}: {overlap} vs {formula}"
                    );
                }
            }
        }
    }

    #[test]
    fn ellipsoid_semi_axes() {
        assert_eq!(
            poincare_ellipsoid(PauliAxis::Z, 0.3).unwrap(),
            [0.4, 0.4, 1.0]
        );
        assert_eq!(
            poincare_ellipsoid(PauliAxis::Y, 0.3).unwrap(),
            [0.4, 1.0, 0.4]
        );
        assert_eq!(
            poincare_ellipsoid(PauliAxis::X, 0.25).unwrap(),
            [1.0, 0.5, 0.5]
        );
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            assert_eq!(poincare_ellipsoid(axis, 0.0).unwrap(), [1.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn ellipsoid_matches_bloch_vector_image() {
        // A single-qubit polarization state with Bloch vector b maps to
        // (k·b_x, k·b_y, b_z) under the z-flip, k = 1 − 2p: exactly the
        // advertised ellipsoid contraction.
        let b = [0.3, 0.5, -0.2];
        let mut mat = CMatrix::identity(2).scale(cx(0.5, 0.0));
        for (i, axis) in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z].iter().enumerate() {
            mat = mat
                .add(&crate::tensor::pauli_matrix(*axis).scale(cx(0.5 * b[i], 0.0)))
                .unwrap();
        }
        let rho = DensityOperator::new(&[PolB], mat).unwrap();
        let out = pauli_channel(&rho, PauliAxis::Z, 0.3).unwrap();
        let semi = poincare_ellipsoid(PauliAxis::Z, 0.3).unwrap();
        for (i, axis) in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z].iter().enumerate() {
            let component = out
                .expectation(&LinearOperator::pauli_on(PolB, *axis))
                .unwrap()
                .re;
            assert!(
                (component - semi[i] * b[i]).abs() < 1e-12,
                "component {i}: {component} vs {}",
                semi[i] * b[i]
            );
        }
    }

    prop_compose! {
        /// Random two-qubit state on (momentum_A, pol_B): a random pure state
        /// mixed with I/4 by a random weight.
        fn arb_state()(
            parts in proptest::collection::vec(-1.0f64..1.0, 16),
            weight in 0.0f64..1.0,
        ) -> DensityOperator {
            let mut amps: Vec<_> = (0..4).map(|k| cx(parts[2 * k], parts[2 * k + 1])).collect();
            amps[0] += cx(1.5, 0.0); // keep the norm safely away from zero
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let amps: Vec<_> = amps.iter().map(|a| a / norm).collect();
            let psi = crate::tensor::StateVector::new(&[MomentumA, PolB], &amps).unwrap();
            isotropic_mix(&psi.to_density(), weight).unwrap()
        }
    }

    proptest! {
        #[test]
        fn flip_semigroup_composition(rho in arb_state(), p in 0.0f64..1.0, q in 0.0f64..1.0) {
            // Two flips of the same axis compose to one flip with
            // probability p + q − 2pq (the net chance of an odd flip count).
            let twice = pauli_channel(&pauli_channel(&rho, PauliAxis::Z, p).unwrap(), PauliAxis::Z, q).unwrap();
            let once = pauli_channel(&rho, PauliAxis::Z, p + q - 2.0 * p * q).unwrap();
            prop_assert!(twice.distance(&once).unwrap() < 1e-12);
        }

        #[test]
        fn isotropic_commutes_with_flips(
            rho in arb_state(),
            xi0 in 0.0f64..1.0,
            p in 0.0f64..1.0,
        ) {
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                let a = isotropic_mix(&pauli_channel(&rho, axis, p).unwrap(), xi0).unwrap();
                let b = pauli_channel(&isotropic_mix(&rho, xi0).unwrap(), axis, p).unwrap();
                prop_assert!(a.distance(&b).unwrap() < 1e-12);
            }
        }
    }
}
