//! Labeled two-level tensor factors and the states/operators built on them.
//!
//! Every quantum object here carries an explicit list of factor labels instead
//! of a bare dimension, so a 4x4 matrix on (oam_A, pol_B) can never be applied
//! to (spin_A, momentum_A) by accident. The four factors and their basis
//! conventions:
//!
//! ```text
//! spin_A      0 = |L> (spin-up),  1 = |R>        sigma_z |L> = +|L>
//! momentum_A  0 = |k1>,           1 = |k2>
//! oam_A       0 = |0> (charge 0), 1 = |l>        abstract charge-l mode
//! pol_B       0 = |H>,            1 = |V>        sigma_z |H> = +|H>
//! ```
//!
//! Circular polarization is fixed as |L> = (|H> + i|V>)/sqrt(2), which makes
//! the circular basis the sigma_y eigenbasis of pol_B. Factor ordering is
//! canonical (spin_A, momentum_A, oam_A, pol_B) restricted to the factors
//! present; constructors accept any ordering and permute into canonical form.
//! Indices are big-endian over that list: the first factor is the slowest
//! digit.

use num_complex::Complex64;

use crate::cmat::{cx, CMatrix};
use crate::error::{Error, Result};

/// The four labeled two-level subsystems. Derived `Ord` is the canonical order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum FactorLabel {
    SpinA,
    MomentumA,
    OamA,
    PolB,
}

impl FactorLabel {
    pub const ALL: [FactorLabel; 4] = [
        FactorLabel::SpinA,
        FactorLabel::MomentumA,
        FactorLabel::OamA,
        FactorLabel::PolB,
    ];

    /// Every factor in this model is a qubit.
    #[inline]
    pub fn dim(self) -> usize {
        2
    }
}

/// Pauli axes; doubles as the flip-channel axis selector.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
}

/// 2x2 Pauli matrix in the conventions above.
pub fn pauli_matrix(axis: PauliAxis) -> CMatrix {
    let (a, b, c, d) = match axis {
        PauliAxis::X => (cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)),
        PauliAxis::Y => (cx(0.0, 0.0), cx(0.0, -1.0), cx(0.0, 1.0), cx(0.0, 0.0)),
        PauliAxis::Z => (cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)),
    };
    CMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap()
}

fn check_distinct(factors: &[FactorLabel]) -> Result<()> {
    for (i, f) in factors.iter().enumerate() {
        if factors[i + 1..].contains(f) {
            return Err(Error::DuplicateFactor(*f));
        }
    }
    Ok(())
}

fn canonical_order(factors: &[FactorLabel]) -> Vec<FactorLabel> {
    let mut sorted = factors.to_vec();
    sorted.sort();
    sorted
}

#[inline]
fn digit(index: usize, pos: usize, k: usize) -> usize {
    (index >> (k - 1 - pos)) & 1
}

/// Map an index in `from` factor order to the same assignment in `to` order.
/// Both lists must contain the same factors.
fn permuted_index(index: usize, from: &[FactorLabel], to: &[FactorLabel]) -> usize {
    let k = from.len();
    let mut out = 0usize;
    for (i, f) in to.iter().enumerate() {
        let p = from.iter().position(|g| g == f).expect("factor present");
        out |= digit(index, p, k) << (k - 1 - i);
    }
    out
}

fn permute_amps(factors: &[FactorLabel], amps: &[Complex64]) -> (Vec<FactorLabel>, Vec<Complex64>) {
    let sorted = canonical_order(factors);
    if sorted == factors {
        return (sorted, amps.to_vec());
    }
    let mut out = vec![Complex64::ZERO; amps.len()];
    for (s, &a) in amps.iter().enumerate() {
        out[permuted_index(s, factors, &sorted)] = a;
    }
    (sorted, out)
}

fn permute_matrix(factors: &[FactorLabel], mat: &CMatrix) -> (Vec<FactorLabel>, CMatrix) {
    let sorted = canonical_order(factors);
    if sorted == factors {
        return (sorted, mat.clone());
    }
    let n = mat.dim();
    let mut out = CMatrix::zeros(n);
    for r in 0..n {
        let pr = permuted_index(r, factors, &sorted);
        for c in 0..n {
            out[(pr, permuted_index(c, factors, &sorted))] = mat[(r, c)];
        }
    }
    (sorted, out)
}

/// Pure state over a set of labeled factors. Norm is held at 1 within 1e-12.
#[derive(Clone, Debug)]
pub struct StateVector {
    factors: Vec<FactorLabel>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(factors: &[FactorLabel], amps: &[Complex64]) -> Result<Self> {
        check_distinct(factors)?;
        let dim = 1usize << factors.len();
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {} factors (need {dim})",
                amps.len(),
                factors.len()
            )));
        }
        let (sorted, amps) = permute_amps(factors, amps);
        let state = StateVector {
            factors: sorted,
            amps,
        };
        let dev = (state.norm() - 1.0).abs();
        if dev > 1e-12 {
            return Err(Error::NotNormalized(dev));
        }
        Ok(state)
    }

    pub(crate) fn new_unchecked(factors: Vec<FactorLabel>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(canonical_order(&factors), factors);
        StateVector { factors, amps }
    }

    #[inline]
    pub fn factors(&self) -> &[FactorLabel] {
        &self.factors
    }

    #[inline]
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>; factor sets must match exactly.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.factors != other.factors {
            return Err(Error::FactorMismatch(format!(
                "{:?} vs {:?}",
                self.factors, other.factors
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Amplitude of one full basis assignment, e.g. `[(SpinA, 1), (OamA, 0)]`.
    pub fn amplitude(&self, assignment: &[(FactorLabel, usize)]) -> Result<Complex64> {
        let mut index = 0usize;
        let k = self.factors.len();
        if assignment.len() != k {
            return Err(Error::FactorMismatch(format!(
                "assignment covers {} of {} factors",
                assignment.len(),
                k
            )));
        }
        for &(f, b) in assignment {
            let pos = self
                .factors
                .iter()
                .position(|g| *g == f)
                .ok_or(Error::MissingFactor(f))?;
            if b > 1 {
                return Err(Error::OutOfRange {
                    name: "basis index",
                    value: b as f64,
                    expected: "{0, 1}",
                });
            }
            index |= b << (k - 1 - pos);
        }
        Ok(self.amps[index])
    }

    /// Tensor product with a state on disjoint factors; result is canonical.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        for f in &other.factors {
            if self.factors.contains(f) {
                return Err(Error::DuplicateFactor(*f));
            }
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        let (sorted, amps) = permute_amps(&factors, &amps);
        Ok(StateVector {
            factors: sorted,
            amps,
        })
    }

    /// |psi><psi| as an operator (not trace-checked; use for projectors).
    pub fn projector(&self) -> LinearOperator {
        LinearOperator {
            factors: self.factors.clone(),
            mat: CMatrix::outer(&self.amps, &self.amps).expect("same length"),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            factors: self.factors.clone(),
            mat: CMatrix::outer(&self.amps, &self.amps).expect("same length"),
        }
    }
}

/// Arbitrary linear operator over labeled factors (no physicality constraints).
#[derive(Clone, Debug)]
pub struct LinearOperator {
    factors: Vec<FactorLabel>,
    mat: CMatrix,
}

impl LinearOperator {
    pub fn new(factors: &[FactorLabel], mat: CMatrix) -> Result<Self> {
        check_distinct(factors)?;
        let dim = 1usize << factors.len();
        if mat.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} for {} factors (need {dim})",
                mat.dim(),
                factors.len()
            )));
        }
        let (sorted, mat) = permute_matrix(factors, &mat);
        Ok(LinearOperator {
            factors: sorted,
            mat,
        })
    }

    pub fn identity(factors: &[FactorLabel]) -> Result<Self> {
        check_distinct(factors)?;
        Ok(LinearOperator {
            factors: canonical_order(factors),
            mat: CMatrix::identity(1 << factors.len()),
        })
    }

    /// Single Pauli acting on one factor.
    pub fn pauli_on(factor: FactorLabel, axis: PauliAxis) -> Self {
        LinearOperator {
            factors: vec![factor],
            mat: pauli_matrix(axis),
        }
    }

    #[inline]
    pub fn factors(&self) -> &[FactorLabel] {
        &self.factors
    }

    #[inline]
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn adjoint(&self) -> LinearOperator {
        LinearOperator {
            factors: self.factors.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &LinearOperator) -> Result<LinearOperator> {
        if self.factors != rhs.factors {
            return Err(Error::FactorMismatch(format!(
                "{:?} vs {:?}",
                self.factors, rhs.factors
            )));
        }
        Ok(LinearOperator {
            factors: self.factors.clone(),
            mat: self.mat.mul(&rhs.mat)?,
        })
    }

    /// Tensor product on disjoint factor sets; result canonical.
    pub fn tensor(&self, other: &LinearOperator) -> Result<LinearOperator> {
        for f in &other.factors {
            if self.factors.contains(f) {
                return Err(Error::DuplicateFactor(*f));
            }
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let big = self.mat.kron(&other.mat);
        let (sorted, mat) = permute_matrix(&factors, &big);
        Ok(LinearOperator {
            factors: sorted,
            mat,
        })
    }

    /// Pad with identities so the operator acts on `target` (a superset of the
    /// current factors), keeping canonical digit placement.
    pub fn embed(&self, target: &[FactorLabel]) -> Result<LinearOperator> {
        check_distinct(target)?;
        let target = canonical_order(target);
        for f in &self.factors {
            if !target.contains(f) {
                return Err(Error::MissingFactor(*f));
            }
        }
        if target == self.factors {
            return Ok(self.clone());
        }
        let k = target.len();
        let n = 1usize << k;
        // Position of each target factor inside this operator (None = identity).
        let pos: Vec<Option<usize>> = target
            .iter()
            .map(|f| self.factors.iter().position(|g| g == f))
            .collect();
        let ks = self.factors.len();
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut sr = 0usize;
                let mut sc = 0usize;
                let mut delta = true;
                for (i, p) in pos.iter().enumerate() {
                    let dr = digit(r, i, k);
                    let dc = digit(c, i, k);
                    match p {
                        Some(p) => {
                            sr |= dr << (ks - 1 - p);
                            sc |= dc << (ks - 1 - p);
                        }
                        None => {
                            if dr != dc {
                                delta = false;
                                break;
                            }
                        }
                    }
                }
                if delta {
                    out[(r, c)] = self.mat[(sr, sc)];
                }
            }
        }
        Ok(LinearOperator {
            factors: target,
            mat: out,
        })
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.mat.dim();
        match self.mat.adjoint().mul(&self.mat) {
            Ok(p) => p
                .sub(&CMatrix::identity(n))
                .map(|d| d.frobenius_norm() <= tol)
                .unwrap_or(false),
            Err(_) => false,
        }
    }

    /// Apply to a state whose factor set contains this operator's factors
    /// (identity on the rest). The image is returned as-is: applying a
    /// non-unitary map yields an unnormalized vector, which is intentional
    /// for projection amplitudes.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let embedded = self.embed(state.factors())?;
        let amps = embedded.mat.mul_vec(state.amps())?;
        Ok(StateVector::new_unchecked(state.factors().to_vec(), amps))
    }
}

/// Density operator: Hermitian within 1e-12, unit trace within 1e-12, and no
/// eigenvalue below -1e-10 (all scale-aware on construction).
#[derive(Clone, Debug)]
pub struct DensityOperator {
    factors: Vec<FactorLabel>,
    mat: CMatrix,
}

impl DensityOperator {
    pub fn new(factors: &[FactorLabel], mat: CMatrix) -> Result<Self> {
        check_distinct(factors)?;
        let dim = 1usize << factors.len();
        if mat.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "density dim {} for {} factors (need {dim})",
                mat.dim(),
                factors.len()
            )));
        }
        let (sorted, mat) = permute_matrix(factors, &mat);
        let scale = 1.0 + mat.frobenius_norm();
        let dev = mat.hermiticity_deviation();
        if dev > 1e-12 * scale {
            return Err(Error::NotHermitian(dev));
        }
        let tdev = (mat.trace().re - 1.0).abs().max(mat.trace().im.abs());
        if tdev > 1e-12 {
            return Err(Error::TraceNotOne(tdev));
        }
        let (w, _) = mat.eig_hermitian()?;
        if let Some(&bad) = w.iter().find(|&&x| x < -1e-10) {
            return Err(Error::NotPositive(bad));
        }
        Ok(DensityOperator {
            factors: sorted,
            mat,
        })
    }

    pub fn maximally_mixed(factors: &[FactorLabel]) -> Result<Self> {
        check_distinct(factors)?;
        let n = 1usize << factors.len();
        Ok(DensityOperator {
            factors: canonical_order(factors),
            mat: CMatrix::identity(n).scale(cx(1.0 / n as f64, 0.0)),
        })
    }

    #[inline]
    pub fn factors(&self) -> &[FactorLabel] {
        &self.factors
    }

    #[inline]
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        for f in &other.factors {
            if self.factors.contains(f) {
                return Err(Error::DuplicateFactor(*f));
            }
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let big = self.mat.kron(&other.mat);
        let (sorted, mat) = permute_matrix(&factors, &big);
        Ok(DensityOperator {
            factors: sorted,
            mat,
        })
    }

    /// Trace out every factor not in `keep`; `keep` must be a non-empty subset.
    pub fn partial_trace(&self, keep: &[FactorLabel]) -> Result<DensityOperator> {
        check_distinct(keep)?;
        if keep.is_empty() {
            return Err(Error::FactorMismatch("keep set is empty".into()));
        }
        for f in keep {
            if !self.factors.contains(f) {
                return Err(Error::MissingFactor(*f));
            }
        }
        let keep = canonical_order(keep);
        if keep == self.factors {
            return Ok(self.clone());
        }
        let k = self.factors.len();
        let kept_pos: Vec<usize> = keep
            .iter()
            .map(|f| self.factors.iter().position(|g| g == f).unwrap())
            .collect();
        let traced_pos: Vec<usize> = (0..k).filter(|p| !kept_pos.contains(p)).collect();
        let nk = 1usize << keep.len();
        let nt = 1usize << traced_pos.len();
        let mut out = CMatrix::zeros(nk);
        for a in 0..nk {
            for b in 0..nk {
                let mut acc = Complex64::ZERO;
                for t in 0..nt {
                    let mut row = 0usize;
                    let mut col = 0usize;
                    for (i, &p) in kept_pos.iter().enumerate() {
                        row |= digit(a, i, keep.len()) << (k - 1 - p);
                        col |= digit(b, i, keep.len()) << (k - 1 - p);
                    }
                    for (i, &p) in traced_pos.iter().enumerate() {
                        let d = digit(t, i, traced_pos.len()) << (k - 1 - p);
                        row |= d;
                        col |= d;
                    }
                    acc += self.mat[(row, col)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityOperator { factors: keep, mat: out })
    }

    /// Tr[rho O] with O implicitly padded by identities onto rho's factors.
    pub fn expectation(&self, op: &LinearOperator) -> Result<Complex64> {
        let padded = op.embed(&self.factors)?;
        let prod = self.mat.mul(padded.mat())?;
        Ok(prod.trace())
    }

    /// U rho U^dagger for a unitary on a subset of factors; validated output.
    pub fn conjugate_unitary(&self, u: &LinearOperator) -> Result<DensityOperator> {
        let padded = u.embed(&self.factors)?;
        if !padded.is_unitary(1e-10) {
            return Err(Error::Parse("conjugate_unitary needs a unitary".into()));
        }
        let m = padded.mat().mul(&self.mat)?.mul(&padded.mat().adjoint())?;
        Ok(DensityOperator {
            factors: self.factors.clone(),
            mat: m,
        })
    }

    /// Frobenius distance, usable as a quick equality check in tests.
    pub fn distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.factors != other.factors {
            return Err(Error::FactorMismatch(format!(
                "{:?} vs {:?}",
                self.factors, other.factors
            )));
        }
        Ok(self.mat.sub(&other.mat)?.frobenius_norm())
    }
}

/// Free-function forms of the core operations.
pub fn tensor_product_states(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    a.tensor(b)
}

pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    a.tensor(b)
}

pub fn partial_trace(rho: &DensityOperator, keep: &[FactorLabel]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

pub fn expectation(rho: &DensityOperator, op: &LinearOperator) -> Result<Complex64> {
    rho.expectation(op)
}

/// Eigendecomposition of a Hermitian labeled operator (descending values).
pub fn eig_hermitian(op: &LinearOperator) -> Result<(Vec<f64>, CMatrix)> {
    op.mat().eig_hermitian()
}

/// Eigenvalues of a general (possibly non-Hermitian) 4x4 labeled operator.
pub fn eig_general_4x4(op: &LinearOperator) -> Result<[Complex64; 4]> {
    op.mat().eig_general_4x4()
}

#[cfg(test)]
mod tests {
    use super::*;
    use FactorLabel::*;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn constructor_permutes_to_canonical_order() {
        // |oam=0, spin=R> given in (oam, spin) order is index 1; canonically
        // (spin, oam) it must land at index 2.
        let amps = [cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        let s = StateVector::new(&[OamA, SpinA], &amps).unwrap();
        assert_eq!(s.factors(), &[SpinA, OamA]);
        assert_eq!(s.amps()[2], cx(1.0, 0.0));
        assert_eq!(s.amplitude(&[(SpinA, 1), (OamA, 0)]).unwrap(), cx(1.0, 0.0));
    }

    #[test]
    fn duplicate_factors_rejected() {
        let amps = [cx(1.0, 0.0); 4];
        assert!(matches!(
            StateVector::new(&[SpinA, SpinA], &amps),
            Err(Error::DuplicateFactor(SpinA))
        ));
    }

    #[test]
    fn non_normalized_rejected() {
        let amps = [cx(1.0, 0.0), cx(1.0, 0.0)];
        assert!(matches!(
            StateVector::new(&[PolB], &amps),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn tensor_product_of_basis_states() {
        let spin = StateVector::new(&[SpinA], &[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let mom = StateVector::new(&[MomentumA], &[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        let both = mom.tensor(&spin).unwrap();
        assert_eq!(both.factors(), &[SpinA, MomentumA]);
        // |L, k2> = index 0b01.
        assert_eq!(both.amps()[1], cx(1.0, 0.0));
        assert!(matches!(
            both.tensor(&spin),
            Err(Error::DuplicateFactor(SpinA))
        ));
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let bell = StateVector::new(
            &[MomentumA, PolB],
            &[cx(R, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(R, 0.0)],
        )
        .unwrap()
        .to_density();
        for keep in [[MomentumA], [PolB]] {
            let m = bell.partial_trace(&keep).unwrap();
            let expect = DensityOperator::maximally_mixed(&keep).unwrap();
            assert!(m.distance(&expect).unwrap() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = StateVector::new(&[SpinA], &[cx(0.6, 0.0), cx(0.0, 0.8)]).unwrap();
        let b = StateVector::new(&[PolB], &[cx(R, 0.0), cx(-R, 0.0)]).unwrap();
        let rho = a.to_density().tensor(&b.to_density()).unwrap();
        let back = rho.partial_trace(&[SpinA]).unwrap();
        assert!(back.distance(&a.to_density()).unwrap() < 1e-14);
    }

    #[test]
    fn expectation_of_pauli_z_on_h() {
        let h = StateVector::new(&[PolB], &[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let z = LinearOperator::pauli_on(PolB, PauliAxis::Z);
        let e = h.to_density().expectation(&z).unwrap();
        assert!((e - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn circular_left_is_sigma_y_plus_eigenstate() {
        // |L> = (|H> + i|V>)/sqrt(2) fixed by convention.
        let l = StateVector::new(&[PolB], &[cx(R, 0.0), cx(0.0, R)]).unwrap();
        let y = LinearOperator::pauli_on(PolB, PauliAxis::Y);
        let e = l.to_density().expectation(&y).unwrap();
        assert!((e - cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn embed_skips_middle_factor() {
        // sigma_x (x) sigma_x on (spin, oam) inside (spin, momentum, oam) must
        // couple |L,k2,l> -> |R,k2,0>, i.e. entry (0b110, 0b011).
        let xx = LinearOperator::pauli_on(SpinA, PauliAxis::X)
            .tensor(&LinearOperator::pauli_on(OamA, PauliAxis::X))
            .unwrap();
        let full = xx.embed(&[SpinA, MomentumA, OamA]).unwrap();
        assert_eq!(full.mat()[(0b110, 0b011)], cx(1.0, 0.0));
        assert_eq!(full.mat()[(0b010, 0b011)], cx(0.0, 0.0));
        // Identity on the middle digit: mismatched momentum entries vanish.
        assert_eq!(full.mat()[(0b100, 0b011)], cx(0.0, 0.0));
    }

    #[test]
    fn embedded_expectation_factorizes_on_products() {
        let plus = StateVector::new(&[SpinA], &[cx(R, 0.0), cx(R, 0.0)]).unwrap();
        let k1 = StateVector::new(&[MomentumA], &[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let rho = plus.to_density().tensor(&k1.to_density()).unwrap();
        let x = LinearOperator::pauli_on(SpinA, PauliAxis::X);
        let e = rho.expectation(&x).unwrap();
        assert!((e - cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn werner_mixture_spectrum_is_frozen_oracle() {
        // (1 - xi)|B><B| + xi I/4 at xi = 0.4 has eigenvalues {0.7, 0.1, 0.1, 0.1}.
        let bell = StateVector::new(
            &[OamA, PolB],
            &[cx(R, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(R, 0.0)],
        )
        .unwrap()
        .to_density();
        let mixed = bell
            .mat()
            .scale(cx(0.6, 0.0))
            .add(&CMatrix::identity(4).scale(cx(0.1, 0.0)))
            .unwrap();
        let rho = DensityOperator::new(&[OamA, PolB], mixed).unwrap();
        let (w, _) = rho.mat().eig_hermitian().unwrap();
        let want = [0.7, 0.1, 0.1, 0.1];
        for (got, want) in w.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn density_constructor_rejects_unphysical() {
        // Trace 1 but indefinite.
        let m = CMatrix::from_diag(&[cx(1.5, 0.0), cx(-0.5, 0.0)]);
        assert!(matches!(
            DensityOperator::new(&[PolB], m),
            Err(Error::NotPositive(_))
        ));
        let m = CMatrix::from_diag(&[cx(0.7, 0.0), cx(0.7, 0.0)]);
        assert!(matches!(
            DensityOperator::new(&[PolB], m),
            Err(Error::TraceNotOne(_))
        ));
    }

    #[test]
    fn conjugate_unitary_requires_unitary() {
        let rho = DensityOperator::maximally_mixed(&[PolB]).unwrap();
        let not_u = LinearOperator::new(
            &[PolB],
            CMatrix::from_diag(&[cx(2.0, 0.0), cx(1.0, 0.0)]),
        )
        .unwrap();
        assert!(rho.conjugate_unitary(&not_u).is_err());
        let x = LinearOperator::pauli_on(PolB, PauliAxis::X);
        let back = rho.conjugate_unitary(&x).unwrap();
        assert!(back.distance(&rho).unwrap() < 1e-14);
    }
}
