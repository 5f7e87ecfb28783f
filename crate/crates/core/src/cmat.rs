//! Dense complex matrices at the tiny fixed sizes this crate needs (2, 4, 16).
//!
//! Everything is row-major `Vec<Complex64>` with no panics on shape errors:
//! fallible constructors and solvers return [`crate::error::Error`]. Two
//! eigensolvers live here:
//!
//! * [`CMatrix::eig_hermitian`]: cyclic Jacobi with complex rotations. At n <= 16
//!   this converges in a handful of sweeps and keeps eigenvectors unitary to
//!   machine precision.
//! * [`CMatrix::eig_general_4x4`]: characteristic polynomial via the
//!   Faddeev-LeVerrier recursion, roots by Durand-Kerner iteration. Used for the
//!   non-Hermitian spin-flip product in the concurrence cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shorthand for building complex scalars.
#[inline]
pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square complex matrix, row-major storage.
#[derive(Clone, PartialEq, Debug)]
pub struct CMatrix {
    n: usize,
    a: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            a: vec![Complex64::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// |v><w| on an n-dimensional space; `v` and `w` must have equal length.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::DimensionMismatch(format!(
                "outer product of lengths {} and {}",
                v.len(),
                w.len()
            )));
        }
        let n = v.len();
        Ok(CMatrix::from_fn(n, |i, j| v[i] * w[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(rhs)?;
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(rhs.a.iter()) {
            *x += y;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(rhs)?;
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(rhs.a.iter()) {
            *x -= y;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(rhs)?;
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// v -> M v.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix dim {} applied to vector of length {}",
                self.n,
                v.len()
            )));
        }
        let mut out = vec![Complex64::ZERO; self.n];
        for i in 0..self.n {
            let mut acc = Complex64::ZERO;
            for j in 0..self.n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn conjugate_entries(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max_ij |A_ij - conj(A_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Kronecker product; the left factor indexes the slow (major) digits.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let n = self.n * rhs.n;
        let mut out = CMatrix::zeros(n);
        for i1 in 0..self.n {
            for j1 in 0..self.n {
                let v = self[(i1, j1)];
                if v == Complex64::ZERO {
                    continue;
                }
                for i2 in 0..rhs.n {
                    for j2 in 0..rhs.n {
                        out[(i1 * rhs.n + i2, j1 * rhs.n + j2)] = v * rhs[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    fn check_same_dim(&self, rhs: &CMatrix) -> Result<()> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix dims {} and {}",
                self.n, rhs.n
            )));
        }
        Ok(())
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues sorted descending and the unitary whose columns are
    /// the matching eigenvectors, so `A = V diag(w) V^dagger`. Rejects input
    /// whose Hermiticity deviation exceeds `1e-10 * (1 + ||A||_F)`.
    pub fn eig_hermitian(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.n;
        let scale = 1.0 + self.frobenius_norm();
        let dev = self.hermiticity_deviation();
        if dev > 1e-10 * scale {
            return Err(Error::NotHermitian(dev));
        }
        // Work on the exactly Hermitian average so rounding in callers cannot
        // leak complex diagonals into the rotations.
        let mut a = CMatrix::from_fn(n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        let mut v = CMatrix::identity(n);

        let off = |m: &CMatrix| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += m[(i, j)].norm_sqr();
                    }
                }
            }
            s.sqrt()
        };

        let tol = 1e-15 * scale;
        for _sweep in 0..100 {
            if off(&a) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let u = apq / mag;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let cu = u * c;
                    let su = u * s;
                    // Column update A <- A J with J supported on columns p, q.
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * cu - akq * s;
                        a[(k, q)] = akp * su + akq * c;
                    }
                    // Row update A <- J^dagger A.
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * cu.conj() - aqk * s;
                        a[(q, k)] = apk * su.conj() + aqk * c;
                    }
                    // Accumulate the eigenvector basis V <- V J.
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * cu - vkq * s;
                        v[(k, q)] = vkp * su + vkq * c;
                    }
                    // The rotation leaves rounding dust in the target entry.
                    a[(p, q)] = Complex64::ZERO;
                    a[(q, p)] = Complex64::ZERO;
                }
            }
        }
        if off(&a) > 1e-9 * scale {
            return Err(Error::NoConvergence(format!(
                "Jacobi off-diagonal norm {:.3e} after 100 sweeps",
                off(&a)
            )));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let w: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| w[j].partial_cmp(&w[i]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| w[i]).collect();
        let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Coefficients `[c1, c2, c3, c4]` of `det(xI - A) = x^4 + c1 x^3 + c2 x^2 + c3 x + c4`
    /// by the Faddeev-LeVerrier recursion. 4x4 only.
    pub fn charpoly_4x4(&self) -> Result<[Complex64; 4]> {
        if self.n != 4 {
            return Err(Error::DimensionMismatch(format!(
                "charpoly_4x4 on dim {}",
                self.n
            )));
        }
        let id = CMatrix::identity(4);
        let mut m = self.clone();
        let mut cs = [Complex64::ZERO; 4];
        cs[0] = -m.trace();
        for k in 1..4 {
            m = self.mul(&m.add(&id.scale(cs[k - 1]))?)?;
            cs[k] = -m.trace() / (k as f64 + 1.0);
        }
        Ok(cs)
    }

    /// All four eigenvalues of a general complex 4x4 matrix.
    ///
    /// Characteristic polynomial + simultaneous Durand-Kerner root iteration;
    /// roots come back sorted by descending real part (imaginary part breaks
    /// ties). Each returned value satisfies |p(x)| <= 1e-8 * scale^4 even at
    /// repeated roots, where the attainable accuracy degrades to roughly the
    /// m-th root of machine epsilon.
    pub fn eig_general_4x4(&self) -> Result<[Complex64; 4]> {
        let cs = self.charpoly_4x4()?;
        let poly = [Complex64::ONE, cs[0], cs[1], cs[2], cs[3]];
        let eval = |z: Complex64| -> Complex64 {
            poly.iter().fold(Complex64::ZERO, |acc, &c| acc * z + c)
        };
        let radius = 1.0 + cs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let seed = cx(0.4, 0.9);
        let mut z = [Complex64::ZERO; 4];
        let mut w = Complex64::ONE;
        for zi in z.iter_mut() {
            *zi = w * radius;
            w *= seed;
        }
        for _ in 0..1000 {
            let mut shift = 0.0f64;
            for i in 0..4 {
                let mut denom = Complex64::ONE;
                for j in 0..4 {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                if denom.norm() < 1e-280 {
                    // Coincident iterates: nudge apart and retry next pass.
                    z[i] += cx(1e-12 * radius, 1e-12 * radius);
                    continue;
                }
                let step = eval(z[i]) / denom;
                z[i] -= step;
                shift = shift.max(step.norm());
            }
            if shift <= 1e-15 * radius {
                break;
            }
        }
        z.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap()
                .then(b.im.partial_cmp(&a.im).unwrap())
        });
        Ok(z)
    }

    /// Hermitian PSD square root via the Jacobi eigensolver. Eigenvalues below
    /// `-1e-10 * (1 + ||A||_F)` are rejected; small negative dust is clamped.
    pub fn sqrt_psd(&self) -> Result<CMatrix> {
        let (w, v) = self.eig_hermitian()?;
        let floor = -1e-10 * (1.0 + self.frobenius_norm());
        if let Some(&bad) = w.iter().find(|&&x| x < floor) {
            return Err(Error::NotPositive(bad));
        }
        let sq: Vec<Complex64> = w.iter().map(|&x| cx(x.max(0.0).sqrt(), 0.0)).collect();
        let d = CMatrix::from_diag(&sq);
        v.mul(&d)?.mul(&v.adjoint())
    }

    /// Sum of |eigenvalue| of a Hermitian matrix (its trace norm).
    pub fn trace_norm_hermitian(&self) -> Result<f64> {
        let (w, _) = self.eig_hermitian()?;
        Ok(w.iter().map(|x| x.abs()).sum())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
    }

    #[test]
    fn identity_and_kron_shapes() {
        let i2 = CMatrix::identity(2);
        let k = i2.kron(&i2);
        assert_eq!(k.dim(), 4);
        assert_eq!(k, CMatrix::identity(4));
    }

    #[test]
    fn eig_hermitian_pauli_z() {
        let z = CMatrix::from_rows(&[
            vec![cx(1.0, 0.0), cx(0.0, 0.0)],
            vec![cx(0.0, 0.0), cx(-1.0, 0.0)],
        ])
        .unwrap();
        let (w, v) = z.eig_hermitian().unwrap();
        assert_close(w[0], 1.0, 1e-14, "top eigenvalue");
        assert_close(w[1], -1.0, 1e-14, "bottom eigenvalue");
        assert_close(v[(0, 0)].norm(), 1.0, 1e-14, "first eigenvector weight");
    }

    #[test]
    fn eig_hermitian_complex_offdiagonal() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0.
        let m = CMatrix::from_rows(&[
            vec![cx(1.0, 0.0), cx(0.0, 1.0)],
            vec![cx(0.0, -1.0), cx(1.0, 0.0)],
        ])
        .unwrap();
        let (w, v) = m.eig_hermitian().unwrap();
        assert_close(w[0], 2.0, 1e-14, "eig 0");
        assert_close(w[1], 0.0, 1e-14, "eig 1");
        // Reconstruction A = V diag(w) V^dagger.
        let d = CMatrix::from_diag(&[cx(w[0], 0.0), cx(w[1], 0.0)]);
        let rec = v.mul(&d).unwrap().mul(&v.adjoint()).unwrap();
        assert!(rec.sub(&m).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn eig_hermitian_reconstructs_fixed_4x4() {
        // Deterministic Hermitian test matrix with all-complex structure.
        let m = CMatrix::from_rows(&[
            vec![cx(0.9, 0.0), cx(0.2, 0.1), cx(-0.3, 0.4), cx(0.0, -0.2)],
            vec![cx(0.2, -0.1), cx(-0.5, 0.0), cx(0.1, 0.0), cx(0.3, 0.3)],
            vec![cx(-0.3, -0.4), cx(0.1, 0.0), cx(1.4, 0.0), cx(-0.2, 0.1)],
            vec![cx(0.0, 0.2), cx(0.3, -0.3), cx(-0.2, -0.1), cx(0.2, 0.0)],
        ])
        .unwrap();
        let (w, v) = m.eig_hermitian().unwrap();
        let sum: f64 = w.iter().sum();
        assert_close(sum, m.trace().re, 1e-12, "eigenvalue sum vs trace");
        assert!(w.windows(2).all(|p| p[0] >= p[1]), "descending order");
        let d = CMatrix::from_diag(&w.iter().map(|&x| cx(x, 0.0)).collect::<Vec<_>>());
        let rec = v.mul(&d).unwrap().mul(&v.adjoint()).unwrap();
        assert!(rec.sub(&m).unwrap().frobenius_norm() < 1e-12);
        let unit = v.adjoint().mul(&v).unwrap().sub(&CMatrix::identity(4)).unwrap();
        assert!(unit.frobenius_norm() < 1e-12, "eigenvectors unitary");
    }

    #[test]
    fn eig_hermitian_degenerate_quarter_identity() {
        let m = CMatrix::identity(4).scale(cx(0.25, 0.0));
        let (w, _) = m.eig_hermitian().unwrap();
        for x in w {
            assert_close(x, 0.25, 1e-15, "degenerate eigenvalue");
        }
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![cx(0.0, 0.0), cx(1.0, 0.0)],
            vec![cx(0.0, 0.0), cx(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(m.eig_hermitian(), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_general_diagonal() {
        let m = CMatrix::from_diag(&[cx(4.0, 0.0), cx(3.0, 0.0), cx(2.0, 0.0), cx(1.0, 0.0)]);
        let z = m.eig_general_4x4().unwrap();
        for (got, want) in z.iter().zip([4.0, 3.0, 2.0, 1.0]) {
            assert_close(got.re, want, 1e-10, "real part");
            assert_close(got.im, 0.0, 1e-10, "imag part");
        }
    }

    #[test]
    fn eig_general_cyclic_permutation_has_roots_of_unity() {
        // 4-cycle permutation matrix: eigenvalues are the 4th roots of unity.
        let mut m = CMatrix::zeros(4);
        m[(0, 3)] = Complex64::ONE;
        m[(1, 0)] = Complex64::ONE;
        m[(2, 1)] = Complex64::ONE;
        m[(3, 2)] = Complex64::ONE;
        let z = m.eig_general_4x4().unwrap();
        // Sorted by descending re then im: 1, i, -i, -1.
        let want = [cx(1.0, 0.0), cx(0.0, 1.0), cx(0.0, -1.0), cx(-1.0, 0.0)];
        for (got, want) in z.iter().zip(want) {
            assert!((got - want).norm() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn eig_general_satisfies_charpoly() {
        let m = CMatrix::from_rows(&[
            vec![cx(0.1, 0.7), cx(-0.2, 0.0), cx(0.5, -0.1), cx(0.0, 0.3)],
            vec![cx(0.9, 0.0), cx(0.4, -0.4), cx(0.0, 0.0), cx(-0.6, 0.1)],
            vec![cx(0.0, -0.3), cx(0.2, 0.2), cx(-0.7, 0.0), cx(0.1, 0.0)],
            vec![cx(0.3, 0.0), cx(0.0, -0.5), cx(0.8, 0.1), cx(0.2, 0.6)],
        ])
        .unwrap();
        let cs = m.charpoly_4x4().unwrap();
        let z = m.eig_general_4x4().unwrap();
        for root in z {
            let p = [Complex64::ONE, cs[0], cs[1], cs[2], cs[3]]
                .iter()
                .fold(Complex64::ZERO, |acc, &c| acc * root + c);
            assert!(p.norm() < 1e-8, "charpoly residual {:.3e}", p.norm());
        }
        // Root sum equals the trace.
        let sum: Complex64 = z.iter().sum();
        assert!((sum - m.trace()).norm() < 1e-9);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = CMatrix::from_rows(&[
            vec![cx(2.0, 0.0), cx(0.5, 0.5)],
            vec![cx(0.5, -0.5), cx(1.0, 0.0)],
        ])
        .unwrap();
        let r = m.sqrt_psd().unwrap();
        let sq = r.mul(&r).unwrap();
        assert!(sq.sub(&m).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn sqrt_psd_rejects_negative() {
        let m = CMatrix::from_diag(&[cx(1.0, 0.0), cx(-0.5, 0.0)]);
        assert!(matches!(m.sqrt_psd(), Err(Error::NotPositive(_))));
    }

    #[test]
    fn trace_norm_of_diagonal() {
        let m = CMatrix::from_diag(&[cx(0.5, 0.0), cx(-0.25, 0.0)]);
        assert_close(m.trace_norm_hermitian().unwrap(), 0.75, 1e-14, "trace norm");
    }
}
