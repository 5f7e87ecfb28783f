//! Transverse Stokes textures of two-rail photonic states and their
//! topological charge.
//!
//! A photon whose mode qubit rides on two orbital rails — a charge-0
//! fundamental mode and a charge-`l` vortex mode — paints a polarization
//! texture across the transverse plane: at each pixel the conditional
//! two-level state defines a Stokes vector `S(x, y)`. For the half-and-half
//! superposition the unit texture covers the whole Poincaré sphere: one pole
//! on the beam axis where the fundamental rail dominates, the other far out
//! where the vortex rail dominates, winding `l` times in azimuth on the way.
//! The covering number is the degree of the map `(x, y) → ŝ` and is computed
//! here by two independent estimators:
//!
//! * geodesic solid-angle accumulation over a triangulated pixel lattice,
//!   closed into a sphere by a fan of triangles from the boundary loop to
//!   the far-field pole (integer-exact once the texture is resolved; the
//!   fan's share is reported as the truncation estimate), and
//! * central-difference integration of the unit-vector Jacobian plus a
//!   spherical-cap line integral `∮ (1 − cos θ) dψ` around the boundary.
//!
//! Textures can lose their meaning: a fully mixed pixel has `S = 0` and no
//! direction, and a flip channel at exactly half strength collapses the
//! texture onto an axis so that neighbouring pixels land on antipodal
//! points of the sphere. Both situations are detected before either
//! estimator runs; degenerate textures report charge 0 with a flag rather
//! than an arbitrary integer.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{DensityOperator, FactorLabel};

/// Default relative polarization floor: a pixel whose Stokes magnitude is
/// below this fraction of its intensity counts as unpolarized.
pub const DEGENERACY_EPSILON: f64 = 1e-6;

/// Two unit vectors closer than this to exact antipodes make the map
/// between neighbouring samples ambiguous.
const ANTIPODAL_TOL: f64 = 1e-9;

/// Solid-angle triangles with both the numerator and the denominator of the
/// half-angle formula at this scale subtend ±2π ambiguously.
const EXCEPTIONAL_TOL: f64 = 1e-12;

/// First positive zero of the Bessel function J0; a Bessel texture closes
/// (reaches the far pole) where the fundamental rail first vanishes.
const BESSEL_J0_FIRST_ZERO: f64 = 2.404825557695773;

// ---------------------------------------------------------------------------
// small real three-vector helpers

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn scale(a: [f64; 3], c: f64) -> [f64; 3] {
    [a[0] * c, a[1] * c, a[2] * c]
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm3(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: [f64; 3]) -> Option<[f64; 3]> {
    let m = norm3(a);
    if m > 0.0 {
        Some(scale(a, 1.0 / m))
    } else {
        None
    }
}

fn wrap_angle(mut d: f64) -> f64 {
    while d > PI {
        d -= TAU;
    }
    while d < -PI {
        d += TAU;
    }
    d
}

// ---------------------------------------------------------------------------
// transverse modes

/// Radial profile family carried by one orbital rail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFamily {
    /// Laguerre–Gauss ring mode (zero radial index), unit-normalized.
    LaguerreGauss,
    /// Bessel beam `J_{|l|}(k_r r)`, normalized only up to amplitude.
    Bessel,
}

/// One transverse mode: family, orbital charge and a scale parameter (the
/// waist for Laguerre–Gauss, the radial wavevector for Bessel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    family: ModeFamily,
    l: i32,
    scale: f64,
}

impl ModeSpec {
    pub fn new(family: ModeFamily, l: i32, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::OutOfRange {
                name: "mode scale",
                value: scale,
                expected: "a positive finite waist or radial wavevector",
            });
        }
        if l.unsigned_abs() > 20 {
            return Err(Error::OutOfRange {
                name: "orbital charge",
                value: l as f64,
                expected: "|l| <= 20",
            });
        }
        Ok(Self { family, l, scale })
    }

    pub fn family(&self) -> ModeFamily {
        self.family
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Radius at which the texture built on this rail closes. A Bessel
    /// fundamental first vanishes at `j_{0,1}/k_r`; Laguerre–Gauss rails
    /// never vanish, so they impose no cap.
    fn closing_radius(&self) -> f64 {
        match self.family {
            ModeFamily::LaguerreGauss => f64::INFINITY,
            ModeFamily::Bessel => BESSEL_J0_FIRST_ZERO / self.scale,
        }
    }

    /// Complex field amplitude at a transverse point.
    pub fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        let r = x.hypot(y);
        let phi = y.atan2(x);
        let m = self.l.unsigned_abs();
        let radial = match self.family {
            ModeFamily::LaguerreGauss => {
                let w = self.scale;
                let t = r / w;
                // |u|^2 integrates to one: N^2 = 2^(m+1) / (pi w^2 m!)
                let fact: f64 = (1..=m as u64).product::<u64>() as f64;
                let n2 = f64::powi(2.0, m as i32 + 1) / (PI * w * w * fact);
                n2.sqrt() * t.powi(m as i32) * (-t * t).exp()
            }
            ModeFamily::Bessel => bessel_j(m, self.scale * r),
        };
        Complex64::from_polar(radial, self.l as f64 * phi)
    }
}

/// Free-function form of [`ModeSpec::amplitude`].
pub fn mode_amplitude(spec: &ModeSpec, x: f64, y: f64) -> Complex64 {
    spec.amplitude(x, y)
}

/// Bessel function of the first kind, integer order, by Miller's downward
/// recurrence with the even-order normalization J0 + 2 J2 + 2 J4 + … = 1.
fn bessel_j(n: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let start = (n as usize).max(x as usize) + 20;
    let mut above = 0.0_f64; // J_{k+1}
    let mut here = 1e-30_f64; // J_k
    let mut target = if n as usize == start { here } else { 0.0 };
    let mut even_sum = if start.is_multiple_of(2) { here } else { 0.0 };
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / x) * here - above;
        above = here;
        here = below;
        let order = k - 1;
        if order == n as usize {
            target = here;
        }
        if order % 2 == 0 {
            even_sum += here;
        }
        if here.abs() > 1e250 {
            above *= 1e-250;
            here *= 1e-250;
            target *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    // even_sum now holds J0 + J2 + J4 + …; the normalization is 2*even_sum - J0
    target / (2.0 * even_sum - here)
}

// ---------------------------------------------------------------------------
// pixel lattice

/// Square pixel lattice covering `[-extent, extent]^2` with `n × n` pixel
/// centres at `((i + 1/2) h - extent)` for `h = 2 extent / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGrid {
    n: usize,
    extent: f64,
}

impl TransverseGrid {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::OutOfRange {
                name: "grid size",
                value: n as f64,
                expected: "at least 16 pixels per side",
            });
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::OutOfRange {
                name: "grid extent",
                value: extent,
                expected: "a positive finite half-width",
            });
        }
        Ok(Self { n, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Centre coordinate of pixel `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing() - self.extent
    }

    /// Row-major flat index of pixel `(ix, iy)`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }
}

// ---------------------------------------------------------------------------
// Stokes fields

/// A sampled Stokes texture: per-pixel Stokes vector, per-pixel intensity,
/// and the disk radius over which the topological charge is integrated.
#[derive(Debug, Clone)]
pub struct StokesField {
    grid: TransverseGrid,
    s: Vec<[f64; 3]>,
    intensity: Vec<f64>,
    integration_radius: f64,
}

impl StokesField {
    /// Assemble a field from raw samples. Every pixel must satisfy the
    /// physicality bound `|S| <= intensity` (up to rounding slack).
    pub fn new(
        grid: TransverseGrid,
        s: Vec<[f64; 3]>,
        intensity: Vec<f64>,
        integration_radius: f64,
    ) -> Result<Self> {
        let want = grid.n() * grid.n();
        if s.len() != want || intensity.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "expected {want} pixels, got {} Stokes samples and {} intensities",
                s.len(),
                intensity.len()
            )));
        }
        if !(integration_radius.is_finite() && integration_radius > 0.0) {
            return Err(Error::OutOfRange {
                name: "integration radius",
                value: integration_radius,
                expected: "a positive finite radius",
            });
        }
        for (v, &i) in s.iter().zip(&intensity) {
            if !(v.iter().all(|c| c.is_finite()) && i.is_finite() && i >= 0.0) {
                return Err(Error::OutOfRange {
                    name: "stokes sample",
                    value: i,
                    expected: "finite Stokes components and nonnegative intensity",
                });
            }
            let m = norm3(*v);
            if m > i + 1e-12 {
                return Err(Error::OutOfRange {
                    name: "stokes magnitude",
                    value: m - i,
                    expected: "|S| <= intensity + 1e-12",
                });
            }
        }
        Ok(Self {
            grid,
            s,
            intensity,
            integration_radius,
        })
    }

    pub fn grid(&self) -> TransverseGrid {
        self.grid
    }

    pub fn stokes(&self) -> &[[f64; 3]] {
        &self.s
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensity
    }

    pub fn stokes_at(&self, ix: usize, iy: usize) -> [f64; 3] {
        self.s[self.grid.index(ix, iy)]
    }

    pub fn intensity_at(&self, ix: usize, iy: usize) -> f64 {
        self.intensity[self.grid.index(ix, iy)]
    }

    pub fn integration_radius(&self) -> f64 {
        self.integration_radius
    }
}

fn check_modes(modes: &[ModeSpec]) -> Result<()> {
    if modes.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "a two-rail texture needs exactly two modes (charge 0 and charge l), got {}",
            modes.len()
        )));
    }
    if modes[0].l() != 0 {
        return Err(Error::OutOfRange {
            name: "fundamental rail charge",
            value: modes[0].l() as f64,
            expected: "charge 0 on the first mode",
        });
    }
    if modes[1].l() == 0 {
        return Err(Error::OutOfRange {
            name: "vortex rail charge",
            value: 0.0,
            expected: "a nonzero charge on the second mode",
        });
    }
    Ok(())
}

/// Shared pixel loop: conditional 2x2 polarization-block matrix
/// `M_{ss'} = Σ_{jj'} u_j ρ[index(s,j), index(s',j')] conj(u_{j'})`
/// with `j` the orbital rail and `s` the surviving two-level system.
fn conditional_field<F>(
    rho: &DensityOperator,
    grid: TransverseGrid,
    modes: &[ModeSpec],
    index: F,
) -> Result<StokesField>
where
    F: Fn(usize, usize) -> usize + Sync,
{
    check_modes(modes)?;
    let n = grid.n();
    let mat = rho.mat();
    let entry = |s: usize, sp: usize, u: &[Complex64; 2]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..2 {
            for jp in 0..2 {
                acc += u[j] * mat[(index(s, j), index(sp, jp))] * u[jp].conj();
            }
        }
        acc
    };
    let data: Vec<([f64; 3], f64)> = (0..n * n)
        .into_par_iter()
        .map(|p| {
            let (ix, iy) = (p % n, p / n);
            let (x, y) = (grid.coord(ix), grid.coord(iy));
            let u = [modes[0].amplitude(x, y), modes[1].amplitude(x, y)];
            let m00 = entry(0, 0, &u);
            let m01 = entry(0, 1, &u);
            let m11 = entry(1, 1, &u);
            let s = [2.0 * m01.re, -2.0 * m01.im, (m00 - m11).re];
            (s, (m00 + m11).re.max(0.0))
        })
        .collect();
    let (s, intensity): (Vec<_>, Vec<_>) = data.into_iter().unzip();
    let radius = grid
        .extent()
        .min(modes[0].closing_radius())
        .min(modes[1].closing_radius());
    StokesField::new(grid, s, intensity, radius)
}

/// Spin texture of a single-photon state on `(SpinA, OamA)`: the Stokes
/// vector of the spin qubit conditioned on the transverse position, with
/// the first mode on the oam-0 rail and the second on the oam-l rail.
pub fn stokes_local(
    rho: &DensityOperator,
    grid: TransverseGrid,
    modes: &[ModeSpec],
) -> Result<StokesField> {
    if rho.factors() != [FactorLabel::SpinA, FactorLabel::OamA] {
        return Err(Error::FactorMismatch(format!(
            "spin texture needs factors (SpinA, OamA), got {:?}",
            rho.factors()
        )));
    }
    // joint index 2*spin + oam: spin is the slow digit
    conditional_field(rho, grid, modes, |s, j| 2 * s + j)
}

/// Polarization texture of a two-photon state on `(OamA, PolB)`: the Stokes
/// vector of the remote polarization conditioned on where photon A lands.
pub fn stokes_nonlocal(
    rho: &DensityOperator,
    grid: TransverseGrid,
    modes: &[ModeSpec],
) -> Result<StokesField> {
    if rho.factors() != [FactorLabel::OamA, FactorLabel::PolB] {
        return Err(Error::FactorMismatch(format!(
            "nonlocal texture needs factors (OamA, PolB), got {:?}",
            rho.factors()
        )));
    }
    // joint index 2*oam + pol: oam is the slow digit
    conditional_field(rho, grid, modes, |s, j| 2 * j + s)
}

// ---------------------------------------------------------------------------
// topological charge

/// Everything the charge estimators report about one texture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureAnalysis {
    /// Covering number of the unit Stokes map over the integration disk,
    /// including the sphere-closure fan. Zero when degenerate.
    pub nsk: f64,
    /// True when the unit texture is ill-defined (unpolarized pixel or
    /// antipodal neighbouring samples inside the disk).
    pub degenerate: bool,
    /// Share of the total contributed by the closure fan, `|fan| / 4π` —
    /// an estimate of how much of the sphere the finite disk missed.
    pub truncation: f64,
    /// Accumulated phase of `S_x + i S_y` around the boundary ring; a
    /// charge-`l` texture winds by `2π l`.
    pub boundary_winding: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
        return Err(Error::OutOfRange {
            name: "degeneracy epsilon",
            value: epsilon,
            expected: "[0, 1)",
        });
    }
    Ok(())
}

/// Pixels inside the integration disk, and how many there are.
fn disk_mask(field: &StokesField) -> (Vec<bool>, usize) {
    let grid = field.grid();
    let n = grid.n();
    let r2 = field.integration_radius() * field.integration_radius();
    let mut mask = vec![false; n * n];
    let mut count = 0;
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            if x * x + y * y <= r2 {
                mask[grid.index(ix, iy)] = true;
                count += 1;
            }
        }
    }
    (mask, count)
}

/// The texture-level degeneracy test shared by both estimators: a pixel
/// with no polarization direction, or two neighbouring unit vectors at
/// antipodes (the sphere path between samples is ambiguous).
fn degeneracy_reason(field: &StokesField, epsilon: f64, mask: &[bool]) -> Option<&'static str> {
    let n = field.grid().n();
    let mut mag = vec![0.0_f64; n * n];
    for p in 0..n * n {
        if !mask[p] {
            continue;
        }
        mag[p] = norm3(field.s[p]);
        if mag[p] <= epsilon * field.intensity[p] {
            return Some("unpolarized pixel inside the integration disk");
        }
    }
    for iy in 0..n {
        for ix in 0..n {
            let p = iy * n + ix;
            if !mask[p] {
                continue;
            }
            for q in [
                (ix + 1 < n).then(|| p + 1),
                (iy + 1 < n).then(|| p + n),
            ]
            .into_iter()
            .flatten()
            {
                if mask[q] && dot(field.s[p], field.s[q]) / (mag[p] * mag[q]) <= -1.0 + ANTIPODAL_TOL
                {
                    return Some("antipodal neighbouring samples inside the integration disk");
                }
            }
        }
    }
    None
}

/// Unit Stokes vectors on the disk (zeros elsewhere). Call only after the
/// degeneracy test has passed, so every disk magnitude is strictly positive.
fn unit_stokes(field: &StokesField, mask: &[bool]) -> Vec<[f64; 3]> {
    field
        .s
        .iter()
        .zip(mask)
        .map(|(&v, &inside)| {
            if inside {
                normalize(v).unwrap_or([0.0, 0.0, 1.0])
            } else {
                [0.0; 3]
            }
        })
        .collect()
}

/// Signed solid angle of the spherical triangle `(a, b, c)` via the
/// half-angle formula; `None` when the triangle is a ±2π-ambiguous
/// exceptional configuration.
fn triangle_solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Option<f64> {
    let num = dot(a, cross(b, c));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    if den <= EXCEPTIONAL_TOL && num.abs() <= EXCEPTIONAL_TOL {
        None
    } else {
        Some(2.0 * num.atan2(den))
    }
}

/// Insert a directed edge, cancelling against its reverse if present.
/// Edges shared by two triangles vanish; only the boundary loop survives.
fn add_edge(edges: &mut HashMap<(u32, u32), i32>, a: u32, b: u32) {
    use std::collections::hash_map::Entry;
    match edges.entry((b, a)) {
        Entry::Occupied(mut e) => {
            *e.get_mut() -= 1;
            if *e.get() == 0 {
                e.remove();
            }
        }
        Entry::Vacant(_) => {
            *edges.entry((a, b)).or_insert(0) += 1;
        }
    }
}

fn degenerate_analysis() -> TextureAnalysis {
    TextureAnalysis {
        nsk: 0.0,
        degenerate: true,
        truncation: 0.0,
        boundary_winding: 0.0,
    }
}

/// Geodesic solid-angle estimate of the covering number, with the boundary
/// loop fanned to the far-field pole so the triangulated surface is closed
/// and the accumulated area is an integer multiple of 4π up to rounding.
pub fn analyze_texture(field: &StokesField, epsilon: f64) -> Result<TextureAnalysis> {
    check_epsilon(epsilon)?;
    let grid = field.grid();
    let n = grid.n();
    let (mask, inside) = disk_mask(field);
    if inside < 4 {
        return Err(Error::OutOfRange {
            name: "integration disk",
            value: inside as f64,
            expected: "at least four pixels inside the integration radius",
        });
    }
    if degeneracy_reason(field, epsilon, &mask).is_some() {
        return Ok(degenerate_analysis());
    }
    let shat = unit_stokes(field, &mask);

    let mut interior = 0.0_f64;
    let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let p00 = grid.index(ix, iy);
            let p10 = p00 + 1;
            let p01 = p00 + n;
            let p11 = p01 + 1;
            if !(mask[p00] && mask[p10] && mask[p11] && mask[p01]) {
                continue;
            }
            // two counterclockwise triangles per plaquette, diagonal shared
            match (
                triangle_solid_angle(shat[p00], shat[p10], shat[p11]),
                triangle_solid_angle(shat[p00], shat[p11], shat[p01]),
            ) {
                (Some(o1), Some(o2)) => interior += o1 + o2,
                _ => return Ok(degenerate_analysis()),
            }
            for (a, b) in [
                (p00, p10),
                (p10, p11),
                (p11, p00),
                (p00, p11),
                (p11, p01),
                (p01, p00),
            ] {
                add_edge(&mut edges, a as u32, b as u32);
            }
        }
    }

    // deterministic order for the float sums below
    let mut boundary: Vec<(u32, u32)> = edges.into_keys().collect();
    boundary.sort_unstable();
    if boundary.is_empty() {
        return Err(Error::Singular(
            "texture has no boundary loop to close".into(),
        ));
    }

    let mut acc = [0.0; 3];
    for &(a, _) in &boundary {
        let v = shat[a as usize];
        acc = [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]];
    }
    let pole = normalize(acc).unwrap_or(shat[boundary[0].0 as usize]);

    let mut closure = 0.0_f64;
    for &(a, b) in &boundary {
        // fan triangle traverses b -> a, cancelling the boundary edge a -> b
        match triangle_solid_angle(shat[b as usize], shat[a as usize], pole) {
            Some(o) => closure += o,
            None => return Ok(degenerate_analysis()),
        }
    }

    Ok(TextureAnalysis {
        nsk: (interior + closure) / (4.0 * PI),
        degenerate: false,
        truncation: closure.abs() / (4.0 * PI),
        boundary_winding: boundary_winding(field, &boundary),
    })
}

/// Net phase of the transverse Stokes components around the boundary ring,
/// traversed by increasing spatial azimuth.
fn boundary_winding(field: &StokesField, boundary: &[(u32, u32)]) -> f64 {
    let grid = field.grid();
    let n = grid.n();
    let mut ring: Vec<(f64, f64)> = Vec::new();
    for &(a, _) in boundary {
        let p = a as usize;
        let s = field.s[p];
        if s[0].hypot(s[1]) <= 0.0 {
            continue;
        }
        let (x, y) = (grid.coord(p % n), grid.coord(p / n));
        ring.push((y.atan2(x), s[1].atan2(s[0])));
    }
    if ring.len() < 3 {
        return 0.0;
    }
    ring.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
    let mut w = 0.0;
    for i in 0..ring.len() {
        let a0 = ring[i].1;
        let a1 = ring[(i + 1) % ring.len()].1;
        w += wrap_angle(a1 - a0);
    }
    w
}

/// Covering number of the texture plus a degeneracy flag; degenerate
/// textures report charge 0.
pub fn skyrmion_number(field: &StokesField, epsilon: f64) -> Result<(f64, bool)> {
    let analysis = analyze_texture(field, epsilon)?;
    Ok((analysis.nsk, analysis.degenerate))
}

/// Independent estimator: central-difference Jacobian integral over the
/// eroded disk plus the spherical-cap line integral `∮ (1 − cos θ) dψ`
/// around the outermost ring, about the ring's mean direction. Degenerate
/// textures are rejected instead of flagged.
pub fn skyrmion_number_fd(field: &StokesField, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let (mask, inside) = disk_mask(field);
    if inside < 4 {
        return Err(Error::OutOfRange {
            name: "integration disk",
            value: inside as f64,
            expected: "at least four pixels inside the integration radius",
        });
    }
    if let Some(reason) = degeneracy_reason(field, epsilon, &mask) {
        return Err(Error::DegenerateTexture(reason));
    }
    let shat = unit_stokes(field, &mask);

    // pixels whose four neighbours stay inside the disk
    let mut core = vec![false; n * n];
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = grid.index(ix, iy);
            core[p] = mask[p] && mask[p - 1] && mask[p + 1] && mask[p - n] && mask[p + n];
        }
    }

    let mut interior = 0.0_f64;
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = grid.index(ix, iy);
            if !core[p] {
                continue;
            }
            let dx = scale(sub(shat[p + 1], shat[p - 1]), 1.0 / (2.0 * h));
            let dy = scale(sub(shat[p + n], shat[p - n]), 1.0 / (2.0 * h));
            interior += dot(shat[p], cross(dx, dy)) * h * h;
        }
    }

    // outermost core ring, ordered by spatial azimuth
    let mut ring: Vec<(f64, usize)> = Vec::new();
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = grid.index(ix, iy);
            if !core[p] {
                continue;
            }
            if !(core[p - 1] && core[p + 1] && core[p - n] && core[p + n]) {
                ring.push((grid.coord(iy).atan2(grid.coord(ix)), p));
            }
        }
    }
    if ring.len() < 8 {
        return Err(Error::OutOfRange {
            name: "integration disk",
            value: ring.len() as f64,
            expected: "a boundary ring of at least eight pixels",
        });
    }
    ring.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());

    let mut acc = [0.0; 3];
    for &(_, p) in &ring {
        let v = shat[p];
        acc = [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]];
    }
    let pole = normalize(acc).unwrap_or(shat[ring[0].1]);
    let seed = if pole[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let e1 = normalize(cross(seed, pole)).expect("frame seed not parallel to pole");
    let e2 = cross(pole, e1);

    let vals: Vec<(f64, f64)> = ring
        .iter()
        .map(|&(_, p)| {
            let s = shat[p];
            let psi = dot(s, e2).atan2(dot(s, e1));
            let c = dot(s, pole).clamp(-1.0, 1.0);
            (psi, 1.0 - c)
        })
        .collect();
    let mut cap = 0.0_f64;
    for i in 0..vals.len() {
        let (psi0, t0) = vals[i];
        let (psi1, t1) = vals[(i + 1) % vals.len()];
        cap += 0.5 * (t0 + t1) * wrap_angle(psi1 - psi0);
    }

    Ok((interior - cap) / (4.0 * PI))
}

// ---------------------------------------------------------------------------
// export

/// Render the field as CSV, row-major, nine significant digits:
/// `x,y,Sx,Sy,Sz,intensity`.
pub fn stokes_csv(field: &StokesField) -> String {
    let grid = field.grid();
    let n = grid.n();
    let mut out = String::with_capacity(n * n * 80 + 32);
    out.push_str("x,y,Sx,Sy,Sz,intensity\n");
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            let s = field.s[grid.index(ix, iy)];
            let i = field.intensity[grid.index(ix, iy)];
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
                x, y, s[0], s[1], s[2], i
            ));
        }
    }
    out
}

/// Write [`stokes_csv`] to a file.
pub fn write_stokes_csv(field: &StokesField, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, stokes_csv(field))?;
    Ok(())
}

// ---------------------------------------------------------------------------
