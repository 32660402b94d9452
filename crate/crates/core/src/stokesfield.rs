//! Position-conditioned polarization of photon B and its Stokes field.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lgmodes::{lg_radial_reduced, Grid2D};
use crate::linalg::{c, Mat2};
use crate::state::{DensityMatrix, HybridStateSpec};
use crate::C64;

/// Sampled Stokes parameters on a [`Grid2D`], row-major with x fastest.
///
/// Values may be stored relative to the common Gaussian envelope
/// exp(−2r²/w0²) (see `envelope_w0`); far from the axis the true values
/// underflow long before the polarization stops being well defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesField {
    pub grid: Grid2D,
    pub s0: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub s3: Vec<f64>,
    pub valid: Vec<bool>,
    pub normalized: bool,
    /// Values were taken after the quarter-wave-plate frame rotation.
    pub qwp: bool,
    pub envelope_w0: Option<f64>,
    pub spec: Option<HybridStateSpec>,
}

/// Relative threshold below which the Stokes vector has no direction.
pub const DIRECTION_EPS: f64 = 1e-12;

/// Euclidean length without under- or overflow for tiny true intensities.
pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    v[0].hypot(v[1]).hypot(v[2])
}

pub(crate) fn is_valid_sample(s0: f64, s: [f64; 3]) -> bool {
    let n = norm3(s);
    s0.is_normal() && s0 > 0.0 && n.is_finite() && n > DIRECTION_EPS * s0
}

impl StokesField {
    /// Builds a field from raw samples; validity is derived from the values
    /// and intersected with `valid` when given.
    pub fn from_samples(
        grid: Grid2D,
        s: [Vec<f64>; 4],
        valid: Option<Vec<bool>>,
        normalized: bool,
        qwp: bool,
        envelope_w0: Option<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if s.iter().any(|v| v.len() != n) || valid.as_ref().is_some_and(|v| v.len() != n) {
            return invalid(format!("field arrays must have {n} samples"));
        }
        if s[0].iter().any(|&v| v.is_nan() || v < 0.0) {
            return invalid("s0 must be non-negative and finite");
        }
        let [s0, s1, s2, s3] = s;
        let computed = (0..n).map(|i| is_valid_sample(s0[i], [s1[i], s2[i], s3[i]]));
        let valid = match valid {
            Some(v) => computed.zip(v).map(|(a, b)| a && b).collect(),
            None => computed.collect(),
        };
        Ok(StokesField { grid, s0, s1, s2, s3, valid, normalized, qwp, envelope_w0, spec: None })
    }

    pub fn n(&self) -> usize {
        self.grid.samples_per_axis
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n() + ix
    }

    pub fn position(&self, i: usize) -> (f64, f64) {
        (self.grid.coord(i % self.n()), self.grid.coord(i / self.n()))
    }

    /// Multiplier that turns stored values into true ones at sample `i`.
    pub fn envelope(&self, i: usize) -> f64 {
        match self.envelope_w0 {
            Some(w0) => {
                let (x, y) = self.position(i);
                (-2.0 * (x * x + y * y) / (w0 * w0)).exp()
            }
            None => 1.0,
        }
    }

    /// True (s0, s1, s2, s3) at sample `i`; the direction stays a unit
    /// vector on normalized fields.
    pub fn sample(&self, i: usize) -> [f64; 4] {
        let e = self.envelope(i);
        let d = if self.normalized { 1.0 } else { e };
        [self.s0[i] * e, self.s1[i] * d, self.s2[i] * d, self.s3[i] * d]
    }

    /// Stored (s1, s2, s3); a unit vector on valid points of a normalized field.
    pub fn vector(&self, i: usize) -> [f64; 3] {
        [self.s1[i], self.s2[i], self.s3[i]]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// ∫ s0 d²r by the rectangle rule.
    pub fn total_intensity(&self) -> f64 {
        let h = self.grid.spacing();
        (0..self.s0.len()).map(|i| self.sample(i)[0]).sum::<f64>() * h * h
    }
}

/// Quarter-wave-plate rotation R = (1/√2)[[1, i],[i, 1]].
pub fn qwp_matrix() -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0))
}

fn stokes_of(m: &Mat2) -> [f64; 4] {
    let hv = m[(0, 1)];
    [
        m[(0, 0)].re + m[(1, 1)].re,
        m[(0, 0)].re - m[(1, 1)].re,
        2.0 * hv.re,
        -2.0 * hv.im,
    ]
}

fn pauli_for_stokes(k: usize) -> Mat2 {
    // s1 ↔ σz, s2 ↔ σx, s3 ↔ σy
    crate::linalg::pauli([3, 1, 2][k])
}

/// Rotation taking preparation-frame Stokes axes to the field's frame.
/// Column k is the image of axis s_{k+1}.
pub fn frame_rotation(qwp: bool) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        let ax = pauli_for_stokes(k) * c(0.5, 0.0) + Mat2::identity() * c(0.5, 0.0);
        let img = if qwp { qwp_matrix() * ax * qwp_matrix().adjoint() } else { ax };
        let s = stokes_of(&img);
        for (j, row) in out.iter_mut().enumerate() {
            row[k] = s[j + 1];
        }
    }
    out
}

fn mode_values(spec: &HybridStateSpec, x: f64, y: f64) -> [C64; 2] {
    let r = x.hypot(y);
    let phi = y.atan2(x);
    [spec.ell1, spec.ell2].map(|l| C64::from_polar(lg_radial_reduced(l, r, spec.w0), l as f64 * phi))
}

fn contract(rho: &DensityMatrix, lg: &[C64; 2]) -> Mat2 {
    let m = rho.matrix();
    Matrix2::from_fn(|s, t| {
        let mut acc = c(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += lg[a] * lg[b].conj() * m[(2 * a + s, 2 * b + t)];
            }
        }
        acc
    })
}

/// ρ_B(r) = Σ LG_p LG_q* ρ_{ps,qt} |s⟩⟨t|, unnormalized.
pub fn conditional_polarization_state(rho: &DensityMatrix, spec: &HybridStateSpec, x: f64, y: f64) -> Mat2 {
    let env = (-2.0 * (x * x + y * y) / (spec.w0 * spec.w0)).exp();
    contract(rho, &mode_values(spec, x, y)) * c(env, 0.0)
}

/// Stokes parameters of ρ_B over the grid; stored relative to the envelope.
pub fn stokes_field(rho: &DensityMatrix, spec: &HybridStateSpec, grid: &Grid2D, qwp_rotate: bool) -> Result<StokesField> {
    if grid.samples_per_axis < Grid2D::MIN_SAMPLES {
        return invalid(format!("grid too coarse: {} samples per axis", grid.samples_per_axis));
    }
    spec.validate()?;
    let n = grid.samples_per_axis;
    let r = qwp_matrix();
    let rows: Vec<Vec<[f64; 4]>> = (0..n)
        .into_par_iter()
        .map(|iy| {
            let y = grid.coord(iy);
            (0..n)
                .map(|ix| {
                    let m = contract(rho, &mode_values(spec, grid.coord(ix), y));
                    let m = if qwp_rotate { r * m * r.adjoint() } else { m };
                    let mut s = stokes_of(&m);
                    s[0] = s[0].max(0.0);
                    s
                })
                .collect()
        })
        .collect();
    let flat: Vec<[f64; 4]> = rows.into_iter().flatten().collect();
    let arrays = [0, 1, 2, 3].map(|k| flat.iter().map(|s| s[k]).collect::<Vec<f64>>());
    let mut field = StokesField::from_samples(*grid, arrays, None, false, qwp_rotate, Some(spec.w0))?;
    field.spec = Some(*spec);
    Ok(field)
}

/// Divides (s1, s2, s3) by their length at valid points; invalid points keep
/// their values but stay excluded.
pub fn normalize_local(field: &StokesField) -> StokesField {
    let mut out = field.clone();
    for i in 0..out.s0.len() {
        if !out.valid[i] {
            continue;
        }
        let v = out.vector(i);
        let n = norm3(v);
        out.s1[i] = v[0] / n;
        out.s2[i] = v[1] / n;
        out.s3[i] = v[2] / n;
    }
    out.normalized = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lgmodes::lg_amplitude;
    use crate::state::{build_pure_state, depolarize};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn spec(l1: i32, l2: i32, a: f64, g: f64) -> HybridStateSpec {
        HybridStateSpec::new(l1, l2, a, g, 1.0).unwrap()
    }

    #[test]
    fn origin_is_vertical_for_bell() {
        let s = spec(1, 0, FRAC_1_SQRT_2, 0.0);
        let rho = build_pure_state(&s);
        let m = conditional_polarization_state(&rho, &s, 0.0, 0.0);
        assert!(m[(0, 0)].norm() < 1e-15 && m[(0, 1)].norm() < 1e-15);
        assert!(m[(1, 1)].re > 0.0);
        let g = Grid2D::new(2.0, 33).unwrap();
        let f = stokes_field(&rho, &s, &g, false).unwrap();
        let o = f.index(16, 16);
        assert_relative_eq!(f.s1[o] / f.s0[o], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn far_field_is_horizontal() {
        let s = spec(1, 0, FRAC_1_SQRT_2, 0.0);
        let rho = build_pure_state(&s);
        let m = conditional_polarization_state(&rho, &s, 6.0, 0.0);
        let ratio = crate::lgmodes::amplitude_ratio(1, 0, 6.0, 1.0).unwrap();
        assert_relative_eq!(m[(1, 1)].re / m[(0, 0)].re, ratio * ratio, epsilon = 1e-12);
        assert!(m[(0, 0)].re > 50.0 * m[(1, 1)].re);
    }

    #[test]
    fn product_state_is_horizontal() {
        let s = spec(2, -1, 1.0, 0.0);
        let f = stokes_field(&build_pure_state(&s), &s, &Grid2D::new(4.0, 33).unwrap(), false).unwrap();
        for i in 0..f.s0.len() {
            if f.valid[i] {
                assert_relative_eq!(f.s1[i] / f.s0[i], 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn matches_direct_contraction() {
        // ρ_B from the pure conditional state ψ_B = α LG1 |H⟩ + β e^{iγ} LG2 |V⟩
        let s = spec(2, -1, 0.8, 0.7);
        let rho = build_pure_state(&s);
        for (x, y) in [(0.3, -0.4), (1.1, 0.9), (-2.0, 0.1)] {
            let (r, phi) = (f64::hypot(x, y), f64::atan2(y, x));
            let h = lg_amplitude(2, r, phi, 1.0).unwrap() * s.alpha;
            let v = lg_amplitude(-1, r, phi, 1.0).unwrap() * C64::from_polar(s.beta(), s.gamma);
            let m = conditional_polarization_state(&rho, &s, x, y);
            assert!((m[(0, 0)] - h * h.conj()).norm() < 1e-14);
            assert!((m[(0, 1)] - h * v.conj()).norm() < 1e-14);
            assert!((m[(1, 1)] - v * v.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn spectral_route_matches_trace() {
        // Σ λ± (P⁺ − P⁻) form: s_j = Σ_k λ_k ⟨e_k|σ_j|e_k⟩
        let s = spec(1, -2, 0.75, 0.2);
        let rho = depolarize(&build_pure_state(&s), 0.3).unwrap();
        let m = conditional_polarization_state(&rho, &s, 0.4, 0.9);
        let e = nalgebra::SymmetricEigen::new(m);
        let direct = stokes_of(&m);
        for k in 0..3 {
            let sig = pauli_for_stokes(k);
            let mut spectral = 0.0;
            for j in 0..2 {
                let v = e.eigenvectors.column(j);
                spectral += e.eigenvalues[j] * (v.adjoint() * sig * v)[(0, 0)].re;
            }
            assert_relative_eq!(spectral, direct[k + 1], epsilon = 1e-14);
        }
    }

    #[test]
    fn pure_state_rank_one() {
        let s = spec(3, -1, 0.85, 1.0);
        let f = stokes_field(&build_pure_state(&s), &s, &Grid2D::new(5.0, 65).unwrap(), false).unwrap();
        for i in 0..f.s0.len() {
            let v = f.vector(i);
            let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            assert!((n2.sqrt() - f.s0[i]).abs() <= 1e-8 * f.s0[i].max(1e-300));
        }
        let nf = normalize_local(&f);
        for i in 0..f.s0.len() {
            if nf.valid[i] {
                assert_relative_eq!(nf.s1[i], f.s1[i] / f.s0[i], epsilon = 1e-12);
                let v = nf.vector(i);
                assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0).abs() < 1e-8);
            }
        }
        assert_eq!(nf.valid_count(), f.s0.len() - 1);
    }

    #[test]
    fn normalization_examples() {
        let g = Grid2D::new(1.0, 33).unwrap();
        let n = g.len();
        let f = StokesField::from_samples(g, [vec![1.0; n], vec![0.3; n], vec![0.0; n], vec![0.4; n]], None, false, false, None).unwrap();
        let nf = normalize_local(&f);
        assert_relative_eq!(nf.s1[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(nf.s3[0], 0.8, epsilon = 1e-15);
        assert_eq!(normalize_local(&nf), nf);
    }

    #[test]
    fn intensity_integrates_to_one() {
        for (l1, l2, a) in [(1, 0, FRAC_1_SQRT_2), (3, -2, 0.9), (0, 3, 0.8)] {
            let s = spec(l1, l2, a, 0.3);
            let rho = depolarize(&build_pure_state(&s), 0.2).unwrap();
            let f = stokes_field(&rho, &s, &Grid2D::new(6.0, 241).unwrap(), false).unwrap();
            assert!((f.total_intensity() - 1.0).abs() < 1e-3, "{l1},{l2}");
        }
    }

    #[test]
    fn gamma_rotates_transverse_components() {
        let s0 = spec(1, 0, FRAC_1_SQRT_2, 0.0);
        let s1 = spec(1, 0, FRAC_1_SQRT_2, FRAC_PI_2);
        let g = Grid2D::new(3.0, 33).unwrap();
        let f0 = stokes_field(&build_pure_state(&s0), &s0, &g, false).unwrap();
        let f1 = stokes_field(&build_pure_state(&s1), &s1, &g, false).unwrap();
        for i in 0..f0.s0.len() {
            // S2 + iS3 = 2 ψ_H* ψ_V picks up e^{iγ}; s0 and s1 are untouched
            let z0 = C64::new(f0.s2[i], f0.s3[i]);
            let z1 = C64::new(f1.s2[i], f1.s3[i]);
            assert!((z1 - z0 * C64::from_polar(1.0, FRAC_PI_2)).norm() < 1e-12);
            assert_relative_eq!(f0.s1[i], f1.s1[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn qwp_frame_is_rotation() {
        let r = frame_rotation(true);
        let mut det = 0.0;
        for k in 0..3 {
            det += r[0][k] * (r[1][(k + 1) % 3] * r[2][(k + 2) % 3] - r[1][(k + 2) % 3] * r[2][(k + 1) % 3]);
        }
        assert_relative_eq!(det, 1.0, epsilon = 1e-12);
        assert_eq!(frame_rotation(false), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        // the field after rotation is the rotated field
        let s = spec(2, -1, 0.8, 0.4);
        let rho = build_pure_state(&s);
        let g = Grid2D::new(3.0, 33).unwrap();
        let a = stokes_field(&rho, &s, &g, false).unwrap();
        let b = stokes_field(&rho, &s, &g, true).unwrap();
        for i in 0..a.s0.len() {
            let v = a.vector(i);
            for (j, row) in r.iter().enumerate() {
                let rv: f64 = (0..3).map(|k| row[k] * v[k]).sum();
                assert!((rv - b.vector(i)[j]).abs() < 1e-12);
            }
            assert_relative_eq!(a.s0[i], b.s0[i], max_relative = 1e-13);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let s = spec(1, 0, 0.8, 0.0);
        let g = Grid2D { half_width: 1.0, samples_per_axis: 31 };
        assert!(stokes_field(&build_pure_state(&s), &s, &g, false).is_err());
    }

    #[test]
    fn linear_in_rho() {
        let s = spec(1, -1, 0.9, 0.5);
        let r1 = build_pure_state(&s);
        let r2 = DensityMatrix::maximally_mixed();
        let mix = depolarize(&r1, 0.4).unwrap();
        let g = Grid2D::new(2.0, 33).unwrap();
        let (f1, f2, fm) = (
            stokes_field(&r1, &s, &g, false).unwrap(),
            stokes_field(&r2, &s, &g, false).unwrap(),
            stokes_field(&mix, &s, &g, false).unwrap(),
        );
        for i in 0..f1.s0.len() {
            assert!((fm.s2[i] - (0.6 * f1.s2[i] + 0.4 * f2.s2[i])).abs() < 1e-13);
            assert!((fm.s0[i] - (0.6 * f1.s0[i] + 0.4 * f2.s0[i])).abs() < 1e-13);
        }
    }
}
