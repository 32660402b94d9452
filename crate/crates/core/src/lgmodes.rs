//! Waist-plane Laguerre-Gaussian modes with zero radial index, and the square
//! sampling grids every field lives on.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::C64;

/// OAM topological charge ℓ.
pub type ModeIndex = i32;

/// Complex mode amplitude, units 1/length.
pub type ComplexAmplitude = C64;

/// Origin-centred square grid. The sample count is odd so the origin is a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub half_width: f64,
    pub samples_per_axis: usize,
}

impl Grid2D {
    pub const MIN_SAMPLES: usize = 33;

    pub fn new(half_width: f64, samples_per_axis: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return invalid(format!("grid half_width must be positive, got {half_width}"));
        }
        if samples_per_axis < Self::MIN_SAMPLES || samples_per_axis.is_multiple_of(2) {
            return invalid(format!(
                "grid needs an odd sample count >= {}, got {samples_per_axis}",
                Self::MIN_SAMPLES
            ));
        }
        Ok(Grid2D { half_width, samples_per_axis })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.samples_per_axis - 1) as f64
    }

    /// Coordinate of sample `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.samples_per_axis * self.samples_per_axis
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center_index(&self) -> usize {
        self.samples_per_axis / 2
    }

    pub fn with_half_width(&self, half_width: f64) -> Result<Self> {
        Grid2D::new(half_width, self.samples_per_axis)
    }
}

/// ln(n!) as a sum of logs; exact enough for the |ℓ| ≤ 20 range used here and
/// never overflows.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Normalization √(2/(π|ℓ|!)).
fn norm_const(ell: ModeIndex) -> f64 {
    (0.5 * ((2.0 / PI).ln() - ln_factorial(ell.unsigned_abs()))).exp()
}

/// Radial amplitude without the Gaussian factor: √(2/(π|ℓ|!))·(√2 r/w0)^|ℓ| / w0.
///
/// Every mode shares exp(−r²/w0²), so fields that only need ratios or
/// envelope-relative values can skip it and avoid underflow far from the axis.
pub fn lg_radial_reduced(ell: ModeIndex, r: f64, w0: f64) -> f64 {
    let m = ell.unsigned_abs() as i32;
    norm_const(ell) / w0 * (std::f64::consts::SQRT_2 * r / w0).powi(m)
}

/// LG_ℓ(r, φ) at the waist.
pub fn lg_amplitude(ell: ModeIndex, r: f64, phi: f64, w0: f64) -> Result<ComplexAmplitude> {
    if !(r.is_finite() && phi.is_finite() && w0.is_finite()) {
        return invalid("lg_amplitude: non-finite input");
    }
    if w0 <= 0.0 || r < 0.0 {
        return invalid(format!("lg_amplitude: need r >= 0 and w0 > 0, got r={r}, w0={w0}"));
    }
    let radial = lg_radial_reduced(ell, r, w0) * (-(r * r) / (w0 * w0)).exp();
    Ok(C64::from_polar(radial, ell as f64 * phi))
}

/// |LG_ℓ2(r)| / |LG_ℓ1(r)| = √(|ℓ1|!/|ℓ2|!)·(√2 r/w0)^(|ℓ2|−|ℓ1|).
///
/// At r = 0 the limit is returned: +∞ when |ℓ1| > |ℓ2| (a pole), 0 when
/// |ℓ2| > |ℓ1|, 1 when the moduli coincide.
pub fn amplitude_ratio(ell1: ModeIndex, ell2: ModeIndex, r: f64, w0: f64) -> Result<f64> {
    if !(r.is_finite() && w0.is_finite()) || r < 0.0 || w0 <= 0.0 {
        return invalid(format!("amplitude_ratio: need r >= 0 and w0 > 0, got r={r}, w0={w0}"));
    }
    let (a1, a2) = (ell1.unsigned_abs(), ell2.unsigned_abs());
    let d = a2 as i32 - a1 as i32;
    let pref = (0.5 * (ln_factorial(a1) - ln_factorial(a2))).exp();
    Ok(pref * (std::f64::consts::SQRT_2 * r / w0).powi(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_validation() {
        assert!(Grid2D::new(1.0, 32).is_err());
        assert!(Grid2D::new(1.0, 34).is_err());
        assert!(Grid2D::new(0.0, 33).is_err());
        assert!(Grid2D::new(-1.0, 33).is_err());
        let g = Grid2D::new(8.0, 257).unwrap();
        assert_eq!(g.coord(g.center_index()), 0.0);
        assert_relative_eq!(g.spacing(), 0.0625);
        assert_relative_eq!(g.coord(256), 8.0);
    }

    #[test]
    fn values_at_origin() {
        let z = lg_amplitude(1, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(z, C64::new(0.0, 0.0));
        let z = lg_amplitude(0, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(z.re, (2.0 / PI).sqrt(), epsilon = 1e-15);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lg_amplitude(1, f64::NAN, 0.0, 1.0).is_err());
        assert!(lg_amplitude(1, 1.0, f64::INFINITY, 1.0).is_err());
        assert!(lg_amplitude(1, 1.0, 0.0, 0.0).is_err());
    }

    // plain 2-D trapezoid on an independent closed-form evaluation
    fn norm_trapezoid(ell: i32, w0: f64, half: f64, n: usize) -> f64 {
        let h = 2.0 * half / (n - 1) as f64;
        let m = ell.unsigned_abs() as i32;
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = -half + i as f64 * h;
                let y = -half + j as f64 * h;
                let r2 = x * x + y * y;
                let v = 2.0 / (PI * fact) / (w0 * w0) * (2.0 * r2 / (w0 * w0)).powi(m)
                    * (-2.0 * r2 / (w0 * w0)).exp();
                let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                s += wx * wy * v;
            }
        }
        s * h * h
    }

    #[test]
    fn unit_norm() {
        for ell in [0, 1, 3, -2, 5] {
            let n = norm_trapezoid(ell, 1.0, 6.0, 401);
            assert!((n - 1.0).abs() < 1e-4, "ell={ell} norm={n}");
        }
        // same integral through the library function
        let g = Grid2D::new(6.0, 301).unwrap();
        for ell in [0, 1, 3] {
            let mut s = 0.0;
            for i in 0..g.samples_per_axis {
                for j in 0..g.samples_per_axis {
                    let (x, y) = (g.coord(i), g.coord(j));
                    s += lg_amplitude(ell, x.hypot(y), y.atan2(x), 1.0).unwrap().norm_sqr();
                }
            }
            s *= g.spacing() * g.spacing();
            assert!((s - 1.0).abs() < 1e-4, "ell={ell} norm={s}");
        }
    }

    #[test]
    fn ratio_examples() {
        assert_relative_eq!(amplitude_ratio(0, 0, 1.0, 1.0).unwrap(), 1.0);
        let r = 1.0 / 2f64.sqrt();
        assert_relative_eq!(amplitude_ratio(1, 0, r, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        let direct = lg_amplitude(0, r, 0.3, 1.0).unwrap().norm() / lg_amplitude(1, r, 0.3, 1.0).unwrap().norm();
        assert_relative_eq!(direct, 1.0, epsilon = 1e-14);
        assert_eq!(amplitude_ratio(1, 0, 0.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(amplitude_ratio(0, 2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(amplitude_ratio(1, -1, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn ratio_slope_is_cubic() {
        // least-squares slope of log ratio against log r
        let rs: Vec<f64> = (0..20).map(|k| 0.1 + 0.9 * k as f64 / 19.0).collect();
        let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = rs.iter().map(|&r| amplitude_ratio(0, 3, r, 1.0).unwrap().ln()).collect();
        let mx = xs.iter().sum::<f64>() / 20.0;
        let my = ys.iter().sum::<f64>() / 20.0;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        assert_relative_eq!(num / den, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn ln_factorial_small() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_factorial(20), 2_432_902_008_176_640_000f64.ln(), epsilon = 1e-13);
    }

    proptest! {
        #[test]
        fn modulus_independent_of_phi(ell in -6i32..=6, r in 0.0f64..4.0, p1 in -10.0f64..10.0, p2 in -10.0f64..10.0) {
            let a = lg_amplitude(ell, r, p1, 1.3).unwrap().norm();
            let b = lg_amplitude(ell, r, p2, 1.3).unwrap().norm();
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }

        #[test]
        fn negative_charge_is_conjugate(ell in -6i32..=6, r in 0.0f64..4.0, phi in -10.0f64..10.0) {
            let a = lg_amplitude(-ell, r, phi, 0.8).unwrap();
            let b = lg_amplitude(ell, r, phi, 0.8).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
        }

        #[test]
        fn ratio_matches_quotient(l1 in -5i32..=5, l2 in -5i32..=5, r in 0.05f64..3.0) {
            let q = lg_amplitude(l2, r, 0.0, 1.0).unwrap().norm() / lg_amplitude(l1, r, 0.0, 1.0).unwrap().norm();
            let v = amplitude_ratio(l1, l2, r, 1.0).unwrap();
            prop_assert!((q - v).abs() <= 1e-12 * v);
        }
    }
}
