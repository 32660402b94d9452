//! The hybrid state α|ℓ1 H⟩ + √(1−α²)e^{iγ}|ℓ2 V⟩, its decay deformation and
//! the grating-depth model.
//!
//! Basis order everywhere: [|ℓ1 H⟩, |ℓ1 V⟩, |ℓ2 H⟩, |ℓ2 V⟩].

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Error, Result};
use crate::lgmodes::ModeIndex;
pub use crate::linalg::Mat4;
use crate::linalg::{c, eigh, hermitize, trace_re};
use crate::C64;

/// Slack when checking α against 1/√2, so that the rounded 0.7071 accepted by
/// the CLI and exact FRAC_1_SQRT_2 both pass.
const ALPHA_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridStateSpec {
    pub ell1: ModeIndex,
    pub ell2: ModeIndex,
    /// Amplitude of the |ℓ1 H⟩ branch.
    pub alpha: f64,
    pub gamma: f64,
    pub w0: f64,
}

impl HybridStateSpec {
    pub fn new(ell1: ModeIndex, ell2: ModeIndex, alpha: f64, gamma: f64, w0: f64) -> Result<Self> {
        let s = HybridStateSpec { ell1, ell2, alpha, gamma, w0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell1 == self.ell2 {
            return invalid(format!("ell1 and ell2 must differ (both {})", self.ell1));
        }
        check_alpha(self.alpha)?;
        if !self.gamma.is_finite() {
            return invalid("gamma must be finite");
        }
        if !(self.w0.is_finite() && self.w0 > 0.0) {
            return invalid(format!("w0 must be positive, got {}", self.w0));
        }
        Ok(())
    }

    /// √(1−α²), the |ℓ2 V⟩ amplitude.
    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }

    /// |ℓ2| − |ℓ1|.
    pub fn order_gap(&self) -> i32 {
        self.ell2.unsigned_abs() as i32 - self.ell1.unsigned_abs() as i32
    }

    pub fn delta_ell(&self) -> i32 {
        self.ell2 - self.ell1
    }

    pub fn maximally_entangled(&self) -> Self {
        HybridStateSpec { alpha: FRAC_1_SQRT_2, ..*self }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(FRAC_1_SQRT_2 - ALPHA_SLACK..=1.0).contains(&alpha) {
        return invalid(format!("alpha must lie in [1/sqrt(2), 1], got {alpha}"));
    }
    Ok(())
}

/// 4×4 density matrix in the fixed hybrid basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-9;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps a matrix without the positivity check; it is still made exactly
    /// Hermitian. Used for raw tomography fits.
    pub fn from_unchecked(m: Mat4) -> Self {
        DensityMatrix(hermitize(&m))
    }

    pub fn check(&self) -> Result<()> {
        let m = &self.0;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("density matrix has non-finite entries".into()));
        }
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > Self::HERMITIAN_TOL {
            return invalid(format!("density matrix not Hermitian (deviation {herm:.3e})"));
        }
        let tr = trace_re(m);
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return invalid(format!("density matrix trace is {tr}, expected 1"));
        }
        let min = self.eigenvalues()[0];
        if min < -Self::PSD_TOL {
            return invalid(format!("density matrix not positive (min eigenvalue {min:.3e})"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vector4<f64> {
        eigh(&self.0).0
    }

    pub fn is_physical(&self) -> bool {
        self.check().is_ok()
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity() * c(0.25, 0.0))
    }

    pub fn from_pure(psi: &Vector4<C64>) -> Self {
        let psi = psi / C64::from(psi.norm());
        DensityMatrix(psi * psi.adjoint())
    }
}

pub fn pure_vector(spec: &HybridStateSpec) -> Vector4<C64> {
    Vector4::new(
        c(spec.alpha, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        C64::from_polar(spec.beta(), spec.gamma),
    )
}

/// |ψ⟩⟨ψ| for the spec.
pub fn build_pure_state(spec: &HybridStateSpec) -> DensityMatrix {
    let psi = pure_vector(spec);
    DensityMatrix(psi * psi.adjoint())
}

/// Re-weights the two branches to a new α; everything else is unchanged.
pub fn apply_decay(spec: &HybridStateSpec, alpha_new: f64) -> Result<HybridStateSpec> {
    check_alpha(alpha_new)?;
    Ok(HybridStateSpec { alpha: alpha_new, ..*spec })
}

/// Radius r' at which the maximally entangled field equals the decayed
/// field at r: r' = r·(β/α)^{1/(|ℓ2|−|ℓ1|)}.
pub fn decay_coordinate_map(spec: &HybridStateSpec, alpha: f64, r: f64) -> Result<f64> {
    let d = spec.order_gap();
    if d == 0 {
        return invalid("decay coordinate map undefined when |ell1| = |ell2|");
    }
    check_alpha(alpha)?;
    if alpha >= 1.0 {
        return invalid("decay coordinate map undefined at alpha = 1");
    }
    if !(r.is_finite() && r > 0.0) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    let beta = (1.0 - alpha * alpha).sqrt();
    Ok(r * (beta / alpha).powf(1.0 / d as f64))
}

/// Probability-like weight α_M = √(1 − sinc²(πM))/2 + 1/2 of the grating model.
pub fn grating_alpha(m: f64) -> f64 {
    let x = PI * m;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    (1.0 - sinc * sinc).max(0.0).sqrt() / 2.0 + 0.5
}

/// Amplitude convention used by [`HybridStateSpec::alpha`]: √α_M.
pub fn grating_amplitude(m: f64) -> f64 {
    grating_alpha(m).sqrt()
}

/// (1−λ)ρ + λ I/4.
pub fn depolarize(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("depolarizing weight must lie in [0,1], got {lambda}"));
    }
    let m = rho.matrix() * c(1.0 - lambda, 0.0) + Mat4::identity() * c(lambda / 4.0, 0.0);
    Ok(DensityMatrix(m))
}
