//! Uhlmann fidelity, Wootters concurrence and purity.

use serde::{Deserialize, Serialize};

use crate::linalg::{kron2, pauli, psd_factor, trace_re};
use crate::state::{DensityMatrix, Mat4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub fidelity: f64,
    pub concurrence: f64,
    pub purity: f64,
}

/// F = (tr √(√ρ_T ρ_M √ρ_T))².
///
/// With ρ_T = B B† and ρ_M = C C† the trace equals the sum of singular values
/// of C†B, which avoids square roots of eigenvalues at rounding level.
pub fn fidelity(rho_target: &DensityMatrix, rho_measured: &DensityMatrix) -> f64 {
    let b = psd_factor(rho_target.matrix());
    let c = psd_factor(rho_measured.matrix());
    let root: f64 = (c.adjoint() * b).singular_values().sum();
    (root * root).clamp(0.0, 1.0)
}

/// ρ̃ = (σy⊗σy) ρ* (σy⊗σy).
pub fn spin_flip(rho: &Mat4) -> Mat4 {
    let yy = kron2(&pauli(2), &pauli(2));
    yy * rho.conjugate() * yy
}

/// C = max(0, λ1−λ2−λ3−λ4), λ the descending square roots of the
/// eigenvalues of ρρ̃.
///
/// With ρ = B B†, those roots are the singular values of Bᵀ(σy⊗σy)B.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let b = psd_factor(rho.matrix());
    let yy = kron2(&pauli(2), &pauli(2));
    let mut l: Vec<f64> = (b.transpose() * yy * b).singular_values().iter().copied().collect();
    l.sort_by(|x, y| y.total_cmp(x));
    (l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0)
}

/// tr ρ².
pub fn purity(rho: &DensityMatrix) -> f64 {
    trace_re(&(rho.matrix() * rho.matrix()))
}

pub fn metric_report(rho_target: &DensityMatrix, rho: &DensityMatrix) -> MetricReport {
    MetricReport {
        fidelity: fidelity(rho_target, rho),
        concurrence: concurrence(rho),
        purity: purity(rho),
    }
}

/// ⟨ψ|ρ|ψ⟩ for a pure target; the fidelity shortcut.
pub fn pure_fidelity(psi: &nalgebra::Vector4<crate::C64>, rho: &DensityMatrix) -> f64 {
    (psi.adjoint() * rho.matrix() * psi)[(0, 0)].re / psi.norm_squared()
}
