//! Linear-inversion tomography over the 15-term two-qubit Pauli expansion
//! followed by projection onto the physical states.

use nalgebra::{SMatrix, SVector, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, eigh, from_spectrum, kron2, pauli, trace_re};
use crate::measure::{all_settings, estimated_probabilities, projector, MeasurementRecord};
use crate::state::{DensityMatrix, Mat4};

const RIDGE: f64 = 1e-10;

/// Coefficients of ρ = ¼(I + Σ a_m σ_m⊗I + Σ c_n I⊗σ_n + Σ b_mn σ_m⊗σ_n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub b: [[f64; 3]; 3],
    pub a: [f64; 3],
    pub c: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    /// Projected state, or the raw fit when projection is disabled.
    pub rho: DensityMatrix,
    /// Unconstrained least-squares matrix: Hermitian, unit trace, maybe not positive.
    pub raw: DensityMatrix,
    pub coefficients: PauliCoefficients,
    /// χ = Σ (p(ρ) − p_measured)² evaluated on `rho`.
    pub residual: f64,
    /// χ of the unconstrained fit.
    pub residual_unconstrained: f64,
    /// Always 0: the fit is a direct solve.
    pub iterations: u32,
    pub projected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconstructOptions {
    /// Project the fit onto the physical states (default on).
    pub project: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions { project: true }
    }
}

/// (m, n) pairs of the 15 non-identity Pauli products, m on photon A.
fn pauli_pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..4).flat_map(|m| (0..4).map(move |n| (m, n))).skip(1)
}

fn pauli_products() -> Vec<Mat4> {
    pauli_pairs().map(|(m, n)| kron2(&pauli(m), &pauli(n))).collect()
}

fn from_coefficients(t: &SVector<f64, 15>, basis: &[Mat4]) -> Mat4 {
    let mut m = Mat4::identity();
    for (tj, bj) in t.iter().zip(basis) {
        m += bj * c(*tj, 0.0);
    }
    m * c(0.25, 0.0)
}

fn coefficients_of(rho: &Mat4) -> PauliCoefficients {
    let mut out = PauliCoefficients { b: [[0.0; 3]; 3], a: [0.0; 3], c: [0.0; 3] };
    for (m, n) in pauli_pairs() {
        let v = trace_re(&(rho * kron2(&pauli(m), &pauli(n))));
        match (m, n) {
            (m, 0) => out.a[m - 1] = v,
            (0, n) => out.c[n - 1] = v,
            (m, n) => out.b[m - 1][n - 1] = v,
        }
    }
    out
}

fn chi(rho: &Mat4, p: &[f64; 36]) -> f64 {
    all_settings()
        .iter()
        .zip(p)
        .map(|(s, pm)| (trace_re(&(rho * projector(*s))) - pm).powi(2))
        .sum()
}

pub fn reconstruct(records: &[MeasurementRecord]) -> Result<TomographyResult> {
    reconstruct_with(records, ReconstructOptions::default())
}

/// Least-squares fit of the Pauli coefficients to the group-normalized
/// probabilities. p is affine in the coefficients, so the normal equations
/// give the minimizer directly.
pub fn reconstruct_with(records: &[MeasurementRecord], opts: ReconstructOptions) -> Result<TomographyResult> {
    let p = estimated_probabilities(records)?;
    let basis = pauli_products();
    let settings = all_settings();

    let design = SMatrix::<f64, 36, 15>::from_fn(|k, j| 0.25 * trace_re(&(projector(settings[k]) * basis[j])));
    let rhs = SVector::<f64, 36>::from_fn(|k, _| p[k] - 0.25);
    let normal = design.transpose() * design + SMatrix::<f64, 15, 15>::identity() * RIDGE;
    let t = normal
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal equations not positive definite".into()))?
        .solve(&(design.transpose() * rhs));

    let raw_m = from_coefficients(&t, &basis);
    let raw = DensityMatrix::from_unchecked(raw_m);
    let residual_unconstrained = chi(raw.matrix(), &p);
    let rho = if opts.project { project_physical(raw.matrix())? } else { raw.clone() };
    Ok(TomographyResult {
        residual: chi(rho.matrix(), &p),
        coefficients: coefficients_of(rho.matrix()),
        rho,
        raw,
        residual_unconstrained,
        iterations: 0,
        projected: opts.project,
    })
}

/// Euclidean projection of a vector onto the probability simplex.
pub(crate) fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &x) in s.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Closest density matrix in Frobenius norm.
///
/// Water-filling on the spectrum: negative weight is removed and the deficit
/// is taken evenly from the remaining eigenvalues, repeating until none goes
/// negative. This is the Euclidean projection of the eigenvalues onto the
/// simplex; eigenvectors are kept.
pub fn project_physical(rho_raw: &Mat4) -> Result<DensityMatrix> {
    if rho_raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix".into()));
    }
    let scale = rho_raw.norm();
    if scale == 0.0 {
        return invalid("cannot project the zero matrix");
    }
    let herm = (rho_raw - rho_raw.adjoint()).norm();
    if herm > 1e-9 * scale.max(1.0) {
        return invalid(format!("projection input not Hermitian (deviation {herm:.3e})"));
    }
    let (vals, vecs) = eigh(rho_raw);
    let p = simplex_projection(vals.as_slice());
    let m = from_spectrum(&Vector4::from_column_slice(&p), &vecs);
    let rho = DensityMatrix::from_unchecked(m);
    rho.check()?;
    Ok(rho)
}
