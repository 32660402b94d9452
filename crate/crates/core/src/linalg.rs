use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};

use crate::C64;

pub type Mat4 = Matrix4<C64>;
pub type Mat2 = Matrix2<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn hermitize(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
pub fn eigh(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let e = SymmetricEigen::new(hermitize(m));
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = Vector4::from_fn(|i, _| e.eigenvalues[idx[i]]);
    let vecs = Mat4::from_fn(|r, col| e.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

pub fn from_spectrum(vals: &Vector4<f64>, vecs: &Mat4) -> Mat4 {
    let d = Mat4::from_diagonal(&vals.map(|v| c(v, 0.0)));
    vecs * d * vecs.adjoint()
}

/// Eigenvalues below this are rounding noise of a PSD matrix and are dropped.
const RANK_TOL: f64 = 1e-13;

/// B with m = B B†, built from the spectrum of the PSD Hermitian `m`.
/// Eigenvalues under `RANK_TOL` (relative to the largest) become exact zeros,
/// so a pure state yields a single non-zero column.
pub fn psd_factor(m: &Mat4) -> Mat4 {
    let (vals, vecs) = eigh(m);
    let cut = RANK_TOL * vals.max().max(0.0);
    let roots = vals.map(|v| if v > cut { v.sqrt() } else { 0.0 });
    Mat4::from_fn(|r, col| vecs[(r, col)] * roots[col])
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

pub fn pauli(k: usize) -> Mat2 {
    let (z, o, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match k {
        0 => Mat2::new(o, z, z, o),
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(z, -i, i, z),
        3 => Mat2::new(o, z, z, -o),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn trace_re(m: &Mat4) -> f64 {
    m.trace().re
}
