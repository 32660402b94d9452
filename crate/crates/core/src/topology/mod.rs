//! Skyrme density and number, the closed form, sphere coverage, coordinate
//! transforms and the stereographic map.

mod sphere;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Result};
use crate::lgmodes::{ln_factorial, Grid2D};
use crate::state::HybridStateSpec;
use crate::stokesfield::{frame_rotation, is_valid_sample, norm3, StokesField};

pub use sphere::FibonacciSphere;

/// Below this many samples per axis the quadrature is flagged as inaccurate.
pub const ACCURATE_SAMPLES: usize = 65;
pub const DEFAULT_CELLS: usize = 2000;
pub const MIN_CELLS: usize = 500;

/// Half-width of the auto grid in units of the maximally entangled crossover radius.
const CROSSOVER_SPAN: f64 = 11.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n_numeric: f64,
    pub n_closed_form: Option<f64>,
    pub n_theory: i32,
    pub coverage_total: f64,
    pub coverage_per_segment: Vec<f64>,
    pub cells_used: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub coverage_total: f64,
    pub coverage_per_segment: Vec<f64>,
    pub cells_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Derivative along one axis of a line of samples. `at(k)` returns the value
/// at offset k when that neighbour exists and is valid.
fn masked_derivative(at: impl Fn(i64) -> Option<f64>, h: f64, periodic: bool) -> Option<f64> {
    let u0 = at(0)?;
    let d = |k: i64| at(k).map(|v| if periodic { wrap(v - u0) } else { v - u0 });
    match (d(-2), d(-1), d(1), d(2)) {
        (Some(m2), Some(m1), Some(p1), Some(p2)) => Some((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)),
        (_, Some(m1), Some(p1), _) => Some((p1 - m1) / (2.0 * h)),
        (_, None, Some(p1), Some(p2)) => Some((4.0 * p1 - p2) / (2.0 * h)),
        (Some(m2), Some(m1), None, _) => Some((-4.0 * m1 + m2) / (2.0 * h)),
        (_, None, Some(p1), None) => Some(p1 / h),
        (_, Some(m1), None, _) => Some(-m1 / h),
        _ => None,
    }
}

/// Σ_z at every sample; masked points and points without a usable stencil
/// carry 0.
///
/// The unit vector is written in spherical coordinates (u, Φ) about the
/// field's s1 axis, so Σ_z = −(∂x u ∂y Φ − ∂y u ∂x Φ). This equals the triple
/// product of the continuum definition and keeps the full-sphere wrap near
/// the axis, where Stokes-component differences lose accuracy.
pub fn sigma_z(field: &StokesField) -> Result<Vec<f64>> {
    if !field.normalized {
        return invalid("sigma_z needs a normalized field");
    }
    let n = field.n();
    let rot = frame_rotation(field.qwp);
    let axis = |k: usize| [rot[0][k], rot[1][k], rot[2][k]];
    let (a, e1, e2) = (axis(0), axis(1), axis(2));
    let dot = |p: &[f64; 3], q: &[f64; 3]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let mut u = vec![0.0; n * n];
    let mut phi = vec![0.0; n * n];
    for i in 0..n * n {
        if field.valid[i] {
            let v = field.vector(i);
            u[i] = dot(&v, &a).clamp(-1.0, 1.0);
            phi[i] = dot(&v, &e2).atan2(dot(&v, &e1));
        }
    }
    let h = field.grid.spacing();
    let ok = |ix: i64, iy: i64| ix >= 0 && iy >= 0 && (ix as usize) < n && (iy as usize) < n && field.valid[iy as usize * n + ix as usize];
    let sample = |vals: &[f64], ix: i64, iy: i64| ok(ix, iy).then(|| vals[iy as usize * n + ix as usize]);

    let rows: Vec<Vec<f64>> = (0..n as i64)
        .into_par_iter()
        .map(|iy| {
            (0..n as i64)
                .map(|ix| {
                    if !ok(ix, iy) {
                        return 0.0;
                    }
                    let ux = masked_derivative(|k| sample(&u, ix + k, iy), h, false);
                    let uy = masked_derivative(|k| sample(&u, ix, iy + k), h, false);
                    let px = masked_derivative(|k| sample(&phi, ix + k, iy), h, true);
                    let py = masked_derivative(|k| sample(&phi, ix, iy + k), h, true);
                    match (ux, uy, px, py) {
                        (Some(ux), Some(uy), Some(px), Some(py)) => -(ux * py - uy * px),
                        _ => 0.0,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// N = (1/4π) Σ Σ_z Δx Δy.
pub fn skyrme_number(field: &StokesField) -> Result<f64> {
    let h = field.grid.spacing();
    Ok(sigma_z(field)?.iter().sum::<f64>() * h * h / (4.0 * PI))
}

/// Closed form of N from the limits of g(r) at the origin and at infinity.
pub fn closed_form_skyrme(spec: &HybridStateSpec) -> f64 {
    let d = spec.order_gap();
    if d == 0 || spec.beta() == 0.0 {
        return 0.0;
    }
    // 1/(1+|g|²) is 1 where g → 0 and 0 where g → ∞
    let (at_origin, at_infinity) = if d > 0 { (1.0, 0.0) } else { (0.0, 1.0) };
    spec.delta_ell() as f64 * (at_origin - at_infinity)
}

/// Integer skyrme number the state is expected to carry.
pub fn n_theory(spec: &HybridStateSpec) -> i32 {
    closed_form_skyrme(spec).round() as i32
}

/// Radius where |g(r)| = 1, the ring mapped to the sphere's equator.
pub fn crossover_radius(spec: &HybridStateSpec) -> Option<f64> {
    let d = spec.order_gap();
    let beta = spec.beta();
    if d == 0 || beta == 0.0 {
        return None;
    }
    let (a1, a2) = (spec.ell1.unsigned_abs(), spec.ell2.unsigned_abs());
    let ln_c = (beta / spec.alpha).ln()
        + 0.5 * (ln_factorial(a1) - ln_factorial(a2))
        + d as f64 * (2f64.sqrt() / spec.w0).ln();
    Some((-ln_c / d as f64).exp())
}

/// Grid wide enough to hold the full wrap of `spec`: at least `base`, and at
/// least 11 crossover radii of the maximally entangled state, then scaled with
/// the crossover radius as α moves away from 1/√2.
pub fn auto_grid(spec: &HybridStateSpec, base: &Grid2D) -> Result<Grid2D> {
    let (Some(rc), Some(r0)) = (
        crossover_radius(spec),
        crossover_radius(&HybridStateSpec { alpha: FRAC_1_SQRT_2, ..*spec }),
    ) else {
        return Ok(*base);
    };
    let h0 = base.half_width.max(CROSSOVER_SPAN * r0);
    base.with_half_width(h0 * rc / r0)
}

fn sector(x: f64, y: f64, n_segments: usize) -> usize {
    let t = (y.atan2(x) + PI) / (2.0 * PI);
    ((t * n_segments as f64) as usize).min(n_segments - 1)
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm3(v);
    (n > 0.0 && n.is_finite()).then(|| v.map(|c| c / n))
}

/// Most subdivisions per quad edge when filling in between samples.
const MAX_SUBDIVISION: usize = 64;

/// Fraction of Fibonacci cells hit by each azimuthal sector of the plane.
///
/// Grid quads whose corner vectors spread wider than half a cell are filled in
/// by bilinear interpolation (renormalized), so the count reflects the
/// continuous map rather than the sampling density.
pub fn coverage(field: &StokesField, n_segments: usize, n_cells: usize) -> Result<CoverageReport> {
    if n_segments == 0 {
        return invalid("n_segments must be positive");
    }
    if n_cells < MIN_CELLS {
        return invalid(format!("n_cells must be at least {MIN_CELLS}, got {n_cells}"));
    }
    if field.valid_count() == 0 {
        return invalid("coverage of a fully masked field");
    }
    let sphere = FibonacciSphere::new(n_cells);
    let target = 0.5 * sphere.cell_size();
    let n = field.n();
    let dir = |i: usize| unit(field.vector(i));

    let hits = (0..n)
        .into_par_iter()
        .fold(
            || vec![vec![false; n_cells]; n_segments],
            |mut hits, iy| {
                for ix in 0..n {
                    let i = field.index(ix, iy);
                    if !field.valid[i] {
                        continue;
                    }
                    let Some(v) = dir(i) else { continue };
                    let (x, y) = field.position(i);
                    hits[sector(x, y, n_segments)][sphere.nearest(&v)] = true;
                    if ix + 1 == n || iy + 1 == n {
                        continue;
                    }
                    let idx = [i, field.index(ix + 1, iy), field.index(ix, iy + 1), field.index(ix + 1, iy + 1)];
                    if idx.iter().any(|&j| !field.valid[j]) {
                        continue;
                    }
                    let Some(c) = idx.iter().map(|&j| dir(j)).collect::<Option<Vec<_>>>() else { continue };
                    let mut spread: f64 = 0.0;
                    for p in 0..4 {
                        for q in p + 1..4 {
                            let d2: f64 = (0..3).map(|k| (c[p][k] - c[q][k]).powi(2)).sum();
                            spread = spread.max(d2.sqrt());
                        }
                    }
                    let m = ((spread / target).ceil() as usize).clamp(1, MAX_SUBDIVISION);
                    if m == 1 {
                        continue;
                    }
                    let h = field.grid.spacing();
                    for a in 0..=m {
                        for b in 0..=m {
                            let (s, t) = (a as f64 / m as f64, b as f64 / m as f64);
                            let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
                            let v = std::array::from_fn(|k| (0..4).map(|p| w[p] * c[p][k]).sum());
                            if let Some(v) = unit(v) {
                                hits[sector(x + s * h, y + t * h, n_segments)][sphere.nearest(&v)] = true;
                            }
                        }
                    }
                }
                hits
            },
        )
        .reduce(
            || vec![vec![false; n_cells]; n_segments],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x |= y;
                    }
                }
                a
            },
        );
    let per: Vec<f64> = hits
        .iter()
        .map(|h| h.iter().filter(|b| **b).count() as f64 / n_cells as f64)
        .collect();
    Ok(CoverageReport { coverage_total: per.iter().sum(), coverage_per_segment: per, cells_used: n_cells })
}

/// Resamples the field under r → radial_scale·r onto the same grid.
///
/// A sample is valid when every stored neighbour with non-zero bilinear weight
/// is valid; points mapped outside the grid are masked.
pub fn transform_field(field: &StokesField, radial_scale: f64) -> Result<StokesField> {
    if !(radial_scale.is_finite() && radial_scale > 0.0) {
        return invalid(format!("radial_scale must be positive, got {radial_scale}"));
    }
    let n = field.n();
    let g = field.grid;
    let h = g.spacing();
    let mut out = field.clone();
    for iy in 0..n {
        for ix in 0..n {
            let i = field.index(ix, iy);
            let fx = (radial_scale * g.coord(ix) + g.half_width) / h;
            let fy = (radial_scale * g.coord(iy) + g.half_width) / h;
            let top = (n - 1) as f64;
            let eps = 1e-9;
            let mut vals = [0.0; 4];
            let mut ok = (-eps..=top + eps).contains(&fx) && (-eps..=top + eps).contains(&fy);
            if ok {
                let (fx, fy) = (fx.clamp(0.0, top), fy.clamp(0.0, top));
                let (x0, y0) = ((fx.floor() as usize).min(n - 2), (fy.floor() as usize).min(n - 2));
                let (s, t) = (fx - x0 as f64, fy - y0 as f64);
                let corners = [(x0, y0, (1.0 - s) * (1.0 - t)), (x0 + 1, y0, s * (1.0 - t)), (x0, y0 + 1, (1.0 - s) * t), (x0 + 1, y0 + 1, s * t)];
                for (cx, cy, w) in corners {
                    if w == 0.0 {
                        continue;
                    }
                    let j = field.index(cx, cy);
                    ok &= field.valid[j];
                    let src = [field.s0[j], field.s1[j], field.s2[j], field.s3[j]];
                    for k in 0..4 {
                        vals[k] += w * src[k];
                    }
                }
            }
            if ok && field.normalized {
                match unit([vals[1], vals[2], vals[3]]) {
                    Some(v) => vals[1..].copy_from_slice(&v),
                    None => ok = false,
                }
            }
            ok &= is_valid_sample(vals[0].max(if field.normalized { 1.0 } else { 0.0 }), [vals[1], vals[2], vals[3]]);
            if !ok {
                vals = [0.0; 4];
            }
            out.s0[i] = vals[0].max(0.0);
            out.s1[i] = vals[1];
            out.s2[i] = vals[2];
            out.s3[i] = vals[3];
            out.valid[i] = ok;
        }
    }
    if out.valid_count() == 0 {
        return invalid(format!("radial_scale {radial_scale} maps every sample off the grid"));
    }
    out.envelope_w0 = field.envelope_w0.map(|w| w / radial_scale);
    out.spec = None;
    Ok(out)
}

/// Inverse stereographic map of the plane onto the unit sphere; the origin
/// goes to the south pole.
pub fn stereographic(x: f64, y: f64) -> SpherePoint {
    let r2 = x * x + y * y;
    if !r2.is_finite() {
        return SpherePoint { x: 0.0, y: 0.0, z: 1.0 };
    }
    let d = 1.0 + r2;
    SpherePoint { x: 2.0 * x / d, y: 2.0 * y / d, z: (r2 - 1.0) / d }
}

/// Full topology report. Without a spec the theory value is the rounded
/// numeric number and the closed form is absent.
pub fn analyze(field: &StokesField, spec: Option<&HybridStateSpec>, n_cells: usize) -> Result<TopologyReport> {
    let mut warnings = Vec::new();
    if field.n() < ACCURATE_SAMPLES {
        warnings.push(format!(
            "{} samples per axis is below {ACCURATE_SAMPLES}; the skyrme number may be inaccurate",
            field.n()
        ));
    }
    let normalized;
    let field = if field.normalized {
        field
    } else {
        normalized = crate::stokesfield::normalize_local(field);
        &normalized
    };
    let n_numeric = skyrme_number(field)?;
    let spec = spec.or(field.spec.as_ref());
    let n_closed_form = spec.map(closed_form_skyrme);
    let n_theory = spec.map(n_theory).unwrap_or(n_numeric.round() as i32);
    let cov = coverage(field, n_theory.unsigned_abs().max(1) as usize, n_cells)?;
    Ok(TopologyReport {
        n_numeric,
        n_closed_form,
        n_theory,
        coverage_total: cov.coverage_total,
        coverage_per_segment: cov.coverage_per_segment,
        cells_used: cov.cells_used,
        warnings,
    })
}
