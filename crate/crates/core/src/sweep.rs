//! Entanglement-decay sweeps: F, C and N as α runs from 1/√2 to 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};
use crate::lgmodes::Grid2D;
use crate::measure::{born_probabilities, simulate_counts};
use crate::metrics::{concurrence, fidelity};
use crate::state::{apply_decay, build_pure_state, HybridStateSpec};
use crate::stokesfield::{normalize_local, stokes_field};
use crate::tomo::reconstruct;
use crate::topology::{auto_grid, closed_form_skyrme, skyrme_number};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySweepRow {
    pub alpha: f64,
    pub fidelity_vs_max: f64,
    pub concurrence: f64,
    pub n_numeric: f64,
    pub n_closed_form: f64,
    pub grid_half_width_used: f64,
}

/// Shot noise for the tomography stage of each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Noise {
    pub shots: u64,
    pub seed: u64,
}

/// 1/√2, then 1 − α halved per step while it stays ≥ 0.001, then α = 1.
pub fn default_alphas() -> Vec<f64> {
    let mut out = vec![FRAC_1_SQRT_2];
    let mut gap = 1.0 - FRAC_1_SQRT_2;
    loop {
        gap /= 2.0;
        if gap < 1e-3 {
            break;
        }
        out.push(1.0 - gap);
    }
    out.push(1.0);
    out
}

/// splitmix64 output for stream `index` of `master`: the state is
/// master + (index+1)·0x9E3779B97F4A7C15, then the usual finalizer.
pub fn row_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One row per α, sorted ascending. The Stokes grid of each row comes from
/// [`auto_grid`] applied to `grid`. F is taken against the α = 1/√2 state
/// with the same modes and phase.
pub fn run_decay_sweep(spec: &HybridStateSpec, alphas: &[f64], grid: &Grid2D, noise: Option<Noise>) -> Result<Vec<DecaySweepRow>> {
    spec.validate()?;
    if alphas.is_empty() {
        return invalid("no alpha values given");
    }
    if let Some(n) = noise {
        if n.shots == 0 {
            return invalid("noisy sweep needs at least one shot per setting");
        }
    }
    let mut alphas = alphas.to_vec();
    if alphas.iter().any(|a| !a.is_finite()) {
        return invalid("alpha values must be finite");
    }
    alphas.sort_by(f64::total_cmp);
    let reference = build_pure_state(&spec.maximally_entangled());
    alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let s = apply_decay(spec, alpha)?;
            let truth = build_pure_state(&s);
            let rho = match noise {
                None => truth,
                Some(n) => {
                    let counts = simulate_counts(&born_probabilities(&truth)?, n.shots, row_seed(n.seed, i as u64))?;
                    reconstruct(&counts)?.rho
                }
            };
            let g = auto_grid(&s, grid)?;
            let field = normalize_local(&stokes_field(&rho, &s, &g, false)?);
            Ok(DecaySweepRow {
                alpha,
                fidelity_vs_max: fidelity(&reference, &rho),
                concurrence: concurrence(&rho),
                n_numeric: skyrme_number(&field)?,
                n_closed_form: closed_form_skyrme(&s),
                grid_half_width_used: g.half_width,
            })
        })
        .collect()
}
