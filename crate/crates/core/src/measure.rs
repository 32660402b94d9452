//! The 36 local projective settings of the tomography protocol and simulated
//! coincidence data.

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, kron2, trace_re, Mat2};
use crate::state::{DensityMatrix, Mat4};
use crate::C64;

/// Photon-A spatial projector: the two modes or (|ℓ1⟩ + e^{iθ}|ℓ2⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelA {
    #[serde(rename = "L1")]
    L1,
    #[serde(rename = "L2")]
    L2,
    /// θ = 0
    #[serde(rename = "SUP_P")]
    SupP,
    /// θ = π
    #[serde(rename = "SUP_M")]
    SupM,
    /// θ = π/2
    #[serde(rename = "SUP_PI")]
    SupPi,
    /// θ = −π/2
    #[serde(rename = "SUP_MI")]
    SupMi,
}

/// Photon-B polarization projector. R is the +1 eigenvector (1, i)/√2 of σ_y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelB {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl LabelA {
    pub const ALL: [LabelA; 6] = [LabelA::L1, LabelA::L2, LabelA::SupP, LabelA::SupM, LabelA::SupPi, LabelA::SupMi];

    pub fn name(self) -> &'static str {
        match self {
            LabelA::L1 => "L1",
            LabelA::L2 => "L2",
            LabelA::SupP => "SUP_P",
            LabelA::SupM => "SUP_M",
            LabelA::SupPi => "SUP_PI",
            LabelA::SupMi => "SUP_MI",
        }
    }

    pub fn ket(self) -> Vector2<C64> {
        let sup = |theta: f64| Vector2::new(c(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, theta));
        match self {
            LabelA::L1 => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
            LabelA::L2 => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            LabelA::SupP => sup(0.0),
            LabelA::SupM => sup(PI),
            LabelA::SupPi => sup(FRAC_PI_2),
            LabelA::SupMi => sup(-FRAC_PI_2),
        }
    }

    fn basis(self) -> usize {
        LabelA::ALL.iter().position(|&l| l == self).unwrap() / 2
    }
}

impl LabelB {
    pub const ALL: [LabelB; 6] = [LabelB::H, LabelB::V, LabelB::D, LabelB::A, LabelB::R, LabelB::L];

    pub fn name(self) -> &'static str {
        match self {
            LabelB::H => "H",
            LabelB::V => "V",
            LabelB::D => "D",
            LabelB::A => "A",
            LabelB::R => "R",
            LabelB::L => "L",
        }
    }

    pub fn ket(self) -> Vector2<C64> {
        let h = FRAC_1_SQRT_2;
        match self {
            LabelB::H => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
            LabelB::V => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            LabelB::D => Vector2::new(c(h, 0.0), c(h, 0.0)),
            LabelB::A => Vector2::new(c(h, 0.0), c(-h, 0.0)),
            LabelB::R => Vector2::new(c(h, 0.0), c(0.0, h)),
            LabelB::L => Vector2::new(c(h, 0.0), c(0.0, -h)),
        }
    }

    fn basis(self) -> usize {
        LabelB::ALL.iter().position(|&l| l == self).unwrap() / 2
    }
}

impl fmt::Display for LabelA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for LabelB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelA {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LabelA::ALL
            .into_iter()
            .find(|l| l.name() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown photon-A setting '{s}'")))
    }
}

impl FromStr for LabelB {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LabelB::ALL
            .into_iter()
            .find(|l| l.name() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown photon-B setting '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjectorSetting {
    pub a: LabelA,
    pub b: LabelB,
}

impl ProjectorSetting {
    /// Index 0..9 of the complete-basis group (A basis × B basis) the setting belongs to.
    pub fn group(&self) -> usize {
        3 * self.a.basis() + self.b.basis()
    }

    /// Position in [`all_settings`].
    pub fn index(&self) -> usize {
        6 * LabelA::ALL.iter().position(|&l| l == self.a).unwrap()
            + LabelB::ALL.iter().position(|&l| l == self.b).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub setting: ProjectorSetting,
    pub probability: f64,
    pub counts: Option<u64>,
}

/// All 36 settings, photon A outer.
pub fn all_settings() -> Vec<ProjectorSetting> {
    LabelA::ALL
        .iter()
        .flat_map(|&a| LabelB::ALL.iter().map(move |&b| ProjectorSetting { a, b }))
        .collect()
}

fn outer(v: &Vector2<C64>) -> Mat2 {
    v * v.adjoint()
}

/// P_A ⊗ P_B in the fixed basis.
pub fn projector(setting: ProjectorSetting) -> Mat4 {
    kron2(&outer(&setting.a.ket()), &outer(&setting.b.ket()))
}

const CLAMP_TOL: f64 = 1e-12;

/// Re tr(ρ P) for all 36 settings.
pub fn born_probabilities(rho: &DensityMatrix) -> Result<Vec<MeasurementRecord>> {
    rho.check()?;
    all_settings()
        .into_iter()
        .map(|setting| {
            let p = trace_re(&(rho.matrix() * projector(setting)));
            if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&p) {
                return Err(Error::Numerical(format!("probability {p} outside [0,1] for {setting:?}")));
            }
            Ok(MeasurementRecord { setting, probability: p.clamp(0.0, 1.0), counts: None })
        })
        .collect()
}

/// Poisson(shots·p) counts per setting from a ChaCha stream seeded with `seed`.
pub fn simulate_counts(records: &[MeasurementRecord], shots_per_setting: u64, seed: u64) -> Result<Vec<MeasurementRecord>> {
    if shots_per_setting == 0 {
        return invalid("shots_per_setting must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .iter()
        .map(|r| {
            if !(0.0..=1.0).contains(&r.probability) {
                return invalid(format!("probability {} outside [0,1]", r.probability));
            }
            let mean = shots_per_setting as f64 * r.probability;
            let counts = if mean > 0.0 {
                let d = Poisson::new(mean).map_err(|e| Error::Numerical(e.to_string()))?;
                d.sample(&mut rng) as u64
            } else {
                0
            };
            Ok(MeasurementRecord { counts: Some(counts), ..*r })
        })
        .collect()
}

/// Probability estimates ordered as [`all_settings`].
///
/// Counts are divided by their complete-basis group total; records without
/// counts use their probabilities, renormalized the same way.
pub fn estimated_probabilities(records: &[MeasurementRecord]) -> Result<[f64; 36]> {
    let mut seen = [false; 36];
    let mut raw = [0.0; 36];
    let use_counts = records.iter().all(|r| r.counts.is_some());
    for r in records {
        let i = r.setting.index();
        if seen[i] {
            return invalid(format!("duplicate record for {}/{}", r.setting.a, r.setting.b));
        }
        seen[i] = true;
        raw[i] = if use_counts { r.counts.unwrap() as f64 } else { r.probability };
        if !(raw[i].is_finite() && raw[i] >= 0.0) {
            return invalid(format!("bad value {} for {}/{}", raw[i], r.setting.a, r.setting.b));
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        let s = all_settings()[i];
        return invalid(format!("missing setting {}/{}", s.a, s.b));
    }
    if raw.iter().all(|&v| v == 0.0) {
        return invalid("all records are zero");
    }
    let settings = all_settings();
    let mut sums = [0.0; 9];
    for (s, v) in settings.iter().zip(&raw) {
        sums[s.group()] += v;
    }
    let mut out = [0.0; 36];
    for (i, s) in settings.iter().enumerate() {
        let g = sums[s.group()];
        if g <= 0.0 {
            return invalid(format!("complete-basis group of {}/{} has no events", s.a, s.b));
        }
        out[i] = raw[i] / g;
    }
    Ok(out)
}
