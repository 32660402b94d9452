//! Two-photon hybrid entangled states and their topology.
//!
//! Photon A carries orbital angular momentum (two LG modes), photon B carries
//! polarization. The pipeline is
//! state → simulated tomography → reconstruction → conditional Stokes field
//! → skyrme number, sphere coverage and entanglement metrics → decay sweeps.
//!
//! ```
//! use qskyrm::{Grid2D, HybridStateSpec, build_pure_state, stokes_field, normalize_local, skyrme_number};
//!
//! let spec = HybridStateSpec::new(1, 0, std::f64::consts::FRAC_1_SQRT_2, 0.0, 1.0).unwrap();
//! let rho = build_pure_state(&spec);
//! let grid = Grid2D::new(8.0, 129).unwrap();
//! let field = normalize_local(&stokes_field(&rho, &spec, &grid, false).unwrap());
//! let n = skyrme_number(&field).unwrap();
//! assert!((n - 1.0).abs() < 0.05);
//! ```

pub mod error;
pub mod io;
pub mod lgmodes;
mod linalg;
pub mod measure;
pub mod metrics;
pub mod state;
pub mod stokesfield;
pub mod sweep;
pub mod tomo;
pub mod topology;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use lgmodes::{amplitude_ratio, lg_amplitude, ComplexAmplitude, Grid2D, ModeIndex};
pub use measure::{
    all_settings, born_probabilities, projector, simulate_counts, LabelA, LabelB,
    MeasurementRecord, ProjectorSetting,
};
pub use metrics::{concurrence, fidelity, metric_report, purity, MetricReport};
pub use state::{
    apply_decay, build_pure_state, decay_coordinate_map, depolarize, grating_alpha,
    grating_amplitude, DensityMatrix, HybridStateSpec, Mat4,
};
pub use stokesfield::{conditional_polarization_state, normalize_local, stokes_field, StokesField};
pub use sweep::{default_alphas, run_decay_sweep, DecaySweepRow, Noise};
pub use tomo::{project_physical, reconstruct, reconstruct_with, ReconstructOptions, TomographyResult};
pub use topology::{
    analyze, auto_grid, closed_form_skyrme, coverage, crossover_radius, n_theory, sigma_z,
    skyrme_number, stereographic, transform_field, CoverageReport, SpherePoint, TopologyReport,
};
