//! File formats: JSON for specs, density matrices and reports; CSV for
//! counts, Stokes fields, stereographic points and sweeps.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{invalid, Error, Result};
use crate::lgmodes::Grid2D;
use crate::measure::{LabelA, LabelB, MeasurementRecord, ProjectorSetting};
use crate::state::{DensityMatrix, HybridStateSpec, Mat4};
use crate::stokesfield::StokesField;
use crate::sweep::DecaySweepRow;
use crate::topology::stereographic;
use crate::C64;

pub const BASIS_LABELS: [&str; 4] = ["l1H", "l1V", "l2H", "l2V"];

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    serde_json::from_str(&s).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

pub fn write_spec(path: &Path, spec: &HybridStateSpec) -> Result<()> {
    write_json(path, spec)
}

pub fn read_spec(path: &Path) -> Result<HybridStateSpec> {
    let s: HybridStateSpec = read_json(path)?;
    s.validate()?;
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct Entry {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct RhoDoc {
    basis: Vec<String>,
    rho: Vec<Vec<Entry>>,
}

pub fn density_to_json(rho: &Mat4) -> Result<String> {
    let doc = RhoDoc {
        basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
        rho: (0..4)
            .map(|r| (0..4).map(|c| Entry { re: rho[(r, c)].re, im: rho[(r, c)].im }).collect())
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "{}", density_to_json(rho.matrix())?)?;
    Ok(())
}

/// Reads a density matrix and checks it is a physical state.
pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    let doc: RhoDoc = read_json(path)?;
    if doc.basis != BASIS_LABELS {
        return invalid(format!("{}: basis must be {:?}", path.display(), BASIS_LABELS));
    }
    if doc.rho.len() != 4 || doc.rho.iter().any(|r| r.len() != 4) {
        return invalid(format!("{}: rho must be 4x4", path.display()));
    }
    let m = Mat4::from_fn(|r, c| C64::new(doc.rho[r][c].re, doc.rho[r][c].im));
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return invalid(format!("{}: non-finite entry", path.display()));
    }
    DensityMatrix::new(m)
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    setting_a: LabelA,
    setting_b: LabelB,
    probability: f64,
    counts: Option<u64>,
}

pub fn write_counts(path: &Path, records: &[MeasurementRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(CountRow { setting_a: r.setting.a, setting_b: r.setting.b, probability: r.probability, counts: r.counts })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts(path: &Path) -> Result<Vec<MeasurementRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: Vec<CountRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    rows.into_iter()
        .map(|c| {
            if !(0.0..=1.0).contains(&c.probability) {
                return invalid(format!("probability {} outside [0,1]", c.probability));
            }
            Ok(MeasurementRecord { setting: ProjectorSetting { a: c.setting_a, b: c.setting_b }, probability: c.probability, counts: c.counts })
        })
        .collect()
}

/// Sidecar describing a Stokes CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesMeta {
    pub grid: Grid2D,
    pub normalized: bool,
    pub qwp: bool,
    pub spec: Option<HybridStateSpec>,
}

pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn stokes_meta_path(path: &Path) -> PathBuf {
    sidecar(path, ".meta.json")
}

#[derive(Serialize, Deserialize)]
struct StokesRow {
    x: f64,
    y: f64,
    s0: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    valid: u8,
}

/// Writes true (not envelope-relative) values plus the `.meta.json` sidecar.
pub fn write_stokes(path: &Path, field: &StokesField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..field.s0.len() {
        let (x, y) = field.position(i);
        let s = field.sample(i);
        w.serialize(StokesRow { x, y, s0: s[0], s1: s[1], s2: s[2], s3: s[3], valid: field.valid[i] as u8 })?;
    }
    w.flush()?;
    let meta = StokesMeta { grid: field.grid, normalized: field.normalized, qwp: field.qwp, spec: field.spec };
    write_json(&stokes_meta_path(path), &meta)
}

/// Reads a Stokes CSV. The grid comes from the sidecar when present and is
/// otherwise inferred from the coordinates; rows must be in grid order.
pub fn read_stokes(path: &Path) -> Result<StokesField> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: Vec<StokesRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let meta_path = stokes_meta_path(path);
    let meta: Option<StokesMeta> = if meta_path.exists() { Some(read_json(&meta_path)?) } else { None };
    let grid = match &meta {
        Some(m) => m.grid,
        None => {
            let n = (rows.len() as f64).sqrt().round() as usize;
            let hw = rows.iter().map(|r| r.x.abs()).fold(0.0, f64::max);
            Grid2D::new(hw, n)?
        }
    };
    if rows.len() != grid.len() {
        return invalid(format!("{}: expected {} rows, found {}", path.display(), grid.len(), rows.len()));
    }
    let tol = 1e-6 * grid.spacing();
    for (i, row) in rows.iter().enumerate() {
        let (x, y) = (grid.coord(i % grid.samples_per_axis), grid.coord(i / grid.samples_per_axis));
        if (row.x - x).abs() > tol || (row.y - y).abs() > tol {
            return invalid(format!("{}: row {} is not at grid point ({x}, {y})", path.display(), i + 2));
        }
    }
    let s = [
        rows.iter().map(|r| r.s0).collect(),
        rows.iter().map(|r| r.s1).collect(),
        rows.iter().map(|r| r.s2).collect(),
        rows.iter().map(|r| r.s3).collect(),
    ];
    let valid = rows.iter().map(|r| r.valid != 0).collect();
    let (normalized, qwp) = meta.as_ref().map_or((false, false), |m| (m.normalized, m.qwp));
    let mut field = StokesField::from_samples(grid, s, Some(valid), normalized, qwp, None)?;
    field.spec = meta.and_then(|m| m.spec);
    Ok(field)
}

#[derive(Serialize)]
struct StereoRow {
    x: f64,
    y: f64,
    z: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    s0: f64,
}

/// Projects every sample position, in units of `length_scale`, onto the
/// sphere and writes it with its Stokes values.
pub fn write_stereographic(path: &Path, field: &StokesField, length_scale: f64) -> Result<()> {
    if !(length_scale.is_finite() && length_scale > 0.0) {
        return invalid(format!("length scale must be positive, got {length_scale}"));
    }
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..field.s0.len() {
        let (x, y) = field.position(i);
        let p = stereographic(x / length_scale, y / length_scale);
        let s = field.sample(i);
        w.serialize(StereoRow { x: p.x, y: p.y, z: p.z, s1: s[1], s2: s[2], s3: s[3], s0: s[0] })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SweepRow {
    alpha: f64,
    fidelity: f64,
    concurrence: f64,
    n_numeric: f64,
    n_closed_form: f64,
    half_width: f64,
}

pub fn write_sweep(path: &Path, rows: &[DecaySweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(SweepRow {
            alpha: r.alpha,
            fidelity: r.fidelity_vs_max,
            concurrence: r.concurrence,
            n_numeric: r.n_numeric,
            n_closed_form: r.n_closed_form,
            half_width: r.grid_half_width_used,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep(path: &Path) -> Result<Vec<DecaySweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let out = r
        .deserialize::<SweepRow>()
        .map(|row| {
            row.map(|s| DecaySweepRow {
                alpha: s.alpha,
                fidelity_vs_max: s.fidelity,
                concurrence: s.concurrence,
                n_numeric: s.n_numeric,
                n_closed_form: s.n_closed_form,
                grid_half_width_used: s.half_width,
            })
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(out)
}

/// Any serializable report as pretty JSON.
pub fn write_report<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

pub fn read_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    read_json(path)
}
