//! Field checkpoints: a JSON header plus a raw `f64` payload in a sidecar
//! file. Each complex value is stored as `(re, im)`; fields are laid out mode
//! by mode with the vertical index innermost.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{make_grid, GridConfig, HalfStripGrid};
use crate::solver2d::State2D;
use crate::solver3d::State3D;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const CHECKPOINT_FORMAT: &str = "shercliff-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub name: String,
    /// `[n_kx, n_ky, n_z, 2]`
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub endianness: String,
    /// `state2d` or `state3d`.
    pub state: String,
    pub grid: GridConfig,
    pub t0: f64,
    pub step_index: u64,
    pub dt: f64,
    pub scalars: BTreeMap<String, f64>,
    pub fields: Vec<FieldEntry>,
    /// Payload file name, relative to the header.
    pub payload: String,
}

/// Header and fields as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub fields: Vec<Vec<Complex64>>,
}

fn payload_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bin")
}

fn entry(name: &str, f: &SpectralField) -> FieldEntry {
    FieldEntry {
        name: name.into(),
        shape: vec![f.nkx(), f.nky(), f.nz(), 2],
    }
}

pub fn write_checkpoint(
    path: &Path,
    mut header: CheckpointHeader,
    fields: &[&[Complex64]],
) -> Result<()> {
    let payload = payload_path(path);
    header.payload = payload
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Checkpoint(format!("bad checkpoint path {}", path.display())))?
        .to_string();
    header.format = CHECKPOINT_FORMAT.into();
    header.version = CHECKPOINT_VERSION;
    header.endianness = "little".into();
    if header.fields.len() != fields.len() {
        return Err(Error::Checkpoint("field list and header disagree".into()));
    }
    let mut bytes = Vec::new();
    for (e, f) in header.fields.iter().zip(fields) {
        if e.shape.iter().product::<usize>() != 2 * f.len() {
            return Err(Error::Checkpoint(format!(
                "field {} does not match its shape",
                e.name
            )));
        }
        bytes.reserve(16 * f.len());
        for c in f.iter() {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    std::fs::write(&payload, bytes)?;
    std::fs::write(path, serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    let header: CheckpointHeader =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!(
            "unknown format {:?}",
            header.format
        )));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "version {} is not supported (expected {CHECKPOINT_VERSION})",
            header.version
        )));
    }
    let decode: fn([u8; 8]) -> f64 = match header.endianness.as_str() {
        "little" => f64::from_le_bytes,
        "big" => f64::from_be_bytes,
        other => {
            return Err(Error::Checkpoint(format!(
                "unknown endianness tag {other:?}"
            )))
        }
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    let bytes = std::fs::read(dir.join(&header.payload))?;
    let expected: usize = header
        .fields
        .iter()
        .map(|e| 8 * e.shape.iter().product::<usize>())
        .sum();
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "payload has {} bytes, header declares {expected}",
            bytes.len()
        )));
    }
    let mut fields = Vec::with_capacity(header.fields.len());
    let mut at = 0;
    for e in &header.fields {
        let n = e.shape.iter().product::<usize>() / 2;
        let mut f = Vec::with_capacity(n);
        for _ in 0..n {
            let re = decode(bytes[at..at + 8].try_into().unwrap());
            let im = decode(bytes[at + 8..at + 16].try_into().unwrap());
            f.push(Complex64::new(re, im));
            at += 16;
        }
        fields.push(f);
    }
    Ok(Checkpoint { header, fields })
}

fn blank_header(
    state: &str,
    grid: &HalfStripGrid,
    t0: f64,
    step_index: u64,
    dt: f64,
) -> CheckpointHeader {
    CheckpointHeader {
        format: String::new(),
        version: 0,
        endianness: String::new(),
        state: state.into(),
        grid: grid.config(),
        t0,
        step_index,
        dt,
        scalars: BTreeMap::new(),
        fields: Vec::new(),
        payload: String::new(),
    }
}

pub fn save_state2d(state: &State2D, path: &Path) -> Result<()> {
    let mut h = blank_header(
        "state2d",
        state.u.grid(),
        state.t0,
        state.step_index,
        state.dt,
    );
    h.scalars
        .insert("cum_dissipation".into(), state.cum_dissipation);
    h.fields.push(entry("u", &state.u));
    let mut data: Vec<&[Complex64]> = vec![state.u.data()];
    if let Some(p) = &state.u_prev {
        h.fields.push(entry("u_prev", p));
        data.push(p.data());
    }
    write_checkpoint(path, h, &data)
}

fn field_of(
    grid: &Arc<HalfStripGrid>,
    ck: &Checkpoint,
    name: &str,
) -> Result<Option<SpectralField>> {
    match ck.header.fields.iter().position(|e| e.name == name) {
        None => Ok(None),
        Some(i) => {
            let shape = &ck.header.fields[i].shape;
            if shape[..] != [grid.nkx(), grid.nky(), grid.nz(), 2] {
                return Err(Error::Checkpoint(format!(
                    "field {name} has shape {shape:?}, grid disagrees"
                )));
            }
            Ok(Some(SpectralField::from_data(grid, ck.fields[i].clone())?))
        }
    }
}

fn scalar(ck: &Checkpoint, name: &str) -> Result<f64> {
    ck.header
        .scalars
        .get(name)
        .copied()
        .ok_or_else(|| Error::Checkpoint(format!("missing scalar {name}")))
}

pub fn load_state2d(path: &Path) -> Result<State2D> {
    let ck = read_checkpoint(path)?;
    if ck.header.state != "state2d" {
        return Err(Error::Checkpoint(format!(
            "expected a state2d checkpoint, found {}",
            ck.header.state
        )));
    }
    let grid = Arc::new(make_grid(&ck.header.grid)?);
    let u =
        field_of(&grid, &ck, "u")?.ok_or_else(|| Error::Checkpoint("missing field u".into()))?;
    Ok(State2D {
        t0: ck.header.t0,
        step_index: ck.header.step_index,
        dt: ck.header.dt,
        u_prev: field_of(&grid, &ck, "u_prev")?,
        u,
        cum_dissipation: scalar(&ck, "cum_dissipation")?,
    })
}

pub fn save_state3d(state: &State3D, path: &Path) -> Result<()> {
    let mut h = blank_header(
        "state3d",
        state.u.grid(),
        state.t0,
        state.step_index,
        state.dt,
    );
    h.scalars.insert("rho0".into(), state.rho0);
    h.scalars.insert("cum_z".into(), state.cum_z);
    h.fields.push(entry("u", &state.u));
    h.fields.push(entry("v", &state.v));
    let mut data: Vec<&[Complex64]> = vec![state.u.data(), state.v.data()];
    if let Some((pu, pv)) = &state.prev {
        h.fields.push(entry("u_prev", pu));
        h.fields.push(entry("v_prev", pv));
        data.push(pu.data());
        data.push(pv.data());
    }
    write_checkpoint(path, h, &data)
}

pub fn load_state3d(path: &Path) -> Result<State3D> {
    let ck = read_checkpoint(path)?;
    if ck.header.state != "state3d" {
        return Err(Error::Checkpoint(format!(
            "expected a state3d checkpoint, found {}",
            ck.header.state
        )));
    }
    let grid = Arc::new(make_grid(&ck.header.grid)?);
    let get = |n: &str| field_of(&grid, &ck, n);
    let u = get("u")?.ok_or_else(|| Error::Checkpoint("missing field u".into()))?;
    let v = get("v")?.ok_or_else(|| Error::Checkpoint("missing field v".into()))?;
    let prev = match (get("u_prev")?, get("v_prev")?) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(Error::Checkpoint("only one previous field present".into())),
    };
    Ok(State3D {
        t0: ck.header.t0,
        step_index: ck.header.step_index,
        dt: ck.header.dt,
        u,
        v,
        prev,
        rho0: scalar(&ck, "rho0")?,
        cum_z: scalar(&ck, "cum_z")?,
    })
}
