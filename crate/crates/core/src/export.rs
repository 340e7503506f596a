//! Serialization of states, tables, and trajectories.
//!
//! CSV carries 17 significant digits, enough to reconstruct every f64
//! exactly. The binary format is a verbatim little-endian dump with a short
//! header and round-trips bit for bit. JSON documents carry a schema
//! version.

use std::io::{self, Read, Write};

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::dark::DarkTable;
use crate::dynamics::Trajectory;
use crate::grid::{Domain, PositionField};
use crate::observables::Sampled;
use crate::params::Params;
use crate::state::{Channel, TwoAtomState};

const LATTICE_MAGIC: &[u8; 4] = b"CDK1";
const FIELD_MAGIC: &[u8; 4] = b"CDF1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed binary snapshot: {0}")]
    Format(String),
}

/// Two-atom lattice amplitudes as CSV rows (channel, m, n, re, im).
pub fn state_to_csv<W: Write>(state: &TwoAtomState, mut w: W) -> Result<(), ExportError> {
    writeln!(w, "channel,m,n,re,im")?;
    let mm = state.m_max() as i32;
    for ch in Channel::ALL {
        for m in -mm..=mm {
            for n in -mm..=mm {
                let a = state.amp(ch, m, n);
                writeln!(w, "{},{m},{n},{:.16e},{:.16e}", ch.index() + 1, a.re, a.im)?;
            }
        }
    }
    Ok(())
}

/// Asymptotic-table export. Quadrant cells come straight out of the
/// recurrence; the rest of the plane is its reflection.
pub fn table_to_csv<W: Write>(table: &DarkTable, mut w: W) -> Result<(), ExportError> {
    writeln!(w, "channel,m,n,re,im,provenance")?;
    let mm = table.m_max() as i32;
    for ch in Channel::ALL {
        for m in -mm..=mm {
            for n in -mm..=mm {
                let v = table.amplitude(ch, m, n);
                let provenance = match ch {
                    Channel::Photon => "identically-zero",
                    _ if m >= 0 && n >= 0 => "recurrence",
                    _ => "reflection",
                };
                writeln!(w, "{},{m},{n},{:.16e},{:.16e},{provenance}", ch.index() + 1, v, 0.0)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    schema_version: u32,
    model: String,
    omega: f64,
    kappa: f64,
    delta: f64,
    q1: f64,
    q2: f64,
    phi: f64,
    tolerance: f64,
    steps: usize,
    rejected_steps: usize,
    max_boundary_population: f64,
    tau: Vec<f64>,
    survival: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

/// Survival summary of a trajectory as a versioned JSON document carrying
/// everything needed to re-run it.
pub fn trajectory_to_json<S: Sampled, W: Write>(
    traj: &Trajectory<S>,
    params: &Params,
    w: W,
) -> Result<(), ExportError> {
    let doc = TrajectoryDoc {
        schema_version: 1,
        model: traj.meta.model.to_string(),
        omega: params.omega,
        kappa: params.kappa,
        delta: params.delta,
        q1: params.q1,
        q2: params.q2,
        phi: params.phi,
        tolerance: traj.meta.tolerance,
        steps: traj.meta.steps,
        rejected_steps: traj.meta.rejected_steps,
        max_boundary_population: traj.meta.max_boundary_population,
        tau: traj.samples.iter().map(|s| s.time()).collect(),
        survival: traj.samples.iter().map(|s| s.survival()).collect(),
        note: traj.truncation_flagged().then_some("boundary population exceeded threshold"),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Per-sample survival and boundary occupation as CSV, preceded by a
/// `# key = value` provenance block.
pub fn trajectory_to_csv<S: Sampled, W: Write>(
    traj: &Trajectory<S>,
    params: &Params,
    boundary: &[f64],
    mut w: W,
) -> Result<(), ExportError> {
    writeln!(w, "# model = {}", traj.meta.model)?;
    writeln!(w, "# omega = {}", params.omega)?;
    writeln!(w, "# kappa = {}", params.kappa)?;
    writeln!(w, "# delta = {}", params.delta)?;
    writeln!(w, "# q1 = {}", params.q1)?;
    writeln!(w, "# q2 = {}", params.q2)?;
    writeln!(w, "# phi = {}", params.phi)?;
    writeln!(w, "# tolerance = {}", traj.meta.tolerance)?;
    writeln!(w, "tau,survival,boundary_population")?;
    for (s, b) in traj.samples.iter().zip(boundary) {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", s.time(), s.survival(), b)?;
    }
    Ok(())
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_amps<W: Write>(w: &mut W, amps: &[C64]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(amps.len() * 16);
    for a in amps {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    w.write_all(&buf)
}

fn read_exact_f64<R: Read>(r: &mut R) -> Result<f64, ExportError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_amps<R: Read>(r: &mut R, count: usize) -> Result<Vec<C64>, ExportError> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect())
}

/// Lattice snapshot: magic, m_max, τ, amplitudes in storage order.
pub fn state_to_bin<W: Write>(state: &TwoAtomState, mut w: W) -> Result<(), ExportError> {
    w.write_all(LATTICE_MAGIC)?;
    w.write_all(&(state.m_max() as u32).to_le_bytes())?;
    write_f64(&mut w, state.time)?;
    write_amps(&mut w, state.amps().as_slice().expect("standard layout"))?;
    Ok(())
}

pub fn state_from_bin<R: Read>(mut r: R) -> Result<TwoAtomState, ExportError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != LATTICE_MAGIC {
        return Err(ExportError::Format("bad lattice magic".into()));
    }
    let mut mb = [0u8; 4];
    r.read_exact(&mut mb)?;
    let m_max = u32::from_le_bytes(mb) as usize;
    let time = read_exact_f64(&mut r)?;
    let s = 2 * m_max + 1;
    let amps = read_amps(&mut r, 3 * s * s)?;
    let arr = ndarray::Array3::from_shape_vec((3, s, s), amps)
        .map_err(|e| ExportError::Format(e.to_string()))?;
    Ok(TwoAtomState::from_amps(m_max, time, arr))
}

/// Field snapshot: magic, G, domain tag (0 ring, 1 trap with ν), τ,
/// row-major complex pairs.
pub fn field_to_bin<W: Write>(field: &PositionField, mut w: W) -> Result<(), ExportError> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(field.g() as u32).to_le_bytes())?;
    match field.domain() {
        Domain::Periodic => {
            w.write_all(&[0u8])?;
            write_f64(&mut w, 0.0)?;
        }
        Domain::Trap { nu } => {
            w.write_all(&[1u8])?;
            write_f64(&mut w, nu)?;
        }
    }
    write_f64(&mut w, field.time)?;
    write_amps(&mut w, field.psi().as_slice().expect("standard layout"))?;
    Ok(())
}

pub fn field_from_bin<R: Read>(mut r: R) -> Result<PositionField, ExportError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(ExportError::Format("bad field magic".into()));
    }
    let mut gb = [0u8; 4];
    r.read_exact(&mut gb)?;
    let g = u32::from_le_bytes(gb) as usize;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let nu = read_exact_f64(&mut r)?;
    let domain = match tag[0] {
        0 => Domain::Periodic,
        1 => Domain::Trap { nu },
        t => return Err(ExportError::Format(format!("unknown domain tag {t}"))),
    };
    let time = read_exact_f64(&mut r)?;
    let amps = read_amps(&mut r, 3 * g * g)?;
    let arr = ndarray::Array3::from_shape_vec((3, g, g), amps)
        .map_err(|e| ExportError::Format(e.to_string()))?;
    let mut f = PositionField::from_parts(domain, arr);
    f.time = time;
    Ok(f)
}
