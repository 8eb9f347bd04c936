//! Trajectory files.
//!
//! Binary layout: one UTF-8 JSON header line terminated by `\n`, followed by
//! little-endian `f64` columns in this order: the time grid, all positions
//! (`[trajectory][record][particle]`) and, for underdamped runs, all
//! momenta in the same order.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::langevin::{Dynamics, LangevinConfig, TrajectoryEnsemble};
use crate::error::{Error, Result};

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub dynamics: Dynamics,
    pub n_trajectories: usize,
    pub n_records: usize,
    pub n_particles: usize,
    pub columns: Vec<String>,
    pub config: LangevinConfig,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Validation(format!("trajectory file: {e}"))
}

fn write_column<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

fn read_column<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes).map_err(io_err)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_binary<W: Write>(ensemble: &TrajectoryEnsemble, mut w: W) -> Result<()> {
    let mut columns = vec!["time".to_string(), "position".to_string()];
    if ensemble.has_momenta() {
        columns.push("momentum".into());
    }
    let header = TrajectoryHeader {
        schema_version: TRAJECTORY_SCHEMA_VERSION,
        config_hash: ensemble.config_hash(),
        dynamics: ensemble.dynamics,
        n_trajectories: ensemble.n_trajectories(),
        n_records: ensemble.n_records(),
        n_particles: ensemble.n_particles(),
        columns,
        config: ensemble.config.clone(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Validation(e.to_string()))?;
    w.write_all(line.as_bytes()).map_err(io_err)?;
    w.write_all(b"\n").map_err(io_err)?;
    write_column(&mut w, &ensemble.times)?;
    write_column(&mut w, ensemble.raw_positions())?;
    if let Some(p) = ensemble.raw_momenta() {
        write_column(&mut w, p)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_binary<R: Read>(r: R) -> Result<TrajectoryEnsemble> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line).map_err(io_err)?;
    let header: TrajectoryHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Validation(format!("trajectory header: {e}")))?;
    if header.schema_version != TRAJECTORY_SCHEMA_VERSION {
        return Err(Error::Validation(format!("unsupported trajectory schema version {}", header.schema_version)));
    }
    if header.config.hash() != header.config_hash {
        return Err(Error::Validation("trajectory header config hash does not match its config".into()));
    }
    if header.config.n_trajectories != header.n_trajectories || header.config.n_particles != header.n_particles {
        return Err(Error::Validation("trajectory header sizes disagree with its config".into()));
    }
    let len = header.n_trajectories * header.n_records * header.n_particles;
    let times = read_column(&mut r, header.n_records)?;
    let positions = read_column(&mut r, len)?;
    let momenta = match header.dynamics {
        Dynamics::Underdamped => Some(read_column(&mut r, len)?),
        Dynamics::Overdamped => None,
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io_err)? != 0 {
        return Err(Error::Validation("trailing bytes after trajectory data".into()));
    }
    TrajectoryEnsemble::from_parts(header.config, header.dynamics, times, positions, momenta)
}

/// Long-format CSV: `trajectory,record,time,particle,x[,p]`.
pub fn write_csv<W: Write>(ensemble: &TrajectoryEnsemble, mut w: W) -> Result<()> {
    let momenta = ensemble.has_momenta();
    let header = if momenta { "trajectory,record,time,particle,x,p\n" } else { "trajectory,record,time,particle,x\n" };
    w.write_all(header.as_bytes()).map_err(io_err)?;
    for t in 0..ensemble.n_trajectories() {
        for (r, time) in ensemble.times.iter().enumerate() {
            for j in 0..ensemble.n_particles() {
                let x = ensemble.position(t, r, j);
                let row = match ensemble.momentum(t, r, j) {
                    Some(p) => format!("{t},{r},{time:?},{j},{x:?},{p:?}\n"),
                    None => format!("{t},{r},{time:?},{j},{x:?}\n"),
                };
                w.write_all(row.as_bytes()).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}
