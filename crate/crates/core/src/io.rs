//! CSV and JSON writers for diagnostics, snapshots and grids.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DiagRecord, GridField, ParticleField, Symmetry};

pub const DIAG_SCHEMA: &str = "# axivort-diag v1";
pub const SNAPSHOT_SCHEMA: &str = "# axivort-snapshot v1";
pub const GRID_SCHEMA: &str = "# axivort-grid v1";

pub fn write_diag_csv(mut w: impl Write, records: &[DiagRecord]) -> Result<()> {
    writeln!(w, "{DIAG_SCHEMA}")?;
    writeln!(w, "{}", DiagRecord::CSV_HEADER)?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("diagnostics CSV line {line}: {msg}"))
}

/// Reads back what [`write_diag_csv`] wrote. The schema line and column
/// header must match exactly.
pub fn read_diag_csv(r: impl BufRead) -> Result<Vec<DiagRecord>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(l) if l.trim_end() == DIAG_SCHEMA => {}
        other => return Err(bad(1, format!("expected {DIAG_SCHEMA:?}, found {other:?}"))),
    }
    match lines.next().transpose()? {
        Some(l) if l.trim_end() == DiagRecord::CSV_HEADER => {}
        other => return Err(bad(2, format!("unexpected header {other:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(i + 3, e))?;
        if v.len() != 11 {
            return Err(bad(i + 3, format!("{} columns, expected 11", v.len())));
        }
        out.push(DiagRecord {
            t: v[0],
            e_total: v[1],
            e_plus: v[2],
            e_inter: v[3],
            impulse_plus: v[4],
            mass_plus: v[5],
            l2_plus: v[6],
            z_c: v[7],
            tau_fit: v[8],
            dist_fit: v[9],
            u_max: v[10],
        });
    }
    Ok(out)
}

pub fn write_particles_csv(mut w: impl Write, f: &ParticleField) -> Result<()> {
    writeln!(w, "{SNAPSHOT_SCHEMA}")?;
    writeln!(w, "r,z,xi,vol")?;
    for p in f.particles() {
        writeln!(w, "{:e},{:e},{:e},{:e}", p.pos.r, p.pos.z, p.xi, p.vol)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub symmetry: Symmetry,
    pub particles: usize,
    pub config_hash: String,
}

/// Writes `<stem>.csv` and its `<stem>.json` sidecar into `dir`, returning
/// the CSV path.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    t: f64,
    f: &ParticleField,
    config_hash: &str,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    write_particles_csv(std::io::BufWriter::new(fs::File::create(&csv)?), f)?;
    let meta = SnapshotMeta {
        t,
        symmetry: f.symmetry(),
        particles: f.len(),
        config_hash: config_hash.to_string(),
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(csv)
}

/// Cell centres and values, row by row in `z`.
pub fn write_grid_csv(mut w: impl Write, g: &GridField) -> Result<()> {
    writeln!(w, "{GRID_SCHEMA}")?;
    writeln!(w, "r,z,xi")?;
    for (i, j, xi) in g.cells() {
        let c = g.center(i, j);
        writeln!(w, "{:e},{:e},{:e}", c.r, c.z, xi)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_mismatch_names_the_line() {
        let text = format!("{DIAG_SCHEMA}\nt,E_total\n");
        let err = read_diag_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = read_diag_csv("t,E\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn nan_columns_survive() {
        let r = DiagRecord {
            t: 0.5,
            e_total: 1.0,
            e_plus: 2.0,
            e_inter: 3.0,
            impulse_plus: 4.0,
            mass_plus: 5.0,
            l2_plus: 6.0,
            z_c: -7.0,
            tau_fit: f64::NAN,
            dist_fit: f64::NAN,
            u_max: 1e-300,
        };
        let mut buf = Vec::new();
        write_diag_csv(&mut buf, &[r]).unwrap();
        let back = read_diag_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].tau_fit.is_nan());
        assert_eq!(back[0].z_c, -7.0);
        assert_eq!(back[0].u_max, 1e-300);
    }
}
