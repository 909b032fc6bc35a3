use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::diagnostics::{Diagnostics, PhaseSpaceSnapshot};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// `t,energy` rows.
pub fn energy_csv(diag: &Diagnostics) -> String {
    let mut s = String::from("t,energy\n");
    for e in &diag.energy {
        let _ = writeln!(s, "{},{}", num(e.t), num(e.energy));
    }
    s
}

/// `t,x,rho` rows, one block per snapshot followed by the final state.
pub fn rho_csv(diag: &Diagnostics) -> String {
    let mut s = String::from("t,x,rho\n");
    let blocks = diag
        .snapshots
        .iter()
        .map(|snap| (snap.t, &snap.rho))
        .chain(std::iter::once((diag.final_time, &diag.final_rho)));
    for (t, rho) in blocks {
        for (i, x) in rho.grid().nodes().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(t), num(x), num(rho[i]));
        }
    }
    s
}

/// `x,v,f` rows.
pub fn phase_space_csv(p: &PhaseSpaceSnapshot) -> String {
    let mut s = String::from("x,v,f\n");
    for (i, &x) in p.x.iter().enumerate() {
        for (j, &v) in p.v.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(x), num(v), num(p.f[i * p.v.len() + j]));
        }
    }
    s
}

/// Writes the energy series to `path`.
pub fn emit_csv(diag: &Diagnostics, path: &Path) -> Result<()> {
    write(path, energy_csv(diag))
}

/// Writes `energy.csv`, `rho.csv` and, when reconstructed, `f.csv` into `dir`.
pub fn emit_all(diag: &Diagnostics, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    emit_csv(diag, &dir.join("energy.csv"))?;
    write(&dir.join("rho.csv"), rho_csv(diag))?;
    if let Some(p) = &diag.phase_space {
        write(&dir.join("f.csv"), phase_space_csv(p))?;
    }
    Ok(())
}
