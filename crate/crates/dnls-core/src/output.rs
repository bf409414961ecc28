//! File formats: CSV emitters, the binary frame dump, and the run manifest.
//!
//! CSV uses '.' decimals, no locale, and 17 significant digits so every
//! binary64 value round-trips exactly. All JSON blocks carry a
//! schema_version field. The manifest hash is SHA-256 over the bytes of
//! every emitted CSV/JSON artifact in sorted path order (the manifest
//! itself excluded, since it holds the timestamps).

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{DnlsError, Result};
use crate::evolve::{Equation, TrajectoryFrame};
use crate::grid::{ComplexField, GridKind, GridSpec};
use crate::modulation::ModulationFit;

/// 17 significant digits: exact binary64 round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,mass,energy_E,energy_ED,momentum_P,momentum_PD,virial_I,virial_J,grad_norm,dt_used";

pub fn diagnostics_csv<'a>(records: impl IntoIterator<Item = &'a DiagnosticsRecord>) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let cols = [
            r.t,
            r.mass,
            r.energy_e,
            r.energy_ed,
            r.momentum_p,
            r.momentum_pd,
            r.virial_i,
            r.virial_j,
            r.grad_norm,
            r.dt_used,
        ];
        let row: Vec<String> = cols.iter().map(|&v| format_float(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// CSV of ground-state samples: x, Q, Qx.
pub fn ground_state_csv(xs: &[f64], q: &[f64], qx: &[f64]) -> Vec<u8> {
    let mut out = String::from("x,Q,Qx\n");
    for i in 0..xs.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            format_float(xs[i]),
            format_float(q[i]),
            format_float(qx[i])
        ));
    }
    out.into_bytes()
}

/// Scalar invariants block emitted with the ground state.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroundStateInvariants {
    pub schema_version: u32,
    pub mass: f64,
    pub grad_norm_sq: f64,
    pub l4_norm_pow4: f64,
    pub l6_norm_pow6: f64,
    pub energy: f64,
    pub gn_value: f64,
}

/// Modulation CSV: t, lambda, gamma0, x0, residual_h1, lambda_times_P.
pub fn modulation_csv(rows: &[(f64, ModulationFit)]) -> Vec<u8> {
    let mut out = String::from("t,lambda,gamma0,x0,residual_h1,lambda_times_P\n");
    for (t, fit) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(*t),
            format_float(fit.lambda),
            format_float(fit.gamma0),
            format_float(fit.x0),
            format_float(fit.residual_h1),
            format_float(fit.momentum_check)
        ));
    }
    out.into_bytes()
}

/// JSON header line of the binary frame dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameDumpHeader {
    pub schema_version: u32,
    pub kind: String,
    pub half_width: f64,
    pub n_points: usize,
    pub equation: Equation,
}

impl FrameDumpHeader {
    pub fn new(grid: GridSpec, equation: Equation) -> Self {
        Self {
            schema_version: 1,
            kind: match grid.kind() {
                GridKind::PeriodicLine => "periodic_line".to_string(),
                GridKind::DirichletHalfLine => "dirichlet_half_line".to_string(),
            },
            half_width: grid.half_width(),
            n_points: grid.n_points(),
            equation,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        match self.kind.as_str() {
            "periodic_line" => GridSpec::periodic(self.half_width, self.n_points),
            "dirichlet_half_line" => {
                GridSpec::dirichlet_half_line(self.half_width, self.n_points)
            }
            other => Err(DnlsError::Config(format!("unknown grid kind '{other}'"))),
        }
    }
}

/// Write the frame dump: one JSON header line, then per frame the time as a
/// little-endian f64 followed by n interleaved re/im little-endian f64 pairs.
pub fn write_frame_dump(
    mut w: impl Write,
    grid: GridSpec,
    equation: Equation,
    frames: &[TrajectoryFrame],
) -> Result<()> {
    let header = FrameDumpHeader::new(grid, equation);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for f in frames {
        w.write_all(&f.t.to_le_bytes())?;
        for z in f.state.values() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a frame dump back as (header, [(t, state)]).
pub fn read_frame_dump(mut r: impl BufRead) -> Result<(FrameDumpHeader, Vec<(f64, ComplexField)>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FrameDumpHeader = serde_json::from_str(line.trim_end())?;
    let grid = header.grid()?;
    let n = grid.n_points();
    let mut frames = Vec::new();
    let mut buf = vec![0u8; 8];
    loop {
        match r.read_exact(&mut buf) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let t = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let mut payload = vec![0u8; 16 * n];
        r.read_exact(&mut payload)?;
        let values: Vec<Complex64> = payload
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        frames.push((t, ComplexField::new(grid, values)?));
    }
    Ok((header, frames))
}

/// Reproducibility manifest: one per output directory, hash over all
/// emitted CSV/JSON bytes.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_echo: serde_json::Value,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub artifact_paths: Vec<String>,
    pub content_hash_sha256: String,
}

/// Hash artifacts in sorted path order.
pub fn content_hash(artifacts: &[(String, Vec<u8>)]) -> String {
    let mut sorted: Vec<&(String, Vec<u8>)> = artifacts.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut hasher = Sha256::new();
    for (_, bytes) in sorted {
        hasher.update(bytes);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(
        config_echo: serde_json::Value,
        started_unix_s: u64,
        finished_unix_s: u64,
        artifacts: &[(String, Vec<u8>)],
    ) -> Self {
        Self {
            schema_version: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo,
            started_unix_s,
            finished_unix_s,
            artifact_paths: artifacts.iter().map(|(p, _)| p.clone()).collect(),
            content_hash_sha256: content_hash(artifacts),
        }
    }
}
