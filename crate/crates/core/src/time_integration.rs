//! Three-stage SSP Runge-Kutta stepping and run diagnostics.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Mesh2D, SolutionField};
use crate::physics::{pressure, specific_entropy, EquationParams};
use crate::sbp_ops::SbpOperator1D;

/// States the Runge-Kutta combinations can be formed on.
pub trait RkVector: Clone {
    /// `self + c (other - self)`
    fn toward(&self, other: &Self, c: f64) -> Self;
}

impl RkVector for f64 {
    fn toward(&self, other: &Self, c: f64) -> Self {
        self + c * (other - self)
    }
}

impl RkVector for Vec<f64> {
    fn toward(&self, other: &Self, c: f64) -> Self {
        self.iter()
            .zip(other)
            .map(|(a, b)| a + c * (b - a))
            .collect()
    }
}

impl RkVector for SolutionField {
    fn toward(&self, other: &Self, c: f64) -> Self {
        use rayon::prelude::*;
        let data = self
            .data
            .par_iter()
            .zip(&other.data)
            .map(|(a, b)| *a + (*b - *a) * c)
            .collect();
        SolutionField {
            n: self.n,
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }
}

/// One SSP-RK3 step in Shu-Osher form. `euler(u, stage)` must return the
/// (possibly limited) forward-Euler update `u + dt L(u)`.
///
/// The stages are written as increments of `u_n`, so a vanishing operator
/// returns `u_n` unchanged bit for bit.
pub fn ssp_rk3_step<V: RkVector>(
    u: &V,
    mut euler: impl FnMut(&V, usize) -> Result<V>,
) -> Result<V> {
    let u1 = euler(u, 0)?;
    let u2 = u.toward(&euler(&u1, 1)?, 0.25);
    Ok(u.toward(&euler(&u2, 2)?, 2.0 / 3.0))
}

/// `(1/V) sum_e sum_ij J w_i w_j alpha_ij` for one stage.
pub fn stage_mean_alpha(node_alpha: &[f64], op: &SbpOperator1D, mesh: &Mesh2D) -> f64 {
    let n = op.n_nodes();
    let jac = mesh.metric().jacobian;
    let mut sum = 0.0;
    for elem in node_alpha.chunks(n * n) {
        for j in 0..n {
            for i in 0..n {
                sum += jac * op.weights[i] * op.weights[j] * elem[j * n + i];
            }
        }
    }
    sum / mesh.area()
}

/// Average of per-stage means over a sampling window.
pub fn mean_alpha(stage_means: &[f64]) -> Result<f64> {
    if stage_means.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(stage_means.iter().sum::<f64>() / stage_means.len() as f64)
}

/// `S = -sum m rho s / (gamma - 1)` with `s = ln(p rho^-gamma)`.
pub fn total_entropy(
    field: &SolutionField,
    op: &SbpOperator1D,
    mesh: &Mesh2D,
    p: &EquationParams,
) -> Result<f64> {
    let n = op.n_nodes();
    let jac = mesh.metric().jacobian;
    let mut sum = 0.0;
    for elem in field.data.chunks(n * n) {
        for j in 0..n {
            for i in 0..n {
                let u = &elem[j * n + i];
                let s = specific_entropy(u, p)?;
                sum += jac * op.weights[i] * op.weights[j] * u.rho() * s;
            }
        }
    }
    Ok(-sum / (p.gamma - 1.0))
}

/// `(min rho, min p)` over all nodes.
pub fn field_minima(field: &SolutionField, p: &EquationParams) -> (f64, f64) {
    field
        .data
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |(r, q), u| {
            (r.min(u.rho()), q.min(pressure(u, p)))
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mean_alpha: f64,
    pub total_entropy: f64,
    pub min_rho: f64,
    pub min_p: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "t,mean_alpha,total_entropy,min_rho,min_p";

/// Sampled time series of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDiagnostics {
    pub sample_interval: f64,
    pub rows: Vec<DiagnosticsRow>,
}

impl RunDiagnostics {
    pub fn new(sample_interval: f64) -> Self {
        RunDiagnostics {
            sample_interval,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: DiagnosticsRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.t <= last.t {
                return Err(Error::config(format!(
                    "diagnostic sample at t={} does not follow t={}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "{DIAGNOSTICS_HEADER}").map_err(io)?;
        for r in &self.rows {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e}",
                r.t, r.mean_alpha, r.total_entropy, r.min_rho, r.min_p
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}
