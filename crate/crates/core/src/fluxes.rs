//! Two-point fluxes: the symmetric volume flux, the local x symmetric
//! splits of the Powell and GLM non-conservative terms, and the interface
//! (surface) flux and non-conservative term.
//!
//! Metric vectors are the contravariant vectors scaled by the Jacobian
//! (`J a^d`). On the Cartesian meshes used here they are constant per
//! element, so the "averaged" and "local" metric coincide.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::physics::{
    advective_flux_normal, dot, glm_phi_normal, max_wave_speed, powell_phi, ConsState,
    EquationParams,
};

/// Volume two-point flux selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolumeFlux {
    #[default]
    Central,
    /// Entropy-conservative GLM-MHD flux. Not bundled; selecting it reports
    /// [`Error::Unavailable`].
    EntropyConservative,
}

impl VolumeFlux {
    /// Returns the flux actually usable for a run.
    pub fn resolve(self) -> Result<VolumeFlux> {
        match self {
            VolumeFlux::Central => Ok(VolumeFlux::Central),
            VolumeFlux::EntropyConservative => Err(Error::Unavailable("ec")),
        }
    }

    /// Like [`resolve`](Self::resolve) but falls back to the central flux
    /// with a warning.
    pub fn resolve_or_central(self) -> VolumeFlux {
        self.resolve().unwrap_or_else(|e| {
            log::warn!("{e}; falling back to the central volume flux");
            VolumeFlux::Central
        })
    }
}

impl FromStr for VolumeFlux {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(VolumeFlux::Central),
            "ec" => Ok(VolumeFlux::EntropyConservative),
            other => Err(Error::config(format!(
                "unknown volume_flux `{other}` (expected central | ec)"
            ))),
        }
    }
}

impl fmt::Display for VolumeFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeFlux::Central => write!(f, "central"),
            VolumeFlux::EntropyConservative => write!(f, "ec"),
        }
    }
}

/// `f*(uL, uR) . m = 1/2 (f(uL) + f(uR)) . m`
#[inline]
pub fn central_volume_flux(
    ul: &ConsState,
    ur: &ConsState,
    metric: [f64; 3],
    p: &EquationParams,
) -> ConsState {
    (advective_flux_normal(ul, metric, p) + advective_flux_normal(ur, metric, p)) * 0.5
}

/// Entropy-conservative volume flux slot. No implementation ships with this
/// crate.
pub fn ec_volume_flux(
    _ul: &ConsState,
    _ur: &ConsState,
    _metric: [f64; 3],
    _p: &EquationParams,
) -> Result<ConsState> {
    Err(Error::Unavailable("ec"))
}

/// A two-point non-conservative term written as `loc . sym`: a node-local
/// vector times a factor symmetric in the two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonconsSplit {
    pub loc: ConsState,
    pub sym: f64,
}

impl NonconsSplit {
    #[inline]
    pub fn assemble(&self) -> ConsState {
        self.loc * self.sym
    }
}

#[inline]
fn avg3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

/// Powell term: `loc = phi^MHD(u_local)`, `sym = {{B}} . {{Ja}}`.
#[inline]
pub fn powell_noncons_split(
    u_local: &ConsState,
    metric_avg: [f64; 3],
    other_b: [f64; 3],
    p: &EquationParams,
) -> NonconsSplit {
    NonconsSplit {
        loc: powell_phi(u_local, p),
        sym: powell_sym(u_local.b(), other_b, metric_avg),
    }
}

#[inline]
pub(crate) fn powell_sym(b_local: [f64; 3], b_other: [f64; 3], metric_avg: [f64; 3]) -> f64 {
    dot(avg3(b_local, b_other), metric_avg)
}

/// GLM term: `loc = phi^GLM(u_local) . Ja_local`, `sym = {{psi}}`.
#[inline]
pub fn glm_noncons_split(
    u_local: &ConsState,
    metric_local: [f64; 3],
    other_psi: f64,
    p: &EquationParams,
) -> NonconsSplit {
    NonconsSplit {
        loc: glm_phi_normal(u_local, metric_local, p),
        sym: glm_sym(u_local.psi(), other_psi),
    }
}

#[inline]
pub(crate) fn glm_sym(psi_local: f64, psi_other: f64) -> f64 {
    0.5 * (psi_local + psi_other)
}

/// Both non-conservative splits of a node, evaluated against `u_other`.
#[inline]
pub fn noncons_splits(
    u_local: &ConsState,
    u_other: &ConsState,
    metric: [f64; 3],
    p: &EquationParams,
) -> [NonconsSplit; 2] {
    [
        powell_noncons_split(u_local, metric, u_other.b(), p),
        glm_noncons_split(u_local, metric, u_other.psi(), p),
    ]
}

/// Rusanov flux across an interface with (unnormalised) metric normal `n`:
/// `1/2 (f(in) + f(out)) . n - 1/2 lambda |n| (out - in)`.
#[inline]
pub fn rusanov_surface_flux(
    u_in: &ConsState,
    u_out: &ConsState,
    n: [f64; 3],
    p: &EquationParams,
) -> ConsState {
    let norm = dot(n, n).sqrt();
    let n_hat = [n[0] / norm, n[1] / norm, n[2] / norm];
    let lambda = max_wave_speed(u_in, u_out, n_hat, p);
    (advective_flux_normal(u_in, n, p) + advective_flux_normal(u_out, n, p)) * 0.5
        - (*u_out - *u_in) * (0.5 * lambda * norm)
}

/// Surface non-conservative term seen from `u_in`, using the same local x
/// symmetric forms as the volume terms with the exterior trace `u_out`.
#[inline]
pub fn surface_noncons(
    u_in: &ConsState,
    u_out: &ConsState,
    metric: [f64; 3],
    p: &EquationParams,
) -> ConsState {
    let [pw, glm] = noncons_splits(u_in, u_out, metric, p);
    pw.assemble() + glm.assemble()
}
