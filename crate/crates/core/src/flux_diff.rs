//! Flux-differencing form of the split SBP discretization: per-line staggered
//! fluxes (one value per interface side), their low-order subcell FV
//! counterparts and the blended right-hand side.
//!
//! On a line of `n` nodes, node `j` is updated by
//! `m_j du_j/dt = Gamma_(j,j-1) - Gamma_(j,j+1)`. Interfaces are numbered
//! `0..=n`: interface `k` separates nodes `k-1` and `k`, so `0` and `n` are
//! the element faces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluxes::{glm_sym, powell_sym, rusanov_surface_flux, surface_noncons};
use crate::mesh::{gather_interface_traces, SolutionField};
use crate::physics::{
    advective_flux_normal, glm_phi_normal, powell_phi, ConsState, EquationParams,
};
use crate::sbp_ops::SbpOperator1D;
use crate::semidisc::{check_admissible, extract_line, line_traces, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxVariant {
    Sbp,
    Fv,
}

/// Staggered fluxes of one line: `gamma_left[j] = Gamma_(j,j-1)`,
/// `gamma_right[j] = Gamma_(j,j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredFluxSet {
    pub variant: FluxVariant,
    pub gamma_left: Vec<ConsState>,
    pub gamma_right: Vec<ConsState>,
}

impl StaggeredFluxSet {
    /// `m_j du_j/dt` for every node.
    pub fn weighted_rates(&self) -> Vec<ConsState> {
        self.gamma_left
            .iter()
            .zip(&self.gamma_right)
            .map(|(l, r)| *l - *r)
            .collect()
    }
}

#[inline]
fn boundary_left(ul: &ConsState, u0: &ConsState, ja: [f64; 3], p: &EquationParams) -> ConsState {
    rusanov_surface_flux(ul, u0, ja, p) + surface_noncons(u0, ul, ja, p)
}

#[inline]
fn boundary_right(un: &ConsState, ur: &ConsState, ja: [f64; 3], p: &EquationParams) -> ConsState {
    rusanov_surface_flux(un, ur, ja, p) + surface_noncons(un, ur, ja, p)
}

/// Scratch buffers reused across lines.
struct LineScratch {
    flux: Vec<ConsState>,
    loc_powell: Vec<ConsState>,
    loc_glm: Vec<ConsState>,
}

impl LineScratch {
    fn new(n: usize) -> Self {
        LineScratch {
            flux: vec![ConsState::ZERO; n],
            loc_powell: vec![ConsState::ZERO; n],
            loc_glm: vec![ConsState::ZERO; n],
        }
    }
}

fn staggered_sbp_into(
    op: &SbpOperator1D,
    line: &[ConsState],
    ul: &ConsState,
    ur: &ConsState,
    ja: [f64; 3],
    p: &EquationParams,
    scratch: &mut LineScratch,
    left: &mut [ConsState],
    right: &mut [ConsState],
) {
    let n = op.n_nodes();
    for j in 0..n {
        scratch.flux[j] = advective_flux_normal(&line[j], ja, p);
        scratch.loc_powell[j] = powell_phi(&line[j], p);
        scratch.loc_glm[j] = glm_phi_normal(&line[j], ja, p);
    }
    left[0] = boundary_left(ul, &line[0], ja, p);
    right[n - 1] = boundary_right(&line[n - 1], ur, ja, p);

    // Running prefixes over rows 0..=l of S: conservative part and the two
    // symmetric non-conservative factors.
    let mut fbar = ConsState::ZERO;
    let mut pbar = 0.0;
    let mut gbar = 0.0;
    for l in 0..n - 1 {
        let (fl, bl, psil) = (scratch.flux[l], line[l].b(), line[l].psi());
        for &(m, s) in op.s_row(l) {
            fbar += (fl + scratch.flux[m]) * (0.5 * s);
            pbar += s * powell_sym(bl, line[m].b(), ja);
            gbar += s * glm_sym(psil, line[m].psi());
        }
        right[l] = fbar + scratch.loc_powell[l] * pbar + scratch.loc_glm[l] * gbar;
        left[l + 1] = fbar + scratch.loc_powell[l + 1] * pbar + scratch.loc_glm[l + 1] * gbar;
    }
}

fn staggered_fv_into(
    n: usize,
    line: &[ConsState],
    ul: &ConsState,
    ur: &ConsState,
    ja: [f64; 3],
    p: &EquationParams,
    left: &mut [ConsState],
    right: &mut [ConsState],
) {
    left[0] = boundary_left(ul, &line[0], ja, p);
    right[n - 1] = boundary_right(&line[n - 1], ur, ja, p);
    for k in 1..n {
        let (a, b) = (&line[k - 1], &line[k]);
        let f = rusanov_surface_flux(a, b, ja, p);
        right[k - 1] = f + surface_noncons(a, b, ja, p);
        left[k] = f + surface_noncons(b, a, ja, p);
    }
}

/// High-order staggered fluxes of one line with exterior traces `ul`, `ur`.
pub fn compute_staggered_sbp(
    line: &[ConsState],
    ul: &ConsState,
    ur: &ConsState,
    op: &SbpOperator1D,
    ja: [f64; 3],
    p: &EquationParams,
) -> StaggeredFluxSet {
    let n = op.n_nodes();
    let mut left = vec![ConsState::ZERO; n];
    let mut right = vec![ConsState::ZERO; n];
    let mut scratch = LineScratch::new(n);
    staggered_sbp_into(op, line, ul, ur, ja, p, &mut scratch, &mut left, &mut right);
    StaggeredFluxSet {
        variant: FluxVariant::Sbp,
        gamma_left: left,
        gamma_right: right,
    }
}

/// First-order subcell FV staggered fluxes of one line.
pub fn compute_staggered_fv(
    line: &[ConsState],
    ul: &ConsState,
    ur: &ConsState,
    ja: [f64; 3],
    p: &EquationParams,
) -> StaggeredFluxSet {
    let n = line.len();
    let mut left = vec![ConsState::ZERO; n];
    let mut right = vec![ConsState::ZERO; n];
    staggered_fv_into(n, line, ul, ur, ja, p, &mut left, &mut right);
    StaggeredFluxSet {
        variant: FluxVariant::Fv,
        gamma_left: left,
        gamma_right: right,
    }
}

fn check_alpha(a: f64) -> Result<()> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { value: a })
    }
}

#[inline]
fn blend(a: f64, sbp: &ConsState, fv: &ConsState) -> ConsState {
    *sbp * (1.0 - a) + *fv * a
}

/// Blended nodal rates of one line. `alpha` holds one value per interface
/// (`n + 1` entries).
pub fn blended_rhs(
    sbp: &StaggeredFluxSet,
    fv: &StaggeredFluxSet,
    alpha: &[f64],
    op: &SbpOperator1D,
    jacobian: f64,
) -> Result<Vec<ConsState>> {
    let n = op.n_nodes();
    if alpha.len() != n + 1 {
        return Err(Error::config(format!(
            "expected {} interface values, got {}",
            n + 1,
            alpha.len()
        )));
    }
    for &a in alpha {
        check_alpha(a)?;
    }
    Ok((0..n)
        .map(|j| {
            let l = blend(alpha[j], &sbp.gamma_left[j], &fv.gamma_left[j]);
            let r = blend(alpha[j + 1], &sbp.gamma_right[j], &fv.gamma_right[j]);
            (l - r) * (1.0 / (op.weights[j] * jacobian))
        })
        .collect())
}

/// Interface blending coefficients: per element, axis and line, `n + 1`
/// values indexed by interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceAlpha {
    pub n: usize,
    pub data: Vec<f64>,
}

impl InterfaceAlpha {
    pub fn uniform(n: usize, n_elements: usize, value: f64) -> Self {
        InterfaceAlpha {
            n,
            data: vec![value; n_elements * 2 * n * (n + 1)],
        }
    }

    #[inline]
    pub fn line_offset(&self, e: usize, axis: usize, line: usize) -> usize {
        ((e * 2 + axis) * self.n + line) * (self.n + 1)
    }

    #[inline]
    pub fn line(&self, e: usize, axis: usize, line: usize) -> &[f64] {
        let o = self.line_offset(e, axis, line);
        &self.data[o..o + self.n + 1]
    }

    #[inline]
    pub fn line_mut(&mut self, e: usize, axis: usize, line: usize) -> &mut [f64] {
        let o = self.line_offset(e, axis, line);
        &mut self.data[o..o + self.n + 1]
    }

    pub fn validate(&self) -> Result<()> {
        match self.data.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            Some(&value) => Err(Error::AlphaOutOfRange { value }),
            None => Ok(()),
        }
    }
}

/// Both staggered flux sets of every line of a field, stored so that the
/// blended rates can be re-evaluated cheaply for different coefficients.
#[derive(Debug, Clone)]
pub struct StaggeredField {
    n: usize,
    /// `[sbp_left, sbp_right, fv_left, fv_right]` per (element, axis, line, node).
    data: Vec<[ConsState; 4]>,
}

impl StaggeredField {
    pub fn compute(field: &SolutionField, scheme: &Scheme) -> Result<Self> {
        scheme.check_field(field)?;
        scheme.volume_flux.resolve()?;
        check_admissible(field, &scheme.params)?;
        let traces = gather_interface_traces(field, &scheme.mesh)?;
        let op = &scheme.op;
        let p = &scheme.params;
        let metric = scheme.mesh.metric();
        let n = op.n_nodes();
        let mut data = vec![[ConsState::ZERO; 4]; field.n_elements() * 2 * n * n];
        data.par_chunks_mut(2 * n * n)
            .enumerate()
            .for_each(|(e, out)| {
                let elem = field.element(e);
                let mut line = vec![ConsState::ZERO; n];
                let mut scratch = LineScratch::new(n);
                let mut bufs = [
                    vec![ConsState::ZERO; n],
                    vec![ConsState::ZERO; n],
                    vec![ConsState::ZERO; n],
                    vec![ConsState::ZERO; n],
                ];
                for axis in 0..2 {
                    let ja = metric.ja[axis];
                    for l in 0..n {
                        extract_line(elem, n, axis, l, &mut line);
                        let (ul, ur) = line_traces(&traces, e, axis, l);
                        let [sl, sr, fl, fr] = &mut bufs;
                        staggered_sbp_into(op, &line, &ul, &ur, ja, p, &mut scratch, sl, sr);
                        staggered_fv_into(n, &line, &ul, &ur, ja, p, fl, fr);
                        // element faces are shared verbatim
                        fl[0] = sl[0];
                        fr[n - 1] = sr[n - 1];
                        let base = (axis * n + l) * n;
                        for j in 0..n {
                            out[base + j] = [sl[j], sr[j], fl[j], fr[j]];
                        }
                    }
                }
            });
        Ok(StaggeredField { n, data })
    }

    #[inline]
    pub fn get(&self, e: usize, axis: usize, line: usize, j: usize) -> &[ConsState; 4] {
        &self.data[((e * 2 + axis) * self.n + line) * self.n + j]
    }

    pub fn line_set(
        &self,
        e: usize,
        axis: usize,
        line: usize,
        variant: FluxVariant,
    ) -> StaggeredFluxSet {
        let off = if variant == FluxVariant::Sbp { 0 } else { 2 };
        let vals = (0..self.n).map(|j| self.get(e, axis, line, j));
        let (l, r): (Vec<_>, Vec<_>) = vals.map(|v| (v[off], v[off + 1])).unzip();
        StaggeredFluxSet {
            variant,
            gamma_left: l,
            gamma_right: r,
        }
    }

    /// Nodal rates for the given interface coefficients; `None` is the pure
    /// high-order scheme.
    pub fn rates(&self, scheme: &Scheme, alpha: Option<&InterfaceAlpha>) -> Result<SolutionField> {
        let mut out = SolutionField::zeros(self.n, &scheme.mesh);
        self.rates_into(scheme, alpha, &mut out)?;
        Ok(out)
    }

    pub fn rates_into(
        &self,
        scheme: &Scheme,
        alpha: Option<&InterfaceAlpha>,
        out: &mut SolutionField,
    ) -> Result<()> {
        let n = self.n;
        if let Some(a) = alpha {
            if a.n != n || a.data.len() != out.n_elements() * 2 * n * (n + 1) {
                return Err(Error::config(
                    "interface coefficient layout does not match the field",
                ));
            }
            a.validate()?;
        }
        let op = &scheme.op;
        let jac = scheme.mesh.metric().jacobian;
        out.data
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(e, out)| {
                out.fill(ConsState::ZERO);
                for axis in 0..2 {
                    for l in 0..n {
                        let a = alpha.map(|a| a.line(e, axis, l));
                        for k in 0..n {
                            let [sl, sr, fl, fr] = self.get(e, axis, l, k);
                            let g = match a {
                                None => *sl - *sr,
                                Some(a) => blend(a[k], sl, fl) - blend(a[k + 1], sr, fr),
                            };
                            let idx = if axis == 0 { l * n + k } else { k * n + l };
                            out[idx] += g * (1.0 / (jac * op.weights[k]));
                        }
                    }
                }
            });
        Ok(())
    }
}

/// Flux-differencing right-hand side with optional blending.
pub fn compute_rhs_fluxdiff(
    field: &SolutionField,
    scheme: &Scheme,
    alpha: Option<&InterfaceAlpha>,
) -> Result<SolutionField> {
    StaggeredField::compute(field, scheme)?.rates(scheme, alpha)
}
