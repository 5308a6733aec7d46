//! Time-marching solver: SSP-RK3 with the blending coefficients chosen
//! inside every stage.

use rayon::prelude::*;

use crate::error::{Error, NodeLocation, Result};
use crate::flux_diff::{InterfaceAlpha, StaggeredField};
use crate::limiting::{
    effective_node_alpha, idp_bounds, idp_limit, loehner_alpha, BlendField, BlendMode, IdpOptions,
    LimiterKind,
};
use crate::mesh::SolutionField;
use crate::physics::{prim_to_cons, Primitive};
use crate::semidisc::Scheme;
use crate::time_integration::{
    field_minima, mean_alpha, ssp_rk3_step, stage_mean_alpha, total_entropy, DiagnosticsRow,
    RunDiagnostics,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterConfig {
    pub kind: LimiterKind,
    pub mode: BlendMode,
    pub loehner_eps: f64,
    pub idp: IdpOptions,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        LimiterConfig {
            kind: LimiterKind::None,
            mode: BlendMode::Subcell,
            loehner_eps: 0.2,
            idp: IdpOptions::default(),
        }
    }
}

/// Accumulated a-posteriori limiting statistics over all stages so far.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdpStats {
    pub stages: usize,
    pub correction_passes: usize,
    pub fallback_nodes: usize,
    pub flagged: usize,
    pub max_rho_violation: f64,
    pub max_theta_violation: f64,
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub scheme: Scheme,
    pub limiter: LimiterConfig,
    pub field: SolutionField,
    pub time: f64,
    pub steps: usize,
    pub diagnostics: RunDiagnostics,
    pub idp_stats: IdpStats,
    /// Effective node coefficients of the most recent stage.
    pub last_alpha: Vec<f64>,
    window: Vec<f64>,
    next_sample: f64,
}

impl Solver {
    pub fn new(
        scheme: Scheme,
        field: SolutionField,
        limiter: LimiterConfig,
        sample_interval: f64,
    ) -> Result<Self> {
        scheme.check_field(&field)?;
        if !(sample_interval > 0.0) {
            return Err(Error::config("sample interval must be positive"));
        }
        let len = field.data.len();
        Ok(Solver {
            scheme,
            limiter,
            field,
            time: 0.0,
            steps: 0,
            diagnostics: RunDiagnostics::new(sample_interval),
            idp_stats: IdpStats::default(),
            last_alpha: vec![0.0; len],
            window: Vec::new(),
            next_sample: sample_interval,
        })
    }

    /// Field initialised from a primitive-state function of position.
    pub fn initial_field(
        scheme: &Scheme,
        init: impl Fn(f64, f64) -> Primitive + Sync,
    ) -> SolutionField {
        let p = scheme.params;
        SolutionField::from_fn(&scheme.op, &scheme.mesh, |x, y| {
            prim_to_cons(&init(x, y), &p)
        })
    }

    /// Limited forward-Euler update `u + dt L(u)` of one stage.
    pub fn stage_update(
        &mut self,
        u: &SolutionField,
        dt: f64,
        stage: usize,
    ) -> Result<SolutionField> {
        let scheme = &self.scheme;
        let n = scheme.n();
        let ne = scheme.mesh.n_elements();
        let stag = StaggeredField::compute(u, scheme).map_err(|e| self.locate(e, stage))?;
        let euler = |alpha: Option<&InterfaceAlpha>| -> Result<SolutionField> {
            let mut out = stag.rates(scheme, alpha)?;
            out.data
                .par_iter_mut()
                .zip(&u.data)
                .for_each(|(r, u0)| *r = *u0 + *r * dt);
            Ok(out)
        };
        let (next, alpha) = match self.limiter.kind {
            LimiterKind::None => (euler(None)?, vec![0.0; u.data.len()]),
            LimiterKind::Fv => (
                euler(Some(&InterfaceAlpha::uniform(n, ne, 1.0)))?,
                vec![1.0; u.data.len()],
            ),
            LimiterKind::Loehner => {
                let nodes = loehner_alpha(
                    u,
                    &scheme.op,
                    &scheme.mesh,
                    &scheme.params,
                    self.limiter.loehner_eps,
                );
                let blend = BlendField::from_nodes(nodes, self.limiter.mode, n, &scheme.mesh)?;
                (
                    euler(Some(&blend.interface))?,
                    blend.effective_node_alpha(n),
                )
            }
            LimiterKind::Idp => {
                let u_fv = euler(Some(&InterfaceAlpha::uniform(n, ne, 1.0)))?;
                let bounds = idp_bounds(&u_fv, &scheme.mesh, &scheme.params)?;
                let (blend, next, report) = idp_limit(
                    vec![0.0; u.data.len()],
                    &u_fv,
                    &bounds,
                    self.limiter.mode,
                    &scheme.mesh,
                    &scheme.params,
                    &self.limiter.idp,
                    |a| euler(Some(a)),
                )?;
                let s = &mut self.idp_stats;
                s.stages += 1;
                s.correction_passes += report.passes;
                s.fallback_nodes += report.fallback_nodes;
                s.flagged += report.flagged;
                s.max_rho_violation = s.max_rho_violation.max(report.max_rho_violation);
                s.max_theta_violation = s.max_theta_violation.max(report.max_theta_violation);
                (
                    next,
                    effective_node_alpha(&blend.node_alpha, self.limiter.mode, n),
                )
            }
        };
        if let Some(k) = next.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                stage,
                location: self.node_location(k),
                time: self.time,
            });
        }
        self.window
            .push(stage_mean_alpha(&alpha, &scheme.op, &scheme.mesh));
        self.last_alpha = alpha;
        Ok(next)
    }

    fn node_location(&self, k: usize) -> NodeLocation {
        let n = self.scheme.n();
        NodeLocation {
            element: k / (n * n),
            i: k % n,
            j: (k / n) % n,
        }
    }

    fn locate(&self, e: Error, stage: usize) -> Error {
        match e {
            Error::Inadmissible { reason, location } => {
                log::error!("stage {stage} at t={}: {reason} at {location}", self.time);
                Error::Inadmissible { reason, location }
            }
            other => other,
        }
    }

    /// Advances by one step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        let u = self.field.clone();
        let next = ssp_rk3_step(&u, |v, stage| self.stage_update(v, dt, stage))?;
        self.field = next;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Current diagnostics values; the coefficient mean covers the stages
    /// since the previous sample (zero when none were taken).
    pub fn sample(&mut self) -> Result<DiagnosticsRow> {
        let s = &self.scheme;
        let mean = if self.window.is_empty() {
            0.0
        } else {
            mean_alpha(&self.window)?
        };
        self.window.clear();
        let (min_rho, min_p) = field_minima(&self.field, &s.params);
        Ok(DiagnosticsRow {
            t: self.time,
            mean_alpha: mean,
            total_entropy: total_entropy(&self.field, &s.op, &s.mesh, &s.params)?,
            min_rho,
            min_p,
        })
    }

    /// Steps with constant `dt` (the last step shortened) until `t_end`,
    /// recording a diagnostics row at every sample time and at the end.
    pub fn advance_to(&mut self, t_end: f64, dt: f64) -> Result<()> {
        if self.diagnostics.rows.is_empty() {
            let row = self.sample()?;
            self.diagnostics.push(row)?;
        }
        let tol = 1e-12 * dt;
        while self.time < t_end - tol {
            let h = dt.min(t_end - self.time);
            self.step(h)?;
            if self.time >= self.next_sample - tol || self.time >= t_end - tol {
                let row = self.sample()?;
                self.diagnostics.push(row)?;
                while self.next_sample <= self.time + tol {
                    self.next_sample += self.diagnostics.sample_interval;
                }
            }
        }
        Ok(())
    }

    /// `(min rho, min p)` of the current field.
    pub fn minima(&self) -> (f64, f64) {
        field_minima(&self.field, &self.scheme.params)
    }

    pub fn total_mass(&self) -> f64 {
        self.field.integrate(&self.scheme.op, &self.scheme.mesh)[0]
    }
}
