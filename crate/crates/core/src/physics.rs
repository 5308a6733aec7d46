//! GLM-MHD state algebra: variable conversion, advective fluxes, the
//! Godunov-Powell and GLM non-conservative vectors, entropies and wave speeds.
//!
//! Conserved variables are ordered `(rho, rho v1, rho v2, rho v3, rho E, B1,
//! B2, B3, psi)`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

pub const NVARS: usize = 9;

pub const RHO: usize = 0;
pub const RHO_E: usize = 4;
pub const PSI: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConsState(pub [f64; NVARS]);

impl ConsState {
    pub const ZERO: ConsState = ConsState([0.0; NVARS]);

    pub fn new(rho: f64, rho_v: [f64; 3], rho_e: f64, b: [f64; 3], psi: f64) -> Self {
        ConsState([
            rho, rho_v[0], rho_v[1], rho_v[2], rho_e, b[0], b[1], b[2], psi,
        ])
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[RHO]
    }

    #[inline]
    pub fn momentum(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    #[inline]
    pub fn rho_e(&self) -> f64 {
        self.0[RHO_E]
    }

    #[inline]
    pub fn b(&self) -> [f64; 3] {
        [self.0[5], self.0[6], self.0[7]]
    }

    #[inline]
    pub fn psi(&self) -> f64 {
        self.0[PSI]
    }

    #[inline]
    pub fn velocity(&self) -> [f64; 3] {
        let r = 1.0 / self.0[RHO];
        [self.0[1] * r, self.0[2] * r, self.0[3] * r]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Component-wise product.
    #[inline]
    pub fn hadamard(&self, other: &ConsState) -> ConsState {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a *= b;
        }
        out
    }
}

impl Add for ConsState {
    type Output = ConsState;
    #[inline]
    fn add(mut self, rhs: ConsState) -> ConsState {
        self += rhs;
        self
    }
}

impl AddAssign for ConsState {
    #[inline]
    fn add_assign(&mut self, rhs: ConsState) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for ConsState {
    type Output = ConsState;
    #[inline]
    fn sub(mut self, rhs: ConsState) -> ConsState {
        self -= rhs;
        self
    }
}

impl SubAssign for ConsState {
    #[inline]
    fn sub_assign(&mut self, rhs: ConsState) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<f64> for ConsState {
    type Output = ConsState;
    #[inline]
    fn mul(mut self, s: f64) -> ConsState {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Mul<ConsState> for f64 {
    type Output = ConsState;
    #[inline]
    fn mul(self, u: ConsState) -> ConsState {
        u * self
    }
}

impl Neg for ConsState {
    type Output = ConsState;
    #[inline]
    fn neg(self) -> ConsState {
        self * -1.0
    }
}

impl Index<usize> for ConsState {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ConsState {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub v: [f64; 3],
    pub p: f64,
    pub b: [f64; 3],
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    pub gamma: f64,
    pub mu0: f64,
    /// Hyperbolic divergence-cleaning speed.
    pub c_h: f64,
}

impl Default for EquationParams {
    fn default() -> Self {
        Self {
            gamma: 5.0 / 3.0,
            mu0: 1.0,
            c_h: 1.0,
        }
    }
}

impl EquationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::config(format!(
                "gamma must exceed 1, got {}",
                self.gamma
            )));
        }
        if !(self.mu0 > 0.0) {
            return Err(Error::config(format!(
                "mu0 must be positive, got {}",
                self.mu0
            )));
        }
        if !(self.c_h >= 0.0) {
            return Err(Error::config(format!(
                "c_h must be non-negative, got {}",
                self.c_h
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn norm2(a: [f64; 3]) -> f64 {
    dot(a, a)
}

/// Gas pressure. Not clamped: a non-positive value means the state is
/// inadmissible and it is up to the caller to react.
#[inline]
pub fn pressure(u: &ConsState, p: &EquationParams) -> f64 {
    let rho = u.rho();
    let m = u.momentum();
    let kinetic = 0.5 * norm2(m) / rho;
    let magnetic = 0.5 * norm2(u.b()) / p.mu0;
    let glm = 0.5 * u.psi() * u.psi() / p.mu0;
    (p.gamma - 1.0) * (u.rho_e() - kinetic - magnetic - glm)
}

pub fn is_admissible(u: &ConsState, p: &EquationParams) -> bool {
    u.rho() > 0.0 && pressure(u, p) > 0.0
}

/// Pressure, or an error when it (or the density) is non-positive.
pub fn checked_pressure(u: &ConsState, p: &EquationParams) -> Result<f64> {
    if !(u.rho() > 0.0) {
        return Err(Error::InadmissibleState("non-positive density"));
    }
    let pr = pressure(u, p);
    if !(pr > 0.0) {
        return Err(Error::InadmissibleState("non-positive pressure"));
    }
    Ok(pr)
}

pub fn prim_to_cons(w: &Primitive, p: &EquationParams) -> ConsState {
    let rho_e = w.p / (p.gamma - 1.0)
        + 0.5 * w.rho * norm2(w.v)
        + 0.5 * norm2(w.b) / p.mu0
        + 0.5 * w.psi * w.psi / p.mu0;
    ConsState::new(
        w.rho,
        [w.rho * w.v[0], w.rho * w.v[1], w.rho * w.v[2]],
        rho_e,
        w.b,
        w.psi,
    )
}

pub fn cons_to_prim(u: &ConsState, p: &EquationParams) -> Result<Primitive> {
    let pr = checked_pressure(u, p)?;
    Ok(Primitive {
        rho: u.rho(),
        v: u.velocity(),
        p: pr,
        b: u.b(),
        psi: u.psi(),
    })
}

/// Advective flux projected on `n`, i.e. `sum_d n_d f^d(u)`.
#[inline]
pub fn advective_flux_normal(u: &ConsState, n: [f64; 3], p: &EquationParams) -> ConsState {
    let rho = u.rho();
    let v = u.velocity();
    let b = u.b();
    let psi = u.psi();
    let pr = pressure(u, p);
    let inv_mu0 = 1.0 / p.mu0;
    let vn = dot(v, n);
    let bn = dot(b, n);
    let vb = dot(v, b);
    let b2 = norm2(b);
    let p_tot = pr + 0.5 * b2 * inv_mu0;
    let mut f = [0.0; NVARS];
    f[0] = rho * vn;
    for k in 0..3 {
        f[1 + k] = rho * v[k] * vn + p_tot * n[k] - b[k] * bn * inv_mu0;
    }
    f[4] = vn * (0.5 * rho * norm2(v) + p.gamma * pr / (p.gamma - 1.0) + b2 * inv_mu0)
        - bn * vb * inv_mu0
        + p.c_h * psi * bn * inv_mu0;
    for k in 0..3 {
        f[5 + k] = vn * b[k] - bn * v[k] + p.c_h * psi * n[k];
    }
    f[8] = p.c_h * bn;
    ConsState(f)
}

fn unit(dir: usize) -> [f64; 3] {
    let mut n = [0.0; 3];
    n[dir] = 1.0;
    n
}

/// Column `dir` (0, 1 or 2) of the advective flux.
pub fn advective_flux(u: &ConsState, dir: usize, p: &EquationParams) -> ConsState {
    advective_flux_normal(u, unit(dir), p)
}

/// Hydrodynamic (Euler) block of the advective flux in direction `dir`.
pub fn euler_flux_part(u: &ConsState, dir: usize, p: &EquationParams) -> ConsState {
    let rho = u.rho();
    let v = u.velocity();
    let pr = pressure(u, p);
    let mut f = ConsState::ZERO;
    f[0] = rho * v[dir];
    for k in 0..3 {
        f[1 + k] = rho * v[k] * v[dir] + if k == dir { pr } else { 0.0 };
    }
    f[4] = v[dir] * (0.5 * rho * norm2(v) + p.gamma * pr / (p.gamma - 1.0));
    f
}

/// Ideal-MHD block of the advective flux in direction `dir`.
pub fn mhd_flux_part(u: &ConsState, dir: usize, p: &EquationParams) -> ConsState {
    let v = u.velocity();
    let b = u.b();
    let mut f = ConsState::ZERO;
    for k in 0..3 {
        let iso = if k == dir {
            0.5 * norm2(b) / p.mu0
        } else {
            0.0
        };
        f[1 + k] = iso - b[k] * b[dir] / p.mu0;
        f[5 + k] = v[dir] * b[k] - b[dir] * v[k];
    }
    f[4] = (v[dir] * norm2(b) - b[dir] * dot(v, b)) / p.mu0;
    f
}

/// GLM block of the advective flux in direction `dir`.
pub fn glm_flux_part(u: &ConsState, dir: usize, p: &EquationParams) -> ConsState {
    let b = u.b();
    let mut f = ConsState::ZERO;
    f[4] = p.c_h * u.psi() * b[dir] / p.mu0;
    f[5 + dir] = p.c_h * u.psi();
    f[8] = p.c_h * b[dir];
    f
}

/// Godunov-Powell vector `(0, B/mu0, v.B/mu0, v, 0)`.
#[inline]
pub fn powell_phi(u: &ConsState, p: &EquationParams) -> ConsState {
    let v = u.velocity();
    let b = u.b();
    let inv_mu0 = 1.0 / p.mu0;
    ConsState([
        0.0,
        b[0] * inv_mu0,
        b[1] * inv_mu0,
        b[2] * inv_mu0,
        dot(v, b) * inv_mu0,
        v[0],
        v[1],
        v[2],
        0.0,
    ])
}

/// GLM non-conservative vector for direction `dir`:
/// `mu0^-1 (0, 0, 0, 0, v_dir psi, 0, 0, 0, v_dir)`.
pub fn glm_phi(u: &ConsState, dir: usize, p: &EquationParams) -> ConsState {
    glm_phi_normal(u, unit(dir), p)
}

/// `sum_l n_l phi^GLM_l`.
#[inline]
pub fn glm_phi_normal(u: &ConsState, n: [f64; 3], p: &EquationParams) -> ConsState {
    let vn = dot(u.velocity(), n) / p.mu0;
    let mut f = ConsState::ZERO;
    f[4] = vn * u.psi();
    f[8] = vn;
    f
}

/// Specific entropy `s = ln(p rho^-gamma)`.
pub fn specific_entropy(u: &ConsState, p: &EquationParams) -> Result<f64> {
    let pr = checked_pressure(u, p)?;
    Ok((pr * u.rho().powf(-p.gamma)).ln())
}

/// Modified specific entropy `theta = e rho^(1-gamma)` with
/// `e = p / ((gamma - 1) rho)`, evaluated without admissibility checks.
#[inline]
pub fn modified_entropy_unchecked(u: &ConsState, p: &EquationParams) -> f64 {
    pressure(u, p) * u.rho().powf(-p.gamma) / (p.gamma - 1.0)
}

pub fn modified_entropy(u: &ConsState, p: &EquationParams) -> Result<f64> {
    checked_pressure(u, p)?;
    Ok(modified_entropy_unchecked(u, p))
}

/// Gradient of `theta` with respect to the conserved variables.
pub fn modified_entropy_gradient(u: &ConsState, p: &EquationParams) -> ConsState {
    let rho = u.rho();
    let v = u.velocity();
    let b = u.b();
    let g = p.gamma;
    let pr = pressure(u, p);
    let rho_mg = rho.powf(-g);
    // dp/du
    let mut dp = ConsState([
        0.5 * norm2(v),
        -v[0],
        -v[1],
        -v[2],
        1.0,
        -b[0] / p.mu0,
        -b[1] / p.mu0,
        -b[2] / p.mu0,
        -u.psi() / p.mu0,
    ]) * (g - 1.0);
    dp = dp * (rho_mg / (g - 1.0));
    dp[0] -= g * pr * rho_mg / rho / (g - 1.0);
    dp
}

/// Fast magnetosonic speed along the unit vector `n_hat`.
#[inline]
pub fn fast_magnetosonic_speed(u: &ConsState, n_hat: [f64; 3], p: &EquationParams) -> f64 {
    let rho = u.rho();
    let a2 = p.gamma * pressure(u, p) / rho;
    let b = u.b();
    let b2 = norm2(b) / (p.mu0 * rho);
    let bn2 = dot(b, n_hat).powi(2) / (p.mu0 * rho);
    let sum = a2 + b2;
    let disc = (sum * sum - 4.0 * a2 * bn2).max(0.0);
    (0.5 * (sum + disc.sqrt())).sqrt()
}

/// Largest signal speed of the Riemann problem `(uL, uR)` along `n_hat`:
/// `max(|v.n| + c_f)` over both sides, and the cleaning speed `c_h`.
#[inline]
pub fn max_wave_speed(ul: &ConsState, ur: &ConsState, n_hat: [f64; 3], p: &EquationParams) -> f64 {
    let sl = dot(ul.velocity(), n_hat).abs() + fast_magnetosonic_speed(ul, n_hat, p);
    let sr = dot(ur.velocity(), n_hat).abs() + fast_magnetosonic_speed(ur, n_hat, p);
    sl.max(sr).max(p.c_h)
}

/// As [`max_wave_speed`] but rejecting inadmissible inputs.
pub fn checked_max_wave_speed(
    ul: &ConsState,
    ur: &ConsState,
    n_hat: [f64; 3],
    p: &EquationParams,
) -> Result<f64> {
    checked_pressure(ul, p)?;
    checked_pressure(ur, p)?;
    Ok(max_wave_speed(ul, ur, n_hat, p))
}
