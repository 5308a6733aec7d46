//! Orszag-Tang vortex and MHD rotor set-ups.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::Mesh2D;
use crate::physics::{EquationParams, Primitive};
use crate::sbp_ops::{build_fd_sbp_operator, build_lgl_operator, OperatorKind, SbpOperator1D};

/// Time step of the reference runs and the resolution it belongs to.
pub const REFERENCE_DT: f64 = 8e-5;
pub const REFERENCE_DOF_LGL: usize = 1024;
pub const REFERENCE_DOF_FD: usize = 1027;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    OrszagTang,
    Rotor,
}

impl Problem {
    pub const ALL: [Problem; 2] = [Problem::OrszagTang, Problem::Rotor];

    pub fn initial_state(self, x: f64, y: f64) -> Primitive {
        match self {
            Problem::OrszagTang => init_orszag_tang(x, y),
            Problem::Rotor => init_rotor(x, y),
        }
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orszag_tang" => Ok(Problem::OrszagTang),
            "rotor" => Ok(Problem::Rotor),
            other => Err(Error::config(format!(
                "unknown problem `{other}` (valid: orszag_tang, rotor)"
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::OrszagTang => "orszag_tang",
            Problem::Rotor => "rotor",
        })
    }
}

pub fn init_orszag_tang(x: f64, y: f64) -> Primitive {
    let s4pi = (4.0 * PI).sqrt();
    let (sx, sy) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin());
    Primitive {
        rho: 25.0 / (36.0 * PI),
        v: [-sy, sx, 0.0],
        p: 5.0 / (12.0 * PI),
        b: [-sy / s4pi, -(4.0 * PI * x).sin() / s4pi, 0.0],
        psi: 0.0,
    }
}

/// Rotor density and angular velocity factor at radius `r` from the centre.
pub fn rotor_profile(r: f64) -> (f64, f64) {
    let (r0, r1, u0) = (0.1, 0.115, 2.0);
    if r < r0 {
        (10.0, u0 / r0)
    } else if r < r1 {
        let f = (r1 - r) / (r1 - r0);
        (1.0 + 9.0 * f, f * u0 / r0)
    } else {
        (1.0, 0.0)
    }
}

pub fn init_rotor(x: f64, y: f64) -> Primitive {
    let (dx, dy) = (x - 0.5, y - 0.5);
    let swirl = [-dy, dx, 0.0];
    let (rho, scale) = rotor_profile((dx * dx + dy * dy).sqrt());
    Primitive {
        rho,
        v: swirl.map(|c| c * scale),
        p: 1.0,
        b: [5.0 / (4.0 * PI), 0.0, 0.0],
        psi: 0.0,
    }
}

/// Operator family and size: `lgl:<degree>` or `fdsbp:<nodes>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub kind: OperatorKind,
    /// Polynomial degree for LGL, node count for FD-SBP.
    pub size: usize,
}

impl SchemeSpec {
    pub fn build(&self) -> Result<SbpOperator1D> {
        match self.kind {
            OperatorKind::Lgl => build_lgl_operator(self.size),
            OperatorKind::FdSbp => build_fd_sbp_operator(self.size),
        }
    }

    pub fn nodes_per_element(&self) -> usize {
        match self.kind {
            OperatorKind::Lgl => self.size + 1,
            OperatorKind::FdSbp => self.size,
        }
    }

    pub fn reference_dof(&self) -> usize {
        match self.kind {
            OperatorKind::Lgl => REFERENCE_DOF_LGL,
            OperatorKind::FdSbp => REFERENCE_DOF_FD,
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::config(format!(
                "invalid scheme `{s}` (expected lgl:<degree> or fdsbp:<nodes>)"
            ))
        };
        let (kind, size) = s.split_once(':').ok_or_else(bad)?;
        let size: usize = size.parse().map_err(|_| bad())?;
        let kind = match kind {
            "lgl" => OperatorKind::Lgl,
            "fdsbp" => OperatorKind::FdSbp,
            _ => return Err(bad()),
        };
        Ok(SchemeSpec { kind, size })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.size)
    }
}

/// Everything needed to start a benchmark run.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub problem: Problem,
    pub op: SbpOperator1D,
    pub mesh: Mesh2D,
    pub params: EquationParams,
    pub dt: f64,
    pub t_end: f64,
}

impl ProblemSetup {
    pub fn initial_state(&self, x: f64, y: f64) -> Primitive {
        self.problem.initial_state(x, y)
    }
}

/// Mesh, operator and time step for `dof_per_axis` nodes per direction. The
/// time step is the reference step scaled with the node spacing.
pub fn configure_run(
    problem: Problem,
    scheme: SchemeSpec,
    dof_per_axis: usize,
) -> Result<ProblemSetup> {
    let npe = scheme.nodes_per_element();
    if dof_per_axis == 0 || !dof_per_axis.is_multiple_of(npe) {
        return Err(Error::config(format!(
            "{dof_per_axis} DOF per axis is not a multiple of {npe} nodes per element"
        )));
    }
    let op = scheme.build().map_err(|e| Error::config(e.to_string()))?;
    let ne = dof_per_axis / npe;
    let mesh = Mesh2D::periodic(ne, ne, [0.0, 1.0, 0.0, 1.0])?;
    let dt = REFERENCE_DT * scheme.reference_dof() as f64 / dof_per_axis as f64;
    let t_end = match problem {
        Problem::OrszagTang => 0.5,
        Problem::Rotor => 0.15,
    };
    Ok(ProblemSetup {
        problem,
        op,
        mesh,
        params: EquationParams::default(),
        dt,
        t_end,
    })
}
