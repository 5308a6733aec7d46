//! Direct split-form SBP right-hand side on periodic Cartesian meshes.

use rayon::prelude::*;

use crate::error::{Error, NodeLocation, Result};
use crate::fluxes::{
    central_volume_flux, noncons_splits, rusanov_surface_flux, surface_noncons, VolumeFlux,
};
use crate::mesh::{gather_interface_traces, InterfaceTraces, Mesh2D, SolutionField};
use crate::physics::{pressure, ConsState, EquationParams};
use crate::sbp_ops::SbpOperator1D;

/// Everything the spatial operator needs besides the solution.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub op: SbpOperator1D,
    pub mesh: Mesh2D,
    pub params: EquationParams,
    pub volume_flux: VolumeFlux,
}

impl Scheme {
    pub fn new(
        op: SbpOperator1D,
        mesh: Mesh2D,
        params: EquationParams,
        volume_flux: VolumeFlux,
    ) -> Result<Self> {
        params.validate()?;
        volume_flux.resolve()?;
        Ok(Scheme {
            op,
            mesh,
            params,
            volume_flux,
        })
    }

    pub fn n(&self) -> usize {
        self.op.n_nodes()
    }

    pub(crate) fn check_field(&self, field: &SolutionField) -> Result<()> {
        if !field.matches(&self.op, &self.mesh) {
            return Err(Error::config(
                "field shape does not match operator and mesh",
            ));
        }
        Ok(())
    }
}

/// Fails on the first node with non-positive density or pressure (or a
/// non-finite value).
pub fn check_admissible(field: &SolutionField, p: &EquationParams) -> Result<()> {
    let n = field.n;
    let bad = field
        .data
        .par_iter()
        .position_first(|u| !(u.is_finite() && u.rho() > 0.0 && pressure(u, p) > 0.0));
    match bad {
        None => Ok(()),
        Some(k) => {
            let u = &field.data[k];
            let reason = if !u.is_finite() {
                "non-finite state"
            } else if u.rho() <= 0.0 {
                "non-positive density"
            } else {
                "non-positive pressure"
            };
            let nn = n * n;
            Err(Error::Inadmissible {
                reason,
                location: NodeLocation {
                    element: k / nn,
                    i: k % n,
                    j: (k % nn) / n,
                },
            })
        }
    }
}

/// Copies line `line` of an element along `axis` into `out`.
#[inline]
pub(crate) fn extract_line(
    elem: &[ConsState],
    n: usize,
    axis: usize,
    line: usize,
    out: &mut [ConsState],
) {
    for (k, slot) in out.iter_mut().enumerate().take(n) {
        *slot = if axis == 0 {
            elem[line * n + k]
        } else {
            elem[k * n + line]
        };
    }
}

#[inline]
pub(crate) fn line_traces(
    traces: &InterfaceTraces,
    e: usize,
    axis: usize,
    line: usize,
) -> (ConsState, ConsState) {
    (
        traces.face(e, 2 * axis)[line],
        traces.face(e, 2 * axis + 1)[line],
    )
}

/// `-sum_k S_jk (f* + Phi*)_(j,k)` plus the two interface terms, for every
/// node of one line (i.e. `m_j du_j/dt` in reference units).
pub(crate) fn line_direct(
    op: &SbpOperator1D,
    line: &[ConsState],
    ul: &ConsState,
    ur: &ConsState,
    ja: [f64; 3],
    p: &EquationParams,
    out: &mut [ConsState],
) {
    let n = op.n_nodes();
    for j in 0..n {
        let uj = &line[j];
        let mut acc = ConsState::ZERO;
        for &(k, s) in op.s_row(j) {
            let uk = &line[k];
            let [pw, glm] = noncons_splits(uj, uk, ja, p);
            acc += (central_volume_flux(uj, uk, ja, p) + pw.assemble() + glm.assemble()) * s;
        }
        out[j] = -acc;
    }
    out[0] += rusanov_surface_flux(ul, &line[0], ja, p) + surface_noncons(&line[0], ul, ja, p);
    out[n - 1] -=
        rusanov_surface_flux(&line[n - 1], ur, ja, p) + surface_noncons(&line[n - 1], ur, ja, p);
}

/// Nodal time derivative of the split-form SBP discretization.
pub fn compute_rhs_direct(field: &SolutionField, scheme: &Scheme) -> Result<SolutionField> {
    scheme.check_field(field)?;
    scheme.volume_flux.resolve()?;
    check_admissible(field, &scheme.params)?;
    let traces = gather_interface_traces(field, &scheme.mesh)?;
    let op = &scheme.op;
    let p = &scheme.params;
    let metric = scheme.mesh.metric();
    let n = op.n_nodes();
    let mut rate = field.clone();
    rate.data
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(e, out)| {
            let elem = field.element(e);
            let mut line = vec![ConsState::ZERO; n];
            let mut res = vec![ConsState::ZERO; n];
            out.fill(ConsState::ZERO);
            for axis in 0..2 {
                for l in 0..n {
                    extract_line(elem, n, axis, l, &mut line);
                    let (ul, ur) = line_traces(&traces, e, axis, l);
                    line_direct(op, &line, &ul, &ur, metric.ja[axis], p, &mut res);
                    for k in 0..n {
                        let scale = 1.0 / (metric.jacobian * op.weights[k]);
                        let idx = if axis == 0 { l * n + k } else { k * n + l };
                        out[idx] += res[k] * scale;
                    }
                }
            }
        });
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{advective_flux, prim_to_cons, Primitive};
    use crate::sbp_ops::{build_fd_sbp_operator, build_lgl_operator};

    fn scheme(op: SbpOperator1D, nx: usize, ny: usize) -> Scheme {
        let mesh = Mesh2D::periodic(nx, ny, [0.0, 1.0, 0.0, 1.0]).unwrap();
        Scheme::new(op, mesh, EquationParams::default(), VolumeFlux::Central).unwrap()
    }

    #[test]
    fn free_stream_is_preserved() {
        for op in [
            build_lgl_operator(3).unwrap(),
            build_fd_sbp_operator(13).unwrap(),
        ] {
            let s = scheme(op, 3, 2);
            let w = Primitive {
                rho: 1.3,
                v: [0.4, -0.7, 0.2],
                p: 0.9,
                b: [0.3, 0.5, -0.4],
                psi: 0.1,
            };
            let u = prim_to_cons(&w, &s.params);
            let f = SolutionField::from_fn(&s.op, &s.mesh, |_, _| u);
            let r = compute_rhs_direct(&f, &s).unwrap();
            let m = r.data.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
            assert!(m <= 1e-12, "{m}");
        }
    }

    #[test]
    fn inadmissible_node_is_located() {
        let s = scheme(build_lgl_operator(2).unwrap(), 2, 2);
        let u = prim_to_cons(
            &Primitive {
                rho: 1.0,
                v: [0.0; 3],
                p: 1.0,
                b: [0.0; 3],
                psi: 0.0,
            },
            &s.params,
        );
        let mut f = SolutionField::from_fn(&s.op, &s.mesh, |_, _| u);
        let k = f.idx(3, 1, 2);
        f.data[k][4] = -1.0;
        match compute_rhs_direct(&f, &s) {
            Err(Error::Inadmissible { location, .. }) => {
                assert_eq!(
                    location,
                    NodeLocation {
                        element: 3,
                        i: 1,
                        j: 2
                    }
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn n1_single_element_matches_hand_assembly() {
        // Two nodes in x, flow only in x, B = psi = 0: with S = [[0,1],[-1,0]]
        // and periodic traces (uL = u1, uR = u0):
        //   w0 du0 = -(f0+f1)/2 + f<>(u1,u0)
        //   w1 du1 =  (f0+f1)/2 - f<>(u1,u0)
        // scaled by Ja = dy/2 and divided by J w.
        let s = scheme(build_lgl_operator(1).unwrap(), 1, 1);
        let p = s.params;
        let u0 = prim_to_cons(
            &Primitive {
                rho: 1.0,
                v: [0.3, 0.0, 0.0],
                p: 1.0,
                b: [0.0; 3],
                psi: 0.0,
            },
            &p,
        );
        let u1 = prim_to_cons(
            &Primitive {
                rho: 0.6,
                v: [-0.2, 0.0, 0.0],
                p: 0.7,
                b: [0.0; 3],
                psi: 0.0,
            },
            &p,
        );
        let mut f = SolutionField::zeros(2, &s.mesh);
        for j in 0..2 {
            f.data[j * 2] = u0;
            f.data[j * 2 + 1] = u1;
        }
        let r = compute_rhs_direct(&f, &s).unwrap();
        let f0 = advective_flux(&u0, 0, &p);
        let f1 = advective_flux(&u1, 0, &p);
        // Rusanov by hand
        let c =
            |u: &ConsState| (p.gamma * pressure(u, &p) / u.rho()).sqrt() + u.velocity()[0].abs();
        let lam = c(&u0).max(c(&u1)).max(p.c_h);
        let fs = (f0 + f1) * 0.5 - (u0 - u1) * (0.5 * lam);
        let ja = 0.5;
        let jac = 0.25;
        let d0 = ((f0 + f1) * -0.5 + fs) * (ja / jac);
        let d1 = ((f0 + f1) * 0.5 - fs) * (ja / jac);
        for j in 0..2 {
            for k in 0..9 {
                assert!((r.get(0, 0, j)[k] - d0[k]).abs() < 1e-13);
                assert!((r.get(0, 1, j)[k] - d1[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mass_is_conserved() {
        let s = scheme(build_lgl_operator(3).unwrap(), 3, 3);
        let p = s.params;
        let f = SolutionField::from_fn(&s.op, &s.mesh, |x, y| {
            let t = std::f64::consts::TAU;
            prim_to_cons(
                &Primitive {
                    rho: 1.0 + 0.3 * (t * x).sin() * (t * y).cos(),
                    v: [(t * y).sin(), 0.5 * (t * x).cos(), 0.1],
                    p: 1.0 + 0.2 * (t * (x + y)).cos(),
                    b: [0.4 * (t * y).cos(), -0.3 * (2.0 * t * x).sin(), 0.1],
                    psi: 0.05 * (t * x).sin(),
                },
                &p,
            )
        });
        let r = compute_rhs_direct(&f, &s).unwrap();
        let mass = r.integrate(&s.op, &s.mesh)[0];
        let scale = r.data.iter().map(|u| u[0].abs()).fold(0.0, f64::max);
        assert!(mass.abs() <= 1e-12 * (1.0 + scale), "{mass}");
    }

    #[test]
    fn ec_flux_is_rejected() {
        let mesh = Mesh2D::periodic(1, 1, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let r = Scheme::new(
            build_lgl_operator(1).unwrap(),
            mesh,
            EquationParams::default(),
            VolumeFlux::EntropyConservative,
        );
        assert!(matches!(r, Err(Error::Unavailable(_))));
    }
}
