//! Uniform periodic Cartesian meshes, tensor-product nodal fields and
//! exterior trace exchange.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::physics::ConsState;
use crate::sbp_ops::SbpOperator1D;

/// Jacobian and scaled contravariant vectors of one (Cartesian) element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub jacobian: f64,
    pub ja: [[f64; 3]; 2],
}

impl MetricData {
    pub fn cartesian(dx: f64, dy: f64) -> Self {
        MetricData {
            jacobian: 0.25 * dx * dy,
            ja: [[0.5 * dy, 0.0, 0.0], [0.0, 0.5 * dx, 0.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub periodic: [bool; 2],
}

impl Mesh2D {
    /// Periodic mesh of `nx` x `ny` elements covering `[x0, x1] x [y0, y1]`.
    pub fn periodic(nx: usize, ny: usize, extent: [f64; 4]) -> Result<Self> {
        let [x0, x1, y0, y1] = extent;
        if nx == 0 || ny == 0 {
            return Err(Error::config("mesh needs at least one element per axis"));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::config("mesh extent must have positive size"));
        }
        Ok(Mesh2D {
            nx,
            ny,
            x0,
            y0,
            dx: (x1 - x0) / nx as f64,
            dy: (y1 - y0) / ny as f64,
            periodic: [true, true],
        })
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    /// Element index and its (ex, ey) position are related by `e = ey*nx + ex`.
    #[inline]
    pub fn element_xy(&self, e: usize) -> (usize, usize) {
        (e % self.nx, e / self.nx)
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        ey * self.nx + ex
    }

    pub fn metric(&self) -> MetricData {
        MetricData::cartesian(self.dx, self.dy)
    }

    pub fn area(&self) -> f64 {
        self.dx * self.dy * self.n_elements() as f64
    }

    /// Neighbour of element `e` across face `face` (0 west, 1 east, 2 south,
    /// 3 north).
    pub fn neighbor(&self, e: usize, face: usize) -> Result<usize> {
        let (ex, ey) = self.element_xy(e);
        let axis = face / 2;
        if !self.periodic[axis] {
            return Err(Error::Unsupported(
                "non-periodic boundaries are not implemented".into(),
            ));
        }
        let (nx, ny) = (self.nx, self.ny);
        Ok(match face {
            0 => self.element_index((ex + nx - 1) % nx, ey),
            1 => self.element_index((ex + 1) % nx, ey),
            2 => self.element_index(ex, (ey + ny - 1) % ny),
            _ => self.element_index(ex, (ey + 1) % ny),
        })
    }

    /// Physical coordinates of node `(i, j)` of element `e`.
    pub fn node_coords(&self, op: &SbpOperator1D, e: usize, i: usize, j: usize) -> (f64, f64) {
        let (ex, ey) = self.element_xy(e);
        let x = self.x0 + (ex as f64 + 0.5 * (op.nodes[i] + 1.0)) * self.dx;
        let y = self.y0 + (ey as f64 + 0.5 * (op.nodes[j] + 1.0)) * self.dy;
        (x, y)
    }
}

/// Nodal values of all elements, element-major, then `j` (y), then `i` (x).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<ConsState>,
}

impl SolutionField {
    pub fn zeros(n: usize, mesh: &Mesh2D) -> Self {
        SolutionField {
            n,
            nx: mesh.nx,
            ny: mesh.ny,
            data: vec![ConsState::ZERO; n * n * mesh.n_elements()],
        }
    }

    /// Fills every node from a function of physical coordinates.
    pub fn from_fn(
        op: &SbpOperator1D,
        mesh: &Mesh2D,
        f: impl Fn(f64, f64) -> ConsState + Sync,
    ) -> Self {
        let n = op.n_nodes();
        let mut field = Self::zeros(n, mesh);
        field
            .data
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(e, chunk)| {
                for j in 0..n {
                    for i in 0..n {
                        let (x, y) = mesh.node_coords(op, e, i, j);
                        chunk[j * n + i] = f(x, y);
                    }
                }
            });
        field
    }

    #[inline]
    pub fn nodes_per_element(&self) -> usize {
        self.n * self.n
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, e: usize, i: usize, j: usize) -> usize {
        e * self.n * self.n + j * self.n + i
    }

    #[inline]
    pub fn get(&self, e: usize, i: usize, j: usize) -> &ConsState {
        &self.data[self.idx(e, i, j)]
    }

    pub fn element(&self, e: usize) -> &[ConsState] {
        let nn = self.n * self.n;
        &self.data[e * nn..(e + 1) * nn]
    }

    pub fn matches(&self, op: &SbpOperator1D, mesh: &Mesh2D) -> bool {
        self.n == op.n_nodes()
            && self.nx == mesh.nx
            && self.ny == mesh.ny
            && self.data.len() == self.n * self.n * mesh.n_elements()
    }

    /// `sum_e sum_ij J w_i w_j u_ij`
    pub fn integrate(&self, op: &SbpOperator1D, mesh: &Mesh2D) -> ConsState {
        let jac = mesh.metric().jacobian;
        let n = self.n;
        let mut total = ConsState::ZERO;
        for e in 0..self.n_elements() {
            for j in 0..n {
                for i in 0..n {
                    total += *self.get(e, i, j) * (jac * op.weights[i] * op.weights[j]);
                }
            }
        }
        total
    }
}

/// Exterior states seen by each element face: per element, faces
/// (west, east, south, north), `n` states per face ordered along the face.
#[derive(Debug, Clone)]
pub struct InterfaceTraces {
    pub n: usize,
    pub data: Vec<ConsState>,
}

impl InterfaceTraces {
    #[inline]
    pub fn face(&self, e: usize, face: usize) -> &[ConsState] {
        let start = (e * 4 + face) * self.n;
        &self.data[start..start + self.n]
    }
}

pub fn gather_interface_traces(field: &SolutionField, mesh: &Mesh2D) -> Result<InterfaceTraces> {
    let n = field.n;
    let last = n - 1;
    let mut data = vec![ConsState::ZERO; field.n_elements() * 4 * n];
    for (e, faces) in data.chunks_mut(4 * n).enumerate() {
        let nb = [
            mesh.neighbor(e, 0)?,
            mesh.neighbor(e, 1)?,
            mesh.neighbor(e, 2)?,
            mesh.neighbor(e, 3)?,
        ];
        for k in 0..n {
            faces[k] = *field.get(nb[0], last, k);
            faces[n + k] = *field.get(nb[1], 0, k);
            faces[2 * n + k] = *field.get(nb[2], k, last);
            faces[3 * n + k] = *field.get(nb[3], k, 0);
        }
    }
    Ok(InterfaceTraces { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp_ops::build_lgl_operator;

    fn tagged(op: &SbpOperator1D, mesh: &Mesh2D) -> SolutionField {
        let n = op.n_nodes();
        let mut f = SolutionField::zeros(n, mesh);
        for e in 0..mesh.n_elements() {
            for j in 0..n {
                for i in 0..n {
                    let k = f.idx(e, i, j);
                    f.data[k][0] = (e * 100 + j * 10 + i) as f64;
                }
            }
        }
        f
    }

    #[test]
    fn cartesian_metric() {
        let m = MetricData::cartesian(0.5, 0.25);
        assert_eq!(m.jacobian, 0.5 * 0.25 / 4.0);
        assert_eq!(m.ja[0], [0.125, 0.0, 0.0]);
        assert_eq!(m.ja[1], [0.0, 0.25, 0.0]);
    }

    #[test]
    fn two_element_ring_traces() {
        let op = build_lgl_operator(3).unwrap();
        let mesh = Mesh2D::periodic(2, 1, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let f = tagged(&op, &mesh);
        let t = gather_interface_traces(&f, &mesh).unwrap();
        for k in 0..4 {
            assert_eq!(t.face(0, 0)[k], *f.get(1, 3, k));
            assert_eq!(t.face(0, 1)[k], *f.get(1, 0, k));
            assert_eq!(t.face(1, 0)[k], *f.get(0, 3, k));
        }
    }

    #[test]
    fn single_element_sees_itself() {
        let op = build_lgl_operator(2).unwrap();
        let mesh = Mesh2D::periodic(1, 1, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let f = tagged(&op, &mesh);
        let t = gather_interface_traces(&f, &mesh).unwrap();
        for k in 0..3 {
            assert_eq!(t.face(0, 0)[k], *f.get(0, 2, k));
            assert_eq!(t.face(0, 1)[k], *f.get(0, 0, k));
            assert_eq!(t.face(0, 2)[k], *f.get(0, k, 2));
            assert_eq!(t.face(0, 3)[k], *f.get(0, k, 0));
        }
    }

    #[test]
    fn three_ring_shifts_compose_to_identity() {
        let mesh = Mesh2D::periodic(3, 2, [0.0, 1.0, 0.0, 1.0]).unwrap();
        for e in 0..mesh.n_elements() {
            let mut cur = e;
            for _ in 0..3 {
                cur = mesh.neighbor(cur, 1).unwrap();
            }
            assert_eq!(cur, e);
            let mut cur = e;
            for _ in 0..3 {
                cur = mesh.neighbor(cur, 0).unwrap();
            }
            assert_eq!(cur, e);
            assert_eq!(mesh.neighbor(mesh.neighbor(e, 3).unwrap(), 3).unwrap(), e);
        }
    }

    #[test]
    fn non_periodic_is_unsupported() {
        let mut mesh = Mesh2D::periodic(2, 2, [0.0, 1.0, 0.0, 1.0]).unwrap();
        mesh.periodic[0] = false;
        let op = build_lgl_operator(1).unwrap();
        let f = SolutionField::zeros(op.n_nodes(), &mesh);
        assert!(matches!(
            gather_interface_traces(&f, &mesh),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn integration_of_constant_is_area() {
        let op = build_lgl_operator(3).unwrap();
        let mesh = Mesh2D::periodic(3, 2, [0.0, 2.0, -1.0, 0.5]).unwrap();
        let f = SolutionField::from_fn(&op, &mesh, |_, _| {
            ConsState([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        });
        assert!((f.integrate(&op, &mesh)[0] - 3.0).abs() < 1e-14);
    }
}
