//! One-dimensional diagonal-norm summation-by-parts operators on the
//! reference interval `[-1, 1]`.
//!
//! Two families are provided: the Legendre-Gauss-Lobatto collocation
//! operator used by the DGSEM, and the classical 2-4 finite-difference SBP
//! operator (fourth-order interior, second-order boundary closure).
//!
//! Every operator carries the mass weights `m_j`, the derivative matrix `D`,
//! `Q = M D`, the boundary matrix `B = diag(-1, 0, ..., 0, 1)` and the skew
//! part `S = Q - Q^T`. For an SBP pair `Q + Q^T = B`, so `S = 2Q - B`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Lgl,
    FdSbp,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Lgl => write!(f, "lgl"),
            OperatorKind::FdSbp => write!(f, "fdsbp"),
        }
    }
}

/// Small dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// A 1D diagonal-norm SBP operator. Immutable once built.
#[derive(Debug, Clone)]
pub struct SbpOperator1D {
    pub kind: OperatorKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub d: DenseMatrix,
    pub q: DenseMatrix,
    pub s: DenseMatrix,
    pub b: DenseMatrix,
    /// Non-zero entries of `S` per row, `(column, value)`.
    s_rows: Vec<Vec<(usize, f64)>>,
}

impl SbpOperator1D {
    /// Assembles an operator from nodes, weights and `D`. `Q`, `S` and `B`
    /// are derived; no validation is performed here (see [`verify_sbp`]).
    pub fn from_parts(
        kind: OperatorKind,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        d: DenseMatrix,
    ) -> Self {
        let n = nodes.len();
        assert!(n >= 2 && weights.len() == n && d.dim() == n);
        let q = DenseMatrix::from_fn(n, |i, j| weights[i] * d.get(i, j));
        let s = DenseMatrix::from_fn(n, |i, j| q.get(i, j) - q.get(j, i));
        let mut b = DenseMatrix::zeros(n);
        b.set(0, 0, -1.0);
        b.set(n - 1, n - 1, 1.0);
        let s_rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| s.get(i, j) != 0.0)
                    .map(|j| (j, s.get(i, j)))
                    .collect()
            })
            .collect();
        Self {
            kind,
            nodes,
            weights,
            d,
            q,
            s,
            b,
            s_rows,
        }
    }

    /// Number of nodes, `N + 1`.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Non-zero `(k, S_jk)` pairs of row `j`, in increasing column order.
    #[inline]
    pub fn s_row(&self, j: usize) -> &[(usize, f64)] {
        &self.s_rows[j]
    }

    /// Highest polynomial degree differentiated exactly by every row.
    pub fn boundary_order(&self) -> usize {
        match self.kind {
            OperatorKind::Lgl => self.n_nodes() - 1,
            OperatorKind::FdSbp => 2,
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64, f64) {
    // returns (P_n, P'_n, P_{n-1})
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp, p_prev)
}

/// Lagrange differentiation matrix on arbitrary distinct nodes, from
/// barycentric weights. Diagonal entries are negative row sums so that
/// constants are annihilated to rounding.
pub fn lagrange_differentiation_matrix(nodes: &[f64]) -> DenseMatrix {
    let n = nodes.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product::<f64>()
        })
        .collect();
    let mut d = DenseMatrix::zeros(n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d.set(i, j, v);
                diag -= v;
            }
        }
        d.set(i, i, diag);
    }
    d
}

/// Legendre-Gauss-Lobatto nodes and weights for polynomial degree `n`.
///
/// Interior nodes are roots of `(1 - x^2) P'_n(x)`, found by Newton
/// iteration from the Chebyshev-Lobatto points.
pub fn lgl_nodes_and_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| -(std::f64::consts::PI * i as f64 / nf).cos())
        .collect();
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for x in nodes.iter_mut().take(n).skip(1) {
        for _ in 0..100 {
            let (p, dp, _) = legendre_with_derivative(n, *x);
            // q = (1-x^2) P'_n, q' = -n(n+1) P_n by the Legendre equation.
            let step = (1.0 - *x * *x) * dp / (nf * (nf + 1.0) * p);
            *x += step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
    }
    // Enforce exact mirror symmetry about 0.
    for i in 0..=n / 2 {
        let a = 0.5 * (nodes[n - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - i] = a;
    }
    if n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _, _) = legendre_with_derivative(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    (nodes, weights)
}

/// LGL collocation operator of the given polynomial degree.
pub fn build_lgl_operator(poly_degree: usize) -> Result<SbpOperator1D> {
    if poly_degree == 0 {
        return Err(Error::InvalidOperator(
            "LGL operator needs polynomial degree >= 1".into(),
        ));
    }
    let (nodes, weights) = lgl_nodes_and_weights(poly_degree);
    let d = lagrange_differentiation_matrix(&nodes);
    Ok(SbpOperator1D::from_parts(
        OperatorKind::Lgl,
        nodes,
        weights,
        d,
    ))
}

/// Minimum block size of the 2-4 finite-difference operator.
pub const FD_SBP_MIN_NODES: usize = 13;

// Boundary closure of the diagonal-norm 2-4 operator in units of 1/h.
const FD_CLOSURE_ROWS: [[f64; 6]; 4] = [
    [
        -24.0 / 17.0,
        59.0 / 34.0,
        -4.0 / 17.0,
        -3.0 / 34.0,
        0.0,
        0.0,
    ],
    [-0.5, 0.0, 0.5, 0.0, 0.0, 0.0],
    [4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0],
    [3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0],
];
const FD_CLOSURE_NORM: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];
const FD_INTERIOR: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];

/// Diagonal-norm 2-4 finite-difference SBP operator on `n_nodes`
/// equispaced nodes spanning `[-1, 1]`.
pub fn build_fd_sbp_operator(n_nodes: usize) -> Result<SbpOperator1D> {
    if n_nodes < FD_SBP_MIN_NODES {
        return Err(Error::InvalidOperator(format!(
            "FD-SBP operator needs at least {FD_SBP_MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    let n = n_nodes;
    let h = 2.0 / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 1.0 } else { -1.0 + i as f64 * h })
        .collect();

    let mut weights = vec![h; n];
    let mut d = DenseMatrix::zeros(n);
    for (r, row) in FD_CLOSURE_ROWS.iter().enumerate() {
        weights[r] = FD_CLOSURE_NORM[r] * h;
        weights[n - 1 - r] = FD_CLOSURE_NORM[r] * h;
        for (c, &v) in row.iter().enumerate() {
            d.set(r, c, v / h);
            d.set(n - 1 - r, n - 1 - c, -v / h);
        }
    }
    for r in 4..n - 4 {
        for (k, &v) in FD_INTERIOR.iter().enumerate() {
            d.set(r, r + k - 2, v / h);
        }
    }
    Ok(SbpOperator1D::from_parts(
        OperatorKind::FdSbp,
        nodes,
        weights,
        d,
    ))
}

/// Maximum violations of the structural SBP invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub kind: OperatorKind,
    pub n_nodes: usize,
    /// `max |(MD) + (MD)^T - B|`
    pub sbp_property: f64,
    /// `max |S + S^T|`
    pub skew_symmetry: f64,
    /// `|sum(weights) - 2|`
    pub weight_sum: f64,
    pub min_weight: f64,
    /// `max |D 1|`
    pub constant_annihilation: f64,
    /// `max |D x - 1|`
    pub linear_exactness: f64,
    /// Worst relative error of `D x^k` over the degrees the operator claims.
    pub polynomial_exactness: f64,
    /// `max(|x_0 + 1|, |x_N - 1|)`
    pub endpoints: f64,
    /// Strictly increasing nodes.
    pub nodes_increasing: bool,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.sbp_property <= tol
            && self.skew_symmetry == 0.0
            && self.weight_sum <= tol
            && self.min_weight > 0.0
            && self.constant_annihilation <= 10.0 * tol
            && self.linear_exactness <= 10.0 * tol
            && self.polynomial_exactness <= 100.0 * tol
            && self.endpoints == 0.0
            && self.nodes_increasing
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "operator              {} ({} nodes)",
            self.kind, self.n_nodes
        )?;
        writeln!(f, "|Q + Q^T - B|_max     {:.3e}", self.sbp_property)?;
        writeln!(f, "|S + S^T|_max         {:.3e}", self.skew_symmetry)?;
        writeln!(f, "|sum(w) - 2|          {:.3e}", self.weight_sum)?;
        writeln!(f, "min weight            {:.6e}", self.min_weight)?;
        writeln!(
            f,
            "|D 1|_max             {:.3e}",
            self.constant_annihilation
        )?;
        writeln!(f, "|D x - 1|_max         {:.3e}", self.linear_exactness)?;
        writeln!(f, "polynomial exactness  {:.3e}", self.polynomial_exactness)?;
        writeln!(f, "endpoint error        {:.3e}", self.endpoints)?;
        write!(f, "nodes increasing      {}", self.nodes_increasing)
    }
}

/// Relative error of `D x^k` against `k x^(k-1)` on the given rows.
fn monomial_error(op: &SbpOperator1D, k: i32, rows: impl Iterator<Item = usize>) -> f64 {
    let xk: Vec<f64> = op.nodes.iter().map(|x| x.powi(k)).collect();
    let dx = op.d.apply(&xk);
    let scale = op.d.row(0).iter().map(|v| v.abs()).sum::<f64>().max(1.0) * k as f64;
    rows.map(|i| {
        let exact = k as f64 * op.nodes[i].powi(k - 1);
        (dx[i] - exact).abs() / scale
    })
    .fold(0.0, f64::max)
}

/// Checks every structural invariant of `op`. Never fails; the caller
/// decides what tolerance to apply.
pub fn verify_sbp(op: &SbpOperator1D) -> ValidationReport {
    let n = op.n_nodes();
    let mut sbp_property: f64 = 0.0;
    let mut skew_symmetry: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let qij = op.weights[i] * op.d.get(i, j);
            let qji = op.weights[j] * op.d.get(j, i);
            let bij = if i == j && i == 0 {
                -1.0
            } else if i == j && i == n - 1 {
                1.0
            } else {
                0.0
            };
            sbp_property = sbp_property.max((qij + qji - bij).abs());
            skew_symmetry = skew_symmetry.max((op.s.get(i, j) + op.s.get(j, i)).abs());
        }
    }
    let ones = vec![1.0; n];
    let d1 = op.d.apply(&ones);
    let dx = op.d.apply(&op.nodes);

    let poly = match op.kind {
        OperatorKind::Lgl => (2..n as i32)
            .map(|k| monomial_error(op, k, 0..n))
            .fold(0.0, f64::max),
        OperatorKind::FdSbp => {
            let closure = monomial_error(op, 2, 0..n);
            let interior = (3..=4)
                .map(|k| monomial_error(op, k, 4..n - 4))
                .fold(0.0, f64::max);
            closure.max(interior)
        }
    };

    ValidationReport {
        kind: op.kind,
        n_nodes: n,
        sbp_property,
        skew_symmetry,
        weight_sum: (op.weights.iter().sum::<f64>() - 2.0).abs(),
        min_weight: op.weights.iter().copied().fold(f64::INFINITY, f64::min),
        constant_annihilation: d1.iter().map(|v| v.abs()).fold(0.0, f64::max),
        linear_exactness: dx.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max),
        polynomial_exactness: poly,
        endpoints: (op.nodes[0] + 1.0).abs().max((op.nodes[n - 1] - 1.0).abs()),
        nodes_increasing: op.nodes.windows(2).all(|w| w[0] < w[1]),
    }
}
