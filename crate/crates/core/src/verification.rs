//! Randomised cross-checks between the direct split form and the
//! flux-differencing form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flux_diff::{compute_rhs_fluxdiff, compute_staggered_sbp};
use crate::fluxes::VolumeFlux;
use crate::mesh::{Mesh2D, SolutionField};
use crate::physics::{prim_to_cons, ConsState, EquationParams, Primitive};
use crate::sbp_ops::SbpOperator1D;
use crate::semidisc::{compute_rhs_direct, Scheme};

/// An admissible state with O(1) entries. With `mhd = false` the magnetic
/// field and `psi` vanish.
pub fn random_admissible_state(rng: &mut impl Rng, p: &EquationParams, mhd: bool) -> ConsState {
    let mut r = |a: f64, b: f64| rng.gen_range(a..b);
    let w = Primitive {
        rho: r(0.5, 2.0),
        v: [r(-1.0, 1.0), r(-1.0, 1.0), r(-0.5, 0.5)],
        p: r(0.5, 2.0),
        b: if mhd {
            [r(-1.0, 1.0), r(-1.0, 1.0), r(-0.5, 0.5)]
        } else {
            [0.0; 3]
        },
        psi: if mhd { r(-0.3, 0.3) } else { 0.0 },
    };
    prim_to_cons(&w, p)
}

/// Field of independent random admissible node states.
pub fn random_field(
    n: usize,
    mesh: &Mesh2D,
    p: &EquationParams,
    rng: &mut impl Rng,
    mhd: bool,
) -> SolutionField {
    let mut f = SolutionField::zeros(n, mesh);
    for u in f.data.iter_mut() {
        *u = random_admissible_state(rng, p, mhd);
    }
    f
}

/// `max |a - b| / (1 + |a|)` over all nodes and variables.
pub fn max_scaled_deviation(a: &SolutionField, b: &SolutionField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .flat_map(|(x, y)| (0..9).map(move |k| (x[k] - y[k]).abs() / (1.0 + x[k].abs())))
        .fold(0.0, f64::max)
}

/// Largest scaled difference between the direct and the flux-differencing
/// right-hand sides over `fields` random fields on an `elements` x
/// `elements` periodic unit-square mesh.
pub fn equivalence_deviation(
    op: &SbpOperator1D,
    elements: usize,
    fields: usize,
    seed: u64,
) -> Result<f64> {
    let mesh = Mesh2D::periodic(elements, elements, [0.0, 1.0, 0.0, 1.0])?;
    let scheme = Scheme::new(
        op.clone(),
        mesh,
        EquationParams::default(),
        VolumeFlux::Central,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..fields {
        let f = random_field(op.n_nodes(), &scheme.mesh, &scheme.params, &mut rng, true);
        let direct = compute_rhs_direct(&f, &scheme)?;
        let fd = compute_rhs_fluxdiff(&f, &scheme, None)?;
        worst = worst.max(max_scaled_deviation(&direct, &fd));
    }
    Ok(worst)
}

/// Largest `|Gamma_(j,j+1) - Gamma_(j+1,j)|` over the interior interfaces of
/// `lines` random lines (with exterior traces) of the operator.
pub fn interface_asymmetry(op: &SbpOperator1D, lines: usize, seed: u64, mhd: bool) -> f64 {
    let p = EquationParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.n_nodes();
    let ja = [0.25, 0.0, 0.0];
    let mut worst: f64 = 0.0;
    for _ in 0..lines {
        let line: Vec<ConsState> = (0..n)
            .map(|_| random_admissible_state(&mut rng, &p, mhd))
            .collect();
        let ul = random_admissible_state(&mut rng, &p, mhd);
        let ur = random_admissible_state(&mut rng, &p, mhd);
        let g = compute_staggered_sbp(&line, &ul, &ur, op, ja, &p);
        for j in 0..n - 1 {
            worst = worst.max((g.gamma_right[j] - g.gamma_left[j + 1]).max_abs());
        }
    }
    worst
}
