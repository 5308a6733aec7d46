//! Acceptance criteria; prints one PASS/FAIL line each and exits non-zero
//! if any fails.

use std::time::{Duration, Instant};

use sbp_mhd::driver::{prepare, RunConfig};
use sbp_mhd::flux_diff::{compute_rhs_fluxdiff, InterfaceAlpha, StaggeredField};
use sbp_mhd::fluxes::VolumeFlux;
use sbp_mhd::limiting::idp_bounds;
use sbp_mhd::mesh::{Mesh2D, SolutionField};
use sbp_mhd::physics::{pressure, prim_to_cons, EquationParams, Primitive};
use sbp_mhd::sbp_ops::{build_fd_sbp_operator, build_lgl_operator, verify_sbp};
use sbp_mhd::semidisc::{compute_rhs_direct, Scheme};
use sbp_mhd::solver::Solver;
use sbp_mhd::time_integration::{ssp_rk3_step, DiagnosticsRow};
use sbp_mhd::verification::{equivalence_deviation, interface_asymmetry};
use sbp_mhd::Result;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn config(pairs: &[(&str, &str)]) -> RunConfig {
    let s: Vec<(String, String)> = pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    RunConfig::from_settings(&s).expect("valid configuration")
}

const SCHEMES: [(&str, &str); 2] = [("lgl:3", "64"), ("fdsbp:13", "65")];
const SCHEMES_128: [(&str, &str); 2] = [("lgl:3", "128"), ("fdsbp:13", "130")];

fn equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for op in [build_lgl_operator(3)?, build_fd_sbp_operator(13)?] {
        worst = worst.max(equivalence_deviation(&op, 4, 200, 0)?);
    }
    Ok((worst <= 1e-12, format!("max scaled deviation {worst:.2e}")))
}

fn sbp_structure() -> Outcome {
    let mut ops = Vec::new();
    for n in 1..=6 {
        ops.push(build_lgl_operator(n)?);
    }
    ops.push(build_fd_sbp_operator(13)?);
    ops.push(build_fd_sbp_operator(20)?);
    let bad: Vec<String> = ops
        .iter()
        .map(verify_sbp)
        .filter(|r| !r.passes(1e-13))
        .map(|r| format!("{} {}", r.kind, r.n_nodes))
        .collect();
    Ok((
        bad.is_empty(),
        format!("{} operators checked, failing: {bad:?}", ops.len()),
    ))
}

fn interface_reduction() -> Outcome {
    let mut sym: f64 = 0.0;
    let mut asym = f64::INFINITY;
    for op in [build_lgl_operator(3)?, build_fd_sbp_operator(13)?] {
        sym = sym.max(interface_asymmetry(&op, 500, 1, false));
        asym = asym.min(interface_asymmetry(&op, 50, 2, true));
    }
    Ok((
        sym <= 1e-14 && asym > 1e-12,
        format!("hydro |G(j,j+1) - G(j+1,j)| {sym:.1e}, mhd {asym:.2e}"),
    ))
}

fn free_stream_and_mass() -> Outcome {
    let mut ok = true;
    let mut rate: f64 = 0.0;
    let p = EquationParams::default();
    let w = Primitive {
        rho: 1.3,
        v: [0.4, -0.7, 0.2],
        p: 0.9,
        b: [0.3, -0.5, 0.8],
        psi: 0.1,
    };
    let u = prim_to_cons(&w, &p);
    for op in [build_lgl_operator(3)?, build_fd_sbp_operator(13)?] {
        let mesh = Mesh2D::periodic(4, 4, [0.0, 1.0, 0.0, 1.0])?;
        let scheme = Scheme::new(op.clone(), mesh.clone(), p, VolumeFlux::Central)?;
        let field = SolutionField::from_fn(&op, &mesh, |_, _| u);
        let n = op.n_nodes();
        for r in [
            compute_rhs_direct(&field, &scheme)?,
            compute_rhs_fluxdiff(&field, &scheme, None)?,
            compute_rhs_fluxdiff(&field, &scheme, Some(&InterfaceAlpha::uniform(n, 16, 1.0)))?,
        ] {
            rate = rate.max(r.data.iter().map(|x| x.max_abs()).fold(0.0, f64::max));
        }
    }
    ok &= rate <= 1e-12;

    let mut drift: f64 = 0.0;
    for (scheme, dof) in SCHEMES {
        for (limiter, blend) in [
            ("none", "subcell"),
            ("fv", "subcell"),
            ("loehner", "subcell"),
            ("loehner", "element"),
            ("idp", "subcell"),
            ("idp", "element"),
        ] {
            let cfg = config(&[
                ("problem", "orszag_tang"),
                ("scheme", scheme),
                ("dof", dof),
                ("limiter", limiter),
                ("blend", blend),
            ]);
            let mut run = prepare(&cfg)?;
            let m0 = run.solver.total_mass();
            for _ in 0..100 {
                run.solver.step(run.dt)?;
            }
            drift = drift.max(((run.solver.total_mass() - m0) / m0).abs());
        }
    }
    ok &= drift <= 1e-11;
    Ok((
        ok,
        format!("free-stream rate {rate:.1e}, mass drift over 100 steps {drift:.1e}"),
    ))
}

/// Steps to `t_end` and checks every stage against freshly computed
/// bounds of the first-order update.
fn idp_bounds_hold() -> Outcome {
    let mut worst_rho: f64 = 0.0;
    let mut worst_theta: f64 = 0.0;
    let mut stages = 0;
    let mut fallback = 0;
    for (scheme, dof) in SCHEMES {
        let cfg = config(&[
            ("problem", "orszag_tang"),
            ("scheme", scheme),
            ("dof", dof),
            ("limiter", "idp"),
            ("blend", "subcell"),
        ]);
        let run = prepare(&cfg)?;
        let mut solver = run.solver;
        let sch = solver.scheme.clone();
        let (n, ne) = (sch.n(), sch.mesh.n_elements());
        let fv_alpha = InterfaceAlpha::uniform(n, ne, 1.0);
        let t_end = 0.1;
        while solver.time < t_end - 1e-12 {
            let h = run.dt.min(t_end - solver.time);
            let u = solver.field.clone();
            let next = ssp_rk3_step(&u, |v, stage| {
                let rates = StaggeredField::compute(v, &sch)?.rates(&sch, Some(&fv_alpha))?;
                let mut u_fv = v.clone();
                for (a, r) in u_fv.data.iter_mut().zip(&rates.data) {
                    *a += *r * h;
                }
                let b = idp_bounds(&u_fv, &sch.mesh, &sch.params)?;
                let out = solver.stage_update(v, h, stage)?;
                let g = sch.params.gamma;
                for (k, x) in out.data.iter().enumerate() {
                    let rho = x.rho();
                    worst_rho = worst_rho.max(b.rho_min[k] - rho).max(rho - b.rho_max[k]);
                    let theta = pressure(x, &sch.params) * rho.powf(-g) / (g - 1.0);
                    worst_theta = worst_theta.max(b.theta_min[k] - theta);
                }
                stages += 1;
                Ok(out)
            })?;
            solver.field = next;
            solver.time += h;
        }
        fallback += solver.idp_stats.fallback_nodes;
    }
    Ok((
        worst_rho <= 1e-9 && worst_theta <= 1e-9,
        format!("{stages} stages, max density violation {worst_rho:.1e}, entropy {worst_theta:.1e}, {fallback} fallback nodes"),
    ))
}

/// Runs to the configured end time and returns the diagnostics.
fn full_run(pairs: &[(&str, &str)]) -> Result<(Vec<DiagnosticsRow>, Solver)> {
    let run = prepare(&config(pairs))?;
    let mut solver = run.solver;
    solver.advance_to(run.t_end, run.dt)?;
    Ok((solver.diagnostics.rows.clone(), solver))
}

fn time_mean_alpha(rows: &[DiagnosticsRow]) -> f64 {
    let s: Vec<f64> = rows.iter().skip(1).map(|r| r.mean_alpha).collect();
    s.iter().sum::<f64>() / s.len() as f64
}

fn admissible_throughout(rows: &[DiagnosticsRow], solver: &Solver) -> bool {
    let (r, p) = solver.minima();
    r > 0.0 && p > 0.0 && rows.iter().all(|x| x.min_rho > 0.0 && x.min_p > 0.0)
}

fn orszag_tang_robustness() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (scheme, dof) in SCHEMES_128 {
        let mut abar = [0.0; 2];
        for (k, blend) in ["subcell", "element"].iter().enumerate() {
            let pairs = [
                ("problem", "orszag_tang"),
                ("scheme", scheme),
                ("dof", dof),
                ("limiter", "loehner"),
                ("blend", blend),
            ];
            match full_run(&pairs) {
                Ok((rows, solver)) => {
                    ok &=
                        admissible_throughout(&rows, &solver) && (solver.time - 0.5).abs() < 1e-12;
                    abar[k] = time_mean_alpha(&rows);
                }
                Err(e) => {
                    ok = false;
                    detail.push(format!("{scheme} {blend}: {e}"));
                }
            }
        }
        ok &= abar[1] > abar[0];
        detail.push(format!(
            "{scheme} mean alpha subcell {:.4} element {:.4}",
            abar[0], abar[1]
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn rotor() -> Outcome {
    let (rows, solver) = full_run(&[
        ("problem", "rotor"),
        ("scheme", "lgl:3"),
        ("dof", "128"),
        ("limiter", "loehner"),
        ("blend", "subcell"),
    ])?;
    let worst = rows
        .windows(2)
        .map(|w| (w[1].total_entropy - w[0].total_entropy) / w[0].total_entropy.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = admissible_throughout(&rows, &solver)
        && (solver.time - 0.15).abs() < 1e-12
        && worst <= 1e-8;
    Ok((
        ok,
        format!(
            "{} samples, largest relative entropy increase {worst:.2e}",
            rows.len()
        ),
    ))
}

fn pure_fv() -> Outcome {
    let run = |limiter| {
        full_run(&[
            ("problem", "orszag_tang"),
            ("scheme", "lgl:3"),
            ("dof", "64"),
            ("limiter", limiter),
            ("t_end", "0.2"),
        ])
    };
    let (fv, s_fv) = run("fv")?;
    let (lo, s_lo) = run("loehner")?;
    let strictly = fv
        .windows(2)
        .all(|w| w[1].total_entropy < w[0].total_entropy);
    let drop = |r: &[DiagnosticsRow]| r[0].total_entropy - r[r.len() - 1].total_entropy;
    let (d_fv, d_lo) = (drop(&fv), drop(&lo));
    let ok = admissible_throughout(&fv, &s_fv)
        && admissible_throughout(&lo, &s_lo)
        && strictly
        && d_fv > d_lo;
    Ok((
        ok,
        format!("entropy drop fv {d_fv:.4e} loehner {d_lo:.4e}, fv strictly decreasing {strictly}"),
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("direct and flux-differencing forms agree", equivalence, 30),
        ("SBP structural suite", sbp_structure, 5),
        (
            "single interface flux without MHD terms",
            interface_reduction,
            5,
        ),
        (
            "free stream and mass conservation",
            free_stream_and_mass,
            120,
        ),
        ("IDP bounds after correction", idp_bounds_hold, 300),
        (
            "Orszag-Tang robustness, element vs subcell",
            orszag_tang_robustness,
            1800,
        ),
        ("rotor admissible with decaying entropy", rotor, 900),
        ("pure FV more dissipative than Loehner", pure_fv, 300),
    ];
    let mut failed = 0;
    for (k, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {}: {name} ({detail}; {:.1}s of {limit}s)",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
