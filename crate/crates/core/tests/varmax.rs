use std::f64::consts::PI;

use axivort::constants::oracle;
use axivort::hill::{hill_mass, max_energy};
use axivort::varmax::*;
use axivort::{GridField, GridSpec, HillParams, KernelConfig};
use proptest::prelude::*;

fn unit_problem(h: f64) -> MaximizeProblem {
    let mu = 4.0 * PI / 15.0;
    MaximizeProblem::with_default_grid(mu, 2.0 * hill_mass(&HillParams::unit()), 1.0, h)
}

fn check_result(p: &MaximizeProblem, res: &MaximizeResult) {
    assert!(res.energies.windows(2).all(|w| w[1] >= w[0]), "{:?}", res.energies);
    let g = &res.field;
    assert!(g.xi.iter().all(|&x| x == 0.0 || x == p.lam));
    assert!(0.5 * g.impulse() <= p.mu * (1.0 + 1e-10));
    assert!(g.mass() <= p.nu * (1.0 + 1e-10));
}

#[test]
fn unit_ball_potential_at_half_radius() {
    // cell centres land on (0.5, 0)
    let n = 31;
    let h = 1.0 / n as f64;
    let spec = GridSpec {
        r_max: 40.0 * h,
        z_lo: -39.5 * h,
        z_hi: 39.5 * h,
        h,
    };
    let mut g = GridField::zeros(spec).unwrap();
    for k in 0..g.xi.len() {
        let c = g.center(k % g.nr, k / g.nr);
        if c.r * c.r + c.z * c.z < 1.0 {
            g.xi[k] = 1.0;
        }
    }
    let table = KernelTable::new(&spec, &KernelConfig::default()).unwrap();
    let phi = potential(&g, &table).unwrap();
    let (i, j) = (15, 39);
    let c = g.center(i, j);
    assert!((c.r - 0.5).abs() < 1e-14 && c.z.abs() < 1e-14);
    let s1 = phi.xi[g.idx(i, j)];
    assert!((s1 - oracle().s1).abs() < 2.0 / n as f64 * oracle().s1, "{s1}");
}

#[test]
fn bathtub_thresholds() {
    let spec = GridSpec {
        r_max: 2.0,
        z_lo: -2.0,
        z_hi: 2.0,
        h: 0.25,
    };
    let mut phi = GridField::zeros(spec).unwrap();
    for k in 0..phi.xi.len() {
        let c = phi.center(k % phi.nr, k / phi.nr);
        phi.xi[k] = c.r * c.r * (-c.z * c.z).exp();
    }
    let all = bathtub(&phi, 0.0, 0.0, 2.0);
    assert!(all.xi.iter().all(|&x| x == 2.0));
    assert!(bathtub(&phi, 0.0, 1e9, 2.0).xi.iter().all(|&x| x == 0.0));
    let count = |a: f64| bathtub(&phi, a, 0.0, 1.0).xi.iter().filter(|&&x| x > 0.0).count();
    let counts: Vec<usize> = [0.0, 0.5, 1.0, 1.5, 1.9].iter().map(|&a| count(a)).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}

#[test]
fn multipliers_vanish_for_slack_constraints() {
    let spec = GridSpec {
        r_max: 2.0,
        z_lo: -2.0,
        z_hi: 2.0,
        h: 0.25,
    };
    let mut phi = GridField::zeros(spec).unwrap();
    for k in 0..phi.xi.len() {
        let c = phi.center(k % phi.nr, k / phi.nr);
        phi.xi[k] = c.r * c.r / (1.0 + c.z * c.z);
    }
    let (a, b) = solve_multipliers(&phi, 1.0, 1e9, 1.0).unwrap();
    assert!(a > 0.0);
    assert_eq!(b, 0.0);
    assert_eq!(solve_multipliers(&phi, 1e9, 1e9, 1.0).unwrap(), (0.0, 0.0));
}

#[test]
fn hill_consistent_problem_saturates_impulse() {
    let p = unit_problem(1.0 / 12.0);
    let res = maximize(&p, &KernelConfig::default()).unwrap();
    check_result(&p, &res);
    assert!(res.converged);
    assert!(res.alpha > 0.0);
    assert!(res.slacks.impulse.abs() < 0.05 * p.mu, "{:?}", res.slacks);
    assert!(res.slacks.mass > 0.0);
    let e = max_energy(1.0, p.mu);
    assert!((res.energy - e).abs() < 0.1 * e, "{} vs {e}", res.energy);
}

#[test]
fn impulse_times_thirty_two_doubles_the_radius() {
    let small = unit_problem(1.0 / 10.0);
    let big = MaximizeProblem::with_default_grid(32.0 * small.mu, 8.0 * small.nu, 1.0, 2.0 / 10.0);
    let cfg = KernelConfig::default();
    let a = maximize(&small, &cfg).unwrap().equivalent_radius(1.0);
    let b = maximize(&big, &cfg).unwrap().equivalent_radius(1.0);
    assert!((b / a - 2.0).abs() < 1e-6, "{a} {b}");
    assert!((a - 1.0).abs() < 0.1, "{a}");
}

#[test]
fn refinement_approaches_the_closed_form() {
    let e = max_energy(1.0, 4.0 * PI / 15.0);
    let errs: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|&n| {
            let res = maximize(&unit_problem(1.0 / n), &KernelConfig::default()).unwrap();
            println!("n={n} energy {} rel {:e}", res.energy, (res.energy - e) / e);
            (res.energy - e).abs() / e
        })
        .collect();
    // the coarsest grids are still dominated by how the sphere cuts the cells
    assert!(errs[1..].windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ascent_and_feasibility(mu in 0.3f64..1.5, nu_factor in 0.8f64..3.0, lam in 0.5f64..2.0) {
        let a = (15.0 * mu / (4.0 * PI * lam)).powf(0.2);
        let nu = nu_factor * lam * 4.0 * PI / 3.0 * a.powi(3);
        let p = MaximizeProblem { max_iter: 60, ..MaximizeProblem::with_default_grid(mu, nu, lam, a / 8.0) };
        let res = maximize(&p, &KernelConfig::default()).unwrap();
        check_result(&p, &res);
    }
}
