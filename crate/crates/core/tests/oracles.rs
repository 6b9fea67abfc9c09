//! Independent reference values. These also regenerate the frozen
//! constants file: run with `--nocapture` to print them.

mod common;

use std::f64::consts::PI;

use axivort::constants::oracle;
use common::*;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

#[test]
fn elliptic_and_trapezoid_kernels_agree() {
    for &(r, z, rp, zp) in &[
        (1.0, 0.0, 1.0, 1.0),
        (1.0, 1.0, 2.0, 2.0),
        (1.0, 1.0, 2.0, -2.0),
        (0.3, 0.1, 0.31, 0.12),
        (1.0, 0.0, 20.0, 5.0),
        (0.01, 0.0, 3.0, 0.0),
    ] {
        let e = green(r, z, rp, zp);
        let t = green_trapezoid(r, z, rp, zp, 100_000);
        assert!(close(e, t, 1e-11), "G({r},{z};{rp},{zp}): {e} vs {t}");
    }
}

#[test]
fn series_and_elliptic_branches_meet() {
    // either side of the branch switch at B/A = 0.3
    for x in [0.299_999, 0.300_001] {
        let a = 1.0;
        let b = x * a;
        let t = ring_integral_trapezoid(a, b, 20_000);
        let kp2 = (a - b) / (a + b);
        assert!(close(ring_integral(a, b, kp2), t, 1e-13));
    }
}

#[test]
fn hill_closed_forms() {
    let s1 = hill_stream(0.5, 0.0);
    let u0 = hill_axis_velocity();
    let e = hill_energy(10);
    println!("s1 {s1:.15e}\nu0 {u0:.15e}\ne_hill {e:.15e}");
    assert!(close(s1, 17.0 / 480.0, 1e-10), "{s1}");
    assert!(close(u0, 1.0 / 3.0, 1e-10), "{u0}");
    assert!(close(e, 8.0 * PI / 315.0, 1e-9), "{e}");
}

#[test]
fn frozen_constants_match_fresh_oracles() {
    let c = oracle();
    let v1 = green_trapezoid(1.0, 0.0, 1.0, 1.0, 100_000);
    let v2 = green_trapezoid(1.0, 1.0, 2.0, 2.0, 100_000)
        - green_trapezoid(1.0, 1.0, 2.0, -2.0, 100_000);
    let (gr, gz) = grad_green_fd(1.0, 0.0, 2.0, 3.0, 1e-5);
    println!("v1 {v1:.15e}\nv2 {v2:.15e}\ngrad_r {gr:.15e}\ngrad_z {gz:.15e}");
    assert!(close(c.v1, v1, 1e-12), "{} vs {v1}", c.v1);
    assert!(close(c.v2, v2, 1e-12), "{} vs {v2}", c.v2);
    assert!(close(c.grad_r, gr, 1e-9), "{} vs {gr}", c.grad_r);
    assert!(close(c.grad_z, gz, 1e-9), "{} vs {gz}", c.grad_z);
    assert!(close(c.s1, hill_stream(0.5, 0.0), 1e-10));
    assert!(close(c.u0, hill_axis_velocity(), 1e-10));
    assert!(close(c.e_hill, hill_energy(10), 1e-9));
}
