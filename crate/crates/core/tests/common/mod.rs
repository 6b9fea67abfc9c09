//! Reference quadratures that share no numerical code with the library:
//! the ring kernel through complete elliptic integrals, nested tanh-sinh
//! integration over the meridional half-disc, and a plain trapezoid rule.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// `∫_0^π cos θ / sqrt(A − B cos θ) dθ` by the trapezoid rule with `n`
/// panels. The integrand is smooth, even and 2π-periodic.
pub fn ring_integral_trapezoid(a: f64, b: f64, n: usize) -> f64 {
    let h = PI / n as f64;
    let f = |t: f64| t.cos() / (a - b * t.cos()).sqrt();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h
}

/// `K` and `E` of complementary modulus `kp = sqrt(1 − k²)` by the
/// arithmetic-geometric mean.
fn elliptic_ke(kp: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0f64, kp);
    let mut c2 = (1.0 - kp) * (1.0 + kp);
    let mut sum = 0.5 * c2;
    let mut pow = 0.5;
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        c2 = c * c;
        sum += pow * c2;
        if c2 < 1e-36 {
            break;
        }
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// `∫_0^π cos θ / sqrt(A − B cos θ) dθ` in closed form.
///
/// Uses the binomial series in `B/A` when it converges fast, the
/// elliptic-integral form otherwise.
pub fn ring_integral(a: f64, b: f64, kp2: f64) -> f64 {
    let x = b / a;
    if x < 0.3 {
        // cos^{2j} moments of the binomial expansion
        let mut total = 0.0;
        let mut c_n = 1.0; // binom(2n, n) / 4^n at n = 2j − 1
        let mut m_j = 1.0; // binom(2j, j) / 4^j
        let mut xp = x;
        let mut n = 0usize;
        for j in 1..60 {
            while n < 2 * j - 1 {
                n += 1;
                c_n *= (2 * n - 1) as f64 / (2 * n) as f64;
            }
            m_j *= (2 * j - 1) as f64 / (2 * j) as f64;
            let term = c_n * xp * m_j;
            total += term;
            if term < 1e-18 * total {
                break;
            }
            xp *= x * x;
        }
        return PI * total / a.sqrt();
    }
    let m = 2.0 * b / (a + b);
    let (k, e) = elliptic_ke(kp2.sqrt());
    2.0 / (a + b).sqrt() * ((2.0 - m) * k - 2.0 * e) / m
}

/// `G(r, z, r', z')` through elliptic integrals.
pub fn green(r: f64, z: f64, rp: f64, zp: f64) -> f64 {
    if r == 0.0 || rp == 0.0 {
        return 0.0;
    }
    let s = z - zp;
    let a = r * r + rp * rp + s * s;
    let b = 2.0 * r * rp;
    let kp2 = ((r - rp) * (r - rp) + s * s) / ((r + rp) * (r + rp) + s * s);
    r * rp / (2.0 * PI) * ring_integral(a, b, kp2)
}

pub fn green_trapezoid(r: f64, z: f64, rp: f64, zp: f64, n: usize) -> f64 {
    let s = z - zp;
    r * rp / (2.0 * PI) * ring_integral_trapezoid(r * r + rp * rp + s * s, 2.0 * r * rp, n)
}

/// Central differences of [`green`] in the first point, Richardson
/// extrapolated from steps `h` and `h/2`.
pub fn grad_green_fd(r: f64, z: f64, rp: f64, zp: f64, h: f64) -> (f64, f64) {
    let d = |h: f64| {
        (
            (green(r + h, z, rp, zp) - green(r - h, z, rp, zp)) / (2.0 * h),
            (green(r, z + h, rp, zp) - green(r, z - h, rp, zp)) / (2.0 * h),
        )
    };
    let (a, b) = (d(h), d(0.5 * h));
    ((4.0 * b.0 - a.0) / 3.0, (4.0 * b.1 - a.1) / 3.0)
}

/// Tanh-sinh quadrature on `[a, b]`, halving the step until successive
/// estimates agree to `tol` relative. `f` receives the abscissa.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let hw = 0.5 * (b - a);
    if hw == 0.0 {
        return 0.0;
    }
    let t_max = 3.2;
    // contribution of the node pair at ±t
    let pair = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = hw * FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance of the nodes from the interval ends, without cancellation
        let d = hw * 2.0 / ((2.0 * u).exp() + 1.0);
        if d <= 0.0 {
            return 0.0;
        }
        if t == 0.0 {
            w * f(a + hw)
        } else {
            w * (f(a + d) + f(b - d))
        }
    };
    let mut h = 0.5;
    let mut sum = pair(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut est = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let next = h * sum;
        let done = (next - est).abs() <= tol * next.abs();
        est = next;
        if done {
            break;
        }
    }
    est
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫∫ f(r', z') dr' dz'` over the unit meridional half-disc, in polar
/// coordinates about `(r, z)` so a point singularity there is harmless.
pub fn half_disc_polar(r: f64, z: f64, tol: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let reach = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        let proj = r * c + z * s;
        let circle = -proj + (proj * proj - (r * r + z * z) + 1.0).sqrt();
        if c < 0.0 {
            circle.min(-r / c)
        } else {
            circle
        }
    };
    let panels: Vec<(f64, f64)> = if r > 0.0 {
        let up = (1.0 - z).atan2(-r);
        let down = (-1.0 - z).atan2(-r);
        vec![(down, up), (up, down + 2.0 * PI)]
    } else {
        vec![(-FRAC_PI_2, FRAC_PI_2)]
    };
    panels
        .iter()
        .map(|&(p0, p1)| {
            tanh_sinh(
                |phi| {
                    let (c, s) = (phi.cos(), phi.sin());
                    tanh_sinh(|rho| rho * f(r + rho * c, z + rho * s), 0.0, reach(phi), tol)
                },
                p0,
                p1,
                tol,
            )
        })
        .sum()
}

/// Stream function of the unit Hill vortex at `(r, z)`.
pub fn hill_stream(r: f64, z: f64) -> f64 {
    half_disc_polar(r, z, 1e-12, |rp, zp| {
        if rp <= 0.0 {
            0.0
        } else {
            green(r, z, rp, zp) * rp
        }
    })
}

/// Axial velocity of the unit Hill vortex at its centre, from the on-axis
/// limit `u_z = ∫∫ ξ r'³ / (2 (r'² + z'²)^{3/2}) dr' dz'`.
pub fn hill_axis_velocity() -> f64 {
    half_disc_polar(0.0, 0.0, 1e-13, |rp, zp| {
        let rho2 = rp * rp + zp * zp;
        if rho2 == 0.0 {
            0.0
        } else {
            0.5 * rp.powi(3) / rho2.powf(1.5)
        }
    })
}

/// Energy of the unit Hill vortex, `π ∫∫ ψ r dr dz` over the half-disc,
/// with a Gauss product rule over the (smooth) outer integrand.
pub fn hill_energy(n: usize) -> f64 {
    let gl = gauss_legendre(n);
    let mut e = 0.0;
    for &(x, wx) in &gl {
        let rho = 0.5 * (x + 1.0);
        for &(y, wy) in &gl {
            let phi = 0.5 * PI * (y + 1.0);
            let (r, z) = (rho * phi.sin(), rho * phi.cos());
            e += 0.5 * wx * 0.5 * PI * wy * rho * hill_stream(r, z) * r;
        }
    }
    PI * e
}
