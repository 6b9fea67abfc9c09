//! Kinetic-energy maximization over `0 ≤ ξ ≤ λ`, `½‖r²ξ‖₁ ≤ μ`,
//! `‖ξ‖₁ ≤ ν` on a half-plane grid, by repeated bathtub rearrangement.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, GridSpec};
use crate::kernel::{Kernel, KernelConfig};
use crate::pairsum;

/// Regularization of a cell's interaction with itself, in cell sides: the
/// blob length whose kernel equals the cell average of the log singularity.
pub const SELF_DELTA: f64 = 0.346_048_816_099_828;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximizeProblem {
    pub mu: f64,
    pub nu: f64,
    pub lam: f64,
    pub grid: GridSpec,
    pub tol_e: f64,
    pub max_iter: usize,
}

impl MaximizeProblem {
    /// Radius of the Hill vortex with half-impulse `mu` and strength `lam`.
    pub fn predicted_radius(&self) -> f64 {
        (15.0 * self.mu / (4.0 * PI * self.lam)).powf(0.2)
    }

    /// Grid `[0, 2a] × [−2a, 2a]` with `a` the predicted radius.
    pub fn with_default_grid(mu: f64, nu: f64, lam: f64, h: f64) -> Self {
        let a = (15.0 * mu / (4.0 * PI * lam)).powf(0.2);
        let half = h * (2.0 * a / h).ceil();
        Self {
            mu,
            nu,
            lam,
            grid: GridSpec {
                r_max: half,
                z_lo: -half,
                z_hi: half,
                h,
            },
            tol_e: 1e-10,
            max_iter: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("nu", self.nu), ("lam", self.lam), ("tol_e", self.tol_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name}={v} must be positive")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        self.grid.validate()?;
        let a = self.predicted_radius();
        let g = &self.grid;
        // a ball of radius a plus a margin of a on every side
        let slack = 0.5 * g.h;
        if g.r_max + slack < 2.0 * a || g.z_hi - g.z_lo + slack < 4.0 * a {
            return Err(Error::InvalidParameter(format!(
                "grid {g:?} cannot hold the predicted ball of radius {a} with margin {a}"
            )));
        }
        Ok(())
    }
}

/// Kernel values between cell centres, indexed by the two columns and the
/// row offset.
pub struct KernelTable {
    nr: usize,
    nz: usize,
    values: Vec<f64>,
}

impl KernelTable {
    pub fn new(spec: &GridSpec, cfg: &KernelConfig) -> Result<Self> {
        spec.validate()?;
        let k = Kernel::new(cfg.clone())?;
        let own = Kernel::new(KernelConfig {
            delta: cfg.delta.max(SELF_DELTA * spec.h),
            ..cfg.clone()
        })?;
        let (nr, nz) = (spec.nr(), spec.nz());
        let rows = pairsum::map_rows(nr * nr, |ij| {
            let (i, j) = (ij / nr, ij % nr);
            let (ri, rj) = (spec.r_center(i), spec.r_center(j));
            (0..nz)
                .map(|dz| {
                    let s = dz as f64 * spec.h;
                    if i == j && dz == 0 {
                        own.pair_value(ri, rj, s)
                    } else {
                        k.pair_value(ri, rj, s)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        Ok(Self {
            nr,
            nz,
            values: rows.concat(),
        })
    }

    fn row(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.nr + j) * self.nz;
        &self.values[start..start + self.nz]
    }
}

/// `φ = 𝒢[ξ]` at cell centres.
pub fn potential(g: &GridField, table: &KernelTable) -> Result<GridField> {
    if table.nr != g.nr || table.nz != g.nz {
        return Err(Error::InvalidParameter("kernel table does not match the grid".into()));
    }
    let h2 = g.spec.h * g.spec.h;
    // sources: (column, row, ξ r h²)
    let src: Vec<(usize, usize, f64)> = g
        .cells()
        .filter(|&(_, _, x)| x != 0.0)
        .map(|(i, j, x)| (i, j, x * g.spec.r_center(i) * h2))
        .collect();
    let phi = pairsum::map_rows(g.xi.len(), |k| {
        let (i, j) = (k % g.nr, k / g.nr);
        Ok(src
            .iter()
            .map(|&(si, sj, q)| q * table.row(i, si)[j.abs_diff(sj)])
            .sum::<f64>())
    })?;
    Ok(GridField { xi: phi, ..g.clone() })
}

/// `½ ∫ ξ φ`.
pub fn grid_energy(g: &GridField, phi: &GridField) -> f64 {
    0.5 * g
        .cells()
        .zip(&phi.xi)
        .map(|((i, _, x), p)| x * p * g.spec.cell_volume(i))
        .sum::<f64>()
}

/// `λ` where `φ − α r²/2 − β > 0`, zero elsewhere.
pub fn bathtub(phi: &GridField, alpha: f64, beta: f64, lam: f64) -> GridField {
    let xi = phi
        .cells()
        .map(|(i, _, p)| {
            let r = phi.spec.r_center(i);
            if p - 0.5 * alpha * r * r - beta > 0.0 {
                lam
            } else {
                0.0
            }
        })
        .collect();
    GridField { xi, ..phi.clone() }
}

/// Impulse and mass of the bathtub set, without building it.
fn budgets(phi: &GridField, alpha: f64, beta: f64, lam: f64) -> (f64, f64) {
    let (mut half_imp, mut mass) = (0.0, 0.0);
    for (i, _, p) in phi.cells() {
        let r = phi.spec.r_center(i);
        if p - 0.5 * alpha * r * r - beta > 0.0 {
            let v = lam * phi.spec.cell_volume(i);
            mass += v;
            half_imp += 0.5 * v * r * r;
        }
    }
    (half_imp, mass)
}

const BISECT_REL: f64 = 1e-13;

/// Smallest `x ≥ 0` with `ok(x)`, given `ok(hi)`; zero when `ok(0)`.
fn bisect_min(hi: f64, ok: impl Fn(f64) -> bool, what: &str) -> Result<f64> {
    if ok(0.0) {
        return Ok(0.0);
    }
    if !ok(hi) {
        return Err(Error::Bisection(format!(
            "{what}: constraint still violated at the upper bracket end {hi:e} (lower end 0)"
        )));
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > BISECT_REL * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Multipliers `(α, β)` making the bathtub set feasible: outer bisection on
/// `β` for the mass, inner on `α` for the half-impulse. The returned pair is
/// always on the feasible side of both bounds.
pub fn solve_multipliers(phi: &GridField, mu: f64, nu: f64, lam: f64) -> Result<(f64, f64)> {
    let mut alpha_hi: f64 = 0.0;
    let mut beta_hi: f64 = 0.0;
    for (i, _, p) in phi.cells() {
        let r = phi.spec.r_center(i);
        alpha_hi = alpha_hi.max(2.0 * p / (r * r));
        beta_hi = beta_hi.max(p);
    }
    // strictly above every cell, so the set is empty at the bracket ends
    let alpha_hi = 2.0 * alpha_hi + f64::MIN_POSITIVE;
    let beta_hi = 2.0 * beta_hi + f64::MIN_POSITIVE;
    let alpha_for = |beta: f64| {
        bisect_min(alpha_hi, |a| budgets(phi, a, beta, lam).0 <= mu, "impulse multiplier")
    };
    let mass_ok = |beta: f64| match alpha_for(beta) {
        Ok(a) => budgets(phi, a, beta, lam).1 <= nu,
        Err(_) => false,
    };
    let beta = bisect_min(beta_hi, mass_ok, "mass multiplier")?;
    Ok((alpha_for(beta)?, beta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    /// `μ − ½‖r²ξ‖₁`.
    pub impulse: f64,
    /// `ν − ‖ξ‖₁`.
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct MaximizeResult {
    /// The best iterate, shifted by whole cells so its ξ-weighted mean `z`
    /// is within half a cell of zero.
    pub field: GridField,
    pub energy: f64,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub slacks: Slacks,
    pub converged: bool,
    /// Energy of every accepted iterate, starting with the initial guess.
    pub energies: Vec<f64>,
    /// Energy of a final trial step that failed to ascend and was dropped.
    pub rejected: Option<f64>,
    /// Axial shift applied when re-centring.
    pub shift: f64,
}

impl MaximizeResult {
    /// Radius of the ball with the maximizer's volume.
    pub fn equivalent_radius(&self, lam: f64) -> f64 {
        (3.0 * self.field.mass() / (4.0 * PI * lam)).cbrt()
    }
}

pub fn maximize(p: &MaximizeProblem, cfg: &KernelConfig) -> Result<MaximizeResult> {
    p.validate()?;
    let table = KernelTable::new(&p.grid, cfg)?;
    let mut seed = GridField::zeros(p.grid)?;
    // r² alone ties along every column; a Gaussian envelope makes the
    // starting super-level sets balls
    let a = p.predicted_radius();
    for k in 0..seed.xi.len() {
        let c = seed.center(k % seed.nr, k / seed.nr);
        seed.xi[k] = c.r * c.r * (-(c.r * c.r + c.z * c.z) / (a * a)).exp();
    }
    let (mut alpha, mut beta) = solve_multipliers(&seed, p.mu, p.nu, p.lam)?;
    let mut xi = bathtub(&seed, alpha, beta, p.lam);
    let mut phi = potential(&xi, &table)?;
    let mut e = grid_energy(&xi, &phi);
    let mut energies = vec![e];
    let mut rejected = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < p.max_iter {
        iterations += 1;
        let (a, b) = solve_multipliers(&phi, p.mu, p.nu, p.lam)?;
        let next = bathtub(&phi, a, b, p.lam);
        let next_phi = potential(&next, &table)?;
        let e_next = grid_energy(&next, &next_phi);
        if next.xi == xi.xi {
            (alpha, beta) = (a, b);
            converged = true;
            break;
        }
        if e_next <= e {
            // no ascent: the previous iterate stands
            rejected = Some(e_next);
            converged = true;
            break;
        }
        energies.push(e_next);
        let rel = (e_next - e) / e_next;
        (xi, phi, e, alpha, beta) = (next, next_phi, e_next, a, b);
        if rel < p.tol_e {
            converged = true;
            break;
        }
    }
    let (field, shift) = recenter(&xi);
    Ok(MaximizeResult {
        slacks: Slacks {
            impulse: p.mu - 0.5 * field.impulse(),
            mass: p.nu - field.mass(),
        },
        field,
        energy: e,
        iterations,
        alpha,
        beta,
        converged,
        energies,
        rejected,
        shift,
    })
}

fn recenter(g: &GridField) -> (GridField, f64) {
    if g.mass() == 0.0 {
        return (g.clone(), 0.0);
    }
    let cells = (g.z_center() / g.spec.h).round() as i64;
    if cells == 0 {
        return (g.clone(), 0.0);
    }
    let mut out = GridField {
        xi: vec![0.0; g.xi.len()],
        ..g.clone()
    };
    for (i, j, x) in g.cells() {
        if x == 0.0 {
            continue;
        }
        let jj = j as i64 - cells;
        if jj >= 0 && (jj as usize) < g.nz {
            let k = out.idx(i, jj as usize);
            out.xi[k] = x;
        }
    }
    (out, -(cells as f64) * g.spec.h)
}

/// Meridional area where the patch and the half-disc of radius `a` centred
/// at the origin disagree, relative to the half-disc area.
pub fn symmetric_difference(g: &GridField, lam: f64, a: f64) -> f64 {
    let mut bad = 0usize;
    for (i, j, x) in g.cells() {
        let c = g.center(i, j);
        let inside = c.r * c.r + c.z * c.z < a * a;
        let on = x >= 0.5 * lam;
        if inside != on {
            bad += 1;
        }
    }
    bad as f64 * g.spec.h * g.spec.h / (0.5 * PI * a * a)
}
