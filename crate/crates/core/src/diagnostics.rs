//! Shift fitting, drift residuals and the interaction-energy decay table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    impulse, interaction_energy, max_abs_xi, norm_distance, rasterize, z_center, DiagRecord,
    Distance, GridSpec, ParticleField,
};
use crate::hill::{seed_pair, HillParams, PairParams};
use crate::kernel::{Kernel, KernelConfig};

const COARSE_POINTS: usize = 21;
const TAU_TOL: f64 = 1e-4;

/// Reference Hill profile and raster geometry for shift fits.
///
/// `lam` is the largest carried vorticity, `a` the radius whose Hill vortex
/// has the field's impulse. Raster cells of side `h` keep their edges on
/// `anchor + m h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReference {
    pub lam: f64,
    pub a: f64,
    pub h: f64,
    pub anchor: f64,
}

impl FitReference {
    pub fn from_field(f: &ParticleField, h: f64) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidField("cannot fit an empty field".into()));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("raster spacing {h} must be > 0")));
        }
        let lam = max_abs_xi(f);
        Ok(Self {
            lam,
            a: HillParams::radius_from_impulse(lam, impulse(f)),
            h,
            anchor: z_center(f),
        })
    }

    pub fn profile(&self, tau: f64) -> HillParams {
        HillParams {
            lam: self.lam,
            a: self.a,
            tau,
        }
    }

    /// Raster covering the axial range `[lo, hi]` and the radial range up
    /// to `r_hi`, plus a margin, with edges on the anchor lattice.
    pub fn grid_covering(&self, lo: f64, hi: f64, r_hi: f64) -> GridSpec {
        let h = self.h;
        let lo = self.anchor + h * ((lo - self.anchor) / h - 2.0).floor();
        let hi = self.anchor + h * ((hi - self.anchor) / h + 2.0).ceil();
        GridSpec {
            r_max: h * (r_hi.max(1.5 * self.a) / h + 2.0).ceil(),
            z_lo: lo,
            z_hi: hi,
            h,
        }
    }

    pub fn default_bracket(&self, zc: f64) -> (f64, f64) {
        (zc - 2.0 * self.a, zc + 2.0 * self.a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftFit {
    pub tau: f64,
    pub dist: Distance,
}

/// Axial shift minimizing the combined distance between the rasterized
/// field and the reference profile: a coarse scan, then golden-section
/// refinement around the best scan point.
pub fn fit_shift(
    f: &ParticleField,
    reference: &FitReference,
    bracket: Option<(f64, f64)>,
) -> Result<ShiftFit> {
    let zc = z_center(f);
    let (lo, hi) = bracket.unwrap_or_else(|| reference.default_bracket(zc));
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let (zmin, zmax, rmax) = f.particles().iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64),
        |(a, b, c), p| (a.min(p.pos.z), b.max(p.pos.z), c.max(p.pos.r)),
    );
    let spec = reference.grid_covering(
        zmin.min(lo - reference.a),
        zmax.max(hi + reference.a),
        rmax,
    );
    let g = rasterize(f, &spec)?;
    let dist = |tau: f64| norm_distance(&g, &reference.profile(tau));

    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let scan: Vec<(f64, f64)> = (0..COARSE_POINTS)
        .map(|i| {
            let tau = lo + step * i as f64;
            (tau, dist(tau).sum)
        })
        .collect();
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if s.1 < scan[b].1 { i } else { b });
    if best == 0 || best == COARSE_POINTS - 1 {
        return Err(Error::BracketMiss {
            tau: scan[best].0,
            lo,
            hi,
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (scan[best - 1].0, scan[best + 1].0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (dist(x1).sum, dist(x2).sum);
    let mut best_tau = scan[best].0;
    let mut best_val = scan[best].1;
    while b - a > TAU_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = dist(x1).sum;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = dist(x2).sum;
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v < best_val {
                best_val = v;
                best_tau = x;
            }
        }
    }
    Ok(ShiftFit {
        tau: best_tau,
        dist: dist(best_tau),
    })
}

/// Least-squares line `y ≈ intercept + slope x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len().min(y.len());
    if n == 0 {
        return (0.0, 0.0);
    }
    if n == 1 {
        return (y[0], 0.0);
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// `|q(t) − q(0) − W t|` per record, with its fitted linear growth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub values: Vec<f64>,
    pub slope: f64,
    pub max: f64,
}

fn residual(records: &[DiagRecord], speed: f64, q: impl Fn(&DiagRecord) -> f64) -> Residual {
    let Some(first) = records.first() else {
        return Residual {
            values: Vec::new(),
            slope: 0.0,
            max: 0.0,
        };
    };
    let q0 = q(first);
    let values: Vec<f64> = records
        .iter()
        .map(|r| (q(r) - q0 - speed * (r.t - first.t)).abs())
        .collect();
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let (_, slope) = linear_fit(&t, &values);
    let max = values.iter().fold(0.0f64, |m, v| m.max(*v));
    Residual { values, slope, max }
}

/// Residual of the fitted shift against travel at `speed`.
pub fn shift_residual(records: &[DiagRecord], speed: f64) -> Residual {
    residual(records, speed, |r| r.tau_fit)
}

/// Residual of the centre of mass against travel at `speed`.
pub fn zc_residual(records: &[DiagRecord], speed: f64) -> Residual {
    residual(records, speed, |r| r.z_c)
}

/// Slope of a record column against time.
pub fn slope(records: &[DiagRecord], q: impl Fn(&DiagRecord) -> f64) -> f64 {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = records.iter().map(q).collect();
    linear_fit(&t, &y).1
}

/// Largest `|q(t) − q(0)| / |q(0)|` over the records.
pub fn max_drift(records: &[DiagRecord], q: impl Fn(&DiagRecord) -> f64) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    let q0 = q(first);
    records.iter().fold(0.0f64, |m, r| m.max(((q(r) - q0) / q0).abs()))
}

/// Largest relative mismatch of `E_total = 2 E_plus − 2 E_inter`.
pub fn bookkeeping_error(records: &[DiagRecord]) -> f64 {
    records.iter().fold(0.0f64, |m, r| {
        m.max(((r.e_total - 2.0 * r.e_plus + 2.0 * r.e_inter) / r.e_total).abs())
    })
}

/// Number of consecutive record pairs where `q` fails to decrease.
pub fn non_decreasing_steps(records: &[DiagRecord], q: impl Fn(&DiagRecord) -> f64) -> usize {
    records.windows(2).filter(|w| !(q(&w[1]) < q(&w[0]))).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinterRow {
    pub d: f64,
    pub e_inter: f64,
    pub d_e_inter: f64,
    pub d3_e_inter: f64,
}

/// Interaction energy of exactly seeded pairs at each half-separation.
/// The kernel is regularized at the seeding spacing unless `base` says
/// otherwise.
pub fn einter_decay(
    ds: &[f64],
    lam: f64,
    a: f64,
    n: usize,
    base: &KernelConfig,
) -> Result<Vec<EinterRow>> {
    ds.iter()
        .map(|&d| {
            let f = seed_pair(&PairParams::new(lam, a, d)?, n)?;
            let cfg = KernelConfig {
                delta: if base.delta > 0.0 { base.delta } else { a / n as f64 },
                ..base.clone()
            };
            let e = interaction_energy(&f, &Kernel::new(cfg)?)?;
            Ok(EinterRow {
                d,
                e_inter: e,
                d_e_inter: d * e,
                d3_e_inter: d * d * d * e,
            })
        })
        .collect()
}

/// `max / min` of a positive column.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo
}
