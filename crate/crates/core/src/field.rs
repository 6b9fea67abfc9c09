//! Particle and grid representations of ξ and the functionals evaluated on
//! them.
//!
//! For odd-tagged fields every functional reports the upper half; the
//! kernel-based ones account for the implied mirror through the image
//! kernel.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hill::{hill_xi, HillParams};
use crate::kernel::{HalfPlanePoint, Kernel};
use crate::pairsum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pos: HalfPlanePoint,
    pub xi: f64,
    /// 3D volume of the annular cell the particle stands for.
    pub vol: f64,
}

impl Particle {
    pub const fn new(pos: HalfPlanePoint, xi: f64, vol: f64) -> Self {
        Self { pos, xi, vol }
    }

    /// Ring circulation `ξ w / 2π`.
    pub fn strength(&self) -> f64 {
        self.xi * self.vol / (2.0 * PI)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Plain,
    Odd,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Plain => "plain",
            Symmetry::Odd => "odd",
        })
    }
}

/// Where a field came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub origin: String,
    /// Seeding lattice spacing, when there is one.
    pub spacing: Option<f64>,
}

impl FieldMeta {
    pub fn new(origin: &str) -> Self {
        Self {
            origin: origin.to_owned(),
            spacing: None,
        }
    }

    pub fn seeded(origin: &str, h: f64) -> Self {
        Self {
            origin: origin.to_owned(),
            spacing: Some(h),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleField {
    particles: Vec<Particle>,
    symmetry: Symmetry,
    meta: FieldMeta,
}

impl ParticleField {
    pub fn new(particles: Vec<Particle>, symmetry: Symmetry, meta: FieldMeta) -> Result<Self> {
        for (i, p) in particles.iter().enumerate() {
            let finite = p.pos.r.is_finite() && p.pos.z.is_finite() && p.xi.is_finite() && p.vol.is_finite();
            if !finite {
                return Err(Error::InvalidField(format!("particle {i} is not finite")));
            }
            if p.pos.r < 0.0 {
                return Err(Error::InvalidField(format!("particle {i} has r={} < 0", p.pos.r)));
            }
            if p.vol <= 0.0 {
                return Err(Error::InvalidField(format!("particle {i} has volume {} <= 0", p.vol)));
            }
            if symmetry == Symmetry::Odd && !(p.pos.z > 0.0 && p.xi >= 0.0) {
                return Err(Error::InvalidField(format!(
                    "odd field needs z > 0 and xi >= 0, particle {i} has z={} xi={}",
                    p.pos.z, p.xi
                )));
            }
        }
        Ok(Self {
            particles,
            symmetry,
            meta,
        })
    }

    pub fn empty(symmetry: Symmetry) -> Self {
        Self {
            particles: Vec::new(),
            symmetry,
            meta: FieldMeta::default(),
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> Vec<HalfPlanePoint> {
        self.particles.iter().map(|p| p.pos).collect()
    }

    /// Same carriers at new positions. Positions are not validated; the
    /// caller owns the symmetry check.
    pub(crate) fn moved(&self, pos: &[HalfPlanePoint]) -> Self {
        debug_assert_eq!(pos.len(), self.particles.len());
        let particles = self
            .particles
            .iter()
            .zip(pos)
            .map(|(p, &q)| Particle { pos: q, ..*p })
            .collect();
        Self {
            particles,
            symmetry: self.symmetry,
            meta: self.meta.clone(),
        }
    }

    pub fn translated(&self, dz: f64) -> Result<Self> {
        let parts = self
            .particles
            .iter()
            .map(|p| Particle {
                pos: HalfPlanePoint::new(p.pos.r, p.pos.z + dz),
                ..*p
            })
            .collect();
        Self::new(parts, self.symmetry, self.meta.clone())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let parts = self
            .particles
            .iter()
            .map(|p| Particle { xi: p.xi * factor, ..*p })
            .collect();
        Self::new(parts, self.symmetry, self.meta.clone())
    }

    /// Drops the symmetry tag: one half of an odd field on its own.
    pub fn as_plain(&self) -> Self {
        Self {
            particles: self.particles.clone(),
            symmetry: Symmetry::Plain,
            meta: self.meta.clone(),
        }
    }
}

/// `‖ξ‖₁`.
pub fn mass(f: &ParticleField) -> f64 {
    f.particles().iter().map(|p| p.vol * p.xi.abs()).sum()
}

/// `‖ξ‖₂²`.
pub fn l2_sq(f: &ParticleField) -> f64 {
    f.particles().iter().map(|p| p.vol * p.xi * p.xi).sum()
}

/// `‖ξ‖_∞`.
pub fn max_abs_xi(f: &ParticleField) -> f64 {
    f.particles().iter().fold(0.0, |m, p| m.max(p.xi.abs()))
}

/// `‖r² ξ‖₁`.
pub fn impulse(f: &ParticleField) -> f64 {
    f.particles()
        .iter()
        .map(|p| p.vol * p.pos.r * p.pos.r * p.xi.abs())
        .sum()
}

/// ξ-weighted mean axial position.
pub fn z_center(f: &ParticleField) -> f64 {
    let (num, den) = f
        .particles()
        .iter()
        .fold((0.0, 0.0), |(n, d), p| (n + p.vol * p.xi * p.pos.z, d + p.vol * p.xi));
    num / den
}

/// Kinetic energies of a field.
///
/// For odd fields `plus` is the energy of the upper half alone, `inter`
/// the cross energy with its mirror and `total` the energy of the full
/// field, accumulated separately from the image kernel. Plain fields have
/// `total = plus` and `inter = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub total: f64,
    pub plus: f64,
    pub inter: f64,
}

pub fn energy_parts(f: &ParticleField, k: &Kernel) -> Result<EnergyParts> {
    let parts = f.particles();
    let odd = f.symmetry() == Symmetry::Odd;
    let regularized = k.delta() > 0.0;
    let (off, on) = pairsum::sum_pairs::<3, _, _>(
        parts.len(),
        |i, j| {
            let (a, b) = (&parts[i], &parts[j]);
            let gg = 2.0 * a.strength() * b.strength();
            let g = k.pair_value(a.pos.r, b.pos.r, a.pos.z - b.pos.z)?;
            if odd {
                let gm = k.pair_value(a.pos.r, b.pos.r, a.pos.z + b.pos.z)?;
                Ok([gg * g, gg * gm, gg * (g - gm)])
            } else {
                Ok([gg * g, 0.0, 0.0])
            }
        },
        |i| {
            let a = &parts[i];
            let gg = a.strength() * a.strength();
            let g = if regularized {
                k.pair_value(a.pos.r, a.pos.r, 0.0)?
            } else {
                0.0
            };
            if odd {
                let gm = k.pair_value(a.pos.r, a.pos.r, 2.0 * a.pos.z)?;
                Ok([gg * g, gg * gm, gg * (g - gm)])
            } else {
                Ok([gg * g, 0.0, 0.0])
            }
        },
    )?;
    let plus = PI * (off[0] + on[0]);
    if odd {
        Ok(EnergyParts {
            total: 2.0 * PI * (off[2] + on[2]),
            plus,
            inter: PI * (off[1] + on[1]),
        })
    } else {
        Ok(EnergyParts {
            total: plus,
            plus,
            inter: 0.0,
        })
    }
}

/// `E[ξ]` of the represented field (both halves for odd fields).
pub fn energy(f: &ParticleField, k: &Kernel) -> Result<f64> {
    Ok(energy_parts(f, k)?.total)
}

/// Cross energy between the upper half of an odd field and its mirror.
pub fn interaction_energy(f: &ParticleField, k: &Kernel) -> Result<f64> {
    if f.symmetry() != Symmetry::Odd {
        return Err(Error::NotOdd);
    }
    let parts = f.particles();
    let (off, on) = pairsum::sum_pairs::<1, _, _>(
        parts.len(),
        |i, j| {
            let (a, b) = (&parts[i], &parts[j]);
            let gm = k.pair_value(a.pos.r, b.pos.r, a.pos.z + b.pos.z)?;
            Ok([2.0 * a.strength() * b.strength() * gm])
        },
        |i| {
            let a = &parts[i];
            let gm = k.pair_value(a.pos.r, a.pos.r, 2.0 * a.pos.z)?;
            Ok([a.strength() * a.strength() * gm])
        },
    )?;
    Ok(PI * (off[0] + on[0]))
}

/// `B[ξ₁, ξ₂] = ∫ ξ₁ u_z[ξ₂]`.
pub fn b_operator(f1: &ParticleField, f2: &ParticleField, k: &Kernel) -> Result<f64> {
    if f1.is_empty() {
        return Ok(0.0);
    }
    let u = if f1 == f2 {
        k.self_velocities(f2)?
    } else {
        k.velocity_at(f2, &f1.positions())?
    };
    Ok(f1
        .particles()
        .iter()
        .zip(u)
        .map(|(p, (_, uz))| p.vol * p.xi * uz)
        .sum())
}

/// One time sample of the monitored functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub e_total: f64,
    pub e_plus: f64,
    pub e_inter: f64,
    pub impulse_plus: f64,
    pub mass_plus: f64,
    pub l2_plus: f64,
    pub z_c: f64,
    pub tau_fit: f64,
    pub dist_fit: f64,
    pub u_max: f64,
}

impl DiagRecord {
    pub const CSV_HEADER: &'static str =
        "t,E_total,E_plus,E_inter,impulse_plus,mass_plus,l2_plus,z_c,tau_fit,dist_fit,u_max";

    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.e_total,
            self.e_plus,
            self.e_inter,
            self.impulse_plus,
            self.mass_plus,
            self.l2_plus,
            self.z_c,
            self.tau_fit,
            self.dist_fit,
            self.u_max,
        ];
        v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }

    /// Functionals at time `t` that need no velocity or fit.
    pub fn measure(t: f64, f: &ParticleField, k: &Kernel) -> Result<Self> {
        let e = energy_parts(f, k)?;
        Ok(Self {
            t,
            e_total: e.total,
            e_plus: e.plus,
            e_inter: e.inter,
            impulse_plus: impulse(f),
            mass_plus: mass(f),
            l2_plus: l2_sq(f).sqrt(),
            z_c: z_center(f),
            tau_fit: f64::NAN,
            dist_fit: f64::NAN,
            u_max: f64::NAN,
        })
    }
}

/// Rectangle `[0, r_max] × [z_lo, z_hi]` of square cells of side `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h > 0.0 && self.r_max > 0.0 && self.z_hi > self.z_lo && self.h.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("degenerate grid {self:?}")))
        }
    }

    pub fn nr(&self) -> usize {
        (self.r_max / self.h).round().max(1.0) as usize
    }

    pub fn nz(&self) -> usize {
        ((self.z_hi - self.z_lo) / self.h).round().max(1.0) as usize
    }

    pub fn r_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    pub fn z_center(&self, j: usize) -> f64 {
        self.z_lo + (j as f64 + 0.5) * self.h
    }

    /// 3D volume of the cells in column `i`.
    pub fn cell_volume(&self, i: usize) -> f64 {
        2.0 * PI * self.r_center(i) * self.h * self.h
    }
}

/// Cell averages of ξ, stored row-major in `z` (index `j * nr + i`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub nr: usize,
    pub nz: usize,
    pub xi: Vec<f64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let (nr, nz) = (spec.nr(), spec.nz());
        Ok(Self {
            spec,
            nr,
            nz,
            xi: vec![0.0; nr * nz],
        })
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nr + i
    }

    pub fn center(&self, i: usize, j: usize) -> HalfPlanePoint {
        HalfPlanePoint::new(self.spec.r_center(i), self.spec.z_center(j))
    }

    /// Iterates `(i, j, ξ)` over all cells.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.xi
            .iter()
            .enumerate()
            .map(move |(k, &x)| (k % self.nr, k / self.nr, x))
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(i, _, x)| self.spec.cell_volume(i) * x.abs()).sum()
    }

    pub fn impulse(&self) -> f64 {
        self.cells()
            .map(|(i, _, x)| {
                let r = self.spec.r_center(i);
                self.spec.cell_volume(i) * r * r * x.abs()
            })
            .sum()
    }

    pub fn l2_sq(&self) -> f64 {
        self.cells().map(|(i, _, x)| self.spec.cell_volume(i) * x * x).sum()
    }

    pub fn z_center(&self) -> f64 {
        let (n, d) = self.cells().fold((0.0, 0.0), |(n, d), (i, j, x)| {
            let w = self.spec.cell_volume(i) * x;
            (n + w * self.spec.z_center(j), d + w)
        });
        n / d
    }

    /// The cells as particles, skipping empty ones.
    pub fn to_particles(&self, symmetry: Symmetry) -> Result<ParticleField> {
        let parts = self
            .cells()
            .filter(|&(_, _, x)| x != 0.0)
            .map(|(i, j, x)| Particle::new(self.center(i, j), x, self.spec.cell_volume(i)))
            .collect();
        ParticleField::new(parts, symmetry, FieldMeta::seeded("grid", self.spec.h))
    }
}

/// Nearest-cell deposition of `w ξ`, converted back to cell averages.
pub fn rasterize(f: &ParticleField, spec: &GridSpec) -> Result<GridField> {
    let mut g = GridField::zeros(*spec)?;
    for p in f.particles() {
        let fi = (p.pos.r / spec.h).floor();
        let fj = ((p.pos.z - spec.z_lo) / spec.h).floor();
        if fi < 0.0 || fj < 0.0 || fi >= g.nr as f64 || fj >= g.nz as f64 {
            return Err(Error::OutOfGrid {
                r: p.pos.r,
                z: p.pos.z,
            });
        }
        let k = g.idx(fi as usize, fj as usize);
        g.xi[k] += p.vol * p.xi;
    }
    let nr = g.nr;
    for (k, x) in g.xi.iter_mut().enumerate() {
        *x /= spec.cell_volume(k % nr);
    }
    Ok(g)
}

/// Components of the combined `L¹ ∩ L² ∩ L¹_w` distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub l1: f64,
    pub l2: f64,
    pub l1w: f64,
    pub sum: f64,
}

/// Distance between a grid field and the Hill profile sampled at cell
/// centres.
pub fn norm_distance(g: &GridField, hp: &HillParams) -> Distance {
    let (mut l1, mut l2, mut l1w) = (0.0, 0.0, 0.0);
    for (i, j, x) in g.cells() {
        let diff = (x - hill_xi(hp, g.center(i, j))).abs();
        if diff == 0.0 {
            continue;
        }
        let r = g.spec.r_center(i);
        let v = g.spec.cell_volume(i);
        l1 += v * diff;
        l2 += v * diff * diff;
        l1w += v * r * r * diff;
    }
    let l2 = l2.sqrt();
    Distance {
        l1,
        l2,
        l1w,
        sum: l1 + l2 + l1w,
    }
}
