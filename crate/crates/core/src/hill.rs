//! Hill's spherical vortex: closed-form functionals and particle seeding.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::field::{FieldMeta, Particle, ParticleField, Symmetry};
use crate::kernel::HalfPlanePoint;
use crate::quadrature::gauss_legendre;

/// Speed of the unit vortex (`λ = a = 1`).
pub const W_H: f64 = 2.0 / 15.0;

/// `ξ = λ` on the ball of radius `a` centred at `(0, τ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillParams {
    pub lam: f64,
    pub a: f64,
    pub tau: f64,
}

impl HillParams {
    pub fn new(lam: f64, a: f64, tau: f64) -> Result<Self> {
        let hp = Self { lam, a, tau };
        hp.validate()?;
        Ok(hp)
    }

    pub const fn unit() -> Self {
        Self {
            lam: 1.0,
            a: 1.0,
            tau: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lam > 0.0 && self.lam.is_finite()) {
            return Err(Error::InvalidParameter(format!("lam={} must be > 0", self.lam)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a={} must be > 0", self.a)));
        }
        if !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau={} must be finite", self.tau)));
        }
        Ok(())
    }

    pub fn shifted(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    /// Radius of the vortex with strength `lam` and impulse `impulse`.
    pub fn radius_from_impulse(lam: f64, impulse: f64) -> f64 {
        (15.0 * impulse / (8.0 * PI * lam)).powf(0.2)
    }
}

/// Odd-symmetric pair: vortex of `hill` centred at `z = d`, its negative
/// mirror at `z = −d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairParams {
    pub lam: f64,
    pub a: f64,
    pub d: f64,
}

impl PairParams {
    pub fn new(lam: f64, a: f64, d: f64) -> Result<Self> {
        let pp = Self { lam, a, d };
        pp.upper().validate()?;
        if !(d > a) {
            return Err(Error::InvalidParameter(format!(
                "half-separation d={d} must exceed the radius a={a}"
            )));
        }
        Ok(pp)
    }

    pub fn upper(&self) -> HillParams {
        HillParams {
            lam: self.lam,
            a: self.a,
            tau: self.d,
        }
    }
}

pub fn hill_xi(hp: &HillParams, p: HalfPlanePoint) -> f64 {
    let dz = p.z - hp.tau;
    if p.r * p.r + dz * dz < hp.a * hp.a {
        hp.lam
    } else {
        0.0
    }
}

pub fn hill_speed(hp: &HillParams) -> f64 {
    hp.lam * hp.a * hp.a * W_H
}

pub fn hill_mass(hp: &HillParams) -> f64 {
    hp.lam * 4.0 * PI / 3.0 * hp.a.powi(3)
}

/// `‖r² ξ‖₁`.
pub fn hill_impulse(hp: &HillParams) -> f64 {
    8.0 * PI / 15.0 * hp.lam * hp.a.powi(5)
}

pub fn hill_energy(hp: &HillParams) -> f64 {
    hp.lam * hp.lam * hp.a.powi(7) * constants::e_hill()
}

/// Largest energy at half-impulse `mu` for strength `lam`:
/// `(15/4π)^{7/5} E_H λ^{3/5} μ^{7/5}`.
pub fn max_energy(lam: f64, mu: f64) -> f64 {
    (15.0 / (4.0 * PI)).powf(1.4) * constants::e_hill() * lam.powf(0.6) * mu.powf(1.4)
}

fn lattice(hp: &HillParams, n: usize) -> Result<Vec<Particle>> {
    hp.validate()?;
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 particles per radius, got {n}"
        )));
    }
    let h = hp.a / n as f64;
    let mut out = Vec::new();
    for j in 0..2 * n {
        let z = hp.tau + (j as f64 - n as f64 + 0.5) * h;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            let p = HalfPlanePoint::new(r, z);
            if hill_xi(hp, p) > 0.0 {
                out.push(Particle::new(p, hp.lam, 2.0 * PI * r * h * h));
            }
        }
    }
    Ok(out)
}

/// Cell-centred lattice seeding with spacing `h = a/n`.
pub fn seed_hill(hp: &HillParams, n: usize) -> Result<ParticleField> {
    let meta = FieldMeta::seeded("hill", hp.a / n as f64);
    ParticleField::new(lattice(hp, n)?, Symmetry::Plain, meta)
}

/// Upper half of an odd pair; the mirror vortex is implied by the tag.
pub fn seed_pair(pp: &PairParams, n: usize) -> Result<ParticleField> {
    PairParams::new(pp.lam, pp.a, pp.d)?;
    let meta = FieldMeta::seeded("pair", pp.a / n as f64);
    ParticleField::new(lattice(&pp.upper(), n)?, Symmetry::Odd, meta)
}

/// Seeds the vortex with a polar product Gauss rule centred at `center`, a
/// point of the closed meridional half-disc.
///
/// Rays are split at the directions of the two poles `(0, τ ± a)` so the
/// boundary distance is smooth on every angular panel. The rule integrates
/// functions with an integrable point singularity at `center` far more
/// accurately than a lattice of the same size.
pub fn seed_hill_polar(
    hp: &HillParams,
    center: HalfPlanePoint,
    n_rho: usize,
    n_phi: usize,
) -> Result<ParticleField> {
    hp.validate()?;
    let (rc, zc) = (center.r, center.z - hp.tau);
    if !(rc >= 0.0 && rc * rc + zc * zc < hp.a * hp.a) {
        return Err(Error::InvalidParameter(format!(
            "polar centre ({}, {}) must lie inside the half-disc",
            center.r, center.z
        )));
    }
    if n_rho == 0 || n_phi == 0 {
        return Err(Error::InvalidParameter("polar rule needs nodes".into()));
    }
    let a = hp.a;
    // directions of (0, ±a) seen from the centre
    let up = (a - zc).atan2(-rc);
    let down = (-a - zc).atan2(-rc);
    let mut cuts = if rc > 0.0 {
        vec![down, up, down + 2.0 * PI]
    } else {
        vec![-0.5 * PI, 0.5 * PI]
    };
    cuts.sort_by(f64::total_cmp);
    let reach = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        let proj = rc * c + zc * s;
        let circle = -proj + (proj * proj - (rc * rc + zc * zc) + a * a).sqrt();
        if c < 0.0 {
            circle.min(-rc / c)
        } else {
            circle
        }
    };
    let (xr, wr) = gauss_legendre(n_rho);
    let (xp, wp) = gauss_legendre(n_phi);
    let mut out = Vec::with_capacity(n_rho * n_phi * cuts.len());
    for win in cuts.windows(2) {
        let (p0, p1) = (win[0], win[1]);
        let half = 0.5 * (p1 - p0);
        for (x, w) in xp.iter().zip(&wp) {
            let phi = p0 + half * (x + 1.0);
            let rho_max = reach(phi);
            if rho_max <= 0.0 {
                continue;
            }
            let (c, s) = (phi.cos(), phi.sin());
            for (y, v) in xr.iter().zip(&wr) {
                let rho = 0.5 * rho_max * (y + 1.0);
                let r = rc + rho * c;
                if r <= 0.0 {
                    continue;
                }
                let area = half * w * 0.5 * rho_max * v * rho;
                let pos = HalfPlanePoint::new(r, center.z + rho * s);
                out.push(Particle::new(pos, hp.lam, 2.0 * PI * r * area));
            }
        }
    }
    ParticleField::new(out, Symmetry::Plain, FieldMeta::new("hill-polar"))
}
