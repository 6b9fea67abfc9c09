//! Axisymmetric Green's function of the Stokes stream function and the
//! fields it induces.
//!
//! For points `p = (r, z)` and `q = (r', z')` of the meridional half-plane
//!
//! ```text
//! G(p, q) = r r' / (2π) ∫_0^π cos ϑ / sqrt(r² + r'² − 2 r r' cos ϑ + (z − z')² + δ²) dϑ
//! ```
//!
//! with `δ` an optional blob regularization. The angular integral is
//! evaluated by Gauss–Legendre quadrature with node doubling. The constant
//! part of the denominator, whose cosine moment vanishes, is subtracted
//! analytically first: with `A = r² + r'² + s² + δ²`, `B = 2 r r'`,
//! `D² = A − B cos ϑ` and `D₀² = A`,
//!
//! ```text
//! ∫ cos ϑ / D = (B / D₀) ∫ cos² ϑ / (D (D₀ + D))
//! ```
//!
//! so every quadrature sum has a positive integrand and the relative
//! convergence test stays meaningful near the axis and in the far field.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ParticleField, Symmetry};
use crate::pairsum;
use crate::quadrature::{angular_rule, AngularRule};

/// A point `(r, z)` of the meridional half-plane, `r ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub r: f64,
    pub z: f64,
}

impl HalfPlanePoint {
    pub const fn new(r: f64, z: f64) -> Self {
        Self { r, z }
    }

    /// Reflection through the plane `z = 0`.
    pub fn mirror(self) -> Self {
        Self::new(self.r, -self.z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Initial Gauss–Legendre node count on `[0, π]`.
    pub theta_nodes: usize,
    /// Largest node count tried before giving up.
    pub max_theta_nodes: usize,
    /// Relative change between successive doublings accepted as converged.
    pub rel_tol: f64,
    /// Blob regularization length.
    pub delta: f64,
    /// Radius below which velocities use the on-axis limit.
    pub r_min: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            theta_nodes: 64,
            max_theta_nodes: 4096,
            rel_tol: 1e-10,
            delta: 0.0,
            r_min: 1e-8,
        }
    }
}

impl KernelConfig {
    /// Default quadrature with `δ = h` and an axis cutoff scaled to `scale`.
    pub fn for_spacing(h: f64, scale: f64) -> Self {
        Self {
            delta: h,
            r_min: 1e-8 * scale,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::KernelConfig(msg));
        if self.theta_nodes == 0 {
            return bad("theta_nodes must be positive".into());
        }
        if self.theta_nodes > self.max_theta_nodes {
            return bad(format!(
                "theta_nodes={} exceeds max_theta_nodes={}",
                self.theta_nodes, self.max_theta_nodes
            ));
        }
        if 2 * self.theta_nodes > self.max_theta_nodes {
            return bad(format!(
                "max_theta_nodes={} leaves no room to double theta_nodes={}",
                self.max_theta_nodes, self.theta_nodes
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad(format!("rel_tol={} must lie in (0, 1)", self.rel_tol));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta={} must be finite and >= 0", self.delta));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return bad(format!("r_min={} must be positive", self.r_min));
        }
        Ok(())
    }
}

/// Geometry of one ring pair: `e = (r − r')² + s² + δ²`, `b = 2 r r'`,
/// `d0 = sqrt(e + b)`.
#[derive(Clone, Copy, Debug)]
struct RingGeometry {
    e: f64,
    b: f64,
    d0: f64,
}

/// Quadrature sums of one ring pair, sufficient for the kernel value and
/// both arguments' gradients.
///
/// * `p = ∫ cos²ϑ / (D (D₀ + D))`
/// * `q = ∫ cos²ϑ (D₀² + D₀D + D²) / ((D₀ + D) D³)`
/// * `s = ∫ cos²ϑ / D³`
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairTerms {
    r1: f64,
    r2: f64,
    d0: f64,
    p: f64,
    q: f64,
    s: f64,
}

impl PairTerms {
    /// Velocity at the first point per unit source strength of the second,
    /// with `s = z₁ − z₂` the axial separation seen from the first point.
    pub(crate) fn velocity_at_first(&self, s: f64) -> [f64; 2] {
        let d03 = self.d0 * self.d0 * self.d0;
        let ur = self.r1 * self.r2 * self.r2 * s * self.q / (PI * d03);
        let uz = self.r2 * self.r2 / PI
            * (self.p / self.d0 - self.r1 * self.r1 * self.q / d03 + 0.5 * self.s);
        [ur, uz]
    }

    /// Velocity at the second point per unit source strength of the first,
    /// with `s = z₂ − z₁`.
    pub(crate) fn velocity_at_second(&self, s: f64) -> [f64; 2] {
        let d03 = self.d0 * self.d0 * self.d0;
        let ur = self.r2 * self.r1 * self.r1 * s * self.q / (PI * d03);
        let uz = self.r1 * self.r1 / PI
            * (self.p / self.d0 - self.r2 * self.r2 * self.q / d03 + 0.5 * self.s);
        [ur, uz]
    }
}

/// A validated kernel configuration with its quadrature ladder.
#[derive(Clone, Debug)]
pub struct Kernel {
    cfg: KernelConfig,
    ladder: Vec<Arc<AngularRule>>,
}

impl Kernel {
    pub fn new(cfg: KernelConfig) -> Result<Self> {
        cfg.validate()?;
        let mut ladder = Vec::new();
        let mut n = cfg.theta_nodes;
        while n <= cfg.max_theta_nodes {
            ladder.push(angular_rule(n));
            n *= 2;
        }
        Ok(Self { cfg, ladder })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn delta(&self) -> f64 {
        self.cfg.delta
    }

    fn geometry(&self, r1: f64, r2: f64, s: f64) -> Result<RingGeometry> {
        let dr = r1 - r2;
        let e = dr * dr + s * s + self.cfg.delta * self.cfg.delta;
        if e == 0.0 {
            return Err(Error::CoincidentPoints { r: r1, z: s });
        }
        let b = 2.0 * r1 * r2;
        Ok(RingGeometry {
            e,
            b,
            d0: (e + b).sqrt(),
        })
    }

    fn converge<const K: usize>(&self, sums: impl Fn(&AngularRule) -> [f64; K]) -> Result<[f64; K]> {
        let mut prev = sums(&self.ladder[0]);
        let mut older = prev;
        for rule in &self.ladder[1..] {
            let cur = sums(rule);
            let done = cur
                .iter()
                .zip(&prev)
                .all(|(c, p)| (c - p).abs() <= self.cfg.rel_tol * c.abs());
            if done {
                return Ok(cur);
            }
            older = prev;
            prev = cur;
        }
        Err(Error::QuadratureFailure {
            nodes: self.ladder.last().map_or(0, |r| r.len()),
            last: prev[0],
            previous: older[0],
        })
    }

    /// `G` for radii `r1`, `r2` and axial separation `s`.
    pub(crate) fn pair_value(&self, r1: f64, r2: f64, s: f64) -> Result<f64> {
        if r1 == 0.0 || r2 == 0.0 {
            return Ok(0.0);
        }
        let g = self.geometry(r1, r2, s)?;
        let [p] = self.converge(|rule| [value_sum(rule, &g)])?;
        let rr = r1 * r2;
        Ok(rr * rr * p / (PI * g.d0))
    }

    pub(crate) fn pair_terms(&self, r1: f64, r2: f64, s: f64) -> Result<PairTerms> {
        let g = self.geometry(r1, r2, s)?;
        let [p, q, s3] = self.converge(|rule| full_sums(rule, &g))?;
        Ok(PairTerms {
            r1,
            r2,
            d0: g.d0,
            p,
            q,
            s: s3,
        })
    }

    /// The Green's function `G(p, q)`.
    pub fn green(&self, p: HalfPlanePoint, q: HalfPlanePoint) -> Result<f64> {
        check_point(p)?;
        check_point(q)?;
        self.pair_value(p.r, q.r, p.z - q.z)
    }

    /// `G(p, q) − G(p, q̄)` with `q̄` the mirror image of `q`: the Green's
    /// function of the odd-symmetric problem in the upper half-space.
    pub fn green_image(&self, p: HalfPlanePoint, q: HalfPlanePoint) -> Result<f64> {
        Ok(self.green(p, q)? - self.green(p, q.mirror())?)
    }

    /// Gradient of `G(·, q)` at `p`: `(∂_r G, ∂_z G)`.
    pub fn grad_green(&self, p: HalfPlanePoint, q: HalfPlanePoint) -> Result<(f64, f64)> {
        check_point(p)?;
        check_point(q)?;
        let s = p.z - q.z;
        let t = self.pair_terms(p.r, q.r, s)?;
        let [_, uz] = t.velocity_at_first(s);
        let d03 = t.d0 * t.d0 * t.d0;
        let rr = p.r * q.r;
        Ok((p.r * uz, -rr * rr * s * t.q / (PI * d03)))
    }

    /// Stream function `𝒢[ξ](p)` of a particle field.
    ///
    /// A particle sitting exactly at `p` is skipped when `δ = 0`.
    pub fn stream(&self, field: &ParticleField, p: HalfPlanePoint) -> Result<f64> {
        check_point(p)?;
        let mut psi = 0.0;
        for part in field.particles() {
            let gamma = part.strength();
            let q = part.pos;
            if self.is_singular(p, q) {
                continue;
            }
            let mut g = self.pair_value(p.r, q.r, p.z - q.z)?;
            if field.symmetry() == Symmetry::Odd {
                g -= self.pair_value(p.r, q.r, p.z + q.z)?;
            }
            psi += gamma * g;
        }
        Ok(psi)
    }

    /// Velocity `(u_r, u_z) = (−∂_z𝒢/r, ∂_r𝒢/r)` induced by a particle
    /// field at `p`. Below `r_min` the on-axis limit is used: `u_r = 0`
    /// and `u_z` is evaluated at `r = r_min`.
    pub fn velocity(&self, field: &ParticleField, p: HalfPlanePoint) -> Result<(f64, f64)> {
        check_point(p)?;
        let on_axis = p.r < self.cfg.r_min;
        let r = p.r.max(self.cfg.r_min);
        let mut u = [0.0; 2];
        for part in field.particles() {
            let q = part.pos;
            if self.is_singular(p, q) {
                continue;
            }
            let gamma = part.strength();
            let rq = q.r.max(self.cfg.r_min);
            let s = p.z - q.z;
            let d = self.pair_terms(r, rq, s)?.velocity_at_first(s);
            u[0] += gamma * d[0];
            u[1] += gamma * d[1];
            if field.symmetry() == Symmetry::Odd {
                let s = p.z + q.z;
                let m = self.pair_terms(r, rq, s)?.velocity_at_first(s);
                u[0] -= gamma * m[0];
                u[1] -= gamma * m[1];
            }
        }
        if on_axis {
            u[0] = 0.0;
        }
        Ok((u[0], u[1]))
    }

    /// Stream function at many targets; each target's sum runs in particle
    /// order.
    pub fn stream_at(&self, field: &ParticleField, targets: &[HalfPlanePoint]) -> Result<Vec<f64>> {
        pairsum::map_rows(targets.len(), |i| self.stream(field, targets[i]))
    }

    /// Velocity at many targets; each target's sum runs in particle order.
    pub fn velocity_at(
        &self,
        field: &ParticleField,
        targets: &[HalfPlanePoint],
    ) -> Result<Vec<(f64, f64)>> {
        pairsum::map_rows(targets.len(), |i| self.velocity(field, targets[i]))
    }

    /// Self-induced velocity at every particle of a field.
    ///
    /// One set of quadrature sums per unordered pair serves both members.
    /// With `δ > 0` each particle also feels its own regularized ring.
    pub fn self_velocities(&self, field: &ParticleField) -> Result<Vec<(f64, f64)>> {
        let parts = field.particles();
        let odd = field.symmetry() == Symmetry::Odd;
        let r_min = self.cfg.r_min;
        let regularized = self.cfg.delta > 0.0;
        let out = pairsum::scatter_pairs::<2, _, _>(
            parts.len(),
            |i, j| {
                let (a, b) = (&parts[i], &parts[j]);
                let (ri, rj) = (a.pos.r.max(r_min), b.pos.r.max(r_min));
                let (gi, gj) = (a.strength(), b.strength());
                let mut ci = [0.0; 2];
                let mut cj = [0.0; 2];
                let s = a.pos.z - b.pos.z;
                if s != 0.0 || ri != rj || regularized {
                    let t = self.pair_terms(ri, rj, s)?;
                    let vi = t.velocity_at_first(s);
                    let vj = t.velocity_at_second(-s);
                    for k in 0..2 {
                        ci[k] += gj * vi[k];
                        cj[k] += gi * vj[k];
                    }
                }
                if odd {
                    let s = a.pos.z + b.pos.z;
                    let t = self.pair_terms(ri, rj, s)?;
                    let vi = t.velocity_at_first(s);
                    let vj = t.velocity_at_second(s);
                    for k in 0..2 {
                        ci[k] -= gj * vi[k];
                        cj[k] -= gi * vj[k];
                    }
                }
                Ok((ci, cj))
            },
            |i| {
                let a = &parts[i];
                let r = a.pos.r.max(r_min);
                let g = a.strength();
                let mut c = [0.0; 2];
                if regularized {
                    let v = self.pair_terms(r, r, 0.0)?.velocity_at_first(0.0);
                    c[1] += g * v[1];
                }
                if odd {
                    let s = 2.0 * a.pos.z;
                    let v = self.pair_terms(r, r, s)?.velocity_at_first(s);
                    c[0] -= g * v[0];
                    c[1] -= g * v[1];
                }
                Ok(c)
            },
        )?;
        Ok(parts
            .iter()
            .zip(out)
            .map(|(p, [ur, uz])| if p.pos.r < r_min { (0.0, uz) } else { (ur, uz) })
            .collect())
    }

    fn is_singular(&self, p: HalfPlanePoint, q: HalfPlanePoint) -> bool {
        self.cfg.delta == 0.0 && p.r == q.r && p.z == q.z
    }
}

fn check_point(p: HalfPlanePoint) -> Result<()> {
    if p.r >= 0.0 && p.r.is_finite() && p.z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "half-plane point ({}, {}) needs finite coordinates with r >= 0",
            p.r, p.z
        )))
    }
}

fn value_sum(rule: &AngularRule, g: &RingGeometry) -> f64 {
    let (e, b, d0) = (g.e, g.b, g.d0);
    let mut acc = [0.0f64; 4];
    let cos = rule.cos.chunks_exact(4);
    let omc = rule.one_minus_cos.chunks_exact(4);
    let w = rule.weight.chunks_exact(4);
    let tail = (cos.remainder(), omc.remainder(), w.remainder());
    for ((c, o), w) in cos.zip(omc).zip(w) {
        for l in 0..4 {
            let d = (e + b * o[l]).sqrt();
            acc[l] += w[l] * c[l] * c[l] / (d * (d0 + d));
        }
    }
    for ((c, o), w) in tail.0.iter().zip(tail.1).zip(tail.2) {
        let d = (e + b * o).sqrt();
        acc[0] += w * c * c / (d * (d0 + d));
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

fn full_sums(rule: &AngularRule, g: &RingGeometry) -> [f64; 3] {
    let (e, b, d0) = (g.e, g.b, g.d0);
    let d02 = d0 * d0;
    let mut ap = [0.0f64; 4];
    let mut aq = [0.0f64; 4];
    let mut as_ = [0.0f64; 4];
    let cos = rule.cos.chunks_exact(4);
    let omc = rule.one_minus_cos.chunks_exact(4);
    let w = rule.weight.chunks_exact(4);
    let tail = (cos.remainder(), omc.remainder(), w.remainder());
    let node = |c: f64, o: f64, w: f64| {
        let d = (e + b * o).sqrt();
        let sum = d0 + d;
        // one division: t = 1 / (D (D0 + D))
        let t = 1.0 / (d * sum);
        let inv_d = t * sum;
        let wc2 = w * c * c;
        let s = wc2 * inv_d * inv_d * inv_d;
        (wc2 * t, s * (d02 + d0 * d + d * d) * t * d, s)
    };
    for ((c, o), w) in cos.zip(omc).zip(w) {
        for l in 0..4 {
            let (p, q, s) = node(c[l], o[l], w[l]);
            ap[l] += p;
            aq[l] += q;
            as_[l] += s;
        }
    }
    for ((c, o), w) in tail.0.iter().zip(tail.1).zip(tail.2) {
        let (p, q, s) = node(*c, *o, *w);
        ap[0] += p;
        aq[0] += q;
        as_[0] += s;
    }
    let fold = |a: [f64; 4]| (a[0] + a[1]) + (a[2] + a[3]);
    [fold(ap), fold(aq), fold(as_)]
}
