//! Transport of ξ by its self-induced velocity.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_shift, FitReference};
use crate::error::{Error, Result};
use crate::field::{DiagRecord, ParticleField, Symmetry};
use crate::kernel::{HalfPlanePoint, Kernel, KernelConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub kernel: KernelConfig,
    /// Steps between diagnostic records; the final state is always recorded.
    pub record_every: usize,
    /// Fit the shifted Hill profile at every record.
    pub fit_shift: bool,
    /// Raster cell side for fitting, in seeding spacings.
    #[serde(default = "default_raster_factor")]
    pub raster_factor: usize,
    /// Steps between particle snapshots; none when absent.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

fn default_raster_factor() -> usize {
    4
}

/// `0.1 h / U_ref`.
pub fn default_dt(h: f64, u_ref: f64) -> f64 {
    0.1 * h / u_ref
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt={} must be > 0", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end={} must be >= 0", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be positive".into()));
        }
        if self.raster_factor == 0 {
            return Err(Error::InvalidParameter("raster_factor must be positive".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::InvalidParameter("snapshot_every must be positive".into()));
        }
        self.kernel.validate()
    }

    /// Number of steps and the step actually taken, which divides `t_end`
    /// exactly and never exceeds `dt`.
    pub fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

fn check_symmetry(f: &ParticleField, pos: &[HalfPlanePoint], dt: f64) -> Result<()> {
    if f.symmetry() == Symmetry::Odd {
        if let Some((index, p)) = pos.iter().enumerate().find(|(_, p)| !(p.z > 0.0)) {
            return Err(Error::SymmetryViolation { index, z: p.z, dt });
        }
    }
    Ok(())
}

fn advance(base: &[HalfPlanePoint], u: &[(f64, f64)], h: f64) -> Vec<HalfPlanePoint> {
    base.iter()
        .zip(u)
        .map(|(p, (ur, uz))| HalfPlanePoint::new((p.r + h * ur).abs(), p.z + h * uz))
        .collect()
}

/// One RK4 step, returning the new field and the velocity at the old
/// positions.
pub(crate) fn rk4_with_velocity(
    f: &ParticleField,
    dt: f64,
    k: &Kernel,
) -> Result<(ParticleField, Vec<(f64, f64)>)> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidParameter(format!("step dt={dt} must be finite and nonzero")));
    }
    let x0 = f.positions();
    let k1 = k.self_velocities(f)?;
    let x = advance(&x0, &k1, 0.5 * dt);
    check_symmetry(f, &x, dt)?;
    let k2 = k.self_velocities(&f.moved(&x))?;
    let x = advance(&x0, &k2, 0.5 * dt);
    check_symmetry(f, &x, dt)?;
    let k3 = k.self_velocities(&f.moved(&x))?;
    let x = advance(&x0, &k3, dt);
    check_symmetry(f, &x, dt)?;
    let k4 = k.self_velocities(&f.moved(&x))?;
    let out: Vec<HalfPlanePoint> = x0
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ur = (k1[i].0 + 2.0 * k2[i].0 + 2.0 * k3[i].0 + k4[i].0) / 6.0;
            let uz = (k1[i].1 + 2.0 * k2[i].1 + 2.0 * k3[i].1 + k4[i].1) / 6.0;
            HalfPlanePoint::new((p.r + dt * ur).abs(), p.z + dt * uz)
        })
        .collect();
    check_symmetry(f, &out, dt)?;
    Ok((f.moved(&out), k1))
}

/// Classical four-stage Runge–Kutta step. Vorticity and volumes are
/// carried unchanged. A negative `dt` integrates backwards.
///
/// A radius stepping through the axis is reflected back, the axis being a
/// streamline.
pub fn step_rk4(f: &ParticleField, dt: f64, k: &Kernel) -> Result<ParticleField> {
    Ok(rk4_with_velocity(f, dt, k)?.0)
}

pub fn max_speed(u: &[(f64, f64)]) -> f64 {
    u.iter().fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagRecord>,
    pub field: ParticleField,
    /// `(t, field)` every `snapshot_every` steps, including `t = 0`.
    pub snapshots: Vec<(f64, ParticleField)>,
    pub steps: usize,
    pub dt: f64,
}

struct Recorder {
    fit: Option<FitReference>,
}

impl Recorder {
    fn record(&self, t: f64, f: &ParticleField, u: &[(f64, f64)], k: &Kernel) -> Result<DiagRecord> {
        let mut rec = DiagRecord::measure(t, f, k)?;
        rec.u_max = max_speed(u);
        if let Some(fit) = &self.fit {
            let s = fit_shift(f, fit, None)?;
            rec.tau_fit = s.tau;
            rec.dist_fit = s.dist.sum;
        }
        Ok(rec)
    }
}

/// Integrates from `t = 0` to `sim.t_end`.
///
/// Failures after the first record come back as [`Error::Aborted`] with
/// the records gathered so far.
pub fn run(f0: &ParticleField, sim: &SimConfig) -> Result<RunOutput> {
    sim.validate()?;
    let k = Kernel::new(sim.kernel.clone())?;
    let fit = if sim.fit_shift {
        let h = f0.meta().spacing.ok_or_else(|| {
            Error::InvalidParameter("shift fitting needs a field with a seeding spacing".into())
        })?;
        Some(FitReference::from_field(f0, h * sim.raster_factor as f64)?)
    } else {
        None
    };
    let rec = Recorder { fit };
    let (n_steps, dt) = sim.schedule();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut f = f0.clone();
    let mut t = 0.0;
    for step in 0..n_steps {
        let res = (|| -> Result<ParticleField> {
            let (next, u) = rk4_with_velocity(&f, dt, &k)?;
            if step % sim.record_every == 0 {
                records.push(rec.record(t, &f, &u, &k)?);
            }
            Ok(next)
        })();
        match res {
            Ok(next) => {
                if let Some(every) = sim.snapshot_every {
                    if step % every == 0 {
                        snapshots.push((t, f.clone()));
                    }
                }
                f = next;
                t = (step + 1) as f64 * dt;
            }
            Err(e) => return Err(abort(t, records, e)),
        }
    }
    let last = (|| -> Result<DiagRecord> {
        let u = k.self_velocities(&f)?;
        rec.record(t, &f, &u, &k)
    })();
    match last {
        Ok(r) => records.push(r),
        Err(e) => return Err(abort(t, records, e)),
    }
    if let Some(every) = sim.snapshot_every {
        if n_steps % every == 0 {
            snapshots.push((t, f.clone()));
        }
    }
    Ok(RunOutput {
        records,
        field: f,
        snapshots,
        steps: n_steps,
        dt,
    })
}

fn abort(t: f64, records: Vec<DiagRecord>, e: Error) -> Error {
    Error::Aborted {
        t,
        records,
        source: Box::new(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{mass, FieldMeta, Particle};
    use crate::hill::{seed_hill, HillParams};

    #[test]
    fn empty_field_steps_to_empty_field() {
        let f = ParticleField::empty(Symmetry::Odd);
        let k = Kernel::new(KernelConfig::default()).unwrap();
        assert!(step_rk4(&f, 0.1, &k).unwrap().is_empty());
    }

    #[test]
    fn schedule_hits_t_end_exactly() {
        let sim = SimConfig {
            dt: 0.3,
            t_end: 1.0,
            kernel: KernelConfig::default(),
            record_every: 1,
            fit_shift: false,
            raster_factor: 2,
            snapshot_every: None,
        };
        let (n, dt) = sim.schedule();
        assert_eq!(n, 4);
        assert!((n as f64 * dt - 1.0).abs() < 1e-15);
        assert_eq!(SimConfig { dt: 0.25, ..sim.clone() }.schedule().0, 4);
        assert_eq!(SimConfig { t_end: 0.0, ..sim }.schedule().0, 0);
    }

    #[test]
    fn crossing_the_plane_is_reported() {
        // outside a strong ring the flow points back towards the plane
        let parts = vec![
            Particle::new(HalfPlanePoint::new(1.0, 0.5), 10.0, 1.0),
            Particle::new(HalfPlanePoint::new(2.0, 0.05), 1e-3, 1e-3),
        ];
        let f = ParticleField::new(parts, Symmetry::Odd, FieldMeta::default()).unwrap();
        let k = Kernel::new(KernelConfig::for_spacing(0.05, 1.0)).unwrap();
        let (_, uz) = k.velocity(&f, f.particles()[1].pos).unwrap();
        assert!(uz < 0.0);
        let dt = 0.2 / uz.abs();
        match step_rk4(&f, dt, &k) {
            Err(Error::SymmetryViolation { index, dt: got, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(got, dt);
            }
            other => panic!("expected symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn run_records_are_increasing_and_end_at_t_end() {
        let hp = HillParams::unit();
        let f = seed_hill(&hp, 8).unwrap();
        let sim = SimConfig {
            dt: 0.2,
            t_end: 0.5,
            kernel: KernelConfig::for_spacing(1.0 / 8.0, 1.0),
            record_every: 2,
            fit_shift: false,
            raster_factor: 2,
            snapshot_every: Some(1),
        };
        let out = run(&f, &sim).unwrap();
        assert_eq!(out.steps, 3);
        let ts: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 3);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!((ts[2] - 0.5).abs() < 1e-15);
        assert_eq!(out.snapshots.len(), 4);
        assert_eq!(mass(&out.field), mass(&f));
    }
}
