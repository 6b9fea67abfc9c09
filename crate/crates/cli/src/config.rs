//! Per-command JSON configs. Every field has a default; unknown keys are
//! rejected.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::Context;
use axivort::checks::SuiteConfig;
use axivort::hill::hill_mass;
use axivort::{HillParams, KernelConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub type KernelCheckConfig = SuiteConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleHillConfig {
    pub hill: HillParams,
    pub n: usize,
    pub t_end: f64,
    /// Defaults to `0.1 h / U_ref`.
    pub dt: Option<f64>,
    /// Defaults to `δ = h`.
    pub kernel: Option<KernelConfig>,
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    /// Allowed relative error of the `z_c` slope.
    pub slope_tol: f64,
}

impl Default for SingleHillConfig {
    fn default() -> Self {
        Self {
            hill: HillParams::unit(),
            n: 48,
            t_end: 3.0,
            dt: None,
            kernel: None,
            record_every: 10,
            snapshot_every: None,
            slope_tol: 0.02,
        }
    }
}

impl SingleHillConfig {
    pub fn quick(self) -> Self {
        Self {
            n: 16,
            t_end: self.t_end.min(1.0),
            ..self
        }
    }
}

/// Departures of the initial pair from the exact seed. Every one keeps the
/// support inside `d − 2 ≤ z ≤ d + 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    /// Multiplies every particle's ξ.
    pub lam_scale: f64,
    /// Stretches radii (and volumes with them) by this factor.
    pub dilation: f64,
    /// Uniform axial jitter of each particle, in seeding spacings.
    pub z_jitter: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            lam_scale: 1.0,
            dilation: 1.0,
            z_jitter: 0.0,
        }
    }
}

impl Perturbation {
    pub fn is_exact(&self) -> bool {
        self.lam_scale == 1.0 && self.dilation == 1.0 && self.z_jitter == 0.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub lam: f64,
    pub a: f64,
    pub d: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub kernel: Option<KernelConfig>,
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    pub raster_factor: usize,
    pub perturbation: Perturbation,
    pub drift_tol: f64,
    pub bookkeeping_tol: f64,
    pub slope_tol: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            lam: 1.0,
            a: 1.0,
            d: 10.0,
            n: 32,
            t_end: 5.0,
            dt: None,
            kernel: None,
            record_every: 1,
            snapshot_every: None,
            raster_factor: 4,
            perturbation: Perturbation::default(),
            drift_tol: 0.01,
            bookkeeping_tol: 1e-8,
            slope_tol: 0.05,
        }
    }
}

impl PairConfig {
    pub fn quick(self) -> Self {
        Self {
            n: 12,
            t_end: self.t_end.min(1.0),
            ..self
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaximizeConfig {
    pub mu: f64,
    pub nu: f64,
    pub lam: f64,
    pub h: f64,
    pub tol_e: f64,
    pub max_iter: usize,
    pub kernel: KernelConfig,
    pub sym_diff_tol: f64,
    pub energy_tol: f64,
}

impl Default for MaximizeConfig {
    fn default() -> Self {
        Self {
            mu: 4.0 * PI / 15.0,
            nu: 3.0,
            lam: 1.0,
            h: 1.0 / 32.0,
            tol_e: 1e-10,
            max_iter: 200,
            kernel: KernelConfig::default(),
            sym_diff_tol: 0.05,
            energy_tol: 0.03,
        }
    }
}

impl MaximizeConfig {
    pub fn quick(self) -> Self {
        Self {
            h: self.h.max(1.0 / 12.0),
            ..self
        }
    }

    /// The mass bound of the Hill vortex the impulse bound selects, doubled.
    pub fn hill_consistent_nu(&self) -> f64 {
        let a = (15.0 * self.mu / (4.0 * PI * self.lam)).powf(0.2);
        2.0 * hill_mass(&HillParams {
            lam: self.lam,
            a,
            tau: 0.0,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EinterConfig {
    pub ds: Vec<f64>,
    pub lam: f64,
    pub a: f64,
    pub n: usize,
    /// `δ` defaults to the seeding spacing when the config leaves it at 0.
    pub kernel: KernelConfig,
    /// Largest allowed max/min of `d · E_inter`.
    pub spread_tol: f64,
}

impl Default for EinterConfig {
    fn default() -> Self {
        Self {
            ds: vec![5.0, 10.0, 20.0],
            lam: 1.0,
            a: 1.0,
            n: 16,
            kernel: KernelConfig::default(),
            spread_tol: 1.25,
        }
    }
}

impl EinterConfig {
    pub fn quick(self) -> Self {
        Self { n: 8, ..self }
    }
}
