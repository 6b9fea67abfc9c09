//! Reference values computed once by independent quadrature and frozen in
//! `data/oracle_constants.json`.

use std::sync::OnceLock;

use serde::Deserialize;

/// Raw text of the constants file, embedded at build time.
pub const RAW: &str = include_str!("../data/oracle_constants.json");

#[derive(Clone, Debug, Deserialize)]
pub struct OracleConstants {
    /// `G((1,0), (1,1))`.
    pub v1: f64,
    /// `G((1,1), (2,2)) − G((1,1), (2,−2))`.
    pub v2: f64,
    /// Gradient of `G(·, (2,3))` at `(1,0)`.
    pub grad_r: f64,
    pub grad_z: f64,
    /// Stream function of the unit vortex at `(0.5, 0)`.
    pub s1: f64,
    /// Axial velocity of the unit vortex at its centre.
    pub u0: f64,
    /// Energy of the unit vortex.
    pub e_hill: f64,
}

pub fn oracle() -> &'static OracleConstants {
    static C: OnceLock<OracleConstants> = OnceLock::new();
    C.get_or_init(|| serde_json::from_str(RAW).expect("embedded oracle constants are valid JSON"))
}

pub fn e_hill() -> f64 {
    oracle().e_hill
}
