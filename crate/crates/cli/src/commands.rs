use std::f64::consts::PI;

use anyhow::{bail, Context};
use axivort::checks::{kernel_suite, Check};
use axivort::diagnostics::{
    bookkeeping_error, einter_decay, fit_shift, max_drift, non_decreasing_steps, shift_residual,
    slope, spread, zc_residual, FitReference,
};
use axivort::dynamics::{default_dt, run as run_sim, RunOutput, SimConfig};
use axivort::field::{max_abs_xi, FieldMeta};
use axivort::hill::{hill_speed, max_energy, seed_hill, seed_pair};
use axivort::io::{write_diag_csv, write_grid_csv, write_snapshot};
use axivort::varmax::{maximize, symmetric_difference, MaximizeProblem};
use axivort::{
    DiagRecord, Error, HalfPlanePoint, HillParams, KernelConfig, PairParams, Particle,
    ParticleField, Symmetry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, EinterConfig, KernelCheckConfig, MaximizeConfig, PairConfig, SingleHillConfig};
use crate::output::{config_hash, finish, manifest, Outcome, RunDir};
use crate::Common;

pub fn dispatch(name: &str, common: &Common) -> anyhow::Result<Outcome> {
    let run = RunDir::create(&common.out)?;
    let path = common.config.as_deref();
    match name {
        "kernel-check" => {
            let mut cfg: KernelCheckConfig = config::load(path)?;
            if common.quick {
                cfg.symmetry_pairs = cfg.symmetry_pairs.min(100);
                cfg.monotone_samples = cfg.monotone_samples.min(50);
                cfg.gradient_pairs = cfg.gradient_pairs.min(20);
                cfg.polar_nodes = cfg.polar_nodes.min(32);
            }
            kernel_check(&run, name, &cfg, common)
        }
        "single-hill" => {
            let mut cfg: SingleHillConfig = config::load(path)?;
            if common.quick {
                cfg = cfg.quick();
            }
            single_hill(&run, name, &cfg, common)
        }
        "pair" => {
            let mut cfg: PairConfig = config::load(path)?;
            if common.quick {
                cfg = cfg.quick();
            }
            pair(&run, name, &cfg, common)
        }
        "maximize" => {
            let mut cfg: MaximizeConfig = config::load(path)?;
            if common.quick {
                cfg = cfg.quick();
            }
            maximize_cmd(&run, name, &cfg, common)
        }
        "einter" => {
            let mut cfg: EinterConfig = config::load(path)?;
            if common.quick {
                cfg = cfg.quick();
            }
            einter(&run, name, &cfg, common)
        }
        other => bail!("unknown command {other}"),
    }
}

fn start(run: &RunDir, name: &str, cfg: &impl Serialize, common: &Common) -> anyhow::Result<String> {
    let m = manifest(name, cfg, common)?;
    run.write_json("manifest.json", &m)?;
    config_hash(&m["config"])
}

fn kernel_check(
    run: &RunDir,
    name: &str,
    cfg: &KernelCheckConfig,
    common: &Common,
) -> anyhow::Result<Outcome> {
    start(run, name, cfg, common)?;
    let checks = kernel_suite(cfg, common.seed);
    finish(run, name, checks, json!({}))
}

/// Runs the simulation, writing the diagnostics and snapshots. An aborted
/// run leaves a partial CSV and `error.json` behind.
fn simulate(
    run: &RunDir,
    f: &ParticleField,
    sim: &SimConfig,
    hash: &str,
) -> anyhow::Result<Option<RunOutput>> {
    match run_sim(f, sim) {
        Ok(out) => {
            write_diag_csv(run.file("diag.csv")?, &out.records)?;
            for (k, (t, snap)) in out.snapshots.iter().enumerate() {
                write_snapshot(&run.path("snapshots"), &format!("snap_{k:04}"), *t, snap, hash)?;
            }
            Ok(Some(out))
        }
        Err(Error::Aborted { t, records, source }) => {
            write_diag_csv(run.file("diag_partial.csv")?, &records)?;
            run.write_json(
                "error.json",
                &json!({ "error": source.to_string(), "t": t, "records": records.len() }),
            )?;
            eprintln!("run aborted at t={t}: {source}");
            Ok(None)
        }
        Err(e) => Err(e).context("starting the run"),
    }
}

fn aborted() -> Outcome {
    Outcome {
        checks: Vec::new(),
        aborted: true,
    }
}

fn rel_check(name: &str, got: f64, want: f64, tol: f64) -> Check {
    Check::at_most(name, ((got - want) / want).abs(), tol)
}

fn carried_check(records: &[DiagRecord], f0: &ParticleField, f1: &ParticleField) -> Check {
    let drift = max_drift(records, |r| r.mass_plus)
        .max(max_drift(records, |r| r.l2_plus))
        .max(((max_abs_xi(f1) - max_abs_xi(f0)) / max_abs_xi(f0)).abs());
    Check::at_most("carried_quantities_exact", drift, 0.0)
}

fn single_hill(
    run: &RunDir,
    name: &str,
    cfg: &SingleHillConfig,
    common: &Common,
) -> anyhow::Result<Outcome> {
    let hash = start(run, name, cfg, common)?;
    let hp = cfg.hill;
    let h = hp.a / cfg.n as f64;
    let w = hill_speed(&hp);
    let f0 = seed_hill(&hp, cfg.n)?;
    let sim = SimConfig {
        dt: cfg.dt.unwrap_or_else(|| default_dt(h, w)),
        t_end: cfg.t_end,
        kernel: cfg.kernel.clone().unwrap_or_else(|| KernelConfig::for_spacing(h, hp.a)),
        record_every: cfg.record_every,
        fit_shift: false,
        raster_factor: 4,
        snapshot_every: cfg.snapshot_every,
    };
    let Some(out) = simulate(run, &f0, &sim, &hash)? else {
        return Ok(aborted());
    };
    let zc_slope = slope(&out.records, |r| r.z_c);
    let checks = vec![
        rel_check("zc_slope", zc_slope, w, cfg.slope_tol),
        carried_check(&out.records, &f0, &out.field),
    ];
    finish(
        run,
        name,
        checks,
        json!({
            "particles": f0.len(),
            "dt": out.dt,
            "steps": out.steps,
            "speed": w,
            "slope_zc": zc_slope,
            "energy_drift": max_drift(&out.records, |r| r.e_total),
            "zc_max_residual": zc_residual(&out.records, w).max,
        }),
    )
}

/// The seeded pair with the configured departures applied.
fn perturbed_pair(cfg: &PairConfig, seed: u64) -> anyhow::Result<ParticleField> {
    let pp = PairParams::new(cfg.lam, cfg.a, cfg.d)?;
    let exact = seed_pair(&pp, cfg.n)?;
    let p = &cfg.perturbation;
    if p.is_exact() {
        return Ok(exact);
    }
    if !(p.lam_scale > 0.0 && p.dilation > 0.0 && p.z_jitter >= 0.0) {
        bail!("perturbation {p:?} must have positive scalings and a nonnegative jitter");
    }
    let h = cfg.a / cfg.n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (cfg.d - 2.0 * cfg.a, cfg.d + 2.0 * cfg.a);
    let mut parts = Vec::with_capacity(exact.len());
    for q in exact.particles() {
        let dz = if p.z_jitter > 0.0 {
            p.z_jitter * h * rng.gen_range(-1.0..1.0)
        } else {
            0.0
        };
        let pos = HalfPlanePoint::new(q.pos.r * p.dilation, q.pos.z + dz);
        if !(lo..=hi).contains(&pos.z) {
            bail!("perturbed particle at z={} leaves the band [{lo}, {hi}]", pos.z);
        }
        parts.push(Particle::new(pos, q.xi * p.lam_scale, q.vol * p.dilation * p.dilation));
    }
    Ok(ParticleField::new(parts, Symmetry::Odd, FieldMeta::seeded("pair-perturbed", h))?)
}

fn pair(run: &RunDir, name: &str, cfg: &PairConfig, common: &Common) -> anyhow::Result<Outcome> {
    let hash = start(run, name, cfg, common)?;
    let h = cfg.a / cfg.n as f64;
    let f0 = perturbed_pair(cfg, common.seed)?;
    let raster = h * cfg.raster_factor as f64;
    // the reference the fits use, and the distance an exact seed sits at
    let reference = FitReference::from_field(&f0, raster)?;
    let w = reference.lam * reference.a * reference.a * axivort::hill::W_H;
    let exact = seed_pair(&PairParams::new(cfg.lam, cfg.a, cfg.d)?, cfg.n)?;
    let floor = fit_shift(&exact, &FitReference::from_field(&exact, raster)?, None)?.dist.sum;
    let sim = SimConfig {
        dt: cfg.dt.unwrap_or_else(|| default_dt(h, w)),
        t_end: cfg.t_end,
        kernel: cfg.kernel.clone().unwrap_or_else(|| KernelConfig::for_spacing(h, cfg.a)),
        record_every: cfg.record_every,
        fit_shift: true,
        raster_factor: cfg.raster_factor,
        snapshot_every: cfg.snapshot_every,
    };
    let Some(out) = simulate(run, &f0, &sim, &hash)? else {
        return Ok(aborted());
    };
    let recs = &out.records;
    let tau_slope = slope(recs, |r| r.tau_fit);
    let shift = shift_residual(recs, w);
    let dist0 = recs[0].dist_fit;
    let worst_dist = recs.iter().fold(0.0f64, |m, r| m.max(r.dist_fit));
    let mut checks = vec![
        Check::at_most(
            "impulse_strictly_decreasing",
            non_decreasing_steps(recs, |r| r.impulse_plus) as f64,
            0.0,
        ),
        Check::at_most("energy_bookkeeping", bookkeeping_error(recs), cfg.bookkeeping_tol),
        Check::at_most("energy_drift", max_drift(recs, |r| r.e_total), cfg.drift_tol),
        carried_check(recs, &f0, &out.field),
    ];
    if cfg.perturbation.is_exact() {
        checks.push(Check::at_most("shift_residual_slope", shift.slope, 5.0 * floor));
    } else {
        checks.push(Check::at_most("dist_fit_bound", worst_dist, 2.0 * dist0 + floor));
        checks.push(rel_check("tau_slope", tau_slope, w, cfg.slope_tol));
    }
    finish(
        run,
        name,
        checks,
        json!({
            "particles": f0.len(),
            "dt": out.dt,
            "steps": out.steps,
            "reference": reference,
            "speed": w,
            "slope_zc": slope(recs, |r| r.z_c),
            "slope_tau": tau_slope,
            "max_residual": shift.max,
            "residual_slope": shift.slope,
            "zc_residual_slope": zc_residual(recs, w).slope,
            "floor": floor,
            "dist_fit_initial": dist0,
            "dist_fit_max": worst_dist,
        }),
    )
}

fn maximize_cmd(
    run: &RunDir,
    name: &str,
    cfg: &MaximizeConfig,
    common: &Common,
) -> anyhow::Result<Outcome> {
    start(run, name, cfg, common)?;
    let problem = MaximizeProblem {
        tol_e: cfg.tol_e,
        max_iter: cfg.max_iter,
        ..MaximizeProblem::with_default_grid(cfg.mu, cfg.nu, cfg.lam, cfg.h)
    };
    let res = maximize(&problem, &cfg.kernel)?;
    write_grid_csv(run.file("grid.csv")?, &res.field)?;
    let a = problem.predicted_radius();
    let target = max_energy(cfg.lam, cfg.mu);
    let g = &res.field;
    let ascent_violations = res.energies.windows(2).filter(|w| w[1] < w[0]).count();
    let off_patch = g.xi.iter().filter(|&&x| x != 0.0 && x != cfg.lam).count();
    let excess = (0.5 * g.impulse() / cfg.mu - 1.0).max(g.mass() / cfg.nu - 1.0);
    let sym_diff = symmetric_difference(g, cfg.lam, a);
    run.write_json(
        "maximize.json",
        &json!({
            "mu": cfg.mu, "nu": cfg.nu, "lam": cfg.lam,
            "alpha": res.alpha, "beta": res.beta,
            "E": res.energy, "iterations": res.iterations, "h": cfg.h,
        }),
    )?;
    let checks = vec![
        Check {
            pass: res.converged,
            ..Check::at_most("converged", f64::from(u8::from(!res.converged)), 0.0)
        },
        Check::at_most("energy_non_decreasing", ascent_violations as f64, 0.0),
        Check::at_most("patch_cells", off_patch as f64, 0.0),
        Check::at_most("constraint_excess", excess, 1e-10),
        Check::at_most("symmetric_difference", sym_diff, cfg.sym_diff_tol),
        rel_check("energy_vs_closed_form", res.energy, target, cfg.energy_tol),
    ];
    finish(
        run,
        name,
        checks,
        json!({
            "energy": res.energy,
            "closed_form": target,
            "predicted_radius": a,
            "equivalent_radius": res.equivalent_radius(cfg.lam),
            "energies": res.energies,
            "rejected_trial": res.rejected,
            "alpha": res.alpha,
            "beta": res.beta,
            "slacks": res.slacks,
            "shift": res.shift,
            "hill_consistent_nu": cfg.hill_consistent_nu(),
            "ball_area": 0.5 * PI * a * a,
        }),
    )
}

fn einter(run: &RunDir, name: &str, cfg: &EinterConfig, common: &Common) -> anyhow::Result<Outcome> {
    start(run, name, cfg, common)?;
    HillParams::new(cfg.lam, cfg.a, 0.0)?;
    let rows = einter_decay(&cfg.ds, cfg.lam, cfg.a, cfg.n, &cfg.kernel)?;
    {
        use std::io::Write;
        let mut w = run.file("einter.csv")?;
        writeln!(w, "# axivort-einter v1")?;
        writeln!(w, "d,E_inter,d_E_inter,d3_E_inter")?;
        for r in &rows {
            writeln!(w, "{:e},{:e},{:e},{:e}", r.d, r.e_inter, r.d_e_inter, r.d3_e_inter)?;
        }
        w.flush()?;
    }
    let checks = vec![Check::at_most(
        "d_einter_spread",
        spread(rows.iter().map(|r| r.d_e_inter)),
        cfg.spread_tol,
    )];
    finish(
        run,
        name,
        checks,
        json!({
            "rows": rows,
            "d3_einter_spread": spread(rows.iter().map(|r| r.d3_e_inter)),
        }),
    )
}
