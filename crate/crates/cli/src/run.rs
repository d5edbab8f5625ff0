//! Subcommand runners: compute tables from a config and emit them.

use anyhow::{Context, Result};
use rayon::prelude::*;
use tripod_vortex::beam::initial_fields;
use tripod_vortex::polarization::{ellipticity_sweep, fields_at_z, texture_map};
use tripod_vortex::propagation::propagate_analytic;
use tripod_vortex::response::{response_map, susceptibility_general, ResponseSettings};

use crate::config::ScenarioConfig;
use crate::output::{flag, num, RunReport, RunWriter, Table};

const RESPONSE_HEADER: [&str; 9] = [
    "phi",
    "delta",
    "im_chi_r",
    "re_chi_r",
    "im_chi_l",
    "re_chi_l",
    "valid_r",
    "valid_l",
    "config_hash",
];

const PROPAGATION_HEADER: [&str; 11] = [
    "x",
    "y",
    "z",
    "omega_r_sq",
    "omega_l_sq",
    "total",
    "im_chi_r",
    "im_chi_l",
    "valid_r",
    "valid_l",
    "config_hash",
];

const TEXTURE_HEADER: [&str; 14] = [
    "x",
    "y",
    "z",
    "s0",
    "s1",
    "s2",
    "s3",
    "intensity",
    "kappa",
    "xi",
    "class",
    "glyph",
    "theta",
    "config_hash",
];

const SWEEP_HEADER: [&str; 4] = ["zeta_z", "delta", "avg_kappa", "config_hash"];

/// `"_theta{i}"` when several mixing angles are run, empty otherwise.
fn theta_tag(cfg: &ScenarioConfig, i: usize) -> String {
    if cfg.thetas.len() > 1 {
        format!("_theta{i}")
    } else {
        String::new()
    }
}

fn z_width(cfg: &ScenarioConfig) -> usize {
    cfg.z_list.len().saturating_sub(1).to_string().len().max(2)
}

pub fn run_response_map(cfg: &ScenarioConfig) -> Result<RunReport> {
    let hash = cfg.hash();
    let mut out = RunWriter::new(cfg, "response-map")?;
    let phis = cfg.phi_list.values();
    let deltas = cfg.delta_list.values();
    let settings = ResponseSettings {
        r: cfg.r_eval,
        z: cfg.z_eval,
        parity: cfg.sign_parity,
    };
    for (i, &theta) in cfg.thetas.iter().enumerate() {
        let rows = response_map(&phis, &deltas, &cfg.scenario(theta), &settings)
            .with_context(|| format!("response map at theta = {theta}"))?;
        let mut table = Table::new(&RESPONSE_HEADER);
        table.rows = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.phi),
                    num(r.delta),
                    num(r.chi.chi_r.im),
                    num(r.chi.chi_r.re),
                    num(r.chi.chi_l.im),
                    num(r.chi.chi_l.re),
                    flag(r.chi.valid_r),
                    flag(r.chi.valid_l),
                    hash.clone(),
                ]
            })
            .collect();
        let name = format!("{}_response_map{}.csv", cfg.prefix(), theta_tag(cfg, i));
        out.write(name, &table, "response-map", Some(theta), None)?;
    }
    out.finish()
}

pub fn run_propagation(cfg: &ScenarioConfig) -> Result<RunReport> {
    let hash = cfg.hash();
    let mut out = RunWriter::new(cfg, "propagate")?;
    let points = cfg.grid.build()?.points();
    let width = z_width(cfg);
    for (i, &theta) in cfg.thetas.iter().enumerate() {
        let scenario = cfg.scenario(theta);
        let response = scenario.response(cfg.drive.delta)?;
        let floor = scenario.field_floor();
        for (k, &z) in cfg.z_list.iter().enumerate() {
            let rows: Result<Vec<Vec<String>>> = points
                .par_iter()
                .map(|p| {
                    let f0 = initial_fields(p.r, p.phi, &scenario.beam)?;
                    let f = propagate_analytic(&f0, response.q, theta, z);
                    let chi = susceptibility_general(&f, response.q_hat(), theta, floor)
                        .with_parity(cfg.sign_parity);
                    let (ir, il) = (f.omega_r.norm_sqr(), f.omega_l.norm_sqr());
                    Ok(vec![
                        num(p.x),
                        num(p.y),
                        num(z),
                        num(ir),
                        num(il),
                        num(ir + il),
                        num(chi.chi_r.im),
                        num(chi.chi_l.im),
                        flag(chi.valid_r),
                        flag(chi.valid_l),
                        hash.clone(),
                    ])
                })
                .collect();
            let mut table = Table::new(&PROPAGATION_HEADER);
            table.rows = rows?;
            let name = format!(
                "{}_propagate{}_z{:0width$}.csv",
                cfg.prefix(),
                theta_tag(cfg, i),
                k
            );
            out.write(name, &table, "propagate", Some(theta), Some(z))?;
        }
    }
    out.finish()
}

fn write_textures(cfg: &ScenarioConfig, out: &mut RunWriter<'_>, hash: &str) -> Result<()> {
    let grid = cfg.grid.build()?;
    let width = z_width(cfg);
    for (i, &theta) in cfg.thetas.iter().enumerate() {
        let tables = texture_map(
            &grid,
            &cfg.scenario(theta),
            cfg.drive.delta,
            &cfg.z_list,
            cfg.decimation,
        )?;
        for (k, t) in tables.iter().enumerate() {
            let mut table = Table::new(&TEXTURE_HEADER);
            table.rows = t
                .rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.point.x),
                        num(r.point.y),
                        num(t.z),
                        num(r.stokes.s0),
                        num(r.stokes.s1),
                        num(r.stokes.s2),
                        num(r.stokes.s3),
                        num(r.intensity),
                        num(r.state.kappa),
                        num(r.state.xi),
                        r.state.class.to_string(),
                        flag(r.glyph),
                        num(theta),
                        hash.to_string(),
                    ]
                })
                .collect();
            let name = format!(
                "{}_texture{}_z{:0width$}.csv",
                cfg.prefix(),
                theta_tag(cfg, i),
                k
            );
            out.write(name, &table, "texture", Some(theta), Some(t.z))?;
        }
    }
    Ok(())
}

fn write_sweeps(cfg: &ScenarioConfig, out: &mut RunWriter<'_>, hash: &str) -> Result<()> {
    let sweep = cfg.sweep.as_ref().context("config has no sweep section")?;
    let grid = sweep.grid.as_ref().unwrap_or(&cfg.grid).build()?;
    let zs = sweep.z.values();
    let deltas = sweep.delta.values();
    for (i, &theta) in cfg.thetas.iter().enumerate() {
        let rows = ellipticity_sweep(&grid, &cfg.scenario(theta), &zs, &deltas)
            .with_context(|| format!("ellipticity sweep at theta = {theta}"))?;
        let mut table = Table::new(&SWEEP_HEADER);
        table.rows = rows
            .iter()
            .map(|r| vec![num(r.z), num(r.delta), num(r.avg_kappa), hash.to_string()])
            .collect();
        let name = format!("{}_sweep{}.csv", cfg.prefix(), theta_tag(cfg, i));
        out.write(name, &table, "sweep", Some(theta), None)?;
    }
    Ok(())
}

/// Texture tables for every depth, plus the sweep when the config has one.
pub fn run_polarization(cfg: &ScenarioConfig) -> Result<RunReport> {
    let hash = cfg.hash();
    let mut out = RunWriter::new(cfg, "polarization")?;
    write_textures(cfg, &mut out, &hash)?;
    if cfg.sweep.is_some() {
        write_sweeps(cfg, &mut out, &hash)?;
    }
    out.finish()
}

pub fn run_ellipticity_sweep(cfg: &ScenarioConfig) -> Result<RunReport> {
    let hash = cfg.hash();
    let mut out = RunWriter::new(cfg, "ellipticity-sweep")?;
    write_sweeps(cfg, &mut out, &hash)?;
    out.finish()
}

/// Stokes defect over every grid point, depth and mixing angle of `cfg`.
pub fn max_stokes_defect(cfg: &ScenarioConfig) -> Result<f64> {
    let points = cfg.grid.build()?.points();
    let mut worst = 0.0f64;
    for &theta in &cfg.thetas {
        let scenario = cfg.scenario(theta);
        let q = scenario.response(cfg.drive.delta)?.q;
        for &z in &cfg.z_list {
            let local = points
                .par_iter()
                .map(|p| {
                    let f = fields_at_z(p.r, p.phi, &scenario.beam, theta, q, z)?;
                    Ok(tripod_vortex::polarization::stokes(f.omega_r, f.omega_l)
                        .polarization_defect())
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(local);
        }
    }
    Ok(worst)
}

/// All runners appropriate for a preset, in a fixed order.
pub fn run_all(cfg: &ScenarioConfig) -> Result<Vec<RunReport>> {
    let mut reports = vec![run_response_map(cfg)?, run_propagation(cfg)?];
    reports.push(run_polarization(cfg)?);
    Ok(reports)
}
