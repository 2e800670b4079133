use std::path::Path;

use logns::csv::{self, Value};
use logns::domain::make_workspace;
use logns::gradflow;

use crate::config::{resolve_out_dir, RunConfig};
use crate::manifest::{mark_failed, Manifest};
use crate::CliError;

pub fn run(
    config_path: &Path,
    out_flag: Option<&Path>,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let grid = super::grid_from(&cfg)?;
    let theta_sq = cfg.theta_sq()?;
    let mu = cfg.f64_or("mu", 1.0)?;
    let seed = seed_flag.unwrap_or(cfg.u64_or("seed", 0)?);
    if mu < 0.0 {
        return Err(CliError::validation(format!("mu must be >= 0, got {mu}")));
    }
    let restarts = cfg.usize_or("restarts", 4)?;
    let snapshot_out = cfg.opt_str("snapshot_out");
    let flow = super::flow_from(&cfg, theta_sq.sqrt(), mu, seed)?;
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;

    let mut manifest = Manifest::start("groundstate", cfg.echo());
    let body = || -> Result<(bool, Vec<(String, f64)>), CliError> {
        let ws = make_workspace(&grid)?;
        let result = gradflow::minimize_multistart(&flow, &ws, restarts, seed)?;
        let (kx, ky) = ws.kinetic_split(&result.field);
        let pohozaev = gradflow::pohozaev_residual(&ws, &result.field, flow.theta);

        csv::write(
            &out_dir.join("groundstate.csv"),
            &[
                "m",
                "Kx",
                "Ky",
                "lambda_rayleigh",
                "lambda_energy",
                "residual",
                "pohozaev",
                "boundary_mass",
                "steps",
                "converged",
            ],
            &[vec![
                Value::Float(result.energy.total),
                Value::Float(kx),
                Value::Float(ky),
                Value::Float(result.lambda_rayleigh),
                Value::Float(result.lambda_energy),
                Value::Float(result.residual),
                Value::Float(pohozaev),
                Value::Float(result.boundary_mass),
                Value::Int(result.steps as i64),
                Value::Bool(result.converged),
            ]],
        )?;

        let trace_rows: Vec<Vec<Value>> = result
            .energy_trace
            .iter()
            .enumerate()
            .map(|(i, e)| vec![Value::Int(i as i64), Value::Float(*e)])
            .collect();
        csv::write(
            &out_dir.join("energy_trace.csv"),
            &["step", "energy"],
            &trace_rows,
        )?;

        if let Some(name) = &snapshot_out {
            logns::snapshot::write_field_snapshot(&result.field, &out_dir.join(name))?;
        }

        println!(
            "groundstate: m = {:.12e}, residual = {:.3e}, converged = {}",
            result.energy.total, result.residual, result.converged
        );
        Ok((
            result.converged,
            vec![
                ("m".into(), result.energy.total),
                ("Kx".into(), kx),
                ("Ky".into(), ky),
                ("lambda_rayleigh".into(), result.lambda_rayleigh),
                ("lambda_energy".into(), result.lambda_energy),
                ("residual".into(), result.residual),
                ("pohozaev".into(), pohozaev),
                ("boundary_mass".into(), result.boundary_mass),
            ],
        ))
    };

    match body() {
        Ok((converged, summary)) => {
            for (k, v) in summary {
                manifest.push_f64(&k, v);
            }
            manifest.push_bool("converged", converged);
            manifest.write(&out_dir)?;
            if converged {
                Ok(())
            } else {
                Err(CliError::NonConvergence(
                    "gradient flow exhausted its budget before reaching tolerance".into(),
                ))
            }
        }
        Err(e) => {
            mark_failed(&out_dir, &e);
            Err(e)
        }
    }
}
