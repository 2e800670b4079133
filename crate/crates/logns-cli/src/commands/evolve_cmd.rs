use std::path::Path;

use logns::csv::{self, Value};
use logns::domain::make_workspace;
use logns::energy::RegularizationParams;
use logns::evolve::{self, EvolveConfig};
use logns::oracle;

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
    let seed = seed_flag.unwrap_or(cfg.u64_or("seed", 0)?);
    let dt = cfg.f64("dt")?;
    let steps = cfg.usize("steps")?;
    let record_every = cfg.usize_or("record_every", 1.max(steps / 200))?;
    let eps_sat = cfg.f64_or("eps_sat", 0.0)?;
    let lambda_sign = cfg.f64_or("lambda_sign", 1.0)?;
    let delta_pert = cfg.f64_or("delta_pert", 0.0)?;
    let init = cfg.opt_str("init");
    let theta_sq = if matches!(init.as_deref(), None | Some("gausson")) {
        Some(cfg.theta_sq()?)
    } else {
        None
    };
    let snapshot_out = cfg.opt_str("snapshot_out");
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;

    let mut config = EvolveConfig::new(dt, steps);
    config.reg = RegularizationParams::new(eps_sat)?;
    config.lambda_sign = lambda_sign;
    config.record_every = record_every;
    config.validate()?;

    let mut manifest = Manifest::start("evolve", cfg.echo());
    let body = || -> Result<_, CliError> {
        let ws = make_workspace(&grid)?;
        let u0 = match init.as_deref() {
            None | Some("gausson") => {
                let theta_sq = theta_sq.expect("checked above");
                oracle::sample_gausson(&grid, theta_sq.sqrt(), &vec![0.0; grid.d])?
            }
            Some(other) => {
                if let Some(path) = other.strip_prefix("file:") {
                    let f = logns::snapshot::read_field_snapshot(Path::new(path))?;
                    if f.grid() != &grid {
                        return Err(CliError::validation(
                            "snapshot grid does not match the configured grid".into(),
                        ));
                    }
                    f
                } else {
                    return Err(CliError::validation(format!(
                        "init must be gausson or file:PATH, got {other:?}"
                    )));
                }
            }
        };
        if config.underresolved(&ws) {
            eprintln!(
                "logns: warning: dt·max|k|² > π/4; the fastest retained mode is underresolved"
            );
        }
        let samples = evolve::stability_experiment(&ws, &u0, delta_pert, seed, &config)?;
        let rows: Vec<Vec<Value>> = samples
            .iter()
            .map(|s| {
                vec![
                    Value::Float(s.t),
                    Value::Float(s.mass),
                    Value::Float(s.energy_total),
                    Value::Float(s.orbital_distance),
                    Value::Float(s.boundary_mass),
                ]
            })
            .collect();
        csv::write(
            &out_dir.join("trajectory.csv"),
            &["t", "mass", "energy", "orbdist", "boundary_mass"],
            &rows,
        )?;
        if let Some(name) = &snapshot_out {
            // Final state: re-run the last chunk is wasteful; instead evolve
            // a fresh copy when a snapshot is requested.
            let mut psi = u0.clone();
            evolve::evolve_n(&ws, &mut psi, &config, steps)?;
            logns::snapshot::write_field_snapshot(&psi, &out_dir.join(name))?;
        }
        Ok(samples)
    };

    match body() {
        Ok(samples) => {
            let first = samples.first().expect("at least the initial sample");
            let last = samples.last().expect("at least the initial sample");
            let max_dist = samples
                .iter()
                .map(|s| s.orbital_distance)
                .fold(0.0f64, f64::max);
            manifest.push_f64("mass_initial", first.mass);
            manifest.push_f64("mass_final", last.mass);
            manifest.push_f64(
                "mass_drift_rel",
                (last.mass - first.mass).abs() / first.mass.max(1e-300),
            );
            manifest.push_f64("energy_initial", first.energy_total);
            manifest.push_f64("energy_final", last.energy_total);
            manifest.push_f64("max_orbital_distance", max_dist);
            manifest.write(&out_dir)?;
            println!(
                "evolve: t = {:.6}, mass drift = {:.3e}, max orbital distance = {:.3e}",
                last.t,
                (last.mass - first.mass).abs() / first.mass.max(1e-300),
                max_dist
            );
            Ok(())
        }
        Err(e) => {
            mark_failed(&out_dir, &e);
            Err(e)
        }
    }
}
