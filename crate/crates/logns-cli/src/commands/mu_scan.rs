use std::path::Path;

use logns::csv::{self, Value};
use logns::depscan::{self, Classification, MuScanConfig};
use logns::domain::make_workspace;

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
    let seed = seed_flag.unwrap_or(cfg.u64_or("seed", 0)?);
    let mu_min = cfg.f64_or("mu_min", 1e-2)?;
    let mu_max = cfg.f64_or("mu_max", 1e3)?;
    let mu_count = cfg.usize_or("mu_count", 13)?;
    let warm_start = cfg.bool_or("warm_start", true)?;
    let flow = super::flow_from(&cfg, theta_sq.sqrt(), 1.0, seed)?;
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;

    let mut scan_cfg = MuScanConfig::new(
        theta_sq.sqrt(),
        MuScanConfig::log_spaced(mu_min, mu_max, mu_count)?,
    );
    scan_cfg.warm_start = warm_start;
    scan_cfg.flow = flow;
    scan_cfg.seed = seed;

    let mut manifest = Manifest::start("mu-scan", cfg.echo());
    let body = || -> Result<_, CliError> {
        let ws = make_workspace(&grid)?;
        let (rows, reference) = depscan::scan(&scan_cfg, &ws)?;
        let csv_rows: Vec<Vec<Value>> = rows
            .iter()
            .map(|r| {
                vec![
                    Value::Float(r.mu),
                    Value::Float(r.m),
                    Value::Float(r.kx),
                    Value::Float(r.ky),
                    Value::Float(r.mu_ky),
                    Value::Float(r.lambda),
                    Value::Float(r.gap),
                    Value::Bool(r.ydep),
                    Value::Bool(r.converged),
                ]
            })
            .collect();
        csv::write(
            &out_dir.join("mu_scan.csv"),
            &[
                "mu",
                "m",
                "Kx",
                "Ky",
                "muKy",
                "lambda",
                "gap",
                "ydep",
                "converged",
            ],
            &csv_rows,
        )?;
        let report = depscan::classify(&rows, reference.closed_form)?;
        Ok((rows, reference, report))
    };

    match body() {
        Ok((rows, reference, report)) => {
            manifest.push_f64("reduced_ref", reference.closed_form);
            manifest.push_f64("reduced_ref_solver", reference.solver_value);
            manifest.push_bool("reduced_ref_agree", reference.agree);
            manifest.push_bool("monotone", report.monotone);
            match report.case {
                Classification::Case1 => manifest.push("case", "1".into()),
                Classification::Case2 { mu_star } => {
                    manifest.push("case", "2".into());
                    manifest.push_f64("mu_star", mu_star);
                }
            }
            let all_converged = rows.iter().all(|r| r.converged);
            manifest.push_bool("all_converged", all_converged);
            manifest.write(&out_dir)?;
            println!(
                "mu-scan: {} points, case {:?}, monotone = {}",
                rows.len(),
                report.case,
                report.monotone
            );
            if all_converged {
                Ok(())
            } else {
                Err(CliError::NonConvergence(
                    "one or more sweep points did not converge".into(),
                ))
            }
        }
        Err(e) => {
            mark_failed(&out_dir, &e);
            Err(e)
        }
    }
}
