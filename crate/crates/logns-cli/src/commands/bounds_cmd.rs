use std::path::Path;

use logns::bounds::{self, EigenBoxParams};
use logns::csv::{self, Value};

use crate::config::{resolve_out_dir, RunConfig};
use crate::manifest::{mark_failed, Manifest};
use crate::CliError;

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

pub fn run(config_path: &Path, out_flag: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let theta_sq = cfg.theta_sq()?;
    let d = cfg.usize_or("d", 1)?;
    let n = cfg.usize_or("n", 1)?;
    let pi = std::f64::consts::PI;
    let a_min = cfg.f64_or("a_min", 0.4)?;
    let a_max = cfg.f64_or("a_max", pi - 0.05)?;
    let a_count = cfg.usize_or("a_count", 12)?;
    let eps_moll = cfg.f64_or("eps_moll", 1e-3)?;
    let ell = cfg.f64_or("ell", 1.0)?;
    let r_min = cfg.f64_or("r_min", 0.5)?;
    let r_max = cfg.f64_or("r_max", 12.0)?;
    let r_count = cfg.usize_or("r_count", 12)?;
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;
    if !(a_min > 0.0 && a_max < pi && a_min < a_max) {
        return Err(CliError::validation(format!(
            "need 0 < a_min < a_max < π, got [{a_min}, {a_max}]"
        )));
    }

    let mut manifest = Manifest::start("bounds", cfg.echo());
    let theta = theta_sq.sqrt();
    let body = || -> Result<_, CliError> {
        let a_grid = linspace(a_min, a_max, a_count);
        let tent_rows = bounds::upper_bound_i0(theta, &a_grid, eps_moll, d, n)?;
        let rows: Vec<Vec<Value>> = tent_rows
            .iter()
            .map(|r| {
                vec![
                    Value::Float(r.a),
                    Value::Float(r.i0_psi),
                    Value::Float(r.reduced_ref),
                    Value::Bool(r.strict),
                    Value::Float(r.correction),
                    Value::Float(r.factored),
                ]
            })
            .collect();
        csv::write(
            &out_dir.join("tent_bound.csv"),
            &["a", "I0", "reduced_ref", "strict", "correction", "factored"],
            &rows,
        )?;

        let eig = EigenBoxParams::new(ell, theta, d, n)?;
        let r_grid = linspace(r_min, r_max, r_count);
        let eig_rows = bounds::eigen_testfield_scan(&eig, &r_grid)?;
        let rows: Vec<Vec<Value>> = eig_rows
            .iter()
            .map(|r| {
                vec![
                    Value::Float(r.r),
                    Value::Float(r.energy),
                    Value::Bool(r.negative),
                    Value::Float(r.window_low_printed),
                    Value::Float(r.window_low_rederived),
                    Value::Float(r.window_high),
                    Value::Bool(r.in_window_printed),
                    Value::Bool(r.in_window_rederived),
                ]
            })
            .collect();
        csv::write(
            &out_dir.join("eigen_scan.csv"),
            &[
                "r",
                "energy",
                "negative",
                "window_low_printed",
                "window_low_rederived",
                "window_high",
                "in_window_printed",
                "in_window_rederived",
            ],
            &rows,
        )?;
        Ok((tent_rows, eig_rows))
    };

    match body() {
        Ok((tent_rows, eig_rows)) => {
            let strict = tent_rows.iter().filter(|r| r.strict).count();
            manifest.push("tent_rows", tent_rows.len().to_string());
            manifest.push("tent_strict_rows", strict.to_string());
            manifest.push("eigen_rows", eig_rows.len().to_string());
            manifest.push(
                "eigen_negative_in_window",
                eig_rows
                    .iter()
                    .filter(|r| r.in_window_rederived && r.negative)
                    .count()
                    .to_string(),
            );
            manifest.write(&out_dir)?;
            println!(
                "bounds: {} tent rows ({} strict), {} eigen rows",
                tent_rows.len(),
                strict,
                eig_rows.len()
            );
            Ok(())
        }
        Err(e) => {
            mark_failed(&out_dir, &e);
            Err(e)
        }
    }
}
