use std::path::Path;

use logns::csv::{self, Value};
use logns::oracle::GaussonSpec;

use crate::config::{resolve_out_dir, RunConfig};
use crate::manifest::{mark_failed, Manifest};
use crate::CliError;

pub fn run(config_path: &Path, out_flag: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let d = cfg.usize_or("d", 1)?;
    let theta_sq_red = cfg.f64("theta_sq_red")?;
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;

    let mut manifest = Manifest::start("oracle", cfg.echo());
    let body = || -> Result<GaussonSpec, CliError> {
        let spec = GaussonSpec::from_reduced_mass(d, theta_sq_red)?;
        csv::write(
            &out_dir.join("oracle.csv"),
            &["d", "theta_sq_red", "lambda", "energy", "amplitude"],
            &[vec![
                Value::Int(d as i64),
                Value::Float(theta_sq_red),
                Value::Float(spec.lambda),
                Value::Float(spec.energy()),
                Value::Float(spec.amplitude),
            ]],
        )?;
        println!(
            "gausson on R^{d}: mass² = {theta_sq_red}, lambda = {}, energy = {}, amplitude = {}",
            spec.lambda,
            spec.energy(),
            spec.amplitude
        );
        Ok(spec)
    };

    match body() {
        Ok(spec) => {
            manifest.push_f64("lambda", spec.lambda);
            manifest.push_f64("energy", spec.energy());
            manifest.push_f64("amplitude", spec.amplitude);
            manifest.write(&out_dir)?;
            Ok(())
        }
        Err(e) => {
            mark_failed(&out_dir, &e);
            Err(e)
        }
    }
}
