pub mod bounds_cmd;
pub mod evolve_cmd;
pub mod groundstate;
pub mod mu_scan;
pub mod oracle_cmd;
pub mod verify;

use std::path::Path;

use logns::domain::GridSpec;
use logns::energy::{RegularizationParams, SplitParams};
use logns::gradflow::{FlowConfig, FlowInit};

use crate::config::RunConfig;
use crate::CliError;

/// Domain block shared by the experiment commands.
pub fn grid_from(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    let d = cfg.usize("d")?;
    let n = cfg.usize("n")?;
    let points_x = if d > 0 {
        cfg.usize("points_x")?
    } else {
        cfg.usize_or("points_x", 0)?
    };
    let points_y = if n > 0 {
        cfg.usize("points_y")?
    } else {
        cfg.usize_or("points_y", 0)?
    };
    let half_width = cfg.f64_or("half_width", 12.0)?;
    GridSpec::new(d, n, points_x, points_y, half_width).map_err(CliError::from)
}

/// Flow block: tolerances, steps, regularization, and the initial iterate.
pub fn flow_from(cfg: &RunConfig, theta: f64, mu: f64, seed: u64) -> Result<FlowConfig, CliError> {
    let mut flow = FlowConfig::new(theta, mu);
    flow.tol = cfg.f64_or("tol", flow.tol)?;
    flow.dt0 = cfg.f64_or("dt0", flow.dt0)?;
    flow.dt_min = cfg.f64_or("dt_min", flow.dt_min)?;
    flow.max_steps = cfg.usize_or("max_steps", flow.max_steps)?;
    flow.reg = RegularizationParams::new(cfg.f64_or("eps_sat", 0.0)?)?;
    flow.split = SplitParams::new(cfg.f64_or("split_delta", 0.05)?)?;
    flow.init = match cfg.opt_str("init").as_deref() {
        None | Some("gausson") => FlowInit::Gausson,
        Some("random") => FlowInit::RandomBandlimited { seed, max_mode: 4 },
        Some("gausson-tent") => {
            let a = cfg.f64_or("tent_a", std::f64::consts::PI - 1.0)?;
            let eps = cfg.f64_or("tent_eps", 1e-2)?;
            FlowInit::GaussonTent(logns::bounds::TentParams::new(a, eps)?)
        }
        Some(other) => {
            if let Some(path) = other.strip_prefix("file:") {
                FlowInit::File(path.into())
            } else {
                return Err(CliError::validation(format!(
                    "init must be gausson, gausson-tent, random, or file:PATH, got {other:?}"
                )));
            }
        }
    };
    flow.validate()?;
    Ok(flow)
}

pub fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io)
}
