//! Exact Gausson ground truth on `R^d`.
//!
//! Substituting `u = c·e^{-|x|²/2}` into `-Δu + λu = u log u²` forces
//! `c = e^{(d+λ)/2}`; everything else follows from Gaussian moments:
//!
//! - squared mass `M² = c²·π^{d/2}`,
//! - multiplier `λ = log(M²·π^{-d/2}) - d`,
//! - reduced energy `E = M²·(d + 1 - log(M²·π^{-d/2}))/2`,
//! - `∫|∇u|² = (d/2)·M²` (the dilation identity).
//!
//! The solver modules use these as the reference for the reduced problem
//! under the standing assumption that the Gausson is the reduced
//! minimizer; the gradient-flow cross-checks report if they ever find a
//! lower energy.

use num_complex::Complex64;

use crate::domain::{Field, GridSpec};
use crate::error::{Error, Result};

/// Relative boundary amplitude above which a sampled Gausson is rejected
/// (the box is too small for the requested offset).
pub const BOUNDARY_AMPLITUDE_LIMIT: f64 = 1e-12;

/// Parameters of one exact Gausson on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussonSpec {
    pub d: usize,
    /// Squared mass on `R^d`.
    pub theta_sq_red: f64,
    /// Lagrange multiplier.
    pub lambda: f64,
    /// Peak amplitude `c = e^{(d+λ)/2}`.
    pub amplitude: f64,
}

impl GaussonSpec {
    pub fn from_reduced_mass(d: usize, theta_sq_red: f64) -> Result<Self> {
        let lambda = lambda_of_mass(theta_sq_red, d)?;
        Ok(GaussonSpec {
            d,
            theta_sq_red,
            lambda,
            amplitude: ((d as f64 + lambda) / 2.0).exp(),
        })
    }

    pub fn energy(&self) -> f64 {
        gausson_energy(self.theta_sq_red, self.d).expect("validated mass")
    }
}

fn check_mass(theta_sq_red: f64) -> Result<()> {
    if !(theta_sq_red > 0.0) || !theta_sq_red.is_finite() {
        return Err(Error::InvalidParam(format!(
            "reduced squared mass must be positive, got {theta_sq_red}"
        )));
    }
    Ok(())
}

/// Multiplier of the Gausson with squared mass `theta_sq_red` on `R^d`.
pub fn lambda_of_mass(theta_sq_red: f64, d: usize) -> Result<f64> {
    check_mass(theta_sq_red)?;
    let df = d as f64;
    Ok((theta_sq_red * std::f64::consts::PI.powf(-df / 2.0)).ln() - df)
}

/// Reduced energy of the Gausson with squared mass `theta_sq_red` on
/// `R^d`: `E = M²(d + 1 - log(M² π^{-d/2}))/2 = (1-λ)M²/2`.
pub fn gausson_energy(theta_sq_red: f64, d: usize) -> Result<f64> {
    check_mass(theta_sq_red)?;
    let df = d as f64;
    let log_term = (theta_sq_red * std::f64::consts::PI.powf(-df / 2.0)).ln();
    Ok(0.5 * theta_sq_red * (df + 1.0 - log_term))
}

/// Samples the y-independent Gausson with waveguide squared mass `theta²`
/// (reduced mass `theta²/(2π)^n`), optionally translated along the box
/// axes by `shift`.
///
/// Fails when the box cannot hold the profile: the relative amplitude at
/// the boundary must stay below `1e-12`.
pub fn sample_gausson(grid: &GridSpec, theta: f64, shift: &[f64]) -> Result<Field> {
    grid.validate()?;
    if grid.d == 0 {
        return Err(Error::InvalidParam(
            "sample_gausson requires at least one box axis (d >= 1)".into(),
        ));
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidParam(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if shift.len() != grid.d {
        return Err(Error::InvalidParam(format!(
            "expected {} shift components, got {}",
            grid.d,
            shift.len()
        )));
    }
    // Worst-case distance from the peak to a box face.
    let mut worst = f64::INFINITY;
    for &s in shift {
        let dist = grid.half_width - s.abs();
        if dist <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "shift {s} exceeds box half width {}",
                grid.half_width
            )));
        }
        worst = worst.min(dist);
    }
    let edge_rel = (-worst * worst / 2.0).exp();
    if edge_rel > BOUNDARY_AMPLITUDE_LIMIT {
        return Err(Error::InvalidParam(format!(
            "box too small: relative boundary amplitude {edge_rel:.3e} exceeds {BOUNDARY_AMPLITUDE_LIMIT:.0e}"
        )));
    }

    let theta_sq_red = theta * theta / grid.torus_volume();
    let spec = GaussonSpec::from_reduced_mass(grid.d, theta_sq_red)?;
    let c = spec.amplitude;
    let d = grid.d;
    let shift = shift.to_vec();
    Ok(Field::from_fn(*grid, move |coords| {
        let mut r2 = 0.0;
        for a in 0..d {
            let dx = coords[a] - shift[a];
            r2 += dx * dx;
        }
        Complex64::new(c * (-r2 / 2.0).exp(), 0.0)
    }))
}
