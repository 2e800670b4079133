//! Property suites for identities that are checkable by direct
//! computation: the splitting-lemma surrogate for weak limits, strict
//! subadditivity of the ground-state energy, the amplitude-scaling
//! identity, and empirical interpolation-inequality constants.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Field, GridSpec, SpectralWorkspace};
use crate::energy::{self, entropy, RegularizationParams};
use crate::error::{Error, Result};
use crate::gradflow::{self, FlowConfig, FlowInit};
use crate::oracle;

/// Reproducible field ensembles for the sweeps.
#[derive(Debug, Clone)]
pub struct SampleEnsemble {
    pub seed: u64,
    pub count: usize,
    pub generator: FieldGenerator,
}

#[derive(Debug, Clone)]
pub enum FieldGenerator {
    /// Real part of a random band-limited field.
    BandLimited { max_mode: usize },
    /// Sum of a few randomly placed unit-width Gaussian bumps.
    GaussonMixture { components: usize },
}

impl SampleEnsemble {
    pub fn generate(&self, grid: &GridSpec) -> Vec<Field> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| match &self.generator {
                FieldGenerator::BandLimited { max_mode } => {
                    let sub: u64 = rng.gen();
                    gradflow::random_bandlimited_modulus(grid, sub, *max_mode)
                }
                FieldGenerator::GaussonMixture { components } => {
                    let mut centers = Vec::new();
                    for _ in 0..*components {
                        let mut c = Vec::new();
                        for a in 0..grid.rank() {
                            if grid.is_x_axis(a) {
                                c.push(rng.gen_range(-0.5..0.5) * grid.half_width);
                            } else {
                                c.push(rng.gen_range(0.0..crate::domain::TORUS_PERIOD));
                            }
                        }
                        let amp: f64 = rng.gen_range(0.2..2.0);
                        centers.push((c, amp));
                    }
                    let g = *grid;
                    Field::from_fn(g, move |coords| {
                        let mut acc = 0.0;
                        for (c, amp) in &centers {
                            let mut r2 = 0.0;
                            for (a, (&x, &x0)) in coords.iter().zip(c.iter()).enumerate() {
                                let mut dx = x - x0;
                                if !g.is_x_axis(a) {
                                    // nearest periodic image
                                    dx = dx.rem_euclid(crate::domain::TORUS_PERIOD);
                                    if dx > std::f64::consts::PI {
                                        dx -= crate::domain::TORUS_PERIOD;
                                    }
                                }
                                r2 += dx * dx;
                            }
                            acc += amp * (-r2 / 2.0).exp();
                        }
                        Complex64::new(acc, 0.0)
                    })
                }
            })
            .collect()
    }
}

/// Residual of the entropy splitting along a separating bump:
/// with `u_n = u + v(·-z)`, returns
/// `|∫(u_n² log u_n² - v_z² log v_z²) - ∫u² log u²|`.
/// Decays with the separation for localized profiles.
pub fn brezis_lieb_residual(
    ws: &SpectralWorkspace,
    u: &Field,
    v: &Field,
    shift_cells: &[isize],
) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch(
            "splitting residual needs one shared grid".into(),
        ));
    }
    let reg = RegularizationParams::exact();
    let v_shifted = v.shifted(shift_cells);
    let mut sum = u.clone();
    sum.axpy(1.0, &v_shifted);
    let e_sum = entropy(ws, &sum, &reg);
    let e_shift = entropy(ws, &v_shifted, &reg);
    let e_u = entropy(ws, u, &reg);
    Ok((e_sum - e_shift - e_u).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct SubadditivityReport {
    pub theta1: f64,
    pub theta2: f64,
    pub m1: f64,
    pub m2: f64,
    /// `m1 - (theta1²/theta2²)·m2`; strictly positive for exact minima.
    pub margin: f64,
    pub converged: bool,
}

/// Closed-form margin for the reduced problem: substituting the Gausson
/// energies gives exactly `theta1²·log(theta2²/theta1²)/2`.
pub fn subadditivity_margin_reduced(
    theta1_sq_red: f64,
    theta2_sq_red: f64,
    d: usize,
) -> Result<(f64, f64)> {
    if !(theta1_sq_red > 0.0 && theta2_sq_red > theta1_sq_red) {
        return Err(Error::InvalidParam("need 0 < theta1² < theta2²".into()));
    }
    let m1 = oracle::gausson_energy(theta1_sq_red, d)?;
    let m2 = oracle::gausson_energy(theta2_sq_red, d)?;
    let direct = m1 - theta1_sq_red / theta2_sq_red * m2;
    let formula = 0.5 * theta1_sq_red * (theta2_sq_red / theta1_sq_red).ln();
    Ok((direct, formula))
}

/// Measures the margin on the waveguide with the gradient-flow solver at
/// the given anisotropy weight.
pub fn subadditivity_check(
    theta1: f64,
    theta2: f64,
    mu: f64,
    ws: &SpectralWorkspace,
    flow: &FlowConfig,
    restarts: usize,
    seed: u64,
) -> Result<SubadditivityReport> {
    if !(theta1 > 0.0 && theta2 > theta1) {
        return Err(Error::InvalidParam("need 0 < theta1 < theta2".into()));
    }
    let solve = |theta: f64, seed: u64| -> Result<(f64, bool)> {
        let mut c = flow.clone();
        c.theta = theta;
        c.mu = mu;
        c.init = FlowInit::RandomBandlimited { seed, max_mode: 4 };
        let r = gradflow::minimize_multistart(&c, ws, restarts, seed)?;
        Ok((r.energy.total, r.converged))
    };
    let (m1, c1) = solve(theta1, seed)?;
    let (m2, c2) = solve(theta2, seed ^ 0xabcdef)?;
    Ok(SubadditivityReport {
        theta1,
        theta2,
        m1,
        m2,
        margin: m1 - theta1 * theta1 / (theta2 * theta2) * m2,
        converged: c1 && c2,
    })
}

/// Max deviation of the amplitude-scaling identity
/// `E(ξu) = ξ²E(u) - ξ²·log ξ·mass(u)` (exact logarithm) over the given
/// amplitudes.
pub fn scaling_identity_check(ws: &SpectralWorkspace, u: &Field, xis: &[f64]) -> f64 {
    let e = energy::total_energy(ws, u, 1.0);
    let m = ws.mass(u);
    let mut worst = 0.0f64;
    for &xi in xis {
        let mut v = u.clone();
        v.scale(xi);
        let ev = energy::total_energy(ws, &v, 1.0);
        let expect = xi * xi * e - xi * xi * xi.ln() * m;
        worst = worst.max((ev - expect).abs());
    }
    worst
}

#[derive(Debug, Clone)]
pub struct GnSweepReport {
    pub max_ratio: f64,
    /// `(field index, ratio)` rows.
    pub rows: Vec<(usize, f64)>,
}

/// Interpolation-inequality ratio over an ensemble; the max is the
/// empirical constant for the grid's `(d, n, alpha)`.
pub fn gn_sweep(
    ws: &SpectralWorkspace,
    ensemble: &SampleEnsemble,
    alpha: f64,
) -> Result<GnSweepReport> {
    let fields = ensemble.generate(ws.grid());
    let mut rows = Vec::with_capacity(fields.len());
    let mut max_ratio = 0.0f64;
    for (i, f) in fields.iter().enumerate() {
        let ratio = energy::gn_ratio(ws, f, alpha)?;
        if !ratio.is_finite() {
            return Err(Error::NonFinite(format!("gn ratio of field {i}")));
        }
        max_ratio = max_ratio.max(ratio);
        rows.push((i, ratio));
    }
    Ok(GnSweepReport { max_ratio, rows })
}

/// Gausson interpolation ratio in closed form (Gaussian moments), for
/// cross-checking the quadrature route: y-independent Gausson of
/// amplitude `c` on `R^1 × T^n`.
pub fn gausson_gn_ratio_closed_form(c: f64, n: usize, alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let torus = crate::domain::TORUS_PERIOD.powi(n as i32);
    let p = 2.0 + alpha;
    let lp = torus * c.powf(p) * (2.0 * pi / p).sqrt();
    let mass = torus * c * c * pi.sqrt();
    let kx = 0.5 * mass;
    let h1 = (mass + kx).sqrt();
    let theta_exp = (1 + n) as f64 * alpha / 2.0;
    lp / (h1.powf(theta_exp) * mass.sqrt().powf(p - theta_exp))
}
