//! The constrained energy functional and its pieces.
//!
//! For a field `u` on `R^d × T^n` and anisotropy weight `mu ≥ 0`,
//!
//! ```text
//! E_mu(u) = 1/2 ∫ |∇_x u|²  +  mu/2 ∫ |∇_y u|²  +  1/2 ∫ |u|²
//!           - 1/2 ∫ |u|² log(eps_sat + |u|²)
//! ```
//!
//! With `eps_sat = 0` this is the exact logarithmic functional under the
//! convention `0·log 0 = 0`. The pointwise nonlinearity splits as
//! `F2(s) - F1(s) = s²·log(s²)/2` with `F1` convex and nonnegative for
//! splitting thresholds `delta ≤ e^{-3/2}` and `F2` of subcritical growth;
//! both integrals are reported alongside the entropy so the decomposition
//! can be cross-checked numerically.

use num_complex::Complex64;

use crate::domain::{Field, SpectralWorkspace};
use crate::error::{Error, Result};
use crate::par;

/// `|u|²` below this contributes zero to logarithmic integrands when
/// `eps_sat = 0` (the analytic `0·log 0 = 0` limit).
pub const LOG_FLOOR: f64 = 1e-300;

/// Threshold below which the convex part of the split stays convex:
/// `F1''(s) = -(log s² + 3) ≥ 0` on `(0, delta)` requires
/// `delta ≤ e^{-3/2}`.
pub const MAX_SPLIT_DELTA: f64 = 0.22313016014842982; // e^{-3/2}

/// Splitting threshold for the `F1`/`F2` decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    delta: f64,
}

impl SplitParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < MAX_SPLIT_DELTA) {
            return Err(Error::InvalidParam(format!(
                "split delta must lie in (0, e^(-3/2) = {MAX_SPLIT_DELTA}), got {delta}"
            )));
        }
        Ok(SplitParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams { delta: 0.05 }
    }
}

/// Saturation constant for the regularized logarithm `log(eps + |u|²)`.
/// `eps_sat = 0` selects the exact logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    eps_sat: f64,
}

impl RegularizationParams {
    pub fn new(eps_sat: f64) -> Result<Self> {
        if !(eps_sat >= 0.0) || !eps_sat.is_finite() {
            return Err(Error::InvalidParam(format!(
                "eps_sat must be finite and >= 0, got {eps_sat}"
            )));
        }
        Ok(RegularizationParams { eps_sat })
    }

    /// The exact logarithm (`eps_sat = 0`).
    pub fn exact() -> Self {
        RegularizationParams { eps_sat: 0.0 }
    }

    pub fn eps_sat(&self) -> f64 {
        self.eps_sat
    }

    pub fn is_exact(&self) -> bool {
        self.eps_sat == 0.0
    }
}

impl Default for RegularizationParams {
    fn default() -> Self {
        RegularizationParams::exact()
    }
}

/// `(F1(s), F2(s))` for the decomposition `F2 - F1 = s² log(s²) / 2`.
pub fn f_split_eval(s: f64, split: &SplitParams) -> (f64, f64) {
    let delta = split.delta;
    let a = s.abs();
    let s2 = s * s;
    let f1 = if a == 0.0 {
        0.0
    } else if a < delta {
        -0.5 * s2 * s2.ln()
    } else {
        -0.5 * s2 * ((delta * delta).ln() + 3.0) + 2.0 * delta * a - 0.5 * delta * delta
    };
    let f2 = if a < delta {
        0.0
    } else {
        0.5 * s2 * (s2 / (delta * delta)).ln() + 2.0 * delta * a - 1.5 * s2 - 0.5 * delta * delta
    };
    (f1, f2)
}

/// Pointwise integrand `rho·log(eps + rho)` with the zero convention.
#[inline]
fn entropy_term(rho: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        if rho < LOG_FLOOR {
            0.0
        } else {
            rho * rho.ln()
        }
    } else {
        rho * (eps + rho).ln()
    }
}

/// `∫ |u|² log(eps_sat + |u|²)`.
pub fn entropy(ws: &SpectralWorkspace, field: &Field, reg: &RegularizationParams) -> f64 {
    let eps = reg.eps_sat;
    par::map_sum(field.samples(), |z| entropy_term(z.norm_sqr(), eps)) * ws.grid().cell_volume()
}

/// All additive pieces of the anisotropic energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `1/2 ∫ |∇_x u|²`
    pub kinetic_x: f64,
    /// `mu/2 ∫ |∇_y u|²`
    pub kinetic_y_weighted: f64,
    /// `1/2 ∫ |u|²`
    pub l2_half: f64,
    /// `1/2 ∫ |u|² log(eps_sat + |u|²)`
    pub entropy_half: f64,
    /// `∫ F1(|u|)`
    pub f1_integral: f64,
    /// `∫ F2(|u|)`
    pub f2_integral: f64,
    pub mu: f64,
    /// `kinetic_x + kinetic_y_weighted + l2_half - entropy_half`
    pub total: f64,
}

/// Evaluates the full breakdown of `E_mu`.
pub fn energy(
    ws: &SpectralWorkspace,
    field: &Field,
    mu: f64,
    reg: &RegularizationParams,
    split: &SplitParams,
) -> EnergyBreakdown {
    assert!(mu >= 0.0, "mu must be nonnegative");
    let vol = ws.grid().cell_volume();
    let (kx, ky) = ws.kinetic_split(field);
    let eps = reg.eps_sat;
    let mass = par::map_sum(field.samples(), |z| z.norm_sqr()) * vol;
    let ent = par::map_sum(field.samples(), |z| entropy_term(z.norm_sqr(), eps)) * vol;
    let f1 = par::map_sum(field.samples(), |z| f_split_eval(z.norm(), split).0) * vol;
    let f2 = par::map_sum(field.samples(), |z| f_split_eval(z.norm(), split).1) * vol;
    let kinetic_x = 0.5 * kx;
    let kinetic_y_weighted = 0.5 * mu * ky;
    let l2_half = 0.5 * mass;
    let entropy_half = 0.5 * ent;
    EnergyBreakdown {
        kinetic_x,
        kinetic_y_weighted,
        l2_half,
        entropy_half,
        f1_integral: f1,
        f2_integral: f2,
        mu,
        total: kinetic_x + kinetic_y_weighted + l2_half - entropy_half,
    }
}

/// L² gradient of `E_mu` at `field`.
///
/// `g = (-Δ_x - mu·Δ_y) u + u - u·log(eps + |u|²) - u·|u|²/(eps + |u|²)`;
/// with `eps_sat = 0` the mass term and the entropy-derivative unit term
/// cancel and `g = (-Δ_x - mu·Δ_y) u - u·log|u|²`. At a constrained
/// critical point with multiplier `λ`, `g + λu = 0`.
pub fn first_variation(
    ws: &SpectralWorkspace,
    field: &Field,
    mu: f64,
    reg: &RegularizationParams,
) -> Field {
    assert!(mu >= 0.0, "mu must be nonnegative");
    let mut g = ws.neg_laplacian(field, mu);
    let eps = reg.eps_sat;
    par::zip_for_each_mut(g.samples_mut(), field.samples(), |gz, uz| {
        let rho = uz.norm_sqr();
        if eps == 0.0 {
            if rho >= LOG_FLOOR {
                *gz += *uz * (-rho.ln());
            }
        } else {
            let sat = eps + rho;
            *gz += *uz * (1.0 - sat.ln() - rho / sat);
        }
    });
    g
}

/// Gagliardo–Nirenberg ratio
/// `‖u‖_{2+α}^{2+α} / (‖u‖_{H¹}^{ϑ} · ‖u‖₂^{2+α-ϑ})` with
/// `ϑ = (d+n)·α/2`. The `H¹` norm is `(mass + Kx + Ky)^{1/2}`.
pub fn gn_ratio(ws: &SpectralWorkspace, field: &Field, alpha: f64) -> Result<f64> {
    let dn = ws.grid().rank() as f64;
    if !(alpha > 0.0 && alpha < 4.0 / dn) {
        return Err(Error::InvalidParam(format!(
            "alpha must lie in (0, 4/(d+n)) = (0, {}), got {alpha}",
            4.0 / dn
        )));
    }
    let mass = ws.mass(field);
    if mass <= 0.0 {
        return Err(Error::ZeroField);
    }
    let p = 2.0 + alpha;
    let lp =
        par::map_sum(field.samples(), |z| z.norm_sqr().powf(p / 2.0)) * ws.grid().cell_volume();
    let (kx, ky) = ws.kinetic_split(field);
    let h1 = (mass + kx + ky).sqrt();
    let theta_exp = dn * alpha / 2.0;
    Ok(lp / (h1.powf(theta_exp) * mass.sqrt().powf(p - theta_exp)))
}

/// Convenience: `E_mu` total at exact logarithm, default split.
pub fn total_energy(ws: &SpectralWorkspace, field: &Field, mu: f64) -> f64 {
    energy(
        ws,
        field,
        mu,
        &RegularizationParams::exact(),
        &SplitParams::default(),
    )
    .total
}

#[allow(dead_code)]
fn complex_norm(z: &Complex64) -> f64 {
    z.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_workspace, GridSpec};

    const PI: f64 = std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn split_params_validated() {
        assert!(SplitParams::new(0.05).is_ok());
        assert!(SplitParams::new(0.0).is_err());
        assert!(SplitParams::new(0.3).is_err());
    }

    #[test]
    fn f_split_at_zero() {
        let split = SplitParams::default();
        assert_eq!(f_split_eval(0.0, &split), (0.0, 0.0));
    }

    #[test]
    fn f_split_continuous_at_delta() {
        let split = SplitParams::new(0.1).unwrap();
        let d = split.delta();
        let (f1_lo, f2_lo) = f_split_eval(d - 1e-12, &split);
        let (f1_hi, f2_hi) = f_split_eval(d, &split);
        // Continuity and the closed forms at the knot.
        close(f1_hi, -0.5 * d * d * (d * d).ln(), 1e-14);
        close(f1_lo, f1_hi, 1e-12);
        close(f2_hi, 0.0, 1e-15);
        close(f2_lo, f2_hi, 1e-12);
    }

    #[test]
    fn f_split_difference_identity_at_one() {
        let split = SplitParams::new(0.1).unwrap();
        let (f1, f2) = f_split_eval(1.0, &split);
        close(f2 - f1, 0.0, 1e-14); // (1/2)·1·log 1 = 0
    }

    #[test]
    fn f_split_identity_random_samples() {
        let split = SplitParams::default();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100_000 {
            let mag = 10f64.powf(next() * 11.0 - 8.0); // 1e-8 .. 1e3
            let s = if next() < 0.5 { -mag } else { mag };
            let (f1, f2) = f_split_eval(s, &split);
            let s2 = s * s;
            let target = 0.5 * s2 * s2.ln();
            let bound = 1e-12 * (1.0 + (s2 * s2.ln()).abs());
            assert!(
                (f2 - f1 - target).abs() < bound,
                "identity violated at s={s}: {} vs {}",
                f2 - f1,
                target
            );
        }
    }

    #[test]
    fn f1_even_nonnegative_monotone_outward() {
        let split = SplitParams::default();
        let mut s = 1e-6;
        while s < 1e3 {
            let (f1p, _) = f_split_eval(s, &split);
            let (f1m, _) = f_split_eval(-s, &split);
            assert_eq!(f1p, f1m, "F1 must be even");
            assert!(f1p >= 0.0, "F1 must be nonnegative at {s}: {f1p}");
            // F1'(s)·s ≥ 0  <=>  F1 nondecreasing in |s|
            let (f1p2, _) = f_split_eval(s * 1.0001, &split);
            assert!(f1p2 >= f1p - 1e-12 * f1p.abs().max(1.0));
            s *= 1.7;
        }
    }

    #[test]
    fn f1_midpoint_convexity() {
        let split = SplitParams::default();
        let mut a = -3.0;
        while a < 3.0 {
            let b = a + 0.37;
            let mid = 0.5 * (a + b);
            let (fa, _) = f_split_eval(a, &split);
            let (fb, _) = f_split_eval(b, &split);
            let (fm, _) = f_split_eval(mid, &split);
            assert!(
                fm <= 0.5 * (fa + fb) + 1e-12,
                "midpoint convexity fails on [{a}, {b}]"
            );
            a += 0.11;
        }
    }

    fn f2_prime(s: f64, split: &SplitParams) -> f64 {
        let h = 1e-6 * s.abs().max(1e-3);
        let (_, a) = f_split_eval(s + h, split);
        let (_, b) = f_split_eval(s - h, split);
        (a - b) / (2.0 * h)
    }

    #[test]
    fn f2_growth_subcritical() {
        // |F2'(s)| ≤ C·|s|^{p-1} with p = 2.5: the ratio stays bounded on a
        // wide sample and is largest at moderate s.
        let split = SplitParams::default();
        let mut max_ratio = 0.0f64;
        let mut s = split.delta() * 1.01;
        while s < 1e3 {
            let ratio = f2_prime(s, &split).abs() / s.powf(1.5);
            max_ratio = max_ratio.max(ratio);
            s *= 1.05;
        }
        assert!(max_ratio < 10.0, "growth envelope exceeded: {max_ratio}");
    }

    #[test]
    fn f2_prime_over_s_monotone_and_unbounded() {
        let split = SplitParams::default();
        // zero below delta
        assert_eq!(f_split_eval(split.delta() * 0.5, &split).1, 0.0);
        let mut prev = 0.0;
        let mut s = split.delta() * 1.001;
        while s < 1e4 {
            let val = f2_prime(s, &split) / s;
            assert!(
                val >= prev - 1e-6 * val.abs().max(1.0),
                "not nondecreasing at {s}"
            );
            prev = val;
            s *= 1.3;
        }
        // f4: divergence along s = 10^k
        let v1 = f2_prime(10.0, &split) / 10.0;
        let v2 = f2_prime(100.0, &split) / 100.0;
        let v3 = f2_prime(1000.0, &split) / 1000.0;
        assert!(v1 < v2 && v2 < v3);
        assert!(v3 > 10.0);
    }

    #[test]
    fn entropy_of_unit_modulus_is_zero() {
        let spec = GridSpec::new(0, 1, 0, 16, 1.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| Complex64::from_polar(1.0, 3.0 * c[0]));
        let e = entropy(&ws, &f, &RegularizationParams::exact());
        assert!(e.abs() < 1e-14);
    }

    #[test]
    fn entropy_gaussian_closed_form() {
        // ∫∫ u² log u² for u = c·e^{-x²/2} on R × T:
        // 2π·(2 log c · c²√π - c²√π/2)
        let spec = GridSpec::new(1, 1, 256, 8, 12.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let c = 1.4f64;
        let f = Field::from_fn(spec, |co| {
            Complex64::new(c * (-co[0] * co[0] / 2.0).exp(), 0.0)
        });
        let expect = 2.0 * PI * (2.0 * c.ln() * c * c * PI.sqrt() - c * c * PI.sqrt() / 2.0);
        let got = entropy(&ws, &f, &RegularizationParams::exact());
        close(got, expect, 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn entropy_saturated_large_eps_dominated_by_mass_log() {
        let spec = GridSpec::new(1, 1, 32, 8, 6.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| Complex64::new((-c[0] * c[0]).exp(), 0.0));
        let eps = 1e10;
        let got = entropy(&ws, &f, &RegularizationParams::new(eps).unwrap());
        let dominant = ws.mass(&f) * eps.ln();
        assert!((got / dominant - 1.0).abs() < 1e-3);
    }

    #[test]
    fn breakdown_identities_hold() {
        let spec = GridSpec::new(1, 1, 32, 16, 6.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| {
            Complex64::new(
                (-c[0] * c[0] / 2.0).exp() * (1.0 + 0.2 * c[1].cos()),
                0.1 * (c[0] * 0.5).sin(),
            )
        });
        let split = SplitParams::default();
        let b = energy(&ws, &f, 2.0, &RegularizationParams::exact(), &split);
        close(
            b.total,
            b.kinetic_x + b.kinetic_y_weighted + b.l2_half - b.entropy_half,
            1e-12 * b.total.abs().max(1.0),
        );
        // Pointwise split identity integrated: entropy/2 = ∫(F2 - F1)
        close(
            b.entropy_half,
            b.f2_integral - b.f1_integral,
            1e-10 * b.entropy_half.abs().max(1.0),
        );
    }

    #[test]
    fn gausson_energy_total_matches_reduced_value() {
        // y-independent Gausson with Θ² = 2π·√π·e³ has energy
        // 2π · (-√π e³ / 2).
        let spec = GridSpec::new(1, 1, 256, 8, 12.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let c = (1.0f64 + 2.0).exp().sqrt(); // e^{(d+λ)/2}, d=1, λ=2
        let f = Field::from_fn(spec, |co| {
            Complex64::new(c * (-co[0] * co[0] / 2.0).exp(), 0.0)
        });
        let expect = -2.0 * PI * PI.sqrt() * 3f64.exp() / 2.0;
        let total = total_energy(&ws, &f, 1.0);
        close(total, expect, 1e-9 * expect.abs());
    }

    #[test]
    fn y_independent_breakdown_is_mu_independent() {
        let spec = GridSpec::new(1, 1, 64, 8, 8.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| Complex64::new((-c[0] * c[0] / 2.0).exp(), 0.0));
        let e1 = total_energy(&ws, &f, 1e-3);
        let e2 = total_energy(&ws, &f, 1e3);
        close(e1, e2, 1e-9 * e1.abs());
    }

    #[test]
    fn amplitude_scaling_identity() {
        let spec = GridSpec::new(1, 1, 64, 16, 8.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| {
            Complex64::new(
                (-c[0] * c[0] / 2.0).exp() * (1.0 + 0.4 * (c[1] * 2.0).sin()),
                0.0,
            )
        });
        let m = ws.mass(&f);
        let e = total_energy(&ws, &f, 1.0);
        for xi in [0.5f64, std::f64::consts::E, 10.0] {
            let mut g = f.clone();
            g.scale(xi);
            let eg = total_energy(&ws, &g, 1.0);
            let expect = xi * xi * e - xi * xi * xi.ln() * m;
            close(eg, expect, 1e-10 * (1.0 + e.abs()) * xi * xi);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = GridSpec::new(1, 1, 32, 8, 6.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let u = Field::from_fn(spec, |c| {
            Complex64::new(
                (-c[0] * c[0] / 2.0).exp() + 0.3 * (c[1] + 0.2 * c[0]).cos(),
                0.2 * (c[1] * 2.0).sin(),
            )
        });
        let mu = 1.7;
        for (reg, tol) in [
            (RegularizationParams::exact(), 1e-6),
            (RegularizationParams::new(1e-2).unwrap(), 1e-6),
        ] {
            let g = first_variation(&ws, &u, mu, &reg);
            let split = SplitParams::default();
            let v = Field::from_fn(spec, |c| {
                Complex64::new((1.3 * c[0] - c[1]).sin(), (0.7 * c[0]).cos())
            });
            let h = 1e-5;
            let mut up = u.clone();
            up.axpy(h, &v);
            let mut um = u.clone();
            um.axpy(-h, &v);
            let ep = energy(&ws, &up, mu, &reg, &split).total;
            let em = energy(&ws, &um, mu, &reg, &split).total;
            let fd = (ep - em) / (2.0 * h);
            let ip = ws.inner(&g, &v);
            assert!(
                (fd - ip).abs() < tol * ip.abs().max(1.0),
                "directional derivative mismatch: fd={fd}, <g,v>={ip}"
            );
        }
    }

    #[test]
    fn gradient_of_gausson_is_multiple_of_field() {
        // -Δu - u log u² = -λ u for the Gausson with λ = 1
        // (reduced mass √π·e²).
        let spec = GridSpec::new(1, 0, 256, 0, 12.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let c = (1.0f64 + 1.0).exp().sqrt() * 1.0; // e^{(d+λ)/2} = e^1
        let u = Field::from_fn(spec, |co| {
            Complex64::new(c * (-co[0] * co[0] / 2.0).exp(), 0.0)
        });
        let g = first_variation(&ws, &u, 1.0, &RegularizationParams::exact());
        let mut r = g.clone();
        r.axpy(1.0, &u); // g + λu with λ = 1
        let rel = ws.norm_l2(&r) / ws.norm_l2(&u);
        assert!(rel < 1e-8, "Euler-Lagrange residual {rel}");
    }

    #[test]
    fn gradient_of_zero_field_is_zero_when_regularized() {
        let spec = GridSpec::new(1, 1, 16, 8, 4.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let z = Field::zeros(spec);
        let g = first_variation(&ws, &z, 1.0, &RegularizationParams::new(0.5).unwrap());
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn gn_ratio_exponent_bookkeeping() {
        let spec = GridSpec::new(1, 1, 32, 16, 6.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        let f = Field::from_fn(spec, |c| {
            Complex64::new((-c[0] * c[0] / 2.0).exp() * (1.0 + 0.3 * c[1].sin()), 0.0)
        });
        let r1 = gn_ratio(&ws, &f, 1.0).unwrap();
        let mut g = f.clone();
        g.scale(37.0);
        let r2 = gn_ratio(&ws, &g, 1.0).unwrap();
        assert!((r1 - r2).abs() < 1e-12 * r1);
        // d=1, n=1, α=1 → ϑ = 1: sanity on the exponent via a direct check
        let mass = ws.mass(&f);
        let (kx, ky) = ws.kinetic_split(&f);
        let lp = par::map_sum(f.samples(), |z| z.norm().powi(3)) * spec.cell_volume();
        let direct = lp / ((mass + kx + ky).sqrt() * mass.sqrt().powi(2));
        assert!((r1 - direct).abs() < 1e-12 * r1);
    }

    #[test]
    fn gn_ratio_rejects_zero_field_and_bad_alpha() {
        let spec = GridSpec::new(1, 1, 16, 8, 4.0).unwrap();
        let ws = make_workspace(&spec).unwrap();
        assert!(gn_ratio(&ws, &Field::zeros(spec), 1.0).is_err());
        let f = Field::from_fn(spec, |c| Complex64::new(c[0].cos(), 0.0));
        assert!(gn_ratio(&ws, &f, 2.5).is_err()); // 4/(d+n) = 2
    }
}
