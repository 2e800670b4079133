//! Property suites runnable from the command line. Each check emits one
//! CSV row `suite,check,measured,bound,pass`; any failing row makes the
//! whole invocation exit with status 3.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logns::bounds;
use logns::domain::{make_workspace, Field, GridSpec, TORUS_PERIOD};
use logns::energy::{self, f_split_eval, SplitParams, LOG_FLOOR};
use logns::evolve;
use logns::gradflow::{self, FlowConfig};
use logns::oracle;
use logns::propcheck::{self, FieldGenerator, SampleEnsemble};
use logns::quad::adaptive_simpson;

use crate::config::{resolve_out_dir, RunConfig};
use crate::manifest::Manifest;
use crate::CliError;

struct Check {
    suite: &'static str,
    name: String,
    measured: f64,
    bound: f64,
    pass: bool,
}

impl Check {
    fn upper(suite: &'static str, name: &str, measured: f64, bound: f64) -> Self {
        Check {
            suite,
            name: name.to_string(),
            measured,
            bound,
            pass: measured <= bound && measured.is_finite(),
        }
    }

    fn lower(suite: &'static str, name: &str, measured: f64, bound: f64) -> Self {
        Check {
            suite,
            name: name.to_string(),
            measured,
            bound,
            pass: measured >= bound && measured.is_finite(),
        }
    }
}

fn suite_split(checks: &mut Vec<Check>) {
    let split = SplitParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        let mag = 10f64.powf(rng.gen_range(-8.0..3.0));
        let s = if rng.gen_bool(0.5) { -mag } else { mag };
        let (f1, f2) = f_split_eval(s, &split);
        let s2 = s * s;
        let target = 0.5 * s2 * s2.ln();
        let scaled = (f2 - f1 - target).abs() / (1.0 + (s2 * s2.ln()).abs());
        worst = worst.max(scaled);
    }
    checks.push(Check::upper("split", "difference_identity", worst, 1e-12));

    // Convex part: midpoint convexity over a knot-straddling sample.
    let mut convex_defect = 0.0f64;
    let mut a = -2.0;
    while a < 2.0 {
        let b = a + 0.21;
        let (fa, _) = f_split_eval(a, &split);
        let (fb, _) = f_split_eval(b, &split);
        let (fm, _) = f_split_eval(0.5 * (a + b), &split);
        convex_defect = convex_defect.max(fm - 0.5 * (fa + fb));
        a += 0.07;
    }
    checks.push(Check::upper(
        "split",
        "f1_midpoint_convexity",
        convex_defect,
        1e-12,
    ));

    // Subcritical growth envelope of the smooth part, p = 2.5.
    let dd = 1e-7;
    let f2p = |s: f64| {
        let (_, a) = f_split_eval(s + dd, &split);
        let (_, b) = f_split_eval(s - dd, &split);
        (a - b) / (2.0 * dd)
    };
    let mut ratio_max = 0.0f64;
    let mut s = split.delta() * 1.01;
    while s < 1e3 {
        ratio_max = ratio_max.max(f2p(s).abs() / s.powf(1.5));
        s *= 1.04;
    }
    checks.push(Check::upper("split", "f2_growth_p2p5", ratio_max, 10.0));
    // Superlinearity along decades.
    let v = [10.0, 100.0, 1000.0].map(|s| f2p(s) / s);
    checks.push(Check::lower(
        "split",
        "f2_prime_over_s_divergence",
        v[2] - v[0],
        1.0,
    ));
}

fn suite_scaling(checks: &mut Vec<Check>) {
    let grid = GridSpec::new(1, 1, 64, 16, 12.0).unwrap();
    let ws = make_workspace(&grid).expect("grid is valid");
    let mut worst = 0.0f64;
    for i in 0..20 {
        let f = gradflow::random_bandlimited_modulus(&grid, 500 + i, 4);
        let f = ws.normalize(&f, 3.0).expect("nonzero field");
        let e = energy::total_energy(&ws, &f, 1.0);
        let dev = propcheck::scaling_identity_check(&ws, &f, &[0.5, std::f64::consts::E, 10.0]);
        worst = worst.max(dev / ((1.0 + e.abs()) * 100.0));
    }
    checks.push(Check::upper("scaling", "amplitude_identity", worst, 1e-10));
}

fn suite_subadditivity(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let e = std::f64::consts::E;
    let pi = std::f64::consts::PI;
    // Closed-form exactness.
    let (direct, formula) =
        propcheck::subadditivity_margin_reduced(pi.sqrt() * e * e, pi.sqrt() * e.powi(3), 1)?;
    checks.push(Check::upper(
        "subadditivity",
        "reduced_closed_form_exact",
        (direct - formula).abs(),
        1e-12 * formula,
    ));
    checks.push(Check::lower(
        "subadditivity",
        "reduced_margin_positive",
        formula,
        0.0,
    ));
    // Waveguide measurement at two mass pairs.
    let grid = GridSpec::new(1, 1, 96, 16, 12.0).unwrap();
    let ws = make_workspace(&grid)?;
    let mut flow = FlowConfig::new(1.0, 1.0);
    flow.tol = 1e-8;
    for (i, (t1_sq, t2_sq)) in [
        (
            2.0 * pi * pi.sqrt() * e * e,
            2.0 * pi * pi.sqrt() * e.powi(3),
        ),
        (30.0, 80.0),
    ]
    .iter()
    .enumerate()
    {
        let report = propcheck::subadditivity_check(
            t1_sq.sqrt(),
            t2_sq.sqrt(),
            1.0,
            &ws,
            &flow,
            2,
            7 + i as u64,
        )?;
        checks.push(Check::lower(
            "subadditivity",
            &format!("waveguide_margin_pair{i}"),
            report.margin,
            -1e-8,
        ));
    }
    Ok(())
}

fn suite_brezis_lieb(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let grid = GridSpec::new(1, 1, 128, 16, 12.0).unwrap();
    let ws = make_workspace(&grid)?;
    let u = ws.normalize(&oracle::sample_gausson(&grid, 3.0, &[0.0])?, 1.0)?;
    let step = grid.points_x as isize / 8;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for k in 1..=3 {
        let r = propcheck::brezis_lieb_residual(&ws, &u, &u, &[k * step, 0])?;
        if r >= prev {
            monotone = false;
        }
        prev = r;
        last = r;
    }
    checks.push(Check {
        suite: "brezis-lieb",
        name: "residual_monotone_in_shift".into(),
        measured: if monotone { 1.0 } else { 0.0 },
        bound: 1.0,
        pass: monotone,
    });
    checks.push(Check::upper(
        "brezis-lieb",
        "far_separation_residual",
        last,
        1e-6,
    ));
    Ok(())
}

fn suite_gn(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let grid = GridSpec::new(1, 1, 64, 16, 12.0).unwrap();
    let ws = make_workspace(&grid)?;
    let ensemble = SampleEnsemble {
        seed: 2718,
        count: 100,
        generator: FieldGenerator::BandLimited { max_mode: 4 },
    };
    let report = propcheck::gn_sweep(&ws, &ensemble, 1.0)?;
    checks.push(Check::upper(
        "gn",
        "ensemble_max_ratio_finite",
        report.max_ratio,
        1e6,
    ));
    let c = 1.3;
    let gausson = Field::from_fn(grid, move |co| {
        Complex64::new(c * (-co[0] * co[0] / 2.0).exp(), 0.0)
    });
    let measured = energy::gn_ratio(&ws, &gausson, 1.0)?;
    let closed = propcheck::gausson_gn_ratio_closed_form(c, 1, 1.0);
    checks.push(Check::upper(
        "gn",
        "gausson_closed_form_agreement",
        (measured - closed).abs() / closed,
        1e-8,
    ));
    Ok(())
}

fn suite_log_pair(checks: &mut Vec<Check>) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = -1.0f64;
    for _ in 0..1_000_000 {
        let scale = 10f64.powf(rng.gen_range(-6.0..3.0));
        let z1 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        let z2 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        let (lhs, rhs) = evolve::log_pair_bound(z1, z2);
        worst = worst.max(lhs - rhs);
    }
    checks.push(Check::upper("log-pair", "im_part_bound", worst, 1e-12));
    let z = Complex64::new(0.4, 0.9);
    let (lhs, rhs) = evolve::log_pair_bound(z, z);
    checks.push(Check::upper("log-pair", "diagonal_zero", lhs.max(rhs), 0.0));
}

fn suite_tent(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let pi = std::f64::consts::PI;
    let mut worst_norm = 0.0f64;
    let mut worst_ent = 0.0f64;
    for i in 0..20 {
        let a = 0.15 + (pi - 0.3) * i as f64 / 20.0;
        let (nsq, ent) = bounds::tent_norms(a)?;
        let qn = adaptive_simpson(
            &|y: f64| bounds::tent_profile(a, y).powi(2),
            0.0,
            TORUS_PERIOD,
            1e-13,
            40,
        );
        let qe = adaptive_simpson(
            &|y: f64| {
                let v = bounds::tent_profile(a, y);
                let rho = v * v;
                if rho < LOG_FLOOR {
                    0.0
                } else {
                    rho * rho.ln()
                }
            },
            0.0,
            TORUS_PERIOD,
            1e-13,
            40,
        );
        worst_norm = worst_norm.max((nsq - qn).abs());
        worst_ent = worst_ent.max((ent - qe).abs());
    }
    checks.push(Check::upper(
        "tent",
        "norm_closed_form_vs_quadrature",
        worst_norm,
        1e-9,
    ));
    checks.push(Check::upper(
        "tent",
        "entropy_closed_form_vs_quadrature",
        worst_ent,
        1e-9,
    ));
    // Mollification correction decreases along eps = 1e-1, 1e-2, 1e-3.
    let mut last = f64::INFINITY;
    let mut monotone = true;
    for eps in [1e-1, 1e-2, 1e-3] {
        let chain = bounds::tent_chain(6.0, pi - 1.0, eps, 1, 1)?;
        if chain.correction.abs() >= last {
            monotone = false;
        }
        last = chain.correction.abs();
    }
    checks.push(Check {
        suite: "tent",
        name: "mollification_correction_monotone".into(),
        measured: if monotone { 1.0 } else { 0.0 },
        bound: 1.0,
        pass: monotone,
    });
    Ok(())
}

fn suite_gausson(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let pi = std::f64::consts::PI;
    let grid = GridSpec::new(1, 0, 256, 0, 12.0).unwrap();
    let ws = make_workspace(&grid)?;
    let theta_sq_red = pi.sqrt() * 3f64.exp();
    let u = oracle::sample_gausson(&grid, theta_sq_red.sqrt(), &[0.0])?;
    let lambda = oracle::lambda_of_mass(theta_sq_red, 1)?;
    let mut r = energy::first_variation(&ws, &u, 1.0, &energy::RegularizationParams::exact());
    r.axpy(lambda, &u);
    checks.push(Check::upper(
        "gausson",
        "pde_residual",
        ws.norm_l2(&r) / ws.norm_l2(&u),
        1e-8,
    ));
    let (kx, _) = ws.kinetic_split(&u);
    checks.push(Check::upper(
        "gausson",
        "dilation_identity",
        (kx - 0.5 * theta_sq_red).abs() / theta_sq_red,
        1e-10,
    ));
    let mut worst = 0.0f64;
    let mut mass = 0.05;
    for _ in 0..50 {
        let l = oracle::lambda_of_mass(mass, 1)?;
        let e = oracle::gausson_energy(mass, 1)?;
        worst = worst.max((l - (1.0 - 2.0 * e / mass)).abs() / (1.0 + l.abs()));
        mass *= 1.35;
    }
    checks.push(Check::upper(
        "gausson",
        "multiplier_energy_link",
        worst,
        1e-11,
    ));
    Ok(())
}

const ALL_SUITES: &[&str] = &[
    "split",
    "scaling",
    "subadditivity",
    "brezis-lieb",
    "gn",
    "log-pair",
    "tent",
    "gausson",
];

pub fn run(
    suite_flag: Option<&str>,
    config_path: Option<&Path>,
    out_flag: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = match config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::parse("")?,
    };
    let suite = suite_flag
        .map(|s| s.to_string())
        .or_else(|| cfg.opt_str("suite"))
        .unwrap_or_else(|| "all".to_string());
    let out_dir = resolve_out_dir(out_flag, &cfg);
    cfg.finish()?;
    super::ensure_out_dir(&out_dir)?;

    let selected: Vec<&str> = if suite == "all" {
        ALL_SUITES.to_vec()
    } else if ALL_SUITES.contains(&suite.as_str()) {
        vec![ALL_SUITES[ALL_SUITES.iter().position(|s| *s == suite).unwrap()]]
    } else {
        return Err(CliError::validation(format!(
            "unknown suite {suite:?}; expected one of {} or all",
            ALL_SUITES.join(", ")
        )));
    };

    let mut checks = Vec::new();
    for name in &selected {
        match *name {
            "split" => suite_split(&mut checks),
            "scaling" => suite_scaling(&mut checks),
            "subadditivity" => suite_subadditivity(&mut checks)?,
            "brezis-lieb" => suite_brezis_lieb(&mut checks)?,
            "gn" => suite_gn(&mut checks)?,
            "log-pair" => suite_log_pair(&mut checks),
            "tent" => suite_tent(&mut checks)?,
            "gausson" => suite_gausson(&mut checks)?,
            _ => unreachable!(),
        }
    }

    // Suite/check names are text; assemble the document manually but keep
    // the numeric formatting from the shared writer.
    let mut body = String::from("suite,check,measured,bound,pass\n");
    for c in &checks {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            c.suite,
            c.name,
            logns::csv::fmt_f64(c.measured),
            logns::csv::fmt_f64(c.bound),
            if c.pass { 1 } else { 0 }
        ));
    }
    let file = out_dir.join(format!("verify_{suite}.csv"));
    std::fs::write(&file, body).map_err(CliError::io)?;

    let mut manifest = Manifest::start("verify", cfg.echo());
    manifest.push("suite", suite.clone());
    manifest.push("checks", checks.len().to_string());
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    manifest.push("failed", failed.len().to_string());
    manifest.write(&out_dir)?;

    for c in &checks {
        println!(
            "verify {}: {} measured={:.3e} bound={:.3e} {}",
            c.suite,
            c.name,
            c.measured,
            c.bound,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailure(format!(
            "{} of {} checks failed",
            failed.len(),
            checks.len()
        )))
    }
}
