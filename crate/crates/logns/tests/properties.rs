//! Cross-module property tests: symmetry invariances, persistence round
//! trips, and identities over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use logns::domain::{make_workspace, Field, GridSpec};
use logns::energy::{self, f_split_eval, SplitParams};
use logns::evolve::{self, EvolveConfig};

fn small_grid() -> GridSpec {
    GridSpec::new(1, 1, 16, 8, 5.0).unwrap()
}

/// A modest random field from low Fourier-like coefficients.
fn field_from(coeffs: &[(f64, f64, f64)]) -> Field {
    let grid = small_grid();
    let c = coeffs.to_vec();
    Field::from_fn(grid, move |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (re, im, phase)) in c.iter().enumerate() {
            let k = (i % 3) as f64;
            let arg = k * x[0] * 0.6 + (i / 3) as f64 * x[1] + phase;
            acc += Complex64::new(*re, *im) * Complex64::from_polar(1.0, arg);
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_identity_holds_everywhere(s in -1e3f64..1e3f64, delta in 1e-4f64..0.2f64) {
        let split = SplitParams::new(delta).unwrap();
        let (f1, f2) = f_split_eval(s, &split);
        let s2 = s * s;
        let target = if s == 0.0 { 0.0 } else { 0.5 * s2 * s2.ln() };
        let bound = 1e-12 * (1.0 + (s2 * s2.ln().abs()).max(0.0)) + 1e-300;
        prop_assert!((f2 - f1 - target).abs() <= bound,
            "s={s}, delta={delta}: {} vs {}", f2 - f1, target);
        prop_assert!(f1 >= 0.0);
    }

    #[test]
    fn translation_leaves_quadratic_functionals_unchanged(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.28), 1..6),
        sx in -16isize..16,
        sy in -8isize..8,
    ) {
        let ws = make_workspace(&small_grid()).unwrap();
        let f = field_from(&coeffs);
        prop_assume!(ws.mass(&f) > 1e-12);
        let g = f.shifted(&[sx, sy]);
        let (m0, m1) = (ws.mass(&f), ws.mass(&g));
        prop_assert!((m0 - m1).abs() <= 1e-11 * m0.max(1e-12));
        let (kx0, ky0) = ws.kinetic_split(&f);
        let (kx1, ky1) = ws.kinetic_split(&g);
        prop_assert!((kx0 - kx1).abs() <= 1e-9 * kx0.abs().max(1.0));
        prop_assert!((ky0 - ky1).abs() <= 1e-9 * ky0.abs().max(1.0));
    }

    #[test]
    fn normalize_reaches_requested_mass(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.28), 1..6),
        theta in 0.1f64..20.0,
    ) {
        let ws = make_workspace(&small_grid()).unwrap();
        let f = field_from(&coeffs);
        prop_assume!(ws.mass(&f) > 1e-12);
        let g = ws.normalize(&f, theta).unwrap();
        prop_assert!((ws.mass(&g) - theta * theta).abs() <= 1e-12 * theta * theta);
    }

    #[test]
    fn gn_ratio_is_amplitude_invariant(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.28), 1..6),
        xi in 0.01f64..100.0,
    ) {
        let ws = make_workspace(&small_grid()).unwrap();
        let f = field_from(&coeffs);
        prop_assume!(ws.mass(&f) > 1e-10);
        let r0 = energy::gn_ratio(&ws, &f, 1.0).unwrap();
        let mut g = f.clone();
        g.scale(xi);
        let r1 = energy::gn_ratio(&ws, &g, 1.0).unwrap();
        prop_assert!((r0 - r1).abs() <= 1e-9 * r0.abs().max(1e-12), "{r0} vs {r1}");
    }

    #[test]
    fn snapshot_roundtrip_is_bitwise(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.28), 1..5),
        tag in 0u32..1_000_000,
    ) {
        let f = field_from(&coeffs);
        let dir = std::env::temp_dir().join("logns_prop_snapshots");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("prop_{tag}.lsf"));
        logns::snapshot::write_field_snapshot(&f, &path).unwrap();
        let g = logns::snapshot::read_field_snapshot(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(f.grid(), g.grid());
        for (a, b) in f.samples().iter().zip(g.samples()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn time_step_preserves_mass(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.28), 1..5),
        dt in 1e-4f64..1e-2,
    ) {
        let ws = make_workspace(&small_grid()).unwrap();
        let mut f = field_from(&coeffs);
        prop_assume!(ws.mass(&f) > 1e-10);
        let m0 = ws.mass(&f);
        let config = EvolveConfig::new(dt, 1);
        evolve::step(&ws, &mut f, &config).unwrap();
        prop_assert!((ws.mass(&f) - m0).abs() <= 1e-12 * m0);
    }
}
