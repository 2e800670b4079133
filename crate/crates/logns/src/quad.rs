//! One-dimensional adaptive quadrature.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Recursion stops when the local Richardson estimate is below `tol`
/// (absolute) or when `max_depth` is exhausted. Suitable for integrands
/// with integrable logarithmic endpoint behaviour.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 30);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn handles_log_endpoint() {
        // ∫_0^1 x² ln x dx = -1/9
        let v = adaptive_simpson(
            &|x: f64| if x <= 0.0 { 0.0 } else { x * x * x.ln() },
            0.0,
            1.0,
            1e-12,
            40,
        );
        assert!((v + 1.0 / 9.0).abs() < 1e-10, "got {v}");
    }
}
