//! Adaptive Simpson quadrature used for kernel marginals and half-space integrals.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Accumulated local error estimate.
    pub error: f64,
    pub converged: bool,
}

/// Integrates `f` over `[a, b]`, refining each panel until two successive
/// Simpson estimates differ by less than its share of `tol`, or the depth cap
/// is hit (reported through `converged`).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, converged: true };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut out = Quadrature { value: 0.0, error: 0.0, converged: true };
    recurse(f, [a, b], [fa, fm, fb], whole, tol, 0, max_depth, &mut out);
    out
}

/// Panels are always split this many times before the error test may accept
/// them, so that a lucky first estimate on a kinked integrand is not trusted.
const MIN_LEVEL: u32 = 3;

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    [a, b]: [f64; 2],
    [fa, fm, fb]: [f64; 3],
    whole: f64,
    tol: f64,
    level: u32,
    max_depth: u32,
    out: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let accurate = delta.abs() <= 15.0 * tol;
    if (accurate && level >= MIN_LEVEL) || level >= max_depth {
        out.converged &= accurate;
        out.value += left + right + delta / 15.0;
        out.error += delta.abs() / 15.0;
        return;
    }
    recurse(f, [a, m], [fa, flm, fm], left, 0.5 * tol, level + 1, max_depth, out);
    recurse(f, [m, b], [fm, frm, fb], right, 0.5 * tol, level + 1, max_depth, out);
}
