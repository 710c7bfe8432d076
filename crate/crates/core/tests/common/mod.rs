//! Independent reference values shared by the integration and acceptance tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `|D V_s(Du)|` for the counterexample at `x1 = 1`, from the closed form
/// `(p/(p-1))^{(p-2+s)/2} p (p+s) / (2 (p-1)²)`.
pub fn counterexample_constant(p: f64, s: f64) -> f64 {
    (p / (p - 1.0)).powf(0.5 * (p - 2.0 + s)) * p * (p + s) / (2.0 * (p - 1.0) * (p - 1.0))
}

/// `∫_{Q_r(0,t0)} |D V_s(Du)|²` for the counterexample in two space dimensions,
/// reduced to `C² · 2r² · ∫_{-r}^{r} |x1|^β 2 sqrt(r² - x1²) dx1`, `β = (2-p+s)/(p-1) > -1`.
pub fn counterexample_cylinder_integral(p: f64, s: f64, r: f64) -> f64 {
    let beta = (2.0 - p + s) / (p - 1.0);
    assert!(beta > -1.0, "integral diverges for beta = {beta}");
    // x1 = r v^m makes the integrand smooth at the axis
    let m = (2.0 / (1.0 + beta)).ceil().max(1.0);
    let f = |v: f64| {
        if v == 0.0 {
            return if m * (1.0 + beta) - 1.0 == 0.0 { m } else { 0.0 };
        }
        m * v.powf(m * (1.0 + beta) - 1.0) * 2.0 * (1.0 - v.powf(2.0 * m)).max(0.0).sqrt()
    };
    let half_line = r.powf(beta + 2.0) * adaptive_simpson(&f, 0.0, 1.0, 1e-12);
    let c = counterexample_constant(p, s);
    c * c * 2.0 * r * r * 2.0 * half_line
}
