//! Closed-form reference solutions with exact jets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// A classical solution of `u_t = div(|Du|^{p-2} Du)` with exact derivatives.
pub trait ExactSolution: Send + Sync {
    fn name(&self) -> &str;

    /// Where the formulas are valid.
    fn validity(&self) -> &str;

    fn value(&self, x: &[f64], t: f64) -> f64;

    /// Exact `(Du, D²u)`; `Error::Singular` where the jet does not exist.
    fn jet(&self, x: &[f64], t: f64) -> Result<Jet>;

    fn time_derivative(&self, x: &[f64], t: f64) -> f64;

    /// Pointwise `u_t - div(|Du|^{p-2} Du)` from the exact jet.
    fn pde_residual(&self, p: f64, x: &[f64], t: f64) -> Result<f64> {
        Ok(self.time_derivative(x, t) - self.jet(x, t)?.p_laplacian(p)?)
    }
}

/// `u = (p/(p-1))^{p-1} t + |x1|^{p/(p-1)}`, a solution on `ℝ^n × (0, ∞)` whose
/// `D V_s(Du)` is square integrable near `{x1 = 0}` exactly when `s > -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Counterexample {
    p: f64,
}

pub fn counterexample(p: f64) -> Result<Counterexample> {
    Counterexample::new(p)
}

impl Counterexample {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParams(format!("p must exceed 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `u_t = (p/(p-1))^{p-1}`.
    pub fn speed(&self) -> f64 {
        let q = self.p / (self.p - 1.0);
        q.powf(self.p - 1.0)
    }

    /// `u_{x1}` as a function of `x1` alone.
    pub fn slope(&self, x1: f64) -> f64 {
        let p = self.p;
        p / (p - 1.0) * x1.abs().powf(1.0 / (p - 1.0) - 1.0) * x1
    }

    /// `u_{x1 x1} = p/(p-1)² |x1|^{(2-p)/(p-1)}`; singular at `x1 = 0` when `p > 2`.
    pub fn curvature(&self, x1: f64) -> Result<f64> {
        let p = self.p;
        if x1 == 0.0 && p > 2.0 {
            return Err(Error::Singular(format!(
                "counterexample second derivative at x1 = 0 for p = {p}"
            )));
        }
        let exponent = (2.0 - p) / (p - 1.0);
        let power = if exponent == 0.0 { 1.0 } else { x1.abs().powf(exponent) };
        Ok(p / ((p - 1.0) * (p - 1.0)) * power)
    }
}

impl ExactSolution for Counterexample {
    fn name(&self) -> &str {
        "counterexample"
    }

    fn validity(&self) -> &str {
        "all of R^n x R; second derivatives singular on {x1 = 0} when p > 2"
    }

    fn value(&self, x: &[f64], t: f64) -> f64 {
        let p = self.p;
        self.speed() * t + x[0].abs().powf(p / (p - 1.0))
    }

    fn jet(&self, x: &[f64], _t: f64) -> Result<Jet> {
        let n = x.len();
        let mut g = DVector::zeros(n);
        g[0] = self.slope(x[0]);
        let mut h = DMatrix::zeros(n, n);
        h[(0, 0)] = self.curvature(x[0])?;
        Jet::new(g, h)
    }

    fn time_derivative(&self, _x: &[f64], _t: f64) -> f64 {
        self.speed()
    }
}

/// Closed form of `|D V_s(Du)|` for the counterexample:
/// `C(p,s) |x1|^{(2-p+s)/(2(p-1))}` with
/// `C(p,s) = (p/(p-1))^{(p-2+s)/2} p(p+s) / (2(p-1)²)`.
pub fn dvs_norm_exact(p: f64, s: f64, x1: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParams(format!("p must exceed 1, got {p}")));
    }
    if x1 == 0.0 {
        return Err(Error::Singular("dvs_norm_exact on the axis x1 = 0".into()));
    }
    if !x1.is_finite() || !s.is_finite() {
        return Err(Error::NonFinite("dvs_norm_exact"));
    }
    let q = p / (p - 1.0);
    let c = q.powf(0.5 * (p - 2.0 + s)) * p * (p + s).abs() / (2.0 * (p - 1.0) * (p - 1.0));
    Ok(c * x1.abs().powf((2.0 - p + s) / (2.0 * (p - 1.0))))
}

/// `e^{-2π²t} sin(πx1) sin(πx2)` on `[0,1]²`, a solution for `p = 2` only.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Heat;

/// Heat-equation reference; rejects `p != 2`.
pub fn heat_reference(p: f64) -> Result<Heat> {
    if p != 2.0 {
        return Err(Error::InvalidParams(format!(
            "heat reference solves the p = 2 equation only, got p = {p}"
        )));
    }
    Ok(Heat)
}

impl ExactSolution for Heat {
    fn name(&self) -> &str {
        "heat"
    }

    fn validity(&self) -> &str {
        "p = 2, x in R^2 (boundary data zero on the unit square)"
    }

    fn value(&self, x: &[f64], t: f64) -> f64 {
        use std::f64::consts::PI;
        (-2.0 * PI * PI * t).exp() * (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    fn jet(&self, x: &[f64], t: f64) -> Result<Jet> {
        use std::f64::consts::PI;
        let a = (-2.0 * PI * PI * t).exp();
        let (s1, c1) = (PI * x[0]).sin_cos();
        let (s2, c2) = (PI * x[1]).sin_cos();
        let g = DVector::from_column_slice(&[a * PI * c1 * s2, a * PI * s1 * c2]);
        let pp = a * PI * PI;
        let h = DMatrix::from_row_slice(2, 2, &[-pp * s1 * s2, pp * c1 * c2, pp * c1 * c2, -pp * s1 * s2]);
        Jet::new(g, h)
    }

    fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        use std::f64::consts::PI;
        -2.0 * PI * PI * self.value(x, t)
    }
}

/// `u = <a, x> + b`, stationary for every `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    a: Vec<f64>,
    b: f64,
}

pub fn affine_reference(a: &[f64], b: f64) -> Result<Affine> {
    if a.is_empty() || a.iter().chain([&b]).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("affine coefficients must be finite and non-empty".into()));
    }
    Ok(Affine { a: a.to_vec(), b })
}

impl ExactSolution for Affine {
    fn name(&self) -> &str {
        "affine"
    }

    fn validity(&self) -> &str {
        "everywhere, every p"
    }

    fn value(&self, x: &[f64], _t: f64) -> f64 {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + self.b
    }

    fn jet(&self, x: &[f64], _t: f64) -> Result<Jet> {
        let n = x.len();
        if n != self.a.len() {
            return Err(Error::Dimension(format!(
                "affine solution has {} coefficients, point has {n}",
                self.a.len()
            )));
        }
        Jet::new(DVector::from_column_slice(&self.a), DMatrix::zeros(n, n))
    }

    fn time_derivative(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }
}
