//! Pointwise second-order algebra.
//!
//! A [`Jet`] holds the spatial gradient `g = Du` and the symmetric Hessian
//! `H = D²u` at one space-time point. Everything here is a pure function of
//! `(g, H, p, s, ε)`. Inequalities are returned as signed margins
//! (`lhs - rhs`, expected `>= 0`) so that tolerances live with the caller.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gradients with `|g|` below this are treated as zero by the normalized
/// quantities (`Δ∞^N`, `D|Du|`, `D_T|Du|`).
pub const ZERO_GRADIENT: f64 = 1e-14;

/// Growth exponent `p`, scaling exponent `s` and regularization `ε`.
///
/// `s` may be any real so that sweeps can cross the threshold `s = -1`;
/// operations that need `s > -1` check it themselves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub s: f64,
    pub eps: f64,
}

impl Params {
    pub fn new(p: f64, s: f64, eps: f64) -> Result<Self> {
        if !(p.is_finite() && s.is_finite() && eps.is_finite()) {
            return Err(Error::NonFinite("params"));
        }
        if p <= 1.0 {
            return Err(Error::InvalidParams(format!("p must exceed 1, got {p}")));
        }
        if eps < 0.0 {
            return Err(Error::InvalidParams(format!("eps must be >= 0, got {eps}")));
        }
        Ok(Self { p, s, eps })
    }

    /// Same `p` and `ε` with a different `s`.
    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// Fails unless `s > -1`, where the second-order estimates hold.
    pub fn require_estimate_range(&self) -> Result<()> {
        if self.s > -1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "s must exceed -1 for this estimate, got {}",
                self.s
            )))
        }
    }

    /// `(p - 2 + s) / 2`, the exponent of `|Du|` in `V_s`.
    pub fn vs_exponent(&self) -> f64 {
        0.5 * (self.p - 2.0 + self.s)
    }
}

/// Gradient and symmetric Hessian at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    g: DVector<f64>,
    h: DMatrix<f64>,
}

impl Jet {
    pub fn new(g: DVector<f64>, h: DMatrix<f64>) -> Result<Self> {
        let n = g.len();
        if n == 0 {
            return Err(Error::Dimension("jet dimension must be >= 1".into()));
        }
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::Dimension(format!(
                "hessian is {}x{}, gradient has {n} components",
                h.nrows(),
                h.ncols()
            )));
        }
        if g.iter().chain(h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("jet"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if h[(i, j)] != h[(j, i)] {
                    return Err(Error::InvalidParams(format!(
                        "hessian not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { g, h })
    }

    /// Builds a jet from a gradient slice and a row-major Hessian slice.
    pub fn from_slices(g: &[f64], h_row_major: &[f64]) -> Result<Self> {
        let n = g.len();
        if h_row_major.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} hessian entries, got {}",
                n * n,
                h_row_major.len()
            )));
        }
        Self::new(
            DVector::from_column_slice(g),
            DMatrix::from_row_slice(n, n, h_row_major),
        )
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.g.norm_squared()
    }

    pub fn grad_norm(&self) -> f64 {
        self.g.norm()
    }

    pub fn has_zero_gradient(&self) -> bool {
        self.grad_norm() < ZERO_GRADIENT
    }

    /// Frobenius norm squared `|D²u|²`.
    pub fn hessian_norm_sq(&self) -> f64 {
        self.h.norm_squared()
    }

    /// `D²u Du`.
    pub fn hess_grad(&self) -> DVector<f64> {
        &self.h * &self.g
    }

    /// `Δu = tr D²u`.
    pub fn laplacian(&self) -> f64 {
        self.h.trace()
    }

    /// `Δ∞u = <D²u Du, Du>`.
    pub fn inf_laplacian(&self) -> f64 {
        self.hess_grad().dot(&self.g)
    }

    /// `Δ∞u / |Du|²`, zero where `Du = 0`.
    pub fn normalized_inf_laplacian(&self) -> f64 {
        if self.has_zero_gradient() {
            0.0
        } else {
            self.inf_laplacian() / self.grad_norm_sq()
        }
    }

    /// `D|Du| = D²u Du / |Du|`, zero where `Du = 0`.
    pub fn grad_norm_gradient(&self) -> DVector<f64> {
        if self.has_zero_gradient() {
            DVector::zeros(self.dim())
        } else {
            self.hess_grad() / self.grad_norm()
        }
    }

    /// Component of `D|Du|` orthogonal to `Du` (tangential to the level sets).
    pub fn tangential_part(&self) -> DVector<f64> {
        if self.has_zero_gradient() {
            return DVector::zeros(self.dim());
        }
        let unit = &self.g / self.grad_norm();
        self.grad_norm_gradient() - unit * self.normalized_inf_laplacian()
    }

    /// `div(|Du|^{p-2} Du)` expanded on the jet:
    /// `|Du|^{p-2} (Δu + (p-2) Δ∞^N u)`.
    pub fn p_laplacian(&self, p: f64) -> Result<f64> {
        if self.has_zero_gradient() {
            return if p > 2.0 {
                Ok(0.0)
            } else if p == 2.0 {
                Ok(self.laplacian())
            } else {
                Err(Error::Singular("p-Laplacian with p < 2 at Du = 0".into()))
            };
        }
        Ok(self.grad_norm().powf(p - 2.0)
            * (self.laplacian() + (p - 2.0) * self.normalized_inf_laplacian()))
    }
}

fn check_finite(z: &[f64]) -> Result<()> {
    if z.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("vector argument"))
    }
}

/// `V_s(z) = |z|^{(p-2+s)/2} z`, with `V_s(0) = 0`.
pub fn v_s(z: &[f64], params: &Params) -> Result<Vec<f64>> {
    check_finite(z)?;
    let norm_sq: f64 = z.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return Ok(vec![0.0; z.len()]);
    }
    let factor = norm_sq.powf(0.5 * params.vs_exponent());
    Ok(z.iter().map(|v| factor * v).collect())
}

/// `V^ε_s(z) = (|z|² + ε)^{(p-2+s)/4} z`.
pub fn v_s_eps(z: &[f64], params: &Params) -> Result<Vec<f64>> {
    check_finite(z)?;
    let mu_sq: f64 = z.iter().map(|v| v * v).sum::<f64>() + params.eps;
    if mu_sq == 0.0 {
        return Ok(vec![0.0; z.len()]);
    }
    let factor = mu_sq.powf(0.5 * params.vs_exponent());
    Ok(z.iter().map(|v| factor * v).collect())
}

/// Simple form of the fundamental inequality:
/// `|g|⁴|H|² - 2|g|²|Hg|² + (Δ∞)²`.
pub fn fundamental_margin(jet: &Jet) -> f64 {
    let g2 = jet.grad_norm_sq();
    let hg2 = jet.hess_grad().norm_squared();
    let inf = jet.inf_laplacian();
    g2 * g2 * jet.hessian_norm_sq() - 2.0 * g2 * hg2 + inf * inf
}

/// Full fundamental inequality, additionally subtracting
/// `(|g|²Δu - Δ∞)² / (n-1)`. Needs `n >= 2`.
pub fn full_fundamental_margin(jet: &Jet) -> Result<f64> {
    let n = jet.dim();
    if n < 2 {
        return Err(Error::Dimension(
            "full fundamental inequality needs n >= 2".into(),
        ));
    }
    let trace_term = jet.grad_norm_sq() * jet.laplacian() - jet.inf_laplacian();
    Ok(fundamental_margin(jet) - trace_term * trace_term / (n as f64 - 1.0))
}

/// `|D²u|² - 2|D_T|Du||² - (Δ∞^N u)²`.
pub fn trivial_inequality_margin(jet: &Jet) -> f64 {
    let normalized = jet.normalized_inf_laplacian();
    jet.hessian_norm_sq() - 2.0 * jet.tangential_part().norm_squared() - normalized * normalized
}

fn mu_sq(jet: &Jet, params: &Params) -> Result<f64> {
    let mu_sq = jet.grad_norm_sq() + params.eps;
    if mu_sq == 0.0 {
        Err(Error::Singular("mu = 0 (zero gradient with eps = 0)".into()))
    } else {
        Ok(mu_sq)
    }
}

/// Coefficient matrix `A = I + (p-2) g⊗g / μ²` of the linearized regularized operator.
pub fn ellipticity_matrix(jet: &Jet, params: &Params) -> Result<DMatrix<f64>> {
    let mu_sq = mu_sq(jet, params)?;
    let n = jet.dim();
    let g = jet.gradient();
    Ok(DMatrix::identity(n, n) + (g * g.transpose()) * ((params.p - 2.0) / mu_sq))
}

/// `σ = |H|² + (p-2+s)|Hg|²/μ² + s(p-2)(Δ∞)²/μ⁴`.
pub fn sigma(jet: &Jet, params: &Params) -> Result<f64> {
    let mu_sq = mu_sq(jet, params)?;
    let Params { p, s, .. } = *params;
    let inf = jet.inf_laplacian();
    Ok(jet.hessian_norm_sq()
        + (p - 2.0 + s) * jet.hess_grad().norm_squared() / mu_sq
        + s * (p - 2.0) * inf * inf / (mu_sq * mu_sq))
}

/// Lower bound `τ <= σ` split by powers of `ε` (with `a = |g|²/μ²`, `b = ε/μ²`):
///
/// `τ = ((p+s)a² + (p+s+2)ab + 2b²)|D_T|Du||² + ((p-1)(s+1)a² + (p+s)ab + b²)(Δ∞^N)²`.
pub fn tau(jet: &Jet, params: &Params) -> Result<f64> {
    let mu_sq = mu_sq(jet, params)?;
    let Params { p, s, eps } = *params;
    let a = jet.grad_norm_sq() / mu_sq;
    let b = eps / mu_sq;
    let tangential = jet.tangential_part().norm_squared();
    let normalized = jet.normalized_inf_laplacian();
    let tangential_coeff = (p + s) * a * a + (p + s + 2.0) * a * b + 2.0 * b * b;
    let normal_coeff = (p - 1.0) * (s + 1.0) * a * a + (p + s) * a * b + b * b;
    Ok(tangential_coeff * tangential + normal_coeff * normalized * normalized)
}

/// `λ(p, s) = ½ min{(p+s)/2, (p-1)(s+1), 1}`.
pub fn lambda_of(params: &Params) -> Result<f64> {
    params.require_estimate_range()?;
    let Params { p, s, .. } = *params;
    Ok(0.5 * (0.5 * (p + s)).min((p - 1.0) * (s + 1.0)).min(1.0))
}

/// `η(p, s) = min{(p+s)/4, (p-1)(s+1)/6}`.
pub fn eta_of(params: &Params) -> Result<f64> {
    params.require_estimate_range()?;
    let Params { p, s, .. } = *params;
    Ok((0.25 * (p + s)).min((p - 1.0) * (s + 1.0) / 6.0))
}

/// `σ - λ(p,s)|H|²`.
pub fn sigma_lower_bound_margin(jet: &Jet, params: &Params) -> Result<f64> {
    let lambda = lambda_of(params)?;
    Ok(sigma(jet, params)? - lambda * jet.hessian_norm_sq())
}

/// `[|H|² + (p-2+s-η)|D|Du||² + (s(p-2)-η)(Δ∞^N)²] - η|D|Du||²` with `η = η(p,s)`.
pub fn smo_esti_margin(jet: &Jet, params: &Params) -> Result<f64> {
    if jet.has_zero_gradient() {
        return Err(Error::Singular("smo_esti margin needs Du != 0".into()));
    }
    let eta = eta_of(params)?;
    let Params { p, s, .. } = *params;
    let grad_norm_grad = jet.grad_norm_gradient().norm_squared();
    let normalized = jet.normalized_inf_laplacian();
    let bracket = jet.hessian_norm_sq()
        + (p - 2.0 + s - eta) * grad_norm_grad
        + (s * (p - 2.0) - eta) * normalized * normalized;
    Ok(bracket - eta * grad_norm_grad)
}

/// Shared body of `D V_s` and `D V^ε_s`: `weight^α (H + α g (Hg)ᵀ / weight²)`.
fn chain_rule_matrix(jet: &Jet, alpha: f64, weight_sq: f64) -> DMatrix<f64> {
    let hg = jet.hess_grad();
    let g = jet.gradient();
    let inner = jet.hessian() + (g * hg.transpose()) * (alpha / weight_sq);
    inner * weight_sq.powf(0.5 * alpha)
}

/// Spatial derivative of `V_s(Du)`: entry `(i, j)` is `∂_j (|Du|^α u_{x_i})` with
/// `α = (p-2+s)/2`.
///
/// `α = 0` returns `H` for every jet. Otherwise `Du = 0` gives the zero matrix when
/// `α > 0` and is singular when `α < 0`. Only an exactly zero gradient takes the
/// zero branch: the expression is homogeneous in `(g, H)` and stays accurate for
/// tiny gradients.
pub fn d_vs_matrix(jet: &Jet, params: &Params) -> Result<DMatrix<f64>> {
    let alpha = params.vs_exponent();
    if alpha == 0.0 {
        return Ok(jet.hessian().clone());
    }
    let g2 = jet.grad_norm_sq();
    if g2 == 0.0 {
        return if alpha > 0.0 {
            Ok(DMatrix::zeros(jet.dim(), jet.dim()))
        } else {
            Err(Error::Singular(format!(
                "D V_s at Du = 0 with p - 2 + s = {} <= 0",
                2.0 * alpha
            )))
        };
    }
    Ok(chain_rule_matrix(jet, alpha, g2))
}

/// Spatial derivative of `V^ε_s(Du)`: `μ^α (H + α g (Hg)ᵀ / μ²)`.
pub fn d_vs_eps_matrix(jet: &Jet, params: &Params) -> Result<DMatrix<f64>> {
    let alpha = params.vs_exponent();
    if alpha == 0.0 {
        return Ok(jet.hessian().clone());
    }
    let mu_sq = jet.grad_norm_sq() + params.eps;
    if mu_sq == 0.0 {
        return d_vs_matrix(jet, params);
    }
    Ok(chain_rule_matrix(jet, alpha, mu_sq))
}

/// Explicit constant for `|D V_s(Du)|² <= C |Du|^{p-2+s} |D²u|²`:
/// `C = (1 + |p-2+s|/2)²`.
pub fn dvs_bound_constant(params: &Params) -> f64 {
    let c = 1.0 + params.vs_exponent().abs();
    c * c
}
