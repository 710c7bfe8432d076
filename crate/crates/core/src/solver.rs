//! Time stepping for the regularized problem
//! `u_t = div(μ^{p-2} Du)`, `μ = sqrt(|Du|² + ε)`, with Dirichlet data on the
//! parabolic boundary.
//!
//! Space is discretized conservatively: fluxes live on the faces between
//! neighbouring nodes, with the normal derivative from the two adjacent nodes and
//! the transverse derivative averaged from central differences on both sides.
//! Only the normal flux enters the divergence; the transverse part only feeds `μ`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::grid::{gradient, integrate_all, time_deriv, ScalarField, SpaceTimeGrid};
use crate::jet::Params;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    ImplicitPicard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub params: Params,
    pub grid: SpaceTimeGrid,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// History length of Anderson mixing on the Picard map; 0 is plain Picard.
    pub anderson_depth: usize,
    pub linear_tol: f64,
}

impl SolverConfig {
    pub fn new(params: Params, grid: SpaceTimeGrid, scheme: Scheme) -> Self {
        Self {
            params,
            grid,
            scheme,
            cfl_safety: 0.2,
            picard_tol: 1e-8,
            picard_max_iters: 50,
            anderson_depth: 5,
            linear_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.picard_tol > 0.0) || !(self.linear_tol > 0.0) || self.picard_max_iters == 0 {
            return Err(Error::InvalidParams(
                "picard_tol, linear_tol and picard_max_iters must be positive".into(),
            ));
        }
        // μ^{p-2} is unbounded at Du = 0 when p < 2 unless ε > 0.
        if self.params.p < 2.0 && self.params.eps <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "p = {} < 2 needs eps > 0 for a bounded diffusion coefficient",
                self.params.p
            )));
        }
        Ok(())
    }
}

/// Values of `u` on the parabolic boundary (lateral boundary nodes and the initial slice).
pub trait BoundaryData {
    fn boundary_value(&self, x: &[f64], t: f64) -> f64;
}

impl<T: ExactSolution + ?Sized> BoundaryData for T {
    fn boundary_value(&self, x: &[f64], t: f64) -> f64 {
        ExactSolution::value(self, x, t)
    }
}

/// Boundary data from a closure.
pub struct FnBoundary<F>(pub F);

impl<F: Fn(&[f64], f64) -> f64> BoundaryData for FnBoundary<F> {
    fn boundary_value(&self, x: &[f64], t: f64) -> f64 {
        (self.0)(x, t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    /// Explicit sub-steps taken to respect the CFL bound (1 for implicit steps).
    pub substeps: usize,
    pub min_substep: f64,
    pub picard_iterations: usize,
    pub picard_converged: bool,
    pub linear_iterations: usize,
    pub max_update: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: ScalarField,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Solution {
    /// Steps whose Picard iteration hit `picard_max_iters` without converging.
    pub fn picard_warnings(&self) -> usize {
        self.diagnostics.iter().filter(|d| !d.picard_converged).count()
    }
}

fn interior_nodes(grid: &SpaceTimeGrid) -> Vec<usize> {
    (0..grid.nodes_per_level())
        .filter(|&i| !grid.is_boundary_node(i))
        .collect()
}

fn boundary_nodes(grid: &SpaceTimeGrid) -> Vec<usize> {
    (0..grid.nodes_per_level())
        .filter(|&i| grid.is_boundary_node(i))
        .collect()
}

/// Face coefficient `μ^{p-2}`; `μ = 0` gives 0 for `p > 2` (and only occurs then).
fn diffusivity(grad_sq: f64, params: &Params) -> f64 {
    if params.p == 2.0 {
        return 1.0;
    }
    let mu_sq = grad_sq + params.eps;
    if mu_sq == 0.0 {
        0.0
    } else {
        mu_sq.powf(0.5 * (params.p - 2.0))
    }
}

/// Face data for one level: for each axis, indexed by the lower node of the face.
/// Only faces touching an interior node are filled.
struct Faces {
    /// `(normal difference quotient, coefficient)` per face.
    axis: Vec<Vec<(f64, f64)>>,
}

fn faces(grid: &SpaceTimeGrid, level: &[f64], params: &Params) -> Faces {
    let n = grid.n_dim();
    let nx = grid.nx();
    let npl = grid.nodes_per_level();
    let mut axis_faces = Vec::with_capacity(n);
    for a in 0..n {
        let stride = grid.stride(a);
        let h = grid.h(a);
        let mut data = vec![(0.0, 0.0); npl];
        for (idx, slot) in data.iter_mut().enumerate() {
            let m = grid.multi_index(idx);
            if m[a] + 1 >= nx {
                continue;
            }
            let b = 1 - a;
            if n == 2 && (m[b] == 0 || m[b] == nx - 1) {
                continue;
            }
            let nb = idx + stride;
            let normal = (level[nb] - level[idx]) / h;
            let mut grad_sq = normal * normal;
            if n == 2 {
                let ts = grid.stride(b);
                let tangential = ((level[idx + ts] - level[idx - ts])
                    + (level[nb + ts] - level[nb - ts]))
                    / (4.0 * grid.h(b));
                grad_sq += tangential * tangential;
            }
            *slot = (normal, diffusivity(grad_sq, params));
        }
        axis_faces.push(data);
    }
    Faces { axis: axis_faces }
}

/// Conservative `div_h(μ^{p-2} ∇_h u)` at interior nodes (0 on the boundary band).
/// Also returns the largest face coefficient.
fn divergence_with_max(
    grid: &SpaceTimeGrid,
    level: &[f64],
    params: &Params,
) -> Result<(Vec<f64>, f64)> {
    let faces = faces(grid, level, params);
    let mut div = vec![0.0; level.len()];
    let mut max_coeff: f64 = 0.0;
    for idx in interior_nodes(grid) {
        let mut acc = 0.0;
        for (a, data) in faces.axis.iter().enumerate() {
            let stride = grid.stride(a);
            let (up_normal, up_c) = data[idx];
            let (down_normal, down_c) = data[idx - stride];
            let up = up_c * up_normal;
            let down = down_c * down_normal;
            if !up.is_finite() || !down.is_finite() {
                let bad = if up.is_finite() { idx - stride } else { idx };
                return Err(Error::Numerical(format!(
                    "non-finite flux on the axis-{a} face between nodes {bad} and {}",
                    bad + stride
                )));
            }
            max_coeff = max_coeff.max(up_c).max(down_c);
            acc += (up - down) / grid.h(a);
        }
        div[idx] = acc;
    }
    Ok((div, max_coeff))
}

/// `div_h(μ^{p-2} ∇_h u)` for one level, zero on the boundary band.
pub fn flux_divergence(grid: &SpaceTimeGrid, level: &[f64], params: &Params) -> Result<Vec<f64>> {
    divergence_with_max(grid, level, params).map(|(d, _)| d)
}

fn set_boundary(grid: &SpaceTimeGrid, level: &mut [f64], t: f64, boundary: &dyn BoundaryData) -> Result<()> {
    for idx in boundary_nodes(grid) {
        let v = boundary.boundary_value(&grid.position(idx), t);
        if !v.is_finite() {
            return Err(Error::NonFinite("boundary data"));
        }
        level[idx] = v;
    }
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Result of one time step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub level: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

/// Forward Euler over one grid time step, sub-stepped when
/// `dt > cfl_safety · h² / (2n · max{1, p-1} · max_faces μ^{p-2})`.
pub fn step_explicit(
    level: &[f64],
    t: f64,
    config: &SolverConfig,
    boundary: &dyn BoundaryData,
) -> Result<StepOutcome> {
    let grid = &config.grid;
    let params = &config.params;
    let n = grid.n_dim() as f64;
    let h_min = grid.min_h();
    let interior = interior_nodes(grid);

    let mut current = level.to_vec();
    let mut remaining = grid.dt();
    let mut time = t;
    let mut substeps = 0;
    let mut min_substep = f64::INFINITY;
    while remaining > 0.0 {
        let (div, max_coeff) = divergence_with_max(grid, &current, params)?;
        let limit = if max_coeff > 0.0 {
            config.cfl_safety * h_min * h_min / (2.0 * n * (params.p - 1.0).max(1.0) * max_coeff)
        } else {
            f64::INFINITY
        };
        let step = if remaining <= limit * (1.0 + 1e-12) { remaining } else { limit };
        for &idx in &interior {
            current[idx] += step * div[idx];
            if !current[idx].is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite explicit update at node {idx}, t = {}",
                    time + step
                )));
            }
        }
        remaining = if step == remaining { 0.0 } else { remaining - step };
        time += step;
        set_boundary(grid, &mut current, time, boundary)?;
        substeps += 1;
        min_substep = min_substep.min(step);
    }
    set_boundary(grid, &mut current, t + grid.dt(), boundary)?;
    let max_update = max_abs_diff(&current, level);
    Ok(StepOutcome {
        level: current,
        diagnostics: StepDiagnostics {
            step: 0,
            t: t + grid.dt(),
            substeps,
            min_substep,
            picard_iterations: 0,
            picard_converged: true,
            linear_iterations: 0,
            max_update,
        },
    })
}

/// Frozen-coefficient operator `I - dt · div_h(c ∇_h ·)` on interior unknowns.
struct LinearSystem<'a> {
    grid: &'a SpaceTimeGrid,
    faces: Faces,
    interior: &'a [usize],
    is_interior: Vec<bool>,
    dt: f64,
    diag: Vec<f64>,
}

impl<'a> LinearSystem<'a> {
    fn new(grid: &'a SpaceTimeGrid, faces: Faces, interior: &'a [usize], dt: f64) -> Self {
        let npl = grid.nodes_per_level();
        let mut is_interior = vec![false; npl];
        for &i in interior {
            is_interior[i] = true;
        }
        let mut diag = vec![1.0; npl];
        for &idx in interior {
            let mut d = 1.0;
            for (a, data) in faces.axis.iter().enumerate() {
                let h2 = grid.h(a) * grid.h(a);
                d += dt * (data[idx].1 + data[idx - grid.stride(a)].1) / h2;
            }
            diag[idx] = d;
        }
        Self { grid, faces, interior, is_interior, dt, diag }
    }

    /// Coupling `dt · c / h²` and neighbour index for each face of `idx`.
    fn couplings(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.faces.axis.iter().enumerate().flat_map(move |(a, data)| {
            let stride = self.grid.stride(a);
            let h2 = self.grid.h(a) * self.grid.h(a);
            [
                (idx + stride, self.dt * data[idx].1 / h2),
                (idx - stride, self.dt * data[idx - stride].1 / h2),
            ]
        })
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for &idx in self.interior {
            let mut v = self.diag[idx] * x[idx];
            for (nb, w) in self.couplings(idx) {
                if self.is_interior[nb] {
                    v -= w * x[nb];
                }
            }
            out[idx] = v;
        }
    }

    /// `u^k` plus boundary couplings moved to the right-hand side.
    fn rhs(&self, previous: &[f64], boundary_level: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; previous.len()];
        for &idx in self.interior {
            let mut v = previous[idx];
            for (nb, w) in self.couplings(idx) {
                if !self.is_interior[nb] {
                    v += w * boundary_level[nb];
                }
            }
            b[idx] = v;
        }
        b
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.interior.iter().map(|&i| a[i] * b[i]).sum()
    }

    /// Jacobi-preconditioned conjugate gradients; `x` holds the initial guess.
    fn solve(&self, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let len = b.len();
        let b_norm = self.dot(b, b).sqrt();
        if b_norm == 0.0 {
            for &i in self.interior {
                x[i] = 0.0;
            }
            return Ok(0);
        }
        let mut ax = vec![0.0; len];
        self.apply(x, &mut ax);
        let mut r = vec![0.0; len];
        let mut z = vec![0.0; len];
        for &i in self.interior {
            r[i] = b[i] - ax[i];
            z[i] = r[i] / self.diag[i];
        }
        let mut p = z.clone();
        let mut rz = self.dot(&r, &z);
        let mut ap = vec![0.0; len];
        let max_iters = 10 * self.interior.len() + 100;
        for it in 0..max_iters {
            if self.dot(&r, &r).sqrt() <= tol * b_norm {
                return Ok(it);
            }
            self.apply(&p, &mut ap);
            let pap = self.dot(&p, &ap);
            if !(pap > 0.0) || !pap.is_finite() {
                return Err(Error::Numerical(format!(
                    "conjugate gradient breakdown at iteration {it} (pAp = {pap})"
                )));
            }
            let alpha = rz / pap;
            for &i in self.interior {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                z[i] = r[i] / self.diag[i];
            }
            let rz_next = self.dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for &i in self.interior {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Numerical(format!(
            "conjugate gradient did not reach relative residual {tol} in {max_iters} iterations"
        )))
    }
}

/// Anderson mixing for the fixed-point map `u -> G(u)`: the next iterate is
/// `G(u_k) - ΔG γ` with `γ` minimizing `|f_k - ΔF γ|₂`, `f = G(u) - u`.
struct Anderson {
    depth: usize,
    last: Option<(Vec<f64>, Vec<f64>)>,
    df: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self { depth, last: None, df: VecDeque::new(), dg: VecDeque::new() }
    }

    fn next(&mut self, iterate: &[f64], image: Vec<f64>) -> Vec<f64> {
        if self.depth == 0 {
            return image;
        }
        let f: Vec<f64> = image.iter().zip(iterate).map(|(g, u)| g - u).collect();
        if let Some((last_f, last_g)) = self.last.take() {
            self.df.push_back(f.iter().zip(&last_f).map(|(a, b)| a - b).collect());
            self.dg.push_back(image.iter().zip(&last_g).map(|(a, b)| a - b).collect());
            if self.df.len() > self.depth {
                self.df.pop_front();
                self.dg.pop_front();
            }
        }
        let mut mixed = image.clone();
        if !self.df.is_empty() {
            let m = self.df.len();
            let df = DMatrix::from_fn(f.len(), m, |i, j| self.df[j][i]);
            let rhs = DVector::from_column_slice(&f);
            if let Ok(gamma) = df.svd(true, true).solve(&rhs, 1e-12) {
                if gamma.iter().all(|g| g.is_finite()) {
                    for (j, dg) in self.dg.iter().enumerate() {
                        for (x, d) in mixed.iter_mut().zip(dg) {
                            *x -= gamma[j] * d;
                        }
                    }
                }
            }
        }
        self.last = Some((f, image));
        mixed
    }
}

/// Backward Euler with lagged diffusivity: coefficients are frozen at the
/// previous Picard iterate and the SPD system is solved by conjugate gradients;
/// the fixed-point loop is accelerated by Anderson mixing.
/// Non-convergence of the Picard loop is flagged in the diagnostics.
pub fn step_implicit_picard(
    level: &[f64],
    t: f64,
    config: &SolverConfig,
    boundary: &dyn BoundaryData,
) -> Result<StepOutcome> {
    let grid = &config.grid;
    let params = &config.params;
    let dt = grid.dt();
    let interior = interior_nodes(grid);

    let mut iterate = level.to_vec();
    set_boundary(grid, &mut iterate, t + dt, boundary)?;
    let boundary_level = iterate.clone();

    let linear_only = params.p == 2.0;
    let mut picard_iterations = 0;
    let mut converged = false;
    let mut linear_iterations = 0;
    let mut mixing = Anderson::new(config.anderson_depth);
    while picard_iterations < config.picard_max_iters {
        let system = LinearSystem::new(grid, faces(grid, &iterate, params), &interior, dt);
        let b = system.rhs(level, &boundary_level);
        let mut image = iterate.clone();
        linear_iterations += system.solve(&b, &mut image, config.linear_tol)?;
        picard_iterations += 1;
        let change = max_abs_diff(&image, &iterate);
        if linear_only || change < config.picard_tol {
            iterate = image;
            converged = true;
            break;
        }
        iterate = mixing.next(&iterate, image);
    }
    let max_update = max_abs_diff(&iterate, level);
    Ok(StepOutcome {
        level: iterate,
        diagnostics: StepDiagnostics {
            step: 0,
            t: t + dt,
            substeps: 1,
            min_substep: dt,
            picard_iterations,
            picard_converged: converged,
            linear_iterations,
            max_update,
        },
    })
}

/// Marches from the initial slice at `t_start` through every grid level.
pub fn solve(config: &SolverConfig, boundary: &dyn BoundaryData) -> Result<Solution> {
    config.validate()?;
    let grid = &config.grid;
    let npl = grid.nodes_per_level();
    let mut values = Vec::with_capacity(grid.node_count());
    let mut level: Vec<f64> = (0..npl)
        .map(|idx| boundary.boundary_value(&grid.position(idx), grid.t_start()))
        .collect();
    if level.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial data"));
    }
    values.extend_from_slice(&level);
    let mut diagnostics = Vec::with_capacity(grid.nt() - 1);
    for k in 0..grid.nt() - 1 {
        let t = grid.time(k);
        let outcome = match config.scheme {
            Scheme::Explicit => step_explicit(&level, t, config, boundary)?,
            Scheme::ImplicitPicard => step_implicit_picard(&level, t, config, boundary)?,
        };
        let mut diag = outcome.diagnostics;
        diag.step = k + 1;
        diagnostics.push(diag);
        level = outcome.level;
        values.extend_from_slice(&level);
    }
    Ok(Solution {
        field: ScalarField::from_values(grid.clone(), values)?,
        diagnostics,
    })
}

/// Quadrature of `∫∫ μ^{p-2} <Du, Dφ> - u φ_t dx dt` over the whole grid, with
/// `μ² = |Du|² + ε` (`ε = 0` gives the unregularized weak form). Vanishes for
/// exact solutions when `φ` is compactly supported in the grid interior.
pub fn weak_form_residual(u: &ScalarField, phi: &ScalarField, params: &Params) -> Result<f64> {
    if u.grid() != phi.grid() {
        return Err(Error::Dimension("u and phi live on different grids".into()));
    }
    let grid = u.grid();
    let du = gradient(u);
    let dphi = gradient(phi);
    let phi_t = time_deriv(phi);
    Ok(integrate_all(grid, |k, idx| {
        let g = du.at(k, idx);
        let gp = dphi.at(k, idx);
        let grad_sq: f64 = g.iter().map(|v| v * v).sum();
        let inner: f64 = g.iter().zip(gp).map(|(a, b)| a * b).sum();
        let flux_term = if inner == 0.0 { 0.0 } else { diffusivity(grad_sq, params) * inner };
        flux_term - u.value(k, idx) * phi_t.value(k, idx)
    }))
}
