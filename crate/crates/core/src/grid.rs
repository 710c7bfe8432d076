//! Structured space-time grids, finite-difference jets, masked quadrature and cutoffs.
//!
//! Spatial nodes are cell centers: along each axis node `i` sits at
//! `lower + (i + ½) h` with `h = (upper - lower) / nx`. Time levels are
//! `t_k = t_start + k dt` with `dt = (t_end - t_start) / (nt - 1)`. Values are
//! stored level-major, and within a level with axis 0 varying fastest.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub const MIN_CELLS: usize = 8;
pub const MIN_LEVELS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    n_dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nx: usize,
    h: Vec<f64>,
    t_start: f64,
    t_end: f64,
    nt: usize,
    dt: f64,
}

impl SpaceTimeGrid {
    pub fn new(
        lower: &[f64],
        upper: &[f64],
        nx: usize,
        t_start: f64,
        t_end: f64,
        nt: usize,
    ) -> Result<Self> {
        let n_dim = lower.len();
        if !(1..=2).contains(&n_dim) || upper.len() != n_dim {
            return Err(Error::Grid(format!(
                "spatial dimension must be 1 or 2 with matching bounds, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if nx < MIN_CELLS {
            return Err(Error::Grid(format!("nx must be >= {MIN_CELLS}, got {nx}")));
        }
        if nt < MIN_LEVELS {
            return Err(Error::Grid(format!("nt must be >= {MIN_LEVELS}, got {nt}")));
        }
        let all = lower.iter().chain(upper).chain([&t_start, &t_end]);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid bounds"));
        }
        if lower.iter().zip(upper).any(|(lo, hi)| hi <= lo) || t_end <= t_start {
            return Err(Error::Grid("empty extent".into()));
        }
        let h = lower
            .iter()
            .zip(upper)
            .map(|(lo, hi)| (hi - lo) / nx as f64)
            .collect();
        Ok(Self {
            n_dim,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            nx,
            h,
            t_start,
            t_end,
            nt,
            dt: (t_end - t_start) / (nt - 1) as f64,
        })
    }

    /// Square 2D grid `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, nx: usize, t_start: f64, t_end: f64, nt: usize) -> Result<Self> {
        Self::new(&[lo, lo], &[hi, hi], nx, t_start, t_end, nt)
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn nodes_per_level(&self) -> usize {
        self.nx.pow(self.n_dim as u32)
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_level() * self.nt
    }

    /// Quadrature weight of one space-time cell, `h^n dt`.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product::<f64>() * self.dt
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.h[axis]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    /// Per-axis indices of a spatial node.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.n_dim == 1 {
            [idx, 0]
        } else {
            [idx % self.nx, idx / self.nx]
        }
    }

    pub fn linear_index(&self, multi: [usize; 2]) -> usize {
        if self.n_dim == 1 {
            multi[0]
        } else {
            multi[0] + self.nx * multi[1]
        }
    }

    /// Offset between neighbours along `axis` in a level array.
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.nx
        }
    }

    /// Coordinates of a spatial node (length `n_dim`).
    pub fn position(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.n_dim).map(|a| self.coord(a, m[a])).collect()
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.n_dim).any(|a| m[a] == 0 || m[a] == self.nx - 1)
    }

    /// Fails unless the closed cylinder lies within the box spanned by the
    /// interior nodes and inside the time window.
    pub fn check_cylinder_inside(&self, cyl: &Cylinder) -> Result<()> {
        if cyl.x0.len() != self.n_dim {
            return Err(Error::Geometry(format!(
                "cylinder center has {} coordinates on a {}-dimensional grid",
                cyl.x0.len(),
                self.n_dim
            )));
        }
        for axis in 0..self.n_dim {
            let lo = self.coord(axis, 1);
            let hi = self.coord(axis, self.nx - 2);
            if cyl.x0[axis] - cyl.r < lo || cyl.x0[axis] + cyl.r > hi {
                return Err(Error::Geometry(format!(
                    "ball of radius {} around {:?} leaves the interior along axis {axis}",
                    cyl.r, cyl.x0
                )));
            }
        }
        let half = cyl.half_time();
        if cyl.t0 - half < self.t_start || cyl.t0 + half > self.t_end {
            return Err(Error::Geometry(format!(
                "time interval ({}, {}) leaves [{}, {}]",
                cyl.t0 - half,
                cyl.t0 + half,
                self.t_start,
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Parabolic cylinder `Q_r(x0, t0) = B_r(x0) × (t0 - r², t0 + r²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub x0: Vec<f64>,
    pub t0: f64,
    pub r: f64,
}

impl Cylinder {
    pub fn new(x0: &[f64], t0: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Geometry(format!("radius must be positive, got {r}")));
        }
        if x0.iter().any(|v| !v.is_finite()) || !t0.is_finite() {
            return Err(Error::NonFinite("cylinder"));
        }
        Ok(Self { x0: x0.to_vec(), t0, r })
    }

    /// Same center, radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { r: self.r * factor, ..self.clone() }
    }

    pub fn half_time(&self) -> f64 {
        self.r * self.r
    }

    pub fn spatial_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Open-set membership test.
    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        (t - self.t0).abs() < self.half_time() && self.spatial_distance(x) < self.r
    }

    /// Exact measure `|B_r| · 2r²` (n = 1 or 2).
    pub fn volume(&self) -> f64 {
        let ball = match self.x0.len() {
            1 => 2.0 * self.r,
            2 => std::f64::consts::PI * self.r * self.r,
            n => panic!("unsupported dimension {n}"),
        };
        ball * 2.0 * self.half_time()
    }
}

/// Scalar samples on every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Dimension(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, t)` at every node.
    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let npl = grid.nodes_per_level();
        let positions: Vec<Vec<f64>> = (0..npl).map(|i| grid.position(i)).collect();
        let mut values = Vec::with_capacity(grid.node_count());
        for k in 0..grid.nt() {
            let t = grid.time(k);
            values.extend(positions.iter().map(|x| f(x, t)));
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let npl = self.grid.nodes_per_level();
        &self.values[k * npl..(k + 1) * npl]
    }

    pub fn value(&self, k: usize, idx: usize) -> f64 {
        self.values[k * self.grid.nodes_per_level() + idx]
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Writes one CSV row per node: coordinates, time, value. `level = None`
    /// writes every level.
    pub fn write_csv<W: Write>(&self, writer: W, level: Option<usize>) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.grid.n_dim()).map(|a| format!("x{}", a + 1)).collect();
        header.push("t".into());
        header.push("value".into());
        out.write_record(&header)?;
        let levels = match level {
            Some(k) => k..k + 1,
            None => 0..self.grid.nt(),
        };
        for k in levels {
            let t = self.grid.time(k);
            for (idx, v) in self.level(k).iter().enumerate() {
                let mut row: Vec<String> =
                    self.grid.position(idx).iter().map(|x| x.to_string()).collect();
                row.push(t.to_string());
                row.push(v.to_string());
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// First derivative along one grid line: central inside, second-order one-sided at the ends.
fn d1_line(u: &[f64], start: usize, stride: usize, n: usize, h: f64, out: &mut [f64]) {
    let at = |i: usize| u[start + i * stride];
    let inv = 1.0 / (2.0 * h);
    out[start] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv;
    for i in 1..n - 1 {
        out[start + i * stride] = (at(i + 1) - at(i - 1)) * inv;
    }
    out[start + (n - 1) * stride] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv;
}

/// Second derivative along one grid line.
fn d2_line(u: &[f64], start: usize, stride: usize, n: usize, h: f64, out: &mut [f64]) {
    let at = |i: usize| u[start + i * stride];
    let inv = 1.0 / (h * h);
    out[start] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) * inv;
    for i in 1..n - 1 {
        out[start + i * stride] = (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv;
    }
    out[start + (n - 1) * stride] =
        (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) * inv;
}

/// Starting offsets of every grid line along `axis` within one level.
fn line_starts(grid: &SpaceTimeGrid, axis: usize) -> Vec<usize> {
    let nx = grid.nx();
    match (grid.n_dim(), axis) {
        (1, _) => vec![0],
        (_, 0) => (0..nx).map(|j| j * nx).collect(),
        _ => (0..nx).collect(),
    }
}

fn apply_along(
    grid: &SpaceTimeGrid,
    level: &[f64],
    axis: usize,
    op: fn(&[f64], usize, usize, usize, f64, &mut [f64]),
) -> Vec<f64> {
    let mut out = vec![0.0; level.len()];
    let stride = grid.stride(axis);
    for start in line_starts(grid, axis) {
        op(level, start, stride, grid.nx(), grid.h(axis), &mut out);
    }
    out
}

/// Derivative along `axis` of one level array.
pub fn level_derivative(grid: &SpaceTimeGrid, level: &[f64], axis: usize) -> Vec<f64> {
    apply_along(grid, level, axis, d1_line)
}

/// Vector samples (`n_dim` components per node).
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl VectorField {
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn at(&self, k: usize, idx: usize) -> &[f64] {
        let n = self.grid.n_dim();
        let base = (k * self.grid.nodes_per_level() + idx) * n;
        &self.values[base..base + n]
    }
}

/// Symmetric matrix samples (`n_dim²` row-major entries per node).
#[derive(Clone, Debug)]
pub struct MatrixField {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl MatrixField {
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn at(&self, k: usize, idx: usize) -> &[f64] {
        let nn = self.grid.n_dim() * self.grid.n_dim();
        let base = (k * self.grid.nodes_per_level() + idx) * nn;
        &self.values[base..base + nn]
    }
}

/// Discrete spatial gradient: central differences, one-sided at the boundary band.
pub fn gradient(field: &ScalarField) -> VectorField {
    let grid = field.grid().clone();
    let n = grid.n_dim();
    let npl = grid.nodes_per_level();
    let mut values = vec![0.0; grid.node_count() * n];
    for k in 0..grid.nt() {
        for axis in 0..n {
            let d = level_derivative(&grid, field.level(k), axis);
            for (idx, v) in d.into_iter().enumerate() {
                values[(k * npl + idx) * n + axis] = v;
            }
        }
    }
    VectorField { grid, values }
}

/// Discrete spatial Hessian. Mixed entries are the composition of first
/// differences (the 4-point cross stencil in the interior) and are stored
/// symmetrically.
pub fn hessian(field: &ScalarField) -> MatrixField {
    let grid = field.grid().clone();
    let n = grid.n_dim();
    let npl = grid.nodes_per_level();
    let mut values = vec![0.0; grid.node_count() * n * n];
    for k in 0..grid.nt() {
        let level = field.level(k);
        for axis in 0..n {
            let d2 = apply_along(&grid, level, axis, d2_line);
            for (idx, v) in d2.into_iter().enumerate() {
                values[(k * npl + idx) * n * n + axis * n + axis] = v;
            }
        }
        if n == 2 {
            let dx = level_derivative(&grid, level, 0);
            let dxy = level_derivative(&grid, &dx, 1);
            for (idx, v) in dxy.into_iter().enumerate() {
                let base = (k * npl + idx) * 4;
                values[base + 1] = v;
                values[base + 2] = v;
            }
        }
    }
    MatrixField { grid, values }
}

/// Discrete `u_t`: central in time, second-order one-sided at the first and last level.
pub fn time_deriv(field: &ScalarField) -> ScalarField {
    let grid = field.grid().clone();
    let npl = grid.nodes_per_level();
    let nt = grid.nt();
    let inv = 1.0 / (2.0 * grid.dt());
    let mut values = vec![0.0; grid.node_count()];
    for idx in 0..npl {
        let at = |k: usize| field.value(k, idx);
        values[idx] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv;
        for k in 1..nt - 1 {
            values[k * npl + idx] = (at(k + 1) - at(k - 1)) * inv;
        }
        values[(nt - 1) * npl + idx] = (3.0 * at(nt - 1) - 4.0 * at(nt - 2) + at(nt - 3)) * inv;
    }
    ScalarField { grid, values }
}

/// Gradient and Hessian fields bundled for jet extraction.
#[derive(Clone, Debug)]
pub struct JetField {
    pub gradient: VectorField,
    pub hessian: MatrixField,
}

impl JetField {
    pub fn from_field(field: &ScalarField) -> Self {
        Self { gradient: gradient(field), hessian: hessian(field) }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        self.gradient.grid()
    }

    pub fn jet(&self, k: usize, idx: usize) -> Jet {
        let n = self.grid().n_dim();
        let g = DVector::from_column_slice(self.gradient.at(k, idx));
        let h = DMatrix::from_row_slice(n, n, self.hessian.at(k, idx));
        Jet::new(g, h).expect("discrete jets are finite and symmetric by construction")
    }
}

/// Result of a masked midpoint quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    /// Number of cells whose centers fell inside the cylinder.
    pub cells: usize,
}

impl Integral {
    /// Set when no cell center lies inside the cylinder (`value` is then 0).
    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }
}

/// Midpoint sum of `f(k, idx)` over cells whose centers lie in `cyl`.
pub fn integrate_with(
    grid: &SpaceTimeGrid,
    cyl: &Cylinder,
    mut f: impl FnMut(usize, usize) -> f64,
) -> Integral {
    let inside: Vec<usize> = (0..grid.nodes_per_level())
        .filter(|&idx| cyl.spatial_distance(&grid.position(idx)) < cyl.r)
        .collect();
    let mut sum = 0.0;
    let mut cells = 0;
    for k in 0..grid.nt() {
        if (grid.time(k) - cyl.t0).abs() >= cyl.half_time() {
            continue;
        }
        for &idx in &inside {
            sum += f(k, idx);
            cells += 1;
        }
    }
    Integral { value: sum * grid.cell_volume(), cells }
}

/// Midpoint-rule integral of a field over a parabolic cylinder.
pub fn integrate(field: &ScalarField, cyl: &Cylinder) -> Integral {
    integrate_with(field.grid(), cyl, |k, idx| field.value(k, idx))
}

/// Midpoint sum over the whole grid.
pub fn integrate_all(grid: &SpaceTimeGrid, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..grid.nt() {
        for idx in 0..grid.nodes_per_level() {
            sum += f(k, idx);
        }
    }
    sum * grid.cell_volume()
}

/// C¹ cubic ramp: 1 at z <= 0, 0 at z >= 1.
fn ramp(z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else if z >= 1.0 {
        0.0
    } else {
        1.0 - z * z * (3.0 - 2.0 * z)
    }
}

fn ramp_slope(z: f64) -> f64 {
    if z <= 0.0 || z >= 1.0 {
        0.0
    } else {
        -6.0 * z * (1.0 - z)
    }
}

/// Tensor-product cutoff for a cylinder: `φ = η_sp(|x - x0|) η_t(|t - t0|)`,
/// equal to 1 on `Q_r` and vanishing outside `Q_{2r}`.
#[derive(Clone, Debug)]
pub struct Cutoff {
    cyl: Cylinder,
}

impl Cutoff {
    pub fn new(cyl: Cylinder) -> Self {
        Self { cyl }
    }

    fn spatial_arg(&self, x: &[f64]) -> f64 {
        (self.cyl.spatial_distance(x) - self.cyl.r) / self.cyl.r
    }

    fn time_arg(&self, t: f64) -> f64 {
        let r2 = self.cyl.half_time();
        ((t - self.cyl.t0).abs() - r2) / (3.0 * r2)
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        ramp(self.spatial_arg(x)) * ramp(self.time_arg(t))
    }

    /// Analytic `|Dφ|`.
    pub fn grad_norm(&self, x: &[f64], t: f64) -> f64 {
        ramp_slope(self.spatial_arg(x)).abs() / self.cyl.r * ramp(self.time_arg(t))
    }

    /// Analytic `|φ_t|`.
    pub fn time_slope(&self, x: &[f64], t: f64) -> f64 {
        ramp(self.spatial_arg(x)) * ramp_slope(self.time_arg(t)).abs() / (3.0 * self.cyl.half_time())
    }
}

/// Samples the cutoff of `cyl` on `grid`. Requires `Q_{2r}` inside the grid interior.
pub fn make_cutoff(grid: &SpaceTimeGrid, cyl: &Cylinder) -> Result<ScalarField> {
    grid.check_cylinder_inside(&cyl.scaled(2.0))?;
    let cutoff = Cutoff::new(cyl.clone());
    ScalarField::from_fn(grid.clone(), |x, t| cutoff.value(x, t))
}

/// Grid scan of the cutoff admissibility conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CutoffCheck {
    pub min_value: f64,
    pub max_value: f64,
    /// Largest `|1 - φ|` over nodes in `Q_r`.
    pub max_defect_inside: f64,
    /// Largest `|φ|` over nodes outside `Q_{2r}`.
    pub max_outside_support: f64,
    /// Largest discrete `|Dφ|`, to be compared with `10 / r`.
    pub max_grad: f64,
    /// Largest discrete `|φ_t|`, to be compared with `10 / r²`.
    pub max_time_slope: f64,
}

impl CutoffCheck {
    pub fn admissible(&self, r: f64) -> bool {
        self.min_value >= 0.0
            && self.max_value <= 1.0
            && self.max_defect_inside == 0.0
            && self.max_outside_support == 0.0
            && self.max_grad <= 10.0 / r
            && self.max_time_slope <= 10.0 / (r * r)
    }
}

pub fn check_cutoff(phi: &ScalarField, cyl: &Cylinder) -> CutoffCheck {
    let grid = phi.grid();
    let grad = gradient(phi);
    let phi_t = time_deriv(phi);
    let outer = cyl.scaled(2.0);
    let mut check = CutoffCheck {
        min_value: f64::INFINITY,
        max_value: f64::NEG_INFINITY,
        max_defect_inside: 0.0,
        max_outside_support: 0.0,
        max_grad: 0.0,
        max_time_slope: 0.0,
    };
    for k in 0..grid.nt() {
        let t = grid.time(k);
        for idx in 0..grid.nodes_per_level() {
            let x = grid.position(idx);
            let v = phi.value(k, idx);
            check.min_value = check.min_value.min(v);
            check.max_value = check.max_value.max(v);
            if cyl.contains(&x, t) {
                check.max_defect_inside = check.max_defect_inside.max((1.0 - v).abs());
            }
            if !outer.contains(&x, t) {
                check.max_outside_support = check.max_outside_support.max(v.abs());
            }
            let g = grad.at(k, idx);
            let gn = g.iter().map(|c| c * c).sum::<f64>().sqrt();
            check.max_grad = check.max_grad.max(gn);
            check.max_time_slope = check.max_time_slope.max(phi_t.value(k, idx).abs());
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid2(nx: usize) -> SpaceTimeGrid {
        SpaceTimeGrid::square(-1.0, 1.0, nx, 0.0, 1.0, 5).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SpaceTimeGrid::square(0.0, 1.0, 7, 0.0, 1.0, 5).is_err());
        assert!(SpaceTimeGrid::square(0.0, 1.0, 8, 0.0, 1.0, 2).is_err());
        assert!(SpaceTimeGrid::new(&[0.0; 3], &[1.0; 3], 8, 0.0, 1.0, 3).is_err());
        assert!(SpaceTimeGrid::square(1.0, 0.0, 8, 0.0, 1.0, 3).is_err());
        let g = SpaceTimeGrid::square(0.0, 2.0, 8, 0.0, 1.0, 5).unwrap();
        assert_eq!(g.h(0), 0.25);
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.coord(0, 0), 0.125);
        assert_eq!(g.node_count(), 64 * 5);
        assert_eq!(g.linear_index(g.multi_index(37)), 37);
    }

    #[test]
    fn affine_gradient_exact_and_hessian_zero() {
        let g = grid2(12);
        let f = ScalarField::from_fn(g, |x, t| 0.7 * x[0] - 1.3 * x[1] + 2.0 * t + 0.1).unwrap();
        let grad = gradient(&f);
        let hess = hessian(&f);
        for k in 0..f.grid().nt() {
            for idx in 0..f.grid().nodes_per_level() {
                let gv = grad.at(k, idx);
                assert!((gv[0] - 0.7).abs() < 1e-13 && (gv[1] + 1.3).abs() < 1e-13);
                assert!(hess.at(k, idx).iter().all(|v| v.abs() < 1e-12));
            }
        }
        let ut = time_deriv(&f);
        assert!(ut.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn quadratics_are_stencil_exact() {
        let g = grid2(10);
        let f = ScalarField::from_fn(g, |x, _| x[0] * x[0] + 0.5 * x[0] * x[1] - 2.0 * x[1] * x[1]).unwrap();
        let hess = hessian(&f);
        for idx in 0..f.grid().nodes_per_level() {
            let h = hess.at(0, idx);
            assert!((h[0] - 2.0).abs() < 1e-12);
            assert!((h[1] - 0.5).abs() < 1e-12 && h[1] == h[2]);
            assert!((h[3] + 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_gradient_second_order() {
        let err = |nx: usize| {
            let g = SpaceTimeGrid::new(&[0.0], &[3.0], nx, 0.0, 1.0, 3).unwrap();
            let f = ScalarField::from_fn(g.clone(), |x, _| x[0].sin()).unwrap();
            let grad = gradient(&f);
            (0..nx)
                .map(|i| (grad.at(0, i)[0] - g.coord(0, i).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn integrate_constant_and_zero() {
        let g = SpaceTimeGrid::square(-1.0, 1.0, 128, 0.0, 1.0, 201).unwrap();
        let cyl = Cylinder::new(&[0.0, 0.0], 0.5, 0.5).unwrap();
        let ones = integrate_with(&g, &cyl, |_, _| 1.0);
        assert!((ones.value / cyl.volume() - 1.0).abs() < 0.02);
        let zero = ScalarField::from_fn(g.clone(), |_, _| 0.0).unwrap();
        assert_eq!(integrate(&zero, &cyl).value, 0.0);

        let far = Cylinder::new(&[5.0, 5.0], 0.5, 0.1).unwrap();
        let empty = integrate_with(&g, &far, |_, _| 1.0);
        assert!(empty.is_empty());
        assert_eq!(empty.value, 0.0);
    }

    #[test]
    fn cutoff_example_values() {
        let g = SpaceTimeGrid::square(-1.0, 1.0, 128, 0.0, 1.0, 81).unwrap();
        let cyl = Cylinder::new(&[0.0, 0.0], 0.5, 0.2).unwrap();
        let phi = make_cutoff(&g, &cyl).unwrap();
        // node closest to the center at t0 = 0.5 (level 40)
        let center = g.linear_index([64, 64]);
        assert_eq!(phi.value(40, center), 1.0);
        let corner = g.linear_index([2, 2]);
        assert_eq!(phi.value(40, corner), 0.0);
        let check = check_cutoff(&phi, &cyl);
        assert!(check.admissible(cyl.r), "{check:?}");
        assert!(check.max_grad <= 10.0 / cyl.r);
        assert!(check.max_time_slope <= 10.0 / (cyl.r * cyl.r));

        let too_big = Cylinder::new(&[0.0, 0.0], 0.5, 0.6).unwrap();
        assert!(make_cutoff(&g, &too_big).is_err());
    }

    #[test]
    fn csv_export_rows() {
        let g = SpaceTimeGrid::new(&[0.0], &[1.0], 8, 0.0, 1.0, 3).unwrap();
        let f = ScalarField::from_fn(g, |x, t| x[0] + t).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf, Some(1)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,t,value");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "0.0625,0.5,0.5625");
    }

    #[test]
    fn from_values_rejects_bad_input() {
        let g = grid2(8);
        assert!(ScalarField::from_values(g.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; g.node_count()];
        v[5] = f64::NAN;
        assert!(ScalarField::from_values(g, v).is_err());
    }

    #[test]
    fn cylinder_volume_and_membership() {
        let c = Cylinder::new(&[0.0, 0.0], 1.0, 0.5).unwrap();
        assert_relative_eq!(c.volume(), std::f64::consts::PI * 0.25 * 0.5);
        assert!(c.contains(&[0.1, 0.1], 1.1));
        assert!(!c.contains(&[0.1, 0.1], 1.25));
        assert!(Cylinder::new(&[0.0], 0.0, 0.0).is_err());
    }
}
