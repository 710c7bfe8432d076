//! Integral estimates on fields, the sharpness sweep and pointwise suites.
//!
//! Reports evaluate both sides of the Caccioppoli-type estimates by masked
//! midpoint quadrature on discrete jets. No reference value of the constant
//! exists; `empirical_constant` is the ratio that the estimate bounds, and the
//! meaningful check is its stability under refinement and regularization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Counterexample, ExactSolution};
use crate::grid::{
    gradient, integrate_all, integrate_with, make_cutoff, time_deriv, Cylinder, JetField,
    ScalarField, SpaceTimeGrid,
};
use crate::jet::{
    d_vs_eps_matrix, d_vs_matrix, fundamental_margin, full_fundamental_margin,
    sigma_lower_bound_margin, smo_esti_margin, trivial_inequality_margin, v_s, v_s_eps, Params,
};
use crate::sampling::MarginStat;
use crate::solver::flux_divergence;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolution {
    pub nx: usize,
    pub nt: usize,
    pub h: Vec<f64>,
    pub dt: f64,
}

impl Resolution {
    fn of(grid: &SpaceTimeGrid) -> Self {
        Self {
            nx: grid.nx(),
            nt: grid.nt(),
            h: (0..grid.n_dim()).map(|a| grid.h(a)).collect(),
            dt: grid.dt(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportFlags {
    /// Nodes where `D V_s(Du)` is singular (`Du = 0` with `p - 2 + s < 0`).
    pub singular_nodes_skipped: usize,
    /// Some quadrature region contained no cell center.
    pub empty_intersection: bool,
    /// Solver steps whose Picard loop did not converge (set by the caller).
    pub picard_warnings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub kind: String,
    pub lhs: f64,
    pub rhs_terms: BTreeMap<String, f64>,
    pub empirical_constant: f64,
    /// Auxiliary quantities that are neither side of the estimate.
    pub extras: BTreeMap<String, f64>,
    pub params: Params,
    pub cylinder: Cylinder,
    pub resolution: Resolution,
    pub flags: ReportFlags,
}

impl EstimateReport {
    pub fn rhs_total(&self) -> f64 {
        self.rhs_terms.values().sum()
    }

    /// All integrals non-negative and the constant finite whenever the rhs is positive.
    pub fn is_consistent(&self) -> bool {
        self.lhs >= 0.0
            && self.rhs_terms.values().all(|v| *v >= 0.0)
            && (self.rhs_total() == 0.0 || self.empirical_constant.is_finite())
    }

    pub fn with_picard_warnings(mut self, warnings: usize) -> Self {
        self.flags.picard_warnings = warnings;
        self
    }

    /// Aligned two-column text rendering.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("kind".into(), self.kind.clone()),
            ("p".into(), self.params.p.to_string()),
            ("s".into(), self.params.s.to_string()),
            ("eps".into(), self.params.eps.to_string()),
            ("r".into(), self.cylinder.r.to_string()),
            ("nx".into(), self.resolution.nx.to_string()),
            ("nt".into(), self.resolution.nt.to_string()),
            ("lhs".into(), format!("{:.10e}", self.lhs)),
        ];
        for (name, v) in &self.rhs_terms {
            rows.push((format!("rhs.{name}"), format!("{v:.10e}")));
        }
        rows.push(("empirical_constant".into(), format!("{:.10e}", self.empirical_constant)));
        for (name, v) in &self.extras {
            rows.push((name.clone(), format!("{v:.10e}")));
        }
        rows.push(("singular_nodes_skipped".into(), self.flags.singular_nodes_skipped.to_string()));
        rows.push(("empty_intersection".into(), self.flags.empty_intersection.to_string()));
        rows.push(("picard_warnings".into(), self.flags.picard_warnings.to_string()));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Which nonlinear field a Caccioppoli report measures.
#[derive(Clone, Copy)]
enum Field {
    Plain,
    Regularized,
}

fn cylinder_report(
    u: &ScalarField,
    params: &Params,
    cyl: &Cylinder,
    field: Field,
) -> Result<EstimateReport> {
    params.require_estimate_range()?;
    let grid = u.grid();
    let outer = cyl.scaled(2.0);
    grid.check_cylinder_inside(&outer)?;
    let jets = JetField::from_field(u);

    let mut skipped = 0;
    let lhs = integrate_with(grid, cyl, |k, idx| {
        let jet = jets.jet(k, idx);
        let m = match field {
            Field::Plain => d_vs_matrix(&jet, params),
            Field::Regularized => d_vs_eps_matrix(&jet, params),
        };
        match m {
            Ok(m) => m.norm_squared(),
            Err(_) => {
                skipped += 1;
                0.0
            }
        }
    });
    let s = params.s;
    let vs = integrate_with(grid, &outer, |k, idx| {
        let g = jets.gradient.at(k, idx);
        let v = match field {
            Field::Plain => v_s(g, params),
            Field::Regularized => v_s_eps(g, params),
        };
        norm_sq(&v.expect("discrete gradients are finite"))
    });
    let grad_power = integrate_with(grid, &outer, |k, idx| {
        let g_sq = norm_sq(jets.gradient.at(k, idx));
        match field {
            Field::Plain => g_sq.sqrt().powf(s + 2.0),
            Field::Regularized => (g_sq + params.eps).powf(0.5 * (s + 2.0)),
        }
    });

    let (kind, vs_name, grad_name) = match field {
        Field::Plain => ("caccioppoli", "vs_sq_q2r", "grad_pow_s_plus_2_q2r"),
        Field::Regularized => ("regularized", "vs_eps_sq_q2r", "mu_pow_s_plus_2_q2r"),
    };
    let mut rhs_terms = BTreeMap::new();
    rhs_terms.insert(vs_name.to_string(), vs.value);
    rhs_terms.insert(grad_name.to_string(), grad_power.value);
    let rhs_total = vs.value + grad_power.value;
    Ok(EstimateReport {
        kind: kind.into(),
        lhs: lhs.value,
        rhs_terms,
        empirical_constant: ratio(lhs.value * cyl.r * cyl.r, rhs_total),
        extras: BTreeMap::new(),
        params: *params,
        cylinder: cyl.clone(),
        resolution: Resolution::of(grid),
        flags: ReportFlags {
            singular_nodes_skipped: skipped,
            empty_intersection: lhs.is_empty() || vs.is_empty(),
            picard_warnings: 0,
        },
    })
}

/// `∫_{Q_r} |D V_s(Du)|²` against `∫_{Q_2r} |V_s(Du)|²` and `∫_{Q_2r} |Du|^{s+2}`;
/// `empirical_constant = lhs · r² / Σ rhs`.
pub fn caccioppoli_report(u: &ScalarField, params: &Params, cyl: &Cylinder) -> Result<EstimateReport> {
    cylinder_report(u, params, cyl, Field::Plain)
}

/// The regularized counterpart with `V^ε_s` and `(|Du|² + ε)^{(s+2)/2}`.
pub fn regularized_estimate_report(
    u_eps: &ScalarField,
    params: &Params,
    cyl: &Cylinder,
) -> Result<EstimateReport> {
    cylinder_report(u_eps, params, cyl, Field::Regularized)
}

/// Cutoff-weighted form
/// `∫ |D V_s(Du)|² φ²  <=  C (∫ |Du|^{p+s} |Dφ|² + ∫ |Du|^{s+2} |φ| |φ_t|)`
/// with `φ` from [`make_cutoff`]; `empirical_constant = lhs / Σ rhs`.
pub fn testfn_estimate_report(u: &ScalarField, params: &Params, cyl: &Cylinder) -> Result<EstimateReport> {
    params.require_estimate_range()?;
    let grid = u.grid();
    let phi = make_cutoff(grid, cyl)?;
    let dphi = gradient(&phi);
    let phi_t = time_deriv(&phi);
    let jets = JetField::from_field(u);
    let Params { p, s, .. } = *params;

    let mut skipped = 0;
    let lhs = integrate_all(grid, |k, idx| {
        let w = phi.value(k, idx);
        if w == 0.0 {
            return 0.0;
        }
        match d_vs_matrix(&jets.jet(k, idx), params) {
            Ok(m) => m.norm_squared() * w * w,
            Err(_) => {
                skipped += 1;
                0.0
            }
        }
    });
    let gradient_term = integrate_all(grid, |k, idx| {
        let g = norm_sq(jets.gradient.at(k, idx)).sqrt();
        let dp = norm_sq(dphi.at(k, idx));
        if dp == 0.0 {
            0.0
        } else {
            g.powf(p + s) * dp
        }
    });
    let time_term = integrate_all(grid, |k, idx| {
        let w = phi.value(k, idx).abs() * phi_t.value(k, idx).abs();
        if w == 0.0 {
            0.0
        } else {
            norm_sq(jets.gradient.at(k, idx)).sqrt().powf(s + 2.0) * w
        }
    });

    let mut rhs_terms = BTreeMap::new();
    rhs_terms.insert("grad_pow_p_plus_s_dphi_sq".to_string(), gradient_term);
    rhs_terms.insert("grad_pow_s_plus_2_phi_phit".to_string(), time_term);
    Ok(EstimateReport {
        kind: "testfn".into(),
        lhs,
        rhs_terms,
        empirical_constant: ratio(lhs, gradient_term + time_term),
        extras: BTreeMap::new(),
        params: *params,
        cylinder: cyl.clone(),
        resolution: Resolution::of(grid),
        flags: ReportFlags { singular_nodes_skipped: skipped, ..Default::default() },
    })
}

/// Time-derivative estimate with `s = p - 2`: reports `∫_{Q_r} u_t²`,
/// `∫_{Q_r} |D(|Du|^{p-2} Du)|²` and the pointwise residual
/// `sup |u_t - div_h(μ^{p-2} ∇_h u)|` over interior levels and interior,
/// non-degenerate nodes. `empirical_constant = ∫u_t² / ∫|D flux|²`.
pub fn time_derivative_report(u: &ScalarField, params: &Params, cyl: &Cylinder) -> Result<EstimateReport> {
    let params = params.with_s(params.p - 2.0);
    let grid = u.grid();
    grid.check_cylinder_inside(cyl)?;
    let ut = time_deriv(u);
    let jets = JetField::from_field(u);

    let ut_sq = integrate_with(grid, cyl, |k, idx| ut.value(k, idx).powi(2));
    let mut skipped = 0;
    let flux_sq = integrate_with(grid, cyl, |k, idx| match d_vs_matrix(&jets.jet(k, idx), &params) {
        Ok(m) => m.norm_squared(),
        Err(_) => {
            skipped += 1;
            0.0
        }
    });

    let mut residual: f64 = 0.0;
    for k in 1..grid.nt() - 1 {
        let div = flux_divergence(grid, u.level(k), &params)?;
        for idx in (0..grid.nodes_per_level()).filter(|&i| !grid.is_boundary_node(i)) {
            if params.p != 2.0 && norm_sq(jets.gradient.at(k, idx)).sqrt() < crate::jet::ZERO_GRADIENT {
                continue;
            }
            residual = residual.max((ut.value(k, idx) - div[idx]).abs());
        }
    }

    let mut rhs_terms = BTreeMap::new();
    rhs_terms.insert("flux_derivative_sq".to_string(), flux_sq.value);
    let mut extras = BTreeMap::new();
    extras.insert("pointwise_residual_sup".to_string(), residual);
    extras.insert("cylinder_volume".to_string(), cyl.volume());
    Ok(EstimateReport {
        kind: "time_derivative".into(),
        lhs: ut_sq.value,
        rhs_terms,
        empirical_constant: ratio(ut_sq.value, flux_sq.value),
        extras,
        params,
        cylinder: cyl.clone(),
        resolution: Resolution::of(grid),
        flags: ReportFlags {
            singular_nodes_skipped: skipped,
            empty_intersection: ut_sq.is_empty(),
            picard_warnings: 0,
        },
    })
}

/// Excludes nodes with `|x[axis] - center| < half_width` from pointwise suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxisBand {
    pub axis: usize,
    pub center: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseSummary {
    pub nodes_checked: usize,
    pub nodes_skipped_zero_gradient: usize,
    pub nodes_excluded: usize,
    pub margins: Vec<MarginStat>,
}

impl PointwiseSummary {
    pub fn min_normalized(&self) -> f64 {
        self.margins.iter().map(|m| m.min_normalized).fold(f64::INFINITY, f64::min)
    }

    pub fn margin(&self, name: &str) -> Option<&MarginStat> {
        self.margins.iter().find(|m| m.name == name)
    }
}

/// Every pointwise margin on the discrete jet of every node off the boundary band.
/// Nodes with `|Du|` below the zero-gradient threshold are counted and skipped.
/// `σ` and `smo_esti` margins are only evaluated when `s > -1`.
pub fn pointwise_suite(u: &ScalarField, params: &Params, exclusion: Option<AxisBand>) -> PointwiseSummary {
    let grid = u.grid();
    let jets = JetField::from_field(u);
    let with_s = params.require_estimate_range().is_ok();
    let mut fundamental = MarginStat::new("fundamental");
    let mut full = MarginStat::new("full_fundamental");
    let mut trivial = MarginStat::new("trivial_inequality");
    let mut sigma = MarginStat::new("sigma_lower_bound");
    let mut smo = MarginStat::new("smo_esti");
    let mut summary = PointwiseSummary {
        nodes_checked: 0,
        nodes_skipped_zero_gradient: 0,
        nodes_excluded: 0,
        margins: Vec::new(),
    };
    let nodes: Vec<usize> = (0..grid.nodes_per_level())
        .filter(|&i| !grid.is_boundary_node(i))
        .collect();
    for k in 0..grid.nt() {
        for &idx in &nodes {
            if let Some(band) = exclusion {
                if (grid.position(idx)[band.axis] - band.center).abs() < band.half_width {
                    summary.nodes_excluded += 1;
                    continue;
                }
            }
            let jet = jets.jet(k, idx);
            if jet.has_zero_gradient() {
                summary.nodes_skipped_zero_gradient += 1;
                continue;
            }
            summary.nodes_checked += 1;
            let big = 1.0 + jet.grad_norm_sq().powi(2) * jet.hessian_norm_sq();
            let small = 1.0 + jet.hessian_norm_sq();
            fundamental.record(fundamental_margin(&jet), big);
            if let Ok(m) = full_fundamental_margin(&jet) {
                full.record(m, big);
            }
            trivial.record(trivial_inequality_margin(&jet), small);
            if with_s {
                sigma.record(sigma_lower_bound_margin(&jet, params).expect("Du != 0"), small);
                smo.record(smo_esti_margin(&jet, params).expect("Du != 0"), small);
            }
        }
    }
    summary.margins.push(fundamental);
    if grid.n_dim() >= 2 {
        summary.margins.push(full);
    }
    summary.margins.push(trivial);
    if with_s {
        summary.margins.push(sigma);
        summary.margins.push(smo);
    }
    summary
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

/// A sequence is convergent when the last refinement changes it by less than this.
pub const CONVERGENCE_TOL: f64 = 0.02;
/// Divergent sequences keep each increment at least this fraction of the previous one.
pub const INCREMENT_RATIO_FLOOR: f64 = 0.8;
pub const MIN_DIVERGENCE_REFINEMENTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: f64,
    pub nx: usize,
    pub h: f64,
    pub lhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepVerdict {
    pub s: f64,
    pub classification: Classification,
    pub last_relative_change: f64,
    /// `increment[k+1] / increment[k]` between successive refinements.
    pub increment_ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessTable {
    pub p: f64,
    pub r: f64,
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<SweepVerdict>,
}

impl SharpnessTable {
    pub fn verdict(&self, s: f64) -> Option<&SweepVerdict> {
        self.verdicts.iter().find(|v| v.s == s)
    }

    /// Every `s > -1` convergent and every `s <= -1` divergent.
    pub fn matches_threshold(&self) -> bool {
        self.verdicts.iter().all(|v| {
            let expected = if v.s > -1.0 { Classification::Convergent } else { Classification::Divergent };
            v.classification == expected
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["p", "s", "nx", "h", "lhs", "classification"])?;
        for row in &self.rows {
            let class = self
                .verdict(row.s)
                .map(|v| format!("{:?}", v.classification).to_lowercase())
                .unwrap_or_default();
            out.write_record([
                self.p.to_string(),
                row.s.to_string(),
                row.nx.to_string(),
                row.h.to_string(),
                format!("{:.12e}", row.lhs),
                class,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Classifies a refinement sequence of integrals.
pub fn classify(values: &[f64]) -> SweepVerdict {
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let increment_ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    let last_relative_change = match (increments.last(), values.last()) {
        (Some(d), Some(v)) if *v != 0.0 => (d / v).abs(),
        (Some(d), _) if *d == 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    let classification = if last_relative_change < CONVERGENCE_TOL {
        Classification::Convergent
    } else if increments.len() >= MIN_DIVERGENCE_REFINEMENTS
        && increments.iter().all(|d| *d > 0.0)
        && increment_ratios.iter().all(|r| *r >= INCREMENT_RATIO_FLOOR)
    {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    };
    SweepVerdict { s: f64::NAN, classification, last_relative_change, increment_ratios }
}

// 4-point Gauss-Legendre rule on [-1, 1].
const GAUSS_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

fn gauss(a: f64, b: f64, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

/// `∫_{Q_r(0, t0)} |D V_s(Du)|²` for the counterexample from exact jets on an
/// `nx × nx` cell grid over `[-r, r]²` whose faces include `x1 = 0`.
///
/// Cells are masked by their centers. The integrand depends on `x1` only, so
/// each column contributes its `x1`-integral times its masked length, and the
/// time direction contributes `2r²`. Columns away from the axis use the
/// midpoint value; the two columns touching the axis are integrated on a
/// geometric mesh refined toward `x1 = 0`, down to `δ = h (h/r)³`. The band
/// `|x1| < δ` is left out, so divergent integrands grow without bound as `h → 0`.
pub fn sweep_integral(solution: &Counterexample, params: &Params, nx: usize, r: f64) -> Result<f64> {
    if nx < 8 || !nx.is_multiple_of(2) {
        return Err(Error::Grid(format!("sweep needs an even nx >= 8, got {nx}")));
    }
    let h = 2.0 * r / nx as f64;
    let center = |i: usize| -r + (i as f64 + 0.5) * h;
    let mut integrand = |x1: f64| -> Result<f64> {
        let jet = solution.jet(&[x1, 0.0], 0.0)?;
        Ok(d_vs_matrix(&jet, params)?.norm_squared())
    };

    let levels = 3 * ((r / h).log2().ceil().max(1.0) as usize);
    let mut axis_column = 0.0;
    let mut outer = h;
    for _ in 0..levels {
        let inner = 0.5 * outer;
        axis_column += gauss(inner, outer, &mut integrand)?;
        outer = inner;
    }

    let mut total = 0.0;
    for i in 0..nx {
        let x1 = center(i);
        let count = (0..nx)
            .filter(|&j| {
                let x2 = center(j);
                x1 * x1 + x2 * x2 < r * r
            })
            .count();
        if count == 0 {
            continue;
        }
        let column = if i + 1 == nx / 2 || i == nx / 2 {
            // the integrand is even in x1
            axis_column
        } else {
            h * integrand(x1)?
        };
        total += column * count as f64 * h;
    }
    Ok(total * 2.0 * r * r)
}

/// Refinement sweep of the counterexample integral over `Q_r` for each `s`,
/// classified into convergent / divergent.
pub fn sharpness_sweep(p: f64, s_list: &[f64], levels: &[usize]) -> Result<SharpnessTable> {
    const RADIUS: f64 = 0.5;
    if levels.len() < 2 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("refinement levels must be strictly increasing (at least two)".into()));
    }
    let solution = Counterexample::new(p)?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &s in s_list {
        let params = Params::new(p, s, 0.0)?;
        let mut values = Vec::with_capacity(levels.len());
        for &nx in levels {
            let lhs = sweep_integral(&solution, &params, nx, RADIUS)?;
            rows.push(SweepRow { s, nx, h: 2.0 * RADIUS / nx as f64, lhs });
            values.push(lhs);
        }
        let mut verdict = classify(&values);
        verdict.s = s;
        verdicts.push(verdict);
    }
    Ok(SharpnessTable { p, r: RADIUS, rows, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::affine_reference;

    fn affine_field() -> ScalarField {
        let grid = SpaceTimeGrid::square(-1.0, 1.0, 24, 0.0, 0.5, 11).unwrap();
        let a = affine_reference(&[0.6, -0.2], 1.0).unwrap();
        ScalarField::from_fn(grid, |x, t| a.value(x, t)).unwrap()
    }

    #[test]
    fn affine_reports_are_zero() {
        let u = affine_field();
        let cyl = Cylinder::new(&[0.0, 0.0], 0.25, 0.15).unwrap();
        let prm = Params::new(3.0, 0.5, 0.0).unwrap();
        let rep = caccioppoli_report(&u, &prm, &cyl).unwrap();
        assert!(rep.lhs.abs() < 1e-20);
        assert!(rep.empirical_constant.abs() < 1e-18);
        assert!(rep.rhs_total() > 0.0);
        assert!(rep.is_consistent());
        let tf = testfn_estimate_report(&u, &prm, &cyl).unwrap();
        assert!(tf.lhs.abs() < 1e-20);
        let td = time_derivative_report(&u, &prm, &cyl).unwrap();
        assert!(td.lhs < 1e-20 && td.rhs_total() < 1e-20);
        assert!(td.extras["pointwise_residual_sup"] < 1e-10);
        let pw = pointwise_suite(&u, &prm, None);
        assert!(pw.margins.iter().all(|m| m.min_raw.abs() < 1e-12));
    }

    #[test]
    fn report_rejects_bad_inputs() {
        let u = affine_field();
        let cyl = Cylinder::new(&[0.0, 0.0], 0.25, 0.15).unwrap();
        let below = Params::new(3.0, -1.0, 0.0).unwrap();
        assert!(caccioppoli_report(&u, &below, &cyl).is_err());
        let wide = Cylinder::new(&[0.0, 0.0], 0.25, 0.4).unwrap();
        assert!(caccioppoli_report(&u, &Params::new(3.0, 0.0, 0.0).unwrap(), &wide).is_err());
    }

    #[test]
    fn classify_sequences() {
        assert_eq!(classify(&[1.0, 1.5, 1.6, 1.605]).classification, Classification::Convergent);
        assert_eq!(classify(&[1.0, 2.0, 3.0, 4.0, 5.0]).classification, Classification::Divergent);
        assert_eq!(classify(&[1.0, 2.0, 3.0, 4.0]).classification, Classification::Inconclusive);
        assert_eq!(classify(&[1.0, 2.0, 2.5, 2.7, 3.0]).classification, Classification::Inconclusive);
    }

    #[test]
    fn text_report_is_aligned() {
        let u = affine_field();
        let cyl = Cylinder::new(&[0.0, 0.0], 0.25, 0.15).unwrap();
        let rep = caccioppoli_report(&u, &Params::new(2.0, 0.0, 0.0).unwrap(), &cyl).unwrap();
        let text = rep.to_text();
        let cols: Vec<usize> = text.lines().map(|l| l.find("  ").unwrap()).collect();
        assert!(text.contains("empirical_constant"));
        assert!(cols.iter().all(|c| *c <= cols.iter().copied().max().unwrap()));
        let value_col = text.lines().map(|l| l.len() - l.trim_start_matches(|c: char| c != ' ').trim_start().len());
        let first = value_col.clone().next().unwrap();
        assert!(value_col.into_iter().all(|c| c == first));
    }
}
