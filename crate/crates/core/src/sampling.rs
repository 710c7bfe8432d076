//! Seeded random jets and parameters for the pointwise property suites.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::jet::{
    ellipticity_matrix, fundamental_margin, full_fundamental_margin, sigma_lower_bound_margin,
    smo_esti_margin, trivial_inequality_margin, Jet, Params,
};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn magnitude<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.gen_range(-1.5..1.5))
}

/// Random jet of dimension `n`. A mix of generic jets, jets with a one-directional
/// Hessian aligned to the gradient (equality cases), rank-one Hessians and, when
/// `allow_zero_gradient`, jets with `Du = 0`.
pub fn random_jet<R: Rng>(rng: &mut R, n: usize, allow_zero_gradient: bool) -> Jet {
    let g_scale = magnitude(rng);
    let h_scale = magnitude(rng);
    let mut g = DVector::from_fn(n, |_, _| g_scale * rng.gen_range(-1.0..1.0));
    let kind = rng.gen_range(0..10);
    let h = match kind {
        0 => {
            // H = c g gᵀ/|g|²: one-directional jet
            let c = h_scale * rng.gen_range(-1.0..1.0);
            let norm_sq = g.norm_squared().max(f64::MIN_POSITIVE);
            &g * g.transpose() * (c / norm_sq)
        }
        1 => {
            let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            &v * v.transpose() * (h_scale * rng.gen_range(-1.0..1.0))
        }
        _ => {
            let a = DMatrix::from_fn(n, n, |_, _| h_scale * rng.gen_range(-1.0..1.0));
            (&a + a.transpose()) * 0.5
        }
    };
    if allow_zero_gradient && rng.gen_bool(0.05) {
        g.fill(0.0);
    }
    // symmetrize exactly
    let h = DMatrix::from_fn(n, n, |i, j| if i <= j { h[(i, j)] } else { h[(j, i)] });
    Jet::new(g, h).expect("sampled jets are finite and symmetric")
}

/// `p ∈ (1, 5]`, `s ∈ (-0.99, 3]`, `ε ∈ (0, 1]`.
pub fn random_params<R: Rng>(rng: &mut R) -> Params {
    let p = 5.0 - 4.0 * rng.gen::<f64>();
    let s = 3.0 - 3.99 * rng.gen::<f64>();
    let eps = 1.0 - rng.gen::<f64>();
    Params::new(p.max(1.0 + 1e-9), s.max(-0.99 + 1e-9), eps.max(f64::MIN_POSITIVE))
        .expect("sampled parameters are in range")
}

/// Worst observed margin of one inequality, normalized by its scale.
#[derive(Clone, Debug, Serialize)]
pub struct MarginStat {
    pub name: String,
    pub samples: usize,
    /// Minimum of `margin / scale`.
    pub min_normalized: f64,
    /// Raw margin at the minimizing sample.
    pub min_raw: f64,
}

impl MarginStat {
    pub(crate) fn new(name: &str) -> Self {
        Self { name: name.into(), samples: 0, min_normalized: f64::INFINITY, min_raw: f64::INFINITY }
    }

    pub(crate) fn record(&mut self, margin: f64, scale: f64) {
        self.samples += 1;
        let normalized = margin / scale;
        if normalized < self.min_normalized || normalized.is_nan() {
            self.min_normalized = normalized;
            self.min_raw = margin;
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.min_normalized >= -tol
    }
}

/// Outcome of the randomized pointwise suite.
#[derive(Clone, Debug, Serialize)]
pub struct JetSuiteSummary {
    pub seed: u64,
    pub samples_per_inequality: usize,
    pub margins: Vec<MarginStat>,
    /// Largest relative defect of `|D|Du||² = |D_T|Du||² + (Δ∞^N)²`.
    pub max_decomposition_error: f64,
    /// Largest violation of `|D|Du||² >= (Δ∞^N)²`, relative to `1 + |D|Du||²`.
    pub max_normalized_bound_violation: f64,
    /// Largest distance of an eigenvalue of `A` outside `[min{1,p-1}, max{1,p-1}]`.
    pub max_ellipticity_violation: f64,
}

impl JetSuiteSummary {
    pub fn passes(&self, margin_tol: f64, identity_tol: f64) -> bool {
        self.margins.iter().all(|m| m.passes(margin_tol))
            && self.max_decomposition_error <= identity_tol
            && self.max_normalized_bound_violation <= margin_tol
            && self.max_ellipticity_violation <= margin_tol
    }
}

fn dims<R: Rng>(rng: &mut R, min: usize) -> usize {
    rng.gen_range(min..=4)
}

/// Runs every pointwise inequality on `samples` random jets each, seeded by `seed`.
/// Ellipticity is checked on `samples / 10` jets.
pub fn run_jet_suite(seed: u64, samples: usize) -> JetSuiteSummary {
    let mut rng = rng_from_seed(seed);
    let mut fundamental = MarginStat::new("fundamental");
    let mut full = MarginStat::new("full_fundamental");
    let mut trivial = MarginStat::new("trivial_inequality");
    let mut sigma = MarginStat::new("sigma_lower_bound");
    let mut smo = MarginStat::new("smo_esti");

    for _ in 0..samples {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, true);
        let scale = 1.0 + jet.grad_norm_sq().powi(2) * jet.hessian_norm_sq();
        fundamental.record(fundamental_margin(&jet), scale);
    }
    for _ in 0..samples {
        let n = dims(&mut rng, 2);
        let jet = random_jet(&mut rng, n, true);
        let scale = 1.0 + jet.grad_norm_sq().powi(2) * jet.hessian_norm_sq();
        full.record(full_fundamental_margin(&jet).expect("n >= 2"), scale);
    }
    for _ in 0..samples {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, true);
        trivial.record(trivial_inequality_margin(&jet), 1.0 + jet.hessian_norm_sq());
    }
    for _ in 0..samples {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, true);
        let params = random_params(&mut rng);
        let margin = sigma_lower_bound_margin(&jet, &params).expect("eps > 0 and s > -1");
        sigma.record(margin, 1.0 + jet.hessian_norm_sq());
    }
    for _ in 0..samples {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, false);
        if jet.has_zero_gradient() {
            continue;
        }
        let params = random_params(&mut rng);
        let margin = smo_esti_margin(&jet, &params).expect("Du != 0 and s > -1");
        smo.record(margin, 1.0 + jet.hessian_norm_sq());
    }

    let mut max_decomposition_error: f64 = 0.0;
    let mut max_normalized_bound_violation: f64 = 0.0;
    for _ in 0..samples {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, false);
        if jet.has_zero_gradient() {
            continue;
        }
        let full_sq = jet.grad_norm_gradient().norm_squared();
        let normalized = jet.normalized_inf_laplacian();
        let parts = jet.tangential_part().norm_squared() + normalized * normalized;
        let rel = if full_sq == 0.0 { parts } else { (parts - full_sq).abs() / full_sq };
        max_decomposition_error = max_decomposition_error.max(rel);
        let violation = (normalized * normalized - full_sq) / (1.0 + full_sq);
        max_normalized_bound_violation = max_normalized_bound_violation.max(violation);
    }

    let mut max_ellipticity_violation: f64 = 0.0;
    for _ in 0..(samples / 10).max(1) {
        let n = dims(&mut rng, 1);
        let jet = random_jet(&mut rng, n, true);
        let mut params = random_params(&mut rng);
        // ε ∈ [0, 1]: exercise ε = 0 whenever the gradient allows it
        if !jet.has_zero_gradient() && rng.gen_bool(0.2) {
            params.eps = 0.0;
        }
        let a = ellipticity_matrix(&jet, &params).expect("mu > 0");
        let lo = (params.p - 1.0).min(1.0);
        let hi = (params.p - 1.0).max(1.0);
        for ev in a.symmetric_eigenvalues().iter() {
            let v = (lo - ev).max(ev - hi).max(0.0);
            max_ellipticity_violation = max_ellipticity_violation.max(v);
        }
    }

    JetSuiteSummary {
        seed,
        samples_per_inequality: samples,
        margins: vec![fundamental, full, trivial, sigma, smo],
        max_decomposition_error,
        max_normalized_bound_violation,
        max_ellipticity_violation,
    }
}
