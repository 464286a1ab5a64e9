//! von Mises-Fisher distribution on the unit sphere: rejection sampling and
//! KL divergence to the uniform prior vMF(., 0).

use super::bessel::log_bessel_iv;
use super::{DistError, Result};
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

/// Posterior parameters of a vMF distribution on S^(m-1).
#[derive(Debug, Clone, PartialEq)]
pub struct VmfParams {
    mu: Vec<f64>,
    kappa: f64,
}

impl VmfParams {
    pub fn new(mu: Vec<f64>, kappa: f64) -> Result<Self> {
        if mu.len() < 2 {
            return Err(DistError::BadVmfDim { dim: mu.len() });
        }
        let norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(DistError::MuNotUnit { norm });
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(DistError::BadKappa { kappa });
        }
        Ok(VmfParams { mu, kappa })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// I_{m/2}(k) / I_{m/2-1}(k): the mean resultant length of vMF(., k) on S^(m-1).
pub fn bessel_ratio(m: usize, kappa: f64) -> f64 {
    debug_assert!(m >= 2);
    if kappa == 0.0 {
        return 0.0;
    }
    let half = m as f64 / 2.0;
    let num = log_bessel_iv(half, kappa).expect("kappa > 0");
    let den = log_bessel_iv(half - 1.0, kappa).expect("kappa > 0");
    (num - den).exp()
}

/// Log normalizer of the uniform distribution: -log surface(S^(m-1)).
fn log_uniform_density(m: usize) -> f64 {
    let half = m as f64 / 2.0;
    -(2.0f64.ln() + half * std::f64::consts::PI.ln() - libm::lgamma(half))
}

/// log C_m(kappa), the vMF normalizing constant, for kappa > 0.
fn log_vmf_normalizer(m: usize, kappa: f64) -> f64 {
    let half = m as f64 / 2.0;
    (half - 1.0) * kappa.ln()
        - half * (2.0 * std::f64::consts::PI).ln()
        - log_bessel_iv(half - 1.0, kappa).expect("kappa > 0")
}

/// KL(vMF(mu, kappa) || vMF(., 0)) on S^(m-1). Independent of mu.
pub fn vmf_kl_scalar(m: usize, kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    let kl = kappa * bessel_ratio(m, kappa) + log_vmf_normalizer(m, kappa)
        - log_uniform_density(m);
    // The analytic value is nonnegative; tiny negatives are rounding.
    kl.max(0.0)
}

pub fn vmf_kl_to_uniform(params: &VmfParams) -> f64 {
    vmf_kl_scalar(params.dim(), params.kappa())
}

/// The scalar component along mu produced by the rejection scheme, plus the
/// tangent direction and the number of proposal rounds used.
///
/// Exposed at this granularity so the model can rebuild the sample on the
/// autodiff tape from the same accepted draws (pathwise reparameterization:
/// the accepted Beta and tangent draws are treated as constants, and the
/// sample stays differentiable through kappa via the proposal map and through
/// mu via the Householder reflection).
pub(crate) struct VmfDraw {
    /// Accepted Beta((m-1)/2, (m-1)/2) variate.
    pub psi: f64,
    /// Uniform tangent direction in R^(m-1).
    pub tangent: Vec<f64>,
    pub rounds: u32,
}

pub(crate) fn vmf_draw<R: Rng + ?Sized>(m: usize, kappa: f64, rng: &mut R) -> VmfDraw {
    let mf = m as f64;
    let b = (-2.0 * kappa + (4.0 * kappa * kappa + (mf - 1.0) * (mf - 1.0)).sqrt()) / (mf - 1.0);
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + (mf - 1.0) * (1.0 - x0 * x0).ln();
    let beta = Beta::new((mf - 1.0) / 2.0, (mf - 1.0) / 2.0).expect("valid shape");
    let mut rounds = 0u32;
    let psi = loop {
        rounds += 1;
        let psi: f64 = beta.sample(rng);
        let w = proposal_w(b, psi);
        let u: f64 = rng.random_range(0.0..1.0f64);
        if kappa * w + (mf - 1.0) * (1.0 - x0 * w).ln() - c >= u.ln() {
            break psi;
        }
    };
    let mut tangent: Vec<f64> = (0..m - 1).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        tangent[0] = 1.0;
    } else {
        for v in tangent.iter_mut() {
            *v /= norm;
        }
    }
    VmfDraw { psi, tangent, rounds }
}

/// w as a (kappa-differentiable) function of the proposal parameter b and the
/// accepted Beta draw.
pub(crate) fn proposal_w(b: f64, psi: f64) -> f64 {
    (1.0 - (1.0 + b) * psi) / (1.0 - (1.0 - b) * psi)
}

/// Map a scalar component w and tangent direction to the sphere, rotating the
/// north pole e_1 onto mu with a Householder reflection.
pub(crate) fn assemble_on_sphere(mu: &[f64], w: f64, tangent: &[f64]) -> Vec<f64> {
    let m = mu.len();
    let scale = (1.0 - w * w).max(0.0).sqrt();
    let mut north = Vec::with_capacity(m);
    north.push(w);
    north.extend(tangent.iter().map(|t| t * scale));
    // Householder u = normalize(e_1 - mu); H x = x - 2 u (u . x)
    let mut u: Vec<f64> = mu.iter().map(|v| -v).collect();
    u[0] += 1.0;
    let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if un < 1e-12 {
        // mu is (numerically) the north pole itself
        return north;
    }
    for v in u.iter_mut() {
        *v /= un;
    }
    let d: f64 = u.iter().zip(north.iter()).map(|(a, b)| a * b).sum();
    north
        .iter()
        .zip(u.iter())
        .map(|(x, uv)| x - 2.0 * uv * d)
        .collect()
}

/// Draw one sample from vMF(mu, kappa). The result has unit norm.
pub fn vmf_sample<R: Rng + ?Sized>(params: &VmfParams, rng: &mut R) -> Vec<f64> {
    vmf_sample_counting(params, rng).0
}

/// As [`vmf_sample`], also reporting the number of rejection rounds used.
pub fn vmf_sample_counting<R: Rng + ?Sized>(params: &VmfParams, rng: &mut R) -> (Vec<f64>, u32) {
    let draw = vmf_draw(params.dim(), params.kappa(), rng);
    let mf = params.dim() as f64;
    let kappa = params.kappa();
    let b = (-2.0 * kappa + (4.0 * kappa * kappa + (mf - 1.0) * (mf - 1.0)).sqrt()) / (mf - 1.0);
    let w = proposal_w(b, draw.psi);
    let mut s = assemble_on_sphere(&params.mu, w, &draw.tangent);
    // Guard against drift from the reflection arithmetic.
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in s.iter_mut() {
        *v /= norm;
    }
    (s, draw.rounds)
}
