//! Diagonal Gaussian posterior: reparameterized sampling and KL to N(0, I).

use super::{DistError, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Posterior parameters of a diagonal Gaussian in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl GaussianParams {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(DistError::GaussianDimMismatch {
                mu_len: mu.len(),
                sigma_len: sigma.len(),
            });
        }
        for (i, &s) in sigma.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(DistError::BadSigma { index: i, value: s });
            }
        }
        Ok(GaussianParams { mu, sigma })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// mu + sigma ⊙ eps with eps ~ N(0, I).
pub fn gaussian_sample<R: Rng + ?Sized>(params: &GaussianParams, rng: &mut R) -> Vec<f64> {
    params
        .mu
        .iter()
        .zip(params.sigma.iter())
        .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// KL(N(mu, diag(sigma^2)) || N(0, I)) = 0.5 Σ (mu^2 + sigma^2 - 1 - ln sigma^2).
pub fn gaussian_kl_to_std(params: &GaussianParams) -> f64 {
    let kl: f64 = params
        .mu
        .iter()
        .zip(params.sigma.iter())
        .map(|(m, s)| {
            let s2 = s * s;
            0.5 * (m * m + s2 - 1.0 - s2.ln())
        })
        .sum();
    kl.max(0.0)
}
