//! Numerical core for the two latent distributions: von Mises-Fisher sampling
//! and KL to the uniform prior, diagonal Gaussian sampling and KL to N(0, I),
//! and the Bessel plumbing the vMF normalizer needs.

mod bessel;
mod gaussian;
mod vmf;

pub use bessel::{log_bessel_iv, log_iv_series};
pub use gaussian::{gaussian_kl_to_std, gaussian_sample, GaussianParams};
pub use vmf::{
    bessel_ratio, vmf_kl_scalar, vmf_kl_to_uniform, vmf_sample, vmf_sample_counting, VmfParams,
};
pub(crate) use vmf::vmf_draw;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("log_bessel_iv domain error: order={order}, x={x} (need order >= 0, x > 0)")]
    BesselDomain { order: f64, x: f64 },

    #[error("vMF mean direction must be unit length (|mu| = {norm})")]
    MuNotUnit { norm: f64 },

    #[error("vMF concentration must be nonnegative and finite (kappa = {kappa})")]
    BadKappa { kappa: f64 },

    #[error("vMF dimension must be at least 2 (got {dim})")]
    BadVmfDim { dim: usize },

    #[error("Gaussian sigma must be strictly positive (sigma[{index}] = {value})")]
    BadSigma { index: usize, value: f64 },

    #[error("Gaussian mu and sigma dimensions differ: {mu_len} vs {sigma_len}")]
    GaussianDimMismatch { mu_len: usize, sigma_len: usize },
}

pub type Result<T> = std::result::Result<T, DistError>;
