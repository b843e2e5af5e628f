//! Linear Gaussian model: `x = theta + n` with Gaussian prior and noise.

use super::{gauss_pdf, std_normal_cdf, BayesModel, ObservationLaw, GAUSS_WINDOW_SIGMAS};
use crate::error::{Error, Result};
use crate::rng;

/// `theta ~ N(mu_theta, var_theta)`, `n ~ N(0, var_noise)`, observed
/// `x = theta + n`. The posterior is Gaussian with variance
/// `var_theta * var_noise / (var_theta + var_noise)` independent of `x`.
#[derive(Clone, Debug)]
pub struct LinearGaussian {
    mu_theta: f64,
    var_theta: f64,
    var_noise: f64,
    post_var: f64,
    post_sd: f64,
    gain: f64,
    obs_sd: f64,
}

impl LinearGaussian {
    pub fn new(mu_theta: f64, var_theta: f64, var_noise: f64) -> Result<Self> {
        if !mu_theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu_theta {mu_theta} is not finite"
            )));
        }
        for (name, v) in [("var_theta", var_theta), ("var_noise", var_noise)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} {v} must be positive and finite"
                )));
            }
        }
        let post_var = var_theta * var_noise / (var_theta + var_noise);
        Ok(Self {
            mu_theta,
            var_theta,
            var_noise,
            post_var,
            post_sd: post_var.sqrt(),
            gain: var_theta / (var_theta + var_noise),
            obs_sd: (var_theta + var_noise).sqrt(),
        })
    }

    pub fn mu_theta(&self) -> f64 {
        self.mu_theta
    }

    pub fn var_theta(&self) -> f64 {
        self.var_theta
    }

    pub fn var_noise(&self) -> f64 {
        self.var_noise
    }

    /// Posterior variance, independent of the observation.
    pub fn posterior_var(&self) -> f64 {
        self.post_var
    }

    /// Posterior mean `E[theta | x]`.
    pub fn posterior_mean(&self, x: f64) -> f64 {
        self.mu_theta + self.gain * (x - self.mu_theta)
    }
}

impl BayesModel for LinearGaussian {
    fn posterior_pdf(&self, x: f64, phi: f64) -> f64 {
        gauss_pdf(phi - self.posterior_mean(x), self.post_var)
    }

    fn posterior_cdf(&self, x: f64, t: f64) -> Option<f64> {
        Some(std_normal_cdf((t - self.posterior_mean(x)) / self.post_sd))
    }

    fn support_pieces(&self, x: f64) -> Vec<(f64, f64)> {
        let m = self.posterior_mean(x);
        let r = GAUSS_WINDOW_SIGMAS * self.post_sd;
        vec![(m - r, m + r)]
    }

    fn observation_law(&self) -> ObservationLaw<'_> {
        let r = GAUSS_WINDOW_SIGMAS * self.obs_sd;
        ObservationLaw::Continuous {
            window: (self.mu_theta - r, self.mu_theta + r),
            exact_marginal: true,
        }
    }

    fn marginal_pdf(&self, x: f64) -> Option<f64> {
        Some(gauss_pdf(x - self.mu_theta, self.var_theta + self.var_noise))
    }

    fn prior_pdf(&self, phi: f64) -> Option<f64> {
        Some(gauss_pdf(phi - self.mu_theta, self.var_theta))
    }

    fn sample_joint(&self, seed: u64, trial: u64) -> Result<(f64, f64)> {
        let mut r = rng::trial_rng(seed, trial);
        let theta = self.mu_theta + self.var_theta.sqrt() * rng::standard_normal(&mut r);
        let x = theta + self.var_noise.sqrt() * rng::standard_normal(&mut r);
        Ok((x, theta))
    }

    fn sample_observation(&self, seed: u64, trial: u64) -> Result<f64> {
        let mut r = rng::trial_rng(seed, trial);
        Ok(self.mu_theta + self.obs_sd * rng::standard_normal(&mut r))
    }

    fn posterior_fn(&self, x: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        let mean = self.posterior_mean(x);
        let norm = 1.0 / (2.0 * std::f64::consts::PI * self.post_var).sqrt();
        let half_inv_var = 0.5 / self.post_var;
        Box::new(move |phi| {
            let d = phi - mean;
            norm * (-d * d * half_inv_var).exp()
        })
    }

    fn posterior_cdf_fn(&self, x: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        let mean = self.posterior_mean(x);
        let sd = self.post_sd;
        Some(Box::new(move |t| std_normal_cdf((t - mean) / sd)))
    }

    fn mmse_closed(&self, x: f64) -> Option<f64> {
        Some(self.posterior_mean(x))
    }

    fn map_closed(&self, x: f64) -> Option<f64> {
        Some(self.posterior_mean(x))
    }

    // Symmetric unimodal posterior: the h-MAP estimate equals the MMSE
    // estimate for every h.
    fn h_map_closed(&self, x: f64, _h: f64) -> Option<f64> {
        Some(self.posterior_mean(x))
    }

    fn min_outage_closed(&self, h: f64) -> Option<f64> {
        Some(crate::closed_form::linear_gaussian_min_outage(h, self.post_var))
    }
}
