//! Gaussian-mixture posterior with a degenerate observation law. Used for
//! randomized property checks and as a generic multimodal test model.

use super::{gauss_pdf, pick_atom, std_normal_cdf, Atom, BayesModel, ObservationLaw};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

/// Posterior `sum_i w_i N(mean_i, var_i)`, identical for every observation.
/// The observation law is a single atom, so expectations over `x` are exact.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
    atoms: Vec<Atom>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "component weight {} must be positive",
                    c.weight
                )));
            }
            if !(c.var > 0.0) || !c.var.is_finite() || !c.mean.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "component mean {} / var {} invalid",
                    c.mean, c.var
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "component weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(Self {
            components,
            atoms: vec![Atom {
                value: 0.0,
                prob: 1.0,
            }],
        })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }
}

impl BayesModel for GaussianMixture {
    fn posterior_pdf(&self, _x: f64, phi: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * gauss_pdf(phi - c.mean, c.var))
            .sum()
    }

    fn posterior_cdf(&self, _x: f64, t: f64) -> Option<f64> {
        Some(
            self.components
                .iter()
                .map(|c| c.weight * std_normal_cdf((t - c.mean) / c.var.sqrt()))
                .sum(),
        )
    }

    fn support_pieces(&self, _x: f64) -> Vec<(f64, f64)> {
        let lo = self
            .components
            .iter()
            .map(|c| c.mean - super::GAUSS_WINDOW_SIGMAS * c.var.sqrt())
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .components
            .iter()
            .map(|c| c.mean + super::GAUSS_WINDOW_SIGMAS * c.var.sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        vec![(lo, hi)]
    }

    fn observation_law(&self) -> ObservationLaw<'_> {
        ObservationLaw::Discrete(&self.atoms)
    }

    fn sample_joint(&self, seed: u64, trial: u64) -> Result<(f64, f64)> {
        let mut r = rng::trial_rng(seed, trial);
        let k = {
            let u = rng::uniform(&mut r);
            let cs: Vec<Atom> = self
                .components
                .iter()
                .map(|c| Atom {
                    value: c.mean,
                    prob: c.weight,
                })
                .collect();
            pick_atom(&cs, u)
        };
        let c = self.components[k];
        let theta = c.mean + c.var.sqrt() * rng::standard_normal(&mut r);
        Ok((0.0, theta))
    }

    fn mmse_closed(&self, _x: f64) -> Option<f64> {
        Some(self.components.iter().map(|c| c.weight * c.mean).sum())
    }
}
