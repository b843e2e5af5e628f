//! Bayesian estimation problem abstraction: posterior density, parameter
//! support, observation law, and joint sampling, plus the built-in example
//! models with their closed-form reference quantities.

mod gaussian_mixture;
mod linear_gaussian;
mod two_sided_exp;
mod uniform_gauss;

pub use gaussian_mixture::{GaussianMixture, MixtureComponent};
pub use linear_gaussian::LinearGaussian;
pub use two_sided_exp::TwoSidedExponential;
pub use uniform_gauss::UniformIntervalsGaussian;

use crate::error::{Error, Result};

/// One point of a discrete observation law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// How observations are distributed.
///
/// Discrete laws give exact expectations. Continuous laws are sampled; when
/// the model also exposes its observation marginal (`exact_marginal`),
/// expectations can instead be computed by deterministic quadrature over
/// `window`.
#[derive(Clone, Debug)]
pub enum ObservationLaw<'a> {
    Discrete(&'a [Atom]),
    Continuous {
        window: (f64, f64),
        exact_marginal: bool,
    },
}

/// A Bayesian scalar estimation problem.
///
/// Implementations are immutable after construction and safe to share across
/// threads; samplers are pure functions of `(seed, trial)`.
pub trait BayesModel: Send + Sync {
    /// Posterior density `f(phi | x)`; exactly 0 outside the parameter support.
    fn posterior_pdf(&self, x: f64, phi: f64) -> f64;

    /// Posterior cdf when a closed form exists.
    fn posterior_cdf(&self, _x: f64, _t: f64) -> Option<f64> {
        None
    }

    /// Closed intervals covering the posterior mass up to tail < 1e-12,
    /// ordered and disjoint. For bounded supports these are exact.
    fn support_pieces(&self, x: f64) -> Vec<(f64, f64)>;

    /// Hull of [`Self::support_pieces`].
    fn posterior_window(&self, x: f64) -> (f64, f64) {
        let pieces = self.support_pieces(x);
        (
            pieces.first().map(|p| p.0).unwrap_or(0.0),
            pieces.last().map(|p| p.1).unwrap_or(0.0),
        )
    }

    /// Discontinuity or kink locations of `phi -> posterior_pdf(x, phi)`,
    /// used to seed adaptive quadrature.
    fn posterior_breakpoints(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    fn observation_law(&self) -> ObservationLaw<'_>;

    /// Marginal observation density, when the model knows it exactly.
    fn marginal_pdf(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Prior parameter density, when available.
    fn prior_pdf(&self, _phi: f64) -> Option<f64> {
        None
    }

    /// Draw `(x, theta)` from the joint law. Deterministic in `(seed, trial)`.
    fn sample_joint(&self, seed: u64, trial: u64) -> Result<(f64, f64)>;

    /// Draw an observation from the marginal law. Deterministic in `(seed, trial)`.
    fn sample_observation(&self, seed: u64, trial: u64) -> Result<f64> {
        self.sample_joint(seed, trial).map(|(x, _)| x)
    }

    /// Fast per-`x` posterior evaluator with per-observation constants
    /// precomputed. Hot loops should prefer this over `posterior_pdf`.
    fn posterior_fn(&self, x: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        Box::new(move |phi| self.posterior_pdf(x, phi))
    }

    /// Fast per-`x` posterior cdf evaluator, when a closed form exists.
    fn posterior_cdf_fn(&self, x: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        self.posterior_cdf(x, 0.0)?;
        Some(Box::new(move |t| {
            self.posterior_cdf(x, t).expect("cdf availability is per-model")
        }))
    }

    /// Closed-form MMSE estimate, when available.
    fn mmse_closed(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Closed-form MAP estimate, when available.
    fn map_closed(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Closed-form h-MAP estimate, when available.
    fn h_map_closed(&self, _x: f64, _h: f64) -> Option<f64> {
        None
    }

    /// Closed-form minimum h-outage error probability, when available.
    fn min_outage_closed(&self, _h: f64) -> Option<f64> {
        None
    }
}

/// Validates a discrete law: positive finite values, positive probabilities
/// summing to 1 within 1e-12.
pub(crate) fn validate_atoms(atoms: &[Atom]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter(
            "discrete observation law needs at least one atom".into(),
        ));
    }
    let mut total = 0.0;
    for a in atoms {
        if !a.value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "atom value {} is not finite",
                a.value
            )));
        }
        if !(a.prob > 0.0) || !a.prob.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "atom probability {} must be positive",
                a.prob
            )));
        }
        total += a.prob;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "atom probabilities sum to {total}, expected 1 within 1e-12"
        )));
    }
    Ok(())
}

/// Picks an atom index from a uniform draw via the cumulative distribution.
pub(crate) fn pick_atom(atoms: &[Atom], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        acc += a.prob;
        if u < acc {
            return i;
        }
    }
    atoms.len() - 1
}

/// Gaussian density with the given variance, evaluated at a displacement
/// from the mean.
pub(crate) fn gauss_pdf(dev: f64, var: f64) -> f64 {
    (-dev * dev / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Standard normal cdf.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Number of posterior standard deviations kept inside truncation windows.
/// The discarded tail mass is below 1e-16, comfortably under the 1e-12
/// window contract.
pub(crate) const GAUSS_WINDOW_SIGMAS: f64 = 8.5;

/// Exponential-tail window in units of the decay length: exp(-38) < 1e-16.
pub(crate) const EXP_WINDOW_LENGTHS: f64 = 38.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example2() -> TwoSidedExponential {
        TwoSidedExponential::new(
            1.0,
            10.0,
            vec![
                Atom { value: 1.0, prob: 0.5 },
                Atom { value: 2.0, prob: 0.5 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn construction_rejects_invalid_parameters() {
        assert!(LinearGaussian::new(0.0, 0.0, 1.0).is_err());
        assert!(LinearGaussian::new(0.0, 1.0, -1.0).is_err());
        assert!(LinearGaussian::new(f64::NAN, 1.0, 1.0).is_err());
        // lambda1 >= lambda2 is rejected rather than guessed at.
        assert!(TwoSidedExponential::new(1.0, 1.0, vec![Atom { value: 1.0, prob: 1.0 }]).is_err());
        assert!(TwoSidedExponential::new(2.0, 1.0, vec![Atom { value: 1.0, prob: 1.0 }]).is_err());
        // Atom probabilities must be positive and sum to one.
        assert!(TwoSidedExponential::new(
            1.0,
            10.0,
            vec![Atom { value: 1.0, prob: 0.5 }, Atom { value: 2.0, prob: 0.6 }]
        )
        .is_err());
        assert!(TwoSidedExponential::new(1.0, 10.0, vec![Atom { value: -1.0, prob: 1.0 }]).is_err());
        assert!(UniformIntervalsGaussian::new(0.0).is_err());
        assert!(GaussianMixture::new(vec![]).is_err());
    }

    #[test]
    fn posterior_density_reference_points() {
        // Gaussian posterior at its mean: 1/sqrt(2 pi * 0.5) = 1/sqrt(pi).
        let m1 = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        let mean = m1.posterior_mean(0.0);
        assert_abs_diff_eq!(
            m1.posterior_pdf(0.0, mean),
            1.0 / std::f64::consts::PI.sqrt(),
            epsilon = 1e-15
        );
        // Two-sided exponential mode value x / (2 lambda1).
        let m2 = example2();
        assert_abs_diff_eq!(m2.posterior_pdf(1.0, 0.0), 0.5, epsilon = 0.0);
        // Outside the prior support the posterior vanishes exactly.
        let m3 = UniformIntervalsGaussian::new(100.0).unwrap();
        assert_eq!(m3.posterior_pdf(0.0, 0.0), 0.0);
        assert!(m3.posterior_pdf(0.0, 4.0) > 0.0);
    }

    #[test]
    fn fast_evaluators_match_the_plain_ones() {
        let m1 = LinearGaussian::new(0.3, 2.0, 0.7).unwrap();
        let m2 = example2();
        let m3 = UniformIntervalsGaussian::new(100.0).unwrap();
        let models: [&dyn BayesModel; 3] = [&m1, &m2, &m3];
        for model in models {
            for &x in &[1.0, 2.0] {
                let f = model.posterior_fn(x);
                let cdf = model.posterior_cdf_fn(x).unwrap();
                for i in -20..=20 {
                    let phi = i as f64 * 0.37;
                    assert_abs_diff_eq!(f(phi), model.posterior_pdf(x, phi), epsilon = 1e-14);
                    assert_abs_diff_eq!(
                        cdf(phi),
                        model.posterior_cdf(x, phi).unwrap(),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_trial() {
        let m = example2();
        let a = m.sample_joint(7, 0).unwrap();
        let b = m.sample_joint(7, 0).unwrap();
        assert_eq!(a, b);
        let c = m.sample_joint(7, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_moments_match_the_law() {
        let n = 100_000u64;
        // Linear Gaussian: the theta marginal is the prior.
        let m1 = LinearGaussian::new(0.5, 1.0, 1.0).unwrap();
        let mean = (0..n)
            .map(|t| m1.sample_joint(3, t).unwrap().1)
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean - 0.5).abs() <= 3.0 / (n as f64).sqrt(),
            "prior mean off: {mean}"
        );
        // Two equal atoms: empirical P(x = 1) near 1/2.
        let m2 = example2();
        let p1 = (0..n)
            .map(|t| (m2.sample_joint(9, t).unwrap().0 == 1.0) as u64)
            .sum::<u64>() as f64
            / n as f64;
        assert!((p1 - 0.5).abs() <= 0.005, "atom frequency off: {p1}");
    }

    #[test]
    fn two_sided_posterior_sampler_matches_cdf() {
        // Empirical cdf of theta | x against the analytic cdf.
        let m = example2();
        let n = 50_000u64;
        let mut below_zero = 0u64;
        let mut below_one = 0u64;
        let mut count_x1 = 0u64;
        for t in 0..n {
            let (x, theta) = m.sample_joint(11, t).unwrap();
            if x == 1.0 {
                count_x1 += 1;
                if theta < 0.0 {
                    below_zero += 1;
                }
                if theta < 1.0 {
                    below_one += 1;
                }
            }
        }
        let nf = count_x1 as f64;
        let f0 = below_zero as f64 / nf;
        let f1 = below_one as f64 / nf;
        assert!((f0 - 0.5).abs() < 3.0 / nf.sqrt() + 1e-3);
        let expect = m.posterior_cdf(1.0, 1.0).unwrap();
        assert!((f1 - expect).abs() < 3.0 / nf.sqrt() + 1e-3);
    }

    #[test]
    fn marginals_integrate_to_one() {
        let c = crate::quad::QuadConfig::default();
        for model in [
            &LinearGaussian::new(0.0, 1.0, 1.0).unwrap() as &dyn BayesModel,
            &UniformIntervalsGaussian::new(100.0).unwrap() as &dyn BayesModel,
        ] {
            if let ObservationLaw::Continuous { window, .. } = model.observation_law() {
                let total = crate::quad::integrate(
                    &|x: f64| model.marginal_pdf(x).unwrap(),
                    window.0,
                    window.1,
                    &c,
                    &[],
                )
                .unwrap();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            } else {
                panic!("expected continuous law");
            }
        }
    }
}
