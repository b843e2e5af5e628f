//! Uniform prior on two intervals observed through additive Gaussian noise.

use super::{gauss_pdf, BayesModel, ObservationLaw, GAUSS_WINDOW_SIGMAS};
use crate::error::{Error, Result};
use crate::rng;
use libm::erf;

const PIECES: [(f64, f64); 2] = [(-6.0, -3.0), (3.0, 6.0)];
const PRIOR_DENSITY: f64 = 1.0 / 6.0;

/// `x = theta + w` with `theta` uniform on `[-6,-3] U [3,6]` (density 1/6)
/// and `w ~ N(0, var_noise)`. The posterior is the Gaussian likelihood
/// restricted to the prior support and renormalized by the erf expression
/// `c(x)`.
#[derive(Clone, Debug)]
pub struct UniformIntervalsGaussian {
    var_noise: f64,
    sigma: f64,
    /// `sqrt(2 var_noise)`, the scale inside every erf argument.
    s: f64,
}

impl UniformIntervalsGaussian {
    pub fn new(var_noise: f64) -> Result<Self> {
        if !(var_noise > 0.0) || !var_noise.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "var_noise {var_noise} must be positive and finite"
            )));
        }
        Ok(Self {
            var_noise,
            sigma: var_noise.sqrt(),
            s: (2.0 * var_noise).sqrt(),
        })
    }

    pub fn var_noise(&self) -> f64 {
        self.var_noise
    }

    /// Posterior normalizer: twice the likelihood mass over the support.
    pub fn c(&self, x: f64) -> f64 {
        erf((x + 6.0) / self.s) - erf((x - 6.0) / self.s) + erf((x - 3.0) / self.s)
            - erf((x + 3.0) / self.s)
    }

    fn in_support(phi: f64) -> bool {
        let a = phi.abs();
        (3.0..=6.0).contains(&a)
    }

    /// Likelihood mass of `[lo, min(t, hi)]` around center `x`.
    fn piece_mass(&self, x: f64, lo: f64, hi: f64, t: f64) -> f64 {
        if t <= lo {
            return 0.0;
        }
        let upper = t.min(hi);
        0.5 * (erf((upper - x) / self.s) - erf((lo - x) / self.s))
    }
}

impl BayesModel for UniformIntervalsGaussian {
    fn posterior_pdf(&self, x: f64, phi: f64) -> f64 {
        if !Self::in_support(phi) {
            return 0.0;
        }
        2.0 / self.c(x) * gauss_pdf(phi - x, self.var_noise)
    }

    fn posterior_cdf(&self, x: f64, t: f64) -> Option<f64> {
        let mass: f64 = PIECES
            .iter()
            .map(|&(lo, hi)| self.piece_mass(x, lo, hi, t))
            .sum();
        Some(2.0 / self.c(x) * mass)
    }

    fn support_pieces(&self, _x: f64) -> Vec<(f64, f64)> {
        PIECES.to_vec()
    }

    fn posterior_breakpoints(&self, _x: f64) -> Vec<f64> {
        vec![-6.0, -3.0, 3.0, 6.0]
    }

    fn observation_law(&self) -> ObservationLaw<'_> {
        let r = GAUSS_WINDOW_SIGMAS * self.sigma;
        ObservationLaw::Continuous {
            window: (-6.0 - r, 6.0 + r),
            exact_marginal: true,
        }
    }

    fn marginal_pdf(&self, x: f64) -> Option<f64> {
        // Prior density times likelihood mass: c(x)/2 * 1/6.
        Some(self.c(x) / 12.0)
    }

    fn prior_pdf(&self, phi: f64) -> Option<f64> {
        Some(if Self::in_support(phi) { PRIOR_DENSITY } else { 0.0 })
    }

    fn sample_joint(&self, seed: u64, trial: u64) -> Result<(f64, f64)> {
        let mut r = rng::trial_rng(seed, trial);
        let u = rng::uniform(&mut r);
        let theta = if u < 0.5 {
            -6.0 + 3.0 * (2.0 * u)
        } else {
            3.0 + 3.0 * (2.0 * u - 1.0)
        };
        let x = theta + self.sigma * rng::standard_normal(&mut r);
        Ok((x, theta))
    }

    fn posterior_fn(&self, x: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        let norm =
            2.0 / (self.c(x) * (2.0 * std::f64::consts::PI * self.var_noise).sqrt());
        let half_inv_var = 0.5 / self.var_noise;
        Box::new(move |phi| {
            if !Self::in_support(phi) {
                return 0.0;
            }
            let d = phi - x;
            norm * (-d * d * half_inv_var).exp()
        })
    }

    fn posterior_cdf_fn(&self, x: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        let scale = 2.0 / self.c(x);
        let s = self.s;
        let base = [
            erf((-6.0 - x) / s),
            erf((3.0 - x) / s),
        ];
        Some(Box::new(move |t| {
            let mut mass = 0.0;
            if t > -6.0 {
                mass += 0.5 * (erf((t.min(-3.0) - x) / s) - base[0]);
            }
            if t > 3.0 {
                mass += 0.5 * (erf((t.min(6.0) - x) / s) - base[1]);
            }
            scale * mass
        }))
    }

    fn mmse_closed(&self, x: f64) -> Option<f64> {
        let e = |t: f64| (-t * t / (2.0 * self.var_noise)).exp();
        Some(
            x + (2.0 * self.var_noise / std::f64::consts::PI).sqrt() / self.c(x)
                * (e(x + 6.0) - e(x + 3.0) - e(x - 6.0) + e(x - 3.0)),
        )
    }

    fn map_closed(&self, x: f64) -> Option<f64> {
        // Closest support point to x; the leftmost one on the measure-zero tie.
        let s = if x > 0.0 { 1.0 } else { -1.0 };
        let a = x.abs();
        Some(if a > 6.0 {
            6.0 * s
        } else if a >= 3.0 {
            x
        } else {
            3.0 * s
        })
    }

    fn min_outage_closed(&self, h: f64) -> Option<f64> {
        Some(crate::closed_form::uniform_gauss_min_outage(h, self.var_noise))
    }
}
