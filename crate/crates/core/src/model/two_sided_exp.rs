//! Two-sided exponential posterior with a discrete positive observation.

use super::{pick_atom, validate_atoms, Atom, BayesModel, ObservationLaw, EXP_WINDOW_LENGTHS};
use crate::error::{Error, Result};
use crate::rng;

/// Posterior
/// `f(phi | x) = x/(2 l1) exp(-phi x / l1)` for `phi >= 0` and
/// `x/(2 l2) exp(phi x / l2)` for `phi < 0`, with `0 < l1 < l2` and a
/// discrete law over positive observations. Each half-line carries mass 1/2;
/// the mode sits at 0 with value `x / (2 l1)`.
#[derive(Clone, Debug)]
pub struct TwoSidedExponential {
    lambda1: f64,
    lambda2: f64,
    atoms: Vec<Atom>,
}

impl TwoSidedExponential {
    pub fn new(lambda1: f64, lambda2: f64, atoms: Vec<Atom>) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} {v} must be positive and finite"
                )));
            }
        }
        if lambda1 >= lambda2 {
            return Err(Error::InvalidParameter(format!(
                "lambda1 {lambda1} must be strictly smaller than lambda2 {lambda2}"
            )));
        }
        validate_atoms(&atoms)?;
        if atoms.iter().any(|a| a.value <= 0.0) {
            return Err(Error::InvalidParameter(
                "observation atoms must be positive".into(),
            ));
        }
        Ok(Self {
            lambda1,
            lambda2,
            atoms,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Unconstrained equal-tail point of the optimal width-`h` window.
    pub fn window_point_raw(&self, x: f64, h: f64) -> f64 {
        ((self.lambda2 / self.lambda1).ln() + x * h / self.lambda2) * self.lambda1 * self.lambda2
            / (x * (self.lambda1 + self.lambda2))
    }

    /// Right edge of the optimal width-`h` posterior window, clamped to
    /// `[0, h]`.
    pub fn window_point(&self, x: f64, h: f64) -> f64 {
        self.window_point_raw(x, h).clamp(0.0, h)
    }

    fn cdf(&self, x: f64, t: f64) -> f64 {
        if t < 0.0 {
            0.5 * (t * x / self.lambda2).exp()
        } else {
            1.0 - 0.5 * (-t * x / self.lambda1).exp()
        }
    }
}

impl BayesModel for TwoSidedExponential {
    fn posterior_pdf(&self, x: f64, phi: f64) -> f64 {
        if phi >= 0.0 {
            x / (2.0 * self.lambda1) * (-phi * x / self.lambda1).exp()
        } else {
            x / (2.0 * self.lambda2) * (phi * x / self.lambda2).exp()
        }
    }

    fn posterior_cdf(&self, x: f64, t: f64) -> Option<f64> {
        Some(self.cdf(x, t))
    }

    fn support_pieces(&self, x: f64) -> Vec<(f64, f64)> {
        vec![(
            -EXP_WINDOW_LENGTHS * self.lambda2 / x,
            EXP_WINDOW_LENGTHS * self.lambda1 / x,
        )]
    }

    fn posterior_breakpoints(&self, _x: f64) -> Vec<f64> {
        vec![0.0]
    }

    fn observation_law(&self) -> ObservationLaw<'_> {
        ObservationLaw::Discrete(&self.atoms)
    }

    fn sample_joint(&self, seed: u64, trial: u64) -> Result<(f64, f64)> {
        let mut r = rng::trial_rng(seed, trial);
        let x = self.atoms[pick_atom(&self.atoms, rng::uniform(&mut r))].value;
        let u = rng::uniform(&mut r);
        // Inverse posterior cdf: mass 1/2 on each half-line.
        let theta = if u < 0.5 {
            self.lambda2 / x * (2.0 * u).ln()
        } else {
            -self.lambda1 / x * (2.0 * (1.0 - u)).ln()
        };
        Ok((x, theta))
    }

    fn posterior_fn(&self, x: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        let a1 = x / (2.0 * self.lambda1);
        let a2 = x / (2.0 * self.lambda2);
        let r1 = x / self.lambda1;
        let r2 = x / self.lambda2;
        Box::new(move |phi| {
            if phi >= 0.0 {
                a1 * (-phi * r1).exp()
            } else {
                a2 * (phi * r2).exp()
            }
        })
    }

    fn posterior_cdf_fn(&self, x: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        let r1 = x / self.lambda1;
        let r2 = x / self.lambda2;
        Some(Box::new(move |t| {
            if t < 0.0 {
                0.5 * (t * r2).exp()
            } else {
                1.0 - 0.5 * (-t * r1).exp()
            }
        }))
    }

    fn mmse_closed(&self, x: f64) -> Option<f64> {
        Some((self.lambda1 - self.lambda2) / (2.0 * x))
    }

    fn map_closed(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }

    fn h_map_closed(&self, x: f64, h: f64) -> Option<f64> {
        Some(self.window_point(x, h) - 0.5 * h)
    }

    fn min_outage_closed(&self, h: f64) -> Option<f64> {
        Some(crate::closed_form::two_sided_exp_tightest(self, h))
    }
}
