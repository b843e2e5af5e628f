//! Closed-form reference expressions for the built-in example models:
//! minimum outage probabilities, estimator error probabilities, and the
//! piecewise bound displays. These serve as oracles for the numerical
//! engine and as the `min_outage_oracle` bound kind.

use crate::model::TwoSidedExponential;
use libm::erf;

/// Minimum h-outage error probability of the linear Gaussian model,
/// `1 - erf(h / (2 sqrt(2 v)))` with `v` the posterior variance. Also the
/// tightest outage bound and the Ziv-Zakai outage curve for this model.
pub fn linear_gaussian_min_outage(h: f64, post_var: f64) -> f64 {
    1.0 - erf(h / (2.0 * (2.0 * post_var).sqrt()))
}

/// Single-coefficient bound for the linear Gaussian model:
/// `max{0, 1 - h^(1/p) (2 pi v)^(-1/(2p)) ((p-1)/p)^((p-1)/(2p))}`.
pub fn linear_gaussian_single_coeff(h: f64, p: f64, post_var: f64) -> f64 {
    (1.0 - h.powf(1.0 / p) * linear_gaussian_a_p(p, post_var)).max(0.0)
}

/// The factor `A_p = E[(int f^(p/(p-1)))^((p-1)/p)]` for a Gaussian
/// posterior; independent of the observation.
pub fn linear_gaussian_a_p(p: f64, post_var: f64) -> f64 {
    (2.0 * std::f64::consts::PI * post_var).powf(-1.0 / (2.0 * p))
        * ((p - 1.0) / p).powf((p - 1.0) / (2.0 * p))
}

/// Tightest outage bound for the two-sided exponential model,
/// `1/2 E[exp((d_x(h) - h) x / l2) + exp(-d_x(h) x / l1)]`. By unimodality
/// this equals the minimum h-outage error probability.
pub fn two_sided_exp_tightest(model: &TwoSidedExponential, h: f64) -> f64 {
    let (l1, l2) = (model.lambda1(), model.lambda2());
    0.5 * model
        .atoms()
        .iter()
        .map(|a| {
            let d = model.window_point(a.value, h);
            a.prob * (((d - h) * a.value / l2).exp() + (-d * a.value / l1).exp())
        })
        .sum::<f64>()
}

/// Outage probability of the MAP estimator (0) for the two-sided
/// exponential model: `1/2 E[exp(-h x / (2 l1)) + exp(-h x / (2 l2))]`.
pub fn two_sided_exp_map_outage(model: &TwoSidedExponential, h: f64) -> f64 {
    let (l1, l2) = (model.lambda1(), model.lambda2());
    0.5 * model
        .atoms()
        .iter()
        .map(|a| {
            a.prob
                * ((-h * a.value / (2.0 * l1)).exp() + (-h * a.value / (2.0 * l2)).exp())
        })
        .sum::<f64>()
}

fn two_sided_cdf(model: &TwoSidedExponential, x: f64, t: f64) -> f64 {
    if t < 0.0 {
        0.5 * (t * x / model.lambda2()).exp()
    } else {
        1.0 - 0.5 * (-t * x / model.lambda1()).exp()
    }
}

/// h-outage probability of the h-tilde-MAP estimator
/// `d_x(h_tilde) - h_tilde/2` on the two-sided exponential model, evaluated
/// from the posterior cdf over the window
/// `[d - (h + h_tilde)/2, d + (h - h_tilde)/2]`.
pub fn two_sided_exp_h_map_outage(model: &TwoSidedExponential, h: f64, h_tilde: f64) -> f64 {
    1.0 - model
        .atoms()
        .iter()
        .map(|a| {
            let d = model.window_point(a.value, h_tilde);
            let lo = d - 0.5 * (h + h_tilde);
            let hi = d + 0.5 * (h - h_tilde);
            a.prob * (two_sided_cdf(model, a.value, hi) - two_sided_cdf(model, a.value, lo))
        })
        .sum::<f64>()
}

/// h-outage probability of the MMSE estimator `(l1 - l2)/(2x)` on the
/// two-sided exponential model, evaluated from the posterior cdf over the
/// window `[(a_x - h)/2, (a_x + h)/2]` with `a_x = (l1 - l2)/x`.
pub fn two_sided_exp_mmse_outage(model: &TwoSidedExponential, h: f64) -> f64 {
    let (l1, l2) = (model.lambda1(), model.lambda2());
    1.0 - model
        .atoms()
        .iter()
        .map(|a| {
            let ax = (l1 - l2) / a.value;
            let lo = 0.5 * (ax - h);
            let hi = 0.5 * (ax + h);
            a.prob * (two_sided_cdf(model, a.value, hi) - two_sided_cdf(model, a.value, lo))
        })
        .sum::<f64>()
}

/// `b(h) = 6 - h - (6 - 2h) erf(h / (2 sqrt(2 var)))` from the piecewise
/// displays of the uniform-intervals model.
pub fn uniform_gauss_b(h: f64, var: f64) -> f64 {
    let s = (2.0 * var).sqrt();
    6.0 - h - (6.0 - 2.0 * h) * erf(h / (2.0 * s))
}

/// Threshold `g(h)` solving
/// `2 erf(h / (2 sqrt(2 var))) = erf((g + 3)/sqrt(2 var)) - erf((g - 6)/sqrt(2 var))`
/// by bisection on `[0, 1.5]`, to 1e-13 bracket width.
///
/// The right-hand side increases in `g` up to its peak at `g = 1.5` (where
/// it meets the left-hand side at `h = 9`). For small enough `h` the target
/// lies below the `g = 0` value, i.e. the centered window never beats a
/// window pinned to one support component; the threshold is clamped to 0
/// there, which also keeps the piecewise minimum-outage display continuous
/// at `h = 6`.
pub fn uniform_gauss_g(h: f64, var: f64) -> f64 {
    let s = (2.0 * var).sqrt();
    let target = 2.0 * erf(h / (2.0 * s));
    let rhs = |g: f64| erf((g + 3.0) / s) - erf((g - 6.0) / s);
    if target <= rhs(0.0) {
        return 0.0;
    }
    if target >= rhs(1.5) {
        return 1.5;
    }
    let (mut lo, mut hi) = (0.0f64, 1.5f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimum h-outage error probability of the uniform-intervals Gaussian
/// model (piecewise in h; `g(h)` solved by bisection).
pub fn uniform_gauss_min_outage(h: f64, var: f64) -> f64 {
    let s = (2.0 * var).sqrt();
    let amp = (2.0 * var / std::f64::consts::PI).sqrt();
    let e = |t: f64| (-t * t / (2.0 * var)).exp();
    if h < 0.0 {
        return 1.0;
    }
    if h < 3.0 {
        (uniform_gauss_b(h, var) - (3.0 + h) * erf((3.0 + h) / s) + 3.0 * erf(3.0 / s)
            + amp * (e(3.0) - e(3.0 + h)))
            / 6.0
    } else if h < 6.0 {
        (3.0 - 6.0 * erf(6.0 / s) + 3.0 * erf(3.0 / s) + amp * (e(3.0) - e(6.0))) / 6.0
    } else if h < 9.0 {
        let g = uniform_gauss_g(h, var);
        (3.0 + 3.0 * erf((g + 3.0) / s) - 6.0 * erf((6.0 - g) / s)
            + amp * (e(g + 3.0) - e(6.0 - g)))
            / 6.0
    } else if h < 12.0 {
        (12.0 - h) / 6.0 * (1.0 - erf(h / (2.0 * s)))
    } else {
        0.0
    }
}

/// Valley-filled tightest outage bound display for the uniform-intervals
/// Gaussian model.
pub fn uniform_gauss_tightest_display(h: f64, var: f64) -> f64 {
    let s = (2.0 * var).sqrt();
    if h < 0.0 {
        return 1.0;
    }
    if h < 3.0 {
        (uniform_gauss_b(h, var) - h * erf((0.5 * h + 3.0) / s)) / 6.0
    } else if h < 9.0 {
        0.5 * (1.0 - erf(9.0 / (2.0 * s)))
    } else if h < 12.0 {
        (12.0 - h) / 6.0 * (1.0 - erf(h / (2.0 * s)))
    } else {
        0.0
    }
}

/// Ziv-Zakai outage curve display (valley-filled by definition) for the
/// uniform-intervals Gaussian model.
pub fn uniform_gauss_zzlb_display(h: f64, var: f64) -> f64 {
    let s = (2.0 * var).sqrt();
    if h < 0.0 {
        return 1.0;
    }
    if h < 3.0 {
        let flat = 3.0 - 3.0 * erf(9.0 / (2.0 * s));
        (uniform_gauss_b(h, var) - h).max(flat) / 6.0
    } else if h < 9.0 {
        0.5 * (1.0 - erf(9.0 / (2.0 * s)))
    } else if h < 12.0 {
        (12.0 - h) / 6.0 * (1.0 - erf(h / (2.0 * s)))
    } else {
        0.0
    }
}

/// The h-MAP estimator display for the uniform-intervals Gaussian model,
/// transcribed as printed.
///
/// Known defect: for `6 < h <= 9` the branch selecting the centered window
/// via `g(h) < |x| < 1.5` misassigns part of the axis (a centered window is
/// not even feasible for `1.5 < |x| < 6 - h/2`); the numeric h-MAP search is
/// the authority wherever they disagree.
pub fn uniform_gauss_h_map_printed(x: f64, h: f64, var: f64) -> f64 {
    let sgn = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    };
    let a = x.abs();
    if h >= 12.0 {
        return 0.0;
    }
    if a > 6.0 - 0.5 * h {
        return (6.0 - 0.5 * h) * sgn;
    }
    if (6.0..=9.0).contains(&h) && h > 6.0 {
        let g = uniform_gauss_g(h, var);
        if g < a && a < 1.5 {
            return (6.0 - 0.5 * h) * sgn;
        }
    }
    if h <= 6.0 && a < 3.0 + 0.5 * h {
        return (3.0 + 0.5 * h) * sgn;
    }
    x
}
