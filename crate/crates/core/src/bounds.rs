//! Lower bounds on the h-outage error probability: the general
//! Fourier-coefficient class, the single-coefficient bound, the tightest
//! subclass for a given `p`, its `p -> 1+` limit built on the lattice
//! maximum, the Ziv-Zakai outage curve, per-example closed-form oracles,
//! and valley-filling over sampled curves.

use crate::error::{Error, Result};
use crate::model::{BayesModel, ObservationLaw};
use crate::quad::{self, QuadConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Mutex;

/// What a sampled bound curve represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    General,
    SingleCoeff,
    TightestP,
    Tightest,
    ZzlbOutage,
    MinOutageOracle,
    Empirical,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::General => "general",
            BoundKind::SingleCoeff => "single_coeff",
            BoundKind::TightestP => "tightest_p",
            BoundKind::Tightest => "tightest",
            BoundKind::ZzlbOutage => "zzlb_outage",
            BoundKind::MinOutageOracle => "min_outage_oracle",
            BoundKind::Empirical => "empirical",
        }
    }
}

/// A bound (or empirical outage) sampled over an ascending h grid.
#[derive(Clone, Debug)]
pub struct BoundCurve {
    pub h_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: BoundKind,
    pub p: Option<f64>,
    pub valley_filled: bool,
    pub mc_stderr: Option<Vec<f64>>,
}

impl BoundCurve {
    /// Value at an exact grid member.
    pub fn value_at(&self, h: f64) -> Option<f64> {
        self.h_grid
            .iter()
            .position(|&g| (g - h).abs() <= 1e-12 * h.abs().max(1.0))
            .map(|i| self.values[i])
    }
}

/// Valley-filling: suffix maximum over the sampled grid, with values beyond
/// the last grid point treated as 0. The output is non-increasing and
/// dominates the input pointwise.
pub fn valley_fill(curve: &BoundCurve) -> BoundCurve {
    let mut values = curve.values.clone();
    let mut running = 0.0f64;
    for v in values.iter_mut().rev() {
        running = running.max(*v);
        *v = running;
    }
    BoundCurve {
        h_grid: curve.h_grid.clone(),
        values,
        kind: curve.kind,
        p: curve.p,
        valley_filled: true,
        mc_stderr: None,
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold h {h} must be finite and nonnegative"
        )));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Hoelder exponent p {p} must be finite and > 1"
        )));
    }
    Ok(p / (p - 1.0))
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Breakpoints of the h-periodic lattice integrand: every posterior
/// discontinuity collapses to its residue mod h.
fn period_breakpoints(model: &dyn BayesModel, x: f64, h: f64) -> Vec<f64> {
    model
        .posterior_breakpoints(x)
        .into_iter()
        .map(|b| b.rem_euclid(h))
        .collect()
}

/// Runs `inner` over the observation law, surfacing any quadrature error
/// raised inside the expectation integrand.
fn expect_inner(
    model: &dyn BayesModel,
    cfg: &QuadConfig,
    inner: impl Fn(f64) -> Result<f64> + Sync,
) -> Result<f64> {
    let slot: Mutex<Option<Error>> = Mutex::new(None);
    let g = |x: f64| -> f64 {
        match inner(x) {
            Ok(v) => v,
            Err(e) => {
                let partial = match &e {
                    Error::QuadratureFailure { partial, .. } => *partial,
                    _ => f64::NAN,
                };
                let mut guard = slot.lock().unwrap();
                if guard.is_none() {
                    *guard = Some(e);
                }
                partial
            }
        }
    };
    let e = quad::expect_over_x(model, &g, cfg, cfg.expect_mc)?;
    if let Some(err) = slot.into_inner().unwrap() {
        return Err(err);
    }
    Ok(e.value)
}

/// Tightest bound in the class (`p -> 1+`):
/// `1 - E[ int_0^h max_l f(phi + l h | x) dphi ]`, clamped to [0, 1].
pub fn tightest_bound(model: &dyn BayesModel, h: f64, cfg: &QuadConfig) -> Result<f64> {
    check_h(h)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    let value = expect_inner(model, cfg, |x| {
        let f = model.posterior_fn(x);
        let window = model.posterior_window(x);
        let bps = period_breakpoints(model, x, h);
        quad::integrate_period(
            &|phi: f64| {
                let vals = quad::lattice_values(&*f, window, phi, h, 1.0, cfg.lattice);
                vals.iter().copied().fold(0.0, f64::max)
            },
            h,
            cfg,
            &bps,
        )
    })?;
    Ok(clamp_unit(1.0 - value))
}

/// Tightest subclass bound for a given `p > 1`:
/// `1 - E[ int_0^h (sum_l f^(p/(p-1))(phi + l h | x))^((p-1)/p) dphi ]`.
pub fn tightest_subclass_bound(
    model: &dyn BayesModel,
    h: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    check_h(h)?;
    let q = check_p(p)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    let value = expect_inner(model, cfg, |x| {
        let f = model.posterior_fn(x);
        let window = model.posterior_window(x);
        let bps = period_breakpoints(model, x, h);
        quad::integrate_period(
            &|phi: f64| {
                let vals = quad::lattice_values(&*f, window, phi, h, q, cfg.lattice);
                quad::lattice_norm_of(&vals, q)
            },
            h,
            cfg,
            &bps,
        )
    })?;
    Ok(clamp_unit(1.0 - value))
}

/// Optimal single-coefficient bound:
/// `max{0, 1 - h^(1/p) E[(int f^(p/(p-1)) dphi)^((p-1)/p)]}`.
pub fn single_coeff_bound(model: &dyn BayesModel, h: f64, p: f64, cfg: &QuadConfig) -> Result<f64> {
    check_h(h)?;
    let factor = single_coeff_factor(model, p, cfg)?;
    Ok(clamp_unit(1.0 - h.powf(1.0 / p) * factor))
}

/// `A_p = E[(int f^(p/(p-1)) dphi)^((p-1)/p)]`, shared between the single
/// coefficient outage bound and its MSE counterpart.
pub fn single_coeff_factor(model: &dyn BayesModel, p: f64, cfg: &QuadConfig) -> Result<f64> {
    let q = check_p(p)?;
    expect_inner(model, cfg, |x| {
        let f = model.posterior_fn(x);
        let (lo, hi) = model.posterior_window(x);
        let bps = model.posterior_breakpoints(x);
        let integral = quad::integrate(&|phi: f64| f(phi).powf(q), lo, hi, cfg, &bps).map_err(
            |e| match e {
                Error::QuadratureFailure { partial, error, .. } => Error::BoundUndefined(format!(
                    "inner integral of f^{q} did not converge (partial {partial:e}, error {error:e})"
                )),
                other => other,
            },
        )?;
        Ok(integral.powf(1.0 / q))
    })
}

/// Ziv-Zakai outage lower bound before valley-filling:
/// `E[ int min(f(phi | x), f(phi + h | x)) dphi ]`, clamped to [0, 1].
/// The published curve applies valley-filling on top of this.
pub fn zzlb_outage(model: &dyn BayesModel, h: f64, cfg: &QuadConfig) -> Result<f64> {
    check_h(h)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    let value = expect_inner(model, cfg, |x| {
        let f = model.posterior_fn(x);
        let (lo, hi) = model.posterior_window(x);
        let upper = hi - h;
        if upper <= lo {
            return Ok(0.0);
        }
        let mut bps = model.posterior_breakpoints(x);
        bps.extend(model.posterior_breakpoints(x).iter().map(|b| b - h));
        quad::integrate(&|phi: f64| f(phi).min(f(phi + h)), lo, upper, cfg, &bps)
    })?;
    Ok(clamp_unit(value))
}

/// Exact closed-form minimum h-outage error probability for the built-in
/// example models.
pub fn min_outage_oracle(model: &dyn BayesModel, h: f64) -> Result<f64> {
    check_h(h)?;
    model.min_outage_closed(h).ok_or_else(|| {
        Error::Capability("no closed-form minimum-outage oracle for this model".into())
    })
}

type CoeffFn = Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// A finite, conjugate-symmetric Fourier coefficient family
/// `a_k(x, h), k = 0..=K` defining one member of the general bound class.
/// Only the nonnegative indices are stored; `a_{-k} = conj(a_k)` so the
/// reconstructed series is real.
pub struct FourierCoefficientSet {
    coeffs: Vec<CoeffFn>,
}

impl FourierCoefficientSet {
    pub fn new(coeffs: Vec<CoeffFn>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient set needs at least a_0".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// The single-coefficient set `a_0 = constant`, all others zero.
    pub fn constant(a0: f64) -> Self {
        Self {
            coeffs: vec![Box::new(move |_, _| Complex64::new(a0, 0.0))],
        }
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn a0(&self, x: f64, h: f64) -> Complex64 {
        (self.coeffs[0])(x, h)
    }

    /// Reconstructed series `g_h(x, phi)`; real by conjugate symmetry.
    pub fn series(&self, x: f64, h: f64, phi: f64) -> f64 {
        let mut v = (self.coeffs[0])(x, h).re;
        for (k, coeff) in self.coeffs.iter().enumerate().skip(1) {
            let a = coeff(x, h);
            let ang = 2.0 * std::f64::consts::PI * k as f64 * phi / h;
            v += 2.0 * (a.re * ang.cos() - a.im * ang.sin());
        }
        v
    }

    /// Positivity screen on a 1024-point grid over one period, per
    /// validation observation. Pointwise positivity cannot be certified
    /// numerically; the grid check is the stated approximation.
    fn validate(&self, model: &dyn BayesModel, h: f64) -> Result<()> {
        for x in validation_observations(model)? {
            let a0 = self.a0(x, h);
            if a0.im.abs() > 1e-9 * a0.norm().max(1e-300) {
                return Err(Error::Positivity(format!(
                    "a_0({x}, {h}) = {a0} is not real"
                )));
            }
            if !(a0.re > 0.0) {
                return Err(Error::Positivity(format!(
                    "a_0({x}, {h}) = {} is not positive",
                    a0.re
                )));
            }
            for i in 0..1024 {
                let phi = h * (i as f64 + 0.5) / 1024.0;
                let g = self.series(x, h, phi);
                if !(g > 0.0) {
                    return Err(Error::Positivity(format!(
                        "series value {g} at phi = {phi:.6}, x = {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validation_observations(model: &dyn BayesModel) -> Result<Vec<f64>> {
    match model.observation_law() {
        ObservationLaw::Discrete(atoms) => Ok(atoms.iter().map(|a| a.value).collect()),
        ObservationLaw::Continuous { .. } => (0..16)
            .map(|t| model.sample_observation(0x5EED, t))
            .collect(),
    }
}

/// General Fourier-coefficient class bound:
/// `1 - h^(1/p) E^(1/p)[a_0(x, h)]
///      E^((p-1)/p)[ int g_h(x, phi)^(1/(1-p)) f^(p/(p-1))(phi | x) dphi ]`,
/// clamped to [0, 1]. The coefficient set must reconstruct a positive
/// series; violations are rejected.
pub fn general_class_bound(
    model: &dyn BayesModel,
    coeffs: &FourierCoefficientSet,
    h: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    check_h(h)?;
    let q = check_p(p)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    coeffs.validate(model, h)?;
    let neg_exp = 1.0 / (1.0 - p);

    let slot: Mutex<Option<Error>> = Mutex::new(None);
    let record = |e: Error| {
        let mut guard = slot.lock().unwrap();
        if guard.is_none() {
            *guard = Some(e);
        }
    };

    let t1 = quad::expect_over_x(
        model,
        &|x: f64| {
            let a0 = coeffs.a0(x, h);
            if !(a0.re > 0.0) {
                record(Error::Positivity(format!("a_0({x}, {h}) not positive")));
                return f64::NAN;
            }
            a0.re
        },
        cfg,
        cfg.expect_mc,
    )?
    .value;

    let t2 = quad::expect_over_x(
        model,
        &|x: f64| {
            let f = model.posterior_fn(x);
            let (lo, hi) = model.posterior_window(x);
            let bps = model.posterior_breakpoints(x);
            let r = quad::integrate(
                &|phi: f64| {
                    let g = coeffs.series(x, h, phi);
                    if !(g > 0.0) {
                        record(Error::Positivity(format!(
                            "series value {g} at phi = {phi:.6}, x = {x}"
                        )));
                        return f64::NAN;
                    }
                    let fv = f(phi);
                    if fv <= 0.0 {
                        0.0
                    } else {
                        g.powf(neg_exp) * fv.powf(q)
                    }
                },
                lo,
                hi,
                cfg,
                &bps,
            );
            match r {
                Ok(v) => v,
                Err(e) => {
                    let partial = match &e {
                        Error::QuadratureFailure { partial, .. } => *partial,
                        _ => f64::NAN,
                    };
                    record(e);
                    partial
                }
            }
        },
        cfg,
        cfg.expect_mc,
    )?
    .value;

    if let Some(err) = slot.into_inner().unwrap() {
        return Err(err);
    }
    let value = 1.0 - h.powf(1.0 / p) * t1.powf(1.0 / p) * t2.powf((p - 1.0) / p);
    Ok(clamp_unit(value))
}

/// Which bound to sample over an h grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveKind {
    Tightest,
    TightestP(f64),
    SingleCoeff(f64),
    Zzlb,
    MinOutageOracle,
}

impl CurveKind {
    pub fn bound_kind(&self) -> BoundKind {
        match self {
            CurveKind::Tightest => BoundKind::Tightest,
            CurveKind::TightestP(_) => BoundKind::TightestP,
            CurveKind::SingleCoeff(_) => BoundKind::SingleCoeff,
            CurveKind::Zzlb => BoundKind::ZzlbOutage,
            CurveKind::MinOutageOracle => BoundKind::MinOutageOracle,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            CurveKind::TightestP(p) | CurveKind::SingleCoeff(p) => Some(*p),
            _ => None,
        }
    }

    pub fn eval(&self, model: &dyn BayesModel, h: f64, cfg: &QuadConfig) -> Result<f64> {
        match *self {
            CurveKind::Tightest => tightest_bound(model, h, cfg),
            CurveKind::TightestP(p) => tightest_subclass_bound(model, h, p, cfg),
            CurveKind::SingleCoeff(p) => single_coeff_bound(model, h, p, cfg),
            CurveKind::Zzlb => zzlb_outage(model, h, cfg),
            CurveKind::MinOutageOracle => min_outage_oracle(model, h),
        }
    }
}

/// Samples a bound over an ascending h grid, in parallel across grid points.
pub fn outage_curve(
    model: &dyn BayesModel,
    kind: CurveKind,
    grid: &[f64],
    cfg: &QuadConfig,
) -> Result<BoundCurve> {
    validate_grid(grid)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&h| kind.eval(model, h, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        h_grid: grid.to_vec(),
        values,
        kind: kind.bound_kind(),
        p: kind.p(),
        valley_filled: false,
        mc_stderr: None,
    })
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("h grid must not be empty".into()));
    }
    if grid[0] < 0.0 {
        return Err(Error::Config("h grid must start at h >= 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("h grid must be strictly ascending".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;
    use crate::model::{Atom, LinearGaussian, TwoSidedExponential, UniformIntervalsGaussian};
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn example1() -> LinearGaussian {
        LinearGaussian::new(0.0, 1.0, 1.0).unwrap()
    }

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
    fn tightest_matches_gaussian_closed_form() {
        let m = example1();
        let c = cfg();
        for &h in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            let numeric = tightest_bound(&m, h, &c).unwrap();
            let exact = closed_form::linear_gaussian_min_outage(h, 0.5);
            // Accuracy is limited by the outer expectation tolerance.
            assert_abs_diff_eq!(numeric, exact, epsilon = 5e-8);
        }
        assert_abs_diff_eq!(
            tightest_bound(&m, 2.0, &c).unwrap(),
            0.15729920705028513,
            epsilon = 5e-8
        );
    }

    #[test]
    fn tightest_matches_two_sided_closed_form() {
        let m = example2();
        let c = cfg();
        for &h in &[1.0, 5.0, 10.0, 20.0, 30.0] {
            let numeric = tightest_bound(&m, h, &c).unwrap();
            let exact = closed_form::two_sided_exp_tightest(&m, h);
            assert_abs_diff_eq!(numeric, exact, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(
            tightest_bound(&m, 20.0, &c).unwrap(),
            closed_form::two_sided_exp_tightest(&m, 20.0),
            epsilon = 1e-9
        );
    }

    #[test]
    fn vanishing_window_gives_one() {
        let c = cfg();
        let m = example1();
        assert_eq!(tightest_bound(&m, 0.0, &c).unwrap(), 1.0);
        assert_eq!(tightest_subclass_bound(&m, 0.0, 2.0, &c).unwrap(), 1.0);
        assert_eq!(zzlb_outage(&m, 0.0, &c).unwrap(), 1.0);
        assert!(tightest_bound(&m, 1e-4, &c).unwrap() > 0.999);
    }

    #[test]
    fn single_coeff_matches_gaussian_closed_form() {
        let m = example1();
        let c = cfg();
        for &(h, p) in &[(0.5, 1.5), (1.0, 2.0), (2.0, 5.0), (8.0, 2.0)] {
            let numeric = single_coeff_bound(&m, h, p, &c).unwrap();
            let exact = closed_form::linear_gaussian_single_coeff(h, p, 0.5);
            assert_abs_diff_eq!(numeric, exact, epsilon = 1e-9);
        }
        // Large h clamps at zero.
        assert_eq!(single_coeff_bound(&m, 100.0, 2.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn subclass_is_monotone_in_p_and_bounded_by_tightest() {
        let c = cfg();
        let m = example1();
        for &h in &[0.5, 1.0, 2.0] {
            let tight = tightest_bound(&m, h, &c).unwrap();
            let ps = [1.01, 1.5, 2.0, 5.0, 8.0];
            let vals: Vec<f64> = ps
                .iter()
                .map(|&p| tightest_subclass_bound(&m, h, p, &c).unwrap())
                .collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "p-monotonicity violated: {vals:?}");
            }
            for v in &vals {
                assert!(*v <= tight + 1e-8);
            }
        }
    }

    #[test]
    fn subclass_near_p_one_approaches_tightest() {
        let c = cfg();
        let m = example1();
        let tight = tightest_bound(&m, 1.0, &c).unwrap();
        let near = tightest_subclass_bound(&m, 1.0, 1.001, &c).unwrap();
        assert!((tight - near).abs() < 1e-3, "{tight} vs {near}");
    }

    #[test]
    fn subclass_at_large_p_is_near_zero() {
        let c = cfg();
        let m = example1();
        let v = tightest_subclass_bound(&m, 1.0, 64.0, &c).unwrap();
        assert!(v < 0.05, "p = 64 proxy for the p -> inf limit, got {v}");
    }

    #[test]
    fn zzlb_is_below_tightest_and_example3_displays_match() {
        let c = cfg();
        let m3 = UniformIntervalsGaussian::new(100.0).unwrap();
        // Raw curve on a grid containing the display sample points and the
        // structural break at h = 9 where the suffix maximum is attained.
        let mut grid: Vec<f64> = (0..=280).map(|i| i as f64 * 0.05).collect();
        for &extra in &[1.0, 2.0, 4.0, 7.0, 10.0, 13.0] {
            if !grid.iter().any(|&g| (g - extra).abs() < 1e-12) {
                grid.push(extra);
            }
        }
        grid.sort_by(f64::total_cmp);
        let tight = outage_curve(&m3, CurveKind::Tightest, &grid, &c).unwrap();
        let zz = outage_curve(&m3, CurveKind::Zzlb, &grid, &c).unwrap();
        for (i, &h) in grid.iter().enumerate() {
            assert!(
                zz.values[i] <= tight.values[i] + 1e-7,
                "zzlb above tightest at h={h}"
            );
        }
        let tight_vf = valley_fill(&tight);
        let zz_vf = valley_fill(&zz);
        for &h in &[1.0, 2.0, 4.0, 7.0, 10.0, 13.0] {
            assert_abs_diff_eq!(
                tight_vf.value_at(h).unwrap(),
                closed_form::uniform_gauss_tightest_display(h, 100.0),
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                zz_vf.value_at(h).unwrap(),
                closed_form::uniform_gauss_zzlb_display(h, 100.0),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn zzlb_pieces_for_example3() {
        let c = cfg();
        let m3 = UniformIntervalsGaussian::new(100.0).unwrap();
        // Beyond the support span the bound vanishes.
        assert_abs_diff_eq!(zzlb_outage(&m3, 12.5, &c).unwrap(), 0.0, epsilon = 1e-10);
        // At h = 9 the raw value already equals the plateau of the display.
        assert_abs_diff_eq!(
            zzlb_outage(&m3, 9.0, &c).unwrap(),
            closed_form::uniform_gauss_zzlb_display(9.0, 100.0),
            epsilon = 1e-8
        );
    }

    #[test]
    fn min_outage_oracle_dispatch() {
        let m1 = example1();
        assert_abs_diff_eq!(
            min_outage_oracle(&m1, 2.0).unwrap(),
            closed_form::linear_gaussian_min_outage(2.0, 0.5),
            epsilon = 0.0
        );
        let m2 = example2();
        assert_eq!(min_outage_oracle(&m2, 0.0).unwrap(), 1.0);
        let mix = crate::model::GaussianMixture::new(vec![crate::model::MixtureComponent {
            weight: 1.0,
            mean: 0.0,
            var: 1.0,
        }])
        .unwrap();
        assert!(matches!(
            min_outage_oracle(&mix, 1.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn valley_fill_examples() {
        let curve = BoundCurve {
            h_grid: vec![0.0, 1.0, 2.0, 3.0],
            values: vec![1.0, 0.2, 0.5, 0.1],
            kind: BoundKind::Tightest,
            p: None,
            valley_filled: false,
            mc_stderr: None,
        };
        let filled = valley_fill(&curve);
        assert_eq!(filled.values, vec![1.0, 0.5, 0.5, 0.1]);
        assert!(filled.valley_filled);
        // Monotone input is a fixed point, and the operator is idempotent.
        let again = valley_fill(&filled);
        assert_eq!(again.values, filled.values);
    }

    #[test]
    fn general_class_with_optimal_a0_matches_single_coeff() {
        let m = example1();
        let c = cfg();
        let p = 2.0;
        let q = p / (p - 1.0);
        let model_ref = example1();
        let cfg_ref = cfg();
        let coeffs = FourierCoefficientSet::new(vec![Box::new(move |x: f64, _h: f64| {
            let f = model_ref.posterior_fn(x);
            let (lo, hi) = model_ref.posterior_window(x);
            let integral =
                quad::integrate(&|phi: f64| f(phi).powf(q), lo, hi, &cfg_ref, &[]).unwrap();
            Complex64::new(integral.powf(1.0 / q), 0.0)
        })])
        .unwrap();
        let h = 1.0;
        let general = general_class_bound(&m, &coeffs, h, p, &c).unwrap();
        let single = single_coeff_bound(&m, h, p, &c).unwrap();
        assert_abs_diff_eq!(general, single, epsilon = 1e-8);
    }

    #[test]
    fn general_class_never_beats_the_subclass_optimum() {
        let m = example1();
        let c = cfg();
        let p = 2.0;
        let h = 1.0;
        let best = tightest_subclass_bound(&m, h, p, &c).unwrap();
        // Plain constant coefficient set.
        let flat = FourierCoefficientSet::constant(1.0);
        let v = general_class_bound(&m, &flat, h, p, &c).unwrap();
        assert!(v <= best + 1e-7, "{v} > {best}");
        // A set with one oscillating coefficient.
        let wavy = FourierCoefficientSet::new(vec![
            Box::new(|_, _| Complex64::new(1.0, 0.0)),
            Box::new(|_, _| Complex64::new(0.15, 0.1)),
        ])
        .unwrap();
        let v = general_class_bound(&m, &wavy, h, p, &c).unwrap();
        assert!(v <= best + 1e-7, "{v} > {best}");
    }

    #[test]
    fn general_class_rejects_nonpositive_series() {
        let m = example1();
        let c = cfg();
        let bad = FourierCoefficientSet::new(vec![
            Box::new(|_, _| Complex64::new(1.0, 0.0)),
            Box::new(|_, _| Complex64::new(0.8, 0.0)), // 1 + 1.6 cos() dips below 0
        ])
        .unwrap();
        assert!(matches!(
            general_class_bound(&m, &bad, 1.0, 2.0, &c),
            Err(Error::Positivity(_))
        ));
    }

    #[test]
    fn general_class_small_h_clamps_to_one() {
        let m = example1();
        let c = cfg();
        let flat = FourierCoefficientSet::constant(1.0);
        let v = general_class_bound(&m, &flat, 1e-6, 2.0, &c).unwrap();
        assert!(v > 0.995, "{v}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = example1();
        let c = cfg();
        assert!(tightest_bound(&m, -1.0, &c).is_err());
        assert!(tightest_subclass_bound(&m, 1.0, 1.0, &c).is_err());
        assert!(single_coeff_bound(&m, 1.0, 0.5, &c).is_err());
        assert!(outage_curve(&m, CurveKind::Tightest, &[], &c).is_err());
        assert!(outage_curve(&m, CurveKind::Tightest, &[0.0, 0.0], &c).is_err());
    }
}
