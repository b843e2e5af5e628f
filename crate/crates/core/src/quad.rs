//! Numerical integration primitives: adaptive Gauss-Kronrod quadrature with
//! caller-supplied breakpoints, lattice sums `sum_l f(phi + l h)^q` with
//! controlled truncation, and expectations over the observation law.

use crate::error::{Error, Result};
use crate::model::{BayesModel, ObservationLaw};
use std::collections::BinaryHeap;

/// Tolerances, refinement limits, and lattice truncation used by every
/// integral and lattice sum.
#[derive(Clone, Debug)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub lattice: LatticeTruncation,
    /// Monte Carlo fallback for expectations over a continuous observation
    /// law that has no exact marginal.
    pub expect_mc: Option<McParams>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 1 << 16,
            lattice: LatticeTruncation::default(),
            expect_mc: None,
        }
    }
}

/// Lattice truncation policy: a fixed half-width, or adaptive expansion
/// until both boundary terms drop below a tail threshold. Bounded supports
/// are always covered exactly.
#[derive(Clone, Copy, Debug)]
pub enum LatticeTruncation {
    Fixed(u32),
    Adaptive { tail: f64 },
}

impl Default for LatticeTruncation {
    fn default() -> Self {
        LatticeTruncation::Adaptive { tail: 1e-13 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct McParams {
    pub trials: u64,
    pub seed: u64,
}

/// Expectation over the observation law with its standard error (zero for
/// exact paths).
#[derive(Clone, Copy, Debug)]
pub struct Expectation {
    pub value: f64,
    pub stderr: f64,
}

// 15-point Kronrod / 7-point Gauss rule (positive abscissae, descending).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut scaled = err.abs();
    if resasc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

/// One Gauss-Kronrod 15 pass over `[a, b]`: (value, error estimate, resabs).
fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    let mut resabs = resk.abs();

    for j in 0..3 {
        let idx = 2 * j + 1;
        let dx = half * XGK[idx];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[idx] = f1;
        fv2[idx] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[idx] * (f1 + f2);
        resabs += WGK[idx] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let idx = 2 * j;
        let dx = half * XGK[idx];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[idx] = f1;
        fv2[idx] = f2;
        resk += WGK[idx] * (f1 + f2);
        resabs += WGK[idx] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for idx in 0..7 {
        resasc += WGK[idx] * ((fv1[idx] - mean).abs() + (fv2[idx] - mean).abs());
    }

    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let err = rescale_error((resk - resg) * half, resabs, resasc);
    (value, err, resabs)
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
    /// Whether this segment already survived a confirmation split.
    swept: bool,
}

impl Segment {
    fn at_roundoff(&self) -> bool {
        self.error <= 60.0 * f64::EPSILON * self.resabs
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integral of `f` over `[a, b]`. `breakpoints` inside the interval
/// seed the initial subdivision; discontinuities and kinks belong there.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
    breakpoints: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut edges: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(lo);
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|t| t.is_finite() && *t > lo && *t < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    for t in inner {
        if t > *edges.last().unwrap() {
            edges.push(t);
        }
    }
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let mut total_value = 0.0;
    for w in edges.windows(2) {
        let (value, error, resabs) = gk15(f, w[0], w[1]);
        total_value += value;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
            resabs,
            swept: false,
        });
    }

    let split = |seg: &Segment, swept: bool| -> Option<(Segment, Segment)> {
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return None;
        }
        let (v1, e1, r1) = gk15(f, seg.a, mid);
        let (v2, e2, r2) = gk15(f, mid, seg.b);
        Some((
            Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
                resabs: r1,
                swept,
            },
            Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
                resabs: r2,
                swept,
            },
        ))
    };

    // The per-segment Gauss-vs-Kronrod estimate can be fooled: a kink whose
    // two sides are nearly mirror images makes both rules agree while both
    // are wrong. Apparent convergence is therefore only trusted after a
    // confirmation sweep in which every not-yet-swept segment is split once
    // more and the total survives within tolerance.
    let mut heap_error: f64 = heap.iter().map(|s| s.error).sum();
    let mut frozen_error = 0.0;
    let mut unswept = heap.len();
    let mut subdivisions = edges.len() - 1;
    loop {
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * total_value.abs());

        if heap_error + frozen_error <= tolerance {
            if unswept == 0 {
                return Ok(sign * total_value);
            }
            // Confirmation sweep.
            let mut pending: Vec<Segment> = heap.drain().collect();
            pending.append(&mut frozen);
            heap_error = 0.0;
            frozen_error = 0.0;
            unswept = 0;
            for seg in pending {
                if seg.swept {
                    if seg.at_roundoff() {
                        frozen_error += seg.error;
                        frozen.push(seg);
                    } else {
                        heap_error += seg.error;
                        heap.push(seg);
                    }
                    continue;
                }
                match split(&seg, true) {
                    Some((s1, s2)) => {
                        total_value += s1.value + s2.value - seg.value;
                        subdivisions += 1;
                        for s in [s1, s2] {
                            if s.at_roundoff() {
                                frozen_error += s.error;
                                frozen.push(s);
                            } else {
                                heap_error += s.error;
                                heap.push(s);
                            }
                        }
                    }
                    None => {
                        frozen_error += seg.error;
                        frozen.push(Segment { swept: true, ..seg });
                    }
                }
            }
            continue;
        }

        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure {
                partial: sign * total_value,
                error: heap_error + frozen_error,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::QuadratureFailure {
                partial: sign * total_value,
                error: frozen_error,
                subdivisions,
            });
        };
        heap_error -= worst.error;
        if !worst.swept {
            unswept -= 1;
        }
        if worst.at_roundoff() {
            frozen_error += worst.error;
            if !worst.swept {
                unswept += 1; // stays pending for the next sweep
            }
            frozen.push(worst);
            continue;
        }
        match split(&worst, false) {
            Some((s1, s2)) => {
                total_value += s1.value + s2.value - worst.value;
                heap_error += s1.error + s2.error;
                unswept += 2;
                heap.push(s1);
                heap.push(s2);
                subdivisions += 1;
            }
            None => {
                frozen_error += worst.error;
                frozen.push(Segment { swept: true, ..worst });
            }
        }
    }
}

/// Integral over one period `[0, h]`.
pub fn integrate_period<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    h: f64,
    cfg: &QuadConfig,
    breakpoints: &[f64],
) -> Result<f64> {
    integrate(f, 0.0, h, cfg, breakpoints)
}

fn powq(v: f64, q: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if q == 1.0 {
        v
    } else {
        v.powf(q)
    }
}

/// Density values over the truncated lattice `{phi + l h}`.
///
/// The adaptive policy always covers the support window exactly, then keeps
/// extending while the boundary terms `f^q` stay at or above the tail
/// threshold; tails are assumed monotone beyond the window.
pub(crate) fn lattice_values<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    window: (f64, f64),
    phi: f64,
    h: f64,
    q_for_tail: f64,
    trunc: LatticeTruncation,
) -> Vec<f64> {
    debug_assert!(h > 0.0, "lattice step must be positive");
    let mut vals = Vec::new();
    match trunc {
        LatticeTruncation::Fixed(l) => {
            let l = i64::from(l.max(1));
            for li in -l..=l {
                vals.push(f(phi + li as f64 * h));
            }
        }
        LatticeTruncation::Adaptive { tail } => {
            let mut l_lo = ((window.0 - phi) / h).ceil() as i64;
            let mut l_hi = ((window.1 - phi) / h).floor() as i64;
            if l_lo > l_hi {
                // No lattice point in the window; keep the one nearest to it.
                let nearest = ((0.5 * (window.0 + window.1) - phi) / h).round() as i64;
                l_lo = nearest;
                l_hi = nearest;
            }
            for li in l_lo..=l_hi {
                vals.push(f(phi + li as f64 * h));
            }
            for (start, step) in [(l_lo - 1, -1i64), (l_hi + 1, 1i64)] {
                let mut li = start;
                let mut guard = 0u32;
                loop {
                    let v = f(phi + li as f64 * h);
                    if powq(v, q_for_tail) < tail || guard > 100_000 {
                        break;
                    }
                    vals.push(v);
                    li += step;
                    guard += 1;
                }
            }
        }
    }
    vals
}

/// `sum_l f(phi + l h | x)^q` over the truncated lattice.
pub fn lattice_sum(
    model: &dyn BayesModel,
    x: f64,
    phi: f64,
    h: f64,
    q: f64,
    cfg: &QuadConfig,
) -> f64 {
    let f = model.posterior_fn(x);
    let vals = lattice_values(&*f, model.posterior_window(x), phi, h, q, cfg.lattice);
    vals.iter().map(|&v| powq(v, q)).sum()
}

/// `max_l f(phi + l h | x)` over the same truncated lattice window.
pub fn lattice_max(model: &dyn BayesModel, x: f64, phi: f64, h: f64, cfg: &QuadConfig) -> f64 {
    let f = model.posterior_fn(x);
    let vals = lattice_values(&*f, model.posterior_window(x), phi, h, 1.0, cfg.lattice);
    vals.iter().copied().fold(0.0, f64::max)
}

/// `(sum_l f^q)^(1/q)`, computed with the largest term factored out so large
/// `q` does not underflow.
pub fn lattice_norm(
    model: &dyn BayesModel,
    x: f64,
    phi: f64,
    h: f64,
    q: f64,
    cfg: &QuadConfig,
) -> f64 {
    let f = model.posterior_fn(x);
    let vals = lattice_values(&*f, model.posterior_window(x), phi, h, q, cfg.lattice);
    lattice_norm_of(&vals, q)
}

pub(crate) fn lattice_norm_of(vals: &[f64], q: f64) -> f64 {
    let m = vals.iter().copied().fold(0.0, f64::max);
    if m <= 0.0 {
        return 0.0;
    }
    let s: f64 = vals.iter().map(|&v| powq(v / m, q)).sum();
    m * s.powf(1.0 / q)
}

/// Expectation of `g` over the observation law.
///
/// Discrete laws are summed exactly (in a canonical atom order, so the result
/// is independent of how the atoms were listed). Continuous laws with an
/// exact marginal are integrated by quadrature; otherwise `mc` drives a
/// deterministic Monte Carlo estimate.
pub fn expect_over_x(
    model: &dyn BayesModel,
    g: &(dyn Fn(f64) -> f64 + Sync),
    cfg: &QuadConfig,
    mc: Option<McParams>,
) -> Result<Expectation> {
    match model.observation_law() {
        ObservationLaw::Discrete(atoms) => {
            let mut terms: Vec<(f64, f64)> =
                atoms.iter().map(|a| (a.value, a.prob * g(a.value))).collect();
            terms.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
            // Neumaier-compensated sum over the canonical order.
            let mut sum = 0.0;
            let mut comp = 0.0;
            for (_, t) in terms {
                let s = sum + t;
                comp += if sum.abs() >= t.abs() {
                    (sum - s) + t
                } else {
                    (t - s) + sum
                };
                sum = s;
            }
            Ok(Expectation {
                value: sum + comp,
                stderr: 0.0,
            })
        }
        ObservationLaw::Continuous {
            window,
            exact_marginal,
        } => {
            if exact_marginal {
                // The integrand is often itself the result of an inner
                // adaptive integral, accurate only to the configured inner
                // tolerance. The outer pass must not chase that residual, so
                // it runs at a deliberately looser tolerance.
                let outer = QuadConfig {
                    rel_tol: cfg.rel_tol * 20.0,
                    abs_tol: cfg.abs_tol * 20.0,
                    ..cfg.clone()
                };
                let value = integrate(
                    &|x: f64| {
                        let m = model
                            .marginal_pdf(x)
                            .expect("exact_marginal law must provide marginal_pdf");
                        if m == 0.0 {
                            0.0
                        } else {
                            m * g(x)
                        }
                    },
                    window.0,
                    window.1,
                    &outer,
                    &[],
                )?;
                return Ok(Expectation { value, stderr: 0.0 });
            }
            let mc = mc.ok_or_else(|| {
                Error::Config(
                    "continuous observation law without exact marginal requires Monte Carlo \
                     parameters (trials, seed)"
                        .into(),
                )
            })?;
            if mc.trials == 0 {
                return Err(Error::Config("Monte Carlo trials must be >= 1".into()));
            }
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for trial in 0..mc.trials {
                let x = model.sample_observation(mc.seed, trial)?;
                let v = g(x);
                let n = (trial + 1) as f64;
                let delta = v - mean;
                mean += delta / n;
                m2 += delta * (v - mean);
            }
            let n = mc.trials as f64;
            let stderr = if mc.trials > 1 {
                (m2 / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            Ok(Expectation {
                value: mean,
                stderr,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, LinearGaussian, TwoSidedExponential, UniformIntervalsGaussian};
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    // Brute-force Riemann oracle (midpoint rule).
    fn riemann<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let dx = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * dx)).sum::<f64>() * dx
    }

    #[test]
    fn constant_and_polynomial_are_exact() {
        let c = cfg();
        assert_abs_diff_eq!(integrate_period(&|_| 1.0, 3.0, &c, &[]).unwrap(), 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(integrate_period(&|p| p, 2.0, &c, &[]).unwrap(), 2.0, epsilon = 1e-13);
        // Degree well inside the rule's exactness.
        let v = integrate(&|p: f64| p.powi(7) - 3.0 * p.powi(4) + p, -1.0, 2.0, &c, &[]).unwrap();
        let exact = (2.0f64.powi(8) - 1.0) / 8.0 - 3.0 * (2.0f64.powi(5) + 1.0) / 5.0
            + (4.0 - 1.0) / 2.0;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-11 * exact.abs());
    }

    #[test]
    fn gaussian_lattice_max_matches_riemann_oracle() {
        // max_l over a unit-variance Gaussian lattice with h = 1.
        let model = LinearGaussian::new(0.0, 2.0, 2.0).unwrap(); // posterior var 1
        let c = cfg();
        let f = |phi: f64| lattice_max(&model, 0.0, phi, 1.0, &c);
        let adaptive = integrate_period(&f, 1.0, &c, &[]).unwrap();
        let oracle = riemann(f, 0.0, 1.0, 1_000_000);
        assert_abs_diff_eq!(adaptive, oracle, epsilon = 1e-7);
    }

    #[test]
    fn nonconvergence_reports_partial_value() {
        let mut c = cfg();
        c.max_subdivisions = 4;
        c.rel_tol = 1e-15;
        c.abs_tol = 1e-300;
        let err = integrate(&|p: f64| (p - 0.3711).abs().sqrt().recip().min(1e12), 0.0, 1.0, &c, &[])
            .unwrap_err();
        match err {
            Error::QuadratureFailure { partial, error, .. } => {
                assert!(partial.is_finite());
                assert!(error > 0.0);
            }
            other => panic!("expected quadrature failure, got {other:?}"),
        }
    }

    #[test]
    fn bounded_support_single_lattice_term() {
        // Support width 3+3 with gap: for h > 12 only one lattice point can
        // lie in the support.
        let model = UniformIntervalsGaussian::new(100.0).unwrap();
        let c = cfg();
        let x = 4.0;
        let h = 13.0;
        let phi = 4.2;
        let sum = lattice_sum(&model, x, phi, h, 1.0, &c);
        assert_abs_diff_eq!(sum, model.posterior_pdf(x, phi), epsilon = 1e-15);
    }

    #[test]
    fn partition_of_unity_over_one_period() {
        // integral over [0,h] of sum_l f(phi + l h) equals the full-line
        // integral of f, which is 1.
        let model = LinearGaussian::new(0.0, 2.0, 2.0).unwrap();
        let c = cfg();
        for h in [0.5, 1.0, 2.7] {
            let g = |phi: f64| lattice_sum(&model, 0.3, phi, h, 1.0, &c);
            let total = integrate_period(&g, h, &c, &[]).unwrap();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn large_q_norm_approaches_lattice_max() {
        let model = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        let c = cfg();
        let (x, phi, h) = (0.4, 0.3, 1.0);
        let m = lattice_max(&model, x, phi, h, &c);
        let nq = lattice_norm(&model, x, phi, h, 64.0, &c);
        assert!((nq - m).abs() < 1e-2, "norm {nq} vs max {m}");
        assert!(nq >= m);
    }

    #[test]
    fn lattice_max_picks_nearest_to_mean_point() {
        // Posterior mean 0, h = 1, phi = 0.3: the residue class is
        // {..., -0.7, 0.3, 1.3, ...} and 0.3 is nearest to the mode.
        let model = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        let c = cfg();
        let m = lattice_max(&model, 0.0, 0.3, 1.0, &c);
        assert_abs_diff_eq!(m, model.posterior_pdf(0.0, 0.3), epsilon = 1e-15);
    }

    #[test]
    fn lattice_max_agrees_with_wide_brute_force() {
        let model = UniformIntervalsGaussian::new(100.0).unwrap();
        let c = cfg();
        for &(x, phi, h) in &[(0.5, 0.2, 1.0), (4.0, 0.9, 2.5), (-7.0, 0.1, 0.7)] {
            let adaptive = lattice_max(&model, x, phi, h, &c);
            let brute = (-10_000i64..=10_000)
                .map(|l| model.posterior_pdf(x, phi + l as f64 * h))
                .fold(0.0, f64::max);
            assert_abs_diff_eq!(adaptive, brute, epsilon = 1e-15);
        }
    }

    #[test]
    fn doubling_truncation_changes_sum_by_tail_only() {
        let model = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        let tail = 1e-13;
        let (x, phi, h, q) = (0.0, 0.4, 0.8, 1.5);
        let f = model.posterior_fn(x);
        let w = model.posterior_window(x);
        let base = lattice_values(&*f, w, phi, h, q, LatticeTruncation::Adaptive { tail });
        let l_eff = (base.len() / 2 + 1) as u32;
        let s1: f64 = base.iter().map(|&v| powq(v, q)).sum();
        let wide = lattice_values(&*f, w, phi, h, q, LatticeTruncation::Fixed(2 * l_eff));
        let s2: f64 = wide.iter().map(|&v| powq(v, q)).sum();
        assert!((s2 - s1).abs() < 10.0 * tail, "tail leak {}", (s2 - s1).abs());
    }

    #[test]
    fn discrete_expectation_exact_and_permutation_invariant() {
        let a = TwoSidedExponential::new(
            1.0,
            10.0,
            vec![
                Atom { value: 1.0, prob: 0.5 },
                Atom { value: 2.0, prob: 0.5 },
            ],
        )
        .unwrap();
        let b = TwoSidedExponential::new(
            1.0,
            10.0,
            vec![
                Atom { value: 2.0, prob: 0.5 },
                Atom { value: 1.0, prob: 0.5 },
            ],
        )
        .unwrap();
        let g = |x: f64| x;
        let ea = expect_over_x(&a, &g, &cfg(), None).unwrap();
        let eb = expect_over_x(&b, &g, &cfg(), None).unwrap();
        assert_eq!(ea.value, 1.5);
        assert_eq!(ea.stderr, 0.0);
        assert_eq!(ea.value, eb.value);
    }

    #[test]
    fn constant_function_averages_to_one_exactly() {
        let model = UniformIntervalsGaussian::new(100.0).unwrap();
        let e = expect_over_x(&model, &|_| 1.0, &cfg(), None).unwrap();
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-10);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn mc_expectation_matches_single_evaluation_for_x_free_integrand() {
        // Example 1's inner integrals do not depend on x, so the Monte Carlo
        // mean equals the single-evaluation value exactly.
        let model = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        let c = cfg();
        let inner = |x: f64| {
            let f = model.posterior_fn(x);
            let w = model.posterior_window(x);
            integrate_period(
                &|phi: f64| {
                    let vals = lattice_values(&*f, w, phi, 1.0, 1.0, c.lattice);
                    vals.iter().copied().fold(0.0, f64::max)
                },
                1.0,
                &c,
                &[],
            )
            .unwrap()
        };
        // Force the Monte Carlo path by pretending the marginal is unknown.
        struct NoMarginal<'a>(&'a LinearGaussian);
        impl crate::model::BayesModel for NoMarginal<'_> {
            fn posterior_pdf(&self, x: f64, phi: f64) -> f64 {
                self.0.posterior_pdf(x, phi)
            }
            fn support_pieces(&self, x: f64) -> Vec<(f64, f64)> {
                self.0.support_pieces(x)
            }
            fn observation_law(&self) -> ObservationLaw<'_> {
                match self.0.observation_law() {
                    ObservationLaw::Continuous { window, .. } => ObservationLaw::Continuous {
                        window,
                        exact_marginal: false,
                    },
                    other => other,
                }
            }
            fn sample_joint(&self, seed: u64, trial: u64) -> crate::error::Result<(f64, f64)> {
                self.0.sample_joint(seed, trial)
            }
            fn sample_observation(&self, seed: u64, trial: u64) -> crate::error::Result<f64> {
                self.0.sample_observation(seed, trial)
            }
        }
        let wrapped = NoMarginal(&model);
        let mc = Some(McParams { trials: 32, seed: 5 });
        let e = expect_over_x(&wrapped, &inner, &c, mc).unwrap();
        let single = inner(0.0);
        // The inner integral is x-free in exact arithmetic; numerically the
        // adaptive meshes differ per x at the quadrature tolerance.
        assert_abs_diff_eq!(e.value, single, epsilon = 1e-9);
        assert!(e.stderr < 1e-9);
    }

    #[test]
    fn continuous_law_without_mc_params_is_a_config_error() {
        let model = LinearGaussian::new(0.0, 1.0, 1.0).unwrap();
        struct NoMarginal<'a>(&'a LinearGaussian);
        impl crate::model::BayesModel for NoMarginal<'_> {
            fn posterior_pdf(&self, x: f64, phi: f64) -> f64 {
                self.0.posterior_pdf(x, phi)
            }
            fn support_pieces(&self, x: f64) -> Vec<(f64, f64)> {
                self.0.support_pieces(x)
            }
            fn observation_law(&self) -> ObservationLaw<'_> {
                ObservationLaw::Continuous {
                    window: (-10.0, 10.0),
                    exact_marginal: false,
                }
            }
            fn sample_joint(&self, seed: u64, trial: u64) -> crate::error::Result<(f64, f64)> {
                self.0.sample_joint(seed, trial)
            }
        }
        let wrapped = NoMarginal(&model);
        let err = expect_over_x(&wrapped, &|_| 1.0, &cfg(), None).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
