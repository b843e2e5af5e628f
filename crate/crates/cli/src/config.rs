//! Scenario configuration: TOML sections of key = value pairs describing
//! the model, the h grid, requested bounds and estimators, Monte Carlo
//! parameters, and output.

use anyhow::{anyhow, bail, Context, Result};
use outage_bounds::bounds::CurveKind;
use outage_bounds::estimators::EstimatorSpec;
use outage_bounds::model::{
    Atom, BayesModel, LinearGaussian, TwoSidedExponential, UniformIntervalsGaussian,
};
use outage_bounds::mse::HIntegrationConfig;
use outage_bounds::quad::QuadConfig;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: Option<ModelSection>,
    pub grid: Option<GridSection>,
    pub bounds: Option<BoundsSection>,
    pub estimators: Option<EstimatorsSection>,
    pub mc: Option<McSection>,
    pub output: Option<OutputSection>,
    pub sweep: Option<SweepSection>,
    pub mse: Option<MseSection>,
    pub quadrature: Option<QuadSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: String,
    pub mu_theta: Option<f64>,
    pub var_theta: Option<f64>,
    pub var_noise: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    /// Atoms of a discrete observation law as [value, probability] pairs.
    pub atoms: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub h_min: f64,
    pub h_max: f64,
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub kinds: Vec<String>,
    #[serde(default)]
    pub valley_fill: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorsSection {
    pub list: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub h: f64,
    pub values: Option<Vec<f64>>,
    pub log_min: Option<f64>,
    pub log_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MseSection {
    pub kinds: Vec<String>,
    pub h_points: Option<usize>,
    pub h_max: Option<f64>,
    pub tail_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ScenarioConfig =
            toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
        Ok(cfg)
    }

    pub fn quad_config(&self) -> QuadConfig {
        let mut q = QuadConfig::default();
        if let Some(s) = &self.quadrature {
            if let Some(v) = s.rel_tol {
                q.rel_tol = v;
            }
            if let Some(v) = s.abs_tol {
                q.abs_tol = v;
            }
            if let Some(v) = s.max_subdivisions {
                q.max_subdivisions = v;
            }
        }
        q
    }

    pub fn h_config(&self) -> HIntegrationConfig {
        let mut h = HIntegrationConfig::default();
        if let Some(s) = &self.mse {
            if let Some(v) = s.h_points {
                h.h_points = v;
            }
            if let Some(v) = s.h_max {
                h.h_max = v;
            }
            if let Some(v) = s.tail_threshold {
                h.tail_threshold = v;
            }
        }
        h
    }

    pub fn model(&self) -> Result<Box<dyn BayesModel>> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| anyhow!("missing [model] section"))?;
        build_model(m)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| anyhow!("missing [grid] section (h_min, h_max, points)"))?;
        if g.h_min < 0.0 {
            bail!("grid.h_min must be >= 0, got {}", g.h_min);
        }
        if g.points < 2 {
            bail!("grid.points must be >= 2, got {}", g.points);
        }
        if !(g.h_max > g.h_min) {
            bail!("grid.h_max must exceed grid.h_min");
        }
        let n = g.points - 1;
        Ok((0..=n)
            .map(|i| g.h_min + (g.h_max - g.h_min) * i as f64 / n as f64)
            .collect())
    }
}

pub fn build_model(m: &ModelSection) -> Result<Box<dyn BayesModel>> {
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| anyhow!("model.{key} is required for family {:?}", m.family))
    };
    match m.family.as_str() {
        "linear_gaussian" => Ok(Box::new(LinearGaussian::new(
            need(m.mu_theta, "mu_theta")?,
            need(m.var_theta, "var_theta")?,
            need(m.var_noise, "var_noise")?,
        )?)),
        "two_sided_exponential" => {
            let atoms = m
                .atoms
                .as_ref()
                .ok_or_else(|| anyhow!("model.atoms is required for two_sided_exponential"))?
                .iter()
                .map(|[v, p]| Atom { value: *v, prob: *p })
                .collect();
            Ok(Box::new(TwoSidedExponential::new(
                need(m.lambda1, "lambda1")?,
                need(m.lambda2, "lambda2")?,
                atoms,
            )?))
        }
        "uniform_intervals_gaussian" => Ok(Box::new(UniformIntervalsGaussian::new(need(
            m.var_noise,
            "var_noise",
        )?)?)),
        other => bail!(
            "unknown model.family {other:?} (expected linear_gaussian, two_sided_exponential, \
             or uniform_intervals_gaussian)"
        ),
    }
}

/// Rebuilds the model with one named parameter replaced by `value`.
pub fn model_with_parameter(
    m: &ModelSection,
    parameter: &str,
    value: f64,
) -> Result<Box<dyn BayesModel>> {
    let mut patched = ModelSection {
        family: m.family.clone(),
        mu_theta: m.mu_theta,
        var_theta: m.var_theta,
        var_noise: m.var_noise,
        lambda1: m.lambda1,
        lambda2: m.lambda2,
        atoms: m.atoms.clone(),
    };
    match (m.family.as_str(), parameter) {
        ("linear_gaussian", "mu_theta") => patched.mu_theta = Some(value),
        ("linear_gaussian", "var_theta") => patched.var_theta = Some(value),
        ("linear_gaussian", "var_noise") => patched.var_noise = Some(value),
        ("two_sided_exponential", "lambda1") => patched.lambda1 = Some(value),
        ("two_sided_exponential", "lambda2") => patched.lambda2 = Some(value),
        ("two_sided_exponential", "inv_lambda2") => patched.lambda2 = Some(1.0 / value),
        ("uniform_intervals_gaussian", "var_noise") => patched.var_noise = Some(value),
        (family, p) => bail!("unknown sweep parameter {p:?} for family {family:?}"),
    }
    build_model(&patched)
}

/// Parses a bound kind token: `tightest`, `tightest_p p=<v|1+>`,
/// `single_coeff p=<v>`, `zzlb_outage`, `min_outage_oracle`.
pub fn parse_bound_kind(token: &str) -> Result<CurveKind> {
    let mut parts = token.split_whitespace();
    let head = parts
        .next()
        .ok_or_else(|| anyhow!("empty bound kind token"))?;
    let p_arg = parts.next();
    if let Some(extra) = parts.next() {
        bail!("unexpected token {extra:?} in bound kind {token:?}");
    }
    let parse_p = |required: bool| -> Result<Option<f64>> {
        match p_arg {
            None if required => bail!("bound kind {head:?} needs p=<value>"),
            None => Ok(None),
            Some(s) => {
                let v = s
                    .strip_prefix("p=")
                    .ok_or_else(|| anyhow!("expected p=<value>, got {s:?}"))?;
                if v == "1+" {
                    Ok(None) // the p -> 1+ limit maps to the tightest path
                } else {
                    Ok(Some(v.parse::<f64>().with_context(|| {
                        format!("cannot parse p value {v:?}")
                    })?))
                }
            }
        }
    };
    match head {
        "tightest" => Ok(CurveKind::Tightest),
        "tightest_p" => Ok(match parse_p(true)? {
            Some(p) => CurveKind::TightestP(p),
            None => CurveKind::Tightest,
        }),
        "single_coeff" => {
            let p = parse_p(true)?
                .ok_or_else(|| anyhow!("single_coeff has no p -> 1+ limit; give p > 1"))?;
            Ok(CurveKind::SingleCoeff(p))
        }
        "zzlb_outage" | "zzlb" => Ok(CurveKind::Zzlb),
        "min_outage_oracle" => Ok(CurveKind::MinOutageOracle),
        other => bail!(
            "unknown bound kind {other:?} (expected tightest, tightest_p, single_coeff, \
             zzlb_outage, min_outage_oracle)"
        ),
    }
}

/// Parses an estimator token: `mmse`, `map`, `h_map h=<v>`,
/// `closed_form <name> [h=<v>]`.
pub fn parse_estimator(token: &str) -> Result<EstimatorSpec> {
    let parts: Vec<&str> = token.split_whitespace().collect();
    match parts.as_slice() {
        ["mmse"] => Ok(EstimatorSpec::mmse()),
        ["map"] => Ok(EstimatorSpec::map()),
        ["h_map", harg] => {
            let v = harg
                .strip_prefix("h=")
                .ok_or_else(|| anyhow!("expected h=<value> after h_map, got {harg:?}"))?;
            Ok(EstimatorSpec::h_map(v.parse::<f64>()?))
        }
        ["closed_form", name] => Ok(EstimatorSpec::closed_form(name, None)),
        ["closed_form", name, harg] => {
            let v = harg
                .strip_prefix("h=")
                .ok_or_else(|| anyhow!("expected h=<value>, got {harg:?}"))?;
            Ok(EstimatorSpec::closed_form(name, Some(v.parse::<f64>()?)))
        }
        _ => bail!("unknown estimator token {token:?}"),
    }
}

/// Sweep values: explicit list, or log-spaced range.
pub fn sweep_values(s: &SweepSection) -> Result<Vec<f64>> {
    if let Some(values) = &s.values {
        if values.is_empty() {
            bail!("sweep.values must not be empty");
        }
        return Ok(values.clone());
    }
    let (lo, hi, n) = (
        s.log_min.ok_or_else(|| anyhow!("sweep needs values or log_min/log_max/points"))?,
        s.log_max.ok_or_else(|| anyhow!("sweep.log_max missing"))?,
        s.points.ok_or_else(|| anyhow!("sweep.points missing"))?,
    );
    if !(lo > 0.0 && hi > lo) {
        bail!("sweep log range must satisfy 0 < log_min < log_max");
    }
    if n < 1 {
        bail!("sweep.points must be >= 1");
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect())
}
