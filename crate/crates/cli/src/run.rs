//! Subcommand implementations: curve datasets, parameter sweeps, MSE
//! bounds, and the acceptance report. All numeric CSV fields carry 17
//! significant digits so doubles round-trip exactly.

use crate::config::{
    model_with_parameter, parse_bound_kind, parse_estimator, ScenarioConfig,
};
use anyhow::{anyhow, bail, Context, Result};
use outage_bounds::acceptance::{all_pass, report, run_all, AcceptanceConfig};
use outage_bounds::bounds::{outage_curve, valley_fill, BoundCurve, CurveKind};
use outage_bounds::estimators::{empirical_outage, empirical_outage_curve, resolve};
use outage_bounds::mse::{
    distortion_bound, mse_bound_tightest, single_coeff_mse_bound, zzlb_mse, DistortionSpec,
    PChoice,
};
use std::fmt::Write as _;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn kind_token(kind: CurveKind) -> &'static str {
    kind.bound_kind().as_str()
}

fn push_curve_rows(out: &mut String, curve: &BoundCurve, kind_label: &str) {
    for i in 0..curve.h_grid.len() {
        let p = curve.p.map(fmt).unwrap_or_default();
        let se = curve
            .mc_stderr
            .as_ref()
            .map(|v| fmt(v[i]))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(curve.h_grid[i]),
            kind_label,
            p,
            fmt(curve.values[i]),
            curve.valley_filled,
            se
        );
    }
}

/// `bounds`: one row per (h, kind); bound kinds first (config order), then
/// empirical estimator curves.
pub fn run_bounds(cfg: &ScenarioConfig) -> Result<String> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let quad = cfg.quad_config();
    let bounds = cfg.bounds.as_ref();
    let estimators = cfg.estimators.as_ref();
    let n_tasks = bounds.map_or(0, |b| b.kinds.len()) + estimators.map_or(0, |e| e.list.len());
    if n_tasks == 0 {
        bail!("no task requested: [bounds].kinds and [estimators].list are both empty");
    }

    let mut out = String::from("h,kind,p,value,valley_filled,mc_stderr\n");
    if let Some(b) = bounds {
        for token in &b.kinds {
            let kind = parse_bound_kind(token)?;
            let mut curve = outage_curve(model.as_ref(), kind, &grid, &quad)?;
            if b.valley_fill {
                curve = valley_fill(&curve);
            }
            push_curve_rows(&mut out, &curve, kind_token(kind));
        }
    }
    if let Some(est) = estimators {
        let mc = cfg
            .mc
            .as_ref()
            .ok_or_else(|| anyhow!("[estimators] requires an [mc] section (trials, seed)"))?;
        for token in &est.list {
            let spec = parse_estimator(token)?;
            let curve = empirical_outage_curve(
                model.as_ref(),
                &spec,
                &grid,
                mc.trials,
                mc.seed,
                &quad,
            )?;
            push_curve_rows(&mut out, &curve, &format!("empirical({})", spec.label()));
        }
    }
    Ok(out)
}

/// `sweep`: one row per (sweep value, kind) at a fixed h.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<String> {
    let model_section = cfg
        .model
        .as_ref()
        .ok_or_else(|| anyhow!("missing [model] section"))?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("missing [sweep] section"))?;
    let values = crate::config::sweep_values(sweep)?;
    let quad = cfg.quad_config();
    let h = sweep.h;
    let bounds = cfg.bounds.as_ref();
    let estimators = cfg.estimators.as_ref();
    if bounds.map_or(0, |b| b.kinds.len()) + estimators.map_or(0, |e| e.list.len()) == 0 {
        bail!("no task requested: [bounds].kinds and [estimators].list are both empty");
    }

    let mut out = String::from("sweep_value,kind,p,value,mc_stderr\n");
    if let Some(b) = bounds {
        for token in &b.kinds {
            let kind = parse_bound_kind(token)?;
            for &v in &values {
                let model = model_with_parameter(model_section, &sweep.parameter, v)?;
                let value = kind.eval(model.as_ref(), h, &quad)?;
                let p = kind.p().map(fmt).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},",
                    fmt(v),
                    kind_token(kind),
                    p,
                    fmt(value)
                );
            }
        }
    }
    if let Some(est) = estimators {
        let mc = cfg
            .mc
            .as_ref()
            .ok_or_else(|| anyhow!("[estimators] requires an [mc] section (trials, seed)"))?;
        for token in &est.list {
            let spec = parse_estimator(token)?;
            for &v in &values {
                let model = model_with_parameter(model_section, &sweep.parameter, v)?;
                let perf =
                    empirical_outage(model.as_ref(), &spec, h, mc.trials, mc.seed, &quad)?;
                let _ = writeln!(
                    out,
                    "{},empirical({}),,{},{}",
                    fmt(v),
                    spec.label(),
                    fmt(perf.value),
                    fmt(perf.stderr)
                );
            }
        }
    }
    Ok(out)
}

/// `mse`: one row per requested MSE-level bound.
pub fn run_mse(cfg: &ScenarioConfig) -> Result<String> {
    let model = cfg.model()?;
    let quad = cfg.quad_config();
    let hcfg = cfg.h_config();
    let section = cfg
        .mse
        .as_ref()
        .ok_or_else(|| anyhow!("missing [mse] section"))?;
    if section.kinds.is_empty() {
        bail!("[mse].kinds must not be empty");
    }
    let mut out = String::from("kind,p,value\n");
    for token in &section.kinds {
        let parts: Vec<&str> = token.split_whitespace().collect();
        let (label, p_str, value) = match parts.as_slice() {
            ["tightest"] => (
                "mse_tightest",
                String::new(),
                mse_bound_tightest(model.as_ref(), &quad, &hcfg)?,
            ),
            ["zzlb"] => ("zzlb_mse", String::new(), zzlb_mse(model.as_ref(), &quad, &hcfg)?),
            ["cp", parg] => {
                let p = parse_p_arg(parg)?;
                match p {
                    Some(p) => (
                        "mse_cp",
                        fmt(p),
                        outage_bounds::mse::mse_bound_cp(model.as_ref(), p, &quad, &hcfg)?,
                    ),
                    None => (
                        "mse_cp",
                        "1+".to_string(),
                        mse_bound_tightest(model.as_ref(), &quad, &hcfg)?,
                    ),
                }
            }
            ["moment", narg, parg] => {
                let n: u32 = narg
                    .strip_prefix("n=")
                    .ok_or_else(|| anyhow!("expected n=<order>, got {narg:?}"))?
                    .parse()?;
                let p = parse_p_arg(parg)?;
                let choice = p.map_or(PChoice::TightestLimit, PChoice::P);
                let value =
                    outage_bounds::mse::moment_bound(model.as_ref(), n, choice, &quad, &hcfg)?;
                ("moment", p.map(fmt).unwrap_or_else(|| "1+".into()), value)
            }
            ["abs_error", parg] => {
                let p = parse_p_arg(parg)?;
                let choice = p.map_or(PChoice::TightestLimit, PChoice::P);
                let value = distortion_bound(
                    model.as_ref(),
                    &DistortionSpec::power(1),
                    choice,
                    &quad,
                    &hcfg,
                )?;
                ("abs_error", p.map(fmt).unwrap_or_else(|| "1+".into()), value)
            }
            ["single_coeff", parg] => {
                let p = parse_p_arg(parg)?
                    .ok_or_else(|| anyhow!("single_coeff has no p -> 1+ limit; give p > 1"))?;
                (
                    "single_coeff_mse",
                    fmt(p),
                    single_coeff_mse_bound(model.as_ref(), p, &quad)?,
                )
            }
            _ => bail!("unknown mse kind token {token:?}"),
        };
        let _ = writeln!(out, "{label},{p_str},{}", fmt(value));
    }
    Ok(out)
}

fn parse_p_arg(arg: &str) -> Result<Option<f64>> {
    let v = arg
        .strip_prefix("p=")
        .ok_or_else(|| anyhow!("expected p=<value>, got {arg:?}"))?;
    if v == "1+" {
        Ok(None)
    } else {
        Ok(Some(v.parse::<f64>().with_context(|| format!("cannot parse p value {v:?}"))?))
    }
}

/// `accept`: machine-readable pass/fail report; true iff every criterion
/// passed.
pub fn run_accept(
    seed: Option<u64>,
    trials: Option<u64>,
    perturb: bool,
    groups: &[u8],
) -> (String, bool) {
    let mut cfg = AcceptanceConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.perturb = perturb;
    let results = if groups.is_empty() {
        run_all(&cfg)
    } else {
        groups
            .iter()
            .flat_map(|&g| outage_bounds::acceptance::run_group(&cfg, g))
            .collect()
    };
    (report(&results), all_pass(&results))
}

/// Quick sanity pass used by `bounds` before heavy work: estimator tokens
/// must resolve against the model.
pub fn validate_estimators(cfg: &ScenarioConfig) -> Result<()> {
    if let (Some(est), Some(model)) = (cfg.estimators.as_ref(), cfg.model.as_ref()) {
        let model = crate::config::build_model(model)?;
        let quad = cfg.quad_config();
        for token in &est.list {
            let spec = parse_estimator(token)?;
            resolve(model.as_ref(), &spec, &quad)
                .map_err(|e| anyhow!("estimator {token:?}: {e}"))?;
        }
    }
    Ok(())
}

pub fn write_output(cfg: &ScenarioConfig, cli_out: Option<&std::path::Path>, data: &str) -> Result<std::path::PathBuf> {
    let path = match cli_out {
        Some(p) => p.to_path_buf(),
        None => std::path::PathBuf::from(
            &cfg.output
                .as_ref()
                .ok_or_else(|| anyhow!("no output path: give [output].path or --out"))?
                .path,
        ),
    };
    std::fs::write(&path, data).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
