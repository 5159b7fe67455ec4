use std::path::Path;

use dgn_core::fourier::{
    choose_nu, density_at, risk_curve, sensitivities, ContourChoice, Estimate, RiskError, RiskPoint,
};
use dgn_core::mc::{
    default_shock, es_ci, fd_sensitivity, simulate, var_ci, FrozenDraws, McError, McEstimate,
};
use dgn_core::model::{
    asymptotic_left_log_density, tail_profile, Parameter, RemappedPortfolio, TailRegime,
    DEFAULT_GROUP_TOL,
};
use dgn_core::quad::QuadConfig;
use rayon::prelude::*;

use crate::input::load;
use crate::output::{num, remap_document, Table};
use crate::{CliError, Engine};

pub const TOL_ENV: &str = "RISK_QUAD_TOL";

fn quad_config(engine: Engine) -> Result<QuadConfig, CliError> {
    let from_env = match std::env::var(TOL_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("{TOL_ENV}={s:?} is not a number")))?,
        ),
        Err(_) => None,
    };
    match engine.tol.or(from_env) {
        None => Ok(QuadConfig::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(QuadConfig::default().with_abs_tol(t)),
        Some(t) => Err(CliError::Invalid(format!("tolerance {t} must be positive"))),
    }
}

fn contour(p: &RemappedPortfolio, engine: Engine) -> Result<ContourChoice, CliError> {
    match engine.nu {
        Some(nu) => ContourChoice::new(p, nu),
        None => choose_nu(p),
    }
    .map_err(|e| risk_error(e, None))
}

/// Input problems map to exit 3, everything else the engine reports to 4.
fn risk_error(e: RiskError, level: Option<f64>) -> CliError {
    let msg = match level {
        Some(l) => format!("level {l}: {e}"),
        None => e.to_string(),
    };
    match e {
        RiskError::OutsideStrip { .. }
        | RiskError::DegeneratePortfolio
        | RiskError::LevelOutOfRange(_)
        | RiskError::Model(_) => CliError::Invalid(msg),
        _ => CliError::Numerical(msg),
    }
}

fn mc_error(e: McError) -> CliError {
    match e {
        McError::ResourceExhausted(_) => CliError::Numerical(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    }
}

fn check_levels(levels: &[f64]) -> Result<(), CliError> {
    match levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        Some(l) => Err(CliError::Invalid(format!("level {l} must lie in (0, 1)"))),
        None => Ok(()),
    }
}

fn curve(
    p: &RemappedPortfolio,
    levels: &[f64],
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<Vec<RiskPoint>, CliError> {
    check_levels(levels)?;
    risk_curve(p, levels, c, cfg, true)
        .into_iter()
        .zip(levels)
        .map(|(r, &l)| r.map_err(|e| risk_error(e, Some(l))))
        .collect()
}

pub fn remap(input: &Path) -> Result<String, CliError> {
    let loaded = load(input)?;
    Ok(remap_document(&loaded.portfolio, loaded.metadata.as_ref()))
}

pub fn risk(input: &Path, levels: &[f64], engine: Engine) -> Result<String, CliError> {
    let p = load(input)?.portfolio;
    let cfg = quad_config(engine)?;
    let c = contour(&p, engine)?;
    let mut t = Table::new(&["level", "var", "es", "quad_error"]);
    for rp in curve(&p, levels, &c, &cfg)? {
        t.row(&[
            num(rp.level),
            num(rp.var),
            num(rp.es.unwrap_or(f64::NAN)),
            num(rp.quad_error()),
        ]);
    }
    Ok(t.finish())
}

pub fn sens(input: &Path, level: f64, engine: Engine) -> Result<String, CliError> {
    let p = load(input)?.portfolio;
    let cfg = quad_config(engine)?;
    let c = contour(&p, engine)?;
    let rp = curve(&p, &[level], &c, &cfg)?[0];
    let report = sensitivities(&p, &rp, &c, &cfg, &Parameter::all(p.dim()))
        .map_err(|e| risk_error(e, Some(level)))?;
    let mut t = Table::new(&["parameter", "dvar", "dvar_error", "des", "des_error"]);
    for e in &report.entries {
        let (dv, de) = (e.dvar.expect("requested"), e.des.expect("requested"));
        if e.parameter == Parameter::Theta && (dv.value + 1.0).abs() > 1e-6 {
            eprintln!(
                "dgn-risk: warning: dVaR/dtheta = {} differs from -1; results are suspect",
                dv.value
            );
        }
        t.row(&[
            e.parameter.to_string(),
            num(dv.value),
            num(dv.error),
            num(de.value),
            num(de.error),
        ]);
    }
    Ok(t.finish())
}

fn parse_range(range: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Invalid(format!("range {range:?} must look like lo:hi with lo < hi"));
    let (a, b) = range.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if lo < hi && lo.is_finite() && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

/// Leading-order left-tail log density up to a constant; `None` where the
/// density vanishes identically.
fn tail_shape(p: &RemappedPortfolio) -> Result<impl Fn(f64) -> Option<f64>, CliError> {
    let tp = tail_profile(p, DEFAULT_GROUP_TOL);
    // surface a degenerate profile once, before the grid
    if tp.regime != TailRegime::PositiveMin {
        asymptotic_left_log_density(&tp, tp.theta - 1.0)
            .map_err(|e| CliError::Invalid(format!("no tail overlay: {e}")))?;
    }
    Ok(move |v: f64| match tp.regime {
        // power law at the lower support edge
        TailRegime::PositiveMin => (v > tp.v_inf).then(|| tp.m_bar * (v - tp.v_inf).ln()),
        _ => asymptotic_left_log_density(&tp, v).ok(),
    })
}

pub fn pdf(
    input: &Path,
    range: &str,
    points: usize,
    overlay: bool,
    engine: Engine,
) -> Result<String, CliError> {
    let p = load(input)?.portfolio;
    let cfg = quad_config(engine)?;
    let (lo, hi) = parse_range(range)?;
    if points < 2 {
        return Err(CliError::Invalid("--points must be at least 2".into()));
    }
    let fixed = engine
        .nu
        .map(|nu| ContourChoice::for_density(&p, nu))
        .transpose()
        .map_err(|e| risk_error(e, None))?;
    let grid: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect();
    let dens: Vec<f64> = grid
        .par_iter()
        .map(|&v| {
            let c = fixed.unwrap_or_else(|| ContourChoice::saddle(&p, v));
            density_at(&p, v, &c, &cfg)
                .map(|e| e.value)
                .map_err(|e| match risk_error(e, None) {
                    CliError::Numerical(m) => CliError::Numerical(format!("v = {v}: {m}")),
                    other => other,
                })
        })
        .collect::<Result<_, _>>()?;

    if !overlay {
        let mut t = Table::new(&["v", "density"]);
        for (v, d) in grid.iter().zip(&dens) {
            t.row(&[num(*v), num(*d)]);
        }
        return Ok(t.finish());
    }

    let shape = tail_shape(&p)?;
    // fit window: leftmost tenth of the points that carry density
    let live: Vec<(f64, f64)> = grid
        .iter()
        .zip(&dens)
        .filter(|(_, d)| **d > 1e-300)
        .map(|(&v, &d)| (v, d))
        .collect();
    let offsets: Vec<f64> = live[..live.len().div_ceil(10)]
        .iter()
        .filter_map(|&(v, d)| shape(v).map(|s| d.ln() - s))
        .collect();
    if offsets.is_empty() {
        return Err(CliError::Invalid(
            "no grid point has positive density to fit the tail overlay to".into(),
        ));
    }
    // least squares for a pure offset is the mean residual
    let shift = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let mut t = Table::new(&["v", "density", "asymptote"]);
    for (v, d) in grid.iter().zip(&dens) {
        let a = shape(*v).map_or(0.0, |s| (s + shift).exp());
        t.row(&[num(*v), num(*d), num(a)]);
    }
    Ok(t.finish())
}

pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub cl: f64,
    pub sens: Vec<String>,
    pub shock: Option<f64>,
    pub strict: bool,
}

fn parse_parameters(names: &[String], dim: usize) -> Result<Vec<Parameter>, CliError> {
    if names.iter().any(|n| n == "all") {
        return Ok(Parameter::all(dim));
    }
    names
        .iter()
        .map(|n| {
            let b: Parameter = n
                .parse()
                .map_err(|_| CliError::Invalid(format!("unknown parameter {n:?}")))?;
            match b {
                Parameter::Delta(i) | Parameter::Lambda(i) if i >= dim => Err(CliError::Invalid(
                    format!("parameter {n} exceeds the {dim} factors"),
                )),
                _ => Ok(b),
            }
        })
        .collect()
}

pub fn mc(input: &Path, o: &McOptions, engine: Engine) -> Result<String, CliError> {
    let p = load(input)?.portfolio;
    let cfg = quad_config(engine)?;
    let c = contour(&p, engine)?;
    if !(o.cl > 0.0 && o.cl < 1.0) {
        return Err(CliError::Invalid(format!(
            "confidence level {} must lie in (0, 1)",
            o.cl
        )));
    }
    if o.samples == 0 {
        return Err(CliError::Invalid("--samples must be positive".into()));
    }
    let params = parse_parameters(&o.sens, p.dim())?;
    let points = curve(&p, &o.levels, &c, &cfg)?;
    let sample = simulate(&p, o.samples, o.seed).map_err(mc_error)?;

    let mut t = Table::new(&[
        "kind",
        "level",
        "parameter",
        "fourier",
        "mc_point",
        "mc_lower_offset",
        "mc_upper_offset",
        "inside_ci",
    ]);
    let mut misses = 0;
    // a miss must exceed the Fourier value's own error estimate
    let mut emit =
        |t: &mut Table, kind: &str, level: f64, param: String, f: Estimate, m: McEstimate| {
            let inside = f.value >= m.lower() - f.error && f.value <= m.upper() + f.error;
            misses += usize::from(!inside);
            t.row(&[
                kind.into(),
                num(level),
                param,
                num(f.value),
                num(m.point),
                num(m.lower_offset),
                num(m.upper_offset),
                inside.to_string(),
            ]);
        };
    for rp in &points {
        let v = var_ci(&sample, rp.level, o.cl).map_err(mc_error)?;
        let e = es_ci(&sample, rp.level, o.cl).map_err(mc_error)?;
        let var = Estimate {
            value: rp.var,
            error: rp.var_error,
        };
        let es = Estimate {
            value: rp.es.expect("requested"),
            error: rp.es_error.unwrap_or(0.0),
        };
        emit(&mut t, "var", rp.level, String::new(), var, v);
        emit(&mut t, "es", rp.level, String::new(), es, e);
    }
    if !params.is_empty() {
        let draws = FrozenDraws::new(o.seed, p.dim(), o.samples);
        for rp in &points {
            let report = sensitivities(&p, rp, &c, &cfg, &params)
                .map_err(|e| risk_error(e, Some(rp.level)))?;
            for &b in &params {
                let shock = o.shock.unwrap_or_else(|| default_shock(&p, b));
                let fd = fd_sensitivity(&p, b, shock, rp.level, &draws, o.cl).map_err(mc_error)?;
                let entry = report.get(b).expect("requested");
                let (dv, de) = (
                    entry.dvar.expect("requested"),
                    entry.des.expect("requested"),
                );
                emit(&mut t, "dvar", rp.level, b.to_string(), dv, fd.dvar);
                emit(&mut t, "des", rp.level, b.to_string(), de, fd.des);
            }
        }
    }
    let report = t.finish();
    if o.strict && misses > 0 {
        Err(CliError::CiMiss { report, misses })
    } else {
        Ok(report)
    }
}
