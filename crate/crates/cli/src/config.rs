//! Curve-definition JSON: family, params, period, space form, polarisation.

use serde::{Deserialize, Serialize};

use darboux_core::{CurveFamily, PolarisedCurve, Polarisation, SpaceFormVector};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SpaceFormCfg {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum PolarisationCfg {
    Named(String),
    Explicit { explicit_m: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct CurveCfg {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    pub space_form: SpaceFormCfg,
    pub polarisation: PolarisationCfg,
}

fn param_f64(params: &serde_json::Value, key: &str) -> CliResult<f64> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| CliError::Config(format!("params.{key} must be a number")))
}

fn param_vec(params: &serde_json::Value, key: &str) -> Vec<f64> {
    params
        .get(key)
        .and_then(|v| v.as_array())
        .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        .unwrap_or_default()
}

pub fn build_curve(cfg: &CurveCfg) -> CliResult<PolarisedCurve> {
    let family = match cfg.family.as_str() {
        "circle" => CurveFamily::Circle {
            radius: param_f64(&cfg.params, "r")?,
        },
        "rose" => CurveFamily::Rose {
            a: param_f64(&cfg.params, "a")?,
            b: param_f64(&cfg.params, "b")?,
        },
        "figure1" => CurveFamily::Figure1,
        "figure2" => CurveFamily::Figure2,
        "fourier" => CurveFamily::Fourier {
            cos1: param_vec(&cfg.params, "cos1"),
            sin1: param_vec(&cfg.params, "sin1"),
            cos2: param_vec(&cfg.params, "cos2"),
            sin2: param_vec(&cfg.params, "sin2"),
        },
        "samples" => {
            let pts = cfg
                .params
                .get("points")
                .and_then(|v| v.as_array())
                .ok_or_else(|| CliError::Config("params.points must be an array".into()))?;
            let mut points = Vec::with_capacity(pts.len());
            for p in pts {
                let pair = p.as_array().and_then(|a| {
                    if a.len() == 2 {
                        Some([a[0].as_f64()?, a[1].as_f64()?])
                    } else {
                        None
                    }
                });
                points.push(pair.ok_or_else(|| {
                    CliError::Config("each sample point must be [x1, x2]".into())
                })?);
            }
            CurveFamily::Samples { points }
        }
        other => return Err(CliError::Config(format!("unknown curve family '{other}'"))),
    };

    let space_form = match cfg.space_form.kind.as_str() {
        "euclidean" => SpaceFormVector::euclidean(),
        "kappa" => SpaceFormVector::curved(cfg.space_form.kappa.ok_or_else(|| {
            CliError::Config("space_form.kappa is required for kind 'kappa'".into())
        })?),
        "halfplane" => SpaceFormVector::halfplane(),
        other => {
            return Err(CliError::Config(format!("unknown space form kind '{other}'")))
        }
    };

    let polarisation = match &cfg.polarisation {
        PolarisationCfg::Named(name) => match name.as_str() {
            "arc" => Polarisation::ArcLength,
            "neg_arc" => Polarisation::NegArcLength,
            other => {
                return Err(CliError::Config(format!("unknown polarisation '{other}'")))
            }
        },
        PolarisationCfg::Explicit { explicit_m } => {
            if explicit_m.is_empty() {
                return Err(CliError::Config("explicit_m must be non-empty".into()));
            }
            Polarisation::Explicit(explicit_m.clone())
        }
    };

    let period = cfg.period.unwrap_or_else(|| family.default_period());
    // construction failures (open curve, irregular point, bad chart) are
    // properties of the config, not of downstream numerics
    PolarisedCurve::new(family, period, space_form, polarisation)
        .map_err(|e| CliError::Config(format!("invalid curve: {e}")))
}
