//! Run configuration: built-in defaults, an optional TOML file, and the
//! command-line flags (highest precedence), merged and then resolved to the
//! exact system and scheme a run uses.
//!
//! Commands echo the resolved configuration next to their results; feeding
//! the echo back through `--config` reproduces the run bit-identically
//! (timings aside).

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use compound_freq_core::models::{
    delayed_oscillator_radius, delayed_oscillator_system, feedback_model_system,
    DelayedOscillatorParams, FeedbackModelParams,
};
use compound_freq_core::{Error, LinearDelaySystem, Result, SchemeConfig, SchemePath};

use crate::{ModelArgs, SchemeArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Delayed recharge oscillator of equatorial sea-surface temperature
    SuarezSchopf,
    /// Delayed physiological feedback model
    MackeyGlass,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SuarezSchopf => "suarez-schopf",
            ModelKind::MackeyGlass => "mackey-glass",
        }
    }
}

/// Mirror of [`SchemePath`] that clap can parse from the command line.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathKind {
    Direct,
    Fast,
}

impl From<PathKind> for SchemePath {
    fn from(p: PathKind) -> SchemePath {
        match p {
            PathKind::Direct => SchemePath::Direct,
            PathKind::Fast => SchemePath::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum RadiusArg {
    Auto,
    Given(f64),
}

pub fn parse_radius(s: &str) -> std::result::Result<RadiusArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(RadiusArg::Auto);
    }
    s.parse::<f64>()
        .map(RadiusArg::Given)
        .map_err(|_| format!("expected \"auto\" or a number, got {s:?}"))
}

/// Every knob of a run. All fields are optional so absent keys fall through
/// to the next precedence layer; a resolved echo has every relevant field
/// filled in.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_hint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<SchemePath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_mirror: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_high_order: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Layer the model flags over `file` (flags win).
pub fn merge_model(m: &ModelArgs, file: RunConfig) -> RunConfig {
    RunConfig {
        model: m.model.or(file.model),
        alpha: m.alpha.or(file.alpha),
        tau: m.tau.or(file.tau),
        radius: match m.radius {
            // an explicit "auto" overrides a numeric radius from the file
            Some(RadiusArg::Auto) => None,
            Some(RadiusArg::Given(r)) => Some(r),
            None => file.radius,
        },
        gamma: m.gamma.or(file.gamma),
        beta: m.beta.or(file.beta),
        kappa: m.kappa.or(file.kappa),
        lambda: m.lambda.or(file.lambda),
        ..file
    }
}

/// Layer the scheme flags over `base` (flags win). Bare boolean flags can
/// only turn options on; a config file is the way to pin them off.
pub fn merge_scheme(base: RunConfig, s: &SchemeArgs) -> RunConfig {
    RunConfig {
        m: s.m.or(base.m),
        n_modes: s.n_modes.or(base.n_modes),
        t_end: s.t_end.or(base.t_end),
        omega_max: s.omega_max.or(base.omega_max),
        omega_step: s.omega_step.or(base.omega_step),
        nu0: s.nu0.or(base.nu0),
        step_hint: s.step_hint.or(base.step_hint),
        theta_stride: s.theta_stride.or(base.theta_stride),
        path: s.path.map(SchemePath::from).or(base.path),
        no_mirror: if s.no_mirror { Some(true) } else { base.no_mirror },
        allow_high_order: if s.experimental_m {
            Some(true)
        } else {
            base.allow_high_order
        },
        ..base
    }
}

pub fn merge(m: &ModelArgs, s: &SchemeArgs, file: Option<RunConfig>) -> RunConfig {
    merge_scheme(merge_model(m, file.unwrap_or_default()), s)
}

/// A fully-determined run: the system, the scheme, and the config echo that
/// reproduces both.
pub struct Resolved {
    pub sys: LinearDelaySystem,
    pub cfg: SchemeConfig,
    pub echo: RunConfig,
}

/// Scheme part of the resolution; defaults come from [`SchemeConfig`].
pub fn resolve_scheme(rc: &RunConfig) -> SchemeConfig {
    let d = SchemeConfig::default();
    SchemeConfig {
        m: rc.m.unwrap_or(d.m),
        n_modes: rc.n_modes.unwrap_or(d.n_modes),
        t_end: rc.t_end.unwrap_or(d.t_end),
        omega_max: rc.omega_max.unwrap_or(d.omega_max),
        nu0: rc.nu0.unwrap_or(d.nu0),
        omega_step: rc.omega_step.unwrap_or(d.omega_step),
        step_hint: rc.step_hint.unwrap_or(d.step_hint),
        theta_stride: rc.theta_stride.unwrap_or(d.theta_stride),
        path: rc.path.unwrap_or(d.path),
        allow_high_order: rc.allow_high_order.unwrap_or(d.allow_high_order),
    }
}

pub fn resolve(rc: RunConfig) -> Result<Resolved> {
    let model = rc.model.ok_or_else(|| {
        Error::Config("no model selected: pass --model or set `model` in the config file".into())
    })?;
    let mut echo = rc.clone();
    let sys = match model {
        ModelKind::SuarezSchopf => {
            let alpha = rc.alpha.unwrap_or(0.6);
            let tau = rc.tau.unwrap_or(0.83);
            let radius = match rc.radius {
                Some(r) => r,
                None => delayed_oscillator_radius(alpha, tau)?,
            };
            echo.alpha = Some(alpha);
            echo.tau = Some(tau);
            echo.radius = Some(radius);
            delayed_oscillator_system(&DelayedOscillatorParams { alpha, tau, radius })?
        }
        ModelKind::MackeyGlass => {
            let p = FeedbackModelParams {
                gamma: rc.gamma.unwrap_or(0.1),
                beta: rc.beta.unwrap_or(0.2),
                kappa: rc.kappa.unwrap_or(10.0),
                tau: rc.tau.unwrap_or(4.5),
            };
            echo.gamma = Some(p.gamma);
            echo.beta = Some(p.beta);
            echo.kappa = Some(p.kappa);
            echo.tau = Some(p.tau);
            feedback_model_system(&p)?
        }
    };
    let sys = match rc.lambda {
        Some(l) => LinearDelaySystem::new(
            sys.a0,
            sys.a1,
            sys.tau,
            sys.tau0,
            sys.b_tilde,
            l,
            sys.constraint,
        )?,
        None => sys,
    };
    // the echo always records the bound actually used, override or not
    echo.lambda = Some(sys.lambda_bound);

    let cfg = resolve_scheme(&rc);
    echo.m = Some(cfg.m);
    echo.n_modes = Some(cfg.n_modes);
    echo.t_end = Some(cfg.t_end);
    echo.omega_max = Some(cfg.omega_max);
    echo.omega_step = Some(cfg.omega_step);
    echo.nu0 = Some(cfg.nu0);
    echo.step_hint = Some(cfg.step_hint);
    echo.theta_stride = Some(cfg.theta_stride);
    echo.path = Some(cfg.path);
    echo.no_mirror = Some(rc.no_mirror.unwrap_or(false));
    echo.allow_high_order = Some(cfg.allow_high_order);
    Ok(Resolved { sys, cfg, echo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips_through_toml() {
        let rc = RunConfig {
            model: Some(ModelKind::SuarezSchopf),
            alpha: Some(0.6),
            tau: Some(0.83),
            ..Default::default()
        };
        let r = resolve(rc).unwrap();
        let text = toml::to_string_pretty(&r.echo).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, r.echo);
        let r2 = resolve(back).unwrap();
        assert_eq!(r2.sys, r.sys);
        assert_eq!(r2.cfg, r.cfg);
    }

    #[test]
    fn lambda_override_changes_only_the_bound() {
        let base = resolve(RunConfig {
            model: Some(ModelKind::MackeyGlass),
            ..Default::default()
        })
        .unwrap();
        let bumped = resolve(RunConfig {
            model: Some(ModelKind::MackeyGlass),
            lambda: Some(10.0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(bumped.sys.a0, base.sys.a0);
        assert_eq!(bumped.sys.a1, base.sys.a1);
        assert_eq!(bumped.sys.lambda_bound, 10.0);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("modes = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }
}
