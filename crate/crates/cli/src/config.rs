//! Run configuration: one JSON file, with command-line flags taking
//! precedence.

use std::path::Path;

use riesz_core::estimation::{dyadic_eps_grid, gaussian_bump, Endpoint, PowerMethodConfig};
use riesz_core::exponents::{validate_params, RieszParams};
use riesz_core::operator::QuadratureConfig;
use riesz_core::profile::{make_f0, make_g0, make_h, PowerLogPiece, RadialProfile};
use riesz_core::{Result, RieszError};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub d: i64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

/// A builtin name (`f0`, `g0`, `h`, `bump`) or an explicit list of pieces.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Named(String),
    Pieces(Vec<PowerLogPiece>),
}

impl ProfileSpec {
    /// Flag value: a builtin name or the path of a JSON file of pieces.
    pub fn from_flag(s: &str) -> Result<ProfileSpec> {
        if matches!(s, "f0" | "g0" | "h" | "bump") {
            return Ok(ProfileSpec::Named(s.to_string()));
        }
        let text = std::fs::read_to_string(s)
            .map_err(|e| RieszError::Config(format!("cannot read profile file '{s}': {e}")))?;
        let pieces: Vec<PowerLogPiece> =
            serde_json::from_str(&text).map_err(|e| RieszError::Config(format!("bad profile file '{s}': {e}")))?;
        Ok(ProfileSpec::Pieces(pieces))
    }

    /// Builtins are built from the validated parameters at run time.
    pub fn build(&self, params: &RieszParams) -> Result<RadialProfile> {
        match self {
            ProfileSpec::Named(n) => match n.as_str() {
                "f0" => Ok(make_f0(params)),
                "g0" => Ok(make_g0(params)),
                "h" => Ok(make_h(params)),
                "bump" => Ok(gaussian_bump()),
                other => Err(RieszError::Config(format!("unknown builtin profile '{other}' (expected f0, g0, h or bump)"))),
            },
            ProfileSpec::Pieces(p) => {
                RadialProfile::new("custom", p.clone()).map_err(|e| RieszError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsSpec>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub power_method: PowerMethodConfig,
    pub profile: Option<ProfileSpec>,
    pub g_profile: Option<ProfileSpec>,
    pub p: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub radii: Option<Vec<f64>>,
    pub endpoint: Option<Endpoint>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RieszError::Config(format!("cannot read config '{}': {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RieszError::Config(format!("bad config '{}': {e}", path.display())))
    }

    pub fn params(&self) -> Result<RieszParams> {
        let s = self
            .params
            .ok_or_else(|| RieszError::Config("missing params (set them in the config or with --d --alpha --beta --lambda)".into()))?;
        validate_params(s.d, s.alpha, s.beta, s.lambda)
    }

    pub fn profile(&self, params: &RieszParams) -> Result<RadialProfile> {
        self.profile.clone().unwrap_or(ProfileSpec::Named("h".into())).build(params)
    }

    pub fn g_profile(&self, params: &RieszParams) -> Result<RadialProfile> {
        self.g_profile.clone().unwrap_or(ProfileSpec::Named("bump".into())).build(params)
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        self.eps_grid.clone().unwrap_or_else(|| dyadic_eps_grid(2, 9))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples.unwrap_or(1_000_000)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        self.quadrature.validate()?;
        Ok(self.quadrature)
    }
}
