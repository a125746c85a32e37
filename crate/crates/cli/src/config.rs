//! JSON run descriptions. Every record rejects unknown keys, and
//! `validate` builds the library types so bad values fail before any work.

use std::path::Path;

use brittle_core::densities::{EtaSchedule, ModelParams};
use brittle_core::gammalab::{AmOptions, CgOptions, Init};
use brittle_core::microstructure::LaminateCase;
use brittle_core::symcalc::{IsoTensor, SymMat};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

pub fn load<C: DeserializeOwned>(path: &Path) -> Result<C, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

fn schema(e: brittle_core::Error) -> CliError {
    CliError::Schema(e.to_string())
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda_w: f64,
    pub mu_w: f64,
    pub lambda_s: f64,
    pub mu_s: f64,
    pub kappa: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    /// `η_ε = ε^p`; absent means `η_ε = αε`.
    #[serde(default)]
    pub eta_exponent: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { lambda_w: 1.0, mu_w: 1.0, lambda_s: 2.0, mu_s: 1.5, kappa: 0.7, alpha: 1.0, eta_exponent: None }
    }
}

impl ParamsConfig {
    pub fn build(&self) -> Result<ModelParams<f64>, CliError> {
        let eta = match self.eta_exponent {
            Some(q) => EtaSchedule::Power(q),
            None => EtaSchedule::Proportional,
        };
        ModelParams::new(
            IsoTensor::new(self.lambda_w, self.mu_w).map_err(schema)?,
            IsoTensor::new(self.lambda_s, self.mu_s).map_err(schema)?,
            self.kappa,
            self.alpha,
            eta,
        )
        .map_err(schema)
    }
}

pub fn sym(packed: &[f64]) -> Result<SymMat<f64>, CliError> {
    SymMat::from_packed(packed).map_err(|e| CliError::Schema(format!("strain {packed:?}: {e}")))
}

fn positive_eps(list: &[f64]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Schema("eps_list is empty".into()));
    }
    match list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        Some(e) => Err(CliError::Schema(format!("eps must be positive, got {e}"))),
        None => Ok(()),
    }
}

// density ---------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySweep {
    /// Packed direction `d`; rows are `t·d`.
    pub direction: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub eps: f64,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub sweep: Option<RaySweep>,
    /// Adds the Tresca columns.
    #[serde(default)]
    pub tresca: bool,
}

pub struct DensityRun {
    pub params: ModelParams<f64>,
    pub eps: f64,
    /// `(t, ξ)` per row.
    pub rows: Vec<(f64, SymMat<f64>)>,
    pub direction: Option<SymMat<f64>>,
    pub tresca: bool,
}

impl DensityConfig {
    pub fn validate(&self) -> Result<DensityRun, CliError> {
        let params = self.params.build()?;
        positive_eps(&[self.eps])?;
        if self.tresca {
            params.check_tresca().map_err(schema)?;
        }
        let mut rows = Vec::new();
        for p in &self.points {
            rows.push((1.0, sym(p)?));
        }
        let mut direction = None;
        if let Some(s) = &self.sweep {
            let d = sym(&s.direction)?;
            if s.steps < 2 || !(s.t_min.is_finite() && s.t_max.is_finite() && s.t_min < s.t_max) {
                return Err(CliError::Schema("sweep needs steps >= 2 and t_min < t_max".into()));
            }
            for k in 0..s.steps {
                let t = s.t_min + (s.t_max - s.t_min) * k as f64 / (s.steps - 1) as f64;
                rows.push((t, d.scale(t)));
            }
            direction = Some(d);
        }
        if rows.is_empty() {
            return Err(CliError::Schema("need `points` or `sweep`".into()));
        }
        Ok(DensityRun { params, eps: self.eps, rows, direction, tresca: self.tresca })
    }
}

// converge --------------------------------------------------------------------

fn default_eps_list() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
}

impl ConvergeConfig {
    pub fn validate(&self) -> Result<(ModelParams<f64>, Vec<SymMat<f64>>), CliError> {
        let p = self.params.build()?;
        positive_eps(&self.eps_list)?;
        if self.points.is_empty() {
            return Err(CliError::Schema("points is empty".into()));
        }
        let pts = self.points.iter().map(|v| sym(v)).collect::<Result<Vec<_>, _>>()?;
        Ok((p, pts))
    }
}

// laminate --------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum CaseConfig {
    One { xi1: f64, xi2: f64 },
    Two { a: [f64; 2], b: [f64; 2] },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminateConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub case: CaseConfig,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    /// Fixed layer count; absent means `⌈ε^{-1/2}⌉`.
    #[serde(default)]
    pub n_layers: Option<usize>,
}

impl LaminateConfig {
    pub fn validate(&self) -> Result<(ModelParams<f64>, LaminateCase<f64>), CliError> {
        let p = self.params.build()?;
        positive_eps(&self.eps_list)?;
        if self.n_layers == Some(0) {
            return Err(CliError::Schema("n_layers must be positive".into()));
        }
        let case = match self.case {
            CaseConfig::One { xi1, xi2 } => {
                if !(xi1 * xi2 > 0.0 || (xi1 == 0.0 && xi2 == 0.0)) {
                    return Err(CliError::Schema("case one needs xi1 * xi2 > 0".into()));
                }
                LaminateCase::One { xi1, xi2 }
            }
            CaseConfig::Two { a, b } => {
                if a.iter().chain(&b).any(|v| !v.is_finite()) {
                    return Err(CliError::Schema("case two vectors must be finite".into()));
                }
                LaminateCase::Two { a, b }
            }
        };
        Ok((p, case))
    }
}

// solve -----------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RegimeConfig {
    Trivial,
    Hencky,
    Elastic,
    Tresca,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum InitConfig {
    Undamaged,
    Random { fraction: f64 },
    Laminate,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub am_tol: f64,
    pub am_max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let am = AmOptions::<f64>::default();
        Self { am_tol: am.tol, am_max_iter: am.max_iter, cg_tol: am.cg.tol, cg_max_iter: am.cg.max_iter }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub regime: RegimeConfig,
    /// Packed 2-D strain of the affine boundary datum.
    pub xi_bc: [f64; 3],
    pub eps_list: Vec<f64>,
    #[serde(default = "default_init")]
    pub init: InitConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

fn default_init() -> InitConfig {
    InitConfig::Laminate
}

pub struct SolveRun {
    pub params: ModelParams<f64>,
    pub regime: RegimeConfig,
    pub xi: SymMat<f64>,
    pub init: Init<f64>,
    pub am: AmOptions<f64>,
}

impl SolveConfig {
    pub fn validate(&self) -> Result<SolveRun, CliError> {
        let params = self.params.build()?;
        positive_eps(&self.eps_list)?;
        if self.regime == RegimeConfig::Tresca {
            params.check_tresca().map_err(schema)?;
        }
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return Err(CliError::Schema("grid needs nx, ny >= 1".into()));
        }
        let t = &self.tolerances;
        if !(t.am_tol >= 0.0 && t.cg_tol > 0.0 && t.am_max_iter > 0 && t.cg_max_iter > 0) {
            return Err(CliError::Schema("tolerances must be positive".into()));
        }
        let init = match self.init {
            InitConfig::Undamaged => Init::Undamaged,
            InitConfig::Random { fraction } => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(CliError::Schema(format!("random fraction must lie in [0, 1], got {fraction}")));
                }
                Init::Random { fraction }
            }
            InitConfig::Laminate => Init::Laminate,
        };
        let am = AmOptions {
            tol: t.am_tol,
            max_iter: t.am_max_iter,
            cg: CgOptions { tol: t.cg_tol, max_iter: t.cg_max_iter },
            freeze_damage: false,
        };
        Ok(SolveRun { params, regime: self.regime, xi: sym(&self.xi_bc)?, init, am })
    }
}

// verify ----------------------------------------------------------------------

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    /// Samples per oracle and dimension; the grid oracles use at most 50.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<ModelParams<f64>, CliError> {
        if self.samples == 0 {
            return Err(CliError::Schema("samples must be positive".into()));
        }
        self.params.build()
    }
}
