//! The JSON configuration document and its validation.

use definability::arith::{is_squarefree, FactorBudget};
use definability::curve::{Curve, CurveContext, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Pretty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCoefficients {
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub trial_bound: u64,
    pub rho_iterations: u64,
    pub rho_attempts: u32,
    pub seed: u64,
    /// Default certification depth for vertical checks.
    pub depth: u32,
    /// Default window for formula validation.
    pub window: i64,
    /// Largest sequence index used by table-wide checks.
    pub table_bound: u64,
    /// Largest index the subset construction may use.
    pub subset_max_index: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        let f = FactorBudget::default();
        Budgets {
            trial_bound: f.trial_bound,
            rho_iterations: f.rho_iterations,
            rho_attempts: f.rho_attempts,
            seed: f.seed,
            depth: 3,
            window: 50,
            table_bound: 25,
            subset_max_index: 120,
        }
    }
}

impl Budgets {
    pub fn factor_budget(&self) -> FactorBudget {
        FactorBudget {
            trial_bound: self.trial_bound,
            rho_iterations: self.rho_iterations,
            rho_attempts: self.rho_attempts,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub curve: CurveCoefficients,
    /// Affine coordinates of Q as rationals, e.g. ["3", "5"].
    pub generator: [String; 2],
    /// Multiplier t with P = tQ; absent means the torsion-derived default.
    pub t: Option<u64>,
    /// M = Q(sqrt d).
    pub d: i64,
    /// L = Q(sqrt d_aux).
    pub d_aux: i64,
    pub epsilon: String,
    pub budgets: Budgets,
    pub cache_path: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            curve: CurveCoefficients { a: 0, b: -2 },
            generator: ["3".into(), "5".into()],
            t: Some(1),
            d: 5,
            d_aux: -23,
            epsilon: "1/4".into(),
            budgets: Budgets::default(),
            cache_path: None,
            format: ReportFormat::Json,
        }
    }
}

/// Reads "p/q", an integer, or a terminating decimal such as "0.25".
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let num: BigInt = digits.parse().ok()?;
        let den = Pow::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Some(if neg { -r } else { r });
    }
    if let Some((n, d)) = s.split_once('/') {
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n.trim().parse().ok()?, d));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: ToolkitConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.context()?;
        for (name, d) in [("d", self.d), ("d_aux", self.d_aux)] {
            if d == 0 || d == 1 || !is_squarefree(d) {
                return Err(ConfigError::Invalid(format!("{name} = {d} is not a squarefree integer other than 0, 1")));
            }
        }
        let eps = self.epsilon()?;
        if !eps.is_positive() || eps > BigRational::one() {
            return Err(ConfigError::Invalid(format!("epsilon = {eps} is outside (0, 1]")));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Result<BigRational, ConfigError> {
        parse_rational(&self.epsilon).ok_or_else(|| ConfigError::Invalid(format!("epsilon {:?} is not a rational", self.epsilon)))
    }

    /// The curve, generator and base point; fails on a singular curve or a
    /// generator off the curve.
    pub fn context(&self) -> Result<CurveContext, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        let curve = Curve::new(self.curve.a, self.curve.b).map_err(|e| invalid(&e))?;
        let coord = |s: &String| {
            parse_rational(s).ok_or_else(|| ConfigError::Invalid(format!("generator coordinate {s:?} is not a rational")))
        };
        let q = Point::Affine { x: coord(&self.generator[0])?, y: coord(&self.generator[1])? };
        let ctx = match self.t {
            None => CurveContext::new(curve, q),
            Some(1) => CurveContext::with_base_point(curve, q),
            Some(t) => CurveContext::with_t(curve, q, t),
        };
        ctx.map_err(|e| invalid(&e))
    }
}
