//! Grouped descriptives, factorial ANOVA, correlation and rank tests.

mod anova;
mod correlation;
mod rank;
pub mod special;
mod summary;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anova::{anova_n_way, anova_one_way_per_factor, AnovaRow, AnovaTable};
pub use correlation::{pearson, CorrelationResult};
pub use rank::{mann_whitney_z, midranks, RankTestResult};
pub use special::{f_cdf, f_sf, normal_cdf, t_cdf};
pub use summary::{group_summary, GroupSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("unknown factor {0:?}")]
    UnknownFactor(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("constant input: correlation undefined")]
    ConstantInput,
    #[error("all values identical: rank-test variance is zero")]
    ZeroVariance,
    #[error("unbalanced design: {0}")]
    Unbalanced(String),
    #[error("no residual degrees of freedom")]
    NoResidualDf,
    #[error("invalid degrees of freedom {0}")]
    InvalidDegreesOfFreedom(f64),
    #[error("non-finite or out-of-domain argument")]
    NonFinite,
    #[error("at most 3 factors supported, got {0}")]
    TooManyFactors(usize),
}

/// One dependent-variable value with its factor levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub value: f64,
    pub factors: BTreeMap<String, String>,
}

impl Observation {
    pub fn new<K: Into<String>, V: Into<String>>(value: f64, factors: impl IntoIterator<Item = (K, V)>) -> Self {
        Self { value, factors: factors.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    fn level(&self, factor: &str) -> Result<&str, StatsError> {
        self.factors
            .get(factor)
            .map(String::as_str)
            .ok_or_else(|| StatsError::UnknownFactor(factor.to_string()))
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Format a p value to 4 decimals; anything below 5e-5 prints as `0.0000`.
pub fn format_p(p: f64) -> String {
    format!("{:.4}", p)
}
