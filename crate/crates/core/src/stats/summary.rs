use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{mean, Observation, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    /// Level labels, one per grouping factor, in `by` order.
    pub levels: Vec<String>,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 when `n == 1`.
    pub sd: f64,
}

/// Count, mean and sample sd per combination of `by` levels, sorted by labels.
/// An empty `by` gives one global group.
pub fn group_summary(observations: &[Observation], by: &[&str]) -> Result<Vec<GroupSummary>, StatsError> {
    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    for obs in observations {
        let key = by.iter().map(|f| obs.level(f).map(str::to_string)).collect::<Result<Vec<_>, _>>()?;
        groups.entry(key).or_default().push(obs.value);
    }
    Ok(groups
        .into_iter()
        .map(|(levels, values)| {
            let n = values.len();
            let m = mean(&values);
            let sd = if n > 1 {
                (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            GroupSummary { levels, n, mean: m, sd }
        })
        .collect())
}
