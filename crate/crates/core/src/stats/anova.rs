//! Fixed-effects factorial ANOVA by cell-mean decomposition.
//!
//! Sums of squares for a factor subset are computed from the subset's cell
//! means; interaction terms subtract all lower-order terms of the subset. On
//! a balanced full crossing these terms are orthogonal, so no SS type choice
//! arises. Unbalanced multi-factor data is refused.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::special::f_sf;
use super::{mean, Observation, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    /// Factor name, or names joined with `:` for interactions.
    pub name: String,
    pub df: usize,
    pub sum_sq: f64,
    pub mean_sq: f64,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumOfSquares {
    pub df: usize,
    pub sum_sq: f64,
    pub mean_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub n: usize,
    pub effects: Vec<AnovaRow>,
    pub residual: SumOfSquares,
    pub total: SumOfSquares,
    /// Residual variance is zero, so F ratios are not informative. Effects with
    /// zero SS report `F = 0, p = 1`; others report `F = inf, p = 0`.
    pub degenerate: bool,
}

impl AnovaTable {
    pub fn effect(&self, name: &str) -> Option<&AnovaRow> {
        self.effects.iter().find(|r| r.name == name)
    }
}

/// Sum over cells of `n_cell * (mean_cell - grand)^2` for the given factor subset.
fn cell_ss(values: &[f64], keys: &[Vec<&str>], subset: &[usize], grand: f64) -> f64 {
    let mut cells: BTreeMap<Vec<&str>, (usize, f64)> = BTreeMap::new();
    for (v, key) in values.iter().zip(keys) {
        let k: Vec<&str> = subset.iter().map(|&i| key[i]).collect();
        let e = cells.entry(k).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += v;
    }
    cells.values().map(|&(n, sum)| n as f64 * (sum / n as f64 - grand).powi(2)).sum()
}

/// Non-empty subsets of `0..k` ordered by size, then lexicographically.
fn subsets(k: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() <= max_size)
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Fixed-effects ANOVA over up to three factors. Main effects only unless
/// `include_interactions`. More than one factor, or any interaction, requires
/// a balanced full crossing.
pub fn anova_n_way(
    observations: &[Observation],
    factors: &[&str],
    include_interactions: bool,
) -> Result<AnovaTable, StatsError> {
    if factors.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    if factors.len() > 3 {
        return Err(StatsError::TooManyFactors(factors.len()));
    }
    let n = observations.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }

    let values: Vec<f64> = observations.iter().map(|o| o.value).collect();
    let keys: Vec<Vec<&str>> = observations
        .iter()
        .map(|o| factors.iter().map(|f| o.level(f)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let levels: Vec<BTreeSet<&str>> =
        (0..factors.len()).map(|i| keys.iter().map(|k| k[i]).collect()).collect();
    for (f, l) in factors.iter().zip(&levels) {
        if l.len() < 2 {
            return Err(StatsError::Unbalanced(format!("factor {f} has a single level")));
        }
    }

    if factors.len() > 1 || include_interactions {
        let mut counts: BTreeMap<&[&str], usize> = BTreeMap::new();
        for k in &keys {
            *counts.entry(k.as_slice()).or_default() += 1;
        }
        let expected_cells: usize = levels.iter().map(BTreeSet::len).product();
        if counts.len() != expected_cells {
            return Err(StatsError::Unbalanced(format!(
                "{} of {} factor cells observed",
                counts.len(),
                expected_cells
            )));
        }
        let (min, max) = (counts.values().min().unwrap(), counts.values().max().unwrap());
        if min != max {
            return Err(StatsError::Unbalanced(format!("cell sizes range from {min} to {max}")));
        }
    }

    let grand = mean(&values);
    let ss_total: f64 = values.iter().map(|v| (v - grand).powi(2)).sum();
    // Constant data leaves only rounding residue in the sums of squares.
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let constant = ss_total <= n as f64 * (1e-12 * scale).powi(2);
    let ss_total = if constant { 0.0 } else { ss_total };

    let max_order = if include_interactions { factors.len() } else { 1 };
    let mut term_ss: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut terms = Vec::new();
    for subset in subsets(factors.len(), max_order) {
        let lower: f64 = term_ss
            .iter()
            .filter(|(t, _)| t.len() < subset.len() && t.iter().all(|i| subset.contains(i)))
            .map(|(_, ss)| ss)
            .sum();
        let ss = if constant { 0.0 } else { (cell_ss(&values, &keys, &subset, grand) - lower).max(0.0) };
        let df: usize = subset.iter().map(|&i| levels[i].len() - 1).product();
        let name = subset.iter().map(|&i| factors[i]).collect::<Vec<_>>().join(":");
        term_ss.insert(subset, ss);
        terms.push((name, df, ss));
    }

    let df_total = n - 1;
    let df_model: usize = terms.iter().map(|t| t.1).sum();
    if df_model >= df_total {
        return Err(StatsError::NoResidualDf);
    }
    let df_res = df_total - df_model;
    let ss_model: f64 = terms.iter().map(|t| t.2).sum();
    let ss_res = (ss_total - ss_model).max(0.0);
    let ms_res = ss_res / df_res as f64;

    let negligible = |ss: f64| ss <= 1e-12 * ss_total || ss_total == 0.0;
    let degenerate = negligible(ss_res);

    let effects = terms
        .into_iter()
        .map(|(name, df, ss)| {
            let ms = ss / df as f64;
            let (f, p) = if degenerate {
                if negligible(ss) {
                    (0.0, 1.0)
                } else {
                    (f64::INFINITY, 0.0)
                }
            } else {
                let f = ms / ms_res;
                (f, f_sf(f, df as f64, df_res as f64)?)
            };
            Ok(AnovaRow { name, df, sum_sq: ss, mean_sq: ms, f, p })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;

    Ok(AnovaTable {
        n,
        effects,
        residual: SumOfSquares { df: df_res, sum_sq: ss_res, mean_sq: ms_res },
        total: SumOfSquares { df: df_total, sum_sq: ss_total, mean_sq: ss_total / df_total as f64 },
        degenerate,
    })
}

/// One-way ANOVA for each factor separately; the fallback for unbalanced data.
pub fn anova_one_way_per_factor(
    observations: &[Observation],
    factors: &[&str],
) -> Result<Vec<AnovaTable>, StatsError> {
    factors.iter().map(|f| anova_n_way(observations, &[f], false)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::special::t_two_sided_p;
    use proptest::prelude::*;

    fn one_way(groups: &[(&str, &[f64])]) -> Vec<Observation> {
        groups
            .iter()
            .flat_map(|(g, vs)| vs.iter().map(move |&v| Observation::new(v, [("g", *g)])))
            .collect()
    }

    #[test]
    fn one_way_hand_example() {
        let obs = one_way(&[("a", &[1.0, 2.0, 3.0]), ("b", &[4.0, 5.0, 6.0])]);
        let t = anova_n_way(&obs, &["g"], false).unwrap();
        let g = t.effect("g").unwrap();
        assert!((g.sum_sq - 13.5).abs() < 1e-12);
        assert!((t.residual.sum_sq - 4.0).abs() < 1e-12);
        assert_eq!((g.df, t.residual.df, t.total.df), (1, 4, 5));
        assert!((g.f - 13.5).abs() < 1e-9);
        // F(1, 4) = t² with 4 df
        let p_t = t_two_sided_p(13.5f64.sqrt(), 4.0).unwrap();
        assert!((g.p - p_t).abs() < 1e-12);
        assert!((g.p - 0.0213).abs() < 1e-3);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let obs = one_way(&[("a", &[5.0, 5.0]), ("b", &[5.0, 5.0])]);
        let t = anova_n_way(&obs, &["g"], false).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.total.sum_sq, 0.0);
        assert_eq!((t.effects[0].f, t.effects[0].p), (0.0, 1.0));
    }

    #[test]
    fn constant_with_inexact_mean_is_degenerate() {
        let obs = crossed(|_, _, _| 0.809_857, 120);
        let t = anova_n_way(&obs, &["A", "B"], true).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.total.sum_sq, 0.0);
        assert!(t.effects.iter().all(|e| e.sum_sq == 0.0 && e.f == 0.0 && e.p == 1.0));
    }

    fn crossed(value: impl Fn(usize, usize, usize) -> f64, reps: usize) -> Vec<Observation> {
        let mut out = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for r in 0..reps {
                    out.push(Observation::new(
                        value(a, b, r),
                        [("A", format!("a{a}")), ("B", format!("b{b}"))],
                    ));
                }
            }
        }
        out
    }

    #[test]
    fn additive_two_by_two_has_no_interaction() {
        let obs = crossed(|a, b, r| 3.0 * a as f64 + [1.0, 7.0][b] + [0.0, 0.5][r], 2);
        let t = anova_n_way(&obs, &["A", "B"], true).unwrap();
        assert!(t.effect("A:B").unwrap().sum_sq.abs() < 1e-12);
        assert!(t.effect("A").unwrap().sum_sq > 0.0);
    }

    #[test]
    fn row_constants_give_zero_interaction() {
        let obs = crossed(|a, _, _| [2.0, 9.0][a], 2);
        let t = anova_n_way(&obs, &["A", "B"], true).unwrap();
        assert!(t.effect("A:B").unwrap().sum_sq.abs() < 1e-12);
        assert!(t.effect("B").unwrap().sum_sq.abs() < 1e-12);
        assert!(t.degenerate);
        assert_eq!(t.effect("A").unwrap().p, 0.0);
    }

    #[test]
    fn unbalanced_refused_and_fallback() {
        let mut obs = crossed(|a, b, r| (a + b + r) as f64, 2);
        obs.pop();
        assert!(matches!(anova_n_way(&obs, &["A", "B"], false), Err(StatsError::Unbalanced(_))));
        let tables = anova_one_way_per_factor(&obs, &["A", "B"]).unwrap();
        assert_eq!(tables.len(), 2);
        assert_eq!(tables[0].effects[0].name, "A");
    }

    #[test]
    fn saturated_model_has_no_residual() {
        let obs = crossed(|a, b, _| (a * 2 + b) as f64, 1);
        assert_eq!(anova_n_way(&obs, &["A", "B"], true), Err(StatsError::NoResidualDf));
    }

    #[test]
    fn unknown_factor() {
        let obs = one_way(&[("a", &[1.0, 2.0]), ("b", &[3.0, 4.0])]);
        assert_eq!(anova_n_way(&obs, &["zzz"], false), Err(StatsError::UnknownFactor("zzz".into())));
    }

    fn three_way(values: &[f64]) -> Vec<Observation> {
        let mut it = values.iter();
        let mut out = Vec::new();
        for a in 0..3 {
            for b in 0..2 {
                for c in 0..2 {
                    for _ in 0..3 {
                        out.push(Observation::new(
                            *it.next().unwrap(),
                            [("A", format!("{a}")), ("B", format!("{b}")), ("C", format!("{c}"))],
                        ));
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn decomposition_sums_to_total(values in prop::collection::vec(-10.0f64..10.0, 36)) {
            let obs = three_way(&values);
            for inter in [false, true] {
                let t = anova_n_way(&obs, &["A", "B", "C"], inter).unwrap();
                let sum: f64 = t.effects.iter().map(|e| e.sum_sq).sum::<f64>() + t.residual.sum_sq;
                prop_assert!((sum - t.total.sum_sq).abs() <= 1e-9 * t.total.sum_sq.max(1.0));
                prop_assert_eq!(t.effects.iter().map(|e| e.df).sum::<usize>() + t.residual.df, t.total.df);
                for e in &t.effects {
                    prop_assert!(e.sum_sq >= 0.0 && (0.0..=1.0).contains(&e.p));
                }
            }
            // full model residual equals the within-cell sum of squares
            let t = anova_n_way(&obs, &["A", "B", "C"], true).unwrap();
            let within: f64 = values.chunks(3).map(|c| {
                let m = c.iter().sum::<f64>() / 3.0;
                c.iter().map(|v| (v - m).powi(2)).sum::<f64>()
            }).sum();
            prop_assert!((t.residual.sum_sq - within).abs() <= 1e-9 * within.max(1.0));
            prop_assert_eq!(t.residual.df, 24);
        }
    }
}
