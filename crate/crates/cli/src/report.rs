//! `stats`: ANOVA, group summaries, correlation and rank test over `results.csv`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use tcatt_core::normalize::N_POINTS;
use tcatt_core::stats::{
    anova_n_way, anova_one_way_per_factor, format_p, group_summary, mann_whitney_z, pearson, AnovaTable,
    CorrelationResult, Observation, RankTestResult, StatsError,
};
use tcatt_core::tcatt::TurnClass;

use crate::config::RunConfig;
use crate::format::fmt_g;

pub const FACTORS: [&str; 3] = ["tonal_combination", "position", "gender"];
pub const DEPENDENTS: [&str; 2] = ["curvature_index", "turn_count"];

/// One `results.csv` row reduced to what the statistics need.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub factors: [String; 3],
    pub duration_ms: f64,
    pub curvature_index: f64,
    pub turn_count: usize,
    pub semitones: [f64; N_POINTS],
}

impl ResultRow {
    fn dependent(&self, name: &str) -> f64 {
        match name {
            "curvature_index" => self.curvature_index,
            "turn_count" => self.turn_count as f64,
            "duration_ms" => self.duration_ms,
            _ => unreachable!("unknown dependent {name}"),
        }
    }
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no column {name:?}", path.display()))
    };
    let fc = [col(FACTORS[0])?, col(FACTORS[1])?, col(FACTORS[2])?];
    let (dur, curv, class) = (col("duration_ms")?, col("curvature_index")?, col("class")?);
    let s_cols = (1..=N_POINTS).map(|i| col(&format!("s{i}"))).collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |c: usize| -> Result<f64> {
            let field = rec.get(c).unwrap_or("");
            field
                .parse::<f64>()
                .with_context(|| format!("{} line {line}: column {} is not a number: {field:?}", path.display(), &headers[c]))
        };
        let class: TurnClass = rec
            .get(class)
            .unwrap_or("")
            .parse()
            .map_err(|e: String| anyhow!("{} line {line}: {e}", path.display()))?;
        let mut semitones = [0.0; N_POINTS];
        for (s, &c) in semitones.iter_mut().zip(&s_cols) {
            *s = num(c)?;
        }
        rows.push(ResultRow {
            factors: fc.map(|c| rec.get(c).unwrap_or("").to_string()),
            duration_ms: num(dur)?,
            curvature_index: num(curv)?,
            turn_count: class.turn_count(),
            semitones,
        });
    }
    if rows.is_empty() {
        bail!("{} contains no result rows", path.display());
    }
    Ok(rows)
}

fn observations(rows: &[ResultRow], value: impl Fn(&ResultRow) -> f64) -> Vec<Observation> {
    rows.iter()
        .map(|r| Observation::new(value(r), FACTORS.iter().zip(&r.factors).map(|(f, l)| (*f, l.as_str()))))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AnovaReport {
    pub dependent: String,
    /// `three_way` / `n_way`, or `one_way` under the unbalanced fallback.
    pub model: String,
    pub table: Option<AnovaTable>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupRow {
    pub factor: String,
    pub level: String,
    pub n: usize,
    pub curvature_index_mean: f64,
    pub curvature_index_sd: f64,
    pub turn_count_mean: f64,
    pub duration_ms_mean: f64,
    pub duration_ms_sd: f64,
    pub contour_mean: [f64; N_POINTS],
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub n: usize,
    pub anova: Vec<AnovaReport>,
    pub groups: Vec<GroupRow>,
    pub correlation: Result<CorrelationResult, String>,
    pub ranktest: Result<RankTestResult, String>,
}

fn model_name(k: usize) -> String {
    match k {
        1 => "one_way".into(),
        3 => "three_way".into(),
        k => format!("{k}_way"),
    }
}

pub fn compute_stats(rows: &[ResultRow], cfg: &RunConfig) -> Result<StatsReport> {
    let mut anova = Vec::new();
    for dv in DEPENDENTS {
        let obs = observations(rows, |r| r.dependent(dv));
        match anova_n_way(&obs, &FACTORS, cfg.include_interactions) {
            Ok(t) => anova.push(AnovaReport { dependent: dv.into(), model: model_name(3), table: Some(t), error: None }),
            Err(StatsError::Unbalanced(msg)) if cfg.unbalanced_fallback => {
                log::warn!("{dv}: unbalanced design ({msg}); one-way ANOVA per factor");
                for f in FACTORS {
                    let (table, error) = match anova_one_way_per_factor(&obs, &[f]) {
                        Ok(mut t) => (t.pop(), None),
                        Err(e) => (None, Some(format!("{f}: {e}"))),
                    };
                    anova.push(AnovaReport { dependent: dv.into(), model: model_name(1), table, error });
                }
            }
            Err(e @ StatsError::Unbalanced(_)) => {
                bail!("{dv}: {e}; rerun with --unbalanced-fallback for per-factor one-way ANOVA")
            }
            Err(e) => anova.push(AnovaReport { dependent: dv.into(), model: model_name(3), table: None, error: Some(e.to_string()) }),
        }
    }

    let mut groups = Vec::new();
    for f in FACTORS {
        let summary = |value: &dyn Fn(&ResultRow) -> f64| group_summary(&observations(rows, value), &[f]);
        let curv = summary(&|r| r.curvature_index)?;
        let turns = summary(&|r| r.turn_count as f64)?;
        let dur = summary(&|r| r.duration_ms)?;
        let points = (0..N_POINTS).map(|i| summary(&|r| r.semitones[i])).collect::<Result<Vec<_>, _>>()?;
        for (g, c) in curv.iter().enumerate() {
            groups.push(GroupRow {
                factor: f.into(),
                level: c.levels[0].clone(),
                n: c.n,
                curvature_index_mean: c.mean,
                curvature_index_sd: c.sd,
                turn_count_mean: turns[g].mean,
                duration_ms_mean: dur[g].mean,
                duration_ms_sd: dur[g].sd,
                contour_mean: std::array::from_fn(|i| points[i][g].mean),
            });
        }
    }

    let curv: Vec<f64> = rows.iter().map(|r| r.curvature_index).collect();
    let dur: Vec<f64> = rows.iter().map(|r| r.duration_ms).collect();
    let correlation = pearson(&curv, &dur).map_err(|e| e.to_string());

    let by_gender = |g: &str| -> Vec<f64> {
        rows.iter().filter(|r| r.factors[2] == g).map(|r| r.curvature_index).collect()
    };
    let ranktest = mann_whitney_z(&by_gender("F"), &by_gender("M")).map_err(|e| e.to_string());

    Ok(StatsReport { n: rows.len(), anova, groups, correlation, ranktest })
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

impl StatsReport {
    pub fn anova_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for rep in &self.anova {
            let head = |effect: &str| vec![rep.dependent.clone(), rep.model.clone(), effect.to_string()];
            let Some(t) = &rep.table else {
                let mut r = head("");
                r.extend(std::iter::repeat_n(String::new(), 5));
                r.push(rep.error.clone().unwrap_or_default());
                out.push(r);
                continue;
            };
            for e in &t.effects {
                let mut r = head(&e.name);
                r.extend([e.df.to_string(), fmt_g(e.sum_sq), fmt_g(e.mean_sq), fmt_g(e.f), format_p(e.p)]);
                r.push(if t.degenerate { "degenerate: zero residual variance".into() } else { String::new() });
                out.push(r);
            }
            for (name, ss) in [("Residual", &t.residual), ("Total", &t.total)] {
                let mut r = head(name);
                r.extend([ss.df.to_string(), fmt_g(ss.sum_sq), fmt_g(ss.mean_sq), String::new(), String::new(), String::new()]);
                out.push(r);
            }
        }
        csv_bytes(&["dependent", "model", "effect", "df", "sum_sq", "mean_sq", "F", "p", "note"], out)
    }

    pub fn groups_csv(&self) -> Result<Vec<u8>> {
        let mut header: Vec<String> = [
            "factor",
            "level",
            "n",
            "curvature_index_mean",
            "curvature_index_sd",
            "turn_count_mean",
            "duration_ms_mean",
            "duration_ms_sd",
        ]
        .map(String::from)
        .to_vec();
        header.extend((1..=N_POINTS).map(|i| format!("s{i}_mean")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        csv_bytes(
            &header,
            self.groups.iter().map(|g| {
                let mut r = vec![
                    g.factor.clone(),
                    g.level.clone(),
                    g.n.to_string(),
                    fmt_g(g.curvature_index_mean),
                    fmt_g(g.curvature_index_sd),
                    fmt_g(g.turn_count_mean),
                    fmt_g(g.duration_ms_mean),
                    fmt_g(g.duration_ms_sd),
                ];
                r.extend(g.contour_mean.iter().map(|&s| fmt_g(s)));
                r
            }),
        )
    }

    pub fn correlation_csv(&self) -> Result<Vec<u8>> {
        let row = match &self.correlation {
            Ok(c) => vec![c.n.to_string(), fmt_g(c.r), fmt_g(c.t_stat), format_p(c.p), String::new()],
            Err(e) => vec![self.n.to_string(), String::new(), String::new(), String::new(), e.clone()],
        };
        let mut r = vec!["curvature_index".to_string(), "duration_ms".to_string()];
        r.extend(row);
        csv_bytes(&["x", "y", "n", "r", "t_stat", "p", "note"], [r])
    }

    pub fn ranktest_csv(&self) -> Result<Vec<u8>> {
        let row = match &self.ranktest {
            Ok(t) => vec![t.n1.to_string(), t.n2.to_string(), fmt_g(t.u), fmt_g(t.z), format_p(t.p), String::new()],
            Err(e) => vec![String::new(), String::new(), String::new(), String::new(), String::new(), e.clone()],
        };
        let mut r = vec!["curvature_index".to_string(), "gender".to_string(), "F".to_string(), "M".to_string()];
        r.extend(row);
        csv_bytes(&["variable", "factor", "group_1", "group_2", "n1", "n2", "u", "z", "p", "note"], [r])
    }
}

#[derive(Debug, Clone)]
pub struct StatsOutcome {
    pub report: StatsReport,
    pub files: Vec<PathBuf>,
}

/// Read `results` and write `anova.csv`, `groups.csv`, `correlation.csv`,
/// `ranktest.csv` and the full-precision `stats.json`.
pub fn cmd_stats(results: &Path, cfg: &RunConfig) -> Result<StatsOutcome> {
    cfg.validate()?;
    let rows = read_results(results)?;
    let report = compute_stats(&rows, cfg)?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let json = serde_json::json!({
        "results": results.display().to_string(),
        "include_interactions": cfg.include_interactions,
        "unbalanced_fallback": cfg.unbalanced_fallback,
        "report": report,
    });
    let outputs: HashMap<&str, Vec<u8>> = HashMap::from([
        ("anova.csv", report.anova_csv()?),
        ("groups.csv", report.groups_csv()?),
        ("correlation.csv", report.correlation_csv()?),
        ("ranktest.csv", report.ranktest_csv()?),
        ("stats.json", (serde_json::to_string_pretty(&json)? + "\n").into_bytes()),
    ]);
    let mut files = Vec::new();
    for name in ["anova.csv", "groups.csv", "correlation.csv", "ranktest.csv", "stats.json"] {
        let path = out.join(name);
        std::fs::write(&path, &outputs[name]).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
    }
    Ok(StatsOutcome { report, files })
}
