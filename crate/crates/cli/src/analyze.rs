use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use tcatt_core::ingest::{load_corpus_lenient, read_text_file, CorpusManifest, TokenRecord};
use tcatt_core::normalize::{sample_ten_points, speaker_references, N_POINTS};
use tcatt_core::tcatt::{analyze_token, Turn, TurnClass};

use crate::config::RunConfig;
use crate::format::fmt_g;

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const ERRORS_CSV: &str = "errors.csv";
pub const METADATA_JSON: &str = "run_metadata.json";

pub fn results_header() -> Vec<String> {
    let mut h: Vec<String> = ["token_id", "speaker", "gender", "tonal_combination", "position", "repetition", "duration_ms"]
        .map(String::from)
        .to_vec();
    h.extend((1..=N_POINTS).map(|i| format!("s{i}")));
    h.extend(
        [
            "class",
            "turn_idx_1",
            "angle_1_rad",
            "sine_1",
            "obtuse_1",
            "turn_idx_2",
            "angle_2_rad",
            "sine_2",
            "obtuse_2",
            "curvature_index",
            "paper_sine_1",
            "paper_sine_2",
        ]
        .map(String::from),
    );
    h
}

/// Full-precision analysis of one token.
#[derive(Debug, Clone, Serialize)]
pub struct TokenRow {
    pub token_id: String,
    pub speaker: String,
    pub gender: String,
    pub tonal_combination: String,
    pub position: String,
    pub repetition: u32,
    pub word_id: String,
    pub duration_ms: f64,
    pub semitones: [f64; N_POINTS],
    pub class: TurnClass,
    pub turns: Vec<Turn>,
    pub curvature_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenError {
    pub token_id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub rows: Vec<TokenRow>,
    pub errors: Vec<TokenError>,
    pub output_dir: PathBuf,
}

impl TokenRow {
    fn csv_record(&self, emit_paper_sine: bool) -> Vec<String> {
        let mut r = vec![
            self.token_id.clone(),
            self.speaker.clone(),
            self.gender.clone(),
            self.tonal_combination.clone(),
            self.position.clone(),
            self.repetition.to_string(),
            fmt_g(self.duration_ms),
        ];
        r.extend(self.semitones.iter().map(|&s| fmt_g(s)));
        r.push(self.class.as_str().to_string());
        for k in 0..2 {
            match self.turns.get(k) {
                // 1-based point index, matching the s1..s10 columns
                Some(t) => r.extend([
                    (t.index + 1).to_string(),
                    fmt_g(t.angle_rad),
                    fmt_g(t.sine),
                    t.obtuse.to_string(),
                ]),
                None => r.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        r.push(fmt_g(self.curvature_index));
        for k in 0..2 {
            r.push(match self.turns.get(k) {
                Some(t) if emit_paper_sine => fmt_g(t.paper_sine),
                _ => String::new(),
            });
        }
        r
    }
}

fn analyze_one(
    token: &TokenRecord,
    refs: &BTreeMap<String, Result<tcatt_core::normalize::SpeakerReference, tcatt_core::normalize::NormalizeError>>,
    cfg: &RunConfig,
) -> Result<TokenRow, String> {
    let reference = match refs.get(&token.speaker_id) {
        Some(Ok(r)) => r,
        Some(Err(e)) => return Err(e.to_string()),
        None => return Err(format!("no reference pitch for speaker {}", token.speaker_id)),
    };
    let contour = sample_ten_points(token, reference, &cfg.sampling()).map_err(|e| e.to_string())?;
    let result = analyze_token(&contour, &cfg.tcatt()).map_err(|e| e.to_string())?;
    Ok(TokenRow {
        token_id: token.token_id.clone(),
        speaker: token.speaker_id.clone(),
        gender: token.gender.to_string(),
        tonal_combination: token.tonal_combination.to_string(),
        position: token.position.to_string(),
        repetition: token.repetition,
        word_id: token.word_id.clone(),
        duration_ms: contour.duration_ms,
        semitones: contour.semitones(),
        class: result.class,
        turns: result.turns,
        curvature_index: result.curvature_index,
    })
}

fn curvature_convention(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "geometry": "points (t, s): t = normalized time in [0, 1], s = semitones times semitone_scale",
        "semitone_scale": cfg.semitone_scale,
        "sides": "a is opposite the turning point; b and c are adjacent",
        "cosine": "law of cosines, cos = (b^2 + c^2 - a^2) / (2bc)",
        "sine": "sqrt(1 - cos^2) of the angle at the turning point",
        "one_turn": "triangle (start, turn, end)",
        "two_turns": "angle at the earlier turn in (start, earlier, later); at the later turn in (earlier, later, end)",
        "curvature_index": "0 for monotone; the turn's sine for one turn; the larger sine for two turns",
        "paper_sine": "sqrt(2bc(1 - cos)) / c, a literal compatibility value that is not a sine",
        "turn_index": "1-based point index in s1..s10",
    })
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Load, normalize and measure every manifest token, then write
/// `results.csv`, `results.json`, `errors.csv` and `run_metadata.json`.
/// Fails only when no token succeeds.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeOutcome> {
    cfg.validate()?;
    let manifest_path = cfg.manifest.as_deref().context("analyze needs --manifest")?;
    let text = read_text_file(manifest_path).with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let manifest = CorpusManifest::from_json(&text).with_context(|| format!("parsing manifest {}", manifest_path.display()))?;
    let expected = manifest.token_count();
    if expected == 0 {
        bail!("manifest {} lists no tokens", manifest_path.display());
    }
    let base = manifest_path.parent().unwrap_or(Path::new("")).to_path_buf();

    let pool = cfg.thread_pool()?;
    let (mut rows, mut errors, refs) = pool.install(|| -> Result<_> {
        let (tokens, failures) = load_corpus_lenient(&manifest, |p: &Path| read_text_file(&base.join(p)))?;
        let refs = speaker_references(&tokens, cfg.reference_method);
        let analyzed: Vec<Result<TokenRow, TokenError>> = tokens
            .par_iter()
            .map(|t| analyze_one(t, &refs, cfg).map_err(|reason| TokenError { token_id: t.token_id.clone(), reason }))
            .collect();
        let mut rows = Vec::new();
        let mut errors: Vec<TokenError> = failures
            .into_iter()
            .map(|f| TokenError { token_id: f.token_id, reason: f.error.to_string() })
            .collect();
        for a in analyzed {
            match a {
                Ok(r) => rows.push(r),
                Err(e) => errors.push(e),
            }
        }
        Ok((rows, errors, refs))
    })?;
    rows.sort_by(|a, b| a.token_id.cmp(&b.token_id));
    errors.sort_by(|a, b| a.token_id.cmp(&b.token_id));
    info!("{} tokens analyzed, {} failed", rows.len(), errors.len());

    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(
        &out.join(ERRORS_CSV),
        &["token_id".to_string(), "reason".to_string()],
        errors.iter().map(|e| vec![e.token_id.clone(), e.reason.clone()]),
    )?;

    let references: BTreeMap<&String, serde_json::Value> = refs
        .iter()
        .map(|(id, r)| {
            let v = match r {
                Ok(r) => serde_json::json!({ "ref_hz": r.ref_hz, "n_samples": r.n_samples }),
                Err(e) => serde_json::json!({ "error": e.to_string() }),
            };
            (id, v)
        })
        .collect();
    let metadata = serde_json::json!({
        "tool": "tcatt",
        "version": env!("CARGO_PKG_VERSION"),
        "manifest": manifest_path.display().to_string(),
        "config": {
            "reference_method": cfg.reference_method.as_str(),
            "coverage_threshold": cfg.coverage_threshold,
            "eps_slope": cfg.eps_slope,
            "semitone_scale": cfg.semitone_scale,
            "emit_paper_sine": cfg.emit_paper_sine,
            "n_points": N_POINTS,
        },
        "curvature_convention": curvature_convention(cfg),
        "speaker_references": references,
        "counts": { "manifest_tokens": expected, "analyzed": rows.len(), "failed": errors.len() },
    });
    write_json(&out.join(METADATA_JSON), &metadata)?;

    if rows.is_empty() {
        bail!("no token could be analyzed; see {}", out.join(ERRORS_CSV).display());
    }
    write_csv(
        &out.join(RESULTS_CSV),
        &results_header(),
        rows.iter().map(|r| r.csv_record(cfg.emit_paper_sine)),
    )?;
    write_json(&out.join(RESULTS_JSON), &serde_json::json!({ "tokens": rows }))?;

    Ok(AnalyzeOutcome { rows, errors, output_dir: out.clone() })
}
