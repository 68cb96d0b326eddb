//! Seeded synthetic contours and balanced corpora with known ground truth.
//!
//! Random numbers come from `ChaCha8Rng` (rand_chacha) and standard normal
//! deviates from `rand_distr::StandardNormal`. Token `i` of a corpus draws
//! from its own stream seeded with [`token_seed`], so generation order and
//! thread count never change the output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    serialize_f0_csv, serialize_textgrid, CorpusManifest, F0Sample, F0Track, Gender, Interval,
    IntervalTier, ManifestEntry, ManifestSpeaker, ManifestToken, Position, TonalCombination,
    TrackFormat, TARGET_WORDS,
};
use crate::normalize::{normalized_grid, ten_point_times, SampledContour, N_POINTS};

pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9) + StandardNormal (rand_distr 0.5)";
pub const SEED_RULE: &str =
    "token_seed(seed, i) = splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15), wrapping u64 arithmetic";

pub const FACTORS: [&str; 3] = ["tonal_combination", "position", "gender"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid contour spec: {0}")]
    InvalidSpec(String),
    #[error("unknown effect factor {0:?} (expected tonal_combination, position or gender)")]
    UnknownFactor(String),
    #[error("unknown level {level:?} for factor {factor}")]
    UnknownLevel { factor: String, level: String },
    #[error("invalid corpus config: {0}")]
    InvalidConfig(String),
}

/// Falling-rising contour family. The dip vertex sits `dip_depth_st` below
/// the lower of onset and offset; an optional peak sits `second_peak_st` above
/// the higher of the two, halfway between the dip and the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub onset_st: f64,
    pub dip_depth_st: f64,
    pub dip_position: f64,
    pub offset_st: f64,
    #[serde(default)]
    pub second_peak_st: f64,
    #[serde(default)]
    pub noise_sd_st: f64,
    pub seed: u64,
    #[serde(default = "default_duration")]
    pub duration_ms: f64,
}

fn default_duration() -> f64 {
    200.0
}

impl ContourSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let all_finite = [
            self.onset_st,
            self.dip_depth_st,
            self.dip_position,
            self.offset_st,
            self.second_peak_st,
            self.noise_sd_st,
            self.duration_ms,
        ]
        .iter()
        .all(|v| v.is_finite());
        let fail = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if !all_finite {
            return fail("non-finite parameter");
        }
        if !(self.dip_position > 0.0 && self.dip_position < 1.0) {
            return fail("dip_position must lie strictly inside (0, 1)");
        }
        if self.dip_depth_st < 0.0 || self.second_peak_st < 0.0 || self.noise_sd_st < 0.0 {
            return fail("dip depth, second peak and noise sd must be >= 0");
        }
        if !(self.duration_ms > 0.0) {
            return fail("duration_ms must be positive");
        }
        Ok(())
    }

    /// Knots of the noiseless piecewise-linear contour.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let low = self.onset_st.min(self.offset_st);
        let high = self.onset_st.max(self.offset_st);
        let mut k = vec![(0.0, self.onset_st), (self.dip_position, low - self.dip_depth_st)];
        if self.second_peak_st > 0.0 {
            k.push(((self.dip_position + 1.0) / 2.0, high + self.second_peak_st));
        }
        k.push((1.0, self.offset_st));
        k
    }
}

fn piecewise_linear(knots: &[(f64, f64)], t: f64) -> f64 {
    let j = knots.partition_point(|k| k.0 < t).clamp(1, knots.len() - 1);
    let (a, b) = (knots[j - 1], knots[j]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

fn contour_values(spec: &ContourSpec, rng: &mut ChaCha8Rng) -> [f64; N_POINTS] {
    let knots = spec.knots();
    let grid = normalized_grid();
    std::array::from_fn(|i| {
        let z: f64 = rng.sample(StandardNormal);
        piecewise_linear(&knots, grid[i]) + spec.noise_sd_st * z
    })
}

/// One contour from `spec`, deterministic in `spec.seed`.
pub fn gen_contour(spec: &ContourSpec) -> Result<SampledContour, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(SampledContour::from_semitones("synthetic", contour_values(spec, &mut rng), spec.duration_ms))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the random stream owned by token `index`.
pub fn token_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthCorpusConfig {
    pub speakers_per_gender: usize,
    pub repetitions: u32,
    pub base_dip_depth_st: f64,
    /// factor → level → added dip depth (semitones).
    pub effects: BTreeMap<String, BTreeMap<String, f64>>,
    /// Token-level Gaussian noise on the dip depth.
    pub noise_sd_st: f64,
    /// Per-point Gaussian noise on the contour.
    pub point_noise_sd_st: f64,
    pub onset_st: f64,
    pub offset_st: f64,
    pub dip_position: f64,
    pub base_duration_ms: f64,
    /// position → added duration (ms).
    pub position_duration_ms: BTreeMap<String, f64>,
    /// Added duration per semitone of dip depth.
    pub duration_coupling_ms_per_st: f64,
    pub female_ref_hz: f64,
    pub male_ref_hz: f64,
    pub seed: u64,
}

impl Default for SynthCorpusConfig {
    fn default() -> Self {
        let effects = BTreeMap::from([
            ("tonal_combination".to_string(), BTreeMap::from([("T3T2".to_string(), 0.8)])),
            (
                "position".to_string(),
                BTreeMap::from([("initial".to_string(), 0.6), ("final".to_string(), 0.3)]),
            ),
            ("gender".to_string(), BTreeMap::from([("M".to_string(), 0.5)])),
        ]);
        Self {
            speakers_per_gender: 4,
            repetitions: 2,
            base_dip_depth_st: 0.5,
            effects,
            noise_sd_st: 0.2,
            point_noise_sd_st: 0.0,
            onset_st: 0.0,
            offset_st: 2.0,
            dip_position: 0.4,
            base_duration_ms: 180.0,
            position_duration_ms: BTreeMap::from([
                ("initial".to_string(), 40.0),
                ("final".to_string(), 20.0),
            ]),
            duration_coupling_ms_per_st: 20.0,
            female_ref_hz: 220.0,
            male_ref_hz: 120.0,
            seed: 2022,
        }
    }
}

impl SynthCorpusConfig {
    /// All effects and durations zero; only the dip-depth noise remains.
    pub fn null_effects() -> Self {
        Self {
            effects: BTreeMap::new(),
            position_duration_ms: BTreeMap::new(),
            duration_coupling_ms_per_st: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let levels = |factor: &str| -> Option<Vec<String>> {
            match factor {
                "tonal_combination" => Some(TonalCombination::all().iter().map(|t| t.to_string()).collect()),
                "position" => Some(Position::ALL.iter().map(|p| p.to_string()).collect()),
                "gender" => Some(vec!["F".into(), "M".into()]),
                _ => None,
            }
        };
        for (factor, by_level) in &self.effects {
            let known = levels(factor).ok_or_else(|| SynthError::UnknownFactor(factor.clone()))?;
            for level in by_level.keys() {
                if !known.contains(level) {
                    return Err(SynthError::UnknownLevel { factor: factor.clone(), level: level.clone() });
                }
            }
        }
        for level in self.position_duration_ms.keys() {
            if level.parse::<Position>().is_err() {
                return Err(SynthError::UnknownLevel { factor: "position".into(), level: level.clone() });
            }
        }
        if self.speakers_per_gender == 0 || self.repetitions == 0 {
            return Err(SynthError::InvalidConfig("need at least one speaker and repetition".into()));
        }
        if !(self.female_ref_hz > 0.0 && self.male_ref_hz > 0.0) {
            return Err(SynthError::InvalidConfig("reference pitches must be positive".into()));
        }
        if !(self.noise_sd_st >= 0.0 && self.point_noise_sd_st >= 0.0) {
            return Err(SynthError::InvalidConfig("noise sd must be >= 0".into()));
        }
        if !(self.dip_position > 0.0 && self.dip_position < 1.0) {
            return Err(SynthError::InvalidConfig("dip_position must lie strictly inside (0, 1)".into()));
        }
        Ok(())
    }

    fn effect(&self, factor: &str, level: &str) -> f64 {
        self.effects.get(factor).and_then(|m| m.get(level)).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpeaker {
    pub speaker_id: String,
    pub gender: Gender,
    pub ref_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthToken {
    pub token_id: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub tonal_combination: TonalCombination,
    pub position: Position,
    pub repetition: u32,
    pub word_id: String,
    pub dip_depth_st: f64,
    pub duration_ms: f64,
    /// Semitones re the speaker's arithmetic-mean pitch.
    pub contour: SampledContour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub config: SynthCorpusConfig,
    pub speakers: Vec<SynthSpeaker>,
    pub tokens: Vec<SynthToken>,
}

/// Generate a balanced corpus: speakers × repetitions × words × positions.
///
/// Each token's dip depth is `base + Σ effects + noise`, clipped at 0, and its
/// duration is `base + position offset + coupling × depth`. Contours are then
/// shifted per speaker so that the arithmetic mean of all voiced samples
/// written to disk equals the speaker's reference pitch; re-ingesting the
/// files therefore recovers the stored semitone values.
pub fn gen_corpus(config: &SynthCorpusConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;

    let mut speakers = Vec::new();
    for (gender, base_hz, step) in [(Gender::F, config.female_ref_hz, 10.0), (Gender::M, config.male_ref_hz, 8.0)] {
        for k in 0..config.speakers_per_gender {
            speakers.push(SynthSpeaker {
                speaker_id: format!("{}{:02}", gender, k + 1),
                gender,
                ref_hz: base_hz + step * k as f64,
            });
        }
    }

    struct Cell<'a> {
        speaker: &'a SynthSpeaker,
        repetition: u32,
        word: usize,
        position: Position,
    }
    let mut cells = Vec::new();
    for speaker in &speakers {
        for repetition in 1..=config.repetitions {
            for word in 0..TARGET_WORDS.len() {
                for position in Position::ALL {
                    cells.push(Cell { speaker, repetition, word, position });
                }
            }
        }
    }

    let generated: Vec<Result<SynthToken, SynthError>> = cells
        .par_iter()
        .enumerate()
        .map(|(index, cell)| {
            let w = TARGET_WORDS[cell.word];
            let tc = TonalCombination::new(w.preceding_tone).expect("vocabulary tones are 1..=5");
            let mut rng = ChaCha8Rng::seed_from_u64(token_seed(config.seed, index));
            let z: f64 = rng.sample(StandardNormal);
            let depth = (config.base_dip_depth_st
                + config.effect("tonal_combination", tc.as_str())
                + config.effect("position", cell.position.as_str())
                + config.effect("gender", cell.speaker.gender.as_str())
                + config.noise_sd_st * z)
                .max(0.0);
            let duration_ms = config.base_duration_ms
                + config.position_duration_ms.get(cell.position.as_str()).copied().unwrap_or(0.0)
                + config.duration_coupling_ms_per_st * depth;
            let token_id = format!(
                "{}/{}/{}/{}",
                cell.speaker.speaker_id, w.word_id, cell.position, cell.repetition
            );
            if !(duration_ms > 0.0) {
                return Err(SynthError::InvalidConfig(format!("{token_id}: duration {duration_ms} ms")));
            }
            let spec = ContourSpec {
                onset_st: config.onset_st,
                dip_depth_st: depth,
                dip_position: config.dip_position,
                offset_st: config.offset_st,
                second_peak_st: 0.0,
                noise_sd_st: config.point_noise_sd_st,
                seed: rng.next_u64(),
                duration_ms,
            };
            let mut contour = gen_contour(&spec)?;
            contour.token_id = token_id.clone();
            Ok(SynthToken {
                token_id,
                speaker_id: cell.speaker.speaker_id.clone(),
                gender: cell.speaker.gender,
                tonal_combination: tc,
                position: cell.position,
                repetition: cell.repetition,
                word_id: w.word_id.to_string(),
                dip_depth_st: depth,
                duration_ms,
                contour,
            })
        })
        .collect();
    let mut tokens = generated.into_iter().collect::<Result<Vec<_>, _>>()?;

    for speaker in &speakers {
        let mine = || tokens.iter().filter(|t| t.speaker_id == speaker.speaker_id);
        let (sum, n) = mine()
            .flat_map(|t| t.contour.points.iter())
            .fold((0.0, 0usize), |(s, n), p| (s + (p.s / 12.0).exp2(), n + 1));
        let shift = -12.0 * (sum / n as f64).log2();
        for t in tokens.iter_mut().filter(|t| t.speaker_id == speaker.speaker_id) {
            for p in t.contour.points.iter_mut() {
                p.s += shift;
            }
        }
    }

    Ok(SynthCorpus { config: config.clone(), speakers, tokens })
}

const TIER: &str = "syllable";
const LEAD_S: f64 = 0.1;
const GAP_S: f64 = 0.1;

impl SynthCorpus {
    fn speaker(&self, id: &str) -> &SynthSpeaker {
        self.speakers.iter().find(|s| s.speaker_id == id).expect("token speaker exists")
    }

    fn recording_stem(speaker_id: &str, repetition: u32) -> String {
        format!("{speaker_id}_r{repetition}")
    }

    /// Tokens grouped by recording (speaker, repetition), in generation order.
    fn recordings(&self) -> Vec<((String, u32), Vec<&SynthToken>)> {
        let mut out: Vec<((String, u32), Vec<&SynthToken>)> = Vec::new();
        for t in &self.tokens {
            let key = (t.speaker_id.clone(), t.repetition);
            match out.last_mut() {
                Some((k, v)) if *k == key => v.push(t),
                _ => out.push((key, vec![t])),
            }
        }
        out
    }

    fn interval_label(t: &SynthToken) -> String {
        format!("{}_{}", t.word_id, t.position)
    }

    /// Track and segmentation for one recording. Each token contributes its
    /// ten voiced points at the sampling times; gaps carry one unvoiced frame.
    fn render_recording(&self, tokens: &[&SynthToken], ref_hz: f64) -> (F0Track, IntervalTier, f64) {
        let mut samples = vec![F0Sample::unvoiced(0.0)];
        let mut intervals = Vec::new();
        let mut cursor = LEAD_S;
        intervals.push(Interval { xmin: 0.0, xmax: cursor, label: String::new() });
        for t in tokens {
            let (xmin, xmax) = (cursor, cursor + t.duration_ms / 1000.0);
            for (time, p) in ten_point_times(xmin, xmax).iter().zip(&t.contour.points) {
                samples.push(F0Sample::voiced(*time, ref_hz * (p.s / 12.0).exp2()));
            }
            samples.push(F0Sample::unvoiced(xmax + GAP_S / 2.0));
            intervals.push(Interval { xmin, xmax, label: Self::interval_label(t) });
            cursor = xmax + GAP_S;
            intervals.push(Interval { xmin: xmax, xmax: cursor, label: String::new() });
        }
        let track = F0Track::new("", samples).expect("synthetic samples are ordered");
        let tier = IntervalTier::new(TIER, intervals).expect("synthetic intervals are ordered");
        (track, tier, cursor)
    }

    pub fn manifest(&self) -> CorpusManifest {
        let mut speakers: Vec<ManifestSpeaker> = self
            .speakers
            .iter()
            .map(|s| ManifestSpeaker { speaker_id: s.speaker_id.clone(), gender: s.gender, entries: Vec::new() })
            .collect();
        for ((speaker_id, rep), tokens) in self.recordings() {
            let stem = Self::recording_stem(&speaker_id, rep);
            let entry = ManifestEntry {
                track_file: format!("tracks/{stem}.csv"),
                track_format: TrackFormat::Csv,
                textgrid_file: format!("textgrids/{stem}.TextGrid"),
                tier_name: TIER.to_string(),
                tokens: tokens
                    .iter()
                    .map(|t| ManifestToken {
                        interval_index: None,
                        interval_label: Some(Self::interval_label(t)),
                        word_id: t.word_id.clone(),
                        tonal_combination: t.tonal_combination.clone(),
                        position: t.position,
                        repetition: t.repetition,
                    })
                    .collect(),
            };
            speakers
                .iter_mut()
                .find(|s| s.speaker_id == speaker_id)
                .expect("speaker listed")
                .entries
                .push(entry);
        }
        CorpusManifest { speakers }
    }

    /// `token_id,dip_depth_st,duration_ms,tonal_combination,position,gender`.
    pub fn ground_truth_csv(&self) -> String {
        let mut out = String::from("token_id,dip_depth_st,duration_ms,tonal_combination,position,gender\n");
        for t in &self.tokens {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t.token_id, t.dip_depth_st, t.duration_ms, t.tonal_combination, t.position, t.gender
            ));
        }
        out
    }

    fn metadata_json(&self) -> String {
        let meta = serde_json::json!({
            "generator": GENERATOR,
            "seed_rule": SEED_RULE,
            "token_count": self.tokens.len(),
            "config": self.config,
            "speakers": self.speakers,
        });
        serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"
    }

    /// Every output file as (relative path, contents), in a fixed order.
    pub fn files(&self) -> Vec<(PathBuf, String)> {
        let mut files = vec![
            (PathBuf::from("manifest.json"), self.manifest().to_json() + "\n"),
            (PathBuf::from("ground_truth.csv"), self.ground_truth_csv()),
            (PathBuf::from("synth_metadata.json"), self.metadata_json()),
        ];
        for ((speaker_id, rep), tokens) in self.recordings() {
            let stem = Self::recording_stem(&speaker_id, rep);
            let (track, tier, end) = self.render_recording(&tokens, self.speaker(&speaker_id).ref_hz);
            files.push((PathBuf::from(format!("tracks/{stem}.csv")), serialize_f0_csv(&track)));
            files.push((
                PathBuf::from(format!("textgrids/{stem}.TextGrid")),
                serialize_textgrid(&[tier], 0.0, end),
            ));
        }
        files
    }

    pub fn write_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        for (rel, content) in self.files() {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tcatt::{analyze_token, TcattConfig, TurnClass};

    fn spec(onset: f64, depth: f64, pos: f64, offset: f64, peak: f64) -> ContourSpec {
        ContourSpec {
            onset_st: onset,
            dip_depth_st: depth,
            dip_position: pos,
            offset_st: offset,
            second_peak_st: peak,
            noise_sd_st: 0.0,
            seed: 7,
            duration_ms: 200.0,
        }
    }

    // Strict sign changes of successive differences.
    fn sign_changes(s: &[f64]) -> usize {
        let signs: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).map(f64::signum).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    fn class_of(spec: &ContourSpec) -> (TurnClass, usize) {
        let c = gen_contour(spec).unwrap();
        (analyze_token(&c, &TcattConfig::default()).unwrap().class, sign_changes(&c.semitones()))
    }

    #[test]
    fn straight_rise_is_monotone() {
        assert_eq!(class_of(&spec(0.0, 0.0, 0.5, 2.0, 0.0)), (TurnClass::Monotone, 0));
    }

    #[test]
    fn single_dip_is_one() {
        assert_eq!(class_of(&spec(1.0, 1.2, 0.44, 1.0, 0.0)), (TurnClass::One, 1));
    }

    #[test]
    fn dip_then_peak_is_two() {
        assert_eq!(class_of(&spec(1.0, 1.0, 0.25, 0.0, 1.5)), (TurnClass::TwoOrMore, 2));
    }

    #[test]
    fn noise_is_seeded() {
        let mut s = spec(0.0, 1.0, 0.4, 2.0, 0.0);
        s.noise_sd_st = 0.3;
        assert_eq!(gen_contour(&s).unwrap(), gen_contour(&s).unwrap());
        let mut other = s;
        other.seed = 8;
        assert_ne!(gen_contour(&s).unwrap(), gen_contour(&other).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_contour(&spec(0.0, 1.0, 0.0, 1.0, 0.0)).is_err());
        assert!(gen_contour(&spec(0.0, -1.0, 0.5, 1.0, 0.0)).is_err());
    }

    #[test]
    fn default_corpus_size_and_balance() {
        let c = gen_corpus(&SynthCorpusConfig::default()).unwrap();
        assert_eq!(c.tokens.len(), 480);
        assert_eq!(c.speakers.len(), 8);
        assert_eq!(c.manifest().token_count(), 480);
        let mut cells: BTreeMap<(String, Position, Gender), usize> = BTreeMap::new();
        for t in &c.tokens {
            *cells.entry((t.tonal_combination.to_string(), t.position, t.gender)).or_default() += 1;
        }
        assert_eq!(cells.len(), 30);
        assert!(cells.values().all(|&n| n == 16));
    }

    #[test]
    fn null_noiseless_tokens_are_identical() {
        let cfg = SynthCorpusConfig { noise_sd_st: 0.0, ..SynthCorpusConfig::null_effects() };
        let c = gen_corpus(&cfg).unwrap();
        let first = c.tokens[0].contour.semitones();
        assert!(c.tokens.iter().all(|t| t.contour.semitones() == first && t.duration_ms == 180.0));
    }

    #[test]
    fn unknown_effect_names_rejected() {
        let mut cfg = SynthCorpusConfig::default();
        cfg.effects.insert("tempo".into(), BTreeMap::new());
        assert_eq!(gen_corpus(&cfg), Err(SynthError::UnknownFactor("tempo".into())));
        let mut cfg = SynthCorpusConfig::default();
        cfg.effects.insert("position".into(), BTreeMap::from([("middle".into(), 1.0)]));
        assert!(matches!(gen_corpus(&cfg), Err(SynthError::UnknownLevel { .. })));
    }

    #[test]
    fn same_seed_same_files() {
        let a = gen_corpus(&SynthCorpusConfig::default()).unwrap().files();
        let b = gen_corpus(&SynthCorpusConfig::default()).unwrap().files();
        assert_eq!(a, b);
        let c = gen_corpus(&SynthCorpusConfig { seed: 1, ..Default::default() }).unwrap().files();
        assert_ne!(a, c);
    }

    #[test]
    fn per_speaker_mean_pitch_equals_reference() {
        let c = gen_corpus(&SynthCorpusConfig::default()).unwrap();
        for sp in &c.speakers {
            let hz: Vec<f64> = c
                .tokens
                .iter()
                .filter(|t| t.speaker_id == sp.speaker_id)
                .flat_map(|t| t.contour.points.iter().map(|p| sp.ref_hz * (p.s / 12.0).exp2()))
                .collect();
            let mean = hz.iter().sum::<f64>() / hz.len() as f64;
            assert!((mean / sp.ref_hz - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deeper_dip_never_lowers_obtuse_curvature() {
        let mut last = -1.0;
        for i in 0..50 {
            let c = gen_contour(&spec(0.0, 0.01 * i as f64, 0.5, 0.0, 0.0)).unwrap();
            let r = analyze_token(&c, &TcattConfig::default()).unwrap();
            if r.turns.first().is_some_and(|t| !t.obtuse) {
                break;
            }
            assert!(r.curvature_index >= last);
            last = r.curvature_index;
        }
        assert!(last > 0.0);
    }
}
