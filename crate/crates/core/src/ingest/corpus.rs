//! Corpus manifest model and token loading.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::praat::{parse_pitchtier, parse_textgrid, IntervalTier};
use super::track::{parse_f0_csv, F0Track};
use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F" => Ok(Gender::F),
            "M" => Ok(Gender::M),
            _ => Err(format!("unknown gender {s:?} (expected F or M)")),
        }
    }
}

/// Location of the target word in its carrier sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Initial,
    Medial,
    Final,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Initial, Position::Medial, Position::Final];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Initial => "initial",
            Position::Medial => "medial",
            Position::Final => "final",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Position::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown position {s:?} (expected initial, medial or final)"))
    }
}

/// Tone of the preceding syllable followed by the target tone, `T<n>T2`
/// with `n` in 1..=5.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TonalCombination(String);

impl TonalCombination {
    pub fn new(preceding_tone: u8) -> Result<Self, String> {
        format!("T{preceding_tone}T2").parse()
    }

    pub fn all() -> Vec<TonalCombination> {
        (1..=5).map(|n| TonalCombination(format!("T{n}T2"))).collect()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for TonalCombination {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        let ok = b.len() == 4 && b[0] == b'T' && (b'1'..=b'5').contains(&b[1]) && &b[2..] == b"T2";
        if ok {
            Ok(TonalCombination(s.to_string()))
        } else {
            Err(format!("tonal combination {s:?} must look like T<1-5>T2"))
        }
    }
}

impl TryFrom<String> for TonalCombination {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TonalCombination> for String {
    fn from(t: TonalCombination) -> String {
        t.0
    }
}

impl fmt::Display for TonalCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A disyllabic target word whose second syllable carries the target tone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetWord {
    pub word_id: &'static str,
    pub preceding_tone: u8,
    pub hanzi: &'static str,
    pub gloss: &'static str,
}

/// The ten-word elicitation list: two words per preceding tone T1..T5.
pub const TARGET_WORDS: [TargetWord; 10] = [
    TargetWord { word_id: "khui_mng", preceding_tone: 1, hanzi: "开门", gloss: "open the door" },
    TargetWord { word_id: "tsiong_hua", preceding_tone: 1, hanzi: "中华", gloss: "China" },
    TargetWord { word_id: "me_ni", preceding_tone: 2, hanzi: "明年", gloss: "the next year" },
    TargetWord { word_id: "phu_thau", preceding_tone: 2, hanzi: "葡萄", gloss: "the grape" },
    TargetWord { word_id: "gu_gieng", preceding_tone: 3, hanzi: "语言", gloss: "the language" },
    TargetWord { word_id: "tsui_ni", preceding_tone: 3, hanzi: "水泥", gloss: "the cement" },
    TargetWord { word_id: "tshau_than", preceding_tone: 4, hanzi: "臭虫", gloss: "the bug" },
    TargetWord { word_id: "tshai_thau", preceding_tone: 4, hanzi: "菜头", gloss: "the vegetable" },
    TargetWord { word_id: "bun_tue", preceding_tone: 5, hanzi: "问题", gloss: "the problem" },
    TargetWord { word_id: "tua_mng", preceding_tone: 5, hanzi: "大门", gloss: "the gate" },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackFormat {
    Csv,
    Pitchtier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestToken {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_label: Option<String>,
    pub word_id: String,
    pub tonal_combination: TonalCombination,
    pub position: Position,
    pub repetition: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub track_file: String,
    pub track_format: TrackFormat,
    pub textgrid_file: String,
    pub tier_name: String,
    pub tokens: Vec<ManifestToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSpeaker {
    pub speaker_id: String,
    pub gender: Gender,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub speakers: Vec<ManifestSpeaker>,
}

impl CorpusManifest {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let m: CorpusManifest =
            serde_json::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn token_count(&self) -> usize {
        self.speakers.iter().flat_map(|s| &s.entries).map(|e| e.tokens.len()).sum()
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        for sp in &self.speakers {
            if sp.speaker_id.is_empty() {
                return Err(IngestError::Manifest("empty speaker_id".into()));
            }
            for e in &sp.entries {
                if e.track_file.is_empty() || e.textgrid_file.is_empty() {
                    return Err(IngestError::Manifest(format!(
                        "speaker {}: empty file path",
                        sp.speaker_id
                    )));
                }
                for t in &e.tokens {
                    if t.interval_index.is_some() == t.interval_label.is_some() {
                        return Err(IngestError::Manifest(format!(
                            "{}: give exactly one of interval_index or interval_label",
                            token_id(&sp.speaker_id, t)
                        )));
                    }
                    if t.repetition == 0 {
                        return Err(IngestError::Manifest(format!(
                            "{}: repetition must be positive",
                            token_id(&sp.speaker_id, t)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn token_id(speaker_id: &str, t: &ManifestToken) -> String {
    format!("{}/{}/{}/{}", speaker_id, t.word_id, t.position, t.repetition)
}

/// One target-syllable token with its F0 slice and design metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub token_id: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub tonal_combination: TonalCombination,
    pub position: Position,
    pub repetition: u32,
    pub word_id: String,
    pub track_slice: F0Track,
    pub interval: (f64, f64),
}

/// A manifest token that could not be turned into a [`TokenRecord`].
#[derive(Debug)]
pub struct LoadFailure {
    pub token_id: String,
    pub error: IngestError,
}

/// Load every manifest token, failing on the first problem.
pub fn load_corpus<L>(manifest: &CorpusManifest, loader: L) -> Result<Vec<TokenRecord>, IngestError>
where
    L: Fn(&Path) -> std::io::Result<String> + Sync,
{
    let (tokens, mut failures) = load_corpus_lenient(manifest, loader)?;
    if failures.is_empty() {
        Ok(tokens)
    } else {
        Err(failures.swap_remove(0).error)
    }
}

/// Load every manifest token, collecting per-token failures instead of
/// aborting. A file that fails to load or parse fails every token of its
/// entry. Manifest-level defects (duplicate ids, invalid fields) still abort.
///
/// Output order: speakers sorted by `speaker_id`, then manifest order.
pub fn load_corpus_lenient<L>(
    manifest: &CorpusManifest,
    loader: L,
) -> Result<(Vec<TokenRecord>, Vec<LoadFailure>), IngestError>
where
    L: Fn(&Path) -> std::io::Result<String> + Sync,
{
    manifest.validate()?;

    let mut speakers: Vec<&ManifestSpeaker> = manifest.speakers.iter().collect();
    speakers.sort_by(|a, b| a.speaker_id.cmp(&b.speaker_id));

    let mut seen = HashSet::new();
    for sp in &speakers {
        for t in sp.entries.iter().flat_map(|e| &e.tokens) {
            let id = token_id(&sp.speaker_id, t);
            if !seen.insert(id.clone()) {
                return Err(IngestError::DuplicateToken(id));
            }
        }
    }

    let jobs: Vec<(&ManifestSpeaker, &ManifestEntry)> =
        speakers.iter().flat_map(|sp| sp.entries.iter().map(move |e| (*sp, e))).collect();

    let per_entry: Vec<Vec<Result<TokenRecord, LoadFailure>>> = jobs
        .par_iter()
        .map(|(sp, entry)| load_entry(sp, entry, &loader))
        .collect();

    let mut tokens = Vec::new();
    let mut failures = Vec::new();
    for r in per_entry.into_iter().flatten() {
        match r {
            Ok(t) => tokens.push(t),
            Err(f) => failures.push(f),
        }
    }
    Ok((tokens, failures))
}

fn load_file<L>(loader: &L, path: &str) -> Result<String, IngestError>
where
    L: Fn(&Path) -> std::io::Result<String>,
{
    let path = PathBuf::from(path);
    loader(&path).map_err(|source| IngestError::FileLoad { path, source })
}

fn in_file(path: &str) -> impl FnOnce(IngestError) -> IngestError + '_ {
    move |e| IngestError::InFile { path: PathBuf::from(path), source: Box::new(e) }
}

fn load_entry<L>(
    sp: &ManifestSpeaker,
    entry: &ManifestEntry,
    loader: &L,
) -> Vec<Result<TokenRecord, LoadFailure>>
where
    L: Fn(&Path) -> std::io::Result<String>,
{
    let parsed = (|| {
        let track_text = load_file(loader, &entry.track_file)?;
        let mut track = match entry.track_format {
            TrackFormat::Csv => parse_f0_csv(&track_text),
            TrackFormat::Pitchtier => parse_pitchtier(&track_text),
        }
        .map_err(in_file(&entry.track_file))?;
        track.source_id = entry.track_file.clone();

        let tg_text = load_file(loader, &entry.textgrid_file)?;
        let tier = parse_textgrid(&tg_text)
            .map_err(in_file(&entry.textgrid_file))?
            .into_iter()
            .find(|t| t.name == entry.tier_name)
            .ok_or_else(|| {
                in_file(&entry.textgrid_file)(IngestError::Manifest(format!(
                    "no interval tier named {:?}",
                    entry.tier_name
                )))
            })?;
        Ok::<_, IngestError>((track, tier))
    })();

    let (track, tier) = match parsed {
        Ok(v) => v,
        Err(e) => {
            // every token of this entry shares the file failure
            let msg = e.to_string();
            return entry
                .tokens
                .iter()
                .map(|t| {
                    Err(LoadFailure {
                        token_id: token_id(&sp.speaker_id, t),
                        error: IngestError::Manifest(msg.clone()),
                    })
                })
                .collect();
        }
    };

    entry
        .tokens
        .iter()
        .map(|t| {
            let id = token_id(&sp.speaker_id, t);
            build_token(sp, t, &id, &track, &tier).map_err(|error| LoadFailure { token_id: id, error })
        })
        .collect()
}

fn resolve_interval(tier: &IntervalTier, t: &ManifestToken, id: &str) -> Result<(f64, f64), IngestError> {
    let unresolved = |reason: String| IngestError::UnresolvedInterval { token: id.to_string(), reason };
    let iv = match (&t.interval_index, &t.interval_label) {
        (Some(i), _) => tier.intervals.get(*i).ok_or_else(|| {
            unresolved(format!("index {i} out of range ({} intervals)", tier.intervals.len()))
        })?,
        (None, Some(label)) => {
            let mut hits = tier.intervals.iter().filter(|iv| !iv.label.is_empty() && iv.label == *label);
            match (hits.next(), hits.next()) {
                (Some(iv), None) => iv,
                (None, _) => return Err(unresolved(format!("no interval labelled {label:?}"))),
                (Some(_), Some(_)) => {
                    return Err(unresolved(format!("label {label:?} matches several intervals")))
                }
            }
        }
        (None, None) => unreachable!("validated manifest"),
    };
    Ok((iv.xmin, iv.xmax))
}

fn build_token(
    sp: &ManifestSpeaker,
    t: &ManifestToken,
    id: &str,
    track: &F0Track,
    tier: &IntervalTier,
) -> Result<TokenRecord, IngestError> {
    let (xmin, xmax) = resolve_interval(tier, t, id)?;
    let within = track.time_span().is_some_and(|(a, b)| a <= xmin && xmax <= b);
    if !within {
        return Err(IngestError::OutsideTrack { token: id.to_string(), xmin, xmax });
    }
    Ok(TokenRecord {
        token_id: id.to_string(),
        speaker_id: sp.speaker_id.clone(),
        gender: sp.gender,
        tonal_combination: t.tonal_combination.clone(),
        position: t.position,
        repetition: t.repetition,
        word_id: t.word_id.clone(),
        track_slice: track.slice(xmin, xmax),
        interval: (xmin, xmax),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn tg(labels: &[(&str, f64, f64)]) -> String {
        let tier = IntervalTier::new(
            "syllable",
            labels
                .iter()
                .map(|(l, a, b)| super::super::Interval { xmin: *a, xmax: *b, label: l.to_string() })
                .collect(),
        )
        .unwrap();
        super::super::serialize_textgrid(&[tier], 0.0, 1.0)
    }

    fn track_csv() -> String {
        let mut s = String::from("time_s,f0_hz\n");
        for i in 0..=100 {
            let t = i as f64 * 0.01;
            s.push_str(&format!("{t},{}\n", 200.0 + i as f64));
        }
        s
    }

    fn token(label: Option<&str>, index: Option<usize>) -> ManifestToken {
        ManifestToken {
            interval_index: index,
            interval_label: label.map(String::from),
            word_id: "khui_mng".into(),
            tonal_combination: "T1T2".parse().unwrap(),
            position: Position::Medial,
            repetition: 1,
        }
    }

    fn manifest(tokens: Vec<ManifestToken>) -> CorpusManifest {
        CorpusManifest {
            speakers: vec![ManifestSpeaker {
                speaker_id: "S1".into(),
                gender: Gender::F,
                entries: vec![ManifestEntry {
                    track_file: "a.csv".into(),
                    track_format: TrackFormat::Csv,
                    textgrid_file: "a.TextGrid".into(),
                    tier_name: "syllable".into(),
                    tokens,
                }],
            }],
        }
    }

    fn files(grid: String) -> HashMap<PathBuf, String> {
        HashMap::from([(PathBuf::from("a.csv"), track_csv()), (PathBuf::from("a.TextGrid"), grid)])
    }

    fn loader(files: &HashMap<PathBuf, String>) -> impl Fn(&Path) -> std::io::Result<String> + Sync + '_ {
        move |p| files.get(p).cloned().ok_or_else(|| std::io::Error::from(std::io::ErrorKind::NotFound))
    }

    #[test]
    fn single_token() {
        let fs = files(tg(&[("", 0.0, 0.2), ("mng", 0.2, 0.4), ("", 0.4, 1.0)]));
        let out = load_corpus(&manifest(vec![token(Some("mng"), None)]), loader(&fs)).unwrap();
        assert_eq!(out.len(), 1);
        let r = &out[0];
        assert_eq!(r.token_id, "S1/khui_mng/medial/1");
        assert_eq!(r.interval, (0.2, 0.4));
        // samples at 0.20..=0.40 inclusive, allowing for decimal rounding of i*0.01
        assert!((20..=21).contains(&r.track_slice.len()), "{}", r.track_slice.len());
        assert!(r.track_slice.samples().iter().all(|s| s.time >= 0.2 && s.time <= 0.4));
    }

    #[test]
    fn index_resolution_is_zero_based() {
        let fs = files(tg(&[("", 0.0, 0.2), ("mng", 0.2, 0.4), ("", 0.4, 1.0)]));
        let out = load_corpus(&manifest(vec![token(None, Some(1))]), loader(&fs)).unwrap();
        assert_eq!(out[0].interval, (0.2, 0.4));
    }

    #[test]
    fn ambiguous_label_is_unresolved() {
        let fs = files(tg(&[("mng", 0.0, 0.2), ("", 0.2, 0.4), ("mng", 0.4, 1.0)]));
        let err = load_corpus(&manifest(vec![token(Some("mng"), None)]), loader(&fs)).unwrap_err();
        assert!(matches!(err, IngestError::UnresolvedInterval { .. }), "{err}");
    }

    #[test]
    fn duplicate_token_rejected() {
        let fs = files(tg(&[("a", 0.0, 0.2), ("b", 0.2, 0.4)]));
        let m = manifest(vec![token(Some("a"), None), token(Some("b"), None)]);
        assert!(matches!(load_corpus(&m, loader(&fs)), Err(IngestError::DuplicateToken(_))));
    }

    #[test]
    fn missing_file_names_path() {
        let fs: HashMap<PathBuf, String> = HashMap::new();
        let err = load_corpus(&manifest(vec![token(Some("a"), None)]), loader(&fs)).unwrap_err();
        assert!(err.to_string().contains("a.csv"), "{err}");
    }

    #[test]
    fn both_or_neither_interval_reference_rejected() {
        let fs = files(tg(&[("a", 0.0, 0.2)]));
        let m = manifest(vec![token(Some("a"), Some(0))]);
        assert!(matches!(load_corpus(&m, loader(&fs)), Err(IngestError::Manifest(_))));
        let m = manifest(vec![token(None, None)]);
        assert!(matches!(load_corpus(&m, loader(&fs)), Err(IngestError::Manifest(_))));
    }

    #[test]
    fn lenient_collects_failures() {
        let fs = files(tg(&[("a", 0.0, 0.2), ("b", 0.2, 0.4)]));
        let mut bad = token(Some("zzz"), None);
        bad.repetition = 2;
        let m = manifest(vec![token(Some("a"), None), bad]);
        let (ok, failed) = load_corpus_lenient(&m, loader(&fs)).unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].token_id, "S1/khui_mng/medial/2");
    }

    #[test]
    fn manifest_json_round_trip() {
        let m = manifest(vec![token(Some("a"), None)]);
        assert_eq!(CorpusManifest::from_json(&m.to_json()).unwrap(), m);
        assert!(CorpusManifest::from_json(r#"{"speakers":[{"speaker_id":"S","gender":"X","entries":[]}]}"#).is_err());
    }

    #[test]
    fn tonal_combination_vocabulary() {
        assert!("T3T2".parse::<TonalCombination>().is_ok());
        assert!("T6T2".parse::<TonalCombination>().is_err());
        assert!("T1T3".parse::<TonalCombination>().is_err());
        for w in TARGET_WORDS {
            assert!(TonalCombination::new(w.preceding_tone).is_ok());
        }
    }
}
