//! Ten-point semitone contours relative to each speaker's mean pitch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{F0Sample, TokenRecord};

pub const N_POINTS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("speaker {0}: no voiced samples to compute a reference pitch")]
    NoVoicedSamples(String),
    #[error("token {0}: no voiced samples in the token interval")]
    NoVoicedInToken(String),
    #[error("token {token}: voiced coverage {coverage:.3} below threshold {threshold}")]
    InsufficientCoverage { token: String, coverage: f64, threshold: f64 },
    #[error("token {0}: interval has zero or negative length")]
    EmptyInterval(String),
    #[error("semitone conversion needs positive frequencies (got {xi} Hz re {reference} Hz)")]
    NonPositive { xi: f64, reference: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    #[default]
    ArithmeticMean,
    GeometricMean,
}

impl ReferenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceMethod::ArithmeticMean => "arithmetic_mean",
            ReferenceMethod::GeometricMean => "geometric_mean",
        }
    }
}

impl std::str::FromStr for ReferenceMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arithmetic_mean" => Ok(Self::ArithmeticMean),
            "geometric_mean" => Ok(Self::GeometricMean),
            _ => Err(format!("unknown reference method {s:?}")),
        }
    }
}

/// A speaker's mean pitch, the zero of their semitone scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerReference {
    pub speaker_id: String,
    pub ref_hz: f64,
    pub n_samples: usize,
    pub method: ReferenceMethod,
}

/// Mean of the voiced f0 values of one speaker.
pub fn speaker_reference(
    speaker_id: &str,
    voiced_f0: impl IntoIterator<Item = f64>,
    method: ReferenceMethod,
) -> Result<SpeakerReference, NormalizeError> {
    let (mut n, mut acc) = (0usize, 0.0f64);
    for f0 in voiced_f0 {
        n += 1;
        acc += match method {
            ReferenceMethod::ArithmeticMean => f0,
            ReferenceMethod::GeometricMean => f0.ln(),
        };
    }
    if n == 0 {
        return Err(NormalizeError::NoVoicedSamples(speaker_id.to_string()));
    }
    let mean = acc / n as f64;
    let ref_hz = match method {
        ReferenceMethod::ArithmeticMean => mean,
        ReferenceMethod::GeometricMean => mean.exp(),
    };
    Ok(SpeakerReference { speaker_id: speaker_id.to_string(), ref_hz, n_samples: n, method })
}

/// Pool the voiced samples of every token slice per speaker.
pub fn speaker_references(
    tokens: &[TokenRecord],
    method: ReferenceMethod,
) -> BTreeMap<String, Result<SpeakerReference, NormalizeError>> {
    let mut pooled: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for t in tokens {
        pooled
            .entry(t.speaker_id.as_str())
            .or_default()
            .extend(t.track_slice.voiced_samples().map(|s| s.f0));
    }
    pooled
        .into_iter()
        .map(|(id, f0s)| (id.to_string(), speaker_reference(id, f0s, method)))
        .collect()
}

/// Semitones of `xi` relative to `reference`: `12 / log10(2) * log10(xi / reference)`.
pub fn hz_to_semitone(xi: f64, reference: f64) -> Result<f64, NormalizeError> {
    if !(xi > 0.0 && reference > 0.0) {
        return Err(NormalizeError::NonPositive { xi, reference });
    }
    Ok(12.0 / 2f64.log10() * (xi / reference).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    /// Normalized time in [0, 1].
    pub t: f64,
    /// Semitones re the speaker reference.
    pub s: f64,
}

/// Ten equidistant contour points on the fixed grid `t_i = i / 9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledContour {
    pub token_id: String,
    pub points: [ContourPoint; N_POINTS],
    pub duration_ms: f64,
}

impl SampledContour {
    pub fn from_semitones(token_id: impl Into<String>, s: [f64; N_POINTS], duration_ms: f64) -> Self {
        let grid = normalized_grid();
        let points = std::array::from_fn(|i| ContourPoint { t: grid[i], s: s[i] });
        Self { token_id: token_id.into(), points, duration_ms }
    }

    pub fn semitones(&self) -> [f64; N_POINTS] {
        self.points.map(|p| p.s)
    }
}

/// `t_i = i / 9` for `i = 0..10`.
pub fn normalized_grid() -> [f64; N_POINTS] {
    std::array::from_fn(|i| i as f64 / (N_POINTS - 1) as f64)
}

/// Absolute sampling times, endpoints inclusive. The last time is `xmax` exactly.
pub fn ten_point_times(xmin: f64, xmax: f64) -> [f64; N_POINTS] {
    let step = (xmax - xmin) / (N_POINTS - 1) as f64;
    std::array::from_fn(|i| if i == N_POINTS - 1 { xmax } else { xmin + i as f64 * step })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Minimum fraction of voiced samples inside the token interval.
    pub coverage_threshold: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { coverage_threshold: 0.5 }
    }
}

/// Linear interpolation in hertz between the voiced samples bracketing
/// `time`; clamps to the nearest voiced value outside the voiced span.
/// `voiced` must be non-empty and time-ordered.
fn interpolate_f0(voiced: &[&F0Sample], time: f64) -> f64 {
    let first = voiced[0];
    let last = voiced[voiced.len() - 1];
    if time <= first.time {
        return first.f0;
    }
    if time >= last.time {
        return last.f0;
    }
    let hi = voiced.partition_point(|s| s.time < time);
    let (a, b) = (voiced[hi - 1], voiced[hi]);
    if b.time == time {
        return b.f0;
    }
    a.f0 + (b.f0 - a.f0) * (time - a.time) / (b.time - a.time)
}

/// Sample a token at ten equidistant times and convert to semitones re `reference`.
pub fn sample_ten_points(
    token: &TokenRecord,
    reference: &SpeakerReference,
    config: &SamplingConfig,
) -> Result<SampledContour, NormalizeError> {
    let (xmin, xmax) = token.interval;
    if !(xmax > xmin) {
        return Err(NormalizeError::EmptyInterval(token.token_id.clone()));
    }
    let samples = token.track_slice.samples();
    let voiced: Vec<&F0Sample> = samples.iter().filter(|s| s.voiced).collect();
    if voiced.is_empty() {
        return Err(NormalizeError::NoVoicedInToken(token.token_id.clone()));
    }
    let coverage = voiced.len() as f64 / samples.len() as f64;
    if coverage < config.coverage_threshold {
        return Err(NormalizeError::InsufficientCoverage {
            token: token.token_id.clone(),
            coverage,
            threshold: config.coverage_threshold,
        });
    }

    let times = ten_point_times(xmin, xmax);
    let mut s = [0.0; N_POINTS];
    for (si, &tau) in s.iter_mut().zip(&times) {
        *si = hz_to_semitone(interpolate_f0(&voiced, tau), reference.ref_hz)?;
    }
    Ok(SampledContour::from_semitones(token.token_id.clone(), s, (xmax - xmin) * 1000.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{F0Track, Gender, Position};
    use proptest::prelude::*;

    fn token(samples: Vec<F0Sample>, interval: (f64, f64)) -> TokenRecord {
        TokenRecord {
            token_id: "S1/w/initial/1".into(),
            speaker_id: "S1".into(),
            gender: Gender::F,
            tonal_combination: "T1T2".parse().unwrap(),
            position: Position::Initial,
            repetition: 1,
            word_id: "w".into(),
            track_slice: F0Track::new("t", samples).unwrap(),
            interval,
        }
    }

    fn reference(hz: f64) -> SpeakerReference {
        SpeakerReference {
            speaker_id: "S1".into(),
            ref_hz: hz,
            n_samples: 1,
            method: ReferenceMethod::ArithmeticMean,
        }
    }

    #[test]
    fn singleton_reference() {
        let r = speaker_reference("S", [200.0], ReferenceMethod::ArithmeticMean).unwrap();
        assert_eq!(r.ref_hz, 200.0);
        assert_eq!(r.n_samples, 1);
    }

    #[test]
    fn arithmetic_and_geometric_reference() {
        let a = speaker_reference("S", [100.0, 300.0], ReferenceMethod::ArithmeticMean).unwrap();
        let g = speaker_reference("S", [100.0, 300.0], ReferenceMethod::GeometricMean).unwrap();
        assert!((a.ref_hz - 200.0).abs() < 1e-12);
        // sqrt(100 * 300)
        assert!((g.ref_hz - 173.205_080_756_887_7).abs() < 1e-9);
    }

    #[test]
    fn reference_needs_voicing() {
        assert!(matches!(
            speaker_reference("S", [], ReferenceMethod::ArithmeticMean),
            Err(NormalizeError::NoVoicedSamples(_))
        ));
    }

    #[test]
    fn pooled_reference_skips_unvoiced() {
        let t = token(
            vec![F0Sample::unvoiced(0.0), F0Sample::voiced(0.1, 100.0), F0Sample::voiced(0.2, 300.0)],
            (0.0, 0.2),
        );
        let refs = speaker_references(&[t], ReferenceMethod::ArithmeticMean);
        let r = refs["S1"].as_ref().unwrap();
        assert_eq!((r.ref_hz, r.n_samples), (200.0, 2));
    }

    #[test]
    fn semitone_fixed_values() {
        assert_eq!(hz_to_semitone(220.0, 220.0).unwrap(), 0.0);
        assert!((hz_to_semitone(440.0, 220.0).unwrap() - 12.0).abs() < 1e-9);
        // 12 * log2(261.63 / 220)
        let oracle = 12.0 * (261.63f64 / 220.0).ln() / 2f64.ln();
        let st = hz_to_semitone(261.63, 220.0).unwrap();
        assert!((st - oracle).abs() < 1e-12);
        assert!((st - 3.0001).abs() < 1e-3);
        assert!(hz_to_semitone(0.0, 220.0).is_err());
        assert!(hz_to_semitone(220.0, -1.0).is_err());
    }

    #[test]
    fn time_grid_is_endpoint_inclusive() {
        let t = ten_point_times(0.25, 0.43);
        assert_eq!(t[0], 0.25);
        assert_eq!(t[9], 0.43);
        assert_eq!(normalized_grid()[9], 1.0);
        assert!((normalized_grid()[3] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_contour() {
        let samples = (0..=18).map(|i| F0Sample::voiced(i as f64 * 0.01, 220.0)).collect();
        let c = sample_ten_points(&token(samples, (0.0, 0.18)), &reference(220.0), &SamplingConfig::default())
            .unwrap();
        assert!(c.semitones().iter().all(|&s| s == 0.0));
        assert!((c.duration_ms - 180.0).abs() < 1e-9);
    }

    #[test]
    fn two_sample_hz_interpolation() {
        let t = token(vec![F0Sample::voiced(0.0, 200.0), F0Sample::voiced(0.09, 400.0)], (0.0, 0.09));
        let c = sample_ten_points(&t, &reference(200.0), &SamplingConfig::default()).unwrap();
        let s = c.semitones();
        assert!(s[0].abs() < 1e-12);
        assert!((s[9] - 12.0).abs() < 1e-9);
        // interior: f0 = 200 + 200 * i/9 Hz, then converted to semitones
        for (i, si) in s.iter().enumerate() {
            let hz = 200.0 + 200.0 * i as f64 / 9.0;
            let oracle = 12.0 * (hz / 200.0).log2();
            assert!((si - oracle).abs() < 1e-9, "point {i}: {si} vs {oracle}");
        }
    }

    #[test]
    fn unvoiced_gap_is_bridged_and_edges_clamp() {
        let samples = vec![
            F0Sample::unvoiced(0.0),
            F0Sample::voiced(0.02, 100.0),
            F0Sample::voiced(0.04, 100.0),
            F0Sample::unvoiced(0.05),
            F0Sample::voiced(0.06, 200.0),
            F0Sample::voiced(0.07, 200.0),
            F0Sample::voiced(0.09, 200.0),
        ];
        let c = sample_ten_points(&token(samples, (0.0, 0.09)), &reference(100.0), &SamplingConfig::default())
            .unwrap();
        let s = c.semitones();
        assert_eq!(s[0], 0.0); // clamped to first voiced value
        // tau_5 = 0.05 lies between voiced 0.04 (100 Hz) and 0.06 (200 Hz)
        assert!((s[5] - 12.0 * 150f64.log2() + 12.0 * 100f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn insufficient_coverage() {
        let mut samples: Vec<F0Sample> = (0..7).map(|i| F0Sample::unvoiced(i as f64 * 0.01)).collect();
        samples.extend((7..10).map(|i| F0Sample::voiced(i as f64 * 0.01, 150.0)));
        let err = sample_ten_points(&token(samples, (0.0, 0.09)), &reference(150.0), &SamplingConfig::default())
            .unwrap_err();
        assert!(matches!(err, NormalizeError::InsufficientCoverage { coverage, .. } if (coverage - 0.3).abs() < 1e-12));
    }

    #[test]
    fn no_voiced_samples() {
        let samples = (0..5).map(|i| F0Sample::unvoiced(i as f64 * 0.01)).collect();
        let err = sample_ten_points(&token(samples, (0.0, 0.04)), &reference(150.0), &SamplingConfig::default())
            .unwrap_err();
        assert!(matches!(err, NormalizeError::NoVoicedInToken(_)));
    }

    fn arb_track() -> impl Strategy<Value = Vec<F0Sample>> {
        prop::collection::vec(60.0f64..500.0, 2..40).prop_map(|f0s| {
            f0s.into_iter().enumerate().map(|(i, f)| F0Sample::voiced(i as f64 * 0.005, f)).collect()
        })
    }

    proptest! {
        #[test]
        fn scaling_hz_leaves_semitones_unchanged(samples in arb_track(), k in 0.25f64..4.0, r in 80.0f64..300.0) {
            let end = samples.last().unwrap().time;
            let scaled: Vec<F0Sample> = samples.iter().map(|s| F0Sample::voiced(s.time, s.f0 * k)).collect();
            let cfg = SamplingConfig::default();
            let a = sample_ten_points(&token(samples, (0.0, end)), &reference(r), &cfg).unwrap();
            let b = sample_ten_points(&token(scaled, (0.0, end)), &reference(r * k), &cfg).unwrap();
            for (x, y) in a.semitones().iter().zip(b.semitones()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn semitones_are_monotone_in_hz(a in 1.0f64..1000.0, b in 1.0f64..1000.0, r in 50.0f64..400.0) {
            prop_assume!(a != b);
            let (sa, sb) = (hz_to_semitone(a, r).unwrap(), hz_to_semitone(b, r).unwrap());
            prop_assert_eq!(a < b, sa < sb);
        }

        #[test]
        fn always_ten_points_on_fixed_grid(samples in arb_track()) {
            let end = samples.last().unwrap().time;
            let c = sample_ten_points(&token(samples, (0.0, end)), &reference(150.0), &SamplingConfig::default()).unwrap();
            for (i, p) in c.points.iter().enumerate() {
                prop_assert_eq!(p.t, i as f64 / 9.0);
            }
            prop_assert!(c.duration_ms > 0.0);
        }
    }
}
