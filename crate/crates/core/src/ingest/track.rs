use serde::{Deserialize, Serialize};

use super::IngestError;

/// One pitch frame. Unvoiced frames carry `f0 == 0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Sample {
    pub time: f64,
    pub f0: f64,
    pub voiced: bool,
}

impl F0Sample {
    pub fn voiced(time: f64, f0: f64) -> Self {
        Self { time, f0, voiced: true }
    }

    pub fn unvoiced(time: f64) -> Self {
        Self { time, f0: 0.0, voiced: false }
    }
}

/// Time-ordered F0 samples from one source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Track {
    pub source_id: String,
    samples: Vec<F0Sample>,
}

impl F0Track {
    /// Build a track, checking strictly increasing times and voicing consistency.
    pub fn new(source_id: impl Into<String>, samples: Vec<F0Sample>) -> Result<Self, IngestError> {
        for (i, s) in samples.iter().enumerate() {
            if !s.time.is_finite() {
                return Err(IngestError::InvalidTrack(format!("sample {i}: non-finite time")));
            }
            if s.voiced && !(s.f0 > 0.0 && s.f0.is_finite()) {
                return Err(IngestError::InvalidTrack(format!(
                    "sample {i}: voiced sample needs f0 > 0"
                )));
            }
            if !s.voiced && s.f0 != 0.0 {
                return Err(IngestError::InvalidTrack(format!(
                    "sample {i}: unvoiced sample must carry f0 = 0"
                )));
            }
            if i > 0 && s.time <= samples[i - 1].time {
                return Err(IngestError::InvalidTrack(format!(
                    "sample {i}: time is not strictly increasing"
                )));
            }
        }
        Ok(Self { source_id: source_id.into(), samples })
    }

    pub fn samples(&self) -> &[F0Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn voiced_samples(&self) -> impl Iterator<Item = &F0Sample> {
        self.samples.iter().filter(|s| s.voiced)
    }

    /// First and last sample times.
    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.time, self.samples.last()?.time))
    }

    /// Samples with `xmin <= time <= xmax`, copied verbatim.
    pub fn slice(&self, xmin: f64, xmax: f64) -> F0Track {
        let lo = self.samples.partition_point(|s| s.time < xmin);
        let hi = self.samples.partition_point(|s| s.time <= xmax);
        F0Track {
            source_id: self.source_id.clone(),
            samples: self.samples[lo..hi.max(lo)].to_vec(),
        }
    }
}

/// Parse a `time_s,f0_hz` CSV track. Empty, `NaN` or `0` f0 fields are unvoiced.
pub fn parse_f0_csv(content: &str) -> Result<F0Track, IngestError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines.next().ok_or(IngestError::Empty)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["time_s", "f0_hz"] {
        return Err(IngestError::Header(format!(
            "expected `time_s,f0_hz`, found `{}`",
            header.trim()
        )));
    }

    let mut samples: Vec<F0Sample> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let time: f64 = fields[0].parse().map_err(|_| IngestError::MalformedRow {
            line,
            reason: format!("time `{}` is not a number", fields[0]),
        })?;
        if !time.is_finite() {
            return Err(IngestError::MalformedRow { line, reason: "time is not finite".into() });
        }
        let f0 = match fields[1] {
            "" => f64::NAN,
            v => v.parse::<f64>().map_err(|_| IngestError::MalformedRow {
                line,
                reason: format!("f0 `{v}` is not a number"),
            })?,
        };
        if f0 < 0.0 || f0.is_infinite() {
            return Err(IngestError::MalformedRow { line, reason: format!("invalid f0 {f0}") });
        }
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(IngestError::NonMonotoneTime { line });
            }
        }
        samples.push(if f0.is_nan() || f0 == 0.0 {
            F0Sample::unvoiced(time)
        } else {
            F0Sample::voiced(time, f0)
        });
    }
    if samples.is_empty() {
        return Err(IngestError::Empty);
    }
    F0Track::new("", samples)
}

/// Write a track in the CSV schema read by [`parse_f0_csv`]. Values use the
/// shortest representation that reparses to the same `f64`.
pub fn serialize_f0_csv(track: &F0Track) -> String {
    let mut out = String::from("time_s,f0_hz\n");
    for s in track.samples() {
        out.push_str(&format!("{},{}\n", s.time, s.f0));
    }
    out
}
