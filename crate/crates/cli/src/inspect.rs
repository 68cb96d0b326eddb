use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tcatt_core::ingest::{parse_f0_csv, parse_pitchtier, read_text_file, F0Track, Gender, Position, TokenRecord, TonalCombination};
use tcatt_core::normalize::{sample_ten_points, speaker_reference, ReferenceMethod, SpeakerReference};
use tcatt_core::tcatt::{analyze_token, classify, landmarks};

use crate::config::RunConfig;

pub fn read_track(path: &Path) -> Result<F0Track> {
    let text = read_text_file(path).with_context(|| format!("reading {}", path.display()))?;
    let track = if text.trim_start_matches('\u{feff}').trim_start().starts_with("File type") {
        parse_pitchtier(&text)
    } else {
        parse_f0_csv(&text)
    };
    track.with_context(|| format!("parsing {}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"))
}

/// Human-readable TCATT report for one track. The interval defaults to the
/// track's time span; the reference defaults to the mean voiced f0 of the file.
pub fn cmd_inspect(path: &Path, interval: Option<(f64, f64)>, ref_hz: Option<f64>, cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let track = read_track(path)?;
    let (xmin, xmax) = match interval {
        Some(iv) => iv,
        None => track.time_span().context("track has no samples")?,
    };
    if !(xmax > xmin) {
        bail!("interval [{xmin}, {xmax}] is empty");
    }
    let reference = match ref_hz {
        Some(hz) if hz > 0.0 => SpeakerReference {
            speaker_id: "inspect".into(),
            ref_hz: hz,
            n_samples: 0,
            method: cfg.reference_method,
        },
        Some(hz) => bail!("ref-hz must be positive, got {hz}"),
        None => speaker_reference("inspect", track.voiced_samples().map(|s| s.f0), cfg.reference_method)?,
    };
    let token = TokenRecord {
        token_id: path.display().to_string(),
        speaker_id: "inspect".into(),
        gender: Gender::F,
        tonal_combination: TonalCombination::new(2).expect("valid tone"),
        position: Position::Medial,
        repetition: 1,
        word_id: String::new(),
        track_slice: track.slice(xmin, xmax),
        interval: (xmin, xmax),
    };
    let contour = sample_ten_points(&token, &reference, &cfg.sampling())?;
    let tc = cfg.tcatt();
    let marks = landmarks(&contour);
    let class = classify(&contour, tc.eps_slope);
    let result = analyze_token(&contour, &tc)?;

    let mut o = String::new();
    writeln!(o, "file: {}", path.display())?;
    writeln!(o, "interval: {xmin} .. {xmax} s ({:.3} ms)", contour.duration_ms)?;
    let how = match (ref_hz, reference.method) {
        (Some(_), _) => "given".to_string(),
        (None, ReferenceMethod::ArithmeticMean) => format!("arithmetic mean of {} voiced samples", reference.n_samples),
        (None, ReferenceMethod::GeometricMean) => format!("geometric mean of {} voiced samples", reference.n_samples),
    };
    writeln!(o, "reference: {:.4} Hz ({how})", reference.ref_hz)?;
    writeln!(o, "points:")?;
    for (i, p) in contour.points.iter().enumerate() {
        writeln!(o, "  {:>2}  t = {:.4}  s = {:.5} st", i + 1, p.t, p.s)?;
    }
    writeln!(o, "landmarks:")?;
    writeln!(o, "  start   t = {:.4}  s = {:.5}", marks.start.t, marks.start.s)?;
    writeln!(o, "  end     t = {:.4}  s = {:.5}", marks.end.t, marks.end.s)?;
    writeln!(o, "  lowest  point {:>2}  s = {:.5}", marks.lowest.index + 1, marks.lowest.point.s)?;
    writeln!(o, "  highest point {:>2}  s = {:.5}", marks.highest.index + 1, marks.highest.point.s)?;
    writeln!(
        o,
        "slopes: k = {:.5}  k_min = {}  k_max = {}",
        class.slopes.k,
        opt(class.slopes.k_min),
        opt(class.slopes.k_max)
    )?;
    writeln!(
        o,
        "class: {} (dip deviates: {}, peak deviates: {})",
        result.class.as_str(),
        class.dip_deviates,
        class.peak_deviates
    )?;
    for (k, t) in result.turns.iter().enumerate() {
        writeln!(
            o,
            "turn {}: point {}  cos = {:.5}  angle = {:.5} rad ({:.3} deg)  sine = {:.5}  {}  paper_sine = {:.5}",
            k + 1,
            t.index + 1,
            t.cos_angle,
            t.angle_rad,
            t.angle_rad.to_degrees(),
            t.sine,
            if t.obtuse { "obtuse" } else { "not obtuse" },
            t.paper_sine
        )?;
    }
    writeln!(o, "curvature_index: {:.5}", result.curvature_index)?;
    Ok(o)
}
