//! Turning-point classification and tonal-triangle curvature.
//!
//! Step one compares the slope of the start→end chord with the slopes from the
//! start point to the lowest and highest points to decide whether the contour
//! turns once or twice. Step two builds a triangle from the start point, the
//! turning point(s) and the end point, and reports the sine of the angle at
//! each turning point as the curvature.
//!
//! Geometry is computed in (normalized time, semitones × `semitone_scale`)
//! with unit aspect ratio. Curvature values depend on that convention.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{ContourPoint, SampledContour, N_POINTS};

/// Side lengths below this are treated as coincident vertices.
pub const MIN_SIDE: f64 = 1e-12;

/// Relative cross product below which a triangle counts as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcattError {
    #[error("token {token}: degenerate triangle at point {index} (side length {side:e})")]
    DegenerateTriangle { token: String, index: usize, side: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcattConfig {
    /// Tolerance on the slope comparisons, semitones per unit normalized time.
    pub eps_slope: f64,
    /// Multiplier applied to the semitone axis before measuring distances.
    pub semitone_scale: f64,
}

impl Default for TcattConfig {
    fn default() -> Self {
        Self { eps_slope: 1e-6, semitone_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub index: usize,
    pub point: ContourPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourLandmarks {
    pub start: ContourPoint,
    pub end: ContourPoint,
    pub lowest: Landmark,
    pub highest: Landmark,
}

impl ContourLandmarks {
    fn is_interior(l: &Landmark) -> bool {
        l.index != 0 && l.index != N_POINTS - 1
    }
}

/// Start/end points and the earliest-index argmin and argmax of `s`.
pub fn landmarks(contour: &SampledContour) -> ContourLandmarks {
    let pts = &contour.points;
    let (mut lo, mut hi) = (0, 0);
    for (i, p) in pts.iter().enumerate().skip(1) {
        if p.s < pts[lo].s {
            lo = i;
        }
        if p.s > pts[hi].s {
            hi = i;
        }
    }
    ContourLandmarks {
        start: pts[0],
        end: pts[N_POINTS - 1],
        lowest: Landmark { index: lo, point: pts[lo] },
        highest: Landmark { index: hi, point: pts[hi] },
    }
}

/// Slopes from the start point to the end, lowest and highest points.
/// `k_min` / `k_max` are `None` when that extremum is the start point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordSlopes {
    pub k: f64,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnClass {
    Monotone,
    One,
    TwoOrMore,
}

impl TurnClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TurnClass::Monotone => "monotone",
            TurnClass::One => "one",
            TurnClass::TwoOrMore => "two_or_more",
        }
    }

    pub fn turn_count(self) -> usize {
        match self {
            TurnClass::Monotone => 0,
            TurnClass::One => 1,
            TurnClass::TwoOrMore => 2,
        }
    }
}

impl std::str::FromStr for TurnClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [TurnClass::Monotone, TurnClass::One, TurnClass::TwoOrMore]
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown class {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: TurnClass,
    pub slopes: ChordSlopes,
    /// The lowest point is interior and lies below the start→end chord.
    pub dip_deviates: bool,
    /// The highest point is interior and lies above the start→end chord.
    pub peak_deviates: bool,
}

fn slope(from: ContourPoint, to: ContourPoint) -> f64 {
    (to.s - from.s) / (to.t - from.t)
}

/// Step one: count turning points from the chord slopes.
pub fn classify(contour: &SampledContour, eps_slope: f64) -> Classification {
    let lm = landmarks(contour);
    let k = slope(lm.start, lm.end);
    let k_min = (lm.lowest.index != 0).then(|| slope(lm.start, lm.lowest.point));
    let k_max = (lm.highest.index != 0).then(|| slope(lm.start, lm.highest.point));

    let dip_deviates = ContourLandmarks::is_interior(&lm.lowest) && k_min.is_some_and(|m| m < k - eps_slope);
    let peak_deviates = ContourLandmarks::is_interior(&lm.highest) && k_max.is_some_and(|m| m > k + eps_slope);

    let class = match (dip_deviates, peak_deviates) {
        (false, false) => TurnClass::Monotone,
        (true, true) => TurnClass::TwoOrMore,
        _ => TurnClass::One,
    };
    Classification { class, slopes: ChordSlopes { k, k_min, k_max }, dip_deviates, peak_deviates }
}

/// Angle at one turning point of a tonal triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub t: f64,
    pub s: f64,
    pub cos_angle: f64,
    pub angle_rad: f64,
    pub sine: f64,
    pub obtuse: bool,
    /// `sqrt(2bc(1 - cos)) / c`, kept for comparison with published values.
    /// It is not the sine of the angle.
    pub paper_sine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureResult {
    pub token_id: String,
    pub class: TurnClass,
    pub turns: Vec<Turn>,
    pub curvature_index: f64,
}

/// Cosine, sine and the literal compatibility value for the angle at `apex`
/// in the triangle (`earlier`, `apex`, `later`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexAngle {
    pub cos_angle: f64,
    pub angle_rad: f64,
    pub sine: f64,
    pub paper_sine: f64,
    /// Opposite side `a = |earlier, later|`.
    pub a: f64,
    /// Adjacent side `b = |apex, later|`.
    pub b: f64,
    /// Adjacent side `c = |apex, earlier|`.
    pub c: f64,
}

/// Law of cosines at `apex`. Points are `(t, s)` in geometry units. Returns the
/// shortest side length as the error payload when the triangle is degenerate.
pub fn vertex_angle(earlier: (f64, f64), apex: (f64, f64), later: (f64, f64)) -> Result<VertexAngle, f64> {
    let d2 = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
    let (a2, b2, c2) = (d2(earlier, later), d2(apex, later), d2(apex, earlier));
    let (a, b, c) = (a2.sqrt(), b2.sqrt(), c2.sqrt());
    let shortest = a.min(b).min(c);
    if shortest < MIN_SIDE {
        return Err(shortest);
    }

    let u = (earlier.0 - apex.0, earlier.1 - apex.1);
    let v = (later.0 - apex.0, later.1 - apex.1);
    let cross = u.0 * v.1 - u.1 * v.0;
    let cos_angle = if cross.abs() <= COLLINEAR_TOL * b * c {
        // collinear: the apex lies between the others (angle π) or beyond them (0)
        if u.0 * v.0 + u.1 * v.1 < 0.0 {
            -1.0
        } else {
            1.0
        }
    } else {
        ((b2 + c2 - a2) / (2.0 * b * c)).clamp(-1.0, 1.0)
    };
    let sine = (1.0 - cos_angle * cos_angle).max(0.0).sqrt();
    let paper_sine = (2.0 * b * c * (1.0 - cos_angle)).max(0.0).sqrt() / c;
    Ok(VertexAngle { cos_angle, angle_rad: cos_angle.acos(), sine, paper_sine, a, b, c })
}

/// Step two: triangle angles at the turning points of a classified contour.
pub fn curvature(
    contour: &SampledContour,
    classification: &Classification,
    landmarks: &ContourLandmarks,
    semitone_scale: f64,
) -> Result<CurvatureResult, TcattError> {
    let pts = &contour.points;
    let geo = |i: usize| (pts[i].t, pts[i].s * semitone_scale);
    let last = N_POINTS - 1;

    let turn = |earlier: usize, apex: usize, later: usize| -> Result<Turn, TcattError> {
        let va = vertex_angle(geo(earlier), geo(apex), geo(later)).map_err(|side| {
            TcattError::DegenerateTriangle { token: contour.token_id.clone(), index: apex, side }
        })?;
        Ok(Turn {
            index: apex,
            t: pts[apex].t,
            s: pts[apex].s,
            cos_angle: va.cos_angle,
            angle_rad: va.angle_rad,
            sine: va.sine,
            obtuse: va.cos_angle < 0.0,
            paper_sine: va.paper_sine,
        })
    };

    let turns = match classification.class {
        TurnClass::Monotone => Vec::new(),
        TurnClass::One => {
            let apex = if classification.dip_deviates {
                landmarks.lowest.index
            } else {
                landmarks.highest.index
            };
            vec![turn(0, apex, last)?]
        }
        TurnClass::TwoOrMore => {
            let first = landmarks.lowest.index.min(landmarks.highest.index);
            let second = landmarks.lowest.index.max(landmarks.highest.index);
            vec![turn(0, first, second)?, turn(first, second, last)?]
        }
    };
    let curvature_index = turns.iter().map(|t| t.sine).fold(0.0, f64::max);
    Ok(CurvatureResult { token_id: contour.token_id.clone(), class: classification.class, turns, curvature_index })
}

/// Landmarks, classification and curvature for one contour.
pub fn analyze_token(contour: &SampledContour, config: &TcattConfig) -> Result<CurvatureResult, TcattError> {
    let lm = landmarks(contour);
    let cls = classify(contour, config.eps_slope);
    curvature(contour, &cls, &lm, config.semitone_scale)
}
