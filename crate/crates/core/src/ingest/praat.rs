//! Praat text-format readers and writers (PitchTier, TextGrid).
//!
//! Praat's text reader skips every label (`xmin =`, `points [3]:`, ...) and
//! only consumes numbers, quoted strings and `<flags>`. The long and short
//! text forms differ only in those labels, so both are read through the same
//! token stream.

use serde::{Deserialize, Serialize};

use super::track::{F0Sample, F0Track};
use super::IngestError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Str(String),
    Flag(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Str(s) => format!("string {s:?}"),
            Token::Flag(f) => format!("flag <{f}>"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, IngestError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '!' {
            // comment to end of line
            for c in chars.by_ref() {
                if c == '\n' {
                    break;
                }
            }
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') if chars.peek() == Some(&'"') => {
                        chars.next();
                        s.push('"');
                    }
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => return Err(IngestError::Syntax("unterminated string".into())),
                }
            }
            tokens.push(Token::Str(s));
        } else if c == '<' {
            chars.next();
            let mut flag = String::new();
            loop {
                match chars.next() {
                    Some('>') => break,
                    Some(c) => flag.push(c),
                    None => return Err(IngestError::Syntax("unterminated <flag>".into())),
                }
            }
            tokens.push(Token::Flag(flag));
        } else {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                word.push(c);
                chars.next();
            }
            let numeric_start = word
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'));
            if numeric_start {
                if let Ok(v) = word.parse::<f64>() {
                    tokens.push(Token::Num(v));
                }
            }
        }
    }
    Ok(tokens)
}

struct Cursor {
    tokens: std::vec::IntoIter<Token>,
}

impl Cursor {
    fn next(&mut self, what: &str) -> Result<Token, IngestError> {
        self.tokens
            .next()
            .ok_or_else(|| IngestError::Syntax(format!("unexpected end of file, expected {what}")))
    }

    fn num(&mut self, what: &str) -> Result<f64, IngestError> {
        match self.next(what)? {
            Token::Num(v) => Ok(v),
            t => Err(IngestError::Syntax(format!("expected numeric {what}, found {}", t.describe()))),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, IngestError> {
        let v = self.num(what)?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(IngestError::Syntax(format!("{what} must be a non-negative integer, found {v}")));
        }
        Ok(v as usize)
    }

    fn string(&mut self, what: &str) -> Result<String, IngestError> {
        match self.next(what)? {
            Token::Str(s) => Ok(s),
            t => Err(IngestError::Syntax(format!("expected {what} string, found {}", t.describe()))),
        }
    }
}

/// Tokenize and check the `File type` / `Object class` header.
fn open(content: &str, class: &str) -> Result<Cursor, IngestError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    if content.trim_start().starts_with("ooBinaryFile") {
        return Err(IngestError::BinaryPraat);
    }
    let mut cursor = Cursor { tokens: tokenize(content)?.into_iter() };
    let file_type = cursor
        .string("file type")
        .map_err(|_| IngestError::Header("missing `File type = \"ooTextFile\"`".into()))?;
    if !file_type.starts_with("ooTextFile") {
        return Err(IngestError::Header(format!("unsupported file type {file_type:?}")));
    }
    let object_class = cursor
        .string("object class")
        .map_err(|_| IngestError::Header("missing `Object class`".into()))?;
    // Praat may append a version, e.g. "TextGrid 2"
    if object_class.split_whitespace().next() != Some(class) {
        return Err(IngestError::Header(format!("expected class {class:?}, found {object_class:?}")));
    }
    Ok(cursor)
}

/// Parse a Praat PitchTier (long or short text form). All points are voiced.
pub fn parse_pitchtier(content: &str) -> Result<F0Track, IngestError> {
    let mut cursor = open(content, "PitchTier")?;
    let _xmin = cursor.num("xmin")?;
    let _xmax = cursor.num("xmax")?;
    let declared = cursor.count("point count")?;

    let mut values = Vec::with_capacity(declared * 2);
    for token in cursor.tokens.by_ref() {
        match token {
            Token::Num(v) => values.push(v),
            t => return Err(IngestError::Syntax(format!("non-numeric point field: {}", t.describe()))),
        }
    }
    if values.len() != declared * 2 {
        return Err(IngestError::CountMismatch { declared, found: values.len() / 2 });
    }
    let samples = values
        .chunks_exact(2)
        .map(|p| F0Sample::voiced(p[0], p[1]))
        .collect();
    F0Track::new("", samples)
}

/// Write a PitchTier in Praat's long text form. Voiced samples only.
pub fn serialize_pitchtier(track: &F0Track) -> String {
    let points: Vec<&F0Sample> = track.voiced_samples().collect();
    let (xmin, xmax) = match (points.first(), points.last()) {
        (Some(a), Some(b)) => (a.time, b.time),
        _ => (0.0, 0.0),
    };
    let mut out = String::from("File type = \"ooTextFile\"\nObject class = \"PitchTier\"\n\n");
    out.push_str(&format!("xmin = {xmin}\nxmax = {xmax}\npoints: size = {}\n", points.len()));
    for (i, p) in points.iter().enumerate() {
        out.push_str(&format!(
            "points [{}]:\n    number = {}\n    value = {}\n",
            i + 1,
            p.time,
            p.f0
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub xmin: f64,
    pub xmax: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalTier {
    pub name: String,
    pub intervals: Vec<Interval>,
}

impl IntervalTier {
    /// Build a tier, checking `xmin < xmax` and ordered, non-overlapping intervals.
    pub fn new(name: impl Into<String>, intervals: Vec<Interval>) -> Result<Self, IngestError> {
        let name = name.into();
        for (index, iv) in intervals.iter().enumerate() {
            if !(iv.xmin < iv.xmax) {
                return Err(IngestError::EmptyInterval { tier: name, index });
            }
            if index > 0 && iv.xmin < intervals[index - 1].xmax {
                return Err(IngestError::Overlap { tier: name, index });
            }
        }
        Ok(Self { name, intervals })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTextGrid {
    pub tiers: Vec<IntervalTier>,
    /// One message per skipped point tier.
    pub warnings: Vec<String>,
}

/// Parse a Praat TextGrid and return its interval tiers in file order.
/// Point tiers are skipped with a logged warning.
pub fn parse_textgrid(content: &str) -> Result<Vec<IntervalTier>, IngestError> {
    let parsed = parse_textgrid_with_warnings(content)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    Ok(parsed.tiers)
}

pub fn parse_textgrid_with_warnings(content: &str) -> Result<ParsedTextGrid, IngestError> {
    let mut cursor = open(content, "TextGrid")?;
    let _xmin = cursor.num("xmin")?;
    let _xmax = cursor.num("xmax")?;
    let exists = match cursor.next("tiers flag")? {
        Token::Flag(f) => f == "exists",
        t => return Err(IngestError::Syntax(format!("expected <exists>, found {}", t.describe()))),
    };
    let mut out = ParsedTextGrid { tiers: Vec::new(), warnings: Vec::new() };
    if !exists {
        return Ok(out);
    }
    let n_tiers = cursor.count("tier count")?;
    for _ in 0..n_tiers {
        let class = cursor.string("tier class")?;
        let name = cursor.string("tier name")?;
        let _xmin = cursor.num("tier xmin")?;
        let _xmax = cursor.num("tier xmax")?;
        let n = cursor.count("interval count")?;
        match class.as_str() {
            "IntervalTier" => {
                let mut intervals = Vec::with_capacity(n);
                for _ in 0..n {
                    let xmin = cursor.num("interval xmin")?;
                    let xmax = cursor.num("interval xmax")?;
                    let label = cursor.string("interval text")?;
                    intervals.push(Interval { xmin, xmax, label });
                }
                out.tiers.push(IntervalTier::new(name, intervals)?);
            }
            "TextTier" | "PointTier" => {
                for _ in 0..n {
                    cursor.num("point time")?;
                    cursor.string("point mark")?;
                }
                out.warnings.push(format!("skipping point tier {name:?}"));
            }
            other => return Err(IngestError::Syntax(format!("unknown tier class {other:?}"))),
        }
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Write interval tiers as a long-form TextGrid spanning `[xmin, xmax]`.
pub fn serialize_textgrid(tiers: &[IntervalTier], xmin: f64, xmax: f64) -> String {
    let mut out = String::from("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n");
    out.push_str(&format!("xmin = {xmin}\nxmax = {xmax}\ntiers? <exists>\nsize = {}\nitem []:\n", tiers.len()));
    for (i, tier) in tiers.iter().enumerate() {
        out.push_str(&format!(
            "    item [{}]:\n        class = \"IntervalTier\"\n        name = {}\n        xmin = {xmin}\n        xmax = {xmax}\n        intervals: size = {}\n",
            i + 1,
            quote(&tier.name),
            tier.intervals.len()
        ));
        for (j, iv) in tier.intervals.iter().enumerate() {
            out.push_str(&format!(
                "        intervals [{}]:\n            xmin = {}\n            xmax = {}\n            text = {}\n",
                j + 1,
                iv.xmin,
                iv.xmax,
                quote(&iv.label)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LONG: &str = r#"File type = "ooTextFile"
Object class = "PitchTier"

xmin = 0
xmax = 0.3
points: size = 2
points [1]:
    number = 0.1
    value = 220
points [2]:
    number = 0.2
    value = 230
"#;

    const SHORT: &str = "File type = \"ooTextFile\"\nObject class = \"PitchTier\"\n\n0\n0.3\n2\n0.1\n220\n0.2\n230\n";

    #[test]
    fn pitchtier_long_form() {
        let t = parse_pitchtier(LONG).unwrap();
        assert_eq!(t.samples(), &[F0Sample::voiced(0.1, 220.0), F0Sample::voiced(0.2, 230.0)]);
    }

    #[test]
    fn pitchtier_short_equals_long() {
        assert_eq!(parse_pitchtier(SHORT).unwrap(), parse_pitchtier(LONG).unwrap());
    }

    #[test]
    fn pitchtier_count_mismatch() {
        let bad = LONG.replace("points: size = 2", "points: size = 3");
        match parse_pitchtier(&bad) {
            Err(IngestError::CountMismatch { declared: 3, found: 2 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pitchtier_header_and_binary() {
        assert!(matches!(parse_pitchtier("xmin = 0\n"), Err(IngestError::Header(_))));
        let tg = LONG.replace("PitchTier", "TextGrid");
        assert!(matches!(parse_pitchtier(&tg), Err(IngestError::Header(_))));
        assert!(matches!(parse_pitchtier("ooBinaryFile\x08PitchTier"), Err(IngestError::BinaryPraat)));
    }

    #[test]
    fn pitchtier_non_numeric_field() {
        let bad = LONG.replace("value = 230", "value = \"x\"");
        assert!(matches!(parse_pitchtier(&bad), Err(IngestError::Syntax(_))));
    }

    #[test]
    fn pitchtier_serialize_reparses() {
        let t = parse_pitchtier(LONG).unwrap();
        assert_eq!(parse_pitchtier(&serialize_pitchtier(&t)).unwrap(), t);
    }

    fn textgrid(items: &str, n: usize) -> String {
        format!(
            "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\nxmin = 0 \nxmax = 1 \ntiers? <exists> \nsize = {n} \nitem []: \n{items}"
        )
    }

    const SYLLABLE_TIER: &str = r#"    item [1]:
        class = "IntervalTier"
        name = "syllable"
        xmin = 0
        xmax = 1
        intervals: size = 3
        intervals [1]:
            xmin = 0
            xmax = 0.3
            text = ""
        intervals [2]:
            xmin = 0.3
            xmax = 0.6
            text = "mng"
        intervals [3]:
            xmin = 0.6
            xmax = 1
            text = "say ""hi"""
"#;

    const POINT_TIER: &str = r#"    item [2]:
        class = "TextTier"
        name = "tones"
        xmin = 0
        xmax = 1
        points: size = 1
        points [1]:
            number = 0.45
            mark = "H"
"#;

    #[test]
    fn textgrid_one_tier() {
        let tiers = parse_textgrid(&textgrid(SYLLABLE_TIER, 1)).unwrap();
        assert_eq!(tiers.len(), 1);
        assert_eq!(tiers[0].name, "syllable");
        assert_eq!(tiers[0].intervals.len(), 3);
        assert_eq!(tiers[0].intervals[1].label, "mng");
        assert_eq!(tiers[0].intervals[2].label, "say \"hi\"");
    }

    #[test]
    fn textgrid_point_tier_skipped_with_warning() {
        let items = format!("{SYLLABLE_TIER}{POINT_TIER}");
        let parsed = parse_textgrid_with_warnings(&textgrid(&items, 2)).unwrap();
        assert_eq!(parsed.tiers.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("tones"));
    }

    #[test]
    fn textgrid_overlap_rejected() {
        let tier = SYLLABLE_TIER.replace("xmin = 0.3\n            xmax = 0.6", "xmin = 0.25\n            xmax = 0.6");
        assert!(matches!(
            parse_textgrid(&textgrid(&tier, 1)),
            Err(IngestError::Overlap { index: 1, .. })
        ));
    }

    #[test]
    fn textgrid_empty_interval_rejected() {
        let tier = SYLLABLE_TIER.replace("xmax = 0.6", "xmax = 0.3");
        assert!(matches!(
            parse_textgrid(&textgrid(&tier, 1)),
            Err(IngestError::EmptyInterval { index: 1, .. })
        ));
    }

    #[test]
    fn textgrid_header_mismatch() {
        let pt = textgrid(SYLLABLE_TIER, 1).replace("\"TextGrid\"", "\"PitchTier\"");
        assert!(matches!(parse_textgrid(&pt), Err(IngestError::Header(_))));
    }

    #[test]
    fn textgrid_absent_tiers() {
        let tg = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\nxmin = 0\nxmax = 1\ntiers? <absent>\n";
        assert!(parse_textgrid(tg).unwrap().is_empty());
    }

    #[test]
    fn textgrid_round_trip() {
        let tiers = parse_textgrid(&textgrid(SYLLABLE_TIER, 1)).unwrap();
        let text = serialize_textgrid(&tiers, 0.0, 1.0);
        assert_eq!(parse_textgrid(&text).unwrap(), tiers);
    }

    #[test]
    fn comments_are_ignored() {
        let with_comment = LONG.replace("xmax = 0.3\n", "xmax = 0.3 ! 42 \"ignored\"\n");
        assert_eq!(parse_pitchtier(&with_comment).unwrap(), parse_pitchtier(LONG).unwrap());
    }
}
