//! Language identification for reasoning traces.
//!
//! Two-stage classifier over the eight supported languages: Unicode script
//! dominance settles zh/ru/hi/ar/ko directly; Latin-script text is routed
//! to character-trigram cosine similarity against bundled en/es/tr
//! profiles. LaTeX math, digits, and punctuation are stripped first so
//! math-heavy traces classify by their prose.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version recorded in run manifests; bump when profiles are retrained.
pub const LID_PROFILE_VERSION: &str = "bundled-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageTag {
    En,
    Zh,
    Ru,
    Es,
    Ar,
    Tr,
    Hi,
    Ko,
    Unknown,
}

impl LanguageTag {
    /// The eight prompt-target languages, in the reporting order used
    /// throughout the harness.
    pub const SUPPORTED: [LanguageTag; 8] = [
        LanguageTag::En,
        LanguageTag::Zh,
        LanguageTag::Ru,
        LanguageTag::Es,
        LanguageTag::Ar,
        LanguageTag::Tr,
        LanguageTag::Hi,
        LanguageTag::Ko,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LanguageTag::En => "en",
            LanguageTag::Zh => "zh",
            LanguageTag::Ru => "ru",
            LanguageTag::Es => "es",
            LanguageTag::Ar => "ar",
            LanguageTag::Tr => "tr",
            LanguageTag::Hi => "hi",
            LanguageTag::Ko => "ko",
            LanguageTag::Unknown => "unknown",
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(LanguageTag::En),
            "zh" => Ok(LanguageTag::Zh),
            "ru" => Ok(LanguageTag::Ru),
            "es" => Ok(LanguageTag::Es),
            "ar" => Ok(LanguageTag::Ar),
            "tr" => Ok(LanguageTag::Tr),
            "hi" => Ok(LanguageTag::Hi),
            "ko" => Ok(LanguageTag::Ko),
            "unknown" => Ok(LanguageTag::Unknown),
            other => Err(Error::Config(format!(
                "unknown language tag {other:?}; allowed: en, zh, ru, es, ar, tr, hi, ko"
            ))),
        }
    }
}

/// Letter counts per script class over a piece of text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScriptHistogram {
    pub latin: usize,
    pub han: usize,
    pub cyrillic: usize,
    pub devanagari: usize,
    pub arabic: usize,
    pub hangul: usize,
    pub other: usize,
    pub total_letters: usize,
}

impl ScriptHistogram {
    fn classes(&self) -> [(usize, LanguageTag); 5] {
        [
            (self.han, LanguageTag::Zh),
            (self.cyrillic, LanguageTag::Ru),
            (self.devanagari, LanguageTag::Hi),
            (self.arabic, LanguageTag::Ar),
            (self.hangul, LanguageTag::Ko),
        ]
    }
}

/// Thresholds for `classify`; defaults match the shipped configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LidConfig {
    /// Minimum letter share a script needs to decide the language outright.
    pub script_dominance: f64,
    /// Below this many letters (after preprocessing) the text is unknown.
    pub min_letters: usize,
    /// Minimum trigram cosine similarity before a Latin text gets a label.
    pub min_similarity: f64,
}

impl Default for LidConfig {
    fn default() -> Self {
        LidConfig {
            script_dominance: 0.6,
            min_letters: 20,
            min_similarity: 0.05,
        }
    }
}

/// Strips LaTeX math (`$...$`, `\[...\]`, `\(...\)`), `\command` heads,
/// digits, and punctuation; collapses whitespace.
pub fn preprocess(text: &str) -> String {
    let without_math = strip_math_spans(text);
    let mut cleaned = String::with_capacity(without_math.len());
    let chars: Vec<char> = without_math.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\\' && chars.get(i + 1).is_some_and(|c| c.is_ascii_alphabetic()) {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            continue;
        }
        if ch.is_alphabetic() {
            cleaned.push(ch);
        } else if ch.is_whitespace() {
            cleaned.push(' ');
        } else {
            // digits and punctuation become separators
            cleaned.push(' ');
        }
        i += 1;
    }
    collapse_spaces(&cleaned)
}

fn strip_math_spans(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '$' {
            if let Some(close) = find_char(&chars, i + 1, '$') {
                i = close + 1;
                out.push(' ');
                continue;
            }
        }
        if chars[i] == '\\' && i + 1 < chars.len() && (chars[i + 1] == '[' || chars[i + 1] == '(') {
            let closer = if chars[i + 1] == '[' { ']' } else { ')' };
            if let Some(close) = find_escaped(&chars, i + 2, closer) {
                i = close + 2;
                out.push(' ');
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

fn find_char(chars: &[char], from: usize, target: char) -> Option<usize> {
    (from..chars.len()).find(|&j| chars[j] == target)
}

fn find_escaped(chars: &[char], from: usize, closer: char) -> Option<usize> {
    (from..chars.len().saturating_sub(1)).find(|&j| chars[j] == '\\' && chars[j + 1] == closer)
}

fn collapse_spaces(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut last_space = true;
    for ch in s.chars() {
        if ch == ' ' {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(ch);
            last_space = false;
        }
    }
    out.trim_end().to_string()
}

/// Classifies each letter codepoint by Unicode script block.
pub fn detect_script(text: &str) -> ScriptHistogram {
    let mut hist = ScriptHistogram::default();
    for ch in text.chars().filter(|c| c.is_alphabetic()) {
        hist.total_letters += 1;
        let cp = ch as u32;
        if is_latin(cp) {
            hist.latin += 1;
        } else if is_han(cp) {
            hist.han += 1;
        } else if is_cyrillic(cp) {
            hist.cyrillic += 1;
        } else if is_devanagari(cp) {
            hist.devanagari += 1;
        } else if is_arabic(cp) {
            hist.arabic += 1;
        } else if is_hangul(cp) {
            hist.hangul += 1;
        } else {
            hist.other += 1;
        }
    }
    hist
}

fn is_latin(cp: u32) -> bool {
    matches!(cp,
        0x0041..=0x005A | 0x0061..=0x007A | 0x00C0..=0x024F
        | 0x1E00..=0x1EFF | 0x2C60..=0x2C7F | 0xA720..=0xA7FF)
}

fn is_han(cp: u32) -> bool {
    matches!(cp,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2A6DF)
}

fn is_cyrillic(cp: u32) -> bool {
    matches!(cp, 0x0400..=0x052F | 0x1C80..=0x1C8F | 0x2DE0..=0x2DFF | 0xA640..=0xA69F)
}

fn is_devanagari(cp: u32) -> bool {
    matches!(cp, 0x0900..=0x097F | 0xA8E0..=0xA8FF)
}

fn is_arabic(cp: u32) -> bool {
    matches!(cp,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF
        | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

fn is_hangul(cp: u32) -> bool {
    matches!(cp, 0x1100..=0x11FF | 0x3130..=0x318F | 0xA960..=0xA97F | 0xAC00..=0xD7FF)
}

/// A unit-normalized character-trigram frequency profile for one language.
#[derive(Debug, Clone)]
pub struct NGramProfile {
    pub language: LanguageTag,
    pub weights: HashMap<String, f64>,
    pub trained_on: String,
}

#[derive(Serialize, Deserialize)]
struct ProfileHeader {
    lang: String,
    norm: f64,
    trained_on: String,
}

#[derive(Serialize, Deserialize)]
struct ProfileEntry {
    g: String,
    w: f64,
}

/// Trigrams kept per trained profile.
const PROFILE_SIZE: usize = 3000;

impl NGramProfile {
    /// Builds a profile from raw training text: preprocess, lowercase,
    /// count trigrams, keep the most frequent, L2-normalize.
    pub fn train(language: LanguageTag, text: &str, trained_on: &str) -> NGramProfile {
        let counts = trigram_counts(text);
        let mut entries: Vec<(String, f64)> =
            counts.into_iter().map(|(g, c)| (g, c as f64)).collect();
        // Deterministic order: count desc, then trigram asc.
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        entries.truncate(PROFILE_SIZE);

        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let weights = entries
            .into_iter()
            .map(|(g, w)| (g, w / norm))
            .collect();
        NGramProfile {
            language,
            weights,
            trained_on: trained_on.to_string(),
        }
    }

    /// Cosine similarity against a raw trigram count map.
    pub fn similarity(&self, counts: &HashMap<String, u32>) -> f64 {
        let norm = counts
            .values()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        counts
            .iter()
            .filter_map(|(g, &c)| self.weights.get(g).map(|w| w * c as f64 / norm))
            .sum()
    }

    /// Serializes as line-delimited JSON: a header record, then one
    /// `{"g":...,"w":...}` record per trigram in deterministic order.
    pub fn to_jsonl(&self) -> String {
        let header = ProfileHeader {
            lang: self.language.as_str().to_string(),
            norm: 1.0,
            trained_on: self.trained_on.clone(),
        };
        let mut lines = vec![serde_json::to_string(&header).unwrap()];
        let mut entries: Vec<(&String, &f64)> = self.weights.iter().collect();
        entries.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then_with(|| a.0.cmp(b.0)));
        for (g, w) in entries {
            lines.push(serde_json::to_string(&ProfileEntry { g: g.clone(), w: *w }).unwrap());
        }
        lines.join("\n") + "\n"
    }

    pub fn from_jsonl(text: &str) -> Result<NGramProfile> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty profile file".into(),
        })?;
        let header: ProfileHeader = serde_json::from_str(header_line).map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad profile header: {e}"),
        })?;
        let language = header.lang.parse()?;
        let mut weights = HashMap::new();
        for (idx, line) in lines.enumerate() {
            let entry: ProfileEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: idx + 2,
                message: format!("bad profile entry: {e}"),
            })?;
            weights.insert(entry.g, entry.w);
        }
        Ok(NGramProfile {
            language,
            weights,
            trained_on: header.trained_on,
        })
    }
}

/// Trigram counts over the preprocessed, lowercased text, with a leading
/// and trailing space as word-boundary markers.
fn trigram_counts(text: &str) -> HashMap<String, u32> {
    let pre = preprocess(text).to_lowercase();
    let padded: Vec<char> = std::iter::once(' ')
        .chain(pre.chars())
        .chain(std::iter::once(' '))
        .collect();
    let mut counts = HashMap::new();
    for window in padded.windows(3) {
        let gram: String = window.iter().collect();
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

static LATIN_PROFILES: Lazy<Vec<NGramProfile>> = Lazy::new(|| {
    vec![
        NGramProfile::from_jsonl(include_str!("../assets/lid/en.profile.jsonl"))
            .expect("bundled en profile"),
        NGramProfile::from_jsonl(include_str!("../assets/lid/es.profile.jsonl"))
            .expect("bundled es profile"),
        NGramProfile::from_jsonl(include_str!("../assets/lid/tr.profile.jsonl"))
            .expect("bundled tr profile"),
    ]
});

/// Classifies with default thresholds. Deterministic and pure.
pub fn classify(text: &str) -> (LanguageTag, f64) {
    classify_with(&LidConfig::default(), text)
}

/// Classifies with explicit thresholds.
///
/// A dominant non-Latin script decides directly; dominant Latin mass goes
/// to trigram similarity over {en, es, tr}; too few letters or no dominant
/// script yields `Unknown`.
pub fn classify_with(cfg: &LidConfig, text: &str) -> (LanguageTag, f64) {
    let pre = preprocess(text);
    let hist = detect_script(&pre);
    if hist.total_letters < cfg.min_letters {
        return (LanguageTag::Unknown, 0.0);
    }
    let total = hist.total_letters as f64;

    let (best_count, best_lang) = hist
        .classes()
        .into_iter()
        .max_by_key(|(count, _)| *count)
        .unwrap();
    let best_share = best_count as f64 / total;
    if best_share >= cfg.script_dominance {
        return (best_lang, best_share);
    }

    let latin_share = hist.latin as f64 / total;
    if latin_share >= cfg.script_dominance {
        let counts = trigram_counts(&pre);
        let sims: Vec<(LanguageTag, f64)> = LATIN_PROFILES
            .iter()
            .map(|p| (p.language, p.similarity(&counts)))
            .collect();
        let (lang, best) = sims
            .iter()
            .copied()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best < cfg.min_similarity {
            return (LanguageTag::Unknown, best.max(0.0));
        }
        let mass: f64 = sims.iter().map(|(_, s)| s.max(0.0)).sum();
        let confidence = if mass > 0.0 { best / mass } else { 0.0 };
        return (lang, confidence);
    }

    (LanguageTag::Unknown, best_share.max(latin_share))
}
