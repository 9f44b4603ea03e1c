//! Splits completions into reasoning trace and final answer, and grades
//! answers against gold.
//!
//! Grading is rule-based and conservative: no symbolic algebra. Rules are
//! applied in a fixed order (exact, fraction rewrite, numeric within 1e-9)
//! so results are deterministic and auditable.

/// Version recorded in every run manifest; bump when any rule changes.
pub const GRADING_RULESET_VERSION: &str = "ruleset-v1";

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";

/// A completion split at the think tags.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedResponse {
    /// Text before the opening think tag (usually empty).
    pub prefix: String,
    /// Contents between the first opening and first closing think tag.
    pub think_text: String,
    /// Everything after the closing tag.
    pub tail_text: String,
    /// Final answer pulled from `\boxed{...}`, tail first, think fallback.
    pub boxed_answer: Option<String>,
    /// True when the opening tag is present but the closing tag is not.
    pub truncated: bool,
    had_open: bool,
    had_close: bool,
}

impl ParsedResponse {
    /// Reassembles the original input byte-for-byte.
    pub fn reassemble(&self) -> String {
        let mut out = self.prefix.clone();
        if self.had_open {
            out.push_str(THINK_OPEN);
        }
        out.push_str(&self.think_text);
        if self.had_close {
            out.push_str(THINK_CLOSE);
        }
        out.push_str(&self.tail_text);
        out
    }
}

/// Outcome of `\boxed{...}` extraction. `Unbalanced` is distinct from
/// `Absent`: the marker was there but its braces never closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoxedExtraction {
    Found(String),
    Absent,
    Unbalanced,
}

impl BoxedExtraction {
    pub fn into_option(self) -> Option<String> {
        match self {
            BoxedExtraction::Found(s) => Some(s),
            _ => None,
        }
    }
}

/// Splits a completion at the first `<think>`/`</think>` pair.
///
/// Degenerate inputs never fail: with no opening tag the whole input is
/// tail text; with an unclosed opening tag the remainder is think text and
/// the response is marked truncated.
pub fn split_think(text: &str) -> ParsedResponse {
    let (prefix, think_text, tail_text, truncated, had_open, had_close) =
        match text.find(THINK_OPEN) {
            None => (String::new(), String::new(), text.to_string(), false, false, false),
            Some(open) => {
                let after_open = &text[open + THINK_OPEN.len()..];
                match after_open.find(THINK_CLOSE) {
                    Some(close) => (
                        text[..open].to_string(),
                        after_open[..close].to_string(),
                        after_open[close + THINK_CLOSE.len()..].to_string(),
                        false,
                        true,
                        true,
                    ),
                    None => (
                        text[..open].to_string(),
                        after_open.to_string(),
                        String::new(),
                        true,
                        true,
                        false,
                    ),
                }
            }
        };

    // Answers are expected after the trace; fall back to the trace itself
    // so an answer buried in the think span still grades.
    let boxed_answer = match extract_boxed(&tail_text) {
        BoxedExtraction::Found(s) => Some(s),
        _ => extract_boxed(&think_text).into_option(),
    };

    ParsedResponse {
        prefix,
        think_text,
        tail_text,
        boxed_answer,
        truncated,
        had_open,
        had_close,
    }
}

/// Returns the contents of the last balanced `\boxed{...}` in `text`.
///
/// Nested braces are matched; `\{`/`\}` escapes do not affect depth. When
/// only unbalanced occurrences exist the result is `Unbalanced`.
pub fn extract_boxed(text: &str) -> BoxedExtraction {
    const MARKER: &str = "\\boxed{";
    let mut last_balanced: Option<String> = None;
    let mut saw_unbalanced = false;
    let mut search_from = 0;

    while let Some(rel) = text[search_from..].find(MARKER) {
        let start = search_from + rel + MARKER.len();
        match scan_balanced(&text[start..]) {
            Some(len) => {
                last_balanced = Some(text[start..start + len].to_string());
                search_from = start + len + 1;
            }
            None => {
                saw_unbalanced = true;
                search_from = start;
            }
        }
    }

    match (last_balanced, saw_unbalanced) {
        (Some(s), _) => BoxedExtraction::Found(s),
        (None, true) => BoxedExtraction::Unbalanced,
        (None, false) => BoxedExtraction::Absent,
    }
}

/// Byte length of the balanced span starting at depth 1, excluding the
/// closing brace. None when the braces never close.
fn scan_balanced(s: &str) -> Option<usize> {
    let mut depth = 1usize;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match ch {
            '\\' => escaped = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Which rule established equality (or `None` if all failed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradeRule {
    Exact,
    Fraction,
    Numeric,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeResult {
    pub correct: bool,
    pub canonical_pred: String,
    pub canonical_gold: String,
    pub rule_applied: GradeRule,
}

/// Grades a predicted answer against gold.
///
/// Rules in order: exact match after whitespace/`$`/`\left`/`\right`
/// stripping, `\frac{a}{b}` -> `a/b` rewrite, then numeric equality within
/// 1e-9 when both sides parse as numbers.
pub fn grade(pred: &str, gold: &str) -> GradeResult {
    let stripped_pred = strip_decorations(pred);
    let stripped_gold = strip_decorations(gold);
    let canonical_pred = rewrite_fractions(&stripped_pred);
    let canonical_gold = rewrite_fractions(&stripped_gold);

    let exact = (!stripped_pred.is_empty() && stripped_pred == stripped_gold)
        || (!pred.is_empty() && pred == gold);
    let rule_applied = if exact {
        GradeRule::Exact
    } else if !canonical_pred.is_empty() && canonical_pred == canonical_gold {
        GradeRule::Fraction
    } else if let (Some(a), Some(b)) = (parse_number(&canonical_pred), parse_number(&canonical_gold)) {
        if (a - b).abs() < 1e-9 {
            GradeRule::Numeric
        } else {
            GradeRule::None
        }
    } else {
        GradeRule::None
    };

    GradeResult {
        correct: rule_applied != GradeRule::None,
        canonical_pred,
        canonical_gold,
        rule_applied,
    }
}

/// Full canonical form used by grading: decoration stripping plus the
/// fraction rewrite. Idempotent.
pub fn canonicalize(s: &str) -> String {
    rewrite_fractions(&strip_decorations(s))
}

/// Removes whitespace, `$`, and `\left`/`\right` tokens (only when followed
/// by a non-letter, so `\rightarrow` survives).
fn strip_decorations(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() || ch == '$' {
            i += 1;
            continue;
        }
        if ch == '\\' {
            if let Some(len) = delimiter_token_len(&chars[i..]) {
                i += len;
                continue;
            }
        }
        out.push(ch);
        i += 1;
    }
    out
}

fn delimiter_token_len(chars: &[char]) -> Option<usize> {
    for token in ["\\left", "\\right"] {
        let tok: Vec<char> = token.chars().collect();
        if chars.len() >= tok.len() && chars[..tok.len()] == tok[..] {
            let next_is_letter = chars.get(tok.len()).is_some_and(|c| c.is_alphabetic());
            if !next_is_letter {
                return Some(tok.len());
            }
        }
    }
    None
}

/// Rewrites every `\frac{a}{b}` (also `\dfrac`, `\tfrac`) as `a/b`,
/// recursing into the numerator and denominator.
fn rewrite_fractions(s: &str) -> String {
    for marker in ["\\frac{", "\\dfrac{", "\\tfrac{"] {
        if let Some(pos) = s.find(marker) {
            let num_start = pos + marker.len();
            if let Some(num_len) = scan_balanced(&s[num_start..]) {
                let rest = &s[num_start + num_len + 1..];
                if let Some(stripped) = rest.strip_prefix('{') {
                    if let Some(den_len) = scan_balanced(stripped) {
                        let numerator = rewrite_fractions(&s[num_start..num_start + num_len]);
                        let denominator = rewrite_fractions(&stripped[..den_len]);
                        let tail = rewrite_fractions(&stripped[den_len + 1..]);
                        return format!("{}{}/{}{}", &s[..pos], numerator, denominator, tail);
                    }
                }
            }
        }
    }
    s.to_string()
}

/// Parses a decimal or `a/b` rational. Returns None for anything else.
fn parse_number(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.parse().ok()?;
        let d: f64 = den.parse().ok()?;
        if d == 0.0 {
            return None;
        }
        return Some(n / d);
    }
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_basic() {
        let parsed = split_think("<think>razonemos paso a paso</think> The answer is \\boxed{42}");
        assert_eq!(parsed.think_text, "razonemos paso a paso");
        assert_eq!(parsed.tail_text, " The answer is \\boxed{42}");
        assert!(!parsed.truncated);
        assert_eq!(parsed.boxed_answer.as_deref(), Some("42"));
    }

    #[test]
    fn split_missing_close_tag() {
        let parsed = split_think("<think>cut off mid-sente");
        assert!(parsed.truncated);
        assert_eq!(parsed.think_text, "cut off mid-sente");
        assert_eq!(parsed.tail_text, "");
    }

    #[test]
    fn split_no_tags() {
        let parsed = split_think("no tags at all \\boxed{7}");
        assert_eq!(parsed.think_text, "");
        assert_eq!(parsed.tail_text, "no tags at all \\boxed{7}");
        assert!(!parsed.truncated);
        assert_eq!(parsed.boxed_answer.as_deref(), Some("7"));
    }

    #[test]
    fn split_boxed_fallback_to_think() {
        let parsed = split_think("<think>la respuesta es \\boxed{9}</think> done.");
        assert_eq!(parsed.boxed_answer.as_deref(), Some("9"));
    }

    #[test]
    fn split_reassembles_exactly() {
        let inputs = [
            "<think>a</think>b",
            "prefix <think>middle</think> tail",
            "<think>unclosed",
            "no tags",
            "",
            "<think></think>",
        ];
        for input in inputs {
            assert_eq!(split_think(input).reassemble(), input, "input: {input:?}");
        }
    }

    #[test]
    fn boxed_nested_braces() {
        assert_eq!(
            extract_boxed("\\boxed{\\frac{1}{2}}"),
            BoxedExtraction::Found("\\frac{1}{2}".into())
        );
    }

    #[test]
    fn boxed_last_occurrence_wins() {
        assert_eq!(
            extract_boxed("\\boxed{3}; revised: \\boxed{5}"),
            BoxedExtraction::Found("5".into())
        );
    }

    #[test]
    fn boxed_unbalanced() {
        assert_eq!(extract_boxed("\\boxed{1+2"), BoxedExtraction::Unbalanced);
    }

    #[test]
    fn boxed_absent() {
        assert_eq!(extract_boxed("the answer is 4"), BoxedExtraction::Absent);
    }

    #[test]
    fn grade_fraction_rule() {
        let result = grade("1/2", "\\frac{1}{2}");
        assert!(result.correct);
        assert_eq!(result.rule_applied, GradeRule::Fraction);
        assert_eq!(result.canonical_gold, "1/2");
    }

    #[test]
    fn grade_numeric_rule() {
        let result = grade("0.5", "1/2");
        assert!(result.correct);
        assert_eq!(result.rule_applied, GradeRule::Numeric);
    }

    #[test]
    fn grade_incorrect_no_rule() {
        let result = grade("11\\sqrt{3}", "11\\sqrt{2}");
        assert!(!result.correct);
        assert_eq!(result.rule_applied, GradeRule::None);
    }

    #[test]
    fn grade_exact_after_stripping() {
        let result = grade(" $42$ ", "42");
        assert!(result.correct);
        assert_eq!(result.rule_applied, GradeRule::Exact);
    }

    #[test]
    fn grade_left_right_stripping() {
        let result = grade("\\left(1,2\\right)", "(1,2)");
        assert!(result.correct);
        assert_eq!(result.rule_applied, GradeRule::Exact);
    }

    #[test]
    fn rightarrow_not_mangled() {
        assert_eq!(strip_decorations("a\\rightarrow b"), "a\\rightarrowb");
    }

    #[test]
    fn grade_symmetric() {
        let pairs = [("1/2", "\\frac{1}{2}"), ("0.5", "1/2"), ("3", "4"), ("x", "x")];
        for (a, b) in pairs {
            assert_eq!(grade(a, b).correct, grade(b, a).correct, "{a} vs {b}");
        }
    }

    #[test]
    fn grade_self_is_correct() {
        for x in ["42", "11\\sqrt{2}", "\\frac{1}{2}", "-0.75"] {
            assert!(grade(x, x).correct, "{x}");
        }
    }

    #[test]
    fn canonicalize_idempotent() {
        for s in [" 42 ", "\\frac{1}{2}", "11\\sqrt{2}", "$\\left(\\frac{a}{b}\\right)$"] {
            let once = canonicalize(s);
            assert_eq!(canonicalize(&once), once, "input: {s:?}");
        }
    }

    #[test]
    fn canonicalize_nested_fraction() {
        assert_eq!(canonicalize("\\frac{\\frac{1}{2}}{3}"), "1/2/3");
    }

    #[test]
    fn negative_numbers_parse() {
        assert_eq!(parse_number("-3/4"), Some(-0.75));
        assert_eq!(parse_number("-2.5"), Some(-2.5));
        assert_eq!(parse_number("x+1"), None);
        assert_eq!(parse_number("1/0"), None);
    }
}
