//! Benchmark problem-set ingestion.
//!
//! Input is UTF-8, one JSON object per line, required keys `id`, `problem`,
//! `answer`, optional `difficulty`. Problems are kept in file order so run
//! manifests stay reproducible.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extract;

/// One benchmark question with its gold answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub dataset: String,
    pub statement: String,
    pub gold_answer: String,
    pub difficulty_tag: Option<String>,
}

/// Identity of a loaded dataset: name, size, and a content hash of the
/// source file bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub problem_count: usize,
    pub checksum: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    problem: String,
    answer: String,
    #[serde(default)]
    difficulty: Option<String>,
}

/// Loads and validates a line-delimited problem file.
///
/// Errors name the offending line: malformed JSON, duplicate ids, and empty
/// `problem`/`answer` fields all reject the file. An empty file is invalid.
pub fn load_dataset(path: &Path, name: &str) -> Result<(DatasetManifest, Vec<Problem>)> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Error::Validation(format!("{} is not valid UTF-8: {e}", path.display())))?;

    let mut problems = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if raw.problem.trim().is_empty() {
            return Err(Error::Validation(format!(
                "line {line_no}: problem text is empty (id {})",
                raw.id
            )));
        }
        if raw.answer.trim().is_empty() {
            return Err(Error::Validation(format!(
                "line {line_no}: answer is empty (id {})",
                raw.id
            )));
        }
        if !seen_ids.insert(raw.id.clone()) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate problem id {:?}",
                raw.id
            )));
        }
        problems.push(Problem {
            id: raw.id,
            dataset: name.to_string(),
            statement: raw.problem,
            gold_answer: raw.answer,
            difficulty_tag: raw.difficulty,
        });
    }

    if problems.is_empty() {
        return Err(Error::Validation(format!(
            "{} contains no problem records",
            path.display()
        )));
    }

    let manifest = DatasetManifest {
        name: name.to_string(),
        problem_count: problems.len(),
        checksum: content_checksum(&bytes),
    };
    Ok((manifest, problems))
}

/// sha256 hex of the raw file bytes; deterministic for identical content.
pub fn content_checksum(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Pre-normalizes a gold answer with the same rules grading applies.
/// Idempotent; worst case returns the trimmed input.
pub fn canonicalize_gold(problem: &Problem) -> String {
    extract::canonicalize(&problem.gold_answer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_single_record() {
        let f = write_temp(r#"{"id":"p1","problem":"Simplify sqrt(242).","answer":"11\\sqrt{2}"}"#);
        let (manifest, problems) = load_dataset(f.path(), "demo").unwrap();
        assert_eq!(manifest.problem_count, 1);
        assert_eq!(problems[0].id, "p1");
        assert_eq!(problems[0].gold_answer, "11\\sqrt{2}");
        assert_eq!(problems[0].dataset, "demo");
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = write_temp(concat!(
            "{\"id\":\"p1\",\"problem\":\"a\",\"answer\":\"1\"}\n",
            "{\"id\":\"p1\",\"problem\":\"b\",\"answer\":\"2\"}\n"
        ));
        let err = load_dataset(f.path(), "demo").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("duplicate"));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn malformed_line_names_line_number() {
        let f = write_temp("{\"id\":\"p1\",\"problem\":\"a\",\"answer\":\"1\"}\nnot json\n");
        let err = load_dataset(f.path(), "demo").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_file_rejected() {
        let f = write_temp("");
        assert!(matches!(
            load_dataset(f.path(), "demo").unwrap_err(),
            Error::Validation(_)
        ));
    }

    #[test]
    fn empty_answer_rejected() {
        let f = write_temp("{\"id\":\"p1\",\"problem\":\"a\",\"answer\":\" \"}\n");
        let err = load_dataset(f.path(), "demo").unwrap_err();
        assert!(err.to_string().contains("answer is empty"));
    }

    #[test]
    fn loading_twice_is_identical() {
        let f = write_temp(concat!(
            "{\"id\":\"p1\",\"problem\":\"a\",\"answer\":\"1\",\"difficulty\":\"easy\"}\n",
            "{\"id\":\"p2\",\"problem\":\"b\",\"answer\":\"2\"}\n"
        ));
        let (m1, p1) = load_dataset(f.path(), "demo").unwrap();
        let (m2, p2) = load_dataset(f.path(), "demo").unwrap();
        assert_eq!(m1, m2);
        assert_eq!(p1, p2);
        assert_eq!(p1[0].difficulty_tag.as_deref(), Some("easy"));
    }

    #[test]
    fn canonicalize_gold_examples() {
        let mk = |answer: &str| Problem {
            id: "p".into(),
            dataset: "d".into(),
            statement: "s".into(),
            gold_answer: answer.into(),
            difficulty_tag: None,
        };
        assert_eq!(canonicalize_gold(&mk(" 42 ")), "42");
        assert_eq!(canonicalize_gold(&mk("\\frac{1}{2}")), "1/2");
        assert_eq!(canonicalize_gold(&mk("11\\sqrt{2}")), "11\\sqrt{2}");
    }

    #[test]
    fn canonicalize_gold_idempotent_over_load() {
        let f = write_temp(concat!(
            "{\"id\":\"p1\",\"problem\":\"a\",\"answer\":\" \\\\frac{3}{4} \"}\n",
            "{\"id\":\"p2\",\"problem\":\"b\",\"answer\":\"0.5\"}\n"
        ));
        let (_, problems) = load_dataset(f.path(), "demo").unwrap();
        for p in &problems {
            let once = canonicalize_gold(p);
            assert_eq!(extract::canonicalize(&once), once);
        }
    }
}
