//! Problems, datasets, annotations and noisy-variant generation.

pub mod annotation;
pub mod annotator;
pub mod noise;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::number::{digit_literal_value, number_word_value, Value};

pub use annotation::{
    read_annotation, write_annotation, Annotation, Aspect, Sentence, Tense, Token,
};
pub use annotator::{AnnotateError, Annotator};
pub use noise::{make_noisy_variants, noisy_dataset, NoiseError, NoiseKind, NoisePools, NoiseSpec};

/// A single math word problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MWProblem {
    pub id: String,
    pub body: String,
    pub question: String,
    pub answer: Value,
    #[serde(skip)]
    pub annotation: Option<Annotation>,
}

impl MWProblem {
    pub fn new(id: &str, body: &str, question: &str, answer: Value) -> Self {
        MWProblem {
            id: id.to_string(),
            body: body.to_string(),
            question: question.to_string(),
            answer,
            annotation: None,
        }
    }

    /// Full problem text, body then question.
    pub fn text(&self) -> String {
        format!("{} {}", self.body, self.question)
    }

    pub fn validate(&self) -> Result<(), String> {
        let has_number = self
            .body
            .split(|c: char| c.is_whitespace() || c == '$')
            .map(|w| w.trim_end_matches(['.', ',', '?', '!', ';']))
            .any(|w| digit_literal_value(w).is_some() || number_word_value(w).is_some());
        if !has_number {
            return Err("body has no numeric quantity".into());
        }
        let q = self.question.trim();
        if !q.ends_with('?') {
            return Err("question must end with `?`".into());
        }
        if q[..q.len() - 1].contains(['.', '?', '!']) && annotator::split_sentences(q).len() > 1 {
            return Err("question must be a single sentence".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub problems: Vec<MWProblem>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{name}:{line}: {msg}")]
    Parse {
        name: String,
        line: usize,
        msg: String,
    },
    #[error("{name}: duplicate problem id `{id}`")]
    DuplicateId { name: String, id: String },
}

impl Dataset {
    /// Parses JSON-lines text: one `{"id","body","question","answer"}`
    /// object per line. Blank lines and lines starting with `//` are skipped.
    pub fn parse(name: &str, text: &str) -> Result<Dataset, DatasetError> {
        let mut problems = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let parse_err = |msg: String| DatasetError::Parse {
                name: name.to_string(),
                line: i + 1,
                msg,
            };
            let problem: MWProblem =
                serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            problem.validate().map_err(parse_err)?;
            if !seen.insert(problem.id.clone()) {
                return Err(DatasetError::DuplicateId {
                    name: name.to_string(),
                    id: problem.id,
                });
            }
            problems.push(problem);
        }
        Ok(Dataset {
            name: name.to_string(),
            problems,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.problems {
            out.push_str(&serde_json::to_string(p).expect("problems serialize"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::parse(&name, &text)
}

pub const MICRO_CORPUS: &str = include_str!("../../assets/micro_corpus.jsonl");

/// The bundled micro-corpus used for tests and as default training data.
pub fn micro_corpus() -> Dataset {
    Dataset::parse("micro", MICRO_CORPUS).expect("bundled corpus is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{"id":"f1","body":"Mike takes 88 minutes to walk to school. If he rides a bicycle to school, it would save him 64 minutes.","question":"How much time did Mike save?","answer":22}"#;

    #[test]
    fn loads_single_record() {
        let d = Dataset::parse("t", FIG1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.problems[0].answer, Value::from_int(22));
    }

    #[test]
    fn empty_dataset() {
        assert!(Dataset::parse("t", "").unwrap().is_empty());
    }

    #[test]
    fn decimal_answers_are_exact() {
        let rec =
            r#"{"id":"a","body":"Tim has 5 apples.","question":"How many apples?","answer":"2.5"}"#;
        let d = Dataset::parse("t", rec).unwrap();
        assert_eq!(d.problems[0].answer, Value::ratio(5, 2));
        let rec =
            r#"{"id":"a","body":"Tim has 5 apples.","question":"How many apples?","answer":2.5}"#;
        assert_eq!(
            Dataset::parse("t", rec).unwrap().problems[0].answer,
            Value::ratio(5, 2)
        );
    }

    #[test]
    fn malformed_record_names_line() {
        let text = format!("{FIG1}\n{{\"id\":\"x\"\n");
        let err = Dataset::parse("t", &text).unwrap_err();
        assert!(err.to_string().contains("t:2"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{FIG1}\n{FIG1}\n");
        assert!(matches!(
            Dataset::parse("t", &text),
            Err(DatasetError::DuplicateId { .. })
        ));
    }

    #[test]
    fn invariants_checked() {
        let rec = r#"{"id":"a","body":"Tim has apples.","question":"How many apples?","answer":1}"#;
        assert!(Dataset::parse("t", rec).is_err());
        let rec =
            r#"{"id":"a","body":"Tim has 3 apples.","question":"How many apples.","answer":1}"#;
        assert!(Dataset::parse("t", rec).is_err());
    }

    #[test]
    fn jsonl_roundtrip() {
        let d = Dataset::parse("t", FIG1).unwrap();
        let back = Dataset::parse("t", &d.to_jsonl()).unwrap();
        assert_eq!(back, d);
    }
}
