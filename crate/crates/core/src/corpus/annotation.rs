//! Linguistic annotation of a problem: tokens, lemmas, part-of-speech tags,
//! one dependency tree per sentence, and tense/aspect on verbs.
//!
//! The interchange format is CoNLL-like: one token per line with the tab
//! separated columns `index surface lemma pos head relation tense aspect`,
//! `_` for an absent tense/aspect, and a blank line between sentences.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("annotation line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("sentence {sentence}: {msg}")]
    Invalid { sentence: usize, msg: String },
    #[error("cannot read annotation {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tense {
    Past,
    Present,
    Future,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aspect {
    Perfect,
    Simple,
    Progressive,
}

impl Tense {
    pub const ALL: [Tense; 3] = [Tense::Past, Tense::Present, Tense::Future];
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Perfect, Aspect::Simple, Aspect::Progressive];
}

impl fmt::Display for Tense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Tense {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Past" => Ok(Tense::Past),
            "Present" => Ok(Tense::Present),
            "Future" => Ok(Tense::Future),
            other => Err(format!("tense `{other}` is not one of Past/Present/Future")),
        }
    }
}

impl FromStr for Aspect {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Perfect" => Ok(Aspect::Perfect),
            "Simple" => Ok(Aspect::Simple),
            "Progressive" => Ok(Aspect::Progressive),
            other => Err(format!(
                "aspect `{other}` is not one of Perfect/Simple/Progressive"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    /// 1-based index of the head token; 0 marks the root.
    pub head: usize,
    pub rel: String,
    pub tense: Option<Tense>,
    pub aspect: Option<Aspect>,
}

impl Token {
    pub fn is_verb(&self) -> bool {
        self.pos.starts_with("VB")
    }

    pub fn is_noun(&self) -> bool {
        self.pos.starts_with("NN") || self.pos == "$" || self.pos == "PRP"
    }

    pub fn is_number(&self) -> bool {
        self.pos == "CD"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Token at a 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// 1-based indices of the dependents of `head` (0 for the root).
    pub fn children(&self, head: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == head)
            .map(|(i, _)| i + 1)
    }

    pub fn child_with_rel(&self, head: usize, rel: &str) -> Option<usize> {
        self.children(head).find(|&c| self.token(c).rel == rel)
    }

    pub fn root(&self) -> Option<usize> {
        self.children(0).next()
    }

    pub fn is_question(&self) -> bool {
        self.tokens.last().is_some_and(|t| t.surface == "?")
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let glue = i == 0
                || matches!(t.surface.as_str(), "." | "," | "?")
                || self.tokens[i - 1].surface == "$";
            if !glue {
                out.push(' ');
            }
            out.push_str(&t.surface);
        }
        out
    }

    /// Checks the single-root tree invariant and head-index ranges.
    pub fn validate(&self, sentence: usize) -> Result<(), AnnotationError> {
        let invalid = |msg: String| AnnotationError::Invalid { sentence, msg };
        let n = self.tokens.len();
        if n == 0 {
            return Err(invalid("empty sentence".into()));
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(invalid(format!("expected exactly one root, found {roots}")));
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.head > n {
                return Err(invalid(format!(
                    "token {} points to head {} outside 0..={n}",
                    i + 1,
                    t.head
                )));
            }
            if t.head == i + 1 {
                return Err(invalid(format!("token {} is its own head", i + 1)));
            }
        }
        for start in 1..=n {
            let mut cur = start;
            for _ in 0..=n {
                cur = self.token(cur).head;
                if cur == 0 {
                    break;
                }
            }
            if cur != 0 {
                return Err(invalid(format!("cycle through token {start}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Annotation {
    pub sentences: Vec<Sentence>,
}

impl Annotation {
    pub fn validate(&self) -> Result<(), AnnotationError> {
        self.sentences
            .iter()
            .enumerate()
            .try_for_each(|(i, s)| s.validate(i + 1))
    }

    /// Body sentences are everything but a trailing question.
    pub fn body(&self) -> &[Sentence] {
        match self.sentences.last() {
            Some(s) if s.is_question() => &self.sentences[..self.sentences.len() - 1],
            _ => &self.sentences,
        }
    }

    pub fn question(&self) -> Option<&Sentence> {
        self.sentences.last().filter(|s| s.is_question())
    }

    pub fn to_conll(&self) -> String {
        let mut out = String::new();
        for (si, s) in self.sentences.iter().enumerate() {
            if si > 0 {
                out.push('\n');
            }
            for (i, t) in s.tokens.iter().enumerate() {
                let tense = t.tense.map_or("_".to_string(), |x| x.to_string());
                let aspect = t.aspect.map_or("_".to_string(), |x| x.to_string());
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    i + 1,
                    t.surface,
                    t.lemma,
                    t.pos,
                    t.head,
                    t.rel,
                    tense,
                    aspect
                ));
            }
        }
        out
    }

    pub fn parse_conll(text: &str) -> Result<Annotation, AnnotationError> {
        let mut sentences = Vec::new();
        let mut current = Sentence::default();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                if !current.tokens.is_empty() {
                    sentences.push(std::mem::take(&mut current));
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = if line.contains('\t') {
                line.split('\t').collect()
            } else {
                line.split_whitespace().collect()
            };
            let fmt_err = |msg: String| AnnotationError::Format { line: line_no, msg };
            if cols.len() != 8 {
                return Err(fmt_err(format!("expected 8 columns, found {}", cols.len())));
            }
            let index: usize = cols[0]
                .parse()
                .map_err(|_| fmt_err(format!("bad token index `{}`", cols[0])))?;
            if index != current.tokens.len() + 1 {
                return Err(fmt_err(format!(
                    "token index {index} out of sequence (expected {})",
                    current.tokens.len() + 1
                )));
            }
            let head: usize = cols[4]
                .parse()
                .map_err(|_| fmt_err(format!("bad head index `{}`", cols[4])))?;
            let tense = match cols[6] {
                "_" => None,
                t => Some(t.parse().map_err(fmt_err)?),
            };
            let aspect = match cols[7] {
                "_" => None,
                a => Some(a.parse().map_err(fmt_err)?),
            };
            current.tokens.push(Token {
                surface: cols[1].to_string(),
                lemma: cols[2].to_string(),
                pos: cols[3].to_string(),
                head,
                rel: cols[5].to_string(),
                tense,
                aspect,
            });
        }
        if !current.tokens.is_empty() {
            sentences.push(current);
        }
        let ann = Annotation { sentences };
        ann.validate()?;
        Ok(ann)
    }
}

pub fn read_annotation(path: &Path) -> Result<Annotation, AnnotationError> {
    let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Annotation::parse_conll(&text)
}

pub fn write_annotation(path: &Path, ann: &Annotation) -> Result<(), AnnotationError> {
    std::fs::write(path, ann.to_conll()).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // "Pack 100 candies into 5 boxes."
    const PACK: &str = "\
1\tPack\tpack\tVB\t0\troot\tPresent\tSimple
2\t100\t100\tCD\t3\tnummod\t_\t_
3\tcandies\tcandy\tNNS\t1\tobj\t_\t_
4\tinto\tinto\tIN\t6\tcase\t_\t_
5\t5\t5\tCD\t6\tnummod\t_\t_
6\tboxes\tbox\tNNS\t1\tnmod\t_\t_
7\t.\t.\t.\t1\tpunct\t_\t_
";

    #[test]
    fn accepts_hand_written_pack_sentence() {
        let ann = Annotation::parse_conll(PACK).unwrap();
        assert_eq!(ann.sentences.len(), 1);
        let s = &ann.sentences[0];
        assert_eq!(s.root(), Some(1));
        assert_eq!(s.token(3).lemma, "candy");
        assert_eq!(s.child_with_rel(1, "nmod"), Some(6));
        assert_eq!(s.text(), "Pack 100 candies into 5 boxes.");
    }

    #[test]
    fn rejects_two_roots() {
        let bad = PACK.replace("6\tboxes\tbox\tNNS\t1\tnmod", "6\tboxes\tbox\tNNS\t0\tnmod");
        let err = Annotation::parse_conll(&bad).unwrap_err();
        assert!(err.to_string().contains("exactly one root"), "{err}");
    }

    #[test]
    fn rejects_cycles() {
        let bad = PACK
            .replace("3\tcandies\tcandy\tNNS\t1", "3\tcandies\tcandy\tNNS\t6")
            .replace("6\tboxes\tbox\tNNS\t1", "6\tboxes\tbox\tNNS\t3");
        let err = Annotation::parse_conll(&bad).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn rejects_unknown_tense() {
        let bad = PACK.replace("Present\tSimple", "Pluperfect\tSimple");
        let err = Annotation::parse_conll(&bad).unwrap_err();
        assert!(err.to_string().contains("Pluperfect"), "{err}");
    }

    #[test]
    fn rejects_head_out_of_range() {
        let bad = PACK.replace("7\t.\t.\t.\t1", "7\t.\t.\t.\t9");
        assert!(Annotation::parse_conll(&bad).is_err());
    }

    #[test]
    fn conll_roundtrip() {
        let ann = Annotation::parse_conll(PACK).unwrap();
        let again = Annotation::parse_conll(&ann.to_conll()).unwrap();
        assert_eq!(ann, again);
    }
}
