//! Bundled lexical resources: verb classes, the hypernym lexicon used for
//! entailment, and the word table driving the restricted annotator.
//!
//! All three are plain text, one entry per line, `#` comments allowed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const BUNDLED_VERB_CLASSES: &str = include_str!("../assets/verb_classes.txt");
pub const BUNDLED_HYPERNYMS: &str = include_str!("../assets/hypernyms.txt");
pub const BUNDLED_WORDS: &str = include_str!("../assets/words.txt");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {msg}")]
    Syntax {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Whether a verb raises, lowers, or merely states its subject's quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerbClass {
    Positive,
    Negative,
    Stative,
}

impl VerbClass {
    pub fn flipped(self) -> Self {
        match self {
            VerbClass::Positive => VerbClass::Negative,
            VerbClass::Negative => VerbClass::Positive,
            VerbClass::Stative => VerbClass::Stative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerbClass::Positive => "positive",
            VerbClass::Negative => "negative",
            VerbClass::Stative => "stative",
        }
    }
}

impl fmt::Display for VerbClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerbClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "positive" => Ok(VerbClass::Positive),
            "negative" => Ok(VerbClass::Negative),
            "stative" => Ok(VerbClass::Stative),
            other => Err(format!("unknown verb class `{other}`")),
        }
    }
}

/// A word-table reading: one possible (lemma, part-of-speech) for a surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reading {
    pub lemma: String,
    pub pos: String,
}

/// Surface-form table used by the annotator plus semantic noun classes.
#[derive(Debug, Clone, Default)]
pub struct WordTable {
    readings: HashMap<String, Vec<Reading>>,
    temporal_nouns: HashSet<String>,
    measure_nouns: HashSet<String>,
    names: BTreeSet<String>,
    plurals: HashMap<String, String>,
}

impl WordTable {
    /// All readings for a surface form (matched case-insensitively, except
    /// that names keep their capitalization).
    pub fn lookup(&self, surface: &str) -> &[Reading] {
        if let Some(r) = self.readings.get(surface) {
            return r;
        }
        let lower = surface.to_lowercase();
        self.readings.get(&lower).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_temporal(&self, lemma: &str) -> bool {
        self.temporal_nouns.contains(lemma)
    }

    pub fn is_measure(&self, lemma: &str) -> bool {
        self.measure_nouns.contains(lemma)
    }

    pub fn is_name(&self, word: &str) -> bool {
        self.names.contains(word)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Plural surface form of a noun lemma.
    pub fn plural_of(&self, lemma: &str) -> String {
        self.plurals
            .get(lemma)
            .cloned()
            .unwrap_or_else(|| regular_plural(lemma))
    }

    fn add(&mut self, surface: &str, lemma: &str, pos: &str) {
        let entry = self.readings.entry(surface.to_string()).or_default();
        let r = Reading {
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        };
        if !entry.contains(&r) {
            entry.push(r);
        }
    }

    fn add_noun(&mut self, lemma: &str, plural: Option<&str>) {
        let plural = plural
            .map(str::to_string)
            .unwrap_or_else(|| regular_plural(lemma));
        self.add(lemma, lemma, "NN");
        self.add(&plural, lemma, "NNS");
        self.plurals.insert(lemma.to_string(), plural);
    }

    fn add_verb(&mut self, fields: &[&str]) {
        let lemma = fields[0];
        let past = fields
            .get(1)
            .map(|s| s.to_string())
            .unwrap_or_else(|| regular_past(lemma));
        let part = fields
            .get(2)
            .map(|s| s.to_string())
            .unwrap_or_else(|| past.clone());
        let ing = fields
            .get(3)
            .map(|s| s.to_string())
            .unwrap_or_else(|| regular_ing(lemma));
        let third = fields
            .get(4)
            .map(|s| s.to_string())
            .unwrap_or_else(|| regular_plural(lemma));
        self.add(lemma, lemma, "VB");
        self.add(lemma, lemma, "VBP");
        self.add(&third, lemma, "VBZ");
        self.add(&past, lemma, "VBD");
        self.add(&part, lemma, "VBN");
        self.add(&ing, lemma, "VBG");
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, LexiconError> {
        let mut table = WordTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let syntax = |msg: &str| LexiconError::Syntax {
                file: file.to_string(),
                line: i + 1,
                msg: msg.to_string(),
            };
            match fields[0] {
                "noun" if fields.len() >= 2 => table.add_noun(fields[1], fields.get(2).copied()),
                "time" if fields.len() >= 2 => {
                    table.add_noun(fields[1], fields.get(2).copied());
                    table.temporal_nouns.insert(fields[1].to_string());
                }
                "measure" if fields.len() >= 2 => {
                    table.add_noun(fields[1], fields.get(2).copied());
                    table.measure_nouns.insert(fields[1].to_string());
                }
                "verb" if fields.len() >= 2 => table.add_verb(&fields[1..]),
                "adj" if fields.len() >= 2 => table.add(fields[1], fields[1], "JJ"),
                "name" if fields.len() >= 2 => {
                    table.add(fields[1], fields[1], "NNP");
                    table.names.insert(fields[1].to_string());
                }
                "word" if fields.len() == 4 => table.add(fields[1], fields[2], fields[3]),
                _ => {
                    return Err(syntax(
                        "expected `noun|time|measure|verb|adj|name|word ...`",
                    ))
                }
            }
        }
        Ok(table)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

fn ends_with_consonant_y(w: &str) -> bool {
    let b = w.as_bytes();
    b.len() >= 2 && b[b.len() - 1] == b'y' && !b"aeiou".contains(&b[b.len() - 2])
}

pub fn regular_plural(w: &str) -> String {
    if ["s", "sh", "ch", "x", "z", "o"]
        .iter()
        .any(|s| w.ends_with(s))
    {
        format!("{w}es")
    } else if ends_with_consonant_y(w) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{w}s")
    }
}

fn regular_past(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else if ends_with_consonant_y(w) {
        format!("{}ied", &w[..w.len() - 1])
    } else {
        format!("{w}ed")
    }
}

fn regular_ing(w: &str) -> String {
    if let Some(stem) = w.strip_suffix("ie") {
        format!("{stem}ying")
    } else if w.ends_with('e') && !w.ends_with("ee") && w.len() > 2 {
        format!("{}ing", &w[..w.len() - 1])
    } else {
        format!("{w}ing")
    }
}

/// Verb classes, hypernym edges and the annotator word table.
#[derive(Debug, Clone)]
pub struct Lexicon {
    verb_classes: BTreeMap<String, VerbClass>,
    hypernyms: BTreeMap<String, BTreeSet<String>>,
    pub words: WordTable,
}

impl Lexicon {
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED_VERB_CLASSES, BUNDLED_HYPERNYMS, BUNDLED_WORDS)
            .expect("bundled lexicon files are well-formed")
    }

    pub fn from_texts(verbs: &str, hypernyms: &str, words: &str) -> Result<Self, LexiconError> {
        Ok(Lexicon {
            verb_classes: parse_verb_classes(verbs, "verb_classes")?,
            hypernyms: parse_hypernyms(hypernyms, "hypernyms")?,
            words: WordTable::parse(words, "words")?,
        })
    }

    pub fn load(verbs: &Path, hypernyms: &Path, words: &Path) -> Result<Self, LexiconError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| LexiconError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Ok(Lexicon {
            verb_classes: parse_verb_classes(&read(verbs)?, &verbs.display().to_string())?,
            hypernyms: parse_hypernyms(&read(hypernyms)?, &hypernyms.display().to_string())?,
            words: WordTable::parse(&read(words)?, &words.display().to_string())?,
        })
    }

    pub fn verb_class(&self, verb: &str) -> Option<VerbClass> {
        self.verb_classes.get(verb).copied()
    }

    /// Adds a hypernym edge; used by tests checking monotonicity.
    pub fn add_hypernym(&mut self, hyponym: &str, hypernym: &str) {
        self.hypernyms
            .entry(normalize(hyponym))
            .or_default()
            .insert(normalize(hypernym));
    }

    /// `specific` entails `general` if they are equal after normalization or
    /// `general` lies on a hypernym path above `specific`.
    pub fn entails(&self, specific: &str, general: &str) -> bool {
        let a = normalize(specific);
        let b = normalize(general);
        if a == b {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![a];
        while let Some(w) = stack.pop() {
            if let Some(parents) = self.hypernyms.get(&w) {
                for p in parents {
                    if *p == b {
                        return true;
                    }
                    if seen.insert(p.clone()) {
                        stack.push(p.clone());
                    }
                }
            }
        }
        false
    }

    /// True when either word entails the other.
    pub fn related(&self, a: &str, b: &str) -> bool {
        self.entails(a, b) || self.entails(b, a)
    }
}

/// Lemma normalization: common nouns lowercase and singular; names keep case.
pub fn normalize(word: &str) -> String {
    let starts_upper = word.chars().next().is_some_and(char::is_uppercase);
    if starts_upper {
        return word.to_string();
    }
    singularize(word)
}

fn singularize(w: &str) -> String {
    if w.len() > 4 {
        if let Some(stem) = w.strip_suffix("ies") {
            return format!("{stem}y");
        }
    }
    for suffix in ["ches", "shes", "xes", "sses"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn parse_verb_classes(text: &str, file: &str) -> Result<BTreeMap<String, VerbClass>, LexiconError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| LexiconError::Syntax {
            file: file.to_string(),
            line: i + 1,
            msg,
        };
        if fields.len() != 2 {
            return Err(err("expected `word class`".into()));
        }
        let class = fields[1].parse().map_err(err)?;
        out.insert(fields[0].to_string(), class);
    }
    Ok(out)
}

fn parse_hypernyms(
    text: &str,
    file: &str,
) -> Result<BTreeMap<String, BTreeSet<String>>, LexiconError> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(LexiconError::Syntax {
                file: file.to_string(),
                line: i + 1,
                msg: "expected `hyponym hypernym`".into(),
            });
        }
        out.entry(normalize(fields[0]))
            .or_default()
            .insert(normalize(fields[1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_loads() {
        let lex = Lexicon::bundled();
        assert_eq!(lex.verb_class("buy"), Some(VerbClass::Positive));
        assert_eq!(lex.verb_class("eat"), Some(VerbClass::Negative));
        assert_eq!(lex.verb_class("have"), Some(VerbClass::Stative));
    }

    #[test]
    fn entailment_follows_hypernym_paths() {
        let lex = Lexicon::bundled();
        assert!(lex.entails("rose", "flower"));
        assert!(lex.entails("lily", "flower"));
        assert!(lex.entails("minute", "time"));
        assert!(!lex.entails("flower", "rose"));
        assert!(!lex.entails("book", "flower"));
    }

    #[test]
    fn entailment_is_reflexive_after_normalization() {
        let lex = Lexicon::bundled();
        assert!(lex.entails("apple", "apple"));
        assert!(lex.entails("apples", "apple"));
        assert!(lex.entails("cherries", "cherry"));
        assert!(lex.entails("Tim", "Tim"));
    }

    #[test]
    fn word_table_generates_inflections() {
        let lex = Lexicon::bundled();
        let r = lex.words.lookup("bought");
        assert!(r.iter().any(|r| r.lemma == "buy" && r.pos == "VBD"));
        let r = lex.words.lookup("roses");
        assert!(r.iter().any(|r| r.lemma == "rose" && r.pos == "NNS"));
        let r = lex.words.lookup("lilies");
        assert!(r.iter().any(|r| r.lemma == "lily" && r.pos == "NNS"));
        assert_eq!(lex.words.plural_of("candy"), "candies");
    }

    #[test]
    fn malformed_lines_are_reported() {
        let err = parse_verb_classes("buy positive\nsell\n", "v").unwrap_err();
        assert!(err.to_string().contains("v:2"));
        let err = parse_verb_classes("buy sideways\n", "v").unwrap_err();
        assert!(err.to_string().contains("sideways"));
    }
}
