//! Noisy variants: one extra sentence carrying an irrelevant quantity,
//! bound to a new subject, a new entity, or a new modifier.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AnnotateError, Annotation, Annotator, Dataset, MWProblem};
use crate::lexicon::Lexicon;
use crate::quantity::{extract_quantities, Anchor, Extraction, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseKind {
    NewSubject,
    NewEntity,
    NewModifier,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [
        NoiseKind::NewSubject,
        NoiseKind::NewEntity,
        NoiseKind::NewModifier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::NewSubject => "new-subject",
            NoiseKind::NewEntity => "new-entity",
            NoiseKind::NewModifier => "new-modifier",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown noise kind `{s}` (new-subject|new-entity|new-modifier)")
            })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("{id}: {msg}")]
    Analysis { id: String, msg: String },
    #[error("{id}: no unused {pool} left for {kind} noise")]
    PoolExhausted {
        id: String,
        kind: NoiseKind,
        pool: &'static str,
    },
    #[error("{id}: noise sentence does not annotate: {source}")]
    Annotate { id: String, source: AnnotateError },
}

/// Words available for injection, drawn from a dataset's vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoisePools {
    pub subjects: BTreeSet<String>,
    pub entities: BTreeSet<String>,
    pub modifiers: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
    pub pools: NoisePools,
}

fn annotation_of(p: &MWProblem, lex: &Lexicon) -> Result<Annotation, AnnotateError> {
    match &p.annotation {
        Some(a) => Ok(a.clone()),
        None => Annotator::new(lex).annotate_text(&p.body, &p.question),
    }
}

/// Names, nouns and adjectives a problem already uses.
fn own_words(ann: &Annotation, lex: &Lexicon) -> NoisePools {
    let mut own = NoisePools::default();
    for t in ann.sentences.iter().flat_map(|s| &s.tokens) {
        if t.pos == "NNP" || lex.words.is_name(&t.lemma) {
            own.subjects.insert(t.lemma.clone());
        } else if t.pos.starts_with("NN") {
            own.entities.insert(t.lemma.clone());
        } else if t.pos == "JJ" {
            own.modifiers.insert(t.lemma.clone());
        }
    }
    own
}

impl NoisePools {
    /// Collects names, countable quantity entities and attributive
    /// adjectives from every problem that annotates.
    pub fn from_dataset(dataset: &Dataset, lex: &Lexicon) -> NoisePools {
        let mut pools = NoisePools::default();
        for p in &dataset.problems {
            let Ok(ann) = annotation_of(p, lex) else {
                continue;
            };
            for s in &ann.sentences {
                for t in &s.tokens {
                    if t.pos == "NNP" && lex.words.is_name(&t.lemma) {
                        pools.subjects.insert(t.lemma.clone());
                    }
                    if t.pos == "JJ"
                        && t.rel == "amod"
                        && !matches!(t.lemma.as_str(), "many" | "much")
                    {
                        pools.modifiers.insert(t.lemma.clone());
                    }
                }
            }
            if let Ok(ext) = extract_quantities(&ann, lex) {
                for q in &ext.quantities {
                    let e = &q.entity;
                    if e != "#" && !lex.words.is_measure(e) && !lex.words.is_temporal(e) {
                        pools.entities.insert(e.clone());
                    }
                }
            }
        }
        pools
    }

    /// Pool entries unrelated to anything the problem mentions.
    fn available(&self, own: &NoisePools, lex: &Lexicon) -> NoisePools {
        NoisePools {
            subjects: self.subjects.difference(&own.subjects).cloned().collect(),
            entities: self
                .entities
                .iter()
                .filter(|e| !own.entities.iter().any(|o| lex.related(e, o)))
                .cloned()
                .collect(),
            modifiers: self.modifiers.difference(&own.modifiers).cloned().collect(),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// How the question names what it asks for, e.g. "apples" or "pounds of
/// cherries".
fn asked_phrase(ext: &Extraction, lex: &Lexicon) -> String {
    let q = &ext.question;
    match (q.unit.as_str(), q.entity.as_str()) {
        ("#", e) => lex.words.plural_of(e),
        (u, "#") => lex.words.plural_of(u),
        (u, e) => format!("{} of {}", lex.words.plural_of(u), lex.words.plural_of(e)),
    }
}

/// The question's modifier, else one attached to a body quantity of the
/// asked entity.
fn asked_modifier(ext: &Extraction) -> Option<String> {
    let q = &ext.question;
    q.roles.get(&Role::Modifier).cloned().or_else(|| {
        ext.quantities
            .iter()
            .filter(|x| x.entity == q.entity && x.unit == q.unit)
            .find_map(|x| x.roles.get(&Role::Modifier).cloned())
    })
}

fn named_subject(ext: &Extraction, lex: &Lexicon) -> Option<String> {
    if let Anchor::Subject(s) = &ext.question.anchor {
        if lex.words.is_name(s) {
            return Some(s.clone());
        }
    }
    ext.quantities
        .iter()
        .filter_map(|x| x.roles.get(&Role::Nsubj))
        .find(|s| lex.words.is_name(s))
        .cloned()
}

fn pick<'a>(pool: &'a BTreeSet<String>, rng: &mut ChaCha8Rng) -> Option<&'a String> {
    pool.iter().collect::<Vec<_>>().choose(rng).copied()
}

/// Whether the question asks about a group ("they", "we") that a new
/// subject with the asked entity would join.
fn collective_question(ann: &Annotation) -> bool {
    ann.question().is_some_and(|q| {
        q.tokens
            .iter()
            .any(|t| t.rel == "nsubj" && matches!(t.lemma.to_lowercase().as_str(), "they" | "we"))
    })
}

/// The noise sentence for one problem.
pub fn noise_sentence(
    p: &MWProblem,
    spec: &NoiseSpec,
    lex: &Lexicon,
) -> Result<String, NoiseError> {
    let analysis = |msg: String| NoiseError::Analysis {
        id: p.id.clone(),
        msg,
    };
    let ann = annotation_of(p, lex).map_err(|e| analysis(e.to_string()))?;
    let ext = extract_quantities(&ann, lex).map_err(|e| analysis(e.to_string()))?;
    let free = spec.pools.available(&own_words(&ann, lex), lex);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(&format!("{}{}", p.id, spec.kind)));
    let exhausted = |pool| NoiseError::PoolExhausted {
        id: p.id.clone(),
        kind: spec.kind,
        pool,
    };
    let n: u32 = rng.gen_range(2..=9);
    let sentence = match spec.kind {
        NoiseKind::NewSubject => {
            let s = pick(&free.subjects, &mut rng).ok_or_else(|| exhausted("subjects"))?;
            let m = asked_modifier(&ext)
                .map(|m| format!("{m} "))
                .unwrap_or_default();
            format!("{s} has {n} {m}{}.", asked_phrase(&ext, lex))
        }
        NoiseKind::NewEntity => {
            let e = pick(&free.entities, &mut rng).ok_or_else(|| exhausted("entities"))?;
            match named_subject(&ext, lex) {
                Some(s) => format!("{s} also has {n} {}.", lex.words.plural_of(e)),
                // Nobody to attach to: an unused name carries the new entity.
                None => {
                    let s = pick(&free.subjects, &mut rng).ok_or_else(|| exhausted("subjects"))?;
                    format!("{s} has {n} {}.", lex.words.plural_of(e))
                }
            }
        }
        NoiseKind::NewModifier => {
            let s = pick(&free.subjects, &mut rng).ok_or_else(|| exhausted("subjects"))?;
            let m = pick(&free.modifiers, &mut rng).ok_or_else(|| exhausted("modifiers"))?;
            format!("{s} has {n} {m} {}.", asked_phrase(&ext, lex))
        }
    };
    Ok(sentence)
}

/// One variant per spec: the noise sentence goes right before the question.
/// Empty when the sentence would change the answer, i.e. a new subject
/// holding the asked entity under a collective question.
pub fn make_noisy_variants(
    p: &MWProblem,
    spec: &NoiseSpec,
    lex: &Lexicon,
) -> Result<Vec<MWProblem>, NoiseError> {
    if spec.kind != NoiseKind::NewEntity {
        let ann = annotation_of(p, lex).map_err(|e| NoiseError::Analysis {
            id: p.id.clone(),
            msg: e.to_string(),
        })?;
        if collective_question(&ann) {
            return Ok(Vec::new());
        }
    }
    let sentence = noise_sentence(p, spec, lex)?;
    let mut v = p.clone();
    v.id = format!("{}-{}", p.id, spec.kind);
    v.body = format!("{} {}", p.body.trim_end(), sentence);
    if let Some(ann) = &mut v.annotation {
        let s = Annotator::new(lex)
            .annotate_sentence(&sentence, ann.sentences.len())
            .map_err(|source| NoiseError::Annotate {
                id: p.id.clone(),
                source,
            })?;
        let at = ann.body().len();
        ann.sentences.insert(at, s);
    }
    Ok(vec![v])
}

/// Variants of every problem for each kind, in problem-major order, with
/// pools drawn from the dataset itself.
pub fn noisy_dataset(
    dataset: &Dataset,
    kinds: &[NoiseKind],
    seed: u64,
    lex: &Lexicon,
) -> Result<Dataset, NoiseError> {
    let pools = NoisePools::from_dataset(dataset, lex);
    let mut problems = Vec::new();
    for p in &dataset.problems {
        for &kind in kinds {
            let spec = NoiseSpec {
                kind,
                seed,
                pools: pools.clone(),
            };
            problems.extend(make_noisy_variants(p, &spec, lex)?);
        }
    }
    Ok(Dataset {
        name: format!("{}-noisy", dataset.name),
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Value;

    fn flowers() -> MWProblem {
        MWProblem::new(
            "fl",
            "Tim has 10 yellow flowers and 12 red flowers.",
            "How many flowers does Tim have?",
            Value::from_int(22),
        )
    }

    fn pools() -> NoisePools {
        let set = |w: &[&str]| w.iter().map(|s| s.to_string()).collect();
        NoisePools {
            subjects: set(&["Mary", "Tim"]),
            entities: set(&["book", "flower", "rose"]),
            modifiers: set(&["blue", "red"]),
        }
    }

    fn variant(kind: NoiseKind) -> MWProblem {
        let lex = Lexicon::bundled();
        let spec = NoiseSpec {
            kind,
            seed: 7,
            pools: pools(),
        };
        make_noisy_variants(&flowers(), &spec, &lex)
            .unwrap()
            .remove(0)
    }

    fn extra_sentence(v: &MWProblem) -> &str {
        v.body.strip_prefix(flowers().body.as_str()).unwrap().trim()
    }

    #[test]
    fn new_subject_uses_unused_name() {
        let v = variant(NoiseKind::NewSubject);
        assert_eq!(v.id, "fl-new-subject");
        assert_eq!(v.answer, Value::from_int(22));
        assert_eq!(v.question, flowers().question);
        let s = extra_sentence(&v);
        assert!(
            s.starts_with("Mary has ") && s.ends_with(" yellow flowers."),
            "{s}"
        );
    }

    #[test]
    fn new_entity_avoids_related_nouns() {
        let s = variant(NoiseKind::NewEntity);
        let s = extra_sentence(&s);
        // rose is a flower, so only book qualifies.
        assert!(
            s.starts_with("Tim also has ") && s.ends_with(" books."),
            "{s}"
        );
    }

    #[test]
    fn new_modifier_uses_unused_adjective() {
        let v = variant(NoiseKind::NewModifier);
        assert!(extra_sentence(&v).ends_with(" blue flowers."));
    }

    #[test]
    fn collective_question_skips_new_holders() {
        let p = MWProblem::new(
            "cq",
            "Tim has 3 red flowers. Mary has 4 red flowers.",
            "How many red flowers do they have?",
            Value::from_int(7),
        );
        let lex = Lexicon::bundled();
        let spec = |kind| NoiseSpec {
            kind,
            seed: 0,
            pools: pools(),
        };
        assert!(make_noisy_variants(&p, &spec(NoiseKind::NewSubject), &lex)
            .unwrap()
            .is_empty());
        assert!(make_noisy_variants(&p, &spec(NoiseKind::NewModifier), &lex)
            .unwrap()
            .is_empty());
        assert_eq!(
            make_noisy_variants(&p, &spec(NoiseKind::NewEntity), &lex)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(
            variant(NoiseKind::NewSubject),
            variant(NoiseKind::NewSubject)
        );
    }

    #[test]
    fn exhausted_pool_is_an_error() {
        let lex = Lexicon::bundled();
        let mut pools = pools();
        pools.subjects.remove("Mary");
        let spec = NoiseSpec {
            kind: NoiseKind::NewSubject,
            seed: 1,
            pools,
        };
        assert!(matches!(
            make_noisy_variants(&flowers(), &spec, &lex),
            Err(NoiseError::PoolExhausted {
                pool: "subjects",
                ..
            })
        ));
    }

    #[test]
    fn external_annotation_gets_the_sentence_too() {
        let lex = Lexicon::bundled();
        let mut p = flowers();
        p.annotation = Some(
            Annotator::new(&lex)
                .annotate_text(&p.body, &p.question)
                .unwrap(),
        );
        let spec = NoiseSpec {
            kind: NoiseKind::NewEntity,
            seed: 7,
            pools: pools(),
        };
        let v = make_noisy_variants(&p, &spec, &lex).unwrap().remove(0);
        let ann = v.annotation.unwrap();
        assert_eq!(ann.sentences.len(), 3);
        assert!(ann.question().is_some());
        assert!(ann.sentences[1].text().contains("books"));
        ann.validate().unwrap();
    }
}
