//! Solution-type identification: 26 binary features over the extracted
//! quantities and a linear classifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Annotation;
use crate::lexicon::{normalize, Lexicon, VerbClass};
use crate::linear::{LinearModel, ModelError};
use crate::quantity::{Anchor, Extraction, Quantity};

pub use crate::logicform::SolutionType;

pub const N_FEATURES: usize = 26;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "f1_vcu_positive",
    "f2_exists_positive",
    "f3_exists_negative",
    "f4_exists_stative",
    "f5_more_than_two_related",
    "f6_two_changes",
    "f7_positive_after_question",
    "f8_negative_after_question",
    "f9_stative_latest",
    "f10_stative_before_question",
    "f11_question_latest",
    "f12_question_earliest",
    "f13_same_verb",
    "f14_all_at_question_time",
    "f15_same_time",
    "f16_map_larger",
    "f17_map_from_each",
    "f18_map_to_each",
    "f19_three_share_verb",
    "f20_total_word",
    "f21_comparative",
    "f22_left",
    "f23_number_in_question",
    "f24_the_rest",
    "f25_each_noun",
    "f26_unknown_stative",
];

pub fn feature_names() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct StiConfig {
    /// Count "together" as a total keyword for f20.
    pub together_is_total: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StiFeatures(pub [bool; N_FEATURES]);

impl StiFeatures {
    /// Feature `k`, 1-based.
    pub fn get(&self, k: usize) -> bool {
        self.0[k - 1]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn named(&self) -> BTreeMap<&'static str, bool> {
        FEATURE_NAMES.iter().copied().zip(self.0).collect()
    }
}

pub fn extract_sti_features(
    ext: &Extraction,
    ann: &Annotation,
    lex: &Lexicon,
    cfg: &StiConfig,
) -> StiFeatures {
    let q = &ext.question;
    let d: Vec<&Quantity> = ext.quantities.iter().filter(|x| x.relevance == 2).collect();
    let with_action = |a: VerbClass| d.iter().filter(move |x| x.action == a);
    let t_u = q.time;
    let max_t = d.iter().map(|x| x.time).max();
    let min_t = d.iter().map(|x| x.time).min();
    let mut f = [false; N_FEATURES];

    f[0] = q.verb_class == VerbClass::Positive;
    f[1] = with_action(VerbClass::Positive).next().is_some();
    f[2] = with_action(VerbClass::Negative).next().is_some();
    f[3] = with_action(VerbClass::Stative).next().is_some();
    f[4] = d.len() > 2;
    f[5] = d.iter().filter(|x| x.action != VerbClass::Stative).count() == 2;
    f[6] = with_action(VerbClass::Positive).any(|x| t_u < x.time);
    f[7] = with_action(VerbClass::Negative).any(|x| t_u < x.time);
    f[8] = with_action(VerbClass::Stative).any(|x| Some(x.time) == max_t);
    f[9] = with_action(VerbClass::Stative).any(|x| x.time < t_u);
    f[10] = max_t.is_some_and(|m| t_u >= m);
    f[11] = min_t.is_some_and(|m| t_u <= m);
    f[12] = !d.is_empty() && d.iter().all(|x| x.verb == d[0].verb);
    f[13] = !d.is_empty() && d.iter().all(|x| x.time == t_u);
    f[14] = !d.is_empty() && d.iter().all(|x| x.time == d[0].time);

    let related_maps: Vec<(&Quantity, &Quantity)> = ext
        .maps
        .iter()
        .filter_map(|m| Some((ext.quantity(&m.from)?, ext.quantity(&m.to)?)))
        .filter(|(a, b)| a.relevance == 2 && b.relevance == 1)
        .collect();
    f[15] = related_maps.iter().any(|(a, b)| a.value > b.value);
    f[16] = related_maps.iter().any(|(a, _)| a.each_word);
    f[17] = related_maps.iter().any(|(_, b)| b.each_word);

    let mut verb_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for x in &d {
        *verb_counts.entry(x.verb.as_str()).or_default() += 1;
    }
    f[18] = verb_counts.values().any(|&c| c >= 3);

    let question = ann.question();
    let qtoks: Vec<(String, String)> = question
        .map(|s| {
            s.tokens
                .iter()
                .map(|t| (t.surface.to_lowercase(), t.pos.clone()))
                .collect()
        })
        .unwrap_or_default();
    let qlemmas: Vec<String> = question
        .map(|s| s.tokens.iter().map(|t| t.lemma.to_lowercase()).collect())
        .unwrap_or_default();
    let has_word = |w: &str| qtoks.iter().any(|(s, _)| s == w) || qlemmas.iter().any(|l| l == w);
    let has_bigram = |a: &str, b: &str| qtoks.windows(2).any(|p| p[0].0 == a && p[1].0 == b);

    f[19] = has_word("total")
        || has_word("altogether")
        || has_word("sum")
        || has_bigram("in", "all")
        || (cfg.together_is_total && has_word("together"));
    f[20] = has_word("more") || has_word("than") || qtoks.iter().any(|(_, p)| p == "RBR");
    f[21] = has_word("left");
    f[22] = qtoks.iter().any(|(_, p)| p == "CD");
    f[23] = the_rest(ann, &q.entity, lex);
    f[24] = question.is_some_and(|s| {
        s.tokens
            .windows(2)
            .any(|p| p[0].lemma.eq_ignore_ascii_case("each") && p[1].is_noun() && p[1].pos != "PRP")
    });
    f[25] =
        matches!(q.anchor, Anchor::Unknown | Anchor::Nmod(_)) && q.verb_class == VerbClass::Stative;
    StiFeatures(f)
}

/// "the rest", then a verb, then the asked entity, within one body sentence.
fn the_rest(ann: &Annotation, entity: &str, lex: &Lexicon) -> bool {
    ann.body().iter().any(|s| {
        let t = &s.tokens;
        (0..t.len().saturating_sub(1)).any(|i| {
            if !(t[i].lemma.eq_ignore_ascii_case("the") && t[i + 1].lemma == "rest") {
                return false;
            }
            let Some(v) = (i + 2..t.len()).find(|&k| t[k].is_verb()) else {
                return false;
            };
            t[v + 1..]
                .iter()
                .any(|x| x.is_noun() && lex.entails(&normalize(&x.lemma), entity))
        })
    })
}

/// Runs the model and returns the argmax type and per-class probabilities.
/// Class order in the model must be [`SolutionType::ALL`].
pub fn predict_solution_type(
    features: &StiFeatures,
    model: &LinearModel,
) -> Result<(SolutionType, Vec<(SolutionType, f64)>), ModelError> {
    model.check_features(&feature_names())?;
    let classes: Vec<String> = SolutionType::ALL.iter().map(|t| t.to_string()).collect();
    if model.classes != classes {
        return Err(ModelError::FeatureMismatch(format!(
            "classes {:?}, expected {:?}",
            model.classes, classes
        )));
    }
    let x = features.to_vec();
    let probs = model.probabilities(&x);
    let best = SolutionType::ALL[model.argmax(&x)];
    Ok((best, SolutionType::ALL.into_iter().zip(probs).collect()))
}
