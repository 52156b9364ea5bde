//! Operand selection for the arithmetic utilities: per-quantity features,
//! the relation prior P(r|s), and exact decoding of
//! P(r|s) * prod_i P(o_i | q_i, L, s) over configurations with exactly two
//! selected quantities.

use std::fmt;

use crate::lexicon::Lexicon;
use crate::linear::{LinearModel, ModelError};
use crate::logicform::{FactSet, SolutionType};
use crate::quantity::{Extraction, Quantity, QuestionQuantity, Role, PLURAL_PRONOUNS};

pub const N_BASE: usize = 29;

pub const BASE_FEATURES: [&str; N_BASE] = [
    "s_addition",
    "s_subtraction",
    "s_multiplication",
    "s_division",
    "in_qmap",
    "value_is_one",
    "n_lt2",
    "n_eq2",
    "n_eq3",
    "n_eq4",
    "n_gt4",
    "entity_match",
    "entity_entail",
    "verb_match",
    "verb_entail",
    "q0_has_nsubj",
    "nsubj_exact",
    "nsubj_quasi",
    "nsubj_unmatch",
    "q0_has_modifier",
    "modifier_match",
    "q0_has_place",
    "place_match",
    "q0_has_temporal",
    "temporal_match",
    "q0_has_xcomp",
    "xcomp_match",
    "nmod_match",
    "subject_linked",
];

const N_TYPE_FEATURES: usize = 4;

/// Base features followed by `Type:feature` conjunctions of every
/// non-type feature with each arithmetic type.
pub fn operand_feature_names() -> Vec<String> {
    let mut names: Vec<String> = BASE_FEATURES.iter().map(|s| s.to_string()).collect();
    for t in SolutionType::ARITHMETIC {
        for f in &BASE_FEATURES[N_TYPE_FEATURES..] {
            names.push(format!("{t}:{f}"));
        }
    }
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectMatch {
    Exact,
    /// The question has no subject or a plural pronoun one.
    Quasi,
    Unmatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperandFeatures {
    pub base: [bool; N_BASE],
    pub stype: SolutionType,
}

impl OperandFeatures {
    pub fn get(&self, name: &str) -> Option<bool> {
        BASE_FEATURES
            .iter()
            .position(|f| *f == name)
            .map(|i| self.base[i])
    }

    pub fn subject_match(&self) -> SubjectMatch {
        if self.get("nsubj_exact") == Some(true) {
            SubjectMatch::Exact
        } else if self.get("nsubj_quasi") == Some(true) {
            SubjectMatch::Quasi
        } else {
            SubjectMatch::Unmatch
        }
    }

    /// Dense vector aligned with [`operand_feature_names`].
    pub fn to_vec(&self) -> Vec<f64> {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        let mut x: Vec<f64> = self.base.iter().map(|&v| b(v)).collect();
        for t in SolutionType::ARITHMETIC {
            for &v in &self.base[N_TYPE_FEATURES..] {
                x.push(b(v && t == self.stype));
            }
        }
        x
    }
}

fn role(roles: &crate::quantity::RoleTags, r: Role) -> Option<&str> {
    roles.get(&r).map(String::as_str)
}

pub fn extract_operand_features(
    q: &Quantity,
    q0: &QuestionQuantity,
    n: usize,
    facts: &FactSet,
    stype: SolutionType,
    lex: &Lexicon,
) -> OperandFeatures {
    let mut f = [false; N_BASE];
    if let Some(i) = SolutionType::ARITHMETIC.iter().position(|&t| t == stype) {
        f[i] = true;
    }
    f[4] = facts
        .with_pred("qmap")
        .any(|m| m.arg(1) == Some(&q.id) || m.arg(2) == Some(&q.id));
    f[5] = q.value.is_one();
    match n {
        0 | 1 => f[6] = true,
        2 => f[7] = true,
        3 => f[8] = true,
        4 => f[9] = true,
        _ => f[10] = true,
    }
    f[11] = q.entity == q0.entity && q.unit == q0.unit;
    f[12] = crate::quantity::quantity_entails(lex, &q.unit, &q.entity, &q0.unit, &q0.entity);
    f[13] = !q0.verb.is_empty() && q.verb == q0.verb;
    f[14] = !q0.verb.is_empty() && lex.entails(&q.verb, &q0.verb);

    let subj0 = role(&q0.roles, Role::Nsubj);
    f[15] = subj0.is_some();
    let quasi = subj0.is_none_or(|s| PLURAL_PRONOUNS.contains(&s.to_lowercase().as_str()));
    let sm = if quasi {
        SubjectMatch::Quasi
    } else if role(&q.roles, Role::Nsubj) == subj0 {
        SubjectMatch::Exact
    } else {
        SubjectMatch::Unmatch
    };
    f[16] = sm == SubjectMatch::Exact;
    f[17] = sm == SubjectMatch::Quasi;
    f[18] = sm == SubjectMatch::Unmatch;

    for (k, r) in [
        (19, Role::Modifier),
        (21, Role::Place),
        (23, Role::Temporal),
        (25, Role::Xcomp),
    ] {
        let r0 = role(&q0.roles, r);
        f[k] = r0.is_some();
        f[k + 1] = r0.is_some() && role(&q.roles, r) == r0;
    }
    // The question's nmod ("than Sara", "in each box") names this quantity's
    // subject, entity or one of its roles.
    f[27] = role(&q0.roles, Role::Nmod)
        .is_some_and(|m| q.entity == m || q.roles.values().any(|v| v == m));
    // Another quantity refers to this one's subject ("3 more than Amy").
    f[28] = role(&q.roles, Role::Nsubj).is_some_and(|subj| {
        facts.iter().any(|x| {
            matches!(x.pred.as_str(), "nmod" | "obj")
                && x.arg(0) != Some(&q.id)
                && x.arg(1).is_some_and(|a| a == subj)
        })
    });
    OperandFeatures { base: f, stype }
}

/// P(r|s), rows in [`SolutionType::ALL`] order, columns r = -1, 0, 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationPrior {
    pub table: [[f64; 3]; 6],
}

impl Default for RelationPrior {
    fn default() -> Self {
        RelationPrior {
            table: [[1.0 / 3.0; 3]; 6],
        }
    }
}

impl RelationPrior {
    /// Add-one smoothed relative frequencies from observed (s, r) pairs.
    pub fn from_counts(observed: &[(SolutionType, i8)]) -> RelationPrior {
        let mut counts = [[1.0f64; 3]; 6];
        for &(s, r) in observed {
            counts[s.index()][(r + 1) as usize] += 1.0;
        }
        let mut table = [[0.0; 3]; 6];
        for (row, c) in table.iter_mut().zip(&counts) {
            let total: f64 = c.iter().sum();
            for (p, n) in row.iter_mut().zip(c) {
                *p = n / total;
            }
        }
        RelationPrior { table }
    }

    pub fn p(&self, s: SolutionType, r: i8) -> f64 {
        self.table[s.index()][(r + 1) as usize]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in SolutionType::ALL {
            for r in [-1i8, 0, 1] {
                out.push_str(&format!("{s} {r} {}\n", self.p(s, r)));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<RelationPrior, ModelError> {
        let mut prior = RelationPrior::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ModelError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [s, r, p] = parts[..] else {
                return Err(err("expected `type r probability`"));
            };
            let s: SolutionType = s.parse().map_err(|_| err("unknown solution type"))?;
            let r: i8 = r
                .parse()
                .ok()
                .filter(|r| (-1..=1).contains(r))
                .ok_or_else(|| err("r must be -1, 0 or 1"))?;
            let p: f64 = p
                .parse()
                .ok()
                .filter(|p: &f64| p.is_finite())
                .ok_or_else(|| err("bad probability"))?;
            prior.table[s.index()][(r + 1) as usize] = p;
        }
        Ok(prior)
    }
}

/// Two selected quantities, their order, and r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperandConfig {
    /// Indicator per quantity, in quantity order.
    pub selected: Vec<bool>,
    pub r: i8,
    pub first: String,
    pub second: String,
}

impl fmt::Display for OperandConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) r={}", self.first, self.second, self.r)
    }
}

impl OperandConfig {
    /// Config for quantities `i < j` under relation `r`, or `None` if `r`
    /// is inconsistent with their values. r = 1 puts the larger value
    /// first, r = -1 the smaller, and r = 0 (equal values) keeps text order.
    pub fn for_pair(quantities: &[Quantity], i: usize, j: usize, r: i8) -> Option<OperandConfig> {
        let (a, b) = (&quantities[i], &quantities[j]);
        let (first, second) = match (r, a.value.cmp(&b.value)) {
            (0, std::cmp::Ordering::Equal) => (a, b),
            (1, std::cmp::Ordering::Greater) | (-1, std::cmp::Ordering::Less) => (a, b),
            (1, std::cmp::Ordering::Less) | (-1, std::cmp::Ordering::Greater) => (b, a),
            _ => return None,
        };
        let mut selected = vec![false; quantities.len()];
        selected[i] = true;
        selected[j] = true;
        Some(OperandConfig {
            selected,
            r,
            first: first.id.clone(),
            second: second.id.clone(),
        })
    }

    /// The relation implied by an ordered pair of values.
    pub fn relation_of(first: &Quantity, second: &Quantity) -> i8 {
        match first.value.cmp(&second.value) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => -1,
        }
    }
}

/// Eq. (1) with the Eq. (2) factorization; `probs[i]` = P(o_i = true).
pub fn score_config(
    config: &OperandConfig,
    probs: &[f64],
    prior: &RelationPrior,
    s: SolutionType,
) -> f64 {
    let mut p = prior.p(s, config.r);
    for (&sel, &pi) in config.selected.iter().zip(probs) {
        p *= if sel { pi } else { 1.0 - pi };
    }
    p
}

fn log_score(config: &OperandConfig, probs: &[f64], prior: &RelationPrior, s: SolutionType) -> f64 {
    let mut p = prior.p(s, config.r).ln();
    for (&sel, &pi) in config.selected.iter().zip(probs) {
        p += if sel { pi } else { 1.0 - pi }.ln();
    }
    p
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperandError {
    #[error("{0} needs at least two quantities")]
    Insufficient(SolutionType),
    #[error("{0} is not an arithmetic type")]
    NotArithmetic(SolutionType),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Every valid configuration in decoding order: pairs by lowest ids, then
/// r = 1, 0, -1.
pub fn candidate_configs(quantities: &[Quantity]) -> Vec<OperandConfig> {
    let n = quantities.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for r in [1i8, 0, -1] {
                out.extend(OperandConfig::for_pair(quantities, i, j, r));
            }
        }
    }
    out
}

/// P(o_i = true) for each quantity under the operand model.
pub fn selection_probabilities(
    ext: &Extraction,
    facts: &FactSet,
    s: SolutionType,
    model: &LinearModel,
    lex: &Lexicon,
) -> Vec<f64> {
    let n = ext.quantities.len();
    ext.quantities
        .iter()
        .map(|q| {
            let x = extract_operand_features(q, &ext.question, n, facts, s, lex).to_vec();
            model.probabilities(&x)[0]
        })
        .collect()
}

/// Argmax of the configuration score, ties to the earliest candidate.
pub fn decode(
    quantities: &[Quantity],
    probs: &[f64],
    prior: &RelationPrior,
    s: SolutionType,
) -> Option<OperandConfig> {
    let mut best: Option<(f64, OperandConfig)> = None;
    for c in candidate_configs(quantities) {
        let score = log_score(&c, probs, prior, s);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, c));
        }
    }
    best.map(|(_, c)| c)
}

pub fn select_operands(
    ext: &Extraction,
    facts: &FactSet,
    s: SolutionType,
    model: &LinearModel,
    prior: &RelationPrior,
    lex: &Lexicon,
) -> Result<OperandConfig, OperandError> {
    if !s.is_arithmetic() {
        return Err(OperandError::NotArithmetic(s));
    }
    model.check_features(&operand_feature_names())?;
    let probs = selection_probabilities(ext, facts, s, model, lex);
    decode(&ext.quantities, &probs, prior, s).ok_or(OperandError::Insufficient(s))
}
