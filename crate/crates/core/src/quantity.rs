//! Quantity extraction and the per-quantity properties: Time, Anchor,
//! Verb-Class, Anchor-Role, Action and Relevance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Annotation, Aspect, Sentence, Tense};
use crate::lexicon::{normalize, Lexicon, VerbClass};
use crate::number::Value;

/// Action shares the three values of the verb class.
pub type Action = VerbClass;

/// Role-tag labels attached to a quantity besides its verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Nsubj,
    Obj,
    Nmod,
    Modifier,
    Place,
    Temporal,
    Xcomp,
}

impl Role {
    pub const ALL: [Role; 7] = [
        Role::Nsubj,
        Role::Obj,
        Role::Nmod,
        Role::Modifier,
        Role::Place,
        Role::Temporal,
        Role::Xcomp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Nsubj => "nsubj",
            Role::Obj => "obj",
            Role::Nmod => "nmod",
            Role::Modifier => "modifier",
            Role::Place => "place",
            Role::Temporal => "temporal",
            Role::Xcomp => "xcomp",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown role `{s}`"))
    }
}

pub type RoleTags = BTreeMap<Role, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnchorRole {
    Nsubj,
    Obj,
    Nmod,
    None,
}

impl fmt::Display for AnchorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorRole::Nsubj => "nsubj",
            AnchorRole::Obj => "obj",
            AnchorRole::Nmod => "nmod",
            AnchorRole::None => "none",
        })
    }
}

/// What the question tracks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    Subject(String),
    Nmod(String),
    Unknown,
}

impl Anchor {
    pub fn lemma(&self) -> Option<&str> {
        match self {
            Anchor::Subject(s) | Anchor::Nmod(s) => Some(s),
            Anchor::Unknown => None,
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Subject(s) => write!(f, "{s} (subject)"),
            Anchor::Nmod(s) => write!(f, "{s} (nmod)"),
            Anchor::Unknown => f.write_str("Unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub id: String,
    pub value: Value,
    pub entity: String,
    pub unit: String,
    pub verb: String,
    pub verb_class: VerbClass,
    pub time: i32,
    pub anchor_role: AnchorRole,
    pub action: Action,
    pub relevance: u8,
    /// 1-based sentence and token index of the mention.
    pub source: (usize, usize),
    pub roles: RoleTags,
    /// Associated with one of each/every/per/a/an.
    pub each_word: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionQuantity {
    pub entity: String,
    pub unit: String,
    pub verb: String,
    pub verb_class: VerbClass,
    pub time: i32,
    pub anchor: Anchor,
    pub roles: RoleTags,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantityMap {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// A unit price stated in the body, e.g. "A sandwich is priced at $0.75".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Price {
    pub entity: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub quantities: Vec<Quantity>,
    pub maps: Vec<QuantityMap>,
    pub question: QuestionQuantity,
    pub prices: Vec<Price>,
}

impl Extraction {
    pub fn quantity(&self, id: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantityError {
    #[error("no numeric quantity in the problem body")]
    EmptyBody,
    #[error("cannot identify the asked quantity: {0}")]
    Question(String),
}

pub fn derive_time(tense: Tense, aspect: Aspect) -> i32 {
    let base = match tense {
        Tense::Past => 2,
        Tense::Present => 4,
        Tense::Future => 6,
    };
    let adjust = match aspect {
        Aspect::Perfect => -1,
        Aspect::Simple => 0,
        Aspect::Progressive => 1,
    };
    base + adjust
}

/// Time used when a quantity has no tensed verb.
pub const DEFAULT_TIME: i32 = 4;

pub fn derive_action(vc: VerbClass, ar: AnchorRole) -> Action {
    use VerbClass::*;
    match (vc, ar) {
        (Positive, AnchorRole::Nsubj) | (Negative, AnchorRole::Obj | AnchorRole::Nmod) => Positive,
        (Negative, AnchorRole::Nsubj) | (Positive, AnchorRole::Obj | AnchorRole::Nmod) => Negative,
        _ => vc,
    }
}

/// Does a quantity with (unit, entity) count as the asked (unit, entity)?
/// Money is written with entity `#` and unit `dollar`/`cent`.
pub fn quantity_entails(
    lex: &Lexicon,
    unit: &str,
    entity: &str,
    q_unit: &str,
    q_entity: &str,
) -> bool {
    if q_entity == "#" || entity == "#" {
        return q_entity == entity && unit == q_unit;
    }
    lex.entails(entity, q_entity) && (q_unit == "#" || unit == q_unit)
}

pub fn anchor_role(roles: &RoleTags, anchor: &Anchor) -> AnchorRole {
    let Some(a) = anchor.lemma() else {
        return AnchorRole::None;
    };
    let a = normalize(a);
    let is = |r: Role| roles.get(&r).is_some_and(|v| normalize(v) == a);
    if is(Role::Nsubj) {
        AnchorRole::Nsubj
    } else if is(Role::Obj) {
        AnchorRole::Obj
    } else if is(Role::Nmod) {
        AnchorRole::Nmod
    } else {
        AnchorRole::None
    }
}

/// Relevance per quantity, in the order given.
pub fn derive_relevance(
    quantities: &[Quantity],
    maps: &[QuantityMap],
    question: &QuestionQuantity,
    lex: &Lexicon,
) -> Vec<u8> {
    let mut rel: Vec<u8> = quantities
        .iter()
        .map(|q| {
            let entails =
                quantity_entails(lex, &q.unit, &q.entity, &question.unit, &question.entity);
            let anchored = match question.anchor {
                Anchor::Unknown => true,
                _ => q.anchor_role != AnchorRole::None,
            };
            if entails && anchored {
                2
            } else {
                0
            }
        })
        .collect();
    let index = |id: &str| quantities.iter().position(|q| q.id == id);
    for m in maps {
        if let (Some(f), Some(t)) = (index(&m.from), index(&m.to)) {
            if rel[f] == 2 && rel[t] == 0 {
                rel[t] = 1;
            }
        }
    }
    rel
}

pub const PLURAL_PRONOUNS: &[&str] = &["they", "we", "you"];
const RATE_VERBS: &[&str] = &["weigh", "cost", "hold", "contain", "price"];
const RATE_DETS: &[&str] = &["a", "each", "every"];
const EACH_WORDS: &[&str] = &["each", "every", "per", "a", "an"];
const KEYWORD_NMODS: &[&str] = &["total", "all", "sum"];
const PLACE_CASES: &[&str] = &["in", "at", "on"];

struct Mention {
    /// 0-based token index that anchors the textual order.
    order: usize,
    head: usize,
    value: Value,
    rate: bool,
}

struct Ctx<'a> {
    ann: &'a Annotation,
    lex: &'a Lexicon,
}

impl Ctx<'_> {
    fn sent(&self, s: usize) -> &Sentence {
        &self.ann.sentences[s]
    }

    /// 0-based children of 0-based token `i` with relation `rel`.
    fn children(&self, s: usize, i: usize, rel: &str) -> Vec<usize> {
        let sent = self.sent(s);
        sent.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.head == i + 1 && t.rel == rel)
            .map(|(k, _)| k)
            .collect()
    }

    fn head(&self, s: usize, i: usize) -> Option<usize> {
        let h = self.sent(s).tokens[i].head;
        (h > 0).then(|| h - 1)
    }

    /// Governing verb of token `i` and the token directly attached to it.
    fn governor(&self, s: usize, i: usize) -> Option<(usize, usize)> {
        let mut cur = i;
        while let Some(h) = self.head(s, cur) {
            if self.sent(s).tokens[h].is_verb() {
                return Some((h, cur));
            }
            cur = h;
        }
        None
    }

    /// Antecedent for he/him/she/her: the nearest earlier subject (itself
    /// resolved if it is a pronoun), else the most recent proper noun.
    fn resolve_pronoun(&self, s: usize, i: usize) -> Option<String> {
        for ss in (0..=s).rev() {
            let toks = &self.sent(ss).tokens;
            let end = if ss == s { i } else { toks.len() };
            let subject = toks[..end].iter().enumerate().rev().find(|(_, t)| {
                t.rel == "nsubj"
                    && (t.pos == "NNP"
                        || (t.pos == "PRP" && matches!(t.lemma.as_str(), "he" | "she")))
            });
            match subject {
                Some((_, t)) if t.pos == "NNP" => return Some(t.lemma.clone()),
                Some((k, _)) => {
                    if let Some(name) = self.resolve_pronoun(ss, k) {
                        return Some(name);
                    }
                }
                None => {}
            }
            if let Some(t) = toks[..end].iter().rev().find(|t| t.pos == "NNP") {
                return Some(t.lemma.clone());
            }
        }
        None
    }

    fn lemma_of(&self, s: usize, i: usize) -> String {
        let t = &self.sent(s).tokens[i];
        if t.pos == "PRP" && matches!(t.lemma.as_str(), "he" | "she") {
            if let Some(name) = self.resolve_pronoun(s, i) {
                return name;
            }
        }
        if t.pos == "$" {
            return "dollar".into();
        }
        if t.pos == "NNP" {
            t.lemma.clone()
        } else {
            normalize(&t.lemma)
        }
    }

    fn is_temporal(&self, s: usize, i: usize) -> bool {
        let t = &self.sent(s).tokens[i];
        t.is_noun() && self.lex.words.is_temporal(&t.lemma)
    }

    fn case_of(&self, s: usize, i: usize) -> Option<String> {
        self.children(s, i, "case")
            .first()
            .map(|&c| self.sent(s).tokens[c].lemma.clone())
    }

    fn subject_of(&self, s: usize, verb: usize) -> Option<usize> {
        let mut v = verb;
        loop {
            if let Some(&n) = self.children(s, v, "nsubj").first() {
                return Some(n);
            }
            let t = &self.sent(s).tokens[v];
            if matches!(t.rel.as_str(), "conj" | "xcomp") {
                v = self.head(s, v)?;
            } else {
                return None;
            }
        }
    }

    fn roles(&self, s: usize, verb: Option<usize>, head: usize, attach: usize) -> RoleTags {
        let mut roles = RoleTags::new();
        let toks = &self.sent(s).tokens;
        if let Some(m) = self
            .children(s, head, "amod")
            .into_iter()
            .find(|&m| toks[m].pos == "JJ" && !matches!(toks[m].lemma.as_str(), "many" | "much"))
        {
            roles.insert(Role::Modifier, toks[m].lemma.clone());
        }
        let Some(v) = verb else {
            return roles;
        };
        if let Some(n) = self.subject_of(s, v).filter(|&n| n != attach) {
            roles.insert(Role::Nsubj, self.lemma_of(s, n));
        }
        let objs = self
            .children(s, v, "iobj")
            .into_iter()
            .chain(self.children(s, v, "obj"));
        if let Some(o) = objs.into_iter().find(|&o| o != attach) {
            roles.insert(Role::Obj, self.lemma_of(s, o));
        }
        for n in self.children(s, v, "nmod") {
            if n == attach {
                continue;
            }
            if self.is_temporal(s, n) {
                roles
                    .entry(Role::Temporal)
                    .or_insert_with(|| self.lemma_of(s, n));
                continue;
            }
            let lemma = self.lemma_of(s, n);
            if KEYWORD_NMODS.contains(&lemma.as_str()) {
                continue;
            }
            if self
                .case_of(s, n)
                .is_some_and(|c| PLACE_CASES.contains(&c.as_str()))
            {
                roles.entry(Role::Place).or_insert_with(|| lemma.clone());
            }
            roles.entry(Role::Nmod).or_insert(lemma);
        }
        if let Some(&t) = self.children(s, v, "tmod").first() {
            roles.insert(Role::Temporal, self.lemma_of(s, t));
        }
        if let Some(&x) = self.children(s, v, "xcomp").first() {
            roles.insert(Role::Xcomp, toks[x].lemma.clone());
        }
        roles
    }

    fn time_of(&self, s: usize, verb: Option<usize>) -> i32 {
        verb.and_then(|v| {
            let t = &self.sent(s).tokens[v];
            Some(derive_time(t.tense?, t.aspect?))
        })
        .unwrap_or(DEFAULT_TIME)
    }

    /// (unit, entity) for a noun-phrase head; `None` for a bare number.
    fn unit_entity(&self, s: usize, head: usize) -> Option<(String, String)> {
        let t = &self.sent(s).tokens[head];
        if t.pos == "$" {
            return Some(("dollar".into(), "#".into()));
        }
        if t.pos == "CD" {
            return None;
        }
        let lemma = self.lemma_of(s, head);
        match lemma.as_str() {
            "dollar" | "money" => return Some(("dollar".into(), "#".into())),
            "cent" => return Some(("cent".into(), "#".into())),
            _ => {}
        }
        if self.lex.words.is_measure(&lemma) {
            let of = self
                .children(s, head, "nmod")
                .into_iter()
                .find(|&n| self.case_of(s, n).as_deref() == Some("of"));
            if let Some(n) = of {
                return Some((lemma, self.lemma_of(s, n)));
            }
        }
        Some(("#".into(), lemma))
    }

    fn each_word(&self, s: usize, head: usize) -> bool {
        let toks = &self.sent(s).tokens;
        let has = |rel: &str| {
            self.children(s, head, rel)
                .into_iter()
                .any(|c| EACH_WORDS.contains(&toks[c].lemma.as_str()))
        };
        has("det")
            || has("advmod")
            || self
                .children(s, head, "nmod")
                .into_iter()
                .any(|n| self.case_of(s, n).as_deref() == Some("per"))
    }

    fn mentions(&self, s: usize) -> Vec<Mention> {
        let toks = &self.sent(s).tokens;
        let mut out = Vec::new();
        let mut done = vec![false; toks.len()];
        for (i, t) in toks.iter().enumerate() {
            if !t.is_number() || done[i] || t.rel == "compound" {
                continue;
            }
            let Ok(mut value) = t.lemma.parse::<Value>() else {
                continue;
            };
            let head = if t.rel == "nummod" {
                self.head(s, i).unwrap_or(i)
            } else {
                i
            };
            // Several numerals on one head multiply: "2 dozen eggs".
            let numerals: Vec<usize> = if head == i {
                self.children(s, i, "compound")
            } else {
                self.children(s, head, "nummod")
            };
            for k in numerals {
                if k != i && toks[k].is_number() {
                    if let Ok(v) = toks[k].lemma.parse::<Value>() {
                        value = &value * &v;
                    }
                    done[k] = true;
                }
            }
            out.push(Mention {
                order: i,
                head,
                value,
                rate: false,
            });
        }
        // Rate subjects: "Each box holds 5 apples", "A sandwich is priced at $0.75".
        for (i, t) in toks.iter().enumerate() {
            if !t.is_noun() || t.rel != "nsubj" || !self.children(s, i, "nummod").is_empty() {
                continue;
            }
            let dets = self.children(s, i, "det");
            let Some(&det) = dets
                .iter()
                .find(|&&d| RATE_DETS.contains(&toks[d].lemma.as_str()))
            else {
                continue;
            };
            let Some(v) = self.head(s, i) else { continue };
            let verb = &toks[v].lemma;
            let each = toks[det].lemma != "a";
            if !(RATE_VERBS.contains(&verb.as_str()) || (each && verb == "have")) {
                continue;
            }
            let other = out
                .iter()
                .any(|m| self.governor(s, m.head).is_some_and(|(gv, _)| gv == v));
            if other {
                out.push(Mention {
                    order: det,
                    head: i,
                    value: Value::one(),
                    rate: true,
                });
            }
        }
        out.sort_by_key(|m| m.order);
        out
    }
}

/// Extracts body quantities, quantity maps, unit prices and the question
/// quantity, with all derived properties filled in.
pub fn extract_quantities(ann: &Annotation, lex: &Lexicon) -> Result<Extraction, QuantityError> {
    let ctx = Ctx { ann, lex };
    let n_sent = ann.sentences.len();
    let q_idx = match ann.sentences.last() {
        Some(s) if s.is_question() => n_sent - 1,
        _ => return Err(QuantityError::Question("no question sentence".into())),
    };
    let question = extract_question(&ctx, q_idx)?;

    let mut quantities = Vec::new();
    let mut heads = Vec::new();
    let mut last_ue: Option<(String, String)> = None;
    for s in 0..q_idx {
        for m in ctx.mentions(s) {
            let (unit, entity) = match ctx.unit_entity(s, m.head) {
                Some(ue) => ue,
                None => last_ue.clone().unwrap_or(("#".into(), "#".into())),
            };
            last_ue = Some((unit.clone(), entity.clone()));
            let gov = ctx.governor(s, m.head);
            let verb_tok = gov.map(|g| g.0);
            let attach = gov.map_or(m.head, |g| g.1);
            let verb = verb_tok.map_or_else(String::new, |v| ctx.sent(s).tokens[v].lemma.clone());
            let verb_class = lex.verb_class(&verb).unwrap_or(VerbClass::Stative);
            let roles = ctx.roles(s, verb_tok, m.head, attach);
            let ar = anchor_role(&roles, &question.anchor);
            quantities.push(Quantity {
                id: format!("q{}", quantities.len() + 1),
                value: m.value,
                entity,
                unit,
                verb,
                verb_class,
                time: ctx.time_of(s, verb_tok),
                anchor_role: ar,
                action: derive_action(verb_class, ar),
                relevance: 0,
                source: (s + 1, m.order + 1),
                roles,
                each_word: m.rate || ctx.each_word(s, m.head),
            });
            heads.push((s, m.head, attach, verb_tok, m.rate));
        }
    }
    if quantities.is_empty() {
        return Err(QuantityError::EmptyBody);
    }

    // Maps and prices: a quantity in subject position of a rate verb maps to
    // the other quantities of the same verb. "A sandwich is priced at $0.75"
    // becomes a price fact only; both of its mentions are consumed.
    let mut pairs = Vec::new();
    let mut prices = Vec::new();
    let mut consumed = vec![false; quantities.len()];
    for (i, &(s, _, attach, verb, rate)) in heads.iter().enumerate() {
        let Some(v) = verb else { continue };
        if ctx.sent(s).tokens[attach].rel != "nsubj" {
            continue;
        }
        let lemma = ctx.sent(s).tokens[v].lemma.as_str();
        if !(RATE_VERBS.contains(&lemma) || rate) {
            continue;
        }
        for (j, &(s2, _, _, verb2, _)) in heads.iter().enumerate() {
            if j == i || s2 != s || verb2 != Some(v) {
                continue;
            }
            let money = quantities[j].entity == "#" && quantities[j].unit == "dollar";
            if money && matches!(lemma, "price" | "cost") {
                if let Some(p) = quantities[j].value.checked_div(&quantities[i].value) {
                    prices.push(Price {
                        entity: quantities[i].entity.clone(),
                        value: p,
                    });
                    if rate {
                        consumed[i] = true;
                        consumed[j] = true;
                        continue;
                    }
                }
            }
            pairs.push((i, j));
        }
    }
    // A count of the rate's own unit ("3 boxes" next to "each box has 5
    // apples") maps to the per-unit quantity as well.
    let rate_pairs: Vec<(usize, usize)> =
        pairs.iter().copied().filter(|&(i, _)| heads[i].4).collect();
    for (i, j) in rate_pairs {
        for (k, q) in quantities.iter().enumerate() {
            let same = q.entity == quantities[i].entity && q.unit == quantities[i].unit;
            if k != i && k != j && !heads[k].4 && same && !pairs.contains(&(k, j)) {
                pairs.push((k, j));
            }
        }
    }
    let mut new_id = vec![String::new(); quantities.len()];
    let mut kept = Vec::new();
    for (i, mut q) in quantities.into_iter().enumerate() {
        if consumed[i] {
            continue;
        }
        q.id = format!("q{}", kept.len() + 1);
        new_id[i] = q.id.clone();
        kept.push(q);
    }
    let mut quantities = kept;
    if quantities.is_empty() {
        return Err(QuantityError::EmptyBody);
    }
    let maps: Vec<QuantityMap> = pairs
        .into_iter()
        .filter(|&(i, j)| !consumed[i] && !consumed[j])
        .enumerate()
        .map(|(k, (i, j))| QuantityMap {
            id: format!("m{}", k + 1),
            from: new_id[i].clone(),
            to: new_id[j].clone(),
        })
        .collect();

    let rel = derive_relevance(&quantities, &maps, &question, lex);
    for (q, r) in quantities.iter_mut().zip(rel) {
        q.relevance = r;
    }
    Ok(Extraction {
        quantities,
        maps,
        question,
        prices,
    })
}

fn extract_question(ctx: &Ctx, s: usize) -> Result<QuestionQuantity, QuantityError> {
    let toks = &ctx.sent(s).tokens;
    let wh = toks
        .iter()
        .enumerate()
        .find(|(i, t)| {
            matches!(t.lemma.as_str(), "many" | "much")
                && ctx
                    .children(s, *i, "advmod")
                    .iter()
                    .any(|&c| toks[c].lemma == "how")
        })
        .map(|(i, _)| i)
        .ok_or_else(|| QuantityError::Question("expected `how many` or `how much`".into()))?;
    let asked = if toks[wh].rel == "amod" {
        ctx.head(s, wh).unwrap_or(wh)
    } else {
        wh
    };
    let (unit, entity) = if asked == wh {
        ("dollar".to_string(), "#".to_string())
    } else {
        ctx.unit_entity(s, asked)
            .ok_or_else(|| QuantityError::Question("asked phrase has no noun".into()))?
    };
    let gov = ctx.governor(s, asked);
    let verb_tok = gov.map(|g| g.0);
    let attach = gov.map_or(asked, |g| g.1);
    let verb = verb_tok.map_or_else(String::new, |v| toks[v].lemma.clone());
    let roles = ctx.roles(s, verb_tok, asked, attach);

    let subject = verb_tok
        .and_then(|v| ctx.subject_of(s, v))
        .filter(|&n| n != attach);
    let anchor = match subject {
        Some(n) => {
            let t = &toks[n];
            let lemma = ctx.lemma_of(s, n);
            if t.pos == "PRP" && (PLURAL_PRONOUNS.contains(&t.lemma.as_str()) || lemma == t.lemma) {
                Anchor::Unknown
            } else {
                Anchor::Subject(lemma)
            }
        }
        None => match roles.get(&Role::Nmod) {
            Some(n) => Anchor::Nmod(n.clone()),
            None => Anchor::Unknown,
        },
    };
    Ok(QuestionQuantity {
        entity,
        unit,
        verb_class: ctx.lex.verb_class(&verb).unwrap_or(VerbClass::Stative),
        verb,
        time: ctx.time_of(s, verb_tok),
        anchor,
        roles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Annotator;

    fn extract(body: &str, question: &str) -> Extraction {
        let lex = Lexicon::bundled();
        let ann = Annotator::new(&lex).annotate_text(body, question).unwrap();
        extract_quantities(&ann, &lex).unwrap()
    }

    #[test]
    fn time_table() {
        assert_eq!(derive_time(Tense::Past, Aspect::Simple), 2);
        assert_eq!(derive_time(Tense::Future, Aspect::Progressive), 7);
        assert_eq!(derive_time(Tense::Present, Aspect::Perfect), 3);
    }

    #[test]
    fn action_rules() {
        use VerbClass::*;
        assert_eq!(derive_action(Positive, AnchorRole::Nsubj), Positive);
        assert_eq!(derive_action(Positive, AnchorRole::Obj), Negative);
        assert_eq!(derive_action(Negative, AnchorRole::Nmod), Positive);
        assert_eq!(derive_action(Stative, AnchorRole::None), Stative);
        assert_eq!(derive_action(Positive, AnchorRole::None), Positive);
    }

    #[test]
    fn flower_purchases() {
        let x = extract(
            "Tim bought 2 roses and 3 lilies. Mary bought 4 roses and 5 lilies.",
            "How many flowers did Tim buy?",
        );
        let got: Vec<_> = x
            .quantities
            .iter()
            .map(|q| {
                (
                    q.value.to_string(),
                    q.entity.as_str(),
                    q.verb.as_str(),
                    q.roles[&Role::Nsubj].as_str(),
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![
                ("2".into(), "rose", "buy", "Tim"),
                ("3".into(), "lily", "buy", "Tim"),
                ("4".into(), "rose", "buy", "Mary"),
                ("5".into(), "lily", "buy", "Mary"),
            ]
        );
        assert_eq!(x.question.entity, "flower");
        assert_eq!(x.question.anchor, Anchor::Subject("Tim".into()));
        let rel: Vec<u8> = x.quantities.iter().map(|q| q.relevance).collect();
        assert_eq!(rel, vec![2, 2, 0, 0]);
    }

    #[test]
    fn packing_candies() {
        let x = extract(
            "Pack 100 candies into 5 boxes.",
            "How many candies are in each box?",
        );
        assert_eq!(x.quantities.len(), 2);
        assert_eq!(x.quantities[0].entity, "candy");
        assert_eq!(x.quantities[0].verb, "pack");
        assert_eq!(x.quantities[1].entity, "box");
        assert_eq!(x.question.anchor, Anchor::Nmod("box".into()));
    }

    #[test]
    fn weigh_creates_map() {
        let x = extract(
            "2 pencils weigh 30 grams.",
            "How many grams do 2 pencils weigh?",
        );
        assert_eq!(
            x.maps,
            vec![QuantityMap {
                id: "m1".into(),
                from: "q1".into(),
                to: "q2".into()
            }]
        );
    }

    #[test]
    fn each_box_has_rate_quantity() {
        let x = extract(
            "Tim has 3 boxes. Each box has 5 apples.",
            "How many apples does Tim have?",
        );
        assert_eq!(x.quantities.len(), 3);
        assert!(x.quantities[1].each_word);
        assert_eq!(x.quantities[1].entity, "box");
        assert_eq!(x.maps[0].from, "q2");
        assert_eq!(x.maps[0].to, "q3");
        assert_eq!(x.maps[1].from, "q1");
        assert_eq!(x.maps[1].to, "q3");
    }

    #[test]
    fn anchors() {
        let x = extract("John has 3 apples.", "How many apples does John have?");
        assert_eq!(x.question.anchor, Anchor::Subject("John".into()));
        let x = extract(
            "The box has 3 apples.",
            "How many apples are there in the box?",
        );
        assert_eq!(x.question.anchor, Anchor::Nmod("box".into()));
        let x = extract("Tim spent 3 dollars.", "How much was spent?");
        assert_eq!(x.question.anchor, Anchor::Unknown);
        let x = extract("Tom has 9 balloons.", "How many balloons do they have?");
        assert_eq!(x.question.anchor, Anchor::Unknown);
    }

    #[test]
    fn borrowing_flips_action_for_lender() {
        let x = extract(
            "Tom borrowed 3 dollars from Mike.",
            "How much money does Mike have now?",
        );
        let q = &x.quantities[0];
        assert_eq!((q.unit.as_str(), q.entity.as_str()), ("dollar", "#"));
        assert_eq!(q.anchor_role, AnchorRole::Nmod);
        assert_eq!(q.action, VerbClass::Negative);
    }

    #[test]
    fn price_sentences() {
        let x = extract(
            "A sandwich is priced at $0.75. Tim bought 2 sandwiches.",
            "How much money should Tim pay?",
        );
        assert_eq!(
            x.prices,
            vec![Price {
                entity: "sandwich".into(),
                value: Value::ratio(3, 4)
            }]
        );
        assert_eq!(x.quantities.len(), 1);
        assert_eq!(x.quantities[0].id, "q1");
        assert_eq!(x.quantities[0].entity, "sandwich");
        assert!(x.maps.is_empty());
    }

    #[test]
    fn pronoun_and_future_time() {
        let x = extract(
            "Mike takes 88 minutes to walk to school. If he rides a bicycle to school, it would save him 64 minutes.",
            "How much time did Mike save?",
        );
        let q2 = &x.quantities[1];
        assert_eq!(q2.roles[&Role::Obj], "Mike");
        assert_eq!(q2.time, 6);
        assert_eq!(q2.action, VerbClass::Negative);
        assert_eq!(x.question.time, 2);
        assert_eq!(x.quantities[0].roles[&Role::Xcomp], "walk");
    }

    #[test]
    fn classifier_unit_and_modifier() {
        let x = extract(
            "Tim has 3 cups of coffee and 2 red apples.",
            "How many cups of coffee does Tim have?",
        );
        assert_eq!(
            (
                x.quantities[0].unit.as_str(),
                x.quantities[0].entity.as_str()
            ),
            ("cup", "coffee")
        );
        assert_eq!(x.quantities[1].roles[&Role::Modifier], "red");
        assert_eq!(
            (x.question.unit.as_str(), x.question.entity.as_str()),
            ("cup", "coffee")
        );
    }

    #[test]
    fn places_and_temporals() {
        let x = extract(
            "There are 30 red flowers in the garden. Tim ate 2 apples yesterday.",
            "How many flowers are in the garden?",
        );
        assert_eq!(x.quantities[0].roles[&Role::Place], "garden");
        assert_eq!(x.quantities[0].roles[&Role::Modifier], "red");
        assert_eq!(x.quantities[1].roles[&Role::Temporal], "yesterday");
    }
}
