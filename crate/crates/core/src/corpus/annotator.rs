//! Deterministic annotator for the restricted problem grammar.
//!
//! Covers short declarative sentences, `how many/much` questions,
//! coordination, `if`-clauses, infinitival complements and prepositional
//! phrases. Anything else is rejected with the offending sentence, and the
//! caller can supply a hand-made annotation file instead.

use crate::corpus::annotation::{Annotation, Aspect, Sentence, Tense, Token};
use crate::lexicon::Lexicon;
use crate::number::{digit_literal_value, number_word_value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sentence {sentence} (\"{text}\"): {reason}")]
pub struct AnnotateError {
    pub sentence: usize,
    pub text: String,
    pub reason: String,
}

const MODALS: &[&str] = &[
    "will", "would", "shall", "should", "can", "could", "must", "may", "might",
];
const FUTURE_MODALS: &[&str] = &["will", "would", "shall"];
const SUBORDINATORS: &[&str] = &["if", "when"];

/// Splits text into sentences at `.`/`?`/`!`, leaving decimal points alone.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        cur.push(c);
        let terminal = matches!(c, '.' | '?' | '!');
        let decimal = c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if terminal && !decimal {
            let s = cur.trim().to_string();
            if !s.is_empty() {
                out.push(s);
            }
            cur.clear();
        }
    }
    let rest = cur.trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

/// Splits a sentence into surface tokens.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in sentence.split_whitespace() {
        let mut word = chunk;
        let mut trailing = Vec::new();
        while let Some(last) = word.chars().last() {
            if matches!(last, '.' | ',' | '?' | '!' | ';') {
                trailing.push(last.to_string());
                word = &word[..word.len() - 1];
            } else {
                break;
            }
        }
        if let Some(rest) = word.strip_prefix('$') {
            out.push("$".to_string());
            word = rest;
        }
        if !word.is_empty() {
            out.push(word.to_string());
        }
        out.extend(trailing.into_iter().rev());
    }
    out
}

#[derive(Debug, Clone)]
struct Tok {
    surface: String,
    lemma: String,
    pos: String,
    head: Option<usize>,
    rel: String,
    temporal: bool,
}

impl Tok {
    fn is(&self, pos: &str) -> bool {
        self.pos == pos
    }
    fn is_verb(&self) -> bool {
        self.pos.starts_with("VB") || self.pos == "MD"
    }
    fn is_noun(&self) -> bool {
        self.pos.starts_with("NN")
    }
    fn is_punct(&self) -> bool {
        matches!(self.pos.as_str(), "." | ",")
    }
}

/// A noun phrase chunk: token span and head index (all sentence-relative).
#[derive(Debug, Clone, Copy)]
struct Chunk {
    start: usize,
    end: usize,
    head: usize,
}

#[derive(Debug, Clone)]
enum Item {
    Np(Chunk),
    Wh { quant: usize, np: Option<Chunk> },
    Pp { case: usize, np: Chunk },
    Verb,
    To { to: usize, verb: usize },
    Adv(usize),
    Expl(usize),
    Adj(usize),
    Coord(usize),
    Mark(usize),
    TrailingDet(usize),
}

pub struct Annotator<'a> {
    lex: &'a Lexicon,
}

impl<'a> Annotator<'a> {
    pub fn new(lex: &'a Lexicon) -> Self {
        Annotator { lex }
    }

    /// Annotates body sentences followed by the question sentence.
    pub fn annotate_text(&self, body: &str, question: &str) -> Result<Annotation, AnnotateError> {
        let mut texts = split_sentences(body);
        texts.extend(split_sentences(question));
        let mut sentences = Vec::with_capacity(texts.len());
        for (i, text) in texts.iter().enumerate() {
            sentences.push(self.annotate_sentence(text, i + 1)?);
        }
        Ok(Annotation { sentences })
    }

    pub fn annotate_sentence(&self, text: &str, index: usize) -> Result<Sentence, AnnotateError> {
        let err = |reason: String| AnnotateError {
            sentence: index,
            text: text.to_string(),
            reason,
        };
        let words = tokenize(text);
        if words.is_empty() {
            return Err(err("empty sentence".into()));
        }
        let mut toks = self.tag(&words).map_err(err)?;
        parse(&mut toks).map_err(err)?;
        let tenses = tense_aspect(&toks);
        let tokens = toks
            .into_iter()
            .zip(tenses)
            .map(|(t, ta)| Token {
                surface: t.surface,
                lemma: t.lemma,
                pos: t.pos,
                head: t.head.map_or(0, |h| h + 1),
                rel: t.rel,
                tense: ta.map(|x| x.0),
                aspect: ta.map(|x| x.1),
            })
            .collect();
        let sentence = Sentence { tokens };
        sentence
            .validate(index)
            .map_err(|e| err(format!("internal parse error: {e}")))?;
        Ok(sentence)
    }

    fn tag(&self, words: &[String]) -> Result<Vec<Tok>, String> {
        let mut toks: Vec<Tok> = Vec::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            let mk = |lemma: &str, pos: &str| Tok {
                surface: w.clone(),
                lemma: lemma.to_string(),
                pos: pos.to_string(),
                head: None,
                rel: String::new(),
                temporal: false,
            };
            let tok = match w.as_str() {
                "." | "?" | "!" => mk(w, "."),
                "," | ";" => mk(w, ","),
                "$" => mk("dollar", "$"),
                _ => {
                    if let Some(v) = digit_literal_value(w) {
                        mk(&v.to_string(), "CD")
                    } else if let Some(v) = number_word_value(w) {
                        mk(&v.to_string(), "CD")
                    } else {
                        self.choose_reading(w, i, words, &toks)?
                    }
                }
            };
            let mut tok = tok;
            tok.temporal = tok.pos.starts_with("NN") && self.lex.words.is_temporal(&tok.lemma);
            toks.push(tok);
        }
        Ok(toks)
    }

    fn choose_reading(
        &self,
        w: &str,
        i: usize,
        words: &[String],
        prev: &[Tok],
    ) -> Result<Tok, String> {
        let readings = self.lex.words.lookup(w);
        let capitalized = w.chars().next().is_some_and(char::is_uppercase);
        let mk = |lemma: &str, pos: &str| Tok {
            surface: w.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            head: None,
            rel: String::new(),
            temporal: false,
        };
        if readings.is_empty() {
            if capitalized {
                return Ok(mk(w, "NNP"));
            }
            return Err(format!("unknown word `{w}`"));
        }
        // A known name stays a name even sentence-initially.
        if let Some(r) = readings.iter().find(|r| r.pos == "NNP") {
            if w == r.lemma {
                return Ok(mk(&r.lemma, "NNP"));
            }
        }
        let lower = w.to_lowercase();
        let next = words.get(i + 1).map(|s| s.to_lowercase());
        let next_readings = next
            .as_deref()
            .map(|n| self.lex.words.lookup(n))
            .unwrap_or(&[]);
        let next_is_nominal = next.as_deref().is_some_and(|n| {
            n == "$"
                || digit_literal_value(n).is_some()
                || number_word_value(n).is_some()
                || next_readings
                    .iter()
                    .any(|r| r.pos.starts_with("NN") || r.pos.starts_with("JJ"))
        });
        let last = prev.last();
        let has = |pos: &str| readings.iter().find(|r| r.pos == pos);

        match lower.as_str() {
            "her" => {
                return Ok(if next_is_nominal {
                    mk("her", "PRP$")
                } else {
                    mk("she", "PRP")
                })
            }
            "there" => {
                let be_adjacent = next_readings.iter().any(|r| r.lemma == "be")
                    || last.is_some_and(|t| t.lemma == "be");
                return Ok(if be_adjacent {
                    mk("there", "EX")
                } else {
                    mk("there", "RB")
                });
            }
            "each" | "every" => {
                return Ok(if next_is_nominal {
                    mk(&lower, "DT")
                } else {
                    mk(&lower, "RB")
                })
            }
            "left" if !last.is_some_and(|t| t.lemma == "be") && clause_has_main_verb(prev) => {
                return Ok(mk("left", "JJ"));
            }
            _ => {}
        }

        let noun = readings.iter().find(|r| r.pos.starts_with("NN"));
        let verbs: Vec<_> = readings
            .iter()
            .filter(|r| r.pos.starts_with("VB"))
            .collect();
        if let (Some(n), false) = (noun, verbs.is_empty()) {
            let after_nominal_modifier = last.is_some_and(|t| {
                matches!(
                    t.pos.as_str(),
                    "DT" | "PRP$" | "CD" | "JJ" | "JJR" | "IN" | "TO"
                )
            });
            if after_nominal_modifier || (i == 0 && !capitalized_imperative(&verbs)) {
                return Ok(mk(&n.lemma, &n.pos));
            }
        } else if let Some(n) = noun {
            return Ok(mk(&n.lemma, &n.pos));
        }

        if !verbs.is_empty() {
            let want_participle = aux_before(prev, &["have", "be"]);
            let want_base = i == 0
                || aux_before(prev, &["do"])
                || last.is_some_and(|t| t.pos == "MD" || t.pos == "TO")
                || prev
                    .iter()
                    .rev()
                    .take_while(|t| t.pos != ",")
                    .any(|t| t.pos == "MD");
            let pick = |pos: &str| verbs.iter().find(|r| r.pos == pos).copied();
            let chosen = if want_participle {
                pick("VBN").or_else(|| pick("VBG"))
            } else if want_base {
                pick("VB")
            } else {
                None
            }
            .or_else(|| pick("VBZ"))
            .or_else(|| pick("VBD"))
            .or_else(|| pick("VBG"))
            .or_else(|| pick("VBP"))
            .or_else(|| pick("VB"))
            .or_else(|| pick("VBN"));
            if let Some(r) = chosen {
                return Ok(mk(&r.lemma, &r.pos));
            }
        }
        if let Some(r) = has("MD") {
            return Ok(mk(&r.lemma, "MD"));
        }
        let r = &readings[0];
        Ok(mk(&r.lemma, &r.pos))
    }
}

fn capitalized_imperative(verbs: &[&crate::lexicon::Reading]) -> bool {
    verbs.iter().any(|r| r.pos == "VB")
}

fn clause_has_main_verb(prev: &[Tok]) -> bool {
    prev.iter()
        .rev()
        .take_while(|t| t.pos != "," && t.pos != "CC")
        .any(|t| t.pos.starts_with("VB"))
}

/// True if an auxiliary-capable verb (by lemma) precedes, separated only by
/// nominal material or adverbs (covers question inversion).
fn aux_before(prev: &[Tok], lemmas: &[&str]) -> bool {
    for t in prev.iter().rev() {
        if t.pos.starts_with("VB") {
            return lemmas.contains(&t.lemma.as_str());
        }
        let skippable = matches!(
            t.pos.as_str(),
            "RB" | "DT" | "CD" | "JJ" | "JJR" | "NN" | "NNS" | "NNP" | "PRP" | "PRP$" | "EX"
        );
        if !skippable {
            return false;
        }
    }
    false
}

fn is_aux_lemma(t: &Tok) -> bool {
    t.pos == "MD" || matches!(t.lemma.as_str(), "have" | "be" | "do")
}

fn aux_compatible(aux: &Tok, main: &Tok) -> bool {
    if aux.pos == "MD" {
        return main.pos == "VB";
    }
    match aux.lemma.as_str() {
        "do" => main.pos == "VB",
        "have" => main.pos == "VBN",
        "be" => main.pos == "VBN" || main.pos == "VBG",
        _ => false,
    }
}

/// Marks auxiliaries; returns, per token, the index of the verb it serves.
fn find_auxiliaries(toks: &[Tok]) -> Vec<Option<usize>> {
    let mut aux_of = vec![None; toks.len()];
    let mut i = 0;
    while i < toks.len() {
        if toks[i].is_verb() && is_aux_lemma(&toks[i]) {
            // Collect a chain of auxiliaries, skipping inverted subjects and adverbs.
            let mut chain = vec![i];
            let mut j = i + 1;
            let mut main = None;
            while j < toks.len() {
                let t = &toks[j];
                if t.is_verb() {
                    let prev_aux = &toks[*chain.last().unwrap()];
                    if is_aux_lemma(t)
                        && j + 1 < toks.len()
                        && next_verb_compatible(toks, j)
                        && (aux_compatible(prev_aux, t) || prev_aux.pos == "MD")
                    {
                        chain.push(j);
                        j += 1;
                        continue;
                    }
                    if aux_compatible(prev_aux, t) {
                        main = Some(j);
                    }
                    break;
                }
                let skippable = matches!(
                    t.pos.as_str(),
                    "RB" | "DT" | "CD" | "JJ" | "JJR" | "NN" | "NNS" | "NNP" | "PRP" | "PRP$"
                );
                if !skippable {
                    break;
                }
                j += 1;
            }
            if let Some(m) = main {
                for &a in &chain {
                    aux_of[a] = Some(m);
                }
                i = m + 1;
                continue;
            }
        }
        i += 1;
    }
    aux_of
}

fn next_verb_compatible(toks: &[Tok], j: usize) -> bool {
    toks[j + 1..]
        .iter()
        .take_while(|t| !t.is_punct() && t.pos != "CC")
        .find(|t| t.is_verb())
        .is_some_and(|m| aux_compatible(&toks[j], m))
}

fn attach(toks: &mut [Tok], dep: usize, head: usize, rel: &str) {
    toks[dep].head = Some(head);
    toks[dep].rel = rel.to_string();
}

/// Parses a noun phrase starting at `p`; returns the chunk and the index
/// after it. Internal dependencies are attached immediately.
fn parse_np(toks: &mut [Tok], p: usize, end: usize) -> Option<(Chunk, usize)> {
    let start = p;
    let mut q = p;
    if q < end && toks[q].is("PRP") {
        return Some((
            Chunk {
                start,
                end: q + 1,
                head: q,
            },
            q + 1,
        ));
    }
    if q < end && toks[q].is("$") {
        let head = q;
        q += 1;
        while q < end && toks[q].is("CD") {
            attach(toks, q, head, "nummod");
            q += 1;
        }
        return Some((
            Chunk {
                start,
                end: q,
                head,
            },
            q,
        ));
    }
    let mut mods: Vec<(usize, &'static str)> = Vec::new();
    if q < end && (toks[q].is("DT") || toks[q].is("PRP$")) {
        mods.push((q, if toks[q].is("DT") { "det" } else { "nmod:poss" }));
        q += 1;
    }
    let mut numbers = Vec::new();
    while q < end && toks[q].is("CD") {
        numbers.push(q);
        q += 1;
    }
    while q < end && (toks[q].is("JJ") || toks[q].is("JJR")) && toks[q].lemma != "left" {
        mods.push((q, "amod"));
        q += 1;
    }
    let noun_start = q;
    while q < end && toks[q].is_noun() && !(q > noun_start && toks[q].temporal) {
        q += 1;
    }
    if q == noun_start {
        // Bare number: the noun is elided ("Sam found 27").
        if let Some(&last_num) = numbers.last() {
            if mods.iter().all(|(_, r)| *r == "det") {
                for &(m, r) in &mods {
                    attach(toks, m, last_num, r);
                }
                for &n in &numbers[..numbers.len() - 1] {
                    attach(toks, n, last_num, "compound");
                }
                return Some((
                    Chunk {
                        start,
                        end: q,
                        head: last_num,
                    },
                    q,
                ));
            }
        }
        return None;
    }
    let head = q - 1;
    for n in noun_start..head {
        attach(toks, n, head, "compound");
    }
    for &(m, r) in &mods {
        attach(toks, m, head, r);
    }
    for &n in &numbers {
        attach(toks, n, head, "nummod");
    }
    let mut chunk = Chunk {
        start,
        end: q,
        head,
    };
    // "of"-complements: "3 cups of coffee".
    while chunk.end + 1 < end && toks[chunk.end].lemma == "of" && toks[chunk.end].is("IN") {
        let Some((inner, after)) = parse_np(toks, chunk.end + 1, end) else {
            break;
        };
        attach(toks, chunk.end, inner.head, "case");
        attach(toks, inner.head, chunk.head, "nmod");
        chunk.end = after;
    }
    Some((chunk, chunk.end))
}

fn parse(toks: &mut [Tok]) -> Result<(), String> {
    let n = toks.len();
    let body_end = if toks[n - 1].is_punct() { n - 1 } else { n };
    let aux_of = find_auxiliaries(toks);
    let is_main = |i: usize, toks: &[Tok]| {
        toks[i].pos.starts_with("VB") && aux_of[i].is_none() && !(i > 0 && toks[i - 1].is("TO"))
    };

    // Split into pieces at commas, coordinators and subordinators.
    struct Piece {
        sep: Option<usize>,
        range: (usize, usize),
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut cur = 0;
    let mut sep = None;
    let mut i = 0;
    while i < body_end {
        let t = &toks[i];
        let is_sep =
            t.is(",") || t.is("CC") || (t.is("IN") && SUBORDINATORS.contains(&t.lemma.as_str()));
        if is_sep {
            pieces.push(Piece {
                sep,
                range: (cur, i),
            });
            sep = Some(i);
            cur = i + 1;
        }
        i += 1;
    }
    pieces.push(Piece {
        sep,
        range: (cur, body_end),
    });

    // Group pieces into clauses: a piece without a main verb joins its neighbour.
    struct Clause {
        tokens: Vec<usize>,
        lead: Vec<usize>,
        main: usize,
        subordinate: bool,
    }
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut pending_lead: Vec<usize> = Vec::new();
    for piece in &pieces {
        let range: Vec<usize> = (piece.range.0..piece.range.1).collect();
        let main = range.iter().copied().find(|&k| is_main(k, toks));
        match main {
            Some(m) => {
                let mut lead = std::mem::take(&mut pending_lead);
                if let Some(s) = piece.sep {
                    lead.push(s);
                }
                let subordinate = lead
                    .iter()
                    .any(|&s| toks[s].is("IN") && SUBORDINATORS.contains(&toks[s].lemma.as_str()));
                let mut tokens = std::mem::take(&mut pending);
                tokens.extend(range);
                clauses.push(Clause {
                    tokens,
                    lead,
                    main: m,
                    subordinate,
                });
            }
            None => {
                if let Some(last) = clauses.last_mut() {
                    if let Some(s) = piece.sep {
                        last.tokens.push(s);
                    }
                    last.tokens.extend(range);
                } else {
                    if let Some(s) = piece.sep {
                        pending_lead.push(s);
                    }
                    pending.extend(range);
                }
            }
        }
    }
    if clauses.is_empty() {
        return Err("no main verb found".into());
    }
    if !pending.is_empty() {
        let last = clauses.last_mut().unwrap();
        last.tokens.extend(pending);
    }

    for c in &clauses {
        parse_clause(toks, &c.tokens, c.main, &aux_of)?;
    }

    // Link clauses.
    let root_idx = clauses
        .iter()
        .position(|c| !c.subordinate)
        .ok_or("only subordinate clauses")?;
    let root = clauses[root_idx].main;
    toks[root].head = None;
    toks[root].rel = "root".into();
    for (ci, c) in clauses.iter().enumerate() {
        if ci != root_idx {
            if c.subordinate {
                let target = clauses[ci + 1..]
                    .iter()
                    .find(|d| !d.subordinate)
                    .map_or(root, |d| d.main);
                attach(toks, c.main, target, "advcl");
            } else {
                attach(toks, c.main, root, "conj");
            }
        }
        for &s in &c.lead {
            let rel = if toks[s].is("CC") {
                "cc"
            } else if toks[s].is(",") {
                "punct"
            } else {
                "mark"
            };
            attach(toks, s, c.main, rel);
        }
    }
    for k in body_end..n {
        attach(toks, k, root, "punct");
    }
    for (k, t) in toks.iter().enumerate() {
        if t.head.is_none() && k != root {
            return Err(format!("cannot attach `{}`", t.surface));
        }
    }
    Ok(())
}

fn parse_clause(
    toks: &mut [Tok],
    tokens: &[usize],
    main: usize,
    aux_of: &[Option<usize>],
) -> Result<(), String> {
    // Build items over the clause's token list (indices are increasing and
    // contiguous except for separators that were folded in).
    let mut items: Vec<Item> = Vec::new();
    let mut k = 0;
    while k < tokens.len() {
        let i = tokens[k];
        let run_end = {
            let mut e = k;
            while e + 1 < tokens.len() && tokens[e + 1] == tokens[e] + 1 {
                e += 1;
            }
            tokens[e] + 1
        };
        let t = toks[i].clone();
        if aux_of[i].is_some() {
            attach(toks, i, aux_of[i].unwrap(), "aux");
            k += 1;
            continue;
        }
        if i == main {
            items.push(Item::Verb);
            k += 1;
            continue;
        }
        match t.pos.as_str() {
            "WRB" if t.lemma == "how" => {
                let quant = i + 1;
                if quant >= run_end || !matches!(toks[quant].lemma.as_str(), "many" | "much") {
                    return Err("expected `many` or `much` after `how`".into());
                }
                attach(toks, i, quant, "advmod");
                let mut q = quant + 1;
                // "how many more apples"
                let np = parse_np(toks, q, run_end);
                if let Some((chunk, after)) = np {
                    attach(toks, quant, chunk.head, "amod");
                    q = after;
                    items.push(Item::Wh {
                        quant,
                        np: Some(chunk),
                    });
                } else {
                    items.push(Item::Wh { quant, np: None });
                }
                k += q - i;
                continue;
            }
            "TO" | "IN" => {
                if t.pos == "TO" && i + 1 < run_end && toks[i + 1].is("VB") {
                    items.push(Item::To { to: i, verb: i + 1 });
                    k += 2;
                    continue;
                }
                if SUBORDINATORS.contains(&t.lemma.as_str()) {
                    items.push(Item::Mark(i));
                    k += 1;
                    continue;
                }
                let Some((np, after)) = parse_np(toks, i + 1, run_end) else {
                    return Err(format!("expected a noun phrase after `{}`", t.surface));
                };
                items.push(Item::Pp { case: i, np });
                k += after - i;
                continue;
            }
            "EX" => {
                items.push(Item::Expl(i));
                k += 1;
                continue;
            }
            "RB" | "RBR" => {
                if matches!(t.lemma.as_str(), "each" | "every") {
                    items.push(Item::TrailingDet(i));
                } else {
                    items.push(Item::Adv(i));
                }
                k += 1;
                continue;
            }
            "CC" | "," => {
                items.push(Item::Coord(i));
                k += 1;
                continue;
            }
            "JJ" if t.lemma == "left" => {
                items.push(Item::Adj(i));
                k += 1;
                continue;
            }
            _ => {}
        }
        if t.pos.starts_with("VB") {
            return Err(format!("unexpected verb `{}`", t.surface));
        }
        let Some((np, after)) = parse_np(toks, i, run_end) else {
            return Err(format!("cannot parse phrase at `{}`", t.surface));
        };
        items.push(Item::Np(np));
        k += after - i;
    }

    let verb_pos = items
        .iter()
        .position(|it| matches!(it, Item::Verb))
        .ok_or("clause without verb")?;

    let has_expl = items.iter().any(|it| matches!(it, Item::Expl(_)));
    let pre_subject = items[..verb_pos].iter().rev().find_map(|it| match it {
        Item::Np(c) => Some(*c),
        _ => None,
    });
    let wh = items[..verb_pos].iter().find_map(|it| match it {
        Item::Wh { quant, np, .. } => Some((*quant, *np)),
        _ => None,
    });

    let mut subject_set = false;
    if let Some(s) = pre_subject {
        attach(toks, s.head, main, "nsubj");
        subject_set = true;
    }
    if let Some((quant, np)) = wh {
        let head = np.map_or(quant, |c| c.head);
        if subject_set {
            attach(toks, head, main, "obj");
        } else {
            attach(toks, head, main, "nsubj");
            subject_set = true;
        }
    }

    // Pre-verb leftovers.
    let mut last_np: Option<Chunk> = None;
    let mut pending_cc: Vec<usize> = Vec::new();
    for it in &items[..verb_pos] {
        match it {
            Item::Np(c) => {
                if pre_subject.is_some_and(|s| s.head != c.head) {
                    if let Some(prev) = last_np {
                        attach(toks, c.head, prev.head, "conj");
                        for cc in pending_cc.drain(..) {
                            let rel = if toks[cc].is(",") { "punct" } else { "cc" };
                            attach(toks, cc, c.head, rel);
                        }
                        continue;
                    }
                }
                last_np = Some(*c);
            }
            Item::Adv(a) => attach(toks, *a, main, "advmod"),
            Item::Expl(e) => attach(toks, *e, main, "expl"),
            Item::Pp { case, np } => {
                attach(toks, *case, np.head, "case");
                attach(toks, np.head, main, pp_rel(toks, np.head));
            }
            Item::Mark(m) => attach(toks, *m, main, "mark"),
            Item::Coord(c) => pending_cc.push(*c),
            Item::Wh { .. } | Item::Verb => {}
            other => return Err(format!("unexpected item before verb: {other:?}")),
        }
    }
    // Coordinated subjects: "Tom and Sara have ..." -- the first conjunct
    // heads the subject.
    if let Some(s) = pre_subject {
        let nps: Vec<Chunk> = items[..verb_pos]
            .iter()
            .filter_map(|it| if let Item::Np(c) = it { Some(*c) } else { None })
            .collect();
        if nps.len() > 1 && pending_cc.is_empty() {
            let first = nps[0];
            attach(toks, first.head, main, "nsubj");
            for c in &nps[1..] {
                attach(toks, c.head, first.head, "conj");
            }
            let _ = s;
        }
    }
    for cc in pending_cc.drain(..) {
        attach(toks, cc, main, "cc");
    }

    // Post-verb items.
    let mut governor = main;
    let mut obj: Option<Chunk> = None;
    let mut prev_was_np = false;
    let mut coord: Vec<usize> = Vec::new();
    for it in &items[verb_pos + 1..] {
        match it {
            Item::Np(c) => {
                if !coord.is_empty() {
                    if let Some(o) = obj.filter(|_| prev_was_np || !coord.is_empty()) {
                        attach(toks, c.head, o.head, "conj");
                        for cc in coord.drain(..) {
                            let rel = if toks[cc].is(",") { "punct" } else { "cc" };
                            attach(toks, cc, c.head, rel);
                        }
                        prev_was_np = true;
                        continue;
                    }
                }
                let temporal = toks[c.head].rel.is_empty()
                    && is_temporal_np(toks, c)
                    && !(has_expl && !subject_set);
                if temporal {
                    attach(toks, c.head, governor, "tmod");
                    prev_was_np = false;
                    continue;
                }
                if has_expl && !subject_set {
                    attach(toks, c.head, governor, "nsubj");
                    subject_set = true;
                    obj = Some(*c);
                } else if prev_was_np && obj.is_some() && toks[obj.unwrap().head].rel == "obj" {
                    let o = obj.unwrap();
                    toks[o.head].rel = "iobj".into();
                    attach(toks, c.head, governor, "obj");
                    obj = Some(*c);
                } else {
                    attach(toks, c.head, governor, "obj");
                    obj = Some(*c);
                }
                prev_was_np = true;
            }
            Item::Pp { case, np } => {
                for cc in coord.drain(..) {
                    attach(
                        toks,
                        cc,
                        governor,
                        if toks[cc].is(",") { "punct" } else { "cc" },
                    );
                }
                attach(toks, *case, np.head, "case");
                attach(toks, np.head, governor, pp_rel(toks, np.head));
                prev_was_np = false;
            }
            Item::To { to, verb } => {
                attach(toks, *to, *verb, "mark");
                attach(toks, *verb, main, "xcomp");
                governor = *verb;
                obj = None;
                prev_was_np = false;
            }
            Item::Adv(a) => {
                attach(toks, *a, governor, "advmod");
                prev_was_np = false;
            }
            Item::TrailingDet(d) => match obj {
                Some(o) => attach(toks, *d, o.head, "advmod"),
                None => attach(toks, *d, governor, "advmod"),
            },
            Item::Adj(a) => {
                attach(toks, *a, main, "xcomp");
                prev_was_np = false;
            }
            Item::Expl(e) => attach(toks, *e, main, "expl"),
            Item::Coord(c) => coord.push(*c),
            Item::Mark(m) => attach(toks, *m, main, "mark"),
            Item::Wh { .. } | Item::Verb => {
                return Err("unexpected question phrase after verb".into())
            }
        }
    }
    for cc in coord.drain(..) {
        attach(
            toks,
            cc,
            main,
            if toks[cc].is(",") { "punct" } else { "cc" },
        );
    }
    Ok(())
}

fn pp_rel(toks: &[Tok], head: usize) -> &'static str {
    let _ = (toks, head);
    "nmod"
}

fn is_temporal_np(toks: &[Tok], c: &Chunk) -> bool {
    let has_number = (c.start..c.end).any(|k| toks[k].is("CD"));
    toks[c.head].temporal && !has_number
}

/// Tense and aspect for content verbs; infinitives inherit from their
/// governing verb.
fn tense_aspect(toks: &[Tok]) -> Vec<Option<(Tense, Aspect)>> {
    let mut out = vec![None; toks.len()];
    let mut content: Vec<usize> = (0..toks.len())
        .filter(|&i| toks[i].pos.starts_with("VB") && toks[i].rel != "aux")
        .collect();
    // Finite verbs first so infinitives can copy.
    content.sort_by_key(|&i| toks[i].rel == "xcomp");
    for i in content {
        let t = &toks[i];
        if t.rel == "xcomp" && t.pos == "VB" {
            out[i] = t
                .head
                .and_then(|h| out[h])
                .or(Some((Tense::Present, Aspect::Simple)));
            continue;
        }
        let auxes: Vec<&Tok> = toks
            .iter()
            .filter(|a| a.rel == "aux" && a.head == Some(i))
            .collect();
        let modal = auxes.iter().find(|a| a.pos == "MD");
        let tense = if let Some(m) = modal {
            if FUTURE_MODALS.contains(&m.lemma.as_str()) {
                Tense::Future
            } else {
                Tense::Present
            }
        } else {
            let finite = auxes.first().copied().unwrap_or(t);
            if finite.pos == "VBD" || (finite.pos == "VBN" && auxes.is_empty()) {
                Tense::Past
            } else {
                Tense::Present
            }
        };
        let has_have = auxes.iter().any(|a| a.lemma == "have");
        let has_be = auxes.iter().any(|a| a.lemma == "be");
        let aspect = if has_have && t.pos == "VBN" {
            Aspect::Perfect
        } else if has_be && t.pos == "VBG" {
            Aspect::Progressive
        } else {
            Aspect::Simple
        };
        out[i] = Some((tense, aspect));
        let _ = MODALS;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotate(text: &str) -> Sentence {
        let lex = Lexicon::bundled();
        Annotator::new(&lex).annotate_sentence(text, 1).unwrap()
    }

    fn find(s: &Sentence, surface: &str) -> usize {
        s.tokens.iter().position(|t| t.surface == surface).unwrap() + 1
    }

    fn edge(s: &Sentence, dep: &str) -> (String, String) {
        let t = s.token(find(s, dep));
        let head = if t.head == 0 {
            "ROOT".to_string()
        } else {
            s.token(t.head).surface.clone()
        };
        (t.rel.clone(), head)
    }

    #[test]
    fn splits_sentences_but_not_decimals() {
        let s = split_sentences("A sandwich is priced at $0.75. Tim bought 2. Why?");
        assert_eq!(
            s,
            vec!["A sandwich is priced at $0.75.", "Tim bought 2.", "Why?"]
        );
    }

    #[test]
    fn tokenizes_money_and_punctuation() {
        assert_eq!(tokenize("at $0.75."), vec!["at", "$", "0.75", "."]);
        assert_eq!(tokenize("Tim, Mary"), vec!["Tim", ",", "Mary"]);
    }

    #[test]
    fn simple_transfer_sentence() {
        let s = annotate("Tim bought 2 roses.");
        let bought = s.token(find(&s, "bought"));
        assert_eq!(bought.lemma, "buy");
        assert_eq!(bought.tense, Some(Tense::Past));
        assert_eq!(bought.aspect, Some(Aspect::Simple));
        assert_eq!(edge(&s, "Tim"), ("nsubj".into(), "bought".into()));
        assert_eq!(edge(&s, "roses"), ("obj".into(), "bought".into()));
        assert_eq!(edge(&s, "2"), ("nummod".into(), "roses".into()));
    }

    #[test]
    fn how_many_question() {
        let s = annotate("How many flowers did Tim buy?");
        assert_eq!(edge(&s, "flowers"), ("obj".into(), "buy".into()));
        assert_eq!(edge(&s, "many"), ("amod".into(), "flowers".into()));
        assert_eq!(edge(&s, "How"), ("advmod".into(), "many".into()));
        assert_eq!(edge(&s, "did"), ("aux".into(), "buy".into()));
        assert_eq!(edge(&s, "Tim"), ("nsubj".into(), "buy".into()));
        let buy = s.token(find(&s, "buy"));
        assert_eq!(buy.tense, Some(Tense::Past));
    }

    #[test]
    fn unknown_verb_is_rejected() {
        let lex = Lexicon::bundled();
        let err = Annotator::new(&lex)
            .annotate_sentence("Tim blorfed 2 roses.", 3)
            .unwrap_err();
        assert_eq!(err.sentence, 3);
        assert!(err.reason.contains("blorfed"));
    }

    #[test]
    fn imperative_with_prepositional_object() {
        let s = annotate("Pack 100 candies into 5 boxes.");
        assert_eq!(edge(&s, "Pack"), ("root".into(), "ROOT".into()));
        assert_eq!(edge(&s, "candies"), ("obj".into(), "Pack".into()));
        assert_eq!(edge(&s, "boxes"), ("nmod".into(), "Pack".into()));
        assert_eq!(edge(&s, "into"), ("case".into(), "boxes".into()));
    }

    #[test]
    fn expletive_there() {
        let s = annotate("How many apples are there in the box?");
        assert_eq!(edge(&s, "apples"), ("nsubj".into(), "are".into()));
        assert_eq!(edge(&s, "there"), ("expl".into(), "are".into()));
        assert_eq!(edge(&s, "box"), ("nmod".into(), "are".into()));
    }

    #[test]
    fn coordination_of_objects() {
        let s = annotate("Tim bought 2 roses and 3 lilies.");
        assert_eq!(edge(&s, "lilies"), ("conj".into(), "roses".into()));
        assert_eq!(edge(&s, "and"), ("cc".into(), "lilies".into()));
    }

    #[test]
    fn coordination_of_clauses() {
        let s = annotate(
            "Sally found 9 seashells, Tom found 7 seashells, and Jessica found 5 seashells.",
        );
        let founds: Vec<_> = s
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.surface == "found")
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(s.token(founds[0]).rel, "root");
        assert_eq!(s.token(founds[1]).rel, "conj");
        assert_eq!(s.token(founds[2]).rel, "conj");
    }

    #[test]
    fn conditional_clause_and_modal() {
        let s = annotate("If he rides a bicycle to school, it would save him 64 minutes.");
        assert_eq!(edge(&s, "save"), ("root".into(), "ROOT".into()));
        assert_eq!(edge(&s, "rides"), ("advcl".into(), "save".into()));
        assert_eq!(edge(&s, "If"), ("mark".into(), "rides".into()));
        assert_eq!(edge(&s, "him"), ("iobj".into(), "save".into()));
        assert_eq!(edge(&s, "minutes"), ("obj".into(), "save".into()));
        let save = s.token(find(&s, "save"));
        assert_eq!(save.tense, Some(Tense::Future));
    }

    #[test]
    fn infinitival_complement() {
        let s = annotate("Mike takes 88 minutes to walk to school.");
        assert_eq!(edge(&s, "walk"), ("xcomp".into(), "takes".into()));
        assert_eq!(edge(&s, "school"), ("nmod".into(), "walk".into()));
        assert_eq!(edge(&s, "minutes"), ("obj".into(), "takes".into()));
    }

    #[test]
    fn perfect_and_passive() {
        let s = annotate("How many apples has Tim eaten?");
        let eaten = s.token(find(&s, "eaten"));
        assert_eq!(
            (eaten.tense, eaten.aspect),
            (Some(Tense::Present), Some(Aspect::Perfect))
        );
        let s = annotate("A sandwich is priced at $0.75.");
        assert_eq!(edge(&s, "sandwich"), ("nsubj".into(), "priced".into()));
        assert_eq!(edge(&s, "$"), ("nmod".into(), "priced".into()));
        assert_eq!(edge(&s, "0.75"), ("nummod".into(), "$".into()));
    }
}
