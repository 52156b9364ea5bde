#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mwp_core::corpus::{micro_corpus, MWProblem};
use mwp_core::inference::Bindings;
use mwp_core::learn::{train, Models};
use mwp_core::lexicon::Lexicon;
use mwp_core::linear::TrainConfig;
use mwp_core::logicform::{Fact, FactSet, SolutionType, Term};
use mwp_core::number::Value;
use mwp_core::operands::RelationPrior;
use mwp_core::pipeline::Pipeline;
use mwp_core::quantity::Quantity;

pub fn problem(id: &str, body: &str, question: &str, answer: Value) -> MWProblem {
    MWProblem::new(id, body, question, answer)
}

pub fn mike() -> MWProblem {
    problem(
        "mike",
        "Mike takes 88 minutes to walk to school. If he rides a bicycle to school, it would save him 64 minutes.",
        "How much time did Mike save?",
        Value::from_int(22),
    )
}

pub fn candies() -> MWProblem {
    problem(
        "candies",
        "Pack 100 candies into 5 boxes.",
        "How many candies are in each box?",
        Value::from_int(20),
    )
}

pub fn lunch() -> MWProblem {
    problem(
        "lunch",
        "A sandwich is priced at $0.75. A pudding is priced at $0.25. Tim bought 2 sandwiches and 4 puddings. Mary bought 2 puddings.",
        "How much money should Tim pay?",
        Value::ratio(5, 2),
    )
}

pub fn flowers() -> MWProblem {
    problem(
        "flowers",
        "Tim bought 2 roses and 3 lilies. Mary bought 4 roses and 5 lilies.",
        "How many flowers did Tim buy?",
        Value::from_int(5),
    )
}

pub fn balloons() -> MWProblem {
    problem(
        "balloons",
        "Tom has 9 yellow balloons. Sara has 8 yellow balloons. Bob has 5 yellow flowers.",
        "How many yellow balloons do they have in total?",
        Value::from_int(17),
    )
}

/// Pipeline and models trained once per test binary on the micro-corpus.
pub fn trained() -> &'static (Pipeline, Models) {
    static CELL: OnceLock<(Pipeline, Models)> = OnceLock::new();
    CELL.get_or_init(|| {
        let pipeline = Pipeline::default();
        let (models, _) = train(&micro_corpus(), &pipeline, &TrainConfig::default())
            .expect("micro-corpus trains");
        (pipeline, models)
    })
}

const NAMES: [&str; 3] = ["Tim", "Mary", "Tom"];
const ENTITIES: [&str; 4] = ["rose", "lily", "flower", "apple"];
const VERBS: [&str; 4] = ["buy", "give", "receive", "have"];

/// A small random fact set over a few quantities, rich enough to fire the
/// bundled rules.
pub fn random_factset(rng: &mut ChaCha8Rng, max_quantities: usize) -> FactSet {
    let mut fs = FactSet::new();
    let n = rng.gen_range(1..=max_quantities);
    for i in 1..=n {
        let id = format!("q{i}");
        let e = *ENTITIES.choose(rng).unwrap();
        fs.insert(
            Fact::new("quan", &[&id, "#", e]).with_value(Value::from_int(rng.gen_range(1..10))),
        );
        fs.insert(Fact::new("verb", &[&id, VERBS.choose(rng).unwrap()]));
        fs.insert(Fact::new("nsubj", &[&id, NAMES.choose(rng).unwrap()]));
        if rng.gen_bool(0.5) {
            fs.insert(Fact::new("obj", &[&id, NAMES.choose(rng).unwrap()]));
        }
        if rng.gen_bool(0.3) {
            fs.insert(Fact::new("nmod", &[&id, NAMES.choose(rng).unwrap()]));
        }
    }
    for e in ENTITIES {
        if rng.gen_bool(0.4) {
            fs.insert(Fact::new("price", &[e]).with_value(Value::ratio(rng.gen_range(1..8), 4)));
        }
    }
    fs
}

/// A random conjunctive pattern of one to three atoms over ?a ?b ?c.
pub fn random_patterns(rng: &mut ChaCha8Rng) -> Vec<Fact> {
    let vars = ["a", "b", "c"];
    let k = rng.gen_range(1..=3);
    let mut out = Vec::new();
    for _ in 0..k {
        let var = |rng: &mut ChaCha8Rng| Term::Var(vars.choose(rng).unwrap().to_string());
        let f = match rng.gen_range(0..4) {
            0 => {
                let e = if rng.gen_bool(0.5) {
                    Term::Const(ENTITIES.choose(rng).unwrap().to_string())
                } else {
                    var(rng)
                };
                Fact::pattern("quan", vec![var(rng), Term::Const("#".into()), e])
            }
            1 => {
                let v = if rng.gen_bool(0.5) {
                    Term::Const(VERBS.choose(rng).unwrap().to_string())
                } else {
                    var(rng)
                };
                Fact::pattern("verb", vec![var(rng), v])
            }
            2 => Fact::pattern("nsubj", vec![var(rng), var(rng)]),
            _ => Fact::pattern(
                "obj",
                vec![
                    var(rng),
                    Term::Const(NAMES.choose(rng).unwrap().to_string()),
                ],
            ),
        };
        out.push(f);
    }
    out
}

fn match_one(p: &Fact, f: &Fact, b: &mut Bindings, lex: &Lexicon) -> bool {
    if p.pred != f.pred || p.args.len() != f.args.len() {
        return false;
    }
    if p.value.is_some() && p.value != f.value {
        return false;
    }
    for (i, (pt, ft)) in p.args.iter().zip(&f.args).enumerate() {
        let Term::Const(fc) = ft else { return false };
        match pt {
            Term::Const(pc) => {
                let entity_slot = p.pred == "quan" && i == 2;
                if !(pc == fc || (entity_slot && lex.entails(fc, pc))) {
                    return false;
                }
            }
            Term::Var(v) | Term::Fresh(v) => {
                if b.get(v).is_some_and(|x| x != fc) {
                    return false;
                }
                b.insert(v.clone(), fc.clone());
            }
        }
    }
    true
}

/// Every binding from exhaustive enumeration of fact tuples, sorted.
pub fn brute_force_unify(patterns: &[Fact], facts: &FactSet, lex: &Lexicon) -> Vec<Bindings> {
    let all: Vec<&Fact> = facts.iter().collect();
    let k = patterns.len();
    let mut out = Vec::new();
    let total = all.len().pow(k as u32);
    for mut code in 0..total {
        let mut b = Bindings::new();
        let mut ok = true;
        for p in patterns {
            let f = all[code % all.len()];
            code /= all.len();
            if !match_one(p, f, &mut b, lex) {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(b);
        }
    }
    out.sort();
    out
}

/// Best (selected indices, r) over every assignment of the indicators with
/// exactly two set, scored in probability space. Returns all maximizers.
pub fn brute_force_decode(
    quantities: &[Quantity],
    probs: &[f64],
    prior: &RelationPrior,
    s: SolutionType,
) -> (f64, Vec<(Vec<bool>, i8)>) {
    let n = quantities.len();
    let mut scored = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != 2 {
            continue;
        }
        let sel: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let idx: Vec<usize> = (0..n).filter(|&i| sel[i]).collect();
        let (a, b) = (&quantities[idx[0]].value, &quantities[idx[1]].value);
        for r in [-1i8, 0, 1] {
            let valid = if r == 0 { a == b } else { a != b };
            if !valid {
                continue;
            }
            let mut p = prior.p(s, r);
            for i in 0..n {
                p *= if sel[i] { probs[i] } else { 1.0 - probs[i] };
            }
            scored.push((p, sel.clone(), r));
        }
    }
    let best = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let winners = scored
        .into_iter()
        .filter(|x| (x.0 - best).abs() <= 1e-12 * best.abs().max(1e-300))
        .map(|x| (x.1, x.2))
        .collect();
    (best, winners)
}

/// Values of the `quan(_, unit, entity)` facts in a set, sorted.
pub fn quan_values(fs: &FactSet, unit: &str, entity: &str) -> Vec<Value> {
    let mut v: Vec<Value> = fs
        .with_pred("quan")
        .filter(|f| f.arg(1) == Some(unit) && f.arg(2) == Some(entity))
        .filter_map(|f| f.value.clone())
        .collect();
    v.sort();
    v
}

pub fn bindings_of(pairs: &[(&str, &str)]) -> Bindings {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect::<BTreeMap<_, _>>()
}
