mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use mwp_core::corpus::{micro_corpus, noisy_dataset, Annotation, Annotator, NoiseKind};
use mwp_core::inference::{bundled_rules, saturate, unify, DEFAULT_BUDGET};
use mwp_core::lexicon::Lexicon;
use mwp_core::linear::{LinearModel, Link};
use mwp_core::logicform::{Fact, FactSet, LogicForm};
use mwp_core::metrics::perplexity_of;
use mwp_core::number::Value;

fn lex() -> &'static Lexicon {
    static CELL: std::sync::OnceLock<Lexicon> = std::sync::OnceLock::new();
    CELL.get_or_init(Lexicon::bundled)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saturation_ignores_insertion_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = random_factset(&mut rng, 4);
        let mut facts: Vec<Fact> = fs.iter().cloned().collect();
        facts.shuffle(&mut rng);
        let mut shuffled = FactSet::new();
        for f in facts {
            shuffled.insert(f);
        }
        let rules = bundled_rules();
        let (a, fa) = saturate(&fs, &rules, lex(), DEFAULT_BUDGET).unwrap();
        let (b, fb) = saturate(&shuffled, &rules, lex(), DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a.sorted(), b.sorted());
        prop_assert_eq!(fa.len(), fb.len());
    }

    #[test]
    fn saturation_is_idempotent_and_keeps_inputs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = random_factset(&mut rng, 4);
        let rules = bundled_rules();
        let (once, _) = saturate(&fs, &rules, lex(), DEFAULT_BUDGET).unwrap();
        let (twice, firings) = saturate(&once, &rules, lex(), DEFAULT_BUDGET).unwrap();
        prop_assert!(firings.is_empty());
        prop_assert_eq!(&once, &twice);
        prop_assert!(fs.iter().all(|f| once.contains(f)));
    }

    #[test]
    fn unify_agrees_with_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = random_factset(&mut rng, 3);
        let pats = random_patterns(&mut rng);
        let mut got = unify(&pats, &fs, lex());
        got.sort();
        prop_assert_eq!(got, brute_force_unify(&pats, &fs, lex()));
    }

    #[test]
    fn perplexity_is_reciprocal(a in 1e-9f64..=1.0) {
        let pp = perplexity_of(a);
        prop_assert!((pp * a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_ignores_a_shared_bias_shift(
        w in proptest::collection::vec(-5.0f64..5.0, 6),
        x in proptest::collection::vec(0.0f64..1.0, 2),
        shift in -50.0f64..50.0,
    ) {
        let mut m = LinearModel::zeros(
            Link::Softmax,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["f".into(), "g".into()],
        );
        for c in 0..3 {
            m.weights[c] = w[2 * c..2 * c + 2].to_vec();
        }
        let p = m.probabilities(&x);
        for b in &mut m.bias {
            *b += shift;
        }
        let q = m.probabilities(&x);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        prop_assert_eq!(LinearModel::from_text(&m.to_text(), Link::Softmax).unwrap().probabilities(&x).len(), 3);
    }

    #[test]
    fn values_print_and_parse_back(n in -10_000i64..10_000, d in 1i64..1000) {
        let v = Value::ratio(n, d);
        prop_assert_eq!(v.to_string().parse::<Value>().unwrap(), v);
    }

    #[test]
    fn noise_is_a_function_of_the_seed(seed in any::<u64>()) {
        let corpus = micro_corpus();
        let a = noisy_dataset(&corpus, &NoiseKind::ALL, seed, lex()).unwrap();
        let b = noisy_dataset(&corpus, &NoiseKind::ALL, seed, lex()).unwrap();
        prop_assert_eq!(a.to_jsonl(), b.to_jsonl());
    }
}

#[test]
fn linear_models_round_trip_through_text() {
    let mut m = LinearModel::zeros(
        Link::Logistic,
        vec!["true".into()],
        vec!["f".into(), "g".into()],
    );
    m.weights[0] = vec![0.125, -3.5];
    m.bias[0] = 1.0 / 3.0;
    let back = LinearModel::from_text(&m.to_text(), Link::Logistic).unwrap();
    assert_eq!(back, m);
}

#[test]
fn annotations_round_trip_through_conll() {
    let annotator = Annotator::new(lex());
    for p in &micro_corpus().problems {
        let a = annotator.annotate_text(&p.body, &p.question).unwrap();
        let back = Annotation::parse_conll(&a.to_conll()).unwrap();
        assert_eq!(back, a, "{}", p.id);
    }
}

#[test]
fn explain_output_parses_as_a_logic_form() {
    let (pipeline, models) = trained();
    for p in &micro_corpus().problems {
        let s = pipeline.solve(p, models).unwrap();
        let text = s.explain();
        let lf: LogicForm = text
            .parse()
            .unwrap_or_else(|e| panic!("{}: {e:?}\n{text}", p.id));
        assert_eq!(lf.to_string().parse::<LogicForm>().unwrap(), lf, "{}", p.id);
    }
}

#[test]
fn seed_changes_noise_numbers_only() {
    let corpus = micro_corpus();
    let a = noisy_dataset(&corpus, &[NoiseKind::NewEntity], 1, lex()).unwrap();
    let b = noisy_dataset(&corpus, &[NoiseKind::NewEntity], 2, lex()).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a
        .problems
        .iter()
        .zip(&b.problems)
        .any(|(x, y)| x.body != y.body));
    assert!(a
        .problems
        .iter()
        .zip(&b.problems)
        .all(|(x, y)| x.id == y.id && x.answer == y.answer));
}

#[test]
fn quan_values_sees_derived_facts() {
    let mut fs = FactSet::new();
    fs.insert(Fact::new("quan", &["q1", "#", "rose"]).with_value(Value::from_int(2)));
    fs.insert(Fact::new("quan", &["q2", "#", "lily"]).with_value(Value::from_int(3)));
    assert_eq!(quan_values(&fs, "#", "rose"), vec![Value::from_int(2)]);
    assert!(bindings_of(&[("q", "q1")]).contains_key("q"));
}
