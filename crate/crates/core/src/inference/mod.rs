//! Unification, forward-chaining saturation and utility evaluation.

pub mod rules;

use std::collections::{BTreeMap, BTreeSet};

use crate::lexicon::{Lexicon, VerbClass};
use crate::logicform::{Fact, FactSet, Term, UtilityCall};
use crate::number::Value;

pub use rules::{
    bundled_rules, parse_expr, parse_rules, Expr, InferenceRule, Template, BUNDLED_RULES,
};

/// Variable name to ground constant.
pub type Bindings = BTreeMap<String, String>;

/// Default limit on facts derived by one saturation.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferenceError {
    #[error("saturation derived more than {0} facts without reaching a fixpoint")]
    Divergence(usize),
    #[error("rule `{rule}`: {msg}")]
    Rule { rule: String, msg: String },
    #[error("no quan fact for `{0}`")]
    MissingFact(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no solution: {0}")]
    NoSolution(String),
}

/// Argument position of the entity in `quan(id, unit, entity)`.
const ENTITY_SLOT: usize = 2;

fn match_fact(pattern: &Fact, fact: &Fact, b: &mut Bindings, lex: Option<&Lexicon>) -> bool {
    if pattern.pred != fact.pred || pattern.args.len() != fact.args.len() {
        return false;
    }
    if let Some(v) = &pattern.value {
        if fact.value.as_ref() != Some(v) {
            return false;
        }
    }
    for (i, (p, f)) in pattern.args.iter().zip(&fact.args).enumerate() {
        let Term::Const(fc) = f else { return false };
        match p {
            Term::Const(pc) => {
                let ok = if pattern.pred == "quan" && i == ENTITY_SLOT {
                    pc == fc || lex.is_some_and(|l| l.entails(fc, pc))
                } else {
                    pc == fc
                };
                if !ok {
                    return false;
                }
            }
            Term::Var(v) | Term::Fresh(v) => match b.get(v) {
                Some(bound) if bound != fc => return false,
                Some(_) => {}
                None => {
                    b.insert(v.clone(), fc.clone());
                }
            },
        }
    }
    true
}

fn substitute(pattern: &Fact, b: &Bindings) -> Fact {
    let args = pattern
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => b
                .get(v)
                .map_or_else(|| t.clone(), |c| Term::Const(c.clone())),
            _ => t.clone(),
        })
        .collect();
    Fact {
        pred: pattern.pred.clone(),
        args,
        value: pattern.value.clone(),
    }
}

fn unify_rec(
    patterns: &[Fact],
    facts: &FactSet,
    lex: Option<&Lexicon>,
    b: &Bindings,
    out: &mut Vec<Bindings>,
) {
    let Some((first, rest)) = patterns.split_first() else {
        out.push(b.clone());
        return;
    };
    let p = substitute(first, b);
    let candidates: Vec<&Fact> = match p.first_arg() {
        Some(id) => facts.with_first(&p.pred, id).collect(),
        None => facts.with_pred(&p.pred).collect(),
    };
    for f in candidates {
        let mut nb = b.clone();
        if match_fact(&p, f, &mut nb, lex) {
            unify_rec(rest, facts, lex, &nb, out);
        }
    }
}

/// All bindings under which every conjunct matches a fact, one per
/// matching fact tuple, in fact insertion order. A ground entity in a
/// `quan` pattern also matches facts whose entity entails it.
pub fn unify(patterns: &[Fact], facts: &FactSet, lex: &Lexicon) -> Vec<Bindings> {
    let mut out = Vec::new();
    unify_rec(patterns, facts, Some(lex), &Bindings::new(), &mut out);
    out
}

/// Like [`unify`] but entities match by equality only.
pub fn unify_exact(patterns: &[Fact], facts: &FactSet) -> Vec<Bindings> {
    let mut out = Vec::new();
    unify_rec(patterns, facts, None, &Bindings::new(), &mut out);
    out
}

fn fact_value(facts: &FactSet, head: &Fact) -> Option<Value> {
    facts
        .with_pred(&head.pred)
        .find(|f| f.args == head.args)
        .and_then(|f| f.value.clone())
}

fn eval_expr(e: &Expr, b: &Bindings, facts: &FactSet) -> Result<Value, String> {
    Ok(match e {
        Expr::Num(v) => v.clone(),
        Expr::Var(v) => {
            let c = b.get(v).ok_or_else(|| format!("?{v} unbound"))?;
            c.parse::<Value>()
                .map_err(|_| format!("?{v}={c} is not a number"))?
        }
        Expr::FactValue(a) => {
            let head = substitute(a, b);
            fact_value(facts, &head)
                .ok_or_else(|| format!("{} has no value", head.head_string()))?
        }
        Expr::Bin(op, x, y) => {
            let x = eval_expr(x, b, facts)?;
            let y = eval_expr(y, b, facts)?;
            match op {
                '+' => &x + &y,
                '-' => &x - &y,
                '*' => &x * &y,
                _ => x.checked_div(&y).ok_or("division by zero")?,
            }
        }
    })
}

/// One rule application recorded by saturation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub rule: String,
    pub bindings: Bindings,
    pub derived: Vec<Fact>,
}

fn binding_key(rule_index: usize, rule: &InferenceRule, b: &Bindings) -> String {
    let parts: Vec<String> = b.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{rule_index}:{}|{}", rule.name, parts.join(","))
}

type NaturalKey = Vec<(String, u64)>;

/// Orders `q2` before `q10`.
fn natural_key(s: &str) -> NaturalKey {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut num = String::new();
    for c in s.chars() {
        if c.is_ascii_digit() {
            num.push(c);
        } else {
            if !num.is_empty() {
                out.push((std::mem::take(&mut text), num.parse().unwrap_or(u64::MAX)));
                num.clear();
            }
            text.push(c);
        }
    }
    out.push((text, num.parse().unwrap_or(0)));
    out
}

fn var_order(rule: &InferenceRule) -> Vec<String> {
    let mut seen = Vec::new();
    for v in rule.antecedent.iter().flat_map(rules::pattern_vars) {
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen
}

fn fresh_id(used: &mut BTreeSet<String>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let id = format!("d{counter}");
        if used.insert(id.clone()) {
            return id;
        }
    }
}

/// Forward chaining to the least fixpoint. Each (rule, binding) pair fires
/// at most once; a firing whose consequent already holds (with fresh ids
/// read as variables) adds nothing.
pub fn saturate(
    facts: &FactSet,
    rules: &[InferenceRule],
    lex: &Lexicon,
    budget: usize,
) -> Result<(FactSet, Vec<Firing>), InferenceError> {
    let mut fs = facts.clone();
    let mut trace = Vec::new();
    let mut used: BTreeSet<String> = fs.ids().into_iter().map(str::to_string).collect();
    let mut counter = 0usize;
    let mut added = 0usize;
    loop {
        let mut pending: Vec<(Vec<NaturalKey>, String, usize, Bindings)> = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let order = var_order(rule);
            for b in unify(&rule.antecedent, &fs, lex) {
                let key = binding_key(ri, rule, &b);
                if !fs.fired.contains(&key) {
                    let sort_key = order.iter().map(|v| natural_key(&b[v])).collect();
                    pending.push((sort_key, key, ri, b));
                }
            }
        }
        // Canonical order: rule, then bindings in order of first appearance.
        pending.sort_by(|a, b| (a.2, &a.0).cmp(&(b.2, &b.0)));
        pending.dedup_by(|a, b| a.1 == b.1);
        if pending.is_empty() {
            return Ok((fs, trace));
        }
        for (_, key, ri, b) in pending {
            fs.fired.insert(key);
            let rule = &rules[ri];
            let rule_err = |msg: String| InferenceError::Rule {
                rule: rule.name.clone(),
                msg,
            };
            let mut values = Vec::new();
            for t in &rule.consequent {
                values.push(
                    t.value
                        .as_ref()
                        .map(|e| eval_expr(e, &b, &fs))
                        .transpose()
                        .map_err(rule_err)?,
                );
            }
            // Content check: fresh variables act as match variables.
            let check: Vec<Fact> = rule
                .consequent
                .iter()
                .zip(&values)
                .map(|(t, v)| {
                    let args = t
                        .args
                        .iter()
                        .map(|a| match a {
                            Term::Fresh(v) => Term::Var(format!("${v}")),
                            Term::Var(v) => Term::Const(b[v].clone()),
                            c => c.clone(),
                        })
                        .collect();
                    Fact {
                        pred: t.pred.clone(),
                        args,
                        value: v.clone(),
                    }
                })
                .collect();
            if !unify_exact(&check, &fs).is_empty() {
                continue;
            }
            let mut fresh = Bindings::new();
            let mut derived = Vec::new();
            for f in check {
                let args = f
                    .args
                    .into_iter()
                    .map(|a| match a {
                        Term::Var(v) => {
                            let id = fresh
                                .entry(v)
                                .or_insert_with(|| fresh_id(&mut used, &mut counter))
                                .clone();
                            Term::Const(id)
                        }
                        c => c,
                    })
                    .collect();
                let fact = Fact { args, ..f };
                if fs.insert(fact.clone()) {
                    derived.push(fact);
                    added += 1;
                    if added > budget {
                        return Err(InferenceError::Divergence(budget));
                    }
                }
            }
            trace.push(Firing {
                rule: rule.name.clone(),
                bindings: b,
                derived,
            });
        }
    }
}

fn quan_value<'a>(facts: &'a FactSet, id: &str) -> Result<&'a Value, InferenceError> {
    facts
        .quan(id)
        .and_then(|f| f.value.as_ref())
        .ok_or_else(|| InferenceError::MissingFact(id.to_string()))
}

/// Evaluates a question utility against (saturated) facts.
pub fn eval_utility(
    call: &UtilityCall,
    facts: &FactSet,
    lex: &Lexicon,
) -> Result<Value, InferenceError> {
    match call {
        UtilityCall::Arithmetic { op, first, second } => {
            let a = quan_value(facts, first.first_arg().unwrap_or_default())?;
            let b = quan_value(facts, second.first_arg().unwrap_or_default())?;
            use crate::logicform::SolutionType::*;
            Ok(match op {
                Addition => a + b,
                Subtraction => a - b,
                Multiplication => a * b,
                _ => a.checked_div(b).ok_or(InferenceError::DivisionByZero)?,
            })
        }
        UtilityCall::Sum {
            function,
            condition,
        } => {
            let ids = sum_matches(function, condition, facts, lex);
            if ids.is_empty() {
                return Err(InferenceError::NoSolution(format!(
                    "nothing unifies with {call}"
                )));
            }
            let mut total = Value::zero();
            for id in &ids {
                total = &total + quan_value(facts, id)?;
            }
            Ok(total)
        }
        UtilityCall::Tvqf { steps, .. } => {
            let mut parsed = Vec::new();
            for s in steps {
                let id = s.first_arg().unwrap_or_default();
                let action = match s.arg(1) {
                    Some("positive") => VerbClass::Positive,
                    Some("negative") => VerbClass::Negative,
                    _ => VerbClass::Stative,
                };
                let time: i32 = s
                    .arg(2)
                    .and_then(|t| t.parse().ok())
                    .unwrap_or(crate::quantity::DEFAULT_TIME);
                parsed.push((time, action, quan_value(facts, id)?.clone()));
            }
            tvqf(&parsed)
                .ok_or_else(|| InferenceError::NoSolution("no directly related quantity".into()))
        }
    }
}

/// Distinct `?q` ids satisfying a Sum call, in first-match order.
pub fn sum_matches(
    function: &Fact,
    condition: &[Fact],
    facts: &FactSet,
    lex: &Lexicon,
) -> Vec<String> {
    let mut pattern = vec![function.clone()];
    pattern.extend(condition.iter().cloned());
    let qvar = match function.args.first() {
        Some(Term::Var(v)) => v.clone(),
        _ => return Vec::new(),
    };
    let mut ids: Vec<String> = Vec::new();
    for b in unify(&pattern, facts, lex) {
        if let Some(id) = b.get(&qvar) {
            if !ids.contains(id) {
                ids.push(id.clone());
            }
        }
    }
    ids
}

/// Final state of a time-variant quantity from (time, action, value) steps
/// given in textual order. Steps are ordered by time, ties by textual
/// order; the state starts at the earliest stative value (0 if none), every
/// later stative value replaces it, and positive/negative steps add or
/// subtract wherever they fall.
pub fn tvqf(steps: &[(i32, VerbClass, Value)]) -> Option<Value> {
    if steps.is_empty() {
        return None;
    }
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| steps[i].0);
    let start = order
        .iter()
        .copied()
        .find(|&i| steps[i].1 == VerbClass::Stative);
    let mut state = start.map_or_else(Value::zero, |i| steps[i].2.clone());
    for &i in &order {
        if Some(i) == start {
            continue;
        }
        let (_, action, v) = &steps[i];
        state = match action {
            VerbClass::Positive => &state + v,
            VerbClass::Negative => &state - v,
            VerbClass::Stative => v.clone(),
        };
    }
    Some(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logicform::{LogicForm, SolutionType};

    fn lf(text: &str) -> FactSet {
        text.parse::<LogicForm>().unwrap().facts
    }

    const SANDWICH: &str = "price(sandwich,0.75) & price(pudding,0.25)
quan(q1,#,sandwich)=2 & verb(q1,buy) & nsubj(q1,Tim)
quan(q2,#,pudding)=4 & verb(q2,buy) & nsubj(q2,Tim)
quan(q3,#,pudding)=2 & verb(q3,buy) & nsubj(q3,Mary)
";

    #[test]
    fn sandwich_saturation_and_sum() {
        let lex = Lexicon::bundled();
        let (fs, trace) = saturate(&lf(SANDWICH), &bundled_rules(), &lex, DEFAULT_BUDGET).unwrap();
        let derived: Vec<String> = fs
            .with_pred("quan")
            .filter(|f| f.arg(1) == Some("dollar"))
            .map(|f| f.value.as_ref().unwrap().to_string())
            .collect();
        assert_eq!(derived, vec!["1.5", "1", "0.5"]);
        assert_eq!(trace.len(), 3);
        let pattern: Fact = "quan(?q,dollar,#)".parse().unwrap();
        assert_eq!(unify(std::slice::from_ref(&pattern), &fs, &lex).len(), 3);
        let cond: Vec<Fact> = vec![
            "verb(?q,pay)".parse().unwrap(),
            "nsubj(?q,Tim)".parse().unwrap(),
        ];
        let mut full = vec![pattern.clone()];
        full.extend(cond.clone());
        assert_eq!(unify(&full, &fs, &lex).len(), 2);
        let call = UtilityCall::Sum {
            function: pattern,
            condition: cond,
        };
        assert_eq!(eval_utility(&call, &fs, &lex).unwrap(), Value::ratio(5, 2));
    }

    #[test]
    fn ground_pattern_gives_one_empty_binding() {
        let lex = Lexicon::bundled();
        let fs = lf(SANDWICH);
        let b = unify(&["verb(q1,buy)".parse().unwrap()], &fs, &lex);
        assert_eq!(b, vec![Bindings::new()]);
    }

    #[test]
    fn entity_slot_uses_entailment() {
        let lex = Lexicon::bundled();
        let fs = lf("quan(q1,#,rose)=2\nquan(q2,#,lily)=3\nquan(q3,#,apple)=1\n");
        let b = unify(&["quan(?q,#,flower)".parse().unwrap()], &fs, &lex);
        assert_eq!(b.len(), 2);
        assert_eq!(
            unify_exact(&["quan(?q,#,flower)".parse().unwrap()], &fs).len(),
            0
        );
    }

    #[test]
    fn arithmetic_utilities() {
        let lex = Lexicon::bundled();
        let fs = lf("quan(q1,#,candy)=100\nquan(q2,#,box)=5\nquan(q3,#,box)=0\n");
        let call = |op, a: &str, b: &str| UtilityCall::Arithmetic {
            op,
            first: Fact::new("quan", &[a, "#", "x"]),
            second: Fact::new("quan", &[b, "#", "x"]),
        };
        assert_eq!(
            eval_utility(&call(SolutionType::Division, "q1", "q2"), &fs, &lex).unwrap(),
            Value::from_int(20)
        );
        assert_eq!(
            eval_utility(&call(SolutionType::Subtraction, "q2", "q1"), &fs, &lex).unwrap(),
            Value::from_int(-95)
        );
        assert_eq!(
            eval_utility(&call(SolutionType::Division, "q1", "q3"), &fs, &lex),
            Err(InferenceError::DivisionByZero)
        );
        assert_eq!(
            eval_utility(&call(SolutionType::Addition, "q1", "q9"), &fs, &lex),
            Err(InferenceError::MissingFact("q9".into()))
        );
    }

    #[test]
    fn empty_sum_is_no_solution() {
        let lex = Lexicon::bundled();
        let call: UtilityCall = "Sum(quan(?q,#,apple), verb(?q,buy))".parse().unwrap();
        assert!(matches!(
            eval_utility(&call, &lf(SANDWICH), &lex),
            Err(InferenceError::NoSolution(_))
        ));
    }

    #[test]
    fn give_and_receive_do_not_loop() {
        let lex = Lexicon::bundled();
        let fs = lf("quan(q1,#,apple)=3 & verb(q1,give) & nsubj(q1,Tom) & obj(q1,Mary)\n");
        let (out, _) = saturate(&fs, &bundled_rules(), &lex, DEFAULT_BUDGET).unwrap();
        let call: UtilityCall = "Sum(quan(?q,#,apple), verb(?q,receive) & nsubj(?q,Mary))"
            .parse()
            .unwrap();
        assert_eq!(eval_utility(&call, &out, &lex).unwrap(), Value::from_int(3));
        assert_eq!(out.with_pred("quan").count(), 2);
    }

    #[test]
    fn looping_rule_hits_budget() {
        let lex = Lexicon::bundled();
        let rules = parse_rules("grow: quan(?q,?u,?o) => quan($q,?u,?o)=quan(?q,?u,?o)+1").unwrap();
        let fs = lf("quan(q1,#,apple)=1\n");
        assert_eq!(
            saturate(&fs, &rules, &lex, 50).unwrap_err(),
            InferenceError::Divergence(50)
        );
    }

    #[test]
    fn tvqf_semantics() {
        use VerbClass::*;
        let v = Value::from_int;
        assert_eq!(tvqf(&[(2, Stative, v(5)), (2, Positive, v(3))]), Some(v(8)));
        assert_eq!(tvqf(&[(2, Stative, v(5)), (4, Stative, v(7))]), Some(v(7)));
        assert_eq!(tvqf(&[(4, Stative, v(7)), (2, Stative, v(5))]), Some(v(7)));
        assert_eq!(
            tvqf(&[
                (2, Negative, v(3)),
                (4, Stative, v(10)),
                (4, Positive, v(2))
            ]),
            Some(v(9))
        );
        assert_eq!(tvqf(&[(2, Positive, v(3))]), Some(v(3)));
        assert_eq!(tvqf(&[]), None);
    }
}
