//! Role-tagged first-order facts, the question utility call, and their text
//! format.
//!
//! ```text
//! % comment
//! quan(q1,#,candy)=100 & verb(q1,pack)
//! quan(q2,#,box)=5 & verb(q2,pack)
//! ASK Division(quan(q1,#,candy), quan(q2,#,box))
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lexicon::VerbClass;
use crate::number::Value;
use crate::quantity::{Anchor, Extraction, Role};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    /// Match variable `?x`.
    Var(String),
    /// Fresh-id variable `$x`, only in rule consequents.
    Fresh(String),
}

impl Term {
    pub fn constant(s: &str) -> Term {
        Term::Const(s.to_string())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "?{v}"),
            Term::Fresh(v) => write!(f, "${v}"),
        }
    }
}

impl FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Term, ParseError> {
        let s = s.trim();
        let valid = |w: &str| {
            !w.is_empty()
                && w.chars()
                    .all(|c| !c.is_whitespace() && !"(),&=?$%".contains(c))
        };
        let (term, name) = if let Some(v) = s.strip_prefix('?') {
            (Term::Var(v.to_string()), v)
        } else if let Some(v) = s.strip_prefix('$') {
            (Term::Fresh(v.to_string()), v)
        } else {
            (Term::Const(s.to_string()), s)
        };
        if valid(name) {
            Ok(term)
        } else {
            Err(ParseError(format!("bad term `{s}`")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub pred: String,
    pub args: Vec<Term>,
    pub value: Option<Value>,
}

impl Fact {
    pub fn new(pred: &str, args: &[&str]) -> Fact {
        Fact {
            pred: pred.to_string(),
            args: args.iter().map(|a| Term::constant(a)).collect(),
            value: None,
        }
    }

    pub fn with_value(mut self, v: Value) -> Fact {
        self.value = Some(v);
        self
    }

    /// Pattern with arbitrary terms and no value.
    pub fn pattern(pred: &str, args: Vec<Term>) -> Fact {
        Fact {
            pred: pred.to_string(),
            args,
            value: None,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn first_arg(&self) -> Option<&str> {
        self.args.first().and_then(Term::as_const)
    }

    pub fn arg(&self, i: usize) -> Option<&str> {
        self.args.get(i).and_then(Term::as_const)
    }

    /// `pred(args)` without the value.
    pub fn head_string(&self) -> String {
        let args: Vec<String> = self.args.iter().map(Term::to_string).collect();
        format!("{}({})", self.pred, args.join(","))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head_string())?;
        if let Some(v) = &self.value {
            write!(f, "={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("logic form: {0}")]
pub struct ParseError(pub String);

/// Splits `s` at top-level occurrences of `sep` (outside parentheses).
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parses `pred(a,b,...)` and returns the atom plus the text after a
/// top-level `=`, if any.
pub(crate) fn parse_atom(s: &str) -> Result<(String, Vec<Term>, Option<&str>), ParseError> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| ParseError(format!("expected `pred(...)` in `{s}`")))?;
    let pred = s[..open].trim();
    if pred.is_empty() || !pred.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(ParseError(format!("bad predicate in `{s}`")));
    }
    let mut depth = 0;
    let mut close = None;
    for (i, c) in s[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(open + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or_else(|| ParseError(format!("unbalanced parentheses in `{s}`")))?;
    let inner = &s[open + 1..close];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        split_top(inner, ',')
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<Term>, _>>()?
    };
    let rest = s[close + 1..].trim();
    let value = if rest.is_empty() {
        None
    } else if let Some(v) = rest.strip_prefix('=') {
        Some(v.trim())
    } else {
        return Err(ParseError(format!(
            "unexpected `{rest}` after `{}`",
            &s[..=close]
        )));
    };
    Ok((pred.to_string(), args, value))
}

impl FromStr for Fact {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Fact, ParseError> {
        let (pred, args, value) = parse_atom(s)?;
        let value = value
            .map(|v| {
                v.parse::<Value>()
                    .map_err(|e| ParseError(format!("bad value `{v}`: {}", e.0)))
            })
            .transpose()?;
        Ok(Fact { pred, args, value })
    }
}

/// Ground facts with set semantics, kept in insertion order and indexed by
/// predicate and by (predicate, first argument).
#[derive(Debug, Clone, Default)]
pub struct FactSet {
    facts: Vec<Fact>,
    seen: HashSet<Fact>,
    by_pred: HashMap<String, Vec<usize>>,
    by_first: HashMap<(String, String), Vec<usize>>,
    /// (rule, binding) keys already fired during saturation.
    pub(crate) fired: BTreeSet<String>,
}

impl PartialEq for FactSet {
    fn eq(&self, other: &FactSet) -> bool {
        self.seen == other.seen
    }
}

impl Eq for FactSet {}

impl FactSet {
    pub fn new() -> FactSet {
        FactSet::default()
    }

    /// Inserts a ground fact; returns false if it was already present.
    ///
    /// # Panics
    /// If the fact contains variables.
    pub fn insert(&mut self, fact: Fact) -> bool {
        assert!(fact.is_ground(), "non-ground fact {fact} in a FactSet");
        if self.seen.contains(&fact) {
            return false;
        }
        let i = self.facts.len();
        self.by_pred.entry(fact.pred.clone()).or_default().push(i);
        if let Some(first) = fact.first_arg() {
            self.by_first
                .entry((fact.pred.clone(), first.to_string()))
                .or_default()
                .push(i);
        }
        self.seen.insert(fact.clone());
        self.facts.push(fact);
        true
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.seen.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn with_pred<'a>(&'a self, pred: &str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.by_pred
            .get(pred)
            .into_iter()
            .flatten()
            .map(move |&i| &self.facts[i])
    }

    pub fn with_first<'a>(
        &'a self,
        pred: &str,
        first: &str,
    ) -> impl Iterator<Item = &'a Fact> + 'a {
        self.by_first
            .get(&(pred.to_string(), first.to_string()))
            .into_iter()
            .flatten()
            .map(move |&i| &self.facts[i])
    }

    /// The `quan` fact whose id is `id`.
    pub fn quan(&self, id: &str) -> Option<&Fact> {
        self.with_first("quan", id).next()
    }

    /// Every constant appearing as a first argument.
    pub fn ids(&self) -> BTreeSet<&str> {
        self.facts.iter().filter_map(Fact::first_arg).collect()
    }

    pub fn sorted(&self) -> Vec<&Fact> {
        let mut v: Vec<&Fact> = self.facts.iter().collect();
        v.sort();
        v
    }
}

impl FromIterator<Fact> for FactSet {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        let mut s = FactSet::new();
        for f in iter {
            s.insert(f);
        }
        s
    }
}

impl fmt::Display for FactSet {
    /// Facts sharing a first argument go on one line, joined by `&`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut line: Vec<String> = Vec::new();
        let mut key: Option<&str> = None;
        for fact in &self.facts {
            let k = fact.first_arg();
            if !line.is_empty() && k != key {
                writeln!(f, "{}", line.join(" & "))?;
                line.clear();
            }
            key = k;
            line.push(fact.to_string());
        }
        if !line.is_empty() {
            writeln!(f, "{}", line.join(" & "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolutionType {
    Addition,
    Subtraction,
    Multiplication,
    Division,
    Sum,
    Tvqf,
}

impl SolutionType {
    /// Fixed class order, also the tie-break order.
    pub const ALL: [SolutionType; 6] = [
        SolutionType::Addition,
        SolutionType::Subtraction,
        SolutionType::Multiplication,
        SolutionType::Division,
        SolutionType::Sum,
        SolutionType::Tvqf,
    ];

    pub const ARITHMETIC: [SolutionType; 4] = [
        SolutionType::Addition,
        SolutionType::Subtraction,
        SolutionType::Multiplication,
        SolutionType::Division,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolutionType::Addition => "Addition",
            SolutionType::Subtraction => "Subtraction",
            SolutionType::Multiplication => "Multiplication",
            SolutionType::Division => "Division",
            SolutionType::Sum => "Sum",
            SolutionType::Tvqf => "TVQF",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        !matches!(self, SolutionType::Sum | SolutionType::Tvqf)
    }

    /// Operand order matters (subtraction, division).
    pub fn is_ordered(self) -> bool {
        matches!(self, SolutionType::Subtraction | SolutionType::Division)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SolutionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolutionType {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        if s == "TVQ-F" {
            return Ok(SolutionType::Tvqf);
        }
        SolutionType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ParseError(format!("unknown solution type `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UtilityCall {
    /// Two ordered `quan` references (no values).
    Arithmetic {
        op: SolutionType,
        first: Fact,
        second: Fact,
    },
    /// Sum of values of facts unifying with `function` and satisfying `condition`.
    Sum {
        function: Fact,
        condition: Vec<Fact>,
    },
    /// Final state of the tracked quantity; `steps` are
    /// `step(id, action, time)` facts in textual order.
    Tvqf { function: Fact, steps: Vec<Fact> },
}

impl UtilityCall {
    pub fn solution_type(&self) -> SolutionType {
        match self {
            UtilityCall::Arithmetic { op, .. } => *op,
            UtilityCall::Sum { .. } => SolutionType::Sum,
            UtilityCall::Tvqf { .. } => SolutionType::Tvqf,
        }
    }

    /// Every quantity id the call names must have a `quan` fact.
    pub fn check_references(&self, facts: &FactSet) -> Result<(), String> {
        let ids: Vec<&str> = match self {
            UtilityCall::Arithmetic { first, second, .. } => {
                vec![
                    first.first_arg().unwrap_or(""),
                    second.first_arg().unwrap_or(""),
                ]
            }
            UtilityCall::Sum { .. } => Vec::new(),
            UtilityCall::Tvqf { steps, .. } => {
                steps.iter().map(|s| s.first_arg().unwrap_or("")).collect()
            }
        };
        match ids.into_iter().find(|id| facts.quan(id).is_none()) {
            Some(id) => Err(format!("no quan fact for `{id}`")),
            None => Ok(()),
        }
    }
}

fn join_facts(facts: &[Fact]) -> String {
    let v: Vec<String> = facts.iter().map(Fact::to_string).collect();
    v.join(" & ")
}

impl fmt::Display for UtilityCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityCall::Arithmetic { op, first, second } => write!(f, "{op}({first}, {second})"),
            UtilityCall::Sum {
                function,
                condition,
            } => {
                write!(f, "Sum({function}, {})", join_facts(condition))
            }
            UtilityCall::Tvqf { function, steps } => {
                write!(f, "TVQF({function}, {})", join_facts(steps))
            }
        }
    }
}

impl FromStr for UtilityCall {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<UtilityCall, ParseError> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| ParseError(format!("bad utility call `{s}`")))?;
        let op: SolutionType = s[..open].trim().parse()?;
        let inner = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| ParseError(format!("bad utility call `{s}`")))?;
        let parts = split_top(inner, ',');
        if parts.len() != 2 {
            return Err(ParseError(format!("{op} takes two arguments")));
        }
        let conj = |p: &str| -> Result<Vec<Fact>, ParseError> {
            split_top(p, '&').into_iter().map(str::parse).collect()
        };
        let first: Fact = parts[0].parse()?;
        Ok(match op {
            SolutionType::Sum => UtilityCall::Sum {
                function: first,
                condition: conj(parts[1])?,
            },
            SolutionType::Tvqf => UtilityCall::Tvqf {
                function: first,
                steps: conj(parts[1])?,
            },
            op => UtilityCall::Arithmetic {
                op,
                first,
                second: parts[1].parse()?,
            },
        })
    }
}

/// A fact set plus an optional question call; the text form of an
/// explanation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogicForm {
    pub facts: FactSet,
    pub ask: Option<UtilityCall>,
}

impl fmt::Display for LogicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.facts)?;
        if let Some(call) = &self.ask {
            writeln!(f, "ASK {call}")?;
        }
        Ok(())
    }
}

impl FromStr for LogicForm {
    type Err = ParseError;
    fn from_str(text: &str) -> Result<LogicForm, ParseError> {
        let mut lf = LogicForm::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let at = |e: ParseError| ParseError(format!("line {}: {}", n + 1, e.0));
            if let Some(call) = line.strip_prefix("ASK ") {
                if lf.ask.is_some() {
                    return Err(ParseError(format!("line {}: second ASK", n + 1)));
                }
                lf.ask = Some(call.parse().map_err(at)?);
                continue;
            }
            for part in split_top(line, '&') {
                let fact: Fact = part.parse().map_err(at)?;
                if !fact.is_ground() {
                    return Err(at(ParseError(format!("fact `{fact}` has variables"))));
                }
                lf.facts.insert(fact);
            }
        }
        Ok(lf)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("{0} needs two operands")]
    MissingOperands(SolutionType),
    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),
}

fn quan_ref(id: &str, unit: &str, entity: &str) -> Fact {
    Fact::new("quan", &[id, unit, entity])
}

/// Initial facts: one `quan` fact per quantity plus one fact per role tag,
/// `qmap` facts for maps, and `price` facts.
pub fn transform_body(ext: &Extraction) -> FactSet {
    let mut fs = FactSet::new();
    for q in &ext.quantities {
        fs.insert(quan_ref(&q.id, &q.unit, &q.entity).with_value(q.value.clone()));
        if !q.verb.is_empty() {
            fs.insert(Fact::new("verb", &[&q.id, &q.verb]));
        }
        for (role, v) in &q.roles {
            fs.insert(Fact::new(role.as_str(), &[&q.id, v]));
        }
    }
    for m in &ext.maps {
        fs.insert(Fact::new("qmap", &[&m.id, &m.from, &m.to]));
    }
    for p in &ext.prices {
        fs.insert(Fact::new("price", &[&p.entity, &p.value.to_string()]));
    }
    fs
}

/// Instantiates the question utility. Arithmetic types need the ordered
/// operand ids.
pub fn transform_question(
    ext: &Extraction,
    stype: SolutionType,
    operands: Option<(&str, &str)>,
) -> Result<UtilityCall, TransformError> {
    let q0 = &ext.question;
    let qvar = || Term::var("q");
    let function = Fact::pattern(
        "quan",
        vec![qvar(), Term::constant(&q0.unit), Term::constant(&q0.entity)],
    );
    match stype {
        SolutionType::Sum => {
            let mut condition = Vec::new();
            if !q0.verb.is_empty() {
                condition.push(Fact::pattern(
                    "verb",
                    vec![qvar(), Term::constant(&q0.verb)],
                ));
            }
            match &q0.anchor {
                Anchor::Subject(a) => {
                    condition.push(Fact::pattern("nsubj", vec![qvar(), Term::constant(a)]))
                }
                Anchor::Nmod(a) => {
                    condition.push(Fact::pattern("nmod", vec![qvar(), Term::constant(a)]))
                }
                Anchor::Unknown => {}
            }
            if let Some(m) = q0.roles.get(&Role::Modifier) {
                condition.push(Fact::pattern("modifier", vec![qvar(), Term::constant(m)]));
            }
            Ok(UtilityCall::Sum {
                function,
                condition,
            })
        }
        SolutionType::Tvqf => {
            let steps = ext
                .quantities
                .iter()
                .filter(|q| q.relevance == 2)
                .map(|q| Fact::new("step", &[&q.id, action_str(q.action), &q.time.to_string()]))
                .collect();
            Ok(UtilityCall::Tvqf { function, steps })
        }
        op => {
            let (a, b) = operands.ok_or(TransformError::MissingOperands(op))?;
            let r = |id: &str| {
                ext.quantity(id)
                    .map(|q| quan_ref(&q.id, &q.unit, &q.entity))
                    .ok_or_else(|| TransformError::UnknownQuantity(id.to_string()))
            };
            Ok(UtilityCall::Arithmetic {
                op,
                first: r(a)?,
                second: r(b)?,
            })
        }
    }
}

fn action_str(a: VerbClass) -> &'static str {
    a.as_str()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Annotator;
    use crate::lexicon::Lexicon;
    use crate::quantity::extract_quantities;

    fn extraction(body: &str, question: &str) -> Extraction {
        let lex = Lexicon::bundled();
        let ann = Annotator::new(&lex).annotate_text(body, question).unwrap();
        extract_quantities(&ann, &lex).unwrap()
    }

    #[test]
    fn fact_text_roundtrip() {
        let f: Fact = "quan(q1,#,candy)=100".parse().unwrap();
        assert_eq!(f.value, Some(Value::from_int(100)));
        assert_eq!(f.to_string(), "quan(q1,#,candy)=100");
        let p: Fact = "quan(?q,dollar,#)".parse().unwrap();
        assert_eq!(p.args[0], Term::var("q"));
        assert!("quan(q1,#".parse::<Fact>().is_err());
        assert!("quan(q1,a b)".parse::<Fact>().is_err());
    }

    #[test]
    fn set_semantics() {
        let mut fs = FactSet::new();
        assert!(fs.insert(Fact::new("verb", &["q1", "buy"])));
        assert!(!fs.insert(Fact::new("verb", &["q1", "buy"])));
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn packing_body_and_division_call() {
        let x = extraction(
            "Pack 100 candies into 5 boxes.",
            "How many candies are in each box?",
        );
        let fs = transform_body(&x);
        assert!(
            fs.contains(&Fact::new("quan", &["q1", "#", "candy"]).with_value(Value::from_int(100)))
        );
        assert!(fs.contains(&Fact::new("verb", &["q1", "pack"])));
        assert!(fs.contains(&Fact::new("quan", &["q2", "#", "box"]).with_value(Value::from_int(5))));
        let call = transform_question(&x, SolutionType::Division, Some(("q1", "q2"))).unwrap();
        assert_eq!(
            call.to_string(),
            "Division(quan(q1,#,candy), quan(q2,#,box))"
        );
        call.check_references(&fs).unwrap();
        assert_eq!(
            transform_question(&x, SolutionType::Addition, None),
            Err(TransformError::MissingOperands(SolutionType::Addition))
        );
    }

    #[test]
    fn sandwich_sum_call() {
        let x = extraction(
            "A sandwich is priced at $0.75. A pudding is priced at $0.25. Tim bought 2 sandwiches and 4 puddings. Mary bought 2 puddings.",
            "How much money should Tim pay?",
        );
        let fs = transform_body(&x);
        assert!(fs.contains(&Fact::new("price", &["sandwich", "0.75"])));
        assert!(fs.contains(&Fact::new("price", &["pudding", "0.25"])));
        assert_eq!(fs.with_pred("quan").count(), 3);
        let call = transform_question(&x, SolutionType::Sum, None).unwrap();
        assert_eq!(
            call.to_string(),
            "Sum(quan(?q,dollar,#), verb(?q,pay) & nsubj(?q,Tim))"
        );
    }

    #[test]
    fn roses_addition_call() {
        let x = extraction(
            "Tim bought 2 roses and 3 lilies. Mary bought 4 roses and 5 lilies.",
            "How many flowers did Tim buy?",
        );
        let call = transform_question(&x, SolutionType::Addition, Some(("q1", "q2"))).unwrap();
        assert_eq!(
            call.to_string(),
            "Addition(quan(q1,#,rose), quan(q2,#,lily))"
        );
    }

    #[test]
    fn one_quan_fact_and_one_fact_per_role() {
        let x = extraction(
            "There are 30 red flowers in the garden. Tim ate 2 apples yesterday.",
            "How many flowers are in the garden?",
        );
        let fs = transform_body(&x);
        assert_eq!(fs.with_pred("quan").count(), x.quantities.len());
        for q in &x.quantities {
            for (role, v) in &q.roles {
                assert_eq!(
                    fs.with_first(role.as_str(), &q.id)
                        .filter(|f| f.arg(1) == Some(v))
                        .count(),
                    1
                );
            }
        }
    }

    #[test]
    fn logic_form_roundtrip() {
        let x = extraction(
            "Tim had 5 apples. He bought 3 apples.",
            "How many apples does Tim have now?",
        );
        let lf = LogicForm {
            facts: transform_body(&x),
            ask: Some(transform_question(&x, SolutionType::Tvqf, None).unwrap()),
        };
        let text = lf.to_string();
        let back: LogicForm = text.parse().unwrap();
        assert_eq!(back, lf);
        assert!(
            text.contains("ASK TVQF(quan(?q,#,apple), step(q1,stative,2) & step(q2,positive,2))"),
            "{text}"
        );
    }

    #[test]
    fn rejects_variables_in_fact_lines() {
        assert!("verb(?q,buy)".parse::<LogicForm>().is_err());
        assert!("% only a comment\n"
            .parse::<LogicForm>()
            .unwrap()
            .facts
            .is_empty());
    }
}
