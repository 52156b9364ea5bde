//! Evaluation reports and the expected-accuracy / perplexity measure of a
//! dataset under a template-prior random guesser.

use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::{Dataset, MWProblem};
use crate::learn::{label_dataset, template_priors, weak_label, Models, TrainReport};
use crate::logicform::SolutionType;
use crate::number::Value;
use crate::pipeline::{Pipeline, SolveError};

/// Relative tolerance for a correct answer.
pub const ANSWER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Correct,
    AnnotationFailure,
    WrongType,
    WrongOperands,
    UnificationFailure,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Correct,
        Outcome::AnnotationFailure,
        Outcome::WrongType,
        Outcome::WrongOperands,
        Outcome::UnificationFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::AnnotationFailure => "annotation_failure",
            Outcome::WrongType => "wrong_type",
            Outcome::WrongOperands => "wrong_operands",
            Outcome::UnificationFailure => "unification_failure",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemResult {
    pub id: String,
    pub outcome: Outcome,
    /// Pseudo-label type, when the problem is labelable.
    pub gold_type: Option<SolutionType>,
    pub predicted_type: Option<SolutionType>,
    pub answer: Option<Value>,
    pub gold: Value,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub dataset: String,
    pub results: Vec<ProblemResult>,
}

impl Report {
    pub fn total(&self) -> usize {
        self.results.len()
    }

    pub fn count(&self, o: Outcome) -> usize {
        self.results.iter().filter(|r| r.outcome == o).count()
    }

    pub fn accuracy(&self) -> f64 {
        if self.results.is_empty() {
            return 0.0;
        }
        self.count(Outcome::Correct) as f64 / self.total() as f64
    }

    /// (correct, total) by pseudo-label type.
    pub fn per_type(&self) -> BTreeMap<SolutionType, (usize, usize)> {
        let mut m: BTreeMap<SolutionType, (usize, usize)> = BTreeMap::new();
        for r in &self.results {
            if let Some(t) = r.gold_type {
                let e = m.entry(t).or_default();
                e.1 += 1;
                if r.outcome == Outcome::Correct {
                    e.0 += 1;
                }
            }
        }
        m
    }

    /// (correct, total) grouped by the suffix after the last `-` in the id.
    pub fn per_suffix(&self, suffixes: &[&str]) -> BTreeMap<String, (usize, usize)> {
        let mut m: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for r in &self.results {
            let Some(s) = suffixes.iter().find(|s| r.id.ends_with(&format!("-{s}"))) else {
                continue;
            };
            let e = m.entry(s.to_string()).or_default();
            e.1 += 1;
            if r.outcome == Outcome::Correct {
                e.0 += 1;
            }
        }
        m
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Evaluation of {} ({} problems)",
            self.dataset,
            self.total()
        )?;
        for r in &self.results {
            let ans = r
                .answer
                .as_ref()
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".into());
            let ty = r
                .predicted_type
                .map(|t| t.to_string())
                .unwrap_or_else(|| "-".into());
            write!(
                f,
                "  {:<12} {:<20} type={ty} answer={ans} gold={}",
                r.id, r.outcome, r.gold
            )?;
            if !r.detail.is_empty() {
                write!(f, " ({})", r.detail)?;
            }
            writeln!(f)?;
        }
        writeln!(f)?;
        writeln!(f, "accuracy={:.3}", self.accuracy())?;
        writeln!(f, "problems={}", self.total())?;
        for o in Outcome::ALL {
            writeln!(f, "{}={}", o, self.count(o))?;
        }
        for (t, (c, n)) in self.per_type() {
            writeln!(f, "accuracy.{t}={:.3} ({c}/{n})", c as f64 / n as f64)?;
        }
        Ok(())
    }
}

fn error_outcome(e: &SolveError) -> Outcome {
    match e {
        SolveError::Annotation(_) | SolveError::Quantity(_) => Outcome::AnnotationFailure,
        SolveError::Model(_) => Outcome::WrongType,
        SolveError::Operands(_) => Outcome::WrongOperands,
        SolveError::Transform(_) | SolveError::Inference(_) => Outcome::UnificationFailure,
    }
}

pub fn evaluate_problem(p: &MWProblem, models: &Models, pipeline: &Pipeline) -> ProblemResult {
    let mut r = ProblemResult {
        id: p.id.clone(),
        outcome: Outcome::AnnotationFailure,
        gold_type: None,
        predicted_type: None,
        answer: None,
        gold: p.answer.clone(),
        detail: String::new(),
    };
    let analysis = match pipeline.analyze(p) {
        Ok(a) => a,
        Err(e) => {
            r.outcome = error_outcome(&e);
            r.detail = e.to_string();
            return r;
        }
    };
    let label = weak_label(p, &analysis, pipeline).ok();
    r.gold_type = label.as_ref().map(|l| l.chosen.stype);
    match pipeline.solve_analysis(analysis, models) {
        Err(e) => {
            r.outcome = error_outcome(&e);
            r.detail = e.to_string();
        }
        Ok(s) => {
            r.predicted_type = Some(s.stype);
            let correct = s.answer.approx_eq(&p.answer, ANSWER_TOLERANCE);
            r.outcome = if correct {
                Outcome::Correct
            } else if label.is_some_and(|l| l.hits.iter().any(|h| h.stype == s.stype)) {
                Outcome::WrongOperands
            } else {
                Outcome::WrongType
            };
            if let Some(c) = &s.operands {
                r.detail = c.to_string();
            }
            r.answer = Some(s.answer);
        }
    }
    r
}

/// Runs the full pipeline on every problem; failures are recorded per problem.
pub fn evaluate(dataset: &Dataset, models: &Models, pipeline: &Pipeline) -> Report {
    Report {
        dataset: dataset.name.clone(),
        results: dataset
            .problems
            .iter()
            .map(|p| evaluate_problem(p, models, pipeline))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("expected accuracy needs at least 2 quantities, got {0}")]
    TooFewQuantities(usize),
    #[error("perplexity of an empty dataset is undefined")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateStat {
    pub id: String,
    pub stype: SolutionType,
    /// Quantities the template consumes.
    pub arity: usize,
    pub prior: f64,
    /// Quantities in the problem.
    pub n: usize,
}

impl TemplateStat {
    pub fn template(&self) -> String {
        format!("{}/{}", self.stype, self.arity)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Chance that a guesser drawing the template by prior, then operands
/// uniformly, reproduces this problem's solution.
pub fn expected_accuracy(t: &TemplateStat) -> Result<f64, MetricError> {
    if t.n < 2 {
        return Err(MetricError::TooFewQuantities(t.n));
    }
    let ways = match t.stype {
        SolutionType::Addition | SolutionType::Multiplication => binomial(t.n, 2),
        SolutionType::Subtraction | SolutionType::Division => (t.n * (t.n - 1)) as f64,
        SolutionType::Sum | SolutionType::Tvqf => binomial(t.n, t.arity.min(t.n)),
    };
    Ok(t.prior / ways)
}

/// 2^(-log2 A), i.e. 1/A.
pub fn perplexity_of(a: f64) -> f64 {
    2f64.powf(-a.log2())
}

/// Mean expected accuracy over the stats, as PP.
pub fn perplexity(stats: &[TemplateStat]) -> Result<f64, MetricError> {
    if stats.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sum = 0.0;
    for s in stats {
        sum += expected_accuracy(s)?;
    }
    Ok(perplexity_of(sum / stats.len() as f64))
}

/// Template stats for every labelable problem, with unsmoothed priors
/// estimated from the dataset itself.
pub fn dataset_template_stats(
    dataset: &Dataset,
    pipeline: &Pipeline,
) -> (Vec<TemplateStat>, TrainReport) {
    let (labeled, report) = label_dataset(dataset, pipeline);
    let priors = template_priors(&report.labeled, false);
    let stats = labeled
        .iter()
        .map(|(a, l)| TemplateStat {
            id: l.id.clone(),
            stype: l.chosen.stype,
            arity: l.chosen.arity,
            prior: priors[&l.chosen.template()],
            n: a.extraction.quantities.len(),
        })
        .collect();
    (stats, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stat(stype: SolutionType, arity: usize, prior: f64, n: usize) -> TemplateStat {
        TemplateStat {
            id: "t".into(),
            stype,
            arity,
            prior,
            n,
        }
    }

    #[test]
    fn expected_accuracy_examples() {
        assert_eq!(
            expected_accuracy(&stat(SolutionType::Addition, 2, 1.0, 2)),
            Ok(1.0)
        );
        assert_eq!(
            expected_accuracy(&stat(SolutionType::Subtraction, 2, 1.0, 2)),
            Ok(0.5)
        );
        assert_eq!(
            expected_accuracy(&stat(SolutionType::Multiplication, 2, 0.5, 3)),
            Ok(0.5 / 3.0)
        );
        assert_eq!(
            expected_accuracy(&stat(SolutionType::Sum, 3, 1.0, 4)),
            Ok(0.25)
        );
        assert_eq!(
            expected_accuracy(&stat(SolutionType::Division, 2, 1.0, 1)),
            Err(MetricError::TooFewQuantities(1))
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }

    #[test]
    fn perplexity_fixtures() {
        assert_eq!(
            perplexity(&[stat(SolutionType::Addition, 2, 1.0, 2)]),
            Ok(1.0)
        );
        let three = vec![stat(SolutionType::Subtraction, 2, 1.0, 3); 3];
        assert!((perplexity(&three).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(perplexity(&[]), Err(MetricError::Empty));
    }

    #[test]
    fn empty_report() {
        let r = Report::default();
        assert_eq!(r.accuracy(), 0.0);
        assert!(r.to_string().contains("accuracy=0.000"));
    }
}
