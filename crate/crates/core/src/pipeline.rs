//! End-to-end solving: annotate, extract, transform, classify, select
//! operands, saturate and evaluate.

use std::fmt::Write as _;

use crate::corpus::{AnnotateError, Annotation, Annotator, MWProblem};
use crate::inference::{
    bundled_rules, eval_utility, saturate, Firing, InferenceError, InferenceRule, DEFAULT_BUDGET,
};
use crate::learn::Models;
use crate::lexicon::Lexicon;
use crate::linear::ModelError;
use crate::logicform::{
    transform_body, transform_question, FactSet, LogicForm, SolutionType, TransformError,
    UtilityCall,
};
use crate::number::Value;
use crate::operands::{select_operands, OperandConfig, OperandError};
use crate::quantity::{extract_quantities, Extraction, QuantityError};
use crate::sti::{
    extract_sti_features, predict_solution_type, StiConfig, StiFeatures, FEATURE_NAMES,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("annotation: {0}")]
    Annotation(#[from] AnnotateError),
    #[error("quantity extraction: {0}")]
    Quantity(#[from] QuantityError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("operand selection: {0}")]
    Operands(#[from] OperandError),
    #[error("logic form: {0}")]
    Transform(#[from] TransformError),
    #[error("inference: {0}")]
    Inference(#[from] InferenceError),
}

impl SolveError {
    pub fn stage(&self) -> &'static str {
        match self {
            SolveError::Annotation(_) => "annotation",
            SolveError::Quantity(_) => "quantity extraction",
            SolveError::Model(_) => "model",
            SolveError::Operands(_) => "operand selection",
            SolveError::Transform(_) => "logic form",
            SolveError::Inference(_) => "inference",
        }
    }
}

/// Shared, read-only context for solving and training.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub lexicon: Lexicon,
    pub rules: Vec<InferenceRule>,
    pub sti: StiConfig,
    pub budget: usize,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::new(Lexicon::bundled(), bundled_rules())
    }
}

/// Everything derived from a problem before the solution type is known.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub annotation: Annotation,
    pub extraction: Extraction,
    pub features: StiFeatures,
    pub facts: FactSet,
    pub saturated: FactSet,
    pub firings: Vec<Firing>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub analysis: Analysis,
    pub stype: SolutionType,
    pub type_scores: Vec<(SolutionType, f64)>,
    pub operands: Option<OperandConfig>,
    pub call: UtilityCall,
    pub answer: Value,
}

impl Pipeline {
    pub fn new(lexicon: Lexicon, rules: Vec<InferenceRule>) -> Pipeline {
        Pipeline {
            lexicon,
            rules,
            sti: StiConfig::default(),
            budget: DEFAULT_BUDGET,
        }
    }

    /// The problem's own annotation if present, else the built-in annotator.
    pub fn annotate(&self, p: &MWProblem) -> Result<Annotation, AnnotateError> {
        match &p.annotation {
            Some(a) => Ok(a.clone()),
            None => Annotator::new(&self.lexicon).annotate_text(&p.body, &p.question),
        }
    }

    pub fn analyze(&self, p: &MWProblem) -> Result<Analysis, SolveError> {
        let annotation = self.annotate(p)?;
        let extraction = extract_quantities(&annotation, &self.lexicon)?;
        let features = extract_sti_features(&extraction, &annotation, &self.lexicon, &self.sti);
        let facts = transform_body(&extraction);
        let (saturated, firings) = saturate(&facts, &self.rules, &self.lexicon, self.budget)?;
        Ok(Analysis {
            annotation,
            extraction,
            features,
            facts,
            saturated,
            firings,
        })
    }

    /// Builds and evaluates the utility call for a given type and operands.
    pub fn execute(
        &self,
        a: &Analysis,
        stype: SolutionType,
        operands: Option<&OperandConfig>,
    ) -> Result<(UtilityCall, Value), SolveError> {
        let pair = operands.map(|c| (c.first.as_str(), c.second.as_str()));
        let call = transform_question(&a.extraction, stype, pair)?;
        let value = eval_utility(&call, &a.saturated, &self.lexicon)?;
        Ok((call, value))
    }

    pub fn solve_analysis(
        &self,
        analysis: Analysis,
        models: &Models,
    ) -> Result<Solution, SolveError> {
        let (stype, type_scores) = predict_solution_type(&analysis.features, &models.sti)?;
        self.solve_as(analysis, stype, type_scores, models)
    }

    /// Solves with a fixed solution type.
    pub fn solve_as(
        &self,
        analysis: Analysis,
        stype: SolutionType,
        type_scores: Vec<(SolutionType, f64)>,
        models: &Models,
    ) -> Result<Solution, SolveError> {
        let operands = if stype.is_arithmetic() {
            Some(select_operands(
                &analysis.extraction,
                &analysis.facts,
                stype,
                &models.operands,
                &models.relation,
                &self.lexicon,
            )?)
        } else {
            None
        };
        let (call, answer) = self.execute(&analysis, stype, operands.as_ref())?;
        Ok(Solution {
            analysis,
            stype,
            type_scores,
            operands,
            call,
            answer,
        })
    }

    pub fn solve(&self, p: &MWProblem, models: &Models) -> Result<Solution, SolveError> {
        self.solve_analysis(self.analyze(p)?, models)
    }
}

impl Solution {
    /// Logic-form text of the solution with the trace in `%` comments.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let ext = &self.analysis.extraction;
        let q0 = &ext.question;
        let _ = writeln!(out, "% quantities");
        for q in &ext.quantities {
            let _ = writeln!(
                out,
                "%   {} = {} {}/{} verb={} T={} AR={} A={} R={}",
                q.id,
                q.value,
                q.unit,
                q.entity,
                q.verb,
                q.time,
                q.anchor_role,
                q.action,
                q.relevance
            );
        }
        let _ = writeln!(
            out,
            "%   asked: {}/{} verb={} T={} anchor={}",
            q0.unit, q0.entity, q0.verb, q0.time, q0.anchor
        );
        let on: Vec<&str> = FEATURE_NAMES
            .iter()
            .zip(self.analysis.features.0)
            .filter(|(_, v)| *v)
            .map(|(k, _)| *k)
            .collect();
        let _ = writeln!(out, "% features: {}", on.join(" "));
        let scores: Vec<String> = self
            .type_scores
            .iter()
            .map(|(t, p)| format!("{t}={p:.3}"))
            .collect();
        let _ = writeln!(out, "% type: {} ({})", self.stype, scores.join(" "));
        if let Some(c) = &self.operands {
            let _ = writeln!(out, "% operands: {c}");
        }
        for f in &self.analysis.firings {
            let b: Vec<String> = f
                .bindings
                .iter()
                .map(|(k, v)| format!("?{k}={v}"))
                .collect();
            let d: Vec<String> = f.derived.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "% rule {} [{}] derived {}",
                f.rule,
                b.join(" "),
                d.join(" & ")
            );
        }
        let lf = LogicForm {
            facts: self.analysis.saturated.clone(),
            ask: Some(self.call.clone()),
        };
        out.push_str(&lf.to_string());
        let _ = writeln!(out, "% answer: {}", self.answer);
        out
    }
}
