//! Weak supervision: pseudo-labels from gold answers, then fitting the
//! solution-type model, the operand model, P(r|s) and template priors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::corpus::{Dataset, MWProblem};
use crate::linear::{LinearModel, Link, ModelError, TrainConfig};
use crate::logicform::{SolutionType, UtilityCall};
use crate::number::Value;
use crate::operands::{
    candidate_configs, extract_operand_features, operand_feature_names, OperandConfig,
    RelationPrior,
};
use crate::pipeline::{Analysis, Pipeline, SolveError};
use crate::sti::feature_names;

/// Relative tolerance for matching an execution against the gold answer.
pub const LABEL_TOLERANCE: f64 = 1e-9;

/// Types in label preference order.
pub const PREFERENCE: [SolutionType; 6] = [
    SolutionType::Sum,
    SolutionType::Tvqf,
    SolutionType::Addition,
    SolutionType::Subtraction,
    SolutionType::Multiplication,
    SolutionType::Division,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub stype: SolutionType,
    pub operands: Option<OperandConfig>,
    /// Quantities the utility consumed: 2 for arithmetic, the number of
    /// summed facts for Sum, the number of steps for TVQF.
    pub arity: usize,
}

impl Candidate {
    pub fn template(&self) -> String {
        format!("{}/{}", self.stype, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabel {
    pub id: String,
    /// Every execution that reproduces the answer.
    pub hits: Vec<Candidate>,
    pub chosen: Candidate,
}

fn call_arity(call: &UtilityCall, a: &Analysis, pipeline: &Pipeline) -> usize {
    match call {
        UtilityCall::Arithmetic { .. } => 2,
        UtilityCall::Sum {
            function,
            condition,
        } => crate::inference::sum_matches(function, condition, &a.saturated, &pipeline.lexicon)
            .len(),
        UtilityCall::Tvqf { steps, .. } => steps.len(),
    }
}

/// All (type, operands) executions that hit `answer`, in preference order.
pub fn consistent_executions(a: &Analysis, answer: &Value, pipeline: &Pipeline) -> Vec<Candidate> {
    let mut hits = Vec::new();
    for stype in PREFERENCE {
        let configs: Vec<Option<OperandConfig>> = if stype.is_arithmetic() {
            candidate_configs(&a.extraction.quantities)
                .into_iter()
                .map(Some)
                .collect()
        } else {
            vec![None]
        };
        for c in configs {
            if let Ok((call, v)) = pipeline.execute(a, stype, c.as_ref()) {
                if v.approx_eq(answer, LABEL_TOLERANCE) {
                    hits.push(Candidate {
                        stype,
                        arity: call_arity(&call, a, pipeline),
                        operands: c,
                    });
                }
            }
        }
    }
    hits
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelError {
    #[error(transparent)]
    Pipeline(#[from] SolveError),
    #[error("no execution reproduces the answer {0}")]
    Unlabelable(Value),
}

pub fn weak_label(
    p: &MWProblem,
    a: &Analysis,
    pipeline: &Pipeline,
) -> Result<PseudoLabel, LabelError> {
    let hits = consistent_executions(a, &p.answer, pipeline);
    let chosen = hits
        .first()
        .cloned()
        .ok_or_else(|| LabelError::Unlabelable(p.answer.clone()))?;
    Ok(PseudoLabel {
        id: p.id.clone(),
        hits,
        chosen,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub sti: LinearModel,
    pub operands: LinearModel,
    pub relation: RelationPrior,
    /// Template (e.g. `Sum/3`) to prior probability.
    pub templates: BTreeMap<String, f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("no problem in the dataset could be labeled")]
    NothingLabelable,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model { path: String, source: ModelError },
}

pub const STI_FILE: &str = "sti.model";
pub const OPERANDS_FILE: &str = "operands.model";
pub const PRIORS_FILE: &str = "templates.priors";

impl Models {
    /// `[operand]` model lines followed by `[relation]` rows.
    pub fn operands_text(&self) -> String {
        format!(
            "[operand]\n{}[relation]\n{}",
            self.operands.to_text(),
            self.relation.to_text()
        )
    }

    pub fn priors_text(&self) -> String {
        self.templates
            .iter()
            .map(|(t, p)| format!("{t} {p}\n"))
            .collect()
    }

    pub fn save(&self, dir: &Path) -> Result<(), LearnError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| LearnError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, text) in [
            (STI_FILE, self.sti.to_text()),
            (OPERANDS_FILE, self.operands_text()),
            (PRIORS_FILE, self.priors_text()),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(io(&p))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Models, LearnError> {
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|source| LearnError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let model_err = |name: &str| {
            let path = dir.join(name).display().to_string();
            move |source| LearnError::Model { path, source }
        };
        let sti =
            LinearModel::from_text(&read(STI_FILE)?, Link::Softmax).map_err(model_err(STI_FILE))?;
        sti.check_features(&feature_names())
            .map_err(model_err(STI_FILE))?;
        let ops = read(OPERANDS_FILE)?;
        let (op_text, rel_text) = split_sections(&ops).map_err(model_err(OPERANDS_FILE))?;
        let operands =
            LinearModel::from_text(op_text, Link::Logistic).map_err(model_err(OPERANDS_FILE))?;
        operands
            .check_features(&operand_feature_names())
            .map_err(model_err(OPERANDS_FILE))?;
        let relation = RelationPrior::from_text(rel_text).map_err(model_err(OPERANDS_FILE))?;
        let mut templates = BTreeMap::new();
        for (i, line) in read(PRIORS_FILE)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .split_once(' ')
                .and_then(|(t, p)| Some((t.to_string(), p.trim().parse::<f64>().ok()?)));
            let (t, p) = parsed.ok_or_else(|| {
                model_err(PRIORS_FILE)(ModelError::Parse {
                    line: i + 1,
                    msg: "expected `template probability`".into(),
                })
            })?;
            templates.insert(t, p);
        }
        Ok(Models {
            sti,
            operands,
            relation,
            templates,
        })
    }
}

fn split_sections(text: &str) -> Result<(&str, &str), ModelError> {
    let missing = |h: &str| ModelError::Parse {
        line: 1,
        msg: format!("missing `{h}` section"),
    };
    let op = text.find("[operand]").ok_or_else(|| missing("[operand]"))?;
    let rel = text
        .find("[relation]")
        .ok_or_else(|| missing("[relation]"))?;
    if rel < op {
        return Err(missing("[operand]"));
    }
    Ok((
        &text[op + "[operand]".len()..rel],
        &text[rel + "[relation]".len()..],
    ))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub labeled: Vec<PseudoLabel>,
    /// Problem id and reason.
    pub unlabelable: Vec<(String, String)>,
}

impl TrainReport {
    pub fn histogram(&self) -> BTreeMap<SolutionType, usize> {
        let mut h = BTreeMap::new();
        for l in &self.labeled {
            *h.entry(l.chosen.stype).or_default() += 1;
        }
        h
    }
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "labelable={}", self.labeled.len())?;
        writeln!(f, "unlabelable={}", self.unlabelable.len())?;
        for t in SolutionType::ALL {
            writeln!(
                f,
                "label.{t}={}",
                self.histogram().get(&t).copied().unwrap_or(0)
            )?;
        }
        for (id, why) in &self.unlabelable {
            writeln!(f, "skipped {id}: {why}")?;
        }
        Ok(())
    }
}

/// Labels every problem; failures are reported, not raised.
pub fn label_dataset(
    dataset: &Dataset,
    pipeline: &Pipeline,
) -> (Vec<(Analysis, PseudoLabel)>, TrainReport) {
    let mut out = Vec::new();
    let mut report = TrainReport::default();
    for p in &dataset.problems {
        let labeled = pipeline
            .analyze(p)
            .map_err(LabelError::from)
            .and_then(|a| weak_label(p, &a, pipeline).map(|l| (a, l)));
        match labeled {
            Ok((a, l)) => {
                report.labeled.push(l.clone());
                out.push((a, l));
            }
            Err(e) => report.unlabelable.push((p.id.clone(), e.to_string())),
        }
    }
    (out, report)
}

/// Add-one smoothed relative frequencies over observed templates.
pub fn template_priors(labels: &[PseudoLabel], smoothed: bool) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.chosen.template()).or_default() += 1.0;
    }
    let add = if smoothed { 1.0 } else { 0.0 };
    let total: f64 = counts.values().map(|c| c + add).sum();
    counts
        .into_iter()
        .map(|(t, c)| (t, (c + add) / total))
        .collect()
}

/// Fits all models. Deterministic: zero initialization and a fixed schedule.
pub fn train(
    dataset: &Dataset,
    pipeline: &Pipeline,
    cfg: &TrainConfig,
) -> Result<(Models, TrainReport), LearnError> {
    let (labeled, report) = label_dataset(dataset, pipeline);
    if labeled.is_empty() {
        return Err(LearnError::NothingLabelable);
    }
    Ok((fit(&labeled, pipeline, cfg), report))
}

pub fn fit(labeled: &[(Analysis, PseudoLabel)], pipeline: &Pipeline, cfg: &TrainConfig) -> Models {
    let classes: Vec<String> = SolutionType::ALL.iter().map(|t| t.to_string()).collect();
    let xs: Vec<Vec<f64>> = labeled.iter().map(|(a, _)| a.features.to_vec()).collect();
    let ys: Vec<usize> = labeled
        .iter()
        .map(|(_, l)| l.chosen.stype.index())
        .collect();
    let sti = LinearModel::train_softmax(classes, feature_names(), &xs, &ys, cfg);

    let mut ox = Vec::new();
    let mut oy = Vec::new();
    let mut relations = Vec::new();
    for (a, l) in labeled {
        let Some(c) = &l.chosen.operands else {
            continue;
        };
        relations.push((l.chosen.stype, c.r));
        let n = a.extraction.quantities.len();
        for (q, &sel) in a.extraction.quantities.iter().zip(&c.selected) {
            let f = extract_operand_features(
                q,
                &a.extraction.question,
                n,
                &a.facts,
                l.chosen.stype,
                &pipeline.lexicon,
            );
            ox.push(f.to_vec());
            oy.push(sel);
        }
    }
    let operands = LinearModel::train_logistic(operand_feature_names(), &ox, &oy, cfg);
    let labels: Vec<PseudoLabel> = labeled.iter().map(|(_, l)| l.clone()).collect();
    Models {
        sti,
        operands,
        relation: RelationPrior::from_counts(&relations),
        templates: template_priors(&labels, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(id: &str, body: &str, q: &str, answer: i64) -> MWProblem {
        MWProblem::new(id, body, q, Value::from_int(answer))
    }

    #[test]
    fn subtraction_label_and_prior() {
        let pipeline = Pipeline::default();
        let p = problem(
            "s",
            "Tim had 9 apples. He ate 4 apples.",
            "How many apples does Tim have now?",
            5,
        );
        let a = pipeline.analyze(&p).unwrap();
        let l = weak_label(&p, &a, &pipeline).unwrap();
        // TVQF hits first: 9 then -4.
        assert_eq!(l.chosen.stype, SolutionType::Tvqf);
        assert!(l
            .hits
            .iter()
            .any(|c| c.stype == SolutionType::Subtraction && c.operands.as_ref().unwrap().r == 1));
    }

    #[test]
    fn unlabelable_reported() {
        let pipeline = Pipeline::default();
        let p = problem(
            "u",
            "Tim had 9 apples. He ate 4 apples.",
            "How many apples does Tim have now?",
            1000,
        );
        let a = pipeline.analyze(&p).unwrap();
        assert!(matches!(
            weak_label(&p, &a, &pipeline),
            Err(LabelError::Unlabelable(_))
        ));
        let d = Dataset {
            name: "d".into(),
            problems: vec![p],
        };
        assert!(matches!(
            train(&d, &pipeline, &TrainConfig::default()),
            Err(LearnError::NothingLabelable)
        ));
    }

    #[test]
    fn models_roundtrip_through_files() {
        let pipeline = Pipeline::default();
        let d = Dataset {
            name: "d".into(),
            problems: vec![problem(
                "a",
                "Joan has 5 apples. Sara has 3 more apples than Joan.",
                "How many apples does Sara have?",
                8,
            )],
        };
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let (m, report) = train(&d, &pipeline, &cfg).unwrap();
        assert_eq!(report.labeled.len(), 1);
        let dir = tempfile::tempdir().unwrap();
        m.save(dir.path()).unwrap();
        let back = Models::load(dir.path()).unwrap();
        assert_eq!(back, m);
        let s: f64 = m.templates.values().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
