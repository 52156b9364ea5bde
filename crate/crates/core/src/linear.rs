//! L2-regularized linear classifiers (softmax or logistic link) trained by
//! full-batch gradient descent from zero, plus their text format:
//! `class feature weight` lines and `class __bias__ weight`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const BIAS: &str = "__bias__";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1e-3,
            epochs: 3000,
            learning_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Softmax,
    /// One weight row: P(true) = sigmoid(w.x + b).
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub link: Link,
    pub classes: Vec<String>,
    pub features: Vec<String>,
    /// One row per class (a single row for logistic).
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("model features do not match the extractor: {0}")]
    FeatureMismatch(String),
    #[error("model has no classes")]
    Empty,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

impl LinearModel {
    pub fn zeros(link: Link, classes: Vec<String>, features: Vec<String>) -> LinearModel {
        let rows = match link {
            Link::Softmax => classes.len(),
            Link::Logistic => 1,
        };
        LinearModel {
            link,
            weights: vec![vec![0.0; features.len()]; rows],
            bias: vec![0.0; rows],
            classes,
            features,
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    /// Class probabilities (softmax), or `[P(true)]` for logistic.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let s = self.scores(x);
        match self.link {
            Link::Softmax => softmax(&s),
            Link::Logistic => vec![sigmoid(s[0])],
        }
    }

    /// Index of the highest-scoring class; ties go to the earlier class.
    pub fn argmax(&self, x: &[f64]) -> usize {
        let s = self.scores(x);
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = i;
            }
        }
        best
    }

    /// Multiclass fit; `labels[i]` indexes `classes`.
    pub fn train_softmax(
        classes: Vec<String>,
        features: Vec<String>,
        xs: &[Vec<f64>],
        labels: &[usize],
        cfg: &TrainConfig,
    ) -> LinearModel {
        let mut m = LinearModel::zeros(Link::Softmax, classes, features);
        if xs.is_empty() {
            return m;
        }
        let k = m.classes.len();
        let d = m.features.len();
        let n = xs.len() as f64;
        for _ in 0..cfg.epochs {
            let mut gw = vec![vec![0.0; d]; k];
            let mut gb = vec![0.0; k];
            for (x, &y) in xs.iter().zip(labels) {
                let p = softmax(&m.scores(x));
                for c in 0..k {
                    let err = p[c] - if c == y { 1.0 } else { 0.0 };
                    gb[c] += err;
                    for (g, xi) in gw[c].iter_mut().zip(x) {
                        *g += err * xi;
                    }
                }
            }
            for c in 0..k {
                for (w, g) in m.weights[c].iter_mut().zip(&gw[c]) {
                    *w -= cfg.learning_rate * (g / n + cfg.l2 * *w);
                }
                m.bias[c] -= cfg.learning_rate * gb[c] / n;
            }
        }
        m
    }

    /// Binary fit with a logistic link.
    pub fn train_logistic(
        features: Vec<String>,
        xs: &[Vec<f64>],
        labels: &[bool],
        cfg: &TrainConfig,
    ) -> LinearModel {
        let mut m = LinearModel::zeros(Link::Logistic, vec!["selected".into()], features);
        if xs.is_empty() {
            return m;
        }
        let d = m.features.len();
        let n = xs.len() as f64;
        for _ in 0..cfg.epochs {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (x, &y) in xs.iter().zip(labels) {
                let err = sigmoid(dot(&m.weights[0], x) + m.bias[0]) - if y { 1.0 } else { 0.0 };
                gb += err;
                for (g, xi) in gw.iter_mut().zip(x) {
                    *g += err * xi;
                }
            }
            for (w, g) in m.weights[0].iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * (g / n + cfg.l2 * *w);
            }
            m.bias[0] -= cfg.learning_rate * gb / n;
        }
        m
    }

    /// Fails unless the model's feature names equal `expected` in order.
    pub fn check_features(&self, expected: &[String]) -> Result<(), ModelError> {
        if self.features == expected {
            return Ok(());
        }
        let missing = expected.iter().find(|f| !self.features.contains(f));
        let extra = self.features.iter().find(|f| !expected.contains(f));
        Err(ModelError::FeatureMismatch(match (missing, extra) {
            (Some(m), _) => format!("missing `{m}`"),
            (_, Some(e)) => format!("unknown `{e}`"),
            _ => "feature order differs".into(),
        }))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, class) in self.classes.iter().enumerate().take(self.weights.len()) {
            for (f, w) in self.features.iter().zip(&self.weights[c]) {
                let _ = writeln!(out, "{class} {f} {w}");
            }
            let _ = writeln!(out, "{class} {BIAS} {}", self.bias[c]);
        }
        out
    }

    pub fn from_text(text: &str, link: Link) -> Result<LinearModel, ModelError> {
        let mut classes: Vec<String> = Vec::new();
        let mut features: Vec<String> = Vec::new();
        let mut entries = Vec::new();
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
            let [class, feature, weight] = parts[..] else {
                return Err(err("expected `class feature weight`"));
            };
            let w: f64 = weight.parse().map_err(|_| err("bad weight"))?;
            if !w.is_finite() {
                return Err(err("weight is not finite"));
            }
            if !classes.iter().any(|c| c == class) {
                classes.push(class.to_string());
            }
            if feature != BIAS && !features.iter().any(|f| f == feature) {
                features.push(feature.to_string());
            }
            entries.push((class.to_string(), feature.to_string(), w));
        }
        if classes.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut m = LinearModel::zeros(link, classes, features);
        for (class, feature, w) in entries {
            let c = m.classes.iter().position(|x| *x == class).unwrap_or(0);
            if feature == BIAS {
                m.bias[c] = w;
            } else {
                let f = m.features.iter().position(|x| *x == feature).unwrap_or(0);
                m.weights[c][f] = w;
            }
        }
        Ok(m)
    }
}
