//! L2-regularized linear classifiers.
//!
//! Both trainers minimize
//!
//! ```text
//! f(w, b) = ½‖w‖² + C · Σᵢ loss(yᵢ · (w·xᵢ + b))      yᵢ ∈ {−1, +1}
//! ```
//!
//! with `loss(m) = max(0, 1 − m)²` for the SVM and `loss(m) = ln(1 + e^(−m))`
//! for logistic regression. The intercept is not penalized. Optimization is a
//! truncated Newton method: each outer iteration solves the Newton system
//! with conjugate gradients (Hessian-vector products only; the generalized
//! Hessian for the squared hinge) and takes an Armijo backtracking step, so
//! the objective never increases. Weights start at zero and all sums run in
//! a fixed order, which makes training bit-reproducible.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorDocument, Label, Language};
use crate::error::{Error, Result};
use crate::preprocess::Preprocessor;
use crate::vectorize::{FeatureSpace, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    LogReg,
}

impl ModelKind {
    pub fn loss(self) -> Loss {
        match self {
            ModelKind::Svm => Loss::SquaredHinge,
            ModelKind::LogReg => Loss::Logistic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::LogReg => "logreg",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelKind> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ModelKind::Svm),
            "logreg" | "lr" => Ok(ModelKind::LogReg),
            other => Err(Error::InvalidConfig(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredHinge,
    Logistic,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::SquaredHinge => "squared_hinge",
            Loss::Logistic => "logistic",
        }
    }

    /// Loss, first and (generalized) second derivative at margin `m`.
    fn eval(self, m: f64) -> (f64, f64, f64) {
        match self {
            Loss::SquaredHinge => {
                let slack = 1.0 - m;
                if slack > 0.0 {
                    (slack * slack, -2.0 * slack, 2.0)
                } else {
                    (0.0, 0.0, 0.0)
                }
            }
            Loss::Logistic => {
                let value = if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                };
                let p = sigmoid(m);
                (value, p - 1.0, p * (1.0 - p))
            }
        }
    }

    fn value(self, m: f64) -> f64 {
        self.eval(m).0
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Loss> {
        match s {
            "squared_hinge" => Ok(Loss::SquaredHinge),
            "logistic" => Ok(Loss::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown loss {other:?}"))),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse regularization strength.
    pub c: f64,
    /// Stop when the gradient norm falls to or below this value.
    pub tolerance: f64,
    /// Cap on outer (Newton) iterations.
    pub max_iterations: usize,
    pub loss: Loss,
    pub fit_intercept: bool,
}

impl TrainConfig {
    pub fn for_kind(kind: ModelKind) -> TrainConfig {
        TrainConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_iterations: 1000,
            loss: kind.loss(),
            fit_intercept: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// The training objective over a fixed data set. Parameters are packed as
/// `[w_0, …, w_{d−1}, b]`.
pub struct Objective<'a> {
    x: &'a [SparseVector],
    y: Vec<f64>,
    dimension: usize,
    c: f64,
    loss: Loss,
    fit_intercept: bool,
}

impl<'a> Objective<'a> {
    pub fn new(x: &'a [SparseVector], y: &[Label], config: &TrainConfig) -> Result<Objective<'a>> {
        config.validate()?;
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::EmptyInput("training needs at least two examples"));
        }
        let dimension = x[0].dimension();
        if let Some(bad) = x.iter().find(|v| v.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: bad.dimension(),
            });
        }
        if !(y.contains(&Label::TrueNewsSpreader) && y.contains(&Label::FakeNewsSpreader)) {
            return Err(Error::SingleClassInput);
        }
        Ok(Objective {
            x,
            y: y.iter().map(|l| l.sign()).collect(),
            dimension,
            c: config.c,
            loss: config.loss,
            fit_intercept: config.fit_intercept,
        })
    }

    pub fn parameter_len(&self) -> usize {
        self.dimension + 1
    }

    fn decision_values(&self, theta: &[f64]) -> Vec<f64> {
        let (w, b) = theta.split_at(self.dimension);
        self.x.iter().map(|x| x.dot(w) + b[0]).collect()
    }

    fn value_at(&self, theta: &[f64], z: &[f64]) -> f64 {
        let w = &theta[..self.dimension];
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let data: f64 = z.iter().zip(&self.y).map(|(z, y)| self.loss.value(y * z)).sum();
        reg + self.c * data
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.value_at(theta, &self.decision_values(theta))
    }

    /// Gradient plus per-example curvature `C·loss''` at `z`.
    fn gradient_at(&self, theta: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension;
        let mut grad = theta.to_vec();
        grad[d] = 0.0;
        let mut curvature = Vec::with_capacity(z.len());
        for ((x, &y), &z) in self.x.iter().zip(&self.y).zip(z) {
            let (_, d1, d2) = self.loss.eval(y * z);
            let coef = self.c * d1 * y;
            if coef != 0.0 {
                for &(i, v) in x.entries() {
                    grad[i] += coef * v;
                }
                grad[d] += coef;
            }
            curvature.push(self.c * d2);
        }
        if !self.fit_intercept {
            grad[d] = 0.0;
        }
        (grad, curvature)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.gradient_at(theta, &self.decision_values(theta)).0
    }

    fn hessian_vector(&self, curvature: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.dimension;
        let mut out = v.to_vec();
        out[d] = 0.0;
        for (x, &h) in self.x.iter().zip(curvature) {
            if h == 0.0 {
                continue;
            }
            let xv = h * (x.dot(&v[..d]) + v[d]);
            for &(i, val) in x.entries() {
                out[i] += xv * val;
            }
            out[d] += xv;
        }
        if !self.fit_intercept {
            out[d] = 0.0;
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Convergence record of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Objective value before the first step and after every outer iteration.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub kind: ModelKind,
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub decision: f64,
    /// The decision value was exactly zero and resolved to class 0.
    pub tie: bool,
}

impl LinearClassifier {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &SparseVector) -> Result<f64> {
        if x.dimension() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.dimension(),
            });
        }
        Ok(x.dot(&self.weights) + self.bias)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        let decision = self.decision(x)?;
        let label = if decision > 0.0 {
            Label::FakeNewsSpreader
        } else {
            Label::TrueNewsSpreader
        };
        Ok(Prediction {
            label,
            decision,
            tie: decision == 0.0,
        })
    }

    /// Probability of the fake-news-spreader class. Logistic models only.
    pub fn predict_proba(&self, x: &SparseVector) -> Result<f64> {
        if self.kind != ModelKind::LogReg {
            return Err(Error::WrongModelKind { expected: "logreg" });
        }
        Ok(sigmoid(self.decision(x)?))
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub classifier: LinearClassifier,
    pub diagnostics: TrainDiagnostics,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
const MAX_CG_STEPS: usize = 500;

pub fn train(kind: ModelKind, x: &[SparseVector], y: &[Label], config: &TrainConfig) -> Result<Fit> {
    if config.loss != kind.loss() {
        return Err(Error::InvalidConfig(format!(
            "{kind} models train with the {} loss, config says {}",
            kind.loss().name(),
            config.loss.name()
        )));
    }
    let objective = Objective::new(x, y, config)?;
    let n = objective.parameter_len();
    let mut theta = vec![0.0; n];
    let mut z = objective.decision_values(&theta);
    let mut f = objective.value_at(&theta, &z);
    let mut history = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    let mut gnorm;

    loop {
        let (grad, curvature) = objective.gradient_at(&theta, &z);
        gnorm = dot(&grad, &grad).sqrt();
        if gnorm <= config.tolerance {
            converged = true;
            break;
        }
        if iterations == config.max_iterations {
            break;
        }
        iterations += 1;

        let step = conjugate_gradient(&objective, &curvature, &grad, gnorm);
        let slope = dot(&grad, &step);
        if slope >= 0.0 {
            break;
        }
        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + alpha * s).collect();
            let trial_z = objective.decision_values(&trial);
            let trial_f = objective.value_at(&trial, &trial_z);
            if trial_f <= f + ARMIJO * alpha * slope {
                break Some((trial, trial_z, trial_f));
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((t, tz, tf)) => {
                theta = t;
                z = tz;
                f = tf;
                history.push(f);
            }
            // No descent possible at floating-point resolution.
            None => break,
        }
    }

    if !converged {
        log::warn!(
            "{kind} training stopped after {iterations} iterations with gradient norm {gnorm:.3e} (tolerance {:.1e})",
            config.tolerance
        );
    }
    let bias = theta.pop().expect("bias slot");
    Ok(Fit {
        classifier: LinearClassifier {
            kind,
            weights: theta,
            bias,
        },
        diagnostics: TrainDiagnostics {
            iterations,
            converged,
            gradient_norm: gnorm,
            objective_history: history,
        },
    })
}

/// Approximately solves `H s = −g`, stopping at relative residual
/// `min(0.5, √‖g‖)`.
fn conjugate_gradient(objective: &Objective, curvature: &[f64], grad: &[f64], gnorm: f64) -> Vec<f64> {
    let n = grad.len();
    let target = gnorm.sqrt().min(0.5) * gnorm;
    let mut s = vec![0.0; n];
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..n.min(MAX_CG_STEPS) {
        if rr.sqrt() <= target {
            break;
        }
        let hp = objective.hessian_vector(curvature, &p);
        let php = dot(&p, &hp);
        if php <= 0.0 || !php.is_finite() {
            break;
        }
        let a = rr / php;
        for i in 0..n {
            s[i] += a * p[i];
            r[i] -= a * hp[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    if s.iter().all(|v| *v == 0.0) {
        // Flat curvature along the gradient: fall back to steepest descent.
        return grad.iter().map(|g| -g).collect();
    }
    s
}

pub fn train_svm(x: &[SparseVector], y: &[Label], config: &TrainConfig) -> Result<Fit> {
    train(ModelKind::Svm, x, y, config)
}

pub fn train_logreg(x: &[SparseVector], y: &[Label], config: &TrainConfig) -> Result<Fit> {
    train(ModelKind::LogReg, x, y, config)
}

/// A trained classifier together with everything needed to score raw authors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub classifier: LinearClassifier,
    pub features: FeatureSpace,
    pub language: Language,
    pub train_config: TrainConfig,
}

impl LinearModel {
    pub fn new(
        classifier: LinearClassifier,
        features: FeatureSpace,
        language: Language,
        train_config: TrainConfig,
    ) -> Result<LinearModel> {
        if classifier.weights.len() != features.dimension() {
            return Err(Error::DimensionMismatch {
                expected: features.dimension(),
                actual: classifier.weights.len(),
            });
        }
        if !classifier.bias.is_finite() || classifier.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig("model weights must be finite".into()));
        }
        Ok(LinearModel {
            classifier,
            features,
            language,
            train_config,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.classifier.kind
    }

    pub fn dimension(&self) -> usize {
        self.classifier.dimension()
    }

    pub fn vectorize(&self, preprocessor: &Preprocessor, doc: &AuthorDocument) -> SparseVector {
        self.features.transform(&preprocessor.process(doc))
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        self.classifier.predict(x)
    }

    pub fn predict_author(&self, doc: &AuthorDocument) -> Result<Prediction> {
        let pre = Preprocessor::new(self.language);
        self.classifier.predict(&self.vectorize(&pre, doc))
    }
}
