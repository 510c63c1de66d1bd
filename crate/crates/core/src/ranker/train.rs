//! Logistic training on weakly labeled candidates: a program is a positive
//! example when its result agrees with the statement's gold label.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::Program;

use super::features::{featurize, FeatureVector, DIM};
use super::{sigmoid, DumpRecord, RankerError, ScorerModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    /// Fraction of statements held out for evaluation.
    pub heldout_fraction: f64,
    pub use_caption: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 17,
            heldout_fraction: 0.1,
            use_caption: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean log loss on training examples; entry 0 is before the first epoch.
    pub train_loss: Vec<f64>,
    pub heldout_loss: Option<f64>,
    pub heldout_pairwise_accuracy: Option<f64>,
    pub train_examples: usize,
    pub heldout_statements: usize,
}

struct Example {
    features: FeatureVector,
    positive: bool,
}

/// Examples grouped by statement.
fn examples(dump: &[DumpRecord], use_caption: bool) -> Result<Vec<Vec<Example>>, RankerError> {
    dump.iter()
        .filter_map(|rec| rec.label.map(|label| (rec, label)))
        .map(|(rec, label)| {
            let linked = rec.linked_statement();
            rec.candidates
                .iter()
                .map(|c| {
                    let program = Program::parse(&c.trace).map_err(|e| RankerError::BadTrace {
                        trace: c.trace.clone(),
                        reason: e.to_string(),
                    })?;
                    Ok(Example {
                        features: featurize(&linked, &program, use_caption),
                        positive: c.result == label.as_bool(),
                    })
                })
                .collect()
        })
        .collect()
}

fn log_loss(p: f64, positive: bool) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    if positive {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

fn mean_loss(groups: &[&Vec<Example>], w: &[f64], bias: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for ex in groups.iter().flat_map(|g| g.iter()) {
        total += log_loss(sigmoid(bias + ex.features.dot(w)), ex.positive);
        n += 1;
    }
    (n > 0).then(|| total / n as f64)
}

/// Fraction of (positive, negative) candidate pairs within each statement
/// where the positive scores higher; ties count half. `None` without pairs.
pub fn pairwise_accuracy(groups: &[Vec<(f64, bool)>]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for g in groups {
        for &(sp, _) in g.iter().filter(|x| x.1) {
            for &(sn, _) in g.iter().filter(|x| !x.1) {
                pairs += 1;
                if sp > sn {
                    wins += 1.0;
                } else if sp == sn {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

/// Fit a [`ScorerModel`] by shuffled stochastic gradient descent on log loss
/// with L2 regularization. Deterministic for a fixed `cfg.seed`.
pub fn train(
    dump: &[DumpRecord],
    cfg: &TrainConfig,
) -> Result<(ScorerModel, TrainReport), RankerError> {
    let groups = examples(dump, cfg.use_caption)?;
    let all: Vec<&Example> = groups.iter().flatten().collect();
    if all.is_empty() {
        return Err(RankerError::EmptyDump);
    }
    if all.iter().all(|e| e.positive) || all.iter().all(|e| !e.positive) {
        return Err(RankerError::DegenerateDump);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut rng);
    let held = if groups.len() >= 2 {
        ((groups.len() as f64 * cfg.heldout_fraction).ceil() as usize).clamp(1, groups.len() - 1)
    } else {
        0
    };
    let (held_idx, train_idx) = order.split_at(held);
    let train_groups: Vec<&Vec<Example>> = train_idx.iter().map(|&i| &groups[i]).collect();
    let held_groups: Vec<&Vec<Example>> = held_idx.iter().map(|&i| &groups[i]).collect();
    let mut train_set: Vec<&Example> = train_groups.iter().flat_map(|g| g.iter()).collect();

    let mut w = vec![0.0; DIM];
    let mut bias = 0.0;
    let mut losses = vec![mean_loss(&train_groups, &w, bias).unwrap_or(0.0)];
    for _ in 0..cfg.epochs {
        train_set.shuffle(&mut rng);
        for ex in &train_set {
            let p = sigmoid(bias + ex.features.dot(&w));
            let g = p - f64::from(u8::from(ex.positive));
            bias -= cfg.learning_rate * g;
            for &(i, v) in &ex.features.entries {
                let wi = &mut w[i as usize];
                *wi -= cfg.learning_rate * (g * v + cfg.l2 * *wi);
            }
        }
        losses.push(mean_loss(&train_groups, &w, bias).unwrap_or(0.0));
    }

    let mut model = ScorerModel::new(cfg.use_caption);
    model.bias = bias;
    model.weights = w
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i as u32, v))
        .collect();

    let scored: Vec<Vec<(f64, bool)>> = held_groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|ex| (model.score_features(&ex.features), ex.positive))
                .collect()
        })
        .collect();
    let report = TrainReport {
        train_loss: losses,
        heldout_loss: mean_loss(&held_groups, &w, bias),
        heldout_pairwise_accuracy: pairwise_accuracy(&scored),
        train_examples: train_set.len(),
        heldout_statements: held_groups.len(),
    };
    Ok((model, report))
}
