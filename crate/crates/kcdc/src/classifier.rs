//! Decision rule D3: a regularized linear logistic model over KCDC feature
//! vectors.
//!
//! The corpus is symmetrized (every pair also enters with x/y swapped and the
//! label flipped), features pass through t(v) = log(1 + v), and the model is
//! fit by Newton iterations to gradient norm 1e-6. Feature standardization is
//! folded into the stored weights, so a serialized model is just the config
//! schema plus one weight per transformed feature and an intercept.

use crate::embedding::solve_spd;
use crate::score::{build_features, Decision, HyperConfig};
use crate::synth::PairDataset;
use crate::{KcdcError, Result};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use std::path::Path;
use std::str::FromStr;

const MODEL_MAGIC: &str = "kcdc-model";
const MODEL_VERSION: u32 = 1;
const MAX_NEWTON_ITERS: usize = 100;
const GRAD_TOL: f64 = 1e-6;

/// Default L2 regularization on standardized transformed features.
pub const DEFAULT_L2: f64 = 1.0;

/// A trained D3 model. Prediction requires features built with exactly
/// `configs`, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub configs: Vec<HyperConfig>,
    /// One weight per feature (2·|configs|) plus the intercept last.
    pub weights: Vec<f64>,
    pub meta: String,
}

fn signed_log(v: f64) -> f64 {
    (1.0 + v).ln()
}

/// Swap each (s_xy, s_yx) feature pair entrywise.
fn swap_features(features: &[f64]) -> Vec<f64> {
    features
        .chunks_exact(2)
        .flat_map(|pair| [pair[1], pair[0]])
        .collect()
}

/// Train on labeled pairs. Feature extraction over the corpus runs in
/// parallel; the optimizer itself is sequential and deterministic given
/// corpus order.
pub fn train(corpus: &[PairDataset], configs: &[HyperConfig], l2: f64) -> Result<TrainedModel> {
    if corpus.is_empty() {
        return Err(KcdcError::EmptyCorpus);
    }
    if configs.is_empty() {
        return Err(KcdcError::EmptyConfigs);
    }
    let dim = 2 * configs.len();

    let extracted: Vec<Result<(Vec<f64>, bool)>> = corpus
        .par_iter()
        .map(|pair| {
            let label = match pair.truth {
                Some(Decision::XtoY) => true,
                Some(Decision::YtoX) => false,
                _ => return Err(KcdcError::UnlabeledPair(pair.id.clone())),
            };
            let features = build_features(&pair.x, &pair.y, configs)?;
            Ok((features, label))
        })
        .collect();

    // symmetrize: each pair twice, once as-is and once swapped with the label flipped
    let mut rows = Vec::with_capacity(2 * corpus.len());
    let mut labels = Vec::with_capacity(2 * corpus.len());
    for item in extracted {
        let (features, label) = item?;
        let swapped = swap_features(&features);
        rows.push(features.iter().map(|&v| signed_log(v)).collect::<Vec<_>>());
        labels.push(label);
        rows.push(swapped.iter().map(|&v| signed_log(v)).collect::<Vec<_>>());
        labels.push(!label);
    }
    debug_assert!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));

    let n = rows.len();
    // standardize transformed features; folded back into the weights below
    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for j in 0..dim {
        let m: f64 = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let v: f64 = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n as f64;
        mean[j] = m;
        sd[j] = if v > 0.0 { v.sqrt() } else { 1.0 };
    }
    let mut design = Array2::zeros((n, dim + 1));
    for (i, row) in rows.iter().enumerate() {
        for j in 0..dim {
            design[[i, j]] = (row[j] - mean[j]) / sd[j];
        }
        design[[i, dim]] = 1.0;
    }
    let targets = Array1::from_iter(labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));

    let weights = newton_logistic(&design, &targets, l2, dim)?;

    // unfold standardization: w_j/sd_j on raw features, intercept absorbs means
    let mut out = vec![0.0; dim + 1];
    let mut intercept = weights[dim];
    for j in 0..dim {
        out[j] = weights[j] / sd[j];
        intercept -= weights[j] * mean[j] / sd[j];
    }
    out[dim] = intercept;

    Ok(TrainedModel {
        configs: configs.to_vec(),
        weights: out,
        meta: format!("trained on {} labeled pairs (symmetrized to {n})", corpus.len()),
    })
}

/// L2-regularized logistic fit by Newton's method. The intercept (index
/// `dim`) is not regularized.
fn newton_logistic(
    design: &Array2<f64>,
    targets: &Array1<f64>,
    l2: f64,
    dim: usize,
) -> Result<Vec<f64>> {
    let p = design.ncols();
    let mut w = Array1::<f64>::zeros(p);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_NEWTON_ITERS {
        let logits = design.dot(&w);
        let probs = logits.mapv(|z| 1.0 / (1.0 + (-z).exp()));
        let mut grad = design.t().dot(&(&probs - targets));
        for j in 0..dim {
            grad[j] += l2 * w[j];
        }
        grad_norm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if grad_norm <= GRAD_TOL {
            return Ok(w.to_vec());
        }
        let weights_diag = probs.mapv(|pr| (pr * (1.0 - pr)).max(1e-12));
        let mut hessian = Array2::zeros((p, p));
        for i in 0..design.nrows() {
            let wi = weights_diag[i];
            for a in 0..p {
                let da = design[[i, a]] * wi;
                for b in a..p {
                    hessian[[a, b]] += da * design[[i, b]];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hessian[[a, b]] = hessian[[b, a]];
            }
        }
        for j in 0..dim {
            hessian[[j, j]] += l2;
        }
        let step = solve_spd(&hessian, &grad.insert_axis(ndarray::Axis(1)))?;
        for j in 0..p {
            w[j] -= step[[j, 0]];
        }
    }
    Err(KcdcError::NoConvergence {
        iterations: MAX_NEWTON_ITERS,
        grad: grad_norm,
    })
}

/// Raw decision score for a feature vector: positive favors XtoY.
pub fn decision_score(model: &TrainedModel, features: &[f64]) -> f64 {
    let dim = 2 * model.configs.len();
    assert_eq!(features.len(), dim, "feature length must match model schema");
    let mut score = model.weights[dim];
    for j in 0..dim {
        score += model.weights[j] * signed_log(features[j]);
    }
    score
}

/// Apply the model to a fresh pair.
pub fn predict(model: &TrainedModel, x: &Array2<f64>, y: &Array2<f64>) -> Result<Decision> {
    let features = build_features(x, y, &model.configs)?;
    let score = decision_score(model, &features);
    Ok(if score > 0.0 {
        Decision::XtoY
    } else if score < 0.0 {
        Decision::YtoX
    } else {
        Decision::Undecided
    })
}

impl TrainedModel {
    /// Versioned plain-text key-value serialization.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_MAGIC} {MODEL_VERSION}\ntransform signedlog\n");
        out.push_str(&format!("configs {}\n", self.configs.len()));
        for config in &self.configs {
            out.push_str(&format!("config {config}\n"));
        }
        out.push_str("weights");
        for w in &self.weights {
            out.push_str(&format!(" {w:?}"));
        }
        out.push('\n');
        out.push_str(&format!("meta {}\n", self.meta));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |reason: &str| KcdcError::ModelFormat(reason.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(bad("not a kcdc model file"));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing version"))?;
        if version != MODEL_VERSION {
            return Err(bad(&format!("unsupported schema version {version}")));
        }
        if lines.next() != Some("transform signedlog") {
            return Err(bad("unknown feature transform"));
        }
        let count_line = lines.next().ok_or_else(|| bad("missing config count"))?;
        let count: usize = count_line
            .strip_prefix("configs ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("bad config count"))?;
        let mut configs = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines.next().ok_or_else(|| bad("missing config line"))?;
            let spec = line
                .strip_prefix("config ")
                .ok_or_else(|| bad("expected config line"))?;
            configs.push(HyperConfig::from_str(spec)?);
        }
        let weight_line = lines.next().ok_or_else(|| bad("missing weights"))?;
        let weights: Vec<f64> = weight_line
            .strip_prefix("weights")
            .ok_or_else(|| bad("expected weights line"))?
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad("bad weight value")))
            .collect::<Result<_>>()?;
        if weights.len() != 2 * configs.len() + 1 {
            return Err(bad("weight count does not match config schema"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(bad("non-finite weight"));
        }
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix("meta "))
            .unwrap_or("")
            .to_string();
        Ok(TrainedModel {
            configs,
            weights,
            meta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| KcdcError::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KcdcError::io(path.display().to_string(), e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::decide_direct;
    use crate::synth::{self, mix, Family, Noise, SyntheticSpec, Variant};

    fn small_corpus(seed: u64, per_family: usize) -> Vec<PairDataset> {
        let mut corpus = Vec::new();
        for (fi, family) in [Family::Additive, Family::Multiplicative].iter().enumerate() {
            for (vi, variant) in [Variant::A, Variant::B].iter().enumerate() {
                let spec = SyntheticSpec {
                    family: *family,
                    variant: *variant,
                    noise: Noise::Gaussian,
                    n: 60,
                    seed: mix(seed, (fi * 3 + vi) as u64),
                };
                corpus.extend(synth::generate_batch(&spec, per_family).unwrap());
            }
        }
        corpus
    }

    #[test]
    fn training_reproduces_direct_rule_on_separable_corpus() {
        let corpus = small_corpus(21, 4);
        let configs = vec![HyperConfig::default()];
        let model = train(&corpus, &configs, DEFAULT_L2).unwrap();
        for pair in &corpus {
            let scores = crate::score_pair(&pair.x, &pair.y, &configs[0]).unwrap();
            let d1 = decide_direct(&scores, 0.0);
            if d1 != Decision::Undecided {
                assert_eq!(predict(&model, &pair.x, &pair.y).unwrap(), d1, "{}", pair.id);
            }
        }
    }

    #[test]
    fn decision_function_is_antisymmetric_after_symmetrized_training() {
        let corpus = small_corpus(33, 3);
        let configs = vec![HyperConfig::default()];
        let model = train(&corpus, &configs, DEFAULT_L2).unwrap();
        for pair in &corpus {
            let features = build_features(&pair.x, &pair.y, &configs).unwrap();
            let swapped = swap_features(&features);
            let f = decision_score(&model, &features);
            let g = decision_score(&model, &swapped);
            assert!((f + g).abs() < 1e-4, "f={f} g={g}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = small_corpus(5, 2);
        let configs = vec![HyperConfig::default()];
        let a = train(&corpus, &configs, DEFAULT_L2).unwrap();
        let b = train(&corpus, &configs, DEFAULT_L2).unwrap();
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn empty_configs_rejected() {
        let corpus = small_corpus(5, 1);
        assert!(matches!(train(&corpus, &[], 1.0), Err(KcdcError::EmptyConfigs)));
        assert!(matches!(
            train(&[], &[HyperConfig::default()], 1.0),
            Err(KcdcError::EmptyCorpus)
        ));
    }

    #[test]
    fn zero_weight_model_is_undecided() {
        let model = TrainedModel {
            configs: vec![HyperConfig::default()],
            weights: vec![0.0, 0.0, 0.0],
            meta: String::new(),
        };
        let d = synth::generate(&SyntheticSpec {
            family: Family::Additive,
            variant: Variant::A,
            noise: Noise::Gaussian,
            n: 30,
            seed: 2,
        })
        .unwrap();
        assert_eq!(predict(&model, &d.x, &d.y).unwrap(), Decision::Undecided);
    }

    #[test]
    fn serialization_roundtrip() {
        let corpus = small_corpus(8, 2);
        let configs = vec![
            HyperConfig::default(),
            "rbf:medx1 rq 0.01 standardize".parse().unwrap(),
        ];
        let model = train(&corpus, &configs, DEFAULT_L2).unwrap();
        let text = model.to_text();
        let back = TrainedModel::from_text(&text).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn rejects_corrupt_model_text() {
        assert!(TrainedModel::from_text("").is_err());
        assert!(TrainedModel::from_text("other-format 1\n").is_err());
        assert!(TrainedModel::from_text("kcdc-model 9\ntransform signedlog\n").is_err());
        let truncated = "kcdc-model 1\ntransform signedlog\nconfigs 1\nconfig log:2 rq 0.1 standardize\nweights 0.5 0.5\n";
        assert!(TrainedModel::from_text(truncated).is_err());
    }
}
