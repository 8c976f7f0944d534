//! KCDC measures, confidence, and the decision rules D1/D2/D3.
//!
//! The measure for a direction is the population variance of the conditional
//! embedding norms across the observed conditioning values; the direction
//! with the smaller measure is inferred as causal. That asymmetry is encoded
//! once, in [`decide_direct`].

use crate::embedding::conditional_norms;
use crate::kernels::KernelSpec;
use crate::{KcdcError, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Per-variable preprocessing applied before any kernel sees the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preprocess {
    None,
    Standardize,
}

/// One full KCDC configuration. The same pair of kernel specs and the same
/// lambda are used for both directions of a scoring call; there are no
/// direction-specific fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperConfig {
    /// Kernel applied to the conditioning variable (the hypothesized cause).
    pub kernel_cond: KernelSpec,
    /// Kernel applied to the response variable (the hypothesized effect).
    pub kernel_resp: KernelSpec,
    pub lambda: f64,
    pub preprocess: Preprocess,
}

impl Default for HyperConfig {
    /// The configuration behind the reported synthetic benchmarks: log
    /// kernel (q = 2) on the conditioning side, rational quadratic on the
    /// response, lambda 0.1, standardized inputs.
    fn default() -> Self {
        HyperConfig {
            kernel_cond: KernelSpec::log(2.0),
            kernel_resp: KernelSpec::rq(),
            lambda: 0.1,
            preprocess: Preprocess::Standardize,
        }
    }
}

impl fmt::Display for HyperConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre = match self.preprocess {
            Preprocess::None => "none",
            Preprocess::Standardize => "standardize",
        };
        write!(f, "{} {} {} {}", self.kernel_cond, self.kernel_resp, self.lambda, pre)
    }
}

impl FromStr for HyperConfig {
    type Err = KcdcError;

    /// One config per line: `<cond-kernel> <resp-kernel> [lambda] [none|standardize]`,
    /// e.g. `log:2 rq 0.1 standardize`. Lambda defaults to 0.1 and
    /// preprocessing to `standardize` when omitted.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| KcdcError::ConfigParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = s.split_whitespace();
        let cond = parts.next().ok_or_else(|| err("missing conditioning kernel"))?;
        let resp = parts.next().ok_or_else(|| err("missing response kernel"))?;
        let mut config = HyperConfig {
            kernel_cond: cond.parse()?,
            kernel_resp: resp.parse()?,
            ..HyperConfig::default()
        };
        if let Some(lam) = parts.next() {
            let lambda: f64 = lam.parse().map_err(|_| err("bad lambda"))?;
            if lambda <= 0.0 || !lambda.is_finite() {
                return Err(err("lambda must be positive"));
            }
            config.lambda = lambda;
        }
        if let Some(pre) = parts.next() {
            config.preprocess = match pre {
                "none" => Preprocess::None,
                "standardize" | "std" => Preprocess::Standardize,
                _ => return Err(err("preprocess must be `none` or `standardize`")),
            };
        }
        if let Some(extra) = parts.next() {
            return Err(KcdcError::ConfigParse {
                input: s.to_string(),
                reason: format!("unexpected trailing token `{extra}`"),
            });
        }
        Ok(config)
    }
}

/// The pair of KCDC measures plus the derived confidence T.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KcdcScores {
    pub s_xy: f64,
    pub s_yx: f64,
    pub confidence: f64,
}

impl KcdcScores {
    pub fn new(s_xy: f64, s_yx: f64) -> Self {
        KcdcScores {
            s_xy,
            s_yx,
            confidence: confidence(s_xy, s_yx),
        }
    }

    /// True when the confidence ratio is undefined (a zero measure).
    pub fn is_degenerate(&self) -> bool {
        self.s_xy.min(self.s_yx) == 0.0
    }

    /// The same scores with the variable roles exchanged.
    pub fn swapped(&self) -> KcdcScores {
        KcdcScores {
            s_xy: self.s_yx,
            s_yx: self.s_xy,
            confidence: self.confidence,
        }
    }
}

/// The inference outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    XtoY,
    YtoX,
    Undecided,
}

impl Decision {
    pub fn flipped(&self) -> Decision {
        match self {
            Decision::XtoY => Decision::YtoX,
            Decision::YtoX => Decision::XtoY,
            Decision::Undecided => Decision::Undecided,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::XtoY => write!(f, "X->Y"),
            Decision::YtoX => write!(f, "Y->X"),
            Decision::Undecided => write!(f, "undecided"),
        }
    }
}

/// Population (divide-by-n) variance of the norm profile.
pub fn kcdc_deviance(norms: &[f64]) -> Result<f64> {
    let n = norms.len();
    if n < 2 {
        return Err(KcdcError::TooFewObservations { needed: 2, got: n });
    }
    let mean = norms.iter().sum::<f64>() / n as f64;
    Ok(norms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64)
}

/// The confidence ratio |s_xy - s_yx| / min(s_xy, s_yx). A zero minimum with
/// unequal measures yields infinity; two zero measures yield zero.
pub fn confidence(s_xy: f64, s_yx: f64) -> f64 {
    let min = s_xy.min(s_yx);
    if min > 0.0 {
        (s_xy - s_yx).abs() / min
    } else if s_xy == s_yx {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Per-column standardization to zero mean and unit variance. Errors on a
/// constant column.
pub fn standardize(data: &Array2<f64>) -> Result<Array2<f64>> {
    let n = data.nrows() as f64;
    let mut out = data.clone();
    for mut col in out.columns_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var == 0.0 {
            return Err(KcdcError::DegenerateSample(
                "constant column cannot be standardized".into(),
            ));
        }
        let sd = var.sqrt();
        col.mapv_inplace(|v| (v - mean) / sd);
    }
    Ok(out)
}

fn directional_deviance(
    cond_data: &Array2<f64>,
    resp_data: &Array2<f64>,
    config: &HyperConfig,
) -> Result<f64> {
    let cond_kernel = config.kernel_cond.resolve(cond_data)?;
    let resp_kernel = config.kernel_resp.resolve(resp_data)?;
    let cond_gram = cond_kernel.gram(cond_data)?;
    let resp_gram = resp_kernel.gram(resp_data)?;
    let profile = conditional_norms(&cond_gram, &resp_gram, config.lambda)?;
    kcdc_deviance(&profile.norms)
}

/// Compute both KCDC measures for a pair of samples. Median-multiple
/// bandwidths are resolved per role per direction from the preprocessed data
/// that kernel is applied to; the kernel specs themselves are identical in
/// both directions.
pub fn score_pair(x: &Array2<f64>, y: &Array2<f64>, config: &HyperConfig) -> Result<KcdcScores> {
    if x.nrows() != y.nrows() {
        return Err(KcdcError::DimensionMismatch {
            left: x.nrows(),
            right: y.nrows(),
        });
    }
    if x.nrows() < 2 {
        return Err(KcdcError::TooFewObservations {
            needed: 2,
            got: x.nrows(),
        });
    }
    let (x, y) = match config.preprocess {
        Preprocess::None => (x.clone(), y.clone()),
        Preprocess::Standardize => (standardize(x)?, standardize(y)?),
    };
    let s_xy = directional_deviance(&x, &y, config)?;
    let s_yx = directional_deviance(&y, &x, config)?;
    Ok(KcdcScores::new(s_xy, s_yx))
}

/// Decision rule D1: direct comparison with relative threshold `delta`.
/// Smaller deviance wins; a relative gap below delta (or two zero measures)
/// is left undecided.
/// Below this, both measures are treated as numerically collapsed (as with
/// extreme over-regularization) and any positive threshold abstains rather
/// than compare a ratio of rounding noise.
pub const MEASURE_FLOOR: f64 = 1e-10;

pub fn decide_direct(scores: &KcdcScores, delta: f64) -> Decision {
    let gap = confidence(scores.s_xy, scores.s_yx);
    if gap < delta || gap == 0.0 {
        return Decision::Undecided;
    }
    if delta > 0.0 && scores.s_xy < MEASURE_FLOOR && scores.s_yx < MEASURE_FLOOR {
        return Decision::Undecided;
    }
    if scores.s_xy < scores.s_yx {
        Decision::XtoY
    } else {
        Decision::YtoX
    }
}

/// Decision rule D2: majority vote. Undecided votes are excluded from the
/// tally; an exact tie is Undecided.
pub fn decide_majority(decisions: &[Decision]) -> Result<Decision> {
    if decisions.is_empty() {
        return Err(KcdcError::EmptyDecisions);
    }
    let xy = decisions.iter().filter(|d| **d == Decision::XtoY).count();
    let yx = decisions.iter().filter(|d| **d == Decision::YtoX).count();
    Ok(match xy.cmp(&yx) {
        std::cmp::Ordering::Greater => Decision::XtoY,
        std::cmp::Ordering::Less => Decision::YtoX,
        std::cmp::Ordering::Equal => Decision::Undecided,
    })
}

/// Decision rule D3 feature map: (s_xy, s_yx) per config, in config order.
pub fn build_features(
    x: &Array2<f64>,
    y: &Array2<f64>,
    configs: &[HyperConfig],
) -> Result<Vec<f64>> {
    if configs.is_empty() {
        return Err(KcdcError::EmptyConfigs);
    }
    let mut features = Vec::with_capacity(2 * configs.len());
    for (index, config) in configs.iter().enumerate() {
        let scores = score_pair(x, y, config).map_err(|source| KcdcError::ConfigFailed {
            index,
            config: config.to_string(),
            source: Box::new(source),
        })?;
        if !scores.s_xy.is_finite() || !scores.s_yx.is_finite() {
            return Err(KcdcError::ConfigFailed {
                index,
                config: config.to_string(),
                source: Box::new(KcdcError::DegenerateSample("non-finite KCDC measure".into())),
            });
        }
        features.push(scores.s_xy);
        features.push(scores.s_yx);
    }
    Ok(features)
}
