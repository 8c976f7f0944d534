//! Kernel families, Gram matrices, and the median heuristic.
//!
//! Three families are supported: the RBF kernel exp(-d²/2σ²), the log kernel
//! -log(d^q + 1) and the rational quadratic kernel 1 - d²/(d² + 1), where d is
//! the Euclidean distance between the two points. RBF bandwidths may be given
//! as absolute values or as multiples of the median pairwise distance of the
//! sample the kernel is applied to.

use crate::{KcdcError, Result};
use ndarray::Array2;
use std::fmt;
use std::str::FromStr;

/// How an RBF bandwidth is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// A fixed bandwidth in the units of the input space.
    Absolute(f64),
    /// A multiple of the median heuristic, resolved against a sample.
    MedianMultiple(f64),
}

/// A kernel family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Rbf { bandwidth: Bandwidth },
    Log { q: f64 },
    RationalQuadratic,
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Self {
        KernelSpec::Rbf {
            bandwidth: Bandwidth::Absolute(sigma),
        }
    }

    pub fn rbf_median(multiplier: f64) -> Self {
        KernelSpec::Rbf {
            bandwidth: Bandwidth::MedianMultiple(multiplier),
        }
    }

    pub fn log(q: f64) -> Self {
        KernelSpec::Log { q }
    }

    pub fn rq() -> Self {
        KernelSpec::RationalQuadratic
    }

    /// Check the hyperparameter invariants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf {
                bandwidth: Bandwidth::Absolute(sigma),
            } if sigma <= 0.0 || !sigma.is_finite() => Err(KcdcError::InvalidKernel(format!(
                "RBF bandwidth must be positive, got {sigma}"
            ))),
            KernelSpec::Rbf {
                bandwidth: Bandwidth::MedianMultiple(m),
            } if m <= 0.0 || !m.is_finite() => Err(KcdcError::InvalidKernel(format!(
                "median-heuristic multiplier must be positive, got {m}"
            ))),
            KernelSpec::Log { q } if q <= 0.0 || !q.is_finite() => Err(KcdcError::InvalidKernel(
                format!("log-kernel exponent must be positive, got {q}"),
            )),
            _ => Ok(()),
        }
    }

    /// Resolve a median-multiple bandwidth against `points`. Other specs are
    /// returned unchanged.
    pub fn resolve(&self, points: &Array2<f64>) -> Result<KernelSpec> {
        self.validate()?;
        match *self {
            KernelSpec::Rbf {
                bandwidth: Bandwidth::MedianMultiple(m),
            } => {
                let med = median_heuristic(points)?;
                Ok(KernelSpec::rbf(m * med))
            }
            other => Ok(other),
        }
    }

    /// Evaluate k(a, b). The spec must be resolved (no median-multiple RBF).
    pub fn evaluate(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(KcdcError::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        self.validate()?;
        let d2 = squared_distance(a, b);
        self.from_squared_distance(d2)
    }

    fn from_squared_distance(&self, d2: f64) -> Result<f64> {
        match *self {
            KernelSpec::Rbf {
                bandwidth: Bandwidth::Absolute(sigma),
            } => Ok((-d2 / (2.0 * sigma * sigma)).exp()),
            KernelSpec::Rbf {
                bandwidth: Bandwidth::MedianMultiple(_),
            } => Err(KcdcError::UnresolvedBandwidth),
            KernelSpec::Log { q } => Ok(-(d2.powf(q / 2.0) + 1.0).ln()),
            KernelSpec::RationalQuadratic => Ok(1.0 - d2 / (d2 + 1.0)),
        }
    }

    /// Build the n×n Gram matrix over the rows of `points`. The upper
    /// triangle is computed and mirrored, so symmetry is exact.
    pub fn gram(&self, points: &Array2<f64>) -> Result<GramMatrix> {
        let n = points.nrows();
        if n < 2 {
            return Err(KcdcError::TooFewObservations { needed: 2, got: n });
        }
        self.validate()?;
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            let row_i = points.row(i);
            entries[[i, i]] = self.from_squared_distance(0.0)?;
            for j in (i + 1)..n {
                let d2 = squared_distance(
                    row_i.as_slice().expect("row is contiguous"),
                    points.row(j).as_slice().expect("row is contiguous"),
                );
                let v = self.from_squared_distance(d2)?;
                entries[[i, j]] = v;
                entries[[j, i]] = v;
            }
        }
        Ok(GramMatrix { entries })
    }
}

/// Squared Euclidean distance with compensated summation. Kernel values near
/// 1 are sensitive to cancellation at small distances.
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let term = (x - y) * (x - y);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// An n×n matrix of pairwise kernel evaluations.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: Array2<f64>,
}

impl GramMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Construct from a precomputed symmetric matrix. Intended for tests and
    /// for callers that already hold kernel evaluations.
    pub fn from_entries(entries: Array2<f64>) -> Self {
        assert_eq!(entries.nrows(), entries.ncols(), "Gram matrix must be square");
        GramMatrix { entries }
    }
}

/// Median of the n(n-1)/2 pairwise Euclidean distances over i < j. For even
/// counts the two middle order statistics are averaged. Self-distances are
/// excluded; zero distances between duplicate points are kept.
pub fn median_heuristic(points: &Array2<f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(KcdcError::TooFewObservations { needed: 2, got: n });
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let row_i = points.row(i);
        for j in (i + 1)..n {
            let d2 = squared_distance(
                row_i.as_slice().expect("row is contiguous"),
                points.row(j).as_slice().expect("row is contiguous"),
            );
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median == 0.0 {
        return Err(KcdcError::DegenerateSample(
            "all pairwise distances are zero; cannot resolve a bandwidth".into(),
        ));
    }
    Ok(median)
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Rbf {
                bandwidth: Bandwidth::Absolute(sigma),
            } => write!(f, "rbf:{sigma}"),
            KernelSpec::Rbf {
                bandwidth: Bandwidth::MedianMultiple(m),
            } => write!(f, "rbf:medx{m}"),
            KernelSpec::Log { q } => write!(f, "log:{q}"),
            KernelSpec::RationalQuadratic => write!(f, "rq"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = KcdcError;

    /// Compact CLI syntax: `rbf:<sigma>`, `rbf:medx<mult>`, `log:<q>`, `rq`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| KcdcError::KernelParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let spec = match s.split_once(':') {
            None => match s {
                "rq" => KernelSpec::rq(),
                "rbf" => return Err(parse_err("rbf needs a bandwidth, e.g. rbf:1.5 or rbf:medx1")),
                "log" => KernelSpec::log(2.0),
                _ => return Err(parse_err("unknown kernel family")),
            },
            Some(("rbf", arg)) => {
                if let Some(mult) = arg.strip_prefix("medx") {
                    let m: f64 = mult
                        .parse()
                        .map_err(|_| parse_err("bad median multiplier"))?;
                    KernelSpec::rbf_median(m)
                } else {
                    let sigma: f64 = arg.parse().map_err(|_| parse_err("bad bandwidth"))?;
                    KernelSpec::rbf(sigma)
                }
            }
            Some(("log", arg)) => {
                let q: f64 = arg.parse().map_err(|_| parse_err("bad exponent"))?;
                KernelSpec::log(q)
            }
            Some(("rq", _)) => return Err(parse_err("rq takes no parameters")),
            Some((fam, _)) => {
                return Err(KcdcError::KernelParse {
                    input: s.to_string(),
                    reason: format!("unknown kernel family `{fam}`"),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
