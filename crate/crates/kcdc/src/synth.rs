//! Seeded generators for the synthetic benchmark families.
//!
//! Nine functional forms (three families × three variants) with three noise
//! regimes. Observations draw x ~ N(0,1) and noise from the selected law;
//! the x and noise streams are split so adding observations never perturbs
//! earlier draws. Any draw whose response is non-finite (fractional powers of
//! negative bases in the complex variants, or the guard on the base of
//! Complex A) is rejected and redrawn.

use crate::score::Decision;
use crate::{KcdcError, Result};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Additive,
    Multiplicative,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Gaussian,
    Uniform,
    Exponential,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Additive => write!(f, "additive"),
            Family::Multiplicative => write!(f, "multiplicative"),
            Family::Complex => write!(f, "complex"),
        }
    }
}

impl FromStr for Family {
    type Err = KcdcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(Family::Additive),
            "multiplicative" => Ok(Family::Multiplicative),
            "complex" => Ok(Family::Complex),
            _ => Err(KcdcError::ConfigParse {
                input: s.into(),
                reason: "family must be additive, multiplicative or complex".into(),
            }),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::A => write!(f, "A"),
            Variant::B => write!(f, "B"),
            Variant::C => write!(f, "C"),
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Gaussian => write!(f, "gaussian"),
            Noise::Uniform => write!(f, "uniform"),
            Noise::Exponential => write!(f, "exponential"),
        }
    }
}

/// Selects one synthetic data-generating process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub variant: Variant,
    pub noise: Noise,
    pub n: usize,
    pub seed: u64,
}

/// n paired observations of (X, Y) with optional ground truth and weight.
#[derive(Debug, Clone)]
pub struct PairDataset {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub truth: Option<Decision>,
    pub weight: f64,
    pub id: String,
}

impl PairDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

/// Public seed-mixing function (splitmix64 over seed and index). Dataset j of
/// a batch uses `mix(seed, j)`.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

const X_STREAM: u64 = 0x78;
const NOISE_STREAM: u64 = 0xe5;

/// The functional form for (family, variant), applied elementwise.
pub fn apply_formula(family: Family, variant: Variant, x: f64, eps: f64) -> f64 {
    match (family, variant) {
        (Family::Additive, Variant::A) => x.powi(3) + x + eps,
        (Family::Additive, Variant::B) => (x + 10.0).ln() + x.powi(6) + eps,
        (Family::Additive, Variant::C) => (10.0 * x).sin() + (3.0 * x).exp() + eps,
        (Family::Multiplicative, Variant::A) => (x.powi(3) + x) * eps.exp(),
        (Family::Multiplicative, Variant::B) => ((10.0 * x).sin() + (3.0 * x).exp()) * eps.exp(),
        (Family::Multiplicative, Variant::C) => ((x + 10.0).ln() + x.powi(6)) * eps.exp(),
        (Family::Complex, Variant::A) => ((x + 10.0).ln() + x * x).powf(eps),
        (Family::Complex, Variant::B) => (x + 10.0).ln() + x.powf(2.0 * eps.abs()),
        (Family::Complex, Variant::C) => {
            (x.powi(7) + 5.0).ln() + x.powi(5) - (x * x * eps.abs()).sin()
        }
    }
}

fn draw_noise(noise: Noise, rng: &mut ChaCha8Rng) -> f64 {
    match noise {
        Noise::Gaussian => StandardNormal.sample(rng),
        Noise::Uniform => rng.gen::<f64>(),
        Noise::Exponential => Exp1.sample(rng),
    }
}

const MAX_REDRAWS: usize = 10_000;

/// Generate one dataset. Truth is always XtoY; the id encodes the full spec.
pub fn generate(spec: &SyntheticSpec) -> Result<PairDataset> {
    if spec.n < 2 {
        return Err(KcdcError::TooFewObservations {
            needed: 2,
            got: spec.n,
        });
    }
    let mut x_rng = ChaCha8Rng::seed_from_u64(mix(spec.seed, X_STREAM));
    let mut e_rng = ChaCha8Rng::seed_from_u64(mix(spec.seed, NOISE_STREAM));

    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mut accepted = false;
        for _ in 0..MAX_REDRAWS {
            let x: f64 = StandardNormal.sample(&mut x_rng);
            let eps = draw_noise(spec.noise, &mut e_rng);
            // Complex A needs a strictly positive base for the real power.
            if spec.family == Family::Complex && spec.variant == Variant::A && x <= -9.999 {
                continue;
            }
            let y = apply_formula(spec.family, spec.variant, x, eps);
            if y.is_finite() {
                xs.push(x);
                ys.push(y);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(KcdcError::NonFiniteSample {
                attempts: MAX_REDRAWS,
            });
        }
    }

    Ok(PairDataset {
        x: Array2::from_shape_vec((spec.n, 1), xs).expect("shape matches"),
        y: Array2::from_shape_vec((spec.n, 1), ys).expect("shape matches"),
        truth: Some(Decision::XtoY),
        weight: 1.0,
        id: format!(
            "{}-{}-{}-n{}-seed{}",
            spec.family, spec.variant, spec.noise, spec.n, spec.seed
        ),
    })
}

/// Univariate AR(1) series y_t = coeff * y_{t-1} + e_t with centered
/// chi-square(1) innovations (z² − 1, z standard normal), so the noise is
/// markedly skewed and the process carries a temporal signature. The first
/// `burn_in` steps are discarded; the returned array has shape (len, 1).
pub fn ar1_chi_square_series(seed: u64, len: usize, coeff: f64, burn_in: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 0xa21));
    let mut state = 0.0f64;
    let mut out = Vec::with_capacity(len);
    for t in 0..burn_in + len {
        let z: f64 = StandardNormal.sample(&mut rng);
        state = coeff * state + (z * z - 1.0);
        if t >= burn_in {
            out.push(state);
        }
    }
    Array2::from_shape_vec((len, 1), out).expect("shape matches")
}

/// Generate `count` mutually independent datasets; dataset j uses derived
/// seed `mix(seed, j)`.
pub fn generate_batch(spec: &SyntheticSpec, count: usize) -> Result<Vec<PairDataset>> {
    (0..count)
        .map(|j| {
            generate(&SyntheticSpec {
                seed: mix(spec.seed, j as u64),
                ..*spec
            })
        })
        .collect()
}
