//! Covariance structures of the stationary coefficient sequence.
//!
//! A stationary Gaussian sequence with `Γ(0) = 1` is described either by its
//! covariance sequence `Γ(k) = E[X_0 X_k]` or by its spectral density `f` on
//! `[-π, π]`, the two being related by `Γ(k) = ∫ e^{-ikφ} f(φ) dφ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid used to record the observed range of a density at construction.
const BOUNDS_GRID: usize = 4096;
/// Smallest trapezoid grid for the covariance integral.
const MIN_POINTS: usize = 1 << 12;
/// Largest trapezoid grid before giving up.
const MAX_POINTS: usize = 1 << 22;
const COVARIANCE_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-8;

/// Declared smoothness class of a density. Only selects which asymptotic
/// regime applies; it is never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// An even, integrable spectral density on `[-π, π]`.
#[derive(Clone)]
pub struct SpectralDensity {
    eval: Arc<DensityFn>,
    smoothness: Smoothness,
    lower: f64,
    upper: f64,
    label: String,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl SpectralDensity {
    /// Wraps a caller-supplied density. The observed range over a uniform grid
    /// is recorded but not enforced; use [`positivity_bounds`] to require
    /// strict positivity.
    pub fn from_fn<F>(label: impl Into<String>, smoothness: Smoothness, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let eval: Arc<DensityFn> = Arc::new(f);
        let (lower, upper) = grid_range(eval.as_ref(), BOUNDS_GRID);
        SpectralDensity {
            eval,
            smoothness,
            lower,
            upper,
            label: label.into(),
        }
    }

    /// `f ≡ 1/(2π)`: independent coefficients.
    pub fn independent() -> Self {
        Self::from_fn("independent", Smoothness::C1, |_| 1.0 / (2.0 * PI))
    }

    /// Poisson kernel `(1-ρ²) / (2π(1 - 2ρ cos φ + ρ²))`, whose covariance is `ρ^|k|`.
    pub fn geometric(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::param("rho", "geometric model needs |rho| < 1"));
        }
        Ok(Self::from_fn(
            format!("geometric:{rho}"),
            Smoothness::C1,
            move |phi| (1.0 - rho * rho) / (2.0 * PI * (1.0 - 2.0 * rho * phi.cos() + rho * rho)),
        ))
    }

    /// Raised cosine `(1 + a cos φ)/(2π)`, covariance `(1, a/2, 0, …)`.
    /// `|a| = 1` is a valid density but vanishes at a point.
    pub fn raised_cosine(amplitude: f64) -> Result<Self> {
        if !(amplitude.abs() <= 1.0) {
            return Err(Error::param("amplitude", "raised cosine needs |a| <= 1"));
        }
        Ok(Self::from_fn(
            format!("raised_cosine:{amplitude}"),
            Smoothness::C1,
            move |phi| (1.0 + amplitude * phi.cos()) / (2.0 * PI),
        ))
    }

    #[inline]
    pub fn evaluate(&self, phi: f64) -> f64 {
        (self.eval)(phi)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Minimum observed on the construction grid (`c₂/(2π)` when positive).
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// Maximum observed on the construction grid (`c₁/(2π)`).
    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest `|f(φ) - f(-φ)|` over `samples` points of `[0, π]`.
    pub fn evenness_defect(&self, samples: usize) -> f64 {
        let samples = samples.max(2);
        (0..samples)
            .map(|j| {
                let phi = PI * j as f64 / (samples - 1) as f64;
                (self.evaluate(phi) - self.evaluate(-phi)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn grid_range(f: &DensityFn, grid: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..=grid {
        let v = f(-PI + 2.0 * PI * j as f64 / grid as f64);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// `Γ(0), …, Γ(m)`, extended evenly.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence {
    gamma: Vec<f64>,
    finite_support: bool,
}

impl CovarianceSequence {
    /// A truncation of a (possibly infinite) covariance sequence. Lags beyond
    /// the stored ones are unknown.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        Self::build(gamma, false)
    }

    /// A finitely supported sequence: `Γ(k) = 0` beyond the stored lags.
    pub fn finite(gamma: Vec<f64>) -> Result<Self> {
        Self::build(gamma, true)
    }

    fn build(mut gamma: Vec<f64>, finite_support: bool) -> Result<Self> {
        let Some(&g0) = gamma.first() else {
            return Err(Error::InvalidCovariance("empty sequence".into()));
        };
        if !g0.is_finite() || (g0 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { gamma0: g0 });
        }
        if let Some((k, g)) = gamma
            .iter()
            .enumerate()
            .find(|(_, g)| !g.is_finite() || g.abs() > 1.0 + 1e-12)
        {
            return Err(Error::InvalidCovariance(format!("|Γ({k})| = {g} exceeds 1")));
        }
        if g0 != 1.0 {
            for g in &mut gamma {
                *g /= g0;
            }
        }
        gamma[0] = 1.0;
        Ok(CovarianceSequence {
            gamma,
            finite_support,
        })
    }

    /// The independent sequence `(1, 0, 0, …)`.
    pub fn independent() -> Self {
        CovarianceSequence {
            gamma: vec![1.0],
            finite_support: true,
        }
    }

    /// Highest stored lag.
    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn is_finite_support(&self) -> bool {
        self.finite_support
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    /// `Γ(|k|)`, or `None` when the lag is not covered.
    pub fn lag(&self, k: i64) -> Option<f64> {
        let k = k.unsigned_abs() as usize;
        match self.gamma.get(k) {
            Some(&g) => Some(g),
            None if self.finite_support => Some(0.0),
            None => None,
        }
    }

    /// Whether lags `0..=n` are all known.
    pub fn covers(&self, n: usize) -> bool {
        self.finite_support || self.gamma.len() > n
    }

    /// Drops trailing lags with `|Γ(k)| <= tol` and declares the rest zero.
    pub fn truncated(&self, tol: f64) -> Self {
        let keep = self
            .gamma
            .iter()
            .rposition(|g| g.abs() > tol)
            .unwrap_or(0);
        CovarianceSequence {
            gamma: self.gamma[..=keep].to_vec(),
            finite_support: true,
        }
    }

    /// Dense `(order × order)` Toeplitz covariance matrix.
    pub fn toeplitz(&self, order: usize) -> Result<nalgebra::DMatrix<f64>> {
        if order > 0 && !self.covers(order - 1) {
            return Err(Error::MissingLags {
                required: order - 1,
                available: self.max_lag(),
            });
        }
        Ok(nalgebra::DMatrix::from_fn(order, order, |i, j| {
            self.lag(i as i64 - j as i64).unwrap_or(0.0)
        }))
    }
}

/// `Γ(0..=m)` by periodic trapezoid quadrature of `∫ e^{-ikφ} f(φ) dφ`,
/// doubling the grid until successive estimates agree to 1e-12.
pub fn covariance_from_density(f: &SpectralDensity, m: usize) -> Result<CovarianceSequence> {
    let mut points = MIN_POINTS.max((4 * (m + 1)).next_power_of_two());
    let mut planner = FftPlanner::new();
    let mut previous = trapezoid_fourier(f, m, points, &mut planner)?;
    loop {
        points *= 2;
        if points > MAX_POINTS {
            return Err(Error::DensityTooRough { points: points / 2 });
        }
        let current = trapezoid_fourier(f, m, points, &mut planner)?;
        let change = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        previous = current;
        if change <= COVARIANCE_TOL {
            break;
        }
    }
    let gamma0 = previous[0];
    if (gamma0 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization { gamma0 });
    }
    CovarianceSequence::new(previous)
}

fn trapezoid_fourier(
    f: &SpectralDensity,
    m: usize,
    points: usize,
    planner: &mut FftPlanner<f64>,
) -> Result<Vec<f64>> {
    let step = 2.0 * PI / points as f64;
    let mut buf: Vec<Complex<f64>> = (0..points)
        .map(|j| Complex::new(f.evaluate(-PI + step * j as f64), 0.0))
        .collect();
    if buf.iter().any(|c| !c.re.is_finite()) {
        return Err(Error::DensityTooRough { points });
    }
    planner.plan_fft_forward(points).process(&mut buf);
    // φ_j = -π + jh, so e^{-ikφ_j} = (-1)^k e^{-2πijk/N}.
    let mut gamma = Vec::with_capacity(m + 1);
    for (k, c) in buf.iter().take(m + 1).enumerate() {
        let sign = if k % 2 == 0 { step } else { -step };
        let residue = (c.im * step).abs();
        if residue > IMAG_TOL {
            return Err(Error::NotEven { residue });
        }
        gamma.push(c.re * sign);
    }
    Ok(gamma)
}

/// Partial Fourier sum `f(φ) = (1/2π) Σ_k Γ(k) e^{ikφ}`.
///
/// Rejects sequences whose sum goes negative on the check grid; a density
/// that merely touches zero is returned, and [`positivity_bounds`] is the
/// strict-positivity gate.
pub fn density_from_covariance(gamma: &CovarianceSequence) -> Result<SpectralDensity> {
    let coeffs: Vec<f64> = gamma.as_slice().to_vec();
    let label = format!("custom_fourier:{}", join_floats(&coeffs));
    let density = SpectralDensity::from_fn(label, Smoothness::C1, move |phi| {
        fourier_sum(&coeffs, phi) / (2.0 * PI)
    });
    if density.lower_bound() < -1e-15 {
        return Err(Error::NotStrictlyPositive {
            min: density.lower_bound(),
        });
    }
    Ok(density)
}

/// `Γ(0) + 2 Σ_{k≥1} Γ(k) cos kφ` via the Chebyshev (Clenshaw) recurrence.
fn fourier_sum(coeffs: &[f64], phi: f64) -> f64 {
    let two_cos = 2.0 * phi.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * c + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // Σ_{k≥1} a_k cos kφ = b1 cos φ - b2 with a_k = 2Γ(k).
    coeffs[0] + b1 * phi.cos() - b2
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Minimum and maximum of `f` on a uniform grid of `grid + 1` points
/// spanning `[-π, π]`; these are `c₂/(2π)` and `c₁/(2π)`.
pub fn positivity_bounds(f: &SpectralDensity, grid: usize) -> Result<(f64, f64)> {
    if grid < 64 {
        return Err(Error::param("grid", "need at least 64 points"));
    }
    let (lo, hi) = grid_range(f.eval.as_ref(), grid);
    if !(lo > 0.0) {
        return Err(Error::NotStrictlyPositive { min: lo });
    }
    Ok((lo, hi))
}

/// Covariance model of the coefficient sequence.
#[derive(Debug, Clone)]
pub enum CovarianceModel {
    Density(SpectralDensity),
    /// `Γ(k) = ρ` for every `k ≠ 0`. The spectral measure has an atom at 0,
    /// so no density exists.
    ConstantRho(f64),
    Independent,
}

impl CovarianceModel {
    pub fn constant(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::param("rho", "constant covariance needs rho in (0, 1)"));
        }
        Ok(CovarianceModel::ConstantRho(rho))
    }

    pub fn density(&self) -> Result<SpectralDensity> {
        match self {
            CovarianceModel::Density(f) => Ok(f.clone()),
            CovarianceModel::Independent => Ok(SpectralDensity::independent()),
            CovarianceModel::ConstantRho(_) => Err(Error::UnsupportedModel("constant")),
        }
    }

    pub fn admits_density(&self) -> bool {
        !matches!(self, CovarianceModel::ConstantRho(_))
    }

    /// `Γ(0..=m)` for this model.
    pub fn covariance(&self, m: usize) -> Result<CovarianceSequence> {
        match self {
            CovarianceModel::Independent => Ok(CovarianceSequence::independent()),
            CovarianceModel::Density(f) => covariance_from_density(f, m),
            CovarianceModel::ConstantRho(rho) => {
                let mut g = vec![*rho; m + 1];
                g[0] = 1.0;
                CovarianceSequence::new(g)
            }
        }
    }

    pub fn smoothness(&self) -> Option<Smoothness> {
        match self {
            CovarianceModel::Density(f) => Some(f.smoothness()),
            CovarianceModel::Independent => Some(Smoothness::C1),
            CovarianceModel::ConstantRho(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            CovarianceModel::Density(f) => f.label().to_string(),
            CovarianceModel::ConstantRho(rho) => format!("constant:{rho}"),
            CovarianceModel::Independent => "independent".into(),
        }
    }
}

fn default_amplitude() -> f64 {
    0.5
}

/// Structured description of a covariance model, as read from config files.
///
/// ```
/// use level_crossings::spectrum::ModelSpec;
/// let spec: ModelSpec = serde_json::from_str(r#"{"model": "geometric", "rho": 0.5}"#).unwrap();
/// assert_eq!(spec, ModelSpec::Geometric { rho: 0.5 });
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Independent,
    Geometric {
        rho: f64,
    },
    RaisedCosine {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    Constant {
        rho: f64,
    },
    CustomFourier {
        gamma: Vec<f64>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<CovarianceModel> {
        Ok(match self {
            ModelSpec::Independent => CovarianceModel::Independent,
            ModelSpec::Geometric { rho } => CovarianceModel::Density(SpectralDensity::geometric(*rho)?),
            ModelSpec::RaisedCosine { amplitude } => {
                CovarianceModel::Density(SpectralDensity::raised_cosine(*amplitude)?)
            }
            ModelSpec::Constant { rho } => CovarianceModel::constant(*rho)?,
            ModelSpec::CustomFourier { gamma } => {
                let seq = CovarianceSequence::finite(gamma.clone())?;
                CovarianceModel::Density(density_from_covariance(&seq)?)
            }
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Independent => write!(f, "independent"),
            ModelSpec::Geometric { rho } => write!(f, "geometric:{rho}"),
            ModelSpec::RaisedCosine { amplitude } => write!(f, "raised_cosine:{amplitude}"),
            ModelSpec::Constant { rho } => write!(f, "constant:{rho}"),
            ModelSpec::CustomFourier { gamma } => write!(f, "custom_fourier:{}", join_floats(gamma)),
        }
    }
}

/// Parses the command-line form: `independent`, `geometric:0.5`,
/// `raised_cosine[:a]`, `constant:0.5`, `custom_fourier:1,0.3,0.1`.
impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::param("model", format!("`{name}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::param("model", e.to_string()))
        };
        match name {
            "independent" => Ok(ModelSpec::Independent),
            "geometric" => Ok(ModelSpec::Geometric { rho: number(arg)? }),
            "raised_cosine" => Ok(ModelSpec::RaisedCosine {
                amplitude: arg.map(|_| number(arg)).transpose()?.unwrap_or(0.5),
            }),
            "constant" => Ok(ModelSpec::Constant { rho: number(arg)? }),
            "custom_fourier" => {
                let gamma = arg
                    .ok_or_else(|| Error::param("model", "custom_fourier needs a lag list"))?
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::param("model", e.to_string()))?;
                Ok(ModelSpec::CustomFourier { gamma })
            }
            other => Err(Error::param("model", format!("unknown model `{other}`"))),
        }
    }
}
