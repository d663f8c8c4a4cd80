//! Monte Carlo oracle: Gaussian coefficient sampling and empirical crossing
//! counts.
//!
//! Every sample owns its own ChaCha stream, selected by the sample index
//! under the master seed, so a sample's coefficients do not depend on how
//! work is split between threads. Counts are reduced as integers.

use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::moments::PolynomialEnsemble;
use crate::quadrature::{IntervalSpec, Region};
use crate::spectrum::{CovarianceModel, CovarianceSequence};

pub use crate::roots::{count_level_crossings, real_level_roots, RealRoots, RootMethod, AUTO_COMPANION_MAX_DEGREE};

/// Embedding eigenvalues below this trigger the dense fallback.
pub const EMBEDDING_NEGATIVE_TOL: f64 = -1e-9;
/// Diagonal jitter for the dense Toeplitz factorization.
pub const CHOLESKY_JITTER: f64 = 1e-12;
/// Rejection share above which an estimate is flagged.
pub const REJECTION_LIMIT: f64 = 1e-3;
pub const MIN_SAMPLES: usize = 100;

/// How coefficient vectors are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMethod {
    Independent,
    ConstantRho,
    CirculantEmbedding { size: usize },
    DenseCholesky,
}

enum Kind {
    Independent,
    Constant(f64),
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Dense(DMatrix<f64>),
}

/// Draws coefficient vectors `(X_0, …, X_n)` with covariance `Toeplitz(Γ)`.
pub struct CoefficientSampler {
    n: usize,
    seed: u64,
    kind: Kind,
}

impl std::fmt::Debug for CoefficientSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientSampler")
            .field("n", &self.n)
            .field("seed", &self.seed)
            .field("method", &self.method())
            .finish()
    }
}

impl CoefficientSampler {
    pub fn new(model: &CovarianceModel, n: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "need at least two coefficients"));
        }
        let kind = match model {
            CovarianceModel::Independent => Kind::Independent,
            CovarianceModel::ConstantRho(rho) => Kind::Constant(*rho),
            CovarianceModel::Density(_) => {
                let size = (4 * (n + 1)).next_power_of_two();
                let gamma = model.covariance(size / 2)?;
                match circulant(&gamma, size)? {
                    Some(k) => k,
                    None => Kind::Dense(dense_factor(&gamma, n)?),
                }
            }
        };
        Ok(CoefficientSampler { n, seed, kind })
    }

    /// Forces the dense Toeplitz factorization (for cross-checks).
    pub fn dense(model: &CovarianceModel, n: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "need at least two coefficients"));
        }
        let gamma = model.covariance(n)?;
        Ok(CoefficientSampler {
            n,
            seed,
            kind: Kind::Dense(dense_factor(&gamma, n)?),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method(&self) -> SamplingMethod {
        match &self.kind {
            Kind::Independent => SamplingMethod::Independent,
            Kind::Constant(_) => SamplingMethod::ConstantRho,
            Kind::Circulant { sqrt_eig, .. } => SamplingMethod::CirculantEmbedding { size: sqrt_eig.len() },
            Kind::Dense(_) => SamplingMethod::DenseCholesky,
        }
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Coefficients of sample `index`; a pure function of `(seed, index)`.
    pub fn sample(&self, index: u64) -> Vec<f64> {
        let mut rng = self.rng(index);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let len = self.n + 1;
        match &self.kind {
            Kind::Independent => (0..len).map(|_| normal()).collect(),
            Kind::Constant(rho) => {
                let z = normal();
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                (0..len).map(|_| a * z + b * normal()).collect()
            }
            Kind::Circulant { sqrt_eig, fft } => {
                // Re(F·diag(√(λ/M))·W), W complex with N(0,1) parts
                let mut buf: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|&s| {
                        let re = normal();
                        let im = normal();
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..len].iter().map(|c| c.re).collect()
            }
            Kind::Dense(l) => {
                let xi = DVector::from_iterator(len, (0..len).map(|_| normal()));
                (l * xi).iter().copied().collect()
            }
        }
    }
}

/// `None` when the embedding is not nonnegative definite.
fn circulant(gamma: &CovarianceSequence, size: usize) -> Result<Option<Kind>> {
    let mut ring: Vec<Complex<f64>> = (0..size)
        .map(|j| {
            let lag = j.min(size - j) as i64;
            Complex::new(gamma.lag(lag).unwrap_or(0.0), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut ring);
    let mut sqrt_eig = Vec::with_capacity(size);
    for c in &ring {
        let lambda = c.re;
        if !lambda.is_finite() {
            return Err(Error::InvalidCovariance("non-finite embedding eigenvalue".into()));
        }
        if lambda < EMBEDDING_NEGATIVE_TOL {
            return Ok(None);
        }
        sqrt_eig.push((lambda.max(0.0) / size as f64).sqrt());
    }
    Ok(Some(Kind::Circulant { sqrt_eig, fft }))
}

fn dense_factor(gamma: &CovarianceSequence, n: usize) -> Result<DMatrix<f64>> {
    let mut t = gamma.toeplitz(n + 1)?;
    for i in 0..=n {
        t[(i, i)] += CHOLESKY_JITTER;
    }
    let chol = t
        .cholesky()
        .ok_or_else(|| Error::Factorization("Toeplitz covariance is not positive definite".into()))?;
    Ok(chol.l())
}

/// A batch of coefficient vectors drawn under one master seed.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub method: SamplingMethod,
    pub coefficients: Vec<Vec<f64>>,
}

impl SampleBatch {
    /// Empirical `E[X_j X_{j+k}]` pooled over samples and positions, with
    /// the standard error of the per-sample averages.
    pub fn empirical_covariance(&self, k: usize) -> Result<(f64, f64)> {
        let len = self.coefficients.first().map_or(0, Vec::len);
        if k >= len {
            return Err(Error::MissingLags {
                required: k,
                available: len.saturating_sub(1),
            });
        }
        if self.count < 2 {
            return Err(Error::InsufficientData { got: self.count, need: 2 });
        }
        let per_sample: Vec<f64> = self
            .coefficients
            .iter()
            .map(|x| {
                let terms = len - k;
                (0..terms).map(|j| x[j] * x[j + k]).sum::<f64>() / terms as f64
            })
            .collect();
        let m = self.count as f64;
        let mean = per_sample.iter().sum::<f64>() / m;
        let var = per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Ok((mean, (var / m).sqrt()))
    }
}

/// Draws `count` coefficient vectors of a degree-`n` polynomial.
pub fn sample_coefficients(model: &CovarianceModel, n: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    let sampler = CoefficientSampler::new(model, n, seed)?;
    let coefficients = (0..count as u64).into_par_iter().map(|i| sampler.sample(i)).collect();
    Ok(SampleBatch {
        seed,
        count,
        method: sampler.method(),
        coefficients,
    })
}

/// Sample mean of crossing counts over a region.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Samples that entered the mean.
    pub count: usize,
    pub rejected: usize,
    pub region: Region,
    pub flagged: bool,
}

impl MCEstimate {
    fn from_counts(counts: &[Option<u32>], region: Region) -> Self {
        let (mut used, mut sum, mut sum_sq) = (0u64, 0u64, 0u64);
        for c in counts.iter().flatten() {
            used += 1;
            sum += *c as u64;
            sum_sq += (*c as u64) * (*c as u64);
        }
        let rejected = counts.len() - used as usize;
        let m = used as f64;
        let mean = if used > 0 { sum as f64 / m } else { 0.0 };
        let std_error = if used > 1 {
            // Σ(c - mean)² = Σc² - (Σc)²/m, computed exactly in integers scaled by m
            let num = (sum_sq as u128 * used as u128).saturating_sub(sum as u128 * sum as u128);
            (num as f64 / (m * m * (m - 1.0))).sqrt()
        } else {
            0.0
        };
        MCEstimate {
            mean,
            std_error,
            count: used as usize,
            rejected,
            region,
            flagged: used == 0 || rejected as f64 > REJECTION_LIMIT * counts.len() as f64,
        }
    }

    /// `(mean - reference) / std_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_error
    }
}

/// Per-sample crossing counts for several regions; `None` marks a rejected
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCounts {
    pub regions: Vec<Region>,
    /// `counts[r][i]`: region `r`, sample `i`.
    pub counts: Vec<Vec<Option<u32>>>,
}

impl SampleCounts {
    pub fn estimate(&self, r: usize) -> MCEstimate {
        MCEstimate::from_counts(&self.counts[r], self.regions[r])
    }

    /// `sample_index,count` rows for region `r`; rejected samples print an
    /// empty count.
    pub fn write_csv<W: Write>(&self, r: usize, mut w: W) -> io::Result<()> {
        writeln!(w, "sample_index,count")?;
        for (i, c) in self.counts[r].iter().enumerate() {
            match c {
                Some(c) => writeln!(w, "{i},{c}")?,
                None => writeln!(w, "{i},")?,
            }
        }
        Ok(())
    }

    /// Little-endian `u32` per sample; `u32::MAX` marks rejection.
    pub fn write_binary<W: Write>(&self, r: usize, mut w: W) -> io::Result<()> {
        for c in &self.counts[r] {
            w.write_all(&c.unwrap_or(u32::MAX).to_le_bytes())?;
        }
        Ok(())
    }
}

fn region_count(roots: &RealRoots, region: &Region) -> u32 {
    let n = match region {
        Region::Interval(spec) => roots.count_in(spec),
        Region::Outer => {
            let left = IntervalSpec::new(f64::NEG_INFINITY, -1.0).expect("valid");
            let right = IntervalSpec::new(1.0, f64::INFINITY).expect("valid");
            roots.count_in(&left) + roots.count_in(&right)
        }
    };
    n as u32
}

/// Crossing counts of `count` samples over several regions, each sample's
/// roots computed once.
pub fn simulate_counts(
    e: &PolynomialEnsemble,
    regions: &[Region],
    count: usize,
    seed: u64,
    method: RootMethod,
) -> Result<SampleCounts> {
    if count < MIN_SAMPLES {
        return Err(Error::param("count", format!("need at least {MIN_SAMPLES} samples")));
    }
    let sampler = CoefficientSampler::new(e.model(), e.degree(), seed)?;
    let level = e.level();
    let per_sample: Vec<Option<Vec<u32>>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(i);
            match real_level_roots(&x, level, method) {
                Ok(roots) => Some(regions.iter().map(|r| region_count(&roots, r)).collect()),
                Err(_) => None,
            }
        })
        .collect();
    let counts = (0..regions.len())
        .map(|r| per_sample.iter().map(|s| s.as_ref().map(|v| v[r])).collect())
        .collect();
    Ok(SampleCounts {
        regions: regions.to_vec(),
        counts,
    })
}

/// Empirical `E[N_K]` over `spec`.
pub fn estimate_crossings(e: &PolynomialEnsemble, spec: &IntervalSpec, count: usize, seed: u64) -> Result<MCEstimate> {
    estimate_crossings_region(e, &Region::Interval(*spec), count, seed)
}

pub fn estimate_crossings_region(e: &PolynomialEnsemble, region: &Region, count: usize, seed: u64) -> Result<MCEstimate> {
    Ok(simulate_counts(e, std::slice::from_ref(region), count, seed, RootMethod::Auto)?.estimate(0))
}
