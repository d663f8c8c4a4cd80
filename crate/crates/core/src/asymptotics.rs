//! Leading-order laws for the expected number of level crossings, the
//! arctan-form edge approximations of the moments, and log-slope fitting.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentTriple;
use crate::quadrature::{Region, TableRow};
use crate::spectrum::{Smoothness, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `K` bounded, continuous density.
    KBoundedC0,
    /// `K = o(sqrt(n / ln ln n))`, continuously differentiable density.
    KGrowingC1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalClass {
    /// `(-1, 1)`
    Inner,
    /// `(-∞, -1) ∪ (1, ∞)`
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorOrder {
    /// Only `value ~ prediction` is claimed.
    LittleOLogN,
    /// `value = prediction + O(ln ln n)`.
    BigOLogLogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub regime: Regime,
    pub interval_class: IntervalClass,
    pub value: f64,
    pub error_order: ErrorOrder,
}

/// `(1/π) ln n` for bounded levels on either class; `(1/π) ln(n/K²)` on the
/// inner class when the level grows.
pub fn theorem_prediction(
    n: usize,
    k: f64,
    regime: Regime,
    interval_class: IntervalClass,
) -> Result<AsymptoticPrediction> {
    if n < 3 {
        return Err(Error::param("n", "predictions need n >= 3"));
    }
    let nf = n as f64;
    let (value, error_order) = match regime {
        Regime::KBoundedC0 => (nf.ln() / PI, ErrorOrder::LittleOLogN),
        Regime::KGrowingC1 => {
            if !(k * k < nf) {
                return Err(Error::OutOfRegime { k, n });
            }
            let v = match interval_class {
                IntervalClass::Inner => (nf / (k * k)).ln() / PI,
                IntervalClass::Outer => nf.ln() / PI,
            };
            (v, ErrorOrder::BigOLogLogN)
        }
    };
    Ok(AsymptoticPrediction {
        regime,
        interval_class,
        value,
        error_order,
    })
}

/// Regime used when tabulating: the growing-level law applies to `C¹`
/// densities with `|K| > 1`; everything else uses the bounded law.
pub fn regime_for(level: f64, smoothness: Smoothness) -> Regime {
    if smoothness == Smoothness::C1 && level.abs() > 1.0 {
        Regime::KGrowingC1
    } else {
        Regime::KBoundedC0
    }
}

/// Prediction for the canonical regions: `(-1,1)`, the outer pair, a single
/// tail or half of `(-1,1)` (half the class total), and the whole line.
/// `None` for other intervals or when no law applies.
pub fn region_prediction(n: usize, level: f64, smoothness: Option<Smoothness>, region: &Region) -> Option<f64> {
    let regime = regime_for(level, smoothness?);
    let class = |c| theorem_prediction(n, level, regime, c).ok().map(|p| p.value);
    let inner = class(IntervalClass::Inner);
    let outer = class(IntervalClass::Outer);
    match region {
        Region::Outer => outer,
        Region::Interval(s) => match (s.lo(), s.hi()) {
            (lo, hi) if lo == -1.0 && hi == 1.0 => inner,
            (lo, hi) if (lo == -1.0 && hi == 0.0) || (lo == 0.0 && hi == 1.0) => inner.map(|v| v / 2.0),
            (lo, hi) if (lo == 1.0 && hi == f64::INFINITY) || (lo == f64::NEG_INFINITY && hi == -1.0) => {
                outer.map(|v| v / 2.0)
            }
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => Some(inner? + outer?),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSide {
    /// Near `x = +1`, governed by `f(0)`.
    Plus,
    /// Near `x = -1`, governed by `f(π)`.
    Minus,
}

/// Distance `y` from the edge `±1` at degree `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeZoom {
    pub y: f64,
    pub n: usize,
    pub side: EdgeSide,
}

impl EdgeZoom {
    pub fn new(y: f64, n: usize, side: EdgeSide) -> Result<Self> {
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::param("y", "distance to the edge must lie in (0, 1)"));
        }
        if n < 16 {
            return Err(Error::BreakpointOrdering(n));
        }
        Ok(EdgeZoom { y, n, side })
    }

    /// `ln n / ln ln n`, the `y`-free ratio `g(y)/y`.
    pub fn cutoff_ratio(&self) -> f64 {
        let ln = (self.n as f64).ln();
        ln / ln.ln()
    }

    /// `g(y) = y ln n / ln ln n`
    pub fn g(&self) -> f64 {
        self.y * self.cutoff_ratio()
    }

    /// `(ln ln n / n, 1 / ln n)`
    pub fn zone(&self) -> (f64, f64) {
        let ln = (self.n as f64).ln();
        (ln.ln() / self.n as f64, 1.0 / ln)
    }

    /// The point `x = ±(1 - y)`.
    pub fn x(&self) -> f64 {
        match self.side {
            EdgeSide::Plus => 1.0 - self.y,
            EdgeSide::Minus => -(1.0 - self.y),
        }
    }
}

/// Arctan-form moments near an edge, with the order of the neglected terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeMoments {
    pub moments: MomentTriple,
    /// `None` for continuous densities (only `~` holds); for `C¹` densities
    /// the dropped terms are `O(1/g)`, `O(1/(y g))`, `O(1/(y² g))` on
    /// `A, B, C`, recorded here as the `A` term `1/g(y)`.
    pub dropped_order: Option<f64>,
}

/// `A ≈ 2f/y · T`, `B ≈ ±f/y² · T`, `C ≈ f/y³ · T` with
/// `T = arctan(g(y)/y)` and `f = f(0)` (plus edge) or `f(π)` (minus edge).
pub fn edge_moment_approx(zoom: &EdgeZoom, f: &SpectralDensity, smoothness: Smoothness) -> Result<EdgeMoments> {
    let (lo, hi) = zoom.zone();
    if !(zoom.y > lo && zoom.y < hi) {
        return Err(Error::OutsideZone { y: zoom.y, lo, hi });
    }
    let y = zoom.y;
    let (fv, sign) = match zoom.side {
        EdgeSide::Plus => (f.evaluate(0.0), 1.0),
        EdgeSide::Minus => (f.evaluate(PI), -1.0),
    };
    let t = zoom.cutoff_ratio().atan();
    let a = 2.0 * fv / y * t;
    let b = sign * fv / (y * y) * t;
    let c = fv / (y * y * y) * t;
    let gram = fv * fv / y.powi(4) * t * t;
    Ok(EdgeMoments {
        moments: MomentTriple {
            a,
            b,
            c,
            gram,
            gram_scale: a * c,
            point: zoom.x(),
            scale_exponent: 0,
        },
        dropped_order: match smoothness {
            Smoothness::C0 => None,
            Smoothness::C1 => Some(1.0 / zoom.g()),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fit.
    pub max_residual: f64,
}

/// Least-squares line `value ≈ slope · ln n + intercept` through `(n, value)`
/// points with ascending `n`.
pub fn fit_log_slope_points(points: &[(usize, f64)]) -> Result<LogSlopeFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData { got: points.len(), need: 4 });
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::param("n", "rows must have strictly ascending n"));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, &(_, y)) in xs.iter().zip(points) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_residual = xs
        .iter()
        .zip(points)
        .map(|(x, &(_, y))| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(LogSlopeFit {
        slope,
        intercept,
        max_residual,
    })
}

/// [`fit_log_slope_points`] over the estimate column of a table.
pub fn fit_log_slope(rows: &[TableRow]) -> Result<LogSlopeFit> {
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.estimate.value)).collect();
    fit_log_slope_points(&points)
}
