//! Kac–Rice quadrature: `E[N_K(α, β)] = ∫ F1 dx + ∫ F2 dx`.
//!
//! The part of the interval inside `[-1, 1]` is integrated in `x` with the
//! inner moments. The parts with `|x| > 1` are mapped by `x = 1/z` onto
//! `z ∈ (-1, 0)` or `(0, 1)` and integrated with the scaled moments, so no
//! power of `x` is ever formed. Panels are always split at `±(1 - 1/ln n)`,
//! `±(1 - ln ln n / n)`, `±(1 - 10⁻¹²)` and `0` (mirrored in `z` for the
//! tails).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::gk::{self, Pair};
use crate::moments::{integrand, DirectMoments, PolynomialEnsemble};
use crate::spectrum::CovarianceModel;

/// Default absolute tolerance on the total.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Offset from `±1` at which a mandatory panel edge is placed.
pub const EDGE_GUARD: f64 = 1e-12;
/// Lags with `|Γ(k)|` below this are dropped before summation.
const LAG_CUTOFF: f64 = 1e-16;
const MAX_SEGMENTS: usize = 2000;

/// Open interval `(lo, hi)` on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalSpec {
    lo: f64,
    hi: f64,
}

impl IntervalSpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(IntervalSpec { lo, hi })
    }

    pub fn real_line() -> Self {
        IntervalSpec { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn unit() -> Self {
        IntervalSpec { lo: -1.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Half-open membership `[lo, hi)`.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

pub(crate) fn format_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| Error::param("interval", format!("bad bound `{t}`: {e}"))),
    }
}

impl fmt::Display for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", format_bound(self.lo), format_bound(self.hi))
    }
}

/// `a..b` with `-inf` / `inf` tokens.
impl FromStr for IntervalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::param("interval", format!("expected `a..b`, got `{s}`")))?;
        IntervalSpec::new(parse_bound(lo)?, parse_bound(hi)?)
    }
}

/// Positive breakpoints; the partition uses them with both signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoints {
    /// `1 - 1/ln n`
    pub inner: f64,
    /// `1 - ln ln n / n`
    pub near_edge: f64,
}

impl Breakpoints {
    /// Every mandatory panel edge in `[-1, 1]`, ascending.
    pub fn edges(&self) -> [f64; 6] {
        [-1.0, -self.near_edge, -self.inner, self.inner, self.near_edge, 1.0]
    }
}

pub fn breakpoints(n: usize) -> Result<Breakpoints> {
    if n < 16 {
        return Err(Error::BreakpointOrdering(n));
    }
    let ln = (n as f64).ln();
    let bp = Breakpoints {
        inner: 1.0 - 1.0 / ln,
        near_edge: 1.0 - ln.ln() / n as f64,
    };
    debug_assert!(0.0 < bp.inner && bp.inner < bp.near_edge && bp.near_edge < 1.0);
    Ok(bp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    KacRice,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::KacRice => "kac_rice",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

/// Which variable a panel was integrated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PanelVariable {
    /// `x` itself, `|x| <= 1`
    X,
    /// `z = 1/x`, `|x| >= 1`
    Reciprocal,
}

/// Contribution of one mandatory panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    /// Panel bounds in `x`.
    pub x_lo: f64,
    pub x_hi: f64,
    pub variable: PanelVariable,
    pub f1: f64,
    pub f2: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Piece {
    pub fn value(&self) -> f64 {
        self.f1 + self.f2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingEstimate {
    pub value: f64,
    pub abs_err: f64,
    pub pieces: Vec<Piece>,
    pub method: Method,
    /// Set when some panel hit its refinement limit before `tol`.
    pub flagged: bool,
    /// Number of integrand evaluations that used the removable-singularity rule.
    pub regularized_points: usize,
}

impl CrossingEstimate {
    pub fn f1_part(&self) -> f64 {
        self.pieces.iter().map(|p| p.f1).sum()
    }

    pub fn f2_part(&self) -> f64 {
        self.pieces.iter().map(|p| p.f2).sum()
    }
}

/// Mandatory edges within `[lo, hi] ⊂ [-1, 1]`, ascending, including both ends.
fn panel_edges(lo: f64, hi: f64, marks: &[f64]) -> Vec<f64> {
    let mut edges = vec![lo];
    edges.extend(marks.iter().copied().filter(|&m| lo < m && m < hi));
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

struct Panel {
    lo: f64,
    hi: f64,
    variable: PanelVariable,
}

fn panels(n: usize, spec: &IntervalSpec) -> Vec<Panel> {
    let mut marks = vec![0.0, -1.0 + EDGE_GUARD, 1.0 - EDGE_GUARD];
    if let Ok(bp) = breakpoints(n) {
        marks.extend(bp.edges().iter().copied().filter(|e| e.abs() < 1.0));
    }
    // in z the same magnitudes mark the approach to |z| = 1
    let z_marks: Vec<f64> = marks.iter().copied().filter(|&m| m != 0.0).collect();
    let mut out = Vec::new();

    // x < -1  ⇔  z ∈ (-1, 0): ∫_{x1}^{x2} F dx = ∫_{1/x2}^{1/x1} F(1/z) z⁻² dz
    let push_reciprocal = |x1: f64, x2: f64, out: &mut Vec<Panel>| {
        let (z_lo, z_hi) = (1.0 / x2, 1.0 / x1);
        let zs = panel_edges(z_lo, z_hi, &z_marks);
        for w in zs.windows(2) {
            out.push(Panel { lo: w[0], hi: w[1], variable: PanelVariable::Reciprocal });
        }
    };

    if spec.lo < -1.0 {
        push_reciprocal(spec.lo, spec.hi.min(-1.0), &mut out);
    }
    let (a, b) = (spec.lo.max(-1.0), spec.hi.min(1.0));
    if a < b {
        let xs = panel_edges(a, b, &marks);
        for w in xs.windows(2) {
            out.push(Panel { lo: w[0], hi: w[1], variable: PanelVariable::X });
        }
    }
    if spec.hi > 1.0 {
        push_reciprocal(spec.lo.max(1.0), spec.hi, &mut out);
    }
    // reciprocal panels on the negative side come out in increasing z,
    // which is decreasing x; order everything by x for reporting
    out.sort_by(|p, q| x_range(p).0.total_cmp(&x_range(q).0));
    out
}

fn x_range(p: &Panel) -> (f64, f64) {
    match p.variable {
        PanelVariable::X => (p.lo, p.hi),
        PanelVariable::Reciprocal => {
            let inv = |z: f64| if z == 0.0 { if z.is_sign_negative() { f64::NEG_INFINITY } else { f64::INFINITY } } else { 1.0 / z };
            let (x1, x2) = (inv(p.hi), inv(p.lo));
            (x1.min(x2), x1.max(x2))
        }
    }
}

/// Expected number of real solutions of `P_n(x) = K` in the interval.
pub fn expected_crossings(e: &PolynomialEnsemble, spec: &IntervalSpec, tol: f64) -> Result<CrossingEstimate> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    if !e.model().admits_density() {
        return Err(Error::UnsupportedModel("constant"));
    }
    let n = e.degree();
    let gamma = e.model().covariance(n)?.truncated(LAG_CUTOFF);
    let dm = DirectMoments::new(n, &gamma)?;

    let panels = panels(n, spec);
    let panel_tol = tol / panels.len().max(1) as f64;
    let mut pieces = Vec::with_capacity(panels.len());
    let mut regularized_points = 0usize;
    for p in &panels {
        let reciprocal = p.variable == PanelVariable::Reciprocal;
        let outcome = gk::integrate(
            |t| {
                let m = if reciprocal { dm.outer_scaled(t)? } else { dm.at(t)? };
                let v = integrand(e, &m, reciprocal)?;
                if v.regularized {
                    regularized_points += 1;
                }
                Ok::<_, Error>(Pair(v.f1, v.f2))
            },
            p.lo,
            p.hi,
            panel_tol,
            MAX_SEGMENTS,
        )?;
        let (x_lo, x_hi) = x_range(p);
        pieces.push(Piece {
            x_lo,
            x_hi,
            variable: p.variable,
            f1: outcome.value.0,
            f2: outcome.value.1,
            abs_err: outcome.abs_err,
            evaluations: outcome.evaluations,
            converged: outcome.converged,
        });
    }
    let value = pieces.iter().map(Piece::value).sum::<f64>();
    let abs_err = pieces.iter().map(|p| p.abs_err).sum::<f64>();
    Ok(CrossingEstimate {
        value: value.max(0.0),
        abs_err,
        flagged: pieces.iter().any(|p| !p.converged),
        pieces,
        method: Method::KacRice,
        regularized_points,
    })
}

/// How the level depends on the degree across a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRule {
    Fixed(f64),
    /// `K(n) = scale · sqrt(n / ln ln n) / (ln n)^decay`
    Growing { scale: f64, decay: f64 },
}

impl KRule {
    pub fn level(&self, n: usize) -> f64 {
        match *self {
            KRule::Fixed(k) => k,
            KRule::Growing { scale, decay } => {
                let ln = (n as f64).ln();
                scale * (n as f64 / ln.ln()).sqrt() / ln.powf(decay)
            }
        }
    }
}

/// A region of the real line for tabulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interval(IntervalSpec),
    /// `(-∞, -1) ∪ (1, ∞)`
    Outer,
}

impl Region {
    pub fn bounds_label(&self) -> (String, String) {
        match self {
            Region::Interval(s) => (format_bound(s.lo()), format_bound(s.hi())),
            Region::Outer => ("outer".into(), "outer".into()),
        }
    }
}

impl FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "outer" {
            Ok(Region::Outer)
        } else {
            Ok(Region::Interval(s.parse()?))
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval(s) => s.fmt(f),
            Region::Outer => f.write_str("outer"),
        }
    }
}

/// Kac–Rice estimate over a region; `Outer` sums the two tails.
pub fn expected_crossings_region(e: &PolynomialEnsemble, region: &Region, tol: f64) -> Result<CrossingEstimate> {
    match region {
        Region::Interval(spec) => expected_crossings(e, spec, tol),
        Region::Outer => {
            let left = expected_crossings(e, &IntervalSpec::new(f64::NEG_INFINITY, -1.0)?, tol / 2.0)?;
            let right = expected_crossings(e, &IntervalSpec::new(1.0, f64::INFINITY)?, tol / 2.0)?;
            let mut pieces = left.pieces;
            pieces.extend(right.pieces);
            Ok(CrossingEstimate {
                value: left.value + right.value,
                abs_err: left.abs_err + right.abs_err,
                pieces,
                method: Method::KacRice,
                flagged: left.flagged || right.flagged,
                regularized_points: left.regularized_points + right.regularized_points,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub n: usize,
    pub level: f64,
    pub region: Region,
    pub estimate: CrossingEstimate,
    /// Leading-order asymptote for this region, when one applies.
    pub prediction: Option<f64>,
}

impl TableRow {
    pub fn ratio(&self) -> Option<f64> {
        self.prediction.map(|p| self.estimate.value / p)
    }
}

/// One row per `(n, region)`, in the order given.
pub fn crossing_table(
    model: &CovarianceModel,
    ns: &[usize],
    rule: &KRule,
    regions: &[Region],
    tol: f64,
) -> Result<Vec<TableRow>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n", "degree list must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(ns.len() * regions.len());
    for &n in ns {
        let level = rule.level(n);
        let e = PolynomialEnsemble::new(n, model.clone(), level)?;
        for region in regions {
            let estimate = expected_crossings_region(&e, region, tol)?;
            rows.push(TableRow {
                n,
                level,
                region: *region,
                estimate,
                prediction: asymptotics::region_prediction(n, level, model.smoothness(), region),
            });
        }
    }
    Ok(rows)
}
