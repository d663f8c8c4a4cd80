//! Distinct real roots of `P(x) - K` for coefficient vectors.
//!
//! Two locators share one output type. The companion locator takes the
//! eigenvalues of the balanced companion matrix of the rescaled monic
//! polynomial, groups near-real eigenvalues into clusters and confirms each
//! cluster by sign changes between its members (or, for even-multiplicity
//! contact, by a residual test). The subdivision locator works on `[-1, 1]`
//! for `P - K` and for its reversal, discarding panels by a second-order
//! Taylor bound and accepting monotone panels by a sign test; it costs
//! `O(d)` per panel and is used for high degrees.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::quadrature::IntervalSpec;

/// Near-real threshold for eigenvalues entering a cluster.
const LOOSE_IMAG: f64 = 1e-4;
/// Real parts closer than this (relative) are grouped.
const MERGE_DIST: f64 = 1e-4;
/// Residual (relative to `Σ|q_i||x|^i`) accepted as even-order contact.
const TANGENCY_RESIDUAL: f64 = 1e-9;
/// Roots this close to an interval end (relative) are snapped onto it when
/// the polynomial vanishes there to rounding.
const SNAP_DIST: f64 = 1e-9;
/// Francis sweeps per eigenvalue before trying another similar matrix.
const SCHUR_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Which root locator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    Companion,
    Subdivision,
    /// Companion up to [`AUTO_COMPANION_MAX_DEGREE`], subdivision above.
    Auto,
}

pub const AUTO_COMPANION_MAX_DEGREE: usize = 128;

/// Distinct real roots of `q`, ascending.
#[derive(Debug, Clone)]
pub struct RealRoots {
    q: Vec<f64>,
    roots: Vec<f64>,
}

impl RealRoots {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Number of roots in `[lo, hi)`.
    pub fn count_in(&self, spec: &IntervalSpec) -> usize {
        self.roots
            .iter()
            .map(|&r| self.snap(r, spec))
            .filter(|&r| spec.contains(r))
            .count()
    }

    fn snap(&self, r: f64, spec: &IntervalSpec) -> f64 {
        for end in [spec.lo(), spec.hi()] {
            if end.is_finite()
                && (r - end).abs() <= SNAP_DIST * (1.0 + end.abs())
                && horner(&self.q, end).abs() <= noise(&self.q, end)
            {
                return end;
            }
        }
        r
    }
}

/// `q(x)` by Horner's rule.
#[inline]
pub(crate) fn horner(q: &[f64], x: f64) -> f64 {
    q.iter().rev().fold(0.0, |acc, &c| acc.mul_add(x, c))
}

/// `(q(x), q'(x))` in one pass.
#[inline]
fn horner_with_derivative(q: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0f64;
    let mut dp = 0.0f64;
    for &c in q.iter().rev() {
        dp = dp.mul_add(x, p);
        p = p.mul_add(x, c);
    }
    (p, dp)
}

/// Rounding bound for Horner evaluation at `x`.
#[inline]
fn noise(q: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    let mag = q.iter().rev().fold(0.0, |acc: f64, &c| acc.mul_add(ax, c.abs()));
    4.0 * q.len() as f64 * f64::EPSILON * mag
}

fn magnitude(q: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    q.iter().rev().fold(0.0, |acc: f64, &c| acc.mul_add(ax, c.abs()))
}

/// `coeffs - K` with trailing (highest-order) exact zeros removed.
fn shifted(coeffs: &[f64], level: f64) -> Result<Vec<f64>> {
    if coeffs.is_empty() {
        return Err(Error::param("coeffs", "empty coefficient vector"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) || !level.is_finite() {
        return Err(Error::param("coeffs", "non-finite coefficient"));
    }
    let mut q = coeffs.to_vec();
    q[0] -= level;
    while q.len() > 1 && *q.last().unwrap() == 0.0 {
        q.pop();
    }
    if q.len() == 1 && q[0] == 0.0 {
        return Err(Error::Domain("P - K vanishes identically".into()));
    }
    Ok(q)
}

/// Distinct real roots of `P(x) - K`.
pub fn real_level_roots(coeffs: &[f64], level: f64, method: RootMethod) -> Result<RealRoots> {
    let q = shifted(coeffs, level)?;
    let degree = q.len() - 1;
    let method = match method {
        RootMethod::Auto if degree <= AUTO_COMPANION_MAX_DEGREE => RootMethod::Companion,
        RootMethod::Auto => RootMethod::Subdivision,
        m => m,
    };
    let roots = match degree {
        0 => Vec::new(),
        1 => vec![-q[0] / q[1]],
        _ => match method {
            RootMethod::Subdivision => subdivision_roots(&q),
            _ => companion_roots(&q)?,
        },
    };
    Ok(RealRoots { q, roots })
}

/// Number of distinct real solutions of `P(x) = K` in `[lo, hi)`.
pub fn count_level_crossings(coeffs: &[f64], level: f64, spec: &IntervalSpec) -> Result<usize> {
    Ok(real_level_roots(coeffs, level, RootMethod::Auto)?.count_in(spec))
}

// ---------------------------------------------------------------------------
// companion matrix

fn companion_roots(q: &[f64]) -> Result<Vec<f64>> {
    // x = 0 with any multiplicity
    let zeros = q.iter().take_while(|&&c| c == 0.0).count();
    let core = &q[zeros..];
    let mut roots = if zeros > 0 { vec![0.0] } else { Vec::new() };
    let d = core.len() - 1;
    if d == 1 {
        roots.push(-core[0] / core[1]);
    } else if d >= 2 {
        roots.extend(companion_core(core)?);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

fn companion_core(q: &[f64]) -> Result<Vec<f64>> {
    let d = q.len() - 1;
    // x = s·t with s a power of two near |q0/qd|^{1/d}
    let s = {
        let ratio = (q[0] / q[d]).abs().ln() / d as f64;
        2f64.powi((ratio / std::f64::consts::LN_2).round() as i32)
    };
    let lead = q[d] * s.powi(d as i32);
    let mut m = DMatrix::<f64>::zeros(d, d);
    let mut sp = 1.0;
    for i in 0..d {
        m[(i, d - 1)] = -q[i] * sp / lead;
        sp *= s;
        if i > 0 {
            m[(i, i - 1)] = 1.0;
        }
    }
    balance(&mut m);
    let eig = eigenvalues(m)?;

    let mut near_real: Vec<(f64, f64)> = eig
        .iter()
        .map(|z| (z.re * s, z.im * s))
        .filter(|&(re, im)| re.is_finite() && im.abs() <= LOOSE_IMAG * (1.0 + re.abs()))
        .collect();
    near_real.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut roots = Vec::new();
    let mut start = 0;
    while start < near_real.len() {
        let mut end = start + 1;
        while end < near_real.len()
            && near_real[end].0 - near_real[end - 1].0 <= MERGE_DIST * (1.0 + near_real[end].0.abs())
        {
            end += 1;
        }
        let members: Vec<f64> = near_real[start..end].iter().map(|p| p.0).collect();
        confirm_cluster(q, &members, &mut roots);
        start = end;
    }
    Ok(roots)
}

/// The unshifted-exception QR iteration can cycle on exactly structured
/// companion matrices (e.g. only even powers present); a transpose or a
/// fixed rotation similarity breaks the symmetry.
fn eigenvalues(m: DMatrix<f64>) -> Result<Vec<nalgebra::Complex<f64>>> {
    let d = m.nrows();
    let max_iter = SCHUR_SWEEPS_PER_EIGENVALUE * d;
    let rotated = || {
        let (c, s) = (0.8, 0.6);
        let mut g = DMatrix::<f64>::identity(d, d);
        g[(0, 0)] = c;
        g[(0, 1)] = -s;
        g[(1, 0)] = s;
        g[(1, 1)] = c;
        &g * &m * g.transpose()
    };
    for candidate in [m.clone(), m.transpose(), rotated()] {
        if let Some(schur) = Schur::try_new(candidate, f64::EPSILON, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Factorization("eigenvalue iteration did not converge".into()))
}

/// Sign changes between consecutive cluster members locate odd-multiplicity
/// roots; with none, a vanishing residual at the centre is even contact.
fn confirm_cluster(q: &[f64], members: &[f64], roots: &mut Vec<f64>) {
    let first = members[0];
    let last = *members.last().unwrap();
    let centre = members.iter().sum::<f64>() / members.len() as f64;
    let h = (2.0 * (last - first)).max(1e-7 * (1.0 + centre.abs()));

    let mut probes = Vec::with_capacity(members.len() + 1);
    probes.push(first - h);
    probes.extend(members.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes.push(last + h);

    // probe i sits left of member i
    let mut prev: Option<(usize, f64)> = None;
    let mut found = false;
    for (i, &t) in probes.iter().enumerate() {
        let v = horner(q, t);
        if v.abs() <= noise(q, t) {
            continue;
        }
        let s = v.signum();
        if let Some((j, ps)) = prev {
            if ps != s {
                // a root lies among members j..i; report the nearest one
                let k = (j..i).min_by(|&a, &b| {
                    horner(q, members[a]).abs().total_cmp(&horner(q, members[b]).abs())
                });
                roots.push(members[k.unwrap_or(j)]);
                found = true;
            }
        }
        prev = Some((i, s));
    }
    if !found && horner(q, centre).abs() <= TANGENCY_RESIDUAL * magnitude(q, centre) {
        roots.push(centre);
    }
}

/// Parlett–Reinsch balancing with radix 2 (row/column scaling that leaves
/// the spectrum unchanged).
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix2 = 4.0;
    loop {
        let mut done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= radix2;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= radix2;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// subdivision on [-1, 1]

const MAX_DEPTH: u32 = 64;

struct Subdivider<'a> {
    q: &'a [f64],
    /// `i(i-1)|q_i|` for the second-derivative bound.
    second: Vec<f64>,
    roots: Vec<f64>,
}

impl<'a> Subdivider<'a> {
    fn new(q: &'a [f64]) -> Self {
        let second = q
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, c)| (i * (i - 1)) as f64 * c.abs())
            .collect();
        Subdivider {
            q,
            second,
            roots: Vec::new(),
        }
    }

    /// `max |q''|` over `|t| <= rho`.
    fn second_bound(&self, rho: f64) -> f64 {
        self.second.iter().rev().fold(0.0, |acc, &c| acc.mul_add(rho, c))
    }

    /// Roots in `[a, b)`.
    fn run(&mut self, a: f64, b: f64, depth: u32) {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let (v, dv) = horner_with_derivative(self.q, c);
        let rho = a.abs().max(b.abs());
        let m2 = self.second_bound(rho);
        let eps = noise(self.q, c);
        if v.abs() - r * dv.abs() - 0.5 * r * r * m2 > eps {
            return;
        }
        if dv.abs() - r * m2 > 0.0 || depth >= MAX_DEPTH || !(a < c && c < b) {
            self.monotone(a, b);
            return;
        }
        self.run(a, c, depth + 1);
        self.run(c, b, depth + 1);
    }

    /// At most one root in `[a, b)`: locate it by bisection.
    fn monotone(&mut self, a: f64, b: f64) {
        let fa = horner(self.q, a);
        let fb = horner(self.q, b);
        if fa == 0.0 {
            self.roots.push(a);
            return;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            return;
        }
        let (mut lo, mut hi, mut flo) = (a, b, fa);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(lo < mid && mid < hi) {
                break;
            }
            let fm = horner(self.q, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        self.roots.push(0.5 * (lo + hi));
    }
}

fn subdivision_roots(q: &[f64]) -> Vec<f64> {
    // |x| <= 1
    let mut inner = Subdivider::new(q);
    inner.run(-1.0, 1.0, 0);
    if horner(q, 1.0) == 0.0 {
        inner.roots.push(1.0);
    }
    let mut roots = inner.roots;

    // |x| > 1 through the reversal z^d q(1/z) on z ∈ (-1, 0) ∪ (0, 1)
    let rev: Vec<f64> = q.iter().rev().copied().collect();
    let mut outer = Subdivider::new(&rev);
    outer.run(-1.0, 0.0, 0);
    outer.run(0.0, 1.0, 0);
    roots.extend(
        outer
            .roots
            .into_iter()
            .filter(|&z| z != 0.0 && z.abs() < 1.0)
            .map(|z| 1.0 / z),
    );
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(coeffs: &[f64], k: f64, spec: &str, method: RootMethod) -> usize {
        real_level_roots(coeffs, k, method)
            .unwrap()
            .count_in(&spec.parse().unwrap())
    }

    #[test]
    fn hand_cases() {
        for m in [RootMethod::Companion, RootMethod::Subdivision] {
            assert_eq!(count(&[-1.0, 0.0, 1.0], 0.0, "-2..2", m), 2);
            assert_eq!(count(&[1.0, 0.0, 1.0], 0.0, "-inf..inf", m), 0);
            assert_eq!(count(&[0.0, -1.0, 0.0, 1.0], 0.0, "-0.5..2", m), 2);
        }
    }

    #[test]
    fn level_shift_and_half_open_ends() {
        // x² = 4 → ±2
        let c = [0.0, 0.0, 1.0];
        assert_eq!(count(&c, 4.0, "-2..2", RootMethod::Companion), 1);
        assert_eq!(count(&c, 4.0, "-3..2.5", RootMethod::Companion), 2);
        assert_eq!(count(&c, 4.0, "2..3", RootMethod::Companion), 1);
    }

    #[test]
    fn multiple_roots_are_counted_once() {
        // (x-1)² (x+2) = x³ - 3x + 2
        let c = [2.0, -3.0, 0.0, 1.0];
        assert_eq!(count(&c, 0.0, "-inf..inf", RootMethod::Companion), 2);
        // (x-1)³ = x³ - 3x² + 3x - 1
        let c = [-1.0, 3.0, -3.0, 1.0];
        assert_eq!(count(&c, 0.0, "-inf..inf", RootMethod::Companion), 1);
        // x²(x²+1)
        let c = [0.0, 0.0, 1.0, 0.0, 1.0];
        assert_eq!(count(&c, 0.0, "-inf..inf", RootMethod::Companion), 1);
        // (x² - 2)²
        let c = [4.0, 0.0, -4.0, 0.0, 1.0];
        assert_eq!(count(&c, 0.0, "-inf..inf", RootMethod::Companion), 2);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(real_level_roots(&[], 0.0, RootMethod::Auto).is_err());
        assert!(real_level_roots(&[2.0], 2.0, RootMethod::Auto).is_err());
        assert_eq!(count(&[3.0, 0.0, 0.0], 1.0, "-inf..inf", RootMethod::Auto), 0);
        // trailing zeros trimmed: 1 + x + 0x²
        assert_eq!(count(&[1.0, 1.0, 0.0], 0.0, "-inf..inf", RootMethod::Auto), 1);
    }

    #[test]
    fn subdivision_agrees_with_companion_on_wide_polynomials() {
        // Chebyshev-like: roots of x^8 - 0.5 spread inside and outside the unit interval
        let mut c = vec![0.0; 9];
        c[0] = -0.5;
        c[8] = 1.0;
        for spec in ["-inf..inf", "-1..1", "0..inf"] {
            assert_eq!(
                count(&c, 0.0, spec, RootMethod::Companion),
                count(&c, 0.0, spec, RootMethod::Subdivision),
                "{spec}"
            );
        }
        // roots 3 and -5 outside the unit interval
        let c = [-15.0, 2.0, 1.0];
        assert_eq!(count(&c, 0.0, "1..inf", RootMethod::Subdivision), 1);
        assert_eq!(count(&c, 0.0, "-inf..-1", RootMethod::Subdivision), 1);
        let r = real_level_roots(&c, 0.0, RootMethod::Subdivision).unwrap();
        assert!((r.roots()[0] + 5.0).abs() < 1e-12 && (r.roots()[1] - 3.0).abs() < 1e-12);
    }
}
