//! Second moments of `P_n` and its derivative, and the Kac–Rice integrand.
//!
//! `A(x) = E[P_n(x)²]`, `B(x) = E[P_n(x) P_n'(x)]`, `C(x) = E[P_n'(x)²]`.
//! Two independent routes are provided: finite lag sums over the covariance
//! sequence, and periodic quadrature of the geometric-series kernels against
//! the spectral density. For `|x| > 1` the moments are carried in scaled form
//! with `x = 1/z`:
//!
//! ```text
//! A(1/z) =  z^{-2n}   Ã
//! B(1/z) = -z^{-2n+1} B̃
//! C(1/z) =  z^{-2n+2} C̃
//! ```

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{CovarianceModel, CovarianceSequence, SpectralDensity};
use crate::sum::CompensatedSum;

/// Relative width of the band `|AC - B²| <= ε·AC` treated as a removable
/// singularity.
pub const GRAM_EPS: f64 = 1e-10;

/// `1/√(2π)`. Given `P = K`, `P' ~ N(μ, σ²)` with `μ = BK/A`, `σ² = Δ/A`, and
/// `E|P'| = σ√(2/π)e^{-μ²/2σ²} + |μ|·erf(|μ|/σ√2)`; multiplying by the
/// density `e^{-K²/2A}/√(2πA)` turns the first term into `F1` and the second
/// into `F2`. The constant `√2/π` sometimes quoted for this
/// term overstates it by `2/√π` and disagrees with direct simulation.
pub const F2_PREFACTOR: f64 = 0.398_942_280_401_432_7;

const SPECTRAL_REL_TOL: f64 = 1e-13;
const SPECTRAL_MAX_POINTS: usize = 1 << 23;

/// Random polynomial `P_n(x) = Σ_{k=0}^n X_k x^k` observed at level `K`.
#[derive(Debug, Clone)]
pub struct PolynomialEnsemble {
    n: usize,
    model: CovarianceModel,
    level: f64,
}

impl PolynomialEnsemble {
    pub fn new(n: usize, model: CovarianceModel, level: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "degree must be at least 1"));
        }
        if !level.is_finite() {
            return Err(Error::param("k", "level must be finite"));
        }
        Ok(PolynomialEnsemble { n, model, level })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    /// The level `K`.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn with_level(&self, level: f64) -> Result<Self> {
        Self::new(self.n, self.model.clone(), level)
    }
}

/// `(A, B, C)` at a point, possibly in the scaled outer form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `AC - B²`, computed from the most stable route available. In scaled
    /// form this is `ÃC̃ - B̃²`.
    pub gram: f64,
    /// Magnitude against which `gram` is compared for degeneracy.
    pub gram_scale: f64,
    /// `x` for the inner form, `z = 1/x` for the scaled form.
    pub point: f64,
    /// `p` with `A(1/z) = z^{-p} Ã`; `0` for the inner form, `2n` otherwise.
    pub scale_exponent: u32,
}

impl MomentTriple {
    pub fn is_scaled(&self) -> bool {
        self.scale_exponent != 0
    }

    /// True `(A, B, C)` at `x = 1/z` (or the stored values for the inner
    /// form). May overflow for large degrees.
    pub fn unscaled(&self) -> (f64, f64, f64) {
        if !self.is_scaled() {
            return (self.a, self.b, self.c);
        }
        let z = self.point;
        let p = self.scale_exponent as i32;
        (
            self.a * z.powi(-p),
            -self.b * z.powi(-p + 1),
            self.c * z.powi(-p + 2),
        )
    }

    /// `A > 0`, `C >= 0` and the Gram inequality within [`GRAM_EPS`].
    pub fn satisfies_invariants(&self) -> bool {
        self.a > 0.0 && self.c >= 0.0 && self.gram >= -GRAM_EPS * self.gram_scale
    }
}

/// Kac–Rice integrand `F1 + F2` per unit `x` (per unit `z`, Jacobian
/// included, in the reciprocal form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandValue {
    pub f1: f64,
    pub f2: f64,
    /// Set when the point fell in the removable-singularity band.
    pub regularized: bool,
}

impl IntegrandValue {
    pub fn total(&self) -> f64 {
        self.f1 + self.f2
    }
}

/// Lag-sum evaluator for a fixed degree and covariance sequence.
///
/// Cost per point is `O(n + m)` where `m` is the highest nonzero lag: the
/// double sums are regrouped by lag `d = k - j`, and the inner power sums
/// over `j` are shared across lags as compensated prefix sums.
#[derive(Debug, Clone)]
pub struct DirectMoments {
    n: usize,
    gamma: Vec<f64>,
}

impl DirectMoments {
    pub fn new(n: usize, gamma: &CovarianceSequence) -> Result<Self> {
        if !gamma.covers(n) {
            return Err(Error::MissingLags {
                required: n,
                available: gamma.max_lag(),
            });
        }
        let lags = gamma.max_lag().min(n);
        Ok(DirectMoments {
            n,
            gamma: gamma.as_slice()[..=lags].to_vec(),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Raw `(A, B, C)` at `x`, no validation.
    fn sums(&self, x: f64) -> (f64, f64, f64) {
        let n = self.n;
        let x2 = x * x;
        // S0[N] = Σ_{j=0}^N x^{2j}, T1[N] = Σ_{j=1}^N j x^{2j-2},
        // T2[N] = Σ_{j=1}^N j² x^{2j-2}.
        let mut s0 = Vec::with_capacity(n + 1);
        let mut t1 = Vec::with_capacity(n + 1);
        let mut t2 = Vec::with_capacity(n + 1);
        let (mut acc0, mut acc1, mut acc2) =
            (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        acc0.add(1.0);
        s0.push(1.0);
        t1.push(0.0);
        t2.push(0.0);
        let mut pow = 1.0; // x^{2j-2}
        for j in 1..=n {
            let jf = j as f64;
            acc1.add(jf * pow);
            acc2.add(jf * jf * pow);
            pow *= x2;
            acc0.add(pow);
            s0.push(acc0.value());
            t1.push(acc1.value());
            t2.push(acc2.value());
        }

        let (mut a, mut b, mut c) =
            (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        a.add(self.gamma[0] * s0[n]);
        b.add(self.gamma[0] * x * t1[n]);
        c.add(self.gamma[0] * t2[n]);
        let mut xd_minus = 1.0; // x^{d-1}
        for (d, &g) in self.gamma.iter().enumerate().skip(1) {
            if g == 0.0 {
                xd_minus *= x;
                continue;
            }
            let m = n - d;
            let df = d as f64;
            let xd = xd_minus * x;
            a.add(2.0 * g * xd * s0[m]);
            b.add(g * xd_minus * (2.0 * x2 * t1[m] + df * s0[m]));
            c.add(2.0 * g * xd * (t2[m] + df * t1[m]));
            xd_minus = xd;
        }
        (a.value(), b.value(), c.value())
    }

    /// Unscaled moments at `x`.
    pub fn at(&self, x: f64) -> Result<MomentTriple> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("x = {x} is not finite")));
        }
        let (a, b, c) = self.sums(x);
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Domain(format!(
                "moments overflow at x = {x}; use the scaled outer form"
            )));
        }
        let gram = a.mul_add(c, -b * b);
        Ok(MomentTriple {
            a,
            b,
            c,
            gram,
            gram_scale: a * c,
            point: x,
            scale_exponent: 0,
        })
    }

    /// Scaled moments at `x = 1/z` through the reversal identities
    /// `Ã = A(z)`, `B̃ = zB(z) - nA(z)`, `C̃ = n²A(z) - 2nzB(z) + z²C(z)`,
    /// which give `ÃC̃ - B̃² = z²(A(z)C(z) - B(z)²)` without cancellation.
    pub fn outer_scaled(&self, z: f64) -> Result<MomentTriple> {
        if z == 0.0 || !(z.abs() <= 1.0) {
            return Err(Error::Domain(format!("outer form needs 0 < |z| <= 1, got {z}")));
        }
        let (a, b, c) = self.sums(z);
        let nf = self.n as f64;
        let bt = z * b - nf * a;
        let ct = nf * nf * a - 2.0 * nf * z * b + z * z * c;
        let inner_gram = a.mul_add(c, -b * b);
        Ok(MomentTriple {
            a,
            b: bt,
            c: ct,
            gram: z * z * inner_gram,
            gram_scale: z * z * a * c,
            point: z,
            scale_exponent: 2 * self.n as u32,
        })
    }
}

/// `A, B, C` from the lag double sums.
pub fn moments_direct(
    e: &PolynomialEnsemble,
    gamma: &CovarianceSequence,
    x: f64,
) -> Result<MomentTriple> {
    DirectMoments::new(e.degree(), gamma)?.at(x)
}

/// Geometric kernel `E(w) = Σ_{k=0}^n x^k w^k` and its `x`-derivative in
/// closed form, for `w = e^{iφ}`.
#[inline]
fn kernels(x: f64, n: usize, phi: f64) -> (Complex64, Complex64) {
    let w = Complex64::from_polar(1.0, phi);
    let np1 = (n + 1) as f64;
    let xn = x.powi(n as i32);
    let tail = Complex64::from_polar(xn * x, np1 * phi); // x^{n+1} w^{n+1}
    let one_minus_xw = 1.0 - x * w;
    let num = 1.0 - tail;
    let e = num / one_minus_xw;
    let de = (-np1 * xn * Complex64::from_polar(1.0, np1 * phi) * one_minus_xw + num * w)
        / (one_minus_xw * one_minus_xw);
    (e, de)
}

/// Kernel pair for the scaled outer form at `z`: `E(z w)` and
/// `G(q) = (-(n+1)(1-q) + 1 - q^{n+1})/(1-q)²` at `q = z w̄`.
#[inline]
fn outer_kernels(z: f64, n: usize, phi: f64) -> (Complex64, Complex64) {
    let (e, _) = kernels(z, n, phi);
    let np1 = (n + 1) as f64;
    let q = Complex64::from_polar(z, -phi);
    let qn1 = Complex64::from_polar(z.powi(n as i32 + 1), -np1 * phi);
    let one_minus_q = 1.0 - q;
    let g = (-np1 * one_minus_q + 1.0 - qn1) / (one_minus_q * one_minus_q);
    (e, g)
}

/// Periodic trapezoid rule for the three moment integrals, doubling the
/// grid (reusing previous nodes) until the relative change is below 1e-13.
fn spectral_quadrature<K>(f: &SpectralDensity, n: usize, x: f64, kernel: K) -> Result<(f64, f64, f64)>
where
    K: Fn(f64) -> (f64, f64, f64),
{
    let mut points = 512usize.max((8 * (n + 1)).next_power_of_two());
    let sample = |phi: f64| {
        let w = f.evaluate(phi);
        let (ka, kb, kc) = kernel(phi);
        (ka * w, kb * w, kc * w)
    };
    let accumulate = |start: usize, stride: usize, count: usize, h: f64| {
        let (mut a, mut b, mut c) =
            (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for j in 0..count {
            let (ia, ib, ic) = sample(-PI + h * (start + j * stride) as f64);
            a.add(ia);
            b.add(ib);
            c.add(ic);
        }
        (a.value(), b.value(), c.value())
    };

    let h = 2.0 * PI / points as f64;
    let (mut sa, mut sb, mut sc) = accumulate(0, 1, points, h);
    let (mut a, mut b, mut c) = (sa * h, sb * h, sc * h);
    loop {
        if points * 2 > SPECTRAL_MAX_POINTS {
            return Err(Error::RefinementLimit { x });
        }
        let h_new = PI / points as f64;
        let (oa, ob, oc) = accumulate(1, 2, points, h_new);
        sa += oa;
        sb += ob;
        sc += oc;
        points *= 2;
        let (a2, b2, c2) = (sa * h_new, sb * h_new, sc * h_new);
        let scale_b = (a2 * c2).abs().sqrt();
        let converged = (a2 - a).abs() <= SPECTRAL_REL_TOL * a2.abs()
            && (c2 - c).abs() <= SPECTRAL_REL_TOL * c2.abs().max(f64::MIN_POSITIVE)
            && (b2 - b).abs() <= SPECTRAL_REL_TOL * scale_b.max(f64::MIN_POSITIVE);
        a = a2;
        b = b2;
        c = c2;
        if converged {
            return Ok((a, b, c));
        }
    }
}

fn require_density(e: &PolynomialEnsemble) -> Result<()> {
    if e.model().admits_density() {
        Ok(())
    } else {
        Err(Error::UnsupportedModel("constant"))
    }
}

/// `A, B, C` by quadrature of the closed-form kernels against `f`.
pub fn moments_spectral(e: &PolynomialEnsemble, f: &SpectralDensity, x: f64) -> Result<MomentTriple> {
    require_density(e)?;
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("spectral path needs |x| < 1, got {x}")));
    }
    let n = e.degree();
    let (a, b, c) = spectral_quadrature(f, n, x, |phi| {
        let (k, dk) = kernels(x, n, phi);
        (k.norm_sqr(), (dk * k.conj()).re, dk.norm_sqr())
    })?;
    Ok(MomentTriple {
        a,
        b,
        c,
        gram: a.mul_add(c, -b * b),
        gram_scale: a * c,
        point: x,
        scale_exponent: 0,
    })
}

/// Scaled moments `Ã, B̃, C̃` at `x = 1/z` by quadrature of the reciprocal
/// kernels against `f`. Only scaled quantities are formed, so this never
/// overflows.
pub fn moments_outer_scaled(e: &PolynomialEnsemble, f: &SpectralDensity, z: f64) -> Result<MomentTriple> {
    require_density(e)?;
    if z == 0.0 {
        return Err(Error::Domain("z = 0 has no reciprocal".into()));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("outer form needs 0 < |z| < 1, got {z}")));
    }
    let n = e.degree();
    let (a, b, c) = spectral_quadrature(f, n, z, |phi| {
        let (k, g) = outer_kernels(z, n, phi);
        (k.norm_sqr(), (k * g).re, g.norm_sqr())
    })?;
    Ok(MomentTriple {
        a,
        b,
        c,
        gram: a.mul_add(c, -b * b),
        gram_scale: a * c,
        point: z,
        scale_exponent: 2 * n as u32,
    })
}

/// `F1` and `F2` of the Kac–Rice formula at the point carried by `m`.
///
/// With `at_reciprocal` the triple must be in scaled form; the result then
/// includes the `1/z²` Jacobian of `x = 1/z`, i.e. it is a density in `z`.
pub fn integrand(e: &PolynomialEnsemble, m: &MomentTriple, at_reciprocal: bool) -> Result<IntegrandValue> {
    if at_reciprocal != m.is_scaled() {
        return Err(Error::Domain(
            "reciprocal flag does not match the moment scaling".into(),
        ));
    }
    let k = e.level();
    let k_abs = k.abs();
    let x_report = if at_reciprocal { 1.0 / m.point } else { m.point };
    if !(m.a > 0.0) || m.c < 0.0 {
        return Err(Error::Degenerate { x: x_report, gram: m.gram });
    }
    if m.gram < -GRAM_EPS * m.gram_scale {
        return Err(Error::Degenerate { x: x_report, gram: m.gram });
    }
    let singular = m.gram <= GRAM_EPS * m.gram_scale;

    // Reduced quantities: in the reciprocal form `gram / z²` is the Gram
    // determinant at z and `lift = |z|^{n-1}` carries the remaining powers.
    let (a, b_abs, c, d, lift, z2) = if at_reciprocal {
        let z = m.point.abs();
        let n = e.degree() as i32;
        let d = (m.gram / (z * z)).max(0.0);
        (m.a, m.b.abs(), m.c, d, z.powi(n - 1), z * z)
    } else {
        (m.a, m.b.abs(), m.c, m.gram.max(0.0), 1.0, 1.0)
    };
    // |z|^{2n-2}; 1 for the inner form.
    let c_lift = lift * lift;

    let exp1 = if singular {
        if k == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (-k * k * c * c_lift / (2.0 * d)).exp()
    };
    let f1 = d.sqrt() / a * exp1 / PI;

    let bk = b_abs * k_abs * lift;
    let f2 = if bk == 0.0 {
        0.0
    } else {
        let a_scale = c_lift * z2;
        let erf_arg = if singular || d == 0.0 {
            f64::INFINITY
        } else {
            bk / (2.0 * a * d).sqrt()
        };
        F2_PREFACTOR * bk / a.powf(1.5) * (-k * k * a_scale / (2.0 * a)).exp() * erf(erf_arg)
    };
    if !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::Degenerate { x: x_report, gram: m.gram });
    }
    Ok(IntegrandValue {
        f1,
        f2,
        regularized: singular,
    })
}

#[inline]
pub(crate) fn erf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else {
        libm::erf(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{covariance_from_density, CovarianceModel};

    fn ensemble(n: usize, model: CovarianceModel, k: f64) -> PolynomialEnsemble {
        PolynomialEnsemble::new(n, model, k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn linear_independent_by_hand() {
        let e = ensemble(1, CovarianceModel::Independent, 0.0);
        let g = CovarianceSequence::independent();
        for x in [-2.0, -0.3, 0.0, 0.8, 3.0] {
            let m = moments_direct(&e, &g, x).unwrap();
            assert!((m.a - (1.0 + x * x)).abs() < 1e-15);
            assert!((m.b - x).abs() < 1e-15);
            assert!((m.c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_with_one_lag_by_hand() {
        let rho = 0.3;
        let e = ensemble(1, CovarianceModel::Independent, 0.0);
        let g = CovarianceSequence::finite(vec![1.0, rho]).unwrap();
        for x in [-1.5, 0.25, 0.9] {
            let m = moments_direct(&e, &g, x).unwrap();
            assert!((m.a - (1.0 + 2.0 * rho * x + x * x)).abs() < 1e-15);
            assert!((m.b - (rho + x)).abs() < 1e-15);
            assert!((m.c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_independent_at_half() {
        let e = ensemble(2, CovarianceModel::Independent, 0.0);
        let m = moments_direct(&e, &CovarianceSequence::independent(), 0.5).unwrap();
        assert_eq!((m.a, m.b, m.c), (1.3125, 0.75, 2.0));
    }

    #[test]
    fn missing_lags_are_reported() {
        let e = ensemble(5, CovarianceModel::Independent, 0.0);
        let g = CovarianceSequence::new(vec![1.0, 0.5, 0.25]).unwrap();
        assert!(matches!(
            moments_direct(&e, &g, 0.5),
            Err(Error::MissingLags { required: 5, available: 2 })
        ));
    }

    #[test]
    fn spectral_flat_density_matches_upper_bound_identity() {
        let e = ensemble(10, CovarianceModel::Independent, 0.0);
        let m = moments_spectral(&e, &SpectralDensity::independent(), 0.5).unwrap();
        let want = (1.0 - 0.5f64.powi(22)) / (1.0 - 0.25);
        assert!(rel(m.a, want) < 1e-13, "{} vs {want}", m.a);
    }

    #[test]
    fn spectral_linear_poisson_kernel() {
        let f = SpectralDensity::geometric(0.5).unwrap();
        let e = ensemble(1, CovarianceModel::Density(f.clone()), 0.0);
        let m = moments_spectral(&e, &f, 0.25).unwrap();
        assert!(rel(m.a, 1.3125) < 1e-12);
        assert!(rel(m.b, 0.75) < 1e-12);
        assert!(rel(m.c, 1.0) < 1e-12);
    }

    #[test]
    fn spectral_agrees_with_direct_at_degree_fifty() {
        let f = SpectralDensity::geometric(0.5).unwrap();
        let e = ensemble(50, CovarianceModel::Density(f.clone()), 0.0);
        let g = covariance_from_density(&f, 50).unwrap();
        let s = moments_spectral(&e, &f, 0.9).unwrap();
        let d = moments_direct(&e, &g, 0.9).unwrap();
        assert!(rel(s.a, d.a) < 1e-8);
        assert!(rel(s.b, d.b) < 1e-8);
        assert!(rel(s.c, d.c) < 1e-8);
    }

    #[test]
    fn spectral_path_rejects_constant_model_and_unit_circle() {
        let e = ensemble(3, CovarianceModel::constant(0.5).unwrap(), 0.0);
        let f = SpectralDensity::independent();
        assert!(matches!(moments_spectral(&e, &f, 0.5), Err(Error::UnsupportedModel(_))));
        let e = ensemble(3, CovarianceModel::Independent, 0.0);
        assert!(moments_spectral(&e, &f, 1.0).is_err());
        assert!(matches!(moments_outer_scaled(&e, &f, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn outer_scaled_linear_independent() {
        let e = ensemble(1, CovarianceModel::Independent, 0.0);
        let f = SpectralDensity::independent();
        let m = moments_outer_scaled(&e, &f, 0.5).unwrap();
        assert!(rel(m.a, 1.25) < 1e-13);
        let (a, b, c) = m.unscaled();
        assert!(rel(a, 5.0) < 1e-13);
        assert!(rel(b, 2.0) < 1e-13);
        assert!(rel(c, 1.0) < 1e-13);
    }

    #[test]
    fn outer_scaled_geometric_sum() {
        let e = ensemble(10, CovarianceModel::Independent, 0.0);
        let f = SpectralDensity::independent();
        let m = moments_outer_scaled(&e, &f, 0.5).unwrap();
        let a_at_two = (4f64.powi(11) - 1.0) / 3.0;
        assert!(rel(m.a, 0.5f64.powi(20) * a_at_two) < 1e-13);
        let direct = DirectMoments::new(10, &CovarianceSequence::independent())
            .unwrap()
            .outer_scaled(0.5)
            .unwrap();
        assert!(rel(direct.a, m.a) < 1e-13);
        assert!(rel(direct.b, m.b) < 1e-12);
        assert!(rel(direct.c, m.c) < 1e-12);
    }

    #[test]
    fn integrand_at_origin_independent() {
        let e = ensemble(5, CovarianceModel::Independent, 0.0);
        let m = moments_direct(&e, &CovarianceSequence::independent(), 0.0).unwrap();
        let v = integrand(&e, &m, false).unwrap();
        assert!((v.f1 - 1.0 / PI).abs() < 1e-16);
        assert_eq!(v.f2, 0.0);

        let e2 = e.with_level(2.0).unwrap();
        let v = integrand(&e2, &m, false).unwrap();
        assert!((v.f1 - (-2.0f64).exp() / PI).abs() < 1e-16);
        assert_eq!(v.f2, 0.0);
    }

    #[test]
    fn integrand_with_one_lag_matches_high_precision_values() {
        // mpmath, 50 digits:
        //   F1 = sqrt(0.75)/pi * exp(-1/1.5)
        //   F2 = 1/sqrt(2 pi) * 0.5 * exp(-0.5) * erf(0.5/sqrt(1.5))
        let e = ensemble(3, CovarianceModel::Independent, 1.0);
        let g = CovarianceSequence::finite(vec![1.0, 0.5]).unwrap();
        let m = moments_direct(&e, &g, 0.0).unwrap();
        assert_eq!((m.a, m.b, m.c), (1.0, 0.5, 1.0));
        let v = integrand(&e, &m, false).unwrap();
        assert!(rel(v.f1, 0.141_530_846_563_438_85) < 1e-14, "{}", v.f1);
        assert!(rel(v.f2, 0.052_785_567_335_995_69) < 1e-14, "{}", v.f2);
    }

    #[test]
    fn level_zero_kills_second_term() {
        let f = SpectralDensity::geometric(0.5).unwrap();
        let e = ensemble(20, CovarianceModel::Density(f.clone()), 0.0);
        let dm = DirectMoments::new(20, &covariance_from_density(&f, 20).unwrap()).unwrap();
        for x in [-0.9, -0.2, 0.4, 0.99] {
            let v = integrand(&e, &dm.at(x).unwrap(), false).unwrap();
            assert_eq!(v.f2, 0.0);
            assert!(v.f1 > 0.0);
        }
    }

    #[test]
    fn removable_singularity_rule() {
        let e0 = ensemble(2, CovarianceModel::Independent, 0.0);
        let e1 = ensemble(2, CovarianceModel::Independent, 1.5);
        let m = MomentTriple {
            a: 2.0,
            b: 2.0,
            c: 2.0,
            gram: 0.0,
            gram_scale: 4.0,
            point: 0.3,
            scale_exponent: 0,
        };
        let v0 = integrand(&e0, &m, false).unwrap();
        assert_eq!(v0.f1, 0.0);
        assert!(v0.regularized);
        let v1 = integrand(&e1, &m, false).unwrap();
        assert_eq!(v1.f1, 0.0);
        assert!(v1.f2 > 0.0 && v1.f2.is_finite());

        let bad = MomentTriple { gram: -1e-3, ..m };
        assert!(matches!(integrand(&e0, &bad, false), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn reciprocal_integrand_matches_change_of_variables() {
        // F(1/z)/z² from unscaled moments at small degree equals the scaled form.
        let f = SpectralDensity::geometric(0.3).unwrap();
        let e = ensemble(6, CovarianceModel::Density(f.clone()), 0.7);
        let dm = DirectMoments::new(6, &covariance_from_density(&f, 6).unwrap()).unwrap();
        for z in [0.2, 0.5, 0.95, -0.4] {
            let outer = integrand(&e, &dm.outer_scaled(z).unwrap(), true).unwrap();
            let inner = integrand(&e, &dm.at(1.0 / z).unwrap(), false).unwrap();
            assert!(rel(outer.f1, inner.f1 / (z * z)) < 1e-10, "z={z}");
            assert!(rel(outer.f2, inner.f2 / (z * z)) < 1e-10, "z={z}");
        }
    }

    #[test]
    fn reciprocal_flag_must_match_scaling() {
        let e = ensemble(2, CovarianceModel::Independent, 0.0);
        let dm = DirectMoments::new(2, &CovarianceSequence::independent()).unwrap();
        assert!(integrand(&e, &dm.at(0.5).unwrap(), true).is_err());
        assert!(integrand(&e, &dm.outer_scaled(0.5).unwrap(), false).is_err());
    }
}
