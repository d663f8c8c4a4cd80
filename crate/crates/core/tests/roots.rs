mod common;

use common::{q, random_integer_polynomial, sturm_count, Q};
use level_crossings::montecarlo::{count_level_crossings, real_level_roots, RootMethod};
use level_crossings::quadrature::IntervalSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn quarter_or_infinite<R: Rng>(rng: &mut R, infinite: f64) -> (Option<Q>, f64) {
    if rng.random_bool(0.2) {
        (None, infinite)
    } else {
        let k = rng.random_range(-16..=16);
        (Some(q(k, 4)), k as f64 / 4.0)
    }
}

#[test]
fn companion_counts_match_exact_sturm_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 1000 {
        let p = random_integer_polynomial(&mut rng);
        let kn = rng.random_range(-8..=8);
        let (k_exact, k) = (q(kn, 2), kn as f64 / 2.0);
        let shifted_zero = p.iter().skip(1).all(|&c| c == 0) && p[0] as f64 == k;
        if shifted_zero {
            continue;
        }
        let (mut lo, mut lo_f) = quarter_or_infinite(&mut rng, f64::NEG_INFINITY);
        let (mut hi, mut hi_f) = quarter_or_infinite(&mut rng, f64::INFINITY);
        if lo_f > hi_f {
            std::mem::swap(&mut lo, &mut hi);
            std::mem::swap(&mut lo_f, &mut hi_f);
            // a swapped infinite end keeps its sign
            if lo.is_none() {
                lo_f = f64::NEG_INFINITY;
            }
            if hi.is_none() {
                hi_f = f64::INFINITY;
            }
        }
        if lo_f >= hi_f {
            continue;
        }
        let coeffs: Vec<f64> = p.iter().map(|&c| c as f64).collect();
        let spec = IntervalSpec::new(lo_f, hi_f).unwrap();
        let want = sturm_count(&p, &k_exact, lo.as_ref(), hi.as_ref());
        let got = count_level_crossings(&coeffs, k, &spec).unwrap();
        assert_eq!(got, want, "p = {p:?}, K = {k}, [{lo_f}, {hi_f})");
        checked += 1;
    }
}

#[test]
fn subdivision_matches_companion_on_gaussian_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for degree in [5usize, 20, 64, 128] {
        for _ in 0..100 {
            let c: Vec<f64> = (0..=degree).map(|_| StandardNormal.sample(&mut rng)).collect();
            let k = 2.0 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            let a = real_level_roots(&c, k, RootMethod::Companion).unwrap();
            let b = real_level_roots(&c, k, RootMethod::Subdivision).unwrap();
            for spec in [IntervalSpec::real_line(), IntervalSpec::unit(), "1..inf".parse().unwrap(), "-0.3..0.7".parse().unwrap()] {
                assert_eq!(a.count_in(&spec), b.count_in(&spec), "degree {degree}, {spec}");
            }
            for (x, y) in a.roots().iter().zip(b.roots()) {
                assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn half_open_convention_is_additive() {
    // x³ - x: roots -1, 0, 1
    let c = [0.0, -1.0, 0.0, 1.0];
    let whole = count_level_crossings(&c, 0.0, &"-1..2".parse().unwrap()).unwrap();
    let left = count_level_crossings(&c, 0.0, &"-1..0".parse().unwrap()).unwrap();
    let right = count_level_crossings(&c, 0.0, &"0..2".parse().unwrap()).unwrap();
    assert_eq!((whole, left, right), (3, 1, 2));
}
