#![allow(dead_code)]
//! Test-only oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn trim(p: &mut Vec<Q>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db {
        let f = r.last().unwrap().clone() / &lead;
        let shift = r.len() - 1 - db;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

/// `+1`/`-1`/`0` of `p` at `x`, or at `±∞` when `x` is `None`.
fn sign_at(p: &[Q], x: Option<&Q>, plus_infinity: bool) -> i32 {
    let v = match x {
        Some(x) => eval(p, x),
        None => {
            let lead = p.last().unwrap().clone();
            let odd = (p.len() - 1) % 2 == 1;
            if !plus_infinity && odd {
                -lead
            } else {
                lead
            }
        }
    };
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn variations(chain: &[Vec<Q>], x: Option<&Q>, plus_infinity: bool) -> usize {
    let signs: Vec<i32> = chain
        .iter()
        .map(|p| sign_at(p, x, plus_infinity))
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct real roots of `Σ c_i x^i - k` in `[lo, hi)` (`None` = infinite
/// end), by Sturm's theorem in exact arithmetic.
pub fn sturm_count(coeffs: &[i64], k: &Q, lo: Option<&Q>, hi: Option<&Q>) -> usize {
    let mut p: Vec<Q> = coeffs.iter().map(|&c| q(c, 1)).collect();
    p[0] -= k;
    trim(&mut p);
    assert!(!p.is_empty(), "identically zero");
    if p.len() == 1 {
        return 0;
    }
    let dp: Vec<Q> = p.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64, 1)).collect();
    let mut chain = vec![p.clone(), dp];
    loop {
        let n = chain.len();
        let mut r = rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        for c in r.iter_mut() {
            *c = -c.clone();
        }
        chain.push(r);
    }
    // roots in (lo, hi]
    let v_lo = variations(&chain, lo, false);
    let v_hi = variations(&chain, hi, true);
    let mut count = v_lo as i64 - v_hi as i64;
    if let Some(a) = lo {
        if eval(&p, a).is_zero() {
            count += 1;
        }
    }
    if let Some(b) = hi {
        if eval(&p, b).is_zero() {
            count -= 1;
        }
    }
    count as usize
}

/// A random integer polynomial of degree ≤ 6: either free coefficients or
/// a product of small factors (to exercise repeated roots).
pub fn random_integer_polynomial<R: Rng>(rng: &mut R) -> Vec<i64> {
    if rng.random_bool(0.5) {
        let degree = rng.random_range(1..=6);
        (0..=degree).map(|_| rng.random_range(-6..=6)).collect()
    } else {
        let mut p = vec![rng.random_range(1..=3) * if rng.random_bool(0.5) { 1 } else { -1 }];
        let target = rng.random_range(1..=6);
        while p.len() - 1 < target {
            let factor: Vec<i64> = if rng.random_bool(0.7) || p.len() + 1 > target {
                // (a x - b)
                vec![-rng.random_range(-4..=4), rng.random_range(1..=2)]
            } else {
                // x² + b x + c
                vec![rng.random_range(-3..=3), rng.random_range(-3..=3), 1]
            };
            let mut out = vec![0; p.len() + factor.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in factor.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            p = out;
        }
        p
    }
}
