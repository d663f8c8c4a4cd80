//! Adaptive 7/15-point Gauss–Kronrod integration of a two-component,
//! fallible integrand.

// node and weight tables are kept digit-for-digit as published
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], 0`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Pair(pub f64, pub f64);

impl Pair {
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
    fn scale(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub value: Pair,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: Pair,
    err: f64,
    // insertion order breaks error ties deterministically
    id: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn rule<F, E>(f: &mut F, a: f64, b: f64) -> Result<(Pair, f64), E>
where
    F: FnMut(f64) -> Result<Pair, E>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let f1 = f(center - half * x)?;
        let f2 = f(center + half * x)?;
        let s = f1.add(f2);
        kronrod = kronrod.add(s.scale(w));
        if j % 2 == 1 {
            gauss = gauss.add(s.scale(WG[j / 2]));
        }
    }
    let k = kronrod.scale(half);
    let g = gauss.scale(half);
    let err = (k.0 - g.0).abs() + (k.1 - g.1).abs();
    Ok((k, err))
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate
/// is at most `tol` (or the segment budget runs out).
pub(crate) fn integrate<F, E>(mut f: F, a: f64, b: f64, tol: f64, max_segments: usize) -> Result<Outcome, E>
where
    F: FnMut(f64) -> Result<Pair, E>,
{
    let mut evaluations = 15;
    let (value, err) = rule(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err, id: 0 });
    let mut next_id = 1;
    let mut total_err = err;
    let mut converged = total_err <= tol;
    while !converged && heap.len() < max_segments {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // cannot split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = rule(&mut f, worst.a, mid)?;
        let (v2, e2) = rule(&mut f, mid, worst.b)?;
        evaluations += 30;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1, id: next_id });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2, id: next_id + 1 });
        next_id += 2;
        if total_err <= tol {
            // recompute from scratch to shed accumulated round-off
            total_err = heap.iter().map(|s| s.err).sum();
            converged = total_err <= tol;
        }
    }
    // fixed summation order: by position along the interval
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = Pair::default();
    let mut abs_err = 0.0;
    for s in &segments {
        value = value.add(s.value);
        abs_err += s.err;
    }
    Ok(Outcome {
        value,
        abs_err,
        evaluations,
        converged: converged || abs_err <= tol,
    })
}
