//! Small numerical building blocks: compensated summation and adaptive
//! Gauss–Kronrod quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

// 15-point Kronrod abscissae (non-negative half); odd indices are the
// embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]`.
///
/// Bisects the segment with the largest error estimate until the total
/// error is below `max(abs_tol, rel_tol · |I|)`. Endpoints are never
/// evaluated, so integrable endpoint singularities are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    const MAX_SEGMENTS: usize = 4000;
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                achieved: error,
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            // re-sum to shed drift from incremental updates
            let value = compensated_sum(heap.iter().map(|s| s.value));
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                estimate: value,
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}
