//! Globally adaptive Gauss-Kronrod (7/15) integration on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below the absolute tolerance or the subdivision budget is
//! spent.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the Gauss-7 nodes.
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
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
        self.error.total_cmp(&other.error).is_eq()
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

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
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

/// Integrates `f` over `[a, b]` to an absolute error estimate of `abs_tol`.
///
/// `max_subdivisions` caps the number of subintervals held at once.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    integrate_partitioned(f, &[a, b], abs_tol, max_subdivisions)
}

/// Same as [`integrate`] but starts from the given breakpoints, which must be
/// strictly increasing.
pub fn integrate_partitioned<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if !(abs_tol > 0.0) {
        return Err(Error::invalid("abs_tol", "must be > 0"));
    }
    if max_subdivisions == 0 {
        return Err(Error::invalid("max_subdivisions", "must be >= 1"));
    }
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(
            "breakpoints",
            "need at least two increasing finite points",
        ));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("breakpoints", "interval must be finite"));
    }

    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();

    loop {
        let total_error: f64 = heap.iter().map(|s| s.error).sum();
        if total_error <= abs_tol {
            break;
        }
        if heap.len() >= max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions: heap.len(),
                error_estimate: total_error,
                target: abs_tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval collapsed to adjacent floats; no further refinement possible
            return Err(Error::NonConvergence {
                subdivisions: heap.len() + 1,
                error_estimate: total_error,
                target: abs_tol,
            });
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }

    let mut segments = heap.into_vec();
    segments.sort_by(|l, r| l.a.total_cmp(&r.a));
    Ok(QuadResult {
        value: segments.iter().map(|s| s.value).sum(),
        abs_error: segments.iter().map(|s| s.error).sum(),
        subdivisions: segments.len(),
    })
}
