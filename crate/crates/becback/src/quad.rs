//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands on a
//! finite interval.  Globally adaptive: the interval with the largest
//! error estimate is bisected until the requested tolerance is met.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_3,
    0.000_000_000_000_000_0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_2,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// 7-point Gauss weights; nodes are XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    /// Estimated absolute error of `value`.
    pub abs_error: f64,
    pub evaluations: usize,
}

/// One Kronrod panel: integral estimate with a QUADPACK-style error bound.
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);

    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = WGK[7] * fc.norm();
    let mut samples = [Complex64::default(); 15];
    samples[7] = fc;

    for j in 0..7 {
        let x = XGK[j] * h;
        let f1 = f(c - x);
        let f2 = f(c + x);
        samples[j] = f1;
        samples[14 - j] = f2;
        let sum = f1 + f2;
        resk += WGK[j] * sum;
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg += WG[j / 2] * sum;
        }
    }

    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((samples[j] - mean).norm() + (samples[14 - j] - mean).norm());
    }

    let value = resk * h;
    let mut err = ((resk - resg) * h).norm();
    let resasc = resasc * h.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs * h.abs();
    (value, err.max(round))
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over [a, b] to the requested tolerance.
///
/// Stops when the summed error estimate is below
/// max(abs_tol, rel_tol·|integral|); fails with the achieved estimate if
/// `max_panels` bisections are not enough.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut evaluations = 15;

    loop {
        let total: Complex64 = heap.iter().map(|p| p.value).sum();
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if total_err <= target {
            return Ok(Quadrature {
                value: total,
                abs_error: total_err,
                evaluations,
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        // Bisection can stall at rounding scale; give up on the panel then.
        if mid <= worst.a || mid >= worst.b {
            let mut dead = worst;
            dead.error = 0.0;
            heap.push(dead);
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}
