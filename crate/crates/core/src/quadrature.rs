//! Adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 2_000;

/// Kronrod estimate and `|K15 - G7|` on one panel.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
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
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integral of `f` over `[a, b]` with absolute error estimate at most `tol`.
///
/// Global adaptive scheme: the panel with the largest Kronrod/Gauss
/// difference is bisected until the summed estimate meets `tol`. Fails when
/// the panel budget runs out, a panel can no longer be split, or `f`
/// produces non-finite values.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fail = || Error::Quadrature { s: b };
    let panel = |lo: f64, hi: f64| {
        let (value, err) = gk15(&f, lo, hi);
        Panel { lo, hi, value, err }
    };
    let first = panel(a, b);
    if !first.value.is_finite() {
        return Err(fail());
    }
    let mut heap = BinaryHeap::from([first]);
    loop {
        let err: f64 = heap.iter().map(|p| p.err).sum();
        let magnitude: f64 = heap.iter().map(|p| p.value.abs()).sum();
        if err <= tol || err <= 50.0 * f64::EPSILON * magnitude {
            return Ok(heap.iter().map(|p| p.value).sum());
        }
        if heap.len() >= MAX_PANELS {
            return Err(fail());
        }
        let worst = heap.pop().ok_or_else(fail)?;
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(fail());
        }
        let (left, right) = (panel(worst.lo, mid), panel(mid, worst.hi));
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(fail());
        }
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|t| 3.0 * t * t, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
        let v = integrate(|t| 2.0 * t, 0.0, 0.5, 1e-12).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|_| 1.0, 0.0, 0.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn kink_and_jump_converge() {
        let v = integrate(|t: f64| (t - 0.3).abs(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
        let v = integrate(|t| if t < 0.7 { 1.0 } else { 3.0 }, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.6).abs() < 1e-9);
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_integrand_fails() {
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, 1e-10),
            Err(Error::Quadrature { .. })
        ));
    }
}
