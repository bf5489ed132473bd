//! One-dimensional zero location for piecewise-monotone, possibly
//! discontinuous functions.
//!
//! A zero is accepted only when the function value there is within the
//! caller's tolerance. Three sources of candidates are combined:
//!
//! * grid hits, where a scan point already satisfies the tolerance;
//! * sign changes between neighbouring scan points, refined by bisection down
//!   to adjacent floats (a bracket that closes on a jump is reported as such);
//! * strict local minima of `|f|` on the scan, refined by a zooming resample.
//!   This catches zeros the function only touches, e.g. the left end of a
//!   branch that sits just after a jump.

use crate::error::{Error, Result};
use crate::metric::ScalarMap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZeroScan {
    /// Accepted zeros, sorted ascending and de-duplicated.
    pub roots: Vec<f64>,
    /// Sign-change brackets whose refinement did not reach the tolerance.
    pub jumps: Vec<(f64, f64)>,
}

/// Outcome of solving `T(q) = target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preimage {
    Found(f64),
    NotAttained,
    Undecided,
}

const ZOOM_SAMPLES: usize = 17;
const MERGE_TOL: f64 = 1e-12;

/// Locates zeros of `f` over the sorted scan points `xs`.
pub fn locate_zeros<F>(f: F, xs: &[f64], tol: f64) -> Result<ZeroScan>
where
    F: Fn(f64) -> f64,
{
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "scanned function".into(), at: xs[i] });
    }
    let n = xs.len();
    let mut roots = Vec::new();
    let mut jumps = Vec::new();
    let hit = |i: usize| vals[i].abs() <= tol;

    for i in 0..n {
        if hit(i) {
            roots.push(xs[i]);
        }
    }

    // cells whose bracket produced a root; their end points are skipped as
    // local-minimum candidates below
    let mut cell_rooted = vec![false; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        if hit(i) || hit(i + 1) {
            cell_rooted[i] = true;
            continue;
        }
        if vals[i].signum() != vals[i + 1].signum() {
            let (x, fx) = bisect(&f, xs[i], xs[i + 1], vals[i]);
            if fx.abs() <= tol {
                roots.push(x);
                cell_rooted[i] = true;
            } else {
                jumps.push((xs[i], xs[i + 1]));
            }
        }
    }

    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let mut i = 0;
    while i < n {
        // run of equal |f| values [i, j]
        let mut j = i;
        while j + 1 < n && abs[j + 1] == abs[i] {
            j += 1;
        }
        let left_higher = i == 0 || abs[i - 1] > abs[i];
        let right_higher = j + 1 == n || abs[j + 1] > abs[j];
        let near_root = (i > 0 && cell_rooted[i - 1]) || (j + 1 < n && cell_rooted[j]);
        if left_higher && right_higher && !near_root && !hit(i) {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(j + 1).min(n - 1)];
            let (x, fx) = zoom_min_abs(&f, a, b);
            if fx.abs() <= tol {
                roots.push(x);
            }
        }
        i = j + 1;
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= MERGE_TOL);
    Ok(ZeroScan { roots, jumps })
}

/// Bisects a sign-change bracket until its ends are adjacent floats and
/// returns the end with the smaller `|f|`.
pub fn bisect<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut fb = f(b);
    loop {
        let m = a + 0.5 * (b - a);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return (m, fm);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fa.abs() <= fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Minimises `|f|` on `[a, b]` by repeatedly resampling around the best
/// sample. Tolerates plateaus and jumps; the first best sample wins ties.
pub fn zoom_min_abs<F>(f: &F, mut a: f64, mut b: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut best = (a, f(a));
    let consider = |x: f64, best: &mut (f64, f64)| {
        let fx = f(x);
        if fx.abs() < best.1.abs() || (fx.abs() == best.1.abs() && x < best.0) {
            *best = (x, fx);
        }
        fx.abs()
    };
    for _ in 0..200 {
        if b - a <= 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let last = (ZOOM_SAMPLES - 1) as f64;
        let xs: Vec<f64> = (0..ZOOM_SAMPLES)
            .map(|k| if k == ZOOM_SAMPLES - 1 { b } else { a + (b - a) * (k as f64 / last) })
            .collect();
        let mut arg = 0;
        let mut low = f64::INFINITY;
        for (k, &x) in xs.iter().enumerate() {
            let v = consider(x, &mut best);
            if v < low {
                low = v;
                arg = k;
            }
        }
        let na = xs[arg.saturating_sub(1)];
        let nb = xs[(arg + 1).min(ZOOM_SAMPLES - 1)];
        if na == a && nb == b {
            break;
        }
        a = na;
        b = nb;
    }
    // walk the remaining floats one by one
    let mut x = a;
    let mut steps = 0;
    while x <= b && steps < 256 {
        consider(x, &mut best);
        x = x.next_up();
        steps += 1;
    }
    best
}

/// Smallest `q` in the domain of `t` with `|t(q) - target| <= tol`.
///
/// A supplied inverse is tried first and used when it lands inside the domain
/// with an acceptable residual.
pub fn preimage(t: &ScalarMap, target: f64, resolution: usize, tol: f64) -> Result<Preimage> {
    if let Some(inv) = t.inverse() {
        let q = inv(target);
        if q.is_finite() && t.domain().contains(q) && (t.eval(q) - target).abs() <= tol {
            return Ok(Preimage::Found(q));
        }
    }
    let xs = t.domain().linspace(resolution.max(2));
    let scan = locate_zeros(|q| t.eval(q) - target, &xs, tol)?;
    Ok(match scan.roots.first() {
        Some(&q) => Preimage::Found(q),
        None if scan.jumps.is_empty() => Preimage::NotAttained,
        None => Preimage::Undecided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{linspace, Domain};

    #[test]
    fn bisection_reaches_adjacent_floats() {
        let f = |x: f64| x * x - 2.0;
        let (x, _) = bisect(&f, 1.0, 2.0, f(1.0));
        assert!((x - 2f64.sqrt()).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn finds_sign_change_and_grid_hit() {
        let xs = linspace(0.0, 1.0, 11);
        let scan = locate_zeros(|x| (x - 0.5) * (x - 0.33), &xs, 1e-12).unwrap();
        assert_eq!(scan.roots.len(), 2);
        assert!((scan.roots[0] - 0.33).abs() < 1e-12);
        assert_eq!(scan.roots[1], 0.5);
    }

    #[test]
    fn jump_is_not_a_root() {
        let xs = linspace(0.0, 1.0, 10);
        let scan = locate_zeros(|x| if x < 0.37 { -1.0 } else { 1.0 }, &xs, 1e-12).unwrap();
        assert!(scan.roots.is_empty());
        assert_eq!(scan.jumps.len(), 1);
    }

    #[test]
    fn touching_zero_after_jump() {
        // zero only at the left end of the second branch
        let c = 2.0 / 3.0;
        let f = move |x: f64| if x < c { -0.5 } else { 1.0 - 1.5 * x };
        let xs = linspace(0.5, 1.0, 1000);
        let scan = locate_zeros(f, &xs, 1e-12).unwrap();
        assert_eq!(scan.roots.len(), 1);
        assert!((scan.roots[0] - c).abs() < 1e-15);
    }

    #[test]
    fn tangent_zero_of_smooth_function() {
        let xs = linspace(0.0, 1.0, 64);
        let scan = locate_zeros(|x| (x - 0.3).powi(2), &xs, 1e-12).unwrap();
        assert_eq!(scan.roots.len(), 1);
        assert!((scan.roots[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn smallest_preimage_wins() {
        let d = Domain::closed(-1.0, 1.0).unwrap();
        let t = ScalarMap::new("x^2", d, |x| x * x);
        match preimage(&t, 0.25, 1024, 1e-12).unwrap() {
            Preimage::Found(q) => assert!((q + 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(preimage(&t, 2.0, 1024, 1e-12).unwrap(), Preimage::NotAttained);
    }

    #[test]
    fn skipped_value_is_undecided() {
        let d = Domain::closed(0.0, 1.0).unwrap();
        let t = ScalarMap::new("step", d, |x| if x < 0.5 { 0.0 } else { 1.0 });
        assert_eq!(preimage(&t, 0.5, 1024, 1e-12).unwrap(), Preimage::Undecided);
    }

    #[test]
    fn supplied_inverse_is_used() {
        let d = Domain::closed(0.0, 1.0).unwrap();
        let t = ScalarMap::new("x/2", d, |x| x / 2.0).with_inverse(|y| 2.0 * y);
        assert_eq!(preimage(&t, 0.125, 1024, 1e-12).unwrap(), Preimage::Found(0.25));
        // an inverse that leaves the domain falls back to scanning
        let t = ScalarMap::new("x/2", d, |x| x / 2.0).with_inverse(|_| 7.0);
        match preimage(&t, 0.125, 1024, 1e-12).unwrap() {
            Preimage::Found(q) => assert!((q - 0.25).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }
}
