//! Sign-change root search on (possibly unbounded) intervals.

use crate::error::{Error, Result};

/// Sample points strictly inside `(lo, hi)`, dense near finite ends and near 0
/// and geometric towards infinite ends.
pub fn sample_points(lo: Option<f64>, hi: Option<f64>) -> Vec<f64> {
    let mut pts = Vec::new();
    let geometric = |anchor: f64, dir: f64, reach: f64, out: &mut Vec<f64>| {
        let mut s = 1e-12;
        while s < reach {
            out.push(anchor + dir * s);
            s *= 1.25;
        }
    };
    match (lo, hi) {
        (Some(a), Some(b)) => {
            let len = b - a;
            for i in 1..512 {
                pts.push(a + len * i as f64 / 512.0);
            }
            geometric(a, 1.0, len, &mut pts);
            geometric(b, -1.0, len, &mut pts);
            if a < 0.0 && b > 0.0 {
                geometric(0.0, 1.0, b, &mut pts);
                geometric(0.0, -1.0, -a, &mut pts);
                pts.push(0.0);
            }
        }
        (None, Some(b)) => geometric(b, -1.0, 1e300, &mut pts),
        (Some(a), None) => geometric(a, 1.0, 1e300, &mut pts),
        (None, None) => {
            pts.push(0.0);
            geometric(0.0, 1.0, 1e300, &mut pts);
            geometric(0.0, -1.0, 1e300, &mut pts);
        }
    }
    pts.retain(|x| x.is_finite() && lo.is_none_or(|a| *x > a) && hi.is_none_or(|b| *x < b));
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    pts.dedup();
    pts
}

/// Bisection on a bracket with `f(a)·f(b) < 0`, to `1e-12·max(1, |x|)`.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::CrossingNotBracketed { lo: a, hi: b });
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-12 * m.abs().max(1.0) || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Roots of `f` strictly inside `(lo, hi)` found from sign changes on the
/// sample grid.
pub fn sign_change_roots(f: &dyn Fn(f64) -> f64, lo: Option<f64>, hi: Option<f64>) -> Result<Vec<f64>> {
    let pts = sample_points(lo, hi);
    let vals: Vec<(f64, f64)> = pts.iter().map(|&x| (x, f(x))).filter(|(_, v)| v.is_finite()).collect();
    let mut roots = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for &(x, v) in &vals {
        if v == 0.0 {
            roots.push(x);
            last = None;
            continue;
        }
        if let Some((px, pv)) = last {
            if pv.signum() != v.signum() {
                roots.push(bisect(f, px, x)?);
            }
        }
        last = Some((x, v));
    }
    Ok(roots)
}
