//! Integration oracles that share no code with the library: adaptive Simpson
//! quadrature and breakpoint-split double integrals.

#![allow(dead_code)]

/// Adaptive Simpson with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol || diff.abs() <= 1e-15 * (left.abs() + right.abs()) {
        return left + right + diff / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson over `[a, b]` split at the given interior breakpoints.
pub fn simpson_split(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| simpson(f, w[0], w[1], tol)).sum()
}

/// `∫_{xa}^{xb} ∫_{max(lo, x-δ)}^{min(hi, x+δ)} g(x, y) dy dx`, splitting the
/// inner integral at `x` and at `breaks`, and the outer at `breaks` and their
/// `±δ` translates.
pub fn horizon_double(
    g: &dyn Fn(f64, f64) -> f64,
    (xa, xb): (f64, f64),
    (lo, hi): (f64, f64),
    delta: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut outer_breaks: Vec<f64> = breaks.to_vec();
    for &b in breaks.iter().chain(&[lo, hi]) {
        outer_breaks.push(b - delta);
        outer_breaks.push(b + delta);
    }
    let inner = |x: f64| {
        let a = lo.max(x - delta);
        let b = hi.min(x + delta);
        let mut cuts = breaks.to_vec();
        cuts.push(x);
        simpson_split(&|y| g(x, y), a, b, &cuts, tol)
    };
    simpson_split(&inner, xa, xb, &outer_breaks, tol)
}

/// Piecewise-linear hat centered at `c` with support `(l, r)`.
pub fn hat(l: f64, c: f64, r: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x <= l || x >= r {
            0.0
        } else if x <= c {
            (x - l) / (c - l)
        } else {
            (r - x) / (r - c)
        }
    }
}
