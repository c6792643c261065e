//! One-dimensional minimization and root bracketing.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Minimizes `f` on `[lo, hi]` by a uniform scan with spacing at most
/// `step`, refined by golden-section search around the best grid node.
/// Exact for convex `f`; for other shapes it finds the basin of the best
/// grid node.
pub fn scan_minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let n = (((hi - lo) / step).ceil() as usize).clamp(2, 20_000);
    let h = (hi - lo) / n as f64;
    let mut best = (0usize, f(lo));
    for k in 1..=n {
        let v = f(lo + k as f64 * h);
        if v < best.1 {
            best = (k, v);
        }
    }
    let a = lo + best.0.saturating_sub(1) as f64 * h;
    let b = lo + (best.0 + 1).min(n) as f64 * h;
    let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
    let refined = golden_section(&f, a, b, tol);
    if refined.1 < best.1 {
        refined
    } else {
        (lo + best.0 as f64 * h, best.1)
    }
}

/// Bisection for a sign change of `g` on `[lo, hi]`, given `g(lo) > 0 >= g(hi)`.
pub fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
