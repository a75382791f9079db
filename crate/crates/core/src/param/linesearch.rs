//! One-dimensional minimization: bracket the minimum, then Brent's
//! parabolic-interpolation search inside the bracket.

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;
pub(crate) const MAX_ITERATIONS: usize = 50;

/// Minimizes `f` over the open interval `(lo, hi)` containing 0, starting from
/// `f(0) = f0` with trial step `step`. Returns the best `(x, f(x))` seen.
pub(crate) fn minimize(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    step: f64,
    f0: f64,
    tol: f64,
) -> (f64, f64) {
    debug_assert!(lo < 0.0 && hi > 0.0);
    let Some((a, b, c, fb)) = bracket(f, lo, hi, step, f0) else {
        return (0.0, f0);
    };
    if (c - a).abs() <= 2.0 * tol {
        return (b, fb);
    }
    brent(f, a.min(c), b, a.max(c), fb, tol)
}

/// Finds `a, b, c` with `f(b) <= f(a), f(c)`, expanding downhill by the golden
/// ratio but never reaching the interval ends. `None` when the walk hits an
/// end while still descending and that end point is not an improvement.
fn bracket(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    step: f64,
    f0: f64,
) -> Option<(f64, f64, f64, f64)> {
    let lim_hi = 0.999 * hi;
    let lim_lo = 0.999 * lo;
    let fwd = step.min(0.5 * hi);
    let back = (-step).max(0.5 * lo);
    let f_fwd = f(fwd);
    let (dir_lim, mut b, mut fb) = if f_fwd < f0 {
        (lim_hi, fwd, f_fwd)
    } else {
        let f_back = f(back);
        if f_back < f0 {
            (lim_lo, back, f_back)
        } else {
            return Some((back, 0.0, fwd, f0));
        }
    };
    let mut a = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let mut c = b + GOLD * (b - a);
        let at_limit = if dir_lim > 0.0 { c >= dir_lim } else { c <= dir_lim };
        if at_limit {
            c = dir_lim;
        }
        let fc = f(c);
        if fc >= fb {
            return Some((a, b, c, fb));
        }
        if at_limit {
            // Still descending at the edge of the feasible arc.
            return Some((b, c, c, fc));
        }
        a = b;
        b = c;
        fb = fc;
    }
    Some((a, b, b, fb))
}

/// Brent's method on `[a, c]` with interior point `x` where `f(x) = fx`.
fn brent(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    x: f64,
    c: f64,
    fx: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut a, mut b) = (a, c);
    let (mut x, mut w, mut v) = (x, x, x);
    let (mut fx, mut fw, mut fv) = (fx, fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let xm = 0.5 * (a + b);
        let tol1 = tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.is_finite() && p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, w, x) = (w, x, u);
            (fv, fw, fx) = (fw, fx, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, w) = (w, u);
                (fv, fw) = (fw, fu);
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
