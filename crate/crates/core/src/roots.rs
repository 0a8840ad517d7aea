//! Scalar root bracketing and bisection.

/// Bisects `f` on `[a, b]` where `f(a)` and `f(b)` differ in sign, until the
/// bracket is narrower than `tol` or stops shrinking. Returns the endpoint
/// with the smaller residual.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return None;
    }
    let mut fb = fb;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol || mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Some(if fa.abs() <= fb.abs() { a } else { b })
}

/// All sign-change roots of `f` on `[lo, hi]` found from `samples` uniform
/// samples, each refined by bisection to `tol`. Roots closer than one
/// sample spacing are merged.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize, tol: f64) -> Vec<f64> {
    let samples = samples.max(2);
    let step = (hi - lo) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|i| lo + step * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..samples - 1 {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if !y0.is_finite() || !y1.is_finite() {
            continue;
        }
        let root = if y0 == 0.0 {
            Some(xs[i])
        } else if y1 == 0.0 {
            Some(xs[i + 1])
        } else if y0.signum() != y1.signum() {
            bisect(&f, xs[i], xs[i + 1], tol)
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().map_or(true, |&prev| (r - prev).abs() > step) {
                roots.push(r);
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisects_a_simple_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn scan_finds_every_root_once() {
        let roots = scan_roots(|x: f64| x.sin(), 0.5, 10.0, 2000, 1e-13);
        assert_eq!(roots.len(), 3);
        for (r, k) in roots.iter().zip(1..) {
            assert!((r - std::f64::consts::PI * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_zero_on_a_sample_is_reported_once() {
        let roots = scan_roots(|x| x - 1.0, 0.0, 2.0, 3, 1e-12);
        assert_eq!(roots, vec![1.0]);
    }
}
