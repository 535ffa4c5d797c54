//! Small numerical helpers shared across the solver modules.

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Trapezoidal integral of uniformly sampled values.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Linear interpolation on a strictly increasing grid; 0 outside.
pub fn interp_or_zero(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let j = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i,
    };
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    ys[j - 1] * (1.0 - t) + ys[j] * t
}

/// Bisection to a bracket width below `tol`. The bracket must change sign.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    tol: f64,
    max_iter: usize,
) -> Option<f64> {
    if f_lo == 0.0 {
        return Some(lo);
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() < tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_lo > 0.0) == (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Central-difference derivative of uniformly sampled values; one-sided at
/// the ends.
pub fn gradient(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    out[0] = (values[1] - values[0]) / dx;
    out[n - 1] = (values[n - 1] - values[n - 2]) / dx;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    out
}

/// Location of the first sign change of `ys` over `xs`, linearly
/// interpolated; None when the samples never change sign.
pub fn zero_crossing(xs: &[f64], ys: &[f64]) -> Option<f64> {
    for i in 1..ys.len() {
        if ys[i - 1] == 0.0 {
            return Some(xs[i - 1]);
        }
        if (ys[i - 1] > 0.0) != (ys[i] > 0.0) {
            let t = ys[i - 1] / (ys[i - 1] - ys[i]);
            return Some(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    if *ys.last()? == 0.0 {
        return Some(*xs.last()?);
    }
    None
}
