//! Composite Newton-Cotes quadrature on uniform grids.
//!
//! Everything here works on sampled values so the same routines serve real
//! and complex integrands. Grids with an even number of intervals use plain
//! composite Simpson; an odd count closes with a Simpson 3/8 panel.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub trait Sample: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Sample for T where T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Integral of uniformly spaced samples `values` with spacing `h`.
pub fn simpson<T: Sample>(values: &[T], h: f64) -> T {
    let n = values.len();
    match n {
        0 | 1 => T::default(),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => simpson_even(values, h),
        _ if n % 2 == 1 => simpson_even(values, h),
        _ => {
            // odd interval count: Simpson on all but the last three intervals
            let split = n - 4;
            let head = if split >= 2 {
                simpson_even(&values[..=split], h)
            } else {
                T::default()
            };
            head + three_eighths(&values[split..], h)
        }
    }
}

fn simpson_even<T: Sample>(values: &[T], h: f64) -> T {
    debug_assert!(values.len() % 2 == 1);
    let last = values.len() - 1;
    let mut acc = values[0] + values[last];
    for (k, v) in values.iter().enumerate().take(last).skip(1) {
        acc = acc + *v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

fn three_eighths<T: Sample>(v: &[T], h: f64) -> T {
    (v[0] + v[1] * 3.0 + v[2] * 3.0 + v[3]) * (3.0 * h / 8.0)
}

/// Running integral `F[k] = int_{t_0}^{t_k}`; `F[0] = 0`.
///
/// Even nodes carry the composite Simpson value; odd nodes add the
/// quadratic-interpolant integral over the half panel, so every entry is
/// accurate to third order in `h` or better.
pub fn cumulative_simpson<T: Sample>(values: &[T], h: f64) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::default(); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = (values[0] + values[1]) * (0.5 * h);
        return out;
    }
    let mut k = 0;
    while k + 2 < n {
        let (f0, f1, f2) = (values[k], values[k + 1], values[k + 2]);
        out[k + 1] = out[k] + (f0 * 5.0 + f1 * 8.0 - f2) * (h / 12.0);
        out[k + 2] = out[k] + (f0 + f1 * 4.0 + f2) * (h / 3.0);
        k += 2;
    }
    if k + 1 < n {
        // one trailing interval: quadratic through the last three nodes
        let (f0, f1, f2) = (values[k - 1], values[k], values[k + 1]);
        out[k + 1] = out[k] + (f2 * 5.0 + f1 * 8.0 - f0) * (h / 12.0);
    }
    out
}

/// Integral of `f` over `[a, b]` with `n` uniform intervals.
pub fn simpson_fn<T: Sample>(f: impl Fn(f64) -> T, a: f64, b: f64, n: usize) -> T {
    let n = n.max(2);
    let h = (b - a) / n as f64;
    let values: Vec<T> = (0..=n).map(|k| f(node(a, b, k, n))).collect();
    simpson(&values, h)
}

/// Node `k` of an `n`-interval uniform grid on `[a, b]`, hitting `b` exactly.
pub fn node(a: f64, b: f64, k: usize, n: usize) -> f64 {
    if k == n {
        b
    } else {
        a + (b - a) * (k as f64 / n as f64)
    }
}

/// Cauchy principal value of `f` over `[a, b]` with a simple pole at `pole`.
///
/// The interval is split into a window symmetric about the pole, where the
/// paired integrand `f(p + s) + f(p - s)` stays finite, and the two outer
/// pieces. The result is recomputed at doubled resolution; disagreement
/// beyond `rel_tol` is reported as non-convergence.
pub fn principal_value(f: impl Fn(f64) -> f64, a: f64, b: f64, pole: f64, n: usize, rel_tol: f64) -> Result<f64> {
    if !(a < pole && pole < b) {
        return Err(Error::PrincipalValue(format!("pole {pole} not inside ({a}, {b})")));
    }
    let coarse = pv_once(&f, a, b, pole, n);
    let fine = pv_once(&f, a, b, pole, 2 * n);
    let scale = fine.abs().max(coarse.abs()).max(b - a);
    if !coarse.is_finite() || !fine.is_finite() || (fine - coarse).abs() > rel_tol * scale {
        return Err(Error::PrincipalValue(format!(
            "estimates {coarse:.6e} and {fine:.6e} at pole t = {pole}"
        )));
    }
    Ok(fine)
}

fn pv_once(f: &impl Fn(f64) -> f64, a: f64, b: f64, pole: f64, n: usize) -> f64 {
    let w = 0.5 * (pole - a).min(b - pole);
    let outer = n.max(4);
    let left = simpson_fn(f, a, pole - w, outer);
    let right = simpson_fn(f, pole + w, b, outer);
    let m = outer;
    let h = w / m as f64;
    let paired = |s: f64| f(pole + s) + f(pole - s);
    let mut g: Vec<f64> = (0..=m)
        .map(|k| if k == 0 { 0.0 } else { paired(k as f64 * h) })
        .collect();
    // the paired integrand is even-smooth at s = 0; extrapolate the origin
    g[0] = 3.0 * g[1] - 3.0 * g[2] + g[3];
    left + right + simpson(&g, h)
}
