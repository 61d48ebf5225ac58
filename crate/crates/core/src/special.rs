//! Spherical Bessel and Hankel functions of integer order and real argument.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// `j_0..=j_n(z)`. Upward recurrence while the order stays below `z`,
/// Miller's downward recurrence (normalized on `j_0`) otherwise.
pub fn spherical_bessel_j(n: usize, z: f64) -> Vec<f64> {
    let (s, c) = (z.sin(), z.cos());
    let j0 = s / z;
    if n == 0 {
        return vec![j0];
    }
    if (n as f64) < z {
        let mut out = Vec::with_capacity(n + 1);
        out.push(j0);
        out.push(s / (z * z) - c / z);
        for l in 1..n {
            let next = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
            out.push(next);
        }
        return out;
    }
    // start well above both n and z
    let start = n + 16 + (z as usize) + ((n as f64 + z).sqrt() * 4.0) as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for l in (1..=start).rev() {
        vals[l - 1] = (2 * l + 1) as f64 / z * vals[l] - vals[l + 1];
        if vals[l - 1].abs() > 1e250 {
            for v in vals[l - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // normalize against whichever of j_0, j_1 is better conditioned
    let j1 = s / (z * z) - c / z;
    let scale = if j0.abs() >= j1.abs() { j0 / vals[0] } else { j1 / vals[1] };
    vals.truncate(n + 1);
    vals.iter().map(|v| v * scale).collect()
}

/// `y_0..=y_n(z)` by upward recurrence (stable for the second kind).
pub fn spherical_bessel_y(n: usize, z: f64) -> Vec<f64> {
    let (s, c) = (z.sin(), z.cos());
    let mut out = Vec::with_capacity(n + 1);
    out.push(-c / z);
    if n >= 1 {
        out.push(-c / (z * z) - s / z);
    }
    for l in 1..n {
        let next = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
        out.push(next);
    }
    out
}

/// Spherical Hankel function of the second kind, `h_n^{(2)}(z) = j_n(z) − i y_n(z)`.
pub fn spherical_hankel2(n: usize, z: f64) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(Error::invalid("z", "spherical Hankel argument must be positive"));
    }
    let j = spherical_bessel_j(n, z);
    let y = spherical_bessel_y(n, z);
    Ok(Complex64::new(j[n], -y[n]))
}
