//! Small dense Hermitian solvers for the pressure-matching normal equations.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

/// Solves `A x = b` for Hermitian positive definite `A` (row-major `n × n`).
/// Returns `None` if a pivot is not positive.
pub fn cholesky_solve(a: &[Complex64], b: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = (0..n).map(|i| a[i * n + i].re.abs()).fold(0.0, f64::max);
    // lower factor L with A = L Lᴴ
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 1e-14 * scale) {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[k * n + i].conj() * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Eigen-decomposition of a real symmetric matrix (row-major) by cyclic
/// Jacobi rotations. Returns eigenvalues and column eigenvectors.
pub fn symmetric_eigen(m: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Minimum-norm least-squares solution of `A x = b` for Hermitian `A`, through
/// the real embedding `[[Re A, −Im A], [Im A, Re A]]`. Eigenvalues below
/// `rtol · max|λ|` are dropped. Returns the solution and the complex rank.
pub fn hermitian_pinv_solve(a: &[Complex64], b: &[Complex64], n: usize, rtol: f64) -> (Vec<Complex64>, usize) {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let m = 2 * n;
    let mut r = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            r[i * m + j] = z.re;
            r[i * m + n + j] = -z.im;
            r[(n + i) * m + j] = z.im;
            r[(n + i) * m + n + j] = z.re;
        }
    }
    let rhs: Vec<f64> = b.iter().map(|z| z.re).chain(b.iter().map(|z| z.im)).collect();
    let (vals, vecs) = symmetric_eigen(&r, m);
    let top = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut x = vec![0.0; m];
    let mut kept = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if top == 0.0 || lam.abs() <= rtol * top {
            continue;
        }
        kept += 1;
        let proj: f64 = (0..m).map(|i| vecs[i * m + k] * rhs[i]).sum();
        for i in 0..m {
            x[i] += vecs[i * m + k] * proj / lam;
        }
    }
    ((0..n).map(|i| Complex64::new(x[i], x[n + i])).collect(), kept / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matvec(a: &[Complex64], x: &[Complex64], n: usize) -> Vec<Complex64> {
        (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
    }

    #[test]
    fn cholesky_recovers_solution() {
        let a = [c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)];
        let x = [c(1.0, -2.0), c(0.5, 0.25)];
        let b = matvec(&a, &x, 2);
        let got = cholesky_solve(&a, &b, 2).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
        let (p, rank) = hermitian_pinv_solve(&a, &b, 2, 1e-12);
        assert_eq!(rank, 2);
        for (g, e) in p.iter().zip(&x) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_falls_back_to_min_norm() {
        // rank one: A = u uᴴ with u = (1, i)
        let a = [c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)];
        assert!(cholesky_solve(&a, &[c(1.0, 0.0), c(0.0, 1.0)], 2).is_none());
        let (x, rank) = hermitian_pinv_solve(&a, &[c(1.0, 0.0), c(0.0, 1.0)], 2, 1e-10);
        assert_eq!(rank, 1);
        // min-norm solution is u/2
        assert!((x[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((x[1] - c(0.0, 0.5)).norm() < 1e-12);
    }
}
