//! Small dense Hermitian kernels (n ≤ 3) used node-by-node on the torus.

use nalgebra::Matrix3;
use num_complex::Complex64 as C;

pub(crate) const MAXN: usize = 3;
pub(crate) type Mat = [[C; MAXN]; MAXN];

pub(crate) fn zero() -> Mat {
    [[C::new(0.0, 0.0); MAXN]; MAXN]
}

pub(crate) fn from_slice(a: &[C], n: usize) -> Mat {
    let mut m = zero();
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a[i * n + j];
        }
    }
    m
}

pub(crate) fn write_slice(m: &Mat, n: usize, out: &mut [C]) {
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[i][j];
        }
    }
}

/// Lower Cholesky factor with real positive diagonal, `None` if not positive definite.
pub(crate) fn cholesky(g: &Mat, n: usize) -> Option<Mat> {
    let mut l = zero();
    for j in 0..n {
        let mut d = g[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = C::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / djj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub(crate) fn lower_inverse(l: &Mat, n: usize) -> Mat {
    let mut inv = zero();
    for j in 0..n {
        inv[j][j] = C::new(1.0, 0.0) / l[j][j];
        for i in j + 1..n {
            let mut s = C::new(0.0, 0.0);
            for k in j..i {
                s += l[i][k] * inv[k][j];
            }
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

pub(crate) fn mul(a: &Mat, b: &Mat, n: usize) -> Mat {
    let mut c = zero();
    for i in 0..n {
        for j in 0..n {
            let mut s = C::new(0.0, 0.0);
            for k in 0..n {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub(crate) fn adjoint(a: &Mat, n: usize) -> Mat {
    let mut c = zero();
    for i in 0..n {
        for j in 0..n {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn eigenvalues(a: &Mat, n: usize) -> [f64; MAXN] {
    let mut out = [0.0; MAXN];
    match n {
        1 => out[0] = a[0][0].re,
        2 => {
            let (p, q) = (a[0][0].re, a[1][1].re);
            let mean = 0.5 * (p + q);
            let half = 0.5 * (p - q);
            let disc = (half * half + a[0][1].norm_sqr()).sqrt();
            out[0] = mean - disc;
            out[1] = mean + disc;
        }
        3 => {
            let m = Matrix3::from_fn(|i, j| a[i][j]);
            let ev = m.symmetric_eigenvalues();
            let mut v = [ev[0], ev[1], ev[2]];
            v.sort_by(f64::total_cmp);
            out[..3].copy_from_slice(&v);
        }
        _ => unreachable!("torus dimension is at most 3"),
    }
    out
}

pub(crate) fn min_eigenvalue(a: &Mat, n: usize) -> f64 {
    eigenvalues(a, n)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Mat {
        let mut g = zero();
        let vals = [[2.0, 0.3, -0.1], [0.0, 1.5, 0.2], [0.0, 0.0, 1.2]];
        for i in 0..n {
            g[i][i] = C::new(vals[i][i], 0.0);
            for j in i + 1..n {
                g[i][j] = C::new(vals[i][j], 0.1 * (i + j) as f64);
                g[j][i] = g[i][j].conj();
            }
        }
        g
    }

    #[test]
    fn cholesky_and_inverse_reconstruct() {
        for n in 1..=3 {
            let g = sample(n);
            let l = cholesky(&g, n).unwrap();
            let llh = mul(&l, &adjoint(&l, n), n);
            let li = lower_inverse(&l, n);
            let id = mul(&li, &l, n);
            for i in 0..n {
                for j in 0..n {
                    assert!((llh[i][j] - g[i][j]).norm() < 1e-14);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((id[i][j] - C::new(want, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn closed_form_two_by_two_matches_general_solver() {
        let g = sample(2);
        let ev = eigenvalues(&g, 2);
        let m = nalgebra::Matrix2::from_fn(|i, j| g[i][j]);
        let mut want: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        want.sort_by(f64::total_cmp);
        assert!((ev[0] - want[0]).abs() < 1e-14);
        assert!((ev[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn indefinite_rejected() {
        let mut g = sample(2);
        g[1][1] = C::new(-0.5, 0.0);
        assert!(cholesky(&g, 2).is_none());
    }
}
