//! Small dense helpers on top of `faer`.

use faer::{Mat, Side};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(a: &Mat<C64>) -> (Vec<f64>, Mat<C64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .expect("hermitian eigensolver failed");
    let s = evd.S();
    let vals = (0..n).map(|i| s[i].re).collect();
    (vals, evd.U().to_owned())
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eigh_real(a: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigensolver failed");
    let s = evd.S();
    let vals = (0..n).map(|i| s[i]).collect();
    (vals, evd.U().to_owned())
}

pub fn hermitian_part(a: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// f(A) for Hermitian A through its eigendecomposition.
pub fn hermitian_function(a: &Mat<C64>, f: impl Fn(f64) -> f64) -> Mat<C64> {
    let (w, u) = eigh(a);
    let n = w.len();
    let fw: Vec<f64> = w.iter().map(|&x| f(x)).collect();
    Mat::from_fn(n, n, |i, j| {
        let mut s = ZERO;
        for k in 0..n {
            s += u[(i, k)] * fw[k] * u[(j, k)].conj();
        }
        s
    })
}

pub fn scale(a: &Mat<C64>, x: C64) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * x)
}

pub fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn adjoint(a: &Mat<C64>) -> Mat<C64> {
    a.adjoint().to_owned()
}

pub fn transpose(a: &Mat<C64>) -> Mat<C64> {
    a.transpose().to_owned()
}

pub fn conj(a: &Mat<C64>) -> Mat<C64> {
    a.conjugate().to_owned()
}

pub fn max_abs(a: &Mat<C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn matvec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == ZERO {
            continue;
        }
        for i in 0..a.nrows() {
            y[i] += a[(i, j)] * xj;
        }
    }
    y
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn column(a: &Mat<C64>, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn set_column(a: &mut Mat<C64>, j: usize, v: &[C64]) {
    for (i, x) in v.iter().enumerate() {
        a[(i, j)] = *x;
    }
}

pub fn from_columns(rows: usize, cols: &[Vec<C64>]) -> Mat<C64> {
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Modified Gram-Schmidt on the columns, in place. Returns the smallest pivot norm.
pub fn gram_schmidt(a: &mut Mat<C64>) -> f64 {
    let (n, m) = (a.nrows(), a.ncols());
    let mut min_pivot = f64::INFINITY;
    for k in 0..m {
        for _pass in 0..2 {
            for q in 0..k {
                let mut s = ZERO;
                for i in 0..n {
                    s += a[(i, q)].conj() * a[(i, k)];
                }
                for i in 0..n {
                    let aq = a[(i, q)];
                    a[(i, k)] -= s * aq;
                }
            }
        }
        let nrm = (0..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        min_pivot = min_pivot.min(nrm);
        for i in 0..n {
            a[(i, k)] /= nrm;
        }
    }
    min_pivot
}

/// Lowest eigenpair of a Hermitian matrix by Lanczos with full reorthogonalisation.
pub fn lanczos_lowest(a: &Mat<C64>, start: &[C64], max_krylov: usize, tol: f64) -> (f64, Vec<C64>) {
    let n = a.nrows();
    let kmax = max_krylov.min(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(kmax);
    let mut v = start.to_vec();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut best;
    loop {
        basis.push(v.clone());
        let mut w = matvec(a, &v);
        let alpha = dot(&v, &w).re;
        alphas.push(alpha);
        for b in &basis {
            let s = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= s * y);
        }
        for b in &basis {
            let s = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= s * y);
        }
        let beta = norm(&w);
        let k = basis.len();
        let t = Mat::from_fn(k, k, |i, j| {
            if i == j {
                c(alphas[i])
            } else if i + 1 == j {
                c(betas[i])
            } else if j + 1 == i {
                c(betas[j])
            } else {
                ZERO
            }
        });
        let (tw, tu) = eigh(&t);
        let resid = beta * tu[(k - 1, 0)].norm();
        let mut x = vec![ZERO; n];
        for (j, b) in basis.iter().enumerate() {
            let coef = tu[(j, 0)];
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += coef * bi);
        }
        best = (tw[0], x);
        if resid < tol || k >= kmax || beta < 1e-300 {
            break;
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
    let nx = norm(&best.1);
    let x = best.1.iter().map(|v| v / nx).collect();
    (best.0, x)
}
