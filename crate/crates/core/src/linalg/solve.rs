//! Dense linear solves: LU with partial pivoting, Householder QR with column
//! pivoting (for minimum-norm solutions of singular systems), and a Cholesky
//! pivot probe used as an eigen-free full-rank test.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{c64, ComplexMatrix};
use crate::error::{Error, Result};

/// Solves `a · x = b` for a square matrix right-hand side.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    assert_eq!(n, b.dim());
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = a.max_abs();
    for k in 0..n {
        let (piv, mag) =
            (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= f64::EPSILON * 1e-3 * scale || mag == 0.0 {
            return Err(Error::Singular);
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            perm.swap(k, piv);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
        }
    }

    let mut x = ComplexMatrix::zeros(n);
    for col in 0..n {
        let mut y: Vec<Complex64> = perm.iter().map(|&p| b[(p, col)]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = lu[(i, j)] * y[j];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[(i, j)] * y[j];
                y[i] -= t;
            }
            y[i] /= lu[(i, i)];
        }
        for i in 0..n {
            x[(i, col)] = y[i];
        }
    }
    Ok(x)
}

/// Rectangular row-major scratch matrix for the QR routines.
#[derive(Clone)]
struct Rect {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Rect {
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

struct Householder {
    /// Reflector `I - beta v v†` acting on rows `k..`.
    v: Vec<Complex64>,
    beta: f64,
}

impl Householder {
    fn apply(&self, k: usize, x: &mut [Complex64]) {
        let dot: Complex64 = self.v.iter().zip(&x[k..]).map(|(vi, xi)| vi.conj() * xi).sum();
        let f = dot * self.beta;
        for (vi, xi) in self.v.iter().zip(&mut x[k..]) {
            *xi -= vi * f;
        }
    }
}

struct Qr {
    r: Rect,
    reflectors: Vec<Householder>,
    perm: Vec<usize>,
    rank: usize,
}

impl Qr {
    /// `x ← Q† x`
    fn apply_qh(&self, x: &mut [Complex64]) {
        for (k, h) in self.reflectors.iter().enumerate() {
            h.apply(k, x);
        }
    }
    /// `x ← Q x`
    fn apply_q(&self, x: &mut [Complex64]) {
        for (k, h) in self.reflectors.iter().enumerate().rev() {
            h.apply(k, x);
        }
    }
}

fn householder_qr(mut a: Rect, pivot: bool, abs_tol: f64) -> Qr {
    let (m, n) = (a.rows, a.cols);
    let steps = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors = Vec::with_capacity(steps);
    let mut rank = steps;

    for k in 0..steps {
        if pivot {
            let (best, _) = (k..n)
                .map(|j| (j, (k..m).map(|i| a.at(i, j).norm_sqr()).sum::<f64>()))
                .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if best != k {
                for i in 0..m {
                    a.data.swap(i * n + k, i * n + best);
                }
                perm.swap(k, best);
            }
        }
        let norm = (k..m).map(|i| a.at(i, k).norm_sqr()).sum::<f64>().sqrt();
        if pivot && norm <= abs_tol {
            rank = k;
            break;
        }
        let x0 = a.at(k, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c64(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| a.at(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        let h = Householder { v, beta };
        let mut col = vec![c64(0.0, 0.0); m];
        for j in k..n {
            for i in 0..m {
                col[i] = a.at(i, j);
            }
            h.apply(k, &mut col);
            for i in k..m {
                *a.at_mut(i, j) = col[i];
            }
        }
        reflectors.push(h);
    }
    Qr {
        r: a,
        reflectors,
        perm,
        rank,
    }
}

/// Minimum-norm least-squares solution of a square system.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: Vec<Complex64>,
    /// Numerical rank found by the pivoted QR.
    pub rank: usize,
}

/// Solves `a x = b` in the minimum-norm least-squares sense through a
/// complete orthogonal decomposition: pivoted QR of `a`, then a QR of the
/// transposed leading rows. Pivots with column norm below `abs_tol` are
/// treated as exact zeros.
pub fn min_norm_solve(a: &ComplexMatrix, b: &[Complex64], abs_tol: f64) -> MinNormSolution {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let rect = Rect {
        rows: n,
        cols: n,
        data: a.as_slice().to_vec(),
    };
    let qr = householder_qr(rect, true, abs_tol);
    let r = qr.rank;
    if r == 0 {
        return MinNormSolution {
            x: vec![c64(0.0, 0.0); n],
            rank: 0,
        };
    }
    let mut c = b.to_vec();
    qr.apply_qh(&mut c);

    // T = R[0..r, :] (r × n, full row rank); factor T† = Q2 R2.
    let mut tt = Rect {
        rows: n,
        cols: r,
        data: vec![c64(0.0, 0.0); n * r],
    };
    for i in 0..r {
        for j in i..n {
            *tt.at_mut(j, i) = qr.r.at(i, j).conj();
        }
    }
    let qr2 = householder_qr(tt, false, 0.0);

    // R2† z = c[0..r] (lower triangular forward substitution).
    let mut z = vec![c64(0.0, 0.0); n];
    for i in 0..r {
        let mut acc = c[i];
        for j in 0..i {
            acc -= qr2.r.at(j, i).conj() * z[j];
        }
        z[i] = acc / qr2.r.at(i, i).conj();
    }
    qr2.apply_q(&mut z);

    let mut x = vec![c64(0.0, 0.0); n];
    for (j, &p) in qr.perm.iter().enumerate() {
        x[p] = z[j];
    }
    MinNormSolution { x, rank: r }
}

/// Smallest Cholesky pivot `L_kk²` of a Hermitian matrix, or `None` when the
/// factorization breaks down (matrix not positive definite).
pub fn cholesky_min_pivot(a: &ComplexMatrix) -> Option<f64> {
    let n = a.dim();
    let mut l = ComplexMatrix::zeros(n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        min_pivot = min_pivot.min(d);
        let ljj = d.sqrt();
        l[(j, j)] = c64(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(min_pivot)
}
