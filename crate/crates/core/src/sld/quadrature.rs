//! `L = 2∫₀^∞ e^{−ρs} ∂ρ e^{−ρs} ds` by adaptive composite Gauss–Legendre.
//!
//! Only matrix exponentials are used, never an eigendecomposition, so this
//! route is independent of the spectral one. Panels grow geometrically with
//! `s` because the integrand decays exponentially.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::{check_dims, sld_residual, Method, SldOperator, SolverOptions};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_min_pivot, matrix_exponential, ComplexMatrix};

const FIRST_PANEL: f64 = 0.25;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

struct Integrator<'a> {
    minus_rho: ComplexMatrix,
    drho: &'a ComplexMatrix,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    max_depth: u32,
}

impl Integrator<'_> {
    fn integrand(&self, t: f64) -> Result<ComplexMatrix> {
        let e = matrix_exponential(&self.minus_rho.scale(t))?;
        Ok(&(&e * self.drho) * &e)
    }

    fn rule(&self, a: f64, b: f64) -> Result<ComplexMatrix> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = ComplexMatrix::zeros(self.drho.dim());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += &self.integrand(mid + half * x)?.scale(w * half);
        }
        Ok(acc)
    }

    /// Bisects until the whole-panel and two-half estimates agree within
    /// `tol`; returns the refined value and the accumulated disagreement.
    fn panel(&self, a: f64, b: f64, whole: ComplexMatrix, tol: f64, depth: u32) -> Result<(ComplexMatrix, f64)> {
        let m = 0.5 * (a + b);
        let left = self.rule(a, m)?;
        let right = self.rule(m, b)?;
        let halves = &left + &right;
        let diff = (&halves - &whole).frobenius();
        if diff <= tol {
            return Ok((halves, diff));
        }
        if depth >= self.max_depth {
            return Err(Error::NoConvergence {
                reason: "quadrature panel refinement budget exhausted",
                last: halves.frobenius(),
                previous: whole.frobenius(),
            });
        }
        let (l, el) = self.panel(a, m, left, 0.5 * tol, depth + 1)?;
        let (r, er) = self.panel(m, b, right, 0.5 * tol, depth + 1)?;
        Ok((&l + &r, el + er))
    }
}

/// Quadrature route; requires a full-rank `ρ` (checked with a Cholesky
/// factorization) and attaches a convergence estimate.
pub fn sld_quadrature(rho: &DensityMatrix, drho: &ComplexMatrix, opts: &SolverOptions) -> Result<SldOperator> {
    let r = rho.matrix();
    let n = r.dim();
    check_dims(n, drho)?;
    match cholesky_min_pivot(r) {
        Some(p) if p > opts.rank_tol => {}
        other => {
            return Err(Error::NotFullRank {
                min_pivot: other.unwrap_or(0.0),
            })
        }
    }
    let dnorm = drho.frobenius();
    if dnorm == 0.0 {
        let mut out = SldOperator::new(ComplexMatrix::zeros(n), Method::Quadrature, 0.0);
        out.error_estimate = Some(0.0);
        return Ok(out);
    }

    let minus_rho = r.scale(-1.0);
    let tail_tol = 0.1 * opts.abs_tol;
    let mut horizon = 1.0;
    let mut previous_tail = f64::INFINITY;
    let mut doublings = 0;
    let tail = loop {
        let e = matrix_exponential(&minus_rho.scale(horizon))?.frobenius();
        let decay = -e.ln() / horizon;
        let tail = if decay > 0.0 {
            e * e * dnorm / decay
        } else {
            f64::INFINITY
        };
        if tail < tail_tol {
            break tail;
        }
        doublings += 1;
        if doublings > opts.quadrature.horizon_doublings_max {
            return Err(Error::NoConvergence {
                reason: "quadrature horizon doubling budget exhausted",
                last: tail,
                previous: previous_tail,
            });
        }
        previous_tail = tail;
        horizon *= 2.0;
    };

    let (nodes, weights) = gauss_legendre(opts.quadrature.gl_points_per_panel);
    let integ = Integrator {
        minus_rho,
        drho,
        nodes,
        weights,
        max_depth: opts.quadrature.panel_doublings_max,
    };
    let panel_budget = 0.45 * opts.abs_tol;
    let mut total = ComplexMatrix::zeros(n);
    let mut disagreement = 0.0;
    let mut a = 0.0;
    while a < horizon {
        let b = (a + FIRST_PANEL.max(0.5 * a)).min(horizon);
        let whole = integ.rule(a, b)?;
        let tol = panel_budget * (b - a) / horizon;
        let (value, err) = integ.panel(a, b, whole, tol, 0)?;
        total += &value;
        disagreement += err;
        a = b;
    }

    let mat = total.scale(2.0).hermitian_part();
    let residual = sld_residual(r, drho, &mat);
    let mut out = SldOperator::new(mat, Method::Quadrature, residual);
    out.error_estimate = Some(2.0 * disagreement + tail);
    Ok(out)
}
