//! `L = 2 Σ_n (−1)ⁿ s^{n+1}/(n+1)! · ρ°ⁿ(∂ρ)`, the Taylor expansion of the
//! truncated integral `2∫₀^s e^{−ρt} ∂ρ e^{−ρt} dt`.
//!
//! The terms grow to roughly `e^{2 s p_max}` before decaying, so the powers
//! `ρ°ⁿ(∂ρ)` and the running sum are kept in double-double arithmetic. With
//! `s·p_max ≤ 25` this leaves about ten correct digits after cancellation.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::dd::{CDd, Dd, DD_EPS};
use super::{check_dims, sld_residual, Method, SldOperator, SolverOptions};
use crate::density::{spectral_decompose, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Largest admitted `s · p_max`.
pub const SERIES_STABILITY_LIMIT: f64 = 25.0;

/// `min(20/p_min, 25/p_max)`.
pub fn default_series_s(p_min: f64, p_max: f64) -> f64 {
    (20.0 / p_min).min(SERIES_STABILITY_LIMIT / p_max)
}

/// Series route. The attached error estimate bounds the Frobenius distance
/// to the exact SLD; it adds the integral truncation
/// `e^{−2 s p_min} ‖∂ρ‖_F / p_min`, the Taylor tail after the last term and
/// the double-double rounding.
pub fn sld_series(rho: &DensityMatrix, drho: &ComplexMatrix, opts: &SolverOptions) -> Result<SldOperator> {
    let n = rho.dim();
    check_dims(n, drho)?;
    let spectrum = spectral_decompose(rho, opts.rank_tol)?;
    let p_max = spectrum.eigenvalues[0];
    let p_min = spectrum.eigenvalues[n - 1];
    if !spectrum.is_full_rank() {
        return Err(Error::NotFullRank { min_pivot: p_min });
    }
    let s = opts.series.s.unwrap_or_else(|| default_series_s(p_min, p_max));
    // The default choice lands exactly on the limit; allow for its rounding.
    if s * p_max > SERIES_STABILITY_LIMIT * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::UnstableRegime {
            s_pmax: s * p_max,
            limit: SERIES_STABILITY_LIMIT,
        });
    }

    let r = rho.matrix().as_slice();
    let mut t: Vec<CDd> = drho.as_slice().iter().map(|&z| CDd::from_c64(z)).collect();
    let mut sum = vec![CDd::ZERO; n * n];
    let mut coef = Dd::from_f64(2.0 * s);
    let mut mass = 0.0;
    let mut last_t_norm = drho.frobenius();
    let mut last_index = 0;
    let peak = 2.0 * s * p_max;
    for k in 0..=opts.series.n_max {
        let t_norm = frobenius(&t);
        for (acc, x) in sum.iter_mut().zip(&t) {
            *acc = *acc + x.scale(coef);
        }
        let term = coef.abs().to_f64() * t_norm;
        mass += term;
        last_t_norm = t_norm;
        last_index = k;
        if (k as f64 > peak && term < opts.abs_tol * 1e-3) || k == opts.series.n_max {
            break;
        }
        t = anticommute(r, &t, n);
        coef = coef.mul_f64(-s).div_f64((k + 2) as f64);
    }

    let next_coef = coef.abs().to_f64() * s / (last_index + 2) as f64;
    let ratio = peak / (last_index + 3) as f64;
    let taylor_tail = if ratio < 1.0 {
        next_coef * 2.0 * p_max * last_t_norm / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    let truncation = (-2.0 * s * p_min).exp() * drho.frobenius() / p_min;

    let mat = ComplexMatrix::new(n, sum.iter().map(|z| z.to_c64()).collect())?.hermitian_part();
    let rounding = 8.0 * DD_EPS * (last_index + 1 + n) as f64 * mass + 4.0 * f64::EPSILON * n as f64 * mat.frobenius();
    let residual = sld_residual(rho.matrix(), drho, &mat);
    let mut out = SldOperator::new(mat, Method::Series, residual);
    out.error_estimate = Some(truncation + taylor_tail + rounding);
    Ok(out)
}

fn frobenius(m: &[CDd]) -> f64 {
    m.iter().map(|z| z.norm_f64().powi(2)).sum::<f64>().sqrt()
}

/// `ρX + Xρ` with `ρ` in ordinary precision and `X` in double-double.
fn anticommute(rho: &[num_complex::Complex64], x: &[CDd], n: usize) -> Vec<CDd> {
    let mut out = vec![CDd::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = CDd::ZERO;
            for k in 0..n {
                acc = acc + x[k * n + j].mul_c64(rho[i * n + k]);
                acc = acc + x[i * n + k].mul_c64(rho[k * n + j]);
            }
            out[i * n + j] = acc;
        }
    }
    out
}
