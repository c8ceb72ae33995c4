//! States with `ρ² = αρ − βΠ` on their support: at most two distinct nonzero
//! eigenvalues. Pure states, every qubit and the degenerate families
//! `ρ = Π/N` belong here.
//!
//! Apart from detection, nothing below diagonalizes `ρ`. The support
//! projector and the inverse on the support follow from the quadratic
//! relation itself: `Π = (αρ − ρ²)/β` and `ρ⁻¹ = (αΠ − ρ)/β` when `β > 0`,
//! and `Π = ρ/α` when `β = 0`.

use alloc::vec::Vec;

use super::{check_dims, sld_residual, Method, SldOperator};
use crate::density::{DensityMatrix, Spectrum};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Tolerance on the quadratic relation when a closed form is evaluated.
pub const CLASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticClassCoefficients {
    pub alpha: f64,
    pub beta: f64,
    /// `∂α` per parameter; empty until derivatives are attached.
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
    /// `Tr ρ² = α − Mβ`.
    pub purity: f64,
    /// Roots `p₊ ≥ p₋` of `x² − αx + β`.
    pub eig_pair: (f64, f64),
    /// `M`, the rank of `ρ`.
    pub support_rank: usize,
}

impl QuadraticClassCoefficients {
    /// Attaches `(∂α, ∂β)` for each derivative direction.
    pub fn with_derivatives(mut self, rho: &ComplexMatrix, drhos: &[ComplexMatrix]) -> Self {
        let (da, db) = drhos
            .iter()
            .map(|d| quadratic_coefficient_derivatives(rho, d, &self))
            .unzip();
        self.d_alpha = da;
        self.d_beta = db;
        self
    }
}

/// Recognizes the quadratic class from a spectrum.
///
/// Eigenvalues within `tol` of each other are treated as one value. Two
/// distinct positive values give `α = p₊ + p₋`, `β = p₊p₋`; a single value
/// on a proper subspace gives `α = p`, `β = 0`. The maximally mixed state
/// satisfies the relation for infinitely many pairs and is rejected.
pub fn detect_quadratic_class(s: &Spectrum, tol: f64) -> Option<QuadraticClassCoefficients> {
    let positive = &s.eigenvalues[..s.support_rank];
    let (&p_plus, &p_minus) = (positive.first()?, positive.last()?);
    let mut values: Vec<f64> = Vec::new();
    for &p in positive {
        if values.last().is_none_or(|&q| q - p > tol) {
            values.push(p);
        }
        if values.len() > 2 {
            return None;
        }
    }
    let m = s.support_rank;
    let n = s.dim();
    let (alpha, beta, eig_pair) = match values.len() {
        1 if m == n => return None,
        1 => {
            let p = positive.iter().sum::<f64>() / m as f64;
            (p, 0.0, (p, 0.0))
        }
        _ => (p_plus + p_minus, p_plus * p_minus, (p_plus, p_minus)),
    };
    let rho = s.reconstruct();
    let relation = &(&(&rho * &rho) - &rho.scale(alpha)) + &s.support_projector.scale(beta);
    if relation.max_abs() > 10.0 * tol.max(1e-12) {
        return None;
    }
    let purity = alpha - m as f64 * beta;
    if purity < 1.0 / n as f64 - 1e-9 || purity > 1.0 + 1e-9 {
        return None;
    }
    Some(QuadraticClassCoefficients {
        alpha,
        beta,
        d_alpha: Vec::new(),
        d_beta: Vec::new(),
        purity,
        eig_pair,
        support_rank: m,
    })
}

/// `(∂α, ∂β)` along `∂ρ`, by forward differentiation of the trace-power
/// expressions `β = (P₃t − P₂²)/(M P₂ − t²)` and `α = (P₂ + Mβ)/t` with
/// `t = Tr ρ`, `P_k = Tr ρᵏ`.
pub fn quadratic_coefficient_derivatives(
    rho: &ComplexMatrix,
    drho: &ComplexMatrix,
    c: &QuadraticClassCoefficients,
) -> (f64, f64) {
    let rho2 = rho * rho;
    let t = Dual::new(rho.trace().re, drho.trace().re);
    let p2 = Dual::new(rho2.trace().re, 2.0 * rho.trace_product(drho).re);
    if c.beta == 0.0 {
        return ((p2 / t).deriv, 0.0);
    }
    let p3 = Dual::new(rho2.trace_product(rho).re, 3.0 * rho2.trace_product(drho).re);
    let m = Dual::constant(c.support_rank as f64);
    let beta = (p3 * t - p2 * p2) / (m * p2 - t * t);
    let alpha = (p2 + m * beta) / t;
    (alpha.deriv, beta.deriv)
}

/// `(Π, ρ⁻¹)` from the quadratic relation.
pub fn quadratic_support_inverse(
    rho: &ComplexMatrix,
    c: &QuadraticClassCoefficients,
) -> (ComplexMatrix, ComplexMatrix) {
    if c.beta > 0.0 {
        let pi = (&rho.scale(c.alpha) - &(rho * rho))
            .scale(1.0 / c.beta)
            .hermitian_part();
        let inv = (&pi.scale(c.alpha) - rho).scale(1.0 / c.beta).hermitian_part();
        (pi, inv)
    } else {
        let pi = rho.scale(1.0 / c.alpha);
        let inv = pi.scale(1.0 / c.alpha);
        (pi, inv)
    }
}

fn class_residual(rho: &ComplexMatrix, c: &QuadraticClassCoefficients) -> f64 {
    let rho2 = rho * rho;
    if c.beta > 0.0 {
        (&(&(&rho2 * rho) - &rho2.scale(c.alpha)) + &rho.scale(c.beta)).max_abs()
    } else {
        (&rho2 - &rho.scale(c.alpha)).max_abs()
    }
}

/// Closed-form SLD with `(∂α, ∂β)` obtained from `∂ρ`.
pub fn sld_quadratic_class(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    c: &QuadraticClassCoefficients,
) -> Result<SldOperator> {
    let (da, db) = quadratic_coefficient_derivatives(rho.matrix(), drho, c);
    sld_quadratic_class_with(rho, drho, c, da, db)
}

/// Closed-form SLD with explicit coefficient derivatives.
///
/// On the support, `L = (1/α)[2∂ρ + ∂β·ρ⁻¹ − ∂α]`. The support-kernel blocks
/// are `2(ρ⁻¹∂ρ(1−Π) + (1−Π)∂ρρ⁻¹)`, which coincides with the support
/// formula whenever `β = 0` and is needed when a two-valued state is rank
/// deficient.
pub fn sld_quadratic_class_with(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    c: &QuadraticClassCoefficients,
    d_alpha: f64,
    d_beta: f64,
) -> Result<SldOperator> {
    let r = rho.matrix();
    let n = r.dim();
    check_dims(n, drho)?;
    let residual = class_residual(r, c);
    if residual > CLASS_TOL {
        return Err(Error::ClassViolation {
            residual,
            tol: CLASS_TOL,
        });
    }
    let (pi, inv) = quadratic_support_inverse(r, c);
    let kernel = &ComplexMatrix::identity(n) - &pi;
    let mut inner = drho.scale(2.0);
    inner += &inv.scale(d_beta);
    inner -= &ComplexMatrix::identity(n).scale(d_alpha);
    let mut mat = inner.sandwich(&pi).scale(1.0 / c.alpha);
    if c.support_rank < n {
        let cross = &(&(&inv * drho) * &kernel) + &(&(&kernel * drho) * &inv);
        mat += &cross.scale(2.0);
    }
    let mat = mat.hermitian_part();
    let residual = sld_residual(r, drho, &mat);
    Ok(SldOperator::new(mat, Method::ClosedForm, residual))
}
