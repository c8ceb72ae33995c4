//! Quantum Fisher information: scalar values from an SLD, closed forms for
//! the quadratic class, and the multiparameter QFI matrix.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::density::{spectral_decompose, DensityMatrix, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::sld::{
    quadratic_coefficient_derivatives, sld_quadratic_class_with, sld_spectral, Method, QuadraticClassCoefficients,
    SldOperator, DEFAULT_ABS_TOL,
};

/// Negative values above this are round-off and clamp to zero.
const CLAMP_TOL: f64 = 1e-12;
/// Closed forms are cross-checked against the spectral route up to this size.
const ORACLE_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QfiDiagnostics {
    /// `Re Tr(ρL)`, which vanishes for a valid SLD.
    pub trace_rho_l: Option<f64>,
    /// Defining-equation residual of the SLD used, if any.
    pub sld_residual: Option<f64>,
    /// `|F − F_spectral|` for closed forms on small dimensions.
    pub oracle_difference: Option<f64>,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub method: Method,
    pub diagnostics: QfiDiagnostics,
}

fn clamp(value: f64) -> (f64, bool) {
    if (-CLAMP_TOL..0.0).contains(&value) {
        (0.0, true)
    } else {
        (value, false)
    }
}

/// `F = Tr(ρL²)`.
pub fn qfi_from_sld(rho: &DensityMatrix, l: &SldOperator) -> QfiResult {
    let rl = rho.matrix() * &l.mat;
    let (value, clamped) = clamp(rl.trace_product(&l.mat).re);
    QfiResult {
        value,
        method: l.method,
        diagnostics: QfiDiagnostics {
            trace_rho_l: Some(rl.trace().re),
            sld_residual: Some(l.residual),
            oracle_difference: None,
            clamped,
        },
    }
}

/// QFI through the spectral SLD; used as the reference value elsewhere.
pub fn qfi_spectral(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    let s = spectral_decompose(rho, DEFAULT_RANK_TOL)?;
    Ok(qfi_from_sld(rho, &sld_spectral(&s, drho, DEFAULT_ABS_TOL)?).value)
}

/// `Tr ρ⁻¹` on the support, `(αM − 1)/β`.
fn trace_inverse(c: &QuadraticClassCoefficients) -> f64 {
    if c.beta > 0.0 {
        (c.alpha * c.support_rank as f64 - 1.0) / c.beta
    } else {
        0.0
    }
}

/// Whether the trace formulas apply. They assume the support identity is
/// the full identity or that `β = 0`; a rank-deficient two-valued state has
/// cross-block contributions the formulas do not capture.
fn trace_formulas_apply(c: &QuadraticClassCoefficients, dim: usize) -> bool {
    c.beta == 0.0 || c.support_rank == dim
}

/// Closed-form QFI with `(∂α, ∂β)` derived from `∂ρ`.
pub fn qfi_quadratic(rho: &DensityMatrix, drho: &ComplexMatrix, c: &QuadraticClassCoefficients) -> Result<QfiResult> {
    let (da, db) = quadratic_coefficient_derivatives(rho.matrix(), drho, c);
    qfi_quadratic_with(rho, drho, c, da, db)
}

/// `F = (1/α²)[2α Tr(∂ρ²) + (∂β)² Tr ρ⁻¹ − M ∂α ∂β]`.
///
/// The cross coefficient follows from `Tr ρ² = α − Mβ` on a unit-trace
/// state. Using `α − β` instead yields `2M−1`, which is off by
/// `(M−1) ∂α ∂β / α²` and only coincides for qubits, where `∂α = 0`.
pub fn qfi_quadratic_with(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    c: &QuadraticClassCoefficients,
    d_alpha: f64,
    d_beta: f64,
) -> Result<QfiResult> {
    let l = sld_quadratic_class_with(rho, drho, c, d_alpha, d_beta)?;
    let n = rho.dim();
    let mut out = if trace_formulas_apply(c, n) {
        let m = c.support_rank as f64;
        let a = c.alpha;
        let raw = (2.0 * a * drho.trace_product(drho).re + d_beta * d_beta * trace_inverse(c) - m * d_alpha * d_beta)
            / (a * a);
        let (value, clamped) = clamp(raw);
        QfiResult {
            value,
            method: Method::ClosedForm,
            diagnostics: QfiDiagnostics {
                trace_rho_l: Some((rho.matrix() * &l.mat).trace().re),
                sld_residual: Some(l.residual),
                oracle_difference: None,
                clamped,
            },
        }
    } else {
        qfi_from_sld(rho, &l)
    };
    if n <= ORACLE_MAX_DIM {
        if let Ok(reference) = qfi_spectral(rho, drho) {
            out.diagnostics.oracle_difference = Some((out.value - reference).abs());
        }
    }
    Ok(out)
}

/// `(1/α²)[(M ∂β)² − M ∂α ∂β]`, a quick lower estimate of the
/// closed-form QFI that needs no matrix products.
pub fn qfi_lower_bound(alpha: f64, d_alpha: f64, d_beta: f64, support_rank: usize) -> f64 {
    let m = support_rank as f64;
    ((m * d_beta).powi(2) - m * d_alpha * d_beta) / (alpha * alpha)
}

/// [`qfi_lower_bound`] using the first attached derivative of `c`.
pub fn qfi_lower_bound_for(c: &QuadraticClassCoefficients) -> Result<f64> {
    match (c.d_alpha.first(), c.d_beta.first()) {
        (Some(&da), Some(&db)) => Ok(qfi_lower_bound(c.alpha, da, db, c.support_rank)),
        _ => Err(Error::InvalidArgument("coefficient derivatives not attached".into())),
    }
}

/// Real symmetric QFI matrix over named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiMatrix {
    pub params: Vec<String>,
    pub mat: Vec<Vec<f64>>,
    /// Per-parameter SLDs (empty for formulas that do not build them).
    pub slds: Vec<SldOperator>,
}

impl QfiMatrix {
    pub fn dim(&self) -> usize {
        self.mat.len()
    }

    pub fn asymmetry(&self) -> f64 {
        let k = self.dim();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((self.mat[i][j] - self.mat[j][i]).abs());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let rows: Vec<Vec<f64>> = self.mat.clone();
        let m = ComplexMatrix::from_real_rows(&rows)?;
        Ok(hermitian_eigen(&m)?.values.last().copied().unwrap_or(0.0))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    pub fn determinant(&self) -> Result<f64> {
        let m = ComplexMatrix::from_real_rows(&self.mat)?;
        Ok(hermitian_eigen(&m)?.values.iter().product())
    }
}

fn symmetric(k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut m = alloc::vec![alloc::vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = f(i, j);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// `F_ij = ½ Tr(ρ{L_i, L_j})`.
pub fn qfi_matrix(rho: &DensityMatrix, params: Vec<String>, slds: Vec<SldOperator>) -> Result<QfiMatrix> {
    if params.len() != slds.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: slds.len(),
        });
    }
    if let Some(bad) = slds.iter().find(|l| l.dim() != rho.dim()) {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: bad.dim(),
        });
    }
    let r = rho.matrix();
    let mat = symmetric(slds.len(), |i, j| {
        0.5 * r.trace_product(&slds[i].mat.anticommutator(&slds[j].mat)).re
    });
    Ok(QfiMatrix { params, mat, slds })
}

/// Class formula
/// `F_ij = (1/α²)[α Tr{∂_iρ, ∂_jρ} + ∂_iβ ∂_jβ Tr ρ⁻¹ − (M/2)(∂_iα ∂_jβ + ∂_jα ∂_iβ)]`.
pub fn qfi_matrix_quadratic(
    rho: &DensityMatrix,
    params: Vec<String>,
    drhos: &[ComplexMatrix],
    c: &QuadraticClassCoefficients,
) -> Result<QfiMatrix> {
    if params.len() != drhos.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: drhos.len(),
        });
    }
    let r = rho.matrix();
    let (da, db): (Vec<f64>, Vec<f64>) = drhos.iter().map(|d| quadratic_coefficient_derivatives(r, d, c)).unzip();
    let slds = drhos
        .iter()
        .zip(da.iter().zip(&db))
        .map(|(d, (&a, &b))| sld_quadratic_class_with(rho, d, c, a, b))
        .collect::<Result<Vec<_>>>()?;
    if !trace_formulas_apply(c, rho.dim()) {
        return qfi_matrix(rho, params, slds);
    }
    let a = c.alpha;
    let m = c.support_rank as f64;
    let tr_inv = trace_inverse(c);
    let mat = symmetric(drhos.len(), |i, j| {
        let anti = 2.0 * drhos[i].trace_product(&drhos[j]).re;
        (a * anti + db[i] * db[j] * tr_inv - 0.5 * m * (da[i] * db[j] + da[j] * db[i])) / (a * a)
    });
    Ok(QfiMatrix { params, mat, slds })
}

/// Qubit form `F_ij = Tr{∂_iρ, ∂_jρ} + ∂_iP ∂_jP / (2(1−P))` for mixed
/// qubits; pure qubits must go through [`qfi_matrix`].
pub fn qfi_matrix_two_level(rho: &DensityMatrix, params: Vec<String>, drhos: &[ComplexMatrix]) -> Result<QfiMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let r = rho.matrix();
    let purity = rho.purity();
    if purity >= 1.0 - 1e-8 {
        return Err(Error::PurityBoundary { purity });
    }
    let dp: Vec<f64> = drhos.iter().map(|d| 2.0 * r.trace_product(d).re).collect();
    let mat = symmetric(drhos.len(), |i, j| {
        2.0 * drhos[i].trace_product(&drhos[j]).re + dp[i] * dp[j] / (2.0 * (1.0 - purity))
    });
    Ok(QfiMatrix {
        params,
        mat,
        slds: Vec::new(),
    })
}
