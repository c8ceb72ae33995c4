//! Symmetric logarithmic derivative solvers.
//!
//! All routes solve `∂ρ = (ρL + Lρ)/2` and return `L` with the kernel-kernel
//! block set to zero. That block is not determined by the equation, so routes
//! are compared with [`compare_slds`], which ignores it.

mod dd;
mod quadratic;
mod quadrature;
mod series;

use alloc::vec::Vec;

use crate::density::{DensityMatrix, Spectrum, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c64, min_norm_solve, pauli, ComplexMatrix};

pub use quadratic::{
    detect_quadratic_class, quadratic_coefficient_derivatives, quadratic_support_inverse, sld_quadratic_class,
    sld_quadratic_class_with, QuadraticClassCoefficients, CLASS_TOL,
};
pub use quadrature::{gauss_legendre, sld_quadrature};
pub use series::{default_series_s, sld_series, SERIES_STABILITY_LIMIT};

/// Default absolute tolerance shared by the exact routes.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// Convention for the undetermined kernel-kernel block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    KernelBlockZero,
}

impl Gauge {
    pub fn name(self) -> &'static str {
        match self {
            Gauge::KernelBlockZero => "kernel_zero",
        }
    }
}

/// Which route produced an SLD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Spectral,
    Sylvester,
    Quadrature,
    Series,
    Commuting,
    ClosedForm,
    BlochQubit,
    Unitary,
    Depolarized,
    Eta,
    BlockDiagonal,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Sylvester => "sylvester",
            Method::Quadrature => "quadrature",
            Method::Series => "series",
            Method::Commuting => "commuting",
            Method::ClosedForm => "closed_form",
            Method::BlochQubit => "bloch_qubit",
            Method::Unitary => "unitary",
            Method::Depolarized => "depolarized",
            Method::Eta => "eta",
            Method::BlockDiagonal => "block_diagonal",
        }
    }
}

/// A Hermitian SLD together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct SldOperator {
    pub mat: ComplexMatrix,
    pub gauge: Gauge,
    pub method: Method,
    /// `‖∂ρ − (ρL + Lρ)/2‖_max` for the inputs the route was given.
    pub residual: f64,
    /// Route-specific error bound (series truncation, quadrature convergence).
    pub error_estimate: Option<f64>,
}

impl SldOperator {
    pub fn new(mat: ComplexMatrix, method: Method, residual: f64) -> Self {
        Self {
            mat,
            gauge: Gauge::KernelBlockZero,
            method,
            residual,
            error_estimate: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Maximum recursion depth when a panel is split in halves.
    pub panel_doublings_max: u32,
    pub gl_points_per_panel: usize,
    /// Maximum number of times the integration horizon is doubled.
    pub horizon_doublings_max: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            panel_doublings_max: 12,
            gl_points_per_panel: 16,
            horizon_doublings_max: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Truncation point of the integral; `None` picks
    /// `min(20/p_min, 25/p_max)`.
    pub s: Option<f64>,
    pub n_max: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { s: None, n_max: 600 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rank_tol: f64,
    pub quadrature: QuadratureOptions,
    pub series: SeriesOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            quadrature: QuadratureOptions::default(),
            series: SeriesOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.abs_tol > 0.0) || !(self.rank_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.quadrature.gl_points_per_panel == 0 {
            return bad("gl_points_per_panel must be at least 1");
        }
        if let Some(s) = self.series.s {
            if !(s > 0.0) || !s.is_finite() {
                return bad("series s must be positive and finite");
            }
        }
        Ok(())
    }
}

/// `‖∂ρ − (ρL + Lρ)/2‖_max`.
pub fn sld_residual(rho: &ComplexMatrix, drho: &ComplexMatrix, l: &ComplexMatrix) -> f64 {
    (drho - &rho.anticommutator(l).scale(0.5)).max_abs()
}

/// Zeroes the kernel-kernel block: `L − (1−Π) L (1−Π)`.
pub fn project_gauge(l: &ComplexMatrix, support: &ComplexMatrix) -> ComplexMatrix {
    let kernel = &ComplexMatrix::identity(l.dim()) - support;
    (l - &l.sandwich(&kernel)).hermitian_part()
}

/// Gauge-blind distance: max-norms of the support-support, support-kernel
/// and kernel-support blocks of `a − b`, summed.
pub fn compare_slds(a: &SldOperator, b: &SldOperator, support: &ComplexMatrix) -> Result<f64> {
    compare_matrices(&a.mat, &b.mat, support)
}

/// [`compare_slds`] on bare matrices.
pub fn compare_matrices(a: &ComplexMatrix, b: &ComplexMatrix, support: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() || a.dim() != support.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: if a.dim() != b.dim() { b.dim() } else { support.dim() },
        });
    }
    let delta = a - b;
    let kernel = &ComplexMatrix::identity(a.dim()) - support;
    let ss = &(support * &delta) * support;
    let sk = &(support * &delta) * &kernel;
    let ks = &(&kernel * &delta) * support;
    Ok(ss.max_abs() + sk.max_abs() + ks.max_abs())
}

/// `L_ij = 2 ∂ρ_ij / (p_i + p_j)` in the eigenbasis of `ρ`.
///
/// Fails with [`Error::RankDrift`] when `∂ρ` has a kernel-kernel component
/// larger than `100·tol`, which would mean the rank is not locally constant.
pub fn sld_spectral(s: &Spectrum, drho: &ComplexMatrix, tol: f64) -> Result<SldOperator> {
    check_dims(s.dim(), drho)?;
    let d = s.to_eigenbasis(drho);
    let n = s.dim();
    let m = s.support_rank;
    let mut leak = 0.0f64;
    for i in m..n {
        for j in m..n {
            leak = leak.max(d[(i, j)].norm());
        }
    }
    if leak > 100.0 * tol {
        return Err(Error::RankDrift { leak, tol: 100.0 * tol });
    }
    let p = &s.eigenvalues;
    let l = ComplexMatrix::from_fn(n, |i, j| {
        let den = p[i] + p[j];
        if den > s.rank_tol {
            d[(i, j)] * (2.0 / den)
        } else {
            c64(0.0, 0.0)
        }
    });
    let mat = s.from_eigenbasis(&l).hermitian_part();
    let residual = sld_residual(&s.reconstruct(), drho, &mat);
    Ok(SldOperator::new(mat, Method::Spectral, residual))
}

/// Solves `(ρ⊗1 + 1⊗ρᵀ) vec(L) = 2 vec(∂ρ)` in the minimum-norm sense.
///
/// The null space of the Kronecker operator is exactly the kernel-kernel
/// block, so the minimum-norm solution already satisfies the gauge without
/// diagonalizing `ρ`.
pub fn sld_sylvester(rho: &DensityMatrix, drho: &ComplexMatrix, opts: &SolverOptions) -> Result<SldOperator> {
    let r = rho.matrix();
    let n = r.dim();
    check_dims(n, drho)?;
    let k = &r.kron(&ComplexMatrix::identity(n)) + &ComplexMatrix::identity(n).kron(&r.transpose());
    let rhs: Vec<_> = drho.as_slice().iter().map(|z| z * 2.0).collect();
    let sol = min_norm_solve(&k, &rhs, opts.rank_tol);
    let mat = ComplexMatrix::new(n, sol.x)?.hermitian_part();
    let residual = sld_residual(r, drho, &mat);
    let limit = opts.abs_tol * drho.max_abs().max(1.0);
    if residual > limit {
        return Err(Error::ResidualTooLarge { residual, tol: limit });
    }
    Ok(SldOperator::new(mat, Method::Sylvester, residual))
}

/// Support rank implied by the rank `r` of the `d²×d²` Kronecker operator,
/// which equals `d² − (d − M)²`.
pub fn support_rank_from_kron_rank(d: usize, r: usize) -> usize {
    let k = d * d - r.min(d * d);
    let root = libm::round(libm::sqrt(k as f64)) as usize;
    d - root
}

/// `L = ρ⁺ ∂ρ` (Hermitized) for `[ρ, ∂ρ] = 0`.
pub fn sld_commuting(s: &Spectrum, drho: &ComplexMatrix, tol: f64) -> Result<SldOperator> {
    check_dims(s.dim(), drho)?;
    let rho = s.reconstruct();
    let norm = rho.commutator(drho).max_abs();
    let limit = tol * drho.max_abs().max(1.0);
    if norm > limit {
        return Err(Error::NotCommuting { norm, tol: limit });
    }
    let inv = s.support_inverse()?;
    let mat = (&inv * drho).hermitian_part();
    let residual = sld_residual(&rho, drho, &mat);
    Ok(SldOperator::new(mat, Method::Commuting, residual))
}

fn bloch_matrix(r: [f64; 3]) -> ComplexMatrix {
    let [sx, sy, sz] = pauli();
    let mut m = ComplexMatrix::identity(2);
    m += &sx.scale(r[0]);
    m += &sy.scale(r[1]);
    m += &sz.scale(r[2]);
    m.scale(0.5)
}

/// Closed form for a qubit `ρ = (1 + r·σ)/2`:
/// `L = 2∂ρ − ∂P/(1−P) · σ_y ρᵀ σ_y` with `P = (1 + |r|²)/2`, and `L = 2∂ρ`
/// on the pure branch.
pub fn sld_bloch_qubit(r: [f64; 3], dr: [f64; 3]) -> Result<SldOperator> {
    let norm = libm::sqrt(r.iter().map(|x| x * x).sum());
    if norm > 1.0 + 1e-10 || !norm.is_finite() {
        return Err(Error::InvalidBloch { norm });
    }
    let rho = bloch_matrix(r);
    let drho = &bloch_matrix(dr) - &ComplexMatrix::identity(2).scale(0.5);
    let mut mat = drho.scale(2.0);
    if norm < 1.0 - 1e-8 {
        let purity = 0.5 * (1.0 + norm * norm);
        let dp: f64 = r.iter().zip(&dr).map(|(a, b)| a * b).sum();
        let sy = &pauli()[1];
        let flipped = &(sy * &rho.transpose()) * sy;
        mat -= &flipped.scale(dp / (1.0 - purity));
    }
    let residual = sld_residual(&rho, &drho, &mat);
    Ok(SldOperator::new(mat.hermitian_part(), Method::BlochQubit, residual))
}

fn check_dims(n: usize, drho: &ComplexMatrix) -> Result<()> {
    if drho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: drho.dim(),
        });
    }
    Ok(())
}
