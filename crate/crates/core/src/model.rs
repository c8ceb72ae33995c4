//! Declarative parametrized state families `θ ↦ ρ(θ)` with exact derivatives.
//!
//! Every kind is evaluated with [`DualComplex`] entries seeded on one
//! parameter, so normalizations (pure-vector norms, ensemble weight sums,
//! thermal partition functions) are differentiated through automatically.
//! Models must have locally constant rank at the points where derivatives are
//! requested.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::density::{spectral_decompose, validate_density, DensityMatrix, Tolerances, DEFAULT_RANK_TOL};
use crate::dual::{Dual, DualComplex};
use crate::error::{Error, Result};
use crate::expr::{Expr, RESERVED};
use crate::linalg::{c64, ComplexMatrix};
use crate::unitary::UnitarySpec;

/// Values for every declared parameter of a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterPoint(BTreeMap<String, f64>);

impl ParameterPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
    }

    pub fn single(name: &str, value: f64) -> Self {
        Self::from_pairs([(name, value)])
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_owned(), value);
    }

    /// Copy with one coordinate replaced.
    pub fn with(&self, name: &str, value: f64) -> Self {
        let mut p = self.clone();
        p.set(name, value);
        p
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// One sub-state of a block-diagonal model, optionally placed on explicit
/// basis indices (e.g. `[0, 3]` and `[1, 2]` for an X state).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub kind: ModelKind,
    pub indices: Option<Vec<usize>>,
}

/// Kind-specific entry layout. Expressions may reference any parameter of
/// the enclosing [`ModelSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Entries of `ρ` directly (no normalization).
    ExplicitMatrix { entries: Vec<Vec<Expr>> },
    /// `|ψ⟩⟨ψ|` with `ψ = v/‖v‖`.
    PureVector { amplitudes: Vec<Expr> },
    /// `(1 + r·σ)/2`.
    BlochQubit { r: [Expr; 3] },
    /// `diag(w)/Σw`.
    ClassicalDiagonal { weights: Vec<Expr> },
    /// `Σ_k (w_k/Σw) |f_k⟩⟨f_k|` for an orthonormal frame `f`.
    SpectralEnsemble { weights: Vec<Expr>, frame: Vec<Vec<Expr>> },
    /// `η ρ_in + (1−η)/d · 1`.
    Depolarized { inner: Box<ModelKind>, eta: Expr },
    /// `U ρ_in U†`.
    UnitaryChannel {
        initial: Box<ModelKind>,
        unitary: UnitarySpec,
    },
    /// Direct sum of weighted sub-states, weights renormalized.
    BlockDiagonal { blocks: Vec<BlockSpec>, weights: Vec<Expr> },
    /// `e^{−βH}/Z` with `H = λ₁(β) Σ_{i<d} |ξ_i⟩⟨ξ_i| + λ₂(β) |ξ_d⟩⟨ξ_d|`.
    ThermalTwoGap {
        dim: usize,
        beta: Expr,
        gap1: Expr,
        gap2: Expr,
        frame: Option<Vec<Vec<Expr>>>,
    },
}

impl ModelKind {
    /// A θ-independent explicit matrix.
    pub fn constant(m: &ComplexMatrix) -> Self {
        let entries = m
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(Expr::complex).collect())
            .collect();
        ModelKind::ExplicitMatrix { entries }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::ExplicitMatrix { .. } => "explicit_matrix",
            ModelKind::PureVector { .. } => "pure_vector",
            ModelKind::BlochQubit { .. } => "bloch_qubit",
            ModelKind::ClassicalDiagonal { .. } => "classical_diagonal",
            ModelKind::SpectralEnsemble { .. } => "spectral_ensemble",
            ModelKind::Depolarized { .. } => "depolarized",
            ModelKind::UnitaryChannel { .. } => "unitary_channel",
            ModelKind::BlockDiagonal { .. } => "block_diagonal",
            ModelKind::ThermalTwoGap { .. } => "thermal_two_gap",
        }
    }

    /// Hilbert-space dimension, after checking the layout is consistent.
    pub fn dim(&self) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            ModelKind::ExplicitMatrix { entries } => {
                let d = entries.len();
                if d == 0 || entries.iter().any(|r| r.len() != d) {
                    return bad(format!("explicit_matrix must be square and non-empty ({d} rows)"));
                }
                Ok(d)
            }
            ModelKind::PureVector { amplitudes } => match amplitudes.len() {
                0 => bad("pure_vector needs at least one amplitude".into()),
                d => Ok(d),
            },
            ModelKind::BlochQubit { .. } => Ok(2),
            ModelKind::ClassicalDiagonal { weights } => match weights.len() {
                0 => bad("classical_diagonal needs at least one weight".into()),
                d => Ok(d),
            },
            ModelKind::SpectralEnsemble { weights, frame } => {
                if weights.is_empty() || weights.len() != frame.len() {
                    return bad(format!(
                        "spectral_ensemble needs one frame vector per weight ({} weights, {} vectors)",
                        weights.len(),
                        frame.len()
                    ));
                }
                let d = frame[0].len();
                if d < weights.len() || frame.iter().any(|f| f.len() != d) {
                    return bad("spectral_ensemble frame vectors must share a dimension ≥ their count".into());
                }
                Ok(d)
            }
            ModelKind::Depolarized { inner, .. } => inner.dim(),
            ModelKind::UnitaryChannel { initial, unitary } => {
                let d = initial.dim()?;
                if unitary.dim() != d {
                    return bad(format!(
                        "unitary dimension {} differs from initial state {d}",
                        unitary.dim()
                    ));
                }
                Ok(d)
            }
            ModelKind::BlockDiagonal { blocks, weights } => {
                if blocks.is_empty() || blocks.len() != weights.len() {
                    return bad("block_diagonal needs one weight per block".into());
                }
                let mut total = 0;
                for b in blocks {
                    let bd = b.kind.dim()?;
                    if let Some(ix) = &b.indices {
                        if ix.len() != bd {
                            return bad(format!("block of dimension {bd} given {} indices", ix.len()));
                        }
                    }
                    total += bd;
                }
                let given = blocks.iter().filter(|b| b.indices.is_some()).count();
                if given != 0 && given != blocks.len() {
                    return bad("either every block or no block declares indices".into());
                }
                if given != 0 {
                    let mut seen = alloc::vec![false; total];
                    for &i in blocks.iter().flat_map(|b| b.indices.as_ref().unwrap()) {
                        if i >= total || core::mem::replace(&mut seen[i], true) {
                            return bad("block indices must partition 0..dim".into());
                        }
                    }
                }
                Ok(total)
            }
            ModelKind::ThermalTwoGap { dim, frame, .. } => {
                if *dim < 2 {
                    return bad("thermal_two_gap needs dim ≥ 2".into());
                }
                if let Some(f) = frame {
                    if f.len() != *dim || f.iter().any(|v| v.len() != *dim) {
                        return bad("thermal_two_gap frame must be dim × dim".into());
                    }
                }
                Ok(*dim)
            }
        }
    }

    fn expressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_exprs(&mut out);
        out
    }

    fn collect_exprs<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            ModelKind::ExplicitMatrix { entries } => out.extend(entries.iter().flatten()),
            ModelKind::PureVector { amplitudes } => out.extend(amplitudes),
            ModelKind::BlochQubit { r } => out.extend(r),
            ModelKind::ClassicalDiagonal { weights } => out.extend(weights),
            ModelKind::SpectralEnsemble { weights, frame } => {
                out.extend(weights);
                out.extend(frame.iter().flatten());
            }
            ModelKind::Depolarized { inner, eta } => {
                inner.collect_exprs(out);
                out.push(eta);
            }
            ModelKind::UnitaryChannel { initial, unitary } => {
                initial.collect_exprs(out);
                out.extend(unitary.expressions());
            }
            ModelKind::BlockDiagonal { blocks, weights } => {
                for b in blocks {
                    b.kind.collect_exprs(out);
                }
                out.extend(weights);
            }
            ModelKind::ThermalTwoGap {
                beta,
                gap1,
                gap2,
                frame,
                ..
            } => {
                out.extend([beta, gap1, gap2]);
                if let Some(f) = frame {
                    out.extend(f.iter().flatten());
                }
            }
        }
    }
}

/// How `∂ρ/∂θ` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Dual,
    FiniteDifference,
}

/// A parametrized family with declared parameters and optional domains.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    parameters: Vec<String>,
    domain: BTreeMap<String, (f64, f64)>,
    kind: ModelKind,
    dim: usize,
}

impl ModelSpec {
    /// Checks dimensions, parameter names and that every expression only
    /// references declared parameters.
    pub fn new(parameters: Vec<String>, domain: BTreeMap<String, (f64, f64)>, kind: ModelKind) -> Result<Self> {
        for (i, p) in parameters.iter().enumerate() {
            if RESERVED.contains(&p.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "`{p}` is reserved and cannot be a parameter"
                )));
            }
            if parameters[..i].contains(p) {
                return Err(Error::InvalidModel(format!("parameter `{p}` declared twice")));
            }
        }
        for (name, &(lo, hi)) in &domain {
            if !parameters.contains(name) {
                return Err(Error::UnknownParameter { name: name.clone() });
            }
            if !(lo < hi) {
                return Err(Error::InvalidModel(format!("empty domain [{lo}, {hi}] for `{name}`")));
            }
        }
        let dim = kind.dim()?;
        for e in kind.expressions() {
            e.check_parameters(&parameters)?;
        }
        if let ModelKind::UnitaryChannel { unitary, .. } = &kind {
            unitary.check(&parameters)?;
        }
        Ok(Self {
            parameters,
            domain,
            kind,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn domain(&self, name: &str) -> Option<(f64, f64)> {
        self.domain.get(name).copied()
    }

    fn check_point(&self, at: &ParameterPoint) -> Result<()> {
        if let Some((extra, _)) = at.iter().find(|(k, _)| !self.parameters.iter().any(|p| p == k)) {
            return Err(Error::UnknownParameter { name: extra.to_owned() });
        }
        if let Some(missing) = self.parameters.iter().find(|p| at.get(p).is_none()) {
            return Err(Error::MissingParameter { name: missing.clone() });
        }
        Ok(())
    }

    fn check_which(&self, which: &str) -> Result<()> {
        if self.parameters.iter().any(|p| p == which) {
            Ok(())
        } else {
            Err(Error::UnknownParameter { name: which.to_owned() })
        }
    }

    fn eval_dual(&self, at: &ParameterPoint, seed: Option<&str>) -> Result<DualMatrix> {
        self.check_point(at)?;
        let lookup = |name: &str| {
            at.get(name).map(|v| {
                let d = if Some(name) == seed { 1.0 } else { 0.0 };
                Dual::new(c64(v, 0.0), c64(d, 0.0))
            })
        };
        eval_kind(&self.kind, &lookup)
    }

    /// `ρ(θ)` as a validated density matrix.
    pub fn eval(&self, at: &ParameterPoint) -> Result<DensityMatrix> {
        let m = self.eval_dual(at, None)?;
        validate(m.value)
    }

    /// `ρ(θ)` and the exact dual-number derivative along `which`.
    pub fn eval_with_derivative(&self, at: &ParameterPoint, which: &str) -> Result<(DensityMatrix, ComplexMatrix)> {
        self.check_which(which)?;
        let m = self.eval_dual(at, Some(which))?;
        Ok((validate(m.value)?, m.deriv.hermitian_part()))
    }

    /// `∂ρ/∂which` by the requested mode.
    pub fn eval_derivative(&self, at: &ParameterPoint, which: &str, mode: DerivativeMode) -> Result<ComplexMatrix> {
        Ok(self.eval_derivative_report(at, which, mode)?.0)
    }

    /// Like [`Self::eval_derivative`], plus a warning when a finite-difference
    /// stencil crosses a rank change.
    pub fn eval_derivative_report(
        &self,
        at: &ParameterPoint,
        which: &str,
        mode: DerivativeMode,
    ) -> Result<(ComplexMatrix, Option<String>)> {
        self.check_which(which)?;
        match mode {
            DerivativeMode::Dual => Ok((self.eval_with_derivative(at, which)?.1, None)),
            DerivativeMode::FiniteDifference => self.finite_difference(at, which),
        }
    }

    fn finite_difference(&self, at: &ParameterPoint, which: &str) -> Result<(ComplexMatrix, Option<String>)> {
        let theta = at
            .get(which)
            .ok_or_else(|| Error::MissingParameter { name: which.to_owned() })?;
        let h = f64::EPSILON.cbrt() * theta.abs().max(1.0);
        if let Some((lo, hi)) = self.domain(which) {
            if theta - h < lo || theta + h > hi {
                return Err(Error::DomainEdge {
                    name: which.to_owned(),
                    value: theta,
                    step: h,
                    lo,
                    hi,
                });
            }
        }
        let plus = self.eval(&at.with(which, theta + h))?;
        let minus = self.eval(&at.with(which, theta - h))?;
        let center = self.eval(at)?;
        let d = (plus.matrix() - minus.matrix()).scale(0.5 / h).hermitian_part();

        let rank = |r: &DensityMatrix| spectral_decompose(r, DEFAULT_RANK_TOL).map(|s| s.support_rank);
        let ranks = [rank(&minus)?, rank(&center)?, rank(&plus)?];
        let warning = (ranks[0] != ranks[1] || ranks[1] != ranks[2]).then(|| {
            format!(
                "rank changes across the finite-difference stencil for `{which}` at {theta} (ranks {ranks:?}); derivative is unreliable"
            )
        });
        Ok((d, warning))
    }
}

fn validate(m: ComplexMatrix) -> Result<DensityMatrix> {
    validate_density(m, Tolerances::default()).map_err(|e| Error::InvalidState(Box::new(e)))
}

/// `ρ(θ)` for a model (see [`ModelSpec::eval`]).
pub fn eval_model(spec: &ModelSpec, at: &ParameterPoint) -> Result<DensityMatrix> {
    spec.eval(at)
}

/// `∂ρ/∂θ` for a model (see [`ModelSpec::eval_derivative`]).
pub fn eval_derivative(
    spec: &ModelSpec,
    at: &ParameterPoint,
    which: &str,
    mode: DerivativeMode,
) -> Result<ComplexMatrix> {
    spec.eval_derivative(at, which, mode)
}

/// A matrix together with its derivative along one parameter.
#[derive(Debug, Clone)]
pub(crate) struct DualMatrix {
    pub value: ComplexMatrix,
    pub deriv: ComplexMatrix,
}

impl DualMatrix {
    pub fn constant(value: ComplexMatrix) -> Self {
        let d = value.dim();
        Self {
            value,
            deriv: ComplexMatrix::zeros(d),
        }
    }

    pub fn from_entries(rows: &[Vec<DualComplex>]) -> Result<Self> {
        let value: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|z| z.value).collect()).collect();
        let deriv: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|z| z.deriv).collect()).collect();
        Ok(Self {
            value: ComplexMatrix::from_rows(&value)?,
            deriv: ComplexMatrix::from_rows(&deriv)?,
        })
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut deriv = &self.deriv * &o.value;
        deriv += &(&self.value * &o.deriv);
        Self {
            value: &self.value * &o.value,
            deriv,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            value: self.value.adjoint(),
            deriv: self.deriv.adjoint(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            value: &self.value + &o.value,
            deriv: &self.deriv + &o.deriv,
        }
    }

    pub fn scale(&self, s: DualComplex) -> Self {
        let mut deriv = self.deriv.scale_c(s.value);
        deriv += &self.value.scale_c(s.deriv);
        Self {
            value: self.value.scale_c(s.value),
            deriv,
        }
    }

    /// `|v⟩⟨v|` for a dual vector.
    pub fn projector(v: &[DualComplex]) -> Self {
        let n = v.len();
        let value = ComplexMatrix::from_fn(n, |i, j| v[i].value * v[j].value.conj());
        let deriv = ComplexMatrix::from_fn(n, |i, j| {
            v[i].deriv * v[j].value.conj() + v[i].value * v[j].deriv.conj()
        });
        Self { value, deriv }
    }
}

type Lookup<'a> = dyn Fn(&str) -> Option<DualComplex> + 'a;

fn eval_all(exprs: &[Expr], lookup: &Lookup) -> Result<Vec<DualComplex>> {
    exprs.iter().map(|e| e.eval(lookup)).collect()
}

fn real(z: DualComplex, what: &str) -> Result<Dual<f64>> {
    if z.value.im.abs() > 1e-12 || z.deriv.im.abs() > 1e-12 {
        return Err(Error::EvalError(format!("{what} must be real, got {}", z.value)));
    }
    Ok(z.re())
}

/// `w_k / Σ w` with the derivative of the normalization.
fn normalized_weights(weights: &[Expr], lookup: &Lookup) -> Result<Vec<DualComplex>> {
    let w = eval_all(weights, lookup)?
        .into_iter()
        .map(|z| real(z, "weight").map(DualComplex::from_real))
        .collect::<Result<Vec<_>>>()?;
    let total = w.iter().fold(Dual::constant(c64(0.0, 0.0)), |a, &b| a + b);
    if total.value.norm() < 1e-300 {
        return Err(Error::EvalError("weights sum to zero".into()));
    }
    Ok(w.into_iter().map(|x| x / total).collect())
}

fn ensemble(weights: &[DualComplex], frame: &[Vec<DualComplex>], dim: usize) -> Result<DualMatrix> {
    for (a, fa) in frame.iter().enumerate() {
        for (b, fb) in frame.iter().enumerate().skip(a) {
            let ip: Complex64 = fa.iter().zip(fb).map(|(x, y)| x.value.conj() * y.value).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            if (ip - c64(want, 0.0)).norm() > 1e-10 {
                return Err(Error::EvalError(format!(
                    "frame vectors {a} and {b} are not orthonormal (overlap {ip})"
                )));
            }
        }
    }
    let mut acc = DualMatrix::constant(ComplexMatrix::zeros(dim));
    for (w, f) in weights.iter().zip(frame) {
        acc = acc.add(&DualMatrix::projector(f).scale(*w));
    }
    Ok(acc)
}

fn eval_kind(kind: &ModelKind, lookup: &Lookup) -> Result<DualMatrix> {
    let dim = kind.dim()?;
    match kind {
        ModelKind::ExplicitMatrix { entries } => {
            let rows = entries
                .iter()
                .map(|r| eval_all(r, lookup))
                .collect::<Result<Vec<_>>>()?;
            DualMatrix::from_entries(&rows)
        }
        ModelKind::PureVector { amplitudes } => {
            let v = eval_all(amplitudes, lookup)?;
            let norm2 = v
                .iter()
                .fold(Dual::constant(c64(0.0, 0.0)), |acc, &z| acc + z.conj() * z);
            if norm2.value.re < 1e-300 {
                return Err(Error::EvalError("pure_vector has zero norm".into()));
            }
            let inv = Dual::constant(c64(1.0, 0.0)) / norm2.sqrt();
            let psi: Vec<DualComplex> = v.into_iter().map(|z| z * inv).collect();
            Ok(DualMatrix::projector(&psi))
        }
        ModelKind::BlochQubit { r } => {
            let r = eval_all(r, lookup)?
                .into_iter()
                .map(|z| real(z, "Bloch component"))
                .collect::<Result<Vec<_>>>()?;
            let norm = r.iter().map(|x| x.value * x.value).sum::<f64>().sqrt();
            if norm > 1.0 + 1e-10 {
                return Err(Error::InvalidState(Box::new(Error::InvalidBloch { norm })));
            }
            let half = |x: f64| c64(0.5 * x, 0.0);
            let (x, y, z) = (r[0], r[1], r[2]);
            let value = ComplexMatrix::new(
                2,
                alloc::vec![
                    half(1.0 + z.value),
                    c64(0.5 * x.value, -0.5 * y.value),
                    c64(0.5 * x.value, 0.5 * y.value),
                    half(1.0 - z.value),
                ],
            )?;
            let deriv = ComplexMatrix::new(
                2,
                alloc::vec![
                    half(z.deriv),
                    c64(0.5 * x.deriv, -0.5 * y.deriv),
                    c64(0.5 * x.deriv, 0.5 * y.deriv),
                    half(-z.deriv),
                ],
            )?;
            Ok(DualMatrix { value, deriv })
        }
        ModelKind::ClassicalDiagonal { weights } => {
            let p = normalized_weights(weights, lookup)?;
            let frame = basis_frame(dim);
            ensemble(&p, &frame, dim)
        }
        ModelKind::SpectralEnsemble { weights, frame } => {
            let p = normalized_weights(weights, lookup)?;
            let f = frame.iter().map(|v| eval_all(v, lookup)).collect::<Result<Vec<_>>>()?;
            ensemble(&p, &f, dim)
        }
        ModelKind::Depolarized { inner, eta } => {
            let rho_in = eval_kind(inner, lookup)?;
            let eta = real(eta.eval(lookup)?, "eta")?;
            if !(0.0..=1.0).contains(&eta.value) {
                return Err(Error::InvalidState(Box::new(Error::EtaOutOfRange { eta: eta.value })));
            }
            let eta = DualComplex::from_real(eta);
            let one = Dual::constant(c64(1.0, 0.0));
            let mixed = DualMatrix::constant(ComplexMatrix::identity(dim).scale(1.0 / dim as f64));
            Ok(rho_in.scale(eta).add(&mixed.scale(one - eta)))
        }
        ModelKind::UnitaryChannel { initial, unitary } => {
            let rho_in = eval_kind(initial, lookup)?;
            let u = unitary.eval_dual(lookup)?;
            Ok(u.mul(&rho_in).mul(&u.adjoint()))
        }
        ModelKind::BlockDiagonal { blocks, weights } => {
            let w = normalized_weights(weights, lookup)?;
            let mut value = ComplexMatrix::zeros(dim);
            let mut deriv = ComplexMatrix::zeros(dim);
            let mut offset = 0;
            for (b, wk) in blocks.iter().zip(w) {
                let sub = eval_kind(&b.kind, lookup)?.scale(wk);
                let bd = sub.value.dim();
                let idx: Vec<usize> = match &b.indices {
                    Some(ix) => ix.clone(),
                    None => (offset..offset + bd).collect(),
                };
                offset += bd;
                value += &sub.value.embed(dim, &idx);
                deriv += &sub.deriv.embed(dim, &idx);
            }
            Ok(DualMatrix { value, deriv })
        }
        ModelKind::ThermalTwoGap {
            beta,
            gap1,
            gap2,
            frame,
            ..
        } => {
            let b = real(beta.eval(lookup)?, "beta")?;
            let l1 = real(gap1.eval(lookup)?, "gap1")?;
            let l2 = real(gap2.eval(lookup)?, "gap2")?;
            let e1 = (-(b * l1)).exp();
            let e2 = (-(b * l2)).exp();
            let z = Dual::constant((dim - 1) as f64) * e1 + e2;
            let p1 = DualComplex::from_real(e1 / z);
            let p2 = DualComplex::from_real(e2 / z);
            let mut p = alloc::vec![p1; dim - 1];
            p.push(p2);
            let f = match frame {
                Some(f) => f.iter().map(|v| eval_all(v, lookup)).collect::<Result<Vec<_>>>()?,
                None => basis_frame(dim),
            };
            ensemble(&p, &f, dim)
        }
    }
}

fn basis_frame(dim: usize) -> Vec<Vec<DualComplex>> {
    (0..dim)
        .map(|k| {
            (0..dim)
                .map(|i| Dual::constant(c64(if i == k { 1.0 } else { 0.0 }, 0.0)))
                .collect()
        })
        .collect()
}
