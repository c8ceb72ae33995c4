//! Unitary parametrization `ρ(θ) = U(θ) ρ_in U(θ)†` handled in the frame of
//! the initial state through `H = i (∂U†) U`.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::density::{spectral_decompose, DensityMatrix, DEFAULT_RANK_TOL};
use crate::dual::{Dual, DualComplex};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{c64, matrix_exponential, ComplexMatrix};
use crate::model::{DualMatrix, ParameterPoint};
use crate::sld::{project_gauge, sld_residual, sld_spectral, Method, SldOperator};

const UNITARITY_TOL: f64 = 1e-10;

/// How `U(θ)` is written down.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec {
    /// Entry expressions of `U`.
    Entries(Vec<Vec<Expr>>),
    /// `U = exp(−i θ G)` for a constant Hermitian `G`.
    Generator {
        generator: Vec<Vec<Expr>>,
        parameter: String,
    },
}

impl UnitarySpec {
    pub fn dim(&self) -> usize {
        match self {
            UnitarySpec::Entries(e) => e.len(),
            UnitarySpec::Generator { generator, .. } => generator.len(),
        }
    }

    pub(crate) fn expressions(&self) -> Vec<&Expr> {
        match self {
            UnitarySpec::Entries(e) => e.iter().flatten().collect(),
            UnitarySpec::Generator { generator, .. } => generator.iter().flatten().collect(),
        }
    }

    /// Shape checks plus, for the generator form, that `G` is a constant
    /// Hermitian matrix and the parameter is declared.
    pub(crate) fn check(&self, declared: &[String]) -> Result<()> {
        let rows = match self {
            UnitarySpec::Entries(e) => e,
            UnitarySpec::Generator { generator, .. } => generator,
        };
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidModel("unitary must be a non-empty square matrix".into()));
        }
        for e in self.expressions() {
            e.check_parameters(declared)?;
        }
        if let UnitarySpec::Generator { parameter, .. } = self {
            if !declared.contains(parameter) {
                return Err(Error::UnknownParameter {
                    name: parameter.clone(),
                });
            }
            let g = self.generator_matrix()?;
            if g.hermiticity_defect() > UNITARITY_TOL {
                return Err(Error::InvalidModel("generator must be Hermitian".into()));
            }
        }
        Ok(())
    }

    fn generator_matrix(&self) -> Result<ComplexMatrix> {
        let UnitarySpec::Generator { generator, .. } = self else {
            return Err(Error::InvalidModel("not a generator-form unitary".into()));
        };
        let rows = generator
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| {
                        if e.parameters().is_empty() {
                            e.eval_constant()
                        } else {
                            Err(Error::InvalidModel(format!("generator entry `{e}` must be constant")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ComplexMatrix::from_rows(&rows)
    }

    pub(crate) fn eval_dual(&self, lookup: &dyn Fn(&str) -> Option<DualComplex>) -> Result<DualMatrix> {
        let u = match self {
            UnitarySpec::Entries(e) => {
                let rows = e
                    .iter()
                    .map(|r| r.iter().map(|x| x.eval(lookup)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                DualMatrix::from_entries(&rows)?
            }
            UnitarySpec::Generator { parameter, .. } => {
                let g = self.generator_matrix()?;
                let theta: Dual<_> = lookup(parameter).ok_or_else(|| Error::MissingParameter {
                    name: parameter.clone(),
                })?;
                if theta.value.im != 0.0 || theta.deriv.im != 0.0 {
                    return Err(Error::EvalError("generator parameter must be real".into()));
                }
                let minus_i_g = g.scale_c(c64(0.0, -1.0));
                let value = matrix_exponential(&minus_i_g.scale(theta.value.re))?;
                let deriv = (&minus_i_g * &value).scale(theta.deriv.re);
                DualMatrix { value, deriv }
            }
        };
        let deviation = unitarity_defect(&u.value);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }
}

fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.dim())).max_abs()
}

/// A unitary family with its declared parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryModel {
    parameters: Vec<String>,
    spec: UnitarySpec,
}

impl UnitaryModel {
    pub fn new(parameters: Vec<String>, spec: UnitarySpec) -> Result<Self> {
        spec.check(&parameters)?;
        Ok(Self { parameters, spec })
    }

    /// `U = exp(−i θ G)` with `G` given numerically.
    pub fn from_generator(parameter: &str, g: &ComplexMatrix) -> Result<Self> {
        let generator = g
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(Expr::complex).collect())
            .collect();
        Self::new(
            alloc::vec![parameter.to_owned()],
            UnitarySpec::Generator {
                generator,
                parameter: parameter.to_owned(),
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn spec(&self) -> &UnitarySpec {
        &self.spec
    }

    /// `U` and `∂U/∂which` at a point.
    pub fn eval(&self, at: &ParameterPoint, which: &str) -> Result<(ComplexMatrix, ComplexMatrix)> {
        if !self.parameters.iter().any(|p| p == which) {
            return Err(Error::UnknownParameter { name: which.to_owned() });
        }
        if let Some(missing) = self.parameters.iter().find(|p| at.get(p).is_none()) {
            return Err(Error::MissingParameter { name: missing.clone() });
        }
        let lookup = |name: &str| {
            at.get(name).map(|v| {
                let d = if name == which { 1.0 } else { 0.0 };
                Dual::new(c64(v, 0.0), c64(d, 0.0))
            })
        };
        let u = self.spec.eval_dual(&lookup)?;
        Ok((u.value, u.deriv))
    }
}

/// The Hermitian generator of the parametrization in the initial frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HOperator {
    pub mat: ComplexMatrix,
}

/// `H = i (∂U)† U`, Hermitized.
pub fn h_from_derivative(u: &ComplexMatrix, du: &ComplexMatrix) -> Result<HOperator> {
    let deviation = unitarity_defect(u);
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let h = (&du.adjoint() * u).scale_c(c64(0.0, 1.0));
    Ok(HOperator {
        mat: h.hermitian_part(),
    })
}

/// `H` for the family at a point, along one parameter.
pub fn h_operator(u: &UnitaryModel, at: &ParameterPoint, which: &str) -> Result<HOperator> {
    let (value, deriv) = u.eval(at, which)?;
    h_from_derivative(&value, &deriv)
}

/// `∂ρ` pulled back to the initial frame: `U† ∂ρ U = i [H, ρ_in]`.
pub fn effective_derivative(rho_in: &DensityMatrix, h: &HOperator) -> ComplexMatrix {
    h.mat
        .commutator(rho_in.matrix())
        .scale_c(c64(0.0, 1.0))
        .hermitian_part()
}

/// `L_eff = U† L U`, the SLD of the rotated family expressed in the frame of
/// `ρ_in`. Pure inputs use `2i[H, ρ_in]` directly.
pub fn effective_sld(rho_in: &DensityMatrix, h: &HOperator) -> Result<SldOperator> {
    let d_eff = effective_derivative(rho_in, h);
    let spectrum = spectral_decompose(rho_in, DEFAULT_RANK_TOL)?;
    let mut sld = if spectrum.support_rank == 1 {
        let mat = project_gauge(&d_eff.scale(2.0), &spectrum.support_projector);
        let residual = sld_residual(rho_in.matrix(), &d_eff, &mat);
        SldOperator::new(mat, Method::Spectral, residual)
    } else {
        sld_spectral(&spectrum, &d_eff, crate::sld::DEFAULT_ABS_TOL)?
    };
    sld.method = Method::Unitary;
    Ok(sld)
}

/// `F = Tr(ρ_in L_eff²)`.
pub fn qfi_unitary(rho_in: &DensityMatrix, h: &HOperator) -> Result<f64> {
    let l = effective_sld(rho_in, h)?;
    Ok(crate::qfi::qfi_from_sld(rho_in, &l).value)
}
