//! Forward-mode dual numbers `a + ε b` with `ε² = 0`.
//!
//! [`Dual`] is generic over a [`Scalar`] so the same rules drive real
//! coefficient derivatives and complex matrix-entry expressions.

use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Field operations plus the elementary functions the expression language uses.
pub trait Scalar:
    Copy
    + PartialEq
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_zero(self) -> bool;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn sin(self) -> Self {
        Float::sin(self)
    }
    fn cos(self) -> Self {
        Float::cos(self)
    }
    fn exp(self) -> Self {
        Float::exp(self)
    }
    fn ln(self) -> Self {
        Float::ln(self)
    }
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    fn powf(self, e: Self) -> Self {
        Float::powf(self, e)
    }
    fn powi(self, n: i32) -> Self {
        Float::powi(self, n)
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn is_finite(self) -> bool {
        Float::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn powf(self, e: Self) -> Self {
        if e.im == 0.0 {
            if self.im == 0.0 && self.re >= 0.0 {
                return Complex64::new(Float::powf(self.re, e.re), 0.0);
            }
            if e.re == Float::round(e.re) && Float::abs(e.re) <= 64.0 {
                return Complex64::powi(&self, e.re as i32);
            }
            return Complex64::powf(self, e.re);
        }
        Complex64::powc(self, e)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn is_finite(self) -> bool {
        Float::is_finite(self.re) && Float::is_finite(self.im)
    }
}

/// Value together with its directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub deriv: T,
}

/// Real dual number.
pub type DualNumber = Dual<f64>;
/// Complex dual number, used for matrix entries.
pub type DualComplex = Dual<Complex64>;

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: T) -> Self {
        Self::new(value, T::zero())
    }

    /// The independent variable: derivative seed 1.
    pub fn variable(value: T) -> Self {
        Self::new(value, T::one())
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.deriv * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -(self.deriv * self.value.sin()))
    }

    pub fn tan(self) -> Self {
        let c = self.value.cos();
        Self::new(self.value.sin() / c, self.deriv / (c * c))
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.deriv * e)
    }

    pub fn ln(self) -> Self {
        Self::new(self.value.ln(), self.deriv / self.value)
    }

    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Self::new(r, self.deriv / (T::from_f64(2.0) * r))
    }

    /// `self^e`. A constant exponent uses the power rule, so `0^2` keeps a
    /// finite derivative; a varying exponent adds the `a^b ln a` term.
    pub fn pow(self, e: Self) -> Self {
        let value = self.value.powf(e.value);
        let base_term = if self.deriv.is_zero() {
            T::zero()
        } else {
            e.value * self.value.powf(e.value - T::one()) * self.deriv
        };
        let exp_term = if e.deriv.is_zero() {
            T::zero()
        } else {
            value * self.value.ln() * e.deriv
        };
        Self::new(value, base_term + exp_term)
    }

    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.value * o.value, self.value * o.deriv + self.deriv * o.value)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let v = self.value / o.value;
        Self::new(v, (self.deriv - v * o.deriv) / o.value)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl DualComplex {
    pub fn conj(self) -> Self {
        Self::new(self.value.conj(), self.deriv.conj())
    }

    /// Real part of both components.
    pub fn re(self) -> DualNumber {
        Dual::new(self.value.re, self.deriv.re)
    }

    pub fn from_real(x: DualNumber) -> Self {
        Self::new(Complex64::new(x.value, 0.0), Complex64::new(x.deriv, 0.0))
    }
}
