//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005). No eigendecomposition is involved, so the
//! integral-quadrature SLD route built on this stays independent of the
//! spectral route.

#[allow(unused_imports)]
use num_traits::Float;

use super::{c64, lu_solve, ComplexMatrix};
use crate::error::{Error, Result};

/// Largest 1-norm accepted. Beyond this the number of squarings makes the
/// result meaningless for anything but strongly dissipative arguments.
pub const EXPM_NORM_LIMIT: f64 = 1e8;

const THETA_13: f64 = 5.371_920_351_148_152;

const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `e^a`. Relative accuracy is around 1e-13 for `‖a‖₁ ≤ 50`.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = a.norm_one();
    if norm > EXPM_NORM_LIMIT {
        return Err(Error::OverflowRisk {
            norm,
            limit: EXPM_NORM_LIMIT,
        });
    }
    let n = a.dim();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(squarings));

    let ident = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: f64, c4: f64, c2: f64| -> ComplexMatrix {
        let mut m = a6.scale(c6);
        m += &a4.scale(c4);
        m += &a2.scale(c2);
        m
    };

    let mut u_inner = &a6 * &lin(B13[13], B13[11], B13[9]);
    u_inner += &lin(B13[7], B13[5], B13[3]);
    u_inner += &ident.scale(B13[1]);
    let u = &a * &u_inner;

    let mut v = &a6 * &lin(B13[12], B13[10], B13[8]);
    v += &lin(B13[6], B13[4], B13[2]);
    v += &ident.scale(B13[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = lu_solve(&q, &p)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::OverflowRisk {
            norm,
            limit: EXPM_NORM_LIMIT,
        });
    }
    // Exact zeros stay exact (keeps e^0 block structure clean).
    Ok(r.map(|z| if z.norm() < f64::MIN_POSITIVE { c64(0.0, 0.0) } else { z }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, pauli};
    use crate::random::{random_hermitian, CounterRng};
    use alloc::vec;

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exponential(&ComplexMatrix::zeros(3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_gives_scalar_exponentials() {
        let e = matrix_exponential(&ComplexMatrix::diag(&[-1.0, -2.0])).unwrap();
        assert!((e[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)].re - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], c64(0.0, 0.0));
    }

    #[test]
    fn nilpotent_series_terminates() {
        let n = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = matrix_exponential(&n).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!((&e - &want).max_abs() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(-i t σy) = cos t − i sin t σy
        let [_, y, _] = pauli();
        let t = 0.7f64;
        let e = matrix_exponential(&y.scale_c(c64(0.0, -t))).unwrap();
        let want = &ComplexMatrix::identity(2).scale(t.cos()) - &y.scale_c(c64(0.0, t.sin()));
        assert!((&e - &want).max_abs() < 1e-15);
    }

    #[test]
    fn agrees_with_spectral_exponential_up_to_norm_50() {
        let mut rng = CounterRng::new(3);
        for scale in [0.01, 1.0, 10.0, 50.0] {
            let h = random_hermitian(4, &mut rng);
            let h = h.scale(scale / h.norm_one());
            let e = matrix_exponential(&h).unwrap();
            let eig = hermitian_eigen(&h).unwrap();
            let n = 4;
            let want = ComplexMatrix::from_fn(n, |i, j| {
                (0..n)
                    .map(|k| eig.vectors[(i, k)] * eig.values[k].exp() * eig.vectors[(j, k)].conj())
                    .sum()
            });
            let rel = (&e - &want).max_abs() / want.max_abs();
            assert!(rel < 1e-12, "scale {scale}: rel {rel:e}");
        }
    }

    #[test]
    fn refuses_huge_norm() {
        let m = ComplexMatrix::diag(&[1e9, 0.0]);
        assert!(matches!(matrix_exponential(&m), Err(Error::OverflowRisk { .. })));
    }
}
