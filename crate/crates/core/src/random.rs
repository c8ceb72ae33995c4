//! Counter-based deterministic random numbers and random-state samplers.
//!
//! Every draw is a pure function of `(key, counter)`, so streams can be
//! split by trial or shot index and replayed in any order.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{c64, inner, vec_norm, ComplexMatrix};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a tuple of words into one well-mixed 64-bit value.
pub fn keyed_u64(words: &[u64]) -> u64 {
    let mut h = 0x6a09_e667_f3bc_c908u64;
    for &w in words {
        h = mix64(h ^ mix64(w.wrapping_add(GOLDEN)));
        h = h.wrapping_add(GOLDEN);
    }
    mix64(h)
}

/// Uniform in `[0, 1)` keyed by `(seed, stream, index)`.
pub fn keyed_uniform(seed: u64, stream: u64, index: u64) -> f64 {
    to_unit(keyed_u64(&[seed, stream, index]))
}

#[inline]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential view over a keyed stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self {
            key: keyed_u64(&[seed, stream]),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = keyed_u64(&[self.key, self.counter]);
        self.counter += 1;
        out
    }

    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        c64(self.normal(), self.normal()) * core::f64::consts::FRAC_1_SQRT_2
    }
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| rng.complex_normal())
}

pub fn random_hermitian(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
    ginibre(n, rng).hermitian_part()
}

/// Hermitian, traceless, unit Frobenius norm.
pub fn random_traceless_hermitian(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
    let mut h = random_hermitian(n, rng);
    let shift = h.trace().re / n as f64;
    for i in 0..n {
        h[(i, i)] -= shift;
    }
    let f = h.frobenius();
    h.scale(1.0 / f)
}

/// Haar-distributed unitary (Gram–Schmidt on a Ginibre matrix).
pub fn random_unitary(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
    let g = ginibre(n, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= qi * proj;
                }
            }
        }
        let nv = vec_norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

pub fn random_pure_vector(n: usize, rng: &mut CounterRng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    v
}

/// Hilbert–Schmidt random state `G G† / Tr(G G†)` of the given rank, mixed
/// with `floor · 1/n` so that every eigenvalue is at least `floor / n`.
pub fn random_density_matrix(n: usize, rank: usize, floor: f64, rng: &mut CounterRng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, j| if j < rank { rng.complex_normal() } else { c64(0.0, 0.0) });
    let w = &g * &g.adjoint();
    let t = w.trace().re;
    let mut rho = w.scale((1.0 - floor) / t);
    for i in 0..n {
        rho[(i, i)] += floor / n as f64;
    }
    rho.hermitian_part()
}

/// Random state with a prescribed spectrum in a Haar-random basis.
pub fn random_state_with_spectrum(p: &[f64], rng: &mut CounterRng) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_unitary(p.len(), rng);
    let rho = &(&u * &ComplexMatrix::diag(p)) * &u.adjoint();
    (rho.hermitian_part(), u)
}
