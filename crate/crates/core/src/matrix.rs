//! Dense complex matrix aliases and small helpers shared by every module.

use std::cmp::Ordering;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Shorthand constructor, mostly for tests and fixtures.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Conjugate transpose.
pub fn adjoint(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Max absolute entry; zero for empty matrices.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Infinity norm (max absolute row sum).
pub fn inf_norm(a: &CMat) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum())
        .fold(0.0, f64::max)
}

/// Euclidean norm of a vector.
pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product with conjugation on the left argument.
pub fn cdot(x: &CVec, y: &CVec) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Deviation from Hermitian symmetry.
pub fn herm_dev(a: &CMat) -> f64 {
    max_abs(&(a - &adjoint(a)))
}

/// Deviation from plain (complex) symmetry.
pub fn sym_dev(a: &CMat) -> f64 {
    max_abs(&(a - &a.t().to_owned()))
}

/// Deviation from antisymmetry.
pub fn antisym_dev(a: &CMat) -> f64 {
    max_abs(&(a + &a.t().to_owned()))
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn to_complex(a: &Array2<f64>) -> CMat {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Total lexicographic order on complex vectors: entry by entry, real part
/// first. Used only as a deterministic tie-break, never as a numeric test.
pub fn lex_cmp(a: &CVec, b: &CVec) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// Rotate a vector by a global phase so its largest-magnitude entry is real
/// and positive. Ties go to the lowest index; a null vector is returned as is.
pub fn phase_fix(v: &CVec) -> CVec {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return v.clone();
    }
    let phase = v[best] / best_mag;
    v.mapv(|z| z * phase.conj())
}
