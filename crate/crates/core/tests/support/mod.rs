//! Helpers shared by the integration suites: a dense matrix exponential,
//! random elements of the Bogoliubov group, and a truncated occupation-basis
//! solver used as an energy oracle with no ladder algebra in common with the
//! library routes.

#![allow(dead_code)]

use ndarray::{s, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use quadiag::CMat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Matrix exponential by scaling and squaring with a truncated series.
/// The argument is scaled until its max row sum is below 1/4, where
/// sixteen terms put the truncation error far under machine precision.
pub fn cexp(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm: f64 = x
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let k = if norm <= 0.25 {
        0
    } else {
        (norm / 0.25).log2().ceil() as u32
    };
    let scaled = x.mapv(|z| z / 2f64.powi(k as i32));
    let mut sum = CMat::eye(n);
    let mut term = CMat::eye(n);
    for m in 1..=16 {
        term = term.dot(&scaled).mapv(|z| z / m as f64);
        sum = &sum + &term;
    }
    let mut out = sum;
    for _ in 0..k {
        out = out.dot(&out);
    }
    out
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    CMat::from_shape_fn((n, n), |_| {
        Complex64::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    })
}

/// Random group element T with T' G T = G for G = diag(I, -I), carrying the
/// conjugation symmetry between its half-blocks. Built as exp of a generator
/// [[A, B], [conj(B), conj(A)]] with A anti-Hermitian and B symmetric.
pub fn bv_group_element(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> CMat {
    let c = random_complex(rng, n, scale);
    let a = (&c - &c.t().mapv(|z| z.conj())).mapv(|z| 0.5 * z);
    let e = random_complex(rng, n, scale);
    let b = (&e + &e.t()).mapv(|z| 0.5 * z);
    let mut x = CMat::zeros((2 * n, 2 * n));
    x.slice_mut(s![..n, ..n]).assign(&a);
    x.slice_mut(s![..n, n..]).assign(&b);
    x.slice_mut(s![n.., ..n]).assign(&b.mapv(|z| z.conj()));
    x.slice_mut(s![n.., n..]).assign(&a.mapv(|z| z.conj()));
    cexp(&x)
}

/// Ground energy and first excitation gap of `alpha a'a + (gamma/2)(a'a' + aa)`
/// in a number basis truncated at `cutoff` quanta, by dense symmetric
/// eigensolve. Valid well below criticality, where amplitudes decay fast
/// enough for the truncation error to sit under the eigensolver noise.
pub fn fock_ground_and_gap(alpha: f64, gamma: f64, cutoff: usize) -> (f64, f64) {
    let dim = cutoff + 1;
    let mut h = Array2::<f64>::zeros((dim, dim));
    for m in 0..dim {
        h[(m, m)] = alpha * m as f64;
        if m + 2 < dim {
            let t = 0.5 * gamma * (((m + 1) * (m + 2)) as f64).sqrt();
            h[(m + 2, m)] = t;
            h[(m, m + 2)] = t;
        }
    }
    let (vals, _) = h.eigh(UPLO::Lower).expect("truncated Hamiltonian is symmetric");
    let mut e: Vec<f64> = vals.to_vec();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (e[0], e[1] - e[0])
}

/// Positive half of the spectrum of `sqrt(M) G sqrt(M)`, the frequency set of
/// a stable boson problem by Hermitian algebra alone. Square roots come from
/// an eigensolve of M, so nothing here touches the production eigenpath.
pub fn stable_frequencies_by_congruence(m: &CMat) -> Vec<f64> {
    let dim = m.nrows();
    let n = dim / 2;
    let (vals, vecs) = m.eigh(UPLO::Lower).expect("coefficient matrix is Hermitian");
    assert!(
        vals.iter().all(|&v| v > 0.0),
        "oracle needs a positive definite coefficient matrix"
    );
    // vecs comes back conjugated from this backend; without undoing that the
    // product below builds the root of M transposed instead of M.
    let u = vecs.mapv(|z| z.conj());
    let mut root = CMat::zeros((dim, dim));
    for i in 0..dim {
        root[(i, i)] = Complex64::new(vals[i].sqrt(), 0.0);
    }
    let ud = u.t().mapv(|z| z.conj());
    let sqrt_m = u.dot(&root).dot(&ud);
    let mut g = CMat::zeros((dim, dim));
    for i in 0..dim {
        g[(i, i)] = Complex64::new(if i < n { 1.0 } else { -1.0 }, 0.0);
    }
    let k = sqrt_m.dot(&g).dot(&sqrt_m);
    let (kvals, _) = k.eigh(UPLO::Lower).expect("congruence image is Hermitian");
    let mut pos: Vec<f64> = kvals.iter().copied().filter(|&v| v > 0.0).collect();
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    pos
}

pub fn sorted_desc(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

pub fn max_abs_c(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}
