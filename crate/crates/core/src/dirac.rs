//! Coordinate-field route: position/momentum pairs under a signed imaginary
//! metric. Real frequency pairs come out of the same cluster machinery as
//! the ladder routes; zero-frequency directions either diagonalize as flat
//! oscillator pairs or, on request, stay behind as conserved operators.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::bv::{
    assemble_involution_transform, group_pairs, Diagonalization, LeftColumn, ModeTag,
};
use crate::dynamics::dynamic_matrix;
use crate::error::{Error, Result};
use crate::form::{CoordForm, FormKind, QuadraticForm};
use crate::gramschmidt::{orthonormalize_cluster, orthonormalize_zero_space};
use crate::matrix::inf_norm;
use crate::spectral::{
    apply_partner, classify_system, eigen_decompose, pair_modes, Classification, Eigensystem,
    PartnerRule,
};
use crate::tol::Tolerances;

fn bosonic_tag(omega: f64) -> ModeTag {
    if omega < 0.0 {
        ModeTag::TimePolarized
    } else {
        ModeTag::Normal
    }
}

/// Real symmetric coefficient matrix of a coordinate form.
fn real_coefficient(form: &CoordForm) -> Array2<f64> {
    let n = form.n();
    let mut m = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = form.mu()[(i, j)];
            m[(i, n + j)] = form.gamma_pq()[(i, j)];
            m[(n + i, j)] = form.gamma_pq()[(j, i)];
            m[(n + i, n + j)] = form.kappa()[(i, j)];
        }
    }
    m
}

/// Conserved operators spanning the kernel of the coefficient matrix, as
/// real coefficient vectors `c` with `c' D = 0`: for a kernel vector `v`,
/// `c = [[0, S], [-S, 0]] v`. Sign-fixed and sorted for determinism.
fn conserved_modes(
    form: &CoordForm,
    d: &ndarray::Array2<Complex64>,
    tol: &Tolerances,
) -> Result<Vec<Array1<f64>>> {
    use ndarray_linalg::SVD;
    let m = real_coefficient(form);
    let n = form.n();
    let m_norm = inf_norm(&m.mapv(|x| Complex64::new(x, 0.0)));
    let (_, sv, vt) = m
        .svd(false, true)
        .map_err(|e| Error::SolverFailure(format!("kernel factorization failed: {e}")))?;
    let vt = vt.expect("requested right singular vectors");
    let cut = tol.tau_rank(m_norm);
    let mut out: Vec<Array1<f64>> = Vec::new();
    let d_scale = 1.0 + inf_norm(d);
    for (l, s) in sv.iter().enumerate() {
        if *s > cut {
            continue;
        }
        let v = vt.row(l);
        let mut c = Array1::<f64>::zeros(2 * n);
        for i in 0..n {
            let s_i = form.signature()[i] as f64;
            c[i] = s_i * v[n + i];
            c[n + i] = -s_i * v[i];
        }
        // Orient the largest entry positive.
        let mut best = 0usize;
        for (i, x) in c.iter().enumerate() {
            if x.abs() > c[best].abs() {
                best = i;
            }
        }
        if c[best] < 0.0 {
            c.mapv_inplace(|x| -x);
        }
        let c_norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let row_norm = (0..2 * n)
            .map(|j| {
                (0..2 * n)
                    .map(|i| Complex64::new(c[i], 0.0) * d[(i, j)])
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        if row_norm > tol.tau_residual(d_scale * c_norm) {
            return Err(Error::SolverFailure(format!(
                "kernel vector is not conserved (|c'D| = {row_norm:.3e})"
            )));
        }
        out.push(c);
    }
    out.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b.iter()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(out)
}

/// Diagonalize a coordinate form. `allow_partial` keeps zero-frequency
/// directions out of the transformation and reports them as conserved
/// operators instead; without it a degenerate flat direction is an error
/// when it cannot form complete oscillator pairs.
pub fn diagonalize_coord(
    form: &CoordForm,
    allow_partial: bool,
    tol: &Tolerances,
) -> Result<Diagonalization> {
    let wrapped = QuadraticForm::Coord(form.clone());
    let dm = dynamic_matrix(&wrapped);
    let sys = eigen_decompose(&dm.d, tol)?;
    if let Classification::ComplexSpectrum { witness, margin } = classify_system(&sys, tol) {
        return Err(Error::NotDiagonalizable(Classification::ComplexSpectrum {
            witness,
            margin,
        }));
    }
    let tau0 = tol.tau_cluster(sys.d_norm);
    for c in &sys.clusters {
        let zeroish = c.value.re.abs() <= tau0;
        if c.algebraic != c.geometric && !(zeroish && allow_partial) {
            return Err(Error::NotDiagonalizable(Classification::Defective {
                omega: c.value.re,
                algebraic: c.algebraic,
                geometric: c.geometric,
                margin: c.margin,
            }));
        }
    }

    let zero_present = sys.clusters.iter().any(|c| c.value.re.abs() <= tau0);
    let hold_back = allow_partial && zero_present;
    let residual = if hold_back {
        conserved_modes(form, &dm.d, tol)?
    } else {
        Vec::new()
    };
    let work = if hold_back {
        let clusters: Vec<_> = sys
            .clusters
            .iter()
            .filter(|c| c.value.re.abs() > tau0)
            .cloned()
            .collect();
        let size = clusters.iter().map(|c| c.algebraic).sum();
        Eigensystem {
            clusters,
            d_norm: sys.d_norm,
            size,
        }
    } else {
        sys
    };

    let pairs = pair_modes(&work, &dm.d, PartnerRule::PlainConjugate, tol)?;
    let mut left: Vec<LeftColumn> = Vec::with_capacity(pairs.len());
    for (omega, basis) in group_pairs(pairs) {
        if omega == 0.0 {
            let zp = orthonormalize_zero_space(&basis, &dm.g, PartnerRule::PlainConjugate, tol)?;
            for (a, _) in zp {
                left.push(LeftColumn {
                    omega: 0.0,
                    tag: ModeTag::Normal,
                    v: a.v,
                });
            }
        } else {
            for w in orthonormalize_cluster(&basis, &dm.g, tol)? {
                if w.norm == 1 {
                    left.push(LeftColumn {
                        omega,
                        tag: bosonic_tag(omega),
                        v: w.v,
                    });
                } else {
                    left.push(LeftColumn {
                        omega: -omega,
                        tag: bosonic_tag(-omega),
                        v: apply_partner(PartnerRule::PlainConjugate, &w.v),
                    });
                }
            }
        }
    }
    let dim = 2 * form.n();
    let (t, modes) = assemble_involution_transform(left, PartnerRule::PlainConjugate, dim);
    let constant = 0.5 * modes.iter().map(|m| m.omega).sum::<f64>();
    Ok(Diagonalization {
        t,
        modes,
        constant,
        residual,
        kind: FormKind::Coord,
    })
}

/// Fast path for `H = p'Kp/2 + q'Vq/2` with positive definite K: Cholesky
/// the kinetic matrix, rotate the potential, read the squared frequencies.
/// Returns descending omegas and the real mode matrix `T` with
/// `T'VT = diag(omega^2)` and `T'K^-1T = I`.
pub fn kv_fast_path(
    k: &Array2<f64>,
    v: &Array2<f64>,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Array2<f64>)> {
    use ndarray_linalg::{Cholesky, Eigh, UPLO};
    let n = k.nrows();
    if k.ncols() != n || v.nrows() != n || v.ncols() != n {
        return Err(Error::SizeMismatch(format!(
            "kinetic is {}x{}, potential is {}x{}",
            k.nrows(),
            k.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let sym = |a: &Array2<f64>| -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        dev
    };
    let k_scale = k.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let v_scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sym(k) > tol.tau_struct(k_scale) || sym(v) > tol.tau_struct(v_scale) {
        return Err(Error::StructuralViolation(
            "kinetic and potential matrices must be symmetric".into(),
        ));
    }
    let l = k
        .cholesky(UPLO::Lower)
        .map_err(|_| Error::NotPositiveDefinite("kinetic matrix".into()))?;
    let lam = l.t().dot(v).dot(&l);
    let (w2, s) = lam
        .eigh(UPLO::Lower)
        .map_err(|e| Error::SolverFailure(format!("symmetric eigensolver failed: {e}")))?;
    let lam_scale = w2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut cols: Vec<(f64, Array1<f64>)> = Vec::with_capacity(n);
    for (j, w) in w2.iter().enumerate() {
        if *w < -tol.tau_rank(lam_scale) {
            return Err(Error::NotPositiveDefinite(format!(
                "potential has a negative normal-mode curvature {w:.6e}"
            )));
        }
        let omega = w.max(0.0).sqrt();
        let mut col = s.column(j).to_owned();
        let mut best = 0usize;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        cols.push((omega, col));
    }
    cols.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            for (x, y) in a.1.iter().zip(b.1.iter()) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    let mut s_sorted = Array2::<f64>::zeros((n, n));
    let mut omegas = Vec::with_capacity(n);
    for (j, (omega, col)) in cols.iter().enumerate() {
        omegas.push(*omega);
        s_sorted.column_mut(j).assign(col);
    }
    Ok((omegas, l.dot(&s_sorted)))
}
