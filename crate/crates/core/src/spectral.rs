//! Spectral analysis of dynamic matrices: eigenvalue clustering, the
//! diagnosis of complex or defective spectra, and the pairing of modes
//! into (+omega, -omega) partners.

use ndarray::Array2;
use num_complex::Complex64;

pub use crate::error::Classification;
use crate::error::{Error, Result};
use crate::matrix::{all_finite, inf_norm, vec_norm, CMat, CVec};
use crate::tol::Tolerances;

use ndarray_linalg::{EigVals, Inverse, SVD};

/// One cluster of numerically coincident eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenCluster {
    /// Cluster centroid of the raw eigenvalues.
    pub value: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Euclidean-orthonormal basis of the numerical null space of
    /// `D - value I`; `geometric` vectors.
    pub basis: Vec<CVec>,
    /// Smallest singular value that stayed above the rank cutoff.
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Clusters sorted by descending real part of the centroid.
    pub clusters: Vec<EigenCluster>,
    /// Infinity norm of the matrix the system came from; scales thresholds.
    pub d_norm: f64,
    pub size: usize,
}

fn null_basis(a: &CMat, cutoff: f64) -> Result<(Vec<CVec>, f64)> {
    let (_, s, vt) = a
        .svd(false, true)
        .map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e}")))?;
    let vt = vt.expect("requested right singular vectors");
    let nullity = s.iter().filter(|x| **x <= cutoff).count();
    let margin = s
        .iter()
        .rev()
        .find(|x| **x > cutoff)
        .copied()
        .unwrap_or(f64::INFINITY);
    let k = s.len();
    let mut basis = Vec::with_capacity(nullity);
    for row in (k - nullity)..k {
        basis.push(vt.row(row).mapv(|z| z.conj()).to_owned());
    }
    Ok((basis, margin))
}

/// Eigenvalues of `d`, grouped into clusters at the clustering tolerance,
/// each with a numerical eigenbasis.
pub fn eigen_decompose(d: &CMat, tol: &Tolerances) -> Result<Eigensystem> {
    let (r, c) = d.dim();
    if r != c {
        return Err(Error::SizeMismatch(format!("dynamic matrix is {r}x{c}")));
    }
    if !all_finite(d) {
        return Err(Error::StructuralViolation(
            "dynamic matrix has non-finite entries".into(),
        ));
    }
    let vals = d
        .eigvals()
        .map_err(|e| Error::SolverFailure(format!("eigensolver did not converge: {e}")))?;
    let d_norm = inf_norm(d);
    let tau = tol.tau_cluster(d_norm);

    // Union-find over all pairs; k is tiny so the quadratic scan is fine.
    let k = vals.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if (vals[i] - vals[j]).norm() <= tau {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|i| vals[*i]).sum::<Complex64>() / g.len() as f64;
        let shifted = d - &(CMat::eye(k) * mean);
        let (basis, margin) = null_basis(&shifted, tol.tau_rank(d_norm))?;
        clusters.push(EigenCluster {
            value: mean,
            algebraic: g.len(),
            geometric: basis.len(),
            basis,
            margin,
        });
    }
    clusters.sort_by(|a, b| {
        b.value
            .re
            .total_cmp(&a.value.re)
            .then(b.value.im.total_cmp(&a.value.im))
    });
    Ok(Eigensystem {
        clusters,
        d_norm,
        size: k,
    })
}

/// Decide whether an eigensystem admits a real diagonal form. A cluster is
/// complex when the centroid imaginary part survives the realness threshold
/// (centroids, not raw values: defective real eigenvalues split symmetrically
/// into the complex plane, and the centroid cancels that). Complex verdicts
/// win over defective ones.
pub fn classify_system(sys: &Eigensystem, tol: &Tolerances) -> Classification {
    let tau = tol.tau_real(sys.d_norm);
    let mut worst: Option<&EigenCluster> = None;
    for c in &sys.clusters {
        if c.value.im.abs() > tau {
            if worst.map_or(true, |w| c.value.im.abs() > w.value.im.abs()) {
                worst = Some(c);
            }
        }
    }
    if let Some(c) = worst {
        return Classification::ComplexSpectrum {
            witness: c.value,
            margin: c.value.im.abs() / tau,
        };
    }
    for c in &sys.clusters {
        if c.geometric < c.algebraic {
            return Classification::Defective {
                omega: c.value.re,
                algebraic: c.algebraic,
                geometric: c.geometric,
                margin: c.margin,
            };
        }
    }
    Classification::PhysicallyDiagonalizable
}

pub fn classify(d: &CMat, tol: &Tolerances) -> Result<Classification> {
    Ok(classify_system(&eigen_decompose(d, tol)?, tol))
}

/// How the `-omega` partner of an eigenvector is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartnerRule {
    /// Conjugate and swap the two halves; ladder-operator fields.
    ConjugateSwap,
    /// Plain entrywise conjugate; coordinate fields.
    PlainConjugate,
}

/// Apply the partner involution to a vector.
pub fn apply_partner(rule: PartnerRule, v: &CVec) -> CVec {
    match rule {
        PartnerRule::PlainConjugate => v.mapv(|z| z.conj()),
        PartnerRule::ConjugateSwap => {
            let n = v.len() / 2;
            let mut w = CVec::zeros(v.len());
            for i in 0..n {
                w[i] = v[n + i].conj();
                w[n + i] = v[i].conj();
            }
            w
        }
    }
}

/// A matched (+omega, -omega) mode pair. `minus` is always the involution
/// image of `plus`, so the partner convention holds exactly by construction.
#[derive(Clone, Debug)]
pub struct ModePair {
    /// Nonnegative; exactly `0.0` for the zero cluster.
    pub omega: f64,
    pub plus: CVec,
    pub minus: CVec,
    /// Pairs sharing a cluster id came from one eigenvalue cluster and must
    /// be orthonormalized together.
    pub cluster: usize,
}

fn check_eigen_residual(d: &CMat, v: &CVec, omega: f64, d_norm: f64, tol: &Tolerances) -> Result<()> {
    let r = d.dot(v) - &v.mapv(|z| z * omega);
    let bound = tol.tau_residual(d_norm * vec_norm(v));
    if vec_norm(&r) > bound {
        return Err(Error::SolverFailure(format!(
            "eigenpair residual {:.3e} exceeds {:.3e} at omega {omega:.6}",
            vec_norm(&r),
            bound
        )));
    }
    Ok(())
}

/// Zero-space pairing for ladder fields: pick coordinate pairs `(i, n+i)` on
/// which the null basis stays invertible, renormalize the basis so those rows
/// form an identity block, and generate partners by the involution.
fn pair_zero_swap(
    d: &CMat,
    basis: &[CVec],
    d_norm: f64,
    tol: &Tolerances,
) -> Result<Vec<(CVec, CVec)>> {
    let dim = basis.len();
    let m = dim / 2;
    let size = d.nrows();
    let n = size / 2;
    let mut b = CMat::zeros((size, dim));
    for (j, v) in basis.iter().enumerate() {
        b.column_mut(j).assign(v);
    }
    let mut selected: Vec<usize> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if selected.contains(&i) {
                continue;
            }
            let mut rows = Vec::with_capacity(2 * (selected.len() + 1));
            for s in selected.iter().chain(std::iter::once(&i)) {
                rows.push(*s);
                rows.push(n + *s);
            }
            let sub = b.select(ndarray::Axis(0), &rows);
            let (_, s, _) = sub
                .svd(false, false)
                .map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e}")))?;
            let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
            if best.map_or(true, |(_, bs)| smin > bs) {
                best = Some((i, smin));
            }
        }
        let (pick, smin) = best.expect("candidate positions remain");
        if smin <= tol.tau_rank(1.0) {
            return Err(Error::PairingFailure(format!(
                "zero modes admit no invertible restriction to coordinate pairs \
                 (best conditioning {smin:.3e})"
            )));
        }
        selected.push(pick);
    }
    let mut rows = Vec::with_capacity(dim);
    for s in &selected {
        rows.push(*s);
    }
    for s in &selected {
        rows.push(n + *s);
    }
    let c = b.select(ndarray::Axis(0), &rows);
    let cinv = c
        .inv()
        .map_err(|e| Error::SolverFailure(format!("restriction not invertible: {e}")))?;
    let w = b.dot(&cinv);
    let mut pairs = Vec::with_capacity(m);
    for l in 0..m {
        let plus = w.column(l).to_owned();
        let minus = apply_partner(PartnerRule::ConjugateSwap, &plus);
        check_eigen_residual(d, &plus, 0.0, d_norm, tol)?;
        check_eigen_residual(d, &minus, 0.0, d_norm, tol)?;
        pairs.push((plus, minus));
    }
    Ok(pairs)
}

/// Zero-space pairing for coordinate fields: extract a real orthonormal basis
/// of the (conjugation-closed) null space and join it into conjugate pairs.
fn pair_zero_conj(
    d: &CMat,
    basis: &[CVec],
    d_norm: f64,
    tol: &Tolerances,
) -> Result<Vec<(CVec, CVec)>> {
    let dim = basis.len();
    let m = dim / 2;
    let size = d.nrows();
    let mut x = Array2::<f64>::zeros((size, 2 * dim));
    for (j, v) in basis.iter().enumerate() {
        for i in 0..size {
            x[(i, j)] = v[i].re;
            x[(i, dim + j)] = v[i].im;
        }
    }
    let (u, s, _) = x
        .svd(true, false)
        .map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e}")))?;
    let u = u.expect("requested left singular vectors");
    let rank = s.iter().filter(|v| **v > tol.tau_rank(1.0)).count();
    if rank != dim {
        return Err(Error::PairingFailure(format!(
            "real span of the zero space has dimension {rank}, expected {dim}"
        )));
    }
    let mut pairs = Vec::with_capacity(m);
    for l in 0..m {
        let mut plus = CVec::zeros(size);
        for i in 0..size {
            plus[i] = Complex64::new(u[(i, l)], u[(i, m + l)]);
        }
        let minus = apply_partner(PartnerRule::PlainConjugate, &plus);
        check_eigen_residual(d, &plus, 0.0, d_norm, tol)?;
        check_eigen_residual(d, &minus, 0.0, d_norm, tol)?;
        pairs.push((plus, minus));
    }
    Ok(pairs)
}

/// Pair every mode of a physically diagonalizable system with its `-omega`
/// partner. Positive clusters keep their eigenbasis; negative eigenvectors
/// are discarded and regenerated by the involution so the partner convention
/// is exact. Returns exactly `size/2` pairs sorted by descending omega.
pub fn pair_modes(
    sys: &Eigensystem,
    d: &CMat,
    rule: PartnerRule,
    tol: &Tolerances,
) -> Result<Vec<ModePair>> {
    let tau_c = tol.tau_cluster(sys.d_norm);
    let tau_r = tol.tau_real(sys.d_norm);
    for c in &sys.clusters {
        if c.value.im.abs() > tau_r {
            return Err(Error::PairingFailure(format!(
                "cluster at {} is not real; classify before pairing",
                c.value
            )));
        }
        if c.geometric < c.algebraic {
            return Err(Error::PairingFailure(format!(
                "cluster at {} is defective; classify before pairing",
                c.value
            )));
        }
    }

    let mut zero_alg = 0usize;
    let mut plus_clusters: Vec<&EigenCluster> = Vec::new();
    let mut minus_clusters: Vec<&EigenCluster> = Vec::new();
    for c in &sys.clusters {
        if c.value.re.abs() <= tau_c {
            zero_alg += c.algebraic;
        } else if c.value.re > 0.0 {
            plus_clusters.push(c);
        } else {
            minus_clusters.push(c);
        }
    }

    let mut pairs: Vec<ModePair> = Vec::new();
    let mut matched = vec![false; minus_clusters.len()];
    for (id, p) in plus_clusters.iter().enumerate() {
        // Centroids of the two clusters jitter independently, so allow twice
        // the clustering radius when matching them.
        let mut found: Option<usize> = None;
        for (j, mc) in minus_clusters.iter().enumerate() {
            if !matched[j] && (mc.value.re + p.value.re).abs() <= 2.0 * tau_c {
                found = Some(j);
                break;
            }
        }
        let j = found.ok_or_else(|| {
            Error::PairingFailure(format!(
                "eigenvalue {:.6} has no partner at {:.6}",
                p.value.re, -p.value.re
            ))
        })?;
        matched[j] = true;
        let m = minus_clusters[j];
        if m.algebraic != p.algebraic || m.geometric != p.geometric {
            return Err(Error::PairingFailure(format!(
                "multiplicity mismatch between +-{:.6}: {} vs {} eigenvectors",
                p.value.re, p.geometric, m.geometric
            )));
        }
        let omega = 0.5 * (p.value.re - m.value.re);
        for v in &p.basis {
            let minus_v = apply_partner(rule, v);
            check_eigen_residual(d, v, omega, sys.d_norm, tol)?;
            check_eigen_residual(d, &minus_v, -omega, sys.d_norm, tol)?;
            pairs.push(ModePair {
                omega,
                plus: v.clone(),
                minus: minus_v,
                cluster: id,
            });
        }
    }
    if let Some(j) = matched.iter().position(|m| !m) {
        return Err(Error::PairingFailure(format!(
            "eigenvalue {:.6} has no positive partner",
            minus_clusters[j].value.re
        )));
    }

    if zero_alg > 0 {
        if zero_alg % 2 != 0 {
            return Err(Error::PairingFailure(format!(
                "zero eigenspace has odd dimension {zero_alg}"
            )));
        }
        // Zero-adjacent clusters may have split; rebuild the space from D
        // itself so the basis is one coherent set.
        let (basis, _) = null_basis(d, tol.tau_rank(sys.d_norm))?;
        if basis.len() != zero_alg {
            return Err(Error::PairingFailure(format!(
                "zero space is defective: {} eigenvectors for multiplicity {zero_alg}",
                basis.len()
            )));
        }
        let zero_pairs = match rule {
            PartnerRule::ConjugateSwap => pair_zero_swap(d, &basis, sys.d_norm, tol)?,
            PartnerRule::PlainConjugate => pair_zero_conj(d, &basis, sys.d_norm, tol)?,
        };
        let id = plus_clusters.len();
        for (plus, minus) in zero_pairs {
            pairs.push(ModePair {
                omega: 0.0,
                plus,
                minus,
                cluster: id,
            });
        }
    }

    if 2 * pairs.len() != sys.size {
        return Err(Error::PairingFailure(format!(
            "{} pairs cover {} of {} field components",
            pairs.len(),
            2 * pairs.len(),
            sys.size
        )));
    }
    pairs.sort_by(|a, b| b.omega.total_cmp(&a.omega).then(a.cluster.cmp(&b.cluster)));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::dynamic_matrix;
    use crate::form::{BosonForm, CoordForm, QuadraticForm};
    use crate::matrix::c64;
    use ndarray::array;

    fn boson(alpha: f64, gamma: f64) -> QuadraticForm {
        BosonForm::new(array![[c64(alpha, 0.0)]], array![[c64(gamma, 0.0)]])
            .unwrap()
            .into()
    }

    #[test]
    fn stable_single_mode_splits_into_two_clusters() {
        let dm = dynamic_matrix(&boson(5.0, 3.0));
        let tol = Tolerances::default();
        let sys = eigen_decompose(&dm.d, &tol).unwrap();
        assert_eq!(sys.clusters.len(), 2);
        assert!((sys.clusters[0].value.re - 4.0).abs() < 1e-12);
        assert!((sys.clusters[1].value.re + 4.0).abs() < 1e-12);
        assert_eq!(classify_system(&sys, &tol), Classification::PhysicallyDiagonalizable);
        let pairs = pair_modes(&sys, &dm.d, PartnerRule::ConjugateSwap, &tol).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].omega - 4.0).abs() < 1e-12);
        // Partner convention: minus is the conjugate-swapped plus.
        assert_eq!(pairs[0].minus[0], pairs[0].plus[1].conj());
    }

    #[test]
    fn critical_single_mode_is_defective() {
        let dm = dynamic_matrix(&boson(1.0, 1.0));
        let tol = Tolerances::default();
        match classify(&dm.d, &tol).unwrap() {
            Classification::Defective {
                omega,
                algebraic,
                geometric,
                ..
            } => {
                assert!(omega.abs() < 1e-9);
                assert_eq!((algebraic, geometric), (2, 1));
            }
            other => panic!("expected defective, got {other:?}"),
        }
    }

    #[test]
    fn overcritical_single_mode_has_complex_spectrum() {
        let dm = dynamic_matrix(&boson(1.0, 3.0));
        let tol = Tolerances::default();
        match classify(&dm.d, &tol).unwrap() {
            Classification::ComplexSpectrum { witness, .. } => {
                assert!((witness.im.abs() - 8.0f64.sqrt()).abs() < 1e-9);
            }
            other => panic!("expected complex spectrum, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_coupled_pair_forms_one_cluster_per_sign() {
        let a = 3.0;
        let g = 2.0;
        let alpha = array![[c64(a, 0.0), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(a, 0.0)]];
        let gamma = array![[c64(0.0, 0.0), c64(g, 0.0)], [c64(g, 0.0), c64(0.0, 0.0)]];
        let form: QuadraticForm = BosonForm::new(alpha, gamma).unwrap().into();
        let dm = dynamic_matrix(&form);
        let tol = Tolerances::default();
        let sys = eigen_decompose(&dm.d, &tol).unwrap();
        assert_eq!(sys.clusters.len(), 2);
        assert_eq!(sys.clusters[0].algebraic, 2);
        assert_eq!(sys.clusters[0].geometric, 2);
        let om = (a * a - g * g as f64).sqrt();
        let pairs = pair_modes(&sys, &dm.d, PartnerRule::ConjugateSwap, &tol).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!((p.omega - om).abs() < 1e-9);
        }
    }

    #[test]
    fn ladder_zero_modes_pair_by_unit_restriction() {
        // Two hopping-coupled modes with a flat direction: spectrum {2, 0}.
        let alpha = array![[c64(1.0, 0.0), c64(-1.0, 0.0)], [c64(-1.0, 0.0), c64(1.0, 0.0)]];
        let form: QuadraticForm = BosonForm::new(alpha, CMat::zeros((2, 2))).unwrap().into();
        let dm = dynamic_matrix(&form);
        let tol = Tolerances::default();
        let sys = eigen_decompose(&dm.d, &tol).unwrap();
        let pairs = pair_modes(&sys, &dm.d, PartnerRule::ConjugateSwap, &tol).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].omega - 2.0).abs() < 1e-12);
        assert_eq!(pairs[1].omega, 0.0);
        let z = &pairs[1].plus;
        // The normalized zero vector carries a unit entry on the selected
        // position and zero on that position's partner slot.
        let n = 2;
        let hit: Vec<usize> = (0..n)
            .filter(|i| (z[*i] - c64(1.0, 0.0)).norm() < 1e-9 && z[n + i].norm() < 1e-9)
            .collect();
        assert!(!hit.is_empty());
        assert_eq!(pairs[1].minus, apply_partner(PartnerRule::ConjugateSwap, z));
    }

    #[test]
    fn coordinate_zero_modes_pair_by_conjugation() {
        // An oscillator plus a fully decoupled coordinate pair.
        let mu = array![[1.0, 0.0], [0.0, 0.0]];
        let kappa = array![[1.0, 0.0], [0.0, 0.0]];
        let form: QuadraticForm = CoordForm::standard(mu, kappa, Array2::zeros((2, 2)))
            .unwrap()
            .into();
        let dm = dynamic_matrix(&form);
        let tol = Tolerances::default();
        let sys = eigen_decompose(&dm.d, &tol).unwrap();
        let pairs = pair_modes(&sys, &dm.d, PartnerRule::PlainConjugate, &tol).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].omega - 1.0).abs() < 1e-12);
        assert_eq!(pairs[1].omega, 0.0);
        let z = &pairs[1].plus;
        assert_eq!(pairs[1].minus, z.mapv(|v| v.conj()));
        // Real and imaginary parts are distinct null directions.
        assert!(vec_norm(&z.mapv(|v| c64(v.re, 0.0))) > 1e-9);
        assert!(vec_norm(&z.mapv(|v| c64(v.im, 0.0))) > 1e-9);
    }

    #[test]
    fn odd_zero_space_is_rejected() {
        let mut d = CMat::zeros((2, 2));
        d[(0, 0)] = c64(1.0, 0.0);
        d[(1, 1)] = c64(-1.0, 0.0);
        // Hand-built system claiming a 1-dimensional zero cluster.
        let sys = Eigensystem {
            clusters: vec![EigenCluster {
                value: c64(0.0, 0.0),
                algebraic: 1,
                geometric: 1,
                basis: vec![array![c64(1.0, 0.0), c64(0.0, 0.0)]],
                margin: 1.0,
            }],
            d_norm: 1.0,
            size: 2,
        };
        let tol = Tolerances::default();
        match pair_modes(&sys, &d, PartnerRule::ConjugateSwap, &tol) {
            Err(Error::PairingFailure(msg)) => assert!(msg.contains("odd")),
            other => panic!("expected pairing failure, got {other:?}"),
        }
    }

    #[test]
    fn unpartnered_eigenvalue_is_rejected() {
        let mut d = CMat::zeros((2, 2));
        d[(0, 0)] = c64(1.0, 0.0);
        d[(1, 1)] = c64(2.0, 0.0);
        let tol = Tolerances::default();
        let sys = eigen_decompose(&d, &tol).unwrap();
        assert!(matches!(
            pair_modes(&sys, &d, PartnerRule::ConjugateSwap, &tol),
            Err(Error::PairingFailure(_))
        ));
    }
}
