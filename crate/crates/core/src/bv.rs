//! Assembly of the diagonalizing transformations for ladder-operator fields:
//! the full route over the dynamic matrix, the fast paths for pairing-free
//! forms, the reduced routes for two-family pairing forms, and the
//! verification report that re-checks every claimed identity.

use ndarray::{s, Array1};
use num_complex::Complex64;

use crate::dynamics::dynamic_matrix;
use crate::error::{Error, Result};
use crate::form::{
    assemble_coefficient_matrix, canonical_metric, BosonForm, FermionForm, FormKind, PairingForm,
    QuadraticForm, Statistics,
};
use crate::gramschmidt::{orthonormalize_cluster, orthonormalize_zero_space, NormalizedVector};
use crate::matrix::{adjoint, herm_dev, inf_norm, lex_cmp, max_abs, phase_fix, CMat, CVec};
use crate::spectral::{
    apply_partner, classify_system, eigen_decompose, Classification, ModePair, PartnerRule,
};
use crate::tol::Tolerances;

/// Presentation of one excitation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeTag {
    /// Ordinary particle mode.
    Normal,
    /// Reported after a `d <-> d'` relabeling; the raw coefficient was the
    /// negative of the reported omega.
    HoleTransformed,
    /// Bosonic mode kept with its negative omega; compatible with a
    /// time-polarized relabeling but none is applied.
    TimePolarized,
}

#[derive(Clone, Copy, Debug)]
pub struct Mode {
    pub omega: f64,
    pub tag: ModeTag,
}

/// Result of a diagonalization. For ladder and coordinate routes `t` is the
/// 2n x 2n transformation (2n x 2k when a coordinate problem is partially
/// diagonalized) and `modes` lists one entry per mode pair; for pairing
/// routes `t` is the reduced 2n x 2n matrix and `modes` has 2n entries.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub t: CMat,
    pub modes: Vec<Mode>,
    pub constant: f64,
    /// Conserved zero-frequency operators left undiagonalized, as real
    /// coefficient vectors over the original field; empty unless a
    /// coordinate problem was partially diagonalized.
    pub residual: Vec<Array1<f64>>,
    pub kind: FormKind,
}

impl Diagonalization {
    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }
}

fn bosonic_tag(omega: f64) -> ModeTag {
    if omega < 0.0 {
        ModeTag::TimePolarized
    } else {
        ModeTag::Normal
    }
}

fn tag_rank(t: ModeTag) -> u8 {
    match t {
        ModeTag::Normal => 0,
        ModeTag::HoleTransformed => 1,
        ModeTag::TimePolarized => 2,
    }
}

/// One side of the transformation before assembly.
pub(crate) struct LeftColumn {
    pub omega: f64,
    pub tag: ModeTag,
    pub v: CVec,
}

/// Phase-fix, order by descending omega (ties by tag then lexicographically),
/// and mirror through the involution into the full transformation.
pub(crate) fn assemble_involution_transform(
    mut left: Vec<LeftColumn>,
    rule: PartnerRule,
    dim: usize,
) -> (CMat, Vec<Mode>) {
    for c in left.iter_mut() {
        c.v = phase_fix(&c.v);
    }
    left.sort_by(|a, b| {
        b.omega
            .total_cmp(&a.omega)
            .then(tag_rank(a.tag).cmp(&tag_rank(b.tag)))
            .then(lex_cmp(&a.v, &b.v))
    });
    let k = left.len();
    let mut t = CMat::zeros((dim, 2 * k));
    let mut modes = Vec::with_capacity(k);
    for (j, c) in left.iter().enumerate() {
        t.column_mut(j).assign(&c.v);
        t.column_mut(k + j).assign(&apply_partner(rule, &c.v));
        modes.push(Mode {
            omega: c.omega,
            tag: c.tag,
        });
    }
    (t, modes)
}

/// Group mode pairs that came from one eigenvalue cluster.
pub(crate) fn group_pairs(pairs: Vec<ModePair>) -> Vec<(f64, Vec<CVec>)> {
    let mut groups: Vec<(usize, f64, Vec<CVec>)> = Vec::new();
    for p in pairs {
        match groups.last_mut() {
            Some((id, _, vs)) if *id == p.cluster => vs.push(p.plus),
            _ => groups.push((p.cluster, p.omega, vec![p.plus])),
        }
    }
    groups.into_iter().map(|(_, om, vs)| (om, vs)).collect()
}

/// Full route shared by boson and fermion forms: spectrum, classification,
/// pairing, per-cluster orthonormalization, transformation assembly.
fn full_ladder_route(form: &QuadraticForm, tol: &Tolerances) -> Result<Diagonalization> {
    let dm = dynamic_matrix(form);
    let sys = eigen_decompose(&dm.d, tol)?;
    match classify_system(&sys, tol) {
        Classification::PhysicallyDiagonalizable => {}
        other => return Err(Error::NotDiagonalizable(other)),
    }
    let fermionic = matches!(form, QuadraticForm::Fermion(_));
    let pairs = crate::spectral::pair_modes(&sys, &dm.d, PartnerRule::ConjugateSwap, tol)?;
    let mut left: Vec<LeftColumn> = Vec::with_capacity(pairs.len());
    for (omega, basis) in group_pairs(pairs) {
        if omega == 0.0 {
            let zp = orthonormalize_zero_space(&basis, &dm.g, PartnerRule::ConjugateSwap, tol)?;
            for (a, _) in zp {
                left.push(LeftColumn {
                    omega: 0.0,
                    tag: ModeTag::Normal,
                    v: a.v,
                });
            }
        } else {
            for w in orthonormalize_cluster(&basis, &dm.g, tol)? {
                if fermionic && w.norm != 1 {
                    return Err(Error::SolverFailure(
                        "negative norm under a definite metric".into(),
                    ));
                }
                if w.norm == 1 {
                    left.push(LeftColumn {
                        omega,
                        tag: if fermionic { ModeTag::Normal } else { bosonic_tag(omega) },
                        v: w.v,
                    });
                } else {
                    // The +1-norm member of this pair is the partner, which
                    // carries eigenvalue -omega.
                    left.push(LeftColumn {
                        omega: -omega,
                        tag: bosonic_tag(-omega),
                        v: apply_partner(PartnerRule::ConjugateSwap, &w.v),
                    });
                }
            }
        }
    }
    let (t, modes) = assemble_involution_transform(left, PartnerRule::ConjugateSwap, sys.size);
    let half_sum: f64 = 0.5 * modes.iter().map(|m| m.omega).sum::<f64>();
    let constant = if fermionic {
        -half_sum + dm.offset
    } else {
        half_sum + dm.offset
    };
    Ok(Diagonalization {
        t,
        modes,
        constant,
        residual: Vec::new(),
        kind: dm.kind,
    })
}

pub fn diagonalize_boson(form: &BosonForm, tol: &Tolerances) -> Result<Diagonalization> {
    full_ladder_route(&QuadraticForm::Boson(form.clone()), tol)
}

pub fn diagonalize_fermion(form: &FermionForm, tol: &Tolerances) -> Result<Diagonalization> {
    full_ladder_route(&QuadraticForm::Fermion(form.clone()), tol)
}

/// Eigendecomposition of a Hermitian block with phase-fixed columns,
/// validated for symmetry.
fn hermitian_modes(alpha: &CMat, tol: &Tolerances) -> Result<(Vec<f64>, Vec<CVec>)> {
    use ndarray_linalg::{Eigh, UPLO};
    let dev = herm_dev(alpha);
    if dev > tol.tau_struct(max_abs(alpha)) {
        return Err(Error::StructuralViolation(format!(
            "matrix must be Hermitian (deviation {dev:.3e})"
        )));
    }
    let (vals, vecs) = alpha
        .eigh(UPLO::Lower)
        .map_err(|e| Error::SolverFailure(format!("Hermitian eigensolver failed: {e}")))?;
    // The bound solver hands back conjugated columns; undo that.
    let cols = (0..vals.len())
        .map(|j| phase_fix(&vecs.column(j).mapv(|z| z.conj())))
        .collect();
    Ok((vals.to_vec(), cols))
}

/// Fast path for pairing-free forms: a unitary rotation of the mode basis.
/// Bosons keep eigenvalues as they are; fermionic negative eigenvalues are
/// relabeled to positive-energy holes and shift the constant.
pub fn diagonalize_normal(
    alpha: &CMat,
    statistics: Statistics,
    tol: &Tolerances,
) -> Result<Diagonalization> {
    let (vals, cols) = hermitian_modes(alpha, tol)?;
    let n = vals.len();
    struct Entry {
        omega: f64,
        tag: ModeTag,
        raw_negative: bool,
        v: CVec,
    }
    let mut entries: Vec<Entry> = Vec::with_capacity(n);
    let mut constant = 0.0;
    for (lam, v) in vals.iter().zip(cols) {
        match statistics {
            Statistics::Bose => entries.push(Entry {
                omega: *lam,
                tag: bosonic_tag(*lam),
                raw_negative: false,
                v,
            }),
            Statistics::Fermi => {
                if *lam < 0.0 {
                    constant += *lam;
                    entries.push(Entry {
                        omega: -*lam,
                        tag: ModeTag::HoleTransformed,
                        raw_negative: true,
                        v,
                    });
                } else {
                    entries.push(Entry {
                        omega: *lam,
                        tag: ModeTag::Normal,
                        raw_negative: false,
                        v,
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| {
        b.omega
            .total_cmp(&a.omega)
            .then(tag_rank(a.tag).cmp(&tag_rank(b.tag)))
            .then(lex_cmp(&a.v, &b.v))
    });
    let mut t = CMat::zeros((2 * n, 2 * n));
    let mut modes = Vec::with_capacity(n);
    for (j, e) in entries.iter().enumerate() {
        if e.raw_negative {
            // Hole column: the new mode annihilates into the conjugate half.
            t.slice_mut(s![..n, n + j]).assign(&e.v);
            t.slice_mut(s![n.., j]).assign(&e.v.mapv(|z| z.conj()));
        } else {
            t.slice_mut(s![..n, j]).assign(&e.v);
            t.slice_mut(s![n.., n + j]).assign(&e.v.mapv(|z| z.conj()));
        }
        modes.push(Mode {
            omega: e.omega,
            tag: e.tag,
        });
    }
    Ok(Diagonalization {
        t,
        modes,
        constant,
        residual: Vec::new(),
        kind: match statistics {
            Statistics::Bose => FormKind::Boson,
            Statistics::Fermi => FormKind::Fermion,
        },
    })
}

/// Reduced route for two-family pairing forms. The bosonic case solves the
/// 2n problem under `diag(I, -I)` without any involution constraint,
/// reorders by metric norm, and relabels the negative-norm half through
/// `f = e'`; the fermionic case is a plain Hermitian rotation of the 2n
/// modes with particle-hole bookkeeping.
pub fn diagonalize_pairing(form: &PairingForm, tol: &Tolerances) -> Result<Diagonalization> {
    let wrapped = QuadraticForm::Pairing(form.clone());
    let coeff = assemble_coefficient_matrix(&wrapped);
    let n = form.n();
    match form.statistics() {
        Statistics::Fermi => {
            let (vals, cols) = hermitian_modes(&coeff.m, tol)?;
            struct Entry {
                omega: f64,
                tag: ModeTag,
                v: CVec,
            }
            let mut constant = coeff.offset;
            let mut entries: Vec<Entry> = Vec::with_capacity(2 * n);
            for (lam, v) in vals.iter().zip(cols) {
                if *lam < 0.0 {
                    constant += *lam;
                    entries.push(Entry {
                        omega: -*lam,
                        tag: ModeTag::HoleTransformed,
                        v,
                    });
                } else {
                    entries.push(Entry {
                        omega: *lam,
                        tag: ModeTag::Normal,
                        v,
                    });
                }
            }
            entries.sort_by(|a, b| {
                b.omega
                    .total_cmp(&a.omega)
                    .then(tag_rank(a.tag).cmp(&tag_rank(b.tag)))
                    .then(lex_cmp(&a.v, &b.v))
            });
            let mut t = CMat::zeros((2 * n, 2 * n));
            let mut modes = Vec::with_capacity(2 * n);
            for (j, e) in entries.iter().enumerate() {
                t.column_mut(j).assign(&e.v);
                modes.push(Mode {
                    omega: e.omega,
                    tag: e.tag,
                });
            }
            Ok(Diagonalization {
                t,
                modes,
                constant,
                residual: Vec::new(),
                kind: FormKind::PairingFermi,
            })
        }
        Statistics::Bose => {
            let metric = canonical_metric(&wrapped);
            let dm = crate::dynamics::build_dynamic_matrix(&coeff, &metric)?;
            let sys = eigen_decompose(&dm.d, tol)?;
            match classify_system(&sys, tol) {
                Classification::PhysicallyDiagonalizable => {}
                other => return Err(Error::NotDiagonalizable(other)),
            }
            let mut cols: Vec<(f64, NormalizedVector)> = Vec::with_capacity(2 * n);
            for cluster in &sys.clusters {
                for w in orthonormalize_cluster(&cluster.basis, &dm.g, tol)? {
                    cols.push((cluster.value.re, w));
                }
            }
            let plus = cols.iter().filter(|(_, w)| w.norm == 1).count();
            if plus != n {
                return Err(Error::PairingFailure(format!(
                    "metric signature of the eigenbasis is {plus}+/{}-, expected {n}/{n}",
                    cols.len() - plus
                )));
            }
            for (_, w) in cols.iter_mut() {
                w.v = phase_fix(&w.v);
            }
            cols.sort_by(|(oa, wa), (ob, wb)| {
                wb.norm
                    .cmp(&wa.norm)
                    .then(ob.total_cmp(oa))
                    .then(lex_cmp(&wa.v, &wb.v))
            });
            let mut t = CMat::zeros((2 * n, 2 * n));
            let mut modes = Vec::with_capacity(2 * n);
            let mut constant = coeff.offset;
            for (j, (raw, w)) in cols.iter().enumerate() {
                t.column_mut(j).assign(&w.v);
                if w.norm == 1 {
                    modes.push(Mode {
                        omega: *raw,
                        tag: bosonic_tag(*raw),
                    });
                } else {
                    // Back-transform the negative-norm half: f = e'.
                    modes.push(Mode {
                        omega: -*raw,
                        tag: ModeTag::HoleTransformed,
                    });
                    constant -= *raw;
                }
            }
            Ok(Diagonalization {
                t,
                modes,
                constant,
                residual: Vec::new(),
                kind: FormKind::PairingBose,
            })
        }
    }
}

/// Residuals of every identity a diagonalization claims. Informational:
/// this never fails, it reports.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// `|T' G T - G_out|`, absolute.
    pub metric_residual: f64,
    /// Largest off-diagonal entry of `T' M T`, relative to `1 + |M|`.
    pub congruence_offdiag: f64,
    /// Largest deviation of `diag(T' M T)` from the reported omegas,
    /// relative to `1 + |M|`.
    pub congruence_diag: f64,
    /// Largest off-diagonal entry of `T^+ D T`, relative to `1 + |D|`.
    pub similarity_offdiag: f64,
    /// Deviation of T from its involution shape, when the route has one.
    pub involution_residual: Option<f64>,
    /// `|(T')^-1 diag (T)^-1 - M|` relative to `1 + |M|`; square T only.
    pub reconstruction_residual: f64,
    /// Largest `|c' D|` over residual conserved modes, relative.
    pub residual_invariance: Option<f64>,
}

impl VerificationReport {
    /// The single worst relative residual.
    pub fn worst(&self) -> f64 {
        let mut w = self
            .metric_residual
            .max(self.congruence_offdiag)
            .max(self.congruence_diag)
            .max(self.similarity_offdiag)
            .max(self.reconstruction_residual);
        if let Some(x) = self.involution_residual {
            w = w.max(x);
        }
        if let Some(x) = self.residual_invariance {
            w = w.max(x);
        }
        w
    }
}

/// Expected diagonal of `T' M T` in column order.
fn expected_congruence_diag(diag: &Diagonalization) -> Vec<f64> {
    match diag.kind {
        FormKind::Boson | FormKind::Coord => {
            let o: Vec<f64> = diag.modes.iter().map(|m| m.omega).collect();
            o.iter().chain(o.iter()).copied().collect()
        }
        FormKind::Fermion => diag
            .modes
            .iter()
            .map(|m| m.omega)
            .chain(diag.modes.iter().map(|m| -m.omega))
            .collect(),
        FormKind::PairingBose => diag.modes.iter().map(|m| m.omega).collect(),
        FormKind::PairingFermi => diag
            .modes
            .iter()
            .map(|m| match m.tag {
                ModeTag::HoleTransformed => -m.omega,
                _ => m.omega,
            })
            .collect(),
    }
}

/// Output metric of a transformation: `diag(I_k, -I_k)` for indefinite
/// routes, the identity for fermionic ones.
fn output_metric(kind: FormKind, cols: usize) -> CMat {
    let k = cols / 2;
    let mut g = CMat::zeros((cols, cols));
    for i in 0..cols {
        let sign = match kind {
            FormKind::Fermion | FormKind::PairingFermi => 1.0,
            _ => {
                if i < k {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        g[(i, i)] = Complex64::new(sign, 0.0);
    }
    g
}

pub fn verify(diag: &Diagonalization, form: &QuadraticForm, tol: &Tolerances) -> VerificationReport {
    let _ = tol;
    let coeff = assemble_coefficient_matrix(form);
    let metric = canonical_metric(form);
    let g_in = metric.matrix();
    let dim = coeff.m.nrows();
    let t = &diag.t;
    // A fully held-back system carries an empty transform; its checks are
    // vacuous and must report clean, not mismatched.
    if t.nrows() != dim || t.ncols() % 2 != 0 {
        return VerificationReport {
            metric_residual: f64::INFINITY,
            congruence_offdiag: f64::INFINITY,
            congruence_diag: f64::INFINITY,
            similarity_offdiag: f64::INFINITY,
            involution_residual: None,
            reconstruction_residual: f64::INFINITY,
            residual_invariance: None,
        };
    }
    let cols = t.ncols();
    let td = adjoint(t);
    let g_out = output_metric(diag.kind, cols);
    let m_scale = 1.0 + max_abs(&coeff.m);

    let metric_residual = max_abs(&(&td.dot(&g_in).dot(t) - &g_out));

    let congr = td.dot(&coeff.m).dot(t);
    let expected = expected_congruence_diag(diag);
    let mut offdiag: f64 = 0.0;
    let mut diag_dev: f64 = 0.0;
    for i in 0..cols {
        for j in 0..cols {
            if i == j {
                let e = expected.get(i).copied().unwrap_or(f64::NAN);
                diag_dev = diag_dev.max((congr[(i, i)] - Complex64::new(e, 0.0)).norm());
            } else {
                offdiag = offdiag.max(congr[(i, j)].norm());
            }
        }
    }

    let d = g_in.dot(&coeff.m);
    let d_scale = 1.0 + inf_norm(&d);
    // T' G_in T = G_out makes G_out^-1 T' G_in a left inverse of T.
    let t_left_inv = g_out.dot(&td).dot(&g_in);
    let sim = t_left_inv.dot(&d).dot(t);
    let mut sim_offdiag: f64 = 0.0;
    for i in 0..cols {
        for j in 0..cols {
            if i != j {
                sim_offdiag = sim_offdiag.max(sim[(i, j)].norm());
            }
        }
    }

    let involution_residual = match diag.kind {
        FormKind::Boson | FormKind::Fermion => {
            let k = cols / 2;
            let tc = t.mapv(|z| z.conj());
            let mut dev: f64 = 0.0;
            for i in 0..dim {
                for j in 0..cols {
                    // (Sigma_x T* Sigma_x)[i, j] swaps both halves.
                    let si = if i < dim / 2 { i + dim / 2 } else { i - dim / 2 };
                    let sj = if j < k { j + k } else { j - k };
                    dev = dev.max((tc[(si, sj)] - t[(i, j)]).norm());
                }
            }
            Some(dev / (1.0 + max_abs(t)))
        }
        FormKind::Coord => {
            let k = cols / 2;
            let tc = t.mapv(|z| z.conj());
            let mut dev: f64 = 0.0;
            for i in 0..dim {
                for j in 0..cols {
                    let sj = if j < k { j + k } else { j - k };
                    dev = dev.max((tc[(i, j)] - t[(i, sj)]).norm());
                }
            }
            Some(dev / (1.0 + max_abs(t)))
        }
        _ => None,
    };

    let reconstruction_residual = if cols == dim {
        use ndarray_linalg::Inverse;
        match (t.inv(), adjoint(t).inv()) {
            (Ok(tinv), Ok(tdinv)) => {
                let mut lam = CMat::zeros((dim, dim));
                for (i, e) in expected.iter().enumerate() {
                    lam[(i, i)] = Complex64::new(*e, 0.0);
                }
                let rec = tdinv.dot(&lam).dot(&tinv);
                max_abs(&(&rec - &coeff.m)) / m_scale
            }
            _ => f64::INFINITY,
        }
    } else {
        f64::NAN
    };

    let residual_invariance = if diag.residual.is_empty() {
        None
    } else {
        let mut worst: f64 = 0.0;
        for c in &diag.residual {
            let cv: CVec = c.mapv(|x| Complex64::new(x, 0.0));
            let row = cv.dot(&d);
            let nrm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(nrm / (d_scale * cn.max(f64::MIN_POSITIVE)));
        }
        Some(worst)
    };

    VerificationReport {
        metric_residual,
        congruence_offdiag: offdiag / m_scale,
        congruence_diag: diag_dev / m_scale,
        similarity_offdiag: sim_offdiag / d_scale,
        involution_residual,
        reconstruction_residual: if reconstruction_residual.is_nan() {
            0.0
        } else {
            reconstruction_residual
        },
        residual_invariance,
    }
}

/// Options for the top-level entry point.
#[derive(Clone, Debug, Default)]
pub struct DiagonalizeOptions {
    /// Coordinate problems only: leave zero-frequency conserved modes
    /// undiagonalized instead of failing on (or including) them.
    pub allow_partial: bool,
}

/// Dispatch a form to its route. Pairing-free ladder forms with exactly zero
/// gamma take the unitary fast path.
pub fn diagonalize(
    form: &QuadraticForm,
    options: &DiagonalizeOptions,
    tol: &Tolerances,
) -> Result<Diagonalization> {
    match form {
        QuadraticForm::Boson(f) => {
            if max_abs(f.gamma()) == 0.0 {
                diagonalize_normal(f.alpha(), Statistics::Bose, tol)
            } else {
                diagonalize_boson(f, tol)
            }
        }
        QuadraticForm::Fermion(f) => {
            if max_abs(f.gamma()) == 0.0 {
                diagonalize_normal(f.alpha(), Statistics::Fermi, tol)
            } else {
                diagonalize_fermion(f, tol)
            }
        }
        QuadraticForm::Pairing(f) => diagonalize_pairing(f, tol),
        QuadraticForm::Coord(f) => crate::dirac::diagonalize_coord(f, options.allow_partial, tol),
    }
}
