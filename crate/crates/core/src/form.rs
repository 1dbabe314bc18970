//! Input forms for quadratic Hamiltonians, their structural validation, and
//! the assembly of coefficient matrices and metrics.
//!
//! Each constructor checks the symmetry its block must carry, then stores the
//! exactly symmetrized average so every downstream identity holds to machine
//! precision rather than to input precision.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    adjoint, all_finite, antisym_dev, herm_dev, max_abs, sym_dev, to_complex, CMat,
};
use crate::tol::Tolerances;

/// Exchange statistics of a mode family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    Bose,
    Fermi,
}

/// Which of the five input shapes a problem uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    Boson,
    Fermion,
    PairingBose,
    PairingFermi,
    Coord,
}

fn check_square(name: &str, a: &CMat) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::SizeMismatch(format!("{name} must be square, got {r}x{c}")));
    }
    if r == 0 {
        return Err(Error::SizeMismatch(format!("{name} must have dimension >= 1")));
    }
    if !all_finite(a) {
        return Err(Error::StructuralViolation(format!("{name} has non-finite entries")));
    }
    Ok(r)
}

fn check_hermitian(name: &str, a: &CMat, tol: &Tolerances) -> Result<()> {
    let dev = herm_dev(a);
    if dev > tol.tau_struct(max_abs(a)) {
        return Err(Error::StructuralViolation(format!(
            "{name} must be Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

fn hermitize(a: &CMat) -> CMat {
    (a + &adjoint(a)).mapv(|z| 0.5 * z)
}

fn symmetrize(a: &CMat) -> CMat {
    (a + &a.t().to_owned()).mapv(|z| 0.5 * z)
}

fn antisymmetrize(a: &CMat) -> CMat {
    (a - &a.t().to_owned()).mapv(|z| 0.5 * z)
}

/// `H = sum a'.alpha.a + (1/2)(a'.gamma.a' + h.c.)` over one boson family.
/// `alpha` Hermitian, `gamma` symmetric.
#[derive(Clone, Debug)]
pub struct BosonForm {
    n: usize,
    alpha: CMat,
    gamma: CMat,
}

impl BosonForm {
    pub fn new(alpha: CMat, gamma: CMat) -> Result<Self> {
        let tol = Tolerances::default();
        let n = check_square("alpha", &alpha)?;
        let ng = check_square("gamma", &gamma)?;
        if n != ng {
            return Err(Error::SizeMismatch(format!(
                "alpha is {n}x{n} but gamma is {ng}x{ng}"
            )));
        }
        check_hermitian("alpha", &alpha, &tol)?;
        let dev = sym_dev(&gamma);
        if dev > tol.tau_struct(max_abs(&gamma)) {
            return Err(Error::StructuralViolation(format!(
                "gamma must be symmetric for bosons (deviation {dev:.3e})"
            )));
        }
        if max_abs(&alpha) == 0.0 && max_abs(&gamma) == 0.0 {
            return Err(Error::StructuralViolation(
                "alpha and gamma are both zero".into(),
            ));
        }
        Ok(BosonForm {
            n,
            alpha: hermitize(&alpha),
            gamma: symmetrize(&gamma),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &CMat {
        &self.alpha
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }
}

/// Same shape for one fermion family: `alpha` Hermitian, `gamma` antisymmetric.
#[derive(Clone, Debug)]
pub struct FermionForm {
    n: usize,
    alpha: CMat,
    gamma: CMat,
}

impl FermionForm {
    pub fn new(alpha: CMat, gamma: CMat) -> Result<Self> {
        let tol = Tolerances::default();
        let n = check_square("alpha", &alpha)?;
        let ng = check_square("gamma", &gamma)?;
        if n != ng {
            return Err(Error::SizeMismatch(format!(
                "alpha is {n}x{n} but gamma is {ng}x{ng}"
            )));
        }
        check_hermitian("alpha", &alpha, &tol)?;
        let dev = antisym_dev(&gamma);
        if dev > tol.tau_struct(max_abs(&gamma)) {
            return Err(Error::StructuralViolation(format!(
                "gamma must be antisymmetric for fermions (deviation {dev:.3e})"
            )));
        }
        if max_abs(&alpha) == 0.0 && max_abs(&gamma) == 0.0 {
            return Err(Error::StructuralViolation(
                "alpha and gamma are both zero".into(),
            ));
        }
        Ok(FermionForm {
            n,
            alpha: hermitize(&alpha),
            gamma: antisymmetrize(&gamma),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &CMat {
        &self.alpha
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }
}

/// Two mode families coupled only through pair creation:
/// `H = sum a'.alpha.a + sum b'.eps~.b + (sum gamma_ij a_i' b_j' + h.c.)`
/// with `alpha`, `epsilon` Hermitian and `gamma` unconstrained.
#[derive(Clone, Debug)]
pub struct PairingForm {
    n: usize,
    alpha: CMat,
    epsilon: CMat,
    gamma: CMat,
    statistics: Statistics,
}

impl PairingForm {
    pub fn new(alpha: CMat, epsilon: CMat, gamma: CMat, statistics: Statistics) -> Result<Self> {
        let tol = Tolerances::default();
        let n = check_square("alpha", &alpha)?;
        let ne = check_square("epsilon", &epsilon)?;
        let ng = check_square("gamma", &gamma)?;
        if n != ne || n != ng {
            return Err(Error::SizeMismatch(format!(
                "blocks disagree: alpha {n}x{n}, epsilon {ne}x{ne}, gamma {ng}x{ng}"
            )));
        }
        check_hermitian("alpha", &alpha, &tol)?;
        check_hermitian("epsilon", &epsilon, &tol)?;
        if max_abs(&alpha) == 0.0 && max_abs(&epsilon) == 0.0 && max_abs(&gamma) == 0.0 {
            return Err(Error::StructuralViolation("all blocks are zero".into()));
        }
        Ok(PairingForm {
            n,
            alpha: hermitize(&alpha),
            epsilon: hermitize(&epsilon),
            gamma,
            statistics,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &CMat {
        &self.alpha
    }

    pub fn epsilon(&self) -> &CMat {
        &self.epsilon
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
}

fn check_square_real(name: &str, a: &Array2<f64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::SizeMismatch(format!("{name} must be square, got {r}x{c}")));
    }
    if r == 0 {
        return Err(Error::SizeMismatch(format!("{name} must have dimension >= 1")));
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::StructuralViolation(format!("{name} has non-finite entries")));
    }
    Ok(r)
}

fn max_abs_real(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Classical coordinate pairs: `H = (1/2)(p'.mu.p + q'.kappa.q + p'.g.q + q'.g~.p)`
/// with real symmetric `mu`, `kappa` and arbitrary real cross block. The
/// signature assigns each pair a bracket sign (space-like +1, time-like -1).
#[derive(Clone, Debug)]
pub struct CoordForm {
    n: usize,
    mu: Array2<f64>,
    kappa: Array2<f64>,
    gamma_pq: Array2<f64>,
    signature: Vec<i8>,
}

impl CoordForm {
    pub fn new(
        mu: Array2<f64>,
        kappa: Array2<f64>,
        gamma_pq: Array2<f64>,
        signature: Vec<i8>,
    ) -> Result<Self> {
        let tol = Tolerances::default();
        let n = check_square_real("mu", &mu)?;
        let nk = check_square_real("kappa", &kappa)?;
        let ng = check_square_real("gamma_pq", &gamma_pq)?;
        if n != nk || n != ng {
            return Err(Error::SizeMismatch(format!(
                "blocks disagree: mu {n}x{n}, kappa {nk}x{nk}, gamma_pq {ng}x{ng}"
            )));
        }
        for (name, a) in [("mu", &mu), ("kappa", &kappa)] {
            let dev = max_abs_real(&(a - &a.t().to_owned()));
            if dev > tol.tau_struct(max_abs_real(a)) {
                return Err(Error::StructuralViolation(format!(
                    "{name} must be symmetric (deviation {dev:.3e})"
                )));
            }
        }
        if signature.len() != n {
            return Err(Error::SizeMismatch(format!(
                "signature has {} entries for {n} coordinate pairs",
                signature.len()
            )));
        }
        if signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::StructuralViolation(
                "signature entries must be +1 or -1".into(),
            ));
        }
        if max_abs_real(&mu) == 0.0 && max_abs_real(&kappa) == 0.0 && max_abs_real(&gamma_pq) == 0.0
        {
            return Err(Error::StructuralViolation("all blocks are zero".into()));
        }
        let sym = |a: &Array2<f64>| (a + &a.t().to_owned()).mapv(|x| 0.5 * x);
        Ok(CoordForm {
            n,
            mu: sym(&mu),
            kappa: sym(&kappa),
            gamma_pq,
            signature,
        })
    }

    /// All brackets space-like; the common case.
    pub fn standard(mu: Array2<f64>, kappa: Array2<f64>, gamma_pq: Array2<f64>) -> Result<Self> {
        let n = mu.nrows();
        CoordForm::new(mu, kappa, gamma_pq, vec![1; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &Array2<f64> {
        &self.mu
    }

    pub fn kappa(&self) -> &Array2<f64> {
        &self.kappa
    }

    pub fn gamma_pq(&self) -> &Array2<f64> {
        &self.gamma_pq
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }
}

/// Any of the supported input shapes.
#[derive(Clone, Debug)]
pub enum QuadraticForm {
    Boson(BosonForm),
    Fermion(FermionForm),
    Pairing(PairingForm),
    Coord(CoordForm),
}

impl QuadraticForm {
    pub fn kind(&self) -> FormKind {
        match self {
            QuadraticForm::Boson(_) => FormKind::Boson,
            QuadraticForm::Fermion(_) => FormKind::Fermion,
            QuadraticForm::Pairing(p) => match p.statistics {
                Statistics::Bose => FormKind::PairingBose,
                Statistics::Fermi => FormKind::PairingFermi,
            },
            QuadraticForm::Coord(_) => FormKind::Coord,
        }
    }

    /// Number of modes (or coordinate pairs); the field has dimension `2n`.
    pub fn n(&self) -> usize {
        match self {
            QuadraticForm::Boson(f) => f.n,
            QuadraticForm::Fermion(f) => f.n,
            QuadraticForm::Pairing(f) => f.n,
            QuadraticForm::Coord(f) => f.n,
        }
    }

    pub fn field_dim(&self) -> usize {
        2 * self.n()
    }
}

impl From<BosonForm> for QuadraticForm {
    fn from(f: BosonForm) -> Self {
        QuadraticForm::Boson(f)
    }
}

impl From<FermionForm> for QuadraticForm {
    fn from(f: FermionForm) -> Self {
        QuadraticForm::Fermion(f)
    }
}

impl From<PairingForm> for QuadraticForm {
    fn from(f: PairingForm) -> Self {
        QuadraticForm::Pairing(f)
    }
}

impl From<CoordForm> for QuadraticForm {
    fn from(f: CoordForm) -> Self {
        QuadraticForm::Coord(f)
    }
}

/// The bracket matrix G of a field, `[psi_mu, psi_nu'] = G_mu_nu` in the
/// graded sense appropriate to the statistics.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    /// Identity; fermion families.
    Iplus,
    /// `diag(I, -I)`; boson families.
    Iminus,
    /// `[[0, -iI], [iI, 0]]`; coordinate pairs, all space-like.
    SigmaY,
    /// `diag(s, -s)` for a sign vector s.
    DiagSignature(Vec<i8>),
    /// `[[0, -iS], [iS, 0]]` with `S = diag(s)`; coordinate pairs of mixed
    /// bracket sign.
    SigmaYSigned(Vec<i8>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    size: usize,
    kind: MetricKind,
}

impl Metric {
    pub fn new(kind: MetricKind, size: usize) -> Result<Self> {
        if size == 0 || size % 2 != 0 {
            return Err(Error::SizeMismatch(format!(
                "metric size must be even and positive, got {size}"
            )));
        }
        if let MetricKind::DiagSignature(s) | MetricKind::SigmaYSigned(s) = &kind {
            if s.len() != size / 2 {
                return Err(Error::SizeMismatch(format!(
                    "signature has {} entries for metric size {size}",
                    s.len()
                )));
            }
            if s.iter().any(|x| *x != 1 && *x != -1) {
                return Err(Error::StructuralViolation(
                    "signature entries must be +1 or -1".into(),
                ));
            }
        }
        Ok(Metric { size, kind })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Dense matrix of the metric.
    pub fn matrix(&self) -> CMat {
        let n = self.size / 2;
        let mut g = CMat::zeros((self.size, self.size));
        match &self.kind {
            MetricKind::Iplus => {
                for i in 0..self.size {
                    g[(i, i)] = Complex64::new(1.0, 0.0);
                }
            }
            MetricKind::Iminus => {
                for i in 0..n {
                    g[(i, i)] = Complex64::new(1.0, 0.0);
                    g[(n + i, n + i)] = Complex64::new(-1.0, 0.0);
                }
            }
            MetricKind::SigmaY => {
                for i in 0..n {
                    g[(i, n + i)] = Complex64::new(0.0, -1.0);
                    g[(n + i, i)] = Complex64::new(0.0, 1.0);
                }
            }
            MetricKind::DiagSignature(s) => {
                for i in 0..n {
                    let v = f64::from(s[i]);
                    g[(i, i)] = Complex64::new(v, 0.0);
                    g[(n + i, n + i)] = Complex64::new(-v, 0.0);
                }
            }
            MetricKind::SigmaYSigned(s) => {
                for i in 0..n {
                    let v = f64::from(s[i]);
                    g[(i, n + i)] = Complex64::new(0.0, -v);
                    g[(n + i, i)] = Complex64::new(0.0, v);
                }
            }
        }
        g
    }
}

/// The Hermitian matrix M of `H = c psi'.M.psi + offset`, together with the
/// scalar produced by normal ordering.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    pub m: CMat,
    pub offset: f64,
    pub kind: FormKind,
    pub n: usize,
}

fn block2(n: usize, a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let mut m = CMat::zeros((2 * n, 2 * n));
    m.slice_mut(s![..n, ..n]).assign(a);
    m.slice_mut(s![..n, n..]).assign(b);
    m.slice_mut(s![n.., ..n]).assign(c);
    m.slice_mut(s![n.., n..]).assign(d);
    m
}

fn re_trace(a: &CMat) -> f64 {
    a.diag().iter().map(|z| z.re).sum()
}

/// Build M and the normal-ordering offset for a form.
pub fn assemble_coefficient_matrix(form: &QuadraticForm) -> CoefficientMatrix {
    match form {
        QuadraticForm::Boson(f) => {
            let at = f.alpha.t().to_owned();
            let gd = adjoint(&f.gamma);
            CoefficientMatrix {
                m: block2(f.n, &f.alpha, &f.gamma, &gd, &at),
                offset: -0.5 * re_trace(&f.alpha),
                kind: FormKind::Boson,
                n: f.n,
            }
        }
        QuadraticForm::Fermion(f) => {
            let at = f.alpha.t().mapv(|z| -z);
            let gd = adjoint(&f.gamma);
            CoefficientMatrix {
                m: block2(f.n, &f.alpha, &f.gamma, &gd, &at),
                offset: 0.5 * re_trace(&f.alpha),
                kind: FormKind::Fermion,
                n: f.n,
            }
        }
        QuadraticForm::Pairing(f) => {
            let gd = adjoint(&f.gamma);
            let (lower, offset, kind) = match f.statistics {
                Statistics::Bose => (f.epsilon.clone(), -re_trace(&f.epsilon), FormKind::PairingBose),
                Statistics::Fermi => (
                    f.epsilon.mapv(|z| -z),
                    re_trace(&f.epsilon),
                    FormKind::PairingFermi,
                ),
            };
            CoefficientMatrix {
                m: block2(f.n, &f.alpha, &f.gamma, &gd, &lower),
                offset,
                kind,
                n: f.n,
            }
        }
        QuadraticForm::Coord(f) => {
            let mu = to_complex(&f.mu);
            let ka = to_complex(&f.kappa);
            let g = to_complex(&f.gamma_pq);
            let gt = g.t().to_owned();
            CoefficientMatrix {
                m: block2(f.n, &mu, &g, &gt, &ka),
                offset: 0.0,
                kind: FormKind::Coord,
                n: f.n,
            }
        }
    }
}

/// The metric the field of a form obeys.
pub fn canonical_metric(form: &QuadraticForm) -> Metric {
    let size = form.field_dim();
    let kind = match form {
        QuadraticForm::Boson(_) => MetricKind::Iminus,
        QuadraticForm::Fermion(_) => MetricKind::Iplus,
        QuadraticForm::Pairing(p) => match p.statistics {
            Statistics::Bose => MetricKind::Iminus,
            Statistics::Fermi => MetricKind::Iplus,
        },
        QuadraticForm::Coord(f) => {
            if f.signature.iter().all(|s| *s == 1) {
                MetricKind::SigmaY
            } else {
                MetricKind::SigmaYSigned(f.signature.clone())
            }
        }
    };
    Metric::new(kind, size).expect("canonical metric is always well formed")
}
