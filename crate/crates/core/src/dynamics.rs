//! Equations of motion. The dynamic matrix `D = G M` generates the Heisenberg
//! evolution of the field; `heisenberg_apply` computes the same row by direct
//! operator algebra on the normal-ordered Hamiltonian, with no matrix product
//! involved, and exists so the two routes can be checked against each other.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::form::{
    assemble_coefficient_matrix, canonical_metric, CoefficientMatrix, FormKind, Metric,
    QuadraticForm, Statistics,
};
use crate::matrix::{CMat, CVec};

/// `D = G M` with everything used to build it.
#[derive(Clone, Debug)]
pub struct DynamicMatrix {
    pub d: CMat,
    pub g: CMat,
    pub metric: Metric,
    pub m: CMat,
    pub offset: f64,
    pub kind: FormKind,
    pub n: usize,
}

pub fn build_dynamic_matrix(coeff: &CoefficientMatrix, metric: &Metric) -> Result<DynamicMatrix> {
    if metric.size() != coeff.m.nrows() {
        return Err(Error::SizeMismatch(format!(
            "metric size {} does not match coefficient matrix {}",
            metric.size(),
            coeff.m.nrows()
        )));
    }
    let g = metric.matrix();
    Ok(DynamicMatrix {
        d: g.dot(&coeff.m),
        g,
        metric: metric.clone(),
        m: coeff.m.clone(),
        offset: coeff.offset,
        kind: coeff.kind,
        n: coeff.n,
    })
}

/// Dynamic matrix of a form under its canonical metric.
pub fn dynamic_matrix(form: &QuadraticForm) -> DynamicMatrix {
    let coeff = assemble_coefficient_matrix(form);
    let metric = canonical_metric(form);
    build_dynamic_matrix(&coeff, &metric).expect("canonical metric matches by construction")
}

/// One ladder operator or one canonical coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Atom {
    /// `species` separates the two mode families of a pairing problem.
    Lower { species: u8, mode: usize },
    Raise { species: u8, mode: usize },
    Momentum(usize),
    Position(usize),
}

/// The field component at position `mu` of the canonical layout.
fn field_atom(form: &QuadraticForm, mu: usize) -> Atom {
    let n = form.n();
    match form {
        QuadraticForm::Boson(_) | QuadraticForm::Fermion(_) => {
            if mu < n {
                Atom::Lower { species: 0, mode: mu }
            } else {
                Atom::Raise { species: 0, mode: mu - n }
            }
        }
        QuadraticForm::Pairing(_) => {
            if mu < n {
                Atom::Lower { species: 0, mode: mu }
            } else {
                Atom::Raise { species: 1, mode: mu - n }
            }
        }
        QuadraticForm::Coord(_) => {
            if mu < n {
                Atom::Momentum(mu)
            } else {
                Atom::Position(mu - n)
            }
        }
    }
}

/// Position of an atom in the canonical field layout, if it appears there.
fn atom_index(form: &QuadraticForm, atom: Atom) -> Option<usize> {
    let n = form.n();
    match (form, atom) {
        (QuadraticForm::Boson(_) | QuadraticForm::Fermion(_), Atom::Lower { species: 0, mode }) => {
            Some(mode)
        }
        (QuadraticForm::Boson(_) | QuadraticForm::Fermion(_), Atom::Raise { species: 0, mode }) => {
            Some(n + mode)
        }
        (QuadraticForm::Pairing(_), Atom::Lower { species: 0, mode }) => Some(mode),
        (QuadraticForm::Pairing(_), Atom::Raise { species: 1, mode }) => Some(n + mode),
        (QuadraticForm::Coord(_), Atom::Momentum(i)) => Some(i),
        (QuadraticForm::Coord(_), Atom::Position(i)) => Some(n + i),
        _ => None,
    }
}

/// Scalar bracket of two atoms: commutator for Bose and coordinate atoms,
/// anticommutator for Fermi. `sig` supplies bracket signs for coordinates.
fn bracket(x: Atom, y: Atom, stats: Statistics, sig: &[i8]) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    match (x, y) {
        (Atom::Lower { species: s1, mode: m1 }, Atom::Raise { species: s2, mode: m2 }) => {
            if s1 == s2 && m1 == m2 {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        }
        (Atom::Raise { species: s1, mode: m1 }, Atom::Lower { species: s2, mode: m2 }) => {
            if s1 == s2 && m1 == m2 {
                match stats {
                    Statistics::Bose => Complex64::new(-1.0, 0.0),
                    Statistics::Fermi => Complex64::new(1.0, 0.0),
                }
            } else {
                zero
            }
        }
        (Atom::Momentum(i), Atom::Position(j)) if i == j => {
            Complex64::new(0.0, -f64::from(sig[i]))
        }
        (Atom::Position(i), Atom::Momentum(j)) if i == j => Complex64::new(0.0, f64::from(sig[i])),
        _ => zero,
    }
}

fn form_statistics(form: &QuadraticForm) -> Statistics {
    match form {
        QuadraticForm::Fermion(_) => Statistics::Fermi,
        QuadraticForm::Pairing(p) => p.statistics(),
        _ => Statistics::Bose,
    }
}

/// The quadratic part of the normal-ordered Hamiltonian as a list of
/// `(coefficient, first factor, second factor)` terms. Scalar terms are
/// irrelevant to commutators and dropped.
fn hamiltonian_terms(form: &QuadraticForm) -> Vec<(Complex64, Atom, Atom)> {
    let n = form.n();
    let mut terms = Vec::new();
    match form {
        QuadraticForm::Boson(_) | QuadraticForm::Fermion(_) => {
            let (alpha, gamma) = match form {
                QuadraticForm::Boson(f) => (f.alpha(), f.gamma()),
                QuadraticForm::Fermion(f) => (f.alpha(), f.gamma()),
                _ => unreachable!(),
            };
            let half = Complex64::new(0.5, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let rs = |m| Atom::Raise { species: 0, mode: m };
                    let lw = |m| Atom::Lower { species: 0, mode: m };
                    terms.push((alpha[(i, j)], rs(i), lw(j)));
                    terms.push((half * gamma[(i, j)], rs(i), rs(j)));
                    terms.push((half * gamma[(i, j)].conj(), lw(j), lw(i)));
                }
            }
        }
        QuadraticForm::Pairing(f) => {
            let ra = |m| Atom::Raise { species: 0, mode: m };
            let la = |m| Atom::Lower { species: 0, mode: m };
            let rb = |m| Atom::Raise { species: 1, mode: m };
            let lb = |m| Atom::Lower { species: 1, mode: m };
            for i in 0..n {
                for j in 0..n {
                    terms.push((f.alpha()[(i, j)], ra(i), la(j)));
                    terms.push((f.epsilon()[(j, i)], rb(i), lb(j)));
                    terms.push((f.gamma()[(i, j)], ra(i), rb(j)));
                    terms.push((f.gamma()[(i, j)].conj(), lb(j), la(i)));
                }
            }
        }
        QuadraticForm::Coord(f) => {
            let half = Complex64::new(0.5, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let mu = Complex64::new(f.mu()[(i, j)], 0.0);
                    let ka = Complex64::new(f.kappa()[(i, j)], 0.0);
                    let ga = Complex64::new(f.gamma_pq()[(i, j)], 0.0);
                    terms.push((half * mu, Atom::Momentum(i), Atom::Momentum(j)));
                    terms.push((half * ka, Atom::Position(i), Atom::Position(j)));
                    terms.push((half * ga, Atom::Momentum(i), Atom::Position(j)));
                    terms.push((half * ga, Atom::Position(j), Atom::Momentum(i)));
                }
            }
        }
    }
    terms
}

/// Coefficient row of `i d/dt psi_mu = [psi_mu, H]` computed by operator
/// algebra alone. Equals row `mu` of the dynamic matrix.
pub fn heisenberg_apply(form: &QuadraticForm, mu: usize) -> Result<CVec> {
    let dim = form.field_dim();
    if mu >= dim {
        return Err(Error::IndexOutOfRange { index: mu, size: dim });
    }
    let stats = form_statistics(form);
    let sig: Vec<i8> = match form {
        QuadraticForm::Coord(f) => f.signature().to_vec(),
        _ => vec![1; form.n()],
    };
    let x = field_atom(form, mu);
    let mut row = CVec::zeros(dim);
    for (coeff, a, b) in hamiltonian_terms(form) {
        // [x, ab] = [x,a] b + a [x,b] for commuting brackets;
        // [x, ab] = {x,a} b - a {x,b} when the scalar bracket is the
        // anticommutator. Either way both brackets are scalars here.
        let ca = bracket(x, a, stats, &sig);
        let cb = bracket(x, b, stats, &sig);
        let sign = match stats {
            Statistics::Bose => Complex64::new(1.0, 0.0),
            Statistics::Fermi => Complex64::new(-1.0, 0.0),
        };
        if ca != Complex64::new(0.0, 0.0) {
            if let Some(k) = atom_index(form, b) {
                row[k] += coeff * ca;
            }
        }
        if cb != Complex64::new(0.0, 0.0) {
            if let Some(k) = atom_index(form, a) {
                row[k] += coeff * sign * cb;
            }
        }
    }
    Ok(row)
}
