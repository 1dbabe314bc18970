//! Gram-Schmidt orthonormalization under an indefinite Hermitian metric.
//!
//! Vectors are normalized to metric norm +1 or -1. Within one eigenvalue
//! cluster the restricted metric is nondegenerate whenever the problem is
//! diagonalizable at all, but individual basis vectors can still be
//! isotropic; those are resolved by combining two vectors whose cross inner
//! product survives, which always exists in the nondegenerate case.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{cdot, max_abs, CMat, CVec};
use crate::spectral::{apply_partner, PartnerRule};
use crate::tol::Tolerances;

/// `x' G y`.
pub fn g_inner(g: &CMat, x: &CVec, y: &CVec) -> Complex64 {
    cdot(x, &g.dot(y))
}

/// A vector of metric norm exactly +1 or -1.
#[derive(Clone, Debug)]
pub struct NormalizedVector {
    pub v: CVec,
    pub norm: i8,
}

fn self_norm(g: &CMat, v: &CVec) -> f64 {
    g_inner(g, v, v).re
}

fn euclid_sq(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Index of the working vector with the largest metric norm relative to its
/// Euclidean size, or None when every vector is isotropic at tolerance.
fn pick_nonisotropic(work: &[CVec], g: &CMat, g_norm: f64, tol: &Tolerances) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in work.iter().enumerate() {
        let score = self_norm(g, v).abs();
        if score > tol.tau_iso(euclid_sq(v), g_norm)
            && best.map_or(true, |(_, bs)| score / euclid_sq(v) > bs)
        {
            best = Some((i, score / euclid_sq(v)));
        }
    }
    best.map(|(i, _)| i)
}

/// Replace two isotropic vectors by the combinations `u + i t`, `u - i t`
/// (with `t` phased so the cross term is negative imaginary), which carry
/// metric norms +2|c| and -2|c|.
fn combine_isotropic(u: &CVec, t: &CVec, c: Complex64) -> (CVec, CVec) {
    let theta = -std::f64::consts::FRAC_PI_2 - c.arg();
    let phase = Complex64::from_polar(1.0, theta);
    let t = t.mapv(|z| z * phase);
    let i = Complex64::new(0.0, 1.0);
    let w1 = &u.view() + &t.mapv(|z| z * i);
    let w2 = &u.view() - &t.mapv(|z| z * i);
    (w1, w2)
}

fn project_out(v: &CVec, w: &NormalizedVector, g: &CMat) -> CVec {
    let coeff = g_inner(g, &w.v, v) * f64::from(w.norm);
    v - &w.v.mapv(|z| z * coeff)
}

fn orthonormalize_once(basis: &[CVec], g: &CMat, tol: &Tolerances) -> Result<Vec<NormalizedVector>> {
    let g_norm = max_abs(g);
    let mut work: Vec<CVec> = basis.to_vec();
    let mut out: Vec<NormalizedVector> = Vec::with_capacity(basis.len());
    while !work.is_empty() {
        match pick_nonisotropic(&work, g, g_norm, tol) {
            Some(i) => {
                let u = work.remove(i);
                let ng = self_norm(g, &u);
                let norm: i8 = if ng > 0.0 { 1 } else { -1 };
                let w = NormalizedVector {
                    v: u.mapv(|z| z / ng.abs().sqrt()),
                    norm,
                };
                for v in work.iter_mut() {
                    *v = project_out(v, &w, g);
                }
                out.push(w);
            }
            None => {
                // Everything left is isotropic; look for a surviving cross
                // inner product to combine.
                let mut best: Option<(usize, usize, Complex64, f64)> = None;
                for i in 0..work.len() {
                    for j in (i + 1)..work.len() {
                        let c = g_inner(g, &work[i], &work[j]);
                        let rel = c.norm()
                            / (euclid_sq(&work[i]) * euclid_sq(&work[j])).sqrt().max(f64::MIN_POSITIVE);
                        if best.map_or(true, |(_, _, _, br)| rel > br) {
                            best = Some((i, j, c, rel));
                        }
                    }
                }
                let degenerate = match best {
                    None => true,
                    Some((_, _, _, rel)) => rel <= tol.scale * tol.iso * g_norm,
                };
                if degenerate {
                    return Err(Error::DegenerateMetric(format!(
                        "metric restricted to a {}-dimensional invariant subspace has no \
                         nonisotropic direction",
                        work.len()
                    )));
                }
                let (i, j, c, _) = best.expect("degenerate case returned above");
                let (w1, w2) = combine_isotropic(&work[i], &work[j], c);
                work[i] = w1;
                work[j] = w2;
            }
        }
    }
    Ok(out)
}

/// Orthonormalize the basis of one eigenvalue cluster against the metric.
/// Output vectors span the same subspace and satisfy
/// `w_i' G w_j = norm_i delta_ij` at the orthonormality tolerance.
pub fn orthonormalize_cluster(
    basis: &[CVec],
    g: &CMat,
    tol: &Tolerances,
) -> Result<Vec<NormalizedVector>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let first = orthonormalize_once(basis, g, tol)?;
    // A second sweep scrubs the rounding left by the first; norms are
    // established by then, so this is plain re-projection.
    let vecs: Vec<CVec> = first.iter().map(|w| w.v.clone()).collect();
    let out = orthonormalize_once(&vecs, g, tol)?;
    check_gram(&out, g, tol)?;
    Ok(out)
}

fn check_gram(set: &[NormalizedVector], g: &CMat, tol: &Tolerances) -> Result<()> {
    let bound = tol.tau_orth(max_abs(g));
    for (i, wi) in set.iter().enumerate() {
        for (j, wj) in set.iter().enumerate() {
            let expect = if i == j {
                Complex64::new(f64::from(wi.norm), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let got = g_inner(g, &wi.v, &wj.v);
            if (got - expect).norm() > bound {
                return Err(Error::DegenerateMetric(format!(
                    "orthonormalization drifted: |<{i},{j}> - {expect}| = {:.3e}",
                    (got - expect).norm()
                )));
            }
        }
    }
    Ok(())
}

/// True when the metric is the identity, which makes the form definite and
/// switches the zero-space routine to its overlap-correcting branch.
fn is_identity(g: &CMat) -> bool {
    let n = g.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - Complex64::new(e, 0.0)).norm());
        }
    }
    dev == 0.0
}

/// Orthonormalize the zero eigenspace while keeping the partner convention:
/// each returned pair is `(w, Jw)` exactly, with the +1-norm member first
/// for indefinite metrics and both members of norm +1 for the definite one.
///
/// Input is the list of `plus` representatives; partners are regenerated by
/// the involution throughout, which every projection step commutes with.
pub fn orthonormalize_zero_space(
    plus: &[CVec],
    g: &CMat,
    rule: PartnerRule,
    tol: &Tolerances,
) -> Result<Vec<(NormalizedVector, NormalizedVector)>> {
    if plus.is_empty() {
        return Ok(Vec::new());
    }
    let pairs = if is_identity(g) {
        let once = zero_space_definite(plus, tol)?;
        let again: Vec<CVec> = once.iter().map(|(a, _)| a.v.clone()).collect();
        zero_space_definite(&again, tol)?
    } else {
        let once = zero_space_indefinite(plus, g, rule, tol)?;
        let again: Vec<CVec> = once.iter().map(|(a, _)| a.v.clone()).collect();
        zero_space_indefinite(&again, g, rule, tol)?
    };
    let flat: Vec<NormalizedVector> = pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    check_gram(&flat, g, tol)?;
    for (a, b) in &pairs {
        debug_assert_eq!(apply_partner(rule, &a.v), b.v);
    }
    Ok(pairs)
}

/// Definite metric: a vector and its partner are generally not orthogonal.
/// With the overlap phased real, explicit coefficients produce an orthonormal
/// pair that the involution still exchanges.
fn zero_space_definite(
    plus: &[CVec],
    tol: &Tolerances,
) -> Result<Vec<(NormalizedVector, NormalizedVector)>> {
    let rule = PartnerRule::ConjugateSwap;
    let mut work: Vec<CVec> = plus.to_vec();
    let mut out = Vec::with_capacity(plus.len());
    while let Some(mut u) = work.pop() {
        let nu = euclid_sq(&u).sqrt();
        if nu <= tol.scale * tol.iso {
            return Err(Error::DegenerateMetric(
                "zero-space vector collapsed during projection".into(),
            ));
        }
        u.mapv_inplace(|z| z / nu);
        let ju = apply_partner(rule, &u);
        let kappa_c = cdot(&u, &ju);
        // Rotate the global phase so the self-overlap is real nonnegative.
        let phase = Complex64::from_polar(1.0, kappa_c.arg() / 2.0);
        let u = u.mapv(|z| z * phase);
        let ju = apply_partner(rule, &u);
        let kappa = cdot(&u, &ju).re;
        if kappa >= 1.0 - tol.scale * tol.iso {
            return Err(Error::DegenerateMetric(
                "zero-space vector is parallel to its own partner".into(),
            ));
        }
        let w1 = if kappa.abs() <= tol.scale * tol.iso {
            u
        } else {
            let a = 0.5 / (1.0 + kappa).sqrt() + 0.5 / (1.0 - kappa).sqrt();
            let b = 0.5 / (1.0 + kappa).sqrt() - 0.5 / (1.0 - kappa).sqrt();
            &u.mapv(|z| z * a) + &ju.mapv(|z| z * b)
        };
        let w2 = apply_partner(rule, &w1);
        for v in work.iter_mut() {
            let mut p = v.clone();
            p = &p - &w1.mapv(|z| z * cdot(&w1, &p));
            p = &p - &w2.mapv(|z| z * cdot(&w2, &p));
            *v = p;
        }
        out.push((
            NormalizedVector { v: w1, norm: 1 },
            NormalizedVector { v: w2, norm: 1 },
        ));
    }
    out.reverse();
    Ok(out)
}

/// Indefinite metric: a vector and its partner are automatically orthogonal
/// here, so each nonisotropic representative immediately yields a pair with
/// norms (+1, -1). Fully isotropic states are combined across pairs first.
fn zero_space_indefinite(
    plus: &[CVec],
    g: &CMat,
    rule: PartnerRule,
    tol: &Tolerances,
) -> Result<Vec<(NormalizedVector, NormalizedVector)>> {
    let g_norm = max_abs(g);
    let mut work: Vec<CVec> = plus.to_vec();
    let mut out = Vec::with_capacity(plus.len());
    while !work.is_empty() {
        // Prefer an orientation (vector or partner) with surviving norm.
        let mut pick: Option<(usize, bool, f64)> = None;
        for (i, v) in work.iter().enumerate() {
            for minus in [false, true] {
                let x = if minus { apply_partner(rule, v) } else { v.clone() };
                let score = self_norm(g, &x).abs();
                if score > tol.tau_iso(euclid_sq(&x), g_norm)
                    && pick.map_or(true, |(_, _, bs)| score / euclid_sq(&x) > bs)
                {
                    pick = Some((i, minus, score / euclid_sq(&x)));
                }
            }
        }
        match pick {
            Some((i, minus, _)) => {
                let mut u = work.remove(i);
                if minus {
                    u = apply_partner(rule, &u);
                }
                let ng = self_norm(g, &u);
                let w = u.mapv(|z| z / ng.abs().sqrt());
                let jw = apply_partner(rule, &w);
                let (first, second, lam) = if ng > 0.0 {
                    (w.clone(), jw.clone(), 1i8)
                } else {
                    (jw.clone(), w.clone(), -1i8)
                };
                let pair = (
                    NormalizedVector { v: first, norm: 1 },
                    NormalizedVector { v: second, norm: -1 },
                );
                for v in work.iter_mut() {
                    let mut p = project_out(v, &pair.0, g);
                    p = project_out(&p, &pair.1, g);
                    *v = p;
                }
                let _ = lam;
                out.push(pair);
            }
            None => {
                // All representatives and partners isotropic: combine two
                // distinct pairs whose cross inner product survives.
                let mut best: Option<(usize, bool, usize, bool, Complex64, f64)> = None;
                for i in 0..work.len() {
                    for j in (i + 1)..work.len() {
                        for mi in [false, true] {
                            for mj in [false, true] {
                                let x = if mi {
                                    apply_partner(rule, &work[i])
                                } else {
                                    work[i].clone()
                                };
                                let y = if mj {
                                    apply_partner(rule, &work[j])
                                } else {
                                    work[j].clone()
                                };
                                let c = g_inner(g, &x, &y);
                                let rel = c.norm()
                                    / (euclid_sq(&x) * euclid_sq(&y))
                                        .sqrt()
                                        .max(f64::MIN_POSITIVE);
                                if best.map_or(true, |(.., br)| rel > br) {
                                    best = Some((i, mi, j, mj, c, rel));
                                }
                            }
                        }
                    }
                }
                let degenerate = match best {
                    None => true,
                    Some((.., rel)) => rel <= tol.scale * tol.iso * g_norm,
                };
                if degenerate {
                    return Err(Error::DegenerateMetric(
                        "zero-space metric restriction has no nonisotropic direction".into(),
                    ));
                }
                let (i, mi, j, mj, c, _) = best.expect("degenerate case returned above");
                let u = if mi {
                    apply_partner(rule, &work[i])
                } else {
                    work[i].clone()
                };
                let t = if mj {
                    apply_partner(rule, &work[j])
                } else {
                    work[j].clone()
                };
                let (w1, w2) = combine_isotropic(&u, &t, c);
                work[i] = w1;
                work[j] = w2;
            }
        }
    }
    Ok(out)
}
