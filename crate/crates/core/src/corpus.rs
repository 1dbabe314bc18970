//! Generators for the physical regression models: one momentum mode of a
//! relativistic scalar or photon field, the Dirac field mode, a charged
//! particle in a magnetic field, angular momentum, and small phonon rings.
//! Each model carries its analytically expected spectrum.

use std::collections::BTreeMap;
use std::sync::Once;

use ndarray::{array, Array2};

use crate::bv::ModeTag;
use crate::error::{Error, Result};
use crate::form::{CoordForm, FermionForm, QuadraticForm};
use crate::matrix::{c64, CMat};

/// Analytically known outcome of running a model through the pipeline with
/// its default options (`allow_partial` only when `requires_partial`).
#[derive(Clone, Debug)]
pub struct ExpectedSpectrum {
    /// Reported modes in output order (descending omega, normal before
    /// hole-transformed before time-polarized on ties).
    pub omegas: Vec<(f64, ModeTag)>,
    pub constant: f64,
    /// Conserved operators left over when run with `allow_partial`.
    pub residual_count: usize,
    /// The model only diagonalizes with `allow_partial` set.
    pub requires_partial: bool,
    pub note: &'static str,
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub expected: Option<ExpectedSpectrum>,
}

fn need(parameters: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    parameters
        .get(key)
        .copied()
        .ok_or_else(|| Error::MissingParameter(key.to_string()))
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Dirac alpha matrices in the standard representation and beta.
fn dirac_matrices() -> ([CMat; 3], CMat) {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    let a1 = array![
        [o, o, o, l],
        [o, o, l, o],
        [o, l, o, o],
        [l, o, o, o]
    ];
    let a2 = array![
        [o, o, o, -i],
        [o, o, i, o],
        [o, -i, o, o],
        [i, o, o, o]
    ];
    let a3 = array![
        [o, o, l, o],
        [o, o, o, -l],
        [l, o, o, o],
        [o, -l, o, o]
    ];
    let beta = array![
        [l, o, o, o],
        [o, l, o, o],
        [o, o, -l, o],
        [o, o, o, -l]
    ];
    ([a1, a2, a3], beta)
}

/// Clifford relations of the Dirac matrices, checked once per process.
fn check_dirac_algebra() {
    static CHECK: Once = Once::new();
    CHECK.call_once(|| {
        let (alphas, beta) = dirac_matrices();
        let anti = |x: &CMat, y: &CMat| x.dot(y) + y.dot(x);
        for (i, ai) in alphas.iter().enumerate() {
            for (j, aj) in alphas.iter().enumerate() {
                let mut expect = CMat::zeros((4, 4));
                if i == j {
                    for k in 0..4 {
                        expect[(k, k)] = c64(2.0, 0.0);
                    }
                }
                let dev = &anti(ai, aj) - &expect;
                assert!(
                    dev.iter().all(|z| z.norm() == 0.0),
                    "alpha anticommutator {i}{j} broken"
                );
            }
            assert!(
                anti(ai, &beta).iter().all(|z| z.norm() == 0.0),
                "alpha-beta anticommutator {i} broken"
            );
        }
        assert!(
            (&beta.dot(&beta) - &CMat::eye(4)).iter().all(|z| z.norm() == 0.0),
            "beta squared broken"
        );
    });
}

/// Circulant spring Laplacian of a ring: nearest-neighbor couplings whose
/// rows sum to zero.
fn ring_laplacian(sites: usize, spring: f64) -> Array2<f64> {
    let mut k = Array2::<f64>::zeros((sites, sites));
    for l in 0..sites {
        let r = (l + 1) % sites;
        k[(l, l)] += 2.0 * spring;
        k[(l, r)] -= spring;
        k[(r, l)] -= spring;
    }
    k
}

fn integral_sites(x: f64) -> Result<usize> {
    let r = x.round();
    if (x - r).abs() > 1e-9 || !(2.0..=16.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "sites must be an integer in 2..=16, got {x}"
        )));
    }
    Ok(r as usize)
}

/// Build the form for a named model.
pub fn generate(name: &str, parameters: &BTreeMap<String, f64>) -> Result<QuadraticForm> {
    match name {
        "klein_gordon" => {
            let m = need(parameters, "mass")?;
            let p = need(parameters, "momentum")?;
            let w2 = m * m + p * p;
            positive("mass^2 + momentum^2", w2)?;
            let f = CoordForm::standard(array![[1.0]], array![[w2]], Array2::zeros((1, 1)))?;
            Ok(QuadraticForm::Coord(f))
        }
        "dirac_field" => {
            check_dirac_algebra();
            let m = need(parameters, "mass")?;
            let p = [
                need(parameters, "px")?,
                need(parameters, "py")?,
                need(parameters, "pz")?,
            ];
            let (alphas, beta) = dirac_matrices();
            let mut h = beta.mapv(|z| z * m);
            for (pi, ai) in p.iter().zip(alphas.iter()) {
                h = &h + &ai.mapv(|z| z * *pi);
            }
            let f = FermionForm::new(h, CMat::zeros((4, 4)))?;
            Ok(QuadraticForm::Fermion(f))
        }
        "landau" => {
            let m = positive("mass", need(parameters, "mass")?)?;
            let wl = positive("omega_l", need(parameters, "omega_l")?)?;
            let mu = Array2::eye(2) / m;
            let kappa = Array2::eye(2) * (m * wl * wl);
            let gamma = array![[0.0, wl], [-wl, 0.0]];
            Ok(QuadraticForm::Coord(CoordForm::standard(mu, kappa, gamma)?))
        }
        "jz" => {
            let f = CoordForm::standard(
                Array2::zeros((2, 2)),
                Array2::zeros((2, 2)),
                array![[0.0, -1.0], [1.0, 0.0]],
            )?;
            Ok(QuadraticForm::Coord(f))
        }
        "phonon_ring" => {
            let sites = integral_sites(need(parameters, "sites")?)?;
            let spring = positive("spring", need(parameters, "spring")?)?;
            let m = positive("mass", need(parameters, "mass")?)?;
            let mu = Array2::eye(sites) / m;
            let kappa = ring_laplacian(sites, spring);
            let f = CoordForm::standard(mu, kappa, Array2::zeros((sites, sites)))?;
            Ok(QuadraticForm::Coord(f))
        }
        "maxwell" => {
            let p = positive("momentum", need(parameters, "momentum")?)?;
            // Lowered-index polarizations: the time-like one enters with a
            // negative-definite block and comes out time-polarized.
            let mut sign = Array2::eye(4);
            sign[(0, 0)] = -1.0;
            let mu = sign.clone();
            let kappa = sign * (p * p);
            Ok(QuadraticForm::Coord(CoordForm::standard(
                mu,
                kappa,
                Array2::zeros((4, 4)),
            )?))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Analytic expectation for a model, when one is defined for the given
/// parameters.
pub fn expected(name: &str, parameters: &BTreeMap<String, f64>) -> Result<ExpectedSpectrum> {
    match name {
        "klein_gordon" => {
            let m = need(parameters, "mass")?;
            let p = need(parameters, "momentum")?;
            let w = (m * m + p * p).sqrt();
            Ok(ExpectedSpectrum {
                omegas: vec![(w, ModeTag::Normal)],
                constant: 0.5 * w,
                residual_count: 0,
                requires_partial: false,
                note: "relativistic dispersion sqrt(mass^2 + momentum^2)",
            })
        }
        "dirac_field" => {
            let m = need(parameters, "mass")?;
            let p2 = need(parameters, "px")?.powi(2)
                + need(parameters, "py")?.powi(2)
                + need(parameters, "pz")?.powi(2);
            let e = (m * m + p2).sqrt();
            Ok(ExpectedSpectrum {
                omegas: vec![
                    (e, ModeTag::Normal),
                    (e, ModeTag::Normal),
                    (e, ModeTag::HoleTransformed),
                    (e, ModeTag::HoleTransformed),
                ],
                constant: -2.0 * e,
                residual_count: 0,
                requires_partial: false,
                note: "two particle and two hole branches at the same energy",
            })
        }
        "landau" => {
            let wl = positive("omega_l", need(parameters, "omega_l")?)?;
            positive("mass", need(parameters, "mass")?)?;
            Ok(ExpectedSpectrum {
                omegas: vec![(2.0 * wl, ModeTag::Normal), (0.0, ModeTag::Normal)],
                constant: wl,
                residual_count: 0,
                requires_partial: false,
                note: "cyclotron mode at twice the Larmor frequency plus a flat guiding-center pair",
            })
        }
        "jz" => Ok(ExpectedSpectrum {
            omegas: vec![(1.0, ModeTag::Normal), (-1.0, ModeTag::TimePolarized)],
            constant: 0.0,
            residual_count: 0,
            requires_partial: false,
            note: "angular momentum splits into opposite circular quanta",
        }),
        "phonon_ring" => {
            let sites = integral_sites(need(parameters, "sites")?)?;
            let spring = positive("spring", need(parameters, "spring")?)?;
            let m = positive("mass", need(parameters, "mass")?)?;
            let scale = 2.0 * (spring / m).sqrt();
            let mut oms: Vec<f64> = (1..sites)
                .map(|j| scale * (std::f64::consts::PI * j as f64 / sites as f64).sin())
                .collect();
            oms.sort_by(|a, b| b.total_cmp(a));
            let constant = 0.5 * oms.iter().sum::<f64>();
            Ok(ExpectedSpectrum {
                omegas: oms.into_iter().map(|w| (w, ModeTag::Normal)).collect(),
                constant,
                residual_count: 1,
                requires_partial: true,
                note: "ring dispersion 2 sqrt(spring/mass) |sin(pi j / sites)|; center of mass stays conserved",
            })
        }
        "maxwell" => {
            let p = positive("momentum", need(parameters, "momentum")?)?;
            Ok(ExpectedSpectrum {
                omegas: vec![
                    (p, ModeTag::Normal),
                    (p, ModeTag::Normal),
                    (p, ModeTag::Normal),
                    (-p, ModeTag::TimePolarized),
                ],
                constant: p,
                residual_count: 0,
                requires_partial: false,
                note: "three light-like polarizations plus the time-polarized one at negative omega",
            })
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// A model together with its expectation.
pub fn model_spec(name: &str, parameters: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    generate(name, parameters)?;
    Ok(ModelSpec {
        name: name.to_string(),
        parameters: parameters.clone(),
        expected: Some(expected(name, parameters)?),
    })
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// The default regression table.
pub fn fixtures() -> Vec<ModelSpec> {
    let table: Vec<(&str, BTreeMap<String, f64>)> = vec![
        ("klein_gordon", params(&[("mass", 3.0), ("momentum", 4.0)])),
        (
            "dirac_field",
            params(&[("mass", 3.0), ("px", 4.0), ("py", 0.0), ("pz", 0.0)]),
        ),
        ("landau", params(&[("mass", 1.0), ("omega_l", 0.5)])),
        ("jz", params(&[])),
        (
            "phonon_ring",
            params(&[("sites", 4.0), ("spring", 1.0), ("mass", 1.0)]),
        ),
        ("maxwell", params(&[("momentum", 2.5)])),
    ];
    table
        .into_iter()
        .map(|(name, p)| model_spec(name, &p).expect("fixture table must be valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::{diagonalize, verify, DiagonalizeOptions};
    use crate::tol::Tolerances;

    #[test]
    fn fixture_table_is_complete_and_valid() {
        let fx = fixtures();
        assert_eq!(fx.len(), 6);
        for spec in &fx {
            assert!(spec.expected.is_some(), "{} lacks expectation", spec.name);
            generate(&spec.name, &spec.parameters).unwrap();
        }
    }

    #[test]
    fn every_fixture_reproduces_its_expectation() {
        let tol = Tolerances::default();
        for spec in fixtures() {
            let exp = spec.expected.unwrap();
            let form = generate(&spec.name, &spec.parameters).unwrap();
            let opts = DiagonalizeOptions {
                allow_partial: exp.requires_partial,
            };
            let d = diagonalize(&form, &opts, &tol)
                .unwrap_or_else(|e| panic!("{} failed: {e}", spec.name));
            assert_eq!(d.modes.len(), exp.omegas.len(), "{} mode count", spec.name);
            for (got, (want, tag)) in d.modes.iter().zip(exp.omegas.iter()) {
                assert!(
                    (got.omega - want).abs() < 1e-9,
                    "{}: omega {} vs {want}",
                    spec.name,
                    got.omega
                );
                assert_eq!(got.tag, *tag, "{}: tag at omega {want}", spec.name);
            }
            assert!(
                (d.constant - exp.constant).abs() < 1e-9,
                "{}: constant {} vs {}",
                spec.name,
                d.constant,
                exp.constant
            );
            assert_eq!(d.residual.len(), exp.residual_count, "{} residuals", spec.name);
            let rep = verify(&d, &form, &tol);
            assert!(rep.worst() < 1e-9, "{}: residuals {rep:?}", spec.name);
        }
    }

    #[test]
    fn dirac_block_needs_every_momentum_component() {
        let p = params(&[("mass", 3.0), ("px", 4.0), ("py", 0.0)]);
        assert!(matches!(
            generate("dirac_field", &p),
            Err(Error::MissingParameter(k)) if k == "pz"
        ));
    }

    #[test]
    fn unknown_model_is_reported_by_name() {
        assert!(matches!(
            generate("isotropic_turbine", &BTreeMap::new()),
            Err(Error::UnknownModel(n)) if n == "isotropic_turbine"
        ));
    }

    #[test]
    fn ring_rows_sum_to_zero() {
        let k = ring_laplacian(7, 1.3);
        for l in 0..7 {
            assert!(k.row(l).sum().abs() < 1e-15);
        }
    }

    #[test]
    fn oversized_ring_is_rejected() {
        let p = params(&[("sites", 64.0), ("spring", 1.0), ("mass", 1.0)]);
        assert!(matches!(
            generate("phonon_ring", &p),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn massless_zero_momentum_scalar_is_rejected() {
        let p = params(&[("mass", 0.0), ("momentum", 0.0)]);
        assert!(matches!(
            generate("klein_gordon", &p),
            Err(Error::InvalidParameter(_))
        ));
    }
}
