//! Problem and report file schemas. Complex entries travel as [re, im]
//! pairs; plain numbers are accepted on input for real values.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use quadiag::{
    BosonForm, CMat, CoordForm, Diagonalization, FermionForm, Mode, ModeTag, PairingForm,
    QuadraticForm, Statistics, VerificationReport,
};

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumOrPair {
    Num(f64),
    Pair([f64; 2]),
}

impl NumOrPair {
    fn to_complex(self) -> Complex64 {
        match self {
            NumOrPair::Num(x) => Complex64::new(x, 0.0),
            NumOrPair::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default)]
    pub allow_partial: bool,
    #[serde(default)]
    pub tol_real: Option<f64>,
    #[serde(default)]
    pub tol_rank: Option<f64>,
    #[serde(default)]
    pub tol_orth: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub alpha: Option<Vec<Vec<NumOrPair>>>,
    #[serde(default)]
    pub gamma: Option<Vec<Vec<NumOrPair>>>,
    #[serde(default)]
    pub epsilon: Option<Vec<Vec<NumOrPair>>>,
    #[serde(default)]
    pub mu: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub kappa: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub gamma_pq: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub signature: Option<Vec<i8>>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub parameters: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub options: Option<ProblemOptions>,
}

fn matrix_dims(field: &str, rows: &[Vec<impl Sized>], n: usize) -> Result<(), String> {
    if rows.len() != n {
        return Err(format!("field `{field}`: expected {n} rows, found {}", rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(format!(
                "field `{field}`: row {i} has {} entries, expected {n}",
                row.len()
            ));
        }
    }
    Ok(())
}

fn complex_matrix(
    field: &str,
    rows: &Option<Vec<Vec<NumOrPair>>>,
    n: usize,
) -> Result<CMat, String> {
    let rows = rows
        .as_ref()
        .ok_or_else(|| format!("field `{field}` is required for this kind"))?;
    matrix_dims(field, rows, n)?;
    let mut m = CMat::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.to_complex();
        }
    }
    Ok(m)
}

fn real_matrix(field: &str, rows: &Option<Vec<Vec<f64>>>, n: usize) -> Result<Array2<f64>, String> {
    let rows = rows
        .as_ref()
        .ok_or_else(|| format!("field `{field}` is required for this kind"))?;
    matrix_dims(field, rows, n)?;
    let mut m = Array2::<f64>::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    Ok(m)
}

fn infer_n(p: &ProblemFile) -> Result<usize, String> {
    if let Some(n) = p.n {
        return Ok(n);
    }
    let from = p
        .alpha
        .as_ref()
        .map(|m| m.len())
        .or_else(|| p.mu.as_ref().map(|m| m.len()));
    from.ok_or_else(|| "field `n` is required when no matrix fixes the size".to_string())
}

/// Build the library form for a parsed problem.
pub fn build_form(p: &ProblemFile) -> Result<QuadraticForm, String> {
    let lib = |e: quadiag::Error| e.to_string();
    match p.kind.as_str() {
        "boson" | "fermion" => {
            let n = infer_n(p)?;
            let alpha = complex_matrix("alpha", &p.alpha, n)?;
            let gamma = match &p.gamma {
                Some(_) => complex_matrix("gamma", &p.gamma, n)?,
                None => CMat::zeros((n, n)),
            };
            if p.kind == "boson" {
                Ok(QuadraticForm::Boson(BosonForm::new(alpha, gamma).map_err(lib)?))
            } else {
                Ok(QuadraticForm::Fermion(
                    FermionForm::new(alpha, gamma).map_err(lib)?,
                ))
            }
        }
        "pairing-bose" | "pairing-fermi" => {
            let n = infer_n(p)?;
            let alpha = complex_matrix("alpha", &p.alpha, n)?;
            let epsilon = complex_matrix("epsilon", &p.epsilon, n)?;
            let gamma = complex_matrix("gamma", &p.gamma, n)?;
            let stats = if p.kind == "pairing-bose" {
                Statistics::Bose
            } else {
                Statistics::Fermi
            };
            Ok(QuadraticForm::Pairing(
                PairingForm::new(alpha, epsilon, gamma, stats).map_err(lib)?,
            ))
        }
        "coord" => {
            let n = p
                .n
                .or_else(|| p.mu.as_ref().map(|m| m.len()))
                .ok_or_else(|| "field `n` is required when `mu` is absent".to_string())?;
            let mu = real_matrix("mu", &p.mu, n)?;
            let kappa = real_matrix("kappa", &p.kappa, n)?;
            let gamma_pq = match &p.gamma_pq {
                Some(_) => real_matrix("gamma_pq", &p.gamma_pq, n)?,
                None => Array2::zeros((n, n)),
            };
            let form = match &p.signature {
                Some(s) => CoordForm::new(mu, kappa, gamma_pq, s.clone()).map_err(lib)?,
                None => CoordForm::standard(mu, kappa, gamma_pq).map_err(lib)?,
            };
            Ok(QuadraticForm::Coord(form))
        }
        "model" => {
            let name = p
                .name
                .as_ref()
                .ok_or_else(|| "field `name` is required for kind \"model\"".to_string())?;
            let empty = BTreeMap::new();
            let params = p.parameters.as_ref().unwrap_or(&empty);
            quadiag::corpus::generate(name, params).map_err(lib)
        }
        other => Err(format!(
            "field `kind`: unknown value `{other}` (expected boson, fermion, pairing-bose, pairing-fermi, coord, or model)"
        )),
    }
}

pub fn tag_str(tag: ModeTag) -> &'static str {
    match tag {
        ModeTag::Normal => "normal",
        ModeTag::HoleTransformed => "hole-transformed",
        ModeTag::TimePolarized => "time-polarized",
    }
}

pub fn tag_from_str(s: &str) -> Option<ModeTag> {
    match s {
        "normal" => Some(ModeTag::Normal),
        "hole-transformed" => Some(ModeTag::HoleTransformed),
        "time-polarized" => Some(ModeTag::TimePolarized),
        _ => None,
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OmegaOut {
    pub omega: f64,
    pub tag: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerificationOut {
    pub metric: f64,
    pub congruence_offdiag: f64,
    pub congruence_diag: f64,
    pub similarity_offdiag: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involution: Option<f64>,
    pub reconstruction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_invariance: Option<f64>,
}

impl From<&VerificationReport> for VerificationOut {
    fn from(r: &VerificationReport) -> Self {
        VerificationOut {
            metric: r.metric_residual,
            congruence_offdiag: r.congruence_offdiag,
            congruence_diag: r.congruence_diag,
            similarity_offdiag: r.similarity_offdiag,
            involution: r.involution_residual,
            reconstruction: r.reconstruction_residual,
            residual_invariance: r.residual_invariance,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct ReportFile {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<OmegaOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformation: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_modes: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn transform_out(t: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..t.nrows())
        .map(|i| (0..t.ncols()).map(|j| [t[(i, j)].re, t[(i, j)].im]).collect())
        .collect()
}

/// Rebuild a diagonalization from a report, for re-verification.
pub fn diagonalization_from_report(
    report: &ReportFile,
    kind: quadiag::FormKind,
) -> Result<Diagonalization, String> {
    let rows = report
        .transformation
        .as_ref()
        .ok_or_else(|| "report has no transformation".to_string())?;
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut t = CMat::zeros((nrows, ncols));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(format!("transformation row {i} is ragged"));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            t[(i, j)] = Complex64::new(*re, *im);
        }
    }
    let omegas = report
        .omegas
        .as_ref()
        .ok_or_else(|| "report has no omegas".to_string())?;
    let modes = omegas
        .iter()
        .map(|o| {
            tag_from_str(&o.tag)
                .map(|tag| Mode { omega: o.omega, tag })
                .ok_or_else(|| format!("unknown tag `{}`", o.tag))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let residual = report
        .residual_modes
        .as_ref()
        .map(|rs| rs.iter().map(|r| Array1::from_vec(r.clone())).collect())
        .unwrap_or_default();
    Ok(Diagonalization {
        t,
        modes,
        constant: report.constant.unwrap_or(0.0),
        residual,
        kind,
    })
}

pub fn render_text(report: &ReportFile) -> String {
    let mut out = String::new();
    out.push_str(&format!("verdict: {}\n", report.verdict));
    if let Some(omegas) = &report.omegas {
        for o in omegas {
            out.push_str(&format!("omega {:+.12e}  {}\n", o.omega, o.tag));
        }
    }
    if let Some(c) = report.constant {
        out.push_str(&format!("constant {c:+.12e}\n"));
    }
    if let Some(rs) = &report.residual_modes {
        for (i, r) in rs.iter().enumerate() {
            let entries: Vec<String> = r.iter().map(|x| format!("{x:+.6e}")).collect();
            out.push_str(&format!("residual {i}: [{}]\n", entries.join(", ")));
        }
    }
    if let Some(v) = &report.verification {
        out.push_str(&format!(
            "residuals: metric {:.3e}, congruence {:.3e}/{:.3e}, similarity {:.3e}, reconstruction {:.3e}\n",
            v.metric, v.congruence_offdiag, v.congruence_diag, v.similarity_offdiag, v.reconstruction
        ));
    }
    if let Some(c) = &report.classification {
        out.push_str(&format!("classification: {c}\n"));
    }
    if let Some(e) = &report.error {
        out.push_str(&format!("error: {e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_numbers_and_pairs_both_parse() {
        let text = r#"{
            "kind": "boson",
            "alpha": [[5.0]],
            "gamma": [[[3.0, 0.5]]]
        }"#;
        let p: ProblemFile = serde_json::from_str(text).unwrap();
        let form = build_form(&p).unwrap();
        match form {
            QuadraticForm::Boson(b) => {
                assert_eq!(b.alpha()[(0, 0)], Complex64::new(5.0, 0.0));
                assert_eq!(b.gamma()[(0, 0)], Complex64::new(3.0, 0.5));
            }
            _ => panic!("wrong form"),
        }
    }

    #[test]
    fn dimension_mismatch_names_the_field() {
        let text = r#"{"kind": "boson", "n": 2, "alpha": [[1.0]]}"#;
        let p: ProblemFile = serde_json::from_str(text).unwrap();
        let err = build_form(&p).unwrap_err();
        assert!(err.contains("`alpha`"), "message was: {err}");
    }

    #[test]
    fn unknown_kind_is_spelled_out() {
        let text = r#"{"kind": "anyon"}"#;
        let p: ProblemFile = serde_json::from_str(text).unwrap();
        let err = build_form(&p).unwrap_err();
        assert!(err.contains("anyon"));
    }

    #[test]
    fn report_roundtrips_through_json() {
        let report = ReportFile {
            verdict: "diagonalized".into(),
            omegas: Some(vec![OmegaOut {
                omega: 4.0,
                tag: "normal".into(),
            }]),
            constant: Some(-0.5),
            transformation: Some(vec![
                vec![[1.25, 0.0], [0.75, 0.0]],
                vec![[0.75, 0.0], [1.25, 0.0]],
            ]),
            ..Default::default()
        };
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: ReportFile = serde_json::from_str(&text).unwrap();
        let d = diagonalization_from_report(&back, quadiag::FormKind::Boson).unwrap();
        assert_eq!(d.t[(0, 1)], Complex64::new(0.75, 0.0));
        assert_eq!(d.modes.len(), 1);
    }
}
