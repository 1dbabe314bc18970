//! Numerical thresholds used across the pipeline.
//!
//! Every base is multiplied by a global scale factor read once from the
//! `QUADIAG_TOL_SCALE` environment variable, so a whole run can be loosened
//! or tightened without touching individual knobs.

use std::sync::OnceLock;

static ENV_SCALE: OnceLock<f64> = OnceLock::new();

fn env_scale() -> f64 {
    *ENV_SCALE.get_or_init(|| {
        std::env::var("QUADIAG_TOL_SCALE")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s > 0.0)
            .unwrap_or(1.0)
    })
}

/// Tolerance bases. Methods turn a base into an absolute threshold by
/// folding in the scale of the object under test, as `base * (1 + scale)`.
#[derive(Clone, Debug)]
pub struct Tolerances {
    /// Global multiplier applied to every base.
    pub scale: f64,
    /// Structural symmetry of input blocks (Hermitian alpha, (anti)symmetric gamma).
    pub structural: f64,
    /// Threshold below which an imaginary part counts as zero.
    pub real: f64,
    /// Eigenvalue clustering and numerical-rank cutoff for null spaces.
    pub rank: f64,
    /// Verification of metric orthonormality after Gram-Schmidt.
    pub orth: f64,
    /// Isotropy test: |v'Gv| relative to (v'v)*|G|.
    pub iso: f64,
    /// Eigenpair and conserved-quantity residuals, relative to |D|*|v|.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            scale: env_scale(),
            structural: 1e-12,
            real: 1e-9,
            rank: 1e-8,
            orth: 1e-9,
            iso: 1e-10,
            residual: 1e-9,
        }
    }
}

impl Tolerances {
    /// Absolute threshold for structural checks on a block with largest entry `m`.
    pub fn tau_struct(&self, m: f64) -> f64 {
        self.scale * self.structural * (1.0 + m)
    }

    /// Absolute threshold for treating an imaginary part as zero, given the
    /// magnitude `d` of the matrix the value came from.
    pub fn tau_real(&self, d: f64) -> f64 {
        self.scale * self.real * (1.0 + d)
    }

    /// Two eigenvalues within this distance belong to one cluster.
    pub fn tau_cluster(&self, d: f64) -> f64 {
        self.scale * self.rank * (1.0 + d)
    }

    /// Singular values at or below this count as zero when extracting null spaces.
    pub fn tau_rank(&self, d: f64) -> f64 {
        self.scale * self.rank * (1.0 + d)
    }

    /// Allowed deviation from exact G-orthonormality, `g` the magnitude of G.
    pub fn tau_orth(&self, g: f64) -> f64 {
        self.scale * self.orth * (1.0 + g)
    }

    /// A vector with |v'Gv| at or below this is treated as isotropic.
    /// `vv` is the Euclidean norm squared of v, `g` the magnitude of G.
    pub fn tau_iso(&self, vv: f64, g: f64) -> f64 {
        self.scale * self.iso * vv * g
    }

    /// Residual bound for an eigenpair claim, `dv` the product |D|*|v|.
    pub fn tau_residual(&self, dv: f64) -> f64 {
        self.scale * self.residual * (1.0 + dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_grow_with_matrix_scale() {
        let tol = Tolerances::default();
        assert!(tol.tau_real(0.0) < tol.tau_real(100.0));
        assert_eq!(tol.tau_struct(0.0), tol.scale * 1e-12);
    }

    #[test]
    fn explicit_scale_multiplies_every_base() {
        let tol = Tolerances {
            scale: 10.0,
            ..Tolerances::default()
        };
        assert_eq!(tol.tau_orth(0.0), 1e-8);
        assert_eq!(tol.tau_iso(2.0, 3.0), 10.0 * 1e-10 * 6.0);
    }
}
