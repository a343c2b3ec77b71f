//! The grand-canonical measure `Q_z^r` on convex lattice polygonal lines.
//!
//! Under `Q_z^r` the multiplicities `ν(x)` of the primitive directions are
//! independent negative binomials with shape `r` and parameter `z^x`.
//! The parameters `z = (z1, z2)` are calibrated so that the expected
//! endpoint matches a target `n`.

mod law;
mod matrix;
mod sums;
mod window;

pub use law::{log_weights, weight_bk, MomentCoefficients, NegBinomial, MAX_MOMENT_ORDER};
pub use matrix::{gaussian_density, Sym2};
pub use sums::{
    coprime_exponential_sum, covariance, covariance_asymptotic, expected_endpoint, expected_profile, log_partition,
    lyapunov_coefficient, Bounded, MomentSummary, SumMethod,
};
pub use window::{exp_poly_tail, select_window, select_window_for, SumKind, TruncationWindow};

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::lattice::Direction;
use crate::{Error, Result};

/// Apéry's constant to 20 significant digits.
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

/// `ζ(2) = π²/6`.
pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// `κ = (ζ(3)/ζ(2))^{1/3}`.
pub fn kappa() -> f64 {
    static KAPPA: OnceLock<f64> = OnceLock::new();
    *KAPPA.get_or_init(|| {
        let (lo, hi) = zeta3_bracket(20_000);
        assert!(lo <= ZETA3 && ZETA3 <= hi, "pinned ζ(3) outside its series bracket");
        (ZETA3 / ZETA2).cbrt()
    })
}

/// Bracket for `ζ(3)`: partial sum `S_N` plus the integral tail bounds
/// `1/(2(N+1)²) ≤ Σ_{k>N} k⁻³ ≤ 1/(2N²)`.
pub fn zeta3_bracket(terms: u64) -> (f64, f64) {
    let partial = crate::sum::kahan((1..=terms).rev().map(|k| (k as f64).powi(-3)));
    let nf = terms as f64;
    (partial + 0.5 / ((nf + 1.0) * (nf + 1.0)), partial + 0.5 / (nf * nf))
}

/// Allowed range of the aspect ratio `n2/n1`.
pub const ASPECT_RANGE: (f64, f64) = (0.1, 10.0);

/// Calibrated parameter bundle of `Q_z^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCParams {
    pub n: (u32, u32),
    pub r: f64,
    pub kappa: f64,
    pub delta: (f64, f64),
    pub alpha: (f64, f64),
    pub z: (f64, f64),
    pub aspect: f64,
    /// False once `z` has been overridden away from the calibrated value.
    pub calibrated: bool,
}

/// Calibrated parameters: `δ1 = κ r^{1/3} (n2/n1)^{1/3}`, `δ2 = κ r^{1/3} (n1/n2)^{1/3}`,
/// `α_j = δ_j n_j^{-1/3}`, `z_j = e^{-α_j}`.
pub fn calibrate(n: (u32, u32), r: f64) -> Result<GCParams> {
    if n.0 == 0 || n.1 == 0 {
        return Err(Error::InvalidArgument(format!("endpoint coordinates must be positive, got ({}, {})", n.0, n.1)));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("r must be a positive real, got {r}")));
    }
    let (n1, n2) = (n.0 as f64, n.1 as f64);
    let aspect = n2 / n1;
    if !(ASPECT_RANGE.0..=ASPECT_RANGE.1).contains(&aspect) {
        return Err(Error::CalibrationDomain { aspect });
    }
    let k = kappa();
    let rc = r.cbrt();
    let delta = (k * rc * aspect.cbrt(), k * rc * (1.0 / aspect).cbrt());
    let alpha = (delta.0 / n1.cbrt(), delta.1 / n2.cbrt());
    Ok(GCParams { n, r, kappa: k, delta, alpha, z: ((-alpha.0).exp(), (-alpha.1).exp()), aspect, calibrated: true })
}

impl GCParams {
    /// Same `n` and `r` but an arbitrary `z ∈ (0,1)²`.
    pub fn with_z(&self, z: (f64, f64)) -> Result<GCParams> {
        if !(z.0 > 0.0 && z.0 < 1.0 && z.1 > 0.0 && z.1 < 1.0) {
            return Err(Error::InvalidArgument(format!("z must lie in (0,1)², got {z:?}")));
        }
        let alpha = (-z.0.ln(), -z.1.ln());
        Ok(GCParams {
            alpha,
            delta: (alpha.0 * (self.n.0 as f64).cbrt(), alpha.1 * (self.n.1 as f64).cbrt()),
            z,
            calibrated: false,
            ..*self
        })
    }

    /// Same `n`, `z` with another shape parameter.
    pub fn with_r(&self, r: f64) -> GCParams {
        GCParams { r, ..*self }
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha.0.min(self.alpha.1)
    }

    /// `ln z^x = −⟨α, x⟩`.
    #[inline]
    pub fn ln_zx(&self, x: Direction) -> f64 {
        -(self.alpha.0 * x.x1() as f64 + self.alpha.1 * x.x2() as f64)
    }

    #[inline]
    pub fn zx(&self, x: Direction) -> f64 {
        self.ln_zx(x).exp()
    }

    /// Law of `ν(x)`.
    #[inline]
    pub fn law(&self, x: Direction) -> NegBinomial {
        NegBinomial::new(self.r, self.zx(x))
    }
}

/// `Q_z^r{ν(x) = k}`.
pub fn nu_pmf(params: &GCParams, x: Direction, k: u64) -> f64 {
    params.law(x).pmf(k)
}

/// Mean and variance of `ν(x)`.
pub fn nu_moments(params: &GCParams, x: Direction) -> (f64, f64) {
    let law = params.law(x);
    (law.mean(), law.variance())
}

/// Raw moment `E ν(x)^k`, `k ≤ 8`.
pub fn raw_moment(params: &GCParams, x: Direction, k: u32) -> Result<f64> {
    MomentCoefficients::new(params.r).raw_moment(params.zx(x), k)
}

/// Central absolute moment `E|ν(x) − Eν(x)|^k`.
pub fn central_abs_moment(params: &GCParams, x: Direction, k: u32, tol: f64) -> Result<f64> {
    params.law(x).central_abs_moment(k, tol)
}
