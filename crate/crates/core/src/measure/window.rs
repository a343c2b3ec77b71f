//! Truncation of lattice sums to `x1 + x2 ≤ M` with closed-form tail bounds.
//!
//! For `x ∈ Z²₊` with `x1 + x2 = s` one has `z^x ≤ e^{−α_min s}` and there
//! are `s + 1` such points, so every neglected sum is dominated by a series
//! `coef · Σ_{s>M} (s+1) s^p e^{−α_min s}`.

use serde::{Deserialize, Serialize};

use super::{GCParams, MomentCoefficients};

/// Degree bound together with the bound on what it neglects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub degree_bound: u32,
    pub tail_bound: f64,
}

/// Which lattice sum a window has to truncate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumKind {
    /// `−r Σ ln(1−z^x)` and the probability that any `ν(x) ≠ 0` outside.
    Mass,
    /// `Σ x_j · r z^x/(1−z^x)`.
    Mean,
    /// `Σ x_i x_j · r z^x/(1−z^x)²`.
    Covariance,
    /// `Σ |x|³ μ₃(x)`, via `μ₃ ≤ 8 m₃ ≤ 8 C₃ z^x/(1−z^x)³`.
    Lyapunov,
}

/// `Σ_{s>m} (s+1) s^p e^{−α s}`, an upper bound accurate to ~1e-15 relative.
pub fn exp_poly_tail(alpha: f64, m: u32, p: u32) -> f64 {
    let decay = (-alpha).exp();
    let mut acc = 0.0;
    let mut s = m as f64 + 1.0;
    loop {
        let term = (s + 1.0) * s.powi(p as i32) * (-alpha * s).exp();
        acc += term;
        // term ratio for s' ≥ s is at most ((s+2)/(s+1))·((s+1)/s)^p·e^{−α}
        let rho = (s + 2.0) / (s + 1.0) * ((s + 1.0) / s).powi(p as i32) * decay;
        if rho < 1.0 {
            let rest = term * rho / (1.0 - rho);
            if rest <= 1e-16 * acc || acc == 0.0 && rest == 0.0 {
                return acc + rest;
            }
        }
        s += 1.0;
    }
}

fn coefficient(params: &GCParams, kind: SumKind) -> (f64, u32) {
    let q = -(-params.alpha_min()).exp_m1(); // 1 − e^{−α_min}
    let r = params.r;
    match kind {
        SumKind::Mass => (r / q, 0),
        SumKind::Mean => (r / q, 1),
        SumKind::Covariance => (r / (q * q), 2),
        SumKind::Lyapunov => (8.0 * MomentCoefficients::new(r).upper(3) / q.powi(3), 3),
    }
}

/// Tail bound of a window of degree `m` for the given sum.
pub fn tail_bound(params: &GCParams, kind: SumKind, m: u32) -> f64 {
    let (coef, p) = coefficient(params, kind);
    coef * exp_poly_tail(params.alpha_min(), m, p)
}

/// Smallest `M` whose [`SumKind::Mass`] tail is below `tol`.
pub fn select_window(params: &GCParams, tol: f64) -> TruncationWindow {
    select_window_for(params, tol, SumKind::Mass)
}

/// Smallest `M` whose tail bound for `kind` is below `tol`.
pub fn select_window_for(params: &GCParams, tol: f64, kind: SumKind) -> TruncationWindow {
    assert!(tol > 0.0, "tolerance must be positive");
    let bound = |m| tail_bound(params, kind, m);
    let mut hi = 1u32;
    while bound(hi) >= tol {
        hi = hi.checked_mul(2).expect("window degree overflow");
    }
    let mut lo = hi / 2;
    // invariant: bound(lo) ≥ tol or lo = 0, bound(hi) < tol
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    TruncationWindow { degree_bound: hi, tail_bound: bound(hi) }
}
