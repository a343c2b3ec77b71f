//! Lattice sums of the grand-canonical measure.
//!
//! Each sum exists in two independent forms: a direct truncated sum over
//! primitive directions, and a Möbius-inverted series over all lattice
//! points where the inner geometric sums are in closed form. Agreement of
//! the two is the main correctness check for both.

use serde::{Deserialize, Serialize};

use super::window::{exp_poly_tail, select_window_for, SumKind};
use super::{GCParams, Sym2};
use crate::exec;
use crate::geometry::Tangent;
use crate::lattice::{coprime_directions, mobius_sieve, Direction, DEFAULT_SIEVE_LIMIT};
use crate::sum::KahanSum;
use crate::{Error, Result};

/// A truncated sum with a bound on what the truncation neglected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded<T> {
    pub value: T,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMethod {
    /// Truncated sum over primitive directions.
    Direct,
    /// Möbius-inverted double series, with `μ` sieved up to `sieve_limit`.
    Moebius { sieve_limit: u64 },
}

impl SumMethod {
    pub const MOEBIUS: SumMethod = SumMethod::Moebius { sieve_limit: DEFAULT_SIEVE_LIMIT };
}

#[inline]
fn one_minus(y: f64) -> f64 {
    // 1 − y for y = e^{−t}, computed without cancellation
    -(y.ln()).exp_m1()
}

fn window_directions(params: &GCParams, tol: f64, kind: SumKind) -> (Vec<Direction>, f64) {
    let w = select_window_for(params, tol, kind);
    (coprime_directions(w.degree_bound), w.tail_bound)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Divisor sums `D(s) = Σ_{m|s} m μ(m)` for `s ≤ cutoff`, index 0 unused.
fn divisor_sums(cutoff: u64, sieve_limit: u64) -> Result<Vec<f64>> {
    if cutoff > sieve_limit {
        return Err(Error::SieveLimit { needed: cutoff, limit: sieve_limit });
    }
    let mu = mobius_sieve(cutoff.max(1))?;
    let mut d = vec![0.0; cutoff as usize + 1];
    for m in 1..=cutoff {
        let v = mu.mu(m);
        if v == 0 {
            continue;
        }
        let w = (m as i64 * v as i64) as f64;
        let mut s = m;
        while s <= cutoff {
            d[s as usize] += w;
            s += m;
        }
    }
    Ok(d)
}

/// Smallest `S` with `coef · Σ_{s>S}(s+1)s^p e^{−α_min s} < tol`.
fn series_cutoff(params: &GCParams, tol: f64, coef: f64, p: u32) -> (u64, f64) {
    let a = params.alpha_min();
    let bound = |s: u32| coef * exp_poly_tail(a, s, p);
    let mut s = 1u32;
    while bound(s) >= tol {
        s *= 2;
    }
    let (mut lo, mut hi) = (s / 2, s);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < tol {
            hi = mid
        } else {
            lo = mid
        }
    }
    (hi as u64, bound(hi))
}

/// `E ξ = Σ_x x · r z^x/(1−z^x)`, each coordinate within `tol`.
pub fn expected_endpoint(params: &GCParams, method: SumMethod, tol: f64) -> Result<Bounded<[f64; 2]>> {
    check_tol(tol)?;
    let r = params.r;
    match method {
        SumMethod::Direct => {
            let (dirs, tail) = window_directions(params, tol, SumKind::Mean);
            let v = exec::sum_indexed::<2, _>(dirs.len(), |i| {
                let x = dirs[i];
                let y = params.zx(x);
                let m = r * y / one_minus(y);
                [x.x1() as f64 * m, x.x2() as f64 * m]
            });
            Ok(Bounded { value: v, tail_bound: tail })
        }
        SumMethod::Moebius { sieve_limit } => {
            // |D(s)| ≤ s and each closed-form factor ≤ e^{−sα}/(1−e^{−α_min})³
            let q = one_minus((-params.alpha_min()).exp());
            let (cut, tail) = series_cutoff(params, tol, r / q.powi(3), 0);
            let d = divisor_sums(cut, sieve_limit)?;
            let (a1, a2) = params.alpha;
            let mut e1 = KahanSum::new();
            let mut e2 = KahanSum::new();
            for s in 1..=cut {
                let ds = d[s as usize];
                if ds == 0.0 {
                    continue;
                }
                let q1 = (-(s as f64) * a1).exp();
                let q2 = (-(s as f64) * a2).exp();
                let (p1, p2) = (one_minus(q1), one_minus(q2));
                e1.add(ds * q1 / (p1 * p1 * p2));
                e2.add(ds * q2 / (p2 * p2 * p1));
            }
            Ok(Bounded { value: [r * e1.value(), r * e2.value()], tail_bound: tail })
        }
    }
}

/// `E ξ(t)`: the expected endpoint of the part of the line with scaled
/// tangent slope at most `t`, i.e. directions with `x2/x1 ≤ t·n2/n1`.
pub fn expected_profile(params: &GCParams, t: Tangent, tol: f64) -> Result<Bounded<[f64; 2]>> {
    check_tol(tol)?;
    let r = params.r;
    let (dirs, tail) = window_directions(params, tol, SumKind::Mean);
    let v = exec::sum_indexed::<2, _>(dirs.len(), |i| {
        let x = dirs[i];
        if !t.admits(x, params.n) {
            return [0.0, 0.0];
        }
        let y = params.zx(x);
        let m = r * y / one_minus(y);
        [x.x1() as f64 * m, x.x2() as f64 * m]
    });
    Ok(Bounded { value: v, tail_bound: tail })
}

/// Covariance matrix `K_z` of `ξ`, entries within `tol`.
pub fn covariance(params: &GCParams, method: SumMethod, tol: f64) -> Result<Bounded<Sym2>> {
    check_tol(tol)?;
    let r = params.r;
    match method {
        SumMethod::Direct => {
            let (dirs, tail) = window_directions(params, tol, SumKind::Covariance);
            let [k11, k12, k22] = exec::sum_indexed::<3, _>(dirs.len(), |i| {
                let x = dirs[i];
                let y = params.zx(x);
                let p = one_minus(y);
                let v = r * y / (p * p);
                let (x1, x2) = (x.x1() as f64, x.x2() as f64);
                [x1 * x1 * v, x1 * x2 * v, x2 * x2 * v]
            });
            let k = Sym2::new(k11, k12, k22);
            if !k.is_positive_definite() {
                return Err(Error::MatrixDomain("covariance sum is not positive definite".into()));
            }
            Ok(Bounded { value: k, tail_bound: tail })
        }
        SumMethod::Moebius { sieve_limit } => {
            // |s·D(s)| ≤ s² and each closed-form factor ≤ 2e^{−sα}/(1−e^{−α_min})⁴
            let q = one_minus((-params.alpha_min()).exp());
            let (cut, tail) = series_cutoff(params, tol, 2.0 * r / q.powi(4), 1);
            let d = divisor_sums(cut, sieve_limit)?;
            let (a1, a2) = params.alpha;
            let mut k = [KahanSum::new(); 3];
            for s in 1..=cut {
                let c = s as f64 * d[s as usize];
                if c == 0.0 {
                    continue;
                }
                let q1 = (-(s as f64) * a1).exp();
                let q2 = (-(s as f64) * a2).exp();
                let (p1, p2) = (one_minus(q1), one_minus(q2));
                k[0].add(c * q1 * (1.0 + q1) / (p1 * p1 * p1 * p2));
                k[1].add(c * q1 * q2 / (p1 * p1 * p2 * p2));
                k[2].add(c * q2 * (1.0 + q2) / (p2 * p2 * p2 * p1));
            }
            let k = Sym2::new(r * k[0].value(), r * k[1].value(), r * k[2].value());
            if !k.is_positive_definite() {
                return Err(Error::MatrixDomain("covariance series is not positive definite".into()));
            }
            Ok(Bounded { value: k, tail_bound: tail })
        }
    }
}

/// Leading-order covariance `(n1n2)^{2/3}/(r^{1/3}κ) · [[2n1/n2, 1], [1, 2n2/n1]]`
/// and its determinant `3(n1n2)^{4/3}/(r^{2/3}κ²)`.
pub fn covariance_asymptotic(n: (u32, u32), r: f64) -> (Sym2, f64) {
    let (n1, n2) = (n.0 as f64, n.1 as f64);
    let k = super::kappa();
    let scale = (n1 * n2).powf(2.0 / 3.0) / (r.cbrt() * k);
    let m = Sym2::new(2.0 * n1 / n2, 1.0, 2.0 * n2 / n1).scale(scale);
    let det = 3.0 * (n1 * n2).powf(4.0 / 3.0) / (r.powf(2.0 / 3.0) * k * k);
    (m, det)
}

/// `ln β̃^r(z) = −r Σ_x ln(1 − z^x)`.
pub fn log_partition(params: &GCParams, tol: f64) -> Result<Bounded<f64>> {
    check_tol(tol)?;
    let r = params.r;
    let (dirs, tail) = window_directions(params, tol, SumKind::Mass);
    let [v] = exec::sum_indexed::<1, _>(dirs.len(), |i| [-(-params.zx(dirs[i])).ln_1p()]);
    Ok(Bounded { value: r * v, tail_bound: tail })
}

/// `Σ_{x primitive} e^{−⟨α,x⟩}`.
pub fn coprime_exponential_sum(params: &GCParams, tol: f64) -> Result<Bounded<f64>> {
    check_tol(tol)?;
    let (dirs, tail) = window_directions(&params.with_r(1.0), tol, SumKind::Mass);
    let [v] = exec::sum_indexed::<1, _>(dirs.len(), |i| [params.zx(dirs[i])]);
    Ok(Bounded { value: v, tail_bound: tail })
}

/// Lyapunov coefficient `L_z = ‖V_z‖³ Σ_x |x|³ μ₃(x)`; `tol` bounds the
/// error of the lattice sum.
pub fn lyapunov_coefficient(params: &GCParams, v_z: &Sym2, tol: f64) -> Result<Bounded<f64>> {
    check_tol(tol)?;
    let (dirs, tail) = window_directions(params, 0.5 * tol, SumKind::Lyapunov);
    let per_term = 0.5 * tol / dirs.len().max(1) as f64;
    let terms = exec::map_indexed(dirs.len(), |i| {
        let x = dirs[i];
        let n3 = x.norm().powi(3);
        params.law(x).central_abs_moment(3, per_term / n3).map(|m| n3 * m)
    });
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t?);
    }
    let norm3 = v_z.norm().powi(3);
    Ok(Bounded { value: norm3 * acc.value(), tail_bound: norm3 * (tail + 0.5 * tol) })
}

/// Moments of `ξ` under `Q_z^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub a_z: [f64; 2],
    pub k_z: Sym2,
    pub v_z: Sym2,
    pub det_k: f64,
    pub l_z: f64,
    pub truncation_tail: f64,
}

impl MomentSummary {
    /// Direct sums with absolute tolerances `rel_tol` times the natural
    /// scale of each quantity.
    pub fn compute(params: &GCParams, rel_tol: f64) -> Result<Self> {
        let (n1, n2) = (params.n.0 as f64, params.n.1 as f64);
        let a = expected_endpoint(params, SumMethod::Direct, rel_tol * n1.max(n2))?;
        let k = covariance(params, SumMethod::Direct, rel_tol * (n1 * n2).powf(2.0 / 3.0))?;
        let v = k.value.inv_sqrt()?;
        let l = lyapunov_coefficient(params, &v, rel_tol.max(1e-14))?;
        Ok(Self {
            a_z: a.value,
            k_z: k.value,
            v_z: v,
            det_k: k.value.det(),
            l_z: l.value,
            truncation_tail: a.tail_bound.max(k.tail_bound).max(l.tail_bound),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::calibrate;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn endpoint_methods_agree() {
        for &n in &[(8u32, 8u32), (27, 64)] {
            for &r in &[0.5, 1.0, 2.0] {
                let p = calibrate(n, r).unwrap();
                let tol = 1e-12 * n.0.max(n.1) as f64;
                let d = expected_endpoint(&p, SumMethod::Direct, tol).unwrap().value;
                let m = expected_endpoint(&p, SumMethod::MOEBIUS, tol).unwrap().value;
                assert!(rel(d[0], m[0]) < 1e-8 && rel(d[1], m[1]) < 1e-8, "{n:?} {r}: {d:?} {m:?}");
            }
        }
    }

    #[test]
    fn covariance_methods_agree() {
        for &n in &[(8u32, 8u32), (27, 64)] {
            for &r in &[0.5, 1.0, 2.0] {
                let p = calibrate(n, r).unwrap();
                let tol = 1e-12 * (n.0 as f64 * n.1 as f64).powf(2.0 / 3.0);
                let d = covariance(&p, SumMethod::Direct, tol).unwrap().value;
                let m = covariance(&p, SumMethod::MOEBIUS, tol).unwrap().value;
                assert!(rel(d.a, m.a) < 1e-8 && rel(d.b, m.b) < 1e-8 && rel(d.c, m.c) < 1e-8);
            }
        }
    }

    #[test]
    fn sieve_limit_error() {
        let p = calibrate((64, 64), 1.0).unwrap();
        let res = expected_endpoint(&p, SumMethod::Moebius { sieve_limit: 10 }, 1e-9);
        assert!(matches!(res, Err(Error::SieveLimit { .. })));
    }

    #[test]
    fn endpoint_near_target_and_symmetric() {
        let p = calibrate((64, 64), 1.0).unwrap();
        let e = expected_endpoint(&p, SumMethod::Direct, 1e-10).unwrap().value;
        assert!(rel(e[0], 64.0) < 0.05 && rel(e[1], 64.0) < 0.05, "{e:?}");
        assert!(rel(e[0], e[1]) < 1e-12);
    }

    #[test]
    fn profile_limits() {
        let p = calibrate((20, 30), 1.5).unwrap();
        let zero = expected_profile(&p, Tangent::ZERO, 1e-12).unwrap().value;
        let z1 = p.z.0;
        assert!(rel(zero[0], 1.5 * z1 / (1.0 - z1)) < 1e-13 && zero[1] == 0.0);
        let inf = expected_profile(&p, Tangent::Infinity, 1e-12).unwrap().value;
        let e = expected_endpoint(&p, SumMethod::Direct, 1e-12).unwrap().value;
        assert!(rel(inf[0], e[0]) < 1e-13 && rel(inf[1], e[1]) < 1e-13);
        let mut last = [0.0, 0.0];
        for i in 0..20 {
            let t = Tangent::Rational { num: i, den: 4 };
            let v = expected_profile(&p, t, 1e-12).unwrap().value;
            assert!(v[0] >= last[0] && v[1] >= last[1]);
            last = v;
        }
    }

    #[test]
    fn covariance_symmetry_and_asymptotics() {
        let p = calibrate((64, 64), 1.0).unwrap();
        let k = covariance(&p, SumMethod::Direct, 1e-9).unwrap().value;
        let (b, det) = covariance_asymptotic((64, 64), 1.0);
        assert!(rel(k.a, b.a) < 0.2 && rel(k.b, b.b) < 0.2 && rel(k.c, b.c) < 0.2, "{k:?} {b:?}");
        assert!(rel(b.det(), det) < 1e-12);
        let kap = crate::measure::kappa();
        assert!(rel(b.a, 2.0 * 64f64.powf(4.0 / 3.0) / kap) < 1e-12);
        assert_eq!(b.a, b.c);
        assert!(rel(b.a, 2.0 * b.b) < 1e-15);
    }

    #[test]
    fn log_partition_properties() {
        let p = calibrate((12, 9), 1.0).unwrap();
        let one = log_partition(&p, 1e-12).unwrap();
        let three = log_partition(&p.with_r(3.0), 1e-12).unwrap();
        assert!(one.value > 0.0);
        assert!(rel(three.value, 3.0 * one.value) < 1e-10);
        // doubling the window moves the value by less than the bound
        let w = select_window_for(&p, 1e-12, SumKind::Mass);
        let dirs = coprime_directions(2 * w.degree_bound);
        let wide: f64 = crate::sum::kahan(dirs.iter().map(|&x| -(-p.zx(x)).ln_1p()));
        assert!((wide - one.value).abs() < 1e-12);
    }

    #[test]
    fn coprime_sum_asymptotic() {
        // relative correction is O(α), so it shrinks along the sequence
        let mut last = f64::INFINITY;
        for n in [27u32, 125, 1000] {
            let p = calibrate((n, n), 1.0).unwrap();
            let s = coprime_exponential_sum(&p, 1e-12).unwrap().value;
            let err = (s * p.alpha.0 * p.alpha.1 * crate::measure::ZETA2 - 1.0).abs();
            assert!(err < last && err < 0.2, "{err}");
            last = err;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn lyapunov_trend() {
        let mut last = f64::INFINITY;
        for n in [27u32, 64, 125] {
            let p = calibrate((n, n), 1.0).unwrap();
            let s = MomentSummary::compute(&p, 1e-12).unwrap();
            assert!(s.l_z > 0.0 && s.l_z < last);
            // L_z ≍ |n|^{-1/3}: the rescaled value stays within a fixed band
            let scaled = s.l_z * (n as f64 * 2f64.sqrt()).cbrt();
            assert!(scaled > 8.0 && scaled < 32.0, "{scaled}");
            last = s.l_z;
        }
    }

    #[test]
    fn moment_summary_invariants() {
        let p = calibrate((30, 45), 0.8).unwrap();
        let s = MomentSummary::compute(&p, 1e-12).unwrap();
        let v = s.v_z;
        let vk = v.mul(&s.k_z);
        let vkv00 = vk[0][0] * v.a + vk[0][1] * v.b;
        let vkv11 = vk[1][0] * v.b + vk[1][1] * v.c;
        assert!((vkv00 - 1.0).abs() < 1e-8 && (vkv11 - 1.0).abs() < 1e-8);
        assert!(s.det_k > 0.0 && s.l_z > 0.0);
        assert!(rel(v.norm().powi(2), s.k_z.inverse().unwrap().norm()) < 1e-10);
    }
}
