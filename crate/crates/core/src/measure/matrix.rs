//! Symmetric 2×2 matrices and the bivariate normal density.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Symmetric matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { a: 1.0, b: 0.0, c: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(self.a * s, self.b * s, self.c * s)
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let d = (0.5 * (self.a - self.c)).hypot(self.b);
        (m - d, m + d)
    }

    /// Spectral norm `max |λ|`.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Result<Sym2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::MatrixDomain("singular matrix".into()));
        }
        Ok(Sym2::new(self.c / det, -self.b / det, self.a / det))
    }

    /// Unique symmetric positive definite square root.
    ///
    /// For SPD `A`: `√A = (A + √det(A)·I) / √(tr A + 2√det(A))`.
    pub fn sqrt(&self) -> Result<Sym2> {
        if !self.is_positive_definite() {
            return Err(Error::MatrixDomain(format!("matrix {self:?} is not positive definite")));
        }
        let s = self.det().sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        Ok(Sym2::new((self.a + s) / t, self.b / t, (self.c + s) / t))
    }

    /// `A^{-1/2}`.
    pub fn inv_sqrt(&self) -> Result<Sym2> {
        self.inverse()?.sqrt()
    }

    pub fn mul(&self, o: &Sym2) -> [[f64; 2]; 2] {
        [
            [self.a * o.a + self.b * o.b, self.a * o.b + self.b * o.c],
            [self.b * o.a + self.c * o.b, self.b * o.b + self.c * o.c],
        ]
    }

    /// Row vector times matrix: `v·A`.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [v[0] * self.a + v[1] * self.b, v[0] * self.b + v[1] * self.c]
    }
}

/// Density of `N(a, K)` at `m`: `(det K)^{-1/2} (2π)^{-1} exp(−|(m−a)K^{-1/2}|²/2)`.
pub fn gaussian_density(a: [f64; 2], k: &Sym2, m: [f64; 2]) -> Result<f64> {
    if !k.is_positive_definite() {
        return Err(Error::MatrixDomain("covariance must be symmetric positive definite".into()));
    }
    let v = k.inv_sqrt()?;
    let w = v.apply([m[0] - a[0], m[1] - a[1]]);
    let q = w[0] * w[0] + w[1] * w[1];
    Ok((-0.5 * q).exp() / (2.0 * std::f64::consts::PI * k.det().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vkv(v: &Sym2, k: &Sym2) -> [[f64; 2]; 2] {
        let vk = v.mul(k);
        [
            [vk[0][0] * v.a + vk[0][1] * v.b, vk[0][0] * v.b + vk[0][1] * v.c],
            [vk[1][0] * v.a + vk[1][1] * v.b, vk[1][0] * v.b + vk[1][1] * v.c],
        ]
    }

    #[test]
    fn density_at_mean() {
        let k = Sym2::new(3.0, 1.0, 2.0);
        let f = gaussian_density([1.0, 2.0], &k, [1.0, 2.0]).unwrap();
        assert!((f - 1.0 / (2.0 * std::f64::consts::PI * 5f64.sqrt())).abs() < 1e-15);
        assert!(gaussian_density([0.0, 0.0], &Sym2::new(1.0, 2.0, 1.0), [0.0, 0.0]).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let k = Sym2::new(2.0, 0.7, 1.0);
        let a = [0.3, -0.2];
        let h = 0.02;
        let mut acc = crate::sum::KahanSum::new();
        let steps = (24.0 / h) as i64;
        for i in -steps / 2..steps / 2 {
            for j in -steps / 2..steps / 2 {
                acc.add(gaussian_density(a, &k, [i as f64 * h, j as f64 * h]).unwrap() * h * h);
            }
        }
        assert!((acc.value() - 1.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn inverse_square_root(a in 0.1f64..100.0, c in 0.1f64..100.0, t in -0.99f64..0.99) {
            let b = t * (a * c).sqrt();
            let k = Sym2::new(a, b, c);
            let v = k.inv_sqrt().unwrap();
            let p = vkv(&v, &k);
            prop_assert!((p[0][0] - 1.0).abs() < 1e-10);
            prop_assert!((p[1][1] - 1.0).abs() < 1e-10);
            prop_assert!(p[0][1].abs() < 1e-10 && p[1][0].abs() < 1e-10);
            prop_assert!(v.is_positive_definite());
            // ‖V‖² = ‖K⁻¹‖
            let lhs = v.norm().powi(2);
            let rhs = k.inverse().unwrap().norm();
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-10);
        }

        #[test]
        fn inverse_norm_identity(a in -50f64..50.0, b in -50f64..50.0, c in -50f64..50.0) {
            let m = Sym2::new(a, b, c);
            prop_assume!(m.det().abs() > 1e-3);
            let lhs = m.inverse().unwrap().norm();
            let rhs = m.norm() / m.det().abs();
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-9);
        }
    }
}
