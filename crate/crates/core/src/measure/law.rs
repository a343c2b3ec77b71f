//! Per-direction multiplicity law: negative binomial with shape `r` and
//! "failure" probability `y = z^x`.

use crate::{Error, Result};

/// Largest supported raw/central moment order.
pub const MAX_MOMENT_ORDER: u32 = 8;

/// `b_k^r = r(r+1)…(r+k−1)/k!` by the running product.
pub fn weight_bk(r: f64, k: u64) -> f64 {
    let mut b = 1.0;
    for j in 1..=k {
        b *= (r + j as f64 - 1.0) / j as f64;
    }
    b
}

/// `ln b_k^r` for `k = 0..=kmax`.
pub fn log_weights(r: f64, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=kmax {
        acc += ((r + k as f64 - 1.0) / k as f64).ln();
        out.push(acc);
    }
    out
}

/// Coefficients `c_{j,k}` with `m_k = Σ_j c_{j,k} (y/(1−y))^j`.
///
/// Built from `c_{1,1} = r`, `c_{j,k+1} = j·c_{j,k} + (r+j−1)·c_{j−1,k}`.
#[derive(Debug, Clone)]
pub struct MomentCoefficients {
    r: f64,
    // c[k][j], k, j in 0..=MAX
    c: [[f64; MAX_MOMENT_ORDER as usize + 1]; MAX_MOMENT_ORDER as usize + 1],
}

impl MomentCoefficients {
    pub fn new(r: f64) -> Self {
        const M: usize = MAX_MOMENT_ORDER as usize;
        let mut c = [[0.0; M + 1]; M + 1];
        c[1][1] = r;
        for k in 1..M {
            for j in 1..=k + 1 {
                c[k + 1][j] = j as f64 * c[k][j] + (r + j as f64 - 1.0) * c[k][j - 1];
            }
        }
        Self { r, c }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `c_{j,k}`.
    pub fn get(&self, j: u32, k: u32) -> f64 {
        self.c[k as usize][j as usize]
    }

    /// Lower constant `c_{k,k}` of the two-sided moment bound.
    pub fn lower(&self, k: u32) -> f64 {
        self.get(k, k)
    }

    /// Upper constant `Σ_j c_{j,k}`.
    pub fn upper(&self, k: u32) -> f64 {
        (1..=k).map(|j| self.get(j, k)).sum()
    }

    /// Raw moment `E ν^k` at `y`.
    pub fn raw_moment(&self, y: f64, k: u32) -> Result<f64> {
        if k > MAX_MOMENT_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let w = y / (1.0 - y);
        let mut acc = 0.0;
        let mut wj = 1.0;
        for j in 1..=k {
            wj *= w;
            acc += self.get(j, k) * wj;
        }
        Ok(acc)
    }
}

/// Negative binomial law `P{ν = k} = b_k^r y^k (1−y)^r`, `0 < y < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomial {
    pub r: f64,
    pub y: f64,
}

impl NegBinomial {
    pub fn new(r: f64, y: f64) -> Self {
        debug_assert!(r > 0.0 && (0.0..1.0).contains(&y));
        Self { r, y }
    }

    /// `ln(1 − y)`.
    #[inline]
    pub fn ln_q(&self) -> f64 {
        (-self.y).ln_1p()
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if self.y == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let lb = log_weights(self.r, k as usize)[k as usize];
        (lb + k as f64 * self.y.ln() + self.r * self.ln_q()).exp()
    }

    /// `P{ν = 0} = (1−y)^r`.
    pub fn p0(&self) -> f64 {
        (self.r * self.ln_q()).exp()
    }

    /// `P{ν > 0}`, accurate for tiny `y`.
    pub fn p_positive(&self) -> f64 {
        -(self.r * self.ln_q()).exp_m1()
    }

    pub fn mean(&self) -> f64 {
        self.r * self.y / (1.0 - self.y)
    }

    pub fn variance(&self) -> f64 {
        self.r * self.y / ((1.0 - self.y) * (1.0 - self.y))
    }

    /// `E|ν − Eν|^k`, summed until the remaining tail is below `tol`.
    pub fn central_abs_moment(&self, k: u32, tol: f64) -> Result<f64> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        if k > MAX_MOMENT_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        let m = self.mean();
        if self.y == 0.0 {
            return Ok(0.0);
        }
        let mut pmf = self.p0();
        let mut acc = crate::sum::KahanSum::new();
        let mut j: u64 = 0;
        loop {
            let dev = (j as f64 - m).abs();
            let term = dev.powi(k as i32) * pmf;
            acc.add(term);
            let next = pmf * self.y * (self.r + j as f64) / (j as f64 + 1.0);
            let jf = j as f64;
            if jf > m + 1.0 {
                // for i ≥ j the term ratio is at most `rho`
                let growth = ((jf + 1.0 - m) / (jf - m)).powi(k as i32);
                let rho = self.y * ((self.r + jf) / (jf + 1.0)).max(1.0) * growth;
                if rho < 1.0 {
                    let tail = term * rho / (1.0 - rho);
                    if tail < tol {
                        break;
                    }
                }
            }
            pmf = next;
            j += 1;
            if j > 10_000_000 {
                break;
            }
        }
        Ok(acc.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        assert_eq!(weight_bk(0.37, 0), 1.0);
        for k in 0..20 {
            assert!((weight_bk(1.0, k) - 1.0).abs() < 1e-15);
        }
        assert!((weight_bk(2.0, 3) - 4.0).abs() < 1e-14);
        let lw = log_weights(2.5, 10);
        for (k, &l) in lw.iter().enumerate() {
            assert!((l.exp() / weight_bk(2.5, k as u64) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pmf_examples() {
        let law = NegBinomial::new(1.7, 0.3);
        assert!((law.pmf(0) - 0.7f64.powf(1.7)).abs() < 1e-15);
        let geo = NegBinomial::new(1.0, 0.4);
        for k in 0..10 {
            assert!((geo.pmf(k) - 0.4f64.powi(k as i32) * 0.6).abs() < 1e-15);
        }
        let cutoff = (50.0 / -(0.3f64.ln())).ceil() as u64;
        let total = crate::sum::kahan((0..=cutoff).map(|k| law.pmf(k)));
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        let law = NegBinomial::new(1.0, 0.5);
        assert_eq!(law.mean(), 1.0);
        assert_eq!(law.variance(), 2.0);
        let law = NegBinomial::new(2.3, 0.21);
        assert!((law.mean() / law.variance() - 0.79).abs() < 1e-15);
        let tiny = NegBinomial::new(2.0, 1e-300);
        assert!(tiny.mean() < 1e-299 && tiny.variance() < 1e-299);
    }

    /// Brute-force raw moment by pmf summation.
    fn brute_raw(law: &NegBinomial, k: u32) -> f64 {
        crate::sum::kahan((0..4000u64).map(|j| (j as f64).powi(k as i32) * law.pmf(j)))
    }

    #[test]
    fn raw_moments_against_pmf_sum() {
        for &(r, y) in &[(0.5, 0.3), (1.0, 0.6), (2.0, 0.1), (3.7, 0.45)] {
            let law = NegBinomial::new(r, y);
            let c = MomentCoefficients::new(r);
            assert!((c.raw_moment(y, 1).unwrap() - law.mean()).abs() < 1e-13 * law.mean());
            let m2 = c.raw_moment(y, 2).unwrap();
            let var = m2 - law.mean().powi(2);
            assert!((var / law.variance() - 1.0).abs() < 1e-10);
            for k in 1..=6 {
                let exact = brute_raw(&law, k);
                let got = c.raw_moment(y, k).unwrap();
                assert!((got / exact - 1.0).abs() < 1e-9, "r={r} y={y} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn raw_moment_orders() {
        let c = MomentCoefficients::new(1.5);
        assert_eq!(c.raw_moment(0.2, 0).unwrap(), 1.0);
        assert!(matches!(c.raw_moment(0.2, 9), Err(Error::UnsupportedOrder(9))));
    }

    #[test]
    fn raw_moment_two_sided_bound() {
        for &(r, y) in &[(0.5, 0.3), (1.0, 0.01), (2.0, 0.8)] {
            let c = MomentCoefficients::new(r);
            let w = y / (1.0 - y);
            for k in 1..=8 {
                let m = c.raw_moment(y, k).unwrap();
                let lo = c.lower(k) * w.powi(k as i32);
                let hi = c.upper(k) * y / (1.0 - y).powi(k as i32);
                assert!(lo <= m * (1.0 + 1e-12) && m <= hi * (1.0 + 1e-12), "r={r} y={y} k={k}");
            }
        }
    }

    #[test]
    fn central_moments() {
        let law = NegBinomial::new(1.3, 0.4);
        let mu2 = law.central_abs_moment(2, 1e-16).unwrap();
        assert!((mu2 / law.variance() - 1.0).abs() < 1e-8);
        let mu3 = law.central_abs_moment(3, 1e-16).unwrap();
        assert!(mu3 >= mu2.powf(1.5));
        assert!(law.central_abs_moment(3, 0.0).is_err());
        assert!(law.central_abs_moment(9, 1e-9).is_err());
    }
}
