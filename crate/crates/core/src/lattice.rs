//! Möbius function, primitive lattice directions and their slope order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default upper limit of the Möbius sieve.
pub const DEFAULT_SIEVE_LIMIT: u64 = 1_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A primitive vector of the closed positive quadrant: `gcd(x1, x2) = 1`.
///
/// `(1, 0)` has slope 0 and `(0, 1)` has slope `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    x1: u32,
    x2: u32,
}

impl Direction {
    pub const HORIZONTAL: Direction = Direction { x1: 1, x2: 0 };
    pub const VERTICAL: Direction = Direction { x1: 0, x2: 1 };

    pub fn new(x1: u32, x2: u32) -> Result<Self> {
        if gcd(x1 as u64, x2 as u64) != 1 {
            return Err(Error::Encoding(x1 as u64, x2 as u64));
        }
        Ok(Self { x1, x2 })
    }

    /// Caller guarantees coprimality.
    pub(crate) const fn new_unchecked(x1: u32, x2: u32) -> Self {
        Self { x1, x2 }
    }

    #[inline]
    pub fn x1(self) -> u32 {
        self.x1
    }

    #[inline]
    pub fn x2(self) -> u32 {
        self.x2
    }

    /// `x1 + x2`.
    #[inline]
    pub fn degree(self) -> u64 {
        self.x1 as u64 + self.x2 as u64
    }

    /// Euclidean length.
    pub fn norm(self) -> f64 {
        (self.x1 as f64).hypot(self.x2 as f64)
    }

    /// Floating slope, only for display and plotting.
    pub fn slope(self) -> f64 {
        if self.x1 == 0 {
            f64::INFINITY
        } else {
            self.x2 as f64 / self.x1 as f64
        }
    }
}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Directions are ordered by slope.
impl Ord for Direction {
    fn cmp(&self, other: &Self) -> Ordering {
        slope_compare(*self, *other)
    }
}

/// Exact slope comparison via the cross products `a.x2·b.x1` and `b.x2·a.x1`.
pub fn slope_compare(a: Direction, b: Direction) -> Ordering {
    (a.x2 as u64 * b.x1 as u64).cmp(&(b.x2 as u64 * a.x1 as u64))
}

/// Möbius function values on `1..=limit`.
#[derive(Debug, Clone)]
pub struct MobiusTable {
    values: Vec<i8>,
}

impl MobiusTable {
    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// `μ(m)`; panics for `m = 0` or `m > limit`.
    #[inline]
    pub fn mu(&self, m: u64) -> i8 {
        assert!(m >= 1, "μ(0) is undefined");
        self.values[m as usize]
    }

    /// Mertens function `M(x) = Σ_{m ≤ x} μ(m)`.
    pub fn mertens(&self, x: u64) -> i64 {
        self.values[1..=x as usize].iter().map(|&v| v as i64).sum()
    }
}

/// Linear (Euler) sieve for `μ` on `1..=limit`.
pub fn mobius_sieve(limit: u64) -> Result<MobiusTable> {
    if limit == 0 {
        return Err(Error::InvalidArgument("Möbius sieve limit must be ≥ 1".into()));
    }
    let n = limit as usize;
    let mut values = vec![0i8; n + 1];
    let mut composite = vec![false; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    values[1] = 1;
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            values[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                values[ip] = 0;
                break;
            }
            values[ip] = -values[i];
        }
    }
    Ok(MobiusTable { values })
}

/// Every direction with `x1 + x2 ≤ degree_bound`, ordered by `x1 + x2` and
/// then by increasing slope. This is the canonical direction order.
pub fn coprime_directions(degree_bound: u32) -> Vec<Direction> {
    let mut out = Vec::new();
    for s in 1..=degree_bound {
        // within an anti-diagonal the slope grows as x1 shrinks
        for x1 in (0..=s).rev() {
            let x2 = s - x1;
            if gcd(x1 as u64, x2 as u64) == 1 {
                out.push(Direction::new_unchecked(x1, x2));
            }
        }
    }
    out
}

/// Directions lying in the box `x ≤ n` componentwise, in canonical order.
pub fn directions_in_box(n1: u32, n2: u32) -> Vec<Direction> {
    coprime_directions(n1 + n2).into_iter().filter(|d| d.x1 <= n1 && d.x2 <= n2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sieve_values() {
        let t = mobius_sieve(100).unwrap();
        assert_eq!(t.mu(1), 1);
        assert_eq!(t.mu(4), 0);
        assert_eq!(t.mu(6), 1);
        assert_eq!(t.mu(30), -1);
        assert_eq!(t.mu(97), -1);
        assert!(matches!(mobius_sieve(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sieve_matches_factorisation() {
        fn mu_naive(mut m: u64) -> i8 {
            let mut sign = 1;
            let mut p = 2;
            while p * p <= m {
                if m.is_multiple_of(p) {
                    m /= p;
                    if m.is_multiple_of(p) {
                        return 0;
                    }
                    sign = -sign;
                }
                p += 1;
            }
            if m > 1 {
                sign = -sign;
            }
            sign
        }
        let t = mobius_sieve(5000).unwrap();
        for m in 1..=5000 {
            assert_eq!(t.mu(m), mu_naive(m), "m = {m}");
        }
    }

    #[test]
    fn mertens_small() {
        let t = mobius_sieve(10).unwrap();
        // 1 -1 -1 0 -1 1 -1 0 0 1
        assert_eq!(t.mertens(10), -1);
    }

    #[test]
    fn inverse_square_sum() {
        let t = mobius_sieve(100_000).unwrap();
        let s = crate::sum::kahan((1..=100_000u64).map(|m| t.mu(m) as f64 / (m as f64).powi(2)));
        let target = 6.0 / std::f64::consts::PI.powi(2);
        assert!((s - target).abs() < 1e-4, "{s} vs {target}");
    }

    #[test]
    fn small_enumerations() {
        let d1 = coprime_directions(1);
        assert_eq!(d1, vec![Direction::HORIZONTAL, Direction::VERTICAL]);
        let d2: Vec<_> = coprime_directions(2).iter().map(|d| (d.x1(), d.x2())).collect();
        assert_eq!(d2, vec![(1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn enumeration_is_coprime_and_unique() {
        let dirs = coprime_directions(60);
        let set: std::collections::HashSet<_> = dirs.iter().copied().collect();
        assert_eq!(set.len(), dirs.len());
        for d in &dirs {
            assert_eq!(gcd(d.x1() as u64, d.x2() as u64), 1);
            assert!(d.degree() <= 60);
        }
        for w in dirs.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(a.degree() < b.degree() || (a.degree() == b.degree() && a < b));
        }
    }

    #[test]
    fn coprime_density() {
        let b = 500u32;
        let count = coprime_directions(b).len() as f64;
        let ratio = count / (b as f64 * b as f64 / 2.0);
        let target = 6.0 / std::f64::consts::PI.powi(2);
        assert!((ratio / target - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn slope_examples() {
        let d = |a, b| Direction::new(a, b).unwrap();
        assert_eq!(slope_compare(d(1, 0), d(0, 1)), Ordering::Less);
        assert_eq!(slope_compare(d(1, 2), d(2, 3)), Ordering::Greater);
        assert_eq!(slope_compare(d(3, 5), d(3, 5)), Ordering::Equal);
        assert!(Direction::new(2, 4).is_err());
        assert!(Direction::new(0, 0).is_err());
    }

    fn arb_direction() -> impl Strategy<Value = Direction> {
        (0u32..200, 0u32..200)
            .prop_filter("primitive", |(a, b)| gcd(*a as u64, *b as u64) == 1)
            .prop_map(|(a, b)| Direction::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn slope_order_is_strict_total(a in arb_direction(), b in arb_direction(), c in arb_direction()) {
            prop_assert_eq!(slope_compare(a, b) == Ordering::Equal, a == b);
            prop_assert_eq!(slope_compare(a, b), slope_compare(b, a).reverse());
            if slope_compare(a, b) == Ordering::Less && slope_compare(b, c) == Ordering::Less {
                prop_assert_eq!(slope_compare(a, c), Ordering::Less);
            }
        }
    }
}
