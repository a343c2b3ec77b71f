//! Exact ground truth for small endpoints: weight tables `B_m^r`, full
//! enumeration of `Π_n`, the exact conditional law `P_n^r`, exact endpoint
//! probabilities under `Q_z^r` and total-variation distances.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::geometry::PolygonalLine;
use crate::lattice::{directions_in_box, Direction};
use crate::measure::{log_partition, log_weights, Bounded, GCParams};
use crate::sampler::RngStream;
use crate::sum::log_sum_exp;
use crate::{Error, Result};

/// Largest endpoint accepted by [`build_weight_table`].
pub const TABLE_CAP: (u32, u32) = (80, 80);

/// Largest `n1 + n2` accepted by [`enumerate_lines`].
pub const ENUMERATION_CAP: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    /// Arbitrary-precision integers; only for `r = 1`.
    ExactInteger,
    /// Natural logarithms of the weights.
    LogDomain,
}

impl TableMode {
    fn as_str(self) -> &'static str {
        match self {
            TableMode::ExactInteger => "exact-integer",
            TableMode::LogDomain => "log-domain",
        }
    }
}

/// `B_m^r = Σ_{Γ ∈ Π_m} b^r(Γ)` for every `m ≤ n`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    n: (u32, u32),
    r: f64,
    mode: TableMode,
    log: Vec<f64>,
    exact: Option<Vec<BigUint>>,
    directions: Vec<Direction>,
    /// Log table after each direction pass, for the backward sampler.
    prefixes: Option<Vec<f64>>,
}

fn check_cap(n: (u32, u32)) -> Result<()> {
    if n.0 > TABLE_CAP.0 || n.1 > TABLE_CAP.1 {
        return Err(Error::SizeCap(format!(
            "weight table for ({}, {}) exceeds the cap ({}, {})",
            n.0, n.1, TABLE_CAP.0, TABLE_CAP.1
        )));
    }
    Ok(())
}

/// Builds the table by processing every primitive direction `x ≤ n` in
/// canonical order: `new[s] = Σ_{k ≥ 0} b_k^r · old[s − kx]`.
pub fn build_weight_table(n: (u32, u32), r: f64, mode: TableMode) -> Result<WeightTable> {
    WeightTable::build(n, r, mode, false)
}

impl WeightTable {
    /// Log-domain table that also keeps the per-direction prefix tables
    /// needed by [`sample_exact_conditioned`].
    pub fn with_prefixes(n: (u32, u32), r: f64) -> Result<WeightTable> {
        Self::build(n, r, TableMode::LogDomain, true)
    }

    fn build(n: (u32, u32), r: f64, mode: TableMode, keep_prefixes: bool) -> Result<WeightTable> {
        check_cap(n)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
        }
        if mode == TableMode::ExactInteger && r != 1.0 {
            return Err(Error::InvalidArgument(format!("exact-integer mode requires r = 1, got {r}")));
        }
        let directions = directions_in_box(n.0, n.1);
        let mut table = WeightTable { n, r, mode, log: Vec::new(), exact: None, directions, prefixes: None };
        match mode {
            TableMode::ExactInteger => {
                let exact = table.fill_exact();
                table.log = exact.iter().map(big_ln).collect();
                table.exact = Some(exact);
                if keep_prefixes {
                    table.fill_log(true);
                }
            }
            TableMode::LogDomain => table.fill_log(keep_prefixes),
        }
        Ok(table)
    }

    #[inline]
    fn width(&self) -> usize {
        self.n.1 as usize + 1
    }

    #[inline]
    fn idx(&self, a: u32, b: u32) -> usize {
        a as usize * self.width() + b as usize
    }

    fn cells(&self) -> usize {
        (self.n.0 as usize + 1) * self.width()
    }

    fn fill_exact(&self) -> Vec<BigUint> {
        let mut grid = vec![BigUint::zero(); self.cells()];
        grid[0] = BigUint::one();
        for &x in &self.directions {
            let (x1, x2) = (x.x1(), x.x2());
            // all b_k = 1, so the k-sum collapses to new[s] = old[s] + new[s − x]
            for a in x1..=self.n.0 {
                for b in x2..=self.n.1 {
                    let src = self.idx(a - x1, b - x2);
                    if grid[src].is_zero() {
                        continue;
                    }
                    let add = grid[src].clone();
                    let dst = self.idx(a, b);
                    grid[dst] += add;
                }
            }
        }
        grid
    }

    fn fill_log(&mut self, keep_prefixes: bool) {
        let (n1, n2) = self.n;
        let width = self.width();
        let lw = log_weights(self.r, n1.max(n2) as usize);
        let mut grid = vec![f64::NEG_INFINITY; self.cells()];
        grid[0] = 0.0;
        let mut prefixes = keep_prefixes.then(|| Vec::with_capacity(self.directions.len() * grid.len()));
        for &x in &self.directions {
            let (x1, x2) = (x.x1() as usize, x.x2() as usize);
            // descending order keeps sources s − kx (k ≥ 1) at their old values
            for a in (0..=n1 as usize).rev() {
                for b in (0..=n2 as usize).rev() {
                    let kmax = match (x1, x2) {
                        (0, _) => b / x2,
                        (_, 0) => a / x1,
                        _ => (a / x1).min(b / x2),
                    };
                    if kmax == 0 {
                        continue;
                    }
                    // streaming log-sum-exp
                    let mut m = grid[a * width + b];
                    let mut acc = if m == f64::NEG_INFINITY { 0.0 } else { 1.0 };
                    for k in 1..=kmax {
                        let v = lw[k] + grid[(a - k * x1) * width + (b - k * x2)];
                        if v == f64::NEG_INFINITY {
                            continue;
                        }
                        if v > m {
                            acc = acc * (m - v).exp() + 1.0;
                            m = v;
                        } else {
                            acc += (v - m).exp();
                        }
                    }
                    if acc > 0.0 {
                        grid[a * width + b] = m + acc.ln();
                    }
                }
            }
            if let Some(p) = prefixes.as_mut() {
                p.extend_from_slice(&grid);
            }
        }
        self.log = grid;
        self.prefixes = prefixes;
    }

    pub fn n(&self) -> (u32, u32) {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn has_prefixes(&self) -> bool {
        self.prefixes.is_some()
    }

    /// `ln B_m^r`.
    pub fn log_weight(&self, m: (u32, u32)) -> f64 {
        assert!(m.0 <= self.n.0 && m.1 <= self.n.1, "state outside the table");
        self.log[self.idx(m.0, m.1)]
    }

    /// Exact `B_m^1` in exact-integer mode.
    pub fn exact_weight(&self, m: (u32, u32)) -> Option<&BigUint> {
        self.exact.as_ref().map(|e| &e[self.idx(m.0, m.1)])
    }

    /// `Q_z^r{ξ = m} = z^m B_m^r / β̃^r(z)` given the log-partition value.
    pub fn endpoint_prob(&self, params: &GCParams, m: (u32, u32), log_z: &Bounded<f64>) -> Result<Bounded<f64>> {
        if (params.r - self.r).abs() > 1e-12 * self.r {
            return Err(Error::InvalidArgument(format!(
                "table built for r = {} but parameters have r = {}",
                self.r, params.r
            )));
        }
        let (a1, a2) = params.alpha;
        let ln_p = -(a1 * m.0 as f64 + a2 * m.1 as f64) + self.log_weight(m) - log_z.value;
        let p = ln_p.exp();
        Ok(Bounded { value: p, tail_bound: p * log_z.tail_bound.exp_m1() })
    }

    /// Row-major CSV dump: comment header with `n1,n2,r,mode`, then
    /// `a,b,log_weight[,exact]` per state.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# n1={},n2={},r={},mode={}", self.n.0, self.n.1, self.r, self.mode.as_str())?;
        match &self.exact {
            Some(_) => writeln!(out, "a,b,log_weight,exact")?,
            None => writeln!(out, "a,b,log_weight")?,
        }
        for a in 0..=self.n.0 {
            for b in 0..=self.n.1 {
                let i = self.idx(a, b);
                match &self.exact {
                    Some(e) => writeln!(out, "{a},{b},{:e},{}", self.log[i], e[i])?,
                    None => writeln!(out, "{a},{b},{:e}", self.log[i])?,
                }
            }
        }
        Ok(())
    }

    /// Reads a dump written by [`write_csv`](Self::write_csv). Prefix tables
    /// are not stored; the direction list is recomputed.
    pub fn read_csv<R: BufRead>(input: R) -> Result<WeightTable> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let (i0, head) = lines.next().ok_or_else(|| parse_err(0, "empty table file"))?;
        let head = head?;
        let mut n = (None, None);
        let (mut r, mut mode) = (None, None);
        for kv in head.trim_start_matches('#').trim().split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| parse_err(i0, "malformed header"))?;
            match k.trim() {
                "n1" => n.0 = v.parse::<u32>().ok(),
                "n2" => n.1 = v.parse::<u32>().ok(),
                "r" => r = v.parse::<f64>().ok(),
                "mode" => {
                    mode = match v {
                        "exact-integer" => Some(TableMode::ExactInteger),
                        "log-domain" => Some(TableMode::LogDomain),
                        _ => None,
                    }
                }
                _ => return Err(parse_err(i0, "unknown header key")),
            }
        }
        let (Some(n1), Some(n2), Some(r), Some(mode)) = (n.0, n.1, r, mode) else {
            return Err(parse_err(i0, "incomplete header"));
        };
        check_cap((n1, n2))?;
        let _columns = lines.next();
        let cells = (n1 as usize + 1) * (n2 as usize + 1);
        let mut log = Vec::with_capacity(cells);
        let mut exact = (mode == TableMode::ExactInteger).then(|| Vec::with_capacity(cells));
        for (i, line) in lines {
            let line = line?;
            let mut f = line.split(',').skip(2);
            let lv = f.next().and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| parse_err(i, "bad log weight"))?;
            log.push(lv);
            if let Some(e) = exact.as_mut() {
                let v =
                    f.next().and_then(|v| v.parse::<BigUint>().ok()).ok_or_else(|| parse_err(i, "bad exact weight"))?;
                e.push(v);
            }
        }
        if log.len() != cells {
            return Err(parse_err(cells, "wrong number of states"));
        }
        Ok(WeightTable { n: (n1, n2), r, mode, log, exact, directions: directions_in_box(n1, n2), prefixes: None })
    }
}

/// Natural log of a positive big integer.
fn big_ln(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `#Π_n`, exactly.
pub fn count_lines(n: (u32, u32)) -> Result<BigUint> {
    let t = build_weight_table(n, 1.0, TableMode::ExactInteger)?;
    Ok(t.exact_weight(n).expect("exact mode").clone())
}

/// Every line of `Π_n`, each exactly once, in a fixed order.
pub fn enumerate_lines(n: (u32, u32)) -> Result<Vec<PolygonalLine>> {
    if n.0 + n.1 > ENUMERATION_CAP {
        return Err(Error::SizeCap(format!(
            "enumeration of ({}, {}) exceeds the cap n1 + n2 ≤ {ENUMERATION_CAP}",
            n.0, n.1
        )));
    }
    let mut dirs = directions_in_box(n.0, n.1);
    dirs.sort();
    let mut out = Vec::new();
    let mut current = Vec::new();
    backtrack(&dirs, 0, (n.0, n.1), &mut current, &mut out);
    Ok(out)
}

fn backtrack(
    dirs: &[Direction],
    i: usize,
    rem: (u32, u32),
    current: &mut Vec<(Direction, u32)>,
    out: &mut Vec<PolygonalLine>,
) {
    if rem == (0, 0) {
        out.push(PolygonalLine::from_sorted_unchecked(current.clone()));
        return;
    }
    for j in i..dirs.len() {
        let x = dirs[j];
        let mut k = 1;
        while x.x1() * k <= rem.0 && x.x2() * k <= rem.1 {
            current.push((x, k));
            backtrack(dirs, j + 1, (rem.0 - x.x1() * k, rem.1 - x.x2() * k), current, out);
            current.pop();
            k += 1;
        }
    }
}

/// `P_n^r(Γ) = b^r(Γ)/B_n^r` for every `Γ ∈ Π_n`. No `z` is involved.
pub fn exact_conditional(n: (u32, u32), r: f64) -> Result<BTreeMap<PolygonalLine, f64>> {
    let lines = enumerate_lines(n)?;
    Ok(conditional_from_lines(lines, r))
}

fn conditional_from_lines(lines: Vec<PolygonalLine>, r: f64) -> BTreeMap<PolygonalLine, f64> {
    let lw: Vec<f64> = lines.iter().map(|l| l.log_weight(r)).collect();
    let norm = log_sum_exp(&lw);
    assert!(norm.is_finite(), "Π_n is never empty");
    lines.into_iter().zip(lw).map(|(l, w)| (l, (w - norm).exp())).collect()
}

/// `Q_z^r{ξ = m}` through the weight table and the log-partition function.
pub fn exact_endpoint_prob(params: &GCParams, m: (u32, u32)) -> Result<Bounded<f64>> {
    let table = build_weight_table(m, params.r, TableMode::LogDomain)?;
    let log_z = log_partition(params, 1e-13)?;
    table.endpoint_prob(params, m, &log_z)
}

/// `½ Σ_Γ |P_n^{r1}(Γ) − P_n^{r2}(Γ)|`.
pub fn tv_distance(n: (u32, u32), r1: f64, r2: f64) -> Result<f64> {
    let lines = enumerate_lines(n)?;
    let p = conditional_from_lines(lines.clone(), r1);
    let q = conditional_from_lines(lines, r2);
    let s = crate::sum::kahan(p.iter().map(|(l, &pv)| (pv - q[l]).abs()));
    Ok(0.5 * s)
}

/// Draws `Γ ~ P_n^r` exactly by walking the directions backwards through
/// the prefix tables.
pub fn sample_exact_conditioned(table: &WeightTable, stream: RngStream) -> Result<PolygonalLine> {
    let mut rng = stream.rng();
    sample_exact_with(table, &mut rng)
}

pub(crate) fn sample_exact_with<R: Rng>(table: &WeightTable, rng: &mut R) -> Result<PolygonalLine> {
    let prefixes = table
        .prefixes
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("weight table was built without prefix tables".into()))?;
    let cells = table.cells();
    let width = table.width();
    let lw = log_weights(table.r, table.n.0.max(table.n.1) as usize);
    let (mut a, mut b) = (table.n.0 as usize, table.n.1 as usize);
    let mut edges = Vec::new();
    for d in (0..table.directions.len()).rev() {
        if a == 0 && b == 0 {
            break;
        }
        let x = table.directions[d];
        let (x1, x2) = (x.x1() as usize, x.x2() as usize);
        let cur = &prefixes[d * cells..(d + 1) * cells];
        let prev = |idx: usize| {
            if d == 0 {
                if idx == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                prefixes[(d - 1) * cells + idx]
            }
        };
        let total = cur[a * width + b];
        let kmax = match (x1, x2) {
            (0, _) => b / x2,
            (_, 0) => a / x1,
            _ => (a / x1).min(b / x2),
        };
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last_positive = 0;
        for k in 0..=kmax {
            let w = lw[k] + prev((a - k * x1) * width + (b - k * x2)) - total;
            if w == f64::NEG_INFINITY {
                continue;
            }
            last_positive = k;
            acc += w.exp();
            if u < acc {
                chosen = Some(k);
                break;
            }
        }
        let k = chosen.unwrap_or(last_positive);
        if k > 0 {
            edges.push((x, k as u32));
            a -= k * x1;
            b -= k * x2;
        }
    }
    debug_assert_eq!((a, b), (0, 0));
    edges.sort_by_key(|p| p.0);
    Ok(PolygonalLine::from_sorted_unchecked(edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: all multiplicity vectors over the primitive directions in
    /// the box with Σ x ν(x) = n, counted and weighted directly.
    fn brute_weight(n: (u32, u32), r: f64) -> (u64, f64) {
        let dirs = directions_in_box(n.0, n.1);
        fn rec(dirs: &[Direction], i: usize, rem: (u32, u32), w: f64, r: f64, acc: &mut (u64, f64)) {
            if i == dirs.len() {
                if rem == (0, 0) {
                    acc.0 += 1;
                    acc.1 += w;
                }
                return;
            }
            let x = dirs[i];
            let mut k = 0;
            while x.x1() * k <= rem.0 && x.x2() * k <= rem.1 {
                let bk = crate::measure::weight_bk(r, k as u64);
                rec(dirs, i + 1, (rem.0 - x.x1() * k, rem.1 - x.x2() * k), w * bk, r, acc);
                k += 1;
            }
        }
        let mut acc = (0, 0.0);
        rec(&dirs, 0, n, 1.0, r, &mut acc);
        acc
    }

    #[test]
    fn small_counts() {
        assert_eq!(brute_weight((1, 1), 1.0).0, 2);
        assert_eq!(brute_weight((2, 2), 1.0).0, 5);
        assert_eq!(count_lines((1, 1)).unwrap(), BigUint::from(2u32));
        assert_eq!(count_lines((2, 2)).unwrap(), BigUint::from(5u32));
        assert_eq!(count_lines((7, 0)).unwrap(), BigUint::from(1u32));
        for n in [(3, 2), (4, 4), (5, 3), (6, 6)] {
            assert_eq!(count_lines(n).unwrap(), BigUint::from(brute_weight(n, 1.0).0), "{n:?}");
        }
    }

    #[test]
    fn weighted_table_matches_brute_force() {
        for &r in &[0.5, 2.0, 3.3] {
            for n in [(1, 1), (3, 3), (4, 2), (5, 5)] {
                let t = build_weight_table(n, r, TableMode::LogDomain).unwrap();
                let (_, w) = brute_weight(n, r);
                assert!((t.log_weight(n) - w.ln()).abs() < 1e-12, "{n:?} r={r}");
            }
        }
    }

    #[test]
    fn log_mode_agrees_with_exact() {
        let exact = build_weight_table((30, 30), 1.0, TableMode::ExactInteger).unwrap();
        let log = build_weight_table((30, 30), 1.0, TableMode::LogDomain).unwrap();
        for a in 0..=30 {
            for b in 0..=30 {
                let e = big_ln(exact.exact_weight((a, b)).unwrap());
                let l = log.log_weight((a, b));
                assert!((l - e).abs() < 1e-10, "({a},{b})");
            }
        }
        assert_eq!(log.log_weight((0, 0)), 0.0);
    }

    #[test]
    fn order_free() {
        // reverse the direction order by hand with the exact recursion
        let n = (9u32, 7u32);
        let mut dirs = directions_in_box(n.0, n.1);
        dirs.reverse();
        let w = n.1 as usize + 1;
        let mut grid = vec![BigUint::zero(); (n.0 as usize + 1) * w];
        grid[0] = BigUint::one();
        for x in dirs {
            for a in x.x1()..=n.0 {
                for b in x.x2()..=n.1 {
                    let add = grid[(a - x.x1()) as usize * w + (b - x.x2()) as usize].clone();
                    grid[a as usize * w + b as usize] += add;
                }
            }
        }
        assert_eq!(&grid[grid.len() - 1], &count_lines(n).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(build_weight_table((81, 3), 1.0, TableMode::LogDomain), Err(Error::SizeCap(_))));
        assert!(matches!(build_weight_table((3, 3), 2.0, TableMode::ExactInteger), Err(Error::InvalidArgument(_))));
        assert!(matches!(enumerate_lines((9, 8)), Err(Error::SizeCap(_))));
    }

    #[test]
    fn enumeration_examples() {
        let lines = enumerate_lines((1, 1)).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(lines.contains(&PolygonalLine::from_triples(&[(1, 1, 1)]).unwrap()));
        assert!(lines.contains(&PolygonalLine::from_triples(&[(1, 0, 1), (0, 1, 1)]).unwrap()));
        let lines = enumerate_lines((2, 2)).unwrap();
        assert_eq!(lines.len(), 5);
        assert!(lines.contains(&PolygonalLine::from_triples(&[(1, 2, 1), (1, 0, 1)]).unwrap()));
        assert!(lines.contains(&PolygonalLine::from_triples(&[(2, 1, 1), (0, 1, 1)]).unwrap()));
        for n in [(3, 3), (5, 4), (8, 8)] {
            let lines = enumerate_lines(n).unwrap();
            assert_eq!(BigUint::from(lines.len()), count_lines(n).unwrap());
            let set: std::collections::HashSet<_> = lines.iter().collect();
            assert_eq!(set.len(), lines.len());
            assert!(lines.iter().all(|l| l.endpoint() == (n.0 as u64, n.1 as u64)));
        }
    }

    #[test]
    fn point_count_maximum_is_axis_line() {
        let n = (3u32, 3u32);
        let axis = PolygonalLine::from_triples(&[(1, 0, 3), (0, 1, 3)]).unwrap();
        for l in enumerate_lines(n).unwrap() {
            let c = crate::geometry::lattice_point_count(&l);
            if l == axis {
                assert_eq!(c, 6);
            } else {
                assert!(c < 6);
            }
        }
    }

    #[test]
    fn conditional_law() {
        let p = exact_conditional((3, 2), 1.0).unwrap();
        let u = 1.0 / p.len() as f64;
        assert!(p.values().all(|&v| (v - u).abs() < 1e-14));
        for &r in &[0.3, 1.0, 3.0] {
            let p = exact_conditional((1, 1), r).unwrap();
            let diag = PolygonalLine::from_triples(&[(1, 1, 1)]).unwrap();
            assert!((p[&diag] - 1.0 / (1.0 + r)).abs() < 1e-14);
            let q = exact_conditional((4, 3), r).unwrap();
            assert!((q.values().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn line_weights_match_table() {
        let r = 1.7;
        let n = (5, 4);
        let t = build_weight_table(n, r, TableMode::LogDomain).unwrap();
        let total = crate::sum::kahan(enumerate_lines(n).unwrap().iter().map(|l| l.log_weight(r).exp()));
        assert!((total.ln() - t.log_weight(n)).abs() < 1e-12);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance((3, 3), 1.5, 1.5).unwrap(), 0.0);
        let big = tv_distance((2, 2), 1e6, 1.0).unwrap();
        let small = tv_distance((2, 2), 1e-6, 1.0).unwrap();
        assert!((big - 0.8).abs() < 1e-3 && (small - 0.8).abs() < 1e-3, "{big} {small}");
        let n = (4, 4);
        let count = enumerate_lines(n).unwrap().len() as f64;
        for &r in &[1e-3, 0.5, 2.0, 1e3] {
            assert!(tv_distance(n, r, 1.0).unwrap() <= 1.0 - 1.0 / count + 1e-12);
        }
    }

    #[test]
    fn csv_roundtrip() {
        for (r, mode) in [(1.0, TableMode::ExactInteger), (0.7, TableMode::LogDomain)] {
            let t = build_weight_table((6, 4), r, mode).unwrap();
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let back = WeightTable::read_csv(&buf[..]).unwrap();
            assert_eq!(back.log, t.log);
            assert_eq!(back.exact, t.exact);
            assert_eq!(back.mode, t.mode);
        }
        let err = WeightTable::read_csv(&b"# n1=2,n2=2,r=1,mode=log-domain\na,b,log_weight\n0,0,x\n"[..]);
        assert!(matches!(err, Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn exact_sampler_respects_endpoint() {
        let t = WeightTable::with_prefixes((6, 5), 0.8).unwrap();
        for i in 0..200 {
            let l = sample_exact_conditioned(&t, RngStream::new(3, i)).unwrap();
            assert_eq!(l.endpoint(), (6, 5));
        }
        let plain = build_weight_table((3, 3), 1.0, TableMode::LogDomain).unwrap();
        assert!(sample_exact_conditioned(&plain, RngStream::new(0, 0)).is_err());
    }
}
