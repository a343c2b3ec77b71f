//! Monte Carlo engines for the free measure `Q_z^r` and for the
//! endpoint-conditioned law `P_n^r` by rejection.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumerator::WeightTable;
use crate::geometry::PolygonalLine;
use crate::lattice::{coprime_directions, directions_in_box, Direction};
use crate::measure::{GCParams, NegBinomial, TruncationWindow};
use crate::{exec, Error, Result};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_C0DE_2024_0001;

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent family of streams labelled by `(tag, index)`.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let h = tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
    splitmix64(splitmix64(seed ^ h) ^ index)
}

/// A reproducible random stream: ChaCha8 keyed by `seed`, on stream `stream_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent sub-stream `i` of this stream.
    pub fn child(&self, i: u64) -> RngStream {
        RngStream { seed: splitmix64(self.seed ^ splitmix64(self.stream_id)), stream_id: i }
    }
}

/// Negative binomial draw with shape `r` and success probability `p`:
/// `P{k} = b_k^r (1−p)^k p^r`, by sequential inversion of
/// `pmf(k+1) = pmf(k)·(1−p)(r+k)/(k+1)`.
pub fn draw_negative_binomial<R: Rng + ?Sized>(r: f64, p: f64, rng: &mut R) -> u64 {
    assert!(p > 0.0 && p < 1.0, "success probability must lie in (0, 1)");
    let y = 1.0 - p;
    let u: f64 = rng.random();
    let mut pmf = p.powf(r);
    let mut cdf = pmf;
    let mut k = 0u64;
    while u >= cdf {
        pmf *= y * (r + k as f64) / (k as f64 + 1.0);
        k += 1;
        if pmf == 0.0 {
            break;
        }
        cdf += pmf;
    }
    k
}

/// `ν ≥ 1` drawn from the law conditioned on being positive.
fn draw_positive<R: Rng + ?Sized>(law: &NegBinomial, rng: &mut R) -> u64 {
    let p_pos = law.p_positive();
    let target = rng.random::<f64>() * p_pos;
    let mut pmf = law.r * law.y * law.p0();
    let mut cdf = pmf;
    let mut k = 1u64;
    while target >= cdf {
        pmf *= law.y * (law.r + k as f64) / (k as f64 + 1.0);
        k += 1;
        if pmf == 0.0 {
            break;
        }
        cdf += pmf;
    }
    k
}

/// Independent multiplicities over a fixed direction list.
///
/// Rather than one Bernoulli pre-test per direction, the next direction with
/// `ν > 0` is found by inverting the cumulative hazard
/// `Λ_j = Σ_{i<j} −r ln(1 − z^{x_i})` against an exponential variable; then
/// `ν ≥ 1` is drawn from its conditional law. The joint law is unchanged
/// and the cost is proportional to the number of non-zero multiplicities.
#[derive(Debug, Clone)]
pub struct ProductSampler {
    params: GCParams,
    directions: Vec<Direction>,
    laws: Vec<NegBinomial>,
    hazard: Vec<f64>,
    tail_bound: f64,
}

/// Outcome of one walk over the directions.
enum Walk {
    Done,
    Aborted,
}

impl ProductSampler {
    fn new(params: &GCParams, directions: Vec<Direction>, tail_bound: f64) -> Self {
        let laws: Vec<NegBinomial> = directions.iter().map(|&x| params.law(x)).collect();
        let mut hazard = Vec::with_capacity(laws.len() + 1);
        let mut acc = crate::sum::KahanSum::new();
        hazard.push(0.0);
        for l in &laws {
            acc.add(-l.r * l.ln_q());
            hazard.push(acc.value());
        }
        Self { params: *params, directions, laws, hazard, tail_bound }
    }

    /// Sampler for `Q_z^r` restricted to a window.
    pub fn free(params: &GCParams, window: &TruncationWindow) -> Self {
        Self::new(params, coprime_directions(window.degree_bound), window.tail_bound)
    }

    /// Sampler over the directions `x ≤ n`; exact for the event `ξ = n`.
    pub fn boxed(params: &GCParams, n: (u32, u32)) -> Self {
        Self::new(params, directions_in_box(n.0, n.1), 0.0)
    }

    pub fn params(&self) -> &GCParams {
        &self.params
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// Total-variation bias from the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn walk<R: Rng + ?Sized>(&self, rng: &mut R, mut visit: impl FnMut(Direction, u64) -> bool) -> Walk {
        let d = self.directions.len();
        let mut i = 0;
        while i < d {
            let e: f64 = -(1.0 - rng.random::<f64>()).ln();
            let target = self.hazard[i] + e;
            // first j ≥ i with Λ_{j+1} > target
            let j = i + self.hazard[i + 1..].partition_point(|&h| h <= target);
            if j >= d {
                return Walk::Done;
            }
            let k = draw_positive(&self.laws[j], rng);
            if !visit(self.directions[j], k) {
                return Walk::Aborted;
            }
            i = j + 1;
        }
        Walk::Done
    }

    /// One draw of the full configuration.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolygonalLine {
        let mut edges = Vec::new();
        self.walk(rng, |x, k| {
            edges.push((x, k as u32));
            true
        });
        edges.sort_by_key(|a| a.0);
        PolygonalLine::from_sorted_unchecked(edges)
    }

    /// One trial of rejection towards `n`; `None` if the endpoint misses.
    /// With `early_abort` the walk stops as soon as a coordinate exceeds `n`.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R, n: (u32, u32), early_abort: bool) -> Option<PolygonalLine> {
        let mut edges = Vec::new();
        let (mut a, mut b) = (0u64, 0u64);
        let (n1, n2) = (n.0 as u64, n.1 as u64);
        let outcome = self.walk(rng, |x, k| {
            a += x.x1() as u64 * k;
            b += x.x2() as u64 * k;
            edges.push((x, k as u32));
            !(early_abort && (a > n1 || b > n2))
        });
        match outcome {
            Walk::Aborted => None,
            Walk::Done if (a, b) == (n1, n2) => {
                edges.sort_by_key(|p| p.0);
                Some(PolygonalLine::from_sorted_unchecked(edges))
            }
            Walk::Done => None,
        }
    }

    /// Rejection until `ξ = n`; trial `t` draws from `stream.child(t)`.
    pub fn conditioned(
        &self,
        n: (u32, u32),
        stream: RngStream,
        max_tries: u64,
        early_abort: bool,
    ) -> Result<(PolygonalLine, u64)> {
        if max_tries == 0 {
            return Err(Error::InvalidArgument("max_tries must be at least 1".into()));
        }
        for t in 0..max_tries {
            let mut rng = stream.child(t).rng();
            if let Some(line) = self.trial(&mut rng, n, early_abort) {
                return Ok((line, t + 1));
            }
        }
        Err(Error::BudgetExhausted { tries: max_tries })
    }
}

/// `Γ ~ Q_z^r` restricted to `window`.
pub fn sample_free(params: &GCParams, window: &TruncationWindow, stream: RngStream) -> PolygonalLine {
    ProductSampler::free(params, window).sample(&mut stream.rng())
}

/// `Γ ~ P_n^r` by rejection from `Q_z^r` with early abort; returns the
/// line and the number of tries used.
pub fn sample_conditioned(
    params: &GCParams,
    n: (u32, u32),
    stream: RngStream,
    max_tries: u64,
) -> Result<(PolygonalLine, u64)> {
    ProductSampler::boxed(params, n).conditioned(n, stream, max_tries, true)
}

/// Rejection with an arbitrary `z` (see [`GCParams::with_z`]). The output
/// law is the same as for the calibrated `z`; only the acceptance rate changes.
pub fn sample_conditioned_miscalibrated(
    params: &GCParams,
    n: (u32, u32),
    stream: RngStream,
    max_tries: u64,
) -> Result<(PolygonalLine, u64)> {
    sample_conditioned(params, n, stream, max_tries)
}

/// Finite prior on `r`: `{(r_i, w_i)}` with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RMixture {
    components: Vec<(f64, f64)>,
}

impl RMixture {
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        if components.iter().any(|&(r, w)| !(r > 0.0 && w > 0.0 && r.is_finite() && w.is_finite())) {
            return Err(Error::InvalidArgument("mixture components need r > 0 and w > 0".into()));
        }
        Ok(Self { components })
    }

    /// Equal weights on the given values.
    pub fn uniform(rs: &[f64]) -> Result<Self> {
        Self::new(rs.iter().map(|&r| (r, 1.0)).collect())
    }

    /// Parses `r1:w1,r2:w2,…`.
    pub fn parse(s: &str) -> Result<Self> {
        let comps = s
            .split(',')
            .map(|part| {
                let (r, w) = part.split_once(':').unwrap_or((part, "1"));
                match (r.trim().parse::<f64>(), w.trim().parse::<f64>()) {
                    (Ok(r), Ok(w)) => Ok((r, w)),
                    _ => Err(Error::InvalidArgument(format!("bad mixture component {part:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Index of the drawn component.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.components.iter().map(|c| c.1).sum();
        let mut u = rng.random::<f64>() * total;
        for (i, c) in self.components.iter().enumerate() {
            if u < c.1 {
                return i;
            }
            u -= c.1;
        }
        self.components.len() - 1
    }
}

/// Per-sample bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub tries: u64,
    pub tail_bound: f64,
    pub stream: u64,
    pub r: f64,
}

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub params: GCParams,
    pub lines: Vec<PolygonalLine>,
    pub meta: Vec<SampleMeta>,
}

/// `count` free samples, sample `i` on stream `(seed, i)`.
pub fn free_batch(params: &GCParams, window: &TruncationWindow, count: usize, seed: u64) -> SampleBatch {
    let sampler = ProductSampler::free(params, window);
    let lines = exec::map_indexed(count, |i| sampler.sample(&mut RngStream::new(seed, i as u64).rng()));
    let meta = (0..count)
        .map(|i| SampleMeta { tries: 1, tail_bound: window.tail_bound, stream: i as u64, r: params.r })
        .collect();
    SampleBatch { params: *params, lines, meta }
}

/// `count` rejection samples of `P_n^r`.
pub fn conditioned_batch(params: &GCParams, count: usize, seed: u64, max_tries: u64) -> Result<SampleBatch> {
    let n = params.n;
    let sampler = ProductSampler::boxed(params, n);
    let res = exec::map_indexed(count, |i| sampler.conditioned(n, RngStream::new(seed, i as u64), max_tries, true));
    let mut lines = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for (i, r) in res.into_iter().enumerate() {
        let (line, tries) = r?;
        lines.push(line);
        meta.push(SampleMeta { tries, tail_bound: 0.0, stream: i as u64, r: params.r });
    }
    Ok(SampleBatch { params: *params, lines, meta })
}

/// `count` exact backward samples from a table with prefix snapshots.
pub fn exact_batch(params: &GCParams, table: &WeightTable, count: usize, seed: u64) -> Result<SampleBatch> {
    let res = exec::map_indexed(count, |i| {
        crate::enumerator::sample_exact_conditioned(table, RngStream::new(seed, i as u64))
    });
    let lines = res.into_iter().collect::<Result<Vec<_>>>()?;
    let meta = (0..count).map(|i| SampleMeta { tries: 1, tail_bound: 0.0, stream: i as u64, r: table.r() }).collect();
    Ok(SampleBatch { params: *params, lines, meta })
}

/// Exact samples from the mixture `Σ_i w_i P_n^{r_i}`; sample `i` first
/// draws its component on stream `(seed, i)`, then the line on its child.
pub fn exact_mixture_batch(
    params: &GCParams,
    tables: &[WeightTable],
    mixture: &RMixture,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    assert_eq!(tables.len(), mixture.components().len());
    let res = exec::map_indexed(count, |i| {
        let stream = RngStream::new(seed, i as u64);
        let c = mixture.draw(&mut stream.rng());
        crate::enumerator::sample_exact_conditioned(&tables[c], stream.child(0)).map(|l| (l, tables[c].r()))
    });
    let mut lines = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for (i, r) in res.into_iter().enumerate() {
        let (line, rv) = r?;
        lines.push(line);
        meta.push(SampleMeta { tries: 1, tail_bound: 0.0, stream: i as u64, r: rv });
    }
    Ok(SampleBatch { params: *params, lines, meta })
}

/// Free (`conditioned = false`) or rejection samples from a mixture over
/// `r` at target `n`; sample `i` draws its component on stream `(seed, i)`
/// and the line on that stream's first child.
pub fn mixture_batch(
    n: (u32, u32),
    mixture: &RMixture,
    count: usize,
    seed: u64,
    conditioned: bool,
    window_tol: f64,
    max_tries: u64,
) -> Result<SampleBatch> {
    let params =
        mixture.components().iter().map(|&(r, _)| crate::measure::calibrate(n, r)).collect::<Result<Vec<_>>>()?;
    let samplers: Vec<(ProductSampler, f64)> = params
        .iter()
        .map(|p| {
            if conditioned {
                (ProductSampler::boxed(p, n), 0.0)
            } else {
                let w = crate::measure::select_window(p, window_tol);
                (ProductSampler::free(p, &w), w.tail_bound)
            }
        })
        .collect();
    let res = exec::map_indexed(count, |i| {
        let stream = RngStream::new(seed, i as u64);
        let c = mixture.draw(&mut stream.rng());
        let (sampler, tail) = &samplers[c];
        let drawn = if conditioned {
            sampler.conditioned(n, stream.child(0), max_tries, true)
        } else {
            Ok((sampler.sample(&mut stream.child(0).rng()), 1))
        };
        drawn.map(|(line, tries)| (line, SampleMeta { tries, tail_bound: *tail, stream: i as u64, r: params[c].r }))
    });
    let mut lines = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for r in res {
        let (l, m) = r?;
        lines.push(l);
        meta.push(m);
    }
    Ok(SampleBatch { params: params[0], lines, meta })
}

/// One JSONL record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub edges: Vec<[u64; 3]>,
    pub endpoint: [u64; 2],
    pub tries: u64,
    pub stream: u64,
}

impl SampleRecord {
    pub fn new(line: &PolygonalLine, tries: u64, stream: u64) -> Self {
        let (e1, e2) = line.endpoint();
        Self {
            edges: line.edges().iter().map(|&(d, k)| [d.x1() as u64, d.x2() as u64, k as u64]).collect(),
            endpoint: [e1, e2],
            tries,
            stream,
        }
    }

    pub fn to_line(&self) -> Result<PolygonalLine> {
        let triples = self
            .edges
            .iter()
            .map(|e| {
                let c = |v: u64| u32::try_from(v).map_err(|_| Error::Domain("edge component too large".into()));
                Ok((c(e[0])?, c(e[1])?, c(e[2])?))
            })
            .collect::<Result<Vec<_>>>()?;
        let line = PolygonalLine::from_triples(&triples)?;
        let (e1, e2) = line.endpoint();
        if [e1, e2] != self.endpoint {
            return Err(Error::Domain("endpoint does not match the edges".into()));
        }
        Ok(line)
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(batch: &SampleBatch, out: &mut W) -> Result<()> {
    for (line, meta) in batch.lines.iter().zip(&batch.meta) {
        let rec = SampleRecord::new(line, meta.tries, meta.stream);
        serde_json::to_writer(&mut *out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSONL samples; blank lines and `#` comment lines are skipped.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: SampleRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        rec.to_line().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}
