//! Convex lattice polygonal lines, their tangential profiles, the limit
//! parabola and the two path metrics.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::lattice::{slope_compare, Direction};
use crate::measure::log_weights;
use crate::{Error, Result};

/// Default grid step (in `u = t/(1+t)`) for the distance to the limit curve.
pub const DEFAULT_GRID_STEP: f64 = 1e-5;

/// Tangent parameter `t ∈ [0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tangent {
    Rational { num: u64, den: u64 },
    Real(f64),
    Infinity,
}

impl Tangent {
    pub const ZERO: Tangent = Tangent::Rational { num: 0, den: 1 };

    pub fn value(self) -> f64 {
        match self {
            Tangent::Rational { num, den } => num as f64 / den as f64,
            Tangent::Real(t) => t,
            Tangent::Infinity => f64::INFINITY,
        }
    }

    /// `u = t/(1+t) ∈ [0, 1]`.
    pub fn u(self) -> f64 {
        match self {
            Tangent::Rational { num, den } => num as f64 / (num as f64 + den as f64),
            Tangent::Real(t) if t.is_infinite() => 1.0,
            Tangent::Real(t) => t / (1.0 + t),
            Tangent::Infinity => 1.0,
        }
    }

    /// Whether direction `x` has scaled slope at most `t`:
    /// `x2·n1 ≤ t·x1·n2`, exact for rational `t`.
    pub fn admits(self, x: Direction, n: (u32, u32)) -> bool {
        let lhs = x.x2() as u128 * n.0 as u128;
        let rhs = x.x1() as u128 * n.1 as u128;
        match self {
            Tangent::Infinity => true,
            Tangent::Real(t) if t.is_infinite() => true,
            Tangent::Rational { num, den } => lhs * den as u128 <= rhs * num as u128,
            Tangent::Real(t) => (lhs as f64) <= t * rhs as f64,
        }
    }
}

/// A convex lattice polygonal line from the origin, stored as its edge
/// multiplicities in strictly increasing slope order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PolygonalLine {
    edges: Vec<(Direction, u32)>,
}

impl PolygonalLine {
    /// The trivial line consisting of the origin only.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonical line from `(direction, multiplicity)` pairs in any order.
    pub fn from_multiplicities(pairs: &[(Direction, u32)]) -> Result<Self> {
        let mut edges: Vec<(Direction, u32)> = pairs.to_vec();
        if let Some(&(d, _)) = edges.iter().find(|(_, k)| *k == 0) {
            return Err(Error::Domain(format!("multiplicity of ({}, {}) must be positive", d.x1(), d.x2())));
        }
        edges.sort_by(|a, b| slope_compare(a.0, b.0));
        if let Some(w) = edges.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDirection(w[0].0.x1() as u64, w[0].0.x2() as u64));
        }
        Ok(Self { edges })
    }

    /// Like [`from_multiplicities`](Self::from_multiplicities) for raw
    /// `(x1, x2, k)` triples; rejects non-primitive vectors.
    pub fn from_triples(triples: &[(u32, u32, u32)]) -> Result<Self> {
        let pairs =
            triples.iter().map(|&(a, b, k)| Direction::new(a, b).map(|d| (d, k))).collect::<Result<Vec<_>>>()?;
        Self::from_multiplicities(&pairs)
    }

    /// Caller guarantees distinct directions in slope order.
    pub(crate) fn from_sorted_unchecked(edges: Vec<(Direction, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| slope_compare(w[0].0, w[1].0) == Ordering::Less));
        Self { edges }
    }

    pub fn edges(&self) -> &[(Direction, u32)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn endpoint(&self) -> (u64, u64) {
        self.edges.iter().fold((0, 0), |(a, b), &(d, k)| (a + d.x1() as u64 * k as u64, b + d.x2() as u64 * k as u64))
    }

    /// `ln b^r(Γ) = Σ_edges ln b^r_{k}`.
    pub fn log_weight(&self, r: f64) -> f64 {
        let kmax = self.edges.iter().map(|e| e.1).max().unwrap_or(0) as usize;
        let lw = log_weights(r, kmax);
        self.edges.iter().map(|&(_, k)| lw[k as usize]).sum()
    }

    /// Vertices scaled by `S_n(x) = (x1/n1, x2/n2)`.
    pub fn scaled_polyline(&self, n: (u32, u32)) -> PlanarPolyline {
        let (s1, s2) = (1.0 / n.0 as f64, 1.0 / n.1 as f64);
        let mut vertices = Vec::with_capacity(self.edges.len() + 1);
        let (mut a, mut b) = (0u64, 0u64);
        vertices.push([0.0, 0.0]);
        for &(d, k) in &self.edges {
            a += d.x1() as u64 * k as u64;
            b += d.x2() as u64 * k as u64;
            vertices.push([a as f64 * s1, b as f64 * s2]);
        }
        PlanarPolyline { vertices }
    }
}

/// Number of lattice points of the line other than the origin.
pub fn lattice_point_count(line: &PolygonalLine) -> u64 {
    line.edges.iter().map(|e| e.1 as u64).sum()
}

/// `S_n(ξ(t))`: scaled endpoint of the edges with slope `≤ t·n2/n1`.
pub fn scaled_profile(line: &PolygonalLine, n: (u32, u32), t: Tangent) -> [f64; 2] {
    let (mut a, mut b) = (0u64, 0u64);
    for &(d, k) in &line.edges {
        if !t.admits(d, n) {
            break;
        }
        a += d.x1() as u64 * k as u64;
        b += d.x2() as u64 * k as u64;
    }
    [a as f64 / n.0 as f64, b as f64 / n.1 as f64]
}

/// Tangential parameterisation of the limit parabola `√(1−x1) + √x2 = 1`:
/// `g*(t) = ((t²+2t)/(1+t)², t²/(1+t)²)`.
pub fn limit_shape(t: Tangent) -> [f64; 2] {
    limit_shape_u(t.u())
}

/// `g*` in the variable `u = t/(1+t)`: `(1 − (1−u)², u²)`.
#[inline]
pub fn limit_shape_u(u: f64) -> [f64; 2] {
    let v = 1.0 - u;
    [1.0 - v * v, u * u]
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `sup_t |ξ̃_n(t) − g*(t)|` with grid step `DEFAULT_GRID_STEP`; the
/// returned value is within `3·DEFAULT_GRID_STEP` of the true supremum.
pub fn tangential_distance_to_limit(line: &PolygonalLine, n: (u32, u32)) -> f64 {
    tangential_distance_to_limit_with_step(line, n, DEFAULT_GRID_STEP)
}

/// Exact evaluation at every profile jump (both one-sided values) plus a
/// uniform grid of step `h` in `u`. Since `|dg*/du| ≤ 2`, the result
/// underestimates the supremum by at most `h`.
pub fn tangential_distance_to_limit_with_step(line: &PolygonalLine, n: (u32, u32), h: f64) -> f64 {
    assert!(h > 0.0 && h < 1.0);
    let (s1, s2) = (1.0 / n.0 as f64, 1.0 / n.1 as f64);
    // jump location in u and scaled jump vector of each edge
    let jumps: Vec<(f64, [f64; 2])> = line
        .edges
        .iter()
        .map(|&(d, k)| {
            let p = d.x2() as f64 * n.0 as f64;
            let q = d.x1() as f64 * n.1 as f64;
            let u = p / (p + q);
            (u, [d.x1() as f64 * k as f64 * s1, d.x2() as f64 * k as f64 * s2])
        })
        .collect();
    let steps = (1.0 / h).ceil() as usize;
    let mut best: f64 = 0.0;
    let mut cur = [0.0f64, 0.0];
    let mut j = 0;
    for i in 0..=steps {
        let u = (i as f64 * h).min(1.0);
        while j < jumps.len() && jumps[j].0 <= u {
            let (ub, v) = jumps[j];
            let g = limit_shape_u(ub);
            best = best.max(dist(cur, g));
            cur = [cur[0] + v[0], cur[1] + v[1]];
            best = best.max(dist(cur, g));
            j += 1;
        }
        best = best.max(dist(cur, limit_shape_u(u)));
    }
    best
}

/// A planar path from the origin with non-negative, non-decreasing slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPolyline {
    vertices: Vec<[f64; 2]>,
}

impl PlanarPolyline {
    /// Validates that the path starts at the origin and is convex with
    /// non-negative non-decreasing slopes.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Domain("polyline has no vertices".into()));
        }
        if vertices[0] != [0.0, 0.0] {
            return Err(Error::Domain("polyline must start at the origin".into()));
        }
        let edges: Vec<[f64; 2]> = vertices.windows(2).map(|w| sub(w[1], w[0])).collect();
        if let Some(e) = edges.iter().find(|e| e[0] < 0.0 || e[1] < 0.0) {
            return Err(Error::Domain(format!("edge {e:?} leaves the positive quadrant")));
        }
        let nonzero: Vec<&[f64; 2]> = edges.iter().filter(|e| e[0] != 0.0 || e[1] != 0.0).collect();
        for w in nonzero.windows(2) {
            let c = cross(*w[0], *w[1]);
            let scale = norm(*w[0]) * norm(*w[1]);
            if c < -1e-12 * scale {
                return Err(Error::Domain("polyline is not convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.vertices.windows(2).map(|w| sub(w[1], w[0])).filter(|e| e[0] != 0.0 || e[1] != 0.0)
    }
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Slope order of two edge vectors by cross product.
fn edge_slope_cmp(a: [f64; 2], b: [f64; 2]) -> Ordering {
    (a[1] * b[0]).partial_cmp(&(b[1] * a[0])).unwrap_or(Ordering::Equal)
}

/// Random convex polyline with 1 to `max_edges` edges whose components are
/// uniform on `[0, 1)`.
pub fn random_convex_polyline<R: rand::Rng + ?Sized>(rng: &mut R, max_edges: usize) -> PlanarPolyline {
    let k = rng.random_range(1..=max_edges.max(1));
    let mut edges: Vec<[f64; 2]> = (0..k).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    edges.sort_by(|a, b| edge_slope_cmp(*a, *b));
    let mut v = vec![[0.0, 0.0]];
    for e in edges {
        let last = *v.last().unwrap();
        v.push([last[0] + e[0], last[1] + e[1]]);
    }
    PlanarPolyline::new(v).expect("sorted non-negative edges form a convex path")
}

/// `sup_t |g_p(t) − g_q(t)|` between tangential parameterisations.
///
/// Both parameterisations are step functions of `t`, so the supremum is a
/// maximum over the merged jump points.
pub fn tangential_distance(p: &PlanarPolyline, q: &PlanarPolyline) -> f64 {
    let mut all: Vec<([f64; 2], bool)> = p.edges().map(|e| (e, true)).chain(q.edges().map(|e| (e, false))).collect();
    all.sort_by(|a, b| edge_slope_cmp(a.0, b.0));
    let (mut gp, mut gq) = ([0.0f64, 0.0], [0.0f64, 0.0]);
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && edge_slope_cmp(all[i].0, all[j].0) == Ordering::Equal {
            let (e, from_p) = all[j];
            let g = if from_p { &mut gp } else { &mut gq };
            g[0] += e[0];
            g[1] += e[1];
            j += 1;
        }
        best = best.max(dist(gp, gq));
        i = j;
    }
    best
}

/// Squared distance along `P + sD` to a feature, as `a s² + b s + c`.
#[derive(Clone, Copy)]
struct Quad {
    a: f64,
    b: f64,
    c: f64,
}

fn point_segment_dist(p: [f64; 2], u0: [f64; 2], u1: [f64; 2]) -> f64 {
    let e = sub(u1, u0);
    let len2 = dot(e, e);
    if len2 == 0.0 {
        return dist(p, u0);
    }
    let tau = (dot(sub(p, u0), e) / len2).clamp(0.0, 1.0);
    dist(p, [u0[0] + tau * e[0], u0[1] + tau * e[1]])
}

fn point_polyline_dist(p: [f64; 2], b: &[[f64; 2]]) -> f64 {
    if b.len() == 1 {
        return dist(p, b[0]);
    }
    b.windows(2).map(|w| point_segment_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

fn push_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let qv = -0.5 * (b + b.signum() * sq);
    if qv != 0.0 {
        out.push(qv / a);
        out.push(c / qv);
    } else {
        out.push(0.0);
    }
}

/// `max_{p ∈ A} dist(p, B)`, exact up to rounding.
///
/// Along a segment of `A` the distance to `B` is the lower envelope of the
/// distances to the vertices of `B` and to the supporting lines of its
/// segments (each valid while the foot point stays on the segment). Between
/// consecutive envelope breakpoints the active squared distance is one convex
/// quadratic, so the maximum is attained at a breakpoint or an end.
fn directed_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    if a.len() == 1 {
        return point_polyline_dist(a[0], b);
    }
    let mut best: f64 = 0.0;
    for w in a.windows(2) {
        let (p0, d) = (w[0], sub(w[1], w[0]));
        let mut quads: Vec<Quad> = Vec::new();
        let mut cand = vec![0.0, 1.0];
        for &v in b {
            let w0 = sub(p0, v);
            quads.push(Quad { a: dot(d, d), b: 2.0 * dot(d, w0), c: dot(w0, w0) });
        }
        for s in b.windows(2) {
            let e = sub(s[1], s[0]);
            let len = norm(e);
            if len == 0.0 {
                continue;
            }
            let nrm = [-e[1] / len, e[0] / len];
            let w0 = sub(p0, s[0]);
            let (c0, c1) = (dot(nrm, w0), dot(nrm, d));
            quads.push(Quad { a: c1 * c1, b: 2.0 * c0 * c1, c: c0 * c0 });
            // foot point parameter τ(s) = (w0 + s·d)·e/|e|², switches at τ ∈ {0, 1}
            let (t0, t1) = (dot(w0, e) / (len * len), dot(d, e) / (len * len));
            if t1 != 0.0 {
                cand.push(-t0 / t1);
                cand.push((1.0 - t0) / t1);
            }
        }
        for i in 0..quads.len() {
            for j in i + 1..quads.len() {
                let (qi, qj) = (quads[i], quads[j]);
                push_roots(qi.a - qj.a, qi.b - qj.b, qi.c - qj.c, &mut cand);
            }
        }
        for s in cand {
            if (0.0..=1.0).contains(&s) && s.is_finite() {
                let p = [p0[0] + s * d[0], p0[1] + s * d[1]];
                best = best.max(point_polyline_dist(p, b));
            }
        }
    }
    best
}

/// Hausdorff distance between the point sets of two polylines.
pub fn hausdorff_distance(p: &PlanarPolyline, q: &PlanarPolyline) -> Result<f64> {
    if p.vertices.is_empty() || q.vertices.is_empty() {
        return Err(Error::Domain("Hausdorff distance of an empty polyline".into()));
    }
    Ok(directed_hausdorff(&p.vertices, &q.vertices).max(directed_hausdorff(&q.vertices, &p.vertices)))
}
