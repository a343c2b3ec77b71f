use std::collections::HashMap;

use super::{r_label, CalibrationConfig, LcltConfig, LimitShapeConfig, LlnConfig, MetricConfig, Report, Row, TvConfig};
use crate::enumerator::{build_weight_table, count_lines, tv_distance, TableMode, WeightTable, TABLE_CAP};
use crate::geometry::{
    hausdorff_distance, lattice_point_count, random_convex_polyline, tangential_distance,
    tangential_distance_to_limit_with_step, PlanarPolyline, PolygonalLine,
};
use crate::measure::{calibrate, covariance, expected_endpoint, gaussian_density, kappa, log_partition, select_window};
use crate::sampler::{
    conditioned_batch, derive_seed, exact_batch, exact_mixture_batch, free_batch, RMixture, RngStream, SampleBatch,
};
use crate::{exec, stats, Error, Result, SumMethod};

fn within_cap(n: (u32, u32)) -> bool {
    n.0 <= TABLE_CAP.0 && n.1 <= TABLE_CAP.1
}

fn max_abs(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Means of `ξ` along growing `n`: both the ratio error and the error on
/// the `n^{2/3}` scale should shrink.
pub fn check_calibration(cfg: &CalibrationConfig) -> Result<Report> {
    let mut rep = Report::new("calibration");
    let cells: Vec<(usize, f64, (u32, u32))> = cfg
        .grids
        .iter()
        .enumerate()
        .flat_map(|(g, grid)| cfg.rs.iter().flat_map(move |&r| grid.iter().map(move |&n| (g, r, n))))
        .collect();
    let means = exec::map_indexed(cells.len(), |i| {
        let (_, r, n) = cells[i];
        let p = calibrate(n, r)?;
        expected_endpoint(&p, SumMethod::Direct, cfg.sum_tol * n.0.max(n.1) as f64).map(|b| b.value)
    });
    let mut means = means.into_iter();
    for grid in &cfg.grids {
        for &r in &cfg.rs {
            let label = r_label(r);
            let mut ratio_err = Vec::new();
            let mut refined_err = Vec::new();
            for &n in grid {
                let e = means.next().expect("one mean per cell")?;
                let nn = [n.0 as f64, n.1 as f64];
                let ratio = [e[0] / nn[0], e[1] / nn[1]];
                let refined = [(e[0] - nn[0]) / nn[0].powf(2.0 / 3.0), (e[1] - nn[1]) / nn[1].powf(2.0 / 3.0)];
                rep.push(Row::info(n, &label, "mean_ratio_1", ratio[0], 1.0));
                rep.push(Row::info(n, &label, "mean_ratio_2", ratio[1], 1.0));
                rep.push(Row::info(n, &label, "refined_error_1", refined[0], 0.0));
                rep.push(Row::info(n, &label, "refined_error_2", refined[1], 0.0));
                ratio_err.push((n, max_abs([ratio[0] - 1.0, ratio[1] - 1.0])));
                refined_err.push((n, max_abs(refined)));
            }
            rep.trend(&label, "ratio_error", &ratio_err, false);
            if cfg.refined_rs.contains(&r) {
                rep.trend(&label, "refined_error", &refined_err, false);
            }
            if let Some(&(n, err)) = ratio_err.last() {
                rep.push(Row::new(n, &label, "ratio_error<=tol", err, cfg.ratio_tol, err <= cfg.ratio_tol));
            }
        }
    }
    Ok(rep)
}

struct LcltCell {
    exact: f64,
    gauss: f64,
    corollary: f64,
    off_exact: f64,
    off_gauss: f64,
    m: (u32, u32),
}

fn lclt_cell(n: (u32, u32), r: f64, offset: (i32, i32)) -> Result<LcltCell> {
    let m1 = n.0 as i64 + offset.0 as i64;
    let m2 = n.1 as i64 + offset.1 as i64;
    if m1 < 0 || m2 < 0 {
        return Err(Error::InvalidArgument(format!("offset {offset:?} leaves the quadrant at n = {n:?}")));
    }
    let m = (m1 as u32, m2 as u32);
    let p = calibrate(n, r)?;
    // one table covers both targets: B_m does not depend on the box size
    let table = build_weight_table((n.0.max(m.0), n.1.max(m.1)), r, TableMode::LogDomain)?;
    let log_z = log_partition(&p, 1e-13)?;
    let a = expected_endpoint(&p, SumMethod::Direct, 1e-10)?.value;
    let k = covariance(&p, SumMethod::Direct, 1e-10)?.value;
    let nn = (n.0 as f64) * (n.1 as f64);
    Ok(LcltCell {
        exact: table.endpoint_prob(&p, n, &log_z)?.value,
        gauss: gaussian_density(a, &k, [n.0 as f64, n.1 as f64])?,
        corollary: r.cbrt() * kappa() / (2.0 * 3f64.sqrt() * std::f64::consts::PI) * nn.powf(-2.0 / 3.0),
        off_exact: table.endpoint_prob(&p, m, &log_z)?.value,
        off_gauss: gaussian_density(a, &k, [m.0 as f64, m.1 as f64])?,
        m,
    })
}

/// Exact endpoint probabilities against the Gaussian density and its
/// closed-form leading constant.
pub fn check_lclt(cfg: &LcltConfig) -> Result<Report> {
    let mut rep = Report::new("lclt");
    let cells: Vec<(f64, (u32, u32))> = cfg.rs.iter().flat_map(|&r| cfg.grid.iter().map(move |&n| (r, n))).collect();
    let results = exec::map_indexed(cells.len(), |i| lclt_cell(cells[i].1, cells[i].0, cfg.offset));
    let mut results = results.into_iter();
    for &r in &cfg.rs {
        let label = r_label(r);
        let (mut err_c, mut err_g, mut err_off) = (Vec::new(), Vec::new(), Vec::new());
        for &n in &cfg.grid {
            let c = results.next().expect("one result per cell")?;
            rep.push(Row::info(n, &label, "endpoint_prob", c.exact, c.gauss));
            rep.push(Row::info(n, &label, "gaussian_density", c.gauss, c.corollary));
            rep.push(Row::info(n, &label, "corollary_constant", c.corollary, c.exact));
            let (rc, rg) = (c.exact / c.corollary, c.exact / c.gauss);
            rep.push(Row::info(n, &label, "ratio_exact_corollary", rc, 1.0));
            rep.push(Row::info(n, &label, "ratio_exact_gaussian", rg, 1.0));
            let ro = c.off_exact / c.off_gauss;
            rep.push(Row::info(c.m, &label, "offcentre_ratio_exact_gaussian", ro, 1.0));
            err_c.push((n, (rc - 1.0).abs()));
            err_g.push((n, (rg - 1.0).abs()));
            err_off.push((n, (ro - 1.0).abs()));
        }
        for (stat, errs) in [("corollary_error", &err_c), ("gaussian_error", &err_g), ("offcentre_error", &err_off)] {
            rep.trend(&label, stat, errs, false);
            if let Some(&(n, e)) = errs.last() {
                rep.push(Row::new(n, &label, format!("{stat}<=tol"), e, cfg.ratio_tol, e <= cfg.ratio_tol));
            }
        }
    }
    Ok(rep)
}

/// What to sample in one limit-shape cell.
#[derive(Clone)]
enum Model {
    Conditioned(f64),
    Mixture(RMixture),
    Free(f64),
}

impl Model {
    fn label(&self) -> String {
        match self {
            Model::Conditioned(r) => r_label(*r),
            Model::Mixture(m) => {
                let parts: Vec<String> = m.components().iter().map(|(r, w)| format!("{r}:{w}")).collect();
                format!("mix:{}", parts.join("|"))
            }
            Model::Free(r) => format!("free:{r}"),
        }
    }

    fn table_rs(&self) -> Vec<f64> {
        match self {
            Model::Conditioned(r) => vec![*r],
            Model::Mixture(m) => m.components().iter().map(|c| c.0).collect(),
            Model::Free(_) => Vec::new(),
        }
    }
}

type TableCache = HashMap<((u32, u32), u64), WeightTable>;

fn build_tables(keys: Vec<((u32, u32), f64)>) -> Result<TableCache> {
    let mut keys = keys;
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    keys.dedup();
    let built = exec::map_indexed(keys.len(), |i| WeightTable::with_prefixes(keys[i].0, keys[i].1));
    let mut cache = HashMap::new();
    for (k, t) in keys.into_iter().zip(built) {
        cache.insert((k.0, k.1.to_bits()), t?);
    }
    Ok(cache)
}

/// Conditioned samples: exact through the table when within the cap,
/// rejection otherwise.
fn conditioned_samples(
    n: (u32, u32),
    r: f64,
    count: usize,
    seed: u64,
    max_tries: u64,
    tables: &TableCache,
) -> Result<SampleBatch> {
    let params = calibrate(n, r)?;
    match tables.get(&(n, r.to_bits())) {
        Some(t) => exact_batch(&params, t, count, seed),
        None => conditioned_batch(&params, count, seed, max_tries),
    }
}

fn model_samples(
    model: &Model,
    n: (u32, u32),
    cfg: &LimitShapeConfig,
    seed: u64,
    tables: &TableCache,
) -> Result<SampleBatch> {
    match model {
        Model::Conditioned(r) => conditioned_samples(n, *r, cfg.replicas, seed, cfg.max_tries, tables),
        Model::Free(r) => {
            let params = calibrate(n, *r)?;
            Ok(free_batch(&params, &select_window(&params, 1e-12), cfg.replicas, seed))
        }
        Model::Mixture(mix) => {
            let comps: Vec<f64> = mix.components().iter().map(|c| c.0).collect();
            let params = calibrate(n, comps[0])?;
            if let Some(ts) = comps.iter().map(|&r| tables.get(&(n, r.to_bits())).cloned()).collect::<Option<Vec<_>>>()
            {
                return exact_mixture_batch(&params, &ts, mix, cfg.replicas, seed);
            }
            // beyond the cap: draw each component count, then reject per component
            let picks: Vec<usize> =
                (0..cfg.replicas).map(|i| mix.draw(&mut RngStream::new(seed, i as u64).rng())).collect();
            let mut lines = Vec::with_capacity(cfg.replicas);
            let mut meta = Vec::with_capacity(cfg.replicas);
            for (c, &r) in comps.iter().enumerate() {
                let idx: Vec<usize> = (0..picks.len()).filter(|&i| picks[i] == c).collect();
                let b = conditioned_samples(
                    n,
                    r,
                    idx.len(),
                    derive_seed(seed, "component", c as u64),
                    cfg.max_tries,
                    tables,
                )?;
                lines.extend(idx.iter().copied().zip(b.lines));
                meta.extend(idx.into_iter().zip(b.meta));
            }
            lines.sort_by_key(|p| p.0);
            meta.sort_by_key(|p| p.0);
            Ok(SampleBatch {
                params,
                lines: lines.into_iter().map(|p| p.1).collect(),
                meta: meta.into_iter().map(|p| p.1).collect(),
            })
        }
    }
}

fn distances(lines: &[PolygonalLine], n: (u32, u32), h: f64) -> Vec<f64> {
    exec::map_indexed(lines.len(), |i| tangential_distance_to_limit_with_step(&lines[i], n, h))
}

/// Distribution of `d_T` between scaled samples and the limit curve.
pub fn check_limit_shape(cfg: &LimitShapeConfig, seed: u64) -> Result<Report> {
    let mut rep = Report::new("limit-shape");
    let mut models: Vec<Model> = cfg.rs.iter().map(|&r| Model::Conditioned(r)).collect();
    if let Some(m) = &cfg.mixture {
        models.push(Model::Mixture(RMixture::new(m.clone())?));
    }
    if cfg.free {
        models.extend(cfg.rs.iter().map(|&r| Model::Free(r)));
    }
    let keys = models
        .iter()
        .flat_map(|m| m.table_rs())
        .flat_map(|r| cfg.grid.iter().filter(|&&n| within_cap(n)).map(move |&n| (n, r)))
        .collect();
    let tables = build_tables(keys)?;
    for model in &models {
        let label = model.label();
        let (mut means, mut medians, mut p90s) = (Vec::new(), Vec::new(), Vec::new());
        let mut last = None;
        for (ci, &n) in cfg.grid.iter().enumerate() {
            let cell_seed = derive_seed(seed, &format!("limit-shape:{label}"), ci as u64);
            let batch = match model_samples(model, n, cfg, cell_seed, &tables) {
                Ok(b) => b,
                Err(Error::BudgetExhausted { tries }) => {
                    rep.push(Row::new(n, &label, "budget_exhausted", tries as f64, cfg.max_tries as f64, false));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut d = distances(&batch.lines, n, cfg.grid_step);
            d.sort_by(f64::total_cmp);
            let (mean, median, p90) = (stats::mean(&d), stats::quantile(&d, 0.5), stats::quantile(&d, 0.9));
            rep.push(Row::info(n, &label, "mean_dT", mean, 0.0));
            rep.push(Row::info(n, &label, "median_dT", median, 0.0));
            rep.push(Row::info(n, &label, "p90_dT", p90, 0.0));
            means.push((n, mean));
            medians.push((n, median));
            p90s.push((n, p90));
            let cover = d.iter().filter(|&&v| v <= cfg.threshold).count() as f64 / d.len().max(1) as f64;
            last = Some((n, cover));
        }
        rep.trend(&label, "mean_dT", &means, false);
        rep.trend(&label, "median_dT", &medians, false);
        rep.trend(&label, "p90_dT", &p90s, false);
        if let Some((n, cover)) = last {
            let stat = format!("P(dT<={})", cfg.threshold);
            rep.push(Row::new(n, &label, stat, cover, cfg.coverage, cover >= cfg.coverage));
        }
    }
    Ok(rep)
}

/// Mean lattice-point count of conditioned samples on the `(n₁n₂)^{1/3}`
/// scale against `r^{1/3}/κ²`.
pub fn check_lln_points(cfg: &LlnConfig, seed: u64) -> Result<Report> {
    let mut rep = Report::new("lln");
    let keys = cfg.rs.iter().flat_map(|&r| cfg.grid.iter().filter(|&&n| within_cap(n)).map(move |&n| (n, r))).collect();
    let tables = build_tables(keys)?;
    for &r in &cfg.rs {
        let label = r_label(r);
        let target = r.cbrt() / (kappa() * kappa());
        let mut errs = Vec::new();
        for (ci, &n) in cfg.grid.iter().enumerate() {
            let cell_seed = derive_seed(seed, &format!("lln:{label}"), ci as u64);
            let batch = conditioned_samples(n, r, cfg.replicas, cell_seed, u64::MAX, &tables)?;
            let scale = ((n.0 as f64) * (n.1 as f64)).cbrt();
            let v: Vec<f64> = batch.lines.iter().map(|l| lattice_point_count(l) as f64 / scale).collect();
            let mean = stats::mean(&v);
            rep.push(Row::info(n, &label, "mean_points_scaled", mean, target));
            let rel = (mean / target - 1.0).abs();
            rep.push(Row::info(n, &label, "relative_error", rel, 0.0));
            errs.push((n, rel));
        }
        rep.trend(&label, "relative_error", &errs, false);
        if let Some(&(n, e)) = errs.last() {
            rep.push(Row::new(n, &label, "relative_error<=tol", e, cfg.rel_tol, e <= cfg.rel_tol));
        }
    }
    Ok(rep)
}

/// Exact total-variation distances between conditioned laws.
pub fn check_tv(cfg: &TvConfig) -> Result<Report> {
    let mut rep = Report::new("tv");
    let n = cfg.extreme_n;
    let count = count_lines(n)?;
    let limit = 1.0 - 1.0 / count.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    for &r in &cfg.extreme_rs {
        let tv = tv_distance(n, r, 1.0)?;
        rep.push(Row::new(n, format!("{r}|1"), "tv", tv, limit, (tv - limit).abs() <= cfg.extreme_tol));
    }
    let same = tv_distance(n, 1.0, 1.0)?;
    rep.push(Row::new(n, "1|1", "tv", same, 0.0, same == 0.0));
    let label = format!("{}|{}", cfg.pair.0, cfg.pair.1);
    let values = exec::map_indexed(cfg.grid.len(), |i| tv_distance(cfg.grid[i], cfg.pair.0, cfg.pair.1));
    let mut points = Vec::new();
    for (&n, tv) in cfg.grid.iter().zip(values) {
        let tv = tv?;
        let bound = 1.0 - 1.0 / count_lines(n)?.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
        rep.push(Row::new(n, &label, "tv<=1-1/#lines", tv, bound, tv <= bound + 1e-12));
        points.push((n, tv));
    }
    rep.trend(&label, "tv", &points, true);
    Ok(rep)
}

/// `d_H ≤ d_T` on random convex pairs, plus a pair with `d_T/d_H` large.
pub fn check_metric_dominance(cfg: &MetricConfig, seed: u64) -> Result<Report> {
    let mut rep = Report::new("metrics");
    let base = derive_seed(seed, "metrics", 0);
    let excess = exec::map_indexed(cfg.pairs, |i| {
        let mut rng = RngStream::new(base, i as u64).rng();
        let p = random_convex_polyline(&mut rng, cfg.max_edges);
        let q = random_convex_polyline(&mut rng, cfg.max_edges);
        hausdorff_distance(&p, &q).map(|dh| dh - tangential_distance(&p, &q))
    });
    let excess = excess.into_iter().collect::<Result<Vec<f64>>>()?;
    let worst = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violations = excess.iter().filter(|&&e| e > cfg.slack).count() as f64;
    let none = (0, 0);
    rep.push(Row::info(none, "-", "pairs", cfg.pairs as f64, cfg.pairs as f64));
    rep.push(Row::new(none, "-", "max(dH-dT)", worst, cfg.slack, worst <= cfg.slack));
    rep.push(Row::new(none, "-", "violations", violations, 0.0, violations == 0.0));

    // two equal segments from the origin at nearly equal angles
    let (len, theta, gap) = (1.0f64, 0.6f64, 1e-4f64);
    let a = PlanarPolyline::new(vec![[0.0, 0.0], [len * theta.cos(), len * theta.sin()]])?;
    let b = PlanarPolyline::new(vec![[0.0, 0.0], [len * (theta + gap).cos(), len * (theta + gap).sin()]])?;
    let dt = tangential_distance(&a, &b);
    let dh = hausdorff_distance(&a, &b)?;
    let end_gap = 2.0 * len * (gap / 2.0).sin();
    rep.push(Row::new(none, "-", "segments_dT", dt, len, (dt - len).abs() <= 1e-12));
    rep.push(Row::new(none, "-", "segments_dH<=gap", dh, end_gap, dh <= end_gap + 1e-15));
    rep.push(Row::new(none, "-", "segments_dT/dH", dt / dh, cfg.min_ratio, dt / dh > cfg.min_ratio));
    let same_t = tangential_distance(&a, &a);
    let same_h = hausdorff_distance(&a, &a)?;
    rep.push(Row::new(none, "-", "identical_dT", same_t, 0.0, same_t == 0.0));
    rep.push(Row::new(none, "-", "identical_dH", same_h, 0.0, same_h == 0.0));
    Ok(rep)
}
