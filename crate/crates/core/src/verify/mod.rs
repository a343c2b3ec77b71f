//! Numerical checks of the asymptotic statements, reported as CSV tables.
//!
//! Every report is a pure function of its [`VerifyConfig`]; all thresholds
//! live in the config and are echoed in the report header.

mod checks;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use checks::{
    check_calibration, check_lclt, check_limit_shape, check_lln_points, check_metric_dominance, check_tv,
};

/// One line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: (u32, u32),
    /// `r`, or a mixture label such as `mix:0.5:1|1:1`.
    pub r: String,
    pub statistic: String,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub pass: bool,
}

impl Row {
    pub fn new(
        n: (u32, u32),
        r: impl Into<String>,
        statistic: impl Into<String>,
        value: f64,
        reference: f64,
        pass: bool,
    ) -> Self {
        Self { n, r: r.into(), statistic: statistic.into(), value, reference, deviation: value - reference, pass }
    }

    /// Informational row: no threshold attached.
    pub fn info(n: (u32, u32), r: impl Into<String>, statistic: impl Into<String>, value: f64, reference: f64) -> Self {
        Self::new(n, r, statistic, value, reference, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_id: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(check_id: &str) -> Self {
        Self { check_id: check_id.to_string(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Adds one row per consecutive pair of `points`, passing when the
    /// value strictly decreases (or increases, if `increasing`).
    pub(crate) fn trend(&mut self, r: &str, statistic: &str, points: &[((u32, u32), f64)], increasing: bool) {
        for w in points.windows(2) {
            let (prev, (n, v)) = (w[0].1, w[1]);
            let ok = if increasing { v > prev } else { v < prev };
            let dir = if increasing { "increase" } else { "decrease" };
            self.push(Row::new(n, r, format!("{statistic}:{dir}"), v, prev, ok));
        }
    }
}

/// Writes reports under a single header, preceded by `# ` lines echoing
/// the config.
pub fn write_csv<W: Write>(reports: &[Report], config: &VerifyConfig, out: &mut W) -> Result<()> {
    let json = serde_json::to_string(config).map_err(std::io::Error::from)?;
    writeln!(out, "# seed={}", config.seed)?;
    writeln!(out, "# config={json}")?;
    writeln!(out, "check_id,n1,n2,r,statistic,value,reference,deviation,pass")?;
    for rep in reports {
        for row in &rep.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                rep.check_id, row.n.0, row.n.1, row.r, row.statistic, row.value, row.reference, row.deviation, row.pass
            )?;
        }
    }
    Ok(())
}

/// Formats `r` for the report's `r` column.
pub(crate) fn r_label(r: f64) -> String {
    format!("{r}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Grids along which the errors must shrink; each is checked separately.
    pub grids: Vec<Vec<(u32, u32)>>,
    pub rs: Vec<f64>,
    /// Largest admissible `|E ξ_j/n_j − 1|` at the last grid point.
    pub ratio_tol: f64,
    /// `r` values for which the refined error must also shrink.
    pub refined_rs: Vec<f64>,
    pub sum_tol: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            grids: vec![vec![(27, 27), (64, 64), (216, 216)], vec![(27, 108), (64, 256), (216, 864)]],
            rs: vec![0.1, 0.5, 1.0, 2.0],
            ratio_tol: 0.05,
            refined_rs: vec![0.1, 0.5, 1.0, 2.0],
            sum_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LcltConfig {
    pub grid: Vec<(u32, u32)>,
    pub rs: Vec<f64>,
    /// Off-centre shift `m − n` compared against the Gaussian density.
    pub offset: (i32, i32),
    /// Largest admissible `|ratio − 1|` at the last grid point.
    pub ratio_tol: f64,
}

impl Default for LcltConfig {
    fn default() -> Self {
        Self { grid: vec![(20, 20), (40, 40), (60, 60)], rs: vec![1.0, 2.0], offset: (3, -2), ratio_tol: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitShapeConfig {
    pub grid: Vec<(u32, u32)>,
    pub rs: Vec<f64>,
    /// Optional mixture prior as `(r, weight)` pairs.
    pub mixture: Option<Vec<(f64, f64)>>,
    pub replicas: usize,
    /// Also run the free measure at the calibrated `z`.
    pub free: bool,
    pub threshold: f64,
    pub coverage: f64,
    /// Grid step in `u` for the distance to the limit curve.
    pub grid_step: f64,
    /// Rejection budget per sample outside the table cap.
    pub max_tries: u64,
}

impl Default for LimitShapeConfig {
    fn default() -> Self {
        Self {
            grid: vec![(10, 10), (20, 20), (40, 40)],
            rs: vec![0.5, 1.0, 2.0],
            mixture: Some(vec![(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)]),
            replicas: 200,
            free: true,
            threshold: 0.25,
            coverage: 0.9,
            grid_step: crate::geometry::DEFAULT_GRID_STEP,
            max_tries: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlnConfig {
    pub grid: Vec<(u32, u32)>,
    pub rs: Vec<f64>,
    pub replicas: usize,
    /// Largest admissible relative error at the last grid point.
    pub rel_tol: f64,
}

impl Default for LlnConfig {
    fn default() -> Self {
        Self { grid: vec![(20, 20), (40, 40), (60, 60)], rs: vec![1.0], replicas: 20_000, rel_tol: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvConfig {
    /// Endpoint for the extreme-`r` rows.
    pub extreme_n: (u32, u32),
    /// Values of `r` compared against `r = 1` at `extreme_n`.
    pub extreme_rs: Vec<f64>,
    pub extreme_tol: f64,
    /// Grid along which `TV(P^{pair.0}, P^{pair.1})` must increase.
    pub grid: Vec<(u32, u32)>,
    pub pair: (f64, f64),
}

impl Default for TvConfig {
    fn default() -> Self {
        Self {
            extreme_n: (2, 2),
            extreme_rs: vec![1e6, 1e-6],
            extreme_tol: 1e-3,
            grid: vec![(2, 2), (4, 4), (6, 6)],
            pair: (2.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub pairs: usize,
    pub max_edges: usize,
    pub slack: f64,
    /// Minimum `d_T/d_H` required of the two-segment pair.
    pub min_ratio: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { pairs: 10_000, max_edges: 8, slack: 1e-9, min_ratio: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub calibration: CalibrationConfig,
    pub lclt: LcltConfig,
    pub limit_shape: LimitShapeConfig,
    pub lln: LlnConfig,
    pub tv: TvConfig,
    pub metrics: MetricConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: crate::sampler::DEFAULT_SEED,
            calibration: CalibrationConfig::default(),
            lclt: LcltConfig::default(),
            limit_shape: LimitShapeConfig::default(),
            lln: LlnConfig::default(),
            tv: TvConfig::default(),
            metrics: MetricConfig::default(),
        }
    }
}

impl VerifyConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Calibration,
    Lclt,
    LimitShape,
    Lln,
    Tv,
    Metrics,
}

impl Check {
    pub const ALL: [Check; 6] =
        [Check::Calibration, Check::Lclt, Check::LimitShape, Check::Lln, Check::Tv, Check::Metrics];

    pub fn id(self) -> &'static str {
        match self {
            Check::Calibration => "calibration",
            Check::Lclt => "lclt",
            Check::LimitShape => "limit-shape",
            Check::Lln => "lln",
            Check::Tv => "tv",
            Check::Metrics => "metrics",
        }
    }

    pub fn run(self, config: &VerifyConfig) -> Result<Report> {
        match self {
            Check::Calibration => check_calibration(&config.calibration),
            Check::Lclt => check_lclt(&config.lclt),
            Check::LimitShape => check_limit_shape(&config.limit_shape, config.seed),
            Check::Lln => check_lln_points(&config.lln, config.seed),
            Check::Tv => check_tv(&config.tv),
            Check::Metrics => check_metric_dominance(&config.metrics, config.seed),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_roundtrip() {
        let c = VerifyConfig::from_json("{}").unwrap();
        assert_eq!(c, VerifyConfig::default());
        let c2 = VerifyConfig::from_json(r#"{"seed": 7, "tv": {"grid": [[2,2],[3,3]]}}"#).unwrap();
        assert_eq!(c2.seed, 7);
        assert_eq!(c2.tv.grid, vec![(2, 2), (3, 3)]);
        assert_eq!(c2.tv.pair, (2.0, 1.0));
        let back = VerifyConfig::from_json(&serde_json::to_string(&c2).unwrap()).unwrap();
        assert_eq!(back, c2);
        assert!(VerifyConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn check_ids() {
        for c in Check::ALL {
            assert_eq!(c.id().parse::<Check>().unwrap(), c);
        }
        assert!("all".parse::<Check>().is_err());
    }

    #[test]
    fn csv_layout() {
        let mut rep = Report::new("demo");
        rep.push(Row::new((2, 2), "1", "x", 0.5, 0.25, true));
        rep.trend("1", "x", &[((2, 2), 3.0), ((4, 4), 2.0), ((6, 6), 2.5)], false);
        assert!(!rep.passed());
        assert_eq!(rep.failures().count(), 1);
        let mut buf = Vec::new();
        write_csv(&[rep], &VerifyConfig::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# seed="));
        assert!(lines[1].starts_with("# config={"));
        assert_eq!(lines[2], "check_id,n1,n2,r,statistic,value,reference,deviation,pass");
        assert_eq!(lines[3], "demo,2,2,1,x,0.5,0.25,0.25,true");
        assert_eq!(lines[5], "demo,6,6,1,x:decrease,2.5,2,0.5,false");
    }
}
