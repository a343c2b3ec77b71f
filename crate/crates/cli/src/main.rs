mod render;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use convex_lines::enumerator::{build_weight_table, exact_conditional, tv_distance, TableMode, WeightTable};
use convex_lines::measure::{calibrate, expected_endpoint, select_window};
use convex_lines::sampler::{
    conditioned_batch, exact_batch, exact_mixture_batch, free_batch, mixture_batch, read_jsonl, write_jsonl, RMixture,
    DEFAULT_SEED,
};
use convex_lines::verify::{write_csv, Check, VerifyConfig};
use convex_lines::{Error, SumMethod};

/// Environment variable naming a directory for cached weight tables.
const CACHE_ENV: &str = "CONVEX_LINES_CACHE";

#[derive(Parser)]
#[command(name = "convex-lines", version, about = "Random convex lattice polygonal lines")]
struct Cli {
    /// Seed for every random stream (default 0x5EEDC0DE20240001).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Free,
    Conditioned,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Rejection,
    ExactDp,
}

#[derive(Subcommand)]
enum Command {
    /// Print the calibrated parameters for target n.
    Calibrate {
        #[arg(long, value_parser = parse_pair)]
        n: (u32, u32),
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        json: bool,
    },
    /// Draw samples and write them as JSON lines.
    Sample {
        #[arg(long, value_parser = parse_pair)]
        n: (u32, u32),
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "conditioned")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "rejection")]
        method: Method,
        /// Prior over r as `r1:w1,r2:w2,...`; overrides --r.
        #[arg(long)]
        mixture: Option<String>,
        /// Rejection budget per sample.
        #[arg(long, default_value_t = 100_000_000)]
        max_tries: u64,
        /// Truncation tail bound for free sampling.
        #[arg(long, default_value_t = 1e-12)]
        window_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact counts and weights over all lines ending at n.
    Enumerate {
        #[arg(long, value_parser = parse_pair)]
        n: (u32, u32),
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// List every line with its probability.
        #[arg(long)]
        full: bool,
        /// Also print the total-variation distance to this r.
        #[arg(long)]
        tv_vs: Option<f64>,
    },
    /// Run a verification check and write the CSV report.
    Verify {
        /// calibration, lclt, limit-shape, lln, tv, metrics or all.
        check: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot samples over the limit curve as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_pair)]
        n: (u32, u32),
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_pair(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected N1,N2, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_calibrate(n: (u32, u32), r: f64, as_json: bool) -> CliResult<()> {
    let p = calibrate(n, r)?;
    let mean = expected_endpoint(&p, SumMethod::Direct, 1e-9 * n.0.max(n.1) as f64)?.value;
    let mut out = output(None)?;
    if as_json {
        let v = json!({
            "n": [n.0, n.1],
            "r": r,
            "kappa": p.kappa,
            "delta": [p.delta.0, p.delta.1],
            "alpha": [p.alpha.0, p.alpha.1],
            "z": [p.z.0, p.z.1],
            "aspect": p.aspect,
            "expected_endpoint": mean,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(io::Error::from)?)?;
    } else {
        writeln!(out, "n                 {},{}", n.0, n.1)?;
        writeln!(out, "r                 {r}")?;
        writeln!(out, "kappa             {}", p.kappa)?;
        writeln!(out, "delta             {} {}", p.delta.0, p.delta.1)?;
        writeln!(out, "alpha             {} {}", p.alpha.0, p.alpha.1)?;
        writeln!(out, "z                 {} {}", p.z.0, p.z.1)?;
        writeln!(out, "expected_endpoint {} {}", mean[0], mean[1])?;
    }
    out.flush()?;
    Ok(())
}

struct SampleArgs {
    n: (u32, u32),
    r: f64,
    count: usize,
    mode: Mode,
    method: Method,
    mixture: Option<String>,
    max_tries: u64,
    window_tol: f64,
    out: Option<PathBuf>,
}

fn cmd_sample(a: SampleArgs, seed: u64) -> CliResult<()> {
    if a.mode == Mode::Free && a.method == Method::ExactDp {
        return Err(Failure::Usage("--method exact-dp requires --mode conditioned".into()));
    }
    let mixture = a.mixture.as_deref().map(RMixture::parse).transpose()?;
    let batch = match (&mixture, a.mode, a.method) {
        (Some(m), Mode::Conditioned, Method::ExactDp) => {
            let tables = m
                .components()
                .iter()
                .map(|&(r, _)| WeightTable::with_prefixes(a.n, r))
                .collect::<convex_lines::Result<Vec<_>>>()?;
            exact_mixture_batch(&calibrate(a.n, m.components()[0].0)?, &tables, m, a.count, seed)?
        }
        (Some(m), mode, _) => {
            mixture_batch(a.n, m, a.count, seed, mode == Mode::Conditioned, a.window_tol, a.max_tries)?
        }
        (None, Mode::Free, _) => {
            let p = calibrate(a.n, a.r)?;
            free_batch(&p, &select_window(&p, a.window_tol), a.count, seed)
        }
        (None, Mode::Conditioned, Method::Rejection) => {
            conditioned_batch(&calibrate(a.n, a.r)?, a.count, seed, a.max_tries)?
        }
        (None, Mode::Conditioned, Method::ExactDp) => {
            exact_batch(&calibrate(a.n, a.r)?, &WeightTable::with_prefixes(a.n, a.r)?, a.count, seed)?
        }
    };
    let r_label = a.mixture.clone().unwrap_or_else(|| a.r.to_string());
    let mode = match a.mode {
        Mode::Free => "free",
        Mode::Conditioned => "conditioned",
    };
    let method = match a.method {
        Method::Rejection => "rejection",
        Method::ExactDp => "exact-dp",
    };
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "# seed={seed} n1={} n2={} r={r_label} mode={mode} method={method} count={}", a.n.0, a.n.1, a.count)?;
    write_jsonl(&batch, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cached_table(n: (u32, u32), r: f64, mode: TableMode) -> CliResult<WeightTable> {
    let Some(dir) = std::env::var_os(CACHE_ENV) else {
        return Ok(build_weight_table(n, r, mode)?);
    };
    let tag = match mode {
        TableMode::ExactInteger => "exact",
        TableMode::LogDomain => "log",
    };
    let path = PathBuf::from(dir).join(format!("weights_{}x{}_r{r}_{tag}.csv", n.0, n.1));
    if path.exists() {
        return Ok(WeightTable::read_csv(BufReader::new(File::open(&path)?))?);
    }
    let table = build_weight_table(n, r, mode)?;
    std::fs::create_dir_all(path.parent().expect("joined path has a parent"))?;
    let mut w = BufWriter::new(File::create(&path)?);
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(table)
}

fn cmd_enumerate(n: (u32, u32), r: f64, full: bool, tv_vs: Option<f64>) -> CliResult<()> {
    let count = cached_table(n, 1.0, TableMode::ExactInteger)?;
    let weights = cached_table(n, r, TableMode::LogDomain)?;
    let mut out = output(None)?;
    writeln!(out, "# n={},{} r={r}", n.0, n.1)?;
    writeln!(out, "count {}", count.exact_weight(n).expect("exact table"))?;
    writeln!(out, "log_weight_sum {}", weights.log_weight(n))?;
    if full {
        let law = exact_conditional(n, r)?;
        for (line, p) in &law {
            let edges: Vec<String> = line.edges().iter().map(|(d, k)| format!("({},{})x{k}", d.x1(), d.x2())).collect();
            writeln!(out, "{p:.12} {}", edges.join(" "))?;
        }
    }
    if let Some(r2) = tv_vs {
        writeln!(out, "tv {}", tv_distance(n, r, r2)?)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(check: &str, config: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> CliResult<()> {
    let checks: Vec<Check> = if check == "all" {
        Check::ALL.to_vec()
    } else {
        vec![check.parse::<Check>().map_err(|e| Failure::Usage(e.to_string()))?]
    };
    let mut cfg = match config {
        Some(p) => VerifyConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => VerifyConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let reports = checks.iter().map(|c| c.run(&cfg)).collect::<convex_lines::Result<Vec<_>>>()?;
    let mut w = output(out)?;
    write_csv(&reports, &cfg, &mut w)?;
    w.flush()?;
    for rep in &reports {
        let failed = rep.failures().count();
        let verdict = if failed == 0 { "PASS".to_string() } else { format!("FAIL ({failed} rows)") };
        eprintln!("{}: {verdict}", rep.check_id);
        for row in rep.failures() {
            eprintln!("  {:?} r={} {} = {} (reference {})", row.n, row.r, row.statistic, row.value, row.reference);
        }
    }
    Ok(())
}

fn cmd_render(input: &Path, n: (u32, u32), out: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(input)?;
    let records = read_jsonl(text.as_bytes())?;
    let caption = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(|l| l.trim_start_matches('#').split_whitespace())
        .find_map(|kv| kv.strip_prefix("r="))
        .map(|r| format!("r = {r}"))
        .unwrap_or_default();
    std::fs::write(out, render::render_svg(&records, n, &caption))?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.command {
        Command::Calibrate { n, r, json } => cmd_calibrate(n, r, json),
        Command::Sample { n, r, count, mode, method, mixture, max_tries, window_tol, out } => {
            cmd_sample(SampleArgs { n, r, count, mode, method, mixture, max_tries, window_tol, out }, seed)
        }
        Command::Enumerate { n, r, full, tv_vs } => cmd_enumerate(n, r, full, tv_vs),
        Command::Verify { check, config, out } => cmd_verify(&check, config.as_deref(), out.as_deref(), cli.seed),
        Command::Render { input, n, out } => cmd_render(&input, n, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
