//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] from defaults, an optional
//! `key = value` config file and the flags (flags win), and embeds it with
//! the tool version in its output. Exit codes: 0 success, 1 verification
//! failure, 2 usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::exact::p_internal_exact;
use crate::analytic::{
    birth_time_density, mean_internal, mixture_check, p_internal_table, BirthTimeLaw, MixtureStatistic, MixtureValue,
    SegmentMode, DEFAULT_ORDER,
};
use crate::engine::{simulate_pht_keyed, simulate_stit_keyed, Tessellation, TessellationJson};
use crate::error::{Error, Result};
use crate::extract::{
    containment_weight, density_totals, line_section, maximal_segments, segments_to_csv, select, weight_of,
    MaximalSegment, Selection, WeightingMode,
};
use crate::geometry::Window;
use crate::measure::DirectionalDistribution;
use crate::point::Point;
use crate::stats::{gof_ks_censored, mc_run, mean_estimate, poisson_dispersion, ratio_estimate, RatioPool};
use crate::verify::{run_suite, Fault, Suite, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "stit", version, about = "STIT tessellations: simulation, segment statistics and analytic laws")]
struct Cli {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; never changes numeric output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct SimArgs {
    /// Dimension (2 or 3).
    #[arg(short = 'd', long = "dim")]
    d: Option<usize>,
    /// Time horizon.
    #[arg(short = 't', long = "time")]
    t: Option<f64>,
    /// Box side lengths, comma separated; one value is used for every side.
    #[arg(long)]
    window: Option<String>,
    /// Directional distribution: isotropic, axis or discrete:[((n..),w),..].
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Minus-sampling margin as a fraction of each side.
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate tessellations and write them as JSON (or a segment CSV).
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Poisson hyperplane tessellation instead of STIT.
        #[arg(long)]
        pht: bool,
        /// Also render the first replicate as SVG (d = 2).
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value_t = 800.0)]
        pixels: f64,
    },
    /// Monte Carlo estimate of a segment statistic.
    Estimate {
        #[command(flatten)]
        sim: SimArgs,
        /// p_internal, mean_internal, mean_length or density.
        #[arg(long)]
        stat: String,
        /// Vertex count for p_internal.
        #[arg(long)]
        n: Option<usize>,
        /// typical or lengthweighted.
        #[arg(long, default_value = "typical")]
        mode: String,
        /// contained (minus-sampling), midpoint, or weighted (contained with
        /// translation weights).
        #[arg(long, default_value = "contained")]
        selection: String,
        #[arg(short = 'k', long)]
        k: Option<usize>,
        #[arg(short = 'j', long)]
        j: Option<usize>,
    },
    /// Analytic laws.
    Analytic {
        #[command(subcommand)]
        what: AnalyticCommand,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(default_value = "quick")]
        suite: String,
        /// Corrupt a reference value on purpose (analytic_constant).
        #[arg(long)]
        inject_fault: Option<String>,
    },
    /// Render a planar tessellation file as SVG.
    Render {
        input: PathBuf,
        /// Which tessellation of a multi-replicate file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 800.0)]
        pixels: f64,
    },
    /// Section with a line through the window centre along one axis.
    Linesection {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 0)]
        axis: usize,
    },
}

#[derive(Subcommand, Debug)]
enum AnalyticCommand {
    /// Internal-vertex probabilities p(n).
    P {
        #[arg(short = 'd', long = "dim")]
        d: usize,
        #[arg(long, default_value = "typical")]
        mode: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(short = 't', long = "time", default_value_t = 1.0)]
        t: f64,
        /// Also give the exact form (d = 2, 3).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Mean number of internal vertices.
    Mean {
        #[arg(short = 'd', long = "dim")]
        d: usize,
        #[arg(long, default_value = "typical")]
        mode: String,
    },
    /// Joint birth-time density.
    Density {
        #[arg(short = 'd', long = "dim")]
        d: usize,
        #[arg(short = 'k', long)]
        k: usize,
        #[arg(short = 'j', long)]
        j: usize,
        /// Birth times, comma separated.
        #[arg(long)]
        at: String,
        #[arg(short = 't', long = "time", default_value_t = 1.0)]
        t: f64,
    },
    /// Segment-length law as a mixture over the last birth time.
    Mixture {
        #[arg(short = 'd', long = "dim")]
        d: usize,
        #[arg(short = 'j', long)]
        j: usize,
        #[arg(short = 't', long = "time", default_value_t = 1.0)]
        t: f64,
        /// `Λ(⟨u⟩)` of a unit segment in the direction of interest.
        #[arg(long)]
        lambda_u: f64,
        /// Moment order `p` of `E ℓ^p`.
        #[arg(long)]
        moment: Option<f64>,
        /// CDF grid, comma separated.
        #[arg(long)]
        cdf: Option<String>,
    },
}

/// Fully resolved run parameters, embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub d: usize,
    pub window: Vec<f64>,
    pub q: String,
    pub t: f64,
    pub seed: u64,
    pub replicates: usize,
    pub margin: f64,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

const CONFIG_KEYS: [&str; 10] = ["d", "window", "q", "t", "seed", "replicates", "margin", "threads", "out", "format"];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_value(key, x.trim())).collect()
}

struct Resolver<'a> {
    cli: &'a Cli,
    file: BTreeMap<String, String>,
}

impl Resolver<'_> {
    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key).map(|v| parse_value(key, v)).transpose(),
        }
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.get(self.cli.seed, "seed")?.unwrap_or(1))
    }

    fn threads(&self) -> Result<usize> {
        let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        let n = self.get(self.cli.threads, "threads")?.unwrap_or(default);
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(n)
    }

    fn out(&self) -> Option<PathBuf> {
        self.cli.out.clone().or_else(|| self.file.get("out").map(PathBuf::from))
    }

    fn format(&self, default: Format) -> Result<Format> {
        if let Some(f) = self.cli.format {
            return Ok(f);
        }
        match self.file.get("format").map(String::as_str) {
            None => Ok(default),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some("table") => Ok(Format::Table),
            Some(other) => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }

    fn run_config(&self, sim: &SimArgs, default_replicates: usize, default_format: Format) -> Result<RunConfig> {
        let d = self.get(sim.d, "d")?.unwrap_or(2);
        if !(d == 2 || d == 3) {
            return Err(Error::Config(format!("simulation needs d = 2 or 3, got {d}")));
        }
        let window = match sim.window.clone().or_else(|| self.file.get("window").cloned()) {
            Some(w) => parse_list("window", &w)?,
            None => vec![1.0],
        };
        let window = match window.len() {
            1 => vec![window[0]; d],
            n if n == d => window,
            n => return Err(Error::Config(format!("window has {n} sides, expected 1 or {d}"))),
        };
        let t = self.get(sim.t, "t")?.unwrap_or(if d == 2 { 20.0 } else { 6.0 });
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("t must be positive and finite, got {t}")));
        }
        let replicates = self.get(sim.replicates, "replicates")?.unwrap_or(default_replicates);
        if replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let margin = self.get(sim.margin, "margin")?.unwrap_or(0.15);
        Ok(RunConfig {
            d,
            window,
            q: sim.q.clone().or_else(|| self.file.get("q").cloned()).unwrap_or_else(|| "isotropic".into()),
            t,
            seed: self.seed()?,
            replicates,
            margin,
            threads: self.threads()?,
            out: self.out(),
            format: self.format(default_format)?,
        })
    }
}

impl RunConfig {
    fn window(&self) -> Result<Window> {
        Window::with_sides(&self.window)
    }

    fn directions(&self) -> Result<DirectionalDistribution> {
        DirectionalDistribution::parse(&self.q, self.d)
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => parse_config_file(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    let r = Resolver { cli, file };
    match &cli.command {
        Command::Simulate { sim, pht, svg, pixels } => cmd_simulate(&r.run_config(sim, 1, Format::Json)?, *pht, *svg, *pixels),
        Command::Estimate { sim, stat, n, mode, selection, k, j } => {
            cmd_estimate(&r.run_config(sim, 100, Format::Json)?, stat, *n, mode, selection, *k, *j)
        }
        Command::Analytic { what } => cmd_analytic(what, r.out().as_deref(), r.format(Format::Table)?),
        Command::Verify { suite, inject_fault } => {
            let cfg = VerifyConfig {
                suite: Suite::parse(suite)?,
                seed: r.seed()?,
                threads: r.threads()?,
                fault: inject_fault.as_deref().map(Fault::parse).transpose()?,
            };
            cmd_verify(&cfg, r.out().as_deref(), r.format(Format::Table)?)
        }
        Command::Render { input, index, pixels } => cmd_render(input, *index, *pixels, r.out().as_deref()),
        Command::Linesection { sim, axis } => cmd_linesection(&r.run_config(sim, 100, Format::Table)?, *axis),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn envelope(config: impl Serialize, key: &str, value: Value) -> Result<String> {
    let mut v = json!({ "version": crate::VERSION, "config": serde_json::to_value(config)? });
    v[key] = value;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn simulate_all(cfg: &RunConfig, pht: bool) -> Result<Vec<Tessellation>> {
    let w = cfg.window()?;
    let q = cfg.directions()?;
    mc_run(cfg.replicates, cfg.seed, cfg.threads, |_, key| {
        if pht {
            simulate_pht_keyed(&w, &q, cfg.t, cfg.seed, key)
        } else {
            simulate_stit_keyed(&w, &q, cfg.t, cfg.seed, key)
        }
    })
}

fn cmd_simulate(cfg: &RunConfig, pht: bool, svg: bool, pixels: f64) -> Result<i32> {
    if svg && cfg.d != 2 {
        return Err(Error::UnsupportedDimension { dim: cfg.d, what: "SVG rendering" });
    }
    let ts = simulate_all(cfg, pht)?;
    let text = match cfg.format {
        Format::Json => {
            let all: Vec<TessellationJson> = ts.iter().map(Tessellation::to_json).collect();
            envelope(cfg, "tessellations", serde_json::to_value(all)?)?
        }
        Format::Csv => {
            let mut s = String::new();
            for (i, t) in ts.iter().enumerate() {
                let csv = segments_to_csv(&maximal_segments(t)?, cfg.d);
                for (row, line) in csv.lines().enumerate() {
                    if row == 0 && i > 0 {
                        continue;
                    }
                    let _ = writeln!(s, "{},{line}", if row == 0 { "replicate".to_string() } else { i.to_string() });
                }
            }
            s
        }
        Format::Table => {
            let mut s = String::from("replicate\tcells\tevents\tface_content\n");
            for (i, t) in ts.iter().enumerate() {
                let _ = writeln!(s, "{i}\t{}\t{}\t{:.6}", t.cell_count(), t.events.len(), t.total_face_content());
            }
            s
        }
    };
    let picture = if svg { Some(ts[0].to_svg(pixels)?) } else { None };
    match (&cfg.out, picture) {
        (Some(p), pic) => {
            std::fs::write(p, text)?;
            if let Some(pic) = pic {
                std::fs::write(p.with_extension("svg"), pic)?;
            }
        }
        // without an output file the picture replaces the data on stdout
        (None, Some(pic)) => print!("{pic}"),
        (None, None) => print!("{text}"),
    }
    Ok(0)
}

#[derive(Default)]
struct Totals {
    num: f64,
    den: f64,
    sq: f64,
    count: usize,
}

fn cmd_estimate(
    cfg: &RunConfig,
    stat: &str,
    n: Option<usize>,
    mode: &str,
    selection: &str,
    k: Option<usize>,
    j: Option<usize>,
) -> Result<i32> {
    let mode = WeightingMode::parse(mode)?;
    let w = cfg.window()?;
    let q = cfg.directions()?;
    let inner = w.shrink(cfg.margin)?;
    #[derive(Clone, Copy)]
    enum Pick {
        Plain(Selection),
        Weighted,
    }
    let pick = match selection {
        "contained" => Pick::Plain(Selection::Contained),
        "midpoint" => Pick::Plain(Selection::Midpoint),
        "weighted" => Pick::Weighted,
        other => return Err(Error::invalid(format!("unknown selection `{other}`"))),
    };
    let report = match stat {
        "p_internal" | "mean_internal" | "mean_length" => {
            let n = match (stat, n) {
                ("p_internal", None) => return Err(Error::invalid("p_internal needs --n")),
                (_, n) => n,
            };
            let value = |s: &MaximalSegment| match stat {
                "p_internal" => f64::from(u8::from(Some(s.internal_vertices) == n)),
                "mean_internal" => s.internal_vertices as f64,
                _ => s.length,
            };
            let per = mc_run(cfg.replicates, cfg.seed, cfg.threads, |_, key| {
                let tess = simulate_stit_keyed(&w, &q, cfg.t, cfg.seed, key)?;
                let segs = maximal_segments(&tess)?;
                let chosen: Vec<(MaximalSegment, f64)> = match pick {
                    Pick::Plain(sel) => select(&segs, &w, cfg.margin, sel)?.into_iter().map(|s| (s, 1.0)).collect(),
                    Pick::Weighted => segs
                        .into_iter()
                        .filter(|s| !s.touches_boundary)
                        .map(|s| {
                            let c = containment_weight(&s, &inner);
                            (s, c)
                        })
                        .filter(|(_, c)| *c > 0.0)
                        .collect(),
                };
                let mut t = Totals::default();
                for (s, c) in &chosen {
                    let wt = weight_of(s, mode) * c;
                    t.num += wt * value(s);
                    t.den += wt;
                    t.sq += wt * wt;
                    t.count += 1;
                }
                Ok(t)
            })?;
            let mut pool = RatioPool::default();
            for t in per {
                pool.push(t.num, t.den, (t.den, t.sq, t.count));
            }
            let name = match n {
                Some(n) if stat == "p_internal" => format!("p_internal({n})"),
                _ => stat.to_string(),
            };
            ratio_estimate(&pool, &name, mode_label(mode))?
        }
        "density" => {
            let (k, j) = k.zip(j).ok_or_else(|| Error::invalid("density needs -k and -j"))?;
            let per = mc_run(cfg.replicates, cfg.seed, cfg.threads, |_, key| {
                let (sum, vol) = density_totals(&simulate_stit_keyed(&w, &q, cfg.t, cfg.seed, key)?, k, j, cfg.margin)?;
                Ok(sum / vol)
            })?;
            mean_estimate(&per, &format!("density(k={k}, j={j})"))?
        }
        other => return Err(Error::invalid(format!("unknown statistic `{other}`"))),
    };
    let text = match cfg.format {
        Format::Json => envelope(cfg, "estimate", serde_json::to_value(&report)?)?,
        Format::Csv => format!(
            "statistic,mode,estimate,stderr,ci_low,ci_high,ess,sample_size,replicates\n{},{},{},{},{},{},{},{},{}\n",
            report.statistic,
            report.mode,
            report.estimate,
            report.stderr,
            report.ci95.0,
            report.ci95.1,
            report.effective_sample_size,
            report.sample_size,
            report.replicates
        ),
        Format::Table => format!(
            "{} ({}): {:.6} ± {:.6}  95% CI [{:.6}, {:.6}]  ess {:.1}  n {}  replicates {}\n",
            report.statistic,
            report.mode,
            report.estimate,
            report.stderr,
            report.ci95.0,
            report.ci95.1,
            report.effective_sample_size,
            report.sample_size,
            report.replicates
        ),
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(0)
}

fn mode_label(m: WeightingMode) -> &'static str {
    match m {
        WeightingMode::Typical => "typical",
        WeightingMode::LengthWeighted => "lengthweighted",
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        "infinite".into()
    } else {
        format!("{x:?}")
    }
}

fn cmd_analytic(what: &AnalyticCommand, out: Option<&Path>, format: Format) -> Result<i32> {
    let (header, rows, config): (Vec<&str>, Vec<Vec<Value>>, Value) = match what {
        AnalyticCommand::P { d, mode, n, n_max, t, exact, order } => {
            let mode = SegmentMode::parse(mode)?;
            let (lo, hi) = match (n, n_max) {
                (Some(n), None) => (*n, *n),
                (None, Some(m)) => (0, *m),
                (None, None) => (0, 10),
                (Some(_), Some(_)) => return Err(Error::invalid("give --n or --n-max, not both")),
            };
            let table = p_internal_table(*d, mode, hi, *t, *order)?;
            let mut rows = Vec::new();
            for (n, p) in table.iter().enumerate().skip(lo) {
                let mut row = vec![json!(n), json!(p)];
                if *exact {
                    let form = p_internal_exact(*d, mode, n)?;
                    row.push(json!(form.to_string()));
                    row.push(json!(form.to_f64()));
                }
                rows.push(row);
            }
            let header = if *exact { vec!["n", "p", "exact", "exact_value"] } else { vec!["n", "p"] };
            (header, rows, json!({"d": d, "mode": mode_label(mode), "t": t, "order": order}))
        }
        AnalyticCommand::Mean { d, mode } => {
            let mode = SegmentMode::parse(mode)?;
            let m = mean_internal(*d, mode)?;
            let v = if m.is_infinite() { json!("infinite") } else { json!(m) };
            (vec!["mean"], vec![vec![v]], json!({"d": d, "mode": mode_label(mode)}))
        }
        AnalyticCommand::Density { d, k, j, at, t } => {
            let s = parse_list("at", at)?;
            let law = BirthTimeLaw::new(*d, *k, *j, *t)?;
            let v = birth_time_density(&law, &s)?;
            (vec!["density"], vec![vec![json!(v)]], json!({"d": d, "k": k, "j": j, "t": t, "at": s}))
        }
        AnalyticCommand::Mixture { d, j, t, lambda_u, moment, cdf } => {
            let config = json!({"d": d, "j": j, "t": t, "lambda_u": lambda_u});
            match (moment, cdf) {
                (Some(p), None) => {
                    let v = match mixture_check(*d, *j, *t, *lambda_u, &MixtureStatistic::Moment(*p))? {
                        MixtureValue::Finite(v) => json!(v[0]),
                        MixtureValue::Divergent => json!("infinite"),
                    };
                    (vec!["p", "moment"], vec![vec![json!(p), v]], config)
                }
                (None, Some(grid)) => {
                    let grid = parse_list("cdf", grid)?;
                    let rows = match mixture_check(*d, *j, *t, *lambda_u, &MixtureStatistic::Cdf(grid.clone()))? {
                        MixtureValue::Finite(v) => grid.iter().zip(v).map(|(x, f)| vec![json!(x), json!(f)]).collect(),
                        MixtureValue::Divergent => unreachable!("CDFs are finite"),
                    };
                    (vec!["x", "cdf"], rows, config)
                }
                _ => return Err(Error::invalid("give exactly one of --moment and --cdf")),
            }
        }
    };
    let cell = |v: &Value| match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(fmt_f64).unwrap_or_else(|| n.to_string()),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let text = match format {
        Format::Json => {
            let objs: Vec<Value> =
                rows.iter().map(|r| Value::Object(header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect())).collect();
            envelope(config, "rows", Value::Array(objs))?
        }
        Format::Csv | Format::Table => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = header.join(sep) + "\n";
            for r in &rows {
                s += &(r.iter().map(cell).collect::<Vec<_>>().join(sep) + "\n");
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(0)
}

fn cmd_verify(cfg: &VerifyConfig, out: Option<&Path>, format: Format) -> Result<i32> {
    let summary = run_suite(cfg)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        _ => summary.render(),
    };
    emit(out, &text)?;
    if out.is_some() {
        print!("{}", summary.render());
    }
    Ok(if summary.passed() { 0 } else { 1 })
}

/// Read a tessellation from a `simulate` output file or a bare
/// tessellation object.
pub fn read_tessellation(text: &str, index: usize) -> Result<TessellationJson> {
    let v: Value = serde_json::from_str(text)?;
    let item = match v.get("tessellations") {
        Some(Value::Array(all)) => {
            all.get(index).cloned().ok_or_else(|| Error::invalid(format!("no tessellation {index} in file ({} present)", all.len())))?
        }
        _ => v,
    };
    Ok(serde_json::from_value(item)?)
}

fn cmd_render(input: &Path, index: usize, pixels: f64, out: Option<&Path>) -> Result<i32> {
    let t = read_tessellation(&std::fs::read_to_string(input)?, index)?;
    emit(out, &t.to_svg(pixels)?)?;
    Ok(0)
}

fn cmd_linesection(cfg: &RunConfig, axis: usize) -> Result<i32> {
    if axis >= cfg.d {
        return Err(Error::invalid(format!("axis {axis} out of range for d = {}", cfg.d)));
    }
    let w = cfg.window()?;
    let q = cfg.directions()?;
    let mut u: Point = [0.0; 3];
    u[axis] = 1.0;
    let base = w.center();
    let (lo, hi) = w.line_interval(base, u).ok_or_else(|| Error::invalid("line misses the window"))?;
    let per = mc_run(cfg.replicates, cfg.seed, cfg.threads, |_, key| {
        Ok(line_section(&simulate_stit_keyed(&w, &q, cfg.t, cfg.seed, key)?, base, u))
    })?;
    let rate = cfg.t * q.lambda_of_direction(u);
    let counts: Vec<f64> = per.iter().map(|p| p.len() as f64).collect();
    let half = 0.5 * (hi - lo);
    let gaps: Vec<f64> = per
        .iter()
        .flat_map(|pts| {
            pts.iter()
                .enumerate()
                .filter(|(_, s)| **s <= lo + half)
                .map(|(i, s)| pts.get(i + 1).map(|n| n - s).unwrap_or(f64::INFINITY))
                .collect::<Vec<_>>()
        })
        .collect();
    let mean = mean_estimate(&counts, "points per line")?;
    let target = rate * (hi - lo);
    let disp = if counts.len() > 1 { Some(poisson_dispersion(&counts)?) } else { None };
    let ks = if gaps.is_empty() { None } else { Some(gof_ks_censored(&gaps, half, |s| 1.0 - (-rate * s).exp(), "exponential spacings")?) };
    let text = match cfg.format {
        Format::Json => envelope(
            cfg,
            "line_section",
            json!({"intensity": rate, "chord_length": hi - lo, "expected_count": target, "count": mean, "dispersion": disp, "spacings": ks}),
        )?,
        Format::Csv => {
            let mut s = String::from("replicate,position\n");
            for (i, pts) in per.iter().enumerate() {
                for p in pts {
                    let _ = writeln!(s, "{i},{p}");
                }
            }
            s
        }
        Format::Table => {
            let mut s = format!("intensity {rate:.6} per unit length, chord {:.6}\n", hi - lo);
            let _ = writeln!(s, "mean count {:.6} ± {:.6} (expected {target:.6})", mean.estimate, mean.stderr);
            if let Some(d) = &disp {
                let _ = writeln!(s, "dispersion index {:.6} (p = {:.4})", d.statistic, d.p_value);
            }
            if let Some(k) = &ks {
                let _ = writeln!(s, "spacings KS D = {:.6} (p = {:.4}, n = {:.0})", k.statistic, k.p_value, k.sample_size);
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(0)
}
