use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chebtrunc::{chebyshev_points, sup_error, SamplingOracle};
use chebtrunc_harness::bench::{self, BENCH_ALGORITHMS};
use chebtrunc_harness::config::{self, default_seed, logspace, parse_config, render_config};
use chebtrunc_harness::output::{self, fmt_f64, SCHEMA_VERSION};
use chebtrunc_harness::{
    allocation_dump, bound_table, presets, run_sweep, summarize, Algorithm, BoundKind, BoundParams,
    ExperimentConfig, GroupKey,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chebtrunc", version, about = "Chebyshev approximation of functions under heteroskedastic noise")]
struct Cli {
    /// Master seed; defaults to $CHEBTRUNC_SEED, then to 1.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and print degree, error and coefficients.
    Approximate(ApproximateArgs),
    /// Run a Monte-Carlo sweep from a config file or preset.
    Sweep(SweepArgs),
    /// Dump the estimated and known-sigma allocations side by side.
    Alloc(AllocArgs),
    /// Tabulate a concentration bound as CSV.
    Bounds(BoundsArgs),
    /// Time NoisyChebtrunc against HeteroChebtrunc over a range of budgets.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// runge, t(d) or cheb(c0, c1, ...)
    #[arg(long, default_value = "runge")]
    target: String,
    /// Noise field, e.g. "burst(hi=1, lo=1e-5, a=0, b=0.1)"
    #[arg(long, default_value = "burst(hi=1, lo=1e-5, a=0, b=0.1)")]
    noise: String,
    #[arg(long, default_value = "normal")]
    distribution: String,
    #[arg(long, default_value = "independent")]
    dependence: String,
}

impl ProblemArgs {
    fn build(&self) -> anyhow::Result<(chebtrunc::Target, chebtrunc::NoiseField)> {
        let target = config::parse_target(&self.target)?;
        let noise = config::parse_noise(&self.noise)?
            .with_distribution(config::parse_distribution(&self.distribution)?)
            .with_dependence(config::parse_dependence(&self.dependence)?);
        noise.validate()?;
        Ok((target, noise))
    }
}

#[derive(Args)]
struct ApproximateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// noisy, weighted_known or hetero
    #[arg(long, default_value = "hetero")]
    algorithm: String,
    /// Budget parameter N (N + 1 samples).
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Reduced degree; defaults to floor(sqrt N).
    #[arg(long)]
    n_hat: Option<usize>,
    #[arg(long, default_value_t = config::DEFAULT_R)]
    r: f64,
    #[arg(long, default_value_t = config::DEFAULT_SUP_RESOLUTION)]
    resolution: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Config file in the flat key = value format.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset; see --list-presets.
    #[arg(long)]
    preset: Option<String>,
    /// Use the full-size grid and trial counts of a preset.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    list_presets: bool,
    /// Output directory.
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a gnuplot script.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct AllocArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Take target and noise from a config file instead.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    n_hat: usize,
    #[arg(long, default_value_t = config::DEFAULT_R)]
    r: f64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// lemma1, prop1, thm1, thm2, hetero or dependent
    #[arg(long)]
    kind: String,
    /// Subgaussian parameter for lemma1.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = config::DEFAULT_R)]
    r: f64,
    /// Noise field sampled at the N_hat grid to give sigma_vec.
    #[arg(long, default_value = "constant(1)")]
    noise: String,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    n_hat: usize,
    /// Truncation degree.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    #[arg(long, default_value_t = 0.0)]
    r_n_inf: f64,
    #[arg(long, default_value_t = 0.0)]
    q_inf: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    t_star: Option<f64>,
    /// Swept values as start:stop:step or a comma list.
    #[arg(long, default_value = "0:4:0.1")]
    grid: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 1000)]
    min: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max: usize,
    #[arg(long, default_value_t = 16)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Directory for bench.csv and bench_medians.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(default_seed);
    match cli.command {
        Command::Approximate(a) => approximate(a, seed),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Alloc(a) => alloc(a, seed),
        Command::Bounds(a) => bounds(a),
        Command::Bench(a) => bench_cmd(a, seed),
    }
}

fn approximate(a: ApproximateArgs, seed: u64) -> anyhow::Result<()> {
    let (target, noise) = a.problem.build()?;
    let alg: Algorithm = a.algorithm.parse()?;
    let n_hat = match alg {
        Algorithm::Noisy => a.n,
        _ => a.n_hat.unwrap_or_else(|| (a.n as f64).sqrt() as usize),
    };
    let f = target.to_fn();
    let mut oracle = SamplingOracle::from_arc(f.clone(), noise, seed);
    let res = chebtrunc_harness::sweep::run_pipeline(alg, &mut oracle, a.n, n_hat, a.r)?;
    let err = sup_error(|x| f(x), &res.series, a.resolution);
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "algorithm {alg}")?;
    writeln!(out, "target {target}")?;
    writeln!(out, "noise {noise}")?;
    writeln!(out, "N {}  N_hat {}  seed {seed}", a.n, res.interpolant_degree)?;
    writeln!(out, "samples_used {}", res.samples_used)?;
    writeln!(out, "noise_floor {}", fmt_f64(res.noise_floor_estimate))?;
    writeln!(out, "chosen_degree {}", res.chosen_degree)?;
    writeln!(out, "sup_error {}", fmt_f64(err))?;
    writeln!(out, "coefficients")?;
    for (i, c) in res.series.coeffs().iter().enumerate() {
        writeln!(out, "{i} {}", fmt_f64(*c))?;
    }
    Ok(())
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_config(&text)?)
}

fn sweep(a: SweepArgs, seed_flag: Option<u64>) -> anyhow::Result<()> {
    if a.list_presets {
        for (name, about) in presets::PRESETS {
            println!("{name:16} {about}");
        }
        return Ok(());
    }
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => presets::preset(name, a.full_scale)
            .with_context(|| format!("unknown preset `{name}` (try --list-presets)"))?,
        (None, None) => bail!("give --config or --preset"),
    };
    if let Some(s) = seed_flag {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    let records = run_sweep(&cfg, a.workers)?;
    let summary = summarize(&records, &[GroupKey::Algorithm, GroupKey::BigN])?;
    fs::create_dir_all(&a.out)?;
    let file = |name: &str| -> anyhow::Result<BufWriter<File>> { Ok(BufWriter::new(File::create(a.out.join(name))?)) };
    output::write_records(file("records.csv")?, &records)?;
    output::write_summary(file("summary.csv")?, &summary)?;
    output::write_timing(file("timing.csv")?, &records)?;
    let mut manifest = file("manifest.txt")?;
    writeln!(manifest, "# chebtrunc sweep, csv schema v{SCHEMA_VERSION}")?;
    write!(manifest, "{}", render_config(&cfg))?;
    manifest.flush()?;
    if a.plot {
        let algs: Vec<&str> = cfg.algorithms.iter().map(|x| x.tag()).collect();
        let script = output::gnuplot_script("summary.csv", &algs, &format!("{} / {}", cfg.target, cfg.noise));
        fs::write(a.out.join("sweep.gp"), script)?;
    }
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} trials, {failures} failed, written to {}", records.len(), a.out.display());
    for row in &summary {
        eprintln!(
            "{:15} N={:8} mean_err={:.4e} degree={:.1}",
            row.group.algorithm.map(|x| x.tag()).unwrap_or(""),
            row.group.big_n.unwrap_or(0),
            row.mean_error,
            row.mean_degree
        );
    }
    Ok(())
}

fn alloc(a: AllocArgs, seed: u64) -> anyhow::Result<()> {
    let cfg = match &a.config {
        Some(path) => load_config(path)?,
        None => {
            let (target, noise) = a.problem.build()?;
            let mut c = ExperimentConfig::new(target, noise);
            c.master_seed = seed;
            c
        }
    };
    let dump = allocation_dump(&cfg, a.n, a.n_hat, a.r)?;
    eprintln!("m = {} pre-samples per node, N + 1 = {}", dump.m, a.n + 1);
    match &a.out {
        Some(path) => output::write_alloc(BufWriter::new(File::create(path)?), &dump)?,
        None => output::write_alloc(io::stdout().lock(), &dump)?,
    }
    Ok(())
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let [start, stop, step] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (start, stop, step) = (start?, stop?, step?);
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("grid needs step > 0 and stop >= start");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + i as f64 * step).collect());
    }
    Ok(s.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<_, _>>()?)
}

fn bounds(a: BoundsArgs) -> anyhow::Result<()> {
    let kind: BoundKind = a.kind.parse()?;
    let noise = config::parse_noise(&a.noise)?;
    let sigma_vec =
        chebyshev_points(a.n_hat).points().iter().map(|&x| noise.sigma_at(x)).collect::<chebtrunc::Result<Vec<f64>>>()?;
    let params = BoundParams {
        sigma: a.sigma,
        m: a.m,
        s: a.s,
        r: a.r,
        sigma_vec,
        big_n: a.n,
        n_hat: a.n_hat,
        n: a.degree,
        r_n_inf: a.r_n_inf,
        q_inf: a.q_inf,
        nu_vec: Vec::new(),
        alpha: a.alpha,
        t_star: a.t_star,
        grid: parse_grid(&a.grid)?,
    };
    let rows = bound_table(kind, &params)?;
    output::write_bounds(io::stdout().lock(), &rows)?;
    Ok(())
}

fn bench_cmd(a: BenchArgs, seed: u64) -> anyhow::Result<()> {
    let (target, noise) = a.problem.build()?;
    let grid = logspace(a.min, a.max, a.count);
    let records = bench::runtime_study(&target, noise, &grid, a.trials, seed)?;
    let med = bench::medians(&records);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        output::write_bench(BufWriter::new(File::create(dir.join("bench.csv"))?), &records)?;
        output::write_bench_medians(BufWriter::new(File::create(dir.join("bench_medians.csv"))?), &med)?;
    } else {
        output::write_bench_medians(io::stdout().lock(), &med)?;
    }
    for alg in BENCH_ALGORITHMS {
        let pts: Vec<_> = med.iter().filter(|m| m.algorithm == alg).collect();
        let xs: Vec<f64> = pts.iter().map(|m| m.big_n as f64).collect();
        let ys: Vec<f64> = pts.iter().map(|m| m.median_s).collect();
        let fit = bench::linear_fit(&xs, &ys);
        eprintln!(
            "{alg:8} t = {:.3e} N + {:.3e}  relative residual {:.3}",
            fit.a, fit.b, fit.relative_residual
        );
    }
    Ok(())
}
