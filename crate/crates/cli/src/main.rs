use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};

use growthgap::bounds::{lower_bound, upper_bound};
use growthgap::diffeo::membership_constant;
use growthgap::dynamics::growth_sequence;
use growthgap::lab::config::parse_blocks;
use growthgap::lab::{self, csv_float, DiffeoConfig, DiffeoKind, OutputFormat, Scenario, ScenarioReport};
use growthgap::numerics::{lin_space, log_space};
use growthgap::{BoundSpec, Diffeo, GridSpec, Modulus, Sign, Theorem};

const WORKERS_ENV: &str = "GROWTHGAP_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "growthgap", version, about = "Growth sequences of interval diffeomorphisms")]
struct Cli {
    /// Worker threads for growth computations (0: all cores). GROWTHGAP_WORKERS overrides this flag.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a modulus and its least concave majorant, or print its regularity class.
    Modulus(ModulusArgs),
    /// Build a map and print its certification data as key,value rows.
    Construct(MapArgs),
    /// Compute the growth sequence Γₙ of a map.
    Growth(GrowthArgs),
    /// Evaluate a theorem's bound on log Γₙ.
    Bounds(BoundsArgs),
    /// Run a scenario file and report verdicts.
    Verify(VerifyArgs),
    /// Expand the sweep keys of a scenario file and run every point.
    Sweep(SweepArgs),
    /// Sample x, f(x), f'(x) of a map.
    Describe(DescribeArgs),
}

#[derive(Args, Debug)]
struct ModulusSpecArgs {
    /// Modulus: holder:<alpha>, lipschitz, xlog, sqrtlog, invlog or tabulated:<csv>.
    #[arg(long, default_value = "lipschitz")]
    modulus: String,
    /// Scale factor applied to ω.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Right end of the modulus domain (default: 1, or the last table knot).
    #[arg(long)]
    domain_end: Option<f64>,
}

impl ModulusSpecArgs {
    fn build(&self) -> growthgap::Result<Modulus> {
        let base = Modulus::parse(&self.modulus)?;
        let end = self.domain_end.unwrap_or(base.domain_end());
        Modulus::new(base.kind().clone(), end, self.scale)
    }
}

#[derive(Args, Debug)]
struct ModulusArgs {
    #[command(flatten)]
    modulus: ModulusSpecArgs,
    /// Number of sample points (0 followed by log-spaced points).
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Print the regularity classification instead of samples.
    #[arg(long, default_value_t = false)]
    regularity: bool,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Map: from_modulus, sharpness, pasted, identity or moebius_test.
    #[arg(long, default_value = "identity")]
    diffeo: String,
    #[command(flatten)]
    modulus: ModulusSpecArgs,
    /// Window for from_modulus, ε for sharpness.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Displacement sign near 0 for from_modulus: contracting or expanding.
    #[arg(long, default_value = "contracting")]
    sign: String,
    /// Smallest k for the sharpness family (also used for pasted blocks).
    #[arg(long, default_value_t = 32)]
    k_min: u64,
    /// Pasted blocks as a:b:epsilon, comma separated.
    #[arg(long, default_value = "")]
    blocks: String,
}

impl MapArgs {
    fn build(&self) -> growthgap::Result<(Modulus, Diffeo)> {
        let m = self.modulus.build()?;
        let cfg = DiffeoConfig {
            kind: self.diffeo.parse::<DiffeoKind>()?,
            epsilon: self.epsilon,
            sign: self.sign.parse::<Sign>()?,
            k_min: self.k_min,
            blocks: parse_blocks(&self.blocks)?,
        };
        let f = cfg.build(&m)?;
        Ok((m, f))
    }

    fn echo(&self) {
        eprintln!(
            "# diffeo={} modulus={} scale={} domain_end={} epsilon={} sign={} k_min={} blocks=[{}]",
            self.diffeo,
            self.modulus.modulus,
            self.modulus.scale,
            self.modulus.domain_end.map_or("default".into(), |v| v.to_string()),
            self.epsilon.map_or("none".into(), |v| v.to_string()),
            self.sign,
            self.k_min,
            self.blocks
        );
    }
}

#[derive(Args, Debug)]
struct GrowthArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Largest n.
    #[arg(long, default_value_t = 1024)]
    nmax: usize,
    /// Base probe count.
    #[arg(long, default_value_t = GridSpec::default().base)]
    grid: usize,
    /// Refinement iterations at each dyadic checkpoint.
    #[arg(long, default_value_t = GridSpec::default().refine)]
    refine: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// thm2, thm3, thm4, thm5, cor5_1, cor5_2, thm6_lower or thm7_lower.
    #[arg(long)]
    theorem: String,
    /// Modulus: holder:<alpha>, lipschitz, xlog, sqrtlog, invlog or tabulated:<csv>.
    #[arg(long, default_value = "lipschitz")]
    modulus: String,
    /// Constants as key=value pairs, e.g. C=1 or c=2,eps=0.1.
    #[arg(long, default_value = "")]
    constants: String,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    n_list: Vec<usize>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Scenario file.
    config: PathBuf,
    /// Also write the machine-readable check records here.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Scenario file with sweep.<key> lists.
    config: PathBuf,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DescribeArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Number of uniformly spaced samples on [0, 1].
    #[arg(long, default_value_t = 1025)]
    samples: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status 2: bad configuration or a map that cannot be built.
#[derive(Debug)]
struct Setup(anyhow::Error);

fn setup<E: Into<anyhow::Error>>(e: E) -> Setup {
    Setup(e.into())
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Setup> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(setup)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn resolve_workers(flag: usize) -> Result<usize, Setup> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| setup(anyhow!("{WORKERS_ENV}='{v}' is not a worker count"))),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Setup(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when some verdict failed.
fn run(cli: Cli) -> Result<bool, Setup> {
    let workers = resolve_workers(cli.workers)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(setup)?;
    match cli.command {
        Command::Modulus(a) => modulus_cmd(a).map(|_| true),
        Command::Construct(a) => construct_cmd(a).map(|_| true),
        Command::Growth(a) => growth_cmd(a).map(|_| true),
        Command::Bounds(a) => bounds_cmd(a).map(|_| true),
        Command::Verify(a) => verify_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Describe(a) => describe_cmd(a).map(|_| true),
    }
}

fn io_err(e: io::Error) -> Setup {
    setup(anyhow!("writing output: {e}"))
}

fn modulus_cmd(a: ModulusArgs) -> Result<(), Setup> {
    eprintln!(
        "# modulus={} scale={} domain_end={} grid={} regularity={}",
        a.modulus.modulus,
        a.modulus.scale,
        a.modulus.domain_end.map_or("default".into(), |v| v.to_string()),
        a.grid,
        a.regularity
    );
    if a.grid < 2 {
        return Err(setup(anyhow!("--grid must be at least 2")));
    }
    let m = a.modulus.build().map_err(setup)?;
    let mut w = sink(&a.out)?;
    if a.regularity {
        let r = m.classify_regularity(a.grid).map_err(setup)?;
        let cut = |c: Option<growthgap::modulus::AlphaCutoff>| {
            c.map_or(",".to_string(), |c| format!("{},{}", csv_float(c.alpha), csv_float(c.cutoff)))
        };
        writeln!(w, "property,value,cutoff").map_err(io_err)?;
        writeln!(w, "alpha_monotone,{}", cut(r.alpha_monotone)).map_err(io_err)?;
        writeln!(w, "alpha_increasing,{}", cut(r.alpha_increasing)).map_err(io_err)?;
        writeln!(w, "ratio_over_x_decreasing,{},", r.ratio_over_x_decreasing).map_err(io_err)?;
        writeln!(w, "xlog_limit_class,{:?},", r.xlog_limit_class).map_err(io_err)?;
        if let Some(c) = r.claim4 {
            writeln!(w, "claim4_min_ratio,{},", csv_float(c.min_ratio)).map_err(io_err)?;
        }
    } else {
        let star = m.concave_majorant(a.grid).map_err(setup)?;
        writeln!(w, "delta,omega,majorant").map_err(io_err)?;
        for d in m.majorant_grid(a.grid) {
            writeln!(w, "{},{},{}", csv_float(d), csv_float(m.at(d)), csv_float(star.at(d))).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

fn construct_cmd(a: MapArgs) -> Result<(), Setup> {
    a.echo();
    let (m, f) = a.build().map_err(setup)?;
    let mut w = sink(&None)?;
    writeln!(w, "key,value").map_err(io_err)?;
    let d = f.description();
    writeln!(w, "constructor,{}", d.constructor).map_err(io_err)?;
    for (k, v) in &d.params {
        writeln!(w, "{k},{}", v.replace(',', ";")).map_err(io_err)?;
    }
    let fixed: Vec<String> = f.fixed_points().iter().map(|&p| csv_float(p)).collect();
    writeln!(w, "fixed_points,{}", fixed.join(";")).map_err(io_err)?;
    writeln!(w, "tangential,{}", f.is_tangential(1e-8)).map_err(io_err)?;
    let c = membership_constant(&f, &m, &log_space(1e-5, 1e-1, 17), 1 << 16);
    writeln!(w, "membership_constant,{}", csv_float(c)).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn growth_cmd(a: GrowthArgs) -> Result<(), Setup> {
    a.map.echo();
    eprintln!("# nmax={} grid={} refine={}", a.nmax, a.grid, a.refine);
    let (_, f) = a.map.build().map_err(setup)?;
    let grid = GridSpec {
        base: a.grid,
        refine: a.refine,
    };
    let records = growth_sequence(&f, a.nmax, grid).map_err(setup)?;
    let mut w = sink(&a.out)?;
    writeln!(w, "n,log_gamma,log_sup,log_inf,arg_sup,arg_inf").map_err(io_err)?;
    for r in &records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n,
            csv_float(r.log_gamma),
            csv_float(r.log_sup),
            csv_float(r.log_inf),
            csv_float(r.arg_sup),
            csv_float(r.arg_inf)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn bounds_cmd(a: BoundsArgs) -> Result<(), Setup> {
    eprintln!(
        "# theorem={} modulus={} constants={} n_list={:?}",
        a.theorem, a.modulus, a.constants, a.n_list
    );
    let theorem: Theorem = a.theorem.parse().map_err(setup)?;
    let m = Modulus::parse(&a.modulus).map_err(setup)?;
    let constants = BoundSpec::parse_constants(&a.constants).map_err(setup)?;
    let spec = BoundSpec::new(theorem, m, constants).map_err(setup)?;
    let mut w = sink(&a.out)?;
    writeln!(w, "n,bound_value").map_err(io_err)?;
    for &n in &a.n_list {
        let v = if theorem.is_lower() {
            lower_bound(&spec, n)
        } else {
            upper_bound(&spec, n)
        }
        .map_err(setup)?;
        writeln!(w, "{n},{}", csv_float(v)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn load(path: &Path) -> Result<Vec<Scenario>, Setup> {
    Scenario::from_path(path)
        .with_context(|| format!("reading scenario {}", path.display()))
        .map_err(setup)
}

fn run_scenario(s: &Scenario) -> Result<ScenarioReport, Setup> {
    eprintln!(
        "# scenario={} config_sha256={} diffeo={} modulus={} n_max={} grid={} refine={} checks=[{}]",
        s.name,
        s.config_hash,
        s.diffeo.kind,
        s.modulus.kind,
        s.growth.n_max,
        s.growth.grid.base,
        s.growth.grid.refine,
        s.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
    );
    lab::run(s)
        .with_context(|| format!("scenario {}", s.name))
        .map_err(setup)
}

fn verify_cmd(a: VerifyArgs) -> Result<bool, Setup> {
    let scenarios = load(&a.config)?;
    let mut all_pass = true;
    let mut text = String::new();
    let mut csv = String::new();
    for s in &scenarios {
        let report = run_scenario(s)?;
        all_pass &= report.passed();
        text.push_str(&report.to_text());
        let records = report.records_csv();
        if csv.is_empty() {
            csv.push_str(&records);
        } else {
            csv.extend(records.lines().skip(1).map(|l| format!("{l}\n")));
        }
    }
    // scenario files without sweeps yield one scenario; its output block applies
    let output = &scenarios[0].output;
    match (&output.path, output.format) {
        (Some(p), OutputFormat::Text) => write_file(p, &text)?,
        (Some(p), OutputFormat::Csv) => write_file(p, &csv)?,
        (None, OutputFormat::Csv) => print!("{csv}"),
        (None, OutputFormat::Text) => print!("{text}"),
    }
    if let Some(p) = &a.records {
        write_file(p, &csv)?;
    }
    Ok(all_pass)
}

fn write_file(p: &Path, content: &str) -> Result<(), Setup> {
    std::fs::write(p, content)
        .with_context(|| format!("writing {}", p.display()))
        .map_err(setup)
}

fn sweep_cmd(a: SweepArgs) -> Result<bool, Setup> {
    let scenarios = load(&a.config)?;
    let mut w = sink(&a.out)?;
    writeln!(w, "scenario,check,verdict,value,target,tolerance,window").map_err(io_err)?;
    let mut all_pass = true;
    for s in &scenarios {
        let report = run_scenario(s)?;
        all_pass &= report.passed();
        for line in report.records_csv().lines().skip(1) {
            writeln!(w, "\"{}\",{line}", s.name.replace('"', "\"\"")).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(all_pass)
}

fn describe_cmd(a: DescribeArgs) -> Result<(), Setup> {
    a.map.echo();
    eprintln!("# samples={}", a.samples);
    if a.samples < 2 {
        return Err(setup(anyhow!("--samples must be at least 2")));
    }
    let (_, f) = a.map.build().map_err(setup)?;
    let mut w = sink(&a.out)?;
    writeln!(w, "x,f,fprime").map_err(io_err)?;
    for x in lin_space(0.0, 1.0, a.samples) {
        let (v, d) = f.eval_with_deriv(x);
        writeln!(w, "{},{},{}", csv_float(x), csv_float(v), csv_float(d)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
