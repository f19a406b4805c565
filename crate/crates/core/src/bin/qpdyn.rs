use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use qpdyn::basin::{default_witness, orbit_start, BasinParams, Overrides};
use qpdyn::germfile::to_json;
use qpdyn::orbit::{iterate, IterateOptions};
use qpdyn::presets::{self, Preset};
use qpdyn::report::{
    analyze, petal_params, render_analysis, render_verification, verify, write_orbit_csv, write_slice_csv, Analysis,
    AnalyzeOptions, Axis, SliceSpec, VerifyOptions,
};
use qpdyn::C64;

/// Invariants, basins and orbits of quasi-parabolic one-resonant germs.
#[derive(Parser)]
#[command(name = "qpdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the resonance, normalize, reduce and classify a germ.
    Analyze(AnalyzeArgs),
    /// Calibrate basins, check forward invariance and fit decay rates.
    Verify(VerifyArgs),
    /// Iterate the reduced germ and write the orbit as CSV.
    Orbit(OrbitArgs),
    /// Evaluate basin membership on a two-dimensional grid slice.
    Slice(SliceArgs),
    /// Write a built-in reference germ (E1, E2, E3) as a germ file.
    Example(ExampleArgs),
}

#[derive(Args, Clone)]
struct GermArgs {
    /// Germ file (JSON).
    file: PathBuf,
    /// Poincaré–Dulac normalization order (defaults to the file's order_cap).
    #[arg(long)]
    nf_order: Option<u32>,
    /// Largest |beta| enumerated when certifying one-resonance.
    #[arg(long, default_value_t = 6)]
    degree_bound: u32,
    /// Tolerance on resonance residuals.
    #[arg(long, default_value_t = 1e-9)]
    res_tol: f64,
    /// Maximum number of blow-ups when reducing to good form.
    #[arg(long, default_value_t = 16)]
    max_blowups: u32,
    /// Accept the file's alpha without enumerating resonances.
    #[arg(long)]
    assert_alpha: bool,
}

impl GermArgs {
    fn options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            nf_order: self.nf_order,
            degree_bound: self.degree_bound,
            res_tol: self.res_tol,
            max_blowups: self.max_blowups,
            assert_alpha: self.assert_alpha,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    germ: GermArgs,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    germ: GermArgs,
    /// Sampled points per petal.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Length of the long orbit used for rate fits.
    #[arg(long, default_value_t = 100_000)]
    max_iter: u64,
    /// Tolerance on the relative error of fitted exponents.
    #[arg(long, default_value_t = 0.05)]
    rate_tol: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    germ: GermArgs,
    /// Start point as comma-separated coordinates `re` or `re:im` (z first).
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Petal `t` whose default start point is used when --start is absent.
    #[arg(long, default_value_t = 1)]
    petal: u32,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u64,
    /// Keep every n-th point after the first 100 (default: about 10^4 rows).
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long, default_value_t = 10.0)]
    escape_radius: f64,
    /// Iterate the germ as given in the file rather than its reduced form.
    #[arg(long)]
    raw: bool,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    #[command(flatten)]
    germ: GermArgs,
    /// Grid size `WxH`.
    #[arg(long, default_value = "101x101")]
    grid: String,
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, default_value = "-0.5,0.5,-0.5,0.5", allow_hyphen_values = true)]
    window: String,
    /// The two varying real coordinates, e.g. `re_w1,re_w2` or `re_z,im_z`.
    #[arg(long, default_value = "re_w1,re_w2")]
    axes: String,
    /// Fixed coordinates, e.g. `z=1e-6:0,w2=0.1` (others come from the petal-1 witness).
    #[arg(long, allow_hyphen_values = true)]
    fix: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExampleArgs {
    /// E1, E2 or E3.
    name: Preset,
    #[arg(long, default_value_t = 6)]
    order_cap: u32,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Input problems (exit 1) versus failed hypotheses or checks (exit 2).
enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are input errors; --help and --version are not.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Slice(a) => cmd_slice(a),
        Command::Example(a) => cmd_example(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &GermArgs) -> anyhow::Result<Analysis> {
    let text = fs::read_to_string(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    analyze(&text, &args.options()).with_context(|| format!("analyzing {}", args.file.display()))
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<Outcome> {
    let a = load(&args.germ)?;
    emit(&render_analysis(&a), args.output.as_deref())?;
    Ok(if a.applies() { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<Outcome> {
    let a = load(&args.germ)?;
    let opts =
        VerifyOptions { samples: args.samples, seed: args.seed, max_iter: args.max_iter, rate_tol: args.rate_tol };
    if opts.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let v = verify(&a, &opts);
    emit(&render_verification(&a, &v), args.output.as_deref())?;
    Ok(if v.passed(&a) { Outcome::Ok } else { Outcome::Failed })
}

fn parse_complex(s: &str) -> anyhow::Result<C64> {
    let s = s.trim();
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().with_context(|| format!("bad real part in {s:?}"))?;
    let im: f64 = im.trim().parse().with_context(|| format!("bad imaginary part in {s:?}"))?;
    Ok(C64::new(re, im))
}

fn parse_point(s: &str, n: usize) -> anyhow::Result<Vec<C64>> {
    let p: Vec<C64> = s.split(',').map(parse_complex).collect::<anyhow::Result<_>>()?;
    if p.len() != n + 1 {
        bail!("start point has {} coordinates, expected {}", p.len(), n + 1);
    }
    Ok(p)
}

fn petals_or_fail(a: &Analysis) -> anyhow::Result<Vec<BasinParams>> {
    petal_params(a, &Overrides::default()).map_err(|e| anyhow!("no basin parameters: {e}"))
}

fn cmd_orbit(args: OrbitArgs) -> anyhow::Result<Outcome> {
    let a = load(&args.germ)?;
    let n = a.file.germ.n();
    let prof = &a.prepared.profile;
    let (k, nu, l) = (prof.k.unwrap_or(1), prof.nu.unwrap_or(2), prof.l.unwrap_or(0));
    let germ = if args.raw { &a.file.germ } else { &a.prepared.working };
    let start = match &args.start {
        Some(s) => parse_point(s, n)?,
        None => {
            if args.raw {
                bail!("--raw needs an explicit --start");
            }
            let petals = match petals_or_fail(&a) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e:#}; pass --start");
                    return Ok(Outcome::Failed);
                }
            };
            let p = petals
                .iter()
                .find(|p| p.t == args.petal)
                .ok_or_else(|| anyhow!("petal {} does not exist (k = {k})", args.petal))?;
            orbit_start(p)
        }
    };
    let mut opts = IterateOptions::with_max_iter(args.max_iter);
    opts.escape_radius = args.escape_radius;
    if let Some(s) = args.stride {
        opts.thin_stride = s.max(1);
    }
    let trace = iterate(germ, &start, &a.file.alpha, k, nu, l, &opts)?;
    let mut out = open_out(args.csv.as_deref())?;
    write_orbit_csv(&trace, &mut out)?;
    out.flush()?;
    Ok(Outcome::Ok)
}

fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X', '×']).ok_or_else(|| anyhow!("grid {s:?} must look like 101x101"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn parse_window(s: &str) -> anyhow::Result<(f64, f64, f64, f64)> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] => Ok((a, b, c, d)),
        _ => bail!("window {s:?} needs four numbers x_min,x_max,y_min,y_max"),
    }
}

fn cmd_slice(args: SliceArgs) -> anyhow::Result<Outcome> {
    let a = load(&args.germ)?;
    let n = a.file.germ.n();
    let petals = match petals_or_fail(&a) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(Outcome::Failed);
        }
    };
    let mut base = default_witness(&petals[0]);
    if let Some(fix) = &args.fix {
        for item in fix.split(',') {
            let (name, value) =
                item.split_once('=').ok_or_else(|| anyhow!("fix item {item:?} must look like w1=0.1:0"))?;
            let v = if name.trim() == "z" {
                0
            } else {
                match name.trim().strip_prefix('w').and_then(|j| j.parse::<usize>().ok()) {
                    Some(j) if (1..=n).contains(&j) => j,
                    _ => bail!("fix item {item:?} names no coordinate"),
                }
            };
            base[v] = parse_complex(value)?;
        }
    }
    let (ax, ay) =
        args.axes.split_once(',').ok_or_else(|| anyhow!("axes {:?} must name two coordinates", args.axes))?;
    let spec = SliceSpec {
        base,
        x_axis: Axis::parse(ax.trim(), n)?,
        y_axis: Axis::parse(ay.trim(), n)?,
        grid: parse_grid(&args.grid)?,
        window: parse_window(&args.window)?,
    };
    let mut out = open_out(args.csv.as_deref())?;
    write_slice_csv(&spec, &petals, &mut out)?;
    out.flush()?;
    Ok(Outcome::Ok)
}

fn cmd_example(args: ExampleArgs) -> anyhow::Result<Outcome> {
    let min_cap = if args.name == Preset::E3 { 5 } else { 3 };
    if args.order_cap < min_cap {
        bail!("{} needs --order-cap of at least {min_cap}", args.name);
    }
    let f = presets::build(args.name, args.order_cap);
    emit(&to_json(&f.germ, &f.alpha), args.output.as_deref())?;
    Ok(Outcome::Ok)
}
