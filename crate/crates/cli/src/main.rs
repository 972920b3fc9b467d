//! `svslab`: batch front end for the singular-value statistics laboratory.

mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use svs_core::ensemble::{
    parse_grid, preset, with_workers, AatScale, Budget, Control, HistJob, HistStat, HistogramSpec,
    LocateOptions, PointConfig, Preset, StatFlags, SweepSpec,
};
use svs_core::models::GraphModel;
use svs_core::report::{CalibrateRequest, LocateRequest, RunDocument, RunRequest};
use svs_core::stats::{RatioFamily, ReferenceConstants};

use config::ConfigFile;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "SVSLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "svslab", version, about = "Spacing-ratio and minimum-singular-value statistics of directed random graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (default: $SVSLAB_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output files to write.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Reference constants file written by `calibrate`.
    #[arg(long, global = true)]
    refs: Option<PathBuf>,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named budget and grid preset.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Spectrum fed to the A A^T ratios: singular values or their squares.
    #[arg(long, global = true)]
    scale: Option<String>,
    /// Stem of the output file names.
    #[arg(long, global = true)]
    name: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mean ratios and lambda_min moments over a parameter grid.
    Sweep(SweepArgs),
    /// Recompute the PE and RGE reference constants.
    Calibrate(CalibrateArgs),
    /// Histograms of ratios or lambda_min at one point.
    Hist(HistArgs),
    /// Find p or rho for a target normalized ratio.
    Locate(LocateArgs),
    /// Re-execute the request stored in a run document.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: Option<String>,
    /// Graph sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// dERG grid: lin:a:b:k, log:a:b:k or a comma list.
    #[arg(long)]
    p_grid: Option<String>,
    /// dRRG grid: lin:a:b:k, log:a:b:k or a comma list.
    #[arg(long)]
    rho_grid: Option<String>,
    /// Matrices per grid point.
    #[arg(long, conflicts_with = "ratios")]
    realizations: Option<usize>,
    /// Samples per grid point; ceil(ratios / n) matrices.
    #[arg(long)]
    ratios: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Statistics: any of rR_AAT, rC_AAT, rC_A, lmin (comma separated).
    #[arg(long)]
    stats: Option<String>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct HistArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, conflicts_with_all = ["rho", "target_rbar"])]
    p: Option<f64>,
    #[arg(long, conflicts_with = "target_rbar")]
    rho: Option<f64>,
    /// Locate p or rho so that the normalized rR_AAT mean matches.
    #[arg(long)]
    target_rbar: Option<f64>,
    /// Statistics: any of rR_AAT, rC_AAT, rC_A, lmin (comma separated).
    #[arg(long)]
    stat: Option<String>,
    #[arg(long, conflicts_with = "ratios")]
    realizations: Option<usize>,
    #[arg(long)]
    ratios: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bins on [0, 1] for ratio histograms.
    #[arg(long)]
    bins: Option<usize>,
    /// Bins for lambda_min / <lambda_min>.
    #[arg(long)]
    lmin_bins: Option<usize>,
    /// Upper edge of the lambda_min / <lambda_min> range.
    #[arg(long)]
    lmin_max: Option<f64>,
    /// Tolerance of the --target-rbar search.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct LocateArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Target normalized ratio in [0, 1].
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ratio family to match.
    #[arg(long)]
    family: Option<String>,
    /// Fixed matrices per evaluation instead of adaptive sizing.
    #[arg(long)]
    realizations: Option<usize>,
    /// Search interval lo:hi.
    #[arg(long)]
    bracket: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Run document (`*.run.json`).
    document: PathBuf,
    /// Compare the recomputed results with the stored ones (tolerance 1e-12).
    #[arg(long)]
    check: bool,
}

/// Where a setting came from, for error messages.
#[derive(Clone, Copy)]
enum Origin {
    Flag(&'static str),
    Config(&'static str),
    Preset(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag(name) => write!(f, "--{name}"),
            Origin::Config(key) => write!(f, "config key '{key}'"),
            Origin::Preset(name) => write!(f, "preset '{name}'"),
        }
    }
}

/// First of flag, config value; tagged with its origin.
fn layer<T>(flag: Option<T>, config: Option<T>, name: &'static str, key: &'static str) -> Option<(T, Origin)> {
    flag.map(|v| (v, Origin::Flag(name)))
        .or_else(|| config.map(|v| (v, Origin::Config(key))))
}

fn parse_with<T, E: fmt::Display>(value: &str, origin: Origin, parse: impl FnOnce(&str) -> Result<T, E>) -> Result<T> {
    parse(value).map_err(|e| anyhow!("invalid value for {origin}: {e}"))
}

/// Settings shared by every subcommand after merging flags, config file and
/// preset.
struct Settings {
    config: ConfigFile,
    preset: Option<&'static Preset>,
    workers: usize,
    out_dir: PathBuf,
    format: Format,
    refs: ReferenceConstants,
    scale: AatScale,
    name: Option<String>,
}

impl Settings {
    fn new(global: GlobalArgs) -> Result<Self> {
        let config = match &global.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let preset = match layer(global.preset, config.preset.clone(), "preset", "preset") {
            Some((name, origin)) => Some(parse_with(&name, origin, preset)?),
            None => None,
        };
        let workers = match layer(global.workers, config.workers, "workers", "workers") {
            Some((0, origin)) => bail!("invalid value for {origin}: worker count must be at least 1"),
            Some((w, _)) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let out_dir = global
            .out_dir
            .or(config.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let format = match layer(global.format, None, "format", "format") {
            Some((f, _)) => f,
            None => match &config.format {
                Some(text) => parse_with(text, Origin::Config("format"), |s| Format::from_str(s, true))?,
                None => Format::Both,
            },
        };
        let refs = match layer(global.refs, config.refs.clone(), "refs", "refs") {
            Some((path, origin)) => load_refs(&path).with_context(|| format!("invalid value for {origin}"))?,
            None => ReferenceConstants::PUBLISHED,
        };
        let scale = match layer(global.scale, config.scale.clone(), "scale", "scale") {
            Some((text, origin)) => parse_with(&text, origin, str::parse::<AatScale>)?,
            None => AatScale::Singular,
        };
        let name = global.name.or(config.name.clone());
        Ok(Self {
            config,
            preset,
            workers,
            out_dir,
            format,
            refs,
            scale,
            name,
        })
    }

    fn model(&self, flag: Option<String>) -> Result<GraphModel> {
        let (text, origin) =
            layer(flag, self.config.model.clone(), "model", "model").ok_or_else(|| anyhow!("missing --model"))?;
        parse_with(&text, origin, str::parse::<GraphModel>)
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.config.seed).unwrap_or(1)
    }

    /// Budget from `--realizations`/`--ratios`, then the config file, then
    /// the preset, then `default`.
    fn budget(&self, realizations: Option<usize>, ratios: Option<u64>, default: Budget) -> Result<Budget> {
        let from = |r: Option<usize>, t: Option<u64>, origin: Origin| -> Result<Option<Budget>> {
            match (r, t) {
                (Some(_), Some(_)) => bail!("{origin}: give either realizations or ratios, not both"),
                (Some(0), None) => bail!("invalid value for {origin}: realizations must be at least 1"),
                (Some(r), None) => Ok(Some(Budget::Realizations(r))),
                (None, Some(0)) => bail!("invalid value for {origin}: ratios must be at least 1"),
                (None, Some(t)) => Ok(Some(Budget::Ratios(t))),
                (None, None) => Ok(None),
            }
        };
        Ok(from(realizations, ratios, Origin::Flag("realizations"))?
            .or(from(self.config.realizations, self.config.ratios, Origin::Config("realizations"))?)
            .or(self.preset.map(|p| p.budget))
            .unwrap_or(default))
    }

    fn stem(&self, default: String) -> String {
        self.name.clone().unwrap_or(default)
    }
}

fn load_refs(path: &Path) -> Result<ReferenceConstants> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let candidates = [&value, &value["constants"], &value["output"]["constants"]];
    let refs = candidates
        .iter()
        .find_map(|v| serde_json::from_value::<ReferenceConstants>((*v).clone()).ok())
        .ok_or_else(|| anyhow!("{} holds no reference constants", path.display()))?;
    refs.validate()?;
    Ok(refs)
}

fn parse_sizes(text: &str, origin: Origin) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| parse_with(s.trim(), origin, str::parse::<usize>))
        .collect()
}

fn parse_stat_list(items: &[String], origin: Origin) -> Result<Vec<HistStat>> {
    let stats: Vec<HistStat> = items
        .iter()
        .flat_map(|s| s.split(','))
        .map(|s| parse_with(s.trim(), origin, str::parse::<HistStat>))
        .collect::<Result<_>>()?;
    if stats.is_empty() {
        bail!("invalid value for {origin}: no statistic given");
    }
    Ok(stats)
}

fn flags_from(stats: &[HistStat]) -> StatFlags {
    let mut flags = StatFlags::NONE;
    for stat in stats {
        match stat.family() {
            Some(f) => flags.set(f, true),
            None => flags.min_singular = true,
        }
    }
    flags
}

fn sweep_request(ctx: &Settings, args: SweepArgs) -> Result<(RunRequest, String)> {
    let model = ctx.model(args.model)?;
    let n_list = match layer(args.n, None, "n", "n") {
        Some((text, origin)) => parse_sizes(&text, origin)?,
        None => match (ctx.config.n.clone(), ctx.preset) {
            (Some(sizes), _) => sizes.into_vec(),
            (None, Some(p)) => p.n_list.to_vec(),
            (None, None) => bail!("missing --n"),
        },
    };
    let grid_layer = match model {
        GraphModel::Derg => {
            if args.rho_grid.is_some() {
                bail!("--rho-grid does not apply to derg; use --p-grid");
            }
            layer(args.p_grid, ctx.config.p_grid.clone(), "p-grid", "p_grid")
        }
        GraphModel::Drrg => {
            if args.p_grid.is_some() {
                bail!("--p-grid does not apply to drrg; use --rho-grid");
            }
            layer(args.rho_grid, ctx.config.rho_grid.clone(), "rho-grid", "rho_grid")
        }
        GraphModel::Pe | GraphModel::Rge => {
            if args.p_grid.is_some() || args.rho_grid.is_some() {
                bail!("{model} takes no parameter grid");
            }
            None
        }
    };
    let grid_layer = grid_layer.or_else(|| {
        let p = ctx.preset?;
        Some((p.grid(model)?.to_string(), Origin::Preset(p.name)))
    });
    let param_grid = match grid_layer {
        Some((text, origin)) => {
            let grid = parse_with(&text, origin, parse_grid)?;
            for &x in &grid {
                for &n in &n_list {
                    parse_with(&text, origin, |_| model.params(n, Some(x)))?;
                }
            }
            grid
        }
        None if model.control_name().is_some() => {
            bail!("missing --{}-grid", model.control_name().unwrap_or_default())
        }
        None => Vec::new(),
    };
    let flags = match layer(args.stats.map(|s| vec![s]), ctx.config.stats.clone(), "stats", "stats") {
        Some((items, origin)) => flags_from(&parse_stat_list(&items, origin)?),
        None => ctx.preset.map(|p| p.flags).unwrap_or(StatFlags::ALL),
    };
    let spec = SweepSpec {
        model,
        n_list,
        param_grid,
        budget: ctx.budget(args.realizations, args.ratios, Budget::Realizations(100))?,
        master_seed: ctx.seed(args.seed),
        config: PointConfig {
            flags,
            scale: ctx.scale,
            refs: ctx.refs,
            histograms: None,
        },
    };
    spec.points()?;
    Ok((RunRequest::Sweep(spec), ctx.stem(format!("sweep-{model}"))))
}

fn calibrate_request(ctx: &Settings, args: CalibrateArgs) -> Result<(RunRequest, String)> {
    let n = match args.n {
        Some(n) => n,
        None => match ctx.config.n.clone() {
            Some(sizes) => match sizes.into_vec()[..] {
                [n] => n,
                _ => bail!("invalid value for config key 'n': calibrate takes a single size"),
            },
            None => 1000,
        },
    };
    if n < 3 {
        bail!("invalid value for --n: calibration needs n >= 3");
    }
    let realizations = args.realizations.or(ctx.config.realizations).unwrap_or(1000);
    if realizations < 2 {
        bail!("invalid value for --realizations: calibration needs at least 2");
    }
    let request = CalibrateRequest {
        n,
        realizations,
        seed: ctx.seed(args.seed),
        scale: ctx.scale,
    };
    Ok((RunRequest::Calibrate(request), ctx.stem(format!("constants-n{n}"))))
}

fn hist_request(ctx: &Settings, args: HistArgs) -> Result<(RunRequest, String)> {
    let model = ctx.model(args.model)?;
    let n = args
        .n
        .or_else(|| ctx.config.n.clone().and_then(|s| s.into_vec().first().copied()))
        .or_else(|| ctx.preset.and_then(|p| p.n_list.first().copied()))
        .ok_or_else(|| anyhow!("missing --n"))?;
    let explicit = match model {
        GraphModel::Derg => {
            if args.rho.is_some() {
                bail!("--rho does not apply to derg; use --p");
            }
            layer(args.p, ctx.config.p, "p", "p")
        }
        GraphModel::Drrg => {
            if args.p.is_some() {
                bail!("--p does not apply to drrg; use --rho");
            }
            layer(args.rho, ctx.config.rho, "rho", "rho")
        }
        GraphModel::Pe | GraphModel::Rge => {
            if args.p.is_some() || args.rho.is_some() || args.target_rbar.is_some() {
                bail!("{model} takes no control parameter");
            }
            None
        }
    };
    let target = layer(args.target_rbar, ctx.config.target_rbar, "target-rbar", "target_rbar");
    let control = match (explicit, target) {
        (Some((x, origin)), None) => {
            parse_with("", origin, |_| model.params(n, Some(x)))?;
            Control::Value(x)
        }
        (None, Some((t, origin))) => {
            if !(0.0..=1.0).contains(&t) {
                bail!("invalid value for {origin}: target {t} is outside [0, 1]");
            }
            Control::TargetRbar(t)
        }
        (Some(_), Some(_)) => bail!("give either an explicit parameter or --target-rbar, not both"),
        (None, None) if model.control_name().is_none() => Control::None,
        (None, None) => bail!(
            "missing --{} or --target-rbar",
            model.control_name().unwrap_or_default()
        ),
    };
    let stats = match layer(args.stat.map(|s| vec![s]), ctx.config.stats.clone(), "stat", "stats") {
        Some((items, origin)) => parse_stat_list(&items, origin)?,
        None => match ctx.preset {
            Some(p) => p.hist_stats.to_vec(),
            None => vec![HistStat::RrAat],
        },
    };
    let defaults = HistogramSpec::default();
    let bins = HistogramSpec {
        ratio_bins: args.bins.or(ctx.config.bins).unwrap_or(defaults.ratio_bins),
        lmin_bins: args.lmin_bins.or(ctx.config.lmin_bins).unwrap_or(defaults.lmin_bins),
        lmin_max: args.lmin_max.or(ctx.config.lmin_max).unwrap_or(defaults.lmin_max),
    };
    if bins.ratio_bins == 0 || bins.lmin_bins == 0 {
        bail!("invalid value for --bins: need at least one bin");
    }
    if !(bins.lmin_max.is_finite() && bins.lmin_max > 0.0) {
        bail!("invalid value for --lmin-max: must be positive");
    }
    let tolerance = args.tolerance.or(ctx.config.tolerance).unwrap_or(0.02);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        bail!("invalid value for --tolerance: must be positive");
    }
    let job = HistJob {
        model,
        n,
        control,
        budget: ctx.budget(args.realizations, args.ratios, Budget::Realizations(1000))?,
        seed: ctx.seed(args.seed),
        stats,
        bins,
        scale: ctx.scale,
        refs: ctx.refs,
        tolerance,
    };
    Ok((RunRequest::Hist(job), ctx.stem(format!("hist-{model}-n{n}"))))
}

fn locate_request(ctx: &Settings, args: LocateArgs) -> Result<(RunRequest, String)> {
    let model = ctx.model(args.model)?;
    if model.control_name().is_none() {
        bail!("invalid value for --model: {model} has no control parameter");
    }
    let n = args
        .n
        .or_else(|| ctx.config.n.clone().and_then(|s| s.into_vec().first().copied()))
        .ok_or_else(|| anyhow!("missing --n"))?;
    let (target, origin) =
        layer(args.target, ctx.config.target, "target", "target").ok_or_else(|| anyhow!("missing --target"))?;
    if !(0.0..=1.0).contains(&target) {
        bail!("invalid value for {origin}: target {target} is outside [0, 1]");
    }
    let tolerance = args.tolerance.or(ctx.config.tolerance).unwrap_or(0.02);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        bail!("invalid value for --tolerance: must be positive");
    }
    let mut options = LocateOptions {
        scale: ctx.scale,
        refs: ctx.refs,
        realizations: args.realizations.or(ctx.config.realizations),
        ..LocateOptions::default()
    };
    if let Some((text, origin)) = layer(args.family, ctx.config.family.clone(), "family", "family") {
        options.family = parse_with(&text, origin, str::parse::<RatioFamily>)?;
    }
    if let Some((text, origin)) = layer(args.bracket, ctx.config.bracket.clone(), "bracket", "bracket") {
        let bracket = parse_with(&text, origin, |s| -> Result<(f64, f64)> {
            let (lo, hi) = s.split_once(':').ok_or_else(|| anyhow!("expected lo:hi"))?;
            Ok((lo.trim().parse()?, hi.trim().parse()?))
        })?;
        options.bracket = Some(bracket);
    }
    let request = LocateRequest {
        model,
        n,
        target,
        tolerance,
        seed: ctx.seed(args.seed),
        options,
    };
    Ok((RunRequest::Locate(request), ctx.stem(format!("locate-{model}-n{n}"))))
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Settings::new(cli.global)?;
    let (request, stem, check) = match cli.command {
        Command::Sweep(args) => {
            let (r, s) = sweep_request(&ctx, args)?;
            (r, s, None)
        }
        Command::Calibrate(args) => {
            let (r, s) = calibrate_request(&ctx, args)?;
            (r, s, None)
        }
        Command::Hist(args) => {
            let (r, s) = hist_request(&ctx, args)?;
            (r, s, None)
        }
        Command::Locate(args) => {
            let (r, s) = locate_request(&ctx, args)?;
            (r, s, None)
        }
        Command::Replay(args) => {
            let file = std::fs::File::open(&args.document)
                .with_context(|| format!("cannot open {}", args.document.display()))?;
            let stored = RunDocument::read_json(std::io::BufReader::new(file))?;
            let stem = args
                .document
                .file_name()
                .and_then(|s| s.to_str())
                .map(|s| s.trim_end_matches(".json").trim_end_matches(".run"))
                .unwrap_or("run");
            let stem = ctx.stem(format!("{stem}-replay"));
            (stored.request.clone(), stem, args.check.then_some(stored))
        }
    };
    std::fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("cannot create output directory {}", ctx.out_dir.display()))?;
    let workers = ctx.workers;
    let doc = with_workers(workers, move || RunDocument::run(request, workers))??;
    output::emit(&doc, &ctx.out_dir, &stem, ctx.format)?;
    if let Some(stored) = check {
        output::compare_outputs(&stored.output, &doc.output, 1e-12)?;
        println!("replay matches the stored results to 1e-12");
    }
    output::point_errors(&doc)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
