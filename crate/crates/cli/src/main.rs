mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ConfigFile;
use porevoice::imageio::write_stack;
use porevoice::metrics::{Axis, DEFAULT_GRID_SPACING};
use porevoice::pipeline::{
    analyze_2d, analyze_3d, compare, preprocess, sonify_corpus, Analyze3dConfig, CompareConfig, Mode,
    PreprocessConfig, DEFAULT_CROP, DEFAULT_PATTERN, DEFAULT_SIDE, DEFAULT_VOXEL_SIZE_UM,
};
use porevoice::selftest::{run_selftest, summary, SelftestScale, DEFAULT_SEED};
use porevoice::sonify::SynthConfig;
use porevoice::stats::{format_sig, write_csv};
use porevoice::synthetic::{
    channel_preset, gen_channel, gen_sphere_pack, random_sphere_pack, textured_slice, ChannelShape,
};

const THREADS_ENV: &str = "POREVOICE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "porevoice", version, about = "Pore architecture analysis and luminance sonification of slice stacks")]
struct Cli {
    /// key = value file supplying defaults for any long flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crop slices and emit a downsampled or tiled image corpus
    Preprocess(PreprocessArgs),
    /// Render one WAV per corpus image
    Sonify(SonifyArgs),
    /// Per-slice 2D statistics of a corpus, or 3D pore network statistics of a stack
    Analyze(AnalyzeArgs),
    /// Compare a generated corpus against the original
    Compare(CompareArgs),
    /// Run the synthetic ground-truth checks
    Selftest(SelftestArgs),
    /// Write synthetic volumes with known geometry
    Gen(GenArgs),
}

#[derive(Args, Debug, Default)]
struct IoArgs {
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Glob selecting slice files
    #[arg(long)]
    pattern: Option<String>,
    /// Replace existing output files
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    #[command(flatten)]
    io: IoArgs,
    /// downsample or tile
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Output side (downsample) or tile side (tile)
    #[arg(long, visible_alias = "target-side")]
    tile_side: Option<usize>,
    /// Side of the centred crop applied first
    #[arg(long)]
    crop: Option<usize>,
}

#[derive(Args, Debug)]
struct SonifyArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    sample_rate: Option<u32>,
    /// Seconds per clip
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    f_min: Option<f64>,
    #[arg(long)]
    f_max: Option<f64>,
    #[arg(long)]
    gain: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    which: Which,
    #[command(flatten)]
    io: IoArgs,
    /// Voxel (3d) or pixel (2d) edge length in micrometres
    #[arg(long)]
    voxel_size: Option<f64>,
    /// Flow axis for tortuosity (3d)
    #[arg(long, value_parser = parse_axis)]
    axis: Option<Axis>,
    /// Spacing of the start/finish grid in voxels (3d)
    #[arg(long)]
    grid_spacing: Option<usize>,
    /// Also write the pore mask and labels as images (3d)
    #[arg(long)]
    dump: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Generated corpus, keyed like the original in --input
    #[arg(long, value_name = "DIR")]
    generated: Option<PathBuf>,
    /// Per-pair MSE CSV (columns key, mse) to use instead of recomputing
    #[arg(long, value_name = "CSV")]
    external_mse: Option<PathBuf>,
    #[arg(long)]
    voxel_size: Option<f64>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Use an 8-slice corpus instead of the full 478 slices
    #[arg(long)]
    quick: bool,
    /// Keep corpus files in DIR instead of a temporary directory
    #[arg(long, value_name = "DIR")]
    work: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Non-touching spheres in a cube, with a truth table
    Spheres {
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        side: usize,
        #[arg(long, default_value_t = 3.0)]
        radius_min: f64,
        #[arg(long, default_value_t = 8.0)]
        radius_max: f64,
        /// Smallest surface-to-surface distance
        #[arg(long, default_value_t = 2.0)]
        gap: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Straight, right-angle or U-shaped beaded channel
    Channel {
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        /// straight, l or u
        #[arg(long, value_parser = parse_shape, default_value = "straight")]
        shape: ChannelShape,
    },
    /// Textured slices for exercising the corpus stages
    Stack {
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        #[arg(long, default_value_t = 478)]
        slices: usize,
        #[arg(long, default_value_t = 280)]
        side: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: porevoice::Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: porevoice::Error| e.to_string())
}

fn parse_shape(s: &str) -> Result<ChannelShape, String> {
    s.parse().map_err(|e: porevoice::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<porevoice::Error> for Failure {
    fn from(e: porevoice::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Config lookups fail as usage errors.
fn usage<T>(r: Result<T, String>) -> CliResult<T> {
    r.map_err(Failure::Usage)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => usage(ConfigFile::load(path))?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&cfg, a),
        Command::Sonify(a) => cmd_sonify(&cfg, a),
        Command::Analyze(a) => cmd_analyze(&cfg, a),
        Command::Compare(a) => cmd_compare(&cfg, a),
        Command::Selftest(a) => cmd_selftest(a),
        Command::Gen(a) => cmd_gen(a.kind),
    }
    .map(|()| ExitCode::SUCCESS)
    .or_else(|f| match f {
        // Selftest failures are reported in the summary, not as errors.
        Failure::Runtime(e) if e.downcast_ref::<SelftestFailed>().is_some() => Ok(ExitCode::from(1)),
        other => Err(other),
    })
}

struct ResolvedIo {
    input: PathBuf,
    output: PathBuf,
    pattern: String,
    overwrite: bool,
}

fn resolve_io(cfg: &ConfigFile, io: IoArgs) -> CliResult<ResolvedIo> {
    Ok(ResolvedIo {
        input: usage(cfg.require(io.input, "input"))?,
        output: usage(cfg.require(io.output, "output"))?,
        pattern: usage(cfg.pick_or(io.pattern, "pattern", DEFAULT_PATTERN.to_string()))?,
        overwrite: usage(cfg.switch(io.overwrite, "overwrite"))?,
    })
}

fn cmd_preprocess(cfg: &ConfigFile, a: PreprocessArgs) -> CliResult<()> {
    let io = resolve_io(cfg, a.io)?;
    let mode = usage(cfg.pick_or(a.mode, "mode", Mode::Downsample))?;
    let pc = PreprocessConfig {
        side: usage(cfg.pick_or(a.tile_side, "tile-side", DEFAULT_SIDE))?,
        crop: usage(cfg.pick_or(a.crop, "crop", DEFAULT_CROP))?,
        pattern: io.pattern,
        overwrite: io.overwrite,
        ..PreprocessConfig::new(&io.input, &io.output, mode)
    };
    let manifest = preprocess(&pc).with_context(|| format!("preprocessing {}", io.input.display()))?;
    println!("{mode}: wrote {} images to {}", manifest.len(), io.output.display());
    Ok(())
}

fn cmd_sonify(cfg: &ConfigFile, a: SonifyArgs) -> CliResult<()> {
    let io = resolve_io(cfg, a.io)?;
    let d = SynthConfig::default();
    let synth = SynthConfig {
        sample_rate_hz: usage(cfg.pick_or(a.sample_rate, "sample-rate", d.sample_rate_hz))?,
        duration_s: usage(cfg.pick_or(a.duration, "duration", d.duration_s))?,
        f_min_hz: usage(cfg.pick_or(a.f_min, "f-min", d.f_min_hz))?,
        f_max_hz: usage(cfg.pick_or(a.f_max, "f-max", d.f_max_hz))?,
        global_gain: usage(cfg.pick_or(a.gain, "gain", d.global_gain))?,
    };
    if let Err(e) = synth.validate() {
        return Err(Failure::Usage(e.to_string()));
    }
    let manifest = sonify_corpus(&io.input, &io.output, &synth, io.overwrite)
        .with_context(|| format!("sonifying {}", io.input.display()))?;
    println!("wrote {} wavs to {}", manifest.len(), io.output.display());
    Ok(())
}

fn cmd_analyze(cfg: &ConfigFile, a: AnalyzeArgs) -> CliResult<()> {
    let io = resolve_io(cfg, a.io)?;
    let voxel = usage(cfg.pick_or(a.voxel_size, "voxel-size", DEFAULT_VOXEL_SIZE_UM))?;
    if !(voxel > 0.0 && voxel.is_finite()) {
        return Err(Failure::Usage(format!("voxel size must be positive, got {voxel}")));
    }
    match a.which {
        Which::TwoD => {
            let rows = analyze_2d(&io.input, &io.pattern, voxel, &io.output)
                .with_context(|| format!("analysing {}", io.input.display()))?;
            println!("2d: analysed {} slices into {}", rows.len(), io.output.display());
        }
        Which::ThreeD => {
            let ac = Analyze3dConfig {
                pattern: io.pattern,
                voxel_size_um: voxel,
                axis: usage(cfg.pick_or(a.axis, "axis", Axis::Z))?,
                grid_spacing: usage(cfg.pick_or(a.grid_spacing, "grid-spacing", DEFAULT_GRID_SPACING))?,
                dump: a.dump,
                ..Analyze3dConfig::new(&io.input, &io.output)
            };
            if ac.grid_spacing == 0 {
                return Err(Failure::Usage("grid spacing must be at least 1".into()));
            }
            let s = analyze_3d(&ac).with_context(|| format!("analysing {}", io.input.display()))?;
            println!(
                "3d: threshold {}, porosity {}, {} pores, {} connections, {} tortuosity values into {}",
                s.threshold.level,
                format_sig(s.porosity),
                s.network.pores().len(),
                s.network.edges().len(),
                s.tortuosity.tau_values.len(),
                io.output.display()
            );
        }
    }
    Ok(())
}

fn cmd_compare(cfg: &ConfigFile, a: CompareArgs) -> CliResult<()> {
    let io = resolve_io(cfg, a.io)?;
    let cc = CompareConfig {
        pattern: io.pattern,
        pixel_size: usage(cfg.pick_or(a.voxel_size, "voxel-size", DEFAULT_VOXEL_SIZE_UM))?,
        external_mse: usage(cfg.pick(a.external_mse, "external-mse"))?,
        ..CompareConfig::new(&io.input, usage(cfg.require(a.generated, "generated"))?, &io.output)
    };
    let r = compare(&cc).context("comparing corpora")?;
    println!("compared {} pairs, mean mse {:.4}, report in {}", r.keys.len(), r.mean_mse, io.output.display());
    Ok(())
}

#[derive(Debug)]
struct SelftestFailed;

impl std::fmt::Display for SelftestFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("selftest failed")
    }
}

impl std::error::Error for SelftestFailed {}

fn cmd_selftest(a: SelftestArgs) -> CliResult<()> {
    let scale = if a.quick { SelftestScale::quick() } else { SelftestScale::full() };
    let temp;
    let work: &Path = match &a.work {
        Some(dir) => dir,
        None => {
            temp = tempfile::tempdir().context("creating a work directory")?;
            temp.path()
        }
    };
    let results = run_selftest(&scale, work);
    print!("{}", summary(&results));
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Runtime(SelftestFailed.into()))
    }
}

fn cmd_gen(kind: GenKind) -> CliResult<()> {
    match kind {
        GenKind::Spheres { output, count, side, radius_min, radius_max, gap, seed } => {
            let spec = random_sphere_pack(seed, [side; 3], count, (radius_min, radius_max), gap)?;
            let (vol, truth) = gen_sphere_pack(&spec)?;
            write_stack(&vol, &output, "z")?;
            write_csv(
                &output.join("truth.csv"),
                &["sphere", "center_x", "center_y", "center_z", "radius", "voxel_count"],
                spec.spheres.iter().zip(&truth.sphere_voxels).enumerate().map(|(i, (s, n))| {
                    vec![
                        (i + 1).to_string(),
                        format_sig(s.center[0]),
                        format_sig(s.center[1]),
                        format_sig(s.center[2]),
                        format_sig(s.radius),
                        n.to_string(),
                    ]
                }),
            )?;
            println!(
                "{count} spheres in {side}^3, porosity {} (analytic {}), written to {}",
                format_sig(truth.porosity),
                format_sig(truth.analytic_porosity),
                output.display()
            );
        }
        GenKind::Channel { output, shape } => {
            let (vol, truth) = gen_channel(&channel_preset(shape))?;
            write_stack(&vol, &output, "z")?;
            println!(
                "{shape:?} channel {:?}, expected tau {}, written to {}",
                vol.dims(),
                format_sig(truth.expected_tau),
                output.display()
            );
        }
        GenKind::Stack { output, slices, side, seed } => {
            if slices == 0 || side == 0 {
                return Err(Failure::Usage("slices and side must be positive".into()));
            }
            porevoice::fsutil::ensure_dir(&output)?;
            for i in 0..slices {
                porevoice::imageio::write_png(&textured_slice(seed, i, side), &output.join(format!("z{i:04}.png")))?;
            }
            println!("{slices} slices of {side}x{side} written to {}", output.display());
        }
    }
    Ok(())
}
