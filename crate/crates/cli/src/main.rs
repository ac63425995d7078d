mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::RenderArgs;
use crate::config::SceneConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "smoothrast", version, about = "Smooth differentiable rasterizer and mesh optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the scene-driven commands. Flags override the config file.
#[derive(Args)]
struct Common {
    /// JSON scene config; defaults apply to anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for gradcheck probe selection; also part of the run directory name.
    #[arg(long)]
    seed: Option<u64>,
    /// Parent of the per-run directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Edge steepness s.
    #[arg(long)]
    s: Option<f64>,
    /// Opacity o.
    #[arg(long)]
    o: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Render one image per configured camera.
    Render {
        #[command(flatten)]
        common: Common,
        /// Output image path(s): one per camera, or one template.
        #[arg(long, num_args = 1..)]
        out: Vec<PathBuf>,
        /// Grid of renders, e.g. `--sweep s=5,25,100 o=5,25`.
        #[arg(long, num_args = 2, value_names = ["S_LIST", "O_LIST"])]
        sweep: Option<Vec<String>>,
    },
    /// Fit shape parameters to target images.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Directory with one PGM, PNG or raw image per camera, matched in file-name order.
        #[arg(long)]
        targets: PathBuf,
        /// Adam iterations.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Compare reverse-mode and finite-difference gradients of the render.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        /// Random (vertex, coordinate) probes on the configured mesh.
        #[arg(long)]
        probes: Option<usize>,
        /// Central-difference step.
        #[arg(long)]
        step: Option<f64>,
        /// Largest accepted relative error; exit code 5 above it.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Write an icosphere OBJ.
    MakeSphere {
        /// Subdivision level: 12 vertices at 0, 162 at 2.
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<(SceneConfig, PathBuf), CliError> {
    let (mut cfg, dir) = match &common.config {
        Some(p) => (
            SceneConfig::load(p)?,
            p.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
        ),
        None => (SceneConfig::default(), PathBuf::from(".")),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(d) = &common.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = common.s {
        cfg.render.s = s;
    }
    if let Some(o) = common.o {
        cfg.render.o = o;
    }
    Ok((cfg, dir))
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| CliError::config(format!("sweep value `{v}`: {e}"))))
        .collect()
}

fn parse_sweep(items: &[String]) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let (mut s, mut o) = (None, None);
    for it in items {
        match it.split_once('=') {
            Some(("s", v)) => s = Some(parse_list(v)?),
            Some(("o", v)) => o = Some(parse_list(v)?),
            _ => return Err(CliError::config(format!("sweep item `{it}` must be s=… or o=…"))),
        }
    }
    match (s, o) {
        (Some(s), Some(o)) => Ok((s, o)),
        _ => Err(CliError::config("--sweep needs both s=… and o=…")),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SMOOTHRAST_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("SMOOTHRAST_THREADS=`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Render { common, out, sweep } => {
            let (cfg, dir) = load(&common)?;
            let sweep = sweep.as_deref().map(parse_sweep).transpose()?;
            commands::render(&cfg, &dir, &RenderArgs { out, sweep })
        }
        Command::Optimize { common, targets, iters } => {
            let (mut cfg, dir) = load(&common)?;
            if let Some(n) = iters {
                cfg.adam.max_iterations = n;
            }
            commands::optimize_cmd(&cfg, &dir, &targets)
        }
        Command::Gradcheck {
            common,
            probes,
            step,
            threshold,
        } => {
            let (mut cfg, dir) = load(&common)?;
            if let Some(p) = probes {
                cfg.gradcheck.probes = p;
            }
            if let Some(h) = step {
                cfg.gradcheck.step = h;
            }
            if let Some(t) = threshold {
                cfg.gradcheck.threshold = t;
            }
            commands::gradcheck(&cfg, &dir)
        }
        Command::MakeSphere { level, out } => commands::make_sphere(level, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
