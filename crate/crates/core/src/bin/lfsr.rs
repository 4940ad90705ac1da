use clap::{Parser, Subcommand};
use lfsr::commands::{cmd_degrade, cmd_epi, cmd_eval, cmd_sr};
use lfsr::config::RunConfig;
use lfsr::solver::WarpVariant;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lfsr", version, about = "Light field spatial super-resolution")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Downscale every view by block averaging
    Degrade {
        /// Input dataset directory (view_SS_TT.png files)
        #[arg(long = "in")]
        in_dir: PathBuf,
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
        /// Downscaling factor; view dimensions must be divisible by it
        #[arg(long)]
        alpha: usize,
    },
    /// Jointly super-resolve all views of a dataset
    Sr {
        /// Input dataset directory
        #[arg(long = "in")]
        in_dir: PathBuf,
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
        /// Run configuration file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Override the configured warp construction (sq|dr)
        #[arg(long)]
        variant: Option<String>,
    },
    /// Per-view PSNR of a reconstruction against ground truth (CSV on stdout)
    Eval {
        /// Reconstruction dataset directory
        #[arg(long)]
        recon: PathBuf,
        /// Ground-truth dataset directory
        #[arg(long)]
        gt: PathBuf,
        /// Pixels cropped from every view border before comparison
        #[arg(long, default_value_t = 15)]
        crop: usize,
    },
    /// Export one horizontal epipolar image as a PNG
    Epi {
        /// Input dataset directory
        #[arg(long = "in")]
        in_dir: PathBuf,
        /// Angular row of the slice, 1-based
        #[arg(long)]
        s: usize,
        /// Spatial row of the slice, 1-based
        #[arg(long)]
        x: usize,
        /// Output PNG path
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cmd: Cmd) -> lfsr::Result<()> {
    match cmd {
        Cmd::Degrade { in_dir, out, alpha } => cmd_degrade(&in_dir, &out, alpha),
        Cmd::Sr {
            in_dir,
            out,
            config,
            variant,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let variant = variant.map(|v| v.parse::<WarpVariant>()).transpose()?;
            cmd_sr(&in_dir, &out, &cfg, variant)
        }
        Cmd::Eval { recon, gt, crop } => {
            let mut stdout = std::io::stdout().lock();
            cmd_eval(&recon, &gt, crop, &mut stdout).map(|_| ())
        }
        Cmd::Epi { in_dir, s, x, out } => cmd_epi(&in_dir, s, x, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
