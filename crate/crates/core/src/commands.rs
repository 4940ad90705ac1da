//! Command implementations behind the CLI binary: degrade, super-resolve,
//! evaluate, and EPI export. Each takes plain paths and returns a library
//! error; the binary maps errors to a nonzero exit status.

use crate::config::RunConfig;
use crate::dataset::{load_lightfield, save_gray_image, save_lightfield};
use crate::degrade::degrade_lightfield;
use crate::error::{Error, Result};
use crate::lightfield::{extract_epi, ColorLightField, LightField};
use crate::pipeline::super_resolve_color;
use crate::solver::WarpVariant;
use ndarray::Array2;
use std::io::Write;
use std::path::Path;

/// Peak-signal-to-noise ratio in dB on [0, 1] intensities (peak 1.0) after
/// cropping `crop` pixels from every side; zero MSE gives +inf.
pub fn psnr(a: &Array2<f64>, b: &Array2<f64>, crop: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Domain(format!(
            "image shapes differ: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let (nr, nc) = a.dim();
    if 2 * crop >= nr || 2 * crop >= nc {
        return Err(Error::Config(format!(
            "crop {crop} leaves no pixels of a {nr}x{nc} image"
        )));
    }
    let mut acc = 0.0;
    for x in crop..nr - crop {
        for y in crop..nc - crop {
            let d = a[[x, y]] - b[[x, y]];
            acc += d * d;
        }
    }
    let mse = acc / ((nr - 2 * crop) * (nc - 2 * crop)) as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-10.0 * mse.log10())
    }
}

fn luma_of(field: &ColorLightField) -> LightField {
    field.to_luma_chroma().0
}

/// Per-view PSNR summary; mean and variance are over all views
/// (population variance).
#[derive(Debug, Clone)]
pub struct EvalSummary {
    /// (s, t, psnr) in linear view order.
    pub per_view: Vec<(usize, usize, f64)>,
    pub mean: f64,
    pub variance: f64,
}

fn format_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.4}")
    }
}

/// Downscales every view (all channels) by block averaging and writes the
/// result at the source bit depth.
pub fn cmd_degrade(in_dir: &Path, out_dir: &Path, alpha: usize) -> Result<()> {
    let loaded = load_lightfield(in_dir)?;
    let channels = loaded
        .field
        .channels()
        .iter()
        .map(|c| degrade_lightfield(c, alpha))
        .collect::<Result<Vec<_>>>()?;
    let degraded = ColorLightField::new(channels)?;
    save_lightfield(out_dir, &degraded, loaded.bit_depth)
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Orchestration(format!("{name}: {e}")))
}

/// Runs the full super-resolution pipeline on a dataset directory and
/// writes the reconstruction plus a `solve_report.txt` with per-tile
/// solver traces.
pub fn cmd_sr(
    in_dir: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
    variant_override: Option<WarpVariant>,
) -> Result<()> {
    stage("config", cfg.validate())?;
    let loaded = stage("load", load_lightfield(in_dir))?;
    let variant = variant_override.unwrap_or(cfg.variant);
    let (sr, reports) = stage(
        "solve",
        super_resolve_color(
            &loaded.field,
            cfg.alpha,
            &cfg.solver_config(),
            &cfg.graph_params(),
            variant,
            cfg.effective_tile_side(),
            cfg.tile_overlap,
        ),
    )?;
    stage("save", save_lightfield(out_dir, &sr, loaded.bit_depth))?;
    let mut text = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        writeln!(&mut text, "solve {i}").expect("vec write");
        report.write_table(&mut text).expect("vec write");
        writeln!(&mut text).expect("vec write");
    }
    let path = out_dir.join("solve_report.txt");
    stage(
        "save",
        std::fs::write(&path, text).map_err(|source| Error::Io { path, source }),
    )
}

/// Per-view luma PSNR of a reconstruction against ground truth, cropping
/// `crop` pixels from every view border. Writes CSV rows `s,t,psnr` and a
/// trailing row `mean,variance,<mean>,<variance>`.
pub fn cmd_eval<W: Write>(
    recon_dir: &Path,
    gt_dir: &Path,
    crop: usize,
    out: &mut W,
) -> Result<EvalSummary> {
    let recon = luma_of(&load_lightfield(recon_dir)?.field);
    let gt = luma_of(&load_lightfield(gt_dir)?.field);
    if recon.m() != gt.m() || recon.view_shape() != gt.view_shape() {
        return Err(Error::Domain(format!(
            "reconstruction is {}x{} views of {:?}, ground truth {}x{} of {:?}",
            recon.m(),
            recon.m(),
            recon.view_shape(),
            gt.m(),
            gt.m(),
            gt.view_shape()
        )));
    }
    let m = recon.m();
    let mut per_view = Vec::with_capacity(m * m);
    for t in 1..=m {
        for s in 1..=m {
            let k0 = (t - 1) * m + s - 1;
            let p = psnr(&recon.views()[k0], &gt.views()[k0], crop)?;
            per_view.push((s, t, p));
        }
    }
    let n = per_view.len() as f64;
    let mean = per_view.iter().map(|&(_, _, p)| p).sum::<f64>() / n;
    let variance = per_view
        .iter()
        .map(|&(_, _, p)| (p - mean) * (p - mean))
        .sum::<f64>()
        / n;
    writeln!(out, "s,t,psnr").map_err(io_err)?;
    for &(s, t, p) in &per_view {
        writeln!(out, "{s},{t},{}", format_psnr(p)).map_err(io_err)?;
    }
    writeln!(
        out,
        "mean,variance,{},{}",
        format_psnr(mean),
        format_psnr(variance)
    )
    .map_err(io_err)?;
    Ok(EvalSummary {
        per_view,
        mean,
        variance,
    })
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: "<output stream>".into(),
        source,
    }
}

/// Exports the horizontal EPI at angular row `s`, spatial row `x`
/// (both 1-based) as an 8-bit grayscale PNG.
pub fn cmd_epi(in_dir: &Path, s: usize, x: usize, out_path: &Path) -> Result<()> {
    let loaded = load_lightfield(in_dir)?;
    let luma = luma_of(&loaded.field);
    let epi = extract_epi(&luma, s, x)?;
    save_gray_image(out_path, &epi.data)
}
