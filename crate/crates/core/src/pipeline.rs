//! Full-light-field orchestration: tiling into sub-light-fields, per-tile
//! super-resolution, overlap merging, and color recombination.
//!
//! Large views are split into possibly overlapping tiles, each tile is
//! super-resolved as a complete M×M sub-light-field, and overlapping
//! estimates are merged by per-pixel averaging. Only luma goes through the
//! solver; chroma channels are upsampled bilinearly.

use crate::error::{Error, Result};
use crate::graph::GraphParams;
use crate::lightfield::{ColorLightField, LightField};
use crate::solver::{super_resolve, upsample_lightfield, SolveReport, SolverConfig, WarpVariant};
use ndarray::Array2;

/// Tile grid over one view: every tile has the same lo-res shape and the
/// union of tiles covers the view exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingPlan {
    pub lo_shape: (usize, usize),
    pub tile_shape: (usize, usize),
    /// Top-left corners (row, col), 0-based, sorted row-major.
    pub origins: Vec<(usize, usize)>,
    pub overlap: usize,
}

impl TilingPlan {
    pub fn n_tiles(&self) -> usize {
        self.origins.len()
    }
}

/// Default lo-res tile side per magnification factor.
pub fn default_tile_side(alpha: usize) -> usize {
    if alpha <= 2 {
        100
    } else {
        70
    }
}

fn axis_origins(dim: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    let mut pos = 0;
    while pos + size < dim {
        // Snapping the last origin to the border keeps all tiles equal-sized.
        pos = (pos + stride).min(dim - size);
        out.push(pos);
    }
    out
}

/// Plans a regular tile grid with stride tile_side − overlap; the last tile
/// per axis is snapped to the border. A tile side exceeding the view
/// collapses to a single full-view tile along that axis.
pub fn plan_tiles(
    lo_shape: (usize, usize),
    tile_side: usize,
    overlap: usize,
) -> Result<TilingPlan> {
    if tile_side < 1 {
        return Err(Error::Config("tile side must be at least 1".into()));
    }
    if overlap >= tile_side {
        return Err(Error::Config(format!(
            "tile overlap {overlap} must be smaller than the tile side {tile_side}"
        )));
    }
    if lo_shape.0 < 1 || lo_shape.1 < 1 {
        return Err(Error::Config("views must be at least 1x1".into()));
    }
    let stride = tile_side - overlap;
    let tile_shape = (tile_side.min(lo_shape.0), tile_side.min(lo_shape.1));
    let rows = axis_origins(lo_shape.0, tile_shape.0, stride);
    let cols = axis_origins(lo_shape.1, tile_shape.1, stride);
    let mut origins = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            origins.push((r, c));
        }
    }
    Ok(TilingPlan {
        lo_shape,
        tile_shape,
        origins,
        overlap,
    })
}

/// Sub-light-field: every view cropped to the same rectangle.
pub fn crop_lightfield(
    lf: &LightField,
    origin: (usize, usize),
    shape: (usize, usize),
) -> Result<LightField> {
    let (n_r, n_c) = lf.view_shape();
    if origin.0 + shape.0 > n_r || origin.1 + shape.1 > n_c {
        return Err(Error::Domain(format!(
            "crop {shape:?} at {origin:?} exceeds the {n_r}x{n_c} view"
        )));
    }
    let views = lf
        .views()
        .iter()
        .map(|v| Array2::from_shape_fn(shape, |(x, y)| v[[origin.0 + x, origin.1 + y]]))
        .collect();
    LightField::new(lf.m(), views)
}

/// Merges per-tile hi-res outputs: each hi-res pixel is the arithmetic
/// mean of all tile estimates covering it.
pub fn merge_tiles(tiles: &[LightField], plan: &TilingPlan, alpha: usize) -> Result<LightField> {
    if tiles.len() != plan.n_tiles() {
        return Err(Error::Orchestration(format!(
            "plan has {} tiles, got {} outputs",
            plan.n_tiles(),
            tiles.len()
        )));
    }
    if plan.n_tiles() == 0 {
        return Err(Error::Orchestration("empty tiling plan".into()));
    }
    let m = tiles[0].m();
    let hi_tile = (plan.tile_shape.0 * alpha, plan.tile_shape.1 * alpha);
    let hi_full = (plan.lo_shape.0 * alpha, plan.lo_shape.1 * alpha);
    for (i, t) in tiles.iter().enumerate() {
        if t.m() != m || t.view_shape() != hi_tile {
            return Err(Error::Orchestration(format!(
                "tile {i} has {}x{} views of {:?}, expected {}x{} of {hi_tile:?}",
                t.m(),
                t.m(),
                t.view_shape(),
                m,
                m
            )));
        }
    }
    let mut sums = vec![Array2::<f64>::zeros(hi_full); m * m];
    let mut counts = Array2::<f64>::zeros(hi_full);
    for (tile, &(or, oc)) in tiles.iter().zip(&plan.origins) {
        let (hr, hc) = (or * alpha, oc * alpha);
        for (sum, view) in sums.iter_mut().zip(tile.views()) {
            for x in 0..hi_tile.0 {
                for y in 0..hi_tile.1 {
                    sum[[hr + x, hc + y]] += view[[x, y]];
                }
            }
        }
        for x in 0..hi_tile.0 {
            for y in 0..hi_tile.1 {
                counts[[hr + x, hc + y]] += 1.0;
            }
        }
    }
    debug_assert!(counts.iter().all(|&c| c > 0.0), "tiles must cover the view");
    let views = sums
        .into_iter()
        .map(|mut s| {
            s.zip_mut_with(&counts, |v, &c| *v /= c);
            s
        })
        .collect();
    LightField::new(m, views)
}

/// Tiled luma super-resolution: plan, crop, solve per tile, merge. Reports
/// are returned in tile order (one per outer round per tile).
pub fn super_resolve_tiled(
    luma_lo: &LightField,
    alpha: usize,
    cfg: &SolverConfig,
    params: &GraphParams,
    variant: WarpVariant,
    tile_side: usize,
    tile_overlap: usize,
) -> Result<(LightField, Vec<SolveReport>)> {
    let plan = plan_tiles(luma_lo.view_shape(), tile_side, tile_overlap)?;
    let mut tiles = Vec::with_capacity(plan.n_tiles());
    let mut reports = Vec::new();
    for &origin in &plan.origins {
        let tile = crop_lightfield(luma_lo, origin, plan.tile_shape)?;
        let (sr, mut reps) = super_resolve(&tile, alpha, cfg, params, variant)?;
        tiles.push(sr);
        reports.append(&mut reps);
    }
    let merged = merge_tiles(&tiles, &plan, alpha)?;
    Ok((merged, reports))
}

/// Color super-resolution: luma through the tiled solver, each chroma
/// channel through per-view bilinear upsampling, recombined (and clamped)
/// at the end.
pub fn super_resolve_color(
    lf_lo: &ColorLightField,
    alpha: usize,
    cfg: &SolverConfig,
    params: &GraphParams,
    variant: WarpVariant,
    tile_side: usize,
    tile_overlap: usize,
) -> Result<(ColorLightField, Vec<SolveReport>)> {
    let (luma, chroma) = lf_lo.to_luma_chroma();
    let (luma_hi, reports) =
        super_resolve_tiled(&luma, alpha, cfg, params, variant, tile_side, tile_overlap)?;
    let chroma_hi = chroma
        .iter()
        .map(|c| upsample_lightfield(c, alpha))
        .collect::<Result<Vec<_>>>()?;
    let out = ColorLightField::from_luma_chroma(luma_hi, chroma_hi)?;
    Ok((out, reports))
}
