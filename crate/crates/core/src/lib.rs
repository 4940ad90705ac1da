//! Light field spatial super-resolution.
//!
//! Jointly reconstructs all views of a light field at a higher spatial
//! resolution by minimizing a quadratic objective that couples per-view
//! data fidelity, inter-view warping consistency, and a graph smoothness
//! prior built from patch similarities across neighbouring views.

pub mod color;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod degrade;
pub mod error;
pub mod graph;
pub mod lightfield;
pub mod pipeline;
pub mod solver;
pub mod sparse;
pub mod synth;
pub mod warp;

pub use commands::{cmd_degrade, cmd_epi, cmd_eval, cmd_sr, psnr, EvalSummary};
pub use config::RunConfig;
pub use dataset::{load_lightfield, save_lightfield, LoadedField};
pub use degrade::{degrade_lightfield, BlurSampleOperator};
pub use error::{Error, Result};
pub use graph::{
    build_adjacency, laplacian, patch_sq_distance, GraphAdjacency, GraphParams, Laplacian,
};
pub use lightfield::{
    devectorize, extract_epi, extract_epi_vertical, linear_index, vectorize, ColorLightField, Epi,
    EpiOrientation, Layout, LightField, VectorizedLightField, ViewCoord,
};
pub use pipeline::{
    crop_lightfield, default_tile_side, merge_tiles, plan_tiles, super_resolve_color,
    super_resolve_tiled, TilingPlan,
};
pub use solver::{
    assemble, bilinear_upsample, cg_solve, objective, ppa_minimize, super_resolve,
    upsample_lightfield, CgStats, LinearOperator, QuadraticProblem, SolveReport, SolverConfig,
    SystemOperator, WarpVariant,
};
pub use sparse::CsrMatrix;
pub use warp::{
    build_warp_dr, build_warp_sq, estimate_delta, masks_from_borders, score_delta, DeltaField,
    MaskSet, WarpSet,
};
