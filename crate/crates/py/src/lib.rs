//! Python bindings for the lfsr library.
//!
//! A `LightField` holds an M×M grid of views and converts to and from
//! numpy arrays of shape (M, M, rows, cols) for grayscale fields or
//! (M, M, rows, cols, 3) for RGB, axes ordered (s, t, row, col).

use std::path::PathBuf;

use numpy::ndarray::{Array2, ArrayD, ArrayViewD, IxDyn};
use numpy::{IntoPyArray, PyArray2, PyArrayDyn, PyReadonlyArrayDyn};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lfsr::commands;
use lfsr::config::RunConfig;
use lfsr::dataset::{load_lightfield, save_lightfield};
use lfsr::degrade::degrade_lightfield;
use lfsr::lightfield::{extract_epi, ColorLightField, LightField as CoreField};
use lfsr::pipeline::super_resolve_color;
use lfsr::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        Error::Orchestration(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn field_from_array(a: ArrayViewD<'_, f64>) -> PyResult<ColorLightField> {
    let shape = a.shape();
    let channels = match shape {
        [_, _, _, _] => 1,
        [_, _, _, _, 3] => 3,
        _ => {
            return Err(PyValueError::new_err(format!(
                "expected array of shape (m, m, rows, cols) or (m, m, rows, cols, 3), got {shape:?}"
            )))
        }
    };
    let (m, n_r, n_c) = (shape[0], shape[2], shape[3]);
    if shape[1] != m {
        return Err(PyValueError::new_err(format!(
            "angular grid must be square, got {}x{}",
            m, shape[1]
        )));
    }
    if m == 0 || n_r == 0 || n_c == 0 {
        return Err(PyValueError::new_err("array has an empty axis"));
    }
    let fields = (0..channels)
        .map(|c| {
            CoreField::from_fn(m, n_r, n_c, |s0, t0, x0, y0| {
                if channels == 1 {
                    a[IxDyn(&[s0, t0, x0, y0])]
                } else {
                    a[IxDyn(&[s0, t0, x0, y0, c])]
                }
            })
        })
        .collect();
    ColorLightField::new(fields).map_err(to_py_err)
}

fn field_to_array(f: &ColorLightField) -> ArrayD<f64> {
    let m = f.m();
    let (n_r, n_c) = f.view_shape();
    let channels = f.channels();
    let shape: Vec<usize> = if f.is_gray() {
        vec![m, m, n_r, n_c]
    } else {
        vec![m, m, n_r, n_c, channels.len()]
    };
    ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
        let (s0, t0, x0, y0) = (ix[0], ix[1], ix[2], ix[3]);
        let c = if f.is_gray() { 0 } else { ix[4] };
        channels[c].views()[t0 * m + s0][[x0, y0]]
    })
}

/// An M×M grid of views with 1 (grayscale) or 3 (RGB) channels.
#[pyclass]
#[derive(Clone)]
struct LightField {
    inner: ColorLightField,
    /// PNG bit depth used by `save` when none is given; arrays default to 16.
    #[pyo3(get)]
    bit_depth: u8,
}

#[pymethods]
impl LightField {
    /// Wraps a float64 array with intensities in [0, 1].
    #[new]
    fn new(array: PyReadonlyArrayDyn<'_, f64>) -> PyResult<Self> {
        Ok(LightField {
            inner: field_from_array(array.as_array())?,
            bit_depth: 16,
        })
    }

    /// Loads `view_SS_TT.png` files (with optional `lightfield.cfg`) from a directory.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let loaded = load_lightfield(&path).map_err(to_py_err)?;
        Ok(LightField {
            inner: loaded.field,
            bit_depth: loaded.bit_depth,
        })
    }

    /// Writes the views as PNG files plus a `lightfield.cfg` sidecar.
    #[pyo3(signature = (path, bit_depth=None))]
    fn save(&self, path: PathBuf, bit_depth: Option<u8>) -> PyResult<()> {
        save_lightfield(&path, &self.inner, bit_depth.unwrap_or(self.bit_depth)).map_err(to_py_err)
    }

    fn to_array<'py>(&self, py: Python<'py>) -> Bound<'py, PyArrayDyn<f64>> {
        field_to_array(&self.inner).into_pyarray(py)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn view_shape(&self) -> (usize, usize) {
        self.inner.view_shape()
    }

    #[getter]
    fn n_channels(&self) -> usize {
        self.inner.n_channels()
    }

    fn __repr__(&self) -> String {
        let (n_r, n_c) = self.inner.view_shape();
        format!(
            "LightField(m={}, view_shape=({}, {}), n_channels={})",
            self.inner.m(),
            n_r,
            n_c,
            self.inner.n_channels()
        )
    }
}

/// Block-averages and subsamples every view by `alpha`.
#[pyfunction]
fn degrade(field: &LightField, alpha: usize) -> PyResult<LightField> {
    let channels = field
        .inner
        .channels()
        .iter()
        .map(|ch| degrade_lightfield(ch, alpha))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py_err)?;
    Ok(LightField {
        inner: ColorLightField::new(channels).map_err(to_py_err)?,
        bit_depth: field.bit_depth,
    })
}

/// Jointly super-resolves all views by `alpha`.
///
/// Tunables default to the standard operating point; `variant` selects the
/// warp construction ("sq" or "dr"). RGB fields are processed in luma with
/// bilinearly upsampled chroma.
#[pyfunction]
#[pyo3(signature = (field, alpha, *, variant=None, lambda2=None, lambda3=None, beta=None,
    window=None, patch_side=None, sigma=None, outer_iters=None, ppa_iters=None,
    cg_tol=None, tile_side=None, tile_overlap=None))]
#[allow(clippy::too_many_arguments)]
fn super_resolve(
    py: Python<'_>,
    field: &LightField,
    alpha: usize,
    variant: Option<&str>,
    lambda2: Option<f64>,
    lambda3: Option<f64>,
    beta: Option<f64>,
    window: Option<usize>,
    patch_side: Option<usize>,
    sigma: Option<f64>,
    outer_iters: Option<usize>,
    ppa_iters: Option<usize>,
    cg_tol: Option<f64>,
    tile_side: Option<usize>,
    tile_overlap: Option<usize>,
) -> PyResult<LightField> {
    let mut cfg = RunConfig {
        alpha,
        ..RunConfig::default()
    };
    if let Some(v) = variant {
        cfg.variant = v.parse().map_err(to_py_err)?;
    }
    macro_rules! override_field {
        ($($name:ident),*) => {
            $(if let Some(v) = $name { cfg.$name = v; })*
        };
    }
    override_field!(
        lambda2,
        lambda3,
        beta,
        window,
        patch_side,
        sigma,
        outer_iters,
        ppa_iters,
        cg_tol,
        tile_overlap
    );
    if tile_side.is_some() {
        cfg.tile_side = tile_side;
    }
    cfg.validate().map_err(to_py_err)?;

    let inner = field.inner.clone();
    let (result, _reports) = py
        .allow_threads(move || {
            super_resolve_color(
                &inner,
                cfg.alpha,
                &cfg.solver_config(),
                &cfg.graph_params(),
                cfg.variant,
                cfg.effective_tile_side(),
                cfg.tile_overlap,
            )
        })
        .map_err(to_py_err)?;
    Ok(LightField {
        inner: result,
        bit_depth: field.bit_depth,
    })
}

/// Mean luma PSNR in dB over all views, excluding a `crop` pixel border.
#[pyfunction]
#[pyo3(signature = (a, b, crop=0))]
fn psnr(a: &LightField, b: &LightField, crop: usize) -> PyResult<f64> {
    if a.inner.m() != b.inner.m() {
        return Err(PyValueError::new_err(format!(
            "angular grids differ: {} vs {}",
            a.inner.m(),
            b.inner.m()
        )));
    }
    let (la, _) = a.inner.to_luma_chroma();
    let (lb, _) = b.inner.to_luma_chroma();
    let mut total = 0.0;
    for (va, vb) in la.views().iter().zip(lb.views()) {
        total += commands::psnr(va, vb, crop).map_err(to_py_err)?;
    }
    Ok(total / la.views().len() as f64)
}

/// Horizontal epipolar-plane image: luma of pixel row `x` across the views
/// of angular row `s` (both 1-based), as an M×cols array.
#[pyfunction]
fn epi<'py>(
    py: Python<'py>,
    field: &LightField,
    s: usize,
    x: usize,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let (luma, _) = field.inner.to_luma_chroma();
    let slice = extract_epi(&luma, s, x).map_err(to_py_err)?;
    let (rows, cols) = slice.data.dim();
    let flat: Vec<f64> = slice.data.iter().copied().collect();
    let arr =
        Array2::from_shape_vec((rows, cols), flat).expect("EPI dimensions match its element count");
    Ok(arr.into_pyarray(py))
}

#[pymodule]
fn lfsr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<LightField>()?;
    m.add_function(wrap_pyfunction!(degrade, m)?)?;
    m.add_function(wrap_pyfunction!(super_resolve, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(epi, m)?)?;
    Ok(())
}
