//! Light field data model: view storage, angular/linear indexing,
//! vectorization and epipolar image extraction.
//!
//! A light field is an M×M array of views, each an N_r×N_c image.
//! A view is addressed either by its angular coordinate (s, t) with
//! s, t ∈ {1, …, M} (s = row, t = column of the camera array) or by its
//! linear index k = (t−1)·M + s, i.e. the camera array is visited in
//! column-major order. Within a view, a pixel is addressed by (x, y)
//! with x the row and y the column.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Angular coordinate of a view, 1-based: s, t ∈ {1, …, M}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ViewCoord {
    pub s: usize,
    pub t: usize,
}

impl ViewCoord {
    pub fn new(s: usize, t: usize) -> Self {
        ViewCoord { s, t }
    }

    /// Inverse of [`linear_index`]: recovers (s, t) from k ∈ {1, …, M²}.
    pub fn from_linear(k: usize, m: usize) -> Result<Self> {
        if k < 1 || k > m * m {
            return Err(Error::Domain(format!(
                "linear view index {k} out of range 1..={}",
                m * m
            )));
        }
        let s = (k - 1) % m + 1;
        let t = (k - 1) / m + 1;
        Ok(ViewCoord { s, t })
    }
}

/// Linear index of a view: k = (t−1)·M + s ∈ {1, …, M²}.
pub fn linear_index(c: ViewCoord, m: usize) -> Result<usize> {
    if c.s < 1 || c.s > m || c.t < 1 || c.t > m {
        return Err(Error::Domain(format!(
            "view coordinate (s={}, t={}) out of range 1..={m}",
            c.s, c.t
        )));
    }
    Ok((c.t - 1) * m + c.s)
}

/// Dimensions of a light field: spatial N_r×N_c, angular M×M.
///
/// Also fixes the vectorization layout: entry order is views by linear
/// index, pixels within a view in column-major order, so the pixel
/// (x, y) of view k sits at (k−1)·N_r·N_c + y·N_r + x with x, y 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_r: usize,
    pub n_c: usize,
    pub m: usize,
}

impl Layout {
    /// Pixels per view.
    pub fn view_len(&self) -> usize {
        self.n_r * self.n_c
    }

    /// Total entries: N_r·N_c·M².
    pub fn total_len(&self) -> usize {
        self.view_len() * self.m * self.m
    }

    /// Column-major offset of pixel (x0, y0), 0-based, within a view.
    #[inline]
    pub fn pixel_offset(&self, x0: usize, y0: usize) -> usize {
        y0 * self.n_r + x0
    }

    /// Global vertex index of pixel (x0, y0) of view k0, all 0-based.
    #[inline]
    pub fn vertex(&self, k0: usize, x0: usize, y0: usize) -> usize {
        k0 * self.view_len() + self.pixel_offset(x0, y0)
    }
}

/// An M×M grid of single-channel views with identical spatial dimensions.
///
/// Intensities of loaded images lie in [0, 1]; intermediate solver
/// estimates reuse this container and may transiently leave that range.
#[derive(Debug, Clone, PartialEq)]
pub struct LightField {
    m: usize,
    views: Vec<Array2<f64>>,
}

impl LightField {
    /// Builds a light field from views in linear order (k = 1, …, M²).
    pub fn new(m: usize, views: Vec<Array2<f64>>) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("angular side M must be >= 1".into()));
        }
        if views.len() != m * m {
            return Err(Error::Domain(format!(
                "expected {} views, got {}",
                m * m,
                views.len()
            )));
        }
        let shape = views[0].dim();
        if shape.0 < 1 || shape.1 < 1 {
            return Err(Error::Domain("views must be at least 1x1".into()));
        }
        for (i, v) in views.iter().enumerate() {
            if v.dim() != shape {
                return Err(Error::Domain(format!(
                    "view {} has shape {:?}, expected {:?}",
                    i + 1,
                    v.dim(),
                    shape
                )));
            }
        }
        Ok(LightField { m, views })
    }

    /// Builds a light field by evaluating `f(s0, t0, x0, y0)` (all 0-based).
    pub fn from_fn(
        m: usize,
        n_r: usize,
        n_c: usize,
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut views = Vec::with_capacity(m * m);
        for k0 in 0..m * m {
            let s0 = k0 % m;
            let t0 = k0 / m;
            views.push(Array2::from_shape_fn((n_r, n_c), |(x0, y0)| {
                f(s0, t0, x0, y0)
            }));
        }
        LightField { m, views }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Spatial shape (N_r, N_c) shared by all views.
    pub fn view_shape(&self) -> (usize, usize) {
        self.views[0].dim()
    }

    pub fn layout(&self) -> Layout {
        let (n_r, n_c) = self.view_shape();
        Layout {
            n_r,
            n_c,
            m: self.m,
        }
    }

    /// View at angular coordinate (s, t), 1-based.
    pub fn view(&self, c: ViewCoord) -> Result<&Array2<f64>> {
        let k = linear_index(c, self.m)?;
        Ok(&self.views[k - 1])
    }

    /// Views in linear order; view k is at slice index k−1.
    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn views_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.views
    }

    /// Clamps every intensity into [0, 1].
    pub fn clamp_unit(&mut self) {
        for v in &mut self.views {
            v.mapv_inplace(|a| a.clamp(0.0, 1.0));
        }
    }
}

/// A light field with one (gray) or three (RGB) channels per view, stored
/// as per-channel [`LightField`]s of identical geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorLightField {
    channels: Vec<LightField>,
}

impl ColorLightField {
    pub fn new(channels: Vec<LightField>) -> Result<Self> {
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::Domain(format!(
                "expected 1 or 3 channels, got {}",
                channels.len()
            )));
        }
        let m = channels[0].m();
        let shape = channels[0].view_shape();
        for (i, c) in channels.iter().enumerate() {
            if c.m() != m || c.view_shape() != shape {
                return Err(Error::Domain(format!(
                    "channel {i} has geometry {}x{} views of {:?}, expected {}x{} of {:?}",
                    c.m(),
                    c.m(),
                    c.view_shape(),
                    m,
                    m,
                    shape
                )));
            }
        }
        Ok(ColorLightField { channels })
    }

    pub fn gray(lf: LightField) -> Self {
        ColorLightField { channels: vec![lf] }
    }

    pub fn m(&self) -> usize {
        self.channels[0].m()
    }

    pub fn view_shape(&self) -> (usize, usize) {
        self.channels[0].view_shape()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn is_gray(&self) -> bool {
        self.channels.len() == 1
    }

    pub fn channels(&self) -> &[LightField] {
        &self.channels
    }

    /// Splits into a luma field and the chroma fields (empty for gray).
    pub fn to_luma_chroma(&self) -> (LightField, Vec<LightField>) {
        if self.is_gray() {
            return (self.channels[0].clone(), Vec::new());
        }
        let m = self.m();
        let mut y_views = Vec::with_capacity(m * m);
        let mut cb_views = Vec::with_capacity(m * m);
        let mut cr_views = Vec::with_capacity(m * m);
        for k0 in 0..m * m {
            let (y, cb, cr) = crate::color::rgb_to_luma_chroma(
                &self.channels[0].views()[k0],
                &self.channels[1].views()[k0],
                &self.channels[2].views()[k0],
            );
            y_views.push(y);
            cb_views.push(cb);
            cr_views.push(cr);
        }
        let luma = LightField::new(m, y_views).expect("consistent channel geometry");
        let cb = LightField::new(m, cb_views).expect("consistent channel geometry");
        let cr = LightField::new(m, cr_views).expect("consistent channel geometry");
        (luma, vec![cb, cr])
    }

    /// Recombines luma and chroma; RGB outputs are clamped to [0, 1].
    /// `chroma` is empty (gray result) or the two fields from
    /// [`Self::to_luma_chroma`].
    pub fn from_luma_chroma(luma: LightField, chroma: Vec<LightField>) -> Result<Self> {
        match chroma.len() {
            0 => Ok(ColorLightField::gray(luma)),
            2 => {
                let m = luma.m();
                let shape = luma.view_shape();
                for c in &chroma {
                    if c.m() != m || c.view_shape() != shape {
                        return Err(Error::Domain("chroma geometry does not match luma".into()));
                    }
                }
                let mut r_views = Vec::with_capacity(m * m);
                let mut g_views = Vec::with_capacity(m * m);
                let mut b_views = Vec::with_capacity(m * m);
                for k0 in 0..m * m {
                    let (mut r, mut g, mut b) = crate::color::luma_chroma_to_rgb(
                        &luma.views()[k0],
                        &chroma[0].views()[k0],
                        &chroma[1].views()[k0],
                    );
                    for c in [&mut r, &mut g, &mut b] {
                        c.mapv_inplace(|v| v.clamp(0.0, 1.0));
                    }
                    r_views.push(r);
                    g_views.push(g);
                    b_views.push(b);
                }
                ColorLightField::new(vec![
                    LightField::new(m, r_views)?,
                    LightField::new(m, g_views)?,
                    LightField::new(m, b_views)?,
                ])
            }
            n => Err(Error::Domain(format!(
                "expected 0 or 2 chroma fields, got {n}"
            ))),
        }
    }
}

/// The light field flattened into a single vector (see [`Layout`]).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedLightField {
    pub data: Vec<f64>,
    pub layout: Layout,
}

impl VectorizedLightField {
    /// The slice holding view k0 (0-based linear index).
    pub fn view_slice(&self, k0: usize) -> &[f64] {
        let v = self.layout.view_len();
        &self.data[k0 * v..(k0 + 1) * v]
    }
}

/// Flattens a light field: views by linear index, pixels column-major.
pub fn vectorize(lf: &LightField) -> VectorizedLightField {
    let layout = lf.layout();
    let mut data = Vec::with_capacity(layout.total_len());
    for view in lf.views() {
        for y0 in 0..layout.n_c {
            for x0 in 0..layout.n_r {
                data.push(view[[x0, y0]]);
            }
        }
    }
    VectorizedLightField { data, layout }
}

/// Inverse of [`vectorize`]; exact round-trip.
pub fn devectorize(v: &VectorizedLightField) -> Result<LightField> {
    let layout = v.layout;
    if v.data.len() != layout.total_len() {
        return Err(Error::Domain(format!(
            "vector length {} does not match layout {:?}",
            v.data.len(),
            layout
        )));
    }
    let mut views = Vec::with_capacity(layout.m * layout.m);
    for k0 in 0..layout.m * layout.m {
        let mut view = Array2::zeros((layout.n_r, layout.n_c));
        let base = k0 * layout.view_len();
        for y0 in 0..layout.n_c {
            for x0 in 0..layout.n_r {
                view[[x0, y0]] = v.data[base + layout.pixel_offset(x0, y0)];
            }
        }
        views.push(view);
    }
    LightField::new(layout.m, views)
}

/// Orientation of an epipolar image slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiOrientation {
    /// Fixed angular row s and spatial row x; rows of the EPI vary t.
    Horizontal,
    /// Fixed angular column t and spatial column y; rows of the EPI vary s.
    Vertical,
}

/// An epipolar image: one spatial row (or column) stacked across views.
#[derive(Debug, Clone, PartialEq)]
pub struct Epi {
    /// M×N_c (horizontal) or M×N_r (vertical) slice.
    pub data: Array2<f64>,
    /// Fixed angular index (s for horizontal, t for vertical), 1-based.
    pub fixed_angular: usize,
    /// Fixed spatial index (x for horizontal, y for vertical), 1-based.
    pub fixed_spatial: usize,
    pub orientation: EpiOrientation,
}

/// Horizontal EPI: row `t'` of the result is row x of view (s, t').
///
/// `s` and `x` are 1-based.
pub fn extract_epi(lf: &LightField, s: usize, x: usize) -> Result<Epi> {
    let (n_r, n_c) = lf.view_shape();
    if s < 1 || s > lf.m() {
        return Err(Error::Domain(format!(
            "angular row s={s} out of range 1..={}",
            lf.m()
        )));
    }
    if x < 1 || x > n_r {
        return Err(Error::Domain(format!(
            "spatial row x={x} out of range 1..={n_r}"
        )));
    }
    let mut data = Array2::zeros((lf.m(), n_c));
    for t in 1..=lf.m() {
        let view = lf.view(ViewCoord::new(s, t))?;
        for y0 in 0..n_c {
            data[[t - 1, y0]] = view[[x - 1, y0]];
        }
    }
    Ok(Epi {
        data,
        fixed_angular: s,
        fixed_spatial: x,
        orientation: EpiOrientation::Horizontal,
    })
}

/// Vertical EPI: row `s'` of the result is column y of view (s', t).
pub fn extract_epi_vertical(lf: &LightField, t: usize, y: usize) -> Result<Epi> {
    let (n_r, n_c) = lf.view_shape();
    if t < 1 || t > lf.m() {
        return Err(Error::Domain(format!(
            "angular column t={t} out of range 1..={}",
            lf.m()
        )));
    }
    if y < 1 || y > n_c {
        return Err(Error::Domain(format!(
            "spatial column y={y} out of range 1..={n_c}"
        )));
    }
    let mut data = Array2::zeros((lf.m(), n_r));
    for s in 1..=lf.m() {
        let view = lf.view(ViewCoord::new(s, t))?;
        for x0 in 0..n_r {
            data[[s - 1, x0]] = view[[x0, y - 1]];
        }
    }
    Ok(Epi {
        data,
        fixed_angular: t,
        fixed_spatial: y,
        orientation: EpiOrientation::Vertical,
    })
}
