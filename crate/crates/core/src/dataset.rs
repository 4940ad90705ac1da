//! Dataset directory layout: one PNG per view named `view_SS_TT.png`
//! (SS = s, TT = t, two-digit, 1-based), plus an optional `lightfield.cfg`
//! sidecar describing the grid.
//!
//! Supported pixel formats are 8- and 16-bit grayscale and RGB. Loading
//! maps intensities to [0, 1]; saving quantizes round-half-up at the
//! requested bit depth, so save → load round-trips within half a
//! quantization step.

use crate::error::{Error, Result};
use crate::lightfield::{ColorLightField, LightField};
use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use ndarray::Array2;
use std::collections::BTreeMap;
use std::path::Path;

/// A light field together with the bit depth it was stored at.
#[derive(Debug, Clone)]
pub struct LoadedField {
    pub field: ColorLightField,
    pub bit_depth: u8,
}

pub fn view_filename(s: usize, t: usize) -> String {
    format!("view_{s:02}_{t:02}.png")
}

fn parse_view_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("view_")?.strip_suffix(".png")?;
    let (s, t) = rest.split_once('_')?;
    if s.len() != 2 || t.len() != 2 {
        return None;
    }
    let s: usize = s.parse().ok()?;
    let t: usize = t.parse().ok()?;
    if s < 1 || t < 1 {
        return None;
    }
    Some((s, t))
}

struct DecodedView {
    /// 1 or 3 channel planes, each (rows, cols).
    planes: Vec<Array2<f64>>,
    bit_depth: u8,
}

fn decode_view(path: &Path) -> Result<DecodedView> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    // Image (column, row) maps to our view indexing (x = row, y = column).
    let plane = |f: &dyn Fn(usize, usize) -> f64| Array2::from_shape_fn((h, w), |(x, y)| f(x, y));
    let (planes, bit_depth) = match &img {
        DynamicImage::ImageLuma8(b) => (
            vec![plane(&|x, y| {
                b.get_pixel(y as u32, x as u32).0[0] as f64 / 255.0
            })],
            8,
        ),
        DynamicImage::ImageLuma16(b) => (
            vec![plane(&|x, y| {
                b.get_pixel(y as u32, x as u32).0[0] as f64 / 65535.0
            })],
            16,
        ),
        DynamicImage::ImageRgb8(b) => (
            (0..3)
                .map(|c| plane(&|x, y| b.get_pixel(y as u32, x as u32).0[c] as f64 / 255.0))
                .collect(),
            8,
        ),
        DynamicImage::ImageRgb16(b) => (
            (0..3)
                .map(|c| plane(&|x, y| b.get_pixel(y as u32, x as u32).0[c] as f64 / 65535.0))
                .collect(),
            16,
        ),
        other => {
            return Err(Error::Dataset(format!(
                "{}: unsupported pixel format {:?} (expected 8/16-bit grayscale or RGB)",
                path.display(),
                other.color()
            )));
        }
    };
    Ok(DecodedView { planes, bit_depth })
}

/// Validates an optional `lightfield.cfg` sidecar against the loaded data.
fn check_sidecar(dir: &Path, field: &ColorLightField, bit_depth: u8) -> Result<()> {
    let path = dir.join("lightfield.cfg");
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(source) => return Err(Error::Io { path, source }),
    };
    let (n_r, n_c) = field.view_shape();
    let actual: BTreeMap<&str, usize> = BTreeMap::from([
        ("m", field.m()),
        ("view_rows", n_r),
        ("view_cols", n_c),
        ("channels", field.n_channels()),
        ("bit_depth", bit_depth as usize),
    ]);
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Dataset(format!(
                "{}: line {}: expected 'key = value'",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let Some(&want) = actual.get(key) else {
            return Err(Error::Dataset(format!(
                "{}: unknown key '{key}'",
                path.display()
            )));
        };
        let got: usize = value.trim().parse().map_err(|_| {
            Error::Dataset(format!(
                "{}: invalid value '{}' for '{key}'",
                path.display(),
                value.trim()
            ))
        })?;
        if got != want {
            return Err(Error::Dataset(format!(
                "{}: {key} = {got} does not match the loaded views ({want})",
                path.display()
            )));
        }
    }
    Ok(())
}

/// Loads a complete M×M view grid from a directory; M is inferred from the
/// filenames. All views must share dimensions, channel count and bit depth.
pub fn load_lightfield(dir: &Path) -> Result<LoadedField> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names: Vec<String> = Vec::new();
    for e in entries {
        let e = e.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        names.push(e.file_name().to_string_lossy().into_owned());
    }
    names.sort();
    let mut coords = Vec::new();
    for name in &names {
        if let Some(st) = parse_view_name(name) {
            coords.push(st);
        } else if name.starts_with("view_") && name.ends_with(".png") {
            return Err(Error::Dataset(format!(
                "{}: '{name}' does not match view_SS_TT.png",
                dir.display()
            )));
        }
    }
    if coords.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no view_SS_TT.png files found",
            dir.display()
        )));
    }
    let m = coords
        .iter()
        .map(|&(s, t)| s.max(t))
        .max()
        .expect("nonempty");
    for t in 1..=m {
        for s in 1..=m {
            if !coords.contains(&(s, t)) {
                return Err(Error::Dataset(format!(
                    "{}: missing view file {}",
                    dir.display(),
                    view_filename(s, t)
                )));
            }
        }
    }
    // Views in linear order: k = (t−1)·M + s.
    let mut channel_views: Vec<Vec<Array2<f64>>> = Vec::new();
    let mut bit_depth = 0u8;
    let mut first_name = String::new();
    for t in 1..=m {
        for s in 1..=m {
            let name = view_filename(s, t);
            let decoded = decode_view(&dir.join(&name))?;
            if channel_views.is_empty() {
                channel_views = vec![Vec::with_capacity(m * m); decoded.planes.len()];
                bit_depth = decoded.bit_depth;
                first_name = name.clone();
            }
            if decoded.planes.len() != channel_views.len()
                || decoded.bit_depth != bit_depth
                || decoded.planes[0].dim()
                    != channel_views[0]
                        .first()
                        .map_or(decoded.planes[0].dim(), |v| v.dim())
            {
                return Err(Error::Dataset(format!(
                    "{}: {name} ({} channels, {}-bit, {:?}) is inconsistent with {first_name}",
                    dir.display(),
                    decoded.planes.len(),
                    decoded.bit_depth,
                    decoded.planes[0].dim()
                )));
            }
            for (cv, plane) in channel_views.iter_mut().zip(decoded.planes) {
                cv.push(plane);
            }
        }
    }
    let channels = channel_views
        .into_iter()
        .map(|views| LightField::new(m, views))
        .collect::<Result<Vec<_>>>()?;
    let field = ColorLightField::new(channels)?;
    check_sidecar(dir, &field, bit_depth)?;
    Ok(LoadedField { field, bit_depth })
}

fn quantize(v: f64, max: f64) -> f64 {
    // Round half up on the clamped intensity.
    (v.clamp(0.0, 1.0) * max + 0.5).floor().min(max)
}

fn encode_view(planes: &[&Array2<f64>], bit_depth: u8) -> Result<DynamicImage> {
    let (rows, cols) = planes[0].dim();
    let (w, h) = (cols as u32, rows as u32);
    let img = match (planes.len(), bit_depth) {
        (1, 8) => DynamicImage::ImageLuma8(ImageBuffer::from_fn(w, h, |y, x| {
            Luma([quantize(planes[0][[x as usize, y as usize]], 255.0) as u8])
        })),
        (1, 16) => DynamicImage::ImageLuma16(ImageBuffer::from_fn(w, h, |y, x| {
            Luma([quantize(planes[0][[x as usize, y as usize]], 65535.0) as u16])
        })),
        (3, 8) => DynamicImage::ImageRgb8(ImageBuffer::from_fn(w, h, |y, x| {
            Rgb([0, 1, 2].map(|c| quantize(planes[c][[x as usize, y as usize]], 255.0) as u8))
        })),
        (3, 16) => DynamicImage::ImageRgb16(ImageBuffer::from_fn(w, h, |y, x| {
            Rgb([0, 1, 2].map(|c| quantize(planes[c][[x as usize, y as usize]], 65535.0) as u16))
        })),
        (ch, bd) => {
            return Err(Error::Dataset(format!(
                "cannot encode {ch} channels at {bd}-bit (expected 1 or 3 channels, 8 or 16 bit)"
            )));
        }
    };
    Ok(img)
}

/// Writes the view grid plus a `lightfield.cfg` sidecar. Intensities are
/// clamped to [0, 1] and quantized round-half-up at `bit_depth`.
pub fn save_lightfield(dir: &Path, field: &ColorLightField, bit_depth: u8) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let m = field.m();
    for t in 1..=m {
        for s in 1..=m {
            let k0 = (t - 1) * m + s - 1;
            let planes: Vec<&Array2<f64>> =
                field.channels().iter().map(|c| &c.views()[k0]).collect();
            let img = encode_view(&planes, bit_depth)?;
            let path = dir.join(view_filename(s, t));
            img.save(&path).map_err(|source| Error::Image {
                path: path.clone(),
                source,
            })?;
        }
    }
    let (n_r, n_c) = field.view_shape();
    let sidecar = format!(
        "m = {m}\nview_rows = {n_r}\nview_cols = {n_c}\nchannels = {}\nbit_depth = {bit_depth}\n",
        field.n_channels()
    );
    let path = dir.join("lightfield.cfg");
    std::fs::write(&path, sidecar).map_err(|source| Error::Io { path, source })
}

/// Writes a single grayscale image (8-bit, clamped and quantized).
pub fn save_gray_image(path: &Path, img: &Array2<f64>) -> Result<()> {
    let (rows, cols) = img.dim();
    let buf = ImageBuffer::from_fn(cols as u32, rows as u32, |y, x| {
        Luma([quantize(img[[x as usize, y as usize]], 255.0) as u8])
    });
    DynamicImage::ImageLuma8(buf)
        .save(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn sample_field(m: usize, seed: u64) -> ColorLightField {
        ColorLightField::gray(synth::shifted_field(m, 6, 8, 1, |a, b| {
            synth::uniform_texture(a, b, seed)
        }))
    }

    #[test]
    fn filename_layout() {
        assert_eq!(view_filename(3, 12), "view_03_12.png");
        assert_eq!(parse_view_name("view_03_12.png"), Some((3, 12)));
        assert_eq!(parse_view_name("view_3_12.png"), None);
        assert_eq!(parse_view_name("view_00_01.png"), None);
        assert_eq!(parse_view_name("thumb.png"), None);
    }

    #[test]
    fn save_load_round_trip_gray8() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field(2, 3);
        save_lightfield(dir.path(), &field, 8).unwrap();
        let loaded = load_lightfield(dir.path()).unwrap();
        assert_eq!(loaded.bit_depth, 8);
        assert!(loaded.field.is_gray());
        assert_eq!(loaded.field.m(), 2);
        assert_eq!(loaded.field.view_shape(), (6, 8));
        for (a, b) in loaded.field.channels()[0]
            .views()
            .iter()
            .zip(field.channels()[0].views())
        {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
    }

    #[test]
    fn save_load_round_trip_rgb16() {
        let dir = tempfile::tempdir().unwrap();
        let channels = vec![
            synth::shifted_field(2, 4, 4, 0, |a, b| synth::uniform_texture(a, b, 1)),
            synth::shifted_field(2, 4, 4, 0, |a, b| synth::uniform_texture(a, b, 2)),
            synth::shifted_field(2, 4, 4, 0, |a, b| synth::uniform_texture(a, b, 3)),
        ];
        let field = ColorLightField::new(channels).unwrap();
        let dir2 = dir.path().join("out");
        save_lightfield(&dir2, &field, 16).unwrap();
        let loaded = load_lightfield(&dir2).unwrap();
        assert_eq!(loaded.bit_depth, 16);
        assert_eq!(loaded.field.n_channels(), 3);
        for (ca, cb) in loaded.field.channels().iter().zip(field.channels()) {
            for (a, b) in ca.views().iter().zip(cb.views()) {
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() <= 0.5 / 65535.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sixteen_bit_max_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let field = ColorLightField::gray(LightField::from_fn(1, 2, 2, |_, _, _, _| 1.0));
        save_lightfield(dir.path(), &field, 16).unwrap();
        let loaded = load_lightfield(dir.path()).unwrap();
        for v in loaded.field.channels()[0].views() {
            assert!(v.iter().all(|&a| a == 1.0));
        }
    }

    #[test]
    fn missing_view_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field(3, 7);
        save_lightfield(dir.path(), &field, 8).unwrap();
        std::fs::remove_file(dir.path().join("view_03_02.png")).unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(
            err.to_string().contains("view_03_02.png"),
            "error does not name the file: {err}"
        );
    }

    #[test]
    fn sidecar_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field(2, 9);
        save_lightfield(dir.path(), &field, 8).unwrap();
        std::fs::write(dir.path().join("lightfield.cfg"), "m = 3\n").unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(err.to_string().contains("does not match"), "{err}");
        std::fs::write(dir.path().join("lightfield.cfg"), "views = 4\n").unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn inconsistent_views_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field(2, 11);
        save_lightfield(dir.path(), &field, 8).unwrap();
        std::fs::remove_file(dir.path().join("lightfield.cfg")).unwrap();
        // Replace one view with a different size.
        let small = ColorLightField::gray(LightField::from_fn(1, 3, 3, |_, _, _, _| 0.5));
        let tmp = tempfile::tempdir().unwrap();
        save_lightfield(tmp.path(), &small, 8).unwrap();
        std::fs::copy(
            tmp.path().join("view_01_01.png"),
            dir.path().join("view_02_02.png"),
        )
        .unwrap();
        let err = load_lightfield(dir.path()).unwrap_err();
        assert!(err.to_string().contains("inconsistent"), "{err}");
    }

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(quantize(0.5 / 255.0, 255.0), 1.0);
        assert_eq!(quantize(0.49 / 255.0, 255.0), 0.0);
        assert_eq!(quantize(1.5, 255.0), 255.0);
        assert_eq!(quantize(-0.2, 255.0), 0.0);
    }
}
