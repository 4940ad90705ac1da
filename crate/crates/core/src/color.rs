//! Full-range ITU-R BT.601 luma/chroma conversion.
//!
//! Y  = 0.299·R + 0.587·G + 0.114·B
//! Cb = (B − Y) / 1.772
//! Cr = (R − Y) / 1.402
//!
//! Chroma is centered at zero (neutral chroma = 0), so a gray input
//! (r = g = b) maps to luma equal to the gray value and zero chroma.

use ndarray::Array2;

pub const KR: f64 = 0.299;
pub const KG: f64 = 0.587;
pub const KB: f64 = 0.114;

const CB_SCALE: f64 = 1.772; // 2 (1 − KB)
const CR_SCALE: f64 = 1.402; // 2 (1 − KR)

#[inline]
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = KR * r + KG * g + KB * b;
    let cb = (b - y) / CB_SCALE;
    let cr = (r - y) / CR_SCALE;
    (y, cb, cr)
}

#[inline]
pub fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let r = y + CR_SCALE * cr;
    let b = y + CB_SCALE * cb;
    let g = (y - KR * r - KB * b) / KG;
    (r, g, b)
}

/// Converts a 3-channel image to (luma, Cb, Cr).
pub fn rgb_to_luma_chroma(
    r: &Array2<f64>,
    g: &Array2<f64>,
    b: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    assert_eq!(r.dim(), g.dim());
    assert_eq!(r.dim(), b.dim());
    let mut y = Array2::zeros(r.dim());
    let mut cb = Array2::zeros(r.dim());
    let mut cr = Array2::zeros(r.dim());
    for ((idx, &rv), (&gv, &bv)) in r.indexed_iter().zip(g.iter().zip(b.iter())) {
        let (yv, cbv, crv) = rgb_to_ycbcr(rv, gv, bv);
        y[idx] = yv;
        cb[idx] = cbv;
        cr[idx] = crv;
    }
    (y, cb, cr)
}

/// Inverse of [`rgb_to_luma_chroma`].
pub fn luma_chroma_to_rgb(
    y: &Array2<f64>,
    cb: &Array2<f64>,
    cr: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    assert_eq!(y.dim(), cb.dim());
    assert_eq!(y.dim(), cr.dim());
    let mut r = Array2::zeros(y.dim());
    let mut g = Array2::zeros(y.dim());
    let mut b = Array2::zeros(y.dim());
    for ((idx, &yv), (&cbv, &crv)) in y.indexed_iter().zip(cb.iter().zip(cr.iter())) {
        let (rv, gv, bv) = ycbcr_to_rgb(yv, cbv, crv);
        r[idx] = rv;
        g[idx] = gv;
        b[idx] = bv;
    }
    (r, g, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_maps_to_gray_luma_and_neutral_chroma() {
        let (y, cb, cr) = rgb_to_ycbcr(0.5, 0.5, 0.5);
        assert!((y - 0.5).abs() < 1e-12);
        assert!(cb.abs() < 1e-12);
        assert!(cr.abs() < 1e-12);
    }

    #[test]
    fn pure_red_luma_is_the_red_coefficient() {
        let (y, _, _) = rgb_to_ycbcr(1.0, 0.0, 0.0);
        assert!((y - KR).abs() < 1e-12);
    }

    #[test]
    fn round_trip_within_tolerance() {
        // Deterministic grid of rgb triples covering the unit cube.
        for ri in 0..=10 {
            for gi in 0..=10 {
                for bi in 0..=10 {
                    let (r, g, b) = (ri as f64 / 10.0, gi as f64 / 10.0, bi as f64 / 10.0);
                    let (y, cb, cr) = rgb_to_ycbcr(r, g, b);
                    let (r2, g2, b2) = ycbcr_to_rgb(y, cb, cr);
                    assert!((r - r2).abs() < 1e-6);
                    assert!((g - g2).abs() < 1e-6);
                    assert!((b - b2).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn image_round_trip() {
        let r = Array2::from_shape_fn((4, 3), |(i, j)| (i as f64 + 0.3 * j as f64) / 5.0);
        let g = Array2::from_shape_fn((4, 3), |(i, j)| (j as f64 + 0.1 * i as f64) / 4.0);
        let b = Array2::from_shape_fn((4, 3), |(i, j)| ((i + j) % 2) as f64);
        let (y, cb, cr) = rgb_to_luma_chroma(&r, &g, &b);
        let (r2, g2, b2) = luma_chroma_to_rgb(&y, &cb, &cr);
        for idx in r.indexed_iter().map(|(idx, _)| idx) {
            assert!((r[idx] - r2[idx]).abs() < 1e-6);
            assert!((g[idx] - g2[idx]).abs() < 1e-6);
            assert!((b[idx] - b2[idx]).abs() < 1e-6);
        }
    }
}
