//! Degradation operator: blur over disjoint alpha x alpha blocks followed by
//! regular subsampling, i.e. each low-resolution pixel is the mean of one
//! block. The operator is row-stochastic and its adjoint distributes each
//! low-resolution value uniformly over the source block.

use crate::error::{Error, Result};
use crate::lightfield::LightField;
use ndarray::Array2;

/// Block-mean downsampling by an integer factor.
#[derive(Debug, Clone)]
pub struct BlurSampleOperator {
    alpha: usize,
    hi: (usize, usize),
    lo: (usize, usize),
}

impl BlurSampleOperator {
    /// Requires alpha >= 1 and both high-resolution dimensions divisible by alpha.
    pub fn new(hi_shape: (usize, usize), alpha: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::Config(
                "downsampling factor must be at least 1".into(),
            ));
        }
        let (n_r, n_c) = hi_shape;
        if n_r == 0 || n_c == 0 {
            return Err(Error::Config("view dimensions must be positive".into()));
        }
        if n_r % alpha != 0 || n_c % alpha != 0 {
            return Err(Error::Config(format!(
                "view shape {n_r}x{n_c} is not divisible by factor {alpha}"
            )));
        }
        Ok(BlurSampleOperator {
            alpha,
            hi: hi_shape,
            lo: (n_r / alpha, n_c / alpha),
        })
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn hi_shape(&self) -> (usize, usize) {
        self.hi
    }

    pub fn lo_shape(&self) -> (usize, usize) {
        self.lo
    }

    pub fn hi_len(&self) -> usize {
        self.hi.0 * self.hi.1
    }

    pub fn lo_len(&self) -> usize {
        self.lo.0 * self.lo.1
    }

    /// Block means of a high-resolution image.
    pub fn apply_image(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.dim() != self.hi {
            return Err(Error::Domain(format!(
                "expected {:?} image, got {:?}",
                self.hi,
                x.dim()
            )));
        }
        let a = self.alpha;
        let inv = 1.0 / (a * a) as f64;
        let mut out = Array2::zeros(self.lo);
        for bx in 0..self.lo.0 {
            for by in 0..self.lo.1 {
                let mut acc = 0.0;
                for dx in 0..a {
                    for dy in 0..a {
                        acc += x[[bx * a + dx, by * a + dy]];
                    }
                }
                out[[bx, by]] = acc * inv;
            }
        }
        Ok(out)
    }

    /// y = S B x on column-major vectorized views.
    pub fn apply_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.hi_len());
        assert_eq!(y.len(), self.lo_len());
        let a = self.alpha;
        let inv = 1.0 / (a * a) as f64;
        let (hi_nr, _) = self.hi;
        let (lo_nr, lo_nc) = self.lo;
        for by in 0..lo_nc {
            for bx in 0..lo_nr {
                let mut acc = 0.0;
                for dy in 0..a {
                    let col = (by * a + dy) * hi_nr + bx * a;
                    acc += x[col..col + a].iter().sum::<f64>();
                }
                y[by * lo_nr + bx] = acc * inv;
            }
        }
    }

    /// x = (S B)ᵀ y: each low-resolution value spread as y / alpha² over its block.
    pub fn apply_adjoint_vec(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.lo_len());
        assert_eq!(x.len(), self.hi_len());
        let a = self.alpha;
        let inv = 1.0 / (a * a) as f64;
        let (hi_nr, _) = self.hi;
        let (lo_nr, lo_nc) = self.lo;
        for by in 0..lo_nc {
            for bx in 0..lo_nr {
                let v = y[by * lo_nr + bx] * inv;
                for dy in 0..a {
                    let col = (by * a + dy) * hi_nr + bx * a;
                    for slot in &mut x[col..col + a] {
                        *slot = v;
                    }
                }
            }
        }
    }

    pub fn apply_adjoint_image(&self, y: &Array2<f64>) -> Result<Array2<f64>> {
        if y.dim() != self.lo {
            return Err(Error::Domain(format!(
                "expected {:?} image, got {:?}",
                self.lo,
                y.dim()
            )));
        }
        let a = self.alpha;
        let inv = 1.0 / (a * a) as f64;
        let mut out = Array2::zeros(self.hi);
        for bx in 0..self.lo.0 {
            for by in 0..self.lo.1 {
                let v = y[[bx, by]] * inv;
                for dx in 0..a {
                    for dy in 0..a {
                        out[[bx * a + dx, by * a + dy]] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense lo_len x hi_len matrix on column-major vectorizations; test support.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.lo_len(), self.hi_len()));
        let mut x = vec![0.0; self.hi_len()];
        let mut y = vec![0.0; self.lo_len()];
        for j in 0..self.hi_len() {
            x[j] = 1.0;
            self.apply_vec(&x, &mut y);
            for (i, &v) in y.iter().enumerate() {
                d[[i, j]] = v;
            }
            x[j] = 0.0;
        }
        d
    }
}

/// Applies block-mean downsampling to every view.
pub fn degrade_lightfield(lf: &LightField, alpha: usize) -> Result<LightField> {
    let op = BlurSampleOperator::new(lf.view_shape(), alpha)?;
    let views = lf
        .views()
        .iter()
        .map(|v| op.apply_image(v))
        .collect::<Result<Vec<_>>>()?;
    LightField::new(lf.m(), views)
}
