//! Quadratic objective assembly and minimization.
//!
//! The joint reconstruction objective is F₁ + λ₂F₂ + λ₃F₃ with a per-view
//! data fidelity term, an inter-view warping consistency term, and a graph
//! Laplacian smoothness term. It is quadratic: F(u) = ½uᵀPu + qᵀu + r with
//! P symmetric positive semi-definite. P is applied matrix-free as a
//! composition of the degradation, warping, masking and Laplacian
//! operators. The outer proximal-point loop solves a strictly definite
//! system (P + I/β) per step with conjugate gradient.

use crate::degrade::BlurSampleOperator;
use crate::error::{Error, Result};
use crate::graph::{build_adjacency, laplacian, GraphParams, Laplacian};
use crate::lightfield::{devectorize, vectorize, LightField, VectorizedLightField};
use crate::warp::{build_warp_dr, build_warp_sq, masks_from_borders, MaskSet, WarpSet};
use ndarray::Array2;
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

/// Symmetric linear operator applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Solver parameters; the multipliers balance the objective terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda2: f64,
    pub lambda3: f64,
    /// Proximal step size; (P + I/beta) is positive definite for any beta > 0.
    pub beta: f64,
    /// Outer rounds rebuilding graph and warps on the current estimate.
    pub outer_iters: usize,
    pub ppa_iters: usize,
    /// Early exit when the relative PPA step norm drops below this.
    pub ppa_step_tol: f64,
    /// CG stop: relative residual.
    pub cg_tol: f64,
    pub cg_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda2: 0.2,
            lambda3: 0.0055,
            beta: 1.0,
            outer_iters: 2,
            ppa_iters: 30,
            ppa_step_tol: 1e-6,
            cg_tol: 1e-6,
            cg_max_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda2 >= 0.0 && self.lambda3 >= 0.0) {
            return Err(Error::Config(format!(
                "multipliers must be nonnegative, got lambda2={} lambda3={}",
                self.lambda2, self.lambda3
            )));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.cg_tol > 0.0 && self.ppa_step_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if self.cg_max_iters == 0 {
            return Err(Error::Config("cg_max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The system matrix P = 2(AᵀA + λ₂ Σ (H A F)ᵀ(H A F) + λ₃ L) applied as a
/// composition; A is the per-view degradation, F the warps, H the masks.
pub struct SystemOperator {
    sb: BlurSampleOperator,
    warps: WarpSet,
    masks: MaskSet,
    lap: Laplacian,
    lambda2: f64,
    lambda3: f64,
    /// For each source view: the target views it is warped into.
    by_source: Vec<Vec<usize>>,
}

impl SystemOperator {
    pub fn warps(&self) -> &WarpSet {
        &self.warps
    }

    pub fn masks(&self) -> &MaskSet {
        &self.masks
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.lap
    }
}

impl LinearOperator for SystemOperator {
    fn dim(&self) -> usize {
        self.warps.layout().total_len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let layout = self.warps.layout();
        let v = layout.view_len();
        assert_eq!(x.len(), layout.total_len());
        assert_eq!(y.len(), layout.total_len());
        if self.lambda3 != 0.0 {
            self.lap.apply_into(x, y);
        } else {
            y.fill(0.0);
        }
        let lambda2 = self.lambda2;
        let lambda3 = self.lambda3;
        y.par_chunks_mut(v).enumerate().for_each(|(k0, yk)| {
            let xk = &x[k0 * v..(k0 + 1) * v];
            if lambda3 != 0.0 {
                for t in yk.iter_mut() {
                    *t *= lambda3;
                }
            }
            let mut lo = vec![0.0; self.sb.lo_len()];
            let mut hi = vec![0.0; v];
            self.sb.apply_vec(xk, &mut lo);
            self.sb.apply_adjoint_vec(&lo, &mut hi);
            for (t, h) in yk.iter_mut().zip(&hi) {
                *t += h;
            }
            if lambda2 != 0.0 {
                for &tk0 in &self.by_source[k0] {
                    let f = self.warps.get(tk0, k0).expect("indexed warp");
                    let h = self.masks.get(tk0, k0).expect("warp has a mask");
                    let w = f.apply(xk);
                    self.sb.apply_vec(&w, &mut lo);
                    for (l, m) in lo.iter_mut().zip(h) {
                        *l *= m;
                    }
                    self.sb.apply_adjoint_vec(&lo, &mut hi);
                    let ft = f.apply_transpose(&hi);
                    for (t, g) in yk.iter_mut().zip(&ft) {
                        *t += lambda2 * g;
                    }
                }
            }
            for t in yk.iter_mut() {
                *t *= 2.0;
            }
        });
    }
}

/// Assembled quadratic F(u) = ½uᵀPu + qᵀu + r.
pub struct QuadraticProblem<Op: LinearOperator> {
    pub operator: Op,
    pub q: Vec<f64>,
    pub r: f64,
}

impl<Op: LinearOperator> QuadraticProblem<Op> {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// ½uᵀPu + qᵀu + r.
    pub fn value(&self, u: &[f64]) -> f64 {
        let pu = self.operator.apply(u);
        0.5 * dot(u, &pu) + dot(&self.q, u) + self.r
    }

    /// ∇F(u) = Pu + q.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.operator.apply(u);
        for (gi, qi) in g.iter_mut().zip(&self.q) {
            *gi += qi;
        }
        g
    }
}

/// Builds P, q, r from the assembled components. All shapes must agree:
/// v is the vectorized low-resolution field, warps/masks/Laplacian live at
/// high resolution, sb maps one high-resolution view to one low-resolution
/// view.
pub fn assemble(
    v: &VectorizedLightField,
    warps: WarpSet,
    masks: MaskSet,
    lap: Laplacian,
    sb: BlurSampleOperator,
    cfg: &SolverConfig,
) -> Result<QuadraticProblem<SystemOperator>> {
    cfg.validate()?;
    let hi_layout = warps.layout();
    let m2 = hi_layout.m * hi_layout.m;
    if v.layout.m != hi_layout.m {
        return Err(Error::Config(format!(
            "angular grids differ: {} views vs {}",
            v.layout.m, hi_layout.m
        )));
    }
    if (v.layout.n_r, v.layout.n_c) != sb.lo_shape()
        || (hi_layout.n_r, hi_layout.n_c) != sb.hi_shape()
    {
        return Err(Error::Config(format!(
            "operator maps {:?} to {:?}, fields are {:?} and {:?}",
            sb.hi_shape(),
            sb.lo_shape(),
            (hi_layout.n_r, hi_layout.n_c),
            (v.layout.n_r, v.layout.n_c)
        )));
    }
    if lap.n() != hi_layout.total_len() {
        return Err(Error::Config(format!(
            "Laplacian has {} vertices, field has {}",
            lap.n(),
            hi_layout.total_len()
        )));
    }
    if masks.lo_len() != sb.lo_len() {
        return Err(Error::Config(format!(
            "masks cover {} pixels, operator produces {}",
            masks.lo_len(),
            sb.lo_len()
        )));
    }
    for ((tk0, sk0), _) in warps.pairs() {
        if masks.get(tk0, sk0).is_none() {
            return Err(Error::Config(format!(
                "missing mask for warp pair ({tk0}, {sk0})"
            )));
        }
    }
    let mut by_source = vec![Vec::new(); m2];
    for ((tk0, sk0), _) in warps.pairs() {
        by_source[sk0].push(tk0);
    }

    let hv = hi_layout.view_len();
    let mut q = vec![0.0; hi_layout.total_len()];
    q.par_chunks_mut(hv).enumerate().for_each(|(k0, qk)| {
        let mut hi = vec![0.0; hv];
        sb.apply_adjoint_vec(v.view_slice(k0), &mut hi);
        qk.copy_from_slice(&hi);
        if cfg.lambda2 != 0.0 {
            let mut masked = vec![0.0; sb.lo_len()];
            for &tk0 in &by_source[k0] {
                let f = warps.get(tk0, k0).expect("indexed warp");
                let h = masks.get(tk0, k0).expect("checked above");
                for ((mo, &vt), &hm) in masked.iter_mut().zip(v.view_slice(tk0)).zip(h) {
                    *mo = vt * hm;
                }
                sb.apply_adjoint_vec(&masked, &mut hi);
                let ft = f.apply_transpose(&hi);
                for (t, g) in qk.iter_mut().zip(&ft) {
                    *t += cfg.lambda2 * g;
                }
            }
        }
        for t in qk.iter_mut() {
            *t *= -2.0;
        }
    });

    let mut r = dot(&v.data, &v.data);
    if cfg.lambda2 != 0.0 {
        for ((tk0, sk0), _) in warps.pairs() {
            let h = masks.get(tk0, sk0).expect("checked above");
            let vt = v.view_slice(tk0);
            r += cfg.lambda2 * vt.iter().zip(h).map(|(a, m)| m * a * a).sum::<f64>();
        }
    }

    Ok(QuadraticProblem {
        operator: SystemOperator {
            sb,
            warps,
            masks,
            lap,
            lambda2: cfg.lambda2,
            lambda3: cfg.lambda3,
            by_source,
        },
        q,
        r,
    })
}

/// Objective F₁ + λ₂F₂ + λ₃F₃ evaluated from the definitional sums, not
/// through the assembled quadratic form.
pub fn objective(
    u: &[f64],
    v: &VectorizedLightField,
    warps: &WarpSet,
    masks: &MaskSet,
    lap: &Laplacian,
    sb: &BlurSampleOperator,
    cfg: &SolverConfig,
) -> f64 {
    let hi_layout = warps.layout();
    let hv = hi_layout.view_len();
    let m2 = hi_layout.m * hi_layout.m;
    let mut lo = vec![0.0; sb.lo_len()];
    let mut f1 = 0.0;
    for k0 in 0..m2 {
        sb.apply_vec(&u[k0 * hv..(k0 + 1) * hv], &mut lo);
        let vk = v.view_slice(k0);
        f1 += lo
            .iter()
            .zip(vk)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    let mut f2 = 0.0;
    for ((tk0, sk0), f) in warps.pairs() {
        let w = f.apply(&u[sk0 * hv..(sk0 + 1) * hv]);
        sb.apply_vec(&w, &mut lo);
        let h = masks.get(tk0, sk0).expect("warp has a mask");
        let vt = v.view_slice(tk0);
        f2 += lo
            .iter()
            .zip(vt)
            .zip(h)
            .map(|((a, b), m)| {
                let d = m * (a - b);
                d * d
            })
            .sum::<f64>();
    }
    let f3 = lap.quadratic_form(u);
    f1 + cfg.lambda2 * f2 + cfg.lambda3 * f3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradient on a symmetric positive-definite operator; stops at
/// relative residual ≤ tol or after max_iters. Dot products are sequential,
/// so results do not depend on thread count.
pub fn cg_solve<Op: LinearOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x0.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        // The unique solution of Ax = 0 for positive-definite A.
        return Ok((
            vec![0.0; n],
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut x = x0.to_vec();
    let mut ap = vec![0.0; n];
    op.apply_into(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut rz = dot(&r, &r);
    let mut rel = rz.sqrt() / bnorm;
    if rel <= tol {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                relative_residual: rel,
            },
        ));
    }
    let mut p = r.clone();
    let mut iterations = 0;
    while iterations < max_iters {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::Numerical(format!(
                "conjugate gradient breakdown at iteration {iterations}: pᵀAp = {pap}"
            )));
        }
        let alpha = rz / pap;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, api) in r.iter_mut().zip(&ap) {
            *ri -= alpha * api;
        }
        let rz_new = dot(&r, &r);
        if !rz_new.is_finite() {
            return Err(Error::Numerical(format!(
                "conjugate gradient produced a non-finite residual at iteration {iterations}"
            )));
        }
        iterations += 1;
        rel = rz_new.sqrt() / bnorm;
        if rel <= tol {
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Ok((
        x,
        CgStats {
            iterations,
            relative_residual: rel,
        },
    ))
}

/// inner + shift·I; shifting a PSD operator by 1/β makes it definite.
pub struct ShiftedOperator<'a, Op: LinearOperator> {
    pub inner: &'a Op,
    pub shift: f64,
}

impl<'a, Op: LinearOperator> LinearOperator for ShiftedOperator<'a, Op> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += self.shift * xi;
        }
    }
}

/// Record of one proximal-point run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Objective at the start, then after every step; non-increasing.
    pub objectives: Vec<f64>,
    pub cg_iterations: Vec<usize>,
    pub cg_residuals: Vec<f64>,
    pub wall_seconds: f64,
}

impl SolveReport {
    pub fn steps(&self) -> usize {
        self.cg_iterations.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.cg_residuals.last().copied()
    }

    /// Plain-text table: step, objective, CG iterations, CG residual.
    pub fn write_table<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "step  objective      cg_iters  cg_residual")?;
        writeln!(out, "0     {:<14.7e} -         -", self.objectives[0])?;
        for i in 0..self.steps() {
            writeln!(
                out,
                "{:<5} {:<14.7e} {:<9} {:.3e}",
                i + 1,
                self.objectives[i + 1],
                self.cg_iterations[i],
                self.cg_residuals[i]
            )?;
        }
        writeln!(out, "wall_seconds {:.3}", self.wall_seconds)
    }
}

/// Proximal-point minimization of ½uᵀPu + qᵀu + r from u0: each step solves
/// (P + I/β)u = z/β − q with CG warm-started at z, until ppa_iters steps or
/// the relative step norm falls below the tolerance.
pub fn ppa_minimize<Op: LinearOperator>(
    problem: &QuadraticProblem<Op>,
    u0: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = problem.dim();
    assert_eq!(u0.len(), n);
    let start = Instant::now();
    let shifted = ShiftedOperator {
        inner: &problem.operator,
        shift: 1.0 / cfg.beta,
    };
    let mut z = u0.to_vec();
    let mut objectives = vec![problem.value(&z)];
    let mut cg_iterations = Vec::new();
    let mut cg_residuals = Vec::new();
    for step in 0..cfg.ppa_iters {
        let b: Vec<f64> = z
            .iter()
            .zip(&problem.q)
            .map(|(zi, qi)| zi / cfg.beta - qi)
            .collect();
        let (x, stats) = cg_solve(&shifted, &b, &z, cfg.cg_tol, cfg.cg_max_iters)
            .map_err(|e| Error::Numerical(format!("PPA step {}: {e}", step + 1)))?;
        cg_iterations.push(stats.iterations);
        cg_residuals.push(stats.relative_residual);
        let step_norm: f64 = x
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let rel_step = step_norm / norm(&z).max(1e-30);
        z = x;
        objectives.push(problem.value(&z));
        if rel_step <= cfg.ppa_step_tol {
            break;
        }
    }
    Ok((
        z,
        SolveReport {
            objectives,
            cg_iterations,
            cg_residuals,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Separable bilinear interpolation to alpha× size with the half-pixel
/// convention: hi pixel i samples the lo coordinate (i + 0.5)/alpha − 0.5,
/// clamped at borders. Consistent with block-mean degradation: affine
/// ramps are reproduced exactly away from borders.
pub fn bilinear_upsample(img: &Array2<f64>, alpha: usize) -> Array2<f64> {
    assert!(alpha >= 1);
    if alpha == 1 {
        return img.clone();
    }
    let (nr, nc) = img.dim();
    let axis = |n_hi: usize, n_lo: usize| -> Vec<(usize, usize, f64)> {
        (0..n_hi)
            .map(|i| {
                let p = (i as f64 + 0.5) / alpha as f64 - 0.5;
                if p <= 0.0 {
                    (0, 0, 0.0)
                } else if p >= (n_lo - 1) as f64 {
                    (n_lo - 1, n_lo - 1, 0.0)
                } else {
                    let f = p.floor();
                    (f as usize, f as usize + 1, p - f)
                }
            })
            .collect()
    };
    let rows = axis(nr * alpha, nr);
    let cols = axis(nc * alpha, nc);
    Array2::from_shape_fn((nr * alpha, nc * alpha), |(i, j)| {
        let (r0, r1, fr) = rows[i];
        let (c0, c1, fc) = cols[j];
        img[[r0, c0]] * (1.0 - fr) * (1.0 - fc)
            + img[[r0, c1]] * (1.0 - fr) * fc
            + img[[r1, c0]] * fr * (1.0 - fc)
            + img[[r1, c1]] * fr * fc
    })
}

/// Bilinear upsampling of every view.
pub fn upsample_lightfield(lf: &LightField, alpha: usize) -> Result<LightField> {
    let views = lf
        .views()
        .iter()
        .map(|v| bilinear_upsample(v, alpha))
        .collect();
    LightField::new(lf.m(), views)
}

/// Which warping construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpVariant {
    Sq,
    Dr,
}

impl std::str::FromStr for WarpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sq" => Ok(WarpVariant::Sq),
            "dr" => Ok(WarpVariant::Dr),
            other => Err(Error::Config(format!(
                "unknown warp variant '{other}' (expected sq or dr)"
            ))),
        }
    }
}

impl std::fmt::Display for WarpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WarpVariant::Sq => "sq",
            WarpVariant::Dr => "dr",
        })
    }
}

/// Joint super-resolution of one luma light field: bilinear bootstrap,
/// then `outer_iters` rounds of rebuilding the graph and warps on the
/// current estimate, reassembling the quadratic, and minimizing with the
/// proximal-point loop warm-started from the estimate. The final output is
/// clamped to [0,1].
pub fn super_resolve(
    v_lo: &LightField,
    alpha: usize,
    cfg: &SolverConfig,
    params: &GraphParams,
    variant: WarpVariant,
) -> Result<(LightField, Vec<SolveReport>)> {
    cfg.validate()?;
    params.validate()?;
    let (lo_nr, lo_nc) = v_lo.view_shape();
    let sb = BlurSampleOperator::new((lo_nr * alpha, lo_nc * alpha), alpha)?;
    let mut est = upsample_lightfield(v_lo, alpha)?;
    let v = vectorize(v_lo);
    let mut u = vectorize(&est).data;
    let mut reports = Vec::new();
    for _round in 0..cfg.outer_iters {
        let adj = build_adjacency(&est, params)?;
        let lap = laplacian(&adj);
        let (warps, masks) = match variant {
            WarpVariant::Sq => build_warp_sq(&est, params, &sb)?,
            WarpVariant::Dr => {
                let warps = build_warp_dr(&adj)?;
                let masks = masks_from_borders(&warps, &sb)?;
                (warps, masks)
            }
        };
        let problem = assemble(&v, warps, masks, lap, sb.clone(), cfg)?;
        let (u_new, report) = ppa_minimize(&problem, &u, cfg)?;
        u = u_new;
        reports.push(report);
        est = devectorize(&VectorizedLightField {
            data: u.clone(),
            layout: est.layout(),
        })?;
    }
    est.clamp_unit();
    Ok((est, reports))
}
