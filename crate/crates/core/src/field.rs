//! Cell-averaged scalar fields on the periodic box, with tile projections,
//! the heat semigroup, translations, and the norm family used by the
//! experiments.
//!
//! The grid is `2^q x 2^q` cells of size `(sqrt(2)/2^q, 1/2^q)`, stored
//! row-major with y as the slow index. Cell averages make tile projections
//! and whole-cell translations exact; spectral operations treat the same
//! array as point samples of the band-limited interpolant.

use crate::error::{CascadeError, Result};
use crate::geometry::{self, Axis, BoxId, HEIGHT, WIDTH};
use crate::spectral::Spectral;
use std::io::Write as _;
use std::path::Path;

/// Norm selector for [`ScalarField::norm`].
///
/// `p` is a float so fractional exponents work; `f64::INFINITY` selects the
/// sup norm. `SobolevRiesz` and `BesovSup` always drop the mean (the zero
/// mode carries no smoothness information and `|k|^s` is singular there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// Lebesgue `L^p` by cell quadrature.
    Lp(f64),
    /// `|| |k|^s f ||_{L^p}` via the full-plane Fourier multiplier.
    SobolevRiesz { s: f64, p: f64 },
    /// `sup_h |h|^{-s} ||f(.+h) - f||_{L^p}` over dyadic whole-cell shifts
    /// along either axis (1 cell up to half the domain).
    BesovSup { s: f64, p: f64 },
    /// Sum over grid edges of |jump| x edge length (anisotropic discrete TV).
    DiscreteTV,
}

impl NormSpec {
    fn validate(&self) -> Result<()> {
        let check_p = |p: f64| -> Result<()> {
            if p >= 1.0 {
                Ok(())
            } else {
                Err(CascadeError::InvalidParam(format!("norm exponent p must be >= 1, got {p}")))
            }
        };
        match *self {
            NormSpec::Lp(p) => check_p(p),
            NormSpec::SobolevRiesz { s, p } | NormSpec::BesovSup { s, p } => {
                check_p(p)?;
                if s > -2.0 && s < 2.0 {
                    Ok(())
                } else {
                    Err(CascadeError::InvalidParam(format!(
                        "smoothness s must lie in (-2, 2), got {s}"
                    )))
                }
            }
            NormSpec::DiscreteTV => Ok(()),
        }
    }
}

/// A real scalar field of cell averages on the `2^q x 2^q` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    q: u32,
    n: usize,
    data: Vec<f64>,
}

impl ScalarField {
    /// Constant field.
    pub fn constant(q: u32, value: f64) -> ScalarField {
        let n = 1usize << q;
        ScalarField { q, n, data: vec![value; n * n] }
    }

    /// Field sampled at cell centers (midpoint quadrature of the averages).
    pub fn from_fn(q: u32, mut f: impl FnMut(f64, f64) -> f64) -> ScalarField {
        let n = 1usize << q;
        let (w, h) = (WIDTH / n as f64, HEIGHT / n as f64);
        let mut data = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = (iy as f64 + 0.5) * h;
            for ix in 0..n {
                data.push(f((ix as f64 + 0.5) * w, y));
            }
        }
        ScalarField { q, n, data }
    }

    /// Field from raw cell averages (row-major, `iy * n + ix`).
    pub fn from_cells(q: u32, data: Vec<f64>) -> Result<ScalarField> {
        let n = 1usize << q;
        if data.len() != n * n {
            return Err(CascadeError::InvalidParam(format!(
                "expected {} cells for grid exponent {q}, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(ScalarField { q, n, data })
    }

    /// Pointwise map of the cell averages.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { q: self.q, n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Field taking `values[tile]` on each level-`level` tile
    /// (tiles indexed as `iy * count_x + ix`).
    pub fn from_tile_values(q: u32, level: u32, values: &[f64]) -> Result<ScalarField> {
        let (cw, ch) = geometry::cells_per_tile(level, q)?;
        let (cx, cy) = geometry::box_counts(level);
        if values.len() as u64 != cx * cy {
            return Err(CascadeError::InvalidParam(format!(
                "expected {} tile values for level {level}, got {}",
                cx * cy,
                values.len()
            )));
        }
        let n = 1usize << q;
        let mut data = vec![0.0; n * n];
        for iy in 0..n {
            let by = iy / ch;
            for ix in 0..n {
                let bx = ix / cw;
                data[iy * n + ix] = values[by * cx as usize + bx];
            }
        }
        Ok(ScalarField { q, n, data })
    }

    /// The left-half indicator: 1 where `x < sqrt(2)/2`, else 0.
    pub fn theta0(q: u32) -> Result<ScalarField> {
        ScalarField::two_cell(q, 0.0, 1.0, BoxId { level: 0, ix: 0, iy: 0 })
    }

    /// Two-value data on one tile: the tile `id` is split across its long
    /// axis; the half nearer the origin takes `a1`, the other `a0`. Cells
    /// outside the tile carry the mean `(a0+a1)/2`, so projecting at
    /// `id.level` yields that constant everywhere.
    pub fn two_cell(q: u32, a0: f64, a1: f64, id: BoxId) -> Result<ScalarField> {
        // The split line is a level-(id.level + 1) tile edge.
        let (cw, ch) = geometry::cells_per_tile(id.level + 1, q)?;
        let n = 1usize << q;
        let axis = geometry::long_axis(id.level);
        let mut out = ScalarField::constant(q, 0.5 * (a0 + a1));
        // Cell span of the parent tile.
        let (x0, y0, x1, y1) = match axis {
            Axis::X => {
                let (px, py) = (2 * cw, ch);
                (id.ix as usize * px, id.iy as usize * py, (id.ix as usize + 1) * px, (id.iy as usize + 1) * py)
            }
            Axis::Y => {
                let (px, py) = (cw, 2 * ch);
                (id.ix as usize * px, id.iy as usize * py, (id.ix as usize + 1) * px, (id.iy as usize + 1) * py)
            }
        };
        if x1 > n || y1 > n {
            return Err(CascadeError::InvalidParam(format!(
                "tile ({}, {}) out of range at level {}",
                id.ix, id.iy, id.level
            )));
        }
        for iy in y0..y1 {
            for ix in x0..x1 {
                let lower = match axis {
                    Axis::X => ix - x0 < cw,
                    Axis::Y => iy - y0 < ch,
                };
                out.data[iy * n + ix] = if lower { a1 } else { a0 };
            }
        }
        Ok(out)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell dims `(sqrt(2)/2^q, 1/2^q)`.
    pub fn cell_dims(&self) -> (f64, f64) {
        (WIDTH / self.n as f64, HEIGHT / self.n as f64)
    }

    pub fn cell_area(&self) -> f64 {
        let (w, h) = self.cell_dims();
        w * h
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Value of cell `(ix, iy)`.
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.n + ix]
    }

    /// Domain mean.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Integral over the box (mean x area).
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.cell_area()
    }

    /// Squared L2 norm (the tracked energy).
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() * self.cell_area()
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn check_same_grid(&self, rhs: &ScalarField) -> Result<()> {
        if self.q == rhs.q {
            Ok(())
        } else {
            Err(CascadeError::GridMismatch { expected: self.q, got: rhs.q })
        }
    }

    /// Cellwise difference.
    pub fn sub(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(ScalarField { q: self.q, n: self.n, data })
    }

    /// Cellwise sum.
    pub fn add(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(ScalarField { q: self.q, n: self.n, data })
    }

    /// Scalar multiple.
    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField { q: self.q, n: self.n, data: self.data.iter().map(|v| c * v).collect() }
    }

    /// Adds the constant `c` to every cell.
    pub fn offset(&self, c: f64) -> ScalarField {
        ScalarField { q: self.q, n: self.n, data: self.data.iter().map(|v| v + c).collect() }
    }

    /// Replaces each cell by the mean over its level-`level` tile.
    ///
    /// Exact on cell averages; preserves the integral; idempotent; for
    /// `j <= n`, projecting at `n` then `j` equals projecting at `j`.
    /// Tiles at or below cell size leave cell averages unchanged, so deep
    /// levels return the field as-is.
    pub fn project(&self, level: u32) -> Result<ScalarField> {
        let Ok((cw, ch)) = geometry::cells_per_tile(level, self.q) else {
            return Ok(self.clone());
        };
        let n = self.n;
        let mut out = vec![0.0; n * n];
        let inv = 1.0 / (cw * ch) as f64;
        for by in 0..n / ch {
            for bx in 0..n / cw {
                let mut acc = 0.0;
                for iy in by * ch..(by + 1) * ch {
                    for ix in bx * cw..(bx + 1) * cw {
                        acc += self.data[iy * n + ix];
                    }
                }
                let mean = acc * inv;
                for iy in by * ch..(by + 1) * ch {
                    for ix in bx * cw..(bx + 1) * cw {
                        out[iy * n + ix] = mean;
                    }
                }
            }
        }
        Ok(ScalarField { q: self.q, n, data: out })
    }

    /// Heat semigroup at diffusion time `tau`: Fourier multiplier
    /// `exp(-tau |k|^2)`, applied as two axis passes. Mean is re-pinned to
    /// machine accuracy afterwards.
    pub fn heat(&self, tau: f64) -> ScalarField {
        let mut out = self.clone();
        if tau > 0.0 {
            let mut sp = Spectral::new(self.q);
            out.heat_in_place(tau, &mut sp);
        }
        out
    }

    pub(crate) fn heat_in_place(&mut self, tau: f64, sp: &mut Spectral) {
        if tau <= 0.0 {
            return;
        }
        let before = self.mean();
        let tx = sp.axis_table(Axis::X, |k| (-tau * k * k).exp());
        let ty = sp.axis_table(Axis::Y, |k| (-tau * k * k).exp());
        sp.apply_axis_multiplier(&mut self.data, Axis::X, &tx);
        sp.apply_axis_multiplier(&mut self.data, Axis::Y, &ty);
        let drift = before - self.mean();
        if drift != 0.0 {
            for v in &mut self.data {
                *v += drift;
            }
        }
    }

    /// Spectral Laplacian (sum of the two axis second derivatives).
    pub fn laplacian(&self) -> ScalarField {
        let mut sp = Spectral::new(self.q);
        self.laplacian_with(&mut sp)
    }

    pub(crate) fn laplacian_with(&self, sp: &mut Spectral) -> ScalarField {
        let tx = sp.axis_table(Axis::X, |k| -k * k);
        let ty = sp.axis_table(Axis::Y, |k| -k * k);
        let mut dxx = self.data.clone();
        sp.apply_axis_multiplier(&mut dxx, Axis::X, &tx);
        let mut dyy = self.data.clone();
        sp.apply_axis_multiplier(&mut dyy, Axis::Y, &ty);
        for (a, b) in dxx.iter_mut().zip(&dyy) {
            *a += b;
        }
        ScalarField { q: self.q, n: self.n, data: dxx }
    }

    /// Exact circular shift by whole cells: `out(c) = in(c - (dx, dy))`.
    pub fn shift_cells(&self, dx: i64, dy: i64) -> ScalarField {
        let n = self.n as i64;
        let dx = dx.rem_euclid(n) as usize;
        let dy = dy.rem_euclid(n) as usize;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for iy in 0..n {
            let src_y = (iy + n - dy) % n;
            let dst = &mut data[iy * n..(iy + 1) * n];
            let src = &self.data[src_y * n..(src_y + 1) * n];
            dst[dx..].copy_from_slice(&src[..n - dx]);
            dst[..dx].copy_from_slice(&src[n - dx..]);
        }
        ScalarField { q: self.q, n, data }
    }

    /// Translation `f(. - h)`. Whole-cell components shift exactly; any
    /// sub-cell remainder is applied as a spectral phase shift.
    pub fn translate(&self, hx: f64, hy: f64) -> ScalarField {
        let (w, h) = self.cell_dims();
        let (sx, sy) = (hx / w, hy / h);
        let (rx, ry) = (sx.round(), sy.round());
        let mut out = self.shift_cells(rx as i64, ry as i64);
        let (fx, fy) = ((sx - rx) * w, (sy - ry) * h);
        if fx.abs() > 1e-12 * w || fy.abs() > 1e-12 * h {
            let mut sp = Spectral::new(self.q);
            sp.translate(&mut out.data, fx, fy);
        }
        out
    }

    /// Evaluates the selected norm.
    pub fn norm(&self, spec: NormSpec) -> Result<f64> {
        spec.validate()?;
        match spec {
            NormSpec::Lp(p) => Ok(self.lp(&self.data, p)),
            NormSpec::SobolevRiesz { s, p } => {
                let mut sp = Spectral::new(self.q);
                if p == 2.0 {
                    // Parseval: one forward transform instead of a round trip.
                    let m2 = sp.plane_moment(&self.data, |kx, ky| {
                        let k2 = kx * kx + ky * ky;
                        if k2 == 0.0 {
                            0.0
                        } else {
                            k2.powf(s)
                        }
                    });
                    return Ok((m2 * WIDTH * HEIGHT).sqrt());
                }
                let mut g = self.data.clone();
                sp.apply_plane_multiplier(&mut g, |kx, ky| {
                    let k2 = kx * kx + ky * ky;
                    if k2 == 0.0 {
                        0.0
                    } else {
                        k2.powf(s / 2.0)
                    }
                });
                Ok(self.lp(&g, p))
            }
            NormSpec::BesovSup { s, p } => {
                let mut best: f64 = 0.0;
                let (w, h) = self.cell_dims();
                for c in 0..self.q {
                    let cells = 1i64 << c;
                    for (dx, dy, len) in [
                        (cells, 0, cells as f64 * w),
                        (0, cells, cells as f64 * h),
                    ] {
                        let diff = self.shift_cells(dx, dy).sub(self)?;
                        let val = len.powf(-s) * self.lp(&diff.data, p);
                        best = best.max(val);
                    }
                }
                Ok(best)
            }
            NormSpec::DiscreteTV => {
                let n = self.n;
                let (w, h) = self.cell_dims();
                let mut tv = 0.0;
                for iy in 0..n {
                    for ix in 0..n {
                        let v = self.data[iy * n + ix];
                        let right = self.data[iy * n + (ix + 1) % n];
                        let up = self.data[((iy + 1) % n) * n + ix];
                        tv += (right - v).abs() * h + (up - v).abs() * w;
                    }
                }
                Ok(tv)
            }
        }
    }

    // L^p of raw cell values under this grid's quadrature.
    fn lp(&self, vals: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let area = self.cell_area();
        if p == 2.0 {
            (vals.iter().map(|v| v * v).sum::<f64>() * area).sqrt()
        } else if p == 1.0 {
            vals.iter().map(|v| v.abs()).sum::<f64>() * area
        } else {
            (vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() * area).powf(1.0 / p)
        }
    }

    /// Writes the field as a binary 8-bit graymap (`P5`). Values map
    /// linearly from `[min, max]` onto `[0, 255]` (flat fields map to 0);
    /// the actual range is recorded in a header comment. Rows are written
    /// top-down, i.e. the last grid row first.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let (lo, hi) = self.min_max();
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut bytes = Vec::with_capacity(self.n * self.n);
        for iy in (0..self.n).rev() {
            for ix in 0..self.n {
                let v = (self.data[iy * self.n + ix] - lo) / span;
                bytes.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        let mut out = std::fs::File::create(path)?;
        write!(out, "P5\n# range {lo:.6e} {hi:.6e}\n{} {}\n255\n", self.n, self.n)?;
        out.write_all(&bytes)?;
        Ok(())
    }
}
