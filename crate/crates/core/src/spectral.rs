//! Internal FFT helpers for square grids: axis-wise passes with real even
//! multipliers, full-plane multipliers, and phase translation.
//!
//! Axis passes with an even multiplier pack two real rows into one complex
//! transform (`z = a + i b`); an even real multiplier preserves the Hermitian
//! split, so both rows come back exact. Phase translation and radial
//! multipliers need the genuine complex spectrum and skip the packing.

use crate::geometry::Axis;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
}

/// Signed wavenumber along `axis` for DFT bin `idx` out of `n`
/// (symmetric convention, Nyquist taken positive; only |k| matters here).
pub(crate) fn wavenumber(axis: Axis, idx: usize, n: usize) -> f64 {
    let s = if idx <= n / 2 { idx as f64 } else { idx as f64 - n as f64 };
    2.0 * std::f64::consts::PI * s / axis.extent()
}

impl Spectral {
    pub fn new(q: u32) -> Spectral {
        let n = 1usize << q;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            n,
            fwd,
            inv,
            line: vec![Complex::new(0.0, 0.0); n],
            fft_scratch: vec![Complex::new(0.0, 0.0); scratch],
        }
    }

    /// Builds the multiplier table `m(k)` for one axis.
    pub fn axis_table(&self, axis: Axis, mut m: impl FnMut(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| m(wavenumber(axis, i, self.n))).collect()
    }

    // Filter the packed pair (a, b) by the even real table, in place.
    fn filter_pair(&mut self, a: &mut [f64], b: &mut [f64], table: &[f64]) {
        let n = self.n;
        for i in 0..n {
            self.line[i] = Complex::new(a[i], b[i]);
        }
        self.fwd.process_with_scratch(&mut self.line, &mut self.fft_scratch);
        for i in 0..n {
            self.line[i] *= table[i];
        }
        self.inv.process_with_scratch(&mut self.line, &mut self.fft_scratch);
        let scale = 1.0 / n as f64;
        for i in 0..n {
            a[i] = self.line[i].re * scale;
            b[i] = self.line[i].im * scale;
        }
    }

    /// Applies the even real multiplier `table[k]` to the DFT of every grid
    /// line along `axis`. `data` is row-major `n x n` (y-major).
    pub fn apply_axis_multiplier(&mut self, data: &mut [f64], axis: Axis, table: &[f64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        debug_assert_eq!(table.len(), n);
        match axis {
            Axis::X => {
                let mut rows = data.chunks_exact_mut(n);
                loop {
                    match (rows.next(), rows.next()) {
                        (Some(a), Some(b)) => self.filter_pair(a, b, table),
                        (Some(a), None) => {
                            let mut zero = vec![0.0; n];
                            self.filter_pair(a, &mut zero, table);
                            break;
                        }
                        _ => break,
                    }
                }
            }
            Axis::Y => {
                let mut col_a = vec![0.0; n];
                let mut col_b = vec![0.0; n];
                let mut ix = 0;
                while ix < n {
                    if ix + 1 < n {
                        for iy in 0..n {
                            col_a[iy] = data[iy * n + ix];
                            col_b[iy] = data[iy * n + ix + 1];
                        }
                        self.filter_pair(&mut col_a, &mut col_b, table);
                        for iy in 0..n {
                            data[iy * n + ix] = col_a[iy];
                            data[iy * n + ix + 1] = col_b[iy];
                        }
                        ix += 2;
                    } else {
                        for iy in 0..n {
                            col_a[iy] = data[iy * n + ix];
                        }
                        let mut zero = vec![0.0; n];
                        self.filter_pair(&mut col_a, &mut zero, table);
                        for iy in 0..n {
                            data[iy * n + ix] = col_a[iy];
                        }
                        ix += 1;
                    }
                }
            }
        }
    }

    // Full complex 2-D transform of `buf` (in place), direction chosen by `fft`.
    fn transform_2d(&mut self, buf: &mut [Complex<f64>], forward: bool) {
        let n = self.n;
        let fft = if forward { self.fwd.clone() } else { self.inv.clone() };
        for row in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.fft_scratch);
        }
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for ix in 0..n {
            for iy in 0..n {
                col[iy] = buf[iy * n + ix];
            }
            fft.process_with_scratch(&mut col, &mut self.fft_scratch);
            for iy in 0..n {
                buf[iy * n + ix] = col[iy];
            }
        }
    }

    /// Weighted spectral second moment `sum_k w(kx,ky) |f_k|^2 / n^4` (so a
    /// unit weight returns the mean of `f^2` by Parseval). One forward
    /// transform; used for L2-based multiplier norms.
    pub fn plane_moment(&mut self, data: &[f64], mut w: impl FnMut(f64, f64) -> f64) -> f64 {
        let n = self.n;
        let mut buf: Vec<Complex<f64>> =
            data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform_2d(&mut buf, true);
        let mut acc = 0.0;
        for iy in 0..n {
            let ky = wavenumber(Axis::Y, iy, n);
            for ix in 0..n {
                let kx = wavenumber(Axis::X, ix, n);
                acc += w(kx, ky) * buf[iy * n + ix].norm_sqr();
            }
        }
        acc / (n as f64).powi(4)
    }

    /// Applies the real multiplier `m(kx, ky)` on the full 2-D spectrum.
    pub fn apply_plane_multiplier(&mut self, data: &mut [f64], mut m: impl FnMut(f64, f64) -> f64) {
        let n = self.n;
        let mut buf: Vec<Complex<f64>> =
            data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform_2d(&mut buf, true);
        for iy in 0..n {
            let ky = wavenumber(Axis::Y, iy, n);
            for ix in 0..n {
                let kx = wavenumber(Axis::X, ix, n);
                buf[iy * n + ix] *= m(kx, ky);
            }
        }
        self.transform_2d(&mut buf, false);
        let scale = 1.0 / (n * n) as f64;
        for (d, z) in data.iter_mut().zip(&buf) {
            *d = z.re * scale;
        }
    }

    /// Translates by `(hx, hy)`: the band-limited interpolant is shifted
    /// exactly via the phase `exp(-i k . h)` (Nyquist mode kept cosine-real).
    pub fn translate(&mut self, data: &mut [f64], hx: f64, hy: f64) {
        let n = self.n;
        for (axis, h) in [(Axis::X, hx), (Axis::Y, hy)] {
            if h == 0.0 {
                continue;
            }
            let phase: Vec<Complex<f64>> = (0..n)
                .map(|i| {
                    let k = wavenumber(axis, i, n);
                    if i == n / 2 {
                        // Nyquist: average of e^{-ikh} over k = +/-|k| is real.
                        Complex::new((k * h).cos(), 0.0)
                    } else {
                        Complex::from_polar(1.0, -k * h)
                    }
                })
                .collect();
            match axis {
                Axis::X => {
                    for row in data.chunks_exact_mut(n) {
                        for i in 0..n {
                            self.line[i] = Complex::new(row[i], 0.0);
                        }
                        self.fwd.process_with_scratch(&mut self.line, &mut self.fft_scratch);
                        for i in 0..n {
                            self.line[i] *= phase[i];
                        }
                        self.inv.process_with_scratch(&mut self.line, &mut self.fft_scratch);
                        for i in 0..n {
                            row[i] = self.line[i].re / n as f64;
                        }
                    }
                }
                Axis::Y => {
                    for ix in 0..n {
                        for iy in 0..n {
                            self.line[iy] = Complex::new(data[iy * n + ix], 0.0);
                        }
                        self.fwd.process_with_scratch(&mut self.line, &mut self.fft_scratch);
                        for i in 0..n {
                            self.line[i] *= phase[i];
                        }
                        self.inv.process_with_scratch(&mut self.line, &mut self.fft_scratch);
                        for iy in 0..n {
                            data[iy * n + ix] = self.line[iy].re / n as f64;
                        }
                    }
                }
            }
        }
    }
}
