//! The experiment suite.
//!
//! Each submodule implements one numerical experiment and returns an
//! [`ExperimentReport`](crate::report::ExperimentReport). Shared helpers
//! (standard initial datum, record-time grids, adaptive stage depth)
//! live here.

pub mod baseflow;
pub mod converge;
pub mod dissipation;
pub mod energy_jumps;
pub mod enhancement;
pub mod intermittency;
pub mod pairs;
pub mod regularity;
pub mod richardson;
pub mod selftest;
pub mod sweep;

use anyhow::{bail, Result};
use cascade_core::field::ScalarField;
use cascade_core::flow::MixerParams;
use cascade_core::schedule::Schedule;

/// The standard mean-zero initial datum: the two-tile indicator pattern
/// shifted to values -1/2 and +1/2. It is measurable at level 1 and has
/// unit jump across the tile interface.
pub fn centered_half_datum(grid_exp: u32) -> Result<ScalarField> {
    Ok(ScalarField::theta0(grid_exp)?.offset(-0.5))
}

/// The largest level `i` such that the level-`i` box average of `f`
/// vanishes identically. Returns `None` when even the global mean is
/// nonzero. The scan is capped at level `2 * q` (single cells).
pub fn coarsest_silent_level(f: &ScalarField) -> Option<u32> {
    let mut silent = None;
    for level in 0..=(2 * f.q()) {
        let proj = match f.project(level) {
            Ok(p) => p,
            Err(_) => break,
        };
        let (lo, hi) = proj.min_max();
        if lo.abs().max(hi.abs()) > 1e-12 {
            break;
        }
        silent = Some(level);
    }
    silent
}

/// The time at which a datum whose coarsest silent level is `i` loses
/// the rest of its variance: the midpoint of mixing window `(i, i)`.
pub fn variance_death_time(sched: &Schedule, silent_level: u32) -> Result<f64> {
    let start = sched.s_time(silent_level, silent_level + 1)?;
    Ok(start + 0.5 * sched.sigma(silent_level))
}

/// Number of shear stages needed so that the cell size reached by the
/// cascade sits at the diffusive scale `sqrt(kappa * sigma_0)`:
/// roughly `log2(1 / (kappa * sigma_0)) / 2 + 1`, clamped to
/// `[floor, 16]`. Smaller diffusivities get deeper mixing so that each
/// window keeps erasing the variance it is responsible for.
pub fn adaptive_depth(kappa: f64, sigma_0: f64, floor: u32) -> u32 {
    let stages = (0.5 * (1.0 / (kappa * sigma_0)).log2()).ceil() + 1.0;
    let stages = stages.clamp(1.0, 16.0) as u32;
    stages.max(floor).min(16)
}

/// Record-time grid for full-interval runs: a coarse linear sweep,
/// window boundaries of epoch 0, stage boundaries inside the final
/// mixing window, and the terminal time. Shared by all diffusivities
/// in a sweep so that time integrals are directly comparable.
pub fn sweep_record_grid(sched: &Schedule, alpha: f64, max_depth: u32) -> Result<Vec<f64>> {
    let mut times: Vec<f64> = Vec::new();
    for k in 0..16 {
        times.push(0.05 + 0.79 * k as f64 / 15.0);
    }
    for j in [8u32, 6, 5, 4, 3, 2] {
        times.push(sched.s_time(0, j)?);
    }
    let s01 = sched.s_time(0, 1)?;
    let sigma0 = sched.sigma(0);
    let probe = MixerParams::new(alpha, max_depth.max(2))?;
    for k in 1..=max_depth.max(2) {
        times.push(s01 + probe.stage_start(k) * sigma0);
    }
    times.push(s01 + 0.5 * sigma0);
    times.push(s01 + 0.625 * sigma0);
    times.push(s01 + 0.8 * sigma0);
    times.push(1.0);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if times.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        bail!("record grid left [0, 1]");
    }
    Ok(times)
}

/// Trapezoid rule over a sorted time grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += 0.5 * (values[k] + values[k - 1]) * (times[k] - times[k - 1]);
    }
    acc
}

/// Geometric grid of `n` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n)
        .map(|k| (lo * ratio.powi(k as i32)).min(hi))
        .collect()
}
