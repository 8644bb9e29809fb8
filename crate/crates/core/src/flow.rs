//! The banded shear mixer and the global velocity field built from it.
//!
//! One mixing window runs the mixer on local time `[0, 1]`: stage `k`
//! (duration `d_k = c_a 2^{-(1-a)k}`, `c_a = (1 - 2^{-(1-a)})/2`, so all
//! stages together fill exactly `[0, 1/2)`) refines a two-stripe pattern into
//! ever finer checkerboards with two shear substeps:
//!
//! * long-axis substep: bands across the short axis, half the current
//!   pattern height, displaced by one current pattern cell along the long
//!   axis — `(2,1) -> (2,2)` in pattern cells;
//! * short-axis substep: the transverse analog — `(2,2) -> (4,2)`.
//!
//! Within each box the bands displaced are those with in-box index
//! `1, 2 mod 4` (just index 1 when there are only two); this offset-pair
//! choice is what turns a checkerboard into the next exact checkerboard
//! rather than a brick pattern. Displacements wrap within the box, so box
//! means are invariant. Per-stage speeds scale like `2^{-ak}`, giving the
//! Hölder budget; the local velocity vanishes on `[1/2, 1]`.
//!
//! The global field replays the mixer inside every window `(i, j)` of the
//! lattice, rescaled in time by `sigma_j` and in space to level-`j` boxes
//! (same phase in every box), and vanishes in pauses and below truncation.

use crate::error::{CascadeError, Result};
use crate::geometry::{self, Axis, TorusPoint};
use crate::schedule::{Schedule, TimeLabel};
use std::io::{BufRead, Write};

/// Which of a stage's two shear substeps an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substep {
    /// Shear along the box's long axis (first half of the stage).
    LongAxis,
    /// Shear along the box's short axis (second half).
    ShortAxis,
}

/// Mixer configuration: Hölder exponent, stage count, and optional band
/// profile smoothing (fraction of the band width used for the velocity
/// transition; 0 = square-wave bands, exact cell permutations).
#[derive(Debug, Clone, Copy)]
pub struct MixerParams {
    alpha: f64,
    depth: u32,
    delta: f64,
}

impl MixerParams {
    pub fn new(alpha: f64, depth: u32) -> Result<MixerParams> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CascadeError::InvalidParam(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if depth == 0 {
            return Err(CascadeError::InvalidParam("mixer depth must be >= 1".into()));
        }
        Ok(MixerParams { alpha, depth, delta: 0.0 })
    }

    /// Same mixer with smoothed band profiles of relative width `delta`.
    pub fn with_smoothing(self, delta: f64) -> Result<MixerParams> {
        if !(0.0..0.5).contains(&delta) {
            return Err(CascadeError::InvalidParam(format!(
                "smoothing fraction must lie in [0, 0.5), got {delta}"
            )));
        }
        Ok(MixerParams { delta, ..self })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of stages K.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn smoothing(&self) -> f64 {
        self.delta
    }

    /// Stage-duration prefactor `c_a = (1 - 2^{-(1-a)}) / 2`.
    pub fn c_alpha(&self) -> f64 {
        0.5 * (1.0 - (-(1.0 - self.alpha)).exp2())
    }

    /// Duration `d_k` of stage `k` in local time.
    pub fn stage_duration(&self, k: u32) -> f64 {
        self.c_alpha() * (-(1.0 - self.alpha) * k as f64).exp2()
    }

    /// Start time `T_k = (1 - 2^{-(1-a)k}) / 2` of stage `k`; `T_0 = 0`.
    pub fn stage_start(&self, k: u32) -> f64 {
        0.5 * (1.0 - (-(1.0 - self.alpha) * k as f64).exp2())
    }

    /// End of the last stage, `T_K < 1/2`; the mixer is quiet on `[T_K, 1]`.
    pub fn active_end(&self) -> f64 {
        self.stage_start(self.depth)
    }

    /// Stage index containing local time `t_loc`, or None when quiet.
    fn stage_of(&self, t_loc: f64) -> Option<(u32, Substep, f64, f64)> {
        if !(0.0..1.0).contains(&t_loc) || t_loc >= self.active_end() {
            return None;
        }
        // 1 - 2 t_loc = 2^{-(1-a)k} at stage starts; invert then fix up.
        let est = -(1.0 - 2.0 * t_loc).log2() / (1.0 - self.alpha);
        let mut k = est.floor().max(0.0) as u32;
        for _ in 0..64 {
            if k > 0 && t_loc < self.stage_start(k) {
                k -= 1;
            } else if t_loc >= self.stage_start(k + 1) {
                k += 1;
            } else {
                break;
            }
        }
        let d = self.stage_duration(k);
        let local = t_loc - self.stage_start(k);
        if local < 0.5 * d {
            Some((k, Substep::LongAxis, self.stage_start(k), 0.5 * d))
        } else {
            Some((k, Substep::ShortAxis, self.stage_start(k) + 0.5 * d, 0.5 * d))
        }
    }
}

/// One elementary banded shear: on `[t_start, t_end]` (a clipped part of a
/// substep of full duration `full_duration`), bands of width `band_size`
/// across `shear_axis.perp()` translate by `displacement x (covered
/// fraction)` along `shear_axis`, wrapping within their level-`level` box.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEvent {
    pub t_start: f64,
    pub t_end: f64,
    /// Duration of the unclipped substep (global time units).
    pub full_duration: f64,
    /// Box level `j` of the window this event belongs to.
    pub level: u32,
    pub stage: u32,
    pub substep: Substep,
    /// Direction of the banded translation.
    pub shear_axis: Axis,
    /// Band width across `shear_axis.perp()`, in physical units.
    pub band_size: f64,
    /// Bands per box across the banded axis (power of two).
    pub bands_per_box: u64,
    /// Translation distance of an active band over the full substep.
    pub displacement: f64,
}

impl FlowEvent {
    /// Fraction of the substep covered by `[t_start, t_end]`.
    pub fn covered_fraction(&self) -> f64 {
        ((self.t_end - self.t_start) / self.full_duration).clamp(0.0, 1.0)
    }

    /// Whether the in-box band index `rho` is displaced by this event.
    pub fn band_is_active(&self, rho: u64) -> bool {
        band_active(rho, self.bands_per_box)
    }

    /// Signed speed along `shear_axis` inside active bands.
    pub fn speed(&self) -> f64 {
        self.displacement / self.full_duration
    }

    /// One-line text form (times, level, stage, substep, axis, geometry).
    pub fn to_line(&self) -> String {
        format!(
            "{:.17e} {:.17e} {:.17e} {} {} {} {} {:.17e} {} {:.17e}",
            self.t_start,
            self.t_end,
            self.full_duration,
            self.level,
            self.stage,
            match self.substep {
                Substep::LongAxis => "L",
                Substep::ShortAxis => "S",
            },
            match self.shear_axis {
                Axis::X => "x",
                Axis::Y => "y",
            },
            self.band_size,
            self.bands_per_box,
            self.displacement,
        )
    }

    /// Parses [`FlowEvent::to_line`] output.
    pub fn from_line(line: &str) -> Result<FlowEvent> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 10 {
            return Err(CascadeError::Parse(format!(
                "expected 10 fields in event line, got {}",
                parts.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            parts[i]
                .parse::<f64>()
                .map_err(|e| CascadeError::Parse(format!("field {i}: {e}")))
        };
        let int = |i: usize| -> Result<u64> {
            parts[i]
                .parse::<u64>()
                .map_err(|e| CascadeError::Parse(format!("field {i}: {e}")))
        };
        Ok(FlowEvent {
            t_start: num(0)?,
            t_end: num(1)?,
            full_duration: num(2)?,
            level: int(3)? as u32,
            stage: int(4)? as u32,
            substep: match parts[5] {
                "L" => Substep::LongAxis,
                "S" => Substep::ShortAxis,
                other => return Err(CascadeError::Parse(format!("bad substep {other:?}"))),
            },
            shear_axis: match parts[6] {
                "x" => Axis::X,
                "y" => Axis::Y,
                other => return Err(CascadeError::Parse(format!("bad axis {other:?}"))),
            },
            band_size: num(7)?,
            bands_per_box: int(8)?,
            displacement: num(9)?,
        })
    }
}

/// Writes an event stream in the line format of [`FlowEvent::to_line`].
pub fn write_events<W: Write>(events: &[FlowEvent], mut out: W) -> Result<()> {
    for e in events {
        writeln!(out, "{}", e.to_line())?;
    }
    Ok(())
}

/// Reads an event stream written by [`write_events`].
pub fn read_events<R: BufRead>(input: R) -> Result<Vec<FlowEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            events.push(FlowEvent::from_line(&line)?);
        }
    }
    Ok(events)
}

// Displaced bands: in-box indices 1, 2 mod 4 (index 1 when only two bands).
// This pairing regenerates exact checkerboards under refinement.
fn band_active(rho: u64, bands_per_box: u64) -> bool {
    if bands_per_box >= 4 {
        matches!(rho % 4, 1 | 2)
    } else {
        rho == 1
    }
}

/// Physical band/displacement geometry of substep (`k`, `sub`) at level `j`:
/// returns `(shear_axis, band_size, bands_per_box, displacement)`.
pub fn substep_geometry(j: u32, k: u32, sub: Substep) -> (Axis, f64, u64, f64) {
    let long = geometry::long_axis(j);
    let (w, h) = geometry::box_dims(j);
    let (long_ext, short_ext) = match long {
        Axis::X => (w, h),
        Axis::Y => (h, w),
    };
    match sub {
        Substep::LongAxis => {
            let bands = 1u64 << (k + 1);
            (long, short_ext / bands as f64, bands, long_ext / bands as f64)
        }
        Substep::ShortAxis => {
            let bands = 1u64 << (k + 2);
            (long.perp(), long_ext / bands as f64, bands, short_ext / (1u64 << (k + 1)) as f64)
        }
    }
}

// Emits the two substeps of every stage of one window as events on
// [win_start + sigma*T_k, ...], clipped to [t0, t1].
fn push_window_events(
    out: &mut Vec<FlowEvent>,
    params: &MixerParams,
    level: u32,
    win_start: f64,
    sigma: f64,
    t0: f64,
    t1: f64,
) {
    for k in 0..params.depth {
        let d = params.stage_duration(k);
        let t_k = params.stage_start(k);
        for (sub, lo, hi) in [
            (Substep::LongAxis, t_k, t_k + 0.5 * d),
            (Substep::ShortAxis, t_k + 0.5 * d, t_k + d),
        ] {
            let g_lo = win_start + sigma * lo;
            let g_hi = win_start + sigma * hi;
            if g_hi <= t0 || g_lo >= t1 {
                continue;
            }
            let (axis, band, bands, disp) = substep_geometry(level, k, sub);
            out.push(FlowEvent {
                t_start: g_lo.max(t0),
                t_end: g_hi.min(t1),
                full_duration: sigma * 0.5 * d,
                level,
                stage: k,
                substep: sub,
                shear_axis: axis,
                band_size: band,
                bands_per_box: bands,
                displacement: disp,
            });
        }
    }
}

/// Mixer event stream on local time `[0, 1]` at level 0 (physical level-0
/// box geometry, `2K` events).
pub fn mixer_events(params: &MixerParams) -> Vec<FlowEvent> {
    let mut out = Vec::with_capacity(2 * params.depth as usize);
    push_window_events(&mut out, params, 0, 0.0, 1.0, 0.0, 1.0);
    out
}

/// Global event stream covering `[t0, t1]`: every window `(i, j)` of the
/// lattice with `i <= i_max`, `j <= j_max` that intersects the range
/// contributes its rescaled mixer events (clipped at the range ends).
/// Pauses and times below truncation contribute nothing.
pub fn global_events(
    sched: &Schedule,
    params: &MixerParams,
    t0: f64,
    t1: f64,
) -> Result<Vec<FlowEvent>> {
    if !(0.0 <= t0 && t0 <= t1 && t1 <= 1.0) {
        return Err(CascadeError::InvalidParam(format!(
            "need 0 <= t0 <= t1 <= 1, got [{t0}, {t1}]"
        )));
    }
    let mut out = Vec::new();
    if t0 == t1 {
        return Ok(out);
    }
    let r = sched.ratio();
    // Deepest epoch first (earliest times).
    for i in (0..=sched.i_max()).rev() {
        let epoch_lo = r.powi(i as i32 + 1);
        let epoch_hi = r.powi(i as i32);
        if epoch_hi <= t0 || epoch_lo >= t1 {
            continue;
        }
        for j in (i..=sched.j_max()).rev() {
            let (win_lo, win_hi) = sched.window(i, j)?;
            if win_hi <= t0 || win_lo >= t1 {
                continue;
            }
            push_window_events(&mut out, params, j, win_lo, sched.sigma(j), t0, t1);
        }
    }
    Ok(out)
}

/// Pointwise velocity of the global field at `(t, p)`: the active event's
/// band speed along its shear axis inside displaced bands, zero elsewhere
/// (pauses, quiet half-windows, inactive bands, below truncation).
pub fn velocity(sched: &Schedule, params: &MixerParams, t: f64, p: TorusPoint) -> (f64, f64) {
    let (i, j, tau) = match sched.classify(t) {
        TimeLabel::Active { epoch, level, tau } => (epoch, level, tau),
        _ => return (0.0, 0.0),
    };
    if j > sched.j_max() || i > sched.i_max() {
        return (0.0, 0.0);
    }
    let Some((k, sub, _, sub_dur)) = params.stage_of(tau) else {
        return (0.0, 0.0);
    };
    let (axis, band, bands, disp) = substep_geometry(j, k, sub);
    let band_axis = axis.perp();
    let box_ext = band as f64 * bands as f64;
    let c = p.coord(band_axis);
    let within = c - (c / box_ext).floor() * box_ext;
    let rho = ((within / band).floor() as u64).min(bands - 1);
    if !band_active(rho, bands) {
        return (0.0, 0.0);
    }
    let speed = disp / (sub_dur * sched.sigma(j));
    match axis {
        Axis::X => (speed, 0.0),
        Axis::Y => (0.0, speed),
    }
}

/// Band-interface gradient magnitude of the mixer at local time `t_loc`
/// for smoothed profiles (level-0 geometry). Infinite when `delta = 0`
/// (square-wave bands); zero in the quiet half.
pub fn lipschitz_profile(params: &MixerParams, t_loc: f64) -> f64 {
    let Some((k, sub, _, sub_dur)) = params.stage_of(t_loc) else {
        return 0.0;
    };
    if params.delta == 0.0 {
        return f64::INFINITY;
    }
    let (_, band, _, disp) = substep_geometry(0, k, sub);
    let v_max = disp / sub_dur;
    v_max / (params.delta * band)
}

/// Effective Lipschitz budget `M := sup_t (1-a)(1/2 - t) |grad v|(t)`,
/// evaluated at stage starts (the supremum is stage-independent by
/// construction). Infinite for square-wave bands.
pub fn effective_lipschitz_budget(params: &MixerParams) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..params.depth {
        let t = params.stage_start(k);
        m = m.max((1.0 - params.alpha) * (0.5 - t) * lipschitz_profile(params, t));
    }
    m
}
