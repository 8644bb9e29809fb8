//! Singular-time lattice: the self-similar arrangement of mixing windows and
//! pauses that partitions (0, 1).
//!
//! With ratio `r = 2^{-(1-alpha)/2}` and normalizer
//! `Z = 1/(1-r) + 1/(1-r)^2`, window `(i, j)` (epoch `i`, box level `j >= i`)
//! has duration `sigma(j) = r^j / Z` and occupies `[s(i,j+1), s(i,j))` where
//!
//! ```text
//! s(i, j)   = r^i - (r^i - r^j) / ((1-r) Z)      (j >= i, so s(i,i) = r^i)
//! s(i, inf) = r^i - r^i / ((1-r) Z)
//! ```
//!
//! Within epoch `i`, windows run at levels `j = inf .. i` as time increases;
//! below them sits the pause `[s(i+1,i+1), s(i,inf)]`. Epochs accumulate at
//! `t = 0` and the whole lattice fills `(0, 1)`.

use crate::error::{CascadeError, Result};

/// Label of a time instant within the lattice.
///
/// Labels are purely geometric: `Active` is returned for any level `j >= i`
/// even beyond `j_max` (the flow layer applies truncation by emitting no
/// events there). `BelowTruncation` covers `t < s(i_max+1, i_max+1)`, the
/// region below the deepest implemented pause.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeLabel {
    /// Inside mixing window `(epoch, level)` at local time `tau in [0, 1)`.
    Active { epoch: u32, level: u32, tau: f64 },
    /// Inside the pause `[s(epoch+1, epoch+1), s(epoch, inf)]`.
    Pause { epoch: u32 },
    /// Below the deepest implemented epoch.
    BelowTruncation,
    /// `t >= 1`.
    Terminal,
}

/// Lattice parameters. Constructed from the scaling exponent `alpha` (the
/// usual case) or directly from the ratio `r` (diagnostic, e.g. the schematic
/// lattice `sigma_j = 2^-j / 6` which corresponds to `r = 1/2`).
#[derive(Debug, Clone)]
pub struct Schedule {
    alpha: f64,
    r: f64,
    z: f64,
    i_max: u32,
    j_max: u32,
    m: f64,
}

impl Schedule {
    /// Builds the lattice for `alpha in (0, 1)`.
    ///
    /// `i_max` is the deepest implemented epoch, `j_max` the deepest mixing
    /// level (`i_max <= j_max` required), `m` the Lipschitz budget parameter
    /// entering [`Schedule::gamma_param`].
    pub fn new(alpha: f64, i_max: u32, j_max: u32, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CascadeError::InvalidParam(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let r = (-(1.0 - alpha) / 2.0).exp2();
        Self::with_ratio_alpha(r, alpha, i_max, j_max, m)
    }

    /// Builds the lattice directly from the ratio `r in (0, 1)`.
    ///
    /// Diagnostic constructor: `alpha` is back-solved as `1 + 2 log2 r` and
    /// may fall outside `(0, 1)`. Used by the schematic frozen-value tests.
    pub fn from_ratio(r: f64, i_max: u32, j_max: u32, m: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(CascadeError::InvalidParam(format!(
                "ratio must lie in (0, 1), got {r}"
            )));
        }
        Self::with_ratio_alpha(r, 1.0 + 2.0 * r.log2(), i_max, j_max, m)
    }

    fn with_ratio_alpha(r: f64, alpha: f64, i_max: u32, j_max: u32, m: f64) -> Result<Self> {
        if i_max > j_max {
            return Err(CascadeError::InvalidParam(format!(
                "i_max ({i_max}) must not exceed j_max ({j_max})"
            )));
        }
        if !(m > -7.0) {
            return Err(CascadeError::InvalidParam(format!(
                "m must exceed -7 so gamma stays positive, got {m}"
            )));
        }
        let z = 1.0 / (1.0 - r) + 1.0 / ((1.0 - r) * (1.0 - r));
        Ok(Schedule { alpha, r, z, i_max, j_max, m })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Geometric ratio `r = 2^{-(1-alpha)/2}` between consecutive scales.
    pub fn ratio(&self) -> f64 {
        self.r
    }

    /// Normalizer `Z = 1/(1-r) + 1/(1-r)^2` making the windows fill `(0,1)`.
    pub fn normalizer(&self) -> f64 {
        self.z
    }

    pub fn i_max(&self) -> u32 {
        self.i_max
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Regularity exponent parameter `gamma = 1 / (8 (m + 7))`.
    pub fn gamma_param(&self) -> f64 {
        1.0 / (8.0 * (self.m + 7.0))
    }

    /// Duration `sigma(j) = r^j / Z` of any window at level `j`.
    pub fn sigma(&self, j: u32) -> f64 {
        self.r.powi(j as i32) / self.z
    }

    /// Lattice time `s(i, j)` for `j >= i`. `s(i, i) = r^i`; `s(0, 0) = 1`.
    pub fn s_time(&self, i: u32, j: u32) -> Result<f64> {
        if j < i {
            return Err(CascadeError::InvalidParam(format!(
                "s_time requires j >= i, got i={i}, j={j}"
            )));
        }
        Ok(self.s_closed(i, j))
    }

    /// Accumulation point `s(i, inf)` of epoch `i`'s windows from below.
    pub fn s_inf(&self, i: u32) -> f64 {
        let ri = self.r.powi(i as i32);
        ri - ri / ((1.0 - self.r) * self.z)
    }

    /// Half-open span `[s(i,j+1), s(i,j))` of window `(i, j)`.
    pub fn window(&self, i: u32, j: u32) -> Result<(f64, f64)> {
        Ok((self.s_time(i, j + 1)?, self.s_time(i, j)?))
    }

    // Closed form without the j >= i guard (callers guarantee it).
    fn s_closed(&self, i: u32, j: u32) -> f64 {
        let ri = self.r.powi(i as i32);
        let rj = self.r.powi(j.min(40_000) as i32);
        ri - (ri - rj) / ((1.0 - self.r) * self.z)
    }

    /// Classifies `t in [0, 1]` into exactly one lattice label.
    ///
    /// Window spans are half-open on the right, pauses closed on both ends,
    /// so `classify(s(i,j)) = Active(i, j-1, 0)` for `j > i` and
    /// `classify(r^i) = Pause(i-1)`. Levels are recovered by inverting the
    /// closed form and then fixed up against exact `s(i, j)` comparisons, so
    /// boundaries agree with [`Schedule::s_time`] bit for bit.
    pub fn classify(&self, t: f64) -> TimeLabel {
        if t >= 1.0 {
            return TimeLabel::Terminal;
        }
        if t < self.r.powi(self.i_max as i32 + 1) {
            return TimeLabel::BelowTruncation;
        }
        // Epoch i: r^{i+1} <= t < r^i.
        let mut i = (t.ln() / self.r.ln()).floor().max(0.0) as i64;
        for _ in 0..64 {
            if i > 0 && t >= self.r.powi(i as i32) {
                i -= 1;
            } else if t < self.r.powi(i as i32 + 1) {
                i += 1;
            } else {
                break;
            }
        }
        let i = i.clamp(0, self.i_max as i64) as u32;

        if t <= self.s_inf(i) {
            return TimeLabel::Pause { epoch: i };
        }

        // Level j: s(i,j+1) <= t < s(i,j), i.e. r^{j+1} <= g < r^j with
        // g = r^i - (r^i - t)(1-r)Z.
        let ri = self.r.powi(i as i32);
        let g = ri - (ri - t) * (1.0 - self.r) * self.z;
        if g <= 0.0 {
            return TimeLabel::Pause { epoch: i };
        }
        let mut j = (g.ln() / self.r.ln()).floor().max(i as f64).min(39_000.0) as i64;
        for _ in 0..100 {
            if j > i as i64 && t >= self.s_closed(i, j as u32) {
                j -= 1;
            } else if t < self.s_closed(i, j as u32 + 1) {
                j += 1;
            } else {
                break;
            }
        }
        let j = j.max(i as i64) as u32;
        let sigma = self.sigma(j);
        let tau = if sigma > 0.0 {
            (((t - self.s_closed(i, j + 1)) / sigma).max(0.0)).min(1.0 - f64::EPSILON)
        } else {
            0.0 // window below f64 resolution
        };
        TimeLabel::Active { epoch: i, level: j, tau }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_alpha_outside_unit_interval() {
        assert!(Schedule::new(0.0, 4, 8, 1.0).is_err());
        assert!(Schedule::new(1.0, 4, 8, 1.0).is_err());
        assert!(Schedule::new(-0.5, 4, 8, 1.0).is_err());
        assert!(Schedule::new(0.5, 9, 8, 1.0).is_err(), "i_max > j_max must be rejected");
    }

    #[test]
    fn s_of_origin_is_exactly_one() {
        let sched = Schedule::new(0.5, 8, 16, 1.0).unwrap();
        assert_eq!(sched.s_time(0, 0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_matches_closed_form() {
        let sched = Schedule::new(0.5, 8, 16, 1.0).unwrap();
        assert_eq!(sched.gamma_param(), 1.0 / 64.0);
        let sched = Schedule::new(0.5, 8, 16, 0.0).unwrap();
        assert_eq!(sched.gamma_param(), 1.0 / 56.0);
    }

    #[test]
    fn s_time_rejects_levels_above_epoch() {
        let sched = Schedule::new(0.5, 8, 16, 1.0).unwrap();
        assert!(sched.s_time(3, 2).is_err());
        assert!(sched.s_time(3, 3).is_ok());
    }
}
