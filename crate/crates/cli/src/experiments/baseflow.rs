//! Gradient growth of the bare mixer.
//!
//! Applied to the two-value datum on the unit cell, each full shear
//! stage doubles the total variation while the remaining active time
//! shrinks by the factor 2^-(1-alpha). Plotting TV against remaining
//! time must therefore give a power law with exponent -1/(1-alpha).
//! All stages used here are grid-aligned, so the doubling is exact.

use anyhow::{ensure, Result};
use cascade_core::field::{NormSpec, ScalarField};
use cascade_core::flow::{self, MixerParams};
use cascade_core::propagator::advect_event;

use crate::config::RunConfig;
use crate::report::{fit_powerlaw, ExperimentReport};

pub struct BaseflowArgs {
    pub alpha: f64,
    pub grid_exp: u32,
    pub depth: u32,
}

impl BaseflowArgs {
    pub fn from_config(cfg: &RunConfig) -> Result<BaseflowArgs> {
        let depth = match cfg.extra_f64("baseflow_depth")? {
            Some(d) => d as u32,
            // Deepest fully grid-aligned stage: short-axis substeps use
            // 2^(k+2) bands across 2^q cells.
            None => cfg.grid_exp.saturating_sub(2).clamp(4, 12),
        };
        Ok(BaseflowArgs {
            alpha: cfg.alpha,
            grid_exp: cfg.grid_exp,
            depth,
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let args = BaseflowArgs::from_config(cfg)?;
    run_with(cfg.to_json(), &args)
}

pub fn run_with(config: serde_json::Value, args: &BaseflowArgs) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "baseflow_norms",
        config,
        &["stage", "time_remaining", "tv"],
    );
    ensure!(
        args.depth + 2 <= args.grid_exp,
        "depth {} exceeds the aligned range at grid exponent {}",
        args.depth,
        args.grid_exp
    );
    let mixer = MixerParams::new(args.alpha, args.depth)?;
    let events = flow::mixer_events(&mixer);
    ensure!(events.len() == 2 * args.depth as usize, "event stream size");

    let mut f = ScalarField::theta0(args.grid_exp)?;
    let tv0 = f.norm(NormSpec::DiscreteTV)?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut prev_tv = tv0;
    for (k, pair) in events.chunks_exact(2).enumerate() {
        for e in pair {
            f = advect_event(&f, e, 1.0);
        }
        let tv = f.norm(NormSpec::DiscreteTV)?;
        // Active time left after stage k ends: 1/2 - T_{k+1}.
        let remaining = 0.5 * (-(1.0 - args.alpha) * (k as f64 + 1.0)).exp2();
        rep.row(&[k as f64, remaining, tv]);
        points.push((remaining, tv));
        ratios.push(tv / prev_tv);
        prev_tv = tv;
    }

    let target = -1.0 / (1.0 - args.alpha);
    let fit = fit_powerlaw(&points)?;
    rep.check(
        "tv grows like remaining-time^(-1/(1-alpha))",
        (fit.exponent - target).abs() <= 0.2 * target.abs(),
        format!("exponent within 20% of {target:.3}"),
        format!("exponent {:.4}", fit.exponent),
    );
    rep.set_fit(fit);

    let doubling: Vec<f64> = ratios.iter().skip(1).copied().collect();
    let worst = doubling
        .iter()
        .map(|&r| (r - 2.0).abs())
        .fold(0.0f64, f64::max);
    rep.check(
        "tv doubles exactly at every aligned stage",
        worst <= 1e-9,
        "per-stage ratio 2 within 1e-9".into(),
        format!("worst deviation {worst:.3e}"),
    );
    rep.compare("initial_tv", tv0);
    rep.compare("mean_conservation", f.mean());
    Ok(rep)
}
