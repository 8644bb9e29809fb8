//! Two-point dispersion and memory loss.
//!
//! Pairs of tracers started at separation R0 under one realization of
//! the flow (independent noises) must track the envelope
//! `R0^2 + 8 kappa t + t^(2/(1-alpha))` within a bounded band, and at
//! late times the mean squared separation forgets R0 entirely.

use anyhow::{Context, Result};
use cascade_core::flow::MixerParams;
use cascade_core::geometry::{self, TorusPoint};
use cascade_core::particles;
use cascade_core::schedule::Schedule;

use crate::config::RunConfig;
use crate::jobs;
use crate::report::ExperimentReport;

use super::geometric_grid;

pub struct PairsArgs {
    pub alpha: f64,
    pub kappa: f64,
    pub r0_list: Vec<f64>,
    pub n_pairs: usize,
    pub seed: u64,
}

impl PairsArgs {
    pub fn from_config(cfg: &RunConfig) -> Result<PairsArgs> {
        let r0_list = cfg.extra_list("r0_list")?.unwrap_or_else(|| {
            vec![0.0, geometry::WIDTH / 32.0, geometry::WIDTH / 8.0]
        });
        Ok(PairsArgs {
            alpha: cfg.alpha,
            kappa: cfg.extra_f64("pairs_kappa")?.unwrap_or(1e-10),
            r0_list,
            n_pairs: cfg.extra_f64("n_pairs")?.unwrap_or(2000.0) as usize,
            seed: cfg.seed,
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let args = PairsArgs::from_config(cfg)?;
    run_with(cfg.to_json(), &args)
}

pub fn run_with(config: serde_json::Value, args: &PairsArgs) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "pairs",
        config,
        &["r0", "t", "mean_r2", "envelope", "ratio"],
    );
    let sched = Schedule::new(args.alpha, 64, 64, 1.0)?;
    let mixer = MixerParams::new(args.alpha, 6)?;
    let times = geometric_grid(3e-7, 1.0, 16);
    let x0 = TorusPoint::new(0.3, 0.55);
    let exponent = 2.0 / (1.0 - args.alpha);

    let curves = jobs::run_indexed(args.r0_list.len(), |idx| -> Result<Vec<f64>> {
        let r0 = args.r0_list[idx];
        let y0 = TorusPoint::new(x0.x() + r0, x0.y());
        particles::pair_dispersion(
            &sched,
            &mixer,
            x0,
            y0,
            args.kappa,
            &times,
            args.n_pairs,
            args.seed.wrapping_add(31 * idx as u64),
        )
        .map_err(Into::into)
    });

    let mut late_spread: Vec<f64> = Vec::new();
    let mut worst_band: f64 = 1.0;
    for (idx, curve) in curves.into_iter().enumerate() {
        let r0 = args.r0_list[idx];
        let r2 = curve.with_context(|| format!("r0 {r0}"))?;
        for (&t, &v) in times.iter().zip(&r2) {
            let env = r0 * r0 + 8.0 * args.kappa * t + t.powf(exponent);
            let ratio = v / env;
            worst_band = worst_band.max(ratio.max(1.0 / ratio));
            rep.row(&[r0, t, v, env, ratio]);
        }
        late_spread.push(*r2.last().expect("nonempty curve"));
    }

    rep.check(
        "dispersion tracks the envelope within a factor of 10",
        worst_band <= 10.0,
        "max(ratio, 1/ratio) <= 10 at every (r0, t)".into(),
        format!("worst band factor {worst_band:.3}"),
    );
    if late_spread.len() >= 2 {
        let hi = late_spread.iter().fold(f64::MIN, |a, &b| a.max(b));
        let lo = late_spread.iter().fold(f64::MAX, |a, &b| a.min(b));
        rep.check(
            "terminal dispersion forgets the initial separation",
            hi / lo <= 1.25,
            "max/min <= 1.25 at t = 1".into(),
            format!("spread {:.4}", hi / lo),
        );
        rep.compare("terminal_mean_r2", late_spread.iter().sum::<f64>() / late_spread.len() as f64);
    }
    Ok(rep)
}
