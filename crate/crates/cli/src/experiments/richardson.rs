//! Single-cloud superdiffusive spreading.
//!
//! Tracers released from one point first spread diffusively
//! (variance ~ 4 kappa t, slope 1 in time), then the cascade takes
//! over and the variance grows like t^(2/(1-alpha)) independently of
//! the diffusivity. Both regimes are fitted; when at least two
//! diffusivities are given, the curves must overlap in the flow-driven
//! regime.

use anyhow::{Context, Result};
use cascade_core::flow::MixerParams;
use cascade_core::geometry::TorusPoint;
use cascade_core::particles;
use cascade_core::schedule::Schedule;

use crate::config::RunConfig;
use crate::jobs;
use crate::report::{fit_powerlaw, ExperimentReport};

use super::geometric_grid;

pub struct RichardsonArgs {
    pub alpha: f64,
    pub kappas: Vec<f64>,
    pub x0: TorusPoint,
    pub n_particles: usize,
    pub seed: u64,
}

impl RichardsonArgs {
    pub fn from_config(cfg: &RunConfig) -> Result<RichardsonArgs> {
        let kappas = cfg
            .extra_list("richardson_kappas")?
            .unwrap_or_else(|| vec![1e-8, 1e-10]);
        let x0 = match cfg.extra_list("x0")? {
            Some(v) if v.len() == 2 => TorusPoint::new(v[0], v[1]),
            Some(_) => anyhow::bail!("x0 must be two comma-separated floats"),
            None => TorusPoint::new(0.35, 0.62),
        };
        let n_particles = cfg.extra_f64("n_particles")?.unwrap_or(10_000.0) as usize;
        Ok(RichardsonArgs {
            alpha: cfg.alpha,
            kappas,
            x0,
            n_particles,
            seed: cfg.seed,
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let args = RichardsonArgs::from_config(cfg)?;
    run_with(cfg.to_json(), &args)
}

pub fn run_with(config: serde_json::Value, args: &RichardsonArgs) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("richardson", config, &["kappa", "t", "variance"]);
    // Deep truncation so that early times are genuinely event-free.
    let sched = Schedule::new(args.alpha, 64, 64, 1.0)?;
    let mixer = MixerParams::new(args.alpha, 6)?;
    let first_event = sched.window(64, 64)?.0;

    let diff_times = geometric_grid(first_event / 200.0, first_event / 2.0, 8);
    let adv_times = geometric_grid(2e-3, 0.3, 9);
    let mut times = diff_times.clone();
    times.extend_from_slice(&adv_times);
    times.sort_by(f64::total_cmp);

    let curves = jobs::run_indexed(args.kappas.len(), |idx| -> Result<Vec<f64>> {
        let kappa = args.kappas[idx];
        let clouds = particles::simulate(
            &sched,
            &mixer,
            args.x0,
            kappa,
            &times,
            args.n_particles,
            args.seed.wrapping_add(7919 * idx as u64),
        )?;
        clouds
            .iter()
            .map(|cloud| particles::variance(cloud).map_err(Into::into))
            .collect()
    });

    let target_adv = 2.0 / (1.0 - args.alpha);
    let mut all_vars: Vec<Vec<f64>> = Vec::new();
    for (idx, curve) in curves.into_iter().enumerate() {
        let kappa = args.kappas[idx];
        let vars = curve.with_context(|| format!("kappa {kappa}"))?;
        for (&t, &v) in times.iter().zip(&vars) {
            rep.row(&[kappa, t, v]);
        }

        let pick = |grid: &[f64]| -> Vec<(f64, f64)> {
            grid.iter()
                .map(|&t| {
                    let i = times.iter().position(|&u| u == t).expect("grid time");
                    (t, vars[i])
                })
                .collect()
        };
        let dfit = fit_powerlaw(&pick(&diff_times))?;
        rep.check(
            &format!("diffusive regime slope 1 (kappa = {kappa:.1e})"),
            (dfit.exponent - 1.0).abs() <= 0.15,
            "slope within 15% of 1".into(),
            format!("slope {:.4}", dfit.exponent),
        );
        rep.compare(
            &format!("diffusive_level_over_4kt_kappa_{idx}"),
            dfit.prefactor / (4.0 * kappa),
        );
        let afit = fit_powerlaw(&pick(&adv_times))?;
        rep.check(
            &format!("flow regime slope 2/(1-alpha) (kappa = {kappa:.1e})"),
            (afit.exponent - target_adv).abs() <= 0.15 * target_adv,
            format!("slope within 15% of {target_adv:.3}"),
            format!("slope {:.4}", afit.exponent),
        );
        if idx == 0 {
            rep.set_fit(afit);
        } else {
            rep.add_fit(&format!("flow_regime_kappa_{idx}"), afit);
        }
        all_vars.push(vars);
    }

    if all_vars.len() >= 2 {
        // In the flow-driven regime the curves must agree across kappa.
        let mut worst: f64 = 1.0;
        for (i, &t) in times.iter().enumerate() {
            if t < 0.05 {
                continue;
            }
            let col: Vec<f64> = all_vars.iter().map(|v| v[i]).collect();
            let hi = col.iter().fold(f64::MIN, |a, &b| a.max(b));
            let lo = col.iter().fold(f64::MAX, |a, &b| a.min(b));
            worst = worst.max(hi / lo);
        }
        rep.check(
            "flow-regime curves overlap across diffusivities",
            worst <= 1.2,
            "max/min <= 1.2 for t >= 0.05".into(),
            format!("worst spread {worst:.4}"),
        );
    }
    Ok(rep)
}
