//! Small-scale intermittency.
//!
//! At a fixed probe time before the variance of the standard datum
//! dies, the solution develops ever finer filaments as the diffusivity
//! shrinks: a supercritical Sobolev norm (integrability above the
//! critical pairing, here H^{beta,p} with p*beta > 1) must blow up
//! along the diffusivity ladder while the small-exponent L2-based norm
//! stays put. A second series shows the same divergence in the grid
//! resolution for the initial datum itself.

use anyhow::{ensure, Result};
use cascade_core::field::NormSpec;
use cascade_core::flow::MixerParams;
use cascade_core::propagator::{Propagator, PropagatorConfig};
use cascade_core::schedule::Schedule;

use crate::config::RunConfig;
use crate::jobs;
use crate::report::ExperimentReport;

use super::{adaptive_depth, centered_half_datum, coarsest_silent_level, variance_death_time};

pub struct IntermittencyArgs {
    pub alpha: f64,
    pub grid_exp: u32,
    pub jmax: u32,
    pub depth_floor: u32,
    pub kappas: Vec<f64>,
    pub t_probe: f64,
    pub beta: f64,
    pub p: f64,
    pub p_alt: f64,
    pub q_ladder: Vec<u32>,
}

impl IntermittencyArgs {
    pub fn from_config(cfg: &RunConfig) -> Result<IntermittencyArgs> {
        let kappas = cfg
            .extra_list("intermittency_kappas")?
            .unwrap_or_else(|| vec![2f64.powi(-10), 2f64.powi(-14), 2f64.powi(-18)]);
        Ok(IntermittencyArgs {
            alpha: cfg.alpha,
            grid_exp: cfg.grid_exp.max(11),
            jmax: cfg.jmax.min(12),
            depth_floor: cfg.depth,
            kappas,
            t_probe: cfg.extra_f64("t_probe")?.unwrap_or(0.3),
            beta: cfg.extra_f64("beta")?.unwrap_or(0.5),
            p: cfg.extra_f64("p")?.unwrap_or(4.0),
            p_alt: cfg.extra_f64("p_alt")?.unwrap_or(1.9),
            q_ladder: vec![8, 9, 10, 11],
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let args = IntermittencyArgs::from_config(cfg)?;
    run_with(cfg.to_json(), &args)
}

pub fn run_with(config: serde_json::Value, args: &IntermittencyArgs) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "intermittency",
        config,
        &["series", "x", "h_beta_p", "h_companion"],
    );
    ensure!(
        args.kappas.len() >= 2,
        "need at least two diffusivities to show growth"
    );
    rep.check(
        "norm pairing is supercritical",
        args.p * args.beta > 1.0,
        "p * beta > 1".into(),
        format!("p*beta = {:.3}", args.p * args.beta),
    );

    let sched = Schedule::new(args.alpha, args.jmax, args.jmax, 1.0)?;
    let data = centered_half_datum(args.grid_exp)?;
    let silent = coarsest_silent_level(&data);
    rep.check(
        "datum carries no coarse average",
        silent == Some(0),
        "level-0 box average vanishes".into(),
        format!("coarsest silent level {silent:?}"),
    );
    let t_death = variance_death_time(&sched, 0)?;
    rep.check(
        "probe time precedes the variance death time",
        args.t_probe < t_death,
        format!("t_probe < {t_death:.6}"),
        format!("t_probe = {}", args.t_probe),
    );

    let spec_bp = NormSpec::SobolevRiesz {
        s: args.beta,
        p: args.p,
    };
    let s_small = (1.0 - args.alpha).powi(2) * sched.gamma_param();
    let spec_small = NormSpec::SobolevRiesz {
        s: s_small,
        p: 2.0,
    };

    let mut ordered = args.kappas.clone();
    ordered.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma0 = sched.sigma(0);
    let results = jobs::run_indexed(ordered.len(), |idx| -> Result<(f64, f64, f64)> {
        let kappa = ordered[idx];
        let depth = adaptive_depth(kappa, sigma0, args.depth_floor);
        let mixer = MixerParams::new(args.alpha, depth)?;
        let prop = Propagator::new(sched.clone(), mixer)?;
        let cfg = PropagatorConfig::new(kappa);
        let run = prop.propagate(&data, 0.0, args.t_probe, &cfg)?;
        let h_bp = run.final_field.norm(spec_bp)?;
        let h_small = run.final_field.norm(spec_small)?;
        Ok((kappa, h_bp, h_small))
    });

    let mut probe: Vec<(f64, f64, f64)> = Vec::new();
    for r in results {
        let (kappa, h_bp, h_small) = r?;
        rep.row(&[0.0, kappa, h_bp, h_small]);
        probe.push((kappa, h_bp, h_small));
    }

    let growth = probe.last().expect("kappas nonempty").1 / probe[0].1;
    rep.check(
        "supercritical norm at least doubles down the ladder",
        growth >= 2.0,
        "h(kappa_min) / h(kappa_max) >= 2".into(),
        format!("growth factor {growth:.3}"),
    );
    let monotone = probe.windows(2).all(|w| w[1].1 > w[0].1);
    rep.check(
        "supercritical norm grows monotonically",
        monotone,
        "strict increase as kappa shrinks".into(),
        format!(
            "values {:?}",
            probe.iter().map(|p| format!("{:.4}", p.1)).collect::<Vec<_>>()
        ),
    );
    let small_max = probe.iter().map(|p| p.2).fold(f64::MIN, f64::max);
    let small_min = probe.iter().map(|p| p.2).fold(f64::MAX, f64::min);
    rep.check(
        "small-exponent norm stays uniform",
        small_max / small_min <= 1.5,
        "max/min <= 1.5".into(),
        format!("spread {:.4} (s = {s_small:.6})", small_max / small_min),
    );

    // Series 1: the datum's supercritical norm diverges with resolution,
    // while a subcritical companion (p * beta < 1) saturates.
    let spec_alt = NormSpec::SobolevRiesz {
        s: args.beta,
        p: args.p_alt,
    };
    let mut datum_norms: Vec<(u32, f64, f64)> = Vec::new();
    for &qq in &args.q_ladder {
        let g = centered_half_datum(qq)?;
        let n_bp = g.norm(spec_bp)?;
        let n_alt = g.norm(spec_alt)?;
        rep.row(&[1.0, qq as f64, n_bp, n_alt]);
        datum_norms.push((qq, n_bp, n_alt));
    }
    let diverging = datum_norms.windows(2).all(|w| w[1].1 > w[0].1);
    rep.check(
        "datum norm diverges monotonically with resolution",
        diverging,
        "strict increase along the grid ladder".into(),
        format!(
            "values {:?}",
            datum_norms
                .iter()
                .map(|d| format!("{:.4}", d.1))
                .collect::<Vec<_>>()
        ),
    );
    let first = datum_norms.first().expect("ladder nonempty");
    let last = datum_norms.last().expect("ladder nonempty");
    rep.compare("datum_divergence_factor", last.1 / first.1);
    rep.compare("datum_subcritical_factor", last.2 / first.2);
    Ok(rep)
}
