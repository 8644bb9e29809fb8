//! Anomalous dissipation sweep: terminal norms as the diffusivity
//! vanishes.
//!
//! For each diffusivity the solver runs over the full interval with a
//! stage depth matched to the diffusive scale. The checks assert that
//! the terminal variance stays collapsed uniformly in the diffusivity,
//! that the terminal L1 norm does not grow as the diffusivity shrinks,
//! and that it in fact decays at a positive fitted rate. The classical
//! upper-bound rate for the L1 decay exponent is reported alongside
//! for comparison.

use anyhow::Result;

use crate::config::RunConfig;
use crate::report::{fit_powerlaw, ExperimentReport};

use super::centered_half_datum;
use super::sweep::{kappa_sweep, SweepArgs, SweepOutput};
use cascade_core::schedule::Schedule;

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    let sweep = shared_sweep(cfg)?;
    report_from_sweep(cfg.to_json(), &sweep)
}

/// Runs the full-interval sweep used by the dissipation, convergence,
/// and regularity experiments.
pub fn shared_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let data = centered_half_datum(cfg.grid_exp)?;
    let sched = Schedule::new(cfg.alpha, cfg.jmax, cfg.jmax, 1.0)?;
    let s_exp = (1.0 - cfg.alpha).powi(2) * sched.gamma_param();
    let out_dir = cfg.out.join("dissipation");
    kappa_sweep(&SweepArgs {
        alpha: cfg.alpha,
        grid_exp: cfg.grid_exp,
        jmax: cfg.jmax,
        base_depth: cfg.depth,
        kappas: &cfg.kappa_ladder,
        data: &data,
        s_exp,
        out: if cfg.snapshots { Some(&out_dir) } else { None },
        snapshots: cfg.snapshots,
    })
}

pub fn report_from_sweep(
    config: serde_json::Value,
    sweep: &SweepOutput,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "dissipation",
        config,
        &["kappa", "depth", "l1_final", "l2_final", "l2_ratio", "warnings"],
    );
    for p in &sweep.points {
        rep.row(&[
            p.kappa,
            p.depth as f64,
            p.l1_final,
            p.l2_final,
            p.l2_final / sweep.data_l2,
            p.warnings as f64,
        ]);
    }

    let worst_ratio = sweep
        .points
        .iter()
        .map(|p| p.l2_final / sweep.data_l2)
        .fold(0.0f64, f64::max);
    rep.check(
        "terminal variance collapsed at every diffusivity",
        worst_ratio <= 0.2,
        "l2(1)/l2(0) <= 0.2".into(),
        format!("max ratio {worst_ratio:.3e}"),
    );

    let mut ordered: Vec<&_> = sweep.points.iter().collect();
    ordered.sort_by(|a, b| b.kappa.partial_cmp(&a.kappa).unwrap());
    let monotone = ordered
        .windows(2)
        .all(|w| w[1].l1_final <= w[0].l1_final * (1.0 + 1e-9));
    rep.check(
        "terminal l1 non-increasing as diffusivity shrinks",
        monotone,
        "each step <= previous (1e-9 slack)".into(),
        format!(
            "l1 range [{:.3e}, {:.3e}]",
            ordered.last().map(|p| p.l1_final).unwrap_or(f64::NAN),
            ordered.first().map(|p| p.l1_final).unwrap_or(f64::NAN),
        ),
    );

    let l1_points: Vec<(f64, f64)> = ordered.iter().map(|p| (p.kappa, p.l1_final)).collect();
    match fit_powerlaw(&l1_points) {
        Ok(fit) => {
            rep.check(
                "terminal l1 decays at a positive rate in kappa",
                fit.exponent > 0.0,
                "fitted exponent > 0".into(),
                format!("exponent {:.4}", fit.exponent),
            );
            rep.set_fit(fit);
        }
        Err(e) => {
            rep.check(
                "terminal l1 decays at a positive rate in kappa",
                false,
                "fitted exponent > 0".into(),
                format!("fit failed: {e}"),
            );
        }
    }
    if let Ok(fit) = fit_powerlaw(
        &ordered
            .iter()
            .map(|p| (p.kappa, p.l2_final))
            .collect::<Vec<_>>(),
    ) {
        rep.add_fit("l2_final", fit);
    }
    let alpha = sweep.alpha;
    rep.compare("l1_rate_upper_bound", (1.0 - alpha).powi(2) / 12.0);
    Ok(rep)
}
