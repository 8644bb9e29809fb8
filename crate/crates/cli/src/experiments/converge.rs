//! Vanishing-diffusivity convergence: the L2-in-time gap between the
//! diffusive solution and the zero-diffusivity limit evolution must
//! shrink as the diffusivity does, at a positive fitted rate. The
//! classical lower-bound rate for this gap is reported for comparison.

use anyhow::Result;

use crate::config::RunConfig;
use crate::report::{fit_powerlaw, ExperimentReport};

use super::dissipation::shared_sweep;
use super::sweep::SweepOutput;

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    let sweep = shared_sweep(cfg)?;
    report_from_sweep(cfg.to_json(), &sweep)
}

pub fn report_from_sweep(
    config: serde_json::Value,
    sweep: &SweepOutput,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("converge", config, &["kappa", "depth", "gap_l2t"]);
    let mut ordered: Vec<&_> = sweep.points.iter().collect();
    ordered.sort_by(|a, b| b.kappa.partial_cmp(&a.kappa).unwrap());
    for p in &ordered {
        rep.row(&[p.kappa, p.depth as f64, p.gap_l2t]);
    }

    let strictly_decreasing = ordered.windows(2).all(|w| w[1].gap_l2t < w[0].gap_l2t);
    rep.check(
        "gap to the limit strictly decreases with kappa",
        strictly_decreasing,
        "strict decrease along the ladder".into(),
        format!(
            "gaps {:?}",
            ordered
                .iter()
                .map(|p| format!("{:.3e}", p.gap_l2t))
                .collect::<Vec<_>>()
        ),
    );

    let points: Vec<(f64, f64)> = ordered.iter().map(|p| (p.kappa, p.gap_l2t)).collect();
    match fit_powerlaw(&points) {
        Ok(fit) => {
            rep.check(
                "gap shrinks at a positive fitted rate",
                fit.exponent > 0.0,
                "fitted exponent > 0".into(),
                format!("exponent {:.4}", fit.exponent),
            );
            rep.set_fit(fit);
        }
        Err(e) => {
            rep.check(
                "gap shrinks at a positive fitted rate",
                false,
                "fitted exponent > 0".into(),
                format!("fit failed: {e}"),
            );
        }
    }
    let alpha = sweep.alpha;
    rep.compare("gap_rate_lower_bound", (1.0 - alpha).powi(2) / 96.0);
    Ok(rep)
}
