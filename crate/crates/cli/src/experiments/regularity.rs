//! Uniform regularity: the small-exponent Sobolev norm of the solution,
//! integrated in time, must stay bounded uniformly in the diffusivity,
//! while the first-order norm blows up like the inverse square root of
//! the diffusivity (the budget forced by a dissipation rate that does
//! not vanish).

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
    let mut rep =
        ExperimentReport::new("regularity", config, &["kappa", "depth", "hs_l2t", "h1_l2t"]);
    let mut ordered: Vec<&_> = sweep.points.iter().collect();
    ordered.sort_by(|a, b| b.kappa.partial_cmp(&a.kappa).unwrap());
    for p in &ordered {
        rep.row(&[p.kappa, p.depth as f64, p.hs_l2t, p.h1_l2t]);
    }

    let hs_max = ordered.iter().map(|p| p.hs_l2t).fold(f64::MIN, f64::max);
    let hs_min = ordered.iter().map(|p| p.hs_l2t).fold(f64::MAX, f64::min);
    let spread = hs_max / hs_min;
    rep.check(
        "small-exponent norm uniform across the ladder",
        spread <= 1.5,
        "max/min <= 1.5".into(),
        format!("spread {spread:.4} (s = {:.6})", sweep.s_exp),
    );

    let h1_points: Vec<(f64, f64)> = ordered.iter().map(|p| (p.kappa, p.h1_l2t)).collect();
    match fit_powerlaw(&h1_points) {
        Ok(fit) => {
            rep.check(
                "first-order norm grows like kappa^(-1/2)",
                (fit.exponent + 0.5).abs() <= 0.1,
                "exponent within 0.1 of -0.5".into(),
                format!("exponent {:.4}", fit.exponent),
            );
            rep.set_fit(fit);
        }
        Err(e) => {
            rep.check(
                "first-order norm grows like kappa^(-1/2)",
                false,
                "exponent within 0.1 of -0.5".into(),
                format!("fit failed: {e}"),
            );
        }
    }
    rep.compare("uniform_norm_exponent", sweep.s_exp);
    Ok(rep)
}
