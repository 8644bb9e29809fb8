//! Energy staircase of the zero-diffusivity limit.
//!
//! The limit evolution holds its variance constant except at the
//! midpoints of the top mixing windows, where it drops instantaneously
//! by exactly the energy of the band it erases (a Pythagorean split
//! between consecutive box-average projections). This experiment
//! samples the limit energy on a sixteenth-of-a-window grid around
//! each drop and verifies location, constancy, and magnitude.

use anyhow::Result;
use cascade_core::field::ScalarField;
use cascade_core::flow::MixerParams;
use cascade_core::geometry;
use cascade_core::propagator::Propagator;
use cascade_core::schedule::Schedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::ExperimentReport;

use super::centered_half_datum;

pub struct JumpArgs {
    pub alpha: f64,
    pub grid_exp: u32,
    pub epochs: u32,
    pub seed: u64,
}

impl JumpArgs {
    pub fn from_config(cfg: &RunConfig) -> Result<JumpArgs> {
        Ok(JumpArgs {
            alpha: cfg.alpha,
            grid_exp: cfg.grid_exp,
            epochs: cfg.extra_f64("jump_epochs")?.unwrap_or(4.0) as u32,
            seed: cfg.seed,
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let args = JumpArgs::from_config(cfg)?;
    run_with(cfg.to_json(), &args)
}

/// Random tile values at `level` in [-1, 1].
fn random_tiles(q: u32, level: u32, seed: u64) -> Result<ScalarField> {
    let (cx, cy) = geometry::box_counts(level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..cx * cy).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Ok(ScalarField::from_tile_values(q, level, &vals)?)
}

pub fn run_with(config: serde_json::Value, args: &JumpArgs) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "energy_jumps",
        config,
        &["epoch", "tau_sixteenths", "energy"],
    );
    let sched = Schedule::new(args.alpha, 16, 16, 1.0)?;
    let prop = Propagator::new(sched.clone(), MixerParams::new(args.alpha, 6)?)?;
    let tol = 1e-10;

    let mut plateau_worst = 0.0f64;
    let mut post_worst = 0.0f64;
    let mut pyth_worst = 0.0f64;
    let mut smallest_drop = f64::MAX;
    let mut drop_index_ok = true;

    for i in 0..args.epochs {
        // A datum with structure exactly one level below the epoch's
        // boxes: the window (i, i) drop erases all of it at once.
        let f = random_tiles(args.grid_exp, i + 1, args.seed.wrapping_add(i as u64))?;
        let start = sched.s_time(i, i + 1)?;
        let sigma = sched.sigma(i);
        let e_pre = f.energy();
        let coarse = f.project(i)?;
        let e_post_want = coarse.energy();
        let pyth = f.sub(&coarse)?.energy();
        let scale = e_pre.max(1.0);

        let mut energies = Vec::with_capacity(10);
        for m in 0..=9u32 {
            let t = start + (m as f64 / 16.0) * sigma;
            let lim = prop.limiting(&f, t)?;
            energies.push(lim.energy());
            rep.row(&[i as f64, m as f64, lim.energy()]);
        }
        for (m, &e) in energies.iter().enumerate() {
            if m <= 7 {
                plateau_worst = plateau_worst.max((e - e_pre).abs() / scale);
            } else {
                post_worst = post_worst.max((e - e_post_want).abs() / scale);
            }
        }
        let drop = energies[0] - energies[8];
        pyth_worst = pyth_worst.max((drop - pyth).abs() / scale);
        smallest_drop = smallest_drop.min(drop / scale);
        let first_drop = energies
            .iter()
            .position(|&e| (e - e_pre).abs() > 1e-6 * scale)
            .unwrap_or(usize::MAX);
        drop_index_ok &= first_drop == 8;
    }

    rep.check(
        "energy constant up to 7/16 of the window",
        plateau_worst <= tol,
        format!("relative deviation <= {tol:.0e}"),
        format!("worst {plateau_worst:.3e}"),
    );
    rep.check(
        "energy equals the coarse projection from 8/16 on",
        post_worst <= tol,
        format!("relative deviation <= {tol:.0e}"),
        format!("worst {post_worst:.3e}"),
    );
    rep.check(
        "drop equals the Pythagorean band energy",
        pyth_worst <= tol,
        format!("relative deviation <= {tol:.0e}"),
        format!("worst {pyth_worst:.3e}"),
    );
    rep.check(
        "first drop lands between 7/16 and 8/16 of the window",
        drop_index_ok,
        "jump bracketed at the window midpoint".into(),
        format!("smallest relative drop {smallest_drop:.3e}"),
    );

    // The standard datum makes a single jump that removes all variance.
    let g = centered_half_datum(args.grid_exp)?;
    let start0 = sched.s_time(0, 1)?;
    let sigma0 = sched.sigma(0);
    let e_g = g.energy();
    let before = prop.limiting(&g, start0 + 7.0 / 16.0 * sigma0)?.energy();
    let after = prop.limiting(&g, start0 + 0.5 * sigma0)?.energy();
    let mid_run = prop.limiting(&g, 0.5)?.energy();
    rep.row(&[-1.0, 7.0, before]);
    rep.row(&[-1.0, 8.0, after]);
    rep.check(
        "standard datum keeps full variance until its single jump",
        (before - e_g).abs() <= tol * e_g && (mid_run - e_g).abs() <= tol * e_g,
        format!("relative deviation <= {tol:.0e}"),
        format!("energy {before:.6} vs {e_g:.6}"),
    );
    rep.check(
        "standard datum loses all variance at the jump",
        after <= 1e-15,
        "terminal energy <= 1e-15".into(),
        format!("energy after {after:.3e}"),
    );

    // Terminal state of any datum: its global mean.
    let f_last = random_tiles(args.grid_exp, 1, args.seed)?;
    let terminal = prop.limiting(&f_last, 1.0)?.energy();
    let want = f_last.project(0)?.energy();
    rep.check(
        "terminal energy equals the squared mean",
        (terminal - want).abs() <= tol * want.max(1.0),
        format!("relative deviation <= {tol:.0e}"),
        format!("{terminal:.6} vs {want:.6}"),
    );
    Ok(rep)
}
