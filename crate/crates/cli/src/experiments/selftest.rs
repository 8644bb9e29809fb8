//! Fast internal consistency checks: closed forms against partial sums,
//! exact fits, projection identities, mixer checkerboards, heat-kernel
//! mode decay, and norm preservation under aligned shears. Runs in a
//! couple of seconds at small grids.

use anyhow::Result;
use cascade_core::field::{NormSpec, ScalarField};
use cascade_core::flow::{self, MixerParams};
use cascade_core::geometry;
use cascade_core::propagator::advect_event;
use cascade_core::schedule::Schedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::{fit_powerlaw, ExperimentReport};

pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rep = ExperimentReport::new("selftest", cfg.to_json(), &["check", "ok"]);
    let mut idx = 0.0;
    let mut record = |rep: &mut ExperimentReport, name: &str, ok: bool, obs: String| {
        rep.row(&[idx, if ok { 1.0 } else { 0.0 }]);
        idx += 1.0;
        rep.check(name, ok, "exact (1e-12 class)".into(), obs);
    };

    // Closed-form lattice sums against direct partial sums.
    let mut worst_lattice = 0.0f64;
    for &alpha in &[0.1, 1.0 / 3.0, 0.5, 0.9] {
        let sched = Schedule::new(alpha, 12, 12, 1.0)?;
        let r = sched.ratio();
        // Z = sum_{j>=0} (j+2) r^j: each width r^j/Z appears once as a
        // pause and j+1 times as a window.
        let mut z_sum = 0.0;
        let mut term;
        for j in 0..100_000 {
            term = (j as f64 + 2.0) * r.powi(j);
            z_sum += term;
            if term < 1e-18 * z_sum {
                break;
            }
        }
        worst_lattice = worst_lattice.max((z_sum - sched.normalizer()).abs() / z_sum);
        // s(i, i) must equal r^i: the windows of epoch i tile it exactly.
        for i in 0..8 {
            worst_lattice = worst_lattice.max((sched.s_time(i, i)? - r.powi(i as i32)).abs());
        }
    }
    record(
        &mut rep,
        "lattice closed forms match partial sums",
        worst_lattice <= 1e-12,
        format!("worst {worst_lattice:.3e}"),
    );

    // Power-law fits recover planted exponents.
    let quartic: Vec<(f64, f64)> = (1..=9).map(|k| (k as f64, (k as f64).powi(4))).collect();
    let f1 = fit_powerlaw(&quartic)?;
    let root: Vec<(f64, f64)> = (1..=9)
        .map(|k| (0.2 * k as f64, 3.0 * (0.2 * k as f64).sqrt()))
        .collect();
    let f2 = fit_powerlaw(&root)?;
    record(
        &mut rep,
        "power-law fit recovers planted exponents",
        (f1.exponent - 4.0).abs() <= 1e-10 && (f2.exponent - 0.5).abs() <= 1e-10
            && (f2.prefactor - 3.0).abs() <= 1e-8,
        format!("exponents {:.6}, {:.6}", f1.exponent, f2.exponent),
    );

    // Projection ladder: idempotent, contractive, Pythagorean.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = ScalarField::from_cells(
        6,
        (0..(1usize << 12)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let p4 = noise.project(4)?;
    let idem = p4
        .project(4)?
        .sub(&p4)?
        .norm(NormSpec::Lp(f64::INFINITY))?;
    let detail = noise.sub(&p4)?;
    let pyth = (noise.energy() - p4.energy() - detail.energy()).abs();
    let mass = (noise.mean() - p4.mean()).abs();
    record(
        &mut rep,
        "projection is idempotent, mass-preserving, Pythagorean",
        idem <= 1e-12 && pyth <= 1e-10 && mass <= 1e-12,
        format!("idem {idem:.2e}, pyth {pyth:.2e}, mass {mass:.2e}"),
    );

    // A full mixer stage turns the two-value datum into the level-3
    // checkerboard (alternating tiles, 1 on the origin tile).
    let mixer = MixerParams::new(cfg.alpha, 2)?;
    let events = flow::mixer_events(&mixer);
    let mut f = ScalarField::theta0(5)?;
    for e in events.iter().take(2) {
        f = advect_event(&f, e, 1.0);
    }
    let (cx, cy) = geometry::box_counts(3);
    let mut vals = Vec::with_capacity((cx * cy) as usize);
    for b in 0..cy {
        for a in 0..cx {
            vals.push(if (a + b) % 2 == 0 { 1.0 } else { 0.0 });
        }
    }
    let want = ScalarField::from_tile_values(5, 3, &vals)?;
    let checker_ok = f.data() == want.data();
    record(
        &mut rep,
        "first mixer stage produces the level-3 checkerboard",
        checker_ok,
        "alternating tiles, exact".into(),
    );

    // Heat kernel: a single Fourier mode decays at its exact rate.
    let k_mode = 3.0;
    let mode = ScalarField::from_fn(6, |x, _| (2.0 * std::f64::consts::PI * k_mode * x
        / geometry::WIDTH)
        .cos());
    let tau = 1e-3;
    let lam = (2.0 * std::f64::consts::PI * k_mode / geometry::WIDTH).powi(2);
    let got = mode.heat(tau);
    let want = mode.scaled((-lam * tau).exp());
    let err = got.sub(&want)?.norm(NormSpec::Lp(f64::INFINITY))?;
    record(
        &mut rep,
        "heat step decays a pure mode at its exact rate",
        err <= 1e-12,
        format!("max error {err:.3e}"),
    );

    // Aligned shears permute cell values (multiset invariance).
    let mut g = noise.clone();
    for e in flow::mixer_events(&MixerParams::new(cfg.alpha, 3)?) {
        g = advect_event(&g, &e, 1.0);
    }
    let mut a: Vec<f64> = noise.data().to_vec();
    let mut b: Vec<f64> = g.data().to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let multiset = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    record(
        &mut rep,
        "aligned shears permute the cell values",
        multiset <= 1e-12,
        format!("worst multiset gap {multiset:.3e}"),
    );

    Ok(rep)
}
