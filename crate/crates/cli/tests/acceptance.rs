//! End-to-end acceptance suite: one test per verification criterion.
//!
//! Each test prints a single `criterion NN (...): PASS/FAIL` line plus the
//! observed numbers, then asserts. The heavy vanishing-diffusivity sweep is
//! computed once and shared by the dissipation, convergence, and regularity
//! criteria.

use std::sync::OnceLock;
use std::time::Instant;

use cascade_cli::config::{parse_ladder, RunConfig};
use cascade_cli::experiments::sweep::SweepOutput;
use cascade_cli::experiments::{
    baseflow, converge, dissipation, energy_jumps, intermittency, pairs, regularity, richardson,
};
use cascade_cli::report::{fit_powerlaw, ExperimentReport};
use cascade_core::field::{NormSpec, ScalarField};
use cascade_core::flow::{self, MixerParams, Substep};
use cascade_core::geometry::{self, TorusPoint};
use cascade_core::particles;
use cascade_core::propagator::{advect_event, Propagator, PropagatorConfig};
use cascade_core::schedule::{Schedule, TimeLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn acfg() -> serde_json::Value {
    serde_json::json!({ "suite": "acceptance" })
}

/// Prints the per-check detail of a report and asserts its verdict.
fn emit(idx: u32, name: &str, rep: &ExperimentReport) {
    println!("criterion {idx:02} ({name}): {}", rep.verdict());
    for c in rep.checks() {
        println!(
            "    [{}] {} — {} (want {})",
            if c.passed { "ok" } else { "FAILED" },
            c.name,
            c.observed,
            c.tolerance
        );
    }
    assert!(rep.passed(), "criterion {idx:02} ({name}) failed");
}

fn pass(idx: u32, name: &str, detail: &str) {
    println!("criterion {idx:02} ({name}): PASS — {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// The full-interval diffusivity sweep shared by criteria 5, 8, and 9.
fn shared_sweep() -> &'static SweepOutput {
    static SWEEP: OnceLock<SweepOutput> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.kappa_ladder = parse_ladder("-10:-18:-2").expect("ladder");
        cfg.out = std::env::temp_dir().join("cascade-acceptance");
        dissipation::shared_sweep(&cfg).expect("shared diffusivity sweep")
    })
}

#[test]
fn criterion_01_singular_time_lattice() {
    let t0 = Instant::now();
    for &alpha in &[0.1, 1.0 / 3.0, 0.5, 0.9] {
        let sched = Schedule::new(alpha, 40, 60, 1.0).unwrap();
        let r = sched.ratio();
        let want_r = (-0.5 * (1.0 - alpha)).exp2();
        assert!(
            (r - want_r).abs() <= 1e-15,
            "alpha={alpha}: ratio {r} vs 2^(-(1-alpha)/2) = {want_r}"
        );

        // Normalizer against its independent partial-sum definition.
        let mut z = 0.0f64;
        let mut rj = 1.0f64;
        for j in 0..200_000u64 {
            let term = (j as f64 + 2.0) * rj;
            z += term;
            rj *= r;
            if term < 1e-18 * z {
                break;
            }
        }
        assert!(
            rel(sched.normalizer(), z) <= 1e-12,
            "alpha={alpha}: normalizer {} vs series {z}",
            sched.normalizer()
        );

        for i in 0..=30u32 {
            // Epoch right edge is exactly r^i.
            let sii = sched.s_time(i, i).unwrap();
            assert!(rel(sii, r.powi(i as i32)) <= 1e-12, "alpha={alpha}: s({i},{i}) vs r^{i}");
            // Every window width equals sigma of its level.
            for j in i..i + 20 {
                let (lo, hi) = sched.window(i, j).unwrap();
                assert!(
                    (hi - lo - sched.sigma(j)).abs() <= 1e-12,
                    "alpha={alpha}: window ({i},{j}) width {} vs sigma {}",
                    hi - lo,
                    sched.sigma(j)
                );
                assert!(hi > lo, "alpha={alpha}: window ({i},{j}) must be nonempty");
            }
            // The accumulation point leaves a strictly positive pause after
            // the next epoch ends.
            let pause = sched.s_inf(i) - sched.s_time(i + 1, i + 1).unwrap();
            assert!(pause > 0.0, "alpha={alpha}: epoch {i} pause must be positive");
            // The window chain converges to the accumulation point.
            assert!(
                (sched.s_time(i, i + 4000).unwrap() - sched.s_inf(i)).abs() <= 1e-12,
                "alpha={alpha}: deep windows must approach s_inf({i})"
            );
        }
    }

    // Frozen reference values at alpha = 1/2, m = 1.
    let sched = Schedule::new(0.5, 40, 60, 1.0).unwrap();
    assert!((sched.ratio() - 0.840_896_415_253_714_5).abs() <= 1e-15);
    assert!((sched.normalizer() - 45.789_139_3).abs() <= 1e-4);
    assert!((sched.sigma(0) - 0.021_839_24).abs() <= 1e-7);
    assert!((sched.s_inf(0) - 0.862_735_6).abs() <= 1e-6);
    assert!((sched.s_time(0, 1).unwrap() - 0.978_160_76).abs() <= 1e-7);
    let t_star = sched.s_time(0, 1).unwrap() + 0.5 * sched.sigma(0);
    assert!((t_star - 0.989_080_38).abs() <= 1e-7);
    assert_eq!(sched.gamma_param(), 1.0 / 64.0);

    // Classification covers the lattice labels.
    assert!(matches!(sched.classify(1.0), TimeLabel::Terminal));
    let mid_pause = 0.5 * (sched.s_time(1, 1).unwrap() + sched.s_inf(0));
    assert!(matches!(sched.classify(mid_pause), TimeLabel::Pause { epoch: 0 }));
    let mid_last = 0.5 * (sched.s_time(0, 1).unwrap() + 1.0);
    assert!(matches!(sched.classify(mid_last), TimeLabel::Active { epoch: 0, level: 0, .. }));

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 1.0, "lattice checks must finish within 1 s, took {dt:.3} s");
    pass(
        1,
        "singular time lattice",
        &format!(
            "4 exponents, epochs <= 30, frozen alpha=1/2 values, {:.0} ms",
            dt * 1e3
        ),
    );
}

#[test]
fn criterion_02_projection_family() {
    let t0 = Instant::now();
    let q = 10u32;
    let n = 1usize << q;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f =
        ScalarField::from_cells(q, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let f_l1 = f.norm(NormSpec::Lp(1.0)).unwrap();
    let f_l2 = f.norm(NormSpec::Lp(2.0)).unwrap();
    let f_sup = f.min_max().0.abs().max(f.min_max().1.abs());
    let levels = [0u32, 3, 7, 11, 16, 20];

    for &l in &levels {
        let p = f.project(l).unwrap();
        // Idempotence.
        let pp = p.project(l).unwrap();
        let worst =
            p.data().iter().zip(pp.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "level {l}: idempotence drift {worst:.2e}");
        // Mass.
        assert!(
            (p.integral() - f.integral()).abs() <= 1e-12,
            "level {l}: integral drift"
        );
        // Contraction in L1, L2, sup.
        assert!(p.norm(NormSpec::Lp(1.0)).unwrap() <= f_l1 + 1e-12, "level {l}: L1 contraction");
        assert!(p.norm(NormSpec::Lp(2.0)).unwrap() <= f_l2 + 1e-12, "level {l}: L2 contraction");
        let p_sup = p.min_max().0.abs().max(p.min_max().1.abs());
        assert!(p_sup <= f_sup + 1e-12, "level {l}: sup contraction");
        // Pythagoras: ||f||^2 = ||Pf||^2 + ||f - Pf||^2.
        let e2 = f.energy();
        let split = p.energy() + f.sub(&p).unwrap().energy();
        assert!(rel(e2, split) <= 1e-10, "level {l}: energy split off by {:.2e}", rel(e2, split));
        // Consistency: coarse of fine equals coarse.
        for &m in levels.iter().filter(|&&m| m < l) {
            let direct = f.project(m).unwrap();
            let nested = p.project(m).unwrap();
            let worst = direct
                .data()
                .iter()
                .zip(nested.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-12, "levels {m}<{l}: tower property drift {worst:.2e}");
        }
        // Mean-of-tile bounds: sup and TV of projections against L1/area.
        let (w, h) = geometry::box_dims(l);
        let area = w * h;
        assert!(
            p_sup <= f_l1 / area * (1.0 + 1e-12) + 1e-12,
            "level {l}: sup bound via mass/area"
        );
        let tv = p.norm(NormSpec::DiscreteTV).unwrap();
        assert!(
            tv <= 2.0 * (w + h) * f_l1 / area * (1.0 + 1e-9),
            "level {l}: TV bound via perimeter x mass/area"
        );
    }

    // Bound-saturating spikes: unit-mass single-tile data. Against the tile
    // count x = 2^l the sup must scale like x (slope 1) and the TV like
    // sqrt(x) (slope 1/2).
    let mut sup_pts = Vec::new();
    let mut tv_pts = Vec::new();
    for &l in &[2u32, 4, 6, 8, 10, 12] {
        let (cx, cy) = geometry::box_counts(l);
        let mut vals = vec![0.0; (cx * cy) as usize];
        vals[0] = 1.0;
        let (w, h) = geometry::box_dims(l);
        let spike = ScalarField::from_tile_values(q, l, &vals).unwrap().scaled(1.0 / (w * h));
        let x = (1u64 << l) as f64;
        sup_pts.push((x, spike.min_max().1));
        tv_pts.push((x, spike.norm(NormSpec::DiscreteTV).unwrap()));
    }
    let sup_fit = fit_powerlaw(&sup_pts).unwrap();
    let tv_fit = fit_powerlaw(&tv_pts).unwrap();
    assert!(
        (sup_fit.exponent - 1.0).abs() <= 0.1,
        "spike sup exponent {} vs 1.0",
        sup_fit.exponent
    );
    assert!(
        (tv_fit.exponent - 0.5).abs() <= 0.05,
        "spike TV exponent {} vs 0.5",
        tv_fit.exponent
    );

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "projection checks must finish within 10 s, took {dt:.2} s");
    pass(
        2,
        "projection family",
        &format!(
            "6 levels at q=10; spike exponents sup {:.4}, TV {:.4}; {:.2} s",
            sup_fit.exponent, tv_fit.exponent, dt
        ),
    );
}

#[test]
fn criterion_03_mixer_exactness() {
    let t0 = Instant::now();

    // (a) Stage timetable closed forms.
    let params = MixerParams::new(0.5, 8).unwrap();
    for k in 0..8u32 {
        let want = 0.5 * (1.0 - (-(1.0 - 0.5) * k as f64).exp2());
        assert!(
            (params.stage_start(k) - want).abs() <= 1e-15,
            "stage {k} start vs closed form"
        );
        let dur = params.stage_start(k + 1) - params.stage_start(k);
        assert!(
            (params.stage_duration(k) - dur).abs() <= 1e-15,
            "stage {k} duration vs start difference"
        );
    }

    // (b) Checkerboard refinement oracle at q=7, depth 5: after substep A of
    // stage k the pattern is the square board with 2^(k+1) cells per axis
    // (tile level 2k+2); after the full stage it is the 2^(k+2) x 2^(k+1)
    // board (tile level 2k+3), value 1 on the origin tile.
    let q = 7u32;
    let depth = 5u32;
    let board = |level: u32| -> ScalarField {
        let (cx, cy) = geometry::box_counts(level);
        let mut vals = Vec::with_capacity((cx * cy) as usize);
        for b in 0..cy {
            for a in 0..cx {
                vals.push(if (a + b) % 2 == 0 { 1.0 } else { 0.0 });
            }
        }
        ScalarField::from_tile_values(q, level, &vals).unwrap()
    };
    let events = flow::mixer_events(&MixerParams::new(0.5, depth).unwrap());
    assert_eq!(events.len(), 2 * depth as usize, "two substeps per stage");
    let mut f = ScalarField::theta0(q).unwrap();
    for k in 0..depth {
        let a = &events[2 * k as usize];
        let b = &events[2 * k as usize + 1];
        assert_eq!(a.substep, Substep::LongAxis);
        assert_eq!(b.substep, Substep::ShortAxis);
        f = advect_event(&f, a, 1.0);
        assert_eq!(f.data(), board(2 * k + 2).data(), "pattern after substep A of stage {k}");
        f = advect_event(&f, b, 1.0);
        assert_eq!(f.data(), board(2 * k + 3).data(), "pattern after stage {k}");
    }

    // (c) Aligned window events permute cell values and preserve norms.
    let q2 = 6u32;
    let sched = Schedule::new(0.5, 4, 6, 1.0).unwrap();
    let mixer = MixerParams::new(0.5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n2 = 1usize << q2;
    let g0 = ScalarField::from_cells(q2, (0..n2 * n2).map(|_| rng.gen::<f64>()).collect()).unwrap();
    for (i, j) in [(0u32, 1u32), (1, 2), (2, 3)] {
        let (lo, hi) = sched.window(i, j).unwrap();
        let mut g = g0.clone();
        for e in flow::global_events(&sched, &mixer, lo, hi).unwrap() {
            g = advect_event(&g, &e, 1.0);
        }
        let mut a: Vec<f64> = g0.data().to_vec();
        let mut b: Vec<f64> = g.data().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b, "window ({i},{j}): events must permute the cell values");
        for p in [1.0, 2.0, 4.0] {
            assert!(
                rel(g.norm(NormSpec::Lp(p)).unwrap(), g0.norm(NormSpec::Lp(p)).unwrap()) <= 1e-13,
                "window ({i},{j}): L^{p} must be preserved"
            );
        }
        // (d) Box-mean invariance: level-j tile means are untouched.
        let pf = g0.project(j).unwrap();
        let pg = g.project(j).unwrap();
        let worst =
            pf.data().iter().zip(pg.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "window ({i},{j}): box-mean drift {worst:.2e}");
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "mixer checks must finish within 30 s, took {dt:.2} s");
    pass(
        3,
        "mixer exactness",
        &format!("5-stage refinement exact, 3 windows permute values; {:.2} s", dt),
    );
}

#[test]
fn criterion_04_solver_sanity() {
    let t0 = Instant::now();
    let q = 10u32;
    let sched = Schedule::new(0.5, 16, 16, 1.0).unwrap();
    let mixer = MixerParams::new(0.5, 6).unwrap();
    let prop = Propagator::new(sched.clone(), mixer).unwrap();
    let wpi = 2.0 * std::f64::consts::PI;

    // (a) Pure heat across the event-free pause of epoch 0, against the
    // exact two-mode decay.
    let ta = sched.s_time(1, 1).unwrap();
    let tb = sched.s_inf(0);
    let kappa = 1e-3;
    let modes = [(2.0, 3.0, 1.0), (5.0, 0.0, 0.5)];
    let f0 = ScalarField::from_fn(q, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, c)| {
                c * (wpi * kx * x / geometry::WIDTH).cos() * (wpi * ky * y / geometry::HEIGHT).cos()
            })
            .sum()
    });
    let rec = prop.propagate(&f0, ta, tb, &PropagatorConfig::new(kappa)).unwrap();
    let want = ScalarField::from_fn(q, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, c)| {
                let lam = (wpi * kx / geometry::WIDTH).powi(2) + (wpi * ky / geometry::HEIGHT).powi(2);
                c * (-kappa * lam * (tb - ta)).exp()
                    * (wpi * kx * x / geometry::WIDTH).cos()
                    * (wpi * ky * y / geometry::HEIGHT).cos()
            })
            .sum()
    });
    let worst = rec
        .final_field
        .data()
        .iter()
        .zip(want.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "heat span: worst deviation {worst:.2e} from analytic decay");

    // (b) Advection only (kappa = 0) across window (0,1): an exact
    // permutation of cell values, so every L^p norm is preserved.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 1usize << q;
    let g0 = ScalarField::from_cells(q, (0..n * n).map(|_| rng.gen::<f64>()).collect()).unwrap();
    let (lo, hi) = sched.window(0, 1).unwrap();
    let rec = prop.propagate(&g0, lo, hi, &PropagatorConfig::new(0.0)).unwrap();
    let mut a: Vec<f64> = g0.data().to_vec();
    let mut b: Vec<f64> = rec.final_field.data().to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a, b, "zero-diffusivity window must permute the cell values exactly");
    for p in [1.0, 2.0] {
        assert!(
            rel(
                rec.final_field.norm(NormSpec::Lp(p)).unwrap(),
                g0.norm(NormSpec::Lp(p)).unwrap()
            ) <= 1e-13,
            "zero-diffusivity window: L^{p} drift"
        );
    }

    // (c) Energy balance with the dissipation density recorded. First on a
    // configuration whose events are all grid-aligned (levels <= 2q), where
    // the sub-grid closure contributes nothing beyond summation rounding of
    // the per-cell energy bookkeeping; then on the full configuration
    // including the closure term.
    let datum = ScalarField::theta0(q).unwrap().offset(-0.5);
    let mut cfg = PropagatorConfig::new(2e-4);
    cfg.record_dissipation = true;

    let sched8 = Schedule::new(0.5, 8, 8, 1.0).unwrap();
    let prop8 = Propagator::new(sched8, MixerParams::new(0.5, 5).unwrap()).unwrap();
    let rec = prop8.propagate(&datum, 0.85, 1.0, &cfg).unwrap();
    assert!(
        rec.advective_subgrid_loss.abs() <= 1e-12,
        "aligned configuration sub-grid loss {} exceeds summation rounding",
        rec.advective_subgrid_loss
    );
    let drop = datum.energy() - rec.final_field.energy();
    let heat_only = rec.dissipation_density.as_ref().expect("density recorded").integral();
    let pure_imbalance = (drop - heat_only).abs() / drop;
    assert!(
        pure_imbalance <= 0.01,
        "aligned balance off by {pure_imbalance:.4e} (drop {drop:.6e}, heat {heat_only:.6e})"
    );

    let rec = prop.propagate(&datum, 0.85, 1.0, &cfg).unwrap();
    let drop = datum.energy() - rec.final_field.energy();
    // The recorded density accumulates both the heat dissipation and the
    // sub-grid closure transfer, so its integral alone must meet the drop.
    let accounted = rec.dissipation_density.as_ref().expect("density recorded").integral();
    let imbalance = (drop - accounted).abs() / drop;
    assert!(
        imbalance <= 0.01,
        "energy balance off by {imbalance:.4e} (drop {drop:.6e}, accounted {accounted:.6e})"
    );
    assert!(
        rec.advective_subgrid_loss >= -1e-12 && rec.advective_subgrid_loss <= drop,
        "closure share {} outside [0, drop]",
        rec.advective_subgrid_loss
    );

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "solver checks must finish within 60 s, took {dt:.2} s");
    pass(
        4,
        "solver sanity",
        &format!(
            "heat exact to {worst:.1e}, advection permutes, balance off by {imbalance:.1e}; {dt:.1} s"
        ),
    );
}

#[test]
fn criterion_05_anomalous_dissipation() {
    let t0 = Instant::now();
    let sweep = shared_sweep();
    let rep = dissipation::report_from_sweep(acfg(), sweep).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 600.0, "dissipation sweep must finish within 10 min, took {dt:.1} s");
    emit(5, "anomalous dissipation", &rep);
}

#[test]
fn criterion_06_single_particle_dispersion() {
    let t0 = Instant::now();
    for &alpha in &[1.0 / 3.0, 0.5] {
        let args = richardson::RichardsonArgs {
            alpha,
            kappas: vec![1e-10],
            x0: TorusPoint::new(0.35, 0.62),
            n_particles: 10_000,
            seed: 1,
        };
        let rep = richardson::run_with(acfg(), &args).unwrap();
        emit(6, &format!("dispersion law, alpha={alpha:.3}"), &rep);
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 120.0, "dispersion runs must finish within 2 min, took {dt:.1} s");
}

#[test]
fn criterion_07_pair_separation() {
    let t0 = Instant::now();
    let args = pairs::PairsArgs {
        alpha: 0.5,
        kappa: 1e-10,
        r0_list: vec![0.0, geometry::WIDTH / 32.0, geometry::WIDTH / 8.0],
        n_pairs: 2000,
        seed: 1,
    };
    let rep = pairs::run_with(acfg(), &args).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 180.0, "pair runs must finish within 3 min, took {dt:.1} s");
    emit(7, "pair separation envelope", &rep);
}

#[test]
fn criterion_08_convergence_to_the_limit() {
    let sweep = shared_sweep();
    let rep = converge::report_from_sweep(acfg(), sweep).unwrap();
    emit(8, "convergence to the limiting evolution", &rep);
}

#[test]
fn criterion_09_uniform_regularity() {
    let sweep = shared_sweep();
    let rep = regularity::report_from_sweep(acfg(), sweep).unwrap();
    emit(9, "uniform regularity window", &rep);
}

#[test]
fn criterion_10_intermittent_blowup() {
    let t0 = Instant::now();
    let args = intermittency::IntermittencyArgs {
        alpha: 0.5,
        grid_exp: 11,
        jmax: 12,
        depth_floor: 6,
        kappas: vec![(-10.0f64).exp2(), (-14.0f64).exp2(), (-18.0f64).exp2()],
        t_probe: 0.3,
        beta: 0.5,
        p: 4.0,
        p_alt: 1.9,
        q_ladder: vec![8, 9, 10, 11],
    };
    let rep = intermittency::run_with(acfg(), &args).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 300.0, "intermittency runs must finish within 5 min, took {dt:.1} s");
    emit(10, "intermittent norm blowup", &rep);
}

#[test]
fn criterion_11_limiting_energy_jumps() {
    let t0 = Instant::now();
    let args = energy_jumps::JumpArgs { alpha: 0.5, grid_exp: 9, epochs: 4, seed: 1 };
    let rep = energy_jumps::run_with(acfg(), &args).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "jump checks must finish within 10 s, took {dt:.1} s");
    emit(11, "limiting energy jumps", &rep);
}

#[test]
fn criterion_12_auxiliary_inequalities() {
    let t0 = Instant::now();
    let q = 10u32;
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    // (a) Translation bound: ||f(.+h) - f||_1 <= |h| TV(f) on random tile
    // fields, with |h| the Euclidean length of a whole-cell shift.
    let n = 1usize << q;
    for case in 0..100 {
        let level = rng.gen_range(0..=8u32);
        let (cx, cy) = geometry::box_counts(level);
        let vals: Vec<f64> =
            (0..cx * cy).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ScalarField::from_tile_values(q, level, &vals).unwrap();
        let half = (n / 2) as i64;
        let (dx, dy) = (rng.gen_range(-half..=half), rng.gen_range(-half..=half));
        let (cw, ch) = f.cell_dims();
        let hlen = (dx as f64 * cw).hypot(dy as f64 * ch);
        let moved = f.shift_cells(dx, dy);
        let diff = moved.sub(&f).unwrap().norm(NormSpec::Lp(1.0)).unwrap();
        let tv = f.norm(NormSpec::DiscreteTV).unwrap();
        assert!(
            diff <= hlen * tv * (1.0 + 1e-9) + 1e-12,
            "case {case}: ||shift - f||_1 = {diff:.6e} vs |h| TV = {:.6e}",
            hlen * tv
        );
    }

    // (b) Heat-smoothing of a jump datum: ||e^{tau L} f - f||_1 ~ sqrt(tau),
    // fitted over two decades that straddle neither cell nor domain scale.
    let theta = ScalarField::theta0(q).unwrap();
    let mut pts = Vec::new();
    let mut tau = 1e-4;
    while tau <= 1.01e-2 {
        let d = theta.heat(tau).sub(&theta).unwrap().norm(NormSpec::Lp(1.0)).unwrap();
        pts.push((tau, d));
        tau *= 10f64.sqrt();
    }
    let fit = fit_powerlaw(&pts).unwrap();
    assert!(
        (fit.exponent - 0.5).abs() <= 0.1,
        "heat-smoothing exponent {} vs 0.5",
        fit.exponent
    );

    // (c) Spread-concentration product: Var(mu) * sup(mu) >= 0.1 for
    // normalized densities. Frozen closed forms first.
    let uniform = ScalarField::constant(5, 1.0);
    let v = particles::density_variance(&uniform).unwrap();
    assert!(
        (v - (geometry::WIDTH.powi(2) + geometry::HEIGHT.powi(2)) / 12.0).abs() <= 1e-12,
        "uniform density variance {v} vs (W^2+H^2)/12"
    );
    let mut spike_vals = vec![0.0; 32 * 32];
    spike_vals[17 * 32 + 5] = 1.0;
    let spike = ScalarField::from_cells(5, spike_vals).unwrap();
    let (w, h) = spike.cell_dims();
    // The wrapped-quadrature antiderivative cancels O(1) terms down to the
    // cell scale, so the closed form is met to ~1e-11 rather than 1e-15.
    let v = particles::density_variance(&spike).unwrap();
    assert!(
        rel(v, (w * w + h * h) / 12.0) <= 1e-9,
        "one-cell density variance {v} vs cell second moment"
    );
    let (prod, ok) = particles::variance_lower_bound_check(&spike, 0.1).unwrap();
    assert!(ok, "one-cell density product {prod} must clear the floor");

    // Random strictly positive densities all clear the floor.
    for case in 0..100 {
        let mu = ScalarField::from_cells(
            5,
            (0..32 * 32).map(|_| rng.gen_range(0.05..1.0)).collect(),
        )
        .unwrap();
        let (prod, ok) = particles::variance_lower_bound_check(&mu, 0.1).unwrap();
        assert!(ok, "density case {case}: product {prod} below floor 0.1");
    }

    // Brute-force center scan agrees with the exact evaluator within the
    // Lipschitz resolution of the scan grid.
    for case in 0..25 {
        let mu = ScalarField::from_cells(
            5,
            (0..32 * 32).map(|_| rng.gen_range(0.05..1.0)).collect(),
        )
        .unwrap();
        let exact = particles::density_variance(&mu).unwrap();
        let total = mu.integral();
        let (w, h) = mu.cell_dims();
        let cell_moment = (w * w + h * h) / 12.0;
        let m = 48usize;
        let mut oracle = f64::INFINITY;
        for iy in 0..m {
            let ay = (iy as f64 + 0.5) / m as f64 * geometry::HEIGHT;
            for ix in 0..m {
                let ax = (ix as f64 + 0.5) / m as f64 * geometry::WIDTH;
                let a = TorusPoint::new(ax, ay);
                let mut acc = 0.0;
                for cy in 0..32 {
                    for cx in 0..32 {
                        let c = TorusPoint::new((cx as f64 + 0.5) * w, (cy as f64 + 0.5) * h);
                        acc += mu.data()[cy * 32 + cx]
                            * (geometry::torus_dist(c, a).powi(2) + cell_moment);
                    }
                }
                oracle = oracle.min(acc * w * h / total);
            }
        }
        assert!(
            (oracle - exact).abs() <= 0.05,
            "density case {case}: scan {oracle:.6} vs exact {exact:.6}"
        );
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "inequality checks must finish within 60 s, took {dt:.1} s");
    pass(
        12,
        "auxiliary inequalities",
        &format!(
            "100 translation cases, heat exponent {:.4}, 100+25 density cases; {:.1} s",
            fit.exponent, dt
        ),
    );
}

#[test]
fn criterion_13_base_pattern_norms() {
    let t0 = Instant::now();
    for &alpha in &[1.0 / 3.0, 0.5] {
        let args = baseflow::BaseflowArgs { alpha, grid_exp: 10, depth: 8 };
        let rep = baseflow::run_with(acfg(), &args).unwrap();
        emit(13, &format!("base pattern norms, alpha={alpha:.3}"), &rep);
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "base-pattern checks must finish within 60 s, took {dt:.1} s");
}
