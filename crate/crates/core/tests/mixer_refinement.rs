//! Pattern-refinement oracle: driving the two-stripe datum through the mixer
//! must reproduce the closed-form checkerboard cascade exactly, every aligned
//! event must act as a cell permutation, and per-box means must be invariant.

use cascade_core::field::ScalarField;
use cascade_core::flow::{self, MixerParams, Substep};
use cascade_core::geometry::{self, Axis};
use cascade_core::propagator::advect_event;
use cascade_core::schedule::Schedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Checkerboard with `2^(k+2)` columns and `2^(k+1)` rows of pattern cells
/// (the exact state after completing stage `k` at level 0), value 1 on the
/// cell containing the origin.
fn checkerboard_after_stage(q: u32, k: u32) -> ScalarField {
    let n = 2 * k + 3; // tiling with counts (2^(k+2), 2^(k+1))
    let (cx, cy) = geometry::box_counts(n);
    let mut vals = Vec::with_capacity((cx * cy) as usize);
    for b in 0..cy {
        for a in 0..cx {
            vals.push(if (a + b) % 2 == 0 { 1.0 } else { 0.0 });
        }
    }
    ScalarField::from_tile_values(q, n, &vals).unwrap()
}

/// Same, after only the first (long-axis) substep of stage `k`: a square
/// checkerboard with `2^(k+1)` cells per axis.
fn checkerboard_after_half_stage(q: u32, k: u32) -> ScalarField {
    let n = 2 * k + 2;
    let (cx, cy) = geometry::box_counts(n);
    let mut vals = Vec::with_capacity((cx * cy) as usize);
    for b in 0..cy {
        for a in 0..cx {
            vals.push(if (a + b) % 2 == 0 { 1.0 } else { 0.0 });
        }
    }
    ScalarField::from_tile_values(q, n, &vals).unwrap()
}

#[test]
fn stripe_datum_refines_into_exact_checkerboards() {
    let q = 7;
    let depth = 5; // stage 4 needs pattern level 11 <= 2q = 14
    let params = MixerParams::new(0.5, depth).unwrap();
    let events = flow::mixer_events(&params);
    assert_eq!(events.len(), 2 * depth as usize);
    let mut f = ScalarField::theta0(q).unwrap();
    for k in 0..depth {
        let a = &events[2 * k as usize];
        let b = &events[2 * k as usize + 1];
        assert_eq!(a.substep, Substep::LongAxis);
        assert_eq!(b.substep, Substep::ShortAxis);
        f = advect_event(&f, a, 1.0);
        assert_eq!(
            f.data(),
            checkerboard_after_half_stage(q, k).data(),
            "after substep A of stage {k}"
        );
        f = advect_event(&f, b, 1.0);
        assert_eq!(
            f.data(),
            checkerboard_after_stage(q, k).data(),
            "after stage {k}"
        );
    }
}

#[test]
fn refinement_holds_for_every_alpha() {
    // The pattern cascade is geometric and alpha-free; only durations change.
    let q = 6;
    for alpha in [0.2, 1.0 / 3.0, 0.5, 0.8] {
        let params = MixerParams::new(alpha, 3).unwrap();
        let mut f = ScalarField::theta0(q).unwrap();
        for e in flow::mixer_events(&params) {
            f = advect_event(&f, &e, 1.0);
        }
        assert_eq!(
            f.data(),
            checkerboard_after_stage(q, 2).data(),
            "final pattern at alpha={alpha}"
        );
    }
}

// Identity-coded field: cell c holds the value c.
fn id_field(q: u32) -> ScalarField {
    let n = 1usize << q;
    ScalarField::from_cells(q, (0..n * n).map(|c| c as f64).collect()).unwrap()
}

#[test]
fn aligned_events_permute_cells_bijectively() {
    let q = 6;
    let sched = Schedule::new(0.5, 4, 6, 1.0).unwrap();
    let mixer = MixerParams::new(0.5, 2).unwrap();
    for (i, j) in [(0u32, 0u32), (0, 2), (1, 1), (2, 4), (1, 3)] {
        let (lo, hi) = sched.window(i, j).unwrap();
        for e in flow::global_events(&sched, &mixer, lo, hi).unwrap() {
            let moved = advect_event(&id_field(q), &e, 1.0);
            let mut seen = vec![false; 1 << (2 * q)];
            for &v in moved.data() {
                let c = v as usize;
                assert_eq!(v, c as f64, "window ({i},{j}): fractional cell id");
                assert!(!seen[c], "window ({i},{j}): cell {c} hit twice");
                seen[c] = true;
            }
        }
    }
}

#[test]
fn active_bands_are_phased_within_each_box() {
    // Level 2 has two boxes across y; substep A has two bands per box. The
    // active band must be the second band of each box: y in [1/4,1/2) and
    // [3/4,1), not the global band pattern {1} of a 4-band reading.
    let q = 5;
    let sched = Schedule::new(0.5, 4, 6, 1.0).unwrap();
    let mixer = MixerParams::new(0.5, 1).unwrap();
    let (lo, hi) = sched.window(2, 2).unwrap();
    let events = flow::global_events(&sched, &mixer, lo, hi).unwrap();
    let e = &events[0];
    assert_eq!(e.shear_axis, Axis::X, "level 2 long axis is x");
    assert_eq!(e.bands_per_box, 2);
    let f = id_field(q);
    let g = advect_event(&f, e, 1.0);
    let n = 1usize << q;
    for iy in 0..n {
        let y = (iy as f64 + 0.5) / n as f64;
        let moved = (0..n).any(|ix| g.data()[iy * n + ix] != f.data()[iy * n + ix]);
        let want_active = (0.25..0.5).contains(&y) || (0.75..1.0).contains(&y);
        assert_eq!(
            moved, want_active,
            "row at y={y}: active bands must be phased per box"
        );
    }
}

#[test]
fn window_advection_preserves_value_multiset_and_box_means() {
    let q = 6;
    let sched = Schedule::new(0.5, 3, 5, 1.0).unwrap();
    let mixer = MixerParams::new(0.5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = ScalarField::from_cells(q, (0..1 << (2 * q)).map(|_| rng.gen::<f64>()).collect())
        .unwrap();
    for (i, j) in [(0u32, 1u32), (1, 2), (2, 3)] {
        let (lo, hi) = sched.window(i, j).unwrap();
        let mut g = f.clone();
        for e in flow::global_events(&sched, &mixer, lo, hi).unwrap() {
            g = advect_event(&g, &e, 1.0);
        }
        // Aligned events only move values around.
        let mut a: Vec<f64> = f.data().to_vec();
        let mut b: Vec<f64> = g.data().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b, "window ({i},{j}) must permute the cell values");
        // Means per level-j box are untouched.
        let pf = f.project(j).unwrap();
        let pg = g.project(j).unwrap();
        for (x, y) in pf.data().iter().zip(pg.data()) {
            assert!((x - y).abs() < 1e-12, "window ({i},{j}) box mean drift");
        }
    }
}
