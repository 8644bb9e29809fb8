//! Probe: how much of the terminal energy drop flows through the heat
//! semigroup vs the sub-grid advection closure, per diffusivity.

use std::time::Instant;

use cascade_core::field::{NormSpec, ScalarField};
use cascade_core::flow::MixerParams;
use cascade_core::propagator::{Propagator, PropagatorConfig};
use cascade_core::schedule::Schedule;

fn main() {
    let q = 10u32;
    let jmax = 16u32;
    let datum = ScalarField::theta0(q).unwrap().offset(-0.5);
    let e0 = datum.energy();
    println!("q = {q}, jmax = {jmax}, e0 = {e0:.6e}");
    for (kexp, depth) in [(-10i32, 9u32), (-14, 11), (-18, 13)] {
        let kappa = (kexp as f64).exp2();
        let sched = Schedule::new(0.5, jmax, jmax, 1.0).unwrap();
        let prop = Propagator::new(sched, MixerParams::new(0.5, depth).unwrap()).unwrap();
        let cfg = PropagatorConfig::new(kappa);
        let t = Instant::now();
        let rec = prop.propagate(&datum, 0.0, 1.0, &cfg).unwrap();
        let e1 = rec.final_field.energy();
        let drop = e0 - e1;
        let closure = rec.advective_subgrid_loss;
        let heat = drop - closure;
        let h1_implied = (heat / (2.0 * kappa)).sqrt();
        println!(
            "kappa 2^{kexp}: depth {depth} drop {drop:.6e} closure {closure:.6e} ({:.2}%) \
             heat {heat:.6e} implied_h1_l2t {h1_implied:.4e} l1 {:.3e} l2 {:.3e} [{:.1} s]",
            100.0 * closure / drop,
            rec.final_field.norm(NormSpec::Lp(1.0)).unwrap(),
            rec.final_field.norm(NormSpec::Lp(2.0)).unwrap(),
            t.elapsed().as_secs_f64()
        );
    }
}
