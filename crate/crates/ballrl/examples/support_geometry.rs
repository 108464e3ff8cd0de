//! Closed-form support functions over the three action-set shapes.
//!
//! ```sh
//! cargo run --example support_geometry
//! ```

use ballrl::geometry::{unit_directions, ActionSet, FeatureVector};

fn main() {
    let sets = vec![
        ActionSet::Ball {
            dim: 2,
            radius: 2.0,
        },
        ActionSet::Box {
            dim: 2,
            half_width: 1.0,
        },
        ActionSet::Ellipsoid {
            semi_axes: vec![2.0, 1.0],
        },
    ];
    let theta = FeatureVector(vec![3.0, 4.0]);

    println!("direction θ = {:?}", theta.0);
    for set in &sets {
        let value = set.support_value(&theta).unwrap();
        let arg = set.support_argmax(&theta).unwrap();
        println!(
            "{set:?}\n  inner radius ρ = {:.4}, outer radius η = {:.4}, regularity B = {:.4}",
            set.inner_radius(),
            set.outer_radius(),
            set.regularity()
        );
        println!(
            "  max ⟨a,θ⟩ = {value:.6} attained at {:?} (member: {})",
            arg.0,
            set.contains_tol(&arg, 1e-12).unwrap()
        );
    }

    // Sandwich property: along every direction the support value sits
    // between the inscribed and circumscribed radii.
    for set in &sets {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for u in unit_directions(2, 10_000) {
            let s = set.support_value(&u).unwrap();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        println!(
            "{:<40} support range over directions: [{lo:.4}, {hi:.4}] vs [ρ, η] = [{:.4}, {:.4}]",
            format!("{set:?}"),
            set.inner_radius(),
            set.outer_radius()
        );
    }

    // Positive scaling of θ never moves the maximizer.
    let ball = &sets[0];
    let a = ball.support_argmax(&theta).unwrap();
    let b = ball.support_argmax(&theta.scaled(250.0)).unwrap();
    println!("scale invariance: argmax(θ) = {:?} = argmax(250θ) = {:?}", a.0, b.0);
}
