//! Cross-module invariants on the fixture corpus: the factor-2 upper bound,
//! the translation-energy comparison, the small-r decay slope, uniqueness
//! of the asymptotic mean, and serialization round trips.

use proptest::prelude::*;
use w11ext_core::corpus::{generate, CorpusSpec, Family};
use w11ext_core::energy::{
    averaged_translation, integral_dist_to_point, small_r_sweep, theta, translation_energy,
    Quadrature,
};
use w11ext_core::num::Norm;
use w11ext_core::{GridMap, Manifold, Point};

fn corpus() -> Vec<(String, GridMap)> {
    let mk = |family: Family, manifold: &str, counts: Vec<usize>, seed: u64| {
        generate(&CorpusSpec {
            family,
            manifold_id: manifold.into(),
            counts,
            h: 1.0,
            origin: None,
            seed,
        })
        .unwrap()
    };
    vec![
        ("bump-1d".into(), mk(Family::SingleBump, "circle", vec![32], 11)),
        ("multi-1d".into(), mk(Family::MultiBump { bumps: 3 }, "sphere:3", vec![32], 12)),
        ("smooth-1d".into(), mk(Family::SmoothSampled, "circle", vec![64], 13)),
        ("bump-2d".into(), mk(Family::SingleBump, "circle", vec![16, 16], 14)),
        ("step-1d".into(), mk(Family::TwoValuedStep, "circle", vec![32], 16)),
    ]
}

#[test]
fn upper_bound_holds_across_corpus() {
    for (name, u) in corpus() {
        let e = integral_dist_to_point(&u, &u.tail_point()).unwrap().value;
        for r in [2.7, 5.3, 11.9] {
            let t = theta(&u, r, Norm::Euclidean, Quadrature::Midpoint).unwrap().value;
            assert!(t <= 2.0 * e * 1.05, "{name} r={r}: {t} vs {}", 2.0 * e);
        }
    }
}

#[test]
fn translation_bounded_by_theta_with_finite_constant() {
    // dist-translation at |shift| <= R against Theta(R): the comparison
    // constant stays finite and modest across the corpus
    let big_r = 6.0;
    let mut worst: f64 = 0.0;
    for (name, u) in corpus() {
        let t = theta(&u, big_r, Norm::Euclidean, Quadrature::Midpoint).unwrap().value;
        if t == 0.0 {
            continue;
        }
        for frac in [0.25, 0.5, 1.0] {
            let mut shift = vec![0.0; u.dim()];
            shift[0] = big_r * frac;
            let te = translation_energy(&u, &shift, Quadrature::Midpoint).unwrap().value;
            let c = te / t;
            assert!(c.is_finite(), "{name}: infinite comparison constant");
            worst = worst.max(c);
        }
    }
    assert!(worst > 0.0);
    assert!(worst < 100.0, "translation constant blew up: {worst}");
    println!("empirical translation constant across corpus: {worst:.3}");
}

#[test]
fn averaged_translation_bounded_by_twice_inf_energy() {
    for (name, u) in corpus() {
        let e = integral_dist_to_point(&u, &u.tail_point()).unwrap().value;
        let a = averaged_translation(&u, 2.0, 6, Quadrature::Midpoint).unwrap().value;
        assert!(a >= 0.0);
        assert!(a <= 2.0 * e * (1.0 + 1e-12), "{name}: {a} vs {}", 2.0 * e);
    }
}

#[test]
fn small_r_decay_is_roughly_linear_for_smooth_maps() {
    // Theta(r) = O(r) for Lipschitz maps: halving r should roughly halve
    // the value
    let u = generate(&CorpusSpec {
        family: Family::SmoothSampled,
        manifold_id: "sphere:3".into(),
        counts: vec![64],
        h: 1.0,
        origin: None,
        seed: 13,
    })
    .unwrap();
    let rs = [16.0, 8.0, 4.0, 2.0];
    let sweep = small_r_sweep(&u, &rs, Norm::Euclidean, Quadrature::Midpoint).unwrap();
    for w in sweep.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!(
            (1.4..=2.6).contains(&ratio),
            "halving slope off: Theta({}) / Theta({}) = {ratio}",
            w[0].0,
            w[1].0
        );
    }
    // and a step map approaches the jump contribution, still decaying
    let step = generate(&CorpusSpec {
        family: Family::TwoValuedStep,
        manifold_id: "circle".into(),
        counts: vec![64],
        h: 1.0,
        origin: None,
        seed: 16,
    })
    .unwrap();
    let sweep = small_r_sweep(&step, &rs, Norm::Euclidean, Quadrature::Midpoint).unwrap();
    for w in sweep.windows(2) {
        assert!(w[0].1 > w[1].1);
    }
}

#[test]
fn the_asymptotic_mean_is_the_tail() {
    // uniqueness: the only point with finite L1 distance is the tail; among
    // sampled manifold points the tail minimizes
    for (name, u) in corpus() {
        let tail = u.tail_point();
        let at_tail = integral_dist_to_point(&u, &tail).unwrap().value;
        assert!(at_tail.is_finite());
        let m = u.manifold().clone();
        for k in 1..8 {
            let angle = 0.7 * k as f64;
            let candidate = match m.ambient_dim() {
                2 => Point(vec![angle.cos(), angle.sin()]),
                3 => Point(vec![angle.cos(), angle.sin(), 0.0]),
                _ => continue,
            };
            let e = integral_dist_to_point(&u, &candidate).unwrap().value;
            if m.dist_slice(candidate.coords(), tail.coords()) > 0.0 {
                assert!(e.is_infinite(), "{name}: off-tail point must cost infinity");
            } else {
                assert_eq!(e, at_tail);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// serialization round trip is the identity on values, geometry and tail
    #[test]
    fn gridmap_json_round_trip(
        seed in 0u64..1000,
        n in 1usize..12,
        family_id in 0usize..4,
    ) {
        let family = match family_id {
            0 => Family::Constant,
            1 => Family::SingleBump,
            2 => Family::SmoothSampled,
            _ => Family::TwoValuedStep,
        };
        let u = generate(&CorpusSpec {
            family,
            manifold_id: "circle".into(),
            counts: vec![n],
            h: 0.5,
            origin: None,
            seed,
        }).unwrap();
        let back = GridMap::from_json(&u.to_json()).unwrap();
        prop_assert_eq!(back.values_flat(), u.values_flat());
        prop_assert_eq!(back.tail(), u.tail());
        prop_assert_eq!(back.origin(), u.origin());
        prop_assert_eq!(back.h(), u.h());
    }

    /// the triangle inequality propagates to energies: the pointwise L1
    /// distance never exceeds the sum of the distances to any midpoint map
    #[test]
    fn energy_triangle_through_a_common_point(seed in 0u64..500) {
        let m = Manifold::circle();
        let u = generate(&CorpusSpec {
            family: Family::SingleBump,
            manifold_id: "circle".into(),
            counts: vec![16],
            h: 1.0,
            origin: None,
            seed,
        }).unwrap();
        let b = u.tail_point();
        let e = integral_dist_to_point(&u, &b).unwrap().value;
        // splitting through the geodesic midpoint of each value can only
        // grow the total
        let mut split = 0.0;
        for i in 0..u.cell_count() {
            let v = u.value(i);
            if m.dist_slice(v, b.coords()) == 0.0 { continue; }
            let mid = m.geodesic_profile(&Point(v.to_vec()), &b, 0.0).unwrap();
            split += u.cell_volume()
                * (m.dist_slice(v, mid.coords()) + m.dist_slice(mid.coords(), b.coords()));
        }
        prop_assert!(e <= split * (1.0 + 1e-9) + 1e-12);
    }
}
