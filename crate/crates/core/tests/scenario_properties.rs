mod common;

use proptest::prelude::*;
use ripscover::geometry::ConvexPolygon;
use ripscover::scenario::{
    fence_sensors, generate_perturbation, generate_scenario, validate_assumptions, validate_perturbation, Assumption,
    PerturbationCheck, Radii, Scenario, SensorLayout,
};

fn regular(n: usize, r: f64) -> ConvexPolygon {
    let v = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    ConvexPolygon::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fence_grows_with_collar(seed in any::<u64>(), n in 5usize..80, r1 in 0.05f64..0.5, r2 in 0.05f64..0.5) {
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let mk = |r_f| generate_scenario(ConvexPolygon::square(4.0), SensorLayout::Random(n), Radii::tight(1.0, r_f), 0.1, seed).unwrap();
        let small = fence_sensors(&mk(lo));
        let large = fence_sensors(&mk(hi));
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn generated_perturbations_are_admissible(seed in any::<u64>(), pseed in any::<u64>(), eps in 0.0f64..0.4, hex in any::<bool>()) {
        let layout = if hex { SensorLayout::Hex { spacing: 0.7 } } else { SensorLayout::Random(60) };
        let s = generate_scenario(regular(7, 4.0), layout, Radii::tight(1.0, 0.2), eps, seed).unwrap();
        let p = generate_perturbation(&s, pseed);
        prop_assert_eq!(validate_perturbation(&s, &p).unwrap(), PerturbationCheck::Pass);
        prop_assert!(p.max_displacement(&s) <= eps / 2.0 + 1e-12);
        prop_assert_eq!(generate_perturbation(&s, pseed), p);
    }

    #[test]
    fn a5_stable_under_refinement(sides in 3usize..9, radius in 1.5f64..4.0, r_f in 0.05f64..0.4) {
        let s = Scenario::new(regular(sides, radius), Radii::tight(1.0, r_f), 0.1, vec![[0.0, 0.0]]).unwrap();
        // a restricted domain thinner than a few cells is below raster resolution
        prop_assume!((s.domain().inradius() - s.r_hat()).abs() > 0.3);
        let coarse = validate_assumptions(&s, 0.1);
        let fine = validate_assumptions(&s, 0.05);
        match (coarse, fine) {
            (Ok(c), Ok(f)) => prop_assert_eq!(c.status(Assumption::A5), f.status(Assumption::A5)),
            (c, f) => prop_assert_eq!(c.is_err(), f.is_err()),
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..40) {
        let s = generate_scenario(regular(5, 3.0), SensorLayout::Random(n), Radii::tight(1.0, 0.15), 0.1, seed).unwrap();
        prop_assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn hex_corpus_is_within_spec_size_and_valid() {
    for seed in 1..=5 {
        let s = common::hex_scenario(seed);
        assert!((100..=300).contains(&s.len()));
        let rep = validate_assumptions(&s, 0.05).unwrap();
        assert!(rep.holds(), "{rep}");
    }
}

#[test]
fn literal_unit_square_has_empty_restricted_domain() {
    let s = generate_scenario(ConvexPolygon::square(1.0), SensorLayout::Random(150), Radii::tight(1.0, 0.15), 0.1, 1).unwrap();
    assert!(s.r_hat() > 0.5);
    assert!(validate_assumptions(&s, 0.05).is_err());
}
