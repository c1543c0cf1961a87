use holonet::oracle::{self, HullProblem};
use holonet::vector::{dist2, dot, sub};
use holonet::{FlatSetDescriptor, FlatnessProfile, Shape};
use proptest::prelude::*;

fn set_strategy() -> impl Strategy<Value = (FlatSetDescriptor, Vec<f64>)> {
    (1usize..=3, any::<bool>(), prop::collection::vec(0.3f64..1.0, 3), prop::collection::vec(-3.0f64..3.0, 3))
        .prop_map(|(dim, boxy, ratios, q)| {
            let mut r = vec![1.5];
            for k in 1..dim {
                let last = r[k - 1];
                r.push(last * ratios[k]);
            }
            let shape = if boxy { Shape::Box } else { Shape::CrossPolytope };
            let set = FlatSetDescriptor::new(shape, FlatnessProfile::explicit(r).unwrap(), dim).unwrap();
            (set, q[..dim].to_vec())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_lands_in_set_and_is_idempotent((set, q) in set_strategy()) {
        let p = set.project(&q).unwrap();
        prop_assert!(set.contains(&p.point));
        let again = set.project(&p.point).unwrap();
        prop_assert!(dist2(&again.point, &p.point) <= 1e-12);
        prop_assert!(again.distance <= 1e-12);
        prop_assert!((p.distance - dist2(&q, &p.point)).abs() <= 1e-12);
    }

    #[test]
    fn projection_satisfies_the_variational_inequality((set, q) in set_strategy()) {
        // <q - p, v - p> <= 0 for every vertex v
        let p = set.project(&q).unwrap().point;
        let r = sub(&q, &p);
        for v in set.extreme_points() {
            prop_assert!(dot(&r, &sub(&v, &p)) <= 1e-10);
        }
    }

    #[test]
    fn projection_matches_wolfe_on_vertices((set, q) in set_strategy()) {
        let d = set.distance(&q).unwrap();
        let (dw, _) = oracle::min_norm_point(&HullProblem { vertices: set.extreme_points(), query: q }, 1e-12).unwrap();
        prop_assert!((d - dw).abs() <= 1e-6, "{d} vs {dw}");
    }

    #[test]
    fn samples_are_members(seed in any::<u64>(), boxy in any::<bool>()) {
        let shape = if boxy { Shape::Box } else { Shape::CrossPolytope };
        let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(0.5).unwrap(), 6).unwrap();
        let mut g = holonet::rng::stream(seed, 0);
        for _ in 0..20 {
            prop_assert!(set.contains(&set.sample(&mut g)));
        }
    }
}

#[test]
fn n_of_eps_matches_a_linear_scan() {
    for alpha in [0.2, 0.5, 0.7, 0.9] {
        let prof = FlatnessProfile::holder(alpha).unwrap();
        for e in 1..60 {
            let eps = 10f64.powf(-e as f64 / 6.0);
            let scan = (0..).find(|&n| prof.r_value(n).unwrap() <= eps).unwrap();
            assert_eq!(prof.n_of_eps(eps).unwrap(), scan, "alpha {alpha} eps {eps}");
        }
    }
}

#[test]
fn heights_stay_below_the_profile() {
    for alpha in [0.5, 0.7] {
        for shape in [Shape::Box, Shape::CrossPolytope] {
            let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(alpha).unwrap(), 6).unwrap();
            for n in 0..=6 {
                let h = set.estimate_height(n, 500, 3).unwrap();
                assert!(h.lower_bound <= set.profile().r_value(n).unwrap() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn box_and_cross_coefficients() {
    let r = |n: usize| 20f64.powf(n as f64 / (0.5 - 1.0));
    let k1 = FlatSetDescriptor::new(Shape::Box, FlatnessProfile::holder(0.5).unwrap(), 4).unwrap();
    let k2 = FlatSetDescriptor::new(Shape::CrossPolytope, FlatnessProfile::holder(0.5).unwrap(), 4).unwrap();
    for k in 1..=4 {
        let want1 = 2f64.powi(-(k as i32)) * r(k - 1);
        assert!((k1.coeffs()[k - 1] - want1).abs() <= 1e-15 * want1.max(1.0));
        assert!((k2.coeffs()[k - 1] - r(k - 1)).abs() <= 1e-15);
    }
}

#[test]
fn cross_polytope_projection_against_a_grid() {
    let set = FlatSetDescriptor::new(Shape::CrossPolytope, FlatnessProfile::explicit(vec![1.0, 0.6]).unwrap(), 2)
        .unwrap();
    for q in [[2.0, 2.0], [-0.1, 1.5], [0.9, -0.05], [0.1, 0.1]] {
        let d = set.distance(&q).unwrap();
        let g = oracle::grid_distance(|x| set.contains(x), &q, &[-1.0, -0.6], &[1.0, 0.6], 1e-3).unwrap();
        assert!(d <= g + 1e-12 && g <= d + 1e-3 * 2f64.sqrt() / 2.0 + 1e-12, "{q:?}: {d} vs {g}");
    }
}
