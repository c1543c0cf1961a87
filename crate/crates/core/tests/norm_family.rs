use holonet::gauge::{self, special_vectors};
use holonet::oracle;
use holonet::vector::{add, norm2, scale, sub, unit};
use holonet::NormFamilyParams;
use proptest::prelude::*;

fn params() -> NormFamilyParams {
    NormFamilyParams::with_max_mu(1.0 / 48.0, 12).unwrap()
}

fn vec26() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 26)
}

/// A vector concentrated on one interacting triple, plus optional noise.
fn structured() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=12, prop::collection::vec(-2.0f64..2.0, 3), -8.0f64..0.0, vec26()).prop_map(|(n, c, log_noise, noise)| {
        let mut x = scale(&noise, 10f64.powf(log_noise));
        x[0] += c[0];
        x[2 * n - 1] += c[1];
        x[2 * n] += c[2];
        x
    })
}

/// Primal objective of the gauge, evaluated independently of the library.
fn primal(delta: f64, n: usize, x: &[f64], c1: f64, c2: f64) -> f64 {
    let nf = n as f64;
    let mut y = x.to_vec();
    y[0] -= -delta * c1 + delta * c2;
    y[2 * n - 1] -= c1 + c2;
    y[2 * n] -= delta / nf * c1 - delta / nf * c2;
    norm2(&y) + c1.abs() + c2.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gauge_is_absolutely_homogeneous(x in structured(), n in 1usize..=12, s in -5.0f64..5.0) {
        let p = params();
        let a = gauge::gauge_n(&p, n, &x).unwrap().value;
        let b = gauge::gauge_n(&p, n, &scale(&x, s)).unwrap().value;
        prop_assert!((b - s.abs() * a).abs() <= 1e-9 * (1.0 + s.abs() * a));
    }

    #[test]
    fn gauge_triangle_inequality(x in structured(), y in structured(), n in 1usize..=12) {
        let p = params();
        let g = |v: &[f64]| gauge::gauge_n(&p, n, v).unwrap().value;
        prop_assert!(g(&add(&x, &y)) <= g(&x) + g(&y) + 1e-9);
    }

    #[test]
    fn union_norm_is_a_norm(x in structured(), y in structured()) {
        let p = params();
        let u = |v: &[f64]| gauge::norm_union(&p, v).unwrap().0;
        prop_assert!((u(&scale(&x, -1.0)) - u(&x)).abs() <= 1e-10 * (1.0 + u(&x)));
        prop_assert!(u(&add(&x, &y)) <= u(&x) + u(&y) + 1e-9);
    }

    #[test]
    fn sandwich(x in prop_oneof![structured(), vec26()], n in 1usize..=12) {
        let p = params();
        let r = norm2(&x);
        let g = gauge::gauge_n(&p, n, &x).unwrap().value;
        let f = gauge::norm_fine_n(&p, n, &x).unwrap();
        prop_assert!(r / (1.0 + 2.0 * p.delta) <= g + 1e-9);
        prop_assert!(g <= f + 1e-12);
        prop_assert!(f <= r + 1e-9);
    }

    #[test]
    fn gauge_is_not_above_any_primal_grid_point(x in structured(), n in 1usize..=12) {
        let p = params();
        let g = gauge::gauge_n(&p, n, &x).unwrap().value;
        let r = norm2(&x);
        let mut best = f64::INFINITY;
        for i in -40..=40 {
            for j in -40..=40 {
                best = best.min(primal(p.delta, n, &x, r * i as f64 / 40.0, r * j as f64 / 40.0));
            }
        }
        prop_assert!(g <= best + 1e-9);
    }

    #[test]
    fn locality_off_the_interacting_coordinates(x in vec26(), n in 1usize..=12) {
        let p = params();
        let mut y = x.clone();
        y[2 * n - 1] = 0.0;
        y[2 * n] = 0.0;
        let g = gauge::gauge_n(&p, n, &y).unwrap().value;
        prop_assert!((g - norm2(&y)).abs() <= 1e-12 * (1.0 + norm2(&y)));
    }
}

#[test]
fn known_gauge_values() {
    let p = params();
    for n in [1, 5, 12] {
        let sv = special_vectors(&p, n).unwrap();
        for i in [1, 2] {
            let g = gauge::gauge_n(&p, n, sv.z(i)).unwrap().value;
            assert!((g - 1.0).abs() <= 1e-9, "z_{i},{n}: {g}");
        }
        let e1 = gauge::gauge_n(&p, n, &unit(0, p.dim)).unwrap().value;
        assert!((e1 - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn certified_bracket_on_small_dimension() {
    let p = NormFamilyParams::with_max_mu(1.0 / 48.0, 2).unwrap();
    let mut g = holonet::rng::stream(77, 0);
    for n in [1, 2] {
        for _ in 0..20 {
            let x = holonet::checks::span_vector(&mut g, p.dim, n);
            let v = gauge::gauge_n(&p, n, &x).unwrap().value;
            let b = oracle::gauge_grid_bracket(&p, n, &x, 61, 14).unwrap();
            assert!(b.lower <= v + 1e-12 && v <= b.upper + 1e-12);
            assert!(v - b.lower <= 1e-6, "{v} vs {b:?}");
        }
    }
}

#[test]
fn midpoints_of_unit_vectors_are_inside() {
    let p = params();
    let sv = special_vectors(&p, 3).unwrap();
    let near = add(sv.z(1), &scale(&unit(7, p.dim), 1e-3));
    let pairs = [
        (sv.z(1).to_vec(), sv.z(2).to_vec()),
        (sv.z(1).to_vec(), near),
        (unit(0, p.dim), unit(1, p.dim)),
        (sv.x(1).to_vec(), sv.x(2).to_vec()),
    ];
    for (u, v) in pairs {
        let nu = gauge::norm_union(&p, &u).unwrap().0;
        let nv = gauge::norm_union(&p, &v).unwrap().0;
        let mid = scale(&add(&scale(&u, 1.0 / nu), &scale(&v, 1.0 / nv)), 0.5);
        assert!(gauge::norm_union(&p, &mid).unwrap().0 < 1.0);
    }
}

#[test]
fn lemma_verifiers_pass_at_reference_parameters() {
    let p = params();
    for (n, m) in [(1, 2), (3, 9), (11, 12)] {
        let r = gauge::check_separation(&p, n, m, 200, 4).unwrap();
        assert!(r.pass, "{r:?}");
    }
    for n in [1, 7, 12] {
        for i in [1, 2] {
            let s = gauge::check_slice_lemma(&p, n, i, 300, 4).unwrap();
            assert!(s.pass, "{s:?}");
            let c = gauge::check_claim(&p, n, i, 300, 4).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }
}

#[test]
fn parameter_guards() {
    let d = 1.0 / 48.0;
    assert!(NormFamilyParams::new(0.03, 1e-9, 12, 26).is_err());
    assert!(NormFamilyParams::new(d, 2.0 * NormFamilyParams::mu_bound(d), 12, 26).is_err());
    assert!(NormFamilyParams::new(d, NormFamilyParams::mu_bound(d), 12, 25).is_err());
    assert!(NormFamilyParams::new(d, NormFamilyParams::mu_bound(d), 12, 26).is_ok());
}

#[test]
fn modulus_of_convexity_value() {
    let v = oracle::modulus_of_convexity_l2(1.0).unwrap();
    assert!((v - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
    assert!((v - 0.1339746).abs() < 1e-7);
}

#[test]
fn geo2_on_random_configurations() {
    let mut g = holonet::rng::stream(2024, 0);
    use rand::Rng;
    for c in 0..1000u64 {
        let dim = g.random_range(2..=6);
        let count = g.random_range(1..=4);
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|_| scale(&holonet::rng::unit_direction(&mut g, dim), g.random_range(1.0..1.2)))
            .collect();
        let r = oracle::geo2_check(&pts, 10, c).unwrap();
        assert!(r.pass, "config {c}: {r:?}");
    }
}

#[test]
fn union_distance_is_symmetric() {
    let p = params();
    let sv = special_vectors(&p, 4).unwrap();
    let a = gauge::union_distance(&p, sv.x(1), sv.x(2)).unwrap();
    let b = gauge::union_distance(&p, sv.x(2), sv.x(1)).unwrap();
    assert_eq!(a, b);
    assert!(a <= norm2(&sub(sv.x(1), sv.x(2))) + 1e-12);
}
