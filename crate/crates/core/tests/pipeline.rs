use proptest::prelude::*;

use homotopy_recon::complexes::{
    build_cech_ambient, build_cech_restricted, build_rips, is_subcomplex, PointCloud, RestrictedMethod, SimplicialComplex,
};
use homotopy_recon::experiments::{reconstruct, ComplexChoice, ReconstructConfig};
use homotopy_recon::homology::{betti_simplicial, BettiVector};
use homotopy_recon::shapes::Shape;

#[test]
fn text_round_trips_preserve_betti() {
    let shape = Shape::circle(1.0).unwrap();
    let cloud = shape.sample_with_noise(60, 0.02, 4).unwrap().with_constant_radius(0.25).unwrap();
    let reread = PointCloud::from_text(&cloud.to_text(), true).unwrap();
    assert_eq!(reread, cloud);
    let complex = build_cech_ambient(&reread, 2).unwrap();
    let stored = SimplicialComplex::from_text(&complex.to_text()).unwrap();
    assert_eq!(stored.counts(), complex.counts());
    assert_eq!(betti_simplicial(&stored, 1).unwrap(), betti_simplicial(&complex, 1).unwrap());
}

#[test]
fn reports_serialize_identically() {
    let cfg = ReconstructConfig::new(Shape::sphere(3, 1.0).unwrap(), 150, 0.0, 0.45, ComplexChoice::Rips, 12);
    let a = serde_json::to_string(&reconstruct(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&reconstruct(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 12);
    assert_eq!(v["config"]["complex"], "rips");
}

#[test]
fn semicircle_rips_is_contractible() {
    let cfg = ReconstructConfig::new(Shape::semicircle(1.0).unwrap(), 150, 0.0, 0.1, ComplexChoice::Rips, 2);
    let rep = reconstruct(&cfg).unwrap();
    assert_eq!(rep.betti_computed, BettiVector(vec![1, 0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restricted_inside_ambient_inside_rips(seed in 0u64..10_000, n in 3usize..12, r in 0.1f64..0.9, eps in 0.0f64..0.09) {
        let shape = Shape::circle(1.0).unwrap();
        let cloud = shape.sample_with_noise(n, eps, seed).unwrap().with_constant_radius(r.max(eps + 0.01)).unwrap();
        let restricted = build_cech_restricted(&cloud, &shape, 3, RestrictedMethod::Auto).unwrap();
        let ambient = build_cech_ambient(&cloud, 3).unwrap();
        let rips = build_rips(&cloud, 3).unwrap();
        prop_assert!(is_subcomplex(&restricted, &ambient).unwrap());
        prop_assert!(is_subcomplex(&ambient, &rips).unwrap());
    }
}
