mod common;

use common::*;
use pmm_core::cdga::{Cdga, Element};
use pmm_core::exactla::{q, zero_vec};
use pmm_core::homotopy::{
    cone, cone_map, integration_sign_self_test, join_cone_vector, split_cone_vector, CdgaHomotopy, IntervalElement,
};
use pmm_core::minimal::build_map_model;
use proptest::prelude::*;
use rand::Rng;

fn random_interval(r: &mut impl Rng, b: &Cdga, n: usize) -> IntervalElement {
    let mut x = IntervalElement::zero(n);
    for k in 0..3 {
        let e = Element { degree: n, coords: (0..b.dim(n)).map(|_| small(r)).collect() };
        x = x.add(&IntervalElement::monomial(&e, k), b).unwrap();
    }
    if n > 0 {
        let mut dt = IntervalElement::zero(n);
        dt.dt = (0..3).map(|_| (0..b.dim(n - 1)).map(|_| small(r)).collect()).collect();
        x = x.add(&dt, b).unwrap();
    }
    x
}

#[test]
fn sign_convention_holds() {
    assert!(integration_sign_self_test());
}

#[test]
fn constant_homotopy_is_a_homotopy() {
    let f = random_cdga_map(&mut rng(3), 3, 4, 7);
    let h = CdgaHomotopy::constant(&f).unwrap();
    h.check_identity(&f, &f).unwrap();
    let (e0, e1) = h.endpoints().unwrap();
    assert!(e0.same_as(&f) && e1.same_as(&f));
    for n in 0..7 {
        assert!(h.integral_matrix(n).is_zero());
    }
}

#[test]
fn constant_homotopy_is_not_between_different_maps() {
    let f = random_cdga_map(&mut rng(5), 3, 4, 7);
    let zero_images: Vec<Element> =
        f.generator_images().unwrap().iter().map(|e| Element { degree: e.degree, coords: zero_vec(e.coords.len()) }).collect();
    let g = pmm_core::cdga::CdgaMorphism::from_generator_images_unchecked(f.domain.clone(), f.codomain.clone(), zero_images)
        .unwrap();
    if !f.same_as(&g) {
        assert!(CdgaHomotopy::constant(&f).unwrap().check_identity(&f, &g).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interval_algebra_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = random_free_cdga(&mut r, 3, 4, 7, "b");
        let n = r.gen_range(1..=3);
        let m = r.gen_range(0..=2);
        let x = random_interval(&mut r, &b, n);
        let y = random_interval(&mut r, &b, m);
        prop_assert!(x.d(&b).d(&b).is_zero());
        // endpoints are algebra maps commuting with d
        prop_assert_eq!(x.mul(&y, &b).eval1(&b), b.multiply(&x.eval1(&b), &y.eval1(&b)));
        prop_assert_eq!(x.d(&b).eval0(&b), b.d(&x.eval0(&b)));
        // d∫ + ∫d = id - ε_0
        let lhs = x.integrate_0t(&b).d(&b).add(&x.d(&b).integrate_0t(&b), &b).unwrap();
        let rhs = x.axpy(&-q(1), &IntervalElement::constant(&x.eval0(&b)), &b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cone_maps_are_chain_maps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_cdga_map(&mut r, 3, 4, 7);
        let mm = build_map_model(f, 4).unwrap();
        let sq = mm.square();
        sq.validate().unwrap();
        let src = cone(&sq.left);
        let maps = cone_map(&sq);
        let c_src = pmm_core::homotopy::cone_stage(&sq.left);
        let c_dst = pmm_core::homotopy::cone_stage(&sq.right);
        for j in 0..maps.len() - 1 {
            let lhs = c_dst.1[j].mul(&maps[j]).unwrap();
            let rhs = maps[j + 1].mul(&c_src.1[j]).unwrap();
            prop_assert_eq!(lhs, rhs, "stored degree {}", j);
        }
        src.validate().unwrap();
    }

    #[test]
    fn cone_vectors_split_and_join(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_cdga_map(&mut r, 3, 4, 7);
        let j = r.gen_range(1..6);
        let (dims, _) = pmm_core::homotopy::cone_stage(&f);
        let v: Vec<_> = (0..dims[j]).map(|_| small(&mut r)).collect();
        let (a, b) = split_cone_vector(&f, j, &v);
        prop_assert_eq!(join_cone_vector(&a, &b), v);
    }
}
