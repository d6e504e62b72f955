mod common;

use common::*;
use pmm_core::cdga::{Cdga, CdgaMorphism};
use pmm_core::cli_io::parse_terms;
use pmm_core::exactla::{q, QMatrix};
use pmm_core::persistence::{sort_bars, Bar, Grid, PersistenceModule};
use pmm_core::pminimal::{build_persistent_minimal_model, validate_model, PersistentCdga, TameMinimalModel};
use proptest::prelude::*;
use rand::Rng;
use std::sync::Arc;

const FIXTURES: [&str; 6] = [
    "example_i_nonformal.json",
    "example_i_formal.json",
    "example_ii.json",
    "example_iii.json",
    "two_sphere.json",
    "three_sphere.json",
];

/// Degree `k` indecomposables of the assembled stages, as a persistence
/// module: the linear part of each stage algebra with the induced maps.
fn indecomposables(m: &TameMinimalModel, k: usize) -> PersistenceModule {
    let st = &m.assembled.stages;
    let linear = |r: usize| -> Vec<usize> {
        let b = st[r].as_free().unwrap().basis(k);
        (0..b.len()).filter(|&i| b[i].is_generator().is_some()).collect()
    };
    let dims: Vec<usize> = (0..st.len()).map(|r| linear(r).len()).collect();
    let maps = (0..st.len() - 1)
        .map(|r| {
            let full = m.assembled.structure[r].matrix(k);
            let (src, dst) = (linear(r), linear(r + 1));
            let mut out = QMatrix::zeros(dst.len(), src.len());
            for (j, &c) in src.iter().enumerate() {
                for (i, &row) in dst.iter().enumerate() {
                    out.set(i, j, full.get(row, c).clone());
                }
            }
            out
        })
        .collect();
    PersistenceModule::new(m.grid.clone(), dims, maps).unwrap()
}

fn check_barcode_against_indecomposables(m: &TameMinimalModel) {
    let mut from_q: Vec<Bar> = Vec::new();
    for k in 2..=m.degree {
        from_q.extend(indecomposables(m, k).decompose(k).bars);
    }
    sort_bars(&mut from_q);
    assert_eq!(m.homotopy_barcode(), from_q);
}

#[test]
fn fixture_barcodes_are_indecomposables() {
    for name in FIXTURES {
        let (_, a) = load(name, 5);
        let m = build_persistent_minimal_model(&a, 5).unwrap();
        check_barcode_against_indecomposables(&m);
        assert!(validate_model(&m, &a).passed, "{name}");
    }
}

#[test]
fn cap_must_leave_room() {
    let (_, a) = load("example_i_nonformal.json", 5);
    assert!(build_persistent_minimal_model(&a, 6).is_err());
}

fn rebuild(m: &TameMinimalModel, a: &PersistentCdga) -> pmm_core::Result<TameMinimalModel> {
    let images = m.stage_maps.iter().map(|f| f.generator_images().unwrap().to_vec()).collect();
    let values = m.homotopies.iter().map(|h| h.values.clone()).collect();
    TameMinimalModel::from_parts(a, m.generators.clone(), images, values, m.degree)
}

#[test]
fn rebuilt_model_still_validates() {
    let (_, a) = load("example_iii.json", 5);
    let m = build_persistent_minimal_model(&a, 5).unwrap();
    assert!(validate_model(&rebuild(&m, &a).unwrap(), &a).passed);
}

#[test]
fn tampered_endpoint_is_caught() {
    let (_, a) = load("example_iii.json", 5);
    let mut m = build_persistent_minimal_model(&a, 5).unwrap();
    let g = m.generators.iter().position(|g| g.degree == 4).unwrap();
    let names: Vec<_> = m.generators.iter().map(|g| pmm_core::cdga::Generator { name: g.name.clone(), degree: g.degree }).collect();
    let sq = format!("2*{}^2", m.generators.iter().find(|g| g.degree == 2).unwrap().name);
    m.generators[g].endpoint = Some(parse_terms(&sq, &names, 4).unwrap());
    let report = validate_model(&rebuild(&m, &a).unwrap(), &a);
    assert_ne!(report.homotopy_identities, "pass");
    assert!(!report.passed);
}

#[test]
fn perturbed_homotopy_is_caught() {
    let (_, a) = load("example_iii.json", 5);
    let mut m = build_persistent_minimal_model(&a, 5).unwrap();
    let (r, i) = (0..m.homotopies.len())
        .flat_map(|r| (0..m.homotopies[r].values.len()).map(move |i| (r, i)))
        .find(|&(r, i)| !m.homotopies[r].values[i].is_zero())
        .expect("some nonzero homotopy value");
    let mut v = m.homotopies[r].values.clone();
    let h = &mut v[i];
    let coeffs = h.poly.iter_mut().chain(h.dt.iter_mut()).find(|c| !c.is_empty()).unwrap();
    coeffs[0] += q(1);
    m.homotopies[r] =
        pmm_core::homotopy::CdgaHomotopy::new(m.homotopies[r].domain.clone(), m.homotopies[r].codomain.clone(), v).unwrap();
    let report = validate_model(&m, &a);
    assert_ne!(report.homotopy_identities, "pass");
    assert!(!report.passed);
}

fn random_tower(r: &mut impl Rng) -> PersistentCdga {
    loop {
        let n = r.gen_range(2..=3);
        let stages: Vec<Arc<Cdga>> = (0..n).map(|i| random_free_cdga(r, 3, 4, 7, &format!("s{i}_"))).collect();
        let maps: Option<Vec<CdgaMorphism>> = (0..n - 1).map(|i| random_morphism(r, &stages[i], &stages[i + 1])).collect();
        if let Some(maps) = maps {
            return PersistentCdga::new(Grid::range(n), stages, maps).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_towers(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_tower(&mut r);
        let m = build_persistent_minimal_model(&a, 5).unwrap();
        let report = validate_model(&m, &a);
        prop_assert!(report.passed, "{:?}", report);
        check_barcode_against_indecomposables(&m);
    }
}
