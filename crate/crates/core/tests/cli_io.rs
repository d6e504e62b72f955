mod common;

use common::*;
use pmm_core::cdga::{Cdga, FreeCdga, Generator, Terms};
use pmm_core::cli_io::{
    parse_element, parse_expr, parse_grid, parse_terms, render_polynomial, working_cap, InputDocument, ModelDocument,
};
use pmm_core::pminimal::{build_persistent_minimal_model, presentation, validate_model};
use pmm_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn gens() -> Vec<Generator> {
    [("a", 2), ("b", 2), ("y", 3), ("z", 5)].iter().map(|(n, d)| Generator { name: n.to_string(), degree: *d }).collect()
}

fn column(src: &str) -> usize {
    match parse_expr(src) {
        Err(Error::Parse { column, .. }) => column,
        other => panic!("expected a parse error for {src:?}, got {other:?}"),
    }
}

#[test]
fn parse_errors_carry_columns() {
    assert_eq!(column("a + * b"), 5);
    assert_eq!(column("a^"), 3);
    assert_eq!(column("(a + b"), 7);
    assert_eq!(column("a # b"), 3);
}

#[test]
fn unknown_names_and_wrong_degrees() {
    let g = gens();
    assert!(parse_terms("c", &g, 2).is_err());
    assert!(parse_terms("a*y", &g, 4).is_err());
    assert!(parse_terms("y^2", &g, 6).is_err());
    assert_eq!(parse_terms("0", &g, 4).unwrap(), Terms::new());
}

#[test]
fn empty_grid_is_a_schema_error() {
    assert!(matches!(parse_grid(&[]), Err(Error::Schema(_))));
    assert!(parse_grid(&["1".into(), "0".into()]).is_err());
    assert!(parse_grid(&["0".into(), "1/2".into(), "1".into()]).is_ok());
}

#[test]
fn documents_round_trip() {
    for name in ["example_i_nonformal.json", "two_sphere.json"] {
        let doc = InputDocument::from_json(&fixture(name)).unwrap();
        let again = InputDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(again.to_json(), doc.to_json());
    }
}

#[test]
fn not_simply_connected_input_is_rejected() {
    let doc = InputDocument::from_json(&fixture("not_simply_connected.json")).unwrap();
    let err = doc.load(working_cap(4)).unwrap_err();
    assert!(err.to_string().contains("not simply-connected"), "{err}");
}

#[test]
fn saved_models_reload_identically() {
    let (doc, a) = load("example_iii.json", 5);
    let m = build_persistent_minimal_model(&a, 5).unwrap();
    let saved = ModelDocument::from_model(&m, &a, &doc).to_json();
    let (a2, m2) = ModelDocument::from_json(&saved).unwrap().load().unwrap();
    assert!(validate_model(&m2, &a2).passed);
    assert_eq!(presentation(&m2, true).to_text(), presentation(&m, true).to_text());
    assert_eq!(m2.homotopy_barcode(), m.homotopy_barcode());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gens();
        let alg = FreeCdga::new(g.clone(), vec![Terms::new(); g.len()], 9).unwrap();
        let n = r.gen_range(0..=9);
        let coords: Vec<_> = (0..alg.basis(n).len()).map(|_| if r.gen_bool(0.5) { small(&mut r) } else { Default::default() }).collect();
        let t = alg.terms(&pmm_core::cdga::Element { degree: n, coords });
        let names: Vec<String> = g.iter().map(|x| x.name.clone()).collect();
        let text = render_polynomial(&names, &t);
        prop_assert_eq!(parse_terms(&text, &g, n).unwrap(), t.clone());
        let whole = Cdga::Free(alg.clone());
        prop_assert_eq!(alg.terms(&parse_element(&text, &whole, n).unwrap()), t);
    }
}
