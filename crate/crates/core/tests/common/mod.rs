//! Shared helpers for the integration tests: fixtures, random inputs and
//! small independent oracles.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use pmm_core::cdga::{Cdga, CdgaMorphism, Element, FreeCdga, Generator, Monomial, Terms};
use pmm_core::cli_io::{working_cap, InputDocument};
use pmm_core::exactla::{kernel_basis, q, solve, QMatrix, Rational};
use pmm_core::pcomplex::{
    chain_map_basis, interval_disk, interval_module, interval_sphere, PComplexMap, PersistentComplex,
};
use pmm_core::persistence::{Grid, PersistenceModule};
use pmm_core::pminimal::PersistentCdga;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str, user_cap: usize) -> (InputDocument, PersistentCdga) {
    let doc = InputDocument::from_json(&fixture(name)).unwrap();
    let a = doc.load(working_cap(user_cap)).unwrap();
    (doc, a)
}

// ------------------------------------------------------------------ oracles

/// Rank by integer elimination after clearing denominators.
pub fn oracle_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| acc * x.denom());
            r.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for i in rank + 1..m.len() {
            let a = m[i][c].clone();
            if a.is_zero() {
                continue;
            }
            for j in 0..cols {
                let v = &m[i][j] * &pivot - &m[rank][j] * &a;
                m[i][j] = v;
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank_of(m: &QMatrix) -> usize {
    oracle_rank(&m.to_rows())
}

/// Composite `V_i -> V_j` by plain multiplication.
pub fn composite(m: &PersistenceModule, i: usize, j: usize) -> QMatrix {
    let mut c = QMatrix::identity(m.dims[i]);
    for r in i..j {
        c = m.maps[r].mul(&c).unwrap();
    }
    c
}

/// Multiplicity of the bar `[i, j)` (with `j == n` meaning infinity) from
/// ranks by inclusion-exclusion.
pub fn oracle_multiplicity(m: &PersistenceModule, i: usize, j: usize) -> i64 {
    let n = m.dims.len();
    let r = |a: isize, b: usize| -> i64 {
        if a < 0 || b >= n {
            0
        } else {
            rank_of(&composite(m, a as usize, b)) as i64
        }
    };
    let i = i as isize;
    r(i, j - 1) - r(i - 1, j - 1) - r(i, j) + r(i - 1, j)
}

// ------------------------------------------------------------ random inputs

pub fn small(rng: &mut impl Rng) -> Rational {
    q(rng.gen_range(-2..=2))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
    let vals = (0..rows).map(|_| (0..cols).map(|_| small(rng)).collect()).collect();
    QMatrix::from_rows(vals, cols).unwrap()
}

pub fn random_invertible(rng: &mut impl Rng, n: usize) -> QMatrix {
    loop {
        let m = random_matrix(rng, n, n);
        if rank_of(&m) == n {
            return m;
        }
    }
}

pub fn random_module(rng: &mut impl Rng) -> PersistenceModule {
    let n = rng.gen_range(1..=5);
    let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
    let maps = (0..n - 1).map(|i| random_matrix(rng, dims[i + 1], dims[i])).collect();
    PersistenceModule::new(Grid::range(n), dims, maps).unwrap()
}

/// Free CDGA on at most `max_gens` generators of degrees `2..=max_degree`,
/// each with a random decomposable closed differential.
pub fn random_free_cdga(rng: &mut impl Rng, max_gens: usize, max_degree: usize, cap: usize, prefix: &str) -> Arc<Cdga> {
    let ngens = rng.gen_range(1..=max_gens);
    let mut degrees: Vec<usize> = (0..ngens).map(|_| rng.gen_range(2..=max_degree)).collect();
    degrees.sort();
    let mut gens: Vec<Generator> = Vec::new();
    let mut diffs: Vec<Terms> = Vec::new();
    for (i, &k) in degrees.iter().enumerate() {
        let alg = FreeCdga::new(gens.clone(), diffs.clone(), cap).unwrap();
        let mut d = Terms::new();
        if rng.gen_bool(0.6) && k < cap {
            let basis = alg.basis(k + 1);
            let dec: Vec<usize> = (0..basis.len()).filter(|&j| basis[j].word_length() >= 2).collect();
            let dm = Cdga::Free(alg.clone()).d_matrix(k + 1);
            let restricted = QMatrix::from_columns(&dec.iter().map(|&j| dm.column(j)).collect::<Vec<_>>(), dm.rows());
            let mut coords = vec![Rational::zero(); basis.len()];
            for z in kernel_basis(&restricted) {
                let c = small(rng);
                for (j, x) in dec.iter().zip(z) {
                    coords[*j] += &c * x;
                }
            }
            d = alg.terms(&Element { degree: k + 1, coords });
        }
        gens.push(Generator {
            name: format!("{prefix}{i}"),
            degree: k,
        });
        diffs.push(d);
    }
    Arc::new(Cdga::Free(FreeCdga::new(gens, diffs, cap).unwrap()))
}

fn eval_monomial(b: &Cdga, images: &[Element], m: &Monomial) -> Element {
    let mut acc = b.unit();
    for &(i, e) in &m.0 {
        for _ in 0..e {
            acc = b.multiply(&acc, &images[i]);
        }
    }
    acc
}

/// Random chain algebra map out of a free CDGA, chosen generator by
/// generator; `None` if some generator's differential cannot be matched.
pub fn random_morphism(rng: &mut impl Rng, a: &Arc<Cdga>, b: &Arc<Cdga>) -> Option<CdgaMorphism> {
    let fa = a.as_free().unwrap();
    let mut images: Vec<Element> = Vec::new();
    for (i, g) in fa.generators().iter().enumerate() {
        let k = g.degree;
        let mut target = Element::zero(b, k + 1);
        for (m, c) in fa.differential_terms(i) {
            target = target.add(&eval_monomial(b, &images, m).scale(c)).unwrap();
        }
        let base = solve(&b.d_matrix(k), &target.coords).unwrap()?;
        let mut img = Element {
            degree: k,
            coords: base,
        };
        for z in b.cocycles(k) {
            img = img.add(&Element { degree: k, coords: z }.scale(&small(rng))).unwrap();
        }
        images.push(img);
    }
    Some(CdgaMorphism::from_generator_images(a.clone(), b.clone(), images).expect("constructed as a chain map"))
}

/// Random morphism between random free CDGAs.
pub fn random_cdga_map(rng: &mut impl Rng, max_gens: usize, max_degree: usize, cap: usize) -> CdgaMorphism {
    loop {
        let a = random_free_cdga(rng, max_gens, max_degree, cap, "a");
        let b = random_free_cdga(rng, max_gens, max_degree, cap, "b");
        if let Some(f) = random_morphism(rng, &a, &b) {
            return f;
        }
    }
}

/// Direct sum of random cells, in a random basis at every stage.
pub fn random_complex(rng: &mut impl Rng, grid: &Grid, max_degree: usize, cells: usize) -> PersistentComplex {
    let n = grid.len();
    let mut c = PersistentComplex::zero(grid, max_degree);
    for _ in 0..cells {
        let s = rng.gen_range(0..n);
        let t = if s + 1 < n && rng.gen_bool(0.6) {
            Some(rng.gen_range(s + 1..n))
        } else {
            None
        };
        let k = rng.gen_range(0..=max_degree);
        let cell = match rng.gen_range(0..3) {
            0 => interval_sphere(grid, max_degree, k, s, t),
            1 => interval_disk(grid, max_degree, k.max(1), s),
            _ => interval_module(grid, max_degree, k, s, t),
        }
        .unwrap();
        c = c.direct_sum(&cell).unwrap();
    }
    change_basis(rng, &c).0
}

/// Conjugates a complex by random invertible matrices; also returns them
/// (`p[r][k]` sends old coordinates to new ones).
pub fn change_basis(rng: &mut impl Rng, c: &PersistentComplex) -> (PersistentComplex, Vec<Vec<QMatrix>>) {
    let n = c.stages();
    let nk = c.max_degree + 1;
    let p: Vec<Vec<QMatrix>> = (0..n)
        .map(|r| (0..nk).map(|k| random_invertible(rng, c.dim(r, k))).collect())
        .collect();
    let inv: Vec<Vec<QMatrix>> = p
        .iter()
        .map(|ps| ps.iter().map(|m| m.inverse().unwrap()).collect())
        .collect();
    let diffs = (0..n)
        .map(|r| {
            (0..nk)
                .map(|k| {
                    if k + 1 < nk {
                        p[r][k + 1].mul(&c.d(r, k)).unwrap().mul(&inv[r][k]).unwrap()
                    } else {
                        c.d(r, k)
                    }
                })
                .collect()
        })
        .collect();
    let structure = (0..n - 1)
        .map(|r| {
            (0..nk)
                .map(|k| p[r + 1][k].mul(&c.sigma(r, k)).unwrap().mul(&inv[r][k]).unwrap())
                .collect()
        })
        .collect();
    (
        PersistentComplex::new(c.grid.clone(), c.max_degree, c.dims.clone(), diffs, structure).unwrap(),
        p,
    )
}

/// Random combination of a basis of chain maps `x -> y`.
pub fn random_chain_map(rng: &mut impl Rng, x: &PersistentComplex, y: &PersistentComplex) -> PComplexMap {
    let basis = chain_map_basis(x, y).unwrap();
    let n = x.stages();
    let nk = x.max_degree + 1;
    let mut comps: Vec<Vec<QMatrix>> = (0..n)
        .map(|r| (0..nk).map(|k| QMatrix::zeros(y.dim(r, k), x.dim(r, k))).collect())
        .collect();
    for b in &basis {
        let c = small(rng);
        for r in 0..n {
            for k in 0..nk {
                comps[r][k] = comps[r][k].add(&b[r][k].scale(&c)).unwrap();
            }
        }
    }
    PComplexMap::new(x.clone(), y.clone(), comps).unwrap()
}

/// Identity on a complex.
pub fn identity_map(x: &PersistentComplex) -> PComplexMap {
    let comps = (0..x.stages())
        .map(|r| (0..=x.max_degree).map(|k| QMatrix::identity(x.dim(r, k))).collect())
        .collect();
    PComplexMap::new(x.clone(), x.clone(), comps).unwrap()
}

/// Projection `x ⊕ z -> x`.
pub fn projection(x: &PersistentComplex, z: &PersistentComplex) -> PComplexMap {
    let sum = x.direct_sum(z).unwrap();
    let comps = (0..x.stages())
        .map(|r| {
            (0..=x.max_degree)
                .map(|k| {
                    QMatrix::identity(x.dim(r, k))
                        .hstack(&QMatrix::zeros(x.dim(r, k), z.dim(r, k)))
                        .unwrap()
                })
                .collect()
        })
        .collect();
    PComplexMap::new(sum, x.clone(), comps).unwrap()
}

/// Inclusion `x -> x ⊕ z`.
pub fn inclusion(x: &PersistentComplex, z: &PersistentComplex) -> PComplexMap {
    let sum = x.direct_sum(z).unwrap();
    let comps = (0..x.stages())
        .map(|r| {
            (0..=x.max_degree)
                .map(|k| {
                    QMatrix::identity(x.dim(r, k))
                        .vstack(&QMatrix::zeros(z.dim(r, k), x.dim(r, k)))
                        .unwrap()
                })
                .collect()
        })
        .collect();
    PComplexMap::new(x.clone(), sum, comps).unwrap()
}

/// Post-composes a map with a random change of basis of its target.
pub fn scramble_target(rng: &mut impl Rng, f: &PComplexMap) -> PComplexMap {
    let (y, p) = change_basis(rng, &f.target);
    let comps = (0..y.stages())
        .map(|r| {
            (0..=y.max_degree)
                .map(|k| p[r][k].mul(&f.comp(r, k)).unwrap())
                .collect()
        })
        .collect();
    PComplexMap::new(f.source.clone(), y, comps).unwrap()
}
