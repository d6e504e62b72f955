//! Minimal Sullivan models of single CDGAs and of CDGA morphisms, built one
//! degree at a time by killing the cohomology of mapping cones.

use crate::cdga::{Cdga, CdgaMorphism, Element, FreeCdga, Generator, Terms};
use crate::error::{invariant, Error, Result};
use crate::exactla::{adapted_split, axpy, solve, zero_vec, QMatrix, Rational};
use crate::homotopy::{cone, cone_map, split_cone_vector, CdgaHomotopy, HomotopySquare, IntervalElement};
use crate::pcomplex::{class_coordinates, Cohomology, PersistentComplex};
use num_traits::Zero;
use std::sync::Arc;

/// `H^k` of the mapping cone of `f` (cone degree `k`, stored degree `k + 1`).
pub fn cone_cohomology(f: &CdgaMorphism, k: usize) -> (PersistentComplex, Cohomology) {
    let c = cone(f);
    let h = c.cohomology(k + 1);
    (c, h)
}

/// `H^j C_f = 0` for all `0 <= j <= k`.
pub fn cone_is_connected_through(f: &CdgaMorphism, k: usize) -> bool {
    let c = cone(f);
    (0..=k).all(|j| c.cohomology(j + 1).module.dims[0] == 0)
}

/// Model `m: M -> A` with `H^j` of the cone zero for `j <= degree`.
#[derive(Clone, Debug)]
pub struct MinimalModel {
    pub model: Arc<Cdga>,
    pub map: CdgaMorphism,
    pub degree: usize,
}

fn free(a: &Arc<Cdga>) -> &FreeCdga {
    a.as_free().expect("models are free")
}

fn to_terms(alg: &Arc<Cdga>, e: &Element) -> Terms {
    free(alg).terms(e)
}

/// Adds one generator of degree `k` per basis class of `H^k C_m`, with
/// differential the `M`-part and image the `A`-part of the representative.
pub fn telescope_step(mm: &MinimalModel, k: usize, prefix: &str) -> Result<MinimalModel> {
    let (_, h) = cone_cohomology(&mm.map, k);
    let old = free(&mm.model);
    let start = old.generators().iter().filter(|g| g.degree == k).count();
    let mut gens = Vec::new();
    let mut diffs = Vec::new();
    let mut images: Vec<Element> = mm.map.generator_images().expect("free").to_vec();
    for (i, rep) in h.representatives[0].iter().enumerate() {
        let (v, a) = split_cone_vector(&mm.map, k + 1, rep);
        gens.push(Generator { name: format!("{prefix}{k}_{}", start + i + 1), degree: k });
        diffs.push(to_terms(&mm.model, &v));
        images.push(a);
    }
    let ext = Arc::new(Cdga::Free(old.extend(gens, diffs)?));
    let map = CdgaMorphism::from_generator_images(ext.clone(), mm.map.codomain.clone(), images)?;
    if !cone_is_connected_through(&map, k) {
        return invariant(format!("cone cohomology survives in degree {k} after the telescope step"));
    }
    Ok(MinimalModel { model: ext, map, degree: k })
}

/// Minimal model through degree `user_cap` of a simply connected CDGA.
pub fn build_min_model(a: Arc<Cdga>, user_cap: usize) -> Result<MinimalModel> {
    if !a.is_simply_connected() {
        return Err(Error::Validation("input algebra is not simply connected".into()));
    }
    if a.cap() < user_cap + 2 {
        return Err(Error::Validation(format!("algebra cap {} is below the working cap {}", a.cap(), user_cap + 2)));
    }
    let ground = Arc::new(Cdga::Free(FreeCdga::ground(a.cap())));
    let map = CdgaMorphism::unit_map(ground.clone(), a)?;
    let mut mm = MinimalModel { model: ground, map, degree: 1 };
    if !cone_is_connected_through(&mm.map, 1) {
        return invariant("cone of the unit is not 1-connected");
    }
    for k in 2..=user_cap {
        mm = telescope_step(&mm, k, "x")?;
    }
    Ok(mm)
}

/// Model of a morphism `f: A -> B` through some degree: a square
///
/// ```text
///   M --g--> N
///   |m       |n
///   A --f--> B
/// ```
///
/// commuting up to `homotopy` from `f ∘ m` to `n ∘ g`.
#[derive(Clone, Debug)]
pub struct MapModel {
    pub g: CdgaMorphism,
    pub m: CdgaMorphism,
    pub n: CdgaMorphism,
    pub f: CdgaMorphism,
    pub homotopy: CdgaHomotopy,
    pub degree: usize,
}

impl MapModel {
    /// Trivial square on the ground field.
    pub fn base(f: CdgaMorphism) -> Result<Self> {
        let cap = f.domain.cap();
        let gm = Arc::new(Cdga::Free(FreeCdga::ground(cap)));
        let gn = Arc::new(Cdga::Free(FreeCdga::ground(cap)));
        let g = CdgaMorphism::from_generator_images(gm.clone(), gn.clone(), Vec::new())?;
        let m = CdgaMorphism::unit_map(gm.clone(), f.domain.clone())?;
        let n = CdgaMorphism::unit_map(gn, f.codomain.clone())?;
        let homotopy = CdgaHomotopy::new(gm, f.codomain.clone(), Vec::new())?;
        Ok(MapModel { g, m, n, f, homotopy, degree: 1 })
    }

    pub fn square(&self) -> HomotopySquare {
        HomotopySquare {
            top: self.g.clone(),
            left: self.m.clone(),
            right: self.n.clone(),
            bottom: self.f.clone(),
            homotopy: self.homotopy.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.g.check_chain_map()?;
        self.m.check_chain_map()?;
        self.n.check_chain_map()?;
        self.square().validate()?;
        for a in [&self.g.domain, &self.g.codomain] {
            if !free(a).is_minimal() {
                return Err(Error::Validation("model is not minimal".into()));
            }
        }
        if !cone_is_connected_through(&self.m, self.degree) || !cone_is_connected_through(&self.n, self.degree) {
            return Err(Error::Validation("model cones are not connected through the model degree".into()));
        }
        Ok(())
    }
}

/// Matrix of `H^k φ: H^k C_m -> H^k C_n` for the cone map of the square, in
/// the representative bases chosen by cohomology.
pub fn cone_map_on_cohomology(mm: &MapModel, k: usize) -> (Cohomology, Cohomology, QMatrix, Vec<QMatrix>) {
    let phi = cone_map(&mm.square());
    let (_, hm) = cone_cohomology(&mm.m, k);
    let (_, hn) = cone_cohomology(&mm.n, k);
    let cn = cone(&mm.n);
    let mut psi = QMatrix::zeros(hn.representatives[0].len(), hm.representatives[0].len());
    for (j, z) in hm.representatives[0].iter().enumerate() {
        let w = phi[k + 1].mul_vec(z).expect("shape");
        let c = class_coordinates(&hn.representatives[0], &hn.coboundaries[0], &w, cn.dims[0][k + 1])
            .expect("cone maps preserve cocycles");
        for (i, x) in c.into_iter().enumerate() {
            psi.set(i, j, x);
        }
    }
    (hm, hn, psi, phi)
}

fn combine(reps: &[Vec<Rational>], coeffs: &[Rational], dim: usize) -> Vec<Rational> {
    let mut out = zero_vec(dim);
    for (c, r) in coeffs.iter().zip(reps) {
        axpy(&mut out, c, r);
    }
    out
}

/// One inductive step from a `(k-1)`-model of a map to a `k`-model, using a
/// splitting of `H^k φ` into coimage, kernel and cokernel.
pub fn map_model_step(mm: &MapModel, k: usize) -> Result<MapModel> {
    let (hm, hn, psi, phi) = cone_map_on_cohomology(mm, k);
    let split = adapted_split(&psi)?;
    let (mdom, ndom) = (mm.g.domain.clone(), mm.g.codomain.clone());
    let (a, b) = (mm.f.domain.clone(), mm.f.codomain.clone());
    let cm = cone(&mm.m);
    let cn = cone(&mm.n);
    let dim_cm = cm.dims[0][k + 1];
    let dim_cn = cn.dims[0][k + 1];

    let mut mgens = Vec::new();
    let mut mdiffs = Vec::new();
    let mut m_images: Vec<Element> = mm.m.generator_images().expect("free").to_vec();
    let mut ngens = Vec::new();
    let mut ndiffs = Vec::new();
    let mut n_images: Vec<Element> = mm.n.generator_images().expect("free").to_vec();
    // pending images under the new g and values of the new homotopy
    enum GImage {
        NewN(usize),
        Old(Element),
    }
    let mut g_new: Vec<GImage> = Vec::new();
    let mut h_new: Vec<IntervalElement> = Vec::new();
    let mcount = free(&mdom).generators().iter().filter(|g| g.degree == k).count();
    let ncount = free(&ndom).generators().iter().filter(|g| g.degree == k).count();
    let b_alg = &*b;

    // f(a) ⊗ 1 + ∫_0^t H(v)
    let h_value = |v: &Element, a_el: &Element| -> IntervalElement {
        let base = IntervalElement::constant(&mm.f.apply(a_el));
        base.add(&mm.homotopy.apply(v).integrate_0t(b_alg), b_alg).expect("degrees")
    };

    for coeffs in &split.coimage {
        let z = combine(&hm.representatives[0], coeffs, dim_cm);
        let (v, a_el) = split_cone_vector(&mm.m, k + 1, &z);
        let w = phi[k + 1].mul_vec(&z)?;
        let (gv, bval) = split_cone_vector(&mm.n, k + 1, &w);
        let mi = mgens.len();
        mgens.push(Generator { name: format!("x{k}_{}", mcount + mi + 1), degree: k });
        mdiffs.push(to_terms(&mdom, &v));
        m_images.push(a_el.clone());
        let ni = ngens.len();
        ngens.push(Generator { name: format!("y{k}_{}", ncount + ni + 1), degree: k });
        ndiffs.push(to_terms(&ndom, &gv));
        n_images.push(bval);
        g_new.push(GImage::NewN(ni));
        h_new.push(h_value(&v, &a_el));
    }
    for coeffs in &split.kernel {
        let z = combine(&hm.representatives[0], coeffs, dim_cm);
        let (v, a_el) = split_cone_vector(&mm.m, k + 1, &z);
        let w = phi[k + 1].mul_vec(&z)?;
        // d(x, y) = φ(v, a) in C_n, with (x, y) in N^k ⊕ B^{k-1}
        let pre = solve(&cn.diffs[0][k], &w)?
            .ok_or_else(|| Error::Invariant("kernel class of the cone map is not a coboundary".into()))?;
        let (x, y) = split_cone_vector(&mm.n, k, &pre);
        let mi = mgens.len();
        mgens.push(Generator { name: format!("x{k}_{}", mcount + mi + 1), degree: k });
        mdiffs.push(to_terms(&mdom, &v));
        m_images.push(a_el.clone());
        g_new.push(GImage::Old(x));
        let dyt = IntervalElement::monomial(&y, 1).d(b_alg);
        h_new.push(h_value(&v, &a_el).add(&dyt, b_alg)?);
    }
    for coeffs in &split.cokernel {
        let z = combine(&hn.representatives[0], coeffs, dim_cn);
        let (w, bval) = split_cone_vector(&mm.n, k + 1, &z);
        let ni = ngens.len();
        ngens.push(Generator { name: format!("y{k}_{}", ncount + ni + 1), degree: k });
        ndiffs.push(to_terms(&ndom, &w));
        n_images.push(bval);
    }

    let new_m = Arc::new(Cdga::Free(free(&mdom).extend(mgens, mdiffs)?));
    let new_n = Arc::new(Cdga::Free(free(&ndom).extend(ngens, ndiffs)?));
    let nf = free(&new_n);
    let n_old_count = free(&ndom).generators().len();
    let mut g_images: Vec<Element> = mm
        .g
        .generator_images()
        .expect("free")
        .iter()
        .map(|e| nf.embed(free(&ndom), e))
        .collect::<Result<_>>()?;
    for gi in g_new {
        g_images.push(match gi {
            GImage::NewN(i) => nf.generator_element(n_old_count + i),
            GImage::Old(x) => nf.embed(free(&ndom), &x)?,
        });
    }
    let mut h_values = mm.homotopy.values.clone();
    h_values.extend(h_new);

    let g = CdgaMorphism::from_generator_images(new_m.clone(), new_n.clone(), g_images)?;
    let m = CdgaMorphism::from_generator_images(new_m.clone(), a, m_images)?;
    let n = CdgaMorphism::from_generator_images(new_n, b.clone(), n_images)?;
    let homotopy = CdgaHomotopy::new(new_m, b, h_values)?;
    let out = MapModel { g, m, n, f: mm.f.clone(), homotopy, degree: k };
    out.square().validate()?;
    if !cone_is_connected_through(&out.m, k) || !cone_is_connected_through(&out.n, k) {
        return invariant(format!("cone cohomology survives in degree {k} after the map-model step"));
    }
    check_linear_part(mm, &out, k)?;
    Ok(out)
}

/// Checks that the linear part of the new `g` on degree-`k` generators agrees
/// with `H^k φ` of the previous square. Each new generator `e` is identified
/// with the class of `(de, m(e))` in the cone cohomology of the previous model.
pub fn check_linear_part(prev: &MapModel, next: &MapModel, k: usize) -> Result<()> {
    let (hm, hn, psi, _) = cone_map_on_cohomology(prev, k);
    let classes = |model: &CdgaMorphism, old: &CdgaMorphism, h: &Cohomology| -> Result<(Vec<usize>, QMatrix)> {
        let fm = free(&model.domain);
        let fold = free(&old.domain);
        let c = cone(old);
        let idx: Vec<usize> = (0..fm.generators().len()).filter(|&i| fm.generators()[i].degree == k).collect();
        let mut cols = Vec::new();
        for &i in &idx {
            // (de, m(e)) expressed in the previous model
            let de = fm.differential_of_generator(i);
            let de_old = restrict(fm, fold, &de)?;
            let me = model.apply(&fm.generator_element(i));
            let mut z = de_old.coords.clone();
            z.extend(me.coords);
            let cc = class_coordinates(&h.representatives[0], &h.coboundaries[0], &z, c.dims[0][k + 1])
                .ok_or_else(|| Error::Invariant("new generator does not give a cone cocycle".into()))?;
            cols.push(cc);
        }
        Ok((idx, QMatrix::from_columns(&cols, h.representatives[0].len())))
    };
    let (midx, cm) = classes(&next.m, &prev.m, &hm)?;
    let (nidx, cn) = classes(&next.n, &prev.n, &hn)?;
    if cm.rank() != cm.rows() || cm.rows() != cm.cols() || cn.rank() != cn.rows() || cn.rows() != cn.cols() {
        return invariant("new generators do not match a basis of the cone cohomology");
    }
    let nf = free(&next.n.domain);
    let mut lin = QMatrix::zeros(nidx.len(), midx.len());
    for (j, &i) in midx.iter().enumerate() {
        let img = next.g.apply(&free(&next.m.domain).generator_element(i));
        for (gi, c) in nf.linear_part(&img) {
            let row = nidx.iter().position(|&x| x == gi).expect("degree-k generator");
            lin.set(row, j, c);
        }
    }
    if cn.mul(&lin)? != psi.mul(&cm)? {
        return Err(Error::Validation(format!("linear part of g disagrees with H^{k} of the cone map")));
    }
    Ok(())
}

/// Expresses an element of an extension in the smaller algebra it came from,
/// failing if it involves a new generator.
fn restrict(big: &FreeCdga, small: &FreeCdga, e: &Element) -> Result<Element> {
    let mut t = Terms::new();
    for (m, c) in big.terms(e) {
        if m.0.iter().any(|&(i, _)| i >= small.generators().len()) {
            return invariant("element involves generators outside the previous model");
        }
        if !c.is_zero() {
            t.insert(m, c);
        }
    }
    small.element_from_terms(e.degree, &t)
}

/// Model of `f` through degree `user_cap`.
pub fn build_map_model(f: CdgaMorphism, user_cap: usize) -> Result<MapModel> {
    if !f.domain.is_simply_connected() || !f.codomain.is_simply_connected() {
        return Err(Error::Validation("map model needs simply connected algebras".into()));
    }
    let mut mm = MapModel::base(f)?;
    for k in 2..=user_cap {
        mm = map_model_step(&mm, k)?;
    }
    Ok(mm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::Monomial;
    use crate::exactla::q;

    fn sphere_model(n: usize, cap: usize) -> Arc<Cdga> {
        // minimal model of the n-sphere
        let mut d = Terms::new();
        let gens = if n % 2 == 0 {
            d.insert(Monomial(vec![(0, 2)]), q(1));
            vec![Generator { name: "a".into(), degree: n }, Generator { name: "y".into(), degree: 2 * n - 1 }]
        } else {
            vec![Generator { name: "a".into(), degree: n }]
        };
        let diffs = if n % 2 == 0 { vec![Terms::new(), d] } else { vec![Terms::new()] };
        Arc::new(Cdga::Free(FreeCdga::new(gens, diffs, cap).unwrap()))
    }

    #[test]
    fn three_sphere_model_has_one_generator() {
        let a = sphere_model(3, 7);
        let mm = build_min_model(a, 5).unwrap();
        let gens: Vec<usize> = free(&mm.model).generators().iter().map(|g| g.degree).collect();
        assert_eq!(gens, vec![3]);
    }

    #[test]
    fn identity_map_model() {
        let a = sphere_model(2, 6);
        let f = CdgaMorphism::identity(a);
        let mm = build_map_model(f, 4).unwrap();
        mm.validate().unwrap();
        let gens: Vec<usize> = free(&mm.g.domain).generators().iter().map(|g| g.degree).collect();
        assert_eq!(gens, vec![2, 3]);
    }
}
