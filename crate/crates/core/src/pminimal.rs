//! Persistent minimal models of tame persistent CDGAs, built by persistent
//! Hirsch extensions: in each degree the cohomology of the tame mapping cone
//! is decomposed into bars, and one persistent generator is attached per bar.

use crate::cdga::{mul_terms, Cdga, CdgaMorphism, Element, FreeCdga, Generator, Monomial, Terms};
use crate::error::{dim_err, Error, Result};
use crate::exactla::{solve, Rational};
use crate::homotopy::{cone_map, cone_stage, split_cone_vector, CdgaHomotopy, HomotopySquare, IntervalElement};
use crate::pcomplex::{Cohomology, PersistentComplex};
use crate::persistence::{Bar, Grid};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Diagram `A(t_0) -> A(t_1) -> ... -> A(t_n)` of CDGAs sharing one degree cap.
#[derive(Clone, Debug)]
pub struct PersistentCdga {
    pub grid: Grid,
    pub stages: Vec<Arc<Cdga>>,
    pub maps: Vec<CdgaMorphism>,
}

impl PersistentCdga {
    pub fn new(grid: Grid, stages: Vec<Arc<Cdga>>, maps: Vec<CdgaMorphism>) -> Result<Self> {
        if stages.len() != grid.len() || maps.len() + 1 != grid.len() {
            return dim_err("persistent CDGA needs one stage per grid point and one map per gap");
        }
        let cap = stages[0].cap();
        if stages.iter().any(|s| s.cap() != cap) {
            return dim_err("all stages must share the degree cap");
        }
        for (r, m) in maps.iter().enumerate() {
            if *m.domain != *stages[r] || *m.codomain != *stages[r + 1] {
                return dim_err(format!("structure map {r} does not connect stages {r} and {}", r + 1));
            }
        }
        Ok(PersistentCdga { grid, stages, maps })
    }

    pub fn cap(&self) -> usize {
        self.stages[0].cap()
    }

    /// Copy with stage `i` repeated, the repetition joined by the identity
    /// and placed at the given time.
    pub fn duplicate_stage(&self, i: usize, time: Rational) -> Result<Self> {
        let mut times = self.grid.times().to_vec();
        times.insert(i + 1, time);
        let grid = Grid::new(times)?;
        let mut stages = self.stages.clone();
        stages.insert(i + 1, self.stages[i].clone());
        let mut maps = self.maps.clone();
        maps.insert(i, CdgaMorphism::identity(self.stages[i].clone()));
        PersistentCdga::new(grid, stages, maps)
    }
}

/// Generator of a persistent minimal model, alive on `[birth, death)`.
/// Its differential at birth and its image at death are stored as
/// polynomials in the global generator list.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistentGenerator {
    pub name: String,
    pub degree: usize,
    pub birth: usize,
    pub death: Option<usize>,
    pub differential: Terms,
    pub endpoint: Option<Terms>,
}

impl PersistentGenerator {
    pub fn bar(&self) -> Bar {
        Bar { degree: self.degree, birth: self.birth, death: self.death }
    }

    pub fn alive_at(&self, r: usize) -> bool {
        self.bar().alive_at(r)
    }
}

/// Stage algebras and structure maps derived from a list of persistent generators.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub stages: Vec<Arc<Cdga>>,
    /// Global indices of the generators alive at each stage, in order.
    pub alive: Vec<Vec<usize>>,
    pub structure: Vec<CdgaMorphism>,
}

fn global_gens(gens: &[PersistentGenerator]) -> Vec<Generator> {
    gens.iter().map(|g| Generator { name: g.name.clone(), degree: g.degree }).collect()
}

/// Image of a global polynomial under the structure map from stage `r` to `r + 1`.
fn push_terms(gens: &[PersistentGenerator], globals: &[Generator], t: &Terms, r: usize, cap: usize) -> Terms {
    let mut out = Terms::new();
    for (m, c) in t {
        let mut acc = Terms::new();
        acc.insert(Monomial::one(), Rational::one());
        for &(i, e) in &m.0 {
            let img = if gens[i].alive_at(r + 1) {
                let mut x = Terms::new();
                x.insert(Monomial::generator(i), Rational::one());
                x
            } else {
                gens[i].endpoint.clone().unwrap_or_default()
            };
            for _ in 0..e {
                acc = mul_terms(&acc, &img, globals, cap);
            }
        }
        for (mm, x) in acc {
            *out.entry(mm).or_insert_with(Rational::zero) += c * x;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn to_local(t: &Terms, alive: &[usize]) -> Result<Terms> {
    let mut out = Terms::new();
    for (m, c) in t {
        let mut lm = Vec::new();
        for &(i, e) in &m.0 {
            let li = alive
                .iter()
                .position(|&x| x == i)
                .ok_or_else(|| Error::Validation(format!("polynomial uses generator #{i}, which is not alive")))?;
            lm.push((li, e));
        }
        out.insert(Monomial(lm), c.clone());
    }
    Ok(out)
}

fn to_global(t: &Terms, alive: &[usize]) -> Terms {
    t.iter().map(|(m, c)| (Monomial(m.0.iter().map(|&(i, e)| (alive[i], e)).collect()), c.clone())).collect()
}

/// Builds the stage algebras and structure maps. Fails if a generator's
/// endpoint is incompatible with its differential.
pub fn assemble(grid: &Grid, gens: &[PersistentGenerator], cap: usize) -> Result<Assembled> {
    let n = grid.len();
    let globals = global_gens(gens);
    let alive: Vec<Vec<usize>> = (0..n).map(|r| (0..gens.len()).filter(|&i| gens[i].alive_at(r)).collect()).collect();
    // differential of each alive generator at each stage, globally indexed
    let mut diffs: Vec<BTreeMap<usize, Terms>> = vec![BTreeMap::new(); n];
    let mut stages: Vec<Arc<Cdga>> = Vec::with_capacity(n);
    for r in 0..n {
        for &i in &alive[r] {
            let d = if gens[i].birth == r {
                gens[i].differential.clone()
            } else {
                push_terms(gens, &globals, &diffs[r - 1][&i], r - 1, usize::MAX)
            };
            diffs[r].insert(i, d);
        }
        let local_gens: Vec<Generator> = alive[r].iter().map(|&i| globals[i].clone()).collect();
        let local_d: Vec<Terms> = alive[r].iter().map(|i| to_local(&diffs[r][i], &alive[r])).collect::<Result<_>>()?;
        let alg = FreeCdga::new(local_gens, local_d, cap)
            .map_err(|e| Error::Validation(format!("stage {}: {e}", grid.label(r))))?;
        stages.push(Arc::new(Cdga::Free(alg)));
    }
    let mut structure = Vec::new();
    for r in 0..n - 1 {
        let tgt = stages[r + 1].as_free().expect("free");
        let mut images = Vec::new();
        for &i in &alive[r] {
            let mut x = Terms::new();
            x.insert(Monomial::generator(i), Rational::one());
            let img = push_terms(gens, &globals, &x, r, usize::MAX);
            let local = to_local(&img, &alive[r + 1])?;
            images.push(tgt.element_from_terms(gens[i].degree, &local)?);
        }
        let f = CdgaMorphism::from_generator_images(stages[r].clone(), stages[r + 1].clone(), images).map_err(|_| {
            Error::Validation(format!(
                "endpoint law fails: structure map {} -> {} does not commute with d",
                grid.label(r),
                grid.label(r + 1)
            ))
        })?;
        structure.push(f);
    }
    Ok(Assembled { stages, alive, structure })
}

/// Persistent minimal model `M -> A` through some degree.
#[derive(Clone, Debug)]
pub struct TameMinimalModel {
    pub grid: Grid,
    pub generators: Vec<PersistentGenerator>,
    pub assembled: Assembled,
    /// `m(r): M(r) -> A(r)`
    pub stage_maps: Vec<CdgaMorphism>,
    /// `H(r): M(r) -> A(r+1) ⊗ Λ(t, dt)` from `A(r<r+1) ∘ m(r)` to `m(r+1) ∘ M(r<r+1)`.
    pub homotopies: Vec<CdgaHomotopy>,
    pub degree: usize,
}

impl TameMinimalModel {
    /// Model with no generators.
    pub fn initial(a: &PersistentCdga) -> Result<Self> {
        let assembled = assemble(&a.grid, &[], a.cap())?;
        let stage_maps = (0..a.grid.len())
            .map(|r| CdgaMorphism::unit_map(assembled.stages[r].clone(), a.stages[r].clone()))
            .collect::<Result<Vec<_>>>()?;
        let homotopies = (0..a.grid.len() - 1)
            .map(|r| CdgaHomotopy::new(assembled.stages[r].clone(), a.stages[r + 1].clone(), Vec::new()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TameMinimalModel { grid: a.grid.clone(), generators: Vec::new(), assembled, stage_maps, homotopies, degree: 1 })
    }

    /// Reassembles from generator data, stage images and homotopy values.
    pub fn from_parts(
        a: &PersistentCdga,
        generators: Vec<PersistentGenerator>,
        stage_images: Vec<Vec<Element>>,
        homotopy_values: Vec<Vec<IntervalElement>>,
        degree: usize,
    ) -> Result<Self> {
        let assembled = assemble(&a.grid, &generators, a.cap())?;
        let n = a.grid.len();
        if stage_images.len() != n || homotopy_values.len() + 1 != n {
            return dim_err("model data does not cover every stage");
        }
        let stage_maps = (0..n)
            .map(|r| {
                CdgaMorphism::from_generator_images(assembled.stages[r].clone(), a.stages[r].clone(), stage_images[r].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let homotopies = (0..n - 1)
            .map(|r| CdgaHomotopy::new(assembled.stages[r].clone(), a.stages[r + 1].clone(), homotopy_values[r].clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TameMinimalModel { grid: a.grid.clone(), generators, assembled, stage_maps, homotopies, degree })
    }

    pub fn stage(&self, r: usize) -> &FreeCdga {
        self.assembled.stages[r].as_free().expect("free")
    }

    pub fn square(&self, a: &PersistentCdga, r: usize) -> HomotopySquare {
        HomotopySquare {
            top: self.assembled.structure[r].clone(),
            left: self.stage_maps[r].clone(),
            right: self.stage_maps[r + 1].clone(),
            bottom: a.maps[r].clone(),
            homotopy: self.homotopies[r].clone(),
        }
    }

    /// Bars of the generators, i.e. the barcode of the dual rational homotopy groups.
    pub fn homotopy_barcode(&self) -> Vec<Bar> {
        let mut bars: Vec<Bar> = self.generators.iter().map(|g| g.bar()).collect();
        crate::persistence::sort_bars(&mut bars);
        bars
    }

    pub fn element_global_terms(&self, r: usize, e: &Element) -> Terms {
        to_global(&self.stage(r).terms(e), &self.assembled.alive[r])
    }

    pub fn global_element(&self, r: usize, degree: usize, t: &Terms) -> Result<Element> {
        self.stage(r).element_from_terms(degree, &to_local(t, &self.assembled.alive[r])?)
    }
}

/// Tame mapping cone: stages are the cones of `m(r)` and structure maps are
/// the cone maps of the squares. Stored degree `j` is cone degree `j - 1`.
pub fn tame_cone(model: &TameMinimalModel, a: &PersistentCdga) -> Result<PersistentComplex> {
    let n = a.grid.len();
    let cap = a.cap();
    let mut dims = Vec::new();
    let mut diffs = Vec::new();
    for r in 0..n {
        let (d, m) = cone_stage(&model.stage_maps[r]);
        dims.push(d);
        diffs.push(m);
    }
    let structure = (0..n - 1).map(|r| cone_map(&model.square(a, r))).collect();
    PersistentComplex::new(a.grid.clone(), cap, dims, diffs, structure)
}

/// Attaches one persistent generator of degree `k` for each bar of `H^k` of
/// the tame cone.
pub fn surgery_step(model: &TameMinimalModel, a: &PersistentCdga, k: usize) -> Result<TameMinimalModel> {
    let n = a.grid.len();
    let tc = tame_cone(model, a)?;
    let h: Cohomology = tc.cohomology(k + 1);
    let dec = h.decompose();
    let existing = model.generators.iter().filter(|g| g.degree == k).count();
    let mut gens = model.generators.clone();
    let mut stage_images: Vec<Vec<Element>> =
        model.stage_maps.iter().map(|m| m.generator_images().expect("free").to_vec()).collect();
    let mut hvalues: Vec<Vec<IntervalElement>> = model.homotopies.iter().map(|h| h.values.clone()).collect();
    // per new generator: stage -> image, stage -> homotopy value
    let mut new_images: Vec<BTreeMap<usize, Element>> = Vec::new();
    let mut new_hvalues: Vec<BTreeMap<usize, IntervalElement>> = Vec::new();
    for (bi, rep) in dec.representatives.iter().enumerate() {
        let bar = &rep.bar;
        let p = bar.birth;
        let end = bar.death.unwrap_or(n);
        let mut z = h.lift(p, &rep.vectors[0], tc.dims[p][k + 1]);
        let mut images = BTreeMap::new();
        let mut hv = BTreeMap::new();
        let mut birth_diff = Terms::new();
        let mut endpoint = None;
        for r in p..end {
            let (v, at) = split_cone_vector(&model.stage_maps[r], k + 1, &z);
            if r == p {
                birth_diff = model.element_global_terms(r, &v);
            }
            images.insert(r, at.clone());
            if r + 1 < n {
                let b_alg = &*a.stages[r + 1];
                let mut val = IntervalElement::constant(&a.maps[r].apply(&at))
                    .add(&model.homotopies[r].apply(&v).integrate_0t(b_alg), b_alg)?;
                let next = tc.structure[r][k + 1].mul_vec(&z)?;
                if r + 1 == end {
                    // the class dies: bound the pushed cocycle in the next cone
                    let pre = solve(&tc.diffs[r + 1][k], &next)?
                        .ok_or_else(|| Error::Invariant(format!("dying class at {} is not a coboundary", r + 1)))?;
                    let (u, b) = split_cone_vector(&model.stage_maps[r + 1], k, &pre);
                    endpoint = Some(model.element_global_terms(r + 1, &u));
                    val = val.add(&IntervalElement::monomial(&b, 1).d(b_alg), b_alg)?;
                }
                hv.insert(r, val);
                z = next;
            }
        }
        gens.push(PersistentGenerator {
            name: format!("x{k}_{}", existing + bi + 1),
            degree: k,
            birth: p,
            death: bar.death,
            differential: birth_diff,
            endpoint,
        });
        new_images.push(images);
        new_hvalues.push(hv);
    }
    let first_new = model.generators.len();
    for r in 0..n {
        for (j, imgs) in new_images.iter().enumerate() {
            if gens[first_new + j].alive_at(r) {
                stage_images[r].push(imgs[&r].clone());
                if r + 1 < n {
                    hvalues[r].push(new_hvalues[j][&r].clone());
                }
            }
        }
    }
    let out = TameMinimalModel::from_parts(a, gens, stage_images, hvalues, k)?;
    for r in 0..n - 1 {
        out.square(a, r).validate()?;
    }
    Ok(out)
}

/// Persistent minimal model through degree `user_cap`. The persistent CDGA
/// must have cap at least `user_cap + 2`.
pub fn build_persistent_minimal_model(a: &PersistentCdga, user_cap: usize) -> Result<TameMinimalModel> {
    if a.cap() < user_cap + 2 {
        return Err(Error::Validation(format!("stage cap {} is below the working cap {}", a.cap(), user_cap + 2)));
    }
    for (r, s) in a.stages.iter().enumerate() {
        if !s.is_simply_connected() {
            return Err(Error::Validation(format!("stage {} is not simply connected", a.grid.label(r))));
        }
    }
    let mut model = TameMinimalModel::initial(a)?;
    for k in 2..=user_cap {
        model = surgery_step(&model, a, k)?;
        check_connectivity(&model, k)?;
    }
    Ok(model)
}

/// `H^j C_{m(r)} = 0` for `j <= k` at every stage.
pub fn check_connectivity(model: &TameMinimalModel, k: usize) -> Result<()> {
    for (r, m) in model.stage_maps.iter().enumerate() {
        if !crate::minimal::cone_is_connected_through(m, k) {
            return Err(Error::Validation(format!(
                "cone cohomology does not vanish through degree {k} at stage {}",
                model.grid.label(r)
            )));
        }
    }
    Ok(())
}

/// Renders a global polynomial with generator names.
pub fn render_terms(gens: &[PersistentGenerator], t: &Terms) -> String {
    let names: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
    crate::cli_io::render_polynomial(&names, t)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PresentedGenerator {
    pub name: String,
    pub degree: usize,
    pub birth: String,
    pub death: Option<String>,
}

/// `d x = v` at the birth of `x`, or `x@t = u` at its death.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Relation {
    pub generator: String,
    pub kind: RelationKind,
    pub time: String,
    pub value: String,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Differential,
    Endpoint,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Presentation {
    pub generators: Vec<PresentedGenerator>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    /// `pΛ( a : deg 2 on [0,2) ; ... | d y = a^2 ; y@2 = 0 )`
    pub fn to_text(&self) -> String {
        let gens: Vec<String> = self
            .generators
            .iter()
            .map(|g| {
                let end = g.death.clone().unwrap_or_else(|| "inf".into());
                format!("{} : deg {} on [{},{})", g.name, g.degree, g.birth, end)
            })
            .collect();
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|r| match r.kind {
                RelationKind::Differential => format!("d {} = {}", r.generator, r.value),
                RelationKind::Endpoint => format!("{}@{} = {}", r.generator, r.time, r.value),
            })
            .collect();
        if rels.is_empty() {
            format!("pΛ( {} )", gens.join(" ; "))
        } else {
            format!("pΛ( {} | {} )", gens.join(" ; "), rels.join(" ; "))
        }
    }

    pub fn relation(&self, generator: &str, kind: RelationKind) -> Option<&Relation> {
        self.relations.iter().find(|r| r.generator == generator && r.kind == kind)
    }
}

/// Generators ordered by (degree, birth, name) with their relations. Zero
/// relations are listed only when `verbose` is set.
pub fn presentation(model: &TameMinimalModel, verbose: bool) -> Presentation {
    let grid = &model.grid;
    let mut order: Vec<usize> = (0..model.generators.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&model.generators[i], &model.generators[j]);
        (a.degree, a.birth, &a.name).cmp(&(b.degree, b.birth, &b.name))
    });
    let mut generators = Vec::new();
    let mut relations = Vec::new();
    for &i in &order {
        let g = &model.generators[i];
        generators.push(PresentedGenerator {
            name: g.name.clone(),
            degree: g.degree,
            birth: grid.label(g.birth),
            death: g.death.map(|d| grid.label(d)),
        });
        if verbose || !g.differential.is_empty() {
            relations.push(Relation {
                generator: g.name.clone(),
                kind: RelationKind::Differential,
                time: grid.label(g.birth),
                value: render_terms(&model.generators, &g.differential),
            });
        }
        if let (Some(d), Some(e)) = (g.death, &g.endpoint) {
            if verbose || !e.is_empty() {
                relations.push(Relation {
                    generator: g.name.clone(),
                    kind: RelationKind::Endpoint,
                    time: grid.label(d),
                    value: render_terms(&model.generators, e),
                });
            }
        }
    }
    Presentation { generators, relations }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConnectivityEntry {
    pub stage: String,
    pub through_degree: usize,
    pub status: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HirschCertificate {
    pub generator: String,
    pub degree: usize,
    pub birth: String,
    pub death: Option<String>,
    pub status: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub model_degree: usize,
    pub minimality: String,
    pub connectivity: Vec<ConnectivityEntry>,
    pub homotopy_identities: String,
    pub hirsch_certificates: Vec<HirschCertificate>,
    pub endpoint_law: String,
    pub passed: bool,
}

fn detail(e: &Error) -> String {
    match e {
        Error::Validation(m) => m.clone(),
        e => e.to_string(),
    }
}

fn status(r: Result<()>) -> String {
    match r {
        Ok(()) => "pass".into(),
        Err(e) => format!("fail: {}", detail(&e)),
    }
}

/// Re-checks every invariant of a model against its input.
pub fn validate_model(model: &TameMinimalModel, a: &PersistentCdga) -> ValidationReport {
    let n = a.grid.len();
    let minimality = status((|| {
        for g in &model.generators {
            if g.degree < 2 {
                return Err(Error::Validation(format!("generator {} has degree below 2", g.name)));
            }
            if g.differential.keys().any(|m| m.word_length() < 2) {
                return Err(Error::Validation(format!("differential of {} is not decomposable", g.name)));
            }
        }
        for r in 0..n {
            if !model.stage(r).is_minimal() {
                return Err(Error::Validation(format!("stage {} is not minimal", a.grid.label(r))));
            }
        }
        Ok(())
    })());
    let connectivity = (0..n)
        .map(|r| ConnectivityEntry {
            stage: a.grid.label(r),
            through_degree: model.degree,
            status: if crate::minimal::cone_is_connected_through(&model.stage_maps[r], model.degree) {
                "pass".into()
            } else {
                "fail".into()
            },
        })
        .collect::<Vec<_>>();
    let homotopy_identities = status((|| {
        for r in 0..n - 1 {
            model.square(a, r).validate().map_err(|e| Error::Validation(format!("square at {}: {}", a.grid.label(r), detail(&e))))?;
        }
        for m in &model.stage_maps {
            m.check_chain_map()?;
        }
        Ok(())
    })());
    let endpoint_law = status(endpoint_law(model));
    let hirsch_certificates = model
        .generators
        .iter()
        .map(|g| HirschCertificate {
            generator: g.name.clone(),
            degree: g.degree,
            birth: a.grid.label(g.birth),
            death: g.death.map(|d| a.grid.label(d)),
            status: status(hirsch_certificate(model, g)),
        })
        .collect::<Vec<_>>();
    let passed = minimality == "pass"
        && homotopy_identities == "pass"
        && endpoint_law == "pass"
        && connectivity.iter().all(|c| c.status == "pass")
        && hirsch_certificates.iter().all(|c| c.status == "pass");
    ValidationReport {
        schema_version: 1,
        model_degree: model.degree,
        minimality,
        connectivity,
        homotopy_identities,
        hirsch_certificates,
        endpoint_law,
        passed,
    }
}

/// The attaching cocycle only involves older, lower-degree generators alive
/// at birth, and is closed there.
fn hirsch_certificate(model: &TameMinimalModel, g: &PersistentGenerator) -> Result<()> {
    let p = g.birth;
    let me = model.generators.iter().position(|x| x.name == g.name).expect("own generator");
    for m in g.differential.keys() {
        for &(i, _) in &m.0 {
            if i >= me || !model.generators[i].alive_at(p) || model.generators[i].degree >= g.degree {
                return Err(Error::Validation(format!("differential of {} uses an invalid generator", g.name)));
            }
        }
    }
    let v = model.global_element(p, g.degree + 1, &g.differential)?;
    let alg = &model.assembled.stages[p];
    if !alg.d(&v).is_zero() {
        return Err(Error::Validation(format!("attaching element of {} is not closed", g.name)));
    }
    Ok(())
}

/// At death, `d(endpoint)` equals the pushed-forward differential.
fn endpoint_law(model: &TameMinimalModel) -> Result<()> {
    let cap = model.assembled.stages[0].cap();
    let globals = global_gens(&model.generators);
    for g in &model.generators {
        let Some(q) = g.death else {
            if g.endpoint.is_some() {
                return Err(Error::Validation(format!("{} never dies but has an endpoint", g.name)));
            }
            continue;
        };
        let e = g.endpoint.clone().ok_or_else(|| Error::Validation(format!("{} dies without an endpoint", g.name)))?;
        let mut d = g.differential.clone();
        for r in g.birth..q {
            d = push_terms(&model.generators, &globals, &d, r, cap);
        }
        let lhs = model.assembled.stages[q].d(&model.global_element(q, g.degree, &e)?);
        let rhs = model.global_element(q, g.degree + 1, &d)?;
        if lhs != rhs {
            return Err(Error::Validation(format!("endpoint of {} at {} is incompatible", g.name, model.grid.label(q))));
        }
    }
    Ok(())
}

/// Compact description of the generators, used to compare models.
pub fn generator_summary(model: &TameMinimalModel) -> Vec<(usize, usize, Option<usize>, String, Option<String>)> {
    model
        .generators
        .iter()
        .map(|g| {
            (
                g.degree,
                g.birth,
                g.death,
                render_terms(&model.generators, &g.differential),
                g.endpoint.as_ref().map(|e| render_terms(&model.generators, e)),
            )
        })
        .collect()
}
