//! Commutative differential graded algebras over the rationals, truncated
//! above a degree cap.
//!
//! Two kinds are supported: free (Sullivan) algebras given by generators and
//! their differentials, and finite-dimensional algebras given by a basis,
//! structure constants and a differential. Elements are homogeneous and are
//! stored as coordinate vectors in the basis of their degree.

use crate::error::{dim_err, Error, Result};
use crate::exactla::{axpy, is_zero_vec, q, zero_vec, QMatrix, Rational};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
}

/// Normal-ordered product of generators: `(index, exponent)` sorted by index,
/// odd generators with exponent one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub Vec<(usize, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Monomial(vec![(i, 1)])
    }

    pub fn word_length(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree(&self, gens: &[Generator]) -> usize {
        self.0.iter().map(|&(i, e)| gens[i].degree * e as usize).sum()
    }

    pub fn is_generator(&self) -> Option<usize> {
        match self.0.as_slice() {
            [(i, 1)] => Some(*i),
            _ => None,
        }
    }
}

/// Product of two monomials with its Koszul sign, or `None` if an odd
/// generator would appear twice.
pub fn mul_monomials(a: &Monomial, b: &Monomial, gens: &[Generator]) -> Option<(Monomial, bool)> {
    let mut negative = false;
    for &(i, ei) in &a.0 {
        if gens[i].degree % 2 == 0 {
            continue;
        }
        for &(j, ej) in &b.0 {
            if j < i && gens[j].degree % 2 == 1 && (ei * ej) % 2 == 1 {
                negative = !negative;
            }
        }
    }
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(a.0.len() + b.0.len());
    let (mut x, mut y) = (0, 0);
    while x < a.0.len() || y < b.0.len() {
        let take_a = y >= b.0.len() || (x < a.0.len() && a.0[x].0 < b.0[y].0);
        let take_b = x >= a.0.len() || (y < b.0.len() && b.0[y].0 < a.0[x].0);
        if take_a {
            out.push(a.0[x]);
            x += 1;
        } else if take_b {
            out.push(b.0[y]);
            y += 1;
        } else {
            let (i, e) = (a.0[x].0, a.0[x].1 + b.0[y].1);
            if gens[i].degree % 2 == 1 {
                return None;
            }
            out.push((i, e));
            x += 1;
            y += 1;
        }
    }
    Some((Monomial(out), negative))
}

pub type Terms = BTreeMap<Monomial, Rational>;

pub fn mul_terms(a: &Terms, b: &Terms, gens: &[Generator], cap: usize) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma.degree(gens) + mb.degree(gens) > cap {
                continue;
            }
            if let Some((m, neg)) = mul_monomials(ma, mb, gens) {
                let c = ca * cb;
                let e = out.entry(m).or_insert_with(Rational::zero);
                if neg {
                    *e -= c;
                } else {
                    *e += c;
                }
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn add_terms(acc: &mut Terms, c: &Rational, t: &Terms) {
    for (m, x) in t {
        let e = acc.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c * x;
    }
    acc.retain(|_, c| !c.is_zero());
}

/// Homogeneous element in the basis of its degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    pub degree: usize,
    pub coords: Vec<Rational>,
}

impl Element {
    pub fn zero(alg: &Cdga, degree: usize) -> Self {
        Element { degree, coords: zero_vec(alg.dim(degree)) }
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.coords)
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        if self.degree != other.degree || self.coords.len() != other.coords.len() {
            return dim_err("sum of elements of different degrees");
        }
        Ok(Element { degree: self.degree, coords: crate::exactla::add_vec(&self.coords, &other.coords) })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        if self.degree != other.degree || self.coords.len() != other.coords.len() {
            return dim_err("difference of elements of different degrees");
        }
        Ok(Element { degree: self.degree, coords: crate::exactla::sub_vec(&self.coords, &other.coords) })
    }

    pub fn scale(&self, c: &Rational) -> Element {
        Element { degree: self.degree, coords: crate::exactla::scale_vec(c, &self.coords) }
    }
}

/// Free graded-commutative algebra on generators of positive degree, with a
/// differential in which each generator's image only involves earlier
/// generators.
#[derive(Clone, Debug)]
pub struct FreeCdga {
    generators: Vec<Generator>,
    differentials: Vec<Terms>,
    cap: usize,
    bases: Vec<Vec<Monomial>>,
    index: Vec<HashMap<Monomial, usize>>,
    dmats: Vec<QMatrix>,
}

impl PartialEq for FreeCdga {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators && self.differentials == other.differentials && self.cap == other.cap
    }
}

impl FreeCdga {
    /// The ground field, with no generators.
    pub fn ground(cap: usize) -> Self {
        Self::new(Vec::new(), Vec::new(), cap).expect("ground field")
    }

    pub fn new(generators: Vec<Generator>, differentials: Vec<Terms>, cap: usize) -> Result<Self> {
        if generators.len() != differentials.len() {
            return dim_err("one differential per generator is required");
        }
        for (i, g) in generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::Validation(format!("generator {} has degree zero", g.name)));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Validation(format!("duplicate generator name {}", g.name)));
            }
            for m in differentials[i].keys() {
                if m.0.iter().any(|&(j, _)| j >= i) {
                    return Err(Error::Validation(format!(
                        "differential of {} involves a generator that is not earlier",
                        g.name
                    )));
                }
                if m.degree(&generators) != g.degree + 1 {
                    return Err(Error::Validation(format!("differential of {} is not of degree {}", g.name, g.degree + 1)));
                }
            }
        }
        let bases = monomial_bases(&generators, cap);
        let index = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect())
            .collect();
        let mut alg = FreeCdga { generators, differentials, cap, bases, index, dmats: Vec::new() };
        alg.dmats = (0..=cap).map(|n| alg.build_d_matrix(n)).collect();
        for n in 0..cap {
            if !alg.dmats[n + 1].mul(&alg.dmats[n])?.is_zero() {
                return Err(Error::Validation(format!("d∘d ≠ 0 in degree {n}")));
            }
        }
        Ok(alg)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn differential_terms(&self, i: usize) -> &Terms {
        &self.differentials[i]
    }

    pub fn basis(&self, n: usize) -> &[Monomial] {
        if n > self.cap {
            &[]
        } else {
            &self.bases[n]
        }
    }

    pub fn monomial_index(&self, n: usize, m: &Monomial) -> Option<usize> {
        self.index.get(n)?.get(m).copied()
    }

    /// Coordinates of a term map of homogeneous degree `n` (terms above the cap vanish).
    pub fn element_from_terms(&self, n: usize, terms: &Terms) -> Result<Element> {
        let mut coords = zero_vec(self.basis(n).len());
        for (m, c) in terms {
            if m.degree(&self.generators) != n {
                return dim_err("inhomogeneous term map");
            }
            if n > self.cap {
                continue;
            }
            let i = self.monomial_index(n, m).ok_or_else(|| Error::Invariant("monomial missing from basis".into()))?;
            coords[i] += c;
        }
        Ok(Element { degree: n, coords })
    }

    pub fn terms(&self, e: &Element) -> Terms {
        let mut t = Terms::new();
        for (m, c) in self.basis(e.degree).iter().zip(&e.coords) {
            if !c.is_zero() {
                t.insert(m.clone(), c.clone());
            }
        }
        t
    }

    pub fn generator_element(&self, i: usize) -> Element {
        let g = &self.generators[i];
        let mut t = Terms::new();
        t.insert(Monomial::generator(i), Rational::one());
        self.element_from_terms(g.degree, &t).expect("generator")
    }

    pub fn differential_of_generator(&self, i: usize) -> Element {
        self.element_from_terms(self.generators[i].degree + 1, &self.differentials[i]).expect("validated")
    }

    fn d_monomial(&self, m: &Monomial) -> Terms {
        let gens = &self.generators;
        let mut out = Terms::new();
        let mut prefix_deg = 0usize;
        for (p, &(i, e)) in m.0.iter().enumerate() {
            let mut left = m.0[..p].to_vec();
            if e > 1 {
                left.push((i, e - 1));
            }
            let right = Monomial(m.0[p + 1..].to_vec());
            let mut lt = Terms::new();
            lt.insert(Monomial(left), Rational::one());
            let mut rt = Terms::new();
            rt.insert(right, Rational::one());
            let prod = mul_terms(&mul_terms(&lt, &self.differentials[i], gens, usize::MAX), &rt, gens, usize::MAX);
            let mut c = q(e as i64);
            if prefix_deg % 2 == 1 {
                c = -c;
            }
            add_terms(&mut out, &c, &prod);
            prefix_deg += gens[i].degree * e as usize;
        }
        out
    }

    fn build_d_matrix(&self, n: usize) -> QMatrix {
        let rows = self.basis(n + 1).len();
        let mut m = QMatrix::zeros(rows, self.bases[n].len());
        if n + 1 > self.cap {
            return m;
        }
        for (j, mono) in self.bases[n].iter().enumerate() {
            for (t, c) in self.d_monomial(mono) {
                let i = self.index[n + 1][&t];
                m.set(i, j, c);
            }
        }
        m
    }

    /// New algebra with generators appended. Old elements keep their
    /// monomials; use [`FreeCdga::embed`] to move them over.
    pub fn extend(&self, generators: Vec<Generator>, differentials: Vec<Terms>) -> Result<FreeCdga> {
        let mut g = self.generators.clone();
        g.extend(generators);
        let mut d = self.differentials.clone();
        d.extend(differentials);
        FreeCdga::new(g, d, self.cap)
    }

    /// Image of an element of `sub` (whose generators form a prefix of ours,
    /// or more generally are matched by `gen_map`) in this algebra.
    pub fn embed(&self, sub: &FreeCdga, e: &Element) -> Result<Element> {
        let map: Vec<usize> = sub
            .generators
            .iter()
            .map(|g| self.generator_index(&g.name).ok_or_else(|| Error::Invariant(format!("generator {} missing", g.name))))
            .collect::<Result<_>>()?;
        let mut t = Terms::new();
        for (m, c) in sub.terms(e) {
            let mut mm: Vec<(usize, u32)> = m.0.iter().map(|&(i, x)| (map[i], x)).collect();
            mm.sort();
            // reordering odd generators introduces a sign
            let mut neg = false;
            let idx: Vec<usize> = m.0.iter().filter(|&&(i, _)| sub.generators[i].degree % 2 == 1).map(|&(i, _)| map[i]).collect();
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    if idx[a] > idx[b] {
                        neg = !neg;
                    }
                }
            }
            t.insert(Monomial(mm), if neg { -c } else { c });
        }
        self.element_from_terms(e.degree, &t)
    }

    /// Coefficients of the element on the degree-`deg` generators.
    pub fn linear_part(&self, e: &Element) -> Vec<(usize, Rational)> {
        self.basis(e.degree)
            .iter()
            .zip(&e.coords)
            .filter_map(|(m, c)| m.is_generator().map(|i| (i, c.clone())))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Every generator differential lies in the square of the augmentation ideal.
    pub fn is_minimal(&self) -> bool {
        self.differentials.iter().all(|t| t.keys().all(|m| m.word_length() >= 2))
    }
}

fn monomial_bases(gens: &[Generator], cap: usize) -> Vec<Vec<Monomial>> {
    let mut bases: Vec<Vec<Monomial>> = vec![Vec::new(); cap + 1];
    fn rec(gens: &[Generator], i: usize, deg: usize, cap: usize, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Vec<Monomial>>) {
        if i == gens.len() {
            out[deg].push(Monomial(cur.clone()));
            return;
        }
        rec(gens, i + 1, deg, cap, cur, out);
        let gd = gens[i].degree;
        let max_e = if gd % 2 == 1 { 1 } else { u32::MAX };
        let mut e = 1u32;
        while e <= max_e && deg + gd * e as usize <= cap {
            cur.push((i, e));
            rec(gens, i + 1, deg + gd * e as usize, cap, cur, out);
            cur.pop();
            e += 1;
        }
    }
    rec(gens, 0, 0, cap, &mut Vec::new(), &mut bases);
    for b in bases.iter_mut() {
        b.sort_by(|x, y| (x.word_length(), &x.0).cmp(&(y.word_length(), &y.0)));
    }
    bases
}

/// Finite-dimensional CDGA with a basis label per vector, zero above its top
/// degree. Products are given by structure constants between basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCdga {
    labels: Vec<Vec<String>>,
    cap: usize,
    /// `(p, i, q, j) -> coordinates in degree p + q`
    products: HashMap<(usize, usize, usize, usize), Vec<Rational>>,
    dmats: Vec<QMatrix>,
    unit: Vec<Rational>,
}

impl FiniteCdga {
    /// `labels[n]` lists the basis of degree `n`. `products` gives nonzero
    /// products of basis pairs (missing pairs are zero, except that the unit
    /// acts as the identity). `differential[n]` maps degree `n` to `n + 1`.
    pub fn new(
        labels: Vec<Vec<String>>,
        unit: Vec<Rational>,
        products: HashMap<(usize, usize, usize, usize), Vec<Rational>>,
        differential: Vec<QMatrix>,
        cap: usize,
    ) -> Result<Self> {
        if labels.len() > cap + 1 {
            return Err(Error::Validation(format!("finite algebra has degrees above the cap {cap}")));
        }
        let mut labels = labels;
        labels.resize(cap + 1, Vec::new());
        if labels[0].is_empty() || unit.len() != labels[0].len() {
            return Err(Error::Validation("finite algebra needs a unit in degree 0".into()));
        }
        let mut dmats = differential;
        dmats.resize_with(cap + 1, || QMatrix::zeros(0, 0));
        for n in 0..=cap {
            let rows = if n < cap { labels[n + 1].len() } else { 0 };
            if dmats[n].rows() == 0 && dmats[n].cols() == 0 {
                dmats[n] = QMatrix::zeros(rows, labels[n].len());
            }
            if dmats[n].rows() != rows || dmats[n].cols() != labels[n].len() {
                return dim_err(format!("differential in degree {n} has the wrong shape"));
            }
        }
        let alg = FiniteCdga { labels, cap, products, dmats, unit };
        alg.validate()?;
        Ok(alg)
    }

    pub fn labels(&self, n: usize) -> &[String] {
        if n > self.cap {
            &[]
        } else {
            &self.labels[n]
        }
    }

    pub fn label_position(&self, name: &str) -> Option<(usize, usize)> {
        self.labels.iter().enumerate().find_map(|(n, l)| l.iter().position(|x| x == name).map(|i| (n, i)))
    }

    fn basis_product(&self, p: usize, i: usize, qd: usize, j: usize) -> Vec<Rational> {
        let n = p + qd;
        if n > self.cap {
            return Vec::new();
        }
        if let Some(v) = self.products.get(&(p, i, qd, j)) {
            return v.clone();
        }
        zero_vec(self.labels[n].len())
    }

    fn mul_raw(&self, p: usize, x: &[Rational], qd: usize, y: &[Rational]) -> Vec<Rational> {
        let n = p + qd;
        if n > self.cap {
            return Vec::new();
        }
        let mut out = zero_vec(self.labels[n].len());
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let v = self.basis_product(p, i, qd, j);
                axpy(&mut out, &(a * b), &v);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let cap = self.cap;
        let e = |n: usize, i: usize| crate::exactla::unit_vec(self.labels[n].len(), i);
        for (&(p, i, qd, j), v) in &self.products {
            if p > cap || qd > cap || i >= self.labels[p].len() || j >= self.labels[qd].len() {
                return dim_err("product table entry out of range");
            }
            if p + qd <= cap && v.len() != self.labels[p + qd].len() {
                return dim_err("product table value has the wrong length");
            }
        }
        for n in 0..=cap {
            for i in 0..self.labels[n].len() {
                if self.mul_raw(0, &self.unit, n, &e(n, i)) != e(n, i) || self.mul_raw(n, &e(n, i), 0, &self.unit) != e(n, i) {
                    return Err(Error::Validation(format!("unit does not act as identity on {}", self.labels[n][i])));
                }
            }
        }
        for p in 0..=cap {
            for qd in 0..=cap - p {
                for i in 0..self.labels[p].len() {
                    for j in 0..self.labels[qd].len() {
                        let ab = self.mul_raw(p, &e(p, i), qd, &e(qd, j));
                        let ba = self.mul_raw(qd, &e(qd, j), p, &e(p, i));
                        let sign = if (p * qd) % 2 == 1 { -Rational::one() } else { Rational::one() };
                        if ab != crate::exactla::scale_vec(&sign, &ba) {
                            return Err(Error::Validation(format!(
                                "product of {} and {} is not graded commutative",
                                self.labels[p][i], self.labels[qd][j]
                            )));
                        }
                        // Leibniz
                        if p + qd < cap {
                            let lhs = self.dmats[p + qd].mul_vec(&ab)?;
                            let da = self.dmats[p].mul_vec(&e(p, i))?;
                            let db = self.dmats[qd].mul_vec(&e(qd, j))?;
                            let mut rhs = self.mul_raw(p + 1, &da, qd, &e(qd, j));
                            let t = self.mul_raw(p, &e(p, i), qd + 1, &db);
                            let s = if p % 2 == 1 { -Rational::one() } else { Rational::one() };
                            axpy(&mut rhs, &s, &t);
                            if lhs != rhs {
                                return Err(Error::Validation(format!(
                                    "Leibniz rule fails on {} * {}",
                                    self.labels[p][i], self.labels[qd][j]
                                )));
                            }
                        }
                        for r in 0..=cap - p - qd {
                            for k in 0..self.labels[r].len() {
                                let l = self.mul_raw(p + qd, &ab, r, &e(r, k));
                                let bc = self.mul_raw(qd, &e(qd, j), r, &e(r, k));
                                let rr = self.mul_raw(p, &e(p, i), qd + r, &bc);
                                if l != rr {
                                    return Err(Error::Validation("multiplication is not associative".into()));
                                }
                            }
                        }
                    }
                }
            }
        }
        for n in 0..cap {
            if !self.dmats[n + 1].mul(&self.dmats[n])?.is_zero() {
                return Err(Error::Validation(format!("d∘d ≠ 0 in degree {n}")));
            }
        }
        if !is_zero_vec(&self.dmats[0].mul_vec(&self.unit)?) {
            return Err(Error::Validation("d(1) ≠ 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cdga {
    Free(FreeCdga),
    Finite(FiniteCdga),
}

impl Cdga {
    pub fn cap(&self) -> usize {
        match self {
            Cdga::Free(a) => a.cap,
            Cdga::Finite(a) => a.cap,
        }
    }

    pub fn dim(&self, n: usize) -> usize {
        match self {
            Cdga::Free(a) => a.basis(n).len(),
            Cdga::Finite(a) => a.labels(n).len(),
        }
    }

    /// Differential from degree `n` into degree `n + 1`.
    pub fn d_matrix(&self, n: usize) -> QMatrix {
        if n > self.cap() {
            return QMatrix::zeros(0, 0);
        }
        match self {
            Cdga::Free(a) => a.dmats[n].clone(),
            Cdga::Finite(a) => a.dmats[n].clone(),
        }
    }

    pub fn d(&self, e: &Element) -> Element {
        let coords = self.d_matrix(e.degree).mul_vec(&e.coords).expect("element length");
        Element { degree: e.degree + 1, coords }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Element {
        let n = x.degree + y.degree;
        let coords = match self {
            Cdga::Free(a) => {
                if n > a.cap {
                    Vec::new()
                } else {
                    let t = mul_terms(&a.terms(x), &a.terms(y), &a.generators, a.cap);
                    a.element_from_terms(n, &t).expect("homogeneous").coords
                }
            }
            Cdga::Finite(a) => a.mul_raw(x.degree, &x.coords, y.degree, &y.coords),
        };
        Element { degree: n, coords }
    }

    pub fn unit(&self) -> Element {
        match self {
            Cdga::Free(_) => Element { degree: 0, coords: vec![Rational::one()] },
            Cdga::Finite(a) => Element { degree: 0, coords: a.unit.clone() },
        }
    }

    pub fn as_free(&self) -> Option<&FreeCdga> {
        match self {
            Cdga::Free(a) => Some(a),
            Cdga::Finite(_) => None,
        }
    }

    /// Looks up a generator (free) or basis label (finite) by name.
    pub fn named_element(&self, name: &str) -> Option<Element> {
        match self {
            Cdga::Free(a) => a.generator_index(name).map(|i| a.generator_element(i)),
            Cdga::Finite(a) => a.label_position(name).map(|(n, i)| Element {
                degree: n,
                coords: crate::exactla::unit_vec(a.labels[n].len(), i),
            }),
        }
    }

    /// Basis of cocycles in degree `n`.
    pub fn cocycles(&self, n: usize) -> Vec<Vec<Rational>> {
        crate::exactla::kernel_basis(&self.d_matrix(n))
    }

    /// Betti number in degree `n`.
    pub fn betti(&self, n: usize) -> usize {
        let z = self.cocycles(n).len();
        let b = if n == 0 { 0 } else { self.d_matrix(n - 1).rank() };
        z - b
    }

    /// Connected with vanishing first cohomology.
    pub fn is_simply_connected(&self) -> bool {
        self.betti(0) == 1 && (self.cap() < 1 || self.betti(1) == 0)
    }
}

/// Morphism of CDGAs given degreewise by matrices. When the domain is free
/// the images of the generators are also kept.
#[derive(Clone, Debug)]
pub struct CdgaMorphism {
    pub domain: Arc<Cdga>,
    pub codomain: Arc<Cdga>,
    matrices: Vec<QMatrix>,
    generator_images: Option<Vec<Element>>,
}

impl CdgaMorphism {
    /// Extends generator images multiplicatively from a free domain, then
    /// checks compatibility with the differentials.
    pub fn from_generator_images(domain: Arc<Cdga>, codomain: Arc<Cdga>, images: Vec<Element>) -> Result<Self> {
        let f = Self::from_generator_images_unchecked(domain, codomain, images)?;
        f.check_chain_map()?;
        Ok(f)
    }

    pub fn from_generator_images_unchecked(domain: Arc<Cdga>, codomain: Arc<Cdga>, images: Vec<Element>) -> Result<Self> {
        let free = domain.as_free().ok_or_else(|| Error::Validation("generator images need a free domain".into()))?;
        if domain.cap() != codomain.cap() {
            return dim_err("morphism between algebras with different degree caps");
        }
        if images.len() != free.generators.len() {
            return dim_err("one image per generator is required");
        }
        for (g, im) in free.generators.iter().zip(&images) {
            if im.degree != g.degree || im.coords.len() != codomain.dim(g.degree) {
                return dim_err(format!("image of {} has the wrong degree or length", g.name));
            }
        }
        let cap = domain.cap();
        let mut cache: HashMap<Monomial, Element> = HashMap::new();
        cache.insert(Monomial::one(), codomain.unit());
        let mut matrices = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut m = QMatrix::zeros(codomain.dim(n), domain.dim(n));
            for (j, mono) in free.bases[n].iter().enumerate() {
                let v = monomial_image(mono, &images, &codomain, &mut cache);
                for (i, x) in v.coords.iter().enumerate() {
                    m.set(i, j, x.clone());
                }
            }
            matrices.push(m);
        }
        Ok(CdgaMorphism { domain, codomain, matrices, generator_images: Some(images) })
    }

    /// Morphism out of a finite algebra, given by its degreewise matrices.
    pub fn from_matrices(domain: Arc<Cdga>, codomain: Arc<Cdga>, matrices: Vec<QMatrix>) -> Result<Self> {
        if domain.cap() != codomain.cap() {
            return dim_err("morphism between algebras with different degree caps");
        }
        let cap = domain.cap();
        if matrices.len() != cap + 1 {
            return dim_err("one matrix per degree is required");
        }
        for (n, m) in matrices.iter().enumerate() {
            if m.rows() != codomain.dim(n) || m.cols() != domain.dim(n) {
                return dim_err(format!("matrix in degree {n} has the wrong shape"));
            }
        }
        let generator_images = domain.as_free().map(|free| {
            (0..free.generators.len())
                .map(|i| {
                    let g = free.generator_element(i);
                    Element { degree: g.degree, coords: matrices[g.degree].mul_vec(&g.coords).expect("shape") }
                })
                .collect()
        });
        let f = CdgaMorphism { domain, codomain, matrices, generator_images };
        f.check_chain_map()?;
        f.check_multiplicative()?;
        Ok(f)
    }

    pub fn identity(a: Arc<Cdga>) -> Self {
        let matrices = (0..=a.cap()).map(|n| QMatrix::identity(a.dim(n))).collect();
        let generator_images =
            a.as_free().map(|f| (0..f.generators.len()).map(|i| f.generator_element(i)).collect());
        CdgaMorphism { domain: a.clone(), codomain: a, matrices, generator_images }
    }

    /// The unit map from the ground field.
    pub fn unit_map(ground: Arc<Cdga>, codomain: Arc<Cdga>) -> Result<Self> {
        Self::from_generator_images(ground, codomain, Vec::new())
    }

    pub fn matrix(&self, n: usize) -> QMatrix {
        if n > self.domain.cap() {
            QMatrix::zeros(0, 0)
        } else {
            self.matrices[n].clone()
        }
    }

    pub fn generator_images(&self) -> Option<&[Element]> {
        self.generator_images.as_deref()
    }

    pub fn apply(&self, e: &Element) -> Element {
        Element { degree: e.degree, coords: self.matrix(e.degree).mul_vec(&e.coords).expect("element length") }
    }

    /// `other ∘ self`
    pub fn then(&self, other: &CdgaMorphism) -> Result<CdgaMorphism> {
        if !Arc::ptr_eq(&self.codomain, &other.domain) && *self.codomain != *other.domain {
            return dim_err("composing morphisms that do not match");
        }
        let matrices =
            (0..=self.domain.cap()).map(|n| other.matrices[n].mul(&self.matrices[n])).collect::<Result<Vec<_>>>()?;
        let generator_images =
            self.generator_images.as_ref().map(|imgs| imgs.iter().map(|e| other.apply(e)).collect());
        Ok(CdgaMorphism { domain: self.domain.clone(), codomain: other.codomain.clone(), matrices, generator_images })
    }

    pub fn check_chain_map(&self) -> Result<()> {
        for n in 0..self.domain.cap() {
            let lhs = self.codomain.d_matrix(n).mul(&self.matrices[n])?;
            let rhs = self.matrices[n + 1].mul(&self.domain.d_matrix(n))?;
            if lhs != rhs {
                return Err(Error::Validation(format!("morphism does not commute with d in degree {n}")));
            }
        }
        Ok(())
    }

    fn check_multiplicative(&self) -> Result<()> {
        let cap = self.domain.cap();
        if self.apply(&self.domain.unit()) != self.codomain.unit() {
            return Err(Error::Validation("morphism is not unital".into()));
        }
        for p in 0..=cap {
            for qd in 0..=cap - p {
                for i in 0..self.domain.dim(p) {
                    for j in 0..self.domain.dim(qd) {
                        let a = Element { degree: p, coords: crate::exactla::unit_vec(self.domain.dim(p), i) };
                        let b = Element { degree: qd, coords: crate::exactla::unit_vec(self.domain.dim(qd), j) };
                        let lhs = self.apply(&self.domain.multiply(&a, &b));
                        let rhs = self.codomain.multiply(&self.apply(&a), &self.apply(&b));
                        if lhs != rhs {
                            return Err(Error::Validation("morphism is not multiplicative".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn same_as(&self, other: &CdgaMorphism) -> bool {
        self.matrices == other.matrices
    }
}

fn monomial_image(mono: &Monomial, images: &[Element], codomain: &Cdga, cache: &mut HashMap<Monomial, Element>) -> Element {
    if let Some(v) = cache.get(mono) {
        return v.clone();
    }
    let mut prefix = mono.0.clone();
    let last = prefix.last_mut().expect("nonempty monomial");
    let g = last.0;
    last.1 -= 1;
    if last.1 == 0 {
        prefix.pop();
    }
    let head = monomial_image(&Monomial(prefix), images, codomain, cache);
    let v = codomain.multiply(&head, &images[g]);
    cache.insert(mono.clone(), v.clone());
    v
}
