//! Path objects `B ⊗ Λ(t, dt)`, homotopies between CDGA morphisms, integration
//! along the interval, mapping cones and the maps between cones induced by
//! homotopy-commutative squares.

use crate::cdga::{Cdga, CdgaMorphism, Element, Monomial};
use crate::error::{dim_err, invariant, Error, Result};
use crate::exactla::{axpy, is_zero_vec, q, qf, zero_vec, QMatrix, Rational};
use crate::pcomplex::PersistentComplex;
use crate::persistence::Grid;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

/// Element `sum_k b_k ⊗ t^k + sum_k c_k ⊗ t^k dt` of total degree `degree`,
/// with `b_k` in `B^degree` and `c_k` in `B^(degree-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalElement {
    pub degree: usize,
    pub poly: Vec<Vec<Rational>>,
    pub dt: Vec<Vec<Rational>>,
}

fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

impl IntervalElement {
    pub fn zero(degree: usize) -> Self {
        IntervalElement { degree, poly: Vec::new(), dt: Vec::new() }
    }

    /// `b ⊗ 1`
    pub fn constant(b: &Element) -> Self {
        IntervalElement { degree: b.degree, poly: vec![b.coords.clone()], dt: Vec::new() }
    }

    /// `b ⊗ t^k`
    pub fn monomial(b: &Element, k: usize) -> Self {
        let mut poly = vec![zero_vec(b.coords.len()); k + 1];
        poly[k] = b.coords.clone();
        IntervalElement { degree: b.degree, poly, dt: Vec::new() }
    }

    fn trim(mut self) -> Self {
        while self.poly.last().is_some_and(|v| is_zero_vec(v)) {
            self.poly.pop();
        }
        while self.dt.last().is_some_and(|v| is_zero_vec(v)) {
            self.dt.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|v| is_zero_vec(v)) && self.dt.iter().all(|v| is_zero_vec(v))
    }

    pub fn add(&self, other: &IntervalElement, b: &Cdga) -> Result<IntervalElement> {
        self.axpy(&Rational::one(), other, b)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: &Rational, other: &IntervalElement, b: &Cdga) -> Result<IntervalElement> {
        if self.degree != other.degree {
            return dim_err("sum of interval elements of different degrees");
        }
        let n = self.degree;
        let mut poly = vec![zero_vec(b.dim(n)); self.poly.len().max(other.poly.len())];
        for (k, v) in self.poly.iter().enumerate() {
            axpy(&mut poly[k], &Rational::one(), v);
        }
        for (k, v) in other.poly.iter().enumerate() {
            axpy(&mut poly[k], c, v);
        }
        let dn = if n == 0 { 0 } else { b.dim(n - 1) };
        let mut dt = vec![zero_vec(dn); self.dt.len().max(other.dt.len())];
        for (k, v) in self.dt.iter().enumerate() {
            axpy(&mut dt[k], &Rational::one(), v);
        }
        for (k, v) in other.dt.iter().enumerate() {
            axpy(&mut dt[k], c, v);
        }
        Ok(IntervalElement { degree: n, poly, dt }.trim())
    }

    pub fn scale(&self, c: &Rational) -> IntervalElement {
        IntervalElement {
            degree: self.degree,
            poly: self.poly.iter().map(|v| crate::exactla::scale_vec(c, v)).collect(),
            dt: self.dt.iter().map(|v| crate::exactla::scale_vec(c, v)).collect(),
        }
        .trim()
    }

    /// Product with `(b ⊗ ω)(b' ⊗ ω') = (-1)^{|ω||b'|} bb' ⊗ ωω'`.
    pub fn mul(&self, other: &IntervalElement, b: &Cdga) -> IntervalElement {
        let (p, qd) = (self.degree, other.degree);
        let n = p + qd;
        let dim_n = b.dim(n);
        let dim_n1 = if n == 0 { 0 } else { b.dim(n - 1) };
        let mut poly = vec![zero_vec(dim_n); (self.poly.len() + other.poly.len()).saturating_sub(1)];
        let mut dt = vec![zero_vec(dim_n1); (self.poly.len() + other.dt.len()).max(self.dt.len() + other.poly.len())];
        let el = |d: usize, v: &Vec<Rational>| Element { degree: d, coords: v.clone() };
        for (i, x) in self.poly.iter().enumerate() {
            if is_zero_vec(x) {
                continue;
            }
            for (j, y) in other.poly.iter().enumerate() {
                if is_zero_vec(y) {
                    continue;
                }
                let z = b.multiply(&el(p, x), &el(qd, y));
                axpy(&mut poly[i + j], &Rational::one(), &z.coords);
            }
            if qd >= 1 {
                for (j, y) in other.dt.iter().enumerate() {
                    if is_zero_vec(y) {
                        continue;
                    }
                    let z = b.multiply(&el(p, x), &el(qd - 1, y));
                    axpy(&mut dt[i + j], &Rational::one(), &z.coords);
                }
            }
        }
        if p >= 1 {
            // (c ⊗ t^i dt)(b' ⊗ t^j) = (-1)^{|b'|} c b' ⊗ t^{i+j} dt
            let s = sign(qd % 2 == 1);
            for (i, x) in self.dt.iter().enumerate() {
                if is_zero_vec(x) {
                    continue;
                }
                for (j, y) in other.poly.iter().enumerate() {
                    if is_zero_vec(y) {
                        continue;
                    }
                    let z = b.multiply(&el(p - 1, x), &el(qd, y));
                    axpy(&mut dt[i + j], &s, &z.coords);
                }
            }
        }
        IntervalElement { degree: n, poly, dt }.trim()
    }

    /// `d(b ⊗ ω) = db ⊗ ω + (-1)^{|b|} b ⊗ dω`
    pub fn d(&self, b: &Cdga) -> IntervalElement {
        let n = self.degree;
        let dm = b.d_matrix(n);
        let poly: Vec<Vec<Rational>> = self.poly.iter().map(|v| dm.mul_vec(v).expect("shape")).collect();
        let mut dt = vec![zero_vec(b.dim(n)); self.dt.len().max(self.poly.len().saturating_sub(1))];
        if n >= 1 {
            let dm1 = b.d_matrix(n - 1);
            for (k, v) in self.dt.iter().enumerate() {
                dt[k] = dm1.mul_vec(v).expect("shape");
            }
        }
        let s = sign(n % 2 == 1);
        for (k, v) in self.poly.iter().enumerate().skip(1) {
            axpy(&mut dt[k - 1], &(&s * q(k as i64)), v);
        }
        IntervalElement { degree: n + 1, poly, dt }.trim()
    }

    /// Evaluation at `t = 0`.
    pub fn eval0(&self, b: &Cdga) -> Element {
        Element { degree: self.degree, coords: self.poly.first().cloned().unwrap_or_else(|| zero_vec(b.dim(self.degree))) }
    }

    /// Evaluation at `t = 1`.
    pub fn eval1(&self, b: &Cdga) -> Element {
        let mut out = zero_vec(b.dim(self.degree));
        for v in &self.poly {
            axpy(&mut out, &Rational::one(), v);
        }
        Element { degree: self.degree, coords: out }
    }

    /// `∫_0^t`, with `∫(c ⊗ t^k dt) = (-1)^{|c|} c ⊗ t^{k+1}/(k+1)` and the
    /// polynomial part sent to zero.
    pub fn integrate_0t(&self, b: &Cdga) -> IntervalElement {
        let n = self.degree;
        if n == 0 {
            return IntervalElement::zero(0);
        }
        let s = sign((n - 1) % 2 == 1);
        let mut poly = vec![zero_vec(b.dim(n - 1)); self.dt.len() + 1];
        for (k, v) in self.dt.iter().enumerate() {
            poly[k + 1] = crate::exactla::scale_vec(&(&s * qf(1, k as i64 + 1)), v);
        }
        IntervalElement { degree: n - 1, poly, dt: Vec::new() }.trim()
    }

    /// `∫_0^1`, an element of `B` of one degree less.
    pub fn integrate_01(&self, b: &Cdga) -> Element {
        if self.degree == 0 {
            return Element { degree: 0, coords: zero_vec(b.dim(0)) };
        }
        self.integrate_0t(b).eval1(b)
    }

    /// Image under `f ⊗ id` for a morphism `f: B -> B'`.
    pub fn map(&self, f: &CdgaMorphism) -> IntervalElement {
        let n = self.degree;
        let fm = f.matrix(n);
        let poly = self.poly.iter().map(|v| fm.mul_vec(v).expect("shape")).collect();
        let dt = if n == 0 {
            Vec::new()
        } else {
            let fm1 = f.matrix(n - 1);
            self.dt.iter().map(|v| fm1.mul_vec(v).expect("shape")).collect()
        };
        IntervalElement { degree: n, poly, dt }.trim()
    }
}

/// Checks the integration sign convention on `Λ(a)` with `|a| = 2` by testing
/// `d∫_0^t + ∫_0^t d = id - ε_0` on a spanning set of elements.
pub fn integration_sign_self_test() -> bool {
    static RESULT: OnceLock<bool> = OnceLock::new();
    *RESULT.get_or_init(|| {
        let gens = vec![crate::cdga::Generator { name: "a".into(), degree: 2 }];
        let alg = match crate::cdga::FreeCdga::new(gens, vec![Default::default()], 5) {
            Ok(a) => Cdga::Free(a),
            Err(_) => return false,
        };
        for n in 0..=4 {
            for i in 0..alg.dim(n) {
                let b = Element { degree: n, coords: crate::exactla::unit_vec(alg.dim(n), i) };
                for k in 0..3 {
                    let mut candidates = vec![IntervalElement::monomial(&b, k)];
                    let mut dte = IntervalElement::zero(n + 1);
                    dte.dt = vec![zero_vec(alg.dim(n)); k + 1];
                    dte.dt[k] = b.coords.clone();
                    candidates.push(dte);
                    for x in candidates {
                        // in degree zero the integral lands in degree -1 and vanishes
                        let first = if x.degree == 0 {
                            IntervalElement::zero(0)
                        } else {
                            x.integrate_0t(&alg).d(&alg)
                        };
                        let lhs = first.add(&x.d(&alg).integrate_0t(&alg), &alg).expect("degrees");
                        let e0 = IntervalElement::constant(&x.eval0(&alg));
                        let rhs = x.axpy(&-Rational::one(), &e0, &alg).expect("degrees");
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    })
}

/// Algebra map `M -> B ⊗ Λ(t, dt)` out of a free algebra, given on generators.
#[derive(Clone, Debug)]
pub struct CdgaHomotopy {
    pub domain: Arc<Cdga>,
    pub codomain: Arc<Cdga>,
    pub values: Vec<IntervalElement>,
    cache: OnceLock<Vec<Vec<IntervalElement>>>,
}

impl CdgaHomotopy {
    pub fn new(domain: Arc<Cdga>, codomain: Arc<Cdga>, values: Vec<IntervalElement>) -> Result<Self> {
        if !integration_sign_self_test() {
            return invariant("integration sign convention self-test failed");
        }
        let free = domain.as_free().ok_or_else(|| Error::Validation("homotopies need a free domain".into()))?;
        if domain.cap() != codomain.cap() {
            return dim_err("homotopy between algebras with different degree caps");
        }
        if values.len() != free.generators().len() {
            return dim_err("one value per generator is required");
        }
        for (g, v) in free.generators().iter().zip(&values) {
            if v.degree != g.degree {
                return dim_err(format!("homotopy value on {} has the wrong degree", g.name));
            }
        }
        Ok(CdgaHomotopy { domain, codomain, values, cache: OnceLock::new() })
    }

    /// Homotopy that is constant at `f`.
    pub fn constant(f: &CdgaMorphism) -> Result<Self> {
        let imgs = f.generator_images().ok_or_else(|| Error::Validation("constant homotopy needs a free domain".into()))?;
        let values = imgs.iter().map(IntervalElement::constant).collect();
        Self::new(f.domain.clone(), f.codomain.clone(), values)
    }

    fn table(&self) -> &Vec<Vec<IntervalElement>> {
        self.cache.get_or_init(|| {
            let free = self.domain.as_free().expect("checked");
            let b = &*self.codomain;
            let mut memo: HashMap<Monomial, IntervalElement> = HashMap::new();
            memo.insert(Monomial::one(), IntervalElement::constant(&b.unit()));
            (0..=self.domain.cap())
                .map(|n| free.basis(n).iter().map(|m| self.monomial_value(m, &mut memo)).collect())
                .collect()
        })
    }

    fn monomial_value(&self, m: &Monomial, memo: &mut HashMap<Monomial, IntervalElement>) -> IntervalElement {
        if let Some(v) = memo.get(m) {
            return v.clone();
        }
        let mut prefix = m.0.clone();
        let last = prefix.last_mut().expect("nonempty");
        let g = last.0;
        last.1 -= 1;
        if last.1 == 0 {
            prefix.pop();
        }
        let head = self.monomial_value(&Monomial(prefix), memo);
        let v = head.mul(&self.values[g], &self.codomain);
        memo.insert(m.clone(), v.clone());
        v
    }

    /// Value on an arbitrary homogeneous element.
    pub fn apply(&self, e: &Element) -> IntervalElement {
        let t = self.table();
        let mut out = IntervalElement::zero(e.degree);
        if e.degree > self.domain.cap() {
            return out;
        }
        for (c, v) in e.coords.iter().zip(&t[e.degree]) {
            if !c.is_zero() {
                out = out.axpy(c, v, &self.codomain).expect("degrees");
            }
        }
        out
    }

    fn endpoint(&self, one: bool) -> Result<CdgaMorphism> {
        let b = &*self.codomain;
        let imgs = self.values.iter().map(|v| if one { v.eval1(b) } else { v.eval0(b) }).collect();
        CdgaMorphism::from_generator_images(self.domain.clone(), self.codomain.clone(), imgs)
    }

    /// `(ε_0 H, ε_1 H)`
    pub fn endpoints(&self) -> Result<(CdgaMorphism, CdgaMorphism)> {
        Ok((self.endpoint(false)?, self.endpoint(true)?))
    }

    /// Matrix of `∫_0^1 H` from degree `n` of the domain to degree `n - 1` of the codomain.
    pub fn integral_matrix(&self, n: usize) -> QMatrix {
        let rows = if n == 0 { 0 } else { self.codomain.dim(n - 1) };
        let dom = self.domain.dim(n);
        let mut m = QMatrix::zeros(rows, dom);
        if n == 0 || n > self.domain.cap() {
            return m;
        }
        for (j, v) in self.table()[n].iter().enumerate() {
            let x = v.integrate_01(&self.codomain);
            for (i, c) in x.coords.into_iter().enumerate() {
                m.set(i, j, c);
            }
        }
        m
    }

    /// Checks that `H` commutes with differentials and that
    /// `d∫_0^1 H + ∫_0^1 H d = g - f` on every basis element of degree below
    /// the cap, where `f` and `g` are the claimed endpoints.
    pub fn check_identity(&self, f: &CdgaMorphism, g: &CdgaMorphism) -> Result<()> {
        let (e0, e1) = self.endpoints_unchecked();
        if !e0.same_as(f) {
            return Err(Error::Validation("homotopy does not start at the claimed morphism".into()));
        }
        if !e1.same_as(g) {
            return Err(Error::Validation("homotopy does not end at the claimed morphism".into()));
        }
        let b = &*self.codomain;
        let free = self.domain.as_free().expect("checked");
        for (i, v) in self.values.iter().enumerate() {
            let dgen = free.differential_of_generator(i);
            if dgen.degree <= self.domain.cap() && v.d(b) != self.apply(&dgen) {
                return Err(Error::Validation(format!(
                    "homotopy does not commute with d on generator {}",
                    free.generators()[i].name
                )));
            }
        }
        for n in 1..self.domain.cap() {
            let lhs = b
                .d_matrix(n - 1)
                .mul(&self.integral_matrix(n))?
                .add(&self.integral_matrix(n + 1).mul(&self.domain.d_matrix(n))?)?;
            let rhs = g.matrix(n).sub(&f.matrix(n))?;
            if lhs != rhs {
                return Err(Error::Validation(format!("integration identity fails in degree {n}")));
            }
        }
        // degree zero: only the unit, on which both maps agree
        if g.matrix(0) != f.matrix(0) {
            return Err(Error::Validation("endpoints differ in degree zero".into()));
        }
        Ok(())
    }

    fn endpoints_unchecked(&self) -> (CdgaMorphism, CdgaMorphism) {
        let b = &*self.codomain;
        let mk = |one: bool| {
            let imgs = self.values.iter().map(|v| if one { v.eval1(b) } else { v.eval0(b) }).collect();
            CdgaMorphism::from_generator_images_unchecked(self.domain.clone(), self.codomain.clone(), imgs)
                .expect("degrees checked at construction")
        };
        (mk(false), mk(true))
    }
}

/// Mapping cone of `f: A -> B`: `C^n = A^{n+1} ⊕ B^n` with
/// `d(a, b) = (da, f(a) - db)`. Returned as a one-stage complex whose stored
/// degree `j` is cone degree `j - 1`, covering cone degrees `-1..cap`.
pub fn cone(f: &CdgaMorphism) -> PersistentComplex {
    let grid = Grid::range(1);
    let (dims, diffs) = cone_stage(f);
    let cap = f.domain.cap();
    PersistentComplex { grid, max_degree: cap, dims: vec![dims], diffs: vec![diffs], structure: Vec::new() }
}

/// Dimensions and differentials of the cone, in stored degrees `0..=cap`.
pub fn cone_stage(f: &CdgaMorphism) -> (Vec<usize>, Vec<QMatrix>) {
    let (a, b) = (&*f.domain, &*f.codomain);
    let cap = a.cap();
    let bdim = |j: usize| if j == 0 { 0 } else { b.dim(j - 1) };
    let dims: Vec<usize> = (0..=cap).map(|j| a.dim(j) + bdim(j)).collect();
    let neg = -Rational::one();
    let diffs = (0..=cap)
        .map(|j| {
            let rows_a = if j < cap { a.dim(j + 1) } else { 0 };
            let rows_b = if j < cap { b.dim(j) } else { 0 };
            let da = if j < cap { a.d_matrix(j) } else { QMatrix::zeros(0, a.dim(j)) };
            let fa = if j < cap { f.matrix(j) } else { QMatrix::zeros(0, a.dim(j)) };
            let db = if j == 0 {
                QMatrix::zeros(rows_b, 0)
            } else if j < cap {
                b.d_matrix(j - 1).scale(&neg)
            } else {
                QMatrix::zeros(0, bdim(j))
            };
            QMatrix::block(&da, &QMatrix::zeros(rows_a, bdim(j)), &fa, &db).expect("block shapes")
        })
        .collect();
    (dims, diffs)
}

/// Square of CDGA morphisms commuting up to a homotopy:
///
/// ```text
///   M --top--> M'
///   |          |
///  left      right
///   v          v
///   A --bot--> A'
/// ```
///
/// with `homotopy` from `bottom ∘ left` to `right ∘ top`.
#[derive(Clone, Debug)]
pub struct HomotopySquare {
    pub top: CdgaMorphism,
    pub left: CdgaMorphism,
    pub right: CdgaMorphism,
    pub bottom: CdgaMorphism,
    pub homotopy: CdgaHomotopy,
}

impl HomotopySquare {
    pub fn validate(&self) -> Result<()> {
        let f = self.left.then(&self.bottom)?;
        let g = self.top.then(&self.right)?;
        self.homotopy.check_identity(&f, &g)
    }
}

/// Matrices of the induced cone map `(a, b) -> (top(a), bottom(b) + ∫_0^1 H(a))`
/// in stored (shifted) degrees `0..=cap`.
pub fn cone_map(sq: &HomotopySquare) -> Vec<QMatrix> {
    let cap = sq.top.domain.cap();
    let (b, b2) = (&*sq.left.codomain, &*sq.right.codomain);
    (0..=cap)
        .map(|j| {
            let (bdim, b2dim) = if j == 0 { (0, 0) } else { (b.dim(j - 1), b2.dim(j - 1)) };
            let v = if j == 0 { QMatrix::zeros(b2dim, 0) } else { sq.bottom.matrix(j - 1) };
            QMatrix::block(
                &sq.top.matrix(j),
                &QMatrix::zeros(sq.top.codomain.dim(j), bdim),
                &sq.homotopy.integral_matrix(j),
                &v,
            )
            .expect("block shapes")
        })
        .collect()
}

/// The map `B -> C_f`, `b -> (0, -b)`, in stored degree `j` (from `B^{j-1}`).
pub fn cone_inclusion(f: &CdgaMorphism, j: usize) -> QMatrix {
    let (a, b) = (&*f.domain, &*f.codomain);
    if j == 0 {
        return QMatrix::zeros(a.dim(0), 0);
    }
    let n = b.dim(j - 1);
    QMatrix::zeros(a.dim(j), n).vstack(&QMatrix::identity(n).scale(&-Rational::one())).expect("shapes")
}

/// The map `C_f -> A[1]`, `(a, b) -> a`, in stored degree `j` (onto `A^j`).
pub fn cone_projection(f: &CdgaMorphism, j: usize) -> QMatrix {
    let (a, b) = (&*f.domain, &*f.codomain);
    let bdim = if j == 0 { 0 } else { b.dim(j - 1) };
    QMatrix::identity(a.dim(j)).hstack(&QMatrix::zeros(a.dim(j), bdim)).expect("shapes")
}

/// Splits a cone vector in stored degree `j` into its `(A^j, B^{j-1})` parts.
pub fn split_cone_vector(f: &CdgaMorphism, j: usize, v: &[Rational]) -> (Element, Element) {
    let na = f.domain.dim(j);
    let x = Element { degree: j, coords: v[..na].to_vec() };
    let y = Element { degree: j.saturating_sub(1), coords: v[na..].to_vec() };
    (x, y)
}

pub fn join_cone_vector(a: &Element, b: &Element) -> Vec<Rational> {
    let mut v = a.coords.clone();
    v.extend(b.coords.iter().cloned());
    v
}
