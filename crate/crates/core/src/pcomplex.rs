//! Tame persistent cochain complexes over a grid: cohomology, interval
//! spheres and disks, cell attachment, and the lifting-property predicates of
//! the projective model structure.
//!
//! Complexes are concentrated in degrees `0..=max_degree` and are zero above.

use crate::error::{dim_err, invariant, Error, Result};
use crate::exactla::{
    extend_basis, is_zero_vec, kernel_basis, solve, unit_vec, zero_vec, Echelon, QMatrix, Rational,
};
use crate::persistence::{Decomposition, Grid, PersistenceModule};
use num_traits::One;

#[derive(Clone, Debug, PartialEq)]
pub struct PersistentComplex {
    pub grid: Grid,
    pub max_degree: usize,
    /// `dims[r][k]`
    pub dims: Vec<Vec<usize>>,
    /// `diffs[r][k]`: degree `k` to `k + 1`, shape `dims[r][k+1] x dims[r][k]`;
    /// the last one maps into the zero space.
    pub diffs: Vec<Vec<QMatrix>>,
    /// `structure[r][k]`: stage `r` to `r + 1` in degree `k`.
    pub structure: Vec<Vec<QMatrix>>,
}

impl PersistentComplex {
    pub fn new(
        grid: Grid,
        max_degree: usize,
        dims: Vec<Vec<usize>>,
        diffs: Vec<Vec<QMatrix>>,
        structure: Vec<Vec<QMatrix>>,
    ) -> Result<Self> {
        let c = PersistentComplex { grid, max_degree, dims, diffs, structure };
        c.validate()?;
        Ok(c)
    }

    pub fn zero(grid: &Grid, max_degree: usize) -> Self {
        let n = grid.len();
        let k = max_degree + 1;
        PersistentComplex {
            grid: grid.clone(),
            max_degree,
            dims: vec![vec![0; k]; n],
            diffs: vec![vec![QMatrix::zeros(0, 0); k]; n],
            structure: vec![vec![QMatrix::zeros(0, 0); k]; n - 1],
        }
    }

    pub fn stages(&self) -> usize {
        self.grid.len()
    }

    /// Dimension in degree `k` at stage `r`, zero outside the stored range.
    pub fn dim(&self, r: usize, k: usize) -> usize {
        if k > self.max_degree {
            0
        } else {
            self.dims[r][k]
        }
    }

    /// Differential out of degree `k`, as a matrix into degree `k + 1`.
    pub fn d(&self, r: usize, k: usize) -> QMatrix {
        if k > self.max_degree {
            QMatrix::zeros(0, 0)
        } else {
            self.diffs[r][k].clone()
        }
    }

    pub fn sigma(&self, r: usize, k: usize) -> QMatrix {
        if k > self.max_degree {
            QMatrix::zeros(0, 0)
        } else {
            self.structure[r][k].clone()
        }
    }

    /// Composite structure map from stage `i` to stage `j >= i`.
    pub fn sigma_between(&self, i: usize, j: usize, k: usize) -> QMatrix {
        let mut m = QMatrix::identity(self.dim(i, k));
        for r in i..j {
            m = self.sigma(r, k).mul(&m).expect("validated shapes");
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        let nk = self.max_degree + 1;
        if self.dims.len() != n || self.diffs.len() != n || self.structure.len() + 1 != n {
            return dim_err("complex stage count does not match grid");
        }
        for r in 0..n {
            if self.dims[r].len() != nk || self.diffs[r].len() != nk {
                return dim_err(format!("stage {r} does not cover degrees 0..={}", self.max_degree));
            }
            for k in 0..nk {
                let d = &self.diffs[r][k];
                if d.rows() != self.dim(r, k + 1) || d.cols() != self.dims[r][k] {
                    return dim_err(format!("differential at stage {r}, degree {k} has wrong shape"));
                }
                if k + 1 < nk && !self.diffs[r][k + 1].mul(d)?.is_zero() {
                    return Err(Error::Validation(format!("d∘d ≠ 0 at stage {r}, degree {k}")));
                }
            }
        }
        for r in 0..n - 1 {
            if self.structure[r].len() != nk {
                return dim_err(format!("structure map {r} does not cover all degrees"));
            }
            for k in 0..nk {
                let s = &self.structure[r][k];
                if s.rows() != self.dims[r + 1][k] || s.cols() != self.dims[r][k] {
                    return dim_err(format!("structure map {r} in degree {k} has wrong shape"));
                }
                if k + 1 < nk {
                    let lhs = self.diffs[r + 1][k].mul(s)?;
                    let rhs = self.structure[r][k + 1].mul(&self.diffs[r][k])?;
                    if lhs != rhs {
                        return Err(Error::Validation(format!(
                            "structure map {r} does not commute with d in degree {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Cocycle basis `Z^k(r)`.
    pub fn cocycles(&self, r: usize, k: usize) -> Vec<Vec<Rational>> {
        kernel_basis(&self.d(r, k))
    }

    /// Spanning set of coboundaries `B^k(r)`.
    pub fn coboundaries(&self, r: usize, k: usize) -> Vec<Vec<Rational>> {
        if k == 0 || k > self.max_degree {
            return Vec::new();
        }
        self.d(r, k - 1).columns()
    }

    /// Cohomology in degree `k` as a persistence module, together with the
    /// chosen cocycle representatives of the basis classes at each stage.
    pub fn cohomology(&self, k: usize) -> Cohomology {
        let n = self.stages();
        let mut reps = Vec::new();
        let mut bounds = Vec::new();
        for r in 0..n {
            let z = self.cocycles(r, k);
            let b = self.coboundaries(r, k);
            let dim = self.dim(r, k);
            let picked = extend_basis(&b, &z, dim);
            reps.push(picked.into_iter().map(|i| z[i].clone()).collect::<Vec<_>>());
            bounds.push(b);
        }
        let mut maps = Vec::new();
        for r in 0..n.saturating_sub(1) {
            let s = self.sigma(r, k);
            let mut m = QMatrix::zeros(reps[r + 1].len(), reps[r].len());
            for (j, z) in reps[r].iter().enumerate() {
                let w = s.mul_vec(z).expect("shape");
                let c = class_coordinates(&reps[r + 1], &bounds[r + 1], &w, self.dim(r + 1, k))
                    .expect("structure maps send cocycles to cocycles");
                for (i, x) in c.into_iter().enumerate() {
                    m.set(i, j, x);
                }
            }
            maps.push(m);
        }
        let dims = reps.iter().map(|r| r.len()).collect();
        Cohomology {
            module: PersistenceModule { grid: self.grid.clone(), dims, maps },
            representatives: reps,
            coboundaries: bounds,
            degree: k,
            truncated: k == self.max_degree,
        }
    }

    /// Degreewise direct sum.
    pub fn direct_sum(&self, other: &PersistentComplex) -> Result<PersistentComplex> {
        if self.grid != other.grid || self.max_degree != other.max_degree {
            return dim_err("direct sum of complexes over different grids or degree ranges");
        }
        let n = self.stages();
        let nk = self.max_degree + 1;
        let dims = (0..n).map(|r| (0..nk).map(|k| self.dims[r][k] + other.dims[r][k]).collect()).collect();
        let diffs = (0..n)
            .map(|r| (0..nk).map(|k| block_diag(&self.diffs[r][k], &other.diffs[r][k])).collect())
            .collect();
        let structure = (0..n - 1)
            .map(|r| (0..nk).map(|k| block_diag(&self.structure[r][k], &other.structure[r][k])).collect())
            .collect();
        PersistentComplex::new(self.grid.clone(), self.max_degree, dims, diffs, structure)
    }
}

pub fn block_diag(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let mut m = QMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            m.set(i, j, a.get(i, j).clone());
        }
    }
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            m.set(a.rows() + i, a.cols() + j, b.get(i, j).clone());
        }
    }
    m
}

/// Coordinates of the class of cocycle `w` over representatives `reps`
/// modulo the span of `bounds`.
pub fn class_coordinates(
    reps: &[Vec<Rational>],
    bounds: &[Vec<Rational>],
    w: &[Rational],
    dim: usize,
) -> Option<Vec<Rational>> {
    let mut cols = reps.to_vec();
    cols.extend(bounds.iter().cloned());
    let a = QMatrix::from_columns(&cols, dim);
    let x = solve(&a, w).ok()??;
    Some(x[..reps.len()].to_vec())
}

#[derive(Clone, Debug)]
pub struct Cohomology {
    pub module: PersistenceModule,
    pub representatives: Vec<Vec<Vec<Rational>>>,
    pub coboundaries: Vec<Vec<Vec<Rational>>>,
    pub degree: usize,
    /// Set in the top stored degree, where cocycles are computed against the
    /// truncation.
    pub truncated: bool,
}

impl Cohomology {
    /// Cocycle representing the class with coordinates `c` at stage `r`.
    pub fn lift(&self, r: usize, c: &[Rational], ambient: usize) -> Vec<Rational> {
        let mut out = zero_vec(ambient);
        for (x, z) in c.iter().zip(&self.representatives[r]) {
            crate::exactla::axpy(&mut out, x, z);
        }
        out
    }

    pub fn decompose(&self) -> Decomposition {
        self.module.decompose(self.degree)
    }
}

/// Interval sphere on `[s, t)` in degree `k`: the degree-`k` line on
/// `[s, inf)` together with the degree-`k - 1` line on `[t, inf)` mapped
/// onto it by the identity. With `k = 0` this is the interval module on `[s, t)`.
pub fn interval_sphere(grid: &Grid, max_degree: usize, k: usize, s: usize, t: Option<usize>) -> Result<PersistentComplex> {
    if k > max_degree {
        return dim_err("sphere degree above the stored range");
    }
    if let Some(t) = t {
        if t <= s || t >= grid.len() {
            return dim_err("interval sphere needs s < t within the grid");
        }
    }
    let n = grid.len();
    let mut c = PersistentComplex::zero(grid, max_degree);
    let top = |r: usize| -> bool {
        if k == 0 {
            r >= s && t.map_or(true, |t| r < t)
        } else {
            r >= s
        }
    };
    let low = |r: usize| -> bool { k > 0 && t.map_or(false, |t| r >= t) };
    for r in 0..n {
        c.dims[r][k] = usize::from(top(r));
        if k > 0 {
            c.dims[r][k - 1] = usize::from(low(r));
        }
    }
    fill_line_maps(&mut c);
    if k > 0 {
        for r in 0..n {
            if low(r) {
                c.diffs[r][k - 1].set(0, 0, Rational::one());
            }
        }
    }
    Ok(c)
}

/// Interval disk at `s` in degree `k >= 1`: the degree `k - 1` and `k` lines on
/// `[s, inf)` with the identity differential. The disk in degree zero is zero.
pub fn interval_disk(grid: &Grid, max_degree: usize, k: usize, s: usize) -> Result<PersistentComplex> {
    if k > max_degree {
        return dim_err("disk degree above the stored range");
    }
    let n = grid.len();
    let mut c = PersistentComplex::zero(grid, max_degree);
    if k == 0 {
        return Ok(c);
    }
    for r in s..n {
        c.dims[r][k] = 1;
        c.dims[r][k - 1] = 1;
    }
    fill_line_maps(&mut c);
    for r in s..n {
        c.diffs[r][k - 1].set(0, 0, Rational::one());
    }
    Ok(c)
}

/// Interval module `I_[s,t)` concentrated in degree `k`.
pub fn interval_module(grid: &Grid, max_degree: usize, k: usize, s: usize, t: Option<usize>) -> Result<PersistentComplex> {
    if k > max_degree {
        return dim_err("interval degree above the stored range");
    }
    let mut c = PersistentComplex::zero(grid, max_degree);
    for r in 0..grid.len() {
        c.dims[r][k] = usize::from(r >= s && t.map_or(true, |t| r < t));
    }
    fill_line_maps(&mut c);
    Ok(c)
}

/// Sets zero differentials and identity structure maps between stages where
/// a line (dimension at most one) is present on both sides.
fn fill_line_maps(c: &mut PersistentComplex) {
    let n = c.stages();
    let nk = c.max_degree + 1;
    for r in 0..n {
        for k in 0..nk {
            c.diffs[r][k] = QMatrix::zeros(c.dim(r, k + 1), c.dims[r][k]);
        }
    }
    for r in 0..n - 1 {
        for k in 0..nk {
            let mut m = QMatrix::zeros(c.dims[r + 1][k], c.dims[r][k]);
            if c.dims[r][k] == 1 && c.dims[r + 1][k] == 1 {
                m.set(0, 0, Rational::one());
            }
            c.structure[r][k] = m;
        }
    }
}

/// Data of a map from the interval sphere `S^k_[s,t)` into a complex: a cocycle
/// `x` in degree `k` at `s` and, for finite `t`, an element `y` of degree
/// `k - 1` at `t` with `d y` equal to the image of `x` at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMapData {
    pub degree: usize,
    pub s: usize,
    pub t: Option<usize>,
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
}

/// Basis of `Hom(S^k_[s,t), X)`, realised as the fibre product of `Z^k X(s)`
/// and `X^{k-1}(t)` over `Z^k X(t)`.
pub fn hom_from_sphere(x: &PersistentComplex, k: usize, s: usize, t: Option<usize>) -> Vec<SphereMapData> {
    let dx = x.dim(s, k);
    let Some(t) = t else {
        return x
            .cocycles(s, k)
            .into_iter()
            .map(|z| SphereMapData { degree: k, s, t: None, x: z, y: Vec::new() })
            .collect();
    };
    if k == 0 {
        // maps from I_[s,t): cocycles at s dying by t
        let sig = x.sigma_between(s, t, 0);
        let cons = x.d(s, 0).vstack(&sig).expect("shape");
        return kernel_basis(&cons)
            .into_iter()
            .map(|z| SphereMapData { degree: 0, s, t: Some(t), x: z, y: Vec::new() })
            .collect();
    }
    let dy = x.dim(t, k - 1);
    // constraints on (x, y): d x = 0 and sigma x - d y = 0
    let top = x.d(s, k).hstack(&QMatrix::zeros(x.dim(s, k + 1), dy)).expect("shape");
    let bottom = x.sigma_between(s, t, k).hstack(&x.d(t, k - 1).scale(&-Rational::one())).expect("shape");
    let cons = top.vstack(&bottom).expect("shape");
    kernel_basis(&cons)
        .into_iter()
        .map(|v| SphereMapData { degree: k, s, t: Some(t), x: v[..dx].to_vec(), y: v[dx..].to_vec() })
        .collect()
}

/// `Hom(D^k_s, X)` is `X^{k-1}(s)`; returns its dimension.
pub fn hom_from_disk(x: &PersistentComplex, k: usize, s: usize) -> usize {
    if k == 0 {
        0
    } else {
        x.dim(s, k - 1)
    }
}

/// Checks that sphere map data is well formed for the complex.
pub fn check_sphere_data(x: &PersistentComplex, data: &SphereMapData) -> Result<()> {
    let k = data.degree;
    if data.x.len() != x.dim(data.s, k) {
        return dim_err("sphere data cocycle has wrong length");
    }
    if !is_zero_vec(&x.d(data.s, k).mul_vec(&data.x)?) {
        return Err(Error::Validation("sphere data is not a cocycle".into()));
    }
    if let Some(t) = data.t {
        let pushed = x.sigma_between(data.s, t, k).mul_vec(&data.x)?;
        if k == 0 {
            if !is_zero_vec(&pushed) {
                return Err(Error::Validation("degree-zero sphere data survives past t".into()));
            }
        } else {
            if data.y.len() != x.dim(t, k - 1) {
                return dim_err("sphere data filler has wrong length");
            }
            if x.d(t, k - 1).mul_vec(&data.y)? != pushed {
                return Err(Error::Validation("sphere data filler does not bound the cocycle".into()));
            }
        }
    }
    Ok(())
}

/// Pushout of `X` along `S^k_[s,t) -> D^k_s`: a new basis element `g` of
/// degree `k - 1` present on `[s, t)`, with `d g` the image of `x`, and sent to
/// `y` by the structure map into stage `t`. The new element is appended last.
pub fn attach_cell(x: &PersistentComplex, data: &SphereMapData) -> Result<PersistentComplex> {
    let k = data.degree;
    if k == 0 {
        return dim_err("cannot attach a cell along a degree-zero sphere");
    }
    check_sphere_data(x, data)?;
    let c = k - 1;
    let n = x.stages();
    let alive = |r: usize| r >= data.s && data.t.map_or(true, |t| r < t);
    let mut out = x.clone();
    let mut pushed = data.x.clone();
    for r in 0..n {
        if !alive(r) {
            continue;
        }
        if r > data.s {
            pushed = x.sigma(r - 1, k).mul_vec(&pushed)?;
        }
        out.dims[r][c] += 1;
        // new column in the differential out of degree c
        let d = &x.diffs[r][c];
        let mut nd = QMatrix::zeros(d.rows(), d.cols() + 1);
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                nd.set(i, j, d.get(i, j).clone());
            }
            nd.set(i, d.cols(), pushed.get(i).cloned().unwrap_or_default());
        }
        out.diffs[r][c] = nd;
        // new row in the differential into degree c
        if c > 0 {
            let d = &x.diffs[r][c - 1];
            let mut nd = QMatrix::zeros(d.rows() + 1, d.cols());
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    nd.set(i, j, d.get(i, j).clone());
                }
            }
            out.diffs[r][c - 1] = nd;
        }
    }
    for r in 0..n - 1 {
        let (a, b) = (alive(r), alive(r + 1));
        if !a && !b {
            continue;
        }
        let s = &x.structure[r][c];
        let mut m = QMatrix::zeros(out.dims[r + 1][c], out.dims[r][c]);
        for i in 0..s.rows() {
            for j in 0..s.cols() {
                m.set(i, j, s.get(i, j).clone());
            }
        }
        if a && b {
            m.set(s.rows(), s.cols(), Rational::one());
        } else if a {
            for (i, v) in data.y.iter().enumerate() {
                m.set(i, s.cols(), v.clone());
            }
        }
        out.structure[r][c] = m;
    }
    out.validate()?;
    Ok(out)
}

/// Degreewise, stagewise map of persistent complexes.
#[derive(Clone, Debug)]
pub struct PComplexMap {
    pub source: PersistentComplex,
    pub target: PersistentComplex,
    /// `components[r][k]`
    pub components: Vec<Vec<QMatrix>>,
}

impl PComplexMap {
    pub fn new(source: PersistentComplex, target: PersistentComplex, components: Vec<Vec<QMatrix>>) -> Result<Self> {
        let f = PComplexMap { source, target, components };
        f.validate()?;
        Ok(f)
    }

    pub fn comp(&self, r: usize, k: usize) -> QMatrix {
        if k > self.source.max_degree {
            QMatrix::zeros(0, 0)
        } else {
            self.components[r][k].clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (x, y) = (&self.source, &self.target);
        if x.grid != y.grid || x.max_degree != y.max_degree {
            return dim_err("map between complexes over different grids or degree ranges");
        }
        let n = x.stages();
        let nk = x.max_degree + 1;
        if self.components.len() != n || self.components.iter().any(|c| c.len() != nk) {
            return dim_err("map components do not cover all stages and degrees");
        }
        for r in 0..n {
            for k in 0..nk {
                let f = &self.components[r][k];
                if f.rows() != y.dims[r][k] || f.cols() != x.dims[r][k] {
                    return dim_err(format!("map component at stage {r}, degree {k} has wrong shape"));
                }
                if k + 1 < nk && y.diffs[r][k].mul(f)? != self.components[r][k + 1].mul(&x.diffs[r][k])? {
                    return Err(Error::Validation(format!("map does not commute with d at stage {r}, degree {k}")));
                }
                if r + 1 < n && y.structure[r][k].mul(f)? != self.components[r + 1][k].mul(&x.structure[r][k])? {
                    return Err(Error::Validation(format!(
                        "map does not commute with structure maps at stage {r}, degree {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn compose(&self, after: &PComplexMap) -> Result<PComplexMap> {
        let comps = (0..self.source.stages())
            .map(|r| {
                (0..=self.source.max_degree)
                    .map(|k| after.components[r][k].mul(&self.components[r][k]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PComplexMap::new(self.source.clone(), after.target.clone(), comps)
    }

    /// Matrix of the induced map on degree-`k` cohomology at stage `r`, in the
    /// representative bases chosen by [`PersistentComplex::cohomology`].
    pub fn on_cohomology(&self, hx: &Cohomology, hy: &Cohomology, r: usize) -> QMatrix {
        let k = hx.degree;
        let f = self.comp(r, k);
        let mut m = QMatrix::zeros(hy.representatives[r].len(), hx.representatives[r].len());
        for (j, z) in hx.representatives[r].iter().enumerate() {
            let w = f.mul_vec(z).expect("shape");
            let c = class_coordinates(&hy.representatives[r], &hy.coboundaries[r], &w, self.target.dim(r, k))
                .expect("chain maps preserve cocycles");
            for (i, v) in c.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn is_injective(&self) -> bool {
        (0..self.source.stages())
            .all(|r| (0..=self.source.max_degree).all(|k| self.components[r][k].rank() == self.source.dims[r][k]))
    }
}

/// Failure of the fibration test at a given corner.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrationWitness {
    pub degree: usize,
    pub from: usize,
    pub to: usize,
    /// Element `(a, b)` of `X^k(to) x_{Y^k(to)} Y^k(from)` outside the image.
    pub element: (Vec<Rational>, Vec<Rational>),
}

/// Tests whether `f` is a fibration: for all `i <= j` and all degrees the
/// corner map `X(i) -> X(j) x_{Y(j)} Y(i)` is surjective, and `f` is surjective
/// at every stage. Returns the first witness of failure.
pub fn fibration_witness(f: &PComplexMap) -> Option<FibrationWitness> {
    let (x, y) = (&f.source, &f.target);
    let n = x.stages();
    for k in 0..=x.max_degree {
        for i in 0..n {
            let fi = f.comp(i, k);
            if fi.rank() < y.dim(i, k) {
                let missing = extend_basis(&fi.columns(), &std_basis(y.dim(i, k)), y.dim(i, k))[0];
                return Some(FibrationWitness {
                    degree: k,
                    from: i,
                    to: i,
                    element: (zero_vec(0), unit_vec(y.dim(i, k), missing)),
                });
            }
            for j in i + 1..n {
                let (xj, yi) = (x.dim(j, k), y.dim(i, k));
                // fibre product {(a, b) : f_j a = sigma^Y b}
                let cons = f.comp(j, k).hstack(&y.sigma_between(i, j, k).scale(&-Rational::one())).expect("shape");
                let fp = kernel_basis(&cons);
                let corner = x.sigma_between(i, j, k).vstack(&fi).expect("shape");
                let img = corner.columns();
                if img_rank(&img, xj + yi) < fp.len() {
                    let picked = extend_basis(&img, &fp, xj + yi)[0];
                    let v = &fp[picked];
                    return Some(FibrationWitness {
                        degree: k,
                        from: i,
                        to: j,
                        element: (v[..xj].to_vec(), v[xj..].to_vec()),
                    });
                }
            }
        }
    }
    None
}

pub fn is_fibration(f: &PComplexMap) -> bool {
    fibration_witness(f).is_none()
}

fn std_basis(n: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|i| unit_vec(n, i)).collect()
}

fn img_rank(vs: &[Vec<Rational>], dim: usize) -> usize {
    let mut e = Echelon::new(dim);
    for v in vs {
        e.insert(v);
    }
    e.rank()
}

/// Pointwise quasi-isomorphism test.
pub fn is_quasi_iso(f: &PComplexMap) -> bool {
    for k in 0..=f.source.max_degree {
        let hx = f.source.cohomology(k);
        let hy = f.target.cohomology(k);
        for r in 0..f.source.stages() {
            let m = f.on_cohomology(&hx, &hy, r);
            if m.rows() != m.cols() || m.rank() != m.rows() {
                return false;
            }
        }
    }
    true
}

/// Fibration that is also a pointwise quasi-isomorphism.
pub fn is_trivial_fibration(f: &PComplexMap) -> bool {
    is_fibration(f) && is_quasi_iso(f)
}

/// Direct lifting test against every generating cofibration `S^k_[s,t) -> D^k_s`
/// (with `t` finite or infinite). For `k >= 1` the gap map
/// `X^{k-1}(s) -> (Z X^k(s) x X^{k-1}(t)) x_(...) Y^{k-1}(s)`, `u -> (du, u_t, f u)`,
/// must be surjective. In degree zero, where the disk is zero, no nonzero
/// cocycle of `X(s)` dying by `t` may map to zero.
pub fn lifts_against_generating_cofibrations(f: &PComplexMap) -> bool {
    let (x, y) = (&f.source, &f.target);
    let n = x.stages();
    let top = x.max_degree + 1;
    for s in 0..n {
        let ts: Vec<Option<usize>> = (s + 1..n).map(Some).chain(std::iter::once(None)).collect();
        for &t in &ts {
            // degree zero
            let mut cons = x.d(s, 0).vstack(&f.comp(s, 0)).expect("shape");
            if let Some(t) = t {
                cons = cons.vstack(&x.sigma_between(s, t, 0)).expect("shape");
            }
            if !kernel_basis(&cons).is_empty() {
                return false;
            }
            for k in 1..=top {
                let (xs, ys1) = (x.dim(s, k), y.dim(s, k - 1));
                let xt1 = t.map_or(0, |t| x.dim(t, k - 1));
                // variables (a, u, b) in X^k(s) + X^{k-1}(t) + Y^{k-1}(s)
                let total = xs + xt1 + ys1;
                let mut rows: Vec<Vec<Rational>> = Vec::new();
                let push_block = |rows: &mut Vec<Vec<Rational>>, blocks: [Option<QMatrix>; 3], height: usize| {
                    for i in 0..height {
                        let mut row = Vec::with_capacity(total);
                        for (b, w) in blocks.iter().zip([xs, xt1, ys1]) {
                            match b {
                                Some(m) => row.extend(m.row(i).iter().cloned()),
                                None => row.extend(zero_vec(w)),
                            }
                        }
                        rows.push(row);
                    }
                };
                let neg = -Rational::one();
                // d a = 0
                push_block(&mut rows, [Some(x.d(s, k)), None, None], x.dim(s, k + 1));
                // f a = d b
                push_block(&mut rows, [Some(f.comp(s, k)), None, Some(y.d(s, k - 1).scale(&neg))], y.dim(s, k));
                if let Some(t) = t {
                    // d u = sigma a
                    push_block(
                        &mut rows,
                        [Some(x.sigma_between(s, t, k)), Some(x.d(t, k - 1).scale(&neg)), None],
                        x.dim(t, k),
                    );
                    // f u = sigma b
                    push_block(
                        &mut rows,
                        [None, Some(f.comp(t, k - 1)), Some(y.sigma_between(s, t, k - 1).scale(&neg))],
                        y.dim(t, k - 1),
                    );
                }
                let cons = QMatrix::from_rows(rows, total).expect("rows");
                let target_dim = kernel_basis(&cons).len();
                // gap map u -> (du, u_t, f u)
                let mut gap = x.d(s, k - 1);
                if let Some(t) = t {
                    gap = gap.vstack(&x.sigma_between(s, t, k - 1)).expect("shape");
                }
                let gap = gap.vstack(&f.comp(s, k - 1)).expect("shape");
                if gap.rank() < target_dim {
                    return false;
                }
            }
        }
    }
    true
}

/// Basis of the space of chain maps `X -> Y`, each as a full list of components.
pub fn chain_map_basis(x: &PersistentComplex, y: &PersistentComplex) -> Result<Vec<Vec<Vec<QMatrix>>>> {
    if x.grid != y.grid || x.max_degree != y.max_degree {
        return dim_err("chain maps between complexes over different grids or degree ranges");
    }
    let n = x.stages();
    let nk = x.max_degree + 1;
    // variable layout: for each (r, k) a block of entries of the component
    let mut offset = vec![vec![0usize; nk]; n];
    let mut total = 0;
    for r in 0..n {
        for k in 0..nk {
            offset[r][k] = total;
            total += y.dims[r][k] * x.dims[r][k];
        }
    }
    let var = |r: usize, k: usize, i: usize, j: usize| offset[r][k] + i * x.dims[r][k] + j;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for r in 0..n {
        for k in 0..nk {
            // d_Y f_k - f_{k+1} d_X = 0
            if k + 1 < nk {
                let (dy, dx) = (&y.diffs[r][k], &x.diffs[r][k]);
                for i in 0..y.dims[r][k + 1] {
                    for j in 0..x.dims[r][k] {
                        let mut row = zero_vec(total);
                        for l in 0..y.dims[r][k] {
                            row[var(r, k, l, j)] += dy.get(i, l);
                        }
                        for l in 0..x.dims[r][k + 1] {
                            row[var(r, k + 1, i, l)] -= dx.get(l, j);
                        }
                        rows.push(row);
                    }
                }
            }
            // sigma_Y f(r) - f(r+1) sigma_X = 0
            if r + 1 < n {
                let (sy, sx) = (&y.structure[r][k], &x.structure[r][k]);
                for i in 0..y.dims[r + 1][k] {
                    for j in 0..x.dims[r][k] {
                        let mut row = zero_vec(total);
                        for l in 0..y.dims[r][k] {
                            row[var(r, k, l, j)] += sy.get(i, l);
                        }
                        for l in 0..x.dims[r + 1][k] {
                            row[var(r + 1, k, i, l)] -= sx.get(l, j);
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    let basis = if rows.is_empty() {
        std_basis(total)
    } else {
        kernel_basis(&QMatrix::from_rows(rows, total)?)
    };
    Ok(basis
        .into_iter()
        .map(|v| {
            (0..n)
                .map(|r| {
                    (0..nk)
                        .map(|k| {
                            let mut m = QMatrix::zeros(y.dims[r][k], x.dims[r][k]);
                            for i in 0..y.dims[r][k] {
                                for j in 0..x.dims[r][k] {
                                    m.set(i, j, v[var(r, k, i, j)].clone());
                                }
                            }
                            m
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// One cell attached during the cofibration factorisation.
#[derive(Clone, Debug)]
pub struct CellRecord {
    /// 1: cells killing cocycles outside the image, 2: cells filling the rest.
    pub stage: u8,
    pub data: SphereMapData,
    /// Preimage of the new basis element in the target, at its birth.
    pub target_vector: Vec<Rational>,
}

/// Presentation of an injective map `i: X -> Y` as a relative cell complex:
/// `X -> P -> Y` with `P` obtained from `X` by the recorded attachments and
/// `P -> Y` an isomorphism.
#[derive(Clone, Debug)]
pub struct CofibrationCertificate {
    pub cells: Vec<CellRecord>,
    pub result: PersistentComplex,
    /// `X -> P`: the inclusion.
    pub inclusion: PComplexMap,
    /// `P -> Y`.
    pub comparison: PComplexMap,
}

impl CofibrationCertificate {
    /// Replays each attachment, checks the comparison is an isomorphism and the
    /// composite equals the original map.
    pub fn verify(&self, original: &PComplexMap) -> Result<()> {
        let mut p = original.source.clone();
        for cell in &self.cells {
            p = attach_cell(&p, &cell.data)?;
        }
        if p != self.result {
            return invariant("replayed attachments do not reproduce the stored complex");
        }
        self.comparison.validate()?;
        self.inclusion.validate()?;
        for r in 0..p.stages() {
            for k in 0..=p.max_degree {
                let m = &self.comparison.components[r][k];
                if m.rows() != m.cols() || m.rank() != m.rows() {
                    return invariant(format!("comparison map is not invertible at stage {r}, degree {k}"));
                }
            }
        }
        let comp = self.inclusion.compose(&self.comparison)?;
        if comp.components != original.components {
            return invariant("composite does not equal the original map");
        }
        Ok(())
    }
}

/// Factors an injective chain map through cell attachments.
///
/// First, cells in degree `k` are attached for the bars of `Z Y / i(Z X)`,
/// with attaching data `(0, y_t)`. Then cells are attached for the bars of
/// `Y / (i(X) + Z Y)` with data `(d y_s, y_t)`. The comparison map sends each
/// cell to the pushed-forward lift of its bar representative.
pub fn factor_cofibration(i: &PComplexMap) -> Result<CofibrationCertificate> {
    if !i.is_injective() {
        return Err(Error::Validation("factor_cofibration needs an injective map".into()));
    }
    let (x, y) = (&i.source, &i.target);
    let n = x.stages();
    let nk = x.max_degree + 1;
    let mut p = x.clone();
    // comparison columns per (r, k): images in Y of the basis of P
    let mut cmp: Vec<Vec<Vec<Vec<Rational>>>> =
        (0..n).map(|r| (0..nk).map(|k| i.components[r][k].columns()).collect()).collect();
    let mut cells = Vec::new();
    for stage in [1u8, 2u8] {
        // sub-persistence module of Y in each degree, and its complement bars
        let mut pending = Vec::new();
        for k in 0..nk {
            let subs: Vec<Vec<Vec<Rational>>> = (0..n)
                .map(|r| {
                    let mut s = i.components[r][k].columns();
                    if stage == 1 {
                        s = i.components[r][k].mul(&QMatrix::from_columns(&x.cocycles(r, k), x.dims[r][k])).unwrap().columns();
                    } else {
                        s.extend(y.cocycles(r, k));
                        // cells from the first stage are already in the image
                        s.extend(cmp[r][k].iter().cloned());
                    }
                    s
                })
                .collect();
            let ambient: Vec<Vec<Vec<Rational>>> = (0..n)
                .map(|r| if stage == 1 { y.cocycles(r, k) } else { std_basis(y.dims[r][k]) })
                .collect();
            let (module, lifts) = quotient_module(y, k, &ambient, &subs)?;
            let dec = module.decompose(k);
            for rep in &dec.representatives {
                let b = &rep.bar;
                let mut ys = zero_vec(y.dims[b.birth][k]);
                for (c, l) in rep.vectors[0].iter().zip(&lifts[b.birth]) {
                    crate::exactla::axpy(&mut ys, c, l);
                }
                pending.push((k, b.birth, b.death, ys));
            }
        }
        for (k, s, t, ys) in pending {
            // express (d y_s, y_t) in the coordinates of P through the comparison map
            let dys = y.d(s, k).mul_vec(&ys)?;
            let xdata = if k + 1 < nk { coords_through(&cmp[s][k + 1], &dys, y.dim(s, k + 1))? } else { Vec::new() };
            let ydata = match t {
                Some(t) => {
                    let yt = y.sigma_between(s, t, k).mul_vec(&ys)?;
                    coords_through(&cmp[t][k], &yt, y.dims[t][k])?
                }
                None => Vec::new(),
            };
            let data = SphereMapData { degree: k + 1, s, t, x: xdata, y: ydata };
            p = attach_cell(&p, &data)?;
            let mut cur = ys.clone();
            for r in s..t.unwrap_or(n) {
                if r > s {
                    cur = y.sigma(r - 1, k).mul_vec(&cur)?;
                }
                cmp[r][k].push(cur.clone());
            }
            cells.push(CellRecord { stage, data, target_vector: ys });
        }
    }
    let comparison = PComplexMap::new(
        p.clone(),
        y.clone(),
        (0..n).map(|r| (0..nk).map(|k| QMatrix::from_columns(&cmp[r][k], y.dims[r][k])).collect()).collect(),
    )?;
    let inclusion = PComplexMap::new(
        x.clone(),
        p.clone(),
        (0..n)
            .map(|r| {
                (0..nk)
                    .map(|k| {
                        let mut m = QMatrix::zeros(p.dims[r][k], x.dims[r][k]);
                        for j in 0..x.dims[r][k] {
                            m.set(j, j, Rational::one());
                        }
                        m
                    })
                    .collect()
            })
            .collect(),
    )?;
    Ok(CofibrationCertificate { cells, result: p, inclusion, comparison })
}

fn coords_through(cols: &[Vec<Rational>], v: &[Rational], dim: usize) -> Result<Vec<Rational>> {
    let a = QMatrix::from_columns(cols, dim);
    solve(&a, v)?.ok_or_else(|| Error::Invariant("element is not in the image of the partial comparison map".into()))
}

/// Persistence module `ambient / sub` in degree `k` of `y`, with lifts of the
/// chosen quotient basis at each stage (as vectors of `Y^k(r)`).
fn quotient_module(
    y: &PersistentComplex,
    k: usize,
    ambient: &[Vec<Vec<Rational>>],
    subs: &[Vec<Vec<Rational>>],
) -> Result<(PersistenceModule, Vec<Vec<Vec<Rational>>>)> {
    let n = y.stages();
    let mut lifts = Vec::new();
    for r in 0..n {
        let picked = extend_basis(&subs[r], &ambient[r], y.dims[r][k]);
        lifts.push(picked.into_iter().map(|j| ambient[r][j].clone()).collect::<Vec<_>>());
    }
    let mut maps = Vec::new();
    for r in 0..n - 1 {
        let mut m = QMatrix::zeros(lifts[r + 1].len(), lifts[r].len());
        for (j, l) in lifts[r].iter().enumerate() {
            let w = y.sigma(r, k).mul_vec(l)?;
            let c = class_coordinates(&lifts[r + 1], &subs[r + 1], &w, y.dims[r + 1][k])
                .ok_or_else(|| Error::Invariant("quotient module structure map".into()))?;
            for (i, v) in c.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        maps.push(m);
    }
    let dims = lifts.iter().map(|l| l.len()).collect();
    Ok((PersistenceModule { grid: y.grid.clone(), dims, maps }, lifts))
}
