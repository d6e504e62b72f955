//! Persistence modules over a finite grid and their interval decomposition.

use crate::error::{dim_err, Error, Result};
use crate::exactla::{axpy, extend_basis, format_rational, is_zero_vec, unit_vec, Echelon, QMatrix, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// Strictly increasing rational sample points `t_0 < ... < t_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    times: Vec<Rational>,
}

impl Grid {
    pub fn new(times: Vec<Rational>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Schema("grid must contain at least one point".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema("grid points must be strictly increasing".into()));
        }
        Ok(Grid { times })
    }

    /// Grid `0, 1, ..., n-1`.
    pub fn range(n: usize) -> Self {
        Grid { times: (0..n as i64).map(crate::exactla::q).collect() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> &Rational {
        &self.times[i]
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn label(&self, i: usize) -> String {
        format_rational(&self.times[i])
    }
}

/// Bar `[t_birth, t_death)` in a given degree; `death == None` means the class
/// survives past the last grid point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bar {
    pub degree: usize,
    pub birth: usize,
    pub death: Option<usize>,
}

impl Bar {
    pub fn alive_at(&self, r: usize) -> bool {
        self.birth <= r && self.death.map_or(true, |d| r < d)
    }

    /// Sort key placing finite bars before infinite ones.
    fn key(&self) -> (usize, usize, usize) {
        (self.degree, self.birth, self.death.unwrap_or(usize::MAX))
    }
}

pub fn sort_bars(bars: &mut [Bar]) {
    bars.sort_by_key(|b| b.key());
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarRecord {
    pub degree: usize,
    pub birth: String,
    pub death: Option<String>,
}

pub fn bar_records(grid: &Grid, bars: &[Bar]) -> Vec<BarRecord> {
    let mut bars = bars.to_vec();
    sort_bars(&mut bars);
    bars.iter()
        .map(|b| BarRecord { degree: b.degree, birth: grid.label(b.birth), death: b.death.map(|d| grid.label(d)) })
        .collect()
}

/// Finite-dimensional vector spaces `V_i` with maps `V_i -> V_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceModule {
    pub grid: Grid,
    pub dims: Vec<usize>,
    /// `maps[i]` is a `dims[i+1] x dims[i]` matrix.
    pub maps: Vec<QMatrix>,
}

/// A section of the module along a bar, spanning the summand it indexes.
/// `vectors[j]` lives in `V_{birth + j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BarRepresentative {
    pub bar: Bar,
    pub vectors: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub bars: Vec<Bar>,
    pub representatives: Vec<BarRepresentative>,
}

impl PersistenceModule {
    pub fn new(grid: Grid, dims: Vec<usize>, maps: Vec<QMatrix>) -> Result<Self> {
        if dims.len() != grid.len() {
            return dim_err(format!("{} dimensions for a grid of {} points", dims.len(), grid.len()));
        }
        if maps.len() + 1 != grid.len() {
            return dim_err(format!("{} structure maps for a grid of {} points", maps.len(), grid.len()));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.rows() != dims[i + 1] || m.cols() != dims[i] {
                return dim_err(format!(
                    "structure map {i} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    dims[i + 1],
                    dims[i]
                ));
            }
        }
        Ok(PersistenceModule { grid, dims, maps })
    }

    /// Composite structure map `V_i -> V_j` for `i <= j`.
    pub fn composite(&self, i: usize, j: usize) -> QMatrix {
        let mut m = QMatrix::identity(self.dims[i]);
        for k in i..j {
            m = self.maps[k].mul(&m).expect("validated shapes");
        }
        m
    }

    /// Rank of `V_i -> V_j`.
    pub fn rank_invariant(&self, i: usize, j: usize) -> usize {
        self.composite(i, j).rank()
    }

    /// Interval decomposition by a left-to-right sweep.
    ///
    /// Alive bars are processed oldest first; a bar whose image is a
    /// combination of older images dies, and that same combination of the
    /// older sections is subtracted from its section so that its image at
    /// death is exactly zero. Fresh bars complete the image to a basis.
    pub fn decompose(&self, degree: usize) -> Decomposition {
        struct Open {
            birth: usize,
            vectors: Vec<Vec<Rational>>,
        }
        let n = self.grid.len();
        let mut open: Vec<Open> = (0..self.dims[0])
            .map(|i| Open { birth: 0, vectors: vec![unit_vec(self.dims[0], i)] })
            .collect();
        let mut closed: Vec<(Bar, Vec<Vec<Rational>>)> = Vec::new();
        for i in 0..n - 1 {
            let a = &self.maps[i];
            let dim = self.dims[i + 1];
            // open is kept ordered by birth, then creation
            let mut ech = Echelon::new(dim);
            let mut accepted: Vec<usize> = Vec::new();
            let mut survivors = Vec::new();
            let mut images = Vec::new();
            let old: Vec<Open> = std::mem::take(&mut open);
            let mut snapshot: Vec<Vec<Vec<Rational>>> = Vec::new();
            for (idx, mut bar) in old.into_iter().enumerate() {
                let w = a.mul_vec(bar.vectors.last().unwrap()).expect("shape");
                match ech.coordinates(&w) {
                    Some(coeffs) => {
                        // coeffs are over accepted images in insertion order
                        for (c, &src) in coeffs.iter().zip(&accepted) {
                            if c.is_zero() {
                                continue;
                            }
                            let (src_birth, src_vecs): (usize, &Vec<Vec<Rational>>) = survivors_ref(&survivors, &snapshot, src);
                            let nc = -c.clone();
                            for (off, v) in bar.vectors.iter_mut().enumerate() {
                                let r = bar.birth + off;
                                axpy(v, &nc, &src_vecs[r - src_birth]);
                            }
                        }
                        debug_assert!(is_zero_vec(&a.mul_vec(bar.vectors.last().unwrap()).unwrap()));
                        closed.push((Bar { degree, birth: bar.birth, death: Some(i + 1) }, bar.vectors));
                    }
                    None => {
                        ech.insert(&w);
                        accepted.push(idx);
                        snapshot.push(bar.vectors.clone());
                        survivors.push((idx, bar.birth));
                        images.push(w.clone());
                        bar.vectors.push(w);
                        open.push(bar);
                    }
                }
            }
            let std: Vec<Vec<Rational>> = (0..dim).map(|k| unit_vec(dim, k)).collect();
            for k in extend_basis(&images, &std, dim) {
                open.push(Open { birth: i + 1, vectors: vec![std[k].clone()] });
            }
        }
        for o in open {
            closed.push((Bar { degree, birth: o.birth, death: None }, o.vectors));
        }
        closed.sort_by_key(|(b, _)| b.key());
        let bars = closed.iter().map(|(b, _)| b.clone()).collect();
        let representatives = closed.into_iter().map(|(bar, vectors)| BarRepresentative { bar, vectors }).collect();
        Decomposition { bars, representatives }
    }

    /// Module that is the direct sum of the given interval modules, with the
    /// bars (restricted to `degree` if given) in list order as basis at each stage.
    pub fn from_bars(grid: &Grid, bars: &[Bar]) -> Self {
        let n = grid.len();
        let alive: Vec<Vec<usize>> =
            (0..n).map(|r| (0..bars.len()).filter(|&b| bars[b].alive_at(r)).collect()).collect();
        let dims: Vec<usize> = alive.iter().map(|a| a.len()).collect();
        let mut maps = Vec::new();
        for r in 0..n.saturating_sub(1) {
            let mut m = QMatrix::zeros(dims[r + 1], dims[r]);
            for (j, b) in alive[r].iter().enumerate() {
                if let Some(i) = alive[r + 1].iter().position(|x| x == b) {
                    m.set(i, j, crate::exactla::q(1));
                }
            }
            maps.push(m);
        }
        PersistenceModule { grid: grid.clone(), dims, maps }
    }

    /// Checks the section invariants of a decomposition: nonzero at birth,
    /// compatible with structure maps, zero image at death, and a basis of
    /// every stage from the alive sections.
    pub fn check_decomposition(&self, dec: &Decomposition) -> Result<()> {
        for rep in &dec.representatives {
            let b = &rep.bar;
            let end = b.death.unwrap_or(self.grid.len());
            if rep.vectors.len() != end - b.birth {
                return crate::error::invariant("section length does not match bar");
            }
            if is_zero_vec(&rep.vectors[0]) {
                return crate::error::invariant("section vanishes at birth");
            }
            for (off, v) in rep.vectors.iter().enumerate() {
                let r = b.birth + off;
                if r + 1 < self.grid.len() {
                    let w = self.maps[r].mul_vec(v)?;
                    let expected_zero = Some(r + 1) == b.death;
                    if expected_zero && !is_zero_vec(&w) {
                        return crate::error::invariant("section image at death is nonzero");
                    }
                    if !expected_zero && w != rep.vectors[off + 1] {
                        return crate::error::invariant("section not compatible with structure map");
                    }
                }
            }
        }
        for r in 0..self.grid.len() {
            let vs: Vec<Vec<Rational>> = dec
                .representatives
                .iter()
                .filter(|rep| rep.bar.alive_at(r))
                .map(|rep| rep.vectors[r - rep.bar.birth].clone())
                .collect();
            let mut e = Echelon::new(self.dims[r]);
            let independent = vs.iter().all(|v| e.insert(v));
            if !independent || vs.len() != self.dims[r] {
                return crate::error::invariant(format!("alive sections do not form a basis at stage {r}"));
            }
        }
        Ok(())
    }
}

fn survivors_ref<'a>(
    survivors: &[(usize, usize)],
    snapshot: &'a [Vec<Vec<Rational>>],
    src: usize,
) -> (usize, &'a Vec<Vec<Rational>>) {
    let pos = survivors.iter().position(|(idx, _)| *idx == src).expect("accepted bar");
    (survivors[pos].1, &snapshot[pos])
}

/// Counts bars `[i, j)` via inclusion-exclusion on the rank invariant,
/// treating `j == len` as the point at infinity.
pub fn multiplicity_from_ranks(m: &PersistenceModule, i: usize, j: usize) -> i64 {
    let n = m.grid.len();
    let r = |a: isize, b: usize| -> i64 {
        if a < 0 {
            return 0;
        }
        let a = a as usize;
        if b >= n {
            // rank into the limit: classes alive at a surviving to the end
            return if a < n { m.rank_invariant(a, n - 1) as i64 } else { 0 };
        }
        if a > b {
            return 0;
        }
        m.rank_invariant(a, b) as i64
    };
    let i = i as isize;
    if j >= n {
        r(i, n) - r(i - 1, n)
    } else {
        r(i, j - 1) - r(i, j) - r(i - 1, j - 1) + r(i - 1, j)
    }
}
