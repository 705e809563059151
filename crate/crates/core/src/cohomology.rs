//! The kernel complex `J ⊗ Hom•(C₀, D₀)` over `F_p` and its cohomology.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgMatrix, DeformedAlgebra, Level};
use crate::complex::{delta, GradedMap, HomComplex, PreComplex};
use crate::error::{Error, Result};
use crate::linalg::{all_combinations, FpMatrix, Solver, Subspace};

/// A cohomology class, stored by its canonical representative: the unique
/// cocycle in the class vanishing on the pivot coordinates of the coboundaries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CohClass {
    pub degree: i32,
    pub rep: Vec<u32>,
}

impl CohClass {
    pub fn is_zero(&self) -> bool {
        self.rep.iter().all(|&x| x == 0)
    }
}

#[derive(Clone, Debug)]
struct DegreeData {
    /// `δ: Cⁿ → Cⁿ⁺¹`.
    delta: FpMatrix,
    /// Solver for `δ: Cⁿ⁻¹ → Cⁿ`.
    prev: Solver,
    boundaries: Subspace,
    cocycles: Subspace,
    /// Canonical representatives of a basis of `Hⁿ`, in reduced echelon form.
    h_basis: Vec<Vec<u32>>,
    h_pivots: Vec<usize>,
}

/// `J ⊗_{F_p} Hom•(C₀, D₀)` with differential `δ₀ ⊗ 1`.
#[derive(Clone, Debug)]
pub struct KernelComplex {
    pub alg: Arc<DeformedAlgebra>,
    pub src: PreComplex,
    pub tgt: PreComplex,
    pub hom: HomComplex,
    degrees: BTreeMap<i32, DegreeData>,
}

impl KernelComplex {
    pub fn new(alg: Arc<DeformedAlgebra>, src: &PreComplex, tgt: &PreComplex) -> Result<Self> {
        for c in [src, tgt] {
            if c.level() != Level::Base {
                return Err(Error::LevelMismatch { expected: "base".into(), found: c.level().to_string() });
            }
        }
        let hom = HomComplex::new(src, tgt)?;
        let p = alg.p();
        let jd = alg.tower.j_dim();
        let width = alg.base.rank();
        let range = hom.degree_range();
        let (lo, hi) = (*range.start() - 1, *range.end() + 1);
        let mut deltas = BTreeMap::new();
        for n in lo - 1..=hi {
            let rows = hom.dim(n + 1, width);
            let cols = hom.dim(n, width);
            let d0 = if cols == 0 || rows == 0 {
                FpMatrix::zero(p, rows, cols)
            } else {
                FpMatrix::from_columns(p, rows, &hom.delta_columns(&alg.base, n)?)
            };
            let mut d = FpMatrix::zero(p, rows * jd, cols * jd);
            for t in 0..jd {
                for r in 0..rows {
                    for c in 0..cols {
                        d.data[(t * rows + r) * d.cols + t * cols + c] = d0.get(r, c);
                    }
                }
            }
            deltas.insert(n, d);
        }
        let mut degrees = BTreeMap::new();
        for n in lo..=hi {
            let dim = hom.dim(n, width) * jd;
            let delta_n = deltas[&n].clone();
            let prev_m = &deltas[&(n - 1)];
            let prev = Solver::new(prev_m);
            let images: Vec<Vec<u32>> = (0..prev_m.cols).map(|c| prev_m.column(c)).collect();
            let boundaries = Subspace::span(p, dim, &images);
            let z = delta_n.kernel_basis();
            let cocycles = Subspace::span(p, dim, &z);
            let reduced: Vec<Vec<u32>> = z.iter().map(|v| boundaries.reduce(v)).collect();
            let h = Subspace::span(p, dim, &reduced);
            degrees.insert(
                n,
                DegreeData { delta: delta_n, prev, boundaries, cocycles, h_basis: h.rows, h_pivots: h.pivots },
            );
        }
        Ok(KernelComplex { alg, src: src.clone(), tgt: tgt.clone(), hom, degrees })
    }

    pub fn p(&self) -> u32 {
        self.alg.p()
    }

    pub fn j_dim(&self) -> usize {
        self.alg.tower.j_dim()
    }

    /// Dimension of `Homⁿ(C₀, D₀)` over `F_p`.
    pub fn hom_dim(&self, n: i32) -> usize {
        self.hom.dim(n, self.alg.base.rank())
    }

    /// Dimension of the kernel complex in degree `n`.
    pub fn dim(&self, n: i32) -> usize {
        self.hom_dim(n) * self.j_dim()
    }

    fn data(&self, n: i32) -> Option<&DegreeData> {
        self.degrees.get(&n)
    }

    /// Matrix of `δ: Cⁿ → Cⁿ⁺¹`.
    pub fn delta_matrix(&self, n: i32) -> FpMatrix {
        match self.data(n) {
            Some(d) => d.delta.clone(),
            None => FpMatrix::zero(self.p(), self.dim(n + 1), self.dim(n)),
        }
    }

    pub fn apply_delta(&self, n: i32, v: &[u32]) -> Vec<u32> {
        match self.data(n) {
            Some(d) => d.delta.mul_vec(v),
            None => vec![0; self.dim(n + 1)],
        }
    }

    pub fn is_cocycle(&self, n: i32, z: &[u32]) -> bool {
        self.apply_delta(n, z).iter().all(|&x| x == 0)
    }

    pub fn h_dim(&self, n: i32) -> usize {
        self.data(n).map_or(0, |d| d.h_basis.len())
    }

    pub fn cocycle_dim(&self, n: i32) -> usize {
        self.data(n).map_or(0, |d| d.cocycles.dim())
    }

    pub fn coboundary_dim(&self, n: i32) -> usize {
        self.data(n).map_or(0, |d| d.boundaries.dim())
    }

    pub fn rank_delta(&self, n: i32) -> usize {
        self.data(n).map_or(0, |d| d.delta.rank())
    }

    /// Canonical representatives of a basis of `Hⁿ`.
    pub fn h_basis(&self, n: i32) -> Vec<Vec<u32>> {
        self.data(n).map_or_else(Vec::new, |d| d.h_basis.clone())
    }

    /// Class of a cocycle.
    pub fn coh_class(&self, n: i32, z: &[u32]) -> Result<CohClass> {
        if z.len() != self.dim(n) {
            return Err(Error::ShapeMismatch(format!("degree {n} coordinates have length {}", self.dim(n))));
        }
        if !self.is_cocycle(n, z) {
            return Err(Error::NotACocycle(n));
        }
        let rep = match self.data(n) {
            Some(d) => d.boundaries.reduce(z),
            None => vec![],
        };
        Ok(CohClass { degree: n, rep })
    }

    /// Coordinates of a class in the basis returned by [`Self::h_basis`].
    pub fn class_coords(&self, c: &CohClass) -> Vec<u32> {
        match self.data(c.degree) {
            Some(d) => d.h_pivots.iter().map(|&pc| c.rep[pc]).collect(),
            None => vec![],
        }
    }

    /// Returns `γ` with `δγ = z` (echelon-minimal), or `None`.
    pub fn is_coboundary(&self, n: i32, z: &[u32]) -> Option<Vec<u32>> {
        match self.data(n) {
            Some(d) => d.prev.solve(z),
            None => z.iter().all(|&x| x == 0).then(Vec::new),
        }
    }

    /// Canonical representatives of all classes in `Hⁿ`, in lexicographic
    /// order of their basis coordinates.
    pub fn all_classes(&self, n: i32) -> Vec<CohClass> {
        all_combinations(self.p(), self.dim(n), &self.h_basis(n))
            .into_iter()
            .map(|rep| CohClass { degree: n, rep })
            .collect()
    }

    /// Kernel coordinates of a bar-level graded map reducing to zero.
    pub fn into_kernel(&self, f: &GradedMap) -> Result<Vec<u32>> {
        let n = f.degree;
        let hd = self.hom_dim(n);
        let jd = self.j_dim();
        let mut out = vec![0u32; hd * jd];
        let mut off = 0;
        for m in &f.comps {
            let parts = self.alg.kernel_coords(m)?;
            let len = m.rows * m.cols * self.alg.base.rank();
            for (t, part) in parts.iter().enumerate() {
                out[t * hd + off..t * hd + off + len].copy_from_slice(&part.data);
            }
            off += len;
        }
        Ok(out)
    }

    /// Bar-level graded map with the given kernel coordinates.
    pub fn out_of_kernel(&self, n: i32, coords: &[u32]) -> GradedMap {
        let hd = self.hom_dim(n);
        let src = self.src.obj.at_level(Level::Bar);
        let tgt = self.tgt.obj.at_level(Level::Bar);
        let mut out = GradedMap::zero(&self.alg.bar, &src, &tgt, n);
        let width = self.alg.base.rank();
        let mut off = 0;
        for m in out.comps.iter_mut() {
            let len = m.rows * m.cols * width;
            let parts: Vec<AlgMatrix> = (0..self.j_dim())
                .map(|t| AlgMatrix {
                    level: Level::Base,
                    rows: m.rows,
                    cols: m.cols,
                    width,
                    data: coords[t * hd + off..t * hd + off + len].to_vec(),
                })
                .collect();
            *m = self.alg.from_kernel_coords(&parts, m.rows, m.cols);
            off += len;
        }
        out
    }

    /// The differential on kernel coordinates computed through bar-level
    /// pre-differentials lifting the base differentials.
    pub fn delta_from_lifts(&self, n: i32, d_src: &GradedMap, d_tgt: &GradedMap) -> Result<FpMatrix> {
        let dim = self.dim(n);
        let mut cols = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut e = vec![0u32; dim];
            e[c] = 1;
            let f = self.out_of_kernel(n, &e);
            cols.push(self.into_kernel(&delta(&self.alg.bar, d_src, d_tgt, &f)?)?);
        }
        Ok(FpMatrix::from_columns(self.p(), self.dim(n + 1), &cols))
    }
}
