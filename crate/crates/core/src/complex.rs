//! Graded objects, graded maps, pre-complexes and the Hom-complex operator.

use crate::algebra::{AlgMatrix, DeformedAlgebra, Level};
use crate::error::{Error, Result};
use crate::finring::{Elem, FiniteRing};

/// Ranks of free modules in a finite window of degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedObject {
    pub level: Level,
    pub lo: i32,
    /// `ranks[i]` is the rank in degree `lo + i`.
    pub ranks: Vec<usize>,
}

impl GradedObject {
    pub fn new(level: Level, lo: i32, ranks: Vec<usize>) -> Self {
        GradedObject { level, lo, ranks }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.ranks.len() as i32 - 1
    }

    pub fn rank(&self, i: i32) -> usize {
        if i < self.lo || i > self.hi() {
            0
        } else {
            self.ranks[(i - self.lo) as usize]
        }
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn at_level(&self, level: Level) -> Self {
        GradedObject { level, ..self.clone() }
    }

    /// Degreewise direct sum over the union of the windows.
    pub fn direct_sum(&self, other: &Self) -> Self {
        if self.ranks.is_empty() {
            return other.clone();
        }
        if other.ranks.is_empty() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        GradedObject {
            level: self.level,
            lo,
            ranks: (lo..=hi).map(|i| self.rank(i) + other.rank(i)).collect(),
        }
    }
}

/// A graded map of degree `n`: one matrix per source degree `i`, of shape
/// `rank_tgt(i + n) × rank_src(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedMap {
    pub level: Level,
    pub src: GradedObject,
    pub tgt: GradedObject,
    pub degree: i32,
    /// `comps[k]` is the component on source degree `src.lo + k`.
    pub comps: Vec<AlgMatrix>,
}

fn sign_neg(n: i32) -> bool {
    n.rem_euclid(2) == 1
}

impl GradedMap {
    pub fn zero(ring: &FiniteRing, src: &GradedObject, tgt: &GradedObject, degree: i32) -> Self {
        let comps = src
            .degrees()
            .map(|i| AlgMatrix::zero(src.level, ring, tgt.rank(i + degree), src.rank(i)))
            .collect();
        GradedMap { level: src.level, src: src.clone(), tgt: tgt.clone(), degree, comps }
    }

    pub fn identity(ring: &FiniteRing, obj: &GradedObject) -> Self {
        let comps = obj.degrees().map(|i| AlgMatrix::identity(obj.level, ring, obj.rank(i))).collect();
        GradedMap { level: obj.level, src: obj.clone(), tgt: obj.clone(), degree: 0, comps }
    }

    /// Builds a map from per-degree components, validating shapes.
    pub fn from_comps(src: &GradedObject, tgt: &GradedObject, degree: i32, comps: Vec<AlgMatrix>) -> Result<Self> {
        if comps.len() != src.ranks.len() {
            return Err(Error::ShapeMismatch(format!("{} components for a window of {} degrees", comps.len(), src.ranks.len())));
        }
        for (i, m) in src.degrees().zip(&comps) {
            if m.shape() != (tgt.rank(i + degree), src.rank(i)) {
                return Err(Error::ShapeMismatch(format!(
                    "component in degree {i} has shape {:?}, expected {:?}",
                    m.shape(),
                    (tgt.rank(i + degree), src.rank(i))
                )));
            }
            if m.level != src.level {
                return Err(Error::LevelMismatch { expected: src.level.to_string(), found: m.level.to_string() });
            }
        }
        if src.level != tgt.level {
            return Err(Error::LevelMismatch { expected: src.level.to_string(), found: tgt.level.to_string() });
        }
        Ok(GradedMap { level: src.level, src: src.clone(), tgt: tgt.clone(), degree, comps })
    }

    /// Component on source degree `i` (an empty matrix outside the window).
    pub fn comp(&self, ring: &FiniteRing, i: i32) -> AlgMatrix {
        if i < self.src.lo || i > self.src.hi() {
            AlgMatrix::zero(self.level, ring, self.tgt.rank(i + self.degree), 0)
        } else {
            self.comps[(i - self.src.lo) as usize].clone()
        }
    }

    pub fn comp_ref(&self, i: i32) -> Option<&AlgMatrix> {
        if i < self.src.lo || i > self.src.hi() {
            None
        } else {
            Some(&self.comps[(i - self.src.lo) as usize])
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(AlgMatrix::is_zero)
    }

    fn check_parallel(&self, other: &Self) -> Result<()> {
        if self.src != other.src || self.tgt != other.tgt || self.degree != other.degree {
            return Err(Error::ShapeMismatch(format!(
                "graded maps are not parallel (degrees {} and {})",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, ring: &FiniteRing, other: &Self) -> Result<Self> {
        self.check_parallel(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.add(ring, b))
            .collect::<Result<_>>()?;
        Ok(GradedMap { comps, ..self.clone() })
    }

    pub fn sub(&self, ring: &FiniteRing, other: &Self) -> Result<Self> {
        self.add(ring, &other.neg(ring))
    }

    pub fn neg(&self, ring: &FiniteRing) -> Self {
        GradedMap { comps: self.comps.iter().map(|m| m.neg(ring)).collect(), ..self.clone() }
    }

    pub fn scale_int(&self, ring: &FiniteRing, n: u64) -> Self {
        GradedMap { comps: self.comps.iter().map(|m| m.scale_int(ring, n)).collect(), ..self.clone() }
    }

    /// Composite `self ∘ first` (matrix product in each degree).
    pub fn compose(&self, ring: &FiniteRing, first: &GradedMap) -> Result<Self> {
        if first.tgt != self.src {
            return Err(Error::ShapeMismatch("composable maps need matching middle object".into()));
        }
        let degree = self.degree + first.degree;
        let comps = first
            .src
            .degrees()
            .map(|i| {
                let f = first.comp(ring, i);
                match self.comp_ref(i + first.degree) {
                    Some(g) => g.mul(ring, &f),
                    None => Ok(AlgMatrix::zero(self.level, ring, self.tgt.rank(i + degree), first.src.rank(i))),
                }
            })
            .collect::<Result<_>>()?;
        Ok(GradedMap { level: self.level, src: first.src.clone(), tgt: self.tgt.clone(), degree, comps })
    }

    /// Entrywise change of ring.
    pub fn map_entries(&self, level: Level, width: usize, f: impl Fn(&[u32]) -> Elem) -> Self {
        GradedMap {
            level,
            src: self.src.at_level(level),
            tgt: self.tgt.at_level(level),
            degree: self.degree,
            comps: self.comps.iter().map(|m| m.map_with(level, width, &f)).collect(),
        }
    }

    /// Flat coordinates: source degree, then row, then column, then entry coefficient.
    pub fn to_coords(&self) -> Vec<u32> {
        self.comps.iter().flat_map(|m| m.data.iter().copied()).collect()
    }

    /// Inverse of [`Self::to_coords`].
    pub fn from_coords(ring: &FiniteRing, src: &GradedObject, tgt: &GradedObject, degree: i32, coords: &[u32]) -> Self {
        let mut out = Self::zero(ring, src, tgt, degree);
        let mut off = 0;
        for m in out.comps.iter_mut() {
            let n = m.data.len();
            m.data.copy_from_slice(&coords[off..off + n]);
            off += n;
        }
        out
    }

    /// Number of flat coordinates.
    pub fn coord_len(&self) -> usize {
        self.comps.iter().map(|m| m.data.len()).sum()
    }

    /// Restriction of a degree-0 map on `A ⊕ B`-shaped objects to given row/column blocks per degree.
    pub fn block(&self, src: &GradedObject, tgt: &GradedObject, row_off: impl Fn(i32) -> usize, col_off: impl Fn(i32) -> usize) -> Self {
        let comps = src
            .degrees()
            .map(|i| {
                let m = self.comp_ref(i).expect("block source inside window");
                let r0 = row_off(i + self.degree);
                let c0 = col_off(i);
                m.block(r0..r0 + tgt.rank(i + self.degree), c0..c0 + src.rank(i))
            })
            .collect();
        GradedMap { level: self.level, src: src.clone(), tgt: tgt.clone(), degree: self.degree, comps }
    }
}

/// `δⁿ(f) = d_D f − (−1)ⁿ f d_C`.
pub fn delta(ring: &FiniteRing, d_src: &GradedMap, d_tgt: &GradedMap, f: &GradedMap) -> Result<GradedMap> {
    if d_src.src != f.src || d_tgt.src != f.tgt {
        return Err(Error::ShapeMismatch("map endpoints do not match the differentials".into()));
    }
    let left = d_tgt.compose(ring, f)?;
    let right = f.compose(ring, d_src)?;
    if sign_neg(f.degree) {
        left.add(ring, &right)
    } else {
        left.sub(ring, &right)
    }
}

/// A graded object with a pre-differential (a degree-1 endomorphism).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreComplex {
    pub obj: GradedObject,
    pub d: GradedMap,
}

impl PreComplex {
    pub fn new(obj: GradedObject, d: GradedMap) -> Result<Self> {
        if d.src != obj || d.tgt != obj || d.degree != 1 {
            return Err(Error::ShapeMismatch("pre-differential must be a degree-1 endomorphism".into()));
        }
        Ok(PreComplex { obj, d })
    }

    /// Validated complex: `d² = 0`.
    pub fn complex(ring: &FiniteRing, obj: GradedObject, d: GradedMap) -> Result<Self> {
        let c = Self::new(obj, d)?;
        if !c.is_complex(ring)? {
            return Err(Error::NotADifferential);
        }
        Ok(c)
    }

    pub fn zero(ring: &FiniteRing, obj: &GradedObject) -> Self {
        PreComplex { obj: obj.clone(), d: GradedMap::zero(ring, obj, obj, 1) }
    }

    pub fn level(&self) -> Level {
        self.obj.level
    }

    pub fn square(&self, ring: &FiniteRing) -> Result<GradedMap> {
        self.d.compose(ring, &self.d)
    }

    pub fn is_complex(&self, ring: &FiniteRing) -> Result<bool> {
        Ok(self.square(ring)?.is_zero())
    }

    pub fn with_differential(&self, d: GradedMap) -> Result<Self> {
        Self::new(self.obj.clone(), d)
    }

    /// Degreewise direct sum with block-diagonal differential.
    pub fn direct_sum(&self, ring: &FiniteRing, other: &Self) -> Self {
        let obj = self.obj.direct_sum(&other.obj);
        let comps = obj
            .degrees()
            .map(|i| {
                self.d.comp(ring, i).direct_sum(ring, &other.d.comp(ring, i))
            })
            .collect();
        let d = GradedMap { level: obj.level, src: obj.clone(), tgt: obj.clone(), degree: 1, comps };
        PreComplex { obj, d }
    }
}

/// A graded map `H` of degree `n − 1` together with the maps it connects.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub h: GradedMap,
    pub from: GradedMap,
    pub to: GradedMap,
}

impl Homotopy {
    /// Whether `δ(H) = to − from`.
    pub fn is_valid(&self, ring: &FiniteRing, c: &PreComplex, d: &PreComplex) -> Result<bool> {
        is_homotopy(ring, c, d, &self.h, &self.from, &self.to)
    }
}

pub fn is_homotopy(ring: &FiniteRing, c: &PreComplex, d: &PreComplex, h: &GradedMap, f: &GradedMap, g: &GradedMap) -> Result<bool> {
    let dh = delta(ring, &c.d, &d.d, h)?;
    Ok(dh == g.sub(ring, f)?)
}

/// `Hom•(C, D)` with its operator `δ`.
#[derive(Clone, Debug)]
pub struct HomComplex {
    pub src: PreComplex,
    pub tgt: PreComplex,
}

impl HomComplex {
    pub fn new(src: &PreComplex, tgt: &PreComplex) -> Result<Self> {
        if src.level() != tgt.level() {
            return Err(Error::LevelMismatch { expected: src.level().to_string(), found: tgt.level().to_string() });
        }
        Ok(HomComplex { src: src.clone(), tgt: tgt.clone() })
    }

    /// Degrees in which `Homⁿ` can be nonzero.
    pub fn degree_range(&self) -> std::ops::RangeInclusive<i32> {
        (self.tgt.obj.lo - self.src.obj.hi())..=(self.tgt.obj.hi() - self.src.obj.lo)
    }

    /// Number of matrix entries in `Homⁿ`.
    pub fn entries(&self, n: i32) -> usize {
        self.src.obj.degrees().map(|i| self.tgt.obj.rank(i + n) * self.src.obj.rank(i)).sum()
    }

    /// Coordinate dimension of `Homⁿ` for entries of the given width.
    pub fn dim(&self, n: i32, width: usize) -> usize {
        self.entries(n) * width
    }

    pub fn zero(&self, ring: &FiniteRing, n: i32) -> GradedMap {
        GradedMap::zero(ring, &self.src.obj, &self.tgt.obj, n)
    }

    pub fn delta(&self, ring: &FiniteRing, f: &GradedMap) -> Result<GradedMap> {
        delta(ring, &self.src.d, &self.tgt.d, f)
    }

    pub fn is_homotopy(&self, ring: &FiniteRing, h: &GradedMap, f: &GradedMap, g: &GradedMap) -> Result<bool> {
        is_homotopy(ring, &self.src, &self.tgt, h, f, g)
    }

    /// Matrix of `δⁿ` on flat coordinates (for rings of `F_p`-dimension equal to
    /// their additive rank), column `c` = coordinates of `δ(e_c)`.
    pub fn delta_columns(&self, ring: &FiniteRing, n: i32) -> Result<Vec<Vec<u32>>> {
        let dim = self.dim(n, ring.rank());
        let mut cols = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut e = vec![0u32; dim];
            e[c] = 1;
            let f = GradedMap::from_coords(ring, &self.src.obj, &self.tgt.obj, n, &e);
            cols.push(self.delta(ring, &f)?.to_coords());
        }
        Ok(cols)
    }
}

/// Entrywise `σ`-lift of a middle-level graded map.
pub fn graded_lift(alg: &DeformedAlgebra, f: &GradedMap) -> GradedMap {
    f.map_entries(Level::Bar, alg.bar.rank(), |x| alg.sigma(x))
}

/// Entrywise `σ`-lift of a middle-level pre-complex.
pub fn graded_lift_complex(alg: &DeformedAlgebra, c: &PreComplex) -> PreComplex {
    PreComplex { obj: c.obj.at_level(Level::Bar), d: graded_lift(alg, &c.d) }
}

/// Integer lift of a base-level graded map to `level` (bar or mid).
pub fn lift_from_base(alg: &DeformedAlgebra, f: &GradedMap, level: Level) -> GradedMap {
    let bar = f.map_entries(Level::Bar, alg.bar.rank(), |x| alg.lift_base(x));
    match level {
        Level::Mid => bar.map_entries(Level::Mid, alg.mid.rank(), |x| alg.to_mid.apply(x)),
        _ => bar,
    }
}

/// Reduction of a graded map to a lower level.
pub fn reduce_map(alg: &DeformedAlgebra, f: &GradedMap, to: Level) -> Result<GradedMap> {
    let comps = f.comps.iter().map(|m| alg.reduce(m, to)).collect::<Result<_>>()?;
    Ok(GradedMap { level: to, src: f.src.at_level(to), tgt: f.tgt.at_level(to), degree: f.degree, comps })
}

pub fn reduce_complex(alg: &DeformedAlgebra, c: &PreComplex, to: Level) -> Result<PreComplex> {
    Ok(PreComplex { obj: c.obj.at_level(to), d: reduce_map(alg, &c.d, to)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finring::Tower;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn dual_base() -> DeformedAlgebra {
        // Λ₀ = F_p[x]/(x²) as a trivial deformation over the identity tower
        let t = Arc::new(Tower::trunc_poly(2, 1, 1).unwrap());
        DeformedAlgebra::trivial(
            t,
            vec!["1".into(), "x".into()],
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 0]]],
        )
        .unwrap()
    }

    fn mat(level: Level, ring: &FiniteRing, rows: usize, cols: usize, entries: &[&[u32]]) -> AlgMatrix {
        let e: Vec<Elem> = entries.iter().map(|x| x.to_vec()).collect();
        AlgMatrix::from_entries(level, ring, rows, cols, &e).unwrap()
    }

    #[test]
    fn identity_is_cocycle_for_x_x() {
        let a = dual_base();
        let r = &a.base;
        let obj = GradedObject::new(Level::Base, 0, vec![1, 1, 1]);
        let x = mat(Level::Base, r, 1, 1, &[&[0, 1]]);
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![x.clone(), x, AlgMatrix::zero(Level::Base, r, 0, 1)]).unwrap();
        let c = PreComplex::complex(r, obj.clone(), d).unwrap();
        let id = GradedMap::identity(r, &obj);
        let hc = HomComplex::new(&c, &c).unwrap();
        assert!(hc.delta(r, &id).unwrap().is_zero());
        // δ(d) = 2d² = 0 for a complex
        assert!(hc.delta(r, &c.d).unwrap().is_zero());
        assert_eq!(hc.dim(1, r.rank()), 4);
        assert_eq!(hc.dim(2, r.rank()), 2);
    }

    #[test]
    fn zero_differential_dimensions() {
        let t = Arc::new(Tower::trunc_poly(2, 1, 1).unwrap());
        let a = DeformedAlgebra::scalars(t).unwrap();
        let r = &a.base;
        let obj = GradedObject::new(Level::Base, 0, vec![1, 1]);
        let c = PreComplex::zero(r, &obj);
        let hc = HomComplex::new(&c, &c).unwrap();
        assert_eq!(hc.dim(-1, 1), 1);
        assert_eq!(hc.dim(0, 1), 2);
        assert_eq!(hc.dim(1, 1), 1);
        assert_eq!(hc.degree_range(), -1..=1);
        for n in hc.degree_range() {
            for col in hc.delta_columns(r, n).unwrap() {
                assert!(col.iter().all(|&c| c == 0));
            }
        }
        // shift compatibility: Homⁿ(C, D) and Hom⁰(C, D[n]) have equal size
        let shifted = GradedObject::new(Level::Base, -1, vec![1, 1]);
        let hs = HomComplex::new(&c, &PreComplex::zero(r, &shifted)).unwrap();
        assert_eq!(hs.dim(0, 1), hc.dim(1, 1));
    }

    #[test]
    fn level_mismatch() {
        let t = Arc::new(Tower::zmod(2, 2, 1).unwrap());
        let a = DeformedAlgebra::scalars(t).unwrap();
        let c = PreComplex::zero(&a.base, &GradedObject::new(Level::Base, 0, vec![1]));
        let d = PreComplex::zero(&a.bar, &GradedObject::new(Level::Bar, 0, vec![1]));
        assert!(matches!(HomComplex::new(&c, &d), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn lifting_x_x_squares_to_epsilon() {
        let t = Arc::new(Tower::square_zero(2, 1).unwrap());
        let one = vec![1, 0];
        let zero = vec![0, 0];
        let consts = vec![
            vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
            vec![vec![zero.clone(), one.clone()], vec![vec![0, 1], zero]],
        ];
        let a = DeformedAlgebra::custom(t, vec!["1".into(), "x".into()], consts).unwrap();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let x = mat(Level::Mid, &a.mid, 1, 1, &[&[0, 1]]);
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![x.clone(), x, AlgMatrix::zero(Level::Mid, &a.mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&a.mid, obj, d).unwrap();
        let lifted = graded_lift_complex(&a, &c);
        assert_eq!(reduce_complex(&a, &lifted, Level::Mid).unwrap(), c);
        let sq = lifted.square(&a.bar).unwrap();
        assert_eq!(sq.comps[0].entry(0, 0), &[0, 1, 0, 0]);
        assert!(graded_lift(&a, &GradedMap::zero(&a.mid, &c.obj, &c.obj, 0)).is_zero());
        let id = GradedMap::identity(&a.mid, &c.obj);
        assert_eq!(graded_lift(&a, &id), GradedMap::identity(&a.bar, &lifted.obj));
    }

    fn p3_algebra() -> DeformedAlgebra {
        let t = Arc::new(Tower::zmod(3, 2, 1).unwrap());
        DeformedAlgebra::scalars(t).unwrap()
    }

    fn random_map(r: &FiniteRing, src: &GradedObject, tgt: &GradedObject, n: i32, seed: u64) -> GradedMap {
        let zero = GradedMap::zero(r, src, tgt, n);
        let len = zero.coord_len();
        let mut s = seed;
        let coords: Vec<u32> = (0..len)
            .map(|k| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % r.moduli()[k % r.rank()]) as u32
            })
            .collect();
        GradedMap::from_coords(r, src, tgt, n, &coords)
    }

    proptest! {
        #[test]
        fn leibniz_rule(seed in any::<u64>(), m in -1i32..2, n in -1i32..2) {
            let a = p3_algebra();
            let r = &a.bar;
            let c_obj = GradedObject::new(Level::Bar, 0, vec![1, 2, 1]);
            let d_obj = GradedObject::new(Level::Bar, -1, vec![2, 1, 1]);
            let e_obj = GradedObject::new(Level::Bar, 0, vec![1, 1]);
            let c = PreComplex::new(c_obj.clone(), random_map(r, &c_obj, &c_obj, 1, seed)).unwrap();
            let d = PreComplex::new(d_obj.clone(), random_map(r, &d_obj, &d_obj, 1, seed ^ 1)).unwrap();
            let e = PreComplex::new(e_obj.clone(), random_map(r, &e_obj, &e_obj, 1, seed ^ 2)).unwrap();
            let f = random_map(r, &c_obj, &d_obj, m, seed ^ 3);
            let g = random_map(r, &d_obj, &e_obj, n, seed ^ 4);
            let gf = g.compose(r, &f).unwrap();
            let lhs = delta(r, &c.d, &e.d, &gf).unwrap();
            let dg_f = delta(r, &d.d, &e.d, &g).unwrap().compose(r, &f).unwrap();
            let g_df = g.compose(r, &delta(r, &c.d, &d.d, &f).unwrap()).unwrap();
            let rhs = if n.rem_euclid(2) == 1 { dg_f.sub(r, &g_df).unwrap() } else { dg_f.add(r, &g_df).unwrap() };
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn delta_squares_to_commutator_with_curvature(seed in any::<u64>(), n in -1i32..2) {
            // δδ(f) = d_D² f − f d_C², hence zero for complexes
            let a = p3_algebra();
            let r = &a.bar;
            let obj = GradedObject::new(Level::Bar, 0, vec![1, 2, 1]);
            let c = PreComplex::new(obj.clone(), random_map(r, &obj, &obj, 1, seed)).unwrap();
            let f = random_map(r, &obj, &obj, n, seed ^ 9);
            let ddf = delta(r, &c.d, &c.d, &delta(r, &c.d, &c.d, &f).unwrap()).unwrap();
            let sq = c.square(r).unwrap();
            let expect = sq.compose(r, &f).unwrap().sub(r, &f.compose(r, &sq).unwrap()).unwrap();
            prop_assert_eq!(ddf, expect);
        }

        #[test]
        fn homotopy_predicate_matches_definition(seed in any::<u64>()) {
            let a = p3_algebra();
            let r = &a.bar;
            let obj = GradedObject::new(Level::Bar, 0, vec![1, 1]);
            let c = PreComplex::new(obj.clone(), random_map(r, &obj, &obj, 1, seed)).unwrap();
            let h = random_map(r, &obj, &obj, -1, seed ^ 5);
            let f = random_map(r, &obj, &obj, 0, seed ^ 6);
            let g = f.add(r, &delta(r, &c.d, &c.d, &h).unwrap()).unwrap();
            prop_assert!(is_homotopy(r, &c, &c, &h, &f, &g).unwrap());
            let g2 = g.add(r, &GradedMap::identity(r, &obj)).unwrap();
            prop_assert!(!is_homotopy(r, &c, &c, &h, &f, &g2).unwrap());
        }
    }
}
