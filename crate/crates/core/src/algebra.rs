//! Free algebras over the tower rings and matrices over them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finring::{Elem, FiniteRing, RingMap, Tower};

/// Which ring a matrix lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Bar,
    Mid,
    Base,
    /// An algebra outside the tower (scalar extensions over test rings).
    Free,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::Bar => "bar",
            Level::Mid => "mid",
            Level::Base => "base",
            Level::Free => "free",
        };
        f.write_str(s)
    }
}

impl Level {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bar" => Ok(Level::Bar),
            "mid" => Ok(Level::Mid),
            "base" => Ok(Level::Base),
            "free" => Ok(Level::Free),
            _ => Err(Error::Parse(format!("unknown level {s:?}"))),
        }
    }
}

/// How the algebra was specified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    /// `R̄ ⊗ Λ₀` for an `F_p`-algebra `Λ₀`.
    Trivial,
    /// Structure constants over `R̄`.
    Custom,
}

/// Multiplication table of a free algebra over a commutative ring:
/// `consts[i][j][l]` is the ring coefficient of `a_l` in `a_i a_j`.
pub type StructureConstants = Vec<Vec<Vec<Elem>>>;

/// Expands a free algebra over `ring` into a ring on the additive basis
/// `a_i b_u` (index `i * m + u`).
pub fn scalar_extension(ring: &FiniteRing, consts: &StructureConstants) -> Result<FiniteRing> {
    let k = consts.len();
    let m = ring.rank();
    if k == 0 || consts.iter().any(|r| r.len() != k || r.iter().any(|v| v.len() != k || v.iter().any(|e| e.len() != m))) {
        return Err(Error::BadDimensions(format!("structure constants must be {k} x {k} x {k} ring elements")));
    }
    let n = k * m;
    let mut exps = Vec::with_capacity(n);
    for _ in 0..k {
        exps.extend_from_slice(ring.exps());
    }
    let mut table = vec![vec![vec![0u32; n]; n]; n];
    for i in 0..k {
        for u in 0..m {
            for j in 0..k {
                for v in 0..m {
                    let buv = ring.mul(&ring.basis(u), &ring.basis(v));
                    let out = &mut table[i * m + u][j * m + v];
                    for l in 0..k {
                        let c = ring.mul(&buv, &consts[i][j][l]);
                        out[l * m..(l + 1) * m].copy_from_slice(&c);
                    }
                }
            }
        }
    }
    FiniteRing::new(ring.p(), exps, table, false).map_err(|e| match e {
        Error::InvalidTable(s) => Error::NotAssociative(s),
        other => other,
    })
}

/// Reduction of a free algebra along a ring map, applied per algebra basis element.
pub fn extend_ring_map(map: &RingMap, k: usize, src: Arc<FiniteRing>, tgt: Arc<FiniteRing>) -> Result<RingMap> {
    let m = map.src.rank();
    let mt = map.tgt.rank();
    let mut images = Vec::with_capacity(k * m);
    for i in 0..k {
        for u in 0..m {
            let mut v = vec![0u32; k * mt];
            v[i * mt..(i + 1) * mt].copy_from_slice(&map.images[u]);
            images.push(v);
        }
    }
    RingMap::surjection(src, tgt, images)
}

/// A free algebra `Λ̄` over `R̄` with its base changes `Λ` and `Λ₀`.
#[derive(Clone, Debug)]
pub struct DeformedAlgebra {
    pub tower: Arc<Tower>,
    pub kind: AlgebraKind,
    pub names: Vec<String>,
    /// Structure constants over `R̄`.
    pub consts: StructureConstants,
    pub bar: Arc<FiniteRing>,
    pub mid: Arc<FiniteRing>,
    pub base: Arc<FiniteRing>,
    /// `Λ̄ → Λ`.
    pub to_mid: RingMap,
    /// `Λ → Λ₀`.
    pub to_base: RingMap,
}

impl DeformedAlgebra {
    /// Trivial deformation of an `F_p`-algebra with constants `base_consts[i][j][l] ∈ F_p`.
    pub fn trivial(tower: Arc<Tower>, names: Vec<String>, base_consts: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let bar = &tower.bar;
        let consts = base_consts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.iter().map(|&c| bar.scale(&bar.one(), (c % tower.p()) as u64)).collect())
                    .collect()
            })
            .collect();
        Self::build(tower, AlgebraKind::Trivial, names, consts)
    }

    /// The rank-one algebra `R̄` itself.
    pub fn scalars(tower: Arc<Tower>) -> Result<Self> {
        Self::trivial(tower, vec!["1".into()], vec![vec![vec![1]]])
    }

    pub fn custom(tower: Arc<Tower>, names: Vec<String>, consts: StructureConstants) -> Result<Self> {
        Self::build(tower, AlgebraKind::Custom, names, consts)
    }

    fn build(tower: Arc<Tower>, kind: AlgebraKind, names: Vec<String>, consts: StructureConstants) -> Result<Self> {
        let k = consts.len();
        if names.len() != k {
            return Err(Error::BadDimensions(format!("{} basis names for rank {k}", names.len())));
        }
        let consts: StructureConstants = consts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.iter().map(|e| tower.bar.reduce(&e.iter().map(|&c| c as u64).collect::<Vec<_>>())).collect())
                    .collect()
            })
            .collect();
        let one = tower.bar.one();
        for i in 0..k {
            for l in 0..k {
                let want = if i == l { one.clone() } else { tower.bar.zero() };
                if consts[0][i][l] != want || consts[i][0][l] != want {
                    return Err(Error::NotUnital(format!("a_0 does not act as unit on a_{i}")));
                }
            }
        }
        let mid_consts = map_consts(&consts, &tower.pi_bar);
        let base_consts = map_consts(&mid_consts, &tower.pi);
        let bar = Arc::new(scalar_extension(&tower.bar, &consts)?);
        let mid = Arc::new(scalar_extension(&tower.mid, &mid_consts)?);
        let base = Arc::new(scalar_extension(&tower.base, &base_consts)?);
        let to_mid = extend_ring_map(&tower.pi_bar, k, bar.clone(), mid.clone())?;
        let to_base = extend_ring_map(&tower.pi, k, mid.clone(), base.clone())?;
        Ok(DeformedAlgebra { tower, kind, names, consts, bar, mid, base, to_mid, to_base })
    }

    /// Algebra rank `k`.
    pub fn rank(&self) -> usize {
        self.consts.len()
    }

    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    pub fn ring(&self, level: Level) -> &Arc<FiniteRing> {
        match level {
            Level::Bar => &self.bar,
            Level::Mid => &self.mid,
            Level::Base | Level::Free => &self.base,
        }
    }

    /// Structure constants over `Λ₀` as `F_p` values.
    pub fn base_consts(&self) -> Vec<Vec<Vec<u32>>> {
        self.consts
            .iter()
            .map(|row| row.iter().map(|v| v.iter().map(|e| self.tower.to_base(e)[0]).collect()).collect())
            .collect()
    }

    /// Entrywise section `Λ → Λ̄` induced by `σ` on coefficients.
    pub fn sigma(&self, x: &[u32]) -> Elem {
        let m = self.tower.mid.rank();
        let mb = self.tower.bar.rank();
        let mut out = vec![0u32; self.rank() * mb];
        for i in 0..self.rank() {
            out[i * mb..(i + 1) * mb].copy_from_slice(&self.tower.sigma(&x[i * m..(i + 1) * m]));
        }
        out
    }

    /// Integer lift `Λ₀ → Λ̄` of an `F_p`-combination of the algebra basis.
    pub fn lift_base(&self, x: &[u32]) -> Elem {
        let mb = self.tower.bar.rank();
        let mut out = vec![0u32; self.rank() * mb];
        for (i, &c) in x.iter().enumerate() {
            out[i * mb] = c;
        }
        self.bar.reduce(&out.iter().map(|&c| c as u64).collect::<Vec<_>>())
    }

    /// Coordinates in `J ⊗ Λ₀` of an element of `Ker(Λ̄ → Λ)`: one `Λ₀`
    /// element per `J`-basis element.
    pub fn kernel_coords_elem(&self, x: &[u32]) -> Option<Vec<Elem>> {
        let mb = self.tower.bar.rank();
        let jd = self.tower.j_dim();
        let mut out = vec![vec![0u32; self.rank()]; jd];
        for i in 0..self.rank() {
            let c = self.tower.j_coords(&x[i * mb..(i + 1) * mb])?;
            for t in 0..jd {
                out[t][i] = c[t];
            }
        }
        Some(out)
    }

    /// Inverse of [`Self::kernel_coords_elem`]: `Σ_t j_t · lift(c_t)`.
    pub fn from_kernel_elem(&self, coords: &[Elem]) -> Elem {
        let mut acc = self.bar.zero();
        for (t, c) in coords.iter().enumerate() {
            let j = self.tower.j_element(&basis_vec(self.tower.j_dim(), t));
            let j_alg = self.scalar(&j);
            acc = self.bar.add(&acc, &self.bar.mul(&j_alg, &self.lift_base(c)));
        }
        acc
    }

    /// Embeds a scalar of `R̄` into `Λ̄` as a multiple of `a_0`.
    pub fn scalar(&self, r: &[u32]) -> Elem {
        let mut out = self.bar.zero();
        out[..r.len()].copy_from_slice(r);
        out
    }
}

fn basis_vec(n: usize, t: usize) -> Vec<u32> {
    (0..n).map(|i| u32::from(i == t)).collect()
}

fn map_consts(consts: &StructureConstants, map: &RingMap) -> StructureConstants {
    consts
        .iter()
        .map(|row| row.iter().map(|v| v.iter().map(|e| map.apply(e)).collect()).collect())
        .collect()
}

/// Matrix with entries in a ring given by its additive basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgMatrix {
    pub level: Level,
    pub rows: usize,
    pub cols: usize,
    /// Length of each entry (additive rank of the entry ring).
    pub width: usize,
    /// Row-major entries, `width` coefficients each.
    pub data: Vec<u32>,
}

impl AlgMatrix {
    pub fn zero(level: Level, ring: &FiniteRing, rows: usize, cols: usize) -> Self {
        let width = ring.rank();
        AlgMatrix { level, rows, cols, width, data: vec![0; rows * cols * width] }
    }

    pub fn identity(level: Level, ring: &FiniteRing, n: usize) -> Self {
        let mut m = Self::zero(level, ring, n, n);
        for i in 0..n {
            m.set(i, i, &ring.one());
        }
        m
    }

    pub fn from_entries(level: Level, ring: &FiniteRing, rows: usize, cols: usize, entries: &[Elem]) -> Result<Self> {
        if entries.len() != rows * cols || entries.iter().any(|e| e.len() != ring.rank()) {
            return Err(Error::ShapeMismatch(format!("expected {rows} x {cols} entries of length {}", ring.rank())));
        }
        let mut m = Self::zero(level, ring, rows, cols);
        for (idx, e) in entries.iter().enumerate() {
            let r = ring.reduce(&e.iter().map(|&c| c as u64).collect::<Vec<_>>());
            m.set(idx / cols, idx % cols, &r);
        }
        Ok(m)
    }

    pub fn entry(&self, r: usize, c: usize) -> &[u32] {
        let o = (r * self.cols + c) * self.width;
        &self.data[o..o + self.width]
    }

    pub fn set(&mut self, r: usize, c: usize, x: &[u32]) {
        let o = (r * self.cols + c) * self.width;
        self.data[o..o + self.width].copy_from_slice(x);
    }

    pub fn entries(&self) -> Vec<Elem> {
        self.data.chunks(self.width.max(1)).map(<[u32]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch { expected: self.level.to_string(), found: other.level.to_string() });
        }
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    pub fn add(&self, ring: &FiniteRing, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (x, (&y, &q)) in out.data.iter_mut().zip(other.data.iter().zip(ring.moduli().iter().cycle())) {
            *x = ((*x as u64 + y as u64) % q) as u32;
        }
        Ok(out)
    }

    pub fn sub(&self, ring: &FiniteRing, other: &Self) -> Result<Self> {
        self.add(ring, &other.neg(ring))
    }

    pub fn neg(&self, ring: &FiniteRing) -> Self {
        let mut out = self.clone();
        for (x, &q) in out.data.iter_mut().zip(ring.moduli().iter().cycle()) {
            *x = ((q - *x as u64) % q) as u32;
        }
        out
    }

    /// Integer multiple `n · self`.
    pub fn scale_int(&self, ring: &FiniteRing, n: u64) -> Self {
        let mut out = self.clone();
        for (x, &q) in out.data.iter_mut().zip(ring.moduli().iter().cycle()) {
            *x = (*x as u64 % q * (n % q) % q) as u32;
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, ring: &FiniteRing, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::LevelMismatch { expected: self.level.to_string(), found: other.level.to_string() });
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!("cannot compose {:?} after {:?}", self.shape(), other.shape())));
        }
        let mut out = Self::zero(self.level, ring, self.rows, other.cols);
        let mut acc = vec![0u64; self.width];
        for r in 0..self.rows {
            for c in 0..other.cols {
                acc.iter_mut().for_each(|a| *a = 0);
                for k in 0..self.cols {
                    ring.mul_acc(&mut acc, self.entry(r, k), other.entry(k, c));
                    if k % 64 == 63 {
                        let red = ring.reduce(&acc);
                        acc.iter_mut().zip(&red).for_each(|(a, &b)| *a = b as u64);
                    }
                }
                out.set(r, c, &ring.reduce(&acc));
            }
        }
        Ok(out)
    }

    /// Left multiplication of every entry by a ring element.
    pub fn scale_left(&self, ring: &FiniteRing, x: &[u32]) -> Self {
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, &ring.mul(x, self.entry(r, c)));
            }
        }
        out
    }

    /// Entrywise image under a ring map.
    pub fn map(&self, map: &RingMap, level: Level) -> Self {
        let mut out = Self::zero(level, &map.tgt, self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, &map.apply(self.entry(r, c)));
            }
        }
        out
    }

    /// Entrywise application of an arbitrary function between rings.
    pub fn map_with(&self, level: Level, width: usize, f: impl Fn(&[u32]) -> Elem) -> Self {
        let mut data = Vec::with_capacity(self.rows * self.cols * width);
        for r in 0..self.rows {
            for c in 0..self.cols {
                data.extend(f(self.entry(r, c)));
            }
        }
        AlgMatrix { level, rows: self.rows, cols: self.cols, width, data }
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, ring: &FiniteRing, other: &Self) -> Self {
        let mut out = Self::zero(self.level, ring, self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.entry(r, c));
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.set(self.rows + r, self.cols + c, other.entry(r, c));
            }
        }
        out
    }

    /// Submatrix of the given row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = AlgMatrix {
            level: self.level,
            rows: rows.len(),
            cols: cols.len(),
            width: self.width,
            data: vec![0; rows.len() * cols.len() * self.width],
        };
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out.set(i, j, self.entry(r, c));
            }
        }
        out
    }
}

impl DeformedAlgebra {
    /// Reduction of a bar matrix to the middle level.
    pub fn reduce_to_mid(&self, m: &AlgMatrix) -> AlgMatrix {
        m.map(&self.to_mid, Level::Mid)
    }

    /// Reduction of a middle matrix to the base level.
    pub fn reduce_to_base(&self, m: &AlgMatrix) -> AlgMatrix {
        m.map(&self.to_base, Level::Base)
    }

    /// Reduction from `from` down to `to` (identity when equal).
    pub fn reduce(&self, m: &AlgMatrix, to: Level) -> Result<AlgMatrix> {
        match (m.level, to) {
            (a, b) if a == b => Ok(m.clone()),
            (Level::Bar, Level::Mid) => Ok(self.reduce_to_mid(m)),
            (Level::Bar, Level::Base) => Ok(self.reduce_to_base(&self.reduce_to_mid(m))),
            (Level::Mid, Level::Base) => Ok(self.reduce_to_base(m)),
            (a, b) => Err(Error::LevelMismatch { expected: b.to_string(), found: a.to_string() }),
        }
    }

    /// Entrywise `σ`-lift of a middle matrix.
    pub fn sigma_lift(&self, m: &AlgMatrix) -> AlgMatrix {
        m.map_with(Level::Bar, self.bar.rank(), |x| self.sigma(x))
    }

    /// Entrywise integer lift of a base matrix to the bar level.
    pub fn lift_base_matrix(&self, m: &AlgMatrix) -> AlgMatrix {
        m.map_with(Level::Bar, self.bar.rank(), |x| self.lift_base(x))
    }

    /// Entrywise integer lift of a base matrix to the middle level.
    pub fn lift_base_matrix_mid(&self, m: &AlgMatrix) -> AlgMatrix {
        let lifted = self.lift_base_matrix(m);
        self.reduce_to_mid(&lifted)
    }

    /// Kernel coordinates of a bar matrix reducing to zero: one base matrix per `J`-basis element.
    pub fn kernel_coords(&self, m: &AlgMatrix) -> Result<Vec<AlgMatrix>> {
        let jd = self.tower.j_dim();
        let mut out = vec![AlgMatrix::zero(Level::Base, &self.base, m.rows, m.cols); jd];
        for r in 0..m.rows {
            for c in 0..m.cols {
                let coords = self.kernel_coords_elem(m.entry(r, c)).ok_or(Error::NotInKernel)?;
                for (t, x) in coords.iter().enumerate() {
                    out[t].set(r, c, x);
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`Self::kernel_coords`].
    pub fn from_kernel_coords(&self, coords: &[AlgMatrix], rows: usize, cols: usize) -> AlgMatrix {
        let mut out = AlgMatrix::zero(Level::Bar, &self.bar, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let parts: Vec<Elem> = coords.iter().map(|m| m.entry(r, c).to_vec()).collect();
                out.set(r, c, &self.from_kernel_elem(&parts));
            }
        }
        out
    }
}
