//! Finite rings presented by an additive basis and a multiplication table.

use std::collections::HashSet;
use std::sync::Arc;

use super::pgroup::{pow, SubgroupBasis};
use crate::error::{Error, Result};

/// Ring element: coefficient tuple over the additive basis of its ring.
pub type Elem = Vec<u32>;

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// A finite ring whose additive group is `⊕ Z/p^{e_i}` on basis `b_0 = 1, b_1, ...`.
///
/// Also used for the (possibly noncommutative) algebras over the tower rings:
/// an algebra with basis `a_0..a_{k-1}` over a ring with basis `b_0..b_{m-1}`
/// is stored with additive basis `a_i b_j` at index `i * m + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRing {
    p: u32,
    exps: Vec<u32>,
    moduli: Vec<u64>,
    commutative: bool,
    /// Dense table: `dense[(i * m + j) * m + k]` is the coefficient of `b_k` in `b_i b_j`.
    dense: Vec<u32>,
    /// Sparse view of the same table, per pair `(i, j)`.
    sparse: Vec<Vec<(usize, u64)>>,
}

impl FiniteRing {
    /// Builds and validates a ring. `table[i][j]` is the coefficient vector of
    /// `b_i b_j`; coefficients are reduced modulo the additive orders.
    pub fn new(p: u32, exps: Vec<u32>, table: Vec<Vec<Elem>>, commutative: bool) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        let m = exps.len();
        if m == 0 || exps.iter().any(|&e| e == 0) {
            return Err(Error::BadDimensions("additive orders must be p^e with e >= 1".into()));
        }
        if exps.iter().sum::<u32>() > 40 {
            return Err(Error::RingTooLarge(format!("log_p of order {}", exps.iter().sum::<u32>())));
        }
        if table.len() != m || table.iter().any(|row| row.len() != m || row.iter().any(|v| v.len() != m)) {
            return Err(Error::BadDimensions(format!("table must be {m} x {m} x {m}")));
        }
        let moduli: Vec<u64> = exps.iter().map(|&e| pow(p, e)).collect();
        let mut dense = vec![0u32; m * m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    dense[(i * m + j) * m + k] = (table[i][j][k] as u64 % moduli[k]) as u32;
                }
            }
        }
        let sparse = Self::sparse_of(&dense, m);
        let ring = FiniteRing { p, exps, moduli, commutative, dense, sparse };
        ring.validate()?;
        Ok(ring)
    }

    fn sparse_of(dense: &[u32], m: usize) -> Vec<Vec<(usize, u64)>> {
        (0..m * m)
            .map(|ij| {
                (0..m)
                    .filter(|&k| dense[ij * m + k] != 0)
                    .map(|k| (k, dense[ij * m + k] as u64))
                    .collect()
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let m = self.rank();
        for i in 0..m {
            let bi = self.basis(i);
            if self.mul(&self.basis(0), &bi) != bi || self.mul(&bi, &self.basis(0)) != bi {
                return Err(Error::NotUnital(format!("b_0 does not act as unit on b_{i}")));
            }
        }
        for i in 0..m {
            let bi = self.basis(i);
            // b_i b_j must be killed by the additive orders of both factors
            for j in 0..m {
                let prod = self.mul(&bi, &self.basis(j));
                let o = self.exps[i].min(self.exps[j]);
                if !self.is_zero(&self.scale(&prod, pow(self.p, o))) {
                    return Err(Error::InvalidTable(format!(
                        "b_{i} b_{j} is not annihilated by the additive orders of its factors"
                    )));
                }
                if self.commutative && prod != self.mul(&self.basis(j), &bi) {
                    return Err(Error::InvalidTable(format!("b_{i} b_{j} != b_{j} b_{i}")));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let ij = self.mul(&self.basis(i), &self.basis(j));
                for k in 0..m {
                    let bk = self.basis(k);
                    let left = self.mul(&ij, &bk);
                    let right = self.mul(&self.basis(i), &self.mul(&self.basis(j), &bk));
                    if left != right {
                        return Err(Error::NotAssociative(format!("(b_{i} b_{j}) b_{k} != b_{i} (b_{j} b_{k})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The prime field `F_p` as a ring.
    pub fn prime_field(p: u32) -> Result<Self> {
        Self::new(p, vec![1], vec![vec![vec![1]]], true)
    }

    /// `Z/p^a`.
    pub fn zmod(p: u32, a: u32) -> Result<Self> {
        Self::new(p, vec![a], vec![vec![vec![1]]], true)
    }

    /// `F_p[t]/(t^a)` on basis `1, t, ..., t^{a-1}`.
    pub fn truncated_poly(p: u32, a: u32) -> Result<Self> {
        let m = a as usize;
        let mut table = vec![vec![vec![0u32; m]; m]; m];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i + j < m {
                    v[i + j] = 1;
                }
            }
        }
        Self::new(p, vec![1; m], table, true)
    }

    /// `F_p[x_1..x_r]/(x_1..x_r)^2` on basis `1, x_1, ..., x_r`.
    pub fn square_zero(p: u32, r: u32) -> Result<Self> {
        let m = r as usize + 1;
        let mut table = vec![vec![vec![0u32; m]; m]; m];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i == 0 {
                    v[j] = 1;
                } else if j == 0 {
                    v[i] = 1;
                }
            }
        }
        Self::new(p, vec![1; m], table, true)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of additive basis elements.
    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    /// `log_p` of the cardinality.
    pub fn log_card(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn cardinality(&self) -> u128 {
        (self.p as u128).pow(self.log_card())
    }

    /// Maximal additive order exponent (characteristic is `p^top`).
    pub fn top_exp(&self) -> u32 {
        self.exps.iter().copied().max().unwrap_or(0)
    }

    /// Coefficient of `b_k` in `b_i b_j`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> u32 {
        let m = self.rank();
        self.dense[(i * m + j) * m + k]
    }

    /// Full table as nested vectors (`table[i][j]` = coefficients of `b_i b_j`).
    pub fn table(&self) -> Vec<Vec<Elem>> {
        let m = self.rank();
        (0..m)
            .map(|i| (0..m).map(|j| self.dense[(i * m + j) * m..(i * m + j + 1) * m].to_vec()).collect())
            .collect()
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.rank()]
    }

    pub fn one(&self) -> Elem {
        self.basis(0)
    }

    pub fn basis(&self, i: usize) -> Elem {
        let mut v = self.zero();
        v[i] = 1;
        v
    }

    pub fn is_zero(&self, a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Reduces arbitrary nonnegative coefficients into canonical form.
    pub fn reduce(&self, a: &[u64]) -> Elem {
        a.iter().zip(&self.moduli).map(|(&c, &q)| (c % q) as u32).collect()
    }

    /// Canonical form of an element given by arbitrary integer coefficients.
    pub fn from_ints(&self, a: &[i64]) -> Elem {
        a.iter()
            .zip(&self.moduli)
            .map(|(&c, &q)| c.rem_euclid(q as i64) as u32)
            .collect()
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Elem {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((&x, &y), &q)| ((x as u64 + y as u64) % q) as u32)
            .collect()
    }

    pub fn add_assign(&self, a: &mut [u32], b: &[u32]) {
        for ((x, &y), &q) in a.iter_mut().zip(b).zip(&self.moduli) {
            *x = ((*x as u64 + y as u64) % q) as u32;
        }
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Elem {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((&x, &y), &q)| ((x as u64 + q - y as u64) % q) as u32)
            .collect()
    }

    pub fn neg(&self, a: &[u32]) -> Elem {
        a.iter()
            .zip(&self.moduli)
            .map(|(&x, &q)| ((q - x as u64) % q) as u32)
            .collect()
    }

    /// Integer multiple `n * a`.
    pub fn scale(&self, a: &[u32], n: u64) -> Elem {
        a.iter()
            .zip(&self.moduli)
            .map(|(&x, &q)| ((x as u64 % q) * (n % q) % q) as u32)
            .collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Elem {
        let mut acc = vec![0u64; self.rank()];
        self.mul_acc(&mut acc, a, b);
        self.reduce(&acc)
    }

    /// Adds `a * b` into an unreduced accumulator. The accumulator must be
    /// reduced before it grows past `2^63`; callers reduce after each entry.
    pub fn mul_acc(&self, acc: &mut [u64], a: &[u32], b: &[u32]) {
        let m = self.rank();
        let top = pow(self.p, self.top_exp());
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let xy = x as u64 * y as u64 % top;
                for &(k, c) in &self.sparse[i * m + j] {
                    acc[k] += xy * c;
                }
            }
        }
    }

    pub fn pow_elem(&self, a: &[u32], n: u32) -> Elem {
        let mut r = self.one();
        for _ in 0..n {
            r = self.mul(&r, a);
        }
        r
    }

    /// Element with the given index in lexicographic order (coordinate 0 most significant).
    pub fn element_at(&self, mut idx: u128) -> Elem {
        let mut out = vec![0u32; self.rank()];
        for k in (0..self.rank()).rev() {
            let q = self.moduli[k] as u128;
            out[k] = (idx % q) as u32;
            idx /= q;
        }
        out
    }

    pub fn index_of(&self, a: &[u32]) -> u128 {
        a.iter()
            .zip(&self.moduli)
            .fold(0u128, |acc, (&c, &q)| acc * q as u128 + c as u128)
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.cardinality()).map(move |i| self.element_at(i))
    }

    /// Whether `a` has a two-sided inverse (by enumeration).
    pub fn inverse(&self, a: &[u32]) -> Option<Elem> {
        let one = self.one();
        self.elements().find(|b| self.mul(a, b) == one && self.mul(b, a) == one)
    }

    /// Whether `a` is nilpotent.
    pub fn is_nilpotent(&self, a: &[u32]) -> bool {
        let mut x = a.to_vec();
        for _ in 0..=self.log_card() {
            if self.is_zero(&x) {
                return true;
            }
            x = self.mul(&x, a);
        }
        self.is_zero(&x)
    }
}

/// A ring homomorphism given by the images of the source basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingMap {
    pub src: Arc<FiniteRing>,
    pub tgt: Arc<FiniteRing>,
    pub images: Vec<Elem>,
}

impl RingMap {
    /// Validates additivity, unitality, multiplicativity and surjectivity.
    pub fn surjection(src: Arc<FiniteRing>, tgt: Arc<FiniteRing>, images: Vec<Elem>) -> Result<Self> {
        if src.p() != tgt.p() {
            return Err(Error::CharMismatch(src.p(), tgt.p()));
        }
        if images.len() != src.rank() || images.iter().any(|v| v.len() != tgt.rank()) {
            return Err(Error::BadDimensions("ring map images have wrong shape".into()));
        }
        let images: Vec<Elem> = images.iter().map(|v| tgt.reduce(&v.iter().map(|&c| c as u64).collect::<Vec<_>>())).collect();
        let map = RingMap { src, tgt, images };
        let (s, t) = (&map.src, &map.tgt);
        for (i, im) in map.images.iter().enumerate() {
            if !t.is_zero(&t.scale(im, s.moduli()[i])) {
                return Err(Error::NotSurjective(format!("image of b_{i} violates its additive order")));
            }
        }
        if map.images[0] != t.one() {
            return Err(Error::NotSurjective("unit is not sent to unit".into()));
        }
        for i in 0..s.rank() {
            for j in 0..s.rank() {
                let lhs = map.apply(&s.mul(&s.basis(i), &s.basis(j)));
                let rhs = t.mul(&map.images[i], &map.images[j]);
                if lhs != rhs {
                    return Err(Error::NotSurjective(format!("not multiplicative on (b_{i}, b_{j})")));
                }
            }
        }
        let image = SubgroupBasis::new(t.p(), t.exps(), &map.images, false)?;
        if image.log_order() != t.log_card() {
            return Err(Error::NotSurjective("map is not onto".into()));
        }
        Ok(map)
    }

    pub fn identity(r: Arc<FiniteRing>) -> Self {
        let images = (0..r.rank()).map(|i| r.basis(i)).collect();
        RingMap { src: r.clone(), tgt: r, images }
    }

    pub fn apply(&self, a: &[u32]) -> Elem {
        let mut acc = vec![0u64; self.tgt.rank()];
        for (&c, im) in a.iter().zip(&self.images) {
            if c == 0 {
                continue;
            }
            for (x, &y) in acc.iter_mut().zip(im) {
                *x += c as u64 * y as u64;
            }
        }
        self.tgt.reduce(&acc)
    }

    pub fn compose(&self, then: &RingMap) -> RingMap {
        RingMap {
            src: self.src.clone(),
            tgt: then.tgt.clone(),
            images: self.images.iter().map(|v| then.apply(v)).collect(),
        }
    }

    /// Kernel elements, by enumeration of the source.
    pub fn kernel_elements(&self) -> Vec<Elem> {
        self.src.elements().filter(|a| self.tgt.is_zero(&self.apply(a))).collect()
    }

    /// Lexicographically least preimage of each target basis element.
    pub fn minimal_section(&self) -> Vec<Elem> {
        let mut found: Vec<Option<Elem>> = vec![None; self.tgt.rank()];
        let mut missing = self.tgt.rank();
        for a in self.src.elements() {
            let b = self.apply(&a);
            if b.iter().filter(|&&c| c != 0).count() == 1 {
                let k = b.iter().position(|&c| c != 0).unwrap();
                if b[k] == 1 && found[k].is_none() {
                    found[k] = Some(a);
                    missing -= 1;
                    if missing == 0 {
                        break;
                    }
                }
            }
        }
        found.into_iter().map(|x| x.expect("surjection has preimages")).collect()
    }
}

/// Fiber product `R' x_R R''` with its two projections.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub ring: Arc<FiniteRing>,
    pub to_first: RingMap,
    pub to_second: RingMap,
    pairs: SubgroupBasis,
}

impl FiberProduct {
    /// Element of the fiber product corresponding to a compatible pair.
    pub fn from_pair(&self, a: &[u32], b: &[u32]) -> Option<Elem> {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        self.pairs.coords(&v)
    }

    /// The pair `(a, b)` underlying an element.
    pub fn to_pair(&self, x: &[u32]) -> (Elem, Elem) {
        (self.to_first.apply(x), self.to_second.apply(x))
    }
}

pub fn ring_fiber_product(f1: &RingMap, f2: &RingMap) -> Result<FiberProduct> {
    let (r1, r2) = (&f1.src, &f2.src);
    if r1.p() != r2.p() {
        return Err(Error::CharMismatch(r1.p(), r2.p()));
    }
    if f1.tgt != f2.tgt {
        return Err(Error::TargetMismatch);
    }
    let p = r1.p();
    let mut exps = r1.exps().to_vec();
    exps.extend_from_slice(r2.exps());
    let pair = |a: &[u32], b: &[u32]| -> Elem {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        v
    };
    let sec2 = f2.minimal_section();
    let lift2 = |y: &[u32]| -> Elem {
        let mut acc = vec![0u64; r2.rank()];
        for (&c, s) in y.iter().zip(&sec2) {
            for (x, &z) in acc.iter_mut().zip(s) {
                *x += c as u64 * z as u64;
            }
        }
        r2.reduce(&acc)
    };
    let mut gens = vec![pair(&r1.one(), &r2.one())];
    for u in 0..r1.rank() {
        let b = r1.basis(u);
        gens.push(pair(&b, &lift2(&f1.apply(&b))));
    }
    let ker2 = f2.kernel_elements();
    let ker_basis = SubgroupBasis::new(p, r2.exps(), &ker2, false)?;
    for k in &ker_basis.basis {
        gens.push(pair(&r2.zero(), k));
    }
    let pairs = SubgroupBasis::new(p, &exps, &gens, true)?;
    let n = pairs.basis.len();
    let m1 = r1.rank();
    let mut table = vec![vec![vec![0u32; n]; n]; n];
    for s in 0..n {
        for t in 0..n {
            let (a1, b1) = pairs.basis[s].split_at(m1);
            let (a2, b2) = pairs.basis[t].split_at(m1);
            let prod = pair(&r1.mul(a1, a2), &r2.mul(b1, b2));
            table[s][t] = pairs
                .coords(&prod)
                .ok_or_else(|| Error::Validation("fiber product is not closed under multiplication".into()))?;
        }
    }
    let commutative = r1.is_commutative() && r2.is_commutative();
    let ring = Arc::new(FiniteRing::new(p, pairs.orders.clone(), table, commutative)?);
    let to_first = RingMap::surjection(
        ring.clone(),
        r1.clone(),
        pairs.basis.iter().map(|v| v[..m1].to_vec()).collect(),
    )?;
    let to_second = RingMap::surjection(
        ring.clone(),
        r2.clone(),
        pairs.basis.iter().map(|v| v[m1..].to_vec()).collect(),
    )?;
    Ok(FiberProduct { ring, to_first, to_second, pairs })
}

/// Greedy `F_p`-basis of an elementary abelian subgroup given by its elements.
/// Candidates are scanned by (support size, first support position, coordinates).
pub fn elementary_basis(ring: &FiniteRing, elems: &[Elem]) -> Vec<Elem> {
    let mut cands: Vec<&Elem> = elems.iter().filter(|e| !ring.is_zero(e)).collect();
    cands.sort_by_key(|e| {
        let nnz = e.iter().filter(|&&c| c != 0).count();
        let first = e.iter().position(|&c| c != 0).unwrap_or(usize::MAX);
        (nnz, first, (*e).clone())
    });
    let mut span: HashSet<Elem> = HashSet::from([ring.zero()]);
    let mut basis = Vec::new();
    for c in cands {
        if span.contains(c) {
            continue;
        }
        let mut next = HashSet::with_capacity(span.len() * ring.p() as usize);
        for s in &span {
            let mut x = s.clone();
            for _ in 0..ring.p() {
                next.insert(x.clone());
                x = ring.add(&x, c);
            }
        }
        span = next;
        basis.push(c.clone());
    }
    basis
}
