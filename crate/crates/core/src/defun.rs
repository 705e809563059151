//! Deformation functors of a differential over artinian local `F_p`-algebras:
//! strict lifts, their isomorphism classes, homotopy deformations, tangent
//! spaces and the Schlessinger conditions on concrete rings.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::algebra::{extend_ring_map, scalar_extension, DeformedAlgebra, Level};
use crate::cohomology::KernelComplex;
use crate::complex::{delta, GradedMap, GradedObject, PreComplex};
use crate::error::{Error, Result};
use crate::finring::{elementary_basis, ring_fiber_product, Elem, FiniteRing, RingMap, Tower, TowerCaps, TowerKind};
use crate::linalg::{FpMatrix, Solver};
use crate::obstruction::{lift_along_chain, relabel, ChainStep, DiffProblem, LiftReport};

/// Largest ring handled by the functor enumerations.
pub const MAX_RING_LOG2: u32 = 12;
/// Largest lift space enumerated.
pub const MAX_SPACE_LOG2: u32 = 20;

/// A finite local `F_p`-algebra with residue field `F_p`.
#[derive(Clone, Debug)]
pub struct ArtinLocalRing {
    pub name: String,
    pub ring: Arc<FiniteRing>,
    pub residue: Arc<FiniteRing>,
    /// Augmentation onto the residue field.
    pub aug: RingMap,
    /// `F_p`-basis of the maximal ideal.
    pub m_basis: Vec<Elem>,
    /// Least `n` with `mⁿ = 0`.
    pub nilpotency: u32,
}

impl ArtinLocalRing {
    pub fn from_ring(name: impl Into<String>, ring: Arc<FiniteRing>) -> Result<Self> {
        let p = ring.p();
        if ring.exps().iter().any(|&e| e != 1) {
            return Err(Error::Validation("ring is not an F_p-algebra".into()));
        }
        if !ring.is_commutative() {
            return Err(Error::Validation("ring must be commutative".into()));
        }
        let log2 = ring.log_card() as f64 * (p as f64).log2();
        if log2 > MAX_RING_LOG2 as f64 + 1e-9 {
            return Err(Error::CapExceeded { size: ring.cardinality(), cap: 1 << MAX_RING_LOG2 });
        }
        let one = ring.one();
        let mut images = Vec::with_capacity(ring.rank());
        for i in 0..ring.rank() {
            let b = ring.basis(i);
            let c = (0..p)
                .find(|&c| ring.is_nilpotent(&ring.sub(&b, &ring.scale(&one, c as u64))))
                .ok_or_else(|| Error::NotLocal(format!("basis element {i} has no residue in F_p")))?;
            images.push(vec![c]);
        }
        let residue = Arc::new(FiniteRing::prime_field(p)?);
        let aug = RingMap::surjection(ring.clone(), residue.clone(), images)?;
        let m_elems = aug.kernel_elements();
        if m_elems.iter().any(|x| !ring.is_nilpotent(x)) {
            return Err(Error::NotLocal("maximal ideal is not nilpotent".into()));
        }
        let m_basis = elementary_basis(&ring, &m_elems);
        let nilpotency = nilpotency(&ring, &m_basis);
        Ok(ArtinLocalRing { name: name.into(), ring, residue, aug, m_basis, nilpotency })
    }

    pub fn field(p: u32) -> Result<Self> {
        Self::from_ring("k", Arc::new(FiniteRing::prime_field(p)?))
    }

    /// `F_p[t]/(tⁿ)`.
    pub fn truncated(p: u32, n: u32) -> Result<Self> {
        Self::from_ring(format!("F{p}[t]/t^{n}"), Arc::new(FiniteRing::truncated_poly(p, n)?))
    }

    /// `F_p[ε₁..ε_r]/(ε_iε_j)`.
    pub fn square_zero(p: u32, r: u32) -> Result<Self> {
        Self::from_ring(format!("F{p}[e1..e{r}]/m^2"), Arc::new(FiniteRing::square_zero(p, r)?))
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn m_dim(&self) -> usize {
        self.m_basis.len()
    }

    pub fn m_squared_zero(&self) -> bool {
        self.nilpotency <= 2
    }
}

fn nilpotency(ring: &FiniteRing, m_basis: &[Elem]) -> u32 {
    let mut power: Vec<Elem> = m_basis.to_vec();
    let mut n = 1;
    while !power.is_empty() {
        let prods: Vec<Elem> = power
            .iter()
            .flat_map(|x| m_basis.iter().map(move |y| ring.mul(x, y)))
            .filter(|z| !ring.is_zero(z))
            .collect();
        power = span_basis(ring, &prods);
        n += 1;
    }
    n
}

fn span_basis(ring: &FiniteRing, gens: &[Elem]) -> Vec<Elem> {
    if gens.is_empty() {
        return vec![];
    }
    let m = FpMatrix::from_rows(ring.p(), ring.rank(), gens);
    let (r, _) = m.rref();
    (0..r.rows).map(|i| r.row(i).to_vec()).filter(|v| v.iter().any(|&c| c != 0)).collect()
}

/// Surjection of artinian rings.
#[derive(Clone, Debug)]
pub struct ArtinMap {
    pub src: ArtinLocalRing,
    pub tgt: ArtinLocalRing,
    pub map: RingMap,
}

impl ArtinMap {
    pub fn new(src: &ArtinLocalRing, tgt: &ArtinLocalRing, images: Vec<Elem>) -> Result<Self> {
        let map = RingMap::surjection(src.ring.clone(), tgt.ring.clone(), images)?;
        Ok(ArtinMap { src: src.clone(), tgt: tgt.clone(), map })
    }

    /// The augmentation of a ring, as a map onto `k`.
    pub fn to_residue(src: &ArtinLocalRing) -> Result<Self> {
        let k = ArtinLocalRing::from_ring("k", src.residue.clone())?;
        Ok(ArtinMap { src: src.clone(), tgt: k, map: src.aug.clone() })
    }

    /// Small: the kernel is one-dimensional and killed by the maximal ideal.
    pub fn is_small(&self) -> bool {
        let r = &self.src.ring;
        let ker = elementary_basis(r, &self.map.kernel_elements());
        ker.len() == 1 && self.src.m_basis.iter().all(|m| r.is_zero(&r.mul(m, &ker[0])))
    }
}

/// A pair of surjections `R′ → R ← R″`.
#[derive(Clone, Debug)]
pub struct RingTriple {
    pub name: String,
    pub first: ArtinMap,
    pub second: ArtinMap,
}

impl RingTriple {
    pub fn new(name: impl Into<String>, first: ArtinMap, second: ArtinMap) -> Result<Self> {
        if *first.tgt.ring != *second.tgt.ring {
            return Err(Error::TargetMismatch);
        }
        Ok(RingTriple { name: name.into(), first, second })
    }

    /// `R′ ×_R R″` with its projections.
    pub fn fiber_product(&self) -> Result<(ArtinLocalRing, ArtinMap, ArtinMap)> {
        let fp = ring_fiber_product(&self.first.map, &self.second.map)?;
        let ring = ArtinLocalRing::from_ring(format!("{} x {}", self.first.src.name, self.second.src.name), fp.ring)?;
        let p1 = ArtinMap { src: ring.clone(), tgt: self.first.src.clone(), map: fp.to_first };
        let p2 = ArtinMap { src: ring.clone(), tgt: self.second.src.clone(), map: fp.to_second };
        Ok((ring, p1, p2))
    }
}

/// A base complex `(C₀, d)` over an `F_p`-algebra `Λ₀`, deformed trivially.
#[derive(Clone, Debug)]
pub struct DefContext {
    pub p: u32,
    pub names: Vec<String>,
    pub base_consts: Vec<Vec<Vec<u32>>>,
    pub algebra: Arc<FiniteRing>,
    pub c0: PreComplex,
}

/// The algebra `R ⊗ Λ₀` and the canonical graded lift of `C₀` over it.
#[derive(Clone, Debug)]
pub struct Extended {
    pub ring: ArtinLocalRing,
    pub algebra: Arc<FiniteRing>,
    pub to_base: RingMap,
    pub obj: GradedObject,
    /// Entrywise constant lift of `d`.
    pub lift_d: GradedMap,
}

impl DefContext {
    pub fn new(p: u32, names: Vec<String>, base_consts: Vec<Vec<Vec<u32>>>, c0: PreComplex) -> Result<Self> {
        let k = FiniteRing::prime_field(p)?;
        let consts = base_consts.iter().map(|r| r.iter().map(|v| v.iter().map(|&c| vec![c % p]).collect()).collect()).collect();
        let algebra = Arc::new(scalar_extension(&k, &consts)?);
        if c0.level() != Level::Base {
            return Err(Error::LevelMismatch { expected: "base".into(), found: c0.level().to_string() });
        }
        if !c0.is_complex(&algebra)? {
            return Err(Error::NotADifferential);
        }
        Ok(DefContext { p, names, base_consts, algebra, c0 })
    }

    /// Over `F_p` itself.
    pub fn scalars(p: u32, c0: PreComplex) -> Result<Self> {
        Self::new(p, vec!["1".into()], vec![vec![vec![1]]], c0)
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn extend(&self, r: &ArtinLocalRing) -> Result<Extended> {
        let ring = &r.ring;
        let consts = self
            .base_consts
            .iter()
            .map(|row| row.iter().map(|v| v.iter().map(|&c| ring.scale(&ring.one(), c as u64)).collect()).collect())
            .collect();
        let algebra = Arc::new(scalar_extension(ring, &consts)?);
        let to_base = extend_ring_map(&r.aug, self.rank(), algebra.clone(), self.algebra.clone())?;
        let obj = self.c0.obj.at_level(Level::Bar);
        let one = ring.one();
        let m = ring.rank();
        let lift_d = self.c0.d.map_entries(Level::Bar, algebra.rank(), |x| {
            let mut out = vec![0u32; algebra.rank()];
            for (u, &c) in x.iter().enumerate() {
                for (v, &o) in one.iter().enumerate() {
                    out[u * m + v] = (out[u * m + v] + c * o) % self.p;
                }
            }
            out
        });
        Ok(Extended { ring: r.clone(), algebra, to_base, obj, lift_d })
    }

    /// Dimension of `H¹Hom(C₀, C₀)`: the tangent space of the classes functor.
    pub fn tangent_dim(&self) -> Result<usize> {
        let tower = Arc::new(Tower::square_zero(self.p, 1)?);
        let alg = Arc::new(DeformedAlgebra::trivial(tower, self.names.clone(), self.base_consts.clone())?);
        let k = KernelComplex::new(alg, &self.c0, &self.c0)?;
        Ok(k.h_dim(1))
    }

    /// The tower `R → k → k` for a ring with `m² = 0`, and the algebra over it.
    fn square_zero_algebra(&self, r: &ArtinLocalRing) -> Result<Arc<DeformedAlgebra>> {
        let k = r.residue.clone();
        let tower = Tower::from_maps(TowerKind::Custom, r.aug.clone(), RingMap::identity(k), TowerCaps::default())?;
        Ok(Arc::new(DeformedAlgebra::trivial(Arc::new(tower), self.names.clone(), self.base_consts.clone())?))
    }
}

impl Extended {
    fn a(&self) -> &FiniteRing {
        &self.algebra
    }

    /// Flat-coordinate basis of maps of degree `n` with entries in `m ⊗ Λ₀`.
    pub fn nil_basis(&self, n: i32) -> Vec<Vec<u32>> {
        let zero = GradedMap::zero(self.a(), &self.obj, &self.obj, n);
        let width = self.algebra.rank();
        let mr = self.ring.ring.rank();
        let k = width / mr;
        let entries = zero.coord_len() / width;
        let mut out = Vec::new();
        for e in 0..entries {
            for u in 0..k {
                for mb in &self.ring.m_basis {
                    let mut v = vec![0u32; zero.coord_len()];
                    v[e * width + u * mr..e * width + (u + 1) * mr].copy_from_slice(mb);
                    out.push(v);
                }
            }
        }
        out
    }

    fn map_from(&self, n: i32, coords: &[u32]) -> GradedMap {
        GradedMap::from_coords(self.a(), &self.obj, &self.obj, n, coords)
    }

    fn is_differential(&self, d: &GradedMap) -> Result<bool> {
        Ok(d.compose(self.a(), d)?.is_zero())
    }

    /// `(1 + κ)⁻¹ = Σ (−κ)ⁱ` for `κ` with nilpotent entries.
    pub fn unipotent_inverse(&self, kappa: &GradedMap) -> Result<GradedMap> {
        let a = self.a();
        let one = GradedMap::identity(a, &self.obj);
        let neg = kappa.neg(a);
        let mut term = one.clone();
        let mut acc = one;
        for _ in 0..=self.ring.nilpotency {
            term = term.compose(a, &neg)?;
            if term.is_zero() {
                break;
            }
            acc = acc.add(a, &term)?;
        }
        Ok(acc)
    }

    /// Reduction to `C₀`.
    pub fn to_base(&self, f: &GradedMap) -> GradedMap {
        f.map_entries(Level::Base, self.to_base.tgt.rank(), |x| self.to_base.apply(x))
    }

    /// Entrywise image under an extended ring map into another extension.
    pub fn push(&self, f: &GradedMap, ext_map: &RingMap) -> GradedMap {
        f.map_entries(Level::Bar, ext_map.tgt.rank(), |x| ext_map.apply(x))
    }
}

fn check_space(p: u32, dim: usize) -> Result<u128> {
    let log2 = dim as f64 * (p as f64).log2();
    let size = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if log2 > MAX_SPACE_LOG2 as f64 + 1e-9 {
        return Err(Error::CapExceeded { size, cap: 1 << MAX_SPACE_LOG2 });
    }
    Ok(size)
}

fn combos(p: u32, basis: &[Vec<u32>], len: usize) -> Result<Vec<Vec<u32>>> {
    check_space(p, basis.len())?;
    Ok(crate::linalg::all_combinations(p, len, basis))
}

/// All differentials on the canonical graded lift over `R ⊗ Λ₀` reducing to `d`,
/// in lexicographic order of their correction coordinates.
pub fn strict_lifts(ext: &Extended) -> Result<Vec<GradedMap>> {
    let p = ext.ring.p();
    let base = ext.lift_d.to_coords();
    let basis = ext.nil_basis(1);
    let mut out = Vec::new();
    for c in combos(p, &basis, base.len())? {
        let coords: Vec<u32> = base.iter().zip(&c).map(|(&x, &y)| (x + y) % p).collect();
        let d = ext.map_from(1, &coords);
        if ext.is_differential(&d)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// Partition of a list of lifts into classes; `class_of[i]` is the index of
/// the first member of `i`'s class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub class_of: Vec<usize>,
}

impl Partition {
    pub fn reps(&self) -> Vec<usize> {
        (0..self.class_of.len()).filter(|&i| self.class_of[i] == i).collect()
    }

    pub fn count(&self) -> usize {
        self.reps().len()
    }

    pub fn blocks(&self) -> BTreeSet<Vec<usize>> {
        let mut m: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &c) in self.class_of.iter().enumerate() {
            m.entry(c).or_default().push(i);
        }
        m.into_values().collect()
    }
}

fn index(lifts: &[GradedMap]) -> HashMap<Vec<u32>, usize> {
    lifts.iter().enumerate().map(|(i, d)| (d.to_coords(), i)).collect()
}

/// Classes under conjugation by automorphisms `1 + κ` lifting the identity,
/// found by orbit enumeration.
pub fn orbit_classes(ext: &Extended, lifts: &[GradedMap]) -> Result<Partition> {
    let a = ext.a();
    let idx = index(lifts);
    let autos = automorphisms(ext)?;
    let mut class_of = vec![usize::MAX; lifts.len()];
    for i in 0..lifts.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        for (phi, inv) in &autos {
            let img = phi.compose(a, &lifts[i].compose(a, inv)?)?;
            let j = *idx.get(&img.to_coords()).ok_or_else(|| Error::CheckFailed("conjugate is not a lift".into()))?;
            class_of[j] = i;
        }
    }
    Ok(Partition { class_of })
}

/// All automorphisms `1 + κ` with their inverses.
pub fn automorphisms(ext: &Extended) -> Result<Vec<(GradedMap, GradedMap)>> {
    let a = ext.a();
    let one = GradedMap::identity(a, &ext.obj);
    let basis = ext.nil_basis(0);
    let len = one.coord_len();
    combos(ext.ring.p(), &basis, len)?
        .into_iter()
        .map(|c| {
            let kappa = ext.map_from(0, &c);
            Ok((one.add(a, &kappa)?, ext.unipotent_inverse(&kappa)?))
        })
        .collect()
}

/// Classes via difference classes in `H¹`, valid when `m² = 0`.
pub fn vclass_classes(ctx: &DefContext, ext: &Extended, lifts: &[GradedMap]) -> Result<Partition> {
    let alg = ctx.square_zero_algebra(&ext.ring)?;
    let mid = relabel(&ctx.c0, Level::Mid);
    let problem = DiffProblem::new(alg, &mid)?;
    let mut class_of = vec![usize::MAX; lifts.len()];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..lifts.len() {
        for &r in &reps {
            if problem.equivalent(&lifts[r], &lifts[i])? {
                class_of[i] = r;
                break;
            }
        }
        if class_of[i] == usize::MAX {
            class_of[i] = i;
            reps.push(i);
        }
    }
    Ok(Partition { class_of })
}

/// Classes under homotopy equivalences over `R` whose reduction is homotopic
/// to the identity of `C₀`: a search independent of the strict classes.
pub fn homotopy_classes(ctx: &DefContext, ext: &Extended, lifts: &[GradedMap]) -> Result<Partition> {
    let a = ext.a();
    let p = ext.ring.p();
    let base = &ctx.algebra;
    let c0 = &ctx.c0;
    // maps homotopic to 1 at the base: 1 + δ(s)
    let s_len = GradedMap::zero(base, &c0.obj, &c0.obj, -1).coord_len();
    let s_basis: Vec<Vec<u32>> = (0..s_len).map(|i| (0..s_len).map(|j| u32::from(i == j)).collect()).collect();
    let one0 = GradedMap::identity(base, &c0.obj);
    let near_ones: Vec<GradedMap> = combos(p, &s_basis, s_len)?
        .into_iter()
        .map(|s| {
            let s = GradedMap::from_coords(base, &c0.obj, &c0.obj, -1, &s);
            one0.add(base, &delta(base, &c0.d, &c0.d, &s)?)
        })
        .collect::<Result<_>>()?;
    let lifted: Vec<GradedMap> = near_ones
        .iter()
        .map(|m| {
            let ctx_lift = m.map_entries(Level::Bar, a.rank(), |x| {
                let mr = ext.ring.ring.rank();
                let one = ext.ring.ring.one();
                let mut out = vec![0u32; a.rank()];
                for (u, &c) in x.iter().enumerate() {
                    for (v, &o) in one.iter().enumerate() {
                        out[u * mr + v] = (c * o) % p;
                    }
                }
                out
            });
            ctx_lift
        })
        .collect();
    let kbasis = ext.nil_basis(0);
    let zero0 = GradedMap::zero(a, &ext.obj, &ext.obj, 0);
    let mut class_of = vec![usize::MAX; lifts.len()];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..lifts.len() {
        'reps: for &r in &reps {
            let (d1, d2) = (&lifts[r], &lifts[i]);
            // d2(φ₀ + κ) = (φ₀ + κ)d1 is affine in κ
            let cols: Vec<Vec<u32>> = kbasis
                .iter()
                .map(|b| {
                    let k = ext.map_from(0, b);
                    Ok(d2.compose(a, &k)?.sub(a, &k.compose(a, d1)?)?.to_coords())
                })
                .collect::<Result<_>>()?;
            let rows = zero0.compose(a, d1)?.coord_len();
            let mat = FpMatrix::from_columns(p, rows, &cols);
            let solver = Solver::new(&mat);
            for phi0 in &lifted {
                let rhs = phi0.compose(a, d1)?.sub(a, &d2.compose(a, phi0)?)?.to_coords();
                if solver.solve(&rhs).is_some() {
                    class_of[i] = r;
                    break 'reps;
                }
            }
        }
        if class_of[i] == usize::MAX {
            class_of[i] = i;
            reps.push(i);
        }
    }
    Ok(Partition { class_of })
}

/// Which functor to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctorTag {
    /// Strict lifts.
    Strict,
    /// Isomorphism classes of strict lifts.
    Classes,
    /// Homotopy deformations.
    Homotopy,
}

impl FunctorTag {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "F0" | "f0" | "strict" => Ok(FunctorTag::Strict),
            "F" | "f" | "classes" => Ok(FunctorTag::Classes),
            "F1" | "f1" | "homotopy" => Ok(FunctorTag::Homotopy),
            other => Err(Error::Parse(format!("unknown functor `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FunctorTag::Strict => "F0",
            FunctorTag::Classes => "F",
            FunctorTag::Homotopy => "F1",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctorValue {
    pub tag: FunctorTag,
    pub ring: String,
    /// All strict lifts (for `F0`) or one representative per class.
    pub elements: Vec<GradedMap>,
    pub class_sizes: Vec<usize>,
    /// For `F1`: whether the homotopy search agreed with the strict classes.
    pub cross_checked: Option<bool>,
}

/// Classes of strict lifts: difference classes when `m² = 0`, orbits otherwise.
pub fn classes(ctx: &DefContext, ext: &Extended, lifts: &[GradedMap]) -> Result<Partition> {
    if ext.ring.m_squared_zero() {
        vclass_classes(ctx, ext, lifts)
    } else {
        orbit_classes(ext, lifts)
    }
}

pub fn functor_eval(ctx: &DefContext, tag: FunctorTag, r: &ArtinLocalRing, cross_check: bool) -> Result<FunctorValue> {
    let ext = ctx.extend(r)?;
    let lifts = strict_lifts(&ext)?;
    let value = |elements: Vec<GradedMap>, class_sizes, cross_checked| FunctorValue {
        tag,
        ring: r.name.clone(),
        elements,
        class_sizes,
        cross_checked,
    };
    if tag == FunctorTag::Strict {
        let n = lifts.len();
        return Ok(value(lifts, vec![1; n], None));
    }
    let part = classes(ctx, &ext, &lifts)?;
    let blocks = part.blocks();
    let sizes: Vec<usize> = part.reps().iter().map(|&r| part.class_of.iter().filter(|&&c| c == r).count()).collect();
    let reps = part.reps().into_iter().map(|i| lifts[i].clone()).collect();
    let cross = if tag == FunctorTag::Homotopy && cross_check {
        Some(homotopy_classes(ctx, &ext, &lifts)?.blocks() == blocks)
    } else {
        None
    };
    Ok(value(reps, sizes, cross))
}

/// Extends a differential over `F_p[t]/(tⁿ) ⊗ Λ₀` one order.
pub fn extend_order(ctx: &DefContext, d: &PreComplex, n: u32) -> Result<LiftReport> {
    let tower = Arc::new(Tower::trunc_poly(ctx.p, n + 1, n)?);
    let alg = Arc::new(DeformedAlgebra::trivial(tower, ctx.names.clone(), ctx.base_consts.clone())?);
    DiffProblem::new(alg, &relabel(d, Level::Mid))?.lift()
}

/// Chain of one-step towers `F_p[t]/(t^{k+1}) → F_p[t]/(t^k)` for `k = from..to`.
pub fn truncation_chain(ctx: &DefContext, from: u32, to: u32) -> Result<Vec<Arc<DeformedAlgebra>>> {
    (from..to)
        .map(|k| {
            let tower = Arc::new(Tower::trunc_poly(ctx.p, k + 1, k)?);
            Ok(Arc::new(DeformedAlgebra::trivial(tower, ctx.names.clone(), ctx.base_consts.clone())?))
        })
        .collect()
}

/// Extends order by order up to `F_p[t]/(t^to)`.
pub fn extend_orders(ctx: &DefContext, d: &PreComplex, from: u32, to: u32) -> Result<Vec<ChainStep>> {
    lift_along_chain(&truncation_chain(ctx, from, to)?, &relabel(d, Level::Mid))
}

/// Findings for one ring triple.
#[derive(Clone, Debug)]
pub struct TripleReport {
    pub name: String,
    pub small: bool,
    /// `|F₀|` of the fiber product, first, second and common target.
    pub strict_counts: [usize; 4],
    pub class_counts: [usize; 4],
    pub strict_bijective: bool,
    /// Surjectivity on classes, checked when the first map is small.
    pub classes_surjective: Option<bool>,
    /// Bijectivity on classes, checked when the target is `k` and the second
    /// ring is `k[ε]`.
    pub tangent_bijective: Option<bool>,
    /// Pairs `(strict lift over R, class over R′)` to which smoothness applied.
    pub smooth_premises: usize,
    pub smooth_ok: bool,
}

#[derive(Clone, Debug)]
pub struct SchlessingerReport {
    pub tangent_dim: usize,
    pub triples: Vec<TripleReport>,
}

struct RingData {
    ext: Extended,
    lifts: Vec<GradedMap>,
    idx: HashMap<Vec<u32>, usize>,
    part: Partition,
}

impl RingData {
    fn new(ctx: &DefContext, r: &ArtinLocalRing) -> Result<Self> {
        let ext = ctx.extend(r)?;
        let lifts = strict_lifts(&ext)?;
        let part = classes(ctx, &ext, &lifts)?;
        Ok(RingData { idx: index(&lifts), ext, lifts, part })
    }

    fn find(&self, d: &GradedMap) -> Result<usize> {
        self.idx.get(&d.to_coords()).copied().ok_or_else(|| Error::CheckFailed("image is not a strict lift".into()))
    }
}

fn extended_map(ctx: &DefContext, src: &Extended, tgt: &Extended, m: &ArtinMap) -> Result<RingMap> {
    extend_ring_map(&m.map, ctx.rank(), src.algebra.clone(), tgt.algebra.clone())
}

fn images(src: &RingData, tgt: &RingData, map: &RingMap) -> Result<Vec<usize>> {
    src.lifts.iter().map(|d| tgt.find(&src.ext.push(d, map))).collect()
}

fn is_k_eps(r: &ArtinLocalRing) -> bool {
    r.m_dim() == 1 && r.m_squared_zero()
}

/// Checks the fiber-product conditions on each triple and formal smoothness of
/// the passage from strict lifts to classes along each surjection.
pub fn schlessinger_check(ctx: &DefContext, triples: &[RingTriple]) -> Result<SchlessingerReport> {
    let mut out = Vec::new();
    for t in triples {
        let (fp, p1, p2) = t.fiber_product()?;
        let d_fp = RingData::new(ctx, &fp)?;
        let d1 = RingData::new(ctx, &t.first.src)?;
        let d2 = RingData::new(ctx, &t.second.src)?;
        let d0 = RingData::new(ctx, &t.first.tgt)?;
        let m_p1 = extended_map(ctx, &d_fp.ext, &d1.ext, &p1)?;
        let m_p2 = extended_map(ctx, &d_fp.ext, &d2.ext, &p2)?;
        let m_f1 = extended_map(ctx, &d1.ext, &d0.ext, &t.first)?;
        let m_f2 = extended_map(ctx, &d2.ext, &d0.ext, &t.second)?;
        let i1 = images(&d_fp, &d1, &m_p1)?;
        let i2 = images(&d_fp, &d2, &m_p2)?;
        let j1 = images(&d1, &d0, &m_f1)?;
        let j2 = images(&d2, &d0, &m_f2)?;

        let pairs: BTreeSet<(usize, usize)> = i1.iter().copied().zip(i2.iter().copied()).collect();
        let compatible: BTreeSet<(usize, usize)> = (0..d1.lifts.len())
            .flat_map(|a| (0..d2.lifts.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| j1[a] == j2[b])
            .collect();
        let strict_bijective = pairs.len() == d_fp.lifts.len() && pairs == compatible;
        if !strict_bijective {
            return Err(Error::CheckFailed(format!(
                "{}: strict lifts over the fiber product do not biject onto compatible pairs ({} lifts, {} pairs, {} compatible)",
                t.name,
                d_fp.lifts.len(),
                pairs.len(),
                compatible.len()
            )));
        }

        let cls = |d: &RingData, i: usize| d.part.class_of[i];
        let class_pairs: BTreeSet<(usize, usize)> = (0..d_fp.lifts.len()).map(|x| (cls(&d1, i1[x]), cls(&d2, i2[x]))).collect();
        let compatible_classes: BTreeSet<(usize, usize)> = d1
            .part
            .reps()
            .into_iter()
            .flat_map(|a| d2.part.reps().into_iter().map(move |b| (a, b)))
            .filter(|&(a, b)| cls(&d0, j1[a]) == cls(&d0, j2[b]))
            .collect();
        let small = t.first.is_small();
        let classes_surjective = small.then(|| compatible_classes.is_subset(&class_pairs));
        if classes_surjective == Some(false) {
            return Err(Error::CheckFailed(format!("{}: class map onto the fiber product of classes is not surjective", t.name)));
        }
        let tangent_applicable = t.first.tgt.m_dim() == 0 && is_k_eps(&t.second.src);
        let tangent_bijective = tangent_applicable.then(|| {
            let fp_classes: BTreeSet<(usize, usize)> =
                d_fp.part.reps().into_iter().map(|x| (cls(&d1, i1[x]), cls(&d2, i2[x]))).collect();
            fp_classes.len() == d_fp.part.count() && fp_classes == compatible_classes
        });
        if tangent_bijective == Some(false) {
            return Err(Error::CheckFailed(format!("{}: classes over R′ ×_k k[ε] are not a product", t.name)));
        }

        let mut premises = 0;
        for (m, src, j, ext_map) in [(&t.first, &d1, &j1, &m_f1), (&t.second, &d2, &j2, &m_f2)] {
            premises += smoothness(src, &d0, j, m, ext_map)?;
        }
        out.push(TripleReport {
            name: t.name.clone(),
            small,
            strict_counts: [d_fp.lifts.len(), d1.lifts.len(), d2.lifts.len(), d0.lifts.len()],
            class_counts: [d_fp.part.count(), d1.part.count(), d2.part.count(), d0.part.count()],
            strict_bijective,
            classes_surjective,
            tangent_bijective,
            smooth_premises: premises,
            smooth_ok: true,
        });
    }
    Ok(SchlessingerReport { tangent_dim: ctx.tangent_dim()?, triples: out })
}

/// For every strict lift `d_S` over the target and every class over the
/// source reducing to the class of `d_S`, builds a member of that class
/// reducing exactly to `d_S` by conjugating with a lifted automorphism.
fn smoothness(src: &RingData, tgt: &RingData, proj: &[usize], m: &ArtinMap, ext_map: &RingMap) -> Result<usize> {
    let a_src = src.ext.a();
    let a_tgt = tgt.ext.a();
    let section = ext_map.minimal_section();
    let autos = automorphisms(&tgt.ext)?;
    let mut premises = 0;
    for s in 0..tgt.lifts.len() {
        for rep in src.part.reps() {
            if tgt.part.class_of[proj[rep]] != tgt.part.class_of[s] {
                continue;
            }
            premises += 1;
            let reduced = &tgt.lifts[proj[rep]];
            let target = &tgt.lifts[s];
            let mut found = None;
            for (phi, inv) in &autos {
                if phi.compose(a_tgt, &reduced.compose(a_tgt, inv)?)? == *target {
                    found = Some(phi);
                    break;
                }
            }
            let phi_s = found.ok_or_else(|| Error::CheckFailed(format!("no automorphism over {} joins equivalent lifts", m.tgt.name)))?;
            let phi = phi_s.map_entries(Level::Bar, a_src.rank(), |x| {
                let mut acc = vec![0u64; a_src.rank()];
                for (&c, sec) in x.iter().zip(&section) {
                    for (t, &y) in acc.iter_mut().zip(sec) {
                        *t += c as u64 * y as u64;
                    }
                }
                a_src.reduce(&acc)
            });
            let one = GradedMap::identity(a_src, &src.ext.obj);
            let inv = src.ext.unipotent_inverse(&phi.sub(a_src, &one)?)?;
            let lifted = phi.compose(a_src, &src.lifts[rep].compose(a_src, &inv)?)?;
            let idx = src.find(&lifted)?;
            if src.part.class_of[idx] != rep || src.ext.push(&lifted, ext_map) != *target {
                return Err(Error::CheckFailed(format!("smoothness fails over {} -> {}", m.src.name, m.tgt.name)));
            }
        }
    }
    Ok(premises)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgMatrix;

    fn zero_complex(p: u32, ranks: Vec<usize>) -> DefContext {
        let k = FiniteRing::prime_field(p).unwrap();
        DefContext::scalars(p, PreComplex::zero(&k, &GradedObject::new(Level::Base, 0, ranks))).unwrap()
    }

    fn dual(p: u32) -> ArtinLocalRing {
        ArtinLocalRing::truncated(p, 2).unwrap()
    }

    #[test]
    fn artin_rings() {
        let r = ArtinLocalRing::truncated(2, 3).unwrap();
        assert_eq!(r.m_dim(), 2);
        assert_eq!(r.nilpotency, 3);
        assert!(!r.m_squared_zero());
        let k = ArtinLocalRing::field(3).unwrap();
        assert_eq!(k.m_dim(), 0);
        assert_eq!(k.nilpotency, 1);
        assert!(ArtinLocalRing::from_ring("z4", Arc::new(FiniteRing::zmod(2, 2).unwrap())).is_err());
        let prod = Arc::new(
            FiniteRing::new(2, vec![1, 1], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]], true).unwrap(),
        );
        assert!(matches!(ArtinLocalRing::from_ring("F2xF2", prod), Err(Error::NotLocal(_))));
    }

    #[test]
    fn tangent_dims() {
        assert_eq!(zero_complex(2, vec![2]).tangent_dim().unwrap(), 0);
        assert_eq!(zero_complex(2, vec![1, 1]).tangent_dim().unwrap(), 1);
        assert_eq!(zero_complex(2, vec![1, 1, 1]).tangent_dim().unwrap(), 2);
    }

    #[test]
    fn functor_values_over_dual_numbers() {
        let ctx = zero_complex(2, vec![1, 1]);
        let f0 = functor_eval(&ctx, FunctorTag::Strict, &dual(2), false).unwrap();
        assert_eq!(f0.elements.len(), 2);
        let f = functor_eval(&ctx, FunctorTag::Classes, &dual(2), false).unwrap();
        assert_eq!(f.elements.len(), 2);
        let f1 = functor_eval(&ctx, FunctorTag::Homotopy, &dual(2), true).unwrap();
        assert_eq!(f1.cross_checked, Some(true));
        let k = ArtinLocalRing::field(2).unwrap();
        assert_eq!(functor_eval(&ctx, FunctorTag::Classes, &k, false).unwrap().elements.len(), 1);
        assert_eq!(functor_eval(&ctx, FunctorTag::Strict, &k, false).unwrap().elements.len(), 1);
    }

    #[test]
    fn orbit_and_vclass_agree_when_square_zero() {
        let k = FiniteRing::prime_field(3).unwrap();
        let obj = GradedObject::new(Level::Base, 0, vec![1, 2, 1]);
        let mut d = GradedMap::zero(&k, &obj, &obj, 1);
        d.comps[0] = AlgMatrix::from_entries(Level::Base, &k, 2, 1, &[vec![1], vec![0]]).unwrap();
        d.comps[1] = AlgMatrix::from_entries(Level::Base, &k, 1, 2, &[vec![0], vec![1]]).unwrap();
        let ctx = DefContext::scalars(3, PreComplex::complex(&k, obj, d).unwrap()).unwrap();
        let r = ArtinLocalRing::square_zero(3, 1).unwrap();
        let ext = ctx.extend(&r).unwrap();
        let lifts = strict_lifts(&ext).unwrap();
        let a = orbit_classes(&ext, &lifts).unwrap();
        let b = vclass_classes(&ctx, &ext, &lifts).unwrap();
        assert_eq!(a.blocks(), b.blocks());
        assert_eq!(a.count() as u32, 3u32.pow(ctx.tangent_dim().unwrap() as u32));
        assert_eq!(homotopy_classes(&ctx, &ext, &lifts).unwrap().blocks(), a.blocks());
    }

    #[test]
    fn fiber_product_of_dual_numbers() {
        let ctx = zero_complex(2, vec![1, 1]);
        let e = dual(2);
        let k = ArtinLocalRing::field(2).unwrap();
        let t = RingTriple::new("k[e] x_k k[d]", ArtinMap::to_residue(&e).unwrap(), ArtinMap::to_residue(&e).unwrap()).unwrap();
        let rep = schlessinger_check(&ctx, &[t]).unwrap();
        let tr = &rep.triples[0];
        assert_eq!(tr.strict_counts, [4, 2, 2, 1]);
        assert!(tr.strict_bijective);
        assert_eq!(tr.classes_surjective, Some(true));
        assert_eq!(tr.tangent_bijective, Some(true));
        let trivial = RingTriple::new("k x_k k", ArtinMap::to_residue(&k).unwrap(), ArtinMap::to_residue(&k).unwrap()).unwrap();
        let rep = schlessinger_check(&ctx, &[trivial]).unwrap();
        assert_eq!(rep.triples[0].strict_counts, [1, 1, 1, 1]);
    }

    #[test]
    fn smoothness_is_vacuous_for_obstructed_first_order_deformation() {
        let ctx = zero_complex(2, vec![1, 1, 1]);
        let t3 = ArtinLocalRing::truncated(2, 3).unwrap();
        let t2 = ArtinLocalRing::truncated(2, 2).unwrap();
        let m = ArtinMap::new(&t3, &t2, vec![vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        assert!(m.is_small());
        let triple = RingTriple::new("t3 -> t2", m.clone(), ArtinMap::new(&t2, &t2, vec![vec![1, 0], vec![0, 1]]).unwrap()).unwrap();
        let rep = schlessinger_check(&ctx, &[triple]).unwrap();
        assert!(rep.triples[0].smooth_ok);
        // (t, t) is a strict lift over t² that no lift over t³ reduces to
        let d2 = RingData::new(&ctx, &t2).unwrap();
        let d3 = RingData::new(&ctx, &t3).unwrap();
        let proj = images(&d3, &d2, &extended_map(&ctx, &d3.ext, &d2.ext, &m).unwrap()).unwrap();
        let tt: Vec<usize> = (0..d2.lifts.len())
            .filter(|&i| d2.lifts[i].comps[0].entry(0, 0) == [0, 1] && d2.lifts[i].comps[1].entry(0, 0) == [0, 1])
            .collect();
        assert_eq!(tt.len(), 1);
        assert!(!proj.iter().any(|&j| d2.part.class_of[j] == d2.part.class_of[tt[0]]));
    }

    #[test]
    fn extend_order_examples() {
        let ctx = zero_complex(2, vec![1, 1, 1]);
        let t2 = FiniteRing::truncated_poly(2, 2).unwrap();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let tee = AlgMatrix::from_entries(Level::Mid, &t2, 1, 1, &[vec![0, 1]]).unwrap();
        let mut d = GradedMap::zero(&t2, &obj, &obj, 1);
        d.comps[0] = tee.clone();
        d.comps[1] = tee.clone();
        let r = extend_order(&ctx, &PreComplex::new(obj.clone(), d).unwrap(), 2).unwrap();
        assert!(!r.lifts());
        assert_eq!(r.obstruction_h_dim, 1);
        let mut d = GradedMap::zero(&t2, &obj, &obj, 1);
        d.comps[0] = tee;
        let c = PreComplex::new(obj, d).unwrap();
        let steps = extend_orders(&ctx, &c, 2, 5).unwrap();
        assert_eq!(steps.len(), 3);
        assert!(steps.iter().all(|s| s.report.lifts()));
        // one step at a time agrees with the chain
        let one = extend_order(&ctx, &c, 2).unwrap();
        assert_eq!(one.witness, steps[0].report.witness);
    }
}
