//! Brute-force ground truth: exhaustive enumeration of lifts over the kernel
//! coordinate space and explicit isomorphism search, plus a seeded instance
//! generator.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{AlgMatrix, DeformedAlgebra, Level};
use crate::cohomology::KernelComplex;
use crate::complex::{delta, reduce_complex, GradedMap, GradedObject, PreComplex};
use crate::error::{Error, Result};
use crate::finring::{FiniteRing, Tower};
use crate::obstruction::{DiffProblem, LiftProblem};

/// Default enumeration cap.
pub const DEFAULT_CAP: u128 = 1 << 20;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub kind: &'static str,
    /// Size of the enumerated candidate space.
    pub space: u128,
    /// Lexicographic indices of the candidates that are lifts.
    pub witness_indices: Vec<u64>,
    pub witnesses: Vec<GradedMap>,
    /// Classes as sorted lists of positions in `witnesses`, ordered by their
    /// smallest member.
    pub partition: Vec<Vec<usize>>,
    pub elapsed: Duration,
}

fn coords_at(p: u32, len: usize, mut idx: u64) -> Vec<u32> {
    let mut v = vec![0u32; len];
    for c in v.iter_mut().rev() {
        *c = (idx % p as u64) as u32;
        idx /= p as u64;
    }
    v
}

fn space_size(p: u32, dim: usize, cap: u128) -> Result<u64> {
    let size = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(size as u64)
}

/// Indices `i` in `0..p^dim` whose candidate passes `test`, in increasing order.
fn search(p: u32, dim: usize, cap: u128, test: impl Fn(&[u32]) -> bool + Sync) -> Result<(u128, Vec<u64>)> {
    let size = space_size(p, dim, cap)?;
    let hits = (0..size).into_par_iter().filter(|&i| test(&coords_at(p, dim, i))).collect();
    Ok((size as u128, hits))
}

/// Partition into orbits of an abelian group of exponent `p` generated by
/// `gens` moves: `step(w, g)` is the image of witness `w` under generator `g`,
/// as a kernel coordinate key. Orbits are the components reached by repeated
/// generator moves.
fn orbit_partition(
    keys: &[Vec<u32>],
    gens: usize,
    step: impl Fn(usize, usize) -> Result<Vec<u32>> + Sync,
) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<&[u32], usize> = keys.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
    let mut class_of = vec![usize::MAX; keys.len()];
    for i in 0..keys.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        class_of[i] = i;
        let mut frontier = vec![i];
        while !frontier.is_empty() {
            let images: Vec<Vec<u32>> = frontier
                .par_iter()
                .flat_map_iter(|&w| (0..gens).map(move |g| (w, g)))
                .map(|(w, g)| step(w, g))
                .collect::<Result<_>>()?;
            frontier.clear();
            for img in images {
                let j = *index
                    .get(img.as_slice())
                    .ok_or_else(|| Error::CheckFailed("equivalent candidate is not a witness".into()))?;
                if class_of[j] == usize::MAX {
                    class_of[j] = i;
                    frontier.push(j);
                } else if class_of[j] != i {
                    return Err(Error::CheckFailed("orbits overlap".into()));
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for (i, &c) in class_of.iter().enumerate() {
        let b = *pos.entry(c).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(i);
    }
    Ok(blocks)
}

fn unit_vector(dim: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0u32; dim];
    v[i] = 1;
    v
}

/// Exhaustively enumerates lifts and their equivalence classes.
pub fn oracle_enumerate(problem: &LiftProblem, cap: u128) -> Result<OracleResult> {
    let start = Instant::now();
    let mut res = match problem {
        LiftProblem::Differential(p) => enumerate_differentials(p, cap)?,
        LiftProblem::Map(m) => {
            let n = m.degree();
            let base = m.canonical.clone();
            let k = &m.kernel;
            enumerate_affine("map", k, n, cap, &base, |f| Ok(m.delta_bar(f)?.is_zero()))?
        }
        LiftProblem::Homotopy(h) => {
            let n = h.h.degree;
            let base = h.canonical.clone();
            let k = &h.kernel;
            enumerate_affine("homotopy", k, n, cap, &base, |x| Ok(h.defect(x)?.is_zero()))?
        }
    };
    res.elapsed = start.elapsed();
    Ok(res)
}

fn enumerate_differentials(problem: &DiffProblem, cap: u128) -> Result<OracleResult> {
    let k = &problem.kernel;
    let r = &problem.alg.bar;
    let p = problem.alg.p();
    let dim = k.dim(1);
    let (space, hits) = search(p, dim, cap, |c| {
        let d = problem.canonical.add(r, &k.out_of_kernel(1, c)).expect("shapes agree");
        d.compose(r, &d).map(|s| s.is_zero()).unwrap_or(false)
    })?;
    let keys: Vec<Vec<u32>> = hits.iter().map(|&i| coords_at(p, dim, i)).collect();
    let witnesses: Vec<GradedMap> = keys
        .iter()
        .map(|c| problem.canonical.add(r, &k.out_of_kernel(1, c)))
        .collect::<Result<_>>()?;
    let dim0 = k.dim(0);
    let one = GradedMap::identity(r, &problem.bar_obj());
    let kappas: Vec<GradedMap> = (0..dim0).map(|g| k.out_of_kernel(0, &unit_vector(dim0, g))).collect();
    // the automorphisms 1 + κ form an abelian group of exponent p
    for a in &kappas {
        for b in &kappas {
            if !a.compose(r, b)?.is_zero() {
                return Err(Error::CheckFailed("kernel endomorphisms do not square to zero".into()));
            }
        }
    }
    let partition = orbit_partition(&keys, dim0, |i, g| {
        let kappa = &kappas[g];
        let phi = one.add(r, kappa)?;
        let psi = one.sub(r, kappa)?;
        if psi.compose(r, &phi)? != one {
            return Err(Error::CheckFailed("1 - κ is not inverse to 1 + κ".into()));
        }
        let w = problem.canonical.add(r, &k.out_of_kernel(1, &keys[i]))?;
        let img = phi.compose(r, &w.compose(r, &psi)?)?;
        k.into_kernel(&img.sub(r, &problem.canonical)?)
    })?;
    Ok(OracleResult { kind: "differential", space, witness_indices: hits, witnesses, partition, elapsed: Duration::ZERO })
}

/// Lifts `base + γ` of degree `n` passing `test`, classified modulo
/// `δ̄` of kernel maps of degree `n − 1`.
fn enumerate_affine(
    kind: &'static str,
    k: &KernelComplex,
    n: i32,
    cap: u128,
    base: &GradedMap,
    test: impl Fn(&GradedMap) -> Result<bool> + Sync,
) -> Result<OracleResult> {
    let r = &k.alg.bar;
    let p = k.p();
    let dim = k.dim(n);
    let (space, hits) = search(p, dim, cap, |c| {
        base.add(r, &k.out_of_kernel(n, c)).and_then(|f| test(&f)).unwrap_or(false)
    })?;
    let keys: Vec<Vec<u32>> = hits.iter().map(|&i| coords_at(p, dim, i)).collect();
    let witnesses: Vec<GradedMap> = keys.iter().map(|c| base.add(r, &k.out_of_kernel(n, c))).collect::<Result<_>>()?;
    let dim_prev = k.dim(n - 1);
    // homotopies between kernel-level maps only see the base differentials
    let d_src = crate::complex::lift_from_base(&k.alg, &k.src.d, Level::Bar);
    let d_tgt = crate::complex::lift_from_base(&k.alg, &k.tgt.d, Level::Bar);
    let moves: Vec<GradedMap> = (0..dim_prev)
        .map(|g| delta(r, &d_src, &d_tgt, &k.out_of_kernel(n - 1, &unit_vector(dim_prev, g))))
        .collect::<Result<_>>()?;
    let partition = orbit_partition(&keys, dim_prev, |i, g| {
        let w = base.add(r, &k.out_of_kernel(n, &keys[i]))?;
        k.into_kernel(&w.add(r, &moves[g])?.sub(r, base)?)
    })?;
    Ok(OracleResult { kind, space, witness_indices: hits, witnesses, partition, elapsed: Duration::ZERO })
}

/// Connecting isomorphisms `1 + κ` from `d̄₁` to `d̄₂`, counted raw and modulo
/// homotopy `κ ~ κ + δ̄(h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsoCount {
    pub isomorphisms: u128,
    pub homotopies: u128,
    pub classes: u128,
}

pub fn connecting_iso_count(problem: &DiffProblem, d1: &GradedMap, d2: &GradedMap, cap: u128) -> Result<IsoCount> {
    let k = &problem.kernel;
    let r = &problem.alg.bar;
    let p = problem.alg.p();
    let one = GradedMap::identity(r, &problem.bar_obj());
    let (_, isos) = search(p, k.dim(0), cap, |c| {
        let phi = one.add(r, &k.out_of_kernel(0, c)).expect("shapes agree");
        matches!((d2.compose(r, &phi), phi.compose(r, d1)), (Ok(a), Ok(b)) if a == b)
    })?;
    let dim_prev = k.dim(-1);
    let size = space_size(p, dim_prev, cap)?;
    let images: std::collections::BTreeSet<Vec<u32>> = (0..size)
        .into_par_iter()
        .map(|m| {
            let h = k.out_of_kernel(-1, &coords_at(p, dim_prev, m));
            k.into_kernel(&delta(r, d1, d2, &h)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let homotopies = images.len() as u128;
    let isomorphisms = isos.len() as u128;
    if isomorphisms % homotopies != 0 {
        return Err(Error::CheckFailed("isomorphisms are not a union of homotopy classes".into()));
    }
    Ok(IsoCount { isomorphisms, homotopies, classes: isomorphisms / homotopies })
}

/// Towers the generator draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TowerChoice {
    Zmod,
    Dual,
    Cubic,
    SquareZero1,
    SquareZero2,
}

impl TowerChoice {
    pub const ALL: [TowerChoice; 5] =
        [TowerChoice::Zmod, TowerChoice::Dual, TowerChoice::Cubic, TowerChoice::SquareZero1, TowerChoice::SquareZero2];

    pub fn build(self, p: u32) -> Result<Tower> {
        match self {
            TowerChoice::Zmod => Tower::zmod(p, 2, 1),
            TowerChoice::Dual => Tower::trunc_poly(p, 2, 1),
            TowerChoice::Cubic => Tower::trunc_poly(p, 3, 2),
            TowerChoice::SquareZero1 => Tower::square_zero(p, 1),
            TowerChoice::SquareZero2 => Tower::square_zero(p, 2),
        }
    }
}

/// Algebras the generator draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraChoice {
    Scalars,
    /// Trivial deformation of `F_p[x]/(x²)`.
    DualTrivial,
    /// `R̄[x]/(x² − j)` for a random `j ∈ J`.
    SquareRoot,
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub seed: u64,
    pub p: u32,
    pub max_rank: usize,
    pub max_window: usize,
    /// Bound on the kernel coordinate dimensions in degrees 0 and 1.
    pub max_kernel_dim: usize,
    pub towers: Vec<TowerChoice>,
}

impl InstanceSpec {
    pub fn new(seed: u64, p: u32) -> Self {
        InstanceSpec { seed, p, max_rank: 2, max_window: 4, max_kernel_dim: 16, towers: TowerChoice::ALL.to_vec() }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub tower: TowerChoice,
    pub algebra: AlgebraChoice,
    pub alg: Arc<DeformedAlgebra>,
    /// Middle-level complex to lift.
    pub complex: PreComplex,
}

fn random_elem(rng: &mut ChaCha8Rng, ring: &FiniteRing) -> Vec<u32> {
    ring.moduli().iter().map(|&m| rng.gen_range(0..m as u32)).collect()
}

fn build_algebra(choice: AlgebraChoice, tower: Arc<Tower>, rng: &mut ChaCha8Rng) -> Result<DeformedAlgebra> {
    let names = vec!["1".to_string(), "x".to_string()];
    match choice {
        AlgebraChoice::Scalars => DeformedAlgebra::scalars(tower),
        AlgebraChoice::DualTrivial => {
            DeformedAlgebra::trivial(tower, names, vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 0]]])
        }
        AlgebraChoice::SquareRoot => {
            let coords: Vec<u32> = (0..tower.j_dim()).map(|_| rng.gen_range(0..tower.p())).collect();
            let j = tower.j_element(&coords);
            let bar = &tower.bar;
            let (one, zero) = (bar.one(), bar.zero());
            let consts = vec![
                vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
                vec![vec![zero.clone(), one], vec![j, zero]],
            ];
            DeformedAlgebra::custom(tower, names, consts)
        }
    }
}

/// A random nonzero element squaring to zero, if a few draws find one.
fn square_zero_elem(rng: &mut ChaCha8Rng, ring: &FiniteRing) -> Option<Vec<u32>> {
    (0..32).map(|_| random_elem(rng, ring)).find(|x| !ring.is_zero(x) && ring.is_zero(&ring.mul(x, x)))
}

fn random_complex(rng: &mut ChaCha8Rng, alg: &DeformedAlgebra, spec: &InstanceSpec) -> Result<PreComplex> {
    let mid = &alg.mid;
    let window = rng.gen_range(2..=spec.max_window.max(2));
    let ranks: Vec<usize> =
        (0..window).map(|_| if rng.gen_bool(0.8) { rng.gen_range(1..=spec.max_rank.max(1)) } else { 0 }).collect();
    let obj = GradedObject::new(Level::Mid, 0, ranks);
    if rng.gen_bool(0.5) {
        if let Some(n) = square_zero_elem(rng, mid) {
            // multiples of one element with n² = 0 always give d² = 0
            let mut d = GradedMap::zero(mid, &obj, &obj, 1);
            for m in d.comps.iter_mut() {
                for r in 0..m.rows {
                    for c in 0..m.cols {
                        let k = if rng.gen_bool(0.75) { rng.gen_range(1..mid.p()) } else { 0 };
                        let x = mid.scale(&n, k as u64);
                        m.set(r, c, &x);
                    }
                }
            }
            return PreComplex::new(obj, d);
        }
    }
    for _ in 0..64 {
        let mut d = GradedMap::zero(mid, &obj, &obj, 1);
        for m in d.comps.iter_mut() {
            for r in 0..m.rows {
                for c in 0..m.cols {
                    let x = random_elem(rng, mid);
                    m.set(r, c, &x);
                }
            }
        }
        if d.compose(mid, &d)?.is_zero() {
            return PreComplex::new(obj, d);
        }
    }
    // alternate zero components so that d² = 0
    let mut d = GradedMap::zero(mid, &obj, &obj, 1);
    for (k, m) in d.comps.iter_mut().enumerate() {
        if k % 2 == 0 {
            for r in 0..m.rows {
                for c in 0..m.cols {
                    let x = random_elem(rng, mid);
                    m.set(r, c, &x);
                }
            }
        }
    }
    PreComplex::new(obj, d)
}

/// Deterministic random lifting instance; retries until the kernel
/// coordinate dimensions fit the caps in `spec`.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ spec.p as u64);
    if spec.towers.is_empty() {
        return Err(Error::Validation("no towers to draw from".into()));
    }
    for _ in 0..256 {
        let tower = spec.towers[rng.gen_range(0..spec.towers.len())];
        let algebra = match rng.gen_range(0..4) {
            0 | 1 => AlgebraChoice::Scalars,
            2 => AlgebraChoice::DualTrivial,
            _ => AlgebraChoice::SquareRoot,
        };
        let t = Arc::new(tower.build(spec.p)?);
        let alg = Arc::new(build_algebra(algebra, t, &mut rng)?);
        let complex = random_complex(&mut rng, &alg, spec)?;
        let base = reduce_complex(&alg, &complex, Level::Base)?;
        let k = KernelComplex::new(alg.clone(), &base, &base)?;
        if k.dim(1) <= spec.max_kernel_dim && k.dim(0) <= spec.max_kernel_dim && k.dim(-1) <= spec.max_kernel_dim {
            return Ok(Instance { tower, algebra, alg, complex });
        }
    }
    Err(Error::Validation("could not draw an instance within the caps".into()))
}

/// Matrix over the algebra at a level, from row-major entries.
pub fn matrix_of(alg: &DeformedAlgebra, level: Level, rows: usize, cols: usize, entries: &[Vec<u32>]) -> Result<AlgMatrix> {
    AlgMatrix::from_entries(level, alg.ring(level), rows, cols, entries)
}
