//! Lifting complexes through a homotopy equivalence with a lifted partner,
//! and the homotopy-category classifications built on it.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{AlgMatrix, DeformedAlgebra, Level};
use crate::cohomology::KernelComplex;
use crate::complex::{delta, graded_lift, reduce_complex, reduce_map, GradedMap, GradedObject, PreComplex};
use crate::error::{Error, Result};
use crate::finring::FiniteRing;
use crate::obstruction::{h_minus_one_guard, DiffProblem, GuardStatus, LiftReport, MapProblem};

/// A homotopy equivalence `f: C → D`, `g: D → C` at the middle level with
/// `δ(H) = 1 − gf` and `δ(K) = 1 − fg`.
#[derive(Clone, Debug)]
pub struct HomotopyEquivData {
    pub c: PreComplex,
    pub d: PreComplex,
    pub f: GradedMap,
    pub g: GradedMap,
    pub h: GradedMap,
    pub k: GradedMap,
}

impl HomotopyEquivData {
    pub fn new(
        ring: &FiniteRing,
        c: PreComplex,
        d: PreComplex,
        f: GradedMap,
        g: GradedMap,
        h: GradedMap,
        k: GradedMap,
    ) -> Result<Self> {
        let data = HomotopyEquivData { c, d, f, g, h, k };
        if let Some(what) = data.failure(ring)? {
            return Err(Error::NotHomotopyEquivalence(what.into()));
        }
        Ok(data)
    }

    fn shapes_ok(&self) -> bool {
        let (c, d) = (&self.c.obj, &self.d.obj);
        self.f.src == *c
            && self.f.tgt == *d
            && self.f.degree == 0
            && self.g.src == *d
            && self.g.tgt == *c
            && self.g.degree == 0
            && self.h.src == *c
            && self.h.tgt == *c
            && self.h.degree == -1
            && self.k.src == *d
            && self.k.tgt == *d
            && self.k.degree == -1
    }

    pub fn is_valid(&self, ring: &FiniteRing) -> Result<bool> {
        Ok(self.failure(ring)?.is_none())
    }

    /// First violated condition, if any.
    pub fn failure(&self, ring: &FiniteRing) -> Result<Option<&'static str>> {
        if !self.shapes_ok() {
            return Ok(Some("maps do not have the expected shapes and degrees"));
        }
        if !self.c.is_complex(ring)? || !self.d.is_complex(ring)? {
            return Ok(Some("endpoints are not complexes"));
        }
        let (dc, dd) = (&self.c.d, &self.d.d);
        let one_c = GradedMap::identity(ring, &self.c.obj);
        let one_d = GradedMap::identity(ring, &self.d.obj);
        let gf = self.g.compose(ring, &self.f)?;
        let fg = self.f.compose(ring, &self.g)?;
        Ok(if !delta(ring, dc, dd, &self.f)?.is_zero() || !delta(ring, dd, dc, &self.g)?.is_zero() {
            Some("f or g is not a cochain map")
        } else if delta(ring, dc, dc, &self.h)? != one_c.sub(ring, &gf)? {
            Some("δ(H) ≠ 1 − gf")
        } else if delta(ring, dd, dd, &self.k)? != one_d.sub(ring, &fg)? {
            Some("δ(K) ≠ 1 − fg")
        } else {
            None
        })
    }

    /// `K′ = K + f(Hg − gK)`.
    pub fn repaired_k(&self, ring: &FiniteRing) -> Result<GradedMap> {
        let hg = self.h.compose(ring, &self.g)?;
        let gk = self.g.compose(ring, &self.k)?;
        self.k.add(ring, &self.f.compose(ring, &hg.sub(ring, &gk)?)?)
    }

    /// `Hg − gK`, a degree −1 cocycle of `Hom(D, C)`.
    pub fn mixed_homotopy(&self, ring: &FiniteRing) -> Result<GradedMap> {
        self.h.compose(ring, &self.g)?.sub(ring, &self.g.compose(ring, &self.k)?)
    }

    /// The same data with `K` replaced by `K′`.
    pub fn repaired(&self, ring: &FiniteRing) -> Result<Self> {
        Ok(HomotopyEquivData { k: self.repaired_k(ring)?, ..self.clone() })
    }
}

/// Bar-level candidates at some point of the pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrudeState {
    pub d_c: GradedMap,
    pub f: GradedMap,
    pub g: GradedMap,
    pub h: GradedMap,
    pub k: GradedMap,
}

/// A state snapshot with its defects, recorded after each stage.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: &'static str,
    pub state: CrudeState,
    /// `1 − ḡf̄ − δ̄(H̄)`.
    pub mu_h: GradedMap,
    /// `1 − f̄ḡ − δ̄(K̄)`.
    pub mu_k: GradedMap,
}

/// Output of the pipeline.
#[derive(Clone, Debug)]
pub struct CrudeOutput {
    pub state: CrudeState,
    /// Middle-level `K′` that `K̄` reduces to.
    pub k_repaired: GradedMap,
    pub trace: Vec<StageRecord>,
}

struct Pipeline<'a> {
    alg: &'a DeformedAlgebra,
    d_d: GradedMap,
    st: CrudeState,
    one_c: GradedMap,
    one_d: GradedMap,
    trace: Vec<StageRecord>,
}

fn internal(stage: &str, detail: &str) -> Error {
    Error::InternalObstruction { stage: stage.to_string(), detail: detail.to_string() }
}

impl Pipeline<'_> {
    fn r(&self) -> &FiniteRing {
        &self.alg.bar
    }

    fn delta_cc(&self, x: &GradedMap) -> Result<GradedMap> {
        delta(self.r(), &self.st.d_c, &self.st.d_c, x)
    }

    fn delta_cd(&self, x: &GradedMap) -> Result<GradedMap> {
        delta(self.r(), &self.st.d_c, &self.d_d, x)
    }

    fn delta_dc(&self, x: &GradedMap) -> Result<GradedMap> {
        delta(self.r(), &self.d_d, &self.st.d_c, x)
    }

    fn delta_dd(&self, x: &GradedMap) -> Result<GradedMap> {
        delta(self.r(), &self.d_d, &self.d_d, x)
    }

    fn mu_h(&self) -> Result<GradedMap> {
        let r = self.r();
        self.one_c
            .sub(r, &self.st.g.compose(r, &self.st.f)?)?
            .sub(r, &self.delta_cc(&self.st.h)?)
    }

    fn mu_k(&self) -> Result<GradedMap> {
        let r = self.r();
        self.one_d
            .sub(r, &self.st.f.compose(r, &self.st.g)?)?
            .sub(r, &self.delta_dd(&self.st.k)?)
    }

    /// Given `ξ: X → C` and `ε: X → D` with `f̄ξ = δ̄(ε)`, returns `η = ḡε + H̄ξ`.
    fn eta(&self, xi: &GradedMap, eps: &GradedMap) -> Result<GradedMap> {
        let r = self.r();
        self.st.g.compose(r, eps)?.add(r, &self.st.h.compose(r, xi)?)
    }

    fn record(&mut self, stage: &'static str) -> Result<()> {
        let (mu_h, mu_k) = (self.mu_h()?, self.mu_k()?);
        if !self.alg_reduces_to_zero(&mu_h)? || !self.alg_reduces_to_zero(&mu_k)? {
            return Err(internal(stage, "defect does not vanish at the middle level"));
        }
        self.trace.push(StageRecord { stage, state: self.st.clone(), mu_h, mu_k });
        Ok(())
    }

    fn alg_reduces_to_zero(&self, x: &GradedMap) -> Result<bool> {
        Ok(reduce_map(self.alg, x, Level::Mid)?.is_zero())
    }

    fn square_zero(&self) -> Result<bool> {
        Ok(self.st.d_c.compose(self.r(), &self.st.d_c)?.is_zero())
    }
}

/// Runs the five-stage pipeline: given a homotopy equivalence at the middle
/// level and a lift `d̄_D` of the target differential, produces a lift of the
/// source differential on its canonical graded lift together with lifts of
/// `f, g, H` and of the repaired `K′`, all satisfying their equations exactly.
pub fn crude_lift(alg: &Arc<DeformedAlgebra>, e: &HomotopyEquivData, d_bar_d: &GradedMap) -> Result<CrudeOutput> {
    let mid = &alg.mid;
    if e.c.level() != Level::Mid || e.d.level() != Level::Mid {
        return Err(Error::LevelMismatch { expected: "mid".into(), found: e.c.level().to_string() });
    }
    if let Some(what) = e.failure(mid)? {
        return Err(Error::NotHomotopyEquivalence(what.into()));
    }
    if d_bar_d.level != Level::Bar
        || d_bar_d.src != e.d.obj.at_level(Level::Bar)
        || reduce_map(alg, d_bar_d, Level::Mid)? != e.d.d
        || !d_bar_d.compose(&alg.bar, d_bar_d)?.is_zero()
    {
        return Err(Error::Validation("d̄_D must be a differential lifting d_D".into()));
    }
    let c_bar = e.c.obj.at_level(Level::Bar);
    let d_bar = e.d.obj.at_level(Level::Bar);
    let mut pl = Pipeline {
        alg,
        d_d: d_bar_d.clone(),
        st: CrudeState {
            d_c: graded_lift(alg, &e.c.d),
            f: graded_lift(alg, &e.f),
            g: graded_lift(alg, &e.g),
            h: graded_lift(alg, &e.h),
            k: graded_lift(alg, &e.k),
        },
        one_c: GradedMap::identity(&alg.bar, &c_bar),
        one_d: GradedMap::identity(&alg.bar, &d_bar),
        trace: Vec::new(),
    };
    pl.record("start")?;
    let r = alg.bar.clone();

    // (i) ξ = d̄_C², ε = −δ̄(f̄), d̄_C ← d̄_C − (ḡε + H̄ξ)
    let xi = pl.st.d_c.compose(&r, &pl.st.d_c)?;
    let eps = pl.delta_cd(&pl.st.f)?.neg(&r);
    let eta = pl.eta(&xi, &eps)?;
    if pl.delta_cc(&eta)? != xi {
        return Err(internal("i", "η does not bound d̄_C²"));
    }
    pl.st.d_c = pl.st.d_c.sub(&r, &eta)?;
    if !pl.square_zero()? {
        return Err(internal("i", "d̄_C² ≠ 0"));
    }
    pl.record("i")?;

    // (ii) ∂_C = ḡδ̄(f̄), d̄_C ← d̄_C + ∂_C, f̄ ← f̄ − K̄δ̄(f̄)
    let phi = pl.delta_cd(&pl.st.f)?;
    let corr = pl.st.g.compose(&r, &phi)?;
    pl.st.d_c = pl.st.d_c.add(&r, &corr)?;
    pl.st.f = pl.st.f.sub(&r, &pl.st.k.compose(&r, &phi)?)?;
    if !pl.square_zero()? || !pl.delta_cd(&pl.st.f)?.is_zero() {
        return Err(internal("ii", "δ̄(f̄) ≠ 0 or d̄_C² ≠ 0"));
    }
    pl.record("ii")?;

    // (iii) ξ = δ̄(ḡ), ε = −μ_K, ḡ ← ḡ − (ḡε + H̄ξ)
    let xi = pl.delta_dc(&pl.st.g)?;
    let eps = pl.mu_k()?.neg(&r);
    if pl.st.f.compose(&r, &xi)? != pl.delta_dd(&eps)? {
        return Err(internal("iii", "f̄ξ ≠ δ̄(ε)"));
    }
    let eta = pl.eta(&xi, &eps)?;
    pl.st.g = pl.st.g.sub(&r, &eta)?;
    if !pl.square_zero()? || !pl.delta_cd(&pl.st.f)?.is_zero() || !pl.delta_dc(&pl.st.g)?.is_zero() {
        return Err(internal("iii", "δ̄(ḡ) ≠ 0"));
    }
    pl.record("iii")?;

    // (iv) K̄ ← K̄ + f̄(H̄ḡ − ḡK̄)
    let hg = pl.st.h.compose(&r, &pl.st.g)?;
    let gk = pl.st.g.compose(&r, &pl.st.k)?;
    pl.st.k = pl.st.k.add(&r, &pl.st.f.compose(&r, &hg.sub(&r, &gk)?)?)?;
    let k_repaired = e.repaired_k(mid)?;
    if reduce_map(alg, &pl.st.k, Level::Mid)? != k_repaired {
        return Err(internal("iv", "K̄ does not reduce to K′"));
    }
    pl.record("iv")?;

    // (v) ḡ ← ḡ + μ_H ḡ, then solve δ̄(α) = μ_H, δ̄(β) = μ_K
    let gamma = pl.mu_h()?.compose(&r, &pl.st.g)?;
    pl.st.g = pl.st.g.add(&r, &gamma)?;
    if !pl.delta_dc(&pl.st.g)?.is_zero() {
        return Err(internal("v", "γ is not a cocycle"));
    }
    let base_c = reduce_complex(alg, &e.c, Level::Base)?;
    let base_d = reduce_complex(alg, &e.d, Level::Base)?;
    let kc = KernelComplex::new(alg.clone(), &base_c, &base_c)?;
    let kd = KernelComplex::new(alg.clone(), &base_d, &base_d)?;
    let mu_h = kc.into_kernel(&pl.mu_h()?)?;
    let alpha = kc.is_coboundary(0, &mu_h).ok_or_else(|| internal("v", "μ_H is not a coboundary"))?;
    pl.st.h = pl.st.h.add(&r, &kc.out_of_kernel(-1, &alpha))?;
    let mu_k = kd.into_kernel(&pl.mu_k()?)?;
    let beta = kd.is_coboundary(0, &mu_k).ok_or_else(|| internal("v", "μ_K is not a coboundary"))?;
    pl.st.k = pl.st.k.add(&r, &kd.out_of_kernel(-1, &beta))?;
    pl.record("v")?;

    let out = CrudeOutput { state: pl.st, k_repaired, trace: pl.trace };
    let bad = check_postconditions(alg, e, d_bar_d, &out)?;
    if let Some(what) = bad {
        return Err(internal("v", what));
    }
    Ok(out)
}

/// Checks the five output equations and the reductions; returns the first
/// failure.
pub fn check_postconditions(
    alg: &DeformedAlgebra,
    e: &HomotopyEquivData,
    d_bar_d: &GradedMap,
    out: &CrudeOutput,
) -> Result<Option<&'static str>> {
    let r = &alg.bar;
    let s = &out.state;
    let one_c = GradedMap::identity(r, &s.d_c.src);
    let one_d = GradedMap::identity(r, &d_bar_d.src);
    let checks: [(&'static str, bool); 10] = [
        ("d̄_C² = 0", s.d_c.compose(r, &s.d_c)?.is_zero()),
        ("δ̄(f̄) = 0", delta(r, &s.d_c, d_bar_d, &s.f)?.is_zero()),
        ("δ̄(ḡ) = 0", delta(r, d_bar_d, &s.d_c, &s.g)?.is_zero()),
        ("δ̄(H̄) = 1 − ḡf̄", delta(r, &s.d_c, &s.d_c, &s.h)? == one_c.sub(r, &s.g.compose(r, &s.f)?)?),
        ("δ̄(K̄) = 1 − f̄ḡ", delta(r, d_bar_d, d_bar_d, &s.k)? == one_d.sub(r, &s.f.compose(r, &s.g)?)?),
        ("d̄_C reduces to d_C", reduce_map(alg, &s.d_c, Level::Mid)? == e.c.d),
        ("f̄ reduces to f", reduce_map(alg, &s.f, Level::Mid)? == e.f),
        ("ḡ reduces to g", reduce_map(alg, &s.g, Level::Mid)? == e.g),
        ("H̄ reduces to H", reduce_map(alg, &s.h, Level::Mid)? == e.h),
        ("K̄ reduces to K′", reduce_map(alg, &s.k, Level::Mid)? == out.k_repaired),
    ];
    Ok(checks.iter().find(|(_, ok)| !ok).map(|(name, _)| *name))
}

/// A lift of a complex presented through a homotopy equivalence to a lifted
/// complex, made strict on the canonical graded lift.
#[derive(Clone, Debug)]
pub struct StrictLift {
    pub d_c: GradedMap,
    pub f: GradedMap,
    pub g: GradedMap,
    pub h: GradedMap,
    pub k: GradedMap,
}

pub fn strictify_homotopy_lift(alg: &Arc<DeformedAlgebra>, e: &HomotopyEquivData, d_bar_d: &GradedMap) -> Result<StrictLift> {
    let out = crude_lift(alg, e, d_bar_d)?;
    let s = out.state;
    Ok(StrictLift { d_c: s.d_c, f: s.f, g: s.g, h: s.h, k: s.k })
}

/// Classification of lifts in the homotopy category, read off the strict
/// classification on the canonical graded lift.
pub fn classify_homotopy_lifts(alg: &Arc<DeformedAlgebra>, c: &PreComplex) -> Result<LiftReport> {
    let problem = DiffProblem::new(alg.clone(), c)?;
    match problem.classify() {
        Err(Error::Obstructed) => problem.lift(),
        other => other,
    }
}

/// A homotopy-category map lift report with the status of the `H⁻¹` guard.
#[derive(Clone, Debug)]
pub struct HomotopyMapReport {
    pub report: LiftReport,
    pub guard: GuardStatus,
}

impl HomotopyMapReport {
    /// Fails with [`Error::GuardUndecidable`] when the guard could not be decided.
    pub fn require_guard(self) -> Result<Self> {
        match self.guard {
            GuardStatus::Undecided { size } => Err(Error::GuardUndecidable(size)),
            _ => Ok(self),
        }
    }
}

/// Lifts of a degree-0 cochain map up to homotopy between fixed lifted
/// endpoints. The affine structure over `H⁰` is marked guaranteed only when
/// `H⁻¹Hom(C, D)` is verified to vanish.
pub fn classify_homotopy_map_lifts(
    alg: &Arc<DeformedAlgebra>,
    src: &PreComplex,
    tgt: &PreComplex,
    f: &GradedMap,
    cap: u128,
) -> Result<HomotopyMapReport> {
    if f.degree != 0 {
        return Err(Error::ShapeMismatch("homotopy-category map lifts need a degree-0 map".into()));
    }
    let problem = MapProblem::new(alg.clone(), src, tgt, f)?;
    let src_mid = reduce_complex(alg, src, Level::Mid)?;
    let tgt_mid = reduce_complex(alg, tgt, Level::Mid)?;
    let guard = h_minus_one_guard(alg, &src_mid, &tgt_mid, cap)?;
    let mut report = match problem.classify() {
        Err(Error::Obstructed) => problem.lift()?,
        other => other?,
    };
    if let Some(t) = report.torsor.as_mut() {
        t.guaranteed = guard == GuardStatus::Vanishes;
    }
    Ok(HomotopyMapReport { report, guard })
}

/// Given a strict lift `ḡ` of a map `g` and a middle-level homotopy `H`
/// with `δ(H) = g − f`, returns a strict lift `f̄` of `f` and a lift `H̄` of
/// `H` with `δ̄(H̄) = ḡ − f̄`.
pub fn align_map_lift(
    alg: &Arc<DeformedAlgebra>,
    src: &PreComplex,
    tgt: &PreComplex,
    f: &GradedMap,
    g_bar: &GradedMap,
    h: &GradedMap,
) -> Result<(GradedMap, GradedMap)> {
    let r = &alg.bar;
    let problem = MapProblem::new(alg.clone(), src, tgt, f)?;
    let g = reduce_map(alg, g_bar, Level::Mid)?;
    let src_mid = reduce_complex(alg, src, Level::Mid)?;
    let tgt_mid = reduce_complex(alg, tgt, Level::Mid)?;
    if !crate::complex::is_homotopy(&alg.mid, &src_mid, &tgt_mid, h, f, &g)? {
        return Err(Error::NotAHomotopy);
    }
    if !delta(r, &src.d, &tgt.d, g_bar)?.is_zero() {
        return Err(Error::NotCochainMap);
    }
    let h_bar = graded_lift(alg, h);
    let f_bar = problem.canonical.clone();
    // o(H) = [ḡ − f̄ − δ̄(H̄)]; absorbing its representative into f̄ kills it
    let defect = g_bar.sub(r, &f_bar)?.sub(r, &delta(r, &src.d, &tgt.d, &h_bar)?)?;
    let f_bar = f_bar.add(r, &defect)?;
    if !problem.is_lift(&f_bar)? || !crate::complex::is_homotopy(r, src, tgt, &h_bar, &f_bar, g_bar)? {
        return Err(Error::CheckFailed("aligned map lift fails its equations".into()));
    }
    Ok((f_bar, h_bar))
}

/// A homotopy equivalence instance built as `D = P(C ⊕ E)P⁻¹` with `E`
/// contractible, together with a lift of `d_D`.
#[derive(Clone, Debug)]
pub struct EquivInstance {
    pub data: HomotopyEquivData,
    pub d_bar_d: GradedMap,
    /// The lift of `d_C` used to build `d̄_D`.
    pub d_bar_c: GradedMap,
}

fn elementary_mix(
    alg: &DeformedAlgebra,
    obj: &GradedObject,
    steps: usize,
    rng: &mut impl Rng,
) -> (GradedMap, GradedMap) {
    let r = &alg.bar;
    let bar_obj = obj.at_level(Level::Bar);
    let mut p = GradedMap::identity(r, &bar_obj);
    let mut q = p.clone();
    for (k, i) in obj.degrees().enumerate() {
        let n = obj.rank(i);
        if n < 2 {
            continue;
        }
        for _ in 0..steps {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let c: Vec<u32> = r.moduli().iter().map(|&m| rng.gen_range(0..m as u32)).collect();
            let mut e = AlgMatrix::identity(Level::Bar, r, n);
            e.set(a, b, &c);
            let mut e_inv = AlgMatrix::identity(Level::Bar, r, n);
            e_inv.set(a, b, &r.neg(&c));
            p.comps[k] = e.mul(r, &p.comps[k]).expect("square");
            q.comps[k] = q.comps[k].mul(r, &e_inv).expect("square");
        }
    }
    (p, q)
}

fn inclusion(ring: &FiniteRing, small: &GradedObject, big: &GradedObject, offset: impl Fn(i32) -> usize) -> GradedMap {
    let mut m = GradedMap::zero(ring, small, big, 0);
    for (k, i) in small.degrees().enumerate() {
        for t in 0..small.rank(i) {
            m.comps[k].set(offset(i) + t, t, &ring.one());
        }
    }
    m
}

fn transpose_inclusion(ring: &FiniteRing, big: &GradedObject, small: &GradedObject, offset: impl Fn(i32) -> usize) -> GradedMap {
    let mut m = GradedMap::zero(ring, big, small, 0);
    for i in small.degrees() {
        if i < big.lo || i > big.hi() {
            continue;
        }
        let k = (i - big.lo) as usize;
        for t in 0..small.rank(i) {
            m.comps[k].set(t, offset(i) + t, &ring.one());
        }
    }
    m
}

/// Builds `D = C ⊕ E` where `E` is a sum of two-term pieces `X →(1) X` placed in
/// degrees `(i, i + 1)` with rank `r` for each `(i, r)` in `pieces`, then
/// conjugates by a random product of elementary matrices.
pub fn contractible_extension(
    alg: &DeformedAlgebra,
    c_bar: &PreComplex,
    pieces: &[(i32, usize)],
    mix_steps: usize,
    rng: &mut impl Rng,
) -> Result<EquivInstance> {
    let bar = &alg.bar;
    let mid = &alg.mid;
    if c_bar.level() != Level::Bar || !c_bar.is_complex(bar)? {
        return Err(Error::NotADifferential);
    }
    let c = reduce_complex(alg, c_bar, Level::Mid)?;
    // E as a direct sum of cones on identities
    let mut e_bar = PreComplex::zero(bar, &GradedObject::new(Level::Bar, c.obj.lo, vec![]));
    for &(i, r) in pieces {
        let obj = GradedObject::new(Level::Bar, i, vec![r, r]);
        let mut d = GradedMap::zero(bar, &obj, &obj, 1);
        d.comps[0] = AlgMatrix::identity(Level::Bar, bar, r);
        e_bar = e_bar.direct_sum(bar, &PreComplex { obj, d });
    }
    let sum = c_bar.direct_sum(bar, &e_bar);
    let c_obj = c_bar.obj.clone();
    let e_obj = e_bar.obj.clone();
    let d_obj = sum.obj.clone();
    let c_off = |_: i32| 0usize;
    let e_off = |i: i32| c_obj.rank(i);
    let incl = inclusion(bar, &c_obj, &d_obj, c_off);
    let proj = transpose_inclusion(bar, &d_obj, &c_obj, c_off);
    // contracting homotopy on E: identity from degree i + 1 back to degree i
    let mut k_e = GradedMap::zero(bar, &e_obj, &e_obj, -1);
    let mut used: std::collections::HashMap<i32, usize> = std::collections::HashMap::new();
    for &(i, r) in pieces {
        let lo_off = *used.get(&i).unwrap_or(&0);
        let hi_off = *used.get(&(i + 1)).unwrap_or(&0);
        let k = (i + 1 - e_obj.lo) as usize;
        for t in 0..r {
            k_e.comps[k].set(lo_off + t, hi_off + t, &bar.one());
        }
        *used.entry(i).or_insert(0) += r;
        *used.entry(i + 1).or_insert(0) += r;
    }
    let e_incl = inclusion(bar, &e_obj, &d_obj, e_off);
    let e_proj = transpose_inclusion(bar, &d_obj, &e_obj, e_off);
    let k_sum = e_incl.compose(bar, &k_e.compose(bar, &e_proj)?)?;
    let (p, q) = elementary_mix(alg, &d_obj.at_level(Level::Mid), mix_steps, rng);
    let d_bar_d = p.compose(bar, &sum.d.compose(bar, &q)?)?;
    let f_bar = p.compose(bar, &incl)?;
    let g_bar = proj.compose(bar, &q)?;
    let k_bar = p.compose(bar, &k_sum.compose(bar, &q)?)?;
    let h_bar = GradedMap::zero(bar, &c_obj, &c_obj, -1);
    let to_mid = |x: &GradedMap| reduce_map(alg, x, Level::Mid);
    let d_mid = PreComplex { obj: d_obj.at_level(Level::Mid), d: to_mid(&d_bar_d)? };
    let data = HomotopyEquivData::new(mid, c, d_mid, to_mid(&f_bar)?, to_mid(&g_bar)?, to_mid(&h_bar)?, to_mid(&k_bar)?)?;
    Ok(EquivInstance { data, d_bar_d, d_bar_c: c_bar.d.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finring::Tower;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z4() -> Arc<DeformedAlgebra> {
        Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::zmod(2, 2, 1).unwrap())).unwrap())
    }

    fn scalar_d(alg: &DeformedAlgebra, obj: &GradedObject, entries: &[u32]) -> GradedMap {
        let r = alg.ring(obj.level);
        let mut d = GradedMap::zero(r, obj, obj, 1);
        for (k, i) in obj.degrees().enumerate() {
            if obj.rank(i) == 1 && obj.rank(i + 1) == 1 {
                let mut x = vec![0u32; r.rank()];
                x[0] = entries[k];
                d.comps[k].set(0, 0, &x);
            }
        }
        d
    }

    #[test]
    fn identity_equivalence_returns_given_lift() {
        let a = z4();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let c = PreComplex::zero(&a.mid, &obj);
        let one = GradedMap::identity(&a.mid, &obj);
        let zero = GradedMap::zero(&a.mid, &obj, &obj, -1);
        let e = HomotopyEquivData::new(&a.mid, c.clone(), c, one.clone(), one, zero.clone(), zero).unwrap();
        let d_bar = scalar_d(&a, &obj.at_level(Level::Bar), &[2, 0, 0]);
        let out = crude_lift(&a, &e, &d_bar).unwrap();
        assert_eq!(out.state.d_c, d_bar);
        assert_eq!(out.state.f, GradedMap::identity(&a.bar, &d_bar.src));
        assert_eq!(out.state.g, out.state.f);
        assert!(out.state.h.is_zero() && out.state.k.is_zero());
        assert_eq!(out.trace.len(), 6);
    }

    #[test]
    fn contractible_extension_over_z4() {
        let a = z4();
        let obj = GradedObject::new(Level::Bar, 0, vec![1, 1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let problem = DiffProblem::new(a.clone(), &PreComplex::zero(&a.mid, &obj.at_level(Level::Mid))).unwrap();
        let lifts = problem.classify().unwrap().torsor.unwrap().representatives;
        for (n, d) in lifts.iter().enumerate() {
            let c_bar = PreComplex::new(obj.clone(), d.clone()).unwrap();
            let inst = contractible_extension(&a, &c_bar, &[(0, 1), (1, 2)], 4 + n, &mut rng).unwrap();
            let out = crude_lift(&a, &inst.data, &inst.d_bar_d).unwrap();
            assert_eq!(check_postconditions(&a, &inst.data, &inst.d_bar_d, &out).unwrap(), None);
            assert!(lifts.contains(&out.state.d_c));
            assert!(problem.is_lift(&out.state.d_c).unwrap());
        }
    }

    #[test]
    fn k_repair_kills_mixed_class() {
        let a = z4();
        let obj = GradedObject::new(Level::Bar, 0, vec![1, 1]);
        let c_bar = PreComplex::new(obj.clone(), scalar_d(&a, &obj, &[2, 0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = contractible_extension(&a, &c_bar, &[(0, 1), (-1, 1)], 6, &mut rng).unwrap();
        let e = &inst.data;
        let mid = &a.mid;
        let rep = e.repaired(mid).unwrap();
        assert!(rep.is_valid(mid).unwrap());
        let m = rep.mixed_homotopy(mid).unwrap();
        let m0 = e.mixed_homotopy(mid).unwrap();
        let witness = e.h.compose(mid, &m0).unwrap();
        assert_eq!(delta(mid, &e.d.d, &e.c.d, &witness).unwrap(), m);
    }

    #[test]
    fn rejects_non_equivalence() {
        let a = z4();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1]);
        let c = PreComplex::zero(&a.mid, &obj);
        let one = GradedMap::identity(&a.mid, &obj);
        let zero0 = GradedMap::zero(&a.mid, &obj, &obj, 0);
        let zero = GradedMap::zero(&a.mid, &obj, &obj, -1);
        let err = HomotopyEquivData::new(&a.mid, c.clone(), c, one, zero0, zero.clone(), zero).unwrap_err();
        assert!(matches!(err, Error::NotHomotopyEquivalence(_)));
    }

    #[test]
    fn identity_map_lift_classes_and_guard() {
        let a = z4();
        let obj = GradedObject::new(Level::Bar, 0, vec![1, 1]);
        let c0 = PreComplex::new(obj.clone(), scalar_d(&a, &obj, &[0, 0])).unwrap();
        let c1 = PreComplex::new(obj.clone(), scalar_d(&a, &obj, &[2, 0])).unwrap();
        let one = GradedMap::identity(&a.mid, &obj.at_level(Level::Mid));
        let same = classify_homotopy_map_lifts(&a, &c0, &c0, &one, 1 << 20).unwrap();
        assert!(same.report.obstruction.is_zero());
        assert!(same.report.torsor.as_ref().unwrap().representatives.contains(&GradedMap::identity(&a.bar, &obj)));
        // Hom⁻¹ = F_2 with δ = 0
        assert!(matches!(same.guard, GuardStatus::NonZero { cocycles: 2, coboundaries: 1 }));
        assert!(!same.report.torsor.unwrap().guaranteed);
        let other = classify_homotopy_map_lifts(&a, &c0, &c1, &one, 1 << 20).unwrap();
        assert!(!other.report.obstruction.is_zero());
        assert!(other.report.witness.is_none());
        let undecided = classify_homotopy_map_lifts(&a, &c0, &c0, &one, 1).unwrap();
        assert_eq!(undecided.require_guard().unwrap_err(), Error::GuardUndecidable(2));
    }

    #[test]
    fn alignment_produces_strict_lift_of_homotopic_map() {
        let a = z4();
        let obj = GradedObject::new(Level::Bar, 0, vec![1, 1]);
        let c = PreComplex::new(obj.clone(), scalar_d(&a, &obj, &[1, 0])).unwrap();
        let mid_obj = obj.at_level(Level::Mid);
        let zero = GradedMap::zero(&a.mid, &mid_obj, &mid_obj, 0);
        // identity is null-homotopic on the cone of 1: H = 1 from degree 1 to 0
        let mut h = GradedMap::zero(&a.mid, &mid_obj, &mid_obj, -1);
        h.comps[1].set(0, 0, &a.mid.one());
        let g_bar = GradedMap::identity(&a.bar, &obj);
        let (f_bar, h_bar) = align_map_lift(&a, &c, &c, &zero, &g_bar, &h).unwrap();
        assert_eq!(reduce_map(&a, &f_bar, Level::Mid).unwrap(), zero);
        assert!(crate::complex::is_homotopy(&a.bar, &c, &c, &h_bar, &f_bar, &g_bar).unwrap());
    }
}
