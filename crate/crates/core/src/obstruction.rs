//! Obstruction classes and torsor classifications for lifting differentials,
//! cochain maps and homotopies along one step of a tower.

use std::sync::Arc;

use crate::algebra::{AlgMatrix, DeformedAlgebra, Level};
use crate::cohomology::{CohClass, KernelComplex};
use crate::complex::{delta, graded_lift, reduce_complex, reduce_map, GradedMap, GradedObject, PreComplex};
use crate::error::{Error, Result};
use crate::finring::FiniteRing;
use crate::linalg::neg_vec;

/// Torsor data attached to an unobstructed problem.
#[derive(Clone, Debug)]
pub struct Torsor {
    /// Degree of the acting cohomology group.
    pub degree: i32,
    pub h_dim: usize,
    /// `p^{h_dim}`.
    pub count: u128,
    /// One lift per class, in lexicographic order of the acting class.
    pub representatives: Vec<GradedMap>,
    /// Difference class of each representative relative to the first.
    pub differences: Vec<CohClass>,
    /// Whether the affine structure is guaranteed (false when a required
    /// vanishing hypothesis could not be confirmed).
    pub guaranteed: bool,
}

/// Outcome of a lifting problem.
#[derive(Clone, Debug)]
pub struct LiftReport {
    pub obstruction: CohClass,
    /// Dimension of the cohomology group housing the obstruction.
    pub obstruction_h_dim: usize,
    pub witness: Option<GradedMap>,
    pub torsor: Option<Torsor>,
}

impl LiftReport {
    pub fn lifts(&self) -> bool {
        self.witness.is_some()
    }
}

fn check_level(level: Level, expected: Level) -> Result<()> {
    if level != expected {
        return Err(Error::LevelMismatch { expected: expected.to_string(), found: level.to_string() });
    }
    Ok(())
}

fn pow_count(p: u32, n: usize) -> u128 {
    (p as u128).pow(n as u32)
}

/// Adds a kernel element given by coordinates to a bar-level map.
fn add_kernel(k: &KernelComplex, f: &GradedMap, coords: &[u32]) -> Result<GradedMap> {
    f.add(&k.alg.bar, &k.out_of_kernel(f.degree, coords))
}

/// Lifting a differential on the canonical graded lift of a middle complex.
#[derive(Clone, Debug)]
pub struct DiffProblem {
    pub alg: Arc<DeformedAlgebra>,
    pub mid: PreComplex,
    pub base: PreComplex,
    pub kernel: KernelComplex,
    /// Entrywise `σ`-lift of the differential.
    pub canonical: GradedMap,
}

impl DiffProblem {
    pub fn new(alg: Arc<DeformedAlgebra>, mid: &PreComplex) -> Result<Self> {
        check_level(mid.level(), Level::Mid)?;
        if !mid.is_complex(&alg.mid)? {
            return Err(Error::NotADifferential);
        }
        let base = reduce_complex(&alg, mid, Level::Base)?;
        let kernel = KernelComplex::new(alg.clone(), &base, &base)?;
        let canonical = graded_lift(&alg, &mid.d);
        Ok(DiffProblem { alg, mid: mid.clone(), base, kernel, canonical })
    }

    pub fn bar_obj(&self) -> GradedObject {
        self.mid.obj.at_level(Level::Bar)
    }

    fn bar(&self) -> &FiniteRing {
        &self.alg.bar
    }

    /// Whether a bar map is a graded lift of the differential.
    pub fn is_graded_lift(&self, dbar: &GradedMap) -> Result<bool> {
        Ok(dbar.level == Level::Bar && dbar.src == self.bar_obj() && reduce_map(&self.alg, dbar, Level::Mid)? == self.mid.d)
    }

    /// Whether a bar map is a lift: a graded lift squaring to zero.
    pub fn is_lift(&self, dbar: &GradedMap) -> Result<bool> {
        Ok(self.is_graded_lift(dbar)? && dbar.compose(self.bar(), dbar)?.is_zero())
    }

    /// `[d̄²] ∈ H²` computed from an arbitrary graded lift.
    pub fn obstruction_of_lift(&self, dbar: &GradedMap) -> Result<CohClass> {
        if !self.is_graded_lift(dbar)? {
            return Err(Error::Validation("not a graded lift of the differential".into()));
        }
        let sq = dbar.compose(self.bar(), dbar)?;
        let z = self.kernel.into_kernel(&sq)?;
        self.kernel.coh_class(2, &z)
    }

    pub fn obstruction(&self) -> Result<CohClass> {
        self.obstruction_of_lift(&self.canonical)
    }

    /// `d̄ + ∂` with `δ̄(∂) = −d̄²` (echelon-minimal `∂`), when it exists.
    pub fn witness(&self) -> Result<Option<GradedMap>> {
        let sq = self.canonical.compose(self.bar(), &self.canonical)?;
        let z = self.kernel.into_kernel(&sq)?;
        let Some(corr) = self.kernel.is_coboundary(2, &neg_vec(self.alg.p(), &z)) else {
            return Ok(None);
        };
        let w = add_kernel(&self.kernel, &self.canonical, &corr)?;
        if !self.is_lift(&w)? {
            return Err(Error::CheckFailed("corrected differential does not square to zero".into()));
        }
        Ok(Some(w))
    }

    pub fn lift(&self) -> Result<LiftReport> {
        let obstruction = self.obstruction()?;
        let witness = self.witness()?;
        if witness.is_some() != obstruction.is_zero() {
            return Err(Error::CheckFailed("witness existence disagrees with obstruction class".into()));
        }
        Ok(LiftReport { obstruction, obstruction_h_dim: self.kernel.h_dim(2), witness, torsor: None })
    }

    /// `v(d̄₁, d̄₂) = [d̄₂ − d̄₁] ∈ H¹`.
    pub fn difference_class(&self, d1: &GradedMap, d2: &GradedMap) -> Result<CohClass> {
        let diff = d2.sub(self.bar(), d1)?;
        let z = self.kernel.into_kernel(&diff)?;
        self.kernel.coh_class(1, &z)
    }

    pub fn equivalent(&self, d1: &GradedMap, d2: &GradedMap) -> Result<bool> {
        Ok(self.difference_class(d1, d2)?.is_zero())
    }

    /// One lift per `H¹`-class.
    pub fn classify(&self) -> Result<LiftReport> {
        let mut report = self.lift()?;
        let Some(w) = report.witness.clone() else {
            return Err(Error::Obstructed);
        };
        let classes = self.kernel.all_classes(1);
        let mut reps = Vec::with_capacity(classes.len());
        let mut diffs = Vec::with_capacity(classes.len());
        for c in &classes {
            let r = add_kernel(&self.kernel, &w, &c.rep)?;
            diffs.push(self.difference_class(&w, &r)?);
            reps.push(r);
        }
        report.torsor = Some(Torsor {
            degree: 1,
            h_dim: self.kernel.h_dim(1),
            count: pow_count(self.alg.p(), self.kernel.h_dim(1)),
            representatives: reps,
            differences: diffs,
            guaranteed: true,
        });
        Ok(report)
    }

    /// A lift `1 + κ` of the identity with `d̄₂ (1 + κ) = (1 + κ) d̄₁`, when one exists.
    pub fn connecting_iso(&self, d1: &GradedMap, d2: &GradedMap) -> Result<Option<GradedMap>> {
        let v = self.kernel.into_kernel(&d2.sub(self.bar(), d1)?)?;
        let Some(kappa) = self.kernel.is_coboundary(1, &neg_vec(self.alg.p(), &v)) else {
            return Ok(None);
        };
        let one = GradedMap::identity(self.bar(), &self.bar_obj());
        let phi = add_kernel(&self.kernel, &one, &kappa)?;
        let inv = invert_lift(&self.alg, &phi, &one)?;
        let lhs = d2.compose(self.bar(), &phi)?;
        let rhs = phi.compose(self.bar(), d1)?;
        if lhs != rhs || inv.compose(self.bar(), &phi)? != one {
            return Err(Error::CheckFailed("assembled connecting isomorphism fails its equations".into()));
        }
        Ok(Some(phi))
    }

    /// Connecting isomorphisms between two equivalent lifts, one per class
    /// modulo homotopy (an `H⁰`-torsor).
    pub fn connecting_iso_classes(&self, d1: &GradedMap, d2: &GradedMap) -> Result<Option<Torsor>> {
        let Some(phi) = self.connecting_iso(d1, d2)? else {
            return Ok(None);
        };
        let one = GradedMap::identity(self.bar(), &self.bar_obj());
        let classes = self.kernel.all_classes(0);
        let mut reps = Vec::with_capacity(classes.len());
        let mut diffs = Vec::with_capacity(classes.len());
        for c in &classes {
            let r = add_kernel(&self.kernel, &phi, &c.rep)?;
            let k = self.kernel.into_kernel(&r.sub(self.bar(), &phi)?)?;
            diffs.push(self.kernel.coh_class(0, &k)?);
            if d2.compose(self.bar(), &r)? != r.compose(self.bar(), d1)? {
                return Err(Error::CheckFailed("translated isomorphism is not a cochain map".into()));
            }
            reps.push(r);
        }
        let _ = one;
        Ok(Some(Torsor {
            degree: 0,
            h_dim: self.kernel.h_dim(0),
            count: pow_count(self.alg.p(), self.kernel.h_dim(0)),
            representatives: reps,
            differences: diffs,
            guaranteed: true,
        }))
    }
}

/// Checks that a bar pre-complex is a complex lifting the given middle complex.
fn check_bar_complex(alg: &DeformedAlgebra, c: &PreComplex) -> Result<PreComplex> {
    check_level(c.level(), Level::Bar)?;
    if !c.is_complex(&alg.bar)? {
        return Err(Error::NotADifferential);
    }
    reduce_complex(alg, c, Level::Mid)
}

/// Lifting a cochain map of degree `n` between fixed lifted endpoints.
#[derive(Clone, Debug)]
pub struct MapProblem {
    pub alg: Arc<DeformedAlgebra>,
    pub src: PreComplex,
    pub tgt: PreComplex,
    pub f: GradedMap,
    pub kernel: KernelComplex,
    pub canonical: GradedMap,
}

impl MapProblem {
    pub fn new(alg: Arc<DeformedAlgebra>, src: &PreComplex, tgt: &PreComplex, f: &GradedMap) -> Result<Self> {
        let src_mid = check_bar_complex(&alg, src)?;
        let tgt_mid = check_bar_complex(&alg, tgt)?;
        check_level(f.level, Level::Mid)?;
        if f.src != src_mid.obj || f.tgt != tgt_mid.obj {
            return Err(Error::ShapeMismatch("map endpoints do not match the complexes".into()));
        }
        if !delta(&alg.mid, &src_mid.d, &tgt_mid.d, f)?.is_zero() {
            return Err(Error::NotCochainMap);
        }
        let kernel = KernelComplex::new(
            alg.clone(),
            &reduce_complex(&alg, &src_mid, Level::Base)?,
            &reduce_complex(&alg, &tgt_mid, Level::Base)?,
        )?;
        let canonical = graded_lift(&alg, f);
        Ok(MapProblem { alg, src: src.clone(), tgt: tgt.clone(), f: f.clone(), kernel, canonical })
    }

    pub fn degree(&self) -> i32 {
        self.f.degree
    }

    fn bar(&self) -> &FiniteRing {
        &self.alg.bar
    }

    pub fn delta_bar(&self, g: &GradedMap) -> Result<GradedMap> {
        delta(self.bar(), &self.src.d, &self.tgt.d, g)
    }

    pub fn is_graded_lift(&self, fbar: &GradedMap) -> Result<bool> {
        Ok(fbar.level == Level::Bar && fbar.degree == self.degree() && reduce_map(&self.alg, fbar, Level::Mid)? == self.f)
    }

    pub fn is_lift(&self, fbar: &GradedMap) -> Result<bool> {
        Ok(self.is_graded_lift(fbar)? && self.delta_bar(fbar)?.is_zero())
    }

    /// `[δ̄(f̄)] ∈ Hⁿ⁺¹` from an arbitrary graded lift.
    pub fn obstruction_of_lift(&self, fbar: &GradedMap) -> Result<CohClass> {
        if !self.is_graded_lift(fbar)? {
            return Err(Error::Validation("not a graded lift of the map".into()));
        }
        let z = self.kernel.into_kernel(&self.delta_bar(fbar)?)?;
        self.kernel.coh_class(self.degree() + 1, &z)
    }

    pub fn obstruction(&self) -> Result<CohClass> {
        self.obstruction_of_lift(&self.canonical)
    }

    /// `f̄ + γ` with `δ̄(γ) = −δ̄(f̄)`, starting from the given graded lift.
    pub fn witness_from(&self, fbar: &GradedMap) -> Result<Option<GradedMap>> {
        let z = self.kernel.into_kernel(&self.delta_bar(fbar)?)?;
        let Some(gamma) = self.kernel.is_coboundary(self.degree() + 1, &neg_vec(self.alg.p(), &z)) else {
            return Ok(None);
        };
        let w = add_kernel(&self.kernel, fbar, &gamma)?;
        if !self.is_lift(&w)? {
            return Err(Error::CheckFailed("corrected map is not a cochain map".into()));
        }
        Ok(Some(w))
    }

    pub fn lift(&self) -> Result<LiftReport> {
        let obstruction = self.obstruction()?;
        let witness = self.witness_from(&self.canonical)?;
        if witness.is_some() != obstruction.is_zero() {
            return Err(Error::CheckFailed("witness existence disagrees with obstruction class".into()));
        }
        Ok(LiftReport {
            obstruction,
            obstruction_h_dim: self.kernel.h_dim(self.degree() + 1),
            witness,
            torsor: None,
        })
    }

    /// `[f̄₂ − f̄₁] ∈ Hⁿ` for two lifts.
    pub fn difference_class(&self, f1: &GradedMap, f2: &GradedMap) -> Result<CohClass> {
        let z = self.kernel.into_kernel(&f2.sub(self.bar(), f1)?)?;
        self.kernel.coh_class(self.degree(), &z)
    }

    /// Lifts up to homotopy: one per `Hⁿ`-class.
    pub fn classify(&self) -> Result<LiftReport> {
        let mut report = self.lift()?;
        let Some(w) = report.witness.clone() else {
            return Err(Error::Obstructed);
        };
        let n = self.degree();
        let mut reps = Vec::new();
        let mut diffs = Vec::new();
        for c in self.kernel.all_classes(n) {
            let r = add_kernel(&self.kernel, &w, &c.rep)?;
            diffs.push(self.difference_class(&w, &r)?);
            reps.push(r);
        }
        report.torsor = Some(Torsor {
            degree: n,
            h_dim: self.kernel.h_dim(n),
            count: pow_count(self.alg.p(), self.kernel.h_dim(n)),
            representatives: reps,
            differences: diffs,
            guaranteed: true,
        });
        Ok(report)
    }
}

/// Lifting a homotopy `H: f → g` of degree `n − 1` between fixed lifts `f̄, ḡ`.
#[derive(Clone, Debug)]
pub struct HomotopyProblem {
    pub alg: Arc<DeformedAlgebra>,
    pub src: PreComplex,
    pub tgt: PreComplex,
    pub h: GradedMap,
    pub f_bar: GradedMap,
    pub g_bar: GradedMap,
    pub kernel: KernelComplex,
    pub canonical: GradedMap,
}

impl HomotopyProblem {
    pub fn new(
        alg: Arc<DeformedAlgebra>,
        src: &PreComplex,
        tgt: &PreComplex,
        h: &GradedMap,
        f_bar: &GradedMap,
        g_bar: &GradedMap,
    ) -> Result<Self> {
        let src_mid = check_bar_complex(&alg, src)?;
        let tgt_mid = check_bar_complex(&alg, tgt)?;
        check_level(h.level, Level::Mid)?;
        check_level(f_bar.level, Level::Bar)?;
        check_level(g_bar.level, Level::Bar)?;
        if f_bar.degree != h.degree + 1 || g_bar.degree != h.degree + 1 {
            return Err(Error::ShapeMismatch("homotopy degree must be one less than the maps".into()));
        }
        let f = reduce_map(&alg, f_bar, Level::Mid)?;
        let g = reduce_map(&alg, g_bar, Level::Mid)?;
        let dh = delta(&alg.mid, &src_mid.d, &tgt_mid.d, h)?;
        if dh != g.sub(&alg.mid, &f)? {
            return Err(Error::NotAHomotopy);
        }
        let df = delta(&alg.bar, &src.d, &tgt.d, f_bar)?;
        let dg = delta(&alg.bar, &src.d, &tgt.d, g_bar)?;
        if df != dg {
            return Err(Error::IncompatibleGradedLifts("δ̄(f̄) != δ̄(ḡ)".into()));
        }
        let kernel = KernelComplex::new(
            alg.clone(),
            &reduce_complex(&alg, &src_mid, Level::Base)?,
            &reduce_complex(&alg, &tgt_mid, Level::Base)?,
        )?;
        let canonical = graded_lift(&alg, h);
        Ok(HomotopyProblem {
            alg,
            src: src.clone(),
            tgt: tgt.clone(),
            h: h.clone(),
            f_bar: f_bar.clone(),
            g_bar: g_bar.clone(),
            kernel,
            canonical,
        })
    }

    /// Degree `n` of the maps being connected.
    pub fn degree(&self) -> i32 {
        self.f_bar.degree
    }

    fn bar(&self) -> &FiniteRing {
        &self.alg.bar
    }

    /// `ḡ − f̄ − δ̄(H̄)`.
    pub fn defect(&self, hbar: &GradedMap) -> Result<GradedMap> {
        let dh = delta(self.bar(), &self.src.d, &self.tgt.d, hbar)?;
        self.g_bar.sub(self.bar(), &self.f_bar)?.sub(self.bar(), &dh)
    }

    pub fn is_graded_lift(&self, hbar: &GradedMap) -> Result<bool> {
        Ok(hbar.level == Level::Bar && hbar.degree == self.h.degree && reduce_map(&self.alg, hbar, Level::Mid)? == self.h)
    }

    pub fn is_lift(&self, hbar: &GradedMap) -> Result<bool> {
        Ok(self.is_graded_lift(hbar)? && self.defect(hbar)?.is_zero())
    }

    pub fn obstruction_of_lift(&self, hbar: &GradedMap) -> Result<CohClass> {
        if !self.is_graded_lift(hbar)? {
            return Err(Error::Validation("not a graded lift of the homotopy".into()));
        }
        let z = self.kernel.into_kernel(&self.defect(hbar)?)?;
        self.kernel.coh_class(self.degree(), &z)
    }

    pub fn obstruction(&self) -> Result<CohClass> {
        self.obstruction_of_lift(&self.canonical)
    }

    pub fn lift(&self) -> Result<LiftReport> {
        let obstruction = self.obstruction()?;
        let z = self.kernel.into_kernel(&self.defect(&self.canonical)?)?;
        let witness = match self.kernel.is_coboundary(self.degree(), &z) {
            Some(gamma) => {
                let w = add_kernel(&self.kernel, &self.canonical, &gamma)?;
                if !self.is_lift(&w)? {
                    return Err(Error::CheckFailed("corrected homotopy fails its equation".into()));
                }
                Some(w)
            }
            None => None,
        };
        if witness.is_some() != obstruction.is_zero() {
            return Err(Error::CheckFailed("witness existence disagrees with obstruction class".into()));
        }
        Ok(LiftReport { obstruction, obstruction_h_dim: self.kernel.h_dim(self.degree()), witness, torsor: None })
    }

    /// Lifts modulo second-order homotopy: one per `Hⁿ⁻¹`-class.
    pub fn classify(&self) -> Result<LiftReport> {
        let mut report = self.lift()?;
        let Some(w) = report.witness.clone() else {
            return Err(Error::Obstructed);
        };
        let n = self.degree() - 1;
        let mut reps = Vec::new();
        let mut diffs = Vec::new();
        for c in self.kernel.all_classes(n) {
            let r = add_kernel(&self.kernel, &w, &c.rep)?;
            let z = self.kernel.into_kernel(&r.sub(self.bar(), &w)?)?;
            diffs.push(self.kernel.coh_class(n, &z)?);
            reps.push(r);
        }
        report.torsor = Some(Torsor {
            degree: n,
            h_dim: self.kernel.h_dim(n),
            count: pow_count(self.alg.p(), self.kernel.h_dim(n)),
            representatives: reps,
            differences: diffs,
            guaranteed: true,
        });
        Ok(report)
    }
}

/// Any of the three lifting problems.
#[derive(Clone, Debug)]
pub enum LiftProblem {
    Differential(DiffProblem),
    Map(MapProblem),
    Homotopy(HomotopyProblem),
}

impl LiftProblem {
    pub fn kernel(&self) -> &KernelComplex {
        match self {
            LiftProblem::Differential(p) => &p.kernel,
            LiftProblem::Map(p) => &p.kernel,
            LiftProblem::Homotopy(p) => &p.kernel,
        }
    }

    pub fn alg(&self) -> &Arc<DeformedAlgebra> {
        match self {
            LiftProblem::Differential(p) => &p.alg,
            LiftProblem::Map(p) => &p.alg,
            LiftProblem::Homotopy(p) => &p.alg,
        }
    }

    pub fn lift(&self) -> Result<LiftReport> {
        match self {
            LiftProblem::Differential(p) => p.lift(),
            LiftProblem::Map(p) => p.lift(),
            LiftProblem::Homotopy(p) => p.lift(),
        }
    }

    pub fn classify(&self) -> Result<LiftReport> {
        match self {
            LiftProblem::Differential(p) => p.classify(),
            LiftProblem::Map(p) => p.classify(),
            LiftProblem::Homotopy(p) => p.classify(),
        }
    }
}

/// Given `f̄` lifting an isomorphism and `ḡ′` lifting its inverse, returns
/// `ḡ = ḡ′(1 − ε)` with `ε = f̄ḡ′ − 1`, a two-sided inverse of `f̄`.
pub fn invert_lift_matrix(alg: &DeformedAlgebra, f: &AlgMatrix, g0: &AlgMatrix) -> Result<AlgMatrix> {
    let r = &alg.bar;
    if f.rows != f.cols || g0.shape() != (f.cols, f.rows) {
        return Err(Error::NotInverse);
    }
    let one = AlgMatrix::identity(Level::Bar, r, f.rows);
    let eps = f.mul(r, g0)?.sub(r, &one)?;
    if !alg.reduce_to_mid(&eps).is_zero() {
        return Err(Error::NotInverse);
    }
    let g = g0.mul(r, &one.sub(r, &eps)?)?;
    if f.mul(r, &g)? != one || g.mul(r, f)? != one {
        return Err(Error::NotInverse);
    }
    Ok(g)
}

/// Degreewise [`invert_lift_matrix`] for degree-0 graded maps.
pub fn invert_lift(alg: &DeformedAlgebra, f: &GradedMap, g0: &GradedMap) -> Result<GradedMap> {
    if f.degree != 0 || g0.degree != 0 || f.src != g0.tgt || f.tgt != g0.src {
        return Err(Error::NotInverse);
    }
    let comps = f
        .src
        .degrees()
        .map(|i| {
            let fi = f.comp_ref(i).expect("degree in window");
            let gi = g0.comp_ref(i).cloned().unwrap_or_else(|| AlgMatrix::zero(Level::Bar, &alg.bar, fi.cols, fi.rows));
            invert_lift_matrix(alg, fi, &gi)
        })
        .collect::<Result<Vec<_>>>()?;
    // components of g live on the degrees of f's target
    let mut g = GradedMap::zero(&alg.bar, &f.tgt, &f.src, 0);
    for (i, c) in f.src.degrees().zip(comps) {
        if let Some(slot) = g.comps.get_mut((i - f.tgt.lo) as usize) {
            *slot = c;
        }
    }
    Ok(g)
}

/// Per-step outcome of lifting along a chain of towers.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub step: usize,
    pub report: LiftReport,
}

/// Lifts a differential through successive one-step towers. `steps[k].mid`
/// must equal `steps[k - 1].bar`; `start` lives over `steps[0].mid`.
/// Stops at the first obstructed step.
pub fn lift_along_chain(steps: &[Arc<DeformedAlgebra>], start: &PreComplex) -> Result<Vec<ChainStep>> {
    let mut current = start.clone();
    let mut out = Vec::new();
    for (k, alg) in steps.iter().enumerate() {
        if k > 0 && *steps[k - 1].bar != *alg.mid {
            return Err(Error::Validation(format!("chain step {k} does not continue step {}", k - 1)));
        }
        let mid = relabel(&current, Level::Mid);
        let problem = DiffProblem::new(alg.clone(), &mid)?;
        let report = problem.lift()?;
        let next = report.witness.clone();
        out.push(ChainStep { step: k, report });
        match next {
            Some(d) => current = PreComplex::new(problem.bar_obj(), d)?,
            None => break,
        }
    }
    Ok(out)
}

/// Reinterprets a complex as living at another level over an identical ring.
pub fn relabel(c: &PreComplex, level: Level) -> PreComplex {
    let width = c.d.comps.first().map_or(0, |m| m.width);
    let d = c.d.map_entries(level, width, <[u32]>::to_vec);
    PreComplex { obj: c.obj.at_level(level), d }
}

/// Status of the vanishing check for `H⁻¹Hom(C, D)` at the middle level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardStatus {
    Vanishes,
    /// Nonzero, with `|Z⁻¹|` and `|B⁻¹|`.
    NonZero { cocycles: u128, coboundaries: u128 },
    /// Enumeration would exceed the cap.
    Undecided { size: u128 },
}

/// Calls `visit` on every graded map of degree `n` over `ring`, in
/// lexicographic order of flat coordinates.
pub fn for_each_map(
    ring: &FiniteRing,
    src: &GradedObject,
    tgt: &GradedObject,
    n: i32,
    cap: u128,
    mut visit: impl FnMut(&GradedMap),
) -> Result<u128> {
    let zero = GradedMap::zero(ring, src, tgt, n);
    let len = zero.coord_len();
    let moduli: Vec<u64> = (0..len).map(|k| ring.moduli()[k % ring.rank().max(1)]).collect();
    let size = moduli.iter().try_fold(1u128, |acc, &q| acc.checked_mul(q as u128)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut coords = vec![0u32; len];
    let mut map = zero;
    for _ in 0..size {
        let mut off = 0;
        for m in map.comps.iter_mut() {
            let l = m.data.len();
            m.data.copy_from_slice(&coords[off..off + l]);
            off += l;
        }
        visit(&map);
        for k in (0..len).rev() {
            coords[k] += 1;
            if coords[k] as u64 == moduli[k] {
                coords[k] = 0;
            } else {
                break;
            }
        }
    }
    Ok(size)
}

/// Decides `H⁻¹Hom(C, D) = 0` over the middle ring by enumeration.
pub fn h_minus_one_guard(alg: &DeformedAlgebra, c: &PreComplex, d: &PreComplex, cap: u128) -> Result<GuardStatus> {
    let ring = &alg.mid;
    let mut cocycles = 0u128;
    let z = for_each_map(ring, &c.obj, &d.obj, -1, cap, |h| {
        if delta(ring, &c.d, &d.d, h).map(|x| x.is_zero()).unwrap_or(false) {
            cocycles += 1;
        }
    });
    let size_m1 = match z {
        Ok(s) => s,
        Err(Error::CapExceeded { size, .. }) => return Ok(GuardStatus::Undecided { size }),
        Err(e) => return Err(e),
    };
    let _ = size_m1;
    let mut images = std::collections::HashSet::new();
    let b = for_each_map(ring, &c.obj, &d.obj, -2, cap, |h| {
        if let Ok(x) = delta(ring, &c.d, &d.d, h) {
            images.insert(x.to_coords());
        }
    });
    if let Err(Error::CapExceeded { size, .. }) = b {
        return Ok(GuardStatus::Undecided { size });
    }
    b?;
    let coboundaries = images.len() as u128;
    Ok(if cocycles == coboundaries {
        GuardStatus::Vanishes
    } else {
        GuardStatus::NonZero { cocycles, coboundaries }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::lift_from_base;
    use crate::finring::Tower;

    pub(crate) fn z4() -> Arc<DeformedAlgebra> {
        Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::zmod(2, 2, 1).unwrap())).unwrap())
    }

    fn mf() -> Arc<DeformedAlgebra> {
        let t = Arc::new(Tower::square_zero(2, 1).unwrap());
        let one = vec![1, 0];
        let zero = vec![0, 0];
        let consts = vec![
            vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
            vec![vec![zero.clone(), one.clone()], vec![vec![0, 1], zero]],
        ];
        Arc::new(DeformedAlgebra::custom(t, vec!["1".into(), "x".into()], consts).unwrap())
    }

    fn bar_d(alg: &DeformedAlgebra, obj: &GradedObject, entries: &[u32]) -> GradedMap {
        let comps = obj
            .degrees()
            .enumerate()
            .map(|(k, i)| {
                let rows = obj.rank(i + 1);
                let e: Vec<Vec<u32>> = if rows == 0 { vec![] } else { vec![vec![entries[k]]] };
                AlgMatrix::from_entries(Level::Bar, &alg.bar, rows, obj.rank(i), &e).unwrap()
            })
            .collect();
        GradedMap::from_comps(obj, obj, 1, comps).unwrap()
    }

    fn zero_mid(alg: &DeformedAlgebra, ranks: Vec<usize>) -> PreComplex {
        PreComplex::zero(&alg.mid, &GradedObject::new(Level::Mid, 0, ranks))
    }

    #[test]
    fn z4_zero_differential_lifts_with_four_classes() {
        let a = z4();
        let c = zero_mid(&a, vec![1, 1, 1]);
        let p = DiffProblem::new(a.clone(), &c).unwrap();
        let r = p.classify().unwrap();
        assert!(r.obstruction.is_zero());
        let t = r.torsor.unwrap();
        assert_eq!(t.h_dim, 2);
        assert_eq!(t.count, 4);
        let two_two = bar_d(&a, &p.bar_obj(), &[2, 2, 0]);
        assert!(t.representatives.contains(&two_two));
        assert!(p.is_lift(&two_two).unwrap());
        // pairwise inequivalent
        for (i, x) in t.representatives.iter().enumerate() {
            for y in &t.representatives[i + 1..] {
                assert!(!p.equivalent(x, y).unwrap());
                assert!(p.connecting_iso(x, y).unwrap().is_none());
            }
        }
        // automorphisms of (0,0) covering 1: 2^3 classes
        let zero = bar_d(&a, &p.bar_obj(), &[0, 0, 0]);
        let autos = p.connecting_iso_classes(&zero, &zero).unwrap().unwrap();
        assert_eq!(autos.count, 8);
    }

    #[test]
    fn matrix_factorization_is_obstructed() {
        let a = mf();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let x = AlgMatrix::from_entries(Level::Mid, &a.mid, 1, 1, &[vec![0, 1]]).unwrap();
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![x.clone(), x, AlgMatrix::zero(Level::Mid, &a.mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&a.mid, obj, d).unwrap();
        let p = DiffProblem::new(a, &c).unwrap();
        let r = p.lift().unwrap();
        assert!(!r.obstruction.is_zero());
        assert_eq!(r.obstruction_h_dim, 1);
        assert!(r.witness.is_none());
        assert_eq!(p.classify().err(), Some(Error::Obstructed));
    }

    #[test]
    fn obstruction_is_independent_of_graded_lift() {
        let a = mf();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let x = AlgMatrix::from_entries(Level::Mid, &a.mid, 1, 1, &[vec![0, 1]]).unwrap();
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![x.clone(), x, AlgMatrix::zero(Level::Mid, &a.mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&a.mid, obj, d).unwrap();
        let p = DiffProblem::new(a.clone(), &c).unwrap();
        let o = p.obstruction().unwrap();
        for coords in crate::linalg::all_combinations(2, 4, &(0..4).map(|i| (0..4).map(|j| u32::from(i == j)).collect()).collect::<Vec<_>>()) {
            let other = add_kernel(&p.kernel, &p.canonical, &coords).unwrap();
            assert_eq!(p.obstruction_of_lift(&other).unwrap(), o);
        }
    }

    #[test]
    fn identity_between_lifts_is_obstructed_by_difference_class() {
        let a = z4();
        let c = zero_mid(&a, vec![1, 1, 1]);
        let p = DiffProblem::new(a.clone(), &c).unwrap();
        let obj = p.bar_obj();
        let d1 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[0, 0, 0])).unwrap();
        let d2 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[2, 0, 0])).unwrap();
        let id = GradedMap::identity(&a.mid, &c.obj);
        let mp = MapProblem::new(a.clone(), &d1, &d2, &id).unwrap();
        let o = mp.obstruction().unwrap();
        let v = p.difference_class(&d1.d, &d2.d).unwrap();
        assert_eq!(o.rep, v.rep);
        assert!(!o.is_zero());
        assert_eq!(mp.kernel.class_coords(&o), vec![1, 0]);
    }

    #[test]
    fn homotopy_between_identities() {
        let a = z4();
        let c = zero_mid(&a, vec![1, 1, 1]);
        let p = DiffProblem::new(a.clone(), &c).unwrap();
        let obj = p.bar_obj();
        let d1 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[0, 0, 0])).unwrap();
        let d2 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[2, 2, 0])).unwrap();
        let one = GradedMap::identity(&a.bar, &obj);
        // δ̄(1) from (C, 0) to (C, (2,2)) is (2,2) for both f̄ and ḡ
        let h = GradedMap::zero(&a.mid, &c.obj, &c.obj, -1);
        let hp = HomotopyProblem::new(a.clone(), &d1, &d2, &h, &one, &one).unwrap();
        let r = hp.lift().unwrap();
        assert!(r.obstruction.is_zero());
        assert!(r.witness.unwrap().is_zero());
    }

    #[test]
    fn map_as_homotopy_between_zero_maps() {
        // over Z/9 → F_3 the classes are negatives of each other, witnesses agree
        let a = Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::zmod(3, 2, 1).unwrap())).unwrap());
        let c = zero_mid(&a, vec![1, 1]);
        let obj = c.obj.at_level(Level::Bar);
        let d1 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[0, 0])).unwrap();
        let d2 = PreComplex::new(obj.clone(), bar_d(&a, &obj, &[3, 0])).unwrap();
        let f = GradedMap::identity(&a.mid, &c.obj);
        let mp = MapProblem::new(a.clone(), &d1, &d2, &f).unwrap();
        let zero = GradedMap::zero(&a.bar, &obj, &obj, 1);
        let hp = HomotopyProblem::new(a.clone(), &d1, &d2, &f, &zero, &zero).unwrap();
        let om = mp.obstruction().unwrap();
        let oh = hp.obstruction().unwrap();
        assert!(!om.is_zero());
        assert_eq!(oh.rep, neg_vec(3, &om.rep));
    }

    #[test]
    fn invert_lift_examples() {
        let a = z4();
        let three = AlgMatrix::from_entries(Level::Bar, &a.bar, 1, 1, &[vec![3]]).unwrap();
        let one = AlgMatrix::identity(Level::Bar, &a.bar, 1);
        let g = invert_lift_matrix(&a, &three, &one).unwrap();
        assert_eq!(g, three);
        assert_eq!(invert_lift_matrix(&a, &one, &one).unwrap(), one);
        let two = AlgMatrix::from_entries(Level::Bar, &a.bar, 1, 1, &[vec![2]]).unwrap();
        assert_eq!(invert_lift_matrix(&a, &two, &one), Err(Error::NotInverse));
    }

    #[test]
    fn chain_lifting_of_t_t_is_obstructed_at_second_order() {
        let steps: Vec<Arc<DeformedAlgebra>> = [(2, 1), (3, 2)]
            .iter()
            .map(|&(x, y)| Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::trunc_poly(2, x, y).unwrap())).unwrap()))
            .collect();
        // first-order deformation over F_2[t]/t²
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let t = AlgMatrix::from_entries(Level::Mid, &steps[1].mid, 1, 1, &[vec![0, 1]]).unwrap();
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![t.clone(), t.clone(), AlgMatrix::zero(Level::Mid, &steps[1].mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&steps[1].mid, obj.clone(), d).unwrap();
        let res = lift_along_chain(&steps[1..], &c).unwrap();
        assert_eq!(res.len(), 1);
        assert!(!res[0].report.obstruction.is_zero());
        assert_eq!(res[0].report.obstruction_h_dim, 1);
        // (t, 0) extends
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![t, AlgMatrix::zero(Level::Mid, &steps[1].mid, 1, 1), AlgMatrix::zero(Level::Mid, &steps[1].mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&steps[1].mid, obj, d).unwrap();
        let res = lift_along_chain(&steps[1..], &c).unwrap();
        assert!(res[0].report.lifts());
    }

    #[test]
    fn trivial_deformation_chain_lifts_with_sigma_lift() {
        let steps: Vec<Arc<DeformedAlgebra>> = [(2, 1), (3, 2), (4, 3)]
            .iter()
            .map(|&(x, y)| Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::trunc_poly(3, x, y).unwrap())).unwrap()))
            .collect();
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1]);
        let m = AlgMatrix::from_entries(Level::Mid, &steps[0].mid, 1, 1, &[vec![2]]).unwrap();
        let d = GradedMap::from_comps(&obj, &obj, 1, vec![m, AlgMatrix::zero(Level::Mid, &steps[0].mid, 0, 1)]).unwrap();
        let c = PreComplex::complex(&steps[0].mid, obj, d).unwrap();
        let res = lift_along_chain(&steps, &c).unwrap();
        assert_eq!(res.len(), 3);
        for s in &res {
            let w = s.report.witness.as_ref().unwrap();
            assert_eq!(w.comps[0].entry(0, 0)[0], 2);
        }
    }

    #[test]
    fn guard_on_two_term_complex() {
        let t = Arc::new(Tower::trunc_poly(2, 1, 1).unwrap());
        let a = DeformedAlgebra::scalars(t).unwrap();
        let c = zero_mid(&a, vec![1, 1]);
        let g = h_minus_one_guard(&a, &c, &c, 1 << 20).unwrap();
        assert_eq!(g, GuardStatus::NonZero { cocycles: 2, coboundaries: 1 });
        let single = zero_mid(&a, vec![1]);
        assert_eq!(h_minus_one_guard(&a, &single, &single, 1 << 20).unwrap(), GuardStatus::Vanishes);
        assert!(matches!(h_minus_one_guard(&a, &c, &c, 1).unwrap(), GuardStatus::Undecided { .. }));
    }

    #[test]
    fn trivial_deformation_canonical_lift_is_differential() {
        let t = Arc::new(Tower::trunc_poly(3, 2, 1).unwrap());
        let a = Arc::new(
            DeformedAlgebra::trivial(t, vec!["1".into(), "x".into()], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 0]]])
                .unwrap(),
        );
        let base_obj = GradedObject::new(Level::Base, 0, vec![1, 1, 1]);
        let x = AlgMatrix::from_entries(Level::Base, &a.base, 1, 1, &[vec![0, 1]]).unwrap();
        let d0 = GradedMap::from_comps(&base_obj, &base_obj, 1, vec![x.clone(), x, AlgMatrix::zero(Level::Base, &a.base, 0, 1)]).unwrap();
        let d = lift_from_base(&a, &d0, Level::Mid);
        let c = PreComplex::complex(&a.mid, base_obj.at_level(Level::Mid), d).unwrap();
        let p = DiffProblem::new(a, &c).unwrap();
        assert!(p.obstruction().unwrap().is_zero());
        assert!(p.is_lift(&p.canonical).unwrap());
        assert_eq!(p.witness().unwrap().unwrap(), p.canonical);
    }

    #[test]
    fn empty_complex_is_degenerate() {
        let a = z4();
        let c = zero_mid(&a, vec![0, 0]);
        let p = DiffProblem::new(a, &c).unwrap();
        let r = p.classify().unwrap();
        assert!(r.obstruction.is_zero());
        assert_eq!(r.torsor.unwrap().count, 1);
    }
}
