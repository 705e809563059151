//! Towers `R̄ → R → F_p` of finite local rings with `I·J = 0`.

use std::collections::HashMap;
use std::sync::Arc;

use super::pgroup::SubgroupBasis;
use super::ring::{elementary_basis, Elem, FiniteRing, RingMap};
use crate::error::{Error, Result};

/// Size limits applied when building towers.
#[derive(Clone, Copy, Debug)]
pub struct TowerCaps {
    pub max_prime: u32,
    pub max_log2_card: u32,
}

impl Default for TowerCaps {
    fn default() -> Self {
        TowerCaps { max_prime: 7, max_log2_card: 16 }
    }
}

/// How a tower was specified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerKind {
    Zmod { a: u32, b: u32 },
    TruncPoly { a: u32, b: u32 },
    SquareZero { r: u32 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub kind: TowerKind,
    pub bar: Arc<FiniteRing>,
    pub mid: Arc<FiniteRing>,
    pub base: Arc<FiniteRing>,
    /// `R̄ → R`.
    pub pi_bar: RingMap,
    /// `R → R₀`.
    pub pi: RingMap,
    /// `F_p`-basis of `J = Ker(R̄ → R)`.
    pub j_basis: Vec<Elem>,
    /// Additive basis of `I = Ker(R̄ → R₀)`.
    pub i_basis: Vec<Elem>,
    /// `σ(b_v)` for each basis element `b_v` of `R`.
    section: Vec<Elem>,
    j_coords: HashMap<Elem, Vec<u32>>,
}

impl Tower {
    pub fn p(&self) -> u32 {
        self.bar.p()
    }

    pub fn j_dim(&self) -> usize {
        self.j_basis.len()
    }

    /// Set-theoretic section of `R̄ → R`, extended coefficient-wise from the
    /// least preimages of the basis of `R`.
    pub fn sigma(&self, x: &[u32]) -> Elem {
        let mut acc = vec![0u64; self.bar.rank()];
        for (&c, s) in x.iter().zip(&self.section) {
            if c == 0 {
                continue;
            }
            for (a, &y) in acc.iter_mut().zip(s) {
                *a += c as u64 * y as u64;
            }
        }
        self.bar.reduce(&acc)
    }

    /// Least preimages of the basis of `R`.
    pub fn section_images(&self) -> &[Elem] {
        &self.section
    }

    /// `F_p`-coordinates of an element of `J` in the stored basis.
    pub fn j_coords(&self, x: &[u32]) -> Option<&[u32]> {
        self.j_coords.get(x).map(Vec::as_slice)
    }

    /// Element of `J` with the given `F_p`-coordinates.
    pub fn j_element(&self, coords: &[u32]) -> Elem {
        let mut acc = vec![0u64; self.bar.rank()];
        for (&c, j) in coords.iter().zip(&self.j_basis) {
            for (a, &y) in acc.iter_mut().zip(j) {
                *a += c as u64 * y as u64;
            }
        }
        self.bar.reduce(&acc)
    }

    /// Reduction `R̄ → R₀`.
    pub fn to_base(&self, x: &[u32]) -> Elem {
        self.pi.apply(&self.pi_bar.apply(x))
    }

    /// Builds a tower from explicit rings and surjections.
    pub fn from_maps(kind: TowerKind, pi_bar: RingMap, pi: RingMap, caps: TowerCaps) -> Result<Self> {
        let bar = pi_bar.src.clone();
        let mid = pi_bar.tgt.clone();
        let base = pi.tgt.clone();
        if pi.src != mid {
            return Err(Error::TargetMismatch);
        }
        let p = bar.p();
        if p > caps.max_prime {
            return Err(Error::NonPrime(p));
        }
        let log2 = (bar.log_card() as f64) * (p as f64).log2();
        if log2 > caps.max_log2_card as f64 + 1e-9 {
            return Err(Error::RingTooLarge(format!("|R̄| = {}", bar.cardinality())));
        }
        if base.rank() != 1 || base.exps()[0] != 1 {
            return Err(Error::NotLocal("base ring must be the prime field".into()));
        }
        if !bar.is_commutative() || !mid.is_commutative() {
            return Err(Error::InvalidTable("tower rings must be commutative".into()));
        }
        let to_base = pi_bar.compose(&pi);
        let i_elems = to_base.kernel_elements();
        let i_basis = SubgroupBasis::new(p, bar.exps(), &i_elems, false)?.basis;
        for g in &i_basis {
            if !bar.is_nilpotent(g) {
                return Err(Error::NotLocal(format!("kernel element {g:?} is not nilpotent")));
            }
        }
        let j_elems = pi_bar.kernel_elements();
        let j_basis = elementary_basis(&bar, &j_elems);
        for i in &i_basis {
            for j in &j_basis {
                let prod = bar.mul(i, j);
                if !bar.is_zero(&prod) {
                    return Err(Error::IJNonzero { i: i.clone(), j: j.clone(), product: prod });
                }
            }
        }
        let mut j_coords = HashMap::with_capacity(j_elems.len());
        let dim = j_basis.len() as u32;
        for idx in 0..(p as u64).pow(dim) {
            let mut coords = vec![0u32; dim as usize];
            let mut rest = idx;
            for c in coords.iter_mut().rev() {
                *c = (rest % p as u64) as u32;
                rest /= p as u64;
            }
            let mut acc = vec![0u64; bar.rank()];
            for (&c, j) in coords.iter().zip(&j_basis) {
                for (a, &y) in acc.iter_mut().zip(j) {
                    *a += c as u64 * y as u64;
                }
            }
            j_coords.insert(bar.reduce(&acc), coords);
        }
        let section = pi_bar.minimal_section();
        Ok(Tower { kind, bar, mid, base, pi_bar, pi, j_basis, i_basis, section, j_coords })
    }

    pub fn zmod(p: u32, a: u32, b: u32) -> Result<Self> {
        check_params(a, b)?;
        let bar = Arc::new(FiniteRing::zmod(p, a)?);
        let mid = Arc::new(FiniteRing::zmod(p, b)?);
        let base = Arc::new(FiniteRing::prime_field(p)?);
        let pi_bar = RingMap::surjection(bar, mid.clone(), vec![vec![1]])?;
        let pi = RingMap::surjection(mid, base, vec![vec![1]])?;
        Self::from_maps(TowerKind::Zmod { a, b }, pi_bar, pi, TowerCaps::default())
    }

    pub fn trunc_poly(p: u32, a: u32, b: u32) -> Result<Self> {
        check_params(a, b)?;
        let bar = Arc::new(FiniteRing::truncated_poly(p, a)?);
        let mid = Arc::new(FiniteRing::truncated_poly(p, b)?);
        let base = Arc::new(FiniteRing::prime_field(p)?);
        let images = (0..a as usize)
            .map(|i| {
                let mut v = vec![0u32; b as usize];
                if i < b as usize {
                    v[i] = 1;
                }
                v
            })
            .collect();
        let pi_bar = RingMap::surjection(bar, mid.clone(), images)?;
        let pi_images = (0..b as usize).map(|i| vec![u32::from(i == 0)]).collect();
        let pi = RingMap::surjection(mid, base, pi_images)?;
        Self::from_maps(TowerKind::TruncPoly { a, b }, pi_bar, pi, TowerCaps::default())
    }

    pub fn square_zero(p: u32, r: u32) -> Result<Self> {
        let bar = Arc::new(FiniteRing::square_zero(p, r)?);
        let mid = Arc::new(FiniteRing::prime_field(p)?);
        let images = (0..=r as usize).map(|i| vec![u32::from(i == 0)]).collect();
        let pi_bar = RingMap::surjection(bar, mid.clone(), images)?;
        let pi = RingMap::identity(mid);
        Self::from_maps(TowerKind::SquareZero { r }, pi_bar, pi, TowerCaps::default())
    }

    /// Same tower with another `F_p`-basis of `J`.
    pub fn with_j_basis(&self, basis: Vec<Elem>) -> Result<Self> {
        let p = self.p() as u64;
        let dim = basis.len() as u32;
        let mut j_coords = HashMap::new();
        for idx in 0..p.pow(dim) {
            let mut coords = vec![0u32; dim as usize];
            let mut rest = idx;
            for c in coords.iter_mut().rev() {
                *c = (rest % p) as u32;
                rest /= p;
            }
            let mut acc = vec![0u64; self.bar.rank()];
            for (&c, j) in coords.iter().zip(&basis) {
                for (a, &y) in acc.iter_mut().zip(j) {
                    *a += c as u64 * y as u64;
                }
            }
            j_coords.insert(self.bar.reduce(&acc), coords);
        }
        if j_coords.len() != self.j_coords.len() || j_coords.keys().any(|k| !self.j_coords.contains_key(k)) {
            return Err(Error::Validation("vectors do not form a basis of J".into()));
        }
        Ok(Tower { j_basis: basis, j_coords, ..self.clone() })
    }

    /// Checks that `σ` is a section and that `I·J = 0` on the stored bases.
    pub fn check_invariants(&self) -> bool {
        let section_ok = self.mid.elements().all(|x| self.pi_bar.apply(&self.sigma(&x)) == x);
        let ij_ok = self
            .i_basis
            .iter()
            .all(|i| self.j_basis.iter().all(|j| self.bar.is_zero(&self.bar.mul(i, j))));
        section_ok && ij_ok
    }
}

fn check_params(a: u32, b: u32) -> Result<()> {
    if b < 1 || a < b || a > b + 1 {
        return Err(Error::Validation(format!("tower exponents need a >= b >= 1 and a <= b + 1, got ({a}, {b})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z4_tower() {
        let t = Tower::zmod(2, 2, 1).unwrap();
        assert_eq!(t.j_basis, vec![vec![2]]);
        assert_eq!(t.j_dim(), 1);
        assert_eq!(t.sigma(&[1]), vec![1]);
        assert!(t.check_invariants());
        assert_eq!(t.j_coords(&[2]), Some(&[1u32][..]));
        assert_eq!(t.j_coords(&[1]), None);
    }

    #[test]
    fn trivial_tower() {
        let t = Tower::trunc_poly(2, 1, 1).unwrap();
        assert_eq!(t.j_dim(), 0);
        assert!(t.i_basis.is_empty());
        assert!(t.check_invariants());
    }

    #[test]
    fn cubic_truncation_over_f3() {
        let t = Tower::trunc_poly(3, 3, 2).unwrap();
        assert_eq!(t.j_basis, vec![vec![0, 0, 1]]);
        assert!(t.check_invariants());
        // I = (t), J = (t^2): t * t^2 = 0
        let tt = t.bar.basis(1);
        assert!(t.bar.is_zero(&t.bar.mul(&tt, &t.j_basis[0])));
    }

    #[test]
    fn square_zero_two_variables() {
        let t = Tower::square_zero(3, 2).unwrap();
        assert_eq!(t.j_basis, vec![vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(t.bar.cardinality(), 27);
    }

    #[test]
    fn parameter_checks() {
        assert!(Tower::zmod(2, 3, 1).is_err());
        assert!(Tower::trunc_poly(2, 1, 2).is_err());
        assert_eq!(Tower::zmod(4, 2, 1).err(), Some(Error::NonPrime(4)));
        assert!(Tower::zmod(11, 2, 1).is_err());
    }

    #[test]
    fn custom_tower_with_nonzero_ij_is_rejected() {
        // F_2[t]/t^3 -> F_2 directly: J = I = (t), t * t != 0
        let bar = Arc::new(FiniteRing::truncated_poly(2, 3).unwrap());
        let k = Arc::new(FiniteRing::prime_field(2).unwrap());
        let pi_bar = RingMap::surjection(bar, k.clone(), vec![vec![1], vec![0], vec![0]]).unwrap();
        let pi = RingMap::identity(k);
        let err = Tower::from_maps(TowerKind::Custom, pi_bar, pi, TowerCaps::default()).unwrap_err();
        assert!(matches!(err, Error::IJNonzero { .. }));
    }
}
