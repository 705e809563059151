//! Bases of subgroups of finite abelian p-groups.
//!
//! An ambient group is `⊕ Z/p^{e_i}`. Elements are coefficient vectors with
//! `0 <= c_i < p^{e_i}`. Subgroups are given by generators and reduced to a
//! basis of cyclic summands by a Smith-style elimination over `Z/p^N`, where
//! `N = max e_i` and coordinate `i` is embedded as `p^{N - e_i} Z/p^N`.

use crate::error::{Error, Result};

pub(crate) fn pow(p: u32, e: u32) -> u64 {
    (p as u64).pow(e)
}

/// p-adic valuation of a nonzero residue modulo `p^n` (returns `n` for zero).
fn valuation(mut x: u64, p: u64, n: u32) -> u32 {
    if x == 0 {
        return n;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Inverse of a unit modulo `m` (extended Euclid).
pub(crate) fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "{a} is not a unit modulo {m}");
    old_s.rem_euclid(m as i128) as u64
}

/// Basis of a subgroup, with the data needed to compute coordinates.
#[derive(Clone, Debug)]
pub struct SubgroupBasis {
    p: u32,
    exps: Vec<u32>,
    top: u32,
    /// Basis elements in ambient coordinates.
    pub basis: Vec<Vec<u32>>,
    /// Each basis element has order `p^{orders[t]}`.
    pub orders: Vec<u32>,
    /// Column transform (embedded coordinates), `n x n`.
    v: Vec<Vec<u64>>,
    /// Diagonal entries `s_t = p^{v_t} u_t`.
    diag: Vec<u64>,
}

impl SubgroupBasis {
    /// Reduces `gens` to a basis of the subgroup they generate. When
    /// `keep_first` is set the first generator must have maximal order
    /// `p^N` and is kept verbatim as the first basis element.
    pub fn new(p: u32, exps: &[u32], gens: &[Vec<u32>], keep_first: bool) -> Result<Self> {
        let n = exps.len();
        let top = exps.iter().copied().max().unwrap_or(0);
        let modulus = pow(p, top);
        let pp = p as u64;
        let embed = |x: &Vec<u32>| -> Vec<u64> {
            x.iter()
                .zip(exps)
                .map(|(&c, &e)| (c as u64 * pow(p, top - e)) % modulus.max(1))
                .collect()
        };
        let mut m: Vec<Vec<u64>> = gens.iter().map(embed).collect();
        let mut w = m.clone();
        let mut v: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        let rows = m.len();
        let mut diag = Vec::new();
        let mut t = 0;
        while t < rows.min(n) {
            // choose pivot of minimal valuation in the remaining block
            let mut best: Option<(u32, usize, usize)> = None;
            if keep_first && t == 0 {
                for c in 0..n {
                    let val = valuation(m[0][c], pp, top);
                    if m[0][c] != 0 && best.is_none_or(|b| val < b.0) {
                        best = Some((val, 0, c));
                    }
                }
                match best {
                    Some((0, _, _)) => {}
                    _ => {
                        return Err(Error::Validation(
                            "first generator does not have maximal additive order".into(),
                        ))
                    }
                }
            } else {
                for (r, row) in m.iter().enumerate().skip(t) {
                    for (c, &x) in row.iter().enumerate().skip(t) {
                        if x != 0 {
                            let val = valuation(x, pp, top);
                            if best.is_none_or(|b| val < b.0) {
                                best = Some((val, r, c));
                            }
                        }
                    }
                }
            }
            let Some((val, r, c)) = best else { break };
            m.swap(t, r);
            w.swap(t, r);
            for row in m.iter_mut() {
                row.swap(t, c);
            }
            for row in v.iter_mut() {
                row.swap(t, c);
            }
            let a = m[t][t];
            let unit_inv = inv_mod(a / pow(p, val), modulus);
            // clear column t below and above (rows other than t)
            for r2 in 0..rows {
                if r2 == t || m[r2][t] == 0 {
                    continue;
                }
                let x = m[r2][t];
                let q = (x / pow(p, val)) % modulus * unit_inv % modulus;
                for c2 in 0..n {
                    m[r2][c2] = (m[r2][c2] + modulus - q * m[t][c2] % modulus) % modulus;
                    w[r2][c2] = (w[r2][c2] + modulus - q * w[t][c2] % modulus) % modulus;
                }
            }
            // clear row t to the right by column operations
            for c2 in 0..n {
                if c2 == t || m[t][c2] == 0 {
                    continue;
                }
                let x = m[t][c2];
                let q = (x / pow(p, val)) % modulus * unit_inv % modulus;
                for row in m.iter_mut() {
                    row[c2] = (row[c2] + modulus - q * row[t] % modulus) % modulus;
                }
                for row in v.iter_mut() {
                    row[c2] = (row[c2] + modulus - q * row[t] % modulus) % modulus;
                }
            }
            diag.push(a);
            t += 1;
        }
        let mut basis = Vec::new();
        let mut orders = Vec::new();
        for (t, &s) in diag.iter().enumerate() {
            let val = valuation(s, pp, top);
            let elem: Vec<u32> = w[t]
                .iter()
                .zip(exps)
                .map(|(&x, &e)| (x / pow(p, top - e)) as u32)
                .collect();
            basis.push(elem);
            orders.push(top - val);
        }
        Ok(SubgroupBasis {
            p,
            exps: exps.to_vec(),
            top,
            basis,
            orders,
            v,
            diag,
        })
    }

    /// log_p of the subgroup order.
    pub fn log_order(&self) -> u32 {
        self.orders.iter().sum()
    }

    /// Coordinates of `x` in the basis, or `None` when `x` is not in the subgroup.
    pub fn coords(&self, x: &[u32]) -> Option<Vec<u32>> {
        let modulus = pow(self.p, self.top);
        let n = self.exps.len();
        let y: Vec<u64> = x
            .iter()
            .zip(&self.exps)
            .map(|(&c, &e)| c as u64 * pow(self.p, self.top - e) % modulus.max(1))
            .collect();
        let yv: Vec<u64> = (0..n)
            .map(|j| (0..n).map(|i| y[i] * self.v[i][j] % modulus).sum::<u64>() % modulus)
            .collect();
        let mut out = Vec::with_capacity(self.diag.len());
        for (t, &s) in self.diag.iter().enumerate() {
            let val = self.top - self.orders[t];
            let pv = pow(self.p, val);
            if yv[t] % pv != 0 {
                return None;
            }
            let unit = s / pv;
            let ord = pow(self.p, self.orders[t]);
            let c = (yv[t] / pv) % ord * (inv_mod(unit % ord, ord) % ord) % ord;
            out.push(c as u32);
        }
        if yv[self.diag.len()..].iter().any(|&z| z != 0) {
            return None;
        }
        Some(out)
    }

    /// Element with the given coordinates.
    pub fn combine(&self, coords: &[u32]) -> Vec<u32> {
        let mut acc = vec![0u64; self.exps.len()];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (a, &x) in acc.iter_mut().zip(b) {
                *a += *c as u64 * x as u64;
            }
        }
        acc.iter()
            .zip(&self.exps)
            .map(|(&a, &e)| (a % pow(self.p, e)) as u32)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_in_z4_times_z4() {
        // {(a, b) : a = b mod 2} inside Z/4 + Z/4
        let gens = vec![vec![1, 1], vec![0, 2]];
        let b = SubgroupBasis::new(2, &[2, 2], &gens, true).unwrap();
        assert_eq!(b.basis[0], vec![1, 1]);
        assert_eq!(b.log_order(), 3);
        let mut count = 0;
        for a in 0..4u32 {
            for c in 0..4u32 {
                let inside = b.coords(&[a, c]).is_some();
                assert_eq!(inside, a % 2 == c % 2, "({a},{c})");
                if let Some(k) = b.coords(&[a, c]) {
                    assert_eq!(b.combine(&k), vec![a, c]);
                    count += 1;
                }
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn mixed_exponents() {
        // Z/9 + Z/3, generated by (3, 1)
        let b = SubgroupBasis::new(3, &[2, 1], &[vec![3, 1]], false).unwrap();
        assert_eq!(b.log_order(), 1);
        assert!(b.coords(&[6, 2]).is_some());
        assert!(b.coords(&[3, 2]).is_none());
    }

    #[test]
    fn inverse_mod() {
        assert_eq!(inv_mod(3, 4), 3);
        assert_eq!(inv_mod(2, 9) * 2 % 9, 1);
    }
}
