//! Dense linear algebra over `F_p`.

use crate::finring::pgroup::inv_mod;

/// Dense matrix over `F_p`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl FpMatrix {
    pub fn zero(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zero(p, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (r, &x) in col.iter().enumerate() {
                m.data[r * m.cols + c] = x % p;
            }
        }
        m
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut m = Self::zero(p, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row length");
            for (c, &x) in row.iter().enumerate() {
                m.data[r * cols + c] = x % p;
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "vector length");
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| {
                let s: u64 = self.row(r).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % p).sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let p = self.p as u64;
        let mut out = FpMatrix::zero(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, c) as u64) % p) as u32;
                }
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns. Pivots are taken in
    /// column order, first available row.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = rref_in_place(&mut m, None);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space: one vector per free column, with that free
    /// variable set to 1 and the other free variables 0.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0u32; self.cols];
                v[free] = 1;
                for (k, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - r.get(k, free)) % p;
                }
                v
            })
            .collect()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zero(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }
}

/// Row-reduces `m` in place; applies the same row operations to `track` when given.
fn rref_in_place(m: &mut FpMatrix, mut track: Option<&mut FpMatrix>) -> Vec<usize> {
    let p = m.p as u64;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else { continue };
        swap_rows(m, row, pr);
        if let Some(t) = track.as_deref_mut() {
            swap_rows(t, row, pr);
        }
        let inv = inv_mod(m.get(row, col) as u64, p);
        scale_row(m, row, inv);
        if let Some(t) = track.as_deref_mut() {
            scale_row(t, row, inv);
        }
        for r in 0..m.rows {
            if r != row {
                let f = m.get(r, col) as u64;
                if f != 0 {
                    add_row_multiple(m, r, row, p - f);
                    if let Some(t) = track.as_deref_mut() {
                        add_row_multiple(t, r, row, p - f);
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn swap_rows(m: &mut FpMatrix, a: usize, b: usize) {
    if a != b {
        for c in 0..m.cols {
            m.data.swap(a * m.cols + c, b * m.cols + c);
        }
    }
}

fn scale_row(m: &mut FpMatrix, r: usize, f: u64) {
    let p = m.p as u64;
    for c in 0..m.cols {
        let idx = r * m.cols + c;
        m.data[idx] = (m.data[idx] as u64 * f % p) as u32;
    }
}

/// `row[dst] += f · row[src]`.
fn add_row_multiple(m: &mut FpMatrix, dst: usize, src: usize, f: u64) {
    let p = m.p as u64;
    for c in 0..m.cols {
        let s = m.data[src * m.cols + c] as u64;
        if s != 0 {
            let idx = dst * m.cols + c;
            m.data[idx] = ((m.data[idx] as u64 + f * s) % p) as u32;
        }
    }
}

/// Precomputed solver for `A x = b` returning the echelon-minimal solution
/// (all free variables zero).
#[derive(Clone, Debug)]
pub struct Solver {
    rref: FpMatrix,
    transform: FpMatrix,
    pivots: Vec<usize>,
}

impl Solver {
    pub fn new(a: &FpMatrix) -> Self {
        let mut rref = a.clone();
        let mut transform = FpMatrix::zero(a.p, a.rows, a.rows);
        for i in 0..a.rows {
            transform.data[i * a.rows + i] = 1;
        }
        let pivots = rref_in_place(&mut rref, Some(&mut transform));
        Solver { rref, transform, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        let c = self.transform.mul_vec(b);
        if c[self.pivots.len()..].iter().any(|&x| x != 0) {
            return None;
        }
        let mut x = vec![0u32; self.rref.cols];
        for (k, &pc) in self.pivots.iter().enumerate() {
            x[pc] = c[k];
        }
        Some(x)
    }
}

/// A subspace stored by the reduced echelon form of a spanning set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub p: u32,
    pub ambient: usize,
    /// Reduced echelon rows.
    pub rows: Vec<Vec<u32>>,
    pub pivots: Vec<usize>,
}

impl Subspace {
    pub fn span(p: u32, ambient: usize, vectors: &[Vec<u32>]) -> Self {
        let m = FpMatrix::from_rows(p, ambient, vectors);
        let (r, pivots) = m.rref();
        let rows = (0..pivots.len()).map(|k| r.row(k).to_vec()).collect();
        Subspace { p, ambient, rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Canonical representative of `v + self`: the unique element of the
    /// coset vanishing on all pivot coordinates.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut out: Vec<u32> = v.iter().map(|&x| x % self.p).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = out[pc] as u64;
            if f != 0 {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = ((*o as u64 + (p - f) * r as u64) % p) as u32;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

pub fn add_vec(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| (x + y) % p).collect()
}

pub fn sub_vec(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
}

pub fn scale_vec(p: u32, a: &[u32], f: u32) -> Vec<u32> {
    a.iter().map(|&x| (x as u64 * f as u64 % p as u64) as u32).collect()
}

pub fn neg_vec(p: u32, a: &[u32]) -> Vec<u32> {
    a.iter().map(|&x| (p - x) % p).collect()
}

/// All `F_p`-combinations of the given vectors, in lexicographic order of
/// the coefficient tuple (first coefficient most significant).
pub fn all_combinations(p: u32, ambient: usize, basis: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = basis.len();
    let total = (p as usize).pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut v = vec![0u32; ambient];
        let mut rest = idx;
        for k in (0..n).rev() {
            let c = (rest % p as usize) as u32;
            rest /= p as usize;
            if c != 0 {
                v = add_vec(p, &v, &scale_vec(p, &basis[k], c));
            }
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn x_times_row_reduction() {
        // (g1, g2) ↦ x g1 + g2 x over F_2[x]/x², coordinates (1, x)
        let a = FpMatrix::from_rows(2, 4, &[vec![0, 0, 0, 0], vec![1, 0, 1, 0]]);
        assert_eq!(a.rank(), 1);
        let s = Solver::new(&a);
        assert_eq!(s.solve(&[1, 0]), None);
        assert_eq!(s.solve(&[0, 1]), Some(vec![1, 0, 0, 0]));
    }

    #[test]
    fn subspace_reduction_is_canonical() {
        let s = Subspace::span(3, 3, &[vec![1, 2, 0], vec![2, 1, 0]]);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.reduce(&[1, 2, 1]), vec![0, 0, 1]);
        assert!(s.contains(&[2, 1, 0]));
    }

    fn matrix_strategy(p: u32) -> impl Strategy<Value = FpMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..p, r * c).prop_map(move |data| FpMatrix { p, rows: r, cols: c, data })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in matrix_strategy(3)) {
            let k = m.kernel_basis();
            prop_assert_eq!(k.len() + m.rank(), m.cols);
            for v in &k {
                prop_assert!(m.mul_vec(v).iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn solve_then_check(m in matrix_strategy(2), x in proptest::collection::vec(0u32..2, 6)) {
            let x = &x[..m.cols];
            let b = m.mul_vec(x);
            let s = Solver::new(&m);
            let y = s.solve(&b).unwrap();
            prop_assert_eq!(m.mul_vec(&y), b);
        }

        #[test]
        fn rref_is_idempotent(m in matrix_strategy(5)) {
            let (r, piv) = m.rref();
            let (r2, piv2) = r.rref();
            prop_assert_eq!(r, r2);
            prop_assert_eq!(piv, piv2);
        }
    }
}
