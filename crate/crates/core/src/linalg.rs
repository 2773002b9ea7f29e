//! Dense exact linear algebra: rank, kernel, solve, inverse over any
//! [`Scalar`] field, plus Smith normal form over the integers for the
//! lattice-index computations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Ring, Scalar};
use crate::Rat;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Ring> Matrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut acc = T::zero();
        for i in 0..self.rows {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    /// tr(self * other) without forming the product.
    pub fn trace_mul(&self, other: &Self) -> T {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = acc + self[(i, j)].clone() * other[(j, i)].clone();
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() * c.clone())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix<Rat> {
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        Matrix::from_fn(rows.len(), rows.first().map_or(0, Vec::len), |i, j| {
            Rat::from(BigInt::from(rows[i][j]))
        })
    }
}

impl<T: Scalar> Matrix<T> {
    /// In-place reduced row echelon form. Returns (rank, pivot columns).
    pub fn rref(&mut self) -> (usize, Vec<usize>) {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                let tmp = self[(pr, j)].clone();
                self[(pr, j)] = self[(r, j)].clone();
                self[(r, j)] = tmp;
            }
            let inv = self[(r, c)].inv().expect("pivot nonzero");
            for j in 0..self.cols {
                self[(r, j)] = self[(r, j)].clone() * inv.clone();
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in 0..self.cols {
                        let delta = f.clone() * self[(r, j)].clone();
                        self[(i, j)] = self[(i, j)].clone() - delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (r, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().0
    }

    /// Basis of the right kernel, one vector per non-pivot column.
    pub fn kernel_basis(&self) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let (_, pivots) = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = T::zero() - m[(r, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// A particular solution of `self * x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, b.len());
        let mut aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (_, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Determinant by fraction-full Gaussian elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return T::zero();
            };
            if pr != c {
                for j in 0..n {
                    let tmp = m[(pr, j)].clone();
                    m[(pr, j)] = m[(c, j)].clone();
                    m[(c, j)] = tmp;
                }
                det = T::zero() - det;
            }
            det = det * m[(c, c)].clone();
            let inv = m[(c, c)].inv().expect("pivot nonzero");
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() * inv.clone();
                for j in c..n {
                    let delta = f.clone() * m[(c, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - delta;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let (rank, _) = aug.rref();
        if rank < n {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| aug[(i, j + n)].clone()))
    }
}

/// Scales a rational vector to a primitive integer vector (gcd 1), keeping
/// orientation by the first nonzero entry positive.
pub fn primitive_integer_vector(v: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if !g.is_zero() && !g.is_one() {
        for x in &mut ints {
            *x = &*x / &g;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut ints {
                *x = -x.clone();
            }
        }
    }
    ints
}

/// Smith normal form over the integers: returns the elementary divisors
/// (non-zero diagonal entries, each dividing the next).
pub fn smith_normal_form(mat: &Matrix<BigInt>) -> Vec<BigInt> {
    let mut m = mat.clone();
    let rows = m.rows;
    let cols = m.cols;
    let mut divisors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // find a nonzero entry with minimal absolute value in the submatrix
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[(i, j)].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if m[(i, j)].abs() < m[(bi, bj)].abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        for j in 0..cols {
            let tmp = m[(pi, j)].clone();
            m[(pi, j)] = m[(t, j)].clone();
            m[(t, j)] = tmp;
        }
        for i in 0..rows {
            let tmp = m[(i, pj)].clone();
            m[(i, pj)] = m[(i, t)].clone();
            m[(i, t)] = tmp;
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = m[(i, t)].div_floor(&m[(t, t)]);
            if !q.is_zero() {
                for j in 0..cols {
                    let delta = &q * &m[(t, j)];
                    m[(i, j)] = &m[(i, j)] - delta;
                }
            }
            if !m[(i, t)].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            let q = m[(t, j)].div_floor(&m[(t, t)]);
            if !q.is_zero() {
                for i in 0..rows {
                    let delta = &q * &m[(i, t)];
                    m[(i, j)] = &m[(i, j)] - delta;
                }
            }
            if !m[(t, j)].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue; // repeat with a smaller pivot
        }
        divisors.push(m[(t, t)].abs());
        t += 1;
    }
    // enforce divisibility chain
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..divisors.len().saturating_sub(1) {
            let (a, b) = (divisors[i].clone(), divisors[i + 1].clone());
            if !(&b % &a).is_zero() {
                let g = a.gcd(&b);
                let l = a.lcm(&b);
                divisors[i] = g;
                divisors[i + 1] = l;
                changed = true;
            }
        }
    }
    divisors
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: i64) -> Rat {
        Rat::from(BigInt::from(v))
    }

    #[test]
    fn rank_kernel_solve() {
        let m = Matrix::from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        for i in 0..m.rows {
            let mut acc = rat(0);
            for j in 0..m.cols {
                acc += m[(i, j)].clone() * k[0][j].clone();
            }
            assert!(acc.is_zero());
        }
        let b = vec![rat(6), rat(12), rat(2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        assert!(m.solve(&[rat(1), rat(0), rat(0)]).is_none());
    }

    #[test]
    fn det_and_inverse() {
        let m = Matrix::from_i64_rows(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(m.det(), rat(3));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
    }

    #[test]
    fn snf_divisors() {
        let m = Matrix::from_fn(2, 2, |i, j| BigInt::from([[2i64, 4], [6, 8]][i][j]));
        let d = smith_normal_form(&m);
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(4)]);

        let id3 = Matrix::from_fn(3, 3, |i, j| BigInt::from((i == j) as i64));
        assert_eq!(smith_normal_form(&id3), vec![BigInt::one(); 3]);
    }
}
