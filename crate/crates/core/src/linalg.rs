//! Dense matrices over either scalar kind, with elimination-based rank, kernel
//! and minor computations. On the exact path every pivot decision is exact.

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::scalar::{Qc, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_columns(rows: usize, cols: &[Vec<S>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn matmul(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.rows, "matmul shape");
        let mut out: Mat<S> = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].add_ref(&a.mul_ref(b));
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "mat_vec shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add_ref(&a.mul_ref(b));
                    }
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mat(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.rows, v.len(), "vec_mat shape");
        let mut out = vec![S::zero(); self.cols];
        for (i, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let b = self.get(i, j);
                if !b.is_zero() {
                    *o = o.add_ref(&a.mul_ref(b));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.shape(), o.shape(), "add shape");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.shape(), o.shape(), "sub shape");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        self.map(|x| if x.is_zero() { S::zero() } else { x.mul_ref(s) })
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Mat<S> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn conj(&self) -> Mat<S> {
        self.map(|x| x.conj())
    }

    pub fn adjoint(&self) -> Mat<S> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn to_c64(&self) -> Mat<Complex64> {
        self.map(|x| x.to_c64())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<S> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &Mat<S>) -> f64 {
        assert_eq!(self.shape(), o.shape(), "diff shape");
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (a.clone() - b.clone()).modulus())
            .fold(0.0, f64::max)
    }
}

/// Reduced row echelon form; returns the reduced matrix and its pivot columns.
/// Exact scalars pivot on the first nonzero entry, floats on the largest one.
pub fn rref<S: Scalar>(m: &Mat<S>, tol: f64) -> (Mat<S>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let candidate = if S::EXACT {
            (r..a.rows).find(|&i| !a.get(i, c).is_zero())
        } else {
            (r..a.rows)
                .filter(|&i| !a.get(i, c).negligible(tol))
                .max_by(|&i, &j| a.get(i, c).modulus().total_cmp(&a.get(j, c).modulus()))
        };
        let Some(p) = candidate else { continue };
        if p != r {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, r * a.cols + j);
            }
        }
        let inv = S::one() / a.get(r, c).clone();
        for j in 0..a.cols {
            let v = a.get(r, j).mul_ref(&inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..a.cols {
                let rj = a.get(r, j);
                if rj.is_zero() {
                    continue;
                }
                let v = a.get(i, j).clone() - f.mul_ref(rj);
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<S: Scalar>(m: &Mat<S>, tol: f64) -> usize {
    rref(m, tol).1.len()
}

/// Basis of the right kernel {x : m x = 0}.
pub fn kernel<S: Scalar>(m: &Mat<S>, tol: f64) -> Vec<Vec<S>> {
    let (r, pivots) = rref(m, tol);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![S::zero(); m.cols];
            x[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -r.get(row, f).clone();
            }
            x
        })
        .collect()
}

/// Solves `a x = b` for square invertible `a`.
pub fn solve<S: Scalar>(a: &Mat<S>, b: &Mat<S>, tol: f64) -> Option<Mat<S>> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    assert_eq!(b.rows, n);
    let aug = Mat::from_fn(n, n + b.cols, |i, j| {
        if j < n {
            a.get(i, j).clone()
        } else {
            b.get(i, j - n).clone()
        }
    });
    let (r, pivots) = rref(&aug, tol);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(Mat::from_fn(n, b.cols, |i, j| r.get(i, n + j).clone()))
}

pub fn determinant<S: Scalar>(m: &Mat<S>) -> S {
    let n = m.rows;
    assert_eq!(n, m.cols);
    let mut a = m.clone();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else {
            return S::zero();
        };
        if p != c {
            for j in 0..n {
                a.data.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        let piv = a.get(c, c).clone();
        det = det * piv.clone();
        for i in c + 1..n {
            let f = a.get(i, c).clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = a.get(i, j).clone() - f.mul_ref(a.get(c, j));
                a.set(i, j, v);
            }
        }
    }
    det
}

/// Leading principal minors det(m[..k, ..k]) for k = 1..=n.
pub fn leading_minors<S: Scalar>(m: &Mat<S>) -> Vec<S> {
    let n = m.rows;
    (1..=n)
        .map(|k| {
            let idx: Vec<usize> = (0..k).collect();
            determinant(&m.submatrix(&idx, &idx))
        })
        .collect()
}

/// Signature of a Hermitian matrix over Q(i): (positive, negative, zero) counts,
/// by exact congruence diagonalisation.
pub fn inertia(m: &Mat<Qc>) -> (usize, usize, usize) {
    let n = m.rows;
    assert_eq!(n, m.cols);
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    while !active.is_empty() {
        // Prefer a nonzero diagonal pivot.
        let pivot = active.iter().copied().find(|&k| !a.get(k, k).is_zero());
        let k = match pivot {
            Some(k) => k,
            None => {
                // All diagonals vanish: find a nonzero off-diagonal pair and
                // add row/col j to row/col i to create a diagonal entry.
                let pair = active.iter().copied().find_map(|i| {
                    active.iter().copied().find(|&j| j != i && !a.get(i, j).is_zero()).map(|j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                // Choose the multiplier t in {1, i} so that 2·Re(conj(t)·a_ij) ≠ 0.
                let aij = a.get(i, j).clone();
                let t = if aij.re.is_zero() { Qc::i() } else { Qc::int(1) };
                for c in 0..n {
                    let v = a.get(i, c).clone() + t.conj() * a.get(j, c).clone();
                    a.set(i, c, v);
                }
                for r in 0..n {
                    let v = a.get(r, i).clone() + a.get(r, j).clone() * t.clone();
                    a.set(r, i, v);
                }
                i
            }
        };
        let d = a.get(k, k).clone();
        debug_assert!(d.im.is_zero(), "Hermitian diagonal must be real");
        if d.re.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for &i in &active {
            if i == k {
                continue;
            }
            let f = a.get(i, k).clone() / d.clone();
            if f.is_zero() {
                continue;
            }
            for c in 0..n {
                let v = a.get(i, c).clone() - f.clone() * a.get(k, c).clone();
                a.set(i, c, v);
            }
            for r in 0..n {
                let v = a.get(r, i).clone() - a.get(r, k).clone() * f.conj();
                a.set(r, i, v);
            }
        }
        active.retain(|&x| x != k);
    }
    let zero = n - pos - neg;
    (pos, neg, zero)
}

/// Real part of an exact scalar known to be real.
pub fn real_part(q: &Qc) -> &Rational {
    debug_assert!(q.im.is_zero());
    &q.re
}

pub fn rational_sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q(n: i64) -> Qc {
        Qc::int(n)
    }

    #[test]
    fn rank_and_kernel_of_singular_matrix() {
        let m = Mat::from_rows(vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]]);
        assert_eq!(rank(&m, 0.0), 2);
        let k = kernel(&m, 0.0);
        assert_eq!(k.len(), 1);
        assert!(m.mat_vec(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = Mat::from_rows(vec![vec![q(2), q(-1), q(0)], vec![q(1), q(3), q(4)], vec![q(0), q(5), q(-2)]]);
        // 2(−6−20) + 1(−2−0) = −54
        assert_eq!(determinant(&m), q(-54));
    }

    #[test]
    fn inertia_of_indefinite_and_degenerate_forms() {
        let m = Mat::from_rows(vec![vec![q(0), q(1)], vec![q(1), q(0)]]);
        assert_eq!(inertia(&m), (1, 1, 0));
        let d = Mat::from_rows(vec![vec![Qc::real(rat(1, 2)), q(1)], vec![q(1), q(2)]]);
        assert_eq!(inertia(&d), (1, 0, 1));
    }

    #[test]
    fn solve_recovers_solution() {
        let a = Mat::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(3)]]);
        let x = Mat::from_rows(vec![vec![q(1)], vec![q(-2)]]);
        let b = a.matmul(&x);
        assert_eq!(solve(&a, &b, 0.0).unwrap(), x);
    }
}
