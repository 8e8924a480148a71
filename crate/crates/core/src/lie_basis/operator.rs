use std::collections::BTreeMap;

use num_complex::Complex;

use crate::scalar::{czero, CMatrix, CVector, Modulus, Real};

/// Sparse square operator in compressed-row form.
///
/// Every generator built by this crate is sparse in its natural basis, and the
/// full observable algebra on a 66-dimensional space has 4355 members, so
/// bases keep their generators in this form and densify on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> Operator<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and zeros dropped.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex<T>)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            *acc.entry((r, c)).or_insert_with(czero) += v;
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v.re == T::zero() && v.im == T::zero() {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &CMatrix<T>) -> Self {
        let n = m.nrows();
        let triplets = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)]))
            .filter(|(_, _, v)| v.re != T::zero() || v.im != T::zero())
            .collect::<Vec<_>>();
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        let slice = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match slice.binary_search(&c) {
            Ok(pos) => self.vals[self.row_ptr[r] + pos],
            Err(_) => czero(),
        }
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * s).collect(),
        }
    }

    /// `Σ w_k A_k` over operators of a common dimension.
    pub fn linear_combination<'a>(dim: usize, terms: impl IntoIterator<Item = (T, &'a Operator<T>)>) -> Self
    where
        T: 'a,
    {
        let triplets = terms
            .into_iter()
            .flat_map(|(w, op)| op.entries().map(move |(r, c, v)| (r, c, v * w)))
            .collect::<Vec<_>>();
        Self::from_triplets(dim, triplets)
    }

    /// `G v`
    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        CVector::from_fn(self.dim, |r, _| {
            self.row(r).fold(czero(), |acc, (c, x)| acc + x * v[c])
        })
    }

    /// `⟨v|G|v⟩`
    pub fn expectation(&self, v: &CVector<T>) -> Complex<T> {
        let mut acc = czero();
        for r in 0..self.dim {
            let row = self.row(r).fold(czero(), |a, (c, x)| a + x * v[c]);
            acc += v[r].conj() * row;
        }
        acc
    }

    /// `G M`
    pub fn left_mul(&self, m: &CMatrix<T>) -> CMatrix<T> {
        let ncols = m.ncols();
        let mut out = CMatrix::zeros(self.dim, ncols);
        for (r, c, x) in self.entries() {
            for j in 0..ncols {
                out[(r, j)] += x * m[(c, j)];
            }
        }
        out
    }

    /// `M G`
    pub fn right_mul(&self, m: &CMatrix<T>) -> CMatrix<T> {
        let nrows = m.nrows();
        let mut out = CMatrix::zeros(nrows, self.dim);
        for (r, c, x) in self.entries() {
            for i in 0..nrows {
                out[(i, c)] += m[(i, r)] * x;
            }
        }
        out
    }

    /// `[G, M]`
    pub fn commutator_dense(&self, m: &CMatrix<T>) -> CMatrix<T> {
        self.left_mul(m) - self.right_mul(m)
    }

    /// Sparse product `A B`.
    pub fn mul(&self, other: &Operator<T>) -> Operator<T> {
        let mut triplets = Vec::new();
        for (r, k, a) in self.entries() {
            for (c, b) in other.row(k) {
                triplets.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// `A - B`
    pub fn sub(&self, other: &Operator<T>) -> Operator<T> {
        let triplets = self
            .entries()
            .chain(other.entries().map(|(r, c, v)| (r, c, -v)))
            .collect::<Vec<_>>();
        Self::from_triplets(self.dim, triplets)
    }

    /// `[A, B]`
    pub fn commutator(&self, other: &Operator<T>) -> Operator<T> {
        self.mul(other).sub(&other.mul(self))
    }

    /// `Tr(A B)`
    pub fn trace_product(&self, other: &Operator<T>) -> Complex<T> {
        self.entries()
            .fold(czero(), |acc, (r, c, a)| acc + a * other.get(c, r))
    }

    /// `Tr(G M)` against a dense matrix.
    pub fn trace_with_dense(&self, m: &CMatrix<T>) -> Complex<T> {
        self.entries().fold(czero(), |acc, (r, c, a)| acc + a * m[(c, r)])
    }

    pub fn max_abs(&self) -> T {
        self.vals
            .iter()
            .fold(T::zero(), |acc, v| if v.modulus_r() > acc { v.modulus_r() } else { acc })
    }

    pub fn hermiticity_residual(&self) -> T {
        self.entries().fold(T::zero(), |acc, (r, c, v)| {
            let d = (v - self.get(c, r).conj()).modulus_r();
            if d > acc {
                d
            } else {
                acc
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::scalar::cx;

    fn sample() -> Operator<f64> {
        Operator::from_triplets(
            3,
            vec![
                (0, 1, cx(1.0, 2.0)),
                (1, 0, cx(1.0, -2.0)),
                (2, 2, cx(-0.5, 0.0)),
                (2, 2, cx(0.25, 0.0)),
            ],
        )
    }

    #[test]
    fn duplicates_are_summed() {
        let op = sample();
        assert_eq!(op.nnz(), 3);
        assert_eq!(op.get(2, 2), cx(-0.25, 0.0));
        assert_eq!(op.hermiticity_residual(), 0.0);
    }

    #[test]
    fn sparse_products_match_dense() {
        let a = sample();
        let b = Operator::from_triplets(3, vec![(0, 2, cx(0.0, 1.0)), (2, 0, cx(0.0, -1.0)), (1, 1, cx(3.0, 0.0))]);
        let (da, db) = (a.to_dense(), b.to_dense());
        assert!(max_abs(&(a.mul(&b).to_dense() - &da * &db)) < 1e-15);
        assert!(max_abs(&(a.commutator(&b).to_dense() - (&da * &db - &db * &da))) < 1e-15);
        assert!((a.trace_product(&b) - (&da * &db).trace()).norm() < 1e-15);
        assert!(max_abs(&(a.left_mul(&db) - &da * &db)) < 1e-15);
        assert!(max_abs(&(a.right_mul(&db) - &db * &da)) < 1e-15);
        let v = CVector::from_vec(vec![cx(1.0, 0.5), cx(-0.2, 0.0), cx(0.0, 1.0)]);
        let dense_exp = (v.adjoint() * &da * &v)[(0, 0)];
        assert!((a.expectation(&v) - dense_exp).norm() < 1e-15);
    }
}
