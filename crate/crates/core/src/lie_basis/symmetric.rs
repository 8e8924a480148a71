use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lie_basis::Operator;
use crate::scalar::{CMatrix, Real};

/// Binomial coefficient in `u128`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `binom(N + d - 1, d - 1)`, the dimension of the symmetric subspace.
pub fn symmetric_dim(d: usize, n_particles: usize) -> Option<u128> {
    binomial((n_particles + d - 1) as u64, (d - 1) as u64)
}

/// Bijection between occupation tuples `(n_1, ..., n_d)` with `Σ n_i = N` and
/// basis indices of the permutationally symmetric subspace.
///
/// Indices follow lexicographically descending occupation order, so index 0
/// is `(N, 0, ..., 0)` and the last index is `(0, ..., 0, N)`.
#[derive(Clone, Debug)]
pub struct SymmetricIndex {
    d: usize,
    n_particles: usize,
    occupations: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl SymmetricIndex {
    pub fn new(d: usize, n_particles: usize, cap: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!("levels d = {d} must be at least 2")));
        }
        if n_particles < 1 {
            return Err(Error::InvalidDimension("particle number must be at least 1".into()));
        }
        let dim = symmetric_dim(d, n_particles).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(Error::DimensionCap {
                dim: usize::try_from(dim).unwrap_or(usize::MAX),
                cap,
            });
        }
        let mut occupations = Vec::with_capacity(dim as usize);
        let mut current = vec![0u32; d];
        fill(&mut occupations, &mut current, 0, n_particles as u32);
        let lookup = occupations
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            d,
            n_particles,
            occupations,
            lookup,
        })
    }

    pub fn levels(&self) -> usize {
        self.d
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn occupation(&self, index: usize) -> &[u32] {
        &self.occupations[index]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    pub fn occupations(&self) -> impl Iterator<Item = &[u32]> {
        self.occupations.iter().map(|t| t.as_slice())
    }

    /// Second-quantized image `Σ_ij M_ij a_i† a_j` of a single-particle operator.
    pub fn collective<T: Real>(&self, single: &Operator<T>) -> Operator<T> {
        assert_eq!(single.dim(), self.d, "single-particle operator has wrong dimension");
        let mut triplets = Vec::new();
        let mut target = vec![0u32; self.d];
        for (col, occ) in self.occupations.iter().enumerate() {
            for (i, j, m) in single.entries() {
                if i == j {
                    if occ[i] > 0 {
                        triplets.push((col, col, m * T::count(occ[i] as usize)));
                    }
                    continue;
                }
                if occ[j] == 0 {
                    continue;
                }
                target.copy_from_slice(occ);
                target[j] -= 1;
                target[i] += 1;
                let amp = T::lit(f64::from(occ[j]) * f64::from(occ[i] + 1)).sqrt();
                let row = self.lookup[&target];
                triplets.push((row, col, m * amp));
            }
        }
        Operator::from_triplets(self.dim(), triplets)
    }

    /// Isometry from the symmetric subspace into the full `d^N` tensor space.
    ///
    /// Column `k` is the normalized symmetrization of occupation `k`; particle 1
    /// is the most significant digit of the tensor index.
    pub fn embedding<T: Real>(&self) -> CMatrix<T> {
        let full = self.d.pow(self.n_particles as u32);
        let mut m = CMatrix::zeros(full, self.dim());
        let mut counts = vec![0u32; self.d];
        let mut multiplicity = vec![0usize; self.dim()];
        for idx in 0..full {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut rest = idx;
            for _ in 0..self.n_particles {
                counts[rest % self.d] += 1;
                rest /= self.d;
            }
            let k = self.lookup[&counts];
            m[(idx, k)] = crate::scalar::cone();
            multiplicity[k] += 1;
        }
        for (k, &mult) in multiplicity.iter().enumerate() {
            let s = T::one() / T::count(mult).sqrt();
            for idx in 0..full {
                m[(idx, k)] *= s;
            }
        }
        m
    }
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut [u32], level: usize, remaining: u32) {
    if level + 1 == current.len() {
        current[level] = remaining;
        out.push(current.to_vec());
        return;
    }
    for n in (0..=remaining).rev() {
        current[level] = n;
        fill(out, current, level + 1, remaining - n);
    }
}
