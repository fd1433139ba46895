use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation matrix `O_p` built from a 1-based index tuple `p = (i_1, ..., i_n)`.
///
/// Row `j` of the matrix is row `i_j` of the identity, so `(O_p v)_j = v_{i_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationMatrix {
    indices: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl PermutationMatrix {
    /// Builds `O_p`, rejecting duplicate or out-of-range indices.
    pub fn new(p: &[usize]) -> Result<Self> {
        let n = p.len();
        let mut seen = vec![false; n];
        for &i in p {
            if i == 0 || i > n || seen[i - 1] {
                return Err(Error::InvalidPermutation(p.to_vec(), n));
            }
            seen[i - 1] = true;
        }
        if n == 0 {
            return Err(Error::InvalidPermutation(Vec::new(), 0));
        }
        let mut matrix = DMatrix::zeros(n, n);
        for (row, &i) in p.iter().enumerate() {
            matrix[(row, i - 1)] = 1.0;
        }
        Ok(Self {
            indices: p.to_vec(),
            matrix,
        })
    }

    pub fn identity(n: usize) -> Self {
        let p: Vec<usize> = (1..=n).collect();
        Self::new(&p).expect("identity tuple is a permutation")
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Applies `O_p` by index routing; identical to the dense product.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.indices.iter().map(|&i| v[i - 1]))
    }

    /// Applies `O_p^T`, the inverse routing.
    pub fn apply_transpose(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (row, &i) in self.indices.iter().enumerate() {
            out[i - 1] = v[row];
        }
        out
    }
}

/// All permutations of `(1, ..., n)` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (1..=n).collect();
    let mut out = vec![current.clone()];
    if n == 0 {
        return out;
    }
    // Narayana's next-permutation algorithm.
    loop {
        let Some(i) = (0..n - 1).rev().find(|&i| current[i] < current[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(current.clone());
    }
}

/// Formats a tuple as `(2,1,3)`.
pub fn format_tuple(p: &[usize]) -> String {
    let inner: Vec<String> = p.iter().map(|i| i.to_string()).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_tuple_gives_identity_matrix() {
        let op = PermutationMatrix::new(&[1, 2, 3]).unwrap();
        assert_eq!(op.matrix(), &DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn swap_of_two() {
        let op = PermutationMatrix::new(&[2, 1]).unwrap();
        assert_eq!(
            op.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn routes_low_order_pre_estimate() {
        let op = PermutationMatrix::new(&[2, 1, 3]).unwrap();
        let v = DVector::from_vec(vec![0.8, 0.5, 1.0]);
        assert_eq!(op.apply(&v), DVector::from_vec(vec![0.5, 0.8, 1.0]));
        assert_eq!(op.matrix() * &v, op.apply(&v));
        assert_eq!(op.apply_transpose(&op.apply(&v)), v);
    }

    #[test]
    fn rejects_bad_tuples() {
        assert!(matches!(
            PermutationMatrix::new(&[1, 1, 3]),
            Err(Error::InvalidPermutation(..))
        ));
        assert!(PermutationMatrix::new(&[0, 1]).is_err());
        assert!(PermutationMatrix::new(&[1, 4, 2]).is_err());
        assert!(PermutationMatrix::new(&[]).is_err());
    }

    #[test]
    fn enumerates_all_permutations() {
        let perms = all_permutations(3);
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], vec![1, 2, 3]);
        assert_eq!(perms[5], vec![3, 2, 1]);
        assert_eq!(all_permutations(1), vec![vec![1]]);
        assert_eq!(all_permutations(4).len(), 24);
    }

    #[test]
    fn permutation_matrices_are_orthogonal() {
        for p in all_permutations(4) {
            let op = PermutationMatrix::new(&p).unwrap();
            let m = op.matrix();
            assert_eq!(m.transpose() * m, DMatrix::identity(4, 4));
            for r in 0..4 {
                assert_eq!(m.row(r).sum(), 1.0);
                assert_eq!(m.column(r).sum(), 1.0);
            }
        }
    }
}
