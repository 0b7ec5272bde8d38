//! Canonical linear subspaces of Q^n.

use num::Zero;

use super::matrix::QMatrix;
use super::poly::Rat;

/// A subspace of Q^ambient_dim with its basis held in reduced row-echelon
/// form, so that equal subspaces have equal representations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSubspace {
    ambient_dim: usize,
    basis: QMatrix,
}

impl LinearSubspace {
    pub fn zero(ambient_dim: usize) -> Self {
        LinearSubspace {
            ambient_dim,
            basis: QMatrix::zero(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        LinearSubspace {
            ambient_dim,
            basis: QMatrix::identity(ambient_dim),
        }
    }

    /// Span of the given vectors; reduces to a canonical RREF basis.
    pub fn from_rows(ambient_dim: usize, rows: Vec<Vec<Rat>>) -> Self {
        if rows.is_empty() {
            return Self::zero(ambient_dim);
        }
        let (r, pivots) = QMatrix::from_rows(rows).rref();
        let basis = QMatrix::from_rows((0..pivots.len()).map(|i| r.row(i).to_vec()).collect());
        LinearSubspace {
            ambient_dim,
            basis: if pivots.is_empty() {
                QMatrix::zero(0, ambient_dim)
            } else {
                basis
            },
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.basis.rows())
            .map(|r| self.basis.row(r).to_vec())
            .collect()
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        if v.iter().all(|x| x.is_zero()) {
            return true;
        }
        let mut rows = self.basis_rows();
        rows.push(v.to_vec());
        Self::from_rows(self.ambient_dim, rows).dim() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &LinearSubspace) -> bool {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        self.basis_rows().iter().all(|v| other.contains(v))
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &LinearSubspace) -> Self {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut rows = self.basis_rows();
        rows.extend(other.basis_rows());
        Self::from_rows(self.ambient_dim, rows)
    }

    /// Intersection, via left-kernel combinations of the stacked bases.
    pub fn intersect(&self, other: &LinearSubspace) -> Self {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        if self.dim() == 0 || other.dim() == 0 {
            return Self::zero(self.ambient_dim);
        }
        let a = &self.basis;
        let b = &other.basis;
        // (u, v) with u A + v B = 0  =>  u A spans the intersection
        let stacked = a.vstack(b).transpose();
        let left = stacked.kernel_basis();
        let mut rows = Vec::new();
        for k in 0..left.dim() {
            let uv = left.basis().row(k);
            let mut vec = vec![Rat::zero(); self.ambient_dim];
            for (i, coeff) in uv[..a.rows()].iter().enumerate() {
                for (c, slot) in vec.iter_mut().enumerate() {
                    *slot += coeff * a.get(i, c);
                }
            }
            rows.push(vec);
        }
        Self::from_rows(self.ambient_dim, rows)
    }
}
