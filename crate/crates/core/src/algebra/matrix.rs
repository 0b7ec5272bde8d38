//! Dense rational matrices with exact elimination.

use num::{BigInt, One, Zero};

use super::poly::Rat;
use super::subspace::LinearSubspace;

/// Dense rectangular matrix over Q, row major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        QMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Stack two matrices vertically.
    pub fn vstack(&self, other: &QMatrix) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Reduced row-echelon form and the pivot column indices.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pr = 0;
        for pc in 0..m.cols {
            if pr == m.rows {
                break;
            }
            // first nonzero entry in this column at or below pr
            let Some(sel) = (pr..m.rows).find(|&r| !m.get(r, pc).is_zero()) else {
                continue;
            };
            if sel != pr {
                for c in 0..m.cols {
                    m.data.swap(pr * m.cols + c, sel * m.cols + c);
                }
            }
            let inv = m.get(pr, pc).clone().recip();
            for c in pc..m.cols {
                let v = m.get(pr, c) * &inv;
                m.set(pr, c, v);
            }
            for r in 0..m.rows {
                if r != pr && !m.get(r, pc).is_zero() {
                    let f = m.get(r, pc).clone();
                    for c in pc..m.cols {
                        let v = m.get(r, c) - &(m.get(pr, c) * &f);
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        (m, pivots)
    }

    /// Rank via fraction-free Bareiss elimination on an integer-scaled copy.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // scale each row to integers
        let mut m: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let lcm = self.row(r).iter().fold(BigInt::one(), |acc, v| {
                    num::integer::lcm(acc, v.denom().clone())
                });
                self.row(r)
                    .iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect()
            })
            .collect();
        let mut prev = BigInt::one();
        let mut pr = 0;
        for pc in 0..self.cols {
            if pr == self.rows {
                break;
            }
            let Some(sel) = (pr..self.rows).find(|&r| !m[r][pc].is_zero()) else {
                continue;
            };
            m.swap(pr, sel);
            for r in pr + 1..self.rows {
                for c in pc + 1..self.cols {
                    let v = (&m[pr][pc] * &m[r][c] - &m[r][pc] * &m[pr][c]) / &prev;
                    m[r][c] = v;
                }
                m[r][pc] = BigInt::zero();
            }
            prev = m[pr][pc].clone();
            pr += 1;
        }
        pr
    }

    /// Basis of the right kernel {v : M v = 0}, as a canonical subspace.
    pub fn kernel_basis(&self) -> LinearSubspace {
        if self.cols == 0 {
            return LinearSubspace::zero(0);
        }
        let (r, pivots) = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![Rat::zero(); self.cols];
            vec[free] = Rat::one();
            for (col, rowidx) in pivot_set.iter().enumerate() {
                if let Some(row) = rowidx {
                    vec[col] = -r.get(*row, free).clone();
                }
            }
            basis.push(vec);
        }
        LinearSubspace::from_rows(self.cols, basis)
    }

    /// The row space as a canonical subspace.
    pub fn row_space(&self) -> LinearSubspace {
        LinearSubspace::from_rows(
            self.cols,
            (0..self.rows).map(|r| self.row(r).to_vec()).collect(),
        )
    }

    /// Determinant by Bareiss; square matrices only.
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rat::one();
        }
        let mut m: Vec<Vec<Rat>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut sign = Rat::one();
        let mut prev = Rat::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(sel) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return Rat::zero();
                };
                m.swap(k, sel);
                sign = -sign;
            }
            for r in k + 1..n {
                for c in k + 1..n {
                    let v = (&m[k][k] * &m[r][c] - &m[r][k] * &m[k][c]) / &prev;
                    m[r][c] = v;
                }
                m[r][k] = Rat::zero();
            }
            prev = m[k][k].clone();
        }
        &sign * &m[n - 1][n - 1]
    }
}
