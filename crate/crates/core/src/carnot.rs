//! Polarized-group computations from structure constants: flags, the
//! pointwise kernel data, the minimal-rank subalgebra, and the step-2
//! degeneration check. Everything happens in the left trivialization, so
//! all operations are exact multilinear algebra on the table.

use num::Zero;
use thiserror::Error;

use crate::algebra::{LinearSubspace, QMatrix, Rat};
use crate::dsl::LieAlgDecl;
use crate::nonholonomy::FlagReport;

#[derive(Error, Debug)]
pub enum CarnotError {
    #[error("Jacobi identity fails on basis triple ({0}, {1}, {2})")]
    Jacobi(usize, usize, usize),
    #[error("polarization must be a proper nonzero subspace (dim {0} of {1})")]
    BadPolarization(usize, usize),
    #[error("polarization is not bracket-generating within depth {0}")]
    NotBracketGenerating(usize),
    #[error("group is not step 2 with vanishing third layer")]
    NotStep2,
    #[error("covector does not annihilate the polarization")]
    CovectorNotInVperp,
    #[error("covector must be nonzero")]
    ZeroCovector,
    #[error("coordinate length {0} does not match algebra dimension {1}")]
    DimMismatch(usize, usize),
}

/// Structure constants of a finite-dimensional Lie algebra over Q, validated
/// for antisymmetry (by construction) and the Jacobi identity (exactly).
#[derive(Clone, Debug)]
pub struct LieAlgebraTable {
    dim: usize,
    /// [e_i, e_j] for i < j (0-based), as coordinate vectors.
    brackets: Vec<Vec<Vec<Rat>>>,
}

impl LieAlgebraTable {
    pub fn from_decl(decl: &LieAlgDecl) -> Result<Self, CarnotError> {
        let n = decl.dim;
        let mut brackets = vec![vec![vec![Rat::zero(); n]; n]; n];
        for (&(i, j, k), val) in &decl.constants {
            // decl keys are 1-based with i < j
            brackets[i - 1][j - 1][k - 1] = val.clone();
        }
        let table = LieAlgebraTable { dim: n, brackets };
        table.check_jacobi()?;
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// [e_i, e_j] as a coordinate vector (0-based indices).
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Rat> {
        if i == j {
            return vec![Rat::zero(); self.dim];
        }
        if i < j {
            self.brackets[i][j].clone()
        } else {
            self.brackets[j][i].iter().map(|c| -c).collect()
        }
    }

    /// [u, v] by bilinearity.
    pub fn bracket(&self, u: &[Rat], v: &[Rat]) -> Result<Vec<Rat>, CarnotError> {
        if u.len() != self.dim {
            return Err(CarnotError::DimMismatch(u.len(), self.dim));
        }
        if v.len() != self.dim {
            return Err(CarnotError::DimMismatch(v.len(), self.dim));
        }
        let mut out = vec![Rat::zero(); self.dim];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() || i == j {
                    continue;
                }
                let b = self.bracket_basis(i, j);
                let w = ui * vj;
                for (slot, bk) in out.iter_mut().zip(&b) {
                    *slot += &w * bk;
                }
            }
        }
        Ok(out)
    }

    fn check_jacobi(&self) -> Result<(), CarnotError> {
        let n = self.dim;
        let basis = |i: usize| -> Vec<Rat> {
            let mut e = vec![Rat::zero(); n];
            e[i] = Rat::from_integer(1.into());
            e
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut acc = self
                        .bracket(&self.bracket_basis(i, j), &basis(k))
                        .expect("dims");
                    for (t, c) in self
                        .bracket(&self.bracket_basis(j, k), &basis(i))
                        .expect("dims")
                        .into_iter()
                        .enumerate()
                    {
                        acc[t] += c;
                    }
                    for (t, c) in self
                        .bracket(&self.bracket_basis(k, i), &basis(j))
                        .expect("dims")
                        .into_iter()
                        .enumerate()
                    {
                        acc[t] += c;
                    }
                    if acc.iter().any(|c| !c.is_zero()) {
                        return Err(CarnotError::Jacobi(i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Span of brackets [a, b] over bases of two subspaces.
    fn bracket_span(&self, a: &LinearSubspace, b: &LinearSubspace) -> LinearSubspace {
        let mut rows = Vec::new();
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                rows.push(
                    self.bracket(a.basis().row(i), b.basis().row(j))
                        .expect("dims"),
                );
            }
        }
        LinearSubspace::from_rows(self.dim, rows)
    }
}

/// A Lie algebra together with a distinguished bracket-generating candidate
/// subspace V.
#[derive(Clone, Debug)]
pub struct PolarizedGroup {
    pub table: LieAlgebraTable,
    pub v: LinearSubspace,
}

impl PolarizedGroup {
    pub fn new(table: LieAlgebraTable, v: LinearSubspace) -> Result<Self, CarnotError> {
        let n = table.dim();
        if v.ambient_dim() != n {
            return Err(CarnotError::DimMismatch(v.ambient_dim(), n));
        }
        if v.dim() == 0 || v.dim() >= n {
            return Err(CarnotError::BadPolarization(v.dim(), n));
        }
        Ok(PolarizedGroup { table, v })
    }

    pub fn from_decl(decl: &LieAlgDecl) -> Result<Self, CarnotError> {
        let table = LieAlgebraTable::from_decl(decl)?;
        PolarizedGroup::new(table, decl.v.clone())
    }

    /// Layers V^1 = V, V^{s+1} = [V, V^s] and their partial sums.
    fn layers(&self, cap: usize) -> Vec<(LinearSubspace, LinearSubspace)> {
        let mut out = Vec::new();
        let mut layer = self.v.clone();
        let mut sum = self.v.clone();
        out.push((layer.clone(), sum.clone()));
        for _ in 1..cap {
            layer = self.table.bracket_span(&self.v, &layer);
            let next_sum = sum.sum(&layer);
            let stable = next_sum == sum;
            sum = next_sum;
            out.push((layer.clone(), sum.clone()));
            if stable || sum.dim() == self.table.dim() {
                break;
            }
        }
        out
    }
}

/// Dimensions of the partial sums V^1 + ... + V^s and the step, if the
/// polarization bracket-generates within the cap.
pub fn polarized_flag(group: &PolarizedGroup, cap: usize) -> FlagReport {
    assert!(cap >= 1);
    let n = group.table.dim();
    let layers = group.layers(cap);
    let mut dims = Vec::new();
    let mut step = None;
    for (s, (_, sum)) in layers.iter().enumerate() {
        dims.push(sum.dim());
        if sum.dim() == n {
            step = Some(s + 1);
            break;
        }
    }
    FlagReport {
        point: Vec::new(),
        dims,
        step,
    }
}

/// The kernel data of the pairing at one covector of V-perp.
#[derive(Clone, Debug)]
pub struct FrakK {
    /// {v in V : p([v, w]) = 0 for all w in V}.
    pub v_space: LinearSubspace,
    /// For each basis vector v of v_space, the covector -p([v, .]) on the
    /// full algebra.
    pub p_components: Vec<Vec<Rat>>,
}

/// Kernel of the pairing matrix p([., .]) on V at a covector p annihilating V.
pub fn frak_k_at(group: &PolarizedGroup, p: &[Rat]) -> Result<FrakK, CarnotError> {
    let n = group.table.dim();
    if p.len() != n {
        return Err(CarnotError::DimMismatch(p.len(), n));
    }
    if p.iter().all(|c| c.is_zero()) {
        return Err(CarnotError::ZeroCovector);
    }
    let m = group.v.dim();
    let pair = |u: &[Rat]| -> Rat { u.iter().zip(p).map(|(a, b)| a * b).sum() };
    for a in 0..m {
        if !pair(group.v.basis().row(a)).is_zero() {
            return Err(CarnotError::CovectorNotInVperp);
        }
    }
    // pairing matrix over the V-basis
    let mut g = QMatrix::zero(m, m);
    for a in 0..m {
        for b in 0..m {
            let br = group
                .table
                .bracket(group.v.basis().row(a), group.v.basis().row(b))
                .expect("dims");
            g.set(a, b, pair(&br));
        }
    }
    let coeffs = g.kernel_basis();
    let mut rows = Vec::new();
    let mut p_components = Vec::new();
    for k in 0..coeffs.dim() {
        let c = coeffs.basis().row(k);
        let mut v = vec![Rat::zero(); n];
        for (a, ca) in c.iter().enumerate() {
            for (t, comp) in group.v.basis().row(a).iter().enumerate() {
                v[t] += ca * comp;
            }
        }
        let mut cov = vec![Rat::zero(); n];
        for (j, slot) in cov.iter_mut().enumerate() {
            let mut e = vec![Rat::zero(); n];
            e[j] = Rat::from_integer(1.into());
            *slot = -pair(&group.table.bracket(&v, &e).expect("dims"));
        }
        rows.push(v);
        p_components.push(cov);
    }
    Ok(FrakK {
        v_space: LinearSubspace::from_rows(n, rows),
        p_components,
    })
}

const FLAG_CAP: usize = 10;

/// The subalgebra {v in V : [v, V] contained in V} of minimal-rank abnormal
/// directions; verified to be bracket-closed and a proper subspace of V.
pub fn minimal_rank_subalgebra(group: &PolarizedGroup) -> Result<LinearSubspace, CarnotError> {
    let flag = polarized_flag(group, FLAG_CAP);
    if flag.step.is_none() {
        return Err(CarnotError::NotBracketGenerating(FLAG_CAP));
    }
    let n = group.table.dim();
    let m = group.v.dim();
    // covectors annihilating V: right kernel of the m x n basis matrix
    let vperp = group.v.basis().kernel_basis();
    // rows: for each V-basis direction b and each V-perp covector k,
    // sum_a c_a <cov_k, [f_a, f_b]> = 0
    let mut rows = Vec::new();
    for b in 0..m {
        for k in 0..vperp.dim() {
            let cov = vperp.basis().row(k);
            let mut row = Vec::with_capacity(m);
            for a in 0..m {
                let br = group
                    .table
                    .bracket(group.v.basis().row(a), group.v.basis().row(b))
                    .expect("dims");
                row.push(br.iter().zip(cov).map(|(x, y)| x * y).sum());
            }
            rows.push(row);
        }
    }
    let coeffs = if rows.is_empty() {
        LinearSubspace::full(m)
    } else {
        QMatrix::from_rows(rows).kernel_basis()
    };
    let lifted: Vec<Vec<Rat>> = (0..coeffs.dim())
        .map(|k| {
            let c = coeffs.basis().row(k);
            let mut v = vec![Rat::zero(); n];
            for (a, ca) in c.iter().enumerate() {
                for (t, comp) in group.v.basis().row(a).iter().enumerate() {
                    v[t] += ca * comp;
                }
            }
            v
        })
        .collect();
    let frak_v = LinearSubspace::from_rows(n, lifted);
    // bracket closure (the Jacobi-based claim, verified exactly)
    let closed = group.table.bracket_span(&frak_v, &frak_v);
    debug_assert!(closed.is_subspace_of(&frak_v) || closed.dim() == 0);
    assert!(
        frak_v.dim() < group.v.dim() || group.v.dim() == 0,
        "minimal-rank subalgebra must be proper in a bracket-generating V"
    );
    Ok(frak_v)
}

/// Outcome of the step-2 degeneration check.
#[derive(Clone, Debug)]
pub struct Step2Report {
    pub step: usize,
    pub v2_dim: usize,
    /// Covectors of V-perp for which the kernel's p-component was verified
    /// to vanish identically.
    pub checked_covectors: usize,
    pub passed: bool,
}

/// For a step-2 group with vanishing third layer, verify that every kernel
/// direction at every covector of V-perp has identically zero p-component:
/// p([v, w]) = 0 for w in V already forces p([v, w]) = 0 for all w.
pub fn step2_check(group: &PolarizedGroup) -> Result<Step2Report, CarnotError> {
    let flag = polarized_flag(group, FLAG_CAP);
    if flag.step != Some(2) {
        return Err(CarnotError::NotStep2);
    }
    let v2 = group.table.bracket_span(&group.v, &group.v);
    let v3 = group.table.bracket_span(&group.v, &v2);
    if v3.dim() != 0 {
        return Err(CarnotError::NotStep2);
    }
    // decomposition witness: V + V^2 must already be everything
    if group.v.sum(&v2).dim() != group.table.dim() {
        return Err(CarnotError::NotStep2);
    }
    let vperp = group.v.basis().kernel_basis();
    let mut passed = true;
    let mut checked = 0;
    for k in 0..vperp.dim() {
        let p = vperp.basis().row(k).to_vec();
        if p.iter().all(|c| c.is_zero()) {
            continue;
        }
        let fk = frak_k_at(group, &p)?;
        checked += 1;
        for cov in &fk.p_components {
            if cov.iter().any(|c| !c.is_zero()) {
                passed = false;
            }
        }
    }
    Ok(Step2Report {
        step: 2,
        v2_dim: v2.dim(),
        checked_covectors: checked,
        passed,
    })
}
