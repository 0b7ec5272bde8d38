//! Lie brackets, Hamiltonian lifts, Poisson brackets, annihilator
//! constraints and the second-order bracket matrix with its pointwise
//! kernels.
//!
//! Coordinates on the cotangent chart are ordered (x1..xn, p1..pn); a
//! polynomial on the base is embedded as a polynomial in the first n
//! variables.

use num::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{LinearSubspace, MultiPoly, PolyMatrix, QMatrix, Rat};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("chart dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("frame must have rank m < n (got m = {m}, n = {n})")]
    FrameRank { m: usize, n: usize },
    #[error("no point found where the frame fields are linearly independent")]
    FrameDegenerate,
    #[error("point is not on the annihilator: constraint h{0} does not vanish")]
    NotOnAnnihilator(usize),
    #[error("the annihilator excludes p = 0")]
    ZeroCovector,
    #[error("{0}")]
    Invalid(String),
}

/// A polynomial vector field on an n-dimensional chart.
#[derive(Clone, PartialEq, Debug)]
pub struct VectorField {
    chart_dim: usize,
    components: Vec<MultiPoly>,
}

impl VectorField {
    /// Components are polynomials in the chart variables x1..xn.
    pub fn new(components: Vec<MultiPoly>) -> Self {
        let n = components.len();
        for c in &components {
            assert_eq!(c.num_vars(), n, "component variable count");
        }
        VectorField {
            chart_dim: n,
            components,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![MultiPoly::zero(n); n])
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &[Rat]) -> Vec<Rat> {
        self.components
            .iter()
            .map(|c| c.eval(x).expect("point arity"))
            .collect()
    }
}

/// A polynomial Hamiltonian on the cotangent chart (2n variables).
#[derive(Clone, PartialEq, Debug)]
pub struct Hamiltonian {
    base_dim: usize,
    poly: MultiPoly,
}

impl Hamiltonian {
    pub fn new(base_dim: usize, poly: MultiPoly) -> Self {
        assert_eq!(poly.num_vars(), 2 * base_dim);
        Hamiltonian { base_dim, poly }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn eval(&self, a: &CotangentPoint) -> Rat {
        self.poly.eval(&a.coords()).expect("point arity")
    }
}

/// A Hamiltonian vector field on the cotangent chart: 2n components,
/// equal to (dh/dp, -dh/dx) of its generating Hamiltonian.
#[derive(Clone, PartialEq, Debug)]
pub struct HamiltonianField {
    base_dim: usize,
    components: Vec<MultiPoly>,
}

impl HamiltonianField {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn eval(&self, a: &CotangentPoint) -> Vec<Rat> {
        let coords = a.coords();
        self.components
            .iter()
            .map(|c| c.eval(&coords).expect("point arity"))
            .collect()
    }
}

/// A rational point (x, p) of the cotangent chart.
#[derive(Clone, PartialEq, Debug)]
pub struct CotangentPoint {
    x: Vec<Rat>,
    p: Vec<Rat>,
}

impl CotangentPoint {
    pub fn new(x: Vec<Rat>, p: Vec<Rat>) -> Self {
        assert_eq!(x.len(), p.len());
        CotangentPoint { x, p }
    }

    pub fn base_dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[Rat] {
        &self.x
    }

    pub fn p(&self) -> &[Rat] {
        &self.p
    }

    pub fn coords(&self) -> Vec<Rat> {
        let mut v = self.x.clone();
        v.extend(self.p.iter().cloned());
        v
    }

    pub fn p_is_zero(&self) -> bool {
        self.p.iter().all(|c| c.is_zero())
    }

    /// Fiber rescaling (x, p) -> (x, lambda p).
    pub fn dilate(&self, lambda: &Rat) -> Self {
        CotangentPoint {
            x: self.x.clone(),
            p: self.p.iter().map(|c| c * lambda).collect(),
        }
    }
}

/// Lie bracket of two polynomial vector fields, with coefficients
/// c_i = sum_j (d_j a_i) b_j - (d_j b_i) a_j.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, GeometryError> {
    let n = x.chart_dim;
    if n != y.chart_dim {
        return Err(GeometryError::DimMismatch(n, y.chart_dim));
    }
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = MultiPoly::zero(n);
        for j in 0..n {
            let da = x.components[i].diff(j).expect("index in range");
            let db = y.components[i].diff(j).expect("index in range");
            c = &c + &(&da * &y.components[j]);
            c = &c - &(&db * &x.components[j]);
        }
        comps.push(c);
    }
    Ok(VectorField::new(comps))
}

/// The Hamiltonian h^X(x, p) = p . X(x), linear in p.
pub fn hamiltonian_of(x: &VectorField) -> Hamiltonian {
    let n = x.chart_dim;
    let mut poly = MultiPoly::zero(2 * n);
    for i in 0..n {
        let xi = x.components[i].extend_vars(2 * n);
        poly = &poly + &(&xi * &MultiPoly::var(2 * n, n + i));
    }
    Hamiltonian::new(n, poly)
}

/// The Hamiltonian vector field (dh/dp, -dh/dx).
pub fn hamiltonian_field(h: &Hamiltonian) -> HamiltonianField {
    let n = h.base_dim;
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(h.poly.diff(n + i).expect("index in range"));
    }
    for i in 0..n {
        comps.push(-&h.poly.diff(i).expect("index in range"));
    }
    HamiltonianField {
        base_dim: n,
        components: comps,
    }
}

/// Poisson bracket, with the sign fixed so that {h^X, h^Y} = h^[X,Y] for
/// the bracket convention above.
pub fn poisson(h: &Hamiltonian, g: &Hamiltonian) -> Result<Hamiltonian, GeometryError> {
    let n = h.base_dim;
    if n != g.base_dim {
        return Err(GeometryError::DimMismatch(n, g.base_dim));
    }
    let mut out = MultiPoly::zero(2 * n);
    for i in 0..n {
        let hx = h.poly.diff(i).expect("index");
        let hp = h.poly.diff(n + i).expect("index");
        let gx = g.poly.diff(i).expect("index");
        let gp = g.poly.diff(n + i).expect("index");
        out = &out + &(&hx * &gp);
        out = &out - &(&hp * &gx);
    }
    Ok(Hamiltonian::new(n, out))
}

/// Kernel data of the bracket matrix at a point of the annihilator.
#[derive(Clone, Debug)]
pub struct KernelAtPoint {
    /// Coefficient vectors u in Q^m with L2(a) u = 0, canonical basis.
    pub coefficients: LinearSubspace,
    /// The lifted tangent vectors sum_i u_i hvec^i(a) in Q^(2n).
    pub lifted: LinearSubspace,
}

/// An ordered frame of m < n polynomial vector fields spanning the
/// distribution, with its bracket table computed eagerly.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    m: usize,
    fields: Vec<VectorField>,
    hamiltonians: Vec<Hamiltonian>,
    ham_fields: Vec<HamiltonianField>,
    bracket_table: Vec<Vec<Hamiltonian>>,
}

impl Frame {
    pub fn new(fields: Vec<VectorField>) -> Result<Self, GeometryError> {
        let m = fields.len();
        let n = fields
            .first()
            .map(|f| f.chart_dim)
            .ok_or_else(|| GeometryError::Invalid("empty frame".into()))?;
        for f in &fields {
            if f.chart_dim != n {
                return Err(GeometryError::DimMismatch(n, f.chart_dim));
            }
        }
        if m >= n {
            return Err(GeometryError::FrameRank { m, n });
        }
        let hamiltonians: Vec<Hamiltonian> = fields.iter().map(hamiltonian_of).collect();
        let ham_fields: Vec<HamiltonianField> =
            hamiltonians.iter().map(hamiltonian_field).collect();
        let mut bracket_table = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                row.push(poisson(&hamiltonians[i], &hamiltonians[j])?);
            }
            bracket_table.push(row);
        }
        let frame = Frame {
            n,
            m,
            fields,
            hamiltonians,
            ham_fields,
            bracket_table,
        };
        frame.check_independence()?;
        Ok(frame)
    }

    /// Accept the frame if the fields are independent at some deterministic
    /// pseudo-random rational point.
    fn check_independence(&self) -> Result<(), GeometryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for attempt in 0..64 {
            let x: Vec<Rat> = if attempt == 0 {
                vec![Rat::zero(); self.n]
            } else {
                (0..self.n)
                    .map(|_| {
                        Rat::new(
                            rng.gen_range(-9i64..=9).into(),
                            rng.gen_range(1i64..=4).into(),
                        )
                    })
                    .collect()
            };
            let m = QMatrix::from_rows(self.fields.iter().map(|f| f.eval(&x)).collect());
            if m.rank() == self.m {
                return Ok(());
            }
        }
        Err(GeometryError::FrameDegenerate)
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    /// The annihilator constraints h^1..h^m; a cotangent point lies on the
    /// annihilator iff all vanish and p != 0.
    pub fn annihilator_constraints(&self) -> &[Hamiltonian] {
        &self.hamiltonians
    }

    pub fn hamiltonian_fields(&self) -> &[HamiltonianField] {
        &self.ham_fields
    }

    /// The Poisson bracket h^{ij} = {h^i, h^j}.
    pub fn bracket_hamiltonian(&self, i: usize, j: usize) -> &Hamiltonian {
        &self.bracket_table[i][j]
    }

    /// The skew-symmetric symbolic matrix with (i, j) entry h^{ij}.
    pub fn l2_matrix(&self) -> PolyMatrix {
        PolyMatrix::from_rows(
            2 * self.n,
            (0..self.m)
                .map(|i| {
                    (0..self.m)
                        .map(|j| self.bracket_table[i][j].poly().clone())
                        .collect()
                })
                .collect(),
        )
    }

    /// Check annihilator membership: every h^i vanishes and p != 0.
    pub fn validate_on_annihilator(&self, a: &CotangentPoint) -> Result<(), GeometryError> {
        if a.base_dim() != self.n {
            return Err(GeometryError::DimMismatch(self.n, a.base_dim()));
        }
        if a.p_is_zero() {
            return Err(GeometryError::ZeroCovector);
        }
        for (i, h) in self.hamiltonians.iter().enumerate() {
            if !h.eval(a).is_zero() {
                return Err(GeometryError::NotOnAnnihilator(i + 1));
            }
        }
        Ok(())
    }

    /// Pointwise kernel of the bracket matrix at a point of the annihilator.
    pub fn kernel_at(&self, a: &CotangentPoint) -> Result<KernelAtPoint, GeometryError> {
        self.validate_on_annihilator(a)?;
        let l2 = self.l2_matrix().eval(&a.coords());
        let coefficients = l2.kernel_basis();
        let lifted_rows: Vec<Vec<Rat>> = (0..coefficients.dim())
            .map(|k| {
                let u = coefficients.basis().row(k);
                let mut v = vec![Rat::zero(); 2 * self.n];
                for (i, ui) in u.iter().enumerate() {
                    for (c, comp) in self.ham_fields[i].eval(a).iter().enumerate() {
                        v[c] += ui * comp;
                    }
                }
                v
            })
            .collect();
        Ok(KernelAtPoint {
            lifted: LinearSubspace::from_rows(2 * self.n, lifted_rows),
            coefficients,
        })
    }

    /// Deterministic pseudo-random points of the annihilator: a random base
    /// point with a random nonzero covector from the fiber's null space.
    pub fn sample_annihilator_points(&self, seed: u64, count: usize) -> Vec<CotangentPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut guard = 0;
        while out.len() < count && guard < 100 * count + 100 {
            guard += 1;
            let x: Vec<Rat> = (0..self.n)
                .map(|_| {
                    Rat::new(
                        rng.gen_range(-6i64..=6).into(),
                        rng.gen_range(1i64..=3).into(),
                    )
                })
                .collect();
            let a = QMatrix::from_rows(self.fields.iter().map(|f| f.eval(&x)).collect());
            let fiber = a.kernel_basis();
            if fiber.dim() == 0 {
                continue;
            }
            let mut p = vec![Rat::zero(); self.n];
            for k in 0..fiber.dim() {
                let w = Rat::new(rng.gen_range(-5i64..=5).into(), 1.into());
                for (c, slot) in p.iter_mut().enumerate() {
                    *slot += &w * fiber.basis().get(k, c);
                }
            }
            if p.iter().all(|c| c.is_zero()) {
                continue;
            }
            let pt = CotangentPoint::new(x, p);
            debug_assert!(self.validate_on_annihilator(&pt).is_ok());
            out.push(pt);
        }
        out
    }
}

/// Names x1..xn, p1..pn for rendering cotangent-chart polynomials.
pub fn cotangent_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("p{i}")));
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratio;

    fn heisenberg() -> Frame {
        let n = 3;
        let x1 = MultiPoly::var(n, 0);
        let zero = MultiPoly::zero(n);
        let one = MultiPoly::one(n);
        let f1 = VectorField::new(vec![one.clone(), zero.clone(), zero.clone()]);
        let f2 = VectorField::new(vec![zero.clone(), one, x1]);
        Frame::new(vec![f1, f2]).unwrap()
    }

    #[test]
    fn bracket_sign_convention() {
        // [d1, x1 d2] = -d2 under the Y o X - X o Y convention
        let n = 2;
        let a = VectorField::new(vec![MultiPoly::one(n), MultiPoly::zero(n)]);
        let b = VectorField::new(vec![MultiPoly::zero(n), MultiPoly::var(n, 0)]);
        let br = lie_bracket(&a, &b).unwrap();
        assert_eq!(br.components()[0], MultiPoly::zero(n));
        assert_eq!(br.components()[1], -&MultiPoly::one(n));
    }

    #[test]
    fn bracket_antisymmetry_on_self() {
        let f = VectorField::new(vec![MultiPoly::var(2, 0).pow(2), MultiPoly::var(2, 1)]);
        assert!(lie_bracket(&f, &f).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_constraints() {
        let f = heisenberg();
        let names = cotangent_names(3);
        let hs: Vec<String> = f
            .annihilator_constraints()
            .iter()
            .map(|h| h.poly().render(&names))
            .collect();
        assert_eq!(hs, vec!["p1", "x1*p3 + p2"]);
    }

    #[test]
    fn heisenberg_l2_matrix() {
        let f = heisenberg();
        let names = cotangent_names(3);
        // [X1, X2] = d3 under this convention? No: [X1,X2]_i = (d_j a_i) b_j - (d_j b_i) a_j
        // with a = X1 = d1, b = X2: c_3 = -(d_1 x1) * 1 = -1, so h^{12} = -p3.
        assert_eq!(f.bracket_hamiltonian(0, 1).poly().render(&names), "-p3");
        assert_eq!(f.bracket_hamiltonian(1, 0).poly().render(&names), "p3");
        assert!(f.bracket_hamiltonian(0, 0).is_zero());
    }

    #[test]
    fn heisenberg_kernel_trivial_on_annihilator() {
        let f = heisenberg();
        let a = CotangentPoint::new(vec![rat(0); 3], vec![rat(0), rat(0), rat(1)]);
        let k = f.kernel_at(&a).unwrap();
        assert_eq!(k.coefficients.dim(), 0);
    }

    #[test]
    fn commuting_frame_full_kernel() {
        // integrable rank-2 frame in R^3: L2 vanishes identically
        let zero = MultiPoly::zero(3);
        let one = MultiPoly::one(3);
        let f = Frame::new(vec![
            VectorField::new(vec![one.clone(), zero.clone(), zero.clone()]),
            VectorField::new(vec![zero.clone(), one, zero.clone()]),
        ])
        .unwrap();
        let a = CotangentPoint::new(vec![rat(0); 3], vec![rat(0), rat(0), ratio(1, 2)]);
        let k = f.kernel_at(&a).unwrap();
        assert_eq!(k.coefficients.dim(), 2);
    }

    #[test]
    fn rejects_p_zero() {
        let f = heisenberg();
        let a = CotangentPoint::new(vec![rat(0); 3], vec![rat(0); 3]);
        assert!(matches!(f.kernel_at(&a), Err(GeometryError::ZeroCovector)));
    }

    use crate::algebra::rat;
}
