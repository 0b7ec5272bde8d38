//! Singular locus, pointwise classification, and the triple K, J, I on
//! parametrized stratum charts of the annihilator.

use num::Zero;
use thiserror::Error;

use crate::algebra::{symbolic_kernel, LinearSubspace, MultiPoly, PolyMatrix, QMatrix, Rat};
use crate::dsl::StratumDecl;
use crate::symplectic::{lie_bracket, CotangentPoint, Frame, GeometryError, VectorField};

#[derive(Error, Debug)]
pub enum StrataError {
    #[error("invalid stratum chart '{0}': {1}")]
    InvalidChart(String, String),
    #[error("chart rank drop at the given point")]
    ChartRankDrop,
    #[error("lie closure did not stabilize within depth {0}")]
    ClosureCap(usize),
    #[error("inclusion violation at a chart point: {0}")]
    InclusionViolation(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A polynomial parametrization phi: R^d -> T*M of (a piece of) a stratum
/// inside the annihilator.
#[derive(Clone, Debug)]
pub struct StratumChart {
    pub name: String,
    pub domain_dim: usize,
    /// 2n components of phi in the chart variables u1..ud.
    pub phi: Vec<MultiPoly>,
    /// Optional defining equations for cross-validation.
    pub eqs: Vec<MultiPoly>,
    /// Validation / evaluation points in the chart domain.
    pub samples: Vec<Vec<Rat>>,
}

impl StratumChart {
    pub fn from_decl(decl: &StratumDecl) -> Self {
        StratumChart {
            name: decl.name.clone(),
            domain_dim: decl.domain_dim,
            phi: decl.phi.clone(),
            eqs: decl.eqs.clone(),
            samples: decl.samples.clone(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.phi.len()
    }

    /// phi(u) as flat cotangent coordinates.
    pub fn eval(&self, u: &[Rat]) -> Vec<Rat> {
        self.phi
            .iter()
            .map(|c| c.eval(u).expect("chart point arity"))
            .collect()
    }

    pub fn eval_point(&self, u: &[Rat]) -> CotangentPoint {
        let coords = self.eval(u);
        let n = coords.len() / 2;
        CotangentPoint::new(coords[..n].to_vec(), coords[n..].to_vec())
    }

    /// The 2n x d Jacobian of phi as a symbolic matrix in the chart variables.
    pub fn jacobian(&self) -> PolyMatrix {
        let d = self.domain_dim;
        PolyMatrix::from_rows(
            d,
            self.phi
                .iter()
                .map(|c| (0..d).map(|j| c.diff(j).expect("var range")).collect())
                .collect(),
        )
    }

    /// Check the chart invariants against a frame: the constraints (and any
    /// declared equations) pull back to the zero polynomial, the Jacobian
    /// has rank d at every sample, and the covector part is nonzero there.
    pub fn validate(&self, frame: &Frame) -> Result<(), StrataError> {
        let n = frame.base_dim();
        let bad = |msg: String| StrataError::InvalidChart(self.name.clone(), msg);
        if self.phi.len() != 2 * n {
            return Err(bad(format!(
                "chart has {} components, ambient needs {}",
                self.phi.len(),
                2 * n
            )));
        }
        for (i, h) in frame.annihilator_constraints().iter().enumerate() {
            if !h.poly().substitute(&self.phi).is_zero() {
                return Err(bad(format!(
                    "constraint h^{} does not vanish on the chart",
                    i + 1
                )));
            }
        }
        for (i, eq) in self.eqs.iter().enumerate() {
            if !eq.substitute(&self.phi).is_zero() {
                return Err(bad(format!(
                    "equation {} does not vanish on the chart",
                    i + 1
                )));
            }
        }
        let jac = self.jacobian();
        for u in &self.samples {
            if jac.eval(u).rank() != self.domain_dim {
                return Err(bad(format!("Jacobian rank drop at sample {u:?}")));
            }
            let a = self.eval_point(u);
            if a.p_is_zero() {
                return Err(bad(format!("zero covector at sample {u:?}")));
            }
        }
        Ok(())
    }
}

/// Generic kernel data of the bracket matrix over the annihilator.
#[derive(Clone, Debug)]
pub struct SingularLocus {
    pub generic_rank: usize,
    pub generic_kernel_dim: usize,
    /// All r* x r* minors of the symbolic bracket matrix.
    pub generators: Vec<MultiPoly>,
    /// For each generator, whether it vanished at every sampled annihilator
    /// point (so it carries no cutting information on the annihilator).
    pub vanishes_on_annihilator: Vec<bool>,
    /// Set when the sampled ranks disagreed and extra samples were drawn.
    pub resampled: bool,
}

pub const GENERIC_RANK_SEED: u64 = 0x0a11_0b5e;

/// Generic rank of L^2 over the annihilator, certified by agreement at 20
/// deterministic pseudo-random points; minors of that size generate the
/// singular locus within the annihilator.
pub fn singular_locus_generators(frame: &Frame) -> SingularLocus {
    singular_locus_generators_seeded(frame, GENERIC_RANK_SEED)
}

/// Same as [`singular_locus_generators`] with a caller-chosen sampling seed.
pub fn singular_locus_generators_seeded(frame: &Frame, seed: u64) -> SingularLocus {
    let l2 = frame.l2_matrix();
    let mut pts = frame.sample_annihilator_points(seed, 20);
    let mut ranks: Vec<usize> = pts.iter().map(|a| l2.eval(&a.coords()).rank()).collect();
    let mut resampled = false;
    let r_star = loop {
        let max = ranks.iter().copied().max().unwrap_or(0);
        if ranks.iter().all(|&r| r == max) || resampled {
            break max;
        }
        // rank dropped at some sample: draw a fresh batch and keep the max
        resampled = true;
        let extra = frame.sample_annihilator_points(seed ^ 0xffff, 20);
        ranks.extend(extra.iter().map(|a| l2.eval(&a.coords()).rank()));
        pts.extend(extra);
    };
    let generators = l2.minors(r_star);
    let vanishes_on_annihilator = generators
        .iter()
        .map(|g| {
            pts.iter()
                .all(|a| g.eval(&a.coords()).expect("arity").is_zero())
        })
        .collect();
    SingularLocus {
        generic_rank: r_star,
        generic_kernel_dim: frame.rank() - r_star,
        generators,
        vanishes_on_annihilator,
        resampled,
    }
}

/// Which side of the singular locus a point of the annihilator sits on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Region {
    /// The open dense essential domain S0.
    Open,
    /// The singular locus Sigma, where the kernel dimension jumps.
    Singular,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub region: Region,
    pub kernel_dim: usize,
}

/// Classify a point of the annihilator by comparing its kernel dimension
/// with the generic one.
pub fn classify_point(frame: &Frame, a: &CotangentPoint) -> Result<Classification, StrataError> {
    let generic = singular_locus_generators(frame).generic_kernel_dim;
    classify_point_with(frame, a, generic)
}

/// Same as [`classify_point`] with the generic kernel dimension precomputed.
pub fn classify_point_with(
    frame: &Frame,
    a: &CotangentPoint,
    generic_kernel_dim: usize,
) -> Result<Classification, StrataError> {
    let kernel_dim = frame.kernel_at(a)?.coefficients.dim();
    let region = if kernel_dim == generic_kernel_dim {
        Region::Open
    } else {
        Region::Singular
    };
    Ok(Classification { region, kernel_dim })
}

/// A family of symbolic 1-forms on a chart domain.
#[derive(Clone, Debug)]
pub struct PfaffianSystem {
    pub domain_dim: usize,
    /// Each form is a d-vector of coefficient polynomials in u1..ud.
    pub forms: Vec<Vec<MultiPoly>>,
}

impl PfaffianSystem {
    fn as_matrix(&self) -> PolyMatrix {
        PolyMatrix::from_rows(self.domain_dim, self.forms.clone())
    }

    /// Common kernel of the forms at a chart point.
    pub fn kernel_at(&self, u: &[Rat]) -> LinearSubspace {
        if self.forms.is_empty() {
            return LinearSubspace::full(self.domain_dim);
        }
        self.as_matrix().eval(u).kernel_basis()
    }

    /// Symbolic generators of the generic common kernel.
    pub fn symbolic_kernel(&self) -> Vec<Vec<MultiPoly>> {
        symbolic_kernel(&self.as_matrix())
    }
}

/// Pull the characteristic system back through the chart: the differentials
/// of the constraints plus the annihilator forms of the lifted distribution,
/// all composed with phi and contracted with its Jacobian. The common kernel
/// at a chart point is dphi^{-1}(ker omega-perp intersect TS).
pub fn pullback_pfaffian(
    frame: &Frame,
    chart: &StratumChart,
) -> Result<PfaffianSystem, StrataError> {
    chart.validate(frame)?;
    let n = frame.base_dim();
    let d = chart.domain_dim;
    let jac = chart.jacobian();
    let mut forms = Vec::new();

    // d(h^i) pulled back: gradient of each constraint composed with phi,
    // contracted against the Jacobian columns.
    for h in frame.annihilator_constraints() {
        let grad: Vec<MultiPoly> = (0..2 * n)
            .map(|v| h.poly().diff(v).expect("var range").substitute(&chart.phi))
            .collect();
        forms.push(contract(&grad, &jac, d));
    }

    // covectors annihilating the lifted distribution: right kernel of the
    // m x 2n matrix whose rows are the Hamiltonian fields.
    let hrows: Vec<Vec<MultiPoly>> = frame
        .hamiltonian_fields()
        .iter()
        .map(|hf| hf.components().to_vec())
        .collect();
    let ann = symbolic_kernel(&PolyMatrix::from_rows(2 * n, hrows));
    for cov in ann {
        let pulled: Vec<MultiPoly> = cov.iter().map(|c| c.substitute(&chart.phi)).collect();
        forms.push(contract(&pulled, &jac, d));
    }
    Ok(PfaffianSystem {
        domain_dim: d,
        forms,
    })
}

/// Contract a 2n-covector (already composed with phi) with the Jacobian:
/// result_j = sum_v cov[v] * d(phi_v)/d(u_j).
fn contract(cov: &[MultiPoly], jac: &PolyMatrix, d: usize) -> Vec<MultiPoly> {
    (0..d)
        .map(|j| {
            let mut acc = MultiPoly::zero(d);
            for (v, c) in cov.iter().enumerate() {
                if !c.is_zero() {
                    acc = &acc + &(c * jac.get(v, j));
                }
            }
            acc
        })
        .collect()
}

/// Symbolic generators, in chart coordinates, of K restricted to the
/// stratum: solve the stacked system u in ker(L2 o phi) and
/// sum_i u_i hvec^i(phi) = dphi(w), then keep the w-parts.
pub fn k_on_stratum(frame: &Frame, chart: &StratumChart) -> Result<Vec<VectorField>, StrataError> {
    chart.validate(frame)?;
    let n = frame.base_dim();
    let m = frame.rank();
    let d = chart.domain_dim;
    let zero = MultiPoly::zero(d);
    let l2 = frame.l2_matrix();
    let jac = chart.jacobian();

    let mut rows: Vec<Vec<MultiPoly>> = Vec::with_capacity(m + 2 * n);
    for i in 0..m {
        let mut row = Vec::with_capacity(m + d);
        for j in 0..m {
            row.push(l2.get(i, j).substitute(&chart.phi));
        }
        row.extend(std::iter::repeat_n(zero.clone(), d));
        rows.push(row);
    }
    for v in 0..2 * n {
        let mut row = Vec::with_capacity(m + d);
        for hf in frame.hamiltonian_fields() {
            row.push(hf.components()[v].substitute(&chart.phi));
        }
        for j in 0..d {
            row.push(-jac.get(v, j));
        }
        rows.push(row);
    }
    let gens = symbolic_kernel(&PolyMatrix::from_rows(d, rows));
    let mut out = Vec::new();
    for g in gens {
        let w = g[m..].to_vec();
        if w.iter().all(|c| c.is_zero()) {
            continue;
        }
        out.push(VectorField::new(w));
    }
    Ok(out)
}

/// Enlarge a generator list by brackets until the span at the chart's sample
/// points stabilizes; depth capped at 10.
pub fn lie_closure(
    gens: &[VectorField],
    chart: &StratumChart,
) -> Result<Vec<VectorField>, StrataError> {
    const CAP: usize = 10;
    let mut current: Vec<VectorField> = gens.to_vec();
    for _ in 0..CAP {
        let mut added = false;
        let snapshot = current.clone();
        for a in &snapshot {
            for b in &snapshot {
                let br = lie_bracket(a, b)?;
                if br.is_zero() {
                    continue;
                }
                if chart
                    .samples
                    .iter()
                    .any(|u| !in_pointwise_span(&current, &br, u))
                {
                    current.push(br);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(current);
        }
    }
    Err(StrataError::ClosureCap(CAP))
}

fn in_pointwise_span(gens: &[VectorField], candidate: &VectorField, u: &[Rat]) -> bool {
    let mut rows: Vec<Vec<Rat>> = gens.iter().map(|g| g.eval(u)).collect();
    let base = QMatrix::from_rows(rows.clone()).rank();
    rows.push(candidate.eval(u));
    QMatrix::from_rows(rows).rank() == base
}

/// Kernel of the canonical symplectic form restricted to the chart's tangent
/// image at u, returned in ambient cotangent coordinates.
pub fn i_kernel_at(chart: &StratumChart, u: &[Rat]) -> Result<LinearSubspace, StrataError> {
    let (b, g) = restricted_form(chart, u)?;
    let kernel = g.kernel_basis();
    let ambient = chart.ambient_dim();
    let lifted: Vec<Vec<Rat>> = (0..kernel.dim())
        .map(|k| b.matvec(kernel.basis().row(k)))
        .collect();
    Ok(LinearSubspace::from_rows(ambient, lifted))
}

/// Rank data of the restricted form: rank 2l and kernel dimension d - 2l.
pub fn omega_power_rank(chart: &StratumChart, u: &[Rat]) -> Result<(usize, usize), StrataError> {
    let (_, g) = restricted_form(chart, u)?;
    let rank = g.rank();
    debug_assert_eq!(rank % 2, 0, "skew form has even rank");
    Ok((rank / 2, chart.domain_dim - rank))
}

/// The Jacobian at u and the restricted symplectic Gram matrix B^T Omega B.
fn restricted_form(chart: &StratumChart, u: &[Rat]) -> Result<(QMatrix, QMatrix), StrataError> {
    let d = chart.domain_dim;
    let n = chart.ambient_dim() / 2;
    let b = chart.jacobian().eval(u);
    if b.rank() != d {
        return Err(StrataError::ChartRankDrop);
    }
    // omega(v, w) = sum_i v_{p_i} w_{x_i} - v_{x_i} w_{p_i}
    let mut g = QMatrix::zero(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = Rat::zero();
            for i in 0..n {
                acc += b.get(n + i, r) * b.get(i, c);
                acc -= b.get(i, r) * b.get(n + i, c);
            }
            g.set(r, c, acc);
        }
    }
    Ok((b, g))
}

/// The K, J, I subspaces at one chart point, in ambient coordinates.
#[derive(Clone, Debug)]
pub struct SpaceTriple {
    pub chart_point: Vec<Rat>,
    pub ambient_point: CotangentPoint,
    pub region: Region,
    pub k: LinearSubspace,
    pub j: LinearSubspace,
    pub i: LinearSubspace,
}

impl SpaceTriple {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.k.dim(), self.j.dim(), self.i.dim())
    }
}

/// Assemble the triple at the given chart points, checking the inclusion
/// chain and, on the essential domain, the equality of all three spaces.
pub fn triple_report(
    frame: &Frame,
    chart: &StratumChart,
    pts: &[Vec<Rat>],
) -> Result<Vec<SpaceTriple>, StrataError> {
    chart.validate(frame)?;
    let generic = singular_locus_generators(frame).generic_kernel_dim;
    let k_gens = k_on_stratum(frame, chart)?;
    let j_gens = lie_closure(&k_gens, chart)?;
    let ambient = chart.ambient_dim();
    let mut out = Vec::with_capacity(pts.len());
    for u in pts {
        let b = chart.jacobian().eval(u);
        if b.rank() != chart.domain_dim {
            return Err(StrataError::ChartRankDrop);
        }
        let lift = |gens: &[VectorField]| -> LinearSubspace {
            let rows: Vec<Vec<Rat>> = gens.iter().map(|g| b.matvec(&g.eval(u))).collect();
            LinearSubspace::from_rows(ambient, rows)
        };
        let k = lift(&k_gens);
        let j = lift(&j_gens);
        let i = i_kernel_at(chart, u)?;
        if !k.is_subspace_of(&j) || !j.is_subspace_of(&i) {
            return Err(StrataError::InclusionViolation(format!(
                "dims ({}, {}, {}) at {u:?} — chart may straddle strata",
                k.dim(),
                j.dim(),
                i.dim()
            )));
        }
        let a = chart.eval_point(u);
        let class = classify_point_with(frame, &a, generic)?;
        if class.region == Region::Open && (k != j || j != i) {
            return Err(StrataError::InclusionViolation(format!(
                "triple not equal on the essential domain at {u:?}"
            )));
        }
        out.push(SpaceTriple {
            chart_point: u.clone(),
            ambient_point: a,
            region: class.region,
            k,
            j,
            i,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::dsl::parse_model;

    fn heisenberg() -> Frame {
        let spec = parse_model("chart 3\nfield X1 = d1\nfield X2 = d2 + x1*d3\n").unwrap();
        Frame::new(spec.fields.into_iter().map(|(_, f)| f).collect()).unwrap()
    }

    fn martinet() -> Frame {
        let spec = parse_model("chart 3\nfield X1 = d1\nfield X2 = d2 + x1^2*d3\n").unwrap();
        Frame::new(spec.fields.into_iter().map(|(_, f)| f).collect()).unwrap()
    }

    #[test]
    fn heisenberg_locus_is_empty() {
        let loc = singular_locus_generators(&heisenberg());
        assert_eq!(loc.generic_rank, 2);
        assert_eq!(loc.generic_kernel_dim, 0);
        // single 2x2 minor p3^2; nonzero somewhere on the annihilator
        assert_eq!(loc.generators.len(), 1);
        assert!(!loc.vanishes_on_annihilator[0]);
    }

    #[test]
    fn martinet_locus() {
        let loc = singular_locus_generators(&martinet());
        assert_eq!(loc.generic_rank, 2);
        assert_eq!(loc.generic_kernel_dim, 0);
        // det = 4 x1^2 p3^2
        assert_eq!(loc.generators.len(), 1);
        let g = &loc.generators[0];
        let mut pt = vec![rat(0); 6];
        pt[0] = rat(1); // x1 = 1
        pt[5] = rat(1); // p3 = 1
        assert_eq!(g.eval(&pt).unwrap(), rat(4));
    }

    #[test]
    fn martinet_classification() {
        let f = martinet();
        let generic = singular_locus_generators(&f).generic_kernel_dim;
        // on the surface x1 = 0: kernel jumps to dim 2
        let sing = CotangentPoint::new(vec![rat(0); 3], vec![rat(0), rat(0), rat(1)]);
        let c = classify_point_with(&f, &sing, generic).unwrap();
        assert_eq!(c.region, Region::Singular);
        assert_eq!(c.kernel_dim, 2);
        // off the surface: trivial kernel
        let open = CotangentPoint::new(vec![rat(1), rat(0), rat(0)], vec![rat(0), rat(-1), rat(1)]);
        let c = classify_point_with(&f, &open, generic).unwrap();
        assert_eq!(c.region, Region::Open);
        assert_eq!(c.kernel_dim, 0);
    }

    #[test]
    fn classification_is_dilation_invariant() {
        let f = martinet();
        let generic = singular_locus_generators(&f).generic_kernel_dim;
        let a = CotangentPoint::new(vec![rat(0); 3], vec![rat(0), rat(0), rat(1)]);
        let base = classify_point_with(&f, &a, generic).unwrap();
        for lam in [rat(2), rat(-1), crate::algebra::ratio(1, 3)] {
            let c = classify_point_with(&f, &a.dilate(&lam), generic).unwrap();
            assert_eq!(c.region, base.region);
            assert_eq!(c.kernel_dim, base.kernel_dim);
        }
    }

    /// The Martinet singular stratum: x1 = 0, p = (0, 0, p3).
    fn martinet_sigma_chart() -> StratumChart {
        let spec = parse_model(
            "chart 3\n\
             stratum Sig dim 3\n\
             map x2 = u1\n\
             map x3 = u2\n\
             map p3 = u3\n\
             sample 0 0 1\n\
             sample 1 -1 2\n\
             end\n",
        )
        .unwrap();
        StratumChart::from_decl(spec.stratum("Sig").unwrap())
    }

    #[test]
    fn martinet_triple_on_sigma() {
        let f = martinet();
        let chart = martinet_sigma_chart();
        chart.validate(&f).unwrap();
        let k = k_on_stratum(&f, &chart).unwrap();
        // K = Delta intersect TSigma = span{X2|x1=0} = d2
        let samples = chart.samples.clone();
        let triples = triple_report(&f, &chart, &samples).unwrap();
        // K = span{d2}; its closure is itself; the restricted form on
        // span{dx2, dx3, dp3} pairs dx3 with dp3, leaving kernel span{dx2}
        for t in &triples {
            assert_eq!(t.region, Region::Singular);
            assert_eq!(t.dims(), (1, 1, 1));
        }
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn pfaffian_kernel_matches_k_on_sigma() {
        let f = martinet();
        let chart = martinet_sigma_chart();
        let sys = pullback_pfaffian(&f, &chart).unwrap();
        let u = vec![rat(0), rat(0), rat(1)];
        let ker = sys.kernel_at(&u);
        assert_eq!(ker.dim(), 1);
        // direction u1 (the x2 line)
        assert!(ker.contains(&[rat(1), rat(0), rat(0)]));
    }

    #[test]
    fn fiber_chart_is_lagrangian() {
        // the fiber over x = 0 in the Heisenberg chart: l = 0, full kernel
        let spec = parse_model(
            "chart 3\n\
             stratum Fib dim 3\n\
             map p1 = u1\n\
             map p2 = u2\n\
             map p3 = u3\n\
             sample 1 0 0\n\
             end\n",
        )
        .unwrap();
        let chart = StratumChart::from_decl(spec.stratum("Fib").unwrap());
        let u = vec![rat(1), rat(0), rat(0)];
        let (l, kdim) = omega_power_rank(&chart, &u).unwrap();
        assert_eq!(l, 0);
        assert_eq!(kdim, 3);
        let i = i_kernel_at(&chart, &u).unwrap();
        assert_eq!(i.dim(), 3);
    }

    #[test]
    fn i_kernel_is_isotropic() {
        let chart = martinet_sigma_chart();
        let u = vec![rat(1), rat(-1), rat(2)];
        let i = i_kernel_at(&chart, &u).unwrap();
        let n = 3;
        for a in 0..i.dim() {
            for b in 0..i.dim() {
                let va = i.basis().row(a);
                let vb = i.basis().row(b);
                let mut omega = Rat::zero();
                for k in 0..n {
                    omega += &va[n + k] * &vb[k];
                    omega -= &va[k] * &vb[n + k];
                }
                assert!(omega.is_zero());
            }
        }
    }

    #[test]
    fn invalid_chart_rejected() {
        // chart leaving the annihilator: p2 free while x1 = 1
        let spec = parse_model(
            "chart 3\n\
             stratum Bad dim 2\n\
             map x1 = 1\n\
             map p2 = u1\n\
             map p3 = u2\n\
             sample 1 1\n\
             end\n",
        )
        .unwrap();
        let chart = StratumChart::from_decl(spec.stratum("Bad").unwrap());
        assert!(chart.validate(&martinet()).is_err());
    }
}
