//! Minimal-rank distribution on the base, characteristic fields on the
//! essential domain, and constraint-monitored numerical integration.
//!
//! Integration is the one deliberate departure from exact arithmetic; it is
//! quarantined in [`Trajectory`] and never feeds back into symbolic results.

use num::Zero;
use thiserror::Error;

use crate::algebra::{rat_to_f64, LinearSubspace, MultiPoly, QMatrix, Rat};
use crate::dsl::BaseStratumDecl;
use crate::strata::{classify_point_with, singular_locus_generators, Region, StrataError};
use crate::symplectic::{CotangentPoint, Frame, GeometryError};

#[derive(Error, Debug)]
pub enum SpecialError {
    #[error("chart rank drop at the given point")]
    ChartRankDrop,
    #[error("start point lies on the singular locus")]
    StartOnSigma,
    #[error("step size must be positive and no larger than the duration")]
    BadStep,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Strata(#[from] StrataError),
}

/// The minimal-rank distribution at a base point: directions v = sum u_i X^i(x)
/// whose coefficient vector kills the bracket matrix for every covector in
/// the annihilator fiber. Linearity of the bracket Hamiltonians in p reduces
/// the fiber quantifier to a basis of the fiber null space.
pub fn minimal_rank_distribution(frame: &Frame, x: &[Rat]) -> LinearSubspace {
    let n = frame.base_dim();
    let m = frame.rank();
    let frame_at = QMatrix::from_rows(frame.fields().iter().map(|f| f.eval(x)).collect());
    let fiber = frame_at.kernel_basis();
    let l2 = frame.l2_matrix();
    let mut stacked: Vec<Vec<Rat>> = Vec::new();
    for k in 0..fiber.dim() {
        let p = fiber.basis().row(k);
        let coords: Vec<Rat> = x.iter().chain(p.iter()).cloned().collect();
        let at = l2.eval(&coords);
        for r in 0..m {
            stacked.push(at.row(r).to_vec());
        }
    }
    let coeffs = if stacked.is_empty() {
        LinearSubspace::full(m)
    } else {
        QMatrix::from_rows(stacked).kernel_basis()
    };
    let rows: Vec<Vec<Rat>> = (0..coeffs.dim())
        .map(|k| {
            let u = coeffs.basis().row(k);
            let mut v = vec![Rat::zero(); n];
            for (i, ui) in u.iter().enumerate() {
                for (c, comp) in frame_at.row(i).iter().enumerate() {
                    v[c] += ui * comp;
                }
            }
            v
        })
        .collect();
    LinearSubspace::from_rows(n, rows)
}

/// A polynomial parametrization of a base-manifold stratum.
#[derive(Clone, Debug)]
pub struct BaseChart {
    pub name: String,
    pub domain_dim: usize,
    /// n components in the chart variables u1..ud.
    pub psi: Vec<MultiPoly>,
    pub samples: Vec<Vec<Rat>>,
}

impl BaseChart {
    pub fn from_decl(decl: &BaseStratumDecl) -> Self {
        BaseChart {
            name: decl.name.clone(),
            domain_dim: decl.domain_dim,
            psi: decl.psi.clone(),
            samples: decl.samples.clone(),
        }
    }

    pub fn eval(&self, u: &[Rat]) -> Vec<Rat> {
        self.psi
            .iter()
            .map(|c| c.eval(u).expect("chart point arity"))
            .collect()
    }

    /// Tangent image at u, as a subspace of the base tangent space.
    pub fn tangent_at(&self, u: &[Rat]) -> Result<LinearSubspace, SpecialError> {
        let d = self.domain_dim;
        let n = self.psi.len();
        let mut rows = Vec::with_capacity(d);
        for j in 0..d {
            let mut row = Vec::with_capacity(n);
            for c in &self.psi {
                row.push(c.diff(j).expect("var range").eval(u).expect("arity"));
            }
            rows.push(row);
        }
        let tangent = LinearSubspace::from_rows(n, rows);
        if tangent.dim() != d {
            return Err(SpecialError::ChartRankDrop);
        }
        Ok(tangent)
    }
}

/// The minimal-rank distribution cut down to a base-stratum chart:
/// Delta_min(psi(u)) intersected with the chart tangent at u.
pub fn h_on_stratum(
    frame: &Frame,
    chart: &BaseChart,
    u: &[Rat],
) -> Result<LinearSubspace, SpecialError> {
    let x = chart.eval(u);
    let tangent = chart.tangent_at(u)?;
    Ok(minimal_rank_distribution(frame, &x).intersect(&tangent))
}

/// A symbolic generator of the kernel of the bracket matrix over the
/// essential domain, lifted to a vector field on T*M.
#[derive(Clone, Debug)]
pub struct CharacteristicField {
    /// m coefficient polynomials u_i(x, p).
    pub coefficients: Vec<MultiPoly>,
    /// 2n lifted components sum_i u_i hvec^i, in cotangent coordinates.
    pub components: Vec<MultiPoly>,
}

impl CharacteristicField {
    pub fn eval(&self, a: &CotangentPoint) -> Vec<Rat> {
        let coords = a.coords();
        self.components
            .iter()
            .map(|c| c.eval(&coords).expect("arity"))
            .collect()
    }

    fn eval_f64(&self, coords: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(coords)).collect()
    }
}

/// Symbolic generators of ker L^2 over the essential domain, lifted through
/// the Hamiltonian fields. Empty when the generic kernel is trivial.
pub fn characteristic_field(frame: &Frame) -> Vec<CharacteristicField> {
    let n = frame.base_dim();
    let gens = crate::algebra::symbolic_kernel(&frame.l2_matrix());
    gens.into_iter()
        .map(|u| {
            let mut components = vec![MultiPoly::zero(2 * n); 2 * n];
            for (i, ui) in u.iter().enumerate() {
                if ui.is_zero() {
                    continue;
                }
                for (c, comp) in frame.hamiltonian_fields()[i]
                    .components()
                    .iter()
                    .enumerate()
                {
                    components[c] = &components[c] + &(ui * comp);
                }
            }
            CharacteristicField {
                coefficients: u,
                components,
            }
        })
        .collect()
}

/// A numerically integrated abnormal lift candidate with its constraint
/// drift record.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// 2n floating cotangent coordinates per sample.
    pub states: Vec<Vec<f64>>,
    /// |h^i| per constraint per sample.
    pub drifts: Vec<Vec<f64>>,
    pub dt: f64,
    /// Set when the singular-locus proximity guard stopped the run early.
    pub halted_near_sigma: bool,
}

impl Trajectory {
    pub fn max_drift(&self) -> f64 {
        self.drifts.iter().flatten().fold(0.0, |acc, &d| acc.max(d))
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }

    /// Line-oriented numeric text: time, coordinates, per-constraint drift.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for ((t, state), drift) in self.times.iter().zip(&self.states).zip(&self.drifts) {
            let mut cols = vec![format!("{t:.6}")];
            cols.extend(state.iter().map(|v| format!("{v:.12e}")));
            cols.extend(drift.iter().map(|v| format!("{v:.3e}")));
            out.push_str(&cols.join(" "));
            out.push('\n');
        }
        out
    }
}

pub const DEFAULT_SIGMA_EPS: f64 = 1e-9;

/// Fixed-step 4th-order integration of a characteristic field from exact
/// initial data on the essential domain. Halts early (with a flag) when the
/// largest bracket-matrix minor drops below `sigma_eps`, signalling
/// proximity to the singular locus where the field degenerates.
pub fn integrate_characteristic(
    frame: &Frame,
    field: &CharacteristicField,
    start: &CotangentPoint,
    t_end: f64,
    dt: f64,
    sigma_eps: f64,
) -> Result<Trajectory, SpecialError> {
    if dt.is_nan() || dt <= 0.0 || dt > t_end {
        return Err(SpecialError::BadStep);
    }
    frame.validate_on_annihilator(start)?;
    let locus = singular_locus_generators(frame);
    let class = classify_point_with(frame, start, locus.generic_kernel_dim)?;
    if class.region == Region::Singular {
        return Err(SpecialError::StartOnSigma);
    }

    let constraints: Vec<&MultiPoly> = frame
        .annihilator_constraints()
        .iter()
        .map(|h| h.poly())
        .collect();
    let minors = &locus.generators;
    let sigma_distance = |y: &[f64]| -> f64 {
        minors
            .iter()
            .map(|g| g.eval_f64(y).abs())
            .fold(0.0, f64::max)
    };

    let mut y: Vec<f64> = start.coords().iter().map(rat_to_f64).collect();
    let mut t = 0.0;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        drifts: Vec::new(),
        dt,
        halted_near_sigma: false,
    };
    let record = |traj: &mut Trajectory, t: f64, y: &[f64]| {
        traj.times.push(t);
        traj.states.push(y.to_vec());
        traj.drifts
            .push(constraints.iter().map(|h| h.eval_f64(y).abs()).collect());
    };
    record(&mut traj, t, &y);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        if !minors.is_empty() && sigma_distance(&y) < sigma_eps {
            traj.halted_near_sigma = true;
            break;
        }
        y = rk4_step(&y, dt, |s| field.eval_f64(s));
        t += dt;
        record(&mut traj, t, &y);
    }
    Ok(traj)
}

fn rk4_step(y: &[f64], h: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + s * bi).collect()
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, h / 2.0));
    let k3 = f(&add(y, &k2, h / 2.0));
    let k4 = f(&add(y, &k3, h));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}
