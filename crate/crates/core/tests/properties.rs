//! Property suites: ring axioms, bracket identities, subspace lattice laws,
//! recombination and dilation invariance, parser roundtrip.

use proptest::prelude::*;

use abnormal::algebra::{rat, ratio, LinearSubspace, MultiPoly, QMatrix, Rat, RatFunc};
use abnormal::dsl::{format_model, parse_model};
use abnormal::nonholonomy::bracket_flag;
use abnormal::special::minimal_rank_distribution;
use abnormal::strata::{classify_point_with, singular_locus_generators};
use abnormal::symplectic::{
    hamiltonian_of, lie_bracket, poisson, CotangentPoint, Frame, VectorField,
};

const NUM_VARS: usize = 3;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn arb_monomial() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0u32..=2, NUM_VARS)
}

fn arb_poly() -> impl Strategy<Value = MultiPoly> {
    proptest::collection::vec((arb_monomial(), arb_rat()), 0..5)
        .prop_map(|terms| MultiPoly::from_terms(NUM_VARS, terms))
}

fn arb_point() -> impl Strategy<Value = Vec<Rat>> {
    proptest::collection::vec(arb_rat(), NUM_VARS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_commutative_and_associative(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn multiplication_distributes(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn diff_satisfies_leibniz(a in arb_poly(), b in arb_poly(), v in 0usize..NUM_VARS) {
        let lhs = (&a * &b).diff(v).unwrap();
        let rhs = &(&a.diff(v).unwrap() * &b) + &(&a * &b.diff(v).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_is_a_ring_homomorphism(a in arb_poly(), b in arb_poly(), pt in arb_point()) {
        prop_assert_eq!((&a * &b).eval(&pt).unwrap(), a.eval(&pt).unwrap() * b.eval(&pt).unwrap());
        prop_assert_eq!((&a + &b).eval(&pt).unwrap(), a.eval(&pt).unwrap() + b.eval(&pt).unwrap());
    }

    #[test]
    fn ratfunc_field_laws(a in arb_poly(), b in arb_poly()) {
        let f = RatFunc::from_poly(a);
        let g = RatFunc::from_poly(b);
        prop_assert_eq!(&(&f + &g) - &g, f.clone());
        if !g.is_zero() {
            let q = &f / &g;
            prop_assert_eq!(&q * &g, f);
        }
    }

    #[test]
    fn bareiss_rank_matches_rref_pivots(
        rows in proptest::collection::vec(proptest::collection::vec(arb_rat(), 4), 1..5)
    ) {
        let m = QMatrix::from_rows(rows);
        let (_, pivots) = m.rref();
        prop_assert_eq!(m.rank(), pivots.len());
    }

    #[test]
    fn subspace_dimension_formula(
        a_rows in proptest::collection::vec(proptest::collection::vec(arb_rat(), 4), 0..4),
        b_rows in proptest::collection::vec(proptest::collection::vec(arb_rat(), 4), 0..4),
    ) {
        let a = LinearSubspace::from_rows(4, a_rows);
        let b = LinearSubspace::from_rows(4, b_rows);
        let sum = a.sum(&b);
        let cap = a.intersect(&b);
        prop_assert!(cap.is_subspace_of(&a));
        prop_assert!(cap.is_subspace_of(&b));
        prop_assert!(a.is_subspace_of(&sum));
        prop_assert!(b.is_subspace_of(&sum));
        prop_assert_eq!(a.dim() + b.dim(), sum.dim() + cap.dim());
    }
}

// ---------------------------------------------------------------------------
// vector fields and brackets

fn arb_field() -> impl Strategy<Value = VectorField> {
    proptest::collection::vec(arb_poly(), NUM_VARS).prop_map(VectorField::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lie_bracket_is_antisymmetric(x in arb_field(), y in arb_field()) {
        let xy = lie_bracket(&x, &y).unwrap();
        let yx = lie_bracket(&y, &x).unwrap();
        for (a, b) in xy.components().iter().zip(yx.components()) {
            prop_assert_eq!(a, &-b);
        }
    }

    #[test]
    fn lie_bracket_satisfies_jacobi(x in arb_field(), y in arb_field(), z in arb_field()) {
        let mut acc = lie_bracket(&lie_bracket(&x, &y).unwrap(), &z).unwrap().components().to_vec();
        for (t, c) in lie_bracket(&lie_bracket(&y, &z).unwrap(), &x).unwrap().components().iter().enumerate() {
            acc[t] = &acc[t] + c;
        }
        for (t, c) in lie_bracket(&lie_bracket(&z, &x).unwrap(), &y).unwrap().components().iter().enumerate() {
            acc[t] = &acc[t] + c;
        }
        for c in acc {
            prop_assert!(c.is_zero());
        }
    }

    #[test]
    fn poisson_realizes_the_bracket(x in arb_field(), y in arb_field()) {
        let lhs = poisson(&hamiltonian_of(&x), &hamiltonian_of(&y)).unwrap();
        let rhs = hamiltonian_of(&lie_bracket(&x, &y).unwrap());
        prop_assert_eq!(lhs.poly(), rhs.poly());
    }
}

// ---------------------------------------------------------------------------
// invariance suites on a fixed frame

fn r7_frame() -> Frame {
    let spec = abnormal::models::load("example_r7").unwrap();
    abnormal::models::frame_of(&spec).unwrap()
}

fn recombine(frame: &Frame, g: &[Vec<Rat>]) -> Option<Frame> {
    let m = frame.rank();
    let n = frame.base_dim();
    let mut fields = Vec::with_capacity(m);
    for row in g {
        let mut comps = vec![MultiPoly::zero(n); n];
        for (j, coeff) in row.iter().enumerate() {
            for (c, comp) in frame.fields()[j].components().iter().enumerate() {
                comps[c] = &comps[c] + &comp.scale(coeff);
            }
        }
        fields.push(VectorField::new(comps));
    }
    Frame::new(fields).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn frame_recombination_invariance(
        entries in proptest::collection::vec(-3i64..=3, 9),
        xi in proptest::collection::vec(-2i64..=2, 7),
    ) {
        let g: Vec<Vec<Rat>> = entries.chunks(3).map(|r| r.iter().map(|&v| rat(v)).collect()).collect();
        let gm = QMatrix::from_rows(g.clone());
        prop_assume!(gm.rank() == 3);
        let frame = r7_frame();
        let other = recombine(&frame, &g).unwrap();
        // bracket flag dims agree at a random base point
        let x: Vec<Rat> = xi.iter().map(|&v| rat(v)).collect();
        let fa = bracket_flag(&frame, &x, 8);
        let fb = bracket_flag(&other, &x, 8);
        prop_assert_eq!(fa.step, fb.step);
        // minimal-rank distribution is the same subspace
        prop_assert_eq!(
            minimal_rank_distribution(&frame, &x),
            minimal_rank_distribution(&other, &x)
        );
        // pointwise kernels have the same dimension and lift
        for a in frame.sample_annihilator_points(7, 3) {
            let ka = frame.kernel_at(&a).unwrap();
            let kb = other.kernel_at(&a).unwrap();
            prop_assert_eq!(ka.lifted, kb.lifted);
        }
    }

    #[test]
    fn classification_dilation_invariance(num in -9i64..=9, den in 1i64..=9) {
        prop_assume!(num != 0);
        let lam = ratio(num, den);
        let frame = r7_frame();
        let generic = singular_locus_generators(&frame).generic_kernel_dim;
        for a in frame.sample_annihilator_points(11, 5) {
            let base = classify_point_with(&frame, &a, generic).unwrap();
            let scaled = classify_point_with(&frame, &a.dilate(&lam), generic).unwrap();
            prop_assert_eq!(base.region, scaled.region);
            prop_assert_eq!(base.kernel_dim, scaled.kernel_dim);
        }
    }
}

// ---------------------------------------------------------------------------
// parser roundtrip on generated models

fn arb_model_text() -> impl Strategy<Value = String> {
    let n = 3usize;
    let field = proptest::collection::vec((arb_monomial(), arb_rat(), 0usize..n), 1..4);
    let fields = proptest::collection::vec(field, 1..3);
    let point = proptest::collection::vec(arb_rat(), n);
    let points = proptest::collection::vec(point, 0..3);
    (fields, points).prop_map(move |(fields, points)| {
        let mut text = format!("chart {n}\n");
        for (k, terms) in fields.iter().enumerate() {
            let mut expr_terms = Vec::new();
            for (mono, coeff, slot) in terms {
                let mut factors = vec![format!("{}/{}", coeff.numer(), coeff.denom())];
                for (v, &e) in mono.iter().enumerate() {
                    for _ in 0..e {
                        factors.push(format!("x{}", v + 1));
                    }
                }
                factors.push(format!("d{}", slot + 1));
                expr_terms.push(factors.join("*"));
            }
            text.push_str(&format!("field F{} = {}\n", k + 1, expr_terms.join(" + ")));
        }
        for (k, coords) in points.iter().enumerate() {
            let cs: Vec<String> = coords
                .iter()
                .map(|c| format!("{}/{}", c.numer(), c.denom()))
                .collect();
            text.push_str(&format!("point q{} = {}\n", k + 1, cs.join(" ")));
        }
        text
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_format_roundtrip(text in arb_model_text()) {
        let spec = parse_model(&text).unwrap();
        let printed = format_model(&spec);
        let reparsed = parse_model(&printed).unwrap();
        prop_assert_eq!(&reparsed, &spec);
        // the canonical form is a fixed point
        prop_assert_eq!(format_model(&reparsed), printed);
    }
}

#[test]
fn classify_rejects_off_annihilator_points() {
    let frame = r7_frame();
    let generic = singular_locus_generators(&frame).generic_kernel_dim;
    let mut p = vec![rat(0); 7];
    p[0] = rat(1); // p1 != 0 violates h1
    let a = CotangentPoint::new(vec![rat(0); 7], p);
    assert!(classify_point_with(&frame, &a, generic).is_err());
}
