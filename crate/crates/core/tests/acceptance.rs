//! Acceptance gate: one test per criterion, each printing a single
//! PASS line on success (run with --nocapture to see them).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abnormal::algebra::{rat, ratio, LinearSubspace, MultiPoly, QMatrix, Rat};
use abnormal::carnot::{frak_k_at, minimal_rank_subalgebra, step2_check, PolarizedGroup};
use abnormal::dsl::{format_model, parse_model, PointLit};
use abnormal::models;
use abnormal::report::{run, Command, Options};
use abnormal::special::{
    characteristic_field, h_on_stratum, integrate_characteristic, minimal_rank_distribution,
    BaseChart,
};
use abnormal::strata::{singular_locus_generators, triple_report, StratumChart};
use abnormal::symplectic::{
    hamiltonian_of, lie_bracket, poisson, CotangentPoint, Frame, VectorField,
};

const FRAME_MODELS: [&str; 5] = [
    "heisenberg",
    "martinet",
    "engel",
    "free_nilpotent_2_3",
    "example_r7",
];

fn frame(name: &str) -> (abnormal::dsl::ModelSpec, Frame) {
    let spec = models::load(name).unwrap();
    let frame = models::frame_of(&spec).unwrap();
    (spec, frame)
}

fn cotangent(spec: &abnormal::dsl::ModelSpec, name: &str) -> CotangentPoint {
    match spec.point(name).unwrap() {
        PointLit::Cotangent(x, p) => CotangentPoint::new(x.clone(), p.clone()),
        PointLit::Base(_) => panic!("{name} is a base point"),
    }
}

// ---------------------------------------------------------------------------
// criterion 1: golden regression on the rank-3 R^7 model

#[test]
fn criterion_1_r7_golden_regression() {
    let clock = Instant::now();
    let opts = Options::default();

    let brackets = run(&Command::Brackets, "example_r7", &opts).unwrap().text;
    for line in [
        "X12 = 0",
        "X13 = -4*x1^3*d7 - 3*x1^2*d6 - 2*x1*d5",
        "X23 = d3",
        "X131 = -12*x1^2*d7 - 6*x1*d6 - 2*d5",
        "X1311 = -24*x1*d7 - 6*d6",
        "X13111 = -24*d7",
    ] {
        assert!(brackets.lines().any(|l| l == line), "missing: {line}");
    }

    let hams = run(&Command::Hamiltonians, "example_r7", &opts)
        .unwrap()
        .text;
    for line in [
        "h1 = p1",
        "h2 = x4*p3 + p2",
        "h3 = x1^4*p7 + x1^3*p6 + x1^2*p5 + p4",
        "h12 = 0",
        "h13 = -4*x1^3*p7 - 3*x1^2*p6 - 2*x1*p5",
        "h23 = p3",
    ] {
        assert!(hams.lines().any(|l| l == line), "missing: {line}");
    }

    // singular locus: the computed minor ideal cuts out exactly
    // {p3 = 0, x1*(2 p5 + 3 x1 p6 + 4 x1^2 p7) = 0} on sampled points.
    let (spec, fr) = frame("example_r7");
    let locus = singular_locus_generators(&fr);
    assert_eq!(locus.generic_rank, 2);
    assert_eq!(locus.generic_kernel_dim, 1);
    let eqs = &spec.stratum("S3p").unwrap().eqs;
    assert_eq!(eqs.len(), 2);
    let mut pts: Vec<CotangentPoint> = fr.sample_annihilator_points(0x90_1d, 40);
    for name in ["S0", "S1", "S2", "S3p", "S4"] {
        let chart = StratumChart::from_decl(spec.stratum(name).unwrap());
        for s in &chart.samples.clone() {
            pts.push(chart.eval_point(s));
        }
    }
    for a in &pts {
        let coords = a.coords();
        let on_locus = locus
            .generators
            .iter()
            .all(|g| g.eval(&coords).unwrap() == rat(0));
        let on_eqs = eqs.iter().all(|e| e.eval(&coords).unwrap() == rat(0));
        assert_eq!(on_locus, on_eqs, "locus mismatch at {coords:?}");
    }

    // K/J/I dimensions on every declared stratum chart.
    let expect = [
        ("S1", (2, 3, 4)),
        ("S2", (2, 3, 3)),
        ("S3p", (2, 3, 3)),
        ("S4", (2, 3, 4)),
    ];
    for (name, dims) in expect {
        let chart = StratumChart::from_decl(spec.stratum(name).unwrap());
        let samples = chart.samples.clone();
        for t in triple_report(&fr, &chart, &samples).unwrap() {
            assert_eq!(t.dims(), dims, "{name} at {:?}", t.chart_point);
        }
    }
    // on the essential domain the triple collapses to a line.
    let chart = StratumChart::from_decl(spec.stratum("S0").unwrap());
    let samples = chart.samples.clone();
    for t in triple_report(&fr, &chart, &samples).unwrap() {
        assert_eq!(t.dims(), (1, 1, 1), "S0 at {:?}", t.chart_point);
    }

    let secs = clock.elapsed().as_secs_f64();
    assert!(secs < 10.0, "took {secs:.1}s");
    println!("PASS criterion 1: R^7 golden regression ({secs:.2}s)");
}

// ---------------------------------------------------------------------------
// criterion 2: bracket identities on seeded random fields

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32) -> MultiPoly {
    let terms = (0..rng.gen_range(1..=4))
        .map(|_| {
            let mut mono = vec![0u32; n];
            for _ in 0..rng.gen_range(0..=max_deg) {
                mono[rng.gen_range(0..n)] += 1;
            }
            (mono, ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
        })
        .collect();
    MultiPoly::from_terms(n, terms)
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> VectorField {
    VectorField::new((0..n).map(|_| random_poly(rng, n, 3)).collect())
}

#[test]
fn criterion_2_bracket_identities() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3ac0b1);
    for trial in 0..100 {
        let n = rng.gen_range(2..=4);
        let x = random_field(&mut rng, n);
        let y = random_field(&mut rng, n);
        let z = random_field(&mut rng, n);
        // Jacobi: [[x,y],z] + [[y,z],x] + [[z,x],y] = 0
        let mut acc = lie_bracket(&lie_bracket(&x, &y).unwrap(), &z)
            .unwrap()
            .components()
            .to_vec();
        for (t, c) in lie_bracket(&lie_bracket(&y, &z).unwrap(), &x)
            .unwrap()
            .components()
            .iter()
            .enumerate()
        {
            acc[t] = &acc[t] + c;
        }
        for (t, c) in lie_bracket(&lie_bracket(&z, &x).unwrap(), &y)
            .unwrap()
            .components()
            .iter()
            .enumerate()
        {
            acc[t] = &acc[t] + c;
        }
        assert!(
            acc.iter().all(|c| c.is_zero()),
            "Jacobi fails (trial {trial})"
        );
        // {h^X, h^Y} = h^[X,Y]
        let lhs = poisson(&hamiltonian_of(&x), &hamiltonian_of(&y)).unwrap();
        let rhs = hamiltonian_of(&lie_bracket(&x, &y).unwrap());
        assert_eq!(lhs.poly(), rhs.poly(), "Poisson mismatch (trial {trial})");
    }
    let secs = clock.elapsed().as_secs_f64();
    assert!(secs < 30.0, "took {secs:.1}s");
    println!("PASS criterion 2: 100 seeded Jacobi/Poisson identities ({secs:.2}s)");
}

// ---------------------------------------------------------------------------
// criterion 3: independent kernel oracle at sampled annihilator points

#[test]
fn criterion_3_kernel_oracle() {
    let mut total = 0;
    for name in FRAME_MODELS {
        let (_, fr) = frame(name);
        let n = fr.base_dim();
        for a in fr.sample_annihilator_points(0xacce5, 20) {
            let kernel_dim = fr.kernel_at(&a).unwrap().coefficients.dim();
            // oracle: dim of span{symplectic gradients} meet null{full gradients},
            // built from the constraint polynomials alone.
            let coords = a.coords();
            let mut sympl_rows = Vec::new();
            let mut grad_rows = Vec::new();
            for h in fr.annihilator_constraints() {
                let mut sympl = Vec::with_capacity(2 * n);
                let mut grad = Vec::with_capacity(2 * n);
                for i in 0..n {
                    sympl.push(h.poly().diff(n + i).unwrap().eval(&coords).unwrap());
                }
                for i in 0..n {
                    sympl.push(-h.poly().diff(i).unwrap().eval(&coords).unwrap());
                }
                for i in 0..2 * n {
                    grad.push(h.poly().diff(i).unwrap().eval(&coords).unwrap());
                }
                sympl_rows.push(sympl);
                grad_rows.push(grad);
            }
            let span = LinearSubspace::from_rows(2 * n, sympl_rows);
            let null = QMatrix::from_rows(grad_rows).kernel_basis();
            let oracle = span.intersect(&null).dim();
            assert_eq!(kernel_dim, oracle, "{name} at {coords:?}");
            total += 1;
        }
    }
    assert!(total >= 100);
    println!("PASS criterion 3: kernel oracle agrees at {total} points");
}

// ---------------------------------------------------------------------------
// criterion 4: parity and dimension bounds

#[test]
fn criterion_4_parity_and_bounds() {
    for name in FRAME_MODELS {
        let (_, fr) = frame(name);
        let m = fr.rank();
        for a in fr.sample_annihilator_points(0x9a21, 20) {
            let d = fr.kernel_at(&a).unwrap().coefficients.dim();
            assert_eq!(d % 2, m % 2, "{name}: kernel dim {d} vs rank {m}");
        }
    }
    // dim K <= m - 1 on singular strata, <= m - 2 on the essential domain.
    let cases = [
        ("example_r7", "S1", 3usize, 1usize),
        ("example_r7", "S2", 3, 1),
        ("example_r7", "S3p", 3, 1),
        ("example_r7", "S4", 3, 1),
        ("martinet", "Sig", 2, 1),
        ("example_r7", "S0", 3, 2),
        ("heisenberg", "S0", 2, 2),
    ];
    for (model, stratum, m, slack) in cases {
        let (spec, fr) = frame(model);
        let chart = StratumChart::from_decl(spec.stratum(stratum).unwrap());
        let samples = chart.samples.clone();
        for t in triple_report(&fr, &chart, &samples).unwrap() {
            let (k, _, _) = t.dims();
            assert!(
                k + slack <= m,
                "{model}/{stratum}: dim K = {k} exceeds {m} - {slack}"
            );
        }
    }
    println!("PASS criterion 4: kernel parity and K-dimension bounds");
}

// ---------------------------------------------------------------------------
// criterion 5: rank-2 landmark models

#[test]
fn criterion_5_rank2_landmarks() {
    // Heisenberg: empty singular locus, trivial minimal-rank distribution.
    let (_, heis) = frame("heisenberg");
    for a in heis.sample_annihilator_points(5, 25) {
        assert_eq!(heis.kernel_at(&a).unwrap().coefficients.dim(), 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let x: Vec<Rat> = (0..3).map(|_| rat(rng.gen_range(-5..=5))).collect();
        assert_eq!(minimal_rank_distribution(&heis, &x).dim(), 0);
    }

    // Martinet: singular locus is exactly the surface x1 = 0, and the
    // minimal-rank line field on it is spanned by d2.
    let (spec, mart) = frame("martinet");
    let locus = singular_locus_generators(&mart);
    assert_eq!(locus.generic_kernel_dim, 0);
    for a in mart.sample_annihilator_points(6, 40) {
        let coords = a.coords();
        let on_locus = locus
            .generators
            .iter()
            .all(|g| g.eval(&coords).unwrap() == rat(0));
        assert_eq!(on_locus, coords[0] == rat(0), "at {coords:?}");
    }
    let base = BaseChart::from_decl(spec.base_stratum("R").unwrap());
    let e2 = LinearSubspace::from_rows(3, vec![vec![rat(0), rat(1), rat(0)]]);
    for u in &base.samples.clone() {
        assert_eq!(h_on_stratum(&mart, &base, u).unwrap(), e2);
    }
    println!("PASS criterion 5: Heisenberg and Martinet landmarks");
}

// ---------------------------------------------------------------------------
// criterion 6: polarized groups

#[test]
fn criterion_6_polarized_groups() {
    let heis =
        PolarizedGroup::from_decl(models::load("heisenberg").unwrap().liealg.as_ref().unwrap())
            .unwrap();
    assert_eq!(minimal_rank_subalgebra(&heis).unwrap().dim(), 0);
    assert!(step2_check(&heis).unwrap().passed);

    let free = PolarizedGroup::from_decl(
        models::load("carnot_step2")
            .unwrap()
            .liealg
            .as_ref()
            .unwrap(),
    )
    .unwrap();
    let report = step2_check(&free).unwrap();
    assert_eq!(report.step, 2);
    assert!(report.passed);
    assert!(report.checked_covectors >= 3);

    // kernel data is invariant under rescaling the covector.
    let p = vec![rat(0), rat(0), rat(0), rat(1), rat(2), rat(-1)];
    let base = frak_k_at(&free, &p).unwrap();
    for lam in [rat(2), rat(-1), ratio(1, 3)] {
        let scaled: Vec<Rat> = p.iter().map(|c| c * &lam).collect();
        let k = frak_k_at(&free, &scaled).unwrap();
        assert_eq!(k.v_space, base.v_space);
    }
    println!("PASS criterion 6: polarized-group computations");
}

// ---------------------------------------------------------------------------
// criterion 7: integration sanity

#[test]
fn criterion_7_integration_sanity() {
    let clock = Instant::now();
    let (spec, fr) = frame("example_r7");
    let start = cotangent(&spec, "a0");
    let fields = characteristic_field(&fr);
    assert_eq!(fields.len(), 1);
    let field = &fields[0];

    let traj = integrate_characteristic(&fr, field, &start, 1.0, 1e-3, 1e-9).unwrap();
    assert!(!traj.halted_near_sigma);
    assert_eq!(traj.states.len(), 1001);
    assert!(traj.max_drift() < 1e-8, "drift {}", traj.max_drift());

    // halving the step moves the endpoint by less than 1e-6.
    let fine = integrate_characteristic(&fr, field, &start, 1.0, 5e-4, 1e-9).unwrap();
    let diff = traj
        .last_state()
        .iter()
        .zip(fine.last_state())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(diff < 1e-6, "endpoint difference {diff}");

    let secs = clock.elapsed().as_secs_f64();
    assert!(secs < 5.0, "took {secs:.1}s");
    println!(
        "PASS criterion 7: drift {:.2e}, endpoint stability {diff:.2e} ({secs:.2}s)",
        traj.max_drift()
    );
}

// ---------------------------------------------------------------------------
// criterion 8: parser roundtrip and diagnostics

fn random_model_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=4);
    let mut text = format!("chart {n}\n");
    for k in 0..rng.gen_range(1..=3) {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut factors = vec![format!(
                "{}/{}",
                rng.gen_range(-5..=5),
                rng.gen_range(1..=4)
            )];
            for _ in 0..rng.gen_range(0..=2) {
                factors.push(format!("x{}", rng.gen_range(1..=n)));
            }
            factors.push(format!("d{}", rng.gen_range(1..=n)));
            terms.push(factors.join("*"));
        }
        text.push_str(&format!("field F{} = {}\n", k + 1, terms.join(" + ")));
    }
    for k in 0..rng.gen_range(0..=2) {
        let coords: Vec<String> = (0..n).map(|_| rng.gen_range(-3..=3).to_string()).collect();
        text.push_str(&format!("point q{} = {}\n", k + 1, coords.join(" ")));
    }
    text
}

#[test]
fn criterion_8_parser_roundtrip_and_spans() {
    // every bundled model roundtrips through the canonical printer.
    for (name, text) in abnormal::models::BUNDLED {
        let spec = parse_model(text).unwrap_or_else(|d| panic!("{name}: {d}"));
        let printed = format_model(&spec);
        let reparsed = parse_model(&printed).unwrap();
        assert_eq!(reparsed, spec, "{name} roundtrip");
        assert_eq!(format_model(&reparsed), printed, "{name} canonical form");
    }
    // and so do 100 generated models.
    let mut rng = ChaCha8Rng::seed_from_u64(0xd51);
    for _ in 0..100 {
        let text = random_model_text(&mut rng);
        let spec = parse_model(&text).unwrap_or_else(|d| panic!("{d}\n{text}"));
        let printed = format_model(&spec);
        assert_eq!(parse_model(&printed).unwrap(), spec);
    }
    // malformed inputs report the offending line and column.
    let malformed: [(&str, usize, usize); 12] = [
        ("chart 3\nfield X = x1*d9\n", 2, 13),
        ("chart 3\nfield X = x1 + d1\n", 2, 9),
        ("chart three\n", 1, 6),
        ("chart 3\nfield X = 0.5*d1\n", 2, 10),
        ("chart 3\npoint a = 1 2\n", 2, 9),
        (
            "chart 3\nfield X = d1\nstratum S dim 2\nmap q1 = u1\nend\n",
            4,
            4,
        ),
        ("chart 3\nfield X = d1*d2\n", 2, 9),
        ("chart 3\nfield X = (d1\n", 2, 13),
        ("liealg 3\nc 1 2 9 = 1\nv 1\nend\n", 2, 6),
        ("chart 3\nfield X = d1\nfield X = d2\n", 3, 6),
        ("chart 3\nfield X = x4*d1\n", 2, 10),
        ("chart 3\nstratum S dim 0\nend\n", 2, 0),
    ];
    for (text, line, column) in malformed {
        let diag = parse_model(text).expect_err("should be rejected");
        assert_eq!(
            (diag.span.line, diag.span.column),
            (line, column),
            "span for {text:?}: {}",
            diag.message
        );
    }
    println!("PASS criterion 8: parser roundtrip (6 bundled + 100 generated) and spans");
}
