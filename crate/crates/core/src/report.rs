//! Command dispatch and deterministic report rendering (text and JSON).
//!
//! Every rational in a JSON report is tagged {"exact": "a/b"}; floating
//! values (trajectories only) are tagged {"float": ...}. Dimensions and
//! other counts are plain integers.

use std::fmt::Write as _;

use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{fmt_rat, Rat};
use crate::carnot::{
    frak_k_at, minimal_rank_subalgebra, polarized_flag, step2_check, CarnotError, PolarizedGroup,
};
use crate::dsl::{render_vector_field, ModelSpec, PointLit};
use crate::models::{self, ModelError};
use crate::nonholonomy::{bracket_flag, bracket_words};
use crate::special::{
    characteristic_field, h_on_stratum, integrate_characteristic, minimal_rank_distribution,
    BaseChart, SpecialError, DEFAULT_SIGMA_EPS,
};
use crate::strata::{
    classify_point_with, singular_locus_generators_seeded, triple_report, Region, StrataError,
    StratumChart, GENERIC_RANK_SEED,
};
use crate::symplectic::{cotangent_names, CotangentPoint, Frame, GeometryError};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    BadArgs(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Carnot(#[from] CarnotError),
    #[error("cannot write '{0}': {1}")]
    Io(String, std::io::Error),
}

/// Global knobs shared by the commands.
#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    pub cap: usize,
    pub sigma_eps: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: GENERIC_RANK_SEED,
            cap: 6,
            sigma_eps: DEFAULT_SIGMA_EPS,
        }
    }
}

#[derive(Clone, Debug)]
pub enum CarnotSub {
    Flag,
    Vmin,
    Step2,
    FrakK { p: Vec<Rat> },
}

#[derive(Clone, Debug)]
pub enum Command {
    Validate,
    Brackets,
    Flag {
        point: Option<String>,
    },
    Hamiltonians,
    L2,
    Sigma,
    Classify {
        point: String,
    },
    Triple {
        stratum: Option<String>,
    },
    Hmin {
        x: Option<Vec<Rat>>,
        base_stratum: Option<String>,
    },
    Charfield,
    Integrate {
        start: String,
        t_end: f64,
        dt: f64,
        out: Option<String>,
    },
    Carnot(CarnotSub),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Brackets => "brackets",
            Command::Flag { .. } => "flag",
            Command::Hamiltonians => "hamiltonians",
            Command::L2 => "l2",
            Command::Sigma => "sigma",
            Command::Classify { .. } => "classify",
            Command::Triple { .. } => "triple",
            Command::Hmin { .. } => "hmin",
            Command::Charfield => "charfield",
            Command::Integrate { .. } => "integrate",
            Command::Carnot(_) => "carnot",
        }
    }
}

/// A finished report; render as text or schema-stable JSON.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub model: String,
    pub results: Value,
    pub warnings: Vec<String>,
    pub text: String,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "model": self.model,
            "results": self.results,
            "warnings": self.warnings,
        })
    }
}

fn exact(r: &Rat) -> Value {
    json!({ "exact": fmt_rat(r) })
}

fn exact_vec(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(exact).collect())
}

fn float(f: f64) -> Value {
    json!({ "float": f })
}

fn rat_list(v: &[Rat]) -> String {
    v.iter().map(fmt_rat).collect::<Vec<_>>().join(" ")
}

fn frame_of(spec: &ModelSpec) -> Result<Frame, CliError> {
    Ok(models::frame_of(spec)?)
}

fn cotangent_point(spec: &ModelSpec, name: &str) -> Result<CotangentPoint, CliError> {
    match spec.point(name) {
        Some(PointLit::Cotangent(x, p)) => Ok(CotangentPoint::new(x.clone(), p.clone())),
        Some(PointLit::Base(_)) => Err(CliError::BadArgs(format!(
            "point '{name}' has no covector part"
        ))),
        None => Err(CliError::BadArgs(format!("unknown point '{name}'"))),
    }
}

fn stratum_chart(spec: &ModelSpec, name: &str) -> Result<StratumChart, CliError> {
    spec.stratum(name)
        .map(StratumChart::from_decl)
        .ok_or_else(|| CliError::BadArgs(format!("unknown stratum '{name}'")))
}

fn region_label(r: Region) -> &'static str {
    match r {
        Region::Open => "S0",
        Region::Singular => "Sigma",
    }
}

/// Load a model and dispatch one command.
pub fn run(command: &Command, model: &str, opts: &Options) -> Result<Report, CliError> {
    let spec = models::load(model)?;
    let mut report = Report {
        command: command.name().to_string(),
        model: model.to_string(),
        results: Value::Null,
        warnings: Vec::new(),
        text: String::new(),
    };
    match command {
        Command::Validate => cmd_validate(&spec, &mut report)?,
        Command::Brackets => cmd_brackets(&spec, opts, &mut report)?,
        Command::Flag { point } => cmd_flag(&spec, point.as_deref(), opts, &mut report)?,
        Command::Hamiltonians => cmd_hamiltonians(&spec, &mut report)?,
        Command::L2 => cmd_l2(&spec, &mut report)?,
        Command::Sigma => cmd_sigma(&spec, opts, &mut report)?,
        Command::Classify { point } => cmd_classify(&spec, point, opts, &mut report)?,
        Command::Triple { stratum } => cmd_triple(&spec, stratum.as_deref(), &mut report)?,
        Command::Hmin { x, base_stratum } => {
            cmd_hmin(&spec, x.as_deref(), base_stratum.as_deref(), &mut report)?
        }
        Command::Charfield => cmd_charfield(&spec, &mut report)?,
        Command::Integrate {
            start,
            t_end,
            dt,
            out,
        } => cmd_integrate(&spec, start, *t_end, *dt, out.as_deref(), opts, &mut report)?,
        Command::Carnot(sub) => cmd_carnot(&spec, sub, opts, &mut report)?,
    }
    Ok(report)
}

fn cmd_validate(spec: &ModelSpec, report: &mut Report) -> Result<(), CliError> {
    if spec.fields.is_empty() && spec.liealg.is_none() {
        return Err(CliError::BadArgs(
            "model declares neither a frame nor a structure-constant table".into(),
        ));
    }
    let mut lines = Vec::new();
    let mut results = serde_json::Map::new();
    if let Some(n) = spec.chart_dim {
        lines.push(format!("chart dim: {n}"));
        results.insert("chart_dim".into(), json!(n));
    }
    if !spec.fields.is_empty() {
        let frame = frame_of(spec)?;
        let names: Vec<&str> = spec.fields.iter().map(|(n, _)| n.as_str()).collect();
        lines.push(format!(
            "frame: rank {} ({})",
            frame.rank(),
            names.join(", ")
        ));
        results.insert("frame_rank".into(), json!(frame.rank()));
        for decl in &spec.strata {
            let chart = StratumChart::from_decl(decl);
            chart.validate(&frame)?;
            lines.push(format!(
                "stratum {}: dim {}, {} samples, ok",
                decl.name,
                decl.domain_dim,
                decl.samples.len()
            ));
        }
        for decl in &spec.base_strata {
            let chart = BaseChart::from_decl(decl);
            for u in &chart.samples {
                chart.tangent_at(u)?;
            }
            lines.push(format!(
                "base stratum {}: dim {}, {} samples, ok",
                decl.name,
                decl.domain_dim,
                decl.samples.len()
            ));
        }
        results.insert("strata".into(), json!(spec.strata.len()));
        results.insert("base_strata".into(), json!(spec.base_strata.len()));
        results.insert("points".into(), json!(spec.points.len()));
    }
    if let Some(decl) = &spec.liealg {
        let group = PolarizedGroup::from_decl(decl)?;
        lines.push(format!(
            "lie algebra: dim {}, polarization dim {}, ok",
            group.table.dim(),
            group.v.dim()
        ));
        results.insert("liealg_dim".into(), json!(group.table.dim()));
    }
    lines.push("ok".into());
    report.results = Value::Object(results);
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_brackets(spec: &ModelSpec, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let m = frame.rank();
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    // all first-level pairs, including vanishing ones
    for i in 0..m {
        for j in i + 1..m {
            let br = crate::symplectic::lie_bracket(&frame.fields()[i], &frame.fields()[j])?;
            let rendered = render_vector_field(&br);
            lines.push(format!("X{}{} = {}", i + 1, j + 1, rendered));
            rows.push(json!({"word": format!("{}{}", i + 1, j + 1), "field": rendered}));
        }
    }
    // deeper nonzero words
    for level in bracket_words(&frame, opts.cap).iter().skip(2) {
        for entry in level {
            let rendered = render_vector_field(&entry.field);
            lines.push(format!("X{} = {}", entry.word.label(), rendered));
            rows.push(json!({"word": entry.word.label(), "field": rendered}));
        }
    }
    report.results = json!({ "brackets": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_flag(
    spec: &ModelSpec,
    point: Option<&str>,
    opts: &Options,
    report: &mut Report,
) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let n = frame.base_dim();
    let mut targets: Vec<(String, Vec<Rat>)> = Vec::new();
    match point {
        Some(name) => match spec.point(name) {
            Some(PointLit::Base(x)) => targets.push((name.to_string(), x.clone())),
            Some(PointLit::Cotangent(x, _)) => targets.push((name.to_string(), x.clone())),
            None => return Err(CliError::BadArgs(format!("unknown point '{name}'"))),
        },
        None => {
            for (name, lit) in &spec.points {
                let x = match lit {
                    PointLit::Base(x) => x.clone(),
                    PointLit::Cotangent(x, _) => x.clone(),
                };
                targets.push((name.clone(), x));
            }
            if targets.is_empty() {
                targets.push(("origin".into(), vec![Rat::from_integer(0.into()); n]));
            }
        }
    }
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for (name, x) in &targets {
        let flag = bracket_flag(&frame, x, opts.cap);
        let step = flag
            .step
            .map(|s| s.to_string())
            .unwrap_or_else(|| "not reached".into());
        lines.push(format!(
            "{name} @ [{}]: dims {:?}, step {step}",
            rat_list(x),
            flag.dims
        ));
        rows.push(json!({
            "point": name,
            "x": exact_vec(x),
            "dims": flag.dims,
            "step": flag.step,
        }));
    }
    report.results = json!({ "flags": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_hamiltonians(spec: &ModelSpec, report: &mut Report) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let names = cotangent_names(frame.base_dim());
    let m = frame.rank();
    let mut lines = Vec::new();
    let mut singles = Vec::new();
    let mut pairs = Vec::new();
    for (i, h) in frame.annihilator_constraints().iter().enumerate() {
        let rendered = h.poly().render(&names);
        lines.push(format!("h{} = {}", i + 1, rendered));
        singles.push(json!({"index": i + 1, "poly": rendered}));
    }
    for i in 0..m {
        for j in i + 1..m {
            let rendered = frame.bracket_hamiltonian(i, j).poly().render(&names);
            lines.push(format!("h{}{} = {}", i + 1, j + 1, rendered));
            pairs.push(json!({"i": i + 1, "j": j + 1, "poly": rendered}));
        }
    }
    report.results = json!({ "hamiltonians": singles, "brackets": pairs });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_l2(spec: &ModelSpec, report: &mut Report) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let names = cotangent_names(frame.base_dim());
    let l2 = frame.l2_matrix();
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for r in 0..l2.rows() {
        let entries: Vec<String> = (0..l2.cols())
            .map(|c| l2.get(r, c).render(&names))
            .collect();
        lines.push(format!("[ {} ]", entries.join(" , ")));
        rows.push(Value::Array(
            entries.into_iter().map(Value::String).collect(),
        ));
    }
    report.results = json!({ "l2": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_sigma(spec: &ModelSpec, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let names = cotangent_names(frame.base_dim());
    let locus = singular_locus_generators_seeded(&frame, opts.seed);
    if locus.resampled {
        report
            .warnings
            .push("generic rank sampling disagreed; extra samples drawn".into());
    }
    let mut lines = vec![
        format!("generic rank: {}", locus.generic_rank),
        format!("generic kernel dim: {}", locus.generic_kernel_dim),
        format!(
            "generators ({0} x {0} minors): {1}",
            locus.generic_rank,
            locus.generators.len()
        ),
    ];
    let mut gens = Vec::new();
    for (g, vanishes) in locus.generators.iter().zip(&locus.vanishes_on_annihilator) {
        let rendered = g.render(&names);
        let note = if *vanishes {
            "  [vanishes on sampled annihilator points]"
        } else {
            ""
        };
        lines.push(format!("  {rendered}{note}"));
        gens.push(json!({"poly": rendered, "vanishes_on_annihilator": vanishes}));
    }
    report.results = json!({
        "generic_rank": locus.generic_rank,
        "generic_kernel_dim": locus.generic_kernel_dim,
        "generators": gens,
    });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_classify(
    spec: &ModelSpec,
    point: &str,
    opts: &Options,
    report: &mut Report,
) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let a = cotangent_point(spec, point)?;
    let locus = singular_locus_generators_seeded(&frame, opts.seed);
    let class = classify_point_with(&frame, &a, locus.generic_kernel_dim)?;
    report.results = json!({
        "point": point,
        "region": region_label(class.region),
        "kernel_dim": class.kernel_dim,
        "generic_kernel_dim": locus.generic_kernel_dim,
    });
    report.text = format!(
        "{point}: region {}, kernel dim {} (generic {})\n",
        region_label(class.region),
        class.kernel_dim,
        locus.generic_kernel_dim
    );
    Ok(())
}

fn cmd_triple(
    spec: &ModelSpec,
    stratum: Option<&str>,
    report: &mut Report,
) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let charts: Vec<StratumChart> = match stratum {
        Some(name) => vec![stratum_chart(spec, name)?],
        None => spec.strata.iter().map(StratumChart::from_decl).collect(),
    };
    if charts.is_empty() {
        return Err(CliError::BadArgs("model declares no strata".into()));
    }
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for chart in &charts {
        let samples = chart.samples.clone();
        let triples = triple_report(&frame, chart, &samples)?;
        for t in &triples {
            let (k, j, i) = t.dims();
            lines.push(format!(
                "{} @ [{}]: region {}, dims K={k} J={j} I={i}",
                chart.name,
                rat_list(&t.chart_point),
                region_label(t.region)
            ));
            rows.push(json!({
                "stratum": chart.name,
                "point": exact_vec(&t.chart_point),
                "region": region_label(t.region),
                "dims": {"K": k, "J": j, "I": i},
            }));
        }
    }
    report.results = json!({ "triples": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_hmin(
    spec: &ModelSpec,
    x: Option<&[Rat]>,
    base_stratum: Option<&str>,
    report: &mut Report,
) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    if let Some(x) = x {
        if x.len() != frame.base_dim() {
            return Err(CliError::BadArgs(format!(
                "expected {} coordinates, got {}",
                frame.base_dim(),
                x.len()
            )));
        }
        let h = minimal_rank_distribution(&frame, x);
        lines.push(format!("Delta_min @ [{}]: dim {}", rat_list(x), h.dim()));
        for r in 0..h.dim() {
            lines.push(format!("  [{}]", rat_list(h.basis().row(r))));
        }
        rows.push(json!({
            "x": exact_vec(x),
            "dim": h.dim(),
            "basis": (0..h.dim()).map(|r| exact_vec(h.basis().row(r))).collect::<Vec<_>>(),
        }));
    }
    if let Some(name) = base_stratum {
        let decl = spec
            .base_stratum(name)
            .ok_or_else(|| CliError::BadArgs(format!("unknown base stratum '{name}'")))?;
        let chart = BaseChart::from_decl(decl);
        for u in &chart.samples {
            let h = h_on_stratum(&frame, &chart, u)?;
            let x = chart.eval(u);
            lines.push(format!(
                "H on {name} @ x=[{}]: dim {}",
                rat_list(&x),
                h.dim()
            ));
            for r in 0..h.dim() {
                lines.push(format!("  [{}]", rat_list(h.basis().row(r))));
            }
            rows.push(json!({
                "stratum": name,
                "x": exact_vec(&x),
                "dim": h.dim(),
                "basis": (0..h.dim()).map(|r| exact_vec(h.basis().row(r))).collect::<Vec<_>>(),
            }));
        }
    }
    if lines.is_empty() {
        return Err(CliError::BadArgs(
            "hmin needs --x coordinates or --base-stratum".into(),
        ));
    }
    report.results = json!({ "hmin": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_charfield(spec: &ModelSpec, report: &mut Report) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let names = cotangent_names(frame.base_dim());
    let gens = characteristic_field(&frame);
    if gens.is_empty() {
        report.results = json!({ "generators": [] });
        report.text = "no characteristic field (trivial generic kernel)\n".into();
        return Ok(());
    }
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for (k, g) in gens.iter().enumerate() {
        let coeffs: Vec<String> = g.coefficients.iter().map(|c| c.render(&names)).collect();
        let comps: Vec<String> = g.components.iter().map(|c| c.render(&names)).collect();
        lines.push(format!("Z{}: coefficients [{}]", k + 1, coeffs.join(" , ")));
        lines.push(format!("    components [{}]", comps.join(" , ")));
        rows.push(json!({"coefficients": coeffs, "components": comps}));
    }
    report.results = json!({ "generators": rows });
    report.text = lines.join("\n") + "\n";
    Ok(())
}

fn cmd_integrate(
    spec: &ModelSpec,
    start: &str,
    t_end: f64,
    dt: f64,
    out: Option<&str>,
    opts: &Options,
    report: &mut Report,
) -> Result<(), CliError> {
    let frame = frame_of(spec)?;
    let a = cotangent_point(spec, start)?;
    let gens = characteristic_field(&frame);
    let field = gens.first().ok_or_else(|| {
        CliError::BadArgs("model has no characteristic field to integrate".into())
    })?;
    let traj = integrate_characteristic(&frame, field, &a, t_end, dt, opts.sigma_eps)?;
    if traj.halted_near_sigma {
        report
            .warnings
            .push("integration halted near the singular locus".into());
    }
    let endpoint = traj.last_state().to_vec();
    let mut text = String::new();
    let _ = writeln!(text, "start: {start}");
    let _ = writeln!(text, "samples: {}", traj.times.len());
    let _ = writeln!(text, "dt: {dt:e}");
    let _ = writeln!(text, "max constraint drift: {:e}", traj.max_drift());
    let _ = writeln!(text, "halted near Sigma: {}", traj.halted_near_sigma);
    let _ = writeln!(
        text,
        "endpoint: [{}]",
        endpoint
            .iter()
            .map(|v| format!("{v:.9}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if let Some(path) = out {
        std::fs::write(path, traj.export_text()).map_err(|e| CliError::Io(path.to_string(), e))?;
        let _ = writeln!(text, "trajectory written to {path}");
    }
    report.results = json!({
        "start": start,
        "samples": traj.times.len(),
        "dt": float(dt),
        "max_drift": float(traj.max_drift()),
        "halted_near_sigma": traj.halted_near_sigma,
        "endpoint": endpoint.iter().map(|&v| float(v)).collect::<Vec<_>>(),
        "trajectory_file": out,
    });
    report.text = text;
    Ok(())
}

fn cmd_carnot(
    spec: &ModelSpec,
    sub: &CarnotSub,
    opts: &Options,
    report: &mut Report,
) -> Result<(), CliError> {
    let decl = spec
        .liealg
        .as_ref()
        .ok_or_else(|| CliError::BadArgs("model has no liealg section".into()))?;
    let group = PolarizedGroup::from_decl(decl)?;
    match sub {
        CarnotSub::Flag => {
            let flag = polarized_flag(&group, opts.cap);
            let step = flag
                .step
                .map(|s| s.to_string())
                .unwrap_or_else(|| "not reached".into());
            report.results = json!({"dims": flag.dims, "step": flag.step});
            report.text = format!("dims {:?}, step {step}\n", flag.dims);
        }
        CarnotSub::Vmin => {
            let v = minimal_rank_subalgebra(&group)?;
            let mut lines = vec![format!("frak V: dim {}", v.dim())];
            for r in 0..v.dim() {
                lines.push(format!("  [{}]", rat_list(v.basis().row(r))));
            }
            report.results = json!({
                "dim": v.dim(),
                "basis": (0..v.dim()).map(|r| exact_vec(v.basis().row(r))).collect::<Vec<_>>(),
            });
            report.text = lines.join("\n") + "\n";
        }
        CarnotSub::Step2 => {
            let r = step2_check(&group)?;
            report.results = json!({
                "step": r.step,
                "v2_dim": r.v2_dim,
                "checked_covectors": r.checked_covectors,
                "passed": r.passed,
            });
            report.text = format!(
                "step {}, second layer dim {}, covectors checked {}, passed: {}\n",
                r.step, r.v2_dim, r.checked_covectors, r.passed
            );
        }
        CarnotSub::FrakK { p } => {
            let fk = frak_k_at(&group, p)?;
            let mut lines = vec![format!(
                "frak K at p=[{}]: v-space dim {}",
                rat_list(p),
                fk.v_space.dim()
            )];
            for (r, cov) in (0..fk.v_space.dim()).zip(&fk.p_components) {
                lines.push(format!(
                    "  v=[{}], p-component [{}]",
                    rat_list(fk.v_space.basis().row(r)),
                    rat_list(cov)
                ));
            }
            report.results = json!({
                "p": exact_vec(p),
                "dim": fk.v_space.dim(),
                "basis": (0..fk.v_space.dim())
                    .map(|r| exact_vec(fk.v_space.basis().row(r)))
                    .collect::<Vec<_>>(),
                "p_components": fk.p_components.iter().map(|c| exact_vec(c)).collect::<Vec<_>>(),
            });
            report.text = lines.join("\n") + "\n";
        }
    }
    Ok(())
}
