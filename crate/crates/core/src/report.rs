//! Key-value reports with stable keys for scripting.
//!
//! Every report is a flat list of `key: value` lines; keys are dotted paths
//! and stay stable across releases so that shell pipelines can grep them.
//! The classify report cites the deciding theorem tag (`T3.4`, `T3.9`,
//! `T4.3`, `EUC`) on its verdict line and on every hypothesis line.

use crate::accessibility::{gamma_rank, ChainDirection, GammaOptions};
use crate::controllability::{classify, ClassifyOptions, Verdict};
use crate::error::Result;
use crate::sim::PointCloud;
use crate::spectral::{closure_check, differential_at_identity, eigensplit, ClosureCheck};
use crate::system::{ControlSequence, LinearSystem};

/// An ordered list of `key: value` pairs.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pairs: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report { pairs: Vec::new() }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.pairs.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn push_closure(report: &mut Report, key: &str, check: &ClosureCheck) {
    report.push(format!("closure.{key}.holds"), check.holds);
    report.push(
        format!("closure.{key}.residual"),
        format!("{:.3e}", check.residual),
    );
}

/// Spectral decomposition report: eigenvalues, block dimensions and
/// subalgebra-closure residuals.
pub fn decompose_report(sys: &LinearSystem, tol: f64) -> Result<Report> {
    let mut report = Report::new();
    report.push(
        "family",
        format!("{:?}", sys.model().family()).to_lowercase(),
    );
    report.push("dim", sys.dim());
    report.push("tol", format!("{tol:e}"));
    let l = differential_at_identity(sys.model(), sys.aut())?;
    let split = eigensplit(&l, tol)?;
    for (i, ev) in split.eigenvalues.iter().enumerate() {
        report.push(format!("eigenvalue.{i}"), format!("{}{:+}i", ev.re, ev.im));
        report.push(format!("modulus.{i}"), ev.norm());
    }
    let (p, z, m) = split.dims();
    report.push("dims.plus", p);
    report.push("dims.zero", z);
    report.push("dims.minus", m);
    report.push("g_equals_g0", split.all_center());
    report.push("boundary_warning", split.boundary_warning);
    let closure = closure_check(sys.model(), &split, 1e-9);
    push_closure(&mut report, "plus_subalgebra", &closure.plus_subalgebra);
    push_closure(&mut report, "zero_subalgebra", &closure.zero_subalgebra);
    push_closure(&mut report, "minus_subalgebra", &closure.minus_subalgebra);
    push_closure(&mut report, "plus_zero_in_plus", &closure.plus_zero_in_plus);
    push_closure(
        &mut report,
        "minus_zero_in_minus",
        &closure.minus_zero_in_minus,
    );
    Ok(report)
}

/// Forward/backward Γ-rank report at the identity, plus the Aff(2,ℝ)
/// closed-form criterion when the system is in canonical form.
pub fn accessibility_report(sys: &LinearSystem, opts: &GammaOptions) -> Result<Report> {
    let mut report = Report::new();
    report.push(
        "family",
        format!("{:?}", sys.model().family()).to_lowercase(),
    );
    report.push("dim", sys.dim());
    report.push("depth", opts.depth);
    report.push("samples", opts.samples);
    let e = sys.model().identity();
    for (name, direction) in [
        ("forward", ChainDirection::Plus),
        ("backward", ChainDirection::Minus),
    ] {
        let r = gamma_rank(sys, &e, direction, opts)?;
        report.push(format!("gamma.{name}.rank"), r.rank);
        report.push(format!("gamma.{name}.dim"), r.dim);
        report.push(format!("gamma.{name}.vectors"), r.vectors_used);
        report.push(format!("gamma.{name}.accessible"), r.accessible);
        report.push(
            format!("gamma.{name}.heuristic_negative"),
            r.heuristic_negative,
        );
    }
    if let Some((a, d, hp0, gp0)) = sys.aff2_params() {
        report.push("aff2.a", a);
        report.push("aff2.d", d);
        report.push("aff2.hp0", hp0);
        report.push("aff2.gp0", gp0);
        report.push(
            "aff2.accessible",
            crate::accessibility::aff2_accessible(a, d, hp0, gp0)?,
        );
    }
    Ok(report)
}

/// Render a computed verdict.
pub fn verdict_report(v: &Verdict) -> Report {
    let mut report = Report::new();
    report.push("class", v.group_class);
    for (i, m) in v.eigen_moduli.iter().enumerate() {
        report.push(format!("modulus.{i}"), m);
    }
    report.push("g_equals_g0", v.g_equals_g0);
    report.push("r_open", v.r_open);
    report.push("c_open", v.c_open);
    if let Some(k) = v.r_certificate_k {
        report.push("r_certificate_k", k);
    }
    if let Some(k) = v.c_certificate_k {
        report.push("c_certificate_k", k);
    }
    report.push("boundary_warning", v.boundary_warning);
    for (i, check) in v.justification.iter().enumerate() {
        report.push(
            format!("check.{i}"),
            format!(
                "[{}] {} -- {}",
                check.theorem,
                check.hypothesis,
                if check.holds { "holds" } else { "fails" }
            ),
        );
    }
    let tag = v.decided_by.map(|t| format!(" [{t}]")).unwrap_or_default();
    report.push("verdict", format!("{}{}", v.conclusion, tag));
    report
}

/// Classify the system and render the verdict.
pub fn classify_report(sys: &LinearSystem, opts: &ClassifyOptions) -> Result<Report> {
    let v = classify(sys, opts)?;
    let mut report = Report::new();
    report.push(
        "family",
        format!("{:?}", sys.model().family()).to_lowercase(),
    );
    let inner = verdict_report(&v);
    for (k, val) in inner.pairs {
        report.push(k, val);
    }
    Ok(report)
}

/// Summary of a simulated cloud.
pub fn simulate_report(cloud: &PointCloud, out_path: Option<&str>) -> Report {
    let mut report = Report::new();
    report.push("system", &cloud.system_summary);
    report.push("steps", cloud.config.steps);
    report.push("lattice", cloud.config.controls_per_channel);
    report.push("prune_cell", format!("{:e}", cloud.config.prune_cell));
    report.push("seed", cloud.config.seed);
    report.push("points", cloud.len());
    report.push("truncated", cloud.truncated);
    if let Some(path) = out_path {
        report.push("out", path);
    }
    report
}

/// Self-check report: automorphism residuals, β(0), the solution
/// translation identity on random data, reversal involution and closure of
/// the spectral blocks. Returns the report and whether everything passed.
pub fn verify_report(sys: &LinearSystem, seed: u64) -> Result<(Report, bool)> {
    let mut report = Report::new();
    let mut ok = true;
    let mut check = |report: &mut Report, name: &str, pass: bool, residual: f64| {
        report.push(
            format!("check.{name}"),
            format!(
                "{} (residual {:.3e})",
                if pass { "pass" } else { "FAIL" },
                residual
            ),
        );
        ok &= pass;
    };

    let aut_report = sys.aut().validate(sys.model(), 50, seed)?;
    check(
        &mut report,
        "automorphism.identity",
        aut_report.identity_residual <= 1e-12,
        aut_report.identity_residual,
    );
    check(
        &mut report,
        "automorphism.homomorphism",
        aut_report.max_homomorphism_residual <= 1e-10,
        aut_report.max_homomorphism_residual,
    );
    check(
        &mut report,
        "automorphism.inverse",
        aut_report.max_inverse_residual <= 1e-10,
        aut_report.max_inverse_residual,
    );

    let zero = vec![0.0; sys.channels()];
    let b0 = sys.beta().eval(sys.model(), &zero)?;
    let b0_res = sys.model().chart_distance(&b0, &sys.model().identity());
    check(
        &mut report,
        "beta.zero_is_identity",
        b0_res <= 1e-12,
        b0_res,
    );

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst_translation: f64 = 0.0;
    let mut worst_involution: f64 = 0.0;
    let rev = sys.reversed()?;
    for _ in 0..20 {
        let g = sys.model().random_element(&mut rng);
        let controls: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                (0..sys.channels())
                    .map(|c| match sys.range() {
                        crate::system::ControlRange::Box { lo, hi } => {
                            let t: f64 = rng.gen_range(0.1..0.9);
                            lo[c] + t * (hi[c] - lo[c])
                        }
                        crate::system::ControlRange::FiniteSet { .. } => 0.0,
                    })
                    .collect()
            })
            .collect();
        let useq = ControlSequence::new(sys.range(), controls)?;
        worst_translation = worst_translation.max(sys.translation_identity_residual(5, &g, &useq)?);
        let u = useq.controls()[0].clone();
        let fwd_back = sys.map_fu(&rev.map_fu(&g, &u)?, &u)?;
        worst_involution = worst_involution.max(sys.model().chart_distance(&fwd_back, &g));
    }
    check(
        &mut report,
        "translation_identity",
        worst_translation <= 1e-10,
        worst_translation,
    );
    check(
        &mut report,
        "reversal_involution",
        worst_involution <= 1e-10,
        worst_involution,
    );

    let l = differential_at_identity(sys.model(), sys.aut())?;
    let split = eigensplit(&l, crate::spectral::DEFAULT_MODULUS_TOL)?;
    let closure = closure_check(sys.model(), &split, 1e-9);
    let worst_closure = [
        &closure.plus_subalgebra,
        &closure.zero_subalgebra,
        &closure.minus_subalgebra,
        &closure.plus_zero_in_plus,
        &closure.minus_zero_in_minus,
    ]
    .iter()
    .map(|c| c.residual)
    .fold(0.0, f64::max);
    check(
        &mut report,
        "spectral_closure",
        closure.all_hold(),
        worst_closure,
    );

    report.push("verify", if ok { "pass" } else { "FAIL" });
    Ok((report, ok))
}
