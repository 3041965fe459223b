//! The catalogue of named checks and the suites that run them.

use crate::calculus::{DivergenceFlavor, Functional, Part, Process};
use crate::clark::{clark_residual, poincare_from_clark, PathGrid, Projection};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Relation, Verdict, TOLERANCE_SIGMAS};
use crate::estimators::engine::{intensity_space, McSpec};
use crate::estimators::profile::ProfileRow;
use crate::estimators::{
    cheeger_check, coarea_check, deviation_profile, divergence_mean_check, gaussian_iso_check,
    isoperimetric_profile, lsi_constant_witness, margulis_russo, median, mod_lsi_check,
    orlicz_norm, poincare_ratio, samples, verify_identity, CheegerMode, CoareaMeasure, IdentityId,
    IdentityInputs, Variant, YoungFunction,
};
use crate::events::{
    boundary_estimates, count_event, monotonicity_probe, CountRelation, EventSet,
};
use crate::kernels::{mecke_check, reversibility_check, stationarity_check};
use crate::space::{PointSpace, QuadSpec, Region};

use super::config::{ClarkDecl, SuiteName};
use super::report::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckInfo {
    pub id: &'static str,
    pub suite: SuiteName,
    pub anchor: &'static str,
}

const fn check(id: &'static str, suite: SuiteName, anchor: &'static str) -> CheckInfo {
    CheckInfo { id, suite, anchor }
}

use SuiteName as S;

pub const CHECKS: &[CheckInfo] = &[
    check("exchange", S::Identities, "exchange lemma: sigma(A) E[1{w(A)=k}] = (k+1) E[1{w(A)=k+1}]"),
    check("adjoint_sigma", S::Identities, "duality of D and delta_sigma: E[F delta_sigma(u)] = E[<DF,u>_L2(sigma)]"),
    check("adjoint_omega", S::Identities, "duality of D and delta_omega: E[F delta_omega(u)] = E[<DF,u>_L2(omega)]"),
    check("adjoint_sigma_process", S::Identities, "duality of D and delta_sigma for a point-dependent process"),
    check("divergence_mean_sigma", S::Identities, "centred divergence: E[delta_sigma(u)] = 0"),
    check("divergence_mean_omega", S::Identities, "centred divergence: E[delta_omega(u)] = 0"),
    check("mecke", S::Identities, "Mecke formula: E[int F(w+x) sigma(dx)] = E[w(X) F]"),
    check("delta_equal", S::Identities, "equality of the two divergences of a gradient: delta_sigma DF = delta_omega DF"),
    check("grad_mean_flip", S::Identities, "mean gradient flip: E[int D_xF sigma(dx)] = -E[int D_xF w(dx)]"),
    check("dirichlet_equal", S::Identities, "equality of the Dirichlet forms E_sigma(F,F) = E_omega(F,F)"),
    check("reversibility", S::Kernels, "reversibility of the kernels: E[F K+G] = E[G K-F]"),
    check("mecke_backward_N", S::Kernels, "kernel Mecke form: E[K-F] = sigma(X) E[F], F = w(X)"),
    check("mecke_forward_N", S::Kernels, "kernel Mecke form: E[K+F] = E[w(X) F], F = w(X)"),
    check("mecke_backward_half", S::Kernels, "kernel Mecke form: E[K-F] = sigma(X) E[F], F = w(B)"),
    check("mecke_forward_half", S::Kernels, "kernel Mecke form: E[K+F] = E[w(X) F], F = w(B)"),
    check("mecke_backward_empty", S::Kernels, "kernel Mecke form: E[K-F] = sigma(X) E[F], F = 1{w(X)=0}"),
    check("mecke_forward_empty", S::Kernels, "kernel Mecke form: E[K+F] = E[w(X) F], F = 1{w(X)=0}"),
    check("stationarity_N_eq_1", S::Kernels, "invariance of pi under the normalized symmetrized kernel, A = {w(X)=1}"),
    check("stationarity_half_ge_1", S::Kernels, "invariance of pi under the normalized symmetrized kernel, A = {w(B)>=1}"),
    check("stationarity_empty", S::Kernels, "invariance of pi under the normalized symmetrized kernel, A = {w(X)=0}"),
    check("boundary_inner", S::Boundaries, "inner boundary: w in A with K(w,A^c) > 0"),
    check("boundary_outer", S::Boundaries, "outer boundary: w outside A with K(w,A) > 0"),
    check("boundary_surface", S::Boundaries, "surface measure E[1_A K(w,A^c)^(1/2)] of the inner boundary"),
    check("monotonicity_probe", S::Boundaries, "increasing events are stable under adding points"),
    check("coarea_L1", S::Coarea, "L1 co-area formula for the positive gradient part"),
    check("coarea_L1_sigma", S::Coarea, "L1(sigma) co-area formula for the positive gradient part"),
    check("coarea_Linf", S::Coarea, "Linf(sigma+omega) co-area formula"),
    check("coarea_L1_sym_clipped", S::Coarea, "L1 co-area formula under (sigma+omega)/2, pathwise level sets"),
    check("margulis_russo", S::MargulisRusso, "Margulis-Russo formula for an increasing event, coupled difference against gradient formula"),
    check("margulis_russo_exact", S::MargulisRusso, "Margulis-Russo formula for an increasing event against the exact derivative"),
    check("margulis_russo_decreasing", S::MargulisRusso, "Margulis-Russo formula for a decreasing event"),
    check("deviation_theta", S::Deviation, "deviation bound for monotone events: median intensity theta with pi_theta(A) = 1/2"),
    check("deviation_direction", S::Deviation, "deviation bound for monotone events: Phi(sqrt(2 lambda Delta) - sqrt(2 theta Delta)), observed direction"),
    check("profile_L1_full", S::Profiles, "isoperimetric constant h_1 >= 1/2 over the event family"),
    check("profile_L2_full", S::Profiles, "isoperimetric constant h_2 >= 1/sqrt(2 pi) over the event family"),
    check("profile_Linf_full", S::Profiles, "isoperimetric constant h_inf >= max(1/sqrt(pi sigma(X)), 1/(2 sigma(X))) over the event family"),
    check("profile_full_vs_plus", S::Profiles, "h_1 = 2 h_1^+ per event via the exchange lemma"),
    check("lsi_witness", S::Profiles, "failure of the classical log-Sobolev inequality on A_k = {w(B) >= k}"),
    check("poincare", S::Inequalities, "Poincare inequality Var F <= E[|DF|^2_L2(sigma)]"),
    check("poincare_witness_L2", S::Inequalities, "spectral gap witness lambda_2 = 1 with F = w(X)"),
    check("poincare_witness_Linf", S::Inequalities, "spectral gap witness lambda_inf = 1/sigma(X) with F = w(X)"),
    check("gaussian_iso", S::Inequalities, "Gaussian-type isoperimetry I(E[F]) <= E[sqrt(I(F)^2 + 2|DF|^2)]"),
    check("mod_lsi", S::Inequalities, "modified log-Sobolev inequality Ent F <= 1/2 E[|DF|^2 / F]"),
    check("cheeger_power", S::Inequalities, "Cheeger-type moment inequality with h_1 >= 1/2"),
    check("cheeger_young_expectation", S::Inequalities, "Cheeger-type Young function inequality E[N(F)] with k_1^+ >= 1/4"),
    check("cheeger_young_norm", S::Inequalities, "Cheeger-type Orlicz norm inequality with k_1^+ >= 1/4"),
    check("cheeger_variance", S::Inequalities, "variance isoperimetry with b >= (1 - 1/sqrt 2) k_1^+"),
    check("orlicz_power2", S::Inequalities, "Orlicz norm of N(x) = x^2 equals the L2 norm"),
    check("clark_residual_linear", S::Clark, "Clark formula F = E[F] - int E[D_tF | F_t] dN~_t, F = N_1"),
    check("clark_residual_nested", S::Clark, "Clark formula with nested projection, F = N_1"),
    check("clark_square_8_32", S::Clark, "Clark formula for F = N_1^2: residual refines from m = 8 to 32"),
    check("clark_square_32_128", S::Clark, "Clark formula for F = N_1^2: residual refines from m = 32 to 128"),
    check("clark_poincare_variance", S::Clark, "Poincare inequality from the Clark formula: Var F <= E[int proj^2 dt]"),
    check("clark_poincare_dirichlet", S::Clark, "Poincare inequality from the Clark formula: E[int proj^2 dt] <= E[|DF|^2]"),
];

pub fn anchor(id: &str) -> Option<&'static str> {
    CHECKS.iter().find(|c| c.id == id).map(|c| c.anchor)
}

/// One line per check: `id<TAB>suite<TAB>anchor`.
pub fn list_checks() -> String {
    CHECKS
        .iter()
        .map(|c| format!("{}\t{}\t{}\n", c.id, c.suite, c.anchor))
        .collect()
}

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct Context {
    pub space: PointSpace,
    pub intensity: f64,
    pub mc: McSpec,
    pub quad: QuadSpec,
    pub events: Vec<EventSet>,
    pub clark: ClarkDecl,
}

/// Compares an estimate with a known value.
pub fn against_exact(est: Estimate, exact: f64) -> IdentityReport {
    IdentityReport::new(
        est,
        Estimate::exact(exact),
        Estimate::new(est.mean - exact, est.stderr, est.n, est.ci_level),
        Relation::Equal,
    )
}

/// `left <= right` for independent estimates.
fn unpaired_at_most(left: Estimate, right: Estimate) -> IdentityReport {
    let se = left.stderr.hypot(right.stderr);
    IdentityReport::new(
        left,
        right,
        Estimate::new(left.mean - right.mean, se, left.n, left.ci_level),
        Relation::AtMost,
    )
}

macro_rules! row {
    ($id:expr, $suite:expr, $inputs:expr, $body:expr) => {{
        let id: &str = $id;
        let r: Result<IdentityReport> = (|| $body)();
        match r {
            Ok(r) => Ok(Row::new(id, $suite, $inputs, &r)),
            Err(e) => Err(Error::Check {
                id: id.into(),
                message: e.to_string(),
            }),
        }
    }};
}

/// The first coordinate halved: `σ(B) = σ(X)/2`.
fn half_region(space: &PointSpace) -> Region {
    let full = space.full_region();
    let mut upper = full.upper.clone();
    upper[0] *= 0.5;
    Region::new(full.lower, upper).expect("sub-box")
}

pub fn run_suite(suite: SuiteName, ctx: &Context) -> Result<Vec<Row>> {
    match suite {
        S::Identities => identities(ctx),
        S::Kernels => kernels(ctx),
        S::Boundaries => boundaries(ctx),
        S::Coarea => coarea(ctx),
        S::MargulisRusso => margulis(ctx),
        S::Deviation => deviation(ctx),
        S::Profiles => profiles(ctx),
        S::Inequalities => inequalities(ctx),
        S::Clark => clark(ctx),
    }
}

fn identities(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let n = Functional::total_count(s);
    let n2 = n.map("N(X)^2", |v| v * v);
    let one_point = Functional::indicator(&count_event(s, &s.full_region(), CountRelation::Eq, 1)?);
    let half = Functional::count(s, &half_region(s))?;
    let v_point = Process::new("1+x", |x, _| 1.0 + x.coords()[0]);
    let v_config = Process::new("x*N(X)", |x, w| x.coords()[0] * w.len() as f64);
    let id = |id, inputs: &IdentityInputs| verify_identity(id, inputs, s, l, mc, q);
    Ok(vec![
        row!("exchange", S::Identities, "F=1{N(X)=1}, p=1, plus", id(IdentityId::Exchange, &IdentityInputs::new(one_point.clone())))?,
        row!("adjoint_sigma", S::Identities, "F=N(X), u=1", id(IdentityId::AdjointSigma, &IdentityInputs::new(n.clone())))?,
        row!("adjoint_omega", S::Identities, "F=N(X), u=1", id(IdentityId::AdjointOmega, &IdentityInputs::new(n.clone())))?,
        row!("adjoint_sigma_process", S::Identities, "F=N(X)^2, u=1+x", id(IdentityId::AdjointSigma, &IdentityInputs::new(n2.clone()).with_process(v_point)))?,
        row!("divergence_mean_sigma", S::Identities, "u=x*N(X)", divergence_mean_check(&v_config, DivergenceFlavor::Sigma, s, l, mc, q))?,
        row!("divergence_mean_omega", S::Identities, "u=x*N(X)", divergence_mean_check(&v_config, DivergenceFlavor::Omega, s, l, mc, q))?,
        row!("mecke", S::Identities, "F=N(B), B=half", id(IdentityId::Mecke, &IdentityInputs::new(half.clone())))?,
        row!("delta_equal", S::Identities, "F=N(B), B=half", id(IdentityId::DeltaEqual, &IdentityInputs::new(half)))?,
        row!("grad_mean_flip", S::Identities, "F=N(X)^2", id(IdentityId::GradMeanFlip, &IdentityInputs::new(n2.clone())))?,
        row!("dirichlet_equal", S::Identities, "F=N(X)^2", id(IdentityId::DirichletEqual, &IdentityInputs::new(n2)))?,
    ])
}

fn kernels(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let n = Functional::total_count(s);
    let hr = half_region(s);
    let half = Functional::count(s, &hr)?;
    let empty_ev = count_event(s, &s.full_region(), CountRelation::Eq, 0)?;
    let empty = Functional::indicator(&empty_ev);
    let mut rows = vec![row!("reversibility", S::Kernels, "F=G=N(X)", reversibility_check(&n, &n, s, l, mc, q))?];
    for (tag, f, desc) in [("N", &n, "F=N(X)"), ("half", &half, "F=N(B), B=half"), ("empty", &empty, "F=1{N(X)=0}")] {
        let (back, fwd) = mecke_check(f, s, l, mc, q).map_err(|e| Error::Check {
            id: format!("mecke_backward_{tag}"),
            message: e.to_string(),
        })?;
        rows.push(Row::new(&format!("mecke_backward_{tag}"), S::Kernels, desc, &back));
        rows.push(Row::new(&format!("mecke_forward_{tag}"), S::Kernels, desc, &fwd));
    }
    let events = [
        ("stationarity_N_eq_1", count_event(s, &s.full_region(), CountRelation::Eq, 1)?, "A={N(X)=1}"),
        ("stationarity_half_ge_1", count_event(s, &hr, CountRelation::Ge, 1)?, "A={N(B)>=1}, B=half"),
        ("stationarity_empty", empty_ev, "A={N(X)=0}"),
    ];
    for (id, ev, desc) in events {
        rows.push(row!(id, S::Kernels, desc, stationarity_check(&ev, s, l, mc, q))?);
    }
    Ok(rows)
}

fn boundaries(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let mu = intensity_space(s, l)?.total_mass();
    let ev = count_event(s, &s.full_region(), CountRelation::Ge, 1)?;
    let generic = ev.generic();
    let b = boundary_estimates(&generic, s, l, mc, q).map_err(|e| Error::Check {
        id: "boundary_inner".into(),
        message: e.to_string(),
    })?;
    let p1 = mu * (-mu).exp();
    let inputs = "A={N(X)>=1}, generic kernel route";
    let probe = monotonicity_probe(&generic, s, l, &mc.with_n_outer(mc.n_outer.min(10_000)), q)
        .map_err(|e| Error::Check { id: "monotonicity_probe".into(), message: e.to_string() })?;
    let rate = probe.increasing_violation_rate();
    let probe_est = Estimate::new(rate, 0.0, probe.addition_trials, mc.ci_level);
    Ok(vec![
        Row::new("boundary_inner", S::Boundaries, inputs, &against_exact(b.prob_inner, p1)),
        Row::new("boundary_outer", S::Boundaries, inputs, &against_exact(b.prob_outer, (-mu).exp())),
        Row::new("boundary_surface", S::Boundaries, inputs, &against_exact(b.surface_inner, 0.5f64.sqrt() * p1)),
        Row::new("monotonicity_probe", S::Boundaries, "A={N(X)>=1}, addition exits", &against_exact(probe_est, 0.0)),
    ])
}

fn coarea(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let n = Functional::total_count(s);
    let clipped = n.map("min(N(X),2)", |v| v.min(2.0));
    let ck = |f: &Functional, part, m| coarea_check(f, part, m, s, l, mc, q);
    Ok(vec![
        row!("coarea_L1", S::Coarea, "F=N(X), plus part, L1(omega)", ck(&n, Part::Plus, CoareaMeasure::Omega))?,
        row!("coarea_L1_sigma", S::Coarea, "F=N(X), plus part, L1(sigma)", ck(&n, Part::Plus, CoareaMeasure::Sigma))?,
        row!("coarea_Linf", S::Coarea, "F=N(X), full gradient, Linf(sigma+omega)", ck(&n, Part::Signed, CoareaMeasure::Sup))?,
        row!("coarea_L1_sym_clipped", S::Coarea, "F=min(N(X),2), full gradient, L1((sigma+omega)/2)", ck(&clipped, Part::Signed, CoareaMeasure::Sym))?,
    ])
}

const D_LAMBDA: f64 = 0.05;

fn margulis(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let inc = count_event(s, &s.full_region(), CountRelation::Ge, 1)?;
    let dec = count_event(s, &s.full_region(), CountRelation::Le, 0)?;
    let mr = |id: &str, ev: &EventSet| {
        margulis_russo(ev, s, l, D_LAMBDA, mc, q).map_err(|e| Error::Check { id: id.into(), message: e.to_string() })
    };
    let up = mr("margulis_russo", &inc)?;
    let down = mr("margulis_russo_decreasing", &dec)?;
    let exact = up.exact.ok_or_else(|| Error::Check {
        id: "margulis_russo_exact".into(),
        message: "no exact derivative".into(),
    })?;
    Ok(vec![
        Row::new("margulis_russo", S::MargulisRusso, format!("A={{N(X)>=1}}, dlambda={D_LAMBDA}"), &up.paired),
        Row::new("margulis_russo_exact", S::MargulisRusso, format!("A={{N(X)>=1}}, exact={exact:.10}"), &against_exact(up.deriv_formula, exact)),
        Row::new("margulis_russo_decreasing", S::MargulisRusso, format!("A={{N(X)<=0}}, dlambda={D_LAMBDA}"), &down.paired),
    ])
}

pub const DEVIATION_LAMBDAS: [f64; 3] = [1.0, 1.5, 2.0];

fn deviation(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let ev = count_event(s, &s.full_region(), CountRelation::Ge, 1)?;
    let rep = deviation_profile(&ev, s, &DEVIATION_LAMBDAS).map_err(|e| Error::Check {
        id: "deviation_theta".into(),
        message: e.to_string(),
    })?;
    let theta_exact = std::f64::consts::LN_2 / s.total_mass();
    let mut theta = against_exact(Estimate::exact(rep.theta), theta_exact);
    theta.verdict = if (rep.theta - theta_exact).abs() <= 1e-6 { Verdict::Consistent } else { Verdict::Violated };
    let last = rep.rows.last().expect("non-empty grid");
    let observed: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("lambda={} pi={:.6} bound={:.6} stated={:?} observed={:?}", r.lambda, r.probability, r.bound, r.stated, r.observed))
        .collect();
    let dir = IdentityReport::new(
        Estimate::exact(last.probability),
        Estimate::exact(last.bound),
        Estimate::exact(last.probability - last.bound),
        Relation::AtMost,
    );
    Ok(vec![
        Row::new("deviation_theta", S::Deviation, format!("A={{N(X)>=1}}, theta={:.10}", rep.theta), &theta),
        Row::new("deviation_direction", S::Deviation, observed.join("; "), &dir).with_verdict(Verdict::Reported),
    ])
}

fn profiles(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let mut rows = Vec::new();
    let mut pairing: Option<IdentityReport> = None;
    for (id, p) in [("profile_L1_full", 1.0), ("profile_L2_full", 2.0), ("profile_Linf_full", f64::INFINITY)] {
        let t = isoperimetric_profile(&c.events, p, Variant::Full, s, l, mc, q)
            .map_err(|e| Error::Check { id: id.into(), message: e.to_string() })?;
        let bound = t.lower_bound.unwrap_or(0.0);
        let admitted: Vec<_> = t.rows.iter().filter(|r| !r.excluded).collect();
        let worst = admitted
            .iter()
            .max_by(|a, b| {
                let slack = |r: &&&ProfileRow| bound - r.ratio.mean - TOLERANCE_SIGMAS * r.ratio.stderr;
                slack(a).total_cmp(&slack(b))
            })
            .expect("non-empty table");
        let r = IdentityReport::new(
            Estimate::exact(bound),
            worst.ratio,
            Estimate::new(bound - worst.ratio.mean, worst.ratio.stderr, worst.ratio.n, worst.ratio.ci_level),
            Relation::AtMost,
        );
        rows.push(Row::new(id, S::Profiles, format!("{} events, min ratio {:.6} at {}, tightest {}", admitted.len(), t.minimum, t.argmin, worst.label), &r));
        if p == 1.0 {
            pairing = admitted
                .iter()
                .map(|r| r.full_vs_twice_plus)
                .max_by(|a, b| a.difference.mean.abs().total_cmp(&b.difference.mean.abs()));
        }
    }
    let pair = pairing.expect("L1 table computed");
    rows.push(Row::new("profile_full_vs_plus", S::Profiles, "largest |full - 2 plus| over the family, p=1", &pair));
    let mu = intensity_space(s, l)?.total_mass();
    let w = lsi_constant_witness(mu, 6).map_err(|e| Error::Check { id: "lsi_witness".into(), message: e.to_string() })?;
    let (first, last) = (w.rows.first().expect("rows"), w.rows.last().expect("rows"));
    let mut r = IdentityReport::new(
        Estimate::exact(last.ratio),
        Estimate::exact(first.ratio),
        Estimate::exact(last.ratio - first.ratio),
        Relation::AtMost,
    );
    r.verdict = if w.strictly_decreasing { Verdict::Holds } else { Verdict::Fails };
    let seq: Vec<String> = w.rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    rows.push(Row::new("lsi_witness", S::Profiles, format!("A_k={{N(X)>=k}}, k=1..6, ratios [{}]", seq.join(", ")), &r));
    Ok(rows)
}

fn inequalities(c: &Context) -> Result<Vec<Row>> {
    let s = &c.space;
    let (l, mc, q) = (c.intensity, &c.mc, &c.quad);
    let mu = intensity_space(s, l)?.total_mass();
    let n = Functional::total_count(s);
    let p = poincare_ratio(&n, s, l, mc, q).map_err(|e| Error::Check { id: "poincare".into(), message: e.to_string() })?;
    let pr = IdentityReport::new(
        p.variance,
        p.dirichlet_l2,
        Estimate::new(p.variance.mean - p.dirichlet_l2.mean, p.variance.stderr.hypot(p.dirichlet_l2.stderr), p.variance.n, p.variance.ci_level),
        Relation::AtMost,
    );
    let empty = Functional::indicator(&count_event(s, &s.full_region(), CountRelation::Eq, 0)?);
    let expn = n.map("exp(N(X))", f64::exp);
    let m = median(&n, s, l, mc)?;
    let centred = n.shifted(-m);
    let young = YoungFunction::power(2.0)?;
    let cheeger_power = cheeger_check(&centred, &CheegerMode::Power { p: 2.0 }, s, l, mc, q)
        .map_err(|e| Error::Check { id: "cheeger_power".into(), message: e.to_string() })?;
    let cheeger_young = cheeger_check(&centred, &CheegerMode::Young(young.clone()), s, l, mc, q)
        .map_err(|e| Error::Check { id: "cheeger_young_expectation".into(), message: e.to_string() })?;
    let young_norm = cheeger_young.norm.ok_or_else(|| Error::Check {
        id: "cheeger_young_norm".into(),
        message: "no norm report".into(),
    })?;
    let cheeger_var = cheeger_check(&empty, &CheegerMode::Variance, s, l, mc, q)
        .map_err(|e| Error::Check { id: "cheeger_variance".into(), message: e.to_string() })?;
    let centred_desc = format!("F=N(X)-{m}, median 0");
    Ok(vec![
        Row::new("poincare", S::Inequalities, "F=N(X)", &pr),
        Row::new("poincare_witness_L2", S::Inequalities, "F=N(X), ratio E|DF|^2_L2(sigma)/Var F", &against_exact(p.ratio_l2, 1.0)),
        Row::new("poincare_witness_Linf", S::Inequalities, format!("F=N(X), ratio E|DF|^2_Linf/Var F, sigma(X)={mu}"), &against_exact(p.ratio_linf, 1.0 / mu)),
        row!("gaussian_iso", S::Inequalities, "F=1{N(X)=0}", gaussian_iso_check(&empty, s, l, mc, q))?,
        row!("mod_lsi", S::Inequalities, "F=exp(N(X))", mod_lsi_check(&expn, s, l, mc, q))?,
        Row::new("cheeger_power", S::Inequalities, format!("{centred_desc}, p=2, h_1>=1/2"), &cheeger_power.expectation),
        Row::new("cheeger_young_expectation", S::Inequalities, format!("{centred_desc}, N(x)=x^2, k_1^+>=1/4"), &cheeger_young.expectation),
        Row::new("cheeger_young_norm", S::Inequalities, format!("{centred_desc}, N(x)=x^2, k_1^+>=1/4"), &young_norm),
        Row::new("cheeger_variance", S::Inequalities, "F=1{N(X)=0}", &cheeger_var.expectation),
        row!("orlicz_power2", S::Inequalities, "F=N(X)-median, N(x)=x^2, same stream", orlicz_vs_l2(&centred, &young, s, l, mc))?,
    ])
}

/// Orlicz norm for `N(x) = x²` against `√E[F²]` on the same samples,
/// to bisection accuracy `1e-6`.
pub fn orlicz_vs_l2(f: &Functional, young: &YoungFunction, s: &PointSpace, l: f64, mc: &McSpec) -> Result<IdentityReport> {
    let norm = orlicz_norm(f, young, s, l, mc)?;
    let xs = samples(f, s, l, mc)?;
    let l2 = (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
    let mut r = IdentityReport::new(
        norm,
        Estimate::new(l2, 0.0, xs.len(), mc.ci_level),
        Estimate::new(norm.mean - l2, 0.0, xs.len(), mc.ci_level),
        Relation::Equal,
    );
    r.verdict = if (norm.mean - l2).abs() <= 1e-6 { Verdict::Consistent } else { Verdict::Violated };
    Ok(r)
}

fn err(id: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Check {
        id: id.into(),
        message: e.to_string(),
    }
}

fn clark(c: &Context) -> Result<Vec<Row>> {
    let unit = PointSpace::unit_interval();
    let mc = c.mc.with_n_outer(c.clark.n_outer);
    let grid = PathGrid::new(c.clark.m)?;
    let n = Functional::total_count(&unit);
    let half = Functional::count(&unit, &Region::interval(0.0, 0.5)?)?;
    let square = n.map("N_1^2", |v| v * v);
    let linear = clark_residual(&n, &Projection::linear(1.0), Some(1.0), &mc, &grid).map_err(err("clark_residual_linear"))?;
    let nested = clark_residual(&n, &Projection::Nested { n_inner: c.clark.n_inner }, Some(1.0), &mc, &grid)
        .map_err(err("clark_residual_nested"))?;
    let res = |m: usize| -> Result<Estimate> {
        clark_residual(&square, &Projection::square(), Some(2.0), &mc, &PathGrid::new(m)?)
    };
    let r8 = res(8).map_err(err("clark_square_8_32"))?;
    let r32 = res(32).map_err(err("clark_square_8_32"))?;
    let r128 = res(128).map_err(err("clark_square_32_128"))?;
    let chain = poincare_from_clark(&half, &Projection::linear(0.5), &mc, &grid).map_err(err("clark_poincare_variance"))?;
    let m = c.clark.m;
    Ok(vec![
        Row::new("clark_residual_linear", S::Clark, format!("F=N_1, closed projection -1, m={m}"), &against_exact(linear, 0.0)),
        Row::new("clark_residual_nested", S::Clark, format!("F=N_1, nested projection n_inner={}, m={m}", c.clark.n_inner), &against_exact(nested, 0.0)),
        Row::new("clark_square_8_32", S::Clark, "F=N_1^2, closed projection, residual(m=32) <= residual(m=8)", &unpaired_at_most(r32, r8)),
        Row::new("clark_square_32_128", S::Clark, "F=N_1^2, closed projection, residual(m=128) <= residual(m=32)", &unpaired_at_most(r128, r32)),
        Row::new("clark_poincare_variance", S::Clark, format!("F=N_1/2, m={m}"), &chain.variance_vs_projected),
        Row::new("clark_poincare_dirichlet", S::Clark, format!("F=N_1/2, m={m}"), &chain.projected_vs_dirichlet),
    ])
}
