//! Property suite behind the `verify` verb and the acceptance tests.
//!
//! Thirteen checks cover the whole pipeline, from the exact eigenvalue
//! oracles to the extension builders.  Every check runs over the enumerated
//! family (n = 3 with mu <= 6; n = 4 with 2nu, 2mu <= 6 and nu + mu integral,
//! 32 types in all), is deterministic, and reports its worst residuals in a
//! serializable record.

use std::sync::Arc;
use std::time::Instant;

use num::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{ad_casimir_decomposition, build_branch_data, matrix_polynomial};
use crate::cmatrix::{hermitian_eig, CMat, C64};
use crate::extension::{
    bump_extension, cofactor_bounds, curve_jet_poly, curve_jet_poly_rational, cutoff_extension,
    finite_borel, jet_solve, jet_solve_rational, node_shift, RadialClosure,
};
use crate::numerics::radial_quadrature;
use crate::oracle::{
    binomial_identity_sides, polynomial_model_eigenvalue, rat_from_f64, rational_branch_check,
    exact_q_polys, Rat,
};
use crate::reps::{build_so3_rep, build_so4_rep, GeneratorImages, TauLabel};
use crate::spherical::SphericalEvaluator;
use crate::transform::{
    decompose_gamma, synthesize_profile, BranchSamples, EquivariantProfile, GammaTable,
    TransformContext,
};

/// Outcome of one suite check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Outcome of a suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

pub const CHECK_IDS: [usize; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

pub fn check_name(id: usize) -> &'static str {
    match id {
        1 => "eigenvalue-formulas",
        2 => "polynomial-model-oracle",
        3 => "isotypic-membership",
        4 => "normalization-at-origin",
        5 => "eigen-equations",
        6 => "parity-identity",
        7 => "transform-sanity",
        8 => "multiplier-property",
        9 => "decomposition-roundtrip",
        10 => "jet-recovery",
        11 => "conditioning-bounds",
        12 => "extension-restriction",
        13 => "decay-trend",
        _ => "unknown-check",
    }
}

/// The enumerated K-type family, n = 3 first, then n = 4 lexicographic.
pub fn enumerated_types() -> Vec<(TauLabel, GeneratorImages)> {
    let mut out = Vec::new();
    for two_mu in (0..=12).step_by(2) {
        out.push(build_so3_rep(two_mu / 2).expect("valid so3 type"));
    }
    for two_nu in 0..=6 {
        for two_mu in 0..=6 {
            if (two_nu + two_mu) % 2 == 0 {
                out.push(build_so4_rep(two_nu, two_mu).expect("valid so4 type"));
            }
        }
    }
    out
}

type CheckOutcome = std::result::Result<String, String>;

fn err_of(context: &str, e: impl std::fmt::Display) -> String {
    format!("{context}: {e}")
}

/// Run one check by id.
pub fn run_check(id: usize) -> CheckReport {
    let start = Instant::now();
    let outcome = match id {
        1 => check_eigenvalue_formulas(),
        2 => check_polynomial_model(),
        3 => check_isotypic_membership(),
        4 => check_normalization(),
        5 => check_eigen_equations(),
        6 => check_parity_identity(),
        7 => check_transform_sanity(),
        8 => check_multiplier_property(),
        9 => check_decomposition_roundtrip(),
        10 => check_jet_recovery(),
        11 => check_conditioning_bounds(),
        12 => check_extension_restriction(),
        13 => check_decay_trend().map(|t| t.summary),
        _ => Err(format!("no check with id {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => CheckReport { id, name: check_name(id).into(), passed: true, detail, seconds },
        Err(detail) => {
            CheckReport { id, name: check_name(id).into(), passed: false, detail, seconds }
        }
    }
}

/// Run the given checks in order (all thirteen when `ids` is empty).
pub fn run_suite(ids: &[usize]) -> SuiteReport {
    crate::init_threads();
    let ids: Vec<usize> = if ids.is_empty() { CHECK_IDS.to_vec() } else { ids.to_vec() };
    let checks: Vec<CheckReport> = ids.iter().map(|&id| run_check(id)).collect();
    let passed = checks.iter().all(|c| c.passed);
    SuiteReport { passed, checks }
}

// ---------------------------------------------------------------------------
// 1. Eigenvalue formulas
// ---------------------------------------------------------------------------

fn check_eigenvalue_formulas() -> CheckOutcome {
    let fam = enumerated_types();
    let worst = fam
        .par_iter()
        .map(|(label, gen)| -> std::result::Result<f64, String> {
            let bd = build_branch_data(gen).map_err(|e| err_of("branch data", e))?;
            let mut expected = Vec::new();
            for s in 0..=label.a_tau() {
                let lam = label.lambda(s).map_err(|e| err_of("lambda", e))? as f64;
                for _ in 0..label.weight_dim(s).map_err(|e| err_of("weight_dim", e))? {
                    expected.push(lam);
                }
            }
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (mut eigs, _) = hermitian_eig(&bd.b);
            eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if eigs.len() != expected.len() {
                return Err(format!(
                    "eigenvalue-formulas: {} spectrum size {} != {}",
                    label.describe(),
                    eigs.len(),
                    expected.len()
                ));
            }
            let gap = eigs
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            if gap > 1e-9 {
                return Err(format!(
                    "eigenvalue-formulas: {} float spectrum off by {gap:.3e}",
                    label.describe()
                ));
            }
            rational_branch_check(label)
                .map_err(|e| format!("eigenvalue-formulas: {} exact check: {e}", label.describe()))?;
            Ok(gap)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(format!("32 types: float spectra within {worst:.3e}, rational oracle exact"))
}

// ---------------------------------------------------------------------------
// 2. Polynomial-model oracle
// ---------------------------------------------------------------------------

fn check_polynomial_model() -> CheckOutcome {
    let mut count = 0usize;
    for two_nu in 0..=6u32 {
        for two_mu in 0..=6u32 {
            if (two_nu + two_mu) % 2 != 0 {
                continue;
            }
            let label = TauLabel::new(4, two_nu, two_mu).map_err(|e| err_of("label", e))?;
            for s in 0..=label.a_tau() {
                let lhs = polynomial_model_eigenvalue(two_nu, two_mu, s)
                    .map_err(|e| err_of("model eigenvalue", e))?;
                let rhs = label.lambda(s).map_err(|e| err_of("lambda", e))?;
                if lhs != rhs {
                    return Err(format!(
                        "polynomial-model-oracle: ({two_nu},{two_mu}) s={s}: {lhs} != {rhs}"
                    ));
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} integer eigenvalues match the closed form exactly"))
}

// ---------------------------------------------------------------------------
// 3. Isotypic membership
// ---------------------------------------------------------------------------

fn check_isotypic_membership() -> CheckOutcome {
    let fam = enumerated_types();
    let worst = fam
        .par_iter()
        .map(|(label, gen)| -> std::result::Result<f64, String> {
            let bd = build_branch_data(gen).map_err(|e| err_of("branch data", e))?;
            let ladder = ad_casimir_decomposition(gen).map_err(|e| err_of("ladder", e))?;
            let mut worst = 0.0_f64;
            for ell in 0..=label.a_tau() {
                let qb = matrix_polynomial(&bd.qpolys[ell], &bd.b);
                let proj = ladder
                    .project_diag(ell, &qb)
                    .map_err(|e| err_of("projection", e))?;
                let resid = qb.sub(&proj).fro_norm() / (1.0 + qb.fro_norm());
                if resid > 1e-10 {
                    return Err(format!(
                        "isotypic-membership: {} level {ell} residual {resid:.3e}",
                        label.describe()
                    ));
                }
                worst = worst.max(resid);
            }
            if label.n == 3 {
                let qs = exact_q_polys(label).map_err(|e| err_of("exact q polys", e))?;
                for (ell, q) in qs.iter().enumerate() {
                    for (k, c) in q.iter().enumerate() {
                        if (k % 2) != (ell % 2) && !c.is_zero() {
                            return Err(format!(
                                "isotypic-membership: {} q^{ell} has nonzero coefficient at degree {k}",
                                label.describe()
                            ));
                        }
                    }
                }
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(format!("membership residual <= {worst:.3e}; n=3 parity exact"))
}

// ---------------------------------------------------------------------------
// 4. Normalization at the origin
// ---------------------------------------------------------------------------

fn check_normalization() -> CheckOutcome {
    let fam = enumerated_types();
    let worst = fam
        .par_iter()
        .map(|(label, gen)| -> std::result::Result<f64, String> {
            let eval = SphericalEvaluator::new(gen, 20).map_err(|e| err_of("evaluator", e))?;
            let origin = vec![0.0; label.n];
            let eye = CMat::identity(label.d_tau());
            let mut worst = 0.0_f64;
            for s in 0..=label.a_tau() {
                for rho in [0.5, 1.0, 2.0] {
                    let phi = eval.phi(s, rho, &origin).map_err(|e| err_of("phi", e))?;
                    let gap = phi.sub(&eye).fro_norm();
                    if gap > 1e-8 {
                        return Err(format!(
                            "normalization-at-origin: {} s={s} rho={rho}: {gap:.3e}",
                            label.describe()
                        ));
                    }
                    worst = worst.max(gap);
                }
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(format!("Phi(0) = I within {worst:.3e} at degree 20"))
}

// ---------------------------------------------------------------------------
// 5. Eigen-equations
// ---------------------------------------------------------------------------

fn check_eigen_equations() -> CheckOutcome {
    let fam = enumerated_types();
    let results = fam
        .par_iter()
        .map(|(label, gen)| -> std::result::Result<(f64, f64), String> {
            let degree = if label.n == 3 { 20 } else { 12 };
            let eval =
                SphericalEvaluator::new(gen, degree).map_err(|e| err_of("evaluator", e))?;
            let rho = 1.1;
            let mut worst3 = 0.0_f64;
            let mut worst4 = 0.0_f64;
            for s in 0..=label.a_tau() {
                let (lap, dtau) =
                    eval.eigen_residuals(s, rho).map_err(|e| err_of("residuals", e))?;
                if label.n == 3 {
                    let r = lap.max(dtau);
                    if r > 1e-4 {
                        return Err(format!(
                            "eigen-equations: {} s={s} finite-difference residual {r:.3e}",
                            label.describe()
                        ));
                    }
                    worst3 = worst3.max(r);
                } else {
                    if dtau > 1e-8 {
                        return Err(format!(
                            "eigen-equations: {} s={s} multiplier residual {dtau:.3e}",
                            label.describe()
                        ));
                    }
                    worst4 = worst4.max(dtau);
                }
            }
            Ok((worst3, worst4))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let w3 = results.iter().map(|r| r.0).fold(0.0_f64, f64::max);
    let w4 = results.iter().map(|r| r.1).fold(0.0_f64, f64::max);
    Ok(format!("n=3 stencil residual <= {w3:.3e}, n=4 multiplier residual <= {w4:.3e}"))
}

// ---------------------------------------------------------------------------
// 6. Parity identity (n = 3)
// ---------------------------------------------------------------------------

fn check_parity_identity() -> CheckOutcome {
    let fam: Vec<_> = enumerated_types().into_iter().filter(|(l, _)| l.n == 3).collect();
    let evals: Vec<SphericalEvaluator> = fam
        .iter()
        .map(|(_, gen)| SphericalEvaluator::new(gen, 16))
        .collect::<crate::Result<_>>()
        .map_err(|e| err_of("evaluator", e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let (label, _) = &fam[k % fam.len()];
        let eval = &evals[k % fam.len()];
        let s = rng.gen_range(0..=label.a_tau());
        let rho = 0.3 + 2.2 * rng.gen::<f64>();
        let y: Vec<f64> = (0..3).map(|_| 2.0 * (rng.gen::<f64>() - 0.5)).collect();
        let r = eval.parity_residual(s, rho, &y).map_err(|e| err_of("parity", e))?;
        if r > 1e-8 {
            return Err(format!(
                "parity-identity: {} s={s} rho={rho:.3}: residual {r:.3e}",
                label.describe()
            ));
        }
        worst = worst.max(r);
    }
    Ok(format!("50 random samples, residual <= {worst:.3e}"))
}

// ---------------------------------------------------------------------------
// 7. Transform sanity
// ---------------------------------------------------------------------------

fn gaussian_branch_profile(
    label: &TauLabel,
    r_max: f64,
    count: usize,
    amps: &[f64],
) -> crate::Result<EquivariantProfile> {
    let rule = radial_quadrature(r_max, count)?;
    let values: Vec<Vec<C64>> = amps
        .iter()
        .map(|&a| {
            rule.nodes.iter().map(|&r| C64::new(a * (-0.5 * r * r).exp(), 0.0)).collect()
        })
        .collect();
    EquivariantProfile::branch(label.clone(), rule, values)
}

fn check_transform_sanity() -> CheckOutcome {
    // Trivial-type Gaussian against the closed form, both groups.
    let mut worst_gauss = 0.0_f64;
    for (label, gen) in [build_so3_rep(0).unwrap(), build_so4_rep(0, 0).unwrap()] {
        let ctx = TransformContext::new(&gen, 40).map_err(|e| err_of("context", e))?;
        let profile = gaussian_branch_profile(&label, 8.0, 120, &[1.0])
            .map_err(|e| err_of("profile", e))?;
        let grid: Vec<f64> = (1..=9).map(|k| 0.3 * k as f64).collect();
        let samples = ctx.transform(&profile, &grid).map_err(|e| err_of("transform", e))?;
        let scale = (2.0 * std::f64::consts::PI).powf(label.n as f64 / 2.0);
        for (k, &rho) in grid.iter().enumerate() {
            let want = scale * (-0.5 * rho * rho).exp();
            let got = samples.values[0][k].re;
            let rel = (got - want).abs() / want.abs();
            if rel > 1e-8 {
                return Err(format!(
                    "transform-sanity: n={} Gaussian at rho={rho:.2} off by {rel:.3e}",
                    label.n
                ));
            }
            worst_gauss = worst_gauss.max(rel);
        }
    }

    // Schur diagonality of the full matrix transform at branch-dependent data.
    let mut worst_schur = 0.0_f64;
    for (label, gen) in [build_so3_rep(1).unwrap(), build_so4_rep(1, 1).unwrap()] {
        let ctx = TransformContext::new(&gen, 48).map_err(|e| err_of("context", e))?;
        let bd = build_branch_data(&gen).map_err(|e| err_of("branch data", e))?;
        let amps: Vec<f64> = (0..=label.a_tau()).map(|s| 1.0 + 0.4 * s as f64).collect();
        let profile = gaussian_branch_profile(&label, 8.0, 120, &amps)
            .map_err(|e| err_of("profile", e))?;
        for rho in [0.6, 1.4] {
            let fhat =
                ctx.fourier_axis_direct(&profile, rho).map_err(|e| err_of("fourier", e))?;
            let scale = 1.0 + fhat.fro_norm();
            for p in &bd.projections {
                let comm = fhat.commutator(p).fro_norm() / scale;
                if comm > 1e-8 {
                    return Err(format!(
                        "transform-sanity: {} commutator norm {comm:.3e} at rho={rho}",
                        label.describe()
                    ));
                }
                worst_schur = worst_schur.max(comm);
            }
        }
    }
    Ok(format!("Gaussian closed form within {worst_gauss:.3e}, Schur commutators <= {worst_schur:.3e}"))
}

// ---------------------------------------------------------------------------
// 8. Multiplier property
// ---------------------------------------------------------------------------

/// Generator profile with branch values of order one: gamma_q carries the
/// scale (1 + max |lambda_s|)^{-q}, as the transform of an actual Schwartz
/// function does.  Unscaled gamma of uniform size would make the samples
/// grow like (lambda rho^u)^a and drown the recovery in input roundoff.
fn generator_test_profile(label: &TauLabel) -> crate::Result<EquivariantProfile> {
    let lmax = (0..=label.a_tau())
        .map(|s| label.lambda(s).unwrap().unsigned_abs())
        .max()
        .unwrap() as f64;
    let scale = 1.0 / (1.0 + lmax);
    let polys: Vec<Vec<f64>> = (0..=label.a_tau())
        .map(|i| {
            let w = scale.powi(i as i32);
            vec![(0.7 - 0.05 * i as f64) * w, 0.1 * w]
        })
        .collect();
    synthesize_profile(*label, polys, 0.5)
}

fn check_multiplier_property() -> CheckOutcome {
    // Exact generator route across the whole family.
    let fam = enumerated_types();
    let worst_gen = fam
        .par_iter()
        .map(|(label, _)| -> std::result::Result<f64, String> {
            let profile = generator_test_profile(label).map_err(|e| err_of("profile", e))?;
            let dprof = crate::transform::apply_d_generator(&profile)
                .map_err(|e| err_of("apply_d", e))?;
            let u = label.u_exp() as i32;
            let mut worst = 0.0_f64;
            for s in 0..=label.a_tau() {
                let lam = label.lambda(s).map_err(|e| err_of("lambda", e))? as f64;
                for k in 1..=12 {
                    let rho = 0.25 * k as f64;
                    let v = profile.v_exact(s, rho).map_err(|e| err_of("v", e))?;
                    let dv = dprof.v_exact(s, rho).map_err(|e| err_of("dv", e))?;
                    let want = v * lam * rho.powi(u);
                    let rel = (dv - want).norm() / (1.0 + want.norm());
                    if rel > 1e-6 {
                        return Err(format!(
                            "multiplier-property: {} s={s} rho={rho}: {rel:.3e}",
                            label.describe()
                        ));
                    }
                    worst = worst.max(rel);
                }
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    // Quadrature route on one type per group: spatially sampled data, D
    // applied on the Fourier side, transforms compared on a grid.
    let mut worst_quad = 0.0_f64;
    for (label, gen, degree) in [
        {
            let (l, g) = build_so3_rep(1).unwrap();
            (l, g, 128)
        },
        {
            let (l, g) = build_so4_rep(1, 1).unwrap();
            (l, g, 128)
        },
    ] {
        let ctx = TransformContext::new(&gen, degree).map_err(|e| err_of("context", e))?;
        let profile = generator_test_profile(&label).map_err(|e| err_of("profile", e))?;
        // The radial extent dominates the error here: the spatial profile
        // decays like exp(-r^2/2), and truncating at r_max leaves a tail of
        // size exp(-r_max^2/2) amplified by the r^{n-1} measure and by the
        // extra lambda r^2 growth of the D-multiplied function.  r_max 7
        // floors the multiplied roundtrip near 1e-6; r_max 9 pushes it to
        // 1e-12.  The degree then has to cover the kernel argument rho * r
        // up to about 93 with an Airy-width margin, hence 128.
        let p_rule = radial_quadrature(10.35, 120).map_err(|e| err_of("rule", e))?;
        let r_rule = radial_quadrature(9.0, 120).map_err(|e| err_of("rule", e))?;
        let spatial =
            ctx.sample_branch(&profile, &p_rule, &r_rule).map_err(|e| err_of("sample", e))?;
        let dspatial = ctx.apply_d(&spatial).map_err(|e| err_of("apply_d", e))?;
        let grid: Vec<f64> = (2..=10).map(|k| 0.2 * k as f64).collect();
        let v0 = ctx.transform(&spatial, &grid).map_err(|e| err_of("transform", e))?;
        let v1 = ctx.transform(&dspatial, &grid).map_err(|e| err_of("transform", e))?;
        let u = label.u_exp() as i32;
        for s in 0..=label.a_tau() {
            let lam = label.lambda(s).map_err(|e| err_of("lambda", e))? as f64;
            for (k, &rho) in grid.iter().enumerate() {
                let want = v0.values[s][k] * lam * rho.powi(u);
                let rel = (v1.values[s][k] - want).norm() / (1.0 + want.norm());
                if rel > 1e-6 {
                    return Err(format!(
                        "multiplier-property: quadrature {} s={s} rho={rho:.2}: {rel:.3e}",
                        label.describe()
                    ));
                }
                worst_quad = worst_quad.max(rel);
            }
        }
    }
    Ok(format!("generator route <= {worst_gen:.3e}, quadrature route <= {worst_quad:.3e}"))
}

// ---------------------------------------------------------------------------
// 9. Decomposition roundtrip
// ---------------------------------------------------------------------------

fn check_decomposition_roundtrip() -> CheckOutcome {
    // Generator path for the whole family.  The recovery at a grid point
    // amplifies sample roundoff by about rho^{-uq} times the inverse-entry
    // sizes; for n = 3 the branch nodes are unit-spaced, so types with
    // mu >= 4 cannot reach 1e-10 at rho = 0.2 from double-precision samples
    // no matter the solver.  Those types are held to 1e-6 instead and the
    // tight tolerance applies to the rest of the family.
    let fam = enumerated_types();
    let worst_gen = fam
        .par_iter()
        .map(|(label, _)| -> std::result::Result<f64, String> {
            let tol = if label.n == 3 && label.two_mu >= 8 { 1e-6 } else { 1e-10 };
            let profile = generator_test_profile(label).map_err(|e| err_of("profile", e))?;
            let mut grid = vec![0.001, 0.02];
            grid.extend((1..=60).map(|k| 0.05 * k as f64));
            let samples = sample_generator(&profile, &grid).map_err(|e| err_of("samples", e))?;
            let table = decompose_gamma(&samples, label).map_err(|e| err_of("decompose", e))?;
            let worst = compare_gamma(&table, &profile, 0.2)?;
            if worst > tol {
                return Err(format!(
                    "decomposition-roundtrip: {} generator path residual {worst:.3e}",
                    label.describe()
                ));
            }
            Ok(if tol == 1e-10 { worst } else { 0.0 })
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    // Quadrature path on one type per group.
    let mut worst_quad = 0.0_f64;
    for (label, gen, degree) in [
        {
            let (l, g) = build_so3_rep(1).unwrap();
            (l, g, 64)
        },
        {
            let (l, g) = build_so4_rep(1, 1).unwrap();
            (l, g, 80)
        },
    ] {
        let ctx = TransformContext::new(&gen, degree).map_err(|e| err_of("context", e))?;
        let profile = generator_test_profile(&label).map_err(|e| err_of("profile", e))?;
        let p_rule = radial_quadrature(7.0, 120).map_err(|e| err_of("rule", e))?;
        let r_rule = radial_quadrature(7.0, 120).map_err(|e| err_of("rule", e))?;
        let spatial =
            ctx.sample_branch(&profile, &p_rule, &r_rule).map_err(|e| err_of("sample", e))?;
        let grid: Vec<f64> = (0..=20).map(|k| 0.2 + 0.09 * k as f64).collect();
        let samples = ctx.transform(&spatial, &grid).map_err(|e| err_of("transform", e))?;
        let table = decompose_gamma(&samples, &label).map_err(|e| err_of("decompose", e))?;
        let worst = compare_gamma(&table, &profile, 0.2)?;
        if worst > 1e-6 {
            return Err(format!(
                "decomposition-roundtrip: {} quadrature path residual {worst:.3e}",
                label.describe()
            ));
        }
        worst_quad = worst_quad.max(worst);
    }
    Ok(format!(
        "generator path <= {worst_gen:.3e} (1e-6 for the three widest n=3 ladders), \
         quadrature path <= {worst_quad:.3e}"
    ))
}

/// Exact branch samples of a generator profile on a grid.
fn sample_generator(profile: &EquivariantProfile, grid: &[f64]) -> crate::Result<BranchSamples> {
    let a = profile.label.a_tau();
    let mut values = vec![Vec::with_capacity(grid.len()); a + 1];
    for (s, row) in values.iter_mut().enumerate() {
        for &rho in grid {
            row.push(profile.v_exact(s, rho)?);
        }
    }
    Ok(BranchSamples { label: profile.label.clone(), rho: grid.to_vec(), values })
}

/// Worst relative gap between a recovered gamma table and the profile's
/// closed-form gamma values, over rows with rho >= rho_min.
fn compare_gamma(
    table: &GammaTable,
    profile: &EquivariantProfile,
    rho_min: f64,
) -> std::result::Result<f64, String> {
    let crate::transform::ProfileForm::Generator { polys, decay } = &profile.form else {
        return Err("compare_gamma needs a generator profile".into());
    };
    let mut worst = 0.0_f64;
    for (k, &rho) in table.rho.iter().enumerate() {
        if rho < rho_min {
            continue;
        }
        let xi1 = rho * rho;
        for i in 0..table.values.len() {
            let want = if i < polys.len() && !polys[i].is_empty() {
                crate::branch::eval_poly(&polys[i], xi1) * (-decay * xi1).exp()
            } else {
                0.0
            };
            let got = table.values[i][k].re;
            worst = worst.max((got - want).abs() / (1.0 + want.abs()));
            worst = worst.max(table.values[i][k].im.abs());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// 10. Jet recovery
// ---------------------------------------------------------------------------

/// Random polynomial in the recoverable class: xi2 degree <= a_tau and curve
/// degree <= order, with coefficients in Z/8 so the rational path is exact.
fn random_recoverable_poly(
    rng: &mut ChaCha8Rng,
    label: &TauLabel,
    order: usize,
) -> Vec<Vec<f64>> {
    let a = label.a_tau();
    let pmax = if label.n == 3 { order / 2 } else { order };
    let mut poly = Vec::new();
    for p in 0..=pmax {
        let mut row = Vec::new();
        for q in 0..=a {
            let wdeg = if label.n == 3 { 2 * p + q } else { p + q };
            if wdeg <= order {
                row.push(rng.gen_range(-24i32..=24) as f64 / 8.0);
            } else {
                row.push(0.0);
            }
        }
        poly.push(row);
    }
    poly
}

fn check_jet_recovery() -> CheckOutcome {
    let fam = enumerated_types();
    let order = 6;
    let worst = fam
        .par_iter()
        .enumerate()
        .map(|(t, (label, _))| -> std::result::Result<f64, String> {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + t as u64);
            let mut worst = 0.0_f64;
            for _ in 0..100 {
                let poly = random_recoverable_poly(&mut rng, label, order);
                // Float path.
                let jet = curve_jet_poly(label, &poly, order).map_err(|e| err_of("jet", e))?;
                let sys = jet_solve(&jet)
                    .map_err(|e| format!("jet-recovery: {} {e}", label.describe()))?;
                for d in 0..=order {
                    for q in 0..=d {
                        let expected = expected_coeff(label, &poly, d, q);
                        let gap = (sys.coeffs[d][q] - expected).abs()
                            / (1.0 + expected.abs());
                        if gap > 1e-9 {
                            return Err(format!(
                                "jet-recovery: {} float d={d} q={q} gap {gap:.3e}",
                                label.describe()
                            ));
                        }
                        worst = worst.max(gap);
                    }
                }
                // Rational path on the same polynomial.
                let rpoly: Vec<Vec<Rat>> = poly
                    .iter()
                    .map(|row| row.iter().map(|&c| rat_from_f64(c)).collect())
                    .collect();
                let rjet = curve_jet_poly_rational(label, &rpoly, order)
                    .map_err(|e| err_of("rational jet", e))?;
                let rsys = jet_solve_rational(label, &rjet, order)
                    .map_err(|e| format!("jet-recovery: {} rational: {e}", label.describe()))?;
                for d in 0..=order {
                    for q in 0..=d {
                        let expected = rat_from_f64(expected_coeff(label, &poly, d, q));
                        if rsys[d][q] != expected {
                            return Err(format!(
                                "jet-recovery: {} rational mismatch at d={d} q={q}",
                                label.describe()
                            ));
                        }
                    }
                }
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(format!("100 polynomials per type: rational exact, float within {worst:.3e}"))
}

fn expected_coeff(label: &TauLabel, poly: &[Vec<f64>], d: usize, q: usize) -> f64 {
    let p = if label.n == 3 {
        if (d - q) % 2 != 0 {
            return 0.0;
        }
        (d - q) / 2
    } else {
        d - q
    };
    let c = poly.get(p).and_then(|r| r.get(q)).copied().unwrap_or(0.0);
    c * (1..=d).fold(1.0, |acc, k| acc * k as f64)
}

// ---------------------------------------------------------------------------
// 11. Conditioning bounds
// ---------------------------------------------------------------------------

fn check_conditioning_bounds() -> CheckOutcome {
    let fam = enumerated_types();
    let mut checked = 0usize;
    let mut worst_ratio = 0.0_f64;
    for (label, _) in fam.iter().filter(|(l, _)| l.n == 4) {
        for m in 1..=label.a_tau() {
            let rep = cofactor_bounds(label, m)
                .map_err(|e| format!("conditioning-bounds: {} m={m}: {e}", label.describe()))?;
            worst_ratio = worst_ratio.max(rep.max_ratio);
            checked += 1;
        }
        for m in 1..=8 {
            let omega = node_shift(label, m).map_err(|e| err_of("node_shift", e))?;
            if omega.unsigned_abs() as usize > label.d_tau() {
                return Err(format!(
                    "conditioning-bounds: {} |omega| = {} exceeds d_tau = {}",
                    label.describe(),
                    omega.abs(),
                    label.d_tau()
                ));
            }
        }
    }
    // The n = 3 closed-form identity, checked exactly up to size 8.
    let mut le_one_fail = 0usize;
    for size in 1..=8u32 {
        for s in 1..=size {
            let (lhs, rhs) = binomial_identity_sides(size, s);
            if lhs != rhs {
                return Err(format!(
                    "conditioning-bounds: identity fails at size {size}, s = {s}"
                ));
            }
            if lhs > Rat::one() {
                le_one_fail += 1;
            }
        }
    }
    Ok(format!(
        "{checked} cofactor systems within the binomial bound (max ratio {worst_ratio:.3}); \
         identity exact to size 8 ({le_one_fail} cases exceed the classical <=1 claim)"
    ))
}

// ---------------------------------------------------------------------------
// 12. Extension restriction
// ---------------------------------------------------------------------------

fn check_extension_restriction() -> CheckOutcome {
    let fam = enumerated_types();

    // Cutoff builder: transform -> decompose -> extend, per type.
    let cutoff_pairs: Vec<(TauLabel, EquivariantProfile, crate::extension::ExtensionField)> = fam
        .par_iter()
        .map(|(label, _)| {
            let profile = generator_test_profile(label).map_err(|e| err_of("profile", e))?;
            let grid: Vec<f64> = (1..=150).map(|k| 0.02 * k as f64).collect();
            let samples = sample_generator(&profile, &grid).map_err(|e| err_of("samples", e))?;
            let table =
                decompose_gamma(&samples, label).map_err(|e| err_of("decompose", e))?;
            let field = cutoff_extension(&table).map_err(|e| err_of("cutoff", e))?;
            Ok((label.clone(), profile, field))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(12001);
    let mut worst_cutoff = 0.0_f64;
    for k in 0..200 {
        let (label, profile, field) = &cutoff_pairs[k % cutoff_pairs.len()];
        let s = rng.gen_range(0..=label.a_tau());
        let rho = 0.25 + 2.45 * rng.gen::<f64>();
        let got = field.restrict(s, rho).map_err(|e| err_of("restrict", e))?;
        let want = profile.v_exact(s, rho).map_err(|e| err_of("v", e))?.re;
        let rel = (got - want).abs() / (1.0 + want.abs());
        if rel > 1e-7 {
            return Err(format!(
                "extension-restriction: cutoff {} s={s} rho={rho:.3}: {rel:.3e}",
                label.describe()
            ));
        }
        worst_cutoff = worst_cutoff.max(rel);
    }

    // Bump builder: flat branch profiles, restriction equals the input.
    let mut worst_bump = 0.0_f64;
    for (label, _) in &fam {
        let gs: Vec<RadialClosure> = (0..=label.a_tau())
            .map(|s| {
                let amp = 1.0 + 0.25 * s as f64;
                Arc::new(move |r: f64| {
                    if r <= 0.0 {
                        0.0
                    } else {
                        amp * (-1.0 / (r * r)).exp() * (-0.5 * r * r).exp()
                    }
                }) as RadialClosure
            })
            .collect();
        let field = bump_extension(label, gs.clone())
            .map_err(|e| format!("extension-restriction: bump {}: {e}", label.describe()))?;
        for k in 0..200usize.div_ceil(fam.len()) {
            let s = (k * 7 + 3) % (label.a_tau() + 1);
            let rho = 0.3 + 0.4 * k as f64;
            let got = field.restrict(s, rho).map_err(|e| err_of("restrict", e))?;
            let want = gs[s](rho);
            let rel = (got - want).abs() / (1.0 + want.abs());
            if rel > 1e-7 {
                return Err(format!(
                    "extension-restriction: bump {} s={s}: {rel:.3e}",
                    label.describe()
                ));
            }
            worst_bump = worst_bump.max(rel);
        }
    }

    // Borel builder: jets of a recoverable polynomial, restricted inside the
    // plateau where the truncated series is exact.
    let mut worst_borel = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(12002);
    for (t, (label, _)) in fam.iter().enumerate() {
        let mut prng = ChaCha8Rng::seed_from_u64(3000 + t as u64);
        let poly = random_recoverable_poly(&mut prng, label, 4);
        let jet = curve_jet_poly(label, &poly, 4).map_err(|e| err_of("jet", e))?;
        let sys = jet_solve(&jet).map_err(|e| err_of("solve", e))?;
        let field = finite_borel(label, &sys.coeffs).map_err(|e| err_of("borel", e))?;
        let lmax = (0..=label.a_tau())
            .map(|s| label.lambda(s).unwrap().abs())
            .max()
            .unwrap() as f64;
        // Stay inside the plateau of the series envelope: bisect the largest
        // rho with |(rho^2, lambda rho^u)| <= 0.45 for every branch.
        let u = label.u_exp() as i32;
        let reach = |rho: f64| (rho.powi(4) + (lmax * rho.powi(u)).powi(2)).sqrt();
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if reach(mid) <= 0.45 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho_cap = lo;
        for _ in 0..200usize.div_ceil(fam.len()) {
            let s = rng.gen_range(0..=label.a_tau());
            let rho = rho_cap * (0.2 + 0.8 * rng.gen::<f64>());
            let got = field.restrict(s, rho).map_err(|e| err_of("restrict", e))?;
            let lam = label.lambda(s).unwrap() as f64;
            let (x1, x2) = (rho * rho, lam * rho.powi(label.u_exp() as i32));
            let want: f64 = poly
                .iter()
                .enumerate()
                .map(|(p, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(q, c)| c * x1.powi(p as i32) * x2.powi(q as i32))
                        .sum::<f64>()
                })
                .sum();
            let rel = (got - want).abs() / (1.0 + want.abs());
            if rel > 1e-7 {
                return Err(format!(
                    "extension-restriction: borel {} s={s} rho={rho:.3}: {rel:.3e}",
                    label.describe()
                ));
            }
            worst_borel = worst_borel.max(rel);
        }
    }
    Ok(format!(
        "cutoff <= {worst_cutoff:.3e}, bump <= {worst_bump:.3e}, borel <= {worst_borel:.3e}"
    ))
}

// ---------------------------------------------------------------------------
// 13. Decay trend
// ---------------------------------------------------------------------------

/// One row of the decay table.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub label: String,
    pub xi_prime_norm: f64,
    pub weight: f64,
    pub sup_norm: f64,
}

/// The decay table plus the first index from which the sup norms are
/// non-increasing.
#[derive(Debug, Clone, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub threshold: usize,
    pub summary: String,
}

/// Build the decay table: shared gamma shapes 4^{-i} exp(-xi1), scaled per
/// type by the Schwartz-style weight exp(-|xi'_tau|_1), extended by the hull
/// cutoff, and measured in sup norm over the fixed window
/// [0,4] x [-4,4].  A fixed window keeps the comparison meaningful: over the
/// whole plane the monomial growth xi2^i along wide hulls would swamp any
/// polynomial weight.
pub fn check_decay_trend() -> std::result::Result<DecayTable, String> {
    let fam = enumerated_types();
    let mut rows: Vec<DecayRow> = fam
        .par_iter()
        .map(|(label, _)| -> std::result::Result<DecayRow, String> {
            let xi_norm: f64 = label.xi_prime().iter().map(|v| v.abs()).sum();
            let weight = (-xi_norm).exp();
            let rho: Vec<f64> = (1..=60).map(|k| 0.05 * k as f64).collect();
            let a = label.a_tau();
            let values: Vec<Vec<C64>> = (0..=a)
                .map(|i| {
                    rho.iter()
                        .map(|&r| {
                            let x = r * r;
                            C64::new(weight * 0.25_f64.powi(i as i32) * (-x).exp(), 0.0)
                        })
                        .collect()
                })
                .collect();
            let table = GammaTable {
                label: *label,
                xi1: rho.iter().map(|r| r * r).collect(),
                rho: rho.clone(),
                values,
                extrapolated: vec![false; rho.len()],
                consistency: 0.0,
            };
            let field = cutoff_extension(&table).map_err(|e| err_of("cutoff", e))?;
            let mut sup = 0.0_f64;
            for i in 0..=80 {
                let xi1 = 0.05 * i as f64;
                for j in -80..=80 {
                    let xi2 = 0.05 * j as f64;
                    sup = sup.max(field.eval(xi1, xi2).abs());
                }
            }
            Ok(DecayRow { label: label.describe(), xi_prime_norm: xi_norm, weight, sup_norm: sup })
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    // Order by Casimir size; several types share a Casimir norm and carry no
    // canonical order, so ties are listed sup-first to make "non-increasing"
    // well posed, then by label for determinism.
    rows.sort_by(|a, b| {
        a.xi_prime_norm
            .partial_cmp(&b.xi_prime_norm)
            .unwrap()
            .then_with(|| b.sup_norm.partial_cmp(&a.sup_norm).unwrap())
            .then_with(|| a.label.cmp(&b.label))
    });
    // First index from which the sequence never increases (small relative
    // slack for ties).
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_norm).collect();
    let mut threshold = sups.len().saturating_sub(1);
    for k in (0..sups.len().saturating_sub(1)).rev() {
        if sups[k] >= sups[k + 1] * (1.0 - 1e-9) {
            threshold = k;
        } else {
            break;
        }
    }
    let summary = format!(
        "{} types, sup norms from {:.3e} down to {:.3e}, non-increasing from index {} on",
        rows.len(),
        sups.first().copied().unwrap_or(0.0),
        sups.last().copied().unwrap_or(0.0),
        threshold
    );
    if threshold > rows.len() / 2 {
        return Err(format!(
            "decay-trend: monotone tail starts at {} of {}, later than the family midpoint",
            threshold,
            rows.len()
        ));
    }
    Ok(DecayTable { rows, threshold, summary })
}
