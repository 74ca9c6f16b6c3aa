//! The nine verbs.  Each one resolves its settings, runs the library, and
//! returns a [`Table`]; verbs that assert (oracle, verify) also return
//! whether everything passed so main can set the exit status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use motion_spherical::cmatrix::C64;
use motion_spherical::extension::{
    bump_extension, cofactor_bounds, curve_jet_poly, curve_jet_sampled, cutoff_extension,
    finite_borel, jet_solve, CurveJet, ExtensionField, RadialClosure,
};
use motion_spherical::numerics::radial_quadrature;
use motion_spherical::oracle::{
    binomial_identity_sides, polynomial_model_eigenvalue, rational_branch_check,
};
use motion_spherical::reps::TauLabel;
use motion_spherical::transform::{
    decompose_gamma, synthesize_profile, BranchSamples, EquivariantProfile, TransformContext,
};
use motion_spherical::spherical::SphericalEvaluator;
use motion_spherical::verify::{check_name, enumerated_types, run_suite, CHECK_IDS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::settings::Settings;
use crate::svg::write_field_svg;
use crate::table::{Cell, Table};

// ---------------------------------------------------------------------------
// shared pieces
// ---------------------------------------------------------------------------

/// Series degree needed for the kernel at argument t, with the margin that
/// keeps the tail below roundoff (the transition zone scales like t^{1/3}).
fn kernel_degree_needed(t: f64) -> usize {
    (t + 4.0 * t.cbrt()).ceil() as usize
}

fn guard_degree(degree: usize, t: f64, what: &str) -> Result<()> {
    let need = kernel_degree_needed(t);
    if degree < need {
        bail!(
            "kernel series range violated: {what} reaches argument {t:.1}, \
             which needs --quad-degree >= {need} (got {degree})"
        );
    }
    Ok(())
}

/// Parse `--gamma "c0,c1;c0,c1,..."` into per-power coefficient rows.
fn parse_gamma(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut polys = Vec::new();
    for (i, chunk) in text.split(';').enumerate() {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            polys.push(Vec::new());
            continue;
        }
        let row: Vec<f64> = chunk
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("--gamma row {i}: {c:?} is not a number"))
            })
            .collect::<Result<_>>()?;
        polys.push(row);
    }
    Ok(polys)
}

/// Default generator data: branch values of order one for every type, the
/// same shape the library's own tests use (gamma_i carries the scale
/// (1 + max |lambda|)^{-i}, as the transform of a Schwartz function does).
fn default_gamma(label: &TauLabel) -> Vec<Vec<f64>> {
    let lmax = (0..=label.a_tau())
        .map(|s| label.lambda(s).unwrap().unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    let scale = 1.0 / (1.0 + lmax);
    (0..=label.a_tau())
        .map(|i| {
            let w = scale.powi(i as i32);
            vec![(0.7 - 0.05 * i as f64) * w, 0.1 * w]
        })
        .collect()
}

fn profile_from_flags(
    label: TauLabel,
    gamma: Option<&str>,
    decay: f64,
) -> Result<EquivariantProfile> {
    let polys = match gamma {
        Some(text) => parse_gamma(text)?,
        None => default_gamma(&label),
    };
    Ok(synthesize_profile(label, polys, decay)?)
}

/// Exact transform samples of a generator profile on a grid.
fn exact_samples(profile: &EquivariantProfile, grid: &[f64]) -> Result<BranchSamples> {
    let label = profile.label;
    let mut values = vec![vec![C64::new(0.0, 0.0); grid.len()]; label.a_tau() + 1];
    for (s, row) in values.iter_mut().enumerate() {
        for (k, &rho) in grid.iter().enumerate() {
            row[k] = profile.v_exact(s, rho)?;
        }
    }
    Ok(BranchSamples { label, rho: grid.to_vec(), values })
}

// ---------------------------------------------------------------------------
// eigs / spectrum / phi
// ---------------------------------------------------------------------------

pub fn eigs(st: &Settings) -> Result<Table> {
    let label = st.tau()?;
    let mut t = Table::new(&["s", "lambda", "weight_dim"])
        .with_meta("label", label.describe().into());
    for s in 0..=label.a_tau() {
        t.push(vec![
            Cell::Int(s as i64),
            Cell::Int(label.lambda(s)?),
            Cell::Int(label.weight_dim(s)? as i64),
        ]);
    }
    Ok(t)
}

pub fn spectrum(st: &Settings) -> Result<Table> {
    let label = st.tau()?;
    let u = label.u_exp() as i32;
    let mut t =
        Table::new(&["xi1", "xi2"]).with_meta("label", label.describe().into());
    for rho in st.rho_grid() {
        for s in 0..=label.a_tau() {
            let lam = label.lambda(s)? as f64;
            t.push(vec![Cell::Float(rho * rho), Cell::Float(lam * rho.powi(u))]);
        }
    }
    Ok(t)
}

pub fn phi(st: &Settings, samples: usize) -> Result<Table> {
    let (label, gen) = st.rep()?;
    let s = st.branch(&label)?;
    let rho = st.rho.unwrap_or(1.0);
    if samples < 2 {
        bail!("--samples must be at least 2");
    }
    guard_degree(st.quad_degree, rho * st.radial_r, "phi on the radial grid")?;
    let eval = SphericalEvaluator::new(&gen, st.quad_degree)?;
    let d = label.d_tau();
    let mut t = Table::new(&["r", "i", "j", "re", "im"])
        .with_meta("label", label.describe().into())
        .with_meta("s", (s as i64).into())
        .with_meta("rho", rho.into());
    for k in 0..samples {
        let r = k as f64 * st.radial_r / (samples - 1) as f64;
        let mut y = vec![0.0; label.n];
        y[0] = r;
        let m = eval.phi(s, rho, &y)?;
        for j in 0..d {
            let col = m.column(j);
            for (i, v) in col.iter().enumerate() {
                t.push(vec![
                    Cell::Float(r),
                    Cell::Int(i as i64),
                    Cell::Int(j as i64),
                    Cell::Float(v.re),
                    Cell::Float(v.im),
                ]);
            }
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// transform / decompose
// ---------------------------------------------------------------------------

pub enum Route {
    Exact,
    Quadrature,
}

pub fn transform(
    st: &Settings,
    gamma: Option<&str>,
    decay: f64,
    route: Route,
) -> Result<Table> {
    let (label, gen) = st.rep()?;
    let profile = profile_from_flags(label, gamma, decay)?;
    let grid = st.rho_grid();
    let samples = match route {
        Route::Exact => exact_samples(&profile, &grid)?,
        Route::Quadrature => {
            // The spatial samples come from the inverse reduction over a
            // slightly larger Fourier extent; its kernel argument is what
            // limits the series degree.
            let p_extent = 1.15 * st.radial_r;
            guard_degree(st.quad_degree, p_extent * st.radial_r, "the inverse reduction")?;
            let ctx = TransformContext::new(&gen, st.quad_degree)?;
            let r_rule = radial_quadrature(st.radial_r, 120)?;
            let p_rule = radial_quadrature(p_extent, 120)?;
            let spatial = ctx.sample_branch(&profile, &p_rule, &r_rule)?;
            ctx.transform(&spatial, &grid)?
        }
    };
    let mut t = Table::new(&["s", "rho", "re", "im"])
        .with_meta("label", label.describe().into());
    for s in 0..samples.values.len() {
        for (k, &rho) in samples.rho.iter().enumerate() {
            let v = samples.values[s][k];
            t.push(vec![
                Cell::Int(s as i64),
                Cell::Float(rho),
                Cell::Float(v.re),
                Cell::Float(v.im),
            ]);
        }
    }
    Ok(t)
}

/// Branch samples read back from a `transform` artifact (columns s,rho,re,im).
fn read_samples(path: &Path, label: TauLabel) -> Result<BranchSamples> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading samples {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("samples file lacks a {name:?} column"))
    };
    let (ci_s, ci_rho, ci_re, ci_im) = (idx("s")?, idx("rho")?, idx("re")?, idx("im")?);
    // group by exact rho bit pattern, keeping first-seen order
    let mut order: Vec<f64> = Vec::new();
    let mut by_rho: BTreeMap<u64, Vec<(usize, C64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let s: usize = record[ci_s].parse()?;
        let rho: f64 = record[ci_rho].parse()?;
        let v = C64::new(record[ci_re].parse()?, record[ci_im].parse()?);
        let key = rho.to_bits();
        if !by_rho.contains_key(&key) {
            order.push(rho);
        }
        by_rho.entry(key).or_default().push((s, v));
    }
    let a = label.a_tau();
    let mut values = vec![vec![C64::new(0.0, 0.0); order.len()]; a + 1];
    for (k, &rho) in order.iter().enumerate() {
        let entries = &by_rho[&rho.to_bits()];
        let mut seen = vec![false; a + 1];
        for &(s, v) in entries {
            if s > a {
                bail!("samples file: branch {s} is outside 0..={a} for {}", label.describe());
            }
            values[s][k] = v;
            seen[s] = true;
        }
        if let Some(missing) = seen.iter().position(|&b| !b) {
            bail!("samples file: rho = {rho} lacks branch {missing}");
        }
    }
    Ok(BranchSamples { label, rho: order, values })
}

pub fn decompose(
    st: &Settings,
    input: Option<&Path>,
    gamma: Option<&str>,
    decay: f64,
) -> Result<Table> {
    let label = st.tau()?;
    let samples = match input {
        Some(path) => read_samples(path, label)?,
        None => {
            let profile = profile_from_flags(label, gamma, decay)?;
            exact_samples(&profile, &st.rho_grid())?
        }
    };
    let table = decompose_gamma(&samples, &label)?;
    if table.consistency > st.tol {
        bail!(
            "decomposition consistency: extrapolated rows disagree with their \
             reconstruction by {:.3e}, over --tol {:.1e}",
            table.consistency,
            st.tol
        );
    }
    let mut t = Table::new(&["i", "rho", "xi1", "re", "im", "extrapolated"])
        .with_meta("label", label.describe().into())
        .with_meta("consistency", table.consistency.into());
    for i in 0..table.values.len() {
        for (k, &rho) in table.rho.iter().enumerate() {
            let v = table.values[i][k];
            t.push(vec![
                Cell::Int(i as i64),
                Cell::Float(rho),
                Cell::Float(table.xi1[k]),
                Cell::Float(v.re),
                Cell::Float(v.im),
                Cell::Bool(table.extrapolated[k]),
            ]);
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// extend
// ---------------------------------------------------------------------------

pub struct ExtendOpts<'a> {
    pub builder: &'a str,
    pub gamma: Option<&'a str>,
    pub decay: f64,
    pub xi1_max: Option<f64>,
    pub xi2_max: Option<f64>,
    pub samples: usize,
    pub jet_in: Option<&'a Path>,
    pub svg: Option<&'a Path>,
}

fn build_extension(st: &Settings, label: TauLabel, opts: &ExtendOpts) -> Result<ExtensionField> {
    match opts.builder {
        "cutoff" => {
            let profile = profile_from_flags(label, opts.gamma, opts.decay)?;
            let grid = st.rho_grid();
            if grid.len() < 4 {
                bail!("the cutoff builder needs a rho grid with at least 4 points");
            }
            let samples = exact_samples(&profile, &grid)?;
            let gt = decompose_gamma(&samples, &label)?;
            Ok(cutoff_extension(&gt)?)
        }
        "bump" => {
            let gs: Vec<RadialClosure> = (0..=label.a_tau())
                .map(|s| {
                    let amp = 1.0 + s as f64 / 4.0;
                    let g: RadialClosure = std::sync::Arc::new(move |r: f64| {
                        if r <= 0.0 {
                            0.0
                        } else {
                            amp * (-1.0 / (r * r)).exp() * (-0.5 * r * r).exp()
                        }
                    });
                    g
                })
                .collect();
            Ok(bump_extension(&label, gs)?)
        }
        "borel" => {
            let coeffs = match opts.jet_in {
                Some(path) => read_jet_coeffs(path)?,
                None => {
                    // order-2 jet of the polynomial 1 + xi2
                    let jet = curve_jet_poly(&label, &[vec![1.0, 1.0]], 2)?;
                    jet_solve(&jet)?.coeffs
                }
            };
            Ok(finite_borel(&label, &coeffs)?)
        }
        other => bail!("unknown builder {other:?}: expected cutoff, bump or borel"),
    }
}

/// Jet coefficients from a `jet` artifact (columns d,q,value; rows may be
/// sparse, missing entries are zero).
fn read_jet_coeffs(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading jet coefficients {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("jet file lacks a {name:?} column"))
    };
    let (ci_d, ci_q, ci_v) = (idx("d")?, idx("q")?, idx("value")?);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut order = 0usize;
    for record in reader.records() {
        let record = record?;
        let d: usize = record[ci_d].parse()?;
        let q: usize = record[ci_q].parse()?;
        if q > d {
            bail!("jet file: q = {q} exceeds its curve degree d = {d}");
        }
        order = order.max(d);
        entries.push((d, q, record[ci_v].parse()?));
    }
    let mut coeffs: Vec<Vec<f64>> = (0..=order).map(|d| vec![0.0; d + 1]).collect();
    for (d, q, v) in entries {
        coeffs[d][q] = v;
    }
    Ok(coeffs)
}

pub fn extend(st: &Settings, opts: &ExtendOpts) -> Result<Table> {
    let label = st.tau()?;
    let field = build_extension(st, label, opts)?;
    let u = label.u_exp() as i32;
    let lmax = (0..=label.a_tau())
        .map(|s| label.lambda(s).unwrap().unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    let xi1_max = opts.xi1_max.unwrap_or(st.rho_max * st.rho_max);
    let xi2_max = opts.xi2_max.unwrap_or((lmax + 1.0) * st.rho_max.powi(u));
    if opts.samples < 2 {
        bail!("--samples must be at least 2");
    }
    let m = opts.samples;
    let xs: Vec<f64> = (0..m).map(|k| k as f64 * xi1_max / (m - 1) as f64).collect();
    let ys: Vec<f64> =
        (0..m).map(|k| -xi2_max + 2.0 * xi2_max * k as f64 / (m - 1) as f64).collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![0.0; ys.len()]; xs.len()];
    let mut t = Table::new(&["xi1", "xi2", "value"])
        .with_meta("label", label.describe().into())
        .with_meta("builder", opts.builder.into());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = field.eval(x, y);
            grid[i][j] = v;
            t.push(vec![Cell::Float(x), Cell::Float(y), Cell::Float(v)]);
        }
    }
    if let Some(path) = opts.svg {
        let title = format!("{} extension, {}", opts.builder, label.describe());
        write_field_svg(path, &xs, &ys, &grid, &title)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// jet
// ---------------------------------------------------------------------------

pub struct JetOpts<'a> {
    pub input: Option<&'a Path>,
    pub synthetic: bool,
    pub order: usize,
    pub h: f64,
}

/// Branch restriction samples psi_s(t) from a CSV with columns s,t,value.
/// The stencil needs t = j * h/2 for j = 0..=2*(order+6), every branch.
fn read_branch_samples(
    path: &Path,
    label: &TauLabel,
    order: usize,
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading branch samples {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("branch sample file lacks a {name:?} column"))
    };
    let (ci_s, ci_t, ci_v) = (idx("s")?, idx("t")?, idx("value")?);
    let a = label.a_tau();
    let jmax = 2 * (order + 6);
    let step = 0.5 * h;
    let tol = 1e-6 * h;
    let mut grids = vec![vec![f64::NAN; jmax + 1]; a + 1];
    for record in reader.records() {
        let record = record?;
        let s: usize = record[ci_s].parse()?;
        if s > a {
            bail!("branch sample file: branch {s} outside 0..={a} for {}", label.describe());
        }
        let t: f64 = record[ci_t].parse()?;
        let j = (t / step).round();
        if (t - j * step).abs() > tol || j < 0.0 {
            continue; // off-stencil point, harmless
        }
        let j = j as usize;
        if j <= jmax {
            grids[s][j] = record[ci_v].parse()?;
        }
    }
    for (s, row) in grids.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| v.is_nan()) {
            bail!(
                "branch sample file: branch {s} lacks t = {} (the stencil needs \
                 t = j*h/2 for j = 0..={jmax} with h = {h})",
                j as f64 * step
            );
        }
    }
    Ok(grids)
}

/// Random polynomial with only recoverable monomials (curve degree <= order,
/// xi2 power <= a_tau), dyadic coefficients so the jet is exact in floats.
fn random_poly(label: &TauLabel, order: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = label.a_tau();
    let pmax = if label.n == 3 { order / 2 } else { order };
    let mut poly = vec![vec![0.0; a + 1]; pmax + 1];
    for (p, row) in poly.iter_mut().enumerate() {
        for (q, c) in row.iter_mut().enumerate() {
            let deg = if label.n == 3 { 2 * p + q } else { p + q };
            if deg <= order {
                *c = rng.gen_range(-24i32..=24) as f64 / 8.0;
            }
        }
    }
    poly
}

pub fn jet(st: &Settings, opts: &JetOpts) -> Result<Table> {
    let label = st.tau()?;
    if opts.order > 12 {
        bail!("--order is capped at 12 by the stencil budget");
    }
    let (jet, mode): (CurveJet, &str) = match (opts.input, opts.synthetic) {
        (Some(path), false) => {
            let grids = read_branch_samples(path, &label, opts.order, opts.h)?;
            let step = 0.5 * opts.h;
            let f = move |s: usize, t: f64| -> f64 {
                let j = (t / step).round() as usize;
                grids[s][j]
            };
            (curve_jet_sampled(&label, &f, opts.order, opts.h)?, "sampled")
        }
        (None, true) => {
            let poly = random_poly(&label, opts.order, st.seed);
            (curve_jet_poly(&label, &poly, opts.order)?, "synthetic")
        }
        (Some(_), true) => bail!("--in and --synthetic are mutually exclusive"),
        (None, false) => bail!("jet needs either --in <samples.csv> or --synthetic"),
    };
    let system = jet_solve(&jet)?;
    if system.residual > st.tol {
        bail!(
            "jet surplus residual {:.3e} exceeds --tol {:.1e}",
            system.residual,
            st.tol
        );
    }
    let mut t = Table::new(&["d", "q", "p", "value"])
        .with_meta("label", label.describe().into())
        .with_meta("mode", mode.into())
        .with_meta("order", (opts.order as i64).into())
        .with_meta("residual", system.residual.into());
    for (d, row) in system.coeffs.iter().enumerate() {
        for (q, &v) in row.iter().enumerate() {
            // n=3 curve degrees of mismatched parity carry no monomial
            let p = if label.n == 3 {
                if (d - q) % 2 != 0 {
                    continue;
                }
                (d - q) / 2
            } else {
                d - q
            };
            t.push(vec![
                Cell::Int(d as i64),
                Cell::Int(q as i64),
                Cell::Int(p as i64),
                Cell::Float(v),
            ]);
        }
    }
    eprintln!(
        "jet solved: {} mode, order {}, surplus residual {:.3e}",
        mode, opts.order, system.residual
    );
    Ok(t)
}

// ---------------------------------------------------------------------------
// oracle / verify
// ---------------------------------------------------------------------------

fn oracle_one(label: &TauLabel, rows: &mut Table) -> bool {
    let mut ok = true;
    let mut push = |check: &str, status: bool, detail: String| {
        ok &= status;
        rows.push(vec![
            Cell::Text(check.to_string()),
            Cell::Text(label.describe()),
            Cell::Text(if status { "pass".into() } else { "FAIL".into() }),
            Cell::Text(detail),
        ]);
    };
    match rational_branch_check(label) {
        Ok(()) => push("branch-spectrum", true, "exact".into()),
        Err(e) => push("branch-spectrum", false, e.to_string()),
    }
    if label.n == 4 {
        let mut bad = None;
        for s in 0..=label.a_tau() {
            let model = polynomial_model_eigenvalue(label.two_nu, label.two_mu, s);
            match (model, label.lambda(s)) {
                (Ok(m), Ok(l)) if m == l => {}
                (m, l) => {
                    bad = Some(format!("s={s}: model {m:?} vs closed form {l:?}"));
                    break;
                }
            }
        }
        match bad {
            None => push("polynomial-model", true, "exact".into()),
            Some(d) => push("polynomial-model", false, d),
        }
    }
    for m in 1..=label.a_tau() {
        // the n=3 closed-form identity needs m + 1 <= mu
        if label.n == 3 && m + 1 > label.two_mu as usize / 2 {
            continue;
        }
        match cofactor_bounds(label, m) {
            Ok(report) => {
                let omega_ok =
                    report.omega.map_or(true, |w| w.unsigned_abs() as usize <= label.d_tau());
                let status = report.max_ratio <= 1.0 && report.identity_ok && omega_ok;
                push(
                    "cofactor-bounds",
                    status,
                    format!("m={m}: max ratio {}, omega {:?}", report.max_ratio, report.omega),
                );
            }
            Err(e) => push("cofactor-bounds", false, format!("m={m}: {e}")),
        }
    }
    ok
}

pub fn oracle(st: &Settings, all: bool) -> Result<(Table, bool)> {
    let mut t = Table::new(&["check", "label", "status", "detail"]);
    let mut ok = true;
    if all {
        for (label, _) in enumerated_types() {
            ok &= oracle_one(&label, &mut t);
        }
    } else {
        let label = st.tau()?;
        ok &= oracle_one(&label, &mut t);
    }
    // the n=3 binomial product identity, type-independent
    for size in 2..=8u32 {
        for s in 1..=size {
            let (lhs, rhs) = binomial_identity_sides(size, s);
            let status = lhs == rhs;
            ok &= status;
            t.push(vec![
                Cell::Text("binomial-identity".into()),
                Cell::Text(format!("size {size}, s {s}")),
                Cell::Text(if status { "pass".into() } else { "FAIL".into() }),
                Cell::Text(format!("{lhs} vs {rhs}")),
            ]);
        }
    }
    t.meta.push(("passed", ok.into()));
    Ok((t, ok))
}

fn parse_check(text: &str) -> Result<usize> {
    if let Ok(id) = text.parse::<usize>() {
        if CHECK_IDS.contains(&id) {
            return Ok(id);
        }
        bail!("check id {id} is outside 1..=13");
    }
    CHECK_IDS
        .into_iter()
        .find(|&id| check_name(id) == text)
        .ok_or_else(|| anyhow!("unknown check {text:?}; pass an id (1..=13) or a slug"))
}

pub fn verify(checks: &[String]) -> Result<(Table, bool)> {
    let ids: Vec<usize> = checks.iter().map(|c| parse_check(c)).collect::<Result<_>>()?;
    let report = run_suite(&ids);
    let mut t = Table::new(&["id", "name", "passed", "seconds", "detail"])
        .with_meta("passed", report.passed.into())
        .with_meta("tolerance_policy", "per-check, fixed by the suite".into());
    for c in &report.checks {
        t.push(vec![
            Cell::Int(c.id as i64),
            Cell::Text(c.name.clone()),
            Cell::Bool(c.passed),
            Cell::Float(c.seconds),
            Cell::Text(c.detail.clone()),
        ]);
    }
    for c in &report.checks {
        if !c.passed {
            eprintln!("verify: {} failed: {}", c.name, c.detail);
        }
    }
    Ok((t, report.passed))
}

// ---------------------------------------------------------------------------
// flag structs used by main (kept here so the verb and its options live
// together)
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct TransformArgs {
    /// Generator coefficients "c0,c1;c0,c1,..." (rows = xi2 powers); the
    /// default is a Schwartz-shaped profile adapted to the type
    #[arg(long)]
    pub gamma: Option<String>,
    /// Exponential decay rate of the gamma profiles
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    /// Computation route
    #[arg(long, value_parser = ["exact", "quadrature"], default_value = "exact")]
    pub route: String,
}

#[derive(clap::Args, Debug)]
pub struct DecomposeArgs {
    /// Transform samples CSV (columns s,rho,re,im); when omitted the samples
    /// come from the generator profile below
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
}

#[derive(clap::Args, Debug)]
pub struct ExtendArgs {
    /// Extension builder
    #[arg(long, value_parser = ["cutoff", "bump", "borel"], default_value = "cutoff")]
    pub builder: String,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    /// Largest xi1 of the output grid (default rho-max^2)
    #[arg(long)]
    pub xi1_max: Option<f64>,
    /// Half-width of the xi2 range (default (1 + max |lambda|) rho-max^u)
    #[arg(long)]
    pub xi2_max: Option<f64>,
    /// Grid points per axis
    #[arg(long, default_value_t = 65)]
    pub samples: usize,
    /// Jet coefficient CSV for the borel builder (columns d,q,value)
    #[arg(long)]
    pub jet_in: Option<PathBuf>,
    /// Also render the field as an SVG contour plot
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct JetArgs {
    /// Branch restriction samples CSV (columns s,t,value on t = j*h/2)
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Solve the jet of a random recoverable polynomial instead (uses --seed)
    #[arg(long)]
    pub synthetic: bool,
    /// Jet order (max curve degree)
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Stencil spacing for sampled jets
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
}

#[derive(clap::Args, Debug)]
pub struct PhiArgs {
    /// Radial sample count on [0, radial-R]
    #[arg(long, default_value_t = 33)]
    pub samples: usize,
}

#[derive(clap::Args, Debug)]
pub struct OracleArgs {
    /// Sweep the whole enumerated family instead of one type
    #[arg(long)]
    pub all: bool,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// Run every check (the default when no --check is given)
    #[arg(long)]
    pub all: bool,
    /// Run one check by id (1..=13) or slug; repeatable
    #[arg(long = "check")]
    pub checks: Vec<String>,
}
