//! Equivariant radial profiles, the tau-spherical transform on the embedded
//! spectrum, the multiplier property of D_tau, and the gamma decomposition.
//!
//! An equivariant F is determined by its values on the axis ray: F(r.o) =
//! sum_s b_s(r) P_s ("branch form"). The analytic ground truth used for
//! cross-validation is the "generator form", which prescribes the Fourier
//! data F^(rho.o) = sum_i gamma_i(rho^2) rho^{ui} B^i with gamma_i of
//! Gaussian-times-polynomial shape.
//!
//! All quadrature-path integrals reduce to scalar kernels
//!   W_{s,s'}(t) = ∫_{S^{n-1}} e^{i t eta_1} tr(P_{s'} p_s(Q(eta))) dsigma,
//! evaluated as short sums over the distinct polar values of the sphere rule.

use crate::branch::{eval_poly, poly_from_roots};
use crate::cmatrix::{CMat, C64};
use crate::numerics::RadialRule;
use crate::oracle::{rat_from_f64, rat_to_f64, vandermonde_inverse, Rat};
use crate::reps::{GeneratorImages, TauLabel};
use crate::spherical::SphericalEvaluator;
use crate::{Error, Result};
use num::Zero;

/// Polynomial-in-xi1 times exp(-decay xi1) coefficients, one list per power
/// of the generator. Empty list = zero.
fn gamma_eval(polys: &[Vec<f64>], decay: f64, i: usize, xi1: f64) -> f64 {
    if i >= polys.len() || polys[i].is_empty() {
        return 0.0;
    }
    eval_poly(&polys[i], xi1) * (-decay * xi1).exp()
}

#[derive(Debug, Clone)]
pub enum ProfileForm {
    /// Samples b_s(r_k) on the nodes of a radial quadrature rule.
    Branch { rule: RadialRule, values: Vec<Vec<C64>> },
    /// gamma_i(xi1) = polys[i](xi1) exp(-decay xi1).
    Generator { polys: Vec<Vec<f64>>, decay: f64 },
}

#[derive(Debug, Clone)]
pub struct EquivariantProfile {
    pub label: TauLabel,
    pub form: ProfileForm,
}

impl EquivariantProfile {
    /// Generator-form profile (the synthesis F = sum_i D_tau^i g_i).
    pub fn generator(label: TauLabel, mut polys: Vec<Vec<f64>>, decay: f64) -> Result<Self> {
        if polys.len() > label.a_tau() + 1 {
            return Err(Error::Precondition(format!(
                "{} generator coefficients exceed a_tau + 1 = {}",
                polys.len(),
                label.a_tau() + 1
            )));
        }
        if !(decay > 0.0) {
            return Err(Error::Precondition("generator decay must be positive".into()));
        }
        polys.resize(label.a_tau() + 1, Vec::new());
        Ok(EquivariantProfile { label, form: ProfileForm::Generator { polys, decay } })
    }

    /// Scalar Gaussian e^{-decay |y|^2-ish}: gamma = (e^{-decay xi1}, 0, ...).
    pub fn gaussian(label: TauLabel, decay: f64) -> Self {
        EquivariantProfile::generator(label, vec![vec![1.0]], decay).unwrap()
    }

    pub fn branch(label: TauLabel, rule: RadialRule, values: Vec<Vec<C64>>) -> Result<Self> {
        if values.len() != label.a_tau() + 1 {
            return Err(Error::Precondition("one sample row per branch required".into()));
        }
        if values.iter().any(|row| row.len() != rule.nodes.len()) {
            return Err(Error::Precondition("sample rows must match the radial rule".into()));
        }
        let p = EquivariantProfile { label, form: ProfileForm::Branch { rule, values } };
        p.decay_guard()?;
        Ok(p)
    }

    /// Integrability guard: the weighted tail max_s |b_s(r_last)| (1+r_last)^{n+1}
    /// must not exceed the overall profile peak.
    pub fn decay_guard(&self) -> Result<()> {
        if let ProfileForm::Branch { rule, values } = &self.form {
            let n = self.label.n;
            let last = rule.nodes.len() - 1;
            let r_last = rule.nodes[last];
            let peak = values
                .iter()
                .flat_map(|row| row.iter().map(|v| v.norm()))
                .fold(0.0f64, f64::max);
            let tail = values.iter().map(|row| row[last].norm()).fold(0.0f64, f64::max);
            // Tails at the roundoff floor of the peak are integrable under
            // any truncation; only flag tails that genuinely fail to decay.
            if tail > 1e-9 * peak
                && tail * (1.0 + r_last).powi(n as i32 + 1) > peak
                && peak > 0.0
            {
                return Err(Error::Precondition(
                    "decay guard: branch samples do not decay like (1+r)^{-n-1}".into(),
                ));
            }
        }
        Ok(())
    }

    /// Exact transform value v_s(rho) for generator-form profiles.
    pub fn v_exact(&self, s: usize, rho: f64) -> Result<C64> {
        let ProfileForm::Generator { polys, decay } = &self.form else {
            return Err(Error::Precondition("v_exact needs a generator-form profile".into()));
        };
        let lam = self.label.lambda(s)? as f64;
        let xi1 = rho * rho;
        let xi2 = lam * rho.powi(self.label.u_exp() as i32);
        let mut v = 0.0;
        let mut pw = 1.0;
        for i in 0..polys.len() {
            v += gamma_eval(polys, *decay, i, xi1) * pw;
            pw *= xi2;
        }
        Ok(C64::new(v, 0.0))
    }
}

pub fn synthesize_profile(
    label: TauLabel,
    polys: Vec<Vec<f64>>,
    decay: f64,
) -> Result<EquivariantProfile> {
    EquivariantProfile::generator(label, polys, decay)
}

/// Reduce a power-series-in-B coefficient list (length possibly > a_tau + 1)
/// using the minimal polynomial of B, keeping track of the xi1 powers that
/// the substitution B^{a+1} = -sum_j p_j B^j picks up through rho^{u(a+1-j)}.
fn fold_reduce(label: &TauLabel, mut coeffs: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let a = label.a_tau();
    let u = label.u_exp() as usize;
    let lambdas: Vec<f64> = (0..=a).map(|s| label.lambda(s).unwrap() as f64).collect();
    let minpoly = poly_from_roots(&lambdas); // monic, degree a+1
    while coeffs.len() > a + 1 {
        let top = coeffs.pop().unwrap();
        if top.is_empty() {
            continue;
        }
        let k = coeffs.len(); // the removed entry was B^k, k >= a+1
        for j in 0..=a {
            let pj = minpoly[j];
            if pj == 0.0 {
                continue;
            }
            // B^k -> -p_j B^{k-(a+1)+j}, carrying rho^{u(a+1-j)} = xi1^{u(a+1-j)/2}
            let e2 = u * (a + 1 - j);
            debug_assert!(e2 % 2 == 0, "fold exponent must be integral");
            let shift = e2 / 2;
            let dst = k - (a + 1) + j;
            if coeffs[dst].len() < top.len() + shift {
                coeffs[dst].resize(top.len() + shift, 0.0);
            }
            for (m, &c) in top.iter().enumerate() {
                coeffs[dst][m + shift] -= pj * c;
            }
        }
    }
    coeffs.resize(a + 1, Vec::new());
    Ok(coeffs)
}

/// D_tau on a generator-form profile: multiplication of the Fourier data by
/// Q_tau(rho.o) = rho^u B shifts gamma_i to position i+1, with the top power
/// folded back through the minimal polynomial of B.
pub fn apply_d_generator(profile: &EquivariantProfile) -> Result<EquivariantProfile> {
    let ProfileForm::Generator { polys, decay } = &profile.form else {
        return Err(Error::Precondition(
            "apply_d_generator needs a generator-form profile".into(),
        ));
    };
    let mut shifted: Vec<Vec<f64>> = Vec::with_capacity(polys.len() + 1);
    shifted.push(Vec::new());
    shifted.extend(polys.iter().cloned());
    let reduced = fold_reduce(&profile.label, shifted)?;
    EquivariantProfile::generator(profile.label, reduced, *decay)
}

/// Diagonal Fourier data of the convolution of two generator-form profiles:
/// the product polynomial in B, reduced back below the minimal polynomial.
pub fn convolve_generator(
    f1: &EquivariantProfile,
    f2: &EquivariantProfile,
) -> Result<EquivariantProfile> {
    let (ProfileForm::Generator { polys: p1, decay: d1 }, ProfileForm::Generator { polys: p2, decay: d2 }) =
        (&f1.form, &f2.form)
    else {
        return Err(Error::Precondition("convolution is exercised in generator form".into()));
    };
    if f1.label != f2.label {
        return Err(Error::Precondition("convolution requires matching K-types".into()));
    }
    let deg = p1.len() + p2.len();
    let mut prod: Vec<Vec<f64>> = vec![Vec::new(); deg.max(1)];
    for (i, a) in p1.iter().enumerate() {
        if a.is_empty() {
            continue;
        }
        for (j, b) in p2.iter().enumerate() {
            if b.is_empty() {
                continue;
            }
            let dst = &mut prod[i + j];
            if dst.len() < a.len() + b.len() - 1 {
                dst.resize(a.len() + b.len() - 1, 0.0);
            }
            for (m, &am) in a.iter().enumerate() {
                for (l, &bl) in b.iter().enumerate() {
                    dst[m + l] += am * bl;
                }
            }
        }
    }
    let reduced = fold_reduce(&f1.label, prod)?;
    EquivariantProfile::generator(f1.label, reduced, d1 + d2)
}

/// Transform samples v_s(rho) on a rho grid.
#[derive(Debug, Clone)]
pub struct BranchSamples {
    pub label: TauLabel,
    pub rho: Vec<f64>,
    /// values[s][k] = v_s(rho_k)
    pub values: Vec<Vec<C64>>,
}

impl BranchSamples {
    /// max_{s,s'} |v_s(0) - v_{s'}(0)| over grid points with rho = 0.
    pub fn origin_spread(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, &r) in self.rho.iter().enumerate() {
            if r != 0.0 {
                continue;
            }
            for s in 0..self.values.len() {
                for sp in 0..self.values.len() {
                    worst = worst.max((self.values[s][k] - self.values[sp][k]).norm());
                }
            }
        }
        worst
    }
}

/// Scalar reduction of the sphere integrals: aggregated projector matrices
/// and trace kernels per distinct polar value of the rule.
pub struct TraceKernel {
    pub label: TauLabel,
    pub polar_values: Vec<f64>,
    /// A[s][c] = sum_{nodes k in class c} w_k p_s(Q(eta_k))
    mats: Vec<Vec<CMat>>,
    /// traces[s][s'][c] = tr(P_{s'} A[s][c]) (real by hermiticity)
    traces: Vec<Vec<Vec<f64>>>,
    /// |S^{n-1}|
    pub surface: f64,
}

impl TraceKernel {
    pub fn new(eval: &SphericalEvaluator) -> Self {
        let label = eval.label();
        let a = label.a_tau();
        let d = eval.gen.dim();
        let nclass = eval.rule.polar_values.len();
        let mut mats = vec![vec![CMat::zeros(d, d); nclass]; a + 1];
        for k in 0..eval.rule.len() {
            let c = eval.rule.polar_class[k];
            let w = C64::new(eval.rule.weights[k], 0.0);
            for s in 0..=a {
                mats[s][c].axpy(w, &eval.conj_projector(k, s));
            }
        }
        let mut traces = vec![vec![vec![0.0; nclass]; a + 1]; a + 1];
        for s in 0..=a {
            for sp in 0..=a {
                for c in 0..nclass {
                    let t = eval.bd.projections[sp].mul(&mats[s][c]).trace();
                    debug_assert!(t.im.abs() < 1e-10);
                    traces[s][sp][c] = t.re;
                }
            }
        }
        let surface = match label.n {
            3 => 4.0 * std::f64::consts::PI,
            _ => 2.0 * std::f64::consts::PI * std::f64::consts::PI,
        };
        TraceKernel { label, polar_values: eval.rule.polar_values.clone(), mats, traces, surface }
    }

    /// All W_{s,s'}(t) at once; out[s][s'].
    pub fn w_all(&self, t: f64) -> Vec<Vec<C64>> {
        let a = self.label.a_tau();
        let phases: Vec<C64> =
            self.polar_values.iter().map(|&pv| C64::from_polar(1.0, t * pv)).collect();
        let mut out = vec![vec![C64::zero(); a + 1]; a + 1];
        for s in 0..=a {
            for sp in 0..=a {
                let mut acc = C64::zero();
                for (c, ph) in phases.iter().enumerate() {
                    acc += ph * self.traces[s][sp][c];
                }
                out[s][sp] = acc;
            }
        }
        out
    }

    /// Full-matrix kernel M_s(t) = ∫ e^{i t eta_1} p_s(Q(eta)) dsigma.
    pub fn m_full(&self, s: usize, t: f64) -> CMat {
        let d = self.mats[s][0].rows;
        let mut acc = CMat::zeros(d, d);
        for (c, &pv) in self.polar_values.iter().enumerate() {
            acc.axpy(C64::from_polar(1.0, t * pv), &self.mats[s][c]);
        }
        acc
    }
}

/// Evaluator plus kernel for one K-type at one quadrature degree.
pub struct TransformContext {
    pub eval: SphericalEvaluator,
    pub kernel: TraceKernel,
}

impl TransformContext {
    pub fn new(gen: &GeneratorImages, degree: usize) -> Result<Self> {
        let eval = SphericalEvaluator::new(gen, degree)?;
        let kernel = TraceKernel::new(&eval);
        Ok(TransformContext { eval, kernel })
    }

    pub fn label(&self) -> TauLabel {
        self.eval.label()
    }

    /// The tau-spherical transform restricted to branch s of the spectrum:
    /// v_s(rho) = G#F(rho^2, lambda_s rho^u). Generator profiles evaluate
    /// exactly; branch profiles go through the radially reduced pairing.
    pub fn transform(&self, profile: &EquivariantProfile, rho_grid: &[f64]) -> Result<BranchSamples> {
        let label = profile.label;
        if label != self.label() {
            return Err(Error::Precondition("profile/context K-type mismatch".into()));
        }
        let a = label.a_tau();
        let n = label.n;
        let mut values = vec![vec![C64::zero(); rho_grid.len()]; a + 1];
        match &profile.form {
            ProfileForm::Generator { .. } => {
                for (k, &rho) in rho_grid.iter().enumerate() {
                    for s in 0..=a {
                        values[s][k] = profile.v_exact(s, rho)?;
                    }
                }
            }
            ProfileForm::Branch { rule, values: b } => {
                profile.decay_guard()?;
                for (k, &rho) in rho_grid.iter().enumerate() {
                    if rho < 0.0 {
                        return Err(Error::Precondition("rho grid must be nonnegative".into()));
                    }
                    let mut acc = vec![C64::zero(); a + 1];
                    for (m, &r) in rule.nodes.iter().enumerate() {
                        let w = rule.weights[m] * r.powi(n as i32 - 1);
                        let wmat = self.kernel.w_all(-rho * r);
                        for s in 0..=a {
                            let mut row = C64::zero();
                            for sp in 0..=a {
                                row += b[sp][m] * wmat[s][sp];
                            }
                            acc[s] += row * w;
                        }
                    }
                    for s in 0..=a {
                        let scale = self.kernel.surface / label.weight_dim(s)? as f64;
                        values[s][k] = acc[s] * scale;
                    }
                }
            }
        }
        Ok(BranchSamples { label, rho: rho_grid.to_vec(), values })
    }

    /// F^(rho.o) assembled from the branch pairing as sum_s v_s(rho) P_s.
    pub fn fourier_axis(&self, profile: &EquivariantProfile, rho: f64) -> Result<CMat> {
        let samples = self.transform(profile, &[rho])?;
        let d = self.eval.gen.dim();
        let mut out = CMat::zeros(d, d);
        for s in 0..samples.values.len() {
            out.axpy(samples.values[s][0], &self.eval.bd.projections[s]);
        }
        Ok(out)
    }

    /// Independent full-matrix route for branch profiles: the sphere integral
    /// is kept matrix-valued instead of being traced against P_{s'}, so the
    /// diagonality of the result is a check, not an assumption.
    pub fn fourier_axis_direct(&self, profile: &EquivariantProfile, rho: f64) -> Result<CMat> {
        let ProfileForm::Branch { rule, values: b } = &profile.form else {
            return self.fourier_axis(profile, rho);
        };
        let label = profile.label;
        let a = label.a_tau();
        let n = label.n;
        let d = self.eval.gen.dim();
        let mut acc = CMat::zeros(d, d);
        for (m, &r) in rule.nodes.iter().enumerate() {
            let w = rule.weights[m] * r.powi(n as i32 - 1);
            for s in 0..=a {
                let mk = self.kernel.m_full(s, -rho * r);
                acc.axpy(b[s][m] * w, &mk);
            }
        }
        Ok(acc.scale_re(self.kernel.surface))
    }

    /// Spatial branch samples recovered from transform samples by the inverse
    /// radial reduction; `samples` must live on the nodes of `p_rule`.
    pub fn inverse_branch_profile(
        &self,
        samples: &BranchSamples,
        p_rule: &RadialRule,
        r_rule: &RadialRule,
    ) -> Result<EquivariantProfile> {
        let label = samples.label;
        if label != self.label() {
            return Err(Error::Precondition("samples/context K-type mismatch".into()));
        }
        if samples.rho.len() != p_rule.nodes.len()
            || samples.rho.iter().zip(&p_rule.nodes).any(|(a, b)| a != b)
        {
            return Err(Error::Precondition(
                "inverse reduction needs samples on the rho-rule nodes".into(),
            ));
        }
        let a = label.a_tau();
        let n = label.n;
        let inv_fourier = (2.0 * std::f64::consts::PI).powi(n as i32).recip();
        let mut values = vec![vec![C64::zero(); r_rule.nodes.len()]; a + 1];
        for (k, &r) in r_rule.nodes.iter().enumerate() {
            let mut acc = vec![C64::zero(); a + 1];
            for (m, &rho) in p_rule.nodes.iter().enumerate() {
                let w = p_rule.weights[m] * rho.powi(n as i32 - 1);
                let wmat = self.kernel.w_all(r * rho);
                for s in 0..=a {
                    let mut row = C64::zero();
                    for sp in 0..=a {
                        row += samples.values[sp][m] * wmat[sp][s];
                    }
                    acc[s] += row * w;
                }
            }
            for s in 0..=a {
                let scale = inv_fourier * self.kernel.surface / label.weight_dim(s)? as f64;
                values[s][k] = acc[s] * scale;
            }
        }
        EquivariantProfile::branch(label, r_rule.clone(), values)
    }

    /// Branch-form sampling of a generator profile: exact transform values on
    /// the rho rule, then the inverse reduction onto the radial rule.
    pub fn sample_branch(
        &self,
        profile: &EquivariantProfile,
        p_rule: &RadialRule,
        r_rule: &RadialRule,
    ) -> Result<EquivariantProfile> {
        let samples = self.transform(profile, &p_rule.nodes)?;
        self.inverse_branch_profile(&samples, p_rule, r_rule)
    }

    /// D_tau via the Fourier side. Generator profiles shift exactly; branch
    /// profiles are pushed to transform samples on an internal rho rule,
    /// multiplied by lambda_s rho^u, and pulled back to the same radial grid.
    pub fn apply_d(&self, profile: &EquivariantProfile) -> Result<EquivariantProfile> {
        match &profile.form {
            ProfileForm::Generator { .. } => apply_d_generator(profile),
            ProfileForm::Branch { rule, .. } => {
                // The multiplied transform lambda rho^u v(rho) decays u powers
                // slower than v, so the pull-back integrates over a slightly
                // larger Fourier extent; much larger extents only probe rho
                // where the transform is quadrature noise amplified by the
                // multiplier.
                let p_rule = crate::numerics::radial_quadrature(
                    1.15 * rule.r_max,
                    (2 * rule.nodes.len()).max(64),
                )?;
                let mut samples = self.transform(profile, &p_rule.nodes)?;
                let u = profile.label.u_exp() as i32;
                for s in 0..samples.values.len() {
                    let lam = profile.label.lambda(s)? as f64;
                    for (m, &rho) in samples.rho.iter().enumerate() {
                        samples.values[s][m] *= lam * rho.powi(u);
                    }
                }
                self.inverse_branch_profile(&samples, &p_rule, rule)
            }
        }
    }
}

/// gamma_i(xi1) recovered per grid point from branch samples.
#[derive(Debug, Clone)]
pub struct GammaTable {
    pub label: TauLabel,
    pub rho: Vec<f64>,
    pub xi1: Vec<f64>,
    /// values[i][k] = gamma_i(rho_k^2)
    pub values: Vec<Vec<C64>>,
    /// rows recovered by even extrapolation instead of direct division
    pub extrapolated: Vec<bool>,
    /// worst reconstruction residual of extrapolated rows
    pub consistency: f64,
}

/// Solve the Vandermonde systems sum_q lambda_s^q x_q = v_s(rho) exactly over
/// the rationals per grid point, then divide x_q by rho^{uq}. Points with
/// rho below a tenth of the grid spacing are instead extrapolated from the
/// three nearest safe points (gamma_i is smooth and even in rho).
pub fn decompose_gamma(samples: &BranchSamples, label: &TauLabel) -> Result<GammaTable> {
    if samples.label != *label {
        return Err(Error::Precondition("samples/label K-type mismatch".into()));
    }
    let a = label.a_tau();
    let u = label.u_exp() as usize;
    let nodes: Vec<i64> = (0..=a).map(|s| label.lambda(s).unwrap()).collect();
    let inv = vandermonde_inverse(&nodes);

    // grid scale: smallest positive spacing between sorted distinct radii
    let mut sorted: Vec<f64> = samples.rho.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut scale = f64::INFINITY;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 {
            scale = scale.min(d);
        }
    }
    if !scale.is_finite() {
        scale = sorted.last().copied().unwrap_or(1.0).max(1e-9);
    }
    let threshold = 0.1 * scale;

    let nk = samples.rho.len();
    let mut values = vec![vec![C64::zero(); nk]; a + 1];
    let mut extrapolated = vec![false; nk];

    // direct exact solves on safe points
    for k in 0..nk {
        let rho = samples.rho[k];
        if rho < threshold {
            extrapolated[k] = true;
            continue;
        }
        let rho_rat = rat_from_f64(rho);
        for q in 0..=a {
            let mut re = Rat::zero();
            let mut im = Rat::zero();
            for s in 0..=a {
                let v = samples.values[s][k];
                re += &inv[q][s] * rat_from_f64(v.re);
                im += &inv[q][s] * rat_from_f64(v.im);
            }
            let div = num::pow::pow(rho_rat.clone(), u * q);
            values[q][k] = C64::new(rat_to_f64(&(re / &div)), rat_to_f64(&(im / div)));
        }
    }

    // even extrapolation in xi1 from the three nearest safe points
    let mut consistency = 0.0f64;
    let safe: Vec<usize> = (0..nk).filter(|&k| !extrapolated[k]).collect();
    for k in 0..nk {
        if !extrapolated[k] {
            continue;
        }
        if safe.len() < 3 {
            return Err(Error::Precondition(
                "gamma recovery near rho = 0 needs at least three usable grid points".into(),
            ));
        }
        let rho = samples.rho[k];
        let xi = rho * rho;
        let mut near = safe.clone();
        near.sort_by(|&x, &y| {
            (samples.rho[x] - rho)
                .abs()
                .partial_cmp(&(samples.rho[y] - rho).abs())
                .unwrap()
        });
        let pts = &near[..3];
        for q in 0..=a {
            let mut v = C64::zero();
            for (ai, &pa) in pts.iter().enumerate() {
                let xa = samples.rho[pa] * samples.rho[pa];
                let mut l = 1.0;
                for (bi, &pb) in pts.iter().enumerate() {
                    if ai != bi {
                        let xb = samples.rho[pb] * samples.rho[pb];
                        l *= (xi - xb) / (xa - xb);
                    }
                }
                v += values[q][pa] * l;
            }
            values[q][k] = v;
        }
        // reconstruction residual against the input samples
        for s in 0..=a {
            let lam = label.lambda(s)? as f64;
            let xi2 = lam * rho.powi(u as i32);
            let mut recon = C64::zero();
            let mut pw = 1.0;
            for q in 0..=a {
                recon += values[q][k] * pw;
                pw *= xi2;
            }
            let v = samples.values[s][k];
            consistency = consistency.max((recon - v).norm() / (1.0 + v.norm()));
        }
    }
    if consistency > 1e-6 {
        return Err(Error::Numerical(format!(
            "gamma decomposition: consistency residual {consistency:.3e} exceeds 1e-6 near rho = 0"
        )));
    }

    let xi1 = samples.rho.iter().map(|&r| r * r).collect();
    Ok(GammaTable { label: *label, rho: samples.rho.clone(), xi1, values, extrapolated, consistency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::radial_quadrature;
    use crate::reps::{build_so3_rep, build_so4_rep};

    fn gaussian_branch(
        label: TauLabel,
        rule: &RadialRule,
        half: f64,
    ) -> EquivariantProfile {
        let b: Vec<C64> =
            rule.nodes.iter().map(|&r| C64::new((-half * r * r).exp(), 0.0)).collect();
        let values = vec![b; label.a_tau() + 1];
        EquivariantProfile::branch(label, rule.clone(), values).unwrap()
    }

    #[test]
    fn trivial_gaussian_matches_closed_form() {
        for (gen, n) in
            [(build_so3_rep(0).unwrap().1, 3usize), (build_so4_rep(0, 0).unwrap().1, 4)]
        {
            let ctx = TransformContext::new(&gen, 40).unwrap();
            let rule = radial_quadrature(8.0, 120).unwrap();
            let prof = gaussian_branch(gen.label, &rule, 0.5);
            let grid = [0.3, 1.0, 2.0, 3.0];
            let samples = ctx.transform(&prof, &grid).unwrap();
            for (k, &rho) in grid.iter().enumerate() {
                let want = (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0)
                    * (-rho * rho / 2.0).exp();
                let got = samples.values[0][k];
                assert!(
                    (got.re - want).abs() / want < 1e-8,
                    "n={n} rho={rho}: {} vs {want}",
                    got.re
                );
                assert!(got.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn w_kernel_trivial_is_phi_scalar() {
        let (_, gen) = build_so3_rep(0).unwrap();
        let ctx = TransformContext::new(&gen, 40).unwrap();
        for t in [0.0, 0.7, 2.0, -3.1] {
            let w = ctx.kernel.w_all(t)[0][0];
            let want = crate::numerics::phi_scalar(3, t).unwrap();
            assert!((w.re - want).abs() < 1e-12);
            assert!(w.im.abs() < 1e-14);
        }
    }

    #[test]
    fn generator_transform_and_multiplier() {
        let (label, _) = build_so3_rep(2).unwrap();
        let prof = EquivariantProfile::generator(
            label,
            vec![vec![1.0, 0.3], vec![0.5], vec![0.0, 0.2], vec![0.1], vec![0.05]],
            1.0,
        )
        .unwrap();
        let dprof = apply_d_generator(&prof).unwrap();
        for s in 0..=4 {
            let lam = label.lambda(s).unwrap() as f64;
            for rho in [0.0, 0.4, 1.3, 2.2] {
                let v = prof.v_exact(s, rho).unwrap();
                let dv = dprof.v_exact(s, rho).unwrap();
                let want = v * (lam * rho);
                assert!((dv - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
        // trivial type: D_tau is the zero map
        let (l0, _) = build_so3_rep(0).unwrap();
        let p0 = EquivariantProfile::gaussian(l0, 1.0);
        let d0 = apply_d_generator(&p0).unwrap();
        assert!((d0.v_exact(0, 1.2).unwrap()).norm() == 0.0);
    }

    #[test]
    fn fold_example_shifts_top_power_back() {
        // mu=1: B^3 = B, so gamma = (0,0,g) applies D into (0, xi1 g, 0)
        let (label, _) = build_so3_rep(1).unwrap();
        let prof =
            EquivariantProfile::generator(label, vec![vec![], vec![], vec![2.0, -1.0]], 0.7)
                .unwrap();
        let d = apply_d_generator(&prof).unwrap();
        let ProfileForm::Generator { polys, .. } = &d.form else { unreachable!() };
        assert!(polys[0].is_empty());
        assert_eq!(polys[1], vec![0.0, 2.0, -1.0]);
        assert!(polys[2].is_empty());
    }

    #[test]
    fn convolution_is_multiplicative_on_branches() {
        for label in [TauLabel::so3(1).unwrap(), TauLabel::so4(2, 2).unwrap()] {
            let f1 = EquivariantProfile::generator(
                label,
                vec![vec![1.0, -0.2], vec![0.4], vec![0.1, 0.05]],
                0.8,
            )
            .unwrap();
            let f2 =
                EquivariantProfile::generator(label, vec![vec![0.6], vec![0.0, 0.3]], 0.5)
                    .unwrap();
            let conv = convolve_generator(&f1, &f2).unwrap();
            for s in 0..=label.a_tau() {
                for rho in [0.3, 1.0, 1.9] {
                    let got = conv.v_exact(s, rho).unwrap();
                    let want = f1.v_exact(s, rho).unwrap() * f2.v_exact(s, rho).unwrap();
                    assert!(
                        (got - want).norm() < 1e-12 * (1.0 + want.norm()),
                        "{} s={s} rho={rho}",
                        label.describe()
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_path_cross_validates_generator_n3() {
        let (_, gen) = build_so3_rep(1).unwrap();
        let ctx = TransformContext::new(&gen, 64).unwrap();
        let prof = EquivariantProfile::generator(
            gen.label,
            vec![vec![1.0], vec![0.3], vec![0.1, 0.05]],
            0.5,
        )
        .unwrap();
        let p_rule = radial_quadrature(6.5, 90).unwrap();
        let r_rule = radial_quadrature(6.5, 90).unwrap();
        let sampled = ctx.sample_branch(&prof, &p_rule, &r_rule).unwrap();
        let grid = [0.0, 0.5, 1.1, 2.0, 2.8];
        let back = ctx.transform(&sampled, &grid).unwrap();
        for s in 0..=2 {
            for (k, &rho) in grid.iter().enumerate() {
                let want = prof.v_exact(s, rho).unwrap();
                let got = back.values[s][k];
                assert!(
                    (got - want).norm() < 1e-7 * (1.0 + want.norm()),
                    "s={s} rho={rho}: {got} vs {want}"
                );
            }
        }
        assert!(back.origin_spread() < 1e-8);
    }

    #[test]
    fn quadrature_path_cross_validates_generator_n4() {
        let (_, gen) = build_so4_rep(1, 1).unwrap();
        let ctx = TransformContext::new(&gen, 80).unwrap();
        let prof =
            EquivariantProfile::generator(gen.label, vec![vec![0.8], vec![0.2]], 0.5).unwrap();
        let p_rule = radial_quadrature(6.5, 90).unwrap();
        let r_rule = radial_quadrature(6.5, 90).unwrap();
        let sampled = ctx.sample_branch(&prof, &p_rule, &r_rule).unwrap();
        let grid = [0.4, 1.0, 1.8];
        let back = ctx.transform(&sampled, &grid).unwrap();
        for s in 0..=1 {
            for (k, &rho) in grid.iter().enumerate() {
                let want = prof.v_exact(s, rho).unwrap();
                let got = back.values[s][k];
                assert!(
                    (got - want).norm() < 1e-6 * (1.0 + want.norm()),
                    "s={s} rho={rho}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn schur_diagonality_and_route_agreement() {
        for (gen, deg) in
            [(build_so3_rep(1).unwrap().1, 48usize), (build_so4_rep(1, 1).unwrap().1, 48)]
        {
            let ctx = TransformContext::new(&gen, deg).unwrap();
            let rule = radial_quadrature(8.0, 110).unwrap();
            // branch-dependent amplitudes so diagonality is not vacuous
            let values: Vec<Vec<C64>> = (0..=gen.label.a_tau())
                .map(|s| {
                    rule.nodes
                        .iter()
                        .map(|&r| C64::new((1.0 + 0.4 * s as f64) * (-r * r / 2.0).exp(), 0.0))
                        .collect()
                })
                .collect();
            let prof = EquivariantProfile::branch(gen.label, rule.clone(), values).unwrap();
            for rho in [0.0, 0.8, 2.0] {
                let direct = ctx.fourier_axis_direct(&prof, rho).unwrap();
                let paired = ctx.fourier_axis(&prof, rho).unwrap();
                assert!(direct.sub(&paired).max_abs() < 1e-8, "rho={rho}");
                for p in &ctx.eval.bd.projections {
                    assert!(direct.commutator(p).max_abs() < 1e-8, "rho={rho}");
                }
            }
        }
    }

    #[test]
    fn decompose_recovers_generator_gammas() {
        for label in [TauLabel::so3(1).unwrap(), TauLabel::so4(3, 3).unwrap()] {
            let polys: Vec<Vec<f64>> =
                vec![vec![1.0, 0.2], vec![0.5], vec![0.1, -0.3], vec![0.07]]
                    [..label.a_tau() + 1]
                    .to_vec();
            let prof = EquivariantProfile::generator(label, polys.clone(), 0.6).unwrap();
            let grid: Vec<f64> = (0..57).map(|k| 0.2 + 0.05 * k as f64).collect();
            let samples = BranchSamples {
                label,
                rho: grid.clone(),
                values: (0..=label.a_tau())
                    .map(|s| grid.iter().map(|&r| prof.v_exact(s, r).unwrap()).collect())
                    .collect(),
            };
            let gt = decompose_gamma(&samples, &label).unwrap();
            for (i, poly) in polys.iter().enumerate() {
                for (k, &rho) in grid.iter().enumerate() {
                    let xi1 = rho * rho;
                    let want = eval_poly(poly, xi1) * (-0.6 * xi1).exp();
                    let got = gt.values[i][k];
                    assert!(
                        (got.re - want).abs() < 1e-10 && got.im.abs() < 1e-10,
                        "{} i={i} rho={rho}: {} vs {want}",
                        label.describe(),
                        got.re
                    );
                }
            }
        }
    }

    #[test]
    fn decompose_handles_near_zero_and_frozen_example() {
        // constructed n=4 nu=mu=1/2 example: v_s = lambda_s rho^2 -> gamma=(0,1)
        let label = TauLabel::so4(1, 1).unwrap();
        let grid: Vec<f64> = std::iter::once(0.001)
            .chain((1..=50).map(|k| 0.05 * k as f64))
            .collect();
        let values: Vec<Vec<C64>> = (0..=1)
            .map(|s| {
                let lam = label.lambda(s).unwrap() as f64;
                grid.iter().map(|&r| C64::new(lam * r * r, 0.0)).collect()
            })
            .collect();
        let samples = BranchSamples { label, rho: grid.clone(), values };
        let gt = decompose_gamma(&samples, &label).unwrap();
        assert!(gt.extrapolated[0]);
        assert!(!gt.extrapolated[1]);
        for k in 0..grid.len() {
            assert!((gt.values[0][k]).norm() < 1e-9, "gamma0 at {k}");
            assert!((gt.values[1][k] - C64::new(1.0, 0.0)).norm() < 1e-9, "gamma1 at {k}");
        }
        assert!(gt.consistency < 1e-8);

        // trivial type: gamma0 = v0 directly
        let l0 = TauLabel::so3(0).unwrap();
        let v: Vec<C64> = grid.iter().map(|&r| C64::new((-r * r).exp(), 0.0)).collect();
        let s0 = BranchSamples { label: l0, rho: grid.clone(), values: vec![v.clone()] };
        let g0 = decompose_gamma(&s0, &l0).unwrap();
        for k in 1..grid.len() {
            assert!((g0.values[0][k] - v[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn odd_profiles_flip_branches_n3() {
        let (_, gen) = build_so3_rep(2).unwrap();
        let label = gen.label;
        // odd generator: only odd powers of the multiplier
        let prof = EquivariantProfile::generator(
            label,
            vec![vec![], vec![1.0], vec![], vec![0.2]],
            0.5,
        )
        .unwrap();
        let a = label.a_tau();
        for s in 0..=a {
            for rho in [0.5, 1.4] {
                let v = prof.v_exact(s, rho).unwrap();
                let w = prof.v_exact(a - s, rho).unwrap();
                assert!((v + w).norm() < 1e-12);
            }
        }
        // and the sampled spatial side flips branches with a sign as well
        let ctx = TransformContext::new(&gen, 64).unwrap();
        let p_rule = radial_quadrature(6.5, 90).unwrap();
        let r_rule = radial_quadrature(5.0, 40).unwrap();
        let sampled = ctx.sample_branch(&prof, &p_rule, &r_rule).unwrap();
        let ProfileForm::Branch { values, .. } = &sampled.form else { unreachable!() };
        for s in 0..=a {
            for k in 0..r_rule.nodes.len() {
                assert!(
                    (values[s][k] + values[a - s][k]).norm() < 1e-8,
                    "s={s} k={k}"
                );
            }
        }
    }

    #[test]
    fn decay_guard_rejects_non_decaying_samples() {
        let label = TauLabel::so3(0).unwrap();
        let rule = radial_quadrature(10.0, 40).unwrap();
        let ones = vec![vec![C64::new(1.0, 0.0); rule.nodes.len()]];
        assert!(EquivariantProfile::branch(label, rule, ones).is_err());
    }

    #[test]
    fn fourier_axis_at_zero_is_scalar_integral() {
        let (_, gen) = build_so3_rep(1).unwrap();
        let ctx = TransformContext::new(&gen, 40).unwrap();
        let prof = EquivariantProfile::gaussian(gen.label, 0.5);
        let f0 = ctx.fourier_axis(&prof, 0.0).unwrap();
        // gamma = (e^{-xi1/2}, 0, 0): F^(0) = gamma_0(0) I = I... scaled by
        // the closed Gaussian integral on the exact path: v_s(0) = 1
        let want = CMat::identity(gen.dim());
        assert!(f0.sub(&want).max_abs() < 1e-12);
    }
}
