//! The multiplier polynomial Q_tau, matrix spherical functions Phi, the
//! embedded spectrum, and the residual checks for their defining identities.
//!
//! Phi is computed from its sphere form: Phi_{rho,s}(y) = (d_tau/d_sigma_s)
//! ∫_{S^{n-1}} e^{i rho eta.y} p_s(Q(eta)) dsigma(eta). On the unit sphere
//! p_s(Q(eta)) = tau(k_eta) P_s tau(k_eta)^{-1}, so the integrand is built
//! from precomputed rotation images at the quadrature nodes: for n = 3 that
//! is an outer product of one column of tau(k_eta), for n = 4 a conjugation
//! by the left tensor factor only.

use crate::branch::{build_branch_data, poly_from_roots, BranchData};
use crate::cmatrix::{CMat, C64};
use crate::numerics::{central_nodes, fd_weights, phi_scalar, sphere_quadrature, SphereRule};
use crate::reps::{
    apply_rotation, rotation_to_point, su2_of_quaternion, tau_of_rotation, GeneratorImages,
    RotationParams, TauLabel,
};
use crate::{Error, Result};

/// A point (xi1, xi2) = (rho^2, lambda_s rho^u) of the embedded spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub s: usize,
    pub rho: f64,
    pub xi1: f64,
    pub xi2: f64,
}

pub fn spectrum_points(label: &TauLabel, rho_grid: &[f64]) -> Result<Vec<SpectrumPoint>> {
    if rho_grid.iter().any(|&r| r < 0.0) {
        return Err(Error::Precondition("spectrum radii must be nonnegative".into()));
    }
    let u = label.u_exp();
    let mut out = Vec::with_capacity(rho_grid.len() * (label.a_tau() + 1));
    for &rho in rho_grid {
        for s in 0..=label.a_tau() {
            let lam = label.lambda(s)? as f64;
            out.push(SpectrumPoint {
                s,
                rho,
                xi1: rho * rho,
                xi2: lam * rho.powi(u as i32),
            });
        }
    }
    Ok(out)
}

/// The multiplier polynomial: Q(eta) = -i sum_j eta_j dtau(X_j) for n = 3,
/// and |eta|^2 (tau_nu(u_eta) ⊗ I) B (same)^* for n = 4. Homogeneous of
/// degree u, with Q(o) = B.
pub fn q_tau_matrix(gen: &GeneratorImages, eta: &[f64]) -> Result<CMat> {
    let d = gen.dim();
    if eta.len() != gen.label.n {
        return Err(Error::Precondition(format!(
            "eta has dimension {}, expected {}",
            eta.len(),
            gen.label.n
        )));
    }
    match gen.label.n {
        3 => {
            let mut q = CMat::zeros(d, d);
            for (j, g) in gen.images.iter().enumerate() {
                q.axpy(C64::new(0.0, -eta[j]), g);
            }
            Ok(q)
        }
        _ => {
            let r2: f64 = eta.iter().map(|x| x * x).sum();
            if r2 < 1e-300 {
                return Ok(CMat::zeros(d, d));
            }
            let r = r2.sqrt();
            let u = [eta[0] / r, eta[1] / r, eta[2] / r, eta[3] / r];
            let ul = su2_of_quaternion(&gen.left, u);
            let b = crate::branch::b_matrix(gen);
            let dr = gen.label.two_mu as usize + 1;
            let conj = conj_by_left_factor(&ul, &b, dr);
            Ok(conj.scale_re(r2))
        }
    }
}

/// (U ⊗ I) M (U ⊗ I)^* without forming the Kronecker factor, where the right
/// identity block has size dr.
fn conj_by_left_factor(u: &CMat, m: &CMat, dr: usize) -> CMat {
    let dl = u.rows;
    let d = dl * dr;
    debug_assert_eq!(m.rows, d);
    // X = (U ⊗ I) M
    let mut x = CMat::zeros(d, d);
    for i in 0..dl {
        for a in 0..dl {
            let uia = u[(i, a)];
            if uia == C64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..dr {
                let row_out = i * dr + p;
                let row_in = a * dr + p;
                for c in 0..d {
                    x[(row_out, c)] += uia * m[(row_in, c)];
                }
            }
        }
    }
    // Y = X (U^* ⊗ I), i.e. Y[., j dr + q] = sum_b X[., b dr + q] conj(U[j, b])
    let mut y = CMat::zeros(d, d);
    for j in 0..dl {
        for b in 0..dl {
            let ujb = u[(j, b)].conj();
            if ujb == C64::new(0.0, 0.0) {
                continue;
            }
            for q in 0..dr {
                let col_out = j * dr + q;
                let col_in = b * dr + q;
                for r in 0..d {
                    y[(r, col_out)] += x[(r, col_in)] * ujb;
                }
            }
        }
    }
    y
}

/// Precomputed machinery for evaluating spherical functions of one K-type at
/// one quadrature degree. Immutable after construction; shareable.
pub struct SphericalEvaluator {
    pub gen: GeneratorImages,
    pub bd: BranchData,
    pub rule: SphereRule,
    conj: ConjData,
}

enum ConjData {
    /// tau(k_eta) per node; the conjugated projector is an outer product of
    /// column s.
    So3(Vec<CMat>),
    /// tau_nu(u_eta) per node (left factor only; the base-point rotation has
    /// v = 1).
    So4(Vec<CMat>),
}

impl SphericalEvaluator {
    pub fn new(gen: &GeneratorImages, degree: usize) -> Result<Self> {
        let bd = build_branch_data(gen)?;
        let rule = sphere_quadrature(gen.label.n, degree)?;
        let conj = match gen.label.n {
            3 => {
                let mut taus = Vec::with_capacity(rule.len());
                for eta in &rule.nodes {
                    let k = rotation_to_point(3, &eta[..3])?;
                    taus.push(tau_of_rotation(gen, &k)?);
                }
                ConjData::So3(taus)
            }
            _ => {
                let mut us = Vec::with_capacity(rule.len());
                for eta in &rule.nodes {
                    us.push(su2_of_quaternion(&gen.left, *eta));
                }
                ConjData::So4(us)
            }
        };
        Ok(SphericalEvaluator { gen: gen.clone(), bd, rule, conj })
    }

    pub fn label(&self) -> TauLabel {
        self.gen.label
    }

    /// Same evaluator at twice the quadrature degree (for refinement checks).
    pub fn refined(&self) -> Result<Self> {
        SphericalEvaluator::new(&self.gen, 2 * self.rule.degree)
    }

    /// p_s(Q(eta_k)) at quadrature node k, via the conjugation identity.
    pub fn conj_projector(&self, k: usize, s: usize) -> CMat {
        match &self.conj {
            ConjData::So3(taus) => {
                let col = taus[k].column(s);
                CMat::outer(&col, &col)
            }
            ConjData::So4(us) => {
                let dr = self.gen.label.two_mu as usize + 1;
                conj_by_left_factor(&us[k], &self.bd.projections[s], dr)
            }
        }
    }

    fn check_branch(&self, s: usize) -> Result<()> {
        if s > self.label().a_tau() {
            return Err(Error::IndexOutOfRange(format!(
                "branch s={s} out of range for {}",
                self.label().describe()
            )));
        }
        Ok(())
    }

    /// The spherical function Phi^tau_{rho,s}(y).
    pub fn phi(&self, s: usize, rho: f64, y: &[f64]) -> Result<CMat> {
        self.check_branch(s)?;
        if rho < 0.0 {
            return Err(Error::Precondition("rho must be nonnegative".into()));
        }
        if y.len() != self.label().n {
            return Err(Error::Precondition("point dimension mismatch".into()));
        }
        let d = self.gen.dim();
        let mut acc = CMat::zeros(d, d);
        for k in 0..self.rule.len() {
            let eta = &self.rule.nodes[k];
            let dot: f64 = eta[..y.len()].iter().zip(y).map(|(a, b)| a * b).sum();
            let phase = C64::from_polar(self.rule.weights[k], rho * dot);
            let m = self.conj_projector(k, s);
            acc.axpy(phase, &m);
        }
        let scale = self.gen.dim() as f64 / self.label().weight_dim(s)? as f64;
        Ok(acc.scale_re(scale))
    }

    /// ||Phi_{rho, a-s}(y) - Phi_{rho, s}(-y)|| (n = 3 only).
    pub fn parity_residual(&self, s: usize, rho: f64, y: &[f64]) -> Result<f64> {
        if self.label().n != 3 {
            return Err(Error::Precondition("the parity identity is specific to n = 3".into()));
        }
        self.check_branch(s)?;
        let a = self.label().a_tau();
        let lhs = self.phi(a - s, rho, y)?;
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let rhs = self.phi(s, rho, &neg)?;
        Ok(lhs.sub(&rhs).max_abs())
    }

    /// ||Phi(y)^* - Phi(-y)|| (valid in both dimensions).
    pub fn hermitian_residual(&self, s: usize, rho: f64, y: &[f64]) -> Result<f64> {
        let lhs = self.phi(s, rho, y)?.adjoint();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let rhs = self.phi(s, rho, &neg)?;
        Ok(lhs.sub(&rhs).max_abs())
    }

    /// ||Phi(k.y) - tau(k) Phi(y) tau(k)^{-1}|| for the rotation with the
    /// given parameters.
    pub fn equivariance_residual(
        &self,
        s: usize,
        rho: f64,
        y: &[f64],
        k: &RotationParams,
    ) -> Result<f64> {
        let t = tau_of_rotation(&self.gen, k)?;
        let ky = apply_rotation(k, y);
        let lhs = self.phi(s, rho, &ky)?;
        let rhs = t.mul(&self.phi(s, rho, y)?).mul(&t.adjoint());
        Ok(lhs.sub(&rhs).max_abs())
    }

    /// Residuals of the two eigen-equations at rho: (Laplacian, D_tau).
    ///
    /// n = 3: central finite differences of the quadrature evaluator, with
    /// Delta = -sum_j d_j^2 and D_tau F = -sum_j d_j F . dtau(X_j).
    /// n = 4: the Fourier-side identities |rho eta|^2 = rho^2 and
    /// p_s(Q(eta)) Q(rho eta) = rho^2 lambda_s p_s(Q(eta)) over all nodes.
    pub fn eigen_residuals(&self, s: usize, rho: f64) -> Result<(f64, f64)> {
        self.check_branch(s)?;
        if rho <= 0.0 {
            return Err(Error::Precondition("eigen residuals need rho > 0".into()));
        }
        let lam = self.bd.lambdas[s] as f64;
        match self.label().n {
            3 => {
                let y0 = [0.37, -0.21, 0.44];
                let h = 1e-3;
                let nodes = central_nodes(2, h);
                let w = fd_weights(0.0, &nodes, 2);
                let d = self.gen.dim();
                let center = self.phi(s, rho, &y0)?;
                let mut lap = CMat::zeros(d, d);
                let mut dtau = CMat::zeros(d, d);
                for j in 0..3 {
                    let mut d1 = CMat::zeros(d, d);
                    let mut d2 = CMat::zeros(d, d);
                    for (m, &off) in nodes.iter().enumerate() {
                        let mut y = y0;
                        y[j] += off;
                        let v = if off == 0.0 { center.clone() } else { self.phi(s, rho, &y)? };
                        d1.axpy(C64::new(w[1][m], 0.0), &v);
                        d2.axpy(C64::new(w[2][m], 0.0), &v);
                    }
                    lap = lap.sub(&d2);
                    dtau = dtau.sub(&d1.mul(&self.gen.images[j]));
                }
                let norm = center.fro_norm().max(1e-12);
                let rr = rho * rho;
                let lap_res = lap.sub(&center.scale_re(rr)).fro_norm() / (rr * norm);
                let scale = rho * lam.abs().max(1.0) * norm;
                let d_res = dtau.sub(&center.scale_re(rho * lam)).fro_norm() / scale;
                Ok((lap_res, d_res))
            }
            _ => {
                let rr = rho * rho;
                let mut worst = 0.0f64;
                for k in 0..self.rule.len() {
                    let mut eta = self.rule.nodes[k];
                    for c in eta.iter_mut() {
                        *c *= rho;
                    }
                    let q = q_tau_matrix(&self.gen, &eta)?;
                    let p = self.conj_projector(k, s);
                    let res = p.mul(&q).sub(&p.scale_re(rr * lam)).max_abs();
                    let denom = rr * lam.abs().max(1.0);
                    worst = worst.max(res / denom);
                }
                Ok((0.0, worst))
            }
        }
    }
}

/// Empirical constant C with Phi_{1,s} = C . p_s(Q(-i d)) phi_1 at the point
/// y, computed by finite differences (n = 3). Should equal d_tau / d_sigma_s.
pub fn phixi_constant(eval: &SphericalEvaluator, s: usize, y: &[f64]) -> Result<f64> {
    let label = eval.label();
    if label.n != 3 {
        return Err(Error::Precondition("the Phixi consistency check is run for n = 3".into()));
    }
    let a = label.a_tau();
    if a > 4 {
        return Err(Error::Precondition(
            "Phixi consistency check supports derivative order at most 4".into(),
        ));
    }
    let dmat = eval.gen.dim();

    // coefficients of p_s
    let lambdas = &eval.bd.lambdas;
    let others: Vec<f64> = (0..=a).filter(|&j| j != s).map(|j| lambdas[j] as f64).collect();
    let mut ps = poly_from_roots(&others);
    let denom: f64 = others.iter().map(|&l| lambdas[s] as f64 - l).product();
    for c in ps.iter_mut() {
        *c /= denom;
    }

    // mixed partials of phi(|y|) up to total order a by nested 7-point stencils
    let h = 1e-2;
    let nodes = central_nodes(3, h);
    let max_ord = a.min(4);
    let w = fd_weights(0.0, &nodes, max_ord);
    let phi_at = |p: &[f64; 3]| -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        phi_scalar(3, r).unwrap()
    };
    let mut partial = std::collections::HashMap::<[usize; 3], f64>::new();
    let mixed = |e: [usize; 3], partial: &mut std::collections::HashMap<[usize; 3], f64>| -> f64 {
        if let Some(&v) = partial.get(&e) {
            return v;
        }
        let mut total = 0.0;
        for (i0, &o0) in nodes.iter().enumerate() {
            if w[e[0]][i0] == 0.0 && e[0] > 0 {
                continue;
            }
            for (i1, &o1) in nodes.iter().enumerate() {
                for (i2, &o2) in nodes.iter().enumerate() {
                    let weight = w[e[0]][i0] * w[e[1]][i1] * w[e[2]][i2];
                    if weight == 0.0 {
                        continue;
                    }
                    total += weight * phi_at(&[y[0] + o0, y[1] + o1, y[2] + o2]);
                }
            }
        }
        partial.insert(e, total);
        total
    };

    // A = sum_m c_m (-1)^m sum_{j_1..j_m} X_{j_1}...X_{j_m} d^{j}phi
    let mut amat = CMat::zeros(dmat, dmat);
    for (m, &cm) in ps.iter().enumerate() {
        if cm == 0.0 {
            continue;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        // iterate over all index words of length m in {0,1,2}
        let count = 3usize.pow(m as u32);
        for word in 0..count {
            let mut prod = CMat::identity(dmat);
            let mut expo = [0usize; 3];
            let mut rem = word;
            for _ in 0..m {
                let j = rem % 3;
                rem /= 3;
                prod = prod.mul(&eval.gen.images[j]);
                expo[j] += 1;
            }
            let dphi = mixed(expo, &mut partial);
            amat.axpy(C64::new(cm * sign * dphi, 0.0), &prod);
        }
    }

    let phi_mat = eval.phi(s, 1.0, y)?;
    let denom = amat.hs_inner(&amat).re;
    if denom < 1e-300 {
        return Err(Error::Numerical("Phixi check: derivative side vanished".into()));
    }
    Ok(phi_mat.hs_inner(&amat).re / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{b_matrix, matrix_polynomial};
    use crate::cmatrix::solve_real;
    use crate::reps::{build_so3_rep, build_so4_rep};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_tau_frozen_values() {
        let (_, g3) = build_so3_rep(2).unwrap();
        let b3 = b_matrix(&g3);
        let q = q_tau_matrix(&g3, &[1.0, 0.0, 0.0]).unwrap();
        assert!(q.sub(&b3).max_abs() < 1e-13);
        let q2 = q_tau_matrix(&g3, &[0.0, 1.0, 0.0]).unwrap();
        let expect = g3.images[1].scale(C64::new(0.0, -1.0));
        assert!(q2.sub(&expect).max_abs() < 1e-13);

        let (_, g4) = build_so4_rep(2, 2).unwrap();
        let b4 = b_matrix(&g4);
        let q = q_tau_matrix(&g4, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(q.sub(&b4).max_abs() < 1e-12);
        let q = q_tau_matrix(&g4, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(q.sub(&b4.scale_re(4.0)).max_abs() < 1e-12);
        let z = q_tau_matrix(&g4, &[0.0; 4]).unwrap();
        assert!(z.max_abs() == 0.0);
    }

    #[test]
    fn conjugation_identity_matches_lagrange() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (gen, n) in [(build_so3_rep(1).unwrap().1, 3usize), (build_so4_rep(2, 2).unwrap().1, 4)] {
            let ev = SphericalEvaluator::new(&gen, 6).unwrap();
            let a = gen.label.a_tau();
            for _ in 0..5 {
                // random unit vector via a random node perturbation: use rule nodes
                let k = rng.gen_range(0..ev.rule.len());
                let eta = ev.rule.nodes[k];
                let q = q_tau_matrix(&gen, &eta[..n]).unwrap();
                for s in 0..=a {
                    let others: Vec<f64> = (0..=a)
                        .filter(|&j| j != s)
                        .map(|j| ev.bd.lambdas[j] as f64)
                        .collect();
                    let mut ps = poly_from_roots(&others);
                    let denom: f64 =
                        others.iter().map(|&l| ev.bd.lambdas[s] as f64 - l).product();
                    for c in ps.iter_mut() {
                        *c /= denom;
                    }
                    let direct = matrix_polynomial(&ps, &q);
                    let conj = ev.conj_projector(k, s);
                    assert!(direct.sub(&conj).max_abs() < 1e-10, "n={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn phi_at_origin_is_identity() {
        for gen in [
            build_so3_rep(1).unwrap().1,
            build_so3_rep(2).unwrap().1,
            build_so4_rep(1, 1).unwrap().1,
            build_so4_rep(2, 2).unwrap().1,
        ] {
            let ev = SphericalEvaluator::new(&gen, 20).unwrap();
            let n = gen.label.n;
            let zero = vec![0.0; n];
            for s in 0..=gen.label.a_tau() {
                for rho in [0.5, 1.0, 2.0] {
                    let p = ev.phi(s, rho, &zero).unwrap();
                    let res = p.sub(&CMat::identity(gen.dim())).max_abs();
                    assert!(res < 1e-8, "{} s={s} rho={rho}: {res}", gen.label.describe());
                }
            }
        }
    }

    #[test]
    fn trivial_type_reduces_to_phi_scalar() {
        for (gen, n) in [(build_so3_rep(0).unwrap().1, 3usize), (build_so4_rep(0, 0).unwrap().1, 4)] {
            let ev = SphericalEvaluator::new(&gen, 24).unwrap();
            let mut y = vec![0.0; n];
            y[0] = 0.8;
            y[n - 1] = -0.3;
            let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for rho in [0.7, 1.3] {
                let got = ev.phi(0, rho, &y).unwrap();
                let want = phi_scalar(n, rho * r).unwrap();
                assert!((got[(0, 0)].re - want).abs() < 1e-10, "n={n}");
                assert!(got[(0, 0)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn parity_and_hermitian_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (_, gen) = build_so3_rep(2).unwrap();
        let ev = SphericalEvaluator::new(&gen, 14).unwrap();
        for _ in 0..5 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rho = rng.gen_range(0.2..2.0);
            for s in 0..=4 {
                // antipode-symmetric rule makes the parity identity hold at
                // the level of the quadrature sum
                assert!(ev.parity_residual(s, rho, &y).unwrap() < 1e-12);
                assert!(ev.hermitian_residual(s, rho, &y).unwrap() < 1e-12);
            }
        }
        let (_, g4) = build_so4_rep(1, 1).unwrap();
        let ev4 = SphericalEvaluator::new(&g4, 12).unwrap();
        let y = [0.4, -0.1, 0.2, 0.6];
        for s in 0..=1 {
            assert!(ev4.hermitian_residual(s, 0.9, &y).unwrap() < 1e-12);
        }
        assert!(ev4.parity_residual(0, 1.0, &y).is_err());
    }

    #[test]
    fn eigen_residuals_within_tolerance() {
        // trivial type: Delta sinc = rho^2 sinc
        let (_, g0) = build_so3_rep(0).unwrap();
        let ev0 = SphericalEvaluator::new(&g0, 20).unwrap();
        let (lap, _) = ev0.eigen_residuals(0, 1.0).unwrap();
        assert!(lap < 1e-5, "lap={lap}");

        let (_, gen) = build_so3_rep(1).unwrap();
        let ev = SphericalEvaluator::new(&gen, 20).unwrap();
        for s in 0..=2 {
            let (lap, dres) = ev.eigen_residuals(s, 1.0).unwrap();
            assert!(lap < 1e-4, "s={s} lap={lap}");
            assert!(dres < 1e-4, "s={s} d={dres}");
        }

        let (_, g4) = build_so4_rep(2, 2).unwrap();
        let ev4 = SphericalEvaluator::new(&g4, 10).unwrap();
        for s in 0..=2 {
            let (lap, dres) = ev4.eigen_residuals(s, 1.3).unwrap();
            assert!(lap == 0.0);
            assert!(dres < 1e-8, "s={s} d={dres}");
        }
    }

    #[test]
    fn equivariance_under_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let (_, gen) = build_so3_rep(2).unwrap();
        let ev = SphericalEvaluator::new(&gen, 24).unwrap();
        for _ in 0..3 {
            let coeffs: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let k = RotationParams::So3 { coeffs };
            for s in [0, 2] {
                let r = ev.equivariance_residual(s, 1.1, &y, &k).unwrap();
                assert!(r < 1e-8, "s={s} r={r}");
            }
        }
        let (_, g4) = build_so4_rep(1, 1).unwrap();
        let ev4 = SphericalEvaluator::new(&g4, 20).unwrap();
        for _ in 0..3 {
            let qv = |rng: &mut ChaCha8Rng| {
                let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
            };
            let k = RotationParams::So4 { u: qv(&mut rng), v: qv(&mut rng) };
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.7..0.7)).collect();
            let r = ev4.equivariance_residual(1, 0.8, &y, &k).unwrap();
            assert!(r < 1e-8, "r={r}");
        }
    }

    #[test]
    fn boundedness_on_sample_grid() {
        let (_, gen) = build_so3_rep(2).unwrap();
        let ev = SphericalEvaluator::new(&gen, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..10 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let rho = rng.gen_range(0.0..2.5);
            for s in 0..=4 {
                let p = ev.phi(s, rho, &y).unwrap();
                assert!(p.op_norm() <= 1.0 + 1e-6);
            }
        }
    }

    #[test]
    fn spectrum_point_examples() {
        let label = TauLabel::so3(1).unwrap();
        let pts = spectrum_points(&label, &[0.0]).unwrap();
        assert!(pts.iter().all(|p| p.xi1 == 0.0 && p.xi2 == 0.0));
        let pts = spectrum_points(&label, &[2.0]).unwrap();
        let got: Vec<(f64, f64)> = pts.iter().map(|p| (p.xi1, p.xi2)).collect();
        assert_eq!(got, vec![(4.0, -2.0), (4.0, 0.0), (4.0, 2.0)]);
        let label4 = TauLabel::so4(1, 1).unwrap();
        let pts = spectrum_points(&label4, &[1.0]).unwrap();
        let got: Vec<(f64, f64)> = pts.iter().map(|p| (p.xi1, p.xi2)).collect();
        assert_eq!(got, vec![(1.0, 1.0), (1.0, -3.0)]);
        assert!(spectrum_points(&label, &[-1.0]).is_err());
    }

    #[test]
    fn refinement_agreement_regression() {
        let (_, gen) = build_so3_rep(1).unwrap();
        let ev = SphericalEvaluator::new(&gen, 20).unwrap();
        let fine = ev.refined().unwrap();
        let y = [1.0, 0.0, 0.0];
        for s in 0..=2 {
            let a = ev.phi(s, 1.0, &y).unwrap();
            let b = fine.phi(s, 1.0, &y).unwrap();
            assert!(a.sub(&b).max_abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn q_tau_is_quadratic_in_eta_for_so4() {
        // fit each entry of Q as a quadratic form on 20 random directions and
        // check 5 held-out points
        let (_, gen) = build_so4_rep(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let monomials = |e: &[f64]| -> Vec<f64> {
            let mut m = vec![];
            for i in 0..4 {
                for j in i..4 {
                    m.push(e[i] * e[j]);
                }
            }
            m
        };
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let train: Vec<Vec<f64>> = (0..20).map(|_| sample(&mut rng)).collect();
        let test: Vec<Vec<f64>> = (0..5).map(|_| sample(&mut rng)).collect();
        let d = gen.dim();
        let qs_train: Vec<CMat> =
            train.iter().map(|e| q_tau_matrix(&gen, e).unwrap()).collect();
        let qs_test: Vec<CMat> = test.iter().map(|e| q_tau_matrix(&gen, e).unwrap()).collect();
        let nm = 10;
        for i in 0..d {
            for j in 0..d {
                for part in 0..2 {
                    let val = |q: &CMat| if part == 0 { q[(i, j)].re } else { q[(i, j)].im };
                    // normal equations for least squares
                    let mut ata = vec![vec![0.0; nm]; nm];
                    let mut atb = vec![0.0; nm];
                    for (e, q) in train.iter().zip(&qs_train) {
                        let m = monomials(e);
                        for a in 0..nm {
                            for b in 0..nm {
                                ata[a][b] += m[a] * m[b];
                            }
                            atb[a] += m[a] * val(q);
                        }
                    }
                    let coef = solve_real(&ata, &atb).unwrap();
                    for (e, q) in test.iter().zip(&qs_test) {
                        let m = monomials(e);
                        let pred: f64 = m.iter().zip(&coef).map(|(a, b)| a * b).sum();
                        assert!(
                            (pred - val(q)).abs() < 1e-10,
                            "entry ({i},{j}) part {part}: {} vs {}",
                            pred,
                            val(q)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn phixi_empirical_constant() {
        // The derivative-side representation of Phi carries the constant
        // d_tau / d_sigma_s (no (2 pi)^n with the normalized sphere measure).
        let (_, gen) = build_so3_rep(1).unwrap();
        let ev = SphericalEvaluator::new(&gen, 24).unwrap();
        let y = [0.31, 0.12, -0.25];
        for s in 0..=2 {
            let c = phixi_constant(&ev, s, &y).unwrap();
            assert!((c - 3.0).abs() < 1e-3, "s={s} c={c}");
        }
    }
}
