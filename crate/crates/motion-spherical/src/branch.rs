//! Branch data of a K-type: the distinguished operator B_tau, its integer
//! spectrum, the spectral projections, and the isotypic structure of End(V).
//!
//! B_tau is -i dtau(X_1) for n = 3 and -sum_a dtau_nu(U_a) ⊗ dtau_mu(V_a) for
//! n = 4. Its eigenvalues are integers given by closed formulas, so spectral
//! projections are Lagrange polynomials in B with exactly known nodes; nothing
//! here depends on numerical eigenvectors.

use crate::cmatrix::{hermitian_eig, CMat, C64};
use crate::reps::{GeneratorImages, TauLabel};
use crate::{Error, Result};

/// Evaluate a real-coefficient polynomial (ascending coefficients) at a matrix.
pub fn matrix_polynomial(coeffs: &[f64], m: &CMat) -> CMat {
    let d = m.rows;
    let mut acc = CMat::zeros(d, d);
    for &c in coeffs.iter().rev() {
        acc = acc.mul(m);
        for i in 0..d {
            acc[(i, i)] += C64::new(c, 0.0);
        }
    }
    acc
}

/// Expand prod_j (t - roots[j]) into ascending coefficients.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k] -= r * c;
            next[k + 1] += c;
        }
        coeffs = next;
    }
    coeffs
}

#[derive(Debug, Clone)]
pub struct BranchData {
    pub label: TauLabel,
    /// The branch operator B_tau (Hermitian, integer spectrum).
    pub b: CMat,
    /// lambda_{s,tau}, indexed by the branch index s (NOT sorted by value).
    pub lambdas: Vec<i64>,
    /// Multiplicities d_{sigma_s}.
    pub weights: Vec<usize>,
    /// Spectral projections P_{s,tau} = p_{s,tau}(B).
    pub projections: Vec<CMat>,
    /// Monic orthogonal polynomials q_tau^l, ascending coefficients.
    pub qpolys: Vec<Vec<f64>>,
}

/// Assemble B_tau from generator images.
pub fn b_matrix(gen: &GeneratorImages) -> CMat {
    match gen.label.n {
        3 => gen.images[0].scale(C64::new(0.0, -1.0)),
        4 => {
            let d = gen.dim();
            let mut b = CMat::zeros(d, d);
            for a in 0..3 {
                b = b.sub(&gen.left[a].kron(&gen.right[a]));
            }
            b
        }
        _ => unreachable!(),
    }
}

pub fn weight_dimension(label: &TauLabel, s: usize) -> Result<usize> {
    label.weight_dim(s)
}

pub fn build_branch_data(gen: &GeneratorImages) -> Result<BranchData> {
    let label = gen.label;
    let a = label.a_tau();
    let lambdas: Vec<i64> = (0..=a).map(|s| label.lambda(s).unwrap()) .collect();
    let weights: Vec<usize> = (0..=a).map(|s| label.weight_dim(s).unwrap()).collect();
    let b = b_matrix(gen);

    // Guard: the numerically diagonalized spectrum must agree with the closed
    // formulas (as a multiset); a disagreement signals a representation bug.
    let (vals, _) = hermitian_eig(&b);
    let mut expected: Vec<f64> = lambdas
        .iter()
        .zip(&weights)
        .flat_map(|(&l, &w)| std::iter::repeat(l as f64).take(w))
        .collect();
    expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if vals.len() != expected.len() {
        return Err(Error::Numerical("branch operator has wrong dimension".into()));
    }
    for (got, want) in vals.iter().zip(&expected) {
        if (got - want).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "eigenvalue mismatch for {}: numerical {got} vs closed form {want}",
                label.describe()
            )));
        }
    }

    // P_s by Lagrange interpolation at the integer nodes.
    let d = label.d_tau();
    let mut projections = Vec::with_capacity(a + 1);
    for s in 0..=a {
        let mut p = CMat::identity(d);
        for j in 0..=a {
            if j == s {
                continue;
            }
            let mut shifted = b.clone();
            for i in 0..d {
                shifted[(i, i)] -= C64::new(lambdas[j] as f64, 0.0);
            }
            p = p.mul(&shifted).scale_re(1.0 / (lambdas[s] - lambdas[j]) as f64);
        }
        projections.push(p);
    }

    let qpolys = monic_q_polys(&label)?;
    Ok(BranchData { label, b, lambdas, weights, projections, qpolys })
}

/// Monic orthogonal polynomials for the discrete measure sum_s d_{sigma_s}
/// delta_{lambda_s}, by the Stieltjes three-term recurrence
/// q_{k+1} = (t - a_k) q_k - b_k q_{k-1} (numerically stable, unlike naive
/// Gram-Schmidt at the higher degrees). Ascending coefficients.
pub fn monic_q_polys(label: &TauLabel) -> Result<Vec<Vec<f64>>> {
    let a = label.a_tau();
    let nodes: Vec<f64> = (0..=a).map(|s| label.lambda(s).unwrap() as f64).collect();
    let w: Vec<f64> = (0..=a).map(|s| label.weight_dim(s).unwrap() as f64).collect();
    let inner = |p: &[f64], q: &[f64]| -> f64 {
        nodes
            .iter()
            .zip(&w)
            .map(|(&t, &wi)| wi * eval_poly(p, t) * eval_poly(q, t))
            .sum()
    };
    let mut qs: Vec<Vec<f64>> = vec![vec![1.0]];
    let mut norms = vec![inner(&qs[0], &qs[0])];
    for k in 0..a {
        let qk = qs[k].clone();
        let mut next = vec![0.0; qk.len() + 1];
        for (i, &c) in qk.iter().enumerate() {
            next[i + 1] = c; // t * q_k
        }
        let ak = inner(&next, &qk) / norms[k];
        for (i, &c) in qk.iter().enumerate() {
            next[i] -= ak * c;
        }
        if k > 0 {
            let bk = norms[k] / norms[k - 1];
            for (i, &c) in qs[k - 1].iter().enumerate() {
                next[i] -= bk * c;
            }
        }
        norms.push(inner(&next, &next));
        qs.push(next);
    }
    Ok(qs)
}

pub fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Which factor an ad-Casimir acts through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Full,  // n = 3
    Left,  // n = 4, U-generators
    Right, // n = 4, V-generators
}

/// The isotypic decomposition of End(V_tau) under conjugation.
///
/// Projections onto the levels are Lagrange polynomials in the ad-Casimir
/// operator(s), applied to matrices on demand; nothing of size d^2 x d^2 is
/// ever formed. For n = 3 levels are l = 0..2mu with eigenvalue l(l+1); for
/// n = 4 they are pairs (j, k), j <= 2nu, k <= 2mu, with per-factor
/// eigenvalues (2j(2j+2)... in doubled form 4j(j+1) each.
#[derive(Debug, Clone)]
pub struct IsotypicLadder {
    pub label: TauLabel,
    gens: GeneratorImages,
    /// Eigenvalues of the (left) ad-Casimir per level.
    pub left_eigs: Vec<f64>,
    /// Right-factor eigenvalues (n = 4 only).
    pub right_eigs: Vec<f64>,
}

pub fn ad_casimir_decomposition(gen: &GeneratorImages) -> Result<IsotypicLadder> {
    let label = gen.label;
    let ladder = match label.n {
        3 => {
            let lmax = label.two_mu as usize;
            let eigs = (0..=lmax).map(|l| (l * (l + 1)) as f64).collect();
            IsotypicLadder { label, gens: gen.clone(), left_eigs: eigs, right_eigs: vec![] }
        }
        4 => {
            let jmax = label.two_nu as usize;
            let kmax = label.two_mu as usize;
            let le = (0..=jmax).map(|j| (4 * j * (j + 1)) as f64).collect();
            let re = (0..=kmax).map(|k| (4 * k * (k + 1)) as f64).collect();
            IsotypicLadder { label, gens: gen.clone(), left_eigs: le, right_eigs: re }
        }
        _ => unreachable!(),
    };
    // Sanity: level dimensions must match the closed forms. The honest
    // superoperator-trace check is quadratic in d_tau, so run it only at
    // small dimension; larger types are covered by the same check in tests.
    if label.d_tau() <= 6 {
        ladder.check_dims()?;
    }
    Ok(ladder)
}

impl IsotypicLadder {
    fn side_gens(&self, side: Side) -> &[CMat] {
        match side {
            Side::Full => &self.gens.images[..],
            Side::Left => &self.gens.images[..3],
            Side::Right => &self.gens.images[3..6],
        }
    }

    /// Apply the ad-Casimir -sum_a [G_a, [G_a, .]] of one factor.
    fn cad(&self, side: Side, a: &CMat) -> CMat {
        let mut out = CMat::zeros(a.rows, a.cols);
        for g in self.side_gens(side) {
            let inner = g.commutator(a);
            out = out.sub(&g.commutator(&inner));
        }
        out
    }

    fn project_side(&self, side: Side, level: usize, a: &CMat) -> CMat {
        let eigs = match side {
            Side::Full | Side::Left => &self.left_eigs,
            Side::Right => &self.right_eigs,
        };
        let mut x = a.clone();
        for (m, &em) in eigs.iter().enumerate() {
            if m == level {
                continue;
            }
            let num = self.cad(side, &x).sub(&x.scale_re(em));
            x = num.scale_re(1.0 / (eigs[level] - em));
        }
        x
    }

    /// n = 3: project onto W^l.
    pub fn project_w(&self, ell: usize, a: &CMat) -> Result<CMat> {
        if self.label.n != 3 || ell >= self.left_eigs.len() {
            return Err(Error::IndexOutOfRange(format!("no level W^{ell} for {}", self.label.describe())));
        }
        Ok(self.project_side(Side::Full, ell, a))
    }

    /// n = 4: project onto W^{j,k} = W^j ⊗ W^k.
    pub fn project_wjk(&self, j: usize, k: usize, a: &CMat) -> Result<CMat> {
        if self.label.n != 4 || j >= self.left_eigs.len() || k >= self.right_eigs.len() {
            return Err(Error::IndexOutOfRange(format!(
                "no level W^({j},{k}) for {}",
                self.label.describe()
            )));
        }
        let half = self.project_side(Side::Left, j, a);
        Ok(self.project_side(Side::Right, k, &half))
    }

    /// The level that polynomials in B of exact degree l occupy: W^l for
    /// n = 3, W^{l,l} for n = 4.
    pub fn project_diag(&self, ell: usize, a: &CMat) -> Result<CMat> {
        match self.label.n {
            3 => self.project_w(ell, a),
            _ => self.project_wjk(ell, ell, a),
        }
    }

    pub fn dim_formula(&self, j: usize, k: usize) -> usize {
        match self.label.n {
            3 => 2 * j + 1,
            _ => (2 * j + 1) * (2 * k + 1),
        }
    }

    /// Dimension of a level by the superoperator trace sum_{pq} <E_pq, Pi E_pq>.
    pub fn dim_by_trace(&self, j: usize, k: usize) -> Result<f64> {
        let d = self.label.d_tau();
        let mut tr = 0.0;
        for p in 0..d {
            for q in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(p, q)] = C64::new(1.0, 0.0);
                let pe = match self.label.n {
                    3 => self.project_w(j, &e)?,
                    _ => self.project_wjk(j, k, &e)?,
                };
                tr += pe[(p, q)].re;
            }
        }
        Ok(tr)
    }

    fn check_dims(&self) -> Result<()> {
        let pairs: Vec<(usize, usize)> = match self.label.n {
            3 => (0..self.left_eigs.len()).map(|l| (l, 0)).collect(),
            _ => {
                let mut v = vec![];
                for j in 0..self.left_eigs.len() {
                    for k in 0..self.right_eigs.len() {
                        v.push((j, k));
                    }
                }
                v
            }
        };
        for (j, k) in pairs {
            let got = self.dim_by_trace(j, k)?;
            let want = self.dim_formula(j, k) as f64;
            if (got - want).abs() > 1e-8 {
                return Err(Error::Numerical(format!(
                    "degenerate eigenspace: level ({j},{k}) of {} has trace dimension {got}, expected {want}",
                    self.label.describe()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{build_so3_rep, build_so4_rep};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn so3_mu2_branch_data() {
        let (_, gen) = build_so3_rep(2).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        assert_eq!(bd.lambdas, vec![-2, -1, 0, 1, 2]);
        assert_eq!(bd.weights, vec![1; 5]);
        // projections resolve the identity and diagonalize B
        let d = 5;
        let mut sum = CMat::zeros(d, d);
        let mut recon = CMat::zeros(d, d);
        for (s, p) in bd.projections.iter().enumerate() {
            sum = sum.add(p);
            recon = recon.add(&p.scale_re(bd.lambdas[s] as f64));
            assert!((p.trace().re - bd.weights[s] as f64).abs() < 1e-12);
            for (s2, p2) in bd.projections.iter().enumerate() {
                let prod = p.mul(p2);
                let expect = if s == s2 { p.clone() } else { CMat::zeros(d, d) };
                assert!(prod.sub(&expect).max_abs() < 1e-12);
            }
        }
        assert!(sum.sub(&CMat::identity(d)).max_abs() < 1e-12);
        assert!(recon.sub(&bd.b).max_abs() < 1e-12);
    }

    #[test]
    fn so4_half_half_branch_data() {
        let (_, gen) = build_so4_rep(1, 1).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        assert_eq!(bd.lambdas, vec![1, -3]);
        assert_eq!(bd.weights, vec![3, 1]);
        assert_eq!(3 * 1 + 1 * (-3), 0);
        assert!(bd.b.trace().norm() < 1e-13);
        let sum = bd.projections[0].add(&bd.projections[1]);
        assert!(sum.sub(&CMat::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn trivial_type_has_zero_branch_operator() {
        let (_, gen) = build_so4_rep(0, 0).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        assert_eq!(bd.lambdas, vec![0]);
        assert!(bd.b.max_abs() < 1e-15);
    }

    #[test]
    fn clebsch_gordan_operator_identity() {
        // B = 2 (C_total - C_left - C_right) with spin-normalized Casimirs.
        for &(tn, tm) in &[(1u32, 1u32), (2, 2), (3, 1), (2, 4)] {
            let (_, gen) = build_so4_rep(tn, tm).unwrap();
            let d = gen.dim();
            let b = b_matrix(&gen);
            let half_mi = C64::new(0.0, -0.5); // J_a = dtau(U_a) / (2i)
            let mut rhs = CMat::zeros(d, d);
            for a in 0..3 {
                let jl = gen.images[a].scale(half_mi);
                let jr = gen.images[3 + a].scale(half_mi);
                let jt = jl.add(&jr);
                // C_total - C_left - C_right restricted to the a-th term is
                // J_t^2 - J_l^2 - J_r^2 = 2 J_l J_r (factors commute).
                rhs = rhs.add(&jt.mul(&jt)).sub(&jl.mul(&jl)).sub(&jr.mul(&jr));
            }
            assert!(b.sub(&rhs.scale_re(2.0)).max_abs() < 1e-10, "({tn},{tm})");
        }
    }

    #[test]
    fn q_polys_match_hand_values() {
        let mu0 = monic_q_polys(&TauLabel::so3(0).unwrap()).unwrap();
        assert_eq!(mu0, vec![vec![1.0]]);
        let mu1 = monic_q_polys(&TauLabel::so3(1).unwrap()).unwrap();
        assert_eq!(mu1[1], vec![0.0, 1.0]); // q^1 = t
        assert!((mu1[2][0] + 2.0 / 3.0).abs() < 1e-14);
        assert!(mu1[2][1].abs() < 1e-14);
        assert!((mu1[2][2] - 1.0).abs() < 1e-14);
        let mu2 = monic_q_polys(&TauLabel::so3(2).unwrap()).unwrap();
        // q^3 = t^3 - (17/5) t over nodes {-2..2}
        assert!((mu2[3][1] + 17.0 / 5.0).abs() < 1e-13);
        assert!(mu2[3][0].abs() < 1e-13 && mu2[3][2].abs() < 1e-13);
        // q^1 = t for an n=4 type too
        let q44 = monic_q_polys(&TauLabel::so4(2, 2).unwrap()).unwrap();
        assert_eq!(q44[1], vec![0.0, 1.0]);
    }

    #[test]
    fn so3_parity_of_q_polys() {
        let qs = monic_q_polys(&TauLabel::so3(3).unwrap()).unwrap();
        for (l, q) in qs.iter().enumerate() {
            for (k, &c) in q.iter().enumerate() {
                if (k + l) % 2 == 1 {
                    assert!(c.abs() < 1e-12, "l={l} k={k} c={c}");
                }
            }
        }
    }

    #[test]
    fn ad_casimir_dims_and_eigenvalues_mu1() {
        let (_, gen) = build_so3_rep(1).unwrap();
        let ladder = ad_casimir_decomposition(&gen).unwrap();
        assert_eq!(ladder.left_eigs, vec![0.0, 2.0, 6.0]);
        for l in 0..3 {
            let dim = ladder.dim_by_trace(l, 0).unwrap();
            assert!((dim - (2 * l + 1) as f64).abs() < 1e-10);
        }
        // eigenvalue property: C_ad Pi_l A = l(l+1) Pi_l A
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = CMat::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        for l in 0..3 {
            let pa = ladder.project_w(l, &a).unwrap();
            let ca = ladder.cad(Side::Full, &pa);
            assert!(ca.sub(&pa.scale_re((l * (l + 1)) as f64)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn ad_casimir_dims_so4() {
        let (_, gen) = build_so4_rep(2, 2).unwrap();
        let ladder = ad_casimir_decomposition(&gen).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let dim = ladder.dim_by_trace(j, k).unwrap();
                assert!((dim - ((2 * j + 1) * (2 * k + 1)) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn q_of_b_lies_in_isotypic_level() {
        // n = 3, mu = 2
        let (_, gen) = build_so3_rep(2).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        let ladder = ad_casimir_decomposition(&gen).unwrap();
        for l in 0..=4usize {
            let qb = matrix_polynomial(&bd.qpolys[l], &bd.b);
            let proj = ladder.project_w(l, &qb).unwrap();
            let resid = qb.sub(&proj).max_abs();
            assert!(resid < 1e-10, "mu=2 l={l} resid={resid}");
        }
        // n = 4, nu = mu = 1/2: q^1(B) = B should sit in W^{1,1}
        let (_, gen) = build_so4_rep(1, 1).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        let ladder = ad_casimir_decomposition(&gen).unwrap();
        let proj = ladder.project_wjk(1, 1, &bd.b).unwrap();
        assert!(bd.b.sub(&proj).max_abs() < 1e-11);
    }

    #[test]
    fn degree_filtration() {
        let (_, gen) = build_so3_rep(2).unwrap();
        let bd = build_branch_data(&gen).unwrap();
        let ladder = ad_casimir_decomposition(&gen).unwrap();
        // p(t) = t^2 + 0.5 t: components above level 2 vanish, level 2 nonzero
        let p = matrix_polynomial(&[0.0, 0.5, 1.0], &bd.b);
        let mut rebuilt = CMat::zeros(5, 5);
        for l in 0..=2 {
            rebuilt = rebuilt.add(&ladder.project_w(l, &p).unwrap());
        }
        assert!(p.sub(&rebuilt).max_abs() < 1e-10);
        assert!(ladder.project_w(2, &p).unwrap().max_abs() > 1e-3);
        for l in 3..=4 {
            assert!(ladder.project_w(l, &p).unwrap().max_abs() < 1e-10);
        }
    }
}
