//! Quadrature rules and scalar special functions.
//!
//! Sphere rules are product rules indexed by a polar angle measured from the
//! first coordinate axis. Nodes carrying the same first coordinate are grouped
//! into "polar classes": kernel evaluations that only see eta_1 can then be
//! aggregated per class instead of per node. All rules are antipode-symmetric
//! by construction, with the pairing stored explicitly, so parity identities
//! hold at the level of the quadrature sum rather than only in the limit.

use crate::{Error, Result};

/// Gauss-Legendre rule with `n` nodes on [-1, 1], exact through degree 2n-1.
///
/// Nodes are returned ascending and are exactly symmetric about 0: the rule is
/// computed on half the interval and mirrored.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (p2, d2) = legendre_and_deriv(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i counts from the +1 end; store ascending and mirror.
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature rule on the unit sphere S^{n-1} (n = 3 or 4) against the
/// *normalized* rotation-invariant measure, exact for polynomials in the
/// ambient coordinates up to total degree `degree`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    /// Ambient dimension, 3 or 4.
    pub n: usize,
    /// Guaranteed polynomial exactness degree.
    pub degree: usize,
    /// Node coordinates; entries beyond `n` are zero.
    pub nodes: Vec<[f64; 4]>,
    /// Weights, summing to 1.
    pub weights: Vec<f64>,
    /// Distinct first-coordinate values, one per polar class.
    pub polar_values: Vec<f64>,
    /// Polar class of each node (index into `polar_values`).
    pub polar_class: Vec<usize>,
    /// Index of the antipodal node: nodes[antipode[k]] == -nodes[k] exactly.
    pub antipode: Vec<usize>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a scalar function against the normalized measure.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(eta, w)| w * f(&eta[..self.n]))
            .sum()
    }
}

/// Unit azimuth directions, exactly antipode-paired: dir[j + m/2] = -dir[j].
fn azimuth_directions(m: usize) -> Vec<(f64, f64)> {
    debug_assert!(m % 2 == 0);
    let mut dirs = vec![(0.0, 0.0); m];
    for j in 0..m / 2 {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let d = (phi.cos(), phi.sin());
        dirs[j] = d;
        dirs[j + m / 2] = (-d.0, -d.1);
    }
    dirs
}

pub fn sphere_quadrature(n: usize, degree: usize) -> Result<SphereRule> {
    if n != 3 && n != 4 {
        return Err(Error::UnsupportedDegree(format!(
            "sphere rules exist for ambient dimension 3 or 4, got {n}"
        )));
    }
    if degree == 0 {
        return Err(Error::UnsupportedDegree("exactness degree must be >= 1".into()));
    }
    match n {
        3 => Ok(sphere_rule_s2(degree)),
        4 => Ok(sphere_rule_s3(degree)),
        _ => unreachable!(),
    }
}

/// S^2 rule: Gauss-Legendre in t = eta_1, uniform (even-count) azimuth.
fn sphere_rule_s2(degree: usize) -> SphereRule {
    let nt = degree / 2 + 1; // 2*nt - 1 >= degree
    let mut nphi = degree + 1;
    if nphi % 2 == 1 {
        nphi += 1;
    }
    let (tn, tw) = gauss_legendre(nt);
    let dirs = azimuth_directions(nphi);

    let mut nodes = Vec::with_capacity(nt * nphi);
    let mut weights = Vec::with_capacity(nt * nphi);
    let mut polar_class = Vec::with_capacity(nt * nphi);
    let mut antipode = vec![0usize; nt * nphi];
    for (it, (&t, &wt)) in tn.iter().zip(&tw).enumerate() {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (j, &(c, sn)) in dirs.iter().enumerate() {
            nodes.push([t, s * c, s * sn, 0.0]);
            weights.push(0.5 * wt / nphi as f64);
            polar_class.push(it);
            // antipode: mirrored polar slab, opposite azimuth.
            let idx = it * nphi + j;
            antipode[idx] = (nt - 1 - it) * nphi + ((j + nphi / 2) % nphi);
        }
    }
    SphereRule { n: 3, degree, nodes, weights, polar_values: tn, polar_class, antipode }
}

/// S^3 rule: Gauss-Chebyshev (2nd kind) in t = eta_1, an S^2 rule across.
fn sphere_rule_s3(degree: usize) -> SphereRule {
    // N-point Gauss-Chebyshev-U integrates sqrt(1-t^2)-weighted polynomials
    // exactly through degree 2N-1.
    let nchi = degree / 2 + 1;
    let inner = sphere_rule_s2(degree);

    // Chebyshev-U nodes cos(k pi/(N+1)), mirrored for exact symmetry.
    let mut tn = vec![0.0; nchi];
    let mut tw = vec![0.0; nchi];
    for k in 0..(nchi + 1) / 2 {
        let theta = (k + 1) as f64 * std::f64::consts::PI / (nchi + 1) as f64;
        let x = theta.cos();
        // Normalized so the weights sum to 1 (the U-weight has total mass pi/2).
        let w = 2.0 / (nchi + 1) as f64 * theta.sin() * theta.sin();
        tn[k] = x;
        tw[k] = w;
        tn[nchi - 1 - k] = -x;
        tw[nchi - 1 - k] = w;
    }
    if nchi % 2 == 1 {
        tn[nchi / 2] = 0.0;
    }
    // Store descending-to-ascending consistently with S2 (ascending).
    tn.reverse();
    tw.reverse();

    let ni = inner.len();
    let mut nodes = Vec::with_capacity(nchi * ni);
    let mut weights = Vec::with_capacity(nchi * ni);
    let mut polar_class = Vec::with_capacity(nchi * ni);
    let mut antipode = vec![0usize; nchi * ni];
    for (ic, (&t, &wt)) in tn.iter().zip(&tw).enumerate() {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (j, (om, &wo)) in inner.nodes.iter().zip(&inner.weights).enumerate() {
            nodes.push([t, s * om[0], s * om[1], s * om[2]]);
            weights.push(wt * wo);
            polar_class.push(ic);
            antipode[ic * ni + j] = (nchi - 1 - ic) * ni + inner.antipode[j];
        }
    }
    SphereRule { n: 4, degree, nodes, weights, polar_values: tn, polar_class, antipode }
}

/// Gauss-Legendre rule on [0, r_max]. Weights are plain dr-weights; the
/// surface-area factor r^{n-1} is applied by `integrate`, not baked in.
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub r_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    /// ∫_0^R f(r) r^{n-1} dr by this rule.
    pub fn integrate(&self, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * r.powi(n as i32 - 1) * f(r))
            .sum()
    }
}

pub fn radial_quadrature(r_max: f64, count: usize) -> Result<RadialRule> {
    if !(r_max > 0.0) || count == 0 {
        return Err(Error::Precondition(format!(
            "radial rule needs r_max > 0 and count >= 1, got r_max={r_max}, count={count}"
        )));
    }
    let (x, w) = gauss_legendre(count);
    let half = 0.5 * r_max;
    let nodes = x.iter().map(|&t| half * (t + 1.0)).collect();
    let weights = w.iter().map(|&wi| half * wi).collect();
    Ok(RadialRule { r_max, nodes, weights })
}

/// The scalar spherical function: the normalized Fourier transform of the
/// uniform measure on S^{n-1}, evaluated at radius t.
///
/// phi(3, t) = sin(t)/t and phi(4, t) = 2 J_1(t)/t, both equal to 1 at t = 0.
pub fn phi_scalar(n: usize, t: f64) -> Result<f64> {
    match n {
        3 => {
            if t.abs() < 1e-8 {
                Ok(1.0 - t * t / 6.0)
            } else {
                Ok(t.sin() / t)
            }
        }
        4 => {
            if t.abs() < 1e-4 {
                let t2 = t * t;
                Ok(1.0 - t2 / 8.0 + t2 * t2 / 192.0)
            } else {
                Ok(2.0 * bessel_j1(t) / t)
            }
        }
        _ => Err(Error::Precondition(format!("phi_scalar defined for n = 3 or 4, got {n}"))),
    }
}

/// Bessel function J_1. Power series below |t| = 12, Hankel asymptotics above;
/// both branches agree to ~1e-9 relative near the crossover.
pub fn bessel_j1(t: f64) -> f64 {
    let x = t.abs();
    let val = if x < 12.0 {
        // J_1(x) = sum_m (-1)^m (x/2)^{2m+1} / (m! (m+1)!)
        let h = x / 2.0;
        let mut term = h;
        let mut sum = h;
        let h2 = h * h;
        for m in 1..60 {
            term *= -h2 / (m as f64 * (m + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-30) {
                break;
            }
        }
        sum
    } else {
        // J_1(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)), chi = x - 3pi/4,
        // with P, Q the even/odd halves of the Hankel series for mu = 4.
        let mu = 4.0;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut prod = 1.0;
        for j in 1..=11usize {
            let odd = (2 * j - 1) as f64;
            prod *= (mu - odd * odd) / (j as f64 * 8.0 * x);
            if j % 2 == 1 {
                // Q = p1 - p3 + p5 - ...
                let sgn = if ((j - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                q += sgn * prod;
            } else {
                // P = 1 - p2 + p4 - ...
                let sgn = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
                p += sgn * prod;
            }
        }
        let chi = x - 3.0 * std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    if t < 0.0 {
        -val
    } else {
        val
    }
}

/// Finite-difference weights on arbitrary nodes (Fornberg's algorithm).
///
/// Returns `w[d][k]`: the weight of `f(x[k])` in the approximation of the
/// d-th derivative at `z`, for d = 0..=max_deriv. Exact for polynomials of
/// degree < x.len().
pub fn fd_weights(z: f64, x: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(n > max_deriv, "need more nodes than the derivative order");
    let m = max_deriv;
    let mut w = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    w[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Symmetric central stencil offsets -half..=half scaled by h.
pub fn central_nodes(half: usize, h: f64) -> Vec<f64> {
    (-(half as i64)..=half as i64).map(|k| k as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness_and_symmetry() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for i in 0..5 {
            assert_eq!(x[i], -x[4 - i]);
        }
        // degree 9 monomial: integral of t^8 over [-1,1] is 2/9
        let m8: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
        let m9: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(9)).sum();
        assert!(m9.abs() < 1e-14);
    }

    #[test]
    fn sphere_moments_match_uniform_measure() {
        // E[eta_1^2] = 1/n, E[eta_1^4] = 3/(n(n+2)), E[eta_1^2 eta_2^2] = 1/(n(n+2)).
        for &(n, m2, m4, mix) in
            &[(3usize, 1.0 / 3.0, 0.2, 1.0 / 15.0), (4, 0.25, 0.125, 1.0 / 24.0)]
        {
            let rule = sphere_quadrature(n, 8).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13);
            let i2 = rule.integrate(|e| e[0] * e[0]);
            let i4 = rule.integrate(|e| e[0].powi(4));
            let ix = rule.integrate(|e| e[0] * e[0] * e[1] * e[1]);
            let iodd = rule.integrate(|e| e[0].powi(3) * e[1]);
            assert!((i2 - m2).abs() < 1e-13, "n={n} m2");
            assert!((i4 - m4).abs() < 1e-13, "n={n} m4");
            assert!((ix - mix).abs() < 1e-13, "n={n} mixed");
            assert!(iodd.abs() < 1e-14, "n={n} odd");
        }
    }

    #[test]
    fn sphere_rule_antipodes_are_exact() {
        for &n in &[3usize, 4] {
            let rule = sphere_quadrature(n, 7).unwrap();
            for k in 0..rule.len() {
                let a = rule.antipode[k];
                assert_eq!(rule.antipode[a], k);
                for c in 0..4 {
                    assert_eq!(rule.nodes[a][c], -rule.nodes[k][c], "n={n} node {k} coord {c}");
                }
                assert_eq!(rule.weights[a], rule.weights[k]);
            }
        }
    }

    #[test]
    fn sphere_nodes_group_by_polar_value() {
        let rule = sphere_quadrature(4, 6).unwrap();
        for (k, eta) in rule.nodes.iter().enumerate() {
            assert_eq!(eta[0], rule.polar_values[rule.polar_class[k]]);
        }
        assert!(rule.polar_values.len() * 20 < rule.len());
    }

    #[test]
    fn radial_rule_matches_known_integrals() {
        // g = 1, n = 3, R = 1: integral of r^2 dr over [0,1] = 1/3
        let r = radial_quadrature(1.0, 8).unwrap();
        assert!((r.integrate(3, |_| 1.0) - 1.0 / 3.0).abs() < 1e-14);
        // g = r^2, n = 4, R = 2: integral of r^5 dr over [0,2] = 2^6/6
        let r = radial_quadrature(2.0, 8).unwrap();
        assert!((r.integrate(4, |x| x * x) - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn phi_scalar_values() {
        assert_eq!(phi_scalar(3, 0.0).unwrap(), 1.0);
        assert_eq!(phi_scalar(4, 0.0).unwrap(), 1.0);
        assert!(phi_scalar(3, std::f64::consts::PI).unwrap().abs() < 1e-15);
        // series/closed-form agreement at the small-argument crossover
        for &t in &[1e-5, 9e-5, 2e-4] {
            let exact = 2.0 * bessel_j1(t) / t;
            assert!((phi_scalar(4, t).unwrap() - exact).abs() < 1e-14);
        }
        assert!(phi_scalar(5, 1.0).is_err());
    }

    #[test]
    fn phi_matches_sphere_average_of_plane_wave() {
        // phi(n, t) should equal the rule average of cos(t eta_1).
        for &n in &[3usize, 4] {
            let rule = sphere_quadrature(n, 40).unwrap();
            for &t in &[0.3, 1.7, 4.2] {
                let avg = rule.integrate(|e| (t * e[0]).cos());
                assert!(
                    (avg - phi_scalar(n, t).unwrap()).abs() < 1e-12,
                    "n={n} t={t}"
                );
            }
        }
    }

    /// Independent oracle: J_1(t) = (1/pi) ∫_0^pi cos(theta - t sin theta) dtheta.
    fn j1_by_integral(t: f64) -> f64 {
        let m = 20000;
        let h = std::f64::consts::PI / m as f64;
        let f = |theta: f64| (theta - t * theta.sin()).cos();
        // Simpson
        let mut s = f(0.0) + f(std::f64::consts::PI);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(k as f64 * h);
        }
        s * h / 3.0 / std::f64::consts::PI
    }

    #[test]
    fn bessel_j1_against_integral_representation() {
        for &t in &[0.5, 1.0, 3.0, 7.5, 11.0, 12.5, 14.0, 25.0, 60.0] {
            let got = bessel_j1(t);
            let want = j1_by_integral(t);
            assert!((got - want).abs() < 2e-9, "t={t}: {got} vs {want}");
        }
        assert_eq!(bessel_j1(-3.0), -bessel_j1(3.0));
    }

    #[test]
    fn fornberg_weights_recover_classical_stencils() {
        let x = central_nodes(2, 1.0);
        let w = fd_weights(0.0, &x, 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for k in 0..5 {
            assert!((w[1][k] - d1[k]).abs() < 1e-13);
            assert!((w[2][k] - d2[k]).abs() < 1e-13);
        }
        // one-sided first derivative on {0, 1, 2}
        let w = fd_weights(0.0, &[0.0, 1.0, 2.0], 1);
        for (got, want) in w[1].iter().zip(&[-1.5, 2.0, -0.5]) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
