//! Jets along spectrum curves and Schwartz extensions off the spectrum.
//!
//! The restriction of an equivariant Fourier transform to the branch curves
//! (xi1, xi2) = (rho^2, lambda_s rho^u) determines derivative data at the
//! origin.  This module extracts that data (curve jets), solves the associated
//! Vandermonde systems for Maclaurin coefficients, certifies the cofactor
//! bounds that keep those systems stable, and rebuilds two-variable fields
//! with prescribed restrictions via three independent constructions: a hull
//! cutoff, a branch-separating bump sum, and a finite Borel-type series.

use std::sync::Arc;

use num::{BigInt, One, Signed, Zero};

use crate::numerics::fd_weights;
use crate::oracle::{
    binomial_identity_sides, rat_from_f64, rat_to_f64, vandermonde_inverse, Rat,
};
use crate::reps::TauLabel;
use crate::transform::GammaTable;
use crate::{Error, Result};

/// Coefficients of the degree-17 polynomial step (C^8 at both ends), from the
/// standard smoothstep family S_8.  Integer data so every build evaluates the
/// same piecewise-rational function bit for bit.
const STEP_COEFFS: [f64; 9] = [
    24310.0, -175032.0, 556920.0, -1021020.0, 1178100.0, -875160.0, 408408.0, -109395.0, 12870.0,
];

/// Polynomial step: 0 for t <= 0, 1 for t >= 1, C^8 across the joints.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for c in STEP_COEFFS.iter().rev() {
        acc = acc * t + c;
    }
    acc * t.powi(9)
}

/// Even bump: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2), C^8 in between.
pub fn bump(x: f64) -> f64 {
    smoothstep(4.0 * (0.5 - x.abs()))
}

/// Radial plateau used by the Borel construction: 1 for |xi| <= 1/2, 0 for |xi| >= 1.
pub fn borel_phi(xi1: f64, xi2: f64) -> f64 {
    smoothstep(2.0 * (1.0 - xi1.hypot(xi2)))
}

/// Euclidean distance from xi to the spectral hull of tau.
///
/// For n = 4 the hull is the convex cone lambda_min xi1 <= xi2 <= lambda_max xi1,
/// xi1 >= 0.  For n = 3 it is the parabolic region |xi2| <= mu sqrt(xi1).
pub fn hull_distance(label: &TauLabel, xi: [f64; 2]) -> f64 {
    match label.n {
        4 => {
            let mut lmin = i64::MAX;
            let mut lmax = i64::MIN;
            for s in 0..=label.a_tau() {
                let l = label.lambda(s).expect("s in range");
                lmin = lmin.min(l);
                lmax = lmax.max(l);
            }
            let (lmin, lmax) = (lmin as f64, lmax as f64);
            if xi[0] >= 0.0 && lmin * xi[0] <= xi[1] && xi[1] <= lmax * xi[0] {
                return 0.0;
            }
            ray_distance(xi, [1.0, lmax]).min(ray_distance(xi, [1.0, lmin]))
        }
        3 => {
            let mu = label.two_mu as f64 / 2.0;
            if xi[0] >= 0.0 && xi[1].abs() <= mu * xi[0].sqrt() {
                return 0.0;
            }
            // Distance to the boundary curve w -> (w^2, mu w), taking the
            // side matching the sign of xi2.  Coarse scan plus a golden
            // section refinement is robust for this quartic objective.
            let b = xi[1].abs();
            let f = |w: f64| {
                let dx = w * w - xi[0];
                let dy = mu * w - b;
                dx * dx + dy * dy
            };
            let w_hi = 1.0 + xi[0].max(0.0).sqrt() + b;
            let m = 256;
            let mut best = (f(0.0), 0.0_f64);
            for k in 1..=m {
                let w = w_hi * k as f64 / m as f64;
                let v = f(w);
                if v < best.0 {
                    best = (v, w);
                }
            }
            let step = w_hi / m as f64;
            let (mut lo, mut hi) = ((best.1 - step).max(0.0), best.1 + step);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..60 {
                let w1 = hi - phi * (hi - lo);
                let w2 = lo + phi * (hi - lo);
                if f(w1) < f(w2) {
                    hi = w2;
                } else {
                    lo = w1;
                }
            }
            f(0.5 * (lo + hi)).sqrt()
        }
        _ => f64::NAN,
    }
}

fn ray_distance(xi: [f64; 2], dir: [f64; 2]) -> f64 {
    let t = (xi[0] * dir[0] + xi[1] * dir[1]) / (dir[0] * dir[0] + dir[1] * dir[1]);
    let t = t.max(0.0);
    (xi[0] - t * dir[0]).hypot(xi[1] - t * dir[1])
}

/// Hull cutoff: 1 within distance 1/4 of the hull, 0 beyond distance 1/2.
pub fn cutoff_eta(label: &TauLabel, xi: [f64; 2]) -> f64 {
    1.0 - smoothstep(4.0 * (hull_distance(label, xi) - 0.25))
}

// ---------------------------------------------------------------------------
// Curve jets
// ---------------------------------------------------------------------------

/// One-sided derivative data of the branch restrictions at rho = 0.
///
/// `values[s][d]` holds (d/dt)^d at t = 0+ of psi_s(t) = u(t^{2/u}, lambda_s t),
/// where u is the exponent of the K-type (1 for n = 3, 2 for n = 4).
#[derive(Debug, Clone)]
pub struct CurveJet {
    pub label: TauLabel,
    pub order: usize,
    pub values: Vec<Vec<f64>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn factorial_rat(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 1..=n as u64 {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

fn binom_rat(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for i in 0..k {
        acc *= Rat::new(BigInt::from((n - i) as u64), BigInt::from((i + 1) as u64));
    }
    acc
}

/// Weighted degree of the monomial xi1^p xi2^q along the branch curves.
fn curve_degree(label: &TauLabel, p: usize, q: usize) -> usize {
    if label.n == 3 {
        2 * p + q
    } else {
        p + q
    }
}

/// Exact curve jet of a polynomial u = sum_{p,q} poly[p][q] xi1^p xi2^q.
pub fn curve_jet_poly(label: &TauLabel, poly: &[Vec<f64>], order: usize) -> Result<CurveJet> {
    let a = label.a_tau();
    let mut values = vec![vec![0.0; order + 1]; a + 1];
    for s in 0..=a {
        let lam = label.lambda(s)? as f64;
        for (p, row) in poly.iter().enumerate() {
            for (q, &c) in row.iter().enumerate() {
                let d = curve_degree(label, p, q);
                if d <= order && c != 0.0 {
                    values[s][d] += factorial(d) * c * lam.powi(q as i32);
                }
            }
        }
    }
    Ok(CurveJet { label: label.clone(), order, values })
}

/// Rational twin of [`curve_jet_poly`]; returns values[s][d] exactly.
pub fn curve_jet_poly_rational(
    label: &TauLabel,
    poly: &[Vec<Rat>],
    order: usize,
) -> Result<Vec<Vec<Rat>>> {
    let a = label.a_tau();
    let mut values = vec![vec![Rat::zero(); order + 1]; a + 1];
    for s in 0..=a {
        let lam = Rat::from_integer(BigInt::from(label.lambda(s)?));
        for (p, row) in poly.iter().enumerate() {
            for (q, c) in row.iter().enumerate() {
                let d = curve_degree(label, p, q);
                if d <= order && !c.is_zero() {
                    let mut pow = Rat::one();
                    for _ in 0..q {
                        pow *= lam.clone();
                    }
                    values[s][d] += factorial_rat(d) * c * pow;
                }
            }
        }
    }
    Ok(values)
}

/// Curve jet from samples of the branch restrictions.
///
/// `f(s, t)` evaluates psi_s at t >= 0.  Derivatives come from one-sided
/// stencils of accuracy at least 6 (order + 7 nodes at spacing h), computed at
/// h and h/2 and Richardson-combined.  If the two estimates disagree beyond
/// 1e-6 relative the jet is reported as noisy rather than silently returned.
pub fn curve_jet_sampled(
    label: &TauLabel,
    f: &dyn Fn(usize, f64) -> f64,
    order: usize,
    h: f64,
) -> Result<CurveJet> {
    if order > 12 {
        return Err(Error::Precondition(format!("jet order {order} exceeds the stencil budget 12")));
    }
    if !(h > 0.0) {
        return Err(Error::Precondition("stencil spacing must be positive".into()));
    }
    let a = label.a_tau();
    let count = order + 7;
    let eval_grid = |step: f64| -> (Vec<f64>, Vec<Vec<f64>>) {
        let nodes: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
        let w = fd_weights(0.0, &nodes, order);
        (nodes, w)
    };
    let (nodes_c, w_c) = eval_grid(h);
    let (nodes_f, w_f) = eval_grid(0.5 * h);
    let mut values = vec![vec![0.0; order + 1]; a + 1];
    let mut worst = 0.0_f64;
    for (s, row) in values.iter_mut().enumerate() {
        let fc: Vec<f64> = nodes_c.iter().map(|&t| f(s, t)).collect();
        let ff: Vec<f64> = nodes_f.iter().map(|&t| f(s, t)).collect();
        for d in 0..=order {
            let coarse: f64 = w_c[d].iter().zip(&fc).map(|(w, v)| w * v).sum();
            let fine: f64 = w_f[d].iter().zip(&ff).map(|(w, v)| w * v).sum();
            // Leading error is O(h^p) with p = count - d >= 7.
            let p = (count - d) as i32;
            let fac = 2f64.powi(p);
            row[d] = (fac * fine - coarse) / (fac - 1.0);
            let gap = (fine - coarse).abs() / (1.0 + row[d].abs());
            worst = worst.max(gap);
        }
    }
    if worst > 1e-6 {
        return Err(Error::Numerical(format!(
            "noisy jet: stencil estimates at h and h/2 disagree by {worst:.3e}"
        )));
    }
    Ok(CurveJet { label: label.clone(), order, values })
}

// ---------------------------------------------------------------------------
// Node shift and Vandermonde solve
// ---------------------------------------------------------------------------

/// Centering shift omega for the order-m system at an n = 4 type.
///
/// omega is the eigenvalue lambda_{s*} whose removal leaves the best
/// separated node set: s* minimizes prod_{i != s} |lambda_i - lambda_s| over
/// the nodes entering the solve, ties resolved toward smaller s.  For m
/// beyond a_tau the order-a_tau shift is reused.
pub fn node_shift(label: &TauLabel, m: usize) -> Result<i64> {
    if label.n != 4 {
        return Err(Error::Precondition("node_shift applies to n = 4 types".into()));
    }
    if m == 0 {
        return Err(Error::Precondition("node_shift needs a positive order".into()));
    }
    let t = m.min(label.a_tau());
    let lams: Vec<i64> = (0..=t).map(|s| label.lambda(s).expect("s in range")).collect();
    let mut best_s = 0usize;
    let mut best: i128 = i128::MAX;
    for s in 0..=t {
        let mut prod: i128 = 1;
        for (i, &l) in lams.iter().enumerate() {
            if i != s {
                prod *= (l - lams[s]).unsigned_abs() as i128;
            }
        }
        if prod < best {
            best = prod;
            best_s = s;
        }
    }
    Ok(lams[best_s])
}

/// Solved jet system: Maclaurin data of the two-variable field at the origin.
///
/// `coeffs[d][q]` is d! a_{p,q} = binom(d, q) d1^p d2^q u(0, 0) for the
/// monomial xi1^p xi2^q of curve degree d, where q is the xi2 exponent and
/// p = d - q (n = 4) or p = (d - q)/2 (n = 3, entries with q of the wrong
/// parity are structurally absent and stored as zero).
#[derive(Debug, Clone)]
pub struct JetSystem {
    pub label: TauLabel,
    pub order: usize,
    /// Per-order centering shift (always zero for n = 3).
    pub shifts: Vec<i64>,
    /// Shifted solve nodes per order.
    pub nodes: Vec<Vec<i64>>,
    pub coeffs: Vec<Vec<f64>>,
    /// Worst relative residual among surplus equations and parity checks.
    pub residual: f64,
}

const JET_TOL: f64 = 1e-8;

fn rat_poly_eval(coeffs: &[Rat], node: &Rat) -> Rat {
    let mut pred = Rat::zero();
    let mut pow = Rat::one();
    for c in coeffs {
        pred += c * &pow;
        pow *= node.clone();
    }
    pred
}

/// Recover binomial-weighted Maclaurin coefficients from a curve jet.
///
/// The linear algebra runs over exact rationals on the dyadic images of the
/// sample values: the shifted-node Vandermonde inverses have binomially
/// bounded entries, so solving and unshifting exactly keeps the output at the
/// accuracy of the inputs instead of losing digits to cancellation.
pub fn jet_solve(jet: &CurveJet) -> Result<JetSystem> {
    let label = &jet.label;
    let a = label.a_tau();
    if jet.values.len() != a + 1 {
        return Err(Error::Precondition(format!(
            "jet carries {} branches, expected {}",
            jet.values.len(),
            a + 1
        )));
    }
    let m = jet.order;
    let mut shifts = vec![0i64; m + 1];
    let mut nodes_out: Vec<Vec<i64>> = Vec::with_capacity(m + 1);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut residual = 0.0_f64;

    for d in 0..=m {
        let mut row = vec![0.0; d + 1];
        match label.n {
            4 => {
                let omega = if d == 0 { 0 } else { node_shift(label, d)? };
                shifts[d] = omega;
                let t = d.min(a);
                let nodes: Vec<i64> =
                    (0..=t).map(|s| label.lambda(s).expect("s in range") - omega).collect();
                let inv = vandermonde_inverse(&nodes);
                let vals: Vec<Rat> =
                    (0..=a).map(|s| rat_from_f64(jet.values[s][d])).collect();
                let x: Vec<Rat> = (0..=t)
                    .map(|q| (0..=t).fold(Rat::zero(), |acc, s| acc + &inv[q][s] * &vals[s]))
                    .collect();
                for s in t + 1..=a {
                    let node = Rat::from_integer(BigInt::from(label.lambda(s)? - omega));
                    let pred = rat_to_f64(&rat_poly_eval(&x, &node));
                    let c = jet.values[s][d];
                    residual = residual.max((pred - c).abs() / (1.0 + c.abs()));
                }
                // Undo the shift: the solve found derivatives of
                // v(e1, e2) = u(e1, e2 + omega e1), so
                // d1^p d2^q u(0) = sum_i binom(p, i) (-omega)^i d1^{p-i} d2^{q+i} v(0).
                let omega_rat = Rat::from_integer(BigInt::from(omega));
                for (q, rq) in row.iter_mut().enumerate() {
                    let p = d - q;
                    let mut acc = Rat::zero();
                    let mut omega_pow = Rat::one();
                    for i in 0..=p {
                        let qq = q + i;
                        if qq <= t {
                            acc += binom_rat(p, i) * &omega_pow * &x[qq] / binom_rat(d, qq);
                        }
                        omega_pow *= -omega_rat.clone();
                    }
                    *rq = rat_to_f64(&(binom_rat(d, q) * acc));
                }
                nodes_out.push(nodes);
            }
            3 => {
                let mu = (label.two_mu / 2) as usize;
                let half = d / 2;
                let half_rat = Rat::new(BigInt::one(), BigInt::from(2));
                if d % 2 == 0 {
                    // Even part: nodes j^2 for j = 0..=min(half, mu).
                    let tq = half.min(mu);
                    let mut rhs: Vec<Rat> = Vec::with_capacity(tq + 1);
                    for j in 0..=mu {
                        let plus = jet.values[mu + j][d];
                        let minus = jet.values[mu - j][d];
                        let even = 0.5 * (plus + minus);
                        residual =
                            residual.max(0.5 * (plus - minus).abs() / (1.0 + even.abs()));
                        if j <= tq {
                            rhs.push((rat_from_f64(plus) + rat_from_f64(minus)) * &half_rat);
                        }
                    }
                    let nodes: Vec<i64> = (0..=tq).map(|j| (j * j) as i64).collect();
                    let inv = vandermonde_inverse(&nodes);
                    let y: Vec<Rat> = (0..=tq)
                        .map(|qp| (0..=tq).fold(Rat::zero(), |acc, j| acc + &inv[qp][j] * &rhs[j]))
                        .collect();
                    for j in tq + 1..=mu {
                        let node = Rat::from_integer(BigInt::from((j * j) as i64));
                        let pred = rat_to_f64(&rat_poly_eval(&y, &node));
                        let c = 0.5 * (jet.values[mu + j][d] + jet.values[mu - j][d]);
                        residual = residual.max((pred - c).abs() / (1.0 + c.abs()));
                    }
                    for (qp, v) in y.iter().enumerate() {
                        row[2 * qp] = rat_to_f64(v);
                    }
                    nodes_out.push(nodes);
                } else {
                    // Odd part: divide the antisymmetrized jet by j and solve
                    // in nodes j^2 for j = 1..=min(half, mu-1)+1.
                    residual = residual
                        .max(jet.values[mu][d].abs() / (1.0 + jet.values[mu][d].abs()));
                    if mu == 0 {
                        nodes_out.push(Vec::new());
                        coeffs.push(row);
                        continue;
                    }
                    let tq = half.min(mu - 1);
                    let mut rhs: Vec<Rat> = Vec::with_capacity(tq + 1);
                    for j in 1..=mu {
                        let plus = jet.values[mu + j][d];
                        let minus = jet.values[mu - j][d];
                        let odd = 0.5 * (plus - minus);
                        residual =
                            residual.max(0.5 * (plus + minus).abs() / (1.0 + odd.abs()));
                        if j <= tq + 1 {
                            rhs.push(
                                (rat_from_f64(plus) - rat_from_f64(minus)) * &half_rat
                                    / Rat::from_integer(BigInt::from(j as i64)),
                            );
                        }
                    }
                    let nodes: Vec<i64> = (1..=tq + 1).map(|j| (j * j) as i64).collect();
                    let inv = vandermonde_inverse(&nodes);
                    let y: Vec<Rat> = (0..=tq)
                        .map(|qp| (0..=tq).fold(Rat::zero(), |acc, j| acc + &inv[qp][j] * &rhs[j]))
                        .collect();
                    for j in tq + 2..=mu {
                        let node = Rat::from_integer(BigInt::from((j * j) as i64));
                        let pred = rat_to_f64(&rat_poly_eval(&y, &node));
                        let c = 0.5 * (jet.values[mu + j][d] - jet.values[mu - j][d]) / j as f64;
                        residual = residual.max((pred - c).abs() / (1.0 + c.abs()));
                    }
                    for (qp, v) in y.iter().enumerate() {
                        row[2 * qp + 1] = rat_to_f64(v);
                    }
                    nodes_out.push(nodes);
                }
            }
            _ => return Err(Error::InvalidTau(format!("n = {}", label.n))),
        }
        coeffs.push(row);
    }

    if residual > JET_TOL {
        return Err(Error::InconsistentJet(format!(
            "surplus equations leave residual {residual:.3e} for {}",
            label.describe()
        )));
    }
    Ok(JetSystem { label: label.clone(), order: m, shifts, nodes: nodes_out, coeffs, residual })
}

/// Exact-arithmetic jet solve; surplus equations must close exactly.
pub fn jet_solve_rational(
    label: &TauLabel,
    values: &[Vec<Rat>],
    order: usize,
) -> Result<Vec<Vec<Rat>>> {
    let a = label.a_tau();
    if values.len() != a + 1 {
        return Err(Error::Precondition("branch count mismatch".into()));
    }
    let mut coeffs: Vec<Vec<Rat>> = Vec::with_capacity(order + 1);
    for d in 0..=order {
        let mut row = vec![Rat::zero(); d + 1];
        match label.n {
            4 => {
                let omega = if d == 0 { 0 } else { node_shift(label, d)? };
                let omega_rat = Rat::from_integer(BigInt::from(omega));
                let t = d.min(a);
                let nodes: Vec<i64> =
                    (0..=t).map(|s| label.lambda(s).expect("s in range") - omega).collect();
                let inv = vandermonde_inverse(&nodes);
                let x: Vec<Rat> = (0..=t)
                    .map(|q| {
                        (0..=t).fold(Rat::zero(), |acc, s| acc + &inv[q][s] * &values[s][d])
                    })
                    .collect();
                for s in t + 1..=a {
                    let node = Rat::from_integer(BigInt::from(label.lambda(s)? - omega));
                    let mut pred = Rat::zero();
                    let mut pow = Rat::one();
                    for xq in &x {
                        pred += xq * &pow;
                        pow *= node.clone();
                    }
                    if pred != values[s][d] {
                        return Err(Error::InconsistentJet(format!(
                            "exact surplus equation fails at s = {s}, order {d}"
                        )));
                    }
                }
                for (q, rq) in row.iter_mut().enumerate() {
                    let p = d - q;
                    let mut acc = Rat::zero();
                    let mut omega_pow = Rat::one();
                    for i in 0..=p {
                        let qq = q + i;
                        if qq <= t {
                            acc += binom_rat(p, i) * &omega_pow * &x[qq] / binom_rat(d, qq);
                        }
                        omega_pow *= -omega_rat.clone();
                    }
                    *rq = binom_rat(d, q) * acc;
                }
            }
            3 => {
                let mu = (label.two_mu / 2) as usize;
                let half_rat = Rat::new(BigInt::one(), BigInt::from(2));
                let half = d / 2;
                if d % 2 == 0 {
                    let tq = half.min(mu);
                    let mut rhs = Vec::with_capacity(tq + 1);
                    for j in 0..=mu {
                        let even = (&values[mu + j][d] + &values[mu - j][d]) * &half_rat;
                        if values[mu + j][d] != values[mu - j][d] {
                            return Err(Error::InconsistentJet(format!(
                                "even-order jet breaks parity at j = {j}"
                            )));
                        }
                        if j <= tq {
                            rhs.push(even);
                        }
                    }
                    let nodes: Vec<i64> = (0..=tq).map(|j| (j * j) as i64).collect();
                    let inv = vandermonde_inverse(&nodes);
                    let y: Vec<Rat> = (0..=tq)
                        .map(|qp| (0..=tq).fold(Rat::zero(), |acc, j| acc + &inv[qp][j] * &rhs[j]))
                        .collect();
                    for j in tq + 1..=mu {
                        let node = Rat::from_integer(BigInt::from((j * j) as i64));
                        let mut pred = Rat::zero();
                        let mut pow = Rat::one();
                        for v in &y {
                            pred += v * &pow;
                            pow *= node.clone();
                        }
                        let c = (&values[mu + j][d] + &values[mu - j][d]) * &half_rat;
                        if pred != c {
                            return Err(Error::InconsistentJet(format!(
                                "exact surplus equation fails at j = {j}, order {d}"
                            )));
                        }
                    }
                    for (qp, v) in y.into_iter().enumerate() {
                        row[2 * qp] = v;
                    }
                } else {
                    if !values[mu][d].is_zero() {
                        return Err(Error::InconsistentJet("odd-order jet nonzero at j = 0".into()));
                    }
                    if mu == 0 {
                        coeffs.push(row);
                        continue;
                    }
                    let tq = half.min(mu - 1);
                    let mut rhs = Vec::with_capacity(tq + 1);
                    for j in 1..=mu {
                        if values[mu + j][d] != -values[mu - j][d].clone() {
                            return Err(Error::InconsistentJet(format!(
                                "odd-order jet breaks parity at j = {j}"
                            )));
                        }
                        if j <= tq + 1 {
                            let odd = (&values[mu + j][d] - &values[mu - j][d]) * &half_rat;
                            rhs.push(odd / Rat::from_integer(BigInt::from(j as i64)));
                        }
                    }
                    let nodes: Vec<i64> = (1..=tq + 1).map(|j| (j * j) as i64).collect();
                    let inv = vandermonde_inverse(&nodes);
                    let y: Vec<Rat> = (0..=tq)
                        .map(|qp| (0..=tq).fold(Rat::zero(), |acc, j| acc + &inv[qp][j] * &rhs[j]))
                        .collect();
                    for j in tq + 2..=mu {
                        let node = Rat::from_integer(BigInt::from((j * j) as i64));
                        let mut pred = Rat::zero();
                        let mut pow = Rat::one();
                        for v in &y {
                            pred += v * &pow;
                            pow *= node.clone();
                        }
                        let c = (&values[mu + j][d] - &values[mu - j][d]) * &half_rat
                            / Rat::from_integer(BigInt::from(j as i64));
                        if pred != c {
                            return Err(Error::InconsistentJet(format!(
                                "exact surplus equation fails at j = {j}, order {d}"
                            )));
                        }
                    }
                    for (qp, v) in y.into_iter().enumerate() {
                        row[2 * qp + 1] = v;
                    }
                }
            }
            _ => return Err(Error::InvalidTau(format!("n = {}", label.n))),
        }
        coeffs.push(row);
    }
    Ok(coeffs)
}

// ---------------------------------------------------------------------------
// Cofactor bounds
// ---------------------------------------------------------------------------

/// Certificate for the Vandermonde cofactor estimates behind the jet solve.
#[derive(Debug, Clone)]
pub struct CofactorReport {
    pub label: TauLabel,
    pub m: usize,
    /// Centering shift used for the n = 4 node set.
    pub omega: Option<i64>,
    /// Largest |V_{s,q}/V| / binom(m, q) over the n = 4 system (exact <= 1).
    pub max_ratio: f64,
    /// Whether the n = 3 closed-form identity held exactly.
    pub identity_ok: bool,
    /// (size, s) pairs where the classical "<= 1" estimate fails; kept as a
    /// report because the correct bound is the binomial one above.
    pub le_one_failures: Vec<(u32, u32)>,
}

/// Verify the cofactor estimates for the order-m system at tau.
///
/// For n = 4 every exact ratio |V_{s,q}/V| on the shifted nodes must stay
/// within binom(m, q); a violation is an oracle mismatch, not a rounding
/// issue.  For n = 3 the argument is the closed-form product identity, which
/// is checked exactly for the system of half-order m with m + 1 <= mu rows.
pub fn cofactor_bounds(label: &TauLabel, m: usize) -> Result<CofactorReport> {
    match label.n {
        4 => {
            let a = label.a_tau();
            if m == 0 || m > a {
                return Err(Error::Precondition(format!(
                    "order {m} outside 1..={a} for {}",
                    label.describe()
                )));
            }
            let omega = node_shift(label, m)?;
            let nodes: Vec<i64> = (0..=m).map(|s| label.lambda(s).unwrap() - omega).collect();
            let inv = vandermonde_inverse(&nodes);
            let mut max_ratio = 0.0_f64;
            for (q, row) in inv.iter().enumerate() {
                let bound = Rat::from_integer(crate::oracle::big_binomial(m as u64, q as u64));
                for (s, r) in row.iter().enumerate() {
                    if r.abs() > bound {
                        return Err(Error::OracleMismatch(format!(
                            "cofactor ratio at (s, q) = ({s}, {q}) exceeds binom({m}, {q}) for {}",
                            label.describe()
                        )));
                    }
                    let ratio = crate::oracle::rat_to_f64(&(r.abs() / &bound));
                    max_ratio = max_ratio.max(ratio);
                }
            }
            Ok(CofactorReport {
                label: label.clone(),
                m,
                omega: Some(omega),
                max_ratio,
                identity_ok: true,
                le_one_failures: Vec::new(),
            })
        }
        3 => {
            let mu = (label.two_mu / 2) as usize;
            let size = m + 1;
            if size > mu {
                return Err(Error::Precondition(format!(
                    "identity size {size} exceeds mu = {mu} for {}",
                    label.describe()
                )));
            }
            let mut identity_ok = true;
            let mut le_one_failures = Vec::new();
            for s in 1..=size as u32 {
                let (lhs, rhs) = binomial_identity_sides(size as u32, s);
                if lhs != rhs {
                    identity_ok = false;
                }
                if lhs > Rat::one() {
                    le_one_failures.push((size as u32, s));
                }
            }
            if !identity_ok {
                return Err(Error::OracleMismatch(
                    "closed-form cofactor identity failed exact check".into(),
                ));
            }
            Ok(CofactorReport {
                label: label.clone(),
                m,
                omega: None,
                max_ratio: 0.0,
                identity_ok,
                le_one_failures,
            })
        }
        _ => Err(Error::InvalidTau(format!("n = {}", label.n))),
    }
}

// ---------------------------------------------------------------------------
// Extension builders
// ---------------------------------------------------------------------------

/// Radial function shared with callers; must be cheap and thread safe.
pub type RadialClosure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuilderKind {
    Cutoff,
    Bump,
    Borel,
}

/// A two-variable field on the (xi1, xi2) plane with a prescribed restriction
/// to the spectrum curves of its K-type.
pub struct ExtensionField {
    pub label: TauLabel,
    pub kind: BuilderKind,
    imp: FieldImpl,
}

enum FieldImpl {
    Cutoff { interp: GammaInterp },
    Bump { gs: Vec<RadialClosure> },
    Borel { terms: Vec<(u32, u32, f64)> },
}

impl ExtensionField {
    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        match &self.imp {
            FieldImpl::Cutoff { interp } => {
                let eta = cutoff_eta(&self.label, [xi1, xi2]);
                if eta == 0.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                let mut pow = 1.0;
                for i in 0..interp.vals.len() {
                    acc += interp.gamma(i, xi1) * pow;
                    pow *= xi2;
                }
                eta * acc
            }
            FieldImpl::Bump { gs } => {
                if xi1 <= 0.0 {
                    return 0.0;
                }
                let rho = xi1.sqrt();
                let scale = if self.label.n == 3 { rho } else { xi1 };
                let ratio = xi2 / scale;
                let mut acc = 0.0;
                for (s, g) in gs.iter().enumerate() {
                    let lam = self.label.lambda(s).expect("s in range") as f64;
                    let b = bump(ratio - lam);
                    if b != 0.0 {
                        acc += g(rho) * b;
                    }
                }
                acc
            }
            FieldImpl::Borel { terms } => {
                let phi = borel_phi(xi1, xi2);
                if phi == 0.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                for &(p, q, c) in terms {
                    acc += c * xi1.powi(p as i32) * xi2.powi(q as i32);
                }
                phi * acc
            }
        }
    }

    /// Restriction to branch s at radius rho, i.e. the value at
    /// (rho^2, lambda_s rho^u).
    pub fn restrict(&self, s: usize, rho: f64) -> Result<f64> {
        let lam = self.label.lambda(s)? as f64;
        let xi1 = rho * rho;
        let xi2 = lam * rho.powi(self.label.u_exp() as i32);
        Ok(self.eval(xi1, xi2))
    }
}

/// Local Lagrange interpolant for a gamma table, even through rho = 0.
struct GammaInterp {
    rho: Vec<f64>,
    vals: Vec<Vec<f64>>,
    r_max: f64,
}

impl GammaInterp {
    const STENCIL: usize = 8;

    fn new(gt: &GammaTable) -> Result<Self> {
        if gt.rho.len() < 4 {
            return Err(Error::Precondition("gamma table needs at least 4 radii".into()));
        }
        let mut scale = 0.0_f64;
        let mut imag = 0.0_f64;
        for row in &gt.values {
            for v in row {
                scale = scale.max(v.re.abs());
                imag = imag.max(v.im.abs());
            }
        }
        if imag > 1e-8 * (1.0 + scale) {
            return Err(Error::Precondition(format!(
                "gamma table is not real: worst imaginary part {imag:.3e}"
            )));
        }
        for w in gt.rho.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Precondition("gamma table radii must increase".into()));
            }
        }
        // Mirror the leading points through 0 so interpolation near the
        // origin sees the even extension gamma(|xi1|).
        let mirrored: Vec<usize> =
            (0..gt.rho.len().min(Self::STENCIL)).filter(|&k| gt.rho[k] > 1e-12).collect();
        let mut rho: Vec<f64> = mirrored.iter().rev().map(|&k| -gt.rho[k]).collect();
        rho.extend_from_slice(&gt.rho);
        let vals: Vec<Vec<f64>> = gt
            .values
            .iter()
            .map(|row| {
                let mut out: Vec<f64> = mirrored.iter().rev().map(|&k| row[k].re).collect();
                out.extend(row.iter().map(|v| v.re));
                out
            })
            .collect();
        let r_max = *gt.rho.last().unwrap();
        Ok(GammaInterp { rho, vals, r_max })
    }

    fn gamma(&self, i: usize, xi1: f64) -> f64 {
        let r = xi1.abs().sqrt();
        if r > self.r_max {
            return 0.0;
        }
        let n = self.rho.len();
        let width = Self::STENCIL.min(n);
        let pos = self.rho.partition_point(|&x| x < r);
        let lo = pos.saturating_sub(width / 2).min(n - width);
        let xs = &self.rho[lo..lo + width];
        let ys = &self.vals[i][lo..lo + width];
        let mut acc = 0.0;
        for j in 0..width {
            let mut term = ys[j];
            for k in 0..width {
                if k != j {
                    term *= (r - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += term;
        }
        acc
    }
}

/// Hull-cutoff extension of a decomposed transform.
///
/// The field is eta(xi) sum_i gamma_i(xi1) xi2^i with gamma_i read from the
/// table by local degree-7 interpolation in rho = sqrt(|xi1|) (even in xi1)
/// and eta the hull cutoff.  Requires a real table on an increasing grid.
pub fn cutoff_extension(gt: &GammaTable) -> Result<ExtensionField> {
    let interp = GammaInterp::new(gt)?;
    Ok(ExtensionField { label: gt.label.clone(), kind: BuilderKind::Cutoff, imp: FieldImpl::Cutoff { interp } })
}

/// Branch-bump extension from per-branch radial profiles.
///
/// v(xi) = sum_s g_s(sqrt(xi1)) bump(xi2 / xi1^{u/2} - lambda_s) for xi1 > 0
/// and 0 otherwise.  Each g_s must vanish to high order at 0; the first 8
/// one-sided derivatives are estimated on a short stencil and must stay below
/// 1e-8, otherwise the hypothesis is reported as violated.
pub fn bump_extension(label: &TauLabel, gs: Vec<RadialClosure>) -> Result<ExtensionField> {
    if gs.len() != label.a_tau() + 1 {
        return Err(Error::Precondition(format!(
            "{} branch profiles supplied, expected {}",
            gs.len(),
            label.a_tau() + 1
        )));
    }
    let h = 0.01;
    let nodes: Vec<f64> = (0..12).map(|k| k as f64 * h).collect();
    let w = fd_weights(0.0, &nodes, 8);
    for (s, g) in gs.iter().enumerate() {
        let fv: Vec<f64> = nodes.iter().map(|&t| g(t)).collect();
        for (d, wd) in w.iter().enumerate() {
            let est: f64 = wd.iter().zip(&fv).map(|(w, v)| w * v).sum();
            if est.abs() > 1e-8 {
                return Err(Error::Precondition(format!(
                    "branch profile {s} violates flatness at 0: derivative {d} estimate {est:.3e}"
                )));
            }
        }
    }
    Ok(ExtensionField { label: label.clone(), kind: BuilderKind::Bump, imp: FieldImpl::Bump { gs } })
}

/// Finite Borel-type extension from jet coefficients.
///
/// `coeffs` follows the [`JetSystem`] layout: coeffs[d][q] = d! a_{p,q} for
/// the curve-degree-d monomial with xi2 exponent q.  The field is the
/// truncated Maclaurin sum times the plateau [`borel_phi`], so jets at the
/// origin reproduce the input exactly while the support stays compact.
pub fn finite_borel(label: &TauLabel, coeffs: &[Vec<f64>]) -> Result<ExtensionField> {
    if coeffs.len() > 13 {
        return Err(Error::Precondition("Borel order exceeds the jet budget 12".into()));
    }
    let mut terms = Vec::new();
    for (d, row) in coeffs.iter().enumerate() {
        if row.len() != d + 1 {
            return Err(Error::Precondition(format!(
                "order-{d} row holds {} entries, expected {}",
                row.len(),
                d + 1
            )));
        }
        for (q, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = if label.n == 3 {
                if (d - q) % 2 != 0 {
                    return Err(Error::Precondition(format!(
                        "monomial xi2^{q} cannot appear at curve degree {d} when n = 3"
                    )));
                }
                (d - q) / 2
            } else {
                d - q
            };
            terms.push((p as u32, q as u32, c / factorial(d)));
        }
    }
    Ok(ExtensionField { label: label.clone(), kind: BuilderKind::Borel, imp: FieldImpl::Borel { terms } })
}
