//! Exact-arithmetic verification layer, independent of floating point.
//!
//! Works in the non-unitary highest-weight basis where ladder operators have
//! integer entries: J+ e_m = (j-m) e_{m+1}, J- e_m = (j+m) e_{m-1},
//! J3 e_m = m e_m. Spectra, traces, characteristic polynomials and the
//! orthogonal q-polynomials are basis-independent, so results transfer to the
//! unitary floating-point side verbatim.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use std::collections::HashMap;

use crate::reps::TauLabel;
use crate::{Error, Result};

pub type Rat = BigRational;

pub fn rat_int(k: i64) -> Rat {
    Rat::from_integer(BigInt::from(k))
}

pub fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Dense matrix over the integers (sufficient for every exact operator here).
#[derive(Debug, Clone, PartialEq)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.rows);
        let mut out = ZMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ZMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, k: &BigInt) -> ZMat {
        ZMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    pub fn kron(&self, other: &ZMat) -> ZMat {
        let mut out = ZMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j).clone();
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let v = &a * other.get(k, l);
                        out.set(i * other.rows + k, j * other.cols + l, v);
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Exact determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev; // exact division (Bareiss)
                }
            }
            for i in k + 1..n {
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }
}

/// Integer ladder matrices of the spin-j representation in the highest-weight
/// basis e_s (s = 0..2j, weight m = j - s). Returned as (2*J3, J+, J-); J3
/// itself may be half-integral, its double never is.
pub fn ladder_matrices(two_j: u32) -> (ZMat, ZMat, ZMat) {
    let d = two_j as usize + 1;
    let mut w = ZMat::zeros(d, d); // 2*J3
    let mut jp = ZMat::zeros(d, d);
    let mut jm = ZMat::zeros(d, d);
    for s in 0..d {
        w.set(s, s, BigInt::from(two_j as i64 - 2 * s as i64));
    }
    for s in 1..d {
        // J+ e_s = (j - m) e_{s-1} with m = j - s, so the coefficient is s.
        jp.set(s - 1, s, BigInt::from(s));
    }
    for s in 0..d - 1 {
        // J- e_s = (j + m) e_{s+1} with coefficient 2j - s.
        jm.set(s + 1, s, BigInt::from(two_j as i64 - s as i64));
    }
    (w, jp, jm)
}

/// The branch operator over the integers.
///
/// n = 3: diag(s - mu). n = 4: the matrix of the differential operator
/// -(z1 d1 - z2 d2)(zb1 db1 - zb2 db2) - 2 z1 zb1 d2 db2 - 2 z2 zb2 d1 db1
/// in the monomial basis, which is -(W ⊗ W' + 2 J+ ⊗ J+' + 2 J- ⊗ J-')
/// with W = 2 J3 (left factor on z, right factor on z-bar).
pub fn rational_b(label: &TauLabel) -> ZMat {
    match label.n {
        3 => {
            let mu = label.two_mu as i64 / 2;
            let d = label.d_tau();
            let mut b = ZMat::zeros(d, d);
            for s in 0..d {
                b.set(s, s, BigInt::from(s as i64 - mu));
            }
            b
        }
        _ => {
            let (wl, lp, lm) = ladder_matrices(label.two_nu);
            let (wr, rp, rm) = ladder_matrices(label.two_mu);
            let two = BigInt::from(2);
            let mut b = wl.kron(&wr);
            b = b.sub(&lp.kron(&rp).scale(&two).scale(&BigInt::from(-1)));
            b = b.sub(&lm.kron(&rm).scale(&two).scale(&BigInt::from(-1)));
            // assembled as -(W⊗W) - 2(J+⊗J+) - 2(J-⊗J-)
            b.scale(&BigInt::from(-1))
        }
    }
}

/// Exact spectral verification of B: the characteristic polynomial equals
/// prod_s (t - lambda_s)^{d_sigma_s} (checked at d_tau + 1 integer points,
/// enough for two monic polynomials of degree d_tau), and the minimal
/// polynomial prod_s (B - lambda_s) vanishes identically.
pub fn rational_branch_check(label: &TauLabel) -> Result<()> {
    let d = label.d_tau();
    let a = label.a_tau();
    let b = rational_b(label);
    let lambdas: Vec<i64> = (0..=a).map(|s| label.lambda(s).unwrap()).collect();
    let weights: Vec<usize> = (0..=a).map(|s| label.weight_dim(s).unwrap()).collect();

    // minimal polynomial
    let mut min_poly = ZMat::identity(d);
    for &l in &lambdas {
        let shift = b.sub(&ZMat::identity(d).scale(&BigInt::from(l)));
        min_poly = min_poly.mul(&shift);
    }
    if !min_poly.is_zero() {
        return Err(Error::OracleMismatch(format!(
            "minimal polynomial prod(B - lambda_s) != 0 for {}",
            label.describe()
        )));
    }

    // characteristic polynomial at integer sample points
    let kmax = lambdas.iter().copied().max().unwrap();
    for off in 1..=(d as i64 + 1) {
        let k = kmax + off;
        let m = ZMat::identity(d).scale(&BigInt::from(k)).sub(&b);
        let det = m.det();
        let mut expect = BigInt::one();
        for (&l, &w) in lambdas.iter().zip(&weights) {
            expect *= BigInt::from(k - l).pow(w as u32);
        }
        if det != expect {
            return Err(Error::OracleMismatch(format!(
                "char poly of {} at t={k}: det {} vs expected {}",
                label.describe(),
                det,
                expect
            )));
        }
    }
    Ok(())
}

type Monomial = (u32, u32, u32, u32); // exponents of z1, z2, zb1, zb2

/// Apply the branch operator to a polynomial in z1, z2, zb1, zb2:
/// B = -(z1 d1 - z2 d2)(zb1 db1 - zb2 db2) - 2 z1 zb1 d2 db2 - 2 z2 zb2 d1 db1.
fn apply_b_polynomial(p: &HashMap<Monomial, i128>) -> HashMap<Monomial, i128> {
    let mut out: HashMap<Monomial, i128> = HashMap::new();
    let mut add = |m: Monomial, c: i128| {
        if c != 0 {
            let e = out.entry(m).or_insert(0);
            *e += c;
            if *e == 0 {
                out.remove(&m);
            }
        }
    };
    for (&(a, b, c, d), &coef) in p {
        // -(a - b)(c - d) on the same monomial
        let w = (a as i128 - b as i128) * (c as i128 - d as i128);
        add((a, b, c, d), -w * coef);
        // -2 b d: z1 zb1 d2 db2 raises (a, c), lowers (b, d)
        if b > 0 && d > 0 {
            add((a + 1, b - 1, c + 1, d - 1), -2 * (b as i128) * (d as i128) * coef);
        }
        // -2 a c: z2 zb2 d1 db1 lowers (a, c), raises (b, d)
        if a > 0 && c > 0 {
            add((a - 1, b + 1, c - 1, d + 1), -2 * (a as i128) * (c as i128) * coef);
        }
    }
    out
}

/// The eigenvalue of B on P = |z|^{2s} z1^{2nu-s} zb2^{2mu-s}, by actually
/// applying the operator with exact integer arithmetic.
pub fn polynomial_model_eigenvalue(two_nu: u32, two_mu: u32, s: usize) -> Result<i64> {
    let label = TauLabel::so4(two_nu, two_mu)?;
    if s > label.a_tau() {
        return Err(Error::IndexOutOfRange(format!("s={s} exceeds a_tau={}", label.a_tau())));
    }
    let s32 = s as u32;
    let mut p: HashMap<Monomial, i128> = HashMap::new();
    for k in 0..=s32 {
        let coef = big_binomial(s as u64, k as u64).to_i128().unwrap();
        p.insert((two_nu - s32 + k, s32 - k, k, two_mu - k), coef);
    }
    let bp = apply_b_polynomial(&p);
    let lambda = label.lambda(s).unwrap();
    // assert BP = lambda P exactly
    let mut resid = bp;
    for (m, c) in &p {
        let e = resid.entry(*m).or_insert(0);
        *e -= lambda as i128 * c;
        if *e == 0 {
            resid.remove(m);
        }
    }
    if !resid.is_empty() {
        return Err(Error::OracleMismatch(format!(
            "polynomial model: B P - lambda P != 0 for (2nu,2mu,s)=({two_nu},{two_mu},{s})"
        )));
    }
    Ok(lambda)
}

/// Monic orthogonal polynomials over Q for the measure sum_s d_{sigma_s}
/// delta_{lambda_s}. Ascending rational coefficients.
pub fn exact_q_polys(label: &TauLabel) -> Result<Vec<Vec<Rat>>> {
    let a = label.a_tau();
    let nodes: Vec<Rat> = (0..=a).map(|s| rat_int(label.lambda(s).unwrap())).collect();
    let w: Vec<Rat> = (0..=a).map(|s| rat_int(label.weight_dim(s).unwrap() as i64)).collect();
    let eval = |p: &[Rat], t: &Rat| -> Rat {
        let mut acc = Rat::zero();
        for c in p.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let inner = |p: &[Rat], q: &[Rat]| -> Rat {
        nodes
            .iter()
            .zip(&w)
            .map(|(t, wi)| wi * eval(p, t) * eval(q, t))
            .fold(Rat::zero(), |acc, v| acc + v)
    };
    let mut qs: Vec<Vec<Rat>> = Vec::with_capacity(a + 1);
    for l in 0..=a {
        let mut coeffs = vec![Rat::zero(); l + 1];
        coeffs[l] = Rat::one();
        for prev in &qs {
            let c = inner(&coeffs, prev) / inner(prev, prev);
            for (k, pc) in prev.iter().enumerate() {
                coeffs[k] = &coeffs[k] - &c * pc;
            }
        }
        qs.push(coeffs);
    }
    Ok(qs)
}

/// Solve a square rational system by Gaussian elimination with pivoting.
pub fn solve_rational(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let f = &m[row][col] / &m[col][col];
            for k in col..n {
                m[row][k] = &m[row][k] - &f * &m[col][k];
            }
            rhs[row] = &rhs[row] - &f * &rhs[col];
        }
    }
    let mut x = vec![Rat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..n {
            acc -= &m[row][k] * &x[k];
        }
        if m[row][row].is_zero() {
            return None;
        }
        x[row] = acc / &m[row][row];
    }
    Some(x)
}

/// Exact inverse of the Vandermonde matrix Lambda[s][q] = nodes[s]^q.
/// Entry [q][s] of the result is the classical cofactor ratio V_{s,q}/V.
pub fn vandermonde_inverse(nodes: &[i64]) -> Vec<Vec<Rat>> {
    let n = nodes.len();
    let mut inv = vec![vec![Rat::zero(); n]; n];
    for s in 0..n {
        // Lagrange basis polynomial through node s gives column s of the inverse.
        let mut coeffs = vec![Rat::one()];
        let mut denom = Rat::one();
        for (j, &nj) in nodes.iter().enumerate() {
            if j == s {
                continue;
            }
            // multiply by (t - nodes[j])
            let mut next = vec![Rat::zero(); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] = &next[k] - &(c * rat_int(nj));
                next[k + 1] = &next[k + 1] + c;
            }
            coeffs = next;
            denom *= rat_int(nodes[s] - nj);
        }
        for q in 0..n {
            inv[q][s] = &coeffs[q] / &denom;
        }
    }
    inv
}

/// Both sides of the product identity
///   prod_{j=1..m'+1, j != s} j^2 / |j^2 - s^2|
///   = 2 binom(m'+1, s) / binom(m'+1+s, s),
/// evaluated exactly. Returns (lhs, rhs).
pub fn binomial_identity_sides(m_prime_plus_1: u32, s: u32) -> (Rat, Rat) {
    let mp1 = m_prime_plus_1;
    let mut lhs = Rat::one();
    for j in 1..=mp1 {
        if j == s {
            continue;
        }
        let j2 = (j * j) as i64;
        let s2 = (s * s) as i64;
        lhs *= rat_int(j2) / rat_int((j2 - s2).abs());
    }
    let num = big_binomial(mp1 as u64, s as u64) * BigInt::from(2);
    let den = big_binomial((mp1 + s) as u64, s as u64);
    let rhs = Rat::new(num, den);
    (lhs, rhs)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}
