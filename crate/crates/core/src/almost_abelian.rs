//! Almost-abelian Lie algebras `g = n ⋊ R e_{2n}` with an adapted orthonormal
//! basis, `J e_i = e_{2n-i+1}`, encoded by the block data `(a, b, v, A)` of
//! `ad_{e_{2n}}` restricted to the abelian ideal `n = span(e_1, .., e_{2n-1})`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::LieAlgebra;
use crate::curvatures::Geometry;
use crate::error::{Error, Result};
use crate::hermitian::AlmostHermitianStructure;
use crate::tensor::{Form, Mat, Vector};
use crate::verifier::{condition_flags, einstein_residuals};
use crate::EPS_ABS;

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostAbelianData {
    pub a: f64,
    pub b: Vector,
    pub v: Vector,
    /// The `n_1 × n_1` block, `n_1 = span(e_2, .., e_{2n-1})`.
    pub a_block: Mat,
}

impl AlmostAbelianData {
    pub fn new(a: f64, b: Vector, v: Vector, a_block: Mat) -> Result<Self> {
        let k = b.len();
        if k == 0 || k % 2 != 0 {
            return Err(Error::structural(format!(
                "b must have even positive length 2n-2, got {k}"
            )));
        }
        if v.len() != k || a_block.nrows() != k || a_block.ncols() != k {
            return Err(Error::structural(format!(
                "expected v of length {k} and a {k}x{k} block, got v of length {} and a {}x{} block",
                v.len(),
                a_block.nrows(),
                a_block.ncols()
            )));
        }
        let finite = a.is_finite()
            && b.iter().chain(v.iter()).chain(a_block.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::structural("almost-abelian data must be finite"));
        }
        Ok(Self { a, b, v, a_block })
    }

    pub fn dim4(a: f64, b: [f64; 2], v: [f64; 2], a_block: [[f64; 2]; 2]) -> Self {
        Self {
            a,
            b: Vector::from_row_slice(&b),
            v: Vector::from_row_slice(&v),
            a_block: Mat::from_fn(2, 2, |i, j| a_block[i][j]),
        }
    }

    pub fn zero(n: usize) -> Self {
        let k = 2 * n - 2;
        Self {
            a: 0.0,
            b: Vector::zeros(k),
            v: Vector::zeros(k),
            a_block: Mat::zeros(k, k),
        }
    }

    /// Half the real dimension of the algebra.
    pub fn half_dim(&self) -> usize {
        self.b.len() / 2 + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim()
    }

    /// `ad_{e_{2n}}` on `n`, in the basis `e_1, .., e_{2n-1}`.
    pub fn ad_matrix(&self) -> Mat {
        let k = self.b.len();
        let mut m = Mat::zeros(k + 1, k + 1);
        m[(0, 0)] = self.a;
        for i in 0..k {
            m[(0, i + 1)] = self.b[i];
            m[(i + 1, 0)] = self.v[i];
            for j in 0..k {
                m[(i + 1, j + 1)] = self.a_block[(i, j)];
            }
        }
        m
    }

    pub fn trace_a(&self) -> f64 {
        self.a_block.trace()
    }

    fn magnitude(&self) -> f64 {
        self.ad_matrix().amax().max(1.0)
    }

    pub fn unimodular_residual(&self) -> f64 {
        (self.a + self.trace_a()).abs()
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular_residual() <= EPS_ABS * self.magnitude()
    }

    /// `J` restricted to `n_1`.
    pub fn j1(&self) -> Mat {
        let m = self.dim();
        let j = standard_j(m);
        j.view((1, 1), (m - 2, m - 2)).into_owned()
    }

    /// Closed-form integrability defect: `|b| + |[A, J_1]|`.
    pub fn integrability_residual(&self) -> f64 {
        let j1 = self.j1();
        let comm = &self.a_block * &j1 - &j1 * &self.a_block;
        self.b.norm() + comm.norm()
    }

    pub fn algebra(&self) -> LieAlgebra {
        let m = self.dim();
        let ad = self.ad_matrix();
        let top = m - 1;
        let mut c = vec![0.0; m * m * m];
        for k in 0..top {
            for l in 0..top {
                c[(top * m + k) * m + l] = ad[(l, k)];
                c[(k * m + top) * m + l] = -ad[(l, k)];
            }
        }
        LieAlgebra::new(m, c).expect("ad-by-one-vector tables have the right shape")
    }

    /// The structure with the standard orthonormal metric.
    pub fn realize(&self) -> Result<AlmostHermitianStructure> {
        let m = self.dim();
        self.realize_with_metric(Mat::identity(m, m))
    }

    pub fn realize_with_metric(&self, metric: Mat) -> Result<AlmostHermitianStructure> {
        AlmostHermitianStructure::new(self.algebra(), metric, standard_j(self.dim()))
    }

    /// `theta = (J v)^flat - (tr A) e^{2n}`.
    pub fn lee_form(&self) -> Vector {
        let m = self.dim();
        let mut full_v = Vector::zeros(m);
        full_v.rows_mut(1, m - 2).copy_from(&self.v);
        let mut theta = standard_j(m) * full_v;
        theta[m - 1] -= self.trace_a();
        theta
    }

    /// `delta theta = theta(H)` with `g(H, X) = tr ad_X`, so `H = (a + tr A) e_{2n}`.
    pub fn codifferential_of_lee(&self) -> f64 {
        -self.trace_a() * (self.a + self.trace_a())
    }

    /// Closed-form first Ricci form of the canonical connection with parameter `t`.
    pub fn gauduchon_ricci(&self, t: f64) -> Form {
        let m = self.dim();
        let tr = self.trace_a();
        let a = self.a;
        let at = self.a_block.transpose();
        let scalar = 2.0 * a * a + t * a * tr + (1.0 - t) * self.v.norm_squared() + self.b.dot(&self.v);
        let w = &self.b * (2.0 * a + t * tr) + &at * &self.b + &at * &self.v * (1.0 - t);
        let mut out = Form::basis(m, &[0, m - 1], -0.5 * scalar);
        for (i, wi) in w.iter().enumerate() {
            out = out.add(&Form::basis(m, &[i + 1, m - 1], -0.5 * wi));
        }
        out
    }

    pub fn bismut_ricci(&self) -> Form {
        self.gauduchon_ricci(-1.0)
    }

    /// Residuals of `(Ric^B)^{J,+} = 0`:
    /// `[2a^2 - a tr A + 2|v|^2 + b.v, (2a - tr A) b + A^t b + 2 A^t v]`.
    pub fn bismut_einstein_system(&self) -> Vec<f64> {
        let tr = self.trace_a();
        let a = self.a;
        let at = self.a_block.transpose();
        let mut out = vec![2.0 * a * a - a * tr + 2.0 * self.v.norm_squared() + self.b.dot(&self.v)];
        let w = &self.b * (2.0 * a - tr) + &at * &self.b + &at * &self.v * 2.0;
        out.extend(w.iter());
        out
    }

    /// Four-dimensional reduction with `a = 0` and `A` antisymmetric:
    /// `[2|v|^2 + b.v, A12 (b1 + 2 v1), A12 (b2 + 2 v2)]`.
    pub fn bismut_system_dim4(&self) -> Result<[f64; 3]> {
        self.require_dim4()?;
        let (b, v) = (&self.b, &self.v);
        let a12 = self.a_block[(0, 1)];
        Ok([
            2.0 * v.norm_squared() + b.dot(v),
            a12 * (b[0] + 2.0 * v[0]),
            a12 * (b[1] + 2.0 * v[1]),
        ])
    }

    /// Largest violation of the two `dJdF = 0` conditions over basis vectors of `n_1`.
    pub fn djdf_residual(&self) -> f64 {
        let k = self.b.len();
        let a_blk = &self.a_block;
        let aj = a_blk * self.j1();
        let ip = |x: &Mat, i: usize, j: usize| x[(j, i)];
        let alpha = |y: usize, z: usize| ip(&aj, y, z) - ip(&aj, z, y);
        let aja = &aj * a_blk;
        let mut worst: f64 = 0.0;
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    let c1 = self.b[x] * alpha(y, z) - self.b[y] * alpha(x, z) + self.b[z] * alpha(x, y);
                    worst = worst.max(c1.abs());
                }
            }
        }
        for y in 0..k {
            for z in 0..k {
                // <AJ Ay, z> - <AJ z, Ay> + <AJ y, Az> - <AJ Az, y>
                let ajz_ay = (aj.column(z).transpose() * a_blk.column(y))[(0, 0)];
                let ajy_az = (aj.column(y).transpose() * a_blk.column(z))[(0, 0)];
                let c2 = self.a * alpha(y, z) + ip(&aja, y, z) - ajz_ay + ajy_az - ip(&aja, z, y);
                worst = worst.max(c2.abs());
            }
        }
        worst
    }

    /// Norm of the symmetric part of `aA + A^2 + A^t A`.
    pub fn skt_residual(&self) -> f64 {
        let a_blk = &self.a_block;
        let x = a_blk * self.a + a_blk * a_blk + a_blk.transpose() * a_blk;
        ((&x + x.transpose()) * 0.5).norm()
    }

    fn require_dim4(&self) -> Result<()> {
        if self.half_dim() != 2 {
            return Err(Error::Unsupported(format!(
                "closed form only available in real dimension 4, got {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `P = A11 - A22`, `Q = A12 + A21`.
    fn pq(&self) -> (f64, f64) {
        let a = &self.a_block;
        (a[(0, 0)] - a[(1, 1)], a[(0, 1)] + a[(1, 0)])
    }

    /// Closed form of `1/2 sum_{i,j} N(e_i, e_j)^flat ∧ (J N(e_i, e_j))^flat` in dimension 4.
    pub fn nijenhuis_factor(&self) -> Result<Form> {
        self.require_dim4()?;
        Ok(self.nijenhuis_factor_scaled(0.25))
    }

    fn nijenhuis_factor_scaled(&self, c: f64) -> Form {
        let (p, q) = self.pq();
        let (b1, b2) = (self.b[0], self.b[1]);
        let terms: [(&[usize], f64); 6] = [
            (&[0, 3], self.b.norm_squared()),
            (&[1, 2], q * q + p * p),
            (&[0, 1], b2 * p - b1 * q),
            (&[0, 2], b2 * q + b1 * p),
            (&[1, 3], b1 * p + b2 * q),
            (&[2, 3], b1 * q - b2 * p),
        ];
        terms
            .iter()
            .fold(Form::zero(4, 2), |acc, (idx, x)| acc.add(&Form::basis(4, idx, c * x)))
    }

    /// `|N|^2 = 1/2 (|b|^2 + P^2 + Q^2)` in dimension 4.
    pub fn nijenhuis_norm_sq(&self) -> Result<f64> {
        self.require_dim4()?;
        let (p, q) = self.pq();
        Ok(0.5 * (self.b.norm_squared() + p * p + q * q))
    }

    /// Closed form of the second Chern–Ricci form in dimension 4.
    pub fn second_chern_ricci(&self) -> Result<Form> {
        let nf = self.nijenhuis_factor()?;
        let f = standard_fundamental_form(4);
        let theta_sq = self.lee_form().norm_squared();
        let c = 0.25 * (2.0 * self.codifferential_of_lee() + 2.0 * theta_sq - self.nijenhuis_norm_sq()?);
        Ok(j_plus_dim4(&self.bismut_ricci()).add(&f.scaled(c)).add(&nf))
    }

    /// Residuals of the second-Chern–Einstein condition for unimodular data in
    /// dimension 4, with `w = 3a b + A^t b + 2 A^t v`:
    /// `[|b|^2 - 6a^2 - 4|v|^2 - 2 b.v - (P^2 + Q^2), w_1 - (b1 P + b2 Q), w_2 - (b1 Q - b2 P)]`.
    pub fn second_chern_system(&self) -> Result<[f64; 3]> {
        let (p, q, w) = self.second_chern_terms()?;
        let (b, v, a) = (&self.b, &self.v, self.a);
        Ok([
            b.norm_squared() - 6.0 * a * a - 4.0 * v.norm_squared() - 2.0 * b.dot(v) - (p * p + q * q),
            w[0] - (b[0] * p + b[1] * q),
            w[1] - (b[0] * q - b[1] * p),
        ])
    }

    /// The same system with the Nijenhuis factor taken four times larger:
    /// `[2|b|^2 - 3a^2 - b.v - 2|v|^2 - 2(P^2 + Q^2), w_1 - 4(b1 P + b2 Q), w_2 - 4(b1 Q - b2 P)]`.
    /// Its zero set does not match the geometric second-Chern–Einstein
    /// condition; kept to document the discrepancy.
    pub fn second_chern_system_unscaled_nijenhuis(&self) -> Result<[f64; 3]> {
        let (p, q, w) = self.second_chern_terms()?;
        let (b, v, a) = (&self.b, &self.v, self.a);
        Ok([
            2.0 * b.norm_squared() - 3.0 * a * a - b.dot(v) - 2.0 * v.norm_squared() - 2.0 * (p * p + q * q),
            w[0] - 4.0 * (b[0] * p + b[1] * q),
            w[1] - 4.0 * (b[0] * q - b[1] * p),
        ])
    }

    fn second_chern_terms(&self) -> Result<(f64, f64, Vector)> {
        self.require_dim4()?;
        if !self.is_unimodular() {
            return Err(Error::validation("unimodular (a + tr A = 0)", self.unimodular_residual()));
        }
        let (p, q) = self.pq();
        let at = self.a_block.transpose();
        let w = &self.b * (3.0 * self.a) + &at * &self.b + &at * &self.v * 2.0;
        Ok((p, q, w))
    }

    /// The six polynomial constraints equivalent to `D^g theta = 0` for unimodular
    /// data in dimension 4.
    pub fn parallel_lee_system(&self) -> Result<[f64; 6]> {
        self.require_dim4()?;
        let (b, v, m) = (&self.b, &self.v, &self.a_block);
        let (a11, a12, a21, a22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        Ok([
            self.a,
            b[0] * v[1] - b[1] * v[0],
            v[0] * (a12 - a21),
            v[1] * (a12 - a21),
            v[0] * (a12 + a21) - 2.0 * a11 * v[1],
            v[1] * (a12 + a21) - 2.0 * a22 * v[0],
        ])
    }

    pub fn classify(&self) -> ClassLabel {
        classify_jordan(&self.ad_matrix())
    }

    /// Uniform random data with entries in `[-1, 1]`; unimodular when asked.
    pub fn random<R: Rng>(rng: &mut R, n: usize, unimodular: bool) -> Self {
        let k = 2 * n - 2;
        let mut u = || rng.random_range(-1.0..1.0);
        let b = Vector::from_fn(k, |_, _| u());
        let v = Vector::from_fn(k, |_, _| u());
        let a_block = Mat::from_fn(k, k, |_, _| u());
        let a = if unimodular { -a_block.trace() } else { u() };
        Self { a, b, v, a_block }
    }
}

/// `J e_i = e_{2n-i+1}` for `i <= n`.
pub fn standard_j(m: usize) -> Mat {
    let mut j = Mat::zeros(m, m);
    for i in 0..m / 2 {
        let k = m - 1 - i;
        j[(k, i)] = 1.0;
        j[(i, k)] = -1.0;
    }
    j
}

/// `F = e^1 ∧ e^{2n} + e^2 ∧ e^{2n-1} + ..`.
pub fn standard_fundamental_form(m: usize) -> Form {
    (0..m / 2).fold(Form::zero(m, 2), |acc, i| acc.add(&Form::basis(m, &[i, m - 1 - i], 1.0)))
}

fn j_plus_dim4(alpha: &Form) -> Form {
    let j = standard_j(4);
    let x = alpha.to_matrix();
    Form::from_matrix(&((&x + j.transpose() * &x * &j) * 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Abelian,
    A31PlusA1,
    A34PlusA1,
    A36PlusA1,
    A41,
    A48,
    A410,
    Unrecognized,
}

impl ClassLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::Abelian => "abelian",
            ClassLabel::A31PlusA1 => "A31_plus_A1",
            ClassLabel::A34PlusA1 => "A34_plus_A1",
            ClassLabel::A36PlusA1 => "A36_plus_A1",
            ClassLabel::A41 => "A41",
            ClassLabel::A48 => "A48",
            ClassLabel::A410 => "A410",
            ClassLabel::Unrecognized => "unrecognized",
        }
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const EIGEN_GAP: f64 = 1e-6;
const RANK_THRESHOLD: f64 = 1e-8;

fn numerical_rank(m: &Mat) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_THRESHOLD * top.max(1.0)).count()
}

/// Isomorphism class of the almost-abelian algebra with `ad_{e_4}|_n = m`
/// (a 3×3 table), read off the Jordan form up to scaling.
pub fn classify_jordan(m: &Mat) -> ClassLabel {
    if m.nrows() != 3 || m.ncols() != 3 || m.iter().any(|x| !x.is_finite()) {
        return ClassLabel::Unrecognized;
    }
    let scale = m.amax();
    if scale <= EPS_ABS {
        return ClassLabel::Abelian;
    }
    let x = m / scale;
    // Eigenvalues of a nilpotent block are only accurate to about eps^(1/3),
    // so nilpotency is read off the ranks of powers instead.
    let x2 = &x * &x;
    if numerical_rank(&(&x2 * &x)) == 0 {
        return match (numerical_rank(&x), numerical_rank(&x2)) {
            (1, 0) => ClassLabel::A31PlusA1,
            (2, 1) => ClassLabel::A41,
            _ => ClassLabel::Unrecognized,
        };
    }
    let eig = x.complex_eigenvalues();
    let small = |z: &nalgebra::Complex<f64>| z.norm() <= EIGEN_GAP;
    let zeros = eig.iter().filter(|z| small(z)).count();
    if zeros != 1 || numerical_rank(&x) != 2 {
        return ClassLabel::Unrecognized;
    }
    let rest: Vec<_> = eig.iter().filter(|z| !small(z)).collect();
    let (p, q) = (rest[0], rest[1]);
    let mag = p.norm().max(q.norm());
    if (p + q).norm() > EIGEN_GAP * mag {
        return ClassLabel::Unrecognized;
    }
    if p.im.abs() <= EIGEN_GAP * mag {
        ClassLabel::A34PlusA1
    } else if p.re.abs() <= EIGEN_GAP * mag {
        ClassLabel::A36PlusA1
    } else {
        ClassLabel::Unrecognized
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyFlags {
    pub almost_kaehler: bool,
    pub lee_nonzero: bool,
    pub integrable: bool,
}

/// Which family a solution belongs to; fixes the equations that cut it out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `a = 0`, `A = 0`, `b.v = -2|v|^2`.
    BismutFlatBlock,
    /// `a = 0`, `A = 0`, `v = 0`.
    BismutZeroV,
    /// `a = 0`, `A` antisymmetric, `b = -2v`.
    BismutRotation,
    /// `a = 0`, `A = 0`, `b = (1 + sqrt 5) v`.
    SecondChernPlus,
    /// `a = 0`, `A = 0`, `b = (1 - sqrt 5) v`.
    SecondChernMinus,
    /// As [`FamilyKind::SecondChernPlus`] with `v1 = b1 = 0`.
    SecondChernPlusAxis,
    /// As [`FamilyKind::SecondChernMinus`] with `v1 = b1 = 0`.
    SecondChernMinusAxis,
}

impl FamilyKind {
    /// Residuals of the equalities defining the family (dimension 4).
    pub fn equations(self, d: &AlmostAbelianData) -> Vec<f64> {
        let m = &d.a_block;
        let (b, v) = (&d.b, &d.v);
        let mut out = vec![d.a];
        let block_zero = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
        let ratio = |c: f64| [b[0] - c * v[0], b[1] - c * v[1]];
        let phi = 5f64.sqrt();
        match self {
            FamilyKind::BismutFlatBlock => {
                out.extend(block_zero);
                out.push(2.0 * v.norm_squared() + b.dot(v));
            }
            FamilyKind::BismutZeroV => {
                out.extend(block_zero);
                out.extend([v[0], v[1]]);
            }
            FamilyKind::BismutRotation => {
                out.extend([m[(0, 0)], m[(1, 1)], m[(0, 1)] + m[(1, 0)]]);
                out.extend(ratio(-2.0));
            }
            FamilyKind::SecondChernPlus | FamilyKind::SecondChernMinus => {
                out.extend(block_zero);
                out.extend(ratio(if self == FamilyKind::SecondChernPlus { 1.0 + phi } else { 1.0 - phi }));
            }
            FamilyKind::SecondChernPlusAxis | FamilyKind::SecondChernMinusAxis => {
                out.extend(block_zero);
                out.extend(ratio(if self == FamilyKind::SecondChernPlusAxis { 1.0 + phi } else { 1.0 - phi }));
                out.extend([v[0], b[0]]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFamily {
    pub kind: FamilyKind,
    pub description: String,
    pub constraints: Vec<String>,
    pub witness: AlmostAbelianData,
    pub class_label: ClassLabel,
    pub flags: FamilyFlags,
    /// Largest residual of the originating system at the witness.
    pub residual: f64,
}

/// End-to-end recomputation of a witness on the realized structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub bismut_residual: f64,
    pub bismut_lambda: f64,
    pub second_chern_residual: f64,
    pub lee_parallel: bool,
    pub lee_nonzero: bool,
    pub integrable: bool,
    pub almost_kaehler: bool,
}

pub fn check_witness(d: &AlmostAbelianData) -> Result<WitnessCheck> {
    let geo = Geometry::new(d.realize()?)?;
    let flags = condition_flags(&geo);
    let e = einstein_residuals(&geo);
    Ok(WitnessCheck {
        bismut_residual: e.bismut_residual,
        bismut_lambda: e.bismut_lambda,
        second_chern_residual: e.second_chern_residual,
        lee_parallel: flags.lee_parallel.value,
        lee_nonzero: flags.lee_nonzero.value,
        integrable: flags.integrable.value,
        almost_kaehler: flags.almost_kaehler.value,
    })
}

fn closed_flags(d: &AlmostAbelianData) -> FamilyFlags {
    let theta = d.lee_form();
    FamilyFlags {
        almost_kaehler: theta.norm() <= EPS_ABS,
        lee_nonzero: theta.norm() > EPS_ABS,
        integrable: d.integrability_residual() <= EPS_ABS,
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn family(
    kind: FamilyKind,
    description: &str,
    constraints: &[&str],
    witness: AlmostAbelianData,
    residual: f64,
) -> SolutionFamily {
    SolutionFamily {
        kind,
        description: description.to_string(),
        constraints: constraints.iter().map(|c| c.to_string()).collect(),
        class_label: witness.classify(),
        flags: closed_flags(&witness),
        witness,
        residual,
    }
}

/// Bismut–Einstein solutions on unimodular almost-abelian algebras of
/// dimension 4 with `a = 0` and `A` antisymmetric (hence commuting with `J_1`).
pub fn solve_bismut_unimodular_dim4() -> Vec<SolutionFamily> {
    let cases = [
        (
            FamilyKind::BismutFlatBlock,
            "A12 = 0, b.v = -2|v|^2 < 0",
            &["a = 0", "A = 0", "b.v = -2|v|^2", "v != 0"][..],
            AlmostAbelianData::dim4(0.0, [-2.0, 0.0], [1.0, 0.0], [[0.0, 0.0], [0.0, 0.0]]),
        ),
        (
            FamilyKind::BismutZeroV,
            "A12 = 0, v = 0, b != 0",
            &["a = 0", "A = 0", "v = 0", "b != 0"][..],
            AlmostAbelianData::dim4(0.0, [1.0, 0.0], [0.0, 0.0], [[0.0, 0.0], [0.0, 0.0]]),
        ),
        (
            FamilyKind::BismutRotation,
            "A12 != 0, b = -2v != 0",
            &["a = 0", "A = [[0, A12], [-A12, 0]]", "A12 != 0", "b = -2v", "v != 0"][..],
            AlmostAbelianData::dim4(0.0, [-2.0, 0.0], [1.0, 0.0], [[0.0, 1.0], [-1.0, 0.0]]),
        ),
    ];
    cases
        .into_iter()
        .map(|(kind, desc, cons, w)| {
            let res = max_abs(&w.bismut_system_dim4().expect("dimension 4"));
            family(kind, desc, cons, w, res)
        })
        .collect()
}

/// Non-Hermitian second-Chern–Einstein solutions with `D^g theta = 0`,
/// `theta != 0` on unimodular almost-abelian algebras of dimension 4.
pub fn solve_second_chern_parallel_lee_dim4() -> Vec<SolutionFamily> {
    let phi = 5f64.sqrt();
    let (plus, minus) = (1.0 + phi, 1.0 - phi);
    let zero = [[0.0; 2]; 2];
    let cases = [
        (
            FamilyKind::SecondChernPlus,
            "v1 != 0, A = 0, b = (1 + sqrt 5) v, b.v > 0",
            ["a = 0", "A = 0", "b1 v2 = b2 v1", "b_i^2 - 2 b_i v_i - 4 v_i^2 = 0", "b.v > 0", "v1 != 0"],
            AlmostAbelianData::dim4(0.0, [plus, 0.0], [1.0, 0.0], zero),
        ),
        (
            FamilyKind::SecondChernMinus,
            "v1 != 0, A = 0, b = (1 - sqrt 5) v, b.v < 0",
            ["a = 0", "A = 0", "b1 v2 = b2 v1", "b_i^2 - 2 b_i v_i - 4 v_i^2 = 0", "b.v < 0", "v1 != 0"],
            AlmostAbelianData::dim4(0.0, [minus, 0.0], [1.0, 0.0], zero),
        ),
        (
            FamilyKind::SecondChernPlusAxis,
            "v1 = 0, b1 = 0, A = 0, b2 = (1 + sqrt 5) v2",
            ["a = 0", "A = 0", "v1 = b1 = 0", "b2^2 - 2 b2 v2 - 4 v2^2 = 0", "b2 v2 > 0", "v2 != 0"],
            AlmostAbelianData::dim4(0.0, [0.0, plus], [0.0, 1.0], zero),
        ),
        (
            FamilyKind::SecondChernMinusAxis,
            "v1 = 0, b1 = 0, A = 0, b2 = (1 - sqrt 5) v2",
            ["a = 0", "A = 0", "v1 = b1 = 0", "b2^2 - 2 b2 v2 - 4 v2^2 = 0", "b2 v2 < 0", "v2 != 0"],
            AlmostAbelianData::dim4(0.0, [0.0, minus], [0.0, 1.0], zero),
        ),
    ];
    cases
        .into_iter()
        .map(|(kind, desc, cons, w)| {
            let mut res = w.second_chern_system().expect("unimodular witness").to_vec();
            res.extend(w.parallel_lee_system().expect("dimension 4"));
            family(kind, desc, &cons, w, max_abs(&res))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Bismut,
    SecondChernParallelLee,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerReport {
    pub seed: u64,
    pub attempts: usize,
    pub converged: usize,
    /// Converged points that fall outside the problem's hypotheses (zero Lee
    /// form, Hermitian) and are therefore not counted.
    pub excluded: usize,
    pub labels: BTreeMap<String, usize>,
    /// Labels seen that no emitted family carries.
    pub unexpected: Vec<String>,
}

/// Free coordinates of the sampler for each problem.
fn unpack(problem: Problem, x: &[f64]) -> AlmostAbelianData {
    match problem {
        Problem::Bismut => {
            AlmostAbelianData::dim4(0.0, [x[0], x[1]], [x[2], x[3]], [[0.0, x[4]], [-x[4], 0.0]])
        }
        Problem::SecondChernParallelLee => {
            let a_block = [[x[4], x[5]], [x[6], x[7]]];
            AlmostAbelianData::dim4(-(x[4] + x[7]), [x[0], x[1]], [x[2], x[3]], a_block)
        }
    }
}

fn system(problem: Problem, x: &[f64]) -> Vec<f64> {
    let d = unpack(problem, x);
    let mut r = match problem {
        Problem::Bismut => d.bismut_system_dim4().expect("dimension 4").to_vec(),
        Problem::SecondChernParallelLee => {
            let mut r = d.second_chern_system().expect("unimodular by construction").to_vec();
            r.extend(d.parallel_lee_system().expect("dimension 4"));
            r
        }
    };
    r.push(x.iter().map(|t| t * t).sum::<f64>() - 1.0);
    r
}

/// Levenberg–Marquardt on the closed-form system from one random start.
fn descend(problem: Problem, mut x: Vec<f64>) -> Option<Vec<f64>> {
    let h = 1e-7;
    let mut mu = 1e-3;
    let mut r = system(problem, &x);
    for _ in 0..200 {
        let cost: f64 = r.iter().map(|t| t * t).sum();
        if cost.sqrt() < 1e-13 {
            return Some(x);
        }
        let jac = Mat::from_fn(r.len(), x.len(), |i, j| {
            let mut xp = x.clone();
            xp[j] += h;
            (system(problem, &xp)[i] - r[i]) / h
        });
        let rv = Vector::from_vec(r.clone());
        let jt = jac.transpose();
        let lhs = &jt * &jac + Mat::identity(x.len(), x.len()) * mu;
        let step = lhs.lu().solve(&(-&jt * &rv))?;
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
        let rt = system(problem, &trial);
        if rt.iter().map(|t| t * t).sum::<f64>() < cost {
            x = trial;
            r = rt;
            mu = (mu * 0.3).max(1e-15);
        } else {
            mu *= 10.0;
        }
    }
    let cost: f64 = r.iter().map(|t| t * t).sum();
    (cost.sqrt() < 1e-10).then_some(x)
}

/// Random restarts of a local solver on the closed-form system; every converged
/// point inside the problem's hypotheses is classified and compared against the
/// labels of the emitted families. Evidence, not proof, that nothing is missing.
pub fn sample_solutions(problem: Problem, seed: u64, attempts: usize) -> SamplerReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = match problem {
        Problem::Bismut => 5,
        Problem::SecondChernParallelLee => 8,
    };
    let expected: Vec<ClassLabel> = match problem {
        Problem::Bismut => solve_bismut_unimodular_dim4(),
        Problem::SecondChernParallelLee => solve_second_chern_parallel_lee_dim4(),
    }
    .iter()
    .map(|f| f.class_label)
    .collect();
    let mut report = SamplerReport {
        seed,
        attempts,
        converged: 0,
        excluded: 0,
        labels: BTreeMap::new(),
        unexpected: Vec::new(),
    };
    for _ in 0..attempts {
        let x0: Vec<f64> = (0..n_vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        let Some(x) = descend(problem, x0) else { continue };
        report.converged += 1;
        let d = unpack(problem, &x);
        let flags = closed_flags(&d);
        let inside = match problem {
            Problem::Bismut => true,
            Problem::SecondChernParallelLee => flags.lee_nonzero && !flags.integrable,
        };
        if !inside {
            report.excluded += 1;
            continue;
        }
        let label = d.classify();
        *report.labels.entry(label.to_string()).or_default() += 1;
        if !expected.contains(&label) && !report.unexpected.contains(&label.to_string()) {
            report.unexpected.push(label.to_string());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_j_pairs_first_and_last() {
        let j = standard_j(4);
        assert_eq!(j[(3, 0)], 1.0);
        assert_eq!(j[(2, 1)], 1.0);
        assert_eq!((&j * &j + Mat::identity(4, 4)).amax(), 0.0);
        let f = standard_fundamental_form(4);
        let s = AlmostAbelianData::zero(2).realize().unwrap();
        assert!(s.fundamental_form().sub(&f).max_abs() < 1e-15);
    }

    #[test]
    fn jordan_examples() {
        let m = |r: [[f64; 3]; 3]| Mat::from_fn(3, 3, |i, j| r[i][j]);
        assert_eq!(classify_jordan(&m([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])), ClassLabel::A34PlusA1);
        assert_eq!(classify_jordan(&m([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])), ClassLabel::A36PlusA1);
        assert_eq!(classify_jordan(&m([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])), ClassLabel::A31PlusA1);
        assert_eq!(classify_jordan(&m([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])), ClassLabel::A41);
        assert_eq!(classify_jordan(&Mat::zeros(3, 3)), ClassLabel::Abelian);
        assert_eq!(classify_jordan(&m([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -3.0]])), ClassLabel::Unrecognized);
    }
}
