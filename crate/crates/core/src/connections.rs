//! Left-invariant linear connections: Levi-Civita, Chern (first canonical
//! Hermitian) and Weyl, together with torsion, curvature and covariant
//! derivatives of arbitrary invariant tensors.

use serde::Serialize;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::hermitian::AlmostHermitianStructure;
use crate::tensor::{InvariantTensor, Mat, Slot, Vector};
use crate::EPS_ABS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    Chern,
    Weyl,
}

impl ConnectionKind {
    pub fn label(self) -> &'static str {
        match self {
            ConnectionKind::LeviCivita => "levi_civita",
            ConnectionKind::Chern => "chern",
            ConnectionKind::Weyl => "weyl",
        }
    }
}

/// `gamma[i]` is the matrix of `nabla_{e_i}`, so `gamma[i][(k, j)]` is the
/// `e_k` component of `nabla_{e_i} e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    kind: ConnectionKind,
    gamma: Vec<Mat>,
}

/// `r[i * dim + j]` is the endomorphism `R(e_i, e_j) = nabla_{[e_i,e_j]} - [nabla_{e_i}, nabla_{e_j}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    r: Vec<Mat>,
}

/// What to do when a freshly built Chern connection misses a postcondition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuardPolicy {
    #[default]
    Abort,
    Report,
}

/// Postcondition residuals of a Chern connection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernGuard {
    pub metric: f64,
    pub complex: f64,
    pub torsion_type: f64,
    pub tolerance: f64,
}

impl ChernGuard {
    pub fn passed(&self) -> bool {
        self.metric <= self.tolerance && self.complex <= self.tolerance && self.torsion_type <= self.tolerance
    }
}

impl Connection {
    pub fn from_matrices(kind: ConnectionKind, gamma: Vec<Mat>) -> Result<Self> {
        let m = gamma.len();
        if gamma.iter().any(|g| g.nrows() != m || g.ncols() != m) {
            return Err(Error::structural("connection matrices must be dim x dim"));
        }
        Ok(Self { kind, gamma })
    }

    /// Koszul formula for a left-invariant metric.
    pub fn levi_civita(s: &AlmostHermitianStructure) -> Self {
        let m = s.dim();
        let alg = s.algebra();
        let g = s.metric();
        // c[i][j][k] = g([e_i, e_j], e_k)
        let mut c = vec![0.0; m * m * m];
        for i in 0..m {
            for j in 0..m {
                let b = alg.basis_bracket(i, j);
                let bl = g * b;
                for k in 0..m {
                    c[(i * m + j) * m + k] = bl[k];
                }
            }
        }
        let at = |i: usize, j: usize, k: usize| c[(i * m + j) * m + k];
        let ginv = s.metric_inv();
        let gamma = (0..m)
            .map(|i| {
                let lower = Mat::from_fn(m, m, |k, j| 0.5 * (at(i, j, k) - at(j, k, i) + at(k, i, j)));
                ginv * lower
            })
            .collect();
        Self {
            kind: ConnectionKind::LeviCivita,
            gamma,
        }
    }

    /// Chern connection with the default abort-on-failure guard.
    pub fn chern(s: &AlmostHermitianStructure) -> Result<Self> {
        Self::chern_with_policy(s, GuardPolicy::Abort).map(|(c, _)| c)
    }

    /// Real dimension 4 only:
    /// `nabla_X Y = D_X Y - 1/2 theta(JX) JY - 1/2 theta(Y) X + 1/2 g(X,Y) theta# + W(X,Y)`
    /// with `g(W(X,Y), Z) = g(X, N(Z,Y))`.
    pub fn chern_with_policy(s: &AlmostHermitianStructure, policy: GuardPolicy) -> Result<(Self, ChernGuard)> {
        let m = s.dim();
        if m != 4 {
            return Err(Error::Unsupported(format!(
                "Chern connection formula is only valid in real dimension 4, got {m}"
            )));
        }
        let lc = Self::levi_civita(s);
        let theta = s.lee_form().theta;
        let theta_sharp = s.sharp(&theta);
        let nij = s.nijenhuis();
        let j = s.j();
        let g = s.metric();
        let ginv = s.metric_inv();
        let jt_theta = j.transpose() * &theta; // (theta o J)_i = theta(J e_i)
        let mut gamma = Vec::with_capacity(m);
        for i in 0..m {
            let mut gi = lc.gamma[i].clone();
            for jj in 0..m {
                let mut col = j.column(jj) * (-0.5 * jt_theta[i]);
                col[i] -= 0.5 * theta[jj];
                col += &theta_sharp * (0.5 * g[(i, jj)]);
                // W(e_i, e_j) lowered: z -> g(e_i, N(e_z, e_j))
                let w_low = Vector::from_fn(m, |z, _| {
                    let n = nij.at(z, jj);
                    (0..m).map(|l| g[(i, l)] * n[l]).sum::<f64>()
                });
                col += ginv * w_low;
                let mut c = gi.column_mut(jj);
                c += col;
            }
            gamma.push(gi);
        }
        let conn = Self {
            kind: ConnectionKind::Chern,
            gamma,
        };
        let guard = conn.chern_guard(s);
        if !guard.passed() && policy == GuardPolicy::Abort {
            return Err(Error::Guard {
                connection: "chern",
                detail: format!(
                    "|nabla g| = {:.3e}, |nabla J| = {:.3e}, |T + T(J,J)| = {:.3e} (tolerance {:.1e})",
                    guard.metric, guard.complex, guard.torsion_type, guard.tolerance
                ),
            });
        }
        Ok((conn, guard))
    }

    /// `D^W_X Y = D_X Y - 1/2 theta(X) Y - 1/2 theta(Y) X + 1/2 g(X,Y) theta#`.
    pub fn weyl(s: &AlmostHermitianStructure) -> Self {
        let m = s.dim();
        let lc = Self::levi_civita(s);
        let theta = s.lee_form().theta;
        let theta_sharp = s.sharp(&theta);
        let g = s.metric();
        let gamma = (0..m)
            .map(|i| {
                let mut gi = lc.gamma[i].clone();
                for jj in 0..m {
                    gi[(jj, jj)] -= 0.5 * theta[i];
                    gi[(i, jj)] -= 0.5 * theta[jj];
                    for k in 0..m {
                        gi[(k, jj)] += 0.5 * g[(i, jj)] * theta_sharp[k];
                    }
                }
                gi
            })
            .collect();
        Self {
            kind: ConnectionKind::Weyl,
            gamma,
        }
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.gamma
    }

    pub fn gamma(&self, i: usize) -> &Mat {
        &self.gamma[i]
    }

    /// `Gamma^k_{ij}`, the `e_k` component of `nabla_{e_i} e_j`.
    pub fn coefficient(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[i][(k, j)]
    }

    /// Matrix of `nabla_X`.
    pub fn along(&self, x: &Vector) -> Mat {
        let m = self.dim();
        let mut out = Mat::zeros(m, m);
        for (i, g) in self.gamma.iter().enumerate() {
            if x[i] != 0.0 {
                out += g * x[i];
            }
        }
        out
    }

    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        self.along(x) * y
    }

    /// `T(X, Y) = nabla_X Y - nabla_Y X - [X, Y]`, slots (cov, cov, contra).
    pub fn torsion(&self, alg: &LieAlgebra) -> InvariantTensor {
        let m = self.dim();
        InvariantTensor::from_fn(m, vec![Slot::Covariant, Slot::Covariant, Slot::Contravariant], |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            self.gamma[i][(k, j)] - self.gamma[j][(k, i)] - alg.structure_constant(i, j, k)
        })
    }

    pub fn curvature(&self, alg: &LieAlgebra) -> CurvatureTensor {
        let m = self.dim();
        let mut r = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut e = -(&self.gamma[i] * &self.gamma[j] - &self.gamma[j] * &self.gamma[i]);
                for l in 0..m {
                    let c = alg.structure_constant(i, j, l);
                    if c != 0.0 {
                        e += &self.gamma[l] * c;
                    }
                }
                r.push(e);
            }
        }
        CurvatureTensor { dim: m, r }
    }

    /// `nabla T` with the derivative slot placed first.
    pub fn covariant_derivative(&self, t: &InvariantTensor) -> Result<InvariantTensor> {
        let m = self.dim();
        if t.dim() != m {
            return Err(Error::structural("tensor dimension does not match the connection"));
        }
        let mut variance = vec![Slot::Covariant];
        variance.extend_from_slice(t.variance());
        let mut comps = Vec::with_capacity(m * t.components().len());
        for g in &self.gamma {
            comps.extend_from_slice(t.derivation(g).components());
        }
        InvariantTensor::from_components(m, variance, comps)
    }

    /// `nabla E` for an endomorphism, one matrix per derivative direction.
    pub fn endomorphism_derivative(&self, e: &Mat) -> Vec<Mat> {
        self.gamma.iter().map(|g| g * e - e * g).collect()
    }

    fn chern_guard(&self, s: &AlmostHermitianStructure) -> ChernGuard {
        let m = self.dim();
        let g = s.metric();
        let j = s.j();
        let scale = self
            .gamma
            .iter()
            .map(|g| g.amax())
            .fold(1.0_f64, f64::max)
            * g.amax().max(1.0);
        let metric = self
            .gamma
            .iter()
            .map(|gi| (gi.transpose() * g + g * gi).amax())
            .fold(0.0, f64::max);
        let complex = self
            .endomorphism_derivative(j)
            .iter()
            .map(|d| d.amax())
            .fold(0.0, f64::max);
        let t = self.torsion(s.algebra());
        let mut torsion_type: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let ja = j.column(a);
                let jb = j.column(b);
                for k in 0..m {
                    let mut v = t.get(&[a, b, k]);
                    for p in 0..m {
                        for q in 0..m {
                            v += ja[p] * jb[q] * t.get(&[p, q, k]);
                        }
                    }
                    torsion_type = torsion_type.max(v.abs());
                }
            }
        }
        ChernGuard {
            metric,
            complex,
            torsion_type,
            tolerance: EPS_ABS * scale.max(1.0) * 10.0,
        }
    }
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R(e_i, e_j)` as an endomorphism.
    pub fn basis(&self, i: usize, j: usize) -> &Mat {
        &self.r[i * self.dim + j]
    }

    /// `R(X, Y)` as an endomorphism.
    pub fn endomorphism(&self, x: &Vector, y: &Vector) -> Mat {
        let m = self.dim;
        let mut out = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let w = x[i] * y[j];
                if w != 0.0 {
                    out += self.basis(i, j) * w;
                }
            }
        }
        out
    }

    /// `R(X, Y) Z`.
    pub fn apply(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        self.endomorphism(x, y) * z
    }

    /// Slots `(i, j, l, k)` hold the `e_l` component of `R(e_i, e_j) e_k`.
    pub fn as_tensor(&self) -> InvariantTensor {
        let m = self.dim;
        InvariantTensor::from_fn(
            m,
            vec![Slot::Covariant, Slot::Covariant, Slot::Contravariant, Slot::Covariant],
            |idx| self.basis(idx[0], idx[1])[(idx[2], idx[3])],
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().map(|e| e.amax()).fold(0.0, f64::max)
    }
}
