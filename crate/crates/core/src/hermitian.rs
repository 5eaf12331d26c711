//! Almost-Hermitian structures `(g, J)` on a Lie algebra and the objects they
//! determine: fundamental form, Lee form, Nijenhuis tensor, Hodge star,
//! codifferential and the J-type / symmetry splittings of 2-tensors.

use crate::algebra::LieAlgebra;
use crate::connections::Connection;
use crate::error::{Error, Result};
use crate::tensor::{increasing_tuples, sort_sign, Form, InvariantTensor, Mat, Slot, Vector};
use crate::EPS_ABS;

#[derive(Debug, Clone)]
pub struct AlmostHermitianStructure {
    algebra: LieAlgebra,
    metric: Mat,
    metric_inv: Mat,
    j: Mat,
    fundamental: Form,
    frame: Mat,
    frame_inv: Mat,
    volume: Form,
    d_scale: f64,
}

/// Lee form together with the least-squares defect of `dF^{n-1} = theta ^ F^{n-1} / (n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeeForm {
    pub theta: Vector,
    pub residual: f64,
}

/// `N(e_i, e_j)` stored as a tensor with slots (covariant, covariant, contravariant).
#[derive(Debug, Clone, PartialEq)]
pub struct NijenhuisTensor {
    tensor: InvariantTensor,
    norm_sq: f64,
}

/// J-type and symmetry parts of a bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorParts {
    pub j_plus: Mat,
    pub j_minus: Mat,
    pub sym: Mat,
    pub antisym: Mat,
}

impl AlmostHermitianStructure {
    /// Validates `(g, J)` and derives `F`, the adapted orthonormal frame and the
    /// volume form. `metric[(i, j)] = g(e_i, e_j)`; `j` acts on column vectors,
    /// so `J e_k` is column `k`.
    pub fn new(algebra: LieAlgebra, metric: Mat, j: Mat) -> Result<Self> {
        let m = algebra.dim();
        if m % 2 != 0 {
            return Err(Error::structural(format!("almost-complex structures need even dimension, got {m}")));
        }
        for (name, t) in [("metric", &metric), ("J", &j)] {
            if t.nrows() != m || t.ncols() != m {
                return Err(Error::structural(format!(
                    "{name} must be {m}x{m}, got {}x{}",
                    t.nrows(),
                    t.ncols()
                )));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::structural(format!("{name} has non-finite entries")));
            }
        }
        let scale = metric.amax().max(1.0);
        let asym = (&metric - metric.transpose()).amax();
        if asym > EPS_ABS * scale {
            return Err(Error::validation("metric symmetry", asym));
        }
        let jsq = (&j * &j + Mat::identity(m, m)).amax();
        if jsq > EPS_ABS * j.amax().max(1.0).powi(2) {
            return Err(Error::validation("J^2 = -Id", jsq));
        }
        let chol = metric.clone().cholesky();
        let Some(chol) = chol else {
            return Err(Error::validation(
                "metric positive-definiteness",
                metric.symmetric_eigenvalues().min().min(0.0).abs(),
            ));
        };
        let compat = (j.transpose() * &metric * &j - &metric).amax();
        if compat > EPS_ABS * scale {
            return Err(Error::validation("g(J., J.) = g", compat));
        }
        let metric_inv = chol.inverse();
        let fundamental = Form::from_matrix(&(j.transpose() * &metric));
        let frame = adapted_frame(&metric, &j);
        let frame_inv = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::structural("adapted frame is singular"))?;
        let volume = Form::basis(m, &(0..m).collect::<Vec<_>>(), frame_inv.determinant());
        Ok(Self {
            algebra,
            metric,
            metric_inv,
            j,
            fundamental,
            frame,
            frame_inv,
            volume,
            d_scale: 1.0,
        })
    }

    /// Rescales every exterior derivative taken through this structure.
    /// Only used to build deliberately broken fixtures for sensitivity tests.
    #[doc(hidden)]
    pub fn with_exterior_scale(mut self, s: f64) -> Self {
        self.d_scale = s;
        self
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn half_dim(&self) -> usize {
        self.dim() / 2
    }

    pub fn metric(&self) -> &Mat {
        &self.metric
    }

    pub fn metric_inv(&self) -> &Mat {
        &self.metric_inv
    }

    pub fn j(&self) -> &Mat {
        &self.j
    }

    pub fn fundamental_form(&self) -> &Form {
        &self.fundamental
    }

    /// Columns are the adapted orthonormal frame `f_1, J f_1, f_3, J f_3, ...`.
    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn frame_vector(&self, i: usize) -> Vector {
        self.frame.column(i).into_owned()
    }

    pub fn volume_form(&self) -> &Form {
        &self.volume
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.metric * y)[(0, 0)]
    }

    pub fn flat(&self, x: &Vector) -> Vector {
        &self.metric * x
    }

    pub fn sharp(&self, alpha: &Vector) -> Vector {
        &self.metric_inv * alpha
    }

    /// Squared norm of a 1-form.
    pub fn covector_norm_sq(&self, alpha: &Vector) -> f64 {
        (alpha.transpose() * &self.metric_inv * alpha)[(0, 0)]
    }

    pub fn exterior_derivative(&self, alpha: &Form) -> Result<Form> {
        let d = self.algebra.exterior_derivative(alpha)?;
        Ok(if self.d_scale == 1.0 { d } else { d.scaled(self.d_scale) })
    }

    /// Metric inner product of forms: sum over increasing index tuples of an
    /// orthonormal frame, so `|F|^2 = n`.
    pub fn form_inner(&self, a: &Form, b: &Form) -> f64 {
        assert_eq!(a.degree(), b.degree(), "form degree mismatch");
        let at = a.pullback(&self.frame);
        let bt = b.pullback(&self.frame);
        increasing_tuples(self.dim(), a.degree())
            .iter()
            .map(|t| at.get(t) * bt.get(t))
            .sum()
    }

    pub fn form_norm(&self, a: &Form) -> f64 {
        self.form_inner(a, a).max(0.0).sqrt()
    }

    /// Frobenius norm of a bilinear form over the orthonormal frame.
    pub fn bilinear_norm(&self, psi: &Mat) -> f64 {
        (self.frame.transpose() * psi * &self.frame).norm()
    }

    /// Norm of a vector-valued quantity, e.g. `T(X, Y) in g`, over the orthonormal frame.
    pub fn vector_norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Frobenius norm of an endomorphism computed in the orthonormal frame.
    pub fn endomorphism_norm(&self, a: &Mat) -> f64 {
        (&self.frame_inv * a * &self.frame).norm()
    }

    /// Norm of an arbitrary tensor, every slot evaluated on the orthonormal frame
    /// (covariant slots) or measured in the dual coframe (contravariant slots).
    pub fn tensor_norm(&self, t: &InvariantTensor) -> f64 {
        let rank = t.rank();
        let d = self.dim();
        let mut cur = t.components().to_vec();
        for s in 0..rank {
            let m = match t.variance()[s] {
                Slot::Covariant => self.frame.clone(),
                Slot::Contravariant => self.frame_inv.transpose(),
            };
            let mut next = vec![0.0; cur.len()];
            let mut idx = vec![0usize; rank];
            for (flat, out) in next.iter_mut().enumerate() {
                crate::tensor::unflatten(flat, d, &mut idx);
                let b = idx[s];
                let mut acc = 0.0;
                for a in 0..d {
                    idx[s] = a;
                    acc += m[(a, b)] * cur[crate::tensor::flatten(&idx, d)];
                }
                *out = acc;
            }
            cur = next;
        }
        cur.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Least-squares Lee form: minimises `|d(F^{n-1}) - theta ^ F^{n-1}|`, which
    /// in dimension 4 is `dF = theta ^ F` and in general agrees with `J delta F`.
    pub fn lee_form(&self) -> LeeForm {
        let m = self.dim();
        let n = self.half_dim();
        if n < 2 {
            return LeeForm {
                theta: Vector::zeros(m),
                residual: 0.0,
            };
        }
        let fpow = self.fundamental.power(n - 1);
        let target = self
            .exterior_derivative(&fpow)
            .expect("dimension checked at construction");
        let columns: Vec<Form> = (0..m)
            .map(|i| Form::basis(m, &[i], 1.0).wedge(&fpow))
            .collect();
        let rows = increasing_tuples(m, 2 * n - 1);
        let a = Mat::from_fn(rows.len(), m, |r, c| columns[c].get(&rows[r]));
        let b = Vector::from_fn(rows.len(), |r, _| target.get(&rows[r]));
        let svd = a.svd(true, true);
        let theta = svd.solve(&b, 1e-12).expect("SVD with U and V^T");
        let fit = columns
            .iter()
            .zip(theta.iter())
            .fold(Form::zero(m, 2 * n - 1), |acc, (c, t)| acc.add(&c.scaled(*t)));
        let residual = self.form_norm(&target.sub(&fit));
        LeeForm { theta, residual }
    }

    /// `4 N(X, Y) = [JX, JY] - [X, Y] - J[JX, Y] - J[X, JY]`.
    pub fn nijenhuis(&self) -> NijenhuisTensor {
        let m = self.dim();
        let alg = &self.algebra;
        let mut t = InvariantTensor::zeros(m, vec![Slot::Covariant, Slot::Covariant, Slot::Contravariant]);
        for i in 0..m {
            let ei = unit(m, i);
            let jei = &self.j * &ei;
            for k in 0..m {
                let ek = unit(m, k);
                let jek = &self.j * &ek;
                let v = (alg.bracket_unchecked(&jei, &jek)
                    - alg.bracket_unchecked(&ei, &ek)
                    - &self.j * alg.bracket_unchecked(&jei, &ek)
                    - &self.j * alg.bracket_unchecked(&ei, &jek))
                    * 0.25;
                for l in 0..m {
                    t.set(&[i, k, l], v[l]);
                }
            }
        }
        let mut norm_sq = 0.0;
        for a in 0..m {
            for b in 0..m {
                let fa = self.frame_vector(a);
                let fb = self.frame_vector(b);
                let v = nij_apply(&t, &fa, &fb);
                norm_sq += self.inner(&v, &v);
            }
        }
        NijenhuisTensor { tensor: t, norm_sq }
    }

    /// Riemannian Hodge star for the orientation in which `F^n = n! v_g`.
    pub fn hodge_star(&self, alpha: &Form) -> Result<Form> {
        let m = self.dim();
        if alpha.dim() != m {
            return Err(Error::structural("form dimension does not match the structure"));
        }
        let k = alpha.degree();
        if k > m {
            return Err(Error::Unsupported(format!("hodge star of a {k}-form in dimension {m}")));
        }
        let tilde = alpha.pullback(&self.frame);
        let star_tilde = Form::from_increasing(m, m - k, |jj| {
            let comp: Vec<usize> = (0..m).filter(|x| !jj.contains(x)).collect();
            let joined: Vec<usize> = comp.iter().chain(jj.iter()).copied().collect();
            let (sign, _) = sort_sign(&joined);
            sign as f64 * tilde.get(&comp)
        });
        Ok(star_tilde.pullback(&self.frame_inv))
    }

    /// `delta alpha = - sum_i i_{f_i} (D^g_{f_i} alpha)` over the orthonormal frame.
    pub fn codifferential(&self, alpha: &Form) -> Result<Form> {
        let lc = Connection::levi_civita(self);
        self.codifferential_with(&lc, alpha)
    }

    pub(crate) fn codifferential_with(&self, lc: &Connection, alpha: &Form) -> Result<Form> {
        let m = self.dim();
        let k = alpha.degree();
        if k == 0 {
            return Ok(Form::zero(m, 0));
        }
        let nabla = lc.covariant_derivative(&alpha.to_tensor())?;
        let mut out = Form::zero(m, k - 1).to_tensor();
        let rank = k - 1;
        let mut rest = vec![0usize; rank];
        let mut full = vec![0usize; k + 1];
        for flat in 0..out.components().len() {
            crate::tensor::unflatten(flat, m, &mut rest);
            full[2..].copy_from_slice(&rest);
            let mut acc = 0.0;
            for i in 0..m {
                for jx in 0..m {
                    let w = self.metric_inv[(i, jx)];
                    if w != 0.0 {
                        full[0] = jx;
                        full[1] = i;
                        acc -= w * nabla.get(&full);
                    }
                }
            }
            out.set(&rest, acc);
        }
        Form::from_tensor(&out)
    }

    /// `psi(J., J.)` for a bilinear form.
    pub fn j_conjugate(&self, psi: &Mat) -> Mat {
        self.j.transpose() * psi * &self.j
    }

    pub fn decompose(&self, psi: &Mat) -> TensorParts {
        let jj = self.j_conjugate(psi);
        TensorParts {
            j_plus: (psi + &jj) * 0.5,
            j_minus: (psi - &jj) * 0.5,
            sym: (psi + psi.transpose()) * 0.5,
            antisym: (psi - psi.transpose()) * 0.5,
        }
    }

    pub fn j_plus(&self, psi: &Mat) -> Mat {
        (psi + self.j_conjugate(psi)) * 0.5
    }

    pub fn j_minus(&self, psi: &Mat) -> Mat {
        (psi - self.j_conjugate(psi)) * 0.5
    }

    /// `psi(J., .)`.
    pub fn j_first(&self, psi: &Mat) -> Mat {
        self.j.transpose() * psi
    }

    /// `psi(., J.)`.
    pub fn j_second(&self, psi: &Mat) -> Mat {
        psi * &self.j
    }

    pub fn j_plus_form(&self, alpha: &Form) -> Form {
        Form::from_matrix(&self.j_plus(&alpha.to_matrix()))
    }

    pub fn j_minus_form(&self, alpha: &Form) -> Form {
        Form::from_matrix(&self.j_minus(&alpha.to_matrix()))
    }

    /// `(J alpha)(X_1, ..., X_k) = (-1)^k alpha(J X_1, ..., J X_k)`.
    pub fn j_action(&self, alpha: &Form) -> Form {
        let sign = if alpha.degree() % 2 == 0 { 1.0 } else { -1.0 };
        alpha.pullback(&self.j).scaled(sign)
    }

    /// Bilinear form `g(A., .)` of an endomorphism.
    pub fn lower_endomorphism(&self, a: &Mat) -> Mat {
        a.transpose() * &self.metric
    }

    /// `g`-adjoint `A^*` with `g(AX, Y) = g(X, A^* Y)`.
    pub fn adjoint(&self, a: &Mat) -> Mat {
        &self.metric_inv * a.transpose() * &self.metric
    }

    pub fn sym_endomorphism(&self, a: &Mat) -> Mat {
        (a + self.adjoint(a)) * 0.5
    }

    pub fn antisym_endomorphism(&self, a: &Mat) -> Mat {
        (a - self.adjoint(a)) * 0.5
    }
}

impl LeeForm {
    pub fn as_form(&self) -> Form {
        Form::from_covector(&self.theta)
    }
}

impl NijenhuisTensor {
    pub fn tensor(&self) -> &InvariantTensor {
        &self.tensor
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn is_integrable(&self) -> bool {
        self.norm_sq <= EPS_ABS
    }

    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        nij_apply(&self.tensor, x, y)
    }

    /// `N(e_i, e_j)` with 0-based indices.
    pub fn at(&self, i: usize, j: usize) -> Vector {
        let m = self.tensor.dim();
        Vector::from_fn(m, |l, _| self.tensor.get(&[i, j, l]))
    }

    /// The 2-form `N_X(Y, Z) = g(N(Y, Z), X)`.
    pub fn contracted(&self, s: &AlmostHermitianStructure, x: &Vector) -> Form {
        let m = self.tensor.dim();
        let xf = s.flat(x);
        Form::from_matrix(&Mat::from_fn(m, m, |i, j| self.at(i, j).dot(&xf)))
    }
}

fn nij_apply(t: &InvariantTensor, x: &Vector, y: &Vector) -> Vector {
    let m = t.dim();
    let mut out = Vector::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for l in 0..m {
                out[l] += w * t.get(&[i, j, l]);
            }
        }
    }
    out
}

pub(crate) fn unit(m: usize, i: usize) -> Vector {
    Vector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Greedy J-adapted Gram–Schmidt over the basis vectors in order.
fn adapted_frame(g: &Mat, j: &Mat) -> Mat {
    let m = g.nrows();
    let ip = |a: &Vector, b: &Vector| (a.transpose() * g * b)[(0, 0)];
    let mut cols: Vec<Vector> = Vec::with_capacity(m);
    for i in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = unit(m, i);
        for f in &cols {
            let c = ip(f, &v);
            v -= f * c;
        }
        let n = ip(&v, &v).max(0.0).sqrt();
        if n <= 1e-8 * g[(i, i)].abs().sqrt().max(1e-300) {
            continue;
        }
        let f = v / n;
        let mut jf = j * &f;
        let jn = ip(&jf, &jf).sqrt();
        jf /= jn;
        cols.push(f);
        cols.push(jf);
    }
    Mat::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalog;

    fn standard_j() -> Mat {
        // J e1 = e2, J e3 = e4
        Mat::from_row_slice(4, 4, &[
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        ])
    }

    #[test]
    fn flat_standard_structure() {
        let s = AlmostHermitianStructure::new(catalog::abelian(), Mat::identity(4, 4), standard_j()).unwrap();
        let f = s.fundamental_form();
        assert_eq!(f.coefficient(&[0, 1]), 1.0);
        assert_eq!(f.coefficient(&[2, 3]), 1.0);
        assert_eq!(s.lee_form().theta.amax(), 0.0);
        assert_eq!(s.nijenhuis().norm_sq(), 0.0);
        let ff = f.wedge(f);
        let vol2 = s.volume_form().scaled(2.0);
        assert!(ff.sub(&vol2).max_abs() < 1e-14);
        let x = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(s.sharp(&x), x);
    }

    #[test]
    fn rejects_bad_inputs() {
        let alg = catalog::abelian();
        let j = standard_j();
        // J^2 != -Id
        assert!(matches!(
            AlmostHermitianStructure::new(alg.clone(), Mat::identity(4, 4), Mat::identity(4, 4)),
            Err(Error::Validation { .. })
        ));
        // not positive-definite
        let mut g = Mat::identity(4, 4);
        g[(0, 0)] = -1.0;
        g[(1, 1)] = -1.0;
        assert!(AlmostHermitianStructure::new(alg.clone(), g, j.clone()).is_err());
        // incompatible metric
        let mut g = Mat::identity(4, 4);
        g[(0, 2)] = 0.1;
        g[(2, 0)] = 0.1;
        let err = AlmostHermitianStructure::new(alg.clone(), g, j.clone()).unwrap_err();
        assert!(err.to_string().contains("g(J., J.)"), "{err}");
        // wrong size
        assert!(AlmostHermitianStructure::new(alg, Mat::identity(3, 3), j).is_err());
    }

    #[test]
    fn frame_is_orthonormal_and_adapted() {
        let g = Mat::from_row_slice(4, 4, &[
            2.0, 0.0, 0.3, 0.0, //
            0.0, 2.0, 0.0, 0.3, //
            0.3, 0.0, 1.0, 0.0, //
            0.0, 0.3, 0.0, 1.0,
        ]);
        let s = AlmostHermitianStructure::new(catalog::a41(), g.clone(), standard_j()).unwrap();
        let p = s.frame();
        assert!((p.transpose() * &g * p - Mat::identity(4, 4)).amax() < 1e-12);
        for k in [0, 2] {
            let jf = s.j() * p.column(k);
            assert!((jf - p.column(k + 1)).amax() < 1e-12);
        }
    }

    #[test]
    fn hodge_star_involution() {
        let s = AlmostHermitianStructure::new(catalog::a36_a1(), Mat::identity(4, 4), standard_j()).unwrap();
        let one = Form::scalar(4, 1.0);
        let v = s.hodge_star(&one).unwrap();
        assert!(v.sub(s.volume_form()).max_abs() < 1e-14);
        assert!((s.hodge_star(&v).unwrap().value() - 1.0).abs() < 1e-14);
        let a = Form::basis(4, &[0, 2], 1.0).add(&Form::basis(4, &[1, 3], -0.5));
        let aa = s.hodge_star(&s.hodge_star(&a).unwrap()).unwrap();
        assert!(aa.sub(&a).max_abs() < 1e-14);
        let b = Form::basis(4, &[0], 1.0);
        let bb = s.hodge_star(&s.hodge_star(&b).unwrap()).unwrap();
        assert!(bb.add(&b).max_abs() < 1e-14);
    }

    #[test]
    fn j_action_on_covector() {
        // J e2 = e4 => (J e^4)(X) = -e^4(JX) gives -e^2
        let j = Mat::from_row_slice(4, 4, &[
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        ]);
        let s = AlmostHermitianStructure::new(catalog::a36_a1(), Mat::identity(4, 4), j).unwrap();
        let je4 = s.j_action(&Form::basis(4, &[3], 1.0));
        assert!(je4.sub(&Form::basis(4, &[1], -1.0)).max_abs() < 1e-15);
        let f = s.fundamental_form().clone();
        assert!(s.j_action(&f).sub(&f).max_abs() < 1e-15);
    }
}
