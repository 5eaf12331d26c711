//! Ricci-type forms and scalar curvatures of an almost-Hermitian structure.
//!
//! [`Geometry`] builds the Lee form, Nijenhuis tensor, the three connections
//! and their curvatures once; every trace below is an orthonormal-frame sum
//! over the structure's adapted frame, re-expressed in the input basis.

use crate::connections::{ChernGuard, Connection, CurvatureTensor, GuardPolicy};
use crate::error::Result;
use crate::hermitian::{unit, AlmostHermitianStructure, LeeForm, NijenhuisTensor};
use crate::tensor::{Form, InvariantTensor, Mat, Vector};

#[derive(Debug, Clone)]
pub struct Geometry {
    structure: AlmostHermitianStructure,
    lee: LeeForm,
    nijenhuis: NijenhuisTensor,
    levi_civita: Connection,
    chern: Connection,
    weyl: Connection,
    chern_guard: ChernGuard,
    riemann: CurvatureTensor,
    chern_curvature: CurvatureTensor,
    weyl_curvature: CurvatureTensor,
}

/// All Ricci-type quantities of one structure, bilinear forms as matrices
/// `psi[(i, j)] = psi(e_i, e_j)`.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub rho_chern: Form,
    pub r_second_chern: Form,
    pub ric_bismut: Form,
    pub rwf: Form,
    pub ric_weyl: Mat,
    pub ric_weyl_tilde: Mat,
    pub ric_riemann: Mat,
    pub rho_star: Mat,
    pub scalars: Scalars,
    pub nijenhuis_factor: Form,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalars {
    pub s_h: f64,
    pub s_g: f64,
    /// `s^g - 3 delta theta - 3/2 |theta|^2`.
    pub s_w: f64,
    /// Trace of `Ric^W`, the second route to `s_w`.
    pub s_w_trace: f64,
    pub s_star: f64,
}

impl Geometry {
    pub fn new(structure: AlmostHermitianStructure) -> Result<Self> {
        Self::with_policy(structure, GuardPolicy::Abort)
    }

    pub fn with_policy(structure: AlmostHermitianStructure, policy: GuardPolicy) -> Result<Self> {
        let lee = structure.lee_form();
        let nijenhuis = structure.nijenhuis();
        let levi_civita = Connection::levi_civita(&structure);
        let (chern, chern_guard) = Connection::chern_with_policy(&structure, policy)?;
        let weyl = Connection::weyl(&structure);
        let alg = structure.algebra();
        let riemann = levi_civita.curvature(alg);
        let chern_curvature = chern.curvature(alg);
        let weyl_curvature = weyl.curvature(alg);
        Ok(Self {
            structure,
            lee,
            nijenhuis,
            levi_civita,
            chern,
            weyl,
            chern_guard,
            riemann,
            chern_curvature,
            weyl_curvature,
        })
    }

    pub fn structure(&self) -> &AlmostHermitianStructure {
        &self.structure
    }

    pub fn lee(&self) -> &LeeForm {
        &self.lee
    }

    pub fn nijenhuis(&self) -> &NijenhuisTensor {
        &self.nijenhuis
    }

    pub fn levi_civita(&self) -> &Connection {
        &self.levi_civita
    }

    pub fn chern(&self) -> &Connection {
        &self.chern
    }

    pub fn weyl(&self) -> &Connection {
        &self.weyl
    }

    pub fn chern_guard(&self) -> &ChernGuard {
        &self.chern_guard
    }

    pub fn riemann(&self) -> &CurvatureTensor {
        &self.riemann
    }

    pub fn chern_curvature(&self) -> &CurvatureTensor {
        &self.chern_curvature
    }

    pub fn weyl_curvature(&self) -> &CurvatureTensor {
        &self.weyl_curvature
    }

    fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// Lee form components `theta(e_i)`.
    pub fn theta(&self) -> &Vector {
        &self.lee.theta
    }

    pub fn theta_form(&self) -> Form {
        self.lee.as_form()
    }

    pub fn theta_sharp(&self) -> Vector {
        self.structure.sharp(&self.lee.theta)
    }

    pub fn theta_norm_sq(&self) -> f64 {
        self.structure.covector_norm_sq(&self.lee.theta)
    }

    pub fn d(&self, alpha: &Form) -> Form {
        self.structure
            .exterior_derivative(alpha)
            .expect("form built over this structure")
    }

    pub fn d_theta(&self) -> Form {
        self.d(&self.theta_form())
    }

    /// The 1-form `J theta = -theta(J .)`.
    pub fn j_theta(&self) -> Form {
        self.structure.j_action(&self.theta_form())
    }

    pub fn d_j_theta(&self) -> Form {
        self.d(&self.j_theta())
    }

    pub fn codifferential(&self, alpha: &Form) -> Form {
        self.structure
            .codifferential_with(&self.levi_civita, alpha)
            .expect("form built over this structure")
    }

    pub fn delta_theta(&self) -> f64 {
        self.codifferential(&self.theta_form()).value()
    }

    /// `(D^g alpha)(X, Y) = (D^g_X alpha)(Y)` for a 1-form.
    pub fn dg_covector(&self, alpha: &Vector) -> Mat {
        let t = self
            .levi_civita
            .covariant_derivative(&InvariantTensor::from_covector(alpha))
            .expect("dimension matches");
        t.to_matrix().expect("rank two")
    }

    pub fn dg_theta(&self) -> Mat {
        self.dg_covector(&self.lee.theta)
    }

    /// J-anti-invariant part of the symmetrised `D^g theta`.
    pub fn lee_sym_j_minus(&self) -> Mat {
        let dg = self.dg_theta();
        self.structure.j_minus(&((&dg + dg.transpose()) * 0.5))
    }

    /// `(L_X g)(Y, Z) = -g([X,Y], Z) - g(Y, [X,Z])`.
    pub fn lie_metric(&self, x: &Vector) -> Mat {
        let ad = self.structure.algebra().ad(x);
        let g = self.structure.metric();
        -(ad.transpose() * g + g * &ad)
    }

    /// `(L_X J) Y = [X, JY] - J[X, Y]`.
    pub fn lie_j(&self, x: &Vector) -> Mat {
        let ad = self.structure.algebra().ad(x);
        let j = self.structure.j();
        &ad * j - j * &ad
    }

    /// `N_{theta#}(X, Y) = g(N(X, Y), theta#)`.
    pub fn n_theta(&self) -> Form {
        self.nijenhuis.contracted(&self.structure, &self.theta_sharp())
    }

    /// `N_X(Y, Z) = g(N(Y, Z), X)`.
    pub fn n_x(&self, x: &Vector) -> Form {
        self.nijenhuis.contracted(&self.structure, x)
    }

    /// `D^W_{e_i} J` for every basis direction.
    pub fn weyl_dj(&self) -> Vec<Mat> {
        self.weyl.endomorphism_derivative(self.structure.j())
    }

    /// `(theta ⊗ theta)(X, Y) = theta(X) theta(Y)`.
    pub fn theta_theta(&self) -> Mat {
        &self.lee.theta * self.lee.theta.transpose()
    }

    fn frame_pairs(&self) -> Vec<(Vector, Vector)> {
        let s = &self.structure;
        (0..self.dim())
            .map(|i| {
                let f = s.frame_vector(i);
                let jf = s.j() * &f;
                (f, jf)
            })
            .collect()
    }

    /// `(X, Y) -> 1/2 sum_i g(R_{X,Y} f_i, J f_i)`.
    fn first_trace(&self, r: &CurvatureTensor) -> Form {
        let m = self.dim();
        let g = self.structure.metric();
        let pairs = self.frame_pairs();
        Form::from_matrix(&Mat::from_fn(m, m, |a, b| {
            let e = r.basis(a, b);
            0.5 * pairs
                .iter()
                .map(|(f, jf)| (jf.transpose() * g * (e * f))[(0, 0)])
                .sum::<f64>()
        }))
    }

    /// `(X, Y) -> 1/2 sum_i g(R_{f_i, J f_i} X, Y)` as a bilinear matrix.
    fn second_trace(&self, r: &CurvatureTensor) -> Mat {
        let m = self.dim();
        let g = self.structure.metric();
        let mut out = Mat::zeros(m, m);
        for (f, jf) in self.frame_pairs() {
            out += r.endomorphism(&f, &jf).transpose() * g * 0.5;
        }
        out
    }

    /// `(X, Y) -> sum_i g(R_{f_i, X} f_i, Y)`.
    fn ricci_trace(&self, r: &CurvatureTensor) -> Mat {
        let m = self.dim();
        let g = self.structure.metric();
        let mut out = Mat::zeros(m, m);
        for (f, _) in self.frame_pairs() {
            for a in 0..m {
                let v = r.endomorphism(&f, &unit(m, a)) * &f;
                let low = g * v;
                for b in 0..m {
                    out[(a, b)] += low[b];
                }
            }
        }
        out
    }

    pub fn rho_chern(&self) -> Form {
        self.first_trace(&self.chern_curvature)
    }

    pub fn second_chern_ricci(&self) -> Form {
        Form::from_matrix(&self.second_trace(&self.chern_curvature))
    }

    /// `Ric^B = rho^nabla + d J theta`.
    pub fn bismut_ricci(&self) -> Form {
        self.rho_chern().add(&self.d_j_theta())
    }

    pub fn rwf(&self) -> Form {
        Form::from_matrix(&self.second_trace(&self.weyl_curvature))
    }

    pub fn ric_weyl(&self) -> Mat {
        self.ricci_trace(&self.weyl_curvature)
    }

    /// `(X, Y) -> sum_i g(R^W_{X, f_i} Y, f_i)`.
    pub fn ric_weyl_tilde(&self) -> Mat {
        let m = self.dim();
        let g = self.structure.metric();
        let mut out = Mat::zeros(m, m);
        for (f, _) in self.frame_pairs() {
            let fl = g * &f;
            for a in 0..m {
                let e = self.weyl_curvature.endomorphism(&unit(m, a), &f);
                for b in 0..m {
                    out[(a, b)] += (e.column(b).transpose() * &fl)[(0, 0)];
                }
            }
        }
        out
    }

    pub fn ric_riemann(&self) -> Mat {
        self.ricci_trace(&self.riemann)
    }

    /// `rho*(X, Y) = R^g(F)(X, JY)`.
    pub fn rho_star(&self) -> Mat {
        self.structure.j_second(&self.second_trace(&self.riemann))
    }

    /// `1/2 sum_{i,j} N(f_i, f_j)^b ^ (J N(f_i, f_j))^b`.
    pub fn nijenhuis_factor(&self) -> Form {
        let m = self.dim();
        let s = &self.structure;
        let mut out = Form::zero(m, 2);
        for a in 0..m {
            for b in 0..m {
                let n = self.nijenhuis.apply(&s.frame_vector(a), &s.frame_vector(b));
                let nf = Form::from_covector(&s.flat(&n));
                let jnf = Form::from_covector(&s.flat(&(s.j() * &n)));
                out = out.add(&nf.wedge(&jnf).scaled(0.5));
            }
        }
        out
    }

    /// Trace of a bilinear form over the orthonormal frame.
    pub fn trace(&self, psi: &Mat) -> f64 {
        (psi * self.structure.metric_inv()).trace()
    }

    pub fn scalars(&self) -> Scalars {
        self.scalars_from(&self.second_trace(&self.chern_curvature), &self.ric_riemann(), &self.ric_weyl(), &self.rho_star())
    }

    fn scalars_from(&self, r: &Mat, ric_g: &Mat, ric_w: &Mat, rho_star: &Mat) -> Scalars {
        let s_h = self
            .frame_pairs()
            .iter()
            .map(|(f, jf)| (f.transpose() * r * jf)[(0, 0)])
            .sum();
        let s_g = self.trace(ric_g);
        let s_w = s_g - 3.0 * self.delta_theta() - 1.5 * self.theta_norm_sq();
        Scalars {
            s_h,
            s_g,
            s_w,
            s_w_trace: self.trace(ric_w),
            s_star: self.trace(rho_star),
        }
    }

    pub fn report(&self) -> CurvatureReport {
        let r = self.second_trace(&self.chern_curvature);
        let ric_riemann = self.ric_riemann();
        let ric_weyl = self.ric_weyl();
        let rho_star = self.rho_star();
        let scalars = self.scalars_from(&r, &ric_riemann, &ric_weyl, &rho_star);
        CurvatureReport {
            rho_chern: self.rho_chern(),
            r_second_chern: Form::from_matrix(&r),
            ric_bismut: self.bismut_ricci(),
            rwf: self.rwf(),
            ric_weyl,
            ric_weyl_tilde: self.ric_weyl_tilde(),
            ric_riemann,
            rho_star,
            scalars,
            nijenhuis_factor: self.nijenhuis_factor(),
        }
    }
}

/// First Ricci form of the canonical connection `nabla^(t)` on a Lie algebra:
/// `-1/2 { tr(ad_{[X,Y]} J) - t tr ad_{J[X,Y]} + (t - 1) <F, d [X,Y]^b> }`.
pub fn gauduchon_ricci(s: &AlmostHermitianStructure, t: f64) -> Form {
    let m = s.dim();
    let alg = s.algebra();
    let j = s.j();
    let f = s.fundamental_form();
    Form::from_matrix(&Mat::from_fn(m, m, |a, b| {
        let z = alg.basis_bracket(a, b);
        let t1 = (alg.ad(&z) * j).trace();
        let t2 = alg.ad(&(j * &z)).trace();
        let dz = s
            .exterior_derivative(&Form::from_covector(&s.flat(&z)))
            .expect("dimension matches");
        let t3 = s.form_inner(f, &dz);
        -0.5 * (t1 - t * t2 + (t - 1.0) * t3)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalog;

    fn structure() -> AlmostHermitianStructure {
        let s5 = 5f64.sqrt() - 1.0;
        let g = Mat::from_diagonal(&Vector::from_vec(vec![s5, 1.0, s5, 1.0]));
        let mut j = Mat::zeros(4, 4);
        j[(2, 0)] = 1.0;
        j[(0, 2)] = -1.0;
        j[(3, 1)] = 1.0;
        j[(1, 3)] = -1.0;
        AlmostHermitianStructure::new(catalog::a36_a1(), g, j).unwrap()
    }

    #[test]
    fn basic_symmetries() {
        let geo = Geometry::new(structure()).unwrap();
        let rep = geo.report();
        assert!((&rep.ric_weyl - rep.ric_weyl.transpose()).amax() < 1e-12);
        assert!((&rep.ric_riemann - rep.ric_riemann.transpose()).amax() < 1e-12);
        let diff = &rep.ric_weyl_tilde - &rep.ric_weyl - geo.d_theta().to_matrix();
        assert!(diff.amax() < 1e-12, "{diff}");
        assert!((rep.scalars.s_w - rep.scalars.s_w_trace).abs() < 1e-12);
    }

    #[test]
    fn trace_formula_matches_chern() {
        let geo = Geometry::new(structure()).unwrap();
        let t1 = gauduchon_ricci(geo.structure(), 1.0);
        assert!(t1.sub(&geo.rho_chern()).max_abs() < 1e-12);
        let tm1 = gauduchon_ricci(geo.structure(), -1.0);
        assert!(tm1.sub(&geo.bismut_ricci()).max_abs() < 1e-12);
    }
}
