//! Condition flags, Einstein-type residuals and the curvature identity suite.

use rand::Rng;
use serde::Serialize;

use crate::curvatures::{gauduchon_ricci, Geometry};
use crate::error::{Error, Result};
use crate::hermitian::{unit, AlmostHermitianStructure};
use crate::tensor::{Form, InvariantTensor, Mat, Slot, Vector};
use crate::{EPS_ABS, EPS_REL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flag {
    pub value: bool,
    pub residual: f64,
}

impl Flag {
    fn from_residual(residual: f64) -> Self {
        Self {
            value: residual <= EPS_ABS,
            residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionFlags {
    pub lcs: Flag,
    pub gauduchon: Flag,
    pub almost_kaehler: Flag,
    pub integrable: Flag,
    pub lee_parallel: Flag,
    pub lee_killing: Flag,
    pub sym_j_minus_vanishes: Flag,
    pub n_theta_vanishes: Flag,
    pub j_invariant_rho_chern: Flag,
    pub j_invariant_rwf: Flag,
    pub lee_nonzero: Flag,
    pub unimodular: Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinReport {
    pub second_chern_residual: f64,
    pub second_chern_lambda: f64,
    pub second_chern_einstein: bool,
    pub bismut_residual: f64,
    pub bismut_lambda: f64,
    /// `|(Ric^g)^{J,-} + 1/2 (theta ⊗ theta)^{J,-}|`, only evaluated when
    /// the structure is Gauduchon, second-Chern–Einstein, unimodular and
    /// `(D^g theta)^{sym,J,-}` vanishes.
    pub weyl_residual: Option<f64>,
    /// `|Ric^W - s^W/(2n) g|`, always evaluated.
    pub weyl_direct_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub id: String,
    pub residual: f64,
    pub scale: f64,
    pub skipped: bool,
    pub passed: bool,
    pub hypotheses: Vec<(String, bool)>,
}

/// Every identity id known to the suite, in evaluation order.
pub const IDENTITY_IDS: &[&str] = &[
    "I-A",
    "I-B",
    "I-C",
    "I-D",
    "I-E",
    "I-F",
    "I-G",
    "I-H",
    "I-I",
    "I-J",
    "I-K",
    "I-L",
    "I-M",
    "I-N",
    "I-O",
    "int_weyl",
    "cycle_n",
    "conformal_sca",
    "diff_ricci",
    "diff_sca",
    "ricci_chern_bismut",
    "weyl_anti",
    "chern_weyl_bridge",
    "weyl_metric_curvature",
    "weyl_ricci_tilde",
    "lee_codifferential",
    "rho_trace_formula",
    "r_j_invariant",
    "rho_closed",
    "bismut_closed",
    "rho_star_exchange",
    "chern_guard",
];

pub fn condition_flags(geo: &Geometry) -> ConditionFlags {
    let s = geo.structure();
    let f_norm = s.form_norm(s.fundamental_form());
    let dg = geo.dg_theta();
    let sym = (&dg + dg.transpose()) * 0.5;
    let rho = geo.rho_chern();
    let rwf = geo.rwf();
    ConditionFlags {
        lcs: Flag::from_residual(s.form_norm(&geo.d_theta())),
        gauduchon: Flag::from_residual(geo.delta_theta().abs()),
        almost_kaehler: Flag::from_residual(s.form_norm(&geo.d(s.fundamental_form())) / f_norm),
        integrable: Flag::from_residual(geo.nijenhuis().norm_sq().sqrt()),
        lee_parallel: Flag::from_residual(s.bilinear_norm(&dg)),
        lee_killing: Flag::from_residual(s.bilinear_norm(&sym)),
        sym_j_minus_vanishes: Flag::from_residual(s.bilinear_norm(&geo.lee_sym_j_minus())),
        n_theta_vanishes: Flag::from_residual(s.form_norm(&geo.n_theta())),
        j_invariant_rho_chern: Flag::from_residual(s.form_norm(&s.j_minus_form(&rho))),
        j_invariant_rwf: Flag::from_residual(s.form_norm(&s.j_minus_form(&rwf))),
        lee_nonzero: Flag {
            value: geo.theta_norm_sq().sqrt() > EPS_ABS,
            residual: geo.theta_norm_sq().sqrt(),
        },
        unimodular: Flag::from_residual(s.algebra().max_trace_ad()),
    }
}

/// Best-fit multiple of `F` and the normalised defect `|alpha - lambda F| / |F|`.
fn fit_f(s: &AlmostHermitianStructure, alpha: &Form) -> (f64, f64) {
    let f = s.fundamental_form();
    let ff = s.form_inner(f, f);
    let lambda = s.form_inner(alpha, f) / ff;
    (lambda, s.form_norm(&alpha.sub(&f.scaled(lambda))) / ff.sqrt())
}

pub fn einstein_residuals(geo: &Geometry) -> EinsteinReport {
    let s = geo.structure();
    let m = s.dim() as f64;
    let r = geo.second_chern_ricci();
    let sc = geo.scalars();
    let lambda = sc.s_h / m;
    let f = s.fundamental_form();
    let second_chern_residual = s.form_norm(&r.sub(&f.scaled(lambda))) / s.form_norm(f);
    let (bismut_lambda, bismut_residual) = fit_f(s, &s.j_plus_form(&geo.bismut_ricci()));
    let flags = condition_flags(geo);
    let second_chern_einstein = second_chern_residual <= EPS_ABS;
    let weyl_residual = (second_chern_einstein
        && flags.gauduchon.value
        && flags.sym_j_minus_vanishes.value
        && flags.unimodular.value)
        .then(|| {
            let e = s.j_minus(&geo.ric_riemann()) + s.j_minus(&geo.theta_theta()) * 0.5;
            s.bilinear_norm(&e)
        });
    let ric_w = geo.ric_weyl();
    let weyl_direct_residual = s.bilinear_norm(&(&ric_w - s.metric() * (sc.s_w_trace / m)));
    EinsteinReport {
        second_chern_residual,
        second_chern_lambda: lambda,
        second_chern_einstein,
        bismut_residual,
        bismut_lambda,
        weyl_residual,
        weyl_direct_residual,
    }
}

/// Residual plus the magnitude it is measured against.
struct Eval {
    residual: f64,
    scale: f64,
}

fn eval(residual: f64, terms: &[f64]) -> Eval {
    Eval {
        residual,
        scale: terms.iter().copied().fold(1.0, f64::max),
    }
}

/// Runs the selected identities (all of them for an empty selection).
pub fn run_identity_suite(geo: &Geometry, selection: &[String]) -> Result<Vec<IdentityCheck>> {
    run_identity_suite_with_tolerance(geo, selection, EPS_REL)
}

pub fn run_identity_suite_with_tolerance(
    geo: &Geometry,
    selection: &[String],
    tolerance: f64,
) -> Result<Vec<IdentityCheck>> {
    for id in selection {
        if !IDENTITY_IDS.contains(&id.as_str()) {
            return Err(Error::structural(format!("unknown identity `{id}`")));
        }
    }
    let ids: Vec<&str> = if selection.is_empty() {
        IDENTITY_IDS.to_vec()
    } else {
        IDENTITY_IDS
            .iter()
            .copied()
            .filter(|id| selection.iter().any(|s| s == id))
            .collect()
    };
    let ctx = Context::new(geo);
    Ok(ids.into_iter().map(|id| ctx.check(id, tolerance)).collect())
}

/// Shared intermediate quantities for one identity-suite run.
struct Context<'a> {
    geo: &'a Geometry,
    s: &'a AlmostHermitianStructure,
    flags: ConditionFlags,
    einstein: EinsteinReport,
    f_norm: f64,
    theta_sq: f64,
    n_sq: f64,
    delta_theta: f64,
    r: Mat,
    rwf: Mat,
    rho: Form,
    d_theta: Form,
    d_j_theta: Form,
    dg_theta_sym: Mat,
    theta_theta: Mat,
    ric_g: Mat,
    rho_star: Mat,
    nfactor: Form,
    weyl_dj: Vec<Mat>,
}

impl<'a> Context<'a> {
    fn new(geo: &'a Geometry) -> Self {
        let s = geo.structure();
        let dg = geo.dg_theta();
        Self {
            geo,
            s,
            flags: condition_flags(geo),
            einstein: einstein_residuals(geo),
            f_norm: s.form_norm(s.fundamental_form()),
            theta_sq: geo.theta_norm_sq(),
            n_sq: geo.nijenhuis().norm_sq(),
            delta_theta: geo.delta_theta(),
            r: geo.second_chern_ricci().to_matrix(),
            rwf: geo.rwf().to_matrix(),
            rho: geo.rho_chern(),
            d_theta: geo.d_theta(),
            d_j_theta: geo.d_j_theta(),
            dg_theta_sym: (&dg + dg.transpose()) * 0.5,
            theta_theta: geo.theta_theta(),
            ric_g: geo.ric_riemann(),
            rho_star: geo.rho_star(),
            nfactor: geo.nijenhuis_factor(),
            weyl_dj: geo.weyl_dj(),
        }
    }

    fn check(&self, id: &str, tolerance: f64) -> IdentityCheck {
        let hypotheses = self.hypotheses(id);
        let skipped = hypotheses.iter().any(|(_, ok)| !ok);
        let (residual, scale) = if skipped {
            (0.0, 1.0)
        } else {
            let e = self.evaluate(id);
            (e.residual, e.scale)
        };
        IdentityCheck {
            id: id.to_string(),
            residual,
            scale,
            skipped,
            passed: skipped || residual <= tolerance * scale,
            hypotheses,
        }
    }

    fn hypotheses(&self, id: &str) -> Vec<(String, bool)> {
        let f = &self.flags;
        let h = |name: &str, v: bool| (name.to_string(), v);
        match id {
            "I-M" => vec![h("lee_killing", f.lee_killing.value), h("gauduchon", f.gauduchon.value)],
            "I-N" => vec![
                h("second_chern_einstein", self.einstein.second_chern_einstein),
                h("gauduchon", f.gauduchon.value),
                h("sym_j_minus_vanishes", f.sym_j_minus_vanishes.value),
                h("unimodular", f.unimodular.value),
            ],
            "I-O" => vec![
                h("lcs", f.lcs.value),
                h("second_chern_einstein", self.einstein.second_chern_einstein),
                h("gauduchon", f.gauduchon.value),
                h("sym_j_minus_vanishes", f.sym_j_minus_vanishes.value),
                h("lee_nonzero", f.lee_nonzero.value),
                h("unimodular", f.unimodular.value),
            ],
            _ => Vec::new(),
        }
    }

    fn form_res(&self, lhs: &Form, rhs: &[Form]) -> Eval {
        let s = self.s;
        let mut diff = lhs.clone();
        let mut terms = vec![s.form_norm(lhs) / self.f_norm];
        for t in rhs {
            diff = diff.sub(t);
            terms.push(s.form_norm(t) / self.f_norm);
        }
        eval(s.form_norm(&diff) / self.f_norm, &terms)
    }

    fn bilinear_res(&self, lhs: &Mat, rhs: &[Mat]) -> Eval {
        let s = self.s;
        let mut diff = lhs.clone();
        let mut terms = vec![s.bilinear_norm(lhs)];
        for t in rhs {
            diff -= t;
            terms.push(s.bilinear_norm(t));
        }
        eval(s.bilinear_norm(&diff), &terms)
    }

    fn scalar_res(lhs: f64, rhs: &[f64]) -> Eval {
        let mut terms = vec![lhs.abs()];
        terms.extend(rhs.iter().map(|x| x.abs()));
        eval((lhs - rhs.iter().sum::<f64>()).abs(), &terms)
    }

    fn evaluate(&self, id: &str) -> Eval {
        let s = self.s;
        let geo = self.geo;
        let m = s.dim();
        let f = s.fundamental_form();
        let g = s.metric();
        match id {
            "I-A" => {
                let rwf_plus = Form::from_matrix(&s.j_plus(&self.rwf));
                self.form_res(
                    &Form::from_matrix(&self.r),
                    &[
                        rwf_plus,
                        f.scaled(0.5 * (self.delta_theta + self.theta_sq)),
                        f.scaled(-0.25 * self.n_sq),
                    ],
                )
            }
            "I-B" => self.bilinear_res(
                &s.j_second(&s.j_plus(&self.rwf)),
                &[
                    sym(&self.rho_star),
                    s.j_plus(&self.dg_theta_sym),
                    g * (-0.25 * self.theta_sq),
                    s.j_plus(&self.theta_theta) * 0.5,
                ],
            ),
            "I-C" => self.bilinear_res(
                &s.j_second(&self.r),
                &[
                    s.j_plus(&self.ric_g),
                    g * (0.25 * self.n_sq),
                    s.j_plus(&self.dg_theta_sym),
                    s.j_plus(&self.theta_theta) * 0.5,
                ],
            ),
            "I-D" => self.curvature_relation(),
            "I-E" => {
                let sc = geo.scalars();
                self.bilinear_res(
                    &(sym(&self.rho_star) - s.j_plus(&self.ric_g)),
                    &[g * ((sc.s_star - sc.s_g) / 4.0)],
                )
            }
            "I-F" => {
                let dtheta_minus = s.j_minus(&self.d_theta.to_matrix());
                self.form_res(
                    &self.rho,
                    &[
                        Form::from_matrix(&self.rwf),
                        self.d_j_theta.scaled(-1.0),
                        Form::from_matrix(&s.j_first(&dtheta_minus)).scaled(-1.0),
                        self.nfactor.scaled(-1.0),
                    ],
                )
            }
            "I-G" => self.form_res(
                &Form::from_matrix(&self.r),
                &[
                    s.j_plus_form(&geo.bismut_ricci()),
                    f.scaled(0.25 * (2.0 * self.delta_theta + 2.0 * self.theta_sq - self.n_sq)),
                    self.nfactor.clone(),
                ],
            ),
            "I-H" => {
                let dn = geo
                    .levi_civita()
                    .covariant_derivative(geo.nijenhuis().tensor())
                    .expect("dimension matches");
                let div = Mat::from_fn(m, m, |a, b| (0..m).map(|p| dn.get(&[p, a, b, p])).sum::<f64>());
                let twisted = |a: &Mat| Form::from_matrix(&s.j_first(&s.j_minus(a)));
                self.form_res(
                    &s.j_minus_form(&Form::from_matrix(&self.rwf)),
                    &[twisted(&-div), twisted(&geo.n_theta().to_matrix()).scaled(1.5)],
                )
            }
            "I-I" => {
                let ts = geo.theta_sharp();
                self.bilinear_res(
                    &self.d_j_theta.to_matrix(),
                    &[
                        f.to_matrix() * (-self.theta_sq),
                        geo.theta_form().wedge(&geo.j_theta()).to_matrix(),
                        s.j_first(&self.dg_theta_sym) * 2.0,
                        s.lower_endomorphism(&geo.lie_j(&ts)),
                    ],
                )
            }
            "I-J" => {
                let jt = geo.j_theta();
                let dgj = geo.dg_covector(&jt.to_covector());
                let jts = s.j() * geo.theta_sharp();
                self.bilinear_res(
                    &self.d_theta.to_matrix(),
                    &[
                        s.j_first(&sym(&dgj)) * -2.0,
                        -s.lower_endomorphism(&geo.lie_j(&jts)),
                    ],
                )
            }
            "I-K" => {
                let ts = geo.theta_sharp();
                let jts = s.j() * &ts;
                let lhs = geo.lie_j(&jts) - s.j() * geo.lie_j(&ts);
                let n = Mat::from_fn(m, m, |k, c| 4.0 * geo.nijenhuis().apply(&ts, &unit(m, c))[k]);
                let diff = &lhs - &n;
                eval(
                    s.endomorphism_norm(&diff),
                    &[s.endomorphism_norm(&lhs), s.endomorphism_norm(&n)],
                )
            }
            "I-L" => {
                let sc = geo.scalars();
                Self::scalar_res(
                    sc.s_w_trace,
                    &[sc.s_g, -3.0 * self.delta_theta, -1.5 * self.theta_sq],
                )
            }
            "I-M" => {
                let ts = geo.theta_sharp();
                let dtm = s.j_minus(&self.d_theta.to_matrix());
                let lhs = Vector::from_fn(m, |x, _| (ts.transpose() * &self.rho_star.column(x))[(0, 0)]);
                let a = Vector::from_fn(m, |x, _| -0.5 * (ts.transpose() * dtm.column(x))[(0, 0)]);
                let b = Vector::from_fn(m, |x, _| s.form_inner(&self.d_theta, &geo.n_x(&unit(m, x))));
                let norm = |v: &Vector| s.vector_norm(&s.sharp(v));
                eval(norm(&(&lhs - &a - &b)), &[norm(&lhs), norm(&a), norm(&b)])
            }
            "I-N" => {
                let sc = geo.scalars();
                self.bilinear_res(
                    &s.j_plus(&self.ric_g),
                    &[
                        g * (sc.s_h / 4.0),
                        g * (-0.25 * self.n_sq),
                        s.j_plus(&self.theta_theta) * -0.5,
                    ],
                )
            }
            "I-O" => {
                let sc = geo.scalars();
                let parts = [
                    Self::scalar_res(sc.s_h, &[2.0 * self.theta_sq, -self.n_sq]),
                    Self::scalar_res(sc.s_w, &[-2.0 * self.n_sq]),
                    Self::scalar_res(sc.s_star, &[0.5 * self.theta_sq]),
                ];
                Eval {
                    residual: parts.iter().map(|e| e.residual).fold(0.0, f64::max),
                    scale: parts.iter().map(|e| e.scale).fold(1.0, f64::max),
                }
            }
            "int_weyl" => {
                // g((D^W_Z J) X, J Y) + 2 g(N(X, Y), Z), slots (Z, X, Y)
                let j = s.j();
                let nij = geo.nijenhuis();
                let t = InvariantTensor::from_fn(m, vec![Slot::Covariant; 3], |idx| {
                    let (z, x, y) = (idx[0], idx[1], idx[2]);
                    let lhs = (j.column(y).transpose() * g * self.weyl_dj[z].column(x))[(0, 0)];
                    let n = nij.at(x, y);
                    lhs + 2.0 * (n.transpose() * g.column(z))[(0, 0)]
                });
                let scale = self.weyl_dj.iter().map(|e| s.endomorphism_norm(e)).fold(0.0, f64::max);
                eval(s.tensor_norm(&t), &[scale, self.n_sq.sqrt()])
            }
            "cycle_n" => {
                let nij = geo.nijenhuis();
                let gn = |x: usize, y: usize, z: usize| (nij.at(x, y).transpose() * g.column(z))[(0, 0)];
                let t = InvariantTensor::from_fn(m, vec![Slot::Covariant; 3], |idx| {
                    let (x, y, z) = (idx[0], idx[1], idx[2]);
                    gn(x, y, z) + gn(y, z, x) + gn(z, x, y)
                });
                eval(s.tensor_norm(&t), &[self.n_sq.sqrt()])
            }
            "conformal_sca" => {
                let sc = geo.scalars();
                let tilde = geo.trace(&geo.ric_weyl_tilde());
                Self::scalar_res(
                    tilde,
                    &[sc.s_g, -3.0 * self.delta_theta, -1.5 * self.theta_sq],
                )
            }
            "diff_ricci" => self.bilinear_res(
                &(sym(&self.rho_star) - s.j_plus(&self.ric_g)),
                &[g * (-0.25 * (2.0 * self.delta_theta + self.theta_sq - 2.0 * self.n_sq))],
            ),
            "diff_sca" => {
                let sc = geo.scalars();
                Self::scalar_res(
                    sc.s_star - sc.s_g,
                    &[-2.0 * self.delta_theta, -self.theta_sq, 2.0 * self.n_sq],
                )
            }
            "ricci_chern_bismut" => {
                self.form_res(&gauduchon_ricci(s, -1.0), &[self.rho.clone(), self.d_j_theta.clone()])
            }
            "weyl_anti" => self.weyl_anti(),
            "chern_weyl_bridge" => self.chern_weyl_bridge(),
            "weyl_metric_curvature" => {
                let rw = geo.weyl_curvature();
                let dt = self.d_theta.to_matrix();
                let t = InvariantTensor::from_fn(m, vec![Slot::Covariant; 4], |idx| {
                    let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
                    let e = rw.basis(x, y);
                    let a = (g.column(w).transpose() * e.column(z))[(0, 0)];
                    let b = (g.column(z).transpose() * e.column(w))[(0, 0)];
                    a + b - dt[(x, y)] * g[(z, w)]
                });
                eval(s.tensor_norm(&t), &[s.form_norm(&self.d_theta), rw.max_abs()])
            }
            "weyl_ricci_tilde" => {
                self.bilinear_res(&geo.ric_weyl_tilde(), &[geo.ric_weyl(), self.d_theta.to_matrix()])
            }
            "lee_codifferential" => {
                let route = s.j_action(&geo.codifferential(f));
                self.form_res(&geo.theta_form(), &[route]).rescaled(self.f_norm)
            }
            "rho_trace_formula" => self.form_res(&self.rho, &[gauduchon_ricci(s, 1.0)]),
            "r_j_invariant" => {
                let r = Form::from_matrix(&self.r);
                self.form_res(&s.j_minus_form(&r), &[]).with_scale(s.form_norm(&r) / self.f_norm)
            }
            "rho_closed" => {
                eval(s.form_norm(&geo.d(&self.rho)), &[s.form_norm(&self.rho)])
            }
            "bismut_closed" => {
                let b = geo.bismut_ricci();
                eval(s.form_norm(&geo.d(&b)), &[s.form_norm(&b)])
            }
            "rho_star_exchange" => {
                let j = s.j();
                let swapped = (j.transpose() * &self.rho_star * j).transpose();
                self.bilinear_res(&self.rho_star, &[swapped])
            }
            "chern_guard" => {
                let gd = geo.chern_guard();
                Eval {
                    residual: gd.metric.max(gd.complex).max(gd.torsion_type),
                    scale: (gd.tolerance / tolerance_floor()).max(1.0),
                }
            }
            other => unreachable!("identity `{other}` has no evaluator"),
        }
    }

    /// Full four-slot relation between the Chern and Weyl curvatures.
    fn curvature_relation(&self) -> Eval {
        let s = self.s;
        let geo = self.geo;
        let m = s.dim();
        let j = s.j();
        let alg = s.algebra();
        let rc = geo.chern_curvature();
        let rw = geo.weyl_curvature();
        let dj = self.d_j_theta.to_matrix();
        let dt = self.d_theta.to_matrix();
        let id = Mat::identity(m, m);
        let mut diff = InvariantTensor::zeros(
            m,
            vec![Slot::Covariant, Slot::Covariant, Slot::Contravariant, Slot::Covariant],
        );
        let mut scale: f64 = 0.0;
        for x in 0..m {
            for y in 0..m {
                let b = self.second_weyl_derivative(x, y, alg);
                let e = &self.weyl_dj;
                let rhs = rw.basis(x, y) - j * (0.5 * dj[(x, y)]) - &id * (0.5 * dt[(x, y)]) - &b * j * 0.5
                    + (&e[x] * &e[y] - &e[y] * &e[x]) * 0.25;
                let d = rc.basis(x, y) - &rhs;
                scale = scale.max(s.endomorphism_norm(rc.basis(x, y))).max(s.endomorphism_norm(rw.basis(x, y)));
                for l in 0..m {
                    for k in 0..m {
                        diff.set(&[x, y, l, k], d[(l, k)]);
                    }
                }
            }
        }
        eval(s.tensor_norm(&diff), &[scale])
    }

    /// `D^W_X(D^W_Y J) - D^W_Y(D^W_X J) - D^W_{[X,Y]} J` on basis vectors.
    fn second_weyl_derivative(&self, x: usize, y: usize, alg: &crate::algebra::LieAlgebra) -> Mat {
        let gw = self.geo.weyl().matrices();
        let e = &self.weyl_dj;
        let comm = |a: &Mat, b: &Mat| a * b - b * a;
        let mut out = comm(&gw[x], &e[y]) - comm(&gw[y], &e[x]);
        for (l, el) in e.iter().enumerate() {
            let c = alg.structure_constant(x, y, l);
            if c != 0.0 {
                out -= el * c;
            }
        }
        out
    }

    /// The J-anticommuting part of `R^W_{X,Y}` against the second derivative of J.
    fn weyl_anti(&self) -> Eval {
        let s = self.s;
        let m = s.dim();
        let j = s.j();
        let alg = s.algebra();
        let rw = self.geo.weyl_curvature();
        let mut diff = InvariantTensor::zeros(
            m,
            vec![Slot::Covariant, Slot::Covariant, Slot::Contravariant, Slot::Covariant],
        );
        let mut scale: f64 = 0.0;
        for x in 0..m {
            for y in 0..m {
                let r = rw.basis(x, y);
                let anti = (r + j * r * j) * 0.5;
                let rhs = self.second_weyl_derivative(x, y, alg) * j * 0.5;
                let d = &anti - &rhs;
                scale = scale.max(s.endomorphism_norm(&anti)).max(s.endomorphism_norm(&rhs));
                for l in 0..m {
                    for k in 0..m {
                        diff.set(&[x, y, l, k], d[(l, k)]);
                    }
                }
            }
        }
        eval(s.tensor_norm(&diff), &[scale])
    }

    /// `nabla_X Y - D^W_X Y = 1/2 theta(X) Y - 1/2 theta(JX) JY + 1/2 (D^W_X J) J Y`.
    fn chern_weyl_bridge(&self) -> Eval {
        let s = self.s;
        let geo = self.geo;
        let m = s.dim();
        let j = s.j();
        let theta = geo.theta();
        let jt = j.transpose() * theta;
        let mut diff = InvariantTensor::zeros(m, vec![Slot::Covariant, Slot::Contravariant, Slot::Covariant]);
        let mut scale: f64 = 0.0;
        for x in 0..m {
            let lhs = geo.chern().gamma(x) - geo.weyl().gamma(x);
            let rhs = Mat::identity(m, m) * (0.5 * theta[x]) - j * (0.5 * jt[x]) + &self.weyl_dj[x] * j * 0.5;
            scale = scale.max(s.endomorphism_norm(&lhs));
            let d = lhs - rhs;
            for l in 0..m {
                for k in 0..m {
                    diff.set(&[x, l, k], d[(l, k)]);
                }
            }
        }
        eval(s.tensor_norm(&diff), &[scale])
    }
}

impl Eval {
    fn rescaled(self, f_norm: f64) -> Self {
        Self {
            residual: self.residual * f_norm,
            scale: (self.scale * f_norm).max(1.0),
        }
    }

    fn with_scale(self, scale: f64) -> Self {
        Self {
            residual: self.residual,
            scale: scale.max(1.0),
        }
    }
}

/// The guard already carries its own tolerance; express it relative to the suite's.
fn tolerance_floor() -> f64 {
    EPS_REL
}

fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Random change of frame near the identity: `g' = P^-T g P^-1`, `J' = P J P^-1`.
pub fn random_perturbation<R: Rng>(
    s: &AlmostHermitianStructure,
    rng: &mut R,
    amplitude: f64,
) -> Result<AlmostHermitianStructure> {
    let m = s.dim();
    let p = Mat::identity(m, m) + Mat::from_fn(m, m, |_, _| amplitude * rng.random_range(-1.0..1.0));
    let pinv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::structural("singular perturbation"))?;
    let g = pinv.transpose() * s.metric() * &pinv;
    let g = (&g + g.transpose()) * 0.5;
    let j = &p * s.j() * &pinv;
    AlmostHermitianStructure::new(s.algebra().clone(), g, j)
}

/// `count` perturbations of `s` drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_perturbations(
    s: &AlmostHermitianStructure,
    seed: u64,
    count: usize,
    amplitude: f64,
) -> Result<Vec<AlmostHermitianStructure>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_perturbation(s, &mut rng, amplitude))
        .collect()
}

pub fn suite_passed(checks: &[IdentityCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}
