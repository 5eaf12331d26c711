mod common;

use almost_hermitian::curvatures::Geometry;
use almost_hermitian::hermitian::AlmostHermitianStructure;
use almost_hermitian::tensor::{Form, Mat, Vector};
use common::{perturbed_structures, random_form, rel_close};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn e(i: usize) -> Vector {
    let mut v = Vector::zeros(4);
    v[i] = 1.0;
    v
}

/// `N(X, Y)` straight from `4N = [JX,JY] - [X,Y] - J[JX,Y] - J[X,JY]`.
fn nijenhuis_oracle(s: &AlmostHermitianStructure, x: &Vector, y: &Vector) -> Vector {
    let alg = s.algebra();
    let j = s.j();
    let br = |a: &Vector, b: &Vector| alg.bracket(a, b).unwrap();
    let (jx, jy) = (j * x, j * y);
    (br(&jx, &jy) - br(x, y) - j * br(&jx, y) - j * br(x, &jy)) * 0.25
}

#[test]
fn lee_form_solves_df_eq_theta_wedge_f() {
    for (name, s) in perturbed_structures(1, 50) {
        let theta = Form::from_covector(&s.lee_form().theta);
        let f = s.fundamental_form();
        let df = s.exterior_derivative(f).unwrap();
        let res = df.sub(&theta.wedge(f)).max_abs();
        assert!(res <= 1e-9 * df.max_abs().max(1.0), "{name}: {res}");
    }
}

#[test]
fn fundamental_form_squares_to_twice_the_volume() {
    for (name, s) in perturbed_structures(2, 10) {
        let ff = s.fundamental_form().wedge(s.fundamental_form());
        let vol = s.volume_form().scaled(2.0);
        assert!(ff.sub(&vol).max_abs() <= 1e-9 * vol.max_abs(), "{name}");
    }
}

#[test]
fn nijenhuis_matches_definition() {
    for (name, s) in perturbed_structures(3, 10) {
        let n = s.nijenhuis();
        for i in 0..4 {
            for j in 0..4 {
                let want = nijenhuis_oracle(&s, &e(i), &e(j));
                let got = n.at(i, j);
                assert!((got - &want).amax() <= 1e-10 * want.amax().max(1.0), "{name} N(e{}, e{})", i + 1, j + 1);
            }
        }
    }
}

#[test]
fn nijenhuis_norm_is_eight_times_one_component() {
    for (name, s) in perturbed_structures(4, 50) {
        let n = s.nijenhuis();
        let f1 = s.frame_vector(0);
        let f3 = s.frame_vector(2);
        assert!((s.j() * &f1 - s.frame_vector(1)).amax() < 1e-12, "frame pairs f1 with J f1");
        let one = s.vector_norm(&n.apply(&f1, &f3)).powi(2);
        assert!(rel_close(n.norm_sq(), 8.0 * one, 1e-9), "{name}: {} vs {}", n.norm_sq(), 8.0 * one);
    }
}

#[test]
fn nijenhuis_cyclic_sum_vanishes_in_dimension_four() {
    for (name, s) in perturbed_structures(5, 20) {
        let n = s.nijenhuis();
        let gn = |x: usize, y: usize, z: usize| s.inner(&n.at(x, y), &e(z));
        let scale = n.tensor().max_abs().max(1.0);
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let c = gn(x, y, z) + gn(y, z, x) + gn(z, x, y);
                    assert!(c.abs() <= 1e-10 * scale, "{name}");
                }
            }
        }
    }
}

#[test]
fn j_anti_invariant_two_forms_are_self_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (name, s) in perturbed_structures(6, 10) {
        for _ in 0..5 {
            let beta = s.j_minus_form(&random_form(&mut rng, 4, 2));
            let star = s.hodge_star(&beta).unwrap();
            let res = s.form_norm(&star.sub(&beta));
            assert!(res <= 1e-8 * s.form_norm(&beta).max(1e-300), "{name}: {res}");
        }
    }
}

#[test]
fn n_theta_is_antisymmetric_and_j_anti_invariant() {
    for (name, s) in perturbed_structures(7, 20) {
        let geo = Geometry::new(s.clone()).unwrap();
        let n = s.nijenhuis();
        let th = geo.theta_sharp();
        let m = Mat::from_fn(4, 4, |i, j| s.inner(&n.at(i, j), &th));
        let scale = m.amax().max(1.0);
        assert!((&m + m.transpose()).amax() <= 1e-10 * scale, "{name} antisymmetry");
        let jj = s.j().transpose() * &m * s.j();
        assert!((jj + &m).amax() <= 1e-10 * scale, "{name} J-anti-invariance");
        assert!((geo.n_theta().to_matrix() - m).amax() <= 1e-10 * scale, "{name} n_theta");
    }
}

#[test]
fn lee_form_two_routes() {
    for (name, s) in perturbed_structures(8, 50) {
        let geo = Geometry::new(s.clone()).unwrap();
        let route = s.j_action(&s.codifferential(s.fundamental_form()).unwrap()).to_covector();
        let theta = geo.theta();
        assert!((theta - &route).amax() <= 1e-8 * theta.amax().max(1.0), "{name}");
    }
}
